"""GPS L1 C/A spreading-code generation (Gold codes, PRN 1..32)."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constants import CODE_CHIPS, CODE_SAMPLES, OVERSAMPLE

# G2 output-tap pairs per PRN (phase-selector construction).
G2_TAPS = {
    1: (2, 6), 2: (3, 7), 3: (4, 8), 4: (5, 9), 5: (1, 9), 6: (2, 10),
    7: (1, 8), 8: (2, 9), 9: (3, 10), 10: (2, 3), 11: (3, 4), 12: (5, 6),
    13: (6, 7), 14: (7, 8), 15: (8, 9), 16: (9, 10), 17: (1, 4), 18: (2, 5),
    19: (3, 6), 20: (4, 7), 21: (5, 8), 22: (6, 9), 23: (1, 3), 24: (4, 6),
    25: (5, 7), 26: (6, 8), 27: (7, 9), 28: (8, 10), 29: (1, 6), 30: (2, 7),
    31: (3, 8), 32: (4, 9),
}


@dataclass(frozen=True)
class SpreadingCode:
    """One satellite's C/A code, as +/-1 chips and 4x sample-and-hold samples."""

    prn: int
    chips: np.ndarray      # (1023,) int8, +/-1
    samples: np.ndarray    # (4092,) float64, +/-1


def _lfsr(feedback_taps, output_taps):
    """Run a 10-stage all-ones-seeded LFSR for one period; returns 0/1 chips."""
    reg = [1] * 10
    out = np.empty(CODE_CHIPS, dtype=np.int8)
    for i in range(CODE_CHIPS):
        out[i] = sum(reg[t - 1] for t in output_taps) % 2
        fb = sum(reg[t - 1] for t in feedback_taps) % 2
        reg = [fb] + reg[:-1]
    return out


@lru_cache(maxsize=64)
def gen_ca_code(prn: int) -> SpreadingCode:
    """Generate the C/A Gold code for a PRN, chips mapped 0 -> +1, 1 -> -1.

    Raises ValueError for PRN ids outside 1..32.
    """
    if prn not in G2_TAPS:
        raise ValueError(f"unknown PRN id {prn} (expected 1..32)")
    g1 = _lfsr((3, 10), (10,))
    g2 = _lfsr((2, 3, 6, 8, 9, 10), G2_TAPS[prn])
    bits = np.bitwise_xor(g1, g2)
    chips = (1 - 2 * bits).astype(np.int8)
    samples = np.repeat(chips, OVERSAMPLE).astype(np.float64)
    assert samples.shape[0] == CODE_SAMPLES
    return SpreadingCode(prn=prn, chips=chips, samples=samples)
