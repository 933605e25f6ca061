"""Despreading, data-step detection, and pseudorange estimation.

Despreading compensates the acquired Doppler over absolute sample time, so a
perfectly acquired noiseless satellite yields r[K] = alpha * a * d[K - dK] *
L_c exactly. The step detector scalarizes the symbol sequence along its
principal spatial eigenvector, removes the residual Doppler left by the
250 Hz acquisition grid (data-free squaring spectrum), and matched-filters
the +/-1 step template; sequences with no step inside the window are
reported invalid.
"""

from dataclasses import dataclass

import numpy as np

from .constants import (
    CODE_SAMPLES,
    DATA_STEP_INDEX,
    MUSIC_WINDOW,
    SPEED_OF_LIGHT,
    T_SAMPLE,
)
from .cacode import gen_ca_code

# Residual-Doppler search: half the acquisition bin plus margin, 0.5 Hz steps.
_RESIDUAL_MAX_HZ = 130.0
_RESIDUAL_STEP_HZ = 0.5


@dataclass(frozen=True)
class SymbolSequence:
    """Despread symbol vectors r[K], one per code period."""

    vectors: np.ndarray   # (B, K)
    code_phase: int
    doppler: float
    projected: bool

    @property
    def length(self):
        return self.vectors.shape[1]


def despread(stream, candidate, use_projection):
    """Correlate every code-period window at the acquired phase with the code.

    Applies the candidate's nulling projection when use_projection is set.
    """
    phase = candidate.code_phase
    num_codes = (stream.num_samples - phase) // CODE_SAMPLES
    if num_codes < 1:
        raise ValueError("stream too short to despread")
    code = gen_ca_code(candidate.prn).samples
    span = stream.samples[:, phase : phase + num_codes * CODE_SAMPLES]
    k = np.arange(phase, phase + num_codes * CODE_SAMPLES)
    wiped = span * np.exp(-2j * np.pi * candidate.doppler * k * T_SAMPLE)[None, :]
    vectors = wiped.reshape(stream.num_antennas, num_codes, CODE_SAMPLES) @ code
    if use_projection:
        if candidate.projection is None:
            raise ValueError("candidate carries no nulling projection")
        vectors = candidate.projection.matrix @ vectors
    return SymbolSequence(
        vectors=vectors,
        code_phase=phase,
        doppler=candidate.doppler,
        projected=use_projection,
    )


def _scalarize(vectors):
    """Combine antennas along the principal eigenvector of the covariance."""
    cov = vectors @ np.conj(vectors.T) / vectors.shape[1]
    _, vec = np.linalg.eigh(cov)
    principal = vec[:, -1]
    return np.conj(principal) @ vectors


def _remove_residual_doppler(z):
    """Estimate and derotate the per-symbol rotation left by the Doppler grid.

    Squaring strips the +/-1 data; the rotation 2*omega stays unambiguous
    because the residual is below half the 250 Hz bin.
    """
    k = np.arange(z.shape[0])
    freqs = np.arange(-_RESIDUAL_MAX_HZ, _RESIDUAL_MAX_HZ + _RESIDUAL_STEP_HZ, _RESIDUAL_STEP_HZ)
    omega = 2.0 * np.pi * freqs * CODE_SAMPLES * T_SAMPLE
    spectrum = np.abs(np.exp(-2j * np.outer(omega, k)) @ (z * z))
    best = omega[np.argmax(spectrum)]
    return z * np.exp(-1j * best * k)


def detect_step(seq: SymbolSequence, data_step=DATA_STEP_INDEX, music_window=MUSIC_WINDOW):
    """Data-retardation estimate dK, or None when no step is detectable.

    Scans step positions K in [1, length - music_window] with the template
    s(K'; K) = -1 for K' < K else +1 and keeps the argmax of |sum s * z|,
    provided it beats the stepless template (candidates without a phase flip
    inside the window are invalid).
    """
    n = seq.length
    k_max = n - music_window
    if k_max < 2:
        return None
    z = _remove_residual_doppler(_scalarize(seq.vectors))
    prefix = np.concatenate([[0.0 + 0.0j], np.cumsum(z)])
    total = prefix[-1]
    candidates = np.arange(1, k_max + 1)
    stats = np.abs(total - 2.0 * prefix[candidates])
    best = int(np.argmax(stats))
    if stats[best] <= np.abs(total):
        return None
    return int(candidates[best]) - data_step


def pseudorange(code_phase, step_offset):
    """Pseudorange from code phase and data retardation: c (l + L_c dK) T."""
    return SPEED_OF_LIGHT * (code_phase + CODE_SAMPLES * step_offset) * T_SAMPLE
