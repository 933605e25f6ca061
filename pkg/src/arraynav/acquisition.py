"""Signal acquisition: baseline CAF search and jammer-nulled peak-set search.

The CAF is evaluated over all 4092 code phases and the 33-bin Doppler grid.
Windows start a fixed number of code periods into the stream so the data step
(always later) cannot straddle the correlation window. The nulled variant
estimates the per-cell interference subspace from the code-projected Gram
G(l) - m m^H / L_c and null-steers its leading eigenvectors.
"""

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from ._secular import nulled_caf_kernel
from .cacode import SpreadingCode
from .constants import (
    ACQ_OFFSET_CODES,
    ACQ_THRESHOLD,
    ACQ_THRESHOLD_NULLED,
    CODE_SAMPLES,
    DOPPLER_GRID,
    NULL_DIM,
    T_SAMPLE,
)
from .synth import ReceiveStream

_FFT_LEN = 8192  # >= 2 * CODE_SAMPLES, so circular correlation is linear-exact
_PEAK_SUPPRESS_PHASE = 4   # correlation main-lobe half-width at 4x oversampling
_PEAK_SUPPRESS_DOPPLER = 1


@dataclass(frozen=True)
class NullingProjection:
    """Orthogonal projector onto the complement of the interference subspace."""

    matrix: np.ndarray  # (B, B) Hermitian idempotent
    null_dim: int

    @property
    def kept_rank(self):
        return self.matrix.shape[0] - self.null_dim


@dataclass
class SignalCandidate:
    """One acquired signal; ranging/DoA fields are filled by later stages."""

    prn: int
    code_phase: int
    doppler: float
    caf_value: float
    projection: NullingProjection | None = None
    pseudorange: float = np.nan
    step_index: int = -1
    elevation: float = np.nan
    azimuth: float = np.nan
    steering: np.ndarray | None = None
    music_value: float = np.nan


class AcquisitionContext:
    """Per-stream precomputation shared across all PRN searches.

    Holds the windowed segment, sliding Grams (with eigendecompositions for
    the nulled path) and Doppler-rotated segment FFTs.
    """

    def __init__(self, stream: ReceiveStream, offset=ACQ_OFFSET_CODES * CODE_SAMPLES,
                 doppler_grid=DOPPLER_GRID):
        if offset + 2 * CODE_SAMPLES > stream.num_samples:
            raise ValueError("stream too short for the acquisition window")
        self.offset = offset
        self.doppler_grid = np.asarray(doppler_grid, dtype=float)
        self.segment = stream.samples[:, offset : offset + 2 * CODE_SAMPLES]
        outer = np.einsum("bn,cn->nbc", self.segment, np.conj(self.segment))
        prefix = np.concatenate([np.zeros((1,) + outer.shape[1:], complex), np.cumsum(outer, axis=0)])
        self.grams = prefix[CODE_SAMPLES : CODE_SAMPLES + CODE_SAMPLES] - prefix[:CODE_SAMPLES]
        self.gram_traces = np.real(np.trace(self.grams, axis1=1, axis2=2))
        n = np.arange(2 * CODE_SAMPLES)
        phasors = np.exp(-2j * np.pi * self.doppler_grid[:, None] * n[None, :] * T_SAMPLE)
        self.segment_ffts = np.fft.fft(phasors[:, None, :] * self.segment[None, :, :], _FFT_LEN)
        self._eig = None

    def gram_eig(self):
        """Descending eigenvalues/eigenvectors of every sliding Gram (lazy)."""
        if self._eig is None:
            lam, vec = np.linalg.eigh(self.grams)
            self._eig = (lam[:, ::-1].copy(), vec[:, :, ::-1].copy())
        return self._eig

    def matched_filter_grid(self, code: SpreadingCode):
        """m(l, f) = Y[l] Delta(f) c for the full grid, shape (L_c, F, B).

        Carries a per-(l, f) unit-modulus phase relative to the windowed
        definition; every consumer uses only phase-invariant forms of m.
        """
        code_fft = np.conj(np.fft.fft(code.samples, _FFT_LEN))
        corr = np.fft.ifft(self.segment_ffts * code_fft[None, None, :], axis=-1)
        return np.ascontiguousarray(corr[:, :, :CODE_SAMPLES].transpose(2, 0, 1))

    def baseline_grid(self, code: SpreadingCode):
        """Energy-normalized CAF values over the full (code phase x Doppler) grid."""
        m = self.matched_filter_grid(code)
        num = np.sum(np.abs(m) ** 2, axis=-1)
        return num / np.maximum(self.gram_traces[:, None], 1e-300)

    def nulled_grid(self, code: SpreadingCode, null_dim=NULL_DIM, engine="secular"):
        """Interference-nulled CAF over the full grid.

        engine="secular" solves the rank-one downdate in each Gram eigenbasis;
        engine="eigh" runs a per-cell complex eigendecomposition (reference).
        """
        if not 0 <= null_dim < self.segment.shape[0]:
            raise ValueError("null_dim must be in [0, B)")
        m = self.matched_filter_grid(code)
        if engine == "eigh":
            return self._nulled_grid_eigh(m, null_dim)
        lam, vec = self.gram_eig()
        z = np.matmul(np.conj(vec.swapaxes(-1, -2)), m.transpose(0, 2, 1)).transpose(0, 2, 1)
        q2 = np.ascontiguousarray(np.abs(z) ** 2)
        m2 = np.sum(q2, axis=-1)
        out = np.empty(m2.shape)
        nulled_caf_kernel(
            np.ascontiguousarray(lam), q2, m2, self.gram_traces,
            1.0 / CODE_SAMPLES, null_dim, out,
        )
        return out

    def _nulled_grid_eigh(self, m, null_dim):
        L, F, B = m.shape
        gtilde = self.grams[:, None, :, :] - (
            m[..., :, None] * np.conj(m[..., None, :])
        ) / CODE_SAMPLES
        lam, vec = np.linalg.eigh(gtilde.reshape(L * F, B, B))
        lam = lam[:, ::-1].reshape(L, F, B)
        vec = vec[:, :, ::-1].reshape(L, F, B, B)
        proj = np.sum(
            np.abs(np.einsum("lfbi,lfb->lfi", np.conj(vec[..., :null_dim]), m)) ** 2, axis=-1
        )
        m2 = np.sum(np.abs(m) ** 2, axis=-1)
        num = np.maximum(m2 - proj, 0.0)
        den = (
            self.gram_traces[:, None]
            - m2 / CODE_SAMPLES
            - np.sum(lam[..., :null_dim], axis=-1)
            + num / CODE_SAMPLES
        )
        return np.where(den > 1e-300, num / np.maximum(den, 1e-300), 0.0)


def _window(stream, start):
    if start < 0 or start + CODE_SAMPLES > stream.num_samples:
        raise ValueError("correlation window out of bounds")
    return stream.samples[:, start : start + CODE_SAMPLES]


def doppler_phasor(doppler, length=CODE_SAMPLES):
    """Diagonal of Delta(f): window-relative Doppler compensation."""
    return np.exp(-2j * np.pi * doppler * np.arange(length) * T_SAMPLE)


def apply_code_projection(x, code: SpreadingCode):
    """Apply T_s = I - c c^T / ||c||^2 without materializing it.

    Vectors are projected directly; matrices are treated as row-stacks
    (Y T_s for Y of shape (..., L_c))."""
    c = code.samples
    return x - np.multiply.outer(np.asarray(x) @ c, c) / CODE_SAMPLES


def code_projection_diagonal(code: SpreadingCode):
    """Diagonal of T_s, for rank/trace checks: 1 - c_k^2 / L_c."""
    return 1.0 - code.samples**2 / CODE_SAMPLES


def caf_baseline(stream, code, code_phase, doppler, offset=ACQ_OFFSET_CODES * CODE_SAMPLES):
    """Single-cell energy-normalized CAF (reference form)."""
    y = _window(stream, offset + code_phase)
    m = (y * doppler_phasor(doppler)[None, :]) @ code.samples
    den = np.sum(np.abs(y) ** 2)
    return float(np.sum(np.abs(m) ** 2) / den) if den > 0 else 0.0


def acquire_baseline(stream, code, threshold=ACQ_THRESHOLD, context=None):
    """Global CAF argmax if it clears the threshold, else None."""
    ctx = context or AcquisitionContext(stream)
    grid = ctx.baseline_grid(code)
    flat = np.argmax(grid)
    il, jf = np.unravel_index(flat, grid.shape)
    if grid[il, jf] < threshold:
        return None
    return SignalCandidate(
        prn=code.prn,
        code_phase=int(il),
        doppler=float(ctx.doppler_grid[jf]),
        caf_value=float(grid[il, jf]),
    )


def interference_projection(stream, code, code_phase, doppler, null_dim=NULL_DIM,
                            offset=ACQ_OFFSET_CODES * CODE_SAMPLES):
    """Estimate and null the leading interference subspace at one grid cell.

    Eigendecomposes (Y Delta(f) T_s)(Y Delta(f) T_s)^H and projects out the
    null_dim leading eigenvectors.
    """
    b = stream.num_antennas
    if not 0 <= null_dim < b:
        raise ValueError("null_dim must be in [0, B)")
    y = _window(stream, offset + code_phase)
    ytilde = apply_code_projection(y * doppler_phasor(doppler)[None, :], code)
    lam, vec = np.linalg.eigh(ytilde @ np.conj(ytilde.T))
    leading = vec[:, ::-1][:, :null_dim]
    matrix = np.eye(b, dtype=complex) - leading @ np.conj(leading.T)
    return NullingProjection(matrix=matrix, null_dim=null_dim)


def caf_jass(stream, code, code_phase, doppler, null_dim=NULL_DIM,
             offset=ACQ_OFFSET_CODES * CODE_SAMPLES):
    """Single-cell interference-nulled CAF (reference form)."""
    proj = interference_projection(stream, code, code_phase, doppler, null_dim, offset)
    y = _window(stream, offset + code_phase)
    m = (y * doppler_phasor(doppler)[None, :]) @ code.samples
    num = float(np.sum(np.abs(proj.matrix @ m) ** 2))
    den = float(np.sum(np.abs(proj.matrix @ y) ** 2))
    return num / den if den > 1e-300 else 0.0


def _local_peaks(grid, threshold):
    """Cells >= threshold that dominate their 8-neighborhood (circular in l)."""
    neighbors = []
    padded = np.full((grid.shape[0], grid.shape[1] + 2), -np.inf)
    padded[:, 1:-1] = grid
    for dl in (-1, 0, 1):
        rolled = np.roll(padded, dl, axis=0)
        for df in (-1, 0, 1):
            if dl == 0 and df == 0:
                continue
            neighbors.append(rolled[:, 1 + df : grid.shape[1] + 1 + df])
    dominated = np.ones_like(grid, dtype=bool)
    for nb in neighbors:
        dominated &= grid >= nb
    return np.argwhere(dominated & (grid >= threshold))


def _suppress(cells, values, phase_extent):
    """Keep strongest peaks; drop others in the correlation main lobe around them.

    Equal values resolve in (code phase, Doppler) lexicographic order.
    """
    order = sorted(range(len(cells)), key=lambda i: (-values[i], cells[i][0], cells[i][1]))
    kept = []
    for i in order:
        l, f = cells[i]
        clash = False
        for lk, fk in kept:
            dl = abs(int(l) - int(lk))
            dl = min(dl, phase_extent - dl)
            if dl <= _PEAK_SUPPRESS_PHASE and abs(int(f) - int(fk)) <= _PEAK_SUPPRESS_DOPPLER:
                clash = True
                break
        if not clash:
            kept.append((int(l), int(f)))
    return kept


def acquire_peaks(stream, code, threshold=ACQ_THRESHOLD_NULLED, null_dim=NULL_DIM,
                  context=None, engine="secular"):
    """All nulled-CAF local maxima above threshold, as candidates carrying
    their interference-nulling projections."""
    ctx = context or AcquisitionContext(stream)
    grid = ctx.nulled_grid(code, null_dim, engine=engine)
    cells = _local_peaks(grid, threshold)
    kept = _suppress(cells, [grid[l, f] for l, f in cells], grid.shape[0])
    out = []
    for l, f in kept:
        proj = interference_projection(
            stream, code, l, float(ctx.doppler_grid[f]), null_dim, ctx.offset
        )
        out.append(
            SignalCandidate(
                prn=code.prn,
                code_phase=l,
                doppler=float(ctx.doppler_grid[f]),
                caf_value=float(grid[l, f]),
                projection=proj,
            )
        )
    out.sort(key=lambda c: -c.caf_value)
    return out


def dump_caf_csv(grid, doppler_grid, path):
    """Write a CAF grid as (code_phase, doppler_hz, value) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["code_phase", "doppler_hz", "value"])
        for l in range(grid.shape[0]):
            for j, f in enumerate(doppler_grid):
                writer.writerow([l, f, repr(float(grid[l, j]))])
