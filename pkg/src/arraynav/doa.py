"""Direction-of-arrival estimation with the nulling-aware MUSIC scan.

The scan grid is 1 degree in elevation [0, 90] and azimuth [0, 359]. The
signal subspace is fixed to the principal covariance eigenvector; the
objective accounts for the acquisition-stage spatial filter by projecting
every test steering vector through it.
"""

from dataclasses import dataclass

import numpy as np

from .constants import MUSIC_THRESHOLD, MUSIC_WINDOW
from .geometry import ArrayGeometry, steering_grid

ELEVATIONS_RAD = np.deg2rad(np.arange(91.0))
AZIMUTHS_RAD = np.deg2rad(np.arange(360.0))
_DENOM_GUARD = 1e-12
_NULLED_STEERING_FLOOR = 1e-9


@dataclass(frozen=True)
class DoaEstimate:
    elevation: float      # rad, grid point
    azimuth: float        # rad, grid point
    value: float          # MUSIC objective at the maximum
    steering: np.ndarray  # a(elevation, azimuth), unprojected


class SteeringTable:
    """Precomputed steering vectors for the full scan grid (trial-invariant)."""

    def __init__(self, geometry: ArrayGeometry):
        self.geometry = geometry
        grid = steering_grid(geometry, ELEVATIONS_RAD, AZIMUTHS_RAD)
        self.num_antennas = geometry.num_antennas
        self.matrix = grid.reshape(self.num_antennas, -1)
        self.shape = (ELEVATIONS_RAD.size, AZIMUTHS_RAD.size)


def spatial_covariance(seq, start, window=MUSIC_WINDOW):
    """Empirical covariance (1/Z) R R^H over `window` consecutive symbols."""
    if start < 0 or start + window > seq.length:
        raise ValueError("not enough symbol vectors for the covariance window")
    block = seq.vectors[:, start : start + window]
    return block @ np.conj(block.T) / window


def music_objective(projection, covariance, table: SteeringTable):
    """Objective ||P a||^2 / ||E_N^H P a||^2 over the flat scan grid.

    E_N holds every covariance eigenvector except the principal one; P is the
    candidate's nulling projection (identity when absent). Points the filter
    nulls are assigned 0.
    """
    steering = table.matrix
    if projection is not None:
        steering = projection.matrix @ steering
    num = np.sum(np.abs(steering) ** 2, axis=0)
    _, vec = np.linalg.eigh(covariance)
    noise_basis = vec[:, :-1]
    den = np.sum(np.abs(np.conj(noise_basis.T) @ steering) ** 2, axis=0)
    return np.where(
        num < _NULLED_STEERING_FLOOR * table.num_antennas,
        0.0,
        num / (den + _DENOM_GUARD),
    )


def estimate_doa(projection, covariance, table: SteeringTable) -> DoaEstimate:
    """Grid argmax of the nulling-aware MUSIC objective."""
    objective = music_objective(projection, covariance, table)
    flat = int(np.argmax(objective))
    ei, ai = flat // table.shape[1], flat % table.shape[1]
    return DoaEstimate(
        elevation=float(ELEVATIONS_RAD[ei]),
        azimuth=float(AZIMUTHS_RAD[ai]),
        value=float(objective[flat]),
        steering=table.matrix[:, flat].copy(),
    )


def los_screen(candidates, threshold=MUSIC_THRESHOLD):
    """Keep candidates whose MUSIC objective clears the LoS threshold."""
    return [c for c in candidates if c.music_value >= threshold]
