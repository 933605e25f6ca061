"""Constellation geometry: orbit propagation, visibility, directions, steering.

ECEF vectors are plain numpy arrays of shape (3,) in meters. The receiver-local
frame is East-North-Up at the receiver position, composed with a yaw rotation;
elevation/azimuth follow v(theta, phi) = [cos(theta)cos(phi),
cos(theta)sin(phi), sin(theta)].
"""

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .constants import (
    CARRIER_FREQ,
    EARTH_RADIUS,
    NUM_ANTENNAS,
    SPEED_OF_LIGHT,
    WAVELENGTH,
)


@dataclass(frozen=True)
class SatelliteAlmanac:
    """Circular-orbit elements for the constellation (arrays indexed per satellite)."""

    prn: np.ndarray          # (S,) int, unique, in 1..32
    raan: np.ndarray         # (S,) rad, right ascension of ascending node
    inclination: np.ndarray  # (S,) rad
    arg_lat_epoch: np.ndarray  # (S,) rad, argument of latitude at t=0
    radius: np.ndarray       # (S,) m
    rate: np.ndarray         # (S,) rad/s

    def __post_init__(self):
        if len(set(self.prn.tolist())) != self.prn.size:
            raise ValueError("PRN ids must be unique")
        if np.any((self.prn < 1) | (self.prn > 32)):
            raise ValueError("PRN ids must be in 1..32")
        if np.any(self.radius <= 0) or np.any(self.rate <= 0):
            raise ValueError("orbital radius and rate must be positive")

    @property
    def size(self):
        return self.prn.size


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna coordinates (3 x B, receiver-local frame, m) and carrier wavelength."""

    positions: np.ndarray
    wavelength: float = WAVELENGTH

    def __post_init__(self):
        if self.positions.shape[0] != 3 or self.positions.shape[1] < 2:
            raise ValueError("positions must be 3 x B with B >= 2")

    @property
    def num_antennas(self):
        return self.positions.shape[1]


@dataclass(frozen=True)
class ReceiverTruth:
    """Ground truth hidden from the receiver pipeline."""

    position: np.ndarray     # (3,) ECEF, on the Earth sphere
    orientation: np.ndarray  # (3, 3) rotation, local -> ECEF
    clock_offset: float      # s

    def __post_init__(self):
        q = self.orientation
        if not np.allclose(q.T @ q, np.eye(3), atol=1e-12):
            raise ValueError("orientation must be orthonormal")
        if abs(np.linalg.norm(self.position) - EARTH_RADIUS) > 1.0:
            raise ValueError("receiver must sit on the Earth sphere")


@dataclass(frozen=True)
class LocalDirection:
    """Elevation/azimuth in the receiver-local frame."""

    elevation: float  # rad, in [0, pi/2]
    azimuth: float    # rad, in [-pi, pi)


def direction_unit(elevation, azimuth):
    """Unit vector(s) v(theta, phi) in the local frame; accepts scalars or arrays."""
    ct = np.cos(elevation)
    return np.stack(
        [ct * np.cos(azimuth), ct * np.sin(azimuth), np.sin(elevation) * np.ones_like(azimuth)],
        axis=-1,
    )


def ring_array(num_antennas=NUM_ANTENNAS, wavelength=WAVELENGTH):
    """Ring array in the local xy-plane with half-wavelength neighbor spacing."""
    radius = wavelength / (4.0 * np.sin(np.pi / num_antennas))
    ang = 2.0 * np.pi * np.arange(num_antennas) / num_antennas
    pos = np.stack([radius * np.cos(ang), radius * np.sin(ang), np.zeros(num_antennas)])
    return ArrayGeometry(positions=pos, wavelength=wavelength)


def enu_rotation(position):
    """Rotation whose columns are the East/North/Up axes at an ECEF position."""
    up = position / np.linalg.norm(position)
    # East is undefined at the poles; fall back to the x-axis convention there.
    east = np.cross([0.0, 0.0, 1.0], up)
    n = np.linalg.norm(east)
    east = np.array([1.0, 0.0, 0.0]) if n < 1e-12 else east / n
    north = np.cross(up, east)
    return np.column_stack([east, north, up])


def propagate(almanac: SatelliteAlmanac, t: float):
    """Satellite ECEF positions and velocities at time t (circular orbits).

    Returns (positions, velocities), each of shape (S, 3).
    """
    if not np.isfinite(t):
        raise ValueError("propagation time must be finite")
    u = almanac.arg_lat_epoch + almanac.rate * t
    cu, su = np.cos(u), np.sin(u)
    ci, si = np.cos(almanac.inclination), np.sin(almanac.inclination)
    co, so = np.cos(almanac.raan), np.sin(almanac.raan)
    pos = np.stack(
        [co * cu - so * su * ci, so * cu + co * su * ci, su * si], axis=1
    ) * almanac.radius[:, None]
    vel = np.stack(
        [-co * su - so * cu * ci, -so * su + co * cu * ci, cu * si], axis=1
    ) * (almanac.radius * almanac.rate)[:, None]
    return pos, vel


def visible(receiver, satellite):
    """True iff the satellite is strictly above the local horizon plane."""
    return float(np.dot(satellite - receiver, receiver)) > 0.0


def local_direction(receiver, orientation, satellite) -> LocalDirection:
    """Elevation/azimuth of a visible satellite in the receiver-local frame.

    Raises ValueError if the satellite is below the horizon. The azimuth at
    zenith is degenerate and reported as 0.
    """
    u = satellite - receiver
    u = u / np.linalg.norm(u)
    w = orientation.T @ u
    if w[2] < 0.0:
        raise ValueError("satellite below the local horizon")
    elevation = np.arcsin(min(w[2], 1.0))
    horiz = np.hypot(w[0], w[1])
    azimuth = 0.0 if horiz < 1e-12 else np.arctan2(w[1], w[0])
    if azimuth >= np.pi:  # keep the [-pi, pi) convention
        azimuth -= 2.0 * np.pi
    return LocalDirection(elevation=float(elevation), azimuth=float(azimuth))


def steering_vector(geometry: ArrayGeometry, direction: LocalDirection):
    """Per-antenna phase signature a_b = exp(-i 2 pi p_b . v / lambda)."""
    v = direction_unit(direction.elevation, direction.azimuth)
    phase = geometry.positions.T @ v
    return np.exp(-2j * np.pi * phase / geometry.wavelength)


def steering_grid(geometry: ArrayGeometry, elevations, azimuths):
    """Steering vectors for an elevation x azimuth grid, shape (B, nEl, nAz)."""
    v = direction_unit(elevations[:, None], azimuths[None, :])  # (nEl, nAz, 3)
    phase = np.tensordot(geometry.positions.T, v, axes=([1], [2]))
    return np.exp(-2j * np.pi * phase / geometry.wavelength)


def range_delay_doppler(receiver, clock_offset, sat_pos, sat_vel):
    """Range (m), total signal delay (s), and Doppler shift (Hz) for one satellite."""
    d = sat_pos - receiver
    rho = float(np.linalg.norm(d))
    delay = rho / SPEED_OF_LIGHT + clock_offset
    v_radial = float(np.dot(sat_vel, d)) / rho
    doppler = -v_radial / SPEED_OF_LIGHT * CARRIER_FREQ
    return rho, delay, doppler


def load_almanac(path) -> SatelliteAlmanac:
    """Load an almanac from a JSON array of per-satellite element objects."""
    with open(path) as fh:
        rows = json.load(fh)
    return _almanac_from_rows(rows)


def nominal_almanac() -> SatelliteAlmanac:
    """The bundled 24-slot nominal constellation."""
    text = resources.files("arraynav.data").joinpath("nominal_almanac.json").read_text()
    return _almanac_from_rows(json.loads(text))


def _almanac_from_rows(rows):
    return SatelliteAlmanac(
        prn=np.array([r["prn"] for r in rows], dtype=int),
        raan=np.array([r["raan_rad"] for r in rows], dtype=float),
        inclination=np.array([r["inclination_rad"] for r in rows], dtype=float),
        arg_lat_epoch=np.array([r["arg_lat_epoch_rad"] for r in rows], dtype=float),
        radius=np.array([r["radius_m"] for r in rows], dtype=float),
        rate=np.array([r["rate_rad_s"] for r in rows], dtype=float),
    )
