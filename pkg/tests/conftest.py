import numpy as np
import pytest

from arraynav.constants import RANGE_REF
from arraynav.geometry import (
    LocalDirection,
    nominal_almanac,
    ring_array,
    steering_vector,
)
from arraynav.synth import SatelliteSignal, Scene, build_scene, synthesize


@pytest.fixture(scope="session")
def almanac():
    return nominal_almanac()


@pytest.fixture(scope="session")
def geometry():
    return ring_array()


def single_satellite(geometry, prn=5, doppler=1750.0, delay=0, gain=1.0,
                     elev=0.7, az=0.5):
    d = LocalDirection(elevation=elev, azimuth=az)
    return SatelliteSignal(
        prn=prn,
        amplitude=complex(gain),
        steering=steering_vector(geometry, d),
        doppler=doppler,
        delay_samples=delay,
        range_m=RANGE_REF,
        direction=d,
    )


def controlled_scene(almanac, geometry, satellites=(), jammers=(), spoofers=(),
                     noise_var=0.0, num_codes=150, data_step=30, seed=0):
    """Scene with hand-picked transmitters (bypasses random placement)."""
    template = build_scene(almanac, geometry, snr_db=0.0, seed=987)
    return Scene(
        almanac=almanac,
        time_s=template.time_s,
        truth=template.truth,
        geometry=geometry,
        satellites=tuple(satellites),
        jammers=tuple(jammers),
        spoofers=tuple(spoofers),
        noise_var=noise_var,
        sat_positions=template.sat_positions,
        data_step=data_step,
        num_codes=num_codes,
        seed=seed,
    )


@pytest.fixture(scope="session")
def clean_trial(almanac, geometry):
    """One full attack-free trial at SNR -20 dB, synthesized once per session."""
    scene = build_scene(almanac, geometry, snr_db=-20.0, seed=20240)
    return scene, synthesize(scene)
