"""Baseband synthesis of the receive stream: satellites, jammers, spoofers, noise.

All delays are applied at integer sample resolution; Doppler enters as a pure
carrier rotation (transmitters are stationary over a 150 ms trial). Power is
referenced to the mean satellite receive power B (channel gain normalized to
sqrt(B) at the 23,000 km reference distance).
"""

from dataclasses import dataclass

import numpy as np

from .constants import (
    CLOCK_OFFSET_MAX,
    CODE_SAMPLES,
    DATA_STEP_INDEX,
    DOPPLER_MAX,
    EARTH_RADIUS,
    JAMMER_SWITCH_PROB,
    RANGE_REF,
    SIM_CODES,
    SPEED_OF_LIGHT,
    SPOOF_RANGE_MAX,
    SPOOF_RANGE_MIN,
    T_SAMPLE,
)
from .cacode import gen_ca_code
from .geometry import (
    ArrayGeometry,
    LocalDirection,
    ReceiverTruth,
    SatelliteAlmanac,
    direction_unit,
    enu_rotation,
    local_direction,
    propagate,
    range_delay_doppler,
    steering_vector,
    visible,
)

CHANNEL_KINDS = ("los", "rayleigh")


@dataclass(frozen=True)
class JammerConfig:
    """Scenario-level jammer knobs; amplitudes are resolved per trial."""

    antennas: int = 1
    jsr_db: float = 30.0
    channel: str = "los"

    def __post_init__(self):
        if self.antennas < 1:
            raise ValueError("jammer needs at least one antenna")
        if self.channel not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.channel!r}")


@dataclass(frozen=True)
class SpooferConfig:
    spoofed_count: int = 1
    ssr_db: float = 0.0
    channel: str = "los"

    def __post_init__(self):
        if self.spoofed_count < 1:
            raise ValueError("spoofer must imitate at least one satellite")
        if self.channel not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.channel!r}")


@dataclass(frozen=True)
class SatelliteSignal:
    """Resolved per-trial satellite ground truth used by the renderer."""

    prn: int
    amplitude: complex        # alpha: free-space gain with carrier phase
    steering: np.ndarray      # (B,)
    doppler: float            # Hz
    delay_samples: int        # floor(tau / T)
    range_m: float
    direction: LocalDirection


@dataclass(frozen=True)
class JammerScene:
    """One jammer device with per-antenna receive channels (B x J)."""

    channels: np.ndarray
    symbol_var: float         # sigma_J^2 per transmit antenna
    active: int               # antennas transmitting simultaneously (R)
    switch_prob: float = JAMMER_SWITCH_PROB


@dataclass(frozen=True)
class SpoofedSignal:
    prn: int
    delay_samples: int        # apparent total delay floor((rho_app/c + dt)/T)
    doppler: float            # virtual Doppler, Hz
    apparent_range: float     # m, diagnostic


@dataclass(frozen=True)
class SpooferScene:
    """One spoofer antenna: a common channel shared by all imitated signals."""

    channel: np.ndarray       # (B,)
    amplitude: float          # a-check from the SSR
    signals: tuple            # SpoofedSignal entries

    def __post_init__(self):
        if len(self.signals) == 0:
            raise ValueError("spoofer must carry at least one spoofed signal")


@dataclass(frozen=True)
class Scene:
    """Everything synthesize() needs; deterministic given (scene, seed)."""

    almanac: SatelliteAlmanac
    time_s: float
    truth: ReceiverTruth
    geometry: ArrayGeometry
    satellites: tuple         # SatelliteSignal entries (visible ones only)
    jammers: tuple
    spoofers: tuple
    noise_var: float          # sigma_n^2 = 1 / SNR
    sat_positions: np.ndarray  # (S, 3) almanac positions at time_s (receiver knowledge)
    data_step: int = DATA_STEP_INDEX
    num_codes: int = SIM_CODES
    seed: int = 0


@dataclass(frozen=True)
class ReceiveStream:
    samples: np.ndarray       # (B, N) complex
    t_sample: float = T_SAMPLE
    seed: int = 0

    @property
    def num_antennas(self):
        return self.samples.shape[0]

    @property
    def num_samples(self):
        return self.samples.shape[1]


def data_symbol(data_step, k):
    """Data sequence: -1 before the public step index, +1 from it on."""
    return np.where(np.asarray(k) < data_step, -1.0, 1.0)


def transmit_signal(code_samples, data_step, n):
    """Transmit samples t[n] = d[floor(n / L_c)] * c[n mod L_c] for integer n."""
    n = np.asarray(n)
    period = np.floor_divide(n, CODE_SAMPLES)
    return data_symbol(data_step, period) * code_samples[np.mod(n, CODE_SAMPLES)]


def channel_gain(range_m):
    """Free-space attenuation |alpha| = rho_0 / rho (so ||h||^2 = B at rho_0)."""
    if range_m <= 0:
        raise ValueError("range must be positive")
    return RANGE_REF / range_m


def _complex_normal(rng, var, size):
    scale = np.sqrt(var / 2.0)
    return rng.normal(scale=scale, size=size) + 1j * rng.normal(scale=scale, size=size)


def satellite_contribution(sat: SatelliteSignal, data_step, num_samples, out=None):
    """Render one satellite's receive-side contribution into a B x N buffer."""
    b = sat.steering.shape[0]
    if out is None:
        out = np.zeros((b, num_samples), dtype=np.complex128)
    if sat.amplitude == 0:
        return out
    k = np.arange(num_samples)
    code = gen_ca_code(sat.prn).samples
    profile = sat.amplitude * np.exp(2j * np.pi * sat.doppler * k * T_SAMPLE)
    profile *= transmit_signal(code, data_step, k - sat.delay_samples)
    for antenna in range(b):
        out[antenna] += sat.steering[antenna] * profile
    return out


def jammer_contribution(jam: JammerScene, num_samples, rng, out=None):
    """Render one jammer device (barrage for J = 1, switched beams for J >= 2)."""
    b, j = jam.channels.shape
    if out is None:
        out = np.zeros((b, num_samples), dtype=np.complex128)
    if jam.symbol_var == 0.0:
        return out
    if j == 1:
        symbols = _complex_normal(rng, jam.symbol_var, num_samples)
        for antenna in range(b):
            out[antenna] += jam.channels[antenna, 0] * symbols
        return out
    # Beam pattern held between redraw events; R of J antennas active at a time.
    redraw = rng.random(num_samples) < jam.switch_prob
    redraw[0] = True
    starts = np.flatnonzero(redraw)
    bounds = np.append(starts, num_samples)
    for seg in range(starts.size):
        lo, hi = bounds[seg], bounds[seg + 1]
        active = rng.choice(j, size=jam.active, replace=False)
        symbols = _complex_normal(rng, jam.symbol_var, (jam.active, hi - lo))
        out[:, lo:hi] += jam.channels[:, active] @ symbols
    return out


def spoofer_contribution(spoof: SpooferScene, data_step, num_samples, out=None):
    """Render one spoofer antenna: all imitated signals share its channel."""
    b = spoof.channel.shape[0]
    if out is None:
        out = np.zeros((b, num_samples), dtype=np.complex128)
    k = np.arange(num_samples)
    for sig in spoof.signals:
        code = gen_ca_code(sig.prn).samples
        profile = spoof.amplitude * np.exp(2j * np.pi * sig.doppler * k * T_SAMPLE)
        profile *= transmit_signal(code, data_step, k - sig.delay_samples)
        for antenna in range(b):
            out[antenna] += spoof.channel[antenna] * profile
    return out


def synthesize(scene: Scene) -> ReceiveStream:
    """Sum all contributions plus AWGN; bit-reproducible for a fixed scene."""
    b = scene.geometry.num_antennas
    n = scene.num_codes * CODE_SAMPLES
    out = np.zeros((b, n), dtype=np.complex128)
    for sat in scene.satellites:
        satellite_contribution(sat, scene.data_step, n, out=out)
    for idx, jam in enumerate(scene.jammers):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=scene.seed, spawn_key=(2, idx))
        )
        jammer_contribution(jam, n, rng, out=out)
    for spoof in scene.spoofers:
        spoofer_contribution(spoof, scene.data_step, n, out=out)
    noise_rng = np.random.default_rng(
        np.random.SeedSequence(entropy=scene.seed, spawn_key=(1,))
    )
    out += _complex_normal(noise_rng, scene.noise_var, (b, n))
    return ReceiveStream(samples=out, t_sample=T_SAMPLE, seed=scene.seed)


def _hemisphere_direction(rng):
    """Uniform direction on the upper local hemisphere."""
    z = rng.uniform(0.0, 1.0)
    az = rng.uniform(-np.pi, np.pi)
    return LocalDirection(elevation=float(np.arcsin(z)), azimuth=float(az))


def _attacker_channel(kind, geometry, rng):
    """LoS channels point at a random upper-hemisphere direction; Rayleigh is iid."""
    if kind == "los":
        direction = _hemisphere_direction(rng)
        return steering_vector(geometry, direction)
    return _complex_normal(rng, 1.0, geometry.num_antennas)


def build_scene(
    almanac: SatelliteAlmanac,
    geometry: ArrayGeometry,
    snr_db: float,
    jammers=(),
    spoofers=(),
    seed: int = 0,
    num_codes: int = SIM_CODES,
    data_step: int = DATA_STEP_INDEX,
) -> Scene:
    """Draw one trial's ground truth and resolve all transmitter parameters.

    The placement draws consume a dedicated RNG stream in a fixed order, so a
    (seed, config) pair always yields the same scene.
    """
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))

    time_s = rng.uniform(0.0, 366 * 86400.0)
    v = rng.standard_normal(3)
    position = EARTH_RADIUS * v / np.linalg.norm(v)
    yaw = rng.uniform(0.0, 2.0 * np.pi)
    spin = np.array(
        [[np.cos(yaw), -np.sin(yaw), 0.0], [np.sin(yaw), np.cos(yaw), 0.0], [0.0, 0.0, 1.0]]
    )
    truth = ReceiverTruth(
        position=position,
        orientation=enu_rotation(position) @ spin,
        clock_offset=rng.uniform(0.0, CLOCK_OFFSET_MAX),
    )

    positions, velocities = propagate(almanac, time_s)
    sats = []
    visible_prns = []
    for i in range(almanac.size):
        if not visible(position, positions[i]):
            continue
        rho, delay, doppler = range_delay_doppler(
            position, truth.clock_offset, positions[i], velocities[i]
        )
        direction = local_direction(position, truth.orientation, positions[i])
        gain = channel_gain(rho)
        alpha = gain * np.exp(-2j * np.pi * rho / geometry.wavelength)
        sats.append(
            SatelliteSignal(
                prn=int(almanac.prn[i]),
                amplitude=complex(alpha),
                steering=steering_vector(geometry, direction),
                doppler=doppler,
                delay_samples=int(np.floor(delay / T_SAMPLE)),
                range_m=rho,
                direction=direction,
            )
        )
        visible_prns.append(int(almanac.prn[i]))

    jam_scenes = []
    for cfg in jammers:
        jsr = 10.0 ** (cfg.jsr_db / 10.0)
        j = cfg.antennas
        active = 1 if j == 1 else j - 1
        channels = np.column_stack(
            [_attacker_channel(cfg.channel, geometry, rng) for _ in range(j)]
        )
        # Per-antenna JSR averaged over the on/off duty cycle fixes sigma_J^2.
        jam_scenes.append(
            JammerScene(channels=channels, symbol_var=jsr * j / active, active=active)
        )

    spoof_scenes = []
    pool = list(visible_prns)
    for cfg in spoofers:
        if len(pool) < cfg.spoofed_count:
            raise ValueError("not enough visible satellites left to spoof")
        chosen = rng.choice(len(pool), size=cfg.spoofed_count, replace=False)
        prns = [pool[i] for i in sorted(chosen)]
        for prn in prns:
            pool.remove(prn)
        signals = []
        for prn in prns:
            apparent = rng.uniform(SPOOF_RANGE_MIN, SPOOF_RANGE_MAX)
            doppler = rng.uniform(-DOPPLER_MAX, DOPPLER_MAX)
            delay = (apparent / SPEED_OF_LIGHT + truth.clock_offset) / T_SAMPLE
            signals.append(
                SpoofedSignal(
                    prn=prn,
                    delay_samples=int(np.floor(delay)),
                    doppler=doppler,
                    apparent_range=apparent,
                )
            )
        spoof_scenes.append(
            SpooferScene(
                channel=_attacker_channel(cfg.channel, geometry, rng),
                amplitude=float(np.sqrt(10.0 ** (cfg.ssr_db / 10.0))),
                signals=tuple(signals),
            )
        )

    return Scene(
        almanac=almanac,
        time_s=time_s,
        truth=truth,
        geometry=geometry,
        satellites=tuple(sats),
        jammers=tuple(jam_scenes),
        spoofers=tuple(spoof_scenes),
        noise_var=1.0 / 10.0 ** (snr_db / 10.0),
        sat_positions=positions,
        data_step=data_step,
        num_codes=num_codes,
        seed=seed,
    )
