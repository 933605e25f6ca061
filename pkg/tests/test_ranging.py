import numpy as np
import pytest

from arraynav.acquisition import AcquisitionContext, SignalCandidate, acquire_baseline
from arraynav.cacode import gen_ca_code
from arraynav.constants import (
    CODE_SAMPLES,
    SPEED_OF_LIGHT,
    T_SAMPLE,
)
from arraynav.geometry import steering_vector
from arraynav.ranging import SymbolSequence, despread, detect_step, pseudorange
from arraynav.synth import synthesize

from conftest import controlled_scene, single_satellite


def candidate_for(sat):
    return SignalCandidate(
        prn=sat.prn,
        code_phase=sat.delay_samples % CODE_SAMPLES,
        doppler=sat.doppler,
        caf_value=np.nan,
    )


def test_despread_matched_identity(almanac, geometry):
    # Noiseless aligned satellite, on-grid Doppler: r[K] = alpha a d[K-dK] L_c.
    delay = 97 * CODE_SAMPLES + 1234
    sat = single_satellite(geometry, prn=7, doppler=2250.0, delay=delay, gain=0.85)
    scene = controlled_scene(almanac, geometry, satellites=[sat], num_codes=150)
    stream = synthesize(scene)
    seq = despread(stream, candidate_for(sat), use_projection=False)
    k = np.arange(seq.length)
    data = np.where(k - 97 < scene.data_step, -1.0, 1.0)
    expect = 0.85 * sat.steering[:, None] * data[None, :] * CODE_SAMPLES
    np.testing.assert_allclose(seq.vectors, expect, atol=1e-6)


def test_despread_deterministic(almanac, geometry, clean_trial):
    scene, stream = clean_trial
    sat = scene.satellites[0]
    cand = candidate_for(sat)
    a = despread(stream, cand, use_projection=False)
    b = despread(stream, cand, use_projection=False)
    np.testing.assert_array_equal(a.vectors, b.vectors)


def test_detect_step_noiseless(almanac, geometry):
    delay = 97 * CODE_SAMPLES + 60
    sat = single_satellite(geometry, prn=3, doppler=-1500.0, delay=delay)
    scene = controlled_scene(almanac, geometry, satellites=[sat])
    # Step observed at K-hat = dK + K0; the detector returns dK itself.
    seq = despread(synthesize(scene), candidate_for(sat), use_projection=False)
    assert detect_step(seq, data_step=scene.data_step) == 97


def test_detect_step_constant_sequence_invalid():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    vectors = np.repeat(a[:, None], 140, axis=1) * CODE_SAMPLES
    seq = SymbolSequence(vectors=vectors, code_phase=0, doppler=0.0, projected=False)
    assert detect_step(seq) is None


def test_detect_step_phase_rotation_invariant(almanac, geometry):
    delay = 80 * CODE_SAMPLES + 11
    sat = single_satellite(geometry, prn=9, doppler=500.0, delay=delay)
    scene = controlled_scene(almanac, geometry, satellites=[sat], noise_var=10.0, seed=3)
    seq = despread(synthesize(scene), candidate_for(sat), use_projection=False)
    rotated = SymbolSequence(
        vectors=seq.vectors * np.exp(1j * 1.234),
        code_phase=seq.code_phase,
        doppler=seq.doppler,
        projected=False,
    )
    assert detect_step(seq) == detect_step(rotated)


def test_detect_step_monte_carlo_low_snr(geometry):
    # Synthetic despread sequences at the SNR -20 dB operating point: symbol
    # amplitude L_c, per-antenna despread noise variance L_c * sigma_n^2, and
    # a residual rotation of up to half a Doppler bin.
    rng = np.random.default_rng(42)
    length, k0 = 145, 30
    hits = 0
    trials = 1000
    for _ in range(trials):
        a = steering_vector(
            geometry,
            type(
                "D", (), {"elevation": rng.uniform(0, np.pi / 2), "azimuth": rng.uniform(-np.pi, np.pi)}
            )(),
        )
        step = rng.integers(60, 110)
        data = np.where(np.arange(length) < step, -1.0, 1.0)
        omega = 2 * np.pi * rng.uniform(-125, 125) * CODE_SAMPLES * T_SAMPLE
        clean = a[:, None] * (data * np.exp(1j * omega * np.arange(length)))[None, :] * CODE_SAMPLES
        noise_var = CODE_SAMPLES * 100.0
        noise = np.sqrt(noise_var / 2) * (
            rng.standard_normal((8, length)) + 1j * rng.standard_normal((8, length))
        )
        seq = SymbolSequence(vectors=clean + noise, code_phase=0, doppler=0.0, projected=False)
        if detect_step(seq, data_step=k0) == step - k0:
            hits += 1
    assert hits / trials >= 0.99


def test_pseudorange_arithmetic():
    assert pseudorange(0, 77) == pytest.approx(SPEED_OF_LIGHT * 77e-3)
    assert pseudorange(0, 77) == pytest.approx(23_084e3, rel=1e-3)
    assert pseudorange(CODE_SAMPLES - 1, 0) == pytest.approx(
        SPEED_OF_LIGHT * (CODE_SAMPLES - 1) * T_SAMPLE
    )


def test_end_to_end_pseudorange_quantization(clean_trial):
    # Attack-free full chain: every acquired satellite's pseudorange matches
    # rho + c*dt to within one sample of quantization.
    scene, stream = clean_trial
    ctx = AcquisitionContext(stream)
    checked = 0
    for sat in scene.satellites:
        if abs(sat.doppler) > 4000.0:
            continue
        cand = acquire_baseline(stream, gen_ca_code(sat.prn), context=ctx)
        assert cand is not None, f"PRN {sat.prn} not acquired"
        seq = despread(stream, cand, use_projection=False)
        dk = detect_step(seq, data_step=scene.data_step)
        assert dk is not None
        estimate = pseudorange(cand.code_phase, dk)
        truth = sat.range_m + SPEED_OF_LIGHT * scene.truth.clock_offset
        assert abs(estimate - truth) <= SPEED_OF_LIGHT * T_SAMPLE
        checked += 1
    assert checked >= 4
