import numpy as np
import pytest

from qcorr import walkmodel as wm
from qcorr.errors import LengthMismatch, NoCrossing, SeriesTooShort, UnsupportedGate
from qcorr.gateset import corpse_schedule, primitive_schedule, wamf_schedule
from qcorr.noise import NoiseSpec, NoiseTrace, draw_correlated, n_slots
from qcorr.qcore import clifford_table
from qcorr.simulator import build_timeline, random_circuit, run_circuit

PI = np.pi
FIVE_MAPS = ("I", "X_pi", "X_pi/2", "Y_pi", "Y_pi/2")


def test_error_map_x_pi():
    m = wm.error_map("X_pi")
    np.testing.assert_allclose(m.nu, [0, 1, 0], atol=1e-12)
    np.testing.assert_allclose(m.eta, [-PI / 4, 0, 0], atol=1e-12)
    assert m.a == pytest.approx(0.5)


def test_error_map_identity():
    m = wm.error_map("I")
    np.testing.assert_allclose(m.nu, [0, 0, -PI / 2], atol=1e-12)
    assert m.a == pytest.approx(PI ** 2 / 8)


def test_error_map_x_half_pi():
    np.testing.assert_allclose(wm.error_map("X_pi/2").nu, [0, 0.5, -0.5], atol=1e-12)


def test_unsupported_gate():
    with pytest.raises(UnsupportedGate):
        wm.error_map("Z_pi")


@pytest.mark.parametrize("gate", FIVE_MAPS)
def test_error_map_residual_is_third_order(gate):
    d = np.logspace(-3, -1, 9)
    r = [wm.map_residual(gate, x) for x in d]
    assert wm.loglog_slope(d, r) == pytest.approx(3.0, abs=0.2)


def test_two_value_step_lengths():
    # independent slot values give 1/sqrt(2) per axis
    a = wm.two_value_error_map("X_pi", [1.0, 0.0]).nu
    b = wm.two_value_error_map("X_pi", [0.0, 1.0]).nu
    np.testing.assert_allclose(np.hypot(a, b), [0, 2 ** -0.5, 2 ** -0.5], atol=1e-12)
    np.testing.assert_allclose(wm.effective_step("X_pi", 2), [0, 2 ** -0.5, 2 ** -0.5])


def test_two_value_equal_values_match_static():
    np.testing.assert_allclose(wm.two_value_error_map("X_pi", [0.3, 0.3]).nu,
                               0.3 * wm.error_map("X_pi").nu, atol=1e-12)


def test_eight_value_coefficient():
    closed = np.sqrt((4 - 2 * np.sqrt(2 + np.sqrt(2))) / 2)
    assert closed == pytest.approx(0.3902, abs=1e-4)
    assert wm.eight_value_coefficient() == pytest.approx(closed, rel=1e-12)
    assert wm.effective_step("X_pi", 8)[1] == pytest.approx(0.390, abs=5e-4)


def test_step_weights():
    s = wm.gate_step_weights("pi", 1)
    assert s.lengths == (1.0,) and s.weight == 1.0
    assert wm.gate_step_weights("I", 1).lengths == pytest.approx((PI / 2,))
    c = wm.gate_step_weights("pi/2", 8, "corpse")
    assert c.weight == pytest.approx(8 / (13 / 3))
    assert c.weight == pytest.approx(1.85, abs=5e-3)
    assert c.lengths == pytest.approx((0.196, 0.196), abs=5e-4)


def test_class_fractions():
    f = wm.gate_class_fractions()
    assert f["pi"] == pytest.approx(4 / 24)
    assert f["pi/2"] == pytest.approx(16 / 24)
    assert f["I"] == pytest.approx(1 / 24)


def test_error_vector_zero_trace():
    ev = wm.error_vector_first_order(primitive_schedule(clifford_table()[1]), NoiseTrace.constant(PI))
    np.testing.assert_array_equal(ev.a, 0)


def test_error_vector_wait():
    d = 0.02
    ev = wm.error_vector_first_order(primitive_schedule(clifford_table()[0]), NoiseTrace.constant(PI, d))
    np.testing.assert_allclose(ev.a, [0, 0, -PI * d / 2], atol=1e-14)


def test_error_vector_x_pi_norm():
    d = 0.03
    ev = wm.error_vector_first_order(primitive_schedule(clifford_table()[1]), NoiseTrace.constant(PI, d))
    assert ev.norm == pytest.approx(d)


def test_corpse_error_vector_vanishes():
    s = corpse_schedule("x", PI)
    ev = wm.error_vector_first_order(s, NoiseTrace.constant(s.duration, 0.05))
    assert ev.norm < 1e-12


def test_walk_zero():
    c = random_circuit(20, 0, 0)
    wv, p = wm.walk(c, np.zeros(20))
    np.testing.assert_array_equal(wv.R, 0)
    assert p == 0


def test_walk_single_x_pi():
    wv, p = wm.walk([1], [0.01])
    assert p == pytest.approx(1e-4)
    assert wv.R[2] == pytest.approx(0, abs=1e-15)


def test_walk_length_mismatch():
    with pytest.raises(LengthMismatch):
        wm.walk([1, 2], [0.01])


def test_walk_matches_error_vectors():
    # per-gate toggled steps equal the rotated first-order error vectors
    c = random_circuit(40, 3, 0)
    tl = build_timeline(c, "primitive", 1)
    d_l = draw_correlated(NoiseSpec(sigma_L2=1e-3, block_length=1), 40, np.random.default_rng(0))
    a = wm.circuit_error_vectors(tl, np.zeros((1, n_slots(tl.duration))), d_l[None])[0]
    steps = wm.toggled_steps(c.indices, d_l)
    np.testing.assert_allclose(np.linalg.norm(a, axis=1), np.linalg.norm(steps, axis=1), atol=1e-12)


def test_walk_error_is_third_order():
    # the truncation error of the first-order walk falls as delta^3
    circuits = [random_circuit(100, s, 0) for s in range(5)]
    deltas = np.array([0.0025, 0.005, 0.01])
    errs = []
    for d in deltas:
        e = []
        for c in circuits:
            dur = build_timeline(c, "primitive").duration
            e.append(abs(run_circuit(c, "primitive", NoiseTrace.constant(dur, d)) - wm.walk(c, [d] * 100)[1]))
        errs.append(np.mean(e))
    assert wm.loglog_slope(deltas, errs) == pytest.approx(3.0, abs=0.2)


def test_acf_constant_series():
    np.testing.assert_array_equal(wm.acf(np.full(50, 2.0), 10), np.ones(11))


def test_acf_white_noise():
    rho = wm.acf(np.random.default_rng(0).normal(size=10000), 20)
    assert rho[0] == 1.0
    assert np.max(np.abs(rho[1:])) < 0.05


def test_acf_too_short():
    with pytest.raises(SeriesTooShort):
        wm.acf(np.arange(5.0), 5)


def test_correlation_length_examples():
    assert wm.correlation_length(np.r_[1.0, np.zeros(10)]) <= 1
    lag = np.arange(40)
    assert wm.correlation_length(np.exp(-lag / 7)) == pytest.approx(7, abs=0.5)
    with pytest.raises(NoCrossing):
        wm.correlation_length(np.ones(10))


def test_block_noise_crossing_near_block_length():
    c = random_circuit(1000, 11, 0)
    tl = build_timeline(c, "primitive", 10)
    spec = NoiseSpec(sigma_L2=2e-3, block_length=10)
    rng = np.random.default_rng(2)
    rho = np.zeros(101)
    for _ in range(10):
        d_l = draw_correlated(spec, 1000, rng)
        a = wm.circuit_error_vectors(tl, np.zeros((1, n_slots(tl.duration))), d_l[None])[0]
        rho += wm.acf(np.linalg.norm(a, axis=1), 100) / 10
    assert wm.correlation_length(rho, 0.0) == pytest.approx(10, abs=3)


def test_filter_function_low_frequency():
    w = np.logspace(-3, -1, 20)
    prim = wm.filter_function(primitive_schedule(clifford_table()[1]), w)
    corp = wm.filter_function(corpse_schedule("x", PI), w)
    assert prim[0] == pytest.approx(4.0, rel=1e-3)
    assert abs(wm.loglog_slope(w, prim)) < 0.05
    assert wm.loglog_slope(w, corp) == pytest.approx(2.0, abs=0.1)


def test_filter_function_decays():
    w = np.logspace(1, 3, 200)
    for s in (primitive_schedule(clifford_table()[1]), wamf_schedule("x", PI)):
        g = wm.filter_function(s, w)
        assert g[-20:].max() < 0.01 * g[:20].max()


def _toggled_z(schedule, t):
    """Pauli vector of U(t)^dag sigma_z U(t) for the ideal drive."""
    from qcorr.qcore import SX, SY, SZ, pauli_vector
    u = np.eye(2, dtype=complex)
    start = 0.0
    for seg in schedule.segments:
        tau = min(max(t - start, 0.0), seg.duration)
        n = np.cos(seg.phase) * SX + np.sin(seg.phase) * SY
        ang = seg.amp * tau
        u = (np.cos(ang / 2) * np.eye(2) - 1j * np.sin(ang / 2) * n) @ u
        start += seg.duration
    return pauli_vector(u.conj().T @ SZ @ u)


@pytest.mark.parametrize("w", [0.05, 0.7, 3.0])
def test_filter_function_matches_quadrature(w):
    from scipy.integrate import simpson
    s = corpse_schedule("x", PI)
    edges = np.cumsum([0.0] + [seg.duration for seg in s.segments])
    f = 0
    for a, b in zip(edges[:-1], edges[1:]):
        t = np.linspace(a, b, 2001)
        rz = np.array([_toggled_z(s, x) for x in t])
        f = f + simpson(np.exp(1j * w * t)[:, None] * rz, x=t, axis=0)
    assert wm.filter_function(s, np.array([w]))[0] == pytest.approx(np.sum(np.abs(f) ** 2), rel=1e-6)
