import dataclasses
import filecmp

import numpy as np
import pytest

from qcorr import kernels
from qcorr.config import ExperimentConfig
from qcorr.errors import InvalidArgs, TraceTooShort
from qcorr.gateset import corpse_schedule, primitive_schedule
from qcorr.noise import NoiseSpec, NoiseTrace, n_slots, sample_trace, task_rng
from qcorr.qcore import I2, clifford_table, equal_up_to_phase, fidelity, rotation
from qcorr.simulator import (RecordTable, build_timeline, close_circuit, gate_boundaries,
                             projective_sample, propagate, random_circuit, run_circuit,
                             run_experiment)

PI = np.pi
X_PI = clifford_table()[1]


def small_config(**kw):
    base = dict(J=30, k=4, n=6, r=220, sigma_L2=1e-3, sigma_S2=5e-4, M_n=5, seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


def test_clean_x_pi():
    u = propagate(primitive_schedule(X_PI), NoiseTrace.constant(PI))
    assert equal_up_to_phase(u, rotation("x", PI))


def test_off_resonant_rabi():
    d = 0.1
    u = propagate(primitive_schedule(X_PI), NoiseTrace.constant(PI, d))
    expect = np.sin(0.5 * PI * np.sqrt(1 + d * d)) ** 2 / (1 + d * d)
    assert abs(u[1, 0]) ** 2 == pytest.approx(expect, abs=1e-12)
    assert expect == pytest.approx(0.9900, abs=5e-5)


def test_corpse_cancels_static_detuning():
    s = corpse_schedule("x", PI)
    u = propagate(s, NoiseTrace.constant(s.duration, 0.05))
    assert fidelity(u, rotation("x", PI)) >= 1 - 1e-4
    prim = propagate(primitive_schedule(X_PI), NoiseTrace.constant(PI, 0.05))
    assert fidelity(prim, rotation("x", PI)) < fidelity(u, rotation("x", PI))


def test_propagate_splits_on_trace_edges():
    # piecewise trace against a hand-built product of two exact exponentials
    tr = NoiseTrace(np.array([0, PI / 2, PI]), np.array([0.2, -0.1]))
    u = propagate(primitive_schedule(X_PI), tr)

    def step(d, t):
        w = np.sqrt(1 + d * d)
        h = np.array([[d, 1], [1, -d]]) / w
        return np.cos(w * t / 2) * I2 - 1j * np.sin(w * t / 2) * h

    np.testing.assert_allclose(u, step(-0.1, PI / 2) @ step(0.2, PI / 2), atol=1e-12)


def test_trace_too_short():
    with pytest.raises(TraceTooShort):
        propagate(primitive_schedule(X_PI), NoiseTrace.constant(1.0))


def test_zero_noise_circuit():
    c = random_circuit(50, 0, 0)
    b = gate_boundaries(c, "primitive")
    assert run_circuit(c, "primitive", NoiseTrace.constant(b[-1])) == pytest.approx(0, abs=1e-20)


def _static_scan(seed, d):
    c = random_circuit(100, seed, 0)
    dur = gate_boundaries(c, "primitive")[-1]
    return np.array([run_circuit(c, "primitive", NoiseTrace.constant(dur, x)) for x in d])


@pytest.mark.xfail(strict=True, reason="coherent second-order terms add a delta^3 J^1.5 "
                                       "piece that is not small at J=100, delta=0.05")
def test_static_detuning_is_quadratic():
    d = np.linspace(0.005, 0.05, 10)
    p = _static_scan(1, d)
    coef = np.dot(p, d ** 2) / np.dot(d ** 2, d ** 2)
    assert np.max(np.abs(coef * d ** 2 - p) / p) < 0.05


@pytest.mark.parametrize("seed", range(4))
def test_static_detuning_leading_terms(seed):
    # no constant or linear term: p = a d^2 + b d^3 + c d^4 + ...
    d = np.linspace(0.001, 0.02, 12)
    p = _static_scan(seed, d)
    basis = np.column_stack([d ** 2, d ** 3, d ** 4])
    coef, *_ = np.linalg.lstsq(basis, p, rcond=None)
    assert np.max(np.abs(basis @ coef - p) / p) < 0.01
    assert coef[0] > 0


def test_projective_sample():
    assert projective_sample(0.0, 220, 0) == 0.0
    assert projective_sample(1.0, 17, 0) == 1.0
    rng = np.random.default_rng(0)
    x = [projective_sample(0.5, 220, rng) for _ in range(10000)]
    assert np.var(x) == pytest.approx(0.25 / 220, rel=0.1)
    with pytest.raises(InvalidArgs):
        projective_sample(0.5, 0, 0)


def test_close_circuit_returns_identity():
    c = close_circuit([3, 7, 11])
    u = I2
    for i in c.indices:
        u = clifford_table()[i].unitary @ u
    assert equal_up_to_phase(u, I2)
    assert len(c) == 4


def test_timeline_matches_gate_by_gate_product():
    c = random_circuit(12, 4, 0)
    spec = NoiseSpec(1e-3, 1e-3, 3)
    for fam in ("primitive", "corpse", "wamf"):
        tl = build_timeline(c, fam, 3)
        rng = task_rng(4, 0, 0)
        tr = sample_trace(spec, tl.boundaries, task_rng(4, 0, 0))
        from qcorr.noise import draw_correlated, draw_uncorrelated
        d_s = draw_uncorrelated(spec, tl.duration, rng)[None]
        d_l = draw_correlated(spec, len(c), rng)[None]
        _, b = kernels.propagate_timeline(*tl.args(), d_s, d_l)
        assert abs(b[0]) ** 2 == pytest.approx(run_circuit(c, fam, tr), abs=1e-12)


def test_long_circuit_slot_indices_in_range():
    for seed in range(3):
        c = random_circuit(1000, seed, 0)
        for fam in ("primitive", "corpse"):
            tl = build_timeline(c, fam, 10)
            assert tl.sidx.max() < n_slots(tl.duration)
            assert tl.lidx.max() == 99


def test_single_record_no_noise():
    t = run_experiment(small_config(k=1, n=1, sigma_L2=0.0, sigma_S2=0.0))
    assert len(t) == 1
    assert t.p_true[0] == pytest.approx(0, abs=1e-20)


def test_full_grid_size():
    t = run_experiment(small_config(J=100, k=50, n=200, M_n="J"))
    assert len(t) == 10000
    assert t.grid().shape == (50, 200)


def test_threads_do_not_change_results():
    cfg = small_config()
    a = run_experiment(cfg, threads=1)
    b = run_experiment(cfg, threads=4)
    np.testing.assert_array_equal(a.p_true, b.p_true)
    np.testing.assert_array_equal(a.p_est, b.p_est)


def test_rerun_is_byte_identical(tmp_path):
    cfg = small_config()
    run_experiment(cfg).write_csv(tmp_path / "a.csv")
    run_experiment(cfg, threads=0).write_csv(tmp_path / "b.csv")
    assert filecmp.cmp(tmp_path / "a.csv", tmp_path / "b.csv", shallow=False)
    t = RecordTable.read_csv(tmp_path / "a.csv")
    assert len(t) == cfg.k * cfg.n


def test_seed_changes_results():
    a = run_experiment(small_config())
    b = run_experiment(small_config(seed=4))
    assert not np.array_equal(a.p_true, b.p_true)


def test_more_realizations_extend_the_grid():
    # realization j of circuit c never depends on n
    a = run_experiment(small_config(n=3))
    b = run_experiment(small_config(n=6))
    np.testing.assert_array_equal(a.grid("p_true"), b.grid("p_true")[:, :3])


def test_unknown_family():
    with pytest.raises(InvalidArgs):
        run_experiment(dataclasses.replace(small_config(), family="bb1"))
