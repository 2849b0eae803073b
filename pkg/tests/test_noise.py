import numpy as np
import pytest

from qcorr.errors import DurationMismatch, InvalidArgs
from qcorr.noise import (NoiseSpec, NoiseTrace, combine, draw_correlated, n_slots,
                         sample_correlated, sample_trace, sample_uncorrelated, task_rng)

PI = np.pi


def gates(n, length=PI):
    return np.arange(n + 1) * length


def test_zero_strength_gives_zero_trace():
    tr = sample_uncorrelated(NoiseSpec(sigma_S2=0.0), gates(10), np.random.default_rng(0))
    assert np.all(tr.values == 0)


def test_primitive_pi_gate_spans_two_slots():
    tr = sample_uncorrelated(NoiseSpec(sigma_S2=1e-3), gates(1), np.random.default_rng(0))
    assert len(tr.values) == 2
    np.testing.assert_allclose(tr.edges, [0, PI / 2, PI])


def test_slot_variance():
    tr = sample_uncorrelated(NoiseSpec(sigma_S2=5e-4), np.array([0, 1e5 * PI / 2]),
                             np.random.default_rng(1))
    assert len(tr.values) == 100000
    assert np.var(tr.values) == pytest.approx(5e-4, rel=0.03)


def test_slots_ignore_gate_boundaries():
    # slots sit on a global grid, not per gate
    tr = sample_uncorrelated(NoiseSpec(sigma_S2=1e-3), [0, 1.0, 2.0, 3.5], np.random.default_rng(0))
    np.testing.assert_allclose(tr.edges, [0, PI / 2, PI, 3.5])


def test_quasi_static_is_constant():
    tr = sample_correlated(NoiseSpec(sigma_L2=2e-3), gates(100), rng=np.random.default_rng(2))
    assert len(tr.values) == 1
    assert tr.duration == pytest.approx(100 * PI)


def test_block_length_one_gives_one_value_per_gate():
    tr = sample_correlated(NoiseSpec(sigma_L2=2e-3, block_length=1), gates(20),
                           rng=np.random.default_rng(3))
    assert len(tr.values) == 20
    np.testing.assert_allclose(tr.edges, gates(20))


def test_zero_duration_gates_share_their_block():
    b = np.array([0, PI, PI, 2 * PI, 3 * PI])  # gate 1 is a frame change
    tr = sample_correlated(NoiseSpec(sigma_L2=1.0, block_length=2), b,
                           rng=np.random.default_rng(4))
    np.testing.assert_allclose(tr.edges, [0, PI, 3 * PI])


@pytest.mark.parametrize("m", [4, 10])
def test_block_autocovariance_is_triangular(m):
    s2 = 2e-3
    vals = draw_correlated(NoiseSpec(sigma_L2=s2, block_length=m), 10000 * m,
                           np.random.default_rng(5))
    x = np.repeat(vals, m)
    for lag in range(m):
        c = np.mean(x[:len(x) - lag] * x[lag:])
        # tolerance is 5% of the lag-0 value
        assert abs(c - s2 * (1 - lag / m)) < 0.05 * s2


def test_block_longer_than_circuit():
    with pytest.raises(InvalidArgs):
        sample_correlated(NoiseSpec(sigma_L2=1e-3, block_length=11), gates(10))


def test_combine_with_zero():
    x = NoiseTrace(np.array([0, 1.0, 2.5]), np.array([0.3, -0.1]))
    z = NoiseTrace.constant(2.5)
    c = combine(x, z)
    np.testing.assert_allclose(c.edges, x.edges)
    np.testing.assert_allclose(c.values, x.values)


def test_combine_breakpoints_and_variance():
    rng = np.random.default_rng(6)
    a = NoiseTrace(np.array([0, 1.0, 3.0, 4.0]), rng.normal(size=3))
    b = NoiseTrace(np.array([0, 2.0, 4.0]), rng.normal(size=2))
    c = combine(a, b)
    assert len(c.edges) == len(np.union1d(a.edges, b.edges))
    # sum of independent Gaussians
    x = np.concatenate([combine(NoiseTrace.constant(1.0, u), NoiseTrace.constant(1.0, v)).values
                        for u, v in rng.normal(0, [0.3, 0.4], size=(20000, 2))])
    assert np.var(x) == pytest.approx(0.3 ** 2 + 0.4 ** 2, rel=0.03)


def test_combine_duration_mismatch():
    with pytest.raises(DurationMismatch):
        combine(NoiseTrace.constant(1.0), NoiseTrace.constant(2.0))


def test_uncorrelated_stream_independent_of_block_length():
    b = gates(30)
    t1 = sample_trace(NoiseSpec(0.0, 1e-3, 1), b, task_rng(9, 0, 0))
    t2 = sample_trace(NoiseSpec(0.0, 1e-3, 30), b, task_rng(9, 0, 0))
    np.testing.assert_array_equal(t1.values, t2.values)


def test_task_streams_are_distinct():
    a = task_rng(1, 0, 0).standard_normal(4)
    b = task_rng(1, 0, 1).standard_normal(4)
    c = task_rng(1, 1, 0).standard_normal(4)
    assert not np.allclose(a, b) and not np.allclose(a, c)
    np.testing.assert_array_equal(a, task_rng(1, 0, 0).standard_normal(4))


def test_n_slots_exact_multiple():
    assert n_slots(4 * PI / 2) == 4
    assert n_slots(4 * PI / 2 + 1e-3) == 5
