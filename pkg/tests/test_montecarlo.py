import numpy as np
import pytest

from cverase.gaussian import GaussianState, QuadratureAddress, vacuum
from cverase.montecarlo import CHUNK, sample_quadratures, validate_against_analytic
from cverase.protocol import P_M, P_S, calibrate_to_paper, run_erasure_electronic

X0, P0, X1, P1 = (QuadratureAddress(m, th) for m in (0, 1) for th in (0.0, np.pi / 2))


@pytest.fixture(scope="module")
def eraser():
    return run_erasure_electronic(calibrate_to_paper())


def test_vacuum_variance():
    n = 10**6
    batch = sample_quadratures(vacuum(1), [X0], n, seed=1)
    assert batch.values.shape == (n, 1)
    assert abs(batch.values.var(ddof=1) - 1) < 3 * np.sqrt(2 / n)


def test_perfect_correlation():
    batch = sample_quadratures(vacuum(2), [X0, X0], 10**4, seed=2)
    assert np.corrcoef(batch.values.T)[0, 1] == pytest.approx(1, abs=1e-9)


def test_seed_determinism():
    state = run_erasure_electronic(calibrate_to_paper()).states["detected"]
    a = sample_quadratures(state, [X0, P0, P1], 5000, seed=42)
    b = sample_quadratures(state, [X0, P0, P1], 5000, seed=42)
    assert a.values.tobytes() == b.values.tobytes()
    c = sample_quadratures(state, [X0, P0, P1], 5000, seed=43)
    assert not np.array_equal(a.values, c.values)


def test_chunks_are_prefix_stable():
    a = sample_quadratures(vacuum(1), [X0], CHUNK, seed=3)
    b = sample_quadratures(vacuum(1), [X0], CHUNK + 17, seed=3)
    assert np.array_equal(a.values, b.values[:CHUNK])


def test_distinct_seeds_uncorrelated():
    n = 200_000
    a = sample_quadratures(vacuum(1), [X0], n, seed=10).values[:, 0]
    b = sample_quadratures(vacuum(1), [X0], n, seed=11).values[:, 0]
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / np.sqrt(n)


def test_non_psd_is_internal_error():
    broken = GaussianState([0, 0], np.diag([1.0, -0.5]))
    with pytest.raises(RuntimeError):
        sample_quadratures(broken, [X0, P0], 100, seed=0)


def test_validate_passes_for_physical_state(eraser):
    state = eraser.states["detected"]
    rep = validate_against_analytic(state, [X0, P0, X1, P1], n=10**6, seed=5, z=4.0)
    assert rep.passed, [e for e in rep.entries if not e.passed]
    assert len(rep.entries) == 10


def test_validate_flags_corruption(eraser):
    state = eraser.states["detected"]
    corrupted = GaussianState(state.mean, 1.1 * state.cov)
    rep = validate_against_analytic(state, [X0, P0, X1, P1], n=10**5, seed=5, reference=corrupted)
    assert not rep.passed
    assert all(not e.passed for e in rep.entries if e.name.count("*") == 0)


def test_validate_erasure_combination(eraser):
    state = eraser.states["detected"]
    combos = {"p_c": [(P_S, 1.0), (P_M, -eraser.gain)]}
    rep = validate_against_analytic(state, [P0, P1], n=10**6, seed=9, combinations=combos)
    entry = next(e for e in rep.entries if e.name == "p_c")
    assert entry.analytic == pytest.approx(eraser.variances["conditioned"]["p_c"])
    assert entry.passed and rep.passed


def test_validate_requires_enough_samples():
    with pytest.raises(ValueError):
        validate_against_analytic(vacuum(1), [X0], n=999)


def test_estimator_converges_at_root_n():
    state = run_erasure_electronic(calibrate_to_paper()).states["detected"]
    ns = [10**3, 10**4, 10**5, 10**6]
    errs = []
    for n in ns:
        e = [
            abs(np.var(sample_quadratures(state, [X1], n, seed=1000 * k + n).values, ddof=1) - state.cov[2, 2])
            for k in range(8)
        ]
        errs.append(np.mean(e))
    slope = np.polyfit(np.log10(ns), np.log10(errs), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.15)
