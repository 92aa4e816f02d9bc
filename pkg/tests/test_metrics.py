import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from cverase.gaussian import (
    GaussianState,
    QuadratureAddress,
    add_classical_noise,
    apply_phase_rotation,
    apply_squeeze,
    displace,
    squeezed_vacuum,
    vacuum,
)
from cverase.metrics import (
    NoiseReport,
    added_noise,
    fidelity_gaussian,
    from_dB,
    gains,
    noise_dB,
    to_dB,
    uncertainty_product,
    wigner_contour,
)


def wigner_overlap(a, b, half_width=12.0, n=1201):
    """4*pi * integral of W_a W_b over a grid; equals Tr(rho sigma), the fidelity if one state is pure."""
    xs = np.linspace(-half_width, half_width, n)
    X, P = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([X, P], axis=-1)

    def W(state):
        d = pts - state.mean
        inv = np.linalg.inv(state.cov)
        q = np.einsum("...i,ij,...j->...", d, inv, d)
        return np.exp(-0.5 * q) / (2 * np.pi * np.sqrt(np.linalg.det(state.cov)))

    h = xs[1] - xs[0]
    return 4 * np.pi * np.sum(W(a) * W(b)) * h * h


def thermal_fock_fidelity(V1, V2, cutoff=400):
    """Uhlmann fidelity of two thermal states from their photon-number distributions."""
    k = np.arange(cutoff)

    def probs(V):
        nbar = (V - 1) / 2
        return (nbar / (nbar + 1)) ** k / (nbar + 1)

    return np.sum(np.sqrt(probs(V1) * probs(V2))) ** 2


def thermal(V):
    return GaussianState([0, 0], V * np.eye(2))


def test_gains():
    assert_allclose(gains(0.5), (0.7071068, 0.7071068, 1.4142136), atol=1e-7)
    assert_allclose(gains(0.477), (0.7232, 0.6907, 1.4479), atol=1e-4)
    for bad in (0, 1, -0.1):
        with pytest.raises(ValueError):
            gains(bad)


@given(st.floats(1e-6, 1 - 1e-6))
def test_gains_relations(T):
    g_m, g_s, g_e = gains(T)
    assert g_m**2 + g_s**2 == pytest.approx(1)
    assert g_e == pytest.approx(1 / g_s)


def test_added_noise():
    assert added_noise(0.3 * 2.0, math.sqrt(0.3), 2.0) == pytest.approx(0)
    assert added_noise(0.811, math.sqrt(0.523), 1.0) == pytest.approx(0.5507, abs=1e-4)
    assert added_noise(0.477 * 456, math.sqrt(0.477), 1.0) == pytest.approx(455)
    assert added_noise(0.1, 1.0, 1.0) == pytest.approx(-0.9)
    with pytest.raises(ValueError):
        added_noise(1.0, 0.0, 1.0)


@given(st.floats(0, 100), st.floats(0.1, 3), st.floats(0, 10), st.floats(0.1, 5))
def test_added_noise_scaling(V_out, g, V_in, c):
    assert added_noise(c**2 * V_out, c * g, V_in) == pytest.approx(added_noise(V_out, g, V_in), abs=1e-9)


def test_uncertainty_product():
    p, ok = uncertainty_product(0.55, 455)
    assert p == pytest.approx(250.25) and ok
    assert uncertainty_product(2, 0.5) == (1.0, True)
    assert not uncertainty_product(0.5, 0.5)[1]


@given(st.floats(0.01, 0.99), st.floats(1e-3, 1))
def test_pure_qnd_product_is_one(T, s):
    N_x = T * s / (1 - T)
    N_p = (1 - T) / (T * s)
    assert uncertainty_product(N_x, N_p)[0] == pytest.approx(1, abs=1e-9)


def test_dB():
    assert to_dB(1) == 0
    assert to_dB(1.14) == pytest.approx(0.569, abs=1e-3)
    assert from_dB(-3) == pytest.approx(0.501187, abs=1e-6)
    assert noise_dB(0.14) == pytest.approx(to_dB(1.14))
    with pytest.raises(ValueError):
        to_dB(0)


@given(st.floats(-60, 60))
def test_dB_roundtrip(dB):
    assert to_dB(from_dB(dB)) == pytest.approx(dB, abs=1e-12)


def test_noise_report():
    rep = NoiseReport.for_T(0.477, N_x_label=0.55, N_p_signal=455.0)
    assert rep.product == pytest.approx(250.25)
    assert rep.product_satisfied
    assert rep.g_m**2 + rep.g_s**2 == pytest.approx(1)
    assert rep.g_e == pytest.approx(1 / rep.g_s)
    assert rep.dB["N_x_label"] == pytest.approx(10 * math.log10(1.55))
    assert "N_p_erased" not in rep.dB
    assert rep.to_dict()["N_p_signal"] == 455.0


def test_fidelity_examples():
    sq = displace(squeezed_vacuum(0.3, 0.5), 0, 1, 2)
    assert fidelity_gaussian(sq, sq) == pytest.approx(1, abs=1e-12)
    mixed = GaussianState([0.2, 0.1], [[2.0, 0.3], [0.3, 1.5]])
    assert fidelity_gaussian(mixed, mixed) == pytest.approx(1, abs=1e-12)
    out = GaussianState([0, 0], np.diag([1.54, 2.39]))
    # 2 / sqrt((1 + 1.54)(1 + 2.39))
    assert fidelity_gaussian(vacuum(1), out) == pytest.approx(0.6816, abs=1e-4)
    # |delta|^2 = 4 ln 2 -> exp(-|delta|^2 / 4) = 0.5
    d = math.sqrt(2 * math.log(2))
    assert fidelity_gaussian(vacuum(1), displace(vacuum(1), 0, d, d)) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        fidelity_gaussian(vacuum(2), vacuum(2))


@pytest.mark.parametrize("seed", range(3))
def test_fidelity_against_wigner_overlap(seed):
    rng = np.random.default_rng(seed)
    pure = displace(squeezed_vacuum(rng.uniform(0.3, 1), rng.uniform(0, np.pi)), 0, *rng.normal(size=2))
    other = add_classical_noise(
        displace(squeezed_vacuum(rng.uniform(0.3, 1), rng.uniform(0, np.pi)), 0, *rng.normal(size=2)),
        QuadratureAddress(0, rng.uniform(0, np.pi)),
        rng.uniform(0, 2),
    )
    assert fidelity_gaussian(pure, other) == pytest.approx(wigner_overlap(pure, other), abs=1e-3)


@pytest.mark.parametrize("V1,V2", [(1.0, 3.0), (2.0, 5.0), (1.5, 1.7)])
def test_fidelity_mixed_against_fock_oracle(V1, V2):
    assert fidelity_gaussian(thermal(V1), thermal(V2)) == pytest.approx(thermal_fock_fidelity(V1, V2), abs=1e-9)


def random_single_mode(rng):
    st_ = squeezed_vacuum(rng.uniform(0.2, 1), rng.uniform(0, np.pi))
    st_ = add_classical_noise(st_, QuadratureAddress(0, rng.uniform(0, np.pi)), rng.uniform(0, 2))
    return displace(st_, 0, *rng.normal(size=2))


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_fidelity_symmetry_and_invariance(seed):
    rng = np.random.default_rng(seed)
    a, b = random_single_mode(rng), random_single_mode(rng)
    F = fidelity_gaussian(a, b)
    assert 0 <= F <= 1
    assert F == pytest.approx(fidelity_gaussian(b, a), abs=1e-12)
    phi, s, th = rng.uniform(0, 2 * np.pi), rng.uniform(0.2, 5), rng.uniform(0, np.pi)
    dx, dp = rng.normal(size=2)

    def op(x):
        return displace(apply_squeeze(apply_phase_rotation(x, 0, phi), 0, s, th), 0, dx, dp)

    assert fidelity_gaussian(op(a), op(b)) == pytest.approx(F, abs=1e-9)
    if not a.allclose(b, atol=1e-6):
        assert F < 1


def test_wigner_contour_examples():
    c = wigner_contour(vacuum(1), 0, math.exp(-0.5))
    assert_allclose(c.semi_axes, (1, 1), atol=1e-12)
    assert c.center == (0.0, 0.0)
    s = 0.2
    c = wigner_contour(squeezed_vacuum(s, 0), 0, 0.3)
    assert c.semi_axes[0] / c.semi_axes[1] == pytest.approx(1 / s)
    with pytest.raises(ValueError):
        wigner_contour(vacuum(1), 0, 1.0)


@given(st.floats(0, math.pi - 1e-6), st.floats(0.05, 0.8))
def test_wigner_contour_orientation(phi, s):
    # major axis along x before rotating
    state = apply_phase_rotation(squeezed_vacuum(s, np.pi / 2), 0, phi)
    c = wigner_contour(displace(state, 0, 1.0, -2.0))
    diff = (c.orientation - phi + math.pi / 2) % math.pi - math.pi / 2
    assert abs(diff) < 1e-9
    assert c.center == pytest.approx((1.0, -2.0))


@given(st.floats(0.01, 0.98), st.floats(0.01, 0.98))
def test_wigner_contour_monotone_in_level(l1, l2):
    state = GaussianState([0, 0], [[2.0, 0.4], [0.4, 1.0]])
    lo, hi = sorted((l1, l2))
    a, b = wigner_contour(state, 0, lo), wigner_contour(state, 0, hi)
    assert a.semi_axes[0] >= b.semi_axes[0] and a.semi_axes[1] >= b.semi_axes[1]
