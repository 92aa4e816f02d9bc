"""Homodyne conditioning, photocurrent combinations and feed-forward."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from .gaussian import GaussianState, QuadratureAddress, _check_address

DEGENERATE_VAR = 1e-12

__all__ = [
    "DegenerateMeasurementError",
    "GainStrategy",
    "MeasurementRecord",
    "cancellation_gain",
    "combination_mean",
    "combination_variance",
    "feedforward",
    "feedforward_ensemble",
    "homodyne_condition",
    "homodyne_sample",
    "optimal_gain",
    "resolve_gain",
]


class DegenerateMeasurementError(ValueError):
    """The measured quadrature has (numerically) zero variance."""


@dataclass(frozen=True)
class MeasurementRecord:
    address: QuadratureAddress
    outcome: float
    prior_variance: float
    conditioned_state: GaussianState


@dataclass(frozen=True)
class GainStrategy:
    """How the electronic / feed-forward gain ``G`` is chosen.

    ``fixed`` uses ``G`` as given, ``optimal`` the least-squares gain
    ``Cov(target, meter) / Var(meter)``, and ``cancellation`` the gain that
    removes the marker's input quadrature from ``target - G * meter``.
    """

    kind: Literal["fixed", "optimal", "cancellation"] = "cancellation"
    G: float | None = None

    def __post_init__(self):
        if self.kind not in ("fixed", "optimal", "cancellation"):
            raise ValueError(f"unknown gain strategy {self.kind!r}")
        if self.kind == "fixed":
            if self.G is None or not np.isfinite(self.G):
                raise ValueError("fixed gain strategy needs a finite G")
            object.__setattr__(self, "G", float(self.G))
        elif self.G is not None:
            raise ValueError(f"{self.kind} gain strategy takes no G")

    @classmethod
    def fixed(cls, G: float) -> "GainStrategy":
        return cls("fixed", G)

    @classmethod
    def optimal(cls) -> "GainStrategy":
        return cls("optimal")

    @classmethod
    def cancellation(cls) -> "GainStrategy":
        return cls("cancellation")


def _remaining_indices(n_modes: int, mode: int) -> np.ndarray:
    return np.delete(np.arange(2 * n_modes), [2 * mode, 2 * mode + 1])


def _measured(state: GaussianState, address: QuadratureAddress) -> tuple[np.ndarray, float, float]:
    _check_address(state, address)
    if state.n_modes < 2:
        raise ValueError("homodyne conditioning needs at least two modes")
    u = address.direction(state.n_modes)
    V = float(u @ state.cov @ u)
    if V <= DEGENERATE_VAR:
        raise DegenerateMeasurementError(f"measured variance {V:.3e} is degenerate")
    return u, V, float(u @ state.mean)


def homodyne_condition(state: GaussianState, address: QuadratureAddress, outcome: float) -> MeasurementRecord:
    """Condition the remaining modes on a homodyne outcome; the measured mode is removed."""
    u, V, m_meas = _measured(state, address)
    keep = _remaining_indices(state.n_modes, address.mode)
    sigma = state.cov[keep] @ u
    mean = state.mean[keep] + sigma * (outcome - m_meas) / V
    cov = state.cov[np.ix_(keep, keep)] - np.outer(sigma, sigma) / V
    return MeasurementRecord(address, float(outcome), V, GaussianState(mean, cov))


def homodyne_sample(state: GaussianState, address: QuadratureAddress, rng_seed) -> MeasurementRecord:
    """Draw an outcome from the homodyne marginal, then condition on it."""
    u, V, m_meas = _measured(state, address)
    outcome = np.random.default_rng(rng_seed).normal(m_meas, np.sqrt(V))
    return homodyne_condition(state, address, outcome)


def _coefficients(state: GaussianState, terms: Iterable[tuple[QuadratureAddress, float]]) -> np.ndarray:
    terms = list(terms)
    if not terms:
        raise ValueError("empty term list")
    c = np.zeros(state.mean.size)
    for address, coeff in terms:
        _check_address(state, address)
        c += float(coeff) * address.direction(state.n_modes)
    return c


def combination_variance(state: GaussianState, terms: Sequence[tuple[QuadratureAddress, float]]) -> float:
    """Variance of ``sum(coeff * quadrature)``, e.g. ``[(p_s, 1), (p_m, -G)]``."""
    c = _coefficients(state, terms)
    return float(c @ state.cov @ c)


def combination_mean(state: GaussianState, terms: Sequence[tuple[QuadratureAddress, float]]) -> float:
    return float(_coefficients(state, terms) @ state.mean)


def optimal_gain(state: GaussianState, target: QuadratureAddress, meter: QuadratureAddress) -> float:
    """Least-squares gain minimizing ``Var(target - G * meter)``."""
    _check_address(state, target)
    _check_address(state, meter)
    if target.mode == meter.mode:
        raise ValueError("target and meter must be on distinct modes")
    ut = target.direction(state.n_modes)
    um = meter.direction(state.n_modes)
    V = float(um @ state.cov @ um)
    if V <= DEGENERATE_VAR:
        raise DegenerateMeasurementError(f"meter variance {V:.3e} is degenerate")
    return float(ut @ state.cov @ um) / V


def cancellation_gain(T: float, meter_efficiency: float = 1.0, target_efficiency: float = 1.0) -> float:
    """Gain cancelling the marker input in ``target - G * meter`` after the QND beam splitter.

    With lossless detection this is ``-sqrt((1 - T) / T)``.  Detection
    efficiencies on either beam rescale the two photocurrents and hence the
    gain that balances them.
    """
    if not 0 < T < 1:
        raise ValueError(f"transmittance must lie in (0, 1), got {T!r}")
    if not (0 < meter_efficiency <= 1 and 0 < target_efficiency <= 1):
        raise ValueError("detection efficiencies must lie in (0, 1]")
    return -np.sqrt((1 - T) / T) * np.sqrt(target_efficiency / meter_efficiency)


def resolve_gain(
    strategy: GainStrategy | float,
    state: GaussianState,
    target: QuadratureAddress,
    meter: QuadratureAddress,
    *,
    T: float | None = None,
    meter_efficiency: float = 1.0,
    target_efficiency: float = 1.0,
) -> float:
    """Turn a strategy (or a bare number) into a numeric gain for this state."""
    if not isinstance(strategy, GainStrategy):
        return float(strategy)
    if strategy.kind == "fixed":
        return strategy.G
    if strategy.kind == "optimal":
        return optimal_gain(state, target, meter)
    if T is None:
        raise ValueError("cancellation gain needs the QND transmittance T")
    return cancellation_gain(T, meter_efficiency, target_efficiency)


def _feedforward_setup(state, meter, target):
    _check_address(state, meter)
    _check_address(state, target)
    if meter.mode == target.mode:
        raise ValueError("meter and target must be on distinct modes")
    if state.n_modes < 2:
        raise ValueError("feed-forward needs at least two modes")
    keep = _remaining_indices(state.n_modes, meter.mode)
    shifted = QuadratureAddress(target.mode - (meter.mode < target.mode), target.theta)
    return keep, shifted, shifted.direction(state.n_modes - 1)


def feedforward(
    state: GaussianState,
    meter: QuadratureAddress,
    target: QuadratureAddress,
    gain: GainStrategy | float = GainStrategy(),
    *,
    T: float | None = None,
    meter_efficiency: float = 1.0,
    target_efficiency: float = 1.0,
    rng_seed=None,
) -> GaussianState:
    """Measure ``meter`` and displace ``target`` by ``-G`` times the outcome.

    Without ``rng_seed`` the unconditional (ensemble) output is returned in
    closed form: the map ``target -> target - G * meter`` applied to the
    joint Gaussian.  With a seed, a single trajectory is produced.  Only the
    target quadrature is displaced; its conjugate is untouched.  The meter
    mode is removed, so modes above it shift down by one.
    """
    keep, _, ut = _feedforward_setup(state, meter, target)
    G = resolve_gain(
        gain, state, target, meter, T=T, meter_efficiency=meter_efficiency, target_efficiency=target_efficiency
    )
    if rng_seed is not None:
        rec = homodyne_sample(state, meter, rng_seed)
        out = rec.conditioned_state
        return GaussianState(out.mean - G * rec.outcome * ut, out.cov)
    um = meter.direction(state.n_modes)
    M = np.eye(state.mean.size)[keep] - G * np.outer(ut, um)
    return GaussianState(M @ state.mean, M @ state.cov @ M.T)


def feedforward_ensemble(
    state: GaussianState,
    meter: QuadratureAddress,
    target: QuadratureAddress,
    G: float,
    n: int,
    base_seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Ensemble mean and covariance over ``n`` seeded feed-forward trajectories.

    Trajectory ``k`` uses seed ``base_seed + k``.  Each trajectory is a
    Gaussian with the conditioned covariance, so the ensemble covariance is
    that covariance plus the scatter of the trajectory means.
    """
    if n < 2:
        raise ValueError("need at least two trajectories")
    _, _, ut = _feedforward_setup(state, meter, target)
    _, V, m_meas = _measured(state, meter)
    outcomes = np.array([np.random.default_rng(base_seed + k).normal(m_meas, np.sqrt(V)) for k in range(n)])
    # conditioned mean is affine in the outcome
    rec0 = homodyne_condition(state, meter, m_meas)
    rec1 = homodyne_condition(state, meter, m_meas + 1.0)
    slope = rec1.conditioned_state.mean - rec0.conditioned_state.mean
    means = rec0.conditioned_state.mean + np.outer(outcomes - m_meas, slope) - G * np.outer(outcomes, ut)
    cov = rec0.conditioned_state.cov + np.cov(means, rowvar=False)
    return means.mean(axis=0), cov
