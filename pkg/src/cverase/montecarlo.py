"""Sampling oracle for the analytic variances.

Draws from the classical normal distribution defined by a state's mean and
covariance restricted to chosen phase-space directions, and compares sample
moments with the analytic ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .gaussian import GaussianState, QuadratureAddress, _check_address

DEFAULT_N = 10**6
DEFAULT_Z = 4.0
CHUNK = 2**18
MIN_N = 10**3

__all__ = [
    "SampleBatch",
    "ValidationEntry",
    "ValidationReport",
    "sample_directions",
    "sample_quadratures",
    "validate_against_analytic",
]


@dataclass(frozen=True)
class SampleBatch:
    n: int
    values: np.ndarray
    seed: int
    labels: tuple[str, ...] = ()


def _sqrt_psd(cov: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(cov)
    floor = -1e-9 * max(1.0, float(np.abs(w).max()))
    if w.min() < floor:
        raise RuntimeError(f"restricted covariance is not PSD (eigenvalue {w.min():.3e}); core bug")
    return v * np.sqrt(np.clip(w, 0.0, None))


def sample_directions(state: GaussianState, U: np.ndarray, n: int, seed: int, labels=()) -> SampleBatch:
    """Sample ``U.T @ r`` for the columns of ``U`` (shape ``2N x k``).

    Chunk ``c`` is drawn from ``default_rng([seed, c])``, so a batch is
    reproducible for a fixed seed regardless of how it is consumed.
    """
    if n < 2:
        raise ValueError("need at least two samples")
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    mean = U.T @ state.mean
    L = _sqrt_psd(U.T @ state.cov @ U)
    chunks = []
    for c, start in enumerate(range(0, n, CHUNK)):
        size = min(CHUNK, n - start)
        z = np.random.default_rng([seed, c]).standard_normal((size, U.shape[1]))
        chunks.append(mean + z @ L.T)
    return SampleBatch(n, np.concatenate(chunks), seed, tuple(labels))


def _label(a: QuadratureAddress) -> str:
    return f"q{a.mode}({a.theta:.4f})"


def sample_quadratures(state: GaussianState, addresses: Sequence[QuadratureAddress], n: int, seed: int) -> SampleBatch:
    for a in addresses:
        _check_address(state, a)
    U = np.stack([a.direction(state.n_modes) for a in addresses], axis=1)
    return sample_directions(state, U, n, seed, [_label(a) for a in addresses])


@dataclass(frozen=True)
class ValidationEntry:
    name: str
    analytic: float
    empirical: float
    stderr: float
    z: float
    passed: bool


@dataclass
class ValidationReport:
    entries: list[ValidationEntry] = field(default_factory=list)
    threshold: float = DEFAULT_Z

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def max_abs_z(self) -> float:
        return max((abs(e.z) for e in self.entries), default=0.0)


def validate_against_analytic(
    state: GaussianState,
    addresses: Sequence[QuadratureAddress],
    n: int = DEFAULT_N,
    seed: int = 0,
    z: float = DEFAULT_Z,
    combinations: Mapping[str, Sequence[tuple[QuadratureAddress, float]]] | None = None,
    reference: GaussianState | None = None,
) -> ValidationReport:
    """Compare sample covariances from ``state`` with the analytic covariances.

    Every variance and covariance among ``addresses`` is checked, plus the
    variance of each named linear combination.  The analytic side comes from
    ``reference`` when given (used to test the oracle's sensitivity).  The
    standard error of a covariance estimate is
    ``sqrt((S_ii S_jj + S_ij**2) / n)``.
    """
    if n < MIN_N:
        raise ValueError(f"oracle needs n >= {MIN_N}, got {n}")
    reference = state if reference is None else reference
    if reference.n_modes != state.n_modes:
        raise ValueError("reference state has a different number of modes")
    cols, labels = [], []
    for a in addresses:
        _check_address(state, a)
        cols.append(a.direction(state.n_modes))
        labels.append(_label(a))
    k = len(cols)
    for name, terms in (combinations or {}).items():
        c = np.zeros(2 * state.n_modes)
        for a, coeff in terms:
            _check_address(state, a)
            c += coeff * a.direction(state.n_modes)
        cols.append(c)
        labels.append(name)
    U = np.stack(cols, axis=1)
    batch = sample_directions(state, U, n, seed, labels)
    emp = np.cov(batch.values, rowvar=False).reshape(U.shape[1], U.shape[1])
    ana = U.T @ reference.cov @ U

    report = ValidationReport(threshold=z)
    pairs = [(i, j) for i in range(k) for j in range(i, k)] + [(i, i) for i in range(k, U.shape[1])]
    for i, j in pairs:
        se = np.sqrt((ana[i, i] * ana[j, j] + ana[i, j] ** 2) / n)
        score = (emp[i, j] - ana[i, j]) / se
        name = labels[i] if i == j else f"{labels[i]}*{labels[j]}"
        report.entries.append(ValidationEntry(name, float(ana[i, j]), float(emp[i, j]), float(se), float(score), abs(score) <= z))
    return report
