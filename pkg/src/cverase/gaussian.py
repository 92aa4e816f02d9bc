"""Multimode Gaussian states in shot-noise units and their symplectic operations.

Quadratures are interleaved as ``(x1, p1, x2, p2, ...)`` and the vacuum has
unit variance in every quadrature.  States are immutable; every operation
returns a new :class:`GaussianState`.

Beam splitter convention (mode ``i`` first, mode ``j`` second)::

    out_i = sqrt(T) * in_i + sqrt(1 - T) * in_j
    out_j = sqrt(1 - T) * in_i - sqrt(T) * in_j
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

SYMMETRY_TOL = 1e-10
PHYSICAL_TOL = 1e-9

__all__ = [
    "PHYSICAL_TOL",
    "GaussianState",
    "PhysicalityError",
    "QuadratureAddress",
    "add_classical_noise",
    "apply_beamsplitter",
    "apply_loss",
    "apply_phase_rotation",
    "apply_squeeze",
    "apply_symplectic",
    "beamsplitter_matrix",
    "displace",
    "is_physical",
    "quad_mean",
    "quad_variance",
    "rotation_matrix",
    "squeeze_matrix",
    "squeezed_vacuum",
    "symplectic_eigenvalues",
    "symplectic_form",
    "tensor",
    "trace_out",
    "vacuum",
]


class PhysicalityError(RuntimeError):
    """A covariance matrix violates the uncertainty principle."""


@dataclass(frozen=True)
class QuadratureAddress:
    """One quadrature ``cos(theta) x + sin(theta) p`` of one mode.

    ``theta`` is reduced to ``[0, pi)``; an address names an axis, so
    ``theta`` and ``theta + pi`` give the same observable.
    """

    mode: int
    theta: float = 0.0

    def __post_init__(self):
        if int(self.mode) != self.mode or self.mode < 0:
            raise ValueError(f"mode index must be a non-negative integer, got {self.mode!r}")
        theta = float(np.mod(self.theta, np.pi))
        # mod can round up to exactly pi for tiny negative inputs
        if theta >= np.pi:
            theta = 0.0
        object.__setattr__(self, "mode", int(self.mode))
        object.__setattr__(self, "theta", theta)

    @classmethod
    def x(cls, mode: int) -> "QuadratureAddress":
        return cls(mode, 0.0)

    @classmethod
    def p(cls, mode: int) -> "QuadratureAddress":
        return cls(mode, np.pi / 2)

    def direction(self, n_modes: int) -> np.ndarray:
        """Unit phase-space vector ``u`` with ``u @ r`` equal to this quadrature."""
        if self.mode >= n_modes:
            raise ValueError(f"mode {self.mode} out of range for a {n_modes}-mode state")
        u = np.zeros(2 * n_modes)
        u[2 * self.mode] = np.cos(self.theta)
        u[2 * self.mode + 1] = np.sin(self.theta)
        return u


class GaussianState:
    """Mean vector and covariance matrix of ``n_modes`` optical modes.

    Args:
        mean: length ``2N`` vector ordered ``(x1, p1, ..., xN, pN)``.
        cov: symmetric ``2N x 2N`` covariance matrix, vacuum = identity.

    Raises:
        ValueError: on inconsistent shapes or a covariance whose asymmetry
            exceeds ``1e-10``.  Smaller asymmetry is repaired silently.
    """

    __slots__ = ("_mean", "_cov")

    def __init__(self, mean, cov):
        mean = np.array(mean, dtype=float).reshape(-1)
        cov = np.array(cov, dtype=float)
        if mean.size == 0 or mean.size % 2:
            raise ValueError(f"mean must have positive even length, got {mean.size}")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("mean and cov must be finite")
        asym = np.max(np.abs(cov - cov.T))
        if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(cov))):
            raise ValueError(f"covariance is not symmetric (max deviation {asym:.3e})")
        cov = 0.5 * (cov + cov.T)
        mean.setflags(write=False)
        cov.setflags(write=False)
        self._mean = mean
        self._cov = cov

    @property
    def mean(self) -> np.ndarray:
        return self._mean

    @property
    def cov(self) -> np.ndarray:
        return self._cov

    @property
    def n_modes(self) -> int:
        return self._mean.size // 2

    def mode_block(self, mode: int) -> tuple[np.ndarray, np.ndarray]:
        """Mean and 2x2 covariance block of a single mode."""
        _check_mode(self, mode)
        sl = slice(2 * mode, 2 * mode + 2)
        return self._mean[sl].copy(), self._cov[sl, sl].copy()

    def reduced(self, mode: int) -> "GaussianState":
        """Single-mode marginal of ``mode``."""
        return GaussianState(*self.mode_block(mode))

    def digest(self) -> str:
        """SHA-256 of the exact mean and covariance bytes."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self._mean).tobytes())
        h.update(np.ascontiguousarray(self._cov).tobytes())
        return h.hexdigest()

    def allclose(self, other: "GaussianState", atol: float = 1e-12) -> bool:
        return (
            self.n_modes == other.n_modes
            and np.allclose(self._mean, other._mean, rtol=0, atol=atol)
            and np.allclose(self._cov, other._cov, rtol=0, atol=atol)
        )

    def __eq__(self, other):
        if not isinstance(other, GaussianState):
            return NotImplemented
        return np.array_equal(self._mean, other._mean) and np.array_equal(self._cov, other._cov)

    def __hash__(self):
        return hash(self.digest())

    def __repr__(self):
        return f"GaussianState(n_modes={self.n_modes}, mean={self._mean.tolist()}, cov={self._cov.tolist()})"


def _check_mode(state: GaussianState, mode: int) -> None:
    if int(mode) != mode or not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode!r} out of range for a {state.n_modes}-mode state")


def _check_address(state: GaussianState, address: QuadratureAddress) -> None:
    if not isinstance(address, QuadratureAddress):
        raise ValueError(f"expected a QuadratureAddress, got {type(address).__name__}")
    _check_mode(state, address.mode)


# ---------------------------------------------------------------------------
# constructors


def vacuum(n_modes: int = 1) -> GaussianState:
    if int(n_modes) != n_modes or n_modes < 1:
        raise ValueError(f"n_modes must be a positive integer, got {n_modes!r}")
    n = 2 * int(n_modes)
    return GaussianState(np.zeros(n), np.eye(n))


def squeezed_vacuum(s: float, theta: float = 0.0) -> GaussianState:
    """Pure single-mode state with variance ``s`` along ``theta`` and ``1/s`` across it.

    ``s = 10 ** (-dB / 10)``; anti-squeezing is expressed by rotating ``theta``.
    """
    if not 0 < s <= 1:
        raise ValueError(f"squeezed variance must lie in (0, 1], got {s!r}")
    return apply_squeeze(vacuum(1), 0, s, theta)


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    """Product state ``a (x) b``; the modes of ``b`` follow those of ``a``."""
    na, nb = a.mean.size, b.mean.size
    cov = np.zeros((na + nb, na + nb))
    cov[:na, :na] = a.cov
    cov[na:, na:] = b.cov
    return GaussianState(np.concatenate([a.mean, b.mean]), cov)


def trace_out(state: GaussianState, mode: int) -> GaussianState:
    _check_mode(state, mode)
    if state.n_modes == 1:
        raise ValueError("cannot trace out the last remaining mode")
    keep = np.delete(np.arange(state.mean.size), [2 * mode, 2 * mode + 1])
    return GaussianState(state.mean[keep], state.cov[np.ix_(keep, keep)])


# ---------------------------------------------------------------------------
# symplectic matrices


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def rotation_matrix(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def squeeze_matrix(s: float, theta: float = 0.0) -> np.ndarray:
    """Scales the ``theta`` quadrature by ``sqrt(s)`` and its conjugate by ``1/sqrt(s)``."""
    if not s > 0:
        raise ValueError(f"squeeze variance ratio must be positive, got {s!r}")
    r = rotation_matrix(theta)
    return r @ np.diag([np.sqrt(s), 1 / np.sqrt(s)]) @ r.T


def beamsplitter_matrix(T: float) -> np.ndarray:
    """4x4 symplectic matrix acting on ``(x_i, p_i, x_j, p_j)``."""
    if not 0 <= T <= 1:
        raise ValueError(f"transmittance must lie in [0, 1], got {T!r}")
    t, r = np.sqrt(T), np.sqrt(1 - T)
    eye = np.eye(2)
    return np.block([[t * eye, r * eye], [r * eye, -t * eye]])


def apply_symplectic(state: GaussianState, S: np.ndarray, modes: Sequence[int]) -> GaussianState:
    """Apply a linear map ``S`` to the quadratures of ``modes`` (in order)."""
    modes = list(modes)
    for m in modes:
        _check_mode(state, m)
    if len(set(modes)) != len(modes):
        raise ValueError(f"repeated mode in {modes}")
    idx = np.array([k for m in modes for k in (2 * m, 2 * m + 1)])
    S = np.asarray(S, dtype=float)
    if S.shape != (idx.size, idx.size):
        raise ValueError(f"matrix shape {S.shape} does not match {len(modes)} modes")
    full = np.eye(state.mean.size)
    full[np.ix_(idx, idx)] = S
    return GaussianState(full @ state.mean, full @ state.cov @ full.T)


# ---------------------------------------------------------------------------
# operations


def displace(state: GaussianState, mode: int, dx: float, dp: float) -> GaussianState:
    _check_mode(state, mode)
    mean = state.mean.copy()
    mean[2 * mode] += dx
    mean[2 * mode + 1] += dp
    return GaussianState(mean, state.cov)


def apply_beamsplitter(state: GaussianState, mode_i: int, mode_j: int, T: float) -> GaussianState:
    if mode_i == mode_j:
        raise ValueError("beam splitter needs two distinct modes")
    return apply_symplectic(state, beamsplitter_matrix(T), [mode_i, mode_j])


def apply_phase_rotation(state: GaussianState, mode: int, phi: float) -> GaussianState:
    return apply_symplectic(state, rotation_matrix(phi), [mode])


def apply_squeeze(state: GaussianState, mode: int, s: float, theta: float = 0.0) -> GaussianState:
    return apply_symplectic(state, squeeze_matrix(s, theta), [mode])


def apply_loss(state: GaussianState, mode: int, eta: float) -> GaussianState:
    """Pure-loss channel of efficiency ``eta`` (beam splitter onto vacuum, traced out)."""
    _check_mode(state, mode)
    if not 0 <= eta <= 1:
        raise ValueError(f"efficiency must lie in [0, 1], got {eta!r}")
    n = state.mean.size
    idx = [2 * mode, 2 * mode + 1]
    scale = np.ones(n)
    scale[idx] = np.sqrt(eta)
    cov = state.cov * np.outer(scale, scale)
    cov[idx, idx] += 1 - eta
    return GaussianState(state.mean * scale, cov)


def add_classical_noise(state: GaussianState, address: QuadratureAddress, V_add: float) -> GaussianState:
    """Add Gaussian classical noise of variance ``V_add`` along one quadrature."""
    _check_address(state, address)
    if not V_add >= 0:
        raise ValueError(f"added noise variance must be non-negative, got {V_add!r}")
    u = address.direction(state.n_modes)
    return GaussianState(state.mean, state.cov + V_add * np.outer(u, u))


def quad_variance(state: GaussianState, address: QuadratureAddress) -> float:
    _check_address(state, address)
    u = address.direction(state.n_modes)
    return float(u @ state.cov @ u)


def quad_mean(state: GaussianState, address: QuadratureAddress) -> float:
    _check_address(state, address)
    return float(address.direction(state.n_modes) @ state.mean)


# ---------------------------------------------------------------------------
# physicality


def symplectic_eigenvalues(cov) -> np.ndarray:
    """Sorted symplectic eigenvalues (each listed once)."""
    cov = cov.cov if isinstance(cov, GaussianState) else np.asarray(cov, dtype=float)
    n = cov.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ cov))
    return np.sort(ev)[::2]


def is_physical(state, tol: float = PHYSICAL_TOL) -> bool:
    """True when ``cov`` is positive definite with symplectic eigenvalues >= 1.

    Accepts a :class:`GaussianState` or a bare covariance matrix.  The
    tolerance is widened by the floating-point error of the eigenvalue
    computation, which grows with ``||cov||`` for strongly squeezed states.
    """
    cov = state.cov if isinstance(state, GaussianState) else np.asarray(state, dtype=float)
    norm = np.linalg.norm(cov, 2)
    slack = tol + 16 * np.finfo(float).eps * norm
    if np.linalg.eigvalsh(cov).min() <= 0:
        return False
    return bool(symplectic_eigenvalues(cov).min() >= 1 - slack)


def check_physical(state: GaussianState, what: str = "state") -> GaussianState:
    if not is_physical(state):
        nu = symplectic_eigenvalues(state).min()
        raise PhysicalityError(f"{what} is unphysical: smallest symplectic eigenvalue {nu:.12g} < 1")
    return state
