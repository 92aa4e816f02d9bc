"""Figures of merit: gain-normalized added noise, fidelity, dB, Wigner contours."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .gaussian import GaussianState, _check_mode

DEFAULT_LEVEL = math.exp(-0.5)

__all__ = [
    "DEFAULT_LEVEL",
    "ContourEllipse",
    "NoiseReport",
    "added_noise",
    "fidelity_gaussian",
    "from_dB",
    "gains",
    "noise_dB",
    "to_dB",
    "uncertainty_product",
    "wigner_contour",
]


def gains(T: float) -> tuple[float, float, float]:
    """Marker, signal and erasure gains ``(sqrt(1-T), sqrt(T), 1/sqrt(T))``."""
    if not 0 < T < 1:
        raise ValueError(f"transmittance must lie in (0, 1), got {T!r}")
    return math.sqrt(1 - T), math.sqrt(T), 1 / math.sqrt(T)


def added_noise(V_out: float, g: float, V_in: float) -> float:
    """``V_out / g**2 - V_in``; negative values are returned as is."""
    if not g > 0:
        raise ValueError(f"gain must be positive, got {g!r}")
    if V_out < 0 or V_in < 0:
        raise ValueError("variances must be non-negative")
    return V_out / g**2 - V_in


def uncertainty_product(N_x: float, N_p: float, tol: float = 1e-9) -> tuple[float, bool]:
    product = N_x * N_p
    return product, bool(product >= 1 - tol)


def to_dB(V: float) -> float:
    if not V > 0:
        raise ValueError(f"variance must be positive, got {V!r}")
    return 10 * math.log10(V)


def from_dB(dB: float) -> float:
    return 10 ** (dB / 10)


def noise_dB(N: float) -> float:
    """Level above the quantum noise, ``10 log10(1 + N)``."""
    return to_dB(1 + N)


@dataclass(frozen=True)
class NoiseReport:
    g_m: float
    g_s: float
    g_e: float
    N_x_label: float | None = None
    N_p_signal: float | None = None
    N_p_erased: float | None = None
    N_x_erased: float | None = None
    product: float | None = field(init=False, default=None)
    product_satisfied: bool | None = field(init=False, default=None)
    dB: dict = field(init=False, default_factory=dict)

    def __post_init__(self):
        if self.N_x_label is not None and self.N_p_signal is not None:
            product, ok = uncertainty_product(self.N_x_label, self.N_p_signal)
            object.__setattr__(self, "product", product)
            object.__setattr__(self, "product_satisfied", ok)
        dB = {}
        for name in ("N_x_label", "N_p_signal", "N_p_erased", "N_x_erased"):
            N = getattr(self, name)
            if N is not None and N > -1:
                dB[name] = noise_dB(N)
        object.__setattr__(self, "dB", dB)

    @classmethod
    def for_T(cls, T: float, **values) -> "NoiseReport":
        g_m, g_s, g_e = gains(T)
        return cls(g_m, g_s, g_e, **values)

    def to_dict(self) -> dict:
        return asdict(self)


def fidelity_gaussian(a: GaussianState, b: GaussianState) -> float:
    """Uhlmann fidelity of two single-mode Gaussian states (shot-noise units)."""
    if a.n_modes != 1 or b.n_modes != 1:
        raise ValueError("fidelity_gaussian takes single-mode states")
    A, B = a.cov, b.cov
    delta = a.mean - b.mean
    S = A + B
    Delta = np.linalg.det(S)
    lam = max((np.linalg.det(A) - 1) * (np.linalg.det(B) - 1), 0.0)
    F = 2 * math.exp(-0.5 * delta @ np.linalg.solve(S, delta)) / (math.sqrt(Delta + lam) - math.sqrt(lam))
    return float(min(F, 1.0))


@dataclass(frozen=True)
class ContourEllipse:
    center: tuple[float, float]
    semi_axes: tuple[float, float]
    orientation: float


def wigner_contour(state: GaussianState, mode: int = 0, level: float = DEFAULT_LEVEL) -> ContourEllipse:
    """Ellipse where the mode's Wigner function falls to ``level`` times its peak.

    ``orientation`` is the angle of the major axis, in ``[0, pi)``.
    """
    _check_mode(state, mode)
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level!r}")
    mean, cov = state.mode_block(mode)
    w, v = np.linalg.eigh(cov)
    scale = -2 * math.log(level)
    a, b = math.sqrt(scale * w[1]), math.sqrt(scale * w[0])
    angle = math.atan2(v[1, 1], v[0, 1]) % math.pi if w[1] - w[0] > 1e-12 * w[1] else 0.0
    if angle >= math.pi:
        angle = 0.0
    return ContourEllipse((float(mean[0]), float(mean[1])), (a, b), angle)
