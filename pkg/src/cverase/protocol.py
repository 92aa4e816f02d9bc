"""The erasing experiment: QND labelling, electronic and feed-forward erasure, sweeps.

Mode 0 is the signal, mode 1 the marker.  The marker is amplitude squeezed
(variance ``s`` on x), carries classical excess noise on p, and enters the
second port of the QND beam splitter.  Detection losses act on each detected
beam after the beam splitter.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from .gaussian import (
    GaussianState,
    QuadratureAddress,
    add_classical_noise,
    apply_beamsplitter,
    apply_loss,
    apply_squeeze,
    check_physical,
    displace,
    quad_mean,
    quad_variance,
    squeezed_vacuum,
    tensor,
    vacuum,
)
from .measurement import (
    GainStrategy,
    combination_variance,
    feedforward,
    homodyne_condition,
    resolve_gain,
)
from .metrics import (
    DEFAULT_LEVEL,
    ContourEllipse,
    NoiseReport,
    added_noise,
    fidelity_gaussian,
    from_dB,
    gains,
    to_dB,
    wigner_contour,
)

SIGNAL, MARKER = 0, 1
X_S, P_S = QuadratureAddress.x(SIGNAL), QuadratureAddress.p(SIGNAL)
X_M, P_M = QuadratureAddress.x(MARKER), QuadratureAddress.p(MARKER)

# values reported for the experiment
PAPER_T = 0.477
PAPER_EFFICIENCY = 0.70
PAPER_N_X_LABEL = 0.55
PAPER_N_P_SIGNAL = 455.0
PAPER_N_X_RESTORED = 0.54
PAPER_N_P_RESTORED = 1.39


@dataclass(frozen=True)
class Coherent:
    """Coherent signal input with mean ``(dx, dp)`` in shot-noise units."""

    dx: float = 0.0
    dp: float = 0.0


@dataclass(frozen=True)
class EraserParams:
    """One scenario of the erasing experiment.

    ``feedforward_noise`` is classical noise (shot-noise units, before gain
    normalization) added by the electro-optic loop to the restored phase
    quadrature; it only affects :func:`run_erasure_feedforward`.
    """

    T: float = PAPER_T
    marker_squeeze_dB: float = 0.0
    marker_excess_phase_noise: float = 0.0
    detection_efficiency: float = 1.0
    gain_strategy: GainStrategy = GainStrategy()
    signal_input: Literal["vacuum"] | Coherent = "vacuum"
    feedforward_noise: float = 0.0
    sideband_freq_MHz: float = 20.5

    def __post_init__(self):
        if not 0 < self.T < 1:
            raise ValueError(f"T must lie in (0, 1), got {self.T!r}")
        if not (self.marker_squeeze_dB >= 0 and math.isfinite(self.marker_squeeze_dB)):
            raise ValueError(f"marker_squeeze_dB must be a finite non-negative number, got {self.marker_squeeze_dB!r}")
        if not self.marker_excess_phase_noise >= 0:
            raise ValueError("marker_excess_phase_noise must be non-negative")
        if not 0 <= self.detection_efficiency <= 1:
            raise ValueError("detection_efficiency must lie in [0, 1]")
        if not self.feedforward_noise >= 0:
            raise ValueError("feedforward_noise must be non-negative")
        if not isinstance(self.gain_strategy, GainStrategy):
            raise ValueError("gain_strategy must be a GainStrategy")
        if self.signal_input != "vacuum" and not isinstance(self.signal_input, Coherent):
            raise ValueError(f"signal_input must be 'vacuum' or Coherent, got {self.signal_input!r}")

    @property
    def marker_variance(self) -> float:
        """Squeezed amplitude variance of the marker before excess noise."""
        return from_dB(-self.marker_squeeze_dB)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gain_strategy"] = {k: v for k, v in d["gain_strategy"].items() if v is not None}
        if isinstance(self.signal_input, Coherent):
            d["signal_input"] = {"coherent": [self.signal_input.dx, self.signal_input.dp]}
        return d


@dataclass
class ExperimentResult:
    experiment: str
    params: EraserParams
    noise_report: NoiseReport
    variances: dict[str, dict[str, float]]
    states: dict[str, GaussianState] = field(default_factory=dict)
    output_state: GaussianState | None = None
    fidelity: float | None = None
    gain: float | None = None
    contours: dict[str, ContourEllipse] = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        for stage, table in self.variances.items():
            for name, v in table.items():
                if not v > 0:
                    raise ValueError(f"non-positive variance {stage}/{name} = {v!r}")

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": self.params.to_dict(),
            "noise_report": self.noise_report.to_dict(),
            "gain": self.gain,
            "fidelity": self.fidelity,
            "variances": self.variances,
            "contours": {k: asdict(c) for k, c in self.contours.items()},
            "output_state": _state_dict(self.output_state),
            "states": {k: _state_dict(s) for k, s in self.states.items()},
            "extras": self.extras,
        }


def _state_dict(state: GaussianState | None):
    if state is None:
        return None
    return {"mean": state.mean.tolist(), "cov": state.cov.tolist()}


# ---------------------------------------------------------------------------
# stages


def input_state(params: EraserParams) -> GaussianState:
    state = vacuum(1)
    if isinstance(params.signal_input, Coherent):
        state = displace(state, 0, params.signal_input.dx, params.signal_input.dp)
    return state


def marker_state(params: EraserParams) -> GaussianState:
    marker = squeezed_vacuum(params.marker_variance, 0.0)
    return add_classical_noise(marker, QuadratureAddress.p(0), params.marker_excess_phase_noise)


def post_qnd_state(params: EraserParams) -> GaussianState:
    joint = tensor(input_state(params), marker_state(params))
    return check_physical(apply_beamsplitter(joint, SIGNAL, MARKER, params.T), "post-QND state")


def detected_state(params: EraserParams, modes: Sequence[int] = (SIGNAL, MARKER)) -> GaussianState:
    state = post_qnd_state(params)
    for mode in modes:
        state = apply_loss(state, mode, params.detection_efficiency)
    return check_physical(state, "detected state")


def _quad_table(state: GaussianState) -> dict[str, float]:
    names = ("s", "m")
    table = {}
    for mode in range(state.n_modes):
        table[f"x_{names[mode]}"] = quad_variance(state, QuadratureAddress.x(mode))
        table[f"p_{names[mode]}"] = quad_variance(state, QuadratureAddress.p(mode))
    return table


def _labelling_noise(params: EraserParams, detected: GaussianState) -> dict[str, float]:
    g_m, g_s, _ = gains(params.T)
    sig_in = input_state(params)
    return {
        "N_x_label": added_noise(quad_variance(detected, X_M), g_m, quad_variance(sig_in, X_S)),
        "N_p_signal": added_noise(quad_variance(detected, P_S), g_s, quad_variance(sig_in, P_S)),
    }


# ---------------------------------------------------------------------------
# experiments


def run_qnd_stage(params: EraserParams) -> ExperimentResult:
    """Input preparation and QND labelling; reports the two labelling noises."""
    inp = input_state(params)
    qnd = post_qnd_state(params)
    det = detected_state(params)
    return ExperimentResult(
        "qnd",
        params,
        NoiseReport.for_T(params.T, **_labelling_noise(params, det)),
        variances={"input": _quad_table(inp), "post_qnd": _quad_table(qnd), "detected": _quad_table(det)},
        states={"input": inp, "post_qnd": qnd, "detected": det},
    )


def _erase_electronic(params: EraserParams, det: GaussianState, experiment: str) -> ExperimentResult:
    _, _, g_e = gains(params.T)
    eta = params.detection_efficiency
    inp = input_state(params)
    qnd = post_qnd_state(params)
    G = resolve_gain(params.gain_strategy, det, P_S, P_M, T=params.T, meter_efficiency=eta, target_efficiency=eta)
    var_pc = combination_variance(det, [(P_S, 1.0), (P_M, -G)])
    report = NoiseReport.for_T(
        params.T,
        **_labelling_noise(params, det),
        N_p_erased=added_noise(var_pc, g_e, quad_variance(inp, P_S)),
        N_x_erased=added_noise(quad_variance(det, X_S), 1 / g_e, quad_variance(inp, X_S)),
    )
    return ExperimentResult(
        experiment,
        params,
        report,
        variances={
            "input": _quad_table(inp),
            "post_qnd": _quad_table(qnd),
            "detected": _quad_table(det),
            "conditioned": {"p_c": var_pc},
        },
        states={"input": inp, "post_qnd": qnd, "detected": det},
        gain=G,
        extras={"joint_state_digest": det.digest()},
    )


def run_erasure_electronic(params: EraserParams) -> ExperimentResult:
    """Phase readout of both beams and subtraction ``p_c = p_s - G p_m``."""
    return _erase_electronic(params, detected_state(params), "erase-electronic")


def run_erasure_feedforward(params: EraserParams, level: float = DEFAULT_LEVEL) -> ExperimentResult:
    """Restore the signal as a propagating beam by displacing it with the marker's phase readout.

    Only the marker is detected (efficiency ``detection_efficiency``).  The
    output is renormalized by a local squeeze that scales x by ``sqrt(1/T)``
    and p by ``sqrt(T)``, after which added noise is simply ``V - V_in``.
    """
    T = params.T
    eta = params.detection_efficiency
    inp = input_state(params)
    qnd = post_qnd_state(params)
    meter_det = check_physical(apply_loss(qnd, MARKER, eta), "detected marker")
    G = resolve_gain(params.gain_strategy, meter_det, P_S, P_M, T=T, meter_efficiency=eta, target_efficiency=1.0)
    out = feedforward(meter_det, P_M, P_S, G)
    out = add_classical_noise(out, QuadratureAddress.p(0), params.feedforward_noise)
    restored = check_physical(apply_squeeze(out, 0, 1 / T, 0.0), "restored state")

    det = detected_state(params)
    report = NoiseReport.for_T(
        T,
        **_labelling_noise(params, det),
        N_p_erased=quad_variance(restored, P_S) - quad_variance(inp, P_S),
        N_x_erased=quad_variance(restored, X_S) - quad_variance(inp, X_S),
    )
    labelled = _gain_normalized(qnd.reduced(SIGNAL), math.sqrt(T))
    return ExperimentResult(
        "erase-feedforward",
        params,
        report,
        variances={
            "input": _quad_table(inp),
            "post_qnd": _quad_table(qnd),
            "feedforward_raw": _quad_table(out),
            "restored": _quad_table(restored),
        },
        states={"input": inp, "post_qnd": qnd, "marker_detected": meter_det, "restored": restored},
        output_state=restored,
        fidelity=fidelity_gaussian(restored, inp),
        gain=G,
        contours={
            "input": wigner_contour(inp, 0, level),
            "post_qnd": wigner_contour(labelled, 0, level),
            "restored": wigner_contour(restored, 0, level),
        },
    )


def _gain_normalized(state: GaussianState, g: float) -> GaussianState:
    """Divide a single-mode state by an (amplitude) gain ``g <= 1`` for display."""
    return GaussianState(state.mean / g, state.cov / g**2)


def run_delayed_choice(params: EraserParams, marker_basis: Literal["amplitude", "phase"]) -> ExperimentResult:
    """Choose the marker readout basis after the joint state has been formed.

    Both branches start from the same detected joint state; its digest is
    stored in ``extras["joint_state_digest"]``.
    """
    det = detected_state(params)
    if marker_basis == "phase":
        result = _erase_electronic(params, det, "delayed-choice")
        result.extras["marker_basis"] = "phase"
        return result
    if marker_basis != "amplitude":
        raise ValueError(f"marker_basis must be 'amplitude' or 'phase', got {marker_basis!r}")
    inp = input_state(params)
    rec = homodyne_condition(det, X_M, quad_mean(det, X_M))
    cond = rec.conditioned_state
    return ExperimentResult(
        "delayed-choice",
        params,
        NoiseReport.for_T(params.T, **_labelling_noise(params, det)),
        variances={
            "input": _quad_table(inp),
            "detected": _quad_table(det),
            "conditioned": {"x_s": quad_variance(cond, X_S), "p_s": quad_variance(cond, P_S)},
        },
        states={"input": inp, "detected": det},
        extras={"marker_basis": "amplitude", "joint_state_digest": det.digest()},
    )


@dataclass(frozen=True)
class SweepRow:
    squeeze_dB: float
    N_x_label: float
    N_p_signal: float
    N_p_erased: float


def sweep_squeezing(params: EraserParams, squeeze_dB_list: Sequence[float]) -> list[SweepRow]:
    """Electronic erasure at each marker squeezing, all else fixed."""
    if len(squeeze_dB_list) == 0:
        raise ValueError("empty squeezing list")
    rows = []
    for dB in squeeze_dB_list:
        rep = run_erasure_electronic(replace(params, marker_squeeze_dB=float(dB))).noise_report
        rows.append(SweepRow(float(dB), rep.N_x_label, rep.N_p_signal, rep.N_p_erased))
    return rows


# ---------------------------------------------------------------------------
# calibration


def _solve_marker(N_x_label: float, N_p_signal: float, T: float, eta: float) -> tuple[float, float]:
    """Marker x variance and p variance giving the two labelling noises for vacuum input."""
    if not 0 < eta <= 1:
        raise ValueError("detection efficiency must lie in (0, 1]")
    # detected marker x: eta*((1-T) + T*s) + 1 - eta = (N_x + 1)(1 - T)
    s = ((N_x_label + 1) * (1 - T) - 1 + eta * T) / (eta * T)
    # detected signal p: eta*(T + (1-T)*V) + 1 - eta = (N_p + 1) T
    V_p = ((N_p_signal + 1) * T - 1 + eta * (1 - T)) / (eta * (1 - T))
    return s, V_p


def calibrate_to_paper(
    N_x_label: float = PAPER_N_X_LABEL,
    N_p_signal: float = PAPER_N_P_SIGNAL,
    T: float = PAPER_T,
    detection_efficiency: float = PAPER_EFFICIENCY,
) -> EraserParams:
    """Marker squeezing and excess phase noise reproducing the reported labelling noises.

    The reported noises are treated as detected values, so the detection
    efficiency is part of the inversion.  With unit efficiency this reduces
    to ``s = N_x (1 - T) / T`` and ``V_p = N_p T / (1 - T)``.
    """
    s, V_p = _solve_marker(N_x_label, N_p_signal, T, detection_efficiency)
    if not 0 < s <= 1:
        raise ValueError(f"no squeezing in (0, 1] reproduces N_x_label={N_x_label} (needs s={s:.4g})")
    excess = V_p - 1 / s
    if excess < 0:
        raise ValueError(f"N_p_signal={N_p_signal} is below the squeezing-limited value")
    return EraserParams(
        T=T,
        marker_squeeze_dB=-to_dB(s),
        marker_excess_phase_noise=excess,
        detection_efficiency=detection_efficiency,
    )


def calibrate_feedforward_to_paper(
    N_x_restored: float = PAPER_N_X_RESTORED,
    N_p_restored: float = PAPER_N_P_RESTORED,
    T: float = PAPER_T,
    detection_efficiency: float = PAPER_EFFICIENCY,
    N_p_signal: float = PAPER_N_P_SIGNAL,
) -> EraserParams:
    """Scenario whose feed-forward output carries the given added noises.

    The amplitude noise ``(1 - T) s / T`` fixes the squeezing; the phase noise
    left after the marker detection loss is attributed to the loop.
    """
    eta = detection_efficiency
    s = N_x_restored * T / (1 - T)
    if not 0 < s <= 1:
        raise ValueError(f"amplitude noise {N_x_restored} needs unphysical squeezing s={s:.4g}")
    loss_noise = (1 - T) * (1 - eta) / eta
    loop = (N_p_restored - loss_noise) / T
    if loop < 0:
        raise ValueError(f"phase noise {N_p_restored} is below the detection-loss floor {loss_noise:.4g}")
    _, V_p = _solve_marker(0.0, N_p_signal, T, eta)
    return EraserParams(
        T=T,
        marker_squeeze_dB=-to_dB(s),
        marker_excess_phase_noise=max(V_p - 1 / s, 0.0),
        detection_efficiency=eta,
        feedforward_noise=loop,
    )
