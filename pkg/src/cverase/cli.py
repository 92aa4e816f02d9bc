"""Scenario-driven command line: ``cverase run | validate | contours``.

Exit codes: 0 success, 1 malformed config or bad arguments, 2 physicality
violation during a run, 3 oracle disagreement.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .gaussian import GaussianState, PhysicalityError, QuadratureAddress
from .measurement import GainStrategy
from .metrics import DEFAULT_LEVEL
from .montecarlo import DEFAULT_N, DEFAULT_Z, MIN_N, validate_against_analytic
from .protocol import (
    P_M,
    P_S,
    Coherent,
    EraserParams,
    run_delayed_choice,
    run_erasure_electronic,
    run_erasure_feedforward,
    run_qnd_stage,
    sweep_squeezing,
)

log = logging.getLogger("cverase")

EXPERIMENTS = ("qnd", "erase-electronic", "erase-feedforward", "delayed-choice", "sweep")
SCENARIO_KEYS = {"experiment", "params", "sweep", "output", "seed"}
EXIT_OK, EXIT_CONFIG, EXIT_PHYSICAL, EXIT_ORACLE = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class Scenario:
    experiment: str
    params: EraserParams
    sweep: list[float] | None = None
    output: str | None = None
    seed: int | None = None


def _parse_gain(value) -> GainStrategy:
    if isinstance(value, str):
        return GainStrategy(value)
    if isinstance(value, dict):
        unknown = set(value) - {"kind", "G"}
        if unknown:
            raise ConfigError(f"unknown gain_strategy keys: {sorted(unknown)}")
        return GainStrategy(value.get("kind", "cancellation"), value.get("G"))
    raise ConfigError(f"gain_strategy must be a string or object, got {value!r}")


def _parse_signal(value):
    if value == "vacuum":
        return "vacuum"
    if isinstance(value, dict) and set(value) == {"coherent"}:
        dx, dp = value["coherent"]
        return Coherent(float(dx), float(dp))
    raise ConfigError(f"signal_input must be 'vacuum' or {{'coherent': [dx, dp]}}, got {value!r}")


def parse_params(raw: dict) -> EraserParams:
    if not isinstance(raw, dict):
        raise ConfigError("params must be an object")
    known = {f.name for f in fields(EraserParams)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown params keys: {sorted(unknown)}")
    kw = dict(raw)
    if "gain_strategy" in kw:
        kw["gain_strategy"] = _parse_gain(kw["gain_strategy"])
    if "signal_input" in kw:
        kw["signal_input"] = _parse_signal(kw["signal_input"])
    for k, v in kw.items():
        if k not in ("gain_strategy", "signal_input") and (isinstance(v, bool) or not isinstance(v, (int, float))):
            raise ConfigError(f"params.{k} must be a number, got {v!r}")
    return EraserParams(**kw)


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file; raises :class:`ConfigError`."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a JSON object")
    unknown = set(raw) - SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    if raw.get("experiment") not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {raw.get('experiment')!r}")
    try:
        params = parse_params(raw.get("params", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    sweep = raw.get("sweep")
    if raw["experiment"] == "sweep":
        if not isinstance(sweep, list) or not sweep or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and v >= 0 for v in sweep
        ):
            raise ConfigError("sweep experiment needs a non-empty list of non-negative squeeze_dB values")
    elif sweep is not None:
        raise ConfigError("'sweep' is only valid for the sweep experiment")
    seed = raw.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError("seed must be an integer")
    output = raw.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output must be a string path prefix")
    return Scenario(raw["experiment"], params, sweep, output, seed)


# ---------------------------------------------------------------------------
# running


def run_scenario(scn: Scenario) -> dict:
    """Run a scenario and return its JSON-ready result document."""
    p = scn.params
    if scn.experiment == "qnd":
        return run_qnd_stage(p).to_dict()
    if scn.experiment == "erase-electronic":
        return run_erasure_electronic(p).to_dict()
    if scn.experiment == "erase-feedforward":
        return run_erasure_feedforward(p).to_dict()
    if scn.experiment == "delayed-choice":
        return {
            "experiment": "delayed-choice",
            "params": p.to_dict(),
            "bases": {b: run_delayed_choice(p, b).to_dict() for b in ("amplitude", "phase")},
        }
    rows = sweep_squeezing(p, scn.sweep)
    return {"experiment": "sweep", "params": p.to_dict(), "rows": [asdict(r) for r in rows]}


def _fmt_N(v) -> str:
    return "-" if v is None else f"{round(v, 3) + 0.0:.3f}"


def _fmt_dB(v) -> str:
    return "-" if v is None else f"{round(v, 2) + 0.0:.2f}"


def _summary_lines(doc: dict, prefix: str = "") -> list[str]:
    rep = doc["noise_report"]
    lines = [f"{prefix}{'quantity':<12} {'N':>10} {'dB':>8}"]
    for name in ("N_x_label", "N_p_signal", "N_p_erased", "N_x_erased"):
        if rep[name] is not None:
            lines.append(f"{prefix}{name:<12} {_fmt_N(rep[name]):>10} {_fmt_dB(rep['dB'].get(name)):>8}")
    lines.append(f"{prefix}gains        g_m={rep['g_m']:.4f} g_s={rep['g_s']:.4f} g_e={rep['g_e']:.4f}")
    if rep["product"] is not None:
        ok = "ok" if rep["product_satisfied"] else "VIOLATED"
        lines.append(f"{prefix}product      {_fmt_N(rep['product'])} (>= 1: {ok})")
    if doc.get("gain") is not None:
        lines.append(f"{prefix}gain G       {doc['gain']:.4f}")
    if doc.get("fidelity") is not None:
        lines.append(f"{prefix}fidelity     {doc['fidelity']:.3f}")
    return lines


def summarize(doc: dict) -> str:
    """Human-readable table built only from the JSON result document."""
    lines = [f"experiment: {doc['experiment']}"]
    if doc["experiment"] == "sweep":
        lines.append(f"{'squeeze_dB':>10} {'N_x_label':>10} {'N_p_signal':>10} {'N_p_erased':>10}")
        for r in doc["rows"]:
            lines.append(
                f"{r['squeeze_dB']:>10.2f} {_fmt_N(r['N_x_label']):>10} "
                f"{_fmt_N(r['N_p_signal']):>10} {_fmt_N(r['N_p_erased']):>10}"
            )
    elif doc["experiment"] == "delayed-choice":
        for basis, sub in doc["bases"].items():
            lines.append(f"marker basis: {basis}")
            lines.extend(_summary_lines(sub, "  "))
            cond = sub["variances"]["conditioned"]
            lines.append("  conditioned  " + " ".join(f"{k}={v:.3f}" for k, v in cond.items()))
    else:
        lines.extend(_summary_lines(doc))
    return "\n".join(lines)


def _flat_rows(doc: dict, prefix: str = "") -> list[list]:
    rows = []
    for stage, table in doc["variances"].items():
        for name, v in table.items():
            rows.append([f"{prefix}variance", stage, name, repr(v)])
    rep = doc["noise_report"]
    for name in ("N_x_label", "N_p_signal", "N_p_erased", "N_x_erased", "product"):
        if rep[name] is not None:
            rows.append([f"{prefix}noise", name, "N", repr(rep[name])])
    for name, v in rep["dB"].items():
        rows.append([f"{prefix}noise", name, "dB", repr(v)])
    for key in ("gain", "fidelity"):
        if doc.get(key) is not None:
            rows.append([f"{prefix}{key}", key, "", repr(doc[key])])
    return rows


def to_csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if doc["experiment"] == "sweep":
        cols = ["squeeze_dB", "N_x_label", "N_p_signal", "N_p_erased"]
        w.writerow(cols)
        for r in doc["rows"]:
            w.writerow([repr(r[c]) for c in cols])
        return buf.getvalue()
    w.writerow(["kind", "stage", "quantity", "value"])
    if doc["experiment"] == "delayed-choice":
        for basis, sub in doc["bases"].items():
            w.writerows(_flat_rows(sub, f"{basis}:"))
    else:
        w.writerows(_flat_rows(doc))
    return buf.getvalue()


def _prefix(args, scn: Scenario) -> Path:
    if args.out:
        return Path(args.out)
    if scn.output:
        return Path(scn.output)
    return Path(args.config).with_suffix("")


def _emit(text: str, quiet: bool) -> None:
    if not quiet:
        print(text)


def cmd_run(args) -> int:
    scn = load_scenario(args.config)
    doc = run_scenario(scn)
    prefix = _prefix(args, scn)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.json").write_text(json.dumps(doc, indent=2) + "\n")
    Path(f"{prefix}.csv").write_text(to_csv(doc))
    _emit(summarize(doc), args.quiet)
    log.info("wrote %s.json and %s.csv", prefix, prefix)
    return EXIT_OK


def _validation_jobs(scn: Scenario):
    """(label, state, combinations) for every stage state of the scenario."""
    p = scn.params
    if scn.experiment == "sweep":
        results = [run_erasure_electronic(replace(p, marker_squeeze_dB=float(dB))) for dB in scn.sweep]
    elif scn.experiment == "delayed-choice":
        results = [run_delayed_choice(p, b) for b in ("amplitude", "phase")]
    else:
        results = [
            {
                "qnd": run_qnd_stage,
                "erase-electronic": run_erasure_electronic,
                "erase-feedforward": run_erasure_feedforward,
            }[scn.experiment](p)
        ]
    jobs = []
    for k, res in enumerate(results):
        for stage, state in res.states.items():
            combos = {}
            if stage == "detected" and res.gain is not None:
                combos["p_c"] = [(P_S, 1.0), (P_M, -res.gain)]
            jobs.append((f"{k}:{stage}", state, combos))
    return jobs


def _corrupted(state: GaussianState) -> GaussianState:
    return GaussianState(state.mean, 1.1 * state.cov)


def cmd_validate(args) -> int:
    if args.n < MIN_N:
        print(f"error: --n must be at least {MIN_N}", file=sys.stderr)
        return EXIT_CONFIG
    scn = load_scenario(args.config)
    seed = args.seed if args.seed is not None else (scn.seed or 0)
    ok = True
    for idx, (label, state, combos) in enumerate(_validation_jobs(scn)):
        addresses = [QuadratureAddress(m, th) for m in range(state.n_modes) for th in (0.0, 1.5707963267948966)]
        ref = _corrupted(state) if args.corrupt else None
        rep = validate_against_analytic(state, addresses, args.n, seed + idx, args.z, combos, ref)
        ok &= rep.passed
        _emit(f"{label:<24} entries={len(rep.entries):>3} max|z|={rep.max_abs_z:6.2f} {'PASS' if rep.passed else 'FAIL'}", args.quiet)
        for e in rep.entries:
            if not e.passed:
                _emit(f"    {e.name}: analytic={e.analytic:.6g} empirical={e.empirical:.6g} z={e.z:.2f}", args.quiet)
    return EXIT_OK if ok else EXIT_ORACLE


def contour_csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["panel", "center_x", "center_p", "semi_major", "semi_minor", "orientation"])
    for panel, c in doc["contours"].items():
        w.writerow([panel, *map(repr, c["center"]), *map(repr, c["semi_axes"]), repr(c["orientation"])])
    return buf.getvalue()


def cmd_contours(args) -> int:
    scn = load_scenario(args.config)
    if scn.experiment != "erase-feedforward":
        raise ConfigError("contours needs an erase-feedforward scenario")
    if not 0 < args.level < 1:
        raise ConfigError("--level must lie in (0, 1)")
    doc = run_erasure_feedforward(scn.params, level=args.level).to_dict()
    text = contour_csv(doc)
    prefix = _prefix(args, scn)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.contours.csv").write_text(text)
    _emit(text.rstrip("\n"), args.quiet)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cverase", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="scenario JSON file")
        sp.add_argument("--out", help="output path prefix (overrides the scenario's 'output')")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--quiet", action="store_true")

    common(sub.add_parser("run", help="run a scenario, write <prefix>.json and <prefix>.csv"))
    v = sub.add_parser("validate", help="check analytic variances against Monte-Carlo samples")
    common(v)
    v.add_argument("--n", type=int, default=DEFAULT_N, help="samples per stage")
    v.add_argument("--z", type=float, default=DEFAULT_Z, help="z-score threshold")
    v.add_argument("--corrupt", action="store_true", help="debug: compare against a covariance inflated by 10%%")
    c = sub.add_parser("contours", help="Wigner contour ellipses of a feed-forward scenario")
    common(c)
    c.add_argument("--level", type=float, default=DEFAULT_LEVEL, help="contour level as a fraction of the peak")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    handler = {"run": cmd_run, "validate": cmd_validate, "contours": cmd_contours}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PhysicalityError as exc:
        print(f"physicality violation: {exc}", file=sys.stderr)
        return EXIT_PHYSICAL
    except ValueError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
