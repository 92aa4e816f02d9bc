"""Regenerate the figure data (Fig. 2, 3, 4 and the delayed-choice run).

Runs every committed scenario through the CLI driver, writes JSON/CSV under
``results/`` and prints model values next to the reported measurements.

    python3 scripts/reproduce_figures.py [--out results]
"""

import argparse
import json
from pathlib import Path

from cverase import cli
from cverase.protocol import PAPER_N_P_RESTORED, PAPER_N_P_SIGNAL, PAPER_N_X_LABEL, PAPER_N_X_RESTORED

ROOT = Path(__file__).resolve().parent.parent
REPORTED_FIDELITY = 0.68
SCENARIOS = ("paper-fig2", "paper-fig3", "paper-fig4", "delayed-choice")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(ROOT / "results"))
    args = ap.parse_args()

    docs = {}
    for name in SCENARIOS:
        prefix = Path(args.out) / name
        code = cli.main(["run", "--config", str(ROOT / "scenarios" / f"{name}.json"), "--out", str(prefix), "--quiet"])
        if code:
            raise SystemExit(f"{name}: exit {code}")
        docs[name] = json.loads(Path(f"{prefix}.json").read_text())
        print(f"\n== {name} ({prefix}.json)")
        print(cli.summarize(docs[name]))
    cfg = str(ROOT / "scenarios" / "paper-fig4.json")
    cli.main(["contours", "--config", cfg, "--out", str(Path(args.out) / "paper-fig4"), "--quiet"])

    fig2 = docs["paper-fig2"]["noise_report"]
    fig4 = docs["paper-fig4"]
    print("\n== model vs reported")
    rows = [
        ("N_x_label", fig2["N_x_label"], PAPER_N_X_LABEL),
        ("N_p_signal", fig2["N_p_signal"], PAPER_N_P_SIGNAL),
        ("N_x restored", fig4["noise_report"]["N_x_erased"], PAPER_N_X_RESTORED),
        ("N_p restored", fig4["noise_report"]["N_p_erased"], PAPER_N_P_RESTORED),
        ("fidelity", fig4["fidelity"], REPORTED_FIDELITY),
    ]
    for name, model, reported in rows:
        print(f"{name:<14} model={model:9.3f} reported={reported:9.3f}")


if __name__ == "__main__":
    main()
