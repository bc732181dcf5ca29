"""Lowest eigenvalues across cutoffs: stable for the displaced oscillator, drifting for H3."""
import argparse
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from fockbench import models
from fockbench.verify import spectrum_drift


@dataclass
class DriftConfig:
    cutoffs: tuple = (8, 12, 16, 20)
    k: int = 3
    out: Path = Path("results/spectrum")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--cutoffs", default=",".join(map(str, DriftConfig.cutoffs)))
    p.add_argument("--k", type=int, default=DriftConfig.k)
    p.add_argument("--out", type=Path, default=DriftConfig.out)
    args = p.parse_args()
    cfg = DriftConfig(tuple(int(c) for c in args.cutoffs.split(",")), args.k, args.out)
    cfg.out.mkdir(parents=True, exist_ok=True)
    cases = {
        "oscillator": models.build_boson_model(1, np.ones((1, 1)), V1=np.array([0.2]), name="oscillator"),
        "h3": models.build_toy("H3"),
    }
    for name, model in cases.items():
        rows = spectrum_drift(model, cfg.cutoffs, cfg.k)
        with open(cfg.out / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n_max", "level", "eigenvalue", "drift"])
            for row in rows:
                for lvl, e in enumerate(row.eigenvalues):
                    w.writerow([row.n_max, lvl, repr(e), "" if row.drift is None else repr(row.drift[lvl])])
        e0 = [r.eigenvalues[0] for r in rows]
        print(name, " ".join(f"E0({c})={e:.6f}" for c, e in zip(cfg.cutoffs, e0)))


if __name__ == "__main__":
    main()
