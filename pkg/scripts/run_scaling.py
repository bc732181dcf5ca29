"""Compliance values gamma(n) and fitted slopes for the toy models and the boson preset.

Writes one CSV per model plus a summary table to the output directory.
"""
import argparse
import csv
import time
from dataclasses import dataclass
from pathlib import Path

from fockbench import models
from fockbench.fock import FockSpace
from fockbench.opdsl import compile_model
from fockbench.verify import compliance_gamma


@dataclass
class ScalingConfig:
    n_lo: int = 4
    n_hi: int = 24
    K: int = 64
    out: Path = Path("results/scaling")


CASES = {
    "h3": lambda cfg: models.build_toy("H3"),
    "hdaa": lambda cfg: models.build_toy("Hdaa", cfg.K),
    "hda": lambda cfg: models.build_toy("Hda", cfg.K),
    "boson": lambda cfg: models.boson_preset(d=4),
    "boson-quartic": lambda cfg: models.boson_preset(d=4, quartic=True),
}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-lo", type=int, default=ScalingConfig.n_lo)
    p.add_argument("--n-hi", type=int, default=ScalingConfig.n_hi)
    p.add_argument("--K", type=int, default=ScalingConfig.K)
    p.add_argument("--out", type=Path, default=ScalingConfig.out)
    cfg = ScalingConfig(**vars(p.parse_args()))
    cfg.out.mkdir(parents=True, exist_ok=True)
    summary = []
    for name, make in CASES.items():
        model = make(cfg)
        t0 = time.perf_counter()
        probe = FockSpace(model.d, 4)
        band = max(compile_model(model, probe).HI.bandwidth, 1)
        space = FockSpace(model.d, cfg.n_hi + band)
        variant = "quartic" if name.endswith("quartic") else "quadratic"
        rep = compliance_gamma(model, space, range(cfg.n_lo, cfg.n_hi + 1), variant)
        (cfg.out / f"{name}.csv").write_text(rep.to_csv())
        summary.append((name, variant, rep.slope, rep.residual, rep.verdict, time.perf_counter() - t0))
        print(f"{name:14s} slope={rep.slope:+.3f} verdict={rep.verdict} ({summary[-1][-1]:.1f}s)")
    with open(cfg.out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "variant", "slope", "residual", "verdict", "seconds"])
        w.writerows(summary)


if __name__ == "__main__":
    main()
