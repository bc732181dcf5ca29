"""Sample every model inequality on all interior sectors and tabulate the worst ratios."""
import argparse
import csv
import time
from dataclasses import dataclass
from pathlib import Path

from fockbench import models
from fockbench.fock import FockSpace
from fockbench.opdsl import compile_model
from fockbench.verify import sample_all_sectors


@dataclass
class BoundsConfig:
    n_max: int = 12
    samples: int = 1000
    seed: int = 42
    out: Path = Path("results/bounds")


CASES = (
    ("boson", lambda: models.boson_preset(d=4), ("eq35", "eq36")),
    ("boson-quartic", lambda: models.boson_preset(d=4, quartic=True), ("eq35",)),
    ("nelson", lambda: models.nelson_preset(L=8, d=8), ("eq13",)),
    ("pauli-fierz", lambda: models.build_pauli_fierz(M=4), ("eq33",)),
)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-max", type=int, default=BoundsConfig.n_max)
    p.add_argument("--samples", type=int, default=BoundsConfig.samples)
    p.add_argument("--seed", type=int, default=BoundsConfig.seed)
    p.add_argument("--out", type=Path, default=BoundsConfig.out)
    cfg = BoundsConfig(**vars(p.parse_args()))
    cfg.out.mkdir(parents=True, exist_ok=True)
    with open(cfg.out / "bounds.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "bound", "n", "samples", "max_ratio", "max_ratio_aligned", "violations"])
        for name, make, bounds in CASES:
            model = make()
            space = FockSpace(model.d, cfg.n_max)
            comp = compile_model(model, space)
            for bound in bounds:
                t0 = time.perf_counter()
                res = sample_all_sectors(model, bound, cfg.n_max, cfg.samples, cfg.seed, space=space, compiled=comp)
                for r in res:
                    w.writerow([name, bound, r.n, r.samples, repr(r.max_ratio), repr(r.max_ratio_aligned), r.violations])
                print(f"{name:14s} {bound} worst={max(r.max_ratio_aligned for r in res):.3f} "
                      f"violations={sum(r.violations for r in res)} ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
