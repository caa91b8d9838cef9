"""Current-voltage scans over the release rate for several backends.

    python3 scripts/iv_scan.py --out runs/iv --backends lindblad deom --depth 4
"""

import argparse
import os
import time

from deomlab.cli import IV_HEADER, write_csv
from deomlab.hierarchy import EngineOptions
from deomlab.model import ModelConfig
from deomlab.observables import DEFAULT_GAMMAS, iv_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/iv")
    ap.add_argument("--backends", nargs="+", default=["lindblad", "deom"])
    ap.add_argument("--depth", type=int, default=6)
    ap.add_argument("--eta", type=float, default=1.0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    for backend in args.backends:
        t0 = time.perf_counter()
        scan = iv_scan(ModelConfig(eta=args.eta), DEFAULT_GAMMAS, EngineOptions(backend=backend, depth=args.depth), args.workers)
        rows = [
            [p.gamma, p.rho_dd, p.rho_ee, p.current, p.voltage, p.voltage_eV, p.conductivity, "; ".join(p.warnings)]
            for p in scan.points
        ]
        path = os.path.join(args.out, f"iv_{backend}.csv")
        write_csv(path, IV_HEADER, rows)
        regions = scan.negative_conductivity_regions()
        ranges = [(scan.points[i].gamma, scan.points[j - 1].gamma) for i, j in regions]
        print(f"{backend:15s} {time.perf_counter() - t0:6.1f} s  negative dj/dPhi over Gamma ranges {ranges}  -> {path}")


if __name__ == "__main__":
    main()
