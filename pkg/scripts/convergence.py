"""Depth and decomposition-order convergence of steady and transient observables.

    python3 scripts/convergence.py --depths 2 4 6 8 --terms 1 2 3
"""

import argparse

from deomlab.hierarchy import convergence_report
from deomlab.model import ModelConfig, build_model


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depths", type=int, nargs="+", default=[4, 6, 8])
    ap.add_argument("--terms", type=int, nargs="*", default=[])
    ap.add_argument("--times", type=float, nargs="*", default=[], help="sample times in fs")
    ap.add_argument("--eta", type=float, default=1.0)
    ap.add_argument("--backend", default="deom")
    args = ap.parse_args()

    m = build_model(ModelConfig(eta=args.eta))
    rows = convergence_report(m, depths=args.depths, scheme_terms=args.terms, backend=args.backend, times_fs=args.times)
    print(f"{'parameter':10s} {'a':>3s} {'b':>3s}  {'observable':22s} {'difference':>12s} {'relative':>12s}")
    for r in rows:
        print(f"{r.parameter:10s} {r.a:>3} {r.b:>3}  {r.observable:22s} {r.difference:12.3e} {r.relative:12.3e}")


if __name__ == "__main__":
    main()
