"""Tabulate hierarchy members generated by the factored recursion operators.

For each member the table lists term count, maximal jet order and the time to
generate it, and certifies the meta-mKdV member numerically on random matrix
solitons.
"""

import argparse
import time

from nckdv.opcalc import hierarchy_rhs
from nckdv.solitonlab import SolitonParams, hierarchy_residual, sample_points


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=3)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--points", type=int, default=10)
    ap.add_argument("--show", action="store_true", help="print the polynomials too")
    args = ap.parse_args()

    params = SolitonParams.random(args.dim, args.seed, N=args.max_n)
    points = sample_points(params, args.points, args.seed)
    print(f"{'eq':6s} {'n':>2s} {'terms':>6s} {'order':>5s} {'secs':>7s} {'soliton residual':>17s}")
    for eq in ("meta", "mkdv"):
        for n in range(1, args.max_n + 1):
            start = time.perf_counter()
            rhs = hierarchy_rhs(eq, n)
            secs = time.perf_counter() - start
            residual = hierarchy_residual(params, n, points).details["meta" if eq == "meta" else "mkdv"]
            print(f"{eq:6s} {n:2d} {len(rhs):6d} {rhs.max_order():5d} {secs:7.3f} {residual:17.2e}")
            if args.show:
                print(f"    {rhs}")


if __name__ == "__main__":
    main()
