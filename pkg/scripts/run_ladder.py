"""Track one solution family along the n-ladder and write the limit profile.

Examples:
    python3 scripts/run_ladder.py --lam 1.5            # classical regime
    python3 scripts/run_ladder.py --lam 2.5 --m 13     # jump regime
"""
import argparse
import json
from pathlib import Path

import numpy as np

from mcshoot import Nonlinearity, Problem, RegularizedOperator, WeightFunction, compute_limit, dyadic_ladder


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--lam", type=float, default=2.5)
    ap.add_argument("--p", type=float, default=11)
    ap.add_argument("--j", type=int, default=1)
    ap.add_argument("--side", choices=["below", "above"], default="below")
    ap.add_argument("--m", type=int, default=10, help="ladder is 2, 4, ..., 2^m")
    ap.add_argument("--out", default="ladder_out")
    args = ap.parse_args()
    if args.m < 3:
        ap.error("the limit needs at least three rungs (--m >= 3)")

    pb = Problem(WeightFunction.constant(1.0), Nonlinearity.prototype(args.lam, args.p))
    r = compute_limit(pb, args.j, args.side, dyadic_ladder(args.m), early_stop=False)
    print(f"{'n':>6} {'d':>20} {'max|v_n|':>12} {'sup|u_n_prime|':>16}")
    for n, s in r.ladder:
        if s is None:
            print(f"{n:>6}  (lost)")
            continue
        v = s.trajectory.v
        du = np.abs(RegularizedOperator(n).phi_inv(v)).max()
        print(f"{n:>6} {s.d:20.15f} {np.abs(v).max():12.8f} {du:16.6g}")
    print(json.dumps(r.report(), indent=1))
    r.write(Path(args.out))
    print(f"wrote {args.out}/")


if __name__ == "__main__":
    main()
