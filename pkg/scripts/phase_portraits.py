"""Level sets of the autonomous Hamiltonian for a few weights, as gnuplot-ready polylines."""
import argparse
from pathlib import Path

from mcshoot import Nonlinearity, orbit_period, phase_portrait
from mcshoot.phase import write_polylines


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--p", type=float, default=3)
    ap.add_argument("--weights", type=float, nargs="+", default=[1.0, 5.0])
    ap.add_argument("--levels", type=float, nargs="+", default=[0.05, 0.15, 0.25, 0.6, 1.05])
    ap.add_argument("--out", default="phase_out")
    args = ap.parse_args()

    nl = Nonlinearity.prototype(args.lam, args.p)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for a in args.weights:
        pp = phase_portrait(a, nl, args.levels)
        print(f"a={a:g}: aF(0)={pp.homoclinic_value:.4f}, homoclinic orbit {'exists' if pp.homoclinic_exists else 'absent'}")
        for h, curves in zip(pp.h_levels, pp.curves):
            write_polylines(out / f"a{a:g}_h{h:g}.txt", curves)
            print(f"  h={h:<6g} components={len(curves)}")
        print(f"  small-orbit period (amplitude 1e-3): {orbit_period(a, nl, 1e-3):.6f}")
    print(f"wrote {out}/")


if __name__ == "__main__":
    main()
