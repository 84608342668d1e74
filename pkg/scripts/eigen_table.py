"""Print the first Neumann eigenvalues for each weight family."""
import argparse

from mcshoot import WeightFunction, spectrum

WEIGHTS = {
    "constant a=1": WeightFunction.constant(1.0),
    "affine 1+x": WeightFunction.affine(1.0, 1.0),
    "exponential e^-x": WeightFunction.exponential(1.0, -1.0),
    "cosine 1+0.5cos(2pi x)": WeightFunction.cosine(1.0, 0.5),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=5)
    args = ap.parse_args()
    print("weight".ljust(26) + "".join(f"lambda_{k}".rjust(16) for k in range(1, args.k + 1)))
    for name, a in WEIGHTS.items():
        print(name.ljust(26) + "".join(f"{r.lambda_k:16.8f}" for r in spectrum(a, args.k)))


if __name__ == "__main__":
    main()
