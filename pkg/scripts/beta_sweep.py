#!/usr/bin/env python3
"""Sweep the noise level and report certified sizes for fixed bounds.

The certified size is not monotone in beta: more noise widens the
probability gap the certificate can exploit but also degrades how
often the base classifier is right, which shows up here as the fixed
(pA, pB) pair applying to every beta.  This script isolates the first
effect by holding the bounds constant.
"""

import argparse
from fractions import Fraction

import sys
import os

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from bincert.certify import certified_perturbation_size
from bincert.numerics import EXACT, FLOAT


def parse_beta(text: str) -> Fraction:
    return Fraction(text)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=64)
    parser.add_argument("--pa", default="0.9")
    parser.add_argument("--pb", default="0.05")
    parser.add_argument("--betas",
                        default="0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95")
    parser.add_argument("--backend", choices=["exact", "float"],
                        default="exact")
    args = parser.parse_args()

    backend = EXACT if args.backend == "exact" else FLOAT
    pa = Fraction(args.pa)
    pb = Fraction(args.pb)

    print(f"n={args.n} pA_lower={pa} pB_upper={pb} backend={backend.mode}")
    print("beta\tK\tsaturated")
    for token in args.betas.split(","):
        beta = parse_beta(token.strip())
        cert = certified_perturbation_size(
            args.n, beta, pa, pb, backend=backend)
        print(f"{token.strip()}\t{cert.k_certified}\t{cert.saturated}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
