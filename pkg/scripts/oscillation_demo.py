"""|phi(exp(i t s(xi)))| for a U_t-fixed unit vector, across q and the truncation level.

At q = 0 the law of s(xi) is the standard semicircle, whose characteristic
function is J_1(2t)/t; the table shows how far the truncated model tracks it.

    python scripts/oscillation_demo.py --levels 4 6 8 --t 0.5 1 2 5
"""

import argparse

from scipy.special import j1

from mixedq.model import ModelSpec, build_model
from mixedq.probability import oscillation_probe


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, nargs="+", default=[4, 6, 8])
    ap.add_argument("--q", type=float, nargs="+", default=[-0.5, 0.0, 0.5])
    ap.add_argument("--t", type=float, nargs="+", default=[0.5, 1.0, 2.0, 5.0])
    args = ap.parse_args()

    print("q,level,t,abs_phi,semicircle")
    for q in args.q:
        for n in args.levels:
            m = build_model(ModelSpec.create([1], [[q]], level=n))
            for t, v in zip(args.t, oscillation_probe(m, [1.0], args.t)):
                ref = f"{abs(j1(2 * t) / t):.6f}" if q == 0 else ""
                print(f"{q:+.2f},{n},{t:g},{v:.6f},{ref}")


if __name__ == "__main__":
    main()
