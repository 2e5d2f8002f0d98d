"""Centralizer residual of s(xi_theta), xi_theta = cos(theta) e_fixed + sin(theta) e_rot,
in a two-dimensional rotation block plus one fixed axis.

At theta = 0 the field lies in the centralizer of the vacuum state; the residual
max_y |phi(x y) - phi(y x)| over the sample family grows with the rotating part.

    python scripts/centralizer_angle.py --lam 2 --steps 7
"""

import argparse

import numpy as np

from mixedq.model import ModelSpec, build_model
from mixedq.ops import field_s
from mixedq.probability import run_probe, sample_family


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lam", type=float, default=2.0)
    ap.add_argument("--q", type=float, default=0.4)
    ap.add_argument("--level", type=int, default=4)
    ap.add_argument("--steps", type=int, default=7)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    m = build_model(ModelSpec.create([3], [[args.q]], [(0, (0, 1), args.lam)], level=args.level))
    samples = sample_family(m, np.random.default_rng(args.seed), max_length=2, n_random=20)
    print("theta,max_residual,mean_residual")
    for theta in np.linspace(0, np.pi / 2, args.steps):
        xi = np.cos(theta) * m.basis_vector(2) + np.sin(theta) * m.basis_vector(0)
        probe = run_probe(m, field_s(m, xi), samples)
        print(f"{theta:.4f},{probe.max:.3e},{probe.mean:.3e}")


if __name__ == "__main__":
    main()
