"""Tabulate fibre-ray lengths: quadrature, Beta-function closed form and integrated geodesics."""

import argparse

import numpy as np

from tangentkahler import calculus as cc
from tangentkahler import spaceform as sf
from tangentkahler import tangent_geometry as tg
from tangentkahler.experiments import ray_length_closed_form, ray_length_quadrature


def geodesic_length(K, c1, c2, R):
    model = sf.SpaceFormModel(K, 2)
    W = tg.weights_kahler(K, c1, c2)
    p0 = tg.tangent_point(model, np.zeros(2), np.zeros(2))
    G = tg.metric_field(model, W)(p0.z)
    v0 = np.array([0.0, 0.0, 1.0, 0.0])
    v0 /= np.sqrt(v0 @ G @ v0)
    T = 1.5 * ray_length_quadrature(K, c1, R, c2)
    res = cc.geodesic_integrate(model, W, p0, v0, T, stop_radius=R, boundary_fraction=1 - 1e-9)
    return res.arclength


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c2", type=float, default=1.0)
    args = ap.parse_args()

    print(f"{'K':>5} {'c1':>5} {'R':>9} {'quadrature':>14} {'closed form':>14} {'geodesic':>14}")
    for K, c1 in [(-1.0, 1.0), (-1.0, 4.0), (-4.0, 1.0)]:
        r0 = tg.kahler_radius(K, c1)
        R = r0 * (1 - 1e-9)
        print(f"{K:5g} {c1:5g} {R:9.4f} {ray_length_quadrature(K, c1, R, args.c2):14.9f} "
              f"{ray_length_closed_form(K, c1, args.c2):14.9f} {geodesic_length(K, c1, args.c2, R):14.9f}")
    for R in (1.0, 10.0, 30.0, 100.0):
        print(f"{1:5g} {1:5g} {R:9.4f} {ray_length_quadrature(1.0, 1.0, R, args.c2):14.9f} "
              f"{'inf':>14} {geodesic_length(1.0, 1.0, args.c2, R):14.9f}")


if __name__ == "__main__":
    main()
