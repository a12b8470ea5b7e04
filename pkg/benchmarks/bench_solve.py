"""Compare the compiled and numpy batched solvers.

    python3 benchmarks/bench_solve.py [--points 1601] [--repeat 5]

Times the raw kernel on random systems and the two full sweeps that use it
(coupling-matrix engine on the 7-resonator divider, MNA on its lumped
realisation), and checks that both backends give the same answer.
"""
import argparse
import timeit

import numpy as np

from fpdsynth import linalg
from fpdsynth.circuit import coupling_to_netlist, sparams_mna
from fpdsynth.engine import build_fpd_network, sparameters
from fpdsynth.prototype import DividerSpec, plan_for


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=1601)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if "cython" not in linalg.BACKENDS:
        print("compiled extension not built; only the numpy backend is available")
        return

    rng = np.random.default_rng(0)
    _, plan = plan_for(DividerSpec(), g_digits=4)
    net = build_fpd_network(plan)
    ckt = coupling_to_netlist(net, 5e-12)
    freqs = np.linspace(2.4e9, 2.8e9, args.points)

    cases = []
    for n in (4, 7, 18, 40):
        A = rng.normal(size=(args.points, n, n)) + 1j * rng.normal(size=(args.points, n, n))
        B = rng.normal(size=(args.points, n, 4)) + 1j * rng.normal(size=(args.points, n, 4))
        cases.append((f"kernel n={n}", lambda b, A=A, B=B: linalg.solve_batched(A, B, backend=b)[0]))
    cases.append(("engine sweep (7 res.)", lambda b: (linalg.set_backend(b), sparameters(net, freqs).S)[1]))
    cases.append(("MNA sweep (18 unknowns)", lambda b: (linalg.set_backend(b), sparams_mna(ckt, freqs).S)[1]))

    print(f"{args.points} frequency points, best of {args.repeat}")
    print(f"{'case':26s} {'cython ms':>10s} {'numpy ms':>10s} {'speedup':>8s} {'max diff':>9s}")
    for name, fn in cases:
        x_c, x_n = fn("cython"), fn("numpy")
        tc = best_of(lambda: fn("cython"), args.repeat)
        tn = best_of(lambda: fn("numpy"), args.repeat)
        diff = np.abs(x_c - x_n).max()
        print(f"{name:26s} {tc * 1e3:10.2f} {tn * 1e3:10.2f} {tn / tc:7.1f}x {diff:9.1e}")
    linalg.set_backend(linalg.BACKENDS[0])


if __name__ == "__main__":
    main()
