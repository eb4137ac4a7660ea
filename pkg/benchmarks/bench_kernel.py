"""Compare the compiled and pure-Python polynomial kernels.

Runs the same workloads against both backend modules directly (kernel
micro-benchmarks), then times an end-to-end pipeline in a subprocess per
backend, since the backend is chosen once at import.

    python3 benchmarks/bench_kernel.py [--repeat N]
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

from dadj import _pykernel

try:
    from dadj import _ckernel
except ImportError:
    _ckernel = None

U = 0


def _dep(shift):
    return (4, U, "u", shift)


def random_poly(rng, terms=30, atoms=8, maxexp=3):
    keys = sorted(_dep((j, k)) for j in range(-1, 2) for k in range(-1, 2))[:atoms]
    p = {}
    for _ in range(terms):
        chosen = sorted(rng.sample(keys, rng.randint(1, 3)))
        mono = tuple((k, rng.randint(1, maxexp)) for k in chosen)
        p[mono] = p.get(mono, 0) + rng.randint(-9, 9) or 1
    return p


def workloads(mod, seed=0):
    rng = random.Random(seed)
    a, b = random_poly(rng), random_poly(rng)
    small = random_poly(rng, terms=6)
    key = _dep((0, 0))
    values = {_dep((j, k)): rng.randint(1, 9) for j in range(-1, 2) for k in range(-1, 2)}
    return {
        "poly_mul": lambda: mod.poly_mul(a, b),
        "poly_pow": lambda: mod.poly_pow(small, 4),
        "poly_shift": lambda: mod.poly_shift(a, (1, -1)),
        "poly_diff": lambda: mod.poly_diff(a, key),
        "poly_eval": lambda: mod.poly_eval(a, values),
    }


PIPELINE = """
import time
from dadj import BACKEND, parse_problem
from dadj import lattice as LC, symmetry as S, noether as N
problem = parse_problem(open({path!r}).read())
sys_ = LC.DifferenceSystem.from_problem(problem)
t = time.perf_counter()
for name in ("X1", "X2", "X3"):
    Q = problem.symmetries[name]
    Y = S.extend_characteristic(sys_, Q)
    N.noether_flux(sys_, Y)
print(BACKEND, time.perf_counter() - t)
"""


def pipeline(pure):
    env = dict(os.environ)
    if pure:
        env["DADJ_PURE_PYTHON"] = "1"
    else:
        env.pop("DADJ_PURE_PYTHON", None)
    path = os.path.join(os.path.dirname(__file__), "..", "problems", "h1.dadj")
    out = subprocess.run([sys.executable, "-c", PIPELINE.format(path=os.path.abspath(path))],
                         env=env, capture_output=True, text=True, check=True)
    backend, secs = out.stdout.split()
    return backend, float(secs)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    mods = [_pykernel] + ([_ckernel] if _ckernel else [])
    print(f"{'workload':<12}" + "".join(f"{m.BACKEND:>12}" for m in mods) + "     speedup")
    for name in workloads(_pykernel):
        times = [timeit.timeit(workloads(m)[name], number=args.repeat) / args.repeat
                 for m in mods]
        speed = f"{times[0] / times[1]:10.1f}x" if len(times) > 1 else ""
        print(f"{name:<12}" + "".join(f"{t * 1e6:10.1f}us" for t in times) + speed)
    if _ckernel is None:
        print("compiled kernel not built; only the fallback was timed")
    print("\nend-to-end: H1 extension and Noether flux for X1..X3")
    for pure in (True, False):
        backend, secs = pipeline(pure)
        print(f"  {backend:<8} {secs:.3f}s")


if __name__ == "__main__":
    main()
