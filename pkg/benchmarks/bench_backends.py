"""Compare the compiled kernel core against the NumPy fallback.

Times Gram and cross evaluation for every built-in closed form at a few
problem sizes, plus one end-to-end online game per backend.  Run with

    python benchmarks/bench_backends.py [--sizes 200,1000,3000]
"""

import argparse
import time

import numpy as np

from okreg import _pykern
from okreg.backend import CONSTANT, FERMI, SOB01, SOBR, TRIANGULAR

try:
    from okreg import _ckern
except ImportError:
    _ckern = None

CODES = [("sobolev01", SOB01, 0.0), ("fermi-sobolev", FERMI, 0.0),
         ("sobolev-r", SOBR, 0.0), ("triangular", TRIANGULAR, 1.0),
         ("constant", CONSTANT, 1.0)]


def _time(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_gram(sizes):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'n':>6}{'python':>12}{'compiled':>12}{'speedup':>9}")
    for name, code, param in CODES:
        for n in sizes:
            pts = np.ascontiguousarray(rng.uniform(0, 1, size=(n, 1)))
            t_py = _time(lambda: _pykern.gram(code, param, pts))
            if _ckern is None:
                print(f"{name:<16}{n:>6}{t_py:>12.4f}{'-':>12}{'-':>9}")
                continue
            t_c = _time(lambda: _ckern.gram(code, param, pts))
            a = _pykern.gram(code, param, pts)
            b = _ckern.gram(code, param, pts)
            assert np.allclose(a, b, rtol=0, atol=1e-14), name
            print(f"{name:<16}{n:>6}{t_py:>12.4f}{t_c:>12.4f}{t_py / t_c:>9.1f}x")


def bench_game(n_rounds):
    import os
    import subprocess
    import sys

    code = (f"import time, okreg\nfrom okreg import harness\n"
            f"t0=time.perf_counter()\n"
            f"t=harness.run_mixed_game('aln','fermi-sobolev',1.0,{n_rounds},seed=0)\n"
            f"print(f'{{\"compiled\" if okreg.COMPILED else \"python\"}}: "
            f"{{time.perf_counter()-t0:.3f}}s cumloss={{t.cumloss:.6f}}')")
    for backend in ("python", "compiled" if _ckern is not None else None):
        if backend is None:
            continue
        env = dict(os.environ, OKREG_BACKEND=backend)
        sys.stdout.flush()
        subprocess.run([sys.executable, "-c", code], env=env, check=True)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="200,1000,3000")
    ap.add_argument("--game-rounds", type=int, default=500)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    if _ckern is None:
        print("compiled extension not available; timing the fallback only")
    bench_gram(sizes)
    print(f"\nfull game, {args.game_rounds} rounds, per backend:")
    bench_game(args.game_rounds)


if __name__ == "__main__":
    main()
