"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--resolutions 500 2000 4000]
"""

import argparse
import timeit

import numpy as np

from nldistill import _fallback
from nldistill.optimize import grid_axes

try:
    from nldistill import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--resolutions", type=int, nargs="+", default=[500, 2000, 4000])
    ap.add_argument("--batch", type=int, nargs="+", default=[1000, 100_000])
    args = ap.parse_args()

    backends = {"python": _fallback}
    if _kernels is not None:
        backends["cython"] = _kernels
    else:
        print("compiled extension not available; timing the fallback only")

    print(f"{'kernel':<12}{'size':>12}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for res in args.resolutions:
        eta, gamma = grid_axes(res)
        times = [best_of(lambda m=m: m.grid_scan(eta, gamma, 1e-9, 1), args.repeat) for m in backends.values()]
        results = {name: m.grid_scan(eta, gamma, 1e-9, 1)[:2] for name, m in backends.items()}
        assert len(set(results.values())) == 1, results
        _row("grid_scan", f"{res}x{res}", times)

    rng = np.random.default_rng(0)
    for n in args.batch:
        tables = rng.dirichlet(np.ones(4), size=(n, 4))
        times = [best_of(lambda m=m: m.batch_chsh(tables), args.repeat) for m in backends.values()]
        _row("batch_chsh", str(n), times)


def _row(name, size, times):
    speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else ""
    print(f"{name:<12}{size:>12}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
