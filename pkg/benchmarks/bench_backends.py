"""Wall time of the compiled backend against the numpy fallback.

    python3 benchmarks/bench_backends.py [--repeat 3] [--out bench.csv]

Times the two kernels behind the fast path (Gaussian cell sums and the
folded spectral autocorrelation) and one end-to-end ``k_fast`` call, on
the same inputs for each backend, and reports the best of ``--repeat``.
"""
from __future__ import annotations

import argparse
import csv
import sys
import time

from ktfr import (Preset, _backend, default_base, k_fast, preset_params,
                  residual_smooth_sample, smoothed_pwvd)
from ktfr.signal import random_analytic


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(n: int):
    x = random_analytic(n, 0)
    grid = preset_params(Preset("scalogram"), n, n)
    base = default_base(grid)
    bt = smoothed_pwvd(x, base)
    return {
        "smoothed_pwvd": lambda: smoothed_pwvd(x, base),
        "k_fast": lambda: k_fast(x, grid, base),
        "residual_smooth_sample": lambda: residual_smooth_sample(bt, base, grid),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="128,256,512")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--out")
    a = ap.parse_args(argv)
    if not _backend.compiled_available():
        print("compiled backend not built; nothing to compare", file=sys.stderr)
        return 1
    rows = []
    for n in (int(v) for v in a.sizes.split(",")):
        for name, fn in cases(n).items():
            t = {}
            for backend in ("compiled", "python"):
                _backend.use(backend)
                fn()  # warm caches
                t[backend] = best_time(fn, a.repeat)
            _backend.use("auto")
            rows.append({"n": n, "case": name, "compiled_s": t["compiled"],
                         "python_s": t["python"], "speedup": t["python"] / t["compiled"]})
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: f"{v:.4g}" if isinstance(v, float) else v for k, v in r.items()})
    if a.out:
        with open(a.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    print(f"# threads={_backend.threads()}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
