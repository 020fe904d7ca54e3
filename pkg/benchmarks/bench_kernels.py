"""Compare the compiled kernels with the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--json]

Both backends are imported directly, so the environment switch that picks
the runtime backend has no effect here.
"""
import argparse
import json
import timeit

import numpy as np

from wild_euler import _pykernels

try:
    from wild_euler import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _cases(rng):
    F = rng.standard_normal((129, 128, 65))
    a, b, c = rng.standard_normal(129), rng.standard_normal(128), rng.standard_normal(65)
    box = F[20:90, :, 10:50]  # strided view, as the weak-form assembly uses
    n = (129, 128, 65)
    rho = rng.uniform(0.5, 2.0, n)
    mr, mz, u, w = rng.standard_normal((4,) + n)
    return {
        "contract3 129x128x65": lambda k: k.contract3(F, a, b, c),
        "contract3 strided box": lambda k: k.contract3(box, a[20:90], b, c[10:50]),
        "energy_field 129x128x65": lambda k: k.energy_field(rho, mr, mz, u, w),
    }


def run(repeat=5, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for name, fn in _cases(rng).items():
        t_py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=repeat))
        row = {"kernel": name, "numpy_s": t_py}
        if _ckernels is not None:
            t_c = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=repeat))
            ref, got = np.asarray(fn(_pykernels)), np.asarray(fn(_ckernels))
            scale = max(1.0, float(np.max(np.abs(ref))))
            row.update({"cython_s": t_c, "speedup": t_py / t_c,
                        "max_rel_diff": float(np.max(np.abs(ref - got))) / scale})
        rows.append(row)
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    args = p.parse_args(argv)
    rows = run(args.repeat, args.seed)
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    if _ckernels is None:
        print("compiled extension not built; timing the numpy fallback only")
    for r in rows:
        line = f"{r['kernel']:26s} numpy {r['numpy_s'] * 1e3:8.2f} ms"
        if "cython_s" in r:
            line += (f"  cython {r['cython_s'] * 1e3:8.2f} ms  x{r['speedup']:5.2f}"
                     f"  diff {r['max_rel_diff']:.1e}")
        print(line)


if __name__ == "__main__":
    main()
