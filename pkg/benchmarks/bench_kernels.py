"""Time one training epoch per variant with the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--samples 2000] [--features 2] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from rejectlab import _kernels_py, kernels


def _case(rng, n_samples, n_features, per_class, local):
    X = rng.standard_normal((n_samples, n_features))
    y = rng.integers(1, 3, n_samples).astype(np.int64)
    J = 2 * per_class
    W = rng.standard_normal((J, n_features))
    wl = np.repeat([1, 2], per_class).astype(np.int64)
    n_om = J if local else 1
    O = np.repeat((np.eye(n_features) / np.sqrt(n_features))[None], n_om, axis=0)
    idx = np.arange(J, dtype=np.int64) if local else np.zeros(J, dtype=np.int64)
    order = rng.permutation(n_samples).astype(np.int64)
    return X, y, order, W, wl, O, idx


def _epoch(mod, variant, case):
    X, y, order, W, wl, O, idx = case
    W, O = W.copy(), O.copy()
    if variant == "rslvq":
        return lambda: mod.rslvq_epoch(X, y, order, W, wl, 1.0, 1e-3)
    learn = variant != "glvq"
    return lambda: mod.glvq_epoch(X, y, order, W, wl, O, idx, 1e-3, 1e-4, learn)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--features", type=int, default=2)
    ap.add_argument("--prototypes-per-class", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = [("python", _kernels_py)]
    if kernels.compiled_available():
        from rejectlab import _kernels

        backends.insert(0, ("cython", _kernels))
    else:
        print("compiled kernels not built; timing the Python fallback only")

    rng = np.random.default_rng(0)
    print(f"{args.samples} samples, {args.features} features, {args.prototypes_per_class} prototype(s) per class")
    print(f"{'variant':<8}" + "".join(f"{name + ' ms/epoch':>20}" for name, _ in backends) + f"{'speed-up':>10}")
    for variant in ("glvq", "gmlvq", "lgmlvq", "rslvq"):
        case = _case(rng, args.samples, args.features, args.prototypes_per_class, variant == "lgmlvq")
        times = []
        for _, mod in backends:
            fn = _epoch(mod, variant, case)
            times.append(min(timeit.repeat(fn, number=1, repeat=args.repeat)) * 1e3)
        row = f"{variant:<8}" + "".join(f"{t:>20.2f}" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:>9.0f}x"
        print(row)


if __name__ == "__main__":
    main()
