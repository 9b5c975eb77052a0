"""Compare the compiled (numba) and pure-numpy kernel backends.

Times every kernel on a few matrix shapes and checks that both backends return
bit-identical results, then times a full EM fit under each backend in a fresh
interpreter (the backend is fixed at import time by PRIORSHIFT_DISABLE_NUMBA).

    python3 benchmarks/bench_kernels.py [--repeat R] [--rows N ...] [--classes K]
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from priorshift import _kernels

EM_SNIPPET = """
import json, math, time
from priorshift import BACKEND
from priorshift.core import compute_ratios
from priorshift.estimation import EstimatorConfig, estimate_em
from priorshift.synthesis import make_model, prior_from_family, sample_testset
model = make_model({k}, {m}, 0.7, 0, "exp", math.log(100))
post, _ = sample_testset(model, prior_from_family("exp", {k}, -math.log(100)), {n}, 1)
ratios = compute_ratios(post, model.train_prior)
cfg = EstimatorConfig(max_iterations=200, tol=1e-300)
estimate_em(ratios[:10], cfg, model.train_prior)
t = time.perf_counter()
est, trace = estimate_em(ratios, cfg, model.train_prior)
print(json.dumps(dict(backend=BACKEND, seconds=time.perf_counter() - t,
                      iterations=trace.n_iterations, estimate=est.tolist())))
"""


def time_call(fn, args, repeat):
    fn(*args)
    number = max(1, int(0.05 / max(timeit.timeit(lambda: fn(*args), number=1), 1e-7)))
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def same(x, y):
    if isinstance(x, tuple):
        return all(same(u, v) for u, v in zip(x, y))
    return np.array_equal(x, y)


def kernel_table(rows, k, repeat):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'rows':>8}{'numpy [us]':>14}{'numba [us]':>14}{'speedup':>10}  identical")
    for n in rows:
        a = rng.random((n, k))
        p = rng.random(k)
        p /= p.sum()
        cases = {
            "row_dot": (a, p),
            "em_step": (a, p),
            "likelihood_gradient": (a, p),
            "reweight_rows": (a, p),
            "exact_sum": (np.log(a[:, 0] + 0.5),),
            "simplex_shift": (rng.normal(size=max(k, n // 100)),),
        }
        for name, args in cases.items():
            t_np = time_call(_kernels.NUMPY_KERNELS[name], args, repeat)
            t_nb = time_call(_kernels.NUMBA_KERNELS[name], args, repeat)
            ident = same(_kernels.NUMPY_KERNELS[name](*args), _kernels.NUMBA_KERNELS[name](*args))
            print(f"{name:<22}{n:>8}{t_np * 1e6:>14.1f}{t_nb * 1e6:>14.1f}{t_np / t_nb:>10.1f}  {ident}")


def em_comparison(n, k):
    results = []
    for disable in ("1", "0"):
        env = dict(os.environ, PRIORSHIFT_DISABLE_NUMBA=disable)
        code = EM_SNIPPET.format(k=k, m=2 * k, n=n)
        out = subprocess.run([sys.executable, "-c", code], env=env, check=True,
                             capture_output=True, text=True).stdout
        results.append(json.loads(out))
    print(f"\nEM fit, {n} rows x {k} classes, {results[0]['iterations']} iterations:")
    for r in results:
        print(f"  {r['backend']:<6} {r['seconds']:.3f}s")
    print(f"  speedup {results[0]['seconds'] / results[1]['seconds']:.1f}x, "
          f"estimates identical: {results[0]['estimate'] == results[1]['estimate']}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, nargs="+", default=[1000, 10000, 100000])
    parser.add_argument("--classes", type=int, default=10)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        parser.error("numba backend unavailable (is PRIORSHIFT_DISABLE_NUMBA set?)")
    kernel_table(args.rows, args.classes, args.repeat)
    em_comparison(args.rows[-1], args.classes)


if __name__ == "__main__":
    main()
