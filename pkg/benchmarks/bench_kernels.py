"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Times the two hot kernels on identical inputs: multiplicative-update
sweeps (``mu_run``) and fraction-free integer rank (``int_rank``), and
checks that both backends return the same answers. The compiled update
loop wins on desk-scale matrices, where per-call overhead dominates; on
larger ones numpy's BLAS-backed products catch up.
"""

import argparse
import time

import numpy as np

from nmfid import corpus, kernels


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _mu_case(M, N, R, sweeps):
    def bench(backend, repeat):
        rng = np.random.default_rng(0)
        S = rng.random((M, R)) @ rng.random((R, N))
        W0, H0 = 1.0 - rng.random((M, R)), 1.0 - rng.random((R, N))
        k = kernels.get_backend(backend)
        return _time(lambda: k.mu_run(S, W0.copy(), H0.copy(), sweeps, 1e-12, 0.0), repeat)
    return bench


def bench_rank(backend, repeat):
    S, _, _ = corpus.swimmer(with_body=False)
    rows = [[int(x) for x in row] for row in S[:, :128]]
    k = kernels.get_backend(backend)
    return _time(lambda: k.int_rank(rows), repeat)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    try:
        kernels.get_backend("compiled")
        backends = ["python", "compiled"]
    except ImportError:
        print("compiled extension not built; timing the Python kernels only")
        backends = ["python"]
    cases = [("mu_run 7x9, r=6, 2000 sweeps", _mu_case(7, 9, 6, 2000)),
             ("mu_run 60x80, r=8, 300 sweeps", _mu_case(60, 80, 8, 300)),
             ("int_rank swimmer 1024x128", bench_rank)]
    print(f"{'kernel':34s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup")
    for name, fn in cases:
        times, outs = [], []
        for b in backends:
            t, out = fn(b, args.repeat)
            times.append(t)
            outs.append(out)
        if len(outs) == 2:
            a, c = outs
            if name.startswith("mu_run"):
                assert abs(a[2] - c[2]) <= 1e-8 * max(1.0, a[2]), "backends disagree"
            else:
                assert a == c, "backends disagree"
        speed = f"{times[0] / times[-1]:8.1f}x" if len(times) == 2 else ""
        print(f"{name:34s} " + " ".join(f"{t * 1e3:8.1f}ms" for t in times) + "  " + speed)


if __name__ == "__main__":
    main()
