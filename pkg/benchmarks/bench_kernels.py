"""Benchmark the numba and numpy kernel backends against each other.

Times the zeta pair and the mixture log-likelihood gradient on
realistic workloads, checks the backends agree numerically, and prints
a speedup table. Run directly:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from tailmix import kernels
from tailmix.mixture import MixtureParams, ModelSpec, aggregate_counts, sample_mixture


def timeit(fn, *args, repeats=2000):
    fn(*args)  # warm-up (also triggers JIT compilation)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def main():
    spec = ModelSpec(n_exp=2)
    truth = MixtureParams((0.3, 0.4, 0.3), (1.5, 0.15), 1.6)
    sample = sample_mixture(spec, truth, 10000, seed=1)
    values, mult = aggregate_counts(sample, 1)
    log_values = np.log(values)
    m = np.array([0.3, 0.4, 0.3])
    lam = np.array([1.5, 0.15])
    z, dz = kernels.IMPLEMENTATIONS["numpy"]["zeta_pair"](1.6, 1.0)
    mix_args = (values, log_values, mult, m, lam, 1.6, 1.0, z, dz, False)

    print(f"backends available: {sorted(kernels.IMPLEMENTATIONS)}")
    print(f"active backend: {kernels.ACTIVE_BACKEND}")
    print(f"workload: {values.size} unique values from n={sample.size}\n")

    rows = []
    for op, args in (("zeta_pair", (1.6, 1.0)), ("mix_loglik_grad", mix_args)):
        times = {}
        results = {}
        for name, impl in kernels.IMPLEMENTATIONS.items():
            times[name] = timeit(impl[op], *args)
            results[name] = impl[op](*args)
        if len(results) == 2:
            a, b = results["numpy"], results["numba"]
            flat_a = np.concatenate([np.atleast_1d(np.asarray(v)) for v in a])
            flat_b = np.concatenate([np.atleast_1d(np.asarray(v)) for v in b])
            agree = np.allclose(flat_a, flat_b, rtol=1e-10, atol=1e-12)
        else:
            agree = True
        rows.append((op, times, agree))

    header = f"{'kernel':<18}" + "".join(
        f"{name + ' (us)':>14}" for name in sorted(kernels.IMPLEMENTATIONS)
    ) + f"{'speedup':>10}{'agree':>8}"
    print(header)
    print("-" * len(header))
    for op, times, agree in rows:
        line = f"{op:<18}"
        for name in sorted(kernels.IMPLEMENTATIONS):
            line += f"{times[name] * 1e6:>14.2f}"
        if "numba" in times:
            line += f"{times['numpy'] / times['numba']:>9.1f}x"
        else:
            line += f"{'n/a':>10}"
        line += f"{str(agree):>8}"
        print(line)


if __name__ == "__main__":
    main()
