"""Compare the compiled and pure-Python rollout sampling kernels.

Both backends draw from identical counter-based streams, so besides the
timing comparison this doubles as a parity check on a large batch.

Usage:
    python3 benchmarks/bench_kernels.py [--rollouts 20000] [--repeats 3]
"""

from __future__ import annotations

import argparse
import importlib
import statistics
import time


def load_backends():
    pure = importlib.import_module("stepmark._kernels._pure")
    backends = {"pure": pure}
    try:
        backends["compiled"] = importlib.import_module("stepmark._kernels._core")
    except ImportError:
        print("compiled kernel not available; benchmarking the pure backend only")
    return backends


def bench(module, n_rollouts: int, repeats: int) -> list[float]:
    key = module.stream_key(0, module.fnv1a64(b"bench-question"), 3, 0)
    timings = []
    for _ in range(repeats):
        started = time.perf_counter()
        module.sample_rollout_batch(key, 0, n_rollouts, 40, 120, 0.6, -0.5, -1.5, 0.25)
        timings.append(time.perf_counter() - started)
    return timings


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rollouts", type=int, default=20_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = load_backends()
    results = {}
    for name, module in backends.items():
        timings = bench(module, args.rollouts, args.repeats)
        best = min(timings)
        results[name] = best
        print(
            f"{name:>8}: best {best * 1000:.1f} ms, "
            f"mean {statistics.mean(timings) * 1000:.1f} ms "
            f"({args.rollouts / best:,.0f} rollouts/s)"
        )

    if len(backends) == 2:
        pure = backends["pure"]
        compiled = backends["compiled"]
        key = pure.stream_key(0, pure.fnv1a64(b"bench-question"), 3, 0)
        a = pure.sample_rollout_batch(key, 0, 2_000, 40, 120, 0.6, -0.5, -1.5, 0.25)
        b = compiled.sample_rollout_batch(key, 0, 2_000, 40, 120, 0.6, -0.5, -1.5, 0.25)
        assert a == b, "backend outputs diverged"
        print("parity: OK (2000 rollouts bit-identical)")
        print(f"speedup: {results['pure'] / results['compiled']:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
