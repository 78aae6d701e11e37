"""Compare the numba kernels with their numpy fallbacks.

    python benchmarks/bench_kernels.py            # kernel micro-benchmarks
    python benchmarks/bench_kernels.py --e2e      # also time `selmask mask` under both backends

Kernel timings call both implementations in-process (numba must be installed);
the end-to-end run toggles SELMASK_DISABLE_NUMBA in a subprocess.
"""

import argparse
import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from selmask import _accel, maskfn, pipeline, rng, scorer
from selmask.fixtures import fixture_path


def best_of(fn, repeat=5):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernels():
    if not _accel.NUMBA_ENABLED:
        sys.exit("numba disabled or missing; nothing to compare")
    g = np.random.default_rng(0)
    units = np.arange(1_000_000, dtype=np.int64)
    key = np.uint64(rng.stream_key(1, 2, 3, 4))
    s = g.uniform(0, 10, 1_000_000)
    w = g.integers(1, 5, 1_000_000).astype(np.float64)
    p_sel = g.choice([0.0, 0.2, 0.9, 1.0], size=(2000, 60))
    sizes = g.integers(1, 4, size=(2000, 60))
    raw = g.random((2000, 60)) < p_sel
    X = g.normal(size=(400, 50))
    y = np.sign(X[:, 0])
    order = np.concatenate([g.permutation(400) for _ in range(200)]).astype(np.int64)

    def finalize(kernel):
        return lambda: [kernel(p_sel[i], sizes[i], raw[i].copy(), 29) for i in range(2000)]

    rows = [
        ("uniforms 1M", lambda: rng._uniform_loop(key, units), lambda: rng._uniform_numpy(key, units)),
        ("exp probabilities 1M", lambda: maskfn._probabilities_loop(2, 0, 0.5, 2.5, 40.0, 0.15, s),
         lambda: maskfn._probabilities_numpy(2, 0, 0.5, 2.5, 40.0, 0.15, s)),
        ("weighted rate 1M", lambda: maskfn._weighted_mean_loop(s, w), lambda: maskfn._weighted_mean_numpy(s, w)),
        ("finalize 2000 seqs", finalize(pipeline._finalize_loop), finalize(pipeline._finalize_numpy)),
        ("pegasos 80k steps", lambda: scorer._pegasos(X, y, order, 0.01, 40_000),
         lambda: scorer._pegasos.py_func(X, y, order, 0.01, 40_000)),
    ]
    print(f"{'kernel':24s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for name, fast, slow in rows:
        repeat = 1 if name.startswith("pegasos") else 5
        with np.errstate(over="ignore"):
            tf, ts = best_of(fast, repeat), best_of(slow, repeat)
        print(f"{name:24s} {tf * 1e3:9.2f}ms {ts * 1e3:9.2f}ms {ts / tf:7.1f}x")


def end_to_end():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "run.ini"
        cfg.write_text(
            "[paths]\n"
            f"corpus = {fixture_path('toy_corpus')}\n"
            f"embeddings = {fixture_path('toy_embeddings')}\n"
            f"vocab = {fixture_path('toy_vocab')}\n"
            f"seeds_lo = {fixture_path('seeds_lo')}\n"
            f"seeds_hi = {fixture_path('seeds_hi')}\n"
            f"model = {tmp}/model.bin\n"
        )
        base = [sys.executable, "-m", "selmask"]
        subprocess.run(base + ["train-scorer", "--config", str(cfg)], check=True, capture_output=True)
        for label, flag in (("numba", "0"), ("numpy", "1")):
            env = dict(os.environ, SELMASK_DISABLE_NUMBA=flag)
            t0 = time.perf_counter()
            subprocess.run(base + ["mask", "--config", str(cfg), "--output-dir", f"{tmp}/{label}"],
                           check=True, capture_output=True, env=env)
            print(f"selmask mask ({label}): {time.perf_counter() - t0:.2f}s")
        same = Path(f"{tmp}/numba/examples.jsonl").read_bytes() == Path(f"{tmp}/numpy/examples.jsonl").read_bytes()
        print(f"outputs identical across backends: {same}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--e2e", action="store_true")
    args = ap.parse_args()
    kernels()
    if args.e2e:
        end_to_end()
