"""Compare the compiled kernel backend against the numpy fallback.

Times the primitive ops at model-relevant shapes, then the three hot
end-to-end paths: belief-net inference, a teacher Q-learning step, and a
student REINFORCE step. Run from the repository root:

    python benchmarks/bench_kernel.py [--repeats N]
"""

import argparse
import time

import numpy as np

from pragcomm.kernel import backend
from pragcomm.spaces import InstanceSpace
from pragcomm.game import sample_game
from pragcomm.teacher import ReplayBuffer
from pragcomm.trainer import TrainConfig, build_pair, run_episode


def timeit(fn, repeats, warmup=3):
    for _ in range(warmup):
        fn()
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def op_benchmarks(repeats):
    rng = np.random.default_rng(0)
    shapes = {
        "matmul 256x128 @ 128x64": (rng.normal(size=(256, 128)), rng.normal(size=(128, 64))),
        "matmul 4x10 @ 10x64": (rng.normal(size=(4, 10)), rng.normal(size=(10, 64))),
    }
    rows = []
    for name, (a, b) in shapes.items():
        rows.append((name, lambda a=a, b=b: backend.active.matmul_nn(a, b)))
    x = rng.normal(size=(256, 64))
    g = rng.normal(size=(256, 64))
    y = backend.active.sigmoid_fwd(x)
    rows += [
        ("sigmoid fwd 256x64", lambda: backend.active.sigmoid_fwd(x)),
        ("sigmoid bwd 256x64", lambda: backend.active.sigmoid_bwd(y, g)),
        ("softmax rows 256x64", lambda: backend.active.softmax_rows_fwd(x, 5.0)),
        ("ew_mul bcast 256x64 * 256x1",
         lambda: backend.active.ew_mul(x, np.ascontiguousarray(x[:, :1]))),
        ("block_sum_rows k=4", lambda: backend.active.block_sum_rows(x, 4)),
        ("block_repeat_rows k=4",
         lambda: backend.active.block_repeat_rows(np.ascontiguousarray(x[:64]), 4)),
        ("gather_cols 256", lambda: backend.active.gather_cols(
            x, np.zeros(256, dtype=np.intp))),
    ]
    return [(name, timeit(fn, repeats)) for name, fn in rows]


def end_to_end_benchmarks(repeats):
    space = InstanceSpace.number_set(10, 4)
    cfg = TrainConfig(pretrain=False)
    pair = build_pair(cfg, space)
    rng = np.random.default_rng(1)
    games = [sample_game(space, 4, rng) for _ in range(256)]
    buffer = ReplayBuffer(4096)
    while len(buffer) < 256:
        for tr in run_episode(pair, games[len(buffer) % 256], "train", rng).transitions:
            buffer.add(tr)
    episode = run_episode(pair, games[0], "train", rng)

    def play():
        run_episode(pair, games[int(rng.integers(256))], "eval", None)

    def teach():
        pair.teacher.train_step(buffer, 64, 1e-6, rng)

    def learn():
        pair.student.reinforce_step([episode.records], 1e-6, 0.9)

    return [
        ("episode (eval mode)", timeit(play, repeats)),
        ("teacher train_step N=64", timeit(teach, max(repeats // 4, 2))),
        ("student reinforce_step", timeit(learn, repeats)),
    ]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    results = {}
    names = backend.available()
    if len(names) == 1:
        print("compiled backend not built; benchmarking the numpy fallback only")
    for name in names:
        backend.use(name)
        results[name] = dict(op_benchmarks(args.repeats) +
                             end_to_end_benchmarks(args.repeats))
    backend.use(names[-1])

    width = max(len(k) for k in results[names[0]])
    header = f"{'benchmark':<{width}}  " + "  ".join(f"{n:>12}" for n in names)
    if len(names) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for key in results[names[0]]:
        line = f"{key:<{width}}  "
        line += "  ".join(f"{results[n][key] * 1e6:>10.1f}us" for n in names)
        if len(names) == 2:
            line += f"  {results['python'][key] / results['compiled'][key]:>7.2f}x"
        print(line)


if __name__ == "__main__":
    main()
