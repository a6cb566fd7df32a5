"""Time relaxation construction under the numba and numpy kernel backends.

Runs each (case, arithmetic) pair in a fresh subprocess per backend (the
backend is fixed at import time), reports best-of-k wall times, and checks
that both backends produce identical relaxation ranges.

    python3 benchmarks/compare_backends.py [--repeats 5]
"""

import argparse
import json
import os
import subprocess
import sys

PAIRS = [
    ("cs1", "pwl:8"),
    ("cs2:2", "pwl:16"),
    ("cs3", "pwl:8"),
    ("cs3", "pwc:128"),
    ("mlp", "pwl:1"),
]

WORKER = r"""
import json, sys, time
from suprelax.cases import get_case
from suprelax.dag import eval_sup
from suprelax.harness import ArithSpec
from suprelax._backend import BACKEND
from suprelax._kernels import warmup

warmup()
case_id, arith_text, repeats = sys.argv[1], sys.argv[2], int(sys.argv[3])
case = get_case(case_id)
arith = ArithSpec.parse(arith_text)
best = float("inf")
rng = None
for _ in range(repeats):
    t0 = time.perf_counter()
    F = eval_sup(case.root, case.box, arith.param, arith.kind)
    best = min(best, (time.perf_counter() - t0) * 1e6)
    rng = (F.cached_range.lo, F.cached_range.hi)
print(json.dumps({"backend": BACKEND, "best_us": best, "range": rng}))
"""


def run(case_id, arith, backend, repeats):
    env = dict(os.environ, SUPRELAX_BACKEND=backend)
    out = subprocess.run(
        [sys.executable, "-c", WORKER, case_id, arith, str(repeats)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    print(f"{'case':8s} {'arith':9s} {'numba (us)':>12s} {'numpy (us)':>12s} {'speedup':>8s}  ranges match")
    for case_id, arith in PAIRS:
        nb = run(case_id, arith, "numba", args.repeats)
        np_ = run(case_id, arith, "numpy", args.repeats)
        match = nb["range"] == np_["range"]
        speedup = np_["best_us"] / nb["best_us"]
        print(
            f"{case_id:8s} {arith:9s} {nb['best_us']:12.1f} {np_['best_us']:12.1f} "
            f"{speedup:7.2f}x  {match}"
        )


if __name__ == "__main__":
    main()
