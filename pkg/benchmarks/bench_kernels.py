"""Timing comparison: numba-jitted kernels against the pure-numpy fallback.

Run as a script with no arguments.  It re-executes itself in two child
processes, one with ELLBAR_NO_NUMBA=1 and one without, times each hot kernel
on a realistic workload, checks the two paths agree numerically, and prints
a side-by-side table.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _time(fn, min_seconds=0.4):
    fn()  # warm up (jit compilation, caches)
    n, elapsed = 1, 0.0
    while True:
        t0 = time.perf_counter()
        for _ in range(n):
            fn()
        elapsed = time.perf_counter() - t0
        if elapsed >= min_seconds:
            return elapsed / n
        n = max(n + 1, int(n * min_seconds / max(elapsed, 1e-9)))


def run_inner():
    from ellbar import _kernels
    from ellbar.chenint import _ref_quad, _word_table

    w1, w2 = 2.6220575542921198 + 0j, 2.6220575542921198j
    rng = np.random.default_rng(5)

    results = {"mode": "numba" if _kernels.USE_NUMBA else "numpy", "kernels": {}}

    def record(name, fn, checksum):
        results["kernels"][name] = {
            "seconds": _time(fn),
            "checksum": [checksum.real, checksum.imag],
        }

    M_eis = 1200
    record(
        "eis_sum(M=1200, k=4)",
        lambda: _kernels.eis_sum(w1, w2, M_eis, 4),
        complex(_kernels.eis_sum(w1, w2, M_eis, 4)),
    )

    M_part = 1200
    record(
        "latsum_partials(M=1200)",
        lambda: _kernels.latsum_partials(w1, w2, M_part),
        complex(sum(_kernels.latsum_partials(w1, w2, M_part))),
    )

    zs = (0.1 + 0.8 * rng.random(200)) * w1 + (0.1 + 0.8 * rng.random(200)) * w2
    record(
        "latsum_eval(200 pts, M=60)",
        lambda: _kernels.latsum_eval(zs, w1, w2, 60),
        complex(sum(np.sum(a) for a in _kernels.latsum_eval(zs, w1, w2, 60))),
    )

    table = _word_table(("nu", "w0", "w1"), 4)
    x, wts, Q = _ref_quad(24)
    phi = rng.standard_normal((3, 24)) + 1j * rng.standard_normal((3, 24))
    Qc = Q.astype(complex)
    wc = wts.astype(complex)

    def panels():
        for _ in range(400):
            _kernels.panel_transport(table.first, table.suffix, phi, Qc, wc)

    record(
        "panel_transport(121 words, 400 panels)",
        panels,
        complex(
            np.sum(_kernels.panel_transport(table.first, table.suffix, phi, Qc, wc))
        ),
    )
    print(json.dumps(results))


def run_outer():
    here = os.path.abspath(__file__)
    reports = {}
    for mode, env_val in (("numba", None), ("numpy", "1")):
        env = dict(os.environ)
        env.pop("ELLBAR_NO_NUMBA", None)
        if env_val:
            env["ELLBAR_NO_NUMBA"] = env_val
        out = subprocess.run(
            [sys.executable, here, "--inner"],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        rep = json.loads(out.stdout.strip().splitlines()[-1])
        if rep["mode"] != mode:
            raise RuntimeError(f"expected mode {mode}, child reported {rep['mode']}")
        reports[mode] = rep["kernels"]

    name_w = max(len(k) for k in reports["numba"])
    print(f"{'kernel':<{name_w}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name in reports["numba"]:
        tn = reports["numba"][name]["seconds"]
        tp = reports["numpy"][name]["seconds"]
        ca = complex(*reports["numba"][name]["checksum"])
        cb = complex(*reports["numpy"][name]["checksum"])
        rel = abs(ca - cb) / max(1.0, abs(ca))
        if rel > 1e-9:
            raise RuntimeError(f"paths disagree on {name}: {rel:.3e}")
        print(f"{name:<{name_w}}  {tn:>9.4f}s  {tp:>9.4f}s  {tp / tn:>7.1f}x")
    print("numeric agreement between paths verified on every kernel")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--inner", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.inner:
        run_inner()
    else:
        run_outer()
