"""Compare the numba kernels with their pure-numpy fallbacks.

Run ``python3 benchmarks/bench_kernels.py``. The first table times each
kernel in-process (compiled loop vs numpy). The second times a few
end-to-end workloads in fresh interpreters with and without
``RESTARTKIT_DISABLE_NUMBA=1``; compile time is excluded by a warm-up call.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from restartkit import _kernels
from restartkit._accel import HAVE_NUMBA

_WORKLOADS = {
    "steps_to_exceed_beta_star(1e-8)": (
        "from restartkit.dynamics import steps_to_exceed_beta_star as f",
        "f(1e-8, 1.0)",
    ),
    "recurrence_mode x 20 modes, 5000 steps": (
        "import numpy as np; from restartkit.dynamics import recurrence_mode as f;"
        " r = np.linspace(1e-4, 1, 20)",
        "[f(1.0, 0.99, float(x), 5000) for x in r]",
    ),
    "fista grad-restart, lasso 500x125, 500 iters": (
        "from restartkit import gen_lasso, fista, SolverConfig, parse_policy;"
        " p = gen_lasso(500, 125, 25, 1.0, 0.1, 0);"
        " c = SolverConfig(max_iters=500, restart=parse_policy('grad'))",
        "fista(p, p.A[0] * 0, c)",
    ),
}


def _best(stmt, number, repeat=5):
    return min(timeit.repeat(stmt, number=number, repeat=repeat)) / number


def kernel_table(n):
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n)
    lo, hi = -np.ones(n), np.ones(n)
    f = np.cos(0.01 * np.arange(n)) ** 2 * 0.999 ** np.arange(n)
    w0 = rng.standard_normal(20)
    a = np.linspace(0.0, 0.999, 20)
    cases = {
        "soft_threshold": (lambda: _kernels.soft_threshold_loop(v, 0.5),
                           lambda: _kernels.soft_threshold_numpy(v, 0.5)),
        "clip_box": (lambda: _kernels.clip_box_loop(v, lo, hi),
                     lambda: _kernels.clip_box_numpy(v, lo, hi)),
        "theta_beta_sequence": (lambda: _kernels.theta_beta_sequence_loop(0.0, n),
                                lambda: _kernels.theta_beta_sequence_numpy(0.0, n)),
        "mode_recurrence": (lambda: _kernels.mode_recurrence_loop(w0, w0 * a, 1.9 * a, 0.9 * a, n),
                            lambda: _kernels.mode_recurrence_numpy(w0, w0 * a, 1.9 * a, 0.9 * a, n)),
        "local_minima": (lambda: _kernels.local_minima_loop(f),
                         lambda: _kernels.local_minima_numpy(f)),
    }
    print(f"kernels, n={n} (numba available: {HAVE_NUMBA})")
    print(f"{'kernel':<22}{'loop [us]':>12}{'numpy [us]':>12}{'speedup':>10}")
    for name, (fast, ref) in cases.items():
        fast()  # compile
        number = max(1, 20000 // max(n // 100, 1))
        t_fast = _best(fast, number) * 1e6
        t_ref = _best(ref, number) * 1e6
        print(f"{name:<22}{t_fast:>12.2f}{t_ref:>12.2f}{t_ref / t_fast:>10.2f}")


def _time_in_subprocess(setup, stmt, disable):
    env = dict(os.environ)
    if disable:
        env["RESTARTKIT_DISABLE_NUMBA"] = "1"
    else:
        env.pop("RESTARTKIT_DISABLE_NUMBA", None)
    code = (
        "import timeit\n"
        f"{setup}\n"
        f"{stmt}\n"
        f"print(min(timeit.repeat(lambda: {stmt}, number=1, repeat=3)))\n"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True,
                         capture_output=True, text=True)
    return float(out.stdout.strip().splitlines()[-1])


def workload_table():
    print("\nend-to-end workloads [ms]")
    print(f"{'workload':<46}{'numba':>10}{'numpy':>10}{'speedup':>10}")
    for name, (setup, stmt) in _WORKLOADS.items():
        t_nb = _time_in_subprocess(setup, stmt, disable=False) * 1e3
        t_np = _time_in_subprocess(setup, stmt, disable=True) * 1e3
        print(f"{name:<46}{t_nb:>10.2f}{t_np:>10.2f}{t_np / t_nb:>10.2f}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="100,10000,1000000")
    parser.add_argument("--skip-workloads", action="store_true")
    args = parser.parse_args(argv)
    for n in (int(s) for s in args.sizes.split(",")):
        kernel_table(n)
        print()
    if not args.skip_workloads:
        workload_table()


if __name__ == "__main__":
    main()
