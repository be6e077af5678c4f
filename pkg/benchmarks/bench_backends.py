#!/usr/bin/env python3
"""Timing comparison of the numba-compiled kernels against the pure NumPy
fallback, on the hot paths of a two-user, 20-element network.

Usage:
    python benchmarks/bench_backends.py [--quick]

Both backends are loaded side by side (the numba one is warmed before
timing, so JIT compilation is not counted).
"""
from __future__ import annotations

import argparse
import time

import numpy as np

import risrsma as rr
from risrsma.backend import load_kernels, numba_available
from risrsma.streams import plan_rs1
from risrsma.wmmse import ap_row_index, default_precoder_init


def build_problem():
    cfg = rr.NetworkConfig(
        n_users=2, n_tx=2, n_aps=1, n_ris=1, n_elements=20,
        scheme="rs1", arch="single",
    )
    ch = rr.gen_channels(cfg, 7)
    plan = plan_rs1(2)
    sigma = np.sqrt(cfg.sigma_z2)
    theta = np.random.default_rng(0).uniform(0, 2 * np.pi, 20)
    h_d = np.ascontiguousarray(ch.H_d[None] / sigma)
    h_r = np.ascontiguousarray(ch.H_r[None] / sigma)
    g_herm = np.ascontiguousarray(np.conj(ch.G_chan).T[None])
    sizes = np.ones(20, dtype=np.int64)
    base = load_kernels("numpy")
    phi = base.build_phi(0, sizes, theta, 1, 20)
    v = base.effective(h_d[0], h_r[0], g_herm[0], phi)
    p0 = default_precoder_init(v * sigma, plan, cfg).astype(complex)

    obj_args = (
        theta, 0, sizes, 1, 20, h_d, h_r, g_herm, p0,
        np.array([0.5, 0.5]), plan.dec.copy(), plan.intf.copy(),
        plan.elig.copy(), plan.priv_of.astype(np.int64),
        plan.owner.astype(np.int64),
    )
    wmmse_args = (
        np.ascontiguousarray(v[None]), np.array([0.5, 0.5]),
        plan.dec.copy(), plan.intf.copy(), plan.priv_of.astype(np.int64),
        plan.owner.astype(np.int64), plan.elig.copy(), ap_row_index(cfg),
        np.asarray(cfg.power_w), p0, 100, 1e-4,
    )
    rng = np.random.default_rng(3)
    n_err = 2000
    std = np.sqrt(1e-11) / sigma

    def draws(shape):
        return std * (
            rng.standard_normal((n_err,) + shape)
            + 1j * rng.standard_normal((n_err,) + shape)
        ) / np.sqrt(2)

    erg_args = (
        h_d[0], h_r[0], g_herm[0], phi, p0,
        plan.dec.copy(), plan.intf.copy(),
        draws(h_d[0].shape), draws(h_r[0].shape), draws(g_herm[0].shape),
    )
    return theta, obj_args, wmmse_args, erg_args


CASES = [
    ("ris objective (M=20)", "ris_objective_nats", "obj", 2000),
    ("finite-diff gradient (20 params)", "ris_fd_grad", "grad", 100),
    ("wmmse solve (to convergence)", "wmmse_solve", "wmmse", 20),
    ("ergodic rate table (2000 draws)", "ergodic_table_nats", "erg", 5),
]


def run_case(kern, fn_name, kind, reps, theta, obj_args, wmmse_args, erg_args):
    fn = getattr(kern, fn_name)
    if kind == "obj":
        call = lambda: fn(*obj_args)  # noqa: E731
    elif kind == "grad":
        call = lambda: fn(theta, 1e-6, *obj_args[1:])  # noqa: E731
    elif kind == "wmmse":
        call = lambda: fn(*wmmse_args)  # noqa: E731
    else:
        call = lambda: fn(*erg_args)  # noqa: E731
    call()  # warm (JIT compile on the numba backend)
    t0 = time.perf_counter()
    for _ in range(reps):
        call()
    return (time.perf_counter() - t0) / reps


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="fewer repetitions")
    args = parser.parse_args()

    theta, obj_args, wmmse_args, erg_args = build_problem()
    backends = {"numpy": load_kernels("numpy")}
    if numba_available():
        backends["numba"] = load_kernels("numba")
    else:
        print("numba not available; timing the numpy fallback only")

    results = {}
    for label, fn_name, kind, reps in CASES:
        if args.quick:
            reps = max(1, reps // 10)
        for name, kern in backends.items():
            results[(label, name)] = run_case(
                kern, fn_name, kind, reps, theta, obj_args, wmmse_args, erg_args
            )

    width = max(len(c[0]) for c in CASES)
    print(f"\n{'kernel':<{width}}  {'numpy':>12}  {'numba':>12}  {'speedup':>8}")
    for label, _, _, _ in CASES:
        t_np = results[(label, "numpy")]
        line = f"{label:<{width}}  {t_np * 1e3:>10.3f}ms"
        t_nb = results.get((label, "numba"))
        if t_nb is not None:
            line += f"  {t_nb * 1e3:>10.3f}ms  {t_np / t_nb:>7.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
