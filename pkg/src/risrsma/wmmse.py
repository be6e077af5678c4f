"""Weighted-sum-rate precoder optimization via the rate/MSE equivalence.

For fixed effective channels the weighted sum rate (shared-rate splits
included) is maximized by alternating

  (i)   per-stream MMSE equalizer updates,
  (ii)  MSE weight updates w = 1/eps,
  (iii) a convex quadratic subproblem in the precoder columns and the
        shared-rate splits under the per-AP power budgets,

which never decreases the objective.  The subproblem is solved by the
log-barrier Newton method in the kernel module.  Internally rates are in
nats (the weight update w = 1/eps is exactly optimal there); everything
returned is in bits.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .config import NetworkConfig
from .kernels import kernels
from .rates import Precoder, per_ap_power
from .streams import StreamPlan, greedy_allocation, plan_for

_LN2 = float(np.log(2.0))


@dataclass
class WmmseResult:
    """Optimized precoder plus the shared-rate split, objective, and trace."""

    precoder: Precoder
    common_alloc: np.ndarray      # (K,) bits
    wsr: float                    # bits
    trace: np.ndarray             # (n_iters,) bits, nondecreasing
    converged: bool
    inner_alloc: Optional[np.ndarray] = None   # (K,) bits, hrs only


def _plan_arrays(plan: StreamPlan):
    # Writable copies: the plan's arrays are frozen, and readonly inputs
    # would make numba compile a second signature for every kernel.
    return (
        plan.dec.copy(),
        plan.intf.copy(),
        plan.priv_of.astype(np.int64),
        plan.owner.astype(np.int64),
        plan.elig.copy(),
    )


def ap_row_index(cfg: NetworkConfig) -> np.ndarray:
    """AP owning each precoder row."""
    return np.repeat(np.arange(cfg.n_aps, dtype=np.int64), cfg.n_tx)


def scale_to_budgets(P: np.ndarray, cfg: NetworkConfig) -> np.ndarray:
    """Scale each AP's row block so its power budget holds with equality
    (blocks that radiate nothing are left alone)."""
    out = P.astype(np.complex128, copy=True)
    pw = per_ap_power(out, cfg.n_aps, cfg.n_tx)
    for n in range(cfg.n_aps):
        if pw[n] > 0:
            out[n * cfg.n_tx:(n + 1) * cfg.n_tx, :] *= np.sqrt(
                cfg.power_w[n] / pw[n]
            )
    return out


def default_precoder_init(
    H_eff: np.ndarray, plan: StreamPlan, cfg: NetworkConfig
) -> np.ndarray:
    """Deterministic start: matched-filter private columns, principal-channel
    shared columns, half the power on each family, per-AP budgets tight."""
    n_tx, k_users = H_eff.shape
    P = np.zeros((n_tx, plan.n_streams), dtype=np.complex128)
    commons = plan.common_streams
    n_c = len(commons)
    n_p = int(np.sum(plan.priv_of >= 0))
    share_c = 0.5 / n_c if n_c else 0.0
    share_p = (1.0 - (0.5 if n_c else 0.0)) / n_p if n_p else 0.0
    if n_c:
        u_svd, _, _ = np.linalg.svd(H_eff, full_matrices=False)
        principal = u_svd[:, 0]
        for i in commons:
            P[:, i] = np.sqrt(share_c) * principal
    for k in range(k_users):
        i = plan.priv_of[k]
        if i < 0:
            continue
        v = H_eff[:, k]
        nrm = np.linalg.norm(v)
        direction = v / nrm if nrm > 0 else np.eye(n_tx)[:, 0]
        P[:, i] = np.sqrt(share_p) * direction
    return scale_to_budgets(P, cfg)


def private_heavy_init(
    H_eff: np.ndarray, plan: StreamPlan, cfg: NetworkConfig
) -> np.ndarray:
    """Near-SDMA start: matched-filter privates, shared columns at a token
    power so the shared streams can still wake up if they help."""
    P = default_precoder_init(H_eff, plan, cfg)
    commons = plan.common_streams
    if len(commons):
        P[:, commons] *= 1e-3
    return scale_to_budgets(P, cfg)


def random_precoder_init(
    n_tx: int, n_streams: int, cfg: NetworkConfig, rng: np.random.Generator
) -> np.ndarray:
    """Spec'd random restart: i.i.d. complex Gaussian columns scaled to meet
    the per-AP budgets with equality."""
    P = (
        rng.standard_normal((n_tx, n_streams))
        + 1j * rng.standard_normal((n_tx, n_streams))
    ) / np.sqrt(2.0)
    return scale_to_budgets(P, cfg)


def _allocs_from_caps(
    caps_bits: np.ndarray, weights: np.ndarray, plan: StreamPlan
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    table = greedy_allocation(caps_bits, weights, plan)
    if plan.scheme == "hrs":
        n_g = len(plan.groups)
        return table[0].copy(), table[1:1 + n_g].sum(axis=0)
    if plan.scheme == "sdma":
        return np.zeros(plan.n_users), None
    return table[plan.common_streams[0]].copy(), None


def wmmse_precoder(
    H_eff: np.ndarray,
    weights: Union[np.ndarray, Sequence[float]],
    cfg: NetworkConfig,
    scheme: Optional[str] = None,
    *,
    order: Optional[Tuple[int, int]] = None,
    init: Optional[np.ndarray] = None,
    h_samples: Optional[np.ndarray] = None,
) -> WmmseResult:
    """Maximize sum_k u_k (c_k + R_private,k) over precoders and splits.

    ``init`` (columns in the scheme's layout) warm-starts the loop; the
    default start is deterministic.  ``h_samples`` (S, N*N_t, K) switches to
    a sample-average design: the objective and shared-rate caps use per-user
    rates averaged over the given effective-channel samples (H_eff then only
    seeds the default start).  Non-convergence at the iteration cap returns
    the best iterate with converged=False rather than raising.
    """
    scheme = scheme or cfg.scheme
    weights = np.asarray(weights, dtype=np.float64)
    if weights.min() < 0 or weights.sum() <= 0:
        raise ValueError("weights must be nonnegative with positive sum")
    if min(cfg.power_w) <= 0:
        raise ValueError("per-AP power budgets must be positive")
    plan = plan_for(scheme, H_eff.shape[1], groups=cfg.groups, order=order)
    if H_eff.shape[0] != cfg.n_tx_total:
        raise ValueError(
            f"H_eff has {H_eff.shape[0]} rows, config gives {cfg.n_tx_total}"
        )

    if init is None:
        P0 = default_precoder_init(H_eff, plan, cfg)
    else:
        P0 = np.asarray(init, dtype=np.complex128)
        if P0.shape != (cfg.n_tx_total, plan.n_streams):
            raise ValueError(
                f"init shape {P0.shape} != {(cfg.n_tx_total, plan.n_streams)}"
            )
        if scheme == "noma":
            P0 = P0[:, list(plan.order)]  # public layout is user-indexed

    stack = H_eff[None] if h_samples is None else np.asarray(h_samples)
    if stack.ndim != 3 or stack.shape[1:] != H_eff.shape:
        raise ValueError(
            f"h_samples shape {stack.shape} inconsistent with {H_eff.shape}"
        )
    v_norm = stack / np.sqrt(cfg.sigma_z2)
    dec, intf, priv_of, owner, elig = _plan_arrays(plan)
    P, trace_nats, n_trace, converged = kernels.wmmse_solve(
        np.ascontiguousarray(v_norm, dtype=np.complex128),
        weights,
        dec,
        intf,
        priv_of,
        owner,
        elig,
        ap_row_index(cfg),
        np.asarray(cfg.power_w, dtype=np.float64),
        np.ascontiguousarray(P0),
        cfg.optimizer.max_wmmse_iters,
        cfg.optimizer.wsr_tol,
    )

    s_stack = kernels.products_stack(
        np.ascontiguousarray(v_norm, dtype=np.complex128), P
    )
    rates_bits = kernels.rate_table_mean_nats(s_stack, dec, intf) / _LN2
    caps_bits = kernels.stream_caps_nats(rates_bits, dec)
    alloc, inner = _allocs_from_caps(caps_bits, weights, plan)
    p_public = P
    if scheme == "noma":
        p_public = np.empty_like(P)
        for i, user in enumerate(plan.order):
            p_public[:, user] = P[:, i]
    pre = Precoder(
        scheme=scheme,
        P=p_public,
        groups=plan.groups,
        order=plan.order,
        common_alloc=alloc,
        inner_alloc=inner,
    )
    return WmmseResult(
        precoder=pre,
        common_alloc=alloc,
        wsr=float(trace_nats[n_trace - 1] / _LN2),
        trace=np.asarray(trace_nats[:n_trace]) / _LN2,
        converged=bool(converged),
        inner_alloc=inner,
    )
