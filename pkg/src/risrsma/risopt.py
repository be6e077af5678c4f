"""Quasi-Newton optimization of the RIS parameters with precoders fixed.

The reflection constraints are baked into the parameterizations (phases for
single-connected, Cayley blocks otherwise), so the search is unconstrained:
BFGS with an inverse-Hessian approximation, central finite-difference
gradients, and a backtracking Armijo line search, maximizing the weighted
sum rate with the shared-rate split re-derived greedily at every evaluation.
The returned matrices never score below the starting point.
"""
from __future__ import annotations

from typing import Optional, Sequence, Union

import numpy as np

from .channel import ChannelSet
from .config import NetworkConfig
from .kernels import kernels
from .rates import Precoder, stream_ordered_P
from .ris import RisMatrix, build_from_params, validate
from .streams import plan_for

_GRAD_TOL = 1e-7
_CURV_SKIP = 1e-10


def _kernel_args(
    channels: Sequence[ChannelSet],
    pre: Precoder,
    weights: np.ndarray,
    cfg: NetworkConfig,
    ris: RisMatrix,
):
    plan = pre.plan(channels[0].n_users)
    sigma = np.sqrt(cfg.sigma_z2)
    kind = 0 if ris.arch.kind == "single" else 1
    sizes = np.asarray(ris.arch.group_sizes, dtype=np.int64)
    h_d = np.stack([c.H_d for c in channels]) / sigma
    h_r = np.stack([c.H_r for c in channels]) / sigma
    g_herm = np.stack([np.conj(c.G_chan).T for c in channels])
    # Copies keep every input writable; see wmmse._plan_arrays.
    return (
        kind,
        sizes,
        ris.n_ris,
        ris.arch.n_elements,
        np.ascontiguousarray(h_d, dtype=np.complex128),
        np.ascontiguousarray(h_r, dtype=np.complex128),
        np.ascontiguousarray(g_herm, dtype=np.complex128),
        stream_ordered_P(pre).astype(np.complex128, copy=True),
        np.asarray(weights, dtype=np.float64).copy(),
        plan.dec.copy(),
        plan.intf.copy(),
        plan.elig.copy(),
        plan.priv_of.astype(np.int64),
        plan.owner.astype(np.int64),
    )


def ris_objective(
    ch: Union[ChannelSet, Sequence[ChannelSet]],
    pre: Precoder,
    weights: Sequence[float],
    cfg: NetworkConfig,
    ris: RisMatrix,
    params: Optional[np.ndarray] = None,
) -> float:
    """Greedy-split weighted sum rate (bits) at the given RIS parameters,
    averaged over the channel samples when a sequence is given."""
    channels = [ch] if isinstance(ch, ChannelSet) else list(ch)
    args = _kernel_args(channels, pre, np.asarray(weights, float), cfg, ris)
    p = (ris.params if params is None else np.asarray(params, float)).copy()
    return float(kernels.ris_objective_nats(p, *args) / np.log(2.0))


def optimize_ris(
    ch: Union[ChannelSet, Sequence[ChannelSet]],
    pre: Precoder,
    ris0: RisMatrix,
    weights: Sequence[float],
    cfg: NetworkConfig,
) -> RisMatrix:
    """BFGS ascent on the unconstrained RIS parameters of ris0's architecture.

    A sequence of channel sets requests a sample-average design (the
    objective averages per-user rates over the samples before capping shared
    streams).  Returns a valid RisMatrix whose objective is never below
    ris0's (the best evaluated point is kept).  A flat landscape (e.g. no
    reflected channel) returns ris0 after one gradient check.
    """
    check = validate(ris0)
    if not check.passed:
        raise ValueError(
            f"ris0 violates its declared architecture (residual {check.residual:.2e})"
        )
    channels = [ch] if isinstance(ch, ChannelSet) else list(ch)
    if ris0.n_ris == 0 or channels[0].H_r.shape[0] == 0:
        return ris0

    weights = np.asarray(weights, dtype=np.float64)
    opts = cfg.optimizer
    args = _kernel_args(channels, pre, weights, cfg, ris0)

    x = ris0.params.astype(np.float64).copy()
    f = f_init = float(kernels.ris_objective_nats(x, *args))
    g = np.asarray(kernels.ris_fd_grad(x, opts.fd_step, *args))
    best_x, best_f = x.copy(), f

    n = x.size
    b_inv = np.eye(n)
    for _it in range(opts.max_qn_iters):
        if np.max(np.abs(g)) < _GRAD_TOL:
            break
        direction = b_inv @ g
        slope = float(g @ direction)
        if slope <= 0.0:
            b_inv = np.eye(n)
            direction = g.copy()
            slope = float(g @ g)
            if slope <= 0.0:
                break
        step = 1.0
        f_new = f
        x_new = x
        accepted = False
        for _ls in range(opts.ls_max):
            x_try = x + step * direction
            f_try = float(kernels.ris_objective_nats(x_try, *args))
            if f_try >= f + 1e-4 * step * slope:
                x_new, f_new = x_try, f_try
                accepted = True
                break
            step *= opts.ls_backtrack
        if not accepted:
            break
        g_new = np.asarray(kernels.ris_fd_grad(x_new, opts.fd_step, *args))
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        # BFGS inverse update on the minimization of -f: s stays s, y flips
        # sign, so the curvature condition is s.(-y) > 0.
        if -sy > _CURV_SKIP * np.linalg.norm(s) * np.linalg.norm(y):
            rho = 1.0 / (-sy)
            sy_outer = np.outer(s, -y)
            v = np.eye(n) - rho * sy_outer
            b_inv = v @ b_inv @ v.T + rho * np.outer(s, s)
        x, f, g = x_new, f_new, g_new
        if f > best_f:
            best_x, best_f = x.copy(), f

    if best_f <= f_init:
        return ris0
    out = build_from_params(ris0.arch, best_x, ris0.n_ris)
    result = validate(out)
    if not result.passed:
        raise AssertionError(
            f"optimized RIS violates its architecture (residual {result.residual:.2e})"
        )
    return out
