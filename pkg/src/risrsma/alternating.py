"""Joint precoder/RIS design, rate-region sweeps, and ergodic evaluation.

The alternating loop repeats { WMMSE precoder update on the current
effective channels; quasi-Newton RIS update with the precoder fixed } until
the weighted sum rate stalls, over several independent initializations, and
keeps the best.  Every stochastic choice flows from the explicit seed, so
identical inputs reproduce identical outputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .channel import ChannelSet, apply_csi_error
from .config import CsiErrorModel, NetworkConfig
from .exceptions import UnsupportedConfigError
from .kernels import kernels
from .rates import (
    Precoder,
    RateResult,
    compute_rates,
    stream_caps,
    stream_ordered_P,
    totals,
)
from .ris import (
    RisArchitecture,
    RisMatrix,
    build_from_params,
    effective_channels,
    empty_ris,
    random_params,
    validate,
)
from .risopt import optimize_ris, ris_objective
from .streams import greedy_allocation, plan_for
from .wmmse import private_heavy_init, random_precoder_init, wmmse_precoder

_LN2 = float(np.log(2.0))
_PRIVATE_HEAVY = object()  # restart sentinel: near-SDMA deterministic start


@dataclass
class DesignOutput:
    """Best design found for one (channel, weights, scheme, arch) instance."""

    precoder: Precoder
    ris: RisMatrix
    rates: RateResult
    wsr: float                 # bits
    wsr_trace: np.ndarray      # bits, nondecreasing per accepted step
    seed: int
    converged: bool


@dataclass(frozen=True)
class RegionPoint:
    """One sample of the two-user rate region."""

    weight_idx: int            # -1 / -2 tag the single-user corner points
    u1: float
    u2: float
    R1: float
    R2: float
    wsr: float
    scheme: str
    arch: str
    csi_alpha: float
    seed: int


def greedy_rates(
    H_eff: np.ndarray, pre: Precoder, sigma_z2: float, weights: Sequence[float]
) -> RateResult:
    """Rates with the weighted-greedy shared-rate split applied."""
    weights = np.asarray(weights, dtype=np.float64)
    plan = pre.plan(H_eff.shape[1])
    base = compute_rates(H_eff, pre, sigma_z2)
    caps = np.zeros(plan.n_streams)
    if plan.scheme != "sdma":
        caps[plan.common_streams[0]] = base.common_rate
    if plan.scheme == "hrs":
        caps[1:1 + len(plan.groups)] = base.inner_common_rates
    table = greedy_allocation(caps, weights, plan)
    if plan.scheme == "sdma":
        return base
    alloc = table[plan.common_streams[0]].copy()
    if plan.scheme == "noma":
        alloc = base.common_alloc  # decodability fixes the split
    inner = None
    if plan.scheme == "hrs":
        inner = table[1:1 + len(plan.groups)].sum(axis=0)
    user_totals = totals(base, alloc, inner)
    kwargs = dict(
        scheme=base.scheme,
        common_rates_per_user=base.common_rates_per_user,
        common_rate=base.common_rate,
        private_rates=base.private_rates,
        common_alloc=alloc,
        user_totals=user_totals,
    )
    if plan.scheme == "hrs":
        kwargs.update(
            inner_common_rates=base.inner_common_rates,
            inner_alloc=inner,
            groups=base.groups,
        )
    return RateResult(**kwargs)


def _resolve_arch(cfg: NetworkConfig, arch: Optional[str]) -> Optional[RisArchitecture]:
    spec = cfg.arch if arch is None else arch
    if spec == "none" or cfg.n_ris == 0 or cfg.n_elements == 0:
        return None
    return RisArchitecture.from_spec(spec, cfg.n_elements)


def _single_order_design(
    ch: ChannelSet,
    cfg: NetworkConfig,
    weights: np.ndarray,
    scheme: str,
    arch: Optional[RisArchitecture],
    seed: int,
    order: Optional[Tuple[int, int]],
    order_idx: int,
    init_precoder: Optional[np.ndarray],
    init_ris_params: Optional[np.ndarray],
    design_samples: Optional[Sequence[ChannelSet]] = None,
) -> DesignOutput:
    opts = cfg.optimizer
    plan = plan_for(scheme, ch.n_users, groups=cfg.groups, order=order)
    best: Optional[DesignOutput] = None
    for restart in range(opts.restarts):
        rng = np.random.default_rng([seed, order_idx, restart])
        if restart == 0 and init_precoder is not None:
            p_cur = np.asarray(init_precoder, dtype=np.complex128)
        elif restart == 0:
            p_cur = None  # deterministic matched-filter/SVD start
        elif restart == 1 and len(plan.common_streams):
            p_cur = _PRIVATE_HEAVY  # resolved once channels are composed
        else:
            p_cur = random_precoder_init(
                cfg.n_tx_total, plan.n_streams, cfg, rng
            )
        if arch is None:
            ris = empty_ris()
        elif restart == 0 and init_ris_params is not None:
            ris = build_from_params(arch, init_ris_params, cfg.n_ris)
        else:
            ris = build_from_params(
                arch, random_params(arch, cfg.n_ris, rng), cfg.n_ris
            )

        trace: List[float] = []
        wsr_prev = -np.inf
        pre = None
        converged = False
        design_ch = ch if design_samples is None else design_samples
        for _outer in range(opts.max_outer_iters):
            h_eff = effective_channels(ch, ris)
            h_samples = None
            if design_samples is not None:
                h_samples = np.stack(
                    [effective_channels(c, ris) for c in design_samples]
                )
            if p_cur is _PRIVATE_HEAVY:
                p_cur = private_heavy_init(h_eff, plan, cfg)
            res = wmmse_precoder(
                h_eff, weights, cfg, scheme, order=order, init=p_cur,
                h_samples=h_samples,
            )
            pre = res.precoder
            p_cur = pre.P
            trace.extend(res.trace.tolist())
            wsr = res.wsr
            if arch is not None:
                ris = optimize_ris(design_ch, pre, ris, weights, cfg)
                wsr = ris_objective(design_ch, pre, weights, cfg, ris)
                trace.append(wsr)
            if abs(wsr - wsr_prev) <= opts.wsr_tol * max(abs(wsr_prev), 1e-12):
                converged = True
                break
            wsr_prev = wsr
        h_eff = effective_channels(ch, ris)
        rates = greedy_rates(h_eff, pre, cfg.sigma_z2, weights)
        wsr_final = float(np.dot(weights, rates.user_totals))
        cand = DesignOutput(
            precoder=pre,
            ris=ris,
            rates=rates,
            wsr=wsr_final,
            wsr_trace=np.asarray(trace),
            seed=seed,
            converged=converged,
        )
        # Restarts compete on the design objective (the trace metric, which
        # is the sample average for robust designs), not the nominal value.
        if best is None or cand.wsr_trace[-1] > best.wsr_trace[-1]:
            best = cand
    return best


def alternating_optimize(
    ch: ChannelSet,
    cfg: NetworkConfig,
    weights: Sequence[float],
    scheme: Optional[str] = None,
    arch: Optional[str] = None,
    seed: int = 0,
    *,
    init_precoder: Optional[np.ndarray] = None,
    init_ris_params: Optional[np.ndarray] = None,
    design_samples: Optional[Sequence[ChannelSet]] = None,
) -> DesignOutput:
    """Best joint design over cfg.optimizer.restarts initializations.

    Restart 0 can be warm-started through init_precoder / init_ris_params
    (columns in the scheme's layout, parameters in the architecture's
    layout); remaining restarts draw random starts from the seed.  NOMA
    solves both decode orders and keeps the better one.  ``design_samples``
    switches to a sample-average (robust) design: the optimization metric
    averages per-user rates over the given channel sets while the returned
    rates still describe the nominal channel ``ch``.
    """
    scheme = scheme or cfg.scheme
    weights = np.asarray(weights, dtype=np.float64)
    arch_obj = _resolve_arch(cfg, arch)
    if scheme == "noma":
        if ch.n_users != 2:
            raise UnsupportedConfigError("NOMA designs require K = 2 users")
        # noma precoder columns are user-indexed, so a warm start is valid
        # under either decode order.
        outs = [
            _single_order_design(
                ch, cfg, weights, scheme, arch_obj, seed, order, idx,
                init_precoder, init_ris_params, design_samples,
            )
            for idx, order in enumerate([(0, 1), (1, 0)])
        ]
        return max(outs, key=lambda o: o.wsr_trace[-1])
    return _single_order_design(
        ch, cfg, weights, scheme, arch_obj, seed, None, 0,
        init_precoder, init_ris_params, design_samples,
    )


def ergodic_rates(
    pre: Precoder,
    ris: Optional[RisMatrix],
    estimate: ChannelSet,
    err: CsiErrorModel,
    n_samples: int,
    rng: Union[int, np.random.Generator],
    sigma_z2: float,
) -> RateResult:
    """Average rates over true channels drawn around the estimate.

    True channels are modeled as estimate + fresh zero-mean Gaussian errors
    (the error law is symmetric, so the two directions are statistically
    identical).  Per-user decode rates are averaged first and shared-stream
    caps are the min of those averages - the short-term-rate convention.
    """
    from .rates import _result_from_tables  # shared construction

    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(rng) if isinstance(rng, int) else rng
    plan = pre.plan(estimate.n_users)
    if err.is_perfect:
        n_samples = 1  # every draw equals the estimate
    var_d, var_r, var_g = err.block_variances()

    def draws(shape, var) -> np.ndarray:
        re = rng.standard_normal((n_samples,) + shape)
        im = rng.standard_normal((n_samples,) + shape)
        return np.sqrt(var) * (re + 1j * im) / np.sqrt(2.0)

    e_d = draws(estimate.H_d.shape, var_d)
    e_r = draws(estimate.H_r.shape, var_r)
    # Errors on G enter through G^H; the error law is circularly symmetric,
    # so drawing the Hermitian's error directly is distribution-identical.
    e_gh = draws(estimate.G_chan.shape[::-1], var_g)
    phi = (
        ris.phi if ris is not None and ris.n_ris > 0
        else np.zeros((0, 1, 1), dtype=np.complex128)
    )
    # Kernels expect unit noise: divide the user-side blocks (and their
    # errors) by sigma_z; the AP->RIS block enters the composite linearly
    # and stays as-is.
    sigma_z = np.sqrt(sigma_z2)
    table_nats = kernels.ergodic_table_nats(
        np.ascontiguousarray(estimate.H_d / sigma_z, dtype=np.complex128),
        np.ascontiguousarray(estimate.H_r / sigma_z, dtype=np.complex128),
        np.ascontiguousarray(np.conj(estimate.G_chan).T, dtype=np.complex128),
        np.ascontiguousarray(phi, dtype=np.complex128),
        np.ascontiguousarray(stream_ordered_P(pre), dtype=np.complex128),
        np.ascontiguousarray(plan.dec),
        np.ascontiguousarray(plan.intf),
        np.ascontiguousarray(e_d / sigma_z, dtype=np.complex128),
        np.ascontiguousarray(e_r / sigma_z, dtype=np.complex128),
        np.ascontiguousarray(e_gh, dtype=np.complex128),
    )
    return _result_from_tables(table_nats / _LN2, plan, pre)


def region_weight_vectors(n_weights: int) -> np.ndarray:
    """(n, 2) weight pairs (cos^2 w_i, sin^2 w_i), w_i uniform on [0, pi/2]."""
    omega = np.linspace(0.0, np.pi / 2.0, n_weights)
    return np.stack([np.cos(omega) ** 2, np.sin(omega) ** 2], axis=1)


def draw_design_samples(
    estimate: ChannelSet,
    err: CsiErrorModel,
    n_samples: int,
    rng: Union[int, np.random.Generator],
) -> List[ChannelSet]:
    """Channel samples around an estimate for sample-average designs."""
    rng = np.random.default_rng(rng) if isinstance(rng, int) else rng
    return [apply_csi_error(estimate, err, rng) for _ in range(n_samples)]


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _evaluate_point(
    truth: ChannelSet,
    estimate: ChannelSet,
    cfg: NetworkConfig,
    design: DesignOutput,
    weights: np.ndarray,
    eval_seed: int,
) -> Tuple[np.ndarray, float]:
    """Per-user totals (and WSR) of a design: instantaneous under perfect
    CSI, ergodic around the estimate otherwise, with the shared rate split
    greedily under the sweep weights."""
    if cfg.csi.is_perfect:
        res = design.rates
    else:
        base = ergodic_rates(
            design.precoder,
            design.ris,
            estimate,
            cfg.csi,
            cfg.n_csi_eval_samples,
            np.random.default_rng([eval_seed]),
            cfg.sigma_z2,
        )
        plan = design.precoder.plan(truth.n_users)
        caps = np.zeros(plan.n_streams)
        if plan.scheme != "sdma":
            caps[plan.common_streams[0]] = base.common_rate
        if plan.scheme == "hrs":
            caps[1:1 + len(plan.groups)] = base.inner_common_rates
        table = greedy_allocation(caps, weights, plan)
        if plan.scheme == "sdma":
            res = base
        else:
            alloc = table[plan.common_streams[0]].copy()
            if plan.scheme == "noma":
                alloc = base.common_alloc
            inner = (
                table[1:1 + len(plan.groups)].sum(axis=0)
                if plan.scheme == "hrs" else None
            )
            user_totals = totals(base, alloc, inner)
            return user_totals, float(np.dot(weights, user_totals))
    return res.user_totals, float(np.dot(weights, res.user_totals))


def _corner_design(
    truth: ChannelSet,
    cfg: NetworkConfig,
    user: int,
    arch: Optional[str],
    seed: int,
) -> Tuple[float, DesignOutput]:
    """Single-user optimized rate (and design) with the other user silent."""
    sub_truth = ChannelSet(
        truth.H_d[:, [user]].copy(),
        truth.H_r[:, [user]].copy(),
        truth.G_chan.copy(),
    )
    sub_cfg = cfg.with_(n_users=1, scheme="sdma", groups=None)
    if cfg.csi.is_perfect:
        est = sub_truth
        samples = None
    else:
        est = apply_csi_error(
            sub_truth, cfg.csi, np.random.default_rng([seed, 7])
        )
        samples = None
        if cfg.csi_design == "robust":
            samples = draw_design_samples(
                est, cfg.csi, cfg.n_csi_design_samples,
                np.random.default_rng([seed, 8]),
            )
    design = alternating_optimize(
        est, sub_cfg, np.array([1.0]), scheme="sdma", arch=arch, seed=seed,
        design_samples=samples,
    )
    tot, _ = _evaluate_point(
        sub_truth, est, sub_cfg, design, np.array([1.0]), _derived_seed(seed, 11)
    )
    return float(tot[0]), design


def _embed_single_user(
    beam: np.ndarray, scheme: str, n_users: int, user: int,
    groups, order,
) -> np.ndarray:
    """Scheme-layout columns carrying one user's single-stream design."""
    plan = plan_for(scheme, n_users, groups=groups, order=order)
    cols = np.zeros((beam.shape[0], plan.n_streams), dtype=complex)
    if scheme == "noma":
        cols[:, user] = beam[:, 0]  # public noma layout is user-indexed
    else:
        cols[:, plan.priv_of[user]] = beam[:, 0]
    return cols


def rate_region(
    ch: Union[ChannelSet, Sequence[ChannelSet]],
    cfg: NetworkConfig,
    seed: int,
    scheme: Optional[str] = None,
    arch: Optional[str] = None,
    n_weights: Optional[int] = None,
) -> List[RegionPoint]:
    """Two-user rate-region sweep: one optimized point per weight vector plus
    the two single-user corner points (weight_idx -1 and -2).

    With a sequence of channel sets, points are averaged coordinate-wise at
    matched weight indices before being returned.  Under an imperfect-CSI
    config, designs are computed on a noisy estimate and evaluated
    ergodically around it.
    """
    if isinstance(ch, ChannelSet):
        channels = [ch]
    else:
        channels = list(ch)
        if not channels:
            raise ValueError("need at least one channel set")
    if channels[0].n_users != 2:
        raise UnsupportedConfigError("rate-region sweeps require K = 2 users")
    scheme = scheme or cfg.scheme
    n_w = n_weights or cfg.n_weights
    u_vecs = region_weight_vectors(n_w)
    arch_label = arch if arch is not None else cfg.arch

    acc: List[List[RegionPoint]] = []
    for c_idx, truth in enumerate(channels):
        ch_seed = _derived_seed(seed, c_idx)
        samples = None
        if cfg.csi.is_perfect:
            estimate = truth
        else:
            estimate = apply_csi_error(
                truth, cfg.csi, np.random.default_rng([ch_seed, 3])
            )
            if cfg.csi_design == "robust":
                samples = draw_design_samples(
                    estimate, cfg.csi, cfg.n_csi_design_samples,
                    np.random.default_rng([ch_seed, 4]),
                )
        # Corners first: the sweep endpoints warm-start from them, so the
        # u = (1, 0) and (0, 1) points agree with the single-user optima.
        corner_rate = {}
        corner_design = {}
        for user in (0, 1):
            corner_rate[user], corner_design[user] = _corner_design(
                truth, cfg, user, arch, _derived_seed(ch_seed, 100 + user)
            )
        pts: List[RegionPoint] = []
        for widx in range(n_w):
            u = u_vecs[widx]
            init_p = None
            init_r = None
            endpoint_user = 0 if widx == 0 else (1 if widx == n_w - 1 else None)
            if endpoint_user is not None:
                cd = corner_design[endpoint_user]
                init_p = _embed_single_user(
                    cd.precoder.P, scheme, 2, endpoint_user, cfg.groups, None
                )
                init_r = cd.ris.params if cd.ris.n_ris else None
            design = alternating_optimize(
                estimate, cfg, u, scheme=scheme, arch=arch,
                seed=_derived_seed(ch_seed, widx),
                init_precoder=init_p, init_ris_params=init_r,
                design_samples=samples,
            )
            tot, wsr = _evaluate_point(
                truth, estimate, cfg, design, u, _derived_seed(ch_seed, widx, 5)
            )
            pts.append(RegionPoint(
                weight_idx=widx, u1=float(u[0]), u2=float(u[1]),
                R1=float(tot[0]), R2=float(tot[1]), wsr=wsr,
                scheme=scheme, arch=arch_label,
                csi_alpha=cfg.csi.alpha, seed=seed,
            ))
        for corner, user in ((-1, 0), (-2, 1)):
            endpoint = pts[0].R1 if user == 0 else pts[n_w - 1].R2
            r = max(corner_rate[user], endpoint)  # best single-user design seen
            r1, r2 = (r, 0.0) if user == 0 else (0.0, r)
            pts.append(RegionPoint(
                weight_idx=corner, u1=1.0 - user, u2=float(user),
                R1=r1, R2=r2, wsr=r, scheme=scheme, arch=arch_label,
                csi_alpha=cfg.csi.alpha, seed=seed,
            ))
        acc.append(pts)

    if len(acc) == 1:
        return acc[0]
    out: List[RegionPoint] = []
    for slot in range(len(acc[0])):
        group = [run[slot] for run in acc]
        first = group[0]
        out.append(RegionPoint(
            weight_idx=first.weight_idx, u1=first.u1, u2=first.u2,
            R1=float(np.mean([p.R1 for p in group])),
            R2=float(np.mean([p.R2 for p in group])),
            wsr=float(np.mean([p.wsr for p in group])),
            scheme=first.scheme, arch=first.arch,
            csi_alpha=first.csi_alpha, seed=seed,
        ))
    return out


def pareto_frontier(points: Sequence[RegionPoint]) -> List[RegionPoint]:
    """Upper-right non-dominated subset, ordered by decreasing R1."""
    ordered = sorted(points, key=lambda p: (-p.R1, -p.R2))
    frontier: List[RegionPoint] = []
    best_r2 = -np.inf
    for p in ordered:
        if p.R2 > best_r2 + 1e-15:
            frontier.append(p)
            best_r2 = p.R2
    return frontier
