"""Achievable-rate computation for all supported schemes.

Rates are spectral efficiencies in bit/s/Hz (base-2 logs, no bandwidth
scaling).  A stream decoded by several users is decodable at the rate of the
worst of them; that capped rate can then be split across the eligible users,
with the split carried separately from the raw per-user decode rates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .streams import StreamPlan, greedy_allocation, plan_for

_ALLOC_TOL = 1e-9


@dataclass
class Precoder:
    """Scheme-tagged precoding matrix with column roles.

    Column layout by scheme (all columns in C^{N*N_t}):
      rs1:  [shared, private_0, ..., private_{K-1}]
      hrs:  [outer shared, inner shared per group, private_0, ...]
      sdma: [private_0, ..., private_{K-1}]
      noma: [stream of user 0, stream of user 1] with ``order`` naming the
            decode order (first-decoded user first).

    ``common_alloc`` / ``inner_alloc`` record the intended per-user split of
    the shared-stream rates (bits); evaluation clips them to the realized
    caps.  Streams carry unit-power symbols, so the per-AP transmit power is
    the squared norm of that AP's row block across all columns.
    """

    scheme: str
    P: np.ndarray
    groups: Optional[Tuple[Tuple[int, ...], ...]] = None
    order: Optional[Tuple[int, ...]] = None
    common_alloc: Optional[np.ndarray] = None
    inner_alloc: Optional[np.ndarray] = None

    def plan(self, n_users: int) -> StreamPlan:
        return plan_for(self.scheme, n_users, groups=self.groups, order=self.order)


def stream_ordered_P(pre: "Precoder") -> np.ndarray:
    """Precoder columns in SIC-stream order.

    Public noma columns are user-indexed; the decode chain maps user
    order[i] to stream i.  Every other scheme's public layout already is
    the stream order.
    """
    if pre.scheme == "noma" and pre.order is not None:
        return pre.P[:, list(pre.order)]
    return pre.P


@dataclass(frozen=True)
class RateResult:
    """Per-user rate breakdown for one channel/precoder pair."""

    scheme: str
    common_rates_per_user: np.ndarray   # (K,) decode rates of the shared stream
    common_rate: float                  # min over users (0 when no shared stream)
    private_rates: np.ndarray           # (K,)
    common_alloc: np.ndarray            # (K,) share of common_rate per user
    user_totals: np.ndarray             # (K,)
    inner_common_rates: Optional[np.ndarray] = None      # (G,) group-capped
    inner_alloc: Optional[np.ndarray] = None             # (K,)
    groups: Optional[Tuple[Tuple[int, ...], ...]] = None


def per_ap_power(P: np.ndarray, n_aps: int, n_tx: int) -> np.ndarray:
    """Transmit power drawn from each AP: squared norm of its row block."""
    if P.shape[0] != n_aps * n_tx:
        raise ValueError(
            f"precoder has {P.shape[0]} rows, expected {n_aps * n_tx}"
        )
    blocks = P.reshape(n_aps, n_tx, -1)
    return np.sum(np.abs(blocks) ** 2, axis=(1, 2))


def stream_rate_table(
    H_eff: np.ndarray, P: np.ndarray, sigma_z2: float, plan: StreamPlan
) -> np.ndarray:
    """(K, n_s) decode rates in bits; zero where user k never decodes stream i."""
    if sigma_z2 < 0:
        raise ValueError(f"noise power must be nonnegative, got {sigma_z2}")
    if H_eff.shape[0] != P.shape[0]:
        raise ValueError(
            f"channel rows {H_eff.shape[0]} != precoder rows {P.shape[0]}"
        )
    if H_eff.shape[1] != plan.n_users or P.shape[1] != plan.n_streams:
        raise ValueError(
            f"shapes ({H_eff.shape}, {P.shape}) inconsistent with plan "
            f"K={plan.n_users}, n_s={plan.n_streams}"
        )
    s_pow = np.abs(H_eff.conj().T @ P) ** 2        # (K, n_s)
    rates = np.zeros((plan.n_users, plan.n_streams))
    for k in range(plan.n_users):
        for i in range(plan.n_streams):
            if not plan.dec[k, i]:
                continue
            denom = float(s_pow[k][plan.intf[k, i]].sum()) + sigma_z2
            rates[k, i] = np.log2(1.0 + s_pow[k, i] / denom)
    return rates


def stream_caps(rates: np.ndarray, plan: StreamPlan) -> np.ndarray:
    """Decodable rate per stream: min over its decoders (0 if undrecoded)."""
    caps = np.zeros(plan.n_streams)
    for i in range(plan.n_streams):
        decoders = np.flatnonzero(plan.dec[:, i])
        if decoders.size:
            caps[i] = rates[decoders, i].min()
    return caps


def _clip_alloc(requested: Optional[np.ndarray], cap: float, k: int) -> np.ndarray:
    """Scale a requested split down to the realized cap (never up)."""
    if requested is None:
        return np.zeros(k)
    a = np.clip(np.asarray(requested, dtype=np.float64), 0.0, None)
    total = a.sum()
    if total > cap:
        a = a * (cap / total) if total > 0 else np.zeros(k)
    return a


def _result_from_tables(
    rates: np.ndarray, plan: StreamPlan, pre: Precoder
) -> RateResult:
    k = plan.n_users
    caps = stream_caps(rates, plan)
    private = np.zeros(k)
    for u in range(k):
        if plan.priv_of[u] >= 0:
            private[u] = rates[u, plan.priv_of[u]]

    if plan.scheme == "sdma":
        zeros = np.zeros(k)
        return RateResult(
            scheme="sdma",
            common_rates_per_user=zeros,
            common_rate=0.0,
            private_rates=private,
            common_alloc=zeros.copy(),
            user_totals=private.copy(),
        )

    if plan.scheme == "noma":
        first = plan.order[0]
        alloc = np.zeros(k)
        alloc[first] = caps[0]
        totals = alloc + private
        return RateResult(
            scheme="noma",
            common_rates_per_user=rates[:, 0].copy(),
            common_rate=float(caps[0]),
            private_rates=private,
            common_alloc=alloc,
            user_totals=totals,
        )

    if plan.scheme == "rs1":
        alloc = _clip_alloc(pre.common_alloc, caps[0], k)
        return RateResult(
            scheme="rs1",
            common_rates_per_user=rates[:, 0].copy(),
            common_rate=float(caps[0]),
            private_rates=private,
            common_alloc=alloc,
            user_totals=alloc + private,
        )

    # hrs: outer shared stream plus one inner shared stream per group
    n_g = len(plan.groups)
    alloc = _clip_alloc(pre.common_alloc, caps[0], k)
    inner_caps = caps[1:1 + n_g]
    inner = np.zeros(k)
    if pre.inner_alloc is not None:
        req = np.clip(np.asarray(pre.inner_alloc, dtype=np.float64), 0.0, None)
        for g, members in enumerate(plan.groups):
            members = list(members)
            total = req[members].sum()
            if total > inner_caps[g] > 0:
                inner[members] = req[members] * (inner_caps[g] / total)
            elif total <= inner_caps[g]:
                inner[members] = req[members]
    return RateResult(
        scheme="hrs",
        common_rates_per_user=rates[:, 0].copy(),
        common_rate=float(caps[0]),
        private_rates=private,
        common_alloc=alloc,
        user_totals=alloc + inner + private,
        inner_common_rates=inner_caps.copy(),
        inner_alloc=inner,
        groups=plan.groups,
    )


def compute_rates(
    H_eff: np.ndarray, pre: Precoder, sigma_z2: float
) -> RateResult:
    """Scheme-dispatching rate evaluation."""
    plan = pre.plan(H_eff.shape[1])
    rates = stream_rate_table(H_eff, stream_ordered_P(pre), sigma_z2, plan)
    return _result_from_tables(rates, plan, pre)


def rate_rs1(H_eff: np.ndarray, pre: Precoder, sigma_z2: float) -> RateResult:
    """Rates under one shared stream decoded first by every user."""
    if pre.scheme != "rs1":
        raise ValueError(f"expected an rs1 precoder, got {pre.scheme!r}")
    return compute_rates(H_eff, pre, sigma_z2)


def rate_hrs(H_eff: np.ndarray, pre: Precoder, sigma_z2: float) -> RateResult:
    """Rates under the two-layer scheme (outer + per-group inner sharing)."""
    if pre.scheme != "hrs":
        raise ValueError(f"expected an hrs precoder, got {pre.scheme!r}")
    if not pre.groups:
        raise ValueError("hrs precoder must carry its user groups")
    return compute_rates(H_eff, pre, sigma_z2)


def rate_sdma(H_eff: np.ndarray, pre: Precoder, sigma_z2: float) -> RateResult:
    """Linear precoding with all interference treated as noise."""
    if pre.scheme != "sdma":
        raise ValueError(f"expected an sdma precoder, got {pre.scheme!r}")
    return compute_rates(H_eff, pre, sigma_z2)


def rate_noma(H_eff: np.ndarray, pre: Precoder, sigma_z2: float) -> RateResult:
    """Two-user superposition with SIC in the precoder's decode order.

    The first-decoded stream must be decodable at both receivers, so its
    rate is the min of the two decode rates and belongs to its user.
    """
    if pre.scheme != "noma":
        raise ValueError(f"expected a noma precoder, got {pre.scheme!r}")
    return compute_rates(H_eff, pre, sigma_z2)


def totals(
    res: RateResult,
    alloc: np.ndarray,
    inner_alloc: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Per-user totals under an explicit shared-rate split.

    Raises if the split is negative or exceeds a decodability cap; the inner
    split defaults to the one recorded in the result.
    """
    alloc = np.asarray(alloc, dtype=np.float64)
    k = res.private_rates.shape[0]
    if alloc.shape != (k,):
        raise ValueError(f"alloc must have shape ({k},), got {alloc.shape}")
    if np.any(alloc < -_ALLOC_TOL):
        raise ValueError("allocation entries must be nonnegative")
    if alloc.sum() > res.common_rate + _ALLOC_TOL:
        raise ValueError(
            f"allocation sum {alloc.sum():.6g} exceeds the common-rate cap "
            f"{res.common_rate:.6g}"
        )
    inner = np.zeros(k)
    if res.scheme == "hrs":
        inner = res.inner_alloc if inner_alloc is None else np.asarray(
            inner_alloc, dtype=np.float64
        )
        if inner.shape != (k,):
            raise ValueError(f"inner_alloc must have shape ({k},)")
        if np.any(inner < -_ALLOC_TOL):
            raise ValueError("inner allocation entries must be nonnegative")
        for g, members in enumerate(res.groups):
            members = list(members)
            if inner[members].sum() > res.inner_common_rates[g] + _ALLOC_TOL:
                raise ValueError(
                    f"inner allocation of group {g} exceeds its cap "
                    f"{res.inner_common_rates[g]:.6g}"
                )
    return alloc + inner + res.private_rates


def wsr_from_tables(
    rates: np.ndarray, weights: np.ndarray, plan: StreamPlan
) -> float:
    """Weighted sum rate (bits) with the greedy shared-rate split."""
    caps = stream_caps(rates, plan)
    alloc = greedy_allocation(caps, weights, plan)
    total = alloc.sum(axis=0)
    for u in range(plan.n_users):
        if plan.priv_of[u] >= 0:
            total[u] += rates[u, plan.priv_of[u]]
    return float(np.dot(weights, total))
