"""Stream plans: who decodes which stream, in what SIC order, and who may be
allocated a share of each shared stream's rate.

Every supported transmission scheme is an instance of the same structure:

* sdma        - K private streams, no SIC.
* rs1         - one shared stream decoded first by everyone, then K privates.
* hrs         - one outer shared stream (decoded by all), one inner shared
                stream per user group (decoded by that group), then privates;
                two SIC layers.
* noma (K=2)  - the first-decoded user's stream acts like a shared stream
                (decoded by both receivers, rate-capped by the worse one, and
                its rate belongs entirely to that user); the last-decoded
                user's stream is a private decoded interference-free.

The boolean tables built here drive both the rate formulas and the WMMSE
subproblem, so the schemes stay consistent by construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import UnsupportedConfigError


@dataclass(frozen=True)
class StreamPlan:
    scheme: str
    n_users: int
    n_streams: int
    labels: Tuple[str, ...]
    dec: np.ndarray        # (K, n_s) bool: user k decodes stream i
    intf: np.ndarray       # (K, n_s, n_s) bool: stream j interferes while k decodes i
    owner: np.ndarray      # (n_s,) int64: owning user of a private stream, else -1
    priv_of: np.ndarray    # (K,) int64: private stream of user k, -1 if none
    elig: np.ndarray       # (n_s, K) bool: users eligible for stream i's rate share
    groups: Optional[Tuple[Tuple[int, ...], ...]] = None
    order: Optional[Tuple[int, ...]] = None

    def __post_init__(self) -> None:
        for name in ("dec", "intf", "owner", "priv_of", "elig"):
            getattr(self, name).setflags(write=False)

    @property
    def common_streams(self) -> np.ndarray:
        return np.flatnonzero(self.owner < 0)


def _finalize(
    scheme: str,
    labels: Sequence[str],
    sic_pos: np.ndarray,
    owner: np.ndarray,
    elig: np.ndarray,
    groups=None,
    order=None,
) -> StreamPlan:
    """Derive decode and interference tables from per-user SIC positions.

    sic_pos[k, i] is the decode position of stream i at user k (-1 when user
    k never decodes stream i).  While decoding stream i, everything user k
    has not already removed - other same-position streams included - counts
    as interference.
    """
    k_users, n_s = sic_pos.shape
    dec = sic_pos >= 0
    intf = np.zeros((k_users, n_s, n_s), dtype=bool)
    for k in range(k_users):
        for i in range(n_s):
            if not dec[k, i]:
                continue
            for j in range(n_s):
                if j == i:
                    continue
                removed = dec[k, j] and sic_pos[k, j] < sic_pos[k, i]
                intf[k, i, j] = not removed
    priv_of = np.full(k_users, -1, dtype=np.int64)
    for i in range(n_s):
        if owner[i] >= 0:
            priv_of[owner[i]] = i
    return StreamPlan(
        scheme=scheme,
        n_users=k_users,
        n_streams=n_s,
        labels=tuple(labels),
        dec=dec,
        intf=intf,
        owner=owner,
        priv_of=priv_of,
        elig=elig,
        groups=groups,
        order=order,
    )


def plan_sdma(n_users: int) -> StreamPlan:
    n_s = n_users
    sic = np.full((n_users, n_s), -1, dtype=np.int64)
    owner = np.arange(n_s, dtype=np.int64)
    for k in range(n_users):
        sic[k, k] = 0
    elig = np.zeros((n_s, n_users), dtype=bool)
    labels = [f"p{k}" for k in range(n_users)]
    return _finalize("sdma", labels, sic, owner, elig)


def plan_rs1(n_users: int) -> StreamPlan:
    n_s = n_users + 1
    sic = np.full((n_users, n_s), -1, dtype=np.int64)
    owner = np.full(n_s, -1, dtype=np.int64)
    elig = np.zeros((n_s, n_users), dtype=bool)
    sic[:, 0] = 0                       # shared stream decoded first by all
    elig[0, :] = True
    for k in range(n_users):
        sic[k, 1 + k] = 1
        owner[1 + k] = k
    labels = ["c"] + [f"p{k}" for k in range(n_users)]
    return _finalize("rs1", labels, sic, owner, elig)


def plan_hrs(groups: Sequence[Sequence[int]]) -> StreamPlan:
    groups = tuple(tuple(int(k) for k in g) for g in groups)
    users = sorted(k for g in groups for k in g)
    n_users = len(users)
    if users != list(range(n_users)) or any(len(g) == 0 for g in groups):
        raise ValueError(f"groups must partition users 0..K-1, got {groups}")
    n_g = len(groups)
    n_s = 1 + n_g + n_users
    sic = np.full((n_users, n_s), -1, dtype=np.int64)
    owner = np.full(n_s, -1, dtype=np.int64)
    elig = np.zeros((n_s, n_users), dtype=bool)
    sic[:, 0] = 0                       # outer shared stream
    elig[0, :] = True
    for g, members in enumerate(groups):
        for k in members:
            sic[k, 1 + g] = 1           # own group's inner shared stream
            elig[1 + g, k] = True
    for k in range(n_users):
        sic[k, 1 + n_g + k] = 2
        owner[1 + n_g + k] = k
    labels = (
        ["c1"]
        + [f"c2g{g}" for g in range(n_g)]
        + [f"p{k}" for k in range(n_users)]
    )
    return _finalize("hrs", labels, sic, owner, elig, groups=groups)


def plan_noma(order: Sequence[int], n_users: int = 2) -> StreamPlan:
    """Two-user superposition with SIC; ``order`` lists users first-decoded
    to last-decoded.  Stream 0 carries the first user's message and must be
    decodable at both receivers; stream 1 is decoded after removing it."""
    if n_users != 2:
        raise UnsupportedConfigError(
            f"NOMA is implemented for K = 2 users, got K = {n_users}"
        )
    order = tuple(int(k) for k in order)
    if sorted(order) != [0, 1]:
        raise ValueError(f"order must be a permutation of (0, 1), got {order}")
    first, last = order
    n_s = 2
    sic = np.full((2, n_s), -1, dtype=np.int64)
    owner = np.array([-1, last], dtype=np.int64)
    elig = np.zeros((n_s, 2), dtype=bool)
    sic[first, 0] = 0
    sic[last, 0] = 0
    sic[last, 1] = 1
    elig[0, first] = True
    labels = [f"s{first}", f"s{last}"]
    return _finalize("noma", labels, sic, owner, elig, order=order)


def plan_for(
    scheme: str,
    n_users: int,
    groups: Optional[Sequence[Sequence[int]]] = None,
    order: Optional[Sequence[int]] = None,
) -> StreamPlan:
    if scheme == "sdma":
        return plan_sdma(n_users)
    if scheme == "rs1":
        return plan_rs1(n_users)
    if scheme == "hrs":
        if groups is None:
            raise ValueError("hrs plan needs user groups")
        return plan_hrs(groups)
    if scheme == "noma":
        if order is None:
            order = (0, 1)
        return plan_noma(order, n_users)
    raise ValueError(f"unknown scheme {scheme!r}")


def greedy_allocation(
    caps: np.ndarray, weights: np.ndarray, plan: StreamPlan
) -> np.ndarray:
    """Weighted-sum-rate-optimal split of shared-stream rates.

    Each shared stream's capped rate goes to its highest-weight eligible
    user; exact weight ties split evenly so statistically symmetric users
    stay symmetric.  Returns the (n_s, K) allocation table.
    """
    alloc = np.zeros((plan.n_streams, plan.n_users))
    for i in plan.common_streams:
        users = np.flatnonzero(plan.elig[i])
        if users.size == 0 or caps[i] <= 0.0:
            continue
        w = weights[users]
        best = users[np.abs(w - w.max()) <= 1e-15]
        alloc[i, best] = caps[i] / best.size
    return alloc
