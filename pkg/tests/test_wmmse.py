"""Precoder optimization: optimality on known cases, trace monotonicity,
power feasibility, and the brute-force grid oracle."""
import numpy as np
import pytest

import risrsma as rr

SCALAR_CFG = dict(
    n_aps=1, n_tx=1, n_users=2, n_ris=0, n_elements=0, arch="none",
    power_w=(1.0,), sigma_z2=1.0,
)


def grid_oracle_wsr(h_abs2, p_total, sigma2, res=1e-3):
    """Exhaustive weighted-sum-rate over the (common, private, private)
    power simplex for equal weights, scalar channels.

    Independent of the WMMSE path: direct SINR evaluation on a grid.
    """
    best = 0.0
    h1, h2 = h_abs2
    for qc in np.arange(0.0, 1.0 + res / 2, res):
        rem = p_total * (1.0 - qc)
        q1 = np.arange(0.0, rem + res * p_total / 2, res * p_total)
        q2 = rem - q1
        pc = p_total * qc
        rc = np.minimum(
            np.log2(1 + pc * h1 / ((q1 + q2) * h1 + sigma2)),
            np.log2(1 + pc * h2 / ((q1 + q2) * h2 + sigma2)),
        )
        rp1 = np.log2(1 + q1 * h1 / (q2 * h1 + sigma2))
        rp2 = np.log2(1 + q2 * h2 / (q1 * h2 + sigma2))
        val = float(np.max(rc + rp1 + rp2))
        if val > best:
            best = val
    return best


def test_single_user_mrt_is_optimal():
    cfg = rr.NetworkConfig(
        n_aps=1, n_tx=2, n_users=1, n_ris=0, n_elements=0, arch="none",
        power_w=(1.0,), sigma_z2=1.0,
    )
    h = np.array([[1.0], [0.0]], dtype=complex)
    res = rr.wmmse_precoder(h, [1.0], cfg, "sdma")
    assert res.wsr == pytest.approx(1.0, abs=1e-6)
    p = res.precoder.P[:, 0]
    assert abs(p[0]) == pytest.approx(1.0, abs=1e-3)
    assert abs(p[1]) < 1e-3


def test_single_user_rs1_splits_freely():
    # with one user the shared/private split is rate-neutral; the total must
    # still hit the single-user capacity
    cfg = rr.NetworkConfig(
        n_aps=1, n_tx=2, n_users=1, n_ris=0, n_elements=0, arch="none",
        power_w=(1.0,), sigma_z2=1.0,
    )
    h = np.array([[1.0], [0.0]], dtype=complex)
    res = rr.wmmse_precoder(h, [1.0], cfg, "rs1")
    assert res.wsr == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("scheme", ["rs1", "sdma", "noma", "hrs"])
def test_trace_monotone_all_schemes(scheme):
    rng = np.random.default_rng(17)
    groups = ((0,), (1,)) if scheme == "hrs" else None
    cfg = rr.NetworkConfig(
        n_aps=1, n_tx=2, n_users=2, n_ris=0, n_elements=0, arch="none",
        power_w=(1.0,), sigma_z2=1.0, groups=groups,
        scheme=scheme,
    )
    for _ in range(25):
        h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        u = rng.uniform(0.1, 1.0, size=2)
        res = rr.wmmse_precoder(h, u, cfg, scheme)
        assert np.all(np.diff(res.trace) >= -1e-8), f"trace dipped: {res.trace}"


def test_power_constraint_respected():
    rng = np.random.default_rng(23)
    cfg = rr.NetworkConfig(
        n_aps=2, n_tx=2, n_users=2, n_ris=0, n_elements=0, arch="none",
        power_w=(0.6, 0.4), sigma_z2=1e-2,
    )
    for _ in range(10):
        h = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
        res = rr.wmmse_precoder(h, [1.0, 0.7], cfg, "rs1")
        pw = rr.per_ap_power(res.precoder.P, 2, 2)
        assert pw[0] <= 0.6 + 1e-9
        assert pw[1] <= 0.4 + 1e-9


def test_alloc_respects_common_cap():
    rng = np.random.default_rng(5)
    cfg = rr.NetworkConfig(**SCALAR_CFG)
    h = rng.standard_normal((1, 2)) + 1j * rng.standard_normal((1, 2))
    res = rr.wmmse_precoder(h, [1.0, 1.0], cfg, "rs1")
    rates = rr.rate_rs1(h, res.precoder, cfg.sigma_z2)
    assert res.common_alloc.sum() <= rates.common_rate + 1e-9
    assert np.all(res.common_alloc >= 0)


def test_matches_grid_oracle_spec_instance():
    cfg = rr.NetworkConfig(**SCALAR_CFG)
    h = np.array([[1.0, 0.5]], dtype=complex)
    res = rr.wmmse_precoder(h, [1.0, 1.0], cfg, "rs1")
    oracle = grid_oracle_wsr((1.0, 0.25), 1.0, 1.0)
    assert res.wsr >= oracle - 1e-2


def test_weights_validation():
    cfg = rr.NetworkConfig(**SCALAR_CFG)
    h = np.ones((1, 2), dtype=complex)
    with pytest.raises(ValueError):
        rr.wmmse_precoder(h, [0.0, 0.0], cfg, "rs1")
    with pytest.raises(ValueError):
        rr.wmmse_precoder(h, [-1.0, 1.0], cfg, "rs1")


def test_warm_start_never_hurts():
    rng = np.random.default_rng(31)
    cfg = rr.NetworkConfig(**SCALAR_CFG)
    h = rng.standard_normal((1, 2)) + 1j * rng.standard_normal((1, 2))
    first = rr.wmmse_precoder(h, [1.0, 1.0], cfg, "rs1")
    again = rr.wmmse_precoder(h, [1.0, 1.0], cfg, "rs1", init=first.precoder.P)
    assert again.wsr >= first.wsr - 1e-9


def test_hrs_two_groups_of_two():
    rng = np.random.default_rng(41)
    cfg = rr.NetworkConfig(
        n_aps=1, n_tx=4, n_users=4, n_ris=0, n_elements=0, arch="none",
        power_w=(1.0,), sigma_z2=1e-1, groups=((0, 1), (2, 3)), scheme="hrs",
    )
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    res = rr.wmmse_precoder(h, np.ones(4), cfg, "hrs")
    assert np.all(np.diff(res.trace) >= -1e-8)
    assert res.wsr > 0
    rates = rr.rate_hrs(h, res.precoder, cfg.sigma_z2)
    assert res.common_alloc.sum() <= rates.common_rate + 1e-9
    for g, members in enumerate(((0, 1), (2, 3))):
        assert res.inner_alloc[list(members)].sum() <= (
            rates.inner_common_rates[g] + 1e-9
        )
