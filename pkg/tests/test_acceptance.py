"""Acceptance suite: one check per headline guarantee, each printing a
PASS/FAIL line.  The Monte Carlo ensemble (50 channel draws at the headline
network parameters, 21-point weight sweeps, cross-scheme warm starts, no-RIS
and imperfect-CSI variants) is computed once and shared.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines live.
"""
import os
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

import risrsma as rr
from risrsma.ris import RisArchitecture

sys.path.insert(0, str(Path(__file__).resolve().parent))
from acceptance_ensemble import (  # noqa: E402
    EQUAL_WEIGHT_IDX,
    MASTER_SEED,
    compute_ensemble,
    fig2_cfg,
    refine_rs_from,
    rs_init_from_sdma,
)

N_RUNS = 50
N_JOBS = max(1, min(int(os.environ.get("RISRSMA_TEST_JOBS", "2")), os.cpu_count() or 1))


def _check(name: str, passed: bool, detail: str = "") -> None:
    tag = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[ACCEPTANCE] {name}: {tag}{suffix}")
    assert passed, f"{name}: {detail}"


@pytest.fixture(scope="session")
def ensemble():
    return compute_ensemble(N_RUNS, jobs=N_JOBS)


# --------------------------------------------------------------------------
# 1. WMMSE monotonicity
# --------------------------------------------------------------------------


def test_wmmse_monotonicity_100_instances():
    rng = np.random.default_rng(MASTER_SEED)
    worst = np.inf
    for i in range(100):
        h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        u = rng.uniform(0.05, 1.0, size=2)
        for scheme in ("rs1", "sdma", "noma", "hrs"):
            cfg = rr.NetworkConfig(
                n_aps=1, n_tx=2, n_users=2, n_ris=0, n_elements=0,
                arch="none", power_w=(1.0,), sigma_z2=1.0,
                groups=((0,), (1,)) if scheme == "hrs" else None,
            )
            res = rr.wmmse_precoder(h, u, cfg, scheme)
            if len(res.trace) > 1:
                worst = min(worst, float(np.min(np.diff(res.trace))))
    _check(
        "wmmse-monotonicity (100 seeded instances, all schemes)",
        worst >= -1e-8,
        f"worst per-iteration change {worst:.3e} >= -1e-8",
    )


# --------------------------------------------------------------------------
# 2. Formula correctness
# --------------------------------------------------------------------------


def test_rate_formula_correctness():
    ok = True
    details = []

    h2 = np.eye(2, dtype=complex)
    pre_c = rr.Precoder(
        "rs1", np.array([[2**-0.5, 0, 0], [2**-0.5, 0, 0]], dtype=complex)
    )
    res = rr.rate_rs1(h2, pre_c, 1.0)
    ok &= bool(np.all(np.abs(res.common_rates_per_user - np.log2(1.5)) <= 1e-9))

    pre_p = rr.Precoder(
        "rs1", np.array([[0, 1, 0], [0, 0, 1]], dtype=complex)
    )
    res_p = rr.rate_rs1(h2, pre_p, 1.0)
    ok &= bool(np.all(np.abs(res_p.private_rates - 1.0) <= 1e-9))

    h1 = np.array([[1.0 + 0j]])
    res_1 = rr.rate_rs1(
        h1, rr.Precoder("rs1", np.array([[0.0, 1.0]], dtype=complex)), 1.0
    )
    ok &= abs(res_1.private_rates[0] - 1.0) <= 1e-9 and res_1.common_rate == 0.0

    hn = np.array([[1.0 + 0j, 1.0 + 0j]])
    res_n = rr.rate_noma(
        hn, rr.Precoder("noma", np.array([[1.0, 1.0]], dtype=complex), order=(0, 1)),
        1.0,
    )
    ok &= abs(res_n.user_totals[0] - np.log2(1.5)) <= 1e-9
    ok &= abs(res_n.user_totals[1] - 1.0) <= 1e-9

    cols = np.zeros((2, 5), dtype=complex)
    cols[:, 0] = [1.0, 0.0]
    cols[:, 3] = [0.5, 0.0]
    cols[:, 4] = [0.0, 0.5]
    res_h = rr.rate_hrs(
        h2, rr.Precoder("hrs", cols, groups=((0,), (1,))), 1.0
    )
    ok &= abs(res_h.common_rates_per_user[0] - np.log2(1.8)) <= 1e-9
    ok &= res_h.common_rates_per_user[1] == 0.0 and res_h.common_rate == 0.0

    rng = np.random.default_rng(2)
    exact = True
    for _ in range(50):
        h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        p = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        sd = rr.rate_sdma(h, rr.Precoder("sdma", p.copy()), 0.3)
        rs = rr.rate_rs1(
            h, rr.Precoder("rs1", np.hstack([np.zeros((2, 1)), p])), 0.3
        )
        exact &= bool(np.array_equal(sd.private_rates, rs.private_rates))
        p_c = rng.standard_normal((2, 1)) + 1j * rng.standard_normal((2, 1))
        hr = rr.rate_hrs(
            h,
            rr.Precoder("hrs", np.hstack([p_c, np.zeros((2, 2)), p]),
                        groups=((0,), (1,))),
            0.3,
        )
        r1 = rr.rate_rs1(h, rr.Precoder("rs1", np.hstack([p_c, p])), 0.3)
        exact &= bool(
            np.array_equal(hr.common_rates_per_user, r1.common_rates_per_user)
        )
        exact &= bool(np.array_equal(hr.private_rates, r1.private_rates))
    ok &= exact
    details.append("hand values to 1e-9, reductions exact")
    _check("rate-formula-correctness", bool(ok), "; ".join(details))


# --------------------------------------------------------------------------
# 3. Grid-oracle equivalence
# --------------------------------------------------------------------------


def _grid_oracle_equal_weights(h_abs2, p_total, sigma2, res=1e-3):
    """Brute-force simplex grid over (shared, private, private) powers."""
    h1, h2 = h_abs2
    best = 0.0
    for qc in np.arange(0.0, 1.0 + res / 2, res):
        rem = (1.0 - qc) * p_total
        q1 = np.arange(0.0, rem + res * p_total / 2, res * p_total)
        q2 = rem - q1
        pc = qc * p_total
        rc = np.minimum(
            np.log2(1 + pc * h1 / ((q1 + q2) * h1 + sigma2)),
            np.log2(1 + pc * h2 / ((q1 + q2) * h2 + sigma2)),
        )
        rp1 = np.log2(1 + q1 * h1 / (q2 * h1 + sigma2))
        rp2 = np.log2(1 + q2 * h2 / (q1 * h2 + sigma2))
        cand = float(np.max(rc + rp1 + rp2))
        if cand > best:
            best = cand
    return best


def test_grid_oracle_equivalence_20_instances():
    rng = np.random.default_rng(MASTER_SEED + 3)
    cfg = rr.NetworkConfig(
        n_aps=1, n_tx=1, n_users=2, n_ris=0, n_elements=0, arch="none",
        power_w=(1.0,), sigma_z2=1.0,
    )
    worst = np.inf
    for _ in range(20):
        h = rng.standard_normal((1, 2)) + 1j * rng.standard_normal((1, 2))
        res = rr.wmmse_precoder(h, [1.0, 1.0], cfg, "rs1")
        oracle = _grid_oracle_equal_weights(
            tuple(np.abs(h[0]) ** 2), 1.0, 1.0
        )
        worst = min(worst, res.wsr - oracle)
    _check(
        "grid-oracle-equivalence (20 scalar instances)",
        worst >= -1e-2,
        f"worst WSR shortfall vs grid {worst:.3e} >= -1e-2",
    )


# --------------------------------------------------------------------------
# 4. Manifold residuals
# --------------------------------------------------------------------------


def test_manifold_residuals_random_builds(ensemble):
    rng = np.random.default_rng(MASTER_SEED + 4)
    archs = [
        RisArchitecture.single(20),
        RisArchitecture.grouped((3, 2, 3)),
        RisArchitecture.fully(6),
    ]
    worst = 0.0
    for arch in archs:
        for _ in range(1000):
            ris = rr.build_from_params(arch, rr.random_params(arch, 1, rng))
            worst = max(worst, rr.validate(ris).residual)
    pipeline_worst = max(run["max_residual"] for run in ensemble)
    worst = max(worst, pipeline_worst)
    _check(
        "manifold-residuals (1000 builds/arch + pipeline outputs)",
        worst <= 1e-9,
        f"max residual {worst:.3e} <= 1e-9",
    )


# --------------------------------------------------------------------------
# 5. Co-phasing optimum
# --------------------------------------------------------------------------


def test_cophasing_optimum_50_instances():
    rng = np.random.default_rng(MASTER_SEED + 5)
    cfg = rr.NetworkConfig(
        n_users=1, n_tx=1, n_aps=1, power_w=(1.0,), sigma_z2=1.0,
        n_ris=1, n_elements=1, arch="single", scheme="sdma",
    )
    worst = 0.0
    for _ in range(50):
        h_d = rng.standard_normal() + 1j * rng.standard_normal()
        h_r = rng.standard_normal() + 1j * rng.standard_normal()
        g = rng.standard_normal() + 1j * rng.standard_normal()
        ch = rr.ChannelSet(
            np.array([[h_d]]), np.array([[h_r]]), np.array([[g]])
        )
        pre = rr.Precoder("sdma", np.array([[1.0 + 0j]]))
        ris0 = rr.build_single_connected(rng.uniform(0, 2 * np.pi, 1))
        ris = rr.optimize_ris(ch, pre, ris0, [1.0], cfg)
        h_eff = rr.effective_channels(ch, ris)
        worst = max(worst, abs(abs(h_eff[0, 0]) - (abs(h_d) + abs(h_r * g))))
    _check(
        "co-phasing-optimum (50 scalar instances)",
        worst <= 1e-3,
        f"max |h_eff| shortfall {worst:.3e} <= 1e-3",
    )


# --------------------------------------------------------------------------
# 6. Embedding dominance + frontier enclosure
# --------------------------------------------------------------------------


def test_embedding_dominance_sdma(ensemble):
    worst = min(
        float(np.min(run["rs_from_sdma"] - run["sdma"])) for run in ensemble
    )
    _check(
        "embedding-dominance-sdma (50 runs x 21 weights)",
        worst >= -1e-6,
        f"min (RS-from-SDMA - SDMA) WSR {worst:.3e} >= -1e-6",
    )


def test_embedding_dominance_noma(ensemble):
    worst = min(
        float(np.min(run["rs_from_noma"] - run["noma"])) for run in ensemble
    )
    _check(
        "embedding-dominance-noma (50 runs x 21 weights)",
        worst >= -1e-6,
        f"min (RS-from-NOMA - NOMA) WSR {worst:.3e} >= -1e-6",
    )


def test_rs_frontier_encloses_baselines(ensemble):
    rs_best = np.mean(
        [np.maximum.reduce([r["rs_plain"], r["rs_from_sdma"], r["rs_from_noma"]])
         for r in ensemble],
        axis=0,
    )
    sdma = np.mean([r["sdma"] for r in ensemble], axis=0)
    noma = np.mean([r["noma"] for r in ensemble], axis=0)
    margin = float(np.min(np.minimum(rs_best - sdma, rs_best - noma)))
    _check(
        "rs-frontier-encloses-baselines (ensemble means, all weights)",
        margin >= -1e-6,
        f"min averaged WSR margin {margin:.3e} >= -1e-6",
    )


# --------------------------------------------------------------------------
# 7. RIS benefit
# --------------------------------------------------------------------------


def test_ris_benefit_at_equal_weights(ensemble):
    diffs = np.array([r["sum_ris"] - r["sum_noris"] for r in ensemble])
    n = len(diffs)
    t_crit = stats.t.ppf(0.95, n - 1)
    lower = float(np.mean(diffs) - t_crit * np.std(diffs, ddof=1) / np.sqrt(n))
    _check(
        "ris-benefit (equal-weight sum rate, one-sided 95%)",
        lower > 0.0,
        f"mean gain {np.mean(diffs):.3f} bit/s/Hz, 95% lower bound {lower:.3f} > 0",
    )


# --------------------------------------------------------------------------
# 8. Robustness trend under imperfect CSI
# --------------------------------------------------------------------------


def test_robustness_gap_grows_under_csi_error(ensemble):
    # alpha = 0.9 link-scaled estimation error, 2000-sample ergodic
    # evaluation; paired against the perfect-CSI gap of the same runs.
    deltas = np.array([r["gap_imp"] - r["gap_perf"] for r in ensemble])
    n = len(deltas)
    t_crit = stats.t.ppf(0.95, n - 1)
    lower = float(np.mean(deltas) - t_crit * np.std(deltas, ddof=1) / np.sqrt(n))
    _check(
        "robustness-gap-trend (RS-SDMA gap, imperfect vs perfect, 95%)",
        lower >= 0.0,
        f"mean gap growth {np.mean(deltas):.3f} bit/s/Hz, 95% lower bound "
        f"{lower:.3f} >= 0",
    )


# --------------------------------------------------------------------------
# 9. Architecture dominance
# --------------------------------------------------------------------------


def test_architecture_dominance_fully_vs_single():
    cfg = fig2_cfg(n_elements=8)
    worst = np.inf
    for inst in range(20):
        truth = rr.gen_channels(
            cfg, np.random.default_rng([MASTER_SEED, 900 + inst])
        )
        single = rr.alternating_optimize(
            truth, cfg, [0.5, 0.5], scheme="rs1", arch="single",
            seed=MASTER_SEED + inst,
        )
        preimage = rr.single_to_group_params(
            single.ris.params, RisArchitecture.fully(8)
        )
        fully = refine_rs_from(
            truth, cfg.with_(arch="fully"), [0.5, 0.5],
            MASTER_SEED + 500 + inst, single.precoder.P, preimage,
        )
        worst = min(worst, fully.wsr - single.wsr)
    _check(
        "architecture-dominance (fully vs single, 20 instances, M=8)",
        worst >= -1e-4,
        f"min (fully - single) WSR {worst:.3e} >= -1e-4",
    )


# --------------------------------------------------------------------------
# 10. End-to-end determinism
# --------------------------------------------------------------------------


def test_end_to_end_determinism(tmp_path):
    cfg = fig2_cfg(
        n_elements=4, n_weights=5, mc_runs=2,
        optimizer=rr.OptimizerSettings(
            restarts=1, max_outer_iters=3, max_wmmse_iters=30
        ),
        seed=77,
    )
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    rr.run_experiment(cfg, ["rs1", "sdma"], ["single", "none"], str(out1))
    rr.run_experiment(cfg, ["rs1", "sdma"], ["single", "none"], str(out2))
    identical = out1.read_bytes() == out2.read_bytes()
    _check(
        "end-to-end-determinism (reduced config, run twice)",
        identical,
        f"{out1.stat().st_size} bytes, byte-identical={identical}",
    )


# --------------------------------------------------------------------------
# Supporting ensemble property (not a headline criterion): statistically
# symmetric users give a near-symmetric averaged region boundary.
# --------------------------------------------------------------------------


def test_region_symmetry_of_ensemble(ensemble):
    r1 = np.mean([r["r1_rs"] for r in ensemble], axis=0)
    r2 = np.mean([r["r2_rs"] for r in ensemble], axis=0)
    mirrored = r2[::-1]
    mask = (r1 > 0.2) & (mirrored > 0.2)
    rel = np.abs(r1[mask] - mirrored[mask]) / np.maximum(r1[mask], mirrored[mask])
    assert float(np.mean(rel)) < 0.05, f"mean asymmetry {np.mean(rel):.3f}"
