"""Channel generation: closed-form large-scale gains, fading statistics,
estimation-error injection, determinism."""
import numpy as np
import pytest

import risrsma as rr

# Closed-form oracle values, computed independently with mpmath at 40 digits:
#   sqrt(1e-3 * 50**-1.9)  and  sqrt(1e-3 * 10**-1.7) = 10**-2.35
PATHLOSS_50_19 = 7.690923576862050e-04
PATHLOSS_10_17 = 4.466835921509631e-03


def test_pathloss_reference_point():
    # -30 dB power gain at 1 m -> amplitude sqrt(1e-3)
    assert rr.pathloss_amplitude(1.0, 3.0, 1e-3) == pytest.approx(
        3.16228e-2, rel=1e-5
    )


def test_pathloss_closed_form_values():
    assert rr.pathloss_amplitude(50.0, 1.9, 1e-3) == pytest.approx(
        PATHLOSS_50_19, rel=1e-12
    )
    assert rr.pathloss_amplitude(10.0, 1.7, 1e-3) == pytest.approx(
        PATHLOSS_10_17, rel=1e-12
    )


def test_pathloss_rejects_bad_arguments():
    with pytest.raises(ValueError):
        rr.pathloss_amplitude(0.0, 3.0, 1e-3)
    with pytest.raises(ValueError):
        rr.pathloss_amplitude(-1.0, 3.0, 1e-3)
    with pytest.raises(ValueError):
        rr.pathloss_amplitude(1.0, 3.0, 0.0)
    with pytest.raises(ValueError):
        rr.pathloss_amplitude(1.0, -0.5, 1e-3)


def test_pathloss_monotone_in_distance_and_exponent():
    rng = np.random.default_rng(1)
    for _ in range(200):
        d = rng.uniform(1.01, 200.0)
        eps = rng.uniform(0.5, 4.0)
        assert rr.pathloss_amplitude(d * 1.1, eps, 1e-3) < rr.pathloss_amplitude(
            d, eps, 1e-3
        )
        assert rr.pathloss_amplitude(d, eps + 0.1, 1e-3) < rr.pathloss_amplitude(
            d, eps, 1e-3
        )


def _big_cfg(**kw):
    # Large user/antenna counts so one draw gives >= 1e5 entries.
    base = dict(
        n_aps=1, n_tx=200, n_users=500, n_ris=0, n_elements=0, arch="none",
        power_w=(1.0,),
    )
    base.update(kw)
    return rr.NetworkConfig(**base)


def test_direct_channels_match_closed_form_variance():
    cfg = _big_cfg()
    h = rr.gen_direct_channels(cfg, 123)
    assert h.shape == (200, 500)
    expected = 1e-3 * cfg.geometry.d_au ** -3.0
    emp = np.mean(np.abs(h) ** 2)
    assert emp == pytest.approx(expected, rel=0.02)


def test_direct_channels_with_explicit_d50():
    cfg = _big_cfg(geometry=rr.Geometry(d_ar=60.0, d_ru=10.0, d_au=50.0))
    h = rr.gen_direct_channels(cfg, 7)
    emp = np.mean(np.abs(h) ** 2)
    assert emp == pytest.approx(1e-3 * 50.0 ** -3.0, rel=0.02)


def test_direct_channels_vanishing_reference_gain():
    cfg = _big_cfg(fading=rr.FadingParams(zeta0=1e-300))
    h = rr.gen_direct_channels(cfg, 5)
    assert np.max(np.abs(h)) < 1e-100


def test_direct_channels_deterministic():
    cfg = _big_cfg(n_tx=4, n_users=3)
    a = rr.gen_direct_channels(cfg, 99)
    b = rr.gen_direct_channels(cfg, 99)
    assert np.array_equal(a, b)


def test_rician_pure_los_limit():
    amp = 0.5
    h = rr.gen_rician_channel(8, 8, amp, 1e9, np.random.default_rng(3))
    assert np.max(np.abs(h - amp)) < 1e-3 * amp


def test_rician_rayleigh_limit_power():
    amp = 0.25
    h = rr.gen_rician_channel(400, 250, amp, 0.0, np.random.default_rng(4))
    assert np.mean(np.abs(h) ** 2) == pytest.approx(amp**2, rel=0.02)


def test_rician_power_split_at_2db():
    kappa = rr.db_to_linear(2.0)
    h = rr.gen_rician_channel(400, 250, 1.0, kappa, np.random.default_rng(5))
    det = np.abs(np.mean(h)) ** 2            # all-ones LOS -> mean estimates it
    total = np.mean(np.abs(h) ** 2)
    assert det / total == pytest.approx(kappa / (1 + kappa), rel=0.02)
    assert kappa / (1 + kappa) == pytest.approx(0.6131, abs=2e-4)


def test_rician_rejects_negative_kappa():
    with pytest.raises(ValueError):
        rr.gen_rician_channel(2, 2, 1.0, -0.1, np.random.default_rng(0))


def test_csi_error_variance_rule():
    model = rr.CsiErrorModel.from_alpha(0.9, 1e-10)
    assert model.sigma_e2 == pytest.approx(1e-11, rel=1e-12)


def test_csi_perfect_estimate_identical():
    cfg = rr.NetworkConfig(n_elements=4)
    truth = rr.gen_channels(cfg, 11)
    est = rr.apply_csi_error(truth, rr.CsiErrorModel.perfect(), 0)
    assert np.array_equal(est.H_d, truth.H_d)
    assert np.array_equal(est.H_r, truth.H_r)
    assert np.array_equal(est.G_chan, truth.G_chan)


def test_csi_error_empirical_variance():
    cfg = _big_cfg(n_tx=200, n_users=500)
    truth = rr.gen_channels(cfg, 21)
    model = rr.CsiErrorModel.from_alpha(0.9, 1e-10)
    est = rr.apply_csi_error(truth, model, 31)
    diff = est.H_d - truth.H_d
    assert np.mean(np.abs(diff) ** 2) == pytest.approx(model.sigma_e2, rel=0.02)
    assert not np.shares_memory(est.H_d, truth.H_d)


def test_csi_error_hits_all_blocks():
    cfg = rr.NetworkConfig(n_elements=16)
    truth = rr.gen_channels(cfg, 2)
    model = rr.CsiErrorModel.from_alpha(0.5, 1e-10)
    est = rr.apply_csi_error(truth, model, 3)
    assert not np.array_equal(est.H_d, truth.H_d)
    assert not np.array_equal(est.H_r, truth.H_r)
    assert not np.array_equal(est.G_chan, truth.G_chan)


def test_gen_channels_deterministic_and_consistent():
    cfg = rr.NetworkConfig(n_elements=6)
    a = rr.gen_channels(cfg, 42)
    b = rr.gen_channels(cfg, 42)
    for name in ("H_d", "H_r", "G_chan"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert a.H_d.shape == (2, 2)
    assert a.H_r.shape == (6, 2)
    assert a.G_chan.shape == (6, 2)


def test_geometry_default_rule():
    g = rr.Geometry(d_ar=50.0, d_ru=10.0)
    assert g.d_au == pytest.approx(np.sqrt(50.0**2 - 10.0**2), rel=1e-14)
    with pytest.raises(rr.ConfigError):
        rr.Geometry(d_ar=5.0, d_ru=10.0)
