"""Propagation channel generation.

Three channel blocks make up one network realization:

* ``H_d``   (N*N_t x K)  direct AP->user channels, Rayleigh fading,
* ``H_r``   (L*M  x K)  RIS->user channels, Rician fading,
* ``G_chan``(L*M  x N*N_t) AP->RIS channel, Rician fading.

Large-scale fading multiplies each entry by sqrt(zeta0 * d^-eps).  The Rician
LOS component is the deterministic all-ones rank-one matrix (broadside
steering with unit phase); alternates such as a random-phase LOS can be
swapped in here without touching callers.

All generators are pure functions of (config, random source): the same seed
gives bit-identical output.  Imperfect channel knowledge is modeled by adding
i.i.d. circularly-symmetric Gaussian errors of variance sigma_e2 to every
entry of every block.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .config import CsiErrorModel, NetworkConfig

RandomSource = Union[int, np.random.Generator]


def as_rng(rng: RandomSource) -> np.random.Generator:
    """Normalize an int seed or Generator into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class ChannelSet:
    """One realization of all propagation channels.

    Column k of H_d / H_r is the channel of user k; G_chan maps AP antennas
    to RIS elements.  Arrays are treated as immutable after construction.
    """

    H_d: np.ndarray      # (N*N_t, K) complex
    H_r: np.ndarray      # (L*M, K) complex
    G_chan: np.ndarray   # (L*M, N*N_t) complex

    def __post_init__(self) -> None:
        n_tx = self.H_d.shape[0]
        k = self.H_d.shape[1]
        lm = self.H_r.shape[0]
        if self.H_r.shape[1] != k:
            raise ValueError(
                f"H_r has {self.H_r.shape[1]} user columns, H_d has {k}"
            )
        if self.G_chan.shape != (lm, n_tx):
            raise ValueError(
                f"G_chan shape {self.G_chan.shape} inconsistent with "
                f"H_r rows {lm} and H_d rows {n_tx}"
            )
        for name in ("H_d", "H_r", "G_chan"):
            arr = getattr(self, name)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
            arr.setflags(write=False)

    @property
    def n_users(self) -> int:
        return self.H_d.shape[1]


def pathloss_amplitude(d: float, eps: float, zeta0: float) -> float:
    """Amplitude gain sqrt(zeta0 * d^-eps) of a link of length d meters."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    if zeta0 <= 0:
        raise ValueError(f"zeta0 must be positive, got {zeta0}")
    if eps <= 0:
        raise ValueError(f"path-loss exponent must be positive, got {eps}")
    return float(np.sqrt(zeta0 * d ** (-eps)))


def _cn01(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. CN(0, 1) matrix."""
    return (
        rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    ) / np.sqrt(2.0)


def gen_direct_channels(cfg: NetworkConfig, rng: RandomSource) -> np.ndarray:
    """Rayleigh-fading AP->user block: entries i.i.d. CN(0, amp^2) with
    amp = pathloss_amplitude(d_au, eps_au, zeta0)."""
    rng = as_rng(rng)
    amp = pathloss_amplitude(cfg.geometry.d_au, cfg.fading.eps_au, cfg.fading.zeta0)
    return amp * _cn01(cfg.n_tx_total, cfg.n_users, rng)


def gen_rician_channel(
    rows: int,
    cols: int,
    amp: float,
    kappa: float,
    rng: RandomSource,
    los: str = "ones",
) -> np.ndarray:
    """Rician-fading matrix amp*(sqrt(k/(1+k)) * LOS + sqrt(1/(1+k)) * CN(0,1)).

    kappa is the linear LOS-to-scatter power ratio; kappa = 0 degenerates to
    Rayleigh fading.  The default LOS component is the deterministic all-ones
    matrix; los='phase' draws i.i.d. unit-modulus phases instead (drawn
    before the scattered part, so seeding stays reproducible).
    """
    if kappa < 0:
        raise ValueError(f"rician factor must be nonnegative, got {kappa}")
    if amp <= 0:
        raise ValueError(f"amplitude gain must be positive, got {amp}")
    if los not in ("ones", "phase"):
        raise ValueError(f"los must be 'ones' or 'phase', got {los!r}")
    rng = as_rng(rng)
    if los == "ones":
        los_mat = np.ones((rows, cols), dtype=np.complex128)
    else:
        los_mat = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, (rows, cols)))
    nlos = _cn01(rows, cols, rng)
    return amp * (
        np.sqrt(kappa / (1.0 + kappa)) * los_mat
        + np.sqrt(1.0 / (1.0 + kappa)) * nlos
    )


def gen_channels(cfg: NetworkConfig, rng: RandomSource) -> ChannelSet:
    """Draw one full channel realization for the configured network.

    Direct links are Rayleigh; AP->RIS and RIS->user links are Rician with
    the configured factor.  Draw order is fixed (H_d, H_r, G_chan) so a
    given generator state maps to exactly one ChannelSet.
    """
    rng = as_rng(rng)
    fad, geo = cfg.fading, cfg.geometry
    lm = cfg.n_ris * cfg.n_elements
    h_d = gen_direct_channels(cfg, rng)
    if lm == 0:
        h_r = np.zeros((0, cfg.n_users), dtype=np.complex128)
        g = np.zeros((0, cfg.n_tx_total), dtype=np.complex128)
        return ChannelSet(h_d, h_r, g)
    amp_ru = pathloss_amplitude(geo.d_ru, fad.eps_ru, fad.zeta0)
    amp_ar = pathloss_amplitude(geo.d_ar, fad.eps_ar, fad.zeta0)
    h_r = gen_rician_channel(
        lm, cfg.n_users, amp_ru, fad.rician_kappa, rng, los=fad.los
    )
    g = gen_rician_channel(
        lm, cfg.n_tx_total, amp_ar, fad.rician_kappa, rng, los=fad.los
    )
    return ChannelSet(h_d, h_r, g)


def apply_csi_error(
    truth: ChannelSet, model: CsiErrorModel, rng: RandomSource
) -> ChannelSet:
    """Return a noisy channel estimate: truth + i.i.d. CN(0, var) on every
    entry of every block, with the variance per block taken from the model
    (uniform by default).  The input set is not modified."""
    if model.is_perfect:
        return ChannelSet(truth.H_d.copy(), truth.H_r.copy(), truth.G_chan.copy())
    rng = as_rng(rng)
    var_d, var_r, var_g = model.block_variances()

    def noisy(block: np.ndarray, var: float) -> np.ndarray:
        if var == 0.0 or block.size == 0:
            return block.copy()
        return block + np.sqrt(var) * _cn01(*block.shape, rng=rng)

    return ChannelSet(
        noisy(truth.H_d, var_d),
        noisy(truth.H_r, var_r),
        noisy(truth.G_chan, var_g),
    )
