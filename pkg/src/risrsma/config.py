"""Configuration types: geometry, fading, CSI quality, optimizer knobs, and
the top-level network/experiment configuration.

All powers are tracked in Watts internally; dB/dBm values accepted at the
config-file boundary are converted on load (power quantities via 10^(dB/10)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

from .exceptions import ConfigError

SCHEMES = ("rs1", "sdma", "noma", "hrs")


def db_to_linear(db: float) -> float:
    """Convert a power ratio in dB to linear scale."""
    return 10.0 ** (db / 10.0)


def dbm_to_watt(dbm: float) -> float:
    """Convert a power in dBm to Watts."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class Geometry:
    """Link distances in meters.

    If ``d_au`` is omitted it is derived as sqrt(d_ar^2 - d_ru^2), i.e. the
    users sit on the circle of radius d_ru around the RIS such that the
    AP-user line is a leg of the right triangle; this requires d_ar > d_ru.
    """

    d_ar: float = 50.0
    d_ru: float = 10.0
    d_au: Optional[float] = None

    def __post_init__(self) -> None:
        if self.d_ar <= 0 or self.d_ru <= 0:
            raise ConfigError("geometry: distances must be positive")
        if self.d_au is None:
            if self.d_ar <= self.d_ru:
                raise ConfigError(
                    "geometry: default d_au rule needs d_ar > d_ru "
                    f"(got d_ar={self.d_ar}, d_ru={self.d_ru})"
                )
            object.__setattr__(
                self, "d_au", math.sqrt(self.d_ar**2 - self.d_ru**2)
            )
        elif self.d_au <= 0:
            raise ConfigError("geometry: d_au must be positive")


@dataclass(frozen=True)
class FadingParams:
    """Large-scale and small-scale fading parameters (all linear scale).

    zeta0 is the power gain at the 1 m reference distance; rician_kappa is
    the LOS-to-scatter power ratio used for the AP-RIS and RIS-user links.
    los picks the deterministic Rician component: 'ones' (broadside all-ones,
    the simplest reproducible choice; implies co-directional users) or
    'phase' (i.i.d. unit-modulus random phases per draw, decorrelating the
    users' reflected paths).
    """

    zeta0: float = db_to_linear(-30.0)
    eps_au: float = 3.0
    eps_ar: float = 1.9
    eps_ru: float = 1.7
    rician_kappa: float = db_to_linear(2.0)
    los: str = "ones"

    def __post_init__(self) -> None:
        if self.zeta0 <= 0:
            raise ConfigError("fading: zeta0 must be positive")
        if min(self.eps_au, self.eps_ar, self.eps_ru) <= 0:
            raise ConfigError("fading: path-loss exponents must be positive")
        if self.rician_kappa < 0:
            raise ConfigError("fading: rician_kappa must be nonnegative")
        if self.los not in ("ones", "phase"):
            raise ConfigError(
                f"fading: los must be 'ones' or 'phase', got {self.los!r}"
            )


@dataclass(frozen=True)
class CsiErrorModel:
    """Additive Gaussian channel-estimation error.

    The default is a uniform per-entry variance sigma_e2 = sigma_z2*(1-alpha)
    on every block.  ``block_sigma_e2``, when set, overrides it with per-block
    variances (AP-user, RIS-user, AP-RIS) - the link-scaled variant where the
    estimate captures a fraction alpha of each link's power, so alpha keeps
    the meaning of a CSI quality factor across links of very different
    strengths.
    """

    alpha: float
    sigma_e2: float
    block_sigma_e2: Optional[Tuple[float, float, float]] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("csi: alpha must lie in [0, 1]")
        if self.sigma_e2 < 0:
            raise ConfigError("csi: sigma_e2 must be nonnegative")
        if self.block_sigma_e2 is not None and min(self.block_sigma_e2) < 0:
            raise ConfigError("csi: block error variances must be nonnegative")

    @classmethod
    def from_alpha(cls, alpha: float, sigma_z2: float) -> "CsiErrorModel":
        return cls(alpha=alpha, sigma_e2=sigma_z2 * (1.0 - alpha))

    @classmethod
    def link_scaled(cls, alpha: float, cfg: "NetworkConfig") -> "CsiErrorModel":
        """Error variance (1-alpha) times each block's per-entry power."""
        fad, geo = cfg.fading, cfg.geometry
        powers = (
            fad.zeta0 * geo.d_au ** (-fad.eps_au),
            fad.zeta0 * geo.d_ru ** (-fad.eps_ru),
            fad.zeta0 * geo.d_ar ** (-fad.eps_ar),
        )
        return cls(
            alpha=alpha,
            sigma_e2=cfg.sigma_z2 * (1.0 - alpha),
            block_sigma_e2=tuple((1.0 - alpha) * p for p in powers),
        )

    @classmethod
    def perfect(cls) -> "CsiErrorModel":
        return cls(alpha=1.0, sigma_e2=0.0)

    def block_variances(self) -> Tuple[float, float, float]:
        """Per-entry error variances for (H_d, H_r, G)."""
        if self.block_sigma_e2 is not None:
            return self.block_sigma_e2
        return (self.sigma_e2,) * 3

    @property
    def is_perfect(self) -> bool:
        return max(self.block_variances()) == 0.0


@dataclass(frozen=True)
class OptimizerSettings:
    """Knobs for the WMMSE / quasi-Newton / alternating optimization loops."""

    wsr_tol: float = 1e-4          # relative convergence tolerance
    max_outer_iters: int = 50      # alternating precoder/RIS rounds
    max_wmmse_iters: int = 200     # inner WMMSE iterations per call
    restarts: int = 3              # independent random initializations
    fd_step: float = 1e-6          # central finite-difference step
    ls_backtrack: float = 0.5      # line-search contraction factor
    ls_max: int = 30               # max backtracking steps
    max_qn_iters: int = 100        # quasi-Newton iteration cap

    def __post_init__(self) -> None:
        if not 0 < self.wsr_tol < 1:
            raise ConfigError("optimizer: wsr_tol must lie in (0, 1)")
        for name in ("max_outer_iters", "max_wmmse_iters", "restarts",
                     "ls_max", "max_qn_iters"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"optimizer: {name} must be positive")
        if self.fd_step <= 0:
            raise ConfigError("optimizer: fd_step must be positive")
        if not 0 < self.ls_backtrack < 1:
            raise ConfigError("optimizer: ls_backtrack must lie in (0, 1)")


@dataclass(frozen=True)
class NetworkConfig:
    """Dimensions, powers, geometry, CSI quality and experiment controls for
    one simulated network."""

    n_aps: int = 1                      # N
    n_tx: int = 2                       # N_t antennas per AP
    n_users: int = 2                    # K
    n_ris: int = 1                      # L (0 = no RIS)
    n_elements: int = 20                # M per RIS (0 = no RIS)
    groups: Optional[Tuple[Tuple[int, ...], ...]] = None  # HRS user groups
    power_w: Tuple[float, ...] = (1.0,)  # per-AP budget P_n in Watts
    sigma_z2: float = dbm_to_watt(-70.0)
    geometry: Geometry = field(default_factory=Geometry)
    fading: FadingParams = field(default_factory=FadingParams)
    csi: CsiErrorModel = field(default_factory=CsiErrorModel.perfect)
    n_csi_eval_samples: int = 2000      # ergodic samples under imperfect CSI
    csi_design: str = "estimate"        # estimate | robust (sample-average)
    n_csi_design_samples: int = 16      # samples for robust designs
    scheme: str = "rs1"
    arch: str = "single"                # single | fully | group:<sizes> | none
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    mc_runs: int = 50
    n_weights: int = 21
    seed: int = 1

    def __post_init__(self) -> None:
        for name in ("n_aps", "n_tx", "n_users"):
            if getattr(self, name) < 1:
                raise ConfigError(f"config: {name} must be >= 1")
        if self.n_ris < 0 or self.n_elements < 0:
            raise ConfigError("config: n_ris and n_elements must be >= 0")
        if len(self.power_w) != self.n_aps:
            raise ConfigError(
                f"config: power_w must list one budget per AP "
                f"({self.n_aps} expected, {len(self.power_w)} given)"
            )
        if min(self.power_w) <= 0:
            raise ConfigError("config: AP power budgets must be positive")
        if self.sigma_z2 <= 0:
            raise ConfigError("config: sigma_z2 must be positive")
        if self.scheme not in SCHEMES:
            raise ConfigError(
                f"config: unknown scheme {self.scheme!r}; expected one of {SCHEMES}"
            )
        if self.scheme == "hrs":
            self._check_groups()
        if self.mc_runs < 1:
            raise ConfigError("config: mc_runs must be >= 1")
        if self.n_weights < 2:
            raise ConfigError("config: n_weights must be >= 2")
        if self.n_csi_eval_samples < 1:
            raise ConfigError("config: n_csi_eval_samples must be >= 1")
        if self.csi_design not in ("estimate", "robust"):
            raise ConfigError(
                "config: csi_design must be 'estimate' or 'robust', "
                f"got {self.csi_design!r}"
            )
        if self.n_csi_design_samples < 1:
            raise ConfigError("config: n_csi_design_samples must be >= 1")
        parse_arch_spec(self.arch, self.n_elements)  # raises on bad spec

    def _check_groups(self) -> None:
        if not self.groups:
            raise ConfigError("config: scheme 'hrs' requires user groups")
        seen = sorted(k for g in self.groups for k in g)
        if seen != list(range(self.n_users)):
            raise ConfigError(
                "config: groups must partition users 0..K-1 "
                f"(got {self.groups} for K={self.n_users})"
            )

    @property
    def n_tx_total(self) -> int:
        return self.n_aps * self.n_tx

    @property
    def has_ris(self) -> bool:
        return self.n_ris > 0 and self.n_elements > 0 and self.arch != "none"

    def with_(self, **changes) -> "NetworkConfig":
        """Return a copy with the given fields replaced."""
        return replace(self, **changes)


def parse_arch_spec(spec: str, n_elements: int) -> Optional[Tuple[int, ...]]:
    """Parse an architecture spec string into per-RIS group sizes.

    Returns None for 'none', otherwise the tuple of block sizes:
    'single' -> (1,)*M, 'fully' -> (M,), 'group:a,b,...' -> (a, b, ...).
    """
    spec = spec.strip().lower()
    if spec == "none":
        return None
    if spec == "single":
        return (1,) * n_elements
    if spec == "fully":
        if n_elements < 1:
            raise ConfigError("arch: 'fully' needs n_elements >= 1")
        return (n_elements,)
    if spec.startswith("group:"):
        try:
            sizes = tuple(int(tok) for tok in spec[len("group:"):].split(","))
        except ValueError as exc:
            raise ConfigError(f"arch: cannot parse group sizes in {spec!r}") from exc
        if not sizes or min(sizes) < 1:
            raise ConfigError("arch: group sizes must be positive")
        if sum(sizes) != n_elements:
            raise ConfigError(
                f"arch: group sizes {sizes} must sum to n_elements={n_elements}"
            )
        return sizes
    raise ConfigError(
        f"arch: unknown spec {spec!r}; expected single|fully|group:<sizes>|none"
    )
