"""RIS reflection matrices under the three circuit topologies.

* single-connected: Phi_l = diag(e^{j theta_1}, ..., e^{j theta_M}); free
  parameters are the raw phases (periodic, unconstrained).
* group-connected: Phi_l = blkdiag of unitary symmetric blocks, one per
  element group; each block is realized by the Cayley-type map
  Phi_s = (jX_s + I)^{-1} (jX_s - I) of a real symmetric X_s, which satisfies
  the unitary and symmetric constraints exactly for any finite X_s.  The map
  cannot reach blocks that would need +1 among its scalar spectrum at finite
  parameters; optimizer restarts cover that corner.
* fully-connected: the single-group special case.

A RisMatrix is immutable after construction; all L RISs in one network share
the same architecture.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .channel import ChannelSet, RandomSource, as_rng

VALIDATE_TOL = 1e-9

# Phases closer to zero than this are clamped before taking the Cayley
# preimage cot(theta/2); keeps the preimage finite at < 1e-6 matrix error.
_PREIMAGE_PHASE_FLOOR = 5e-7


@dataclass(frozen=True)
class RisArchitecture:
    """Circuit topology of one RIS: 'single', 'group', or 'fully'.

    group_sizes always lists the block sizes (all ones for single-connected,
    one block of M for fully-connected), so the three kinds nest naturally.
    """

    kind: str
    group_sizes: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("single", "group", "fully"):
            raise ValueError(f"unknown RIS architecture kind {self.kind!r}")
        if not self.group_sizes or min(self.group_sizes) < 1:
            raise ValueError("group sizes must be positive")
        if self.kind == "single" and any(s != 1 for s in self.group_sizes):
            raise ValueError("single-connected requires unit group sizes")
        if self.kind == "fully" and len(self.group_sizes) != 1:
            raise ValueError("fully-connected requires one group of size M")

    @classmethod
    def single(cls, n_elements: int) -> "RisArchitecture":
        return cls("single", (1,) * n_elements)

    @classmethod
    def fully(cls, n_elements: int) -> "RisArchitecture":
        return cls("fully", (n_elements,))

    @classmethod
    def grouped(cls, sizes: Sequence[int]) -> "RisArchitecture":
        return cls("group", tuple(int(s) for s in sizes))

    @classmethod
    def from_spec(cls, spec: str, n_elements: int) -> Optional["RisArchitecture"]:
        """Build from a config spec string; None for 'none'."""
        from .config import parse_arch_spec

        sizes = parse_arch_spec(spec, n_elements)
        if sizes is None:
            return None
        spec = spec.strip().lower()
        if spec == "single":
            return cls.single(n_elements)
        if spec == "fully":
            return cls.fully(n_elements)
        return cls.grouped(sizes)

    @property
    def n_elements(self) -> int:
        return sum(self.group_sizes)

    @property
    def n_params_per_ris(self) -> int:
        """Free real parameters per RIS: M phases, or the stacked
        upper-triangular entries of each symmetric block."""
        if self.kind == "single":
            return self.n_elements
        return sum(s * (s + 1) // 2 for s in self.group_sizes)


@dataclass(frozen=True)
class RisMatrix:
    """Built reflection matrices for L RISs plus the parameters that made them.

    ``phi`` stacks the per-RIS M x M matrices; the overall reflection matrix
    is their block diagonal (see ``full()``).
    """

    arch: RisArchitecture
    n_ris: int
    params: np.ndarray   # (n_ris * arch.n_params_per_ris,)
    phi: np.ndarray      # (n_ris, M, M) complex

    def __post_init__(self) -> None:
        m = self.arch.n_elements
        if self.phi.shape != (self.n_ris, m, m):
            raise ValueError(
                f"phi shape {self.phi.shape} inconsistent with "
                f"L={self.n_ris}, M={m}"
            )
        expected = self.n_ris * self.arch.n_params_per_ris
        if self.params.shape != (expected,):
            raise ValueError(
                f"params length {self.params.shape} != {expected}"
            )
        self.params.setflags(write=False)
        self.phi.setflags(write=False)

    def full(self) -> np.ndarray:
        """Overall (L*M x L*M) block-diagonal reflection matrix."""
        m = self.arch.n_elements
        out = np.zeros((self.n_ris * m, self.n_ris * m), dtype=np.complex128)
        for l in range(self.n_ris):
            out[l * m:(l + 1) * m, l * m:(l + 1) * m] = self.phi[l]
        return out


@dataclass(frozen=True)
class ValidationResult:
    passed: bool
    residual: float
    tol: float


def empty_ris() -> RisMatrix:
    """Degenerate zero-element RIS used for no-RIS configurations."""
    arch = RisArchitecture("single", (1,))
    # One dummy element that is never consumed: n_ris = 0 keeps phi empty.
    return RisMatrix(
        arch=arch,
        n_ris=0,
        params=np.zeros(0),
        phi=np.zeros((0, 1, 1), dtype=np.complex128),
    )


def _cayley_block(x: np.ndarray) -> np.ndarray:
    """(jX + I)^{-1} (jX - I) for real symmetric X; unitary and symmetric."""
    m = x.shape[0]
    jx = 1j * x
    eye = np.eye(m, dtype=np.complex128)
    return np.linalg.solve(jx + eye, jx - eye)


def _upper_tri_pack(x: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(x.shape[0])
    return np.asarray(x[iu], dtype=np.float64)


def _upper_tri_unpack(vals: np.ndarray, m: int) -> np.ndarray:
    x = np.zeros((m, m))
    iu = np.triu_indices(m)
    x[iu] = vals
    x = x + np.triu(x, 1).T
    return x


def build_single_connected(theta: np.ndarray, n_ris: int = 1) -> RisMatrix:
    """Diagonal unit-modulus RIS from phase angles.

    theta may be flat of length n_ris*M or shaped (n_ris, M).
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim == 1:
        if theta.size % n_ris != 0:
            raise ValueError("theta length must be a multiple of n_ris")
        theta = theta.reshape(n_ris, -1)
    if theta.shape[0] != n_ris:
        raise ValueError(f"theta has {theta.shape[0]} rows, expected {n_ris}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    m = theta.shape[1]
    phi = np.zeros((n_ris, m, m), dtype=np.complex128)
    for l in range(n_ris):
        np.fill_diagonal(phi[l], np.exp(1j * theta[l]))
    arch = RisArchitecture.single(m)
    return RisMatrix(arch=arch, n_ris=n_ris, params=theta.ravel().copy(), phi=phi)


def build_group_connected(
    x_blocks: Sequence[np.ndarray], n_ris: int = 1
) -> RisMatrix:
    """Group-connected RIS from real symmetric parameter blocks.

    x_blocks lists n_ris * S matrices in RIS-major order; block s of every
    RIS must have the same size.  The single-group case is the
    fully-connected architecture.
    """
    blocks = [np.asarray(x, dtype=np.float64) for x in x_blocks]
    if not blocks or len(blocks) % n_ris != 0:
        raise ValueError("need n_ris * S parameter blocks")
    n_groups = len(blocks) // n_ris
    sizes = tuple(b.shape[0] for b in blocks[:n_groups])
    for i, b in enumerate(blocks):
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError(f"block {i} is not square")
        if b.shape[0] != sizes[i % n_groups]:
            raise ValueError("block sizes differ across RISs")
        if not np.all(np.isfinite(b)):
            raise ValueError(f"block {i} must be finite")
        if np.max(np.abs(b - b.T)) > 1e-12:
            raise ValueError(f"block {i} is not symmetric")
    m = sum(sizes)
    arch = (
        RisArchitecture.fully(m) if n_groups == 1 else RisArchitecture.grouped(sizes)
    )
    phi = np.zeros((n_ris, m, m), dtype=np.complex128)
    params: List[np.ndarray] = []
    for l in range(n_ris):
        off = 0
        for s in range(n_groups):
            b = blocks[l * n_groups + s]
            ms = sizes[s]
            phi[l, off:off + ms, off:off + ms] = _cayley_block(b)
            params.append(_upper_tri_pack(b))
            off += ms
    return RisMatrix(
        arch=arch, n_ris=n_ris, params=np.concatenate(params), phi=phi
    )


def build_from_params(
    arch: RisArchitecture, params: np.ndarray, n_ris: int = 1
) -> RisMatrix:
    """Build a RisMatrix from the flat unconstrained parameter vector."""
    params = np.asarray(params, dtype=np.float64)
    per = arch.n_params_per_ris
    if params.shape != (n_ris * per,):
        raise ValueError(
            f"params length {params.size} != n_ris*per_ris = {n_ris * per}"
        )
    if arch.kind == "single":
        return build_single_connected(params.reshape(n_ris, -1), n_ris)
    blocks: List[np.ndarray] = []
    off = 0
    for _ in range(n_ris):
        for ms in arch.group_sizes:
            n = ms * (ms + 1) // 2
            blocks.append(_upper_tri_unpack(params[off:off + n], ms))
            off += n
    ris = build_group_connected(blocks, n_ris)
    if arch.kind == "fully" and ris.arch.kind != "fully":
        raise AssertionError("single-group build must report fully-connected")
    return ris


def random_params(
    arch: RisArchitecture, n_ris: int, rng: RandomSource
) -> np.ndarray:
    """Random initialization: phases uniform on [0, 2pi); symmetric blocks
    from symmetrized standard-normal matrices."""
    rng = as_rng(rng)
    if arch.kind == "single":
        return rng.uniform(0.0, 2.0 * np.pi, size=n_ris * arch.n_elements)
    parts = []
    for _ in range(n_ris):
        for ms in arch.group_sizes:
            a = rng.standard_normal((ms, ms))
            parts.append(_upper_tri_pack((a + a.T) / 2.0))
    return np.concatenate(parts)


def single_to_group_params(theta: np.ndarray, arch: RisArchitecture) -> np.ndarray:
    """Cayley preimage of a single-connected solution in a coarser architecture.

    Each phase maps to the scalar cot(theta/2) on the block diagonal, since
    (j*cot(t/2) - 1) / (j*cot(t/2) + 1) = e^{jt}.  Phases within
    _PREIMAGE_PHASE_FLOOR of zero are clamped, which perturbs the rebuilt
    matrix by less than 1e-6 per element.
    """
    theta = np.asarray(theta, dtype=np.float64).ravel()
    if arch.kind == "single":
        return theta.copy()
    wrapped = np.mod(theta + np.pi, 2.0 * np.pi) - np.pi
    small = np.abs(wrapped) < _PREIMAGE_PHASE_FLOOR
    wrapped[small] = _PREIMAGE_PHASE_FLOOR
    diag = 1.0 / np.tan(wrapped / 2.0)
    m = arch.n_elements
    if theta.size % m != 0:
        raise ValueError("theta length must be n_ris * M")
    n_ris = theta.size // m
    parts = []
    for l in range(n_ris):
        off = 0
        for ms in arch.group_sizes:
            parts.append(_upper_tri_pack(np.diag(diag[l * m + off:l * m + off + ms])))
            off += ms
    return np.concatenate(parts)


def _single_residual(phi_l: np.ndarray) -> float:
    off = phi_l - np.diag(np.diag(phi_l))
    r_off = np.max(np.abs(off)) if off.size else 0.0
    r_mag = np.max(np.abs(np.abs(np.diag(phi_l)) - 1.0))
    return float(max(r_off, r_mag))


def _unitary_symmetric_residual(block: np.ndarray) -> float:
    eye = np.eye(block.shape[0])
    r_u = np.linalg.norm(block.conj().T @ block - eye)
    r_s = np.linalg.norm(block - block.T)
    return float(max(r_u, r_s))


def _group_residual(phi_l: np.ndarray, sizes: Sequence[int]) -> float:
    mask = np.ones(phi_l.shape, dtype=bool)
    res = 0.0
    off = 0
    for ms in sizes:
        blk = phi_l[off:off + ms, off:off + ms]
        res = max(res, _unitary_symmetric_residual(blk))
        mask[off:off + ms, off:off + ms] = False
        off += ms
    if np.any(mask):
        res = max(res, float(np.max(np.abs(phi_l[mask]))))
    return res


def validate(ris: RisMatrix, tol: float = VALIDATE_TOL) -> ValidationResult:
    """Check the built matrices against their declared architecture.

    Returns the maximum constraint residual across RISs: magnitude/diagonal
    deviations for single-connected, unitarity/symmetry (Frobenius) plus
    off-block leakage for group- and fully-connected.
    """
    res = 0.0
    for l in range(ris.n_ris):
        phi_l = ris.phi[l]
        if ris.arch.kind == "single":
            res = max(res, _single_residual(phi_l))
        elif ris.arch.kind == "fully":
            res = max(res, _unitary_symmetric_residual(phi_l))
        else:
            res = max(res, _group_residual(phi_l, ris.arch.group_sizes))
    return ValidationResult(passed=res <= tol, residual=res, tol=tol)


def redeclare(ris: RisMatrix, arch: RisArchitecture) -> RisMatrix:
    """View the same built matrices under a different declared architecture.

    Parameters are not carried over (a coarser class generally has a
    different parameterization); the result is for validation/evaluation.
    """
    if arch.n_elements != ris.arch.n_elements:
        raise ValueError("redeclare requires matching element count")
    return RisMatrix(
        arch=arch,
        n_ris=ris.n_ris,
        params=np.zeros(ris.n_ris * arch.n_params_per_ris),
        phi=ris.phi.copy(),
    )


def effective_channels(ch: ChannelSet, ris: Optional[RisMatrix]) -> np.ndarray:
    """Composite AP->user channels: column k is h_dk + (h_rk^H Phi G)^H.

    With no RIS (None, zero RISs, or an empty reflected block) this is just
    the direct block.
    """
    if ris is None or ris.n_ris == 0 or ch.H_r.shape[0] == 0:
        return ch.H_d.copy()
    m = ris.arch.n_elements
    if ch.H_r.shape[0] != ris.n_ris * m:
        raise ValueError(
            f"channel has {ch.H_r.shape[0]} RIS rows, matrices give {ris.n_ris * m}"
        )
    w = np.empty_like(ch.H_r)
    for l in range(ris.n_ris):
        rows = slice(l * m, (l + 1) * m)
        w[rows] = ris.phi[l].conj().T @ ch.H_r[rows]
    return ch.H_d + ch.G_chan.conj().T @ w
