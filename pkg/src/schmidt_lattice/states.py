"""Test states: isotropic family, maximally entangled, separable, random."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .quantum import DensityMatrix, KrausChannel, PureState

KINDS = ("isotropic", "max_entangled", "separable_mixture", "random_mixed", "random_pure", "from_file")


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def max_entangled_vector(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)


def make_max_entangled(d: int) -> PureState:
    """``sum_i |ii> / sqrt(d)``."""
    if d < 2:
        raise ValueError("d must be at least 2")
    return PureState(max_entangled_vector(d), (d, d))


def make_isotropic(d: int, lam: float) -> DensityMatrix:
    """``(1-lam)(1 - P)/(d^2-1) + lam P`` with ``P`` the maximally entangled projector."""
    if d < 2:
        raise ValueError("d must be at least 2")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda={lam} outside [0, 1]")
    phi = max_entangled_vector(d)
    P = np.outer(phi, phi.conj())
    rho = (1.0 - lam) * (np.eye(d * d) - P) / (d * d - 1) + lam * P
    return DensityMatrix(rho, (d, d))


def random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return z / np.linalg.norm(z)


def make_separable(dA: int, dB: int, k: int, seed=None) -> DensityMatrix:
    """Convex mixture of ``k`` random product pure states."""
    if k < 1:
        raise ValueError("need at least one component")
    rng = _rng(seed)
    p = rng.dirichlet(np.ones(k))
    rho = np.zeros((dA * dB, dA * dB), dtype=complex)
    for w in p:
        v = np.kron(random_ket(dA, rng), random_ket(dB, rng))
        rho += w * np.outer(v, v.conj())
    return DensityMatrix(rho / np.trace(rho).real, (dA, dB))


def random_pure(dA: int, dB: int, seed=None) -> PureState:
    return PureState(random_ket(dA * dB, _rng(seed)), (dA, dB))


def random_density(dA: int, dB: int, rank: Optional[int] = None, seed=None) -> DensityMatrix:
    """``G G^dagger / Tr`` with ``G`` a complex Gaussian ``dAB x rank`` matrix."""
    n = dA * dB
    rank = n if rank is None else rank
    if not 1 <= rank <= n:
        raise ValueError(f"rank {rank} outside 1..{n}")
    rng = _rng(seed)
    G = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = G @ G.conj().T
    return DensityMatrix(rho / np.trace(rho).real, (dA, dB))


def random_local_channel(dA: int, dB: int, n_kraus: int, seed=None) -> KrausChannel:
    """Random instrument on A: ``K_n ⊗ 1`` with ``sum K_n^dagger K_n = 1``.

    A random ``n_kraus*dA x dA`` isometry is cut into blocks.
    """
    if n_kraus < 1:
        raise ValueError("need at least one Kraus operator")
    rng = _rng(seed)
    G = rng.normal(size=(n_kraus * dA, dA)) + 1j * rng.normal(size=(n_kraus * dA, dA))
    Q, R = np.linalg.qr(G)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))
    ops = [Q[n * dA : (n + 1) * dA] for n in range(n_kraus)]
    return KrausChannel.local_A(ops, (dA, dB))


# --- state files and specs ----------------------------------------------------


def load_state_file(path) -> DensityMatrix:
    """Read ``{"dims": [dA, dB], "matrix": [[[re, im], ...], ...]}``.

    A ``"vector"`` key holding ``[[re, im], ...]`` amplitudes is also accepted
    for pure states.
    """
    with open(path) as fh:
        data = json.load(fh)
    return state_from_json(data)


def state_from_json(data: dict) -> DensityMatrix:
    if not isinstance(data, dict) or "dims" not in data:
        raise ValueError("state file needs a 'dims' entry")
    dims = tuple(int(x) for x in data["dims"])
    if len(dims) != 2:
        raise ValueError("'dims' must hold two integers")
    if "matrix" in data:
        arr = np.asarray(data["matrix"], dtype=float)
        if arr.ndim != 3 or arr.shape[-1] != 2:
            raise ValueError("'matrix' must be rows of [re, im] pairs")
        return DensityMatrix(arr[..., 0] + 1j * arr[..., 1], dims)
    if "vector" in data:
        arr = np.asarray(data["vector"], dtype=float)
        if arr.ndim != 2 or arr.shape[-1] != 2:
            raise ValueError("'vector' must be a list of [re, im] pairs")
        return PureState(arr[:, 0] + 1j * arr[:, 1], dims).density()
    raise ValueError("state file needs 'matrix' or 'vector'")


def state_to_json(rho: DensityMatrix) -> dict:
    m = rho.matrix
    return {
        "dims": list(rho.dims),
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def save_state_file(rho: DensityMatrix, path) -> None:
    Path(path).write_text(json.dumps(state_to_json(rho)))


@dataclass(frozen=True)
class StateSpec:
    kind: str
    d: Optional[int] = None
    dims: Optional[tuple[int, int]] = None
    lam: Optional[float] = None
    components: int = 4
    rank: Optional[int] = None
    seed: int = 0
    path: Optional[str] = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown state kind {self.kind!r}")
        if self.lam is not None and not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda={self.lam} outside [0, 1]")
        for n in (self.d, *(self.dims or ())):
            if n is not None and n < 2 and self.kind != "from_file":
                raise ValueError("dimensions must be at least 2")

    def local_dims(self) -> tuple[int, int]:
        if self.dims is not None:
            return tuple(self.dims)
        if self.d is not None:
            return (self.d, self.d)
        raise ValueError(f"{self.kind} state needs d or dims")

    def build(self) -> DensityMatrix:
        if self.kind == "from_file":
            if not self.path:
                raise ValueError("from_file state needs a path")
            return load_state_file(self.path)
        if self.kind == "isotropic":
            if self.lam is None:
                raise ValueError("isotropic state needs lambda")
            return make_isotropic(self.local_dims()[0], self.lam)
        if self.kind == "max_entangled":
            return make_max_entangled(self.local_dims()[0]).density()
        dA, dB = self.local_dims()
        if self.kind == "separable_mixture":
            return make_separable(dA, dB, self.components, self.seed)
        if self.kind == "random_mixed":
            return random_density(dA, dB, self.rank, self.seed)
        return random_pure(dA, dB, self.seed).density()
