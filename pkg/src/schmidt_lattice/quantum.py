"""Dense linear algebra on small bipartite systems.

States are stored as plain numpy arrays together with the local dimensions
``(dA, dB)``; the composite index is ``a * dB + b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .majorization import ProbVector

HERM_TOL = 1e-8
STATE_TOL = 1e-9
EIG_CLAMP = 1e-9
DEFAULT_PURE_SUPPORT_EPS = 1e-6


def _dims(dims) -> tuple[int, int]:
    dA, dB = (int(x) for x in dims)
    if dA < 1 or dB < 1:
        raise ValueError(f"invalid local dimensions {dims}")
    return dA, dB


class PureState:
    """Normalised vector on ``C^dA ⊗ C^dB``."""

    __slots__ = ("amplitudes", "dims")

    def __init__(self, amplitudes, dims):
        dA, dB = _dims(dims)
        psi = np.array(amplitudes, dtype=complex).reshape(-1)
        if psi.size != dA * dB:
            raise ValueError(f"{psi.size} amplitudes for dims {(dA, dB)}")
        if abs(np.vdot(psi, psi).real - 1.0) > STATE_TOL:
            raise ValueError("pure state is not normalised")
        psi.flags.writeable = False
        self.amplitudes = psi
        self.dims = (dA, dB)

    @classmethod
    def normalized(cls, amplitudes, dims) -> "PureState":
        psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(psi / np.linalg.norm(psi), dims)

    @property
    def d(self) -> int:
        return min(self.dims)

    def matrix(self) -> np.ndarray:
        """Amplitudes as a ``dA x dB`` array."""
        return self.amplitudes.reshape(self.dims)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)

    def __repr__(self) -> str:
        return f"PureState(dims={self.dims})"


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator with bipartite dims."""

    __slots__ = ("matrix", "dims")

    def __init__(self, matrix, dims):
        dA, dB = _dims(dims)
        m = np.array(matrix, dtype=complex)
        n = dA * dB
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match dims {(dA, dB)}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix has non-finite entries")
        if np.abs(m - m.conj().T).max() > STATE_TOL:
            raise ValueError("density matrix is not Hermitian")
        m = (m + m.conj().T) / 2
        if abs(np.trace(m).real - 1.0) > STATE_TOL:
            raise ValueError(f"trace is {np.trace(m).real!r}, not 1")
        if np.linalg.eigvalsh(m).min() < -EIG_CLAMP:
            raise ValueError("density matrix is not positive semidefinite")
        m.flags.writeable = False
        self.matrix = m
        self.dims = (dA, dB)

    @property
    def d(self) -> int:
        return min(self.dims)

    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Clamped eigenvalues (non-increasing) and eigenvector columns."""
        w, v = eig_hermitian(self.matrix)
        w[(w < 0) & (w >= -EIG_CLAMP)] = 0.0
        return w, v

    def is_pure(self, tol: float = 1e-9) -> bool:
        return eig_hermitian(self.matrix)[0][0] > 1.0 - tol

    def __repr__(self) -> str:
        return f"DensityMatrix(dims={self.dims})"


@dataclass(frozen=True)
class KrausChannel:
    operators: tuple[np.ndarray, ...]
    dims: tuple[int, int]
    structure: str = "general"

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.operators)
        n = self.dims[0] * self.dims[1]
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        if any(k.shape != (n, n) for k in ops):
            raise ValueError("Kraus operator shape does not match dims")
        completeness = sum(k.conj().T @ k for k in ops)
        if np.abs(completeness - np.eye(n)).max() > HERM_TOL:
            raise ValueError("Kraus operators do not sum to the identity")
        object.__setattr__(self, "operators", ops)

    @classmethod
    def local_A(cls, ops_A: Sequence[np.ndarray], dims) -> "KrausChannel":
        """Lift operators acting on A to ``K ⊗ 1_B``."""
        dA, dB = _dims(dims)
        return cls(tuple(np.kron(k, np.eye(dB)) for k in ops_A), (dA, dB), "A⊗1")

    @classmethod
    def local_B(cls, ops_B: Sequence[np.ndarray], dims) -> "KrausChannel":
        dA, dB = _dims(dims)
        return cls(tuple(np.kron(np.eye(dA), k) for k in ops_B), (dA, dB), "1⊗B")


def eig_hermitian(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues sorted non-increasing and matching eigenvector columns."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if np.abs(m - m.conj().T).max() > HERM_TOL:
        raise ValueError("matrix is not Hermitian")
    w, v = np.linalg.eigh(m)
    return w[::-1].copy(), v[:, ::-1].copy()


def partial_trace_B(rho: DensityMatrix) -> np.ndarray:
    dA, dB = rho.dims
    return np.einsum("ikjk->ij", rho.matrix.reshape(dA, dB, dA, dB))


def partial_trace_A(rho: DensityMatrix) -> np.ndarray:
    dA, dB = rho.dims
    return np.einsum("kikj->ij", rho.matrix.reshape(dA, dB, dA, dB))


def schmidt_decompose(psi: PureState) -> tuple[ProbVector, np.ndarray, np.ndarray]:
    """Schmidt coefficients and bases, ``psi = sum_i sqrt(c_i) |a_i>|b_i>``.

    Returns the coefficients (length ``min(dA, dB)``, non-increasing) and the
    bases as columns.  The first non-negligible component of each ``|a_i>`` is
    made real positive, the phase being moved onto ``|b_i>``.
    """
    u, s, vh = np.linalg.svd(psi.matrix(), full_matrices=False)
    a = u.copy()
    b = vh.T.copy()
    for i in range(a.shape[1]):
        k = int(np.argmax(np.abs(a[:, i]) > 1e-12))
        phase = a[k, i] / abs(a[k, i]) if abs(a[k, i]) > 0 else 1.0
        a[:, i] /= phase
        b[:, i] *= phase
    return ProbVector(s**2 / np.sum(s**2)), a, b


def mu_pure(psi: PureState) -> ProbVector:
    """Sorted Schmidt vector of a pure state."""
    return schmidt_decompose(psi)[0]


def schmidt_rank_pure(psi: PureState, support_eps: float = DEFAULT_PURE_SUPPORT_EPS) -> int:
    return int(np.count_nonzero(mu_pure(psi).entries > support_eps))


def apply_channel(channel: KrausChannel, rho: DensityMatrix):
    """Outcome probabilities and post-measurement states, plus their average.

    Outcomes with probability below ``1e-12`` are dropped.
    """
    if tuple(channel.dims) != tuple(rho.dims):
        raise ValueError(f"channel dims {channel.dims} do not match state dims {rho.dims}")
    outcomes = []
    total = np.zeros_like(rho.matrix)
    for k in channel.operators:
        out = k @ rho.matrix @ k.conj().T
        total += out
        p = float(np.trace(out).real)
        if p < 1e-12:
            continue
        out = (out + out.conj().T) / (2 * p)
        outcomes.append((p, DensityMatrix(out, rho.dims)))
    total = (total + total.conj().T) / 2
    return outcomes, DensityMatrix(total / np.trace(total).real, rho.dims)


def tensor(*ops) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out
