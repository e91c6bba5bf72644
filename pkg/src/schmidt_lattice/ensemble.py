"""Search over pure-state decompositions of a density matrix.

Every ensemble ``{q_i, psi_i}`` of ``rho = sum_j lam_j |e_j><e_j|`` with ``M``
members arises from an ``M x M`` unitary ``V`` through

    sqrt(q_i) |psi_i> = sum_j sqrt(lam_j) V_ji |e_j>,

and ``V = exp(iH)`` with ``H`` a real combination of an orthonormal basis of
Hermitian ``M x M`` matrices.  Objectives that depend on the ensemble only
through the spectra of the members' reduced states (``SpectralObjective``)
are optimised with L-BFGS using the exact gradient with respect to the basis
coefficients; arbitrary callables fall back to Nelder-Mead.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import minimize

from .majorization import ProbVector, SchurFunction
from .quantum import DensityMatrix, PureState

RANK_EPS = 1e-9
MIN_WEIGHT = 1e-12
UNITARY_TOL = 1e-6
THREADS_ENV = "SCHMIDT_THREADS"


# --- Hermitian basis and unitary parameterisation ---------------------------


def _offdiag_index(M: int):
    return np.triu_indices(M, 1)


def hermitian_basis(M: int) -> np.ndarray:
    """Orthonormal basis of Herm(M) as an ``(M*M, M, M)`` array.

    Order: ``E_ii`` for each ``i``, then for each ``i < j`` (row-major) the pair
    ``(E_ij + E_ji)/sqrt2`` and ``i(E_ij - E_ji)/sqrt2``.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    basis = np.zeros((M * M, M, M), dtype=complex)
    for i in range(M):
        basis[i, i, i] = 1.0
    iu, ju = _offdiag_index(M)
    s = 1 / math.sqrt(2)
    for n, (i, j) in enumerate(zip(iu, ju)):
        k = M + 2 * n
        basis[k, i, j] = basis[k, j, i] = s
        basis[k + 1, i, j] = 1j * s
        basis[k + 1, j, i] = -1j * s
    return basis


def params_to_hermitian(alpha: np.ndarray, M: int) -> np.ndarray:
    """``sum_k alpha_k A_k`` without materialising the basis."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (M * M,):
        raise ValueError(f"expected {M * M} parameters, got {alpha.shape}")
    H = np.zeros((M, M), dtype=complex)
    H[np.diag_indices(M)] = alpha[:M]
    iu, ju = _offdiag_index(M)
    z = (alpha[M::2] + 1j * alpha[M + 1 :: 2]) / math.sqrt(2)
    H[iu, ju] = z
    H[ju, iu] = z.conj()
    return H


def hermitian_to_params(G: np.ndarray, M: int) -> np.ndarray:
    """Coordinates ``Tr(A_k G)`` of a Hermitian ``G`` in the basis."""
    iu, ju = _offdiag_index(M)
    out = np.empty(M * M)
    out[:M] = G[np.diag_indices(M)].real
    out[M::2] = math.sqrt(2) * G[iu, ju].real
    out[M + 1 :: 2] = math.sqrt(2) * G[iu, ju].imag
    return out


def unitary_from_params(alpha, basis: Union[int, np.ndarray]) -> np.ndarray:
    """``exp(i sum_k alpha_k A_k)`` via the eigendecomposition of the generator.

    ``basis`` is either the array returned by :func:`hermitian_basis` or just
    its size ``M``.
    """
    alpha = np.asarray(alpha, dtype=float)
    if isinstance(basis, (int, np.integer)):
        H = params_to_hermitian(alpha, int(basis))
    else:
        basis = np.asarray(basis)
        if alpha.shape != (basis.shape[0],):
            raise ValueError(f"expected {basis.shape[0]} parameters, got {alpha.shape}")
        H = np.tensordot(alpha, basis, axes=1)
    th, U = np.linalg.eigh(H)
    return (U * np.exp(1j * th)) @ U.conj().T


# --- decompositions ----------------------------------------------------------


@dataclass(frozen=True)
class MixtureParameterization:
    rho: DensityMatrix
    eigenvalues: np.ndarray  # the r nonzero eigenvalues, non-increasing
    eigenvectors: np.ndarray  # dAB x r
    M: int

    @classmethod
    def from_state(cls, rho: DensityMatrix, M: Optional[int] = None) -> "MixtureParameterization":
        w, v = rho.spectrum()
        keep = w > RANK_EPS
        r = int(keep.sum())
        if M is None:
            M = default_ensemble_size(r, rho.dims)
        if M < r:
            raise ValueError(f"ensemble size {M} is below the rank {r} of the state")
        return cls(rho, w[keep], v[:, keep], int(M))

    @property
    def rank(self) -> int:
        return self.eigenvalues.size

    @property
    def dims(self) -> tuple[int, int]:
        return self.rho.dims

    @property
    def d(self) -> int:
        return min(self.rho.dims)

    @property
    def hermitian_basis(self) -> np.ndarray:
        return hermitian_basis(self.M)

    @property
    def weighted_vectors(self) -> np.ndarray:
        """Columns ``sqrt(lam_j) |e_j>``."""
        return self.eigenvectors * np.sqrt(self.eigenvalues)


def default_ensemble_size(r: int, dims) -> int:
    """``r^2 + 1`` members, capped by the ``(dA dB)^2 + 1`` sufficiency bound."""
    dAB = dims[0] * dims[1]
    return min(r * r + 1, dAB * dAB + 1)


class Ensemble:
    """Weighted pure states ``{q_i, psi_i}`` decomposing a target state."""

    __slots__ = ("weights", "vectors", "dims", "target")

    def __init__(self, weights, vectors, dims, target: Optional[DensityMatrix] = None, tol: float = 1e-7):
        q = np.asarray(weights, dtype=float)
        vecs = np.asarray(vectors, dtype=complex)
        if q.ndim != 1 or vecs.shape[0] != q.size:
            raise ValueError("one weight per member expected")
        if np.any(q <= 0):
            raise ValueError("ensemble weights must be positive")
        if abs(q.sum() - 1.0) > 1e-8:
            raise ValueError("ensemble weights must sum to 1")
        vecs = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
        if target is not None:
            recon = np.einsum("i,ia,ib->ab", q, vecs, vecs.conj())
            if np.linalg.norm(recon - target.matrix) > tol:
                raise ValueError("ensemble does not reproduce its target state")
        self.weights = q
        self.vectors = vecs
        self.dims = tuple(dims)
        self.target = target

    def __len__(self) -> int:
        return self.weights.size

    @property
    def members(self) -> list[tuple[float, PureState]]:
        return [(float(q), PureState(v, self.dims)) for q, v in zip(self.weights, self.vectors)]

    def density(self) -> np.ndarray:
        return np.einsum("i,ia,ib->ab", self.weights, self.vectors, self.vectors.conj())

    def schmidt_vectors(self) -> np.ndarray:
        """Sorted Schmidt vectors of the members, one row each."""
        s = np.linalg.svd(self.vectors.reshape(-1, *self.dims), compute_uv=False)
        return s**2

    def average_schmidt_vector(self) -> ProbVector:
        return ProbVector(self.weights @ self.schmidt_vectors())


def ensemble_from_unitary(param: MixtureParameterization, V) -> Ensemble:
    """Decomposition of ``param.rho`` mixed by the unitary ``V``."""
    V = np.asarray(V, dtype=complex)
    M = param.M
    if V.shape != (M, M):
        raise ValueError(f"expected a {M}x{M} unitary, got {V.shape}")
    if np.abs(V.conj().T @ V - np.eye(M)).max() > UNITARY_TOL:
        raise ValueError("mixing matrix is not unitary")
    psi = (param.weighted_vectors @ V[: param.rank, :]).T
    q = np.einsum("ia,ia->i", psi, psi.conj()).real
    keep = q >= MIN_WEIGHT
    q = q[keep]
    return Ensemble(q / q.sum(), psi[keep], param.dims, target=param.rho)


def _member_spectra(param: MixtureParameterization, V) -> np.ndarray:
    psi = (param.weighted_vectors @ np.asarray(V)[: param.rank, :]).T
    s = np.linalg.svd(psi.reshape(-1, *param.dims), compute_uv=False)
    return s**2


def g_vector(param: MixtureParameterization, V) -> ProbVector:
    """``sum_i q_i mu(psi_i)`` with each member's Schmidt vector sorted."""
    V = np.asarray(V, dtype=complex)
    if np.abs(V.conj().T @ V - np.eye(param.M)).max() > UNITARY_TOL:
        raise ValueError("mixing matrix is not unitary")
    return ProbVector(_member_spectra(param, V).sum(axis=0))


# --- objectives on the member spectra ----------------------------------------
#
# ``lam`` has one row per member holding the sorted eigenvalues of the
# unnormalised reduced state Tr_B(q_i |psi_i><psi_i|), i.e. q_i * mu(psi_i).


class SpectralObjective:
    """Ensemble functional ``F(lam)`` with its gradient ``dF/dlam``."""

    name = "objective"

    def __call__(self, lam: np.ndarray) -> tuple[float, np.ndarray]:
        raise NotImplementedError

    def value(self, ensemble: Ensemble) -> float:
        lam = ensemble.weights[:, None] * ensemble.schmidt_vectors()
        return self(lam)[0]


class PartialSumObjective(SpectralObjective):
    """``s_j`` of the averaged sorted Schmidt vector."""

    def __init__(self, j: int):
        self.j = j
        self.name = f"s_{j}"

    def __call__(self, lam):
        grad = np.zeros_like(lam)
        grad[:, : self.j] = 1.0
        return float(lam[:, : self.j].sum()), grad


class ConvexRoofObjective(SpectralObjective):
    """``sum_i q_i f(mu(psi_i))``."""

    def __init__(self, f: SchurFunction):
        self.f = f
        self.name = f"cr_{f.name}"

    def __call__(self, lam):
        q = lam.sum(axis=1)
        total = 0.0
        grad = np.zeros_like(lam)
        for i in np.flatnonzero(q > 1e-300):
            mu = lam[i] / q[i]
            fv = self.f.func(mu)
            fg = self.f.gradient(mu)
            total += q[i] * fv
            # derivative of the degree-one homogeneous map x -> (sum x) f(x / sum x)
            grad[i] = fv + fg - mu @ fg
        return float(total), grad


class TopObjective(SpectralObjective):
    """``f`` of the averaged sorted Schmidt vector."""

    def __init__(self, f: SchurFunction):
        self.f = f
        self.name = f"top_{f.name}"

    def __call__(self, lam):
        g = lam.sum(axis=0)
        g = g / g.sum()
        return float(self.f.func(g)), np.broadcast_to(self.f.gradient(g), lam.shape).copy()


# --- optimiser ----------------------------------------------------------------


@dataclass(frozen=True)
class OptimizerConfig:
    starts: int = 16
    max_iters: int = 5000
    tol: float = 1e-10
    seed: int = 0
    M: Optional[int] = None
    method: str = "lbfgs"
    spread: float = math.pi / 2
    workers: Optional[int] = None

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.method not in ("lbfgs", "nelder-mead"):
            raise ValueError(f"unknown method {self.method!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def resolved_workers(self) -> int:
        if self.workers is not None:
            return max(1, int(self.workers))
        env = os.environ.get(THREADS_ENV, "").strip()
        return max(1, int(env)) if env else 1


@dataclass
class SearchReport:
    """Per-start outcome of one multi-start search."""

    objective: str
    sense: str
    values: list[float] = field(default_factory=list)
    iterations: list[int] = field(default_factory=list)
    converged_flags: list[bool] = field(default_factory=list)
    baseline: float = float("nan")
    best_start: int = -1
    best_value: float = float("nan")

    @property
    def converged(self) -> bool:
        return self.best_start < 0 or self.converged_flags[self.best_start]

    def as_dict(self) -> dict:
        return {
            "objective": self.objective,
            "sense": self.sense,
            "best_value": self.best_value,
            "best_start": self.best_start,
            "baseline": self.baseline,
            "converged": self.converged,
            "values": list(self.values),
            "iterations": list(self.iterations),
            "converged_flags": list(self.converged_flags),
        }


def start_point(cfg: OptimizerConfig, start: int, n: int) -> np.ndarray:
    """Initial parameters for one start; depends only on ``(seed, start)``."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(start,)))
    return rng.normal(0.0, cfg.spread, n)


class _Problem:
    """Objective over the coefficients alpha, with its exact gradient."""

    def __init__(self, param: MixtureParameterization, objective: SpectralObjective, sign: float):
        self.param = param
        self.objective = objective
        self.sign = sign
        self.K = param.weighted_vectors
        self.Kh = self.K.conj().T

    def __call__(self, alpha):
        p = self.param
        M, r = p.M, p.rank
        dA, dB = p.dims
        th, U = np.linalg.eigh(params_to_hermitian(alpha, M))
        e = np.exp(1j * th)
        W = (U[:r] * e) @ U.conj().T  # only rows 1..r of V enter
        A = (self.K @ W).T.reshape(M, dA, dB)
        u, s, vh = np.linalg.svd(A, full_matrices=False)
        val, dlam = self.objective(s**2)
        GA = 2 * np.einsum("mak,mk,mkb->mab", u, dlam * s, vh)
        GW = self.Kh @ GA.reshape(M, dA * dB).T
        B = U.conj().T[:, :r] @ GW @ U
        # divided differences of exp(i theta), written to stay stable as theta_a -> theta_b
        dth = th[:, None] - th[None, :]
        phi = 1j * np.exp(0.5j * (th[:, None] + th[None, :])) * np.sinc(dth / (2 * np.pi))
        gam = U @ (phi.conj() * B) @ U.conj().T
        grad = hermitian_to_params((gam + gam.conj().T) / 2, M)
        return self.sign * val, self.sign * grad

    def value(self, alpha) -> float:
        return self.sign * self(alpha)[0]


def _run_starts(task: Callable[[int], tuple[float, np.ndarray, int, bool]], cfg: OptimizerConfig):
    workers = min(cfg.resolved_workers(), cfg.starts)
    if workers == 1:
        return [task(k) for k in range(cfg.starts)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, range(cfg.starts)))


def _search(param, objective, cfg: OptimizerConfig, maximize: bool):
    """Multi-start search; returns (best value, best alpha, report)."""
    sign = -1.0 if maximize else 1.0
    n = param.M * param.M
    report = SearchReport(
        objective=getattr(objective, "name", "objective"), sense="max" if maximize else "min"
    )

    if isinstance(objective, SpectralObjective):
        problem = _Problem(param, objective, sign)
        fun = problem.value
        use_grad = cfg.method == "lbfgs"
    else:
        def fun(alpha):
            V = unitary_from_params(alpha, param.M)
            return float(objective(ensemble_from_unitary(param, V)))

        problem = None
        use_grad = False

    def task(k):
        x0 = start_point(cfg, k, n)
        if use_grad:
            res = minimize(
                problem, x0, jac=True, method="L-BFGS-B",
                options={"maxiter": cfg.max_iters, "ftol": cfg.tol, "gtol": 1e-12},
            )
        else:
            res = minimize(
                lambda a: sign * fun(a) if problem is None else problem(a)[0], x0,
                method="Nelder-Mead",
                options={"maxiter": cfg.max_iters, "fatol": cfg.tol, "xatol": 1e-9, "adaptive": True},
            )
        value = fun(res.x)
        return value, res.x, int(res.nit), bool(res.nit < cfg.max_iters)

    results = _run_starts(task, cfg)
    zero = np.zeros(n)
    report.baseline = fun(zero)
    best_value, best_alpha = report.baseline, zero
    for k, (value, alpha, nit, ok) in enumerate(results):
        report.values.append(float(value))
        report.iterations.append(nit)
        report.converged_flags.append(ok)
        better = value > best_value if maximize else value < best_value
        if better:
            best_value, best_alpha, report.best_start = value, alpha, k
    report.best_value = float(best_value)
    return float(best_value), best_alpha, report


def maximize_Sj(param: MixtureParameterization, j: int, cfg: OptimizerConfig):
    """Largest ``s_j`` of ``g(V(alpha), rho)`` found by the multi-start search.

    Returns ``(S_j, best_alpha, report)``.  The spectral decomposition
    (``alpha = 0``) is always a candidate, so ``S_j`` never falls below it.
    """
    if not 1 <= j <= param.d - 1:
        raise ValueError(f"j={j} outside 1..{param.d - 1}")
    value, alpha, report = _search(param, PartialSumObjective(j), cfg, maximize=True)
    return min(value, 1.0), alpha, report


def minimize_ensemble_objective(
    param: MixtureParameterization,
    objective: Union[SpectralObjective, Callable[[Ensemble], float]],
    cfg: OptimizerConfig,
):
    """Smallest objective value over decompositions ``V(alpha)``.

    Returns ``(value, ensemble, report)``.
    """
    value, alpha, report = _search(param, objective, cfg, maximize=False)
    ens = ensemble_from_unitary(param, unitary_from_params(alpha, param.M))
    return value, ens, report
