"""Schmidt vector of a mixed state and the quantities derived from it.

The Schmidt vector of ``rho`` is the majorization supremum of the averaged
sorted Schmidt vectors of all its pure-state decompositions.  Its ``j``-th
Lorenz point is bounded below by ``S_j``, the largest ``s_j`` reachable by
one decomposition; the vector itself is read off the concave envelope of
``(j, S_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ensemble import (
    ConvexRoofObjective,
    Ensemble,
    MixtureParameterization,
    OptimizerConfig,
    SearchReport,
    TopObjective,
    maximize_Sj,
    minimize_ensemble_objective,
)
from .majorization import TOL_MAJ, ProbVector, SchurFunction, envelope_vector, is_majorized
from .quantum import DensityMatrix, PureState, mu_pure

PURE_THRESHOLD = 1e-9
MIXED_SUPPORT_EPS = 1e-3
PURE_SUPPORT_EPS = 1e-6


@dataclass
class SchmidtResult:
    nu: ProbVector
    S: list[float]
    envelope_vertices: list[tuple[int, float]]
    rank: int
    support_eps: float
    pure_bypass: bool = False
    diagnostics: list[SearchReport] = field(default_factory=list)

    @property
    def d(self) -> int:
        return self.nu.d

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.diagnostics)

    def lorenz_points(self) -> np.ndarray:
        return self.nu.partial_sums()


def _as_pure(rho: DensityMatrix) -> Optional[PureState]:
    """The dominant eigenvector when ``rho`` is pure to within 1e-9."""
    w, v = rho.spectrum()
    if w[0] > 1.0 - PURE_THRESHOLD:
        return PureState.normalized(v[:, 0], rho.dims)
    return None


def _support(nu: ProbVector, eps: float) -> int:
    return int(np.count_nonzero(nu.entries > eps))


def schmidt_vector(
    rho: DensityMatrix,
    cfg: Optional[OptimizerConfig] = None,
    support_eps: Optional[float] = None,
    bypass: bool = True,
) -> SchmidtResult:
    """Schmidt vector of ``rho`` with the optimised partial sums behind it.

    Pure inputs are answered exactly from their Schmidt decomposition unless
    ``bypass`` is off.
    """
    d = rho.d
    if d < 2:
        raise ValueError("the Schmidt vector needs min(dA, dB) >= 2")
    cfg = cfg or OptimizerConfig()

    psi = _as_pure(rho) if bypass else None
    if psi is not None:
        nu = mu_pure(psi)
        eps = PURE_SUPPORT_EPS if support_eps is None else support_eps
        sums = nu.partial_sums()
        verts = [(j, float(sums[j])) for j in range(d + 1)]
        return SchmidtResult(nu, list(sums[1:-1]), verts, _support(nu, eps), eps, pure_bypass=True)

    param = MixtureParameterization.from_state(rho, cfg.M)
    S, reports = [], []
    for j in range(1, d):
        value, _, report = maximize_Sj(param, j, cfg)
        S.append(value)
        reports.append(report)
    nu, verts = envelope_vector([0.0, *S, 1.0])
    eps = MIXED_SUPPORT_EPS if support_eps is None else support_eps
    return SchmidtResult(nu, S, verts, _support(nu, eps), eps, diagnostics=reports)


def schmidt_rank(
    rho: DensityMatrix, cfg: Optional[OptimizerConfig] = None, support_eps: Optional[float] = None
) -> int:
    """Support size of the Schmidt vector, which equals the Schmidt number."""
    return schmidt_vector(rho, cfg, support_eps).rank


schmidt_number = schmidt_rank


def _clamp(x: float) -> float:
    return float(min(1.0, max(0.0, x)))


def monotone_nu(
    f: SchurFunction,
    rho: DensityMatrix,
    cfg: Optional[OptimizerConfig] = None,
    result: Optional[SchmidtResult] = None,
) -> float:
    """``f`` applied to the Schmidt vector; pass ``result`` to reuse a computed one."""
    result = result or schmidt_vector(rho, cfg)
    return _clamp(f(result.nu))


def convex_roof_search(f: SchurFunction, rho: DensityMatrix, cfg: Optional[OptimizerConfig] = None):
    """``(value, ensemble or None, report or None)`` for the convex roof of ``f``."""
    psi = _as_pure(rho)
    if psi is not None:
        return _clamp(f(mu_pure(psi))), None, None
    param = MixtureParameterization.from_state(rho, (cfg or OptimizerConfig()).M)
    value, ens, report = minimize_ensemble_objective(param, ConvexRoofObjective(f), cfg or OptimizerConfig())
    return _clamp(value), ens, report


def convex_roof(f: SchurFunction, rho: DensityMatrix, cfg: Optional[OptimizerConfig] = None) -> float:
    """Best found ``inf sum_i q_i f(mu(psi_i))``; an upper bound on the true roof."""
    return convex_roof_search(f, rho, cfg)[0]


def top_monotone_search(f: SchurFunction, rho: DensityMatrix, cfg: Optional[OptimizerConfig] = None):
    """``(value, ensemble or None, report or None)`` for the top monotone of ``f``.

    A pure state converts into ``rho`` iff its Schmidt vector is majorized by
    the averaged sorted Schmidt vector of some decomposition.  ``f`` is
    Schur-concave, so the cheapest such pure state has exactly that average,
    and the infimum over convertible pure states becomes an infimum of
    ``f(sum_i q_i mu(psi_i))`` over decompositions.
    """
    psi = _as_pure(rho)
    if psi is not None:
        return _clamp(f(mu_pure(psi))), None, None
    param = MixtureParameterization.from_state(rho, (cfg or OptimizerConfig()).M)
    value, ens, report = minimize_ensemble_objective(param, TopObjective(f), cfg or OptimizerConfig())
    return _clamp(value), ens, report


def top_monotone(f: SchurFunction, rho: DensityMatrix, cfg: Optional[OptimizerConfig] = None) -> float:
    return top_monotone_search(f, rho, cfg)[0]


def convertible_pure_to_pure(psi: PureState, phi: PureState, tol: float = TOL_MAJ) -> bool:
    """Whether ``psi`` can be turned into ``phi`` by LOCC."""
    if psi.d != phi.d:
        raise ValueError(f"Schmidt dimensions differ: {psi.d} vs {phi.d}")
    return is_majorized(mu_pure(psi), mu_pure(phi), tol)


def convertible_pure_to_mixed_witness(psi: PureState, ens: Ensemble, tol: float = TOL_MAJ) -> bool:
    """True when this particular ensemble certifies ``psi -> sum_n p_n |phi_n><phi_n|``.

    A ``False`` answer says nothing about other decompositions of the target.
    """
    avg = ens.average_schmidt_vector()
    if psi.d != avg.d:
        raise ValueError(f"Schmidt dimensions differ: {psi.d} vs {avg.d}")
    return is_majorized(mu_pure(psi), avg, tol)
