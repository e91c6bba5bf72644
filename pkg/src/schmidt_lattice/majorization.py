"""Probability vectors, majorization, Lorenz curves and the majorization lattice.

Every vector here lives in the simplex of ``d``-dimensional probability
vectors.  Comparisons are always made on the non-increasingly sorted view.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

TOL_MAJ = 1e-9
CLAMP_EPS = 1e-12
SUM_TOL = 1e-9


class ProbVector:
    """Immutable probability vector.

    Entries in ``[-1e-12, 0)`` are clamped to zero and a sum that is off by
    at most ``1e-9`` is renormalised; anything worse raises ``ValueError``.
    """

    __slots__ = ("_p",)

    def __init__(self, entries: Iterable[float]):
        p = np.array(entries, dtype=float).reshape(-1)
        if p.size == 0:
            raise ValueError("probability vector needs at least one entry")
        if not np.all(np.isfinite(p)):
            raise ValueError("probability vector has non-finite entries")
        if np.any(p < -CLAMP_EPS):
            raise ValueError(f"negative probability {p.min():.3e}")
        p[p < 0] = 0.0
        total = p.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        p /= total
        p.flags.writeable = False
        self._p = p

    @property
    def entries(self) -> np.ndarray:
        return self._p

    @property
    def d(self) -> int:
        return self._p.size

    def sorted(self) -> "ProbVector":
        """Non-increasing view.  Ties keep their original order."""
        order = np.argsort(-self._p, kind="stable")
        out = ProbVector.__new__(ProbVector)
        p = self._p[order].copy()
        p.flags.writeable = False
        out._p = p
        return out

    def partial_sums(self) -> np.ndarray:
        """Cumulative sums ``s_0..s_d`` of the sorted entries."""
        s = np.concatenate(([0.0], np.cumsum(np.sort(self._p)[::-1])))
        s[-1] = 1.0
        return s

    def __array__(self, dtype=None, copy=None):
        return np.array(self._p, dtype=dtype)

    def __len__(self) -> int:
        return self._p.size

    def __iter__(self):
        return iter(self._p.tolist())

    def __getitem__(self, i):
        return self._p[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbVector):
            return NotImplemented
        return self.d == other.d and bool(np.array_equal(self._p, other._p))

    def __hash__(self) -> int:
        return hash(self._p.tobytes())

    def __repr__(self) -> str:
        return f"ProbVector({np.array2string(self._p, precision=6, separator=', ')})"


def as_prob_vector(u) -> ProbVector:
    return u if isinstance(u, ProbVector) else ProbVector(u)


def uniform(d: int) -> ProbVector:
    return ProbVector(np.full(d, 1.0 / d))


def top(d: int) -> ProbVector:
    e = np.zeros(d)
    e[0] = 1.0
    return ProbVector(e)


def partial_sum(u, j: int) -> float:
    """Sum of the ``j`` largest entries of ``u`` (``s_0 = 0``, ``s_d = 1``)."""
    u = as_prob_vector(u)
    if not 0 <= j <= u.d:
        raise ValueError(f"index {j} outside 0..{u.d}")
    return float(u.partial_sums()[j])


def is_majorized(u, v, tol: float = TOL_MAJ) -> bool:
    """True iff ``u`` is majorized by ``v`` (``u ≼ v``) up to ``tol`` on partial sums."""
    u, v = as_prob_vector(u), as_prob_vector(v)
    if u.d != v.d:
        raise ValueError(f"dimension mismatch: {u.d} vs {v.d}")
    su, sv = u.partial_sums(), v.partial_sums()
    return bool(np.all(su[1:-1] <= sv[1:-1] + tol))


@dataclass(frozen=True)
class LorenzCurve:
    partial_sums: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.partial_sums, dtype=float)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("a Lorenz curve needs at least the points s_0 and s_d")
        if abs(s[0]) > SUM_TOL or abs(s[-1] - 1.0) > SUM_TOL:
            raise ValueError("Lorenz curve must run from 0 to 1")
        if np.any(np.diff(s) < -SUM_TOL):
            raise ValueError("Lorenz curve must be non-decreasing")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "partial_sums", s)

    @property
    def d(self) -> int:
        return self.partial_sums.size - 1

    @classmethod
    def of(cls, u) -> "LorenzCurve":
        return cls(as_prob_vector(u).partial_sums())

    def is_concave(self, tol: float = SUM_TOL) -> bool:
        inc = np.diff(self.partial_sums)
        return bool(np.all(inc[1:] <= inc[:-1] + tol))


def lorenz_eval(c: LorenzCurve, x: float) -> float:
    """Piecewise-linear Lorenz curve at ``x`` in ``[0, d]``."""
    if not 0.0 <= x <= c.d:
        raise ValueError(f"x={x} outside [0, {c.d}]")
    return float(np.interp(x, np.arange(c.d + 1), c.partial_sums))


def upper_concave_envelope(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Vertices of the least concave majorant of points sorted by abscissa.

    Monotone-chain upper hull.  Points lying exactly on a chord are kept, so
    a curve with already-concave increments comes back unchanged.
    """
    if len(points) < 2:
        raise ValueError("need at least two points")
    pts = [(float(x), float(y)) for x, y in points]
    if any(pts[k + 1][0] <= pts[k][0] for k in range(len(pts) - 1)):
        raise ValueError("abscissae must be strictly increasing")
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            # middle point strictly below the chord from hull[-2] to p
            if (y1 - y0) * (p[0] - x0) < (p[1] - y0) * (x1 - x0):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def envelope_vector(sums: Sequence[float]) -> tuple[ProbVector, list[tuple[float, float]]]:
    """Vector whose Lorenz curve is the concave envelope of ``(j, sums[j])``.

    ``sums`` holds ``S_0..S_d``; the values are clipped into ``[0, 1]`` and the
    endpoints forced to 0 and 1 before the hull is taken.
    """
    s = np.clip(np.asarray(sums, dtype=float), 0.0, 1.0)
    s[0], s[-1] = 0.0, 1.0
    d = s.size - 1
    verts = upper_concave_envelope(list(zip(range(d + 1), s)))
    xs, ys = zip(*verts)
    lorenz = np.interp(np.arange(d + 1), xs, ys)
    inc = np.diff(lorenz)
    inc[inc < 0] = 0.0
    return ProbVector(inc / inc.sum()), [(int(x), y) for x, y in verts]


def lattice_supremum(vectors: Iterable) -> ProbVector:
    """Least upper bound of a finite set in the majorization lattice."""
    vecs = [as_prob_vector(u) for u in vectors]
    if not vecs:
        raise ValueError("supremum of an empty set")
    d = vecs[0].d
    if any(u.d != d for u in vecs):
        raise ValueError("all vectors must share one dimension")
    S = np.max([u.partial_sums() for u in vecs], axis=0)
    return envelope_vector(S)[0]


# --- Schur-concave functions ------------------------------------------------


@dataclass(frozen=True)
class SchurFunction:
    """Symmetric concave ``f`` on the simplex with ``f(1,0,..,0) = 0``.

    ``func`` and ``grad`` receive the sorted (non-increasing) vector.  ``grad``
    may be a supergradient; when omitted, central differences are used.
    """

    name: str
    func: Callable[[np.ndarray], float]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    strictly_concave: bool = False

    def __call__(self, u) -> float:
        p = np.sort(np.asarray(u, dtype=float))[::-1]
        return float(self.func(p))

    def gradient(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(p), dtype=float)
        h = 1e-7
        g = np.empty_like(p)
        for k in range(p.size):
            e = np.zeros_like(p)
            e[k] = h
            g[k] = (self.func(p + e) - self.func(p - e)) / (2 * h)
        return g


def _gap(p):
    return 1.0 - p[0] + p[-1]


def _gap_grad(p):
    g = np.zeros_like(p)
    g[0] -= 1.0
    g[-1] += 1.0
    return g


def _nshannon(p):
    q = p[p > 0]
    return float(-(q * np.log(q)).sum() / np.log(p.size))


def _nshannon_grad(p):
    # clipped so boundary points keep a finite (very steep) slope
    return -(np.log(np.maximum(p, 1e-15)) + 1.0) / np.log(p.size)


def _one_minus_max(p):
    return 1.0 - p[0]


def _one_minus_max_grad(p):
    g = np.zeros_like(p)
    g[0] = -1.0
    return g


_BUILTINS = {
    "gap": lambda: SchurFunction("gap", _gap, _gap_grad),
    "normalized_shannon": lambda: SchurFunction(
        "normalized_shannon", _nshannon, _nshannon_grad, strictly_concave=True
    ),
    "one_minus_max": lambda: SchurFunction("one_minus_max", _one_minus_max, _one_minus_max_grad),
}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_f(name: str) -> SchurFunction:
    """``gap`` (1 - u1 + ud), ``normalized_shannon`` (H/ln d) or ``one_minus_max``."""
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise ValueError(f"unknown function {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None
