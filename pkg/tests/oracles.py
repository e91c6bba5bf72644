"""Reference computations that share no code path with the library."""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import brentq
from scipy.stats import unitary_group


def brute_force_supremum(vectors) -> np.ndarray:
    """Supremum via the pointwise max of two-point chords over all pairs.

    In one dimension the least concave majorant at ``x`` is the best chord
    between some ``a <= x <= b``.
    """
    S = np.max([np.concatenate(([0.0], np.cumsum(np.sort(v)[::-1]))) for v in vectors], axis=0)
    d = S.size - 1
    L = np.empty(d + 1)
    for x in range(d + 1):
        best = S[x]
        for a, b in itertools.combinations(range(d + 1), 2):
            if a <= x <= b:
                best = max(best, S[a] + (S[b] - S[a]) * (x - a) / (b - a))
        L[x] = best
    return np.diff(L)


def brute_force_hull_vertices(points):
    """Points not strictly below any chord between two other points."""
    keep = []
    for k, (x, y) in enumerate(points):
        below = False
        for a, b in itertools.combinations(range(len(points)), 2):
            (xa, ya), (xb, yb) = points[a], points[b]
            if xa < x < xb and y < ya + (yb - ya) * (x - xa) / (xb - xa) - 1e-15:
                below = True
        if not below:
            keep.append(points[k])
    return keep


def partial_trace_spectrum(psi: np.ndarray, dA: int, dB: int) -> np.ndarray:
    """Sorted spectrum of Tr_B |psi><psi| by explicit index sums."""
    rho = np.outer(psi, psi.conj())
    red = np.zeros((dA, dA), dtype=complex)
    for i in range(dA):
        for j in range(dA):
            red[i, j] = sum(rho[i * dB + k, j * dB + k] for k in range(dB))
    return np.sort(np.linalg.eigvalsh(red))[::-1]


# --- two qubits ----------------------------------------------------------------


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    Y = np.array([[0, -1j], [1j, 0]])
    YY = np.kron(Y, Y)
    R = rho @ YY @ rho.conj() @ YY
    ev = np.sqrt(np.abs(np.sort(np.linalg.eigvals(R).real)[::-1]))
    return float(max(0.0, ev[0] - ev[1] - ev[2] - ev[3]))


def two_qubit_nu1(rho: np.ndarray) -> float:
    """Largest Schmidt-vector entry of a two-qubit state.

    Each member of the Wootters decomposition has concurrence C(rho) and
    mu_1 = (1 + sqrt(1 - C^2))/2 is concave and decreasing in C, so no
    decomposition does better.
    """
    C = concurrence(rho)
    return 0.5 * (1.0 + np.sqrt(max(0.0, 1.0 - C * C)))


# --- isotropic states ------------------------------------------------------------
#
# Twirling with U ⊗ U* maps every decomposition of rho_F to one built from
# twirled pure states, so any ensemble quantity reduces to the best pure-state
# value at fixed fidelity F = |<phi_max|psi>|^2, followed by a concave
# (or convex) hull in F.  A pure state with sorted Schmidt vector mu reaches
# every fidelity in [0, (sum_i sqrt(mu_i))^2 / d].


def _upper_hull_eval(xs, ys, x):
    pts = []
    for p in zip(xs, ys):
        while len(pts) >= 2 and (pts[-1][1] - pts[-2][1]) * (p[0] - pts[-2][0]) <= (p[1] - pts[-2][1]) * (pts[-1][0] - pts[-2][0]):
            pts.pop()
        pts.append(p)
    hx, hy = zip(*pts)
    return float(np.interp(x, hx, hy))


def _lower_hull_eval(xs, ys, x):
    return -_upper_hull_eval(xs, [-y for y in ys], x)


def isotropic_partial_sum(d: int, j: int, lam: float, grid: int = 4001) -> float:
    """S_j of the isotropic state in closed form plus a concave hull in F.

    The best top-j mass t at fidelity F spreads mass evenly inside the top
    block and the tail, giving (sqrt(j t) + sqrt((d-j)(1-t)))^2 >= d F.
    """

    def fid(t):
        return (np.sqrt(j * t) + np.sqrt((d - j) * (1 - t))) ** 2 / d

    def h(F):
        if F <= fid(1.0):
            return 1.0
        if F >= fid(j / d):
            return j / d
        return brentq(lambda t: fid(t) - F, j / d, 1.0, xtol=1e-15)

    Fs = np.linspace(0.0, 1.0, grid)
    hs = [h(F) for F in Fs]
    return _upper_hull_eval(Fs, hs, lam)


def isotropic_nu(d: int, lam: float) -> np.ndarray:
    S = [0.0] + [isotropic_partial_sum(d, j, lam) for j in range(1, d)] + [1.0]
    L = [_upper_hull_eval(range(d + 1), S, x) for x in range(d + 1)]
    return np.diff(L)


def isotropic_convex_roof(f, d: int, lam: float, n: int = 500) -> float:
    """Convex roof of ``f`` on the isotropic state by enumerating Schmidt vectors.

    ``f`` takes a sorted vector.  Only ``d = 3`` is enumerated.
    """
    assert d == 3
    pts = []
    for a in np.linspace(1 / 3, 1.0, n):
        for c in np.linspace(0.0, (1 - a) / 2, n):
            b = 1 - a - c
            if b > a + 1e-12 or b < c - 1e-12:
                continue
            mu = np.array([a, b, c])
            pts.append(((np.sqrt(np.clip(mu, 0, None)).sum()) ** 2 / d, f(mu)))
    pts.sort()
    F = np.array([p[0] for p in pts])
    val = np.array([p[1] for p in pts])
    # best value reachable at fidelity >= F
    best = np.minimum.accumulate(val[::-1])[::-1]
    xs = np.concatenate(([0.0], F))
    ys = np.concatenate(([best[0]], best))
    return _lower_hull_eval(xs, ys, lam)


def twirl_sampling_roof(f, d: int, lam: float, samples: int, seed: int) -> float:
    """Random-ensemble estimate of the convex roof on an isotropic state.

    Each sample is a random pure state; its twirl contributes the points
    (0, f(mu)) and (F_max, f(mu)); the estimate is their lower hull at lam.
    """
    rng = np.random.default_rng(seed)
    pts = [(0.0, 0.0), (1.0 / d, 0.0), (1.0, f(np.full(d, 1.0 / d)))]
    for _ in range(samples):
        z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        mu = np.linalg.svd(z, compute_uv=False) ** 2
        mu /= mu.sum()
        mu = mu ** rng.uniform(0.2, 5.0)  # spread samples over the whole simplex
        mu /= mu.sum()
        mu = np.sort(mu)[::-1]
        pts.append((np.sqrt(mu).sum() ** 2 / d, f(mu)))
        pts.append((0.0, f(mu)))
    pts.sort()
    return _lower_hull_eval([p[0] for p in pts], [p[1] for p in pts], lam)


def random_unitary_roof(f, K: np.ndarray, dims, M: int, samples: int, seed: int) -> float:
    """Smallest ``sum_i q_i f(mu_i)`` over Haar-random mixing unitaries.

    ``K`` holds the columns sqrt(lam_j)|e_j>.
    """
    dA, dB = dims
    r = K.shape[1]
    best = np.inf
    for k in range(samples):
        V = unitary_group.rvs(M, random_state=seed + k)
        psi = (K @ V[:r, :]).T
        total = 0.0
        for v in psi:
            q = np.vdot(v, v).real
            if q < 1e-14:
                continue
            mu = np.linalg.svd((v / np.sqrt(q)).reshape(dA, dB), compute_uv=False) ** 2
            total += q * f(mu)
        best = min(best, total)
    return float(best)
