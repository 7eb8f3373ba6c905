"""Minor-cofactor sums, the matrix pencil det(A - tB), and the normalized
inequality chain for symmetric PSD-ordered pairs.

For symmetric n x n matrices A, B the sums

    S_m = sum over row-sets I, column-sets J, |I| = |J| = m, of
          det(B[I, J]) * (-1)^{sum I + sum J} * det(A[I^c, J^c])

are exactly the coefficients of det(A - tB) = sum_m (-1)^m S_m t^m, with
S_0 = det(A) and S_n = det(B).  When A >= B >= 0 (as quadratic forms) the
normalized sequence S_m / C(n, m) is non-increasing in m, and for B positive
definite the pencil roots are real and lie in [1, inf).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .poly import UnivariatePolynomial, default_abscissae, univariate_from_samples

MAX_N = 8
PSD_TOL_REL = 1e-10


class HypothesisError(ValueError):
    """A pair fails the PSD-ordering hypotheses; the message names the culprit."""


@dataclass(frozen=True)
class SymmetricMatrixPair:
    """Pair of symmetric n x n matrices, n in [2, 8]."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
            raise ValueError(f"A, B must be square and same shape, got {A.shape}, {B.shape}")
        n = A.shape[0]
        if not (2 <= n <= MAX_N):
            raise ValueError(f"n must be in [2, {MAX_N}], got {n}")
        for name, M in (("A", A), ("B", B)):
            scale = max(float(np.max(np.abs(M))), 1e-300)
            if np.max(np.abs(M - M.T)) > 1e-12 * scale:
                raise ValueError(f"{name} is not symmetric")
        A = 0.5 * (A + A.T)
        B = 0.5 * (B + B.T)
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def check_hypotheses(self) -> None:
        """Raise HypothesisError unless B >= 0 and A - B >= 0."""
        scale = max(float(np.linalg.norm(self.A, 2)),
                    float(np.linalg.norm(self.B, 2)), 1.0)
        tol = PSD_TOL_REL * scale
        wB = np.linalg.eigvalsh(self.B)
        if wB[0] < -tol:
            raise HypothesisError(
                f"B is not positive semidefinite (min eigenvalue {wB[0]:.3e})")
        wAB = np.linalg.eigvalsh(self.A - self.B)
        if wAB[0] < -tol:
            raise HypothesisError(
                f"A - B is not positive semidefinite (min eigenvalue {wAB[0]:.3e})")

    def shifted(self, eps: float) -> "SymmetricMatrixPair":
        I = np.eye(self.n)
        return SymmetricMatrixPair(self.A + eps * I, self.B + eps * I)


@dataclass(frozen=True)
class MinorSums:
    """s[m] = S_m for m = 0..n; s[0] = det(A), s[n] = det(B)."""

    s: tuple[float, ...]


def _stacked_det(M: np.ndarray, rows: list, cols: list) -> np.ndarray:
    """Determinants det(M[I, J]) for parallel lists of index tuples."""
    if not rows:
        return np.array([])
    m = len(rows[0])
    if m == 0:
        return np.ones(len(rows))
    sub = np.empty((len(rows), m, m))
    for t, (I, J) in enumerate(zip(rows, cols)):
        sub[t] = M[np.ix_(I, J)]
    return np.linalg.det(sub)


def minor_sum(pair: SymmetricMatrixPair, m: int) -> float:
    """S_m over all (I, J) minors of B against signed complements in A."""
    n = pair.n
    if not (0 <= m <= n):
        raise ValueError(f"m must be in [0, {n}], got {m}")
    idx = list(range(n))
    subsets = list(itertools.combinations(idx, m))
    comp = {S: tuple(i for i in idx if i not in S) for S in subsets}
    rows_B, cols_B, rows_A, cols_A, signs = [], [], [], [], []
    for I in subsets:
        for J in subsets:
            rows_B.append(I)
            cols_B.append(J)
            rows_A.append(comp[I])
            cols_A.append(comp[J])
            signs.append((-1) ** (sum(I) + sum(J)))
    detB = _stacked_det(pair.B, rows_B, cols_B)
    detA = _stacked_det(pair.A, rows_A, cols_A)
    return float(np.sum(np.asarray(signs) * detB * detA))


def minor_sums(pair: SymmetricMatrixPair) -> MinorSums:
    return MinorSums(tuple(minor_sum(pair, m) for m in range(pair.n + 1)))


def pencil_poly(pair: SymmetricMatrixPair) -> UnivariatePolynomial:
    """Coefficients of det(A - tB), by interpolation at n+1 nodes in [0, 2]."""
    n = pair.n
    ts = default_abscissae(n)
    samples = [(t, float(np.linalg.det(pair.A - t * pair.B))) for t in ts]
    poly, _ = univariate_from_samples(samples, n)
    return poly


def pencil_roots(pair: SymmetricMatrixPair, shift_tol: float = 1e-10) -> np.ndarray:
    """Roots of det(A - tB) for B positive definite, sorted ascending.

    They are the eigenvalues of the symmetric generalized problem A v = t B v.
    A singular B is not shifted silently; apply pair.shifted(eps) explicitly.
    """
    wB = np.linalg.eigvalsh(pair.B)
    scale = max(abs(wB[-1]), 1.0)
    if wB[0] <= shift_tol * scale:
        raise HypothesisError(
            f"B is singular to tolerance (min eigenvalue {wB[0]:.3e}); "
            "shift the pair with pair.shifted(eps) and retry")
    return np.sort(scipy.linalg.eigh(pair.A, pair.B, eigvals_only=True))


def _elementary_symmetric(roots: np.ndarray) -> np.ndarray:
    """e_0..e_n of the given values, by the recurrence."""
    e = np.zeros(len(roots) + 1)
    e[0] = 1.0
    for r in roots:
        e[1:] = e[1:] + r * e[:-1]
    return e


@dataclass(frozen=True)
class ChainReport:
    """Outcome of the normalized minor-sum chain check."""

    n: int
    sums: tuple[float, ...]
    min_slack: float           # min over k < m of S_k/C(n,k) - S_m/C(n,m)
    scale: float               # max(1, max |S_m|), slack normalizer
    vieta_checked: bool
    vieta_residual: float      # max relative residual of S_m = det(B) e_{n-m}
    roots: tuple[float, ...] | None

    @property
    def passed(self) -> bool:
        return self.min_slack >= -1e-9 * self.scale


def minor_chain_check(pair: SymmetricMatrixPair,
                      check_vieta: bool = True,
                      pd_cutoff: float = 1e-6) -> ChainReport:
    """Verify S_m/C(n,m) <= S_k/C(n,k) for 1 <= k < m <= n under A >= B >= 0.

    Also verifies, when B is positive definite (min eigenvalue > pd_cutoff),
    that S_m = det(B) * e_{n-m}(pencil roots) to 1e-8 relative.
    """
    pair.check_hypotheses()
    n = pair.n
    sums = minor_sums(pair).s
    normalized = [sums[m] / math.comb(n, m) for m in range(n + 1)]
    slacks = [normalized[k] - normalized[m]
              for k in range(1, n + 1) for m in range(k + 1, n + 1)]
    min_slack = min(slacks) if slacks else 0.0
    scale = max(1.0, max(abs(s) for s in sums))

    vieta_checked = False
    vieta_residual = 0.0
    roots = None
    if check_vieta and np.linalg.eigvalsh(pair.B)[0] > pd_cutoff:
        r = pencil_roots(pair)
        roots = tuple(float(t) for t in r)
        detB = float(np.linalg.det(pair.B))
        e = _elementary_symmetric(r)
        worst = 0.0
        for m in range(n + 1):
            predicted = detB * e[n - m]
            denom = max(abs(sums[m]), abs(predicted), 1.0)
            worst = max(worst, abs(sums[m] - predicted) / denom)
        vieta_checked = True
        vieta_residual = worst
    return ChainReport(n=n, sums=sums, min_slack=float(min_slack), scale=scale,
                       vieta_checked=vieta_checked, vieta_residual=vieta_residual,
                       roots=roots)


def random_ordered_pair(n: int, rng: np.random.Generator) -> SymmetricMatrixPair:
    """Seeded pair with B = G^T G and A = B + H^T H from Gaussian factors."""
    G = rng.standard_normal((n, n))
    H = rng.standard_normal((n, n))
    B = G.T @ G
    A = B + H.T @ H
    return SymmetricMatrixPair(A, B)
