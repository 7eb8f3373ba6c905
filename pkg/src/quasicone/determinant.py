"""Symbolic acoustic determinants, the reduced-form closed form, perfect
square detection, and the pencil proportionality check det(T - lam T1)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.optimize

from .forms import AcousticMatrix, QuadraticForm, ReducedOrthotropicForm, acoustic_matrix
from .poly import (HomogeneousPolynomial, monomial_exponents, poly_combine,
                   poly_mul)

# monomial support of the reduced-form determinant: pure sextics, the six
# quartic-quadratic mixtures, and the central monomial
REDUCED_DET_SUPPORT = (
    (6, 0, 0), (0, 6, 0), (0, 0, 6),
    (4, 2, 0), (2, 4, 0), (4, 0, 2), (2, 0, 4), (0, 4, 2), (0, 2, 4),
    (2, 2, 2),
)


@dataclass(frozen=True)
class DetReport:
    """Determinant analysis results bundled for serialization."""

    det: HomogeneousPolynomial
    closed_form_residual: Optional[float]
    is_perfect_square: bool
    square_root: Optional[HomogeneousPolynomial]

    def to_json(self) -> dict:
        return {
            "det": self.det.to_json(),
            "closed_form_residual": self.closed_form_residual,
            "is_perfect_square": self.is_perfect_square,
            "square_root": self.square_root.to_json() if self.square_root else None,
        }


def acoustic_det(t: AcousticMatrix) -> HomogeneousPolynomial:
    """Symbolic 3x3 determinant by cofactor expansion along the first row."""
    e = t.entries

    def mul(p, q):
        return poly_mul(p, q)

    def sub(p, q):
        return poly_combine(p, q, 1.0, -1.0)

    c00 = sub(mul(e[1][1], e[2][2]), mul(e[1][2], e[2][1]))
    c01 = sub(mul(e[1][0], e[2][2]), mul(e[1][2], e[2][0]))
    c02 = sub(mul(e[1][0], e[2][1]), mul(e[1][1], e[2][0]))
    det = sub(mul(e[0][0], c00), mul(e[0][1], c01))
    return poly_combine(det, mul(e[0][2], c02), 1.0, 1.0)


def reduced_det_closed_form(r: ReducedOrthotropicForm) -> HomogeneousPolynomial:
    """The ten-coefficient sextic determinant of the reduced form's acoustic
    matrix, written out directly."""
    a = r.a
    a11, a22, a33 = a[0, 0], a[1, 1], a[2, 2]
    a12, a13, a23 = a[0, 1], a[0, 2], a[1, 2]
    b, c, d = r.b, r.c, r.d
    terms = {
        (6, 0, 0): a11 * b * c,
        (0, 6, 0): a22 * b * d,
        (0, 0, 6): a33 * c * d,
        (4, 2, 0): a11 * b * d + a11 * a22 * c + b * b * c - a12 * a12 * c,
        (2, 4, 0): a22 * b * c + a11 * a22 * d + b * b * d - a12 * a12 * d,
        (4, 0, 2): a11 * c * d + a11 * a33 * b + c * c * b - a13 * a13 * b,
        (2, 0, 4): a33 * b * c + a11 * a33 * d + c * c * d - a13 * a13 * d,
        (0, 4, 2): a22 * c * d + a22 * a33 * b + d * d * b - a23 * a23 * b,
        (0, 2, 4): a33 * b * d + a22 * a33 * c + d * d * c - a23 * a23 * c,
        (2, 2, 2): (a11 * a22 * a33 + 2 * a12 * a13 * a23
                    - a11 * a23 * a23 - a22 * a13 * a13 - a33 * a12 * a12
                    + a11 * d * d + a22 * c * c + a33 * b * b + 2 * b * c * d),
    }
    return HomogeneousPolynomial(6, terms)


_SEXTIC_EXPS = monomial_exponents(6)   # 28 monomials
_CUBIC_EXPS = monomial_exponents(3)    # 10 monomials
_SQUARE_INDEX: dict[tuple[int, int, int], list[tuple[int, int]]] = {}
for _i, _e1 in enumerate(_CUBIC_EXPS):
    for _j, _e2 in enumerate(_CUBIC_EXPS):
        _key = (_e1[0] + _e2[0], _e1[1] + _e2[1], _e1[2] + _e2[2])
        _SQUARE_INDEX.setdefault(_key, []).append((_i, _j))


def _cubic_square_coeffs(s: np.ndarray) -> np.ndarray:
    """Coefficients of S^2 in the 28-monomial sextic basis, S in cubic basis."""
    out = np.zeros(len(_SEXTIC_EXPS))
    for k, exp in enumerate(_SEXTIC_EXPS):
        out[k] = sum(s[i] * s[j] for (i, j) in _SQUARE_INDEX[exp])
    return out


def _square_jacobian(s: np.ndarray) -> np.ndarray:
    J = np.zeros((len(_SEXTIC_EXPS), len(_CUBIC_EXPS)))
    for k, exp in enumerate(_SEXTIC_EXPS):
        for (i, j) in _SQUARE_INDEX[exp]:
            J[k, i] += s[j]
            J[k, j] += s[i]
    return J


def _support_rule_applies(p: HomogeneousPolynomial) -> bool:
    """Exact non-square certificate for reduced-support sextics.

    When the support sits inside the ten reduced-determinant monomials and
    all three pure coefficients are positive, a hypothetical square root
    would need all three pure cubic monomials, whose cross terms y_i^3 y_j^3
    (or y_i^4 y_j y_k, if y1 y2 y3 were present) fall outside the support.
    """
    support = set(p.terms)
    if not support or not support.issubset(set(REDUCED_DET_SUPPORT)):
        return False
    return all(p.coefficient(e) > 0.0 for e in ((6, 0, 0), (0, 6, 0), (0, 0, 6)))


def perfect_square_test(
        p: HomogeneousPolynomial,
        rel_tol: float = 1e-8) -> tuple[bool, Optional[HomogeneousPolynomial]]:
    """Decide whether a sextic is the square of a cubic form.

    The exact support rule is tried first; otherwise a Gauss-Newton
    least-squares fit over the 10 cubic coefficients runs from multiple
    monomial starts.  Returns (flag, root); the root's leading graded-lex
    coefficient is normalized positive.
    """
    if p.degree != 6:
        raise ValueError(f"perfect_square_test needs a sextic, got degree {p.degree}")
    if p.is_zero():
        return True, HomogeneousPolynomial.zero(3)
    if _support_rule_applies(p):
        return False, None

    target = np.array([p.coefficient(e) for e in _SEXTIC_EXPS])
    scale = float(np.max(np.abs(target)))

    starts = []
    order = np.argsort(-np.abs(target))
    for k in order[:6]:
        e = _SEXTIC_EXPS[k]
        if all(v % 2 == 0 for v in e) and target[k] > 0:
            s0 = np.zeros(len(_CUBIC_EXPS))
            half = (e[0] // 2, e[1] // 2, e[2] // 2)
            s0[_CUBIC_EXPS.index(half)] = np.sqrt(target[k])
            starts.append(s0)
    # composite start: all even monomials at once
    s0 = np.zeros(len(_CUBIC_EXPS))
    for k, e in enumerate(_SEXTIC_EXPS):
        if all(v % 2 == 0 for v in e) and target[k] > 0:
            half = (e[0] // 2, e[1] // 2, e[2] // 2)
            s0[_CUBIC_EXPS.index(half)] = np.sqrt(target[k])
    if np.any(s0):
        starts.append(s0)
    if not starts:
        starts.append(np.full(len(_CUBIC_EXPS), np.sqrt(scale) / 10))

    best = None
    for s0 in starts:
        res = scipy.optimize.least_squares(
            lambda s: _cubic_square_coeffs(s) - target,
            s0, jac=_square_jacobian, method="lm", xtol=1e-15, ftol=1e-15,
            max_nfev=400)
        err = float(np.max(np.abs(_cubic_square_coeffs(res.x) - target)))
        if best is None or err < best[0]:
            best = (err, res.x)
        if err <= rel_tol * scale * 0.01:
            break

    err, s = best
    if err <= rel_tol * scale:
        # canonical sign: first nonzero cubic coefficient positive
        for v in s:
            if abs(v) > 1e-12 * max(np.max(np.abs(s)), 1e-300):
                if v < 0:
                    s = -s
                break
        root = HomogeneousPolynomial(3, {e: c for e, c in zip(_CUBIC_EXPS, s)})
        return True, root
    return False, None


@dataclass(frozen=True)
class PencilIdentityReport:
    """Per-sample proportionality of det(T - lam T1) against det(T)."""

    lambdas: tuple[float, ...]
    residuals: tuple[float, ...]
    scalings: tuple[float, ...]      # fitted mu per sample
    proportional: bool
    gamma: Optional[float]           # cubic 1 - gamma lam + beta lam^2 - alpha lam^3
    beta: Optional[float]
    alpha: Optional[float]

    def to_json(self) -> dict:
        return {
            "lambdas": list(self.lambdas),
            "residuals": list(self.residuals),
            "scalings": list(self.scalings),
            "proportional": self.proportional,
            "cubic": None if self.gamma is None else
                     {"gamma": self.gamma, "beta": self.beta, "alpha": self.alpha},
        }


def pencil_identity_check(q: QuadraticForm, q1: QuadraticForm,
                          lam_samples: Sequence[float],
                          rel_tol: float = 1e-9) -> PencilIdentityReport:
    """Test det(T - lam T1) = mu(lam) * det(T) at the given samples.

    The residual per sample is the best-scaling coefficient distance
    min_mu |det(T - lam T1) - mu det(T)| relative to the larger coefficient
    magnitude.  When every sample is proportional, the cubic
    mu(lam) = 1 - gamma lam + beta lam^2 - alpha lam^3 is fitted.
    """
    lam_samples = [float(t) for t in lam_samples]
    det_t = acoustic_det(acoustic_matrix(q))
    if det_t.is_zero():
        raise ValueError("det(T) is identically zero; proportionality undefined")
    base = np.array([det_t.coefficient(e) for e in _SEXTIC_EXPS])
    base_norm2 = float(base @ base)

    residuals = []
    scalings = []
    for lam in lam_samples:
        mixed = QuadraticForm(q.gram - lam * q1.gram)
        det_lam = acoustic_det(acoustic_matrix(mixed))
        vec = np.array([det_lam.coefficient(e) for e in _SEXTIC_EXPS])
        mu = float(vec @ base) / base_norm2
        resid = vec - mu * base
        scale = 1.0 + max(float(np.max(np.abs(vec))), abs(mu) * float(np.max(np.abs(base))))
        residuals.append(float(np.max(np.abs(resid))) / scale)
        scalings.append(mu)

    proportional = all(r <= rel_tol for r in residuals)
    gamma = beta = alpha = None
    if proportional and len(lam_samples) >= 4:
        V = np.vander(np.array(lam_samples), 4, increasing=True)
        coefs, *_ = np.linalg.lstsq(V, np.array(scalings), rcond=None)
        # mu(lam) = c0 + c1 lam + c2 lam^2 + c3 lam^3 with c0 = 1
        gamma, beta, alpha = -float(coefs[1]), float(coefs[2]), -float(coefs[3])
    return PencilIdentityReport(
        lambdas=tuple(lam_samples), residuals=tuple(residuals),
        scalings=tuple(scalings), proportional=proportional,
        gamma=gamma, beta=beta, alpha=alpha)


def det_report(q: QuadraticForm,
               reduced: Optional[ReducedOrthotropicForm] = None) -> DetReport:
    """Symbolic determinant plus closed-form cross-check and square test."""
    det = acoustic_det(acoustic_matrix(q))
    residual = None
    if reduced is not None:
        closed = reduced_det_closed_form(reduced)
        support = set(det.terms) | set(closed.terms)
        scale = 1.0 + max(det.max_coeff(), closed.max_coeff())
        worst = max((abs(det.terms.get(e, 0.0) - closed.terms.get(e, 0.0))
                     for e in support), default=0.0)
        residual = worst / scale
    flag, root = perfect_square_test(det)
    return DetReport(det=det, closed_form_residual=residual,
                     is_perfect_square=flag, square_root=root)
