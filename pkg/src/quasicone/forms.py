"""Quadratic forms on 3x3 matrices and their orthotropic parameterizations.

A form Q is carried by its 9x9 symmetric Gram matrix in the fixed row-major
vectorization (i, j) -> 3*(i-1) + j (1-based), so Q(xi) = vec(xi) . G . vec(xi).
The module provides the Voigt orthotropic constructor, the reduction modulo
Null-Lagrangians to the 9-parameter shear-paired layout, biquadratic
evaluation Q(x (x) y), the acoustic matrix T(y) with x T(y) x^T = Q(x (x) y),
the Null-Lagrangian (2x2 minor) basis, and a catalog of historically
significant forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .poly import HomogeneousPolynomial

SYM_REL_TOL = 1e-12


def vec_index(i: int, j: int) -> int:
    """Row-major vectorization index for 0-based entry (i, j)."""
    return 3 * i + j


class FormError(ValueError):
    """Malformed or inconsistent form data."""


@dataclass(frozen=True)
class QuadraticForm:
    """Quadratic form on 3x3 matrices via its 9x9 symmetric Gram matrix."""

    gram: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gram, dtype=float)
        if g.shape != (9, 9):
            raise FormError(f"gram must be 9x9, got {g.shape}")
        scale = max(float(np.max(np.abs(g))), 1e-300)
        if np.max(np.abs(g - g.T)) > SYM_REL_TOL * scale:
            raise FormError("gram matrix is not symmetric")
        g = 0.5 * (g + g.T)
        g.setflags(write=False)
        object.__setattr__(self, "gram", g)

    def __call__(self, xi: np.ndarray) -> float:
        v = np.asarray(xi, dtype=float).reshape(9)
        return float(v @ self.gram @ v)

    def norm(self) -> float:
        return float(np.linalg.norm(self.gram, "fro"))

    def scaled(self, alpha: float) -> "QuadraticForm":
        return QuadraticForm(alpha * self.gram)

    def __add__(self, other: "QuadraticForm") -> "QuadraticForm":
        return QuadraticForm(self.gram + other.gram)

    def __sub__(self, other: "QuadraticForm") -> "QuadraticForm":
        return QuadraticForm(self.gram - other.gram)

    def gram_tensor(self) -> np.ndarray:
        """G4[i, k, j, l] = gram[(i,j), (k,l)], the layout used by T(y)."""
        return self.gram.reshape(3, 3, 3, 3).transpose(0, 2, 1, 3)


@dataclass(frozen=True)
class OrthotropicCoefficients:
    """The nine Voigt constants of an orthotropic elasticity tensor."""

    C11: float
    C22: float
    C33: float
    C12: float
    C13: float
    C23: float
    C44: float
    C55: float
    C66: float

    def diagonal_block(self) -> np.ndarray:
        return np.array([
            [self.C11, self.C12, self.C13],
            [self.C12, self.C22, self.C23],
            [self.C13, self.C23, self.C33],
        ])

    def strictly_positive(self) -> bool:
        """Positivity of all diagonal constants, the extreme-point hypothesis."""
        return all(v > 0 for v in
                   (self.C11, self.C22, self.C33, self.C44, self.C55, self.C66))


@dataclass(frozen=True)
class ReducedOrthotropicForm:
    """Null-Lagrangian-reduced orthotropic form.

    Q(xi) = sum a_ij xi_ii xi_jj + b (xi12^2 + xi21^2)
            + c (xi13^2 + xi31^2) + d (xi23^2 + xi32^2)
    """

    a: np.ndarray
    b: float
    c: float
    d: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (3, 3):
            raise FormError("a must be 3x3")
        if np.max(np.abs(a - a.T)) > SYM_REL_TOL * max(float(np.max(np.abs(a))), 1e-300):
            raise FormError("a must be symmetric")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "d", float(self.d))

    def parameter_vector(self) -> np.ndarray:
        """(a11, a22, a33, a12, a13, a23, b, c, d)."""
        a = self.a
        return np.array([a[0, 0], a[1, 1], a[2, 2], a[0, 1], a[0, 2], a[1, 2],
                         self.b, self.c, self.d])

    def strictly_positive(self) -> bool:
        a = self.a
        return all(v > 0 for v in (a[0, 0], a[1, 1], a[2, 2], self.b, self.c, self.d))


@dataclass(frozen=True)
class NullLagrangianCoeffs:
    """Weights for the nine 2x2 minors, (row-pair, col-pair) graded-lex order."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).reshape(9)
        if not np.all(np.isfinite(c)):
            raise FormError("minor weights must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)


# index pairs {1,2},{1,3},{2,3} in 0-based form, lex order
_PAIRS = [(0, 1), (0, 2), (1, 2)]


def minor_gram_basis() -> list[np.ndarray]:
    """Gram matrices of the nine 2x2 minors, in NullLagrangianCoeffs order.

    The minor for rows {i,j}, cols {k,l} (i<j, k<l) is
    xi_ik xi_jl - xi_il xi_jk.
    """
    basis = []
    for (i, j) in _PAIRS:
        for (k, l) in _PAIRS:
            N = np.zeros((9, 9))
            N[vec_index(i, k), vec_index(j, l)] += 0.5
            N[vec_index(j, l), vec_index(i, k)] += 0.5
            N[vec_index(i, l), vec_index(j, k)] -= 0.5
            N[vec_index(j, k), vec_index(i, l)] -= 0.5
            basis.append(N)
    return basis


_MINOR_BASIS = minor_gram_basis()


def form_from_voigt(c: OrthotropicCoefficients) -> QuadraticForm:
    """Gram of sum C_ij xi_ii xi_jj + C44 (xi23+xi32)^2 + C55 (xi31+xi13)^2
    + C66 (xi12+xi21)^2."""
    G = np.zeros((9, 9))
    blk = c.diagonal_block()
    for i in range(3):
        for j in range(3):
            G[vec_index(i, i), vec_index(j, j)] += blk[i, j]
    for w, (i, j) in [(c.C44, (1, 2)), (c.C55, (2, 0)), (c.C66, (0, 1))]:
        p, q = vec_index(i, j), vec_index(j, i)
        G[p, p] += w
        G[q, q] += w
        G[p, q] += w
        G[q, p] += w
    return QuadraticForm(G)


def form_from_reduced(r: ReducedOrthotropicForm) -> QuadraticForm:
    G = np.zeros((9, 9))
    for i in range(3):
        for j in range(3):
            G[vec_index(i, i), vec_index(j, j)] += r.a[i, j]
    for w, (i, j) in [(r.b, (0, 1)), (r.c, (0, 2)), (r.d, (1, 2))]:
        G[vec_index(i, j), vec_index(i, j)] += w
        G[vec_index(j, i), vec_index(j, i)] += w
    return QuadraticForm(G)


def form_from_single_shear(a: np.ndarray, b: float, c: float, d: float) -> QuadraticForm:
    """Gram of sum a_ij xi_ii xi_jj + b xi12^2 + c xi23^2 + d xi31^2.

    The non-paired shear layout; entered through the general Gram path.
    """
    a = np.asarray(a, dtype=float)
    G = np.zeros((9, 9))
    for i in range(3):
        for j in range(3):
            G[vec_index(i, i), vec_index(j, j)] += a[i, j]
    G[vec_index(0, 1), vec_index(0, 1)] += b
    G[vec_index(1, 2), vec_index(1, 2)] += c
    G[vec_index(2, 0), vec_index(2, 0)] += d
    return QuadraticForm(G)


def biquadratic_eval(q: QuadraticForm, x, y) -> float:
    """Q(x (x) y) for 3-vectors x, y."""
    v = np.outer(np.asarray(x, float), np.asarray(y, float)).ravel()
    return float(v @ q.gram @ v)


def _rank_one_agreement(q1: QuadraticForm, q2: QuadraticForm,
                        trials: int = 64, rel_tol: float = 1e-11) -> float:
    """Max relative disagreement of the two biquadratics over seeded pairs."""
    rng = np.random.default_rng(20240916)
    worst = 0.0
    scale = 1.0 + max(q1.norm(), q2.norm())
    for _ in range(trials):
        x = rng.standard_normal(3)
        y = rng.standard_normal(3)
        x /= np.linalg.norm(x)
        y /= np.linalg.norm(y)
        worst = max(worst, abs(biquadratic_eval(q1, x, y) - biquadratic_eval(q2, x, y)))
    return worst / scale


def reduce_modulo_null_lagrangians(c: OrthotropicCoefficients) -> ReducedOrthotropicForm:
    """Equivalent shear-paired form agreeing with the Voigt form on rank ones.

    Each shear cross term 2*C66*xi12*xi21 equals 2*C66*xi11*xi22 modulo the
    minor xi11 xi22 - xi12 xi21, which moves the shear weight onto the
    diagonal couplings: a12 = C12 + C66, a13 = C13 + C55, a23 = C23 + C44.
    The identification is verified on 64 seeded rank-one pairs rather than
    trusted.
    """
    a = np.array([
        [c.C11, c.C12 + c.C66, c.C13 + c.C55],
        [c.C12 + c.C66, c.C22, c.C23 + c.C44],
        [c.C13 + c.C55, c.C23 + c.C44, c.C33],
    ])
    reduced = ReducedOrthotropicForm(a=a, b=c.C66, c=c.C55, d=c.C44)
    err = _rank_one_agreement(form_from_voigt(c), form_from_reduced(reduced))
    if err > 1e-11:
        raise FormError(
            f"rank-one agreement check failed (relative error {err:.3e})")
    return reduced


def add_null_lagrangian(q: QuadraticForm, n: NullLagrangianCoeffs) -> QuadraticForm:
    """Q plus a weighted combination of the nine 2x2 minors."""
    G = q.gram.copy()
    for w, N in zip(n.coeffs, _MINOR_BASIS):
        if w != 0.0:
            G += w * N
    return QuadraticForm(G)


@dataclass(frozen=True)
class AcousticMatrix:
    """Symmetric 3x3 matrix of degree-2 polynomials with x T(y) x^T = Q(x (x) y)."""

    entries: tuple  # 3x3 nested tuple of HomogeneousPolynomial, degree 2
    tensor: np.ndarray  # G4[i,k,j,l] with T_ik(y) = y_j G4[i,k,j,l] y_l

    def entry(self, i: int, k: int) -> HomogeneousPolynomial:
        return self.entries[i][k]

    def evaluate(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.einsum("j,ikjl,l->ik", y, self.tensor, y)

    def evaluate_many(self, Y: np.ndarray) -> np.ndarray:
        Y = np.asarray(Y, dtype=float)
        return np.einsum("nj,ikjl,nl->nik", Y, self.tensor, Y)


def acoustic_matrix(q: QuadraticForm) -> AcousticMatrix:
    """T_ik(y) = sum_{j,l} gram[(i,j),(k,l)] y_j y_l, symmetrized."""
    G4 = q.gram_tensor()
    rows = []
    for i in range(3):
        row = []
        for k in range(3):
            terms: dict[tuple[int, int, int], float] = {}
            for j in range(3):
                for l in range(j, 3):
                    coef = G4[i, k, j, l] + (G4[i, k, l, j] if l > j else 0.0)
                    if coef != 0.0:
                        exp = [0, 0, 0]
                        exp[j] += 1
                        exp[l] += 1
                        key = tuple(exp)
                        terms[key] = terms.get(key, 0.0) + coef
            row.append(HomogeneousPolynomial(2, terms))
        rows.append(tuple(row))
    return AcousticMatrix(entries=tuple(rows), tensor=G4)


# ---------------------------------------------------------------------------
# catalog

def _linear(i: int, j: int) -> np.ndarray:
    v = np.zeros(9)
    v[vec_index(i, j)] = 1.0
    return v


def _gram_choi_lam() -> np.ndarray:
    a = np.array([[1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]])
    return form_from_single_shear(a, 1.0, 1.0, 1.0).gram


def _gram_choi() -> np.ndarray:
    G = _gram_choi_lam().copy()
    for (i, j) in [(0, 1), (1, 2), (2, 0)]:
        G[vec_index(i, j), vec_index(i, j)] += 1.0
    return G


def _gram_serre(eps: float) -> np.ndarray:
    G = np.zeros((9, 9))
    for v in (_linear(0, 0) - _linear(1, 2) - _linear(2, 1),
              _linear(0, 1) - _linear(2, 0) + _linear(0, 2),
              _linear(1, 0) - _linear(0, 2) - _linear(2, 0),
              _linear(1, 1),
              _linear(2, 2)):
        G += np.outer(v, v)
    return G - eps * np.eye(9)


CATALOG_INFO = {
    "convex_identity": "Q(xi) = |xi|^2, the convex reference form",
    "choi": "Choi's quasiconvex-not-polyconvex biquadratic form (Choi 1975)",
    "choi_lam": "Choi-Lam extreme positive semidefinite biquadratic form "
                "(Choi and Lam 1977); single-shear layout, determinant is the "
                "AM-GM sextic",
    "serre": "Serre's quasiconvex-not-polyconvex family (Serre 1980); "
             "parameter eps subtracts eps*|xi|^2",
    "reduced": "shear-paired 9-parameter orthotropic form; parameters "
               "a (3x3 symmetric), b, c, d",
}


def catalog(name: str, eps: float = 0.0,
            a=None, b: float = None, c: float = None, d: float = None) -> QuadraticForm:
    """Built-in forms by frozen identifier.

    serre takes the eps parameter; reduced takes (a, b, c, d).
    """
    if name == "convex_identity":
        return QuadraticForm(np.eye(9))
    if name == "choi":
        return QuadraticForm(_gram_choi())
    if name == "choi_lam":
        return QuadraticForm(_gram_choi_lam())
    if name == "serre":
        return QuadraticForm(_gram_serre(float(eps)))
    if name == "reduced":
        if a is None or b is None or c is None or d is None:
            raise FormError("catalog('reduced') needs a, b, c, d parameters")
        return form_from_reduced(ReducedOrthotropicForm(np.asarray(a, float), b, c, d))
    raise FormError(f"unknown catalog form {name!r}")


# ---------------------------------------------------------------------------
# shear-layout detection (used by the extreme-point probe)

_DIAG_IDX = [vec_index(i, i) for i in range(3)]
_PAIRED_SHEARS = [(vec_index(0, 1), vec_index(1, 0)),
                  (vec_index(0, 2), vec_index(2, 0)),
                  (vec_index(1, 2), vec_index(2, 1))]
_SINGLE_SHEARS = [vec_index(0, 1), vec_index(1, 2), vec_index(2, 0)]


def detect_shear_layout(q: QuadraticForm, rel_tol: float = 1e-10):
    """Classify a Gram as shear-paired, single-shear, or neither.

    Returns (layout, theta) where layout is 'paired' or 'single' and theta is
    the 9-parameter vector (a11, a22, a33, a12, a13, a23, s1, s2, s3), or
    (None, None) when the Gram does not fit either template.
    """
    G = q.gram
    scale = max(float(np.max(np.abs(G))), 1e-300)
    mask = np.zeros((9, 9), dtype=bool)
    for p in _DIAG_IDX:
        for r in _DIAG_IDX:
            mask[p, r] = True
    off = [p for p in range(9) if p not in _DIAG_IDX]
    for p in off:
        mask[p, p] = True
    if np.max(np.abs(G[~mask])) > rel_tol * scale:
        return None, None
    a = np.array([[G[vec_index(i, i), vec_index(j, j)] for j in range(3)]
                  for i in range(3)])
    offdiag = {p: G[p, p] for p in off}
    paired_ok = all(abs(offdiag[p] - offdiag[r]) <= rel_tol * scale
                    for (p, r) in _PAIRED_SHEARS)
    single_ok = all(abs(offdiag[p]) <= rel_tol * scale
                    for p in off if p not in _SINGLE_SHEARS)
    base = [a[0, 0], a[1, 1], a[2, 2], a[0, 1], a[0, 2], a[1, 2]]
    if paired_ok and any(abs(offdiag[p]) > rel_tol * scale for (p, _) in _PAIRED_SHEARS):
        shears = [offdiag[p] for (p, _) in _PAIRED_SHEARS]  # b(12), c(13), d(23)
        return "paired", np.array(base + [shears[0], shears[1], shears[2]])
    if single_ok and any(abs(offdiag[p]) > rel_tol * scale for p in _SINGLE_SHEARS):
        shears = [offdiag[p] for p in _SINGLE_SHEARS]  # b(12), c(23), d(31)
        return "single", np.array(base + shears)
    if paired_ok:
        # pure diagonal-coupling form; paired with zero shears
        return "paired", np.array(base + [0.0, 0.0, 0.0])
    return None, None


def shear_layout_basis(layout: str) -> list[np.ndarray]:
    """Gram basis matrices matching detect_shear_layout's theta components."""
    basis = []
    for (i, j) in [(0, 0), (1, 1), (2, 2)]:
        aa = np.zeros((3, 3))
        aa[i, j] = 1.0
        basis.append(form_from_single_shear(aa, 0, 0, 0).gram)
    for (i, j) in [(0, 1), (0, 2), (1, 2)]:
        aa = np.zeros((3, 3))
        aa[i, j] = aa[j, i] = 1.0
        basis.append(form_from_single_shear(aa, 0, 0, 0).gram)
    z = np.zeros((3, 3))
    if layout == "paired":
        for w in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
            basis.append(form_from_reduced(
                ReducedOrthotropicForm(z, *w)).gram)
    elif layout == "single":
        basis.append(form_from_single_shear(z, 1, 0, 0).gram)
        basis.append(form_from_single_shear(z, 0, 1, 0).gram)
        basis.append(form_from_single_shear(z, 0, 0, 1).gram)
    else:
        raise FormError(f"unknown layout {layout!r}")
    return basis


def form_from_theta(layout: str, theta: np.ndarray) -> QuadraticForm:
    G = np.zeros((9, 9))
    for w, B in zip(np.asarray(theta, float), shear_layout_basis(layout)):
        G += w * B
    return QuadraticForm(G)


# ---------------------------------------------------------------------------
# JSON schema: {"kind": "gram"|"voigt"|"reduced"|"catalog", ...}

_UPPER_TRI = [(p, r) for p in range(9) for r in range(p, 9)]


def form_to_json(q: QuadraticForm) -> dict:
    return {
        "kind": "gram",
        "upper_triangle": [float(q.gram[p, r]) for (p, r) in _UPPER_TRI],
    }


def form_from_json(obj: dict) -> QuadraticForm:
    kind = obj.get("kind")
    if kind == "gram":
        vals = obj["upper_triangle"]
        if len(vals) != 45:
            raise FormError(f"gram upper triangle needs 45 entries, got {len(vals)}")
        G = np.zeros((9, 9))
        for (p, r), v in zip(_UPPER_TRI, vals):
            G[p, r] = v
            G[r, p] = v
        return QuadraticForm(G)
    if kind == "voigt":
        keys = ["C11", "C22", "C33", "C12", "C13", "C23", "C44", "C55", "C66"]
        try:
            coeffs = OrthotropicCoefficients(**{k: float(obj[k]) for k in keys})
        except KeyError as exc:
            raise FormError(f"voigt form missing field {exc}") from exc
        return form_from_voigt(coeffs)
    if kind == "reduced":
        try:
            r = ReducedOrthotropicForm(np.asarray(obj["a"], float),
                                       float(obj["b"]), float(obj["c"]),
                                       float(obj["d"]))
        except KeyError as exc:
            raise FormError(f"reduced form missing field {exc}") from exc
        return form_from_reduced(r)
    if kind == "catalog":
        name = obj.get("name")
        params = {k: obj[k] for k in ("eps", "a", "b", "c", "d") if k in obj}
        return catalog(name, **params)
    raise FormError(f"unknown form kind {kind!r}")
