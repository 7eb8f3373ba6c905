"""Numerical certification engines.

quasiconvexity_margin computes min over unit y of lambda_min(T(y)) on a
deterministic spherical Fibonacci lattice with batched alternating
refinement (each step minimizes the biquadratic exactly in one of x, y via
the 3x3 eigenproblem).  The probes built on top of it:

  * milton_extremality_probe: largest coefficient eps such that Q - eps*l^2
    stays quasiconvex, maximized over unit rank-one directions l, by
    bisection.  Quadratic forms losing quasiconvexity under every convex
    subtraction ("extremal") show max eps ~ 0.
  * extreme_point_probe: searches the form's own 9-parameter shear layout
    for a quasiconvex splitting 0 <= Q1 <= Q off the ray {alpha Q}.
  * extremal_polynomial_probe: necessary-condition screen for extremality of
    a nonnegative sextic via the rank of its zero-set value+gradient
    constraints.
  * polyconvexity_test: concave maximization of lambda_min(Gram - minor
    combination), subgradient ascent plus an SDP polish.

Violations of depth ~eps^2 hide in tiny dips near degenerate rank-one zeros
where plain descent overshoots; the probes therefore evaluate candidate
forms on a structured pool: the refined zeros of Q plus geometric radius
sweeps along the transverse-Hessian eigendirections at each zero.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .forms import (QuadraticForm, detect_shear_layout, form_from_theta,
                    minor_gram_basis, shear_layout_basis)
from .poly import HomogeneousPolynomial, monomial_exponents, poly_eval_many
from .symeig import eigmin3, eigvals3

# noise floor of a refined margin evaluation, relative to the Gram scale;
# bisection certifies non-quasiconvexity only below this
GUARD_REL = 16.0 * np.finfo(float).eps

MILTON_CONSISTENT_MAX = 1e-6
MILTON_REFUTED_MIN = 1e-4
EXTREME_POINT_REL = 1e-5
POLYCONVEX_REFUTED_MAX = -1e-5
RANK_CUTOFF_REL = 1e-7
CLUSTER_ANGLE = 1e-3
MAX_REPORTED_MINIMIZERS = 12


class PreconditionError(ValueError):
    """A probe was handed a form violating its preconditions."""


@dataclass(frozen=True)
class CertifyConfig:
    grid_resolution: int = 96
    refine_iters: int = 40
    tol: float = 1e-9
    seed: int = 0
    probe_directions: int = 256
    bisection_iters: int = 60

    def __post_init__(self):
        if self.grid_resolution < 8:
            raise ValueError("grid_resolution must be >= 8")
        if self.tol <= 0:
            raise ValueError("tol must be positive")

    def to_json(self) -> dict:
        return {
            "grid_resolution": self.grid_resolution,
            "refine_iters": self.refine_iters,
            "tol": self.tol,
            "seed": self.seed,
            "probe_directions": self.probe_directions,
            "bisection_iters": self.bisection_iters,
        }


@dataclass(frozen=True)
class MarginReport:
    """Minimum of lambda_min(T(y)) over the unit sphere with its minimizers."""

    margin: float
    minimizers: tuple  # tuples (y, x, value), unit vectors as tuples

    def to_json(self) -> dict:
        return {
            "margin": self.margin,
            "minimizers": [
                {"y": list(y), "x": list(x), "value": v}
                for (y, x, v) in self.minimizers
            ],
        }


@dataclass(frozen=True)
class ProbeReport:
    kind: str
    value: float
    witness: dict
    verdict: str  # consistent | refuted | inconclusive

    def to_json(self) -> dict:
        return {"kind": self.kind, "value": self.value,
                "witness": self.witness, "verdict": self.verdict}


# ---------------------------------------------------------------------------
# sphere lattice

_LATTICE_CACHE: dict[int, np.ndarray] = {}


def sphere_lattice(resolution: int) -> np.ndarray:
    """Antipodally deduplicated spherical Fibonacci lattice of resolution^2
    points, canonical sign (first nonzero coordinate positive)."""
    if resolution in _LATTICE_CACHE:
        return _LATTICE_CACHE[resolution]
    n = resolution * resolution
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    phi = i * np.pi * (3.0 - np.sqrt(5.0))
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    pts = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    pts = canonical_sign(pts)
    pts = np.unique(np.round(pts, 12), axis=0)
    norms = np.linalg.norm(pts, axis=1)
    pts = pts / norms[:, None]
    pts.setflags(write=False)
    _LATTICE_CACHE[resolution] = pts
    return pts


def canonical_sign(V: np.ndarray) -> np.ndarray:
    """Flip rows so the first coordinate above 1e-12 in magnitude is positive."""
    V = np.array(V, dtype=float, copy=True)
    single = V.ndim == 1
    if single:
        V = V[None]
    sign = np.ones(V.shape[0])
    undecided = np.ones(V.shape[0], dtype=bool)
    for k in range(V.shape[1]):
        col = V[:, k]
        pick = undecided & (np.abs(col) > 1e-12)
        sign[pick] = np.sign(col[pick])
        undecided &= ~pick
    out = V * sign[:, None]
    return out[0] if single else out


def _workers() -> int:
    env = os.environ.get("QUASICONE_THREADS", "")
    try:
        w = int(env) if env else 1
    except ValueError:
        w = 1
    return max(1, min(w, os.cpu_count() or 1))


def _grid_lambda_min(G4: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """lambda_min(T(y)) over lattice rows, chunked across the worker pool.

    Rows are independent, so the result is bytewise identical for any worker
    count.
    """
    workers = _workers()
    if workers == 1 or Y.shape[0] < 2048:
        T = np.einsum("nj,ikjl,nl->nik", Y, G4, Y)
        return eigvals3(T)[:, 0]
    chunks = np.array_split(np.arange(Y.shape[0]), workers * 4)

    def one(idx):
        T = np.einsum("nj,ikjl,nl->nik", Y[idx], G4, Y[idx])
        return eigvals3(T)[:, 0]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(one, chunks))
    return np.concatenate(parts)


def _alternating_refine(G4: np.ndarray, Y: np.ndarray,
                        max_iters: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched block descent from the given y starts: alternate exact
    minimization in x then y (each block step is a 3x3 eigenproblem).

    Returns refined (X, Y, values); values only decrease per point.  Stops
    early once no point improves beyond the 1e-16 level.
    """
    T = np.einsum("nj,ikjl,nl->nik", Y, G4, Y)
    vals, X = eigmin3(T)
    for _ in range(max_iters):
        S = np.einsum("ni,ikjl,nk->njl", X, G4, X)
        _, Y = eigmin3(S)
        T = np.einsum("nj,ikjl,nl->nik", Y, G4, Y)
        new_vals, X = eigmin3(T)
        if len(vals) == 0:
            break
        improvement = float(np.max(vals - new_vals))
        vals = new_vals
        if improvement < 1e-16 * (1.0 + float(np.max(np.abs(vals)))):
            break
    return X, Y, vals


def _margin_full(q: QuadraticForm, cfg: CertifyConfig):
    """Full lattice scan plus refinement of every lattice point.

    Returns (margin, X, Y, values, grid_lambda) with the refined arrays.
    """
    G4 = q.gram_tensor()
    Y0 = sphere_lattice(cfg.grid_resolution)
    lam = _grid_lambda_min(G4, Y0)
    X, Y, vals = _alternating_refine(G4, Y0.copy(), cfg.refine_iters)
    margin = float(min(np.min(vals), np.min(lam)))
    return margin, X, Y, vals, lam


def _cluster_pairs(X: np.ndarray, Y: np.ndarray, vals: np.ndarray,
                   angle: float = CLUSTER_ANGLE, cap: int = 10**9):
    """Greedy angular clustering of canonical-signed (y, x) pairs, best first."""
    Xc = canonical_sign(X)
    Yc = canonical_sign(Y)
    order = np.lexsort((Xc[:, 2], Xc[:, 1], Xc[:, 0],
                        Yc[:, 2], Yc[:, 1], Yc[:, 0], vals))
    kept = []
    for i in order:
        y, x, v = Yc[i], Xc[i], float(vals[i])
        dup = False
        for (yk, xk, _) in kept:
            if np.linalg.norm(y - yk) < angle and np.linalg.norm(x - xk) < angle:
                dup = True
                break
        if not dup:
            kept.append((y, x, v))
            if len(kept) >= cap:
                break
    return kept


def quasiconvexity_margin(q: QuadraticForm, cfg: CertifyConfig = CertifyConfig()) -> MarginReport:
    """Margin = min over unit y of lambda_min(T(y)); reports minimizer pairs.

    Every lattice point is refined by the batched alternating descent; the
    reported minimizers are within tol of the margin, clustered at angular
    distance 1e-3 and capped at 12 entries.
    """
    margin, X, Y, vals, _ = _margin_full(q, cfg)
    near = vals <= margin + cfg.tol * (1.0 + abs(margin))
    kept = _cluster_pairs(X[near], Y[near], vals[near], cap=MAX_REPORTED_MINIMIZERS)
    minimizers = tuple(
        (tuple(float(u) for u in y), tuple(float(u) for u in x), v)
        for (y, x, v) in kept)
    return MarginReport(margin=margin, minimizers=minimizers)


def rank_one_zeros(q: QuadraticForm, cfg: CertifyConfig = CertifyConfig()) -> list:
    """Clustered unit pairs (x, y) with Q(x (x) y) <= tol.

    Requires the form to be quasiconvex within tolerance.
    """
    margin, X, Y, vals, _ = _margin_full(q, cfg)
    if margin < -cfg.tol:
        raise PreconditionError(
            f"form is not quasiconvex (margin {margin:.3e} < -tol)")
    near = vals <= cfg.tol
    kept = _cluster_pairs(X[near], Y[near], vals[near])
    return [(tuple(float(u) for u in x), tuple(float(u) for u in y))
            for (y, x, _) in kept]


# ---------------------------------------------------------------------------
# zero-structure pool

_POOL_RADII = np.geomspace(1e-5, 0.32, 28)


def _tangent_basis(u: np.ndarray) -> np.ndarray:
    """3x2 orthonormal basis of the plane orthogonal to unit u."""
    a = np.zeros(3)
    a[int(np.argmin(np.abs(u)))] = 1.0
    t1 = a - (a @ u) * u
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(u, t1)
    return np.stack([t1, t2], axis=1)


def _transverse_hessian(G4: np.ndarray, x0: np.ndarray, y0: np.ndarray):
    """4x4 Hessian of Q(x (x) y) on the product of spheres at a zero."""
    U = _tangent_basis(x0)
    V = _tangent_basis(y0)
    T = np.einsum("j,ikjl,l->ik", y0, G4, y0)
    S = np.einsum("i,ikjl,k->jl", x0, G4, x0)
    # K[p, q] = d^2 Q / dx_p dy_q
    K = 2.0 * (np.einsum("pkql,k,l->pq", G4, x0, y0)
               + np.einsum("pkjq,j,k->pq", G4, y0, x0))
    H = np.zeros((4, 4))
    H[:2, :2] = 2.0 * U.T @ T @ U
    H[2:, 2:] = 2.0 * V.T @ S @ V
    H[:2, 2:] = U.T @ K @ V
    H[2:, :2] = H[:2, 2:].T
    return H, U, V


def _zero_pool(q: QuadraticForm, X: np.ndarray, Y: np.ndarray, vals: np.ndarray):
    """(P, 9) rank-one sample matrix around the refined zeros of Q, or None
    when the form has no rank-one zeros.

    At each zero the transverse Hessian is diagonalized and geometric radius
    sweeps are laid along every eigendirection; the eps^2-deep dips of
    Q - eps*l^2 live on those curves.
    """
    G4 = q.gram_tensor()
    scale = 1.0 + q.norm()
    zt = 1e-10 * scale
    near = vals <= zt
    if not np.any(near):
        return None
    pool_x = []
    pool_y = []
    reps = _cluster_pairs(X[near], Y[near], vals[near], cap=12)
    for (y0, x0, _) in reps:
        x0 = np.asarray(x0)
        y0 = np.asarray(y0)
        H, U, V = _transverse_hessian(G4, x0, y0)
        _, W = np.linalg.eigh(H)
        for k in range(4):
            xdir = U @ W[:2, k]
            ydir = V @ W[2:, k]
            for sgn in (1.0, -1.0):
                xx = x0[None, :] + sgn * _POOL_RADII[:, None] * xdir[None, :]
                yy = y0[None, :] + sgn * _POOL_RADII[:, None] * ydir[None, :]
                xx /= np.linalg.norm(xx, axis=1)[:, None]
                yy /= np.linalg.norm(yy, axis=1)[:, None]
                pool_x.append(xx)
                pool_y.append(yy)
        pool_x.append(x0[None, :])
        pool_y.append(y0[None, :])
    Xp = np.concatenate(pool_x)
    Yp = np.concatenate(pool_y)
    P9 = (Xp[:, :, None] * Yp[:, None, :]).reshape(len(Xp), 9)
    return P9


def _pool_quadratic(P9: np.ndarray, gram: np.ndarray) -> np.ndarray:
    return np.einsum("pi,ij,pj->p", P9, gram, P9)


# ---------------------------------------------------------------------------
# milton extremality

def _probe_directions(q: QuadraticForm, cfg: CertifyConfig) -> np.ndarray:
    """Unit 9-vector directions: half seeded random, half Gram-eigenvector
    aligned (the eigenvectors themselves, then seeded in-pair mixes)."""
    rng = np.random.default_rng(cfg.seed)
    total = cfg.probe_directions
    n_rand = total // 2
    dirs = []
    R = rng.standard_normal((n_rand, 9))
    R /= np.linalg.norm(R, axis=1)[:, None]
    dirs.append(R)
    _, V = np.linalg.eigh(q.gram)
    eigcols = [V[:, k] for k in range(9)]
    aligned = []
    while len(aligned) < total - n_rand:
        if len(aligned) < 9:
            aligned.append(eigcols[len(aligned)])
        else:
            i, j = rng.integers(0, 9, size=2)
            t = rng.uniform(0.0, 2.0 * np.pi)
            v = np.cos(t) * eigcols[i] + np.sin(t) * eigcols[j]
            nv = np.linalg.norm(v)
            if nv > 1e-12:
                aligned.append(v / nv)
    dirs.append(np.array(aligned))
    return np.concatenate(dirs)


def milton_extremality_probe(q: QuadraticForm,
                             cfg: CertifyConfig = CertifyConfig()) -> ProbeReport:
    """Max over unit rank-one directions l of sup{eps : Q - eps l^2 quasiconvex}.

    eps*(l) is found by bisection; the quasiconvexity predicate evaluates the
    cached lattice acoustic matrices T - eps*L, the zero-structure pool, and
    a top-K refinement, certifying violation below the evaluation noise
    floor.  The max direction is re-verified with the full margin.
    """
    margin0, X, Y, vals, _ = _margin_full(q, cfg)
    if margin0 < -cfg.tol:
        raise PreconditionError(
            f"milton probe requires a quasiconvex form (margin {margin0:.3e})")

    G = q.gram
    G4 = q.gram_tensor()
    guard = GUARD_REL * (1.0 + q.norm())
    P9 = _zero_pool(q, X, Y, vals)
    if P9 is None:
        P9 = np.zeros((0, 9))
    pool_q = _pool_quadratic(P9, G)

    Ygrid = sphere_lattice(cfg.grid_resolution)
    Tgrid = np.einsum("nj,ikjl,nl->nik", Ygrid, G4, Ygrid)
    _, Xgrid = eigmin3(Tgrid)
    grid_q = np.einsum("nik,ni,nk->n", Tgrid, Xgrid, Xgrid)
    grid9 = (Xgrid[:, :, None] * Ygrid[:, None, :]).reshape(len(Ygrid), 9)

    def eps_star_of(m: np.ndarray) -> float:
        M = m.reshape(3, 3)
        pool_l2 = (P9 @ m) ** 2
        vgrid = Ygrid @ M.T
        Lgrid = vgrid[:, :, None] * vgrid[:, None, :]
        grid_l2 = (grid9 @ m) ** 2
        L4 = (m.reshape(3, 3, 1, 1) * m.reshape(1, 1, 3, 3)).transpose(0, 2, 1, 3)

        def predicate(eps: float) -> bool:
            if len(pool_q) and np.min(pool_q - eps * pool_l2) < -guard:
                return False
            lam = eigvals3(Tgrid - eps * Lgrid)[:, 0]
            if np.min(lam) < -guard:
                return False
            k = 16
            idx = np.argpartition(lam, k - 1)[:k]
            _, _, rv = _alternating_refine(G4 - eps * L4,
                                           Ygrid[idx].copy(), 14)
            return float(np.min(rv)) >= -guard

        # l(x (x) y) <= sigma_max(M) on unit pairs, so Q - eps l^2 stays
        # quasiconvex at least up to margin / sigma_max^2
        smax2 = float(np.linalg.svd(M, compute_uv=False)[0]) ** 2
        lo = max(0.0, (margin0 - 2.0 * guard)) / max(smax2, 1e-300)
        # pointwise rank-one ratio bound Q/l^2 as the upper bracket, capped
        usable = pool_l2 > 1e-18
        gu = grid_l2 > 1e-18
        ratios = []
        if np.any(usable):
            ratios.append(np.min(pool_q[usable] / pool_l2[usable]))
        if np.any(gu):
            ratios.append(np.min(grid_q[gu] / grid_l2[gu]))
        hi = min(min(ratios) if ratios else 1e6, 1e6)
        hi = min(max(hi * (1.0 + 1e-9) + 1e-15, 1e-15, lo * 1.1), 1e6)
        expansions = 0
        while hi < 1e6 and expansions < 40 and predicate(hi):
            lo, hi = hi, hi * 4.0
            expansions += 1
        if hi >= 1e6 and predicate(1e6):
            return 1e6
        for _ in range(cfg.bisection_iters):
            if hi - lo <= max(1e-12, 1e-4 * lo):
                break
            mid = 0.5 * (lo + hi)
            if predicate(mid):
                lo = mid
            else:
                hi = mid
        return lo

    dirs = _probe_directions(q, cfg)
    n_rand = cfg.probe_directions // 2
    best = (-1.0, None)
    eigen_table = []
    for j, m in enumerate(dirs):
        eps_star = eps_star_of(m)
        if n_rand <= j < n_rand + 9:
            eigen_table.append({"direction": [float(u) for u in m],
                                "eps_star": eps_star})
        if eps_star > best[0]:
            best = (eps_star, m)

    value, m_best = best
    witness = {
        "direction": [float(u) for u in m_best],
        "eps_star": value,
        "eigen_directions": eigen_table,
    }
    if value > MILTON_REFUTED_MIN:
        check = QuadraticForm(G - value * np.outer(m_best, m_best))
        wmargin, *_ = _margin_full(check, cfg)
        witness["validation_margin"] = wmargin
        verdict = "refuted"
    elif value <= MILTON_CONSISTENT_MAX:
        verdict = "consistent"
    else:
        verdict = "inconclusive"
    return ProbeReport(kind="milton", value=float(value), witness=witness,
                       verdict=verdict)


# ---------------------------------------------------------------------------
# extreme point probe

def extreme_point_probe(q: QuadraticForm,
                        cfg: CertifyConfig = CertifyConfig()) -> ProbeReport:
    """Search the form's 9-parameter shear layout for a splitting
    0 <= Q1 <= Q (in the quasiconvex order) far from the ray {alpha Q}.

    The feasible set is convex, so each seeded start is a ray bisection in
    the orthogonal complement of the parameter ray; value is the largest
    validated distance.  Consistent (extreme point) when value stays below
    1e-5 * |theta_q|.
    """
    layout, theta = detect_shear_layout(q)
    if layout is None:
        raise PreconditionError(
            "extreme point probe requires a shear-paired or single-shear "
            "orthotropic Gram layout")
    names = ["a11", "a22", "a33", "a12", "a13", "a23", "s1", "s2", "s3"]
    for k in (0, 1, 2, 6, 7, 8):
        if theta[k] <= 0:
            raise PreconditionError(
                f"strict positivity violated: parameter {names[k]} = {theta[k]:g}")

    margin0, X, Y, vals, _ = _margin_full(q, cfg)
    if margin0 < -cfg.tol:
        raise PreconditionError(
            f"extreme point probe requires a quasiconvex form (margin {margin0:.3e})")

    basis = np.array(shear_layout_basis(layout))
    norm_theta = float(np.linalg.norm(theta))
    theta_hat = theta / norm_theta
    P9 = _zero_pool(q, X, Y, vals)
    G = q.gram

    # candidate forms are theta-combinations of 9 fixed basis Grams, so the
    # lattice acoustic matrices and pool values are linear in theta and the
    # basis contributions can be preassembled once
    B4 = basis.reshape(9, 3, 3, 3, 3).transpose(0, 1, 3, 2, 4)
    Ylean = sphere_lattice(32)
    TB = np.einsum("nj,kimjl,nl->knim", Ylean, B4, Ylean)
    poolB = None if P9 is None else np.array(
        [_pool_quadratic(P9, Bk) for Bk in basis])

    def gram_of(th: np.ndarray) -> np.ndarray:
        return np.einsum("k,kij->ij", th, basis)

    def lean_margin_theta(th: np.ndarray) -> float:
        T = np.tensordot(th, TB, axes=1)
        lam = eigvals3(T)[:, 0]
        out = float(np.min(lam))
        if poolB is not None:
            out = min(out, float(np.min(th @ poolB)))
        k = 12
        idx = np.argpartition(lam, k - 1)[:k]
        G4th = np.tensordot(th, B4, axes=1)
        _, _, rv = _alternating_refine(G4th, Ylean[idx].copy(), 16)
        return min(out, float(np.min(rv)))

    def feasible(th: np.ndarray) -> bool:
        if lean_margin_theta(th) < -cfg.tol:
            return False
        return lean_margin_theta(theta - th) >= -cfg.tol

    rng = np.random.default_rng(cfg.seed)
    # orthonormal basis of the complement of theta_hat
    Bperp = np.linalg.qr(
        np.concatenate([theta_hat[:, None], rng.standard_normal((9, 8))], axis=1)
    )[0][:, 1:]

    best_delta = 0.0
    best_theta = 0.5 * theta
    for _ in range(cfg.probe_directions):
        d = Bperp @ rng.standard_normal(8)
        nd = np.linalg.norm(d)
        if nd < 1e-12:
            continue
        d /= nd
        lo, hi = 0.0, 0.25 * norm_theta
        grow = 0
        while feasible(0.5 * theta + hi * d) and grow < 5:
            lo, hi = hi, hi * 2.0
            grow += 1
        for _ in range(cfg.bisection_iters):
            if hi - lo <= max(1e-12, 1e-9 * norm_theta):
                break
            mid = 0.5 * (lo + hi)
            if feasible(0.5 * theta + mid * d):
                lo = mid
            else:
                hi = mid
        if lo > best_delta:
            best_delta = lo
            best_theta = 0.5 * theta + lo * d

    # full-margin validation of the best candidate; shrink toward the ray
    # until both margins clear
    value = 0.0
    witness_theta = best_theta
    m1 = m2 = None
    if best_delta > 0.0:
        delta_dir = (best_theta - 0.5 * theta) / best_delta
        delta = best_delta
        for _ in range(24):
            th = 0.5 * theta + delta * delta_dir
            q1 = form_from_theta(layout, th)
            m1, *_ = _margin_full(q1, cfg)
            m2, *_ = _margin_full(QuadraticForm(G - q1.gram), cfg)
            if m1 >= -cfg.tol and m2 >= -cfg.tol:
                value = delta
                witness_theta = th
                break
            delta *= 0.7
    witness = {
        "layout": layout,
        "theta_q": [float(u) for u in theta],
        "theta_witness": [float(u) for u in witness_theta],
        "distance": float(value),
        "margin_q1": m1,
        "margin_complement": m2,
    }
    verdict = "consistent" if value <= EXTREME_POINT_REL * norm_theta else "refuted"
    return ProbeReport(kind="extreme_point", value=float(value),
                       witness=witness, verdict=verdict)


# ---------------------------------------------------------------------------
# extremal polynomial probe

_SEXTIC_EXPS = monomial_exponents(6)


def _monomial_rows(Z: np.ndarray) -> np.ndarray:
    rows = np.empty((len(Z), len(_SEXTIC_EXPS)))
    for k, (e1, e2, e3) in enumerate(_SEXTIC_EXPS):
        rows[:, k] = Z[:, 0]**e1 * Z[:, 1]**e2 * Z[:, 2]**e3
    return rows


def _monomial_grad_rows(Z: np.ndarray) -> np.ndarray:
    """Gradient constraint rows: 3 per point, stacked."""
    out = np.zeros((3 * len(Z), len(_SEXTIC_EXPS)))
    for k, exp in enumerate(_SEXTIC_EXPS):
        for v in range(3):
            if exp[v] == 0:
                continue
            de = list(exp)
            de[v] -= 1
            col = exp[v] * Z[:, 0]**de[0] * Z[:, 1]**de[1] * Z[:, 2]**de[2]
            out[v::3, k] = out[v::3, k] + col
    return out


def _accept_monotone(p, Z, f, step, gt):
    """Apply Z - step*gt with backtracking; only improving moves land."""
    Znew, fnew = Z, f
    pending = step > 0.0
    for _ in range(8):
        if not np.any(pending):
            break
        trial = Z - np.where(pending, step, 0.0)[:, None] * gt
        trial /= np.linalg.norm(trial, axis=1)[:, None]
        ftrial = poly_eval_many(p, trial)
        accept = pending & (ftrial <= f)
        Znew = np.where(accept[:, None], trial, Znew)
        fnew = np.where(accept, ftrial, fnew)
        pending = pending & ~accept
        step = np.where(pending, step * 0.25, step)
    return Znew, fnew


def _tangent_bases(Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal tangent pairs (t1, t2) for each unit row of Z."""
    n = len(Z)
    a = np.zeros((n, 3))
    a[np.arange(n), np.argmin(np.abs(Z), axis=1)] = 1.0
    t1 = a - np.sum(a * Z, axis=1)[:, None] * Z
    t1 /= np.linalg.norm(t1, axis=1)[:, None]
    t2 = np.cross(Z, t1)
    return t1, t2


def _tangent_newton_step(p, grads, hessians, Z, f):
    """One damped Newton step of min p on the sphere, batched, monotone."""
    n = len(Z)
    gx = np.stack([poly_eval_many(g, Z) for g in grads], axis=1)
    radial = np.sum(gx * Z, axis=1)
    t1, t2 = _tangent_bases(Z)
    g1 = np.sum(gx * t1, axis=1)
    g2 = np.sum(gx * t2, axis=1)
    H = np.empty((n, 3, 3))
    for i in range(3):
        for j in range(3):
            H[:, i, j] = poly_eval_many(hessians[i][j], Z)
    Ht1 = np.einsum("nij,nj->ni", H, t1)
    Ht2 = np.einsum("nij,nj->ni", H, t2)
    # Riemannian Hessian: projected ambient Hessian minus the radial slope
    h11 = np.sum(t1 * Ht1, axis=1) - radial
    h12 = np.sum(t1 * Ht2, axis=1)
    h22 = np.sum(t2 * Ht2, axis=1) - radial
    mean = 0.5 * (h11 + h22)
    dev = np.sqrt(np.maximum(0.25 * (h11 - h22) ** 2 + h12 * h12, 0.0))
    lam_min = mean - dev
    scale = np.abs(h11) + np.abs(h22) + np.abs(h12) + 1e-30
    reg = np.maximum(0.0, -lam_min) + 1e-9 * scale
    a = h11 + reg
    d = h22 + reg
    det = a * d - h12 * h12
    det = np.where(np.abs(det) > 1e-300, det, 1.0)
    s1 = -(d * g1 - h12 * g2) / det
    s2 = -(a * g2 - h12 * g1) / det
    disp = np.sqrt(s1 * s1 + s2 * s2)
    clip = np.minimum(1.0, 0.3 / np.maximum(disp, 1e-300))
    move = (s1 * clip)[:, None] * t1 + (s2 * clip)[:, None] * t2
    gt = -move  # reuse the monotone acceptor, which subtracts step*gt
    return _accept_monotone(p, Z, f, np.ones(n), gt)


def extremal_polynomial_probe(p: HomogeneousPolynomial,
                              cfg: CertifyConfig = CertifyConfig()) -> ProbeReport:
    """Necessary-condition screen for extremality of a nonnegative sextic.

    Any sextic R with 0 <= R <= p must vanish with its gradient on the zero
    set of p; the probe reports the numerical nullspace dimension of those
    constraints over the 28 sextic coefficients.  Dimension 1 (the span of p
    itself) is consistent with extremality; anything larger, or a perfect
    square, is inconclusive.  Never a proof.
    """
    from .determinant import perfect_square_test

    if p.degree != 6:
        raise PreconditionError(f"probe needs a sextic, got degree {p.degree}")
    scale = max(p.max_coeff(), 1e-300)
    Y0 = sphere_lattice(cfg.grid_resolution)
    vals = poly_eval_many(p, Y0)
    if np.min(vals) < -1e-6 * scale:
        raise PreconditionError(
            f"polynomial is significantly negative (min {np.min(vals):.3e})")

    flag, root = perfect_square_test(p)
    if flag:
        return ProbeReport(
            kind="extremal_polynomial", value=-1.0,
            witness={"perfect_square_root": root.to_json(),
                     "note": "perfect square; deferred to the square test"},
            verdict="inconclusive")

    # refine candidate zeros by Polyak-step projected gradient descent; the
    # candidate set is broad so every basin, including shallow near-axis
    # ones, holds starters
    grads = p.gradient()
    thresh = max(float(np.quantile(vals, 0.05)), 1e-3 * scale)
    cand = Y0[vals <= thresh]
    if len(cand) > 3000:
        cand = cand[np.argsort(poly_eval_many(p, cand))[:3000]]
    hessians = [g.gradient() for g in grads]
    Z = cand.copy()
    f = poly_eval_many(p, Z)
    # phase 1: backtracked Polyak descent into the basins
    for _ in range(60):
        gx = np.stack([poly_eval_many(g, Z) for g in grads], axis=1)
        gt = gx - (np.sum(gx * Z, axis=1))[:, None] * Z
        gn = np.linalg.norm(gt, axis=1)
        step = np.where(gn > 1e-300,
                        np.minimum(f / np.maximum(gn * gn, 1e-300),
                                   0.3 / np.maximum(gn, 1e-300)),
                        0.0)
        Z, f = _accept_monotone(p, Z, f, step, gt)
    # phase 2: damped Newton on the tangent plane; first-order steps crawl
    # along quartic-flat valleys, Newton contracts them geometrically
    for _ in range(90):
        Z, f = _tangent_newton_step(p, grads, hessians, Z, f)
    fz = f
    # strict acceptance keeps unconverged flat-direction approximants (which
    # would act as spurious curvature constraints) out of the constraint set
    zero_tol = 1e-13 * scale
    keepmask = fz <= zero_tol
    if not np.any(keepmask):
        return ProbeReport(
            kind="extremal_polynomial", value=float(len(_SEXTIC_EXPS)),
            witness={"zeros": [], "note": "no zeros located; no constraints"},
            verdict="inconclusive")
    Zc, fc = Z[keepmask], fz[keepmask]
    # projective clustering, best-converged representative per cluster
    kept = []
    for i in np.argsort(fc):
        z = Zc[i]
        if not any(min(np.linalg.norm(z - u), np.linalg.norm(z + u))
                   < CLUSTER_ANGLE for u in kept):
            kept.append(z)
        if len(kept) >= 40:
            break
    Zk = canonical_sign(np.array(kept))
    Zk = Zk[np.lexsort((Zk[:, 2], Zk[:, 1], Zk[:, 0]))]

    rows = np.concatenate([_monomial_rows(Zk), _monomial_grad_rows(Zk)])
    norms = np.linalg.norm(rows, axis=1)
    rows = rows[norms > 1e-14]
    rows /= np.linalg.norm(rows, axis=1)[:, None]
    sv = np.linalg.svd(rows, compute_uv=False)
    rank = int(np.sum(sv > RANK_CUTOFF_REL * sv[0]))
    dim = len(_SEXTIC_EXPS) - rank
    witness = {"zeros": [[float(u) for u in z] for z in Zk],
               "nullspace_dim": dim}
    verdict = "consistent" if dim <= 1 else "inconclusive"
    return ProbeReport(kind="extremal_polynomial", value=float(dim),
                       witness=witness, verdict=verdict)


# ---------------------------------------------------------------------------
# polyconvexity

_MINOR_STACK = np.array(minor_gram_basis())


def _phi(G: np.ndarray, c: np.ndarray) -> tuple[float, np.ndarray]:
    M = G - np.einsum("k,kij->ij", c, _MINOR_STACK)
    w, V = np.linalg.eigh(M)
    return float(w[0]), V[:, 0]


def polyconvexity_test(q: QuadraticForm,
                       cfg: CertifyConfig = CertifyConfig()) -> ProbeReport:
    """Maximize phi(c) = lambda_min(Gram - sum c_k N_k) over minor weights.

    phi is concave.  The ascent starts from the Frobenius projection of the
    Gram onto the minor span (which already solves pure Null-Lagrangian
    inputs exactly and makes the verdict invariant under minor shifts), runs
    the seeded subgradient schedule, then polishes with a small semidefinite
    program when a solver is available.  Verdict: consistent = polyconvex
    (phi* >= -tol), refuted = not polyconvex (phi* < -1e-5), else
    inconclusive.
    """
    G = q.gram
    c_proj = np.array([float(np.sum(G * N)) for N in _MINOR_STACK])
    rng = np.random.default_rng(cfg.seed)
    scale = 1.0 + q.norm()

    best_c = c_proj.copy()
    best_phi, _ = _phi(G, best_c)
    iters = cfg.probe_directions * 10
    for start in range(4):
        c = c_proj + (0.0 if start == 0 else 0.3 * scale * rng.standard_normal(9))
        phi_c, v = _phi(G, c)
        if phi_c > best_phi:
            best_phi, best_c = phi_c, c.copy()
        step0 = 0.2 * scale
        for t in range(1, iters // 4 + 1):
            g = -np.einsum("kij,i,j->k", _MINOR_STACK, v, v)
            c = c + (step0 / math.sqrt(t)) * g
            phi_c, v = _phi(G, c)
            if phi_c > best_phi:
                best_phi, best_c = phi_c, c.copy()

    method = "subgradient"
    try:
        import cvxpy as cp

        cv = cp.Variable(9)
        s = cp.Variable()
        M = G - sum(cv[k] * _MINOR_STACK[k] for k in range(9))
        prob = cp.Problem(cp.Maximize(s), [M - s * np.eye(9) >> 0])
        prob.solve(solver="CLARABEL")
        if cv.value is not None:
            phi_sdp, _ = _phi(G, np.asarray(cv.value))
            if phi_sdp > best_phi:
                best_phi, best_c = phi_sdp, np.asarray(cv.value)
                method = "subgradient+sdp"
    except Exception:
        pass

    value = float(best_phi)
    if value >= -cfg.tol:
        verdict = "consistent"
        poly_flag = True
    elif value < POLYCONVEX_REFUTED_MAX:
        verdict = "refuted"
        poly_flag = False
    else:
        verdict = "inconclusive"
        poly_flag = None
    witness = {"coefficients": [float(u) for u in best_c],
               "phi": value, "method": method, "polyconvex": poly_flag}
    return ProbeReport(kind="polyconvexity", value=value,
                       witness=witness, verdict=verdict)
