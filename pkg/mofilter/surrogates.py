from __future__ import annotations
from dataclasses import dataclass, field, replace
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as linalg

from .errors import SingularInterpolation
from .problem import EvalDatabase, EvalRecord, Problem
from .subproblems import LinearizedSet

log = logging.getLogger(__name__)

RBF_CUBIC = "rbf-cubic"
TAYLOR1 = "taylor1"
TAYLOR2 = "taylor2"
MODEL_KINDS = (RBF_CUBIC, TAYLOR1, TAYLOR2)

FD_REL_STEP = 1e-6
FD_MIN_REL_STEP = 1e-8
FD_HESS_REL_STEP = 1e-4
RBF_MAX_COND = 1e10


def _outputs(rec: EvalRecord) -> np.ndarray:
    # Reihenfolge aller skalaren Modelle: f (K), h (M), g (P)
    return np.concatenate([rec.f, rec.h, rec.g])


# ------------------------------- #
# Modellkerne (vektorwertig, alle Ausgaben gemeinsam)
# ------------------------------- #
class _TaylorCore:
    def __init__(self, center: np.ndarray, values: np.ndarray, grads: np.ndarray, hess: np.ndarray):
        self.center = center
        self.values = values      # (q,)
        self.grads = grads        # (q, n)
        self.hess = hess          # (q, n, n)

    def value(self, xi: np.ndarray) -> np.ndarray:
        s = np.asarray(xi, dtype=float) - self.center
        return self.values + self.grads @ s + 0.5 * np.einsum("i,qij,j->q", s, self.hess, s)

    def jacobian(self, xi: np.ndarray) -> np.ndarray:
        s = np.asarray(xi, dtype=float) - self.center
        return self.grads + self.hess @ s

    def hessians(self, xi: np.ndarray) -> np.ndarray:
        return self.hess.copy()


class _RbfCore:
    """
    Kubisches RBF-Modell m(xi) = sum_i lam_i ||s - s_i||^3 + a + b^T s mit s = (xi - c) / scale.
    """

    def __init__(self, center: np.ndarray, scale: float, nodes: np.ndarray, lam: np.ndarray, poly: np.ndarray):
        self.center = center
        self.scale = scale
        self.nodes = nodes        # (p, n), skaliert
        self.lam = lam            # (p, q)
        self.poly = poly          # (n+1, q)

    def _scaled(self, xi):
        s = (np.asarray(xi, dtype=float) - self.center) / self.scale
        diff = s - self.nodes
        r = np.linalg.norm(diff, axis=1)
        return s, diff, r

    def value(self, xi: np.ndarray) -> np.ndarray:
        s, _, r = self._scaled(xi)
        return r ** 3 @ self.lam + self.poly[0] + s @ self.poly[1:]

    def jacobian(self, xi: np.ndarray) -> np.ndarray:
        _, diff, r = self._scaled(xi)
        grad_s = (diff * (3.0 * r)[:, None]).T @ self.lam + self.poly[1:]
        return grad_s.T / self.scale

    def hessians(self, xi: np.ndarray) -> np.ndarray:
        _, diff, r = self._scaled(xi)
        n = diff.shape[1]
        blocks = np.zeros((len(r), n, n))
        for i, ri in enumerate(r):
            if ri > 0.0:
                blocks[i] = 3.0 * (ri * np.eye(n) + np.outer(diff[i], diff[i]) / ri)
        return np.einsum("pij,pq->qij", blocks, self.lam) / self.scale ** 2


class ScalarModel:
    """Sicht auf eine einzelne Ausgabe eines SurrogateSet."""

    def __init__(self, owner: "SurrogateSet", index: int):
        self.owner = owner
        self.index = index

    @property
    def kind(self) -> str:
        return self.owner.kind

    @property
    def center(self) -> np.ndarray:
        return self.owner.center

    @property
    def radius(self) -> float:
        return self.owner.radius

    def value(self, xi) -> float:
        return float(self.owner.core.value(xi)[self.index])

    def gradient(self, xi) -> np.ndarray:
        return self.owner.core.jacobian(xi)[self.index]

    def hessian(self, xi) -> np.ndarray:
        return self.owner.core.hessians(xi)[self.index]


@dataclass
class SurrogateSet:
    kind: str
    center: np.ndarray
    radius: float
    core: object
    num_obj: int
    num_eq: int
    num_ineq: int
    fully_linear: bool = True
    builder: Optional["ModelBuilder"] = None
    new_evals: int = 0
    points: Optional[np.ndarray] = None

    # -- Zugriff auf Komponenten --
    def _slices(self):
        K, M = self.num_obj, self.num_eq
        return slice(0, K), slice(K, K + M), slice(K + M, K + M + self.num_ineq)

    @property
    def mf(self) -> List[ScalarModel]:
        return [ScalarModel(self, i) for i in range(self.num_obj)]

    @property
    def mh(self) -> List[ScalarModel]:
        return [ScalarModel(self, self.num_obj + i) for i in range(self.num_eq)]

    @property
    def mg(self) -> List[ScalarModel]:
        off = self.num_obj + self.num_eq
        return [ScalarModel(self, off + i) for i in range(self.num_ineq)]

    def values(self, xi) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        v = self.core.value(xi)
        sf, sh, sg = self._slices()
        return v[sf], v[sh], v[sg]

    def jacobians(self, xi) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        J = self.core.jacobian(xi)
        sf, sh, sg = self._slices()
        return J[sf], J[sh], J[sg]

    def jac_f(self, xi) -> np.ndarray:
        return self.jacobians(xi)[0]

    def phi(self, xi) -> float:
        """Max-Skalarisierung der Zielmodelle."""
        return float(np.max(self.values(xi)[0]))

    def linearize(self) -> LinearizedSet:
        _, h0, g0 = self.values(self.center)
        _, H, G = self.jacobians(self.center)
        return LinearizedSet(H=H, h0=h0, G=G, g0=g0)


# ------------------------------- #
# Taylor-Modelle (finite Differenzen)
# ------------------------------- #
def fd_steps(x: np.ndarray, delta: float) -> np.ndarray:
    scale = np.maximum(1.0, np.abs(x))
    return np.maximum(np.minimum(delta, FD_REL_STEP * scale), FD_MIN_REL_STEP * scale)


def build_taylor(problem: Problem, db: EvalDatabase, x, delta: float, degree: int,
                 max_workers: int = 1) -> SurrogateSet:
    if delta <= 0:
        raise ValueError(f"radius must be positive, got {delta}")
    if degree not in (1, 2):
        raise ValueError(f"degree must be 1 or 2, got {degree}")
    x = np.asarray(x, dtype=float).ravel()
    n = problem.n
    before = db.num_evals
    h = fd_steps(x, delta)

    points = [x]
    for i in range(n):
        e = np.zeros(n)
        e[i] = h[i]
        points += [x + e, x - e]

    hh = FD_HESS_REL_STEP * np.maximum(1.0, np.abs(x))
    pair_index = {}
    if degree == 2:
        for i in range(n):
            e = np.zeros(n)
            e[i] = hh[i]
            points += [x + e, x - e]
        for i in range(n):
            for j in range(i + 1, n):
                pair_index[(i, j)] = len(points)
                for si in (1.0, -1.0):
                    for sj in (1.0, -1.0):
                        p = x.copy()
                        p[i] += si * hh[i]
                        p[j] += sj * hh[j]
                        points.append(p)

    recs = db.evaluate_many(problem, points, max_workers=max_workers)
    vals = np.array([_outputs(r) for r in recs])           # (len(points), q)
    f0 = vals[0]
    q = f0.shape[0]

    grads = np.zeros((q, n))
    for i in range(n):
        fp, fm = vals[1 + 2 * i], vals[2 + 2 * i]
        step = points[1 + 2 * i][i] - points[2 + 2 * i][i]
        grads[:, i] = (fp - fm) / step

    hess = np.zeros((q, n, n))
    if degree == 2:
        base = 1 + 2 * n
        for i in range(n):
            fp, fm = vals[base + 2 * i], vals[base + 2 * i + 1]
            hess[:, i, i] = (fp - 2.0 * f0 + fm) / hh[i] ** 2
        for (i, j), k in pair_index.items():
            fpp, fpm, fmp, fmm = vals[k], vals[k + 1], vals[k + 2], vals[k + 3]
            hij = (fpp - fpm - fmp + fmm) / (4.0 * hh[i] * hh[j])
            hess[:, i, j] = hij
            hess[:, j, i] = hij

    kind = TAYLOR1 if degree == 1 else TAYLOR2
    return SurrogateSet(
        kind=kind, center=x, radius=float(delta), core=_TaylorCore(x, f0, grads, hess),
        num_obj=problem.num_obj, num_eq=problem.num_eq, num_ineq=problem.num_ineq,
        fully_linear=True, new_evals=db.num_evals - before, points=np.array(points),
    )


# ------------------------------- #
# RBF-Modelle
# ------------------------------- #
def _rbf_system(nodes: np.ndarray) -> np.ndarray:
    p, n = nodes.shape
    r = np.linalg.norm(nodes[:, None, :] - nodes[None, :, :], axis=2)
    P = np.hstack([np.ones((p, 1)), nodes])
    A = np.zeros((p + n + 1, p + n + 1))
    A[:p, :p] = r ** 3
    A[:p, p:] = P
    A[p:, :p] = P.T
    return A


def _affine_selection(dirs: np.ndarray, theta_qr: float) -> List[int]:
    """Spalten von dirs (n x m), die per pivotisierter QR als affin unabhängig gelten."""
    if dirs.shape[1] == 0:
        return []
    _, R, piv = linalg.qr(dirs, mode="economic", pivoting=True)
    chosen = []
    for i in range(min(R.shape)):
        if abs(R[i, i]) < theta_qr:
            break
        chosen.append(int(piv[i]))
    return chosen


def _axis_completion(accepted: np.ndarray, n: int, theta_qr: float) -> List[int]:
    """Koordinatenachsen, die die akzeptierten Richtungen zu einer Basis ergänzen."""
    basis = np.zeros((n, 0))
    if accepted.shape[1]:
        Q, _ = np.linalg.qr(accepted)
        basis = Q
    axes = []
    for i in range(n):
        if basis.shape[1] >= n:
            break
        e = np.zeros(n)
        e[i] = 1.0
        r = e - basis @ (basis.T @ e)
        nr = np.linalg.norm(r)
        if nr >= theta_qr:
            axes.append(i)
            basis = np.hstack([basis, (r / nr)[:, None]])
    return axes


def build_rbf(problem: Problem, db: EvalDatabase, x, delta: float, c_search: float = 2.0,
              theta_qr: float = 1e-3, max_points: Optional[int] = None, max_workers: int = 1,
              axis_only: bool = False) -> SurrogateSet:
    if delta <= 0:
        raise ValueError(f"radius must be positive, got {delta}")
    x = np.asarray(x, dtype=float).ravel()
    n = problem.n
    before = db.num_evals
    if max_points is None:
        max_points = (n + 1) * (n + 2) // 2

    center_rec = db.evaluate(problem, x)
    candidates: List[EvalRecord] = []
    if not axis_only:
        candidates = [r for r in db.points_within(x, c_search * delta) if not np.array_equal(r.x, x)]

    dirs = np.array([(r.x - x) / delta for r in candidates]).T if candidates else np.zeros((n, 0))
    chosen = _affine_selection(dirs, theta_qr)[:n]
    selected = [center_rec] + [candidates[i] for i in chosen]

    if len(selected) < n + 1:
        accepted = dirs[:, chosen] if chosen else np.zeros((n, 0))
        new_points = []
        for i in _axis_completion(accepted, n, theta_qr):
            p = x.copy()
            p[i] += delta
            new_points.append(p)
        selected += db.evaluate_many(problem, new_points, max_workers=max_workers)

    # zusätzliche Punkte aus der Datenbank, solange das System gut konditioniert bleibt
    used = {id(r) for r in selected}
    for rec in candidates:
        if len(selected) >= max_points:
            break
        if id(rec) in used:
            continue
        trial = np.array([(r.x - x) / delta for r in selected + [rec]])
        if np.linalg.cond(_rbf_system(trial)) < RBF_MAX_COND:
            selected.append(rec)
            used.add(id(rec))

    nodes = np.array([(r.x - x) / delta for r in selected])
    A = _rbf_system(nodes)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularInterpolation(f"RBF system singular (cond={cond:.3e}) at x={x.tolist()}")
    Fv = np.array([_outputs(r) for r in selected])
    rhs = np.vstack([Fv, np.zeros((n + 1, Fv.shape[1]))])
    try:
        lu, piv = linalg.lu_factor(A)
        sol = linalg.lu_solve((lu, piv), rhs)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SingularInterpolation(f"RBF factorisation failed: {e}") from e

    p = len(selected)
    core = _RbfCore(center=x, scale=float(delta), nodes=nodes, lam=sol[:p], poly=sol[p:])
    return SurrogateSet(
        kind=RBF_CUBIC, center=x, radius=float(delta), core=core,
        num_obj=problem.num_obj, num_eq=problem.num_eq, num_ineq=problem.num_ineq,
        fully_linear=True, new_evals=db.num_evals - before,
        points=np.array([r.x for r in selected]),
    )


# ------------------------------- #
# Builder / Modellverbesserung
# ------------------------------- #
@dataclass
class ModelBuilder:
    problem: Problem
    db: EvalDatabase
    kind: str = RBF_CUBIC
    max_workers: int = 1
    c_search: float = 2.0
    theta_qr: float = 1e-3
    max_points: Optional[int] = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind '{self.kind}', choose from {MODEL_KINDS}")

    def with_database(self, db: EvalDatabase) -> "ModelBuilder":
        return replace(self, db=db)

    def build(self, x, delta: float) -> SurrogateSet:
        if self.kind == RBF_CUBIC:
            try:
                models = build_rbf(self.problem, self.db, x, delta, c_search=self.c_search,
                                   theta_qr=self.theta_qr, max_points=self.max_points,
                                   max_workers=self.max_workers)
            except SingularInterpolation as e:
                log.warning(f"{e}; rebuilding from axis points only")
                models = build_rbf(self.problem, self.db, x, delta, theta_qr=self.theta_qr,
                                   max_workers=self.max_workers, axis_only=True)
        else:
            degree = 1 if self.kind == TAYLOR1 else 2
            models = build_taylor(self.problem, self.db, x, delta, degree, max_workers=self.max_workers)
        models.builder = self
        return models


def make_fully_linear(models: SurrogateSet, x, delta: float, delta_max: float = np.inf) -> SurrogateSet:
    """
    Liefert Modelle, die auf B(x; delta) voll linear sind.
    Schon voll lineare Modelle mit gleichem Zentrum bleiben für delta in [radius, delta_max] gültig.
    """
    x = np.asarray(x, dtype=float).ravel()
    if (models.fully_linear and np.array_equal(models.center, x)
            and models.radius <= delta <= delta_max):
        return models
    if models.builder is None:
        raise ValueError("surrogate set has no builder attached")
    return models.builder.build(x, delta)


# ------------------------------- #
# Fehlerordnung (voll lineare Modelle)
# ------------------------------- #
@dataclass
class SlopeEstimate:
    slope: float
    radii: List[float]
    errors: List[float] = field(default_factory=list)


def unit_ball_samples(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.standard_normal((count, n))
    u /= np.linalg.norm(u, axis=1)[:, None]
    return u * rng.random(count)[:, None] ** (1.0 / n)


def error_slope_probe(problem: Problem, model_builder: ModelBuilder, x, radii: Sequence[float],
                      output: int = 0, num_samples: int = 32, seed: int = 0) -> SlopeEstimate:
    """
    Steigung von log(max |f - m|) über log(Delta); output indiziert die Ausgaben [f, h, g].
    """
    radii = [float(r) for r in radii]
    if len(radii) < 4 or any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly decreasing with at least 4 entries")
    x = np.asarray(x, dtype=float).ravel()
    samples = unit_ball_samples(problem.n, num_samples, np.random.default_rng(seed))
    truth_db = EvalDatabase()
    errors = []
    for delta in radii:
        models = model_builder.with_database(EvalDatabase()).build(x, delta)
        pts = x + delta * samples
        err = 0.0
        for rec in truth_db.evaluate_many(problem, pts):
            err = max(err, abs(_outputs(rec)[output] - models.core.value(rec.x)[output]))
        errors.append(err)
    logs = np.log(np.maximum(errors, 1e-300))
    slope = float(np.polyfit(np.log(radii), logs, 1)[0])
    return SlopeEstimate(slope=slope, radii=radii, errors=errors)
