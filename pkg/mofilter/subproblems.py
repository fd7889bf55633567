from __future__ import annotations
from dataclasses import dataclass
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from .errors import Infeasible, NumericalFailure, ZeroDirection

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-11
COST_TOL = 1e-11
OMEGA_ZERO_TOL = 1e-12


@dataclass
class LinearizedSet:
    """
    { s : h0 + H s = 0, g0 + G s <= 0 } (Verschiebung relativ zum Zentrum).
    """
    H: np.ndarray
    h0: np.ndarray
    G: np.ndarray
    g0: np.ndarray

    def __post_init__(self):
        self.H = np.atleast_2d(np.asarray(self.H, dtype=float))
        self.G = np.atleast_2d(np.asarray(self.G, dtype=float))
        self.h0 = np.asarray(self.h0, dtype=float).ravel()
        self.g0 = np.asarray(self.g0, dtype=float).ravel()
        n = max(self.H.shape[1], self.G.shape[1])
        if self.h0.size == 0:
            self.H = np.zeros((0, n))
        if self.g0.size == 0:
            self.G = np.zeros((0, n))

    @property
    def dim(self) -> int:
        return self.H.shape[1]

    @classmethod
    def unconstrained(cls, n: int) -> "LinearizedSet":
        return cls(H=np.zeros((0, n)), h0=np.zeros(0), G=np.zeros((0, n)), g0=np.zeros(0))

    def shifted(self, step) -> "LinearizedSet":
        """Dieselbe Menge, neu zentriert bei center + step."""
        step = np.asarray(step, dtype=float)
        return LinearizedSet(H=self.H, h0=self.h0 + self.H @ step, G=self.G, g0=self.g0 + self.G @ step)

    def violation(self, s) -> float:
        s = np.asarray(s, dtype=float)
        v = 0.0
        if self.h0.size:
            v = max(v, float(np.max(np.abs(self.h0 + self.H @ s))))
        if self.g0.size:
            v = max(v, float(np.max(self.g0 + self.G @ s)))
        return v


# ------------------------------- #
# Dichter Simplex (Bland)
# ------------------------------- #
@dataclass
class LPResult:
    x: np.ndarray
    fun: float
    ineqlin: np.ndarray   # Multiplikatoren >= 0 der <=-Zeilen
    eqlin: np.ndarray     # Multiplikatoren der Gleichungen
    nit: int


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]


def _iterate(T: np.ndarray, basis: List[int], ncols: int, max_iter: int) -> int:
    m = len(basis)
    for it in range(max_iter):
        r = T[-1, :ncols]
        enter = np.flatnonzero(r < -COST_TOL)
        if enter.size == 0:
            return it
        j = int(enter[0])
        col = T[:m, j]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            raise NumericalFailure("LP is unbounded")
        ratios = T[rows, -1] / col[rows]
        rmin = ratios.min()
        ties = rows[ratios <= rmin + 1e-13 * max(1.0, abs(rmin))]
        leave = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, leave, j)
        basis[leave] = j
    raise NumericalFailure(f"simplex hit its iteration cap ({max_iter})")


def linprog_simplex(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, free=None,
                    max_iter: Optional[int] = None) -> LPResult:
    """
    min c^T x  s.t.  A_ub x <= b_ub, A_eq x = b_eq, x_j >= 0 (bzw. frei, wenn free[j]).
    Zwei-Phasen-Tableau mit Bland-Regel; Duale aus der optimalen Basis.
    """
    c = np.asarray(c, dtype=float).ravel()
    nv = c.size
    A_ub = np.zeros((0, nv)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float)).reshape(-1, nv)
    A_eq = np.zeros((0, nv)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float)).reshape(-1, nv)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    free = np.zeros(nv, dtype=bool) if free is None else np.asarray(free, dtype=bool)
    m1, m2 = A_ub.shape[0], A_eq.shape[0]
    m = m1 + m2

    # freie Variablen aufspalten: x_j = z_j+ - z_j-
    split_cols = [(j, 1.0) for j in range(nv)] + [(j, -1.0) for j in range(nv) if free[j]]
    S = np.zeros((nv, len(split_cols)))
    for k, (j, sgn) in enumerate(split_cols):
        S[j, k] = sgn
    n0 = len(split_cols)
    A = np.zeros((m, n0 + m1))
    A[:m1, :n0] = A_ub @ S
    A[m1:, :n0] = A_eq @ S
    A[:m1, n0:] = np.eye(m1)
    b = np.concatenate([b_ub, b_eq])
    sign = np.where(b < 0, -1.0, 1.0)
    A *= sign[:, None]
    b = b * sign
    cost = np.concatenate([c @ S, np.zeros(m1)])
    nn = n0 + m1

    basis: List[int] = []
    art_rows = []
    for i in range(m):
        if i < m1 and sign[i] > 0:
            basis.append(n0 + i)
        else:
            basis.append(-1)
            art_rows.append(i)
    na = len(art_rows)
    T = np.zeros((m + 1, nn + na + 1))
    T[:m, :nn] = A
    T[:m, -1] = b
    for k, i in enumerate(art_rows):
        T[i, nn + k] = 1.0
        basis[i] = nn + k
    if max_iter is None:
        max_iter = 50 * (m + nn + 1)

    nit = 0
    if na:
        c1 = np.zeros(nn + na)
        c1[nn:] = 1.0
        T[-1, :-1] = c1 - c1[basis] @ T[:m, :-1]
        T[-1, -1] = -c1[basis] @ T[:m, -1]
        nit += _iterate(T, basis, nn + na, max_iter)
        if -T[-1, -1] > 1e-9 * max(1.0, float(np.max(np.abs(b))) if m else 1.0):
            raise Infeasible(f"LP infeasible (phase-1 residual {-T[-1, -1]:.3e})")
        # künstliche Variablen aus der Basis treiben, redundante Zeilen streichen
        keep = []
        for i in range(m):
            if basis[i] >= nn:
                cand = np.flatnonzero(np.abs(T[i, :nn]) > 1e-9)
                if cand.size:
                    _pivot(T, i, int(cand[0]))
                    basis[i] = int(cand[0])
                    keep.append(i)
            else:
                keep.append(i)
        rows = keep + [m]
        T = T[rows][:, list(range(nn)) + [T.shape[1] - 1]]
        basis = [basis[i] for i in keep]
    else:
        keep = list(range(m))
        T = np.delete(T, np.s_[nn:nn + na], axis=1)

    mk = len(basis)
    T[-1, :nn] = cost - cost[basis] @ T[:mk, :nn]
    T[-1, -1] = -cost[basis] @ T[:mk, -1]
    nit += _iterate(T, basis, nn, max_iter)

    z = np.zeros(nn)
    z[basis] = T[:mk, -1]
    x = S @ z[:n0]

    y = np.zeros(m)
    if mk:
        B = A[keep][:, basis]
        y[keep] = np.linalg.solve(B.T, cost[basis])
    y *= sign
    lam = -y[:m1]
    if lam.size and lam.min() < -1e-8:
        log.warning(f"simplex dual has negative inequality multiplier {lam.min():.3e}")
    return LPResult(x=x, fun=float(c @ x), ineqlin=np.maximum(lam, 0.0), eqlin=-y[m1:], nit=nit)


# ------------------------------- #
# Normalschritt (ITRN)
# ------------------------------- #
def _independent_rows(A_fixed: np.ndarray, candidates: np.ndarray, rows: List[int]) -> List[int]:
    chosen = []
    base = A_fixed
    rank = np.linalg.matrix_rank(base) if base.size else 0
    for i in rows:
        trial = np.vstack([base, candidates[i]]) if base.size else candidates[i][None, :]
        r = np.linalg.matrix_rank(trial)
        if r > rank:
            chosen.append(i)
            base, rank = trial, r
    return chosen


def qp_least_norm(lin: LinearizedSet, max_iter: Optional[int] = None) -> np.ndarray:
    """
    min ||s||_2^2  s.t.  h0 + H s = 0, g0 + G s <= 0  (primale Active-Set-Methode).
    """
    n = lin.dim
    H, G = lin.H, lin.G
    b_eq, b_ub = -lin.h0, -lin.g0
    M, P = H.shape[0], G.shape[0]
    if M == 0 and P == 0:
        return np.zeros(n)

    tol = 1e-10
    x = np.zeros(n)
    if lin.violation(x) > tol:
        x = linprog_simplex(np.zeros(n), A_ub=G if P else None, b_ub=b_ub if P else None,
                            A_eq=H if M else None, b_eq=b_eq if M else None,
                            free=np.ones(n, dtype=bool)).x

    active = [i for i in range(P) if G[i] @ x >= b_ub[i] - tol * max(1.0, abs(b_ub[i]))]
    W = _independent_rows(H, G, active)
    if max_iter is None:
        max_iter = 10 * (n + M + P) + 10

    for _ in range(max_iter):
        A_W = np.vstack([H, G[W]]) if W else H
        b_W = np.concatenate([b_eq, b_ub[W]]) if W else b_eq
        z = np.linalg.lstsq(A_W, b_W, rcond=None)[0] if A_W.shape[0] else np.zeros(n)
        p = z - x
        if np.linalg.norm(p) <= 1e-12 * max(1.0, np.linalg.norm(x)):
            x = z
            if not W:
                return x
            lam = np.linalg.lstsq(A_W.T, -z, rcond=None)[0][M:]
            k = int(np.argmin(lam))
            if lam[k] >= -1e-12:
                return x
            W.pop(k)
            continue

        alpha, block = 1.0, None
        for i in range(P):
            if i in W:
                continue
            gp = G[i] @ p
            if gp > 1e-14:
                t = (b_ub[i] - G[i] @ x) / gp
                if t < alpha:
                    alpha, block = max(t, 0.0), i
        x = x + alpha * p
        if block is not None:
            W.append(block)
    raise NumericalFailure("active-set QP hit its iteration cap")


def compatible(n_step, delta_bar: float, cfg) -> bool:
    """||n|| <= c_delta * Delta * min{1, c_mu * Delta^mu} (Trust-Region-Norm = 2-Norm)."""
    if delta_bar <= 0:
        raise ValueError(f"radius must be positive, got {delta_bar}")
    bound = cfg.c_delta * delta_bar * min(1.0, cfg.c_mu * delta_bar ** cfg.mu)
    return float(np.linalg.norm(n_step)) <= bound


# ------------------------------- #
# Tangentialschritt (ITRT) mit Dualen
# ------------------------------- #
@dataclass
class TangentialSolution:
    d: np.ndarray
    omega: float
    chi: float
    beta: float
    y1: np.ndarray
    y2: np.ndarray
    y3: np.ndarray
    y4: np.ndarray
    y5: np.ndarray
    dual_objective: float

    @property
    def duality_gap(self) -> float:
        return abs(self.beta - self.dual_objective)


def _solve_tangential(F: np.ndarray, lin: LinearizedSet, cuts: Optional[np.ndarray] = None,
                      max_iter: Optional[int] = None) -> TangentialSolution:
    F = np.atleast_2d(np.asarray(F, dtype=float))
    K, n = F.shape
    M, P = lin.H.shape[0], lin.G.shape[0]
    ncut = 0 if cuts is None else cuts.shape[0]
    eye = np.eye(n)
    A_ub = np.vstack([
        np.hstack([-eye, np.zeros((n, 1))]),
        np.hstack([eye, np.zeros((n, 1))]),
        np.hstack([F, -np.ones((K, 1))]),
        np.hstack([lin.G, np.zeros((P, 1))]),
        np.hstack([cuts, np.zeros((ncut, 1))]) if ncut else np.zeros((0, n + 1)),
    ])
    b_ub = np.concatenate([np.ones(2 * n), np.zeros(K), -lin.g0, np.ones(ncut)])
    A_eq = np.hstack([lin.H, np.zeros((M, 1))])
    c = np.zeros(n + 1)
    c[-1] = 1.0
    if max_iter is None:
        max_iter = 50 * (n + K + M + P + ncut)
    res = linprog_simplex(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq if M else None,
                          b_eq=-lin.h0 if M else None, free=np.ones(n + 1, dtype=bool),
                          max_iter=max_iter)
    d, beta = res.x[:n], res.x[n]
    lam = res.ineqlin
    y1, y2, y3 = lam[:n], lam[n:2 * n], lam[2 * n:2 * n + K]
    y5 = lam[2 * n + K:2 * n + K + P]
    y4 = res.eqlin
    dual_obj = -(b_ub @ lam) + lin.h0 @ y4
    omega = -beta
    if omega <= OMEGA_ZERO_TOL * max(1.0, float(np.max(np.abs(F))) if F.size else 1.0):
        omega = 0.0
    return TangentialSolution(d=d, omega=omega, chi=min(1.0, omega), beta=beta,
                              y1=y1, y2=y2, y3=y3, y4=y4, y5=y5, dual_objective=float(dual_obj))


def lp_tangential(F, lin_shifted: LinearizedSet, max_iter: Optional[int] = None) -> TangentialSolution:
    """
    min beta s.t. F d <= beta*1, d in L - x_n, ||d||_inf <= 1.
    omega = -beta* >= 0, chi = min{1, omega}.
    """
    return _solve_tangential(F, lin_shifted, max_iter=max_iter)


def kkt_residual(F, H, G, g_values, sol: TangentialSolution) -> Tuple[float, float]:
    F = np.atleast_2d(np.asarray(F, dtype=float))
    n = F.shape[1]
    H = np.asarray(H, dtype=float).reshape(-1, n)
    G = np.asarray(G, dtype=float).reshape(-1, n)
    total = float(np.sum(sol.y3))
    if total <= 0:
        raise ValueError("kkt_residual needs sum(y3) > 0")
    w = sol.y3 / total
    y4 = sol.y4 / total
    y5 = sol.y5 / total
    r = F.T @ w
    if H.shape[0]:
        r = r + H.T @ y4
    if G.shape[0]:
        r = r + G.T @ y5
    complementarity = abs(float(np.asarray(g_values, dtype=float) @ y5)) if G.shape[0] else 0.0
    return float(np.linalg.norm(r)), complementarity


# ------------------------------- #
# Schrittweite
# ------------------------------- #
def initial_steplength(n_step, d, delta: float, lin_shifted: LinearizedSet) -> float:
    """
    Größtes sigma mit x_n + sigma*d/||d|| in L und ||n + sigma*d/||d|| ||_2 <= delta.
    """
    d = np.asarray(d, dtype=float)
    n_step = np.asarray(n_step, dtype=float)
    nd = float(np.linalg.norm(d))
    if nd == 0.0:
        raise ZeroDirection("tangential direction is zero")
    u = d / nd

    b = float(n_step @ u)
    disc = b * b - (float(n_step @ n_step) - delta * delta)
    ball = max(0.0, -b + math.sqrt(disc)) if disc >= 0 else 0.0

    poly = math.inf
    if lin_shifted.G.shape[0]:
        Gu = lin_shifted.G @ u
        # Zeilen, die u nur im Rundungsrauschen berührt, begrenzen nicht
        rows = Gu > 1e-12 * np.maximum(1.0, np.linalg.norm(lin_shifted.G, axis=1))
        if np.any(rows):
            poly = max(0.0, float(np.min(-lin_shifted.g0[rows] / Gu[rows])))
    return min(ball, poly)


# ------------------------------- #
# 2-Norm vs. inf-Norm
# ------------------------------- #
def omega_norm_ratio_probe(F, lin_shifted: LinearizedSet, max_cuts: int = 200, rtol: float = 1e-6) -> float:
    """
    omega_2 / omega_inf. omega_2 wird durch Schnittebenen an die 2-Kugel von oben
    und durch skalierte zulässige Punkte von unten eingeschlossen; zurückgegeben wird die untere Schranke.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    base = _solve_tangential(F, lin_shifted)
    if base.omega <= 0.0:
        return 1.0
    cuts = np.zeros((0, F.shape[1]))
    lower = 0.0
    sol = base
    for _ in range(max_cuts):
        norm = float(np.linalg.norm(sol.d))
        scale = max(1.0, norm)
        lower = max(lower, -float(np.max(F @ (sol.d / scale))))
        upper = sol.omega
        if upper - lower <= rtol * max(1.0, upper) or norm == 0.0:
            break
        cuts = np.vstack([cuts, sol.d / norm])
        sol = _solve_tangential(F, lin_shifted, cuts=cuts)
    return min(1.0, lower / base.omega)
