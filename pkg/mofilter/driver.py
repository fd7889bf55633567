from __future__ import annotations
from dataclasses import dataclass, field
import logging
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .config import Config
from .errors import (
    Infeasible, NonFiniteValue, NumericalFailure, RestorationFailed, SingularInterpolation, ZeroDirection,
    ZeroModelDecrease,
)
from .filter import FilterSet
from .problem import EvalDatabase, EvalRecord, Problem, weighted_sum_problem
from .subproblems import (
    TangentialSolution, compatible, initial_steplength, kkt_residual, lp_tangential, qp_least_norm,
)
from .surrogates import ModelBuilder, SurrogateSet, make_fully_linear

log = logging.getLogger(__name__)

# Status
CONVERGED = "Converged"
MAX_ITER = "MaxIter"
RESTORATION_FAILED = "RestorationFailed"
CRIT_LOOP_STOP = "CritLoopStop"
NON_FINITE = "NonFiniteValue"
NUMERICAL_FAILURE = "NumericalFailure"

# Iterationsarten
SUCCESSFUL = "successful"
THETA_ITERATION = "theta-iteration"
INACCEPTABLE = "inacceptable"
RESTORATION = "restoration"
CRITLOOP = "critloop"
ACCEPTED_KINDS = (SUCCESSFUL, THETA_ITERATION)

MIN_MODEL_DECREASE = 1e-14

TRACE_TAIL = ["theta", "phi", "chi", "delta_bar", "delta", "rho", "n_norm", "sigma", "evals_cumulative"]


def trace_columns(n: int) -> List[str]:
    return ["k", "kind"] + [f"x{i + 1}" for i in range(n)] + TRACE_TAIL


# ------------------------------- #
# Datentypen
# ------------------------------- #
@dataclass
class TrState:
    k: int
    x: np.ndarray
    delta_bar: float
    delta: float
    record: EvalRecord
    models: SurrogateSet
    filter: FilterSet
    n_step: Optional[np.ndarray] = None
    chi_bar: float = math.nan
    chi: float = math.nan
    tangential: Optional[TangentialSolution] = None


@dataclass
class IterationLog:
    k: int
    kind: str
    x: np.ndarray
    theta: float
    phi: float
    chi: float
    delta_bar: float
    delta: float
    rho: Optional[float]
    n_norm: Optional[float]
    sigma: Optional[float]
    evals_cumulative: int
    # nicht in trace.csv: ||n + sigma*d|| und Verletzung der Linearisierung im Versuchspunkt
    step_norm: Optional[float] = None
    lin_violation: Optional[float] = None

    def as_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {"k": self.k, "kind": self.kind}
        for i, v in enumerate(self.x):
            row[f"x{i + 1}"] = float(v)
        nan = math.nan
        row.update(
            theta=self.theta, phi=self.phi, chi=self.chi,
            delta_bar=self.delta_bar, delta=self.delta,
            rho=nan if self.rho is None else self.rho,
            n_norm=nan if self.n_norm is None else self.n_norm,
            sigma=nan if self.sigma is None else self.sigma,
            evals_cumulative=self.evals_cumulative,
        )
        return row


@dataclass
class RunResult:
    status: str
    x_final: np.ndarray
    record_final: EvalRecord
    kkt_stationarity: float
    kkt_complementarity: float
    chi_final: float
    num_evals: int
    log: List[IterationLog]
    filter_entries: List[Tuple[float, float]]
    config: Config
    problem_name: str = "problem"
    notes: List[str] = field(default_factory=list)

    @property
    def theta_final(self) -> float:
        return self.record_final.theta

    @property
    def iterations(self) -> int:
        return len({e.k for e in self.log})

    @property
    def restorations(self) -> int:
        return sum(1 for e in self.log if e.kind == RESTORATION)

    def trace_rows(self) -> List[Dict[str, Any]]:
        return [e.as_row() for e in self.log]

    def to_dict(self) -> Dict[str, Any]:
        rec = self.record_final
        return {
            "problem": self.problem_name,
            "status": self.status,
            "x_final": rec.x.tolist(),
            "f_final": rec.f.tolist(),
            "theta_final": rec.theta,
            "phi_final": rec.phi,
            "chi_final": _json_float(self.chi_final),
            "kkt_stationarity": _json_float(self.kkt_stationarity),
            "kkt_complementarity": _json_float(self.kkt_complementarity),
            "iterations": self.iterations,
            "restorations": self.restorations,
            "num_evals": self.num_evals,
            "config": self.config.to_dict(),
            "notes": list(self.notes),
        }


def _json_float(v: float) -> Optional[float]:
    return None if v is None or not math.isfinite(v) else float(v)


# ------------------------------- #
# Einzeltests
# ------------------------------- #
def ratio_rho(record_k: EvalRecord, record_trial: EvalRecord, phi_model_k: float, phi_model_trial: float) -> float:
    denom = phi_model_k - phi_model_trial
    if abs(denom) < MIN_MODEL_DECREASE:
        raise ZeroModelDecrease(f"model decrease {denom:.3e} is numerically zero")
    return (record_k.phi - record_trial.phi) / denom


def model_decrease_test(phi_model_k: float, phi_model_trial: float, theta_k: float, cfg: Config) -> bool:
    if theta_k < 0:
        raise ValueError(f"theta must be >= 0, got {theta_k}")
    return phi_model_k - phi_model_trial >= cfg.kappa_theta * theta_k ** cfg.psi


def shrink_radius(delta: float, rho: Optional[float], cfg: Config, step_norm: Optional[float] = None) -> float:
    """
    Verkleinerter Radius aus [gamma0*Delta, gamma1*Delta]. Bei rho < 0 liegt das Minimum der
    Parabel durch Start, Steigung und Versuchspunkt bei ||s|| / (2(1 - rho)); sonst gamma1*Delta.
    """
    if delta <= 0:
        raise ValueError(f"radius must be positive, got {delta}")
    if rho is None or not rho < 0.0:
        return cfg.gamma1 * delta
    s = delta if step_norm is None or not step_norm > 0.0 else min(step_norm, delta)
    return min(cfg.gamma1 * delta, max(cfg.gamma0 * delta, s / (2.0 * (1.0 - rho))))


def radius_update(delta: float, rho: Optional[float], cfg: Config, step_norm: Optional[float] = None) -> float:
    """shrink_radius bei rho < nu0 (oder undefiniert), sonst min{gamma2*Delta, Delta_max}."""
    if delta <= 0:
        raise ValueError(f"radius must be positive, got {delta}")
    if rho is None or not rho >= cfg.nu0:
        return shrink_radius(delta, rho, cfg, step_norm)
    return min(cfg.gamma2 * delta, cfg.delta_max)


def backtracking_stepsize(models: SurrogateSet, x_n, d, sigma_bar: float, omega: float, cfg: Config) -> float:
    """
    Kleinstes j mit Phi_m(x_n) - Phi_m(x_n + b^j sigma_bar/||d|| d) >= a * b^j sigma_bar/||d|| * omega.
    Rückgabe ist der Faktor vor d; 0, wenn max_backtracks erschöpft ist.
    """
    if sigma_bar <= 0.0:
        return 0.0
    d = np.asarray(d, dtype=float)
    x_n = np.asarray(x_n, dtype=float)
    nd = float(np.linalg.norm(d))
    if nd == 0.0:
        raise ZeroDirection("tangential direction is zero")
    phi0 = models.phi(x_n)
    sigma = sigma_bar / nd
    for _ in range(cfg.max_backtracks + 1):
        if phi0 - models.phi(x_n + sigma * d) >= cfg.a_armijo * sigma * omega:
            return sigma
        sigma *= cfg.b_armijo
    return 0.0


def model_linesearch(models: SurrogateSet, x_n, d, sigma_max: float, sigma_armijo: float, omega: float,
                     cfg: Config) -> float:
    """
    Minimum von Phi_m(x_n + s*d) auf [0, sigma_max] (Faktor vor d, wie backtracking_stepsize).
    Ersetzt den Armijo-Schritt nur, wenn es Phi_m weiter senkt und selbst die Armijo-Bedingung erfüllt.
    """
    if sigma_armijo <= 0.0 or sigma_max <= 0.0:
        return sigma_armijo
    x_n = np.asarray(x_n, dtype=float)
    d = np.asarray(d, dtype=float)

    def phi_along(s: float) -> float:
        return models.phi(x_n + s * d)

    res = minimize_scalar(phi_along, bounds=(0.0, sigma_max), method="bounded",
                          options={"xatol": cfg.linesearch_xtol * sigma_max})
    if not res.success or not np.isfinite(res.fun):
        return sigma_armijo
    s = float(res.x)
    phi0 = phi_along(0.0)
    if phi_along(s) < phi_along(sigma_armijo) and phi0 - phi_along(s) >= cfg.a_armijo * s * omega:
        log.debug(f"line search on the model: sigma {sigma_armijo:.6e} -> {s:.6e}")
        return s
    return sigma_armijo


def stopping_check(log_entries: List[IterationLog], state: TrState, cfg: Config,
                   previous: Optional[EvalRecord] = None, crit_status: Optional[str] = None) -> Optional[str]:
    """
    previous: Datensatz von x_k, wenn in dieser Iteration ein Versuchspunkt angenommen wurde.
    crit_status: Ergebnis der Kritikalitätsroutine, falls sie lief.
    """
    if crit_status is not None:
        if crit_status == CRIT_LOOP_STOP:
            return CRIT_LOOP_STOP
        if cfg.stop_after_crit_loop:
            return CONVERGED
    if previous is not None and log_entries and log_entries[-1].kind in ACCEPTED_KINDS:
        rec = state.record
        if np.linalg.norm(previous.x - rec.x) <= cfg.tol_rel_x * np.linalg.norm(previous.x):
            return CONVERGED
        if np.linalg.norm(previous.f - rec.f) <= cfg.tol_rel_f * np.linalg.norm(previous.f):
            return CONVERGED
    if state.k >= cfg.max_iter:
        return MAX_ITER
    return None


# ------------------------------- #
# Normal- und Tangentialschritt
# ------------------------------- #
def normal_step(models: SurrogateSet) -> Optional[np.ndarray]:
    try:
        return qp_least_norm(models.linearize())
    except Infeasible:
        return None


def tangential_step(models: SurrogateSet, x, n_step) -> TangentialSolution:
    lin_n = models.linearize().shifted(n_step)
    return lp_tangential(models.jac_f(np.asarray(x) + n_step), lin_n)


def _builder(problem: Problem, db: EvalDatabase, cfg: Config) -> ModelBuilder:
    return ModelBuilder(problem, db, kind=cfg.model_kind, max_workers=cfg.max_workers,
                        c_search=cfg.rbf_c_search, theta_qr=cfg.rbf_theta_qr)


# ------------------------------- #
# Kritikalitätsroutine
# ------------------------------- #
@dataclass
class CriticalityOutcome:
    delta: float
    chi: float
    n_step: np.ndarray
    models: SurrogateSet
    tangential: TangentialSolution
    sub_iterations: int
    final_delta_j: float
    status: Optional[str] = None
    broke: bool = False


def criticality_test(theta: float, chi_bar: float, delta_bar: float, cfg: Config) -> bool:
    """Eintritt in die Kritikalitätsroutine."""
    return theta < cfg.eps_theta and chi_bar < cfg.eps_chi and delta_bar > cfg.M_crit * chi_bar


def critical_radius(delta_j: float, chi: float, delta_bar: float, cfg: Config) -> float:
    return min(max(delta_j, cfg.B_crit * chi), delta_bar)


def criticality_routine(state: TrState, problem: Problem, db: EvalDatabase, cfg: Config,
                        single_pass: bool = False) -> CriticalityOutcome:
    """single_pass: nach der ersten Unteriteration abbrechen (Lauf endet danach ohnehin)."""
    x = state.x
    delta_j = state.delta_bar
    chi_j = state.chi_bar
    n_j = state.n_step
    models_j = state.models
    if models_j.builder is None:
        models_j.builder = _builder(problem, db, cfg)
    tang_j = state.tangential
    j = 0
    status, broke = None, False
    theta = state.record.theta

    while delta_j > cfg.M_crit * chi_j:
        if single_pass and j >= 1:
            break
        if j >= cfg.crit_max_iter:
            status = CRIT_LOOP_STOP
            break
        delta_plus = cfg.alpha_crit * delta_j
        try:
            models_plus = make_fully_linear(models_j, x, delta_plus)
        except SingularInterpolation as e:
            log.warning(f"criticality routine: radius {delta_plus:.3e} too small for interpolation ({e})")
            status = CRIT_LOOP_STOP
            break
        n_plus = normal_step(models_plus)
        if n_plus is None or not compatible(n_plus, delta_plus, cfg):
            broke = True
            break
        j += 1
        delta_j, n_j, models_j = delta_plus, n_plus, models_plus
        tang_j = tangential_step(models_j, x, n_j)
        chi_j = tang_j.chi
        log.debug(f"crit j={j} delta_j={delta_j:.3e} chi_j={chi_j:.3e} theta={theta:.3e}")

    delta = critical_radius(delta_j, chi_j, state.delta_bar, cfg)
    if status:
        how = "hit the sub-iteration cap"
    elif broke:
        how = "broke (incompatible)"
    else:
        how = "finished" if delta_j <= cfg.M_crit * chi_j else "stopped after one pass"
    log.info(f"criticality routine {how} after {j} sub-iterations: delta_j={delta_j:.3e}, chi={chi_j:.3e}")
    return CriticalityOutcome(delta=delta, chi=chi_j, n_step=n_j, models=models_j, tangential=tang_j,
                              sub_iterations=j, final_delta_j=delta_j, status=status, broke=broke)


# ------------------------------- #
# Restauration (Kompasssuche auf theta)
# ------------------------------- #
@dataclass
class RestorationResult:
    r: np.ndarray
    delta_bar: float
    record: EvalRecord
    models: SurrogateSet
    n_step: np.ndarray
    evals: int


def restoration(problem: Problem, db: EvalDatabase, x, filt: FilterSet, cfg: Config,
                delta_bar: Optional[float] = None, models: Optional[SurrogateSet] = None) -> RestorationResult:
    """
    Sucht r mit: ITRN kompatibel bei (x + r, Delta_+) und x + r für den Filter akzeptabel.
    Erwartet, dass x gerade in den Filter aufgenommen wurde.
    """
    x = np.asarray(x, dtype=float).ravel()
    delta_bar = cfg.delta0 if delta_bar is None else delta_bar
    start = db.num_evals
    if cfg.restoration_budget <= 0:
        raise RestorationFailed("restoration budget is 0")
    builder = models.builder if models is not None and models.builder is not None else _builder(problem, db, cfg)
    base = db.evaluate(problem, x)

    # Fehlbedienung: x ist schon kompatibel und (ohne sich selbst) akzeptabel
    others = FilterSet(gamma_theta=filt.gamma_theta,
                       entries=[e for e in filt.entries if e != (base.theta, base.phi)])
    if others.acceptable(base.theta, base.phi):
        m0 = models if models is not None and np.array_equal(models.center, x) and models.radius == delta_bar \
            else builder.build(x, delta_bar)
        n0 = normal_step(m0)
        if n0 is not None and compatible(n0, delta_bar, cfg):
            log.info("restoration: input point is already compatible, nothing to do")
            return RestorationResult(r=np.zeros_like(x), delta_bar=delta_bar, record=base, models=m0,
                                     n_step=n0, evals=db.num_evals - start)

    radii = [delta_bar, min(cfg.gamma2 * delta_bar, cfg.delta_max)]

    def exit_test(rec: EvalRecord):
        if not filt.acceptable(rec.theta, rec.phi):
            return None
        for dbar in dict.fromkeys(radii):
            m = builder.build(rec.x, dbar)
            n = normal_step(m)
            if n is not None and compatible(n, dbar, cfg):
                return dbar, m, n
        return None

    dirs = np.vstack([np.eye(problem.n), -np.eye(problem.n)])
    best = base
    step = delta_bar
    expand = 1.0 / cfg.restoration_contraction
    while step >= cfg.restoration_min_step:
        improved = False
        for dvec in dirs:
            if db.num_evals - start >= cfg.restoration_budget:
                raise RestorationFailed(f"restoration budget of {cfg.restoration_budget} evaluations exhausted "
                                        f"at theta={best.theta:.3e}")
            try:
                rec = db.evaluate(problem, best.x + step * dvec)
            except NonFiniteValue as e:
                log.debug(f"restoration poll skipped: {e}")
                continue
            if rec.theta < best.theta:
                best, improved = rec, True
                found = exit_test(best)
                if found is not None:
                    dbar, m, n = found
                    log.info(f"restoration succeeded: theta {base.theta:.3e} -> {best.theta:.3e}, "
                             f"delta_bar={dbar:.3e}, {db.num_evals - start} evaluations")
                    return RestorationResult(r=best.x - x, delta_bar=dbar, record=best, models=m,
                                             n_step=n, evals=db.num_evals - start)
                break
        step = min(step * expand, cfg.delta_max) if improved else step * cfg.restoration_contraction
    raise RestorationFailed(f"compass search stalled at theta={best.theta:.3e} (step < {cfg.restoration_min_step})")


# ------------------------------- #
# Hauptschleife
# ------------------------------- #
def final_certificate(models: SurrogateSet, x, delta_bar: float,
                      g_values: Optional[np.ndarray] = None) -> Tuple[float, float, float]:
    """
    (KKT-Stationarität, Komplementarität, chi) am Endpunkt aus den Dualen des Tangential-LPs.
    Die Komplementarität nutzt die wahren Ungleichungswerte g(x), sofern übergeben.
    """
    x = np.asarray(x, dtype=float)
    if not np.array_equal(models.center, x):
        models = make_fully_linear(models, x, delta_bar)
    n = normal_step(models)
    if n is None:
        return math.nan, math.nan, math.nan
    try:
        sol = tangential_step(models, x, n)
    except NumericalFailure as e:
        log.warning(f"final certificate unavailable: {e}")
        return math.nan, math.nan, math.nan
    lin_n = models.linearize().shifted(n)
    g = models.values(x)[2] if g_values is None else np.asarray(g_values, dtype=float).ravel()
    stat, comp = kkt_residual(models.jac_f(x + n), lin_n.H, lin_n.G, g, sol)
    return stat, comp, sol.chi


def solve(problem: Problem, x0, cfg: Optional[Config] = None, notes: Optional[List[str]] = None) -> RunResult:
    cfg = (cfg or Config()).validate()
    db = EvalDatabase()
    builder = _builder(problem, db, cfg)
    filt = FilterSet(gamma_theta=cfg.gamma_theta)
    entries: List[IterationLog] = []
    log.info(f"solve '{problem.name}' n={problem.n} K={problem.num_obj} M={problem.num_eq} "
             f"P={problem.num_ineq} model={cfg.model_kind} x0={np.asarray(x0).tolist()}")

    status: Optional[str] = None
    state: Optional[TrState] = None
    try:
        rec = db.evaluate(problem, x0)
        state = TrState(k=0, x=rec.x, delta_bar=cfg.delta0, delta=cfg.delta0, record=rec,
                        models=builder.build(rec.x, cfg.delta0), filter=filt)
        status = stopping_check(entries, state, cfg)
        while status is None:
            status = _iteration(problem, db, state, cfg, entries)
    except NonFiniteValue as e:
        log.error(f"aborting: {e}")
        status = NON_FINITE
        if state is None:
            raise
    except (SingularInterpolation, NumericalFailure) as e:
        log.error(f"aborting at k={state.k if state else 0}: {e}")
        status = NUMERICAL_FAILURE
        if state is None:
            raise

    stat, comp, chi = math.nan, math.nan, math.nan
    if status not in (NON_FINITE, NUMERICAL_FAILURE):
        try:
            stat, comp, chi = final_certificate(state.models, state.x, state.delta_bar, state.record.g)
        except (NonFiniteValue, SingularInterpolation) as e:
            log.warning(f"final certificate unavailable: {e}")
    log.info(f"finished with {status}: x={state.x.tolist()} theta={state.record.theta:.3e} "
             f"phi={state.record.phi:.6g} kkt={stat:.3e} evals={db.num_evals}")
    return RunResult(status=status, x_final=state.x.copy(), record_final=state.record,
                     kkt_stationarity=stat, kkt_complementarity=comp, chi_final=chi,
                     num_evals=db.num_evals, log=entries, filter_entries=list(filt.entries),
                     config=cfg, problem_name=problem.name, notes=list(notes or []))


def _iteration(problem: Problem, db: EvalDatabase, state: TrState, cfg: Config,
               entries: List[IterationLog]) -> Optional[str]:
    """Ein Durchlauf der Schritte 1-8; gibt einen Status zurück, wenn der Lauf endet."""
    rec = state.record
    x = state.x

    def record(kind: str, **kw) -> None:
        entry = IterationLog(k=state.k, kind=kind, x=x.copy(), theta=rec.theta, phi=rec.phi,
                             chi=kw.get("chi", state.chi), delta_bar=state.delta_bar,
                             delta=kw.get("delta", state.delta), rho=kw.get("rho"),
                             n_norm=kw.get("n_norm"), sigma=kw.get("sigma"),
                             evals_cumulative=db.num_evals, step_norm=kw.get("step_norm"),
                             lin_violation=kw.get("lin_violation"))
        entries.append(entry)
        log.debug(f"k={entry.k} {kind} theta={entry.theta:.3e} phi={entry.phi:.6g} chi={entry.chi:.3e} "
                  f"delta={entry.delta:.3e} rho={entry.rho} evals={entry.evals_cumulative}")

    # (1) Kompatibilität
    if state.n_step is None:
        state.n_step = normal_step(state.models)
    if state.n_step is None or not compatible(state.n_step, state.delta_bar, cfg):
        # (2) Restauration
        n_norm = None if state.n_step is None else float(np.linalg.norm(state.n_step))
        if rec.theta > 0:
            state.filter.add(rec.theta, rec.phi)
        else:
            log.warning("incompatible normal step at a feasible point; not added to the filter")
        state.delta = state.delta_bar
        state.chi = state.chi_bar = math.nan
        try:
            res = restoration(problem, db, x, state.filter, cfg, state.delta_bar, state.models)
        except RestorationFailed as e:
            log.info(f"restoration failed: {e}")
            record(RESTORATION, n_norm=n_norm)
            return RESTORATION_FAILED
        record(RESTORATION, n_norm=n_norm)
        state.x, state.record = res.record.x, res.record
        state.delta_bar, state.models, state.n_step = res.delta_bar, res.models, res.n_step
        state.tangential = None
        state.k += 1
        return stopping_check(entries, state, cfg)

    # (3) Tangentialschritt
    n_step = state.n_step
    try:
        tang = tangential_step(state.models, x, n_step)
    except NumericalFailure as e:
        log.warning(f"tangential LP failed ({e}); shrinking the radius")
        record(INACCEPTABLE, n_norm=float(np.linalg.norm(n_step)))
        _next_models(state, x, rec, cfg.gamma1 * state.delta_bar)
        state.k += 1
        return stopping_check(entries, state, cfg)
    state.tangential = tang
    state.chi_bar = tang.chi
    state.delta, state.chi = state.delta_bar, tang.chi

    # (4) Kritikalitätstest
    if criticality_test(rec.theta, tang.chi, state.delta_bar, cfg):
        out = criticality_routine(state, problem, db, cfg, single_pass=cfg.stop_after_crit_loop)
        state.models, state.n_step, state.tangential = out.models, out.n_step, out.tangential
        state.delta, state.chi = out.delta, out.chi
        n_step, tang = out.n_step, out.tangential
        if out.status is not None or cfg.stop_after_crit_loop:
            record(CRITLOOP, n_norm=float(np.linalg.norm(n_step)))
            return stopping_check(entries, state, cfg, crit_status=out.status or CONVERGED)

    # (5) Annahmetest
    models = state.models
    x_n = x + n_step
    sigma = 0.0
    lin = models.linearize()
    if tang.omega > 0.0 and np.linalg.norm(tang.d) > 0.0:
        sigma_bar = initial_steplength(n_step, tang.d, state.delta, lin.shifted(n_step))
        sigma = backtracking_stepsize(models, x_n, tang.d, sigma_bar, tang.omega, cfg)
        if cfg.model_linesearch:
            sigma_max = sigma_bar / float(np.linalg.norm(tang.d))
            sigma = model_linesearch(models, x_n, tang.d, sigma_max, sigma, tang.omega, cfg)
    step = n_step + sigma * tang.d
    steps = dict(step_norm=float(np.linalg.norm(step)), lin_violation=lin.violation(step))
    trial_x = x_n + sigma * tang.d
    trial = db.evaluate(problem, trial_x)

    phi_m_k, phi_m_trial = models.phi(x), models.phi(trial_x)
    decrease_ok = model_decrease_test(phi_m_k, phi_m_trial, rec.theta, cfg)
    try:
        rho = ratio_rho(rec, trial, phi_m_k, phi_m_trial)
    except ZeroModelDecrease:
        rho = None
    acceptable = state.filter.augmented_acceptable(rec.theta, rec.phi, trial.theta, trial.phi)
    n_norm = float(np.linalg.norm(n_step))

    if not acceptable or (decrease_ok and (rho is None or rho < cfg.nu1)):
        record(INACCEPTABLE, rho=rho, n_norm=n_norm, sigma=sigma, **steps)
        _next_models(state, x, rec, shrink_radius(state.delta, rho, cfg, steps["step_norm"]))
        state.k += 1
        return stopping_check(entries, state, cfg)

    # (6) Filtertest
    if not decrease_ok:
        if rec.theta > 0:
            state.filter.add(rec.theta, rec.phi)
        else:
            log.warning("theta-iteration at a feasible point; not added to the filter")
        kind = THETA_ITERATION
    else:
        kind = SUCCESSFUL
    record(kind, rho=rho, n_norm=n_norm, sigma=sigma, **steps)

    # (7) + (8)
    _next_models(state, trial.x, trial, radius_update(state.delta, rho, cfg, steps["step_norm"]))
    state.k += 1
    return stopping_check(entries, state, cfg, previous=rec)


def _next_models(state: TrState, x: np.ndarray, rec: EvalRecord, delta_bar: float) -> None:
    state.x, state.record = x, rec
    state.delta_bar = delta_bar
    state.models = state.models.builder.build(x, state.delta_bar)
    state.n_step = None
    state.tangential = None


def weighted_sum_baseline(problem: Problem, weights, x0, cfg: Optional[Config] = None,
                          notes: Optional[List[str]] = None) -> RunResult:
    return solve(weighted_sum_problem(problem, weights), x0, cfg, notes=notes)
