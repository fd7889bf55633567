from __future__ import annotations
from dataclasses import dataclass
import logging
import math
from typing import Callable, Dict, List

import numpy as np

from .config import Config
from .driver import backtracking_stepsize
from .filter import FilterSet
from .problem import EvalDatabase, two_parabolas
from .subproblems import (
    LinearizedSet, initial_steplength, kkt_residual, lp_tangential, omega_norm_ratio_probe,
)
from .surrogates import RBF_CUBIC, TAYLOR1, TAYLOR2, ModelBuilder, error_slope_probe

log = logging.getLogger(__name__)

DUALITY_GAP_TOL = 1e-8
STATIONARITY_TOL = 1e-8
SLOPE_MIN = 1.8
SLOPE_RADII = (0.5, 0.25, 0.125, 0.0625)


@dataclass
class ProbeResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


# ------------------------------- #
# Zufallsinstanzen
# ------------------------------- #
def random_tangential_instance(rng: np.random.Generator, critical: bool = False):
    """F, linearisierte Menge um x_n (h_n = 0, g_n <= 0), also d = 0 zulässig."""
    n = int(rng.integers(1, 7))
    K = int(rng.integers(2 if critical else 1, 5))
    m_total = int(rng.integers(0, 7))
    M = int(rng.integers(0, min(m_total, n - 1) + 1)) if n > 1 else 0
    P = m_total - M
    F = rng.standard_normal((K, n))
    if critical:
        F[1] = -F[0]
    lin = LinearizedSet(
        H=rng.standard_normal((M, n)), h0=np.zeros(M),
        G=rng.standard_normal((P, n)), g0=-rng.random(P) * (rng.random(P) < 0.7),
    )
    return F, lin


# ------------------------------- #
# Suiten
# ------------------------------- #
def probe_duality(seed: int = 0, count: int = 200) -> List[ProbeResult]:
    rng = np.random.default_rng(seed)
    worst_gap, worst_stat, critical = 0.0, 0.0, 0
    for i in range(count):
        F, lin = random_tangential_instance(rng, critical=(i % 4 == 3))
        sol = lp_tangential(F, lin)
        worst_gap = max(worst_gap, sol.duality_gap)
        if sol.omega <= 1e-10:
            critical += 1
            stat, _ = kkt_residual(F, lin.H, lin.G, lin.g0, sol)
            worst_stat = max(worst_stat, stat)
    return [
        ProbeResult("strong duality", worst_gap <= DUALITY_GAP_TOL,
                    f"max |primal - dual| = {worst_gap:.3e} over {count} LPs"),
        ProbeResult("multiplier stationarity", worst_stat <= STATIONARITY_TOL,
                    f"max residual = {worst_stat:.3e} over {critical} critical LPs"),
    ]


def probe_slopes(seed: int = 0) -> List[ProbeResult]:
    problem = two_parabolas()
    x = np.array([-2.0, 0.5])
    out = []
    for kind in (RBF_CUBIC, TAYLOR1):
        builder = ModelBuilder(problem, EvalDatabase(), kind=kind)
        for label, index in (("f1", 0), ("g", 2)):
            est = error_slope_probe(problem, builder, x, SLOPE_RADII, output=index, seed=seed)
            out.append(ProbeResult(f"{kind} {label} error slope", est.slope >= SLOPE_MIN,
                                   f"slope {est.slope:.3f}, errors {[f'{e:.2e}' for e in est.errors]}"))
    return out


def probe_filter(seed: int = 0, sequences: int = 1000, adds: int = 10) -> List[ProbeResult]:
    rng = np.random.default_rng(seed)
    dominated, self_acceptable, monotone = 0, 0, 0
    for _ in range(sequences):
        filt = FilterSet()
        probes = np.column_stack([rng.random(8) * 2.0, rng.standard_normal(8)])
        for _ in range(adds):
            theta = float(rng.random() * 2.0 + 1e-12)
            phi = float(rng.standard_normal())
            before = [filt.acceptable(t, p) for t, p in probes]
            filt.add(theta, phi)
            dominated += len(filt.violations())
            self_acceptable += filt.acceptable(theta, phi)
            after = [filt.acceptable(t, p) for t, p in probes]
            monotone += sum(1 for b, a in zip(before, after) if a and not b)
    total = sequences * adds
    return [
        ProbeResult("non-domination", dominated == 0, f"{dominated} dominated pairs after {total} adds"),
        ProbeResult("added pair unacceptable", self_acceptable == 0, f"{self_acceptable} of {total} acceptable"),
        ProbeResult("monotone acceptance", monotone == 0, f"{monotone} points turned acceptable"),
    ]


def probe_norms(seed: int = 0, count: int = 100) -> List[ProbeResult]:
    rng = np.random.default_rng(seed)
    bad = []
    lo_seen, hi_seen = math.inf, -math.inf
    for _ in range(count):
        F, lin = random_tangential_instance(rng)
        n = F.shape[1]
        ratio = omega_norm_ratio_probe(F, lin)
        lo_seen, hi_seen = min(lo_seen, ratio), max(hi_seen, ratio)
        if not (1.0 / math.sqrt(n) - 1e-9 <= ratio <= 1.0 + 1e-9):
            bad.append((n, ratio))
    return [ProbeResult("omega_2 / omega_inf in [1/sqrt(n), 1]", not bad,
                        f"range [{lo_seen:.4f}, {hi_seen:.4f}], {len(bad)} outside")]


def probe_armijo(seed: int = 0, count: int = 100, cfg: Config = None) -> List[ProbeResult]:
    cfg = cfg or Config()
    rng = np.random.default_rng(seed)
    problem = two_parabolas()
    builder = ModelBuilder(problem, EvalDatabase(), kind=TAYLOR2)
    failures, calls = 0, 0
    while calls < count:
        x = rng.uniform(-3.0, 3.0, size=2)
        delta = float(rng.uniform(0.05, 1.0))
        models = builder.build(x, delta)
        lin = LinearizedSet.unconstrained(problem.n)
        sol = lp_tangential(models.jac_f(x), lin)
        if sol.omega <= 1e-8:
            continue
        calls += 1
        n_step = np.zeros(problem.n)
        sigma_bar = initial_steplength(n_step, sol.d, delta, lin)
        sigma = backtracking_stepsize(models, x, sol.d, sigma_bar, sol.omega, cfg)
        decrease = models.phi(x) - models.phi(x + sigma * sol.d)
        ok = (sigma > 0.0 and decrease >= cfg.a_armijo * sigma * sol.omega
              and sigma * np.linalg.norm(sol.d) <= sigma_bar * (1.0 + 1e-12))
        failures += not ok
    return [ProbeResult("backtracking certificate", failures == 0, f"{failures} of {count} calls violate it")]


SUITES: Dict[str, Callable[..., List[ProbeResult]]] = {
    "duality": probe_duality,
    "slopes": probe_slopes,
    "filter": probe_filter,
    "norms": probe_norms,
    "armijo": probe_armijo,
}


def run_probe(suite: str, seed: int = 0) -> List[ProbeResult]:
    if suite not in SUITES:
        raise KeyError(f"unknown probe suite '{suite}', choose from {sorted(SUITES)}")
    results = SUITES[suite](seed=seed)
    for r in results:
        log.info(r.line())
    return results
