from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
import math
import threading
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .errors import NonFiniteValue

log = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], Sequence[float]]


def _no_values(x: np.ndarray) -> np.ndarray:
    return np.zeros(0)


@dataclass
class Problem:
    """
    Black-Box-Problem
    -----------------
      min f(x)  s.t.  h(x) = 0, g(x) <= 0

    f: R^n -> R^K, h: R^n -> R^M, g: R^n -> R^P.
    Die Evaluatoren müssen deterministisch sein (gleiche Eingabe, gleiche Bits).
    """
    n: int
    num_obj: int
    eval_f: Evaluator
    num_eq: int = 0
    num_ineq: int = 0
    eval_h: Evaluator = _no_values
    eval_g: Evaluator = _no_values
    name: str = "problem"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.num_obj < 1:
            raise ValueError(f"num_obj must be >= 1, got {self.num_obj}")
        if self.num_eq < 0 or self.num_ineq < 0:
            raise ValueError(f"constraint counts must be >= 0, got M={self.num_eq}, P={self.num_ineq}")


@dataclass(frozen=True)
class EvalRecord:
    x: np.ndarray
    f: np.ndarray
    h: np.ndarray
    g: np.ndarray
    theta: float
    phi: float


def infeasibility(h: Sequence[float], g: Sequence[float]) -> float:
    """theta = max{0, max|h_l|, max g_l}; leere Maxima zählen als 0."""
    theta = 0.0
    if len(h):
        theta = max(theta, float(np.max(np.abs(h))))
    if len(g):
        theta = max(theta, float(np.max(g)))
    return theta


def max_scalarization(f: Sequence[float]) -> float:
    if len(f) == 0:
        raise ValueError("max_scalarization needs at least one objective value")
    return float(np.max(f))


def _as_vector(values, expected: int, what: str, x: np.ndarray) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float)).ravel()
    if arr.shape[0] != expected:
        raise ValueError(f"{what} returned {arr.shape[0]} values, expected {expected}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{what} is not finite at x={x.tolist()}: {arr.tolist()}")
    return arr


class EvalDatabase:
    """
    Append-only Auswertungsdatenbank.
    Schlüssel ist die exakte Bitdarstellung des Punktes, d.h. kein Punkt wird zweimal ausgewertet.
    """

    def __init__(self):
        self.records: List[EvalRecord] = []
        self._index: Dict[bytes, int] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.records)

    @property
    def num_evals(self) -> int:
        return len(self.records)

    @staticmethod
    def _key(x: np.ndarray) -> bytes:
        return np.ascontiguousarray(x, dtype=float).tobytes()

    def lookup(self, x: np.ndarray) -> Optional[EvalRecord]:
        i = self._index.get(self._key(x))
        return None if i is None else self.records[i]

    def evaluate(self, problem: Problem, x) -> EvalRecord:
        return self.evaluate_many(problem, [x])[0]

    def evaluate_many(self, problem: Problem, points, max_workers: int = 1) -> List[EvalRecord]:
        """
        Wertet mehrere Punkte aus; nur unbekannte Punkte rufen die Evaluatoren auf.
        Mit max_workers > 1 laufen die Aufrufe parallel, angehängt wird in Eingabereihenfolge.
        """
        xs = [_check_point(problem, p) for p in points]
        todo: Dict[bytes, np.ndarray] = {}
        for x in xs:
            key = self._key(x)
            if key not in self._index and key not in todo:
                todo[key] = x

        if todo:
            pending = list(todo.values())
            if max_workers > 1 and len(pending) > 1:
                with ThreadPoolExecutor(max_workers=max_workers) as ex:
                    computed = list(ex.map(lambda p: _compute_record(problem, p), pending))
            else:
                computed = [_compute_record(problem, p) for p in pending]
            with self._lock:
                for rec in computed:
                    key = self._key(rec.x)
                    if key not in self._index:
                        self._index[key] = len(self.records)
                        self.records.append(rec)

        return [self.records[self._index[self._key(x)]] for x in xs]

    def points_within(self, center: np.ndarray, radius: float) -> List[EvalRecord]:
        """Alle Datensätze mit ||x - center||_2 <= radius, aufsteigend nach Abstand."""
        if not self.records:
            return []
        X = np.array([r.x for r in self.records])
        dist = np.linalg.norm(X - center, axis=1)
        order = np.argsort(dist, kind="stable")
        return [self.records[i] for i in order if dist[i] <= radius]


def _check_point(problem: Problem, x) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if arr.shape[0] != problem.n:
        raise ValueError(f"point has length {arr.shape[0]}, problem '{problem.name}' expects n={problem.n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"point must be finite, got {arr.tolist()}")
    return arr.copy()


def _compute_record(problem: Problem, x: np.ndarray) -> EvalRecord:
    f = _as_vector(problem.eval_f(x.copy()), problem.num_obj, "eval_f", x)
    h = _as_vector(problem.eval_h(x.copy()), problem.num_eq, "eval_h", x)
    g = _as_vector(problem.eval_g(x.copy()), problem.num_ineq, "eval_g", x)
    return EvalRecord(x=x, f=f, h=h, g=g, theta=infeasibility(h, g), phi=max_scalarization(f))


def evaluate(problem: Problem, db: EvalDatabase, x) -> EvalRecord:
    return db.evaluate(problem, x)


# ------------------------------- #
# Testprobleme
# ------------------------------- #
def two_parabolas() -> Problem:
    """Zwei verschobene Paraboloide, zulässig ist R^2 ohne das offene Einheitskreisinnere."""

    def f(x):
        return [(x[0] - 2.0) ** 2 + (x[1] - 1.0) ** 2,
                (x[0] - 2.0) ** 2 + (x[1] + 1.0) ** 2]

    def g(x):
        return [1.0 - x[0] ** 2 - x[1] ** 2]

    return Problem(n=2, num_obj=2, num_ineq=1, eval_f=f, eval_g=g, name="two_parabolas")


def mw3_distance(x) -> float:
    return (1.0
            + 2.0 * (x[1] + (x[0] - 0.5) ** 2 - 1.0) ** 2
            + 2.0 * (x[2] + (x[1] - 0.5) ** 2 - 1.0) ** 2)


def _mw3_objectives(x):
    f1 = x[0]
    d = mw3_distance(x)
    f2 = d * (1.0 - f1 / d)
    return f1, f2


def mw3() -> Problem:
    """
    MW3 mit n=3, K=2.
    g = [c1, c2, -x1, -x2, -x3, x1-1, x2-1, x3-1]; die Box 0 <= x <= 1 steckt als normale Ungleichungen in g.
    """

    def f(x):
        return list(_mw3_objectives(x))

    def g(x):
        f1, f2 = _mw3_objectives(x)
        l = math.sqrt(2.0) * (f2 - f1)
        s = math.sin(0.75 * math.pi * l)
        c1 = f1 + f2 - 1.05 - 0.45 * s ** 6
        c2 = -f1 - f2 + 0.85 + 0.3 * s ** 2
        return [c1, c2, -x[0], -x[1], -x[2], x[0] - 1.0, x[1] - 1.0, x[2] - 1.0]

    return Problem(n=3, num_obj=2, num_ineq=8, eval_f=f, eval_g=g, name="mw3")


def weighted_sum_problem(problem: Problem, weights) -> Problem:
    """K=1-Problem mit Zielfunktion w^T f und denselben Nebenbedingungen."""
    w = np.asarray(weights, dtype=float).ravel()
    if w.shape[0] != problem.num_obj:
        raise ValueError(f"expected {problem.num_obj} weights, got {w.shape[0]}")
    if np.any(w < 0) or not np.isclose(w.sum(), 1.0, rtol=0.0, atol=1e-12):
        raise ValueError(f"weights must be nonnegative and sum to 1, got {w.tolist()}")

    def f(x):
        return [float(w @ np.asarray(problem.eval_f(x), dtype=float))]

    return Problem(
        n=problem.n, num_obj=1, num_eq=problem.num_eq, num_ineq=problem.num_ineq,
        eval_f=f, eval_h=problem.eval_h, eval_g=problem.eval_g,
        name=f"{problem.name}-weighted",
    )


PROBLEMS: Dict[str, Callable[[], Problem]] = {
    "two_parabolas": two_parabolas,
    "mw3": mw3,
}


def get_problem(name: str) -> Problem:
    if name not in PROBLEMS:
        raise KeyError(f"unknown problem '{name}', choose from {sorted(PROBLEMS)}")
    return PROBLEMS[name]()
