from .config import Config, RunConfig
from .driver import RunResult, solve, weighted_sum_baseline
from .errors import MofilterError
from .filter import FilterSet
from .problem import EvalDatabase, Problem, get_problem, mw3, two_parabolas, weighted_sum_problem

__version__ = "0.1.0"

__all__ = [
    "Config", "RunConfig", "RunResult", "solve", "weighted_sum_baseline", "MofilterError",
    "FilterSet", "EvalDatabase", "Problem", "get_problem", "mw3", "two_parabolas", "weighted_sum_problem",
]
