import numpy as np
import pytest

from mofilter.config import Config
from mofilter.problem import EvalDatabase, Problem, two_parabolas


class CountingProblem:
    """Hüllt ein Problem ein und zählt die Evaluatoraufrufe."""

    def __init__(self, problem: Problem):
        self.calls = 0
        inner = problem

        def f(x):
            self.calls += 1
            return inner.eval_f(x)

        self.problem = Problem(n=inner.n, num_obj=inner.num_obj, num_eq=inner.num_eq,
                               num_ineq=inner.num_ineq, eval_f=f, eval_h=inner.eval_h,
                               eval_g=inner.eval_g, name=inner.name)


def quadratic_k1(center=(1.0, -2.0)) -> Problem:
    c = np.asarray(center, dtype=float)
    return Problem(n=c.size, num_obj=1, eval_f=lambda x: [float(np.sum((x - c) ** 2))], name="quadratic")


@pytest.fixture
def ex1():
    return two_parabolas()


@pytest.fixture
def db():
    return EvalDatabase()


@pytest.fixture
def cfg():
    return Config()


@pytest.fixture
def counting_ex1():
    return CountingProblem(two_parabolas())
