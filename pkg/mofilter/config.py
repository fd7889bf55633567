from __future__ import annotations
from dataclasses import asdict, dataclass, field, fields, replace
import json
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .errors import ConfigError
from .surrogates import MODEL_KINDS, RBF_CUBIC

DEFAULT_OUTPUT_DIR = "runs"


@dataclass
class Config:
    """
    Alle Konstanten des Verfahrens. Voreinstellungen = Werte der Experimente
    plus die eigenen Festlegungen (Armijo, Grenzen, Restauration).
    """
    delta0: float = 0.5
    delta_max: float = 16.0
    gamma0: float = 0.1
    gamma1: float = 0.5
    gamma2: float = 2.0
    nu0: float = 0.9
    nu1: float = 0.01
    eps_chi: float = 0.1
    eps_theta: float = 0.1
    kappa_theta: float = 1e-4
    psi: float = 2.0
    B_crit: float = 1000.0
    M_crit: float = 3000.0
    alpha_crit: float = 0.5
    crit_max_iter: int = 60
    stop_after_crit_loop: bool = True
    c_delta: float = 0.7
    c_mu: float = 100.0
    mu: float = 0.01
    gamma_theta: float = 1e-4
    a_armijo: float = 1e-4
    b_armijo: float = 0.5
    max_backtracks: int = 50
    model_linesearch: bool = True
    linesearch_xtol: float = 1e-10
    max_iter: int = 100
    tol_rel_x: float = 1e-5
    tol_rel_f: float = 1e-5
    model_kind: str = RBF_CUBIC
    restoration_budget: int = 2000
    restoration_contraction: float = 0.5
    restoration_min_step: float = 1e-10
    rbf_c_search: float = 2.0
    rbf_theta_qr: float = 1e-3
    max_workers: int = 1

    def validate(self) -> "Config":
        checks = [
            (0 < self.delta0 <= self.delta_max < float("inf"), "0 < delta0 <= delta_max < inf"),
            (0 < self.gamma0 <= self.gamma1 < 1 <= self.gamma2, "0 < gamma0 <= gamma1 < 1 <= gamma2"),
            (0 < self.nu1 <= self.nu0 < 1, "0 < nu1 <= nu0 < 1"),
            (0 < self.eps_chi < 1, "0 < eps_chi < 1"),
            (self.eps_theta >= 0, "eps_theta >= 0"),
            (0 < self.kappa_theta < 1, "0 < kappa_theta < 1"),
            (0 < self.mu < 1, "0 < mu < 1"),
            (self.psi > 1.0 / (1.0 + self.mu), "psi > 1/(1+mu)"),
            (0 < self.B_crit < self.M_crit, "0 < B_crit < M_crit"),
            (0 < self.alpha_crit < 1, "0 < alpha_crit < 1"),
            (0 < self.c_delta <= 1, "0 < c_delta <= 1"),
            (self.c_mu > 0, "c_mu > 0"),
            (0 < self.gamma_theta < 1, "0 < gamma_theta < 1"),
            (0 < self.a_armijo < 1, "0 < a_armijo < 1"),
            (0 < self.b_armijo < 1, "0 < b_armijo < 1"),
            (self.max_backtracks >= 0, "max_backtracks >= 0"),
            (0 < self.linesearch_xtol < 1, "0 < linesearch_xtol < 1"),
            (self.max_iter >= 0, "max_iter >= 0"),
            (self.crit_max_iter >= 1, "crit_max_iter >= 1"),
            (self.tol_rel_x >= 0 and self.tol_rel_f >= 0, "tol_rel_x, tol_rel_f >= 0"),
            (self.model_kind in MODEL_KINDS, f"model_kind in {MODEL_KINDS}"),
            (self.restoration_budget >= 0, "restoration_budget >= 0"),
            (0 < self.restoration_contraction < 1, "0 < restoration_contraction < 1"),
            (self.restoration_min_step > 0, "restoration_min_step > 0"),
            (self.rbf_c_search >= 1, "rbf_c_search >= 1"),
            (0 < self.rbf_theta_qr < 1, "0 < rbf_theta_qr < 1"),
            (self.max_workers >= 1, "max_workers >= 1"),
        ]
        for ok, relation in checks:
            if not ok:
                raise ConfigError(f"invalid configuration: violates {relation}")
        return self

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]] = None) -> "Config":
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        return cls(**data).validate()

    def replace(self, **overrides) -> "Config":
        known = {f.name for f in fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        return replace(self, **overrides).validate()

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class RunConfig:
    """JSON-Laufbeschreibung für `mofilter run`."""
    problem: Union[str, Dict[str, Any]]
    x0: List[float]
    model_kind: str = RBF_CUBIC
    overrides: Dict[str, Any] = field(default_factory=dict)
    output_dir: str = DEFAULT_OUTPUT_DIR
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.problem, dict):
            unknown = sorted(set(self.problem) - {"name", "weights"})
            if unknown or "name" not in self.problem:
                raise ConfigError(f"inline problem needs 'name' (and optional 'weights'), got keys {sorted(self.problem)}")
        elif not isinstance(self.problem, str) or not self.problem:
            raise ConfigError("'problem' must be a problem name or an inline {name, weights} object")
        try:
            self.x0 = [float(v) for v in self.x0]
        except (TypeError, ValueError) as e:
            raise ConfigError(f"'x0' must be a list of numbers: {e}") from e
        if self.model_kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model_kind '{self.model_kind}', choose from {MODEL_KINDS}")
        env_dir = os.getenv("MOFILTER_OUTPUT_DIR")
        if env_dir:
            self.output_dir = env_dir

    @property
    def problem_name(self) -> str:
        return self.problem if isinstance(self.problem, str) else self.problem["name"]

    @property
    def weights(self) -> Optional[List[float]]:
        return None if isinstance(self.problem, str) else self.problem.get("weights")

    def solver_config(self) -> Config:
        return Config.from_dict({**self.overrides, "model_kind": self.model_kind})

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("run config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown run config keys: {unknown}")
        missing = [k for k in ("problem", "x0") if k not in data]
        if missing:
            raise ConfigError(f"run config is missing {missing}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path}: not valid JSON ({e})") from e
        return cls.from_dict(data)
