from __future__ import annotations
from dataclasses import dataclass, field
import logging
from typing import Iterator, List, Tuple

from .errors import FeasiblePointRejected

log = logging.getLogger(__name__)

GAMMA_THETA = 1e-4


@dataclass
class FilterSet:
    """
    Filter aus Paaren (theta_j, phi_j) mit Hülle gamma_theta.
    Zulässige Punkte (theta == 0) werden nie aufgenommen.
    """
    gamma_theta: float = GAMMA_THETA
    entries: List[Tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 < self.gamma_theta < 1.0:
            raise ValueError(f"gamma_theta must lie in (0, 1), got {self.gamma_theta}")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Tuple[float, float]]:
        return iter(self.entries)

    def _beats(self, theta: float, phi: float, theta_j: float, phi_j: float) -> bool:
        g = self.gamma_theta
        return theta <= (1.0 - g) * theta_j or phi <= phi_j - g * theta_j

    def acceptable(self, theta: float, phi: float) -> bool:
        if theta < 0:
            raise ValueError(f"theta must be >= 0, got {theta}")
        return all(self._beats(theta, phi, tj, pj) for tj, pj in self.entries)

    def augmented_acceptable(self, theta_k: float, phi_k: float, theta: float, phi: float) -> bool:
        """Akzeptanz gegen F plus das temporäre Paar (theta_k, phi_k); F bleibt unverändert."""
        return self.acceptable(theta, phi) and self._beats(theta, phi, theta_k, phi_k)

    def dominated_by(self, theta: float, phi: float, theta_j: float, phi_j: float) -> bool:
        """Wird (theta_j, phi_j) durch (theta, phi) entfernt?"""
        g = self.gamma_theta
        return theta_j >= theta and phi_j - g * theta_j >= phi - g * theta

    def add(self, theta: float, phi: float) -> "FilterSet":
        if theta == 0.0:
            raise FeasiblePointRejected(f"feasible pair (0, {phi}) offered to the filter")
        if theta < 0:
            raise ValueError(f"theta must be >= 0, got {theta}")
        # ein schon überdecktes Paar ändert den verbotenen Bereich nicht
        for tj, pj in self.entries:
            if self.dominated_by(tj, pj, theta, phi):
                log.warning(f"filter pair ({theta:.3e}, {phi:.6g}) is covered by ({tj:.3e}, {pj:.6g}); not inserted")
                return self
        kept = [(tj, pj) for tj, pj in self.entries if not self.dominated_by(theta, phi, tj, pj)]
        removed = len(self.entries) - len(kept)
        kept.append((float(theta), float(phi)))
        self.entries = kept
        log.debug(f"filter add ({theta:.3e}, {phi:.6g}); removed {removed}, size {len(self.entries)}")
        return self

    def violations(self) -> List[Tuple[int, int]]:
        """Alle Indexpaare (i, j), i != j, bei denen j von i hüllendominiert ist."""
        out = []
        for i, (ti, pi) in enumerate(self.entries):
            for j, (tj, pj) in enumerate(self.entries):
                if i != j and self.dominated_by(ti, pi, tj, pj):
                    out.append((i, j))
        return out
