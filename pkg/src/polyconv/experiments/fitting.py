"""Power-law slope fits used to check decay rates empirically."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import InsufficientPoints, NonpositiveDistance


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit of log rho = log C + slope * log n.

    ``constant`` is the empirical max_n rho_n * n^nominal_beta, the smallest C
    with rho_n <= C * n^(-nominal_beta) on the sweep.
    """

    slope: float
    constant: float
    r_squared: float
    nominal_beta: float
    points: tuple = field(default=())

    def curve(self, n) -> np.ndarray:
        return self.constant * np.asarray(n, dtype=float) ** (-self.nominal_beta)

    def within(self, target: float, tol: float) -> bool:
        return abs(self.slope - target) <= tol

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "constant": self.constant,
            "r_squared": self.r_squared,
            "nominal_beta": self.nominal_beta,
            "points": [[float(x), float(y)] for x, y in self.points],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RateFit":
        return cls(d["slope"], d["constant"], d["r_squared"], d["nominal_beta"],
                   tuple((x, y) for x, y in d["points"]))


def rate_fit(points: Sequence[tuple[float, float]], nominal_beta: float) -> RateFit:
    pts = [(float(n), float(r)) for n, r in points]
    if len(pts) < 3:
        raise InsufficientPoints(f"need >= 3 points for a rate fit, got {len(pts)}")
    n = np.array([p[0] for p in pts])
    r = np.array([p[1] for p in pts])
    if np.any(r <= 0) or np.any(n <= 0):
        raise NonpositiveDistance("rate fits need positive abscissae and distances")
    if len(np.unique(n)) < 2:
        raise InsufficientPoints("rate fits need at least two distinct abscissae")
    x, y = np.log(n), np.log(r)
    slope, icept = np.polyfit(x, y, 1)
    resid = y - (icept + slope * x)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float((resid**2).sum()) / ss_tot)
    constant = float(np.max(r * n**nominal_beta))
    return RateFit(float(slope), constant, min(r2, 1.0), float(nominal_beta), tuple(pts))
