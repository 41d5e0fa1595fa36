"""Numerical tolerances shared by every module."""

from __future__ import annotations

import os
from dataclasses import dataclass

ENV_EPS = "SPANFORGE_EPS"


@dataclass(frozen=True)
class Tolerances:
    eps: float = 1e-9  # absolute residual threshold
    eps_feas: float = 1e-7  # feasibility decisions (INFEASIBLE, dual residuals)

    def as_dict(self) -> dict:
        return {"eps": self.eps, "eps_feas": self.eps_feas}


def default_tolerances() -> Tolerances:
    raw = os.environ.get(ENV_EPS)
    if raw is None:
        return Tolerances()
    return Tolerances(eps=float(raw))


TOL = default_tolerances()
