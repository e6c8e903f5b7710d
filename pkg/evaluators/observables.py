"""Survival probability, instantaneous mass and instantaneous decay rate."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from evaluators.quadrature import AmplitudeValue, amplitude_series, check_grid
from model.kinematics import Kinematics
from model.mdd import MassDistribution
from utils import const
from utils.config import QuadratureConfig
from utils.errors import ConvergenceFailure, DomainError, IllConditioned

logger = logging.getLogger(__name__)

# row flags
OK = ""
ILL_CONDITIONED = "ill-conditioned"
NO_FIRST_MOMENT = "no-first-moment"
NOT_CONVERGED = "not-converged"


def survival_probability(a: AmplitudeValue) -> float:
    return abs(a.value) ** 2


def survival_probability_error(a: AmplitudeValue) -> float:
    return 2.0 * abs(a.value) * a.abs_error_estimate


def _log_derivative(a: AmplitudeValue, da: AmplitudeValue) -> complex:
    modulus = abs(a.value)
    if not modulus > const.CONDITIONING_FACTOR * a.abs_error_estimate:
        raise IllConditioned(a.tau, modulus, a.abs_error_estimate)
    return da.value / a.value


def instantaneous_mass(a: AmplitudeValue, da: AmplitudeValue) -> float:
    """M = -Im(dA/A), in units of m_s."""
    return -_log_derivative(a, da).imag


def instantaneous_rate(a: AmplitudeValue, da: AmplitudeValue) -> float:
    """Gamma = -2 Re(dA/A), in units of m_s."""
    return -2.0 * _log_derivative(a, da).real


@dataclass
class DecayCurve:
    name: str
    rho: float
    grid: np.ndarray
    survival: np.ndarray
    mass: np.ndarray
    rate: np.ndarray
    amplitude: List[AmplitudeValue]
    derivative: List[Optional[AmplitudeValue]]
    condition: np.ndarray
    flags: List[str] = field(default_factory=list)

    @property
    def flagged(self) -> int:
        return sum(1 for f in self.flags if f)

    def to_rows(self, mass_scale: Optional[float] = None) -> List[tuple]:
        """Rows matching const.CURVE_HEADER; mass_scale converts to physical units."""
        scale = mass_scale or 1.0
        rows = []
        for k, tau in enumerate(self.grid):
            a = self.amplitude[k]
            rows.append((
                tau / scale, a.value.real, a.value.imag, a.abs_error_estimate,
                self.survival[k], self.mass[k] * scale, self.rate[k] * scale, self.flags[k],
            ))
        return rows

    def to_dict(self, mass_scale: Optional[float] = None) -> Dict:
        return {
            "mdd": self.name,
            "rho": self.rho,
            "flagged": self.flagged,
            "rows": [dict(zip(const.CURVE_HEADER, row)) for row in self.to_rows(mass_scale)],
        }


def _point(a: AmplitudeValue, da: Optional[AmplitudeValue]):
    if da is None:
        return math.nan, math.nan, NO_FIRST_MOMENT
    try:
        return instantaneous_mass(a, da), instantaneous_rate(a, da), OK
    except IllConditioned as e:
        logger.info("flagging point: %s", e)
        return math.nan, math.nan, ILL_CONDITIONED


def decay_curve(mdd: MassDistribution, kin: Kinematics, grid,
                cfg: Optional[QuadratureConfig] = None, threads: int = 1,
                on_failure: str = "raise", progress: bool = False) -> DecayCurve:
    """
    P, M and Gamma on a time grid. Points near amplitude zeros are flagged with
    NaN mass and rate. With on_failure="flag" a point whose quadrature does not
    converge keeps the best value reached and is flagged instead of aborting.
    """
    if on_failure not in ("raise", "flag"):
        raise DomainError(f"on_failure must be 'raise' or 'flag', got {on_failure!r}")
    grid = check_grid(grid)
    failed = set()
    try:
        series = amplitude_series(mdd, kin, grid, cfg, threads=threads, progress=progress)
    except ConvergenceFailure:
        if on_failure == "raise":
            raise
        series = []
        for k, tau in enumerate(grid):
            try:
                series.extend(amplitude_series(mdd, kin, [tau], cfg))
            except ConvergenceFailure as e:
                logger.warning("tau=%g did not converge: %s", tau, e)
                failed.add(k)
                series.append((AmplitudeValue(e.value, e.error_estimate, float(tau)), None))

    survival, mass, rate, flags = [], [], [], []
    for k, (a, da) in enumerate(series):
        m, g, flag = _point(a, da)
        if k in failed:
            m, g, flag = math.nan, math.nan, NOT_CONVERGED
        survival.append(survival_probability(a))
        mass.append(m)
        rate.append(g)
        flags.append(flag)

    return DecayCurve(
        name=mdd.name,
        rho=kin.rho,
        grid=grid,
        survival=np.asarray(survival),
        mass=np.asarray(mass),
        rate=np.asarray(rate),
        amplitude=[a for a, _ in series],
        derivative=[da for _, da in series],
        condition=np.asarray([abs(a.value) for a, _ in series]),
        flags=flags,
    )


if __name__ == "__main__":
    import json

    from model.mdd import make_toy_mdd

    toy = make_toy_mdd(1.0, 1.0)
    report = {}
    for rho in (0.0, 3.0, 5.0):
        curve = decay_curve(toy, Kinematics(rho, 1.0), [0.0, 1.0, 10.0, 100.0])
        report[f"rho={rho:g}"] = curve.to_dict()

    with open("observables_report.json", "w") as f:
        json.dump(report, f, indent=4)
    print(json.dumps(report, indent=4))
