"""
Closed-form short-time and long-time behavior of the decay observables.

Short times: the amplitude is expanded in powers of tau using the first three
moments of eta under Omega. Long times: the endpoint xi0 dominates and every
constant follows from alpha, Omega0(xi0) and Omega0'(xi0).
"""
import cmath
import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, Optional

from scipy.special import gammaln

from evaluators.quadrature import AmplitudeIntegrator
from model.kinematics import Kinematics
from model.mdd import MassDistribution
from utils import const
from utils.config import QuadratureConfig
from utils.errors import DecayLabError, DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShortTimeModel:
    rho: float
    a0: float
    a1: float
    a2: float
    pi0: float
    pi1: float
    pi2: float
    moment_error: float

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class LongTimeModel:
    rho: float
    xi0: float
    alpha: float
    eta0: float
    c0: float
    chi_p: float
    m_p_inf: float
    m_0_inf: float
    zeta_p: float
    zeta_bar_p: float
    zeta_0: float
    kappa_p: float

    def to_dict(self) -> Dict:
        return asdict(self)


def short_time_model(mdd: MassDistribution, kin: Kinematics,
                     cfg: Optional[QuadratureConfig] = None) -> ShortTimeModel:
    """a0, a1, a2 from the moments <eta>, <eta^2>/2, <eta^3>/6."""
    if mdd.moments_finite_through < 3 or not mdd.tail_decay_exponent > 5:
        raise DomainError(
            f"{mdd.name}: short-time expansion needs three finite moments and a tail "
            f"decaying faster than xi^-6 (declared exponent {mdd.tail_decay_exponent})"
        )
    integrator = AmplitudeIntegrator(cfg or QuadratureConfig(target_abs_error=const.MOMENT_TOL))
    m1, e1 = integrator.moment(mdd, kin, 1)
    m2, e2 = integrator.moment(mdd, kin, 2)
    m3, e3 = integrator.moment(mdd, kin, 3)
    a0, a1, a2 = m1, m2 / 2.0, m3 / 6.0
    pi0 = 2.0 * a1 - a0 * a0
    return ShortTimeModel(
        rho=kin.rho,
        a0=a0,
        a1=a1,
        a2=a2,
        pi0=pi0,
        pi1=a0 ** 3 + 3.0 * (a2 - a0 * a1),
        pi2=2.0 * pi0,
        moment_error=e1 + e2 + e3,
    )


def short_time_amplitude(model: ShortTimeModel, tau: float) -> complex:
    return complex(1.0 - model.a1 * tau ** 2, -model.a0 * tau + model.a2 * tau ** 3)


def short_time_survival(model: ShortTimeModel, tau: float) -> float:
    return 1.0 - model.pi0 * tau * tau


def short_time_mass(model: ShortTimeModel, tau: float) -> float:
    return model.a0 - model.pi1 * tau * tau


def short_time_rate(model: ShortTimeModel, tau: float) -> float:
    return model.pi2 * tau


def long_time_model(mdd: MassDistribution, kin: Kinematics) -> LongTimeModel:
    alpha = mdd.alpha
    xi0 = mdd.xi0
    rho = kin.rho
    r = mdd.omega0_ratio
    m_p_inf = math.hypot(xi0, rho)
    chi_p = m_p_inf / xi0
    rho_sq = rho * rho
    kappa_p = (1 + alpha) * (2 + alpha) * rho_sq / xi0 ** 3 * (
        2.0 * r - (3 + alpha + (2.5 + alpha) * rho_sq / xi0 ** 2) / (xi0 * chi_p ** 2)
    )
    return LongTimeModel(
        rho=rho,
        xi0=xi0,
        alpha=alpha,
        eta0=kin.eta0,
        c0=math.exp(float(gammaln(1.0 + alpha))) * mdd.omega0_at_xi0,
        chi_p=chi_p,
        m_p_inf=m_p_inf,
        m_0_inf=xi0,
        zeta_p=(1 + alpha) / xi0 * ((1 + alpha / 2) / xi0 * rho_sq / (xi0 * xi0 + rho_sq) - r),
        zeta_bar_p=(1 + alpha) / xi0 * ((1 + alpha / 2) / xi0 - r),
        zeta_0=-(1 + alpha) * r / xi0,
        kappa_p=kappa_p,
    )


def _check_positive(tau: float) -> None:
    if not tau > 0:
        raise DomainError(f"long-time forms need tau > 0, got {tau}")


def long_time_amplitude(model: LongTimeModel, kin: Kinematics, tau: float) -> complex:
    """c0 exp(-i(pi(1+alpha)/2 + eta0 tau)) (chi_p/tau)^(1+alpha)."""
    _check_positive(tau)
    phase = math.pi * (1 + model.alpha) / 2 + kin.eta0 * tau
    return model.c0 * cmath.exp(-1j * phase) * (model.chi_p / tau) ** (1 + model.alpha)


def long_time_survival(model: LongTimeModel, tau: float) -> float:
    _check_positive(tau)
    return model.c0 ** 2 * (model.chi_p / tau) ** (2 * (1 + model.alpha))


def rest_survival(model: LongTimeModel, tau: float) -> float:
    _check_positive(tau)
    return model.c0 ** 2 * tau ** (-2 * (1 + model.alpha))


def ultrarelativistic_survival(model: LongTimeModel, tau: float) -> float:
    """rho >> xi0 form, where chi_p ~ rho / xi0."""
    _check_positive(tau)
    return model.c0 ** 2 * (model.rho / (model.xi0 * tau)) ** (2 * (1 + model.alpha))


def asymptotic_mass(model: LongTimeModel, tau: float) -> float:
    _check_positive(tau)
    return model.m_p_inf * (1.0 + model.zeta_p / tau ** 2)


def ultrarelativistic_mass(model: LongTimeModel, tau: float) -> float:
    _check_positive(tau)
    return model.rho * (1.0 + model.zeta_bar_p / tau ** 2)


def asymptotic_rate(model: LongTimeModel, tau: float) -> float:
    _check_positive(tau)
    return 2.0 * (1 + model.alpha) / tau


def effective_velocity(kin: Kinematics) -> float:
    """Velocity of the long-time particle of mass xi0: rho / eta0 = 1 / sqrt(1 + xi0^2 / rho^2)."""
    return kin.rho / kin.eta0


class AsymptoticAnalyzer:
    """Collects the closed-form constants of one density across momenta."""

    def __init__(self, cfg: Optional[QuadratureConfig] = None):
        self.cfg = cfg

    def analyze(self, mdd: MassDistribution, rhos: Iterable[float], short_time: bool = False) -> Dict:
        """
        Report keyed by momentum. When short_time is requested and the density
        has no short-time expansion, the DomainError propagates.
        """
        report = {"mdd": mdd.describe(), "momenta": {}}
        for rho in rhos:
            kin = Kinematics.for_mdd(mdd, rho)
            entry = {
                "long_time": long_time_model(mdd, kin).to_dict(),
                "effective_velocity": effective_velocity(kin),
            }
            if short_time:
                entry["short_time"] = short_time_model(mdd, kin, self.cfg).to_dict()
            report["momenta"][f"{rho:g}"] = entry
        return report

    def safe_analyze(self, mdd: MassDistribution, rhos: Iterable[float]) -> Dict:
        """Like analyze with short times, recording a failure instead of raising."""
        try:
            return {"success": True, **self.analyze(mdd, rhos, short_time=True)}
        except DecayLabError as e:
            logger.warning("short-time model unavailable for %s: %s", mdd.name, e)
            return {"success": False, "error": str(e), **self.analyze(mdd, rhos)}


if __name__ == "__main__":
    import json

    from model.mdd import make_breit_wigner, make_toy_mdd

    analyzer = AsymptoticAnalyzer()
    report = {
        "toy_alpha_0": analyzer.safe_analyze(make_toy_mdd(0.0, 1.0), [0.0, 1.0, 3.0]),
        "breit_wigner": analyzer.safe_analyze(make_breit_wigner(1.0, 0.2, 0.5), [0.0, 1.0]),
    }

    with open("asymptotics_report.json", "w") as f:
        json.dump(report, f, indent=4)
    print(json.dumps(report, indent=4))
