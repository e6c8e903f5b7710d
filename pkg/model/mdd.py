"""
Mass distribution densities in dimensionless form.

Every density is written as Omega(xi) = (xi - xi0)**alpha * Omega0(xi) on xi >= xi0,
with xi = m / m_s. The endpoint data (alpha, Omega0(xi0), Omega0'(xi0)) drive all
long-time asymptotics, the tail class and the number of finite moments drive the
short-time ones.
"""
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from scipy.special import gammaincc, gammainccinv, gammaln

from utils import const
from utils.errors import DomainError

logger = logging.getLogger(__name__)

ArrayFunc = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BreitWignerParams:
    m0: float
    gamma_bar: float
    xi0: float
    lambda_bw: float


@dataclass(frozen=True)
class MassDistribution:
    name: str
    xi0: float
    alpha: float
    density: ArrayFunc
    omega0_at_xi0: float
    omega0_prime_at_xi0: float
    tail_decay_exponent: float
    moments_finite_through: float
    # Omega0; when absent it is recovered as density / (xi - xi0)**alpha
    regular_part: Optional[ArrayFunc] = None
    # mass beyond X, used to place the truncation point
    tail_mass: Optional[Callable[[float], float]] = None
    support_end: float = math.inf
    breakpoints: Tuple[float, ...] = ()
    params: Dict[str, float] = field(default_factory=dict)

    def __call__(self, xi):
        return self.density(np.asarray(xi, dtype=float))

    @property
    def has_integer_alpha(self) -> bool:
        return abs(self.alpha - round(self.alpha)) < 1e-12

    @property
    def heavy_tailed(self) -> bool:
        return math.isinf(self.support_end) and math.isfinite(self.tail_decay_exponent)

    @property
    def omega0_ratio(self) -> float:
        """Omega0'(xi0) / Omega0(xi0)."""
        return self.omega0_prime_at_xi0 / self.omega0_at_xi0

    def omega0(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if self.regular_part is not None:
            return self.regular_part(xi)
        d = xi - self.xi0
        with np.errstate(divide="ignore", invalid="ignore"):
            value = self.density(xi) / d ** self.alpha
        return np.where(d > 0, value, self.omega0_at_xi0)

    def near_endpoint(self, distance) -> np.ndarray:
        """Omega(xi0 + d) evaluated from the distance d, free of cancellation in xi - xi0."""
        distance = np.asarray(distance, dtype=float)
        if self.regular_part is None:
            return self.density(self.xi0 + distance)
        return distance ** self.alpha * self.regular_part(self.xi0 + distance)

    def upper_limit(self, tail_bound: float) -> float:
        """
        Truncation point X of the support: the last table node for tabulated
        densities, the point where tail_mass(X) = tail_bound for super-polynomial
        tails, and a moderate cut for algebraic tails whose remainder is
        integrated separately.
        """
        if math.isfinite(self.support_end):
            return self.support_end
        if self.tail_mass is None:
            raise DomainError(f"{self.name}: unbounded support without a tail mass")
        if "toy_alpha" in self.params:
            return math.sqrt(self.xi0 ** 2 + float(gammainccinv(1.0 + self.alpha, tail_bound)))
        target = const.HEAVY_TAIL_CUT_MASS if self.heavy_tailed else tail_bound
        hi = self.xi0 + 1.0
        while self.tail_mass(hi) > target:
            hi = self.xi0 + 2.0 * (hi - self.xi0)
        if hi == self.xi0 + 1.0:
            return hi
        return brentq(lambda x: self.tail_mass(x) - target, self.xi0, hi, xtol=1e-12)

    def scaled(self, factor: float) -> "MassDistribution":
        """Same shape multiplied by a constant; used to probe the normalization check."""
        base = self

        def density(xi):
            return factor * base.density(xi)

        regular = None
        if base.regular_part is not None:
            def regular(xi):
                return factor * base.regular_part(xi)

        tail = None
        if base.tail_mass is not None:
            def tail(x):
                return factor * base.tail_mass(x)

        return MassDistribution(
            name=f"{base.name}*{factor:g}", xi0=base.xi0, alpha=base.alpha, density=density,
            omega0_at_xi0=factor * base.omega0_at_xi0,
            omega0_prime_at_xi0=factor * base.omega0_prime_at_xi0,
            tail_decay_exponent=base.tail_decay_exponent,
            moments_finite_through=base.moments_finite_through,
            regular_part=regular, tail_mass=tail, support_end=base.support_end,
            breakpoints=base.breakpoints, params=dict(base.params),
        )

    def describe(self) -> Dict:
        return {
            "name": self.name,
            "xi0": self.xi0,
            "alpha": self.alpha,
            "omega0_at_xi0": self.omega0_at_xi0,
            "omega0_prime_at_xi0": self.omega0_prime_at_xi0,
            "tail_decay_exponent": _json_number(self.tail_decay_exponent),
            "moments_finite_through": _json_number(self.moments_finite_through),
            "params": dict(self.params),
        }


def _json_number(value: float):
    return "inf" if math.isinf(value) else value


def _check_endpoint(alpha: float, xi0: float) -> None:
    if not (math.isfinite(alpha) and alpha >= 0):
        raise DomainError(f"alpha must be a finite real >= 0, got {alpha}")
    if not (math.isfinite(xi0) and xi0 > 0):
        raise DomainError(f"xi0 must be > 0, got {xi0}")


def make_toy_mdd(alpha: float, xi0: float) -> MassDistribution:
    """
    Omega(xi) = w_alpha xi (xi^2 - xi0^2)^alpha exp(-xi^2), w_alpha = 2 exp(xi0^2) / Gamma(1 + alpha).
    The exp(xi0^2) factor is folded into the exponential to stay finite for large xi0.
    """
    _check_endpoint(alpha, xi0)
    log_norm = math.log(2.0) - float(gammaln(1.0 + alpha))
    norm = math.exp(log_norm)

    def density(xi):
        xi = np.asarray(xi, dtype=float)
        d = np.clip(xi - xi0, 0.0, None)
        return norm * xi * (d * (xi + xi0)) ** alpha * np.exp(-d * (xi + xi0))

    def regular_part(xi):
        xi = np.asarray(xi, dtype=float)
        return norm * xi * (xi + xi0) ** alpha * np.exp(-(xi - xi0) * (xi + xi0))

    def tail_mass(x):
        return float(gammaincc(1.0 + alpha, max(x * x - xi0 * xi0, 0.0)))

    omega0 = norm * xi0 * (2.0 * xi0) ** alpha
    log_derivative = 1.0 / xi0 + alpha / (2.0 * xi0) - 2.0 * xi0
    return MassDistribution(
        name=f"toy(alpha={alpha:g}, xi0={xi0:g})",
        xi0=xi0,
        alpha=alpha,
        density=density,
        omega0_at_xi0=omega0,
        omega0_prime_at_xi0=omega0 * log_derivative,
        tail_decay_exponent=const.SUPER_POLYNOMIAL,
        moments_finite_through=math.inf,
        regular_part=regular_part,
        tail_mass=tail_mass,
        params={"toy_alpha": alpha, "w_alpha": math.exp(log_norm + xi0 * xi0)},
    )


def breit_wigner_params(m0: float, gamma_bar: float, xi0: float) -> BreitWignerParams:
    if not (gamma_bar > 0):
        raise DomainError(f"gamma_bar must be > 0, got {gamma_bar}")
    if not (xi0 > 0):
        raise DomainError(f"xi0 must be > 0, got {xi0}")
    lambda_bw = math.pi / (math.pi / 2.0 + math.atan(2.0 * (m0 - xi0) / gamma_bar))
    return BreitWignerParams(m0=m0, gamma_bar=gamma_bar, xi0=xi0, lambda_bw=lambda_bw)


def make_breit_wigner(m0: float, gamma_bar: float, xi0: float) -> MassDistribution:
    """Lorentzian line shape truncated below xi0 and renormalized by lambda_BW."""
    bw = breit_wigner_params(m0, gamma_bar, xi0)
    half_width_sq = gamma_bar * gamma_bar / 4.0
    amplitude = bw.lambda_bw * gamma_bar / (2.0 * math.pi)

    def density(xi):
        xi = np.asarray(xi, dtype=float)
        value = amplitude / ((xi - m0) ** 2 + half_width_sq)
        return np.where(xi >= xi0, value, 0.0)

    def regular_part(xi):
        xi = np.asarray(xi, dtype=float)
        return amplitude / ((xi - m0) ** 2 + half_width_sq)

    def tail_mass(x):
        return bw.lambda_bw / math.pi * (math.pi / 2.0 - math.atan(2.0 * (x - m0) / gamma_bar))

    omega0 = amplitude / ((xi0 - m0) ** 2 + half_width_sq)
    omega0_prime = -2.0 * (xi0 - m0) * omega0 / ((xi0 - m0) ** 2 + half_width_sq)
    return MassDistribution(
        name=f"breit-wigner(m0={m0:g}, gamma={gamma_bar:g}, xi0={xi0:g})",
        xi0=xi0,
        alpha=0.0,
        density=density,
        omega0_at_xi0=omega0,
        omega0_prime_at_xi0=omega0_prime,
        tail_decay_exponent=1.0,
        moments_finite_through=0,
        regular_part=regular_part,
        tail_mass=tail_mass,
        params=asdict(bw),
    )


def load_tabulated_mdd(table_path: str, metadata_path: Optional[str] = None) -> MassDistribution:
    """
    Density from a CSV table with header `xi,omega` and a JSON sidecar holding
    alpha, xi0, omega0_at_xi0, omega0_prime_at_xi0 and tail_decay_exponent.
    The sidecar defaults to the table path with a .json suffix. Values between
    nodes come from a monotone cubic (PCHIP) interpolant; the density is zero
    past the last node.
    """
    table_path = Path(table_path)
    meta_path = Path(metadata_path) if metadata_path else table_path.with_suffix(".json")
    with open(meta_path, "r") as f:
        meta = json.load(f)
    missing = {"alpha", "xi0", "omega0_at_xi0", "omega0_prime_at_xi0",
               "tail_decay_exponent"} - set(meta)
    if missing:
        raise DomainError(f"{meta_path}: missing metadata keys {sorted(missing)}")

    data = np.genfromtxt(table_path, delimiter=",", names=True, dtype=float)
    if data.dtype.names is None or set(data.dtype.names) != {"xi", "omega"}:
        raise DomainError(f"{table_path}: header must be 'xi,omega'")
    xi = np.atleast_1d(data["xi"])
    omega = np.atleast_1d(data["omega"])
    if xi.size < 2 or np.any(np.diff(xi) <= 0):
        raise DomainError(f"{table_path}: xi must be strictly increasing with >= 2 rows")

    try:
        alpha = float(meta["alpha"])
        xi0 = float(meta["xi0"])
        omega0_at_xi0 = float(meta["omega0_at_xi0"])
        omega0_prime_at_xi0 = float(meta["omega0_prime_at_xi0"])
        tail = meta["tail_decay_exponent"]
        tail = math.inf if tail in (None, "inf") else float(tail)
    except (TypeError, ValueError) as e:
        raise DomainError(f"{meta_path}: metadata values must be numbers: {e}") from e
    _check_endpoint(alpha, xi0)
    if not (math.isfinite(omega0_at_xi0) and omega0_at_xi0 > 0):
        raise DomainError(f"{meta_path}: omega0_at_xi0 must be finite and > 0, got {omega0_at_xi0}")
    if not math.isfinite(omega0_prime_at_xi0):
        raise DomainError(f"{meta_path}: omega0_prime_at_xi0 must be finite")
    if not tail > 0:
        raise DomainError(f"{meta_path}: tail_decay_exponent must be > 0 or 'inf', got {tail}")
    if not np.all(np.isfinite(omega)):
        raise DomainError(f"{table_path}: omega column has non-finite values")
    if abs(xi[0] - xi0) > 1e-12 * max(1.0, xi0):
        raise DomainError(f"{table_path}: first xi {xi[0]} does not match xi0 {xi0}")

    interpolant = PchipInterpolator(xi, omega, extrapolate=False)
    last = float(xi[-1])

    def density(x):
        x = np.asarray(x, dtype=float)
        value = interpolant(x)
        return np.where(np.isfinite(value), value, 0.0)

    logger.info("loaded %d table rows from %s", xi.size, table_path)
    return MassDistribution(
        name=f"tabulated({table_path.name})",
        xi0=xi0,
        alpha=alpha,
        density=density,
        omega0_at_xi0=omega0_at_xi0,
        omega0_prime_at_xi0=omega0_prime_at_xi0,
        tail_decay_exponent=tail,
        moments_finite_through=math.inf,
        support_end=last,
        breakpoints=tuple(float(v) for v in xi[1:-1]),
        params={"rows": int(xi.size)},
    )


@dataclass
class ValidationReport:
    name: str
    tol: float
    normalization: float
    normalization_defect: float
    normalization_error_estimate: float
    min_sampled_density: float
    negativity_defect: float
    endpoint_extrapolation: float
    endpoint_defect: float
    passed: bool
    failures: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return asdict(self)


def endpoint_extrapolation(mdd: MassDistribution, steps=const.ENDPOINT_STEPS) -> float:
    """
    Richardson-extrapolate Omega(xi0 + h) / h**alpha to h -> 0 from the steps
    h1 > h2 > h3 (ratio 10), assuming an error expansion c1 h + c2 h^2.
    """
    values = []
    for h in steps:
        # the step actually realized in floating point
        h_eff = (mdd.xi0 + h) - mdd.xi0
        values.append(float(mdd(mdd.xi0 + h_eff)) / h_eff ** mdd.alpha)
    q1, q2, q3 = values
    r = steps[0] / steps[1]
    first_12 = (r * q2 - q1) / (r - 1.0)
    first_23 = (r * q3 - q2) / (r - 1.0)
    return (r * r * first_23 - first_12) / (r * r - 1.0)


def validate(mdd: MassDistribution, tol: float) -> ValidationReport:
    """Check normalization, non-negativity and the declared endpoint law of a density."""
    if not tol > 0:
        raise DomainError(f"tol must be > 0, got {tol}")
    from evaluators.quadrature import AmplitudeIntegrator
    from model.kinematics import Kinematics
    from utils.config import QuadratureConfig

    failures = []
    integrator = AmplitudeIntegrator(QuadratureConfig(target_abs_error=min(tol, 1e-12) / 10.0))
    try:
        total, total_err = integrator.moment(mdd, Kinematics(0.0, mdd.xi0), 0)
    except Exception as e:
        logger.warning("normalization quadrature failed for %s: %s", mdd.name, e)
        total, total_err = math.nan, math.inf
        failures.append(f"normalization quadrature failed: {e}")
    norm_defect = abs(total - 1.0) if math.isfinite(total) else math.inf
    if not norm_defect < tol:
        failures.append(f"normalization defect {norm_defect:.3e} >= {tol:.1e}")

    stop = mdd.upper_limit(const.DEFAULT_TAIL_BOUND)
    samples = np.linspace(mdd.xi0, stop, const.NONNEGATIVITY_SAMPLES)
    min_density = float(np.min(mdd(samples)))
    negativity = max(0.0, -min_density)
    if not negativity < tol:
        failures.append(f"density negative down to {min_density:.3e}")

    extrapolated = endpoint_extrapolation(mdd)
    endpoint_defect = abs(extrapolated - mdd.omega0_at_xi0) / mdd.omega0_at_xi0
    if not endpoint_defect < tol:
        failures.append(
            f"endpoint law: Omega(xi0+h)/h^alpha -> {extrapolated:.12g}, "
            f"declared {mdd.omega0_at_xi0:.12g}"
        )

    return ValidationReport(
        name=mdd.name,
        tol=tol,
        normalization=total,
        normalization_defect=norm_defect,
        normalization_error_estimate=total_err,
        min_sampled_density=min_density,
        negativity_defect=negativity,
        endpoint_extrapolation=extrapolated,
        endpoint_defect=endpoint_defect,
        passed=not failures,
        failures=failures,
    )
