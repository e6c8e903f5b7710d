"""
Survival amplitude A(tau) = int_{xi0}^inf Omega(xi) exp(-i eta(xi) tau) d xi and its
time derivative, evaluated on phase-bounded Gauss-Legendre panels.

Each panel is integrated with orders n and 2n; the difference is the panel error
estimate and panels above their share of the target are bisected. For non-integer
alpha the panel touching the endpoint carries the weight (xi - xi0)**alpha, either
through a Gauss-Jacobi rule or a tanh-sinh map. The integral can be taken over xi
or over eta (dxi = eta / xi deta); both forms must agree.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_jacobi
from tqdm import tqdm

from model.kinematics import Kinematics
from model.mdd import MassDistribution
from utils import const
from utils.config import QuadratureConfig
from utils.errors import ConvergenceFailure, DomainError

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class AmplitudeValue:
    value: complex
    abs_error_estimate: float
    tau: float

    @property
    def modulus(self) -> float:
        return abs(self.value)


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


@lru_cache(maxsize=None)
def gauss_jacobi(order: int, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1] for the weight (1 + x)**alpha."""
    x, w = roots_jacobi(order, 0.0, alpha)
    return np.asarray(x, dtype=float), np.asarray(w, dtype=float)


@lru_cache(maxsize=None)
def tanh_sinh(step: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Fractions s in (0, 1] and weights such that int_0^1 f(s) ds ~ sum w f(s).
    s = (1 + tanh(pi/2 sinh t)) / 2 is formed without cancellation near 0.
    """
    n = int(round(const.TANH_SINH_T_MAX / step))
    t = step * np.arange(-n, n + 1)
    u = 0.5 * np.pi * np.sinh(t)
    s = 1.0 / (1.0 + np.exp(-2.0 * u))
    w = step * 0.25 * np.pi * np.cosh(t) / np.cosh(u) ** 2
    return s, w


@dataclass(frozen=True)
class _Form:
    start: float
    stop: float
    # panels are graded so that width <= left edge - grade_origin
    grade_origin: float
    breakpoints: Tuple[float, ...]
    # integrand at the integration variable
    full: Callable[[np.ndarray], np.ndarray]
    # integrand divided by d**alpha at distance d from the endpoint
    endpoint: Callable[[np.ndarray], np.ndarray]


def _panel_edges(form: _Form, width: float) -> np.ndarray:
    edges = [form.start]
    left = form.start
    while left < form.stop:
        step = min(width, left - form.grade_origin)
        if step >= width:
            break
        left = min(left + step, form.stop)
        edges.append(left)
    if left < form.stop:
        count = max(1, math.ceil((form.stop - left) / width))
        edges.extend(np.linspace(left, form.stop, count + 1)[1:])
    inner = [b for b in form.breakpoints if form.start < b < form.stop]
    return np.unique(np.concatenate([np.asarray(edges, dtype=float), inner]))


def _apply_rule(func, a: np.ndarray, b: np.ndarray, x: np.ndarray, w: np.ndarray):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    values = func(mid[:, None] + half[:, None] * x[None, :])
    return (values @ w) * half, (np.abs(values) @ w) * half


def _fsum(values: Sequence[complex]) -> complex:
    values = np.asarray(values, dtype=complex)
    return complex(math.fsum(values.real), math.fsum(values.imag))


class AmplitudeIntegrator:
    """
    Computes int Omega(xi) eta(xi)**power exp(-i eta(xi) tau) dxi to a controlled
    absolute error. power = 0 gives the amplitude, power = 1 the derivative up to
    a factor -i, tau = 0 the moments of eta.
    """

    def __init__(self, config: Optional[QuadratureConfig] = None):
        self.config = config or QuadratureConfig()

    def _form(self, mdd: MassDistribution, kin: Kinematics, tau: float, power: int) -> Tuple[_Form, float]:
        upper = mdd.upper_limit(self.config.truncation_tail_bound)
        xi0 = mdd.xi0
        alpha = mdd.alpha

        if self.config.form == "xi":
            def full(xi):
                eta = kin.energy(xi)
                return mdd.density(xi) * eta ** power * np.exp(-1j * tau * eta)

            def endpoint(d):
                xi = xi0 + d
                eta = kin.energy(xi)
                return mdd.omega0(xi) * eta ** power * np.exp(-1j * tau * eta)

            # branch points of eta(xi) sit at +-i rho, no closer than |xi|
            return _Form(xi0, upper, 0.0, mdd.breakpoints, full, endpoint), upper

        eta0 = kin.eta0

        def full(eta):
            xi = kin.mass(eta)
            return mdd.density(xi) * (eta / xi) * eta ** power * np.exp(-1j * tau * eta)

        def endpoint(d):
            eta = eta0 + d
            xi = kin.mass(eta)
            # (xi - xi0) / (eta - eta0) = (eta + eta0) / (xi + xi0)
            ratio = (eta + eta0) / (xi + xi0)
            return mdd.omega0(xi) * ratio ** alpha * (eta / xi) * eta ** power * np.exp(-1j * tau * eta)

        stop = float(kin.energy(upper))
        breakpoints = tuple(float(kin.energy(b)) for b in mdd.breakpoints)
        # xi(eta) branches at eta = rho
        return _Form(eta0, stop, kin.rho, breakpoints, full, endpoint), upper

    def _endpoint_panel(self, form: _Form, alpha: float, h: float):
        results = []
        if self.config.endpoint_rule == "jacobi-weighted":
            for order in (self.config.panel_order, 2 * self.config.panel_order):
                x, w = gauss_jacobi(order, alpha)
                values = form.endpoint(0.5 * h * (x + 1.0))
                scale = (0.5 * h) ** (alpha + 1.0)
                results.append((complex(values @ w) * scale, float(np.abs(values) @ w) * scale))
        else:
            for step in const.TANH_SINH_STEPS:
                s, w = tanh_sinh(step)
                d = h * s
                values = d ** alpha * form.endpoint(d)
                results.append((complex(values @ w) * h, float(np.abs(values) @ w) * h))
        (low, _), (high, l1) = results
        return high, abs(high - low), l1

    def _tail(self, mdd: MassDistribution, kin: Kinematics, tau: float, power: int, upper: float):
        """Contribution beyond the panelled range and its error estimate."""
        if not mdd.heavy_tailed:
            if mdd.tail_mass is None:
                return 0j, 0.0
            return 0j, mdd.tail_mass(upper) * float(kin.energy(upper)) ** power

        if power >= mdd.tail_decay_exponent:
            raise DomainError(f"{mdd.name}: moment of order {power} diverges")
        start = float(kin.energy(upper))

        def g(eta):
            xi = float(kin.mass(eta))
            return float(mdd.density(xi)) * eta / xi * eta ** power

        epsabs = self.config.target_abs_error / 4.0
        if tau == 0:
            if power == 0:
                return complex(mdd.tail_mass(upper)), EPS
            value, err = quad(g, start, np.inf, epsabs=epsabs, limit=200)
            return complex(value), err
        cos_part, cos_err = quad(g, start, np.inf, weight="cos", wvar=abs(tau), epsabs=epsabs)
        sin_part, sin_err = quad(g, start, np.inf, weight="sin", wvar=abs(tau), epsabs=epsabs)
        return complex(cos_part, -math.copysign(1.0, tau) * sin_part), cos_err + sin_err

    def integrate(self, mdd: MassDistribution, kin: Kinematics, tau: float, power: int = 0) -> Tuple[complex, float]:
        if abs(kin.xi0 - mdd.xi0) > 1e-14 * mdd.xi0:
            raise DomainError(f"kinematics xi0 {kin.xi0} differs from density xi0 {mdd.xi0}")
        cfg = self.config
        form, upper = self._form(mdd, kin, tau, power)
        width = cfg.max_panel_width
        if tau != 0:
            # d eta / d xi <= 1, so the phase advances at most |tau| per unit length
            width = min(width, cfg.phase_per_panel / abs(tau))
        edges = _panel_edges(form, width)
        panels = edges.size - 1
        if panels > cfg.max_panels:
            raise ConvergenceFailure(
                f"{panels} panels needed at tau={tau:g}, budget is {cfg.max_panels}"
            )
        length = form.stop - form.start
        target = cfg.target_abs_error

        values: List[complex] = []
        errors: List[float] = []
        a, b = edges[:-1], edges[1:]

        if not mdd.has_integer_alpha:
            h = b[0] - a[0]
            a, b = a[1:], b[1:]
            while True:
                value, err, l1 = self._endpoint_panel(form, mdd.alpha, h)
                floor = const.ROUNDING_FACTOR * EPS * l1
                if err <= max(target * h / length, floor) or h <= 1e-12 * length:
                    break
                a = np.append(a, form.start + 0.5 * h)
                b = np.append(b, form.start + h)
                h *= 0.5
                panels += 1
                if panels > cfg.max_panels:
                    raise ConvergenceFailure("endpoint panel refinement exhausted the budget",
                                             value, err)
            values.append(value)
            errors.append(max(err, floor))

        low_rule = gauss_legendre(cfg.panel_order)
        high_rule = gauss_legendre(2 * cfg.panel_order)
        while a.size:
            low, _ = _apply_rule(form.full, a, b, *low_rule)
            high, l1 = _apply_rule(form.full, a, b, *high_rule)
            err = np.abs(high - low)
            floor = const.ROUNDING_FACTOR * EPS * l1
            share = target * (b - a) / length
            bad = (err > share) & (err > floor)
            values.extend(high[~bad])
            errors.extend(np.maximum(err, floor)[~bad])
            if not bad.any():
                break
            panels += int(bad.sum())
            if panels > cfg.max_panels:
                best = _fsum(values) + _fsum(high[bad])
                estimate = math.fsum(errors) + float(err[bad].sum())
                raise ConvergenceFailure(
                    f"panel budget {cfg.max_panels} exhausted at tau={tau:g} "
                    f"with error estimate {estimate:.3e}", best, estimate,
                )
            mid = 0.5 * (a[bad] + b[bad])
            a, b = np.concatenate([a[bad], mid]), np.concatenate([mid, b[bad]])

        tail_value, tail_err = self._tail(mdd, kin, tau, power, upper)
        total = _fsum(values) + tail_value
        estimate = math.fsum(errors) + tail_err
        logger.debug("tau=%g power=%d panels=%d estimate=%.2e", tau, power, panels, estimate)
        return total, estimate

    def moment(self, mdd: MassDistribution, kin: Kinematics, power: int) -> Tuple[float, float]:
        """int Omega(xi) eta(xi)**power dxi, non-oscillatory."""
        if power > mdd.moments_finite_through:
            raise DomainError(f"{mdd.name}: moment of order {power} diverges")
        value, err = self.integrate(mdd, kin, 0.0, power)
        return value.real, err


def _check_tau(tau: float) -> None:
    if not (math.isfinite(tau) and tau >= 0):
        raise DomainError(f"tau must be finite and >= 0, got {tau}")


def amplitude(mdd: MassDistribution, kin: Kinematics, tau: float,
              cfg: Optional[QuadratureConfig] = None) -> AmplitudeValue:
    _check_tau(tau)
    value, err = AmplitudeIntegrator(cfg).integrate(mdd, kin, tau, 0)
    return AmplitudeValue(value, err, tau)


def amplitude_derivative(mdd: MassDistribution, kin: Kinematics, tau: float,
                         cfg: Optional[QuadratureConfig] = None) -> AmplitudeValue:
    """dA/dtau = -i int eta Omega exp(-i eta tau) dxi."""
    _check_tau(tau)
    if mdd.moments_finite_through < 1:
        raise DomainError(f"{mdd.name}: first moment diverges, dA/dtau is undefined")
    value, err = AmplitudeIntegrator(cfg).integrate(mdd, kin, tau, 1)
    return AmplitudeValue(-1j * value, err, tau)


def oracle_amplitude(mdd: MassDistribution, kin: Kinematics, tau: float) -> AmplitudeValue:
    return amplitude(mdd, kin, tau, QuadratureConfig.oracle())


def oracle_amplitude_derivative(mdd: MassDistribution, kin: Kinematics, tau: float) -> AmplitudeValue:
    return amplitude_derivative(mdd, kin, tau, QuadratureConfig.oracle())


def check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise DomainError("empty time grid")
    if np.any(~np.isfinite(grid)) or np.any(grid < 0):
        raise DomainError("time grid must be finite and non-negative")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("time grid must be strictly increasing")
    return grid


def amplitude_series(mdd: MassDistribution, kin: Kinematics, grid,
                     cfg: Optional[QuadratureConfig] = None, with_derivative: bool = True,
                     threads: int = 1, progress: bool = False,
                     ) -> List[Tuple[AmplitudeValue, Optional[AmplitudeValue]]]:
    """
    Amplitude (and derivative) at every grid point. Points are independent, so
    the result does not depend on the thread count or the evaluation order.
    """
    grid = check_grid(grid)
    integrator = AmplitudeIntegrator(cfg)
    derivative = with_derivative and mdd.moments_finite_through >= 1

    def evaluate(item):
        index, tau = item
        tau = float(tau)
        try:
            a, a_err = integrator.integrate(mdd, kin, tau, 0)
            da = None
            if derivative:
                d, d_err = integrator.integrate(mdd, kin, tau, 1)
                da = AmplitudeValue(-1j * d, d_err, tau)
        except ConvergenceFailure as e:
            raise e.at_index(index) from e
        return AmplitudeValue(a, a_err, tau), da

    items = list(enumerate(grid))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(tqdm(pool.map(evaluate, items), total=len(items),
                                disable=not progress, desc=mdd.name, leave=False))
    else:
        results = [evaluate(item) for item in tqdm(items, disable=not progress,
                                                   desc=mdd.name, leave=False)]
    return results


if __name__ == "__main__":
    import json

    from model.mdd import make_toy_mdd

    toy = make_toy_mdd(0.0, 1.0)
    report = {}
    for rho in (0.0, 2.0):
        kin = Kinematics(rho, 1.0)
        for tau in (0.0, 1.0, 20.0, 100.0):
            base = amplitude(toy, kin, tau)
            oracle = oracle_amplitude(toy, kin, tau)
            report[f"rho={rho:g} tau={tau:g}"] = {
                "re": base.value.real,
                "im": base.value.imag,
                "abs_err": base.abs_error_estimate,
                "oracle_difference": abs(base.value - oracle.value),
            }

    with open("quadrature_report.json", "w") as f:
        json.dump(report, f, indent=4)
    print(json.dumps(report, indent=4))
