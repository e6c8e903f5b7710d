"""
Invariant suite: runs every property check of the laboratory and aggregates the
per-check reports into one JSON summary. A check never aborts the suite; numerical
failures are recorded against the check that raised them.
"""
import json
import logging
import math
from typing import Callable, Dict, List, Optional

import numpy as np

from evaluators.asymptotics import (
    long_time_model, long_time_survival, short_time_model, short_time_mass, short_time_rate,
    short_time_survival,
)
from evaluators.observables import decay_curve, survival_probability
from evaluators.profiler import RuntimeProfiler
from evaluators.quadrature import amplitude, amplitude_derivative, oracle_amplitude
from evaluators.scaling import fit_inverse_square, fit_power_law, survivals, verify_scaling
from model.kinematics import Kinematics
from model.mdd import MassDistribution, make_toy_mdd, validate
from utils import const
from utils.config import QuadratureConfig, VerifyConfig
from utils.errors import DecayLabError

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)


def _relative(value: float, reference: float) -> float:
    return abs(value - reference) / abs(reference)


class InvariantSuite:

    def __init__(self, config: Optional[VerifyConfig] = None, cfg: Optional[QuadratureConfig] = None,
                 threads: int = 1, user_mdd: Optional[MassDistribution] = None):
        self.config = config or VerifyConfig()
        self.cfg = cfg or QuadratureConfig()
        self.threads = threads
        self.user_mdd = user_mdd

    def check_normalization(self) -> Dict:
        tol = self.config.normalization_tol
        if self.user_mdd is not None:
            densities = [self.user_mdd]
        else:
            densities = [make_toy_mdd(alpha, xi0) for alpha in (0.0, 0.5, 1.0, 2.0)
                         for xi0 in (0.5, 1.0, 2.0)]
        reports = [validate(mdd, tol).to_dict() for mdd in densities]
        return {"passed": all(r["passed"] for r in reports), "tol": tol, "densities": reports}

    def check_amplitude_vs_oracle(self) -> Dict:
        """Baseline against the oracle on random draws, and the xi-form against the eta-form."""
        rng = np.random.default_rng(self.config.seed)
        cases = []
        eta_cfg = self.cfg.model_copy(update={"form": "eta" if self.cfg.form == "xi" else "xi"})
        for k in range(self.config.draws):
            alpha = float(rng.uniform(0.0, 2.0))
            xi0 = float(rng.uniform(0.5, 2.0))
            rho = float(rng.uniform(0.0, 5.0))
            tau = float(rng.uniform(0.0, 200.0))
            mdd = self.user_mdd or make_toy_mdd(alpha, xi0)
            kin = Kinematics.for_mdd(mdd, rho)
            base = amplitude(mdd, kin, tau, self.cfg)
            oracle = oracle_amplitude(mdd, kin, tau)
            case = {"alpha": mdd.alpha, "xi0": mdd.xi0, "rho": rho, "tau": tau,
                    "difference": abs(base.value - oracle.value),
                    "abs_error_estimate": base.abs_error_estimate}
            case["passed"] = case["difference"] <= self.config.oracle_agreement
            if k < 10:
                other = amplitude(mdd, kin, tau, eta_cfg)
                combined = base.abs_error_estimate + other.abs_error_estimate + 10 * EPS
                case["form_difference"] = abs(base.value - other.value)
                case["form_passed"] = case["form_difference"] <= combined
                case["passed"] = case["passed"] and case["form_passed"]
            cases.append(case)
        return {
            "passed": all(c["passed"] for c in cases),
            "max_difference": max(c["difference"] for c in cases),
            "cases": cases,
        }

    def check_derivative(self) -> Dict:
        mdd = self.user_mdd or make_toy_mdd(1.0, 1.0)
        if mdd.moments_finite_through < 1:
            return {"passed": True, "skipped": "first moment diverges"}
        kin = Kinematics.for_mdd(mdd, 2.0)
        oracle_cfg = QuadratureConfig.oracle()
        h = const.DERIVATIVE_STEP
        points = []
        for tau in (0.1, 1.0, 5.0, 20.0, 50.0):
            da = amplitude_derivative(mdd, kin, tau, self.cfg).value
            fd = (amplitude(mdd, kin, tau + h, oracle_cfg).value
                  - amplitude(mdd, kin, tau - h, oracle_cfg).value) / (2 * h)
            error = abs(da - fd) / abs(da)
            points.append({"tau": tau, "relative_error": error,
                           "passed": error <= self.config.derivative_rel_tol})
        return {"passed": all(p["passed"] for p in points), "points": points}

    def check_short_time_laws(self) -> Dict:
        mdd = make_toy_mdd(0.0, 1.0)
        tau = 1e-2
        results = []
        for rho in (0.0, 2.0):
            kin = Kinematics.for_mdd(mdd, rho)
            model = short_time_model(mdd, kin)
            curve = decay_curve(mdd, kin, [tau], self.cfg)
            survival = (1.0 - curve.survival[0]) / tau ** 2
            rate = curve.rate[0] / tau
            mass = (model.a0 - curve.mass[0]) / tau ** 2
            entry = {
                "rho": rho,
                "model": model.to_dict(),
                "survival_error": _relative(survival, model.pi0),
                "rate_error": _relative(rate, model.pi2),
                "mass_error": _relative(mass, model.pi1),
                "pi2_is_twice_pi0": model.pi2 == 2.0 * model.pi0,
                # the expansions themselves evaluated at the same time
                "expansion": {
                    "survival": short_time_survival(model, tau),
                    "mass": short_time_mass(model, tau),
                    "rate": short_time_rate(model, tau),
                },
                "mass_at_zero_above_eta0": model.a0 >= kin.eta0,
            }
            entry["passed"] = (
                entry["survival_error"] <= const.SHORT_TIME_REL_TOL
                and entry["rate_error"] <= const.SHORT_TIME_REL_TOL
                and entry["mass_error"] <= const.SHORT_TIME_MASS_REL_TOL
                and entry["pi2_is_twice_pi0"]
                and entry["mass_at_zero_above_eta0"]
            )
            results.append(entry)
        return {"passed": all(r["passed"] for r in results), "tau": tau, "results": results}

    def check_survival_exponent(self) -> Dict:
        window = self.config.long_time_window
        grid = np.geomspace(window[0], window[1], self.config.scaling.fit_points)
        fits = []
        for alpha in (0.0, 1.0, 2.0):
            mdd = make_toy_mdd(alpha, 1.0)
            for rho in (0.0, 2.0, 5.0):
                values = survivals(mdd, rho, grid, self.cfg, self.threads)
                fit = fit_power_law(list(zip(grid, values)), window)
                predicted = -2.0 * (1 + alpha)
                error = _relative(fit.slope, predicted)
                fits.append({"alpha": alpha, "rho": rho, "slope": fit.slope, "predicted": predicted,
                             "residual": fit.residual, "relative_error": error,
                             "passed": error <= self.config.slope_rel_tol})
        return {"passed": all(f["passed"] for f in fits), "window": window, "fits": fits}

    def check_asymptotic_convergence(self) -> Dict:
        """The quadrature survival approaches the long-time law as tau^-2."""
        window = self.config.long_time_window
        grid = np.geomspace(window[0], window[1], self.config.scaling.fit_points)
        fits = []
        for alpha in (0.0, 1.0, 2.0):
            mdd = make_toy_mdd(alpha, 1.0)
            for rho in (0.0, 1.0, 2.0, 3.0, 4.0, 5.0):
                model = long_time_model(mdd, Kinematics.for_mdd(mdd, rho))
                values = survivals(mdd, rho, grid, self.cfg, self.threads)
                deviation = [(t, abs(p / long_time_survival(model, t) - 1.0))
                             for t, p in zip(grid, values)]
                fit = fit_power_law(deviation, window)
                error = abs(fit.slope - const.ASYMPTOTIC_EXPONENT)
                fits.append({"alpha": alpha, "rho": rho, "exponent": fit.slope,
                             "residual": fit.residual,
                             "passed": error <= const.ASYMPTOTIC_EXPONENT_TOL})
        return {"passed": all(f["passed"] for f in fits), "window": window,
                "predicted": const.ASYMPTOTIC_EXPONENT, "fits": fits}

    def check_momentum_ratio(self) -> Dict:
        tau = self.config.long_time_window[1]
        points = []
        for alpha in (0.0, 1.0):
            mdd = make_toy_mdd(alpha, 1.0)
            rest = survivals(mdd, 0.0, [tau], self.cfg)[0]
            for rho in (1.0, 2.0, 3.0, 4.0):
                ratio = survivals(mdd, rho, [tau], self.cfg)[0] / rest
                predicted = long_time_model(mdd, Kinematics.for_mdd(mdd, rho)).chi_p ** (2 * (1 + alpha))
                error = _relative(ratio, predicted)
                points.append({"alpha": alpha, "rho": rho, "ratio": ratio, "predicted": predicted,
                               "relative_error": error,
                               "passed": error <= self.config.asymptote_rel_tol})
        return {"passed": all(p["passed"] for p in points), "tau": tau, "points": points}

    def check_scaling_law(self) -> Dict:
        mdd = make_toy_mdd(0.0, 1.0)
        reports = []
        for rho in (2.0, 3.0):
            report = verify_scaling(mdd, rho, cfg=self.cfg, scaling=self.config.scaling,
                                    threads=self.threads)
            entry = report.to_dict()
            entry.pop("ratio_curve")
            window_end = report.window[1]
            near_one = abs(report.ratio_at_window_end - 1.0) <= 0.01
            if abs(report.predicted_kappa_p) / window_end ** 2 < 0.01:
                entry["ratio_near_one"] = near_one
            else:
                entry["ratio_near_one"] = None
            entry["passed"] = report.kappa_passed and entry["ratio_near_one"] is not False
            reports.append(entry)
        return {"passed": all(r["passed"] for r in reports), "reports": reports}

    def check_mass_limit(self) -> Dict:
        window = self.config.long_time_window
        grid = np.geomspace(window[0], window[1], self.config.scaling.fit_points)
        results = []
        for alpha in (1.0, 2.0):
            mdd = make_toy_mdd(alpha, 1.0)
            for rho in (0.0, 2.0, 4.0):
                kin = Kinematics.for_mdd(mdd, rho)
                model = long_time_model(mdd, kin)
                at_100 = decay_curve(mdd, kin, [100.0], self.cfg).mass[0]
                curve = decay_curve(mdd, kin, grid, self.cfg, self.threads)
                fit = fit_inverse_square(list(zip(grid, curve.mass)), window,
                                         reference=model.m_p_inf, extra_terms=1)
                zeta_ok = abs(fit.coefficient - model.zeta_p) <= max(
                    self.config.zeta_rel_tol * abs(model.zeta_p), self.config.zeta_abs_floor)
                limit_error = _relative(at_100, model.m_p_inf)
                results.append({
                    "alpha": alpha, "rho": rho, "mass_at_100": at_100, "m_p_inf": model.m_p_inf,
                    "limit_error": limit_error, "fitted_zeta": fit.coefficient,
                    "predicted_zeta": model.zeta_p,
                    "passed": limit_error <= self.config.mass_limit_rel_tol and zeta_ok,
                })
        zeta_0 = long_time_model(make_toy_mdd(0.0, 1.0), Kinematics(0.0, 1.0)).zeta_0
        zeta_0_ok = abs(zeta_0 - 1.0) <= 1e-12
        return {
            "passed": all(r["passed"] for r in results) and zeta_0_ok,
            "zeta_0_alpha_0": zeta_0,
            "results": results,
        }

    def check_rate_law(self) -> Dict:
        tau = 100.0
        groups = []
        for alpha in (0.0, 1.0, 2.0):
            mdd = make_toy_mdd(alpha, 1.0)
            rates = []
            for rho in (0.0, 1.0, 2.0, 3.0, 4.0, 5.0):
                rates.append(decay_curve(mdd, Kinematics.for_mdd(mdd, rho), [tau], self.cfg).rate[0])
            rates = np.asarray(rates)
            predicted = 2.0 * (1 + alpha)
            errors = np.abs(rates * tau - predicted) / predicted
            spread = float((rates.max() - rates.min()) / rates.mean())
            groups.append({
                "alpha": alpha, "rate_times_tau": (rates * tau).tolist(), "predicted": predicted,
                "max_relative_error": float(errors.max()), "spread": spread,
                "passed": bool(errors.max() <= self.config.rate_rel_tol
                               and spread <= self.config.rate_spread_tol),
            })
        return {"passed": all(g["passed"] for g in groups), "tau": tau, "groups": groups}

    def check_chi_identity(self) -> Dict:
        worst = 0.0
        for xi0 in (0.5, 1.0, 2.0):
            mdd = make_toy_mdd(0.0, xi0)
            for rho in np.linspace(0.0, 5.0, 11):
                model = long_time_model(mdd, Kinematics.for_mdd(mdd, rho))
                worst = max(worst, abs(model.chi_p - model.m_p_inf / model.m_0_inf))
        return {"passed": worst <= EPS, "max_defect": worst}

    def checks(self) -> Dict[str, Callable[[], Dict]]:
        if self.user_mdd is not None:
            return {
                "normalization": self.check_normalization,
                "amplitude_vs_oracle": self.check_amplitude_vs_oracle,
                "derivative_check": self.check_derivative,
                "chi_identity": self.check_chi_identity,
            }
        return {
            "normalization": self.check_normalization,
            "amplitude_vs_oracle": self.check_amplitude_vs_oracle,
            "derivative_check": self.check_derivative,
            "short_time_laws": self.check_short_time_laws,
            "survival_exponent": self.check_survival_exponent,
            "asymptotic_convergence": self.check_asymptotic_convergence,
            "momentum_ratio": self.check_momentum_ratio,
            "scaling_law": self.check_scaling_law,
            "mass_limit": self.check_mass_limit,
            "rate_law": self.check_rate_law,
            "chi_identity": self.check_chi_identity,
        }

    def run_check(self, name: str, check: Callable[[], Dict]) -> Dict:
        try:
            result = {"success": True, **check()}
        except DecayLabError as e:
            logger.error("check %s failed to run: %s", name, e)
            result = {"success": False, "passed": False, "error": str(e),
                      "error_type": type(e).__name__}
        logger.info("check %s: %s", name, "pass" if result["passed"] else "FAIL")
        return result

    def evaluate(self, only: Optional[List[str]] = None) -> Dict:
        """Run the selected checks (all by default) and return the summary."""
        profiler = RuntimeProfiler()
        selected = {k: v for k, v in self.checks().items() if not only or k in only}

        def run_all():
            return {name: self.run_check(name, check) for name, check in selected.items()}

        results = profiler.profile(run_all)
        failed = [name for name, r in results.items() if not r["passed"]]
        return {
            "passed": not failed,
            "failed_checks": failed,
            "numerical_failure": any(not r["success"] for r in results.values()),
            "config": self.config.model_dump(mode="json"),
            "checks": results,
            "runtime": profiler.metrics,
        }


def _finite(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else str(value)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def summary_json(summary: Dict) -> Dict:
    return _finite(summary)


if __name__ == "__main__":
    from utils.logger import setup_logging

    setup_logging("INFO")
    suite = InvariantSuite()
    verify_summary = suite.evaluate()

    with open("verify_summary.json", "w") as f:
        json.dump(summary_json(verify_summary), f, indent=4)
