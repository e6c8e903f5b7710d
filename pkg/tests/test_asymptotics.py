import cmath
import math

import numpy as np
import pytest

from evaluators.asymptotics import (
    AsymptoticAnalyzer, ShortTimeModel, asymptotic_mass, asymptotic_rate, effective_velocity,
    long_time_amplitude, long_time_model, long_time_survival, rest_survival, short_time_amplitude,
    short_time_mass, short_time_model, short_time_rate, short_time_survival,
    ultrarelativistic_mass, ultrarelativistic_survival,
)
from evaluators.observables import decay_curve
from evaluators.scaling import fit_inverse_square, fit_power_law, survivals
from model.kinematics import Kinematics
from model.mdd import make_toy_mdd
from tests.conftest import A0_TOY
from utils.errors import DomainError


def _model(pi0=0.5, a0=1.5, pi1=0.3):
    return ShortTimeModel(rho=0.0, a0=a0, a1=(pi0 + a0 * a0) / 2, a2=0.0, pi0=pi0, pi1=pi1,
                          pi2=2 * pi0, moment_error=0.0)


def test_short_time_moments_toy(toy0):
    model = short_time_model(toy0, Kinematics(0.0, 1.0))
    assert model.a0 == pytest.approx(A0_TOY, rel=1e-10)
    # (1/2) int 2e xi^3 exp(-xi^2) over [1, inf) = 1
    assert model.a1 == pytest.approx(1.0, rel=1e-10)
    assert model.pi2 == 2.0 * model.pi0
    assert model.pi0 > 0


@pytest.mark.parametrize("rho", [0.0, 2.0])
def test_short_time_constants_nonnegative_variance(toy1, rho):
    model = short_time_model(toy1, Kinematics(rho, 1.0))
    assert model.pi0 >= 0
    assert model.pi2 == 2.0 * model.pi0


def test_short_time_rejects_breit_wigner(breit_wigner):
    with pytest.raises(DomainError):
        short_time_model(breit_wigner, Kinematics(0.0, 0.5))


def test_short_time_forms_at_zero():
    model = _model()
    assert short_time_survival(model, 0.0) == 1.0
    assert short_time_mass(model, 0.0) == model.a0
    assert short_time_rate(model, 0.0) == 0.0
    assert short_time_amplitude(model, 0.0) == 1.0


def test_short_time_survival_arithmetic():
    assert short_time_survival(_model(pi0=0.5), 0.1) == pytest.approx(0.995, rel=1e-15)


def test_short_time_amplitude_modulus_matches_survival(toy0):
    model = short_time_model(toy0, Kinematics(0.0, 1.0))
    tau = 1e-3
    assert abs(short_time_amplitude(model, tau)) ** 2 == pytest.approx(
        short_time_survival(model, tau), abs=1e-11)


@pytest.mark.parametrize("rho", [0.0, 2.0])
def test_short_time_laws_against_quadrature(toy0, rho):
    kin = Kinematics(rho, 1.0)
    model = short_time_model(toy0, kin)
    tau = 1e-2
    curve = decay_curve(toy0, kin, [tau])
    assert abs(curve.survival[0] - short_time_survival(model, tau)) <= 1e-6
    assert (1 - curve.survival[0]) / tau ** 2 == pytest.approx(model.pi0, rel=1e-3)
    assert curve.rate[0] / tau == pytest.approx(model.pi2, rel=1e-3)
    assert (model.a0 - curve.mass[0]) / tau ** 2 == pytest.approx(model.pi1, rel=1e-2)


def test_long_time_model_at_rest(toy1):
    model = long_time_model(toy1, Kinematics(0.0, 1.0))
    assert model.chi_p == 1.0
    assert model.kappa_p == 0.0
    assert model.zeta_p == model.zeta_0
    assert model.m_p_inf == 1.0


def test_long_time_constants_toy_alpha_zero(toy0):
    model = long_time_model(toy0, Kinematics(1.0, 1.0))
    assert model.c0 == pytest.approx(2.0, rel=1e-14)
    assert model.chi_p == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert model.zeta_0 == pytest.approx(1.0, rel=1e-14)


def test_chi_and_asymptotic_mass(toy0):
    model = long_time_model(toy0, Kinematics(3.0, 1.0))
    assert model.chi_p == pytest.approx(math.sqrt(10.0), rel=1e-15)
    assert model.m_p_inf == pytest.approx(math.sqrt(10.0), rel=1e-15)
    assert model.chi_p == model.m_p_inf / model.m_0_inf


def test_kappa_closed_form(toy0):
    # alpha = 0, xi0 = 1, rho = 2: 1 * 2 * 4 * (-2 - (3 + 10) / 5)
    assert long_time_model(toy0, Kinematics(2.0, 1.0)).kappa_p == pytest.approx(-36.8, rel=1e-14)


def test_toy_alpha_two_has_flat_endpoint(toy2):
    model = long_time_model(toy2, Kinematics(0.0, 1.0))
    assert model.zeta_0 == pytest.approx(0.0, abs=1e-14)
    assert model.c0 == pytest.approx(8.0, rel=1e-14)


def test_chi_increasing_in_momentum(toy1):
    chis = [long_time_model(toy1, Kinematics(rho, 1.0)).chi_p for rho in np.linspace(0, 5, 11)]
    assert all(a < b for a, b in zip(chis, chis[1:]))
    assert chis[4] ** 2 == pytest.approx(1 + 2.0 ** 2, rel=1e-14)


def test_zeta_tends_to_ultrarelativistic_value(toy1):
    far = long_time_model(toy1, Kinematics(1e4, 1.0))
    assert far.zeta_p == pytest.approx(far.zeta_bar_p, rel=1e-6)


def test_long_time_amplitude_modulus(toy1):
    kin = Kinematics(2.0, 1.0)
    model = long_time_model(toy1, kin)
    for tau in (10.0, 77.0, 200.0):
        assert abs(long_time_amplitude(model, kin, tau)) ** 2 == pytest.approx(
            long_time_survival(model, tau), rel=1e-13)


def test_long_time_survival_rest_value(toy0):
    model = long_time_model(toy0, Kinematics(0.0, 1.0))
    assert long_time_survival(model, 100.0) == pytest.approx(4e-4, rel=1e-14)
    assert rest_survival(model, 100.0) == long_time_survival(model, 100.0)


def test_long_time_amplitude_matches_quadrature(toy1):
    from evaluators.quadrature import amplitude

    kin = Kinematics(2.0, 1.0)
    model = long_time_model(toy1, kin)
    tau = 200.0
    ratio = amplitude(toy1, kin, tau).value / long_time_amplitude(model, kin, tau)
    assert abs(ratio) == pytest.approx(1.0, rel=1e-2)
    # first correction is a phase of order 1 / tau
    assert abs(cmath.phase(ratio)) <= 0.05


def test_ultrarelativistic_limits(toy1):
    kin = Kinematics(1e4, 1.0)
    model = long_time_model(toy1, kin)
    assert ultrarelativistic_survival(model, 50.0) == pytest.approx(
        long_time_survival(model, 50.0), rel=1e-7)
    assert ultrarelativistic_mass(model, 50.0) == pytest.approx(asymptotic_mass(model, 50.0),
                                                                rel=1e-7)


def test_asymptotic_rate_and_mass(toy1):
    model = long_time_model(toy1, Kinematics(0.0, 1.0))
    assert asymptotic_rate(model, 100.0) == pytest.approx(0.04, rel=1e-15)
    assert asymptotic_mass(model, 10.0) == pytest.approx(1.0 + model.zeta_0 / 100.0, rel=1e-15)


def test_long_time_forms_reject_zero_time(toy1):
    model = long_time_model(toy1, Kinematics(0.0, 1.0))
    with pytest.raises(DomainError):
        long_time_survival(model, 0.0)


def test_effective_velocity():
    kin = Kinematics(2.0, 1.0)
    assert effective_velocity(kin) == pytest.approx(1.0 / math.sqrt(1.0 + 1.0 / 4.0), rel=1e-15)
    assert effective_velocity(Kinematics(0.0, 1.0)) == 0.0


@pytest.mark.slow
def test_mass_correction_coefficient(toy2):
    kin = Kinematics(4.0, 1.0)
    model = long_time_model(toy2, kin)
    grid = np.geomspace(50.0, 200.0, 16)
    curve = decay_curve(toy2, kin, grid)
    fit = fit_inverse_square(list(zip(grid, curve.mass)), reference=model.m_p_inf, extra_terms=1)
    assert fit.coefficient == pytest.approx(model.zeta_p, rel=0.10)


def test_analyzer_report(toy0):
    report = AsymptoticAnalyzer().analyze(toy0, [0.0, 1.0], short_time=True)
    assert set(report["momenta"]) == {"0", "1"}
    assert report["momenta"]["1"]["long_time"]["c0"] == pytest.approx(2.0)
    assert report["momenta"]["0"]["long_time"]["kappa_p"] == 0.0
    assert "short_time" in report["momenta"]["0"]


def test_analyzer_records_short_time_failure(breit_wigner):
    analyzer = AsymptoticAnalyzer()
    with pytest.raises(DomainError):
        analyzer.analyze(breit_wigner, [0.0], short_time=True)
    report = analyzer.safe_analyze(breit_wigner, [0.0])
    assert report["success"] is False
    assert "long_time" in report["momenta"]["0"]


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0])
@pytest.mark.parametrize("rho", [0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
def test_survival_approaches_long_time_law_as_inverse_square(alpha, rho):
    mdd = make_toy_mdd(alpha, 1.0)
    model = long_time_model(mdd, Kinematics(rho, 1.0))
    grid = np.geomspace(50.0, 200.0, 10)
    values = survivals(mdd, rho, grid)
    deviation = [(t, abs(p / long_time_survival(model, t) - 1.0)) for t, p in zip(grid, values)]
    fit = fit_power_law(deviation)
    assert fit.slope == pytest.approx(-2.0, abs=0.3)
