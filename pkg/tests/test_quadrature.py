import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evaluators.quadrature import (
    AmplitudeIntegrator, amplitude, amplitude_derivative, amplitude_series, gauss_jacobi,
    oracle_amplitude, tanh_sinh,
)
from model.kinematics import Kinematics
from model.mdd import make_toy_mdd
from tests.conftest import A0_TOY
from utils.config import QuadratureConfig
from utils.errors import ConvergenceFailure, DomainError


def test_amplitude_at_zero_is_normalization(toy0):
    a = amplitude(toy0, Kinematics(0.0, 1.0), 0.0)
    assert abs(a.value - 1.0) <= 1e-10
    assert a.tau == 0.0


def test_derivative_at_zero_is_mean_energy(toy0):
    da = amplitude_derivative(toy0, Kinematics(0.0, 1.0), 0.0)
    assert da.value.real == 0.0
    assert -da.value.imag == pytest.approx(A0_TOY, rel=1e-10)


def test_derivative_at_zero_is_imaginary_when_moving(toy1):
    da = amplitude_derivative(toy1, Kinematics(3.0, 1.0), 0.0)
    assert da.value.real == 0.0
    assert -da.value.imag > np.hypot(3.0, 1.0)


def test_long_time_modulus(toy0):
    a = amplitude(toy0, Kinematics(0.0, 1.0), 100.0)
    assert a.modulus == pytest.approx(0.02, rel=1e-2)


def test_oracle_at_zero(toy2):
    assert abs(oracle_amplitude(toy2, Kinematics(2.0, 1.0), 0.0).value - 1.0) <= 1e-12


def test_baseline_matches_oracle_in_cancellation_regime(toy2):
    kin = Kinematics(4.0, 1.0)
    base = amplitude(toy2, kin, 60.0)
    oracle = oracle_amplitude(toy2, kin, 60.0)
    assert abs(base.value - oracle.value) <= 1e-11
    # the amplitude itself is far above that error
    assert base.modulus > 1e-5


@pytest.mark.parametrize("alpha, rho, tau", [(0.0, 1.0, 3.0), (1.0, 2.0, 20.0), (0.5, 4.0, 75.0),
                                             (2.0, 5.0, 150.0)])
def test_xi_and_eta_forms_agree(alpha, rho, tau):
    mdd = make_toy_mdd(alpha, 1.0)
    kin = Kinematics(rho, 1.0)
    xi_form = amplitude(mdd, kin, tau, QuadratureConfig(form="xi"))
    eta_form = amplitude(mdd, kin, tau, QuadratureConfig(form="eta"))
    combined = xi_form.abs_error_estimate + eta_form.abs_error_estimate
    assert abs(xi_form.value - eta_form.value) <= combined


@pytest.mark.parametrize("tau", [0.5, 10.0, 120.0])
def test_endpoint_rules_agree(toy_half, tau):
    kin = Kinematics(1.5, 1.0)
    jacobi = amplitude(toy_half, kin, tau, QuadratureConfig(endpoint_rule="jacobi-weighted"))
    tanh = amplitude(toy_half, kin, tau, QuadratureConfig(endpoint_rule="tanh-sinh"))
    assert abs(jacobi.value - tanh.value) <= 1e-11


@given(st.floats(min_value=0.0, max_value=60.0), st.floats(min_value=0.0, max_value=5.0))
@settings(max_examples=15, deadline=None)
def test_conjugate_symmetry(tau, rho):
    mdd = make_toy_mdd(1.0, 1.0)
    integrator = AmplitudeIntegrator()
    forward, _ = integrator.integrate(mdd, Kinematics(rho, 1.0), tau)
    backward, _ = integrator.integrate(mdd, Kinematics(rho, 1.0), -tau)
    assert abs(backward - forward.conjugate()) <= 1e-14


@given(st.floats(min_value=0.0, max_value=200.0), st.floats(min_value=0.0, max_value=5.0),
       st.sampled_from([0.0, 0.5, 1.0, 2.0]))
@settings(max_examples=15, deadline=None)
def test_modulus_bounded_by_one(tau, rho, alpha):
    a = amplitude(make_toy_mdd(alpha, 1.0), Kinematics(rho, 1.0), tau)
    assert a.modulus <= 1.0 + a.abs_error_estimate


@pytest.mark.parametrize("tau", [1.0, 5.0, 20.0])
def test_derivative_matches_central_difference(toy1, oracle_cfg, tau):
    kin = Kinematics(2.0, 1.0)
    h = 1e-4
    da = amplitude_derivative(toy1, kin, tau).value
    fd = (amplitude(toy1, kin, tau + h, oracle_cfg).value
          - amplitude(toy1, kin, tau - h, oracle_cfg).value) / (2 * h)
    assert abs(da - fd) / abs(da) <= 1e-6


def test_derivative_rejects_divergent_first_moment(breit_wigner):
    with pytest.raises(DomainError):
        amplitude_derivative(breit_wigner, Kinematics(1.0, 0.5), 1.0)


def test_breit_wigner_amplitude_at_zero(breit_wigner):
    a = amplitude(breit_wigner, Kinematics(0.0, 0.5), 0.0)
    assert abs(a.value - 1.0) <= 1e-10


def test_breit_wigner_amplitude_matches_oracle(breit_wigner):
    kin = Kinematics(1.0, 0.5)
    base = amplitude(breit_wigner, kin, 5.0)
    oracle = oracle_amplitude(breit_wigner, kin, 5.0)
    assert abs(base.value - oracle.value) <= 1e-9
    assert base.modulus <= 1.0


def test_negative_tau_rejected(toy0):
    with pytest.raises(DomainError):
        amplitude(toy0, Kinematics(0.0, 1.0), -1.0)


def test_mismatched_kinematics_rejected(toy0):
    with pytest.raises(DomainError):
        amplitude(toy0, Kinematics(0.0, 2.0), 1.0)


def test_series_singleton_matches_single_call(toy0):
    kin = Kinematics(1.0, 1.0)
    (a, da), = amplitude_series(toy0, kin, [7.5])
    assert a == amplitude(toy0, kin, 7.5)
    assert da == amplitude_derivative(toy0, kin, 7.5)


def test_series_matches_independent_calls_in_any_order(toy0):
    kin = Kinematics(0.0, 1.0)
    grid = np.linspace(0.0, 30.0, 100)
    series = amplitude_series(toy0, kin, grid, with_derivative=False)
    for k in reversed(range(grid.size)):
        assert series[k][0] == amplitude(toy0, kin, float(grid[k]))
        assert series[k][1] is None


def test_series_independent_of_thread_count(toy1):
    kin = Kinematics(2.0, 1.0)
    grid = np.linspace(0.0, 40.0, 17)
    single = amplitude_series(toy1, kin, grid, threads=1)
    pooled = amplitude_series(toy1, kin, grid, threads=4)
    assert single == pooled


def test_series_skips_derivative_without_first_moment(breit_wigner):
    series = amplitude_series(breit_wigner, Kinematics(0.0, 0.5), [0.0, 1.0])
    assert all(da is None for _, da in series)


@pytest.mark.parametrize("grid", [[1.0, 0.5], [0.0, 0.0], [-1.0, 1.0], []])
def test_series_rejects_bad_grid(toy0, grid):
    with pytest.raises(DomainError):
        amplitude_series(toy0, Kinematics(0.0, 1.0), grid)


def test_panel_budget_exhaustion_carries_index(toy0):
    with pytest.raises(ConvergenceFailure) as excinfo:
        amplitude_series(toy0, Kinematics(0.0, 1.0), [100.0], QuadratureConfig(max_panels=5))
    assert excinfo.value.index == 0
    assert excinfo.value.error_estimate > 0


def test_single_amplitude_budget_exhaustion(toy0):
    with pytest.raises(ConvergenceFailure):
        amplitude(toy0, Kinematics(0.0, 1.0), 100.0, QuadratureConfig(max_panels=5))


def test_quadrature_rules_integrate_polynomials():
    x, w = gauss_jacobi(10, 0.5)
    # int_{-1}^{1} (1 + x)^0.5 dx = 2^1.5 / 1.5
    assert w.sum() == pytest.approx(2 ** 1.5 / 1.5, rel=1e-13)
    s, ws = tanh_sinh(1.0 / 16.0)
    assert ws.sum() == pytest.approx(1.0, rel=1e-12)
    assert float(ws @ s) == pytest.approx(0.5, rel=1e-12)
