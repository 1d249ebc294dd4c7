import numpy as np
import pytest

from epshock.errors import DomainError
from epshock.matcher import finite_difference_slopes, forward_solve
from epshock.ode import dense_eval, dense_quadrature
from epshock.sensitivity import coefficients, pressure_sensitivity, sign_ledger

T_S = [0.05, 0.125, 0.2, 0.3, 0.4]


@pytest.fixture(scope="module")
def solved(certified):
    cfg = certified
    return cfg, {t: forward_solve(cfg, t, sensitivity=True) for t in T_S}


def rel(a, b):
    return abs(a - b) / abs(b)


def test_initial_value_signs(solved):
    _, sols = solved
    for sol in sols.values():
        ic = sol.sensitivity_ic
        assert ic.dM2_dt > 0.0
        assert ic.X0 < 0.0 and ic.Y0 < 0.0 and ic.dkappa_dts > 0.0
        assert ic.Y0 == sol.jump.upstream.rho - sol.jump.downstream.rho


def test_initial_value_linear_in_mach_slope(solved):
    cfg, sols = solved
    gam = cfg.gamma
    for sol in sols.values():
        j, ic = sol.jump, sol.sensitivity_ic
        coef = (-2 * gam**2 * j.kappa0 / (gam + 1) ** 2 * j.upstream.rho**gam
                / j.downstream.u**2 * (j.M2_minus - 1) / j.M2_minus)
        assert ic.X0 == pytest.approx(coef * ic.dM2_dt, rel=1e-14)


def test_initial_value_matches_fd(solved):
    cfg, sols = solved
    t_s = 0.2
    h = cfg.fd_step * cfg.T
    t_bar = t_s + 2 * h
    plus = forward_solve(cfg, t_s + h).downstream.dense_state(t_bar).rho
    minus = forward_solve(cfg, t_s - h).downstream.dense_state(t_bar).rho
    fd = (plus - minus) / (2 * h)
    sens = sols[t_s].sensitivity
    X_bar = dense_eval(sens.trajectory, t_bar)[0]
    assert rel(X_bar, fd) < 1e-4
    assert rel(sens.X_initial, fd) < 1e-4


def test_exit_sensitivity_matches_fd(solved):
    cfg, sols = solved
    for t_s, sol in sols.items():
        fd = finite_difference_slopes(cfg, t_s)
        assert rel(sol.sensitivity.X[-1], fd.drho_dts) < 1e-3
        assert rel(pressure_sensitivity(sol.downstream, sol.sensitivity), fd.dp_dts) < 1e-3


def test_sign_ledger(solved):
    _, sols = solved
    for sol in sols.values():
        ledger = sign_ledger(sol.sensitivity_ic, sol.sensitivity, sol.pressure_terms)
        assert ledger["all"], ledger
        terms = sol.pressure_terms
        assert -terms.G_kappa * terms.dkappa_dts < 0.0
        assert np.all(sol.sensitivity.Y <= sol.sensitivity.Y_initial)


def test_two_routes_for_bernoulli_derivative(solved):
    _, sols = solved
    for sol in sols.values():
        assert sol.pressure_terms.cross_check <= 1e-6
        assert sol.pressure_terms.dp_dts == pytest.approx(sol.pressure_terms.dp_dts_direct,
                                                          rel=1e-6)


def test_field_sensitivity_integral_identity(solved):
    cfg, sols = solved
    geom = cfg.geometry
    for t_s, sol in sols.items():
        sens = sol.sensitivity
        integral = dense_quadrature(sens.trajectory, lambda t, y: geom.hat_t(t) * y[0])
        Y_T = (geom.hat_t(t_s) * sens.Y_initial + integral) / geom.hat_t(cfg.T)
        assert Y_T == pytest.approx(sens.Y[-1], rel=1e-8)


def test_profile_fields(solved):
    _, sols = solved
    sens = sols[0.2].sensitivity
    assert sens.t_s == 0.2
    assert sens.t[0] == 0.2 and sens.t[-1] == 0.5
    assert sens.samples[0] == (0.2, sens.X_initial, sens.Y_initial)


def test_coefficient_guard(solved):
    _, sols = solved
    down = sols[0.2].downstream
    a1, a2, a3 = coefficients(0.3, down)
    assert a1 > 0.0 and a2 < 0.0
    with pytest.raises(DomainError):
        coefficients(0.3, down, sonic_guard=1.0)
