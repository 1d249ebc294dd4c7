import math

import numpy as np
import pytest

from epshock.errors import DomainError, OutOfSpanError
from epshock.ode import (
    GuardPredicate,
    IvpProblem,
    ToleranceConfig,
    dense_eval,
    dense_quadrature,
    integrate,
)


def decay(t, y):
    return -y


def run(rhs, t0, t1, y0, rtol=1e-10, guards=()):
    return integrate(IvpProblem(rhs, t0, t1, y0, guards), ToleranceConfig(rtol=rtol, atol=1e-14))


def test_exponential_decay():
    tr = run(decay, 0.0, 1.0, [1.0])
    assert tr.completed
    assert tr.t[-1] == 1.0
    assert abs(tr.y[-1, 0] - math.exp(-1.0)) <= 1e-10
    assert tr.t[0] == 0.0 and tr.y[0, 0] == 1.0
    assert np.all(np.diff(tr.t) > 0.0)


def test_constant_solution_has_no_rejections():
    tr = run(lambda t, y: np.zeros_like(y), 0.0, 3.0, [2.0, -1.0])
    assert tr.completed
    assert tr.rejected == 0
    assert np.all(tr.y == np.array([2.0, -1.0]))


def test_quadratic_field_antiderivative():
    # (hat_t E)' = hat_t (rho - b) with rho, b constant and hat_t = r0 - t
    r0, rho, b, y0 = 2.0, 1.7, 1.2, 0.3
    tr = run(lambda t, y: [(r0 - t) * (rho - b)], 0.0, 1.5, [y0])
    exact = y0 + (rho - b) * (r0 * 1.5 - 1.5**2 / 2)
    assert abs(tr.y[-1, 0] - exact) <= 1e-10 * abs(exact)


def test_dense_eval_nodes_are_exact():
    tr = run(decay, 0.0, 2.0, [1.0])
    for i in (0, len(tr.t) // 2, -1):
        assert np.array_equal(dense_eval(tr, tr.t[i]), tr.y[i])


def test_dense_eval_midpoints():
    rtol = 1e-10
    tr = run(decay, 0.0, 2.0, [1.0], rtol=rtol)
    mids = 0.5 * (tr.t[:-1] + tr.t[1:])
    err = max(abs(dense_eval(tr, m)[0] - math.exp(-m)) for m in mids)
    assert err <= 10 * rtol


def test_dense_eval_out_of_span():
    tr = run(decay, 0.0, 1.0, [1.0])
    with pytest.raises(OutOfSpanError):
        dense_eval(tr, 1.0 + 1e-9)
    with pytest.raises(OutOfSpanError):
        dense_eval(tr, -1e-9)


def test_dense_interpolant_preserves_monotonicity():
    tr = run(decay, 0.0, 5.0, [1.0], rtol=1e-8)
    fine = np.linspace(0.0, 5.0, 4001)
    vals = np.array([dense_eval(tr, s)[0] for s in fine])
    assert np.all(np.diff(vals) < 0.0)
    assert np.max(np.abs(vals - np.exp(-fine))) < 1e-7


def test_convergence_with_rtol():
    """Error shrinks at least in proportion to rtol.

    Per halving the ratio scatters between about 1.7 and 2.5 because step
    counts are integers; the fitted slope and the mean factor are the
    stable quantities.
    """
    rtols = 1e-6 * 0.5 ** np.arange(14)
    errs = []
    for r in rtols:
        tr = run(decay, 0.0, 1.0, [1.0], rtol=r)
        errs.append(abs(tr.y[-1, 0] - math.exp(-1.0)))
    errs = np.array(errs)
    slope = np.polyfit(np.log(rtols), np.log(errs), 1)[0]
    assert slope >= 1.0
    ratios = errs[:-1] / errs[1:]
    assert np.exp(np.mean(np.log(ratios))) >= 2.0
    assert np.all(ratios >= 1.5)


def test_guard_localization():
    t_star = 0.6180339887
    g = GuardPredicate("cross", lambda t, y: t_star - t)
    tr = run(decay, 0.0, 1.0, [1.0], guards=[g])
    assert tr.status == "guard-fired" and tr.guard == "cross"
    assert abs(tr.t_stop - t_star) <= 1e-10
    assert tr.t[-1] == tr.t_stop
    assert tr.t_stop <= t_star


def test_guard_on_state():
    # y = e^{-t} crosses 0.5 at ln 2
    g = GuardPredicate("half", lambda t, y: y[0] - 0.5)
    tr = run(decay, 0.0, 2.0, [1.0], guards=[g])
    assert abs(tr.t_stop - math.log(2.0)) <= 1e-10


def test_warning_guard_does_not_stop():
    g = GuardPredicate("half", lambda t, y: y[0] - 0.5, kind="warning")
    tr = run(decay, 0.0, 2.0, [1.0], guards=[g])
    assert tr.completed
    assert len(tr.warnings) == 1
    assert abs(tr.warnings[0][1] - math.log(2.0)) < 1e-10


def test_guard_violated_at_start():
    g = GuardPredicate("neg", lambda t, y: -1.0)
    with pytest.raises(DomainError):
        run(decay, 0.0, 1.0, [1.0], guards=[g])


def test_step_failure_on_blowup():
    # y' = y^2, y(0)=1 blows up at t = 1
    tr = run(lambda t, y: y * y, 0.0, 2.0, [1.0])
    assert tr.status == "step-failure"
    assert tr.t[-1] < 1.0


def test_max_steps():
    tr = integrate(IvpProblem(decay, 0.0, 100.0, [1.0]), ToleranceConfig(max_steps=3))
    assert tr.status == "step-failure"


def test_rhs_domain_error_rejects_step():
    # rhs refuses to be evaluated for y < 0.2; the guard at 0.3 stops first
    def rhs(t, y):
        if y[0] < 0.2:
            raise DomainError("out of branch")
        return -y

    g = GuardPredicate("floor", lambda t, y: y[0] - 0.3)
    tr = run(rhs, 0.0, 5.0, [1.0], guards=[g])
    assert tr.guard == "floor"
    assert abs(tr.t_stop - math.log(1 / 0.3)) < 1e-10


def test_tolerance_validation():
    with pytest.raises(DomainError):
        ToleranceConfig(rtol=1e-2)
    with pytest.raises(DomainError):
        ToleranceConfig(atol=0.0)


def test_problem_validation():
    with pytest.raises(DomainError):
        IvpProblem(decay, 1.0, 1.0, [1.0])
    with pytest.raises(DomainError):
        IvpProblem(decay, 0.0, 1.0, [math.nan])
    assert IvpProblem(decay, 0.0, 1.0, [1.0, 2.0]).dimension == 2


def test_deterministic():
    a = run(lambda t, y: [y[1], -math.sin(y[0])], 0.0, 10.0, [1.0, 0.0])
    b = run(lambda t, y: [y[1], -math.sin(y[0])], 0.0, 10.0, [1.0, 0.0])
    assert a.t.tobytes() == b.t.tobytes() and a.y.tobytes() == b.y.tobytes()


def test_dense_quadrature():
    tr = run(decay, 0.0, 1.0, [1.0])
    v = dense_quadrature(tr, lambda t, y: y[0])
    assert abs(v - (1.0 - math.exp(-1.0))) < 1e-10
    assert dense_quadrature(tr, lambda t, y: y[0], 0.5, 0.5) == 0.0
    part = dense_quadrature(tr, lambda t, y: y[0], 0.25, 0.75)
    assert abs(part - (math.exp(-0.25) - math.exp(-0.75))) < 1e-10
