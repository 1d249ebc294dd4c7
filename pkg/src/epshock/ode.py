"""Adaptive Dormand-Prince 5(4) integrator with dense output and guards.

Guards are scalar functions of ``(t, y)`` that are positive on the admissible
side.  They are checked after every accepted step; a sign change is localized
by bisection on the step's dense interpolant.  A ``hard-stop`` guard truncates
the trajectory at the last admissible time; a ``warning`` guard is only
recorded.

A right-hand side signals an inadmissible argument (for instance a trial
stage that overshoots the sonic point) by raising
:class:`~epshock.errors.EPShockError` or returning non-finite values; the step
is then rejected and retried with a smaller size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, EPShockError, OutOfSpanError

# Dormand & Prince (1980) tableau; dense output coefficients after Hairer,
# Norsett & Wanner, "Solving ODE I", sec. II.6.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_REJECT_NONFINITE = 0.25
GUARD_REL_TOL = 1e-12

HARD_STOP = "hard-stop"
WARNING = "warning"


@dataclass(frozen=True)
class ToleranceConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_steps: int = 200_000
    first_step: float | None = None

    def __post_init__(self):
        if not (0.0 < self.rtol <= 1e-3):
            raise DomainError(f"rtol must lie in (0, 1e-3], got {self.rtol!r}")
        if not self.atol > 0.0:
            raise DomainError(f"atol must be positive, got {self.atol!r}")
        if self.max_steps < 1:
            raise DomainError("max_steps must be positive")


@dataclass(frozen=True)
class GuardPredicate:
    name: str
    test: Callable[[float, np.ndarray], float]
    kind: str = HARD_STOP

    def __post_init__(self):
        if self.kind not in (HARD_STOP, WARNING):
            raise DomainError(f"unknown guard kind {self.kind!r}")


@dataclass
class IvpProblem:
    rhs: Callable[[float, np.ndarray], Sequence[float]]
    t_start: float
    t_end: float
    y_start: Sequence[float]
    guards: Sequence[GuardPredicate] = ()

    def __post_init__(self):
        self.y_start = np.atleast_1d(np.asarray(self.y_start, dtype=float))
        if not self.t_end > self.t_start:
            raise DomainError("t_end must exceed t_start")
        if not np.all(np.isfinite(self.y_start)):
            raise DomainError("y_start must be finite")

    @property
    def dimension(self) -> int:
        return self.y_start.size


COMPLETED = "completed"
GUARD_FIRED = "guard-fired"
STEP_FAILURE = "step-failure"


@dataclass
class Trajectory:
    """Accepted samples plus the per-step interpolants between them."""

    t: np.ndarray
    y: np.ndarray
    status: str
    guard: str | None = None
    t_stop: float | None = None
    warnings: list = field(default_factory=list)
    accepted: int = 0
    rejected: int = 0
    nfev: int = 0
    message: str = ""
    _seg_t0: np.ndarray = field(default=None, repr=False)
    _seg_h: np.ndarray = field(default=None, repr=False)
    _seg_y0: np.ndarray = field(default=None, repr=False)
    _seg_q: np.ndarray = field(default=None, repr=False)

    @property
    def completed(self) -> bool:
        return self.status == COMPLETED

    @property
    def stats(self) -> dict:
        return {"accepted": self.accepted, "rejected": self.rejected, "nfev": self.nfev}

    def __call__(self, t: float) -> np.ndarray:
        return dense_eval(self, t)


def _rms(x):
    return math.sqrt(float(np.dot(x, x)) / x.size)


def _eval_rhs(rhs, t, y):
    try:
        f = np.asarray(rhs(t, y), dtype=float)
    except (EPShockError, ArithmeticError):
        return None
    if not np.all(np.isfinite(f)):
        return None
    return f


def _interp(y0, h, q, theta):
    return y0 + h * (q @ np.array([theta, theta**2, theta**3, theta**4]))


def _initial_step(rhs, t0, y0, f0, direction_span, tol):
    if tol.first_step is not None:
        return min(tol.first_step, direction_span)
    scale = tol.atol + np.abs(y0) * tol.rtol
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    f1 = _eval_rhs(rhs, t0 + h0, y0 + h0 * f0)
    if f1 is None:
        return h0 * 1e-3
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 5.0)
    return min(100.0 * h0, h1, direction_span)


def _localize(guard, t0, h, y0, q, theta_hi, span):
    """Bisect for the guard's zero in ``(0, theta_hi]``; return last admissible theta."""
    lo, hi = 0.0, theta_hi
    width = GUARD_REL_TOL * span / h
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if guard.test(t0 + mid * h, _interp(y0, h, q, mid)) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def integrate(problem: IvpProblem, tol: ToleranceConfig | None = None) -> Trajectory:
    """Integrate ``problem`` from ``t_start`` to ``t_end``.

    The returned trajectory always holds at least the initial sample.  Its
    ``status`` is ``completed``, ``guard-fired`` (with ``guard`` and
    ``t_stop`` set), or ``step-failure``.  No exception is raised for those
    outcomes; callers decide how to react.
    """
    tol = tol or ToleranceConfig()
    rhs = problem.rhs
    t0, t_end = float(problem.t_start), float(problem.t_end)
    span = t_end - t0
    y = problem.y_start.copy()
    hard = [g for g in problem.guards if g.kind == HARD_STOP]
    soft = [g for g in problem.guards if g.kind == WARNING]
    for g in hard:
        if not g.test(t0, y) > 0.0:
            raise DomainError(f"initial state violates guard {g.name!r}")
    soft_active = {g.name: g.test(t0, y) > 0.0 for g in soft}

    f = _eval_rhs(rhs, t0, y)
    if f is None:
        raise DomainError("right-hand side not evaluable at the initial state")
    nfev = 1

    ts, ys = [t0], [y.copy()]
    seg_t0, seg_h, seg_y0, seg_q = [], [], [], []
    warnings_log = []
    accepted = rejected = 0
    status, guard_name, t_stop, message = COMPLETED, None, None, ""

    h = _initial_step(rhs, t0, y, f, span, tol)
    nfev += 1
    h_min_rel = 16.0 * np.finfo(float).eps
    t = t0
    K = np.empty((7, y.size))

    while t < t_end:
        if accepted + rejected >= tol.max_steps:
            status, message = STEP_FAILURE, f"max_steps={tol.max_steps} exhausted"
            break
        if t + h >= t_end or t_end - (t + h) < 1e-13 * span:
            h = t_end - t
            last = True
        else:
            last = False
        if h <= h_min_rel * max(abs(t), span):
            status, message = STEP_FAILURE, f"step size underflow at t={t!r}"
            break

        K[0] = f
        ok = True
        for i in range(1, 7):
            yi = y + h * (np.asarray(_A[i]) @ K[:i])
            fi = _eval_rhs(rhs, t + _C[i] * h, yi)
            nfev += 1
            if fi is None:
                ok = False
                break
            K[i] = fi
        if not ok:
            rejected += 1
            h *= _REJECT_NONFINITE
            continue
        t_new = t_end if last else t + h
        y_new = y + h * (_B @ K)
        err_vec = h * (_E @ K)
        scale = tol.atol + tol.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(err_vec / scale)
        if not math.isfinite(err) or err > 1.0:
            rejected += 1
            factor = _REJECT_NONFINITE if not math.isfinite(err) else max(
                _MIN_FACTOR, _SAFETY * err ** -0.2
            )
            h *= factor
            continue

        q = K.T @ _P
        accepted += 1

        fired = None
        theta_fire = 1.0
        for g in hard:
            if not g.test(t_new, y_new) > 0.0:
                th = _localize(g, t, h, y, q, 1.0, span)
                if fired is None or th < theta_fire:
                    fired, theta_fire = g, th
        for g in soft:
            now = g.test(t_new, y_new) > 0.0
            if soft_active[g.name] and not now:
                th = _localize(g, t, h, y, q, 1.0, span)
                warnings_log.append((g.name, t + th * h))
            soft_active[g.name] = now

        seg_t0.append(t)
        seg_h.append(h)
        seg_y0.append(y.copy())
        seg_q.append(q.copy())

        if fired is not None:
            t_stop = t + theta_fire * h
            ts.append(t_stop)
            ys.append(_interp(y, h, q, theta_fire))
            status, guard_name = GUARD_FIRED, fired.name
            message = f"guard {fired.name!r} fired at t={t_stop!r}"
            break

        ts.append(t_new)
        ys.append(y_new.copy())
        t, y = t_new, y_new
        f = K[6].copy()
        factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, _SAFETY * err ** -0.2)
        h *= factor

    traj = Trajectory(
        t=np.array(ts),
        y=np.array(ys),
        status=status,
        guard=guard_name,
        t_stop=t_stop if t_stop is not None else ts[-1],
        warnings=warnings_log,
        accepted=accepted,
        rejected=rejected,
        nfev=nfev,
        message=message,
    )
    d = y.size
    traj._seg_t0 = np.array(seg_t0)
    traj._seg_h = np.array(seg_h)
    traj._seg_y0 = np.array(seg_y0).reshape(-1, d)
    traj._seg_q = np.array(seg_q).reshape(-1, d, 4)
    return traj


def dense_eval(traj: Trajectory, t: float) -> np.ndarray:
    """Interpolated state at ``t``; stored samples are returned exactly."""
    ts = traj.t
    if t < ts[0] or t > ts[-1]:
        raise OutOfSpanError(f"t={t!r} outside [{ts[0]!r}, {ts[-1]!r}]")
    i = int(np.searchsorted(ts, t, side="left"))
    if i < ts.size and ts[i] == t:
        return traj.y[i].copy()
    k = i - 1
    h = traj._seg_h[k]
    theta = (t - traj._seg_t0[k]) / h
    return _interp(traj._seg_y0[k], h, traj._seg_q[k], theta)


def dense_quadrature(traj: Trajectory, fn: Callable[[float, np.ndarray], float],
                     t_a: float | None = None, t_b: float | None = None) -> float:
    """Integrate ``fn(t, y(t))`` over ``[t_a, t_b]`` along the interpolant.

    Uses 5-point Gauss-Legendre on every sample interval, so the rule is
    exact for the quartic interpolant composed with any smooth ``fn`` up to
    the rule's own error.
    """
    ts = traj.t
    t_a = ts[0] if t_a is None else t_a
    t_b = ts[-1] if t_b is None else t_b
    if t_b <= t_a:
        return 0.0
    nodes, weights = np.polynomial.legendre.leggauss(5)
    cuts = np.concatenate(([t_a], ts[(ts > t_a) & (ts < t_b)], [t_b]))
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        for x, w in zip(nodes, weights):
            tt = mid + half * x
            total += w * half * fn(tt, dense_eval(traj, tt))
    return total
