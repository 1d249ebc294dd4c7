"""Composed shock solutions, the exit-pressure map and its inversion."""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import gas
from .config import ProblemConfig
from .errors import DomainError, EPShockError, NonMonotoneMapError, OutOfRangeError
from .flow import Certificates, SolutionProfile, compute_certificates, solve_downstream, solve_upstream
from .gas import bernoulli, bernoulli_exit_form  # noqa: F401  (re-exported)
from .jump import JumpRecord, apply_jump
from .ode import dense_quadrature
from .sensitivity import (
    JumpSensitivity,
    PressureSensitivity,
    SensitivityProfile,
    integrate_sensitivity,
    jump_sensitivity_ic,
    pressure_sensitivity_terms,
)

# t_s values closer than this fraction of T to the exit are excluded from maps.
EXIT_MARGIN = 1e-8


@dataclass
class ShockSolution:
    t_s: float
    upstream: SolutionProfile
    jump: JumpRecord
    downstream: SolutionProfile
    certificates: Certificates
    exit_pressure: float
    sensitivity: SensitivityProfile | None = field(default=None, repr=False)
    sensitivity_ic: JumpSensitivity | None = None
    pressure_terms: PressureSensitivity | None = None

    @property
    def dp_dts(self) -> float | None:
        return None if self.pressure_terms is None else self.pressure_terms.dp_dts


def forward_solve(config: ProblemConfig, t_s: float, sensitivity: bool = False) -> ShockSolution:
    """Upstream solve on ``[0, t_s]``, jump, downstream solve on ``[t_s, T]``.

    Raises ``UpstreamSonicError``, ``NotSupersonicError`` or
    ``DownstreamChokedError`` (carrying the stop location) on failure.
    """
    T = config.T
    if not (isinstance(t_s, (int, float)) and math.isfinite(t_s) and 0.0 <= t_s < T):
        raise DomainError(f"t_s={t_s!r} outside [0, T={T!r})")
    t_s = float(t_s)
    law, geom, b, tol = config.law, config.geometry, config.b, config.tolerance
    up = solve_upstream(config.entrance, law, geom, b, t_s, tol, config.sonic_guard)
    jump = apply_jump(up.last, t_s, law, geom)
    down = solve_downstream(jump.downstream, jump.kappa_s, t_s, law, geom, b, tol=tol,
                            sonic_guard=config.sonic_guard, m0=up.inv.m0)
    cert = compute_certificates(up, law, geom, b, jump, down)
    sol = ShockSolution(t_s, up, jump, down, cert, float(down.p[-1]))
    if sensitivity:
        ic = jump_sensitivity_ic(up, jump, law, geom, b)
        sens = integrate_sensitivity(down, ic, tol=tol, sonic_guard=config.sonic_guard)
        sol.sensitivity = sens
        sol.sensitivity_ic = ic
        sol.pressure_terms = pressure_sensitivity_terms(down, sens)
    return sol


@dataclass(frozen=True)
class MapPoint:
    t_s: float
    p_exit: float | None
    f_s: float | None = None
    g_s: float | None = None
    min_field_excess: float | None = None
    certified: bool = False
    error: str | None = None
    guard: str | None = None
    t_stop: float | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class ExitPressureMap:
    grid: list[MapPoint]
    monotone_decreasing: bool
    range: tuple[float, float] | None
    max_inversion: float

    @property
    def failures(self) -> list[MapPoint]:
        return [pt for pt in self.grid if not pt.ok]

    @property
    def t(self) -> np.ndarray:
        return np.array([pt.t_s for pt in self.grid])

    @property
    def p(self) -> np.ndarray:
        return np.array([np.nan if pt.p_exit is None else pt.p_exit for pt in self.grid])


def map_point(config: ProblemConfig, t_s: float) -> MapPoint:
    try:
        sol = forward_solve(config, t_s)
    except EPShockError as exc:
        return MapPoint(t_s, None, error=f"{type(exc).__name__}: {exc}",
                        guard=getattr(exc, "guard", None), t_stop=getattr(exc, "t_stop", None))
    c = sol.certificates
    return MapPoint(t_s, sol.exit_pressure, c.f_s, c.g_s, c.min_field_excess,
                    c.downstream_certified and c.upstream_certified)


def _map_worker(args):
    return map_point(*args)


def map_grid(config: ProblemConfig, n_grid: int) -> np.ndarray:
    if n_grid < 2:
        raise DomainError("n_grid must be at least 2")
    return np.linspace(0.0, config.T * (1.0 - EXIT_MARGIN), n_grid)


def summarize_map(points: list[MapPoint]) -> ExitPressureMap:
    good = [pt.p_exit for pt in points if pt.ok]
    if not good:
        return ExitPressureMap(points, False, None, math.inf)
    diffs = np.diff(good)
    scale = np.abs(np.asarray(good[:-1]))
    max_inv = float(np.max(diffs / scale)) if diffs.size else -math.inf
    monotone = len(good) == len(points) and bool(np.all(diffs < 0.0))
    return ExitPressureMap(points, monotone, (min(good), max(good)), max_inv)


def exit_pressure_map(config: ProblemConfig, n_grid: int | None = None,
                      workers: int = 1) -> ExitPressureMap:
    """Forward solves on a uniform ``t_s`` grid over ``[0, T(1 - 1e-8)]``.

    Failed grid points are kept in ``grid`` with their error.  ``workers > 1``
    fans the solves out to processes; the result order is the grid order.
    """
    ts = map_grid(config, config.n_grid if n_grid is None else n_grid)
    jobs = [(config, float(t)) for t in ts]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
            points = list(ex.map(_map_worker, jobs))
    else:
        points = [_map_worker(j) for j in jobs]
    return summarize_map(points)


def default_workers() -> int:
    """Worker cap from ``EPSHOCK_THREADS``, else all cores."""
    raw = os.environ.get("EPSHOCK_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            warnings.warn(f"ignoring non-integer EPSHOCK_THREADS={raw!r}")
    return os.cpu_count() or 1


def match_exit_pressure(config: ProblemConfig, p_ex: float | None = None,
                        tol_ts: float | None = None, force: bool = False,
                        pmap: ExitPressureMap | None = None, workers: int = 1) -> ShockSolution:
    """Shock location whose exit pressure equals ``p_ex``, by bisection on ``t_s``.

    The map brackets the root first; bisection stops when the bracket is below
    ``tol_ts * T`` or the pressure matches exactly.
    """
    p_ex = config.p_ex if p_ex is None else p_ex
    if p_ex is None or not p_ex > 0.0:
        raise DomainError("a positive exit pressure p_ex is required")
    tol_ts = config.tol_ts if tol_ts is None else tol_ts
    pmap = pmap or exit_pressure_map(config, workers=workers)
    if pmap.range is None:
        raise NonMonotoneMapError("every grid point failed; no map to invert")
    if not pmap.monotone_decreasing:
        msg = (f"exit-pressure map is not strictly decreasing "
               f"(max inversion {pmap.max_inversion:.3g}, {len(pmap.failures)} failures)")
        if not force:
            raise NonMonotoneMapError(msg)
        warnings.warn(msg + "; bisecting anyway", RuntimeWarning)
    lo_p, hi_p = pmap.range
    if not (lo_p <= p_ex <= hi_p):
        raise OutOfRangeError(p_ex, pmap.range)

    good = [pt for pt in pmap.grid if pt.ok]
    for pt in good:
        if pt.p_exit == p_ex:
            return forward_solve(config, pt.t_s)
    bracket = None
    for a, c in zip(good[:-1], good[1:]):
        if (a.p_exit - p_ex) * (c.p_exit - p_ex) < 0.0:
            bracket = (a, c)
            break
    if bracket is None:
        raise NonMonotoneMapError(f"no grid bracket for p_ex={p_ex!r}")
    lo, hi = bracket[0].t_s, bracket[1].t_s
    sign_lo = bracket[0].p_exit > p_ex
    width = tol_ts * config.T
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        p_mid = forward_solve(config, mid).exit_pressure
        if p_mid == p_ex:
            lo = hi = mid
            break
        if (p_mid > p_ex) == sign_lo:
            lo = mid
        else:
            hi = mid
    return forward_solve(config, 0.5 * (lo + hi))


@dataclass(frozen=True)
class IdentityReport:
    exit_form_residual: float
    downstream_field_residual: float
    upstream_field_residual: float
    G_p: float
    G_p_expected: float

    @property
    def ok(self) -> bool:
        return (max(self.exit_form_residual, self.downstream_field_residual,
                    self.upstream_field_residual) <= 1e-6 and self.G_p > 0.0)

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ok"] = self.ok
        return d


def _field_integral(prof: SolutionProfile) -> float:
    if prof.trajectory is None:
        return 0.0
    geom = prof.geom
    return dense_quadrature(prof.trajectory, lambda t, y: y[1] / geom.hat_t(t))


def bernoulli_law_residual(prof: SolutionProfile) -> float:
    """``|B(end) - B(start) - int E| / |B(end)|`` along one branch."""
    B = prof.B
    return abs(B[-1] - B[0] - _field_integral(prof)) / abs(B[-1])


def bernoulli_exit_identities(sol: ShockSolution) -> IdentityReport:
    """Residuals of the exit Bernoulli identities of a composed solution.

    (i) ``G(p_exit, kappa_s)`` against ``B`` at the exit state;
    (ii) ``B_+(T) - B_-(t_s) = int E_+`` and its upstream analogue;
    (iii) ``G_p`` against ``(1 - M^2)/rho`` at the exit.
    """
    down, up = sol.downstream, sol.upstream
    law = down.law
    exit_ = down.last
    form = bernoulli_exit_form(exit_.p, law.kappa, down.inv.m0, law.gamma,
                               float(down.radius[-1]))
    B_exit = bernoulli(exit_, law)
    B_shock = bernoulli(up.last, up.law)
    down_res = abs(B_exit - B_shock - _field_integral(down)) / abs(B_exit)
    M2 = gas.mach_squared(exit_, law)
    return IdentityReport(
        exit_form_residual=abs(form.G - B_exit) / abs(B_exit),
        downstream_field_residual=down_res,
        upstream_field_residual=bernoulli_law_residual(up) if up.trajectory is not None else 0.0,
        G_p=form.G_p,
        G_p_expected=(1.0 - M2) / exit_.rho,
    )


class FiniteDifference(NamedTuple):
    h: float
    dp_dts: float
    drho_dts: float


def finite_difference_slopes(config: ProblemConfig, t_s: float,
                             h: float | None = None) -> FiniteDifference:
    """Central differences of ``p_+(T)`` and ``rho_+(T)`` with step ``h = fd_step*T``."""
    h = config.fd_step * config.T if h is None else h
    if t_s - h < 0.0 or t_s + h >= config.T:
        raise DomainError(f"finite-difference stencil around t_s={t_s!r} leaves [0, T)")
    plus = forward_solve(config, t_s + h)
    minus = forward_solve(config, t_s - h)
    return FiniteDifference(
        h=h,
        dp_dts=(plus.exit_pressure - minus.exit_pressure) / (2.0 * h),
        drho_dts=(plus.downstream.rho[-1] - minus.downstream.rho[-1]) / (2.0 * h),
    )
