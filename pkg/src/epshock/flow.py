"""Supersonic upstream and subsonic downstream radial solves, plus certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import gas
from .errors import (
    DomainError,
    DownstreamChokedError,
    IntegrationError,
    NotSupersonicError,
    UpstreamSonicError,
)
from .gas import (
    SONIC_GUARD,
    BackgroundCharge,
    ConservedInvariants,
    FlowState,
    GasLaw,
    Geometry,
)
from .ode import GuardPredicate, IvpProblem, ToleranceConfig, Trajectory, dense_eval, integrate

SUPERSONIC = "supersonic"
SUBSONIC = "subsonic"
MACH = "mach"
DENSITY = "density"

ENTRANCE_MARGIN = 1e-6


@dataclass
class SolutionProfile:
    """Sampled smooth branch on ``span = (t_from, t_to)``.

    ``law.kappa`` is the branch entropy (``inv.kappa0`` holds the same value).
    The per-sample arrays are aligned with ``t``.  ``trajectory`` is ``None``
    for a degenerate single-sample profile.
    """

    branch: str
    law: GasLaw
    inv: ConservedInvariants
    geom: Geometry
    formulation: str
    t: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    p: np.ndarray
    E: np.ndarray
    M2: np.ndarray
    trajectory: Trajectory | None = field(default=None, repr=False)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])

    @property
    def radius(self) -> np.ndarray:
        return self.geom.r0 - self.t

    @property
    def B(self) -> np.ndarray:
        g = self.law.gamma
        return 0.5 * self.u**2 + g * self.p / ((g - 1.0) * self.rho)

    @property
    def K(self) -> np.ndarray:
        g = self.law.gamma
        return 2.0 * (g - 1.0) / (g + 1.0) * self.B

    def __len__(self):
        return self.t.size

    def state(self, i: int) -> FlowState:
        return FlowState(float(self.rho[i]), float(self.u[i]), float(self.p[i]), float(self.E[i]))

    @property
    def samples(self):
        return [(float(self.t[i]), self.state(i), float(self.M2[i])) for i in range(len(self))]

    @property
    def first(self) -> FlowState:
        return self.state(0)

    @property
    def last(self) -> FlowState:
        return self.state(-1)

    def state_from_y(self, t: float, y) -> FlowState:
        E = y[1] / self.geom.hat_t(t)
        if self.formulation == MACH:
            return gas.state_from_mach(t, y[0], E, self.inv, self.law, self.geom)
        return gas.state_from_rho(t, y[0], E, self.inv, self.law, self.geom)

    def dense_state(self, t: float) -> FlowState:
        if self.trajectory is None:
            if t != self.t[0]:
                raise DomainError("degenerate profile only holds its single sample")
            return self.first
        return self.state_from_y(t, dense_eval(self.trajectory, t))

    @property
    def mach_monotone(self) -> bool:
        d = np.diff(self.M2)
        return bool(np.all(d > 0.0) if self.branch == SUPERSONIC else np.all(d < 0.0))

    @property
    def density_monotone(self) -> bool:
        return bool(np.all(np.diff(self.rho) > 0.0))

    @property
    def subsonic_margin(self) -> float:
        """``1 - max M^2``; the reported ``delta`` with ``M^2 <= 1 - delta``."""
        return float(1.0 - self.M2.max())

    def conservation_residuals(self) -> tuple[float, float]:
        """Max relative deviation of ``hat_t*rho*u`` from ``m0`` and of ``p/rho^gamma`` from kappa."""
        m = self.radius * self.rho * self.u
        k = self.p / self.rho**self.law.gamma
        return (
            float(np.max(np.abs(m - self.inv.m0)) / self.inv.m0),
            float(np.max(np.abs(k - self.law.kappa)) / self.law.kappa),
        )


def _profile(branch, law, inv, geom, formulation, traj):
    n = traj.t.size
    rho, u, p, E, M2 = (np.empty(n) for _ in range(5))
    prof = SolutionProfile(branch, law, inv, geom, formulation, traj.t.copy(),
                           rho, u, p, E, M2, traj)
    for i in range(n):
        s = prof.state_from_y(traj.t[i], traj.y[i])
        rho[i], u[i], p[i], E[i] = s.rho, s.u, s.p, s.E
        M2[i] = gas.mach_squared(s, law)
    return prof


def _single(branch, law, inv, geom, formulation, t, s):
    arr = lambda v: np.array([v], dtype=float)  # noqa: E731
    return SolutionProfile(branch, law, inv, geom, formulation, arr(t), arr(s.rho),
                           arr(s.u), arr(s.p), arr(s.E), arr(gas.mach_squared(s, law)))


def entrance_law(gamma: float, entrance: FlowState) -> GasLaw:
    """Gas law whose entropy constant matches the entrance state."""
    return GasLaw(gamma, entrance.p / entrance.rho**gamma)


def _mach_rhs(law, inv, geom, b, supersonic):
    def rhs(t, y):
        M2 = y[0]
        if (M2 <= 1.0) if supersonic else (M2 >= 1.0 or M2 <= 0.0):
            raise DomainError("left branch")
        return (
            gas.rhs_h1(t, M2, y[1] / geom.hat_t(t), law, inv, geom, sonic_guard=0.0),
            gas.rhs_h2(t, M2, law, inv, geom, b),
        )
    return rhs


def _density_rhs(law, inv, geom, b, supersonic):
    def rhs(t, y):
        rho = y[0]
        if rho <= 0.0:
            raise DomainError("non-positive density")
        M2 = gas.mach_squared_from_rho(t, rho, inv, law, geom)
        if (M2 <= 1.0) if supersonic else (M2 >= 1.0):
            raise DomainError("left branch")
        return (
            gas.rhs_g1(t, rho, y[1] / geom.hat_t(t), law, inv, geom, sonic_guard=0.0),
            gas.rhs_g2(t, rho, geom, b),
        )
    return rhs


def _guards(law, inv, geom, formulation, supersonic, sonic_guard, rho_floor):
    if formulation == MACH:
        m2 = lambda t, y: y[0]  # noqa: E731
    else:
        def m2(t, y):
            if y[0] <= 0.0:
                return -1.0 if not supersonic else 0.0
            return gas.mach_squared_from_rho(t, y[0], inv, law, geom)
    if supersonic:
        sonic = GuardPredicate("sonic", lambda t, y: m2(t, y) - 1.0 - sonic_guard)
    else:
        sonic = GuardPredicate("sonic", lambda t, y: 1.0 - m2(t, y) - sonic_guard)
    guards = [sonic]
    if formulation == DENSITY:
        guards.append(GuardPredicate("positivity", lambda t, y: y[0] - rho_floor))
    return guards


def solve_upstream(entrance: FlowState, g: GasLaw, geom: Geometry, b: BackgroundCharge,
                   t_stop: float, tol: ToleranceConfig | None = None,
                   sonic_guard: float = SONIC_GUARD, formulation: str = MACH) -> SolutionProfile:
    """Integrate the supersonic branch from the entrance ``t = 0`` to ``t_stop``.

    ``g.kappa`` must equal ``p0/rho0**gamma`` of the entrance state.  The
    default Mach formulation integrates ``(M^2, hat_t*E)``; ``formulation=
    "density"`` integrates ``(rho, hat_t*E)`` instead.

    Raises :class:`UpstreamSonicError` if the flow decelerates to the sonic
    guard before ``t_stop``.
    """
    entrance.check()
    kappa0 = entrance.p / entrance.rho**g.gamma
    if abs(g.kappa - kappa0) > 1e-12 * kappa0:
        raise DomainError(f"gas law kappa {g.kappa!r} != entrance p0/rho0^gamma {kappa0!r}")
    M02 = gas.mach_squared(entrance, g)
    if M02 < 1.0 + ENTRANCE_MARGIN:
        raise NotSupersonicError(f"entrance Mach^2 {M02!r} not above 1 + {ENTRANCE_MARGIN}")
    if not (0.0 <= t_stop <= geom.T * (1.0 + 1e-14)):
        raise DomainError(f"t_stop={t_stop!r} outside [0, T={geom.T!r}]")
    t_stop = min(t_stop, geom.T)
    inv = ConservedInvariants.from_state(entrance, g.gamma, geom.r0)
    if t_stop == 0.0:
        return _single(SUPERSONIC, g, inv, geom, formulation, 0.0, entrance)

    if formulation == MACH:
        y0 = [M02, geom.r0 * entrance.E]
        rhs = _mach_rhs(g, inv, geom, b, True)
    elif formulation == DENSITY:
        y0 = [entrance.rho, geom.r0 * entrance.E]
        rhs = _density_rhs(g, inv, geom, b, True)
    else:
        raise DomainError(f"unknown formulation {formulation!r}")
    guards = _guards(g, inv, geom, formulation, True, sonic_guard, 0.0)
    traj = integrate(IvpProblem(rhs, 0.0, t_stop, y0, guards), tol)
    if traj.status != "completed":
        cls = UpstreamSonicError if traj.guard == "sonic" else IntegrationError
        raise cls(f"upstream solve stopped: {traj.message}", traj.t_stop, traj.guard, traj)
    return _profile(SUPERSONIC, g, inv, geom, formulation, traj)


def solve_downstream(post_shock: FlowState, kappa_s: float, t_s: float, g: GasLaw,
                     geom: Geometry, b: BackgroundCharge, t_exit: float | None = None,
                     tol: ToleranceConfig | None = None, sonic_guard: float = SONIC_GUARD,
                     formulation: str = DENSITY, m0: float | None = None) -> SolutionProfile:
    """Integrate the subsonic branch from the shock ``t_s`` to ``t_exit`` (default ``T``).

    The branch entropy is ``kappa_s``; ``g`` only supplies ``gamma``.  ``m0``
    defaults to the mass flux of ``post_shock`` at ``t_s``.

    Raises :class:`DownstreamChokedError` when the sonic or positivity guard
    fires, or the step size collapses, before ``t_exit``.  Its ``t_stop`` is
    the maximal solvable span end.
    """
    t_exit = geom.T if t_exit is None else t_exit
    if not (0.0 <= t_s < t_exit <= geom.T * (1.0 + 1e-14)):
        raise DomainError(f"need 0 <= t_s < t_exit <= T, got t_s={t_s!r}, t_exit={t_exit!r}")
    t_exit = min(t_exit, geom.T)
    post_shock.check()
    law = g.with_kappa(kappa_s)
    ht_s = geom.hat_t(t_s)
    inv = ConservedInvariants(ht_s * post_shock.rho * post_shock.u if m0 is None else m0, kappa_s)
    Ms2 = gas.mach_squared(post_shock, law)
    if not Ms2 < 1.0:
        raise DomainError(f"post-shock state is not subsonic (M^2={Ms2!r})")

    if formulation == DENSITY:
        y0 = [post_shock.rho, ht_s * post_shock.E]
        rhs = _density_rhs(law, inv, geom, b, False)
    elif formulation == MACH:
        y0 = [Ms2, ht_s * post_shock.E]
        rhs = _mach_rhs(law, inv, geom, b, False)
    else:
        raise DomainError(f"unknown formulation {formulation!r}")
    guards = _guards(law, inv, geom, formulation, False, sonic_guard, 1e-12 * post_shock.rho)
    traj = integrate(IvpProblem(rhs, t_s, t_exit, y0, guards), tol)
    if traj.status != "completed":
        raise DownstreamChokedError(
            f"downstream solve stopped before exit: {traj.message}",
            traj.t_stop, traj.guard or "step-failure", traj,
        )
    return _profile(SUBSONIC, law, inv, geom, formulation, traj)


@dataclass
class Certificates:
    """Computable sufficient conditions; negative values are reported, never raised."""

    delta0: float
    beta1: float
    min_field_excess: float
    mach_monotone: bool
    mach_violation: float
    f_s: float
    g_s: float
    density_monotone: bool | None = None
    subsonic_margin: float | None = None

    @property
    def downstream_certified(self) -> bool:
        return self.f_s >= self.beta1

    @property
    def upstream_certified(self) -> bool:
        return self.delta0 > 0.0 and self.min_field_excess > 0.0

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["upstream_certified"] = self.upstream_certified
        d["downstream_certified"] = self.downstream_certified
        return d


def shock_certificates(jump, geom: Geometry, b: BackgroundCharge) -> tuple[float, float]:
    """``(F_s, G_s)`` at the shock described by ``jump``.

    ``F_s = hat_t_s E_s - (hat_t_s/r1)^2 u_s^2 - beta1`` bounds the downstream
    numerator ``hat_t E - u^2`` from below; ``G_s`` is its lower estimate in
    terms of the upstream state alone.
    """
    gam = jump.gamma
    beta1 = gas.field_lower_bound_constant(geom, b)
    ht_s = geom.hat_t(jump.t_s)
    down = jump.downstream
    f_s = ht_s * down.E - (ht_s / geom.r1) ** 2 * down.u**2 - beta1
    q_s = geom.r0 / ht_s
    ratio = (gam - 1.0) / (gam + 1.0) + 2.0 / ((gam + 1.0) * jump.M2_minus)
    bound = (math.exp((gam + 1.0) / (2.0 * (gam - 1.0))) / q_s) ** 2
    g_s = (ht_s * jump.upstream.E - bound * ratio**2 * (gam + 1.0) / (gam - 1.0)
           * jump.K_minus - beta1)
    return f_s, g_s


def compute_certificates(up: SolutionProfile, g: GasLaw, geom: Geometry, b: BackgroundCharge,
                         jump, down: SolutionProfile | None = None) -> Certificates:
    excess = up.radius * up.E - up.K
    d = np.diff(up.M2)
    violation = float(max(0.0, -d.min())) if d.size else 0.0
    f_s, g_s = shock_certificates(jump, geom, b)
    return Certificates(
        delta0=gas.geometry_margin(g.gamma, geom),
        beta1=gas.field_lower_bound_constant(geom, b),
        min_field_excess=float(excess.min()),
        mach_monotone=bool(np.all(d > 0.0)),
        mach_violation=violation,
        f_s=f_s,
        g_s=g_s,
        density_monotone=None if down is None else down.density_monotone,
        subsonic_margin=None if down is None else down.subsonic_margin,
    )


def field_lower_bound_violation(down: SolutionProfile, b: BackgroundCharge) -> float:
    """Largest amount by which ``E(t) >= (hat_t_s E_s - beta1)/hat_t`` fails (<= 0 if it holds)."""
    beta1 = gas.field_lower_bound_constant(down.geom, b)
    bound = (down.radius[0] * down.E[0] - beta1) / down.radius
    return float(np.max(bound - down.E))


class PineqResult(NamedTuple):
    ok: bool
    violating_xi: float | None
    max_value: float
    peak_value: float


def pineq_lhs(xi, gamma: float):
    """``2((g-1)/(g+1))^2 (e^{(g+1)/(2(g-1))}/xi)^2 ln xi``."""
    c = (gamma - 1.0) / (gamma + 1.0)
    top = math.exp((gamma + 1.0) / (2.0 * (gamma - 1.0)))
    xi = np.asarray(xi, dtype=float)
    return 2.0 * c * c * (top / xi) ** 2 * np.log(xi)


def pineq_peak(gamma: float) -> float:
    """Value of :func:`pineq_lhs` at its maximizer ``xi = e^{1/2}``."""
    return math.exp(2.0 / (gamma - 1.0)) * ((gamma - 1.0) / (gamma + 1.0)) ** 2


def check_pineq(gamma: float, samples: int = 1000) -> PineqResult:
    if gamma < 2.0:
        raise DomainError(f"inequality is only asserted for gamma >= 2, got {gamma!r}")
    if samples < 100:
        raise DomainError("need at least 100 samples")
    upper = math.exp((gamma + 1.0) / (2.0 * (gamma - 1.0)))
    xi = np.linspace(1.0, upper, samples, endpoint=False)
    vals = pineq_lhs(xi, gamma)
    bad = np.nonzero(vals >= 1.0)[0]
    return PineqResult(
        ok=bad.size == 0,
        violating_xi=float(xi[bad[0]]) if bad.size else None,
        max_value=float(vals.max()),
        peak_value=pineq_peak(gamma),
    )
