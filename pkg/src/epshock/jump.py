"""Rankine-Hugoniot jump at a circular shock and its admissibility checks."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, NotSupersonicError
from .gas import FlowState, GasLaw, Geometry, bernoulli, k_of_state, mach_squared

JUMP_MARGIN = 1e-9


def jump_states(upstream: FlowState, gamma: float) -> FlowState:
    """Post-shock state from the pre-shock state; no supersonicity check.

    At exactly ``M^2 = 1`` this is the identity.
    """
    law = GasLaw(gamma, 1.0)
    K = k_of_state(upstream, law)
    rho, u, p = upstream.rho, upstream.u, upstream.p
    return FlowState(rho * u * u / K, K / u, rho * u * u + p - rho * K, upstream.E)


@dataclass(frozen=True)
class JumpRecord:
    t_s: float
    gamma: float
    upstream: FlowState
    downstream: FlowState
    kappa0: float
    kappa_s: float
    K_minus: float
    M2_minus: float
    M2_plus: float
    hat_t_s: float

    @property
    def upstream_law(self) -> GasLaw:
        return GasLaw(self.gamma, self.kappa0)

    @property
    def downstream_law(self) -> GasLaw:
        return GasLaw(self.gamma, self.kappa_s)


def apply_jump(upstream: FlowState, t_s: float, g: GasLaw, geom: Geometry,
               margin: float = JUMP_MARGIN) -> JumpRecord:
    """Apply the jump at ``t = t_s``; ``g.kappa`` is the upstream entropy."""
    upstream.check()
    M2m = mach_squared(upstream, g)
    if M2m < 1.0 + margin:
        raise NotSupersonicError(f"upstream Mach^2 {M2m!r} below 1 + {margin}")
    down = jump_states(upstream, g.gamma)
    kappa_s = down.p / down.rho**g.gamma
    return JumpRecord(
        t_s=t_s,
        gamma=g.gamma,
        upstream=upstream,
        downstream=down,
        kappa0=upstream.p / upstream.rho**g.gamma,
        kappa_s=kappa_s,
        K_minus=k_of_state(upstream, g),
        M2_minus=M2m,
        M2_plus=mach_squared(down, g),
        hat_t_s=geom.hat_t(t_s),
    )


def normal_shock_mach2(M2: float, gamma: float) -> float:
    """Classical post-shock Mach number squared for a normal shock."""
    return (2.0 + (gamma - 1.0) * M2) / (2.0 * gamma * M2 - (gamma - 1.0))


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    transonic: bool
    speed_ordered: bool
    entropy_increase: bool
    kappa_minus: float
    kappa_plus: float
    mach_identity_residual: float
    mass_residual: float
    momentum_residual: float
    bernoulli_residual: float
    field_residual: float


def _rel(a, b):
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


def check_admissibility(j: JumpRecord) -> AdmissibilityReport:
    """Diagnose a jump record; never raises for an inadmissible jump."""
    gam = j.gamma
    m, s = j.upstream, j.downstream
    km = m.p / m.rho**gam
    kp = s.p / s.rho**gam
    law = GasLaw(gam, 1.0)
    M2m, M2p = mach_squared(m, law), mach_squared(s, law)
    ident = (M2p - 1.0) + (m.p / s.p) * (M2m - 1.0)
    scale = max(abs(M2p - 1.0), abs(M2m - 1.0) * m.p / s.p)
    speed = 0.0 < s.u < m.u
    entropy = kp > km
    transonic = M2m > 1.0 > M2p
    return AdmissibilityReport(
        admissible=speed and entropy,
        transonic=transonic,
        speed_ordered=speed,
        entropy_increase=entropy,
        kappa_minus=km,
        kappa_plus=kp,
        mach_identity_residual=0.0 if scale == 0.0 else abs(ident) / scale,
        mass_residual=_rel(m.rho * m.u, s.rho * s.u),
        momentum_residual=_rel(m.rho * m.u**2 + m.p, s.rho * s.u**2 + s.p),
        bernoulli_residual=_rel(bernoulli(m, law), bernoulli(s, law)),
        field_residual=_rel(m.E, s.E),
    )


def entropy_map_f(x: float, g: GasLaw) -> tuple[float, float]:
    """Return ``(f(x), f'(x))`` with ``kappa_s = f(M_-^2) * kappa0``."""
    if not x > 0.0:
        raise DomainError(f"x must be positive, got {x!r}")
    gam = g.gamma
    a = (gam - 1.0) / (gam + 1.0) + 2.0 / ((gam + 1.0) * x)
    value = (2.0 * gam * x - (gam - 1.0)) * a**gam / (gam + 1.0)
    deriv = 2.0 * gam * (gam - 1.0) / (gam + 1.0) ** 2 * a ** (gam - 1.0) * (1.0 / x - 1.0) ** 2
    return value, deriv
