"""Closed-form thermodynamics and right-hand sides of the radial ODE systems.

Everything here is non-dimensional and pure.  The nozzle coordinate is
``t = r0 - r`` and the physical radius is ``hat_t = r0 - t``.  Velocity ``u``
and field ``E`` use the inflow-positive sign convention.

Two equivalent first-order systems describe smooth radial flow:

* ``(M^2, hat_t*E)`` with right-hand sides :func:`rhs_h1`, :func:`rhs_h2`
* ``(rho, hat_t*E)`` with right-hand sides :func:`rhs_g1`, :func:`rhs_g2`

Both share the conserved pair ``hat_t*rho*u = m0`` and ``p/rho**gamma = kappa``.
In all formulas the entropy constant of the branch is taken from the
:class:`GasLaw` argument and the mass flux from :class:`ConservedInvariants`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, SonicDegeneracyError

SONIC_GUARD = 1e-6


@dataclass(frozen=True)
class GasLaw:
    """Polytropic law ``p = kappa * rho**gamma``."""

    gamma: float
    kappa: float

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise DomainError(f"gamma must exceed 1, got {self.gamma!r}")
        if not self.kappa > 0.0:
            raise DomainError(f"kappa must be positive, got {self.kappa!r}")

    def with_kappa(self, kappa: float) -> "GasLaw":
        return GasLaw(self.gamma, kappa)

    def pressure(self, rho: float) -> float:
        return self.kappa * rho**self.gamma

    def sound_speed_squared(self, rho: float) -> float:
        return self.gamma * self.kappa * rho ** (self.gamma - 1.0)


@dataclass(frozen=True)
class Geometry:
    """Annulus ``r1 < r < r0``; flow enters at ``r0`` and exits at ``r1``."""

    r0: float
    r1: float

    def __post_init__(self):
        if not (self.r0 > self.r1 > 0.0):
            raise DomainError(f"need r0 > r1 > 0, got r0={self.r0!r}, r1={self.r1!r}")

    @property
    def T(self) -> float:
        return self.r0 - self.r1

    def hat_t(self, t: float) -> float:
        return self.r0 - t


class BackgroundCharge:
    """Background ion density ``b(t)``, constant or piecewise linear.

    Tables are clamped outside their knot range.  ``b0`` defaults to the
    supremum of the representation.
    """

    def __init__(self, constant=None, knots=None, b0=None):
        if (constant is None) == (knots is None):
            raise DomainError("give exactly one of constant or knots")
        if constant is not None:
            constant = float(constant)
            if not constant > 0.0:
                raise DomainError("background charge must be positive")
            self.constant = constant
            self.knots = None
            sup = constant
        else:
            arr = np.asarray(knots, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
                raise DomainError("knots must be a list of (t, b) pairs")
            if np.any(np.diff(arr[:, 0]) <= 0.0):
                raise DomainError("knots must be strictly increasing in t")
            if np.any(arr[:, 1] <= 0.0):
                raise DomainError("background charge must be positive")
            self.constant = None
            self.knots = arr
            self._tk = arr[:, 0].copy()
            self._bk = arr[:, 1].copy()
            sup = float(arr[:, 1].max())
            if arr.shape[0] > 2:
                slopes = np.diff(self._bk) / np.diff(self._tk)
                if np.any(np.abs(np.diff(slopes)) > 1e-12 * (1.0 + np.abs(slopes[:-1]))):
                    warnings.warn(
                        "background charge table is only piecewise linear (not C^1)",
                        stacklevel=2,
                    )
        if b0 is None:
            b0 = sup
        if b0 < sup:
            raise DomainError(f"bound b0={b0!r} below sup of b ({sup!r})")
        self.b0 = float(b0)

    @classmethod
    def from_constant(cls, value: float, b0=None) -> "BackgroundCharge":
        return cls(constant=value, b0=b0)

    @classmethod
    def from_table(cls, knots: Sequence[Sequence[float]], b0=None) -> "BackgroundCharge":
        return cls(knots=knots, b0=b0)

    def __call__(self, t: float) -> float:
        if self.constant is not None:
            return self.constant
        return float(np.interp(t, self._tk, self._bk))

    def as_config(self) -> dict:
        if self.constant is not None:
            return {"b.constant": self.constant}
        return {"b.table": self.knots.tolist()}

    def __eq__(self, other):
        if not isinstance(other, BackgroundCharge):
            return NotImplemented
        return self.as_config() == other.as_config() and self.b0 == other.b0

    def __repr__(self):
        if self.constant is not None:
            return f"BackgroundCharge(constant={self.constant!r})"
        return f"BackgroundCharge(knots={self.knots.tolist()!r})"


@dataclass(frozen=True)
class FlowState:
    """Pointwise state ``(rho, u, p, E)``; ``u`` and ``E`` are inflow-positive."""

    rho: float
    u: float
    p: float
    E: float

    def check(self):
        if not (self.rho > 0.0 and self.u > 0.0 and self.p > 0.0):
            raise DomainError(f"state must have rho, u, p > 0: {self}")
        return self


@dataclass(frozen=True)
class ConservedInvariants:
    """Mass flux ``m0 = hat_t*rho*u`` and branch entropy ``kappa0 = p/rho**gamma``."""

    m0: float
    kappa0: float

    def __post_init__(self):
        if not (self.m0 > 0.0 and self.kappa0 > 0.0):
            raise DomainError(f"invariants must be positive: {self}")

    @classmethod
    def from_state(cls, state: FlowState, gamma: float, radius: float) -> "ConservedInvariants":
        return cls(radius * state.rho * state.u, state.p / state.rho**gamma)


class DerivedConstants(NamedTuple):
    mu0: float
    mu1: float


@lru_cache(maxsize=256)
def _derived(gamma: float, kappa: float, m0: float) -> DerivedConstants:
    gk = gamma * kappa
    mu0 = 1.0 / (gk * (m0 * m0 / gk) ** ((gamma - 1.0) / (gamma + 1.0)))
    mu1 = (1.0 / (gk * mu0)) ** (1.0 / (gamma - 1.0))
    return DerivedConstants(mu0, mu1)


def derived_constants(g: GasLaw, inv: ConservedInvariants) -> DerivedConstants:
    """Return ``(mu0, mu1)`` for the branch law ``g`` and mass flux ``inv.m0``."""
    return _derived(g.gamma, g.kappa, inv.m0)


def mach_squared(s: FlowState, g: GasLaw) -> float:
    return s.u * s.u * s.rho / (g.gamma * s.p)


def bernoulli(s: FlowState, g: GasLaw) -> float:
    return 0.5 * s.u * s.u + g.gamma * s.p / ((g.gamma - 1.0) * s.rho)


def k_of_state(s: FlowState, g: GasLaw) -> float:
    return 2.0 * (g.gamma - 1.0) / (g.gamma + 1.0) * bernoulli(s, g)


def _check_sonic(M2, guard):
    if abs(M2 - 1.0) < guard:
        raise SonicDegeneracyError(M2, guard)


def rho_from_mach(t: float, M2: float, inv: ConservedInvariants, g: GasLaw, geom: Geometry) -> float:
    """Density on the branch ``(m0, g.kappa)`` with Mach number squared ``M2`` at ``t``."""
    if not M2 > 0.0:
        raise DomainError(f"M2 must be positive, got {M2!r}")
    ht = geom.hat_t(t)
    _, mu1 = derived_constants(g, inv)
    return mu1 * (1.0 / (ht * ht * M2)) ** (1.0 / (g.gamma + 1.0))


def state_from_mach(t, M2, E, inv, g, geom) -> FlowState:
    rho = rho_from_mach(t, M2, inv, g, geom)
    return FlowState(rho, inv.m0 / (geom.hat_t(t) * rho), g.pressure(rho), E)


def state_from_rho(t, rho, E, inv, g, geom) -> FlowState:
    if not rho > 0.0:
        raise DomainError(f"rho must be positive, got {rho!r}")
    return FlowState(rho, inv.m0 / (geom.hat_t(t) * rho), g.pressure(rho), E)


def mach_squared_from_rho(t, rho, inv, g, geom) -> float:
    ht = geom.hat_t(t)
    u = inv.m0 / (ht * rho)
    return u * u / g.sound_speed_squared(rho)


def rhs_h1(t, M2, E, g, inv, geom, sonic_guard=SONIC_GUARD) -> float:
    """``(M^2)'`` of the Mach/field system."""
    if not M2 > 0.0:
        raise DomainError(f"M2 must be positive, got {M2!r}")
    _check_sonic(M2, sonic_guard)
    gam = g.gamma
    ht = geom.hat_t(t)
    mu0, _ = derived_constants(g, inv)
    field = (gam + 1.0) * mu0 * E * (ht * ht * M2) ** ((gam - 1.0) / (gam + 1.0))
    return M2 / (M2 - 1.0) * (field - (2.0 + (gam - 1.0) * M2) / ht)


def rhs_h1_factored(t, M2, E, g, inv, geom, sonic_guard=SONIC_GUARD) -> float:
    """``(M^2)'`` written through the field excess ``hat_t*E - K``.

    Algebraically identical to :func:`rhs_h1`; the sign of the result for
    supersonic ``M2`` is the sign of :func:`field_excess`.
    """
    if not M2 > 0.0:
        raise DomainError(f"M2 must be positive, got {M2!r}")
    _check_sonic(M2, sonic_guard)
    gam = g.gamma
    ht = geom.hat_t(t)
    mu0, _ = derived_constants(g, inv)
    excess = field_excess(t, M2, E, g, inv, geom)
    return (
        (gam + 1.0) * mu0 * ht ** ((gam - 3.0) / (gam + 1.0))
        * M2 ** (2.0 * gam / (gam + 1.0)) / (M2 - 1.0) * excess
    )


def field_excess(t, M2, E, g, inv, geom) -> float:
    """``hat_t*E - K`` for the state reconstructed from ``(t, M2, E)``."""
    s = state_from_mach(t, M2, E, inv, g, geom)
    return geom.hat_t(t) * E - k_of_state(s, g)


def rhs_h2(t, M2, g, inv, geom, b: BackgroundCharge) -> float:
    """``(hat_t*E)'`` in Mach form."""
    return geom.hat_t(t) * (rho_from_mach(t, M2, inv, g, geom) - b(t))


def rhs_g1(t, rho, E, g, inv, geom, sonic_guard=SONIC_GUARD) -> float:
    """``rho'`` of the density/field system."""
    if not rho > 0.0:
        raise DomainError(f"rho must be positive, got {rho!r}")
    ht = geom.hat_t(t)
    u2 = (inv.m0 / (ht * rho)) ** 2
    c2 = g.sound_speed_squared(rho)
    _check_sonic(u2 / c2, sonic_guard)
    return rho * (ht * E - u2) / (ht * (c2 - u2))


def rhs_g1_subsonic_form(t, rho, E, g, inv, geom, sonic_guard=SONIC_GUARD) -> float:
    """``rho'`` as ``rho^(2-gamma)(hat_t E - u^2) / (hat_t gamma kappa (1 - M^2))``."""
    if not rho > 0.0:
        raise DomainError(f"rho must be positive, got {rho!r}")
    gam = g.gamma
    ht = geom.hat_t(t)
    u2 = (inv.m0 / (ht * rho)) ** 2
    M2 = mach_squared_from_rho(t, rho, inv, g, geom)
    _check_sonic(M2, sonic_guard)
    return rho ** (2.0 - gam) * (ht * E - u2) / (ht * gam * g.kappa * (1.0 - M2))


def rhs_g2(t, rho, geom, b: BackgroundCharge) -> float:
    """``(hat_t*E)'`` in density form."""
    if not rho > 0.0:
        raise DomainError(f"rho must be positive, got {rho!r}")
    return geom.hat_t(t) * (rho - b(t))


def geometry_margin(gamma: float, geom: Geometry) -> float:
    """``1 - 2(gamma-1)/(gamma+1) * ln(r0/r1)``; positive on admissible annuli."""
    return 1.0 - 2.0 * (gamma - 1.0) / (gamma + 1.0) * math.log(geom.r0 / geom.r1)


def field_lower_bound_constant(geom: Geometry, b: BackgroundCharge) -> float:
    """``b0 (r0^2 - r1^2) / 2``: bounds the drop of ``hat_t*E`` across the nozzle."""
    return 0.5 * b.b0 * (geom.r0**2 - geom.r1**2)


class BernoulliExitForm(NamedTuple):
    G: float
    G_p: float
    G_kappa: float


def bernoulli_exit_form(p: float, kappa: float, m0: float, gamma: float,
                        radius: float) -> BernoulliExitForm:
    """Bernoulli function at ``radius`` written in terms of pressure and entropy.

    ``G = (m0/radius)^2 (kappa/p)^(2/gamma) / 2 + gamma/(gamma-1) p^(1-1/gamma) kappa^(1/gamma)``
    with its partial derivatives.  ``G_p = (1 - M^2)/rho``.
    """
    if not (p > 0.0 and kappa > 0.0):
        raise DomainError("p and kappa must be positive")
    a = (m0 / radius) ** 2
    G = 0.5 * a * (kappa / p) ** (2.0 / gamma) + gamma / (gamma - 1.0) * p ** (
        1.0 - 1.0 / gamma
    ) * kappa ** (1.0 / gamma)
    G_p = -a * kappa ** (2.0 / gamma) / gamma * p ** (-2.0 / gamma - 1.0) + (kappa / p) ** (
        1.0 / gamma
    )
    G_kappa = a * kappa ** (2.0 / gamma - 1.0) / (gamma * p ** (2.0 / gamma)) + (
        p / kappa
    ) ** (1.0 - 1.0 / gamma) / (gamma - 1.0)
    return BernoulliExitForm(G, G_p, G_kappa)
