"""Derivatives of the downstream solution with respect to the shock location.

``X = d rho_+/d t_s`` and ``Y = d E_+/d t_s`` obey a linear system along the
downstream trajectory.  Integrating it gives ``d p_+(T)/d t_s`` without
finite differences:

    X' = a3 X + a2 dkappa_s/dt_s + a1 Y,        (hat_t Y)' = hat_t X,

with ``a1 = dg1/dE``, ``a2 = dg1/dkappa``, ``a3 = dg1/drho`` evaluated on the
downstream state.  A third component accumulates ``int Y``, which equals the
derivative of the exit Bernoulli constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import gas
from .errors import DomainError, IntegrationError
from .flow import SolutionProfile
from .gas import BackgroundCharge, GasLaw, Geometry
from .jump import JumpRecord, entropy_map_f
from .ode import IvpProblem, ToleranceConfig, Trajectory, integrate


class JumpSensitivity(NamedTuple):
    X0: float
    Y0: float
    dkappa_dts: float
    dM2_dt: float


def jump_sensitivity_ic(up: SolutionProfile, jump: JumpRecord, g: GasLaw, geom: Geometry,
                        b: BackgroundCharge | None = None) -> JumpSensitivity:
    """Initial values ``X(t_s)``, ``Y(t_s)`` and ``dkappa_s/dt_s`` at the shock.

    ``g`` is the upstream law.  ``b`` is accepted for interface symmetry;
    the upstream slope ``(M_-^2)'`` does not depend on it.
    """
    if abs(up.t[-1] - jump.t_s) > 1e-12 * max(1.0, geom.T):
        raise DomainError("upstream profile does not end at the shock")
    gam = g.gamma
    M2 = jump.M2_minus
    dM2 = gas.rhs_h1(jump.t_s, M2, jump.upstream.E, g, up.inv, geom)
    rho_m = jump.upstream.rho
    u_s = jump.downstream.u
    X0 = (-2.0 * gam * gam * jump.kappa0 / (gam + 1.0) ** 2 * rho_m**gam / u_s**2
          * (M2 - 1.0) / M2 * dM2)
    Y0 = rho_m - jump.downstream.rho
    _, fprime = entropy_map_f(M2, g)
    return JumpSensitivity(X0, Y0, fprime * dM2 * jump.kappa0, dM2)


@dataclass
class SensitivityProfile:
    t_s: float
    t: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    int_Y: np.ndarray
    X_initial: float
    Y_initial: float
    dkappa_dts: float
    trajectory: Trajectory = field(repr=False, default=None)

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.X.tolist(), self.Y.tolist()))


def coefficients(t: float, down: SolutionProfile,
                 sonic_guard: float = gas.SONIC_GUARD) -> tuple[float, float, float]:
    """``(a1, a2, a3)`` at ``t`` from the downstream dense interpolant.

    ``rho_+'`` is re-evaluated from the right-hand side, not differenced.
    """
    law, inv, geom = down.law, down.inv, down.geom
    s = down.dense_state(t)
    gam, kap = law.gamma, law.kappa
    ht = geom.hat_t(t)
    M2 = gas.mach_squared(s, law)
    one_m = 1.0 - M2
    if one_m < sonic_guard:
        raise DomainError(f"coefficient blow-up: 1 - M^2 = {one_m!r}")
    rho_p = gas.rhs_g1(t, s.rho, s.E, law, inv, geom, sonic_guard=0.0)
    a1 = s.rho ** (2.0 - gam) / (gam * kap * one_m)
    a2 = -gam * rho_p / (gam * kap * one_m)
    a3 = rho_p / s.rho * (2.0 - gam - 3.0 * M2) / one_m + 2.0 * M2 / (ht * one_m)
    return a1, a2, a3


def integrate_sensitivity(down: SolutionProfile, ic, g: GasLaw | None = None,
                          geom: Geometry | None = None, tol: ToleranceConfig | None = None,
                          sonic_guard: float = gas.SONIC_GUARD) -> SensitivityProfile:
    """Integrate ``(X, hat_t*Y, int Y)`` over the downstream span."""
    if down.trajectory is None:
        raise DomainError("downstream profile has no trajectory")
    geom = geom or down.geom
    X0, Y0, dk = ic[0], ic[1], ic[2]
    t_s, t_end = down.span

    def rhs(t, y):
        a1, a2, a3 = coefficients(t, down, sonic_guard)
        ht = geom.hat_t(t)
        Y = y[1] / ht
        return (a3 * y[0] + a2 * dk + a1 * Y, ht * y[0], Y)

    y0 = [X0, geom.hat_t(t_s) * Y0, 0.0]
    traj = integrate(IvpProblem(rhs, t_s, t_end, y0), tol)
    if traj.status != "completed":
        raise IntegrationError(f"sensitivity solve failed: {traj.message}", traj.t_stop,
                               traj.guard, traj)
    ht = geom.hat_t(traj.t)
    return SensitivityProfile(
        t_s=t_s,
        t=traj.t.copy(),
        X=traj.y[:, 0].copy(),
        Y=traj.y[:, 1] / ht,
        int_Y=traj.y[:, 2].copy(),
        X_initial=X0,
        Y_initial=Y0,
        dkappa_dts=dk,
        trajectory=traj,
    )


class PressureSensitivity(NamedTuple):
    dp_dts: float
    dB_dts: float
    dB_dts_algebraic: float
    dp_dts_direct: float
    G_p: float
    G_kappa: float
    dkappa_dts: float
    cross_check: float


def pressure_sensitivity_terms(down: SolutionProfile, sens: SensitivityProfile,
                               g: GasLaw | None = None,
                               geom: Geometry | None = None) -> PressureSensitivity:
    """All terms of the exit-pressure derivative, with the two-route cross check.

    ``dB/dt_s`` comes from ``int Y``; ``dp/dt_s`` follows from
    ``dB = G_p dp + G_kappa dkappa``.  Independently, ``p = kappa rho^gamma``
    gives ``dp`` from ``X(T)``; feeding that back through ``G_p, G_kappa``
    yields ``dB_dts_algebraic``.  ``cross_check`` is their relative gap.
    """
    law = down.law
    gam, kap = law.gamma, law.kappa
    if abs(sens.t[-1] - down.t[-1]) > 1e-12 * max(1.0, down.geom.T):
        raise DomainError("sensitivity profile does not reach the downstream exit")
    exit_ = down.last
    form = gas.bernoulli_exit_form(exit_.p, kap, down.inv.m0, gam, float(down.radius[-1]))
    if not form.G_p > 0.0:
        raise DomainError(f"G_p = {form.G_p!r} <= 0: exit is not subsonic")
    dk = sens.dkappa_dts
    dB = float(sens.int_Y[-1])
    dp = (dB - form.G_kappa * dk) / form.G_p
    X_T = float(sens.X[-1])
    dp_direct = gam * kap * exit_.rho ** (gam - 1.0) * X_T + exit_.rho**gam * dk
    dB_alg = form.G_p * dp_direct + form.G_kappa * dk
    return PressureSensitivity(
        dp_dts=dp,
        dB_dts=dB,
        dB_dts_algebraic=dB_alg,
        dp_dts_direct=dp_direct,
        G_p=form.G_p,
        G_kappa=form.G_kappa,
        dkappa_dts=dk,
        cross_check=abs(dB_alg - dB) / max(abs(dB), 1e-300),
    )


def pressure_sensitivity(down: SolutionProfile, sens: SensitivityProfile,
                         g: GasLaw | None = None, geom: Geometry | None = None) -> float:
    """``d p_+(T)/d t_s`` from the variational solution."""
    return pressure_sensitivity_terms(down, sens, g, geom).dp_dts


def sign_ledger(ic: JumpSensitivity, sens: SensitivityProfile,
                terms: PressureSensitivity) -> dict:
    """Each sign in the chain that makes the exit pressure decrease with t_s."""
    checks = {
        "dkappa_dts>0": ic.dkappa_dts > 0.0,
        "X0<0": ic.X0 < 0.0,
        "Y0<0": ic.Y0 < 0.0,
        "X<0": bool(np.all(sens.X < 0.0)),
        "Y<0": bool(np.all(sens.Y < 0.0)),
        "dB_dts<0": terms.dB_dts < 0.0,
        "G_kappa>0": terms.G_kappa > 0.0,
        "G_p>0": terms.G_p > 0.0,
        "dp_dts<0": terms.dp_dts < 0.0,
    }
    checks["all"] = all(checks.values())
    return checks
