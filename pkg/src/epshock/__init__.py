"""Radial transonic shocks for steady Euler-Poisson flow in a convergent annular nozzle.

Supersonic flow enters at ``r = r0``; a circular shock at ``r0 - t_s`` turns
it subsonic.  The package integrates both smooth branches, applies the jump,
maps the shock location to the exit pressure and inverts that map.
"""

__version__ = "0.1.0"

from .config import ProblemConfig
from .errors import (
    ConfigError,
    DomainError,
    DownstreamChokedError,
    EPShockError,
    IntegrationError,
    NonMonotoneMapError,
    NotSupersonicError,
    OutOfRangeError,
    OutOfSpanError,
    SonicDegeneracyError,
    UpstreamSonicError,
)
from .flow import (
    Certificates,
    SolutionProfile,
    check_pineq,
    compute_certificates,
    solve_downstream,
    solve_upstream,
)
from .gas import (
    BackgroundCharge,
    ConservedInvariants,
    FlowState,
    GasLaw,
    Geometry,
    bernoulli,
    bernoulli_exit_form,
    mach_squared,
)
from .jump import JumpRecord, apply_jump, check_admissibility, entropy_map_f
from .matcher import (
    ExitPressureMap,
    ShockSolution,
    bernoulli_exit_identities,
    exit_pressure_map,
    forward_solve,
    match_exit_pressure,
)
from .ode import ToleranceConfig, dense_eval, integrate
from .sensitivity import (
    SensitivityProfile,
    integrate_sensitivity,
    jump_sensitivity_ic,
    pressure_sensitivity,
    sign_ledger,
)

__all__ = [
    "BackgroundCharge", "Certificates", "ConfigError", "ConservedInvariants", "DomainError",
    "DownstreamChokedError", "EPShockError", "ExitPressureMap", "FlowState", "GasLaw",
    "Geometry", "IntegrationError", "JumpRecord", "NonMonotoneMapError", "NotSupersonicError",
    "OutOfRangeError", "OutOfSpanError", "ProblemConfig", "SensitivityProfile",
    "ShockSolution", "SolutionProfile", "SonicDegeneracyError", "ToleranceConfig",
    "UpstreamSonicError", "apply_jump", "bernoulli", "bernoulli_exit_form",
    "bernoulli_exit_identities", "check_admissibility", "check_pineq", "compute_certificates",
    "dense_eval", "entropy_map_f", "exit_pressure_map", "forward_solve", "integrate",
    "integrate_sensitivity", "jump_sensitivity_ic", "mach_squared", "match_exit_pressure",
    "pressure_sensitivity", "sign_ledger", "solve_downstream", "solve_upstream",
]
