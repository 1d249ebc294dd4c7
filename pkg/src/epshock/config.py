"""Problem configuration: parsing, validation and canonical echo.

A config file is either a flat JSON object or ``key = value`` lines whose
values are JSON literals::

    gamma = 2.0
    r0 = 1.0
    r1 = 0.5
    rho0 = 1.0
    u0 = 2.0
    p0 = 0.5
    E0 = 5.0
    b.constant = 1.0
    # b.table = [[0.0, 1.0], [0.5, 1.2]]
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError, EPShockError
from .flow import ENTRANCE_MARGIN, entrance_law
from .gas import SONIC_GUARD, BackgroundCharge, FlowState, GasLaw, Geometry, mach_squared
from .ode import ToleranceConfig

_REAL_KEYS = ("gamma", "r0", "r1", "rho0", "u0", "p0", "E0")


@dataclass
class ProblemConfig:
    gamma: float
    r0: float
    r1: float
    rho0: float
    u0: float
    p0: float
    E0: float
    b: BackgroundCharge
    b0: float | None = None
    p_ex: float | None = None
    rtol: float = 1e-10
    atol: float = 1e-12
    sonic_guard: float = SONIC_GUARD
    tol_ts: float = 1e-10
    fd_step: float = 1e-5
    max_steps: int = 200_000
    n_grid: int = 21
    seed: int = 0

    def __post_init__(self):
        try:
            self.validate()
        except EPShockError as exc:
            raise ConfigError(str(exc)) from exc

    def validate(self):
        for k in _REAL_KEYS:
            v = getattr(self, k)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{k} must be a finite real number, got {v!r}")
        if self.b0 is not None and self.b.b0 != self.b0:
            self.b = BackgroundCharge(constant=self.b.constant, knots=self.b.knots, b0=self.b0)
        self.geometry
        law, ent = self.law, self.entrance
        ent.check()
        M02 = mach_squared(ent, law)
        if M02 < 1.0 + ENTRANCE_MARGIN:
            raise ConfigError(f"entrance must be supersonic, got M0^2={M02!r}")
        if self.p_ex is not None and not self.p_ex > 0.0:
            raise ConfigError("p_ex must be positive")
        self.tolerance  # validates rtol/atol
        if not (0.0 < self.sonic_guard < 1.0):
            raise ConfigError("sonic_guard must lie in (0, 1)")
        if not (0.0 < self.tol_ts < 1.0 and 0.0 < self.fd_step < 0.5):
            raise ConfigError("tol_ts and fd_step must be small positive fractions")
        if self.n_grid < 2:
            raise ConfigError("n_grid must be at least 2")

    @property
    def law(self) -> GasLaw:
        return entrance_law(self.gamma, FlowState(self.rho0, self.u0, self.p0, self.E0))

    @property
    def geometry(self) -> Geometry:
        return Geometry(self.r0, self.r1)

    @property
    def entrance(self) -> FlowState:
        return FlowState(self.rho0, self.u0, self.p0, self.E0)

    @property
    def tolerance(self) -> ToleranceConfig:
        return ToleranceConfig(rtol=self.rtol, atol=self.atol, max_steps=self.max_steps)

    @property
    def T(self) -> float:
        return self.r0 - self.r1

    def to_flat(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name == "b":
                out.update(self.b.as_config())
                continue
            v = getattr(self, f.name)
            if v is not None:
                out[f.name] = v
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_flat(), indent=2)

    def replace(self, **changes) -> "ProblemConfig":
        flat = self.to_flat()
        flat.update(changes)
        return ProblemConfig.from_flat(flat)

    @classmethod
    def from_flat(cls, flat: dict) -> "ProblemConfig":
        flat = dict(flat)
        has_c, has_t = "b.constant" in flat, "b.table" in flat
        if has_c == has_t:
            raise ConfigError("exactly one of b.constant or b.table is required")
        try:
            if has_c:
                b = BackgroundCharge.from_constant(flat.pop("b.constant"))
            else:
                b = BackgroundCharge.from_table(flat.pop("b.table"))
        except (EPShockError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad background charge: {exc}") from exc
        known = {f.name for f in fields(cls)} - {"b"}
        unknown = set(flat) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = [k for k in _REAL_KEYS if k not in flat]
        if missing:
            raise ConfigError(f"missing config keys: {missing}")
        try:
            return cls(b=b, **flat)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def loads(cls, text: str) -> "ProblemConfig":
        try:
            flat = json.loads(text)
        except json.JSONDecodeError:
            flat = _parse_lines(text)
        if not isinstance(flat, dict):
            raise ConfigError("config must be a flat key-value object")
        return cls.from_flat(flat)

    @classmethod
    def load(cls, path) -> "ProblemConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.loads(text)


def _parse_lines(text: str) -> dict:
    flat = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            flat[key] = json.loads(value)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
    return flat
