import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epshock.config import ProblemConfig
from epshock.errors import ConfigError
from epshock.gas import BackgroundCharge

BASE = {"gamma": 2.0, "r0": 1.0, "r1": 0.5, "rho0": 1.0, "u0": 2.0, "p0": 0.5, "E0": 5.0,
        "b.constant": 1.0}


def test_json_round_trip():
    cfg = ProblemConfig.loads(json.dumps(BASE))
    again = ProblemConfig.loads(cfg.dumps())
    assert again == cfg
    assert again.to_flat() == cfg.to_flat()


def test_key_value_format():
    text = """
    # certified annulus
    gamma = 2.0
    r0 = 1.0
    r1 = 0.5
    rho0 = 1.0
    u0 = 2.0
    p0 = 0.5
    E0 = 5.0
    b.table = [[0.0, 1.0], [0.5, 1.0]]   # flat table
    p_ex = 12.0
    seed = 7
    """
    cfg = ProblemConfig.loads(text)
    assert cfg.b(0.25) == 1.0 and cfg.b.knots is not None
    assert cfg.p_ex == 12.0 and cfg.seed == 7
    assert ProblemConfig.loads(cfg.dumps()) == cfg


def test_defaults():
    cfg = ProblemConfig.loads(json.dumps(BASE))
    assert cfg.rtol == 1e-10 and cfg.atol == 1e-12 and cfg.sonic_guard == 1e-6
    assert cfg.seed == 0 and cfg.n_grid == 21
    assert cfg.T == 0.5
    assert cfg.law.kappa == 0.5
    assert cfg.b.b0 == 1.0


def test_explicit_b0():
    cfg = ProblemConfig.loads(json.dumps({**BASE, "b0": 2.0}))
    assert cfg.b.b0 == 2.0
    assert ProblemConfig.loads(cfg.dumps()).b.b0 == 2.0


@pytest.mark.parametrize("change", [
    {"gamma": 1.0},
    {"r1": 2.0},
    {"rho0": -1.0},
    {"u0": 0.5},          # subsonic entrance
    {"E0": float("inf")},
    {"E0": "five"},
    {"rtol": 0.1},
    {"p_ex": -1.0},
    {"n_grid": 1},
    {"sonic_guard": 0.0},
    {"bogus": 1},
])
def test_invalid(change):
    flat = {**BASE, **change}
    with pytest.raises(ConfigError):
        ProblemConfig.from_flat(flat)


def test_missing_and_duplicate_charge():
    flat = dict(BASE)
    del flat["E0"]
    with pytest.raises(ConfigError):
        ProblemConfig.from_flat(flat)
    with pytest.raises(ConfigError):
        ProblemConfig.from_flat({**BASE, "b.table": [[0, 1]]})
    flat = dict(BASE)
    del flat["b.constant"]
    with pytest.raises(ConfigError):
        ProblemConfig.from_flat(flat)


def test_bad_text():
    with pytest.raises(ConfigError):
        ProblemConfig.loads("gamma 2")
    with pytest.raises(ConfigError):
        ProblemConfig.loads("gamma = two")
    with pytest.raises(ConfigError):
        ProblemConfig.loads("[1, 2]")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        ProblemConfig.load(tmp_path / "nope.cfg")


def test_replace():
    cfg = ProblemConfig.loads(json.dumps(BASE))
    assert cfg.replace(E0=6.0).E0 == 6.0
    assert cfg.E0 == 5.0


@settings(max_examples=100, deadline=None)
@given(
    E0=st.floats(-10.0, 10.0),
    u0=st.floats(1.5, 5.0),
    b=st.floats(0.1, 3.0),
    seed=st.integers(0, 2**31),
)
def test_echo_round_trip_property(E0, u0, b, seed):
    cfg = ProblemConfig(gamma=2.0, r0=1.0, r1=0.5, rho0=1.0, u0=u0, p0=0.5, E0=E0,
                        b=BackgroundCharge.from_constant(b), seed=seed)
    assert ProblemConfig.loads(cfg.dumps()) == cfg
