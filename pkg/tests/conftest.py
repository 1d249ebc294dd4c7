import pytest

from epshock import BackgroundCharge, ProblemConfig

# gamma = 2 annulus with a strong entrance field; every shock location in
# [0, T) is certified (F_s >= beta1) and the map is strictly decreasing.
CERTIFIED = dict(gamma=2.0, r0=1.0, r1=0.5, rho0=1.0, u0=2.0, p0=0.5, E0=5.0)

# gamma = 1.4 reference entrance, M0^2 = 4; E0 is varied per test.
REFERENCE = dict(gamma=1.4, r0=1.0, r1=0.5, rho0=1.0, u0=2.0, p0=1 / 1.4)


def make_config(base, **kw):
    flat = dict(base)
    flat.update(kw)
    b = flat.pop("b", BackgroundCharge.from_constant(1.0))
    return ProblemConfig(b=b, **flat)


@pytest.fixture(scope="session")
def certified():
    return make_config(CERTIFIED)


@pytest.fixture
def reference():
    def build(E0=4.0, **kw):
        return make_config(REFERENCE, E0=E0, **kw)

    return build
