import numpy as np
import pytest

from epshock.errors import DomainError, DownstreamChokedError, NonMonotoneMapError, OutOfRangeError
from epshock.jump import check_admissibility
from epshock.matcher import (
    bernoulli_exit_identities,
    exit_pressure_map,
    forward_solve,
    map_grid,
    match_exit_pressure,
)


@pytest.fixture(scope="module")
def cmap(certified):
    return exit_pressure_map(certified)


class TestForward:
    def test_shock_at_entrance(self, certified):
        sol = forward_solve(certified, 0.0)
        assert len(sol.upstream) == 1
        assert sol.jump.upstream == certified.entrance
        assert sol.downstream.t[0] == 0.0 and sol.downstream.t[-1] == certified.T

    def test_composed_profile(self, certified):
        sol = forward_solve(certified, 0.2)
        assert sol.upstream.t[-1] == 0.2 == sol.downstream.t[0]
        assert sol.exit_pressure == sol.downstream.p[-1]
        assert sol.exit_pressure > sol.jump.downstream.p
        assert sol.downstream.density_monotone
        assert np.all(np.diff(sol.downstream.M2) < 0.0)
        r = check_admissibility(sol.jump)
        assert r.admissible and r.transonic
        assert sol.dp_dts is None

    def test_exit_pressure_decreases(self, certified):
        h = 1e-3
        for t_s in (0.0, 0.1, 0.3):
            assert forward_solve(certified, t_s).exit_pressure > forward_solve(
                certified, t_s + h).exit_pressure

    @pytest.mark.parametrize("t_s", [-0.1, 0.5, 0.7, float("nan")])
    def test_out_of_span(self, certified, t_s):
        with pytest.raises(DomainError):
            forward_solve(certified, t_s)

    def test_choking_reports_location(self, reference):
        with pytest.raises(DownstreamChokedError) as info:
            forward_solve(reference(0.5), 0.0)
        assert info.value.guard == "sonic"
        assert 0.0 < info.value.t_stop < 0.5

    def test_identities(self, certified):
        for t_s in (0.0, 0.2, 0.45, 0.5 * (1 - 1e-8)):
            rep = bernoulli_exit_identities(forward_solve(certified, t_s))
            assert rep.ok
            assert rep.exit_form_residual <= 1e-10
            assert rep.G_p == pytest.approx(rep.G_p_expected, rel=1e-10)

    def test_identity_near_exit_is_trivial(self, certified):
        rep = bernoulli_exit_identities(forward_solve(certified, certified.T * (1 - 1e-8)))
        assert rep.downstream_field_residual < 1e-12


class TestMap:
    def test_certified_map_is_monotone(self, cmap):
        assert cmap.monotone_decreasing
        assert not cmap.failures
        assert len(cmap.grid) == 21
        p = cmap.p
        assert np.all(np.diff(p) < 0.0)
        assert cmap.range == (p[-1], p[0])
        assert cmap.max_inversion < -1e-10

    def test_grid(self, certified):
        g = map_grid(certified, 5)
        assert g[0] == 0.0 and g[-1] == pytest.approx(certified.T * (1 - 1e-8), rel=1e-15)
        assert np.all(np.diff(g) > 0.0)
        with pytest.raises(DomainError):
            map_grid(certified, 1)

    def test_two_point_map(self, certified, cmap):
        m = exit_pressure_map(certified, 2)
        assert len(m.grid) == 2
        assert m.range == cmap.range

    def test_refinement(self, certified, cmap):
        m = exit_pressure_map(certified, 41)
        assert m.monotone_decreasing
        for a, b in zip(m.range, cmap.range):
            assert abs(a - b) <= certified.rtol * b

    def test_parallel_matches_serial(self, certified, cmap):
        m = exit_pressure_map(certified, workers=2)
        assert [pt.p_exit for pt in m.grid] == [pt.p_exit for pt in cmap.grid]

    def test_failures_are_reported(self, reference):
        m = exit_pressure_map(reference(0.5), 11)
        assert m.failures
        assert not m.monotone_decreasing
        pt = m.failures[0]
        assert pt.p_exit is None and pt.guard == "sonic" and pt.t_stop is not None
        assert "DownstreamChokedError" in pt.error

    def test_sensitivity_sign_matches_slope(self, certified, cmap):
        slopes = np.diff(cmap.p) / np.diff(cmap.t)
        assert np.all(slopes < 0.0)
        for t in cmap.t[:-1]:
            assert forward_solve(certified, float(t), sensitivity=True).dp_dts < 0.0

    def test_uncertified_map_is_not_monotone(self, reference):
        m = exit_pressure_map(reference(1.0))
        assert not m.failures
        assert not m.monotone_decreasing
        assert m.max_inversion > 0.0


class TestMatch:
    def test_round_trip(self, certified, cmap):
        for t_star in (0.0123, 0.2, 0.37):
            p_ex = forward_solve(certified, t_star).exit_pressure
            sol = match_exit_pressure(certified, p_ex, pmap=cmap)
            assert abs(sol.t_s - t_star) <= 1e-8 * certified.T
            assert bernoulli_exit_identities(sol).ok
            m, k = sol.downstream.conservation_residuals()
            assert m <= 1e-8 and k <= 1e-8

    def test_uses_config_p_ex(self, certified, cmap):
        p_ex = forward_solve(certified, 0.25).exit_pressure
        sol = match_exit_pressure(certified.replace(p_ex=p_ex), pmap=cmap)
        assert abs(sol.t_s - 0.25) <= 1e-8 * certified.T

    def test_out_of_range(self, certified, cmap):
        with pytest.raises(OutOfRangeError) as info:
            match_exit_pressure(certified, 10 * cmap.range[1], pmap=cmap)
        assert info.value.range == cmap.range
        with pytest.raises(OutOfRangeError):
            match_exit_pressure(certified, 0.5 * cmap.range[0], pmap=cmap)

    def test_endpoints(self, certified, cmap):
        sol = match_exit_pressure(certified, cmap.range[1], pmap=cmap)
        assert sol.t_s == 0.0
        sol = match_exit_pressure(certified, cmap.range[0], pmap=cmap)
        assert sol.t_s == pytest.approx(certified.T, rel=1e-7)

    def test_requires_p_ex(self, certified, cmap):
        with pytest.raises(DomainError):
            match_exit_pressure(certified, pmap=cmap)

    def test_refuses_non_monotone(self, reference):
        cfg = reference(1.0)
        with pytest.raises(NonMonotoneMapError):
            match_exit_pressure(cfg, 5.6)

    def test_force_warns(self, reference):
        cfg = reference(1.0)
        with pytest.warns(RuntimeWarning):
            sol = match_exit_pressure(cfg, 5.6, force=True)
        assert sol.exit_pressure == pytest.approx(5.6, rel=1e-8)
