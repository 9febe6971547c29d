"""Tests for classical mixtures, Taylor jets, and the t^4 comparison."""

import numpy as np
import pytest

from hybridlab.consistency import (
    AnsatzComponent,
    ClassicalMixture,
    equal_rho_mixtures,
    invariant,
    noninvariant_sum,
    t4_breakdown,
    taylor_expand,
)
from hybridlab.errors import ValidationError
from hybridlab.expressions import parse_expression
from hybridlab.phase_grid import Grid1D, GridField

N_B_CLOSED = 12.0 / 49.0  # -2 e^2 g' g'' / (1 - e^2 g^2) - 2 e^4 g g'^3 / (...)^2 at pi/4
EPS = 0.5


def _grid(n=256):
    return Grid1D(n, -np.pi, np.pi, periodic=True)


def _pair(n=256):
    return equal_rho_mixtures("0", "sin(x)", EPS, grid=_grid(n))


class TestClassicalMixture:
    def test_weights_must_sum_to_one(self):
        grid = _grid(64)
        field = GridField((grid,), np.ones(grid.n))
        zero = GridField((grid,), np.zeros(grid.n))
        with pytest.raises(ValidationError):
            ClassicalMixture(((0.6, field, zero), (0.6, field, zero)))

    def test_negative_weight_rejected(self):
        grid = _grid(64)
        field = GridField((grid,), np.ones(grid.n))
        zero = GridField((grid,), np.zeros(grid.n))
        with pytest.raises(ValidationError):
            ClassicalMixture(((-0.5, field, zero), (1.5, field, zero)))

    def test_negative_density_rejected(self):
        grid = _grid(64)
        zero = GridField((grid,), np.zeros(grid.n))
        dipped = GridField((grid,), np.cos(grid.points))
        with pytest.raises(ValidationError):
            ClassicalMixture(((1.0, dipped, zero),))

    def test_components_must_share_grid(self):
        g1, g2 = _grid(64), _grid(128)
        zero1 = GridField((g1,), np.zeros(g1.n))
        zero2 = GridField((g2,), np.zeros(g2.n))
        one1 = GridField((g1,), np.ones(g1.n))
        one2 = GridField((g2,), np.ones(g2.n))
        with pytest.raises(ValidationError):
            ClassicalMixture(((0.5, one1, zero1), (0.5, one2, zero2)))

    def test_equal_rho_pair_shares_total_density(self):
        mix_a, mix_b = _pair()
        gap = np.max(np.abs(mix_a.total_density().values - mix_b.total_density().values))
        assert gap < 1e-14

    def test_equal_rho_rejects_modulation_reaching_one(self):
        with pytest.raises(ValidationError):
            equal_rho_mixtures("0", "sin(x)", 1.0)

    def test_component_masses_reported(self):
        mix_a, mix_b = _pair()
        assert mix_a.component_masses() == pytest.approx([2.0 * np.pi])
        assert mix_b.component_masses() == pytest.approx([2.0 * np.pi] * 2)


class TestInvariants:
    def test_order_bounds_enforced(self):
        mix_a, _ = _pair(64)
        with pytest.raises(ValidationError):
            invariant(mix_a, 5, 0)
        with pytest.raises(ValidationError):
            invariant(mix_a, 0, 4)
        with pytest.raises(ValidationError):
            invariant(mix_a, -1, 0)

    def test_full_battery_agrees_on_equal_densities(self):
        mix_a, mix_b = _pair(64)
        worst = 0.0
        for space_order in range(5):
            for momentum_power in range(4):
                a = invariant(mix_a, space_order, momentum_power).values
                b = invariant(mix_b, space_order, momentum_power).values
                worst = max(worst, float(np.max(np.abs(a - b))))
        assert worst < 1e-10

    def test_third_derivative_matches_symbolic_oracle(self):
        # single component P = exp(sin x): D^3 P from the expression engine
        grid = _grid()
        profile = parse_expression("exp(sin(x))")
        third = profile.diff("x").diff("x").diff("x")
        expected = np.array([third.evaluate({"x": x}) for x in grid.points])
        zero = GridField((grid,), np.zeros(grid.n))
        density = GridField((grid,), np.exp(np.sin(grid.points)))
        mix = ClassicalMixture(((1.0, density, zero),))
        got = invariant(mix, 3, 0).values
        assert np.max(np.abs(got - expected)) < 1e-5

    def test_momentum_weighted_invariant_uses_action(self):
        # P = 1, S = sin x: first moment is cos x, derivative battery sees it
        grid = _grid()
        density = GridField((grid,), np.full(grid.n, 1.0))
        action = GridField((grid,), np.sin(grid.points))
        mix = ClassicalMixture(((1.0, density, action),))
        got = invariant(mix, 1, 1).values
        expected = -np.sin(grid.points)  # d/dx cos x
        assert np.max(np.abs(got - expected)) < 1e-6

    def test_log_derivative_sum_distinguishes_equal_densities(self):
        mix_a, mix_b = _pair()
        n_a = noninvariant_sum(mix_a).values
        n_b = noninvariant_sum(mix_b).values
        assert np.max(np.abs(n_a)) < 1e-10
        assert np.max(np.abs(n_b - n_a)) > 0.1

    def test_log_derivative_sum_closed_form(self):
        _, mix_b = _pair()
        grid = mix_b.grid
        index = int(np.argmin(np.abs(grid.points - np.pi / 4.0)))
        assert abs(grid.points[index] - np.pi / 4.0) < 1e-12
        value = noninvariant_sum(mix_b).values[index]
        assert value == pytest.approx(N_B_CLOSED, abs=1e-5)

    def test_log_derivative_sum_needs_positive_density(self):
        grid = _grid(64)
        zero = GridField((grid,), np.zeros(grid.n))
        touching = GridField((grid,), 1.0 + np.sin(grid.points))
        mix = ClassicalMixture(((1.0, touching, zero),))
        with pytest.raises(ValidationError):
            noninvariant_sum(mix)


class TestTaylorJets:
    def test_order_capped_at_four(self):
        comp = AnsatzComponent(log_profile="x^2")
        with pytest.raises(ValidationError):
            taylor_expand(comp, 5, [(1.0, 0.0)])
        with pytest.raises(ValidationError):
            taylor_expand(comp, -1, [(1.0, 0.0)])

    def test_profile_must_depend_only_on_x(self):
        with pytest.raises(ValidationError):
            AnsatzComponent(log_profile="x + q")

    def test_points_shape_checked(self):
        comp = AnsatzComponent(log_profile="x^2")
        with pytest.raises(ValidationError):
            taylor_expand(comp, 2, [(1.0, 0.0, 3.0)])

    def test_odd_log_and_even_action_orders_vanish(self):
        comp = AnsatzComponent(log_profile="sin(x)", kappa=0.7, coupling=1.3,
                               mass_classical=2.0, mass_quantum=0.5, hbar=1.1)
        table = taylor_expand(comp, 4, [(0.3, -0.4), (1.1, 0.8)])
        for order in (1, 3):
            assert np.max(np.abs(table.log_derivative(order))) < 1e-10
        for order in (0, 2, 4):
            assert np.max(np.abs(table.action_derivative(order))) < 1e-10

    def test_second_log_derivative_oracle(self):
        # d^2 L/dt^2 = (v/M) l' q + (v kappa / m) x = 1 at (1, 0), unit constants
        comp = AnsatzComponent(log_profile="x^2")
        table = taylor_expand(comp, 2, [(1.0, 0.0)])
        assert table.log_derivative(2)[0] == pytest.approx(1.0, abs=1e-12)

    def test_first_action_derivative_oracle(self):
        # dS/dt = hbar^2 kappa^2 / (8 m) - v x q = 0.125 at (1, 0), unit constants
        comp = AnsatzComponent(log_profile="x^2")
        table = taylor_expand(comp, 1, [(1.0, 0.0)])
        assert table.action_derivative(1)[0] == pytest.approx(0.125, abs=1e-12)

    def test_third_action_derivative_oracle(self):
        # d^3 S/dt^3 = (hbar^2 kappa v / 4 m M) l' - (v^2/M) q^2 - (v^2/m) x^2
        comp = AnsatzComponent(log_profile="x^2")
        table = taylor_expand(comp, 3, [(1.0, 1.0)])
        assert table.action_derivative(3)[0] == pytest.approx(-1.5, abs=1e-12)

    def test_third_action_derivative_general_constants(self):
        kappa, v, mass_c, mass_q, hbar = 0.7, 1.3, 2.0, 0.5, 1.1
        x, q = 0.3, -0.4
        comp = AnsatzComponent(log_profile="sin(x)", kappa=kappa, coupling=v,
                               mass_classical=mass_c, mass_quantum=mass_q, hbar=hbar)
        table = taylor_expand(comp, 3, [(x, q)])
        expected = (hbar**2 * kappa * v / (4.0 * mass_q * mass_c)) * np.cos(x)
        expected -= (v**2 / mass_c) * q**2
        expected -= (v**2 / mass_q) * x**2
        assert table.action_derivative(3)[0] == pytest.approx(expected, rel=1e-12)

    def test_hbar_split_is_exact(self):
        comp = AnsatzComponent(log_profile="x^2", kappa=0.9, mass_quantum=0.8)
        table = taylor_expand(comp, 1, [(1.0, 1.0)])
        assert table.action_part(1, 0)[0] == pytest.approx(-1.0, abs=1e-14)
        assert table.action_part(1, 2)[0] == pytest.approx(0.81 / 6.4, rel=1e-14)
        assert np.max(np.abs(table.action_part(1, 4))) == 0.0

    def test_hbar_override_recombines_parts(self):
        comp = AnsatzComponent(log_profile="sin(x)", kappa=0.7, hbar=1.3)
        table = taylor_expand(comp, 4, [(0.5, 0.2)])
        for order in (2, 4):
            zero_h = table.log_derivative(order, hbar=0.0)
            assert np.max(np.abs(zero_h - table.log_part(order, 0))) < 1e-14
            full = table.log_derivative(order)
            manual = sum(
                1.3**p * table.log_part(order, p) for p in (0, 2, 4, 6, 8)
            )
            assert np.max(np.abs(full - manual)) < 1e-12

    def test_masses_validated(self):
        with pytest.raises(ValidationError):
            AnsatzComponent(log_profile="x", mass_classical=0.0)
        with pytest.raises(ValidationError):
            AnsatzComponent(log_profile="x", hbar=-1.0)


class TestBreakdown:
    BRANCH_UP = "log(1 + 0.5 * sin(x))"
    BRANCH_DOWN = "log(1 - 0.5 * sin(x))"

    def _report(self, **kwargs):
        return t4_breakdown(
            [(1.0, "0")],
            [(0.5, self.BRANCH_UP), (0.5, self.BRANCH_DOWN)],
            points=[(np.pi / 4.0, 0.0)],
            **kwargs,
        )

    def test_precheck_passes_for_equal_densities(self):
        report = self._report()
        assert len(report.invariant_checks) == 20
        assert all(entry["passed"] for entry in report.invariant_checks)

    def test_precheck_rejects_unequal_densities(self):
        with pytest.raises(ValidationError):
            t4_breakdown(
                [(1.0, "0")],
                [(0.6, self.BRANCH_UP), (0.4, self.BRANCH_DOWN)],
                points=[(np.pi / 4.0, 0.0)],
            )

    def test_hbar0_parts_agree(self):
        report = self._report()
        assert np.max(np.abs(report.hbar0_difference)) < 1e-10

    def test_hbar2_difference_matches_closed_form(self):
        # coefficient of hbar^2 differs by -(kappa v / 4 m M^2) N_B(pi/4)
        report = self._report()
        assert report.hbar2_difference[0] == pytest.approx(-0.25 * N_B_CLOSED, abs=1e-8)

    def test_hbar2_difference_scales_with_constants(self):
        kappa, v, mass_c, mass_q = 2.0, 3.0, 2.0, 4.0
        report = self._report(
            kappa=kappa, coupling=v, mass_classical=mass_c, mass_quantum=mass_q
        )
        expected = -(kappa * v / (4.0 * mass_q * mass_c**2)) * N_B_CLOSED
        assert report.hbar2_difference[0] == pytest.approx(expected, abs=1e-8)

    def test_identical_mixtures_agree_in_both_parts(self):
        report = t4_breakdown(
            [(1.0, "0")],
            [(0.5, "0"), (0.5, "0")],
            points=[(np.pi / 4.0, 0.0)],
        )
        assert np.max(np.abs(report.hbar0_difference)) < 1e-12
        assert np.max(np.abs(report.hbar2_difference)) < 1e-12

    def test_report_serializes(self):
        report = self._report()
        payload = report.as_dict()
        assert set(payload) == {"invariant_checks", "hbar0_part", "hbar2_part", "points"}
        assert set(payload["hbar2_part"]) == {"first", "second", "difference"}
        assert len(payload["invariant_checks"]) == 20

    def test_empty_mixture_rejected(self):
        with pytest.raises(ValidationError):
            t4_breakdown([], [(1.0, "0")])
