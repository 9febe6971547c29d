"""Grids, finite differences, Poisson brackets, classical trajectories."""

import math

import numpy as np
import pytest

from hybridlab.phase_grid import (
    AnalyticHamiltonian,
    ClassicalPoint,
    Grid1D,
    GridField,
    derivative,
    diff_matrix,
    evolve_characteristics,
    poisson_bracket,
    read_csv,
    write_csv,
)


def periodic_grid(n=64, lo=0.0, hi=2.0 * math.pi):
    return Grid1D(n, lo, hi, periodic=True)


def open_grid(n=17, lo=0.0, hi=1.0):
    return Grid1D(n, lo, hi, periodic=False)


class TestGrid:
    def test_periodic_spacing_excludes_endpoint(self):
        g = periodic_grid(64)
        assert g.spacing == pytest.approx(2.0 * math.pi / 64)
        assert g.points[-1] == pytest.approx(2.0 * math.pi - g.spacing)

    def test_open_spacing_includes_endpoints(self):
        g = open_grid(9)
        assert g.spacing == pytest.approx(1.0 / 8.0)
        assert g.points[-1] == pytest.approx(1.0)

    def test_minimum_size_enforced(self):
        with pytest.raises(ValueError):
            Grid1D(7, 0.0, 1.0)

    def test_degenerate_interval_rejected(self):
        with pytest.raises(ValueError):
            Grid1D(16, 1.0, 1.0)

    def test_field_shape_checked(self):
        g = periodic_grid(16)
        with pytest.raises(ValueError):
            GridField((g,), np.zeros(15))

    def test_field_rejects_nan(self):
        g = periodic_grid(16)
        bad = np.zeros(16)
        bad[3] = np.nan
        with pytest.raises(ValueError):
            GridField((g,), bad)

    def test_integral_midpoint(self):
        g = periodic_grid(128)
        f = GridField.from_function((g,), lambda x: np.sin(x) ** 2)
        assert f.integral() == pytest.approx(math.pi, abs=1e-12)


class TestDerivatives:
    def test_periodic_first_derivative_of_sin(self):
        g = periodic_grid(64)
        f = GridField.from_function((g,), np.sin)
        df = derivative(f, order=1)
        assert np.max(np.abs(df.values - np.cos(g.points))) < 1e-5

    def test_periodic_orders_two_to_four(self):
        g = periodic_grid(128)
        f = GridField.from_function((g,), np.sin)
        x = g.points
        for order, exact, tol in (
            (2, -np.sin(x), 1e-6),
            (3, -np.cos(x), 1e-4),
            (4, np.sin(x), 1e-4),
        ):
            got = derivative(f, order=order).values
            assert np.max(np.abs(got - exact)) < tol, f"order {order}"

    def test_refinement_improves_fourth_order(self):
        errs = []
        for n in (32, 64):
            g = periodic_grid(n)
            f = GridField.from_function((g,), np.sin)
            errs.append(np.max(np.abs(derivative(f, order=1).values - np.cos(g.points))))
        assert errs[0] / errs[1] > 12.0  # ~16x for a 4th-order scheme

    def test_open_grid_exact_on_quartic(self):
        g = open_grid(17)
        x = g.points
        f = GridField((g,), x**4)
        assert np.max(np.abs(derivative(f, order=1).values - 4 * x**3)) < 1e-10
        assert np.max(np.abs(derivative(f, order=2).values - 12 * x**2)) < 1e-9
        assert np.max(np.abs(derivative(f, order=3).values - 24 * x)) < 1e-8
        assert np.max(np.abs(derivative(f, order=4).values - 24.0)) < 1e-7

    def test_derivative_of_constant_vanishes(self):
        g = periodic_grid(32)
        f = GridField((g,), np.full(32, 3.7))
        for order in (1, 2, 3, 4):
            assert np.max(np.abs(derivative(f, order=order).values)) < 1e-11

    def test_invalid_order_rejected(self):
        g = periodic_grid(16)
        f = GridField((g,), np.zeros(16))
        with pytest.raises(ValueError):
            derivative(f, order=5)

    def test_axis_selection_on_2d(self):
        gx = periodic_grid(32, 0.0, 2.0 * math.pi)
        gk = periodic_grid(48, 0.0, 2.0 * math.pi)
        f = GridField.from_function((gx, gk), lambda x, k: np.sin(x) * np.cos(k))
        d0 = derivative(f, axis=0).values
        d1 = derivative(f, axis=1).values
        xs, ks = np.meshgrid(gx.points, gk.points, indexing="ij")
        assert np.max(np.abs(d0 - np.cos(xs) * np.cos(ks))) < 1e-4
        assert np.max(np.abs(d1 + np.sin(xs) * np.sin(ks))) < 1e-4

    def test_diff_matrix_cached(self):
        g = periodic_grid(32)
        assert diff_matrix(g, 1) is diff_matrix(g, 1)


class TestPoissonBracket:
    def grids(self):
        gx = Grid1D(16, -1.0, 1.0, periodic=False)
        gk = Grid1D(16, -1.0, 1.0, periodic=False)
        return gx, gk

    def test_canonical_pair(self):
        gx, gk = self.grids()
        xs, ks = np.meshgrid(gx.points, gk.points, indexing="ij")
        x_field = GridField((gx, gk), xs)
        k_field = GridField((gx, gk), ks)
        pb = poisson_bracket(x_field, k_field)
        assert np.max(np.abs(pb.values - 1.0)) < 1e-11

    def test_polynomial_bracket(self):
        gx, gk = self.grids()
        xs, ks = np.meshgrid(gx.points, gk.points, indexing="ij")
        a = GridField((gx, gk), xs * ks)
        b = GridField((gx, gk), xs**2)
        pb = poisson_bracket(a, b)
        assert np.max(np.abs(pb.values + 2.0 * xs**2)) < 1e-10

    def test_antisymmetry_is_bitwise(self):
        gx, gk = self.grids()
        xs, ks = np.meshgrid(gx.points, gk.points, indexing="ij")
        a = GridField((gx, gk), np.sin(xs) * ks)
        b = GridField((gx, gk), xs**2 + np.cos(ks))
        ab = poisson_bracket(a, b).values
        ba = poisson_bracket(b, a).values
        assert np.array_equal(ab, -ba)

    def test_odd_axis_count_rejected(self):
        g = periodic_grid(16)
        f = GridField((g,), np.zeros(16))
        with pytest.raises(ValueError):
            poisson_bracket(f, f)


class TestCharacteristics:
    def harmonic(self):
        return AnalyticHamiltonian(
            value=lambda x, k: 0.5 * float(x @ x + k @ k),
            grad_x=lambda x, k: x,
            grad_k=lambda x, k: k,
        )

    def test_quarter_period_rotation(self):
        h = self.harmonic()
        start = [(ClassicalPoint([1.0], [0.0]), 1.0)]
        steps = 1000
        out = evolve_characteristics(start, h, dt=math.pi / 2 / steps, steps=steps)
        point, weight = out[0]
        assert weight == 1.0
        assert point.x[0] == pytest.approx(0.0, abs=1e-7)
        assert point.k[0] == pytest.approx(-1.0, abs=1e-7)

    def test_energy_drift_small(self):
        h = self.harmonic()
        start = [(ClassicalPoint([1.0], [0.5]), 1.0)]
        out = evolve_characteristics(start, h, dt=0.01, steps=1000)
        point, _ = out[0]
        e0 = h.value(np.array([1.0]), np.array([0.5]))
        e1 = h.value(point.x, point.k)
        assert abs(e1 - e0) < 1e-9

    def test_rk4_convergence_order(self):
        h = self.harmonic()
        errs = []
        for steps in (50, 100):
            out = evolve_characteristics(
                [(ClassicalPoint([1.0], [0.0]), 1.0)], h, dt=1.0 / steps, steps=steps)
            point, _ = out[0]
            errs.append(abs(point.x[0] - math.cos(1.0)))
        assert errs[0] / errs[1] > 12.0

    def test_point_validation(self):
        with pytest.raises(ValueError):
            ClassicalPoint([1.0, 2.0], [0.0])
        with pytest.raises(ValueError):
            ClassicalPoint([np.nan], [0.0])


class TestCsvRoundTrip:
    def test_real_field_roundtrip_exact(self, tmp_path):
        g = periodic_grid(16)
        f = GridField.from_function((g,), lambda x: np.sin(3 * x) / 7.0)
        path = tmp_path / "field.csv"
        write_csv(f, path)
        back = read_csv(path, (g,))
        assert np.array_equal(back.values, f.values)

    def test_complex_field_roundtrip_exact(self, tmp_path):
        g = periodic_grid(16)
        vals = np.exp(1j * g.points) / 3.0
        f = GridField((g,), vals)
        path = tmp_path / "cfield.csv"
        write_csv(f, path)
        back = read_csv(path, (g,))
        assert np.array_equal(back.values, f.values)

    def test_deterministic_bytes(self, tmp_path):
        gx = periodic_grid(8)
        gk = periodic_grid(8)
        f = GridField.from_function((gx, gk), lambda x, k: np.cos(x) * np.sin(k))
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(f, p1)
        write_csv(f, p2)
        assert p1.read_bytes() == p2.read_bytes()
