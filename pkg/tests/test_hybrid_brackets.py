"""Hybrid bracket algebra: reductions, defect meters, two-sector no-go."""

import json
import math

import numpy as np
import pytest

from hybridlab.hilbert import PAULI_X, PAULI_Y, PAULI_Z, Operator, identity
from hybridlab.hybrid_brackets import (
    BracketDefectReport,
    HybridObservable,
    aleksandrov_bracket,
    max_operator_norm,
    measure_defects,
    nogo_identity_defect,
    operator_norm_field,
    write_defect_report,
)
from hybridlab.phase_grid import Grid1D, GridField, poisson_bracket


def phase_grids(n=16):
    gx = Grid1D(n, -1.0, 1.0, periodic=False)
    gk = Grid1D(n, -1.0, 1.0, periodic=False)
    return (gx, gk)


def mesh(grids):
    return np.meshgrid(*[g.points for g in grids], indexing="ij")


class TestHybridObservable:
    def test_from_scalar_shape(self):
        grids = phase_grids()
        obs = HybridObservable.from_scalar(grids, lambda x, k: x * k, PAULI_Z)
        assert obs.values.shape == (16, 16, 2, 2)
        assert obs.dim == 2
        assert obs.dof == 1

    def test_odd_axis_count_rejected(self):
        g = Grid1D(16, -1.0, 1.0, periodic=False)
        with pytest.raises(ValueError):
            HybridObservable((g,), np.zeros((16, 2, 2)))

    def test_hermitian_flag_enforced(self):
        grids = phase_grids()
        bad = np.zeros((16, 16, 2, 2), dtype=complex)
        bad[..., 0, 1] = 1.0  # upper triangular, not hermitian
        with pytest.raises(ValueError):
            HybridObservable(grids, bad)
        HybridObservable(grids, bad, hermitian=False)  # allowed when flagged

    def test_shape_mismatch_rejected(self):
        grids = phase_grids()
        with pytest.raises(ValueError):
            HybridObservable(grids, np.zeros((16, 15, 2, 2)))

    def test_product_is_not_hermitian(self):
        grids = phase_grids()
        a = HybridObservable.constant(grids, PAULI_X)
        b = HybridObservable.constant(grids, PAULI_Y)
        assert not a.matmul(b).hermitian


class TestBracketReductions:
    def test_classical_inputs_reduce_to_poisson_bracket(self):
        grids = phase_grids()
        xs, ks = mesh(grids)
        a = HybridObservable.from_scalar(grids, lambda x, k: x**2, identity(2))
        b = HybridObservable.from_scalar(grids, lambda x, k: x * k, identity(2))
        got = aleksandrov_bracket(a, b, hbar=1.0)
        ref = poisson_bracket(GridField(grids, xs**2), GridField(grids, xs * ks))
        for i in range(2):
            assert np.max(np.abs(got.values[..., i, i].real - ref.values)) < 1e-10
        assert np.max(np.abs(got.values[..., 0, 1])) < 1e-10

    def test_constant_inputs_reduce_to_scaled_commutator(self):
        grids = phase_grids()
        a = HybridObservable.constant(grids, PAULI_X)
        b = HybridObservable.constant(grids, PAULI_Y)
        got = aleksandrov_bracket(a, b, hbar=2.0)
        # [sx, sy]/(2i) = sz
        assert np.max(np.abs(got.values - PAULI_Z.entries)) < 1e-12

    def test_mixed_linear_example(self):
        grids = phase_grids()
        a = HybridObservable.from_scalar(grids, lambda x, k: x, PAULI_Z)
        b = HybridObservable.from_scalar(grids, lambda x, k: k, identity(2))
        got = aleksandrov_bracket(a, b, hbar=1.0)
        assert np.max(np.abs(got.values - PAULI_Z.entries)) < 1e-12

    def test_result_hermitian_for_hermitian_inputs(self):
        grids = phase_grids()
        a = HybridObservable.from_scalar(grids, lambda x, k: x**2 + k, PAULI_X)
        b = HybridObservable.from_scalar(grids, lambda x, k: x * k, PAULI_Y)
        got = aleksandrov_bracket(a, b, hbar=0.7)
        assert got.hermitian  # constructor validates pointwise hermiticity

    def test_grid_mismatch_rejected(self):
        a = HybridObservable.constant(phase_grids(16), PAULI_X)
        b = HybridObservable.constant(phase_grids(32), PAULI_Y)
        with pytest.raises(ValueError):
            aleksandrov_bracket(a, b, hbar=1.0)

    def test_zero_hbar_rejected(self):
        a = HybridObservable.constant(phase_grids(), PAULI_X)
        with pytest.raises(ValueError):
            aleksandrov_bracket(a, a, hbar=0.0)


class TestDefectMeters:
    def counterexample_triple(self):
        # A = x^2 sx, B = k sy, C = k sx: worked out symbolically, the
        # cyclic-triple field is 2 sy everywhere and the product-rule field
        # is -2 x k sy.
        grids = phase_grids()
        a = HybridObservable.from_scalar(grids, lambda x, k: x**2, PAULI_X)
        b = HybridObservable.from_scalar(grids, lambda x, k: k, PAULI_Y)
        c = HybridObservable.from_scalar(grids, lambda x, k: k, PAULI_X)
        return grids, a, b, c

    def test_classical_triple_has_no_defects(self):
        grids = phase_grids()
        a = HybridObservable.from_scalar(grids, lambda x, k: x**2, identity(2))
        b = HybridObservable.from_scalar(grids, lambda x, k: x * k, identity(2))
        c = HybridObservable.from_scalar(grids, lambda x, k: k**2, identity(2))
        report = measure_defects(a, b, c, hbar=1.0)
        assert report.antisymmetry_defect < 1e-12
        assert report.leibniz_defect < 1e-8
        assert report.jacobi_defect < 1e-8

    def test_constant_triple_has_no_defects(self):
        grids = phase_grids()
        a = HybridObservable.constant(grids, PAULI_X)
        b = HybridObservable.constant(grids, PAULI_Y)
        c = HybridObservable.constant(grids, PAULI_Z)
        report = measure_defects(a, b, c, hbar=1.0)
        assert report.antisymmetry_defect < 1e-12
        assert report.leibniz_defect < 1e-12
        assert report.jacobi_defect < 1e-12

    def test_counterexample_triple_defect_values(self):
        _, a, b, c = self.counterexample_triple()
        report = measure_defects(a, b, c, hbar=1.0)
        assert report.antisymmetry_defect < 1e-12
        assert report.leibniz_defect == pytest.approx(2.0, abs=1e-10)
        assert report.jacobi_defect == pytest.approx(2.0, abs=1e-10)
        assert report.leibniz_defect > 0.1
        assert report.jacobi_defect > 0.1

    def test_counterexample_jacobi_field_is_constant(self):
        grids, a, b, c = self.counterexample_triple()
        jac = (aleksandrov_bracket(a, aleksandrov_bracket(b, c, 1.0), 1.0)
               + aleksandrov_bracket(b, aleksandrov_bracket(c, a, 1.0), 1.0)
               + aleksandrov_bracket(c, aleksandrov_bracket(a, b, 1.0), 1.0))
        expected = 2.0 * PAULI_Y.entries
        assert np.max(np.abs(jac.values - expected)) < 1e-10

    def test_counterexample_leibniz_field_profile(self):
        grids, a, b, c = self.counterexample_triple()
        bc = b.matmul(c)
        field = (aleksandrov_bracket(a, bc, 1.0)
                 - aleksandrov_bracket(a, b, 1.0).matmul(c)
                 - b.matmul(aleksandrov_bracket(a, c, 1.0)))
        xs, ks = mesh(grids)
        norms = operator_norm_field(field).values
        assert np.max(np.abs(norms - np.abs(2.0 * xs * ks))) < 1e-10

    def test_intermediate_bracket_value(self):
        grids, a, b, _ = self.counterexample_triple()
        ab = aleksandrov_bracket(a, b, 1.0)
        xs, ks = mesh(grids)
        expected = (2.0 * xs**2 * ks)[..., np.newaxis, np.newaxis] * PAULI_Z.entries
        assert np.max(np.abs(ab.values - expected)) < 1e-10

    def test_report_validation(self):
        with pytest.raises(ValueError):
            BracketDefectReport(-1.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            BracketDefectReport(0.0, math.nan, 0.0)

    def test_json_roundtrip_and_determinism(self, tmp_path):
        report = BracketDefectReport(0.0, 1.0, 2.0)
        p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
        write_defect_report(report, p1)
        write_defect_report(report, p2)
        assert p1.read_bytes() == p2.read_bytes()
        data = json.loads(p1.read_text())
        assert data == {"antisymmetry_defect": 0.0,
                        "leibniz_defect": 1.0,
                        "jacobi_defect": 2.0}


def random_hermitian(rng, dim):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return Operator((m + m.conj().T) / 2)


class TestNoGoIdentity:
    def test_pauli_fixture_value(self):
        got = nogo_identity_defect(PAULI_X, PAULI_Y, PAULI_X, PAULI_Y,
                                   hbar1=1.0, hbar2=2.0)
        # |1 - 1/2| * ||2i sz|| * ||2i sz|| = 2
        assert got == pytest.approx(2.0, abs=1e-12)

    def test_equal_hbar_vanishes_for_random_quadruples(self):
        rng = np.random.default_rng(20240817)
        for _ in range(100):
            dim1 = int(rng.integers(2, 5))
            dim2 = int(rng.integers(2, 5))
            ops1 = [random_hermitian(rng, dim1) for _ in range(2)]
            ops2 = [random_hermitian(rng, dim2) for _ in range(2)]
            hbar = float(rng.uniform(0.1, 3.0))
            defect = nogo_identity_defect(ops1[0], ops1[1], ops2[0], ops2[1],
                                          hbar1=hbar, hbar2=hbar)
            assert defect < 1e-12

    def test_vanishing_commutator_gives_zero(self):
        assert nogo_identity_defect(identity(2), identity(2), PAULI_X, PAULI_Y,
                                    hbar1=1.0, hbar2=2.0) == 0.0

    def test_linear_scaling_in_inverse_hbar_gap(self):
        rng = np.random.default_rng(7)
        a1, b1 = random_hermitian(rng, 3), random_hermitian(rng, 3)
        a2, b2 = random_hermitian(rng, 2), random_hermitian(rng, 2)
        ratios = []
        for hbar2 in (2.0, 4.0, 8.0):
            defect = nogo_identity_defect(a1, b1, a2, b2, hbar1=1.0, hbar2=hbar2)
            ratios.append(defect / abs(1.0 - 1.0 / hbar2))
        assert ratios[0] == pytest.approx(ratios[1], rel=1e-12)
        assert ratios[1] == pytest.approx(ratios[2], rel=1e-12)

    def test_zero_hbar_rejected(self):
        with pytest.raises(ValueError):
            nogo_identity_defect(PAULI_X, PAULI_Y, PAULI_X, PAULI_Y,
                                 hbar1=0.0, hbar2=1.0)

    def test_non_hermitian_rejected(self):
        bad = Operator(np.array([[0.0, 1.0], [0.0, 0.0]]), hermitian=False)
        with pytest.raises(ValueError):
            nogo_identity_defect(bad, PAULI_Y, PAULI_X, PAULI_Y, 1.0, 2.0)


class TestNormHelpers:
    def test_norm_field_values(self):
        grids = phase_grids()
        obs = HybridObservable.from_scalar(grids, lambda x, k: x, PAULI_X)
        xs, _ = mesh(grids)
        norms = operator_norm_field(obs).values
        assert np.allclose(norms, np.abs(xs), atol=1e-13)

    def test_max_norm(self):
        grids = phase_grids()
        obs = HybridObservable.from_scalar(grids, lambda x, k: x * k, PAULI_Z)
        assert max_operator_norm(obs) == pytest.approx(1.0, abs=1e-13)
