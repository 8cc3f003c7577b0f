"""CI transfer operators: stencils, exactness and harmonic structure."""

import numpy as np
import pytest

from pfasst_lfa.errors import ConsistencyError, DimensionError, RangeError, SizeError
from pfasst_lfa.linalg import dft_matrix
from pfasst_lfa.transfer import (
    build_ci_pair,
    check_restriction_condition,
    harmonic_diagonals,
    interweave,
    midpoint_generator,
    midpoint_stencil_points,
    node_propagation,
)


def test_interweave_alternates_rows():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[5.0, 6.0], [7.0, 8.0]])
    out = interweave(a, b)
    np.testing.assert_array_equal(out, [[1, 2], [5, 6], [3, 4], [7, 8]])
    with pytest.raises(DimensionError):
        interweave(a, np.zeros((3, 2)))


@pytest.mark.parametrize("degree,points", [(1, 2), (2, 2), (3, 6), (4, 6), (5, 8), (6, 8)])
def test_midpoint_stencil_width(degree, points):
    assert midpoint_stencil_points(degree) == points


def test_midpoint_stencil_rejects_bad_degree_and_size():
    with pytest.raises(RangeError):
        midpoint_stencil_points(0)
    with pytest.raises(SizeError):
        midpoint_generator(4, 6)  # 8-point stencil on a 4-point grid


@pytest.mark.parametrize("degree", [2, 6])
def test_midpoint_generator_weights_from_lagrange_oracle(degree):
    gen = midpoint_generator(32, degree)
    offsets = sorted(gen.stencil)
    weights = np.array([gen.stencil[o] for o in offsets])
    # oracle: Lagrange weights reproduce monomial values at the midpoint up
    # to the polynomial degree the stencil width supports
    for deg in range(min(degree, len(offsets) - 1) + 1):
        poly = np.array([float(o) ** deg for o in offsets])
        value = float(weights @ poly)
        assert value == pytest.approx(0.5**deg, abs=1e-10), deg
    assert weights.sum() == pytest.approx(1.0, abs=1e-12)
    # the degree-2 stencil is the plain midpoint average
    if degree == 2:
        np.testing.assert_allclose(weights, [0.5, 0.5])


def test_interpolation_reproduces_smooth_periodic_data():
    n = 64
    pair = build_ci_pair(n, interp_exactness=6)
    x_c = np.arange(n // 2) / (n // 2)
    x_f = np.arange(n) / n
    for k in (1, 2, 3):
        coarse = np.sin(2 * np.pi * k * x_c)
        fine = np.sin(2 * np.pi * k * x_f)
        err = np.max(np.abs(pair.interpolation @ coarse - fine))
        assert err < 40.0 * (2.0 * np.pi * k / n) ** 6  # interpolation error O(h^6)


def test_interpolation_even_rows_are_identity():
    pair = build_ci_pair(16)
    np.testing.assert_array_equal(pair.interpolation[0::2], np.eye(8))


def test_restriction_is_half_transposed_interpolation_of_its_generator():
    pair = build_ci_pair(16, restr_exactness=2)
    from pfasst_lfa.transfer import interweave as iw

    expected = 0.5 * iw(np.eye(8), pair.generator_restr.materialize()).T
    np.testing.assert_array_equal(pair.restriction, expected)
    # full weighting: restriction preserves constants
    np.testing.assert_allclose(pair.restriction @ np.ones(16), np.ones(8), atol=1e-13)


def test_build_ci_pair_needs_even_grid():
    with pytest.raises(RangeError):
        build_ci_pair(15)


def test_harmonic_diagonals_match_materialized_transform():
    n = 32
    pair = build_ci_pair(n)
    diags = harmonic_diagonals(pair, verify=True, tol=1e-12)  # raises on mismatch
    psi = dft_matrix(n)
    psi_c = dft_matrix(n // 2)
    t_int = psi.conj().T @ pair.interpolation @ psi_c
    k = np.arange(n // 2)
    np.testing.assert_allclose(t_int[k, k], diags.d, atol=1e-12)
    np.testing.assert_allclose(t_int[n // 2 + k, k], diags.d_hat, atol=1e-12)
    t_res = psi_c.conj().T @ pair.restriction @ psi
    np.testing.assert_allclose(t_res[k, k], 0.5 * diags.f, atol=1e-12)
    np.testing.assert_allclose(t_res[k, n // 2 + k], 0.5 * diags.f_hat, atol=1e-12)


def test_harmonic_diagonals_k0_pair():
    pair = build_ci_pair(16)
    diags = harmonic_diagonals(pair)
    vals = sorted([abs(diags.d[0]), abs(diags.d_hat[0])])
    assert vals[0] == pytest.approx(0.0, abs=1e-14)
    assert vals[1] == pytest.approx(np.sqrt(2.0), abs=1e-14)


def test_harmonic_diagonals_detect_tampering():
    pair = build_ci_pair(16)
    bad = pair.interpolation.copy()
    bad[1, 0] += 1e-6
    from dataclasses import replace

    with pytest.raises(ConsistencyError):
        harmonic_diagonals(replace(pair, interpolation=bad))


def test_node_propagation_copies_last_node():
    k = node_propagation(3)
    np.testing.assert_array_equal(k, [[0, 0, 1], [0, 0, 1], [0, 0, 1]])
    u = np.array([1.0, 2.0, 7.0])
    np.testing.assert_array_equal(k @ u, [7.0, 7.0, 7.0])


def test_restriction_condition_exact_for_spatial_coarsening():
    pair = build_ci_pair(16)
    ok, violation = check_restriction_condition(pair, m_nodes=3)
    assert ok
    assert np.max(np.abs(violation)) == 0.0


def test_restriction_condition_detects_temporal_coarsening():
    pair = build_ci_pair(16)
    broken = np.eye(3)
    broken[2, 2] = 0.25
    ok, violation = check_restriction_condition(pair, 3, temporal_restriction=broken)
    assert not ok
    assert np.max(np.abs(violation)) > 0.1
