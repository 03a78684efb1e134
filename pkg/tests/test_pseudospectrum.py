import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapspec import (LAMBDA_MINUS, annulus_clearance, grid_eval, in_structured_pseudospectrum,
                     least_singular_value, solve_quadratic, structured_witness)
from gapspec.pencil import scalar_pencil
from gapspec.pseudospectrum import annulus_nodes, least_singular_values
from tests.conftest import case_pencil, random_hermitian_pencil

small = st.floats(0, 0.5, allow_nan=False)


def test_scalar_field_matches_closed_form():
    field = grid_eval(scalar_pencil(1.0), (0, 2, -1, 1), (7, 5))
    assert field.values.shape == (7, 5)
    assert np.allclose(field.values, np.abs(field.nodes() - 1) ** 2, atol=1e-14)


def test_grid_validation():
    with pytest.raises(ValueError):
        grid_eval(scalar_pencil(1.0), (1, 0, -1, 1), (5, 5))
    with pytest.raises(ValueError):
        grid_eval(scalar_pencil(1.0), (0, 1, -1, 1), (1, 5))


def test_batched_values_match_pointwise():
    p = case_pencil(6)
    zs = np.array([0.1 + 0.3j, 1.2 - 0.4j, 2.0])
    assert np.allclose(least_singular_values(p, zs), [least_singular_value(p, z) for z in zs],
                       rtol=1e-12, atol=1e-15)


def test_root_on_grid_node():
    p = case_pencil(5)
    z = solve_quadratic(p).roots[3]
    field = grid_eval(p, (z.real - 0.1, z.real + 0.1, z.imag - 0.1, z.imag + 0.1), (3, 3))
    assert field.values[1, 1] <= 1e-8


def test_grid_minima_sit_on_roots():
    p = case_pencil(10)
    roots = solve_quadratic(p).roots
    field = grid_eval(p, (-0.5, 2.5, -1.5, 1.5), (61, 61))
    v = field.values
    interior = v[1:-1, 1:-1]
    is_min = np.ones_like(interior, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_min &= interior < v[1 + di:v.shape[0] - 1 + di, 1 + dj:v.shape[1] - 1 + dj]
    h = 3 / 60
    for z in field.nodes()[1:-1, 1:-1][is_min]:
        assert np.min(np.abs(roots - z)) <= 2 * h


def test_membership_examples():
    p = scalar_pencil(1.0)
    inside = in_structured_pseudospectrum(p, 1.4, (0.25, 0, 0))
    outside = in_structured_pseudospectrum(p, 1.6, (0.25, 0, 0))
    assert inside and inside.g_value == pytest.approx(0.16)
    assert not outside and outside.margin == pytest.approx(0.11)
    z = solve_quadratic(case_pencil(4)).roots[0]
    assert in_structured_pseudospectrum(case_pencil(4), z, (0, 0, 0)).margin <= 1e-8


@pytest.mark.parametrize("eps", [(1e-2, 0, 0), (2e-3, 2e-2, 2e-2), (0, 0, 0.2)])
def test_witness_round_trip(eps):
    p = case_pencil(6)
    z = 0.25 + 0.05j
    assert in_structured_pseudospectrum(p, z, eps)
    q = structured_witness(p, z, eps)
    assert least_singular_value(q, z) <= 1e-8
    for a, b, e in zip(p.coefficients, q.coefficients, eps):
        assert np.linalg.norm(a - b, 2) <= e * (1 + 1e-12)


def test_witness_refuses_non_member():
    with pytest.raises(ValueError):
        structured_witness(scalar_pencil(1.0), 1.6, (0.25, 0, 0))


def test_annulus_clear_of_roots():
    p = case_pencil(50)
    clearance = annulus_clearance(p, LAMBDA_MINUS, 0.05, LAMBDA_MINUS / 4, (1e-4, 1e-4, 1e-4))
    assert clearance > 0


def test_annulus_zero_eps_is_min_g():
    p = case_pencil(10)
    nodes = annulus_nodes(LAMBDA_MINUS, 0.05, 0.07, 16, 4)
    expected = least_singular_values(p, nodes).min()
    assert annulus_clearance(p, LAMBDA_MINUS, 0.05, 0.07, n_angle=16, n_radial=4) == pytest.approx(expected)


def test_annulus_with_root_has_no_clearance():
    p = case_pencil(10)
    z = solve_quadratic(p).roots[0]
    r = abs(z - 0.0) + 0.01
    nodes_clear = annulus_clearance(p, 0.0, abs(z) * 0.5, r, n_angle=256, n_radial=16)
    assert nodes_clear <= 1e-3


def test_annulus_validation():
    with pytest.raises(ValueError):
        annulus_nodes(0, 0.1, LAMBDA_MINUS / 4)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1, 3), st.floats(-1.5, 1.5), small, small, small, small, small, small)
def test_membership_monotone_in_eps(x, y, a0, a1, a2, b0, b1, b2):
    p = case_pencil(4)
    z = complex(x, y)
    lo = in_structured_pseudospectrum(p, z, (a0, a1, a2))
    hi = in_structured_pseudospectrum(p, z, (a0 + b0, a1 + b1, a2 + b2))
    assert hi.margin <= lo.margin
    if lo.member:
        assert hi.member


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_conjugate_symmetry_of_g(n, seed, x, y):
    p = random_hermitian_pencil(np.random.default_rng(seed), n)
    z = complex(x, y)
    g, gc = least_singular_value(p, z), least_singular_value(p, z.conjugate())
    assert abs(g - gc) <= 1e-12 * max(1.0, g) * max(1.0, abs(z) ** 2) * p.scale()


def test_zero_set_identity():
    p = case_pencil(3)
    for z in solve_quadratic(p).roots:
        assert in_structured_pseudospectrum(p, z, (0, 0, 0)).g_value <= 1e-8
    assert not in_structured_pseudospectrum(p, 0.5 + 0.5j, (0, 0, 0))
