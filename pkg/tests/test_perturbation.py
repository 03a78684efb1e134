import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapspec import (LAMBDA_MINUS, CaseStudyModel, PerturbationSpec, diagonal_model,
                     fit_loglog_slope, monte_carlo, norm_sharpness_witness, perturb,
                     solve_galerkin, assemble_pencil)
from gapspec.perturbation import MODES, perturbed_roots, sample_unit_disk
from tests.conftest import case_pencil


def test_zero_epsilon_is_identity():
    p = case_pencil(5)
    q = perturb(p, PerturbationSpec(0.0, seed=3))
    for a, b in zip(p.coefficients, q.coefficients):
        assert np.array_equal(a, b)


def test_spec_validation():
    with pytest.raises(ValueError):
        PerturbationSpec(-0.1)
    with pytest.raises(ValueError):
        PerturbationSpec(0.1, mode="gaussian")


def test_nonzero_hermitian_pattern():
    p = case_pencil(5)
    q = perturb(p, PerturbationSpec(0.1, "nonzero-hermitian", seed=7))
    assert q.is_hermitian(0.0)
    for a, b in zip(p.coefficients, q.coefficients):
        assert np.array_equal(a == 0, b == a)
        assert np.all(b[a != 0] != a[a != 0])


def test_unstructured_breaks_hermiticity():
    p = case_pencil(5)
    broken = [not perturb(p, PerturbationSpec(0.1, "unstructured", seed=s)).is_hermitian()
              for s in range(10)]
    assert any(broken)


@pytest.mark.parametrize("mode", MODES)
def test_norm_bound_n5(mode):
    p = case_pencil(5)
    for seed in range(1000):
        q = perturb(p, PerturbationSpec(0.1, mode, seed=seed))
        for a, b in zip(p.coefficients, q.coefficients):
            assert np.linalg.norm(b - a, 2) <= 0.1


def test_determinism():
    p = case_pencil(6)
    spec = PerturbationSpec(0.1, "unstructured", seed=42, stream=(6, 0, 3))
    a, b = perturb(p, spec), perturb(p, spec)
    assert a.digest() == b.digest()
    other = perturb(p, PerturbationSpec(0.1, "unstructured", seed=42, stream=(6, 0, 4)))
    assert other.digest() != a.digest()


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 63 - 1), st.sampled_from(MODES), st.integers(0, 100))
def test_determinism_property(seed, mode, sample):
    p = case_pencil(3)
    spec = PerturbationSpec(0.1, mode, seed=seed, stream=(3, MODES.index(mode), sample))
    assert perturb(p, spec).digest() == perturb(p, spec).digest()


def test_unit_disk_samples():
    z = sample_unit_disk(np.random.default_rng(0), 20000)
    assert np.all(np.abs(z) <= 1)
    # uniform by area: P(|z| <= 1/2) = 1/4
    assert np.mean(np.abs(z) <= 0.5) == pytest.approx(0.25, abs=0.01)


def test_witness_examples():
    t, norm = norm_sharpness_witness(0, 1.0)
    assert np.array_equal(t, [[1.0]]) and norm == 1.0
    t, norm = norm_sharpness_witness(1, 0.3)
    assert t.shape == (3, 3) and np.allclose(t, 0.1) and abs(norm - 0.3) <= 1e-12
    t, norm = norm_sharpness_witness(4, 0.0)
    assert not t.any() and norm == 0


def test_galerkin_examples():
    m = diagonal_model([1, 3])
    assert np.allclose(solve_galerkin(assemble_pencil(m, m.basis())), [1, 3])
    assert np.allclose(solve_galerkin(case_pencil(0)), [1.5])


def test_galerkin_fills_the_gap():
    eigs = solve_galerkin(case_pencil(50))
    inside = eigs[(eigs > 0.05) & (eigs < 0.95)]
    assert np.sum(np.abs(inside - LAMBDA_MINUS) > 0.05) >= 3


def test_slope_examples():
    x = np.array([1.0, 2.0, 5.0, 10.0])
    assert fit_loglog_slope(x, 3 / x) == pytest.approx(-1)
    assert fit_loglog_slope(x, 3 / np.sqrt(x)) == pytest.approx(-0.5)
    noise = np.random.default_rng(11).uniform(0.9, 1.1, size=x.size)
    assert -1.15 <= fit_loglog_slope(x, noise * 3 / x) <= -0.85
    with pytest.raises(ValueError):
        fit_loglog_slope([1, 2, 3], [1, 0, 1])
    with pytest.raises(ValueError):
        fit_loglog_slope([1, 2], [1, 2])


def test_noisy_slope_by_hand():
    xs = np.array([1.0, 10.0, 100.0])
    ys = 2 / xs * np.array([1.1, 0.9, 1.05])
    lx, ly = np.log(xs), np.log(ys)
    by_hand = np.sum((lx - lx.mean()) * (ly - ly.mean())) / np.sum((lx - lx.mean()) ** 2)
    assert fit_loglog_slope(xs, ys) == pytest.approx(by_hand, rel=1e-12)


def test_monte_carlo_zero_epsilon():
    rep = monte_carlo(CaseStudyModel(), LAMBDA_MINUS, [3, 5], PerturbationSpec(0.0), samples=2)
    for name in ("im", "re_err"):
        base = rep.column(f"{name}_unperturbed")
        assert np.array_equal(rep.column(f"{name}_unstructured"), base)
        assert np.array_equal(rep.column(f"{name}_structured"), base)


def test_monte_carlo_report_layout():
    rep = monte_carlo(CaseStudyModel(), LAMBDA_MINUS, [3, 5, 7], PerturbationSpec(0.1, seed=1),
                      samples=3)
    lines = rep.to_csv().splitlines()
    assert lines[0] == ",".join(rep.COLUMNS)
    assert len(lines) == 4
    assert rep.column("dim").tolist() == [7, 11, 15]
    doc = rep.to_dict()
    assert doc["seed"] == 1 and doc["epsilon"] == 0.1
    assert len(doc["roots"][0]["samples"]["unstructured"]) == 3
    again = monte_carlo(CaseStudyModel(), LAMBDA_MINUS, [3, 5, 7], PerturbationSpec(0.1, seed=1),
                        samples=3)
    assert again.to_csv() == rep.to_csv()


def test_parallel_order_is_deterministic():
    p = case_pencil(4)
    spec = PerturbationSpec(0.1, seed=5)
    one = perturbed_roots(p, spec, 6, 4, threads=1)
    many = perturbed_roots(p, spec, 6, 4, threads=4)
    for mode in MODES:
        assert [r.roots.tolist() for r in one[mode]] == [r.roots.tolist() for r in many[mode]]
