"""
Operator models: sources of the inner products <A^p e_j, A^q e_k>.

Inner products are linear in the first slot, <f, g> = integral of f * conj(g).
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import ConvergenceError
from .pencil import BasisSpec

SQRT2_HALF = math.sqrt(2.0) / 2.0
LAMBDA_MINUS = 1.0 - SQRT2_HALF
LAMBDA_PLUS = 1.0 + SQRT2_HALF


@dataclass(frozen=True)
class SpectrumDescription:
    """Known spectrum of a model: essential points, eigenvalues, and a gap."""

    essential_points: tuple
    discrete_eigenvalues: tuple
    gap_of_interest: Optional[tuple] = None

    @property
    def points(self) -> np.ndarray:
        return np.array(sorted(set(self.essential_points) | set(self.discrete_eigenvalues)))

    def distance(self, x) -> np.ndarray:
        """Distance from each real x to the (finite) spectrum."""
        x = np.asarray(x, dtype=float)
        return np.min(np.abs(x[..., None] - self.points), axis=-1)


class OperatorModel(ABC):
    """Provides <A^p e_j, A^q e_k> for p, q in {0, 1}."""

    name = "abstract"

    @abstractmethod
    def inner_product(self, p: int, q: int, j, k) -> complex:
        ...

    def exact_spectrum(self) -> Optional[SpectrumDescription]:
        return None

    @abstractmethod
    def basis(self, n: Optional[int] = None) -> BasisSpec:
        ...


def _check_exponents(p, q):
    if p not in (0, 1) or q not in (0, 1):
        raise ValueError(f"exponents must lie in {{0, 1}}, got p={p}, q={q}")


def _symbol_entry(j: int, k: int) -> complex:
    """<a e_j, e_k> for the indicator a of [0, pi)."""
    m = j - k
    if m == 0:
        return 0.5
    if m % 2 == 0:
        return 0.0
    return 1j / (math.pi * m)


def case_study_entry(p: int, q: int, j: int, k: int) -> complex:
    """
    Closed-form <A^p e_j, A^q e_k> for A phi = a phi + <phi, e_0> e_0 on
    L^2[-pi, pi] with e_k = exp(ikx)/sqrt(2 pi) and a the indicator of [0, pi).
    """
    _check_exponents(p, q)
    j, k = int(j), int(k)
    d_j0 = 1.0 if j == 0 else 0.0
    d_k0 = 1.0 if k == 0 else 0.0
    if p == 0 and q == 0:
        return complex(j == k)
    if p == 1 and q == 0:
        return complex(_symbol_entry(j, k) + d_j0 * d_k0)
    if p == 0 and q == 1:
        return complex(np.conj(_symbol_entry(k, j)) + d_j0 * d_k0)
    # a^2 = a, so <a e_j, a e_k> = <a e_j, e_k>
    return complex(_symbol_entry(j, k)
                   + d_k0 * _symbol_entry(j, 0)
                   + d_j0 * np.conj(_symbol_entry(k, 0))
                   + d_j0 * d_k0)


def _quad_complex(f, lo, hi, tolerance):
    re, err_re = integrate.quad(lambda x: f(x).real, lo, hi, epsabs=tolerance / 8,
                                epsrel=0.0, limit=500)
    im, err_im = integrate.quad(lambda x: f(x).imag, lo, hi, epsabs=tolerance / 8,
                                epsrel=0.0, limit=500)
    if err_re > tolerance / 4 or err_im > tolerance / 4:
        raise ConvergenceError(
            f"quadrature on [{lo:.4g}, {hi:.4g}] stalled at error {max(err_re, err_im):.3e}"
            f" (requested {tolerance:.3e})")
    return complex(re, im)


def _inner(f, g, tolerance):
    """<f, g> on [-pi, pi], split at the jump of the symbol."""
    h = lambda x: f(x) * np.conj(g(x))  # noqa: E731
    return (_quad_complex(h, -math.pi, 0.0, tolerance)
            + _quad_complex(h, 0.0, math.pi, tolerance))


def _fourier(k):
    return lambda x: np.exp(1j * k * x) / math.sqrt(2 * math.pi)


def _indicator(x):
    return 1.0 if x >= 0.0 else 0.0


def quadrature_entry(p: int, q: int, j: int, k: int, tolerance: float = 1e-11) -> complex:
    """
    Case-study inner product computed by adaptive quadrature.

    Independent of :func:`case_study_entry`: the rank-one coefficient
    <e_j, e_0> is itself integrated, and A e_j is formed pointwise.
    """
    _check_exponents(p, q)
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    tol = tolerance / 4
    e0 = _fourier(0)

    def apply(power, label):
        e = _fourier(label)
        if power == 0:
            return e
        coef = _inner(e, e0, tol)
        return lambda x: _indicator(x) * e(x) + coef * e0(x)

    return _inner(apply(p, j), apply(q, k), tol)


class CaseStudyModel(OperatorModel):
    """Rank-one perturbation of multiplication by a step function, Fourier basis."""

    name = "case-study"

    def inner_product(self, p, q, j, k):
        return case_study_entry(p, q, j, k)

    def exact_spectrum(self):
        return exact_spectrum_case_study()

    def basis(self, n=None):
        if n is None:
            raise ValueError("case-study model needs a truncation n")
        return BasisSpec.symmetric(n)


def exact_spectrum_case_study() -> SpectrumDescription:
    return SpectrumDescription(
        essential_points=(0.0, 1.0),
        discrete_eigenvalues=(LAMBDA_MINUS, LAMBDA_PLUS),
        gap_of_interest=(0.0, 1.0),
    )


def case_study_resolvent(lam: float) -> float:
    """<(lam - a)^{-1} e_0, e_0>; eigenvalues solve resolvent(lam) = 1."""
    return 0.5 * (1.0 / lam + 1.0 / (lam - 1.0))


class DiagonalModel(OperatorModel):
    """A e_j = lam_j e_j in an orthonormal basis labelled 0..len-1."""

    name = "diagonal"

    def __init__(self, eigenvalues: Sequence[float]):
        eigenvalues = tuple(float(x) for x in eigenvalues)
        if not eigenvalues:
            raise ValueError("diagonal model needs at least one eigenvalue")
        self.eigenvalues = eigenvalues

    def inner_product(self, p, q, j, k):
        _check_exponents(p, q)
        if j != k:
            return 0j
        lam = self.eigenvalues[j]
        return complex(lam ** p * lam ** q)

    def exact_spectrum(self):
        return SpectrumDescription(essential_points=(),
                                   discrete_eigenvalues=tuple(sorted(set(self.eigenvalues))))

    def basis(self, n=None):
        size = len(self.eigenvalues) if n is None else min(int(n), len(self.eigenvalues))
        return BasisSpec(tuple(range(size)), orthonormal=True)


def diagonal_model(eigenvalues: Sequence[float]) -> DiagonalModel:
    return DiagonalModel(eigenvalues)


def model_from_name(name: str) -> OperatorModel:
    """Parse ``"case-study"`` or ``"diagonal:<comma-separated reals>"``."""
    if name == "case-study":
        return CaseStudyModel()
    if name.startswith("diagonal:"):
        body = name.split(":", 1)[1]
        try:
            values = [float(v) for v in body.split(",") if v.strip()]
        except ValueError as exc:
            raise ValueError(f"bad diagonal model spec {name!r}") from exc
        return DiagonalModel(values)
    raise ValueError(f"unknown model {name!r}; expected 'case-study' or 'diagonal:<reals>'")
