"""
All 2n roots of det M(z) = 0 through a companion linearization.

With A2 = I the roots are the eigenvalues of the 2n x 2n block matrix

    [[2 A1, -A0],
     [  I ,   0 ]]

(second companion form). A Hermitian positive definite A2 = L L^* is first
reduced to the identity by the congruence L^{-1} (.) L^{-*}; a general
nonsingular A2 (unstructured perturbations) is divided out on the left.

Pencils assembled from a self-adjoint operator have more structure: after the
reduction, D = A0 - A1^2 is the Gram matrix of the components of A e_j
outside the subspace, hence positive semidefinite. Writing K = D^{1/2},
B = [A1; K] and E = [I; 0] gives M(z) = (B - conj(z) E)^* (B - z E), and the
roots are the finite eigenvalues of the 3n x 3n pencil

    [[B, -I], [0, B^*]] - z [[E, 0], [0, E^*]].

This keeps K linear. The companion form squares it, so near-real roots
next to a point of the spectrum come out with O(sqrt(machine eps)) errors
in arbitrary directions; here the error goes into Im z.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.optimize import linear_sum_assignment

from .errors import CertificationError, DegenerateBasisError, SolverError
from .pencil import HERMITIAN_TOL, QuadraticPencil, least_singular_value

CERTIFICATION_TOL = 1e-8
# relative size of a negative eigenvalue of A0 - A1^2 still treated as rounding
GRAM_NEGATIVE_TOL = 1e-10
PAIRING_TOL = 1e-8
TIE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class RootSet:
    """Roots of a pencil, with scaled residuals and the digest of the source."""

    roots: np.ndarray
    residuals: np.ndarray
    pencil_digest: str

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def conjugate_pairing_defect(self) -> float:
        """Largest distance between a root and its matched conjugate partner."""
        r = self.roots
        cost = np.abs(r[:, None] - np.conj(r)[None, :])
        rows, cols = linear_sum_assignment(cost)
        return float(cost[rows, cols].max()) if len(r) else 0.0

    def is_conjugate_closed(self, tol: float = PAIRING_TOL) -> bool:
        return self.conjugate_pairing_defect() <= tol

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "residual"])
        for z, res in zip(self.roots, self.residuals):
            w.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(res))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "pencil_digest": self.pencil_digest,
            "roots": [[float(z.real), float(z.imag)] for z in self.roots],
            "residuals": [float(x) for x in self.residuals],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _reduce_to_monic(pencil: QuadraticPencil, hermitian_only: bool = False):
    """
    Return (B0, B1, back) with det M(z) = 0 iff det(B0 - 2 z B1 + z^2 I) = 0;
    ``back`` maps null vectors of the reduced polynomial to null vectors of M.
    """
    a0, a1, a2 = pencil.coefficients
    n = pencil.n
    if np.array_equal(a2, np.eye(n)):
        return a0, a1, _identity
    if np.max(np.abs(a2 - a2.conj().T)) <= HERMITIAN_TOL:
        try:
            low = la.cholesky((a2 + a2.conj().T) / 2, lower=True)
        except la.LinAlgError:
            low = None
        if low is not None:
            def congr(a):
                t = la.solve_triangular(low, a, lower=True)
                return la.solve_triangular(low, t.conj().T, lower=True).conj().T

            def back(x):
                return la.solve_triangular(low, x, lower=True, trans="C")
            return congr(a0), congr(a1), back
    if hermitian_only:
        return None
    try:
        lu = la.lu_factor(a2)
    except (la.LinAlgError, ValueError) as exc:
        raise DegenerateBasisError(f"A2 cannot be factored: {exc}") from exc
    if np.min(np.abs(np.diag(lu[0]))) == 0.0:
        raise DegenerateBasisError("A2 is singular")
    return la.lu_solve(lu, a0), la.lu_solve(lu, a1), _identity


def _identity(x):
    return x


def companion_matrix(pencil: QuadraticPencil) -> np.ndarray:
    b0, b1, _ = _reduce_to_monic(pencil)
    n = pencil.n
    return np.block([[2 * b1, -b0], [np.eye(n), np.zeros((n, n))]])


def _companion_roots(pencil: QuadraticPencil):
    b0, b1, back = _reduce_to_monic(pencil)
    n = pencil.n
    comp = np.block([[2 * b1, -b0], [np.eye(n), np.zeros((n, n))]])
    try:
        roots, vecs = la.eig(comp, overwrite_a=True, check_finite=True)
    except (la.LinAlgError, ValueError) as exc:
        raise SolverError(f"companion eigensolver failed for dimension "
                          f"{comp.shape[0]}: {exc}") from exc
    # eigenvectors are [z x; x]; take the better-scaled half
    big = np.abs(roots) > 1
    x = np.where(big[None, :], vecs[:n] / np.where(big, roots, 1)[None, :], vecs[n:])
    return roots, back(x)


def outer_factor(pencil: QuadraticPencil):
    """
    Return (B1, K, back) with A2 reduced to I, B1 Hermitian, K Hermitian PSD
    and B0 = B1^2 + K^2 up to rounding; None when the pencil lacks that structure.
    """
    if not pencil.is_hermitian():
        return None
    reduced = _reduce_to_monic(pencil, hermitian_only=True)
    if reduced is None:
        return None
    b0, b1, back = reduced
    b0 = (b0 + b0.conj().T) / 2
    b1 = (b1 + b1.conj().T) / 2
    d = b0 - b1 @ b1
    w, v = la.eigh((d + d.conj().T) / 2)
    if w[0] < -GRAM_NEGATIVE_TOL * max(1.0, float(np.max(np.abs(b0)))):
        return None
    k = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    return b1, k, back


def _factored_roots(b1: np.ndarray, k: np.ndarray, back):
    n = b1.shape[0]
    eye, zero = np.eye(n), np.zeros((n, n))
    b = np.vstack([b1, k])
    e = np.vstack([eye, zero])
    lhs = np.block([[b, -np.eye(2 * n)], [zero, b.conj().T]])
    rhs = np.block([[e, np.zeros((2 * n, 2 * n))], [zero, e.conj().T]])
    try:
        (alpha, beta_), vecs = la.eig(lhs, rhs, homogeneous_eigvals=True)
    except (la.LinAlgError, ValueError) as exc:
        raise SolverError(f"QZ failed on factored pencil of size {3 * n}: {exc}") from exc
    # exactly n eigenvalues are infinite; keep the 2n most finite ones
    finiteness = np.abs(beta_) / (np.abs(alpha) + np.abs(beta_))
    keep = np.argsort(-finiteness, kind="stable")[:2 * n]
    if np.min(finiteness[keep]) == 0.0:
        raise SolverError("factored pencil returned fewer than 2n finite eigenvalues")
    return alpha[keep] / beta_[keep], back(vecs[:n, keep])


def scaled_residual(pencil: QuadraticPencil, z, scale=None) -> float:
    """G(z) / (max(1, |z|^2) * scale), scale = max_p ||A_p|| by default."""
    if scale is None:
        scale = pencil.scale()
    return least_singular_value(pencil, z) / (max(1.0, abs(z) ** 2) * scale)


def vector_residuals(pencil: QuadraticPencil, roots: np.ndarray, vecs: np.ndarray,
                     scale=None) -> np.ndarray:
    """
    ||M(z_i) x_i|| / ||x_i||, scaled as in :func:`scaled_residual`.

    Each value bounds the scaled G(z_i) from above, so it certifies just as
    well and needs three matrix products instead of one SVD per root.
    """
    if scale is None:
        scale = pencil.scale()
    y0, y1, y2 = (a @ vecs for a in pencil.coefficients)
    r = y0 - 2 * roots[None, :] * y1 + (roots * roots)[None, :] * y2
    norms = np.linalg.norm(vecs, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        res = np.linalg.norm(r, axis=0) / norms
    res = np.where(norms > 0, res, np.inf)
    return res / (np.maximum(1.0, np.abs(roots) ** 2) * scale)


def solve_quadratic(pencil: QuadraticPencil, certify: bool = True,
                    tol: float = CERTIFICATION_TOL, method: str = "auto",
                    exact_residuals: bool = False) -> RootSet:
    """
    Solve det(A0 - 2 z A1 + z^2 A2) = 0.

    ``method`` is "companion", "factored" or "auto" (factored whenever the
    pencil has the Gram structure, companion otherwise).

    Residuals are ||M(z) x|| / ||x|| for the computed null vector x, divided
    by max(1, |z|^2) * max_p ||A_p||; ``exact_residuals`` replaces the
    numerator with G(z) itself (one SVD per root). With ``certify`` any
    residual above ``tol`` raises :class:`CertificationError`.
    """
    if method not in ("auto", "companion", "factored"):
        raise ValueError(f"unknown method {method!r}")
    factor = outer_factor(pencil) if method != "companion" else None
    if method == "factored" and factor is None:
        raise ValueError("pencil is not Hermitian with A0 - A1 A2^-1 A1 positive semidefinite")
    if factor is not None:
        roots, vecs = _factored_roots(*factor)
    else:
        roots, vecs = _companion_roots(pencil)
    order = np.lexsort((roots.imag, roots.real))
    roots = roots[order].astype(complex)
    scale = pencil.scale()
    if exact_residuals:
        residuals = np.array([scaled_residual(pencil, z, scale) for z in roots])
    else:
        residuals = vector_residuals(pencil, roots, vecs[:, order], scale)
    if certify:
        bad = np.flatnonzero(~(residuals <= tol))
        if bad.size:
            listing = ", ".join(f"{roots[i]:.6g} (res {residuals[i]:.2e})" for i in bad[:10])
            raise CertificationError(
                f"{bad.size} of {len(roots)} roots failed certification at tol {tol:.1e}: {listing}",
                offending=[(complex(roots[i]), float(residuals[i])) for i in bad])
    return RootSet(roots, residuals, pencil.digest())


def closest_root(roots, target) -> complex:
    """
    Root nearest to ``target``.

    Ties (distances equal to a relative 1e-12) go to the smaller |Im z|,
    then the smaller Re z, then the smaller Im z.
    """
    r = np.asarray(roots.roots if isinstance(roots, RootSet) else roots, dtype=complex)
    if r.size == 0:
        raise ValueError("root set is empty")
    candidates = r
    for key in (lambda z: np.abs(z - target), lambda z: np.abs(z.imag),
                lambda z: z.real, lambda z: z.imag):
        values = key(candidates)
        best = values.min()
        thresh = best + TIE_RTOL * max(1.0, abs(best))
        candidates = candidates[values <= thresh]
        if candidates.size == 1:
            break
    return complex(candidates[0])
