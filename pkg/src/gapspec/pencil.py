"""
Quadratic matrix pencil M(z) = A0 - 2 z A1 + z^2 A2.

The three coefficients are Gram-type matrices of a finite basis
{e_j} under a self-adjoint operator A:

    [A0]_jk = <A e_j, A e_k>,   [A1]_jk = <A e_j, e_k>,   [A2]_jk = <e_j, e_k>.

Singular points of M are the approximate spectral points of the quadratic
projection method; its least singular value G(z) drives every
enclosure and pseudospectrum computation in the package.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import AssemblyError, DegenerateBasisError

HERMITIAN_TOL = 1e-12

# (p, q) inner-product exponents that feed each coefficient A0, A1, A2
COEFFICIENT_EXPONENTS = {0: (1, 1), 1: (1, 0), 2: (0, 0)}


@dataclass(frozen=True)
class BasisSpec:
    """Ordered basis labels and whether the basis is orthonormal."""

    indices: tuple
    orthonormal: bool = True

    def __post_init__(self):
        indices = tuple(self.indices)
        if not indices:
            raise ValueError("basis must contain at least one label")
        if len(set(indices)) != len(indices):
            raise ValueError("basis labels must be distinct")
        object.__setattr__(self, "indices", indices)

    def __len__(self):
        return len(self.indices)

    @classmethod
    def symmetric(cls, n: int) -> "BasisSpec":
        """Fourier-style labels -n, ..., n (dimension 2n+1)."""
        if n < 0:
            raise ValueError(f"n must be nonnegative, got {n}")
        return cls(tuple(range(-n, n + 1)), orthonormal=True)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class QuadraticPencil:
    """
    Immutable triple (A0, A1, A2) of complex n x n matrices.

    Construction only checks shapes: perturbed pencils are in general
    neither Hermitian nor positive definite. The stronger invariants are
    enforced by :func:`assemble_pencil`.
    """

    a0: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        a0, a1, a2 = (_frozen(m) for m in (self.a0, self.a1, self.a2))
        if a0.ndim != 2 or a0.shape[0] != a0.shape[1] or a0.shape[0] == 0:
            raise ValueError(f"coefficients must be square and nonempty, got {a0.shape}")
        if a1.shape != a0.shape or a2.shape != a0.shape:
            raise ValueError("coefficient shapes differ: "
                             f"{a0.shape}, {a1.shape}, {a2.shape}")
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "a1", a1)
        object.__setattr__(self, "a2", a2)

    @property
    def n(self) -> int:
        return self.a0.shape[0]

    @property
    def coefficients(self) -> tuple:
        return (self.a0, self.a1, self.a2)

    def __call__(self, z) -> np.ndarray:
        return evaluate(self, z)

    def hermitian_defect(self) -> float:
        return max(float(np.max(np.abs(a - a.conj().T))) for a in self.coefficients)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermitian_defect() <= tol

    def scale(self) -> float:
        """Largest spectral norm among the coefficients (at least 1)."""
        return max(1.0, *(float(la.norm(a, 2)) for a in self.coefficients))

    def digest(self) -> str:
        h = hashlib.sha256()
        for a in self.coefficients:
            h.update(np.ascontiguousarray(a, dtype=np.complex128).tobytes())
        return h.hexdigest()

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        def flat(a):
            return [[float(v.real), float(v.imag)] for v in a.ravel(order="C")]
        return {"n": self.n, "a0": flat(self.a0), "a1": flat(self.a1), "a2": flat(self.a2)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "QuadraticPencil":
        n = int(doc["n"])

        def unflat(entries):
            arr = np.asarray(entries, dtype=float)
            if arr.shape != (n * n, 2):
                raise ValueError(f"expected {n * n} [re, im] pairs, got shape {arr.shape}")
            return (arr[:, 0] + 1j * arr[:, 1]).reshape(n, n)

        return cls(unflat(doc["a0"]), unflat(doc["a1"]), unflat(doc["a2"]))

    @classmethod
    def from_json(cls, text: str) -> "QuadraticPencil":
        return cls.from_dict(json.loads(text))


def assemble_pencil(model, basis: BasisSpec, tol: float = HERMITIAN_TOL) -> QuadraticPencil:
    """
    Build the pencil of ``model`` on ``basis``.

    Each coefficient is checked for Hermitian symmetry and then
    symmetrized; the pre-symmetrization defects are kept in
    ``pencil.metadata["hermitian_defect"]``.
    """
    labels = basis.indices
    n = len(labels)
    mats = []
    defects = {}
    for p_index, (p, q) in COEFFICIENT_EXPONENTS.items():
        a = np.empty((n, n), dtype=complex)
        for r, j in enumerate(labels):
            for c, k in enumerate(labels):
                a[r, c] = model.inner_product(p, q, j, k)
        if not np.all(np.isfinite(a)):
            raise AssemblyError(f"non-finite entries in A{p_index}")
        diff = np.abs(a - a.conj().T)
        worst = float(diff.max())
        if worst > tol:
            r, c = np.unravel_index(int(np.argmax(diff)), diff.shape)
            raise AssemblyError(
                f"A{p_index} not Hermitian: defect {worst:.3e} at "
                f"(p, q, j, k) = ({p}, {q}, {labels[r]}, {labels[c]})")
        defects[p_index] = worst
        mats.append((a + a.conj().T) / 2)
    a0, a1, a2 = mats

    gram_eigs = la.eigvalsh(a2)
    if gram_eigs[0] <= HERMITIAN_TOL * max(1.0, gram_eigs[-1]):
        raise DegenerateBasisError(
            f"Gram matrix A2 is not positive definite (min eigenvalue {gram_eigs[0]:.3e})")
    if basis.orthonormal:
        off = float(np.max(np.abs(a2 - np.eye(n))))
        if off > tol:
            raise AssemblyError(f"basis flagged orthonormal but |A2 - I| = {off:.3e}")
    a0_min = la.eigvalsh(a0)[0]
    if a0_min < -1e-10 * max(1.0, float(np.max(np.abs(a0)))):
        raise AssemblyError(f"A0 is not positive semidefinite (min eigenvalue {a0_min:.3e})")

    meta = {"hermitian_defect": defects, "labels": labels}
    return QuadraticPencil(a0, a1, a2, metadata=meta)


def evaluate(pencil: QuadraticPencil, z) -> np.ndarray:
    """M(z) = A0 - 2 z A1 + z^2 A2."""
    z = complex(z)
    return pencil.a0 - (2 * z) * pencil.a1 + (z * z) * pencil.a2


def least_singular_value(pencil: QuadraticPencil, z) -> float:
    """G(z), the smallest singular value of M(z)."""
    return float(la.svdvals(evaluate(pencil, z), check_finite=False)[-1])


def least_singular_triple(pencil: QuadraticPencil, z):
    """Return (sigma, u, v) with M(z) v = sigma u for the smallest singular value."""
    u, s, vh = la.svd(evaluate(pencil, z))
    return float(s[-1]), u[:, -1], vh[-1].conj()


def beta(pencil: QuadraticPencil) -> float:
    """
    Basis constant: sqrt of the smallest eigenvalue of the Gram matrix A2.

    This is the largest beta with ||u|| >= beta ||u||_0 for every u in the
    span of the basis, where ||.||_0 is the coefficient 2-norm.
    """
    a2 = pencil.a2
    lo = la.eigvalsh((a2 + a2.conj().T) / 2)[0]
    if lo <= HERMITIAN_TOL:
        raise DegenerateBasisError(f"A2 is numerically singular (min eigenvalue {lo:.3e})")
    return float(np.sqrt(lo))


def scalar_pencil(lam: float) -> QuadraticPencil:
    """1x1 pencil (lam^2, lam, 1), for which M(z) = (z - lam)^2."""
    return QuadraticPencil([[lam * lam]], [[lam]], [[1.0]])

