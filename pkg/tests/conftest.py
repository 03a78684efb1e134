import functools

import numpy as np
import pytest

from gapspec import CaseStudyModel, assemble_pencil
from gapspec.pencil import BasisSpec, QuadraticPencil


@functools.lru_cache(maxsize=None)
def case_pencil(n):
    return assemble_pencil(CaseStudyModel(), BasisSpec.symmetric(n))


@pytest.fixture(scope="session")
def pencil50():
    return case_pencil(50)


def random_hermitian_pencil(rng, n, gram=False):
    """Random Hermitian pencil with positive definite A2.

    With ``gram`` the coefficients come from a random operator restricted to
    a random subspace, so A0 - A1 A2^-1 A1 is positive semidefinite.
    """
    def herm(m):
        return (m + m.conj().T) / 2

    def cplx(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    if gram:
        big = n + 3
        op = herm(cplx(big, big))
        basis = cplx(big, n)
        a2 = basis.conj().T @ basis
        a1 = basis.conj().T @ op @ basis
        a0 = (op @ basis).conj().T @ (op @ basis)
        return QuadraticPencil(herm(a0), herm(a1), herm(a2))
    b = cplx(n, n)
    a2 = b.conj().T @ b + 0.5 * np.eye(n)
    return QuadraticPencil(herm(cplx(n, n)), herm(cplx(n, n)), herm(a2))


# filled by the acceptance module, printed at the end of the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
