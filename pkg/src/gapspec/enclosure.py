"""
Certified real intervals meeting the spectrum, built from (perturbed) roots.

If the perturbed pencil with ||A_p - A~_p|| <= eps_p is singular at zeta,
then Spec(A) meets [Re zeta - d, Re zeta + d] where

    d = sqrt(|Im zeta|^2 + beta^-2 (|zeta|^2 eps2 + 2 |zeta| eps1 + eps0)).

Norms are spectral (operator 2-) norms.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .models import SpectrumDescription

POLLUTION_SLACK = 1e-8


def _check_eps(eps):
    eps = tuple(float(e) for e in eps)
    if len(eps) != 3 or any(e < 0 or math.isnan(e) for e in eps):
        raise ValueError(f"eps must be three nonnegative reals, got {eps}")
    return eps


def perturbation_budget(z, eps) -> float:
    """eps0 + 2 eps1 |z| + eps2 |z|^2, the bound on ||M(z) - M~(z)||."""
    e0, e1, e2 = eps
    r = abs(z)
    return e0 + 2.0 * e1 * r + e2 * r * r


@dataclass(frozen=True)
class EnclosureInterval:
    center: float
    half_width: float
    source_root: complex
    epsilons: tuple
    beta: float

    @property
    def lo(self) -> float:
        return self.center - self.half_width

    @property
    def hi(self) -> float:
        return self.center + self.half_width

    def contains(self, x, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack

    def meets(self, points, slack: float = 0.0) -> bool:
        return any(self.contains(float(x), slack) for x in points)


def enclosure_interval(zeta, beta: float, eps=(0.0, 0.0, 0.0)) -> EnclosureInterval:
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    eps = _check_eps(eps)
    zeta = complex(zeta)
    half = math.hypot(zeta.imag, math.sqrt(perturbation_budget(zeta, eps)) / beta)
    return EnclosureInterval(zeta.real, half, zeta, eps, float(beta))


def minimal_delta(z, alpha: float, beta: float) -> float:
    """
    Positive root of d^2 + 2 d |Im z| = alpha / beta^2.

    Any d above this value makes [Re z - |Im z| - d, Re z + |Im z| + d]
    meet the spectrum whenever some singular B has ||M(z) - B|| <= alpha.
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    b = abs(complex(z).imag)
    c = alpha / beta ** 2
    # stable form of -b + sqrt(b^2 + c)
    return c / (b + math.sqrt(b * b + c)) if c > 0 else 0.0


def weak_interval(z, alpha: float, beta: float, delta: Optional[float] = None):
    """
    Interval [Re z - |Im z| - d, Re z + |Im z| + d] of the singular-neighbour
    criterion; ``delta`` defaults to :func:`minimal_delta`.
    """
    z = complex(z)
    d = minimal_delta(z, alpha, beta) if delta is None else float(delta)
    w = abs(z.imag) + d
    return (z.real - w, z.real + w)


@dataclass(frozen=True)
class PollutionRow:
    root: complex
    dist: Optional[float]
    eps_value: float
    bound: float
    slack: Optional[float]
    passed: Optional[bool]


@dataclass
class PollutionReport:
    rows: list = field(default_factory=list)
    beta: float = 1.0
    epsilons: tuple = (0.0, 0.0, 0.0)

    @property
    def passed(self) -> Optional[bool]:
        """True/False when the spectrum is known, None otherwise."""
        verdicts = [r.passed for r in self.rows]
        if any(v is None for v in verdicts):
            return None
        return all(verdicts)

    @property
    def failures(self) -> list:
        return [r for r in self.rows if r.passed is False]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["root_re", "root_im", "dist", "bound", "slack", "pass"])
        for r in self.rows:
            w.writerow([repr(r.root.real), repr(r.root.imag),
                        "" if r.dist is None else repr(r.dist),
                        repr(r.bound),
                        "" if r.slack is None else repr(r.slack),
                        "" if r.passed is None else int(r.passed)])
        return buf.getvalue()


def nonpollution_check(roots, spectrum: Optional[SpectrumDescription], beta: float = 1.0,
                       eps=(0.0, 0.0, 0.0), slack: float = POLLUTION_SLACK) -> PollutionReport:
    """
    Compare dist(Re zeta, Spec A) with |Im zeta| + eps(zeta)/beta for every root,
    eps(zeta) = sqrt(|zeta|^2 eps2 + 2 |zeta| eps1 + eps0).

    Without a known spectrum only the bounds are reported.
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    eps = _check_eps(eps)
    if spectrum is not None and spectrum.points.size == 0:
        raise ValueError("spectrum description is empty")
    values = np.asarray(getattr(roots, "roots", roots), dtype=complex)
    report = PollutionReport(beta=float(beta), epsilons=eps)
    for z in values:
        z = complex(z)
        e = math.sqrt(perturbation_budget(z, eps))
        bound = abs(z.imag) + e / beta
        if spectrum is None:
            report.rows.append(PollutionRow(z, None, e, bound, None, None))
            continue
        dist = float(spectrum.distance(z.real))
        margin = bound - dist
        report.rows.append(PollutionRow(z, dist, e, bound, margin, bool(dist <= bound + slack)))
    return report
