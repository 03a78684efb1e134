"""
Least-singular-value fields and the structured pseudospectrum

    Lambda(eps0, eps1, eps2) = {z : G(z) <= eps0 + 2 eps1 |z| + eps2 |z|^2}.

A point belongs to Lambda exactly when some pencil with
||A~_p - A_p|| <= eps_p is singular there; :func:`structured_witness`
builds such a pencil explicitly.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from ._parallel import pmap
from .enclosure import _check_eps, perturbation_budget
from .pencil import QuadraticPencil, least_singular_triple, least_singular_value


def least_singular_values(pencil: QuadraticPencil, zs) -> np.ndarray:
    """Vectorized G over a 1-D array of points (one batched SVD)."""
    zs = np.asarray(zs, dtype=complex).ravel()
    mats = (pencil.a0[None] - (2 * zs)[:, None, None] * pencil.a1[None]
            + (zs * zs)[:, None, None] * pencil.a2[None])
    return np.linalg.svd(mats, compute_uv=False)[:, -1]


@dataclass(frozen=True, eq=False)
class GridField:
    """G sampled on a uniform rectangular grid; values[i, j] sits at re[i] + i*im[j]."""

    region: tuple
    resolution: tuple
    values: np.ndarray

    @property
    def re(self) -> np.ndarray:
        return np.linspace(self.region[0], self.region[1], self.resolution[0])

    @property
    def im(self) -> np.ndarray:
        return np.linspace(self.region[2], self.region[3], self.resolution[1])

    def nodes(self) -> np.ndarray:
        return self.re[:, None] + 1j * self.im[None, :]

    def margins(self, eps=(0.0, 0.0, 0.0)) -> np.ndarray:
        """G minus the perturbation budget; nonpositive entries lie in Lambda(eps)."""
        e0, e1, e2 = _check_eps(eps)
        r = np.abs(self.nodes())
        return self.values - (e0 + 2 * e1 * r + e2 * r * r)

    def to_csv(self, eps=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        nodes = self.nodes()
        if eps is None:
            w.writerow(["re", "im", "g_value"])
            for z, g in zip(nodes.ravel(), self.values.ravel()):
                w.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(g))])
        else:
            margins = self.margins(eps)
            w.writerow(["re", "im", "g_value", "margin"])
            for z, g, m in zip(nodes.ravel(), self.values.ravel(), margins.ravel()):
                w.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(g)),
                            repr(float(m))])
        return buf.getvalue()

    def to_dict(self, eps=None) -> dict:
        doc = {
            "region": [float(x) for x in self.region],
            "resolution": [int(x) for x in self.resolution],
            "values": [float(x) for x in self.values.ravel()],
        }
        if eps is not None:
            doc["eps"] = list(_check_eps(eps))
            doc["margins"] = [float(x) for x in self.margins(eps).ravel()]
        return doc

    def to_json(self, eps=None) -> str:
        return json.dumps(self.to_dict(eps))


def grid_eval(pencil: QuadraticPencil, region, resolution, threads=None) -> GridField:
    re_min, re_max, im_min, im_max = (float(x) for x in region)
    n_re, n_im = (int(x) for x in resolution)
    if not (re_max > re_min and im_max > im_min):
        raise ValueError(f"degenerate region {region}")
    if n_re < 2 or n_im < 2:
        raise ValueError(f"resolution must be at least 2x2, got {resolution}")
    re = np.linspace(re_min, re_max, n_re)
    im = np.linspace(im_min, im_max, n_im)
    rows = pmap(lambda x: least_singular_values(pencil, x + 1j * im), re, threads)
    values = np.vstack(rows)
    values.setflags(write=False)
    return GridField((re_min, re_max, im_min, im_max), (n_re, n_im), values)


@dataclass(frozen=True)
class Membership:
    member: bool
    margin: float
    g_value: float
    budget: float

    def __bool__(self):
        return self.member


def in_structured_pseudospectrum(pencil: QuadraticPencil, z, eps) -> Membership:
    eps = _check_eps(eps)
    g = least_singular_value(pencil, z)
    budget = perturbation_budget(z, eps)
    margin = g - budget
    return Membership(margin <= 0, margin, g, budget)


def structured_witness(pencil: QuadraticPencil, z, eps) -> QuadraticPencil:
    """
    Pencil within ``eps`` of ``pencil`` that is singular at ``z``.

    With M(z) v = sigma u the smallest singular triple, M(z) - sigma u v^* is
    singular. The correction goes entirely into A0 when eps0 >= sigma; otherwise
    it is shared in proportion to (eps0, 2 eps1 |z|, eps2 |z|^2).
    """
    eps = _check_eps(eps)
    z = complex(z)
    sigma, u, v = least_singular_triple(pencil, z)
    budget = perturbation_budget(z, eps)
    if sigma > budget:
        raise ValueError(f"z = {z} is outside the structured pseudospectrum "
                         f"(G = {sigma:.3e} > {budget:.3e})")
    rank_one = sigma * np.outer(u, v.conj())
    if sigma == 0.0 or eps[0] >= sigma:
        weights = (1.0, 0.0, 0.0)
    else:
        r = abs(z)
        parts = (eps[0], 2 * eps[1] * r, eps[2] * r * r)
        weights = tuple(p / budget for p in parts)
    w0, w1, w2 = weights
    # M~(z) = M(z) - (w0 + w1 + w2) sigma u v^*
    d0 = -w0 * rank_one
    d1 = (w1 / (2 * z)) * rank_one if w1 else np.zeros_like(rank_one)
    d2 = (-w2 / (z * z)) * rank_one if w2 else np.zeros_like(rank_one)
    return QuadraticPencil(pencil.a0 + d0, pencil.a1 + d1, pencil.a2 + d2)


def annulus_nodes(center, inner, outer, n_angle=256, n_radial=64) -> np.ndarray:
    """Polar grid on {inner < |z - center| <= outer}."""
    if not 0 < inner < outer:
        raise ValueError(f"need 0 < inner < outer, got inner={inner}, outer={outer}")
    radii = inner + (outer - inner) * np.arange(1, n_radial + 1) / n_radial
    angles = 2 * np.pi * np.arange(n_angle) / n_angle
    return (complex(center) + radii[:, None] * np.exp(1j * angles)[None, :]).ravel()


def annulus_clearance(pencil: QuadraticPencil, center, inner, outer, eps=(0.0, 0.0, 0.0),
                      n_angle=256, n_radial=64, threads=None) -> float:
    """
    Minimum of G(z) - budget(z) over a sampled annulus around ``center``.

    A positive value means no sampled point of the annulus is in Lambda(eps),
    hence no root of any eps-perturbed pencil was found there.
    """
    eps = _check_eps(eps)
    nodes = annulus_nodes(center, inner, outer, n_angle, n_radial)
    chunks = np.array_split(nodes, max(1, n_radial))
    g = np.concatenate(pmap(lambda c: least_singular_values(pencil, c), chunks, threads))
    r = np.abs(nodes)
    return float(np.min(g - (eps[0] + 2 * eps[1] * r + eps[2] * r * r)))
