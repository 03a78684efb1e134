"""
Random coefficient perturbations, the Galerkin baseline and the Monte Carlo
protocol for tracking one eigenvalue under perturbation.

Perturbed entries are

    A~_p[j, k] = A_p[j, k] + eps / N * alpha_p[j, k],   |alpha_p[j, k]| <= 1,

with N the pencil dimension, so ||A~_p - A_p|| <= ||.||_F <= eps.

Random streams: PCG64 seeded by ``numpy.random.SeedSequence(seed,
spawn_key=stream)``. The Monte Carlo driver uses ``stream = (n, mode_index,
sample_index)`` with mode_index 0 for unstructured and 1 for
nonzero-hermitian. Draw order within a stream is A0, A1, A2.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.linalg as la

from ._parallel import pmap
from .errors import DegenerateBasisError, GapspecError
from .pencil import QuadraticPencil, assemble_pencil
from .qep import closest_root, solve_quadratic

MODES = ("unstructured", "nonzero-hermitian")


@dataclass(frozen=True)
class PerturbationSpec:
    epsilon: float
    mode: str = "unstructured"
    seed: int = 0
    stream: tuple = ()

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        object.__setattr__(self, "stream", tuple(int(s) for s in self.stream))

    def rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed) & (2 ** 64 - 1), spawn_key=self.stream)
        return np.random.Generator(np.random.PCG64(ss))


def sample_unit_disk(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform (by area) samples of {|z| <= 1}, by rejection from the square."""
    out = np.empty(size, dtype=complex)
    filled = 0
    while filled < size:
        need = size - filled
        xy = rng.uniform(-1.0, 1.0, size=(2, need + need // 2 + 4))
        ok = xy[0] ** 2 + xy[1] ** 2 <= 1.0
        acc = (xy[0] + 1j * xy[1])[ok][:need]
        out[filled:filled + acc.size] = acc
        filled += acc.size
    return out


def _nonzero_hermitian_alpha(rng, a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    alpha = np.zeros((n, n), dtype=complex)
    mask = a != 0
    iu = np.triu_indices(n, k=1)
    upper = mask[iu]
    count = int(upper.sum())
    draws = sample_unit_disk(rng, count)
    # zero has probability 0 but the constraint demands alpha != 0
    while np.any(draws == 0):
        draws[draws == 0] = sample_unit_disk(rng, int(np.sum(draws == 0)))
    rows, cols = iu[0][upper], iu[1][upper]
    alpha[rows, cols] = draws
    alpha[cols, rows] = np.conj(draws)
    diag = np.flatnonzero(np.diag(mask))
    real = rng.uniform(-1.0, 1.0, size=diag.size)
    while np.any(real == 0):
        real[real == 0] = rng.uniform(-1.0, 1.0, size=int(np.sum(real == 0)))
    alpha[diag, diag] = real
    return alpha


def perturb(pencil: QuadraticPencil, spec: PerturbationSpec) -> QuadraticPencil:
    """Random pencil with ||A~_p - A_p|| <= spec.epsilon, p = 0, 1, 2."""
    if spec.epsilon == 0:
        return QuadraticPencil(*pencil.coefficients)
    n = pencil.n
    rng = spec.rng()
    scale = spec.epsilon / n
    out = []
    for a in pencil.coefficients:
        if spec.mode == "unstructured":
            alpha = sample_unit_disk(rng, n * n).reshape(n, n)
        else:
            alpha = _nonzero_hermitian_alpha(rng, a)
        out.append(a + scale * alpha)
    return QuadraticPencil(*out, metadata={"perturbation": spec})


def norm_sharpness_witness(n: int, epsilon: float):
    """
    Constant matrix T of size 2n+1 with entries eps/(2n+1).

    T is an admissible perturbation with ||T|| = eps, so the bound
    ||A~_p - A_p|| <= eps cannot be improved. Returns (T, ||T||).
    """
    if n < 0 or epsilon < 0:
        raise ValueError("n and epsilon must be nonnegative")
    dim = 2 * n + 1
    t = np.full((dim, dim), epsilon / dim)
    norm = float(la.norm(t, 2))
    if abs(norm - epsilon) > 1e-12:
        raise ArithmeticError(f"witness norm {norm!r} differs from epsilon {epsilon!r}")
    return t, norm


def solve_galerkin(pencil: QuadraticPencil) -> np.ndarray:
    """Ascending eigenvalues of A1 u = lam A2 u (the plain Galerkin problem)."""
    a1 = (pencil.a1 + pencil.a1.conj().T) / 2
    a2 = (pencil.a2 + pencil.a2.conj().T) / 2
    try:
        return la.eigh(a1, a2, eigvals_only=True)
    except la.LinAlgError as exc:
        raise DegenerateBasisError(f"A2 is not positive definite: {exc}") from exc


def fit_loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 3:
        raise ValueError("need two equal-length sequences of at least 3 values")
    if np.any(~(xs > 0)) or np.any(~(ys > 0)):
        raise ValueError("log-log fit needs strictly positive data")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


@dataclass
class MonteCarloRecord:
    n: int
    dim: int
    unperturbed: complex
    averages: dict = field(default_factory=dict)   # mode -> mean closest root
    samples: dict = field(default_factory=dict)    # mode -> per-sample closest roots


@dataclass
class MonteCarloReport:
    target: float
    epsilon: float
    sample_count: int
    seed: int
    modes: tuple
    records: list = field(default_factory=list)

    COLUMNS = ("n", "dim", "im_unperturbed", "im_unstructured", "im_structured",
               "re_err_unperturbed", "re_err_unstructured", "re_err_structured")

    @property
    def n_values(self) -> list:
        return [r.n for r in self.records]

    def column(self, name: str) -> np.ndarray:
        return np.array([self._row(r)[name] for r in self.records], dtype=float)

    def _row(self, rec: MonteCarloRecord) -> dict:
        def im_of(z):
            return math.nan if z is None else abs(z.imag)

        def re_err(z):
            return math.nan if z is None else abs(self.target - z.real)

        u = rec.averages.get("unstructured")
        s = rec.averages.get("nonzero-hermitian")
        return {
            "n": rec.n, "dim": rec.dim,
            "im_unperturbed": im_of(rec.unperturbed),
            "im_unstructured": im_of(u), "im_structured": im_of(s),
            "re_err_unperturbed": re_err(rec.unperturbed),
            "re_err_unstructured": re_err(u), "re_err_structured": re_err(s),
        }

    def slopes(self) -> dict:
        """Log-log slope of every error column against the dimension 2n+1."""
        dims = self.column("dim")
        out = {}
        for name in self.COLUMNS[2:]:
            col = self.column(name)
            if len(col) >= 3 and np.all(col > 0):
                out[name] = fit_loglog_slope(dims, col)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for rec in self.records:
            row = self._row(rec)
            w.writerow([row["n"], row["dim"]] + [repr(float(row[c])) for c in self.COLUMNS[2:]])
        return buf.getvalue()

    def to_dict(self) -> dict:
        def pair(z):
            return None if z is None else [z.real, z.imag]

        return {
            "target": self.target,
            "epsilon": self.epsilon,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "modes": list(self.modes),
            "stream_layout": "SeedSequence(seed, spawn_key=(n, mode_index, sample_index)) -> PCG64",
            "rows": [self._row(r) for r in self.records],
            "roots": [
                {"n": r.n, "unperturbed": pair(r.unperturbed),
                 "averages": {m: pair(z) for m, z in r.averages.items()},
                 "samples": {m: [pair(z) for z in zs] for m, zs in r.samples.items()}}
                for r in self.records
            ],
            "slopes": self.slopes(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, allow_nan=True)


def perturbed_roots(pencil, spec_template: PerturbationSpec, samples: int, n_label: int,
                    modes=MODES, threads=None) -> dict:
    """Root sets of ``samples`` perturbations per mode; keyed by mode."""
    jobs = [(m, i) for m in modes for i in range(samples)]

    def run(job):
        mode, i = job
        spec = replace(spec_template, mode=mode, stream=(n_label, MODES.index(mode), i))
        try:
            return solve_quadratic(perturb(pencil, spec))
        except GapspecError as exc:
            raise type(exc)(f"{exc} [n={n_label}, mode={mode}, seed={spec.seed}, "
                            f"sample={i}]") from exc

    results = pmap(run, jobs, threads)
    out = {m: [] for m in modes}
    for (mode, _), rs in zip(jobs, results):
        out[mode].append(rs)
    return out


def monte_carlo(model, target: float, n_values: Sequence[int], spec_template: PerturbationSpec,
                samples: int = 20, modes=MODES, threads=None) -> MonteCarloReport:
    """
    For every n: solve the exact pencil, take the root closest to ``target``,
    then average, per mode, the root closest to it over ``samples`` perturbations.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    modes = tuple(modes)
    report = MonteCarloReport(float(target), float(spec_template.epsilon), int(samples),
                              int(spec_template.seed), modes)
    for n in n_values:
        pencil = assemble_pencil(model, model.basis(n))
        try:
            exact = solve_quadratic(pencil)
        except GapspecError as exc:
            raise type(exc)(f"{exc} [n={n}, unperturbed]") from exc
        zeta = closest_root(exact, target)
        rec = MonteCarloRecord(int(n), pencil.n, zeta)
        sets = perturbed_roots(pencil, spec_template, samples, int(n), modes, threads)
        for mode in modes:
            picks = [closest_root(rs, zeta) for rs in sets[mode]]
            rec.samples[mode] = picks
            rec.averages[mode] = complex(np.mean(picks)) if spec_template.epsilon else zeta
        report.records.append(rec)
    return report
