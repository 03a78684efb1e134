"""
gapspec command line.

Subcommands
-----------
solve       roots of the quadratic problem (optionally with a pollution report)
perturbed   roots of randomly perturbed problems, one scatter file per mode
montecarlo  averaged perturbed roots near a target eigenvalue, with fitted rates
pseudospec  least singular value field and structured pseudospectrum margins
galerkin    eigenvalues of the plain Galerkin problem with distance to the spectrum

Output files (all in --out, default the working directory):

    solve       roots.{csv,json}          re, im, residual
                pollution.csv             root_re, root_im, dist, bound, slack, pass
    perturbed   perturbed_<mode>.{csv,json}  sample, re, im, residual
    montecarlo  montecarlo.{csv,json}     n, dim, im_unperturbed, im_unstructured,
                                          im_structured, re_err_unperturbed,
                                          re_err_unstructured, re_err_structured
    pseudospec  pseudospec.{csv,json}     re, im, g_value, margin
    galerkin    galerkin.{csv,json}       index, eigenvalue, dist_to_spectrum

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
Any flag may also come from a JSON file given with --config; flags win.
GAPSPEC_THREADS caps the number of worker threads.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .enclosure import nonpollution_check
from .errors import GapspecError
from .models import LAMBDA_MINUS, model_from_name
from .pencil import assemble_pencil, beta
from .perturbation import MODES, PerturbationSpec, monte_carlo, perturbed_roots, solve_galerkin
from .pseudospectrum import grid_eval
from .qep import solve_quadratic

COMMANDS = ("solve", "perturbed", "montecarlo", "pseudospec", "galerkin")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    model: str = "case-study"
    n: Optional[int] = None
    n_range: Optional[str] = None
    epsilon: Optional[float] = None
    samples: Optional[int] = None
    mode: str = "both"
    region: str = "-0.5,2.5,-1.5,1.5"
    resolution: str = "100,100"
    seed: int = 0
    out: str = "."
    format: str = "csv"
    target: Optional[float] = None
    check_pollution: bool = False

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        try:
            model_from_name(self.model)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.format not in ("csv", "json"):
            raise ConfigError(f"--format must be csv or json, got {self.format!r}")
        if self.mode not in MODES + ("both",):
            raise ConfigError(f"--mode must be one of {MODES + ('both',)}")
        if self.n is not None and self.n < 0:
            raise ConfigError("--n must be nonnegative")
        if self.epsilon is not None and not self.epsilon >= 0:
            raise ConfigError("--epsilon must be nonnegative")
        if self.samples is not None and self.samples < 1:
            raise ConfigError("--samples must be at least 1")
        if self.n_range is not None:
            parse_n_range(self.n_range)
        parse_region(self.region)
        parse_resolution(self.resolution)
        return self

    @property
    def modes(self) -> tuple:
        return MODES if self.mode == "both" else (self.mode,)


def parse_n_range(text: str) -> list:
    """``start:step:stop`` (inclusive), or ``start:stop`` with step 1, or one integer."""
    try:
        parts = [int(p) for p in str(text).split(":")]
    except ValueError:
        raise ConfigError(f"bad n-range {text!r}") from None
    if len(parts) == 1:
        start, step, stop = parts[0], 1, parts[0]
    elif len(parts) == 2:
        start, step, stop = parts[0], 1, parts[1]
    elif len(parts) == 3:
        start, step, stop = parts
    else:
        raise ConfigError(f"bad n-range {text!r}")
    if step <= 0 or start < 0 or stop < start:
        raise ConfigError(f"bad n-range {text!r}")
    return list(range(start, stop + 1, step))


def parse_region(text) -> tuple:
    try:
        vals = tuple(float(v) for v in (text.split(",") if isinstance(text, str) else text))
    except ValueError:
        raise ConfigError(f"bad region {text!r}") from None
    if len(vals) != 4 or not (vals[1] > vals[0] and vals[3] > vals[2]):
        raise ConfigError(f"region must be re_min,re_max,im_min,im_max; got {text!r}")
    return vals


def parse_resolution(text) -> tuple:
    try:
        vals = tuple(int(v) for v in (str(text).split(",")))
    except ValueError:
        raise ConfigError(f"bad resolution {text!r}") from None
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2 or min(vals) < 2:
        raise ConfigError(f"resolution must be n_re,n_im with both >= 2; got {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gapspec", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with default values for any flag")
        p.add_argument("--model", help="'case-study' or 'diagonal:<comma-separated reals>'")
        p.add_argument("--n", type=int, help="truncation: basis e_-n..e_n for the case study")
        p.add_argument("--n-range", dest="n_range", help="start:step:stop, inclusive")
        p.add_argument("--epsilon", type=float)
        p.add_argument("--samples", type=int)
        p.add_argument("--mode", choices=MODES + ("both",))
        p.add_argument("--region", help="re_min,re_max,im_min,im_max")
        p.add_argument("--resolution", help="n_re,n_im")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--target", type=float, help="eigenvalue to track (montecarlo)")
        if name == "solve":
            p.add_argument("--check-pollution", dest="check_pollution", action="store_true",
                           default=None)
    return parser


def load_config(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = {}
    known = {f.name for f in fields(RunConfig)} - {"command"}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        normalized = {k.replace("-", "_"): v for k, v in doc.items()}
        unknown = sorted(set(normalized) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        values.update(normalized)
    for key in known:
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    try:
        cfg = RunConfig(command=args.command, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg.validate()


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return path


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _pencil_for(cfg: RunConfig, n=None):
    model = model_from_name(cfg.model)
    return model, assemble_pencil(model, model.basis(cfg.n if n is None else n))


def _default_n(cfg):
    if cfg.n is None and cfg.model == "case-study":
        cfg.n = 50


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    _default_n(cfg)
    model, pencil = _pencil_for(cfg)
    roots = solve_quadratic(pencil)
    if cfg.format == "csv":
        _write(out, "roots.csv", roots.to_csv())
    else:
        _write(out, "roots.json", roots.to_json())
    print(f"{len(roots)} roots certified (max residual {roots.residuals.max():.2e})")
    if cfg.check_pollution:
        report = nonpollution_check(roots, model.exact_spectrum(), beta=beta(pencil))
        _write(out, "pollution.csv", report.to_csv())
        if report.passed is False:
            print(f"non-pollution check FAILED for {len(report.failures)} roots", file=sys.stderr)
            return 2
        print("non-pollution check: " + ("pass" if report.passed else "bounds only"))
    return 0


def cmd_perturbed(cfg: RunConfig, out: Path) -> int:
    _default_n(cfg)
    eps = 0.1 if cfg.epsilon is None else cfg.epsilon
    samples = 100 if cfg.samples is None else cfg.samples
    model, pencil = _pencil_for(cfg)
    spec = PerturbationSpec(eps, seed=cfg.seed)
    n_label = cfg.n if cfg.n is not None else pencil.n
    sets = perturbed_roots(pencil, spec, samples, n_label, cfg.modes)
    spectrum = model.exact_spectrum()
    b = beta(pencil)
    failures = 0
    for mode, root_sets in sets.items():
        rows = []
        for i, rs in enumerate(root_sets):
            rep = nonpollution_check(rs, spectrum, beta=b, eps=(eps, eps, eps))
            failures += len(rep.failures)
            rows.extend((i, z, r) for z, r in zip(rs.roots, rs.residuals))
        if cfg.format == "csv":
            text = _csv(["sample", "re", "im", "residual"],
                        [[i, repr(float(z.real)), repr(float(z.imag)), repr(float(r))] for i, z, r in rows])
            _write(out, f"perturbed_{mode}.csv", text)
        else:
            doc = {"mode": mode, "epsilon": eps, "seed": cfg.seed, "samples": samples,
                   "points": [[i, float(z.real), float(z.imag), float(r)] for i, z, r in rows]}
            _write(out, f"perturbed_{mode}.json", json.dumps(doc, indent=1))
        print(f"{mode}: {samples} samples, {len(rows)} roots")
    if failures:
        print(f"perturbed non-pollution check FAILED for {failures} roots", file=sys.stderr)
        return 2
    return 0


def cmd_montecarlo(cfg: RunConfig, out: Path) -> int:
    model = model_from_name(cfg.model)
    if cfg.n_range is not None:
        n_values = parse_n_range(cfg.n_range)
    elif cfg.n is not None:
        n_values = [cfg.n]
    else:
        n_values = parse_n_range("5:10:100")
    eps = 0.1 if cfg.epsilon is None else cfg.epsilon
    samples = 20 if cfg.samples is None else cfg.samples
    target = LAMBDA_MINUS if cfg.target is None else cfg.target
    report = monte_carlo(model, target, n_values, PerturbationSpec(eps, seed=cfg.seed),
                         samples=samples, modes=cfg.modes)
    if cfg.format == "csv":
        _write(out, "montecarlo.csv", report.to_csv())
    else:
        _write(out, "montecarlo.json", report.to_json())
    for name, slope in report.slopes().items():
        print(f"slope {name}: {slope:.4f}")
    return 0


def cmd_pseudospec(cfg: RunConfig, out: Path) -> int:
    _default_n(cfg)
    _, pencil = _pencil_for(cfg)
    eps = 0.0 if cfg.epsilon is None else cfg.epsilon
    field = grid_eval(pencil, parse_region(cfg.region), parse_resolution(cfg.resolution))
    triple = (eps, eps, eps)
    if cfg.format == "csv":
        _write(out, "pseudospec.csv", field.to_csv(eps=triple))
    else:
        _write(out, "pseudospec.json", field.to_json(eps=triple))
    members = int(np.sum(field.margins(triple) <= 0))
    print(f"grid {field.resolution[0]}x{field.resolution[1]}: min G = {field.values.min():.3e}, "
          f"{members} nodes inside the structured pseudospectrum")
    return 0


def cmd_galerkin(cfg: RunConfig, out: Path) -> int:
    _default_n(cfg)
    model, pencil = _pencil_for(cfg)
    eigs = solve_galerkin(pencil)
    spectrum = model.exact_spectrum()
    dists = spectrum.distance(eigs) if spectrum is not None else [float("nan")] * len(eigs)
    if cfg.format == "csv":
        text = _csv(["index", "eigenvalue", "dist_to_spectrum"],
                    [[i, repr(float(x)), repr(float(d))] for i, (x, d) in enumerate(zip(eigs, dists))])
        _write(out, "galerkin.csv", text)
    else:
        doc = {"eigenvalues": [float(x) for x in eigs], "dist_to_spectrum": [float(d) for d in dists]}
        _write(out, "galerkin.json", json.dumps(doc, indent=1))
    if spectrum is not None:
        spurious = int(np.sum(np.asarray(dists) > 0.05))
        print(f"{len(eigs)} Galerkin eigenvalues, {spurious} farther than 0.05 from the spectrum")
    return 0


HANDLERS = {
    "solve": cmd_solve,
    "perturbed": cmd_perturbed,
    "montecarlo": cmd_montecarlo,
    "pseudospec": cmd_pseudospec,
    "galerkin": cmd_galerkin,
}


def main(argv=None) -> int:
    try:
        cfg = load_config(argv)
    except ConfigError as exc:
        print(f"gapspec: configuration error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        # argparse exits with 2 on bad flags; configuration errors map to 1
        return 0 if exc.code in (0, None) else 1
    try:
        return HANDLERS[cfg.command](cfg, Path(cfg.out))
    except GapspecError as exc:
        print(f"gapspec: numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"gapspec: configuration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
