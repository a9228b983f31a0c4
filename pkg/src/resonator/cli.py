"""Command-line front end: ``resonator {graph,surface,compare,converge,chains}``.

Exit codes: 0 success, 2 bad input or configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, InputError, IrrationalRates, NumericError, ResonatorError
from .experiments import (
    DEFAULT_BASIS,
    compare_symmetric_pants,
    converge_scaled,
    surface_critical_exponent,
)
from .flow_ifs import SectorData, build_ifs_from_sectors, build_pants_ifs, verify_ifs
from .graph_core import directed_coding, load_graph, theta_graph, trace_faces
from .resonance import ResonanceReport, Window, detect_chains, find_zeros, roots_rational
from .surface_zeta import (
    enumerate_closed_words,
    orbit_data,
    orbit_table_csv,
    surface_evaluator,
    surface_zeta_eval,
)
from .svgplot import scatter_svg
from .zeta_symbolic import eval_exp_poly, graph_zeta, rationalize


@dataclass
class ExperimentConfig:
    mode: str
    input: Path | None = None
    pants: tuple[float, float, float] | None = None
    window: Window | None = None
    z: complex = 1.0 + 0j
    A: float = 2.0
    Lgrid: tuple[float, ...] = (8.0, 10.0, 12.0, 14.0, 16.0)
    alphas: tuple[float, ...] = ()
    max_word_len: int | None = None
    basis: int = DEFAULT_BASIS
    out: Path = Path(".")
    format: str = "csv"
    seed: int | None = None
    extra_points: int = 0
    threads: int = 1
    files: list = field(default_factory=list)

    def validate(self) -> "ExperimentConfig":
        if not self.A > 0:
            raise ConfigError(f"A must be positive, got {self.A}")
        if not self.Lgrid:
            raise ConfigError("L grid is empty")
        if any(not L > 0 for L in self.Lgrid):
            raise ConfigError("L grid values must be positive")
        if self.basis < 0:
            raise ConfigError("basis degree must be non-negative")
        if self.max_word_len is not None and self.max_word_len < 1:
            raise ConfigError("max word length must be positive")
        if self.format not in ("csv", "json", "svg"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.pants is not None and any(not x > 0 for x in self.pants):
            raise ConfigError("pants widths must be positive")
        return self


def _threads_from_env() -> int:
    raw = os.environ.get("RESONATOR_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"RESONATOR_THREADS={raw!r} is not an integer") from exc
    if n < 1:
        raise ConfigError("RESONATOR_THREADS must be at least 1")
    return n


def _g(x: float) -> str:
    return f"{x:.17g}"


def _write(cfg: ExperimentConfig, name: str, text: str) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / name
    path.write_text(text, encoding="utf-8")
    cfg.files.append(path)
    return path


def _table(cfg: ExperimentConfig, stem: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    if cfg.format == "json":
        _write(cfg, stem + ".json", json.dumps([dict(zip(header, r)) for r in rows], indent=1) + "\n")
        return
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(_g(x) if isinstance(x, float) else str(x) for x in r))
    _write(cfg, stem + ".csv", "\n".join(lines) + "\n")


def _resonance_rows(report: ResonanceReport) -> list:
    return [[float(r.s.real), float(r.s.imag), r.multiplicity, report.method] for r in report.roots]


def _resonance_svg(cfg: ExperimentConfig, stem: str, report: ResonanceReport, title: str) -> None:
    if cfg.format == "svg":
        xs = [r.s.real for r in report.roots]
        ys = [r.s.imag for r in report.roots]
        _write(cfg, stem + ".svg", scatter_svg([("zeros", xs, ys)], title=title, xlabel="Re s", ylabel="Im s"))


# ---------------------------------------------------------------------------
# commands


def _chain_window(report: ResonanceReport, period: float, periods: int = 3) -> Window:
    """Window holding ``periods`` translates of each fundamental root."""
    res = [r.s.real for r in report.roots] or [0.0]
    return Window(min(res) - 0.5, max(res) + 0.5, -period / 2 - 1e-9, (periods - 0.5) * period - 1e-9)


def cmd_graph(cfg: ExperimentConfig) -> list[Path]:
    if cfg.input is None:
        raise ConfigError("graph needs --input")
    g = load_graph(cfg.input)
    p = graph_zeta(directed_coding(g))
    _write(cfg, "zeta.json", p.to_json() + "\n")
    faces = trace_faces(g)
    try:
        rz = rationalize(p)
    except IrrationalRates:
        rz = None
    if rz is not None:
        z0 = cfg.z
        z_exact = int(z0.real) if z0.imag == 0 and z0.real == int(z0.real) else z0
        report = roots_rational(rz, z_exact)
        if cfg.window is not None:
            report = report.replicate(cfg.window)
        period = rz.period
    else:
        if cfg.window is None:
            raise ConfigError("lengths are not commensurable; give --window for an argument-principle search")
        f = lambda s: eval_exp_poly(p, s, cfg.z)  # noqa: E731
        report = find_zeros(f, cfg.window)
        period = None
    _table(cfg, "resonances", ["re", "im", "multiplicity", "method"], _resonance_rows(report))
    _resonance_svg(cfg, "resonances", report, "graph resonances")
    chains = None
    if period is not None:
        fundamental = report if cfg.window is not None else report.replicate(_chain_window(report, period))
        chains = detect_chains(fundamental, period)
    summary = {
        "k": g.k,
        "genus": faces.genus,
        "boundary_lengths": [str(x) for x in faces.boundary_lengths],
        "period": period,
        "n_roots": report.count,
        "z": [cfg.z.real, cfg.z.imag],
    }
    if chains is not None:
        _write(cfg, "chains.json", chains.to_json() + "\n")
    _write(cfg, "summary.json", json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return cfg.files


def _surface_ifs(cfg: ExperimentConfig):
    if cfg.pants is not None:
        return build_pants_ifs(*cfg.pants)
    if cfg.input is not None:
        return build_ifs_from_sectors(SectorData.load(cfg.input))
    raise ConfigError("surface needs --pants L1 L2 L3 or --input SECTORS.json")


def cmd_surface(cfg: ExperimentConfig) -> list[Path]:
    ifs = _surface_ifs(cfg)
    n_max = cfg.max_word_len or ifs.size
    records = [orbit_data(ifs, w) for n in range(1, min(n_max, 10) + 1) for w in enumerate_closed_words(ifs, n)]
    _write(cfg, "orbits.csv", orbit_table_csv(records))

    window = cfg.window or Window(0.0, 1.0, -1.0, 1.0)
    evals = []
    for a in np.linspace(window.re_min, window.re_max, 5):
        for b in np.linspace(window.im_min, window.im_max, 5):
            evals.append(surface_zeta_eval(ifs, complex(a, b), cfg.z, cfg.max_word_len).to_dict())
    _write(cfg, "zeta.json", json.dumps(evals, indent=1, sort_keys=True) + "\n")

    crit = surface_critical_exponent(ifs, basis=cfg.basis)
    summary = {
        "critical_exponent": crit,
        "eta_hat": ifs.eta_hat,
        "boundary_lengths": list(ifs.boundary_lengths),
        "spine_lengths": [float(x) for x in ifs.graph.lengths],
        "ifs_report": verify_ifs(ifs).summary(),
    }
    if cfg.window is not None:
        f = surface_evaluator(ifs, cfg.z, cfg.basis)
        report = find_zeros(f, cfg.window)
        _table(cfg, "resonances", ["re", "im", "multiplicity", "method"], _resonance_rows(report))
        _resonance_svg(cfg, "resonances", report, "surface resonances")
        summary["n_zeros"] = report.count
    _write(cfg, "summary.json", json.dumps(summary, indent=1, sort_keys=True, default=float) + "\n")
    return cfg.files


def cmd_compare(cfg: ExperimentConfig) -> list[Path]:
    result = compare_symmetric_pants(cfg.Lgrid, cfg.A, basis=cfg.basis, extra=cfg.extra_points,
                                     seed=cfg.seed, threads=cfg.threads)
    rows = [[r.L, r.eta_hat, r.supdiff, r.critical_exponent, r.crit_error] for r in result.rows]
    _table(cfg, "compare", ["L", "eta_hat", "supdiff", "critical_exponent", "crit_error"], rows)
    Ls = [r.L for r in result.rows]
    _write(cfg, "compare.svg", scatter_svg(
        [("sup |d_X - d_graph|", Ls, [r.supdiff for r in result.rows]),
         ("|L delta - ln 4|", Ls, [r.crit_error for r in result.rows])],
        title=f"surface vs graph zeta, A = {cfg.A:g}", xlabel="L", ylabel="log10", lines=True, logy=True))
    _write(cfg, "summary.json", json.dumps(result.summary(), indent=1, sort_keys=True) + "\n")
    return cfg.files


def cmd_converge(cfg: ExperimentConfig) -> list[Path]:
    if cfg.window is None:
        raise ConfigError("converge needs --window")
    g = load_graph(cfg.input) if cfg.input is not None else theta_graph("1/2", "1/2", "1/2")
    alphas = cfg.alphas or tuple(8.0 + 2 * i for i in range(5))
    result = converge_scaled(g, cfg.window, alphas, basis=cfg.basis, threads=cfg.threads)
    _table(cfg, "converge", ["alpha", "count"], [[r.alpha, r.count] for r in result.rows])
    _write(cfg, "summary.json", json.dumps(result.summary(), indent=1, sort_keys=True) + "\n")
    return cfg.files


def cmd_chains(cfg: ExperimentConfig) -> list[Path]:
    if cfg.pants is not None:
        if cfg.window is None:
            raise ConfigError("surface chains need --window")
        ifs = build_pants_ifs(*cfg.pants)
        period = rationalize(graph_zeta(ifs.coding)).period
        report = find_zeros(surface_evaluator(ifs, 1.0, cfg.basis), cfg.window)
        grouping = detect_chains(report, period, tol_re=0.05, tol_im=0.05 * period)
    else:
        if cfg.input is None:
            raise ConfigError("chains needs --input GRAPH or --pants")
        g = load_graph(cfg.input)
        rz = rationalize(graph_zeta(directed_coding(g)))
        report = roots_rational(rz, 1)
        window = cfg.window or _chain_window(report, rz.period)
        report = report.replicate(window)
        period = rz.period
        grouping = detect_chains(report, period)
    _table(cfg, "resonances", ["re", "im", "multiplicity", "method"], _resonance_rows(report))
    _write(cfg, "chains.json", grouping.to_json() + "\n")
    return cfg.files


COMMANDS = {
    "graph": cmd_graph,
    "surface": cmd_surface,
    "compare": cmd_compare,
    "converge": cmd_converge,
    "chains": cmd_chains,
}


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", type=Path, help="graph JSON or sector-data JSON")
    common.add_argument("--pants", type=float, nargs=3, metavar=("L1", "L2", "L3"))
    common.add_argument("--window", type=float, nargs=4, metavar=("RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"))
    common.add_argument("--z", type=float, nargs=2, metavar=("RE", "IM"), default=(1.0, 0.0))
    common.add_argument("--A", type=float, default=2.0, dest="A")
    common.add_argument("--Lgrid", type=float, nargs="+", default=[8.0, 10.0, 12.0, 14.0, 16.0])
    common.add_argument("--alphas", type=float, nargs="+", default=None)
    common.add_argument("--max-word-len", type=int, default=None)
    common.add_argument("--basis", type=int, default=DEFAULT_BASIS, help="Taylor degree M of the nuclear matrix")
    common.add_argument("--extra-points", type=int, default=0, help="random extra window points (uses --seed)")
    common.add_argument("--out", type=Path, default=Path("."))
    common.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--json-errors", action="store_true", help="print errors as JSON on stderr")

    parser = argparse.ArgumentParser(prog="resonator", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="mode", required=True)
    for name, helptext in [
        ("graph", "graph zeta polynomial, resonances and chains"),
        ("surface", "flow-adapted IFS, orbit table, zeta values, critical exponent"),
        ("compare", "surface vs spine-graph zeta over an L grid"),
        ("converge", "scaled resonance counts in a window"),
        ("chains", "group resonances into vertical chains"),
    ]:
        sub.add_parser(name, parents=[common], help=helptext)
    return parser


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    window = None
    if ns.window is not None:
        window = Window(*ns.window)
    cfg = ExperimentConfig(
        mode=ns.mode,
        input=ns.input,
        pants=tuple(ns.pants) if ns.pants else None,
        window=window,
        z=complex(*ns.z),
        A=ns.A,
        Lgrid=tuple(ns.Lgrid),
        alphas=tuple(ns.alphas) if ns.alphas else (),
        max_word_len=ns.max_word_len,
        basis=ns.basis,
        out=ns.out,
        format=ns.format,
        seed=ns.seed,
        extra_points=ns.extra_points,
        threads=_threads_from_env(),
    )
    return cfg.validate()


def _report_error(exc: ResonatorError, as_json: bool) -> None:
    if as_json:
        print(json.dumps(exc.to_dict(), sort_keys=True), file=sys.stderr)
    else:
        print(f"resonator: {type(exc).__name__}: {exc}", file=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        files = COMMANDS[cfg.mode](cfg)
    except ResonatorError as exc:
        _report_error(exc, ns.json_errors)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        _report_error(InputError(str(exc)), ns.json_errors)
        return 2
    except ArithmeticError as exc:
        _report_error(NumericError(str(exc)), ns.json_errors)
        return 3
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
