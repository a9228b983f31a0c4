"""Comparison and convergence experiments between surfaces and their spine graphs."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BoundaryResonance, ConfigError
from .flow_ifs import FlowIFS, build_pants_ifs
from .graph_core import MetricRibbonGraph, directed_coding, scale_graph, trace_faces
from .resonance import Window, count_zeros, critical_exponent, roots_rational
from .surface_zeta import nuclear_eigenvalues, surface_evaluator, zeta_from_eigenvalues
from .zeta_symbolic import eval_exp_poly, graph_zeta

DEFAULT_BASIS = 24


def window_grid(L: float, A: float, n_s: int = 9, n_mag: int = 5, n_phase: int = 8,
                extra: int = 0, seed: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Sample points of ``|s| <= A/L`` (square grid, outside points dropped) and ``|z| <= A``."""
    if not A > 0:
        raise ConfigError("A must be positive")
    r = A / L
    xs = np.linspace(-r, r, n_s)
    s_pts = [complex(a, b) for a in xs for b in xs if math.hypot(a, b) <= r * (1 + 1e-12)]
    z_pts = [A * m / n_mag * np.exp(2j * np.pi * k / n_phase) for m in range(1, n_mag + 1) for k in range(n_phase)]
    if extra:
        rng = np.random.default_rng(seed)
        for _ in range(extra):
            s_pts.append(r * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random()))
            z_pts.append(A * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random()))
    return np.array(s_pts), np.array(z_pts)


def sup_difference(ifs: FlowIFS, s_pts: Sequence[complex], z_pts: Sequence[complex],
                   basis: int = DEFAULT_BASIS) -> float:
    """``max |d_X(s, z) - d_Gamma(s, z)|`` over the product grid.

    ``d_X`` is the Fredholm determinant from the finite nuclear matrix (one
    eigen-decomposition per ``s`` serves all ``z``); ``d_Gamma`` is the exact
    graph zeta of the spine.
    """
    poly = graph_zeta(ifs.coding)
    z = np.asarray(z_pts, dtype=complex)
    sup = 0.0
    for s in s_pts:
        dx = zeta_from_eigenvalues(nuclear_eigenvalues(ifs, s, basis), z)
        dg = eval_exp_poly(poly, s, z)[0]
        sup = max(sup, float(np.max(np.abs(dx - dg))))
    return sup


def surface_critical_exponent(ifs: FlowIFS, interval: tuple[float, float] = (1e-3, 1.0),
                              basis: int = DEFAULT_BASIS) -> float:
    f = surface_evaluator(ifs, 1.0, basis)
    return critical_exponent(lambda x: f(x)[0].real, interval, derivative=lambda x: f(x)[1].real)


def _threads(threads: int | None, n: int) -> int:
    return max(1, min(threads or 1, n))


def _fit(x: Sequence[float], y: Sequence[float]) -> float:
    if len(x) < 2:
        return math.nan
    return float(np.polyfit(np.asarray(x, float), np.log(np.asarray(y, float)), 1)[0])


@dataclass(frozen=True)
class CompareRow:
    L: float
    eta_hat: float
    supdiff: float
    critical_exponent: float
    crit_error: float  # |L delta - ln 4|


@dataclass(frozen=True)
class CompareResult:
    A: float
    rows: tuple[CompareRow, ...]

    @property
    def slope_vs_L(self) -> float:
        return _fit([r.L for r in self.rows], [r.supdiff for r in self.rows])

    @property
    def slope_vs_eta(self) -> float:
        return _fit([r.eta_hat for r in self.rows], [r.supdiff for r in self.rows])

    @property
    def crit_slope_vs_L(self) -> float:
        return _fit([r.L for r in self.rows], [r.crit_error for r in self.rows])

    @property
    def strictly_decreasing(self) -> bool:
        d = [r.supdiff for r in self.rows]
        return all(b < a for a, b in zip(d, d[1:]))

    @property
    def crit_strictly_decreasing(self) -> bool:
        d = [r.crit_error for r in self.rows]
        return all(b < a for a, b in zip(d, d[1:]))

    def summary(self) -> dict:
        return {
            "A": self.A,
            "slope_vs_L": self.slope_vs_L,
            "slope_vs_eta": self.slope_vs_eta,
            "strictly_decreasing": self.strictly_decreasing,
            "critical_exponent_slope_vs_L": self.crit_slope_vs_L,
            "critical_exponent_strictly_decreasing": self.crit_strictly_decreasing,
        }


def compare_symmetric_pants(Ls: Sequence[float], A: float = 2.0, *, n_s: int = 9, n_mag: int = 5,
                            n_phase: int = 8, basis: int = DEFAULT_BASIS, extra: int = 0,
                            seed: int | None = None, threads: int | None = None,
                            with_critical: bool = True) -> CompareResult:
    """Sup-difference between surface and graph zetas for pants ``(L, L, L)`` over an ``L``-grid."""
    if not Ls:
        raise ConfigError("empty L grid")
    if not A > 0:
        raise ConfigError("A must be positive")

    def run(L):
        ifs = build_pants_ifs(L, L, L)
        s_pts, z_pts = window_grid(L, A, n_s, n_mag, n_phase, extra, seed)
        sup = sup_difference(ifs, s_pts, z_pts, basis)
        crit = surface_critical_exponent(ifs, basis=basis) if with_critical else math.nan
        return CompareRow(float(L), ifs.eta_hat, sup, crit, abs(L * crit - math.log(4)))

    with ThreadPoolExecutor(_threads(threads, len(Ls))) as pool:
        rows = list(pool.map(run, Ls))
    return CompareResult(A, tuple(rows))


# ---------------------------------------------------------------------------
# convergence of scaled resonance sets


@dataclass(frozen=True)
class ConvergeRow:
    alpha: float
    count: int


@dataclass(frozen=True)
class ConvergeResult:
    target: int
    rows: tuple[ConvergeRow, ...]

    @property
    def first_match(self) -> int | None:
        """First index from which every count equals the graph count."""
        for i in range(len(self.rows)):
            if all(r.count == self.target for r in self.rows[i:]):
                return i
        return None

    def summary(self) -> dict:
        return {
            "target": self.target,
            "counts": [r.count for r in self.rows],
            "alphas": [r.alpha for r in self.rows],
            "first_match": self.first_match,
            "stable": self.first_match is not None,
        }


def pants_widths(graph: MetricRibbonGraph) -> tuple:
    """Funnel widths of the pair of pants whose spine is ``graph`` (its face lengths)."""
    faces = trace_faces(graph)
    if graph.k != 3 or faces.n_faces != 3 or faces.genus != 0:
        raise ConfigError("only spines of three-funneled spheres (planar theta graphs) are supported")
    return tuple(faces.boundary_lengths)


def graph_count(graph: MetricRibbonGraph, window: Window, *, margin: float = 0.02) -> int:
    """Number of graph resonances in ``window``; rejects windows whose boundary is too close to one."""
    report = roots_rational(graph_zeta(directed_coding(graph)), 1)
    wide = Window(window.re_min - 1, window.re_max + 1, window.im_min - 1, window.im_max + 1)
    total = 0
    for r in report.replicate(wide).roots:
        d = window.boundary_distance(r.s)
        if abs(d) < margin:
            raise BoundaryResonance(f"graph resonance {r.s} lies within {margin} of the window boundary")
        if d > 0:
            total += r.multiplicity
    return total


def converge_scaled(graph: MetricRibbonGraph, window: Window, alphas: Sequence[float], *,
                    basis: int = DEFAULT_BASIS, margin: float = 0.02, threads: int | None = None) -> ConvergeResult:
    """Counts of ``alpha``-scaled surface resonances of the pants over ``alpha * graph`` in ``window``."""
    target = graph_count(graph, window, margin=margin)
    widths = pants_widths(graph)

    def run(alpha):
        a = Fraction(alpha).limit_denominator(10**6) if isinstance(alpha, (int, float)) else alpha
        scaled = scale_graph(graph, a)
        Ls = [float(w) * float(a) for w in widths]
        ifs = build_pants_ifs(*Ls)
        if any(abs(x - y) > 1e-9 for x, y in zip(sorted(map(float, ifs.graph.lengths)), sorted(map(float, scaled.lengths)))):
            raise ConfigError("scaled spine does not match the pants spine")
        f = surface_evaluator(ifs, 1.0, basis)

        def g(s):
            val, der = f(np.asarray(s) / float(a))
            return val, np.asarray(der) / float(a)

        return ConvergeRow(float(a), count_zeros(g, window))

    with ThreadPoolExecutor(_threads(threads, len(alphas))) as pool:
        rows = list(pool.map(run, alphas))
    return ConvergeResult(target, tuple(rows))
