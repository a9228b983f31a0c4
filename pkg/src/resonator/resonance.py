"""Zeros of zeta functions at fixed ``z``: companion roots, argument principle, chains."""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import (
    InputError,
    NoConvergence,
    NoSignInformation,
    QuadratureNotConverged,
    ZeroLeadingCoefficient,
    ZeroOnBoundary,
)
from .zeta_symbolic import ExpPoly, RationalizedZeta, eval_exp_poly, rationalize

CLUSTER_RADIUS = 1e-6
LEADING_TOL = 1e-14
BOUNDARY_GUARD = 1e-8

# an analytic evaluator returns (f(s), f'(s)) and accepts numpy arrays
Evaluator = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class Window:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise InputError(f"empty window {self}")

    @classmethod
    def around(cls, center: complex, radius: float) -> "Window":
        return cls(center.real - radius, center.real + radius, center.imag - radius, center.imag + radius)

    def contains(self, s: complex) -> bool:
        return self.re_min < s.real < self.re_max and self.im_min < s.imag < self.im_max

    def boundary_distance(self, s: complex) -> float:
        """Distance from ``s`` to the window boundary (positive inside)."""
        dx = min(s.real - self.re_min, self.re_max - s.real)
        dy = min(s.imag - self.im_min, self.im_max - s.imag)
        if dx >= 0 and dy >= 0:
            return min(dx, dy)
        ox, oy = max(-dx, 0.0), max(-dy, 0.0)
        return -math.hypot(ox, oy)

    def scaled(self, alpha: float) -> "Window":
        return Window(self.re_min * alpha, self.re_max * alpha, self.im_min * alpha, self.im_max * alpha)

    @property
    def corners(self) -> list[complex]:
        return [complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max)]


@dataclass(frozen=True)
class Root:
    s: complex
    multiplicity: int
    residual: float = 0.0


@dataclass(frozen=True)
class ResonanceReport:
    roots: tuple[Root, ...]
    method: str
    window: Window | None = None
    period: float | None = None

    @property
    def count(self) -> int:
        return sum(r.multiplicity for r in self.roots)

    def sorted(self) -> "ResonanceReport":
        roots = sorted(self.roots, key=lambda r: (round(r.s.real, 12), round(r.s.imag, 12)))
        return ResonanceReport(tuple(roots), self.method, self.window, self.period)

    def replicate(self, window: Window) -> "ResonanceReport":
        """Translate the fundamental roots by multiples of ``i * period`` into ``window``."""
        if self.period is None:
            raise InputError("replication needs a chain period")
        out = []
        for r in self.roots:
            k_lo = math.ceil((window.im_min - r.s.imag) / self.period)
            k_hi = math.floor((window.im_max - r.s.imag) / self.period)
            for k in range(k_lo, k_hi + 1):
                s = r.s + 1j * k * self.period
                if window.contains(s):
                    out.append(Root(s, r.multiplicity, r.residual))
        return ResonanceReport(tuple(out), self.method, window, self.period).sorted()

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["re", "im", "multiplicity", "method"])
        for r in self.roots:
            writer.writerow([f"{r.s.real:.17g}", f"{r.s.imag:.17g}", r.multiplicity, self.method])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# exact chains for rational graphs


def _poly_newton(coeffs: np.ndarray, w: complex, order: int, iters: int = 50) -> complex:
    """Polish ``w`` as a root of the ``order``-th derivative (coeffs descending)."""
    p = np.polyder(coeffs, order) if order else coeffs
    dp = np.polyder(p)
    last = math.inf
    for _ in range(iters):
        d = np.polyval(dp, w)
        if d == 0:
            break
        step = np.polyval(p, w) / d
        if abs(step) >= last:  # stalled at rounding level
            break
        w = w - step
        last = abs(step)
        if last <= 1e-16 * max(1.0, abs(w)):
            break
    return complex(w)


# exact polynomial helpers, ascending Fraction coefficients


def _trim(a: list) -> list:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _monic(a: list) -> list:
    return [x / a[-1] for x in a]


def _divmod(a: list, b: list) -> tuple[list, list]:
    a, b = _trim(a), _trim(b)
    quo = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b):
        k = len(a) - len(b)
        f = a[-1] / b[-1]
        quo[k] = f
        for i, x in enumerate(b):
            a[i + k] -= f * x
        a = _trim(a[:-1])
    return _trim(quo), a


def _sub(a: list, b: list) -> list:
    n = max(len(a), len(b))
    return _trim([(a[k] if k < len(a) else 0) - (b[k] if k < len(b) else 0) for k in range(n)])


def _gcd(a: list, b: list) -> list:
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, _divmod(a, b)[1]
        if b:
            b = _monic(b)
    return _monic(a)


def _deriv(a: list) -> list:
    return _trim([i * x for i, x in enumerate(a)][1:])


def squarefree_parts(coeffs_ascending: Sequence) -> list[tuple[list, int]]:
    """Yun's square-free decomposition over the rationals: ``[(factor, multiplicity), ...]``."""
    f = _monic(_trim([Fraction(x) for x in coeffs_ascending]))
    if len(f) <= 1:
        return []
    df = _deriv(f)
    g = _gcd(f, df)
    b = _divmod(f, g)[0]
    d = _sub(_divmod(df, g)[0], _deriv(b))
    out = []
    i = 1
    while len(b) > 1:
        a = _gcd(b, d) if d else b
        if len(a) > 1:
            out.append((a, i))
        b = _divmod(b, a)[0]
        d = _sub(_divmod(d, a)[0], _deriv(b)) if d else []
        i += 1
    return out


def polynomial_roots(coeffs_ascending: Sequence) -> list[tuple[complex, int]]:
    """Roots with multiplicities of a polynomial; exact zero leading coefficients are trimmed.

    Rational coefficients go through an exact square-free decomposition, so
    multiplicities are exact; floating coefficients fall back to clustering.
    """
    c = list(coeffs_ascending)
    while c and c[-1] == 0:
        c.pop()
    if len(c) <= 1:
        return []
    if all(isinstance(x, (int, Fraction)) for x in c):
        out = []
        for factor, m in squarefree_parts(c):
            desc = np.array([float(x) for x in reversed(factor)], dtype=complex)
            for w in np.roots(desc):
                out.append((_poly_newton(desc, complex(w), 0), m))
        return out
    scale = max(abs(complex(x)) for x in c)
    if abs(complex(c[-1])) < LEADING_TOL * scale:
        raise ZeroLeadingCoefficient(f"leading coefficient {c[-1]} is numerically zero")
    desc = np.array([complex(x) for x in reversed(c)])
    raw = np.roots(desc)
    # cluster repeated roots
    clusters: list[list[complex]] = []
    for w in sorted(raw, key=lambda x: (x.real, x.imag)):
        for cl in clusters:
            if abs(np.mean(cl) - w) <= CLUSTER_RADIUS * max(1.0, abs(w)):
                cl.append(w)
                break
        else:
            clusters.append([w])
    out = []
    for cl in clusters:
        m = len(cl)
        w = _poly_newton(desc, complex(np.mean(cl)), m - 1)
        out.append((w, m))
    return out


def roots_rational(p: ExpPoly | RationalizedZeta, z0=1) -> ResonanceReport:
    """All zeros of ``p(., z0)`` with ``-pi q < Im s <= pi q``, with multiplicities."""
    rz = p if isinstance(p, RationalizedZeta) else rationalize(p)
    q = float(rz.q)
    coeffs = rz.w_coefficients(z0 if isinstance(z0, (int, Fraction)) else complex(z0))
    # w = 0 is s = +infinity: remove those factors
    while coeffs and coeffs[0] == 0:
        coeffs = coeffs[1:]
    roots = []
    for w, m in polynomial_roots(coeffs):
        if w == 0:
            continue
        s = -q * complex(math.log(abs(w)), cmath.phase(w))
        if s.imag <= -math.pi * q:
            s += 2j * math.pi * q
        if abs(s.imag) <= 1e-14 * max(1.0, abs(s)):
            s = complex(s.real, 0.0)
        s = complex(s.real + 0.0, s.imag + 0.0)  # no negative zeros in output
        val = rz.evaluate(s, z0)
        roots.append(Root(s, m, abs(val)))
    return ResonanceReport(tuple(roots), "companion", None, rz.period).sorted()


def exp_poly_evaluator(p: ExpPoly, z0=1.0) -> Evaluator:
    def f(s):
        return eval_exp_poly(p, s, z0)

    return f


# ---------------------------------------------------------------------------
# argument principle


def _eval(f: Evaluator, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    val, der = f(s)
    return np.asarray(val, dtype=complex), np.asarray(der, dtype=complex)


def count_zeros(f: Evaluator, window: Window, *, n0: int = 64, n_max: int = 1 << 16,
                guard: float = BOUNDARY_GUARD) -> int:
    """Winding number of ``f`` around ``window`` (zeros counted with multiplicity).

    Composite trapezoid rule for ``f'/f`` on each side; the node count doubles
    (reusing earlier nodes) until the result is stable and near an integer.
    """
    c = window.corners
    sides = list(zip(c, c[1:] + c[:1]))
    size = max(1.0, window.re_max - window.re_min, window.im_max - window.im_min)
    n = n0
    t = np.arange(n + 1) / n
    samples = [_eval(f, a + (b - a) * t) for a, b in sides]
    prev = None
    while True:
        total = 0j
        near = math.inf
        for (a, b), (val, der) in zip(sides, samples):
            if not (np.all(np.isfinite(val)) and np.all(np.isfinite(der))):
                raise QuadratureNotConverged("non-finite values on the window boundary")
            if np.any(val == 0):
                raise ZeroOnBoundary(f"f vanishes on the boundary of {window}")
            g = der / val
            total += (np.sum(g) - 0.5 * (g[0] + g[-1])) / n * (b - a)
            # |f/f'| is the Newton estimate of the distance to the nearest zero
            with np.errstate(divide="ignore"):
                near = min(near, float(np.min(1.0 / np.abs(g))))
        if not cmath.isfinite(total):
            raise QuadratureNotConverged("non-finite winding integral")
        if near <= guard * size:
            raise ZeroOnBoundary(f"a zero lies within about {near:.3g} of the boundary of {window}")
        wind = total / (2j * math.pi)
        nearest = round(wind.real)
        if prev is not None and abs(wind - prev) < 0.01 and abs(wind - nearest) < 0.05:
            return int(nearest)
        if 2 * n > n_max:
            if abs(wind - nearest) < 0.25:
                return int(nearest)
            if near < size / n:
                raise ZeroOnBoundary(f"a zero lies within about {near:.3g} of the boundary of {window}")
            raise QuadratureNotConverged(f"winding integral {wind} did not settle")
        prev = wind
        # refine: new nodes are the midpoints
        mids = (2 * np.arange(n) + 1) / (2 * n)
        refined = []
        for (a, b), (val, der) in zip(sides, samples):
            mv, md = _eval(f, a + (b - a) * mids)
            v = np.empty(2 * n + 1, dtype=complex)
            d = np.empty(2 * n + 1, dtype=complex)
            v[0::2], d[0::2] = val, der
            v[1::2], d[1::2] = mv, md
            refined.append((v, d))
        samples = refined
        n *= 2


def refine_zero(f: Evaluator, s0: complex, *, tol: float = 1e-10, max_iter: int = 100,
                scale: float = 1.0, radius: float = 1e-3) -> tuple[complex, int]:
    """Newton iteration with multiplicity correction; returns ``(root, multiplicity)``."""
    s = complex(s0)
    m = 1
    for phase in range(2):
        for _ in range(max_iter):
            val, der = (complex(x) for x in f(np.array(s)))
            if not (cmath.isfinite(val) and cmath.isfinite(der)):
                raise NoConvergence(f"non-finite values near {s}")
            if abs(val) < tol * scale * 1e-3:
                break
            if der == 0:
                raise NoConvergence(f"vanishing derivative at {s}")
            step = m * val / der
            s -= step
            if abs(s - s0) > 1e3 * max(1.0, abs(s0)):
                raise NoConvergence(f"Newton iteration from {s0} diverged")
            if abs(step) < 1e-15 * max(1.0, abs(s)):
                break
        else:
            if phase == 1 or abs(complex(f(np.array(s))[0])) > tol * scale:
                raise NoConvergence(f"no convergence from {s0} after {max_iter} iterations")
        if phase == 0:
            m = _local_multiplicity(f, s, radius)
            if m <= 1:
                break
    if abs(complex(f(np.array(s))[0])) > tol * scale:
        raise NoConvergence(f"residual too large at {s}")
    return s, max(m, 1)


def _local_multiplicity(f: Evaluator, s: complex, radius: float) -> int:
    for r in (radius, radius * 0.7, radius * 1.3):
        try:
            return count_zeros(f, Window.around(s, r), guard=0.0)
        except (ZeroOnBoundary, QuadratureNotConverged):
            continue
    return 1


def find_zeros(f: Evaluator, window: Window, *, seeds: int = 8, max_depth: int = 12,
               scale: float = 1.0) -> ResonanceReport:
    """Locate all zeros in ``window`` by recursive bisection on argument-principle counts."""
    found: list[Root] = []

    def recurse(w: Window, count: int, depth: int):
        if count == 0:
            return
        width = max(w.re_max - w.re_min, w.im_max - w.im_min)
        if count >= 1 and (depth >= max_depth or width < 1e-6):
            center = complex((w.re_min + w.re_max) / 2, (w.im_min + w.im_max) / 2)
            s, m = refine_zero(f, center, scale=scale, radius=width)
            found.append(Root(s, m, abs(complex(f(np.array(s))[0]))))
            return
        if count == 1 or depth > 3:
            center = complex((w.re_min + w.re_max) / 2, (w.im_min + w.im_max) / 2)
            try:
                s, m = refine_zero(f, center, scale=scale, radius=min(1e-3, width / 4))
            except NoConvergence:
                s, m = None, 0
            if s is not None and w.contains(s) and m == count:
                found.append(Root(s, m, abs(complex(f(np.array(s))[0]))))
                return
        # split along the longer side; nudge the cut if it hits a zero
        for frac in (0.5, 0.47, 0.53, 0.41, 0.59):
            try:
                if w.re_max - w.re_min >= w.im_max - w.im_min:
                    cut = w.re_min + frac * (w.re_max - w.re_min)
                    parts = [Window(w.re_min, cut, w.im_min, w.im_max), Window(cut, w.re_max, w.im_min, w.im_max)]
                else:
                    cut = w.im_min + frac * (w.im_max - w.im_min)
                    parts = [Window(w.re_min, w.re_max, w.im_min, cut), Window(w.re_min, w.re_max, cut, w.im_max)]
                counts = [count_zeros(f, p) for p in parts]
                break
            except (ZeroOnBoundary, QuadratureNotConverged):
                continue
        else:
            raise NoConvergence(f"could not split {w} away from zeros")
        for p, c in zip(parts, counts):
            recurse(p, c, depth + 1)

    total = count_zeros(f, window)
    recurse(window, total, 0)
    return ResonanceReport(tuple(found), "argument", window).sorted()


# ---------------------------------------------------------------------------
# real axis


def critical_exponent(f: Callable[[float], float], interval: tuple[float, float], *, n_scan: int = 400,
                      tol: float = 1e-10, derivative: Callable[[float], float] | None = None) -> float:
    """Largest real zero of ``f`` in ``interval``, found scanning downward from the right end."""
    a, b = float(interval[0]), float(interval[1])
    xs = np.linspace(b, a, n_scan + 1)
    prev_x, prev_v = xs[0], float(f(xs[0]))
    if prev_v == 0:
        return prev_x
    for x in xs[1:]:
        v = float(f(x))
        if v == 0:
            return float(x)
        if (v < 0) != (prev_v < 0):
            lo, hi = float(x), float(prev_x)
            flo = v
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                fm = float(f(mid))
                if fm == 0:
                    return mid
                if (fm < 0) == (flo < 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            root = 0.5 * (lo + hi)
            if derivative is not None:
                for _ in range(3):
                    d = derivative(root)
                    if d == 0:
                        break
                    nxt = root - f(root) / d
                    if not lo - tol <= nxt <= hi + tol:
                        break
                    root = nxt
            return float(root)
        prev_x, prev_v = x, v
    raise NoSignInformation(f"no sign change of f on [{a}, {b}]")


# ---------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class Chain:
    re: float
    period: float
    members: tuple[complex, ...]
    spread: float = 0.0

    def to_dict(self) -> dict:
        return {
            "re": self.re,
            "period": self.period,
            "spread": self.spread,
            "members": [[m.real, m.imag] for m in self.members],
        }


@dataclass(frozen=True)
class ChainGrouping:
    chains: tuple[Chain, ...]
    ungrouped: tuple[complex, ...] = field(default=())

    def to_json(self) -> str:
        return json.dumps(
            {"chains": [c.to_dict() for c in self.chains], "ungrouped": [[u.real, u.imag] for u in self.ungrouped]},
            sort_keys=True,
        )


def detect_chains(report: ResonanceReport | Sequence, period: float, *, tol_re: float = 1e-6,
                  tol_im: float = 1e-6) -> ChainGrouping:
    """Group roots sharing a real part whose imaginary parts differ by multiples of ``period``."""
    roots = [r.s if isinstance(r, Root) else complex(r) for r in (report.roots if isinstance(report, ResonanceReport)
                                                                    else report)]
    roots.sort(key=lambda s: (s.imag, s.real))
    groups: list[list[complex]] = []
    for s in roots:
        for g in groups:
            anchor = g[0]
            if abs(s.real - anchor.real) > tol_re:
                continue
            k = round((s.imag - anchor.imag) / period)
            if k != 0 and abs(s.imag - anchor.imag - k * period) <= tol_im:
                g.append(s)
                break
        else:
            groups.append([s])
    chains = []
    ungrouped = []
    for g in groups:
        if len(g) < 2:
            ungrouped.extend(g)
            continue
        res = [x.real for x in g]
        chains.append(Chain(float(np.mean(res)), period, tuple(g), float(max(res) - min(res))))
    chains.sort(key=lambda c: (c.re, c.members[0].imag))
    return ChainGrouping(tuple(chains), tuple(ungrouped))
