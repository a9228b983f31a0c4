"""Periodic-orbit data and three evaluations of the surface zeta function ``d_X(s, z)``.

* cycle expansion: ``1 + sum_l z^l d_l(s)`` built from closed-word orbit sums;
* Euler product over primitive cyclic classes (convergent for large ``Re s``);
* Fredholm determinant of a finite Cauchy-quadrature matrix of the transfer
  operator.

The cycle expansion cancels heavily for ``|z| > 1`` and ``Re s < 0``, so orbit
lengths are recomputed from the transition matrices in extended precision
(mpmath) and the coefficient recursion runs at the same precision.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
import weakref
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from .errors import (
    BoundNotApplicable,
    ConvergenceWarning,
    NotClosed,
    NotPermissible,
    NumericalFailure,
    PoleTooClose,
    QuadratureNotConverged,
)
from .flow_ifs import FlowIFS
from .hyperbolic import MoebiusMap, attracting_fixed_point, moebius_apply

DPS = 50
QUAD_TOL = 1e-10
Q_MAX = 1 << 14


# ---------------------------------------------------------------------------
# words


def enumerate_closed_words(ifs: FlowIFS, n: int) -> list[tuple[int, ...]]:
    """All admissible ``w_0 ... w_n`` with ``w_0 = w_n``, lexicographically sorted."""
    if n < 1:
        raise ValueError("word length must be positive")
    coding = ifs.coding if isinstance(ifs, FlowIFS) else ifs
    out = []
    for start in range(coding.size):
        stack = [(start,)]
        while stack:
            w = stack.pop()
            if len(w) == n:
                if start in coding.successors(w[-1]):
                    out.append(w + (start,))
                continue
            for nxt in sorted(coding.successors(w[-1]), reverse=True):
                stack.append(w + (nxt,))
    return sorted(out)


def minimal_rotation(cycle: Sequence[int]) -> tuple[int, ...]:
    cycle = tuple(cycle)
    return min(cycle[i:] + cycle[:i] for i in range(len(cycle)))


def rotation_period(cycle: Sequence[int]) -> int:
    """Smallest ``p`` with ``cycle`` invariant under rotation by ``p``."""
    cycle = tuple(cycle)
    n = len(cycle)
    for p in range(1, n + 1):
        if n % p == 0 and cycle[p:] + cycle[:p] == cycle:
            return p
    return n


# ---------------------------------------------------------------------------
# single orbits


@dataclass(frozen=True)
class OrbitRecord:
    word: tuple[int, ...]
    map: MoebiusMap
    fixed_point: complex
    log_derivative: float  # log f_w'(u_w), summed along the orbit
    length: float
    primitive: bool
    canonical: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.word) - 1


def _check_word(ifs: FlowIFS, w: Sequence[int]) -> tuple[int, ...]:
    w = tuple(int(x) for x in w)
    if len(w) < 2 or w[0] != w[-1]:
        raise NotClosed(f"word {w} does not return to its first symbol")
    for a, b in zip(w[:-1], w[1:]):
        if (a, b) not in ifs.maps:
            raise NotPermissible(f"transition {a}->{b} in {w} is not allowed")
    return w


def orbit_data(ifs: FlowIFS, w: Sequence[int]) -> OrbitRecord:
    w = _check_word(ifs, w)
    fw = ifs.word_map(w)
    u, _ = attracting_fixed_point(fw)
    log_d = 0.0
    x = u
    for a, b in zip(w[:-1], w[1:]):
        f = ifs.maps[(a, b)]
        log_d += -2.0 * math.log(abs(f.c * x + f.d))
        x = moebius_apply(f, x)
    if abs(x - u) > 1e-10 * max(1.0, abs(u)):
        raise NumericalFailure(f"orbit of {w} does not close ({abs(x - u):.3g})")
    if abs(u) >= 1:
        raise NumericalFailure(f"fixed point of {w} lies outside its disk")
    cyc = w[:-1]
    return OrbitRecord(
        word=w,
        map=fw,
        fixed_point=complex(u),
        log_derivative=log_d,
        length=-log_d,
        primitive=rotation_period(cyc) == len(cyc),
        canonical=minimal_rotation(cyc),
    )


def graph_word_length(ifs: FlowIFS, w: Sequence[int]) -> float:
    """Metric length of the spine cycle traced by the closed word."""
    return float(sum(ifs.coding.lengths[x] for x in w[:-1]))


def orbit_table_csv(records: Sequence[OrbitRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["word", "length", "log_deriv", "primitive"])
    for r in records:
        writer.writerow([" ".join(str(x) for x in r.word), f"{r.length:.17g}", f"{r.log_derivative:.17g}",
                         int(r.primitive)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# cyclic classes in extended precision


@dataclass(frozen=True)
class CyclicClass:
    canonical: tuple[int, ...]
    period: int  # number of distinct rotations
    length: mpmath.mpf

    @property
    def n(self) -> int:
        return len(self.canonical)

    @property
    def primitive(self) -> bool:
        return self.period == self.n


class OrbitTable:
    """Cyclic classes of closed words up to a given length, lengths in extended precision."""

    def __init__(self, ifs: FlowIFS, N: int, dps: int = DPS):
        self.ifs = ifs
        self.N = 0
        self.dps = dps
        self.classes: dict[int, list[CyclicClass]] = {}
        self._mats = {
            key: mpmath.matrix([[f.a, f.b], [f.c, f.d]]) for key, f in ifs.maps.items()
        }
        self.extend(N)

    def extend(self, N: int) -> None:
        if N <= self.N:
            return
        coding = self.ifs.coding
        found: dict[int, list[CyclicClass]] = {n: [] for n in range(self.N + 1, N + 1)}
        with mpmath.workdps(self.dps):
            for start in range(coding.size):
                # canonical words start with their smallest symbol
                stack = [((start,), mpmath.eye(2))]
                while stack:
                    w, m = stack.pop()
                    n = len(w)
                    if n > self.N and start in coding.successors(w[-1]):
                        cyc = w
                        if minimal_rotation(cyc) == cyc:
                            full = self._mats[(w[-1], start)] * m
                            tr = abs(full[0, 0] + full[1, 1])
                            if tr <= 2:
                                raise NumericalFailure(f"word {w} is not hyperbolic")
                            found[n].append(CyclicClass(cyc, rotation_period(cyc), 2 * mpmath.acosh(tr / 2)))
                    if n == N:
                        continue
                    for nxt in sorted(coding.successors(w[-1]), reverse=True):
                        if nxt >= start:
                            stack.append((w + (nxt,), self._mats[(w[-1], nxt)] * m))
        for n in found:
            self.classes[n] = sorted(found[n], key=lambda c: c.canonical)
        self.N = N

    def count(self, n: int) -> int:
        """Number of closed words of length ``n`` (all rotations)."""
        return sum(c.period for c in self.classes.get(n, []))

    def power_sums(self, s, n: int):
        """``S_n(s) = sum_{w in W_n} e^{-s l}/(1 - e^{-l})`` and its ``s``-derivative (mp values)."""
        s = mpmath.mpmathify(s)
        total = mpmath.mpf(0)
        dtotal = mpmath.mpf(0)
        with mpmath.workdps(self.dps):
            for c in self.classes.get(n, []):
                w = c.period * mpmath.exp(-s * c.length) / (1 - mpmath.exp(-c.length))
                total += w
                dtotal += -c.length * w
        return total, dtotal


_TABLES: dict[int, OrbitTable] = {}


def orbit_table(ifs: FlowIFS, N: int) -> OrbitTable:
    """Cached :class:`OrbitTable` for ``ifs``, extended to length ``N`` on demand."""
    key = id(ifs)
    table = _TABLES.get(key)
    if table is None or table.ifs is not ifs:
        table = OrbitTable(ifs, N)
        _TABLES[key] = table
        weakref.finalize(ifs, _TABLES.pop, key, None)
    else:
        table.extend(N)
    return table


# ---------------------------------------------------------------------------
# cycle expansion


def _coefficients_mp(table: OrbitTable, s, N: int):
    """``d_0..d_N`` and derivatives via compositions of ``N`` into parts."""
    with mpmath.workdps(table.dps):
        S = [(mpmath.mpf(0), mpmath.mpf(0))] + [table.power_sums(s, n) for n in range(1, N + 1)]
        a = [(-S[n][0] / n, -S[n][1] / n) if n else (0, 0) for n in range(N + 1)]
        # T[m][l]: sum over compositions of l into m parts of prod a_{n_j}
        T = [[(mpmath.mpf(0), mpmath.mpf(0)) for _ in range(N + 1)] for _ in range(N + 1)]
        T[0][0] = (mpmath.mpf(1), mpmath.mpf(0))
        for m in range(1, N + 1):
            for l in range(m, N + 1):
                val = mpmath.mpf(0)
                der = mpmath.mpf(0)
                for n in range(1, l - m + 2):
                    tv, td = T[m - 1][l - n]
                    val += a[n][0] * tv
                    der += a[n][1] * tv + a[n][0] * td
                T[m][l] = (val, der)
        d = [mpmath.mpf(1)] + [mpmath.mpf(0)] * N
        dd = [mpmath.mpf(0)] * (N + 1)
        for l in range(1, N + 1):
            for m in range(1, l + 1):
                fact = mpmath.factorial(m)
                d[l] += T[m][l][0] / fact
                dd[l] += T[m][l][1] / fact
    return d, dd


def cycle_coefficients(ifs: FlowIFS, s, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients ``d_1..d_N`` at ``s`` and their ``s``-derivatives."""
    table = orbit_table(ifs, N)
    d, dd = _coefficients_mp(table, s, N)
    return (np.array([complex(x) for x in d[1:]]), np.array([complex(x) for x in dd[1:]]))


def newton_coefficients(ifs: FlowIFS, s, N: int) -> np.ndarray:
    """Same coefficients through Newton's identities; an independent check of the composition sum."""
    table = orbit_table(ifs, N)
    with mpmath.workdps(table.dps):
        S = [None] + [table.power_sums(s, n)[0] for n in range(1, N + 1)]
        d = [mpmath.mpf(1)]
        for l in range(1, N + 1):
            d.append(-sum(S[n] * d[l - n] for n in range(1, l + 1)) / l)
    return np.array([complex(x) for x in d[1:]])


@dataclass(frozen=True)
class ZetaValue:
    s: complex
    z: complex
    value: complex
    ds: complex
    N: int
    truncation_diag: float

    def to_dict(self) -> dict:
        return {
            "s": [self.s.real, self.s.imag],
            "z": [self.z.real, self.z.imag],
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "N": self.N,
            "truncation_diag": self.truncation_diag if math.isfinite(self.truncation_diag) else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def surface_zeta_eval(ifs: FlowIFS, s, z, N: int | None = None) -> ZetaValue:
    """Truncated cycle expansion ``1 + sum_{l<=N} z^l d_l(s)``; ``N`` defaults to ``2k``."""
    k = ifs.size // 2
    N = 2 * k if N is None else int(N)
    s, z = complex(s), complex(z)
    table = orbit_table(ifs, N)
    d, dd = _coefficients_mp(table, s, N)
    with mpmath.workdps(table.dps):
        zm = mpmath.mpc(z)
        val = mpmath.mpf(1)
        der = mpmath.mpf(0)
        zp = mpmath.mpf(1)
        for l in range(1, N + 1):
            zp *= zm
            val += zp * d[l]
            der += zp * dd[l]
    A = max(abs(z), abs(s) * ifs.max_boundary_length)
    try:
        diag = truncation_estimate(k, A, ifs.eta_hat)
    except BoundNotApplicable:
        diag = math.inf
    return ZetaValue(s, z, complex(val), complex(der), N, diag)


def log_zeta_trace_sum(ifs: FlowIFS, s, z, N: int) -> complex:
    """``sum_{n<=N} (z^n/n) sum_{w in W_n} f_w'(u_w)^s / (1 - f_w'(u_w))``, i.e. ``-log d`` truncated."""
    table = orbit_table(ifs, N)
    total = mpmath.mpf(0)
    with mpmath.workdps(table.dps):
        for n in range(1, N + 1):
            total += mpmath.mpc(z) ** n / n * table.power_sums(complex(s), n)[0]
    return complex(total)


def truncation_estimate(k: int, A: float, eta: float) -> float:
    """Tail bound for the cycle expansion beyond ``z^{2k}``, implicit constant set to 1 (heuristic)."""
    if A == 0:
        return 0.0
    x = A * math.exp(A) * (2 * k + 1) ** 6 / math.exp(eta / (8 * k + 4))
    if not x < 1:
        raise BoundNotApplicable(f"ratio {x:.3g} >= 1; eta = {eta} is too small for the bound")
    return x ** (2 * k + 1) / (1 - x)


# ---------------------------------------------------------------------------
# Euler product


def pressure_exponent(ifs: FlowIFS, n: int = 10) -> float:
    """Real ``delta`` with ``sum_{W_n} e^{-delta l} = 1`` (a finite-``n`` critical exponent estimate)."""
    table = orbit_table(ifs, n)
    lengths = [(c.period, float(c.length)) for c in table.classes.get(n, [])]
    if not lengths:
        return -math.inf

    def f(x):
        return math.fsum(p * math.exp(-x * l) for p, l in lengths) - 1.0

    lo, hi = -1.0, 1.0
    while f(lo) < 0:
        lo *= 2
    while f(hi) > 0:
        hi *= 2
    for _ in range(200):
        mid = (lo + hi) / 2
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


@dataclass(frozen=True)
class EulerProduct:
    value: complex
    tail_estimate: float
    n_classes: int


def euler_product_zeta(ifs: FlowIFS, s, word_cutoff: int, k_cutoff: int, z=1.0, *,
                       margin: float = 0.1) -> EulerProduct:
    """``prod_{[w] primitive, |w|<=cutoff} prod_{k<=k_cutoff} (1 - z^{|w|} e^{-(s+k) l_w})``."""
    s, z = complex(s), complex(z)
    if word_cutoff < 1:
        return EulerProduct(1.0 + 0j, 0.0, 0)
    table = orbit_table(ifs, word_cutoff)
    crit = pressure_exponent(ifs, word_cutoff)
    if not s.real > crit + margin:
        warnings.warn(
            f"Re(s) = {s.real} is not beyond the estimated critical exponent {crit:.4g} + {margin}; "
            "the product may not converge",
            ConvergenceWarning,
            stacklevel=2,
        )
    total = mpmath.mpf(1)
    count = 0
    last = [0.0] * (word_cutoff + 1)
    min_len = math.inf
    with mpmath.workdps(table.dps):
        sm, zm = mpmath.mpc(s), mpmath.mpc(z)
        for n in range(1, word_cutoff + 1):
            for c in table.classes.get(n, []):
                if not c.primitive:
                    continue
                count += 1
                min_len = min(min_len, float(c.length))
                zn = zm**n
                for kk in range(k_cutoff + 1):
                    term = zn * mpmath.exp(-(sm + kk) * c.length)
                    total *= 1 - term
                    last[n] += abs(complex(term))
    # geometric extrapolation of the per-length contributions, plus the first omitted k
    tail = 0.0
    if word_cutoff >= 2 and last[word_cutoff - 1] > 0 and last[word_cutoff] > 0:
        ratio = last[word_cutoff] / last[word_cutoff - 1]
        tail = last[word_cutoff] * ratio / (1 - ratio) if ratio < 1 else math.inf
    if math.isfinite(min_len):
        tail += count * math.exp(-(s.real + k_cutoff + 1) * min_len)
    return EulerProduct(complex(total), tail, count)


# ---------------------------------------------------------------------------
# nuclear (finite-matrix) approximation


def quadrature_radius(ifs: FlowIFS) -> float:
    poles = [abs(f.pole) for f in ifs.maps.values() if f.c != 0]
    nearest = min(poles) if poles else math.inf
    rho = min(math.exp(ifs.eta_hat / 2), 0.8 * nearest)
    if not rho > 1:
        raise PoleTooClose(f"a pole at distance {nearest:.4g} leaves no room around the unit disk")
    return rho


def _block(f: MoebiusMap, s: complex, M: int, rho: float, Q: int, derivative: bool = False):
    """Taylor coefficients (rows n) of ``f'(w)^s f(w)^m`` (columns m) on ``|w| = rho``.

    With ``derivative`` also returns the coefficients of the ``s``-derivative.
    """
    w = rho * np.exp(2j * np.pi * np.arange(Q) / Q)
    den = f.c * w + f.d
    if f.d < 0:
        den = -den
    if np.min(den.real) <= 0:
        raise PoleTooClose("branch of (cw+d)^(-2s) is not defined on the contour")
    log_fp = -2 * np.log(den)
    weight = np.exp(s * log_fp)
    fw = (f.a * w + f.b) / (f.c * w + f.d)
    powers = fw[:, None] ** np.arange(M + 1)[None, :]
    norm = rho ** np.arange(M + 1)[:, None]
    coeffs = (np.fft.fft(weight[:, None] * powers, axis=0) / Q)[: M + 1, :] / norm
    if not derivative:
        return coeffs
    dcoeffs = (np.fft.fft((log_fp * weight)[:, None] * powers, axis=0) / Q)[: M + 1, :] / norm
    return coeffs, dcoeffs


def _build(ifs: FlowIFS, s: complex, M: int, rho: float, Q: int, derivative: bool = False):
    n = ifs.size * (M + 1)
    out = np.zeros((n, n), dtype=complex)
    dout = np.zeros((n, n), dtype=complex) if derivative else None
    for (i, j), f in ifs.maps.items():
        rows, cols = slice(i * (M + 1), (i + 1) * (M + 1)), slice(j * (M + 1), (j + 1) * (M + 1))
        blk = _block(f, s, M, rho, Q, derivative)
        if derivative:
            out[rows, cols], dout[rows, cols] = blk
        else:
            out[rows, cols] = blk
    return (out, dout) if derivative else out


def stable_quadrature(ifs: FlowIFS, s, M: int = 24, Q: int | None = None) -> tuple[np.ndarray, int]:
    """Matrix at the first ``Q`` (doubling from ``4(M+1)``) where doubling changes it by at most 1e-10."""
    s = complex(s)
    rho = quadrature_radius(ifs)
    Q = 4 * (M + 1) if Q is None else int(Q)
    current = _build(ifs, s, M, rho, Q)
    while True:
        if 2 * Q > Q_MAX:
            raise QuadratureNotConverged(f"no stable quadrature up to Q = {Q}")
        refined = _build(ifs, s, M, rho, 2 * Q)
        change = np.max(np.abs(refined - current))
        if change <= QUAD_TOL * max(1.0, np.max(np.abs(refined))):
            return refined, 2 * Q
        current, Q = refined, 2 * Q


def nuclear_matrix(ifs: FlowIFS, s, M: int = 24, Q: int | None = None) -> np.ndarray:
    """The ``2k(M+1)`` square matrix of the transfer operator in monomial bases."""
    return stable_quadrature(ifs, s, M, Q)[0]


def nuclear_zeta(ifs: FlowIFS, s, z, M: int = 24, Q: int | None = None) -> complex:
    """``det(1 - z L_s)`` with the transfer operator truncated to degree ``M``."""
    z = complex(z)
    if z == 0:
        return 1.0 + 0j
    mat = nuclear_matrix(ifs, s, M, Q)
    return complex(np.linalg.det(np.eye(mat.shape[0]) - z * mat))


def nuclear_eigenvalues(ifs: FlowIFS, s, M: int = 24) -> np.ndarray:
    """Eigenvalues ``lambda`` so that ``det(1 - zL) = prod (1 - z lambda)`` for many ``z`` at once."""
    return np.linalg.eigvals(nuclear_matrix(ifs, s, M))


def zeta_from_eigenvalues(eigs: np.ndarray, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.prod(1 - z[..., None] * eigs, axis=-1)


def surface_evaluator(ifs: FlowIFS, z=1.0, M: int = 24, s_ref=0.0):
    """``s -> (d_X(s, z), d/ds d_X(s, z))`` from the nuclear matrix, vectorized over ``s``.

    The quadrature size is fixed once (at ``s_ref``) and then doubled for margin.
    """
    z = complex(z)
    rho = quadrature_radius(ifs)
    _, Q = stable_quadrature(ifs, s_ref, M)
    Q *= 2
    eye = np.eye(ifs.size * (M + 1))

    def one(s):
        mat, dmat = _build(ifs, complex(s), M, rho, Q, derivative=True)
        A = eye - z * mat
        val = np.linalg.det(A)
        if val == 0:
            return 0j, 0j
        der = val * np.trace(np.linalg.solve(A, -z * dmat))
        return complex(val), complex(der)

    def f(s):
        arr = np.asarray(s, dtype=complex)
        flat = arr.reshape(-1)
        out = np.array([one(x) for x in flat])
        vals = out[:, 0].reshape(arr.shape)
        ders = out[:, 1].reshape(arr.shape)
        if arr.ndim == 0:
            return complex(vals), complex(ders)
        return vals, ders

    return f
