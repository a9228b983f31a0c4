"""Exact graph zeta functions as exponential polynomials.

An :class:`ExpPoly` is a finite sum ``sum a * z**b * exp(-c*s)``. With exact
(rational) edge lengths every coefficient ``a`` and rate ``c`` is a
:class:`fractions.Fraction`; with floating-point lengths the rates are floats
merged with an absolute tolerance of ``RATE_TOL``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from .errors import IrrationalRates, MatrixTooLarge
from .graph_core import DirectedEdgeCoding

RATE_TOL = 1e-12
MAX_EXACT_SIZE = 20

Number = Union[int, Fraction, float]


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def _parse(x):
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            return float(x)
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return float(x)


class ExpPoly:
    """Canonical exponential polynomial in ``(s, z)``.

    Terms are stored as ``(a, b, c)`` sorted by ``b`` then ``c`` with no
    repeated ``(b, c)`` and no zero coefficient.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[Number, int, Number]] = ()):
        self.terms: tuple[tuple[Number, int, Number], ...] = _canonical(terms)

    # construction -------------------------------------------------------
    @classmethod
    def one(cls) -> "ExpPoly":
        return cls([(Fraction(1), 0, Fraction(0))])

    @classmethod
    def monomial(cls, a, b, c) -> "ExpPoly":
        return cls([(a, b, c)])

    # algebra ------------------------------------------------------------
    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        return ExpPoly(self.terms + other.terms)

    def __neg__(self) -> "ExpPoly":
        return ExpPoly((-a, b, c) for a, b, c in self.terms)

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self + (-other)

    def __mul__(self, other) -> "ExpPoly":
        if isinstance(other, ExpPoly):
            return ExpPoly(
                (a1 * a2, b1 + b2, c1 + c2) for a1, b1, c1 in self.terms for a2, b2, c2 in other.terms
            )
        return ExpPoly((a * other, b, c) for a, b, c in self.terms)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, ExpPoly) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[Number, int, Number]]:
        return iter(self.terms)

    def __repr__(self) -> str:
        return f"ExpPoly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for a, b, c in sorted(self.terms, key=lambda t: (-t[1], -float(t[2]))):
            mono = []
            if b:
                mono.append("z" if b == 1 else f"z^{b}")
            if c:
                rate = _fmt(c)
                mono.append("e^(-s)" if rate == "1" else f"e^(-{rate}s)")
            body = "*".join(mono)
            coeff = _fmt(a)
            if body:
                coeff = {"1": "", "-1": "-"}.get(coeff, coeff + "*")
            parts.append(coeff + body)
        return " + ".join(parts).replace("+ -", "- ")

    # queries ------------------------------------------------------------
    @property
    def exact(self) -> bool:
        return all(_is_exact(a) and _is_exact(c) for a, _, c in self.terms)

    @property
    def z_degree(self) -> int:
        return max((b for _, b, _ in self.terms), default=0)

    def coefficient(self, b: int) -> "ExpPoly":
        """The part of ``self`` multiplying ``z**b`` (returned with zpow 0)."""
        return ExpPoly((a, 0, c) for a, bb, c in self.terms if bb == b)

    def truncate(self, max_b: int) -> "ExpPoly":
        return ExpPoly(t for t in self.terms if t[1] <= max_b)

    def scale_rates(self, alpha) -> "ExpPoly":
        return ExpPoly((a, b, c * alpha) for a, b, c in self.terms)

    def constant_term(self) -> Number:
        for a, b, c in self.terms:
            if b == 0 and c == 0:
                return a
        return 0

    # evaluation ---------------------------------------------------------
    def __call__(self, s, z=1.0):
        return eval_exp_poly(self, s, z)[0]

    # serialization ------------------------------------------------------
    def to_json(self) -> str:
        return json.dumps([{"a": _fmt(a), "b": b, "c": _fmt(c)} for a, b, c in self.terms])

    @classmethod
    def from_json(cls, text: str) -> "ExpPoly":
        return cls((_parse(t["a"]), int(t["b"]), _parse(t["c"])) for t in json.loads(text))


def _canonical(terms) -> tuple:
    exact_terms: dict[tuple[int, Fraction], Fraction] = {}
    float_terms: list[tuple[int, float, Number]] = []
    for a, b, c in terms:
        b = int(b)
        if b < 0:
            raise ValueError("negative z power")
        if _is_exact(c):
            c = Fraction(c)
            if _is_exact(a):
                key = (b, c)
                exact_terms[key] = exact_terms.get(key, Fraction(0)) + Fraction(a)
                continue
        float_terms.append((b, float(c), a))
    out = [(a, b, c) for (b, c), a in exact_terms.items() if a != 0]
    if float_terms:
        # merge floating rates (and exact rates carrying float coefficients)
        merged = [(b, float(c), a) for a, b, c in out] + float_terms
        merged.sort(key=lambda t: (t[0], t[1]))
        out = []
        for b, c, a in merged:
            if out and out[-1][1] == b and abs(out[-1][2] - c) <= RATE_TOL:
                pa, pb, pc = out[-1]
                out[-1] = (pa + a, pb, pc)
            else:
                out.append((a, b, c))
        out = [(a, b, c) for a, b, c in out if a != 0]
    out.sort(key=lambda t: (t[1], float(t[2])))
    return tuple(out)


def eval_exp_poly(p: ExpPoly, s, z=1.0):
    """Evaluate ``p`` and its ``s``-derivative. Accepts scalars or arrays."""
    s_arr = np.asarray(s, dtype=complex)
    z_arr = np.asarray(z, dtype=complex)
    value = np.zeros(np.broadcast(s_arr, z_arr).shape, dtype=complex)
    ds = np.zeros_like(value)
    for a, b, c in p.terms:
        term = float(a) * z_arr**b * np.exp(-float(c) * s_arr)
        value = value + term
        ds = ds - float(c) * term
    if value.ndim == 0:
        return complex(value), complex(ds)
    return value, ds


# ---------------------------------------------------------------------------
# transfer matrix


@dataclass(frozen=True)
class SymbolicMatrix:
    """Sparse ``2k x 2k`` matrix whose entries are single terms ``exp(-rate*s)``."""

    size: int
    rates: Mapping[tuple[int, int], Number]

    def support(self) -> np.ndarray:
        out = np.zeros((self.size, self.size), dtype=np.int64)
        for i, j in self.rates:
            out[i, j] = 1
        return out

    def row(self, i: int) -> list[tuple[int, Number]]:
        return sorted((j, r) for (ii, j), r in self.rates.items() if ii == i)

    def numeric(self, s: complex) -> np.ndarray:
        out = np.zeros((self.size, self.size), dtype=complex)
        for (i, j), r in self.rates.items():
            out[i, j] = np.exp(-float(r) * s)
        return out

    @property
    def exact(self) -> bool:
        return all(_is_exact(r) for r in self.rates.values())


def build_J(coding: DirectedEdgeCoding) -> SymbolicMatrix:
    n = coding.size
    rates = {}
    for i in range(n):
        for j in coding.successors(i):
            li, lj = coding.lengths[i], coding.lengths[j]
            rates[(i, j)] = (li + lj) / 2 if _is_exact(li) and _is_exact(lj) else (float(li) + float(lj)) / 2
    return SymbolicMatrix(n, rates)


def _perm_parity(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    parity = 0
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def _det_terms(J: SymbolicMatrix, max_size: int):
    n = J.size
    if n > max_size:
        raise MatrixTooLarge(f"exact expansion capped at 2k <= {max_size}, got {n}")
    zero = Fraction(0) if J.exact else 0.0
    rows = [J.row(i) for i in range(n)]
    perm = [-1] * n
    used = [False] * n
    terms: list[tuple[int, int, Number]] = []

    # each leaf picks, per row, the identity entry 1 or an entry -z*J[i, j]
    def dfs(i: int, sign: int, zpow: int, rate) -> None:
        if i == n:
            parity = _perm_parity(perm)
            terms.append((-sign if parity else sign, zpow, rate))
            return
        if not used[i]:
            used[i] = True
            perm[i] = i
            dfs(i + 1, sign, zpow, rate)
            used[i] = False
        for j, r in rows[i]:
            if used[j]:
                continue
            used[j] = True
            perm[i] = j
            dfs(i + 1, -sign, zpow + 1, rate + r)
            used[j] = False
        perm[i] = -1

    dfs(0, 1, 0, zero)
    return terms


def graph_zeta(coding_or_J: Union[DirectedEdgeCoding, SymbolicMatrix], *,
               max_size: int = MAX_EXACT_SIZE) -> ExpPoly:
    """Exact ``det(I - z J_s)`` by sparse permutation expansion."""
    J = coding_or_J if isinstance(coding_or_J, SymbolicMatrix) else build_J(coding_or_J)
    return ExpPoly((Fraction(a), b, c) for a, b, c in _det_terms(J, max_size))


def trace_power(J: SymbolicMatrix, n: int) -> ExpPoly:
    """Exact trace of ``J_s**n``, recorded with z-power ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    size = J.size
    zero = Fraction(0) if J.exact else 0.0
    succ = [J.row(i) for i in range(size)]
    terms = []
    for start in range(size):
        # state: (vertex, accumulated rate) -> number of walks
        layer: dict[tuple[int, Number], int] = {(start, zero): 1}
        for _ in range(n):
            nxt: dict[tuple[int, Number], int] = {}
            for (v, r), cnt in layer.items():
                for j, rr in succ[v]:
                    key = (j, r + rr)
                    nxt[key] = nxt.get(key, 0) + cnt
            layer = nxt
        terms.extend((Fraction(cnt), n, r) for (v, r), cnt in layer.items() if v == start)
    return ExpPoly(terms)


def zeta_from_traces(J: SymbolicMatrix, max_order: int | None = None) -> ExpPoly:
    """``exp(-sum_n z^n/n tr(J^n))`` truncated at z-degree ``max_order`` (default ``2k``).

    Uses ``l*d_l = -sum_{n=1}^{l} tr(J^n) d_{l-n}``; exact for rational rates.
    """
    N = J.size if max_order is None else max_order
    traces = [None] + [trace_power(J, n) for n in range(1, N + 1)]
    # d_l carried as pure-s ExpPolys (z power stripped)
    d = [ExpPoly.one()]
    for l in range(1, N + 1):
        acc = ExpPoly()
        for n in range(1, l + 1):
            acc = acc + traces[n].coefficient(n) * d[l - n]
        d.append(acc * Fraction(-1, l) if J.exact else acc * (-1.0 / l))
    return ExpPoly((a, l, c) for l, dl in enumerate(d) for a, _, c in dl.terms)


# ---------------------------------------------------------------------------
# rationalization


@dataclass(frozen=True)
class RationalizedZeta:
    """``p(s, z) = sum a * z**b * w**e`` with ``w = exp(-unit * s)`` and ``unit = 1/q``."""

    q: Fraction
    coeffs: Mapping[tuple[int, int], Fraction]

    @property
    def unit(self) -> Fraction:
        return 1 / self.q

    @property
    def period(self) -> float:
        """Imaginary period ``2*pi*q`` of the zero set at fixed ``z``."""
        return 2 * math.pi * float(self.q)

    @property
    def w_degree(self) -> int:
        return max((e for _, e in self.coeffs), default=0)

    def w_coefficients(self, z0) -> list:
        """Coefficients (ascending powers of ``w``) at ``z = z0``; exact when ``z0`` is exact."""
        deg = self.w_degree
        exact = isinstance(z0, (int, Fraction))
        out = [Fraction(0) if exact else 0j for _ in range(deg + 1)]
        for (b, e), a in self.coeffs.items():
            out[e] += a * (Fraction(z0) ** b if exact else complex(z0) ** b)
        return out

    def evaluate(self, s, z=1.0):
        w = np.exp(-float(self.unit) * np.asarray(s, dtype=complex))
        total = 0j
        for (b, e), a in self.coeffs.items():
            total = total + float(a) * complex(z) ** b * w**e
        return total


def _as_rational(c, max_den: int) -> Fraction:
    if _is_exact(c):
        return Fraction(c)
    f = Fraction(float(c)).limit_denominator(max_den)
    if abs(float(f) - float(c)) > RATE_TOL * max(1.0, abs(float(c))):
        raise IrrationalRates(f"rate {c!r} is not a rational with denominator <= {max_den}")
    return f


def rationalize(p: ExpPoly, *, max_den: int = 1000) -> RationalizedZeta:
    rates = [_as_rational(c, max_den) for _, _, c in p.terms]
    nonzero = [r for r in rates if r != 0]
    if any(r < 0 for r in rates):
        raise IrrationalRates("negative rates are not supported")
    if not nonzero:
        unit = Fraction(1)
    else:
        num = reduce(math.gcd, (r.numerator for r in nonzero))
        den = reduce(lambda x, y: x * y // math.gcd(x, y), (r.denominator for r in nonzero))
        unit = Fraction(num, den)
    coeffs: dict[tuple[int, int], Fraction] = {}
    for (a, b, _), r in zip(p.terms, rates):
        e = r / unit
        assert e.denominator == 1
        key = (b, int(e))
        coeffs[key] = coeffs.get(key, Fraction(0)) + Fraction(a)
    coeffs = {k: v for k, v in coeffs.items() if v != 0}
    return RationalizedZeta(1 / unit, coeffs)
