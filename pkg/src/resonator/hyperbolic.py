"""Real Moebius transformations, disks, and right-angled hexagon trigonometry.

``MoebiusMap`` stores a real matrix normalized to determinant one. Matrices
with ``|trace| > 2`` are further normalized to positive trace so that the
PSL(2, R) sign ambiguity disappears.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotHyperbolic, PoleHit, PoleInsideDisk

DET_TOL = 1e-12


@dataclass(frozen=True)
class MoebiusMap:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        # det within rounding of 1 is left alone: rescaling by cancellation noise
        # in ad - bc would spoil products of long words
        noise = 8e-16 * (abs(self.a * self.d) + abs(self.b * self.c))
        if abs(det - 1.0) <= noise:
            scale = 1.0
        elif det > 0:
            scale = 1.0 / math.sqrt(det)
        else:
            raise DomainError(f"Moebius matrix needs positive determinant, got {det}")
        a, b, c, d = (x * scale for x in (self.a, self.b, self.c, self.d))
        if abs(a + d) > 2 and a + d < 0:
            a, b, c, d = -a, -b, -c, -d
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @classmethod
    def from_matrix(cls, m) -> "MoebiusMap":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def pole(self) -> complex:
        """Preimage of infinity (``inf`` for affine maps)."""
        if self.c == 0:
            return complex(math.inf)
        return complex(-self.d / self.c)

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def power(self, j: int) -> "MoebiusMap":
        out = MoebiusMap.identity()
        base = self if j >= 0 else self.inverse()
        for _ in range(abs(j)):
            out = out @ base
        return out

    def is_hyperbolic(self) -> bool:
        return abs(self.trace) > 2

    def __call__(self, u):
        return moebius_apply(self, u)


def moebius_apply(m: MoebiusMap, u):
    den = m.c * u + m.d
    if np.any(den == 0):
        raise PoleHit(f"{u} is the pole of {m}")
    return (m.a * u + m.b) / den


def moebius_derivative(m: MoebiusMap, u):
    den = m.c * u + m.d
    if np.any(den == 0):
        raise PoleHit(f"{u} is the pole of {m}")
    return 1.0 / den**2


def log_derivative(m: MoebiusMap, u) -> complex:
    """``log f'(u)``; on the real axis this is real."""
    den = m.c * u + m.d
    if den == 0:
        raise PoleHit(f"{u} is the pole of {m}")
    if isinstance(u, (float, int)) or (isinstance(u, complex) and u.imag == 0):
        return complex(-2.0 * math.log(abs(den.real if isinstance(den, complex) else den)))
    return -2.0 * cmath.log(den)


def attracting_fixed_point(m: MoebiusMap) -> tuple[float, float]:
    """Attracting fixed point of a hyperbolic map and the derivative there."""
    if not m.is_hyperbolic():
        raise NotHyperbolic(f"|trace| = {abs(m.trace)} <= 2")
    a, b, c, d = m.a, m.b, m.c, m.d
    if c == 0:
        if abs(a / d) >= 1:
            raise DomainError("attracting fixed point is at infinity")
        u = b / (d - a)
        return u, a / d
    # c u^2 + (d - a) u - b = 0, two real roots
    p = d - a
    disc = p * p + 4 * b * c
    sq = math.sqrt(disc)
    q = -0.5 * (p + math.copysign(sq, p if p != 0 else 1.0))
    roots = [q / c, -b / q] if q != 0 else [-p / (2 * c)]
    best = max(roots, key=lambda u: abs(c * u + d))  # smallest |f'|
    deriv = 1.0 / (c * best + d) ** 2
    return best, deriv


def translation_length(m: MoebiusMap) -> float:
    t = abs(m.trace)
    if t <= 2:
        raise NotHyperbolic(f"|trace| = {t} <= 2")
    return 2.0 * math.acosh(t / 2.0)


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")
        object.__setattr__(self, "center", complex(self.center))

    def contains(self, u, margin: float = 0.0) -> bool:
        return abs(u - self.center) < self.radius - margin

    def boundary(self, n: int = 100) -> np.ndarray:
        theta = 2 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.exp(1j * theta)

    @property
    def real_interval(self) -> tuple[float, float]:
        return self.center.real - self.radius, self.center.real + self.radius


UNIT_DISK = Disk(0j, 1.0)


def disk_image(m: MoebiusMap, disk: Disk) -> Disk:
    pole = m.pole
    if math.isinf(pole.real):
        return Disk(m(disk.center), disk.radius * abs(m.a / m.d))
    gap = abs(pole - disk.center) - disk.radius
    if gap <= 0:
        raise PoleInsideDisk(f"pole {pole} lies in the closed disk {disk}")
    # the image center is the image of the pole's reflection in the circle
    mirror = disk.center + disk.radius**2 / (pole - disk.center).conjugate()
    center = m(mirror)
    pts = m(disk.boundary(4))
    radius = float(np.mean(np.abs(pts - center)))
    return Disk(center, radius)


def geodesic_distance_between(a: float, b: float, c: float, d: float) -> float:
    """Hyperbolic distance between disjoint geodesics with real endpoints ``(a, b)`` and ``(c, d)``."""
    x = (a - c) * (b - d) / ((a - d) * (b - c))
    if not 0 <= x < 1:
        raise DomainError(f"geodesics ({a}, {b}) and ({c}, {d}) intersect")
    return 2.0 * math.atanh(math.sqrt(x))


def hyperbolic_distance(p: complex, q: complex) -> float:
    """Distance in the upper half-plane."""
    if p.imag <= 0 or q.imag <= 0:
        raise DomainError("points must lie in the upper half-plane")
    return 2.0 * math.asinh(abs(p - q) / (2.0 * math.sqrt(p.imag * q.imag)))


def hexagon_side(x: float, y: float, z: float) -> float:
    """Side of a right-angled hexagon opposite ``x``, between alternate sides ``y`` and ``z``.

    ``cosh(w) = (cosh(y) cosh(z) + cosh(x)) / (sinh(y) sinh(z))``, evaluated as
    ``cosh(w) - 1 = (cosh(y - z) + cosh(x)) / (sinh(y) sinh(z))`` to keep
    precision when ``w`` is small.
    """
    if not (x > 0 and y > 0 and z > 0):
        raise DomainError(f"hexagon sides must be positive, got {(x, y, z)}")
    t = (math.cosh(y - z) + math.cosh(x)) / (math.sinh(y) * math.sinh(z))
    if t < 0:
        raise DomainError("arccosh argument below 1")
    return 2.0 * math.asinh(math.sqrt(t / 2.0))


# frames in the unit tangent bundle; g . i is the base point, g'(i) . i the direction


def flow(t: float) -> np.ndarray:
    """Move distance ``t`` forward along the current direction."""
    return np.array([[math.exp(t / 2), 0.0], [0.0, math.exp(-t / 2)]])


def turn(angle: float) -> np.ndarray:
    """Rotate the current direction counterclockwise by ``angle``."""
    h = -angle / 2
    return np.array([[math.cos(h), -math.sin(h)], [math.sin(h), math.cos(h)]])


def frame_point(g: np.ndarray) -> complex:
    return (g[0, 0] * 1j + g[0, 1]) / (g[1, 0] * 1j + g[1, 1])


def unit_translation(xi: float) -> MoebiusMap:
    """Hyperbolic translation by ``xi`` along the geodesic from -1 to 1."""
    return MoebiusMap(math.cosh(xi), math.sinh(xi), math.sinh(xi), math.cosh(xi))
