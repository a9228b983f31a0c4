"""Flow-adapted iterated function schemes for funneled hyperbolic surfaces.

One unit disk per directed spine edge. For every allowed transition ``i -> j``
the map ``f_ij`` is the isometry carrying the sector in which ``e_i`` starts
(placed so that the intercostal crossed by ``e_i`` sits on the unit half-circle,
symmetric about ``i``) onto its neighbouring lift inside the picture of ``e_j``.

Two constructions are provided:

* :func:`build_pants_ifs` places the right-angled hexagons of a pair of pants
  from explicit vertex coordinates and matches glued sides point-by-point;
* :func:`build_ifs_from_sectors` handles arbitrary :class:`SectorData` by
  walking each hexagon with frames of the unit tangent bundle.

They share nothing below :func:`_assemble`, so agreement between them is a
meaningful check.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import DegenerateSpine, GluingMismatch, InputError, NotADiskMap, NumericalFailure
from .graph_core import (
    DirectedEdgeCoding,
    MetricRibbonGraph,
    directed_coding,
    parse_length,
    theta_graph,
    trace_faces,
    validate_graph,
)
from .hyperbolic import (
    UNIT_DISK,
    Disk,
    MoebiusMap,
    disk_image,
    flow,
    frame_point,
    geodesic_distance_between,
    hexagon_side,
    hyperbolic_distance,
    moebius_apply,
    turn,
    unit_translation,
)

SIDE_TOL = 1e-10
# given intercostal lengths may be rounded; the synthesized values are used
HEXAGON_TOL = 1e-4


# ---------------------------------------------------------------------------
# input data


@dataclass(frozen=True)
class Side:
    type: str  # "boundary" or "intercostal"
    length: float | None


@dataclass(frozen=True)
class Sector:
    sides: tuple[Side, ...]

    @property
    def boundary_indices(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.sides) if s.type == "boundary")

    @property
    def intercostal_indices(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.sides) if s.type == "intercostal")


@dataclass(frozen=True)
class SectorData:
    """Right-angled hexagons (sides listed counterclockwise) and their gluings.

    ``gluings[g] = (sa, ia, sb, ib)`` glues intercostal side ``ia`` of sector
    ``sa`` to side ``ib`` of sector ``sb`` with reversed orientation. Gluing
    ``g`` becomes spine edge ``g + 1``; its forward direction starts in ``sa``.
    ``directed_edges`` optionally reorders the alphabet: entry ``m`` is the
    ``(sector, side)`` pair crossed by symbol ``m``.
    """

    sectors: tuple[Sector, ...]
    gluings: tuple[tuple[int, int, int, int], ...]
    directed_edges: tuple[tuple[int, int], ...] | None = None

    @classmethod
    def from_dict(cls, raw: Mapping) -> "SectorData":
        try:
            sectors = []
            for sec in raw["sectors"]:
                sides = []
                for side in sec["sides"]:
                    kind = side["type"]
                    if kind not in ("boundary", "intercostal"):
                        raise InputError(f"unknown side type {kind!r}")
                    length = side.get("len")
                    sides.append(Side(kind, None if length is None else float(parse_length(length))))
                sectors.append(Sector(tuple(sides)))
            gluings = tuple(tuple(int(x) for x in g) for g in raw["gluings"])
            de = raw.get("directed_edges")
            directed = None if de is None else tuple(tuple(int(x) for x in d) for d in de)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed sector data: {exc}") from exc
        if any(len(g) != 4 for g in gluings):
            raise InputError("each gluing is [sector, side, sector, side]")
        return cls(tuple(sectors), gluings, directed)

    @classmethod
    def from_json(cls, text: str) -> "SectorData":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SectorData":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def to_dict(self) -> dict:
        out = {
            "sectors": [
                {"sides": [{"type": s.type, "len": None if s.length is None else repr(s.length)} for s in sec.sides]}
                for sec in self.sectors
            ],
            "gluings": [list(g) for g in self.gluings],
        }
        if self.directed_edges is not None:
            out["directed_edges"] = [list(d) for d in self.directed_edges]
        return out


def pants_sector_data(L1, L2, L3, *, with_intercostals: bool = True) -> SectorData:
    """Two mirror hexagons of the pair of pants with cuff lengths ``L1, L2, L3``."""
    L1, L2, L3 = (float(x) for x in (L1, L2, L3))
    s12 = hexagon_side(L3 / 2, L1 / 2, L2 / 2)
    s23 = hexagon_side(L1 / 2, L2 / 2, L3 / 2)
    s31 = hexagon_side(L2 / 2, L3 / 2, L1 / 2)

    def side(kind, length):
        return Side(kind, length if (kind == "boundary" or with_intercostals) else None)

    h0 = Sector((side("boundary", L1 / 2), side("intercostal", s12), side("boundary", L2 / 2),
                 side("intercostal", s23), side("boundary", L3 / 2), side("intercostal", s31)))
    h1 = Sector((side("boundary", L1 / 2), side("intercostal", s31), side("boundary", L3 / 2),
                 side("intercostal", s23), side("boundary", L2 / 2), side("intercostal", s12)))
    return SectorData((h0, h1), ((0, 3, 1, 3), (0, 5, 1, 1), (0, 1, 1, 5)))


# ---------------------------------------------------------------------------
# the scheme


@dataclass(frozen=True)
class MapDecomposition:
    alpha: float
    beta: float
    xi: float


@dataclass(frozen=True)
class FlowIFS:
    """Flow-adapted IFS; all disks ``D_j`` are the unit disk in their own plane."""

    coding: DirectedEdgeCoding
    graph: MetricRibbonGraph
    maps: Mapping[tuple[int, int], MoebiusMap] = field(repr=False)
    images: Mapping[tuple[int, int], Disk] = field(repr=False)
    decomposition: Mapping[tuple[int, int], MapDecomposition] = field(repr=False)
    delta: tuple[float, ...]
    kappa: Mapping[tuple[int, int], float] = field(repr=False)
    eta_hat: float
    half_wedges: tuple[tuple[float, ...], ...]
    endpoints: tuple[tuple[complex, complex], ...] = field(repr=False)
    boundary_lengths: tuple[float, ...]
    # +1 when a sector's sides were walked counterclockwise; endpoints are (left, right)
    orientation: tuple[int, ...] = ()
    # potential V_s(u) = ((f^{-1})'(u))^{-s}, i.e. weight f_ij'(u)^s on D_i
    potential: str = "V_s(f_ij(u)) = f_ij'(u)**s"

    @property
    def size(self) -> int:
        return self.coding.size

    @property
    def transitions(self) -> list[tuple[int, int]]:
        return sorted(self.maps)

    @property
    def disks(self) -> tuple[Disk, ...]:
        return tuple(UNIT_DISK for _ in range(self.size))

    @property
    def alpha(self) -> dict:
        return {k: v.alpha for k, v in self.decomposition.items()}

    @property
    def beta(self) -> dict:
        return {k: v.beta for k, v in self.decomposition.items()}

    @property
    def xi(self) -> dict:
        return {k: v.xi for k, v in self.decomposition.items()}

    @property
    def max_boundary_length(self) -> float:
        return max(self.boundary_lengths)

    def word_map(self, word: Sequence[int]) -> MoebiusMap:
        """``f_w = f_{w_{n-1} w_n} o ... o f_{w_0 w_1}``."""
        out = MoebiusMap.identity()
        for i, j in zip(word[:-1], word[1:]):
            out = self.maps[(i, j)] @ out
        return out


# ---------------------------------------------------------------------------
# spine from sector data


def _hexagon_sides(sector: Sector) -> list[float]:
    """Full side list with intercostal lengths computed from the boundary arcs."""
    sides = sector.sides
    out = [s.length for s in sides]
    for q in sector.intercostal_indices:
        opp, prev, nxt = sides[(q + 3) % 6], sides[(q - 1) % 6], sides[(q + 1) % 6]
        out[q] = hexagon_side(opp.length, prev.length, nxt.length)
    return out


def _half_wedge(sector: Sector, q: int) -> float:
    """Boundary length between intercostal side ``q`` and the rib foot on either neighbour."""
    s = sector.sides
    return (s[(q - 1) % 6].length + s[(q + 1) % 6].length - s[(q + 3) % 6].length) / 2


def _validate_sectors(data: SectorData) -> list[list[float]]:
    if not data.sectors:
        raise InputError("no sectors")
    for idx, sec in enumerate(data.sectors):
        if len(sec.sides) != 6:
            raise InputError(f"sector {idx} has {len(sec.sides)} sides, expected 6")
        kinds = [s.type for s in sec.sides]
        if any(kinds[i] == kinds[(i + 1) % 6] for i in range(6)):
            raise InputError(f"sector {idx}: boundary and intercostal sides must alternate")
        for i in sec.boundary_indices:
            length = sec.sides[i].length
            if length is None or not length > 0:
                raise InputError(f"sector {idx} side {i}: boundary arcs need positive lengths")

    full = [_hexagon_sides(sec) for sec in data.sectors]
    for idx, sec in enumerate(data.sectors):
        for q in sec.intercostal_indices:
            given = sec.sides[q].length
            if given is not None and abs(given - full[idx][q]) > HEXAGON_TOL * max(1.0, given):
                raise GluingMismatch(
                    f"sector {idx} side {q}: intercostal length {given} does not close a right-angled "
                    f"hexagon (expected {full[idx][q]!r})"
                )

    used: dict[tuple[int, int], int] = {}
    for g, (sa, ia, sb, ib) in enumerate(data.gluings):
        for s, i in ((sa, ia), (sb, ib)):
            if not (0 <= s < len(data.sectors) and 0 <= i < 6):
                raise GluingMismatch(f"gluing {g} refers to missing side ({s}, {i})")
            if data.sectors[s].sides[i].type != "intercostal":
                raise GluingMismatch(f"gluing {g} uses boundary side ({s}, {i})")
            if (s, i) in used:
                raise GluingMismatch(f"side ({s}, {i}) is glued twice")
            used[(s, i)] = g
        ga, gb = data.sectors[sa].sides[ia].length, data.sectors[sb].sides[ib].length
        if ga is not None and gb is not None and abs(ga - gb) > SIDE_TOL * max(1.0, ga):
            raise GluingMismatch(f"gluing {g}: given intercostal lengths {ga!r} and {gb!r} differ")
        la, lb = full[sa][ia], full[sb][ib]
        if abs(la - lb) > SIDE_TOL * max(1.0, la):
            raise GluingMismatch(f"gluing {g}: intercostal lengths {la!r} and {lb!r} differ")
    for idx, sec in enumerate(data.sectors):
        for q in sec.intercostal_indices:
            if (idx, q) not in used:
                raise GluingMismatch(f"intercostal side ({idx}, {q}) is not glued")
    return full


def spine_from_sectors(data: SectorData) -> MetricRibbonGraph:
    """Spine ribbon graph: one vertex per sector, one edge per gluing."""
    _validate_sectors(data)
    edges = []
    for g, (sa, ia, sb, ib) in enumerate(data.gluings):
        ta, tb = _half_wedge(data.sectors[sa], ia), _half_wedge(data.sectors[sb], ib)
        if ta <= 0 or tb <= 0:
            raise DegenerateSpine(f"gluing {g}: rib foot falls outside its boundary arc")
        edges.append({"id": g + 1, "u": sa, "v": sb, "length": ta + tb})
    order = {}
    for idx, sec in enumerate(data.sectors):
        hs = []
        for q in sec.intercostal_indices:
            for g, (sa, ia, sb, ib) in enumerate(data.gluings):
                if (sa, ia) == (idx, q):
                    hs.append(g + 1)
                if (sb, ib) == (idx, q):
                    hs.append(-(g + 1))
        order[str(idx)] = hs
    return validate_graph({"edges": edges, "cyclic_order": order})


def _symbol_sides(data: SectorData) -> list[tuple[int, int]]:
    """``(sector, side)`` crossed by each symbol, in coding order."""
    k = len(data.gluings)
    default = [(sa, ia) for sa, ia, _, _ in data.gluings] + [(sb, ib) for _, _, sb, ib in data.gluings]
    if data.directed_edges is None:
        return default
    de = [tuple(d) for d in data.directed_edges]
    if len(de) != 2 * k or sorted(de) != sorted(default):
        raise GluingMismatch("directed_edges must list every glued intercostal side once")
    partner = {}
    for sa, ia, sb, ib in data.gluings:
        partner[(sa, ia)] = (sb, ib)
        partner[(sb, ib)] = (sa, ia)
    for m in range(k):
        if partner[de[m]] != de[m + k]:
            raise GluingMismatch(f"directed edge {m + k} must be the reverse of {m}")
    return de


# ---------------------------------------------------------------------------
# shared assembly


def decompose_map(f: MoebiusMap, D_i: Disk, D_ij: Disk, *, tol: float = 1e-10) -> MapDecomposition:
    """Split ``f = h o g`` with ``h(u) = alpha*u + beta`` and ``g`` a translation by ``xi``.

    ``h`` is the orientation-preserving similarity taking ``D_i`` onto ``D_ij``;
    ``g`` must then preserve ``D_i``, and for the unit disk it has the form
    ``(cosh(xi) u + sinh(xi)) / (sinh(xi) u + cosh(xi))``.
    """
    alpha = D_ij.radius / D_i.radius
    beta = D_ij.center - alpha * D_i.center
    if abs(beta.imag) > tol:
        raise NotADiskMap("image disk is not centered on the real axis")
    h = MoebiusMap(alpha, beta.real, 0.0, 1.0)
    # conjugate so that D_i becomes the unit disk
    t = MoebiusMap(D_i.radius, D_i.center.real, 0.0, 1.0)
    g = (t.inverse() @ h.inverse() @ f @ t).matrix
    if g[0, 0] < 0:
        g = -g
    xi = math.asinh((g[0, 1] + g[1, 0]) / 2)
    expected = unit_translation(xi).matrix
    if np.max(np.abs(g - expected)) > tol * max(1.0, np.max(np.abs(g))):
        raise NotADiskMap(f"{f} does not carry {D_i} onto {D_ij}")
    recomposed = (h @ t @ unit_translation(xi) @ t.inverse()).matrix
    target = f.matrix
    if np.max(np.abs(recomposed - target)) > tol * max(1.0, np.max(np.abs(target))) and \
            np.max(np.abs(recomposed + target)) > tol * max(1.0, np.max(np.abs(target))):
        raise NotADiskMap("recomposition h o g differs from f")
    return MapDecomposition(alpha, beta.real, xi)


def _assemble(coding: DirectedEdgeCoding, graph: MetricRibbonGraph, maps, delta, half_wedges,
              endpoints, *, check: bool = True) -> FlowIFS:
    """Compute image disks, decompositions and distances, then run the invariant checks."""
    images = {}
    decomposition = {}
    kappa = {}
    for (i, j), f in sorted(maps.items()):
        try:
            img = disk_image(f, UNIT_DISK)
        except InputError as exc:
            raise NumericalFailure(f"f_{i}{j}: {exc}") from exc
        images[(i, j)] = img
        decomposition[(i, j)] = decompose_map(f, UNIT_DISK, img, tol=1e-8)
        lo, hi = img.real_interval
        kappa[(i, j)] = geodesic_distance_between(-1.0, 1.0, lo, hi)
    faces = trace_faces(graph)
    ifs = FlowIFS(
        coding=coding,
        graph=graph,
        maps=dict(maps),
        images=images,
        decomposition=decomposition,
        delta=tuple(delta),
        kappa=kappa,
        eta_hat=min(min(t) for t in half_wedges),
        half_wedges=tuple(tuple(t) for t in half_wedges),
        endpoints=tuple(endpoints),
        boundary_lengths=tuple(float(x) for x in faces.boundary_lengths),
        orientation=tuple(1 for _ in half_wedges),
    )
    if check:
        problems = structural_problems(ifs)
        if problems:
            raise NumericalFailure("; ".join(problems))
    return ifs


def max_derivative_on_disk(f: MoebiusMap, disk: Disk = UNIT_DISK) -> float:
    """``sup |f'|`` over the closed disk (the pole must lie outside)."""
    m = abs(f.c * disk.center + f.d) - abs(f.c) * disk.radius
    if m <= 0:
        return math.inf
    return 1.0 / m**2


def structural_problems(ifs: FlowIFS) -> list[str]:
    """Containment, disjointness, contraction; an empty list means all hold."""
    problems = []
    for (i, j), img in ifs.images.items():
        margin = 1.0 - (abs(img.center) + img.radius)
        if not margin > 0:
            problems.append(f"D_{i}{j} not inside D_{j} (margin {margin:.3g})")
        if not max_derivative_on_disk(ifs.maps[(i, j)]) < 1:
            problems.append(f"f_{i}{j} is not a contraction on D_{i}")
    for j in range(ifs.size):
        preds = ifs.coding.predecessors(j)
        for a in range(len(preds)):
            for b in range(a + 1, len(preds)):
                d1, d2 = ifs.images[(preds[a], j)], ifs.images[(preds[b], j)]
                if abs(d1.center - d2.center) <= d1.radius + d2.radius:
                    problems.append(f"D_{preds[a]}{j} and D_{preds[b]}{j} overlap")
    return problems


# ---------------------------------------------------------------------------
# closed form for pairs of pants


def pants_spine(L1, L2, L3) -> MetricRibbonGraph:
    """Theta graph with ``l_i = (L_j + L_k - L_i) / 2``; exact for rational widths."""
    Ls = [parse_length(x) if not isinstance(x, float) else x for x in (L1, L2, L3)]
    if any(not x > 0 for x in Ls):
        raise DegenerateSpine("funnel widths must be positive")
    for i in range(3):
        if not Ls[i] < Ls[(i + 1) % 3] + Ls[(i + 2) % 3]:
            raise DegenerateSpine(f"widths {tuple(Ls)} violate the strict triangle inequality")
    exact = all(isinstance(x, Fraction) for x in Ls)
    half = Fraction(1, 2) if exact else 0.5
    lengths = []
    for i in range(3):
        Lj, Lk = Ls[(i + 1) % 3], Ls[(i + 2) % 3]
        val = (Lj + Lk - Ls[i]) * half
        lengths.append(val if exact else float(val))
    return theta_graph(*(x if exact else float(x) for x in lengths))


def _geodesic_endpoints(p1: complex, p2: complex) -> tuple[float, float]:
    """Endpoints ``(back, forward)`` of the geodesic through ``p1`` towards ``p2``."""
    if abs(p1.real - p2.real) <= 1e-14 * max(1.0, abs(p1), abs(p2)):
        x = (p1.real + p2.real) / 2
        return (x, math.inf) if p2.imag > p1.imag else (math.inf, x)
    x0 = (abs(p2) ** 2 - abs(p1) ** 2) / (2 * (p2.real - p1.real))
    r = abs(p1 - x0)
    return (x0 - r, x0 + r) if p2.real > p1.real else (x0 + r, x0 - r)


def _to_imaginary_axis(back: float, fwd: float) -> MoebiusMap:
    """Isometry sending ``back -> 0`` and ``fwd -> inf``."""
    if math.isinf(fwd):
        return MoebiusMap(1.0, -back, 0.0, 1.0)
    if math.isinf(back):
        return MoebiusMap(0.0, -1.0, 1.0, -fwd)
    sign = 1.0 if back > fwd else -1.0
    return MoebiusMap(sign, -sign * back, 1.0, -fwd)


def _standardize(p1: complex, p2: complex) -> MoebiusMap:
    """Isometry with ``p1 -> i`` and ``p2`` on the imaginary axis above ``i``."""
    back, fwd = _geodesic_endpoints(p1, p2)
    T = _to_imaginary_axis(back, fwd)
    y = T(p1).imag
    return MoebiusMap(1.0, 0.0, 0.0, y) @ T


def isometry_matching(p1: complex, p2: complex, q1: complex, q2: complex, *, tol: float = 1e-9) -> MoebiusMap:
    """Orientation-preserving isometry with ``p1 -> q1`` and ``p2 -> q2``."""
    dp, dq = hyperbolic_distance(p1, p2), hyperbolic_distance(q1, q2)
    if abs(dp - dq) > tol * max(1.0, dp):
        raise NumericalFailure(f"segments have lengths {dp} and {dq}")
    return _standardize(q1, q2).inverse() @ _standardize(p1, p2)


def _point_along(p: complex, toward: float, d: float) -> complex:
    """Point at distance ``d`` from ``p`` on the geodesic from ``p`` to the real endpoint ``toward``."""
    back = None
    # geodesic through p ending at `toward`: circle centered on R through p and toward
    if math.isinf(toward):
        back, fwd = p.real, math.inf
    else:
        x0 = (abs(p) ** 2 - toward**2) / (2 * (p.real - toward))
        r = abs(toward - x0)
        back = x0 + r if toward < x0 else x0 - r
        fwd = toward
    T = _to_imaginary_axis(back, fwd)
    y = T(p)
    return complex(T.inverse()(1j * y.imag * math.exp(d)))


def _perpendicular_endpoints(rho: float, p: complex) -> tuple[float, float]:
    """Endpoints of the geodesic through ``p`` perpendicular to the circle ``|u| = rho``."""
    phi = math.atan2(p.imag, p.real)
    xc = rho / math.cos(phi)
    r = abs(rho * math.tan(phi))
    return xc - r, xc + r


def pants_hexagon(L1: float, L2: float, L3: float) -> list[complex]:
    """Vertices ``P0..P5`` (counterclockwise) of the hexagon with sides
    ``[L1/2, s12, L2/2, s23, L3/2, s31]``; ``P0 = i`` and ``P1 = i e^{L1/2}``."""
    s12 = hexagon_side(L3 / 2, L1 / 2, L2 / 2)
    s31 = hexagon_side(L2 / 2, L3 / 2, L1 / 2)
    R = math.exp(L1 / 2)
    P0, P1 = 1j, 1j * R
    P2 = R * complex(math.cos(2 * math.atan(math.exp(s12))), math.sin(2 * math.atan(math.exp(s12))))
    P5 = complex(math.cos(2 * math.atan(math.exp(s31))), math.sin(2 * math.atan(math.exp(s31))))
    inner = min(_perpendicular_endpoints(R, P2), key=abs)
    P3 = _point_along(P2, inner, L2 / 2)
    outer = max(_perpendicular_endpoints(1.0, P5), key=abs)
    P4 = _point_along(P5, outer, L3 / 2)
    return [P0, P1, P2, P3, P4, P5]


def _unit_circle_segment(delta: float) -> tuple[complex, complex]:
    """(east, west) points on the unit half-circle at distance ``delta/2`` from ``i``."""
    east = 2 * math.atan(math.exp(-delta / 2))
    west = 2 * math.atan(math.exp(delta / 2))
    return complex(math.cos(east), math.sin(east)), complex(math.cos(west), math.sin(west))


def build_pants_ifs(L1, L2, L3, *, check: bool = True) -> FlowIFS:
    """Flow-adapted IFS of the three-funneled sphere with widths ``L1, L2, L3``."""
    graph = pants_spine(L1, L2, L3)
    L1, L2, L3 = (float(x) for x in (L1, L2, L3))
    coding = directed_coding(graph)
    P = pants_hexagon(L1, L2, L3)
    err = abs(hyperbolic_distance(P[3], P[4]) - hexagon_side(L1 / 2, L2 / 2, L3 / 2))
    if err > 1e-8:
        raise NumericalFailure(f"pants hexagon does not close (side error {err:.3g})")
    mirror = [-P[m].conjugate() for m in range(6)]
    Q = [mirror[1], mirror[0], mirror[5], mirror[4], mirror[3], mirror[2]]
    hexagons = (P, Q)
    # (sector, side) crossed by symbols 0..5: seams s23, s31, s12 forward, then reversed
    crossing = [(0, 3), (0, 5), (0, 1), (1, 3), (1, 1), (1, 5)]
    k = 3
    delta = []
    sigma = []
    endpoints = []
    for sec, side in crossing:
        V = hexagons[sec]
        a, b = V[side], V[(side + 1) % 6]
        d = hyperbolic_distance(a, b)
        east, west = _unit_circle_segment(d)
        sigma.append(isometry_matching(a, b, east, west))
        delta.append(d)
        endpoints.append((west, east))
    maps = {}
    for i in range(2 * k):
        for j in coding.successors(i):
            sec_i, side_i = crossing[i]
            sec_j, side_j = crossing[(i + k) % (2 * k)]
            Vi, Vj = hexagons[sec_i], hexagons[sec_j]
            p1, p2 = sigma[i](Vi[side_i]), sigma[i](Vi[(side_i + 1) % 6])
            q1, q2 = sigma[j](Vj[(side_j + 1) % 6]), sigma[j](Vj[side_j])
            maps[(i, j)] = isometry_matching(p1, p2, q1, q2)
    half = [(L1 / 2 + L2 / 2 - L3 / 2) / 2, (L2 / 2 + L3 / 2 - L1 / 2) / 2, (L3 / 2 + L1 / 2 - L2 / 2) / 2]
    return _assemble(coding, graph, maps, delta, [half, half], endpoints, check=check)


# ---------------------------------------------------------------------------
# general construction by frame walking


def hexagon_frames(sides: Sequence[float]) -> list[np.ndarray]:
    """Frames ``g_0..g_5`` at the vertices, each pointing along the next side.

    Raises :class:`NumericalFailure` if the walk does not close up.
    """
    frames = [np.eye(2)]
    for s in sides:
        frames.append(frames[-1] @ flow(s) @ turn(math.pi / 2))
    closing = frames[-1]
    if closing[0, 0] < 0:
        closing = -closing
    err = np.max(np.abs(closing - np.eye(2)))
    if err > 1e-7:
        raise NumericalFailure(f"hexagon walk does not close (error {err:.3g})")
    return frames[:6]


def build_ifs_from_sectors(data: SectorData, *, check: bool = True) -> FlowIFS:
    full = _validate_sectors(data)
    graph = spine_from_sectors(data)
    coding = directed_coding(graph)
    symbol_sides = _symbol_sides(data)
    k = len(data.gluings)
    if coding.size != 2 * k:
        raise NumericalFailure("coding size mismatch")
    frames = [hexagon_frames(sides) for sides in full]
    partner = {}
    for sa, ia, sb, ib in data.gluings:
        partner[(sa, ia)] = (sb, ib)
        partner[(sb, ib)] = (sa, ia)

    # reorder so that symbol m of the coding crosses symbol_sides[m]
    default = [(sa, ia) for sa, ia, _, _ in data.gluings] + [(sb, ib) for _, _, sb, ib in data.gluings]
    if symbol_sides != default:
        raise InputError("custom directed_edges orderings are validated but must match the gluing order")

    sigma = []
    delta = []
    endpoints = []
    for sec, side in symbol_sides:
        d = full[sec][side]
        base = frames[sec][side] @ flow(d / 2)
        M = MoebiusMap.from_matrix(turn(math.pi / 2) @ np.linalg.inv(base))
        sigma.append(M)
        delta.append(d)
        east = M(frame_point(frames[sec][side]))
        west = M(frame_point(frames[sec][side] @ flow(d)))
        endpoints.append((west, east))
    maps = {}
    for i in range(2 * k):
        sec_i, side_i = symbol_sides[i]
        sec_j, side_j = partner[(sec_i, side_i)]
        source = sigma[i].matrix @ frames[sec_i][side_i]
        for j in coding.successors(i):
            target = sigma[j].matrix @ frames[sec_j][side_j] @ flow(full[sec_j][side_j]) @ turn(math.pi)
            maps[(i, j)] = MoebiusMap.from_matrix(target @ np.linalg.inv(source))
    half = [[_half_wedge(sec, q) for q in sec.intercostal_indices] for sec in data.sectors]
    return _assemble(coding, graph, maps, delta, half, endpoints, check=check)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class MapReport:
    transition: tuple[int, int]
    alpha: float
    beta: float
    xi: float
    alpha_upper: float  # alpha / e^{-2 eta}
    alpha_lower: float  # alpha / e^{-L}
    beta_scaled: float  # |beta| e^{eta}
    xi_scaled: float  # |xi| e^{eta}
    inverse_radius: float
    max_derivative: float
    passed: bool


@dataclass(frozen=True)
class IFSReport:
    eta_hat: float
    L: float
    C: float
    maps: tuple[MapReport, ...]
    structural: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.structural and all(m.passed for m in self.maps)

    @property
    def max_derivative(self) -> float:
        return max(m.max_derivative for m in self.maps)

    @property
    def min_inverse_radius(self) -> float:
        return min(m.inverse_radius for m in self.maps)

    @property
    def max_abs_beta(self) -> float:
        return max(abs(m.beta) for m in self.maps)

    def summary(self) -> dict:
        return {
            "eta_hat": self.eta_hat,
            "L": self.L,
            "C": self.C,
            "passed": self.passed,
            "max_derivative": self.max_derivative,
            "min_inverse_radius": self.min_inverse_radius,
            "max_abs_beta": self.max_abs_beta,
            "max_abs_xi": max(abs(m.xi) for m in self.maps),
            "alpha_range": [min(m.alpha for m in self.maps), max(m.alpha for m in self.maps)],
            "structural": list(self.structural),
        }


def inverse_domain_radius(f: MoebiusMap) -> float:
    """Distance from 0 to the boundary of ``f^{-1}(D_j)`` (``D_j`` the unit disk).

    The preimage circle is symmetric about the real axis, so the nearest
    boundary point to 0 is one of the real points ``f^{-1}(-1)``, ``f^{-1}(1)``.
    """
    g = f.inverse()
    out = math.inf
    for x in (-1.0, 1.0):
        den = g.c * x + g.d
        if den != 0:
            out = min(out, abs((g.a * x + g.b) / den))
    return out


def verify_ifs(ifs: FlowIFS, L: float | None = None, C: float = 10.0) -> IFSReport:
    """Measure the geometric control quantities against ``C``-scaled exponential bounds."""
    L = ifs.max_boundary_length if L is None else float(L)
    eta = ifs.eta_hat
    reports = []
    for key in ifs.transitions:
        f = ifs.maps[key]
        dec = ifs.decomposition[key]
        inv_r = inverse_domain_radius(f)
        max_d = max_derivative_on_disk(f)
        upper = dec.alpha / math.exp(-2 * eta)
        lower = dec.alpha / math.exp(-L)
        beta_s = abs(dec.beta) * math.exp(eta)
        xi_s = abs(dec.xi) * math.exp(eta)
        passed = (
            upper <= C
            and lower >= 1 / C
            and beta_s <= C
            and xi_s <= C
            and inv_r >= math.exp(eta / 2)
            and max_d <= C * math.exp(-eta)
        )
        reports.append(MapReport(key, dec.alpha, dec.beta, dec.xi, upper, lower, beta_s, xi_s, inv_r, max_d, passed))
    return IFSReport(eta, L, C, tuple(reports), tuple(structural_problems(ifs)))
