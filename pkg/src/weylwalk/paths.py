"""Piecewise-linear paths with rational breakpoints and the root operators.

A path is the equivalence class of a piecewise linear map [0,1] -> weight
space modulo reparametrization.  The canonical representative merges
consecutive positively-proportional segments and spaces the surviving K
segments uniformly at breakpoints k/K, so path equality is tuple equality.

Points are stored in fundamental-weight coordinates, where the pairing
against the coroot h_i is simply the i-th coordinate.  The null result of a
root operator is represented by ``None``; it is a value, not an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .cartan import CartanDatum, Weight
from .errors import FormatError, IntegralityError
from .exact import Vector, add, is_zero, sub, vec, zero

MaybePath = Optional["PiecewisePath"]


@dataclass(frozen=True)
class PiecewisePath:
    """Canonical-form path; build through :func:`canonical_path` or helpers."""

    times: Tuple[Fraction, ...]
    points: Tuple[Vector, ...]

    @property
    def dim(self) -> int:
        return len(self.points[0])

    @property
    def num_segments(self) -> int:
        return len(self.points) - 1

    def endpoint(self) -> Vector:
        return self.points[-1]

    def displacements(self) -> List[Vector]:
        return [sub(self.points[k + 1], self.points[k]) for k in range(self.num_segments)]

    def is_constant(self) -> bool:
        return all(is_zero(sub(p, self.points[0])) for p in self.points)

    def value_at(self, t: Fraction) -> Vector:
        """Exact value of the canonical representative at rational time t."""
        t = Fraction(t)
        if t < 0 or t > 1:
            raise FormatError("time outside [0,1]")
        for k in range(self.num_segments):
            t0, t1 = self.times[k], self.times[k + 1]
            if t <= t1:
                lam = (t - t0) / (t1 - t0)
                p0, p1 = self.points[k], self.points[k + 1]
                return tuple(a + lam * (b - a) for a, b in zip(p0, p1))
        return self.points[-1]

    def heights(self, i: int) -> List[Fraction]:
        """Pairing with coroot h_i at the breakpoints (h is linear between)."""
        return [p[i] for p in self.points]

    def translate(self, shift: Vector) -> List[Vector]:
        return [add(p, shift) for p in self.points]

    def stays_in_cone(self, start: Vector) -> bool:
        """Whether start + path keeps nonnegative fw coordinates throughout.

        By convexity of the cone it is enough to look at the breakpoints.
        """
        return all(all(s + c >= 0 for s, c in zip(start, p)) for p in self.points)

    def __repr__(self):
        return f"PiecewisePath({[tuple(map(str, p)) for p in self.points]})"


def _proportional_same_direction(d1: Vector, d2: Vector) -> bool:
    pivot = next((j for j, c in enumerate(d1) if c != 0), None)
    if pivot is None:
        return False
    ratio = d2[pivot] / d1[pivot]
    if ratio <= 0:
        return False
    return all(b == ratio * a for a, b in zip(d1, d2))


def from_displacements(displacements: Sequence[Vector], dim: Optional[int] = None) -> PiecewisePath:
    """Canonical path tracing the given displacement sequence from 0."""
    disp = [vec(d) for d in displacements if not is_zero(vec(d))]
    if dim is None:
        if not displacements:
            raise FormatError("cannot infer dimension of an empty path")
        dim = len(tuple(displacements[0]))
    merged: List[Vector] = []
    for d in disp:
        if merged and _proportional_same_direction(merged[-1], d):
            merged[-1] = add(merged[-1], d)
        else:
            merged.append(d)
    if not merged:
        return PiecewisePath((Fraction(0), Fraction(1)), (zero(dim), zero(dim)))
    k = len(merged)
    times = tuple(Fraction(j, k) for j in range(k + 1))
    points = [zero(dim)]
    for d in merged:
        points.append(add(points[-1], d))
    return PiecewisePath(times, tuple(points))


def canonical_path(times: Sequence, points: Sequence[Sequence]) -> PiecewisePath:
    """Canonicalize a raw breakpoint/point list.

    Only the ordering of the time stamps matters (paths are reparametrization
    classes); they must be strictly increasing and the path must start at 0.
    """
    ts = [Fraction(t) for t in times]
    pts = [vec(p) for p in points]
    if len(ts) != len(pts):
        raise FormatError("times and points have different lengths")
    if len(ts) < 2:
        raise FormatError("need at least two breakpoints")
    if any(t1 <= t0 for t0, t1 in zip(ts, ts[1:])):
        raise FormatError("times must be strictly increasing")
    if not is_zero(pts[0]):
        raise FormatError("path must start at the origin")
    disp = [sub(pts[k + 1], pts[k]) for k in range(len(pts) - 1)]
    return from_displacements(disp, dim=len(pts[0]))


def straight_path(target: Vector) -> PiecewisePath:
    """The straight line from 0 to ``target`` (constant path if target = 0)."""
    return from_displacements([vec(target)], dim=len(target))


def constant_path(dim: int) -> PiecewisePath:
    return from_displacements([], dim=dim)


def concat(p1: PiecewisePath, p2: PiecewisePath) -> PiecewisePath:
    """Concatenation, first p1 then p2 translated to start at p1's endpoint."""
    if p1.dim != p2.dim:
        raise FormatError("dimension mismatch in concatenation")
    d1 = [] if p1.is_constant() else p1.displacements()
    d2 = [] if p2.is_constant() else p2.displacements()
    return from_displacements(d1 + d2, dim=p1.dim)


def concat_all(paths: Sequence[PiecewisePath]) -> PiecewisePath:
    if not paths:
        raise FormatError("empty concatenation")
    disp: List[Vector] = []
    for p in paths:
        if not p.is_constant():
            disp.extend(p.displacements())
    return from_displacements(disp, dim=paths[0].dim)


def height_function_extrema(path: PiecewisePath, i: int) -> Tuple[Fraction, Tuple[Fraction, ...]]:
    """Minimum of t -> <path(t), h_i> and the breakpoint times attaining it.

    The height function is linear on each segment, so its minimum is attained
    at breakpoints; since the path starts at 0 the minimum is <= 0.
    """
    h = path.heights(i)
    m = min(h)
    witnesses = tuple(path.times[k] for k, v in enumerate(h) if v == m)
    return m, witnesses


def path_weight(datum: CartanDatum, path: PiecewisePath) -> Weight:
    end = path.endpoint()
    if any(c.denominator != 1 for c in end):
        raise IntegralityError(f"endpoint {end} is not in the weight lattice")
    return datum.weight(tuple(int(c) for c in end))


# --- root operators ---------------------------------------------------------


def _alpha_row(datum: CartanDatum, i: int) -> Vector:
    return tuple(Fraction(a) for a in datum.matrix[i])


def _reflect_displacement(datum: CartanDatum, i: int, d: Vector) -> Vector:
    """Simple reflection s_{alpha_i} applied to a displacement vector."""
    coeff = d[i]
    if coeff == 0:
        return d
    alpha = _alpha_row(datum, i)
    return tuple(c - coeff * a for c, a in zip(d, alpha))


def _split_displacement(d: Vector, lam: Fraction) -> Tuple[Vector, Vector]:
    first = tuple(lam * c for c in d)
    return first, sub(d, first)


def apply_e(datum: CartanDatum, path: MaybePath, i: int) -> MaybePath:
    """Raising operator: returns None iff the i-height minimum exceeds -1.

    The changed window runs from the last time the height equals m+1 up to
    the first time it reaches the minimum m.  Inside it, the sub-segments
    descending below the running minimum are reflected by s_{alpha_i}; the
    excursions above it are kept.  The endpoint gains alpha_i.
    """
    if path is None:
        return None
    h = path.heights(i)
    m = min(h)
    if m > -1:
        return None
    disp = path.displacements()
    k1 = next(k for k, v in enumerate(h) if v == m)  # first minimum breakpoint
    target = m + 1
    # last index j < k1 from which the segment [j, j+1] crosses (or touches)
    # the level m+1; exists because h(0) = 0 >= m+1
    j = next(j for j in range(k1 - 1, -1, -1) if h[j] >= target)
    prefix = disp[:j]
    window: List[Tuple[Vector, Fraction, Fraction]] = []
    if h[j] == target:
        window_start = j
    else:
        lam = (target - h[j]) / (h[j + 1] - h[j])
        before, after = _split_displacement(disp[j], lam)
        prefix = prefix + [before]
        window = [(after, target, h[j + 1])]
        window_start = j + 1
    for k in range(window_start, k1):
        window.append((disp[k], h[k], h[k + 1]))
    suffix = disp[k1:]

    out: List[Vector] = []
    running_min = target
    for d, ha, hb in window:
        if hb >= running_min:
            out.append(d)
            continue
        if ha > running_min:
            lam = (running_min - ha) / (hb - ha)
            keep, drop = _split_displacement(d, lam)
            out.append(keep)
            out.append(_reflect_displacement(datum, i, drop))
        else:  # ha == running_min: the whole segment descends the ladder
            out.append(_reflect_displacement(datum, i, d))
        running_min = hb
    return from_displacements(prefix + out + suffix, dim=path.dim)


def apply_f(datum: CartanDatum, path: MaybePath, i: int) -> MaybePath:
    """Lowering operator: returns None iff the final height is below m+1.

    Mirror image of :func:`apply_e`: the window runs from the last visit of
    the minimum m to the last time the height equals m+1, and the
    sub-segments climbing the future minimum are reflected.  The endpoint
    loses alpha_i.
    """
    if path is None:
        return None
    h = path.heights(i)
    m = min(h)
    if h[-1] < m + 1:
        return None
    disp = path.displacements()
    k0 = max(k for k, v in enumerate(h) if v == m)  # last minimum breakpoint
    target = m + 1
    # last segment [j, j+1] with h[j] < m+1: the window closes inside it
    j = max(j for j in range(k0, len(disp)) if h[j] < target)
    prefix = disp[:k0]
    window: List[Tuple[Vector, Fraction, Fraction]] = []
    for k in range(k0, j):
        window.append((disp[k], h[k], h[k + 1]))
    if h[j + 1] == target:
        window.append((disp[j], h[j], h[j + 1]))
        suffix = disp[j + 1 :]
    else:
        lam = (target - h[j]) / (h[j + 1] - h[j])
        before, after = _split_displacement(disp[j], lam)
        window.append((before, h[j], target))
        suffix = [after] + disp[j + 1 :]

    out_rev: List[Vector] = []
    running_min = target
    for d, ha, hb in reversed(window):
        if ha >= running_min:
            out_rev.append(d)
            continue
        if hb > running_min:
            lam = (running_min - ha) / (hb - ha)
            climb, keep = _split_displacement(d, lam)
            out_rev.append(keep)
            out_rev.append(_reflect_displacement(datum, i, climb))
        else:  # hb == running_min: the whole segment climbs the ladder
            out_rev.append(_reflect_displacement(datum, i, d))
        running_min = ha
    return from_displacements(prefix + list(reversed(out_rev)) + suffix, dim=path.dim)


def eps_phi(datum: CartanDatum, path: PiecewisePath, i: int) -> Tuple[int, int]:
    """Number of times the raising / lowering operator applies before None."""
    eps = 0
    cur = apply_e(datum, path, i)
    while cur is not None:
        eps += 1
        cur = apply_e(datum, cur, i)
    phi = 0
    cur = apply_f(datum, path, i)
    while cur is not None:
        phi += 1
        cur = apply_f(datum, cur, i)
    return eps, phi


def is_dominant_path(path: PiecewisePath) -> bool:
    """Image contained in the closed dominant cone (breakpoint test)."""
    return path.stays_in_cone(zero(path.dim))


def all_raising_null(datum: CartanDatum, path: PiecewisePath) -> bool:
    return all(apply_e(datum, path, i) is None for i in range(datum.rank))


# --- serialization -----------------------------------------------------------


def path_from_literal(datum: CartanDatum, literal, basis: str = "ambient") -> PiecewisePath:
    """Decode the JSON path literal: a list of [time, [coords...]] pairs.

    Rationals may be strings like "1/2".  ``basis`` selects how coordinates
    are read: "ambient" (default; epsilon coordinates for the named classical
    types), "fw" or "root".
    """
    from .exact import parse_rational

    times = [parse_rational(entry[0]) for entry in literal]
    raw = [tuple(parse_rational(c) for c in entry[1]) for entry in literal]
    if basis == "ambient":
        pts = []
        for p in raw:
            fw = datum.realization.from_ambient(p)
            pts.append(fw)
    elif basis == "fw":
        pts = list(raw)
    elif basis == "root":
        pts = [datum.fw_from_root(p) for p in raw]
    else:
        raise FormatError(f"unknown basis {basis!r}")
    return canonical_path(times, pts)


def path_to_literal(datum: CartanDatum, path: PiecewisePath, basis: str = "ambient"):
    out = []
    for t, p in zip(path.times, path.points):
        if basis == "ambient":
            coords = datum.realization.to_ambient(p)
        elif basis == "fw":
            coords = p
        elif basis == "root":
            coords = datum.root_coords(p)
        else:
            raise FormatError(f"unknown basis {basis!r}")
        out.append([str(t), [str(c) for c in coords]])
    return out
