"""Aztec diamond geometry, domino classes, line ensembles and scalings.

The order-n Aztec diamond A_n is the union of lattice unit squares
[k,k+1] x [l,l+1] inside {|x|+|y| <= n+1}.  Squares are indexed by their
lower-left corner (k,l).  The checkerboard coloring is fixed so that in
the top half the leftmost square of each row is white, which amounts to

    white(k,l)  <=>  (k + l) == n  (mod 2).

A horizontal domino is north (N) iff its leftmost square is white, else
south (S); a vertical one is west (W) iff its upper square is white, else
east (E).  Lines are drawn on S (flat, length 2), W (up-slant) and E
(down-slant) dominoes; the top line X_n runs from (-n,-1/2) to (n,-1/2)
along the boundary of the north polar region.

Heights are stored as integer indices x = X + 1/2 in {0,...,n}.  The map
to the alternating-step curve Y_n (odd steps up by 0/1, even steps down
by >= 0) sends a curve point (t, x) to the space-time point (t+x+n, x);
with Y defined below the correspondence {x(t) <= c} = {Y(t+c+n) <= c} is
exact at integer levels, no rounding needed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .barriers import BarrierSpec

# class ids
N_CLASS, S_CLASS, W_CLASS, E_CLASS = 0, 1, 2, 3
CLASS_NAMES = ("N", "S", "W", "E")

# movement under one shuffling step, indexed by class id
CLASS_MOVES = ((0, 1), (0, -1), (-1, 0), (1, 0))


class DomainError(ValueError):
    pass


class InvariantError(RuntimeError):
    pass


def _reach(k):
    k = np.asarray(k)
    return np.maximum(np.abs(k), np.abs(k + 1))


@dataclass(frozen=True)
class AztecDomain:
    """Order-n Aztec diamond; 2n(n+1) unit squares."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise DomainError(f"order must be >= 0, got {self.n}")

    def contains_square(self, k: int, l: int) -> bool:
        return _reach(k) + _reach(l) <= self.n + 1

    def squares(self) -> list[tuple[int, int]]:
        n = self.n
        out = []
        for l in range(-n, n):
            for k in range(-n, n):
                if self.contains_square(k, l):
                    out.append((k, l))
        return out

    def is_white(self, k: int, l: int) -> bool:
        return (k + l - self.n) % 2 == 0

    @property
    def num_squares(self) -> int:
        return 2 * self.n * (self.n + 1)


@dataclass(frozen=True)
class Domino:
    """Domino anchored at its lower-left square; orient 'h' or 'v'."""

    x: int
    y: int
    orient: str

    def squares(self) -> tuple[tuple[int, int], tuple[int, int]]:
        if self.orient == "h":
            return ((self.x, self.y), (self.x + 1, self.y))
        return ((self.x, self.y), (self.x, self.y + 1))


def classify_domino(d: Domino, domain: AztecDomain) -> str:
    """Class letter N/S/W/E from anchor parity and orientation."""
    for k, l in d.squares():
        if not domain.contains_square(k, l):
            raise DomainError(f"domino {d} outside A_{domain.n}")
    if d.orient == "h":
        return "N" if domain.is_white(d.x, d.y) else "S"
    return "W" if domain.is_white(d.x, d.y + 1) else "E"


def class_id(d: Domino, domain: AztecDomain) -> int:
    return CLASS_NAMES.index(classify_domino(d, domain))


@dataclass(frozen=True)
class Tiling:
    domain: AztecDomain
    dominoes: tuple[Domino, ...]

    @property
    def n(self) -> int:
        return self.domain.n

    def class_counts(self) -> dict[str, int]:
        out = {c: 0 for c in CLASS_NAMES}
        for d in self.dominoes:
            out[classify_domino(d, self.domain)] += 1
        return out

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "dominoes": [{"x": d.x, "y": d.y, "orient": d.orient,
                          "class": classify_domino(d, self.domain)}
                         for d in self.dominoes],
        })

    @staticmethod
    def from_json(s: str) -> "Tiling":
        obj = json.loads(s)
        dom = AztecDomain(obj["n"])
        return Tiling(dom, tuple(Domino(d["x"], d["y"], d["orient"])
                                 for d in obj["dominoes"]))

    def canonical_key(self) -> tuple:
        return tuple(sorted((d.x, d.y, d.orient) for d in self.dominoes))


@dataclass
class ValidationReport:
    ok: bool
    uncovered: list[tuple[int, int]]
    doubly_covered: list[tuple[int, int]]
    outside: list[tuple[int, int]]

    def __bool__(self) -> bool:
        return self.ok


def validate_tiling(t: Tiling) -> ValidationReport:
    """Exact-cover check; failures are reported, not raised."""
    seen: dict[tuple[int, int], int] = {}
    outside = []
    double = []
    for d in t.dominoes:
        for sq in d.squares():
            if not t.domain.contains_square(*sq):
                outside.append(sq)
            if sq in seen:
                double.append(sq)
            seen[sq] = seen.get(sq, 0) + 1
    uncovered = [sq for sq in t.domain.squares() if sq not in seen]
    ok = not uncovered and not double and not outside \
        and len(t.dominoes) == t.n * (t.n + 1)
    return ValidationReport(ok, uncovered, double, outside)


# ---------------------------------------------------------------------------
# line ensemble
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TopCurveX:
    """Top line of the ensemble; samples[i] = x(-n+i), heights x - 1/2."""

    n: int
    samples: tuple[int, ...]  # x-indices over t = -n..n

    def x_index(self, t: int) -> int:
        if not -self.n <= t <= self.n:
            raise DomainError(f"t={t} outside [-{self.n}, {self.n}]")
        return self.samples[t + self.n]

    def height(self, t: int) -> float:
        return self.x_index(t) - 0.5

    def max_x_index(self) -> int:
        return max(self.samples)


@dataclass(frozen=True)
class TopCurveY:
    """Alternating-step curve Y(0..2n); visited[m] = heights swept at m."""

    n: int
    samples: tuple[int, ...]
    visited: tuple[tuple[int, ...], ...]

    def value(self, m: int) -> int:
        return self.samples[m]

    def on_curve(self, m: int, x: int) -> bool:
        return 0 <= m <= 2 * self.n and x in self.visited[m]

    def below_event(self, m: int, c: int) -> bool:
        return self.samples[m] <= c


@dataclass(frozen=True)
class LineEnsemble:
    paths: tuple[tuple[tuple[int, int], ...], ...]  # each path: ((t, x), ...)
    topX: TopCurveX


def _segments(t: Tiling) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Line segments per domino class, endpoints as (t, x-index)."""
    segs = []
    for d in t.dominoes:
        c = classify_domino(d, t.domain)
        k, l = d.x, d.y
        if c == "S":
            segs.append(((k, l + 1), (k + 2, l + 1)))
        elif c == "W":
            segs.append(((k, l + 1), (k + 1, l + 2)))
        elif c == "E":
            segs.append(((k, l + 2), (k + 1, l + 1)))
    return segs


def tiling_to_lines(t: Tiling) -> LineEnsemble:
    """Concatenate class segments into non-crossing paths; extract the top.

    Raises InvariantError if segments fail to chain (classification bug).
    """
    rep = validate_tiling(t)
    if not rep.ok:
        raise DomainError(f"invalid tiling: {rep}")
    segs = _segments(t)
    by_start: dict[tuple[int, int], tuple[int, int]] = {}
    ends = set()
    for a, b in segs:
        if a in by_start:
            raise InvariantError(f"two segments start at {a}")
        by_start[a] = b
        ends.add(b)
    starts = [a for a in by_start if a not in ends]
    paths = []
    used = 0
    for a in sorted(starts):
        path = [a]
        while a in by_start:
            a = by_start[a]
            path.append(a)
            used += 1
        paths.append(tuple(path))
    if used != len(segs):
        raise InvariantError("segment chaining left unused segments (cycle?)")

    n = t.n
    top_start = (-n, 0)
    top = next((p for p in paths if p[0] == top_start), None)
    if top is None:
        raise InvariantError("no path starts at (-n, -1/2)")
    if top[-1] != (n, 0):
        raise InvariantError(f"top path ends at {top[-1]}, expected ({n}, -1/2)")

    # densify over integer t (S segments span two columns)
    xs = np.zeros(2 * n + 1, dtype=int)
    for (t0, x0), (t1, x1) in zip(top, top[1:]):
        for tt in range(t0, t1):
            # segment is flat or a unit slant
            frac = (tt - t0) / (t1 - t0)
            xs[tt + n] = round(x0 + frac * (x1 - x0))
        xs[t1 + n] = x1
    xs[top[0][0] + n] = top[0][1]
    return LineEnsemble(tuple(paths), TopCurveX(n, tuple(int(v) for v in xs)))


def x_to_y(curve: TopCurveX, n: int | None = None) -> TopCurveY:
    """Map the top line to the alternating-step curve Y.

    Walking the curve left to right, a step of X moves the space-time point
    (m, x) = (t+x+n, x) by (2,+1) for an up-slant, (1,0) for a flat unit and
    (0,-1) for a down-slant.  Up-slants and flat pairs start at even m and
    down-slants stack at even m, so recording the swept height at every
    integer m (rounding up mid-slant) yields Y with the alternating step law.
    """
    if n is None:
        n = curve.n
    if n != curve.n:
        raise DomainError("curve order mismatch")
    xs = curve.samples
    if xs[0] != 0 or xs[-1] != 0:
        raise InvariantError("top curve must start and end at height -1/2")
    m_max = 2 * n
    y = [0] * (m_max + 1)
    visited: list[list[int]] = [[] for _ in range(m_max + 1)]
    m = 0
    visited[0].append(xs[0])
    for k in range(2 * n):
        x0, x1 = xs[k], xs[k + 1]
        dx = x1 - x0
        if dx == 1:
            if m + 2 > m_max:
                raise InvariantError("trajectory overruns time horizon")
            y[m + 1] = x0 + 1
            visited[m + 1].append(x0 + 1)
            m += 2
            y[m] = x1
            visited[m].append(x1)
        elif dx == 0:
            m += 1
            y[m] = x0
            visited[m].append(x0)
        elif dx == -1:
            y[m] = x1
            visited[m].append(x1)
        else:
            raise InvariantError(f"illegal X step {dx}")
    if m != m_max:
        raise InvariantError(f"trajectory ends at m={m}, expected {m_max}")
    yc = TopCurveY(n, tuple(y), tuple(tuple(v) for v in visited))
    _assert_y_steps(yc)
    return yc


def _assert_y_steps(yc: TopCurveY) -> None:
    y = yc.samples
    for j in range(yc.n):
        if y[2 * j + 1] - y[2 * j] not in (0, 1):
            raise InvariantError(f"odd step law violated at m={2 * j + 1}")
        if y[2 * j + 2] > y[2 * j + 1]:
            raise InvariantError(f"even step law violated at m={2 * j + 2}")


# ---------------------------------------------------------------------------
# scaling maps
# ---------------------------------------------------------------------------

SQRT2 = math.sqrt(2.0)


def cut_threshold(n: int, R: float) -> float:
    """Height of the cut, r = n/sqrt(2) + 2^{-5/6} R n^{1/3}."""
    return n / SQRT2 + 2.0 ** (-5.0 / 6.0) * R * n ** (1.0 / 3.0)


def half_integer_cap(r: float) -> int:
    """Largest admissible x-index under X <= r; X takes values x - 1/2."""
    return math.floor(r + 0.5)


def round_to_even(v: float) -> int:
    """Nearest even integer, ties rounded up."""
    lo = 2 * math.floor(v / 2.0)
    hi = lo + 2
    return hi if (v - lo) >= (hi - v) else lo


@dataclass(frozen=True)
class ScalingMap:
    """Edge scaling of times and levels at cut parameter R."""

    n: int
    R: float = 0.0

    @property
    def r(self) -> float:
        return cut_threshold(self.n, self.R)

    @property
    def fluct(self) -> float:
        """One unit of rescaled level, 2^{-5/6} n^{1/3}."""
        return 2.0 ** (-5.0 / 6.0) * self.n ** (1.0 / 3.0)

    def b_n(self, tau: float) -> int:
        n = self.n
        v = n * (1.0 + 1.0 / SQRT2) + 2.0 ** (-1.0 / 6.0) * tau * n ** (2.0 / 3.0)
        return round_to_even(v)

    def b_n_real(self, tau: float) -> float:
        n = self.n
        return n * (1.0 + 1.0 / SQRT2) + 2.0 ** (-1.0 / 6.0) * tau * n ** (2.0 / 3.0)

    def tau_of_step(self, l: int) -> float:
        """Inverse of b_n at even time 2l."""
        n = self.n
        return (2 * l - n * (1.0 + 1.0 / SQRT2)) / (2.0 ** (-1.0 / 6.0) * n ** (2.0 / 3.0))

    def g_n(self, tau: float, g: BarrierSpec) -> float:
        gv = g(tau)
        if math.isinf(gv):
            return math.inf
        return self.n / SQRT2 + self.fluct * (gv - tau * tau)

    def integer_cap(self, tau: float, g: BarrierSpec) -> int | None:
        """Largest admissible x-index (= Y level) under the rescaled barrier."""
        gn = self.g_n(tau, g)
        return None if math.isinf(gn) else half_integer_cap(gn)

    def level_of_cap(self, c: int) -> float:
        """Rescaled X-threshold represented by the integer cap c."""
        return ((c - 0.5) - self.n / SQRT2) / self.fluct


def scale_time_barrier(spec: ScalingMap, tau: float, g: BarrierSpec):
    """(b_n(tau) rounded to even, g_n(tau)); g_n=None means no constraint."""
    gn = spec.g_n(tau, g)
    return spec.b_n(tau), (None if math.isinf(gn) else gn)


def rescale_X(curve: TopCurveX, R: float, n: int, t: float) -> float:
    """Rescaled position (X(2^{-1/6} t n^{2/3}) - n/sqrt2) / (2^{-5/6} n^{1/3})."""
    lattice_t = 2.0 ** (-1.0 / 6.0) * t * n ** (2.0 / 3.0)
    ti = int(np.rint(lattice_t))
    if not -n <= ti <= n:
        raise DomainError(f"rescaled time {t} maps to lattice {ti} outside A_{n}")
    X = curve.x_index(ti) - 0.5
    return (X - n / SQRT2) / (2.0 ** (-5.0 / 6.0) * n ** (1.0 / 3.0))


# ---------------------------------------------------------------------------
# north polar region
# ---------------------------------------------------------------------------

def north_polar_component(t: Tiling) -> set[Domino]:
    """N dominoes edge-connected to the top boundary of the diamond."""
    n = t.n
    norths = [d for d in t.dominoes if classify_domino(d, t.domain) == "N"]
    north_set = set(norths)
    sq_owner = {}
    for d in norths:
        for sq in d.squares():
            sq_owner[sq] = d

    frontier = set()
    for d in norths:
        # touching the boundary: some square has a neighbor outside the domain
        for k, l in d.squares():
            if l >= 0 and not t.domain.contains_square(k, l + 1):
                frontier.add(d)
    comp = set()
    stack = list(frontier)
    while stack:
        d = stack.pop()
        if d in comp:
            continue
        comp.add(d)
        for k, l in d.squares():
            for dk, dl in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                nb = sq_owner.get((k + dk, l + dl))
                if nb is not None and nb not in comp and nb in north_set:
                    stack.append(nb)
    return comp


def dominoes_above_curve(t: Tiling, curve: TopCurveX) -> set[Domino]:
    above = set()
    for d in t.dominoes:
        strictly_above = True
        for k, l in d.squares():
            lim = max(curve.x_index(k), curve.x_index(k + 1))
            if l < lim:
                strictly_above = False
                break
        if strictly_above:
            above.add(d)
    return above
