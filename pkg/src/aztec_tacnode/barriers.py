"""Piecewise barrier functions g(t) used by the restriction machinery.

A barrier is a function g: R -> R u {+inf} given by finitely many pieces
(interval plus a differentiable function on it); g = +inf outside the
pieces, meaning "no constraint".  The processes are always constrained by
the shifted curve h(t) = g(t) - t^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence


@dataclass(frozen=True)
class BarrierPiece:
    a: float
    b: float
    fn: Callable[[float], float]

    def __contains__(self, t: float) -> bool:
        return self.a <= t <= self.b


@dataclass(frozen=True)
class BarrierSpec:
    """Finite collection of (interval, function) pieces; +inf elsewhere.

    ``breakpoints`` lists times where g may jump; the time slicers align
    their grids on them.  ``pinned_R`` is set when the barrier equals
    R + t^2 outside [pin_lo, pin_hi] (the hard-edge tacnode normal form).
    """

    pieces: tuple[BarrierPiece, ...]
    breakpoints: tuple[float, ...] = ()
    pinned_R: float | None = None
    pin_lo: float = math.nan
    pin_hi: float = math.nan

    def __call__(self, t: float) -> float:
        for p in self.pieces:
            if t in p:
                return p.fn(t)
        return math.inf

    def shifted(self, t: float) -> float:
        """h(t) = g(t) - t^2, the moving wall seen by diffusion-2 BM."""
        g = self(t)
        return math.inf if math.isinf(g) else g - t * t

    def is_finite_on(self, lo: float, hi: float, samples: int = 257) -> bool:
        return all(math.isfinite(self(lo + (hi - lo) * k / (samples - 1)))
                   for k in range(samples))

    def slice_knots(self, lo: float, hi: float, n_slices: int) -> list[float]:
        """Uniform slice boundaries on [lo, hi], forced through breakpoints."""
        knots = {lo + (hi - lo) * k / n_slices for k in range(n_slices + 1)}
        knots.update(b for b in self.breakpoints if lo < b < hi)
        return sorted(knots)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def flat(R: float, lo: float = -math.inf, hi: float = math.inf) -> "BarrierSpec":
        """g(t) = R + t^2, i.e. a constant wall at R for the shifted process."""
        lo_ = -1e6 if math.isinf(lo) else lo
        hi_ = 1e6 if math.isinf(hi) else hi
        piece = BarrierPiece(lo_, hi_, lambda t: R + t * t)
        return BarrierSpec((piece,), (), pinned_R=R, pin_lo=lo_, pin_hi=lo_)

    @staticmethod
    def one_point(t0: float, a: float) -> "BarrierSpec":
        """Constraint only at the single time t0: g(t0) = a."""
        return BarrierSpec((BarrierPiece(t0, t0, lambda t: a),), (t0,))

    @staticmethod
    def from_pieces(pieces: Sequence[tuple[float, float, Callable[[float], float]]],
                    breakpoints: Sequence[float] = ()) -> "BarrierSpec":
        ps = tuple(BarrierPiece(a, b, f) for a, b, f in pieces)
        return BarrierSpec(ps, tuple(breakpoints))

    @staticmethod
    def pinned(R: float, t1: float, t2: float,
               inner: Callable[[float], float],
               breakpoints: Sequence[float] = ()) -> "BarrierSpec":
        """g = R + t^2 outside [t1, t2] and ``inner`` (<= R + t^2) on it."""
        left = BarrierPiece(-1e6, t1, lambda t: R + t * t)
        mid = BarrierPiece(t1, t2, inner)
        right = BarrierPiece(t2, 1e6, lambda t: R + t * t)

        def pick(t: float) -> float:
            if t1 <= t <= t2:
                return inner(t)
            return R + t * t

        ps = (BarrierPiece(-1e6, 1e6, pick),)
        bps = tuple(sorted({t1, t2, *breakpoints}))
        del left, mid, right
        return BarrierSpec(ps, bps, pinned_R=R, pin_lo=t1, pin_hi=t2)

    @staticmethod
    def v_shape(R: float, depth: float, half_width: float) -> "BarrierSpec":
        """V-shaped wall: h(t) drops linearly from R to R-depth and back."""
        w = half_width

        def h(t: float) -> float:
            return R - depth * max(0.0, 1.0 - abs(t) / w)

        return BarrierSpec(
            (BarrierPiece(-1e6, 1e6, lambda t: h(t) + t * t),),
            (-w, 0.0, w), pinned_R=None)

    @staticmethod
    def step_down(R_left: float, R_right: float, t_jump: float) -> "BarrierSpec":
        """h(t) jumps from R_left to R_right at t_jump (downward if smaller)."""
        def g(t: float) -> float:
            return (R_left if t < t_jump else R_right) + t * t

        return BarrierSpec((BarrierPiece(-1e6, 1e6, g),), (t_jump,))
