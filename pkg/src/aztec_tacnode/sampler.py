"""Exact uniform sampling of Aztec tilings and small-n oracles.

The shuffling step (destruction of colliding pairs, class-wise sliding,
random fill of the leftover 2x2 blocks) grows a uniform tiling of A_n into
one of A_{n+1}; iterating from A_0 yields the uniform measure.  Colliding
pairs are exactly a north domino directly below a south one and an east
domino directly left of a west one; parity forbids every other collision.

Everything operates on flat anchor arrays; ``Tiling`` objects are built
only on demand.  Randomness comes from counter-based Philox streams keyed
by (seed, stream), so every sample is reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .lattice import (AztecDomain, Domino, DomainError, InvariantError,
                      Tiling, TopCurveX, cut_threshold, half_integer_cap,
                      validate_tiling, x_to_y)

N_CLASS, S_CLASS, W_CLASS, E_CLASS = 0, 1, 2, 3


@dataclass(frozen=True)
class RngStream:
    """Philox (counter-based) stream; (seed, stream) pins the sample path."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.Generator(
            np.random.Philox(key=np.array([self.seed, self.stream],
                                          dtype=np.uint64)))


@dataclass(frozen=True)
class RestrictionParams:
    """Cut at r = n/sqrt2 + 2^{-5/6} R n^{1/3}; cap = largest half-integer.

    mode 'full' caps the top line at every integer t; 'even_skeleton' caps
    only the even times of the alternating curve Y (the event the finite-n
    determinant formulas compute).
    """

    R: float
    mode: str = "full"

    def cap(self, n: int) -> int:
        r = cut_threshold(n, self.R)
        if not math.isfinite(r):
            raise DomainError("restriction threshold must be finite")
        return half_integer_cap(r)


@dataclass
class SampleBatch:
    n: int
    R: float | None
    records: list = field(default_factory=list)
    attempts: int = 0
    accepts: int = 0

    def add(self, seed: int, stream: int, attempts: int, top_x: Iterable[int]):
        self.attempts += attempts
        self.accepts += 1
        self.records.append({
            "seed": seed, "stream": stream, "n": self.n, "R": self.R,
            "attempts": attempts, "topX": [int(v) for v in top_x],
        })


# ---------------------------------------------------------------------------
# array representation and the shuffling step
# ---------------------------------------------------------------------------

def _classes(xs, ys, hz, n):
    par = (xs + ys - n) % 2
    return np.where(hz, np.where(par == 0, N_CLASS, S_CLASS),
                    np.where(par == 1, W_CLASS, E_CLASS))


def tiling_to_arrays(t: Tiling):
    xs = np.array([d.x for d in t.dominoes], dtype=np.int64)
    ys = np.array([d.y for d in t.dominoes], dtype=np.int64)
    hz = np.array([d.orient == "h" for d in t.dominoes], dtype=bool)
    return xs, ys, hz


def arrays_to_tiling(n: int, xs, ys, hz) -> Tiling:
    dom = AztecDomain(n)
    ds = tuple(Domino(int(x), int(y), "h" if h else "v")
               for x, y, h in zip(xs, ys, hz))
    return Tiling(dom, ds)


def _domain_mask(n: int, size: int, off: int):
    idx = np.arange(size, dtype=np.int32) - off
    reach = np.maximum(np.abs(idx), np.abs(idx + 1))
    return (reach[:, None] + reach[None, :]) <= n + 1


_move_dx = np.array([0, 0, -1, 1], dtype=np.int64)
_move_dy = np.array([1, -1, 0, 0], dtype=np.int64)


def _grow_arrays(xs, ys, hz, n, u01):
    """One shuffling step A_n -> A_{n+1}; u01(m) supplies the fill coins."""
    m = n + 1
    off = m + 2
    size = 2 * off + 2

    cls = _classes(xs, ys, hz, n)

    # -- destruction -------------------------------------------------------
    idx = np.full((size, size), -1, dtype=np.int32)
    gx, gy = xs + off, ys + off
    idx[gx, gy] = np.arange(len(xs), dtype=np.int32)

    kill = np.zeros(len(xs), dtype=bool)
    is_n = cls == N_CLASS
    if is_n.any():
        up = idx[gx[is_n], gy[is_n] + 1]
        hit = up >= 0
        up = up[hit]
        hit2 = cls[up] == S_CLASS  # a horizontal anchor right above an N is S
        kill[np.flatnonzero(is_n)[hit][hit2]] = True
        kill[up[hit2]] = True
    is_e = cls == E_CLASS
    if is_e.any():
        rt = idx[gx[is_e] + 1, gy[is_e]]
        hit = rt >= 0
        rt = rt[hit]
        hit2 = cls[rt] == W_CLASS  # a vertical anchor right of an E is W
        kill[np.flatnonzero(is_e)[hit][hit2]] = True
        kill[rt[hit2]] = True

    keep = ~kill
    xs, ys, hz, cls = xs[keep], ys[keep], hz[keep], cls[keep]

    # -- sliding -----------------------------------------------------------
    xs = xs + _move_dx[cls]
    ys = ys + _move_dy[cls]

    # -- creation ----------------------------------------------------------
    dom = _domain_mask(m, size, off)
    cover = np.zeros((size, size), dtype=bool)
    gx, gy = xs + off, ys + off
    cover[gx, gy] = True
    cover[gx + hz, gy + ~hz] = True
    if not dom[gx, gy].all() or not dom[gx + hz, gy + ~hz].all():
        raise InvariantError("slid domino left the grown diamond")

    holes = dom & ~cover
    anchors = _block_anchors(holes)
    cx, cy = np.nonzero(anchors)
    order = np.lexsort((cx, cy))
    cx, cy = cx[order] - off, cy[order] - off
    coins = u01(len(cx)) < 0.5
    # heads: two horizontal dominoes, tails: two vertical ones
    nx = np.concatenate([xs, cx[coins], cx[coins], cx[~coins], cx[~coins] + 1])
    ny = np.concatenate([ys, cy[coins], cy[coins] + 1, cy[~coins], cy[~coins]])
    nh = np.concatenate([hz, np.ones(2 * int(coins.sum()), dtype=bool),
                         np.zeros(2 * int((~coins).sum()), dtype=bool)])
    return nx, ny, nh


def _run_even_pos(mask: np.ndarray, axis: int) -> np.ndarray:
    """True where the position inside a run of True cells (along axis) is even.

    Every run of an exactly-2x2-block-coverable region has even length and a
    unique adjacent-pair matching, so parity of the run position identifies
    the first cell of each pair.
    """
    size = mask.shape[axis]
    idx = np.arange(size, dtype=np.int32)
    starts = mask.copy()
    if axis == 1:
        starts[:, 1:] &= ~mask[:, :-1]
        base = np.where(starts, idx[None, :], np.int32(-1))
    else:
        starts[1:, :] &= ~mask[:-1, :]
        base = np.where(starts, idx[:, None], np.int32(-1))
    np.maximum.accumulate(base, axis=axis, out=base)
    if axis == 1:
        base = (idx[None, :] - base) & 1
    else:
        base = (idx[:, None] - base) & 1
    return mask & (base == 0)


def _block_anchors(holes: np.ndarray) -> np.ndarray:
    """Lower-left corners of the unique 2x2-block cover of the hole set.

    Blocks pair each column's vertical hole runs from the bottom and each
    row of pair-bottoms from the left; both pairings are forced.
    """
    lower = _run_even_pos(holes, axis=1)
    anchors = _run_even_pos(lower, axis=0)
    # expand anchors over the 2x2 footprint and verify the exact cover
    filled = np.zeros_like(holes)
    filled |= anchors
    filled[1:, :] |= anchors[:-1, :]
    filled[:, 1:] |= anchors[:, :-1]
    filled[1:, 1:] |= anchors[:-1, :-1]
    if not np.array_equal(filled, holes):
        raise InvariantError("hole region is not a disjoint union of 2x2 blocks")
    return anchors


def shuffle_grow(t: Tiling, rng: RngStream | np.random.Generator) -> Tiling:
    """Grow a valid tiling of A_n into a uniform-conditional one of A_{n+1}."""
    rep = validate_tiling(t)
    if not rep.ok:
        raise DomainError(f"shuffle_grow needs a valid tiling: {rep}")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    xs, ys, hz = tiling_to_arrays(t)
    nx, ny, nh = _grow_arrays(xs, ys, hz, t.n, lambda k: gen.random(k))
    return arrays_to_tiling(t.n + 1, nx, ny, nh)


def _sample_arrays(n: int, gen: np.random.Generator):
    xs = np.empty(0, dtype=np.int64)
    ys = np.empty(0, dtype=np.int64)
    hz = np.empty(0, dtype=bool)
    for k in range(n):
        xs, ys, hz = _grow_arrays(xs, ys, hz, k, lambda m: gen.random(m))
    return xs, ys, hz


def sample_uniform(n: int, rng: RngStream | np.random.Generator) -> Tiling:
    """One uniform tiling of A_n by iterated shuffling from A_0."""
    if n < 1:
        raise DomainError("n >= 1 required")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return arrays_to_tiling(n, *_sample_arrays(n, gen))


def top_curve_from_arrays(n: int, xs, ys, hz) -> np.ndarray:
    """Walk the top line; x(t+1) is read off the square below the path."""
    off = n + 2
    size = 2 * off + 2
    step = np.full((size, size), -9, dtype=np.int8)
    cls = _classes(xs, ys, hz, n)
    gx, gy = xs + off, ys + off
    s_m = cls == S_CLASS
    step[gx[s_m], gy[s_m]] = 0
    step[gx[s_m] + 1, gy[s_m]] = 0
    w_m = cls == W_CLASS
    step[gx[w_m], gy[w_m]] = 1
    e_m = cls == E_CLASS
    step[gx[e_m], gy[e_m] + 1] = -1

    out = np.zeros(2 * n + 1, dtype=np.int64)
    x = 0
    for t in range(-n, n):
        s = step[t + off, x - 1 + off]
        if s == -9:
            raise InvariantError(f"top-line walk lost at t={t}, x={x}")
        x += int(s)
        out[t + n + 1] = x
    if x != 0:
        raise InvariantError("top line does not return to height -1/2")
    return out


def sample_top_curve(n: int, gen: np.random.Generator) -> np.ndarray:
    return top_curve_from_arrays(n, *_sample_arrays(n, gen))


def curve_to_topx(n: int, xs: np.ndarray) -> TopCurveX:
    return TopCurveX(n, tuple(int(v) for v in xs))


def _passes_restriction(n: int, curve: np.ndarray, params: RestrictionParams) -> bool:
    cap = params.cap(n)
    if params.mode == "full":
        return int(curve.max()) <= cap
    if params.mode == "even_skeleton":
        y = x_to_y(curve_to_topx(n, curve))
        return max(y.samples[0::2]) <= cap
    raise DomainError(f"unknown restriction mode {params.mode!r}")


def sample_restricted(n: int, params: RestrictionParams,
                      rng: RngStream | np.random.Generator,
                      budget: int = 10 ** 6) -> tuple[Tiling, int]:
    """Rejection sampling of the cut model; returns (tiling, attempts)."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    for attempt in range(1, budget + 1):
        xs, ys, hz = _sample_arrays(n, gen)
        curve = top_curve_from_arrays(n, xs, ys, hz)
        if _passes_restriction(n, curve, params):
            return arrays_to_tiling(n, xs, ys, hz), attempt
    raise RuntimeError(
        f"rejection budget {budget} exceeded at n={n}, R={params.R}; "
        "R is likely too negative for rejection sampling")


def sample_restricted_curve(n: int, params: RestrictionParams,
                            gen: np.random.Generator,
                            budget: int = 10 ** 6) -> tuple[np.ndarray, int]:
    """Fast path: only the top curve of an accepted sample."""
    for attempt in range(1, budget + 1):
        curve = sample_top_curve(n, gen)
        if _passes_restriction(n, curve, params):
            return curve, attempt
    raise RuntimeError(f"rejection budget {budget} exceeded at n={n}")


# ---------------------------------------------------------------------------
# exhaustive enumeration oracle (n <= 4)
# ---------------------------------------------------------------------------

def enumerate_tilings(n: int) -> list[Tiling]:
    """All tilings of A_n by first-free-square backtracking, canonical order."""
    if n > 4:
        raise DomainError("enumeration oracle limited to n <= 4")
    dom = AztecDomain(n)
    squares = sorted(dom.squares(), key=lambda s: (s[1], s[0]))
    sq_set = set(squares)
    out: list[Tiling] = []
    placed: list[Domino] = []
    covered: set[tuple[int, int]] = set()

    def rec():
        free = next((s for s in squares if s not in covered), None)
        if free is None:
            out.append(Tiling(dom, tuple(placed)))
            return
        k, l = free
        right = (k + 1, l)
        if right in sq_set and right not in covered:
            covered.update((free, right))
            placed.append(Domino(k, l, "h"))
            rec()
            placed.pop()
            covered.difference_update((free, right))
        up = (k, l + 1)
        if up in sq_set and up not in covered:
            covered.update((free, up))
            placed.append(Domino(k, l, "v"))
            rec()
            placed.pop()
            covered.difference_update((free, up))

    rec()
    expected = 2 ** (n * (n + 1) // 2)
    if len(out) != expected:
        raise InvariantError(f"enumeration found {len(out)} != {expected}")
    return out


# ---------------------------------------------------------------------------
# MCMC cross-check sampler
# ---------------------------------------------------------------------------

def _blocks(dom: AztecDomain) -> list[tuple[int, int]]:
    return [(k, l) for k, l in dom.squares()
            if dom.contains_square(k + 1, l) and dom.contains_square(k, l + 1)
            and dom.contains_square(k + 1, l + 1)]


def mcmc_rotation_step(t: Tiling, restriction: RestrictionParams | None,
                       rng: RngStream | np.random.Generator) -> Tiling:
    """Rotate a random 2x2 block of parallel dominoes, if any, respecting
    the restriction; reversible w.r.t. the (conditioned) uniform measure."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    blocks = _blocks(t.domain)
    k, l = blocks[int(gen.integers(len(blocks)))]
    by_anchor = {(d.x, d.y, d.orient): d for d in t.dominoes}
    new = None
    if (k, l, "h") in by_anchor and (k, l + 1, "h") in by_anchor:
        new = [d for d in t.dominoes
               if (d.x, d.y, d.orient) not in ((k, l, "h"), (k, l + 1, "h"))]
        new += [Domino(k, l, "v"), Domino(k + 1, l, "v")]
    elif (k, l, "v") in by_anchor and (k + 1, l, "v") in by_anchor:
        new = [d for d in t.dominoes
               if (d.x, d.y, d.orient) not in ((k, l, "v"), (k + 1, l, "v"))]
        new += [Domino(k, l, "h"), Domino(k, l + 1, "h")]
    if new is None:
        return t
    cand = Tiling(t.domain, tuple(new))
    if restriction is not None:
        xs, ys, hz = tiling_to_arrays(cand)
        curve = top_curve_from_arrays(t.n, xs, ys, hz)
        if not _passes_restriction(t.n, curve, restriction):
            return t
    return cand
