"""Truncated tensor-series algebra over R^n.

A series is stored densely: one contiguous float64 block per tensor level,
with level k holding the n^k coefficients of the word basis
e_{i_1} x ... x e_{i_k} in row-major multi-index order.  This is the home
of signatures, their Haar averages, and everything algebraic done to them:
the Chen (concatenation) product, the shuffle product, the tensorial
exponential, the Hilbert inner product inherited from an orthonormal basis
of R^n, and the pairwise-contraction trace.

All values are immutable after construction and all operations are pure,
so series can be shared freely across workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

__all__ = [
    "TruncatedTensorSeries",
    "BudgetError",
    "unit_series",
    "exp_tensor",
    "concat_product",
    "shuffle_product",
    "shuffle_levels",
    "pair",
    "hilbert_norm",
    "hilbert_distance",
    "trace_level",
    "series_size",
    "COEFF_BUDGET",
]

# Dense storage refuses above this many total coefficients (sum of n^k).
COEFF_BUDGET = 100_000_000


class BudgetError(ValueError):
    """Requested dimension/depth combination exceeds the dense coefficient budget."""


def series_size(dim: int, depth: int) -> int:
    """Total number of stored coefficients, sum_{k<=depth} dim^k."""
    return sum(dim**k for k in range(depth + 1))


def _check_budget(dim: int, depth: int) -> None:
    if series_size(dim, depth) > COEFF_BUDGET:
        raise BudgetError(
            f"dense series with dim={dim}, depth={depth} needs "
            f"{series_size(dim, depth)} coefficients (budget {COEFF_BUDGET})"
        )


@dataclass(frozen=True)
class TruncatedTensorSeries:
    """Tensor series over R^dim truncated at tensor level ``depth``.

    levels[k] is the flat float64 coefficient block of level k, length dim**k.
    """

    dim: int
    depth: int
    levels: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if len(self.levels) != self.depth + 1:
            raise ValueError("expected one coefficient block per level 0..depth")
        frozen = []
        for k, lv in enumerate(self.levels):
            arr = np.ascontiguousarray(lv, dtype=np.float64)
            if arr.shape != (self.dim**k,):
                raise ValueError(f"level {k} must have {self.dim ** k} coefficients")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"level {k} contains non-finite coefficients")
            arr.flags.writeable = False
            frozen.append(arr)
        object.__setattr__(self, "levels", tuple(frozen))

    # -- small arithmetic helpers used by averaging and tests ---------------

    def __add__(self, other: "TruncatedTensorSeries") -> "TruncatedTensorSeries":
        _check_compatible(self, other)
        return TruncatedTensorSeries(
            self.dim, self.depth, tuple(a + b for a, b in zip(self.levels, other.levels))
        )

    def __sub__(self, other: "TruncatedTensorSeries") -> "TruncatedTensorSeries":
        _check_compatible(self, other)
        return TruncatedTensorSeries(
            self.dim, self.depth, tuple(a - b for a, b in zip(self.levels, other.levels))
        )

    def __mul__(self, scale: float) -> "TruncatedTensorSeries":
        s = float(scale)
        return TruncatedTensorSeries(self.dim, self.depth, tuple(lv * s for lv in self.levels))

    __rmul__ = __mul__

    def allclose(self, other: "TruncatedTensorSeries", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        _check_compatible(self, other)
        return all(
            np.allclose(a, b, atol=atol, rtol=rtol) for a, b in zip(self.levels, other.levels)
        )

    def to_json_dict(self) -> dict:
        return {"n": self.dim, "N": self.depth, "levels": [lv.tolist() for lv in self.levels]}

    @staticmethod
    def from_json_dict(d: dict) -> "TruncatedTensorSeries":
        return TruncatedTensorSeries(
            int(d["n"]), int(d["N"]), tuple(np.asarray(lv, dtype=np.float64) for lv in d["levels"])
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def _check_compatible(a: TruncatedTensorSeries, b: TruncatedTensorSeries) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.depth != b.depth:
        raise ValueError(f"depth mismatch: {a.depth} vs {b.depth}")


def unit_series(n: int, N: int) -> TruncatedTensorSeries:
    """Multiplicative identity: 1 at level 0, zero elsewhere."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    _check_budget(n, N)
    levels = [np.zeros(n**k) for k in range(N + 1)]
    levels[0][0] = 1.0
    return TruncatedTensorSeries(n, N, tuple(levels))


def exp_tensor(v: np.ndarray, N: int) -> TruncatedTensorSeries:
    """Tensorial exponential: level k equals v^{x k} / k!."""
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("v must be a nonempty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("v must be finite")
    n = v.size
    _check_budget(n, N)
    levels = [np.ones(1)]
    cur = np.ones(1)
    for k in range(1, N + 1):
        cur = (cur[:, None] * v[None, :]).ravel() / k
        levels.append(cur)
    return TruncatedTensorSeries(n, N, tuple(levels))


def concat_product(
    a: TruncatedTensorSeries, b: TruncatedTensorSeries
) -> TruncatedTensorSeries:
    """Chen (concatenation) product; levels above the shared depth are dropped."""
    _check_compatible(a, b)
    n, N = a.dim, a.depth
    out = [np.zeros(n**k) for k in range(N + 1)]
    for i, ai in enumerate(a.levels):
        for j in range(N + 1 - i):
            out[i + j] += np.multiply.outer(ai, b.levels[j]).ravel()
    return TruncatedTensorSeries(n, N, tuple(out))


def shuffle_levels(x: np.ndarray, p: int, y: np.ndarray, q: int, n: int) -> np.ndarray:
    """Shuffle product of a rank-p level block with a rank-q block (flat,
    row-major).

    Sums outer(x, y) over all order-preserving interleavings of the p slots of
    x with the q slots of y.  Ranks are explicit: for n = 1 every level has
    one coefficient and the rank cannot be read off the shape, yet the
    interleaving count C(p+q, p) still matters.  Cost is C(p+q, p) * n^(p+q).
    """
    if x.size != n**p or y.size != n**q:
        raise ValueError("level block size does not match the stated rank")
    if p == 0:
        return y * x[0]
    if q == 0:
        return x * y[0]
    if n == 1:
        return math.comb(p + q, p) * x * y
    outer = np.multiply.outer(
        x.reshape((n,) * p), y.reshape((n,) * q)
    )  # axes: p x-slots then q y-slots
    total = p + q
    out = np.zeros((n,) * total)
    for slots in combinations(range(total), p):
        axes = [0] * total
        xi, yi = 0, p
        slot_set = set(slots)
        for t in range(total):
            if t in slot_set:
                axes[t] = xi
                xi += 1
            else:
                axes[t] = yi
                yi += 1
        # axes[t] names which axis of `outer` lands at result slot t
        out += outer.transpose(axes)
    return out.ravel()


def shuffle_product(
    a: TruncatedTensorSeries, b: TruncatedTensorSeries
) -> TruncatedTensorSeries:
    """Shuffle product, bilinear over the word basis; commutative and associative
    up to the shared truncation depth."""
    _check_compatible(a, b)
    n, N = a.dim, a.depth
    out = [np.zeros(n**k) for k in range(N + 1)]
    for i, ai in enumerate(a.levels):
        if not np.any(ai):
            continue
        for j in range(N + 1 - i):
            bj = b.levels[j]
            if not np.any(bj):
                continue
            out[i + j] += shuffle_levels(ai, i, bj, j, n)
    return TruncatedTensorSeries(n, N, tuple(out))


def pair(word: tuple[int, ...], x: TruncatedTensorSeries) -> float:
    """Coefficient of the basis word e_{i_1} x ... x e_{i_k} in x.

    Indices are 1-based (letters 1..n); the empty word pairs with level 0.
    """
    k = len(word)
    if k > x.depth:
        raise ValueError(f"word length {k} exceeds depth {x.depth}")
    flat = 0
    for i in word:
        if not 1 <= i <= x.dim:
            raise ValueError(f"letter {i} outside 1..{x.dim}")
        flat = flat * x.dim + (i - 1)
    return float(x.levels[k][flat])


def hilbert_norm(x: TruncatedTensorSeries) -> float:
    """Norm induced by declaring the word basis orthonormal at every level."""
    return math.sqrt(sum(float(lv @ lv) for lv in x.levels))


def hilbert_distance(a: TruncatedTensorSeries, b: TruncatedTensorSeries) -> float:
    _check_compatible(a, b)
    return math.sqrt(
        sum(float(np.sum((x - y) ** 2)) for x, y in zip(a.levels, b.levels))
    )


def trace_level(x: TruncatedTensorSeries, k: int) -> float:
    """Pairwise contraction of level k on the slot pairs (1,2), (3,4), ...

    Odd levels contract to zero by convention; level 0 returns its single
    coefficient.
    """
    if k > x.depth:
        raise ValueError(f"level {k} exceeds depth {x.depth}")
    if k == 0:
        return float(x.levels[0][0])
    if k % 2 == 1:
        return 0.0
    n = x.dim
    cur = x.levels[k]
    for _ in range(k // 2):
        cur = np.einsum("iij->j", cur.reshape(n, n, -1))
    return float(cur[0])
