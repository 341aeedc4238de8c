"""Haar averages of geodesic signatures.

The average of exp_tensor(log g) over the normalised Haar measure is
computed four ways:

  * closed form -- circle (level 2k is pi^{2k}/(2k+1)! on the only word,
    odd levels vanish) and tori assembled from it,
  * deterministic quadrature -- circle by Gauss-Legendre, SU(2) by the
    radial x spherical split: level k is (m_k / k!) M_k with m_k the k-th
    moment of the radial density (2/pi) sin^2 r on [0, pi] and M_k the
    normalised moment tensor of the uniform measure on S^2,
  * Monte Carlo -- chunked, seeded, thread-count independent, with
    per-coefficient standard errors,
  * the product rule -- the level-N average of a Riemannian product is
    sum_k [k!(N-k)!/N!] (A_k shuffle B_{N-k}) over the embedded factors.

Per-sample signatures are exact tensor exponentials of Haar logs, so Monte
Carlo error is purely statistical.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .groups import CircleGroup, ProductGroup, SU2Group, stream
from .tensor import TruncatedTensorSeries, _check_budget, shuffle_levels

__all__ = [
    "AverageSignatureResult",
    "average_closed_form",
    "average_quadrature",
    "average_monte_carlo",
    "product_average_shuffle",
    "sphere_moment_level",
    "su2_radial_moments",
    "mc_chunk_size",
]


@dataclass(frozen=True)
class AverageSignatureResult:
    """Estimate of the average signature up to the tensor's depth.

    stderr_per_level is the per-level Euclidean norm of the coordinate-wise
    standard errors (Monte Carlo only); stderr_coeffs keeps the coordinate
    SEs themselves for per-coefficient comparisons.
    """

    tensor: TruncatedTensorSeries
    method: str
    samples: int | None = None
    seed: int | None = None
    stderr_per_level: np.ndarray | None = None
    stderr_coeffs: tuple[np.ndarray, ...] | None = None

    def to_json_dict(self) -> dict:
        out = self.tensor.to_json_dict()
        out["method"] = self.method
        out["samples"] = self.samples
        out["seed"] = self.seed
        out["stderr"] = None if self.stderr_per_level is None else self.stderr_per_level.tolist()
        return out


def average_closed_form(model, N: int) -> AverageSignatureResult:
    """Exact average signature for the circle and for products of circles."""
    if isinstance(model, CircleGroup):
        levels = [np.zeros(1) for _ in range(N + 1)]
        for k in range(0, N + 1, 2):
            levels[k][0] = math.pi**k / math.factorial(k + 1)
        tensor = TruncatedTensorSeries(1, N, tuple(levels))
        return AverageSignatureResult(tensor, "closed_form")
    if isinstance(model, ProductGroup) and all(
        isinstance(f, CircleGroup) for f in model.factors
    ):
        acc = average_closed_form(model.factors[0], N)
        for f in model.factors[1:]:
            acc = product_average_shuffle(acc, average_closed_form(f, N), N)
        return AverageSignatureResult(acc.tensor, "closed_form")
    raise ValueError("closed form is available for the circle and circle products only")


def su2_radial_moments(max_k: int, nodes: int = 64) -> np.ndarray:
    """Moments m_k = int_0^pi r^k (2/pi) sin^2 r dr, k=0..max_k, by Gauss-Legendre."""
    x, w = leggauss(nodes)
    r = 0.5 * math.pi * (x + 1.0)
    w = 0.5 * math.pi * w
    dens = (2.0 / math.pi) * np.sin(r) ** 2
    powers = r[None, :] ** np.arange(max_k + 1)[:, None]
    return powers @ (w * dens)


_DOUBLE_FACT = {0: 1.0}


def _double_factorial(m: int) -> float:
    # (m)!! for odd m >= -1, cached
    if m not in _DOUBLE_FACT:
        _DOUBLE_FACT[m] = 1.0 if m <= 0 else m * _double_factorial(m - 2)
    return _DOUBLE_FACT[m]


def sphere_moment_level(k: int) -> np.ndarray:
    """Flat moment tensor of the uniform unit measure on S^2 in R^3 at level k.

    Entry (i_1..i_k) is E[v_{i_1} ... v_{i_k}]: zero unless every coordinate
    appears an even number of times, in which case it equals
    prod_j (a_j - 1)!! / (k+1)!! for the occurrence counts a_j.
    """
    if k % 2 == 1:
        return np.zeros(3**k)
    if k == 0:
        return np.ones(1)
    norm = _double_factorial(k + 1)
    table = np.zeros((k + 1, k + 1))
    for a in range(0, k + 1, 2):
        for b in range(0, k + 1 - a, 2):
            c = k - a - b
            if c % 2 == 0:
                table[a, b] = (
                    _double_factorial(a - 1)
                    * _double_factorial(b - 1)
                    * _double_factorial(c - 1)
                    / norm
                )
    out = np.empty(3**k)
    slab = 1 << 22
    for start in range(0, 3**k, slab):
        stop = min(start + slab, 3**k)
        idx = np.arange(start, stop, dtype=np.int64)
        a = np.zeros(stop - start, dtype=np.int64)
        b = np.zeros(stop - start, dtype=np.int64)
        for _ in range(k):
            d = idx % 3
            a += d == 0
            b += d == 1
            idx //= 3
        out[start:stop] = table[a, b]
    return out


def average_quadrature(model, N: int, nodes: int = 64) -> AverageSignatureResult:
    """Deterministic average signature for the circle or SU(2)."""
    if isinstance(model, CircleGroup):
        x, w = leggauss(nodes)
        theta = math.pi * x
        w = math.pi * w / (2.0 * math.pi)
        levels = [np.ones(1)]
        for k in range(1, N + 1):
            # odd levels vanish analytically (sign-flip symmetry); pin the zero
            val = 0.0 if k % 2 == 1 else float(w @ theta**k) / math.factorial(k)
            levels.append(np.array([val]))
        return AverageSignatureResult(
            TruncatedTensorSeries(1, N, tuple(levels)), "quadrature"
        )
    if isinstance(model, SU2Group):
        _check_budget(3, N)
        m = su2_radial_moments(N, nodes)
        levels = [np.ones(1)]
        for k in range(1, N + 1):
            if k % 2 == 1:
                levels.append(np.zeros(3**k))
            else:
                levels.append((m[k] / math.factorial(k)) * sphere_moment_level(k))
        return AverageSignatureResult(
            TruncatedTensorSeries(3, N, tuple(levels)), "quadrature"
        )
    raise ValueError("quadrature is available for circle and su2 models only")


def mc_chunk_size(dim: int, depth: int) -> int:
    """Chunk length for Monte Carlo accumulation.

    Depends only on (dim, depth), never on the worker count, so the chunked
    stream layout -- and therefore every sampled value -- is fixed by the
    run configuration alone.
    """
    total = sum(dim**k for k in range(depth + 1))
    return max(256, min(1 << 16, (1 << 22) // max(total, 1)))


def _mc_chunk(model, N: int, seed: int, chunk_index: int, size: int):
    rng = stream(seed, chunk_index)
    v = model.sample_log_batch(rng, size)
    sums = [np.full(1, float(size))]
    sqs = [np.full(1, float(size))]
    cur = np.ones((size, 1))
    for k in range(1, N + 1):
        cur = (cur[:, :, None] * v[:, None, :]).reshape(size, -1) / k
        sums.append(cur.sum(axis=0))
        sqs.append(np.einsum("bi,bi->i", cur, cur))
    return sums, sqs


def average_monte_carlo(
    model, N: int, samples: int, seed: int, threads: int = 1
) -> AverageSignatureResult:
    """Mean of exact geodesic signatures over chunked Haar draws.

    The result is bitwise identical for any thread count: chunk c always uses
    stream(seed, c) and partial sums are reduced in chunk order.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n = model.dim
    _check_budget(n, N)
    chunk = mc_chunk_size(n, N)
    nchunks = (samples + chunk - 1) // chunk
    sizes = [chunk] * nchunks
    sizes[-1] = samples - chunk * (nchunks - 1)

    tot = [np.zeros(n**k) for k in range(N + 1)]
    tsq = [np.zeros(n**k) for k in range(N + 1)]

    def merge(res):
        for k in range(N + 1):
            tot[k] += res[0][k]
            tsq[k] += res[1][k]

    if threads <= 1:
        for ci in range(nchunks):
            merge(_mc_chunk(model, N, seed, ci, sizes[ci]))
    else:
        wave = 4 * threads
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for start in range(0, nchunks, wave):
                cis = range(start, min(start + wave, nchunks))
                futs = [pool.submit(_mc_chunk, model, N, seed, ci, sizes[ci]) for ci in cis]
                for f in futs:  # reduce in chunk order
                    merge(f.result())

    m = float(samples)
    mean_levels = tuple(t / m for t in tot)
    se_levels = []
    se_scalar = np.empty(N + 1)
    for k in range(N + 1):
        var = np.maximum(tsq[k] / m - mean_levels[k] ** 2, 0.0) * (m / max(m - 1.0, 1.0))
        se = np.sqrt(var / m)
        se_levels.append(se)
        se_scalar[k] = math.sqrt(float(se @ se))
    return AverageSignatureResult(
        TruncatedTensorSeries(n, N, mean_levels),
        "monte_carlo",
        samples=samples,
        seed=seed,
        stderr_per_level=se_scalar,
        stderr_coeffs=tuple(se_levels),
    )


def _embed_level(level: np.ndarray, k: int, n_from: int, n_to: int, offset: int) -> np.ndarray:
    """Re-index a level over R^{n_from} as a level over R^{n_to}, with the
    source basis occupying coordinates offset..offset+n_from-1."""
    if k == 0:
        return level.copy()
    view = level.reshape((n_from,) * k)
    pad = (offset, n_to - n_from - offset)
    return np.pad(view, [pad] * k).ravel()


def product_average_shuffle(
    a: AverageSignatureResult, b: AverageSignatureResult, N: int
) -> AverageSignatureResult:
    """Average signature of a product group from its factors' averages.

    Level N of the product is sum_k [k!(N-k)!/N!] (A_k shuffle B_{N-k}),
    with factor words embedded side by side (first factor's basis first).
    """
    n1, n2 = a.tensor.dim, b.tensor.dim
    if a.tensor.depth < N or b.tensor.depth < N:
        raise ValueError("factor averages must be truncated at depth >= N")
    n = n1 + n2
    _check_budget(n, N)
    emb_a = [
        _embed_level(a.tensor.levels[k], k, n1, n, 0) for k in range(N + 1)
    ]
    emb_b = [
        _embed_level(b.tensor.levels[k], k, n2, n, n1) for k in range(N + 1)
    ]
    out = [np.zeros(n**lvl) for lvl in range(N + 1)]
    for lvl in range(N + 1):
        acc = out[lvl]
        for k in range(lvl + 1):
            if not (np.any(emb_a[k]) and np.any(emb_b[lvl - k])):
                continue
            weight = (
                math.factorial(k) * math.factorial(lvl - k) / math.factorial(lvl)
            )
            acc += weight * shuffle_levels(emb_a[k], k, emb_b[lvl - k], lvl - k, n)
    return AverageSignatureResult(
        TruncatedTensorSeries(n, N, tuple(out)), "product_shuffle"
    )
