"""
I.i.d. degree samples from TPA and PLED.

Draws come from ``numpy.random.Generator(PCG64(seed))``; for a fixed seed
and numpy's stable PCG64 stream the histograms are reproducible across
platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import PledParams, TpaParams, pled_normalizer, tpa_pmf
from .empirical import DegreeHistogram
from .errors import InvalidParameterError

__all__ = ["SampleSpec", "sample", "RNG_ALGORITHM"]

RNG_ALGORITHM = "numpy.random.Generator(PCG64)"

# PLED inverse-cdf table stops once the remaining mass drops below this
_PLED_TABLE_CUTOFF = 1e-12
_PLED_TABLE_MAX = 1 << 25
_PLED_CHUNK = 1 << 14


@dataclass(frozen=True)
class SampleSpec:
    params: TpaParams | PledParams
    n: int
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.params, (TpaParams, PledParams)):
            raise InvalidParameterError("params must be TpaParams or PledParams")
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise InvalidParameterError(f"n must be a positive integer, got {self.n!r}")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "seed", int(self.seed))


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _sample_tpa(params: TpaParams, n, rng):
    q = params.q
    u = rng.random(n)
    if params.d_min < params.a2:
        head_deg = np.arange(params.d_min, params.a2, dtype=np.int64)
        head_cdf = np.cumsum(tpa_pmf(params, head_deg))
    else:
        head_deg = np.empty(0, dtype=np.int64)
        head_cdf = np.empty(0)
    idx = np.searchsorted(head_cdf, u, side="right")
    in_tail = idx >= len(head_deg)
    draws = np.empty(n, dtype=np.int64)
    draws[~in_tail] = head_deg[idx[~in_tail]]
    # ccdf(x) = ccdf(start) q**(x - start) above the head: geometric excess
    start = max(params.a2, params.d_min)
    m = int(in_tail.sum())
    draws[in_tail] = start + rng.geometric(1.0 - q, size=m) - 1
    return draws


def _pled_table(params: PledParams):
    a = pled_normalizer(params)
    cdf_parts = []
    total = 0.0
    x = params.d_min
    size = 0
    while True:
        xs = np.arange(x, x + _PLED_CHUNK, dtype=np.float64)
        pmf = a * np.exp(-params.b * np.log(xs) - xs / params.c)
        cum = total + np.cumsum(pmf)
        cdf_parts.append(cum)
        total = float(cum[-1])
        x += _PLED_CHUNK
        size += _PLED_CHUNK
        if 1.0 - total < _PLED_TABLE_CUTOFF or size >= _PLED_TABLE_MAX:
            break
    cdf = np.concatenate(cdf_parts)
    hit = np.nonzero(1.0 - cdf < _PLED_TABLE_CUTOFF)[0]
    if hit.size:
        cdf = cdf[: hit[0] + 1]
    # residual mass beyond the table goes to the last entry
    cdf[-1] = 1.0
    return cdf


def _sample_pled(params: PledParams, n, rng):
    cdf = _pled_table(params)
    u = rng.random(n)
    return params.d_min + np.searchsorted(cdf, u, side="right")


def sample(spec: SampleSpec) -> DegreeHistogram:
    """Draw ``spec.n`` degrees and return their histogram."""
    rng = _rng(spec.seed)
    if isinstance(spec.params, TpaParams):
        draws = _sample_tpa(spec.params, spec.n, rng)
    else:
        draws = _sample_pled(spec.params, spec.n, rng)
    degrees, counts = np.unique(draws, return_counts=True)
    label = f"sample:{spec.params.digest()},n={spec.n},seed={spec.seed}"
    return DegreeHistogram(tuple(zip(degrees.tolist(), counts.tolist())), label)

