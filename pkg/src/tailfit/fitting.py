"""
Least-squares fits of TPA and PLED to an empirical ccdf.

The objective is the sum of squared differences between ``log10`` of the
empirical and model ccdf at every observed degree. The search is a coarse
grid followed by a shrinking-step refinement in which the continuous
parameter (``w`` or ``c``) is profiled out for every candidate of the other
one. Both stages are deterministic and ties break toward smaller values.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import PledParams, TpaParams, model_id, model_log_ccdf
from .empirical import EmpiricalDistribution
from .errors import (
    InsufficientDataError,
    InvalidParameterError,
    SearchFailureError,
    ZeroVarianceError,
)

__all__ = [
    "FitConfig",
    "FitReport",
    "log_ccdf_residuals",
    "r_squared",
    "fit_tpa",
    "fit_pled",
    "MIN_FIT_DEGREES",
]

MIN_FIT_DEGREES = 5
_LN10 = math.log(10.0)


def _interval(name, value, positive):
    lo, hi = (float(v) for v in value)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise InvalidParameterError(f"{name} must be a finite interval lo <= hi, got {value}")
    if positive and lo <= 0:
        raise InvalidParameterError(f"{name} must be strictly positive, got {value}")
    return lo, hi


@dataclass(frozen=True)
class FitConfig:
    a2_range: tuple[int, int] = (2, 2000)
    w_range: tuple[float, float] = (0.01, 10.0)
    b_range: tuple[float, float] = (0.5, 4.0)
    c_range: tuple[float, float] = (10.0, 1e5)
    grid_density: int = 64
    refine_iterations: int = 60
    refine_shrink: float = 0.5
    # space in which R is computed: "log" (default) or "linear"
    r_space: str = "log"

    def __post_init__(self):
        lo, hi = self.a2_range
        if int(lo) != lo or int(hi) != hi or lo < 1 or lo > hi:
            raise InvalidParameterError(f"a2_range must be integers 1 <= lo <= hi, got {self.a2_range}")
        object.__setattr__(self, "a2_range", (int(lo), int(hi)))
        object.__setattr__(self, "w_range", _interval("w_range", self.w_range, True))
        object.__setattr__(self, "b_range", _interval("b_range", self.b_range, False))
        object.__setattr__(self, "c_range", _interval("c_range", self.c_range, True))
        if int(self.grid_density) != self.grid_density or self.grid_density < 2:
            raise InvalidParameterError("grid_density must be an integer >= 2")
        if int(self.refine_iterations) != self.refine_iterations or self.refine_iterations < 1:
            raise InvalidParameterError("refine_iterations must be a positive integer")
        if not 0 < self.refine_shrink < 1:
            raise InvalidParameterError("refine_shrink must lie in (0, 1)")
        if self.r_space not in ("log", "linear"):
            raise InvalidParameterError("r_space must be 'log' or 'linear'")

    def digest(self) -> str:
        return (
            f"a2_range=[{self.a2_range[0]},{self.a2_range[1]}];"
            f"w_range=[{self.w_range[0]!r},{self.w_range[1]!r}];"
            f"b_range=[{self.b_range[0]!r},{self.b_range[1]!r}];"
            f"c_range=[{self.c_range[0]!r},{self.c_range[1]!r}];"
            f"grid_density={self.grid_density};"
            f"refine_iterations={self.refine_iterations};"
            f"refine_shrink={self.refine_shrink!r};r_space={self.r_space}"
        )


@dataclass(frozen=True)
class FitReport:
    model_id: str
    params: TpaParams | PledParams
    r: float
    r_squared: float
    sse_log_ccdf: float
    residuals: tuple[tuple[int, float, float], ...]
    d_min: int
    config_digest: str


def _log10_empirical(dist: EmpiricalDistribution):
    mask = dist.ccdf > 0
    return dist.degrees[mask], np.log10(dist.ccdf[mask])


def log_ccdf_residuals(params, dist: EmpiricalDistribution):
    """``(degree, log10 empirical ccdf, log10 model ccdf)`` at observed degrees.

    Degrees where either logarithm is not finite are left out.
    """
    if params.d_min != dist.d_min:
        raise InvalidParameterError(
            f"model d_min={params.d_min} differs from data d_min={dist.d_min}"
        )
    degrees, emp = _log10_empirical(dist)
    model = np.asarray(model_log_ccdf(params, degrees)) / _LN10
    ok = np.isfinite(emp) & np.isfinite(model)
    return tuple(
        (int(d), float(e), float(m)) for d, e, m in zip(degrees[ok], emp[ok], model[ok])
    )


def _pearson(x, y):
    if len(x) < 3:
        raise InsufficientDataError(f"need at least 3 residual pairs, got {len(x)}")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(np.dot(xc, xc))
    syy = float(np.dot(yc, yc))
    if sxx == 0.0:
        raise ZeroVarianceError("empirical ccdf vector has zero variance")
    if syy == 0.0:
        raise ZeroVarianceError("model ccdf vector has zero variance")
    r = float(np.dot(xc, yc)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def r_squared(params, dist: EmpiricalDistribution, space: str = "log"):
    """Pearson ``r`` between empirical and model ccdf vectors, and ``r**2``.

    ``space="log"`` correlates ``log10`` ccdfs; ``"linear"`` the raw ccdfs.
    """
    res = np.array(log_ccdf_residuals(params, dist), dtype=np.float64).reshape(-1, 3)
    emp, model = res[:, 1], res[:, 2]
    if space == "linear":
        emp, model = 10.0**emp, 10.0**model
    elif space != "log":
        raise InvalidParameterError("space must be 'log' or 'linear'")
    r = _pearson(emp, model)
    return r, r * r


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


def _thread_count():
    value = os.environ.get("TAILFIT_THREADS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise InvalidParameterError(f"TAILFIT_THREADS must be an integer, got {value!r}")
    return min(4, os.cpu_count() or 1)


class _Objective:
    def __init__(self, make_params, dist):
        self.make_params = make_params
        self.degrees, self.target = _log10_empirical(dist)
        self.cache = {}

    def __call__(self, point):
        if point in self.cache:
            return self.cache[point]
        try:
            with np.errstate(all="ignore"):
                model = np.asarray(model_log_ccdf(self.make_params(*point), self.degrees))
                diff = model / _LN10 - self.target
                sse = float(np.dot(diff, diff))
        except (ArithmeticError, ValueError):
            sse = math.inf
        if not math.isfinite(sse):
            sse = math.inf
        self.cache[point] = sse
        return sse

    def evaluate_grid(self, points):
        threads = _thread_count()
        if threads > 1 and len(points) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                values = list(pool.map(self, points))
        else:
            values = [self(p) for p in points]
        return values


def _best(points, values):
    best = None
    for p, v in zip(points, values):
        key = (v, p)
        if best is None or key < best:
            best = key
    return best


class _IntStep:
    """Integer coordinate searched on a log-spaced grid, refined by +-step."""

    def __init__(self, lo, hi, ratio):
        self.lo, self.hi, self.ratio = lo, hi, ratio

    def initial(self, value):
        return max(1, int(round(value * (self.ratio - 1.0))))

    def move(self, value, step, direction):
        return min(self.hi, max(self.lo, value + direction * step))

    def shrink(self, step, factor):
        return max(1, int(step * factor))

    def exhausted(self, step):
        return step <= 1


class _LinearStep:
    def __init__(self, lo, hi, width):
        self.lo, self.hi, self.width = lo, hi, width
        self.floor = 1e-10 * max(1.0, abs(lo), abs(hi))

    def initial(self, value):
        return self.width

    def move(self, value, step, direction):
        return min(self.hi, max(self.lo, float(value + direction * step)))

    def shrink(self, step, factor):
        return step * factor

    def exhausted(self, step):
        return step < self.floor


class _LogStep(_LinearStep):
    def __init__(self, lo, hi, width):
        super().__init__(lo, hi, width)
        self.floor = 1e-10

    def move(self, value, step, direction):
        return min(self.hi, max(self.lo, float(value * math.exp(direction * step))))


def _search(objective, grid_outer, grid_inner, outer, inner, config, carry=None):
    """Coarse grid, then a shrinking search on the outer coordinate.

    Every outer candidate is scored by its profile: the inner coordinate is
    minimized by a 1-D shrinking-step search started from ``carry(inner,
    old_outer, new_outer)``. Candidates only replace the incumbent when they
    strictly improve ``(sse, outer, inner)`` in lexicographic order.
    """
    points = [(a, b) for a in grid_outer for b in grid_inner]
    values = objective.evaluate_grid(points)
    sse, (a, b) = _best(points, values)
    if not math.isfinite(sse):
        raise SearchFailureError("objective is not finite at any grid point")

    def profile(a, b, step):
        best = (objective((a, b)), b)
        for _ in range(config.refine_iterations):
            cands = [inner.move(best[1], step, d) for d in (-1, 1)]
            cand = min((objective((a, c)), c) for c in cands)
            if cand < best:
                best = cand
                step = min(inner.initial(best[1]), step / config.refine_shrink)
            else:
                step = inner.shrink(step, config.refine_shrink)
                if inner.exhausted(step):
                    break
        return best[0], best[1], step

    sse, b, inner_step = profile(a, b, inner.initial(b))
    step = outer.initial(a)
    for _ in range(config.refine_iterations):
        best = (sse, a, b)
        # neighbours start from a few multiples of the resolution reached so far
        warm = min(inner.initial(b), inner_step / config.refine_shrink**3)
        for d in (-1, 1):
            a_new = outer.move(a, step, d)
            if a_new == a:
                continue
            start = carry(b, a, a_new) if carry else b
            start = inner.move(start, 0.0, 0)
            f, b_new, s_new = profile(a_new, start, warm)
            if (f, a_new, b_new) < best:
                best, inner_step = (f, a_new, b_new), s_new
        if best < (sse, a, b):
            sse, a, b = best
        elif outer.exhausted(step):
            break
        else:
            step = outer.shrink(step, config.refine_shrink)
    return (a, b), sse


def _check_data(dist):
    if len(dist.degrees) < MIN_FIT_DEGREES:
        raise InsufficientDataError(
            f"need at least {MIN_FIT_DEGREES} distinct degrees, got {len(dist.degrees)}"
        )


def _report(params, dist, sse, config):
    residuals = log_ccdf_residuals(params, dist)
    r, r2 = r_squared(params, dist, space=config.r_space)
    return FitReport(
        model_id=model_id(params),
        params=params,
        r=r,
        r_squared=r2,
        sse_log_ccdf=sse,
        residuals=residuals,
        d_min=dist.d_min,
        config_digest=config.digest(),
    )


def fit_tpa(dist: EmpiricalDistribution, config: FitConfig = FitConfig()) -> FitReport:
    """Fit ``(a2, w)`` of TPA to the empirical ccdf of ``dist``.

    ``a2`` is searched over integers (log-spaced on the coarse grid, then
    integer steps) and ``w`` on a log scale.
    """
    _check_data(dist)
    a_lo, a_hi = config.a2_range
    w_lo, w_hi = config.w_range
    n = config.grid_density
    grid_a = [int(v) for v in np.unique(np.round(np.geomspace(a_lo, a_hi, n)).astype(np.int64))]
    grid_w = [float(v) for v in np.geomspace(w_lo, w_hi, n)]
    d_min = dist.d_min

    objective = _Objective(lambda a2, w: TpaParams(a2, w, d_min), dist)
    (a2, w), sse = _search(
        objective,
        grid_a,
        grid_w,
        _IntStep(a_lo, a_hi, (a_hi / a_lo) ** (1.0 / (n - 1))),
        _LogStep(w_lo, w_hi, math.log(w_hi / w_lo) / (n - 1)),
        config,
        # moving a2 with w/a2 fixed keeps the tail ratio q fixed
        carry=lambda w, a_old, a_new: w * a_new / a_old,
    )
    return _report(TpaParams(a2, w, d_min), dist, sse, config)


def fit_pled(dist: EmpiricalDistribution, config: FitConfig = FitConfig()) -> FitReport:
    """Fit ``(b, c)`` of PLED: ``b`` on a linear scale, ``c`` on a log scale."""
    _check_data(dist)
    b_lo, b_hi = config.b_range
    c_lo, c_hi = config.c_range
    n = config.grid_density
    grid_b = [float(v) for v in np.linspace(b_lo, b_hi, n)]
    grid_c = [float(v) for v in np.geomspace(c_lo, c_hi, n)]
    d_min = dist.d_min

    objective = _Objective(lambda b, c: PledParams(b, c, d_min), dist)
    (b, c), sse = _search(
        objective,
        grid_b,
        grid_c,
        _LinearStep(b_lo, b_hi, (b_hi - b_lo) / (n - 1)),
        _LogStep(c_lo, c_hi, math.log(c_hi / c_lo) / (n - 1)),
        config,
    )
    return _report(PledParams(b, c, d_min), dist, sse, config)
