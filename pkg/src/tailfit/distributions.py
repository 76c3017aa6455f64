"""
Degree distributions of tempered preferential attachment (TPA) graphs and
power laws with exponential decay (PLED).

TPA
---
The pmf has a product-form head and a geometric tail::

    p_i = p_{A2} * prod_{k=i}^{A2-1} (k + w + 1) / k      d_min <= i <= A2
    p_i = p_{A2} * q**(i - A2),   q = A2 / (A2 + w)      i >= A2

and ``p_{A2}`` is fixed by requiring ``ccdf(d_min) = 1``. All head products
are accumulated in log space so thresholds up to ``A2 ~ 1e6`` neither
overflow nor underflow.

PLED
----
``p(x) = A x**-b exp(-x/c)`` on ``{d_min, d_min+1, ...}``. Infinite sums are
truncated with a rigorous remainder bound, with an Euler-Maclaurin tail for
very slowly decaying parameter choices.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import (
    DegenerateSupportError,
    DomainError,
    InvalidParameterError,
    InvalidToleranceError,
)

__all__ = [
    "TpaParams",
    "PledParams",
    "ModelEvaluation",
    "tpa_tail_ratio",
    "tpa_p_a2",
    "tpa_pmf",
    "tpa_ccdf",
    "tpa_log_pmf",
    "tpa_log_ccdf",
    "pled_normalizer",
    "pled_pmf",
    "pled_ccdf",
    "pled_log_ccdf",
    "model_log_ccdf",
    "tabulate",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-14


def _check_int(name, value, minimum, exc=InvalidParameterError):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise exc(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise exc(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def _check_real(name, value):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidParameterError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class TpaParams:
    """Parameters of the TPA degree distribution.

    Parameters
    ----------
    a2 : int
        Degree threshold where the geometric tail starts.
    w : float
        Tempering parameter, strictly positive.
    d_min : int
        Smallest degree in the support.
    a1_meta : int, optional
        Carried along for reporting only; no formula uses it.
    """

    a2: int
    w: float
    d_min: int = 1
    a1_meta: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "a2", _check_int("a2", self.a2, 1))
        w = _check_real("w", self.w)
        if w <= 0:
            raise InvalidParameterError(f"w must be > 0, got {w}")
        object.__setattr__(self, "w", w)
        object.__setattr__(
            self, "d_min", _check_int("d_min", self.d_min, 1, DegenerateSupportError)
        )
        if self.a1_meta is not None:
            object.__setattr__(self, "a1_meta", _check_int("a1_meta", self.a1_meta, 1))

    @property
    def q(self) -> float:
        return tpa_tail_ratio(self)

    @property
    def gamma(self) -> float:
        """Asymptotic power-law exponent of the head, ``1 + w``."""
        return 1.0 + self.w

    def digest(self) -> str:
        text = f"TPA(a2={self.a2},w={self.w!r},d_min={self.d_min}"
        if self.a1_meta is not None:
            text += f",a1_meta={self.a1_meta}"
        return text + ")"


@dataclass(frozen=True)
class PledParams:
    """Parameters of ``p(x) = A x**-b exp(-x/c)`` on ``x >= d_min``."""

    b: float
    c: float
    d_min: int = 2

    def __post_init__(self):
        object.__setattr__(self, "b", _check_real("b", self.b))
        c = _check_real("c", self.c)
        if c <= 0:
            raise InvalidParameterError(f"c must be > 0, got {c}")
        object.__setattr__(self, "c", c)
        object.__setattr__(
            self, "d_min", _check_int("d_min", self.d_min, 1, DegenerateSupportError)
        )

    def digest(self) -> str:
        return f"PLED(b={self.b!r},c={self.c!r},d_min={self.d_min})"


@dataclass(frozen=True)
class ModelEvaluation:
    degrees: np.ndarray
    pmf: np.ndarray
    ccdf: np.ndarray
    model_id: str
    params_digest: str


def _as_degrees(x, d_min):
    """Validate integer degrees; returns (array, was_scalar)."""
    arr = np.asarray(x)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if arr.dtype.kind not in "iu":
        if arr.dtype.kind == "f" and np.all(np.isfinite(arr)) and np.all(arr == np.round(arr)):
            arr = arr.astype(np.int64)
        else:
            raise DomainError(f"degrees must be integers, got {x!r}")
    arr = arr.astype(np.int64, copy=False)
    if arr.size and arr.min() < d_min:
        raise DomainError(f"degree {int(arr.min())} is below d_min={d_min}")
    return arr, scalar


def _unwrap(values, scalar):
    return float(values[0]) if scalar else values


# ---------------------------------------------------------------------------
# TPA
# ---------------------------------------------------------------------------


def tpa_tail_ratio(params: TpaParams) -> float:
    """Return ``q = a2 / (a2 + w)``."""
    return params.a2 / (params.a2 + params.w)


@dataclass(frozen=True)
class _TpaTable:
    log_q: float
    log_one_minus_q: float
    # log of the unnormalized pmf (p_{A2} = 1) for x = d_min..a2
    log_head: np.ndarray
    # log of the unnormalized ccdf for x = d_min..a2
    log_suffix: np.ndarray
    log_norm: float


@lru_cache(maxsize=512)
def _tpa_table(a2: int, w: float, d_min: int) -> _TpaTable:
    log_q = -math.log1p(w / a2)
    log_one_minus_q = math.log(w) - math.log(a2 + w)
    if d_min > a2:
        # support lies entirely in the geometric tail
        empty = np.empty(0)
        log_norm = (d_min - a2) * log_q - log_one_minus_q
        return _TpaTable(log_q, log_one_minus_q, empty, empty, log_norm)

    k = np.arange(d_min, a2, dtype=np.float64)
    steps = np.log1p((w + 1.0) / k)
    log_head = np.zeros(a2 - d_min + 1)
    log_head[:-1] = np.cumsum(steps[::-1])[::-1]

    terms = log_head.copy()
    terms[-1] = -log_one_minus_q
    log_suffix = np.logaddexp.accumulate(terms[::-1])[::-1]
    for arr in (log_head, log_suffix):
        arr.flags.writeable = False
    return _TpaTable(log_q, log_one_minus_q, log_head, log_suffix, float(log_suffix[0]))


def _table(params: TpaParams) -> _TpaTable:
    return _tpa_table(params.a2, params.w, params.d_min)


def tpa_p_a2(params: TpaParams) -> float:
    """Probability of degree ``a2`` under the normalization ``ccdf(d_min) = 1``.

    When ``d_min > a2`` the value returned is the formal scale constant
    ``(1 - q) q**(a2 - d_min)`` of the purely geometric law on ``d_min, ...``.
    """
    return math.exp(-_table(params).log_norm)


def tpa_log_pmf(params: TpaParams, x):
    """Natural log of the TPA pmf; accepts a scalar or an array of degrees."""
    xs, scalar = _as_degrees(x, params.d_min)
    t = _table(params)
    out = np.empty(xs.shape, dtype=np.float64)
    head = xs <= params.a2
    out[head] = t.log_head[xs[head] - params.d_min] - t.log_norm
    tail = ~head
    out[tail] = (xs[tail] - params.a2) * t.log_q - t.log_norm
    return _unwrap(out, scalar)


def tpa_log_ccdf(params: TpaParams, x, branch: str | None = None):
    """Natural log of the TPA ccdf.

    ``branch`` forces the head-sum form (``"head"``, valid for
    ``x <= a2``) or the closed geometric form (``"tail"``, valid for
    ``x >= a2``). By default the head form is used below ``a2`` and the
    tail form from ``a2`` on.
    """
    xs, scalar = _as_degrees(x, params.d_min)
    t = _table(params)
    a2 = params.a2
    if branch is None:
        head = xs < a2
    elif branch == "head":
        if params.d_min > a2 or np.any(xs > a2):
            raise DomainError("head branch is only defined for d_min <= x <= a2")
        head = np.ones(xs.shape, dtype=bool)
    elif branch == "tail":
        if np.any(xs < a2):
            raise DomainError("tail branch is only defined for x >= a2")
        head = np.zeros(xs.shape, dtype=bool)
    else:
        raise ValueError(f"unknown branch {branch!r}")

    out = np.empty(xs.shape, dtype=np.float64)
    out[head] = t.log_suffix[xs[head] - params.d_min] - t.log_norm
    tail = ~head
    out[tail] = (xs[tail] - a2) * t.log_q - t.log_one_minus_q - t.log_norm
    return _unwrap(out, scalar)


def tpa_pmf(params: TpaParams, x):
    return _unwrap(np.exp(np.atleast_1d(tpa_log_pmf(params, x))), np.ndim(x) == 0)


def tpa_ccdf(params: TpaParams, x, branch: str | None = None):
    return _unwrap(
        np.exp(np.atleast_1d(tpa_log_ccdf(params, x, branch))), np.ndim(x) == 0
    )


# ---------------------------------------------------------------------------
# PLED
# ---------------------------------------------------------------------------

_FIRST_CHUNK = 1024
_MAX_CHUNK = 1 << 16
# switch to the Euler-Maclaurin tail once this many terms are summed and the
# summand varies slowly enough for two correction terms to be exact in double
_EM_MIN_TERMS = 1 << 14
_EM_SMOOTHNESS = 5e-3


def _check_tol(tol):
    if not (isinstance(tol, numbers.Real) and 0 < tol <= 1e-6):
        raise InvalidToleranceError(f"tol must lie in (0, 1e-6], got {tol!r}")
    return float(tol)


def _log_terms(b, c, x):
    x = np.asarray(x, dtype=np.float64)
    return -b * np.log(x) - x / c


def _remainder_bound(b, c, start):
    """Upper bound on sum_{j >= start} j**-b exp(-j/c)."""
    first = math.exp(-b * math.log(start) - start / c)
    if b >= 0:
        ratio = math.exp(-1.0 / c)
    else:
        ratio = math.exp(-b * math.log1p(1.0 / start) - 1.0 / c)
    bound = first / -math.expm1(math.log(ratio)) if ratio < 1 else math.inf
    if b > 1:
        power = math.exp(-start / c) * (
            start ** -b + start ** (1.0 - b) / (b - 1.0)
        )
        bound = min(bound, power)
    return bound


def _upper_gamma(a, x):
    """Upper incomplete gamma ``Gamma(a, x)`` for real ``a`` and ``x > 0``."""
    if a > 0:
        if a < 150:
            return float(special.gammaincc(a, x) * special.gamma(a))
        return math.exp(special.loggamma(a) + math.log(special.gammaincc(a, x)))
    if x >= 1.0:
        return _upper_gamma_cf(a, x)
    # Gamma(s, x) = (Gamma(s + 1, x) - x**s e**-x) / s, applied downward;
    # cancellation stays mild for x < 1
    n = math.ceil(-a)
    base = a + n
    if base == 0:
        g = float(special.exp1(x))
    else:
        g = float(special.gammaincc(base, x) * special.gamma(base))
    log_x = math.log(x)
    for k in range(1, n + 1):
        s = base - k
        g = (g - math.exp(s * log_x - x)) / s
    return g


def _upper_gamma_cf(a, x):
    """Continued fraction for Gamma(a, x), valid for x > a + 1 (modified Lentz)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d = tiny if abs(d) < tiny else d
        c = b + an / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(a * math.log(x) - x) * h


def _euler_maclaurin_tail(b, c, start):
    """sum_{j >= start} j**-b exp(-j/c) via the integral plus two corrections."""
    integral = c ** (1.0 - b) * _upper_gamma(1.0 - b, start / c)
    f = math.exp(-b * math.log(start) - start / c)
    g1 = -b / start - 1.0 / c
    g2 = b / start**2
    g3 = -2.0 * b / start**3
    d1 = f * g1
    d3 = f * (g1**3 + 3.0 * g1 * g2 + g3)
    return integral + 0.5 * f - d1 / 12.0 + d3 / 720.0


@lru_cache(maxsize=8192)
def _tail_sum(b: float, c: float, start: int, tol: float) -> float:
    total = 0.0
    x = start
    chunk = _FIRST_CHUNK
    while True:
        xs = np.arange(x, x + chunk, dtype=np.float64)
        total += float(np.sum(np.exp(_log_terms(b, c, xs))))
        x += chunk
        if _remainder_bound(b, c, x) <= tol * total:
            return total
        if x - start >= _EM_MIN_TERMS and abs(b) / x + 1.0 / c < _EM_SMOOTHNESS:
            return total + _euler_maclaurin_tail(b, c, x)
        chunk = min(2 * chunk, _MAX_CHUNK)


def pled_normalizer(params: PledParams, tol: float = DEFAULT_TOL) -> float:
    """Return ``A = 1 / sum_{x >= d_min} x**-b exp(-x/c)``.

    The series is summed until a bound on the remainder falls below
    ``tol`` times the partial sum.
    """
    tol = _check_tol(tol)
    return 1.0 / _tail_sum(params.b, params.c, params.d_min, tol)


def pled_pmf(params: PledParams, x, tol: float = DEFAULT_TOL):
    xs, scalar = _as_degrees(x, params.d_min)
    a = pled_normalizer(params, tol)
    return _unwrap(a * np.exp(_log_terms(params.b, params.c, xs)), scalar)


def pled_ccdf(params: PledParams, x, tol: float = DEFAULT_TOL):
    xs, scalar = _as_degrees(x, params.d_min)
    tol = _check_tol(tol)
    norm = _tail_sum(params.b, params.c, params.d_min, tol)
    out = np.array([_tail_sum(params.b, params.c, int(v), tol) / norm for v in xs])
    return _unwrap(out, scalar)


# dense evaluation is used up to this span of degrees
_DENSE_SPAN = 1 << 22


@lru_cache(maxsize=16)
def _dense_grid(lo: int, hi: int):
    xs = np.arange(lo, hi + 1, dtype=np.float64)
    log_xs = np.log(xs)
    xs.flags.writeable = False
    log_xs.flags.writeable = False
    return xs, log_xs


def _pled_dense(params: PledParams, top: int, tol: float):
    """Unnormalized pmf and ccdf for every degree in d_min..top."""
    xs, log_xs = _dense_grid(params.d_min, top)
    terms = np.exp(-params.b * log_xs - xs / params.c)
    rest = _tail_sum(params.b, params.c, top + 1, tol)
    suffix = np.cumsum(terms[::-1])[::-1] + rest
    return terms, suffix


def pled_log_ccdf(params: PledParams, x, tol: float = DEFAULT_TOL):
    """Natural log of the PLED ccdf, vectorized over degrees."""
    xs, scalar = _as_degrees(x, params.d_min)
    tol = _check_tol(tol)
    if xs.size == 0:
        return xs.astype(np.float64)
    top = int(xs.max())
    if top - params.d_min > _DENSE_SPAN:
        return _unwrap(np.log(pled_ccdf(params, xs, tol)), scalar)
    _, suffix = _pled_dense(params, top, tol)
    out = np.log(suffix[xs - params.d_min]) - math.log(suffix[0])
    return _unwrap(out, scalar)


# ---------------------------------------------------------------------------
# shared
# ---------------------------------------------------------------------------


def model_log_ccdf(params, x):
    """Dispatch ``log ccdf`` on the parameter type."""
    if isinstance(params, TpaParams):
        return tpa_log_ccdf(params, x)
    if isinstance(params, PledParams):
        return pled_log_ccdf(params, x)
    raise TypeError(f"unsupported model parameters: {type(params).__name__}")


def model_id(params) -> str:
    if isinstance(params, TpaParams):
        return "TPA"
    if isinstance(params, PledParams):
        return "PLED"
    raise TypeError(f"unsupported model parameters: {type(params).__name__}")


def tabulate(params, degrees) -> ModelEvaluation:
    """Evaluate pmf and ccdf of a model at ascending degrees."""
    xs, _ = _as_degrees(degrees, params.d_min)
    if xs.size > 1 and np.any(np.diff(xs) <= 0):
        raise DomainError("degrees must be strictly ascending")
    if isinstance(params, TpaParams):
        pmf = np.exp(tpa_log_pmf(params, xs))
        ccdf = np.exp(tpa_log_ccdf(params, xs))
    elif isinstance(params, PledParams):
        if xs.size and int(xs.max()) - params.d_min <= _DENSE_SPAN:
            terms, suffix = _pled_dense(params, int(xs.max()), DEFAULT_TOL)
            idx = xs - params.d_min
            pmf = terms[idx] / suffix[0]
            ccdf = suffix[idx] / suffix[0]
        else:
            pmf = np.asarray(pled_pmf(params, xs), dtype=np.float64)
            ccdf = np.asarray(pled_ccdf(params, xs), dtype=np.float64)
    else:
        raise TypeError(f"unsupported model parameters: {type(params).__name__}")
    for arr in (xs, pmf, ccdf):
        arr.flags.writeable = False
    return ModelEvaluation(xs, pmf, ccdf, model_id(params), params.digest())
