"""Empirical degree histograms, truncation below ``d_min`` and renormalization."""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EmptySupportError, InvalidParameterError, ParseError

__all__ = [
    "DegreeHistogram",
    "EmpiricalDistribution",
    "parse_histogram",
    "read_table",
    "truncate_renormalize",
    "empirical_ccdf",
]

_SEPARATOR = re.compile(r"\s*,\s*|\s+")


def _frozen(values, dtype):
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DegreeHistogram:
    """Raw ``(degree, count)`` pairs, strictly increasing in degree."""

    entries: tuple[tuple[int, int], ...]
    source_label: str = ""

    def __post_init__(self):
        for d, n in self.entries:
            for value in (d, n):
                if isinstance(value, bool) or int(value) != value:
                    raise InvalidParameterError(f"degrees and counts must be integers, got {value!r}")
        entries = tuple((int(d), int(n)) for d, n in self.entries)
        prev = 0
        for d, n in entries:
            if d < 1:
                raise InvalidParameterError(f"degree must be positive, got {d}")
            if n < 0:
                raise InvalidParameterError(f"count must be non-negative, got {n}")
            if d <= prev:
                raise InvalidParameterError("degrees must be strictly increasing")
            prev = d
        if not any(n > 0 for _, n in entries):
            raise EmptySupportError("histogram has no entry with a positive count")
        object.__setattr__(self, "entries", entries)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([d for d, _ in self.entries], dtype=np.int64)

    @property
    def counts(self) -> np.ndarray:
        return np.array([n for _, n in self.entries], dtype=np.int64)

    @property
    def n_total(self) -> int:
        return sum(n for _, n in self.entries)

    @classmethod
    def from_counts(cls, counts, source_label=""):
        """Build from a ``{degree: count}`` mapping; duplicates are impossible."""
        return cls(tuple(sorted(counts.items())), source_label)


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Truncated, renormalized empirical pmf and ccdf at observed degrees.

    ``counts``, ``n_total`` and ``n_kept`` are ``None`` when the distribution
    was read from a probability table rather than built from node tallies.
    """

    d_min: int
    degrees: np.ndarray
    pmf: np.ndarray
    ccdf: np.ndarray
    eta: float
    n_total: int | None = None
    n_kept: int | None = None
    counts: np.ndarray | None = field(default=None, repr=False)
    source_label: str = ""

    def __len__(self):
        return len(self.degrees)

    @classmethod
    def from_ccdf(cls, degrees, ccdf, d_min=None, source_label=""):
        """Build from ccdf values at contiguous-or-not ascending degrees.

        The pmf is recovered by differencing; the last degree keeps its whole
        ccdf as mass. The ccdf is rescaled so its first value is 1.
        """
        degrees = np.asarray(degrees, dtype=np.int64)
        ccdf = np.asarray(ccdf, dtype=np.float64)
        if degrees.size == 0:
            raise EmptySupportError("empty table")
        if degrees.shape != ccdf.shape:
            raise InvalidParameterError("degrees and ccdf differ in length")
        if np.any(np.diff(degrees) <= 0):
            raise InvalidParameterError("degrees must be strictly increasing")
        if d_min is None:
            d_min = int(degrees[0])
        if degrees[0] < d_min:
            raise InvalidParameterError("table contains degrees below d_min")
        if not (np.all(np.isfinite(ccdf)) and np.all(ccdf > 0)):
            raise InvalidParameterError("ccdf values must be positive and finite")
        if np.any(np.diff(ccdf) > 0):
            raise InvalidParameterError("ccdf must be non-increasing")
        ccdf = ccdf / ccdf[0]
        pmf = np.append(ccdf[:-1] - ccdf[1:], ccdf[-1])
        return cls(
            d_min=int(d_min),
            degrees=_frozen(degrees, np.int64),
            pmf=_frozen(pmf, np.float64),
            ccdf=_frozen(ccdf, np.float64),
            eta=1.0,
            source_label=source_label,
        )


def _data_lines(stream):
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def _parse_int(token, what, lineno):
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{what} is not an integer: {token!r}", lineno) from None


def parse_histogram(stream, source_label: str = "") -> DegreeHistogram:
    """Parse ``degree count`` lines (comma or whitespace separated).

    Blank lines and lines starting with ``#`` are skipped; repeated degrees
    are merged by summing their counts.

    >>> parse_histogram("# header\\n2,400\\n1,573\\n").entries
    ((1, 573), (2, 400))
    """
    counts: dict[int, int] = {}
    seen = False
    for lineno, line in _data_lines(stream):
        fields = _SEPARATOR.split(line)
        if len(fields) != 2:
            raise ParseError(f"expected 'degree count', got {line!r}", lineno)
        degree = _parse_int(fields[0], "degree", lineno)
        count = _parse_int(fields[1], "count", lineno)
        if degree < 1:
            raise ParseError(f"degree must be positive, got {degree}", lineno)
        if count < 0:
            raise ParseError(f"count must be non-negative, got {count}", lineno)
        counts[degree] = counts.get(degree, 0) + count
        seen = True
    if not seen:
        raise ParseError("no data lines")
    try:
        return DegreeHistogram.from_counts(counts, source_label)
    except EmptySupportError as exc:
        raise ParseError(str(exc)) from None


def read_table(stream, source_label: str = "") -> EmpiricalDistribution:
    """Read a ``degree,pmf,ccdf`` table (as written by ``eval``/``renorm``)."""
    header = None
    degrees, ccdf = [], []
    for lineno, line in _data_lines(stream):
        fields = [f.strip() for f in line.split(",")]
        if header is None:
            header = fields
            if header != ["degree", "pmf", "ccdf"]:
                raise ParseError(f"unexpected table header {line!r}", lineno)
            continue
        if len(fields) != 3:
            raise ParseError(f"expected 3 columns, got {line!r}", lineno)
        degrees.append(_parse_int(fields[0], "degree", lineno))
        try:
            ccdf.append(float(fields[2]))
        except ValueError:
            raise ParseError(f"ccdf is not a number: {fields[2]!r}", lineno) from None
    if not degrees:
        raise ParseError("no data lines")
    keep = [i for i, v in enumerate(ccdf) if v > 0]
    try:
        return EmpiricalDistribution.from_ccdf(
            [degrees[i] for i in keep], [ccdf[i] for i in keep], source_label=source_label
        )
    except (InvalidParameterError, EmptySupportError) as exc:
        raise ParseError(str(exc)) from None


def truncate_renormalize(data, d_min: int) -> EmpiricalDistribution:
    """Drop degrees below ``d_min`` and rescale the rest to unit mass.

    The rescaling factor is ``eta = 1 / (1 - sum_{j < d_min} p_j)``; the
    ccdf of the kept degrees is the original ccdf times ``eta``.

    Parameters
    ----------
    data : DegreeHistogram or EmpiricalDistribution
        Source of the degrees. An ``EmpiricalDistribution`` is truncated
        further and its ``eta`` is composed with the new factor.
    d_min : int
        Smallest degree retained.
    """
    if isinstance(d_min, bool) or int(d_min) != d_min or d_min < 1:
        raise InvalidParameterError(f"d_min must be a positive integer, got {d_min!r}")
    d_min = int(d_min)

    if isinstance(data, DegreeHistogram):
        degrees, counts = data.degrees, data.counts
        n_total = int(counts.sum())
        label = data.source_label
    elif isinstance(data, EmpiricalDistribution):
        if d_min < data.d_min:
            raise InvalidParameterError("cannot truncate below the existing d_min")
        if data.counts is None:
            return _truncate_table(data, d_min)
        degrees, counts = data.degrees, data.counts
        n_total = data.n_total
        label = data.source_label
    else:
        raise TypeError(f"cannot truncate {type(data).__name__}")

    mask = (degrees >= d_min) & (counts > 0)
    if not mask.any():
        raise EmptySupportError(f"no observed degrees at or above d_min={d_min}")
    kept_deg = degrees[mask]
    kept = counts[mask]
    n_kept = int(kept.sum())
    # integer suffix sums keep the ccdf exact up to one division
    suffix = np.cumsum(kept[::-1])[::-1]
    return EmpiricalDistribution(
        d_min=d_min,
        degrees=_frozen(kept_deg, np.int64),
        pmf=_frozen(kept / n_kept, np.float64),
        ccdf=_frozen(suffix / n_kept, np.float64),
        eta=n_total / n_kept,
        n_total=n_total,
        n_kept=n_kept,
        counts=_frozen(kept, np.int64),
        source_label=label,
    )


def _truncate_table(dist: EmpiricalDistribution, d_min: int) -> EmpiricalDistribution:
    mask = dist.degrees >= d_min
    if not mask.any():
        raise EmptySupportError(f"no observed degrees at or above d_min={d_min}")
    kept_mass = float(dist.ccdf[mask][0])
    out = EmpiricalDistribution.from_ccdf(
        dist.degrees[mask], dist.ccdf[mask], d_min=d_min, source_label=dist.source_label
    )
    object.__setattr__(out, "eta", dist.eta / kept_mass)
    return out


def empirical_ccdf(dist: EmpiricalDistribution, x: int) -> float:
    """Fraction of kept mass at degrees ``>= x`` (a right-continuous step)."""
    if x < dist.d_min:
        raise DomainError(f"degree {x} is below d_min={dist.d_min}")
    idx = int(np.searchsorted(dist.degrees, x, side="left"))
    if idx >= len(dist.degrees):
        return 0.0
    return float(dist.ccdf[idx])
