"""Product scales, partial delta calculus, and Darboux delta sums.

Everything two dimensional lives on the tensor product of two scales.
Partial deltas are forward difference quotients along one axis; double
integrals are left-endpoint sums weighted by both graininesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import TimeScale, neumaier_cumsum
from .errors import DomainError, ScaleMismatchError


@dataclass(frozen=True, eq=False)
class TimeScale2D:
    """Tensor product of two scales; axis 1 is rows, axis 2 is columns."""

    scale1: TimeScale
    scale2: TimeScale

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.scale1), len(self.scale2))

    @property
    def mu1(self) -> np.ndarray:
        return self.scale1.graininess

    @property
    def mu2(self) -> np.ndarray:
        return self.scale2.graininess

    def kappa(self) -> "TimeScale2D":
        """Both axes with their maxima removed."""
        return TimeScale2D(self.scale1.kappa(), self.scale2.kappa())

    def same_points(self, other: "TimeScale2D") -> bool:
        return (self.scale1.same_points(other.scale1)
                and self.scale2.same_points(other.scale2))


@dataclass(frozen=True, eq=False)
class GridFn2:
    """Real values on every lattice point of a product scale."""

    domain: TimeScale2D
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.domain.shape:
            raise ScaleMismatchError(
                f"values of shape {vals.shape} do not fit domain {self.domain.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("grid function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, domain: TimeScale2D,
                      fn: Callable[[float, float], float]) -> "GridFn2":
        t1 = domain.scale1.points
        t2 = domain.scale2.points
        vals = np.array([[float(fn(a, b)) for b in t2] for a in t1])
        return cls(domain, vals)

    @classmethod
    def constant(cls, domain: TimeScale2D, value: float) -> "GridFn2":
        return cls(domain, np.full(domain.shape, float(value)))

    def kappa_restrict(self) -> "GridFn2":
        """The same values minus the last row and column, on the kappa domain."""
        return GridFn2(self.domain.kappa(), self.values[:-1, :-1])


def _require_same_domain(f: GridFn2, g: GridFn2) -> None:
    if not f.domain.same_points(g.domain):
        raise ScaleMismatchError("grid functions live on different product scales")


def partial_delta(f: GridFn2, axis: int) -> GridFn2:
    """Forward difference quotient along one axis (1 or 2).

    The result loses the last row (axis 1) or column (axis 2) and lives on
    the corresponding kappa restriction of the domain.
    """
    d = f.domain
    vals = f.values
    if axis == 1:
        if len(d.scale1) < 2:
            raise DomainError("partial delta along axis 1 needs two rows")
        mu = np.diff(d.scale1.points)[:, None]
        out = (vals[1:, :] - vals[:-1, :]) / mu
        return GridFn2(TimeScale2D(d.scale1.kappa(), d.scale2), out)
    if axis == 2:
        if len(d.scale2) < 2:
            raise DomainError("partial delta along axis 2 needs two columns")
        mu = np.diff(d.scale2.points)[None, :]
        out = (vals[:, 1:] - vals[:, :-1]) / mu
        return GridFn2(TimeScale2D(d.scale1, d.scale2.kappa()), out)
    raise DomainError(f"axis must be 1 or 2, got {axis}")


def mixed_partial(f: GridFn2) -> GridFn2:
    """Second mixed delta, axis 1 then axis 2.

    The two composition orders agree up to rounding, so this canonical
    order stands in for both.
    """
    return partial_delta(partial_delta(f, 1), 2)


def double_integral(f: GridFn2, rect: tuple[int, int, int, int]) -> float:
    """Double delta integral over the index rectangle [a1, b1) x [a2, b2).

    Left-endpoint sum of f * mu1 * mu2, compensated.  Indices address
    lattice points; b1 and b2 are exclusive upper indices, at most the
    last index of their axis.
    """
    a1, b1, a2, b2 = rect
    n1, n2 = f.domain.shape
    if not (0 <= a1 <= b1 <= n1 - 1 and 0 <= a2 <= b2 <= n2 - 1):
        raise DomainError(f"rectangle {rect} does not fit the {n1}x{n2} lattice")
    mu1 = np.diff(f.domain.scale1.points)
    mu2 = np.diff(f.domain.scale2.points)
    block = f.values[a1:b1, a2:b2] * np.outer(mu1[a1:b1], mu2[a2:b2])
    return math.fsum(block.ravel())


def running_integral(f: GridFn2, axis: int) -> GridFn2:
    """Cumulative delta integral from index 0 along one axis.

    Entry [i, j] holds the integral over [0, i) (axis 1) or [0, j)
    (axis 2), so the first row or column is zero.  Same domain as f.
    """
    d = f.domain
    vals = f.values
    out = np.zeros_like(vals)
    if axis == 1:
        w = vals[:-1, :] * np.diff(d.scale1.points)[:, None]
        for j in range(vals.shape[1]):
            out[1:, j] = neumaier_cumsum(w[:, j])
    elif axis == 2:
        w = vals[:, :-1] * np.diff(d.scale2.points)[None, :]
        for i in range(vals.shape[0]):
            out[i, 1:] = neumaier_cumsum(w[i, :])
    else:
        raise DomainError(f"axis must be 1 or 2, got {axis}")
    return GridFn2(d, out)


def running_double_integral(f: GridFn2) -> GridFn2:
    """Cumulative double integral over [0, i) x [0, j) at every lattice point."""
    return running_integral(running_integral(f, 2), 1)


@dataclass(frozen=True)
class RectPartition:
    """Index cuts along each axis; strictly increasing, spanning the lattice."""

    cuts1: tuple[int, ...]
    cuts2: tuple[int, ...]

    def __post_init__(self):
        for cuts in (self.cuts1, self.cuts2):
            if len(cuts) < 2 or any(b <= a for a, b in zip(cuts, cuts[1:])):
                raise DomainError("partition cuts must be strictly increasing, two or more")

    @classmethod
    def finest(cls, domain: TimeScale2D) -> "RectPartition":
        n1, n2 = domain.shape
        return cls(tuple(range(n1)), tuple(range(n2)))

    def refine(self, other: "RectPartition") -> "RectPartition":
        """Common refinement: the union of the cut sets on each axis."""
        return RectPartition(tuple(sorted(set(self.cuts1) | set(other.cuts1))),
                             tuple(sorted(set(self.cuts2) | set(other.cuts2))))


# Dense kernel caches beyond this entry count fall back to on-demand eval.
MAX_KERNEL_TABLE = 10 ** 8


class KernelOracle:
    """Four-argument kernel k(t1, t2, s1, s2) evaluated by lattice indices.

    The first two indices are sigma-capable: they may take any index of the
    full scales, so callers working on kappa x kappa can still ask for
    sigma-shifted first arguments.  Evaluations are cached as a dense table
    when the lattice is small enough, otherwise computed on demand.
    """

    def __init__(self, domain: TimeScale2D, fn: Callable[[int, int, int, int], float]):
        self.domain = domain
        self._fn = fn
        self._table: np.ndarray | None = None
        n1, n2 = domain.shape
        self._cacheable = n1 * n1 * n2 * n2 <= MAX_KERNEL_TABLE

    @classmethod
    def from_point_function(cls, domain: TimeScale2D,
                            fn: Callable[[float, float, float, float], float]) -> "KernelOracle":
        """Wrap a kernel given as a function of the four point values."""
        p1 = domain.scale1.points
        p2 = domain.scale2.points
        return cls(domain,
                   lambda i1, i2, j1, j2: float(fn(p1[i1], p2[i2], p1[j1], p2[j2])))

    @classmethod
    def from_table(cls, domain: TimeScale2D, table: np.ndarray) -> "KernelOracle":
        """Kernel backed by a precomputed (n1, n2, n1, n2) value table."""
        table = np.asarray(table, dtype=float)
        n1, n2 = domain.shape
        if table.shape != (n1, n2, n1, n2):
            raise DomainError(f"kernel table shape {table.shape} does not fit the lattice")
        if not np.all(np.isfinite(table)):
            raise DomainError("kernel table values must be finite")
        self = cls(domain, lambda i1, i2, j1, j2: float(table[i1, i2, j1, j2]))
        self._table = table
        return self

    @classmethod
    def constant(cls, domain: TimeScale2D, value: float) -> "KernelOracle":
        v = float(value)
        return cls(domain, lambda i1, i2, j1, j2: v)

    def eval(self, i1: int, i2: int, j1: int, j2: int) -> float:
        if self._table is not None:
            return float(self._table[i1, i2, j1, j2])
        return float(self._fn(i1, i2, j1, j2))

    def table(self) -> np.ndarray | None:
        """Dense cache, built on first request; None when over the size cap."""
        if self._table is None and self._cacheable:
            n1, n2 = self.domain.shape
            t = np.empty((n1, n2, n1, n2))
            for i1 in range(n1):
                for i2 in range(n2):
                    for j1 in range(n1):
                        for j2 in range(n2):
                            t[i1, i2, j1, j2] = self._fn(i1, i2, j1, j2)
            self._table = t
        return self._table


def darboux_sums(f: GridFn2, part: RectPartition) -> tuple[float, float]:
    """Upper and lower Darboux delta sums over a rectangle partition.

    Each cell takes its sup / inf over the lattice points it half-openly
    contains and is weighted by its coordinate side lengths.  The finest
    partition collapses both sums onto the double integral.
    """
    n1, n2 = f.domain.shape
    if part.cuts1[0] != 0 or part.cuts1[-1] != n1 - 1 \
            or part.cuts2[0] != 0 or part.cuts2[-1] != n2 - 1:
        raise DomainError("partition cuts must span index 0 through the last index")
    p1 = f.domain.scale1.points
    p2 = f.domain.scale2.points
    upper: list[float] = []
    lower: list[float] = []
    for a1, b1 in zip(part.cuts1, part.cuts1[1:]):
        w1 = p1[b1] - p1[a1]
        for a2, b2 in zip(part.cuts2, part.cuts2[1:]):
            w = w1 * (p2[b2] - p2[a2])
            block = f.values[a1:b1, a2:b2]
            upper.append(block.max() * w)
            lower.append(block.min() * w)
    return math.fsum(upper), math.fsum(lower)
