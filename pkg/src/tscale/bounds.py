"""Explicit a-priori bounds for two-variable integral and integro-dynamic
inequalities on product scales.

Four shapes of hypothesis are covered, selected by BoundCase:

* pointwise: u <= p + q * ii(k(s1, s2) u)          (k a grid function)
* kernel:    u <= p + q * ii(k(t1, t2, s1, s2) u)  (k a four-argument kernel)
* system:    coupled pair u <= c1 + ii(h1 u + h2 v), v <= c2 + ii(h3 u + h4 v)
* integrodynamic: mixed-derivative relation with feedback through u + u^{d1 d2}

where ii is the double delta integral over [0, t1) x [0, t2).  Each bound
operation assembles the intermediate functions (a, b, A, c, H, p, q, h) by
lattice summation, forms the dominating function with a first-variable
product exponential, and compares an optional witness against it pointwise
on kappa x kappa.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import GridFn1
from .errors import DomainError, ScaleMismatchError
from .grid2d import (GridFn2, KernelOracle, TimeScale2D, _require_same_domain,
                     running_double_integral, running_integral)
from . import witnesses

log = logging.getLogger(__name__)

# Witness excess beyond this relative tolerance counts as a violation.
VIOLATION_TOL = 1e-9
# Nonnegativity hypothesis checks accept values down to this far below zero.
HYPOTHESIS_SLACK = 1e-12


class ExponentVariant(Enum):
    """Which variable the exponential factor of the kernel-case bound runs in.

    The first-variable form is the one the dominance argument constructs;
    the second-variable form is selectable for comparison runs.
    """

    FIRST_VARIABLE = "first"
    SECOND_VARIABLE = "second"


class BoundCase(Enum):
    """The four inequality shapes this module bounds."""

    POINTWISE = "pointwise"
    KERNEL = "kernel"
    SYSTEM = "system"
    INTEGRODYNAMIC = "integrodynamic"


@dataclass
class BoundInputs:
    """Input bundle for the bound operations; unused fields stay None.

    which selects the case.  k is a GridFn2 for the pointwise case and a
    KernelOracle for the kernel case.  u is an optional externally supplied
    witness to compare against the computed bound; the system and
    integro-dynamic cases generate their own equality witness when u is
    absent.
    """

    which: BoundCase
    u: GridFn2 | None = None
    p: GridFn2 | None = None
    q: GridFn2 | None = None
    k: GridFn2 | KernelOracle | None = None
    c1: float | None = None
    c2: float | None = None
    h1: GridFn2 | None = None
    h2: GridFn2 | None = None
    h3: GridFn2 | None = None
    h4: GridFn2 | None = None
    a1d: GridFn1 | None = None
    b1d: GridFn1 | None = None
    c2d: GridFn2 | None = None
    exponent_variant: ExponentVariant = ExponentVariant.FIRST_VARIABLE


@dataclass
class BoundReport:
    """Bound evaluation on kappa x kappa plus witness comparison statistics.

    max_violation is the largest witness excess over the bound, clamped at
    zero; min_slack the smallest bound-minus-witness gap.  Without a witness
    max_violation is 0 and min_slack is +inf.  violations lists
    (i, j, witness, bound) for every point whose excess crosses the relative
    tolerance VIOLATION_TOL * (1 + |bound|).
    """

    bound: GridFn2
    witness: GridFn2 | None
    max_violation: float
    min_slack: float
    violations: list[tuple[int, int, float, float]]
    hypothesis_diagnostics: list[str] = field(default_factory=list)
    exponent_variant: ExponentVariant = ExponentVariant.FIRST_VARIABLE


def _need2(inputs: BoundInputs, *names: str) -> list[GridFn2]:
    out = []
    for nm in names:
        v = getattr(inputs, nm)
        if not isinstance(v, GridFn2):
            raise DomainError(f"{inputs.which.value} case needs {nm} as a grid function")
        out.append(v)
    for v in out[1:]:
        _require_same_domain(out[0], v)
    return out


def _restrict_witness(witness: GridFn2, target: TimeScale2D) -> GridFn2:
    m1, m2 = target.shape
    d = witness.domain
    if d.same_points(target):
        return witness
    if np.array_equal(d.scale1.points[:m1], target.scale1.points) \
            and np.array_equal(d.scale2.points[:m2], target.scale2.points):
        return GridFn2(target, witness.values[:m1, :m2])
    raise ScaleMismatchError("witness does not cover the bound's evaluation domain")


def _finish(bound: GridFn2, witness: GridFn2 | None, diags: list[str],
            variant: ExponentVariant) -> BoundReport:
    if witness is None:
        return BoundReport(bound, None, 0.0, math.inf, [], diags, variant)
    w = _restrict_witness(witness, bound.domain)
    excess = w.values - bound.values
    tol = VIOLATION_TOL * (1.0 + np.abs(bound.values))
    bad = np.argwhere(excess > tol)
    violations = [(int(i), int(j), float(w.values[i, j]), float(bound.values[i, j]))
                  for i, j in bad]
    return BoundReport(
        bound=bound,
        witness=w,
        max_violation=max(0.0, float(excess.max())),
        min_slack=float((-excess).min()),
        violations=violations,
        hypothesis_diagnostics=diags,
        exponent_variant=variant,
    )


def _min_location(vals: np.ndarray) -> tuple[float, tuple[int, ...]]:
    idx = np.unravel_index(int(np.argmin(vals)), vals.shape)
    return float(vals[idx]), tuple(int(i) for i in idx)


def _check_nonneg(vals: np.ndarray, name: str, diags: list[str]) -> None:
    worst, at = _min_location(vals)
    if worst < -HYPOTHESIS_SLACK:
        diags.append(f"{name} negative at index {at}: {worst:.6g}")


def _kernel_difference_diagnostics(kernel: KernelOracle, diags: list[str]) -> None:
    """Nonnegativity of the kernel and of its three sigma-shifted lattice
    differences over every argument combination the bound formulas touch."""
    dom = kernel.domain
    n1, n2 = dom.shape
    mu1 = np.diff(dom.scale1.points)
    mu2 = np.diff(dom.scale2.points)
    table = kernel.table()
    if table is None:
        diags.append("kernel too large to table; difference hypotheses not checked")
        return
    _check_nonneg(table, "kernel", diags)
    worst = {"second-variable difference": (math.inf, None),
             "first-variable difference": (math.inf, None),
             "mixed difference": (math.inf, None)}

    def track(kind: str, vals: np.ndarray, where: tuple) -> None:
        lo = float(vals.min()) if vals.size else math.inf
        if lo < worst[kind][0]:
            worst[kind] = (lo, where)

    for i in range(n1 - 1):
        for j in range(n2 - 1):
            if j:
                track("second-variable difference",
                      (table[i + 1, j + 1, i, :j] - table[i + 1, j, i, :j]) / mu2[j],
                      (i, j))
            if i:
                track("first-variable difference",
                      (table[i + 1, j + 1, :i, j] - table[i, j + 1, :i, j]) / mu1[i],
                      (i, j))
            if i and j:
                track("mixed difference",
                      (table[i + 1, j + 1, :i, :j] - table[i + 1, j, :i, :j]
                       - table[i, j + 1, :i, :j] + table[i, j, :i, :j])
                      / (mu1[i] * mu2[j]),
                      (i, j))
    for kind, (lo, where) in worst.items():
        if lo < -HYPOTHESIS_SLACK:
            diags.append(f"kernel {kind} negative near {where}: {lo:.6g}")


def check_hypotheses(inputs: BoundInputs) -> list[str]:
    """Diagnostics for the selected case's sign and monotonicity hypotheses.

    Returns an empty list when every condition holds within -1e-12 slack;
    entries name the failing function and a witness point.  Hypothesis
    failures never raise; structural incompleteness does.
    """
    diags: list[str] = []
    which = inputs.which
    if which is BoundCase.POINTWISE:
        p, q, k = _need2(inputs, "p", "q", "k")
        for g, nm in ((p, "p"), (q, "q"), (k, "k")):
            _check_nonneg(g.values, nm, diags)
    elif which is BoundCase.KERNEL:
        p, q = _need2(inputs, "p", "q")
        for g, nm in ((p, "p"), (q, "q")):
            _check_nonneg(g.values, nm, diags)
        if not isinstance(inputs.k, KernelOracle):
            raise DomainError("kernel case needs k as a KernelOracle")
        _kernel_difference_diagnostics(inputs.k, diags)
    elif which is BoundCase.SYSTEM:
        hs = _need2(inputs, "h1", "h2", "h3", "h4")
        if inputs.c1 is None or inputs.c2 is None:
            raise DomainError("system case needs constants c1 and c2")
        for val, nm in ((inputs.c1, "c1"), (inputs.c2, "c2")):
            if val < -HYPOTHESIS_SLACK:
                diags.append(f"{nm} negative: {val:.6g}")
        for g, nm in zip(hs, ("h1", "h2", "h3", "h4")):
            _check_nonneg(g.values, nm, diags)
    elif which is BoundCase.INTEGRODYNAMIC:
        a1d, b1d, c2d = inputs.a1d, inputs.b1d, inputs.c2d
        if not (isinstance(a1d, GridFn1) and isinstance(b1d, GridFn1)
                and isinstance(c2d, GridFn2)):
            raise DomainError("integrodynamic case needs a1d, b1d, c2d")
        for g, nm in ((a1d, "a"), (b1d, "b")):
            worst = float(g.values.min())
            if worst <= 0.0:
                diags.append(f"{nm} must be strictly positive, found {worst:.6g}")
            deltas = np.diff(g.values) / np.diff(g.scale.points)
            lo, at = (float(deltas.min()), int(np.argmin(deltas))) if len(deltas) \
                else (0.0, 0)
            if lo < -HYPOTHESIS_SLACK:
                diags.append(f"{nm} delta derivative negative at index {at}: {lo:.6g}")
        _check_nonneg(c2d.values, "c", diags)
        if inputs.u is not None:
            from .grid2d import mixed_partial
            _check_nonneg(mixed_partial(inputs.u).values,
                          "witness mixed delta", diags)
    else:
        raise DomainError(f"unknown bound case {which}")
    return diags


def _exp_axis1(c: np.ndarray, mu1: np.ndarray) -> np.ndarray:
    """E[i, j] = product over s < i of (1 + mu1[s] * c[s, j])."""
    out = np.ones_like(c)
    if c.shape[0] > 1:
        factors = 1.0 + mu1[: c.shape[0] - 1, None] * c[:-1, :]
        np.cumprod(factors, axis=0, out=out[1:, :])
    if not np.all(np.isfinite(out)):
        raise DomainError("first-variable exponential overflowed")
    return out


def _exp_axis2(c: np.ndarray, mu2: np.ndarray) -> np.ndarray:
    """E[i, j] = product over s < j of (1 + mu2[s] * c[i, s])."""
    out = np.ones_like(c)
    if c.shape[1] > 1:
        factors = 1.0 + mu2[None, : c.shape[1] - 1] * c[:, :-1]
        np.cumprod(factors, axis=1, out=out[:, 1:])
    if not np.all(np.isfinite(out)):
        raise DomainError("second-variable exponential overflowed")
    return out


def gronwall_2d(A: GridFn2, b: GridFn2) -> GridFn2:
    """Dominating function for z <= A + double integral of b*z.

    Returns Z = A * E where E is the first-variable running product of
    1 + mu1 * c and c(t1, t2) is the integral of b(t1, .) over [0, t2).
    The dominance argument needs A and b nonnegative and A nondecreasing in
    each variable; failures of those conditions are logged as warnings
    rather than raised, since the product is still well defined.
    """
    _require_same_domain(A, b)
    av = A.values
    scale = 1e-12 * (1.0 + float(np.abs(av).max()))
    if float(av.min()) < -scale or float(b.values.min()) < -scale:
        log.warning("gronwall_2d: negative inputs weaken the dominance argument")
    if av.shape[0] > 1 and float(np.diff(av, axis=0).min()) < -scale:
        log.warning("gronwall_2d: A decreases along axis 1; bound not guaranteed")
    if av.shape[1] > 1 and float(np.diff(av, axis=1).min()) < -scale:
        log.warning("gronwall_2d: A decreases along axis 2; bound not guaranteed")
    c = running_integral(b, 2).values
    e = _exp_axis1(c, A.domain.mu1)
    out = av * e
    if not np.all(np.isfinite(out)):
        raise DomainError("gronwall_2d output overflowed")
    return GridFn2(A.domain, out)


def bound_pointwise(inputs: BoundInputs) -> BoundReport:
    """Bound p + q * A * e_c for u <= p + q * ii(k u) with pointwise k.

    a = k*p and b = k*q; A is the running double integral of a, c the
    running second-axis integral of b, and the exponential runs in the
    first variable (through the gronwall_2d machinery).
    """
    p, q, k = _need2(inputs, "p", "q", "k")
    diags = check_hypotheses(inputs)
    dom = p.domain
    a = GridFn2(dom, k.values * p.values)
    b = GridFn2(dom, k.values * q.values)
    A = running_double_integral(a)
    z = gronwall_2d(A, b)
    bound_full = p.values + q.values * z.values
    if not np.all(np.isfinite(bound_full)):
        raise DomainError("pointwise bound overflowed")
    bound = GridFn2(dom, bound_full).kappa_restrict()
    return _finish(bound, inputs.u, diags, ExponentVariant.FIRST_VARIABLE)


def bound_kernel(inputs: BoundInputs) -> BoundReport:
    """Bound p + q * A * E for u <= p + q * ii(k(t1, t2, s1, s2) u).

    a and b expand the sigma-shifted kernel against p and q: the kernel
    value at the shifted corner plus three correction integrals against the
    kernel's lattice differences.  A = ii(a), c = integral of b over the
    second axis, and E = e_c in the variable chosen by exponent_variant.
    """
    p, q = _need2(inputs, "p", "q")
    kernel = inputs.k
    if not isinstance(kernel, KernelOracle):
        raise DomainError("kernel case needs k as a KernelOracle")
    if not kernel.domain.same_points(p.domain):
        raise ScaleMismatchError("kernel lives on a different product scale")
    diags = check_hypotheses(inputs)
    dom = p.domain
    n1, n2 = dom.shape
    if n1 < 2 or n2 < 2:
        raise DomainError("kernel bound needs at least two points per axis")
    mu1 = np.diff(dom.scale1.points)
    mu2 = np.diff(dom.scale2.points)
    table = kernel.table()

    def corner(i1: int, i2: int, j1: int, j2: int) -> float:
        return float(table[i1, i2, j1, j2]) if table is not None \
            else kernel.eval(i1, i2, j1, j2)

    def slab(i1: int, i2: int, j1s: slice, j2s: slice) -> np.ndarray:
        if table is not None:
            return table[i1, i2, j1s, j2s]
        r1 = range(*j1s.indices(n1))
        r2 = range(*j2s.indices(n2))
        return np.array([kernel.eval(i1, i2, a, b)
                         for a in r1 for b in r2]).reshape(len(r1), len(r2))

    m1, m2 = n1 - 1, n2 - 1
    a_vals = np.empty((m1, m2))
    b_vals = np.empty((m1, m2))
    for i in range(m1):
        for j in range(m2):
            d2 = (slab(i + 1, j + 1, slice(i, i + 1), slice(0, j))
                  - slab(i + 1, j, slice(i, i + 1), slice(0, j))).ravel() / mu2[j]
            d1 = (slab(i + 1, j + 1, slice(0, i), slice(j, j + 1))
                  - slab(i, j + 1, slice(0, i), slice(j, j + 1))).ravel() / mu1[i]
            d12 = (slab(i + 1, j + 1, slice(0, i), slice(0, j))
                   - slab(i + 1, j, slice(0, i), slice(0, j))
                   - slab(i, j + 1, slice(0, i), slice(0, j))
                   + slab(i, j, slice(0, i), slice(0, j))) / (mu1[i] * mu2[j])
            for target, coeff in ((a_vals, p.values), (b_vals, q.values)):
                target[i, j] = math.fsum([
                    corner(i + 1, j + 1, i, j) * coeff[i, j],
                    math.fsum(d2 * coeff[i, :j] * mu2[:j]),
                    math.fsum(d1 * coeff[:i, j] * mu1[:i]),
                    math.fsum((d12 * coeff[:i, :j]
                               * np.outer(mu1[:i], mu2[:j])).ravel()),
                ])
    kdom = dom.kappa()
    A = running_double_integral(GridFn2(kdom, a_vals)).values
    c = running_integral(GridFn2(kdom, b_vals), 2).values
    if inputs.exponent_variant is ExponentVariant.FIRST_VARIABLE:
        e = _exp_axis1(c, mu1)
    else:
        e = _exp_axis2(c, mu2)
    bound_vals = p.values[:m1, :m2] + q.values[:m1, :m2] * A * e
    if not np.all(np.isfinite(bound_vals)):
        raise DomainError("kernel bound overflowed")
    bound = GridFn2(kdom, bound_vals)
    return _finish(bound, inputs.u, diags, inputs.exponent_variant)


def bound_system(inputs: BoundInputs) -> BoundReport:
    """Bound c3 + A * e_c for the coupled pair, compared against u + v.

    c3 = c1 + c2; H is the pointwise max of h1 + h3 and h2 + h4;
    A = c3 * ii(H); c integrates H over the second axis.  When no witness
    is supplied the coupled equality recursion provides one and the report
    compares u + v against the bound.
    """
    hs = _need2(inputs, "h1", "h2", "h3", "h4")
    if inputs.c1 is None or inputs.c2 is None:
        raise DomainError("system case needs constants c1 and c2")
    c1, c2 = float(inputs.c1), float(inputs.c2)
    if c1 < 0 or c2 < 0:
        raise DomainError(f"system constants must be nonnegative, got {c1}, {c2}")
    diags = check_hypotheses(inputs)
    dom = hs[0].domain
    c3 = c1 + c2
    h_vals = np.maximum(hs[0].values + hs[2].values, hs[1].values + hs[3].values)
    hfn = GridFn2(dom, h_vals)
    A = c3 * running_double_integral(hfn).values
    c = running_integral(hfn, 2).values
    e = _exp_axis1(c, dom.mu1)
    bound_full = c3 + A * e
    if not np.all(np.isfinite(bound_full)):
        raise DomainError("system bound overflowed")
    bound = GridFn2(dom, bound_full).kappa_restrict()
    if inputs.u is not None:
        witness = inputs.u
    else:
        u, v = witnesses.witness_system(c1, c2, *hs)
        witness = GridFn2(dom, u.values + v.values)
    return _finish(bound, witness, diags, ExponentVariant.FIRST_VARIABLE)


def bound_integrodynamic(inputs: BoundInputs) -> BoundReport:
    """Bound ii(h) for the mixed-derivative relation, compared against u.

    p is the quotient-plus-integral coefficient a^{d1}/(a + b(0)) plus the
    integral of 1 + c over the second axis; q = (a(0) + b(t2)) * e_p * c
    with e_p the first-variable exponential of p at fixed t2;
    h = a + b + ii(q) and the bound is the running double integral of h.
    """
    a1d, b1d, c2d = inputs.a1d, inputs.b1d, inputs.c2d
    if not (isinstance(a1d, GridFn1) and isinstance(b1d, GridFn1)
            and isinstance(c2d, GridFn2)):
        raise DomainError("integrodynamic case needs a1d, b1d, c2d")
    dom = c2d.domain
    if not (a1d.scale.same_points(dom.scale1) and b1d.scale.same_points(dom.scale2)):
        raise ScaleMismatchError("axis coefficients must live on the product scale's axes")
    if float(a1d.values.min()) <= 0.0 or float(b1d.values.min()) <= 0.0:
        raise DomainError("axis coefficients must be strictly positive")
    diags = check_hypotheses(inputs)
    n1, n2 = dom.shape
    if n1 < 2 or n2 < 2:
        raise DomainError("integrodynamic bound needs at least two points per axis")
    m1, m2 = n1 - 1, n2 - 1
    mu1 = np.diff(dom.scale1.points)
    mu2 = np.diff(dom.scale2.points)
    kdom = dom.kappa()
    a_delta = np.diff(a1d.values) / mu1
    one_plus_c = GridFn2(kdom, 1.0 + c2d.values[:m1, :m2])
    inner = running_integral(one_plus_c, 2).values
    p_vals = a_delta[:, None] / (a1d.values[:m1, None] + b1d.values[0]) + inner
    e_p = _exp_axis1(p_vals, mu1)
    q_vals = (a1d.values[0] + b1d.values[None, :m2]) * e_p * c2d.values[:m1, :m2]
    qq = running_double_integral(GridFn2(kdom, q_vals)).values
    h_vals = a1d.values[:m1, None] + b1d.values[None, :m2] + qq
    bound = running_double_integral(GridFn2(kdom, h_vals))
    if not np.all(np.isfinite(bound.values)):
        raise DomainError("integrodynamic bound overflowed")
    if inputs.u is not None:
        witness = inputs.u
    else:
        witness = witnesses.witness_integrodynamic(a1d, b1d, c2d)[0]
    return _finish(bound, witness, diags, ExponentVariant.FIRST_VARIABLE)


_DISPATCH = {
    BoundCase.POINTWISE: bound_pointwise,
    BoundCase.KERNEL: bound_kernel,
    BoundCase.SYSTEM: bound_system,
    BoundCase.INTEGRODYNAMIC: bound_integrodynamic,
}


def compute_bound(inputs: BoundInputs) -> BoundReport:
    """Dispatch to the bound operation selected by inputs.which."""
    return _DISPATCH[inputs.which](inputs)
