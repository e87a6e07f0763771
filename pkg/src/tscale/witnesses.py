"""Extremal test functions built by forward recursion on the lattice.

Each builder solves its inequality hypothesis with equality, or with the
feedback term shrunk by a factor in [0, 1) to sit strictly inside the
hypothesis cone.  Every lattice value depends only on strictly smaller
indices, so the recursions are explicit in row-major order.  Rectangle sums
use compensated summation so the witnesses are as exact as the arithmetic
allows.
"""

from __future__ import annotations

import math

import numpy as np

from .core import GridFn1, _require_same_scale
from .errors import DomainError, ScaleMismatchError
from .grid2d import GridFn2, KernelOracle, TimeScale2D, _require_same_domain


def _cell_weights(domain: TimeScale2D) -> np.ndarray:
    """mu1[a] * mu2[b] over the kappa x kappa cells, as one matrix."""
    return np.outer(np.diff(domain.scale1.points), np.diff(domain.scale2.points))


def _check_feedback(feedback_scale: float) -> float:
    fs = float(feedback_scale)
    if not 0.0 <= fs <= 1.0:
        raise DomainError("feedback_scale must lie in [0, 1]")
    return fs


def witness_pointwise(p: GridFn2, q: GridFn2, k: GridFn2,
                      feedback_scale: float = 1.0) -> GridFn2:
    """u with u = p + feedback_scale * q * double integral of k*u.

    feedback_scale 1 is the equality case of the pointwise-kernel
    hypothesis; smaller factors keep u strictly below the right-hand side
    wherever the feedback term is positive.
    """
    _require_same_domain(p, q)
    _require_same_domain(p, k)
    rho = _check_feedback(feedback_scale)
    n1, n2 = p.domain.shape
    wmu = _cell_weights(p.domain)
    u = np.empty((n1, n2))
    fed = np.empty((n1 - 1, n2 - 1))
    for i in range(n1):
        for j in range(n2):
            s = math.fsum(fed[:i, :j].ravel()) if i and j else 0.0
            u[i, j] = p.values[i, j] + rho * q.values[i, j] * s
            if i < n1 - 1 and j < n2 - 1:
                fed[i, j] = k.values[i, j] * u[i, j] * wmu[i, j]
    return GridFn2(p.domain, u)


def witness_kernel(p: GridFn2, q: GridFn2, kernel: KernelOracle,
                   feedback_scale: float = 1.0) -> GridFn2:
    """Like witness_pointwise, but the kernel also sees the outer point:
    u(t) = p(t) + feedback_scale * q(t) * sum of k(t1, t2, s1, s2) u(s) mu mu.
    """
    _require_same_domain(p, q)
    if not kernel.domain.same_points(p.domain):
        raise ScaleMismatchError("kernel lives on a different product scale")
    rho = _check_feedback(feedback_scale)
    n1, n2 = p.domain.shape
    wmu = _cell_weights(p.domain)
    table = kernel.table()
    u = np.empty((n1, n2))
    uw = np.empty((n1 - 1, n2 - 1))
    for i in range(n1):
        for j in range(n2):
            if i and j:
                if table is not None:
                    block = table[i, j, :i, :j] * uw[:i, :j]
                else:
                    block = np.array([[kernel.eval(i, j, a, b) * uw[a, b]
                                       for b in range(j)] for a in range(i)])
                s = math.fsum(block.ravel())
            else:
                s = 0.0
            u[i, j] = p.values[i, j] + rho * q.values[i, j] * s
            if i < n1 - 1 and j < n2 - 1:
                uw[i, j] = u[i, j] * wmu[i, j]
    return GridFn2(p.domain, u)


def witness_system(c1: float, c2: float, h1: GridFn2, h2: GridFn2,
                   h3: GridFn2, h4: GridFn2,
                   feedback_scale: float = 1.0) -> tuple[GridFn2, GridFn2]:
    """Coupled pair solving u = c1 + ii(h1 u + h2 v), v = c2 + ii(h3 u + h4 v).

    ii is the double integral over [0, t1) x [0, t2); the feedback factor
    scales both integral terms.
    """
    for g in (h2, h3, h4):
        _require_same_domain(h1, g)
    rho = _check_feedback(feedback_scale)
    n1, n2 = h1.domain.shape
    wmu = _cell_weights(h1.domain)
    u = np.empty((n1, n2))
    v = np.empty((n1, n2))
    fed_u = np.empty((n1 - 1, n2 - 1))
    fed_v = np.empty((n1 - 1, n2 - 1))
    for i in range(n1):
        for j in range(n2):
            if i and j:
                su = math.fsum(fed_u[:i, :j].ravel())
                sv = math.fsum(fed_v[:i, :j].ravel())
            else:
                su = sv = 0.0
            u[i, j] = float(c1) + rho * su
            v[i, j] = float(c2) + rho * sv
            if i < n1 - 1 and j < n2 - 1:
                fed_u[i, j] = (h1.values[i, j] * u[i, j] + h2.values[i, j] * v[i, j]) * wmu[i, j]
                fed_v[i, j] = (h3.values[i, j] * u[i, j] + h4.values[i, j] * v[i, j]) * wmu[i, j]
    dom = h1.domain
    return GridFn2(dom, u), GridFn2(dom, v)


def witness_integrodynamic(a1d: GridFn1, b1d: GridFn1, c2d: GridFn2,
                           feedback_scale: float = 1.0) -> tuple[GridFn2, GridFn2]:
    """u vanishing on the axes whose mixed delta w solves the feedback relation.

    w(t1, t2) = a(t1) + b(t2) + feedback_scale * ii(c * (u + w)) and
    u(t1, t2) = ii(w), so u(0, .) = u(., 0) = 0 exactly and w is u's mixed
    partial delta on kappa x kappa by construction.
    """
    dom = c2d.domain
    if not (a1d.scale.same_points(dom.scale1) and b1d.scale.same_points(dom.scale2)):
        raise ScaleMismatchError("axis coefficients must live on the product scale's axes")
    rho = _check_feedback(feedback_scale)
    n1, n2 = dom.shape
    wmu = _cell_weights(dom)
    u = np.empty((n1, n2))
    w = np.empty((n1, n2))
    fed = np.empty((n1 - 1, n2 - 1))
    w_cells = np.empty((n1 - 1, n2 - 1))
    for i in range(n1):
        for j in range(n2):
            if i and j:
                w[i, j] = a1d.values[i] + b1d.values[j] + rho * math.fsum(fed[:i, :j].ravel())
                u[i, j] = math.fsum(w_cells[:i, :j].ravel())
            else:
                w[i, j] = a1d.values[i] + b1d.values[j]
                u[i, j] = 0.0
            if i < n1 - 1 and j < n2 - 1:
                fed[i, j] = c2d.values[i, j] * (u[i, j] + w[i, j]) * wmu[i, j]
                w_cells[i, j] = w[i, j] * wmu[i, j]
    return GridFn2(dom, u), GridFn2(dom, w)


def witness_comparison(f: GridFn1, g: GridFn1, x_a: float, a: int,
                       slack: float = 0.0) -> GridFn1:
    """x on the tail scale with x(a) = x_a and x^delta = f + g*x - slack.

    slack 0 solves the first-order hypothesis with equality; positive slack
    keeps x^delta strictly below f + g*x everywhere.
    """
    _require_same_scale(f, g)
    if slack < 0:
        raise DomainError("slack must be nonnegative")
    scale = f.scale
    a = scale._check_index(a)
    pts = scale.points[a:]
    x = np.empty(len(pts))
    x[0] = float(x_a)
    for k in range(len(pts) - 1):
        mu = pts[k + 1] - pts[k]
        i = a + k
        x[k + 1] = x[k] + mu * (f.values[i] + g.values[i] * x[k] - slack)
    return GridFn1(scale.tail(a), x)
