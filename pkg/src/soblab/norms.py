"""Numerical norms: L^p, Gagliardo, gradient, Hölder, full Sobolev and BMO.

The Gagliardo double integral is rewritten in lag form.  With
``D(h) = ∫ |u(x+h) - u(x)|^p dx`` and ``h = rho*e``,

    ∬ |u(x)-u(y)|^p / |x-y|^(N+sp) = ∫_{S^{N-1}} ∫_0^∞ rho^(p(1-s)-1) G(rho e) drho de,

where ``G(h) = D(h)/|h|^p`` stays bounded as ``h -> 0``.  The substitution
``rho = L w^(1/beta)`` with ``beta = p(1-s)`` turns the radial integral into
``L^beta/beta ∫_0^1 G(L w^(1/beta)) dw``, a smooth integral on [0, 1] even for
``s`` close to 1.  Beyond the support diameter the two translates no longer
overlap, ``D = 2 ||u||_p^p`` and the tail is summed in closed form.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from soblab.functions import TestFunction
from soblab.quadrature import (
    QuadResult,
    adaptive_quad,
    composite_nodes,
    gl_rule,
    converged_tensor_integral,
)

TINY = 1e-300


# Domains ---------------------------------------------------------------------

@dataclass(frozen=True)
class ConcreteDomain:
    """``whole-space``, an axis-aligned ``box`` or a ``ball``."""

    kind: str
    N: int
    lo: tuple = ()
    hi: tuple = ()
    center: tuple = ()
    radius: float = 0.0

    def __post_init__(self):
        if self.kind == "box":
            if len(self.lo) != self.N or len(self.hi) != self.N:
                raise ValueError("box bounds must have one entry per axis")
            if not all(a < b for a, b in zip(self.lo, self.hi)):
                raise ValueError("box must be nonempty")
        elif self.kind == "ball":
            if len(self.center) != self.N or not self.radius > 0:
                raise ValueError("ball needs a centre in R^N and a positive radius")
        elif self.kind != "whole-space":
            raise ValueError(f"unknown domain kind {self.kind!r}")

    @property
    def bounded(self) -> bool:
        return self.kind != "whole-space"

    def as_box(self) -> "ConcreteDomain":
        """A 1-D ball is an interval; anything else is returned unchanged."""
        if self.kind == "ball" and self.N == 1:
            c = self.center[0]
            return Box((c - self.radius,), (c + self.radius,))
        return self

    def contains_ball(self, center, radius) -> bool:
        c = np.atleast_1d(np.asarray(center, dtype=float))
        if self.kind == "whole-space":
            return True
        if self.kind == "box":
            return bool(np.all(c - radius >= np.asarray(self.lo) - 1e-12)
                        and np.all(c + radius <= np.asarray(self.hi) + 1e-12))
        return bool(np.linalg.norm(c - np.asarray(self.center)) + radius <= self.radius + 1e-12)


def WholeSpace(N: int) -> ConcreteDomain:
    return ConcreteDomain("whole-space", N)


def Box(lo, hi) -> ConcreteDomain:
    lo = tuple(float(v) for v in np.atleast_1d(lo))
    hi = tuple(float(v) for v in np.atleast_1d(hi))
    return ConcreteDomain("box", len(lo), lo=lo, hi=hi)


def Ball(center, radius: float) -> ConcreteDomain:
    c = tuple(float(v) for v in np.atleast_1d(center))
    return ConcreteDomain("ball", len(c), center=c, radius=float(radius))


# Reports ---------------------------------------------------------------------

@dataclass(frozen=True)
class NormReport:
    value: float
    error: float
    cells: int
    tolerance: float
    constant: Optional[float] = None
    flags: tuple = ()

    @property
    def warning(self) -> bool:
        return "tolerance-unmet" in self.flags

    def as_dict(self) -> dict:
        return {"value": self.value, "error": self.error, "cells": self.cells,
                "tolerance": self.tolerance, "constant": self.constant,
                "flags": list(self.flags)}


def _report(value, error, cells, tol, constant=None, flags=()) -> NormReport:
    value = max(float(value), 0.0)
    error = abs(float(error))
    flags = list(flags)
    # Sup-type values are grid lower bounds; their error is the last refinement
    # gain, which says nothing about a quadrature tolerance.
    if "lower-bound" not in flags and error > tol * max(value, TINY) and error > 1e-15:
        flags.append("tolerance-unmet")
    return NormReport(value, error, int(cells), float(tol), constant, tuple(sorted(set(flags))))


def _root(I: float, err: float, p: float):
    """``I^(1/p)`` and its propagated error."""
    I = max(I, 0.0)
    val = I ** (1.0 / p)
    if I <= 0:
        return 0.0, err ** (1.0 / p) if err > 0 else 0.0
    return val, val * err / (p * I)


# Special functions -------------------------------------------------------------

def normalizing_constant(N: int, s: float, p: float) -> float:
    """``s 2^(2s-1) Γ((ps+p+N-2)/2) / (π^(N/2) Γ(1-s))``."""
    s, p = float(s), float(p)
    if not 0 < s < 1:
        raise ValueError(f"the normalizing constant needs s in (0, 1), got {s}")
    if not (1 <= p < math.inf):
        raise ValueError(f"the normalizing constant needs p in [1, inf), got {p}")
    if N < 1:
        raise ValueError("dimension must be positive")
    return (s * 2.0 ** (2 * s - 1) * math.gamma((p * s + p + N - 2) / 2)
            / (math.pi ** (N / 2) * math.gamma(1 - s)))


# Integration regions -----------------------------------------------------------

def _support_interval(u: TestFunction, dom: ConcreteDomain):
    """Interval carrying the function on ``dom`` in 1-D."""
    R = u.radius
    c = u.center[0]
    dom = dom.as_box()
    if dom.kind == "whole-space":
        if R is None:
            raise ValueError(f"{u.label} has no declared support; integrals over R^N need one")
        return c - R, c + R
    a, b = dom.lo[0], dom.hi[0]
    if R is not None:
        a, b = max(a, c - R), min(b, c + R)
    return a, b


def _integrate(u: TestFunction, dom: ConcreteDomain, integrand, rtol: float) -> QuadResult:
    """∫_dom integrand(x) dx where ``integrand`` vanishes off the function's support."""
    if u.N != dom.N:
        raise ValueError(f"dimension mismatch: function N={u.N}, domain N={dom.N}")
    if u.N == 1:
        a, b = _support_interval(u, dom)
        if not b > a:
            return QuadResult(0.0, 0.0, 0, True)
        return adaptive_quad(integrand, a, b, rtol=rtol, atol=1e-300,
                             breakpoints=u.kinks, min_cells=4)
    if u.N != 2:
        raise NotImplementedError("numerical norms are available for N in {1, 2}")
    R = u.radius
    c = np.asarray(u.center)
    polar_center = polar_radius = None
    if dom.kind == "whole-space":
        if R is None:
            raise ValueError(f"{u.label} has no declared support; integrals over R^N need one")
        polar_center, polar_radius = c, R
    elif dom.kind == "ball":
        if R is not None and dom.contains_ball(c, R):
            polar_center, polar_radius = c, R
        else:
            polar_center, polar_radius = np.asarray(dom.center), dom.radius
            if R is not None:
                pass  # the indicator of the support is carried by the integrand itself
    if polar_center is not None:
        pc, pr = polar_center, polar_radius

        def polar(r, phi):
            pts = np.stack([pc[0] + r * np.cos(phi), pc[1] + r * np.sin(phi)], axis=-1)
            return integrand(pts) * r

        return converged_tensor_integral(polar, (0.0, 0.0), (pr, 2 * math.pi), rtol=rtol,
                                         atol=1e-300, start=2, max_panels=64)
    lo = np.asarray(dom.lo, dtype=float)
    hi = np.asarray(dom.hi, dtype=float)
    if R is not None:
        lo, hi = np.maximum(lo, c - R), np.minimum(hi, c + R)
    if np.any(hi <= lo):
        return QuadResult(0.0, 0.0, 0, True)

    def cart(x, y):
        return integrand(np.stack([x, y], axis=-1))

    return converged_tensor_integral(cart, tuple(lo), tuple(hi), rtol=rtol, atol=1e-300,
                                     start=2, max_panels=64)


# L^p and sup norms -------------------------------------------------------------

def _sample_region(u: TestFunction, dom: ConcreteDomain):
    """Bounding box of where the function lives on ``dom``."""
    if u.N == 1:
        a, b = _support_interval(u, dom)
        return np.array([a]), np.array([b])
    R = u.radius
    c = np.asarray(u.center, dtype=float)
    if dom.kind == "whole-space":
        if R is None:
            raise ValueError(f"{u.label} has no declared support")
        return c - R, c + R
    if dom.kind == "box":
        lo, hi = np.asarray(dom.lo, dtype=float), np.asarray(dom.hi, dtype=float)
    else:
        dc = np.asarray(dom.center, dtype=float)
        lo, hi = dc - dom.radius, dc + dom.radius
    if R is not None:
        lo, hi = np.maximum(lo, c - R), np.minimum(hi, c + R)
    return lo, hi


def _inside(dom: ConcreteDomain, pts: np.ndarray) -> np.ndarray:
    if dom.kind != "ball" or dom.N == 1:
        return np.ones(pts.shape[0], dtype=bool)
    return np.linalg.norm(pts - np.asarray(dom.center), axis=-1) <= dom.radius


def _grid_points(u, dom, per_axis: int):
    lo, hi = _sample_region(u, dom)
    if u.N == 1:
        pts = np.linspace(lo[0], hi[0], per_axis)
        extra = [k for k in u.kinks if lo[0] <= k <= hi[0]]
        extra += [u.center[0]] if lo[0] <= u.center[0] <= hi[0] else []
        return np.unique(np.concatenate([pts, extra])), (hi[0] - lo[0]) / (per_axis - 1)
    axes = [np.linspace(lo[i], hi[i], per_axis) for i in range(2)]
    X, Y = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    pts = pts[_inside(dom, pts)]
    return pts, float(np.max(hi - lo)) / (per_axis - 1)


def _grid_sup(u, dom, fn, per_axis=None, levels: int = 6) -> NormReport:
    """Largest value of ``fn`` on a grid, then zoomed in around the best point."""
    per_axis = per_axis or (4097 if u.N == 1 else 257)
    pts, h = _grid_points(u, dom, per_axis)
    if len(pts) == 0:
        return _report(0.0, 0.0, 0, 0.0, flags=("lower-bound",))
    vals = fn(pts)
    best = int(np.argmax(vals))
    value, x = float(vals[best]), pts[best]
    start = value
    cells = len(pts)
    lo, hi = _sample_region(u, dom)
    for _ in range(levels):
        if u.N == 1:
            local = np.clip(np.linspace(x - h, x + h, 33), lo[0], hi[0])
        else:
            g = np.linspace(-h, h, 17)
            X, Y = np.meshgrid(x[0] + g, x[1] + g, indexing="ij")
            local = np.stack([X.ravel(), Y.ravel()], axis=-1)
            local = np.clip(local, lo, hi)
            local = local[_inside(dom, local)]
        lv = fn(local)
        cells += len(local)
        j = int(np.argmax(lv))
        if lv[j] > value:
            value, x = float(lv[j]), local[j]
        h /= 8
    return _report(value, value - start, cells, 0.0, flags=("lower-bound",))


def lp_norm(u: TestFunction, dom: ConcreteDomain, p, tol: float = 1e-10) -> NormReport:
    p = float(p)
    if p < 1:
        raise ValueError(f"p must lie in [1, inf], got {p}")
    if math.isinf(p):
        rep = _grid_sup(u, dom, lambda x: np.abs(u.evaluate(x)))
        return NormReport(rep.value, rep.error, rep.cells, tol, None, rep.flags)
    res = _integrate(u, dom, lambda x: np.abs(u.evaluate(x)) ** p, rtol=tol / 4)
    val, err = _root(res.value, res.error, p)
    return _report(val, err, res.cells, tol)


def _grad_abs(u: TestFunction, x):
    g = u.grad(x)
    return np.abs(g) if u.N == 1 else np.linalg.norm(g, axis=-1)


def grad_lp_norm(u: TestFunction, dom: ConcreteDomain, p, tol: float = 1e-10) -> NormReport:
    if u.gradient is None:
        raise ValueError(f"{u.label} has no gradient evaluator")
    p = float(p)
    if math.isinf(p):
        rep = _grid_sup(u, dom, lambda x: _grad_abs(u, x))
        return NormReport(rep.value, rep.error, rep.cells, tol, None, rep.flags)
    res = _integrate(u, dom, lambda x: _grad_abs(u, x) ** p, rtol=tol / 4)
    val, err = _root(res.value, res.error, p)
    return _report(val, err, res.cells, tol)


# Hölder seminorm ---------------------------------------------------------------

def _pair_max(xa, ua, xb, ub, s, same: bool):
    """max |u_a - u_b| / |x_a - x_b|^s over all pairs; returns (value, i, j)."""
    best, bi, bj = 0.0, 0, 0
    chunk = max(1, 2_000_000 // max(len(xb), 1))
    for start in range(0, len(xa), chunk):
        xs = xa[start:start + chunk]
        us = ua[start:start + chunk]
        if xs.ndim == 1:
            dist = np.abs(xs[:, None] - xb[None, :])
        else:
            dist = np.linalg.norm(xs[:, None, :] - xb[None, :, :], axis=-1)
        diff = np.abs(us[:, None] - ub[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(dist > 0, diff / dist ** s, 0.0)
        k = int(np.argmax(q))
        i, j = divmod(k, q.shape[1])
        if q[i, j] > best:
            best, bi, bj = float(q[i, j]), start + i, j
    return best, bi, bj


def holder_seminorm(u: TestFunction, dom: ConcreteDomain, s, tol: float = 1e-6) -> NormReport:
    """``sup |u(x)-u(y)| / |x-y|^s`` over a point grid, then refined near the best pair."""
    s = float(s)
    if not 0 < s <= 1:
        raise ValueError(f"Hölder exponent must lie in (0, 1], got {s}")
    if u.N > 2:
        raise NotImplementedError("numerical norms are available for N in {1, 2}")
    per_axis = 2049 if u.N == 1 else 41
    pts, h = _grid_points(u, dom, per_axis)
    if len(pts) < 2:
        return _report(0.0, 0.0, len(pts), tol, flags=("lower-bound",))
    vals = u.evaluate(pts)
    value, i, j = _pair_max(pts, vals, pts, vals, s, True)
    start = value
    xa, xb = pts[i], pts[j]
    cells = len(pts)
    lo, hi = _sample_region(u, dom)
    for _ in range(5):
        if u.N == 1:
            la = np.clip(np.linspace(xa - h, xa + h, 65), lo[0], hi[0])
            lb = np.clip(np.linspace(xb - h, xb + h, 65), lo[0], hi[0])
        else:
            g = np.linspace(-h, h, 9)
            X, Y = np.meshgrid(g, g, indexing="ij")
            off = np.stack([X.ravel(), Y.ravel()], axis=-1)
            la = np.clip(xa + off, lo, hi)
            lb = np.clip(xb + off, lo, hi)
            la, lb = la[_inside(dom, la)], lb[_inside(dom, lb)]
        both = np.concatenate([la, lb])
        ub = u.evaluate(both)
        v, i2, j2 = _pair_max(both, ub, both, ub, s, True)
        cells += len(both)
        if v > value:
            value, xa, xb = v, both[i2], both[j2]
        h /= 4
    return _report(value, value - start, cells, tol, flags=("lower-bound",))


# Gagliardo seminorm -------------------------------------------------------------

GRADIENT_SWITCH = 1e-5  # lags below this fraction of L use the midpoint gradient


def _lag_pieces_1d(u: TestFunction, box, rho: float):
    """Breakpoints of ``x -> |u(x+rho) - u(x)|`` on the set where it can be nonzero."""
    c = u.center[0]
    R = u.radius
    A, B = box
    if R is None:
        lo, hi = A, B - rho
    else:
        lo, hi = max(A, c - R - rho), min(B - rho, c + R)
    if not hi > lo:
        return None
    cuts = {lo, hi}
    marks = list(u.kinks)
    if R is not None:
        marks += [c - R, c + R]
    for k in marks:
        cuts.add(k)
        cuts.add(k - rho)
    if u.even:
        cuts.add(c - rho / 2)
    return np.array(sorted(v for v in cuts if lo <= v <= hi))


def _lag_profile_1d(u: TestFunction, box, rhos: np.ndarray, p: float,
                    panels: int, quotient: bool) -> np.ndarray:
    """``D(rho)`` (or ``D(rho)/rho^p`` when ``quotient``) for each lag in ``rhos``."""
    from soblab.quadrature import gl_rule
    x, w = gl_rule()
    rows_x, rows_w, owners = [], [], []
    for idx, rho in enumerate(rhos):
        cuts = _lag_pieces_1d(u, box, float(rho))
        if cuts is None or len(cuts) < 2:
            continue
        a, b = cuts[:-1], cuts[1:]
        keep = b > a
        a, b = a[keep], b[keep]
        sub = np.linspace(0.0, 1.0, panels + 1)
        pa = (a[:, None] + (b - a)[:, None] * sub[None, :-1]).ravel()
        pb = (a[:, None] + (b - a)[:, None] * sub[None, 1:]).ravel()
        half, mid = 0.5 * (pb - pa), 0.5 * (pb + pa)
        rows_x.append((mid[:, None] + half[:, None] * x[None, :]).ravel())
        rows_w.append((half[:, None] * w[None, :]).ravel())
        owners.append(idx)
    out = np.zeros(len(rhos))
    if not owners:
        return out
    width = max(len(r) for r in rows_x)
    X = np.zeros((len(owners), width))
    W = np.zeros((len(owners), width))
    for k, (rx, rw) in enumerate(zip(rows_x, rows_w)):
        X[k, :len(rx)] = rx
        X[k, len(rx):] = rx[0]
        W[k, :len(rw)] = rw
    lag = np.asarray(rhos, dtype=float)[owners][:, None]
    if quotient:
        scale = (u.radius * 2) if u.radius is not None else (box[1] - box[0])
        floor = GRADIENT_SWITCH * scale
        small = lag[:, 0] < floor
        if u.gradient is None:
            lag = np.maximum(lag, floor)  # no derivative: freeze the quotient below the floor
            small[:] = False
        diff = (u.evaluate(X + lag) - u.evaluate(X)) / np.maximum(lag, TINY)
        if small.any():
            Xs, hs = X[small], np.broadcast_to(lag[small], X[small].shape)
            grad = u.gradient(Xs + 0.5 * hs)
            # Where [x, x+rho] straddles a kink, average u' over the two sides
            # separately; a single midpoint slope would be off by O(1) there.
            for k in u.kinks:
                left = k - Xs
                cross = (left > 0) & (left < hs)
                if cross.any():
                    xa, ha, la = Xs[cross], hs[cross], left[cross]
                    grad[cross] = (u.gradient(xa + 0.5 * la) * la
                                   + u.gradient(k + 0.5 * (ha - la)) * (ha - la)) / ha
            diff[small] = grad
    else:
        diff = u.evaluate(X + lag) - u.evaluate(X)
    out[owners] = np.sum(np.abs(diff) ** p * W, axis=1)
    return out


def _lag_box_2d(u: TestFunction, dom: ConcreteDomain, vec: np.ndarray):
    """Per-lag integration boxes in 2-D; ``vec`` has shape (n, 2)."""
    n = vec.shape[0]
    if dom.kind == "whole-space":
        R = u.radius
        c = np.asarray(u.center)
        lo = np.minimum(c - R, c - R - vec)
        hi = np.maximum(c + R, c + R - vec)
        return lo, hi
    A, B = np.asarray(dom.lo), np.asarray(dom.hi)
    lo = np.maximum(A, A - vec)
    hi = np.minimum(B, B - vec)
    if u.support_radius is not None:
        c = np.asarray(u.center)
        R = u.support_radius
        lo = np.maximum(lo, np.minimum(c - R, c - R - vec))
        hi = np.minimum(hi, np.maximum(c + R, c + R - vec))
    return lo.reshape(n, 2), hi.reshape(n, 2)


def _lag_profile_2d(u: TestFunction, dom: ConcreteDomain, e: np.ndarray, rhos: np.ndarray,
                    p: float, panels: int) -> np.ndarray:
    """``D(rho e)/rho^p`` for each lag length, using a composite tensor rule."""
    vec = rhos[:, None] * e[None, :]
    lo, hi = _lag_box_2d(u, dom, vec)
    t, wt = composite_nodes(0.0, 1.0, panels)
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    W = np.outer(wt, wt).ravel()
    span = np.clip(hi - lo, 0.0, None)
    X = lo[:, None, :] + span[:, None, :] * np.stack([T1.ravel(), T2.ravel()], axis=-1)[None]
    floor = GRADIENT_SWITCH * 2 * (u.radius or 1.0)
    small = rhos < floor
    if u.gradient is None:
        rhos = np.maximum(rhos, floor)
        vec = rhos[:, None] * e[None, :]
        small[:] = False
    lag = vec[:, None, :]
    q = (u.evaluate(X + lag) - u.evaluate(X)) / np.maximum(rhos, TINY)[:, None]
    if small.any():
        q[small] = u.gradient(X[small] + 0.5 * lag[small]) @ e
    area = span[:, 0] * span[:, 1]
    return area * (np.abs(q) ** p @ W)


def _lag_profile_chords(u: TestFunction, e: np.ndarray, rhos: np.ndarray, p: float,
                        panels: int) -> np.ndarray:
    """``D(rho e)/rho^p`` over R^2, integrating along lines parallel to ``e``.

    The line at offset ``b`` from the centre meets the support disc in the
    chord ``|a| < w(b)``; the integrand in ``a`` is split where either copy of
    the chord starts or ends, and ``b = R sin t`` absorbs the square root in
    ``w``.
    """
    R = u.support_radius
    c = np.asarray(u.center, dtype=float)
    perp = np.array([-e[1], e[0]])
    t, wt = composite_nodes(-0.5 * math.pi, 0.5 * math.pi, panels)
    b = R * np.sin(t)
    wb = R * np.cos(t) * wt
    w = np.sqrt(np.clip(R * R - b * b, 0.0, None))
    gx, gw = composite_nodes(0.0, 1.0, panels)
    rhos = np.asarray(rhos, dtype=float)
    floor = GRADIENT_SWITCH * 2 * R
    small = rhos < floor
    if u.gradient is None:
        rhos = np.maximum(rhos, floor)
        small[:] = False
    rho = rhos[:, None, None]
    W = w[None, :, None]
    # Sorted cut points of [-w - rho, w] for each (rho, b).
    pts = np.concatenate([np.broadcast_to(-W - rho, (len(rhos), len(b), 1)),
                          np.broadcast_to(-W, (len(rhos), len(b), 1)),
                          np.broadcast_to(W - rho, (len(rhos), len(b), 1)),
                          np.broadcast_to(-0.5 * rho, (len(rhos), len(b), 1)),
                          np.broadcast_to(W + 0 * rho, (len(rhos), len(b), 1))], axis=-1)
    pts = np.sort(pts, axis=-1)
    lo, hi = pts[..., :-1], pts[..., 1:]
    A = lo[..., None] + (hi - lo)[..., None] * gx             # (n_rho, n_b, 4, m)
    WA = (hi - lo)[..., None] * gw
    X = (c + A[..., None] * e + b[None, :, None, None, None] * perp)
    lag = rhos[:, None, None, None, None] * e
    if small.any():
        diff = np.empty(A.shape)
        big = ~small
        diff[big] = (u.evaluate(X[big] + lag[big]) - u.evaluate(X[big])) / rhos[big, None, None, None]
        diff[small] = u.gradient(X[small] + 0.5 * lag[small]) @ e
    else:
        diff = (u.evaluate(X + lag) - u.evaluate(X)) / rhos[:, None, None, None]
    inner = np.sum(np.abs(diff) ** p * WA, axis=(-2, -1))    # (n_rho, n_b)
    return inner @ wb


@dataclass
class _Radial:
    value: float = 0.0
    error: float = 0.0
    cells: int = 0
    converged: bool = True


def _radial_integral(profile, L: float, beta: float, rtol: float, rho_breaks=()) -> _Radial:
    """``∫_0^L rho^(beta-1) G(rho) drho`` through ``rho = L w^(1/beta)``.

    ``profile(rhos, panels)`` returns ``G``; its inner panel count is doubled
    until two passes agree at the outer node set.
    """
    inv = 1.0 / beta
    state = {"panels": 4, "inner_err": 0.0}

    def f(ws):
        rhos = L * np.power(ws, inv)
        while True:
            a = profile(rhos, state["panels"])
            b = profile(rhos, 2 * state["panels"])
            scale = max(float(np.max(np.abs(b))), TINY)
            gap = float(np.max(np.abs(a - b)))
            if gap <= rtol * scale or state["panels"] >= 64:
                # Each batch is judged against its own peak, so the gap is
                # charged as a relative error of the whole integral.
                state["inner_err"] = max(state["inner_err"], gap / scale)
                return b
            state["panels"] *= 2

    wbreaks = [(r / L) ** beta for r in rho_breaks if 0 < r < L]
    res = adaptive_quad(f, 0.0, 1.0, rtol=rtol, atol=1e-300, breakpoints=wbreaks,
                        min_cells=4, max_cells=2000)
    factor = L ** beta / beta
    err = res.error + state["inner_err"] * abs(res.value)
    return _Radial(factor * res.value, factor * err, res.cells * state["panels"], res.converged)


def _lag_breaks_1d(u: TestFunction, box) -> list:
    marks = list(u.kinks)
    if u.radius is not None:
        c = u.center[0]
        marks += [c - u.radius, c + u.radius]
    marks += [v for v in box if math.isfinite(v)]
    return sorted({abs(a - b) for a in marks for b in marks if a != b})


def _seminorm_integral_1d(u, dom, s, p, rtol) -> _Radial:
    dom = dom.as_box()
    beta = p * (1 - s)
    if dom.kind == "whole-space":
        if u.radius is None:
            raise ValueError(f"{u.label} has no declared support; integrals over R^N need one")
        box = (-math.inf, math.inf)
        L = 2 * u.radius
    else:
        box = (dom.lo[0], dom.hi[0])
        L = box[1] - box[0]

    def profile(rhos, panels):
        return _lag_profile_1d(u, box, rhos, p, panels, quotient=True)

    core = _radial_integral(profile, L, beta, rtol / 4, _lag_breaks_1d(u, box))
    value, error = 2 * core.value, 2 * core.error
    if dom.kind == "whole-space":
        mass = _integrate(u, dom, lambda x: np.abs(u.evaluate(x)) ** p, rtol=rtol / 4)
        tail = 2 * mass.value * L ** (-s * p) / (s * p)
        value += 2 * tail
        error += 2 * tail * mass.error / max(mass.value, TINY)
    return _Radial(value, error, core.cells, core.converged)


def _direction_integral_2d(u, dom, e, s, p, rtol) -> _Radial:
    beta = p * (1 - s)
    if dom.kind == "whole-space":
        L = 2 * u.radius
    else:
        widths = np.asarray(dom.hi) - np.asarray(dom.lo)
        with np.errstate(divide="ignore"):
            L = float(np.min(np.where(np.abs(e) > 1e-15, widths / np.abs(e), np.inf)))
    breaks = [2 * u.support_radius] if (dom.kind == "box" and u.support_radius) else []

    def profile(rhos, panels):
        if dom.kind == "whole-space" and u.support_radius is not None:
            return _lag_profile_chords(u, e, rhos, p, max(2, panels // 2))
        return _lag_profile_2d(u, dom, e, rhos, p, max(2, panels // 2))

    core = _radial_integral(profile, L, beta, rtol / 4, breaks)
    if dom.kind == "whole-space":
        mass = _integrate(u, dom, lambda x: np.abs(u.evaluate(x)) ** p, rtol=rtol / 4)
        tail = 2 * mass.value * L ** (-s * p) / (s * p)
        return _Radial(core.value + tail, core.error + tail * mass.error / max(mass.value, TINY),
                       core.cells, core.converged)
    return core


def _seminorm_integral_2d(u, dom, s, p, rtol) -> _Radial:
    if dom.kind == "whole-space" and u.radius is None:
        raise ValueError(f"{u.label} has no declared support; integrals over R^N need one")
    supported_inside = (u.support_radius is not None and dom.bounded
                        and dom.contains_ball(u.center, u.support_radius))
    if supported_inside:
        return _complement_seminorm_integral(u, dom, s, p, rtol)
    if dom.kind == "ball":
        raise NotImplementedError("2-D ball domains need the function supported inside the ball")
    if u.even and dom.kind == "whole-space":
        d = _direction_integral_2d(u, dom, np.array([1.0, 0.0]), s, p, rtol)
        return _Radial(2 * math.pi * d.value, 2 * math.pi * d.error, d.cells, d.converged)
    # Integrate over directions in [0, pi); D(h) = D(-h) doubles it.
    if dom.kind == "whole-space":
        return _periodic_direction_sum(u, dom, s, p, rtol)
    cuts = [0.0, math.pi]
    if dom.kind == "box":
        w = np.asarray(dom.hi) - np.asarray(dom.lo)
        corner = math.atan2(w[1], w[0])
        cuts = [0.0, corner, math.pi / 2, math.pi - corner, math.pi]
    cuts = sorted(set(cuts))
    panels, prev = 1, None
    cells = 0
    while True:
        total, err = 0.0, 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            phis, wts = composite_nodes(a, b, panels, order=8)
            for phi, wt in zip(phis, wts):
                d = _direction_integral_2d(u, dom, np.array([math.cos(phi), math.sin(phi)]),
                                           s, p, rtol)
                total += 2 * wt * d.value
                err += 2 * wt * d.error
                cells += d.cells
        if prev is not None:
            gap = abs(total - prev)
            if gap <= rtol * abs(total) or panels >= 4:
                return _Radial(total, err + gap, cells, gap <= rtol * abs(total))
        prev = total
        panels *= 2


def _periodic_direction_sum(u, dom, s, p, rtol, max_directions: int = 128) -> _Radial:
    """Nested trapezoid rule in the direction angle; exact for trigonometric
    polynomials, so a smooth periodic profile converges geometrically."""
    cache: dict = {}

    def J(k, m):
        key = Fraction(k, m)
        if key not in cache:
            phi = math.pi * k / m
            cache[key] = _direction_integral_2d(u, dom, np.array([math.cos(phi), math.sin(phi)]),
                                                s, p, rtol)
        return cache[key]

    m, prev = 4, None
    while True:
        parts = [J(k, m) for k in range(m)]
        total = 2 * math.pi / m * math.fsum(d.value for d in parts)
        err = 2 * math.pi / m * math.fsum(d.error for d in parts)
        if prev is not None:
            gap = abs(total - prev)
            done = gap <= rtol * abs(total)
            if done or 2 * m > max_directions:
                cells = sum(d.cells for d in cache.values())
                return _Radial(total, err + gap, cells, done)
        prev = total
        m *= 2


def _ball_exit_weight(dom, x, sp):
    dc = np.asarray(dom.center)
    phis = np.linspace(0.0, 2 * math.pi, 257)[:-1]
    E = np.stack([np.cos(phis), np.sin(phis)], axis=-1)
    off = x - dc
    proj = off @ E.T
    disc = dom.radius ** 2 - np.sum(off * off, axis=-1)[..., None] + proj ** 2
    dist = np.maximum(-proj + np.sqrt(np.clip(disc, 0.0, None)), 1e-300)
    return np.mean(dist ** (-sp), axis=-1) * 2 * math.pi / sp


def _box_exit_weight(dom, x, sp):
    # Between consecutive corner directions the ray leaves through one wall,
    # where dist = h / cos(phi - normal); each sector gets its own GL rule.
    lo, hi = np.asarray(dom.lo, float), np.asarray(dom.hi, float)
    corners = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
    walls = ((-math.pi / 2, x[..., 1] - lo[1]), (0.0, hi[0] - x[..., 0]),
             (math.pi / 2, hi[1] - x[..., 1]), (math.pi, x[..., 0] - lo[0]))
    gx, gw = gl_rule(16)
    total = np.zeros(x.shape[:-1])
    for k, (normal, h) in enumerate(walls):
        a = corners[k] - x
        b = corners[(k + 1) % 4] - x
        start = np.arctan2(a[..., 1], a[..., 0])
        span = np.mod(np.arctan2(b[..., 1], b[..., 0]) - start, 2 * math.pi)
        phi = start[..., None] + 0.5 * span[..., None] * (gx + 1.0)
        cosine = np.clip(np.cos(phi - normal), 0.0, None)
        vals = (cosine / np.maximum(h, 1e-300)[..., None]) ** sp
        total += 0.5 * span * (vals @ gw)
    return total / sp


def _complement_seminorm_integral(u, dom, s, p, rtol) -> _Radial:
    """Bounded 2-D domains: the R^2 integral minus the pairs that leave the domain.

    For u supported inside the domain the lost pairs are |u(x)|^p |x-y|^(-2-sp)
    with y outside, which integrate in y to |u(x)|^p T(x), T the exit weight.
    """
    whole = _seminorm_integral_2d(u, WholeSpace(2), s, p, rtol)
    exit_weight = _ball_exit_weight if dom.kind == "ball" else _box_exit_weight
    sp = s * p
    lost = _integrate(u, WholeSpace(2),
                      lambda x: np.abs(u.evaluate(x)) ** p * exit_weight(dom, x, sp),
                      rtol=rtol / 4)
    value = whole.value - 2 * lost.value
    return _Radial(value, whole.error + 2 * lost.error, whole.cells + lost.cells,
                   whole.converged and lost.converged)


def gagliardo_integral(u: TestFunction, dom: ConcreteDomain, s, p, tol: float = 1e-8):
    """The unnormalised double integral, with error estimate and cell count."""
    s, p = float(s), float(p)
    if not 0 < s < 1:
        raise ValueError(f"the Gagliardo seminorm needs s in (0, 1), got {s}")
    if not 1 <= p < math.inf:
        raise ValueError(f"the Gagliardo seminorm needs p in [1, inf), got {p}")
    if u.N != dom.N:
        raise ValueError(f"dimension mismatch: function N={u.N}, domain N={dom.N}")
    if u.N == 1:
        return _seminorm_integral_1d(u, dom, s, p, tol)
    if u.N == 2:
        return _seminorm_integral_2d(u, dom, s, p, tol)
    raise NotImplementedError("unsupported: the Gagliardo quadrature covers N in {1, 2}")


def gagliardo_seminorm(u: TestFunction, dom: ConcreteDomain, s, p,
                       tol: float = 1e-8) -> NormReport:
    """``(c_{N,s,p} ∬ |u(x)-u(y)|^p / |x-y|^(N+sp))^(1/p)``; ``tol`` is relative."""
    res = gagliardo_integral(u, dom, s, p, tol)
    c = normalizing_constant(u.N, s, p)
    val, err = _root(c * res.value, c * res.error, float(p))
    return _report(val, err, res.cells, tol, constant=c)


# Full norm ------------------------------------------------------------------------

def full_norm(u: TestFunction, dom: ConcreteDomain, idx, tol: float = 1e-8) -> NormReport:
    """Norm of ``W^{s,p}`` for ``idx = (N, s, p)``; ``p = inf`` means ``C^{0,s}``."""
    s, p = float(idx.s), float(idx.p)
    if idx.N != u.N:
        raise ValueError(f"dimension mismatch: index N={idx.N}, function N={u.N}")
    if s == 0:
        return lp_norm(u, dom, p, tol)
    if math.isinf(p):
        sup = lp_norm(u, dom, math.inf, tol)
        hol = holder_seminorm(u, dom, s, tol)
        return _report(sup.value + hol.value, sup.error + hol.error, sup.cells + hol.cells,
                       tol, None, ("lower-bound",))
    base = lp_norm(u, dom, p, tol)
    if s == 1:
        semi = grad_lp_norm(u, dom, p, tol)
        const = None
    else:
        semi = gagliardo_seminorm(u, dom, s, p, tol)
        const = semi.constant
    total = semi.value ** p + base.value ** p
    err = p * (semi.value ** (p - 1) * semi.error + base.value ** (p - 1) * base.error)
    val, verr = _root(total, err, p)
    return _report(val, verr, semi.cells + base.cells, tol, const)


# BMO ------------------------------------------------------------------------------

def default_ball_family(u: TestFunction, dom: ConcreteDomain) -> list:
    """Balls at several centres and radii around the function's support."""
    if u.N != 1:
        raise NotImplementedError("the BMO double integral is implemented for N = 1")
    R = u.radius if u.radius is not None else 1.0
    c = u.center[0]
    family = []
    for k in (-2, -1, 0, 1, 2):
        for scale in (0.125, 0.25, 0.5, 1.0, 2.0, 4.0):
            ball = (c + 0.5 * k * R, scale * R)
            if dom.contains_ball(ball[0], ball[1]):
                family.append(ball)
    if dom.bounded:
        d = dom.as_box()
        family.append(((d.lo[0] + d.hi[0]) / 2, (d.hi[0] - d.lo[0]) / 2))
    return sorted(set(family))


def mean_oscillation(u: TestFunction, center: float, radius: float, tol: float = 1e-8) -> QuadResult:
    """``|B|^-2 ∬_{B×B} |u(y) - u(z)| dy dz`` for the interval ``B = [c-r, c+r]``."""
    box = (center - radius, center + radius)
    L = 2 * radius

    def f(hs):
        return _lag_profile_1d(u, box, hs, 1.0, 8, quotient=False)

    res = adaptive_quad(f, 0.0, L, rtol=tol, atol=1e-300, breakpoints=_lag_breaks_1d(u, box),
                        min_cells=4)
    scale = 2.0 / (L * L)
    return QuadResult(scale * res.value, scale * res.error, res.cells, res.converged)


def bmo_norm(u: TestFunction, dom: ConcreteDomain, balls=None, tol: float = 1e-8) -> NormReport:
    """Largest mean oscillation over a finite family of balls (a lower bound for the BMO norm)."""
    if u.N != 1:
        raise NotImplementedError("the BMO double integral is implemented for N = 1")
    balls = default_ball_family(u, dom) if balls is None else list(balls)
    if not balls:
        raise ValueError("the ball family is empty")
    best = QuadResult(0.0, 0.0, 0, True)
    cells = 0
    for c, r in balls:
        c = float(np.atleast_1d(c)[0])
        if not dom.contains_ball(c, r):
            raise ValueError(f"ball ({c}, {r}) is not inside the domain")
        m = mean_oscillation(u, c, float(r), tol)
        cells += m.cells
        if m.value > best.value:
            best = m
    return _report(best.value, best.error, cells, tol, flags=("lower-bound",))
