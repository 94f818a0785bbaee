"""Analytic test functions and the rescalings used by the scaling arguments.

Evaluators take ``x`` of shape ``(...)`` when ``N = 1`` and ``(..., N)``
otherwise, and return arrays of shape ``(...)``.  Gradients return the same
shape as ``x``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar


@dataclass(frozen=True)
class TestFunction:
    """An evaluable function with the metadata the norm engine relies on.

    ``support_radius`` is the radius of a ball around ``center`` outside of
    which the function vanishes (``None`` when unbounded).
    ``effective_radius`` is a truncation radius for functions such as the
    Gaussian whose tails are below double precision.  ``kinks`` lists, in 1-D,
    the points where the derivative jumps.  ``even`` means symmetric about the
    centre (radial in 2-D).  ``lp_exact(p)`` and ``grad_lp_exact(p)`` return
    closed-form norms when known.
    """

    __test__ = False  # keep pytest from collecting this class

    N: int
    evaluate: Callable
    gradient: Optional[Callable]
    label: str
    family: str
    center: tuple = ()
    support_radius: Optional[float] = None
    effective_radius: Optional[float] = None
    lipschitz_constant: Optional[float] = None
    sup_norm: Optional[float] = None
    kinks: tuple = ()
    even: bool = False
    params: dict = field(default_factory=dict)
    lp_exact: Optional[Callable] = None
    grad_lp_exact: Optional[Callable] = None

    def __post_init__(self):
        if not self.center:
            object.__setattr__(self, "center", (0.0,) * self.N)

    def __call__(self, x):
        return self.evaluate(np.asarray(x, dtype=float))

    @property
    def radius(self) -> Optional[float]:
        """Radius of the region that carries all of the function's mass."""
        return self.support_radius if self.support_radius is not None else self.effective_radius

    def grad(self, x):
        if self.gradient is None:
            raise ValueError(f"{self.label} has no gradient evaluator")
        return self.gradient(np.asarray(x, dtype=float))


def _radius_sq(x: np.ndarray, N: int, center) -> np.ndarray:
    if N == 1:
        return (x - center[0]) ** 2
    return np.sum((x - np.asarray(center)) ** 2, axis=-1)


def _offset(x: np.ndarray, N: int, center) -> np.ndarray:
    if N == 1:
        return x - center[0]
    return x - np.asarray(center)


def _check_positive(**kw):
    for name, val in kw.items():
        if not val > 0:
            raise ValueError(f"{name} must be positive, got {val!r}")


def _bump_profile_slope() -> float:
    """max |d/dr exp(1 - 1/(1-r^2))| on (0, 1)."""
    def neg_slope(r):
        t = 1.0 - r * r
        return -2.0 * r * math.exp(1.0 - 1.0 / t) / (t * t)
    res = minimize_scalar(neg_slope, bounds=(1e-6, 1 - 1e-6), method="bounded",
                          options={"xatol": 1e-12})
    return -res.fun


_BUMP_SLOPE = _bump_profile_slope()


def make_bump(N: int, radius: float = 1.0, center=None) -> TestFunction:
    """``exp(1 - 1/(1 - |x/R|^2))`` inside ``B_R``, zero outside; peak value 1."""
    _check_positive(radius=radius)
    c = tuple(float(v) for v in (center if center is not None else (0.0,) * N))
    R2 = radius * radius

    def value(x):
        t = _radius_sq(x, N, c) / R2
        inside = t < 1.0
        safe = np.where(inside, 1.0 - t, 1.0)
        return np.where(inside, np.exp(1.0 - 1.0 / safe), 0.0)

    def gradient(x):
        t = _radius_sq(x, N, c) / R2
        inside = t < 1.0
        safe = np.where(inside, 1.0 - t, 1.0)
        factor = np.where(inside, -2.0 * np.exp(1.0 - 1.0 / safe) / (R2 * safe * safe), 0.0)
        off = _offset(x, N, c)
        return factor * off if N == 1 else factor[..., None] * off

    return TestFunction(N, value, gradient, label=f"bump(N={N},R={radius:g})", family="bump",
                        center=c, support_radius=float(radius),
                        lipschitz_constant=_BUMP_SLOPE / radius, sup_norm=1.0, even=True,
                        params={"N": N, "radius": radius})


def make_tent(radius: float = 1.0, center: float = 0.0) -> TestFunction:
    """The 1-D hat ``max(0, 1 - |x - c|/R)``."""
    _check_positive(radius=radius)
    c = float(center)

    def value(x):
        return np.maximum(0.0, 1.0 - np.abs(x - c) / radius)

    def gradient(x):
        d = x - c
        inside = np.abs(d) < radius
        return np.where(inside, -np.sign(d) / radius, 0.0)

    def lp(p):
        if math.isinf(p):
            return 1.0
        return (2.0 * radius / (p + 1.0)) ** (1.0 / p)

    def grad_lp(p):
        if math.isinf(p):
            return 1.0 / radius
        return (2.0 * radius) ** (1.0 / p) / radius

    return TestFunction(1, value, gradient, label=f"tent(R={radius:g})", family="tent",
                        center=(c,), support_radius=float(radius),
                        lipschitz_constant=1.0 / radius, sup_norm=1.0,
                        kinks=(c - radius, c, c + radius), even=True,
                        params={"radius": radius}, lp_exact=lp, grad_lp_exact=grad_lp)


def make_gaussian(N: int, sigma: float = 1.0) -> TestFunction:
    """``exp(-|x|^2 / (2 sigma^2))``; its tail past ``9.2 sigma`` is below 1e-18."""
    _check_positive(sigma=sigma)
    s2 = sigma * sigma
    sphere = 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)

    def value(x):
        return np.exp(-_radius_sq(x, N, (0.0,) * N) / (2 * s2))

    def gradient(x):
        g = -value(x) / s2
        return g * x if N == 1 else g[..., None] * x

    def lp(p):
        if math.isinf(p):
            return 1.0
        return (2 * math.pi * s2 / p) ** (N / (2 * p))

    def grad_lp(p):
        if math.isinf(p):
            return math.exp(-0.5) / sigma
        integral = (sphere * 0.5 * math.gamma((p + N) / 2)
                    * (2 * s2 / p) ** ((p + N) / 2) / s2 ** p)
        return integral ** (1.0 / p)

    return TestFunction(N, value, gradient, label=f"gaussian(N={N},sigma={sigma:g})",
                        family="gaussian", effective_radius=sigma * math.sqrt(2 * 42.0),
                        lipschitz_constant=math.exp(-0.5) / sigma, sup_norm=1.0, even=True,
                        params={"N": N, "sigma": sigma}, lp_exact=lp, grad_lp_exact=grad_lp)


def make_oscillatory(N: int, k: float = 4.0, radius: float = 1.0) -> TestFunction:
    """Bump times ``cos(k x_1)``."""
    _check_positive(k=k, radius=radius)
    bump = make_bump(N, radius)

    def phase(x):
        return k * (x if N == 1 else x[..., 0])

    def value(x):
        return bump.evaluate(x) * np.cos(phase(x))

    def gradient(x):
        g = bump.gradient(x) * (np.cos(phase(x)) if N == 1 else np.cos(phase(x))[..., None])
        extra = -k * bump.evaluate(x) * np.sin(phase(x))
        if N == 1:
            return g + extra
        g = g.copy()
        g[..., 0] += extra
        return g

    return TestFunction(N, value, gradient, label=f"oscillatory(N={N},k={k:g},R={radius:g})",
                        family="oscillatory", support_radius=float(radius),
                        lipschitz_constant=bump.lipschitz_constant + k, sup_norm=1.0,
                        even=(N == 1), params={"N": N, "k": k, "radius": radius})


def make_constant(N: int, value: float = 1.0) -> TestFunction:
    """A constant; only meaningful on bounded domains."""
    v = float(value)

    def evaluate(x):
        shape = x.shape if N == 1 else x.shape[:-1]
        return np.full(shape, v)

    def gradient(x):
        return np.zeros_like(x)

    return TestFunction(N, evaluate, gradient, label=f"constant({v:g})", family="constant",
                        lipschitz_constant=0.0, sup_norm=abs(v), params={"N": N, "value": v})


def make_linear(slope: float = 1.0) -> TestFunction:
    """``x -> slope * x`` on the line; only meaningful on bounded domains."""
    a = float(slope)
    return TestFunction(1, lambda x: a * x, lambda x: np.full_like(x, a),
                        label=f"linear({a:g})", family="linear",
                        lipschitz_constant=abs(a), params={"slope": a})


def multiply(u: TestFunction, factor: float) -> TestFunction:
    """``factor * u`` with metadata carried along."""
    lam = float(factor)
    grad = None if u.gradient is None else (lambda x: lam * u.gradient(x))

    def scaled(norm):
        return None if norm is None else (lambda p: abs(lam) * norm(p))

    return replace(u, evaluate=lambda x: lam * u.evaluate(x), gradient=grad,
                   label=f"{lam:g}*{u.label}",
                   lipschitz_constant=None if u.lipschitz_constant is None else abs(lam) * u.lipschitz_constant,
                   sup_norm=None if u.sup_norm is None else abs(lam) * u.sup_norm,
                   lp_exact=scaled(u.lp_exact), grad_lp_exact=scaled(u.grad_lp_exact))


def add(u: TestFunction, v: TestFunction) -> TestFunction:
    """Pointwise sum of two functions sharing a dimension."""
    if u.N != v.N:
        raise ValueError("dimension mismatch")
    grad = None
    if u.gradient is not None and v.gradient is not None:
        grad = lambda x: u.gradient(x) + v.gradient(x)  # noqa: E731
    radius = None
    if u.radius is not None and v.radius is not None:
        far = max(np.linalg.norm(np.subtract(u.center, v.center)) + v.radius, u.radius)
        radius = float(far)
    compact = u.support_radius is not None and v.support_radius is not None
    lips = None
    if u.lipschitz_constant is not None and v.lipschitz_constant is not None:
        lips = u.lipschitz_constant + v.lipschitz_constant
    return TestFunction(u.N, lambda x: u.evaluate(x) + v.evaluate(x), grad,
                        label=f"{u.label}+{v.label}", family="sum", center=u.center,
                        support_radius=radius if compact else None,
                        effective_radius=None if compact else radius,
                        lipschitz_constant=lips, kinks=tuple(sorted(set(u.kinks) | set(v.kinks))))


# Rescaling -------------------------------------------------------------------

WHOLE_SPACE = "whole-space"
BOUNDED_TRANSLATE = "bounded-translate"


@dataclass(frozen=True)
class ScalingSpec:
    """Parameters of ``eps^gamma u(eps^beta x)`` or ``eps^gamma u(x0 + (x - x0)/eps)``.

    The second form, ``bounded-translate``, shrinks the support ball of ``u``
    around its own centre ``x0`` and ignores ``beta``.
    """

    gamma: float
    beta: float
    epsilon: float
    center: tuple = ()
    variant: str = WHOLE_SPACE

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon!r}")
        if self.variant not in (WHOLE_SPACE, BOUNDED_TRANSLATE):
            raise ValueError(f"unknown scaling variant {self.variant!r}")


def scale_function(u: TestFunction, spec: ScalingSpec) -> TestFunction:
    eps, gam = float(spec.epsilon), float(spec.gamma)
    amp = eps ** gam
    N = u.N

    if spec.variant == WHOLE_SPACE:
        beta = float(spec.beta)
        k = eps ** beta
        center = tuple(c / k for c in u.center)

        def value(x):
            return amp * u.evaluate(k * x)

        grad = None if u.gradient is None else (lambda x: amp * k * u.gradient(k * x))

        def lp(p):
            return amp * (1.0 if math.isinf(p) else k ** (-N / p)) * u.lp_exact(p)

        def grad_lp(p):
            return amp * k * (1.0 if math.isinf(p) else k ** (-N / p)) * u.grad_lp_exact(p)

        label = f"{u.label}|eps={eps:g},gamma={gam:g},beta={beta:g}"
        stretch = 1.0 / k
        kinks = tuple(c / k for c in u.kinks)
    else:
        if u.support_radius is None:
            raise ValueError(f"{u.label} is not compactly supported; bounded-translate needs a support ball")
        x0 = tuple(float(c) for c in (spec.center or u.center))
        if not np.allclose(x0, u.center, rtol=0, atol=1e-14):
            raise ValueError(f"{u.label} must be supported in a ball centred at {x0}")
        c0 = np.asarray(x0) if N > 1 else x0[0]

        def value(x):
            return amp * u.evaluate(c0 + (x - c0) / eps)

        grad = None if u.gradient is None else (
            lambda x: amp / eps * u.gradient(c0 + (x - c0) / eps))

        def lp(p):
            return amp * (1.0 if math.isinf(p) else eps ** (N / p)) * u.lp_exact(p)

        def grad_lp(p):
            return amp / eps * (1.0 if math.isinf(p) else eps ** (N / p)) * u.grad_lp_exact(p)

        label = f"{u.label}|eps={eps:g},gamma={gam:g},x0={x0}"
        center = x0
        stretch = eps
        kinks = tuple(x0[0] + (c - x0[0]) * eps for c in u.kinks)

    rate = stretch ** -1  # derivative factor from the change of variables
    return replace(
        u, evaluate=value, gradient=grad, label=label, center=center,
        support_radius=None if u.support_radius is None else u.support_radius * stretch,
        effective_radius=None if u.effective_radius is None else u.effective_radius * stretch,
        lipschitz_constant=None if u.lipschitz_constant is None else amp * rate * u.lipschitz_constant,
        sup_norm=None if u.sup_norm is None else amp * u.sup_norm,
        kinks=kinks,
        lp_exact=None if u.lp_exact is None else lp,
        grad_lp_exact=None if u.grad_lp_exact is None else grad_lp,
    )


# Corpus ------------------------------------------------------------------------

FAMILIES = {
    "bump": lambda prm: make_bump(int(prm.get("N", 1)), float(prm.get("radius", 1.0))),
    "tent": lambda prm: make_tent(float(prm.get("radius", 1.0)), float(prm.get("center", 0.0))),
    "gaussian": lambda prm: make_gaussian(int(prm.get("N", 1)), float(prm.get("sigma", 1.0))),
    "oscillatory": lambda prm: make_oscillatory(int(prm.get("N", 1)), float(prm.get("k", 4.0)),
                                                float(prm.get("radius", 1.0))),
    "constant": lambda prm: make_constant(int(prm.get("N", 1)), float(prm.get("value", 1.0))),
    "linear": lambda prm: make_linear(float(prm.get("slope", 1.0))),
}

DEFAULT_MANIFEST = (
    {"label": "bump", "family": "bump", "parameters": {"N": 1, "radius": 1.0}},
    {"label": "tent", "family": "tent", "parameters": {"radius": 1.0}},
    {"label": "gaussian", "family": "gaussian", "parameters": {"N": 1, "sigma": 1.0}},
    {"label": "oscillatory", "family": "oscillatory", "parameters": {"N": 1, "k": 4.0, "radius": 1.0}},
    {"label": "bump-2d", "family": "bump", "parameters": {"N": 2, "radius": 1.0}},
    {"label": "gaussian-2d", "family": "gaussian", "parameters": {"N": 2, "sigma": 1.0}},
)


class UnknownLabel(KeyError):
    pass


def build_corpus(manifest=DEFAULT_MANIFEST) -> dict:
    """Instantiate a manifest (list of ``{label, family, parameters}``) keyed by label."""
    corpus = {}
    for entry in manifest:
        family = entry["family"]
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}")
        fn = FAMILIES[family](dict(entry.get("parameters", {})))
        corpus[entry["label"]] = replace(fn, label=entry["label"])
    return corpus


def load_manifest(path) -> list:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise ValueError("a corpus manifest is a JSON list")
    for entry in data:
        if not {"label", "family"} <= set(entry):
            raise ValueError(f"manifest entry {entry!r} needs label and family")
    return data


def lookup(label: str, manifest=DEFAULT_MANIFEST) -> TestFunction:
    corpus = build_corpus(manifest)
    try:
        return corpus[label]
    except KeyError:
        raise UnknownLabel(label) from None
