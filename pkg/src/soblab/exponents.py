"""Exact arithmetic over Sobolev indices and the embedding classifier.

Every index is stored as a :class:`fractions.Fraction` and ``p = inf`` is the
float ``math.inf``.  Comparisons against curves are done in reciprocal
coordinates ``r = 1/p`` so that ``p = inf`` is simply ``r = 0`` and no
boundary verdict ever depends on float rounding.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Union

INF = math.inf

Exact = Union[Fraction, float]  # float only ever means INF


def to_exact(value) -> Exact:
    """Coerce ``value`` to a Fraction, or to ``INF``.

    Strings may be ``"inf"``, integers, decimals or ``"a/b"``.  Floats are read
    through their shortest decimal repr, so ``0.1`` becomes ``1/10``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not indices")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if math.isnan(value):
            raise ValueError("nan is not an index")
        if math.isinf(value):
            if value < 0:
                raise ValueError("-inf is not an index")
            return INF
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip().lower()
        if text in {"inf", "+inf", "infinity", "+infinity", "oo"}:
            return INF
        try:
            return Fraction(text)
        except ValueError as exc:
            raise ValueError(f"cannot read {value!r} as a number") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to an exact number")


def recip(p: Exact) -> Fraction:
    """``1/p`` with ``1/inf = 0``."""
    if p == INF:
        return Fraction(0)
    return 1 / Fraction(p)


def from_recip(r: Fraction) -> Exact:
    """Inverse of :func:`recip`."""
    if r == 0:
        return INF
    return 1 / r


def format_exact(x: Exact) -> str:
    if x == INF:
        return "inf"
    return str(x)


@dataclass(frozen=True)
class SobolevIndex:
    """A triple ``(N, s, p)`` naming the space ``W^{s,p}`` in dimension ``N``."""

    N: int
    s: Fraction
    p: Exact

    def __post_init__(self):
        if isinstance(self.N, bool) or not isinstance(self.N, int) or self.N < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.N!r}")
        s = to_exact(self.s)
        p = to_exact(self.p)
        if s == INF or not 0 <= s <= 1:
            raise ValueError(f"smoothness must lie in [0, 1], got {self.s!r}")
        if p != INF and p < 1:
            raise ValueError(f"integrability must lie in [1, inf], got {self.p!r}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "p", p)

    @cached_property
    def r(self) -> Fraction:
        return recip(self.p)

    @property
    def sp(self) -> Exact:
        """The product ``s*p``; ``inf`` when ``p = inf`` and ``s > 0``."""
        if self.p == INF:
            return INF if self.s > 0 else Fraction(0)
        return self.s * self.p

    def with_target(self, s, p) -> "SobolevIndex":
        return SobolevIndex(self.N, s, p)

    def __str__(self):
        return f"W^({self.s},{format_exact(self.p)})(R^{self.N})"


class Regime(str, enum.Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"
    UNSUPPORTED = "unsupported"


class DomainKind(str, enum.Enum):
    WHOLE_SPACE = "whole-space"
    BOUNDED = "bounded"


class Answer(str, enum.Enum):
    YES = "yes"
    NO = "no"
    UNSUPPORTED = "unsupported"
    NOT_APPLICABLE = "not-applicable"


class Flag(str, enum.Enum):
    TARGET_P_MAX = "target-p-max"
    CRITICAL_CURVE = "critical-curve-sp=N"
    HOLDER_LINE = "holder-line"
    TRIVIAL = "trivial"


@dataclass(frozen=True)
class EmbeddingVerdict:
    """Outcome of a classification query.

    ``justification`` explains the continuous answer and
    ``compact_justification`` the compact one.  ``reason`` carries a sentence
    when either answer is ``unsupported``.
    """

    continuous: Answer
    compact: Answer
    justification: str
    compact_justification: str
    boundary_flags: frozenset = field(default_factory=frozenset)
    reason: str = ""

    def as_dict(self) -> dict:
        return {
            "continuous": self.continuous.value,
            "compact": self.compact.value,
            "justification": self.justification,
            "compact_justification": self.compact_justification,
            "boundary_flags": sorted(f.value for f in self.boundary_flags),
            "reason": self.reason,
        }


def regime(idx: SobolevIndex) -> Regime:
    """Compare ``s*p`` with ``N`` exactly."""
    if idx.p == INF:
        return Regime.SUPERCRITICAL if idx.s > 0 else Regime.UNSUPPORTED
    sp = idx.s * idx.p
    if sp < idx.N:
        return Regime.SUBCRITICAL
    if sp == idx.N:
        return Regime.CRITICAL
    return Regime.SUPERCRITICAL


def sobolev_conjugate(idx: SobolevIndex) -> Fraction:
    """``N p / (N - s p)`` for a subcritical index."""
    if regime(idx) is not Regime.SUBCRITICAL:
        raise ValueError(f"{idx} is not subcritical (sp must be < N)")
    return from_recip(idx.r - idx.s / idx.N)


def max_target_p(source: SobolevIndex, s_tilde) -> Exact:
    """Largest ``p~`` allowed at smoothness ``s~`` by ``Np/(N-(s-s~)p)``.

    Returns ``INF`` when the denominator is not positive: every ``p~`` up to
    infinity is then allowed (the Hölder block of the supercritical case).
    """
    st = to_exact(s_tilde)
    if st == INF or not 0 <= st <= source.s:
        raise ValueError(f"s~ must lie in [0, s] = [0, {source.s}], got {s_tilde!r}")
    r_max = source.r - (source.s - st) / source.N
    if r_max <= 0:
        return INF
    return 1 / r_max


# Region predicates.  ``s, r`` belong to the source and ``t, q`` to the target
# (``q`` is the reciprocal of p~).  ``_below_pmax`` reads "p~ <= pmax(s~)".

def _below_pmax(src: SobolevIndex, t: Fraction, q: Fraction) -> bool:
    return q >= src.r - (src.s - t) / src.N


def _on_pmax(src: SobolevIndex, t: Fraction, q: Fraction) -> bool:
    return q == src.r - (src.s - t) / src.N


def _holder_level(src: SobolevIndex) -> Fraction:
    """``(sp - N)/p``, i.e. ``s - N/p``; equals ``s`` when ``p = inf``."""
    return src.s - src.N * src.r


@dataclass(frozen=True)
class _Cases:
    region: str | None          # tag of the theorem whose region contains the target
    complements: tuple          # tags of every complement case containing the target
    flags: frozenset


_PROP_BY = {
    (Regime.SUBCRITICAL, DomainKind.WHOLE_SPACE): "Prop-2.8",
    (Regime.SUBCRITICAL, DomainKind.BOUNDED): "Prop-2.9",
    (Regime.CRITICAL, DomainKind.WHOLE_SPACE): "Prop-2.11",
    (Regime.CRITICAL, DomainKind.BOUNDED): "Prop-2.12",
    (Regime.SUPERCRITICAL, DomainKind.WHOLE_SPACE): "Prop-2.14",
    (Regime.SUPERCRITICAL, DomainKind.BOUNDED): "Prop-2.15",
}
_THM_BY = {
    (Regime.SUBCRITICAL, DomainKind.WHOLE_SPACE): "Thm-1.1",
    (Regime.SUBCRITICAL, DomainKind.BOUNDED): "Thm-1.2",
    (Regime.CRITICAL, DomainKind.WHOLE_SPACE): "Thm-1.5",
    (Regime.CRITICAL, DomainKind.BOUNDED): "Thm-1.7",
    (Regime.SUPERCRITICAL, DomainKind.WHOLE_SPACE): "Thm-1.9",
    (Regime.SUPERCRITICAL, DomainKind.BOUNDED): "Thm-1.10",
}
_COMPACT_THM = {
    Regime.SUBCRITICAL: "Cor-1.4",
    Regime.CRITICAL: "Thm-1.8",
    Regime.SUPERCRITICAL: "Thm-1.11",
}
_COMPACT_PROP = {
    Regime.SUBCRITICAL: "Prop-2.10",
    Regime.CRITICAL: "Prop-2.13",
    Regime.SUPERCRITICAL: "Prop-2.16",
}
_SCALING_LEMMA = {
    Regime.SUBCRITICAL: "Lemma-2.4",
    Regime.CRITICAL: "Lemma-2.5",
    Regime.SUPERCRITICAL: "Lemma-2.6",
}


def _continuous_cases(src: SobolevIndex, tgt: SobolevIndex, domain: DomainKind,
                      kind: Regime) -> _Cases:
    """Membership of the target in the region and in each complement case.

    For a supported source exactly one of the two holds; the partition tests
    check this directly.
    """
    s, r, N = src.s, src.r, src.N
    t, q = tgt.s, tgt.r
    prop = _PROP_BY[kind, domain]
    thm = _THM_BY[kind, domain]
    lemma = _SCALING_LEMMA[kind]
    bounded = domain is DomainKind.BOUNDED
    trivial = t == s and q == r
    # On a bounded domain W^{1,p} sits inside W^{1,p~} for p~ <= p.
    first_order_footnote = bounded and t == s == 1 and q >= r

    flags = set()
    if trivial:
        flags.add(Flag.TRIVIAL)

    if kind is Regime.CRITICAL:
        if bounded:
            inside = (0 < t < s and q >= t / N) or (t == 0 and q > 0)
        else:
            inside = (0 < t <= s and r >= q >= t / N) or (t == 0 and 0 < q <= r)
        if t > 0 and q == t / N:
            flags.add(Flag.CRITICAL_CURVE)
    elif kind is Regime.SUBCRITICAL:
        if bounded:
            inside = t < s and _below_pmax(src, t, q)
        else:
            inside = t <= s and q <= r and _below_pmax(src, t, q)
        if t <= s and _on_pmax(src, t, q):
            flags.add(Flag.TARGET_P_MAX)
    else:
        h = _holder_level(src)
        if bounded:
            inside = (t <= h and not (t == s and q > r and s < 1)) or (
                h < t < s and _below_pmax(src, t, q))
        else:
            inside = t <= s and q <= r and _below_pmax(src, t, q)
        if h < t <= s and _on_pmax(src, t, q):
            flags.add(Flag.TARGET_P_MAX)
        if t == h:
            flags.add(Flag.HOLDER_LINE)

    if bounded:
        inside = inside or trivial or first_order_footnote

    complements = []
    # p~ below p.  On R^N the dilation of Lemma 2.3 rules it out everywhere;
    # on bounded domains only for s~ >= s, where the cited fractional
    # non-embedding (and Lemma 2.7 for s~ > s) is used.
    if q > r:
        if not bounded:
            complements.append(f"Lemma-2.3/{prop}")
        elif t >= s and not first_order_footnote:
            complements.append(prop if t == s else f"Lemma-2.7/{prop}")
    # More smoothness than the source.
    if t > s and q <= r:
        complements.append(f"{lemma}/{prop}")
    # Integrability beyond the critical curve.
    if t <= s:
        if kind is Regime.CRITICAL:
            beyond = (t > 0 and q < t / N) or (t == 0 and q == 0)
            if beyond:
                if N == 1 and t == 0:
                    complements.append(prop)
                else:
                    complements.append(f"{lemma}/{prop}")
        elif q < r - (s - t) / N:
            complements.append(f"{lemma}/{prop}")

    if not inside:
        flags.discard(Flag.TARGET_P_MAX)
        flags.discard(Flag.CRITICAL_CURVE)
    return _Cases(thm if inside else None, tuple(complements), frozenset(flags))


def _compact_inside(src: SobolevIndex, tgt: SobolevIndex, kind: Regime) -> bool:
    s, N = src.s, src.N
    t, q = tgt.s, tgt.r
    if t >= s:
        return False
    if kind is Regime.SUBCRITICAL:
        return q > src.r - (s - t) / N
    if kind is Regime.CRITICAL:
        return (t > 0 and q > t / N) or (t == 0 and q > 0)
    h = _holder_level(src)
    return t <= h or q > src.r - (s - t) / N


def _unsupported_reason(src: SobolevIndex, domain: DomainKind, kind: Regime) -> str:
    if kind is Regime.UNSUPPORTED:
        return "source L^inf (s = 0, p = inf) is outside every embedding theorem"
    if domain is DomainKind.BOUNDED and src.s == 0:
        return "bounded-domain theorems require s in (0, 1]"
    if src.s == src.p and kind is not Regime.SUPERCRITICAL:
        return "the theorems for sp <= N assume s != p; W^{1,1} is only covered by its L^inf fact"
    return ""


def classify(source: SobolevIndex, target: SobolevIndex,
             domain: DomainKind) -> EmbeddingVerdict:
    """Classify ``W^{s,p} -> W^{s~,p~}`` as continuous and, on bounded domains, compact."""
    if source.N != target.N:
        raise ValueError(f"dimension mismatch: {source.N} vs {target.N}")
    domain = DomainKind(domain)
    bounded = domain is DomainKind.BOUNDED
    compact_na = Answer.NOT_APPLICABLE

    if source.s == target.s and source.p == target.p:
        return EmbeddingVerdict(
            Answer.YES, Answer.NO if bounded else compact_na,
            "trivial", _COMPACT_PROP.get(regime(source), "trivial") if bounded else "",
            frozenset({Flag.TRIVIAL}))

    kind = regime(source)
    reason = _unsupported_reason(source, domain, kind)
    if reason:
        # The one stated fact about W^{1,1}: on the line it embeds in L^inf.
        if (source.N == 1 and source.s == source.p == 1 and target.s == 0
                and target.p == INF):
            tag = "Thm-1.7" if bounded else "Thm-1.5"
            return EmbeddingVerdict(Answer.YES, Answer.UNSUPPORTED if bounded else compact_na,
                                    tag, "", frozenset(),
                                    "compactness of W^{1,1} -> L^inf is not stated")
        return EmbeddingVerdict(Answer.UNSUPPORTED,
                                Answer.UNSUPPORTED if bounded else compact_na,
                                "", "", frozenset(), reason)

    cases = _continuous_cases(source, target, domain, kind)
    if cases.region is not None:
        continuous, why = Answer.YES, cases.region
    else:
        continuous, why = Answer.NO, cases.complements[0]

    if not bounded:
        return EmbeddingVerdict(continuous, compact_na, why, "", cases.flags)
    if continuous is Answer.NO:
        return EmbeddingVerdict(continuous, Answer.NO, why, why, cases.flags)
    if _compact_inside(source, target, kind):
        return EmbeddingVerdict(continuous, Answer.YES, why, _COMPACT_THM[kind], cases.flags)
    return EmbeddingVerdict(continuous, Answer.NO, why, _COMPACT_PROP[kind], cases.flags)


def classify_continuous(source: SobolevIndex, target: SobolevIndex,
                        domain: DomainKind) -> EmbeddingVerdict:
    return classify(source, target, domain)


def classify_compact(source: SobolevIndex, target: SobolevIndex,
                     domain: DomainKind) -> EmbeddingVerdict:
    """Same verdict as :func:`classify`; ``compact`` is not-applicable on R^N."""
    return classify(source, target, domain)


def partition_counts(source: SobolevIndex, target: SobolevIndex,
                     domain: DomainKind) -> tuple[bool, tuple]:
    """Region membership and matching complement cases, for coverage checks."""
    kind = regime(source)
    cases = _continuous_cases(source, target, DomainKind(domain), kind)
    return cases.region is not None, cases.complements


# Curves ---------------------------------------------------------------------

@dataclass(frozen=True)
class CurvePoint:
    theta: Exact
    s_theta: Exact
    p_theta: Exact


def _check_theta(theta):
    if not 0 <= theta <= 1:
        raise ValueError(f"theta must lie in [0, 1], got {theta!r}")


def _segment(s, r, t, q, theta):
    return theta * t + (1 - theta) * s, (1 - theta) * r + theta * q


def gamma_curve(source: SobolevIndex, target: SobolevIndex, theta,
                exact: bool = True) -> CurvePoint:
    """Point of the segment from ``(s, 1/p)`` to ``(s~, 1/p~)`` at ``theta``.

    With ``exact=False`` every quantity is a float, including ``p_theta``.
    """
    if source.N != target.N:
        raise ValueError(f"dimension mismatch: {source.N} vs {target.N}")
    if exact:
        theta = to_exact(theta)
        _check_theta(theta)
        s_th, r_th = _segment(source.s, source.r, target.s, target.r, theta)
        return CurvePoint(theta, s_th, from_recip(r_th))
    theta = float(theta)
    _check_theta(theta)
    s_th, r_th = _segment(float(source.s), float(source.r),
                          float(target.s), float(target.r), theta)
    return CurvePoint(theta, s_th, math.inf if r_th == 0 else 1.0 / r_th)


def curve_index(N: int, point: CurvePoint) -> SobolevIndex:
    return SobolevIndex(N, point.s_theta, point.p_theta)


def interpolation_exponents(s1, p1, s2, p2, theta, exact: bool = True):
    """Return ``(s_theta, p_theta)`` with ``s`` and ``1/p`` affine in ``theta``.

    ``theta = 1`` gives ``(s1, p1)`` and ``theta = 0`` gives ``(s2, p2)``.
    """
    s1, p1, s2, p2, theta = (to_exact(v) for v in (s1, p1, s2, p2, theta))
    if not s1 <= s2:
        raise ValueError(f"need s1 <= s2, got {s1} > {s2}")
    _check_theta(theta)
    for p in (p1, p2):
        if p != INF and p < 1:
            raise ValueError(f"integrability must lie in [1, inf], got {p}")
    if exact:
        s_th = theta * s1 + (1 - theta) * s2
        return s_th, from_recip(theta * recip(p1) + (1 - theta) * recip(p2))
    th = float(theta)
    r = th * float(recip(p1)) + (1 - th) * float(recip(p2))
    return th * float(s1) + (1 - th) * float(s2), (math.inf if r == 0 else 1.0 / r)


class Lemma(str, enum.Enum):
    SUBCRITICAL_CONT = "subcritical-cont"
    SUBCRITICAL_COMPACT = "subcritical-compact"
    CRITICAL = "critical"


@dataclass(frozen=True)
class ConnectingCurve:
    """Solution ``(q, theta~)`` with ``gamma_q(theta~) = (s~, p~)``.

    ``gamma_q`` is the segment from ``(s, p)`` to ``(0, q)``.  ``valid_range``
    is ``(low, high, high_is_closed)``.
    """

    q: Exact
    theta_tilde: Exact
    valid_range: tuple


def _connecting_region_ok(source, target, lemma: Lemma) -> bool:
    s, N = source.s, source.N
    t, q = target.s, target.r
    kind = regime(source)
    if lemma is Lemma.CRITICAL:
        return kind is Regime.CRITICAL and (
            (0 < t <= s and source.r >= q >= t / N) or (t == 0 and 0 < q <= source.r))
    if kind is not Regime.SUBCRITICAL:
        return False
    if lemma is Lemma.SUBCRITICAL_CONT:
        return t <= s and q <= source.r and _below_pmax(source, t, q)
    # compact region of the subcritical compactness theorem
    if not t < s:
        return False
    sp = s * source.p
    lower = sp / (sp - (source.p - 1) * t)
    return q > source.r - (s - t) / N and target.p >= lower


def connecting_q(source: SobolevIndex, target: SobolevIndex, lemma,
                 exact: bool = True) -> ConnectingCurve:
    """Find the segment from ``(s, p)`` to ``(0, q)`` passing through the target."""
    lemma = Lemma(lemma)
    if source.N != target.N:
        raise ValueError(f"dimension mismatch: {source.N} vs {target.N}")
    if not _connecting_region_ok(source, target, lemma):
        raise ValueError(f"target {target} is outside the {lemma.value} region of {source}")

    p = source.p
    if lemma is Lemma.CRITICAL:
        # closed at infinity: on the curve s~ p~ = N with s~ < s the segment ends at L^inf
        valid = (p, INF, True)
    else:
        p_star = sobolev_conjugate(source)
        valid = (p, p_star, True) if lemma is Lemma.SUBCRITICAL_CONT else (Fraction(1), p_star, False)

    s, t, pt = source.s, target.s, target.p
    if exact:
        if t == s:
            q, theta = p, Fraction(0)
        elif pt == p:
            q, theta = p, 1 - t / s
        elif t * pt == s * p:
            q, theta = INF, 1 - t / s
        else:
            q, theta = p * pt * (s - t) / (s * p - t * pt), 1 - t / s
    else:
        fs, fp, ft, fpt = float(s), float(p), float(t), float(pt)
        if t == s:
            q, theta = fp, 0.0
        elif pt == p:
            q, theta = fp, 1.0 - ft / fs
        elif t * pt == s * p:
            q, theta = math.inf, 1.0 - ft / fs
        else:
            q, theta = fp * fpt * (fs - ft) / (fs * fp - ft * fpt), 1.0 - ft / fs
        valid = tuple(float(v) if not isinstance(v, bool) else v for v in valid)

    lo, hi, closed = valid
    slack = 0 if exact or q == INF else 1e-12 * max(1.0, abs(q))
    if not (lo - slack <= q and (q <= hi + slack if closed else q < hi + slack)):
        raise ArithmeticError(f"q = {q} fell outside {valid}")
    return ConnectingCurve(q, theta, valid)


def curve_chain_check(source: SobolevIndex, target: SobolevIndex, theta1, theta2,
                      domain, mode: str = "continuous") -> EmbeddingVerdict:
    """Classify ``gamma(theta1) -> gamma(theta2)`` along the source-target segment."""
    theta1, theta2 = to_exact(theta1), to_exact(theta2)
    _check_theta(theta1)
    _check_theta(theta2)
    if theta1 > theta2:
        raise ValueError("need theta1 <= theta2")
    if mode == "compact":
        if not 0 < theta1 < theta2:
            raise ValueError("compact chains need 0 < theta1 < theta2")
        if DomainKind(domain) is not DomainKind.BOUNDED:
            raise ValueError("compact chains need a bounded domain")
    elif mode != "continuous":
        raise ValueError(f"unknown mode {mode!r}")
    a = curve_index(source.N, gamma_curve(source, target, theta1))
    b = curve_index(source.N, gamma_curve(source, target, theta2))
    return classify(a, b, domain)


# Region sampling --------------------------------------------------------------

@dataclass(frozen=True)
class RegionSample:
    cells: tuple                # (s~, 1/p~, answer) with exact coordinates
    curves: dict                # name -> tuple of (s~, 1/p~) float pairs
    n_s: int
    n_r: int


def _grid(lo, hi, n):
    lo, hi = to_exact(lo), to_exact(hi)
    if n == 1:
        return [lo]
    return [lo + (hi - lo) * Fraction(i, n - 1) for i in range(n)]


def region_sample(source: SobolevIndex, domain, mode: str = "continuous",
                  n_s: int = 101, n_r: int = 101, s_range=(0, 1), r_range=(0, 1),
                  curve_points: int = 101) -> RegionSample:
    """Verdicts on a grid over ``(s~, 1/p~)`` plus the analytic boundary curves."""
    if n_s < 1 or n_r < 1:
        raise ValueError("grid resolution must be positive")
    domain = DomainKind(domain)
    if mode not in ("continuous", "compact"):
        raise ValueError(f"unknown mode {mode!r}")
    cells = []
    for r_t in _grid(*r_range, n_r):
        for t in _grid(*s_range, n_s):
            tgt = SobolevIndex(source.N, t, from_recip(r_t))
            v = classify(source, tgt, domain)
            cells.append((t, r_t, v.continuous if mode == "continuous" else v.compact))
    return RegionSample(tuple(cells), boundary_curves(source, curve_points), n_s, n_r)


def boundary_curves(source: SobolevIndex, n: int = 101) -> dict:
    """Polylines in ``(s~, 1/p~)`` coordinates for the curves bounding the regions."""
    kind = regime(source)
    s, r, N = float(source.s), float(source.r), source.N
    curves = {}
    if kind is Regime.UNSUPPORTED:
        return curves
    if kind is Regime.CRITICAL:
        ts = [s * i / (n - 1) for i in range(n)]
        curves[Flag.CRITICAL_CURVE.value] = tuple((t, t / N) for t in ts)
        return curves
    h = max(0.0, float(_holder_level(source)))
    ts = [h + (s - h) * i / (n - 1) for i in range(n)]
    curves[Flag.TARGET_P_MAX.value] = tuple((t, max(0.0, r - (s - t) / N)) for t in ts)
    if kind is Regime.SUPERCRITICAL:
        curves[Flag.HOLDER_LINE.value] = ((h, 0.0), (h, 1.0))
    elif source.s > 0 and source.p > 1:
        # lower edge of the compact region from the subcritical compactness theorem
        sp = float(source.s * source.p)
        pts = [s * i / (n - 1) for i in range(n)]
        curves["compact-lower"] = tuple((t, (sp - (float(source.p) - 1) * t) / sp) for t in pts)
    return curves
