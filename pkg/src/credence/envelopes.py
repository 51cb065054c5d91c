"""Indirect utility of the expert and its quasiconcave / concave envelopes.

Every envelope in this model is piecewise affine with at most three pieces,
so envelopes are stored as explicit segment lists rather than closures.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass

from .errors import DomainError, RegionError
from .model import (
    EPS,
    ModelParams,
    PriceList,
    Region,
    best_responses,
    check_prices,
    classify_region,
    expert_margin,
)


@dataclass(frozen=True)
class Segment:
    lo: float
    hi: float
    y_lo: float
    y_hi: float

    def at(self, x: float) -> float:
        if self.hi == self.lo:
            return self.y_lo
        t = (x - self.lo) / (self.hi - self.lo)
        return self.y_lo + t * (self.y_hi - self.y_lo)


@dataclass(frozen=True)
class PiecewiseAffine:
    """Piecewise-affine function on [0, 1].

    Segments are contiguous and sorted. At a shared breakpoint the value
    comes from the segment starting there when ``right_closed`` is true,
    otherwise from the segment ending there.
    """

    segments: tuple[Segment, ...]
    right_closed: bool = True

    def __post_init__(self):
        if not self.segments:
            raise ValueError("need at least one segment")
        for a, b in zip(self.segments, self.segments[1:]):
            if abs(a.hi - b.lo) > 1e-12:
                raise ValueError("segments must be contiguous")

    @classmethod
    def constant(cls, y: float) -> "PiecewiseAffine":
        return cls((Segment(0.0, 1.0, y, y),))

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(s.lo for s in self.segments) + (self.segments[-1].hi,)

    def __call__(self, x: float) -> float:
        if not -1e-12 <= x <= 1.0 + 1e-12:
            raise DomainError(f"belief {x} outside [0, 1]")
        inner = [s.lo for s in self.segments[1:]]
        i = bisect_right(inner, x) if self.right_closed else bisect_left(inner, x)
        return self.segments[i].at(x)


@dataclass(frozen=True)
class EnvelopePair:
    qcav: PiecewiseAffine
    cav: PiecewiseAffine


@dataclass(frozen=True)
class Thresholds:
    """Cutoffs and slopes for one price list (entries ``None`` when undefined)."""

    qbar: float | None
    qtilde: float | None
    lam: float | None
    lam_tilde: float | None


def indirect_utility(q: float, p: PriceList, params: ModelParams) -> float:
    """Largest expert margin among the client's best responses at ``q``."""
    return max(expert_margin(a, p, params) for a in best_responses(q, p, params))


def _high_price_case(p: PriceList, params: ModelParams) -> bool:
    # Case I: the no-treatment option is the binding alternative to a2.
    return p.p2 >= params.l2 - params.loss_gap / params.l1 * p.p1


def _qbar_formula(p: PriceList, params: ModelParams) -> float:
    if _high_price_case(p, params):
        return (p.p2 - params.l1) / params.loss_gap
    return (p.p2 - p.p1) / params.l2


def _qtilde_formula(p: PriceList, params: ModelParams) -> float:
    if _high_price_case(p, params):
        return (params.l1 - p.p1) / params.l1
    return (p.p2 - p.p1) / params.l2


def qbar(p: PriceList, params: ModelParams) -> float:
    """Smallest belief at which the client buys the serious treatment."""
    check_prices(p, params)
    if classify_region(p, params) is Region.P1:
        raise RegionError("qbar is defined on Pbar and P2 only")
    return _qbar_formula(p, params)


def qtilde(p: PriceList, params: ModelParams) -> float:
    """Largest belief at which the client still buys the minor treatment (P1)."""
    check_prices(p, params)
    if classify_region(p, params) is not Region.P1:
        raise RegionError("qtilde is defined on P1 only")
    return _qtilde_formula(p, params)


def thresholds(p: PriceList, params: ModelParams) -> Thresholds:
    check_prices(p, params)
    m1 = p.p1 - params.c1
    m2 = p.p2 - params.c2
    if classify_region(p, params) is Region.P1:
        qt = _qtilde_formula(p, params)
        return Thresholds(None, qt, None, (m1 - m2) / (1.0 - qt))
    qb = _qbar_formula(p, params)
    lam = (m2 - m1) / qb if qb > 0 else 0.0
    return Thresholds(qb, None, lam, None)


def envelopes_P2(p: PriceList, params: ModelParams) -> EnvelopePair:
    """Envelopes of the indirect utility for ``p`` in Pbar or P2."""
    qb = qbar(p, params)
    m1 = p.p1 - params.c1
    m2 = p.p2 - params.c2
    if classify_region(p, params) is Region.PBAR or qb <= 0.0:
        flat = PiecewiseAffine.constant(m2)
        return EnvelopePair(flat, flat)
    if qb >= 1.0:
        qcav = PiecewiseAffine((Segment(0.0, 1.0, m1, m1), Segment(1.0, 1.0, m2, m2)))
    else:
        qcav = PiecewiseAffine((Segment(0.0, qb, m1, m1), Segment(qb, 1.0, m2, m2)))
    cav = PiecewiseAffine((Segment(0.0, qb, m1, m2),) + ((Segment(qb, 1.0, m2, m2),) if qb < 1.0 else ()))
    return EnvelopePair(qcav, cav)


def envelopes_P1(p: PriceList, params: ModelParams) -> EnvelopePair:
    """Envelopes of the indirect utility for ``p`` in P1."""
    qt = qtilde(p, params)
    m1 = p.p1 - params.c1
    m2 = p.p2 - params.c2
    qcav = PiecewiseAffine((Segment(0.0, qt, m1, m1), Segment(qt, 1.0, m2, m2)), right_closed=False)
    cav = PiecewiseAffine((Segment(0.0, qt, m1, m1), Segment(qt, 1.0, m1, m2)))
    return EnvelopePair(qcav, cav)


def envelopes(p: PriceList, params: ModelParams) -> EnvelopePair:
    if classify_region(p, params) is Region.P1:
        return envelopes_P1(p, params)
    return envelopes_P2(p, params)


def chi_lower(q0: float, p: PriceList, params: ModelParams) -> float:
    """Credibility above which the persuasion payoff becomes attainable."""
    if classify_region(p, params) is Region.P1:
        raise RegionError("chi_lower is defined on P2")
    qb = qbar(p, params)
    if not 0.0 <= q0 < qb:
        raise DomainError(f"chi_lower needs 0 <= q0 < qbar={qb}, got q0={q0}")
    return (qb - q0) / (qb * (1.0 - q0))


def q_lower(chi: float, p: PriceList, params: ModelParams) -> float:
    """Inverse of ``chi_lower`` in the prior."""
    if not 0.0 <= chi <= 1.0:
        raise DomainError(f"chi must lie in [0, 1], got {chi}")
    qb = qbar(p, params)
    return qb * (1.0 - chi) / (1.0 - chi * qb)


def q_hat(chi: float, p: PriceList, params: ModelParams) -> float:
    """Largest prior with persuasion payoff in P1."""
    if not 0.0 <= chi <= 1.0:
        raise DomainError(f"chi must lie in [0, 1], got {chi}")
    qt = qtilde(p, params)
    denom = 1.0 - (1.0 - qt) * chi
    if denom <= 0.0:
        return 1.0
    return qt / denom


def pi(q0: float, params: ModelParams) -> float:
    """Expert profit when prices may condition on the belief ``q0``.

    Selling the minor treatment at belief ``q0`` requires ``p1 <= (1-q0) l1``;
    selling the serious one allows ``p2 = q0 l2 + (1-q0) l1``.
    """
    if not 0.0 <= q0 <= 1.0:
        raise DomainError(f"q0 must lie in [0, 1], got {q0}")
    minor = (1.0 - q0) * params.l1 - params.c1
    serious = q0 * params.l2 + (1.0 - q0) * params.l1 - params.c2
    return max(minor, serious, 0.0)


def pi_envelopes(params: ModelParams) -> EnvelopePair:
    """Quasiconcave and concave envelopes of ``pi``."""
    base = params.l1 - params.c1
    top = params.l2 - params.c2
    cut = params.prior_cutoff
    qcav = PiecewiseAffine((Segment(0.0, cut, base, base), Segment(cut, 1.0, base, top)))
    cav = PiecewiseAffine((Segment(0.0, 1.0, base, top),))
    return EnvelopePair(qcav, cav)


__all__ = [
    "EPS",
    "EnvelopePair",
    "PiecewiseAffine",
    "Segment",
    "Thresholds",
    "chi_lower",
    "envelopes",
    "envelopes_P1",
    "envelopes_P2",
    "indirect_utility",
    "pi",
    "pi_envelopes",
    "q_hat",
    "q_lower",
    "qbar",
    "qtilde",
    "thresholds",
]
