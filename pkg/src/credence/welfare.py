"""Client welfare: surplus, equilibrium value sets and regulated-price payoffs.

Client values are measured against the outside option of refusing treatment
at the prior.
"""

from __future__ import annotations

from dataclasses import dataclass

from .envelopes import _qbar_formula, _qtilde_formula
from .equilibrium import chi_star, ev_star
from .errors import DomainError, RegionError
from .model import EPS, ModelParams, PriceList, Region, Scenario, check_prices, classify_region, outside_option


@dataclass(frozen=True)
class ClientValueSet:
    """Interval ``[lo, hi]`` of client equilibrium values."""

    lo: float
    hi: float

    @property
    def is_degenerate(self) -> bool:
        return self.hi - self.lo <= EPS


@dataclass(frozen=True)
class DiscontinuityGaps:
    """Drop in the client's highest payoff when leaving an equal-margin list.

    ``gap1`` / ``gap2`` are the differences between the equal-margin value
    and the limsup approaching through P1 / P2. The candidate tuples hold the
    two closed-form limit differences per side: (prior on the single-action
    side of the cutoff, prior on the split side).
    """

    gap1: float
    gap2: float
    p1_candidates: tuple[float, float]
    p2_candidates: tuple[float, float]


def total_surplus(q0: float, params: ModelParams) -> float:
    return q0 * (params.l2 - params.c2) + (1.0 - q0) * (params.l1 - params.c1)


def client_outside_option(q0: float, params: ModelParams) -> float:
    """Client payoff from never buying treatment at prior ``q0``."""
    return outside_option(q0, params)


def _multiple_prices(q0: float, chi: float, params: ModelParams) -> bool:
    return q0 <= params.prior_cutoff and chi <= chi_star(q0, params)


def client_value_set(s: Scenario) -> ClientValueSet:
    q0, chi, params = s.q0, s.chi, s.params
    if _multiple_prices(q0, chi, params):
        return ClientValueSet(0.0, total_surplus(q0, params) - ev_star(q0, chi, params))
    return ClientValueSet(0.0, 0.0)


def eu_star(s: Scenario) -> float:
    """Client's highest equilibrium value."""
    q0, params = s.q0, s.params
    if _multiple_prices(q0, s.chi, params):
        return q0 * ((params.l2 - params.c2) - (params.l1 - params.c1))
    return 0.0


def u_star(q0: float, p: PriceList, params: ModelParams) -> float:
    """Client's highest value across expert-optimal equilibria at fixed prices.

    Credibility does not enter.
    """
    check_prices(p, params)
    if not 0.0 <= q0 <= 1.0:
        raise DomainError(f"q0 must lie in [0, 1], got {q0}")
    l1, l2 = params.l1, params.l2
    region = classify_region(p, params)
    if region is Region.PBAR:
        return q0 * (l2 - p.p2) + (1.0 - q0) * (l1 - p.p1)
    if region is Region.P2:
        qb = _qbar_formula(p, params)
        if q0 >= qb:
            return q0 * l2 + (1.0 - q0) * l1 - p.p2
        return _split_value_p2(q0, qb, p, params)
    qt = _qtilde_formula(p, params)
    if q0 <= qt:
        return (1.0 - q0) * l1 - p.p1
    return _split_value_p1(q0, qt, p, params)


def _split_value_p2(q0: float, qb: float, p: PriceList, params: ModelParams) -> float:
    # Posterior 0 buys a1, posterior qb buys a2.
    w = q0 / qb
    return (1.0 - w) * (params.l1 - p.p1) + w * (qb * params.l2 + (1.0 - qb) * params.l1 - p.p2)


def _split_value_p1(q0: float, qt: float, p: PriceList, params: ModelParams) -> float:
    # Posterior qt buys a1, posterior 1 buys a2.
    return (1.0 - q0) / (1.0 - qt) * ((1.0 - qt) * params.l1 - p.p1) + (q0 - qt) / (1.0 - qt) * (
        params.l2 - p.p2
    )


def client_u_star(s: Scenario, p: PriceList) -> float:
    return u_star(s.q0, p, s.params)


def discontinuity_gaps(q0: float, pbar: PriceList, params: ModelParams) -> DiscontinuityGaps:
    """Client-value gaps at an equal-margin list against nearby P1 / P2 lists.

    Which limit applies depends on where the prior sits relative to the
    cutoff at ``pbar``; at the cutoff itself both limits are attainable and
    the smaller gap is reported. ``gap1`` is zero when ``pbar`` sets
    ``p1 = l1``, since the P1 cutoff then collapses to 0.
    """
    check_prices(pbar, params)
    if classify_region(pbar, params) is not Region.PBAR:
        raise RegionError("discontinuity gaps need an equal-margin price list")
    if not 0.0 < q0 < 1.0:
        raise DomainError(f"q0 must lie in (0, 1), got {q0}")
    p1, p2 = pbar.p1, pbar.p2
    base = u_star(q0, pbar, params)

    qt = _qtilde_formula(pbar, params)
    c1_single = q0 * (params.l2 + p1 - p2)
    c1_split = base - _split_value_p1(q0, qt, pbar, params) if qt < 1.0 else c1_single
    gap1 = _pick(q0, qt, c1_single, c1_split, single_below=True)

    qb = _qbar_formula(pbar, params)
    c2_single = (1.0 - q0) * (p2 - p1)
    c2_split = base - _split_value_p2(q0, qb, pbar, params)
    gap2 = _pick(q0, qb, c2_single, c2_split, single_below=False)
    return DiscontinuityGaps(gap1, gap2, (c1_single, c1_split), (c2_single, c2_split))


def _pick(q0: float, cut: float, single: float, split: float, single_below: bool) -> float:
    if abs(q0 - cut) <= EPS:
        return min(single, split)
    on_single_side = q0 < cut if single_below else q0 > cut
    return single if on_single_side else split


__all__ = [
    "ClientValueSet",
    "DiscontinuityGaps",
    "client_outside_option",
    "client_u_star",
    "client_value_set",
    "discontinuity_gaps",
    "eu_star",
    "total_surplus",
    "u_star",
]
