"""Game primitives, ex post payoffs and the client's best response.

Problem types are indexed 0 (minor, ``t1``) and 1 (serious, ``t2``); a
belief ``q`` is always the probability of the serious type.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import AssumptionViolation, PriceListError

# Absolute tolerance for every equality / indifference test on money values.
EPS = 1e-9


class Action(enum.IntEnum):
    """Client choices: no treatment, minor treatment, serious treatment."""

    A0 = 0
    A1 = 1
    A2 = 2

    @property
    def label(self) -> str:
        return f"a{int(self)}"

    @classmethod
    def parse(cls, text: str) -> "Action":
        key = text.strip().lower()
        for a in cls:
            if a.label == key:
                return a
        raise ValueError(f"unknown action {text!r}")


class Region(enum.Enum):
    """Price-list region by comparison of the two treatment margins."""

    P1 = "P1"
    PBAR = "Pbar"
    P2 = "P2"


@dataclass(frozen=True)
class ModelParams:
    """Treatment costs ``c1 < c2`` and untreated losses ``l1``, ``l2``."""

    c1: float
    c2: float
    l1: float
    l2: float

    def __post_init__(self):
        values = (self.c1, self.c2, self.l1, self.l2)
        if not all(math.isfinite(v) for v in values):
            raise AssumptionViolation("finite", f"non-finite input {values}")
        if not self.c2 > self.c1:
            raise AssumptionViolation("ii", f"need c2 > c1, got c1={self.c1}, c2={self.c2}")
        if not (self.l2 > self.c2 and self.l1 > self.c1):
            raise AssumptionViolation(
                "iii", f"need l1 > c1 and l2 > c2, got c=({self.c1}, {self.c2}), l=({self.l1}, {self.l2})"
            )
        if not self.l2 - self.c2 > self.l1 - self.c1:
            raise AssumptionViolation(
                "iv", f"need l2 - c2 > l1 - c1, got {self.l2 - self.c2} <= {self.l1 - self.c1}"
            )

    @property
    def cost_gap(self) -> float:
        """``c2 - c1``."""
        return self.c2 - self.c1

    @property
    def loss_gap(self) -> float:
        """``l2 - l1``."""
        return self.l2 - self.l1

    @property
    def prior_cutoff(self) -> float:
        """``(c2 - c1) / (l2 - l1)``, the prior where credibility starts to pay."""
        return self.cost_gap / self.loss_gap

    def price_list(self, p1: float, p2: float) -> "PriceList":
        """Build a price list and check that it belongs to P."""
        p = PriceList(float(p1), float(p2))
        check_prices(p, self)
        return p

    def equal_margin_prices(self) -> "PriceList":
        """The equal-margin list ``(l1, l1 - c1 + c2)``."""
        return self.price_list(self.l1, self.l1 - self.c1 + self.c2)


def validate_params(c1: float, c2: float, l1: float, l2: float) -> ModelParams:
    """Return ``ModelParams`` or raise ``AssumptionViolation``."""
    return ModelParams(float(c1), float(c2), float(l1), float(l2))


@dataclass(frozen=True)
class Scenario:
    """Primitives plus prior ``q0`` of the serious type and credibility ``chi``."""

    params: ModelParams
    q0: float
    chi: float

    def __post_init__(self):
        if not 0.0 < self.q0 < 1.0:
            raise ValueError(f"prior q0 must lie in (0, 1), got {self.q0}")
        if not 0.0 <= self.chi <= 1.0:
            raise ValueError(f"credibility chi must lie in [0, 1], got {self.chi}")


@dataclass(frozen=True)
class PriceList:
    p1: float
    p2: float

    def margin(self, params: ModelParams, action: Action) -> float:
        return expert_margin(action, self, params)


def check_prices(p: PriceList, params: ModelParams) -> None:
    """Raise ``PriceListError`` unless ``p`` lies in P (up to ``EPS``)."""
    if not (math.isfinite(p.p1) and math.isfinite(p.p2)):
        raise PriceListError(f"non-finite prices {p}")
    if not params.c1 - EPS <= p.p1 <= params.l1 + EPS:
        raise PriceListError(f"p1={p.p1} outside [c1, l1]=[{params.c1}, {params.l1}]")
    if not params.c2 - EPS <= p.p2 <= params.l2 + EPS:
        raise PriceListError(f"p2={p.p2} outside [c2, l2]=[{params.c2}, {params.l2}]")
    if p.p2 < p.p1 - EPS:
        raise PriceListError(f"p2={p.p2} below p1={p.p1}")


def client_expected_utility(q: float, a: Action, p: PriceList, params: ModelParams) -> float:
    """Client's expected payoff from ``a`` at belief ``q``."""
    if a is Action.A0:
        return -(1.0 - q) * params.l1 - q * params.l2
    if a is Action.A1:
        return -p.p1 - q * params.l2
    return -p.p2


def client_payoff(t: int, a: Action, p: PriceList, params: ModelParams) -> float:
    """Ex post client payoff for type index ``t`` (0 minor, 1 serious)."""
    loss = params.l1 if t == 0 else params.l2
    if a is Action.A0:
        return -loss
    if a is Action.A1:
        return -p.p1 - (params.l2 if t == 1 else 0.0)
    return -p.p2


def expert_margin(a: Action, p: PriceList, params: ModelParams) -> float:
    """Expert's payoff from the client's choice ``a``."""
    if a is Action.A0:
        return 0.0
    if a is Action.A1:
        return p.p1 - params.c1
    return p.p2 - params.c2


def outside_option(q: float, params: ModelParams) -> float:
    """Client's payoff from refusing treatment at belief ``q``."""
    return -(1.0 - q) * params.l1 - q * params.l2


def best_responses(q: float, p: PriceList, params: ModelParams) -> frozenset[Action]:
    """All pure actions maximizing the client's expected payoff at ``q``."""
    utils = {a: client_expected_utility(q, a, p, params) for a in Action}
    top = max(utils.values())
    return frozenset(a for a, u in utils.items() if u >= top - EPS)


def expert_preferred_response(q: float, p: PriceList, params: ModelParams) -> Action:
    """The client best response that pays the expert most."""
    # Ties in margin (equal-margin prices) resolve toward the higher index.
    return max(best_responses(q, p, params), key=lambda a: (expert_margin(a, p, params), int(a)))


def classify_region(p: PriceList, params: ModelParams) -> Region:
    gap = (p.p2 - params.c2) - (p.p1 - params.c1)
    if abs(gap) <= EPS:
        return Region.PBAR
    return Region.P2 if gap > 0 else Region.P1
