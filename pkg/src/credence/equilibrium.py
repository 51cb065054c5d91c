"""Closed-form equilibrium values, prices, experiments and strategy profiles."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Union

from .envelopes import (
    _qbar_formula,
    _qtilde_formula,
    chi_lower,
    envelopes,
    q_hat,
    q_lower,
)
from .errors import DomainError, ModeError, RegionError
from .model import (
    EPS,
    Action,
    ModelParams,
    PriceList,
    Region,
    Scenario,
    best_responses,
    check_prices,
    classify_region,
    expert_margin,
    expert_preferred_response,
)

ROW_TOL = 1e-12

# A client response is a pure action or a distribution over actions.
ClientResponse = Union[Action, Mapping[Action, float]]


class Mode(enum.Enum):
    CHEAP_TALK = "CheapTalk"
    PERSUASION = "Persuasion"
    FLAT = "Flat"


@dataclass(frozen=True)
class PEqValue:
    value: float
    mode: Mode


@dataclass(frozen=True)
class MessageKernel:
    """Type-conditional distribution over a finite message alphabet.

    ``rows[0]`` is the distribution for the minor type, ``rows[1]`` for the
    serious type.
    """

    messages: tuple[str, ...]
    rows: tuple[tuple[float, ...], tuple[float, ...]]

    def __post_init__(self):
        if len(self.messages) < 2 or len(set(self.messages)) != len(self.messages):
            raise ValueError("need at least two distinct messages")
        if len(self.rows) != 2:
            raise ValueError("need one row per problem type")
        for row in self.rows:
            if len(row) != len(self.messages):
                raise ValueError("row length differs from alphabet size")
            if any(x < -ROW_TOL or not math.isfinite(x) for x in row):
                raise ValueError(f"invalid probabilities {row}")
            if abs(sum(row) - 1.0) > ROW_TOL:
                raise ValueError(f"row {row} does not sum to 1")

    def prob(self, t: int, m: str) -> float:
        return self.rows[t][self.messages.index(m)]


class Experiment(MessageKernel):
    """Publicly committed experiment."""


class SignallingStrategy(MessageKernel):
    """Message choice of a non-credible expert."""


@dataclass(frozen=True)
class Atom:
    posterior: float
    expert_payoff: float
    weight: float


@dataclass(frozen=True)
class OutcomeDistribution:
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        if abs(sum(a.weight for a in self.atoms) - 1.0) > 1e-9:
            raise ValueError("atom weights must sum to 1")

    @property
    def mean_posterior(self) -> float:
        return sum(a.weight * a.posterior for a in self.atoms)

    @property
    def expert_value(self) -> float:
        return sum(a.weight * a.expert_payoff for a in self.atoms)


@dataclass(frozen=True)
class Profile:
    """A strategy profile of the pricing subgame: experiment, signalling, client play."""

    xi: Experiment
    sigma: SignallingStrategy
    rho: Mapping[str, ClientResponse]


@dataclass(frozen=True)
class OptimalPrices:
    """Optimal price list(s).

    When ``unique`` is false every ``(l1, p2)`` with ``p2`` in ``p2_interval``
    is optimal and ``canonical`` is just one representative.
    """

    canonical: PriceList
    unique: bool
    p2_interval: tuple[float, float]


@dataclass(frozen=True)
class PublicCredibilityOptimum:
    prices: tuple[PriceList, ...]
    value: float
    q_pc: float


def _margins(p: PriceList, params: ModelParams) -> tuple[float, float]:
    return p.p1 - params.c1, p.p2 - params.c2


def v_star(q0: float, chi: float, p: PriceList, params: ModelParams) -> PEqValue:
    """Expert's p-equilibrium value at prior ``q0`` and credibility ``chi``."""
    check_prices(p, params)
    if not 0.0 < q0 < 1.0:
        raise DomainError(f"q0 must lie in (0, 1), got {q0}")
    if not 0.0 <= chi <= 1.0:
        raise DomainError(f"chi must lie in [0, 1], got {chi}")
    m1, m2 = _margins(p, params)
    region = classify_region(p, params)
    if region is Region.PBAR:
        return PEqValue(m2, Mode.FLAT)
    env = envelopes(p, params)
    if region is Region.P2:
        qb = _qbar_formula(p, params)
        if q0 >= qb:
            return PEqValue(m2, Mode.FLAT)
        if chi >= chi_lower(q0, p, params) - EPS:
            return PEqValue(env.cav(q0), Mode.PERSUASION)
        return PEqValue(m1, Mode.CHEAP_TALK)
    qt = _qtilde_formula(p, params)
    if q0 <= qt:
        return PEqValue(m1, Mode.FLAT)
    if q0 <= q_hat(chi, p, params) + EPS:
        return PEqValue(env.cav(q0), Mode.PERSUASION)
    return PEqValue(m2, Mode.CHEAP_TALK)


def p_eq_value(s: Scenario, p: PriceList) -> PEqValue:
    return v_star(s.q0, s.chi, p, s.params)


def chi_star(q0: float, params: ModelParams) -> float:
    """Credibility below which the expert gains nothing over cheap talk.

    May be negative; compare credibility against ``max(chi_star, 0)``.
    """
    if not 0.0 < q0 < 1.0:
        raise DomainError(f"q0 must lie in (0, 1), got {q0}")
    return (params.cost_gap - q0 * params.loss_gap) / ((1.0 - q0) * params.cost_gap)


def optimal_p2(q0: float, chi: float, params: ModelParams) -> float:
    """Serious-treatment price that puts ``chi`` exactly on the mode threshold."""
    return params.l1 + q0 * params.loss_gap / (1.0 - chi + chi * q0)


def _credibility_pays(q0: float, chi: float, params: ModelParams) -> bool:
    if q0 >= 1.0:
        return chi > 0.0 or q0 > params.prior_cutoff
    if q0 <= 0.0:
        return False
    return chi > max(chi_star(q0, params), 0.0)


def optimal_prices(s: Scenario) -> OptimalPrices:
    params = s.params
    if _credibility_pays(s.q0, s.chi, params):
        p2 = min(optimal_p2(s.q0, s.chi, params), params.l2)
        return OptimalPrices(params.price_list(params.l1, p2), True, (p2, p2))
    if s.chi == 0.0 and s.q0 > params.prior_cutoff:
        # No credibility: monopoly price for the serious treatment; p1 is not pinned.
        p2 = optimal_p2(s.q0, 0.0, params)
        return OptimalPrices(params.price_list(params.l1, p2), False, (p2, p2))
    canonical = params.equal_margin_prices()
    return OptimalPrices(canonical, False, (canonical.p2, params.l2))


def ev_star(q0: float, chi: float, params: ModelParams) -> float:
    """Expert's equilibrium value on the closed square ``[0, 1]^2``."""
    if not (0.0 <= q0 <= 1.0 and 0.0 <= chi <= 1.0):
        raise DomainError(f"(q0, chi)=({q0}, {chi}) outside [0, 1]^2")
    if chi == 0.0:
        return benchmark_value(q0, "chi0", params)
    if chi == 1.0:
        return benchmark_value(q0, "chi1", params)
    if not _credibility_pays(q0, chi, params):
        return params.l1 - params.c1
    return (
        (params.loss_gap - chi * params.cost_gap) * q0
        + (params.l1 - params.c1)
        - (1.0 - chi) * params.cost_gap
    )


def equilibrium_value(s: Scenario) -> float:
    return ev_star(s.q0, s.chi, s.params)


def benchmark_value(q0: float, which: str, params: ModelParams) -> float:
    """Equilibrium value with no (``"chi0"``) or full (``"chi1"``) credibility."""
    if not 0.0 <= q0 <= 1.0:
        raise DomainError(f"q0 must lie in [0, 1], got {q0}")
    if which == "chi0":
        if q0 <= params.prior_cutoff:
            return params.l1 - params.c1
        return q0 * params.loss_gap + params.l1 - params.c2
    if which == "chi1":
        return q0 * (params.l2 - params.c2) + (1.0 - q0) * (params.l1 - params.c1)
    raise ValueError(f"unknown benchmark {which!r}")


def _posterior_split(q0: float, q_low: float, q_high: float) -> tuple[float, float]:
    # Bayes-plausible weights on two posteriors bracketing the prior.
    w_high = (q0 - q_low) / (q_high - q_low)
    return 1.0 - w_high, w_high


def optimal_experiment(s: Scenario, p: PriceList) -> tuple[Experiment, SignallingStrategy]:
    """Expert-optimal experiment and signalling strategy in persuasion mode.

    Raises ``ModeError`` in cheap-talk or flat mode, where optimal
    experiments are not unique.
    """
    pv = p_eq_value(s, p)
    if pv.mode is not Mode.PERSUASION:
        raise ModeError(f"no unique optimal experiment in {pv.mode.value} mode")
    messages = ("m1", "m2")
    if classify_region(p, s.params) is Region.P2:
        stay = min(chi_lower(s.q0, p, s.params) / s.chi, 1.0)
        xi = Experiment(messages, ((stay, 1.0 - stay), (0.0, 1.0)))
        sigma = SignallingStrategy(messages, ((0.0, 1.0), (0.0, 1.0)))
        return xi, sigma
    # P1: the favourable message m1 induces qtilde, m2 reveals the serious type.
    qt = _qtilde_formula(p, s.params)
    q0 = s.q0
    flip = (1.0 - qt * (1.0 - q0) / (q0 * (1.0 - qt))) / s.chi
    flip = min(max(flip, 0.0), 1.0)
    xi = Experiment(messages, ((1.0, 0.0), (1.0 - flip, flip)))
    sigma = SignallingStrategy(messages, ((1.0, 0.0), (1.0, 0.0)))
    return xi, sigma


def _mix_to_value(q: float, target: float, p: PriceList, params: ModelParams) -> ClientResponse:
    """Client best response at ``q`` (possibly mixed) paying the expert ``target``."""
    br = best_responses(q, p, params)
    for a in br:
        if abs(expert_margin(a, p, params) - target) <= EPS:
            return a
    hi = max(br, key=lambda a: expert_margin(a, p, params))
    lo = min(br, key=lambda a: expert_margin(a, p, params))
    m_hi = expert_margin(hi, p, params)
    m_lo = expert_margin(lo, p, params)
    if not m_lo - EPS <= target <= m_hi + EPS:
        raise ModeError(f"payoff {target} not attainable by the client at belief {q}")
    w = (target - m_lo) / (m_hi - m_lo)
    return {hi: w, lo: 1.0 - w}


def equilibrium_profile(s: Scenario, p: PriceList) -> Profile:
    """A canonical expert-optimal strategy profile for the pricing subgame.

    Persuasion mode uses the optimal experiment with non-revealing
    signalling. Cheap-talk mode sets the experiment equal to the signalling
    strategy and splits the prior onto the two kinks of the envelope, with
    the client mixing at the upper kink so the expert is indifferent. Flat
    mode uses full disclosure at equal margins and babbling otherwise.
    """
    params = s.params
    q0 = s.q0
    region = classify_region(p, params)
    pv = p_eq_value(s, p)
    messages = ("m1", "m2")
    if pv.mode is Mode.PERSUASION:
        xi, sigma = optimal_experiment(s, p)
        return Profile(xi, sigma, {"m1": Action.A1, "m2": Action.A2})
    if region is Region.PBAR:
        rows = ((1.0, 0.0), (0.0, 1.0))
        return Profile(
            Experiment(messages, rows),
            SignallingStrategy(messages, rows),
            {"m1": expert_preferred_response(0.0, p, params), "m2": expert_preferred_response(1.0, p, params)},
        )
    if pv.mode is Mode.FLAT:
        rows = ((0.0, 1.0), (0.0, 1.0))
        return Profile(
            Experiment(messages, rows),
            SignallingStrategy(messages, rows),
            {"m2": expert_preferred_response(q0, p, params)},
        )
    if region is Region.P2:
        qb = _qbar_formula(p, params)
        to_high = q0 * (1.0 - qb) / (qb * (1.0 - q0))
        rows = ((1.0 - to_high, to_high), (0.0, 1.0))
        rho = {"m1": Action.A1, "m2": _mix_to_value(qb, pv.value, p, params)}
    else:
        qt = _qtilde_formula(p, params)
        stay = qt * (1.0 - q0) / (q0 * (1.0 - qt))
        rows = ((1.0, 0.0), (stay, 1.0 - stay))
        rho = {"m1": _mix_to_value(qt, pv.value, p, params), "m2": Action.A2}
    return Profile(Experiment(messages, rows), SignallingStrategy(messages, rows), rho)


def outcome_distribution(s: Scenario, p: PriceList) -> OutcomeDistribution:
    """Joint law of (client posterior, expert payoff) in the canonical equilibrium."""
    params = s.params
    q0 = s.q0
    m1, m2 = _margins(p, params)
    region = classify_region(p, params)
    pv = p_eq_value(s, p)
    if region is Region.PBAR:
        return OutcomeDistribution((Atom(0.0, m2, 1.0 - q0), Atom(1.0, m2, q0)))
    if pv.mode is Mode.FLAT:
        return OutcomeDistribution((Atom(q0, pv.value, 1.0),))
    if region is Region.P2:
        qb = _qbar_formula(p, params)
        w_lo, w_hi = _posterior_split(q0, 0.0, qb)
        high = m2 if pv.mode is Mode.PERSUASION else m1
        return OutcomeDistribution((Atom(0.0, m1, w_lo), Atom(qb, high, w_hi)))
    qt = _qtilde_formula(p, params)
    w_lo, w_hi = _posterior_split(q0, qt, 1.0)
    low = m1 if pv.mode is Mode.PERSUASION else m2
    return OutcomeDistribution((Atom(qt, low, w_lo), Atom(1.0, m2, w_hi)))


def public_credibility_value(s: Scenario, p: PriceList) -> float:
    """p-equilibrium value when the credibility draw is publicly observed."""
    env = envelopes(p, s.params)
    return (1.0 - s.chi) * env.qcav(s.q0) + s.chi * env.cav(s.q0)


def public_credibility_cutoff(chi: float, params: ModelParams) -> float:
    return params.cost_gap / ((1.0 - chi) * params.loss_gap + chi * params.cost_gap)


def public_credibility_optimum(s: Scenario) -> PublicCredibilityOptimum:
    params = s.params
    q0, chi = s.q0, s.chi
    cut = public_credibility_cutoff(chi, params)
    full = params.price_list(params.l1, params.l2)
    monopoly_p2 = q0 * params.l2 + (1.0 - q0) * params.l1
    if abs(q0 - cut) <= EPS:
        prices: tuple[PriceList, ...] = (full, params.price_list(params.l1, monopoly_p2))
    elif q0 < cut:
        prices = (full,)
    else:
        prices = (params.price_list(params.l1, monopoly_p2),)
    if q0 >= cut - EPS:
        value = monopoly_p2 - params.c2
    else:
        value = chi * q0 * (params.l2 - params.c2) + (1.0 - chi * q0) * (params.l1 - params.c1)
    return PublicCredibilityOptimum(prices, value, cut)


def equal_margin_dominance_check(s: Scenario, p: PriceList) -> bool:
    """True iff the P1 list ``p`` does strictly worse than the equal-margin list."""
    if classify_region(p, s.params) is not Region.P1:
        raise RegionError("dominance check applies to P1 price lists")
    reference = p_eq_value(s, s.params.equal_margin_prices()).value
    return p_eq_value(s, p).value < reference - EPS


__all__ = [
    "Atom",
    "ClientResponse",
    "Experiment",
    "Mode",
    "OptimalPrices",
    "OutcomeDistribution",
    "PEqValue",
    "Profile",
    "PublicCredibilityOptimum",
    "SignallingStrategy",
    "benchmark_value",
    "chi_star",
    "equilibrium_profile",
    "equilibrium_value",
    "ev_star",
    "equal_margin_dominance_check",
    "optimal_experiment",
    "optimal_p2",
    "optimal_prices",
    "outcome_distribution",
    "p_eq_value",
    "public_credibility_cutoff",
    "public_credibility_optimum",
    "public_credibility_value",
    "q_lower",
    "v_star",
]
