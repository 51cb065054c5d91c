"""Brute-force oracles that check the closed forms independently.

* ``solve_program``: grid search of the constrained splitting program that
  characterizes the p-equilibrium value. Envelopes are built numerically
  from the client's utilities on a belief grid, not from closed forms.
* ``verify_equilibrium``: checks the three equilibrium conditions for an
  explicit strategy profile.
* ``simulate``: plays the game literally with a seeded PCG64 generator.
* ``price_search``: grid search of the p-equilibrium value over prices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .envelopes import indirect_utility
from .equilibrium import (
    ClientResponse,
    Experiment,
    SignallingStrategy,
    optimal_p2,
    v_star,
)
from .errors import AlphabetMismatch, InfeasibleError, RegionError
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
    client_expected_utility,
    client_payoff,
    expert_margin,
    outside_option,
)

CONSTRAINT_TOL = 1e-12
FINE_GRID = 2001


@dataclass(frozen=True)
class ProgramSolution:
    value: float
    beta: float
    gamma: float
    k: float


@dataclass(frozen=True)
class EquilibriumCertificate:
    bayes_ok: bool
    bayes_deviation: float
    client_opt_ok: bool
    client_regret: float
    expert_opt_ok: bool
    expert_regret: float
    value: float
    client_value: float
    posteriors: tuple[tuple[str, float], ...]
    off_path: tuple[str, ...]

    @property
    def is_equilibrium(self) -> bool:
        return self.bayes_ok and self.client_opt_ok and self.expert_opt_ok


@dataclass(frozen=True)
class SimAtom:
    message: str
    posterior: float
    expert_payoff: float
    frequency: float


@dataclass(frozen=True)
class SimReport:
    n: int
    seed: int
    empirical_atoms: tuple[SimAtom, ...]
    mean_expert_payoff: float
    mean_client_payoff: float
    mean_client_value: float
    std_err: float


@dataclass(frozen=True)
class PriceSearchResult:
    prices: PriceList
    value: float


# -- belief-space primitives -------------------------------------------------


def _utility_lines(p: PriceList, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Intercepts and slopes of the client's (affine) expected utilities."""
    at0 = np.array([client_expected_utility(0.0, a, p, params) for a in Action])
    at1 = np.array([client_expected_utility(1.0, a, p, params) for a in Action])
    return at0, at1 - at0


def utility_crossings(p: PriceList, params: ModelParams) -> list[float]:
    """Beliefs in [0, 1] where two client utilities cross."""
    icpt, slope = _utility_lines(p, params)
    out = []
    for i in range(3):
        for j in range(i + 1, 3):
            ds = slope[i] - slope[j]
            if ds == 0.0:
                continue
            q = (icpt[j] - icpt[i]) / ds
            if 0.0 <= q <= 1.0:
                out.append(float(q))
    return sorted(out)


def indirect_utility_grid(xs: np.ndarray, p: PriceList, params: ModelParams) -> np.ndarray:
    """Expert-preferred indirect utility evaluated on a belief array."""
    icpt, slope = _utility_lines(p, params)
    utils = icpt[:, None] + slope[:, None] * xs[None, :]
    best = utils.max(axis=0)
    margins = np.array([expert_margin(a, p, params) for a in Action])
    chosen = np.where(utils >= best - EPS, margins[:, None], -np.inf)
    return chosen.max(axis=0)


def upper_concave_hull(xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the upper concave hull of points sorted by strictly increasing x."""
    hx: list[float] = []
    hy: list[float] = []
    for x, y in zip(xs.tolist(), ys.tolist()):
        while len(hx) >= 2:
            # Drop the middle vertex when it lies on or below the chord.
            cross = (hx[-1] - hx[-2]) * (y - hy[-2]) - (hy[-1] - hy[-2]) * (x - hx[-2])
            if cross >= 0:
                hx.pop()
                hy.pop()
            else:
                break
        hx.append(x)
        hy.append(y)
    return np.array(hx), np.array(hy)


def quasiconcave_envelope(ys: np.ndarray) -> np.ndarray:
    """Lowest quasiconcave majorant of samples on an ordered grid."""
    left = np.maximum.accumulate(ys)
    right = np.maximum.accumulate(ys[::-1])[::-1]
    return np.minimum(left, right)


def cutoff_by_bisection(p: PriceList, params: ModelParams, action: Action, lower: bool, iters: int = 200) -> float:
    """Edge of the belief set where ``action`` is a client best response.

    ``lower=True`` gives the smallest such belief (the set must be an upper
    interval), otherwise the largest (the set must be a lower interval).
    """
    def inside(q: float) -> bool:
        return action in best_responses(q, p, params)

    lo, hi = 0.0, 1.0
    if lower:
        if inside(0.0):
            return 0.0
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if inside(mid):
                hi = mid
            else:
                lo = mid
        return hi
    if inside(1.0):
        return 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if inside(mid):
            lo = mid
        else:
            hi = mid
    return lo


# -- constrained splitting program --------------------------------------------


def solve_program(
    s: Scenario,
    p: PriceList,
    grid_n: int = 401,
    *,
    allow_p1: bool = False,
    fine_n: int = FINE_GRID,
) -> ProgramSolution:
    """Maximize the splitting program over a (beta, gamma) grid.

    The good-outcome mean ``gamma`` and bad-outcome mean ``beta`` range over
    a uniform grid of ``grid_n`` points plus the kinks of the indirect
    utility, the prior, 0 and 1. The weight ``k`` is pinned by Bayes
    plausibility; when ``beta == gamma == q0`` it is free and searched on its
    own grid.
    """
    params = s.params
    check_prices(p, params)
    if grid_n < 101:
        raise ValueError("grid_n must be at least 101")
    if classify_region(p, params) is Region.P1 and not allow_p1:
        raise RegionError("the splitting program is set up for Pbar and P2 price lists")
    q0, chi = s.q0, s.chi

    kinks = utility_crossings(p, params)
    axis = np.unique(np.concatenate([np.linspace(0.0, 1.0, grid_n), [0.0, q0, 1.0], kinks]))
    xs = np.unique(np.concatenate([np.linspace(0.0, 1.0, fine_n), axis]))
    v = indirect_utility_grid(xs, p, params)
    qcav_xs = quasiconcave_envelope(v)
    pos = np.searchsorted(xs, axis)
    qcav_axis = qcav_xs[pos]

    caps = np.unique(qcav_axis)
    capped_cav = np.empty((len(caps), len(axis)))
    for i, cap in enumerate(caps):
        hx, hy = upper_concave_hull(xs, np.minimum(v, cap))
        capped_cav[i] = np.interp(axis, hx, hy)
    cap_index = np.searchsorted(caps, qcav_axis)

    gamma = axis[:, None]
    beta = axis[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        k = (gamma - q0) / (gamma - beta)
    ok = np.isfinite(k) & (k >= -CONSTRAINT_TOL) & (k <= 1.0 + CONSTRAINT_TOL)
    k = np.clip(np.where(ok, k, 0.0), 0.0, 1.0)
    ok &= k * beta <= chi * q0 + CONSTRAINT_TOL
    ok &= k * (1.0 - beta) <= chi * (1.0 - q0) + CONSTRAINT_TOL
    obj = (1.0 - k) * qcav_axis[:, None] + k * capped_cav[cap_index]
    obj = np.where(ok, obj, -np.inf)

    best = float(obj.max())
    # beta == gamma == q0 with free k
    iq = int(np.searchsorted(axis, q0))
    ks = np.linspace(0.0, 1.0, grid_n)
    ks = ks[ks <= chi + CONSTRAINT_TOL]
    diag = (1.0 - ks) * qcav_axis[iq] + ks * capped_cav[cap_index[iq], iq]
    if not np.isfinite(best) and diag.size == 0:
        raise InfeasibleError("no feasible grid point")

    slack = 1e-12 * (1.0 + abs(best)) if np.isfinite(best) else 0.0
    diag_best = float(diag.max()) if diag.size else -np.inf
    if diag_best > best + slack:
        j = int(np.argmax(diag))
        return ProgramSolution(diag_best, q0, q0, float(ks[j]))
    rows, cols = np.nonzero(obj >= best - slack)
    # ties: smallest beta, then smallest gamma
    order = np.lexsort((rows, cols))
    r, c = int(rows[order[0]]), int(cols[order[0]])
    return ProgramSolution(float(obj[r, c]), float(axis[c]), float(axis[r]), float(k[r, c]))


# -- equilibrium verification ---------------------------------------------------


def _as_mixture(resp: ClientResponse) -> dict[Action, float]:
    if isinstance(resp, Action):
        return {resp: 1.0}
    mix = {Action(a): float(w) for a, w in resp.items() if w > 0}
    if abs(sum(mix.values()) - 1.0) > 1e-9:
        raise ValueError(f"client mixture {resp} does not sum to 1")
    return mix


def skeptical_payoff(p: PriceList, params: ModelParams) -> float:
    """Lowest expert payoff among client best responses at any belief."""
    qs = [0.0, 1.0] + utility_crossings(p, params)
    return min(expert_margin(a, p, params) for q in qs for a in best_responses(q, p, params))


def message_probabilities(s: Scenario, xi: Experiment, sigma: SignallingStrategy) -> dict[str, tuple[float, float]]:
    """Joint probability of (type, message) for each message, as (minor, serious)."""
    prior = (1.0 - s.q0, s.q0)
    out = {}
    for m in xi.messages:
        out[m] = tuple(
            prior[t] * (s.chi * xi.prob(t, m) + (1.0 - s.chi) * sigma.prob(t, m)) for t in (0, 1)
        )
    return out


def verify_equilibrium(
    s: Scenario,
    p: PriceList,
    xi: Experiment,
    sigma: SignallingStrategy,
    rho: Mapping[str, ClientResponse],
    tol: float = 1e-9,
    beliefs: Optional[Mapping[str, float]] = None,
) -> EquilibriumCertificate:
    """Check a strategy profile against the three p-equilibrium conditions.

    Beliefs default to Bayes' rule; pass ``beliefs`` to test a candidate
    belief system. Off-path messages get the client response that is worst
    for the expert at any belief, so the certificate is sufficient, not
    necessary.
    """
    params = s.params
    if xi.messages != sigma.messages:
        raise AlphabetMismatch(f"experiment uses {xi.messages}, signalling uses {sigma.messages}")
    unknown = set(rho) - set(xi.messages)
    if unknown:
        raise AlphabetMismatch(f"client strategy mentions unknown messages {sorted(unknown)}")
    joint = message_probabilities(s, xi, sigma)
    on_path = [m for m in xi.messages if sum(joint[m]) > 0.0]
    off_path = tuple(m for m in xi.messages if m not in on_path)
    missing = [m for m in on_path if m not in rho]
    if missing:
        raise AlphabetMismatch(f"client strategy undefined on on-path messages {missing}")

    post = {m: joint[m][1] / sum(joint[m]) for m in on_path}
    plaus = abs(sum(sum(joint[m]) * post[m] for m in on_path) - s.q0)
    if beliefs is not None:
        eta = {m: float(beliefs[m]) for m in on_path}
        bayes_dev = max([plaus] + [abs(eta[m] - post[m]) for m in on_path])
    else:
        eta = post
        bayes_dev = plaus

    mixes = {m: _as_mixture(rho[m]) for m in on_path}
    client_regret = 0.0
    for m in on_path:
        best = max(client_expected_utility(eta[m], a, p, params) for a in Action)
        for a in mixes[m]:
            client_regret = max(client_regret, best - client_expected_utility(eta[m], a, p, params))

    skeptic = skeptical_payoff(p, params)
    payoff = {m: skeptic for m in off_path}
    for m in on_path:
        payoff[m] = sum(w * expert_margin(a, p, params) for a, w in mixes[m].items())
    top = max(payoff.values())
    expert_regret = 0.0
    for t in (0, 1):
        for m in sigma.messages:
            if sigma.prob(t, m) > 0.0:
                expert_regret = max(expert_regret, top - payoff[m])

    value = sum(sum(joint[m]) * payoff[m] for m in on_path)
    client_pay = 0.0
    for m in on_path:
        for a, w in mixes[m].items():
            client_pay += w * sum(joint[m][t] * client_payoff(t, a, p, params) for t in (0, 1))
    return EquilibriumCertificate(
        bayes_ok=bayes_dev <= tol,
        bayes_deviation=bayes_dev,
        client_opt_ok=client_regret <= tol,
        client_regret=client_regret,
        expert_opt_ok=expert_regret <= tol,
        expert_regret=expert_regret,
        value=value,
        client_value=client_pay - outside_option(s.q0, params),
        posteriors=tuple((m, post[m]) for m in on_path),
        off_path=off_path,
    )


# -- Monte Carlo play ---------------------------------------------------------


def _draw(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    # Inverse-CDF draw; cum rows end at ~1.
    idx = (u[:, None] >= cum).sum(axis=1)
    return np.minimum(idx, cum.shape[1] - 1)


def simulate(
    s: Scenario,
    p: PriceList,
    xi: Experiment,
    sigma: SignallingStrategy,
    rho: Mapping[str, ClientResponse],
    n: int,
    seed: int,
) -> SimReport:
    """Play the pricing subgame ``n`` times with a PCG64 stream seeded by ``seed``."""
    if n < 1:
        raise ValueError("n must be positive")
    if xi.messages != sigma.messages:
        raise AlphabetMismatch("experiment and signalling alphabets differ")
    params = s.params
    rng = np.random.Generator(np.random.PCG64(seed))
    msgs = xi.messages
    n_msg = len(msgs)

    serious = (rng.random(n) < s.q0).astype(np.int64)
    xi_cum = np.cumsum(np.array(xi.rows), axis=1)
    sig_cum = np.cumsum(np.array(sigma.rows), axis=1)
    from_xi = _draw(xi_cum[serious], rng.random(n))
    from_sigma = _draw(sig_cum[serious], rng.random(n))
    credible = rng.random(n) < s.chi
    msg = np.where(credible, from_xi, from_sigma)

    act_cum = np.full((n_msg, 3), np.nan)
    for i, m in enumerate(msgs):
        if m in rho:
            mix = _as_mixture(rho[m])
            act_cum[i] = np.cumsum([mix.get(a, 0.0) for a in Action])
    if np.isnan(act_cum[msg]).any():
        raise AlphabetMismatch("a drawn message has no client response")
    action = _draw(act_cum[msg], rng.random(n))

    margins = np.array([expert_margin(a, p, params) for a in Action])
    client_table = np.array([[client_payoff(t, a, p, params) for a in Action] for t in (0, 1)])
    expert_pay = margins[action]
    client_pay = client_table[serious, action]

    atoms = []
    for i, m in enumerate(msgs):
        hit = msg == i
        count = int(hit.sum())
        if count:
            atoms.append(
                SimAtom(m, float(serious[hit].mean()), float(expert_pay[hit].mean()), count / n)
            )
    std_err = float(expert_pay.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    mean_client = float(client_pay.mean())
    return SimReport(
        n=n,
        seed=seed,
        empirical_atoms=tuple(atoms),
        mean_expert_payoff=float(expert_pay.mean()),
        mean_client_payoff=mean_client,
        mean_client_value=mean_client - outside_option(s.q0, params),
        std_err=std_err,
    )


# -- price search ---------------------------------------------------------------


def price_grid(params: ModelParams, grid_n: int) -> list[PriceList]:
    out = []
    for p1 in np.linspace(params.c1, params.l1, grid_n):
        for p2 in np.linspace(params.c2, params.l2, grid_n):
            if p2 >= p1:
                out.append(PriceList(float(p1), float(p2)))
    return out


def price_search(s: Scenario, grid_n: int = 101) -> PriceSearchResult:
    """Best price list on a grid over P, with the analytic candidates added."""
    if grid_n < 51:
        raise ValueError("grid_n must be at least 51")
    params = s.params
    candidates = [params.equal_margin_prices()]
    p2_star = optimal_p2(s.q0, s.chi, params)
    if params.l1 - params.c1 + params.c2 <= p2_star <= params.l2:
        candidates.insert(0, PriceList(params.l1, p2_star))
    best_p, best_v = None, -np.inf
    for p in candidates + price_grid(params, grid_n):
        val = v_star(s.q0, s.chi, p, params).value
        if val > best_v + EPS:
            best_p, best_v = p, val
    return PriceSearchResult(best_p, best_v)


def profit_search(q0: float, params: ModelParams, grid_n: int = 301) -> float:
    """Discriminatory-pricing profit by grid search of the indirect utility over P."""
    return max(indirect_utility(q0, p, params) for p in price_grid(params, grid_n))


__all__ = [
    "EquilibriumCertificate",
    "PriceSearchResult",
    "ProgramSolution",
    "SimAtom",
    "SimReport",
    "cutoff_by_bisection",
    "indirect_utility_grid",
    "message_probabilities",
    "price_grid",
    "price_search",
    "profit_search",
    "quasiconcave_envelope",
    "simulate",
    "skeptical_payoff",
    "solve_program",
    "upper_concave_hull",
    "utility_crossings",
    "verify_equilibrium",
]
