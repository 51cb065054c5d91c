"""Random instances shared by the test modules."""

import random

from hypothesis import strategies as st

from credence import ModelParams, PriceList

REF = ModelParams(1.0, 3.0, 4.0, 10.0)


def random_params(rng: random.Random) -> ModelParams:
    c1 = rng.uniform(0.0, 5.0)
    c2 = c1 + rng.uniform(0.1, 5.0)
    l1 = c1 + rng.uniform(0.1, 5.0)
    l2 = c2 + (l1 - c1) + rng.uniform(0.1, 5.0)
    return ModelParams(c1, c2, l1, l2)


def random_p2_side(rng: random.Random, params: ModelParams, pbar_share: float = 0.1) -> PriceList:
    """A list in Pbar or P2."""
    p1 = rng.uniform(params.c1, params.l1)
    lo = max(p1, params.c2, p1 - params.c1 + params.c2)
    if rng.random() < pbar_share:
        return PriceList(p1, lo)
    return PriceList(p1, rng.uniform(lo, params.l2))


def random_strict_p2(rng: random.Random, params: ModelParams) -> PriceList:
    while True:
        p1 = rng.uniform(params.c1, params.l1)
        lo = max(p1, params.c2, p1 - params.c1 + params.c2) + 1e-3
        if lo < params.l2:
            return PriceList(p1, rng.uniform(lo, params.l2))


def random_p1(rng: random.Random, params: ModelParams) -> PriceList:
    """A list strictly inside P1."""
    while True:
        p1 = rng.uniform(params.c1, params.l1)
        lo = max(p1, params.c2)
        hi = min(params.l2, p1 - params.c1 + params.c2) - 1e-3
        if hi > lo:
            return PriceList(p1, rng.uniform(lo, hi))


def random_pbar(rng: random.Random, params: ModelParams, p1_max: float | None = None) -> PriceList:
    """An equal-margin list; ``p1`` stays below ``p1_max`` (default l1)."""
    top = params.l1 if p1_max is None else p1_max
    while True:
        p1 = rng.uniform(params.c1, top)
        p2 = p1 - params.c1 + params.c2
        if p2 <= params.l2:
            return PriceList(p1, p2)


@st.composite
def params_st(draw) -> ModelParams:
    c1 = draw(st.floats(0.0, 5.0))
    c2 = c1 + draw(st.floats(0.1, 5.0))
    l1 = c1 + draw(st.floats(0.1, 5.0))
    l2 = c2 + (l1 - c1) + draw(st.floats(0.1, 5.0))
    return ModelParams(c1, c2, l1, l2)


@st.composite
def any_prices_st(draw, params: ModelParams) -> PriceList:
    p1 = draw(st.floats(params.c1, params.l1))
    p2 = draw(st.floats(max(p1, params.c2), params.l2))
    return PriceList(p1, p2)


@st.composite
def p2_side_st(draw, params: ModelParams) -> PriceList:
    p1 = draw(st.floats(params.c1, params.l1))
    lo = max(p1, params.c2, p1 - params.c1 + params.c2)
    return PriceList(p1, draw(st.floats(lo, params.l2)))


probs = st.floats(0.01, 0.99)
