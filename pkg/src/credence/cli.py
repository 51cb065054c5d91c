"""Command-line front end.

Every subcommand writes a UTF-8 CSV (header row, 17 significant digits, LF
line endings) to ``--out`` or stdout, and a one-line summary to stdout when
``--out`` is given (stderr otherwise).

Exit codes: 0 ok, 2 configuration error, 3 violated model assumption.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import equilibrium as eq
from . import oracle, welfare
from .envelopes import pi, pi_envelopes
from .errors import AssumptionViolation, ConfigError, CredenceError
from .model import ModelParams, PriceList, Scenario, check_prices

THREADS_ENV = "CREDENCE_THREADS"
DEFAULTS = {"c1": 1.0, "c2": 3.0, "l1": 4.0, "l2": 10.0}
FIGURES = ("ev-surface", "ev-slice", "p-eq-value", "u-star", "public-credibility", "benchmarks")
COMMANDS = ("value", "price", "welfare", "sweep", "figure", "simulate", "verify", "oracle")


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if not 0.0 <= self.lo <= self.hi <= 1.0:
            raise ConfigError(f"range [{self.lo}, {self.hi}] must lie inside [0, 1]")
        if self.steps < 2:
            raise ConfigError(f"a sweep needs at least 2 steps, got {self.steps}")

    def values(self) -> list[float]:
        return [float(x) for x in np.linspace(self.lo, self.hi, self.steps)]


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: ModelParams
    q0: Optional[float] = None
    chi: Optional[float] = None
    prices: Optional[PriceList] = None
    q0_axis: Optional[Axis] = None
    chi_axis: Optional[Axis] = None
    figure: Optional[str] = None
    seed: int = 0
    n: int = 100_000
    grid_n: int = 401
    output: Optional[str] = None
    threads: int = 1


# -- CSV ---------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def write_csv(stream, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])


def _parse_cell(text: str):
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(source) -> tuple[list[str], list[list]]:
    """Read a CSV written by this module; ``source`` is a path or text stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_csv(fh)
    reader = csv.reader(source)
    header = next(reader)
    return header, [[_parse_cell(c) for c in row] for row in reader]


# -- configuration ---------------------------------------------------------------


def load_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, value = (s.strip() for s in line.split("=", 1))
                out[key.replace("-", "_")] = value
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return out


def _threads_default() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    for name in ("c1", "c2", "l1", "l2", "q0", "chi", "p1", "p2"):
        common.add_argument(f"--{name}", type=float)
    for name in ("q0-min", "q0-max", "chi-min", "chi-max"):
        common.add_argument(f"--{name}", type=float)
    common.add_argument("--q0-steps", type=int)
    common.add_argument("--chi-steps", type=int)
    common.add_argument("--steps", type=int, help="steps for both sweep axes")
    common.add_argument("--seed", type=int)
    common.add_argument("--n", type=int, help="number of simulated plays")
    common.add_argument("--grid-n", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--out", help="output CSV path (default stdout)")

    parser = argparse.ArgumentParser(prog="credence", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd, parents=[common])
        if cmd == "figure":
            sp.add_argument("figure", choices=FIGURES)
    return parser


def _get(args: argparse.Namespace, cfg: dict, key: str, cast, default=None):
    val = getattr(args, key, None)
    if val is not None:
        return val
    if key in cfg:
        try:
            return cast(cfg[key])
        except ValueError:
            raise ConfigError(f"config value {key} = {cfg[key]!r} is not a valid {cast.__name__}") from None
    return default


def make_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    cfg = load_config_file(args.config) if args.config else {}
    params = ModelParams(*(_get(args, cfg, k, float, DEFAULTS[k]) for k in ("c1", "c2", "l1", "l2")))

    p1 = _get(args, cfg, "p1", float)
    p2 = _get(args, cfg, "p2", float)
    prices = None
    if (p1 is None) != (p2 is None):
        raise ConfigError("give both --p1 and --p2 or neither")
    if p1 is not None:
        prices = PriceList(p1, p2)
        try:
            check_prices(prices, params)
        except CredenceError as exc:
            raise ConfigError(str(exc)) from exc

    steps = _get(args, cfg, "steps", int, 101)
    q0_axis = Axis(
        _get(args, cfg, "q0_min", float, 0.0),
        _get(args, cfg, "q0_max", float, 1.0),
        _get(args, cfg, "q0_steps", int, steps),
    )
    chi_axis = Axis(
        _get(args, cfg, "chi_min", float, 0.0),
        _get(args, cfg, "chi_max", float, 1.0),
        _get(args, cfg, "chi_steps", int, steps),
    )
    threads = _get(args, cfg, "threads", int) or _threads_default()
    return RunConfig(
        command=args.command,
        params=params,
        q0=_get(args, cfg, "q0", float),
        chi=_get(args, cfg, "chi", float),
        prices=prices,
        q0_axis=q0_axis,
        chi_axis=chi_axis,
        figure=getattr(args, "figure", None),
        seed=_get(args, cfg, "seed", int, 0),
        n=_get(args, cfg, "n", int, 100_000),
        grid_n=_get(args, cfg, "grid_n", int, 401),
        output=_get(args, cfg, "out", str),
        threads=threads,
    )


# -- commands ----------------------------------------------------------------------


@dataclass
class Table:
    header: list[str]
    rows: list[list]
    summary: str = ""


def _scenario(cfg: RunConfig) -> Scenario:
    if cfg.q0 is None or cfg.chi is None:
        raise ConfigError(f"{cfg.command} needs --q0 and --chi")
    try:
        return Scenario(cfg.params, cfg.q0, cfg.chi)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _prices(cfg: RunConfig) -> PriceList:
    if cfg.prices is None:
        raise ConfigError(f"{cfg.command} needs --p1 and --p2")
    return cfg.prices


def _grid_map(cfg: RunConfig, fn: Callable, points: list) -> list:
    # Results come back in input order whatever the scheduling.
    if cfg.threads <= 1:
        return [fn(x) for x in points]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(fn, points))


def _open_grid(axis: Axis) -> list[float]:
    # Priors must stay inside (0, 1) wherever a Scenario is built.
    return [x for x in axis.values() if 0.0 < x < 1.0]


def cmd_value(cfg: RunConfig) -> Table:
    s = _scenario(cfg)
    ev = eq.equilibrium_value(s)
    op = eq.optimal_prices(s)
    p = op.canonical
    row = [s.q0, s.chi, ev, p.p1, p.p2, op.unique, op.p2_interval[0], op.p2_interval[1]]
    return Table(
        ["q0", "chi", "ev", "p1", "p2", "unique", "p2_lo", "p2_hi"],
        [row],
        f"ev = {ev:.10g}, optimal p = ({p.p1:.10g}, {p.p2:.10g})",
    )


def cmd_price(cfg: RunConfig) -> Table:
    s = _scenario(cfg)
    op = eq.optimal_prices(s)
    found = oracle.price_search(s, grid_n=min(cfg.grid_n, 201))
    closed = eq.equilibrium_value(s)
    row = [s.q0, s.chi, op.canonical.p1, op.canonical.p2, closed, found.prices.p1, found.prices.p2, found.value]
    return Table(
        ["q0", "chi", "p1", "p2", "ev", "search_p1", "search_p2", "search_value"],
        [row],
        f"closed form ({op.canonical.p1:.10g}, {op.canonical.p2:.10g}) -> {closed:.10g}; "
        f"grid search ({found.prices.p1:.10g}, {found.prices.p2:.10g}) -> {found.value:.10g}",
    )


def cmd_welfare(cfg: RunConfig) -> Table:
    s = _scenario(cfg)
    vs = welfare.client_value_set(s)
    header = ["q0", "chi", "surplus", "ev", "eu_star", "value_lo", "value_hi"]
    row = [s.q0, s.chi, welfare.total_surplus(s.q0, s.params), eq.equilibrium_value(s), welfare.eu_star(s), vs.lo, vs.hi]
    if cfg.prices is not None:
        header.append("u_star")
        row.append(welfare.u_star(s.q0, cfg.prices, s.params))
    return Table(header, [row], f"client values in [{vs.lo:.10g}, {vs.hi:.10g}]")


def cmd_sweep(cfg: RunConfig) -> Table:
    points = [(q, c) for q in _open_grid(cfg.q0_axis) for c in cfg.chi_axis.values()]
    params, p = cfg.params, cfg.prices

    def one(pt):
        q0, chi = pt
        s = Scenario(params, q0, chi)
        op = eq.optimal_prices(s)
        row = [q0, chi, eq.equilibrium_value(s), op.canonical.p1, op.canonical.p2, welfare.eu_star(s)]
        if p is not None:
            pv = eq.p_eq_value(s, p)
            row += [pv.value, pv.mode.value]
        return row

    header = ["q0", "chi", "ev", "p1", "p2", "eu_star"]
    if p is not None:
        header += ["v_p", "mode"]
    rows = _grid_map(cfg, one, points)
    return Table(header, rows, f"{len(rows)} scenarios")


def ev_slice_kink(chi: float, params: ModelParams) -> float:
    """Prior at which ``chi`` equals the credibility threshold."""
    c, d = params.cost_gap, params.loss_gap
    return c * (1.0 - chi) / (d - chi * c)


def cmd_figure(cfg: RunConfig) -> Table:
    params = cfg.params
    name = cfg.figure
    if name == "ev-surface":
        points = [(q, c) for q in cfg.q0_axis.values() for c in cfg.chi_axis.values()]
        rows = _grid_map(cfg, lambda pt: [pt[0], pt[1], eq.ev_star(pt[0], pt[1], params)], points)
        return Table(["q0", "chi", "ev"], rows, f"{len(rows)} grid points")
    if name == "ev-slice":
        if cfg.chi is None:
            raise ConfigError("ev-slice needs --chi")
        chi = cfg.chi
        rows = [[q, chi, eq.ev_star(q, chi, params)] for q in cfg.q0_axis.values()]
        return Table(["q0", "chi", "ev"], rows, f"kink at q0 = {ev_slice_kink(chi, params):.10g}")
    if name == "p-eq-value":
        p = _prices(cfg)
        points = [(q, c) for q in _open_grid(cfg.q0_axis) for c in cfg.chi_axis.values()]

        def one(pt):
            pv = eq.v_star(pt[0], pt[1], p, params)
            return [pt[0], pt[1], pv.value, pv.mode.value]

        rows = _grid_map(cfg, one, points)
        return Table(["q0", "chi", "value", "mode"], rows, f"{len(rows)} grid points")
    if name == "u-star":
        p = _prices(cfg)
        rows = [[q, welfare.u_star(q, p, params)] for q in cfg.q0_axis.values()]
        return Table(["q0", "u_star"], rows, f"{len(rows)} priors")
    if name == "public-credibility":
        points = [(q, c) for q in _open_grid(cfg.q0_axis) for c in cfg.chi_axis.values()]

        def one(pt):
            opt = eq.public_credibility_optimum(Scenario(params, pt[0], pt[1]))
            return [pt[0], pt[1], opt.value, opt.q_pc, eq.ev_star(pt[0], pt[1], params)]

        rows = _grid_map(cfg, one, points)
        return Table(["q0", "chi", "ev_pc", "q_pc", "ev"], rows, f"{len(rows)} grid points")
    if name == "benchmarks":
        pe = pi_envelopes(params)
        rows = [
            [q, pi(q, params), pe.qcav(q), pe.cav(q), eq.benchmark_value(q, "chi0", params), eq.benchmark_value(q, "chi1", params)]
            for q in cfg.q0_axis.values()
        ]
        return Table(["q0", "pi", "qcav_pi", "cav_pi", "ev_chi0", "ev_chi1"], rows, f"{len(rows)} priors")
    raise ConfigError(f"unknown figure {name!r}")


def cmd_simulate(cfg: RunConfig) -> Table:
    s = _scenario(cfg)
    p = _prices(cfg)
    prof = eq.equilibrium_profile(s, p)
    rep = oracle.simulate(s, p, prof.xi, prof.sigma, prof.rho, cfg.n, cfg.seed)
    rows = [[a.message, a.posterior, a.expert_payoff, a.frequency] for a in rep.empirical_atoms]
    closed = eq.p_eq_value(s, p).value
    return Table(
        ["message", "posterior", "expert_payoff", "frequency"],
        rows,
        f"n = {rep.n}, seed = {rep.seed}: mean expert payoff {rep.mean_expert_payoff:.10g} "
        f"(std err {rep.std_err:.3g}, closed form {closed:.10g}), mean client value {rep.mean_client_value:.10g}",
    )


def cmd_verify(cfg: RunConfig) -> Table:
    s = _scenario(cfg)
    p = _prices(cfg)
    prof = eq.equilibrium_profile(s, p)
    cert = oracle.verify_equilibrium(s, p, prof.xi, prof.sigma, prof.rho)
    row = [
        s.q0, s.chi, p.p1, p.p2, cert.bayes_ok, cert.bayes_deviation, cert.client_opt_ok,
        cert.client_regret, cert.expert_opt_ok, cert.expert_regret, cert.value,
    ]
    header = [
        "q0", "chi", "p1", "p2", "bayes_ok", "bayes_deviation", "client_opt_ok",
        "client_regret", "expert_opt_ok", "expert_regret", "value",
    ]
    verdict = "equilibrium" if cert.is_equilibrium else "NOT an equilibrium"
    return Table(header, [row], f"canonical profile is {verdict}, value {cert.value:.10g}")


def cmd_oracle(cfg: RunConfig) -> Table:
    s = _scenario(cfg)
    p = _prices(cfg)
    sol = oracle.solve_program(s, p, grid_n=cfg.grid_n)
    closed = eq.p_eq_value(s, p)
    row = [s.q0, s.chi, p.p1, p.p2, closed.value, closed.mode.value, sol.value, sol.beta, sol.gamma, sol.k]
    return Table(
        ["q0", "chi", "p1", "p2", "closed_form", "mode", "program", "beta", "gamma", "k"],
        [row],
        f"closed form {closed.value:.10g}, program {sol.value:.10g}",
    )


HANDLERS: dict[str, Callable[[RunConfig], Table]] = {
    "value": cmd_value,
    "price": cmd_price,
    "welfare": cmd_welfare,
    "sweep": cmd_sweep,
    "figure": cmd_figure,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    table = HANDLERS[cfg.command](cfg)
    if cfg.output:
        try:
            with open(cfg.output, "w", newline="", encoding="utf-8") as fh:
                write_csv(fh, table.header, table.rows)
        except OSError as exc:
            print(f"error: cannot write {cfg.output}: {exc}", file=stderr)
            return 1
        if table.summary:
            print(table.summary, file=stdout)
    else:
        write_csv(stdout, table.header, table.rows)
        if table.summary:
            print(table.summary, file=stderr)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = make_config(argv)
        return run(cfg)
    except AssumptionViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, CredenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
