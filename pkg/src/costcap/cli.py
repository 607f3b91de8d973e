"""Command-line front end.

Subcommands write CSV to ``--output`` (or stdout) and a one-line summary
per grid point to stderr.  Exit status: 0 on success, 2 for configuration
errors, 3 when a numeric budget runs out, 4 for infeasible problems.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import __version__, lattice
from .analytic import AwgnSpec, ExpChannelSpec, awgn_bound_point, exp_bound_point
from .bounds import TYPE_BUDGET, DmcBounds, strong_converse_curve
from .dmc import DmcChannel, solve_capacity_cost
from .errors import BudgetError, ConfigError, CostcapError, DomainError, Infeasible, NoPositiveSolution
from .formats import JSCC_COLUMNS, bounds_rows, fmt, load_channel, load_source, rate_scale, to_csv, write_text
from .jscc import JsccConverse, jscc_band, jscc_gaussian_approx, solve_rate_distortion

BUDGET_ENV = "COSTCAP_BUDGET_CELLS"
COMMANDS = ("capacity", "bounds", "strong-converse", "awgn", "exp", "jscc")


# argument parsing ------------------------------------------------------------

def parse_n_list(text: str) -> list[int]:
    """``"500"``, ``"100,200"`` or inclusive ``"start:stop:step"``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        try:
            if ":" in part:
                bits = [int(b) for b in part.split(":")]
                if len(bits) == 2:
                    bits.append(1)
                if len(bits) != 3 or bits[2] <= 0:
                    raise ValueError
                start, stop, step = bits
                out.extend(range(start, stop + 1, step))
            else:
                out.append(int(part))
        except ValueError:
            raise ConfigError(f"bad blocklength spec {part!r}; use N, N1,N2 or start:stop:step") from None
    if not out:
        raise ConfigError("empty blocklength list")
    bad = [n for n in out if n < 1]
    if bad:
        raise ConfigError(f"blocklengths must be at least 1, got {bad[0]}")
    return out


def parse_eps_list(text: str) -> list[float]:
    out = []
    for part in str(text).split(","):
        try:
            e = float(part)
        except ValueError:
            raise ConfigError(f"bad epsilon {part!r}") from None
        if not 0 < e < 1:
            raise ConfigError(f"epsilon must lie in (0, 1), got {part.strip()}")
        out.append(e)
    return out


def parse_channel(text: str) -> DmcChannel:
    """A JSON spec path, or the shorthand ``bsc:DELTA`` (Hamming cost)."""
    if text.startswith("bsc:"):
        try:
            delta = float(text[4:])
        except ValueError:
            raise ConfigError(f"bad channel shorthand {text!r}") from None
        if not 0 <= delta <= 1:
            raise ConfigError(f"crossover must lie in [0, 1], got {delta}")
        return DmcChannel.bsc(delta)
    return load_channel(text)


@dataclass
class RunConfig:
    command: str
    channel_path: str | None = None
    source_path: str | None = None
    beta: float | None = None
    epsilons: list = field(default_factory=list)
    n_list: list = field(default_factory=list)
    k_list: list | None = None
    units: str = "bits"
    lattice_step: float | None = None
    cell_budget: int = lattice.DEFAULT_BUDGET
    type_budget: int = TYPE_BUDGET
    threads: int = 1
    output_path: str | None = None
    plot_path: str | None = None
    density: str = "plain"
    snr: float | None = None
    rate: float | None = None
    alpha: float | None = None
    distortion: float | None = None
    quiet: bool = False


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--units", choices=("bits", "nats"), default="bits",
                        help="units for information quantities in the output (default: bits)")
    common.add_argument("--output", "-o", help="CSV destination (default: stdout)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for grid points")
    common.add_argument("--quiet", "-q", action="store_true", help="suppress per-point summaries")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--n", required=True, help="blocklengths: N, N1,N2,... or inclusive start:stop:step")
    grid.add_argument("--eps", default="1e-3", help="comma-separated error probabilities in (0, 1)")

    lat = argparse.ArgumentParser(add_help=False)
    lat.add_argument("--lattice-step", type=float, help="lattice step in nats (default: automatic)")
    lat.add_argument("--cell-budget", type=int,
                     help=f"max lattice cells per distribution (env {BUDGET_ENV} sets the default)")
    lat.add_argument("--type-budget", type=int, default=TYPE_BUDGET, help="max admissible types")

    p = argparse.ArgumentParser(prog="costcap", description="Finite-blocklength bounds under input cost constraints.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("capacity", parents=[common], help="capacity-cost and dispersion-cost")
    s.add_argument("--channel", required=True, help="channel JSON file or bsc:DELTA")
    s.add_argument("--beta", type=float, required=True)

    s = sub.add_parser("bounds", parents=[common, grid, lat], help="converse, achievability and normal approximation")
    s.add_argument("--channel", required=True, help="channel JSON file or bsc:DELTA")
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--density", choices=("plain", "tilted"), default="plain", help="converse statistic")
    s.add_argument("--plot-data", help="also write rate-vs-n plot data here")

    s = sub.add_parser("strong-converse", parents=[common, lat], help="converse error bound above capacity")
    s.add_argument("--channel", required=True, help="channel JSON file or bsc:DELTA")
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--n", required=True)
    s.add_argument("--rate", type=float, required=True, help="rate per channel use, in --units")
    s.add_argument("--alpha", type=float, required=True, help="per-use margin gamma / n in nats")

    s = sub.add_parser("awgn", parents=[common, grid], help="AWGN converse under a power limit")
    s.add_argument("--snr", type=float, required=True, help="power limit P (noise variance 1)")
    s.add_argument("--plot-data")

    s = sub.add_parser("exp", parents=[common, grid], help="exponential-noise channel converse")
    s.add_argument("--beta", type=float, required=True, help="mean input limit")
    s.add_argument("--plot-data")

    s = sub.add_parser("jscc", parents=[common, grid, lat], help="lossy joint source-channel coding")
    s.add_argument("--source", required=True, help="source JSON file")
    s.add_argument("--d", type=float, required=True, help="distortion level")
    s.add_argument("--channel", required=True, help="channel JSON file or bsc:DELTA")
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--k", help="source block lengths to test (default: Gaussian approximation, rounded down)")
    return p


def config_from_args(ns: argparse.Namespace, environ=os.environ) -> RunConfig:
    cfg = RunConfig(command=ns.command, units=ns.units, output_path=ns.output, quiet=ns.quiet)
    if ns.threads < 1:
        raise ConfigError("--threads must be at least 1")
    cfg.threads = ns.threads
    for name in ("beta", "density", "snr", "rate", "alpha"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    cfg.channel_path = getattr(ns, "channel", None)
    cfg.source_path = getattr(ns, "source", None)
    cfg.distortion = getattr(ns, "d", None)
    cfg.plot_path = getattr(ns, "plot_data", None)
    if hasattr(ns, "n"):
        cfg.n_list = parse_n_list(ns.n)
    if hasattr(ns, "eps"):
        cfg.epsilons = parse_eps_list(ns.eps)
    if getattr(ns, "k", None):
        cfg.k_list = [int(k) for k in parse_n_list(ns.k)]
    if hasattr(ns, "lattice_step"):
        if ns.lattice_step is not None and not ns.lattice_step > 0:
            raise ConfigError("--lattice-step must be positive")
        cfg.lattice_step = ns.lattice_step
        cfg.type_budget = ns.type_budget
        if ns.cell_budget is not None:
            cfg.cell_budget = ns.cell_budget
        elif environ.get(BUDGET_ENV):
            try:
                cfg.cell_budget = int(environ[BUDGET_ENV])
            except ValueError:
                raise ConfigError(f"{BUDGET_ENV} must be an integer") from None
        if cfg.cell_budget < 1 or cfg.type_budget < 1:
            raise ConfigError("budgets must be positive")
    return cfg


# commands --------------------------------------------------------------------

def _log(cfg: RunConfig, msg: str):
    if not cfg.quiet:
        print(msg, file=sys.stderr)


def _map(cfg: RunConfig, fn, items):
    """Apply ``fn`` to ``items``; results come back in input order."""
    if cfg.threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(fn, items))


def _solve(cfg: RunConfig):
    ch = parse_channel(cfg.channel_path)
    return ch, solve_capacity_cost(ch, cfg.beta)


def run_capacity(cfg: RunConfig) -> str:
    ch, sol = _solve(cfg)
    l2 = 1 / math.log(2)
    lines = [
        f"C      = {fmt(sol.capacity * l2)} bits = {fmt(sol.capacity)} nats",
        f"lambda = {fmt(sol.lambda_star * l2)} bits = {fmt(sol.lambda_star)} nats",
        f"V      = {fmt(sol.dispersion * l2 * l2)} bits^2 = {fmt(sol.dispersion)} nats^2",
        "P_X*   = " + " ".join(fmt(p) for p in sol.p_x_star),
    ]
    if sol.kink:
        lines.append(f"note: C(beta) has a corner at beta; multipliers span {sol.lambda_interval}")
    return "\n".join(lines) + "\n"


def run_bounds(cfg: RunConfig):
    ch, sol = _solve(cfg)

    def one(n):
        ev = DmcBounds(ch, sol, n, step=cfg.lattice_step, type_budget=cfg.type_budget,
                       cell_budget=cfg.cell_budget, density=cfg.density)
        return [ev.point(e) for e in cfg.epsilons]

    points = [p for group in _map(cfg, one, cfg.n_list) for p in group]
    s = rate_scale(cfg.units)
    for p in points:
        _log(cfg, f"n={p.n} eps={fmt(p.epsilon)} converse={fmt(p.log_m_converse * s)} "
                  f"achievability={fmt(p.log_m_achievability * s)} normal={fmt(p.log_m_normal * s)} {cfg.units}")
    return points, None


def run_analytic(cfg: RunConfig):
    if cfg.command == "awgn":
        make, evaluate, name = (lambda n: AwgnSpec(cfg.snr, n)), awgn_bound_point, "awgn"
    else:
        make, evaluate, name = (lambda n: ExpChannelSpec(cfg.beta, n)), exp_bound_point, "exp"
    grid = [(n, e) for n in cfg.n_list for e in cfg.epsilons]
    points = _map(cfg, lambda ne: evaluate(make(ne[0]), ne[1]), grid)
    s = rate_scale(cfg.units)
    for p in points:
        flag = " (approximate)" if p.diagnostics.get("approximate") else ""
        _log(cfg, f"n={p.n} eps={fmt(p.epsilon)} converse={fmt(p.log_m_converse * s)} "
                  f"normal={fmt(p.log_m_normal * s)} {cfg.units}{flag}")
    return points, name


def run_strong_converse(cfg: RunConfig) -> str:
    ch, sol = _solve(cfg)
    rate = cfg.rate / rate_scale(cfg.units)

    def one(n):
        return strong_converse_curve(ch, sol, rate, [n], cfg.alpha, step=cfg.lattice_step)[0]

    rows = []
    for n, eps in _map(cfg, one, cfg.n_list):
        _log(cfg, f"n={n} converse_eps={fmt(eps)}")
        rows.append([fmt(n), fmt(cfg.rate), fmt(cfg.alpha), fmt(eps)])
    return to_csv(["n", "rate", "alpha_nats", "converse_eps"], rows)


def run_jscc(cfg: RunConfig) -> str:
    ch, cc = _solve(cfg)
    src = load_source(cfg.source_path)
    rd = solve_rate_distortion(src, cfg.distortion)
    grid = [(n, e) for n in cfg.n_list for e in cfg.epsilons]

    def one(ne):
        n, e = ne
        try:
            approx = jscc_gaussian_approx(rd, cc, n, e)
        except NoPositiveSolution:
            approx = float("nan")
        ks = cfg.k_list if cfg.k_list is not None else ([] if math.isnan(approx) else [int(approx)])
        if not ks:
            return [[None, n, e, float("nan"), approx]]
        ev = DmcBounds(ch, cc, n, step=cfg.lattice_step, type_budget=cfg.type_budget, cell_budget=cfg.cell_budget)
        return [[k, n, e, JsccConverse(src, rd, ch, cc, k, n, channel_eval=ev).best()[0], approx] for k in ks]

    rows = []
    for group in _map(cfg, one, grid):
        for k, n, e, conv, approx in group:
            _log(cfg, f"k={fmt(k)} n={n} eps={fmt(e)} converse_eps={fmt(conv)} approx_k={fmt(approx)}")
            rows.append([fmt(k), fmt(n), fmt(e), fmt(cfg.distortion), fmt(cfg.beta), fmt(conv), fmt(approx),
                         fmt(jscc_band(cc, n))])
    return to_csv(JSCC_COLUMNS, rows)


def emit_plot_data(points, path, units: str = "bits"):
    """Write rate-vs-n series (converse, achievability, normal) as CSV columns."""
    if not points:
        raise DomainError("no points to plot")
    s = rate_scale(units)
    header = ["converse_n", "converse_rate", "achievability_n", "achievability_rate", "normal_n", "normal_rate"]
    rows = []
    for p in points:
        rows.append([fmt(p.n), fmt(p.log_m_converse * s / p.n), fmt(p.n), fmt(p.log_m_achievability * s / p.n),
                     fmt(p.n), fmt(p.log_m_normal * s / p.n)])
    write_text(to_csv(header, rows), path)


def run(cfg: RunConfig) -> str:
    """Execute a configuration and return the text written to the output."""
    if cfg.command == "capacity":
        return run_capacity(cfg)
    if cfg.command == "strong-converse":
        return run_strong_converse(cfg)
    if cfg.command == "jscc":
        return run_jscc(cfg)
    if cfg.command == "bounds":
        points, channel = run_bounds(cfg)
    elif cfg.command in ("awgn", "exp"):
        points, channel = run_analytic(cfg)
    else:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.plot_path:
        emit_plot_data(points, cfg.plot_path, cfg.units)
    return to_csv(*bounds_rows(points, cfg.units, channel))


def exit_code(err: BaseException) -> int:
    if isinstance(err, (ConfigError, DomainError)):
        return 2
    if isinstance(err, BudgetError):
        return 3
    if isinstance(err, Infeasible):
        return 4
    return 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = config_from_args(ns)
        text = run(cfg)
        if cfg.output_path:
            write_text(text, cfg.output_path)
        else:
            sys.stdout.write(text)
    except CostcapError as e:
        print(f"costcap: {type(e).__name__}: {e}", file=sys.stderr)
        return exit_code(e)
    return 0
