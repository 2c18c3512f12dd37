"""Command-line front end: CSV sweeps and threshold reports.

Sweep cells are indexed row-major and Monte Carlo cells draw their stream
from (master_seed, cell_index), so output files are byte-identical across
reruns and worker counts.  Numeric cells use the shortest round-trip decimal
representation; undefined cells render as the literals "nan", "inf", "-inf",
or empty (oracle above its enumeration cap).

Exit codes: 0 success, 2 invalid arguments or I/O failure, 3 numerical
non-identifiability in a scalar (non-sweep) computation.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import analysis
from .channels import (
    ChannelParams,
    bell_probs_belldiag,
    bell_probs_isotropic,
    bell_probs_werner,
    gen_params_from_qubit,
)
from .estimation import (
    NonIdentifiableError,
    belldiag_estimator,
    isotropic_estimator,
    werner_estimator,
)
from .measurement import EnumerationCapError, SeedSpec, n_outcomes
from .states import CHSH_THRESHOLD, SEPARABILITY_THRESHOLD, BellDiagonal

DEFAULT_SEED = 20020131
DEFAULT_ORACLE_CAP = 200_000

SIMULATE_HEADER = "scheme,N,F_or_lambda,p1,p2,p3,closed_form,mc_mean,mc_stderr,oracle"


@dataclass(frozen=True)
class SweepConfig:
    """Resolved settings shared by the sweep commands.

    ``ranges`` carries the per-command grid and model knobs (already parsed);
    the master seed defaults to the documented constant so reruns reproduce.
    """

    command: str
    seed: int = DEFAULT_SEED
    out: str = "-"
    steps: int = 50
    trials: int = 10_000
    workers: int = 1
    clip: bool = False
    ranges: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.trials < 2:
            raise ValueError("trials must be at least 2")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    @classmethod
    def from_args(cls, args: argparse.Namespace, **ranges) -> "SweepConfig":
        return cls(
            command=args.command,
            seed=int(args.seed),
            out=args.out,
            steps=int(getattr(args, "steps", 1)),
            trials=int(getattr(args, "trials", 2)),
            workers=int(args.workers),
            clip=bool(getattr(args, "clip", False)),
            ranges=ranges,
        )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _write_csv(out: str, header: str, rows: Iterable[Sequence]) -> None:
    body = "\n".join(",".join(_fmt(v) for v in row) for row in rows)
    text = header + "\n" + (body + "\n" if body else "")
    if out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _map_cells(fn: Callable, cells: list, workers: int) -> list:
    if workers <= 1:
        return [fn(cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def _parse_floats(text: str, flag: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"could not parse {flag} = {text!r} as comma-separated floats") from exc
    if not values:
        raise ValueError(f"{flag} must name at least one value")
    return values


def _parse_ints(text: str, flag: str) -> list[int]:
    return [int(round(v)) for v in _parse_floats(text, flag)]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_gain(args: argparse.Namespace) -> int:
    """CSV of the error gain over symmetric channels p = (p, p, p)."""
    fidelities = _parse_floats(args.fidelities, "--fidelities")
    for f in fidelities:
        if not 0.0 <= f <= 1.0 or abs(4.0 * f - 1.0) < 1e-12:
            raise ValueError(f"fidelity {f} is outside [0, 1] or non-identifiable (1/4)")
    if args.resource <= 0 or args.resource % 6 != 0:
        raise ValueError("--resource must be a positive multiple of 6")
    if not 0.0 < args.p_max <= 1.0 / 3.0 + 1e-12:
        raise ValueError("--p-max must lie in (0, 1/3]")
    cfg = SweepConfig.from_args(args, fidelities=tuple(fidelities), p_max=args.p_max, resource=args.resource)
    grid = [args.p_max * i / cfg.steps for i in range(cfg.steps + 1)]
    cells = [(f, p) for f in fidelities for p in grid]

    def one(cell: tuple[float, float]):
        f, p = cell
        return (f, p, analysis.resource_gain(args.resource, f, ChannelParams(p, p, p)))

    rows = _map_cells(one, cells, cfg.workers)
    _write_csv(cfg.out, "F,p,gain", rows)
    return 0


def cmd_resources(args: argparse.Namespace) -> int:
    """CSV of the qubit-resource difference over a (F, p) grid.

    All cells are emitted, including negative ones; the point where both
    schemes reach zero error renders as nan.
    """
    if not (0.0 <= args.f_min < args.f_max <= 1.0):
        raise ValueError("need 0 <= --f-min < --f-max <= 1")
    if args.f_steps < 1:
        raise ValueError("--f-steps must be at least 1")
    if args.target_error <= 0:
        raise ValueError("--target-error must be positive")
    if not 0.0 < args.p_max <= 1.0 / 3.0 + 1e-12:
        raise ValueError("--p-max must lie in (0, 1/3]")
    cfg = SweepConfig.from_args(
        args, f_min=args.f_min, f_max=args.f_max, f_steps=args.f_steps,
        p_max=args.p_max, target_error=args.target_error,
    )
    f_grid = [args.f_min + (args.f_max - args.f_min) * i / args.f_steps for i in range(args.f_steps + 1)]
    if any(abs(4.0 * f - 1.0) < 1e-12 for f in f_grid):
        raise ValueError("fidelity grid hits the non-identifiable value 1/4")
    p_grid = [args.p_max * i / cfg.steps for i in range(cfg.steps + 1)]
    cells = [(f, p) for f in f_grid for p in p_grid]

    def one(cell: tuple[float, float]):
        f, p = cell
        try:
            value = analysis.resource_difference(f, ChannelParams(p, p, p), args.target_error)
        except ValueError:
            value = float("nan")
        return (f, p, value)

    rows = _map_cells(one, cells, cfg.workers)
    _write_csv(cfg.out, "F,p,delta_R", rows)
    return 0


def cmd_thresholds(args: argparse.Namespace) -> int:
    """Text report of the fidelity thresholds relevant to channel estimation."""
    f_min, argmin = analysis.min_useful_fidelity(args.tolerance)
    lines = [
        f"separability threshold F = {SEPARABILITY_THRESHOLD}",
        f"chsh threshold F = {CHSH_THRESHOLD:.4f}",
        f"minimum useful fidelity F_min = {f_min:.4f}",
        f"argmin channel p = ({argmin.p1:.4f}, {argmin.p2:.4f}, {argmin.p3:.4f})",
    ]
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    return 0


def cmd_belldiag(args: argparse.Namespace) -> int:
    """CSV of the channel-averaged error over Bell-diagonal probes.

    alpha1 is fixed; (alpha2, alpha3) sweep a grid with alpha4 implied.
    Singular probes render as nan; a summary and the grid argmin go to stderr.
    """
    a1 = args.alpha1
    if not 0.0 <= a1 <= 1.0:
        raise ValueError("--alpha1 must lie in [0, 1]")
    if args.shots < 1:
        raise ValueError("--shots must be at least 1")
    cfg = SweepConfig.from_args(args, alpha1=a1, shots=args.shots)
    rest = 1.0 - a1
    grid = [rest * i / cfg.steps for i in range(cfg.steps + 1)]
    cells = []
    for a2 in grid:
        for a3 in grid:
            a4 = rest - a2 - a3
            if a4 >= -1e-12:
                cells.append((a2, a3, max(a4, 0.0)))

    def one(cell: tuple[float, float, float]):
        a2, a3, a4 = cell
        try:
            value = analysis.channel_averaged_mse(BellDiagonal((a1, a2, a3, a4)), args.shots)
        except NonIdentifiableError:
            value = float("nan")
        return (a1, a2, a3, a4, value)

    rows = _map_cells(one, cells, cfg.workers)
    _write_csv(cfg.out, "alpha1,alpha2,alpha3,alpha4,mean_error", rows)

    finite = [(r[4], r) for r in rows if not math.isnan(r[4])]
    singular = len(rows) - len(finite)
    if finite:
        best = min(finite, key=lambda item: item[0])[1]
        print(
            f"argmin: alpha2={_fmt(best[1])} alpha3={_fmt(best[2])} alpha4={_fmt(best[3])} "
            f"mean_error={_fmt(best[4])}",
            file=sys.stderr,
        )
    print(f"singular cells: {singular} of {len(rows)}", file=sys.stderr)
    return 0


def _simulate_row(scheme: str, n: int, args: argparse.Namespace, stream: int):
    params = ChannelParams(*_parse_floats(args.p, "--p"))
    seed = SeedSpec(args.seed, stream)
    clip = bool(args.clip)

    def clipped(est):
        if not clip:
            return est
        return lambda counts: np.clip(est(counts), 0.0, 1.0)

    if scheme == "werner":
        label = args.fidelity
        probs = bell_probs_werner(args.fidelity, params)
        estimator = werner_estimator(args.fidelity)
        true = params.as_array()
        closed = analysis.mse_werner(n, args.fidelity, params)
    elif scheme == "belldiag":
        alpha = BellDiagonal(tuple(_parse_floats(args.alpha, "--alpha")))
        label = alpha.alpha[0]
        probs = bell_probs_belldiag(alpha, params)
        estimator = belldiag_estimator(alpha)
        true = params.as_array()
        closed = analysis.mse_belldiag(n, alpha, params)
    elif scheme == "ddim":
        if args.dim != 2:
            raise ValueError(
                "simulate supports --dim 2 only (the CSV schema has three parameter columns); "
                "higher dimensions are available through the library API"
            )
        label = args.lam
        gen = gen_params_from_qubit(params)
        probs = bell_probs_isotropic(2, args.lam, gen)
        estimator = isotropic_estimator(2, args.lam)
        true = gen.as_flat()[1:]
        closed = analysis.mse_isotropic(n, 2, args.lam, gen)
    elif scheme == "separable":
        label = float("nan")
        mc = analysis.mse_separable_monte_carlo(n, params, args.trials, seed)
        closed = analysis.mse_separable(n, params)
        oracle = None
        if (n + 1) ** 3 <= args.oracle_cap:
            oracle = analysis.mse_separable_exact(n, params)
        return (scheme, n, label, params.p1, params.p2, params.p3, closed, mc.mean, mc.stderr, oracle)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    mc = analysis.mse_monte_carlo(n, probs, clipped(estimator), true, args.trials, seed)
    oracle = None
    if n_outcomes(len(probs), n) <= args.oracle_cap:
        oracle = analysis.mse_exact(n, probs, estimator, true, cap=args.oracle_cap)
    return (scheme, n, label, params.p1, params.p2, params.p3, closed, mc.mean, mc.stderr, oracle)


def cmd_simulate(args: argparse.Namespace) -> int:
    """CSV validating closed-form errors against Monte Carlo and the oracle."""
    scheme = args.scheme
    shots = _parse_ints(args.shots, "--shots")
    if any(n < 1 for n in shots):
        raise ValueError("--shots values must be at least 1")
    cfg = SweepConfig.from_args(args, scheme=scheme, shots=tuple(shots))
    cells = list(enumerate(shots))

    def one(cell: tuple[int, int]):
        index, n = cell
        return _simulate_row(scheme, n, args, stream=index)

    rows = _map_cells(one, cells, cfg.workers)
    _write_csv(cfg.out, SIMULATE_HEADER, rows)
    return 0


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="master seed (default %(default)s)")
    parser.add_argument("--out", type=str, default="-", help="output path, '-' for stdout")
    parser.add_argument("--workers", type=int, default=1, help="worker threads for sweep cells")
    parser.add_argument("--config", type=str, default=None, help="key=value defaults file; flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chanest",
        description="Pauli-channel estimation with noisy entangled probes: sweeps and reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gain = sub.add_parser("gain", help="error gain of entangled vs separable estimation")
    p_gain.add_argument("--fidelities", type=str, default="1,0.9,0.83", help="comma-separated Werner fidelities")
    p_gain.add_argument("--steps", type=int, default=50, help="symmetric-p grid steps")
    p_gain.add_argument("--p-max", dest="p_max", type=float, default=1.0 / 3.0, help="upper end of the p grid")
    p_gain.add_argument("--resource", type=int, default=6, help="total qubit budget (multiple of 6)")
    _add_common(p_gain)
    p_gain.set_defaults(func=cmd_gain)

    p_res = sub.add_parser("resources", help="qubit-resource difference over a (F, p) grid")
    p_res.add_argument("--f-min", dest="f_min", type=float, default=0.75)
    p_res.add_argument("--f-max", dest="f_max", type=float, default=1.0)
    p_res.add_argument("--f-steps", dest="f_steps", type=int, default=25)
    p_res.add_argument("--steps", type=int, default=50, help="symmetric-p grid steps")
    p_res.add_argument("--p-max", dest="p_max", type=float, default=1.0 / 3.0)
    p_res.add_argument("--target-error", dest="target_error", type=float, default=1.0)
    _add_common(p_res)
    p_res.set_defaults(func=cmd_resources)

    p_thr = sub.add_parser("thresholds", help="separability, CHSH, and estimation thresholds")
    p_thr.add_argument("--tolerance", type=float, default=1e-4, help="fidelity search tolerance")
    _add_common(p_thr)
    p_thr.set_defaults(func=cmd_thresholds)

    p_bd = sub.add_parser("belldiag", help="channel-averaged error over Bell-diagonal probes")
    p_bd.add_argument("--alpha1", type=float, required=True, help="fixed singlet weight")
    p_bd.add_argument("--steps", type=int, default=60, help="grid steps along alpha2 and alpha3")
    p_bd.add_argument("--shots", type=int, default=1, help="pair count N in the averaged error")
    _add_common(p_bd)
    p_bd.set_defaults(func=cmd_belldiag)

    def add_simulate(name: str, forced_scheme: Optional[str]) -> None:
        p_sim = sub.add_parser(
            name,
            help="validate closed-form errors against Monte Carlo and the exact oracle",
        )
        if forced_scheme is None:
            p_sim.add_argument(
                "--scheme",
                choices=["werner", "separable", "belldiag", "ddim"],
                default="werner",
            )
        p_sim.add_argument("--shots", type=str, default="4,50", help="comma-separated shot counts")
        p_sim.add_argument("--fidelity", type=float, default=0.9, help="Werner fidelity")
        p_sim.add_argument("--lam", type=float, default=0.8, help="isotropic mixing weight")
        p_sim.add_argument("--alpha", type=str, default="0.7,0.1,0.1,0.1", help="Bell-diagonal weights")
        p_sim.add_argument("--p", type=str, default="0.1,0.2,0.3", help="channel parameters p1,p2,p3")
        p_sim.add_argument("--dim", type=int, default=2, help="qudit dimension for scheme=ddim")
        p_sim.add_argument("--trials", type=int, default=10_000, help="Monte Carlo trials per row")
        p_sim.add_argument("--clip", action="store_true", help="clip Monte Carlo estimates to [0, 1]")
        p_sim.add_argument(
            "--oracle-cap",
            dest="oracle_cap",
            type=int,
            default=DEFAULT_ORACLE_CAP,
            help="skip the exact oracle above this outcome count",
        )
        _add_common(p_sim)
        if forced_scheme is None:
            p_sim.set_defaults(func=cmd_simulate)
        else:
            p_sim.set_defaults(func=cmd_simulate, scheme=forced_scheme)

    add_simulate("simulate", None)
    add_simulate("ddim", "ddim")

    return parser


def _load_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {line!r}")
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _apply_config(parser: argparse.ArgumentParser, args: argparse.Namespace, argv: list[str]) -> argparse.Namespace:
    overrides = _load_config(args.config)
    sub_actions = None
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            sub_actions = action
            break
    assert sub_actions is not None
    command_parser = sub_actions.choices[args.command]
    known = {a.dest: a for a in command_parser._actions if a.dest != "help"}
    unknown = sorted(set(overrides) - set(known))
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    defaults = {}
    for dest, raw in overrides.items():
        action = known[dest]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            defaults[dest] = action.type(raw)
        else:
            defaults[dest] = raw
    command_parser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            args = _apply_config(parser, args, argv)
        return args.func(args)
    except NonIdentifiableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except EnumerationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
