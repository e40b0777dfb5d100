"""``growthcodes`` command-line driver.

Every command writes ``<out>.manifest.json`` next to its output, and every
CSV opens with a ``# manifest-sha256: ...`` comment. ``growthcodes replay
MANIFEST`` re-runs a recorded invocation. Flags are documented in
``docs/cli.md``.
"""

import argparse
import logging
import os
import sys
from math import ceil
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    DEFAULT_STEP,
    RecoveryCurve,
    initial_state,
    integrate,
    read_curve_csv,
    write_curve_csv,
    write_trajectory_csv,
)
from .configio import manifest, read_csv, read_manifest, write_csv, write_manifest
from .errors import (
    CorruptPacketError,
    InsufficientDataError,
    NoInteriorMinimumError,
    NumericalInstabilityError,
    UnsupportedModelError,
)
from .fountain import (
    DecoderState,
    GrowthSchedule,
    growth_distribution,
    join_symbols,
    packet_stream,
    read_packets,
    split_file,
    write_packets,
)
from .jscc import (
    ChannelConfig,
    allocate,
    default_params,
    distortion_curve,
    load_params,
    mismatch_eval,
)
from .model import PRESETS, IdealCode, fit, read_model, write_model
from .prng import split_seed
from .sim import TRIAL_CSV_HEADER, monte_carlo_curve

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4
SEED_ENV = "GROWTHCODES_SEED"
CODES = ("growth", "growth-static")

log = logging.getLogger("growthcodes")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


# ---------------------------------------------------------------- helpers


def parse_grid(text):
    """``"0.1:2.0:0.05"`` (inclusive) or ``"0.25,0.5,1"``."""
    try:
        if ":" in text:
            lo, hi, step = (float(x) for x in text.split(":"))
            if not step > 0 or hi < lo:
                raise ValueError
            n = int(np.floor((hi - lo) / step + 1e-9)) + 1
            return [round(lo + i * step, 12) for i in range(n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None


def positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def make_code(name, k):
    if name == "growth":
        return GrowthSchedule(k)
    if name == "growth-static":
        return growth_distribution(k)
    raise UsageError(f"unknown code {name!r}")


def default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def load_model(spec):
    if spec in PRESETS:
        return PRESETS[spec]
    if spec == "ideal":
        return IdealCode()
    if not Path(spec).exists():
        raise UsageError(f"model {spec!r} is neither a preset ({', '.join(PRESETS)}) nor a file")
    try:
        return read_model(spec)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def load_video_params(path):
    if path is None:
        return default_params()
    try:
        return load_params(path)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read video parameters: {exc}") from None


class Run:
    """Manifest bookkeeping for one command invocation."""

    def __init__(self, args, argv):
        self.command = args.command
        self.seed = getattr(args, "seed", None)
        params = {k: v for k, v in vars(args).items() if k not in ("func", "command", "seed")}
        self.argv = list(argv)
        if self.seed is not None and "--seed" not in self.argv:
            self.argv += ["--seed", str(self.seed)]
        self.params = {**params, "argv": self.argv}
        self.outputs = []
        self.sha = manifest(self.command, self.params, self.seed)["sha256"]

    @property
    def comment(self):
        return f"manifest-sha256: {self.sha}"

    def wrote(self, path):
        self.outputs.append(str(path))

    def finish(self, anchor):
        man = manifest(self.command, self.params, self.seed, self.outputs)
        write_manifest(f"{anchor}.manifest.json", man)


# ---------------------------------------------------------------- commands


def cmd_dist(args, run):
    if args.n is None:
        code = growth_distribution(args.k)
    else:
        code = growth_distribution(args.k, args.n)
    rows = [(d, p) for d, p in enumerate(code.probs, 1) if p > 0]
    write_csv(args.out, ("degree", "probability"), rows, run.comment)
    run.wrote(args.out)
    run.finish(args.out)


def cmd_encode(args, run):
    if (args.count is None) == (args.eta is None):
        raise UsageError("give exactly one of --count or --eta")
    if args.eta is not None and args.eta < 0:
        raise UsageError("--eta must be >= 0")
    count = args.count if args.count is not None else ceil(args.eta * args.k - 1e-9)
    try:
        data = Path(args.input).read_bytes()
    except OSError as exc:
        raise InputError(str(exc)) from None
    block = split_file(data, args.k)
    stream = split_seed(args.seed, 0) & 0xFFFFFFFF
    packets = packet_stream(block, make_code(args.code, args.k), count, stream_id=stream)
    Path(args.out).write_bytes(write_packets(packets))
    if count == 0:
        log.warning("no packets requested; wrote an empty packet file")
    run.wrote(args.out)
    run.finish(args.out)


def cmd_decode(args, run):
    try:
        packets = read_packets(Path(args.input).read_bytes())
    except OSError as exc:
        raise InputError(str(exc)) from None
    index_path = f"{args.out}.index.csv"
    if not packets:
        log.warning("packet file is empty; nothing recovered")
        Path(args.out).write_bytes(b"")
        write_csv(index_path, ("symbol", "recovered"), [], run.comment)
    else:
        k = packets[0].k
        state = DecoderState(k, make_code(args.code, k), args.mode)
        for p in packets:
            state.push(p)
        if state.complete:
            Path(args.out).write_bytes(join_symbols(state.symbols()))
        else:
            log.warning("partial decode: %d of %d symbols recovered", state.n_recovered, k)
            blank = bytes(packets[0].symbol_size)
            Path(args.out).write_bytes(b"".join(blank if x is None else x for x in state.symbols()))
        rows = [(i, int(i in state.recovered)) for i in range(k)]
        write_csv(index_path, ("symbol", "recovered"), rows, run.comment)
    run.wrote(args.out)
    run.wrote(index_path)
    run.finish(args.out)


def cmd_wormald(args, run):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    code = make_code(args.dist, args.k)
    p_d = []
    for eta in args.eta_grid:
        if eta == 0:
            p_d.append(0.0)
            continue
        try:
            traj = integrate(initial_state(code, eta), step=args.step)
        except NumericalInstabilityError as exc:
            exc.eta = eta
            raise
        p_d.append(min(1.0, traj.p_d))
        if args.trajectories:
            path = out / f"trajectory_eta{eta:g}.csv"
            write_trajectory_csv(traj, path, run.comment)
            run.wrote(path)
    curve = RecoveryCurve(args.eta_grid, p_d, source="ode")
    write_curve_csv(curve, out / "curve.csv", run.comment)
    run.wrote(out / "curve.csv")
    run.finish(out / "run")


def _read_any_curve(path):
    try:
        header, rows = read_csv(path)
        if "mean_pd" in header:
            ie, ip = header.index("eta"), header.index("mean_pd")
            return RecoveryCurve([float(r[ie]) for r in rows], [float(r[ip]) for r in rows], "monte-carlo")
        return read_curve_csv(path)
    except (OSError, ValueError, IndexError) as exc:
        raise InputError(f"cannot read curve {path}: {exc}") from None


def cmd_fit(args, run):
    m = fit(_read_any_curve(args.curve), label=args.label)
    write_model(m, args.out)
    print(f"lambda={m.lam:.6g} mu={m.mu:.6g} rms={m.rms_residual:.3g}")
    run.wrote(args.out)
    run.finish(args.out)


ALLOC_HEADER = ("target_pl", "epsilon", "eta", "r_star", "d_star", "psnr", "constrained", "channel_eta")


def cmd_allocate(args, run):
    params = load_video_params(args.params)
    model = load_model(args.model)
    rows = []
    for p in args.target_pl:
        a = allocate(params, model, ChannelConfig(args.capacity, p))
        rows.append((p, a.epsilon, a.eta, a.r_star, a.d_star, a.psnr, a.constrained, a.channel_eta))
    write_csv(args.out, ALLOC_HEADER, rows, run.comment)
    run.wrote(args.out)
    run.finish(args.out)


MISMATCH_HEADER = ("target_pl", "pi", "eta", "realized_pl", "distortion", "psnr")


def cmd_mismatch(args, run):
    params = load_video_params(args.params)
    model = load_model(args.model)
    rows = []
    for p in args.target_pl:
        planned = allocate(params, model, ChannelConfig(args.capacity, p))
        for pi in args.pi_grid:
            ch = ChannelConfig(args.capacity, p, pi)
            r = mismatch_eval(params, model, ch, planned, fill_capacity=not args.planned_only)
            rows.append((p, r.pi, r.eta, r.realized_pl, r.distortion, r.psnr))
    write_csv(args.out, MISMATCH_HEADER, rows, run.comment)
    run.wrote(args.out)
    run.finish(args.out)


def cmd_quality(args, run):
    params = load_video_params(args.params)
    rows = []
    for spec in args.models:
        m = load_model(spec)
        label = getattr(m, "label", spec)
        for eta, pl, r, q in distortion_curve(params, m, args.eta_grid, args.capacity):
            rows.append((label, eta, pl, r, q))
    write_csv(args.out, ("model", "eta", "pl", "rate", "psnr"), rows, run.comment)
    run.wrote(args.out)
    run.finish(args.out)


def cmd_simulate(args, run):
    code = make_code(args.dist, args.k)
    _, reports = monte_carlo_curve(
        args.k, code, args.eta_grid, args.trials, mode=args.mode, seed=args.seed, workers=args.workers
    )
    write_csv(args.out, TRIAL_CSV_HEADER, [r.row() for r in reports], run.comment)
    run.wrote(args.out)
    run.finish(args.out)


def cmd_replay(args, run):
    try:
        man = read_manifest(args.manifest)
        argv = man["params"]["argv"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read manifest {args.manifest}: {exc}") from None
    if man.get("version") != __version__:
        log.warning("manifest was written by version %s, running %s", man.get("version"), __version__)
    code = main(argv)
    if code != EXIT_OK:
        raise SystemExit(code)


# ---------------------------------------------------------------- parser


def build_parser():
    ap = argparse.ArgumentParser(prog="growthcodes", description="Growth-code toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="degree distribution as CSV")
    p.add_argument("--k", type=positive_int, required=True)
    p.add_argument("--n", type=float, default=None, help="received-symbol count (default k)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("encode", help="file -> packet file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--k", type=positive_int, required=True)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--code", choices=CODES, default="growth")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="packet file -> file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mode", choices=("D", "S"), default="S")
    p.add_argument("--code", choices=CODES, default="growth")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("wormald", help="peeling ODE trajectories and recovery curve")
    p.add_argument("--k", type=positive_int, default=1000)
    p.add_argument("--dist", choices=CODES, default="growth")
    p.add_argument("--eta-grid", type=parse_grid, default=parse_grid("0.1:2.0:0.05"))
    p.add_argument("--step", type=float, default=DEFAULT_STEP)
    p.add_argument("--no-trajectories", dest="trajectories", action="store_false")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_wormald)

    p = sub.add_parser("fit", help="fit the exponential model to a curve CSV")
    p.add_argument("--curve", required=True)
    p.add_argument("--label", default="fitted")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    def video_args(p):
        p.add_argument("--params", default=None, help="video model config (default: shipped calibration)")
        p.add_argument("--model", default="growth", help="preset name or model file")
        p.add_argument("--capacity", type=float, required=True, help="channel capacity B in bits/s")
        p.add_argument("--target-pl", type=parse_grid, default=parse_grid("0.05,0.10,0.15,0.20"))
        p.add_argument("--out", required=True)

    p = sub.add_parser("allocate", help="rate allocation per target residual loss")
    video_args(p)
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("mismatch", help="quality when the channel loses more than planned")
    video_args(p)
    p.add_argument("--pi-grid", type=parse_grid, default=parse_grid("0:0.3:0.02"))
    p.add_argument("--planned-only", action="store_true", help="send only (1+eps) R instead of filling B")
    p.set_defaults(func=cmd_mismatch)

    p = sub.add_parser("quality", help="PSNR versus reception rate for several codes")
    p.add_argument("--params", default=None)
    p.add_argument("--models", type=lambda s: s.split(","), default=["ideal", "growth", "r-soliton-signfix"])
    p.add_argument("--capacity", type=float, required=True)
    p.add_argument("--eta-grid", type=parse_grid, default=parse_grid("0.1:1.5:0.05"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_quality)

    p = sub.add_parser("simulate", help="Monte Carlo recovery statistics")
    p.add_argument("--k", type=positive_int, default=1000)
    p.add_argument("--dist", choices=CODES, default="growth")
    p.add_argument("--eta-grid", type=parse_grid, default=parse_grid("0.25:1.5:0.25"))
    p.add_argument("--trials", type=positive_int, default=200)
    p.add_argument("--mode", choices=("D", "S"), default="S")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=positive_int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="re-run the invocation recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return ap


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    if not logging.getLogger().handlers:
        logging.basicConfig(format="growthcodes: %(levelname)s: %(message)s", level=logging.INFO)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = default_seed()
        if hasattr(args, "eta_grid") and (not args.eta_grid or any(e < 0 for e in args.eta_grid)):
            raise UsageError("eta grid must be non-empty and non-negative")
        if hasattr(args, "step") and not args.step > 0:
            raise UsageError("--step must be positive")
        if hasattr(args, "capacity") and not args.capacity > 0:
            raise UsageError("--capacity must be positive")
        args.func(args, Run(args, argv))
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (UnsupportedModelError, NoInteriorMinimumError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (CorruptPacketError, InsufficientDataError, InputError) as exc:
        log.error("bad input: %s", exc)
        return EXIT_INPUT
    except (NumericalInstabilityError, ArithmeticError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
