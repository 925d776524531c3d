"""Command-line front end: ``gen``, ``run``, ``sweep`` and ``report``.

Exit codes: 0 success, 1 numerical failure, 2 usage, configuration or input error.
"""

import argparse
import os
import sys

import numpy as np

from . import container
from .bench import SyntheticStream, gen_sensing, gen_stream, run_stream, sweep_phase_diagram, trial_seeds
from .config import load_config
from .errors import ConsistencyError, ContainerError, InvalidInputError, NumericFailureError
from .report import gnuplot_matrix, parse_sweep_csv, run_csv, sweep_csv, text_grid

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


def _common(p):
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--profile", choices=["paper", "desk"], help="default scales")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")


def build_parser():
    parser = argparse.ArgumentParser(prog="streamdecomp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("gen", help="generate a synthetic dataset container")
    _common(p)
    p = sub.add_parser("run", help="decompose the test frames of a dataset")
    _common(p)
    p.add_argument("dataset", help="container written by 'gen'")
    p = sub.add_parser("sweep", help="phase-diagram sweep over s0 and m")
    _common(p)
    p = sub.add_parser("report", help="render a sweep CSV as text and gnuplot matrices")
    _common(p)
    p.add_argument("csv", help="CSV written by 'sweep'")
    return parser


def _outdir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_gen(cfg, args):
    d = cfg.data
    s0, m = d.s0[0], d.m[0]
    stream_seed, phi_seed = trial_seeds(d.master_seed, s0, m, 0)
    stream = gen_stream(d.n, d.r, d.d, d.q, s0, stream_seed)
    Phi = gen_sensing(m, d.n, phi_seed)
    params = dict(stream.params, m=m, sensing_seed=phi_seed, master_seed=d.master_seed)
    path = os.path.join(_outdir(cfg.output_dir), "stream.sds")
    container.save(path, {"L": stream.L, "X": stream.X, "Phi": Phi}, params)
    print(path)
    return EXIT_OK


def cmd_run(cfg, args):
    try:
        arrays, params = container.load(args.dataset)
    except OSError as exc:
        raise InvalidInputError(f"cannot read dataset {args.dataset}: {exc.strerror}") from exc
    except ContainerError as exc:
        raise InvalidInputError(f"{args.dataset}: {exc}") from exc
    missing = {"L", "X", "Phi"} - set(arrays)
    if missing:
        raise InvalidInputError(f"{args.dataset}: missing arrays {sorted(missing)}")
    L, X, Phi = arrays["L"], arrays["X"], arrays["Phi"]
    d = cfg.data
    expected = (d.n, d.d + d.q)
    if L.shape != expected or X.shape != expected or Phi.shape[1] != d.n:
        raise InvalidInputError(
            f"dataset dimensions L{L.shape}, Phi{Phi.shape} do not match config "
            f"n={d.n}, d={d.d}, q={d.q}"
        )
    stream = SyntheticStream(L, X, dict(params, d=d.d))
    result = run_stream(stream, Phi, cfg.solver)
    path = os.path.join(_outdir(cfg.output_dir), "run.csv")
    _write(path, run_csv(result.frames))
    xs, vs = result.success()
    print(f"{path}: {len(result.frames)} frames, sparse success {xs:.2f}, low-rank success {vs:.2f}")
    return EXIT_OK


def cmd_sweep(cfg, args):
    if args.jobs < 1:
        raise InvalidInputError(f"--jobs must be >= 1, got {args.jobs}")
    d = cfg.data
    diagram = sweep_phase_diagram(
        d.s0, d.m, d.trials, d.n, d.r, d.d, d.q, cfg.solver, d.master_seed, jobs=args.jobs,
        log=lambda msg: print(msg, file=sys.stderr),
    )
    path = os.path.join(_outdir(cfg.output_dir), "sweep.csv")
    _write(path, sweep_csv(diagram))
    print(path)
    return EXIT_OK


def cmd_report(cfg, args):
    try:
        with open(args.csv, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {args.csv}: {exc.strerror}") from exc
    try:
        cells = parse_sweep_csv(text)
    except InvalidInputError as exc:
        raise InvalidInputError(f"{args.csv}: {exc}") from exc
    out = _outdir(cfg.output_dir)
    for attr, label in (("prob_sparse", "sparse"), ("prob_lowrank", "lowrank")):
        print(f"success probability ({label}); rows s0, columns m")
        print(text_grid(cells, attr))
        _write(os.path.join(out, f"report_{label}.dat"), gnuplot_matrix(cells, attr))
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "sweep": cmd_sweep, "report": cmd_report}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = load_config(args.config, args.profile, args.seed, args.out)
        return COMMANDS[args.command](cfg, args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericFailureError, ConsistencyError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
