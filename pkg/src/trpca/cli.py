"""Command-line front door: tsvd, solve, certify, synth, sweep.

Every subcommand is a pure function of its input files, flags and seed, so
repeated invocations write byte-identical outputs.  Exit codes: 0 success,
1 computation error, 2 usage error, and 3 when `certify` finds the
requested recovery condition unsatisfied.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import TrpcaError
from .tensor import read_tensor, write_tensor
from .tsvd import nuclear_norm, spectral_norm, tsvd_skinny
from .certify import build_report
from .solver import SolverConfig, objective, rtpca
from .experiments import (
    InstanceSpec,
    make_instance,
    per_slice_capped,
    random_entries,
    run_sweep,
)

_PENALTY_FLAGS = {"l1": "l1", "tube": "tube_112", "slice": "slice_21"}


def _gamma_flag(value: str):
    if value == "auto":
        return "auto"
    try:
        return float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"gamma must be a number or 'auto', got {value!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trpca",
        description="Tensor robust PCA: t-SVD algebra, convex solver, recovery certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_tsvd = sub.add_parser("tsvd", help="skinny t-SVD of a tensor file")
    p_tsvd.add_argument("--in", dest="input", required=True, help="tensor text file")
    p_tsvd.add_argument("--tol", type=float, default=None, help="rank tolerance (absolute)")
    p_tsvd.set_defaults(func=_cmd_tsvd)

    p_solve = sub.add_parser("solve", help="low-rank + sparse decomposition")
    p_solve.add_argument("--in", dest="input", required=True, help="observed tensor X")
    p_solve.add_argument("--gamma", type=_gamma_flag, default="auto")
    p_solve.add_argument("--penalty", choices=sorted(_PENALTY_FLAGS), default="l1")
    p_solve.add_argument("--tol", type=float, default=1e-8)
    p_solve.add_argument("--max-iters", type=int, default=500)
    p_solve.add_argument("--out-l", default=None, help="output path for L (default beside input)")
    p_solve.add_argument("--out-e", default=None, help="output path for E (default beside input)")
    p_solve.set_defaults(func=_cmd_solve)

    p_cert = sub.add_parser("certify", help="evaluate recovery certificates for (L0, E0)")
    p_cert.add_argument("--L", dest="l_path", required=True)
    p_cert.add_argument("--E", dest="e_path", required=True)
    p_cert.add_argument("--condition", choices=("thm3", "cor3", "dual"), default="thm3")
    p_cert.add_argument("--gamma", type=float, default=None, help="dual-certificate gamma")
    p_cert.add_argument("--p", type=float, default=0.5, help="gamma interpolation exponent")
    p_cert.add_argument("--no-dual", action="store_true", help="skip the dual construction")
    p_cert.add_argument("--samples", type=int, default=16, help="xi estimator probes")
    p_cert.add_argument("--seed", type=int, default=0)
    p_cert.set_defaults(func=_cmd_certify)

    p_synth = sub.add_parser("synth", help="generate a synthetic (L0, E0, X) instance")
    p_synth.add_argument("--dims", type=int, nargs=3, required=True, metavar=("N1", "N2", "N3"))
    p_synth.add_argument("--rank", type=int, required=True)
    p_synth.add_argument("--pattern", choices=("random", "capped"), default="random")
    p_synth.add_argument("--count", type=int, default=None, help="sparse entry count")
    p_synth.add_argument("--deg", type=int, default=1, help="per-slice cap for capped pattern")
    p_synth.add_argument("--magnitude", choices=("rademacher", "ones", "gauss"), default="rademacher")
    p_synth.add_argument("--factors", choices=("gaussian", "flat"), default="gaussian")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out-prefix", required=True, help="writes <prefix>_{L,E,X}.t3")
    p_synth.set_defaults(func=_cmd_synth)

    p_sweep = sub.add_parser("sweep", help="recovery phase sweep over a parameter grid")
    p_sweep.add_argument("--dims", type=int, nargs=3, required=True, metavar=("N1", "N2", "N3"))
    p_sweep.add_argument("--ranks", type=int, nargs="+", required=True)
    p_sweep.add_argument("--sparsities", type=int, nargs="+", required=True)
    group = p_sweep.add_mutually_exclusive_group(required=True)
    group.add_argument("--gammas", type=float, nargs="+")
    group.add_argument("--ps", type=float, nargs="+")
    p_sweep.add_argument("--pattern", choices=("random", "capped"), default="random")
    p_sweep.add_argument("--factors", choices=("gaussian", "flat"), default="gaussian")
    p_sweep.add_argument("--penalty", choices=sorted(_PENALTY_FLAGS), default="l1")
    p_sweep.add_argument("--tol", type=float, default=1e-8)
    p_sweep.add_argument("--max-iters", type=int, default=500)
    p_sweep.add_argument("--condition", choices=("thm3", "cor3"), default="thm3")
    p_sweep.add_argument("--dual", action="store_true", help="also build dual certificates")
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--timing", action="store_true",
                         help="record wall time per cell (breaks byte-determinism)")
    p_sweep.add_argument("--out", required=True, help="CSV output path")
    p_sweep.set_defaults(func=_cmd_sweep)

    return parser


def _require_file(path: str) -> Path | None:
    p = Path(path)
    if not p.is_file():
        print(f"usage error: no such file: {path}", file=sys.stderr)
        return None
    return p


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}_{suffix}{path.suffix or '.t3'}")


def _cmd_tsvd(args) -> int:
    path = _require_file(args.input)
    if path is None:
        return 2
    a = read_tensor(path)
    fac = tsvd_skinny(a, args.tol)
    if fac.rank > 0:
        write_tensor(_sibling(path, "U"), fac.u)
        write_tensor(_sibling(path, "S"), fac.s)
        write_tensor(_sibling(path, "V"), fac.v)
    print(f"rank={fac.rank} nuclear={nuclear_norm(a):.12g} spectral={spectral_norm(a):.12g}")
    return 0


def _cmd_solve(args) -> int:
    path = _require_file(args.input)
    if path is None:
        return 2
    x = read_tensor(path)
    cfg = SolverConfig(
        gamma=args.gamma,
        penalty=_PENALTY_FLAGS[args.penalty],
        tol=args.tol,
        max_iters=args.max_iters,
    )
    res = rtpca(x, cfg)
    out_l = Path(args.out_l) if args.out_l else _sibling(path, "L")
    out_e = Path(args.out_e) if args.out_e else _sibling(path, "E")
    write_tensor(out_l, res.l)
    write_tensor(out_e, res.e)
    gamma = cfg.resolve_gamma(x.dims)
    obj = objective(res.l, res.e, gamma, cfg.penalty)
    print(f"iters={res.iterations} residual={res.primal_residual:.6g} objective={obj:.12g}")
    return 0


def _cmd_certify(args) -> int:
    l_path = _require_file(args.l_path)
    e_path = _require_file(args.e_path)
    if l_path is None or e_path is None:
        return 2
    l0 = read_tensor(l_path)
    e0 = read_tensor(e_path)
    report = build_report(
        l0,
        e0,
        condition=args.condition,
        gamma=args.gamma,
        p=args.p,
        with_dual=not args.no_dual,
        samples=args.samples,
        seed=args.seed,
    )
    print(report.to_text())
    return 0 if report.passes() else 3


def _cmd_synth(args) -> int:
    if args.pattern == "random":
        if args.count is None:
            print("usage error: --pattern random requires --count", file=sys.stderr)
            return 2
        pattern = random_entries(args.count)
    else:
        pattern = per_slice_capped(args.deg, args.count)
    spec = InstanceSpec(
        dims=tuple(args.dims),
        rank=args.rank,
        pattern=pattern,
        magnitude=args.magnitude,
        factors=args.factors,
        seed=args.seed,
    )
    l0, e0, x = make_instance(spec)
    prefix = Path(args.out_prefix)
    for name, tensor in (("L", l0), ("E", e0), ("X", x)):
        write_tensor(prefix.parent / f"{prefix.name}_{name}.t3", tensor)
    print(f"dims={args.dims[0]}x{args.dims[1]}x{args.dims[2]} rank={args.rank} "
          f"sparse={int((e0.data != 0).sum())} seed={args.seed}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = SolverConfig(
        penalty=_PENALTY_FLAGS[args.penalty], tol=args.tol, max_iters=args.max_iters
    )
    result = run_sweep(
        dims=tuple(args.dims),
        ranks=args.ranks,
        sparsities=args.sparsities,
        gammas=args.gammas,
        ps=args.ps,
        pattern_kind=args.pattern,
        factors=args.factors,
        config=cfg,
        condition=args.condition,
        with_dual=args.dual,
        seed=args.seed,
        out=args.out,
        record_timing=args.timing,
    )
    successes = sum(1 for c in result.cells if c.success)
    print(f"cells={len(result.cells)} successes={successes} out={args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, 2 for usage errors; surface as a code
        return int(exc.code or 0)
    try:
        return args.func(args)
    except TrpcaError as exc:
        op = args.command if hasattr(args, "command") else "trpca"
        print(f"error in {op}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error in {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
