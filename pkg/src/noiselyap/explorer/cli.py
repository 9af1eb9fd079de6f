"""Command-line driver: ``noiselyap {lyapunov,sweep,crossings,density,simulate}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from noiselyap.certification import CertOptions, certificate_text, enclose_density
from noiselyap.dynamics import NoiseParams, family_map
from noiselyap.explorer.crossings import detect_crossings, refine_crossing
from noiselyap.explorer.emit import CsvWriter, mixing_heatmap, read_csv, sign_map
from noiselyap.explorer.points import Range, SweepConfig, rows_by_column, run_point, sweep
from noiselyap.explorer.simulation import simulate, two_point
from noiselyap.lyapunov import lyapunov_enclosure


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def cmd_lyapunov(args) -> int:
    opts = CertOptions(target=args.target)
    row = run_point(args.alpha, args.beta, args.sigma, args.modes, opts)
    _emit(
        {
            "alpha": row.alpha,
            "beta": row.beta,
            "sigma": row.sigma,
            "modes": row.K,
            "status": row.status,
            "lambda": [row.lambda_lo, row.lambda_hi],
            "sign": row.sign,
            "err_l2": row.E,
            "eps": row.eps,
            "n_mix": row.N_mix,
            "cn_hi": row.C_N_hi,
        },
        args.out,
    )
    return 0 if row.ok else 1


def cmd_density(args) -> int:
    try:
        d = enclose_density(family_map(args.alpha, args.beta), NoiseParams(args.sigma), args.modes)
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return 1
    lam = lyapunov_enclosure(d)
    text = certificate_text(d) + f"lambda {lam.lam.lo!r} {lam.lam.hi!r}\n"
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        x = np.linspace(-1.0, 1.0, 401)
        np.savetxt(out.with_suffix(".density.csv"), np.c_[x, d.density_values(x)], delimiter=",",
                   header="x,density", comments="")
    print(text, end="")
    return 0


def _config(args) -> SweepConfig:
    if (args.alpha is None) == (args.beta is None):
        raise SystemExit("give exactly one of --alpha lo:hi:n or --beta lo:hi:n")
    return SweepConfig(
        sigma_range=Range.parse(args.sigma),
        alpha_range=Range.parse(args.alpha) if args.alpha else None,
        beta_range=Range.parse(args.beta) if args.beta else None,
        alpha=args.fixed_alpha,
        beta=args.fixed_beta,
        K=args.modes,
        record_runtime=not args.no_timing,
        out_csv=args.out_csv,
        out_map=args.out_map,
    )


def cmd_sweep(args) -> int:
    cfg = _config(args)
    if cfg.out_csv:
        with CsvWriter(cfg.out_csv) as w:
            rows = sweep(cfg, on_row=w.write)
    else:
        rows = sweep(cfg)
    if cfg.out_map:
        sign_map(rows, cfg.shape, cfg.out_map)
    if args.out_mixing:
        mixing_heatmap(rows, cfg.shape, args.out_mixing)
    failed = sum(not r.ok for r in rows)
    print(f"{len(rows)} points, {failed} failed")
    return 0 if failed == 0 else 1


def cmd_crossings(args) -> int:
    if args.from_csv:
        rows = read_csv(args.from_csv)
    else:
        rows = sweep(_config(args))
    ok = True
    for (alpha, beta), col in rows_by_column(rows).items():
        for c in detect_crossings(col):
            line = (f"alpha={alpha!r} beta={beta!r} {c.orientation}: "
                    f"sigma1={c.sigma1!r} {c.lam1}  sigma2={c.sigma2!r} {c.lam2}")
            if args.refine_width:
                b = refine_crossing(alpha, beta, (c.sigma1, c.sigma2), args.refine_width, col[0].K)
                ok = ok and not b.stalled
                line += f"  refined=[{b.lo!r}, {b.hi!r}] steps={b.steps}{' STALLED' if b.stalled else ''}"
            print(line)
    return 0 if ok else 1


def cmd_simulate(args) -> int:
    tmap = family_map(args.alpha, args.beta)
    n = NoiseParams(args.sigma)
    res = simulate(tmap, n, args.x0, args.steps, args.seed, keep_trajectory=bool(args.out))
    out = {"average": res.average, "stderr": res.stderr, "steps": res.steps, "skipped": res.skipped}
    if args.out:
        np.save(args.out, res.trajectory)
    if args.y0 is not None:
        tp = two_point(tmap, n, args.x0, args.y0, args.steps, args.seed)
        tail = tp.circle[-max(1, args.steps // 10):]
        out["two_point_final_median"] = float(np.median(tail))
        if args.out:
            np.savetxt(Path(args.out).with_suffix(".twopoint.csv"), np.c_[tp.circle, tp.raw],
                       delimiter=",", header="circle,raw", comments="")
    print(json.dumps(out, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="noiselyap", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def point(sp):
        sp.add_argument("--alpha", type=float, required=True)
        sp.add_argument("--beta", type=float, default=1.0)
        sp.add_argument("--sigma", type=float, required=True)
        sp.add_argument("--modes", type=int, default=128)
        sp.add_argument("--out")

    sp = sub.add_parser("lyapunov", help="certify one Lyapunov exponent")
    point(sp)
    sp.add_argument("--target", type=float, default=0.5, help="mixing target for C_N")
    sp.set_defaults(func=cmd_lyapunov)

    sp = sub.add_parser("density", help="certify the stationary density")
    point(sp)
    sp.set_defaults(func=cmd_density)

    def grid(sp):
        sp.add_argument("--alpha", help="lo:hi:n")
        sp.add_argument("--beta", help="lo:hi:n")
        sp.add_argument("--sigma", default="0.0625:1:33", help="lo:hi:n")
        sp.add_argument("--fixed-alpha", type=float, default=3.0)
        sp.add_argument("--fixed-beta", type=float, default=1.0)
        sp.add_argument("--modes", type=int, default=128)
        sp.add_argument("--no-timing", action="store_true", help="write runtime_s as 0 (reproducible CSV)")
        sp.add_argument("--out-csv")
        sp.add_argument("--out-map")

    sp = sub.add_parser("sweep", help="certify lambda on a parameter grid")
    grid(sp)
    sp.add_argument("--out-mixing", help="grayscale pixmap of log C_N")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("crossings", help="find and refine sign changes along sigma")
    grid(sp)
    sp.add_argument("--from-csv")
    sp.add_argument("--refine-width", type=float)
    sp.set_defaults(func=cmd_crossings)

    sp = sub.add_parser("simulate", help="Monte Carlo Birkhoff average and two-point distances")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--sigma", type=float, required=True)
    sp.add_argument("--x0", type=float, default=0.1)
    sp.add_argument("--y0", type=float)
    sp.add_argument("--steps", type=int, default=10**6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
