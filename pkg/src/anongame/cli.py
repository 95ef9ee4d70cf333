"""Command-line interface.

Exit codes: 0 success, 1 usage or parse error, 2 verification failure,
3 resource limit.
"""

import argparse
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import diagnostics
from .errors import (
    InternalConsistencyError,
    InvalidArgument,
    ParseError,
    PreconditionError,
    ResourceLimitError,
)
from .game import GAME_KINDS, generate_game, max_regret, regrets, verify_well_supported
from .io import load_game, load_profile, save_game, save_profile
from .moment_search import DEFAULT_MAX_GRID, moment_search
from .oracle import MAX_GRID_PROFILES, grid_profile_search, refining_grid_search
from .partitions import enumerate_partitions
from .pmd import pmd_pmf
from .reductions import ane2wsne, fptas_pipeline, pad_game
from .report import RunReport, format_profile
from .smoothing import solve_smooth

log = logging.getLogger("anongame")

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_RESOURCE = 0, 1, 2, 3


class VerificationFailed(Exception):
    pass


def _threads(args):
    value = args.threads if args.threads is not None else os.environ.get("ANONY_THREADS", 1)
    try:
        threads = int(value)
    except ValueError:
        raise InvalidArgument(f"bad thread count {value!r}") from None
    if threads < 1:
        raise InvalidArgument("thread count must be >= 1")
    return threads


def _emit(report, args):
    text = report.to_text(timings=getattr(args, "timings", False))
    sys.stdout.write(text)
    if getattr(args, "report", None):
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    if getattr(args, "json", None):
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    if not report.ok:
        raise VerificationFailed("verification failed")


def _write_profile(profile, args, report):
    if args.output:
        save_profile(profile, args.output)
        report.metrics["profile_file"] = args.output
    else:
        report.metrics["profile"] = format_profile(profile)


# -- commands ------------------------------------------------------------------


def cmd_gen(args):
    game = generate_game(args.n, args.k, args.kind, args.seed)
    save_game(game, args.output)
    print(f"wrote {args.output} n={game.n} k={game.k} kind={args.kind} seed={args.seed}")


def _solve_moment(game, args):
    res = moment_search(
        game,
        args.c,
        coarsen=args.grid_coarsen,
        moment_degree=args.moment_degree,
        max_grid=args.max_grid,
    )
    reg = max_regret(game, res.profile)
    report = RunReport(
        "moment-search",
        {"n": game.n, "k": game.k, "c": args.c, "eps": res.eps, "grid_coarsen": args.grid_coarsen},
        reg,
        {"regret_le_eps": reg <= res.eps + 1e-9},
        {
            "moment_degree": res.moment_degree,
            "grid_step": res.spec.step,
            "grid_size": res.grid_size,
            "cover_n_minus_1": res.cover_sizes.get("n-1", 0),
            "values_examined": res.examined,
            "candidates_rejected": res.rejected,
        },
        dict(res.timings),
    )
    return res.profile, report


def _solve_smooth(game, args):
    t0 = time.perf_counter()
    res = solve_smooth(game, delta=args.delta)
    reg = max_regret(game, res.profile)
    report = RunReport(
        "smooth",
        {"n": game.n, "k": game.k, "delta": res.delta},
        reg,
        {"regret_le_bound": reg <= res.bound + 1e-9},
        {
            "lipschitz": res.lipschitz,
            "tau": res.tau,
            "bound": res.bound,
            "pure_assignment": list(res.pure.assignment),
            "pure_partition": list(res.pure.induced_partition),
        },
        {"total_s": time.perf_counter() - t0},
    )
    return res.profile, report


def cmd_solve(args):
    game = load_game(args.game)
    solver = _solve_moment if args.algo == "moment-search" else _solve_smooth
    profile, report = solver(game, args)
    _write_profile(profile, args, report)
    _emit(report, args)


def cmd_verify(args):
    game = load_game(args.game)
    profile = load_profile(args.profile)
    reg = regrets(game, profile)
    verdicts = {"regret_le_eps": float(reg.max(initial=0.0)) <= args.eps + 1e-9}
    metrics = {"player_regrets": reg}
    if args.well_supported:
        ok, violations = verify_well_supported(game, profile, args.eps)
        verdicts["well_supported"] = ok
        metrics["violations"] = len(violations)
        for v in violations[:10]:
            log.warning("player %d puts %.3g on strategy %d (%.3g below best)",
                        v.player, v.probability, v.strategy, v.shortfall)
    report = RunReport("verify", {"n": game.n, "k": game.k, "eps": args.eps},
                       float(reg.max(initial=0.0)), verdicts, metrics)
    _emit(report, args)


def cmd_convert(args):
    game = load_game(args.game)
    if args.target == "pad":
        if args.n_prime is None:
            raise InvalidArgument("convert pad needs --n-prime")
        padded = pad_game(game, args.n_prime)
        save_game(padded.game, args.output)
        print(f"wrote {args.output} n={padded.n_prime} dummies={padded.shift}")
        return
    if args.profile is None or args.eps is None:
        raise InvalidArgument("convert ws needs a profile and --eps")
    profile = ane2wsne(game, load_profile(args.profile), args.eps)
    ok, _ = verify_well_supported(game, profile, args.eps)
    report = RunReport("ane2wsne", {"n": game.n, "k": game.k, "eps": args.eps},
                       max_regret(game, profile), {"well_supported": ok})
    _write_profile(profile, args, report)
    _emit(report, args)


def cmd_pipeline(args):
    game = load_game(args.game)
    calls = []

    def base(g, target):
        calls.append({"n": g.n, "target": target})
        if args.base == "oracle":
            return refining_grid_search(g, target, max_profiles=args.max_profiles)
        # the solver's own guarantee is n^-c; the conversion step checks the target
        return moment_search(g, args.c, coarsen=args.grid_coarsen).profile

    profile = fptas_pipeline(game, args.eps, base, args.gamma)
    ok, _ = verify_well_supported(game, profile, args.eps)
    report = RunReport(
        "pipeline",
        {"n": game.n, "k": game.k, "eps": args.eps, "gamma": args.gamma, "base": args.base},
        max_regret(game, profile),
        {"well_supported": ok},
        {"padded_n": calls[0]["n"], "base_target": calls[0]["target"]},
    )
    _write_profile(profile, args, report)
    _emit(report, args)


def cmd_oracle(args):
    game = load_game(args.game)
    profile = grid_profile_search(game, args.step, args.eps, args.well_supported, args.max_profiles)
    if profile is None:
        print(f"no grid profile with step {args.step} meets eps {args.eps}")
        raise VerificationFailed("not found")
    report = RunReport("oracle", {"n": game.n, "k": game.k, "step": args.step, "eps": args.eps},
                       max_regret(game, profile),
                       {"regret_le_eps": max_regret(game, profile) <= args.eps + 1e-9})
    _write_profile(profile, args, report)
    _emit(report, args)


def cmd_pmf(args):
    profile = load_profile(args.profile)
    if args.drop is not None:
        profile = np.delete(profile, args.drop, axis=0)
    dist = pmd_pmf(profile, k=profile.shape[1])
    for r, (x, p) in enumerate(zip(enumerate_partitions(dist.m, dist.k), dist.mass)):
        print(f"{r}\t{' '.join(map(str, x))}\t{float(p)!r}")


# -- bench ---------------------------------------------------------------------


def _parse_sweep(items):
    sweep = {}
    for item in items:
        key, _, values = item.partition("=")
        if key not in ("n", "k") or not values:
            raise InvalidArgument(f"bad sweep item {item!r}; use n=3,4,5 or k=2,3")
        try:
            sweep[key] = [int(v) for v in values.split(",")]
        except ValueError:
            raise InvalidArgument(f"bad sweep values in {item!r}") from None
    if set(sweep) != {"n", "k"}:
        raise InvalidArgument("sweep needs both n=... and k=...")
    return sweep


def _bench_cell(cell):
    algo, n, k, seed, opts = cell
    game = generate_game(n, k, opts["kind"], seed)
    row = {"algo": algo, "n": n, "k": k, "seed": seed, "delta": None, "lipschitz": None,
           "bound": None, "regret": None, "runtime_s": None, "status": "ok"}
    t0 = time.perf_counter()
    try:
        if algo == "smooth":
            res = solve_smooth(game)
            row.update(delta=res.delta, lipschitz=res.lipschitz, bound=res.bound)
            profile = res.profile
        else:
            res = moment_search(game, opts["c"], coarsen=opts["coarsen"])
            row.update(bound=res.eps)
            profile = res.profile
        row["runtime_s"] = time.perf_counter() - t0
        row["regret"] = max_regret(game, profile)
        if row["regret"] > row["bound"] + 1e-9:
            row["status"] = "verify-failed"
    except ResourceLimitError:
        row["status"] = "resource-limit"
    except InternalConsistencyError:
        row["status"] = "search-failed"
    return row


BENCH_COLUMNS = ("algo", "n", "k", "seed", "delta", "lipschitz", "bound", "regret", "runtime_s", "status")


def _tsv(rows, columns):
    def cell(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:.6g}"
        return str(v)

    lines = ["\t".join(columns)]
    lines += ["\t".join(cell(r[c]) for c in columns) for r in rows]
    return "\n".join(lines) + "\n"


def cmd_bench(args):
    sweep = _parse_sweep(args.sweep)
    opts = {"kind": args.kind, "c": args.c, "coarsen": args.grid_coarsen}
    cells = [
        (algo, n, k, args.seed + s, opts)
        for algo in args.algo
        for k in sweep["k"]
        for n in sweep["n"]
        for s in range(args.seeds)
    ]
    threads = _threads(args)
    if threads > 1:
        with ProcessPoolExecutor(threads) as pool:
            rows = list(pool.map(_bench_cell, cells))
    else:
        rows = [_bench_cell(c) for c in cells]
    table = _tsv(rows, BENCH_COLUMNS)
    sys.stdout.write(table)
    if args.out_dir:
        from .plotting import plot_bench

        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "bench.tsv"), "w", encoding="utf-8") as fh:
            fh.write(table)
        for path in plot_bench(rows, args.out_dir):
            log.info("wrote %s", path)
    if any(r["status"] in ("verify-failed", "search-failed") for r in rows):
        raise VerificationFailed("some cells failed verification")


# -- diag ----------------------------------------------------------------------


def run_diagnostics(seed, pairs=20):
    """All diagnostic suites; returns (results, checks) where checks are hard assertions."""
    results = {
        "representative": [r for n in (50, 100, 200)
                           for r in diagnostics.representative_pairs(n, 0.5, pairs, seed)],
        "eigenvalues": diagnostics.eigenvalue_sweep(seed=seed),
        "variance": diagnostics.variance_sweep(seed=seed),
        "fourier": diagnostics.fourier_checks(seed=seed),
        "transfer": diagnostics.transfer_checks(seed=seed),
        "gaussian": diagnostics.gaussian_tv(k=2) + diagnostics.gaussian_tv(k=3),
        "lipschitz": (
            [dict(r, default=True) for r in diagnostics.lipschitz_trend(k=2, seed=seed)]
            + [dict(r, default=True) for r in diagnostics.lipschitz_trend(k=3, seed=seed)]
            + diagnostics.lipschitz_trend(k=2, seed=seed, delta=0.2)
        ),
    }
    checks = {
        "moment_closeness": all(r["moment_gap"] <= r["eps"] for r in results["representative"]),
        "eigenvalue_floor": all(r["min_slack"] >= -1e-9 for r in results["eigenvalues"]),
        "variance_floor": all(r["slack"] >= -1e-12 for r in results["variance"]),
        "fourier_identities": all(
            r["zero_err"] <= 1e-12 and r["max_abs"] <= 1 + 1e-12 and r["max_diff"] <= 1e-10
            for r in results["fourier"]
        ),
        "best_response_transfer": all(r["regret_y"] <= r["bound"] + 1e-9 for r in results["transfer"]),
        "lipschitz_le_half": all(r["lipschitz"] <= 0.5 for r in results["lipschitz"]),
    }
    return results, checks


def cmd_diag(args):
    results, checks = run_diagnostics(args.seed, args.pairs)
    out = [f"seed={args.seed}"]
    for n in (50, 100, 200):
        rows = [r for r in results["representative"] if r["n"] == n]
        out.append(f"representative_n{n}_max_tv={max(r['tv'] for r in rows)!r}")
        out.append(f"representative_n{n}_max_moment_gap={max(r['moment_gap'] for r in rows)!r}")
        out.append(f"representative_n{n}_eps={rows[0]['eps']!r}")
    out.append(f"eigenvalue_min_slack={min(r['min_slack'] for r in results['eigenvalues'])!r}")
    out.append(f"variance_min_slack={min(r['slack'] for r in results['variance'])!r}")
    out.append(f"fourier_max_diff={max(r['max_diff'] for r in results['fourier'])!r}")
    out.append(f"transfer_min_slack={min(r['bound'] - r['regret_y'] for r in results['transfer'])!r}")
    for r in results["gaussian"]:
        out.append(f"gaussian_tv_k{r['k']}_n{r['n']}={r['tv']!r}")
    for r in results["lipschitz"]:
        tag = "default" if r.get("default") else f"{r['delta']:g}"
        out.append(f"lipschitz_k{r['k']}_n{r['n']}_delta_{tag}={r['lipschitz']!r}")
    out += [f"check_{k}={'pass' if v else 'FAIL'}" for k, v in checks.items()]
    text = "\n".join(out) + "\n"
    sys.stdout.write(text)
    if args.out_dir:
        from .plotting import plot_diag

        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "diag.txt"), "w", encoding="utf-8") as fh:
            fh.write(text)
        for path in plot_diag(results, args.out_dir):
            log.info("wrote %s", path)
    if not all(checks.values()):
        raise VerificationFailed("diagnostic check failed")


# -- parser --------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="anongame", description="Approximate equilibria of anonymous games.")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: $ANONY_THREADS or 1)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def report_opts(sp):
        sp.add_argument("--report", help="also write the key=value report here")
        sp.add_argument("--json", help="write a JSON dump of the report here")
        sp.add_argument("--timings", action="store_true", help="include wall-clock timings")
        sp.add_argument("-o", "--output", help="profile output file")

    sp = sub.add_parser("gen", help="generate a game file")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--kind", choices=GAME_KINDS, default="uniform-random")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("solve", help="compute an approximate equilibrium")
    sp.add_argument("game")
    sp.add_argument("--algo", choices=("moment-search", "smooth"), required=True)
    sp.add_argument("--c", type=float, default=0.5, help="target regret n^-c (moment-search)")
    sp.add_argument("--grid-coarsen", type=float, default=1.0)
    sp.add_argument("--moment-degree", type=int, default=None)
    sp.add_argument("--max-grid", type=int, default=DEFAULT_MAX_GRID)
    sp.add_argument("--delta", type=float, default=None, help="perturbation override (smooth)")
    report_opts(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("verify", help="check a profile's regret")
    sp.add_argument("game")
    sp.add_argument("profile")
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--well-supported", action="store_true")
    report_opts(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("convert", help="well-supported conversion or dummy padding")
    sp.add_argument("target", choices=("ws", "pad"))
    sp.add_argument("game")
    sp.add_argument("profile", nargs="?")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--n-prime", type=int)
    report_opts(sp)
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("pipeline", help="pad, solve, convert, unpad")
    sp.add_argument("game")
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--base", choices=("oracle", "moment-search"), default="oracle")
    sp.add_argument("--c", type=float, default=0.5)
    sp.add_argument("--grid-coarsen", type=float, default=1.0)
    sp.add_argument("--max-profiles", type=int, default=MAX_GRID_PROFILES)
    report_opts(sp)
    sp.set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("oracle", help="brute-force grid search")
    sp.add_argument("action", choices=("search",))
    sp.add_argument("game")
    sp.add_argument("--step", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--well-supported", action="store_true")
    sp.add_argument("--max-profiles", type=int, default=MAX_GRID_PROFILES)
    report_opts(sp)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("pmf", help="print the outcome pmf of a profile")
    sp.add_argument("profile")
    sp.add_argument("--drop", type=int, default=None, help="leave this player out")
    sp.set_defaults(func=cmd_pmf)

    sp = sub.add_parser("bench", help="regret and runtime over a grid of sizes")
    sp.add_argument("--sweep", nargs="+", required=True, metavar="KEY=LIST")
    sp.add_argument("--algo", nargs="+", choices=("smooth", "moment-search"), default=["smooth"])
    sp.add_argument("--kind", choices=GAME_KINDS, default="uniform-random")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--seeds", type=int, default=1, help="games per cell")
    sp.add_argument("--c", type=float, default=0.5)
    sp.add_argument("--grid-coarsen", type=float, default=1.0)
    sp.add_argument("--out-dir")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("diag", help="structural diagnostics")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--pairs", type=int, default=20)
    sp.add_argument("--out-dir")
    sp.set_defaults(func=cmd_diag)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _threads(args)
        args.func(args)
    except VerificationFailed:
        return EXIT_VERIFY
    except ResourceLimitError as exc:
        print(f"error: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InternalConsistencyError, PreconditionError) as exc:
        print(f"error: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ParseError, InvalidArgument, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
