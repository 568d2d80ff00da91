"""``ordembed`` command line: gen, embed, eval, oracle, sweep.

Settings come from an optional ``--config`` file of ``key = value`` lines
(keys are the long flag names, e.g. ``grid = 1dnlogn,3dnlogn``); flags given
on the command line win.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import edm, experiment, io, oracles, risk, solvers
from .triplets import get_link

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3


def read_config_file(path) -> dict[str, str]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string("[ordembed]\n" + Path(path).read_text())
    return {k.replace("-", "_"): v for k, v in parser["ordembed"].items()}


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("experiment settings")
    g.add_argument("--config", help="key = value settings file")
    g.add_argument("--n", type=int)
    g.add_argument("--d", type=int)
    g.add_argument("--grid", help="comma list of |S|; entries may be multiples like 3dnlogn")
    g.add_argument("--trials", type=int)
    g.add_argument("--link", choices=["logistic", "noiseless"])
    g.add_argument("--solvers", help=f"comma list from {','.join(solvers.SOLVERS)}")
    g.add_argument("--holdout", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--alpha", type=float, help="scale applied to the true Gram matrix")
    g.add_argument("--lam", type=float, help="nuclear-norm radius (default: oracle trace(G*))")
    g.add_argument("--kernel-correct", action="store_true", default=None,
                   help="re-estimate the kernel coefficient of each fitted Gram matrix")
    g.add_argument("--workers", type=int)
    g.add_argument("--max-iters", type=int)
    g.add_argument("--rel-tol", type=float)
    g.add_argument("--out")


def _settings(args) -> dict[str, str]:
    merged: dict[str, str] = {}
    if args.config:
        merged.update(read_config_file(args.config))
    for key in ("n", "d", "grid", "trials", "link", "solvers", "holdout", "seed", "alpha", "lam",
                "kernel_correct", "workers", "max_iters", "rel_tol", "out"):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = str(val)
    return merged


def _truthy(v: str) -> bool:
    return v.strip().lower() in ("1", "true", "yes", "on")


def build_config(s: dict[str, str]) -> experiment.ExperimentConfig:
    n = int(s.get("n", 64))
    d = int(s.get("d", 2))
    scfg = solvers.SolverConfig(
        max_iters=int(s.get("max_iters", 2000)),
        rel_tol=float(s.get("rel_tol", 1e-6)),
    )
    kw = dict(
        n=n,
        d=d,
        sample_grid=experiment.parse_grid(s.get("grid", "1dnlogn,3dnlogn,10dnlogn"), n, d),
        trials=int(s.get("trials", 36)),
        link=s.get("link", "logistic"),
        holdout_size=int(s.get("holdout", 10_000)),
        seed=int(s.get("seed", 0)),
        gram_scale=float(s.get("alpha", 1.0)),
        kernel_correct=_truthy(s.get("kernel_correct", "false")),
        lam=float(s["lam"]) if "lam" in s else None,
        workers=int(s.get("workers", 1)),
        solver=scfg,
    )
    if "solvers" in s:
        kw["solvers"] = [x.strip() for x in s["solvers"].split(",") if x.strip()]
    return experiment.ExperimentConfig(**kw)


# -- subcommands ----------------------------------------------------------------------


def cmd_gen(args) -> int:
    s = _settings(args)
    cfg = build_config(s)
    out = Path(s.get("out", "data"))
    out.mkdir(parents=True, exist_ok=True)
    samples = args.samples or cfg.sample_grid[-1]
    truth = experiment.trial_truth(cfg, args.trial)
    train = experiment.training_data(cfg, args.trial, samples, truth.G_star)
    io.save_embedding(out / "points.json", truth.points, kind="points")
    io.save_embedding(out / "gram.json", truth.G_star, kind="gram", d=cfg.d)
    io.save_triplets(out / "train.csv", train)
    io.save_triplets(out / "holdout.csv", truth.holdout)
    print(json.dumps({"out": str(out), "n": cfg.n, "d": cfg.d, "train": samples,
                      "holdout": cfg.holdout_size, "bayes_error": truth.bayes_error}))
    return EXIT_OK


def cmd_embed(args) -> int:
    s = _settings(args)
    data = io.load_triplets(args.triplets, int(s["n"]) if "n" in s else None)
    d = int(s.get("d", 2))
    if args.solver.startswith("nuclear"):
        lam = float(s["lam"]) if "lam" in s else np.sqrt(d) * data.n * args.gamma
    else:
        lam = None
    scfg = solvers.SolverConfig(max_iters=int(s.get("max_iters", 2000)),
                                rel_tol=float(s.get("rel_tol", 1e-6)),
                                seed=int(s.get("seed", 0)))
    t0 = time.perf_counter()
    res = solvers.solve(args.solver, data, d, lam, scfg)
    G = res.G_hat
    if _truthy(s.get("kernel_correct", "false")):
        G = edm.kernel_correct(G)
    if "out" in s:
        io.save_embedding(s["out"], G, kind="gram", d=d)
    print(json.dumps({"solver": args.solver, "n": data.n, "observations": len(data),
                      "objective": res.objective_trace[-1], "iterations": res.iterations,
                      "converged": res.converged, "wall_time_s": time.perf_counter() - t0}))
    return EXIT_OK


def cmd_eval(args) -> int:
    _, G, _ = io.load_embedding(args.gram)
    holdout = io.load_triplets(args.holdout, G.shape[0])
    report = {"pred_err": risk.prediction_error(G, holdout), "holdout": len(holdout)}
    if args.truth:
        kind, M, _ = io.load_embedding(args.truth)
        G_star = M if kind == "gram" else edm.gram_from_embedding(edm.center_embedding(M))
        frob = float(np.linalg.norm(G - G_star))
        report.update(frob_err=frob, rel_frob_err=frob / float(np.linalg.norm(G_star)),
                      bayes_error=risk.bayes_error(G_star, get_link(args.link or "logistic")))
    text = json.dumps(report)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return EXIT_OK


def cmd_oracle(args) -> int:
    results = oracles.run_suite(seed=args.seed or 0)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.seconds:6.2f}s  {r.detail}")
    if args.out:
        Path(args.out).write_text(json.dumps([dataclasses.asdict(r) for r in results], indent=2))
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


def cmd_sweep(args) -> int:
    s = _settings(args)
    cfg = build_config(s)
    out = Path(s.get("out", "results"))
    out.mkdir(parents=True, exist_ok=True)
    rows = experiment.run_sweep(cfg)
    summary = experiment.summarize(rows)
    io.save_results(out / "results.csv", rows)
    io.save_table(out / "summary.csv", summary)
    for rec in summary:
        print(f"{rec['solver']:<22} |S|={rec['samples']:<7} pred_err={rec['pred_err_median']:.4f} "
              f"rel_frob={rec['rel_frob_err_median']:.4f} failures={rec['failures']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ordembed", description="Ordinal embedding from triplet comparisons")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="draw points and labelled train/holdout triplet files")
    _common(g)
    g.add_argument("--samples", type=int, help="training triplets (default: largest grid value)")
    g.add_argument("--trial", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("embed", help="fit a Gram matrix from a triplet file")
    _common(e)
    e.add_argument("--triplets", required=True)
    e.add_argument("--solver", choices=solvers.SOLVERS, default="rank_d_pgd")
    e.add_argument("--gamma", type=float, default=1.0,
                   help="entrywise bound used for the default radius sqrt(d) n gamma")
    e.set_defaults(func=cmd_embed)

    v = sub.add_parser("eval", help="score a saved Gram matrix on a holdout file")
    v.add_argument("--gram", required=True)
    v.add_argument("--holdout", required=True)
    v.add_argument("--truth", help="true Gram/points JSON for Frobenius error")
    v.add_argument("--link", choices=["logistic", "noiseless"])
    v.add_argument("--out")
    v.set_defaults(func=cmd_eval)

    o = sub.add_parser("oracle", help="run the spectral identity checks")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--out", help="write a JSON report here")
    o.set_defaults(func=cmd_oracle)

    w = sub.add_parser("sweep", help="solvers x |S| x trials experiment")
    _common(w)
    w.set_defaults(func=cmd_sweep)
    return p


def _fail(code: int, exc: BaseException) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except solvers.NumericalFailure as exc:
        return _fail(EXIT_NUMERIC, exc)
    except (ValueError, IndexError, FileNotFoundError, KeyError) as exc:
        return _fail(EXIT_INVALID, exc)


if __name__ == "__main__":
    sys.exit(main())
