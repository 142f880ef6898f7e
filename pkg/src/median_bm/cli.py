"""Command-line batch runner.

    median-bm kernel-eval --op limit-covariance --s 1 --t 1
    median-bm simulate --n 1001 --grid 0.25,0.5,1,2 --reps 100 --seed 7 --out paths.csv
    median-bm verify --suite acceptance --seed 42 --out reports/

Values come from (in increasing priority) built-in defaults, the section
named after the subcommand in an INI file given with ``--config``, and
command-line flags. Exit status: 0 on success, 1 if a verification failed,
2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys

import numpy as np

from . import acceptance as acc
from . import kernel, limit, paths, verify, walk
from . import rng as _rng

FORMAT_TAG = acc.FORMAT_TAG

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _ints(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).split(",") if v.strip()]


# (name, type, default) per subcommand; None default means "required or optional"
OPTIONS = {
    "kernel-eval": [("op", str, None), ("s", float, None), ("t", float, None), ("n", int, None),
                    ("x", float, None), ("y", float, None), ("delta", float, None),
                    ("kappa", float, 3.0)],
    "walk": [("pt1", float, None), ("pt2", float, None), ("eps", float, None), ("mu", float, None),
             ("k", str, "10"), ("mc_reps", int, 0), ("seed", int, None), ("out", str, None)],
    "simulate": [("n", int, 1001), ("grid", str, "0.25,0.5,1,2"), ("reps", int, 100),
                 ("seed", int, None), ("out", str, None), ("summary", str, None)],
    "limit-sample": [("grid", str, "0.25,0.5,1,2"), ("reps", int, 100), ("seed", int, None),
                     ("out", str, None), ("summary", str, None)],
    "verify": [("suite", str, "acceptance"), ("seed", int, None), ("out", str, None),
               ("n", int, 11), ("y", float, 0.05), ("delta", float, 0.01), ("x0", float, None),
               ("eps", float, 0.2), ("p", float, 3.0), ("reps", int, 100_000),
               ("delta0", float, None), ("constant", float, 1.0),
               ("alphas", str, "-0.009259259259259259,0.05555555555555555,0.2"),
               ("deltas", str, "0.01,0.0001,1e-06"), ("only", str, None)],
    "report": [("input", str, None)],
}

KERNEL_OPS = ("limit-covariance", "increment-variance", "median-density", "median-cdf",
              "psi", "p1", "p2", "walk-params", "tail-bound")
SUITES = ("acceptance", "cond", "split", "key", "certificates")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="median-bm", description="Median of Brownian motions: simulation and checks.")
    parser.add_argument("--config", help="INI file; one section per subcommand")
    parser.add_argument("--workers", type=int, default=None,
                        help=f"worker threads (default ${_rng.WORKERS_ENV} or 1); never changes results")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, opts in OPTIONS.items():
        sp = sub.add_parser(name)
        for opt, typ, _ in opts:
            kw = {"type": typ, "default": None}
            if name == "kernel-eval" and opt == "op":
                kw["choices"] = KERNEL_OPS
            if name == "verify" and opt == "suite":
                kw["choices"] = SUITES
            if opt == "input":
                sp.add_argument("input", nargs="?", default=None, help="directory holding reports.json")
                continue
            sp.add_argument("--" + opt.replace("_", "-"), dest=opt, **kw)
        sp.add_argument("--config", dest="sub_config", default=None)
        sp.add_argument("--workers", dest="sub_workers", type=int, default=None)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, the INI section for the subcommand and flags."""
    name = args.command
    cfg = {opt: default for opt, _, default in OPTIONS[name]}
    path = args.sub_config or args.config
    if path:
        ini = configparser.ConfigParser()
        if not ini.read(path):
            raise ConfigError(f"cannot read config file {path!r}")
        if ini.has_section(name):
            types = {opt: typ for opt, typ, _ in OPTIONS[name]}
            for key, raw in ini.items(name):
                key = key.replace("-", "_")
                if key not in types:
                    raise ConfigError(f"unknown key {key!r} in section [{name}] of {path}")
                try:
                    cfg[key] = types[key](raw)
                except ValueError as exc:
                    raise ConfigError(f"bad value for {key!r} in {path}: {raw!r}") from exc
    for opt, _, _ in OPTIONS[name]:
        val = getattr(args, opt, None)
        if val is not None:
            cfg[opt] = val
    if "seed" in cfg and cfg["seed"] is None:
        cfg["seed"] = _rng.fresh_seed()
    return cfg


def _workers(args) -> int | None:
    return args.sub_workers if args.sub_workers is not None else args.workers


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(acc._plain(obj), indent=2, sort_keys=True) + "\n"


def _need(cfg: dict, *keys) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def cmd_kernel_eval(cfg: dict, workers) -> int:
    op = cfg["op"]
    _need(cfg, "op")
    if op == "limit-covariance":
        _need(cfg, "s", "t")
        out = float(kernel.limit_covariance(cfg["s"], cfg["t"]))
    elif op == "increment-variance":
        _need(cfg, "s", "t")
        out = kernel.increment_variance(cfg["s"], cfg["t"])
    elif op == "median-density":
        _need(cfg, "n", "x")
        out = float(kernel.median_density(cfg["n"], cfg["x"]))
    elif op == "median-cdf":
        _need(cfg, "n", "x")
        out = kernel.median_cdf(cfg["n"], cfg["x"])
    elif op in ("psi", "p1", "p2"):
        _need(cfg, "x", "y", "delta")
        out = getattr(kernel, op)(cfg["x"], cfg["y"], cfg["delta"])
    elif op == "walk-params":
        _need(cfg, "x", "y", "delta")
        wp = kernel.walk_params(kernel.JumpQuery(cfg["x"], cfg["y"], cfg["delta"]))
        sys.stdout.write(_json({"format": FORMAT_TAG, "config": cfg, "walk_params": wp.__dict__}))
        return EXIT_OK
    else:  # tail-bound
        _need(cfg, "n", "y")
        lhs, shape = kernel.tail_bound_check(cfg["n"], cfg["y"], cfg["kappa"])
        sys.stdout.write(f"{lhs!r} {shape!r}\n")
        return EXIT_OK
    sys.stdout.write(f"{out!r}\n")
    return EXIT_OK


def cmd_walk(cfg: dict, workers) -> int:
    if cfg["pt1"] is not None and cfg["pt2"] is not None:
        spec = walk.TrinomialSpec(cfg["pt1"], cfg["pt2"])
    elif cfg["eps"] is not None and cfg["mu"] is not None:
        spec = walk.TrinomialSpec.from_eps_mu(cfg["eps"], cfg["mu"])
    else:
        raise ConfigError("walk needs --pt1/--pt2 or --eps/--mu")
    ks = _ints(cfg["k"])
    exact = walk.phi_path(spec, ks)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["format", "pt1", "pt2", "seed", "mc_reps", "k", "phi_exact", "phi_mc", "phi_mc_se"])
    for i, (k, ph) in enumerate(zip(ks, exact)):
        mc_mean = mc_se = ""
        if cfg["mc_reps"]:
            est = walk.mc_phi_k(spec, k, cfg["mc_reps"], _rng.derive_seed(cfg["seed"], _rng.WALK, i), workers)
            mc_mean, mc_se = repr(est.mean), repr(est.std_err)
        w.writerow([FORMAT_TAG, repr(spec.pt1), repr(spec.pt2), cfg["seed"], cfg["mc_reps"], k,
                    repr(float(ph)), mc_mean, mc_se])
    _emit(buf.getvalue(), cfg["out"])
    return EXIT_OK


def _samples_csv(values: np.ndarray, times, head: list, meta: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(head + ["rep"] + [f"t={t!r}" for t in times])
    for r, row in enumerate(values):
        w.writerow(meta + [r] + [repr(float(v)) for v in row])
    return buf.getvalue()


def _summary(values: np.ndarray, times, cfg: dict, extra: dict | None = None) -> str:
    cov = np.cov(values, rowvar=False, ddof=1) if values.shape[0] > 1 else np.zeros((len(times),) * 2)
    echoed = {k: v for k, v in cfg.items() if k not in ("out", "summary")}
    doc = {"format": FORMAT_TAG, "config": echoed, "times": list(times),
           "mean": values.mean(axis=0).tolist(), "covariance": np.atleast_2d(cov).tolist()}
    doc.update(extra or {})
    return _json(doc)


def cmd_simulate(cfg: dict, workers) -> int:
    grid = paths.TimeGrid.parse(cfg["grid"])
    spec = paths.EnsembleSpec(cfg["n"], grid, cfg["seed"])
    values = paths.simulate_median_paths(spec, cfg["reps"], workers)
    times = [float(t) for t in grid.times]
    head = ["format", "seed", "n", "reps"]
    meta = [FORMAT_TAG, cfg["seed"], cfg["n"], cfg["reps"]]
    _emit(_samples_csv(values, times, head, meta), cfg["out"])
    if cfg["summary"]:
        _emit(_summary(values, times, cfg), cfg["summary"])
    return EXIT_OK


def cmd_limit_sample(cfg: dict, workers) -> int:
    grid = paths.TimeGrid.parse(cfg["grid"])
    sample = limit.sample_limit(grid, cfg["reps"], cfg["seed"], workers)
    times = [float(t) for t in grid.times]
    head = ["format", "seed", "reps", "jitter_used"]
    meta = [FORMAT_TAG, cfg["seed"], cfg["reps"], repr(float(sample.cov.jitter_used))]
    _emit(_samples_csv(sample.paths, times, head, meta), cfg["out"])
    if cfg["summary"]:
        _emit(_summary(sample.paths, times, cfg, {"jitter_used": sample.cov.jitter_used,
                                                  "analytic": sample.cov.entries.tolist()}),
              cfg["summary"])
    return EXIT_OK


def _print_results(results) -> None:
    for r in results:
        sys.stdout.write(r.summary_line() + "\n")


def cmd_verify(cfg: dict, workers) -> int:
    suite = cfg["suite"]
    if suite == "acceptance":
        only = set(_ints(cfg["only"])) if cfg["only"] else None
        ac = acc.AcceptanceConfig(seed=cfg["seed"])
        results = acc.run_suite(ac, workers=workers, only=only)
        config = ac.to_dict()
        if only:
            config["only"] = sorted(only)
    else:
        c = cfg
        if suite == "cond":
            rep = verify.verify_cond_inequality(c["n"], c["y"], c["delta"], c["reps"], c["seed"], workers)
        elif suite == "split":
            rep = verify.verify_split_bound(c["n"], c["y"], c["delta"], c["reps"], c["seed"],
                                            x0=c["x0"], workers=workers)
        elif suite == "key":
            rep = verify.verify_key_estimate(c["eps"], c["delta"], c["n"], c["p"], c["reps"], c["seed"],
                                             delta0=c["delta0"], constant=c["constant"], workers=workers)
        else:
            pts = [(a, d) for a in _floats(c["alphas"]) for d in _floats(c["deltas"])]
            rep = verify.verify_expansion_certificates(pts, delta0=c["delta0"])
        results = [acc.CriterionResult(0, suite, [rep])]
        config = {k: v for k, v in cfg.items() if k != "out"}
    _print_results(results)
    if cfg["out"]:
        acc.write_reports(results, config, cfg["out"])
    else:
        sys.stdout.write(acc.results_json(results, config))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def cmd_report(cfg: dict, workers) -> int:
    import os
    _need(cfg, "input")
    path = cfg["input"]
    if os.path.isdir(path):
        path = os.path.join(path, "reports.json")
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report {path!r}: {exc}") from exc
    if doc.get("format") != FORMAT_TAG:
        raise ConfigError(f"{path} has format {doc.get('format')!r}, expected {FORMAT_TAG!r}")
    for crit in doc["criteria"]:
        status = "PASS" if crit["passed"] else "FAIL"
        sys.stdout.write(f"criterion {crit['number']:2d} [{status}] {crit['name']}\n")
        for rep in crit["reports"]:
            if not rep["passed"]:
                sys.stdout.write(f"    failed {rep['claim_id']}: lhs={rep['lhs']!r} rhs={rep['rhs']!r} "
                                 f"margin={rep['margin']!r}\n")
    return EXIT_OK if doc["passed"] else EXIT_FAILED


COMMANDS = {
    "kernel-eval": cmd_kernel_eval,
    "walk": cmd_walk,
    "simulate": cmd_simulate,
    "limit-sample": cmd_limit_sample,
    "verify": cmd_verify,
    "report": cmd_report,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve(args)
        return COMMANDS[args.command](cfg, _workers(args))
    except ConfigError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except ValueError as exc:
        sys.stderr.write(f"median-bm: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
