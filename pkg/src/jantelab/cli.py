"""Command line entry point.

Subcommands: simulate, ensemble, verify, keepmap, constants, exodus.
Runs are configured by a JSON file; unknown keys anywhere in the file
are errors so typos in experiment definitions cannot pass silently.
Every float lands in CSV with 17 significant digits and round-trips
exactly; per-run seeds derive from (master seed, run index) only, so
output files are byte-identical for any worker count.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 runtime error (sampler exhaustion and similar).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .bodies import Ball, Box, ConvexBody, FullSpace, HalfspacePolytope, uniform_geometry_constants
from .configuration import Configuration
from .errors import ConfigError, JanteError
from .process import StopRule, run_trajectory, start_original_chain, step_original
from .seeding import derive_seed

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

CHAIN_KINDS = ("jante", "original", "scale_free")


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _require_keys(section: dict, allowed: set, required: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")
    missing = required - set(section)
    if missing:
        raise ConfigError(f"missing key(s) {sorted(missing)} in {where}")


def body_from_descriptor(desc: dict) -> ConvexBody:
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError("body descriptor needs a 'kind'")
    kind = desc["kind"]
    try:
        if kind == "fullspace":
            _require_keys(desc, {"kind", "d"}, {"d"}, "body")
            return FullSpace(int(desc["d"]))
        if kind == "box":
            _require_keys(desc, {"kind", "lower", "upper"}, {"lower", "upper"}, "body")
            return Box(np.asarray(desc["lower"], float), np.asarray(desc["upper"], float))
        if kind == "ball":
            _require_keys(desc, {"kind", "center", "radius"}, {"center", "radius"}, "body")
            return Ball(np.asarray(desc["center"], float), float(desc["radius"]))
        if kind == "polytope":
            _require_keys(desc, {"kind", "normals", "offsets", "interior_witness"},
                          {"normals", "offsets", "interior_witness"}, "body")
            return HalfspacePolytope(desc["normals"], desc["offsets"], desc["interior_witness"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad body descriptor: {exc}") from exc
    raise ConfigError(f"unknown body kind {kind!r}")


@dataclass
class RunConfig:
    d: int
    M: int
    body: ConvexBody
    initial_points: np.ndarray
    chain: str = "jante"
    seed: int = 0
    n_runs: int = 1
    stop: StopRule = field(default_factory=StopRule)
    recenter: bool = False
    out_dir: Path = Path("out")
    workers: int = 1
    keepmap: dict | None = None
    verify: dict | None = None

    def initial(self) -> Configuration:
        try:
            return Configuration.from_points(self.initial_points)
        except JanteError as exc:
            raise ConfigError(str(exc)) from exc


_TOP_KEYS = {"d", "M", "body", "initial", "chain", "seed", "n_runs", "stop",
             "recenter", "out_dir", "workers", "keepmap", "verify"}
_STOP_KEYS = {"max_steps", "target_D", "target_F", "require_exodus"}


def _initial_points(spec, body: ConvexBody, m: int, chain: str) -> np.ndarray:
    n_points = m + 1 if chain == "original" else m
    if isinstance(spec, dict) and "points" in spec:
        _require_keys(spec, {"points"}, {"points"}, "initial")
        pts = np.asarray(spec["points"], dtype=float)
    elif isinstance(spec, dict) and "random" in spec:
        _require_keys(spec, {"random"}, {"random"}, "initial")
        rnd = spec["random"]
        _require_keys(rnd, {"lower", "upper", "seed"}, {"lower", "upper", "seed"},
                      "initial.random")
        rng = np.random.default_rng(int(rnd["seed"]))
        lo = np.asarray(rnd["lower"], float)
        hi = np.asarray(rnd["upper"], float)
        pts = rng.uniform(lo, hi, size=(n_points, len(lo)))
    else:
        raise ConfigError("initial must give 'points' or 'random'")
    if pts.ndim != 2 or pts.shape[0] != n_points:
        raise ConfigError(f"initial needs {n_points} points for chain={chain!r} "
                          f"(got shape {pts.shape})")
    if not body.contains_many(pts).all():
        raise ConfigError("initial points must lie inside the body")
    return pts


def load_config(path: Path, overrides: argparse.Namespace | None = None) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    _require_keys(raw, _TOP_KEYS, {"d", "M", "body", "initial"}, "config")

    body = body_from_descriptor(raw["body"])
    d = int(raw["d"])
    m = int(raw["M"])
    if m < 2:
        raise ConfigError("M must be >= 2")
    if body.d != d:
        raise ConfigError(f"body dimension {body.d} does not match d={d}")
    chain = raw.get("chain", "jante")
    if chain not in CHAIN_KINDS:
        raise ConfigError(f"chain must be one of {CHAIN_KINDS}")
    if chain == "scale_free" and not isinstance(body, FullSpace):
        raise ConfigError("scale_free chain needs a fullspace body")

    stop_raw = raw.get("stop", {})
    _require_keys(stop_raw, _STOP_KEYS, set(), "stop")
    stop = StopRule(
        max_steps=int(stop_raw.get("max_steps", 100_000)),
        target_D=None if stop_raw.get("target_D") is None else float(stop_raw["target_D"]),
        target_F=None if stop_raw.get("target_F") is None else float(stop_raw["target_F"]),
        require_exodus=bool(stop_raw.get("require_exodus", False)),
    )

    cfg = RunConfig(
        d=d, M=m, body=body,
        initial_points=_initial_points(raw["initial"], body, m, chain),
        chain=chain,
        seed=int(raw.get("seed", 0)),
        n_runs=int(raw.get("n_runs", 1)),
        stop=stop,
        recenter=bool(raw.get("recenter", False)),
        out_dir=Path(raw.get("out_dir", "out")),
        workers=int(raw.get("workers", 1)),
        keepmap=raw.get("keepmap"),
        verify=raw.get("verify"),
    )
    if cfg.n_runs < 1:
        raise ConfigError("n_runs must be >= 1")
    if overrides is not None:
        if getattr(overrides, "seed", None) is not None:
            cfg.seed = overrides.seed
        if getattr(overrides, "runs", None) is not None:
            cfg.n_runs = overrides.runs
        if getattr(overrides, "out", None) is not None:
            cfg.out_dir = Path(overrides.out)
        if getattr(overrides, "workers", None) is not None:
            cfg.workers = overrides.workers
    return cfg


# ---------------------------------------------------------------------------
# simulate


def _write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _summary_dict(record) -> dict:
    return {
        "tau": record.tau,
        "xi_hat": [float(v) for v in record.xi_hat],
        "n_final": record.n_final,
        "F_final": record.F_final,
        "stop_reason": record.stop_reason,
        "seed": record.seed,
        "near_tie_count": record.near_tie_count,
    }


def cmd_simulate(cfg: RunConfig) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.chain == "original":
        return _simulate_original(cfg)
    record = run_trajectory(cfg.body, cfg.initial(), cfg.stop,
                            seed=derive_seed(cfg.seed, 0),
                            recenter=cfg.recenter or cfg.chain == "scale_free",
                            record_steps=True)
    record.seed = derive_seed(cfg.seed, 0)
    header = ["n"] + [f"y_{k + 1}" for k in range(cfg.d)] + ["alpha", "F_after", "near_tie"]
    rows = ([s.n, *s.added, s.alpha, s.F_after, s.near_tie] for s in record.steps)
    _write_csv(cfg.out_dir / "trajectory.csv", header, rows)
    (cfg.out_dir / "summary.json").write_text(
        json.dumps(_summary_dict(record), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _simulate_original(cfg: RunConfig) -> int:
    rng = np.random.default_rng(derive_seed(cfg.seed, 0))
    state = start_original_chain(cfg.body, cfg.initial_points)
    rows = []
    changes = 0
    for _ in range(cfg.stop.max_steps):
        rec = step_original(state, rng)
        rows.append([rec.t, *rec.added, rec.replaced_index, rec.core_changed, rec.near_tie])
        changes += int(rec.core_changed)
    header = ["t"] + [f"y_{k + 1}" for k in range(cfg.d)] + \
        ["replaced", "core_changed", "near_tie"]
    _write_csv(cfg.out_dir / "original_trajectory.csv", header, rows)
    summary = {"steps": len(rows), "core_changes": changes,
               "seed": derive_seed(cfg.seed, 0)}
    (cfg.out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# ensemble


def _run_one(args) -> tuple:
    """One ensemble run; top level so worker processes can import it."""
    run_index, master_seed, body, points, stop, recenter = args
    seed = derive_seed(master_seed, run_index)
    record = run_trajectory(body, Configuration.from_points(points), stop,
                            seed=seed, recenter=recenter, record_steps=False)
    return (
        run_index, seed,
        -1 if record.tau is None else record.tau,
        record.n_final,
        tuple(float(v) for v in record.xi_hat),
        record.F_final,
        record.stop_reason,
        record.near_tie_count,
    )


def _ensemble_rows(cfg: RunConfig):
    recenter = cfg.recenter or cfg.chain == "scale_free"
    jobs = [(i, cfg.seed, cfg.body, cfg.initial_points, cfg.stop, recenter)
            for i in range(cfg.n_runs)]
    if cfg.workers <= 1:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=max(1, cfg.n_runs // (4 * cfg.workers))))
    results.sort(key=lambda r: r[0])
    return results


def _write_ensemble(cfg: RunConfig, results) -> dict:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    header = ["run", "seed", "tau", "n_final"] + \
        [f"xi_{k + 1}" for k in range(cfg.d)] + ["F_final", "reason", "ties"]
    with open(cfg.out_dir / "ensemble.csv", "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for run, seed, tau, n_final, xi, f_final, reason, ties in results:
            cells = [str(run), str(seed), str(tau), str(n_final)]
            cells += [_fmt(v) for v in xi]
            cells += [_fmt(f_final), reason, str(ties)]
            fh.write(",".join(cells) + "\n")
    taus = np.array([r[2] for r in results])
    xi = np.array([r[4] for r in results])
    stats = analysis.exodus_statistics(taus, cfg.M)
    aggregate = {
        "n_runs": cfg.n_runs,
        "mean_tau": None if np.isnan(stats.mean_tau) else stats.mean_tau,
        "exodus_fraction": stats.finite_fraction,
        "total_near_ties": int(sum(r[7] for r in results)),
        "reasons": {reason: int(sum(1 for r in results if r[6] == reason))
                    for reason in sorted({r[6] for r in results})},
    }
    if cfg.n_runs >= 1000:
        scan = analysis.atom_scan(xi, probes=cfg.initial_points)
        aggregate["atom_scan"] = {
            "exact_collisions": scan.exact_collisions,
            "ladder": [[r.eps, r.max_cluster, r.pair_fraction, r.probe_hit_fraction]
                       for r in scan.rungs],
        }
        _write_csv(cfg.out_dir / "atom_ladder.csv",
                   ["eps", "max_cluster", "pair_fraction", "probe_hit_fraction"],
                   ([r.eps, r.max_cluster, r.pair_fraction, r.probe_hit_fraction]
                    for r in scan.rungs))
    (cfg.out_dir / "ensemble_summary.json").write_text(
        json.dumps(aggregate, indent=2, sort_keys=True) + "\n")
    return aggregate


def cmd_ensemble(cfg: RunConfig) -> int:
    if cfg.chain == "original":
        raise ConfigError("ensemble runs need a core chain (jante or scale_free)")
    _write_ensemble(cfg, _ensemble_rows(cfg))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.chain == "original":
        raise ConfigError("verify runs need a core chain (jante or scale_free)")
    from .ensemble import run_increment_ensemble, run_limit_ensemble

    opts = dict(cfg.verify or {})
    _require_keys(opts, {"drift_runs", "drift_steps", "anchor_step", "eps"}, set(), "verify")
    drift_runs = int(opts.get("drift_runs", max(200, cfg.n_runs)))
    drift_steps = int(opts.get("drift_steps", 40))
    initial = cfg.initial()

    checks: list[tuple[str, bool, str]] = []
    ens = run_increment_ensemble(cfg.body, initial, drift_runs, drift_steps, seed=cfg.seed)
    drift = analysis.drift_report(ens, "logF", d=cfg.d, M=cfg.M)
    checks.append(("logF_drift", bool(drift.passed),
                   f"mean {drift.conditional_mean:.5f} <= bound {drift.bound:.5f} "
                   f"+ 3*SE {3 * drift.standard_error:.5f}"))
    drop = analysis.drop_probability_report(ens, cfg.d, cfg.M)
    checks.append(("drop_probability", drop.passed,
                   f"freq {drop.frequency:.5f} >= bound {drop.bound:.5f} "
                   f"- 3*SE {3 * drop.standard_error:.5f}"))
    total_steps = ens.F.size - drift_runs
    tie_rate = ens.near_ties / total_steps
    checks.append(("near_tie_rate", tie_rate < 1e-6, f"rate {tie_rate:g} < 1e-6"))

    if cfg.stop.require_exodus:
        limits = run_limit_ensemble(cfg.body, initial, cfg.n_runs, seed=cfg.seed + 1,
                                    require_exodus=True, max_steps=cfg.stop.max_steps)
        stats = analysis.exodus_statistics(limits.tau, cfg.M)
        checks.append(("exodus_all_finite", stats.all_finite,
                       f"fraction {stats.finite_fraction:.6f}"))
        if cfg.M == 2 and stats.geometric_p_value is not None:
            checks.append(("tau_geometric_fit", stats.geometric_p_value > 1e-3,
                           f"chi-square p {stats.geometric_p_value:.5f} > 0.001"))

    anchor = opts.get("anchor_step")
    if anchor is not None:
        eps = float(opts.get("eps", 0.5))
        limits = run_limit_ensemble(cfg.body, initial, cfg.n_runs, seed=cfg.seed + 2,
                                    target_D=1e-9, max_steps=cfg.stop.max_steps,
                                    anchor_step=int(anchor))
        cov = analysis.tightness_coverage(limits.xi, limits.anchor_mu, limits.anchor_F,
                                          cfg.d, cfg.M, eps)
        checks.append(("tightness_coverage", cov.passed,
                       f"coverage {cov.coverage:.4f} >= {cov.required:.4f}"))

    all_ok = all(ok for _, ok, _ in checks)
    report = {name: {"passed": ok, "detail": detail} for name, ok, detail in checks}
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    (cfg.out_dir / "verify.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _write_csv(cfg.out_dir / "drift_bars.csv",
               ["functional", "mean", "se", "bound"],
               [["logF", drift.conditional_mean, drift.standard_error, drift.bound],
                ["drop_prob", drop.frequency, drop.standard_error, drop.bound]])
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if all_ok else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# keepmap / constants / exodus


def cmd_keepmap(cfg: RunConfig) -> int:
    opts = dict(cfg.keepmap or {})
    _require_keys(opts, {"bbox", "resolution"}, {"bbox", "resolution"}, "keepmap")
    initial = cfg.initial()
    grid = analysis.keepmap_grid(initial, cfg.body, opts["bbox"], opts["resolution"])
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    rows = zip(grid["ix"], grid["iy"], grid["x"], grid["y"], grid["cls"])
    _write_csv(cfg.out_dir / "keepmap.csv", ["ix", "iy", "x", "y", "class"], rows)
    _write_csv(cfg.out_dir / "core_points.csv",
               ["label"] + [f"x_{k + 1}" for k in range(cfg.d)],
               ([label, *pt] for label, pt in zip(initial.labels, initial.points)))
    return EXIT_OK


def cmd_constants(args) -> int:
    if args.config is not None:
        cfg = load_config(args.config, args)
        geo = uniform_geometry_constants(cfg.body)
        consts = analysis.compute_constants(cfg.d, cfg.M, geo.c)
        payload = consts.as_dict()
        payload["r0"] = geo.r0
        payload["b_r0"] = geo.b_r0
        payload["c_approximate"] = geo.approximate
    else:
        if args.d is None or args.M is None:
            raise ConfigError("constants needs --config or both --d and --M")
        consts = analysis.compute_constants(args.d, args.M, args.c)
        payload = consts.as_dict()
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "constants.json").write_text(text + "\n")
    return EXIT_OK


def cmd_exodus(cfg: RunConfig) -> int:
    if cfg.chain == "original":
        raise ConfigError("exodus runs need a core chain (jante or scale_free)")
    cfg.stop.require_exodus = True
    results = _ensemble_rows(cfg)
    _write_ensemble(cfg, results)
    taus = np.array([r[2] for r in results])
    stats = analysis.exodus_statistics(taus, cfg.M)
    payload = {
        "n_runs": stats.n_runs,
        "finite_fraction": stats.finite_fraction,
        "mean_tau": stats.mean_tau,
        "geometric_p_value": stats.geometric_p_value,
    }
    (cfg.out_dir / "exodus.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _write_csv(cfg.out_dir / "tau_histogram.csv", ["tau", "count"],
               sorted(stats.histogram.items()))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jantelab",
                                     description="Jante's law process simulation lab")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", type=Path, required=config_required)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--runs", type=int, default=None)
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--workers", type=int, default=None)

    for name in ("simulate", "ensemble", "verify", "keepmap", "exodus"):
        add_common(sub.add_parser(name))
    constants = sub.add_parser("constants")
    add_common(constants, config_required=False)
    constants.add_argument("--d", type=int, default=None)
    constants.add_argument("--M", type=int, default=None)
    constants.add_argument("--c", type=float, default=1.0)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "constants":
            return cmd_constants(args)
        cfg = load_config(args.config, args)
        if args.command == "simulate":
            if cfg.n_runs != 1:
                raise ConfigError("simulate expects n_runs = 1 (use ensemble otherwise)")
            return cmd_simulate(cfg)
        if args.command == "ensemble":
            return cmd_ensemble(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "keepmap":
            return cmd_keepmap(cfg)
        if args.command == "exodus":
            return cmd_exodus(cfg)
        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except JanteError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
