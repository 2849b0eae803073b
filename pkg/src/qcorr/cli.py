"""Command-line pipelines. Data goes to CSV files under ``--out``; progress to stderr.

Exit codes: 0 ok, 2 config error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, fitkit, stats, walkmodel
from ._jit import backend_name
from .config import ExperimentConfig, parse_config, with_overrides
from .errors import InvalidArgs, ParseError, ValidationError
from .gateset import FAMILIES, corpse_schedule, primitive_schedule, schedule_rows, wamf_schedule
from .noise import NoiseSpec, draw_correlated, draw_uncorrelated, n_slots, sample_trace, task_rng
from .qcore import clifford_table, table_csv
from .simulator import (RecordTable, build_timeline, gate_boundaries, random_circuits,
                        run_experiment)

log = logging.getLogger("qcorr")

SUBCOMMANDS = ("gen-circuits", "simulate", "variance", "fit", "scan", "walk-check", "acf",
               "ff", "predict")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_manifest(out: Path, sub: str, cfg: ExperimentConfig):
    text = (f"# run manifest; feed back with --config to reproduce\n"
            f"# subcommand = {sub}\n# version = {__version__}\n# backend = {backend_name()}\n"
            + cfg.echo())
    (out / f"manifest_{sub.replace('-', '_')}.txt").write_text(text)


def _label(cfg, m):
    return cfg.J if m is None else m


def _records_path(out: Path, cfg, m):
    if len(cfg.sweep) == 1:
        return out / "records.csv"
    return out / f"records_Mn{_label(cfg, m)}.csv"


def _write_records(path, tables):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("circuit_id", "realization_id", "family", "p_true", "p_est"))
        for t in tables:
            for row in zip(t.circuit_id, t.realization_id, t.p_true, t.p_est):
                w.writerow((int(row[0]), int(row[1]), t.family, repr(float(row[2])),
                            repr(float(row[3]))))


# ---------------------------------------------------------------------------


def cmd_gen_circuits(cfg, out, threads):
    circuits = random_circuits(cfg.J, cfg.k, cfg.seed)
    write_csv(out / "circuits.csv", ("circuit_id", "position", "clifford_index"),
              ((c.circuit_id, j, idx) for c in circuits for j, idx in enumerate(c.indices)))
    (out / "cliffords.csv").write_text(table_csv())
    write_csv(out / "schedules.csv",
              ("family", "clifford_index", "segment_index", "theta", "amp_ratio", "phase",
               "duration"),
              (row for fam in FAMILIES for row in schedule_rows(fam)))
    spec = NoiseSpec(cfg.sigma_L2, cfg.sigma_S2, cfg.block_length, cfg.seed)
    trace = sample_trace(spec, gate_boundaries(circuits[0], cfg.family),
                         task_rng(cfg.seed, circuits[0].circuit_id, 0))
    write_csv(out / "trace.csv", ("t_start", "t_end", "delta"), trace.rows())


def cmd_simulate(cfg, out, threads):
    circuits = random_circuits(cfg.J, cfg.k, cfg.seed)
    for m in cfg.sweep:
        tables = []
        for fam in cfg.family_list:
            log.info("simulate family=%s M_n=%s k=%d n=%d", fam, _label(cfg, m), cfg.k, cfg.n)
            run = dataclasses.replace(cfg, family=fam, M_n="J" if m is None else m)
            tables.append(run_experiment(run, circuits, threads))
        _write_records(_records_path(out, cfg, m), tables)


def read_records(path):
    """Records file split by family."""
    rows = read_csv(path)
    if not rows:
        raise InvalidArgs(f"no records in {path}")
    out = {}
    for fam in dict.fromkeys(r["family"] for r in rows):
        sel = [r for r in rows if r["family"] == fam]
        out[fam] = RecordTable(fam, np.array([int(r["circuit_id"]) for r in sel]),
                               np.array([int(r["realization_id"]) for r in sel]),
                               np.array([float(r["p_true"]) for r in sel]),
                               np.array([float(r["p_est"]) for r in sel]))
    return out


def _correlation(cfg):
    if cfg.sigma_S2 == 0:
        return "correlated"
    if cfg.sigma_L2 == 0:
        return "uncorrelated"
    return "mixed"


def cmd_variance(cfg, out, threads):
    var_rows, gamma_rows, ratio_rows, qpn_rows = [], [], [], []
    for m in cfg.sweep:
        path = _records_path(out, cfg, m)
        if not path.exists():
            raise InvalidArgs(f"{path} missing; run simulate first")
        for fam, table in read_records(path).items():
            label = _label(cfg, m)
            log.info("variance family=%s M_n=%s reorderings=%d", fam, label, cfg.reorderings)
            ts = stats.cumulative_variance_trajectories(table, cfg.reorderings, cfg.seed)
            for q, v in enumerate(ts.variances):
                var_rows += [(fam, label, q, n, x) for n, x in zip(ts.n, v)]
            var_rows += [(fam, label, -1, n, x) for n, x in zip(ts.n, ts.mean)]
            means = table.grid("p_est").mean(axis=1)
            try:
                params, ks = stats.gamma_fit(means)
                gamma_rows.append((fam, _correlation(cfg), params.alpha, params.beta, ks))
            except InvalidArgs:
                gamma_rows.append((fam, _correlation(cfg), "nan", "nan", "nan"))
            try:
                ratio = stats.variance_ratio(ts)
            except ZeroDivisionError:
                ratio = float("inf")
            ratio_rows.append((fam, label, ratio))
            p = float(means.mean())
            qpn_rows.append((fam, label, p, fitkit.qpn_bound(p, cfg.r) / ts.n[-1], ts.mean[-1]))
    write_csv(out / "variance.csv", ("family", "M_n", "reordering_id", "n", "variance"), var_rows)
    write_csv(out / "gammafit.csv", ("family", "correlation", "alpha", "beta", "ks_stat"),
              gamma_rows)
    write_csv(out / "ratio.csv", ("family", "M_n", "ratio"), ratio_rows)
    write_csv(out / "qpn.csv", ("family", "M_n", "mean_p", "qpn_floor", "final_variance"),
              qpn_rows)


def read_mean_trajectories(path):
    """``{(family, M_n): mean trajectory}`` from a variance.csv."""
    traj = {}
    for r in read_csv(path):
        if r["reordering_id"] == "-1":
            traj.setdefault((r["family"], int(r["M_n"])), []).append(
                (int(r["n"]), float(r["variance"])))
    return {k: np.array([x for _, x in sorted(v)]) for k, v in traj.items()}


def _mean_trajectories(out):
    path = out / "variance.csv"
    if not path.exists():
        raise InvalidArgs(f"{path} missing; run variance first")
    return read_mean_trajectories(path)


def cmd_fit(cfg, out, threads):
    rows = []
    for (fam, m), v in _mean_trajectories(out).items():
        r = fitkit.fit_error_strengths(v, fam, cfg.J)
        aic = fitkit.aic(r.rss, r.n_pts) if r.rss > 0 else float("-inf")
        bic = fitkit.bic(r.rss, r.n_pts) if r.rss > 0 else float("-inf")
        log.info("fit family=%s M_n=%d sigma_S2=%.3g sigma_L2=%.3g", fam, m, r.sigma_S2,
                 r.sigma_L2)
        rows.append((fam, r.sigma_S2, r.sigma_L2, r.rss, aic, bic, m))
    write_csv(out / "fit.csv", ("family", "sigma_S2", "sigma_L2", "rss", "aic", "bic", "M_n"),
              rows)


def scan_grid(cfg):
    lo = cfg.scan_min if cfg.scan_min > 0 else cfg.scan_max * 1e-6
    grid = np.logspace(np.log10(lo), np.log10(cfg.scan_max), cfg.scan_points)
    return grid if cfg.scan_min > 0 else np.concatenate(([0.0], grid))


def cmd_scan(cfg, out, threads):
    key = (cfg.family, _label(cfg, cfg.block_length))
    traj = _mean_trajectories(out)
    if key not in traj:
        raise InvalidArgs(f"no mean trajectory for family={key[0]} M_n={key[1]}")
    res = fitkit.likelihood_scan(traj[key], cfg.family, scan_grid(cfg), cfg.J)
    write_csv(out / "scan.csv", ("sigma_L2_fixed", "sigma_S2_refit", "rel_likelihood",
                                 "delta_bic"),
              ((p.sigma_L2, p.sigma_S2, p.rel_likelihood, p.delta_bic) for p in res.points))
    write_csv(out / "scan_interval.csv", ("family", "criterion", "lower", "upper", "best"),
              [(cfg.family, "rel_likelihood>=0.05", *res.likelihood_interval, res.best.sigma_L2),
               (cfg.family, "delta_bic<=10", *res.bic_interval, res.best.sigma_L2)])


def walk_check(circuits, delta):
    """``(p_true, p_walk)`` per circuit under static detuning ``delta``."""
    from . import kernels
    out = []
    for c in circuits:
        tl = build_timeline(c, "primitive")
        d_s = np.zeros((1, n_slots(tl.duration)))
        _, b = kernels.propagate_timeline(*tl.args(), d_s, np.full((1, 1), delta))
        out.append((float(abs(b[0]) ** 2), walkmodel.walk(c, [delta] * len(c))[1]))
    return out


def cmd_walk_check(cfg, out, threads):
    circuits = random_circuits(cfg.J, cfg.k, cfg.seed)
    rows = [(c.circuit_id, pt, pw, abs(pt - pw))
            for c, (pt, pw) in zip(circuits, walk_check(circuits, cfg.delta))]
    write_csv(out / "walkcheck.csv", ("circuit_id", "p_true", "p_walk", "abs_diff"), rows)


def error_norm_acf(cfg, m, family=None):
    """ACF of per-gate error-vector magnitudes, averaged over circuits and realizations."""
    family = family or cfg.family
    spec = NoiseSpec(cfg.sigma_L2, cfg.sigma_S2, m, cfg.seed)
    acc = np.zeros(cfg.max_lag + 1)
    count = 0
    for c in random_circuits(cfg.J, cfg.k, cfg.seed):
        tl = build_timeline(c, family, m)
        d_s = np.empty((cfg.n, n_slots(tl.duration)))
        d_l = np.empty((cfg.n, -(-cfg.J // spec.blocks(cfg.J))))
        for j in range(cfg.n):
            rng = task_rng(cfg.seed, c.circuit_id, j)
            d_s[j] = draw_uncorrelated(spec, tl.duration, rng)
            d_l[j] = draw_correlated(spec, cfg.J, rng)
        norms = np.linalg.norm(walkmodel.circuit_error_vectors(tl, d_s, d_l), axis=2)
        for series in norms:
            acc += walkmodel.acf(series, cfg.max_lag)
            count += 1
    return acc / count


def cmd_acf(cfg, out, threads):
    rows, lengths = [], []
    for m in cfg.sweep:
        label = _label(cfg, m)
        log.info("acf M_n=%s", label)
        rho = error_norm_acf(cfg, m)
        rows += [(lag, v, label) for lag, v in enumerate(rho)]
        try:
            m_eps = walkmodel.correlation_length(rho)
        except walkmodel.NoCrossing:
            m_eps = float("nan")
        try:
            zero = walkmodel.correlation_length(rho, 0.0)
        except walkmodel.NoCrossing:
            zero = float("nan")
        lengths.append((label, m_eps, zero))
    write_csv(out / "acf.csv", ("lag", "acf", "M_n"), rows)
    write_csv(out / "corrlen.csv", ("M_n", "M_eps", "zero_crossing"), lengths)


def cmd_ff(cfg, out, threads):
    w = np.logspace(np.log10(cfg.omega_min), np.log10(cfg.omega_max), cfg.n_omega)
    g = [walkmodel.filter_function(s, w) for s in
         (primitive_schedule(clifford_table()[1]), corpse_schedule("x", np.pi),
          wamf_schedule("x", np.pi))]
    write_csv(out / "ff.csv", ("omega", "G2_primitive", "G2_corpse", "G2_wamf"),
              zip(w, *g))


def cmd_predict(cfg, out, threads):
    rows = []
    if cfg.sigma_L2 > 0:
        p = stats.gamma_params("correlated", cfg.J, cfg.sigma_L2, cfg.n, 1)
        rows.append(("correlated", cfg.J, cfg.sigma_L2, cfg.n, p.alpha, p.beta, p.mean))
    if cfg.sigma_S2 > 0:
        bw = 1 if cfg.bandwidth == 1 else 2
        for n in sorted({1, cfg.n}):
            p = stats.gamma_params("uncorrelated", cfg.J, cfg.sigma_S2, n, bw)
            rows.append(("uncorrelated", cfg.J, cfg.sigma_S2, n, p.alpha, p.beta, p.mean))
    write_csv(out / "gamma_predict.csv",
              ("correlation", "J", "sigma2", "n", "alpha", "beta", "mean"), rows)
    n = np.arange(1, cfg.n + 1)
    write_csv(out / "variance_model.csv", ("family", "n", "variance"),
              ((fam, k, v) for fam in cfg.family_list
               for k, v in zip(n, stats.variance_model(n, cfg.J, cfg.sigma_S2, cfg.sigma_L2,
                                                       fam))))


COMMANDS = {
    "gen-circuits": cmd_gen_circuits,
    "simulate": cmd_simulate,
    "variance": cmd_variance,
    "fit": cmd_fit,
    "scan": cmd_scan,
    "walk-check": cmd_walk_check,
    "acf": cmd_acf,
    "ff": cmd_ff,
    "predict": cmd_predict,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="qcorr", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="config file or preset name")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(message)s")
    try:
        cfg = with_overrides(parse_config(args.config), seed=args.seed, out=args.out)
        if args.threads < 0:
            raise ValidationError("threads", "must be >= 0")
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, out, args.threads)
        write_manifest(out, args.command, cfg)
    except Exception as exc:  # noqa: BLE001 - any failure maps to exit 3
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
