"""Batch command-line front end.

Commands: validate | calibrate | cdf | sweep | roc. Every command reads one
JSON config (defaults apply when omitted), derives all randomness from the
seed through labeled streams, and writes CSV/JSON/SVG files whose headers
embed the normalized config, its hash, the seed, and the generator id, so a
result file documents how to regenerate itself bitwise.

Exit codes: 0 success, 1 config error, 2 validation failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .config import ConfigError, RunConfig, canonical_json, config_hash, from_dict, load_user_dict
from .detect import KELLY, DetectorKind, gen_data_batch, pairs_from_raw, raw_stats_batch
from .matkit import NotPositiveDefiniteError
from .mcengine import (
    DetectorPlan,
    PfaEstimate,
    ThresholdTable,
    calibrate_entry,
    calibrate_snr,
    count_exceedances,
    ecdf,
    kelly_threshold,
    ks_2sample,
    ks_stat,
    nomismatch_sampler,
    sweep,
)
from .mismatch import MismatchSpec, check_ger, gen_sigma_t
from .randkit import GENERATOR_ID, StreamKey, beta_cdf, cf1_survival
from .report import step_curve, svg_plot, write_csv, write_json
from .scenario import build_cov, build_steering
from .storep import make_sampler, sample_pairs

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

# Top-level stream labels, one per experiment family under a seed.
_EXP_CAL = 0
_EXP_SWEEP = 1
_EXP_SNR = 2
_EXP_CDF = 3
_EXP_VALIDATE = 4

SWEEP_FIELDS = (
    "draw_id", "variant", "draw_meta", "detector", "kappa", "n_trials",
    "exceedances", "pfa_hat", "ci_lo", "ci_hi", "snr_db", "pd_n_trials",
    "pd_exceedances", "pd_hat", "pd_ci_lo", "pd_ci_hi",
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def det_label(kind: DetectorKind) -> str:
    if kind.kind == "kalson":
        return f"kalson_k{kind.kappa:g}"
    return kind.kind


def run_meta(cfg: RunConfig) -> dict:
    return {
        "config_sha256": config_hash(cfg.normalized),
        "seed": cfg.seed,
        "generator": GENERATOR_ID,
        "version": __version__,
        "config": canonical_json(cfg.normalized),
    }


def build_parser() -> _Parser:
    parser = _Parser(prog="cfarmismatch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (
        ("validate", "run the self-check suites (closed forms, sampler oracle, collinearity)"),
        ("calibrate", "calibrate detector thresholds at the target false-alarm rate"),
        ("cdf", "sample and plot ECDFs of the invariant pair over mismatch draws"),
        ("sweep", "per-draw false-alarm estimates over many training-covariance draws"),
        ("roc", "joint false-alarm / detection estimates at the calibrated operating point"),
    ):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="JSON config file (defaults used when omitted)")
        sp.add_argument("--out", help="output directory (overrides config out_dir)")
        sp.add_argument("--seed", type=int, help="seed override (unsigned 64-bit)")
        sp.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: available parallelism)")
        sp.add_argument("--path", choices=("fast", "direct"), default="fast",
                        help="trial generation: representation sampler or full matrices")
    return parser


def _load_cfg(args) -> RunConfig:
    user = load_user_dict(args.config) if args.config else {}
    if args.seed is not None:
        user["seed"] = args.seed
    if args.out is not None:
        user["out_dir"] = args.out
    return from_dict(user)


def _print(msg: str) -> None:
    print(msg, flush=True)


def cmd_validate(cfg: RunConfig, workers: int, path: str, out: Path) -> int:
    sc = cfg.scenario
    n, k = sc.n, sc.k
    sigma = build_cov(sc)
    v = build_steering(n, fd=sc.fd)
    root = StreamKey(cfg.seed).child(_EXP_VALIDATE)
    q = k - n + 1
    checks = []

    def record(name: str, passed: bool, detail: str):
        checks.append({"name": name, "passed": bool(passed), "detail": detail})
        _print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")

    thr = kelly_threshold(cfg.pfa_target, n, k)
    count = count_exceedances(root.child(0), KELLY, thr, nomismatch_sampler(n, k), 1_000_000, workers)
    est = PfaEstimate.from_counts(count, 1_000_000)
    record(
        "glrt_closed_form_cfar",
        est.ci_lo <= cfg.pfa_target <= est.ci_hi,
        f"threshold={thr:.6g} pfa_hat={est.p_hat:.3e} ci=[{est.ci_lo:.3e},{est.ci_hi:.3e}] "
        f"target={cfg.pfa_target:.3e}",
    )

    beta, t = sample_pairs(root.child(1), nomismatch_sampler(n, k), 100_000)
    d_beta = ks_stat(beta, lambda x: beta_cdf(k - n + 2, n - 1, np.clip(x, 0.0, 1.0)))
    record("matched_beta_ks", d_beta < 0.006, f"D={d_beta:.5f} limit=0.006 n=100000")
    d_t = ks_stat(t, lambda x: 1.0 - cf1_survival(np.clip(x, 0.0, None), q))
    record("matched_t_ks", d_t < 0.006, f"D={d_t:.5f} limit=0.006 n=100000")

    sigma_t, _ = gen_sigma_t(root.child(2), sigma, v, cfg.mismatch)
    m_side = 20_000
    fb, ft = sample_pairs(root.child(3), make_sampler(sigma, sigma_t, v, 0.0, k), m_side)
    db_list, dt_list = [], []
    chunk = 4096
    done = 0
    ci = 0
    while done < m_side:
        size = min(chunk, m_side - done)
        x, xt = gen_data_batch(root.child(4, ci), sigma, sigma_t, 0.0, v, k, size)
        b2, t2 = pairs_from_raw(*raw_stats_batch(x, xt, v))
        db_list.append(b2)
        dt_list.append(t2)
        done += size
        ci += 1
    d1 = ks_2sample(fb, np.concatenate(db_list))
    d2 = ks_2sample(ft, np.concatenate(dt_list))
    record(
        "oracle_equivalence",
        d1 < 0.02 and d2 < 0.02,
        f"variant={cfg.mismatch.variant} D_beta={d1:.5f} D_t={d2:.5f} limit=0.02 n={m_side}x{m_side}",
    )

    st_chol, _ = gen_sigma_t(root.child(5), sigma, v, MismatchSpec("ger_chol", cfg.mismatch.delta_db))
    st_eig, _ = gen_sigma_t(root.child(6), sigma, v, MismatchSpec("ger_eig", cfg.mismatch.delta_db))
    st_free, _ = gen_sigma_t(root.child(7), sigma, v, MismatchSpec("inv_wishart", cfg.mismatch.delta_db))
    r1 = check_ger(sigma, st_chol, v)
    r2 = check_ger(sigma, st_eig, v)
    r3 = check_ger(sigma, st_free, v)
    record(
        "ger_residual",
        r1.holds and r2.holds and not r3.holds,
        f"chol={r1.residual:.2e} eig={r2.residual:.2e} (limit 1e-8), free={r3.residual:.2e} (must exceed)",
    )

    write_json(out / "validate.json", {"checks": checks}, run_meta(cfg))
    failed = [c["name"] for c in checks if not c["passed"]]
    if failed:
        _print(f"validation FAILED: {', '.join(failed)}")
        return EXIT_VALIDATION
    _print(f"all {len(checks)} checks passed -> {out / 'validate.json'}")
    return EXIT_OK


def _calibrate_table(cfg: RunConfig, workers: int) -> ThresholdTable:
    sc = cfg.scenario
    root = StreamKey(cfg.seed).child(_EXP_CAL)
    entries = []
    for i, kind in enumerate(cfg.detectors):
        entries.append(
            calibrate_entry(root.child(i), kind, sc.n, sc.k, cfg.pfa_target,
                            cfg.trials.calibration, workers)
        )
    return ThresholdTable(entries=tuple(entries))


def cmd_calibrate(cfg: RunConfig, workers: int, path: str, out: Path) -> int:
    table = _calibrate_table(cfg, workers)
    write_json(out / "thresholds.json", {"thresholds": table.to_jsonable()}, run_meta(cfg))
    for e in table.entries:
        _print(
            f"{det_label(e.kind):>12s}: threshold={e.threshold:.6f} "
            f"achieved pfa={e.achieved.p_hat:.3e} ci=[{e.achieved.ci_lo:.3e},{e.achieved.ci_hi:.3e}] "
            f"target={e.pfa_target:.1e} trials={e.n_trials}"
        )
    _print(f"wrote {out / 'thresholds.json'}")
    return EXIT_OK


def cmd_cdf(cfg: RunConfig, workers: int, path: str, out: Path) -> int:
    sc = cfg.scenario
    n, k = sc.n, sc.k
    sigma = build_cov(sc)
    v = build_steering(n, fd=sc.fd)
    root = StreamKey(cfg.seed).child(_EXP_CDF)
    m = cfg.trials.cdf_samples
    rows = []
    beta_series = []
    t_series = []
    for draw in range(cfg.n_cdf_draws):
        sigma_t, _ = gen_sigma_t(root.child(draw, 0), sigma, v, cfg.mismatch)
        sampler = make_sampler(sigma, sigma_t, v, 0.0, k)
        beta, t = sample_pairs(root.child(draw, 1), sampler, m)
        for j in range(m):
            rows.append({"draw_id": draw, "beta": beta[j], "t_tilde": t[j]})
        bx, bf = ecdf(beta)
        tx, tf = ecdf(t)
        beta_series.append((f"draw {draw}", *step_curve(bx, bf)))
        t_series.append((f"draw {draw}", *step_curve(tx, tf)))
    grid_b = np.linspace(0.0, 1.0, 513)
    beta_series.append(("matched reference", grid_b, beta_cdf(k - n + 2, n - 1, grid_b)))
    t_hi = max(float(np.max(s[1])) for s in t_series)
    grid_t = np.linspace(0.0, t_hi, 513)
    t_series.append(("matched reference", grid_t, 1.0 - cf1_survival(grid_t, k - n + 1)))

    meta = run_meta(cfg)
    write_csv(out / "cdf_samples.csv", ("draw_id", "beta", "t_tilde"), rows, meta)
    svg_plot(out / "cdf_beta.svg", beta_series,
             title=f"ECDF of the loss factor ({cfg.mismatch.variant})",
             xlabel="beta", ylabel="empirical CDF", meta=meta)
    svg_plot(out / "cdf_t.svg", t_series,
             title=f"ECDF of the GLRT statistic ({cfg.mismatch.variant})",
             xlabel="t_tilde", ylabel="empirical CDF", meta=meta)
    _print(f"wrote {out / 'cdf_samples.csv'} ({len(rows)} rows) and two SVG plots")
    return EXIT_OK


def _sweep_rows_to_csv(res, out_path, meta) -> None:
    rows = [
        {name: getattr(row, name) for name in SWEEP_FIELDS}
        for row in res.rows
    ]
    write_csv(out_path, SWEEP_FIELDS, rows, meta)


def _summarize(res, with_pd: bool) -> dict:
    by_label: dict[str, list] = {}
    for row in res.rows:
        by_label.setdefault(row.detector, []).append(row)
    summary = {}
    for label, rows in by_label.items():
        pfa = np.array([r.pfa_hat for r in rows])
        nonzero = pfa[pfa > 0]
        entry = {
            "draws": len(rows),
            "zero_exceedance_draws": int(np.sum(pfa == 0)),
            "mean_pfa": float(np.mean(pfa)),
        }
        if nonzero.size:
            logp = np.log10(nonzero)
            entry["mean_log10_pfa"] = float(np.mean(logp))
            entry["std_log10_pfa"] = float(np.std(logp, ddof=1)) if logp.size > 1 else 0.0
        if with_pd:
            pd = np.array([r.pd_hat for r in rows])
            entry["mean_pd"] = float(np.mean(pd))
            entry["std_pd"] = float(np.std(pd, ddof=1)) if pd.size > 1 else 0.0
        summary[label] = entry
    return summary


def cmd_sweep(cfg: RunConfig, workers: int, path: str, out: Path) -> int:
    sc = cfg.scenario
    table = _calibrate_table(cfg, workers)
    plans = [
        DetectorPlan(label=det_label(e.kind), threshold=e.threshold, kind=e.kind)
        for e in table.entries
    ]
    eta_nominal = kelly_threshold(cfg.pfa_target, sc.n, sc.k)
    for c in cfg.clairvoyant_c:
        plans.append(DetectorPlan(label=f"clairvoyant_c{c:g}", threshold=eta_nominal,
                                  clairvoyant_c=c))
    res = sweep(StreamKey(cfg.seed).child(_EXP_SWEEP), sc, cfg.mismatch, plans,
                cfg.n_draws, cfg.trials.pfa, workers=workers, path=path)
    meta = run_meta(cfg)
    _sweep_rows_to_csv(res, out / "sweep.csv", meta)
    summary = _summarize(res, with_pd=False)
    write_json(out / "sweep_summary.json", {
        "thresholds": table.to_jsonable(),
        "summary": summary,
        "errors": [list(e) for e in res.errors],
    }, meta)

    series = []
    for plan in plans:
        rows = [r for r in res.rows if r.detector == plan.label and r.pfa_hat > 0]
        if rows:
            series.append((plan.label,
                           np.array([r.draw_id for r in rows], dtype=float),
                           np.log10([r.pfa_hat for r in rows])))
    if series:
        svg_plot(out / "sweep_pfa.svg", series,
                 title=f"False alarm per draw ({cfg.mismatch.variant})",
                 xlabel="draw", ylabel="log10 Pfa", meta=meta, scatter=True)
    for label, entry in summary.items():
        mean_part = (
            f"mean log10 Pfa={entry['mean_log10_pfa']:.3f} std={entry['std_log10_pfa']:.3f}"
            if "mean_log10_pfa" in entry else "all draws at zero exceedances"
        )
        _print(f"{label:>18s}: {mean_part} zero-draws={entry['zero_exceedance_draws']}")
    _print(f"wrote {out / 'sweep.csv'} ({len(res.rows)} rows)")
    if res.errors:
        for draw_id, err in res.errors:
            _print(f"draw {draw_id} failed: {err}")
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_roc(cfg: RunConfig, workers: int, path: str, out: Path) -> int:
    sc = cfg.scenario
    sigma = build_cov(sc)
    v = build_steering(sc.n, fd=sc.fd)
    table = _calibrate_table(cfg, workers)
    snr_root = StreamKey(cfg.seed).child(_EXP_SNR)
    plans = []
    snr_report = {}
    for i, e in enumerate(table.entries):
        snr = calibrate_snr(snr_root.child(i), e.kind, e.threshold, sigma, v,
                            cfg.pd_target, cfg.trials.pd, sc.k, workers)
        snr_report[det_label(e.kind)] = {"snr_linear": snr, "snr_db": 10.0 * float(np.log10(snr))}
        plans.append(DetectorPlan(label=det_label(e.kind), threshold=e.threshold,
                                  kind=e.kind, snr_linear=snr))
    res = sweep(StreamKey(cfg.seed).child(_EXP_SWEEP), sc, cfg.mismatch, plans,
                cfg.n_draws, cfg.trials.pfa, with_pd=True, pd_trials=cfg.trials.pd,
                workers=workers, path=path)
    meta = run_meta(cfg)
    _sweep_rows_to_csv(res, out / "roc.csv", meta)
    summary = _summarize(res, with_pd=True)
    write_json(out / "roc_summary.json", {
        "thresholds": table.to_jsonable(),
        "snr": snr_report,
        "summary": summary,
        "errors": [list(e) for e in res.errors],
    }, meta)

    series = []
    for plan in plans:
        rows = [r for r in res.rows if r.detector == plan.label and r.pfa_hat > 0]
        if rows:
            series.append((plan.label,
                           np.array([r.pfa_hat for r in rows]),
                           np.array([r.pd_hat for r in rows])))
    if series:
        svg_plot(out / "roc_scatter.svg", series,
                 title=f"Operating points over draws ({cfg.mismatch.variant})",
                 xlabel="Pfa", ylabel="Pd", meta=meta, scatter=True, logx=True)
    for label, entry in summary.items():
        pd_part = f"mean Pd={entry['mean_pd']:.3f} std={entry['std_pd']:.3f}" if "mean_pd" in entry else ""
        _print(f"{label:>12s}: mean Pfa={entry['mean_pfa']:.3e} {pd_part}")
    _print(f"wrote {out / 'roc.csv'} ({len(res.rows)} rows)")
    if res.errors:
        for draw_id, err in res.errors:
            _print(f"draw {draw_id} failed: {err}")
        return EXIT_NUMERIC
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "calibrate": cmd_calibrate,
    "cdf": cmd_cdf,
    "sweep": cmd_sweep,
    "roc": cmd_roc,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = _load_cfg(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    if workers < 1:
        print("config error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return _COMMANDS[args.command](cfg, workers, args.path, out)
    except (NotPositiveDefiniteError, RuntimeError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
