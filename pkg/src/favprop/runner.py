"""Execute an :class:`ExperimentConfig` and write its report files.

Each metric writes one CSV; ``summary.json`` collects the headline numbers
and the pass/fail verdict of every check; ``manifest.json`` records the
config digest, toolkit version, file list and wall time. CSVs and the
summary depend only on the config and the toolkit version, never on the
worker count or the clock.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .config import SWEEP_KINDS, ExperimentConfig, build_ensemble
from .convergence import enumerate_exact_mean, fit_log_slope, sweep_over_m
from .geometry import check_normalization
from .metrics import (Estimate, bound_rhs_21, cosine_similarity, cross_term_table,
                      decompose_mean_z, estimate_mean_z)
from .channels import COUNTEREXAMPLE, ChannelEnsemble, sample_batch
from .errors import ConfigurationError
from .streams import SeedStreams, run_blocks

log = logging.getLogger(__name__)

SWEEP_COLUMNS = ["M", "metric_re", "metric_im", "se_re", "se_im", "trials"]
CROSS_TERM_COLUMNS = ["r", "s", "t_re", "t_im", "se_re", "se_im"]


def fmt(x) -> str:
    """CSV cell: 17 significant digits for floats."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


@dataclass
class RunManifest:
    config_digest: str
    toolkit_version: str
    files: list[str]
    wall_time_s: float

    def to_dict(self) -> dict:
        return {"config_digest": self.config_digest, "toolkit_version": self.toolkit_version,
                "files": list(self.files), "wall_time_s": self.wall_time_s}


@dataclass
class RunResult:
    manifest: RunManifest
    summary: dict
    out_dir: Path
    verdicts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())


# -- checks -------------------------------------------------------------------

def _check_points(ctype: str, check: dict, values: list[Estimate], slope=None) -> bool:
    k = float(check.get("k", 4.0))
    if ctype == "zero-mean":
        return all(v.within_zero(k) for v in values)
    if ctype == "equals":
        target = complex(check.get("value", 0.0))
        tol = float(check.get("tol", 0.0))
        return all(abs(v.value - target) <= tol and v.mc_error <= tol for v in values)
    if ctype == "decreasing":
        first, last = values[0], values[-1]
        err = math.hypot(first.mc_error, last.mc_error)
        return abs(first.value) - abs(last.value) > k * err
    if ctype == "slope-at-most":
        return slope is not None and slope <= float(check["value"])
    if ctype == "at-least":
        return all(v.real >= float(check["value"]) for v in values)
    if ctype == "imag-significant":
        k = float(check.get("k", 10.0))
        return any(abs(v.imag) > k * v.se_im for v in values)
    raise ConfigurationError(f"check {ctype!r} not applicable here")


def _verdicts(metric: dict, evaluate) -> dict:
    out = {}
    for check in metric.get("checks", []):
        label = check.get("name", check["type"])
        out[label] = bool(evaluate(check["type"], check))
    return out


# -- metric handlers ------------------------------------------------------------

class _Context:
    def __init__(self, config: ExperimentConfig, out_dir: Path, workers: int):
        self.config = config
        self.out_dir = out_dir
        self.workers = workers
        self.root = SeedStreams(config.master_seed)
        self.files: list[str] = []

    def write(self, name: str, text: str) -> str:
        path = self.out_dir / name
        try:
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        self.files.append(name)
        return name

    def ensemble(self, metric: dict):
        key = metric["ensemble"]
        spec = self.config.ensembles[key]
        return build_ensemble(dict(spec, name=spec.get("name", key)))

    def m_values(self, metric: dict, ens=None) -> list[int]:
        mv = metric.get("m_values") or self.config.m_values
        if not mv and ens is not None and hasattr(ens, "M"):
            mv = [ens.M]
        return list(mv)

    def trials(self, metric: dict) -> int:
        return int(metric.get("trials", self.config.trials))


def _sweep_metric(ctx: _Context, metric: dict, streams: SeedStreams) -> dict:
    kind = metric["kind"]
    ens = ctx.ensemble(metric)
    i, k = metric.get("users", [0, 1])
    r, s = metric.get("paths", [0, 1])
    eps = float(metric.get("eps", ctx.config.eps[0]))
    trials = ctx.trials(metric)
    m_values = ctx.m_values(metric, ens)
    if kind == "bound_rhs":
        values = []
        for m in m_values:
            e = ens.with_m(m)
            values.append(bound_rhs_21(e, metric.get("c_alpha", e.c_alpha), trials,
                                       streams.child(f"M:{m}"), ctx.workers))
        slope, excluded = fit_log_slope(m_values, values)
    else:
        res = sweep_over_m(ens, m_values, kind, trials, streams, i=i, k=k, r=r, s=s,
                           eps=eps, workers=ctx.workers)
        values, slope, excluded = res.values, res.fitted_log_slope, res.excluded
    rows = [(m, v.real, v.imag, v.se_re, v.se_im, v.trials) for m, v in zip(m_values, values)]
    fname = ctx.write(f"{metric['name']}.csv", _csv_text(SWEEP_COLUMNS, rows))
    verdicts = _verdicts(metric, lambda t, c: _check_points(t, c, values, slope))
    return {
        "file": fname,
        "points": [dict(M=m, **v.to_dict()) for m, v in zip(m_values, values)],
        "fitted_log_slope": slope,
        "slope_excluded_M": excluded,
        "verdicts": verdicts,
    }


def _cross_terms_metric(ctx, metric, streams) -> dict:
    ens = ctx.ensemble(metric)
    trials = ctx.trials(metric)
    tol = 1e-9
    files, worst = [], 0.0
    for m in ctx.m_values(metric, ens):
        e = ens.with_m(m)
        table = cross_term_table(e, trials, streams.child(f"M:{m}"), ctx.workers)
        rows = [(r, s, t.real, t.imag, t.se_re, t.se_im)
                for r, row in enumerate(table) for s, t in enumerate(row)]
        files.append(ctx.write(f"{metric['name']}_M{m}.csv", _csv_text(CROSS_TERM_COLUMNS, rows)))
        worst = max(worst, max(abs(table[r][r].value - 1) for r in range(e.L)))

    def evaluate(ctype, check):
        return worst <= float(check.get("tol", tol))

    return {"files": files, "max_diagonal_deviation": worst,
            "verdicts": _verdicts(metric, evaluate)}


def _normalization_metric(ctx, metric, streams) -> dict:
    ens = ctx.ensemble(metric)
    trials = ctx.trials(metric)
    tol = float(metric.get("tol", 1e-9))
    rows, all_pass = [], True
    for m in ctx.m_values(metric, ens):
        e = ens.with_m(m)
        worst = run_blocks(trials, streams.child(f"M:{m}"),
                           lambda n, ar, gr: check_normalization(
                               sample_batch(e, n, ar, gr).W, tol).deviations[None, :],
                           ctx.workers).max()
        ok = bool(worst <= tol)
        all_pass &= ok
        rows.append((m, float(worst), ok))
    fname = ctx.write(f"{metric['name']}.csv",
                      _csv_text(["M", "max_deviation", "passed"], rows))
    return {"file": fname, "tol": tol, "passed": all_pass,
            "verdicts": _verdicts(metric, lambda t, c: all_pass)}


def _decomposition_metric(ctx, metric, streams) -> dict:
    ens = ctx.ensemble(metric)
    i, k = metric.get("users", [0, 1])
    trials = ctx.trials(metric)
    rows, decs = [], []
    for m in ctx.m_values(metric, ens):
        d = decompose_mean_z(ens.with_m(m), i, k, trials, streams.child(f"M:{m}"), ctx.workers)
        decs.append(d)
        rows.append((m, d.diag_part.real, d.diag_part.imag, d.diag_part.se_re, d.diag_part.se_im,
                     d.offdiag_part.real, d.offdiag_part.imag, d.offdiag_part.se_re,
                     d.offdiag_part.se_im, d.total.real, d.total.imag, d.mean_z.real,
                     d.mean_z.imag, d.offdiag_factored.real, d.offdiag_factored.imag,
                     d.consistency_error, trials))
    cols = ["M", "diag_re", "diag_im", "diag_se_re", "diag_se_im", "offdiag_re", "offdiag_im",
            "offdiag_se_re", "offdiag_se_im", "total_re", "total_im", "mean_z_re", "mean_z_im",
            "offdiag_factored_re", "offdiag_factored_im", "consistency_error", "trials"]
    fname = ctx.write(f"{metric['name']}.csv", _csv_text(cols, rows))

    def evaluate(ctype, check):
        if ctype == "consistent":
            tol = float(check.get("tol", 1e-12))
            return all(d.consistency_error <= tol * max(1.0, abs(d.mean_z.value)) for d in decs)
        return all(d.diag_part.within_zero(float(check.get("k", 4.0))) for d in decs)

    return {"file": fname, "verdicts": _verdicts(metric, evaluate)}


def _audit_metric(ctx, metric, streams) -> dict:
    ens = ctx.ensemble(metric)
    if not isinstance(ens, ChannelEnsemble) or ens.gain_model != COUNTEREXAMPLE:
        raise ConfigurationError(f"metric {metric['name']}: counterexample_audit needs the "
                                 f"counterexample ensemble")
    trials = ctx.trials(metric)
    L = ens.L
    rows, points, ok = [], [], True
    for m in ctx.m_values(metric, ens):
        e = ens.with_m(m)
        sub = streams.child(f"M:{m}")
        mc = estimate_mean_z(e, 0, 1, trials, sub, ctx.workers)
        mc_bound = bound_rhs_21(e, 1.0, trials, sub, ctx.workers)
        exact = enumerate_exact_mean(L, m)
        exact_ok = (mc.value == float(exact.mean_z) and mc.se == 0.0
                    and exact.mean_z == L * L and exact.bound_rhs == L and exact.margin > 0)
        ok &= exact_ok
        rows.append((L, m, mc.real, mc.se_re, str(exact.mean_z), str(exact.bound_rhs),
                     mc_bound.real, mc_bound.se_re, str(exact.margin), trials))
        points.append({"M": m, "mean_z_mc": mc.real, "mean_z_se": mc.se,
                       "mean_z_exact": str(exact.mean_z), "bound_rhs_exact": str(exact.bound_rhs),
                       "bound_rhs_mc": mc_bound.real, "bound_rhs_mc_se": mc_bound.se_re,
                       "margin": str(exact.margin)})
    cols = ["L", "M", "mean_z_mc", "mean_z_se", "mean_z_exact", "bound_rhs_exact",
            "bound_rhs_mc", "bound_rhs_mc_se", "margin_exact", "trials"]
    fname = ctx.write(f"{metric['name']}.csv", _csv_text(cols, rows))
    exact_mean = {p["mean_z_exact"] for p in points}
    exact_bound = {p["bound_rhs_exact"] for p in points}
    summary = {"file": fname, "L": L, "c_alpha": 1.0, "points": points, "violation": ok}
    if len(exact_mean) == 1 and len(exact_bound) == 1:
        summary["mean_z"] = float(points[0]["mean_z_exact"])
        summary["bound_rhs"] = float(points[0]["bound_rhs_exact"])
    summary["verdicts"] = _verdicts(metric, lambda t, c: ok)
    return summary


def _ordering_metric(ctx, metric, streams) -> dict:
    ens = ctx.ensemble(metric)
    i, k = metric.get("users", [0, 1])
    trials = ctx.trials(metric)
    rows, pts = [], []
    for m in ctx.m_values(metric, ens):
        e = ens.with_m(m)
        sub = streams.child(f"M:{m}")
        lhs = estimate_mean_z(e, i, k, trials, sub, ctx.workers)
        rhs = bound_rhs_21(e, metric.get("c_alpha", e.c_alpha), trials, sub, ctx.workers)
        diff = lhs.value - rhs.value
        pts.append((lhs, rhs))
        rows.append((m, lhs.real, lhs.imag, lhs.se_re, lhs.se_im, rhs.real, rhs.imag,
                     rhs.se_re, rhs.se_im, diff.real, diff.imag, trials))
    cols = ["M", "lhs_re", "lhs_im", "lhs_se_re", "lhs_se_im", "rhs_re", "rhs_im",
            "rhs_se_re", "rhs_se_im", "diff_re", "diff_im", "trials"]
    fname = ctx.write(f"{metric['name']}.csv", _csv_text(cols, rows))

    def evaluate(ctype, check):
        kk = float(check.get("k", 10.0))
        return all(abs(l.imag - r.imag) > kk * math.hypot(l.se_im, r.se_im) for l, r in pts)

    return {"file": fname,
            "points": [{"lhs": l.to_dict(), "rhs": r.to_dict()} for l, r in pts],
            "verdicts": _verdicts(metric, evaluate)}


def _cosine_metric(ctx, metric, streams) -> dict:
    rows, results = [], []
    for n, case in enumerate(metric.get("cases", [])):
        a, b = case["a"], case["b"]
        c = cosine_similarity(a, b)
        M = len(a)
        normalized = math.isclose(sum(x * x for x in a), M) and math.isclose(sum(x * x for x in b), M)
        scaled = sum(x * y for x, y in zip(a, b)) / M if normalized else float("nan")
        expected = float(case.get("expected", float("nan")))
        results.append((c, expected))
        rows.append((n, c, scaled, expected))
    fname = ctx.write(f"{metric['name']}.csv",
                      _csv_text(["case", "cosine", "scaled_inner", "expected"], rows))

    def evaluate(ctype, check):
        tol = float(check.get("tol", 1e-12))
        return all(abs(c - e) <= tol for c, e in results)

    return {"file": fname, "cosines": [c for c, _ in results],
            "verdicts": _verdicts(metric, evaluate)}


_HANDLERS = {
    "cross_terms": _cross_terms_metric,
    "normalization": _normalization_metric,
    "decomposition": _decomposition_metric,
    "counterexample_audit": _audit_metric,
    "complex_ordering": _ordering_metric,
    "cosine": _cosine_metric,
}


def run_experiment(config: ExperimentConfig, out_dir=None, workers: int = 1) -> RunResult:
    """Run every metric of ``config`` and write CSVs, summary and manifest."""
    t0 = time.perf_counter()
    out = Path(out_dir or config.output.get("dir") or Path("out") / config.experiment_name)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    ctx = _Context(config, out, max(1, int(workers)))
    metrics_summary, verdicts = {}, {}
    for metric in config.metrics:
        name = metric["name"]
        streams = ctx.root.child("metric", name)
        log.info("running %s (%s)", name, metric["kind"])
        if metric["kind"] in SWEEP_KINDS:
            result = _sweep_metric(ctx, metric, streams)
        else:
            result = _HANDLERS[metric["kind"]](ctx, metric, streams)
        result = {"kind": metric["kind"], "ensemble": metric.get("ensemble"), **result}
        metrics_summary[name] = result
        for label, ok in result["verdicts"].items():
            verdicts[f"{name}.{label}"] = ok
    summary = {
        "experiment": config.experiment_name,
        "toolkit_version": __version__,
        "config_digest": config.digest(),
        "master_seed": config.master_seed,
        "metrics": metrics_summary,
        "verdicts": verdicts,
        "all_pass": all(verdicts.values()),
    }
    ctx.write("summary.json", json.dumps(summary, indent=2) + "\n")
    manifest = RunManifest(config.digest(), __version__, list(ctx.files),
                           round(time.perf_counter() - t0, 3))
    (out / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2) + "\n")
    return RunResult(manifest, summary, out, verdicts)
