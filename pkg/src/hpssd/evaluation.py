"""Performance statistics over a table of completed runs.

The comparison is always hybrid design vs the same-cost random benchmark of
the same run: the scenario's own stage-0 seed sample. For the full-seed
scenarios that is exactly the golden sample; for the half-seed scenarios it
is the retained half, which is what an equally funded survey would have
collected. Four summary statistics:

* improvement: per-run change in absolute error relative to the true quota,
  positive when the hybrid estimate is closer than the benchmark's;
* win rate: share of runs where the benchmark has the strictly larger
  absolute error;
* variance reduction: one minus the ratio of error variances across runs;
* bias: mean signed deviation of the hybrid estimate from the true quota
  (negative means the design undershoots).

De-biasing subtracts the sweep-level bias from every estimate, so a design
that undershoots by .01 gets .01 added back.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .recruitment import SCENARIO_TAGS

logger = logging.getLogger(__name__)

QUARTILE_LABELS = ("low", "mid_low", "mid_high", "high")

# Table-2-style regressors for the error regressions, name -> per-run value
ERROR_REGRESSORS = (
    "seed_estimate",    # stage-0 estimate of the scenario
    "homophily",
    "clique_weight",
    "attrition",
    "mean_degree",
    "target_quota",     # realized y
    "population_size",  # realized N
)

DRIVER_TERMS = ("sample_gain", "homophily", "attrition")


@dataclass(frozen=True)
class ScenarioOutcome:
    seed_estimate: float | None  # mean outcome over the scenario's seeds
    estimate: float | None       # mean outcome over the full hybrid sample
    size: int                    # members, seeds included
    seed_count: int


@dataclass(frozen=True)
class RunResult:
    config: RunConfig
    n_nodes: int
    y_true: float
    phi_y: float | None
    phi_k: float | None
    yhat_bench: float | None
    scenarios: dict  # tag -> ScenarioOutcome


def error_improvement(y_true, yhat_bench, yhat_alt) -> float | None:
    """Relative gain in absolute error from switching to the alternative.

    (|y - bench| - |y - alt|) / y: positive when the alternative design
    would have had the smaller error in this run.
    """
    if y_true is None or y_true == 0.0 or yhat_bench is None or yhat_alt is None:
        return None
    return (abs(y_true - yhat_bench) - abs(y_true - yhat_alt)) / y_true


def debias(estimate, bias) -> float | None:
    """Remove a design's average bias from one estimate, clamped to [0, 1]."""
    if estimate is None:
        return None
    return min(1.0, max(0.0, estimate - bias))


def scenario_benchmark(result: RunResult, scenario) -> float | None:
    """The same-cost benchmark estimate for one scenario of one run.

    This is the scenario's stage-0 seed estimate: identical to the golden
    sample estimate for the full-seed scenarios, the retained-half estimate
    for the half-seed ones.
    """
    return result.scenarios[scenario].seed_estimate


def _defined(results, scenario):
    """(y, bench, alt) arrays over runs where all three are defined."""
    rows = [
        (res.y_true, scenario_benchmark(res, scenario), res.scenarios[scenario].estimate)
        for res in results
        if scenario_benchmark(res, scenario) is not None
        and res.scenarios[scenario].estimate is not None
    ]
    if not rows:
        return (np.zeros(0),) * 3
    arr = np.array(rows, dtype=np.float64)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def win_rate(results, scenario, bias=0.0) -> float | None:
    """Share of runs where the benchmark error strictly exceeds the hybrid's.

    ``bias`` is subtracted from the hybrid estimates (with clamping) before
    comparing, which yields the de-biased variant of the statistic.
    """
    y, bench, alt = _defined(results, scenario)
    if len(y) == 0:
        return None
    corrected = np.clip(alt - bias, 0.0, 1.0)
    return float(np.mean(np.abs(y - bench) > np.abs(y - corrected)))


def variance_reduction(results, scenario) -> float | None:
    """Rate of reduction in error variance across runs (design-effect style)."""
    y, bench, alt = _defined(results, scenario)
    if len(y) < 2:
        return None
    bench_var = float(np.var(y - bench, ddof=1))
    if bench_var == 0.0:
        return None
    return 1.0 - float(np.var(y - alt, ddof=1)) / bench_var


def bias_estimate(results, scenario) -> float | None:
    """Mean signed error of the hybrid estimator: avg(estimate - y).

    Negative values mean the design undershoots the quota, so subtracting
    the bias (see ``debias``) raises the estimates.
    """
    y, _, alt = _defined(results, scenario)
    if len(y) == 0:
        return None
    return float(np.mean(alt - y))


def mean_improvement(results, scenario) -> float | None:
    values = [
        error_improvement(
            res.y_true, scenario_benchmark(res, scenario), res.scenarios[scenario].estimate
        )
        for res in results
    ]
    values = [v for v in values if v is not None]
    if not values:
        return None
    return float(np.mean(values))


def standardized_regression(x, err):
    """Standardized OLS slope of err on x, with its classical standard error.

    Both variables are z-scored first, which makes the slope the Pearson
    correlation. Returns (coef, se), or None for degenerate input.
    """
    x = np.asarray(x, dtype=np.float64)
    err = np.asarray(err, dtype=np.float64)
    n = len(x)
    if n < 3:
        return None
    sx = x.std(ddof=1)
    se_ = err.std(ddof=1)
    if sx == 0.0 or se_ == 0.0:
        return None
    zx = (x - x.mean()) / sx
    zy = (err - err.mean()) / se_
    slope = float(zx @ zy) / (n - 1)
    resid_var = max(0.0, 1.0 - slope * slope)
    stderr = (resid_var / (n - 2)) ** 0.5
    return slope, stderr


def multivariate_drivers(results, scenario):
    """Standardized multiple OLS of the improvement on its presumed drivers.

    Terms: the sample-size gain over the seeds (n - n0), the homophily
    exponent, and the attrition rate. Returns {term: (coef, se)} or None
    when the design matrix is rank-deficient or too small.
    """
    rows = []
    for res in results:
        outcome = res.scenarios[scenario]
        delta = error_improvement(
            res.y_true, scenario_benchmark(res, scenario), outcome.estimate
        )
        if delta is None:
            continue
        rows.append(
            (
                delta,
                outcome.size - outcome.seed_count,
                res.config.homophily,
                res.config.attrition,
            )
        )
    if len(rows) < 5:
        return None
    data = np.array(rows, dtype=np.float64)
    yv = data[:, 0]
    X = data[:, 1:]
    sds = X.std(axis=0, ddof=1)
    sy = yv.std(ddof=1)
    if np.any(sds == 0.0):
        logger.warning("driver regression skipped: a regressor is constant")
        return None
    Z = (X - X.mean(axis=0)) / sds
    zy = (yv - yv.mean()) / sy if sy > 0.0 else yv - yv.mean()
    design = np.column_stack([np.ones(len(zy)), Z])
    coef, _, rank, _ = np.linalg.lstsq(design, zy, rcond=None)
    if rank < design.shape[1]:
        logger.warning("driver regression skipped: rank-deficient design")
        return None
    resid = zy - design @ coef
    dof = len(zy) - design.shape[1]
    sigma2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = sigma2 * np.linalg.inv(design.T @ design)
    ses = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return {
        term: (float(coef[k + 1]), float(ses[k + 1]))
        for k, term in enumerate(DRIVER_TERMS)
    }


def _quartile_masks(gammas):
    q1, q2, q3 = np.quantile(gammas, [0.25, 0.5, 0.75])
    masks = {
        "low": gammas <= q1,
        "mid_low": (gammas > q1) & (gammas <= q2),
        "mid_high": (gammas > q2) & (gammas <= q3),
        "high": gammas > q3,
    }
    return masks, (float(q1), float(q2), float(q3))


def quartile_breakdown(results, statistic, scenario):
    """One statistic split by homophily quartile, plus the overall value.

    ``statistic`` is "improvement", "win_rate", or "debiased_win_rate"; the
    de-biased variant applies the sweep-level bias of the scenario uniformly.
    Returns ({label: value}, overall) with None cells when fewer than 8 runs
    are available.
    """
    results = list(results)
    compute = {
        "improvement": mean_improvement,
        "win_rate": win_rate,
        "debiased_win_rate": None,
    }[statistic]
    if statistic == "debiased_win_rate":
        bias = bias_estimate(results, scenario)

        def compute(subset, tag):
            return None if bias is None else win_rate(subset, tag, bias=bias)

    overall = compute(results, scenario)
    if len(results) < 8:
        return {label: None for label in QUARTILE_LABELS}, overall
    gammas = np.array([res.config.homophily for res in results])
    masks, _ = _quartile_masks(gammas)
    cells = {}
    for label, mask in masks.items():
        subset = [res for res, keep in zip(results, mask) if keep]
        cells[label] = compute(subset, scenario) if subset else None
    return cells, overall


def _regressor_value(res: RunResult, scenario, name):
    if name == "seed_estimate":
        return res.scenarios[scenario].seed_estimate
    if name == "target_quota":
        return res.y_true
    if name == "population_size":
        return res.n_nodes
    return getattr(res.config, name)


def error_regressions(results, scenario):
    """Standardized bivariate regressions of |error| on each run feature."""
    table = {}
    for name in ERROR_REGRESSORS:
        pairs = []
        for res in results:
            est = res.scenarios[scenario].estimate
            xval = _regressor_value(res, scenario, name)
            if est is None or xval is None:
                continue
            pairs.append((xval, abs(res.y_true - est)))
        if len(pairs) < 3:
            table[name] = None
            continue
        arr = np.array(pairs, dtype=np.float64)
        table[name] = standardized_regression(arr[:, 0], arr[:, 1])
    return table


@dataclass
class EvaluationReport:
    n_runs: int
    quartile_edges: tuple | None
    improvement: dict        # scenario -> {quartiles..., "all"}
    win_rates: dict          # scenario -> {quartiles..., "all"}
    debiased_win_rates: dict
    variance_reduction: dict  # scenario -> float | None
    bias: dict               # scenario -> float | None
    regressions: dict        # scenario -> {regressor: {"coef", "se"} | None}
    drivers: dict            # scenario -> {term: {"coef", "se"}} | None

    def to_dict(self) -> dict:
        return {
            "n_runs": self.n_runs,
            "quartile_edges": list(self.quartile_edges) if self.quartile_edges else None,
            "improvement": self.improvement,
            "win_rates": self.win_rates,
            "debiased_win_rates": self.debiased_win_rates,
            "variance_reduction": self.variance_reduction,
            "bias": self.bias,
            "regressions": self.regressions,
            "drivers": self.drivers,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _pair_dict(pair):
    if pair is None:
        return None
    return {"coef": pair[0], "se": pair[1]}


def build_report(results) -> EvaluationReport:
    # canonical run order makes the report bit-identical however the caller
    # collected the runs (float summation is order-sensitive)
    results = sorted(results, key=lambda res: res.config.run_id)
    n = len(results)
    edges = None
    if n >= 8:
        gammas = np.array([res.config.homophily for res in results])
        _, edges = _quartile_masks(gammas)

    improvement, win_rates, debiased, psi, bias, regressions, drivers = (
        {}, {}, {}, {}, {}, {}, {},
    )
    for tag in SCENARIO_TAGS:
        cells, overall = quartile_breakdown(results, "improvement", tag)
        improvement[tag] = {**cells, "all": overall}
        cells, overall = quartile_breakdown(results, "win_rate", tag)
        win_rates[tag] = {**cells, "all": overall}
        cells, overall = quartile_breakdown(results, "debiased_win_rate", tag)
        debiased[tag] = {**cells, "all": overall}
        psi[tag] = variance_reduction(results, tag)
        bias[tag] = bias_estimate(results, tag)
        regressions[tag] = {
            name: _pair_dict(pair) for name, pair in error_regressions(results, tag).items()
        }
        fit = multivariate_drivers(results, tag)
        drivers[tag] = None if fit is None else {
            term: _pair_dict(pair) for term, pair in fit.items()
        }

    return EvaluationReport(
        n_runs=n,
        quartile_edges=edges,
        improvement=improvement,
        win_rates=win_rates,
        debiased_win_rates=debiased,
        variance_reduction=psi,
        bias=bias,
        regressions=regressions,
        drivers=drivers,
    )


def _fmt(value, width=9, digits=4):
    if value is None:
        return " " * (width - 3) + "---"
    return f"{value:{width}.{digits}f}"


def render_tables(report: EvaluationReport) -> str:
    """Fixed-width text rendering of the report tables."""
    tags = SCENARIO_TAGS
    head = "            " + "".join(f"{tag:>9}" for tag in tags)
    lines = [f"runs: {report.n_runs}"]

    def block(title, table, rows):
        lines.append("")
        lines.append(title)
        lines.append(head)
        for label in rows:
            row = "".join(_fmt(table[tag].get(label)) for tag in tags)
            lines.append(f"{label:<12}" + row)

    quartile_rows = list(QUARTILE_LABELS) + ["all"]
    block("Mean improvement in margin of error (share of quota)",
          report.improvement, quartile_rows)
    block("Win rate vs benchmark, by homophily quartile",
          report.win_rates, quartile_rows)
    block("Win rate of de-biased estimates, by homophily quartile",
          report.debiased_win_rates, quartile_rows)

    lines.append("")
    lines.append("Variance reduction and bias")
    lines.append(head)
    lines.append("var. reduct." + "".join(_fmt(report.variance_reduction[t]) for t in tags))
    lines.append("bias        " + "".join(_fmt(report.bias[t]) for t in tags))

    lines.append("")
    lines.append("Standardized regressions on the absolute error (coef / se)")
    lines.append(head)
    for name in ERROR_REGRESSORS:
        cells = []
        for tag in tags:
            entry = report.regressions[tag].get(name)
            cells.append("      ---" if entry is None else f"{entry['coef']:9.3f}")
        lines.append(f"{name:<12}" + "".join(cells))

    lines.append("")
    lines.append("Improvement drivers (standardized multiple regression)")
    lines.append(head)
    for term in DRIVER_TERMS:
        cells = []
        for tag in tags:
            fit = report.drivers[tag]
            entry = None if fit is None else fit.get(term)
            cells.append("      ---" if entry is None else f"{entry['coef']:9.3f}")
        lines.append(f"{term:<12}" + "".join(cells))
    return "\n".join(lines) + "\n"


def write_report(report: EvaluationReport, out_dir) -> None:
    """Persist the report: report.json plus one CSV per table."""
    os.makedirs(out_dir, exist_ok=True)
    tables_dir = os.path.join(out_dir, "tables")
    os.makedirs(tables_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
        fh.write("\n")

    def cell(value):
        return "" if value is None else repr(value)

    quartile_rows = list(QUARTILE_LABELS) + ["all"]
    for name, table in (
        ("improvement", report.improvement),
        ("win_rates", report.win_rates),
        ("debiased_win_rates", report.debiased_win_rates),
    ):
        with open(os.path.join(tables_dir, f"{name}.csv"), "w", encoding="utf-8") as fh:
            fh.write("quartile," + ",".join(SCENARIO_TAGS) + "\n")
            for label in quartile_rows:
                fh.write(label + "," + ",".join(cell(table[t].get(label)) for t in SCENARIO_TAGS) + "\n")

    with open(os.path.join(tables_dir, "variance_bias.csv"), "w", encoding="utf-8") as fh:
        fh.write("statistic," + ",".join(SCENARIO_TAGS) + "\n")
        fh.write("variance_reduction," + ",".join(cell(report.variance_reduction[t]) for t in SCENARIO_TAGS) + "\n")
        fh.write("bias," + ",".join(cell(report.bias[t]) for t in SCENARIO_TAGS) + "\n")

    with open(os.path.join(tables_dir, "error_regressions.csv"), "w", encoding="utf-8") as fh:
        fh.write("regressor," + ",".join(f"{t}_coef,{t}_se" for t in SCENARIO_TAGS) + "\n")
        for name in ERROR_REGRESSORS:
            cells = []
            for tag in SCENARIO_TAGS:
                entry = report.regressions[tag].get(name)
                cells.append("," if entry is None else f"{cell(entry['coef'])},{cell(entry['se'])}")
            fh.write(name + "," + ",".join(cells) + "\n")

    with open(os.path.join(tables_dir, "improvement_drivers.csv"), "w", encoding="utf-8") as fh:
        fh.write("term," + ",".join(f"{t}_coef,{t}_se" for t in SCENARIO_TAGS) + "\n")
        for term in DRIVER_TERMS:
            cells = []
            for tag in SCENARIO_TAGS:
                fit = report.drivers[tag]
                entry = None if fit is None else fit.get(term)
                cells.append("," if entry is None else f"{cell(entry['coef'])},{cell(entry['se'])}")
            fh.write(term + "," + ",".join(cells) + "\n")
