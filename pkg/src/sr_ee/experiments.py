"""Experiment orchestration and report emission.

Each runner maps a resolved configuration to a Report: a column list plus
rows of plain Python values. Reports serialize to a CSV with a comment
header (config hash, seed, code version) and a JSON sidecar carrying the
same payload machine-readably. Output is fully deterministic for a fixed
(config, seed): floats are written with repr (shortest round-trip), rows
are emitted in sorted key order, and no timestamps appear anywhere.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import asymptotics
from .channel import derive_normalized, path_gains, sample_channels
from .config import CODE_VERSION, RunConfig
from .individual import max_ee_pt, max_ee_ris, max_rate_pt
from .metrics import SampleSet, dbm_to_watt
from .numerics import RngStream
from .pareto import ParetoQuery, compute_anchors, ee_bar_pt, pareto_boundary

LN2 = math.log(2.0)


@dataclass
class Report:
    kind: str
    columns: List[str]
    rows: List[list]
    meta: dict = field(default_factory=dict)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _jsonable(value):
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return str(value)


def write_report(report: Report, out_dir: str) -> Tuple[str, str]:
    """Emit <kind>.csv and <kind>.json under out_dir; returns both paths."""
    import json

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{report.kind}.csv")
    json_path = os.path.join(out_dir, f"{report.kind}.json")
    lines = [f"# {key}: {report.meta[key]}" for key in sorted(report.meta)]
    lines.append(",".join(report.columns))
    for row in report.rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    payload = {
        "meta": report.meta,
        "columns": report.columns,
        "rows": [[_jsonable(v) for v in row] for row in report.rows],
    }
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(payload, sort_keys=True) + "\n")
    return csv_path, json_path


def _meta(rc: RunConfig, kind: str) -> dict:
    return {"config_hash": rc.config_hash, "seed": rc.seed,
            "version": CODE_VERSION, "kind": kind}


def run_individual(rc: RunConfig) -> Report:
    """Both individual maximizers per trial, plus mean/SE summary rows.

    Reported EE pairs use the large reporting sample set; AO internals are
    sample-free (the optimized objective is the deterministic upper bound).
    """
    blk = rc.individual
    params = rc.make_params()
    geom = rc.make_geometry()
    ccfg = rc.make_chan_cfg()
    s_rep = SampleSet.generate(int(blk["t_report"]), rc.seed, stream=13)
    columns = ["trial",
               "ee_pt_1", "ee_ris_1", "ee_pt_1_ub", "p_1", "iters_1", "conv_1",
               "ee_pt_2", "ee_ris_2", "ee_pt_2_ub", "p_2", "iters_2", "conv_2",
               "config_hash", "seed"]
    float_cols = [c for c in columns if c.startswith(("ee_", "p_"))]
    rows = []
    stats = {c: [] for c in float_cols}
    for trial in range(int(blk["n_trials"])):
        real = sample_channels(geom, ccfg, RngStream(rc.seed, 5, (trial,)))
        dc = derive_normalized(real, params)
        r1 = max_ee_pt(dc, params, s_rep, kappa=blk["kappa"],
                       max_iter=blk["max_iter"],
                       rng=RngStream(rc.seed, 101, (trial,)))
        r2 = max_ee_ris(dc, params, s_rep, kappa=blk["kappa"],
                        max_iter=blk["max_iter"], restarts=blk["restarts"],
                        rng=RngStream(rc.seed, 103, (trial,)))
        row = {
            "trial": trial,
            "ee_pt_1": r1.ee_sample.ee_pt, "ee_ris_1": r1.ee_sample.ee_ris,
            "ee_pt_1_ub": r1.ee_upper.ee_pt, "p_1": r1.solution.p,
            "iters_1": r1.trace.iterations, "conv_1": r1.trace.converged,
            "ee_pt_2": r2.ee_sample.ee_pt, "ee_ris_2": r2.ee_sample.ee_ris,
            "ee_pt_2_ub": r2.ee_upper.ee_pt, "p_2": r2.solution.p,
            "iters_2": r2.trace.iterations, "conv_2": r2.trace.converged,
            "config_hash": rc.config_hash, "seed": rc.seed,
        }
        rows.append([row[c] for c in columns])
        for c in float_cols:
            stats[c].append(float(row[c]))
    if len(rows) > 1:
        n = len(rows)
        for label, agg in (("mean", lambda v: sum(v) / n),
                           ("se", lambda v: (np.std(v, ddof=1) / math.sqrt(n)))):
            row = {c: None for c in columns}
            row["trial"] = label
            row["config_hash"] = rc.config_hash
            row["seed"] = rc.seed
            for c in float_cols:
                row[c] = float(agg(stats[c]))
            rows.append([row[c] for c in columns])
    return Report(kind="individual", columns=columns, rows=rows,
                  meta=_meta(rc, "individual"))


def run_asymptotic(rc: RunConfig) -> Report:
    """Closed-form EE sweeps over M or N per power level, optional MC overlay.

    The m-sweep emits the hardened PT EE at the Lambert-W optimal power; the
    n-sweep emits the backscatter EE closed form (envelope form when the PT
    is single-antenna, Rayleigh cascade form otherwise) at full power.
    """
    blk = rc.asymptotic
    geom = rc.make_geometry()
    betas = path_gains(geom)
    ccfg = rc.make_chan_cfg()
    sweep = blk["sweep"]
    mc_trials = int(blk["mc_trials"])
    columns = ["sweep_param", "sweep_value", "pmax_dbm", "ee_pt_cf", "p_star",
               "ee_ris_cf", "mc_ee_pt", "mc_ee_ris", "config_hash", "seed"]
    rows = []
    for i, pm in enumerate(blk["pmax_dbm"]):
        for j, val in enumerate(blk["values"]):
            over = {"Pmax": dbm_to_watt(float(pm))}
            if sweep == "m":
                over["M"] = int(val)
            else:
                over["N"] = int(val)
            params = rc.make_params(**over)
            ee_pt_cf = p_star = ee_ris_cf = mc_pt = mc_ris = None
            if sweep == "m":
                p_star = asymptotics.opt_power_asymptotic(
                    params.M, params.N, betas, params)
                ee_pt_cf = asymptotics.ee_pt_asymptotic(
                    p_star, params.M, params.N, betas, params)
                if mc_trials:
                    gain = asymptotics.mc_hardening_gain(
                        params.M, params.N, betas, mc_trials,
                        RngStream(rc.seed, 21, (i, j)))
                    snr = p_star * params.M * gain / params.sigma2
                    den = params.mu * p_star + params.Ps
                    mc_pt = params.B * math.log1p(snr) / LN2 / den
            else:
                if params.M == 1:
                    ee_ris_cf = asymptotics.ee_ris_asymptotic_siso(
                        params.N, betas, ccfg.k2, ccfg.k3, params)
                    if mc_trials:
                        mc_ris = asymptotics.mc_ee_ris_siso(
                            params.N, betas, ccfg.k2, ccfg.k3, params,
                            mc_trials, RngStream(rc.seed, 22, (i, j)))
                else:
                    ee_ris_cf = asymptotics.ee_ris_asymptotic_miso(
                        params.M, params.N, betas, params)
                    if mc_trials:
                        mc_ris = asymptotics.mc_ee_ris_miso_mrt(
                            params.M, params.N, betas, params, mc_trials,
                            RngStream(rc.seed, 23, (i, j)))
            rows.append([sweep, int(val), float(pm), ee_pt_cf, p_star,
                         ee_ris_cf, mc_pt, mc_ris, rc.config_hash, rc.seed])
    return Report(kind="asymptotic", columns=columns, rows=rows,
                  meta=_meta(rc, "asymptotic"))


def _pareto_sweep_points(rc: RunConfig) -> List[Tuple[Optional[str], Optional[float]]]:
    sweep = rc.pareto["sweep"]
    if not sweep:
        return [(None, None)]
    return [(sweep["param"], float(v)) for v in sweep["values"]]


def run_pareto(rc: RunConfig) -> Report:
    """Boundary sweep plus the full-power rate-max benchmark and anchors.

    Each sweep value redraws the channel from the same stream, so the NLoS
    component is matched across values and region orderings reflect the
    swept parameter, not sampling noise.
    """
    blk = rc.pareto
    query = ParetoQuery(epsilon=blk["epsilon"], kappa_ao=blk["kappa_ao"],
                        kappa_sca=blk["kappa_sca"], t_opt=int(blk["t_opt"]),
                        t_report=int(blk["t_report"]))
    alphas = rc.alpha_grid()
    ccfg = rc.make_chan_cfg()
    columns = ["sweep_param", "sweep_value", "row_kind", "alpha", "eta",
               "eta_hi", "ee_pt", "ee_ris", "ee_pt_opt", "ee_pt_ub", "gamma",
               "relax_gap", "relaxed", "converged", "config_hash", "seed"]
    rows = []
    for param, value in _pareto_sweep_points(rc):
        over = {}
        theta = None
        if param == "pmax_dbm":
            over["Pmax"] = dbm_to_watt(value)
        elif param == "ps_dbm":
            over["Ps"] = dbm_to_watt(value)
        elif param == "theta_deg":
            theta = value
        params = rc.make_params(**over)
        geom = rc.make_geometry(theta_deg=theta)
        real = sample_channels(geom, ccfg, RngStream(rc.seed, 7))
        dc = derive_normalized(real, params)
        points, anchors = pareto_boundary(dc, params, alphas, rc.seed, query)
        s_rep = SampleSet.generate(query.t_report, rc.seed, stream=13)

        def emit(kind, alpha, eta, eta_hi, ee_pt_v, ee_ris_v, ee_pt_opt,
                 ee_pt_ub, gamma, gap, relaxed, conv):
            rows.append([param, value, kind, alpha, eta, eta_hi, ee_pt_v,
                         ee_ris_v, ee_pt_opt, ee_pt_ub, gamma, gap, relaxed,
                         conv, rc.config_hash, rc.seed])

        for pt in points:
            emit("boundary", pt.alpha, pt.eta,
                 pt.eta_upper if math.isfinite(pt.eta_upper) else None,
                 pt.ee.ee_pt, pt.ee.ee_ris, pt.ee_opt.ee_pt,
                 pt.ee_upper.ee_pt, pt.gamma, pt.relaxation_gap,
                 pt.relaxed, pt.converged)
        for kind, res in (("anchor_pt", anchors.pt), ("anchor_ris", anchors.ris)):
            emit(kind, None, None, None,
                 ee_bar_pt(dc, res.solution, s_rep, params),
                 res.ee_sample.ee_ris, res.ee_sample.ee_pt,
                 res.ee_upper.ee_pt, None, None, None, res.trace.converged)
        bench = max_rate_pt(dc, params, s_rep, rng=RngStream(rc.seed, 102))
        emit("pt_rate_max", None, None, None, bench.ee_sample.ee_pt,
             bench.ee_sample.ee_ris, None, bench.ee_upper.ee_pt, None, None,
             None, bench.trace.converged)
    return Report(kind="pareto", columns=columns, rows=rows,
                  meta=_meta(rc, "pareto"))


RUNNERS = {
    "individual": run_individual,
    "asymptotic": run_asymptotic,
    "pareto": run_pareto,
}
