"""Command-line entry points: run experiment presets, validate configs, fetch data."""

from __future__ import annotations

import math
import os
import sys
from dataclasses import dataclass, field, fields

import click
import numpy as np

from . import analysis, dataio, montecarlo, presets
from .montecarlo import CampaignLedger, eh_from_ratio
from .scci import ScciParams
from .util import derived_seed

SCHEMA_VERSION = 1
PRESET_NAMES = ("fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "table1", "table2", "custom")


def _default_workers() -> int:
    try:
        return max(1, int(os.environ["EHDCS_WORKERS"]))
    except (KeyError, ValueError):
        return max(1, os.cpu_count() or 1)


@dataclass
class ExperimentConfig:
    """Flat, file-loadable description of one experiment run."""

    preset: str = "custom"
    n: int = presets.N_SYNTH
    K: int = 2
    s_common: int = 4
    s_innov: int = 1
    value_scale: float = 1.0
    tau: float = presets.TAU_SYNTH
    trials: int = 10000
    seed: int = 0
    threshold: float = 1e-4
    cap: int | None = None
    modes: tuple[str, ...] = ("cs", "dcs")
    eh_ratios: tuple[float, ...] = (1.0,)
    energy_sweep: tuple[float, ...] = (300.0,)
    k_sweep: tuple[int, ...] = ()
    sparsity_sweep: tuple[int, ...] = ()
    sparsity_ratios: tuple[float, ...] = ()
    target_pidr: float = presets.TABLE2_TARGET
    real_trials: int = 400
    panel_sweep: tuple[float, ...] = presets.FIG7_PANELS
    panel_area: float = presets.FIG8_PANEL
    slot_window: float = presets.REAL_WINDOW
    bits: int = presets.REAL_BITS
    mote_ids: tuple[int, ...] = dataio.DEFAULT_MOTES
    data_path: str | None = None
    out_dir: str = "results"
    workers: int = field(default_factory=lambda: _default_workers())

    def scci(self) -> ScciParams:
        return ScciParams(self.n, self.K, self.s_common, self.s_innov, self.value_scale)


_LIST_FIELDS = {
    "modes": str, "eh_ratios": float, "energy_sweep": float, "k_sweep": int,
    "sparsity_sweep": int, "sparsity_ratios": float, "panel_sweep": float, "mote_ids": int,
}
_OPTIONAL_INT = {"cap"}
_OPTIONAL_STR = {"data_path"}


def _parse_value(name: str, raw: str):
    raw = raw.strip()
    if name in _LIST_FIELDS:
        conv = _LIST_FIELDS[name]
        if not raw:
            return ()
        return tuple(conv(tok.strip()) for tok in raw.split(","))
    if name in _OPTIONAL_INT:
        return None if raw.lower() in ("", "none") else int(raw)
    if name in _OPTIONAL_STR:
        return None if raw.lower() in ("", "none") else raw
    ftypes = {f.name: f.type for f in fields(ExperimentConfig)}
    ftype = ftypes[name]
    if ftype == "int":
        return int(raw)
    if ftype == "float":
        return float(raw)  # accepts "inf"
    return raw


def parse_config_file(path: str) -> tuple[dict, list[str]]:
    """Read key=value lines; returns (updates, diagnostics with line numbers)."""
    known = {f.name for f in fields(ExperimentConfig)}
    updates: dict = {}
    diagnostics: list[str] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                diagnostics.append(f"{path}:{lineno}: expected key=value, got {stripped!r}")
                continue
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in known:
                diagnostics.append(f"{path}:{lineno}: unknown key {key!r}")
                continue
            try:
                updates[key] = _parse_value(key, raw)
            except ValueError as exc:
                diagnostics.append(f"{path}:{lineno}: bad value for {key}: {exc}")
    return updates, diagnostics


def validate(config: ExperimentConfig) -> list[str]:
    """All configuration problems, as human-readable diagnostics."""
    diags = []
    if config.preset not in PRESET_NAMES:
        diags.append(f"unknown preset {config.preset!r}; choose from {PRESET_NAMES}")
    if config.n < 1:
        diags.append("n must be >= 1")
    if config.K < 1:
        diags.append("K must be >= 1")
    if not 0 <= config.s_common <= config.n:
        diags.append("s_common must lie in [0, n]")
    if not 0 <= config.s_innov <= config.n:
        diags.append("s_innov must lie in [0, n]")
    if config.s_common + config.s_innov < 1:
        diags.append("need s_common + s_innov >= 1")
    if config.trials < 1:
        diags.append("trials must be >= 1")
    if config.real_trials < 1:
        diags.append("real_trials must be >= 1")
    if config.seed < 0:
        diags.append("seed must be non-negative")
    if config.threshold <= 0:
        diags.append("threshold must be positive")
    if config.tau <= 0:
        diags.append("tau must be positive")
    if config.cap is not None and config.cap < 0:
        diags.append("cap must be non-negative")
    if not config.modes or any(m not in ("cs", "dcs") for m in config.modes):
        diags.append("modes must be a non-empty subset of {cs, dcs}")
    if any(r < 0 for r in config.eh_ratios):
        diags.append("eh_ratios must be non-negative (inf allowed)")
    if any(e <= 0 for e in config.energy_sweep):
        diags.append("energy_sweep entries must be positive")
    if any(k < 1 for k in config.k_sweep):
        diags.append("k_sweep entries must be >= 1")
    if any(s < 1 for s in config.sparsity_sweep):
        diags.append("sparsity_sweep entries must be >= 1")
    if any(r <= 0 or math.isinf(r) for r in config.sparsity_ratios):
        diags.append("sparsity_ratios must be positive and finite")
    if not 0 < config.target_pidr < 1:
        diags.append("target_pidr must lie in (0, 1)")
    if any(p <= 0 for p in config.panel_sweep):
        diags.append("panel_sweep entries must be positive")
    if config.panel_area <= 0:
        diags.append("panel_area must be positive")
    if config.slot_window <= 0:
        diags.append("slot_window must be positive")
    if config.bits < 1:
        diags.append("bits must be >= 1")
    if len(config.mote_ids) < 1:
        diags.append("need at least one mote id")
    if config.workers < 1:
        diags.append("workers must be >= 1")
    if config.preset in ("fig7", "fig8") and len(config.mote_ids) < 2:
        diags.append("real-data presets need at least two motes")
    return diags


def write_csv(path, meta: dict, header: list[str], rows: list) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        for key, value in meta.items():
            fh.write(f"# {key} = {value}\n")
        fh.write(",".join(["schema_version", *header]) + "\n")
        for row in rows:
            fh.write(",".join([str(SCHEMA_VERSION), *[_fmt(v) for v in row]]) + "\n")
    return str(path)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _meta(cfg: ExperimentConfig, **extra) -> dict:
    base = {"preset": cfg.preset, "trials": cfg.trials, "seed": cfg.seed,
            "schema_version": SCHEMA_VERSION}
    base.update(extra)
    return base


def _echo(msg: str):
    click.echo(msg)


def _run_point(params, eh, mode, trials, seed, cfg, ledger, detail_sink=None):
    return montecarlo.run_campaign(
        params, eh, mode, trials, seed, threshold=cfg.threshold, cap=cfg.cap,
        ledger=ledger, workers=cfg.workers, detail_sink=detail_sink)


def _run_fig3(cfg, ledger, out):
    params = presets.FIG3_LEFT_PARAMS
    rows = []
    for i, energy in enumerate(presets.FIG3_LEFT_ENERGIES):
        eh = presets.synthetic_eh(energy, presets.FIG3_LEFT_RATIO, params.K)
        rep = analysis.dcs_bound_report(eh, params.s_common, params.s_innov)
        point = []
        for j, mode in enumerate(("cs", "dcs")):
            est = analysis.oracle_pidr(params, eh, cfg.trials,
                                       derived_seed(cfg.seed, 30, i, j), mode=mode, cap=cfg.cap)
            point.extend([est.pidr, est.ci95[0], est.ci95[1]])
        rows.append([energy, rep.cs_bound, rep.dcs_bound, *point])
        _echo(f"fig3-left energy={energy:.0f} done")
    left = write_csv(
        os.path.join(out, "fig3_left.csv"),
        _meta(cfg, ratio=presets.FIG3_LEFT_RATIO, s_common=params.s_common,
              s_innov=params.s_innov),
        ["mean_energy", "cs_bound", "dcs_bound", "cs_oracle", "cs_ci_low", "cs_ci_high",
         "dcs_oracle", "dcs_ci_low", "dcs_ci_high"], rows)
    s_common, s_innov = presets.FIG3_RIGHT_SPARSITY
    rows = []
    for i, K in enumerate(presets.FIG3_RIGHT_KS):
        params_k = ScciParams(cfg.n, K, s_common, s_innov)
        eh = presets.synthetic_eh(presets.FIG3_RIGHT_ENERGY, presets.FIG3_RIGHT_RATIO, K)
        rep = analysis.dcs_bound_report(eh, s_common, s_innov)
        point = []
        for j, mode in enumerate(("cs", "dcs")):
            est = analysis.oracle_pidr(params_k, eh, cfg.trials,
                                       derived_seed(cfg.seed, 31, i, j), mode=mode, cap=cfg.cap)
            point.extend([est.pidr, est.ci95[0], est.ci95[1]])
        rows.append([K, rep.cs_bound, rep.dcs_bound, *point])
        _echo(f"fig3-right K={K} done")
    right = write_csv(
        os.path.join(out, "fig3_right.csv"),
        _meta(cfg, ratio=presets.FIG3_RIGHT_RATIO, energy=presets.FIG3_RIGHT_ENERGY,
              s_common=s_common, s_innov=s_innov),
        ["K", "cs_bound", "dcs_bound", "cs_oracle", "cs_ci_low", "cs_ci_high",
         "dcs_oracle", "dcs_ci_low", "dcs_ci_high"], rows)
    return [left, right]


def _sweep_rows(cfg, params, eh, seed_key, ledger):
    """One sweep point: empirical PIDR for cs and dcs plus both bounds."""
    rep = analysis.dcs_bound_report(eh, params.s_common, params.s_innov)
    cells = []
    for j, mode in enumerate(("cs", "dcs")):
        est = _run_point(params, eh, mode, cfg.trials, derived_seed(cfg.seed, *seed_key, j),
                         cfg, ledger)
        cells.extend([est.pidr, est.ci95[0], est.ci95[1]])
    return cells + [rep.cs_bound, rep.dcs_bound]


_SWEEP_HEADER = ["cs_pidr", "cs_ci_low", "cs_ci_high", "dcs_pidr", "dcs_ci_low",
                 "dcs_ci_high", "cs_bound", "dcs_bound"]


def _run_fig4(cfg, ledger, out):
    params = presets.FIG4_PARAMS
    paths = []
    for r_idx, ratio in enumerate(presets.FIG4_RATIOS):
        rows = []
        for e_idx, energy in enumerate(presets.FIG4_ENERGIES):
            eh = presets.synthetic_eh(energy, ratio, params.K)
            rows.append([energy, *_sweep_rows(cfg, params, eh, (40, r_idx, e_idx), ledger)])
            _echo(f"fig4 ratio={ratio} energy={energy:.0f} done")
        paths.append(write_csv(
            os.path.join(out, f"fig4_ratio{ratio:g}.csv"),
            _meta(cfg, ratio=ratio, s_common=params.s_common, s_innov=params.s_innov),
            ["mean_energy", *_SWEEP_HEADER], rows))
    return paths


def _run_fig5(cfg, ledger, out):
    paths = []
    for r_idx, ratio in enumerate(presets.FIG5_SPARSITY_RATIOS):
        rows = []
        for t_idx, total in enumerate(presets.FIG5_TOTALS):
            s_common, s_innov = presets.fig5_sparsities(total, ratio)
            params = ScciParams(cfg.n, 2, s_common, s_innov)
            eh = eh_from_ratio(presets.FIG5_MEAN_COMMON + presets.FIG5_MEAN_INNOV,
                               presets.FIG5_MEAN_COMMON / presets.FIG5_MEAN_INNOV,
                               2, presets.TAU_SYNTH)
            rows.append([total, s_common, s_innov,
                         *_sweep_rows(cfg, params, eh, (50, r_idx, t_idx), ledger)])
            _echo(f"fig5 ratio={ratio} total={total} done")
        paths.append(write_csv(
            os.path.join(out, f"fig5_ratio{ratio:g}.csv"),
            _meta(cfg, sparsity_ratio=ratio),
            ["total_sparsity", "s_common", "s_innov", *_SWEEP_HEADER], rows))
    return paths


def _run_fig6(cfg, ledger, out):
    paths = []
    s_common, s_innov = presets.FIG6_LEFT_SPARSITY
    for r_idx, ratio in enumerate(presets.FIG6_LEFT_RATIOS):
        rows = []
        for k_idx, K in enumerate(presets.FIG6_KS):
            params = ScciParams(cfg.n, K, s_common, s_innov)
            eh = presets.synthetic_eh(presets.FIG6_LEFT_ENERGY, ratio, K)
            rows.append([K, *_sweep_rows(cfg, params, eh, (60, r_idx, k_idx), ledger)])
            _echo(f"fig6-left ratio={ratio} K={K} done")
        paths.append(write_csv(
            os.path.join(out, f"fig6_left_ratio{ratio:g}.csv"),
            _meta(cfg, ratio=ratio, energy=presets.FIG6_LEFT_ENERGY,
                  s_common=s_common, s_innov=s_innov),
            ["K", *_SWEEP_HEADER], rows))
    mean_c, mean_i = presets.FIG6_RIGHT_MEANS
    for r_idx, sratio in enumerate(presets.FIG6_RIGHT_RATIOS):
        s_common, s_innov = presets.fig5_sparsities(presets.FIG6_RIGHT_TOTAL, sratio)
        rows = []
        for k_idx, K in enumerate(presets.FIG6_KS):
            params = ScciParams(cfg.n, K, s_common, s_innov)
            eh = eh_from_ratio(mean_c + mean_i, mean_c / mean_i, K, presets.TAU_SYNTH)
            rows.append([K, *_sweep_rows(cfg, params, eh, (61, r_idx, k_idx), ledger)])
            _echo(f"fig6-right sparsity-ratio={sratio} K={K} done")
        paths.append(write_csv(
            os.path.join(out, f"fig6_right_sratio{sratio:g}.csv"),
            _meta(cfg, sparsity_ratio=sratio, s_common=s_common, s_innov=s_innov),
            ["K", *_SWEEP_HEADER], rows))
    return paths


def _run_table1(cfg, ledger, out):
    params = presets.TABLE1_PARAMS
    rows = []
    for m_idx, mode in enumerate(("cs", "dcs")):
        for e_idx, energy in enumerate(presets.TABLE1_ENERGIES):
            for r_idx, ratio in enumerate(presets.TABLE1_RATIOS):
                eh = presets.synthetic_eh(energy, ratio, params.K)
                est = _run_point(params, eh, mode, cfg.trials,
                                 derived_seed(cfg.seed, 10, m_idx, e_idx, r_idx), cfg, ledger)
                rows.append([mode, energy, "inf" if math.isinf(ratio) else round(ratio, 6),
                             est.pidr, est.ci95[0], est.ci95[1], est.failures, est.trials,
                             est.solver_failures, est.config_digest])
                _echo(f"table1 {mode} E={energy:.0f} ratio={ratio:g}: pidr={est.pidr:.4f}")
    path = write_csv(
        os.path.join(out, "table1.csv"),
        _meta(cfg, s_common=params.s_common, s_innov=params.s_innov),
        ["mode", "mean_energy", "ratio", "pidr", "ci_low", "ci_high", "failures",
         "trials", "solver_failures", "digest"], rows)
    return [path]


def _run_table2(cfg, ledger, out):
    rows = []
    for k_idx, K in enumerate(presets.TABLE2_KS):
        row = [K]
        for r_idx, ratio in enumerate(presets.TABLE2_RATIOS):
            for m_idx, mode in enumerate(("cs", "dcs")):
                params = presets.TABLE2_PARAMS[K]
                energy = montecarlo.energy_for_target(
                    params, ratio, cfg.target_pidr, mode, cfg.trials,
                    derived_seed(cfg.seed, 20, k_idx, r_idx, m_idx),
                    tau=cfg.tau, threshold=cfg.threshold, cap=cfg.cap,
                    ledger=ledger, workers=cfg.workers)
                row.append(energy)
                _echo(f"table2 K={K} ratio={ratio:g} {mode}: energy={energy:.0f}")
        rows.append(row)
    path = write_csv(
        os.path.join(out, "table2.csv"),
        _meta(cfg, target_pidr=cfg.target_pidr),
        ["K", "cs_ratio1", "dcs_ratio1", "cs_ratio2", "dcs_ratio2"], rows)
    return [path]


def _load_real_signals(cfg, mote_ids):
    path = dataio.resolve_data_path(cfg.data_path)
    traces = dataio.load_traces(path, mote_ids)
    segments = dataio.segment_aligned(traces, cfg.n)
    order = {mid: i for i, mid in enumerate(sorted(mote_ids))}
    signals = np.zeros((len(mote_ids), cfg.n))
    for seg in segments:
        signals[order[seg.mote_id]] = seg.samples
    return signals


def _run_fig7(cfg, ledger, out):
    mote_ids = tuple(cfg.mote_ids) if cfg.preset == "custom" else presets.FIG7_MOTES
    signals = _load_real_signals(cfg, mote_ids)
    basis = dataio.dct_basis(cfg.n)
    tau = presets.tau_real()
    K = len(mote_ids)
    eh = presets.real_eh(presets.FIG7_RATIO, K)
    rows = []
    for p_idx, panel in enumerate(cfg.panel_sweep):
        cells = [panel]
        for m_idx, mode in enumerate(("cs", "dcs")):
            est = montecarlo.run_real_campaign(
                signals, basis, eh, tau, mode, cfg.real_trials,
                derived_seed(cfg.seed, 70, p_idx, m_idx), panel_area=panel,
                window=cfg.slot_window, bits=cfg.bits, threshold=cfg.threshold,
                cap=cfg.cap, ledger=ledger, workers=cfg.workers)
            cells.extend([est.pidr, est.ci95[0], est.ci95[1]])
            _echo(f"fig7 panel={panel:g} {mode}: pidr={est.pidr:.3f}")
        rows.append(cells)
    path = write_csv(
        os.path.join(out, "fig7.csv"),
        _meta(cfg, motes=list(mote_ids), ratio=presets.FIG7_RATIO, tau=tau,
              trials=cfg.real_trials),
        ["panel_area", "cs_pidr", "cs_ci_low", "cs_ci_high",
         "dcs_pidr", "dcs_ci_low", "dcs_ci_high"], rows)
    return [path]


def _run_fig8(cfg, ledger, out):
    motes_all = tuple(cfg.mote_ids)
    signals_all = _load_real_signals(cfg, motes_all)
    basis = dataio.dct_basis(cfg.n)
    tau = presets.tau_real()
    k_sweep = cfg.k_sweep or tuple(k for k in presets.FIG8_KS if k <= len(motes_all))
    rows = []
    for k_idx, K in enumerate(k_sweep):
        mote_sel = sorted(motes_all)[:K]
        idx = [sorted(motes_all).index(m) for m in mote_sel]
        signals = signals_all[idx]
        eh = presets.real_eh(presets.FIG7_RATIO, K)
        cells = [K]
        for m_idx, mode in enumerate(("cs", "dcs")):
            est = montecarlo.run_real_campaign(
                signals, basis, eh, tau, mode, cfg.real_trials,
                derived_seed(cfg.seed, 80, k_idx, m_idx), panel_area=cfg.panel_area,
                window=cfg.slot_window, bits=cfg.bits, threshold=cfg.threshold,
                cap=cfg.cap, ledger=ledger, workers=cfg.workers)
            cells.extend([est.pidr, est.ci95[0], est.ci95[1]])
            _echo(f"fig8 K={K} {mode}: pidr={est.pidr:.3f}")
        rows.append(cells)
    path = write_csv(
        os.path.join(out, "fig8.csv"),
        _meta(cfg, motes=list(motes_all), panel_area=cfg.panel_area, tau=tau,
              trials=cfg.real_trials),
        ["K", "cs_pidr", "cs_ci_low", "cs_ci_high", "dcs_pidr", "dcs_ci_low", "dcs_ci_high"],
        rows)
    return [path]


def _run_custom(cfg, ledger, out):
    params = cfg.scci()
    rows = []
    debug_lines = []
    for r_idx, ratio in enumerate(cfg.eh_ratios):
        for e_idx, energy in enumerate(cfg.energy_sweep):
            eh = eh_from_ratio(energy, ratio, cfg.K, cfg.tau)
            rep = analysis.dcs_bound_report(eh, cfg.s_common, cfg.s_innov)
            cells = [ratio, energy]
            for m_idx, mode in enumerate(cfg.modes):
                sink = [] if cfg.trials <= 10 else None
                est = _run_point(params, eh, mode, cfg.trials,
                                 derived_seed(cfg.seed, 90, r_idx, e_idx, m_idx), cfg,
                                 ledger, detail_sink=sink)
                cells.extend([mode, est.pidr, est.ci95[0], est.ci95[1]])
                if sink is not None:
                    for d in sink:
                        debug_lines.append(
                            f"ratio={ratio:g} energy={energy:g} mode={mode} "
                            f"trial={d['trial']} budgets={d['budgets']} "
                            f"errors={[f'{e:.3e}' for e in d['errors']]} "
                            f"success={d['success']}")
                _echo(f"custom ratio={ratio:g} energy={energy:g} {mode}: pidr={est.pidr:.4f}")
            cells.extend([rep.cs_bound, rep.dcs_bound])
            rows.append(cells)
    header = ["ratio", "mean_energy"]
    for i, _ in enumerate(cfg.modes):
        header.extend([f"mode_{i}", f"pidr_{i}", f"ci_low_{i}", f"ci_high_{i}"])
    header.extend(["cs_bound", "dcs_bound"])
    paths = [write_csv(os.path.join(out, "custom.csv"), _meta(cfg), header, rows)]
    if debug_lines:
        dbg = os.path.join(out, "custom_debug.txt")
        with open(dbg, "w") as fh:
            fh.write("\n".join(debug_lines) + "\n")
        paths.append(dbg)
    return paths


_RUNNERS = {
    "fig3": _run_fig3, "fig4": _run_fig4, "fig5": _run_fig5, "fig6": _run_fig6,
    "fig7": _run_fig7, "fig8": _run_fig8, "table1": _run_table1, "table2": _run_table2,
    "custom": _run_custom,
}

_PRESET_OVERRIDES = {
    "fig7": {"n": presets.N_REAL, "threshold": 1e-3, "mote_ids": presets.FIG7_MOTES},
    "fig8": {"n": presets.N_REAL, "threshold": 1e-3},
}


def build_config(preset: str | None, config_file: str | None, sets: tuple[str, ...],
                 **flag_overrides) -> tuple[ExperimentConfig, list[str]]:
    updates: dict = {}
    diagnostics: list[str] = []
    if config_file:
        file_updates, diags = parse_config_file(config_file)
        updates.update(file_updates)
        diagnostics.extend(diags)
    if preset:
        updates["preset"] = preset
    preset_name = updates.get("preset", "custom")
    merged = dict(_PRESET_OVERRIDES.get(preset_name, {}))
    merged.update(updates)
    for pair in sets:
        if "=" not in pair:
            diagnostics.append(f"--set expects key=value, got {pair!r}")
            continue
        key, _, raw = pair.partition("=")
        key = key.strip()
        if key not in {f.name for f in fields(ExperimentConfig)}:
            diagnostics.append(f"--set: unknown key {key!r}")
            continue
        try:
            merged[key] = _parse_value(key, raw)
        except ValueError as exc:
            diagnostics.append(f"--set: bad value for {key}: {exc}")
    for key, value in flag_overrides.items():
        if value is not None:
            merged[key] = value
    try:
        cfg = ExperimentConfig(**merged)
    except TypeError as exc:
        diagnostics.append(str(exc))
        cfg = ExperimentConfig()
    return cfg, diagnostics


@click.group()
def main():
    """Energy-harvesting sensor network data-gathering simulator."""


@main.command(name="run")
@click.option("--preset", type=click.Choice(PRESET_NAMES), default=None)
@click.option("--config", "config_file", type=click.Path(exists=True), default=None)
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), default=None)
@click.option("--data-path", type=click.Path(), default=None)
@click.option("--workers", type=int, default=None)
@click.option("--set", "sets", multiple=True,
              help="Override any config field, e.g. --set energy_sweep=100,200")
def run_cmd(preset, config_file, trials, seed, out_dir, data_path, workers, sets):
    """Run an experiment preset and write CSV results."""
    cfg, diagnostics = build_config(preset, config_file, sets, trials=trials, seed=seed,
                                    out_dir=out_dir, data_path=data_path, workers=workers)
    diagnostics.extend(validate(cfg))
    if diagnostics:
        for d in diagnostics:
            click.echo(f"error: {d}", err=True)
        sys.exit(1)
    os.makedirs(cfg.out_dir, exist_ok=True)
    ledger = CampaignLedger(os.path.join(cfg.out_dir, "campaign_ledger.csv"))
    paths = _RUNNERS[cfg.preset](cfg, ledger, cfg.out_dir)
    for p in paths:
        click.echo(f"wrote {p}")


@main.command(name="validate")
@click.option("--preset", type=click.Choice(PRESET_NAMES), default=None)
@click.option("--config", "config_file", type=click.Path(exists=True), default=None)
@click.option("--set", "sets", multiple=True)
def validate_cmd(preset, config_file, sets):
    """Check a configuration and report every problem found."""
    cfg, diagnostics = build_config(preset, config_file, sets)
    diagnostics.extend(validate(cfg))
    if diagnostics:
        for d in diagnostics:
            click.echo(f"error: {d}", err=True)
        sys.exit(1)
    click.echo(f"configuration ok (preset={cfg.preset})")


@main.command(name="fetch-data")
@click.option("--dest", type=click.Path(), default="data")
def fetch_cmd(dest):
    """Download the full sensor trace recording."""
    try:
        path = dataio.fetch_dataset(dest)
    except dataio.DataError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
