"""Experiment harness: config files, Monte Carlo sweeps, CSV output.

The results CSV has a fixed schema (exact column order, header row, UTF-8,
comma-separated, '.' decimal separator, floats at 6 significant digits):

    scheme,arch,csi_alpha,run,weight_idx,u1,u2,R1,R2,wsr,seed

One row per swept weight vector plus two single-user corner rows
(weight_idx -1 and -2) per (scheme, arch, run).  Rows are written
incrementally in deterministic task order, so partial results survive an
interrupted run and identical config+seed reproduce byte-identical files.
"""
from __future__ import annotations

import csv
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from .alternating import RegionPoint, pareto_frontier, rate_region
from .channel import gen_channels
from .config import (
    SCHEMES,
    CsiErrorModel,
    FadingParams,
    Geometry,
    NetworkConfig,
    OptimizerSettings,
    db_to_linear,
    dbm_to_watt,
)
from .exceptions import ConfigError

CSV_COLUMNS = (
    "scheme", "arch", "csi_alpha", "run", "weight_idx",
    "u1", "u2", "R1", "R2", "wsr", "seed",
)
SUMMARY_COLUMNS = (
    "scheme", "arch", "csi_alpha", "weight_idx",
    "u1", "u2", "R1", "R2", "wsr", "n_runs",
)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _take(mapping: dict, key: str, default=None):
    return mapping.pop(key, default)


def _reject_unknown(mapping: dict, context: str) -> None:
    if mapping:
        raise ConfigError(
            f"{context}: unknown keys {sorted(mapping.keys())}"
        )


def load_config(path: str) -> NetworkConfig:
    """Parse and validate a YAML experiment config.

    dB fields (zeta0_db, rician_db, noise_dbm) are converted to linear
    Watts/ratios; unknown keys anywhere are rejected with the offending
    section named.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path!r}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path!r} must be a mapping at top level")

    net = _take(raw, "network", {}) or {}
    if not isinstance(net, dict):
        raise ConfigError("network: must be a mapping")
    n_aps = int(_take(net, "n_aps", 1))
    n_tx = int(_take(net, "n_tx", 2))
    n_users = int(_take(net, "n_users", 2))
    n_ris = int(_take(net, "n_ris", 1))
    n_elements = int(_take(net, "n_elements", 20))
    groups_raw = _take(net, "groups", None)
    groups = (
        tuple(tuple(int(k) for k in g) for g in groups_raw)
        if groups_raw is not None else None
    )
    _reject_unknown(net, "network")

    power_raw = _take(raw, "power_w", [1.0])
    if isinstance(power_raw, (int, float)):
        power_raw = [power_raw] * n_aps
    power_w = tuple(float(p) for p in power_raw)

    if "noise_w" in raw and "noise_dbm" in raw:
        raise ConfigError("give either noise_w or noise_dbm, not both")
    if "noise_w" in raw:
        sigma_z2 = float(_take(raw, "noise_w"))
    else:
        sigma_z2 = dbm_to_watt(float(_take(raw, "noise_dbm", -70.0)))

    geo_raw = _take(raw, "geometry", {}) or {}
    if not isinstance(geo_raw, dict):
        raise ConfigError("geometry: must be a mapping")
    geometry = Geometry(
        d_ar=float(_take(geo_raw, "d_ar", 50.0)),
        d_ru=float(_take(geo_raw, "d_ru", 10.0)),
        d_au=(lambda v: float(v) if v is not None else None)(
            _take(geo_raw, "d_au", None)
        ),
    )
    _reject_unknown(geo_raw, "geometry")

    fad_raw = _take(raw, "fading", {}) or {}
    if not isinstance(fad_raw, dict):
        raise ConfigError("fading: must be a mapping")
    if "zeta0" in fad_raw and "zeta0_db" in fad_raw:
        raise ConfigError("fading: give either zeta0 or zeta0_db, not both")
    zeta0 = (
        float(_take(fad_raw, "zeta0"))
        if "zeta0" in fad_raw
        else db_to_linear(float(_take(fad_raw, "zeta0_db", -30.0)))
    )
    if "rician_kappa" in fad_raw and "rician_db" in fad_raw:
        raise ConfigError(
            "fading: give either rician_kappa or rician_db, not both"
        )
    kappa = (
        float(_take(fad_raw, "rician_kappa"))
        if "rician_kappa" in fad_raw
        else db_to_linear(float(_take(fad_raw, "rician_db", 2.0)))
    )
    fading = FadingParams(
        zeta0=zeta0,
        eps_au=float(_take(fad_raw, "eps_au", 3.0)),
        eps_ar=float(_take(fad_raw, "eps_ar", 1.9)),
        eps_ru=float(_take(fad_raw, "eps_ru", 1.7)),
        rician_kappa=kappa,
        los=str(_take(fad_raw, "los", "ones")).lower(),
    )
    _reject_unknown(fad_raw, "fading")

    csi_raw = _take(raw, "csi", {}) or {}
    if not isinstance(csi_raw, dict):
        raise ConfigError("csi: must be a mapping")
    alpha = float(_take(csi_raw, "alpha", 1.0))
    n_eval = int(_take(csi_raw, "n_eval_samples", 2000))
    csi_design = str(_take(csi_raw, "design", "estimate")).lower()
    n_design = int(_take(csi_raw, "n_design_samples", 16))
    csi_scaling = str(_take(csi_raw, "scaling", "noise")).lower()
    if csi_scaling not in ("noise", "link"):
        raise ConfigError(
            f"csi: scaling must be 'noise' or 'link', got {csi_scaling!r}"
        )
    _reject_unknown(csi_raw, "csi")
    csi = CsiErrorModel.from_alpha(alpha, sigma_z2)

    opt_raw = _take(raw, "optimizer", {}) or {}
    if not isinstance(opt_raw, dict):
        raise ConfigError("optimizer: must be a mapping")
    defaults = OptimizerSettings()
    optimizer = OptimizerSettings(
        wsr_tol=float(_take(opt_raw, "wsr_tol", defaults.wsr_tol)),
        max_outer_iters=int(
            _take(opt_raw, "max_outer_iters", defaults.max_outer_iters)
        ),
        max_wmmse_iters=int(
            _take(opt_raw, "max_wmmse_iters", defaults.max_wmmse_iters)
        ),
        restarts=int(_take(opt_raw, "restarts", defaults.restarts)),
        fd_step=float(_take(opt_raw, "fd_step", defaults.fd_step)),
        ls_backtrack=float(
            _take(opt_raw, "ls_backtrack", defaults.ls_backtrack)
        ),
        ls_max=int(_take(opt_raw, "ls_max", defaults.ls_max)),
        max_qn_iters=int(_take(opt_raw, "max_qn_iters", defaults.max_qn_iters)),
    )
    _reject_unknown(opt_raw, "optimizer")

    scheme = str(_take(raw, "scheme", "rs1")).lower()
    arch = str(_take(raw, "arch", "single")).lower()
    mc_runs = int(_take(raw, "mc_runs", 50))
    n_weights = int(_take(raw, "n_weights", 21))
    seed = int(_take(raw, "seed", 1))
    _reject_unknown(raw, "config")

    try:
        cfg = NetworkConfig(
            n_aps=n_aps, n_tx=n_tx, n_users=n_users, n_ris=n_ris,
            n_elements=n_elements, groups=groups, power_w=power_w,
            sigma_z2=sigma_z2, geometry=geometry, fading=fading, csi=csi,
            n_csi_eval_samples=n_eval, csi_design=csi_design,
            n_csi_design_samples=n_design, scheme=scheme, arch=arch,
            optimizer=optimizer, mc_runs=mc_runs, n_weights=n_weights,
            seed=seed,
        )
        if csi_scaling == "link":
            cfg = cfg.with_(csi=CsiErrorModel.link_scaled(alpha, cfg))
        return cfg
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config {path!r}: {exc}") from exc


def _point_row(p: RegionPoint, run: int) -> List[str]:
    return [
        p.scheme, p.arch, _fmt(p.csi_alpha), str(run), str(p.weight_idx),
        _fmt(p.u1), _fmt(p.u2), _fmt(p.R1), _fmt(p.R2), _fmt(p.wsr),
        str(p.seed),
    ]


def _region_task(
    cfg: NetworkConfig, scheme: str, arch: str, run: int
) -> List[RegionPoint]:
    run_seed = cfg.seed + run
    truth = gen_channels(cfg, np.random.default_rng([run_seed, 0]))
    task_seed = int(
        np.random.SeedSequence(
            [run_seed, SCHEMES.index(scheme), zlib.crc32(arch.encode())]
        ).generate_state(1)[0]
    )
    return rate_region(truth, cfg, seed=task_seed, scheme=scheme, arch=arch)


def run_experiment(
    cfg: NetworkConfig,
    schemes: Sequence[str],
    archs: Sequence[str],
    out_path: str,
    jobs: int = 1,
) -> List[RegionPoint]:
    """Sweep every (scheme, arch, Monte Carlo run) and write the CSV.

    The channel realization of run r depends only on cfg.seed + r, so all
    schemes and architectures see the same channel ensemble.  Rows are
    flushed after each completed task in task order regardless of the worker
    count.
    """
    for s in schemes:
        if s not in SCHEMES:
            raise ConfigError(f"unknown scheme {s!r}; expected one of {SCHEMES}")
    tasks = [
        (scheme, arch, run)
        for scheme in schemes
        for arch in archs
        for run in range(cfg.mc_runs)
    ]
    collected: List[RegionPoint] = []
    tmp_path = out_path + ".partial"
    with open(tmp_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        fh.flush()

        def commit(task, points) -> None:
            _, _, run = task
            for p in points:
                writer.writerow(_point_row(p, run))
            fh.flush()
            collected.extend(points)

        if jobs <= 1:
            for task in tasks:
                commit(task, _region_task(cfg, *task))
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(_region_task, cfg, *t) for t in tasks]
                for task, fut in zip(tasks, futures):
                    commit(task, fut.result())
    os.replace(tmp_path, out_path)
    return collected


def _read_rows(path: str) -> List[dict]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != CSV_COLUMNS:
                raise ConfigError(
                    f"{path}: unexpected CSV header {header}; "
                    f"expected {list(CSV_COLUMNS)}"
                )
            rows = []
            for line_no, row in enumerate(reader, start=2):
                if len(row) != len(CSV_COLUMNS):
                    raise ConfigError(
                        f"{path}:{line_no}: expected {len(CSV_COLUMNS)} fields"
                    )
                rows.append(dict(zip(CSV_COLUMNS, row)))
            return rows
    except OSError as exc:
        raise ConfigError(f"cannot read {path!r}: {exc}") from exc


def summarize(in_path: str, out_path: str) -> List[dict]:
    """Average (R1, R2, wsr) at matched weight indices across runs and emit
    the per-(scheme, arch, csi) frontier CSV.

    Averaged points dominated by another averaged point of the same series
    are dropped; survivors are ordered by weight index (corners first).
    """
    rows = _read_rows(in_path)
    groups: Dict[Tuple[str, str, str, int], List[dict]] = {}
    for row in rows:
        key = (
            row["scheme"], row["arch"], row["csi_alpha"], int(row["weight_idx"])
        )
        groups.setdefault(key, []).append(row)

    averaged: Dict[Tuple[str, str, str], List[dict]] = {}
    for (scheme, arch, csi_alpha, widx), members in sorted(groups.items()):
        entry = {
            "scheme": scheme,
            "arch": arch,
            "csi_alpha": csi_alpha,
            "weight_idx": widx,
            "u1": float(members[0]["u1"]),
            "u2": float(members[0]["u2"]),
            "R1": float(np.mean([float(m["R1"]) for m in members])),
            "R2": float(np.mean([float(m["R2"]) for m in members])),
            "wsr": float(np.mean([float(m["wsr"]) for m in members])),
            "n_runs": len(members),
        }
        averaged.setdefault((scheme, arch, csi_alpha), []).append(entry)

    out_rows: List[dict] = []
    for key in sorted(averaged.keys()):
        series = averaged[key]
        keep = _frontier_filter(series)
        out_rows.extend(sorted(keep, key=lambda e: e["weight_idx"]))

    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for e in out_rows:
            writer.writerow([
                e["scheme"], e["arch"], e["csi_alpha"], str(e["weight_idx"]),
                _fmt(e["u1"]), _fmt(e["u2"]), _fmt(e["R1"]), _fmt(e["R2"]),
                _fmt(e["wsr"]), str(e["n_runs"]),
            ])
    return out_rows


def _frontier_filter(series: List[dict]) -> List[dict]:
    keep = []
    for e in series:
        dominated = any(
            (o["R1"] >= e["R1"] and o["R2"] >= e["R2"])
            and (o["R1"] > e["R1"] or o["R2"] > e["R2"])
            for o in series
        )
        if not dominated:
            keep.append(e)
    return keep
