"""Command-line entry point: configuration, run orchestration and
persistence of norm series, reports and field dumps.

Artifacts are plain CSV (full-precision floats) plus raw little-endian
field dumps behind a 64-byte text header; a JSON manifest recording
every knob is written last.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .config import (
    RunConfig,
    apply_overrides,
    config_from_dict,
    config_to_dict,
)
from .convergence import deterministic_order_study, strong_order_study
from .errors import (
    GrayScottError,
    NoConvergence,
    NonFinite,
    ParseError,
    ScheduleExhausted,
    ValidationError,
)
from .estimators import (
    estimate_coupling,
    estimate_u_L2,
    estimate_u_pstar,
    estimate_v_Halpha,
)
from .fixedpoint import compute_kset_constants, kset_check, picard_solve
from .integrate import PathRecord, simulate_ensemble, simulate_glued
from .paramgate import evaluate_gate, gate_sweep
from .spectral import lp_norm, sobolev_norm

OUT_ENV_VAR = "GRAYSCOTT_OUT"
NORM_FILE_COLUMNS = (
    ("t", None),
    ("u_L2", "u_l2"),
    ("u_Lpstar", "u_lpstar"),
    ("v_Halpha", "v_halpha"),
    ("v_Halpha_aleph2", "v_halpha_diss"),
    ("h", "h"),
    ("phi", "phi"),
)


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_norm_series(path: str, record: PathRecord):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(name for name, _ in NORM_FILE_COLUMNS) + "\n")
        for n in range(record.times.size):
            row = [_fmt(record.times[n])]
            row += [_fmt(record.series[col][n]) for _, col in NORM_FILE_COLUMNS[1:]]
            fh.write(",".join(row) + "\n")


def write_field_dump(path: str, coeffs: np.ndarray, space, name: str, t: float):
    header = f"d={space.d} bc={space.boundary} N={space.modes_per_axis} field={name} t={t:.9g}"
    raw = header.encode("ascii")[:64].ljust(64, b" ")
    with open(path, "wb") as fh:
        fh.write(raw)
        fh.write(np.asarray(coeffs, dtype="<f8").tobytes())


def read_field_dump(path: str) -> tuple[dict, np.ndarray]:
    with open(path, "rb") as fh:
        header = fh.read(64).decode("ascii").strip()
        data = np.frombuffer(fh.read(), dtype="<f8")
    meta = dict(item.split("=", 1) for item in header.split())
    return meta, data


def write_csv(path: str, header: list[str], rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) if isinstance(x, float) else str(x) for x in row) + "\n")


class RunContext:
    """Collects artifacts and writes the manifest last."""

    def __init__(self, out_dir: str, cfg: RunConfig, subcommand: str):
        self.out_dir = out_dir
        self.cfg = cfg
        self.subcommand = subcommand
        self.outputs: list[str] = []
        self.t0 = time.perf_counter()
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        self.outputs.append(name)
        return os.path.join(self.out_dir, name)

    def finish(self, status: str, partial: bool = False):
        gate = evaluate_gate(
            q=self.cfg.model.q, aleph=self.cfg.model.aleph,
            alpha=self.cfg.model.alpha, d=self.cfg.space.d,
            p_star0=self.cfg.model.p_star, gamma1=self.cfg.noise.gamma1,
            gamma2=self.cfg.noise.gamma2, rho=self.cfg.model.rho,
        )
        manifest = {
            "subcommand": self.subcommand,
            "config": config_to_dict(self.cfg),
            "seed": self.cfg.noise.seed,
            "code_version": __version__,
            "gate_admissible": gate.overall,
            "wall_time_s": time.perf_counter() - self.t0,
            "status": status,
            "partial": partial,
            "outputs": sorted(self.outputs),
        }
        with open(os.path.join(self.out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)


def _simulate_records(cfg: RunConfig) -> list[PathRecord]:
    u0 = cfg.u0.build(cfg.space)
    v0 = cfg.v0.build(cfg.space)
    return simulate_ensemble(
        cfg.model, cfg.space, cfg.noise, u0, v0, cfg.kappa,
        cfg.T, cfg.dt, np.arange(cfg.paths),
    )


def cmd_check_params(cfg: RunConfig, ctx: RunContext, args) -> int:
    report = evaluate_gate(
        q=cfg.model.q, aleph=cfg.model.aleph, alpha=cfg.model.alpha,
        d=cfg.space.d, p_star0=cfg.model.p_star,
        gamma1=cfg.noise.gamma1, gamma2=cfg.noise.gamma2, rho=cfg.model.rho,
    )
    text = "\n".join(report.lines())
    print(text)
    with open(ctx.path("gate_report.txt"), "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    for i, sweep in enumerate(args.sweep or []):
        name, lo, hi, n = sweep[0], float(sweep[1]), float(sweep[2]), int(sweep[3])
        base = dict(
            q=cfg.model.q, aleph=cfg.model.aleph, alpha=cfg.model.alpha,
            d=cfg.space.d, p_star0=cfg.model.p_star,
            gamma1=cfg.noise.gamma1, gamma2=cfg.noise.gamma2, rho=cfg.model.rho,
        )
        values = list(np.linspace(lo, hi, n))
        rows = [
            [row[0], int(row[1]), row[2], row[3]]
            for row in gate_sweep(base, (name, values))
        ]
        write_csv(ctx.path(f"gate_sweep_{i}_{name}.csv"),
                  [name, "admissible", "n_failed", "worst_margin"], rows)
    ctx.finish("ok")
    return 0


def _write_records(cfg: RunConfig, ctx: RunContext, records: list[PathRecord]):
    for rec in records:
        write_norm_series(ctx.path(f"path_{rec.path_id:05d}.csv"), rec)
        if cfg.field_dumps:
            for t, u_coeffs, v_coeffs in rec.snapshots:
                for name, coeffs in (("u", u_coeffs), ("v", v_coeffs)):
                    write_field_dump(
                        ctx.path(f"field_{name}_{rec.path_id:05d}_t{t:.6g}.bin"),
                        coeffs, cfg.space, name, t,
                    )


def cmd_simulate(cfg: RunConfig, ctx: RunContext, args) -> int:
    records = _simulate_records(cfg)
    _write_records(cfg, ctx, records)
    stopped = sum(1 for r in records if r.stop_step is not None)
    print(f"simulated {len(records)} paths, {records[0].n_steps} steps each; "
          f"{stopped} reached the cutoff level")
    ctx.finish("ok")
    return 0


def cmd_glue(cfg: RunConfig, ctx: RunContext, args) -> int:
    u0 = cfg.u0.build(cfg.space)
    v0 = cfg.v0.build(cfg.space)
    rows = []
    for pid in range(cfg.paths):
        rec = simulate_glued(
            cfg.model, cfg.space, cfg.noise, u0, v0, cfg.kappa_schedule,
            cfg.T, cfg.dt, path_id=pid,
        )
        write_norm_series(ctx.path(f"path_{pid:05d}.csv"), rec)
        for kappa, tbar in rec.glue_events:
            rows.append([pid, kappa, tbar])
    write_csv(ctx.path("glue_events.csv"), ["path", "kappa", "stop_time"], rows)
    print(f"glued {cfg.paths} paths; {len(rows)} glue events")
    ctx.finish("ok")
    return 0


def cmd_fixed_point(cfg: RunConfig, ctx: RunContext, args) -> int:
    u0 = cfg.u0.build(cfg.space)
    v0 = cfg.v0.build(cfg.space)
    rows, margin_rows = [], []
    for pid in range(cfg.paths):
        result = picard_solve(
            cfg.model, cfg.space, cfg.noise, u0, v0, cfg.kappa, pid,
            cfg.T, cfg.dt, tol=cfg.tol, max_iter=cfg.max_iter,
        )
        for i, res in enumerate(result["residuals"]):
            rows.append([pid, i + 1, res])
        constants = compute_kset_constants(
            u0.l2_norm() ** 2, lp_norm(u0, cfg.model.p_star) ** cfg.model.p_star,
            sobolev_norm(v0, cfg.model.rho) ** 2, cfg.kappa, cfg.T,
            cfg.model.lam, cfg.model.p_star,
        )
        check = kset_check(result["fixed_point"], constants, cfg.model.rho,
                           cfg.model.aleph, cfg.model.p_star)
        margin_rows.append([pid, int(check["in_set"]), *check["margins"]])
        print(f"path {pid}: fixed point in {result['iterates']} iterations, "
              f"in_set={check['in_set']}")
    write_csv(ctx.path("residuals.csv"), ["path", "iteration", "residual"], rows)
    write_csv(ctx.path("kset_margins.csv"),
              ["path", "in_set", "margin_K1", "margin_K2", "margin_K3"], margin_rows)
    ctx.finish("ok")
    return 0


def cmd_estimate(cfg: RunConfig, ctx: RunContext, args) -> int:
    records = _simulate_records(cfg)
    u0 = cfg.u0.build(cfg.space)
    reports = [estimate_u_L2(records, u0_l2_sq=u0.l2_norm() ** 2)]
    pstar = estimate_u_pstar(records, lam=cfg.model.lam)
    reports += [pstar["sup"], pstar["gradient"]]
    vh = estimate_v_Halpha(records)
    reports += [vh["sup"], vh["dissipation"]]
    reports.append(estimate_coupling(records, m=cfg.m_power))
    rows = [[r.name, r.n_paths, r.estimate, r.ci_halfwidth] for r in reports]
    write_csv(ctx.path("reports.csv"),
              ["quantity", "n_paths", "estimate", "ci_halfwidth"], rows)
    width = max(len(r.name) for r in reports)
    lines = [f"{r.name:<{width}}  {r.estimate:14.6g} +/- {r.ci_halfwidth:.3g}"
             for r in reports]
    text = "\n".join(lines)
    print(text)
    with open(ctx.path("reports.txt"), "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    ctx.finish("ok")
    return 0


def cmd_convergence(cfg: RunConfig, ctx: RunContext, args) -> int:
    u0 = cfg.u0.build(cfg.space)
    v0 = cfg.v0.build(cfg.space)
    dts = [cfg.T * 2.0**-j for j in range(5, 9)]
    det = deterministic_order_study(cfg.model, cfg.space, u0, v0, cfg.T, dts)
    strong_params = dataclasses.replace(cfg.model, c1=0.0, c2=0.0)
    strong = strong_order_study(
        strong_params, cfg.space, cfg.noise, u0, v0, cfg.T, dts,
        n_paths=min(cfg.paths, 128),
    )
    rows = [["deterministic", dt, err] for dt, err in zip(det["dts"], det["errors"])]
    rows += [["strong", dt, err] for dt, err in zip(strong["dts"], strong["errors"])]
    write_csv(ctx.path("convergence.csv"), ["study", "dt", "error"], rows)
    print(f"deterministic order {det['order']:.3f}, strong order {strong['order']:.3f}")
    ctx.finish("ok")
    return 0


_COMMANDS = {
    "check-params": cmd_check_params,
    "simulate": cmd_simulate,
    "glue": cmd_glue,
    "fixed-point": cmd_fixed_point,
    "estimate": cmd_estimate,
    "convergence": cmd_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grayscott",
        description="Spectral simulation and verification harness for the "
                    "stochastic activator-inhibitor system",
    )
    parser.add_argument("subcommand", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="path to a JSON configuration document")
    parser.add_argument("--seed", type=int, help="noise seed override")
    parser.add_argument("--paths", type=int, help="ensemble size override")
    parser.add_argument("--out", help=f"output directory (default ${OUT_ENV_VAR} or ./grayscott-out)")
    parser.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="dotted config override, repeatable (e.g. model.q=2)")
    parser.add_argument("--sweep", action="append", nargs=4,
                        metavar=("NAME", "LO", "HI", "N"),
                        help="check-params: sweep one gate argument over a range")
    return parser


def load_config(args) -> RunConfig:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as err:
            raise ParseError(f"{args.config}: line {err.lineno}, column {err.colno}: {err.msg}")
    else:
        doc = {}
    if args.override:
        doc = apply_overrides(doc, args.override)
    if args.seed is not None:
        doc.setdefault("noise", {})["seed"] = args.seed
    if args.paths is not None:
        doc["paths"] = args.paths
    return config_from_dict(doc)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except (ParseError, ValidationError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    out_dir = args.out or os.environ.get(OUT_ENV_VAR) or "grayscott-out"
    ctx = RunContext(out_dir, cfg, args.subcommand)
    try:
        return _COMMANDS[args.subcommand](cfg, ctx, args)
    except (NonFinite, NoConvergence, ScheduleExhausted) as err:
        print(f"run failed: {err}", file=sys.stderr)
        ctx.finish(f"error: {err}", partial=True)
        return 1
    except GrayScottError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        ctx.finish(f"error: {err}", partial=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
