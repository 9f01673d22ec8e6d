"""Batch entry point: configuration, orchestration, persistence, reproduction.

Subcommands: simulate, analytic, limits, validate, reproduce-figb.
Configs are JSON; every run emits a manifest.json that reproduces the run
byte for byte when passed back through --config.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .laws import (DiracLaw, ExpGeometricLaw, ExponentialLaw, GeometricLaw,
                   two_point_law)
from .limits import (LimitLawParams, first_point_limit_transform, g_infinity,
                     z_cdf)
from .measures import exp_geometric_law, iterate_hcp_measures, survival_probability_exact
from .sampling import (ContainsOrigin, ExchangeableMixture, LatticeStationary,
                       LeftBounded, PeriodicRenewal, Stationary)
from .schedule import (ArithmeticThresholds, EpochSchedule, ExplicitThresholds,
                       GeometricThresholds, PresetRateFactory)
from .hcp import WindowPolicy, replicate
from .transport import c0_estimate, default_c0_grid, u1_on_lattice, un_transport


class ConfigError(ValueError):
    """Configuration failed schema validation; the message names the field."""


def _require(cfg: dict, path: str, types, default=None, required=False):
    node = cfg
    parts = path.split(".")
    for p in parts[:-1]:
        node = node.get(p, {}) if isinstance(node, dict) else {}
    if not isinstance(node, dict) or parts[-1] not in node:
        if required:
            raise ConfigError(f"config field '{path}' is required")
        return default
    val = node[parts[-1]]
    if types is not None and not isinstance(val, types):
        raise ConfigError(f"config field '{path}': expected {types}, got {type(val).__name__}")
    return val


def build_law(node: dict, path: str):
    kind = node.get("kind")
    if kind == "dirac":
        return DiracLaw(float(node.get("value", 1.0)))
    if kind == "geometric":
        return GeometricLaw(float(node["q"]))
    if kind == "exponential":
        return ExponentialLaw(float(node.get("rate", 1.0)))
    if kind == "exp_geometric":
        return ExpGeometricLaw(float(node["p"]))
    if kind == "two_point":
        return two_point_law(float(node["a"]), float(node["b"]),
                             float(node.get("p_a", 0.5)))
    raise ConfigError(f"{path}.kind: unknown law {kind!r}")


def build_spec(cfg: dict):
    law = build_law(_require(cfg, "initial_law", dict, required=True), "initial_law")
    variant = _require(cfg, "process.variant", str, default="periodic")
    if variant == "periodic":
        return PeriodicRenewal(law)
    if variant == "left_bounded":
        first = _require(cfg, "process.first_point", (int, float), default=None)
        return LeftBounded(law, None if first is None else float(first))
    if variant == "contains_origin":
        return ContainsOrigin(law)
    if variant == "stationary":
        return Stationary(law)
    if variant == "lattice_stationary":
        return LatticeStationary(law)
    if variant == "exchangeable":
        comps = _require(cfg, "process.components", list, required=True)
        return ExchangeableMixture(tuple(
            (float(w), build_law(ln, f"process.components[{i}]"))
            for i, (w, ln) in enumerate(comps)))
    raise ConfigError(f"process.variant: unknown variant {variant!r}")


def build_schedule(cfg: dict) -> EpochSchedule:
    kind = _require(cfg, "schedule.thresholds", str, default="geometric")
    if kind == "geometric":
        a = float(_require(cfg, "schedule.a", (int, float), default=2.0))
        if not 1.0 < a <= 2.0:
            raise ConfigError("schedule.a: geometric ratio must lie in (1, 2]")
        thresholds = GeometricThresholds(a)
    elif kind == "arithmetic":
        thresholds = ArithmeticThresholds()
    elif kind == "explicit":
        values = _require(cfg, "schedule.values", list, required=True)
        thresholds = ExplicitThresholds(tuple(float(v) for v in values))
    else:
        raise ConfigError(f"schedule.thresholds: unknown preset {kind!r}")
    rates = _require(cfg, "schedule.rates", str, default="east")
    left = float(_require(cfg, "schedule.left", (int, float), default=0.0))
    right = float(_require(cfg, "schedule.right", (int, float), default=1.0))
    factory = PresetRateFactory(rates, left, right)
    gamma_cfg = _require(cfg, "schedule.gamma", (int, float), default=None)
    gamma = float(gamma_cfg) if gamma_cfg is not None else factory.gamma
    return EpochSchedule(thresholds, factory, gamma)


def build_window(cfg: dict) -> WindowPolicy:
    n = _require(cfg, "window.n_intervals", int, default=None)
    target = _require(cfg, "window.target_core", int, default=None)
    buffer_factor = float(_require(cfg, "window.buffer_factor", (int, float), default=16.0))
    if n is None and target is None:
        n = 100_000
    return WindowPolicy(n_intervals=n, target_core=target, buffer_factor=buffer_factor)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _prepare_out(out: str, overwrite: bool) -> str:
    if os.path.exists(out) and os.listdir(out) and not overwrite:
        raise ConfigError(f"output directory {out!r} is not empty; pass --overwrite")
    os.makedirs(out, exist_ok=True)
    return out


def _write_manifest(out: str, command: str, cfg: dict) -> None:
    manifest = {"command": command, "package": "hcplab", "version": __version__,
                "config": cfg}
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_config(path: str) -> dict:
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if "config" in cfg and "command" in cfg:  # a manifest: unwrap
        cfg = cfg["config"]
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return cfg


def _provenance_header(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True)
    return f"# hcplab {__version__} config={blob}\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(cfg: dict, out: str) -> int:
    spec = build_spec(cfg)
    schedule = build_schedule(cfg)
    window = build_window(cfg)
    n_epochs = int(_require(cfg, "epochs", int, default=2))
    n_replicas = int(_require(cfg, "replicas", int, default=1))
    seed = int(_require(cfg, "seed", int, default=0))
    cap = int(_require(cfg, "samples_per_epoch", int, default=50_000))
    pooled = replicate(spec, schedule, n_epochs, n_replicas, seed, window)
    with open(os.path.join(out, "samples.csv"), "w") as fh:
        fh.write(_provenance_header(cfg))
        fh.write("replica,epoch,z,y,first_point_survived,origin_alive\n")
        for summary in pooled:
            kept = 0
            # z-samples are grouped by replica in pooled order
            bounds = np.cumsum(summary.core_sizes)
            starts = np.concatenate(([0], bounds[:-1]))
            for r_idx in range(summary.replica.size):
                if kept >= cap:
                    break
                y = summary.y[r_idx]
                fps = int(summary.first_point_survived[r_idx])
                oa = int(summary.origin_alive[r_idx])
                rep = int(summary.replica[r_idx])
                for z in summary.z_samples[starts[r_idx]:bounds[r_idx]]:
                    if kept >= cap:
                        break
                    fh.write(f"{rep},{summary.epoch},{float(z)!r},{float(y)!r},{fps},{oa}\n")
                    kept += 1
    with open(os.path.join(out, "replicas.csv"), "w") as fh:
        fh.write(_provenance_header(cfg))
        fh.write("replica,epoch,d_n,y,first_point_survived,origin_alive,"
                 "merges_prior,n_intervals,core_size\n")
        for summary in pooled:
            for i in range(summary.replica.size):
                fh.write(f"{int(summary.replica[i])},{summary.epoch},{float(summary.d_n)!r},"
                         f"{float(summary.y[i])!r},{int(summary.first_point_survived[i])},"
                         f"{int(summary.origin_alive[i])},{int(summary.merges_prior[i])},"
                         f"{int(summary.n_intervals[i])},{int(summary.core_sizes[i])}\n")
    _write_manifest(out, "simulate", cfg)
    return 0


def _analytic_initial_measure(cfg: dict, l_max: float):
    law = build_law(_require(cfg, "initial_law", dict, required=True), "initial_law")
    if isinstance(law, ExpGeometricLaw):
        n_atoms = max(1, int(math.floor(math.log(l_max))))
        return law.atomic(n_atoms=n_atoms, l_max=l_max)
    if hasattr(law, "atomic"):
        return law.atomic(l_max)
    raise ConfigError("initial_law: analytic commands need a law with atoms "
                      "(dirac, geometric, two_point, exp_geometric)")


def _c0_view(cfg: dict, fallback, s_min: float):
    """Transform evaluator for the c0 report.

    The tail ratio at small s only reflects the true law if the truncation
    deficit is far below 1 - g(s_min), so the estimator gets a much deeper
    truncation than the epoch iteration needs.
    """
    law = build_law(_require(cfg, "initial_law", dict, required=True), "initial_law")
    if isinstance(law, ExpGeometricLaw):
        n_atoms = max(60, int(3 * math.log(1.0 / s_min)))
        return law.atomic(n_atoms=n_atoms, l_max=float("inf"))
    return fallback.normalized()


def cmd_analytic(cfg: dict, out: str, strict: bool = False) -> int:
    schedule = build_schedule(cfg)
    n_epochs = int(_require(cfg, "epochs", int, default=4))
    l_max = float(_require(cfg, "analytic.l_max", (int, float),
                           default=50.0 * schedule.d(n_epochs + 1)))
    deficit_bound = float(_require(cfg, "analytic.deficit_bound", (int, float), default=1e-6))
    mu1 = _analytic_initial_measure(cfg, l_max)
    laws, h = iterate_hcp_measures(mu1, schedule.d, n_epochs,
                                   deficit_bound=deficit_bound, strict=strict)
    header = _provenance_header(cfg)
    for n, mu in enumerate(laws, start=1):
        mu.to_csv(os.path.join(out, f"interval_law_epoch{n:02d}.csv"))
    with open(os.path.join(out, "active_mass.csv"), "w") as fh:
        fh.write(header)
        fh.write("epoch,d_n,active_mass\n")
        for n, mass in enumerate(h, start=1):
            fh.write(f"{n},{schedule.d(n)!r},{mass!r}\n")
    with open(os.path.join(out, "survival.csv"), "w") as fh:
        fh.write(header)
        fh.write("epochs_elapsed,d_next,survival_probability\n")
        if schedule.gamma is None:
            fh.write("# rates do not fix lambda_left = gamma * lambda_right: "
                     "no survival formula applies\n")
        else:
            for n in range(1, n_epochs + 1):
                p = survival_probability_exact(h, n, schedule.gamma)
                fh.write(f"{n},{schedule.d(n + 1)!r},{p!r}\n")
    # transported primitive probes from the epoch-1 law
    from .transport import deconvolve_m, u1_from_m
    probe_x = _require(cfg, "analytic.probe_x", list, default=[0.5, 1.0, 2.0, 5.0, 10.0])
    j_max = float(_require(cfg, "analytic.j_max", (int, float), default=min(l_max, 256.0)))
    z1 = laws[0].rescaled(1.0 / schedule.d(1))
    u1 = u1_from_m(deconvolve_m(z1, j_max))
    with open(os.path.join(out, "transported_primitive.csv"), "w") as fh:
        fh.write(header)
        fh.write("epoch,x,u_n\n")
        for n in range(1, n_epochs + 1):
            for x in probe_x:
                arg = schedule.d(n) * (1 + float(x)) - 1
                if arg <= j_max - 1:
                    fh.write(f"{n},{x!r},{un_transport(u1, schedule.d(n), float(x))!r}\n")
    s_min = float(_require(cfg, "analytic.c0_s_min", (int, float), default=1e-9))
    grid = default_c0_grid(
        float(_require(cfg, "analytic.c0_s_max", (int, float), default=1e-2)), s_min)
    est = c0_estimate(_c0_view(cfg, mu1, s_min), grid)
    with open(os.path.join(out, "c0_report.json"), "w") as fh:
        json.dump({"estimate": est.estimate, "converged": est.converged,
                   "s_min": float(grid.min()), "s_max": float(grid.max())},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(out, "analytic", cfg)
    return 0


def cmd_limits(cfg: dict, out: str) -> int:
    c0 = float(_require(cfg, "limits.c0", (int, float), default=1.0))
    gamma = float(_require(cfg, "limits.gamma", (int, float), default=0.0))
    params = LimitLawParams(c0=c0, gamma=gamma)
    xs = np.arange(1.0, 16.0 + 1e-9, 1.0 / 32.0)
    with open(os.path.join(out, "limit_cdf.csv"), "w") as fh:
        fh.write(_provenance_header(cfg))
        fh.write("x,z_cdf\n")
        for x, v in zip(xs, z_cdf(params, xs)):
            fh.write(f"{float(x)!r},{float(v)!r}\n")
    ss = np.concatenate(([0.0], np.geomspace(1e-3, 10.0, 100)))
    with open(os.path.join(out, "limit_transforms.csv"), "w") as fh:
        fh.write(_provenance_header(cfg))
        fh.write("s,interval_transform,first_point_transform\n")
        for s in ss:
            fh.write(f"{float(s)!r},{g_infinity(params, float(s))!r},"
                     f"{first_point_limit_transform(params, float(s))!r}\n")
    _write_manifest(out, "limits", cfg)
    return 0


def cmd_reproduce_figb(cfg: dict, out: str) -> int:
    qs = _require(cfg, "figb.q", list, default=[0.1, 0.5, 0.8])
    horizon = int(_require(cfg, "figb.horizon", int, default=14))
    x = float(_require(cfg, "figb.x", (int, float), default=10.0))
    spacing = float(_require(cfg, "figb.lattice", (int, float), default=1.0 / 16.0))
    arithmetic = bool(_require(cfg, "figb.arithmetic", bool, default=False))
    d_of = (lambda n: float(n)) if arithmetic else (lambda n: 2.0 ** (n - 1))
    j_max = d_of(horizon) * (1 + x) + 2
    with open(os.path.join(out, "transport_ratio.csv"), "w") as fh:
        fh.write(_provenance_header(cfg))
        fh.write("q,n,d_n,ratio\n")
        for q in qs:
            p = 1.0 - float(q)
            n_atoms = max(1, int(math.log(j_max)) + 1)
            law = exp_geometric_law(p, n_atoms, l_max=float("inf"))
            u1 = u1_on_lattice(law, spacing, j_max)
            for n in range(1, horizon + 1):
                d = d_of(n)
                ratio = un_transport(u1, d, x) / x
                fh.write(f"{q!r},{n},{d!r},{ratio!r}\n")
    _write_manifest(out, "reproduce-figb", cfg)
    return 0


def cmd_validate(cfg: dict, out: str) -> int:
    from .acceptance import run_all
    scale = float(_require(cfg, "validate.scale", (int, float), default=1.0))
    seed = int(_require(cfg, "seed", int, default=0))
    results = run_all(scale=scale, seed=seed, report=print)
    with open(os.path.join(out, "validation.json"), "w") as fh:
        json.dump([r.as_dict() for r in results], fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(out, "validate", cfg)
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hcplab",
        description="Hierarchical coalescence: simulator and exact analytics")
    parser.add_argument("command",
                        choices=["simulate", "analytic", "limits", "validate",
                                 "reproduce-figb"])
    parser.add_argument("--config", help="JSON config (or a manifest.json)")
    parser.add_argument("--seed", type=int, help="override config seed")
    parser.add_argument("--out", default="hcplab_out", help="output directory")
    parser.add_argument("--replicas", type=int, help="override replica count")
    parser.add_argument("--strict", action="store_true",
                        help="escalate truncation warnings to errors")
    parser.add_argument("--overwrite", action="store_true",
                        help="allow writing into a nonempty output directory")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config) if args.config else {}
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.replicas is not None:
            cfg["replicas"] = args.replicas
        out = _prepare_out(args.out, args.overwrite)
        if args.command == "simulate":
            return cmd_simulate(cfg, out)
        if args.command == "analytic":
            return cmd_analytic(cfg, out, strict=args.strict)
        if args.command == "limits":
            return cmd_limits(cfg, out)
        if args.command == "reproduce-figb":
            return cmd_reproduce_figb(cfg, out)
        if args.command == "validate":
            return cmd_validate(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
