"""Batch experiment runner: config parsing, dispatch, CSV artifacts.

Config files are line-based ``key = value`` entries under ``[section]``
headers; unknown sections or keys are rejected with the offending line
number, defaults are filled in at parse time, and every output file starts
with a ``#`` provenance block echoing the canonical config.  Exit codes:
0 success, 1 asserted condition or bound violated, 2 config error, 3 solver
failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import __version__
from .attractor import (
    export_pullback_csv,
    pullback_run,
    verify_exponential_bound,
    verify_polynomial_bound,
)
from .drift import (
    DriftConstants,
    DriftSpec,
    certify,
    constants_from_reports,
    sine_series_sampler,
)
from .errors import (
    AlignmentError,
    AttractorForgeError,
    ConfigError,
    RangeError,
    SolverFailureError,
)
from .fields import Field, SpatialGrid, TripleSpec, sine_mode
from .flow import SolverConfig, export_trajectory_csv, solve_transformed
from .noise import NoiseSpec, gen_path, save_noise_path

_KINDS = ("certify", "simulate", "pullback", "rates", "noise-gen")

# section -> key -> (type, default); type in {int, float, str, floats, optfloat}
_SCHEMA = {
    "experiment": {
        "kind": ("str", None),
        "seed": ("int", 0),
        "out": ("str", "out"),
    },
    "grid": {
        "n": ("int", 100),
        "length": ("float", 1.0),
    },
    "drift": {
        "family": ("str", None),
        "p": ("float", 2.0),
        "r": ("float", 2.0),
        "p_tilde": ("float", 2.0),
        "eta": ("float", 0.0),
        "eta1": ("float", 0.0),
        "delta": ("optfloat", None),
        "k": ("optfloat", None),
        "c": ("optfloat", None),
        "lambda": ("optfloat", None),
    },
    "noise": {
        "kind": ("str", "zero"),
        "modes": ("int", 8),
        "weights": ("floats", ()),
        "hurst": ("float", 0.5),
        "t0": ("float", 0.0),
        "t1": ("float", 1.0),
        "dt": ("float", 0.01),
        "jump_rate": ("float", 0.0),
        "jump_mode": ("int", 1),
        "jump_law": ("str", "const,0.0"),
        "drift_modes": ("floats", ()),
    },
    "solver": {
        "dt": ("float", 0.01),
        "newton_tol": ("float", 1e-11),
        "newton_max_iters": ("int", 40),
        "step_halving_max": ("int", 8),
        "damping": ("float", 1.0),
    },
    "certify": {
        "condition": ("str", None),
        "trials": ("int", 1000),
    },
    "simulate": {
        "s": ("optfloat", None),
        "t": ("optfloat", None),
        "x_mode": ("int", 1),
        "x_amplitude": ("float", 1.0),
    },
    "pullback": {
        "s_list": ("floats", (-1.0, -2.0, -5.0, -10.0, -20.0, -40.0)),
        "eval_time": ("float", 0.0),
        "bundle": ("int", 10),
        "bundle_norm": ("float", 1.0),
    },
    "rates": {
        "s1": ("float", 0.0),
        "s2": ("float", 0.0),
        "sample_times": ("floats", (0.1, 1.0, 10.0)),
        "slack": ("float", 0.1),
        "eta_margin_frac": ("float", 0.5),
        "x_mode": ("int", 1),
        "x_amplitude": ("float", 1.0),
        "y_mode": ("int", 1),
        "y_amplitude": ("float", 0.0),
    },
}

_REQUIRED_SECTIONS = {
    "certify": ("drift", "certify"),
    "simulate": ("drift", "noise", "solver"),
    "pullback": ("drift", "noise", "solver", "pullback"),
    "rates": ("drift", "noise", "solver", "rates"),
    "noise-gen": ("noise",),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Canonical, fully defaulted configuration (hashable by content)."""

    items: tuple  # tuple of (section, tuple of (key, value))

    @property
    def sections(self) -> dict:
        return {sec: dict(kvs) for sec, kvs in self.items}

    def get(self, section: str, key: str):
        return self.sections[section][key]

    @property
    def kind(self) -> str:
        return self.get("experiment", "kind")

    @property
    def seed(self) -> int:
        return self.get("experiment", "seed")


def _convert(raw: str, typ: str, lineno: int):
    try:
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
        if typ == "optfloat":
            return None if raw.lower() == "none" else float(raw)
        if typ == "floats":
            if raw.strip() == "":
                return ()
            return tuple(float(tok) for tok in raw.split(","))
        return raw
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: malformed {typ} value {raw!r}") from exc


def parse_config(text: str) -> ExperimentConfig:
    """Parse and canonicalize a config; rejects unknown/duplicate keys."""
    values: dict[str, dict] = {}
    section = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            values.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, _, raw = line.partition("=")
        key = key.strip().lower()
        raw = raw.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
        if key in values[section]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{section}]")
        values[section][key] = _convert(raw, _SCHEMA[section][key][0], lineno)

    if "experiment" not in values or "kind" not in values["experiment"]:
        raise ConfigError("missing [experiment] kind")
    kind = values["experiment"]["kind"]
    if kind not in _KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    for sec in _REQUIRED_SECTIONS[kind]:
        if sec not in values:
            raise ConfigError(f"experiment kind {kind!r} requires a [{sec}] section")
        for key, (_, default) in _SCHEMA[sec].items():
            if default is None and key not in values[sec] and (sec, key) in (
                ("drift", "family"),
                ("certify", "condition"),
            ):
                raise ConfigError(f"[{sec}] is missing required key {key!r}")

    # fill defaults for every schema section so serialization is canonical
    items = []
    for sec in _SCHEMA:
        kvs = []
        for key, (typ, default) in _SCHEMA[sec].items():
            if sec in values and key in values[sec]:
                kvs.append((key, values[sec][key]))
            else:
                kvs.append((key, default))
        items.append((sec, tuple(kvs)))
    cfg = ExperimentConfig(tuple(items))
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    kind = cfg.kind
    if kind in ("simulate", "pullback", "rates") or (
        kind == "certify" and cfg.get("drift", "family") is None
    ):
        if cfg.get("drift", "family") is None:
            raise ConfigError("[drift] is missing required key 'family'")
    if kind == "certify" and cfg.get("certify", "condition") is None:
        raise ConfigError("[certify] is missing required key 'condition'")


def _fmt_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ",".join(format(v, ".17g") for v in value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    out = []
    for sec, kvs in cfg.items:
        out.append(f"[{sec}]")
        for key, value in kvs:
            if value is None:  # unset optional: omitted, re-parses to None
                continue
            out.append(f"{key} = {_fmt_value(value)}")
        out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# config -> domain objects
# ---------------------------------------------------------------------------


def _build_grid(cfg) -> SpatialGrid:
    return SpatialGrid(cfg.get("grid", "n"), cfg.get("grid", "length"))


def _build_drift(cfg) -> DriftSpec:
    d = cfg.sections["drift"]
    family = d["family"].upper()
    if family not in ("POINTWISE", "RDE", "PME", "PLE"):
        raise ConfigError(f"unknown drift family {d['family']!r}")
    return DriftSpec(
        family,
        p=d["p"],
        r=d["r"],
        p_tilde=d["p_tilde"],
        eta=d["eta"],
        eta1=d["eta1"],
        delta=d["delta"],
        K=d["k"],
        C=d["c"],
        lambda_=d["lambda"],
    )


def _build_noise_spec(cfg, grid: SpatialGrid) -> NoiseSpec:
    n = cfg.sections["noise"]
    kind = n["kind"].lower()
    weights = n["weights"] if n["weights"] else None
    if kind == "zero":
        return NoiseSpec.zero()
    if kind == "qwiener":
        return NoiseSpec.q_wiener(weights, modes=n["modes"])
    if kind == "fbm":
        return NoiseSpec.fbm(n["hurst"], weights, modes=n["modes"])
    if kind == "levy":
        coeffs = n["drift_modes"]
        drift_values = np.zeros(grid.n_interior)
        for k, c in enumerate(coeffs, start=1):
            drift_values += c * sine_mode(grid, k).values
        law_toks = n["jump_law"].split(",")
        law = (law_toks[0], *(float(tok) for tok in law_toks[1:]))
        return NoiseSpec.levy(
            Field(drift_values, grid),
            wiener_weights=weights or (),
            jump_rate=n["jump_rate"],
            jump_mode=n["jump_mode"],
            jump_law=law,
        )
    raise ConfigError(f"unknown noise kind {n['kind']!r}")


def _build_solver(cfg) -> SolverConfig:
    s = cfg.sections["solver"]
    return SolverConfig(
        dt=s["dt"],
        newton_tol=s["newton_tol"],
        newton_max_iters=s["newton_max_iters"],
        step_halving_max=s["step_halving_max"],
        damping=s["damping"],
    )


def thread_cap() -> int:
    """Worker cap from ATTRACTOR_FORGE_THREADS (0 or unset = auto)."""
    raw = os.environ.get("ATTRACTOR_FORGE_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        return 1
    if cap <= 0:
        return min(8, os.cpu_count() or 1)
    return cap


def _provenance(cfg: ExperimentConfig) -> list[str]:
    lines = [f"attractor-forge {__version__}", f"seed = {cfg.seed}"]
    lines.extend(serialize_config(cfg).splitlines())
    return lines


def _atomic_write(path: str, writer) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as stream:
            writer(stream)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _certified_constants(drift, triple, grid, seed, trials=400) -> DriftConstants:
    sampler = sine_series_sampler(grid)
    h3 = certify(drift, triple, "H3", sampler, trials=trials, seed=seed)
    h4 = certify(drift, triple, "H4", sampler, trials=max(40, trials // 10), seed=seed + 1)
    h2p = None
    if drift.strongly_monotone:
        h2p = certify(drift, triple, "H2'", sampler, trials=trials, seed=seed + 2)
    return constants_from_reports(drift, h3, h4, h2p)


# ---------------------------------------------------------------------------
# experiment runners
# ---------------------------------------------------------------------------


def run(cfg: ExperimentConfig, out_dir: str | None = None) -> int:
    """Execute one experiment; returns the process exit status."""
    out = out_dir or cfg.get("experiment", "out")
    try:
        if cfg.kind == "certify":
            return _run_certify(cfg, out)
        if cfg.kind == "simulate":
            return _run_simulate(cfg, out)
        if cfg.kind == "pullback":
            return _run_pullback(cfg, out)
        if cfg.kind == "rates":
            return _run_rates(cfg, out)
        return _run_noise_gen(cfg, out)
    except (ConfigError, AlignmentError, RangeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SolverFailureError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


def _run_certify(cfg, out) -> int:
    grid = _build_grid(cfg)
    drift = _build_drift(cfg)
    triple = drift.triple()
    condition = cfg.get("certify", "condition")
    trials = cfg.get("certify", "trials")
    sampler = sine_series_sampler(grid)
    report = certify(drift, triple, condition, sampler, trials=trials, seed=cfg.seed)

    def writer(stream):
        for line in _provenance(cfg):
            stream.write(f"# {line}\n")
        stream.write("condition,trials,worst_margin,tolerance,satisfied\n")
        stream.write(
            f"{report.condition},{report.trials},{report.worst_margin:.17g},"
            f"{report.tolerance:.17g},{int(report.satisfied)}\n"
        )
        stream.write("constant,value\n")
        for key in sorted(report.estimated_constants):
            stream.write(f"{key},{report.estimated_constants[key]:.17g}\n")

    _atomic_write(os.path.join(out, "certify.csv"), writer)
    print(f"{report.condition}: worst_margin={report.worst_margin:.3e} "
          f"satisfied={report.satisfied}", file=sys.stderr)
    return 0 if report.satisfied else 1


def _gen_noise(cfg, grid):
    spec = _build_noise_spec(cfg, grid)
    n = cfg.sections["noise"]
    return gen_path(spec, grid, n["t0"], n["t1"], n["dt"], seed=cfg.seed)


def _run_simulate(cfg, out) -> int:
    grid = _build_grid(cfg)
    drift = _build_drift(cfg)
    triple = drift.triple()
    noise = _gen_noise(cfg, grid)
    solver = _build_solver(cfg)
    sim = cfg.sections["simulate"]
    s = sim["s"] if sim["s"] is not None else noise.t_start
    t = sim["t"] if sim["t"] is not None else noise.t_end
    x = Field(sim["x_amplitude"] * sine_mode(grid, sim["x_mode"]).values, grid)
    traj = solve_transformed(drift, triple, noise, x, s, t, solver)

    def writer(stream):
        for line in _provenance(cfg):
            stream.write(f"# {line}\n")
        export_trajectory_csv(traj, stream)

    _atomic_write(os.path.join(out, "trajectory.csv"), writer)
    return 0


def _bundle(grid, count, norm_cap, seed, triple):
    from .fields import norm_H_values

    sampler = sine_series_sampler(grid)
    fields = []
    for i in range(count):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 77, i])))
        f = sampler(rng)
        nh = float(norm_H_values(f.values, grid, triple))
        if nh > norm_cap and nh > 0:
            f = Field(f.values * (norm_cap / nh), grid)
        fields.append(f)
    return fields


def _run_pullback(cfg, out) -> int:
    grid = _build_grid(cfg)
    drift = _build_drift(cfg)
    triple = drift.triple()
    noise = _gen_noise(cfg, grid)
    solver = _build_solver(cfg)
    pb = cfg.sections["pullback"]
    bundle = _bundle(grid, pb["bundle"], pb["bundle_norm"], cfg.seed, triple)
    constants = _certified_constants(drift, triple, grid, cfg.seed) if drift.strongly_monotone else None
    result = pullback_run(
        drift,
        triple,
        noise,
        bundle,
        pb["s_list"],
        pb["eval_time"],
        solver,
        constants=constants,
        max_workers=thread_cap(),
    )

    def writer(stream):
        export_pullback_csv(result, stream, header_lines=_provenance(cfg))

    _atomic_write(os.path.join(out, "pullback.csv"), writer)
    violations = result.bound_violations or 0
    return 0 if violations == 0 else 1


def _run_rates(cfg, out) -> int:
    grid = _build_grid(cfg)
    drift = _build_drift(cfg)
    triple = drift.triple()
    noise = _gen_noise(cfg, grid)
    solver = _build_solver(cfg)
    rt = cfg.sections["rates"]
    x = Field(rt["x_amplitude"] * sine_mode(grid, rt["x_mode"]).values, grid)
    y = Field(rt["y_amplitude"] * sine_mode(grid, rt["y_mode"]).values, grid)
    constants = _certified_constants(drift, triple, grid, cfg.seed)
    rows = []
    ok = True
    if drift.beta > 2.0:
        lam = drift.lambda_ if drift.lambda_ is not None else constants.lambda_
        report = verify_polynomial_bound(
            drift, triple, noise, x, y, rt["s1"], rt["s2"], rt["sample_times"],
            solver, lam=lam, beta=drift.beta, slack=rt["slack"],
        )
        ok = report.ok
        rows = list(zip(report.sample_times, report.distances_sq, report.bounds, report.ratios))
        summary = [f"kind = polynomial", f"lambda = {lam:.17g}", f"beta = {drift.beta:.17g}",
                   f"max_ratio = {report.max_ratio:.17g}", f"ok = {int(ok)}"]
    else:
        lam = constants.lambda_ or 0.0
        eta = rt["eta_margin_frac"] * lam
        report = verify_exponential_bound(
            drift, triple, noise, x, y, eta, rt["s1"], rt["s2"], rt["sample_times"],
            solver, constants,
        )
        ok = report.satisfied
        rows = [(u, float("nan"), float("nan"), float("nan")) for u in rt["sample_times"]]
        summary = [f"kind = exponential", f"lambda_hat = {report.lambda_hat:.17g}",
                   f"k_eta = {report.k_eta:.17g}", f"ok = {int(ok)}"]

    def writer(stream):
        for line in _provenance(cfg):
            stream.write(f"# {line}\n")
        for line in summary:
            stream.write(f"# {line}\n")
        stream.write("t,dist_H_sq,bound_value,ratio\n")
        for t, d, b, q in rows:
            stream.write(f"{t:.17g},{d:.17g},{b:.17g},{q:.17g}\n")

    _atomic_write(os.path.join(out, "rates.csv"), writer)
    return 0 if ok else 1


def _run_noise_gen(cfg, out) -> int:
    grid = _build_grid(cfg)
    noise = _gen_noise(cfg, grid)

    def writer(stream):
        for line in _provenance(cfg):
            stream.write(f"# {line}\n")
        save_noise_path(noise, stream)

    _atomic_write(os.path.join(out, "noise.txt"), writer)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="attractor-forge",
        description="pullback attractor experiments for monotone SPDEs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in _KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default=None, help="override output directory")
    args = parser.parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if cfg.kind != args.command:
        print(
            f"config error: config kind {cfg.kind!r} does not match "
            f"subcommand {args.command!r}",
            file=sys.stderr,
        )
        return 2
    if args.seed is not None:
        sections = cfg.sections
        sections["experiment"]["seed"] = args.seed
        cfg = ExperimentConfig(
            tuple((sec, tuple(kvs.items())) for sec, kvs in sections.items())
        )
    return run(cfg, out_dir=args.out)


if __name__ == "__main__":
    sys.exit(main())
