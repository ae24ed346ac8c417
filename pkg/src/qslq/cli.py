"""Batch front end.

``qslq evolve <config.json>`` propagates a model and writes per-node measure
values next to the closed forms, ``qslq verify`` evaluates the requested
speed-limit bounds and returns machine-readable verdicts, ``qslq sweep`` runs
verify over a list of parameter overrides.  A run is a single JSON document;
--t-max/--steps/--tolerance override the document.  Output is byte
deterministic for a fixed config.

Exit codes: 0 ok; 2 a bound row violates T_QSL <= T (1 + tolerance);
3 saturation was requested and missed on a gamma_t >= 0 interval;
64 config parse error; 65 numerical failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import bounds, dynamics, measures, models, opalg

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_SATURATION = 3
EXIT_CONFIG = 64
EXIT_NUMERICAL = 65

SATURATION_RTOL = 1e-6
MODEL_KINDS = ("unitary", "markov_dephasing", "pure_dephasing",
               "coherence_generation", "custom")

NAMED_OPERATORS = {
    "sigma_x": opalg.SIGMA_X,
    "sigma_y": opalg.SIGMA_Y,
    "sigma_z": opalg.SIGMA_Z,
    "identity": opalg.IDENTITY_2,
}


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


def _parse_matrix(entry, name: str) -> np.ndarray:
    """Flattened row-major [re, im] pairs -> complex square matrix."""
    if isinstance(entry, str):
        if entry not in NAMED_OPERATORS:
            raise ConfigError(f"{name}: unknown named operator {entry!r}")
        return NAMED_OPERATORS[entry].copy()
    try:
        pairs = [(float(re), float(im)) for re, im in entry]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: expected a list of [re, im] pairs") from exc
    d = math.isqrt(len(pairs))
    if d * d != len(pairs):
        raise ConfigError(f"{name}: {len(pairs)} entries is not a square matrix")
    flat = np.array([complex(re, im) for re, im in pairs])
    return flat.reshape(d, d)


def _parse_schedule(entry) -> dynamics.RateSchedule:
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ConfigError("schedule must be an object with a 'kind'")
    try:
        if entry["kind"] == "constant":
            return dynamics.RateSchedule.constant(float(entry["gamma"]))
        if entry["kind"] == "ohmic":
            return dynamics.RateSchedule.ohmic(float(entry["s"]), float(entry["eta"]))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad schedule: {exc}") from exc
    raise ConfigError(f"unknown schedule kind {entry['kind']!r}")


@dataclass
class RunConfig:
    model: str
    parameters: dict
    grid: dynamics.TimeGrid
    bound_kinds: tuple
    tolerance: float
    loose_prefactor: bool
    require_saturation: bool
    out_format: str
    out_path: str | None
    raw: dict

    @property
    def sha256(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def load_config(path: str, overrides: dict) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")

    raw = dict(raw)
    grid_doc = dict(raw.get("grid", {}))
    for key in ("t_max", "steps"):
        if overrides.get(key) is not None:
            grid_doc[key] = overrides[key]
    if overrides.get("tolerance") is not None:
        raw["tolerance"] = overrides["tolerance"]
    raw["grid"] = grid_doc

    model = raw.get("model")
    if model not in MODEL_KINDS:
        raise ConfigError(f"model must be one of {MODEL_KINDS}, got {model!r}")
    try:
        t_max = float(grid_doc["t_max"])
        steps = int(grid_doc["steps"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"grid needs numeric t_max and steps: {exc}") from exc
    if steps < 8:
        raise ConfigError(f"steps must be >= 8, got {steps}")
    try:
        grid = dynamics.TimeGrid(t_max=t_max, steps=steps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    tolerance = float(raw.get("tolerance", bounds.DEFAULT_TOLERANCE))
    if tolerance <= -1.0:
        raise ConfigError(f"tolerance must be > -1, got {tolerance}")

    bound_kinds = tuple(raw.get("bounds", ["quantumness"]))
    for kind in bound_kinds:
        if kind not in bounds.BOUND_KINDS:
            raise ConfigError(f"unknown bound kind {kind!r}")

    output = raw.get("output", {})
    out_format = output.get("format", "csv")
    if out_format not in ("csv", "json"):
        raise ConfigError(f"output format must be csv or json, got {out_format!r}")

    params = raw.get("parameters", {})
    if not isinstance(params, dict):
        raise ConfigError("parameters must be an object")

    return RunConfig(model=model, parameters=params, grid=grid,
                     bound_kinds=bound_kinds, tolerance=tolerance,
                     loose_prefactor=bool(raw.get("loose_prefactor", False)),
                     require_saturation=bool(raw.get("require_saturation", False)),
                     out_format=out_format, out_path=output.get("path"), raw=raw)


@dataclass
class ModelSetup:
    generator: dynamics.Generator
    initial: np.ndarray
    basis: measures.Basis
    reference: np.ndarray | None
    skew_state: np.ndarray | None
    closed_forms: object  # callable t -> dict of closed-form columns, or None


def _require(params: dict, key: str, model: str):
    if key not in params:
        raise ConfigError(f"model {model!r} needs parameter {key!r}")
    return params[key]


def build_setup(cfg: RunConfig) -> ModelSetup:
    p = cfg.parameters
    basis = measures.Basis.computational(2)
    if "basis" in p:
        try:
            basis = measures.Basis(_parse_matrix(p["basis"], "basis"))
        except opalg.OperatorError as exc:
            raise ConfigError(str(exc)) from exc
    reference = None
    if "reference_observable" in p:
        reference = _parse_matrix(p["reference_observable"], "reference_observable")
    skew_state = None
    if "skew_state" in p:
        if p["skew_state"] == "maximally_mixed":
            skew_state = opalg.IDENTITY_2 / 2
        else:
            skew_state = _parse_matrix(p["skew_state"], "skew_state")

    try:
        if cfg.model == "unitary":
            if "theta" in p:
                model = models.UnitaryQubitModel.from_angle(float(p["theta"]))
            else:
                model = models.UnitaryQubitModel(tuple(_require(p, "n_hat", cfg.model)),
                                                 tuple(_require(p, "m_hat", cfg.model)))

            def closed(t):
                cf = models.unitary_closed_forms(model, t)
                return {"q_closed": cf.quantumness, "denom_closed": cf.denom_norm}

            return ModelSetup(model.generator(), model.initial_observable(), basis,
                              reference, skew_state, closed)

        if cfg.model == "markov_dephasing":
            gamma = float(_require(p, "gamma", cfg.model))
            gen = models.markov_generator(gamma)

            def closed(t):
                cf = models.markov_dephasing_closed_forms(gamma, t)
                return {"q_closed": cf.quantumness, "denom_closed": cf.denom_norm}

            return ModelSetup(gen, models.markov_initial_observable(), basis,
                              reference, skew_state, closed)

        if cfg.model == "pure_dephasing":
            s = float(_require(p, "s", cfg.model))
            eta = float(p.get("eta", 1.0))
            bloch = p.get("bloch", (1.0, 0.0, 1.0))
            model = models.PureDephasingModel.preset(s, eta, bloch)
            if model.degenerate:
                print("warning: degenerate Bloch vector, quantumness vanishes",
                      file=sys.stderr)

            def closed(t):
                cf = models.pure_dephasing_closed_forms(model, t)
                return {"gamma_t": cf.gamma_t, "g_t": cf.g_t,
                        "q_closed": cf.quantumness, "denom_closed": cf.denom_norm}

            return ModelSetup(model.generator(), model.initial_observable(), basis,
                              reference, skew_state, closed)

        if cfg.model == "coherence_generation":
            gamma = float(_require(p, "gamma", cfg.model))
            gen = models.coherence_generation_generator(gamma)

            def closed(t):
                cf = models.coherence_generation_closed_forms(gamma, t)
                return {"coherence_l1_closed": cf.c_l1}

            return ModelSetup(gen, models.coherence_generation_initial_state(),
                              basis, reference, skew_state, closed)

        # custom
        ham = _parse_matrix(_require(p, "hamiltonian", cfg.model), "hamiltonian")
        jump = _parse_matrix(p["jump"], "jump") if "jump" in p else opalg.SIGMA_Z.copy()
        schedule = _parse_schedule(_require(p, "schedule", cfg.model))
        if "initial_state" in p:
            initial = _parse_matrix(p["initial_state"], "initial_state")
            opalg.assert_density(initial)
            picture = dynamics.SCHRODINGER
        else:
            initial = _parse_matrix(_require(p, "initial_observable", cfg.model),
                                    "initial_observable")
            opalg.assert_hermitian(initial)
            picture = dynamics.HEISENBERG
        gen = dynamics.Generator(hamiltonian=ham, jump=jump, schedule=schedule,
                                 picture=picture)
        return ModelSetup(gen, initial, basis, reference, skew_state, None)
    except (opalg.OperatorError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _fmt(x) -> str:
    return repr(float(x))


def _write_lines(path, lines):
    data = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(data)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(data)


# ---------------------------------------------------------------------------
# evolve
# ---------------------------------------------------------------------------

def _evolve_rows(cfg: RunConfig, setup: ModelSetup):
    traj = dynamics.propagate(setup.generator, setup.initial, cfg.grid)
    is_state = setup.generator.picture == dynamics.SCHRODINGER
    rows = []
    for k, t in enumerate(traj.times):
        row = {"t": float(t)}
        if is_state:
            row["coherence_skew"] = measures.coherence(traj.states[k], setup.basis)
            row["coherence_l1"] = measures.l1_coherence(traj.states[k], setup.basis)
        else:
            row["q_numeric"] = measures.quantumness(setup.initial, traj.states[k])
            row["denom_numeric"] = opalg.hs_norm(opalg.commutator(
                setup.initial, dynamics.apply_generator(setup.generator,
                                                        traj.states[k], float(t))))
        if setup.closed_forms is not None:
            row.update(setup.closed_forms(float(t)))
            if "q_closed" in row:
                row["q_abs_dev"] = abs(row["q_numeric"] - row["q_closed"])
                row["denom_abs_dev"] = abs(row["denom_numeric"] - row["denom_closed"])
            if "coherence_l1_closed" in row:
                row["coherence_l1_abs_dev"] = abs(row["coherence_l1"]
                                                  - row["coherence_l1_closed"])
        rows.append(row)
    return rows, traj.warnings


_COLUMN_ORDER = ["t", "gamma_t", "g_t", "q_numeric", "q_closed", "q_abs_dev",
                 "denom_numeric", "denom_closed", "denom_abs_dev",
                 "coherence_skew", "coherence_l1", "coherence_l1_closed",
                 "coherence_l1_abs_dev"]


def cmd_evolve(cfg: RunConfig, out_path: str | None) -> int:
    setup = build_setup(cfg)
    rows, warnings = _evolve_rows(cfg, setup)
    columns = [c for c in _COLUMN_ORDER if c in rows[0]]
    lines = [
        "# qslq evolve",
        f"# model: {cfg.model}",
        f"# config-sha256: {cfg.sha256}",
    ]
    lines += [f"# warning: {w}" for w in warnings]
    lines.append(f"# columns: {','.join(columns)}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    _write_lines(out_path, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _evaluate_bounds(cfg: RunConfig, setup: ModelSetup):
    gen = setup.generator
    traj = dynamics.propagate(gen, setup.initial, cfg.grid)
    reports = []
    for kind in cfg.bound_kinds:
        kwargs = {"tolerance": cfg.tolerance, "loose_prefactor": cfg.loose_prefactor}
        if kind == bounds.COHERENCE:
            if gen.picture != dynamics.SCHRODINGER:
                raise ConfigError("coherence bound needs a state model "
                                  "(coherence_generation or custom initial_state)")
            reports.append(bounds.bound_coherence(traj, gen, setup.basis,
                                                  cfg.grid, **kwargs))
            continue
        if gen.picture != dynamics.HEISENBERG:
            raise ConfigError(f"bound {kind!r} needs an observable model")
        if kind == bounds.QUANTUMNESS:
            reports.append(bounds.bound_quantumness(setup.initial, traj, gen,
                                                    cfg.grid, **kwargs))
        elif kind == bounds.QUANTUMNESS_REFERENCE:
            ref = setup.reference if setup.reference is not None else opalg.SIGMA_Z
            reports.append(bounds.bound_quantumness_reference(ref, traj, gen,
                                                              cfg.grid, **kwargs))
        else:
            rho = setup.skew_state if setup.skew_state is not None \
                else opalg.IDENTITY_2 / 2
            reports.append(bounds.bound_skew_information(rho, traj, gen,
                                                         cfg.grid, **kwargs))
    return reports


def _saturation_summary(cfg: RunConfig, setup: ModelSetup, report: bounds.BoundReport):
    """Max |ratio - 1| over endpoints whose [0, T] keeps gamma_t >= 0."""
    rates = np.asarray(setup.generator.schedule.rate(cfg.grid.times))
    nonneg = np.cumprod(rates >= -1e-15).astype(bool)
    worst = 0.0
    checked = 0
    for k, row in enumerate(report.rows, start=1):
        if not nonneg[k]:
            break
        checked += 1
        worst = max(worst, abs(row.ratio - 1.0))
    return {"rows_checked": checked, "max_abs_ratio_minus_1": worst,
            "within": bool(worst <= SATURATION_RTOL)}


def _report_to_dict(report: bounds.BoundReport, saturation=None) -> dict:
    doc = {
        "bound_kind": report.bound_kind,
        "tolerance": report.tolerance,
        "all_valid": report.all_valid,
        "loose_prefactor": report.loose_prefactor,
        "warnings": list(report.warnings),
        "rows": [
            {"t": r.t, "measure_value": r.measure_value, "t_qsl": r.t_qsl,
             "ratio": r.ratio, "flag": r.flag}
            for r in report.rows
        ],
    }
    if report.rate_check is not None:
        doc["rate_check"] = {"holds": report.rate_check.holds,
                             "max_excess": report.rate_check.max_excess,
                             "worst_t": report.rate_check.worst_t}
    if saturation is not None:
        doc["saturation"] = saturation
    return doc


def _verify_document(cfg: RunConfig):
    setup = build_setup(cfg)
    reports = _evaluate_bounds(cfg, setup)
    code = EXIT_OK
    docs = []
    for report in reports:
        saturation = None
        if cfg.require_saturation:
            saturation = _saturation_summary(cfg, setup, report)
            if not saturation["within"]:
                code = max(code, EXIT_SATURATION)
        if not report.all_valid:
            code = EXIT_VIOLATION
        if report.rate_check is not None and not report.rate_check.holds:
            code = EXIT_VIOLATION
        docs.append(_report_to_dict(report, saturation))
    return {"config_sha256": cfg.sha256, "reports": docs}, code


def cmd_verify(cfg: RunConfig, out_path: str | None) -> int:
    doc, code = _verify_document(cfg)
    _write_lines(out_path, [json.dumps(doc, indent=1)])
    return code


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _apply_override(cfg: RunConfig, key: str, value) -> RunConfig:
    raw = json.loads(json.dumps(cfg.raw))
    if key in ("t_max", "steps"):
        raw.setdefault("grid", {})[key] = value
    elif key == "tolerance":
        raw["tolerance"] = value
    else:
        raw.setdefault("parameters", {})[key] = value
    grid = dynamics.TimeGrid(float(raw["grid"]["t_max"]), int(raw["grid"]["steps"]))
    return RunConfig(model=cfg.model, parameters=raw.get("parameters", {}),
                     grid=grid, bound_kinds=cfg.bound_kinds,
                     tolerance=float(raw.get("tolerance", cfg.tolerance)),
                     loose_prefactor=cfg.loose_prefactor,
                     require_saturation=cfg.require_saturation,
                     out_format=cfg.out_format, out_path=cfg.out_path, raw=raw)


def _sweep_workers() -> int:
    env = os.environ.get("QSLQ_THREADS", "0")
    try:
        n = int(env)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def cmd_sweep(cfg: RunConfig, sweep_key: str, values: list, out_path: str | None) -> int:
    sections = []
    configs = [_apply_override(cfg, sweep_key, v) for v in values]
    workers = min(_sweep_workers(), len(configs))
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_verify_document, configs))
    else:
        results = [_verify_document(c) for c in configs]
    code = EXIT_OK
    for value, (doc, section_code) in zip(values, results):
        sections.append({"override": {sweep_key: value}, **doc})
        code = max(code, section_code) if EXIT_VIOLATION not in (code, section_code) \
            else EXIT_VIOLATION
    payload = {"config_sha256": cfg.sha256, "sweep_key": sweep_key,
               "sections": sections}
    _write_lines(out_path, [json.dumps(payload, indent=1)])
    return code


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _parse_sweep_values(spec: str):
    if "=" not in spec:
        raise ConfigError("--set expects key=v1,v2,...")
    key, _, rest = spec.partition("=")
    if not key or not rest:
        raise ConfigError("--set expects key=v1,v2,...")
    values = []
    for tok in rest.split(","):
        try:
            values.append(json.loads(tok))
        except json.JSONDecodeError:
            values.append(tok)
    return key, values


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="qslq",
                                     description="quantum-speed-limit batch runner")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("evolve", "verify", "sweep"):
        sp = sub.add_parser(name)
        sp.add_argument("config")
        sp.add_argument("--out", default=None)
        sp.add_argument("--t-max", type=float, default=None, dest="t_max")
        sp.add_argument("--steps", type=int, default=None)
        sp.add_argument("--tolerance", type=float, default=None)
        if name == "sweep":
            sp.add_argument("--set", dest="sweep", action="append", required=True,
                            help="key=v1,v2,... (exactly one occurrence)")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, {"t_max": args.t_max, "steps": args.steps,
                                        "tolerance": args.tolerance})
        out_path = args.out if args.out is not None else cfg.out_path
        if args.command == "evolve":
            return cmd_evolve(cfg, out_path)
        if args.command == "verify":
            return cmd_verify(cfg, out_path)
        if len(args.sweep) != 1:
            raise ConfigError("sweep takes exactly one --set key=v1,v2,...")
        key, values = _parse_sweep_values(args.sweep[0])
        if not values:
            raise ConfigError("sweep needs a nonempty value list")
        return cmd_sweep(cfg, key, values, out_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except bounds.SingularPairError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except opalg.OperatorError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
