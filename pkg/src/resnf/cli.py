"""Command-line front end over JSON problem files.

A problem file (schema version 1) declares a frequency model (a named
builder or an explicit symbol table with per-mode coordinates), a
truncation window, a field (a builder seed, an explicit term list in
canonical text form, or a reference to a previously emitted field file),
and optional task parameters.  Four commands drive the library:

- ``analyze``     resonance enumeration plus the optional Diophantine
                  lower-bound scan;
- ``normalize``   prenormalization and the quadratic iteration, with
                  artifacts written to ``--out``;
- ``verify``      invariant-set tangency and the conjugacy scaling
                  sweep against recorded artifacts;
- ``diophantine`` the small-divisor lower-bound scan alone.

Exit codes: 0 success, 1 input error, 2 model-assumption violation,
3 theorem-hypothesis violation.  Machine reports (``--json``) are
canonical JSON — sorted keys, no timestamps — so repeated runs are
byte-identical; all randomness flows from seeds recorded in the report.
Output files are written atomically (temp file plus rename).  The
``--threads`` flag is accepted for interface stability but execution is
sequential; results never depend on it.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    HypothesisViolation,
    NormalFormError,
    ProblemFileError,
)
from .fields import VectorField
from .indexing import TruncationContext, parse_mode
from .normalform import TransformLog, normalize
from .resonance import (
    FrequencyModel,
    diophantine_audit,
    enumerate_resonance,
)
from .verify import (
    FlowConfig,
    SigmaSpec,
    build_example_dim6,
    build_example_hyperbolic,
    build_example_nls,
    check_tangent_sigma,
    conjugacy_error,
    default_potential,
    dim6_frequency_model,
    hyperbolic_frequency_model,
    loglog_slope,
    nls_frequency_model,
)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_MODEL = 2
EXIT_HYPOTHESIS = 3

NORMAL_FORM_FILE = "normal_form.txt"
TRANSFORM_FILE = "transform_log.txt"
TRACE_FILE = "kam_trace.json"
REPORT_FILE = "report.json"

_MISSING = object()


# ---------------------------------------------------------------------------
# problem files
# ---------------------------------------------------------------------------


class _Section:
    """A JSON object with path-labeled access and unknown-key rejection."""

    def __init__(self, data, path: str):
        if not isinstance(data, dict):
            raise ProblemFileError("%s: expected an object" % path)
        self._data = data
        self._path = path
        self._taken: set[str] = set()

    def label(self, key: str) -> str:
        return "%s.%s" % (self._path, key)

    def take(self, key: str, default=_MISSING):
        self._taken.add(key)
        if key in self._data:
            return self._data[key]
        if default is _MISSING:
            raise ProblemFileError("%s: missing required key" % self.label(key))
        return default

    def child(self, key: str, required: bool = False) -> "_Section | None":
        if key not in self._data:
            if required:
                raise ProblemFileError("%s: missing required key" % self.label(key))
            self._taken.add(key)
            return None
        return _Section(self.take(key), self.label(key))

    def finish(self) -> None:
        unknown = sorted(set(self._data) - self._taken)
        if unknown:
            raise ProblemFileError(
                "%s: unknown key(s): %s" % (self._path, ", ".join(unknown))
            )


def _as_int(value, label: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProblemFileError("%s: expected an integer" % label)
    return value


def _as_bool(value, label: str) -> bool:
    if not isinstance(value, bool):
        raise ProblemFileError("%s: expected true or false" % label)
    return value


def _as_str(value, label: str) -> str:
    if not isinstance(value, str):
        raise ProblemFileError("%s: expected a string" % label)
    return value


def _as_rational(value, label: str) -> Fraction:
    """Exact numbers are integers or ``"p/q"`` strings; floats are
    rejected rather than silently approximated."""
    if isinstance(value, bool):
        raise ProblemFileError("%s: expected a rational, got a boolean" % label)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ProblemFileError(
                "%s: cannot parse rational %r" % (label, value)
            ) from None
    raise ProblemFileError(
        "%s: rationals must be integers or 'p/q' strings" % label
    )


def _as_number(value, label: str) -> float:
    if isinstance(value, bool):
        raise ProblemFileError("%s: expected a number, got a boolean" % label)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return float(_as_rational(value, label))
    raise ProblemFileError("%s: expected a number" % label)


@dataclass(frozen=True)
class Problem:
    """A parsed problem file plus any command-line overrides."""

    path: str
    name: str
    builder: str
    model: FrequencyModel
    ctx: TruncationContext
    field: VectorField
    seed: int | None
    diophantine: dict | None
    flow: dict


def _parse_potential(modelsec: _Section, cutoff: int):
    value = modelsec.take("potential", None)
    if value is None:
        return None
    label = modelsec.label("potential")
    if not isinstance(value, dict):
        raise ProblemFileError("%s: expected an object keyed by site" % label)
    potential = default_potential(cutoff)
    for key, raw in value.items():
        try:
            site = int(key)
        except ValueError:
            raise ProblemFileError("%s: bad site key %r" % (label, key)) from None
        if abs(site) > cutoff:
            raise ProblemFileError(
                "%s.%s: site outside the mode cutoff %d" % (label, key, cutoff)
            )
        potential[site] = _as_rational(raw, "%s.%s" % (label, key))
    return potential


def _parse_custom_model(modelsec: _Section) -> FrequencyModel:
    name = _as_str(modelsec.take("name", "custom"), modelsec.label("name"))
    symtable = modelsec.take("symbols")
    symlabel = modelsec.label("symbols")
    if not isinstance(symtable, dict) or not symtable:
        raise ProblemFileError("%s: expected a non-empty object" % symlabel)
    symbols = [
        (key, _as_rational(raw, "%s.%s" % (symlabel, key)))
        for key, raw in symtable.items()
    ]
    known = {key for key, _ in symbols}
    modemaps = modelsec.take("modes")
    modelabel = modelsec.label("modes")
    if not isinstance(modemaps, dict) or not modemaps:
        raise ProblemFileError("%s: expected a non-empty object" % modelabel)
    coords = {}
    for token, coordmap in modemaps.items():
        try:
            k = parse_mode(token)
        except NormalFormError:
            raise ProblemFileError(
                "%s: bad mode token %r (use e.g. '1+' or '-2-')"
                % (modelabel, token)
            ) from None
        if not isinstance(coordmap, dict):
            raise ProblemFileError(
                "%s.%s: expected an object mapping symbols to integer "
                "coefficients" % (modelabel, token)
            )
        vec = {}
        for sym, raw in coordmap.items():
            entry = "%s.%s.%s" % (modelabel, token, sym)
            if sym not in known:
                raise ProblemFileError("%s: undeclared symbol" % entry)
            if isinstance(raw, list):
                if len(raw) != 2:
                    raise ProblemFileError(
                        "%s: complex coefficients are [re, im] pairs" % entry
                    )
                vec[sym] = (_as_int(raw[0], entry), _as_int(raw[1], entry))
            else:
                vec[sym] = _as_int(raw, entry)
        coords[k] = vec
    return FrequencyModel(name, symbols, coords)


def _refit(w: VectorField, ctx: TruncationContext) -> VectorField:
    """Rebuild a builder-produced field over the problem's context (the
    mode set matches; theta or the arithmetic mode may differ)."""
    if w.ctx == ctx:
        return w
    if ctx.exact:
        return VectorField(ctx, w.terms())
    return VectorField(ctx, ((k, q, complex(c)) for k, q, c in w.terms()))


def load_problem(
    path: str,
    *,
    arithmetic: str | None = None,
    seed: int | None = None,
) -> Problem:
    """Parse and validate a problem file, applying CLI overrides."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemFileError("cannot read %s: %s" % (path, exc)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError("%s: %s" % (path, exc)) from exc

    root = _Section(data, "problem")
    version = _as_int(
        root.take("schema_version"), root.label("schema_version")
    )
    if version != SCHEMA_VERSION:
        raise ProblemFileError(
            "problem.schema_version: expected %d, got %d"
            % (SCHEMA_VERSION, version)
        )
    name = _as_str(root.take("name", ""), root.label("name"))

    trunc = root.child("truncation", required=True)
    mode_cutoff = _as_int(trunc.take("mode_cutoff"), trunc.label("mode_cutoff"))
    degree_cutoff = _as_int(
        trunc.take("degree_cutoff"), trunc.label("degree_cutoff")
    )
    theta = _as_number(trunc.take("theta", 0.5), trunc.label("theta"))
    momentum_raw = trunc.take("momentum", None)
    momentum = (
        None
        if momentum_raw is None
        else _as_bool(momentum_raw, trunc.label("momentum"))
    )
    arith = _as_str(
        trunc.take("arithmetic", "exact"), trunc.label("arithmetic")
    )
    if arith not in ("exact", "float"):
        raise ProblemFileError(
            "%s: must be 'exact' or 'float'" % trunc.label("arithmetic")
        )
    trunc.finish()
    if arithmetic is not None:
        arith = arithmetic

    modelsec = root.child("model", required=True)
    builder_raw = modelsec.take("builder", None)
    builder = (
        None
        if builder_raw is None
        else _as_str(builder_raw, modelsec.label("builder"))
    )

    zeta1 = zeta2 = None
    potential = None
    elliptic: tuple[int, ...] = ()
    if builder == "dim6":
        zeta1 = _as_rational(
            modelsec.take("zeta1", "1393/985"), modelsec.label("zeta1")
        )
        zeta2 = _as_rational(
            modelsec.take("zeta2", "1351/780"), modelsec.label("zeta2")
        )
        modelsec.finish()
        if momentum is True:
            raise ProblemFileError(
                "problem.truncation.momentum: the dim6 model is a finite "
                "problem without momentum bookkeeping"
            )
        momentum = False
        if mode_cutoff != 6:
            raise ProblemFileError(
                "problem.truncation.mode_cutoff: the dim6 model has exactly "
                "6 modes"
            )
        model = dim6_frequency_model(zeta1, zeta2)
    elif builder == "nls":
        potential = _parse_potential(modelsec, mode_cutoff)
        modelsec.finish()
        if momentum is False:
            raise ProblemFileError(
                "problem.truncation.momentum: the nls model requires "
                "momentum bookkeeping"
            )
        momentum = True
        model = nls_frequency_model(mode_cutoff, potential)
    elif builder == "hyperbolic":
        potential = _parse_potential(modelsec, mode_cutoff)
        sites_raw = modelsec.take("elliptic_sites", [])
        siteslabel = modelsec.label("elliptic_sites")
        if not isinstance(sites_raw, list):
            raise ProblemFileError("%s: expected an array" % siteslabel)
        elliptic = tuple(_as_int(v, siteslabel) for v in sites_raw)
        modelsec.finish()
        if momentum is False:
            raise ProblemFileError(
                "problem.truncation.momentum: the hyperbolic model requires "
                "momentum bookkeeping"
            )
        momentum = True
        model = hyperbolic_frequency_model(mode_cutoff, potential, elliptic)
    elif builder is None:
        model = _parse_custom_model(modelsec)
        modelsec.finish()
        momentum = False if momentum is None else momentum
        builder = "custom"
    else:
        raise ProblemFileError(
            "problem.model.builder: unknown builder %r (expected dim6, nls "
            "or hyperbolic)" % builder
        )

    try:
        ctx = TruncationContext(
            mode_cutoff,
            degree_cutoff,
            momentum_enabled=momentum,
            theta=theta,
            arithmetic=arith,
        )
    except NormalFormError as exc:
        raise ProblemFileError("problem.truncation: %s" % exc) from exc

    fieldsec = root.child("field")
    terms_lines = None
    field_seed: int | None = None
    p_param: int | None = None
    if fieldsec is None:
        if builder not in ("dim6", "hyperbolic"):
            raise ProblemFileError(
                "problem.field: missing section (the %s model has no "
                "default field)" % builder
            )
        field_seed = 0
    else:
        terms_raw = fieldsec.take("terms", None)
        file_raw = fieldsec.take("terms_file", None)
        seed_raw = fieldsec.take("seed", None)
        p_raw = fieldsec.take("p", None)
        fieldsec.finish()
        given = sum(v is not None for v in (terms_raw, file_raw, seed_raw, p_raw))
        if given > 1:
            raise ProblemFileError(
                "problem.field: give exactly one of terms, terms_file, "
                "seed or p"
            )
        if terms_raw is not None:
            label = fieldsec.label("terms")
            if not isinstance(terms_raw, list):
                raise ProblemFileError("%s: expected an array of term lines" % label)
            terms_lines = [_as_str(line, label) for line in terms_raw]
        elif file_raw is not None:
            ref = _as_str(file_raw, fieldsec.label("terms_file"))
            full = os.path.join(os.path.dirname(os.path.abspath(path)), ref)
            try:
                with open(full, "r", encoding="utf-8") as fh:
                    terms_lines = fh.read().splitlines()
            except OSError as exc:
                raise ProblemFileError(
                    "%s: cannot read %s: %s" % (fieldsec.label("terms_file"), ref, exc)
                ) from exc
        elif p_raw is not None:
            if builder != "nls":
                raise ProblemFileError(
                    "problem.field.p: only the nls builder takes the "
                    "nonlinearity degree"
                )
            p_param = _as_int(p_raw, fieldsec.label("p"))
        elif seed_raw is not None:
            if builder not in ("dim6", "hyperbolic"):
                raise ProblemFileError(
                    "problem.field.seed: only the dim6 and hyperbolic "
                    "builders generate seeded fields"
                )
            field_seed = _as_int(seed_raw, fieldsec.label("seed"))
        else:
            if builder not in ("dim6", "hyperbolic"):
                raise ProblemFileError(
                    "problem.field: the %s model needs terms or builder "
                    "parameters" % builder
                )
            field_seed = 0
    if builder == "nls" and terms_lines is None and p_param is None:
        raise ProblemFileError(
            "problem.field: the nls builder needs the nonlinearity degree p"
        )

    if seed is not None:
        if field_seed is None:
            raise ProblemFileError(
                "--seed: this problem does not build its field from a seed"
            )
        field_seed = seed

    if terms_lines is not None:
        try:
            w = VectorField.from_lines(ctx, terms_lines)
        except NormalFormError as exc:
            raise ProblemFileError("problem.field.terms: %s" % exc) from exc
        field_seed = None
    elif builder == "dim6":
        w, model = build_example_dim6(
            zeta1, zeta2, seed=field_seed, degree=degree_cutoff
        )
        w = _refit(w, ctx)
    elif builder == "nls":
        try:
            w, model = build_example_nls(
                p_param, potential, cutoff=mode_cutoff, degree=degree_cutoff
            )
        except ValueError as exc:
            raise ProblemFileError("problem.field.p: %s" % exc) from exc
        w = _refit(w, ctx)
    else:
        w, model = build_example_hyperbolic(
            mode_cutoff,
            potential,
            seed=field_seed,
            degree=degree_cutoff,
            elliptic_sites=elliptic,
        )
        w = _refit(w, ctx)

    dio = None
    diosec = root.child("diophantine")
    if diosec is not None:
        dio = {
            "tau": _as_number(diosec.take("tau"), diosec.label("tau")),
            "degree_bound": _as_int(
                diosec.take("degree_bound"), diosec.label("degree_bound")
            ),
            "fast_path": _as_bool(
                diosec.take("fast_path", True), diosec.label("fast_path")
            ),
        }
        diosec.finish()

    flow = {
        "steps": 256,
        "horizon": 1.0,
        "blowup": 10.0,
        "rho": [0.05, 0.025, 0.0125],
        "seed": 0,
    }
    flowsec = root.child("flow")
    if flowsec is not None:
        flow["steps"] = _as_int(
            flowsec.take("steps", 256), flowsec.label("steps")
        )
        flow["horizon"] = _as_number(
            flowsec.take("horizon", 1.0), flowsec.label("horizon")
        )
        flow["blowup"] = _as_number(
            flowsec.take("blowup", 10.0), flowsec.label("blowup")
        )
        rho_raw = flowsec.take("rho", None)
        if rho_raw is not None:
            label = flowsec.label("rho")
            if not isinstance(rho_raw, list) or not rho_raw:
                raise ProblemFileError("%s: expected a non-empty array" % label)
            flow["rho"] = [
                _as_number(v, "%s[%d]" % (label, i))
                for i, v in enumerate(rho_raw)
            ]
        flow["seed"] = _as_int(flowsec.take("seed", 0), flowsec.label("seed"))
        flowsec.finish()
    if flow["steps"] < 1:
        raise ProblemFileError("problem.flow.steps: must be >= 1")
    if flow["horizon"] < 0:
        raise ProblemFileError("problem.flow.horizon: must be >= 0")
    if flow["blowup"] <= 0 or any(r <= 0 for r in flow["rho"]):
        raise ProblemFileError(
            "problem.flow: blowup and every rho must be positive"
        )

    root.finish()
    return Problem(
        path=path,
        name=name,
        builder=builder,
        model=model,
        ctx=ctx,
        field=w,
        seed=field_seed,
        diophantine=dio,
        flow=flow,
    )


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _emit_json(report: dict, path: str | None) -> None:
    if path is not None:
        _write_atomic(
            path, json.dumps(report, sort_keys=True, indent=2) + "\n"
        )


def _problem_block(problem: Problem) -> dict:
    ctx = problem.ctx
    return {
        "name": problem.name,
        "builder": problem.builder,
        "model": problem.model.name,
        "seed": problem.seed,
        "mode_cutoff": ctx.mode_cutoff,
        "degree_cutoff": ctx.degree_cutoff,
        "theta": ctx.theta,
        "momentum": ctx.momentum_enabled,
        "arithmetic": ctx.arithmetic,
        "field_terms": problem.field.term_count(),
    }


def _resonance_block(module) -> dict:
    summary = module.summary()
    summary["delta_equals_m"] = not summary["p_generators"]
    return summary


def _print_resonance(res: dict) -> None:
    print(
        "generators: %s" % (", ".join(res["q_generators"]) or "(none)")
    )
    if res["p_generators"]:
        for direction, gens in sorted(res["p_generators"].items()):
            print("translates d/dx_%s: %s" % (direction, ", ".join(gens)))
    else:
        print("translates: none (the translate set equals the module)")
    print(
        "M = %d, M1 = %d; minimal order %d (crude bound %d); "
        "%d module elements, %d resonant pairs"
        % (
            res["M"],
            res["M1"],
            res["m_star_minimal"],
            res["m_star_bound"],
            res["module_count"],
            res["resonant_pair_count"],
        )
    )


def _print_diophantine(rep: dict) -> None:
    gamma = rep["gamma_max"]
    print(
        "diophantine: tau = %g, degree <= %d: %s over %d combinations "
        "(fast path %s, %d hits)"
        % (
            rep["tau"],
            rep["degree_bound"],
            "unconstrained" if rep["unconstrained"] else "gamma_max = %.6g at %s" % (gamma, rep["worst_p"]),
            rep["enumerated_count"],
            "on" if rep["fast_path_enabled"] else "off",
            rep["fast_path_hits"],
        )
    )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_analyze(problem: Problem, json_path: str | None) -> int:
    module = enumerate_resonance(problem.ctx, problem.model)
    report = {
        "command": "analyze",
        "schema_version": SCHEMA_VERSION,
        "problem": _problem_block(problem),
        "resonance": _resonance_block(module),
    }
    if problem.diophantine is not None:
        dio = problem.diophantine
        report["diophantine"] = diophantine_audit(
            problem.model,
            problem.ctx,
            dio["tau"],
            dio["degree_bound"],
            use_fast_path=dio["fast_path"],
        ).as_dict()
    print(
        "model %s | %d modes, window degree %d | %s arithmetic"
        % (
            problem.model.name,
            len(problem.ctx.modes()),
            problem.ctx.degree_cutoff,
            problem.ctx.arithmetic,
        )
    )
    _print_resonance(report["resonance"])
    if "diophantine" in report:
        _print_diophantine(report["diophantine"])
    _emit_json(report, json_path)
    return EXIT_OK


def cmd_normalize(
    problem: Problem, out_dir: str | None, json_path: str | None
) -> int:
    module = enumerate_resonance(problem.ctx, problem.model)
    dec, log, trace = normalize(problem.field, problem.model, module)
    stages = [stage for stage, _ in log]
    result = dec.assemble()
    report = {
        "command": "normalize",
        "schema_version": SCHEMA_VERSION,
        "problem": _problem_block(problem),
        "resonance": _resonance_block(module),
        "mstar": dec.mstar,
        "generators": {
            "prenormalize": stages.count("prenormalize"),
            "kam": stages.count("kam"),
        },
        "kam_steps": len(trace.records),
        "orders": [[r.ord_x, r.ord_x_next] for r in trace.records],
        "residual_zero": dec.is_normal,
        "convergence_ok": trace.convergence_ok,
        "normal_form": {
            "terms": result.term_count(),
            "z_terms": dec.z.term_count(),
            "n_terms": dec.n.term_count(),
            "x_terms": dec.x.term_count(),
        },
    }
    print(
        "cutoff order %d; generators: %d prenormalize + %d kam"
        % (
            dec.mstar,
            report["generators"]["prenormalize"],
            report["generators"]["kam"],
        )
    )
    noun = "step" if report["kam_steps"] == 1 else "steps"
    print(
        "completed %d %s; residual zero: %s"
        % (report["kam_steps"], noun, report["residual_zero"])
    )
    if report["orders"]:
        ladder = [report["orders"][0][0]] + [o[1] for o in report["orders"]]
        print(
            "free-part order ladder: %s"
            % " -> ".join("eliminated" if o is None else str(o) for o in ladder)
        )
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        _write_atomic(
            os.path.join(out_dir, NORMAL_FORM_FILE),
            "\n".join(result.to_lines()) + "\n",
        )
        _write_atomic(
            os.path.join(out_dir, TRANSFORM_FILE),
            "\n".join(log.to_lines()) + "\n",
        )
        _write_atomic(
            os.path.join(out_dir, TRACE_FILE),
            json.dumps(trace.as_dict(), sort_keys=True, indent=2) + "\n",
        )
        _write_atomic(
            os.path.join(out_dir, REPORT_FILE),
            json.dumps(report, sort_keys=True, indent=2) + "\n",
        )
        print("wrote %s" % out_dir)
    _emit_json(report, json_path)
    return EXIT_OK


def cmd_verify(
    problem: Problem,
    transform_dir: str,
    json_path: str | None,
    csv_path: str | None,
) -> int:
    ctx = problem.ctx
    nf_path = os.path.join(transform_dir, NORMAL_FORM_FILE)
    log_path = os.path.join(transform_dir, TRANSFORM_FILE)
    for artifact in (nf_path, log_path):
        if not os.path.exists(artifact):
            raise ProblemFileError(
                "missing normalization artifact %s (run normalize --out "
                "first)" % artifact
            )
    try:
        with open(nf_path, "r", encoding="utf-8") as fh:
            normal_form = VectorField.from_lines(ctx, fh.read().splitlines())
        with open(log_path, "r", encoding="utf-8") as fh:
            log = TransformLog.from_lines(ctx, fh.read().splitlines())
    except (OSError, NormalFormError) as exc:
        raise ProblemFileError(
            "cannot load artifacts from %s: %s" % (transform_dir, exc)
        ) from exc

    module = enumerate_resonance(ctx, problem.model)
    tangency = check_tangent_sigma(normal_form, module)

    flow = problem.flow
    config = FlowConfig(steps=flow["steps"], blowup=flow["blowup"])
    spec = SigmaSpec.from_module(module)
    rng = random.Random(flow["seed"])
    unit = [
        rng.uniform(0.5, 1.0) + 1j * rng.uniform(0.5, 1.0)
        for _ in range(len(ctx.modes()))
    ]
    rows = []
    for rho in flow["rho"]:
        raw = [rho * u for u in unit]
        on = spec.restrict(raw, ctx)
        rows.append(
            {
                "rho": rho,
                "on_sigma_error": conjugacy_error(
                    problem.field, log, problem.model, on, flow["horizon"], config
                ),
                "off_sigma_error": conjugacy_error(
                    problem.field, log, problem.model, raw, flow["horizon"], config
                ),
            }
        )

    def slope(key: str) -> float | None:
        errors = [row[key] for row in rows]
        if len(rows) < 2 or min(errors) <= 0.0:
            return None
        return loglog_slope([row["rho"] for row in rows], errors)

    report = {
        "command": "verify",
        "schema_version": SCHEMA_VERSION,
        "problem": _problem_block(problem),
        "tangency": {
            "ok": tangency.ok,
            "offender_count": tangency.offenders.term_count(),
            "offenders": tangency.offenders.to_lines()[:10],
        },
        "conjugacy": {
            "horizon": flow["horizon"],
            "steps": flow["steps"],
            "seed": flow["seed"],
            "rows": rows,
            "on_sigma_slope": slope("on_sigma_error"),
            "off_sigma_slope": slope("off_sigma_error"),
        },
    }
    print(
        "tangency: %s (%d offending terms)"
        % ("ok" if tangency.ok else "VIOLATED", report["tangency"]["offender_count"])
    )
    for row in rows:
        print(
            "rho %-10.6g on-sigma %.6e   off-sigma %.6e"
            % (row["rho"], row["on_sigma_error"], row["off_sigma_error"])
        )
    on_slope = report["conjugacy"]["on_sigma_slope"]
    off_slope = report["conjugacy"]["off_sigma_slope"]
    if on_slope is not None and off_slope is not None:
        print(
            "scaling slopes: on-sigma %.3f, off-sigma %.3f (window degree %d)"
            % (on_slope, off_slope, ctx.degree_cutoff)
        )
    if csv_path is not None:
        lines = ["rho,on_sigma_error,off_sigma_error"]
        lines.extend(
            "%r,%r,%r"
            % (row["rho"], row["on_sigma_error"], row["off_sigma_error"])
            for row in rows
        )
        _write_atomic(csv_path, "\n".join(lines) + "\n")
    _emit_json(report, json_path)
    return EXIT_OK


def cmd_diophantine(
    problem: Problem,
    tau: float | None,
    degree: int | None,
    json_path: str | None,
) -> int:
    dio = problem.diophantine or {}
    if tau is None:
        tau = dio.get("tau")
    if degree is None:
        degree = dio.get("degree_bound")
    if tau is None or degree is None:
        raise ProblemFileError(
            "diophantine parameters missing: give --tau and --degree or a "
            "diophantine section in the problem file"
        )
    rep = diophantine_audit(
        problem.model,
        problem.ctx,
        tau,
        degree,
        use_fast_path=dio.get("fast_path", True),
    )
    report = {
        "command": "diophantine",
        "schema_version": SCHEMA_VERSION,
        "problem": _problem_block(problem),
        "diophantine": rep.as_dict(),
    }
    _print_diophantine(report["diophantine"])
    _emit_json(report, json_path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resnf",
        description="Resonant normal forms: analyze, normalize and verify "
        "truncated polynomial vector fields described by JSON problem files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("problem", help="path to a JSON problem file")
        mode = p.add_mutually_exclusive_group()
        mode.add_argument(
            "--exact",
            action="store_const",
            const="exact",
            dest="arithmetic",
            help="force exact rational arithmetic",
        )
        mode.add_argument(
            "--float",
            action="store_const",
            const="float",
            dest="arithmetic",
            help="force floating-point arithmetic",
        )
        p.add_argument(
            "--seed",
            type=int,
            default=None,
            help="override the field builder seed",
        )
        p.add_argument(
            "--threads",
            type=int,
            default=1,
            help="accepted for interface stability; execution is sequential "
            "and results never depend on it",
        )
        p.add_argument(
            "--json",
            metavar="PATH",
            default=None,
            help="write the machine-readable report to PATH",
        )

    analyze = sub.add_parser(
        "analyze", help="enumerate the resonance module and audit divisors"
    )
    common(analyze)

    norm = sub.add_parser(
        "normalize", help="run prenormalization and the quadratic iteration"
    )
    common(norm)
    norm.add_argument(
        "--out",
        metavar="DIR",
        default=None,
        help="write normal_form.txt, transform_log.txt, kam_trace.json and "
        "report.json to DIR",
    )

    verify = sub.add_parser(
        "verify",
        help="check invariant-set tangency and conjugacy scaling against "
        "recorded artifacts",
    )
    common(verify)
    verify.add_argument(
        "--transform",
        metavar="DIR",
        required=True,
        help="directory produced by normalize --out",
    )
    verify.add_argument(
        "--csv",
        metavar="PATH",
        default=None,
        help="write the conjugacy scaling table as CSV",
    )

    dio = sub.add_parser(
        "diophantine", help="run the small-divisor lower-bound scan"
    )
    common(dio)
    dio.add_argument("--tau", type=float, default=None, help="Diophantine exponent")
    dio.add_argument(
        "--degree", type=int, default=None, help="combination degree bound"
    )
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ProblemFileError("--threads: must be >= 1")
        problem = load_problem(
            args.problem, arithmetic=args.arithmetic, seed=args.seed
        )
        if args.command == "analyze":
            return cmd_analyze(problem, args.json)
        if args.command == "normalize":
            return cmd_normalize(problem, args.out, args.json)
        if args.command == "verify":
            return cmd_verify(problem, args.transform, args.json, args.csv)
        return cmd_diophantine(problem, args.tau, args.degree, args.json)
    except ProblemFileError as exc:
        print("input error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    except HypothesisViolation as exc:
        print("hypothesis violation: %s" % exc, file=sys.stderr)
        return EXIT_HYPOTHESIS
    except NormalFormError as exc:
        print("model error: %s" % exc, file=sys.stderr)
        return EXIT_MODEL
    except OSError as exc:
        print("input error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
