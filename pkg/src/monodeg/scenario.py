"""JSON scenario files: strict validation, loading, and execution.

A scenario pins down one reproducible computation: the space pair, an
operator from the gallery, a domain, a section schedule, and a mode
(``degree``, ``solve``, ``homotopy``, or ``theorem``).  Validation is
strict — unknown keys are rejected — and reports *every* violation at
once rather than stopping at the first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from numbers import Real
from typing import Any

import numpy as np

from . import __version__
from .backend import backend_name
from .degree import DegreeReport, Homotopy, HomotopyReport, degree_limit, extract_zero, homotopy_check, inclusion_residual
from .errors import NotStabilized, ParseError, SchemaError
from .galerkin import Schedule
from .harness import run_browder_surjectivity, run_defigueiredo, run_range_Nr
from .regions import BallDomain, BoxDomain
from .setval import convex_path, gallery, gallery_names
from .space import SpacePair, WeightRule, make_space

MODES = ("degree", "solve", "homotopy", "theorem")
THEOREMS = ("defigueiredo", "range_nr", "browder")

_TOP_KEYS = {
    "schema", "label", "seed", "mode", "space", "operator", "domain",
    "schedule", "homotopy", "theorem", "solve", "engine",
}


@dataclass(frozen=True)
class Scenario:
    label: str
    seed: int
    mode: str
    space: dict
    operator: dict
    domain: dict | None
    schedule: dict
    homotopy: dict | None
    theorem: dict | None
    solve: dict = field(default_factory=dict)
    engine: dict = field(default_factory=dict)


def _is_num(v, *, positive=False, minimum=None) -> bool:
    if isinstance(v, bool) or not isinstance(v, Real):
        return False
    x = float(v)
    if not np.isfinite(x):
        return False
    if positive and x <= 0:
        return False
    if minimum is not None and x < minimum:
        return False
    return True


def _is_vec(v) -> bool:
    return (
        isinstance(v, list)
        and len(v) >= 1
        and all(_is_num(c) for c in v)
    )


def _check_space(doc, bad) -> None:
    sp = doc.get("space")
    if not isinstance(sp, dict):
        bad.append("space: required object with p_x, p_y")
        return
    extra = set(sp) - {"p_x", "p_y", "weights"}
    if extra:
        bad.append(f"space: unknown keys {sorted(extra)}")
    for key in ("p_x", "p_y"):
        v = sp.get(key)
        if not _is_num(v) or not (1.0 < float(v) < float("inf")):
            bad.append(f"space.{key}: required finite number > 1")
    w = sp.get("weights")
    if w is None:
        return
    if not isinstance(w, dict) or not isinstance(w.get("kind"), str):
        bad.append("space.weights: object with string 'kind' required")
        return
    kind = w["kind"]
    if kind == "ones":
        if set(w) - {"kind"}:
            bad.append("space.weights: 'ones' takes no extra keys")
    elif kind == "constant":
        if set(w) - {"kind", "value"} or not _is_num(w.get("value"), positive=True):
            bad.append("space.weights: 'constant' needs positive 'value'")
    elif kind == "harmonic":
        if set(w) - {"kind"}:
            bad.append("space.weights: 'harmonic' takes no extra keys")
    elif kind == "list":
        vals = w.get("values")
        if set(w) - {"kind", "values"} or not isinstance(vals, list) or not vals \
                or not all(_is_num(v, positive=True) for v in vals):
            bad.append("space.weights: 'list' needs positive 'values'")
    else:
        bad.append(f"space.weights.kind: unknown kind {kind!r}")


def _check_operator(spec, bad, where="operator") -> None:
    if not isinstance(spec, dict):
        bad.append(f"{where}: required object with 'name'")
        return
    extra = set(spec) - {"name", "params"}
    if extra:
        bad.append(f"{where}: unknown keys {sorted(extra)}")
    name = spec.get("name")
    if not isinstance(name, str):
        bad.append(f"{where}.name: required string")
    elif name not in gallery_names():
        bad.append(f"{where}.name: unknown operator {name!r} "
                   f"(known: {', '.join(gallery_names())})")
    params = spec.get("params", {})
    if not isinstance(params, dict):
        bad.append(f"{where}.params: must be an object")


def _check_domain(doc, bad, required) -> None:
    dom = doc.get("domain")
    if dom is None:
        if required:
            bad.append("domain: required for this mode")
        return
    if not isinstance(dom, dict) or not isinstance(dom.get("shape"), str):
        bad.append("domain: object with string 'shape' required")
        return
    shape = dom["shape"]
    if shape == "ball":
        extra = set(dom) - {"shape", "center", "radius"}
        if extra:
            bad.append(f"domain: unknown keys {sorted(extra)}")
        if "center" in dom and not _is_vec(dom["center"]):
            bad.append("domain.center: list of finite numbers required")
        if not _is_num(dom.get("radius"), positive=True):
            bad.append("domain.radius: positive number required")
    elif shape == "box":
        extra = set(dom) - {"shape", "lo", "hi"}
        if extra:
            bad.append(f"domain: unknown keys {sorted(extra)}")
        lo, hi = dom.get("lo"), dom.get("hi")
        if not _is_vec(lo) or not _is_vec(hi) or len(lo) != len(hi):
            bad.append("domain.lo/hi: equal-length lists of numbers required")
        elif not all(float(a) < float(b) for a, b in zip(lo, hi)):
            bad.append("domain.lo/hi: lo must be strictly below hi")
    else:
        bad.append(f"domain.shape: unknown shape {shape!r}")


def _check_schedule(doc, bad) -> None:
    sch = doc.get("schedule")
    if sch is None:
        return
    if not isinstance(sch, dict):
        bad.append("schedule: must be an object")
        return
    extra = set(sch) - {"n_list", "eps_reg", "eps_list"}
    if extra:
        bad.append(f"schedule: unknown keys {sorted(extra)}")
    ns = sch.get("n_list")
    if not isinstance(ns, list) or not ns or not all(
        isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in ns
    ) or any(b <= a for a, b in zip(ns, ns[1:])):
        bad.append("schedule.n_list: strictly increasing positive integers required")
    er = sch.get("eps_reg", "auto")
    if er != "auto" and not _is_num(er, positive=True):
        bad.append("schedule.eps_reg: 'auto' or positive number required")
    el = sch.get("eps_list")
    if el is not None:
        if not isinstance(el, list) or not all(_is_num(e, positive=True) for e in el) \
                or (isinstance(ns, list) and len(el) != len(ns)):
            bad.append("schedule.eps_list: positive numbers, one per section, required")


def _check_homotopy(doc, bad, required) -> None:
    hom = doc.get("homotopy")
    if hom is None:
        if required:
            bad.append("homotopy: required for mode 'homotopy'")
        return
    if not required:
        bad.append("homotopy: only allowed for mode 'homotopy'")
        return
    if not isinstance(hom, dict):
        bad.append("homotopy: must be an object")
        return
    extra = set(hom) - {"target", "t_samples"}
    if extra:
        bad.append(f"homotopy: unknown keys {sorted(extra)}")
    _check_operator(hom.get("target"), bad, where="homotopy.target")
    ts = hom.get("t_samples")
    if ts is not None:
        if not isinstance(ts, list) or len(ts) < 2 or not all(
            _is_num(t) and 0.0 <= float(t) <= 1.0 for t in ts
        ) or float(ts[0]) != 0.0 or float(ts[-1]) != 1.0 or any(
            float(b) <= float(a) for a, b in zip(ts, ts[1:])
        ):
            bad.append("homotopy.t_samples: increasing values from 0 to 1 required")


_THEOREM_KEYS = {
    "defigueiredo": {"name", "radius", "lam_grid", "tol"},
    "range_nr": {"name", "radius", "cap", "collar", "targets", "tol"},
    "browder": {"name", "targets", "r0", "theta", "tol"},
}


def _check_theorem(doc, bad, required) -> None:
    thm = doc.get("theorem")
    if thm is None:
        if required:
            bad.append("theorem: required for mode 'theorem'")
        return
    if not required:
        bad.append("theorem: only allowed for mode 'theorem'")
        return
    if not isinstance(thm, dict):
        bad.append("theorem: must be an object")
        return
    name = thm.get("name")
    if name not in THEOREMS:
        bad.append(f"theorem.name: one of {THEOREMS} required")
        return
    extra = set(thm) - _THEOREM_KEYS[name]
    if extra:
        bad.append(f"theorem: unknown keys {sorted(extra)} for {name!r}")
    for key in ("radius", "cap", "collar", "r0", "theta", "tol"):
        if key in thm and key in _THEOREM_KEYS[name] and not _is_num(
            thm[key], positive=True
        ):
            bad.append(f"theorem.{key}: positive number required")
    if name == "defigueiredo" and "lam_grid" in thm:
        lg = thm["lam_grid"]
        if not isinstance(lg, list) or not lg or not all(
            _is_num(v, positive=True) for v in lg
        ):
            bad.append("theorem.lam_grid: positive numbers required")
    if name in ("range_nr", "browder"):
        tg = thm.get("targets")
        if not isinstance(tg, list) or not tg or not all(_is_vec(t) for t in tg):
            bad.append("theorem.targets: list of coefficient vectors required")
    if name == "range_nr" and not _is_num(thm.get("cap"), positive=True):
        bad.append("theorem.cap: positive number required")


def validate_scenario(doc: Any) -> Scenario:
    """Check a decoded scenario document; raise :class:`SchemaError`
    listing every violation, or return the normalized scenario."""
    bad: list[str] = []
    if not isinstance(doc, dict):
        raise SchemaError(["document: top level must be a JSON object"])
    extra = set(doc) - _TOP_KEYS
    if extra:
        bad.append(f"document: unknown keys {sorted(extra)}")
    if doc.get("schema") != 1:
        bad.append("schema: must be the integer 1")
    if not isinstance(doc.get("label"), str) or not doc.get("label"):
        bad.append("label: non-empty string required")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        bad.append("seed: non-negative integer required")
    mode = doc.get("mode")
    if mode not in MODES:
        bad.append(f"mode: one of {MODES} required")
        mode = "degree"
    _check_space(doc, bad)
    _check_operator(doc.get("operator"), bad)
    _check_domain(doc, bad, required=(mode != "theorem"))
    _check_schedule(doc, bad)
    _check_homotopy(doc, bad, required=(mode == "homotopy"))
    _check_theorem(doc, bad, required=(mode == "theorem"))
    solve = doc.get("solve", {})
    if not isinstance(solve, dict) or set(solve) - {"tol"}:
        bad.append("solve: object with optional 'tol' required")
    elif "tol" in solve and not _is_num(solve["tol"], positive=True):
        bad.append("solve.tol: positive number required")
    engine = doc.get("engine", {})
    if not isinstance(engine, dict) or set(engine) - {"per_axis"}:
        bad.append("engine: object with optional 'per_axis' required")
    elif "per_axis" in engine and (
        not isinstance(engine["per_axis"], int)
        or isinstance(engine["per_axis"], bool)
        or engine["per_axis"] < 2
    ):
        bad.append("engine.per_axis: integer >= 2 required")
    if bad:
        raise SchemaError(bad)
    return Scenario(
        label=doc["label"],
        seed=int(seed),
        mode=str(mode),
        space=dict(doc["space"]),
        operator=dict(doc["operator"]),
        domain=dict(doc["domain"]) if doc.get("domain") is not None else None,
        schedule=dict(doc.get("schedule") or {}),
        homotopy=dict(doc["homotopy"]) if doc.get("homotopy") is not None else None,
        theorem=dict(doc["theorem"]) if doc.get("theorem") is not None else None,
        solve=dict(solve),
        engine=dict(engine),
    )


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc
    return validate_scenario(doc)


def emit_scenario(scn: Scenario) -> dict:
    """Render a scenario back to its document form.  For every valid
    document, ``validate_scenario(emit_scenario(s)) == s``."""
    doc: dict = {
        "label": scn.label,
        "mode": scn.mode,
        "operator": scn.operator,
        "schema": 1,
        "seed": scn.seed,
        "space": scn.space,
    }
    if scn.domain is not None:
        doc["domain"] = scn.domain
    if scn.schedule:
        doc["schedule"] = scn.schedule
    if scn.homotopy is not None:
        doc["homotopy"] = scn.homotopy
    if scn.theorem is not None:
        doc["theorem"] = scn.theorem
    if scn.solve:
        doc["solve"] = scn.solve
    if scn.engine:
        doc["engine"] = scn.engine
    return doc


def build_space(scn: Scenario) -> SpacePair:
    w = scn.space.get("weights") or {"kind": "ones"}
    kind = w["kind"]
    if kind == "constant":
        rule = WeightRule("constant", value=float(w["value"]))
    elif kind == "list":
        rule = WeightRule("list", values=tuple(map(float, w["values"])))
    else:
        rule = WeightRule(kind)
    return make_space(float(scn.space["p_x"]), float(scn.space["p_y"]), rule)


def build_operator(scn: Scenario, space: SpacePair, spec=None):
    spec = scn.operator if spec is None else spec
    return gallery(spec["name"], space, dict(spec.get("params") or {}))


def build_domain(scn: Scenario, space: SpacePair):
    """Domain of the scenario; a ball is measured in the source norm."""
    dom = scn.domain
    if dom["shape"] == "ball":
        center = tuple(map(float, dom.get("center", [0.0])))
        return BallDomain(center, float(dom["radius"]), space.p_y)
    return BoxDomain(tuple(map(float, dom["lo"])), tuple(map(float, dom["hi"])))


def build_schedule(scn: Scenario) -> Schedule:
    sch = scn.schedule
    return Schedule(
        tuple(sch.get("n_list", (1, 2, 3, 4))),
        sch.get("eps_reg", "auto"),
        tuple(sch["eps_list"]) if sch.get("eps_list") else None,
    )


def _degree_dict(rep: DegreeReport) -> dict:
    return {
        "value": rep.value,
        "stabilized": bool(rep.stabilized),
        "stabilized_at": rep.stabilized_at,
        "eps_reg": rep.eps_reg,
        "eps_source": rep.eps_source,
        "entries": [
            {
                "n": e.n,
                "eps_n": e.eps_n,
                "degree": e.degree,
                "margin": e.margin,
                "error": e.error,
            }
            for e in rep.entries
        ],
    }


def _homotopy_dict(rep: HomotopyReport) -> dict:
    return {
        "value": rep.value,
        "passed": bool(rep.passed),
        "eps_reg": rep.eps_reg,
        "ts": list(rep.ts),
        "margins": list(rep.margins),
        "degrees": [r.value for r in rep.reports],
        "trace": [
            {"t": t, "sections": _degree_dict(r)["entries"]}
            for t, r in zip(rep.ts, rep.reports)
        ],
    }


def stabilization_rows(report: dict) -> list[tuple]:
    """Flatten a report into ``(n, eps_n, degree, boundary_margin)`` rows."""
    rows = []
    if "degree" in report:
        for e in report["degree"]["entries"]:
            rows.append((e["n"], e["eps_n"], e["degree"], e["margin"]))
    elif "homotopy" in report:
        for block in report["homotopy"]["trace"]:
            for e in block["sections"]:
                rows.append((e["n"], e["eps_n"], e["degree"], e["margin"]))
    return rows


def run_scenario(scn: Scenario) -> dict:
    """Execute a validated scenario and return a JSON-ready report.

    Mathematical failures raise the named error with the partial report
    attached as ``exc.report`` so callers can still emit diagnostics.
    """
    space = build_space(scn)
    per_axis = scn.engine.get("per_axis")
    out: dict = {
        "backend": backend_name(),
        "label": scn.label,
        "mode": scn.mode,
        "scenario": emit_scenario(scn),
        "seed": scn.seed,
        "version": __version__,
    }
    if scn.mode in ("degree", "solve"):
        T = build_operator(scn, space)
        domain = build_domain(scn, space)
        schedule = build_schedule(scn)
        rep = degree_limit(T, domain, schedule, per_axis=per_axis)
        out["degree"] = _degree_dict(rep)
        out["value"] = rep.value
        if not rep.stabilized:
            exc = NotStabilized(
                "degree did not stabilize over the schedule; "
                "see the stabilization entries in the report"
            )
            exc.report = out
            raise exc
        if scn.mode == "solve":
            tol = float(scn.solve.get("tol", 1e-6))
            zero = extract_zero(T, domain, rep, tol=tol)
            out["solve"] = {
                "n": zero.n,
                "residual": float(
                    inclusion_residual(T, zero.array(), zero.n)
                ),
                "tol": tol,
                "zero": [float(c) for c in zero.coeffs],
            }
    elif scn.mode == "homotopy":
        T0 = build_operator(scn, space)
        T1 = build_operator(scn, space, spec=scn.homotopy["target"])
        ts = scn.homotopy.get("t_samples")
        path = convex_path(T0, T1)
        hom = Homotopy(path, tuple(map(float, ts))) if ts else Homotopy(path)
        rep = homotopy_check(
            hom, build_domain(scn, space), build_schedule(scn), per_axis=per_axis
        )
        out["homotopy"] = _homotopy_dict(rep)
        out["value"] = rep.value
        if not rep.passed:
            exc = NotStabilized(
                "degree is not constant along the deformation; "
                "see the per-parameter values in the report"
            )
            exc.report = out
            raise exc
    else:
        out["theorem"] = _run_theorem(scn, space, per_axis)
        degs = _theorem_degrees(out["theorem"])
        out["value"] = degs[0] if len(set(degs)) == 1 else None
    return out


def _theorem_degrees(thm: dict) -> list:
    if "degree" in thm:
        return [thm["degree"]]
    return [t["degree"] for t in thm["targets"]]


def _run_theorem(scn: Scenario, space: SpacePair, per_axis) -> dict:
    thm = scn.theorem
    name = thm["name"]
    T = build_operator(scn, space)
    schedule = build_schedule(scn) if scn.schedule else None
    tol = float(thm.get("tol", 1e-6))
    if name == "defigueiredo":
        rep = run_defigueiredo(
            T,
            radius=float(thm.get("radius", 1.0)),
            schedule=schedule,
            tol=tol,
            lam_grid=tuple(map(float, thm.get("lam_grid", (0.25, 1.0, 4.0)))),
            seed=scn.seed,
            per_axis=per_axis,
        )
        return {
            "degree": rep.degree,
            "lam_margins": {str(k): v for k, v in sorted(rep.lam_margins.items())},
            "name": name,
            "ok": rep.ok,
            "residual": rep.residual,
            "zero": [float(c) for c in rep.zero.coeffs],
        }
    if name == "range_nr":
        rep = run_range_Nr(
            T,
            thm["targets"],
            radius=float(thm["radius"]),
            cap=float(thm["cap"]),
            collar=float(thm.get("collar", 0.25)),
            schedule=schedule,
            tol=tol,
            seed=scn.seed,
            per_axis=per_axis,
        )
        return {
            "cap": rep.cap,
            "name": name,
            "ok": rep.ok,
            "radius": rep.radius,
            "targets": [
                {
                    "degree": r.degree,
                    "degree_doubled_cap": r.degree_doubled_cap,
                    "residual": r.residual,
                    "target": list(r.target),
                    "zero": [float(c) for c in r.zero.coeffs] if r.zero else None,
                }
                for r in rep.results
            ],
        }
    rep = run_browder_surjectivity(
        T,
        thm["targets"],
        schedule=schedule,
        r0=float(thm.get("r0", 1.0)),
        theta=float(thm.get("theta", 1e-6)),
        tol=tol,
        seed=scn.seed,
        per_axis=per_axis,
    )
    return {
        "name": name,
        "ok": rep.ok,
        "targets": [
            {
                "degree": r.degree,
                "outward_margin": r.outward_margin,
                "radius": r.radius,
                "residual": r.residual,
                "target": list(r.target),
                "zero": [float(c) for c in r.zero.coeffs],
            }
            for r in rep.results
        ],
    }
