"""Declarative scenarios: YAML in, ordered JSON (or CSV) report out.

A scenario names models, functions, fields, compacts and families, then
lists checks.  Each check calls one operation and records a verdict, which
is compared against its ``expect`` flag (default ``true``).  See
``scenarios/`` for complete examples and ``README.md`` for the schema.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from . import __version__
from . import fields as fc
from . import linear as gl
from . import stein as st
from . import subspace as ss
from .expr import Expression, ExpressionError, parse

REPORT_SCHEMA = "gcverify-report/1"
SIG_DIGITS = 10


class ScenarioError(Exception):
    """Malformed scenario: reported with a source position and exit status 2."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 source: str | None = None):
        self.message, self.line, self.column, self.source = message, line, column, source
        where = source or "<scenario>"
        if line is not None:
            where += f":{line}:{column}"
        super().__init__(f"{where}: {message}")


class CheckError(Exception):
    """Operation precondition violated; recorded as an error entry, not fatal."""


# ---------------------------------------------------------------------------
# YAML with positions


class PosDict(dict):
    line: int | None = None
    column: int | None = None
    key_pos: dict

    def pos(self, key=None):
        if key is not None and key in getattr(self, "key_pos", {}):
            return self.key_pos[key]
        return self.line, self.column


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    loader.flatten_mapping(node)
    d = PosDict()
    d.key_pos = {}
    for knode, vnode in node.value:
        key = loader.construct_object(knode, deep=True)
        d[key] = loader.construct_object(vnode, deep=True)
        d.key_pos[key] = (vnode.start_mark.line + 1, vnode.start_mark.column + 1)
    d.line, d.column = node.start_mark.line + 1, node.start_mark.column + 1
    return d


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def load_text(text: str, source: str = "<scenario>") -> PosDict:
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise ScenarioError(f"parse error: {exc.problem}", mark.line + 1 if mark else None,
                            mark.column + 1 if mark else None, source) from None
    if not isinstance(doc, PosDict):
        raise ScenarioError("scenario must be a mapping at top level", 1, 1, source)
    return doc


# ---------------------------------------------------------------------------
# report helpers


def _round(x: float) -> float:
    if not math.isfinite(x) or x == 0:
        return x
    return float(f"{x:.{SIG_DIGITS}g}")


def to_plain(obj):
    """Convert numpy values to JSON-ready Python values with 10 significant digits."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = _round(float(obj))
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_plain(float(obj.real)), to_plain(float(obj.imag))]
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


@dataclass
class CheckResult:
    name: str
    op: str
    expect: bool
    verdict: bool | None = None
    status: str = "pass"
    residuals: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    ranks: dict = field(default_factory=dict)
    samples: list = field(default_factory=list)
    error: str | None = None

    def finish(self):
        if self.error is not None and self.verdict is None:
            self.status = "error"
        else:
            self.status = "pass" if bool(self.verdict) == self.expect else "fail"
        return self

    def as_dict(self) -> dict:
        out = {"name": self.name, "op": self.op, "expect": self.expect,
               "verdict": self.verdict, "status": self.status}
        for key in ("residuals", "witnesses", "ranks"):
            if getattr(self, key):
                out[key] = getattr(self, key)
        if self.samples:
            out["samples"] = self.samples
        if self.error is not None:
            out["error"] = self.error
        return to_plain(out)


@dataclass
class Report:
    header: dict
    checks: list[CheckResult]
    timings: dict

    @property
    def ok(self) -> bool:
        return all(c.status == "pass" for c in self.checks)

    def body(self) -> dict:
        passed = sum(c.status == "pass" for c in self.checks)
        return {**self.header,
                "summary": {"checks": len(self.checks), "matched": passed,
                            "errors": sum(c.status == "error" for c in self.checks),
                            "all_matched": passed == len(self.checks)},
                "checks": [c.as_dict() for c in self.checks]}

    def to_dict(self) -> dict:
        return {**self.body(), "timings": to_plain(self.timings)}

    def dumps(self, include_timings: bool = True) -> str:
        data = self.to_dict() if include_timings else self.body()
        return json.dumps(data, indent=2) + "\n"

    def to_csv(self) -> str:
        rows = []
        width = 0
        keys: list[str] = []
        for c in self.checks:
            for i, s in enumerate(c.as_dict().get("samples", [])):
                pt = s.get("point", [])
                width = max(width, len(pt))
                for k in s:
                    if k != "point" and k not in keys:
                        keys.append(k)
                rows.append((c.name, c.op, i, pt, s))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "op", "sample"] + [f"x{i + 1}" for i in range(width)] + keys)
        for name, op, i, pt, s in rows:
            coords = list(pt) + [""] * (width - len(pt))
            w.writerow([name, op, i] + coords + [_cell(s.get(k, "")) for k in keys])
        return buf.getvalue()


def _cell(v):
    if isinstance(v, list):
        return " ".join(str(x) for x in v)
    return v


# ---------------------------------------------------------------------------
# the runner


@dataclass
class Settings:
    tol: float = ss.DEFAULT_TOL
    field_tol: float = fc.FIELD_TOL
    fd_step: float | None = None
    seed: int = 0


class Scenario:
    """A loaded scenario; name resolution happens lazily per check."""

    def __init__(self, doc: PosDict, source: str = "<scenario>", overrides: dict | None = None):
        self.doc, self.source = doc, source
        known = {"version", "seed", "tolerances", "models", "matrices", "functions", "fields",
                 "compacts", "families", "checks", "description", "output"}
        for key in doc:
            if key not in known:
                self._fail(f"unknown top-level key {key!r}", doc, key)
        tols = doc.get("tolerances") or {}
        s = Settings()
        s.tol = float(tols.get("tol", s.tol))
        s.field_tol = float(tols.get("field_tol", s.field_tol))
        if tols.get("fd_step") is not None:
            s.fd_step = float(tols["fd_step"])
        s.seed = int(doc.get("seed", 0))
        for k, v in (overrides or {}).items():
            if v is not None:
                setattr(s, k, v)
        self.settings = s
        self._cache: dict = {}
        checks = doc.get("checks")
        if not isinstance(checks, list) or not checks:
            self._fail("scenario needs a nonempty list of checks", doc, "checks")
        for i, c in enumerate(checks):
            if not isinstance(c, PosDict) or "op" not in c:
                self._fail(f"check #{i + 1} needs an 'op'", c if isinstance(c, PosDict) else doc)
            if c["op"] not in OPERATIONS:
                self._fail(f"unknown operation {c['op']!r}", c, "op")
        self._validate_references()

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "Scenario":
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario: {exc.strerror}", source=str(path)) from None
        return cls(load_text(text, str(path)), str(path), overrides)

    def _fail(self, msg, node=None, key=None):
        line = col = None
        if isinstance(node, PosDict):
            line, col = node.pos(key)
        raise ScenarioError(msg, line, col, self.source)

    # -- reference resolution ----------------------------------------------
    _REF_KEYS = {"model": "models", "source": "models", "target": "models", "function": "functions",
                 "field": "fields", "compact": "compacts", "family": "families",
                 "candidates": "families", "base": "fields"}
    _REF_LIST_KEYS = {"functions": "functions", "maps": "functions"}

    def _validate_references(self):
        for section in ("models", "functions", "fields", "compacts", "families", "matrices"):
            v = self.doc.get(section)
            if v is not None and not isinstance(v, PosDict):
                self._fail(f"{section} must be a mapping", self.doc, section)
        for c in self.doc["checks"]:
            args = c.get("args") or PosDict()
            if not isinstance(args, dict):
                self._fail("args must be a mapping", c, "args")
            for key, val in args.items():
                if key in self._REF_KEYS and isinstance(val, str):
                    self._need(self._REF_KEYS[key], val, args, key)
                if key in self._REF_LIST_KEYS and isinstance(val, list):
                    for item in val:
                        if isinstance(item, str):
                            self._need(self._REF_LIST_KEYS[key], item, args, key)
        for name, fam in (self.doc.get("families") or {}).items():
            for key in ("gh", "poisson"):
                for item in (fam or {}).get(key, []) or []:
                    self._need("functions", item, fam, key)
        for name, m in (self.doc.get("models") or {}).items():
            if isinstance(m, dict):
                for key in ("of",):
                    if key in m:
                        self._need("models", m[key], m, key)
                if "product" in m:
                    for item in m["product"]:
                        self._need("models", item, m, "product")
        for name, fdef in (self.doc.get("fields") or {}).items():
            if isinstance(fdef, dict):
                if "model" in fdef:
                    self._need("models", fdef["model"], fdef, "model")
                if "base" in fdef:
                    self._need("fields", fdef["base"], fdef, "base")

    def _need(self, section, name, node, key):
        table = self.doc.get(section) or {}
        if name not in table:
            self._fail(f"unresolved name {name!r} (not defined in {section})", node, key)

    # -- builders ---------------------------------------------------------
    def model(self, name: str) -> gl.LinearGCStructure:
        key = ("model", name)
        if key not in self._cache:
            self._cache[key] = self._build_model(name, self.doc["models"][name])
        return self._cache[key]

    def _build_model(self, name, m):
        tol = self.settings.tol
        if not isinstance(m, dict):
            raise CheckError(f"model {name!r} must be a mapping")
        if "standard" in m:
            M, N = m["standard"]
            return gl.standard_model(int(M), int(N), tol)
        if "complex" in m:
            return gl.complex_model(int(m["complex"]), tol)
        if "symplectic" in m:
            return gl.symplectic_model(int(m["symplectic"]), tol)
        if "matrix" in m:
            return gl.LinearGCStructure(np.array(m["matrix"], dtype=float), tol)
        if "product" in m:
            parts = [self.model(n) for n in m["product"]]
            out = parts[0]
            for p in parts[1:]:
                out = gl.product_structure(out, p)
            return out
        if "of" in m and "B" in m:
            return gl.b_transform_structure(self.model(m["of"]), self.matrix(m["B"]))
        raise CheckError(f"model {name!r}: expected one of standard, complex, symplectic, "
                         "matrix, product, or of+B")

    def raw_matrix(self, name: str) -> Any:
        return self.doc["matrices"][name] if name in (self.doc.get("matrices") or {}) else None

    def matrix(self, val) -> np.ndarray:
        if isinstance(val, str):
            raw = self.raw_matrix(val)
            if raw is None:
                raise CheckError(f"unresolved matrix {val!r}")
            val = raw
        return np.array(val, dtype=float)

    def chart_of(self, spec) -> fc.ModelChart:
        M, N = spec
        return fc.ModelChart(int(M), int(N))

    def function(self, name: str):
        key = ("function", name)
        if key not in self._cache:
            fdef = self.doc["functions"][name]
            if not isinstance(fdef, dict) or "chart" not in fdef:
                raise CheckError(f"function {name!r} needs a chart [M, N]")
            chart = self.chart_of(fdef["chart"])
            try:
                if "expr" in fdef:
                    obj = parse(str(fdef["expr"]), chart)
                elif "map" in fdef:
                    comps = [parse(str(e), chart) for e in fdef["map"]]
                    obj = _RealMap(comps, chart)
                else:
                    raise CheckError(f"function {name!r} needs 'expr' or 'map'")
            except ExpressionError as exc:
                line, col = fdef.pos("expr" if "expr" in fdef else "map")
                raise ScenarioError(f"function {name!r}: {exc}", line, col, self.source) from None
            self._cache[key] = obj
        return self._cache[key]

    def field(self, name: str) -> fc.StructureField:
        key = ("field", name)
        if key not in self._cache:
            fdef = self.doc["fields"][name]
            kind = fdef.get("kind")
            box = fdef.get("box")
            box = np.array(box, dtype=float) if box is not None else None
            step = self.settings.fd_step
            if kind == "constant":
                f = fc.constant_field(self.model(fdef["model"]), box, fd_step=step)
            elif kind == "rotating":
                f = fc.rotating_field(box, fd_step=step)
            elif kind == "b_transform":
                base = self.field(fdef["base"])
                d = base.d
                chart = fc.ModelChart(d // 2, 0)
                entries = [[parse(str(e), chart) for e in row] for row in fdef["B"]]

                def B_at(x, entries=entries):
                    return np.array([[e(x).real for e in row] for row in entries])
                f = fc.b_transformed_field(base, B_at)
            else:
                raise CheckError(f"field {name!r}: unknown kind {kind!r}")
            self._cache[key] = f
        return self._cache[key]

    def compact(self, name: str, rng) -> st.SampledCompact:
        return st.SampledCompact(self.samples(self.doc["compacts"][name], rng), name)

    def family(self, name: str) -> st.FunctionFamily:
        fam = self.doc["families"][name] or {}
        gh = [(n, self.function(n)) for n in fam.get("gh", []) or []]
        pm = [(n, self.function(n)) for n in fam.get("poisson", []) or []]
        return st.FunctionFamily.of(gh=gh, poisson=pm)

    def samples(self, spec, rng) -> np.ndarray:
        if isinstance(spec, str):
            return self.compact(spec, rng).points
        if isinstance(spec, list):
            return np.atleast_2d(np.array(spec, dtype=float))
        if not isinstance(spec, dict):
            raise CheckError("sample spec must be a list of points or a mapping")
        if "points" in spec:
            return np.atleast_2d(np.array(spec["points"], dtype=float))
        if "random" in spec:
            box = np.array(spec["box"], dtype=float)
            n = int(spec["random"])
            return box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random((n, box.shape[0]))
        if "circle" in spec:
            c = spec["circle"]
            return st.circle_samples(int(c["n"]), float(c.get("radius", 1.0)),
                                     tuple(c.get("center", (0.0, 0.0))), float(c.get("phase", 0.0)))
        if "disc" in spec:
            c = spec["disc"]
            return st.disc_samples(float(c["radius"]), float(c["step"]), tuple(c.get("center", (0.0, 0.0))))
        if "grid" in spec:
            g = spec["grid"]
            return st.Grid(np.array(g["box"], dtype=float), float(g["step"])).points
        raise CheckError(f"unknown sample spec keys {sorted(spec)}")

    # -- execution --------------------------------------------------------
    def header(self) -> dict:
        s = self.settings
        return to_plain({"schema": REPORT_SCHEMA, "tool_version": __version__,
                         "scenario": Path(self.source).name, "seed": s.seed,
                         "tolerances": {"tol": s.tol, "field_tol": s.field_tol, "fd_step": s.fd_step}})

    def run(self) -> Report:
        results, timings = [], {}
        for i, c in enumerate(self.doc["checks"]):
            name = str(c.get("name", f"check-{i + 1}"))
            res = CheckResult(name, c["op"], bool(c.get("expect", True)))
            rng = np.random.default_rng([self.settings.seed, i])
            t0 = time.perf_counter()
            try:
                OPERATIONS[c["op"]](self, c.get("args") or {}, res, rng)
            except ScenarioError:
                raise
            except (gl.InvalidStructure, fc.MarginError) as exc:
                res.verdict = False
                res.error = f"{type(exc).__name__}: {exc}"
            except (CheckError, ExpressionError, ValueError, KeyError, TypeError, IndexError) as exc:
                res.error = f"{type(exc).__name__}: {exc}"
            timings[name] = time.perf_counter() - t0
            results.append(res.finish())
        return Report(self.header(), results, timings)


class _RealMap:
    """R^k-valued map from real parts of component expressions."""

    def __init__(self, comps: list[Expression], chart):
        self.comps, self.chart = comps, chart

    def __call__(self, x):
        return np.array([c(x).real for c in self.comps])

    def evaluate_points(self, pts):
        return np.stack([c.evaluate_points(pts).real for c in self.comps], axis=1)


def run_file(path, overrides: dict | None = None) -> Report:
    return Scenario.from_file(path, overrides).run()


# ---------------------------------------------------------------------------
# operations


OPERATIONS: dict[str, Callable] = {}


def operation(name):
    def deco(fn):
        OPERATIONS[name] = fn
        return fn
    return deco


def _require(args, *keys):
    for k in keys:
        if k not in args:
            raise CheckError(f"missing argument {k!r}")


@operation("validate")
def _op_validate(sc: Scenario, args, res, rng):
    _require(args, "model")
    m = args["model"]
    if m in (sc.doc.get("models") or {}) and "matrix" in sc.doc["models"][m]:
        J = np.array(sc.doc["models"][m]["matrix"], dtype=float)
        cert = gl.validate(J, sc.settings.tol)
    else:
        cert = sc.model(m).certificate()
    res.residuals = {"square": cert.square_residual, "orthogonality": cert.orthogonality_residual}
    res.verdict = cert.valid


@operation("eigenbundle")
def _op_eigenbundle(sc, args, res, rng):
    _require(args, "model")
    s = sc.model(args["model"])
    L = s.eigenbundle()
    info = gl.check_maximal_isotropic(L)
    trans = ss.intersect(L, ss.conjugate(L)).dim
    res.residuals = {"isotropy": info["isotropy_residual"]}
    res.ranks = {"dim_L": L.dim, "dim_L_cap_conj": trans}
    res.verdict = bool(info["valid"]) and trans == 0


@operation("type")
def _op_type(sc, args, res, rng):
    _require(args, "model")
    t = gl.type_of(sc.model(args["model"]))
    res.ranks = {"type": t.k, "dim_rho_L": t.E.dim, "dim_delta": t.delta.shape[1]}
    res.verdict = True if "equals" not in args else t.k == int(args["equals"])


def _random_b(rng, d, scale):
    A = rng.standard_normal((d, d)) * scale
    return A - A.T


@operation("b_invariance")
def _op_b_invariance(sc, args, res, rng):
    _require(args, "model")
    s = sc.model(args["model"])
    count = int(args.get("count", 5))
    scale = float(args.get("scale", 1.0))
    L = s.eigenbundle()
    t0 = gl.type_of(L)
    worst, same_type = 0.0, True
    for _ in range(count):
        B = _random_b(rng, s.d, scale)
        LB = gl.b_transform(L, B)
        tB = gl.type_of(LB)
        same_type &= tB.k == t0.k
        worst = max(worst, ss.equal_subspaces(tB.E, t0.E, sc.settings.tol)[1])
        res.samples.append({"point": B[np.triu_indices(s.d, 1)], "type": tB.k})
    res.residuals = {"max_rho_angle": worst}
    res.ranks = {"type": t0.k, "transforms": count}
    res.verdict = same_type and worst < sc.settings.tol


@operation("presentation_roundtrip")
def _op_roundtrip(sc, args, res, rng):
    _require(args, "model")
    L = sc.model(args["model"]).eigenbundle()
    pr = gl.extract_presentation(L)
    ok, ang = ss.equal_subspaces(pr.rebuild(), L, float(args.get("angle", 1e-8)))
    res.residuals = {"angle": ang, "sigma_residual": pr.sigma_residual,
                     "antisymmetry": pr.antisymmetry_residual}
    res.ranks = {"type": pr.k, "dim_delta": pr.delta.shape[1]}
    res.verdict = ok


@operation("gc_map")
def _op_gc_map(sc, args, res, rng):
    _require(args, "map", "source", "target")
    f = sc.matrix(args["map"])
    rep = gl.is_gc_map(f, sc.model(args["source"]).eigenbundle(), sc.model(args["target"]).eigenbundle())
    res.residuals = {"e_condition": rep.e_condition.residual, "poisson_condition": rep.poisson_condition.residual}
    res.witnesses = {"e_condition": rep.e_condition.ok, "poisson_condition": rep.poisson_condition.ok}
    res.verdict = rep.is_gc_map


@operation("gc_subspace")
def _op_gc_subspace(sc, args, res, rng):
    _require(args, "model", "subspace")
    V = sc.matrix(args["subspace"])
    ind = gl.induced_subspace_structure(V, sc.model(args["model"]).eigenbundle())
    res.ranks = {"dim_subspace": ind.basis.shape[1], "dim_induced": ind.L.dim}
    res.witnesses = {"maximal": ind.maximal}
    res.verdict = ind.is_gc_subspace


@operation("image_structure")
def _op_image(sc, args, res, rng):
    _require(args, "map", "source", "target")
    f = sc.matrix(args["map"])
    rep = gl.image_structure(f, sc.model(args["source"]).eigenbundle(), sc.model(args["target"]).eigenbundle())
    res.ranks = {"type_source": rep.type_source, "type_target": rep.type_target,
                 "type_image": rep.type_image, "dim_source": rep.dim_source,
                 "dim_target": rep.dim_target, "jump": rep.jump}
    res.witnesses = {"gc_map": rep.gc_map.is_gc_map, "gc_subspace": rep.induced.is_gc_subspace,
                     "jump_formula": rep.jump_formula_holds, "same_projection": rep.same_projection}
    res.verdict = rep.ok


@operation("nijenhuis")
def _op_nijenhuis(sc, args, res, rng):
    _require(args, "field", "samples")
    f = sc.field(args["field"])
    pts = sc.samples(args["samples"], rng)
    vals = np.array([fc.nijenhuis_residual(f, x) for x in pts])
    for x, v in zip(pts, vals):
        res.samples.append({"point": x, "nijenhuis": v})
    res.residuals = {"max": float(vals.max()), "min": float(vals.min())}
    if "above" in args:
        frac = float(np.mean(vals > float(args["above"])))
        res.residuals["fraction_above"] = frac
        res.verdict = frac >= float(args.get("fraction", 1.0))
    else:
        res.verdict = bool(np.all(vals < float(args.get("below", sc.settings.field_tol))))


def _exact_gh(fn: Expression, pts):
    ch = fn.chart
    zb = np.zeros(len(pts))
    lf = np.zeros(len(pts))
    for j in range(1, ch.N + 1):
        zb = np.maximum(zb, np.abs(fn.d_dzbar(j).evaluate_points(pts)))
    for l in range(1, 2 * ch.M + 1):
        lf = np.maximum(lf, np.abs(fn.d_dp(l).evaluate_points(pts)))
    return zb, lf


@operation("gh_check")
def _op_gh(sc, args, res, rng):
    _require(args, "function", "samples")
    fn = sc.function(args["function"])
    pts = sc.samples(args["samples"], rng)
    tol = float(args.get("tol", sc.settings.field_tol))
    rep = fc.gh_check_model(fn, fn.chart, pts, tol, sc.settings.fd_step)
    for x, a, b, c in zip(pts, rep.zbar, rep.leaf, rep.d_L):
        res.samples.append({"point": x, "zbar": a, "leaf": b, "d_L": c})
    res.residuals = {"zbar": rep.max_zbar, "leaf": rep.max_leaf, "d_L": float(rep.d_L.max())}
    res.witnesses = {"d_L_agrees": rep.agrees}
    if isinstance(fn, Expression) and fn.is_polynomial:
        zb, lf = _exact_gh(fn, pts)
        exact = bool(np.all(zb < tol) and np.all(lf < tol))
        res.witnesses["exact_oracle"] = exact
        res.witnesses["oracle_agrees"] = exact == rep.is_gh
    res.verdict = rep.is_gh


@operation("poisson_map")
def _op_poisson(sc, args, res, rng):
    _require(args, "function", "samples")
    fn = sc.function(args["function"])
    pts = sc.samples(args["samples"], rng)
    rep = fc.poisson_map_check(fn, fn.chart, pts, float(args.get("tol", sc.settings.field_tol)),
                               sc.settings.fd_step)
    for x, r in zip(pts, rep.residuals):
        res.samples.append({"point": x, "poisson": r})
    res.residuals = {"poisson": rep.residual}
    res.verdict = rep.is_poisson


@operation("l_psh")
def _op_psh(sc, args, res, rng):
    _require(args, "function", "samples")
    fn = sc.function(args["function"])
    pts = sc.samples(args["samples"], rng)
    rep = fc.l_psh_check(fn, fn.chart, pts, float(args.get("tol", sc.settings.field_tol)),
                         float(args.get("strict_threshold", fc.STRICT_THRESHOLD)), sc.settings.fd_step)
    for x, a, b in zip(pts, rep.leaf, rep.min_eig):
        res.samples.append({"point": x, "leaf": a, "min_eig": b})
    cls = rep.classify()
    res.residuals = {"leaf": rep.leaf_residual, "min_eig": float(rep.min_eig.min())}
    res.witnesses = {"class": cls}
    res.verdict = cls == args["class"] if "class" in args else rep.is_psh


@operation("expression_eval")
def _op_eval(sc, args, res, rng):
    _require(args, "function", "point")
    from .expr import expression_eval
    fn = sc.function(args["function"])
    if not isinstance(fn, Expression):
        raise CheckError("expression_eval needs a scalar expression")
    pt = _point(fn.chart, args["point"])
    out = expression_eval(fn, pt)
    res.witnesses = {k: v for k, v in out.items()}
    res.verdict = True
    if "value" in args:
        want = _complex(args["value"])
        res.residuals = {"value_error": abs(out["value"] - want)}
        res.verdict = abs(out["value"] - want) < sc.settings.tol * max(1.0, abs(want))


def _complex(v) -> complex:
    if isinstance(v, list):
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _point(chart, spec) -> np.ndarray:
    if isinstance(spec, dict):
        p = spec.get("p", [])
        z = [_complex(v) for v in spec.get("z", [])]
        return chart.point(p, z)
    return np.array(spec, dtype=float)


@operation("fd_agreement")
def _op_fd(sc, args, res, rng):
    """Finite-difference Wirtinger derivatives against exact term differentiation."""
    _require(args, "function", "samples")
    fn = sc.function(args["function"])
    if not (isinstance(fn, Expression) and fn.is_polynomial):
        raise CheckError("fd_agreement needs a polynomial expression")
    pts = sc.samples(args["samples"], rng)
    ch = fn.chart
    worst = 0.0
    for x in pts:
        h = fc.default_step(x) if sc.settings.fd_step is None else sc.settings.fd_step
        g = fc.gradient(lambda y: complex(fn(y)), x, h)
        gp, gz, gzb = fc.wirtinger(ch, g)
        ep = np.array([fn.d_dp(l)(x) for l in range(1, 2 * ch.M + 1)])
        ez = np.array([fn.d_dz(j)(x) for j in range(1, ch.N + 1)])
        ezb = np.array([fn.d_dzbar(j)(x) for j in range(1, ch.N + 1)])
        err = max(np.max(np.abs(gp - ep), initial=0.0), np.max(np.abs(gz - ez), initial=0.0),
                  np.max(np.abs(gzb - ezb), initial=0.0))
        res.samples.append({"point": x, "fd_error": err})
        worst = max(worst, float(err))
    res.residuals = {"fd_error": worst}
    res.verdict = worst < float(args.get("bound", 1e-7))


@operation("o_hull")
def _op_hull(sc, args, res, rng):
    _require(args, "compact", "family", "grid")
    K = sc.compact(args["compact"], rng)
    fam = sc.family(args["family"])
    grid = st.Grid(np.array(args["grid"]["box"], dtype=float), float(args["grid"]["step"]))
    h = st.o_hull(K, fam, grid, float(args.get("tol", st.HULL_TOL)))
    res.ranks = {"grid_points": len(grid.points), "hull_points": h.size}
    res.witnesses = {"family": h.family, "note": h.note}
    res.residuals = {f"bound[{k}]": v for k, v in h.bounds.items()}
    on_grid = _rows(K.points) & _rows(grid.points)
    res.ranks["compact_points_on_grid"] = len(on_grid)
    res.verdict = on_grid <= _rows(h.compact.points)
    if "disc" in args:
        dist = st.hausdorff_to_disc(h.compact.points, float(args["disc"]["radius"]),
                                    tuple(args["disc"].get("center", (0.0, 0.0))))
        res.residuals["hausdorff_to_disc"] = dist
        res.verdict = res.verdict and dist < float(args["disc"]["max_distance"])


def _rows(a) -> set:
    return {tuple(r) for r in np.round(np.atleast_2d(a), 12).tolist()}


@operation("hull_idempotence")
def _op_idem(sc, args, res, rng):
    _require(args, "compact", "family", "grid")
    K = sc.compact(args["compact"], rng)
    grid = st.Grid(np.array(args["grid"]["box"], dtype=float), float(args["grid"]["step"]))
    rep = st.hull_idempotence_check(K, sc.family(args["family"]), grid)
    res.ranks = {"first": rep.first, "second": rep.second, "difference": rep.symmetric_difference}
    res.verdict = rep.idempotent


@operation("separability")
def _op_sep(sc, args, res, rng):
    _require(args, "pairs", "family")
    fam = sc.family(args["family"])
    pairs = [(np.array(a, dtype=float), np.array(b, dtype=float)) for a, b in args["pairs"]]
    out = st.separability_probe(pairs, fam, args.get("mode", st.GH_ONLY))
    for (a, b), v in zip(pairs, out):
        res.samples.append({"point": np.concatenate([a, b]), "gap": v.gap, "separated": v.separated,
                            "witness": v.witness or ""})
    res.witnesses = {"mode": args.get("mode", st.GH_ONLY)}
    res.verdict = all(v.separated for v in out)


def _callables(sc, names):
    return [sc.function(n) for n in names]


@operation("regularity")
def _op_reg(sc, args, res, rng):
    _require(args, "point", "maps", "functions")
    gh = _callables(sc, args["functions"])
    maps = _callables(sc, args["maps"])
    chart = (gh or maps)[0].chart
    rep = st.regularity_probe(np.array(args["point"], dtype=float), maps, gh, chart,
                              float(args.get("rank_tol", st.RANK_TOL)), sc.settings.fd_step)
    res.ranks = {"real_rank": rep.real.rank, "real_target": rep.real.target, "real_gap": rep.real.gap,
                 "complex_rank": rep.complex.rank, "complex_target": rep.complex.target,
                 "complex_gap": rep.complex.gap}
    res.verdict = rep.regular


@operation("reduce")
def _op_reduce(sc, args, res, rng):
    _require(args, "functions", "compact")
    gh = _callables(sc, args["functions"])
    maps = _callables(sc, args.get("maps", []))
    chart = gh[0].chart
    K = sc.compact(args["compact"], rng)
    seed = int(args.get("seed", sc.settings.seed))
    rep = st.reduce_regular_tuple(maps, gh, K, chart, seed, int(args.get("trials", 5)),
                                  float(args.get("radius", 0.1)), int(args.get("mode", 1)),
                                  fd_step=sc.settings.fd_step)
    res.ranks = {"trials_used": rep.trials_used, "functions_out": len(rep.functions)}
    res.witnesses = {"seed": seed, "input_regular": rep.input_regular,
                     "c": rep.c if rep.c is not None else None, "message": rep.message}
    if rep.success:
        recheck = all(st.regularity_probe(x, maps, rep.functions, chart, fd_step=sc.settings.fd_step).regular
                      for x in K.points)
        res.witnesses["output_regular"] = recheck
        res.verdict = recheck
    else:
        res.verdict = False


@operation("exhaustion")
def _op_exhaustion(sc, args, res, rng):
    chart = fc.ModelChart(0, 1)
    levels_n = int(args.get("levels", 3))
    levels, r, u = st.disc_exhaustion_levels(chart, levels_n, float(args.get("step", 0.04)))
    out = st.exhaustion_build(levels, chart, int(args.get("cap", st.POWER_CAP)))
    res.witnesses = {"powers": out.powers, "message": out.message, "failing_level": out.failing_level}
    if args.get("convexity_precheck"):
        step = float(args.get("step", 0.04))
        grid = st.Grid(np.array([[-1.0, 1.0], [-1.0, 1.0]]), step)
        conv = st.convexity_precheck([lv.inner for lv in levels], st.monomial_family(chart, 3), grid)
        res.witnesses["convexity"] = [{"level": c.level, "excess": c.excess, "convex": c.convex}
                                      for c in conv]
    if out.f is not None:
        f1 = max(out.f(x) for x in levels[0].inner)
        offs = [min(out.f(x) for x in lv.outer) - j for j, lv in enumerate(levels)]
        res.residuals = {"max_f_on_K1": f1, "min_excess_off_U": min(offs),
                         "min_levi_eig": float(out.psh.min_eig.min())}
        res.verdict = out.success and f1 < 0 and min(offs) > 0
    else:
        res.verdict = False


@operation("polyhedron_membership")
def _op_poly_member(sc, args, res, rng):
    _require(args, "functions", "points")
    members = [st.Member(n, sc.function(n)) for n in args["functions"]]
    P = st.PolyhedronSpec.of(members)
    pts = sc.samples(args["points"], rng)
    inside = st.polyhedron_membership(P, pts)
    for x, v in zip(pts, inside):
        res.samples.append({"point": x, "member": bool(v)})
    want = args.get("members")
    res.verdict = bool(np.all(inside)) if want is None else [bool(v) for v in inside] == list(want)


@operation("polyhedron_search")
def _op_poly_search(sc, args, res, rng):
    _require(args, "compact", "candidates", "shell")
    K = sc.compact(args["compact"], rng)
    shell = args["shell"]
    grid = st.Grid(np.array(shell["box"], dtype=float), float(shell["step"]))
    pts = grid.points
    mask = np.hypot(pts[:, 0], pts[:, 1]) <= float(shell["radius"])
    ring = pts[grid.shell(mask)]
    out = st.polyhedron_search(K, ring, sc.family(args["candidates"]), float(args.get("margin", 0.01)))
    res.ranks = {"shell_points": out.shell_size, "covered": out.covered,
                 "order": out.spec.order if out.spec else 0}
    res.witnesses = {"message": out.message,
                     "functions": [m.name for m in out.spec.functions] if out.spec else []}
    res.verdict = out.success
