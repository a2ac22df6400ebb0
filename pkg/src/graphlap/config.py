"""JSON experiment configuration: parsing, validation and serialization.

Every problem found in a document is collected and reported together, each
prefixed with the key path it concerns (for example ``schedule.gamma``).
"""
from __future__ import annotations

import copy
import json
import math

import numpy as np

from . import geometry as geo
from .experiments import DEFAULT_TOLERANCES, ExperimentConfig, ScheduleError, make_schedule
from .functions import FunctionError, function_from_spec
from .kernels import KT4_PAIRS, KernelError, kernel_from_spec
from .sampling import SamplingError, density_from_spec

EXPERIMENTS = ("lln", "clt", "rate", "corr", "boundary", "moments", "admissible")

TOP_KEYS = {
    "experiment", "dimension", "kernel", "density", "domain", "function", "point", "points",
    "schedule", "n_list", "eps_list", "replications", "seed", "tolerances", "output",
    "centering", "convention_factor", "pairs",
}
SCHEDULE_KEYS = {"gamma", "c", "theta"}

# which sections each experiment needs
_NEEDS = {
    "lln": {"kernel", "density", "domain", "function", "point", "schedule", "n_list"},
    "clt": {"kernel", "density", "domain", "function", "point", "schedule", "n_list"},
    "corr": {"kernel", "density", "domain", "function", "points", "schedule", "n_list"},
    "rate": {"kernel", "density", "domain", "function", "point", "eps_list"},
    "boundary": {"kernel", "density", "domain", "function", "point", "eps_list"},
    "moments": {"kernel"},
    "admissible": {"kernel"},
}


class ConfigError(ValueError):
    """All problems found in a configuration document."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def domain_from_spec(spec: dict, dim: int) -> geo.Domain:
    spec = dict(spec)
    kind = spec.pop("type", None)
    try:
        if kind == "full_space":
            dom = geo.FullSpace(dim)
        elif kind == "interval":
            dom = geo.interval(float(spec.pop("low")), float(spec.pop("high")))
        elif kind == "box":
            dom = geo.Box(spec.pop("low"), spec.pop("high"))
        elif kind == "ball":
            dom = geo.Ball(spec.pop("center", [0.0] * dim), float(spec.pop("radius", 1.0)))
        elif kind == "half_space":
            dom = geo.HalfSpace(spec.pop("normal"), float(spec.pop("offset", 0.0)))
        elif kind == "wedge":
            dom = geo.Wedge(spec.pop("apex", [0.0, 0.0]), spec.pop("axis", [0.0, 1.0]),
                            float(spec.pop("angle")))
        elif kind == "parabolic_graph":
            dom = geo.ParabolicGraph(dim, float(spec.pop("curvature", 1.0)))
        elif kind == "cusp":
            dom = geo.Cusp()
        else:
            raise geo.GeometryError(f"unknown domain type {kind!r}")
    except KeyError as exc:
        raise geo.GeometryError(f"missing parameter {exc.args[0]!r}") from None
    if spec:
        raise geo.GeometryError(f"unexpected keys {sorted(spec)}")
    if dom.dim != dim:
        raise geo.GeometryError(f"domain dimension {dom.dim} differs from {dim}")
    return dom


def _finite_numbers(obj, path, errors):
    if isinstance(obj, bool):
        return
    if isinstance(obj, (int, float)):
        if not math.isfinite(obj):
            errors.append(f"{path}: must be finite")
    elif isinstance(obj, dict):
        for k, v in obj.items():
            _finite_numbers(v, f"{path}.{k}" if path else k, errors)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _finite_numbers(v, f"{path}[{i}]", errors)


def _constant(name):
    raise ValueError(f"non-finite constant {name}")


def load_json(text: str) -> dict:
    try:
        doc = json.loads(text, parse_constant=_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"])
    except ValueError as exc:
        raise ConfigError([f"syntax error: {exc}"])
    if not isinstance(doc, dict):
        raise ConfigError(["top level must be an object"])
    return doc


def parse_config(text: str, experiment: str = None) -> ExperimentConfig:
    """Parse and validate a configuration document.

    ``experiment`` (from the command line) fills in or must match the
    document's ``experiment`` key.  Raises :class:`ConfigError` listing
    every problem.
    """
    return build_config(load_json(text), experiment)


def build_config(doc: dict, experiment: str = None) -> ExperimentConfig:
    errors = []
    doc = copy.deepcopy(doc)
    for key in sorted(set(doc) - TOP_KEYS):
        errors.append(f"{key}: unknown key")
    _finite_numbers(doc, "", errors)

    exp = doc.get("experiment", experiment)
    if experiment is not None and exp != experiment:
        errors.append(f"experiment: config is for {exp!r}, not {experiment!r}")
    if exp not in EXPERIMENTS:
        errors.append(f"experiment: must be one of {', '.join(EXPERIMENTS)}")
        raise ConfigError(errors)
    doc["experiment"] = exp

    d = doc.get("dimension")
    if not isinstance(d, int) or isinstance(d, bool) or not 1 <= d <= 4:
        errors.append("dimension: must be an integer in 1..4")
        raise ConfigError(errors)

    needs = _NEEDS[exp]
    for key in sorted(needs):
        present = key in doc or (key == "point" and "points" in doc) or (
            key == "domain" and isinstance(doc.get("density"), dict) and "domain" in doc["density"])
        if not present:
            errors.append(f"{key}: required for {exp}")

    cfg = ExperimentConfig(experiment=exp, dim=d)

    def section(key, fn):
        if key not in doc:
            return None
        if not isinstance(doc[key], dict):
            errors.append(f"{key}: must be an object")
            return None
        try:
            return fn(doc[key])
        except (KernelError, geo.GeometryError, SamplingError, FunctionError, ValueError,
                TypeError) as exc:
            errors.append(f"{key}: {exc}")
            return None

    cfg.kernel = section("kernel", lambda s: kernel_from_spec(s, d))
    dom_spec = doc.get("domain")
    if dom_spec is None and isinstance(doc.get("density"), dict) and "domain" in doc["density"]:
        dom_spec = doc["density"]["domain"]
        key = "density.domain"
    else:
        key = "domain"
    if dom_spec is not None:
        try:
            if not isinstance(dom_spec, dict):
                raise geo.GeometryError("must be an object")
            cfg.domain = domain_from_spec(dom_spec, d)
        except (geo.GeometryError, ValueError, TypeError) as exc:
            errors.append(f"{key}: {exc}")
    if "density" in doc:
        if cfg.domain is not None:
            cfg.density = section("density", lambda s: density_from_spec(s, cfg.domain))
        elif isinstance(doc["density"], dict):
            errors.append("density: needs a valid domain")
    cfg.function = section("function", lambda s: function_from_spec(s, d))

    # points
    pts = []
    if "point" in doc and "points" in doc:
        errors.append("point: give either point or points, not both")
    raw_pts = [doc["point"]] if "point" in doc else doc.get("points", [])
    if not isinstance(raw_pts, list):
        errors.append("points: must be a list of points")
        raw_pts = []
    for i, q in enumerate(raw_pts):
        path = "point" if "point" in doc else f"points[{i}]"
        if (not isinstance(q, list) or len(q) != d
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in q)):
            errors.append(f"{path}: must be a list of {d} numbers")
            continue
        q = np.asarray(q, dtype=float)
        if cfg.domain is not None and cfg.domain.classify(q) == "outside":
            errors.append(f"{path}: point lies outside the domain")
        pts.append(q)
    cfg.points = pts
    if exp == "corr" and len(pts) == 2 and np.array_equal(pts[0], pts[1]):
        errors.append("points: corr needs two distinct points")
    if exp == "corr" and "points" in doc and len(raw_pts) != 2:
        errors.append("points: corr needs exactly two points")

    # schedule
    if "schedule" in doc:
        sch = doc["schedule"]
        if not isinstance(sch, dict):
            errors.append("schedule: must be an object")
        else:
            for k in sorted(set(sch) - SCHEDULE_KEYS):
                errors.append(f"schedule.{k}: unknown key")
            theta = sch.get("theta")
            if theta is None:
                thetas = [obj.theta for obj in (cfg.function, cfg.density) if obj is not None]
                theta = min(thetas) if thetas else 1.0
                sch["theta"] = theta
            try:
                cfg.schedule = make_schedule(d, float(theta), float(sch.get("gamma", float("nan"))),
                                             float(sch.get("c", 1.0)))
                sch.setdefault("c", 1.0)
            except (ScheduleError, TypeError, ValueError) as exc:
                errors.append(f"schedule: {exc}")
            if "gamma" not in sch:
                errors.append("schedule.gamma: required")
            if cfg.schedule is not None:
                if exp == "clt" and not cfg.schedule.clt_valid:
                    errors.append("schedule: schedule invalid for clt")
                if exp == "corr" and not cfg.schedule.clt_valid:
                    errors.append("schedule: schedule invalid for corr")
                if exp == "lln" and not cfg.schedule.lln_valid:
                    errors.append("schedule: schedule invalid for lln")

    # lists and scalars
    if "n_list" in doc:
        nl = doc["n_list"]
        if (not isinstance(nl, list) or not nl
                or not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in nl)):
            errors.append("n_list: must be a nonempty list of positive integers")
        else:
            cfg.n_list = list(nl)
    if "eps_list" in doc:
        el = doc["eps_list"]
        if (not isinstance(el, list) or len(el) < 2
                or not all(isinstance(e, (int, float)) and e > 0 for e in el)
                or not all(b < a for a, b in zip(el, el[1:]))):
            errors.append("eps_list: must be a strictly decreasing list of positive numbers")
        else:
            cfg.eps_list = [float(e) for e in el]
    R = doc.get("replications", 1)
    if not isinstance(R, int) or isinstance(R, bool) or R < 1:
        errors.append("replications: must be a positive integer")
    elif exp in ("clt", "corr") and R < 2:
        errors.append("replications: need at least 2")
    else:
        cfg.replications = R
    doc["replications"] = R
    seed = doc.get("seed", 42)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0 or seed >= 2 ** 64:
        errors.append("seed: must be an integer in [0, 2^64)")
    else:
        cfg.seed = seed
    doc["seed"] = seed

    tols = doc.get("tolerances", {})
    if not isinstance(tols, dict):
        errors.append("tolerances: must be an object")
        tols = {}
    merged = dict(DEFAULT_TOLERANCES)
    for k, v in tols.items():
        if k not in DEFAULT_TOLERANCES:
            errors.append(f"tolerances.{k}: unknown key")
        elif not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
            errors.append(f"tolerances.{k}: must be a positive number")
        else:
            merged[k] = float(v)
    cfg.tolerances = merged
    doc["tolerances"] = merged

    centering = doc.get("centering", "averaging" if exp == "corr" else "limit")
    if centering not in ("limit", "averaging"):
        errors.append("centering: must be 'limit' or 'averaging'")
    cfg.centering = centering
    doc["centering"] = centering

    cf = doc.get("convention_factor", 0.5)
    if cf not in (0.5, 1, 1.0):
        errors.append("convention_factor: must be 1 or 0.5")
    cfg.convention_factor = float(cf)
    doc["convention_factor"] = float(cf)

    pairs = doc.get("pairs", [list(p) for p in KT4_PAIRS])
    if (not isinstance(pairs, list) or not pairs
            or not all(isinstance(p, list) and len(p) == 2 and p[0] > 0 for p in pairs)):
        errors.append("pairs: must be a nonempty list of [alpha, eta] with alpha > 0")
    else:
        cfg.pairs = pairs
    if exp == "admissible":
        doc["pairs"] = pairs

    out = doc.get("output")
    if out is not None and not isinstance(out, str):
        errors.append("output: must be a string path prefix")
    cfg.output = out

    if exp in ("rate", "boundary") and cfg.points and cfg.domain is not None:
        if exp == "boundary" and cfg.domain.classify(cfg.points[0]) != "boundary":
            errors.append("point: boundary experiments need a boundary point")
    if exp in ("lln", "clt", "corr") and cfg.density is not None:
        if cfg.density.domain.bounding_box is None:
            errors.append("domain: stochastic experiments need a bounded domain")

    if errors:
        raise ConfigError(errors)
    cfg.spec = doc
    return cfg


def serialize_config(cfg: ExperimentConfig) -> str:
    """Normalized JSON text of ``cfg`` (defaults filled in)."""
    return json.dumps(cfg.spec, indent=2, sort_keys=True) + "\n"
