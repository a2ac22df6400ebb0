"""Seeded, replicated experiments for the law of large numbers, the CLT,
convergence rates, correlations and boundary limits.

Replication ``r`` at the ``i``-th entry of the n list draws its sample with
``derive_seed(master, i * R + r)``; replications run on a thread pool and
are always aggregated in replication order, so results do not depend on
the number of threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry as geo
from . import operators as ops
from . import stats
from .kernels import (KT4_PAIRS, Kernel, check_admissibility, first_moment_vector,
                      second_moment_matrix)
from .sampling import sample

DEFAULT_TOLERANCES = {
    "ks": 0.06,
    "variance_ratio": 0.15,
    "corr": 0.1,
    "slope": 0.05,
    "lln_median": 0.02,
    "quadrature": 1e-8,
    "plateau": 0.2,
    "max_abs_z": 0.5,
    "exact_floor": 1e-9,
    "boundary_slope": 0.5,
}


class ExperimentError(ValueError):
    pass


class ScheduleError(ExperimentError):
    pass


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class EpsilonSchedule:
    """``eps_n = c n^(-gamma)`` with validity flags for d and theta.

    CLT-valid iff ``1/(d+2+2 theta) < gamma < 1/d``; LLN-valid iff
    ``gamma < 1/(d+2)``.  With theta = 0 the upper CLT condition relaxes to
    ``n eps^(d+2)`` bounded above, i.e. ``gamma >= 1/(d+2)``, flagged by
    ``bounded_above``.
    """

    c: float
    gamma: float
    d: int
    theta: float
    clt_valid: bool
    lln_valid: bool
    bounded_above: bool

    def eps(self, n: int) -> float:
        return self.c * float(n) ** (-self.gamma)


def make_schedule(d: int, theta: float, gamma: float, c: float = 1.0) -> EpsilonSchedule:
    if not (gamma > 0 and c > 0):
        raise ScheduleError("gamma and c must be positive")
    if d < 1:
        raise ScheduleError("dimension must be positive")
    if not 0.0 <= theta <= 1.0:
        raise ScheduleError("theta must lie in [0, 1]")
    clt = 1.0 / (d + 2 + 2 * theta) < gamma < 1.0 / d
    lln = gamma < 1.0 / (d + 2)
    bounded = theta == 0.0 and 1.0 / (d + 2) <= gamma < 1.0 / d
    return EpsilonSchedule(float(c), float(gamma), int(d), float(theta), clt, lln, bounded)


# ---------------------------------------------------------------------------
# configuration and results


@dataclass
class ExperimentConfig:
    """A validated experiment description (see :mod:`graphlap.config`)."""

    experiment: str
    dim: int
    kernel: Optional[Kernel] = None
    density: object = None
    domain: object = None
    function: object = None
    points: list = field(default_factory=list)
    schedule: Optional[EpsilonSchedule] = None
    n_list: list = field(default_factory=list)
    eps_list: list = field(default_factory=list)
    replications: int = 1
    seed: int = 42
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    centering: str = "limit"
    convention_factor: float = ops.CONVENTION_FACTOR
    pairs: list = field(default_factory=lambda: [list(p) for p in KT4_PAIRS])
    output: Optional[str] = None
    spec: dict = field(default_factory=dict)

    def __eq__(self, other):
        return isinstance(other, ExperimentConfig) and self.spec == other.spec


@dataclass(frozen=True)
class Record:
    n: Optional[int]
    epsilon: Optional[float]
    replication: int
    value: float
    value2: Optional[float] = None


@dataclass
class ExperimentResult:
    experiment: str
    records: list
    summaries: list
    passed: bool
    details: dict = field(default_factory=dict)
    has_value2: bool = False


def _summary_row(n=None, eps=None, count=None, mean=None, variance=None, ks=None, corr=None,
                 median_error=None, verdict=None):
    return {"n": n, "epsilon": eps, "count": count, "mean": mean, "variance": variance,
            "ks": ks, "corr": corr, "median_error": median_error, "verdict": verdict}


def _replicate(fn, count: int, threads: int):
    if threads <= 1:
        return [fn(r) for r in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def _require(cond, msg):
    if not cond:
        raise ExperimentError(msg)


def _center(cfg: ExperimentConfig, p, eps):
    tol = cfg.tolerances["quadrature"]
    if cfg.centering == "averaging":
        return ops.averaging_operator(cfg.kernel, cfg.function, cfg.density, p, eps, tol).value
    return ops.combined_limit(cfg.kernel, cfg.function, cfg.density, p, tol=tol,
                              convention_factor=cfg.convention_factor).value


# ---------------------------------------------------------------------------
# stochastic experiments


def run_lln(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Errors ``|D_{eps_n,n} f(p) - limit|`` over the n list."""
    sch = cfg.schedule
    _require(sch is not None and sch.lln_valid, "schedule invalid for lln")
    p = np.asarray(cfg.points[0], dtype=float)
    tol = cfg.tolerances["quadrature"]
    target = ops.combined_limit(cfg.kernel, cfg.function, cfg.density, p, tol=tol,
                                convention_factor=cfg.convention_factor).value
    R = cfg.replications
    records, summaries, medians = [], [], []
    for i, n in enumerate(cfg.n_list):
        eps = sch.eps(n)

        def one(r, n=n, eps=eps, i=i):
            batch = sample(cfg.density, n, cfg.seed, replication=i * R + r)
            return abs(ops.empirical_laplacian(cfg.kernel, cfg.function, p, eps, batch) - target)

        errs = _replicate(one, R, threads)
        records += [Record(n, eps, r, e) for r, e in enumerate(errs)]
        s = stats.summarize(errs)
        _, med, _ = stats.median_quartiles(errs)
        medians.append(med)
        summaries.append(_summary_row(n, eps, s.count, s.mean, s.variance, median_error=med))
    # a median already at zero cannot decrease further and counts as converged
    decreasing = all(b < a or b == 0.0 for a, b in zip(medians, medians[1:]))
    final_ok = medians[-1] < cfg.tolerances["lln_median"]
    passed = decreasing and final_ok
    for row in summaries:
        row["verdict"] = "pass" if passed else "fail"
    details = {"target": target, "medians": medians, "medians_decreasing": decreasing,
               "final_median_ok": final_ok}
    return ExperimentResult("lln", records, summaries, passed, details)


def run_clt(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """``Z = sqrt(n eps^(d+2)) (D_{eps,n} f(p) - center)`` against ``N(0, s^2)``."""
    sch = cfg.schedule
    _require(sch is not None and sch.clt_valid, "schedule invalid for clt")
    p = np.asarray(cfg.points[0], dtype=float)
    d = cfg.dim
    tol = cfg.tolerances["quadrature"]
    s2 = ops.clt_variance(cfg.kernel, cfg.function, cfg.density, p, tol)
    R = cfg.replications
    records, summaries = [], []
    zs_last = None
    for i, n in enumerate(cfg.n_list):
        eps = sch.eps(n)
        center = _center(cfg, p, eps)
        scale = math.sqrt(n * eps ** (d + 2))

        def one(r, n=n, eps=eps, i=i, center=center, scale=scale):
            batch = sample(cfg.density, n, cfg.seed, replication=i * R + r)
            return scale * (ops.empirical_laplacian(cfg.kernel, cfg.function, p, eps, batch)
                            - center)

        zs = _replicate(one, R, threads)
        records += [Record(n, eps, r, z) for r, z in enumerate(zs)]
        s = stats.summarize(zs)
        ks = stats.ks_statistic(zs, math.sqrt(s2)) if s2 > 0 else None
        summaries.append(_summary_row(n, eps, s.count, s.mean, s.variance, ks=ks))
        zs_last = zs
    details = {"s2": s2, "degenerate": s2 == 0.0}
    last = summaries[-1]
    if s2 > 0:
        ratio = last["variance"] / s2
        ks_ok = last["ks"] < cfg.tolerances["ks"]
        ratio_ok = abs(ratio - 1.0) <= cfg.tolerances["variance_ratio"]
        passed = ks_ok and ratio_ok
        details.update(variance_ratio=ratio, ks=last["ks"], ks_ok=ks_ok, ratio_ok=ratio_ok)
    else:
        max_abs = float(np.max(np.abs(zs_last)))
        passed = max_abs < cfg.tolerances["max_abs_z"]
        details.update(max_abs_z=max_abs)
    for row in summaries:
        row["verdict"] = None
    last["verdict"] = "pass" if passed else "fail"
    return ExperimentResult("clt", records, summaries, passed, details)


def run_corr(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Correlation of ``Z_n(p1)`` and ``Z_n(p2)`` computed on shared samples."""
    sch = cfg.schedule
    _require(sch is not None and sch.clt_valid, "schedule invalid for corr")
    _require(len(cfg.points) == 2, "corr needs exactly two points")
    p1, p2 = (np.asarray(q, dtype=float) for q in cfg.points)
    _require(not np.array_equal(p1, p2), "corr needs two distinct points")
    _require(cfg.domain.is_interior(p1) and cfg.domain.is_interior(p2),
             "corr points must be interior")
    d = cfg.dim
    R = cfg.replications
    records, summaries, corrs = [], [], []
    for i, n in enumerate(cfg.n_list):
        eps = sch.eps(n)
        c1, c2 = _center(cfg, p1, eps), _center(cfg, p2, eps)
        scale = math.sqrt(n * eps ** (d + 2))

        def one(r, n=n, eps=eps, i=i, c1=c1, c2=c2, scale=scale):
            batch = sample(cfg.density, n, cfg.seed, replication=i * R + r)
            z1 = scale * (ops.empirical_laplacian(cfg.kernel, cfg.function, p1, eps, batch) - c1)
            z2 = scale * (ops.empirical_laplacian(cfg.kernel, cfg.function, p2, eps, batch) - c2)
            return z1, z2

        pairs = _replicate(one, R, threads)
        records += [Record(n, eps, r, a, b) for r, (a, b) in enumerate(pairs)]
        rho = stats.correlation(pairs)
        corrs.append(rho)
        s = stats.summarize([a for a, _ in pairs])
        summaries.append(_summary_row(n, eps, s.count, s.mean, s.variance, corr=rho))
    decreasing = all(abs(b) < abs(a) for a, b in zip(corrs, corrs[1:]))
    small = abs(corrs[-1]) < cfg.tolerances["corr"]
    passed = decreasing and small
    for row in summaries:
        row["verdict"] = "pass" if passed else "fail"
    details = {"correlations": corrs, "decreasing": decreasing, "final_below_threshold": small}
    return ExperimentResult("corr", records, summaries, passed, details, has_value2=True)


# ---------------------------------------------------------------------------
# deterministic experiments


def _eps_grid(cfg):
    _require(len(cfg.eps_list) >= 2, "eps_list needs at least two values")
    eps = [float(e) for e in cfg.eps_list]
    _require(all(b < a for a, b in zip(eps, eps[1:])), "eps_list must be strictly decreasing")
    return eps


def run_rate(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """``|D_eps f(p) - limit|`` on an eps grid and its log-log slope."""
    eps_list = _eps_grid(cfg)
    p = np.asarray(cfg.points[0], dtype=float)
    tol = cfg.tolerances["quadrature"]
    limit = ops.combined_limit(cfg.kernel, cfg.function, cfg.density, p, tol=tol,
                               convention_factor=cfg.convention_factor).value
    theta = cfg.schedule.theta if cfg.schedule is not None else cfg.function.theta
    records, summaries, errs = [], [], []
    for j, eps in enumerate(eps_list):
        val = ops.averaging_operator(cfg.kernel, cfg.function, cfg.density, p, eps, tol).value
        err = abs(val - limit)
        errs.append(err)
        records.append(Record(None, eps, j, err, val))
        summaries.append(_summary_row(eps=eps, count=1, median_error=err))
    details = {"limit": limit, "errors": errs, "theta": theta}
    if max(errs) < cfg.tolerances["exact_floor"]:
        passed = True
        verdict = "exact"
    else:
        slope = stats.loglog_slope(eps_list, errs)
        passed = abs(slope - theta) <= cfg.tolerances["slope"]
        verdict = "pass" if passed else "fail"
        details["slope"] = slope
    details["verdict"] = verdict
    for row in summaries:
        row["verdict"] = verdict
    return ExperimentResult("rate", records, summaries, passed, details, has_value2=True)


def run_boundary(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Boundary limit with and without the curvature correction.

    ``value`` is the error with the correction, ``value2`` the error of the
    cone operator alone.  With the correction the errors must decrease
    toward zero (strictly, with log-log slope at least ``boundary_slope``);
    when the correction is nonzero the uncorrected errors must end within
    ``plateau`` (relative) of its magnitude.
    """
    eps_list = _eps_grid(cfg)
    p = np.asarray(cfg.points[0], dtype=float)
    tol = cfg.tolerances["quadrature"]
    k, f, dens, S = cfg.kernel, cfg.function, cfg.density, cfg.domain
    _require(S.classify(p) == "boundary", "boundary experiments need a boundary point")
    avg = [ops.averaging_operator(k, f, dens, p, e, tol).value for e in eps_list]
    try:
        full = ops.combined_limit(k, f, dens, p, tol=tol, convention_factor=cfg.convention_factor)
    except ops.DivergentRegimeError as exc:
        resid = [ops.cancellation_residual(k, f, p, S, e, 1.0, tol) for e in eps_list]
        records = [Record(None, e, j, a, r) for j, (e, a, r) in enumerate(zip(eps_list, avg, resid))]
        summaries = [_summary_row(eps=e, count=1, verdict="divergent") for e in eps_list]
        details = {"divergent": True, "message": str(exc), "cone_residual": exc.residual,
                   "averaging": avg, "cancellation_residual": resid}
        return ExperimentResult("boundary", records, summaries, False, details, has_value2=True)
    corr = full.components.get("boundary", 0.0)
    cone_only = full.value - corr
    with_term = [abs(a - full.value) for a in avg]
    without = [abs(a - cone_only) for a in avg]
    decreasing = all(b < a for a, b in zip(with_term, with_term[1:]))
    floor = cfg.tolerances["exact_floor"]
    if max(with_term) < floor:
        converging = True
    else:
        converging = decreasing and stats.loglog_slope(eps_list, with_term) >= \
            cfg.tolerances["boundary_slope"]
    plateau_ok = None
    if abs(corr) > floor:
        plateau_ok = abs(without[-1] - abs(corr)) <= cfg.tolerances["plateau"] * abs(corr)
    passed = converging and plateau_ok is not False
    records = [Record(None, e, j, a, b) for j, (e, a, b) in enumerate(zip(eps_list, with_term,
                                                                          without))]
    verdict = "pass" if passed else "fail"
    summaries = [_summary_row(eps=e, count=1, mean=a, median_error=w, verdict=verdict)
                 for e, a, w in zip(eps_list, avg, with_term)]
    details = {"divergent": False, "limit": full.value, "components": full.components,
               "correction": corr, "errors_with_term": with_term,
               "errors_without_term": without, "converging": converging,
               "plateau_ok": plateau_ok, "convention_factor": cfg.convention_factor}
    return ExperimentResult("boundary", records, summaries, passed, details, has_value2=True)


def run_moments(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Moment matrices of the kernel over full space and, if a point is given, its cone."""
    k = cfg.kernel
    tol = cfg.tolerances["quadrature"]
    regions = [("full", geo.Cone.full(k.dim))]
    if cfg.points and cfg.domain is not None:
        cone = geo.cone_at(cfg.domain, cfg.points[0])
        if cone.kind != "full":
            regions.append(("cone", cone))
    details = {}
    records = []
    ok = True
    j = 0
    # power-1 moments are PSD only for nonnegative kernels; probe the sign
    probe = np.random.default_rng(0).normal(size=(1024, k.dim)) * 2.0
    nonneg = bool(np.all(k(probe[np.any(probe != 0, axis=1)]) >= 0))
    for label, cone in regions:
        for power in (1, 2):
            M = second_moment_matrix(k, cone, power, tol).matrix
            details[f"{label}_power{power}"] = M.tolist()
            sym = float(np.max(np.abs(M - M.T))) <= 2 * tol
            ok = ok and sym
            if power == 2 or nonneg:
                ok = ok and float(np.min(np.linalg.eigvalsh(0.5 * (M + M.T)))) >= -k.dim ** 2 * tol
            for v in M.ravel():
                records.append(Record(None, None, j, float(v)))
                j += 1
        v1 = first_moment_vector(k, cone, tol)
        details[f"{label}_first"] = v1.tolist()
    verdict = "pass" if ok else "fail"
    return ExperimentResult("moments", records, [_summary_row(count=len(records), verdict=verdict)],
                            ok, details)


def run_admissible(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Analytic and numeric admissibility verdicts for the configured moment pairs.

    Passes when every pair is finite and the two methods agree wherever the
    analytic verdict is available.
    """
    k = cfg.kernel
    pairs = [tuple(p) for p in cfg.pairs]
    numeric = check_admissibility(k, pairs, method="numeric")
    analytic = check_admissibility(k, pairs, method="analytic")
    records = []
    rows = []
    agree = True
    for j, (a, nv) in enumerate(zip(analytic.verdicts, numeric.verdicts)):
        code = {"finite": 1.0, "divergent": 0.0, "unknown": float("nan")}
        records.append(Record(None, None, j, code[a.verdict], code[nv.verdict]))
        if a.verdict != "unknown" and a.verdict != nv.verdict:
            agree = False
        rows.append({"alpha": a.alpha, "eta": a.eta, "analytic": a.verdict,
                     "numeric": nv.verdict})
    admissible = all((r["analytic"] if r["analytic"] != "unknown" else r["numeric"]) == "finite"
                     for r in rows)
    passed = agree and admissible
    verdict = "pass" if passed else "fail"
    return ExperimentResult("admissible", records,
                            [_summary_row(count=len(records), verdict=verdict)], passed,
                            {"pairs": rows, "methods_agree": agree, "admissible": admissible},
                            has_value2=True)


RUNNERS = {
    "lln": run_lln,
    "clt": run_clt,
    "rate": run_rate,
    "corr": run_corr,
    "boundary": run_boundary,
    "moments": run_moments,
    "admissible": run_admissible,
}


def run(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    if cfg.experiment not in RUNNERS:
        raise ExperimentError(f"unknown experiment {cfg.experiment!r}")
    if threads < 1:
        raise ExperimentError("threads must be at least 1")
    return RUNNERS[cfg.experiment](cfg, threads)
