"""Command-line front end.

    kontsevich-bkp verify campaign.json [--out report.json] [--jobs K] [--seed S]
    kontsevich-bkp cache warm|clear|stat [--cutoff W] [--dir PATH]

Exit status: 0 when every check passes, 1 when any check fails or errors,
2 when the campaign file cannot be parsed or validated.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import as_rational, strict_partitions
from .cache import CONVENTION_VERSION, QCache
from .gaussmoments import PotentialSpec, SpectralData, reference_moments, trace_moment, _WickEvaluator

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


# -- parameter parsing ------------------------------------------------------


def _rat(x) -> Fraction:
    if isinstance(x, float):
        raise ConfigError(f"exact parameters must be strings or integers, got float {x!r}")
    try:
        return as_rational(x)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _num(x) -> float:
    # numeric parameters accept floats too, but strings keep the file exact
    return float(x) if isinstance(x, (int, float)) else float(_rat(x))


def _lambdas_exact(p):
    return tuple(_rat(v) for v in p["lambdas"])


def _lambdas_float(p):
    return tuple(_num(v) for v in p["lambdas"])


def _poly_dict(d, conv):
    return {int(k): conv(v) for k, v in (d or {}).items()}


# -- checks -------------------------------------------------------------------
# Each check takes (params, seed) and returns (passed, measure, detail).


def _check_cauchy(p, seed):
    from .qschur import verify_cauchy

    d = verify_cauchy(p["cutoff"])
    return d == 0, str(d), {}


def _check_hook(p, seed):
    from .qschur import hook_ratio_check

    bad = [str(lam) for lam in strict_partitions(p["max_weight"])[1:] if not hook_ratio_check(lam)[2]]
    return not bad, len(bad), {"failing": bad}


def _check_moments_table(p, seed):
    spec = SpectralData(_lambdas_exact(p))
    ev = _WickEvaluator(spec)
    ref = reference_moments(spec)
    bad = {}
    for exps, want in ref.items():
        got = trace_moment(spec, exps, _evaluator=ev)
        if got != want:
            bad[",".join(map(str, exps))] = [str(got), str(want)]
    return not bad, len(bad), {"mismatches": bad}


def _check_gaussian_average(p, seed):
    from .qschur import gaussian_average_q, wick_average_q

    spec = SpectralData(_lambdas_exact(p))
    worst = Fraction(0)
    for lam in strict_partitions(p["max_weight"])[1:]:
        diff = abs(gaussian_average_q(lam, spec) - wick_average_q(lam.doubled(), spec))
        worst = max(worst, diff)
    return worst == 0, str(worst), {}


def _check_hirota(p, seed):
    from .hirota import BKP_EQ6, BKP_EQ8, bkp_equation_residuals, hirota_bilinear, tau_from_moments, tau_orders_from_moments

    spec = SpectralData(_lambdas_exact(p))
    v0 = _poly_dict(p.get("v0"), _rat)
    if not v0:
        res = bkp_equation_residuals(tau_from_moments(spec, cutoff=p["cutoff"]))
    else:
        orders = tau_orders_from_moments(spec, PotentialSpec(v0, p["order"]), p["cutoff"])
        res = {}
        for k in range(len(orders)):
            for name, P in (("hirota6", BKP_EQ6), ("hirota8", BKP_EQ8)):
                res[f"{name}_g{k}"] = sum(
                    (hirota_bilinear(P, orders[i], orders[k - i]) for i in range(k + 1)), Fraction(0)
                )
    worst = max(abs(v) for v in res.values())
    return worst == 0, str(worst), {"residuals": {k: str(v) for k, v in res.items()}}


def _check_bkp_residue(p, seed):
    from .hirota import bkp_residue_defect, tau_from_moments

    spec = SpectralData(_lambdas_exact(p))
    d = bkp_residue_defect(tau_from_moments(spec, cutoff=p["cutoff"]), p["cutoff"])
    return d.is_zero(), str(d.max_abs_coefficient()), {"terms": len(d)}


def _kernel_spec(p):
    from .pvquad import KernelSpec

    lam = _lambdas_float(p)
    return KernelSpec(len(lam), lam, _poly_dict(p.get("v0"), _num), _poly_dict(p.get("t"), _num))


def _check_theorem1(p, seed):
    from .pvquad import z_direct, z_theorem1

    spec = _kernel_spec(p)
    res = z_theorem1(spec)
    detail = {"z_theorem1": res.value, "asymmetry": res.asymmetry, "pf2_det_rel": res.pf2_det_rel}
    if not spec.has_potential:
        ref = 1.0
    elif spec.N == 2:
        ref = z_direct(spec)[0]
    else:
        detail["note"] = "no deterministic reference for N > 2 with a potential; see mc-cross"
        return res.asymmetry < 1e-8, res.asymmetry, detail
    detail["reference"] = ref
    rel = abs(res.value - ref) / abs(ref)
    return rel <= p["tolerance"], rel, detail


def debruijn_case(case: str, lambdas=(1.0, 2.0)):
    """(f0, f1, rho) for the two standard configurations.

    ``exp``: f_m(xi) = exp(-(lambda_{m+1} - lambda_min) xi / 2), rho = exp(-lambda_min x^2 / 2).
    ``poly``: f0 = 1, f1(xi) = xi, rho = exp(-x^2 / 2).
    """
    if case == "exp":
        l0, l1 = lambdas[:2]
        lmin = min(lambdas)

        def f0(s):
            return np.exp(-(l0 - lmin) * s / 2)

        def f1(s):
            return np.exp(-(l1 - lmin) * s / 2)

        def rho(x):
            return np.exp(-lmin * x * x / 2)

    elif case == "poly":

        def f0(s):
            return np.ones_like(s)

        def f1(s):
            return s

        def rho(x):
            return np.exp(-x * x / 2)

    else:
        raise ValueError(f"unknown de Bruijn case {case!r}")
    return f0, f1, rho


def _check_debruijn(p, seed):
    from .pvquad import debruijn_pv_check

    f0, f1, rho = debruijn_case(p["case"], _lambdas_float(p))
    res = debruijn_pv_check(f0, f1, rho)
    return res.rel_err <= p["tolerance"], res.rel_err, {"direct": res.direct, "pfaffian_side": res.pfaffian_side}


def _check_schur_pfaffian(p, seed):
    from .pvquad import pfaffian, schur_pfaffian_check

    rng = np.random.default_rng([seed, 9])
    worst_schur = 0.0
    for n in p["sizes"]:
        for _ in range(p["draws"]):
            x = np.arange(1, n + 1) + rng.uniform(0, 0.5, n)
            worst_schur = max(worst_schur, schur_pfaffian_check(x)[2])
    worst_det = 0.0
    for _ in range(p["matrices"]):
        n = 2 * int(rng.integers(1, 5))
        a = rng.standard_normal((n, n))
        a = a - a.T
        pf, det = pfaffian(a), np.linalg.det(a)
        worst_det = max(worst_det, abs(pf * pf - det) / abs(det))
    worst = max(worst_schur, worst_det)
    return worst <= p["tolerance"], worst, {"schur": worst_schur, "pf2_det": worst_det}


def _check_mc_cross(p, seed):
    from .pvquad import mc_z_estimate, z_theorem1

    spec = _kernel_spec(p)
    mean, se = mc_z_estimate(spec, p["samples"], seed)
    if spec.N % 2:
        raise ValueError("mc-cross compares with the Pfaffian formula, which needs even N")
    ref = z_theorem1(spec).value
    z = abs(mean - ref) / se if se else (0.0 if mean == ref else math.inf)
    return z <= p["sigmas"], z, {"mean": mean, "stderr": se, "reference": ref}


@dataclass(frozen=True)
class CheckDef:
    run: object
    defaults: dict = field(default_factory=dict)
    required: tuple = ()


CHECKS: dict[str, CheckDef] = {
    "cauchy": CheckDef(_check_cauchy, {"cutoff": 8}),
    "hook": CheckDef(_check_hook, {"max_weight": 10}),
    "moments-table": CheckDef(_check_moments_table, {}, ("lambdas",)),
    "gaussian-average": CheckDef(_check_gaussian_average, {"max_weight": 3}, ("lambdas",)),
    "hirota-eqs": CheckDef(_check_hirota, {"cutoff": 8, "v0": None, "order": 1}, ("lambdas",)),
    "bkp-residue": CheckDef(_check_bkp_residue, {"cutoff": 6}, ("lambdas",)),
    "theorem1": CheckDef(_check_theorem1, {"v0": None, "t": None, "tolerance": 1e-6}, ("lambdas",)),
    "debruijn": CheckDef(_check_debruijn, {"lambdas": ["1", "2"], "tolerance": 1e-6}, ("case",)),
    "schur-pfaffian": CheckDef(
        _check_schur_pfaffian, {"sizes": [2, 4, 6], "draws": 20, "matrices": 100, "tolerance": 1e-10}
    ),
    "mc-cross": CheckDef(_check_mc_cross, {"v0": None, "t": None, "samples": 10**6, "sigmas": 3.0}, ("lambdas",)),
}


# -- campaign --------------------------------------------------------------------


def load_campaign(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read campaign: {exc}") from None
    if not isinstance(data, dict) or not isinstance(data.get("checks", []), list):
        raise ConfigError("campaign must be an object with a 'checks' list")
    checks = []
    for i, entry in enumerate(data.get("checks", [])):
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError(f"check #{i} needs a 'name'")
        name = entry["name"]
        if name not in CHECKS:
            raise ConfigError(f"unknown check {name!r}")
        spec = CHECKS[name]
        params = {k: v for k, v in entry.items() if k != "name"}
        unknown = set(params) - set(spec.defaults) - set(spec.required)
        if unknown:
            raise ConfigError(f"check {name!r}: unknown parameters {sorted(unknown)}")
        missing = [k for k in spec.required if k not in params]
        if missing:
            raise ConfigError(f"check {name!r}: missing parameters {missing}")
        if "lambdas" in params:
            if not isinstance(params["lambdas"], list) or not params["lambdas"]:
                raise ConfigError(f"check {name!r}: 'lambdas' must be a nonempty list")
            for v in params["lambdas"]:
                if not isinstance(v, float):
                    _rat(v)
        checks.append({"name": name, "params": {**spec.defaults, **params}})
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    return {"checks": checks, "seed": seed}


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def run_check(name: str, params: dict, seed: int) -> dict:
    start = time.perf_counter()
    try:
        passed, measure, detail = CHECKS[name].run(params, seed)
        status = "pass" if passed else "fail"
        message = None
    except Exception as exc:  # reported per check
        status, measure, detail, message = "error", None, {}, f"{type(exc).__name__}: {exc}"
    out = {
        "name": name,
        "status": status,
        "measure": _jsonable(measure),
        "params": _jsonable(params),
        "detail": _jsonable(detail),
        "wall_time": round(time.perf_counter() - start, 6),
    }
    if message:
        out["error"] = message
    return out


def run_campaign(campaign: dict, jobs: int = 1) -> dict:
    seed = campaign["seed"]
    tasks = [(c["name"], c["params"], seed) for c in campaign["checks"]]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_check, *zip(*tasks)))
    else:
        results = [run_check(*t) for t in tasks]
    counts = {s: sum(r["status"] == s for r in results) for s in ("pass", "fail", "error")}
    return {
        "artifact": "kontsevich_bkp",
        "version": __version__,
        "convention": CONVENTION_VERSION,
        "seed": seed,
        "summary": counts,
        "checks": results,
    }


def _print_summary(report: dict, stream=None):
    stream = stream or sys.stdout
    for r in report["checks"]:
        extra = r.get("error") or f"measure={r['measure']}"
        print(f"{r['status'].upper():5s} {r['name']:18s} {extra}  ({r['wall_time']:.2f}s)", file=stream)
    s = report["summary"]
    print(f"{s['pass']} passed, {s['fail']} failed, {s['error']} errors", file=stream)


def cmd_verify(args) -> int:
    try:
        campaign = load_campaign(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        campaign["seed"] = args.seed
    report = run_campaign(campaign, jobs=max(1, args.jobs))
    _print_summary(report)
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    ok = report["summary"]["fail"] == 0 and report["summary"]["error"] == 0
    return EXIT_OK if ok else EXIT_FAIL


def cmd_cache(args) -> int:
    from .qschur import q_schur

    cache = QCache(args.dir)
    if args.action == "warm":
        for lam in strict_partitions(args.cutoff):
            q_schur(lam, cutoff=args.cutoff, cache=cache)
        info = cache.stat()
    elif args.action == "clear":
        info = {"removed": cache.clear(), **cache.stat()}
    else:
        info = cache.stat()
    print(json.dumps(info, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kontsevich-bkp", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run a verification campaign")
    v.add_argument("config")
    v.add_argument("--out", help="write the JSON report here")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--seed", type=int, default=None, help="overrides the campaign seed")
    v.set_defaults(func=cmd_verify)
    c = sub.add_parser("cache", help="manage the Q-function coefficient cache")
    c.add_argument("action", choices=["warm", "clear", "stat"])
    c.add_argument("--cutoff", type=int, default=8)
    c.add_argument("--dir", default=None, help="cache root (default: $KONTSEVICH_BKP_CACHE or ~/.cache)")
    c.set_defaults(func=cmd_cache)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
