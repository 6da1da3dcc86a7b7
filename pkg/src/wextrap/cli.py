"""Command-line driver: validate experiment configs, run them, emit artifacts.

Usage:
  wextrap run CONFIG.json [--output-dir DIR]
  wextrap run --preset NAME [--override key=value]... [--output-dir DIR]
  wextrap presets
  wextrap validate CONFIG.json

Exit codes: 0 success, 2 config error, 3 compute error, 4 inconclusive.
Runs are deterministic given (config, seed); every numeric threshold used
during a run is echoed into the output provenance block.  The environment
variable WEXTRAP_THREADS caps worker parallelism (computations are
reduction-order independent, so results do not depend on it).
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import __version__
from .characterization import (limited_range_criterion, offdiag_criterion,
                               verify_equivalence)
from .compactness import boundedness_sweep, compactness_contrast
from .grids import DIVERGENCE_RATIO, CubeFamily, Grid
from .interpolation import (DiagonalComponentwiseCase, DiagonalVectorCase,
                            OffdiagonalComponentwiseCase, OffdiagonalVectorCase,
                            solve_theta)
from .operators import (FourierMultiplierOperator, FractionalIntegralOperator,
                        KernelSpec, RankOneOperator, SymbolSpec,
                        TruncatedKernelOperator, ZeroOperator, log_symbol,
                        smooth_bump, symbol_sobolev_norm)
from .presets import list_presets, preset_config
from .serialization import canonical_json, write_csv
from .weights import (ConstantWeight, Exponents, LogBlowupWeight, PowerWeight,
                      PowerOfWeight, ProductWeight, Verdict, WeightSpec,
                      as_fraction, bmo_norm, membership, muckenhoupt_constant,
                      muckenhoupt_pq_constant, multilinear_constant,
                      multilinear_limited_range_constant,
                      multilinear_offdiag_constant)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3
EXIT_INCONCLUSIVE = 4

EXPERIMENTS = ("weight-constant", "characterize", "solve-theta",
               "product-bound", "boundedness-sweep", "compactness-contrast",
               "symbol-norm")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- parsing

def parse_weight(d: dict) -> WeightSpec:
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigError(f"weight descriptor must be a dict with 'type': {d!r}")
    t = d["type"]
    if t == "constant":
        return ConstantWeight(float(d.get("value", 1.0)))
    if t == "power":
        return PowerWeight(tuple(np.atleast_1d(d.get("center", [0.0])).tolist()),
                           as_fraction(d.get("exponent", 0)))
    if t == "log_blowup":
        return LogBlowupWeight(tuple(np.atleast_1d(d.get("center", [0.0])).tolist()))
    if t == "product":
        return ProductWeight(tuple(parse_weight(f) for f in d["factors"]))
    if t == "power_of":
        return PowerOfWeight(parse_weight(d["base"]), as_fraction(d["exponent"]))
    raise ConfigError(f"unknown weight type {t!r}")


def parse_pointwise(d: dict) -> Callable:
    """A pointwise-evaluable function: a weight descriptor or a symbol tag."""
    t = d.get("type")
    if t == "bump":
        return smooth_bump(float(d.get("halfwidth", 2.0)),
                           float(d.get("amplitude", 1.0)),
                           float(d.get("center", 0.0)))
    if t == "log_abs":
        return log_symbol(float(d.get("center", 0.0)))
    if t == "coordinate":
        return lambda x: np.asarray(x, dtype=float)
    return parse_weight(d)


def parse_family(d: dict) -> CubeFamily:
    try:
        return CubeFamily(int(d["dim"]), float(d["half_width"]),
                          int(d["min_level"]), int(d["max_level"]),
                          tuple(float(s) for s in d.get("shifts", [0.0])),
                          tuple(float(v) for v in d.get("origin", [])))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad family: {exc}") from exc


def _radial_cutoff(lo: float, hi: float) -> Callable:
    from .operators import _smoothstep

    def cut(r):
        return _smoothstep((hi - np.asarray(r, dtype=float)) / (hi - lo))

    return cut


def parse_symbol(d: dict) -> SymbolSpec:
    name = d.get("name")
    if name == "identity":
        return SymbolSpec(lambda a, b: np.ones(np.broadcast(a, b).shape),
                          name="identity")
    if name == "decaying":
        decay = float(d.get("decay", 1.0))
        cutoff = d.get("cutoff")
        cut = (None if cutoff is None
               else _radial_cutoff(float(cutoff[0]), float(cutoff[1])))

        def sigma(a, b):
            a = np.asarray(a, dtype=float)
            b = np.asarray(b, dtype=float)
            out = (1.0 + a ** 2 + b ** 2) ** (-decay / 2.0)
            if cut is not None:
                out = out * cut(np.sqrt(a ** 2 + b ** 2))
            return out

        return SymbolSpec(sigma, name="decaying")
    if name == "first_slot":
        def sigma(a, b):
            a = np.asarray(a, dtype=float)
            return (1.0 + a ** 2) ** -0.5 * np.ones(np.broadcast(a, b).shape)

        return SymbolSpec(sigma, name="first_slot")
    if name == "translation":
        h = float(d.get("offset", 0.0))

        def sigma(a, b):
            return np.exp(2j * np.pi * (np.asarray(a) + np.asarray(b)) * h)

        return SymbolSpec(sigma, name="translation")
    raise ConfigError(f"unknown symbol {name!r}")


def _cz_model_kernel(rho: float) -> KernelSpec:
    def kernel(x, y1, y2):
        s = np.abs(x - y1) + np.abs(x - y2)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.sign(x - y1) / s ** 2

    return KernelSpec(kernel, smoothness_order=1.0, truncation_radius=rho)


def parse_operator(d: dict):
    t = d.get("type")
    if t == "fractional_integral":
        return FractionalIntegralOperator(float(d["beta"]), int(d.get("dim", 1)),
                                          d.get("convention", "homogeneous"))
    if t == "fourier_multiplier":
        return FourierMultiplierOperator(parse_symbol(d["symbol"]))
    if t == "cz_model":
        return TruncatedKernelOperator(_cz_model_kernel(float(d.get("rho", 0.25))))
    if t == "rank_one":
        bump = smooth_bump(1.0)
        return RankOneOperator(bump, bump, bump)
    if t == "zero":
        return ZeroOperator()
    raise ConfigError(f"unknown operator type {t!r}")


def parse_case(d: dict):
    tag = d.get("tag")
    if tag == "diagonal_vector":
        return DiagonalVectorCase(tuple(as_fraction(v) for v in d["s"]))
    if tag == "diagonal_componentwise":
        return DiagonalComponentwiseCase(tuple(as_fraction(v) for v in d["s"]))
    if tag == "offdiagonal_vector":
        return OffdiagonalVectorCase(as_fraction(d["alpha"]))
    if tag == "offdiagonal_componentwise":
        return OffdiagonalComponentwiseCase(as_fraction(d["alpha"]))
    raise ConfigError(f"unknown case tag {tag!r}")


# ------------------------------------------------------------- validation

def _require(cfg: dict, keys: list[str], errors: list[str]) -> None:
    for k in keys:
        if k not in cfg:
            errors.append(f"missing required key {k!r}")


def validate_config(cfg: dict) -> list[str]:
    """Full validation; returns a list of human-readable problems."""
    errors: list[str] = []
    if not isinstance(cfg, dict):
        return ["config must be a JSON object"]
    exp = cfg.get("experiment")
    if exp not in EXPERIMENTS:
        return [f"experiment must be one of {EXPERIMENTS}, got {exp!r}"]
    if not isinstance(cfg.get("seed", 0), int):
        errors.append("seed must be an integer")

    def try_parse(fn, value, what):
        try:
            fn(value)
        except (ConfigError, ValueError, KeyError, TypeError) as exc:
            errors.append(f"bad {what}: {exc}")

    if exp == "weight-constant":
        _require(cfg, ["class", "family"], errors)
        if errors:
            return errors
        try_parse(parse_family, cfg["family"], "family")
        kind = cfg["class"].get("kind")
        if kind not in ("ap", "apq", "multilinear", "multilinear_limited",
                        "multilinear_offdiag", "bmo"):
            errors.append(f"unknown class kind {kind!r}")
        elif kind in ("ap", "apq", "bmo"):
            _require(cfg, ["weight"], errors)
            if "weight" in cfg:
                try_parse(parse_pointwise, cfg["weight"], "weight")
            if kind == "ap":
                _require(cfg["class"], ["p"], errors)
            if kind == "apq":
                _require(cfg["class"], ["p", "q"], errors)
        else:
            _require(cfg["class"], ["p"], errors)
            if "weights" not in cfg:
                errors.append("multilinear classes need a 'weights' list")
            else:
                for w in cfg["weights"]:
                    try_parse(parse_weight, w, "weight")
            if kind == "multilinear_limited":
                _require(cfg["class"], ["s"], errors)
            if kind == "multilinear_offdiag":
                _require(cfg["class"], ["p_star"], errors)
    elif exp == "characterize":
        _require(cfg, ["theorem", "weights", "p", "family"], errors)
        if errors:
            return errors
        if cfg["theorem"] not in ("limited_range", "offdiag"):
            errors.append("theorem must be 'limited_range' or 'offdiag'")
        if cfg["theorem"] == "limited_range" and "s" not in cfg:
            errors.append("limited_range characterization needs 's'")
        if cfg["theorem"] == "offdiag" and "p_star" not in cfg:
            errors.append("offdiag characterization needs 'p_star'")
        for w in cfg["weights"]:
            try_parse(parse_weight, w, "weight")
        try_parse(parse_family, cfg["family"], "family")
        try_parse(lambda p: Exponents(tuple(as_fraction(v) for v in p)),
                  cfg["p"], "exponents")
    elif exp in ("solve-theta", "product-bound"):
        _require(cfg, ["case", "q", "r", "v", "w", "family"], errors)
        if errors:
            return errors
        try_parse(parse_case, cfg["case"], "case")
        for key in ("v", "w"):
            for w in cfg[key]:
                try_parse(parse_weight, w, f"{key} weight")
        try_parse(parse_family, cfg["family"], "family")
        if "bound_family" in cfg:
            try_parse(parse_family, cfg["bound_family"], "bound_family")
        if len(cfg["q"]) != len(cfg["r"]) or len(cfg["v"]) != len(cfg["w"]) \
                or len(cfg["q"]) != len(cfg["v"]):
            errors.append("q, r, v, w must have equal lengths")
        for key in ("q", "r"):
            for v in cfg[key]:
                try_parse(as_fraction, v, f"{key} exponent")
    elif exp == "boundedness-sweep":
        _require(cfg, ["operator", "exponents", "weights", "grid"], errors)
        if errors:
            return errors
        try_parse(parse_operator, cfg["operator"], "operator")
        if len(cfg["exponents"]) != 3:
            errors.append("exponents must be [q1, q2, q]")
        for row in cfg["weights"]:
            for key in ("w1", "w2", "w_out"):
                if key in row:
                    try_parse(parse_weight, row[key], f"sweep {key}")
        gd = cfg["grid"]
        if "n" not in gd or "half_width" not in gd:
            errors.append("grid needs n and half_width")
    elif exp == "compactness-contrast":
        _require(cfg, ["operator", "index", "b_cmo", "b_bmo", "refinements",
                       "k_probe"], errors)
        if errors:
            return errors
        try_parse(parse_operator, cfg["operator"], "operator")
        try_parse(parse_pointwise, cfg["b_cmo"], "b_cmo")
        try_parse(parse_pointwise, cfg["b_bmo"], "b_bmo")
        if tuple(cfg["index"]) not in ((1, 0), (0, 1), (1, 1)):
            errors.append("index must be one of [1,0], [0,1], [1,1]")
        refs = cfg["refinements"]
        if not refs or sorted(refs) != list(refs):
            errors.append("refinements must be a nonempty increasing list")
        if not isinstance(cfg["k_probe"], int) or cfg["k_probe"] < 1:
            errors.append("k_probe must be a positive integer")
    elif exp == "symbol-norm":
        _require(cfg, ["symbol"], errors)
        if errors:
            return errors
        try_parse(parse_symbol, cfg["symbol"], "symbol")
        if ("s" in cfg) == ("s_vec" in cfg):
            errors.append("exactly one of s, s_vec is required")
    return errors


# ------------------------------------------------------------------ runs

def _provenance(cfg: dict) -> dict:
    # the worker-thread cap is deliberately not echoed: it cannot affect
    # any computed value, and provenance must be environment independent
    return {
        "config": copy.deepcopy(cfg),
        "package_version": __version__,
        "divergence_ratio": DIVERGENCE_RATIO,
    }


def _run_weight_constant(cfg: dict) -> tuple[int, dict, Optional[list]]:
    fam = parse_family(cfg["family"])
    res = int(cfg.get("resolution", 64))
    kind = cfg["class"]["kind"]
    if kind == "bmo":
        fn = lambda f: bmo_norm(parse_pointwise(cfg["weight"]), f, res)
    elif kind == "ap":
        w = parse_weight(cfg["weight"])
        fn = lambda f: muckenhoupt_constant(w, as_fraction(cfg["class"]["p"]), f, res)
    elif kind == "apq":
        w = parse_weight(cfg["weight"])
        fn = lambda f: muckenhoupt_pq_constant(
            w, as_fraction(cfg["class"]["p"]), as_fraction(cfg["class"]["q"]), f, res)
    else:
        wvec = tuple(parse_weight(d) for d in cfg["weights"])
        pvec = Exponents(tuple(as_fraction(v) for v in cfg["class"]["p"]))
        if kind == "multilinear":
            fn = lambda f: multilinear_constant(wvec, pvec, f, res)
        elif kind == "multilinear_limited":
            svec = Exponents(tuple(as_fraction(v) for v in cfg["class"]["s"]))
            fn = lambda f: multilinear_limited_range_constant(wvec, pvec, svec, f, res)
        else:
            fn = lambda f: multilinear_offdiag_constant(
                wvec, pvec, as_fraction(cfg["class"]["p_star"]), f, res)
    constant = fn(fam)
    prov = _provenance(cfg)
    prov["applied"] = {"resolution": res,
                       "growth_levels": int(cfg.get("growth_levels", 2)),
                       "threshold": float(cfg.get("threshold", 0.01)),
                       "membership": bool(cfg.get("membership", False))}
    out = {"experiment": "weight-constant", "value": constant.value,
           "tag": constant.tag, "family": constant.family,
           "provenance": prov}
    if cfg.get("membership", False):
        rep = membership(fn, fam, int(cfg.get("growth_levels", 2)),
                         float(cfg.get("threshold", 0.01)))
        out["membership"] = rep.descriptor()
        code = EXIT_OK if rep.verdict is not Verdict.INCONCLUSIVE else EXIT_INCONCLUSIVE
        return code, out, None
    return EXIT_OK, out, None


def _run_characterize(cfg: dict) -> tuple[int, dict, Optional[list]]:
    fam = parse_family(cfg["family"])
    res = int(cfg.get("resolution", 64))
    growth = int(cfg.get("growth_levels", 2))
    threshold = float(cfg.get("threshold", 0.01))
    wvec = tuple(parse_weight(d) for d in cfg["weights"])
    pvec = Exponents(tuple(as_fraction(v) for v in cfg["p"]))
    if cfg["theorem"] == "limited_range":
        svec = Exponents(tuple(as_fraction(v) for v in cfg["s"]))
        criterion = limited_range_criterion(pvec, svec)
        direct = lambda f: multilinear_limited_range_constant(wvec, pvec, svec, f, res)
    else:
        p_star = as_fraction(cfg["p_star"])
        criterion = offdiag_criterion(pvec, p_star)
        direct = lambda f: multilinear_offdiag_constant(wvec, pvec, p_star, f, res)
    report = verify_equivalence(wvec, criterion, direct, fam, pvec, res,
                                growth, threshold)
    prov = _provenance(cfg)
    prov["applied"] = {"resolution": res, "growth_levels": growth,
                       "threshold": threshold}
    out = {"experiment": "characterize", "criterion": criterion.descriptor(),
           "report": report.descriptor(), "provenance": prov}
    code = EXIT_OK if report.conclusive else EXIT_INCONCLUSIVE
    return code, out, None


def _solve_from_config(cfg: dict):
    depth = int(cfg.get("schedule_depth", 20))
    schedule = tuple(Fraction(1, 2 ** k) for k in range(1, depth + 1))
    return solve_theta(
        parse_case(cfg["case"]),
        tuple(as_fraction(v) for v in cfg["q"]),
        tuple(as_fraction(v) for v in cfg["r"]),
        tuple(parse_weight(d) for d in cfg["v"]),
        tuple(parse_weight(d) for d in cfg["w"]),
        parse_family(cfg["family"]),
        c_rhi=float(cfg.get("c_rhi", 2.0)),
        theta_schedule=schedule,
        resolution=int(cfg.get("resolution", 64)),
        growth_levels=int(cfg.get("growth_levels", 2)),
        stability_threshold=float(cfg.get("stability_threshold", 0.01)),
        identity_samples=int(cfg.get("identity_samples", 1000)),
        seed=int(cfg.get("seed", 0)),
    )


def _run_solve_theta(cfg: dict) -> tuple[int, dict, Optional[list]]:
    outcome = _solve_from_config(cfg)
    out = {"experiment": cfg["experiment"], **outcome.to_json_dict(),
           "provenance_run": _provenance(cfg)}
    return (EXIT_OK if outcome.success else EXIT_INCONCLUSIVE), out, None


def _run_product_bound(cfg: dict) -> tuple[int, dict, Optional[list]]:
    from .interpolation import product_bound_check

    outcome = _solve_from_config(cfg)
    out = {"experiment": cfg["experiment"], **outcome.to_json_dict(),
           "provenance_run": _provenance(cfg)}
    if not outcome.success:
        return EXIT_INCONCLUSIVE, out, None
    bound_fam = parse_family(cfg.get("bound_family", cfg["family"]))
    res = int(cfg.get("resolution", 64))
    cert = outcome.certificate
    if hasattr(cert, "components"):
        bounds = [[b.descriptor() for b in product_bound_check(comp, bound_fam,
                                                               res)]
                  for comp in cert.components]
    else:
        bounds = [b.descriptor() for b in product_bound_check(cert, bound_fam,
                                                              res)]
    out["product_bounds_on_family"] = {"family": bound_fam.descriptor(),
                                       "bounds": bounds}
    return EXIT_OK, out, None


def _default_trials(grid_half_width: float):
    bump = smooth_bump(grid_half_width / 2.0)
    narrow = smooth_bump(grid_half_width / 8.0)

    def oscillatory(x):
        return np.cos(2 * np.pi * np.asarray(x)) * bump(x)

    def indicator(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= grid_half_width / 4.0, 1.0, 0.0)

    return [("bump", bump, bump), ("narrow-bump", narrow, narrow),
            ("oscillatory", oscillatory, oscillatory),
            ("indicator", indicator, indicator)]


def _run_boundedness_sweep(cfg: dict) -> tuple[int, dict, Optional[list]]:
    op = parse_operator(cfg["operator"])
    gd = cfg["grid"]
    grid = Grid(1, int(gd["n"]), float(gd["half_width"]))
    q1, q2, q = (float(as_fraction(v)) for v in cfg["exponents"])
    fam_cfg = cfg.get("weight_family", {"dim": 1, "half_width": gd["half_width"],
                                        "min_level": 0, "max_level": 6})
    fam = parse_family(fam_cfg)
    qvec = Exponents((as_fraction(cfg["exponents"][0]),
                     as_fraction(cfg["exponents"][1])))
    weight_rows = []
    for row in cfg["weights"]:
        w1 = parse_weight(row["w1"]) if "w1" in row else None
        w2 = parse_weight(row["w2"]) if "w2" in row else None
        measured = None
        if w1 is not None and w2 is not None:
            measured = multilinear_constant((w1, w2), qvec, fam,
                                            int(cfg.get("resolution", 64))).value
        weight_rows.append({
            "label": row.get("label", ""),
            "w1": w1,
            "w2": w2,
            "w_out": parse_weight(row["w_out"]) if "w_out" in row else None,
            "params": {k: row[k] for k in row if k.startswith("param")},
            "class_constant": measured,
        })
    trials = _default_trials(grid.half_width)
    rows = boundedness_sweep(op, grid, (q1, q2, q), weight_rows, trials)
    prov = _provenance(cfg)
    prov["applied"] = {"trials": [name for name, _, _ in trials],
                       "grid": {"n": grid.n, "half_width": grid.half_width}}
    out = {"experiment": "boundedness-sweep",
           "rows": [r.descriptor() for r in rows],
           "provenance": prov}
    return EXIT_OK, out, None


def _run_contrast(cfg: dict) -> tuple[int, dict, Optional[list]]:
    op = parse_operator(cfg["operator"])
    report = compactness_contrast(
        op,
        parse_pointwise(cfg["b_cmo"]),
        parse_pointwise(cfg["b_bmo"]),
        tuple(cfg["index"]),
        [int(n) for n in cfg["refinements"]],
        int(cfg["k_probe"]),
        half_width=float(cfg.get("half_width", 4.0)),
        n_basis=tuple(cfg.get("n_basis", [32, 32])),
        contrast_factor=float(cfg.get("contrast_factor", 2.0)),
    )
    out = {"experiment": "compactness-contrast", **report.descriptor(),
           "provenance_run": _provenance(cfg)}
    csv_rows = report.csv_rows() if cfg.get("csv", False) else None
    code = EXIT_INCONCLUSIVE if report.verdict == "inconclusive" else EXIT_OK
    return code, out, csv_rows


def _run_symbol_norm(cfg: dict) -> tuple[int, dict, Optional[list]]:
    spec = parse_symbol(cfg["symbol"])
    j_min, j_max = int(cfg.get("j_min", -8)), int(cfg.get("j_max", 8))
    kwargs = {
        "s": cfg.get("s"),
        "s_vec": tuple(cfg["s_vec"]) if "s_vec" in cfg else None,
        "freq_halfwidth": float(cfg.get("freq_halfwidth", 4.0)),
        "freq_resolution": int(cfg.get("freq_resolution", 128)),
    }
    value = symbol_sobolev_norm(spec, j_range=range(j_min, j_max + 1), **kwargs)
    prov = _provenance(cfg)
    prov["applied"] = {"j_range": [j_min, j_max],
                       "freq_halfwidth": kwargs["freq_halfwidth"],
                       "freq_resolution": kwargs["freq_resolution"]}
    out = {"experiment": "symbol-norm", "value": value,
           "j_range": [j_min, j_max], "provenance": prov}
    ext = int(cfg.get("stability_extension", 0))
    if ext:
        wider = symbol_sobolev_norm(spec, j_range=range(j_min - ext, j_max + ext + 1),
                                    **kwargs)
        out["extended_value"] = wider
        out["extension_growth"] = wider / value - 1.0 if value else 0.0
    return EXIT_OK, out, None


_RUNNERS = {
    "weight-constant": _run_weight_constant,
    "characterize": _run_characterize,
    "solve-theta": _run_solve_theta,
    "product-bound": _run_product_bound,
    "boundedness-sweep": _run_boundedness_sweep,
    "compactness-contrast": _run_contrast,
    "symbol-norm": _run_symbol_norm,
}

CSV_COLUMNS = ["N", "symbol_class", "k", "a_k", "a_k_over_a1"]


def run_experiment(cfg: dict) -> tuple[int, Optional[dict], Optional[list]]:
    """Validate and execute; returns (exit_code, output_doc, csv_rows)."""
    errors = validate_config(cfg)
    if errors:
        return EXIT_CONFIG, {"errors": errors}, None
    runner = _RUNNERS[cfg["experiment"]]
    try:
        return runner(cfg)
    except Exception as exc:  # surfaced as the compute-error exit status
        return EXIT_COMPUTE, {"error": f"{type(exc).__name__}: {exc}"}, None


def _apply_override(cfg: dict, key: str, raw: str) -> None:
    parts = key.split(".")
    node = cfg
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    try:
        node[parts[-1]] = json.loads(raw)
    except json.JSONDecodeError:
        node[parts[-1]] = raw


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="wextrap",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment config or preset")
    run_p.add_argument("config", nargs="?", help="path to a config JSON file")
    run_p.add_argument("--preset", help="preset name (see `wextrap presets`)")
    run_p.add_argument("--override", action="append", default=[],
                       metavar="KEY=VALUE", help="dotted-key config override")
    run_p.add_argument("--output-dir", default=".", help="artifact directory")

    sub.add_parser("presets", help="list preset experiments")

    val_p = sub.add_parser("validate", help="validate a config file")
    val_p.add_argument("config", help="path to a config JSON file")

    args = parser.parse_args(argv)

    if args.command == "presets":
        for row in list_presets():
            print(f"{row['name']:44s} {row['description']}")
        return EXIT_OK

    if args.command == "validate":
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        errors = validate_config(cfg)
        for e in errors:
            print(f"config error: {e}", file=sys.stderr)
        if not errors:
            print("ok")
        return EXIT_CONFIG if errors else EXIT_OK

    # run
    if bool(args.config) == bool(args.preset):
        print("config error: provide exactly one of CONFIG or --preset",
              file=sys.stderr)
        return EXIT_CONFIG
    if args.preset:
        try:
            cfg = preset_config(args.preset)
        except KeyError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        name = args.preset
    else:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        name = os.path.splitext(os.path.basename(args.config))[0]
    for ov in args.override:
        if "=" not in ov:
            print(f"config error: bad override {ov!r}", file=sys.stderr)
            return EXIT_CONFIG
        key, _, raw = ov.partition("=")
        _apply_override(cfg, key, raw)

    code, out, csv_rows = run_experiment(cfg)
    if code == EXIT_CONFIG:
        for e in out.get("errors", []):
            print(f"config error: {e}", file=sys.stderr)
        return code
    os.makedirs(args.output_dir, exist_ok=True)
    json_path = os.path.join(args.output_dir, f"{name}.json")
    with open(json_path, "w") as fh:
        fh.write(canonical_json(out))
    print(f"wrote {json_path}")
    if csv_rows is not None:
        csv_path = os.path.join(args.output_dir, f"{name}.csv")
        write_csv(csv_path, csv_rows, CSV_COLUMNS)
        print(f"wrote {csv_path}")
    if code == EXIT_COMPUTE:
        print(f"compute error: {out.get('error')}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
