"""Config-driven experiment runner with reproducibility bookkeeping.

Commands:

    rwscenery run <config.json> [--out DIR]
    rwscenery list [--json]
    rwscenery validate <config.json>
    rwscenery replay <manifest.json> [--out DIR]

A run writes a canonical JSON report, CSV series, optional SVG charts, and
a manifest holding a content hash of the canonicalized config.  Reruns
with the same config and seed produce byte-identical payload files; only
the manifest's timestamp differs.  Exit codes: 0 pass (or report-only),
2 criterion failure, 1 error.  RWSCENERY_OUT sets the default output dir.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone
from importlib import resources

from . import __version__, harness, reportio, scenery, walk


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


WALK_PRESETS = {
    "lazy2d": walk.lazy_walk_law_2d,
    "simple2d": lambda: walk.simple_walk_law(2),
    "simple3d": lambda: walk.simple_walk_law(3),
    "det1d": lambda: walk.deterministic_law((1,)),
}


def load_fixture(name: str) -> dict:
    with resources.files("rwscenery.fixtures").joinpath(name).open() as fh:
        return json.load(fh)


def _build_walk(doc, field="walk"):
    if not isinstance(doc, dict):
        raise ConfigError(field, "must be an object")
    if "preset" in doc:
        preset = doc["preset"]
        if preset not in WALK_PRESETS:
            raise ConfigError(f"{field}.preset", f"unknown preset {preset!r}")
        return walk.build_walk_model(WALK_PRESETS[preset]())
    if "atoms" not in doc:
        raise ConfigError(field, "needs 'preset' or 'atoms'")
    try:
        law = walk.increment_law([(tuple(a["site"]), a["prob"]) for a in doc["atoms"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{field}.atoms", str(exc))
    return walk.build_walk_model(law)


def _build_scenery(doc, field="scenery"):
    if not isinstance(doc, dict) or "variant" not in doc:
        raise ConfigError(field, "must be an object with a 'variant'")
    try:
        if doc.get("pair") == "bundled-sl3":
            doc = dict(doc)
            doc["pair"] = load_fixture("toral_pair_sl3.json")
        return scenery.scenery_from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(field, str(exc))


def _require(doc, field, types, inner=None):
    if field not in doc:
        raise ConfigError(field, "required field is missing")
    v = doc[field]
    if not isinstance(v, types):
        raise ConfigError(field, f"expected {types}, got {type(v).__name__}")
    if inner is not None and isinstance(v, list):
        for i, item in enumerate(v):
            if not isinstance(item, inner):
                raise ConfigError(f"{field}[{i}]", f"expected {inner}")
    return v


def _positive_int(doc, field):
    v = _require(doc, field, int)
    if isinstance(v, bool) or v < 1:
        raise ConfigError(field, "must be a positive integer")
    return v


def _validate_t_grid(doc):
    grid = _require(doc, "t_grid", list, (int, float))
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("t_grid", "must be nonempty and strictly increasing")
    if not all(0.0 < t <= 1.0 for t in grid):
        raise ConfigError("t_grid", "entries must lie in (0, 1]")
    return [float(t) for t in grid]


def _fclt_config(doc) -> harness.ExperimentConfig:
    grid = _validate_t_grid(doc)
    if grid[-1] != 1.0:
        raise ConfigError("t_grid", "must end at 1.0")
    m = _positive_int(doc, "m_sceneries")
    if m < 100:
        raise ConfigError("m_sceneries", "KS experiments need at least 100 sceneries")
    return harness.ExperimentConfig(
        walk=_build_walk(doc["walk"]) if "walk" in doc else _missing("walk"),
        scenery=_build_scenery(doc["scenery"]) if "scenery" in doc else _missing("scenery"),
        n=_positive_int(doc, "n"), t_grid=tuple(grid), m_sceneries=m,
        n_omegas=_positive_int(doc, "n_omegas"), seed=_require(doc, "seed", int),
        tolerances=doc.get("tolerances", {}))


def _missing(field):
    raise ConfigError(field, "required field is missing")


# ---------------------------------------------------------------------------
# experiment runners: name -> (runner, anchor)


def _run_fclt(doc):
    cfg = _fclt_config(doc)
    rep = harness.run_fclt(cfg)
    rows = []
    for o in rep.per_omega:
        for j in range(len(rep.t_grid)):
            rows.append([o.omega_index, j,
                         o.ks_stat[j] if o.ks_stat else "",
                         o.ks_pvalue[j] if o.ks_pvalue else "",
                         o.variance_ratio[j], o.offdiag_max,
                         o.exact_var_y1, o.mc_var_y1])
    series = {"fclt_per_omega.csv": reportio.csv_text(
        ["omega", "window", "ks_stat", "ks_pvalue", "variance_ratio",
         "offdiag_max", "exact_var_y1", "mc_var_y1"], rows)}
    charts = {}
    if rep.per_omega and not rep.degenerate:
        xs = list(range(len(rep.t_grid)))
        charts["fclt_variance_ratio.svg"] = reportio.svg_line_chart(
            xs, {"mean ratio": [
                sum(o.variance_ratio[j] for o in rep.per_omega) / len(rep.per_omega)
                for j in xs]},
            title="window variance ratio", xlabel="window", ylabel="ratio")
    return rep, series, charts


def _run_fclt_ladder(doc):
    """Degenerate-variance tracking: Var(Y_n(1)) along an n-ladder."""
    ladder = _require(doc, "n_ladder", list, int)
    base = dict(doc)
    reports = []
    for n in ladder:
        base["n"] = int(n)
        cfg = _fclt_config(base)
        reports.append(harness.run_fclt(cfg))
    vals = [r.pooled_exact_var_y1 for r in reports]
    decreasing = all(b < a for a, b in zip(vals, vals[1:]))
    ladder_report = harness.VarianceLadderReport(
        n_ladder=[int(n) for n in ladder], pooled_exact_var_y1=vals,
        degenerate=[r.degenerate for r in reports], decreasing=decreasing,
        passed=decreasing)
    series = {"variance_ladder.csv": reportio.csv_text(
        ["n", "pooled_exact_var_y1"], list(zip(ladder, vals)))}
    charts = {"variance_ladder.svg": reportio.svg_line_chart(
        [math.log2(n) for n in ladder], {"Var Y_n(1)": vals},
        title="variance collapse along the ladder", xlabel="log2 n",
        ylabel="Var")}
    return ladder_report, series, charts


def _run_lln(doc):
    model = _build_walk(doc["walk"]) if "walk" in doc else _missing("walk")
    ladder = _require(doc, "n_ladder", list, int)
    p_set = [tuple(p) for p in _require(doc, "p_set", list, list)]
    rep = harness.track_variance_lln(model, ladder, p_set,
                                     _positive_int(doc, "n_omegas"),
                                     _require(doc, "seed", int))
    rows = [[n, f"({p[0]};{p[1]})", rep.mean_ratio[(n, p)], rep.std_ratio[(n, p)],
             rep.max_ratio[(n, p)]] for n in rep.n_ladder for p in rep.p_set]
    series = {"lln_ratios.csv": reportio.csv_text(
        ["n", "p", "mean_ratio", "std_ratio", "max_ratio"], rows)}
    charts = {"lln_ratios.svg": reportio.svg_line_chart(
        [math.log2(n) for n in rep.n_ladder],
        {str(p): [rep.mean_ratio[(n, p)] for n in rep.n_ladder] for p in rep.p_set},
        title="V_n / (C0 n log n)", xlabel="log2 n", ylabel="mean ratio")}
    return rep, series, charts


def _run_orthogonality(doc):
    model = _build_walk(doc["walk"]) if "walk" in doc else _missing("walk")
    ladder = _require(doc, "n_ladder", list, int)
    windows = tuple(_require(doc, "windows", list, (int, float)))
    p_set = [tuple(p) for p in _require(doc, "p_set", list, list)]
    rep = harness.check_increment_orthogonality(
        model, ladder, windows, p_set, _positive_int(doc, "n_omegas"),
        _require(doc, "seed", int))
    rows = [[n, f"({p[0]};{p[1]})", rep.mean_normalized[(n, p)]]
            for n in rep.n_ladder for p in rep.p_set]
    series = {"cross_counts.csv": reportio.csv_text(
        ["n", "p", "mean_normalized"], rows)}
    charts = {"cross_counts.svg": reportio.svg_line_chart(
        [math.log2(n) for n in rep.n_ladder],
        {str(p): [rep.mean_normalized[(n, p)] for n in rep.n_ladder]
         for p in rep.p_set},
        title="cross-window counts / (n log n)", xlabel="log2 n", ylabel="mean")}
    return rep, series, charts


def _run_erdos_taylor(doc):
    model = _build_walk(doc["walk"]) if "walk" in doc else _missing("walk")
    ladder = _require(doc, "n_ladder", list, int)
    rep = harness.track_erdos_taylor(model, ladder, _positive_int(doc, "n_omegas"),
                                     _require(doc, "seed", int),
                                     epsilon=float(doc.get("epsilon", 0.1)))
    rows = [[n, rep.mean_log_ratio[n], *rep.quantiles_log_ratio[n],
             rep.mean_power_ratio[n], rep.distance_to_limit[n]]
            for n in rep.n_ladder]
    series = {"sup_local_time.csv": reportio.csv_text(
        ["n", "mean_log_ratio", "q10", "q50", "q90", "mean_power_ratio",
         "distance_to_one_over_pi"], rows)}
    charts = {"sup_local_time.svg": reportio.svg_line_chart(
        [math.log2(n) for n in rep.n_ladder],
        {"sup w / log^2 n": [rep.mean_log_ratio[n] for n in rep.n_ladder],
         "1/pi": [1.0 / math.pi] * len(rep.n_ladder)},
        title="sup local time tracker", xlabel="log2 n", ylabel="ratio")}
    return rep, series, charts


def _run_newman_wright(doc):
    model = _build_walk(doc["walk"]) if "walk" in doc else _missing("walk")
    scen = _build_scenery(doc["scenery"]) if "scenery" in doc else _missing("scenery")
    path = walk.sample_path(model, _positive_int(doc, "n"),
                            _require(doc, "seed", int))
    rep = harness.check_newman_wright(
        scen, path, _require(doc, "lambda_grid", list, (int, float)),
        m_sceneries=_positive_int(doc, "m_sceneries"),
        x_seed=_require(doc, "seed", int))

    rep.passed = not any(rep.violations)
    rows = list(zip(rep.lambdas, rep.lhs, rep.rhs, rep.lhs_se, rep.rhs_se,
                    rep.margins, rep.violations))
    series = {"newman_wright.csv": reportio.csv_text(
        ["lambda", "lhs", "rhs", "lhs_se", "rhs_se", "margin", "violation"], rows)}
    return rep, series, {}


def _run_moricz(doc):
    model = _build_walk(doc["walk"]) if "walk" in doc else _missing("walk")
    scen = _build_scenery(doc["scenery"]) if "scenery" in doc else _missing("scenery")
    n = _positive_int(doc, "n")
    path = walk.sample_path(model, n, _require(doc, "seed", int))
    rep = harness.check_moricz(scen, path, n,
                               g0_kind=doc.get("g0_kind", "self_intersection"),
                               m_sceneries=_positive_int(doc, "m_sceneries"),
                               x_seed=_require(doc, "seed", int))
    rep.passed = None if not (rep.super_additive and rep.hypothesis_ok) \
        else rep.violations == 0
    rows = [[b, k, e, s, bd, mg] for (b, k), e, s, bd, mg in zip(
        [tuple(w) for w in rep.windows], rep.m4_estimates, rep.m4_se,
        rep.bounds, rep.margins)]
    series = {"moricz.csv": reportio.csv_text(
        ["b", "k", "m4_estimate", "m4_se", "bound", "margin"], rows)}
    return rep, series, {}


def _run_tightness(doc):
    cfg = _fclt_config(doc)
    rep = harness.estimate_tightness_modulus(
        cfg, _require(doc, "delta_ladder", list, (int, float)),
        float(_require(doc, "epsilon", (int, float))),
        grid_points=int(doc.get("grid_points", 128)))
    rows = [[d, rep.estimates[d]] for d in rep.delta_ladder]
    series = {"tightness.csv": reportio.csv_text(["delta", "estimate"], rows)}
    charts = {"tightness.svg": reportio.svg_line_chart(
        rep.delta_ladder, {"mu(modulus >= eps)": [rep.estimates[d]
                                                  for d in rep.delta_ladder]},
        title="modulus of continuity", xlabel="delta", ylabel="probability")}
    return rep, series, charts


def _run_transient(doc):
    model = _build_walk(doc["walk"]) if "walk" in doc else _missing("walk")
    scen = _build_scenery(doc["scenery"]) if "scenery" in doc else _missing("scenery")
    rep = harness.transient_variance_check(
        scen, model, _positive_int(doc, "n"), _positive_int(doc, "m_sceneries"),
        _require(doc, "seed", int), n_omegas=int(doc.get("n_omegas", 10)),
        k_max=int(doc.get("k_max", 60)))
    rep.passed = rep.agree
    series = {"transient_variance.csv": reportio.csv_text(
        ["series_value", "series_truncated", "tail_estimate", "exact_mean",
         "exact_se", "mc_mean", "mc_se"],
        [[rep.series_value, rep.series_truncated, rep.tail_estimate,
          rep.exact_mean, rep.exact_se, rep.mc_mean, rep.mc_se]])}
    return rep, series, {}


def _run_truncation_ladder(doc):
    cfg = _fclt_config(doc)
    rep = harness.run_truncation_ladder(cfg, _require(doc, "terms_ladder", list, int))
    rows = list(zip(rep.terms_ladder, rep.norm_c_dropped, rep.density_sup_bound,
                    rep.var_y1))
    series = {"truncation_ladder.csv": reportio.csv_text(
        ["terms", "norm_c_dropped", "density_sup_bound", "var_y1"], rows)}
    return rep, series, {}


EXPERIMENTS = {
    "fclt-iid": (_run_fclt, "quenched FCLT for i.i.d. sceneries along a planar walk"),
    "fclt-ma": (_run_fclt, "quenched FCLT for moving-average sceneries (variance |sum a_q|^2 / (pi sqrt det Sigma))"),
    "fclt-toral": (_run_fclt, "quenched FCLT for commuting toral automorphism fields"),
    "variance-ladder": (_run_fclt_ladder, "variance collapse for degenerate moving averages"),
    "lln-variance": (_run_lln, "law of large numbers for self-intersection counts V_n / (C0 n log n) -> 1"),
    "orthogonality": (_run_orthogonality, "asymptotic orthogonality of cross-interval coincidence counts"),
    "erdos-taylor": (_run_erdos_taylor, "Erdos-Taylor / Dembo-Peres-Rosen-Zeitouni sup local time limit 1/pi"),
    "newman-wright": (_run_newman_wright, "Newman-Wright maximal inequality for associated summands"),
    "moricz": (_run_moricz, "Moricz fourth-moment maximal bound with C_max = (1 - 2^-1/4)^-4"),
    "tightness": (_run_tightness, "modulus-of-continuity tightness estimates for the rescaled process"),
    "transient-variance": (_run_transient, "Green-series asymptotic variance for transient walks"),
    "truncation-ladder": (_run_truncation_ladder, "trig-polynomial approximation ladder for toral observables"),
}


def validate_config(doc: dict) -> str:
    """Raise ConfigError on schema violations; return the experiment name."""
    if not isinstance(doc, dict):
        raise ConfigError("$", "top-level config must be an object")
    name = _require(doc, "experiment", str)
    if name not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {name!r}; "
                          f"see 'rwscenery list'")
    _require(doc, "seed", int)
    # dry-build the typed pieces so field errors surface with their paths
    if name in ("fclt-iid", "fclt-ma", "fclt-toral", "tightness",
                "truncation-ladder"):
        _fclt_config(doc)
    if name == "variance-ladder":
        _require(doc, "n_ladder", list, int)
        base = dict(doc)
        base["n"] = int(doc["n_ladder"][0])
        _fclt_config(base)
    if name in ("lln-variance", "orthogonality", "erdos-taylor"):
        _build_walk(doc.get("walk") or _missing("walk"))
        _require(doc, "n_ladder", list, int)
        _positive_int(doc, "n_omegas")
    if name == "orthogonality":
        w = _require(doc, "windows", list, (int, float))
        if len(w) != 4 or not 0 < w[0] < w[1] < w[2] < w[3] < 1:
            raise ConfigError("windows", "need 0 < A < B < C < D < 1")
    if name in ("newman-wright", "moricz", "transient-variance"):
        _build_walk(doc.get("walk") or _missing("walk"))
        _build_scenery(doc.get("scenery") or _missing("scenery"))
        _positive_int(doc, "n")
        _positive_int(doc, "m_sceneries")
    if name == "newman-wright":
        _require(doc, "lambda_grid", list, (int, float))
    if name == "tightness":
        _require(doc, "delta_ladder", list, (int, float))
        _require(doc, "epsilon", (int, float))
    return name


def run_experiment(doc: dict):
    name = validate_config(doc)
    runner, _anchor = EXPERIMENTS[name]
    return runner(doc)


# ---------------------------------------------------------------------------
# commands


def _out_dir(args) -> str:
    out = args.out or os.environ.get("RWSCENERY_OUT") or "rwscenery-out"
    os.makedirs(out, exist_ok=True)
    return out


def _write_outputs(out_dir: str, doc: dict, report, series: dict, charts: dict,
                   want_charts: bool) -> dict:
    payloads = {"report.json": reportio.canonical_json(
        {"experiment": doc["experiment"], "config": doc,
         "artifact_version": __version__, "report": report.to_dict(),
         "passed": getattr(report, "passed", None)})}
    payloads.update(series)
    if want_charts:
        payloads.update(charts)
    outputs = []
    for fname, text in sorted(payloads.items()):
        path = os.path.join(out_dir, fname)
        with open(path, "w") as fh:
            fh.write(text)
        outputs.append({"path": fname, "sha256": reportio.sha256_text(text)})
    manifest = {
        "artifact_version": __version__,
        "config": doc,
        "config_hash": reportio.config_hash(doc),
        "master_seed": doc["seed"],
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        fh.write(reportio.canonical_json(manifest))
    return manifest


def cmd_run(args) -> int:
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        print(f"error: no such config file: {args.config}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: {args.config}: line {exc.lineno} col {exc.colno}: {exc.msg}",
              file=sys.stderr)
        return 1
    try:
        report, series, charts = run_experiment(doc)
    except ConfigError as exc:
        print(f"error: config field {exc}", file=sys.stderr)
        return 1
    out = _out_dir(args)
    want_charts = bool(doc.get("output", {}).get("charts", False))
    _write_outputs(out, doc, report, series, charts, want_charts)
    passed = getattr(report, "passed", None)
    if passed is None:
        mode = "degenerate-variance" if getattr(report, "degenerate", False) \
            else "report-only"
        print(f"{doc['experiment']}: completed ({mode}); outputs in {out}")
        return 0
    print(f"{doc['experiment']}: {'PASS' if passed else 'FAIL'}; outputs in {out}")
    return 0 if passed else 2


def cmd_list(args) -> int:
    if args.json:
        doc = [{"name": k, "anchor": anchor} for k, (_, anchor)
               in sorted(EXPERIMENTS.items())]
        print(json.dumps(doc, indent=1, sort_keys=True))
        return 0
    width = max(len(k) for k in EXPERIMENTS)
    print("experiment catalog (name -> result it exercises):")
    for name, (_, anchor) in sorted(EXPERIMENTS.items()):
        print(f"  {name:<{width}}  {anchor}")
    return 0


def cmd_validate(args) -> int:
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        print(f"error: no such config file: {args.config}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: {args.config}: line {exc.lineno} col {exc.colno}: {exc.msg}",
              file=sys.stderr)
        return 1
    try:
        name = validate_config(doc)
    except ConfigError as exc:
        print(f"error: config field {exc}", file=sys.stderr)
        return 1
    print(f"ok: valid {name} config")
    return 0


def cmd_replay(args) -> int:
    try:
        with open(args.manifest) as fh:
            manifest = json.load(fh)
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: cannot read manifest: {exc}", file=sys.stderr)
        return 1
    doc = manifest["config"]
    if reportio.config_hash(doc) != manifest["config_hash"]:
        print("error: manifest config hash mismatch", file=sys.stderr)
        return 1
    try:
        report, series, charts = run_experiment(doc)
    except ConfigError as exc:
        print(f"error: config field {exc}", file=sys.stderr)
        return 1
    out = _out_dir(args)
    want_charts = any(o["path"].endswith(".svg") for o in manifest["outputs"])
    new_manifest = _write_outputs(out, doc, report, series, charts, want_charts)
    old = {o["path"]: o["sha256"] for o in manifest["outputs"]}
    new = {o["path"]: o["sha256"] for o in new_manifest["outputs"]}
    if old == new:
        print(f"replay: byte-identical payloads ({len(new)} files)")
        return 0
    diff = sorted(set(old) ^ set(new) | {p for p in old.keys() & new.keys()
                                         if old[p] != new[p]})
    print(f"replay: MISMATCH in {diff}", file=sys.stderr)
    return 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rwscenery",
        description="experiment runner for random-field sums along lattice walks")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(fn=cmd_run)
    p_list = sub.add_parser("list", help="print the experiment catalog")
    p_list.add_argument("--json", action="store_true")
    p_list.set_defaults(fn=cmd_list)
    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")
    p_val.set_defaults(fn=cmd_validate)
    p_rep = sub.add_parser("replay", help="rerun a manifest and verify bytes")
    p_rep.add_argument("manifest")
    p_rep.add_argument("--out", default=None)
    p_rep.set_defaults(fn=cmd_replay)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except Exception as exc:  # noqa: BLE001 - uniform CLI error surface
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
