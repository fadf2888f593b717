"""Command-line front end: ``cscaling <command> [options]``.

Exit codes: 0 verdict pass or n/a, 2 verdict fail, 1 usage or config error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, parse_point, read_config

COMMANDS = ("levi", "type", "scale", "kernel-convergence", "metric", "graham", "lee",
            "bergman", "klembeck", "wu", "poisson")
CONFIG_KEYS = ("command", "domain", "dim", "k", "m", "point", "xi", "trunc", "tol", "grid",
               "seed", "out", "format", "no_timestamp", "plot", "steps", "horizon", "t_list")
UNBOUNDED = ("siegel", "halfspace", "kohn_nirenberg", "bp_model")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cscaling", description="Scaling-method diagnostics for domains in C^n.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=COMMANDS, nargs="?")
    p.add_argument("--config", help="key = value file; command-line flags take precedence")
    p.add_argument("--domain")
    p.add_argument("--dim", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--point", help='comma-separated "re:im" pairs')
    p.add_argument("--xi", help='direction, comma-separated "re:im" pairs')
    p.add_argument("--trunc", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--grid")
    p.add_argument("--seed", type=int)
    p.add_argument("--steps", type=int, help="scaling indices 1..steps (scale)")
    p.add_argument("--horizon", type=int, help="sequence horizon (kernel-convergence)")
    p.add_argument("--t-list", dest="t_list", help="comma-separated approach distances")
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--no-timestamp", dest="no_timestamp", action="store_true", default=None)
    p.add_argument("--plot", action="store_true", default=None,
                   help="write PNG figures next to the report")
    return p


# ---------------------------------------------------------------------------
# config resolution

def _typed(key, value):
    conv = {"dim": int, "k": int, "m": int, "trunc": int, "seed": int, "steps": int,
            "horizon": int, "tol": float}
    try:
        if key in conv:
            return conv[key](value)
        if key in ("no_timestamp", "plot"):
            if isinstance(value, bool):
                return value
            if str(value).lower() in ("1", "true", "yes", "on"):
                return True
            if str(value).lower() in ("0", "false", "no", "off", ""):
                return False
            raise ValueError(value)
        if key == "format" and value not in ("json", "csv"):
            raise ValueError(value)
        if key == "command" and value not in COMMANDS:
            raise ValueError(value)
        if key in ("point", "xi"):
            parse_point(value)
        if key == "t_list":
            [float(t) for t in str(value).split(",")]
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, f"cannot parse {value!r}") from exc
    return value


def resolve_config(args) -> dict:
    cfg = {}
    if args.config:
        raw = read_config(Path(args.config), CONFIG_KEYS)
        cfg = {k: _typed(k, v) for k, v in raw.items()}
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if not cfg.get("command"):
        raise UsageError("a command is required: " + ", ".join(COMMANDS))
    cfg.setdefault("format", "json")
    cfg.setdefault("no_timestamp", False)
    cfg.setdefault("plot", False)
    cfg.setdefault("seed", 0)
    return cfg


def _params(cfg):
    tag = cfg.get("domain", "ball")
    if tag == "egg":
        if "k" not in cfg:
            raise ConfigError("k", "egg needs --k")
        return (cfg["k"],)
    if tag == "bp_model":
        if "m" not in cfg:
            raise ConfigError("m", "bp_model needs --m")
        return (cfg["m"],)
    return ()


def _domain(cfg, default="ball"):
    from .geometry import make_catalog_domain

    cfg.setdefault("domain", default)
    try:
        return make_catalog_domain(cfg["domain"], _params(cfg), dim=cfg.get("dim", 2))
    except ValueError as exc:
        raise ConfigError("domain", str(exc)) from exc


def _point(cfg, key, default):
    if key not in cfg:
        return np.asarray(default, dtype=complex)
    return parse_point(cfg[key])


def _boundary_default(rho):
    e = np.zeros(rho.dim, dtype=complex)
    if rho.tag not in UNBOUNDED:
        e[0] = 1.0
    return e


def _interior_default(rho_tag, dim):
    e = np.zeros(dim, dtype=complex)
    if rho_tag in ("siegel", "halfspace", "halfplane_product"):
        e[0] = 1.0
    return e


def _t_list(cfg, default):
    if "t_list" in cfg:
        return [float(t) for t in str(cfg["t_list"]).split(",")]
    return list(default)


# ---------------------------------------------------------------------------
# commands: each returns (result dict, verdict, csv text or None, plot callback or None)

def cmd_levi(cfg):
    from .geometry import levi_classify

    rho = _domain(cfg)
    rep = levi_classify(rho, _point(cfg, "point", _boundary_default(rho)),
                        tol=cfg.get("tol", 1e-8))
    return rep.to_dict(), "na", None, None


def cmd_type(cfg):
    from .geometry import order_of_contact

    rho = _domain(cfg)
    bound = cfg.get("trunc", 8)
    rep = order_of_contact(rho, _point(cfg, "point", _boundary_default(rho)), bound, bound)
    return rep.to_dict(), "na", None, None


def cmd_scale(cfg):
    from .convergence import domain_samples, normal_convergence_check
    from .geometry import make_catalog_domain
    from .scaling import default_orbit, pinchuk_scaling_sequence

    rho = _domain(cfg)
    steps = cfg.get("steps", 12)
    orbit = default_orbit(rho)
    maps = pinchuk_scaling_sequence(rho, orbit, steps)
    target = make_catalog_domain("siegel", dim=rho.dim)
    lo = [0.0] + [-1.0] * (2 * rho.dim - 1)
    hi = [2.0] + [1.0] * (2 * rho.dim - 1)
    K = domain_samples(target, lo, hi, 2000, seed=cfg["seed"], margin=1e-3)
    rep = normal_convergence_check(maps, rho, target, K, seed=cfg["seed"], tol=cfg.get("tol", 1e-2))
    ok = rep.verdict == "pass" and rep.monotone
    out = rep.to_dict()
    out["orbit"] = {"family": orbit.family, "point": orbit.point}

    def plot(stem):
        from .plotting import plot_series
        return [plot_series(f"{stem}_deviation.png", rep.indices,
                            {"deviation (a)": rep.columns["deviation_a"],
                             "deviation (b)": rep.columns["deviation_b"]},
                            "nu", "deviation", "scaled domain vs Siegel", logy=True)]

    return out, "pass" if ok else "fail", rep.to_csv(), plot


def cmd_kernel_convergence(cfg):
    from .convergence import GridSpec, caratheodory_kernel_estimate, sequence_from_name

    cfg.setdefault("domain", "growing_ball")
    dim = cfg.setdefault("dim", 1)
    try:
        spacing = float(cfg.get("grid", 0.02))
    except ValueError as exc:
        raise ConfigError("grid", "expected a grid spacing") from exc
    try:
        seq = sequence_from_name(cfg["domain"], dim, _params(cfg))
    except ValueError as exc:
        raise ConfigError("domain", str(exc)) from exc
    est = caratheodory_kernel_estimate(seq, _point(cfg, "point", np.zeros(dim)),
                                       GridSpec(dim, spacing=spacing),
                                       horizon=cfg.get("horizon", 200))
    out = est.to_dict()

    def plot(stem):
        from .plotting import plot_kernel
        return [plot_kernel(f"{stem}_kernel.png", est)]

    return out, "na", None, plot


def cmd_metric(cfg):
    from .invmetrics import CLOSED_FORM_TAGS, metric

    tag = cfg.setdefault("domain", "ball")
    dim = cfg.get("dim", 2)
    q = _point(cfg, "point", _interior_default(tag, dim))
    xi = _point(cfg, "xi", np.eye(q.size)[0])
    target = tag if tag in CLOSED_FORM_TAGS else _domain(cfg)
    mv = metric(target, q, xi)
    return {"value": mv.value, "lower": mv.lower, "upper": mv.upper, "method": mv.method}, \
        "na", None, None


def _asymptotics_plot(res, key, label):
    def plot(stem):
        from .plotting import plot_series
        return [plot_series(f"{stem}_{key}.png", res.grid, {label: [getattr(r, key) for r in res.rows]},
                            "t" if key != "lee_ratio" else "d", label, logx=True)]
    return plot


def cmd_graham(cfg):
    from .invmetrics import graham_asymptotics

    rho = _domain(cfg)
    p = _point(cfg, "point", _boundary_default(rho))
    xi = _point(cfg, "xi", rho.outward_normal(p))
    tol = cfg.get("tol", 1e-3)
    res = graham_asymptotics(rho, p, xi, t_list=_t_list(cfg, [2.0 ** -k for k in range(1, 11)]))
    out = res.to_dict()
    key = "dF" if res.kind == "normal" else "sqrt_dF"
    verdict = "na"
    if res.kind == "normal":
        verdict = "pass" if abs(res.fitted["dF"] - res.expected["dF"]) <= tol else "fail"
    elif rho.tag == "ball":
        # closed form: sqrt(d) F -> |xi_T| / sqrt(2) on the unit ball
        exp = float(np.linalg.norm(xi)) / np.sqrt(2)
        out["expected"]["sqrt_dF"] = exp
        verdict = "pass" if abs(res.fitted["sqrt_dF"] - exp) <= tol else "fail"
    return out, verdict, res.to_csv(), _asymptotics_plot(res, key, key)


def cmd_lee(cfg):
    from .invmetrics import lee_ratio

    rho = _domain(cfg)
    p = _point(cfg, "point", _boundary_default(rho))
    xi = _point(cfg, "xi", rho.outward_normal(p))
    nu = rho.outward_normal(p)
    ts = _t_list(cfg, [1e-1, 1e-2, 1e-3])
    res = lee_ratio(rho, p, xi, [p - t * nu for t in ts], tol=cfg.get("tol", 2e-2))
    return res.to_dict(), res.metadata["verdict"], res.to_csv(), \
        _asymptotics_plot(res, "lee_ratio", "Lee ratio")


def _bergman_kernel_obj(cfg):
    from .bergman import monomial_norms

    tag = cfg.setdefault("domain", "ball")
    try:
        return monomial_norms(tag, cfg.get("trunc", 48), _params(cfg),
                              dim=cfg.get("dim") if tag == "ball" else None)
    except ValueError as exc:
        raise ConfigError("domain" if "tag" in str(exc) else "trunc", str(exc)) from exc


def cmd_bergman(cfg):
    from .bergman import bergman_kernel, bergman_metric, sectional_curvature

    kern = _bergman_kernel_obj(cfg)
    q = _point(cfg, "point", np.zeros(kern.dim))
    xi = _point(cfg, "xi", np.eye(kern.dim)[0])
    rep = sectional_curvature(kern, q, xi, tol=cfg.get("tol", 1e-4), strict=False)
    K = bergman_kernel(kern, q, q)
    out = {"kernel": K.real, "metric": bergman_metric(kern, q).to_dict(),
           "curvature": rep.to_dict(), "volume": kern.volume, "quadrature": kern.quadrature}
    return out, "pass" if rep.accepted else "fail", kern.to_csv(), None


def cmd_klembeck(cfg):
    from .bergman import DEFAULT_T_LIST, klembeck_harness

    kern = _bergman_kernel_obj(cfg)
    default_p = np.zeros(kern.dim, dtype=complex)
    default_p[-1 if kern.tag == "egg" else 0] = 1.0
    p = _point(cfg, "point", default_p)
    xi = parse_point(cfg["xi"]) if "xi" in cfg else None
    res = klembeck_harness(kern.tag, p, _t_list(cfg, DEFAULT_T_LIST), xi=xi, kern=kern,
                           tol=cfg.get("tol", 5e-2))
    rows = ["t,curvature,sensitivity"] + [f"{t!r},{r.curvature!r},{r.sensitivity!r}"
                                          for t, r in res.rows]

    def plot(stem):
        from .plotting import plot_series
        return [plot_series(f"{stem}_curvature.png", [t for t, _ in res.rows],
                            {"S(q_t)": [r.curvature for _, r in res.rows]}, "t", "S",
                            "holomorphic sectional curvature", target=res.target)]

    return res.to_dict(), res.verdict, "\n".join(rows) + "\n", plot


def cmd_wu(cfg):
    from .wu import indicatrix_sample, mvee_hermitian, wu_metric

    tag = cfg.setdefault("domain", "ball")
    dim = cfg.get("dim", 2)
    q = _point(cfg, "point", _interior_default(tag, dim))
    try:
        res = int(cfg.get("grid", 32))
    except ValueError as exc:
        raise ConfigError("grid", "expected an angular resolution") from exc
    E = wu_metric(tag, q, resolution=res, tol=cfg.get("tol", 1e-8))

    def plot(stem):
        from .plotting import plot_ellipsoid
        S = indicatrix_sample(tag, q, E.metadata["resolution"])
        return [plot_ellipsoid(f"{stem}_ellipsoid.png", mvee_hermitian(S), S)]

    return E.to_dict(), "na", None, plot


def cmd_poisson(cfg):
    from .harmonic import PoissonGrid, poisson_bound_scan

    n = cfg.get("dim", 2) - 1
    try:
        dirs = int(cfg.get("grid", 16))
    except ValueError as exc:
        raise ConfigError("grid", "expected a direction count") from exc
    scan = poisson_bound_scan(n, PoissonGrid(n=n, n_dirs=dirs), tol=cfg.get("tol", 1e-6))

    def plot(stem):
        from .plotting import plot_poisson
        return [plot_poisson(f"{stem}_ratio.png", scan)]

    return scan.to_dict(), scan.verdict, scan.to_csv(), plot


HANDLERS = {
    "levi": cmd_levi, "type": cmd_type, "scale": cmd_scale,
    "kernel-convergence": cmd_kernel_convergence, "metric": cmd_metric,
    "graham": cmd_graham, "lee": cmd_lee, "bergman": cmd_bergman,
    "klembeck": cmd_klembeck, "wu": cmd_wu, "poisson": cmd_poisson,
}


# ---------------------------------------------------------------------------
# output

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


def render_json(cfg, result, verdict) -> str:
    report = {"schema": 1, "version": __version__, "command": cfg["command"],
              "config": {k: cfg[k] for k in sorted(cfg)}, "verdict": verdict, "result": result}
    if not cfg.get("no_timestamp"):
        report["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return json.dumps(_jsonable(report), indent=2, sort_keys=False) + "\n"


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        fmt = cfg["format"]
        result, verdict, csv_text, plot = HANDLERS[cfg["command"]](cfg)
        if fmt == "csv" and csv_text is None:
            raise ConfigError("format", f"{cfg['command']} has no CSV output")
    except UsageError as exc:
        print(f"cscaling: error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"cscaling: config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"cscaling: {cfg.get('command')} failed: {exc}", file=sys.stderr)
        return 1
    text = csv_text if fmt == "csv" else render_json(cfg, result, verdict)
    out = cfg.get("out")
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        stem = str(path.with_suffix(""))
    else:
        sys.stdout.write(text)
        stem = f"cscaling_{cfg['command']}"
    if cfg.get("plot") and plot is not None:
        for fig in plot(stem):
            print(f"wrote {fig}", file=sys.stderr)
    return {"pass": 0, "na": 0, "fail": 2}[verdict]


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
