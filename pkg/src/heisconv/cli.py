"""Command-line driver for the numerical experiments.

Every subcommand reads an optional flat JSON config (``--config``), lets a
few flags override it, writes deterministic CSV files to ``--out`` and a
``manifest.json`` describing the run. Exit codes: 0 all checks passed,
1 a check failed, 2 usage or configuration error, 3 numerical failure.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from ._parallel import make_pool_map
from .convolve import Grid, QuadratureSpec
from .errors import AccuracyError, NumericError, RangeError, ResolutionError
from .hgroup import group_mul_arrays
from .kernels import MollifierSpec, SmoothedKernel, decay_profile, decay_trend, nu_conv_J_lp_norm, smoothed_kernel_eval
from .measures import CutoffSpec, GraphMeasure, PhaseSpec
from .specfun import F_nk, F_nk_hat, fourier_quadrature
from .spectral import (
    PoliradialKernel,
    mu_bound_sweep,
    plancherel_ratio,
    signed_log_grid,
    upsilon_bound_sweep,
    upsilon_strip_edge,
    vdc_envelope,
)
from .typeset import (
    ConvContext,
    ScalingLadder,
    TypePoint,
    default_scan_points,
    ladder_samples,
    predicted_exponent,
    scan,
    scan_rows,
    scan_to_json,
    thm1_vertex,
    SCAN_COLUMNS,
    _result,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


# key -> (kind, default); kinds: int, float, str, bool, list, list|None, float|None
SCHEMA = {
    "n": ("int", 1),
    "m": ("int", 2),
    "phase": ("str", "quadratic"),
    "a": ("list|None", None),
    "cutoff.inner": ("float", 1.0),
    "cutoff.outer": ("float", 2.0),
    "workers": ("int", 1),
    "out": ("str", "results"),
    "lemma6.kmax": ("int", 10),
    "lemma6.nmax": ("int", 3),
    "lemma6.xi_count": ("int", 41),
    "lemma6.xi_max": ("float", 10.0),
    "lemma6.tol": ("float", 1e-8),
    "spectral.y": ("list", [0.0, 1.0, 5.0]),
    "spectral.N": ("list", [1, 10, 100]),
    "spectral.alpha_max": ("int", 30),
    "spectral.lam_min": ("float", 1e-2),
    "spectral.lam_max": ("float", 1e3),
    "spectral.per_decade": ("int", 4),
    "spectral.m": ("list", [2, 3]),
    "spectral.k": ("list", [0, 5, 10, 15, 20, 25, 30]),
    "spectral.vdc_points": ("int", 13),
    "spectral.vdc_tol": ("float", 0.05),
    "kernel.re_z": ("list", [-1.0, -2.0]),
    "kernel.im_z": ("list", [0.0, 1.0]),
    "kernel.N": ("list", [1, 4, 16]),
    "kernel.s_max": ("float", 100.0),
    "kernel.s_points": ("int", 40),
    "kernel.trend_tol": ("float", 0.05),
    "kernel.agree_re": ("list", [0.25, 0.5, 1.0]),
    "kernel.agree_im": ("list", [0.0, 1.0]),
    "kernel.agree_points": ("int", 21),
    "kernel.agree_tol": ("float", 1e-6),
    "plancherel.tol": ("float", 0.02),
    "selftest.samples": ("int", 10000),
    "selftest.tol": ("float", 1e-12),
    "selftest.seed": ("int", 0),
    "quad.nodes": ("int|None", None),
    "quad.interp_order": ("int", 1),
    "norm.spacing": ("float", 0.5),
    "norm.nodes": ("int", 16),
    "norm.iterations": ("int", 60),
    "ladder.deltas": ("list", [0.25, 0.125, 0.0625, 0.03125]),
    "ladder.cells_per_delta": ("float|None", None),
    "ladder.spacing": ("float|None", None),
    "scaling.points": ("list", [[0.75, 0.25], [0.5, 0.5], [1 / 1.2, 1 / 1.5], [1.0, 0.0]]),
    "scaling.tol": ("float", 0.1),
    "scan.steps": ("int", 5),
    "scan.norm": ("bool", True),
    "scan.outside_tol": ("float|None", None),
}


def _check_kind(key, kind, value):
    if value is None and kind.endswith("|None"):
        return value
    base = kind.split("|")[0]
    ok = {
        "int": isinstance(value, int) and not isinstance(value, bool),
        "float": isinstance(value, (int, float)) and not isinstance(value, bool),
        "str": isinstance(value, str),
        "bool": isinstance(value, bool),
        "list": isinstance(value, list),
    }[base]
    if not ok:
        raise UsageError(f"config key {key!r} must be of type {kind}, got {value!r}")
    return float(value) if base == "float" else value


def load_config(path=None, overrides=None):
    """Defaults, then the JSON file, then non-None ``overrides``."""
    cfg = {k: v[1] for k, v in SCHEMA.items()}
    raw = {}
    if path:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise UsageError("config must be a flat JSON object")
    for k, v in list(raw.items()) + [(k, v) for k, v in (overrides or {}).items() if v is not None]:
        if k not in SCHEMA:
            raise UsageError(f"unknown config key {k!r}")
        cfg[k] = _check_kind(k, SCHEMA[k][0], v)
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg["n"] < 1 or cfg["m"] < 1 or cfg["workers"] < 1:
        raise UsageError("n, m and workers must be positive")
    if cfg["phase"] not in ("quadratic", "power"):
        raise UsageError("phase must be 'quadratic' or 'power'")
    if cfg["a"] is not None and len(cfg["a"]) != cfg["n"]:
        raise UsageError(f"a must have n={cfg['n']} entries")
    try:
        measure_from_config(cfg)
        for pt in cfg["scaling.points"]:
            TypePoint(*pt)
        ladder_from_config(cfg)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def config_hash(cfg):
    """SHA-256 of the settings that can change results (not ``out``/``workers``)."""
    keep = {k: v for k, v in cfg.items() if k not in ("out", "workers")}
    return hashlib.sha256(json.dumps(keep, sort_keys=True).encode()).hexdigest()


def measure_from_config(cfg):
    n = cfg["n"]
    cutoff = CutoffSpec(cfg["cutoff.inner"], cfg["cutoff.outer"])
    if cfg["phase"] == "power":
        return GraphMeasure(n, PhaseSpec.power(cfg["m"]), (cutoff,))
    a = cfg["a"] if cfg["a"] is not None else [1.0] * n
    return GraphMeasure(n, PhaseSpec.quadratic(a), (cutoff,))


def ladder_from_config(cfg):
    cpd = cfg["ladder.cells_per_delta"]
    if cpd is None:
        cpd = 8.0 if cfg["n"] == 1 else 4.0
    return ScalingLadder(tuple(cfg["ladder.deltas"]), cpd, cfg["ladder.spacing"])


def context_from_config(cfg):
    n = cfg["n"]
    nodes = cfg["quad.nodes"] or (32 if n == 1 else 8)
    return ConvContext(
        quad=QuadratureSpec(nodes, interp_order=cfg["quad.interp_order"]),
        norm_grid=Grid.default(n, cfg["norm.spacing"]),
        norm_quad=QuadratureSpec(cfg["norm.nodes"], interp_order=1),
        norm_iterations=cfg["norm.iterations"],
        workers=cfg["workers"],
    )


# -------------------------------------------------------------------- output


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(path, header, rows):
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    os.replace(tmp, path)
    return os.path.basename(path)


class Run:
    """Collects checks and output files; writes the manifest atomically."""

    def __init__(self, command, cfg):
        self.command = command
        self.cfg = cfg
        self.out = cfg["out"]
        self.checks = []
        self.outputs = []
        self.started = time.strftime("%Y-%m-%dT%H:%M:%S%z")

    def path(self, name):
        os.makedirs(self.out, exist_ok=True)
        return os.path.join(self.out, name)

    def csv(self, name, header, rows):
        self.outputs.append(write_csv(self.path(name), header, rows))

    def check(self, name, passed, value=None, tolerance=None):
        self.checks.append({"name": name, "passed": bool(passed), "value": value, "tolerance": tolerance})
        mark = "PASS" if passed else "FAIL"
        print(f"[{mark}] {name}: value={value} tolerance={tolerance}")

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks)

    def manifest(self, status, error=None):
        doc = {
            "tool": "heisconv",
            "version": __version__,
            "command": self.command,
            "config_hash": config_hash(self.cfg),
            "config": self.cfg,
            "started": self.started,
            "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "status": status,
            "checks": self.checks,
            "outputs": self.outputs,
        }
        if error:
            doc["error"] = error
        path = self.path("manifest.json")
        with open(path + ".tmp", "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        os.replace(path + ".tmp", path)


def _json_default(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    raise TypeError(type(v))


# ---------------------------------------------------------------- commands


def cmd_verify_lemma6(run, cfg):
    tol = cfg["lemma6.tol"]
    count = cfg["lemma6.xi_count"]
    xis = np.array([0.0]) if count == 1 else np.linspace(-cfg["lemma6.xi_max"], cfg["lemma6.xi_max"], count)
    rows, worst, modulus = [], 0.0, 0.0
    for n in range(1, cfg["lemma6.nmax"] + 1):
        for k in range(cfg["lemma6.kmax"] + 1):
            closed = F_nk_hat(n, k, xis)
            for xi, c in zip(xis, closed):
                quad = fourier_quadrature(lambda s: F_nk(n, k, s), xi, tol=1e-14, rtol=1e-10)
                rel = abs(quad - c) / abs(c)
                worst = max(worst, rel)
                rows.append((n, k, xi, c.real, c.imag, quad.real, quad.imag, rel))
    for k in range(max(cfg["lemma6.kmax"], 20) + 1):
        closed = F_nk_hat(1, k, xis)
        modulus = max(modulus, float(np.max(np.abs(np.abs(closed) - (0.25 + xis**2) ** -0.5))))
    run.csv("lemma6.csv", ("n", "k", "xi", "closed_re", "closed_im", "quad_re", "quad_im", "relerr"), rows)
    run.check("lemma6_relerr", worst <= tol, worst, tol)
    run.check("n1_modulus_identity", modulus <= 1e-10, modulus, 1e-10)


def cmd_spectral_bounds(run, cfg):
    pmap = make_pool_map(cfg["workers"])
    n = cfg["n"]
    a = cfg["a"] if cfg["a"] is not None else [1.0] * n
    cutoff = CutoffSpec(cfg["cutoff.inner"], cfg["cutoff.outer"])
    gm = GraphMeasure(n, PhaseSpec.quadratic(a), (cutoff,))
    lams = signed_log_grid(cfg["spectral.lam_min"], cfg["spectral.lam_max"], cfg["spectral.per_decade"])
    zs = [complex(-n, y) for y in cfg["spectral.y"]]
    rows = mu_bound_sweep(gm, zs, cfg["spectral.N"], lams, cfg["spectral.alpha_max"], pool_map=pmap)
    out = [(z.real, z.imag, N, "-".join(map(str, al)), lam, mag, bnd, r) for z, N, al, lam, mag, bnd, r in rows]
    run.csv("mu_bounds.csv", ("z_re", "z_im", "N", "alpha", "lam", "abs_mu", "bound", "ratio"), out)
    worst = max(r[-1] for r in rows)
    run.check("mu_uniform_bound", worst <= 1.0, worst, 1.0)

    nu = max(n, 2)
    urows = []
    for m in cfg["spectral.m"]:
        re = upsilon_strip_edge(nu, m)
        res = upsilon_bound_sweep(
            m, nu, [complex(re, y) for y in cfg["spectral.y"]], cfg["spectral.N"], cfg["spectral.k"], lams, cutoff, pool_map=pmap
        )
        urows += [(m, nu, z.real, z.imag, N, k, lam, mag, bnd, r) for z, N, k, lam, mag, bnd, r in res]
    run.csv("upsilon_bounds.csv", ("m", "n", "z_re", "z_im", "N", "k", "lam", "abs_upsilon", "bound", "ratio"), urows)
    if urows:
        worst = max(r[-1] for r in urows)
        run.check("upsilon_uniform_bound", worst <= 1.0, worst, 1.0)

    vrows = []
    tol = cfg["spectral.vdc_tol"]
    for m in cfg["spectral.m"]:
        res = vdc_envelope(m, np.geomspace(1.0, 1e3, cfg["spectral.vdc_points"]), pool_map=pmap)
        vrows += [(m, lam, sup, ratio) for lam, sup, ratio in zip(res.lams, res.sups, res.ratios)]
        run.check(f"vdc_slope_m{m}", abs(res.slope - res.expected) <= tol, res.slope, f"{res.expected:.6g}+-{tol}")
        run.check(f"vdc_ratio_trend_m{m}", res.ratio_trend <= tol, res.ratio_trend, tol)
    run.csv("vdc.csv", ("m", "lam", "sup_abs_R_hat", "ratio"), vrows)


def cmd_kernel_decay(run, cfg):
    rows, agree_rows = [], []
    for re in cfg["kernel.re_z"]:
        for im in cfg["kernel.im_z"]:
            z = complex(re, im)
            for N in cfg["kernel.N"]:
                spec = SmoothedKernel(z, N)
                lo = (N + 1) / N
                mags = np.geomspace(lo, cfg["kernel.s_max"], cfg["kernel.s_points"])
                for sign in (1.0, -1.0):
                    ratio = decay_profile(spec, sign * mags)
                    rows += [(z.real, z.imag, N, sign * s, r) for s, r in zip(mags, ratio)]
                    finite = bool(np.all(np.isfinite(ratio)))
                    trend = decay_trend(mags, ratio)
                    label = f"decay_z{re:g}{im:+g}i_N{N}_{'pos' if sign > 0 else 'neg'}"
                    run.check(label, finite and trend <= cfg["kernel.trend_tol"], trend, cfg["kernel.trend_tol"])
            if re <= -1:
                gm = GraphMeasure(1, PhaseSpec.quadratic([1.0]))
                for p in (1, 2):
                    norm, tail = nu_conv_J_lp_norm(gm, SmoothedKernel(z, cfg["kernel.N"][0]), p)
                    run.check(f"lp_finite_z{re:g}{im:+g}i_p{p}", np.isfinite(norm) and tail < 0.01, norm, "finite")
    run.csv("kernel_decay.csv", ("z_re", "z_im", "N", "s", "ratio"), rows)

    worst = 0.0
    s_grid = np.linspace(-10.0, 10.0, cfg["kernel.agree_points"])
    for re in cfg["kernel.agree_re"]:
        for im in cfg["kernel.agree_im"]:
            z = complex(re, im)
            if z == 1:
                continue
            for N in cfg["kernel.N"]:
                a = smoothed_kernel_eval(SmoothedKernel(z, N, "space"), s_grid)
                b = smoothed_kernel_eval(SmoothedKernel(z, N, "frequency"), s_grid)
                rel = np.abs(a - b) / np.abs(a)
                worst = max(worst, float(rel.max()))
                agree_rows += [(z.real, z.imag, N, s, x.real, x.imag, y.real, y.imag, r) for s, x, y, r in zip(s_grid, a, b, rel)]
    run.csv(
        "kernel_agreement.csv",
        ("z_re", "z_im", "N", "s", "space_re", "space_im", "freq_re", "freq_im", "relgap"),
        agree_rows,
    )
    run.check("space_frequency_agreement", worst <= cfg["kernel.agree_tol"], worst, cfg["kernel.agree_tol"])
    # I_0 = c delta: the z = 0 kernel is c times phi_N^
    moll = MollifierSpec()
    s = np.linspace(-0.9, 0.9, 19)
    h0 = smoothed_kernel_eval(SmoothedKernel(0.0, 1), s)
    c = h0.real / moll.H_hat(s)
    spread = float(np.ptp(c) / np.mean(c))
    run.check("z0_proportionality", spread <= 1e-8, float(np.mean(c)), "constant")


def standard_plancherel_kernels():
    return {
        "gaussian": PoliradialKernel(lambda r, t: np.exp(-r**2 - t**2), 6.0, 7.0),
        "polynomial_gaussian": PoliradialKernel(lambda r, t: (1 + r**2) * np.exp(-2 * r**2 - t**2 / 2) * np.cos(t), 5.0, 10.0),
        "twisted": PoliradialKernel(lambda r, t: np.exp(-(r**2) * (1 + t**2 / 4) - t**2 - (t - r**2) ** 2), 6.0, 7.0),
    }


def cmd_plancherel(run, cfg):
    rows, ratios = [], []
    for name, ker in standard_plancherel_kernels().items():
        res = plancherel_ratio(ker)
        ratios.append(res.ratio)
        rows.append((name, res.ratio, res.l2_squared, res.entry_sum, res.alpha_max_used, res.lam_range[1], res.tail_fraction))
    run.csv("plancherel.csv", ("kernel", "ratio", "l2_squared", "entry_sum", "alpha_max", "lam_max", "tail_fraction"), rows)
    spread = (max(ratios) - min(ratios)) / min(ratios)
    run.check("plancherel_constancy", spread <= cfg["plancherel.tol"], spread, cfg["plancherel.tol"])


def cmd_group_selftest(run, cfg):
    n, count, tol = cfg["n"], cfg["selftest.samples"], cfg["selftest.tol"]
    rng = np.random.default_rng(cfg["selftest.seed"])
    pts = [(rng.uniform(-3, 3, (count, 2 * n)), rng.uniform(-3, 3, count)) for _ in range(3)]
    (x, t), (y, s), (u, r) = pts
    lhs = group_mul_arrays(*group_mul_arrays(x, t, y, s), u, r)
    rhs = group_mul_arrays(x, t, *group_mul_arrays(y, s, u, r))

    def rel(a, b):
        return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))

    assoc = max(rel(lhs[0], rhs[0]), rel(lhs[1], rhs[1]))
    ix, it = -x, -t
    ex, et = group_mul_arrays(x, t, ix, it)
    inverse = max(float(np.max(np.abs(ex))), float(np.max(np.abs(et))))
    zx, zt = group_mul_arrays(x, t, np.zeros_like(x), np.zeros_like(t))
    ident = max(rel(zx, x), rel(zt, t))
    run.check("associativity", assoc <= tol, assoc, tol)
    run.check("inverse", inverse <= tol, inverse, tol)
    run.check("identity", ident <= tol, ident, tol)
    C = thm1_vertex(n)
    on_line = abs(C.iq - ((2 * n + 1) * C.ip - 2 * n))
    dual_line = abs(C.iq - C.ip / (2 * n + 1))
    self_dual = abs(C.ip + C.iq - 1)
    run.check("thm1_vertex_on_line", on_line <= tol, on_line, tol)
    run.check("thm1_vertex_on_dual_line", dual_line <= tol, dual_line, tol)
    run.check("thm1_vertex_self_dual", self_dual <= tol, self_dual, tol)
    run.csv("group_selftest.csv", ("check", "value"), [(c["name"], c["value"]) for c in run.checks])


def cmd_scaling(run, cfg):
    gm = measure_from_config(cfg)
    ladder = ladder_from_config(cfg)
    ctx = context_from_config(cfg)
    samples = ladder_samples(gm, ladder, ctx)
    dual = ladder_samples(gm, ladder, ctx, adjoint=True)
    results = [_result(TypePoint(*pt), gm, samples, dual, float("nan")) for pt in cfg["scaling.points"]]
    rows = [
        (d, inf, cov) for d, inf, cov in zip(ladder.deltas, samples.infimum(gm.n), samples.coverage)
    ]
    run.csv("scaling_ladder.csv", ("delta", "infimum_over_delta_2n", "coverage"), rows)
    run.csv("scaling.csv", SCAN_COLUMNS, [[v for v in row] for row in scan_rows(results)])
    tol = cfg["scaling.tol"]
    for r in results:
        gap = abs(r.fitted - r.predicted)
        run.check(f"exponent_{r.point.ip:.6g}_{r.point.iq:.6g}", gap <= tol, r.fitted, f"{r.predicted:.6g}+-{tol}")
    infs = samples.infimum(gm.n)
    run.check("infimum_positive", min(infs) > 0, min(infs), ">0")
    run.check("infimum_variation", max(infs) / min(infs) < 2.0, max(infs) / min(infs), "<2")


def cmd_scan(run, cfg):
    gm = measure_from_config(cfg)
    ladder = ladder_from_config(cfg)
    ctx = context_from_config(cfg)
    points = default_scan_points(cfg["scan.steps"])
    tol = cfg["scan.outside_tol"]
    if tol is None:
        tol = 0.05 if gm.n == 1 else 0.1
    results = scan(points, gm, ladder, ctx, with_norm=cfg["scan.norm"] and gm.n == 1, outside_tol=tol)
    run.csv("scan.csv", SCAN_COLUMNS, [row for row in scan_rows(results)])
    plot = [
        (r.point.ip, r.point.iq, r.fitted, r.predicted, r.fitted_dual, r.predicted_dual,
         r.inside_thm1, "" if r.inside_thm2 is None else r.inside_thm2, r.necessarily_outside)
        for r in results
    ]
    run.csv("scan_plot.csv", ("ip", "iq", "fitted", "predicted", "fitted_dual", "predicted_dual",
                              "inside_thm1", "inside_thm2", "outside"), plot)
    path = run.path("scan.json")
    with open(path + ".tmp", "w") as fh:
        json.dump(scan_to_json(results), fh, indent=2, sort_keys=True, default=_json_default)
    os.replace(path + ".tmp", path)
    run.outputs.append("scan.json")
    errors = [r for r in results if r.error]
    run.check("no_point_errors", not errors, len(errors), 0)
    inside = [r.fitted for r in results if r.inside_thm1 and not r.error]
    run.check("inside_nonnegative", min(inside) >= -tol, min(inside), f">=-{tol:g}")
    outside = [
        r for r in results
        if not r.error and predicted_exponent(r.point, gm.n) < 0 and r.predicted_dual < 0
    ]
    if outside:
        # points both tests predict to blow up must be detected
        missed = sum(not r.necessarily_outside for r in outside)
        run.check("outside_detected", missed == 0, missed, 0)
    above_diagonal = [r for r in results if r.point.ip < r.point.iq]
    run.check("p_le_q_flags", all(r.necessarily_outside for r in above_diagonal), len(above_diagonal), "all flagged")


COMMANDS = {
    "verify-lemma6": cmd_verify_lemma6,
    "spectral-bounds": cmd_spectral_bounds,
    "scaling": cmd_scaling,
    "scan": cmd_scan,
    "kernel-decay": cmd_kernel_decay,
    "plancherel": cmd_plancherel,
    "group-selftest": cmd_group_selftest,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="heisconv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat JSON config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--workers", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--phase", choices=("quadratic", "power"))
        p.add_argument("--a", help="comma-separated phase coefficients a_j")
        if name == "verify-lemma6":
            p.add_argument("--kmax", type=int)
            p.add_argument("--nmax", type=int)
            p.add_argument("--xi-count", type=int)
    return parser


def _overrides(args):
    ov = {"out": args.out, "workers": args.workers, "n": args.n, "m": args.m, "phase": args.phase}
    if args.a is not None:
        try:
            ov["a"] = [float(v) for v in args.a.split(",")]
        except ValueError as exc:
            raise UsageError(f"--a must be a comma-separated list of numbers: {exc}") from exc
    if args.command == "verify-lemma6":
        ov.update({"lemma6.kmax": args.kmax, "lemma6.nmax": args.nmax, "lemma6.xi_count": args.xi_count})
    return ov


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args))
    except UsageError as exc:
        print(f"heisconv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    run = Run(args.command, cfg)
    try:
        COMMANDS[args.command](run, cfg)
    except ResolutionError as exc:
        print(f"heisconv: resolution error: {exc}", file=sys.stderr)
        run.manifest("failed", repr(exc))
        return EXIT_USAGE
    except (AccuracyError, NumericError, RangeError, FloatingPointError) as exc:
        print(f"heisconv: numerical failure: {exc}", file=sys.stderr)
        run.manifest("failed", repr(exc))
        return EXIT_NUMERIC
    except Exception as exc:
        run.manifest("failed", repr(exc))
        raise
    status = "pass" if run.passed else "fail"
    run.manifest(status)
    return EXIT_OK if run.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
