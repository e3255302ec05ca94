"""Command line surface: build, reconstruct and evaluate cases on disk.

Commands
--------
phantom   write a synthetic test image
mask      write a sampling mask
sense     estimate sensitivity maps from measured k-space
simulate  generate a full case directory (gt, sens, mask, kspace)
recon     run the iterative reconstruction on a case directory
eval      score reconstructions against ground truth (text + CSV)
sweep     grid-search solver parameters over one case

Solver configs and sweep grids are plain text files of `key = value`
lines ('#' starts a comment). Recognized keys: prior, alpha, beta,
lambda, iterations, v, v_map, record_history, tv_iterations, tv_tol,
external_cmd, external_dir, external_timeout. alpha/beta/lambda accept
a single number or a comma-separated per-iteration schedule; in a sweep
grid every comma-separated list is expanded into a Cartesian product
instead (schedules are not sweepable).

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
divergence, 5 external-prior failure. All outputs are deterministic
given the seeds: re-running a command rewrites byte-identical files.
"""

import argparse
import itertools
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .container import load_array, load_image, save_array, save_image
from .errors import (
    ConfigError,
    ContainerError,
    DivergenceError,
    EstimationError,
    PriorExecutionError,
    ProtocolError,
    ShapeError,
)
from .masks import (
    PRESETS,
    load_mask,
    make_equispaced_mask,
    make_preset_mask,
    make_random_mask,
    mask_summary,
    save_mask,
)
from .metrics import PSNR_TEXT_CAP, evaluate, psnr
from .operators import SensitivitySet, zero_filled
from .phantoms import PHANTOM_KINDS, make_phantom, simulate_case
from .priors import make_prior
from .sensitivity import estimate_maps
from .solver import SolverConfig, solve

_CONFIG_KEYS = (
    "prior", "alpha", "beta", "lambda", "iterations", "v", "v_map",
    "record_history", "tv_iterations", "tv_tol",
    "external_cmd", "external_dir", "external_timeout",
)

# starting points per prior kind when a config omits lambda
DEFAULT_LAMBDA = {
    "tikhonov": 0.01,
    "soft_threshold_image": 0.005,
    "soft_threshold_haar": 0.005,
    "total_variation": 0.004,
    "external": 0.0,
}

REPORT_COLUMNS = ("case", "method", "PSNR", "SSIM", "RMSE", "NMSE")


def _parse_kv_text(text, source):
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        if key in fields:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        fields[key] = value
    return fields


def _read_kv_file(path):
    path = Path(path)
    return _parse_kv_text(path.read_text(), str(path))


def _parse_floats(value, key):
    try:
        parts = [float(p) for p in value.split(",")]
    except ValueError:
        raise ConfigError(f"{key} must be a number or comma-separated numbers, "
                          f"got {value!r}") from None
    return parts[0] if len(parts) == 1 else parts


def _parse_bool(value, key):
    low = value.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {value!r}")


def _build_solver_config(fields, default_exchange_dir=None):
    unknown = sorted(set(fields) - set(_CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kind = fields.get("prior", "tikhonov")
    params = {}
    if kind == "total_variation":
        if "tv_iterations" in fields:
            params["iterations"] = int(float(fields["tv_iterations"]))
        if "tv_tol" in fields:
            params["tol"] = float(fields["tv_tol"])
    elif kind == "external":
        if "external_cmd" not in fields:
            raise ConfigError("external prior requires external_cmd")
        params["command"] = fields["external_cmd"]
        exchange = fields.get("external_dir", default_exchange_dir)
        if exchange is not None:
            params["exchange_dir"] = exchange
        if "external_timeout" in fields:
            params["timeout"] = float(fields["external_timeout"])
    prior = make_prior(kind, **params)
    v = _parse_floats(fields["v"], "v") if "v" in fields else 1.0
    if isinstance(v, list):
        raise ConfigError("v must be a single number; use v_map for a map")
    if "v_map" in fields:
        v, _ = load_image(fields["v_map"])
        v = v.real
    lam = fields.get("lambda")
    lam = DEFAULT_LAMBDA[kind] if lam is None else _parse_floats(lam, "lambda")
    return SolverConfig(
        prior=prior,
        alpha=_parse_floats(fields.get("alpha", "1.0"), "alpha"),
        beta=_parse_floats(fields.get("beta", "1.0"), "beta"),
        lam=lam,
        iterations=int(float(fields.get("iterations", "3"))),
        dc_blend_v=v,
        record_history=_parse_bool(fields.get("record_history", "false"),
                                   "record_history"),
    )


def _write_manifest(path, command, pairs):
    lines = ["pcsmri-manifest v1", f"command: {command}", f"version: {__version__}"]
    lines += [f"{k}: {v}" for k, v in pairs]
    Path(path).write_text("\n".join(lines) + "\n")


def _load_sens(path):
    maps, _ = load_array(path, expect_kind="sens")
    support = np.sum(np.abs(maps) ** 2, axis=0) > 0.5
    return SensitivitySet(np.where(support, maps, 0), support)


def _save_sens(path, sens):
    save_array(path, sens.maps, kind="sens", dtype="<c16")


def cmd_phantom(args):
    height = args.height or args.size
    width = args.width or args.size
    img = make_phantom(height, width, args.kind, rng_seed=args.seed,
                       phase_ramp=args.phase_ramp)
    save_image(args.out, img, kind="image")
    _write_manifest(
        str(args.out) + ".manifest", "phantom",
        [("kind", args.kind), ("height", height), ("width", width),
         ("seed", args.seed), ("phase_ramp", args.phase_ramp)],
    )
    print(f"wrote {args.kind} phantom {height}x{width} to {args.out}")
    return 0


def cmd_mask(args):
    height = args.height or args.width
    if args.kind == "random":
        mask = make_random_mask(height, args.width, args.r, args.acs, args.seed)
    else:
        mask = make_equispaced_mask(height, args.width, args.r, args.acs, args.seed)
    save_mask(args.out, mask)
    print(f"wrote {mask_summary(mask)} to {args.out}")
    return 0


def cmd_sense(args):
    ksp, _ = load_array(args.kspace, expect_kind="kspace")
    mask = load_mask(args.mask) if args.mask else None
    sens = estimate_maps(ksp, args.acs, mask=mask, apodize=not args.no_apodize)
    _save_sens(args.out, sens)
    print(f"wrote {sens.n_coils}-coil sensitivity maps to {args.out}")
    return 0


def cmd_simulate(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    height = args.height or args.size
    width = args.width or args.size
    x_gt, sens, y, mask = simulate_case(
        height, width, n_coils=args.coils, phantom=args.phantom,
        mask_kind=args.mask_kind, r=args.r, acs_width=args.acs,
        preset=args.preset, noise_sigma=args.sigma, seed=args.seed,
        phase_ramp=args.phase_ramp,
    )
    save_image(out / "gt", x_gt, kind="gt")
    _save_sens(out / "sens", sens)
    save_mask(out / "mask", mask)
    save_array(out / "kspace", y, kind="kspace")
    _write_manifest(
        out / "manifest.txt", "simulate",
        [("height", height), ("width", width), ("coils", args.coils),
         ("phantom", args.phantom), ("preset", args.preset or "none"),
         ("mask_kind", args.mask_kind), ("r", args.r), ("acs_width", args.acs),
         ("noise_sigma", args.sigma), ("phase_ramp", args.phase_ramp),
         ("seed", args.seed)],
    )
    print(f"simulated case in {out}: {mask_summary(mask)}")
    return 0


def _load_case(case_dir, estimate_sens, acs_width=None):
    case = Path(case_dir)
    y, _ = load_array(case / "kspace", expect_kind="kspace")
    mask = load_mask(case / "mask")
    if estimate_sens or not (case / "sens").exists():
        sens = estimate_maps(y, acs_width or mask.acs_width, mask=mask)
    else:
        sens = _load_sens(case / "sens")
    return y, sens, mask, case


def _write_objective_log(path, state, extra):
    lines = ["# iteration objective"]
    if not state.objective_includes_prior:
        lines.append("# prior term unavailable; objective excludes lambda*R(z)")
    for warning in state.warnings:
        lines.append(f"# warning: {warning}")
    lines += [f"{t} {value!r}" for t, value in enumerate(state.objective_history)]
    lines += extra
    Path(path).write_text("\n".join(lines) + "\n")


def _run_recon(y, sens, mask, config, out_path, gt=None):
    x, state = solve(y, sens, mask, config)
    out_path = Path(out_path)
    save_image(out_path, x, kind="recon")
    extra = []
    if gt is not None:
        x0 = zero_filled(y, sens)
        support = sens.support
        p0 = psnr(np.abs(x0)[support], np.abs(gt)[support])
        p1 = psnr(np.abs(x)[support], np.abs(gt)[support])
        extra = [
            f"# psnr_zero_filled: {min(p0, PSNR_TEXT_CAP):.4f}",
            f"# psnr_recon: {min(p1, PSNR_TEXT_CAP):.4f}",
            f"# psnr_gain: {p1 - p0:.4f}",
        ]
    _write_objective_log(out_path.parent / "objective.log", state, extra)
    if config.record_history:
        it_dir = out_path.parent / "iterates"
        it_dir.mkdir(exist_ok=True)
        for t, xt in enumerate(state.x_history):
            save_image(it_dir / f"x_{t:03d}", xt, kind="iterate")
    return x, state


def cmd_recon(args):
    fields = _read_kv_file(args.config) if args.config else {}
    case = Path(args.case)
    config = _build_solver_config(fields,
                                  default_exchange_dir=case / "exchange")
    if args.dump_iterates:
        config.record_history = True
    y, sens, mask, case = _load_case(case, args.estimate_sens)
    out = Path(args.out) if args.out else case / "recon"
    gt = None
    if (case / "gt").exists():
        gt, _ = load_image(case / "gt")
    _run_recon(y, sens, mask, config, out, gt=gt)
    _write_manifest(
        out.parent / "recon_manifest.txt", "recon",
        [("case", case.name), ("estimate_sens", args.estimate_sens)]
        + [(k, v) for k, v in sorted(fields.items())],
    )
    print(f"wrote reconstruction to {out}")
    return 0


def _format_row(case, method, scores):
    return (
        f"{case},{method},{min(scores['psnr'], PSNR_TEXT_CAP):.4f},"
        f"{scores['ssim']:.6f},{scores['rmse']:.6e},{scores['nmse']:.6e}"
    )


def _print_table(rows):
    header = ("case", "method", "PSNR", "SSIM", "RMSE", "NMSE")
    cells = [header] + [r.split(",") for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
    for c in cells:
        print("  ".join(c[i].ljust(widths[i]) for i in range(len(header))))


def _eval_pair(recon_path, gt_path, sens_path=None):
    rec, _ = load_image(recon_path)
    gt, _ = load_image(gt_path)
    support = None
    if sens_path is not None and Path(sens_path).exists():
        support = _load_sens(sens_path).support
    return evaluate(rec, gt, support=support)


def cmd_eval(args):
    rows = []
    if args.case_dirs:
        for case in sorted(Path(d) for d in args.case_dirs):
            scores = _eval_pair(case / "recon", case / "gt", case / "sens")
            rows.append(_format_row(case.name, args.method, scores))
        rows.sort()
    else:
        if not (args.recon and args.gt):
            raise ConfigError("eval needs --recon and --gt, or --case-dirs")
        scores = _eval_pair(args.recon, args.gt, args.sens)
        rows.append(_format_row(args.case, args.method, scores))
    _print_table(rows)
    if args.report:
        text = ",".join(REPORT_COLUMNS) + "\n" + "\n".join(rows) + "\n"
        Path(args.report).write_text(text)
    return 0


def _expand_grid(fields):
    keys = sorted(fields)
    lists = [[v.strip() for v in fields[k].split(",")] for k in keys]
    combos = []
    for values in itertools.product(*lists):
        combos.append(dict(zip(keys, values)))
    return combos


def _sweep_one(index, combo, y, sens, mask, gt, out_root):
    combo_dir = out_root / f"combo_{index:03d}"
    combo_dir.mkdir(parents=True, exist_ok=True)
    config = _build_solver_config(combo,
                                  default_exchange_dir=combo_dir / "exchange")
    x, _ = _run_recon(y, sens, mask, config, combo_dir / "recon", gt=gt)
    return evaluate(x, gt, support=sens.support)


def cmd_sweep(args):
    fields = _read_kv_file(args.grid)
    y, sens, mask, case = _load_case(args.case, args.estimate_sens)
    try:
        gt, _ = load_image(case / "gt")
    except ContainerError:
        raise ConfigError(f"sweep needs {case / 'gt'} for scoring") from None
    combos = _expand_grid(fields)
    out_root = Path(args.out) if args.out else case / "sweep"
    out_root.mkdir(parents=True, exist_ok=True)

    def run(indexed):
        index, combo = indexed
        label = ";".join(f"{k}={combo[k]}" for k in sorted(combo))
        try:
            scores = _sweep_one(index, combo, y, sens, mask, gt, out_root)
            return _format_row(case.name, label, scores), scores["psnr"], None
        except Exception as exc:
            row = f"{case.name},{label},nan,nan,nan,nan"
            return row, -math.inf, f"# error {label}: {exc}"

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run, enumerate(combos)))
    else:
        results = [run(item) for item in enumerate(combos)]
    rows = [row for row, _, _ in results]
    comments = [c for _, _, c in results if c]
    best_row, best_psnr, _ = max(results, key=lambda r: r[1])
    if math.isfinite(best_psnr):
        comments.append(f"# best: {best_row.split(',')[1]} psnr={best_psnr:.4f}")
    report = args.report or out_root / "report.csv"
    text = ",".join(REPORT_COLUMNS) + "\n" + "\n".join(rows + comments) + "\n"
    Path(report).write_text(text)
    _print_table(rows)
    for comment in comments:
        print(comment)
    return 0


def _add_io_args(sub):
    sub.add_argument("--out", help="output path")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pcsmri",
        description="Multi-coil compressed-sensing MRI reconstruction toolkit.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("phantom", help="write a synthetic test image")
    p.add_argument("--kind", default="shepp_logan", choices=PHANTOM_KINDS)
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--height", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phase-ramp", action="store_true")
    p.add_argument("--out", default="phantom")
    p.set_defaults(func=cmd_phantom)

    p = subs.add_parser("mask", help="write a sampling mask")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--acs", type=int, default=24)
    p.add_argument("--kind", default="random", choices=("random", "equispaced"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="mask")
    p.set_defaults(func=cmd_mask)

    p = subs.add_parser("sense", help="estimate sensitivity maps from k-space")
    p.add_argument("--kspace", required=True)
    p.add_argument("--acs", type=int, default=24)
    p.add_argument("--mask")
    p.add_argument("--no-apodize", action="store_true")
    p.add_argument("--out", default="sens")
    p.set_defaults(func=cmd_sense)

    p = subs.add_parser("simulate", help="generate a full synthetic case")
    p.add_argument("--out", required=True)
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--height", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--coils", type=int, default=4)
    p.add_argument("--phantom", default="shepp_logan", choices=PHANTOM_KINDS)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--mask-kind", default="random",
                   choices=("random", "equispaced"))
    p.add_argument("--r", type=float, default=4.0)
    p.add_argument("--acs", type=int, default=24)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phase-ramp", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("recon", help="reconstruct a case directory")
    p.add_argument("--case", required=True)
    p.add_argument("--config", help="solver config file (key = value lines)")
    p.add_argument("--out")
    p.add_argument("--estimate-sens", action="store_true",
                   help="estimate maps from the ACS even if sens exists")
    p.add_argument("--dump-iterates", action="store_true")
    p.set_defaults(func=cmd_recon)

    p = subs.add_parser("eval", help="score reconstructions against ground truth")
    p.add_argument("--recon")
    p.add_argument("--gt")
    p.add_argument("--sens", help="restrict metrics to the map support")
    p.add_argument("--case", default="case")
    p.add_argument("--method", default="hqs")
    p.add_argument("--case-dirs", nargs="+",
                   help="batch mode: directories holding recon/gt/sens")
    p.add_argument("--report", help="write CSV report to this path")
    p.set_defaults(func=cmd_eval)

    p = subs.add_parser("sweep", help="grid-search solver parameters")
    p.add_argument("--case", required=True)
    p.add_argument("--grid", required=True,
                   help="grid file; comma-separated values are swept")
    p.add_argument("--out")
    p.add_argument("--report")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--estimate-sens", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ShapeError, ProtocolError, EstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ContainerError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 4
    except PriorExecutionError as exc:
        print(f"external prior failed: {exc}", file=sys.stderr)
        return 5
