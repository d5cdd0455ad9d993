"""Command line interface.

Subcommands: ingest (raw corpus -> canonical CSV), evaluate (real vs
generated utility metrics), audit (empirical epsilon lower bound on a
mechanism). JSON goes to stdout, diagnostics to stderr. Exit codes: 0 on
success, 1 on runtime failure, 2 on usage or contract errors.

Options may also come from a flat key=value config file (# comments allowed);
explicit flags win over the file, the file wins over defaults.
"""

from __future__ import annotations

import argparse
import functools
import sys
import warnings
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from trajbench.accounting import UnitOfPrivacy
from trajbench.audit import (
    estimate_epsilon_lb_two_sided,
    make_cell_nonzero_event,
    make_neighbours,
)
from trajbench.core.normalize import compute_normalization, normalize
from trajbench.core.preprocess import PreprocessConfig, preprocess_geolife
from trajbench.core.types import BEIJING_5TH_RING, BoundingBox, TrajectoryDataset
from trajbench.gen_eval import convergence_report
from trajbench.ingest import load_fs, load_geolife, read_canonical, write_canonical
from trajbench.mechanisms import noisy_count_correct, noisy_count_flawed
from trajbench.metrics.grid import GridSpec
from trajbench.metrics.point import (
    hausdorff_points,
    hotspot_preservation,
    jsd_histogram,
    range_query_error,
    subsample_equal,
    wasserstein,
)
from trajbench.metrics.traj import (
    distribution_distance,
    match_closest,
    segment_length_distribution,
    travelled_distance_distribution,
)
from trajbench.report import dump_report, make_report

DEFAULT_METRICS = [
    "hd_points",
    "wd_sliced",
    "jsd",
    "range_query",
    "hotspot",
    "travelled_wd",
    "segment_wd",
]
ALL_METRICS = DEFAULT_METRICS + ["dtw_matched", "hd_traj_matched", "convergence"]

AUDIT_MECHANISMS = ("noisy-count-flawed", "noisy-count-correct")

MIN_AUDIT_TRIALS = 100


class UsageError(Exception):
    """Bad arguments or violated input contract: exit code 2."""


def _parse_config_file(path: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{line_no}: expected key = value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _merge_config(args: argparse.Namespace, keys: List[str]) -> None:
    """Fill argparse defaults from the config file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    cfg = _parse_config_file(args.config)
    unknown = set(cfg) - set(keys)
    if unknown:
        raise UsageError(f"unknown config keys {sorted(unknown)}; allowed: {sorted(keys)}")
    for key, raw in cfg.items():
        if getattr(args, f"_explicit_{key}", False):
            continue
        setattr(args, key, raw)


class _Tracking(argparse.Action):
    """Store the value and remember the flag was given explicitly."""

    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        setattr(namespace, f"_explicit_{self.dest}", True)


def _parse_grid(spec: str, bbox: BoundingBox) -> GridSpec:
    try:
        nx_s, ny_s = spec.lower().split("x")
        nx, ny = int(nx_s), int(ny_s)
    except ValueError as exc:
        raise UsageError(f"bad grid spec {spec!r}; expected NXxNY like 64x64") from exc
    try:
        return GridSpec(bbox=bbox, nx=nx, ny=ny)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _parse_bbox(spec: str) -> BoundingBox:
    try:
        a, b, c, d = (float(x) for x in spec.split(","))
        return BoundingBox(min_lat=a, max_lat=b, min_lon=c, max_lon=d)
    except ValueError as exc:
        raise UsageError(
            f"bad bbox {spec!r}; expected min_lat,max_lat,min_lon,max_lon"
        ) from exc


def _union_bbox(a: BoundingBox, b: BoundingBox) -> BoundingBox:
    return BoundingBox(
        min(a.min_lat, b.min_lat),
        max(a.max_lat, b.max_lat),
        min(a.min_lon, b.min_lon),
        max(a.max_lon, b.max_lon),
    )


# ---------------------------------------------------------------- ingest


def _cmd_ingest(args: argparse.Namespace) -> int:
    _merge_config(args, ["bbox", "normalize", "interval_s", "gap_s", "max_len", "min_len"])
    fmt = args.format
    if fmt == "geolife":
        ds, load_report = load_geolife(args.input)
    elif fmt == "fs":
        ds, load_report = load_fs(args.input)
    elif fmt == "canonical":
        ds = read_canonical(args.input)
        load_report = {
            "n_trajectories": len(ds),
            "n_points": ds.n_points,
            "n_users": len(ds.users()),
        }
    else:
        raise UsageError(f"unknown format {fmt!r}")

    prep_report = None
    if args.preprocess:
        if fmt == "fs":
            raise UsageError("preprocessing needs timestamps; check-in data has none")
        bbox = _parse_bbox(args.bbox) if args.bbox else BEIJING_5TH_RING
        cfg = PreprocessConfig(
            bbox=bbox,
            interval_s=float(args.interval_s),
            gap_s=float(args.gap_s),
            max_len=int(args.max_len),
            min_len=int(args.min_len),
        )
        ds, prep_report = preprocess_geolife(ds, cfg)
        if not len(ds):
            raise UsageError("preprocessing removed every trajectory; check the bbox")

    if args.normalize:
        params = compute_normalization(ds, variant=args.normalize)
        ds = normalize(ds, params)

    write_canonical(ds, args.output)

    results = {
        "load": load_report,
        "n_users": len(ds.users()),
        "n_trajectories": len(ds),
        "n_points": ds.n_points,
        "normalized": ds.normalized,
        "output": str(args.output),
    }
    if prep_report is not None:
        results["preprocess"] = prep_report
    params = {
        "format": fmt,
        "input": str(args.input),
        "normalize": args.normalize,
        "preprocess": bool(args.preprocess),
    }
    sys.stdout.write(dump_report(make_report("ingest", params, results)))
    return 0


# ---------------------------------------------------------------- evaluate


def _load_pair(args) -> tuple[TrajectoryDataset, TrajectoryDataset]:
    real = read_canonical(args.real)
    gen = read_canonical(args.gen)
    if real.normalized != gen.normalized:
        raise UsageError(
            "real and generated datasets disagree on normalization; "
            "bring both into the same space first"
        )
    return real, gen


def _point_sets(real, gen, max_points: int, seed: int):
    A, B = real.all_coords(), gen.all_coords()
    rng = np.random.default_rng(seed)
    if len(A) > max_points:
        A = A[np.sort(rng.choice(len(A), size=max_points, replace=False))]
    if len(B) > max_points:
        B = B[np.sort(rng.choice(len(B), size=max_points, replace=False))]
    return subsample_equal(A, B, seed=seed)


def _cmd_evaluate(args: argparse.Namespace) -> int:
    _merge_config(args, ["metrics", "grid", "seed", "max_points", "k"])
    real, gen = _load_pair(args)
    seed = int(args.seed)
    metric_names = [m.strip() for m in str(args.metrics).split(",") if m.strip()]
    bad = [m for m in metric_names if m not in ALL_METRICS]
    if bad:
        raise UsageError(f"unknown metrics {bad}; available: {ALL_METRICS}")

    bbox = _union_bbox(real.bbox, gen.bbox)
    grid = _parse_grid(str(args.grid), bbox)
    dist_metric = "euclidean" if real.normalized else "haversine"
    wd_units = "euclidean" if real.normalized else "meters"

    A, B = _point_sets(real, gen, int(args.max_points), seed)

    results: Dict[str, object] = {}
    for name in metric_names:
        if name == "hd_points":
            results[name] = {
                "value": hausdorff_points(A, B, metric=dist_metric),
                "metric": dist_metric,
                "n_points": len(A),
            }
        elif name == "wd_sliced":
            results[name] = {
                "value": wasserstein(A, B, method="sliced", n_proj=100, seed=seed, units=wd_units),
                "units": wd_units,
                "n_proj": 100,
                "n_points": len(A),
            }
        elif name == "jsd":
            results[name] = {
                "value": jsd_histogram(real.all_coords(), gen.all_coords(), grid),
                "grid": f"{grid.nx}x{grid.ny}",
            }
        elif name == "range_query":
            results[name] = {
                "value": range_query_error(
                    real.all_coords(),
                    gen.all_coords(),
                    n_queries=100,
                    radius_frac=0.05,
                    seed=seed,
                    bbox=bbox,
                    metric=dist_metric,
                ),
                "n_queries": 100,
                "radius_frac": 0.05,
            }
        elif name == "hotspot":
            results[name] = {
                **hotspot_preservation(real.all_coords(), gen.all_coords(), grid, k=int(args.k)),
                "grid": f"{grid.nx}x{grid.ny}",
            }
        elif name in ("travelled_wd", "segment_wd"):
            fn = (
                travelled_distance_distribution
                if name == "travelled_wd"
                else segment_length_distribution
            )
            d_real = fn(real, metric=dist_metric)
            d_gen = fn(gen, metric=dist_metric)
            if d_real.size == 0 or d_gen.size == 0:
                raise UsageError(f"{name}: a dataset has no segments to pool")
            results[name] = {
                "value": distribution_distance(d_real, d_gen, method="wd1"),
                "metric": dist_metric,
            }
        elif name in ("dtw_matched", "hd_traj_matched"):
            ground = "dtw" if name == "dtw_matched" else "hausdorff"
            matching = match_closest(gen, real, ground=ground)
            results[name] = {
                "value": matching.mean_distance,
                "n_pairs": len(matching.pairs),
                "n_unmatched_real": len(matching.unmatched_real),
            }
        elif name == "convergence":
            results[name] = convergence_report(real, gen)

    if args.plots:
        _write_plots(Path(args.plots), real, gen)

    params = {
        "real": str(args.real),
        "gen": str(args.gen),
        "metrics": metric_names,
        "grid": f"{grid.nx}x{grid.ny}",
        "seed": seed,
        "max_points": int(args.max_points),
        "normalized": real.normalized,
    }
    sys.stdout.write(dump_report(make_report("evaluate", params, results)))
    return 0


def _write_plots(out_dir: Path, real: TrajectoryDataset, gen: TrajectoryDataset) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(7, 7))
    A, B = real.all_coords(), gen.all_coords()
    ax.scatter(A[:, 1], A[:, 0], s=2, alpha=0.4, label="real")
    ax.scatter(B[:, 1], B[:, 0], s=2, alpha=0.4, label="generated")
    ax.set_xlabel("lon")
    ax.set_ylabel("lat")
    ax.legend(loc="upper right")
    fig.savefig(out_dir / "points.svg", format="svg")
    plt.close(fig)
    print(f"wrote {out_dir / 'points.svg'}", file=sys.stderr)


# ---------------------------------------------------------------- audit


def _cmd_audit(args: argparse.Namespace) -> int:
    _merge_config(args, ["grid", "seed", "trials", "confidence", "epsilon"])
    trials = int(args.trials)
    if trials < MIN_AUDIT_TRIALS:
        raise UsageError(f"trials must be at least {MIN_AUDIT_TRIALS}, got {trials}")
    epsilon = float(args.epsilon)
    if epsilon <= 0:
        raise UsageError(f"epsilon must be positive, got {epsilon}")
    confidence = float(args.confidence)

    ds = read_canonical(args.input)
    grid = _parse_grid(str(args.grid), ds.bbox)
    uop = UnitOfPrivacy("location")
    pair = make_neighbours(ds, uop, target=None, seed=int(args.seed))
    traj_id, point_idx = pair.target
    victim = next(t for t in ds.trajectories if t.traj_id == traj_id).points[point_idx]
    cell = grid.cell_of(victim.lat, victim.lon)
    if cell is None:
        raise UsageError("audit target fell outside the grid; adjust bbox or grid")

    if args.mechanism == "noisy-count-flawed":
        mech_fn = noisy_count_flawed
    elif args.mechanism == "noisy-count-correct":
        mech_fn = functools.partial(noisy_count_correct, postprocess=None)
    else:
        raise UsageError(
            f"unknown mechanism {args.mechanism!r}; available: {AUDIT_MECHANISMS}"
        )
    mechanism = lambda data, seed: mech_fn(data, grid, epsilon, seed=seed)  # noqa: E731
    event = make_cell_nonzero_event(cell)

    result = estimate_epsilon_lb_two_sided(
        mechanism, pair.d1, pair.d2, event, trials=trials,
        confidence=confidence, seed=int(args.seed),
    )

    params = {
        "input": str(args.input),
        "mechanism": args.mechanism,
        "claimed_epsilon": epsilon,
        "trials": trials,
        "confidence": confidence,
        "seed": int(args.seed),
        "uop": uop.kind,
        "grid": f"{grid.nx}x{grid.ny}",
        "target": {"traj_id": traj_id, "point_index": point_idx},
        "event": f"cell_nonzero[{cell[0]},{cell[1]}]",
    }
    results = {
        "eps_lb": result.eps_lb,
        "eps_lb_cp": result.eps_lb_cp,
        "p1_hat": result.p1_hat,
        "p2_hat": result.p2_hat,
        "p1_ci": list(result.p1_ci),
        "p2_ci": list(result.p2_ci),
        "sentinel": result.sentinel,
        "inconclusive": result.inconclusive,
        "verdict": result.verdict(epsilon),
    }
    sys.stdout.write(dump_report(make_report("audit", params, results)))
    return 0


# ---------------------------------------------------------------- main


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajbench",
        description="Trajectory privacy benchmarking: ingest, evaluate, audit.",
    )
    parser.add_argument("--strict", action="store_true", help="turn warnings into errors")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_ing = sub.add_parser("ingest", help="load a raw corpus and write canonical CSV")
    p_ing.add_argument("--format", required=True, choices=["geolife", "fs", "canonical"])
    p_ing.add_argument("--input", required=True)
    p_ing.add_argument("--output", required=True)
    p_ing.add_argument("--preprocess", action="store_true", help="run the cleanup pipeline")
    p_ing.add_argument("--bbox", action=_Tracking, default=None, help="min_lat,max_lat,min_lon,max_lon")
    p_ing.add_argument("--interval-s", dest="interval_s", action=_Tracking, default=5.0)
    p_ing.add_argument("--gap-s", dest="gap_s", action=_Tracking, default=60.0)
    p_ing.add_argument("--max-len", dest="max_len", action=_Tracking, default=200)
    p_ing.add_argument("--min-len", dest="min_len", action=_Tracking, default=10)
    p_ing.add_argument("--normalize", action=_Tracking, default=None, choices=["minmax", "paper_verbatim"])
    p_ing.add_argument("--config", default=None)
    p_ing.set_defaults(fn=_cmd_ingest)

    p_eval = sub.add_parser("evaluate", help="score a generated dataset against a real one")
    p_eval.add_argument("--real", required=True)
    p_eval.add_argument("--gen", required=True)
    p_eval.add_argument("--metrics", action=_Tracking, default=",".join(DEFAULT_METRICS))
    p_eval.add_argument("--grid", action=_Tracking, default="64x64")
    p_eval.add_argument("--seed", action=_Tracking, default=0)
    p_eval.add_argument("--max-points", dest="max_points", action=_Tracking, default=2000)
    p_eval.add_argument("--k", action=_Tracking, default=10, help="hotspot top-k")
    p_eval.add_argument("--plots", default=None, help="directory for SVG figures")
    p_eval.add_argument("--config", default=None)
    p_eval.set_defaults(fn=_cmd_evaluate)

    p_aud = sub.add_parser("audit", help="empirically lower-bound a mechanism's epsilon")
    p_aud.add_argument("--input", required=True)
    p_aud.add_argument("--mechanism", required=True, choices=list(AUDIT_MECHANISMS))
    p_aud.add_argument("--epsilon", action=_Tracking, default=1.0, help="claimed epsilon")
    p_aud.add_argument("--trials", action=_Tracking, default=10000)
    p_aud.add_argument("--confidence", action=_Tracking, default=0.95)
    p_aud.add_argument("--grid", action=_Tracking, default="32x32")
    p_aud.add_argument("--seed", action=_Tracking, default=0)
    p_aud.add_argument("--config", default=None)
    p_aud.set_defaults(fn=_cmd_audit)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.strict:
            with warnings.catch_warnings():
                warnings.simplefilter("error")
                return args.fn(args)
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Warning as exc:  # --strict promotes warnings
        print(f"error (strict): {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
