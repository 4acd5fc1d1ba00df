"""Command-line pipeline: generate, estimate, segment, accelerate, plot.

Stages share one run directory (--out): estimate writes entropy_<i>.csv,
segment reads those and writes labels_<i>.json, accelerate reads the
labels and writes the accelerated bundle, plot renders entropy_<i>.svg.
File suffixes follow the trajectory's position in the dataset manifest.

Exit codes: 0 success, 1 usage error, 2 data error (missing or
malformed inputs), 3 internal error. The DEMOSPEEDUP_LOG environment
variable sets the log level (debug, info, warning, error).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .accelerator import (
    AccelerationConfig,
    accelerate_dataset,
    parse_method,
    speedup_stats,
    write_accelerated_output,
)
from .entropy import (
    MODES,
    EntropyConfig,
    EntropySeries,
    entropy_csv_name,
    read_entropy_csv,
    trajectory_entropy,
    write_entropy_csv,
)
from .hdbscan import HdbscanParams, default_min_cluster_size
from .isolation_forest import IsolationForestParams
from .model import (
    Dataset,
    DatasetFormatError,
    contacts_file_name,
    load_dataset,
    read_contacts,
    write_dataset,
)
from .samplers import FileSampler
from .segmenter import labels_file_name, read_labels, segment, write_labels
from .svgplot import plot_file_name, write_entropy_svg
from .testkit import (
    NoiseProfile,
    generate_dataset,
    read_profile,
    sampler_from_ground_truth,
    write_ground_truth,
)

log = logging.getLogger("demospeedup")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class PipelineRunConfig:
    """One full run, as the CLI flags express it."""

    dataset: str
    out: str
    sampler: str = "synthetic"
    n_samples: int = 50
    chunk_len: int = 8
    entropy_mode: str = "plogp"
    bandwidth: str = "silverman"
    contamination: float = 0.05
    min_cluster_size: int = 0  # 0 = derive from trajectory length
    r_low: int = 2
    r_high: int = 4
    k_acc: int = 8
    method: str = "demospeedup"
    seed: int = 0
    jobs: int = 1


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1, not argparse's default 2
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_bandwidth(value: str) -> float | str:
    if value == "silverman":
        return value
    try:
        width = float(value)
    except ValueError:
        raise UsageError(f"--bandwidth must be 'silverman' or a number, got {value!r}") from None
    if width <= 0:
        raise UsageError(f"--bandwidth must be positive, got {value}")
    return width


def _build_sampler(spec: str, dataset: Dataset, dataset_dir: Path):
    if spec == "synthetic":
        gt = dataset_dir / "ground_truth.json"
        if not gt.is_file():
            raise DataError(f"{gt}: synthetic sampler needs ground_truth.json in the dataset")
        return sampler_from_ground_truth(dataset, gt)
    kind, _, arg = spec.partition(":")
    if kind == "file" and arg:
        return FileSampler.for_dataset(arg, dataset)
    raise UsageError(f"--sampler must be 'synthetic' or 'file:<dir>', got {spec!r}")


def _load_dataset(path: str) -> Dataset:
    try:
        return load_dataset(path)
    except DatasetFormatError as exc:
        raise DataError(str(exc)) from exc


def _estimate_worker(dataset_dir: str, sampler_spec: str, index: int, cfg_kwargs: dict):
    dataset = load_dataset(dataset_dir)
    sampler = _build_sampler(sampler_spec, dataset, Path(dataset_dir))
    traj = dataset.trajectories[index]
    series = trajectory_entropy(sampler, traj, EntropyConfig(**cfg_kwargs))
    return index, series.values


def cmd_estimate(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args.dataset)
    out = Path(args.out)
    cfg_kwargs = dict(
        n_samples=args.n_samples,
        chunk_len=args.chunk,
        bandwidth=_parse_bandwidth(args.bandwidth),
        mode=args.entropy_mode,
        seed=args.seed,
    )
    sampler = _build_sampler(args.sampler, dataset, Path(args.dataset))
    cfg = EntropyConfig(**cfg_kwargs)
    results = {}
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [
                pool.submit(_estimate_worker, args.dataset, args.sampler, i, cfg_kwargs)
                for i in range(len(dataset.trajectories))
            ]
            for future in futures:
                index, values = future.result()
                results[index] = values
    else:
        for i, traj in enumerate(dataset.trajectories):
            log.info("estimating %s (%d frames)", traj.trajectory_id, traj.n_frames)
            results[i] = trajectory_entropy(sampler, traj, cfg).values
    for i, traj in enumerate(dataset.trajectories):
        series = EntropySeries(traj.trajectory_id, results[i], mode=cfg.mode_tag)
        write_entropy_csv(series, out / entropy_csv_name(i))
    return EXIT_OK


def _read_series(out: Path, index: int, traj) -> EntropySeries:
    path = out / entropy_csv_name(index)
    if not path.is_file():
        raise DataError(f"{path}: missing entropy series (run estimate first)")
    try:
        series = read_entropy_csv(path, traj.trajectory_id)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    if series.n_frames != traj.n_frames:
        raise DataError(
            f"{path}: {series.n_frames} frames but {traj.trajectory_id} has {traj.n_frames}"
        )
    return series


def cmd_segment(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args.dataset)
    out = Path(args.out)
    forest = IsolationForestParams(contamination=args.contamination, seed=args.seed)
    for i, traj in enumerate(dataset.trajectories):
        series = _read_series(out, i, traj)
        mcs = args.min_cluster_size or default_min_cluster_size(traj.n_frames)
        labeling = segment(series, forest, HdbscanParams(mcs, seed=args.seed))
        write_labels(labeling, out / labels_file_name(i))
        log.info(
            "%s: %d precision frames of %d",
            traj.trajectory_id,
            int(labeling.precision_mask().sum()),
            traj.n_frames,
        )
    return EXIT_OK


def _read_labeling(out: Path, index: int, traj):
    path = out / labels_file_name(index)
    if not path.is_file():
        raise DataError(f"{path}: missing labels (run segment first)")
    try:
        labeling = read_labels(path)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: {exc}") from exc
    if labeling.n_frames != traj.n_frames or labeling.trajectory_id != traj.trajectory_id:
        raise DataError(f"{path}: labels do not match trajectory {traj.trajectory_id}")
    return labeling


def cmd_accelerate(args: argparse.Namespace) -> int:
    try:
        cfg = AccelerationConfig(args.r_low, args.r_high, args.k_acc, args.method)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    dataset = _load_dataset(args.dataset)
    out = Path(args.out)
    name, _ = parse_method(cfg.method)
    labelings = entropies = contacts = None
    if name == "demospeedup":
        labelings = {
            traj.trajectory_id: _read_labeling(out, i, traj)
            for i, traj in enumerate(dataset.trajectories)
        }
    elif name == "awe":
        entropies = {
            traj.trajectory_id: _read_series(out, i, traj)
            for i, traj in enumerate(dataset.trajectories)
        }
    elif name == "contact":
        contacts = {}
        for i, traj in enumerate(dataset.trajectories):
            path = Path(args.dataset) / contacts_file_name(i)
            if path.is_file():
                try:
                    contacts[traj.trajectory_id] = read_contacts(path)
                except DatasetFormatError as exc:
                    raise DataError(str(exc)) from exc
            else:
                log.warning("%s: no contact events, whole trajectory is casualness", path)
    accel = accelerate_dataset(dataset, cfg, labelings, entropies, contacts)
    stats = speedup_stats(dataset, cfg, labelings, entropies, contacts)
    write_accelerated_output(accel, dataset, stats, out)
    log.info("mean speedup %.3f over %d trajectories", stats.mean_ratio, len(stats.per_trajectory))
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args.dataset)
    out = Path(args.out)
    for i, traj in enumerate(dataset.trajectories):
        series = _read_series(out, i, traj)
        labeling = _read_labeling(out, i, traj)
        write_entropy_svg(series, labeling, out / plot_file_name(i))
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        base = read_profile(args.profile)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise DataError(f"{args.profile}: {exc}") from exc
    profiles = [base]
    if args.count > 1:
        profiles = [
            NoiseProfile(
                n_frames=base.n_frames,
                action_dim=base.action_dim,
                segments=base.segments,
                control_points=base.control_points,
                seed=base.seed + i,
                trajectory_id=f"traj{i}",
                frequency_hz=base.frequency_hz,
            )
            for i in range(args.count)
        ]
    dataset, _, truths = generate_dataset(profiles)
    write_dataset(dataset, args.out)
    write_ground_truth(truths, profiles, Path(args.out) / "ground_truth.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="demospeedup", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="materialize a synthetic dataset from a noise profile")
    gen.add_argument("--profile", required=True, help="noise profile JSON")
    gen.add_argument("--out", required=True, help="dataset directory to write")
    gen.add_argument("--count", type=int, default=1, help="number of trajectories")
    gen.set_defaults(func=cmd_generate)

    est = sub.add_parser("estimate", help="per-frame action entropy to entropy_<i>.csv")
    est.add_argument("--dataset", required=True)
    est.add_argument("--out", required=True)
    est.add_argument("--sampler", default="synthetic", help="'synthetic' or 'file:<dir>'")
    est.add_argument("--n-samples", type=int, default=50)
    est.add_argument("--chunk", type=int, default=8)
    est.add_argument("--entropy-mode", choices=MODES, default="plogp")
    est.add_argument("--bandwidth", default="silverman")
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--jobs", type=int, default=1)
    est.set_defaults(func=cmd_estimate)

    seg = sub.add_parser("segment", help="precision/casualness labels to labels_<i>.json")
    seg.add_argument("--dataset", required=True)
    seg.add_argument("--out", required=True)
    seg.add_argument("--contamination", type=float, default=0.05)
    seg.add_argument("--min-cluster-size", type=int, default=0, help="0 derives from length")
    seg.add_argument("--seed", type=int, default=0)
    seg.set_defaults(func=cmd_segment)

    acc = sub.add_parser("accelerate", help="downsampled training bundle into --out")
    acc.add_argument("--dataset", required=True)
    acc.add_argument("--out", required=True)
    acc.add_argument("--r-low", type=int, default=2)
    acc.add_argument("--r-high", type=int, default=4)
    acc.add_argument("--k-acc", type=int, default=8)
    acc.add_argument(
        "--method",
        default="demospeedup",
        help="demospeedup | constant:<r> | awe:<eps> | contact:<window>",
    )
    acc.set_defaults(func=cmd_accelerate)

    plo = sub.add_parser("plot", help="entropy curve with region bands to entropy_<i>.svg")
    plo.add_argument("--dataset", required=True)
    plo.add_argument("--out", required=True)
    plo.set_defaults(func=cmd_plot)
    return parser


def run_pipeline(cfg: PipelineRunConfig) -> int:
    """estimate -> segment -> accelerate -> plot with one configuration."""
    argv = [
        "estimate",
        "--dataset", cfg.dataset, "--out", cfg.out,
        "--sampler", cfg.sampler,
        "--n-samples", str(cfg.n_samples),
        "--chunk", str(cfg.chunk_len),
        "--entropy-mode", cfg.entropy_mode,
        "--bandwidth", str(cfg.bandwidth),
        "--seed", str(cfg.seed),
        "--jobs", str(cfg.jobs),
    ]
    code = main(argv)
    if code != EXIT_OK:
        return code
    code = main(
        [
            "segment",
            "--dataset", cfg.dataset, "--out", cfg.out,
            "--contamination", str(cfg.contamination),
            "--min-cluster-size", str(cfg.min_cluster_size),
            "--seed", str(cfg.seed),
        ]
    )
    if code != EXIT_OK:
        return code
    code = main(
        [
            "accelerate",
            "--dataset", cfg.dataset, "--out", cfg.out,
            "--r-low", str(cfg.r_low), "--r-high", str(cfg.r_high),
            "--k-acc", str(cfg.k_acc), "--method", cfg.method,
        ]
    )
    if code != EXIT_OK:
        return code
    return main(["plot", "--dataset", cfg.dataset, "--out", cfg.out])


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("DEMOSPEEDUP_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"demospeedup: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DatasetFormatError) as exc:
        print(f"demospeedup: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"demospeedup: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
