"""Command line: simulate, recon, dcf and compare.

Exit codes: 0 ok, 2 usage, 3 data error, 4 numeric failure.
"""
import argparse
import os
import sys
from typing import List, Optional

import numpy as np
from yacs.config import CfgNode

from src.config import read_config, update_config
from src.container import (
    read_dataset,
    read_image,
    save_montage,
    save_residual_plot,
    write_arrays,
    write_dataset,
    write_image_files,
)
from src.data import derive_geometry, undersample
from src.dcf import compute_dcf
from src.errors import DataError, NumericError
from src.metrics import compare_images
from src.nufft import build_kernel
from src.simulation import (
    make_coil_maps,
    make_phantom,
    make_radial_trajectory,
    make_spiral_trajectory,
    shepp_logan_spec,
    simulate_acquisition,
)
from src.solver import prepare_trajectory, reconstruct
from src.utils.common import write_json
from src.utils.report import RunReport
from src.utils.setseed import set_seed

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
SCHEME_TAGS = {"skip": "R", "first": "P"}


def positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def positive_float(value: str) -> float:
    number = float(value)
    if not number > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return number


def load_config(args: argparse.Namespace) -> CfgNode:
    """Config file plus command line overrides."""
    config = read_config(args.config)
    return update_config(
        config,
        max_iterations=getattr(args, "iterations", None),
        tikhonov_lambda=getattr(args, "lam", None),
        threads=args.threads,
        seed=args.seed,
        output__dir=args.output_dir,
    )


def make_report(config: CfgNode) -> RunReport:
    return RunReport(
        output_dir=config.output.dir,
        wandb_project=config.wandb.project if config.wandb.enabled else None,
        wandb_name=config.wandb.name or None,
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    """Write a simulated container and its ground-truth sidecar."""
    config = load_config(args)
    rng = set_seed(config.seed)
    out = config.output.dir
    grid_size = args.grid_size or 2 * args.matrix_size
    report = make_report(config)

    with report.stage("simulate", coils=args.coils, spokes=args.spokes, read=args.read) as record:
        phantom = make_phantom(shepp_logan_spec(args.matrix_size))
        maps = make_coil_maps(args.matrix_size, args.coils)
        if args.trajectory == "spiral":
            trajectory = make_spiral_trajectory(args.spokes, args.read, grid_size)
        else:
            trajectory = make_radial_trajectory(
                args.spokes, args.read, grid_size, alternate=args.alternate
            )
        acquisition = simulate_acquisition(
            phantom,
            maps,
            trajectory,
            grid_size,
            snr=args.snr,
            rng=rng,
            noise_scan_samples=args.noise_scan,
        )
        data_path = os.path.join(out, f"{args.name}.h5")
        truth_path = os.path.join(out, f"{args.name}_truth.h5")
        write_dataset(data_path, acquisition.dataset)
        write_arrays(
            truth_path, image=phantom, reference=acquisition.reference, sensitivities=maps.maps
        )
        record.update(path=data_path, truth=truth_path, noise_level=acquisition.noise_level)
    report.close()
    return EXIT_OK


def cmd_recon(args: argparse.Namespace) -> int:
    """Reconstruct every configured undersampling value."""
    config = load_config(args)
    set_seed(config.seed)
    out = config.output.dir
    report = make_report(config)
    with open(os.path.join(out, "config.yaml"), "w") as f:
        f.write(config.dump())

    with report.stage("read", path=args.input) as record:
        full = read_dataset(args.input, config.dataset_keys)
        record.update(n_coils=full.n_coils, n_spokes=full.n_spokes, n_read=full.n_read)

    scheme = config.undersampling.scheme
    histories, summaries, montage = {}, {}, []
    for value in config.undersampling.factors:
        tag = f"{SCHEME_TAGS[scheme]}{int(value)}"
        with report.stage("undersample", scheme=scheme, value=int(value)) as record:
            dataset = undersample(full, scheme, int(value))
            record["n_spokes"] = dataset.n_spokes
        result = reconstruct(dataset, config, report=report, verbose=True)

        with report.stage("write", tag=tag):
            stem = os.path.join(out, tag)
            write_image_files(result.initial_image, f"{stem}_initial", phase=config.output.phase)
            write_image_files(result.final_image, f"{stem}_final", phase=config.output.phase)
            for k, image in enumerate(result.intermediate_images, start=1):
                write_image_files(image, f"{stem}_iter{k:02d}")
        histories[tag] = result.residual_history
        summaries[tag] = result.summary()
        montage.append([result.initial_image, result.final_image])
        report.log({f"{tag}/final_delta": result.residual_history[-1]})

    write_json({"runs": summaries}, os.path.join(out, "residuals.json"))
    save_residual_plot(histories, os.path.join(out, "residuals.png"))
    save_montage(
        montage,
        os.path.join(out, "montage.png"),
        row_labels=list(histories),
        col_labels=["initial", "final"],
    )
    report.close()
    return EXIT_OK


def cmd_dcf(args: argparse.Namespace) -> int:
    """Compute and write the density compensation of a dataset."""
    config = load_config(args)
    out = config.output.dir
    report = make_report(config)
    dataset = prepare_trajectory(read_dataset(args.input, config.dataset_keys), config)
    with report.stage("dcf", method=config.dcf) as record:
        ratio = config.oversampling_ratio_override or dataset.oversampling_ratio
        geometry = derive_geometry(dataset.trajectory, ratio)
        kernel = build_kernel(
            width=config.kernel_width,
            n_table_points=config.kernel_table_points,
            oversampling_ratio=geometry.oversampling_ratio,
            lookup_mode=config.kernel_lookup,
            beta=config.kernel_beta,
        )
        weights = compute_dcf(dataset.trajectory, kernel, config.dcf)
        write_image_files(weights, os.path.join(out, "dcf"))
        record.update(min=float(weights.min()), max=float(weights.max()))
    report.close()
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    """Compare an image against a reference and write the report."""
    config = load_config(args)
    out = config.output.dir
    report = make_report(config)
    with report.stage("compare", image=args.image, reference=args.reference) as record:
        image = read_image(args.image, args.key)
        reference = read_image(args.reference, args.ref_key)
        mask = None if args.mask is None else np.abs(read_image(args.mask)) > 0
        comparison = compare_images(image, reference, mask=mask, q=args.quantile)
        summary = comparison.summary()
        write_json(summary, os.path.join(out, "compare.json"))
        write_image_files(comparison.diff_map, os.path.join(out, "diff"))
        record.update(nrmse=summary["nrmse"], ssim=summary["ssim"])
    report.log({"compare/nrmse": summary["nrmse"], "compare/ssim": summary["ssim"]})
    report.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, type=str, help="YAML/JSON run config")
    common.add_argument("--output-dir", default=None, type=str, help="output directory")
    common.add_argument("--seed", default=None, type=int, help="seed")
    common.add_argument(
        "--threads", default=None, type=int, help="coil-parallel workers, 0 for all cores"
    )

    parser = argparse.ArgumentParser(description="CG-SENSE reconstruction.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="write a simulated dataset")
    sim.add_argument("--matrix-size", default=64, type=positive_int, help="phantom size")
    sim.add_argument("--coils", default=8, type=positive_int, help="number of coils")
    sim.add_argument("--spokes", default=101, type=positive_int, help="spokes or interleaves")
    sim.add_argument("--read", default=128, type=positive_int, help="samples per spoke")
    sim.add_argument("--grid-size", default=None, type=positive_int, help="oversampled grid")
    sim.add_argument("--trajectory", default="radial", choices=["radial", "spiral"])
    sim.add_argument("--alternate", action="store_true", help="reverse every odd spoke")
    sim.add_argument("--snr", default=None, type=positive_float, help="signal to noise ratio")
    sim.add_argument("--noise-scan", default=0, type=int, help="noise scan length")
    sim.add_argument("--name", default="simulated", type=str, help="file stem")
    sim.set_defaults(func=cmd_simulate)

    recon = sub.add_parser("recon", parents=[common], help="run CG-SENSE")
    recon.add_argument("input", type=str, help="k-space container")
    recon.add_argument("--iterations", default=None, type=positive_int, help="CG iterations")
    recon.add_argument("--lambda", dest="lam", default=None, type=float, help="Tikhonov weight")
    recon.set_defaults(func=cmd_recon)

    dcf = sub.add_parser("dcf", parents=[common], help="write density compensation")
    dcf.add_argument("input", type=str, help="k-space container")
    dcf.set_defaults(func=cmd_dcf)

    compare = sub.add_parser("compare", parents=[common], help="compare two images")
    compare.add_argument("image", type=str, help="image file")
    compare.add_argument("reference", type=str, help="reference image file")
    compare.add_argument("--mask", default=None, type=str, help="mask image, nonzero = inside")
    compare.add_argument("--key", default=None, type=str, help="container entry of image")
    compare.add_argument("--ref-key", default=None, type=str, help="container entry of reference")
    compare.add_argument("--quantile", default=0.95, type=float, help="normalization quantile")
    compare.set_defaults(func=cmd_compare)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as e:
        print(f"[{e.stage}] error: {e}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as e:
        print(f"[{e.stage}] error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"[io] error: {e}", file=sys.stderr)
        return EXIT_DATA
