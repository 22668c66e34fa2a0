"""Conjugate gradient solver and the end-to-end CG-SENSE pipeline.

- cg_solve: the CG iteration on a NormalOperator.
- reconstruct: prewhitening, sensitivities, DCF, operator, CG, filter.
"""
import warnings
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional

import numpy as np
from tqdm import tqdm
from yacs.config import CfgNode

from src.coils import (
    NoiseModel,
    SensitivitySet,
    estimate_noise_covariance,
    estimate_sensitivities_sos,
    prewhiten,
)
from src.config import get_default_config
from src.data import (
    GridGeometry,
    KSpaceDataset,
    derive_geometry,
    rescale_trajectory,
    validate_dataset,
)
from src.dcf import compute_dcf
from src.encoding import EncodingOperator, NormalOperator
from src.errors import OperatorNotPSDError, ShapeError, ValidationError
from src.kspace_filter import FilterSpec, apply_filter
from src.nufft import build_kernel, crop_center
from src.utils.report import RunReport

RESIDUAL_SLACK = 1e-6


@dataclass
class ReconResult:
    """Images and diagnostics of one CG-SENSE run."""

    initial_image: np.ndarray
    final_image: np.ndarray
    residual_history: List[float]
    iterations_run: int
    dropped_sample_count: int = 0
    intermediate_images: List[np.ndarray] = field(default_factory=list)
    filter_record: Optional[Dict[str, Any]] = None
    warnings: List[str] = field(default_factory=list)
    geometry: Optional[GridGeometry] = None

    def summary(self) -> Dict[str, Any]:
        return {
            "iterations_run": self.iterations_run,
            "residual_history": list(self.residual_history),
            "dropped_sample_count": self.dropped_sample_count,
            "filter": self.filter_record,
            "warnings": list(self.warnings),
            "matrix_size": None if self.geometry is None else self.geometry.matrix_size,
            "grid_size": None if self.geometry is None else self.geometry.grid_size,
        }


def cg_solve(
    op: NormalOperator,
    rhs_samples: np.ndarray,
    config: Optional[CfgNode] = None,
    report: Optional[RunReport] = None,
    verbose: bool = False,
) -> ReconResult:
    """Solve A y = b by conjugate gradients from a zero start.

    Args:
        op: normal operator providing A, b and the intensity correction.
        rhs_samples: measured data turned into b by ``op.right_hand_side``.
        config: run config (max_iterations, tolerance_epsilon, save_intermediate).
        report: receives per-iteration delta when wandb is enabled.
        verbose: show a progress bar.

    Returns:
        ReconResult with unfiltered intensity-corrected images and
        residual_history = [1, delta_1, ...].
    """
    config = config or get_default_config()
    max_iterations = int(config.max_iterations)
    epsilon = float(config.tolerance_epsilon)
    keep_iterates = bool(config.save_intermediate)

    b = op.right_hand_side(rhs_samples)
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rr0 = float(np.vdot(r, r).real)
    history = [1.0]
    notes: List[str] = []
    iterates: List[np.ndarray] = []
    result = ReconResult(
        initial_image=op.intensity_correct(b),
        final_image=op.intensity_correct(x),
        residual_history=history,
        iterations_run=0,
        dropped_sample_count=op.dropped_sample_count,
        intermediate_images=iterates,
        warnings=notes,
    )
    if rr0 == 0:
        return result

    rr = rr0
    pbar = tqdm(range(max_iterations), disable=not verbose)
    for i in pbar:
        q = op.normal(p)
        curvature = float(np.vdot(p, q).real)
        if curvature <= 0:
            pbar.close()
            raise OperatorNotPSDError(i, curvature)
        alpha = rr / curvature
        x = x + alpha * p
        r = r - alpha * q
        rr_new = float(np.vdot(r, r).real)
        delta = rr_new / rr0
        if delta > history[-1] * (1.0 + RESIDUAL_SLACK):
            message = f"residual increased at iteration {i + 1}: {history[-1]:.3e} -> {delta:.3e}"
            warnings.warn(message, UserWarning)
            notes.append(message)
        history.append(delta)
        result.iterations_run = i + 1

        pbar.set_description(f"CG: [{i + 1:03d}] delta: {delta:.3e}")
        if report is not None:
            report.log({"cg/delta": delta}, step=i + 1)
        if keep_iterates:
            iterates.append(op.intensity_correct(x))

        if rr_new == 0 or (epsilon > 0 and delta < epsilon):
            break
        p = r + (rr_new / rr) * p
        rr = rr_new
    pbar.close()

    result.final_image = op.intensity_correct(x)
    return result


def filter_spec_from_config(config: CfgNode) -> FilterSpec:
    return FilterSpec(
        kind=config.filter.kind,
        k_c=config.filter.k_c,
        beta=float(config.filter.beta),
        unit=config.filter.k_c_unit,
    )


def prepare_trajectory(dataset: KSpaceDataset, config: CfgNode) -> KSpaceDataset:
    """Bring the trajectory into grid units as configured."""
    if config.trajectory_units != "fov":
        return dataset
    trajectory, ratio = rescale_trajectory(dataset.trajectory, dataset.oversampling_ratio)
    return replace(dataset, trajectory=trajectory, oversampling_ratio=ratio)


def noise_model_for(dataset: KSpaceDataset) -> Optional[NoiseModel]:
    """Noise model from the stored covariance, else from the noise scan."""
    if dataset.noise_covariance is not None:
        return NoiseModel.from_covariance(dataset.noise_covariance)
    if dataset.noise_scan is not None:
        return NoiseModel.from_covariance(estimate_noise_covariance(dataset.noise_scan))
    return None


def reconstruct(
    dataset: KSpaceDataset,
    config: Optional[CfgNode] = None,
    report: Optional[RunReport] = None,
    sensitivities: Optional[SensitivitySet] = None,
    verbose: bool = False,
) -> ReconResult:
    """Run the full CG-SENSE pipeline on one dataset.

    Args:
        dataset: k-space data (already undersampled if desired).
        config: run config; defaults if None.
        report: stage log; an in-memory report is used if None.
        sensitivities: maps to use instead of stored or estimated ones.
        verbose: show the CG progress bar.

    Returns:
        ReconResult whose final image is intensity corrected and filtered.
    """
    config = config or get_default_config()
    report = report or RunReport(verbose=False)
    threads = int(config.threads)

    with report.stage("validate", n_coils=dataset.n_coils, n_spokes=dataset.n_spokes):
        findings = validate_dataset(dataset).findings
        if findings:
            raise ValidationError(findings)
        dataset = prepare_trajectory(dataset, config)

    with report.stage("geometry") as record:
        ratio = config.oversampling_ratio_override or dataset.oversampling_ratio
        geometry = derive_geometry(dataset.trajectory, ratio)
        kernel = build_kernel(
            width=config.kernel_width,
            n_table_points=config.kernel_table_points,
            oversampling_ratio=geometry.oversampling_ratio,
            lookup_mode=config.kernel_lookup,
            beta=config.kernel_beta,
        )
        record.update(
            matrix_size=geometry.matrix_size,
            grid_size=geometry.grid_size,
            oversampling_ratio=geometry.oversampling_ratio,
            kernel_beta=kernel.shape_beta,
        )

    if config.prewhiten and not dataset.whitened:
        with report.stage("prewhiten") as record:
            noise = noise_model_for(dataset)
            record["applied"] = noise is not None
            if noise is not None:
                dataset = prewhiten(dataset, noise)
                if sensitivities is not None:
                    sensitivities = sensitivities.whiten(noise.whitener)

    with report.stage("dcf", method=config.dcf):
        dcf = compute_dcf(dataset.trajectory, kernel, config.dcf)

    with report.stage("sensitivities") as record:
        if sensitivities is not None:
            record["source"] = "given"
        elif dataset.sensitivities is not None:
            record["source"] = "dataset"
            maps = np.asarray(dataset.sensitivities)
            if maps.shape[-1] > geometry.matrix_size:
                maps = crop_center(maps, geometry.matrix_size)
            sensitivities = SensitivitySet.from_maps(maps)
        else:
            record["source"] = "sos"
            sensitivities = estimate_sensitivities_sos(
                dataset,
                kernel,
                geometry,
                window_width=config.sensitivity_window_width,
                threshold=config.sensitivity_threshold,
                dcf=dcf,
                threads=threads,
            )
        if sensitivities.shape != (geometry.matrix_size,) * 2:
            raise ShapeError(
                f"sensitivities {sensitivities.maps.shape} do not match "
                f"matrix size {geometry.matrix_size}"
            )
        record["support_pixels"] = int(sensitivities.support_mask.sum())

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        op = EncodingOperator(
            sensitivities,
            dataset.trajectory,
            kernel,
            geometry,
            dcf=dcf,
            lam=config.tikhonov_lambda,
            threads=threads,
        )
    build_notes = [str(w.message) for w in caught]
    for note in build_notes:
        warnings.warn(note, UserWarning)

    with report.stage("cg", max_iterations=config.max_iterations) as record:
        result = cg_solve(op, dataset.samples, config, report=report, verbose=verbose)
        record.update(
            iterations_run=result.iterations_run,
            final_delta=result.residual_history[-1],
            dropped_samples=result.dropped_sample_count,
        )

    with report.stage("filter", kind=config.filter.kind):
        spec = filter_spec_from_config(config)
        result.final_image = apply_filter(result.final_image, spec, geometry)
        result.filter_record = spec.record(geometry)

    result.warnings = build_notes + result.warnings
    result.geometry = geometry
    return result
