"""
Command handlers behind run_iqa.py.

Each handler performs one command and returns the text payload for stdout
or the --out file. Errors propagate as IQAError subclasses; run_iqa.py maps
them to exit codes.
"""

import json
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from bench.datasets import import_dataset
from bench.distortions import generate_distortions
from bench.evaluation import (
    ablate_window, ablation_table, evaluate_dataset, level_trend, round_significant,
    summarize_reports, sweep_parameters,
)
from bench.manifest import load_manifest, write_manifest
from bench.plots import save_figure, scatter_with_fit, sweep_heatmap, trend_lines
from commands.config import RunConfig
from model.color_space import RgbImage, load_image, save_image, srgb_to_lab
from model.errors import ConfigError, ManifestParseError
from model.features import FeatureExtractor, write_feature_dump

logger = logging.getLogger(__name__)


def to_json(payload: Any) -> str:
    return json.dumps(round_significant(payload), indent=2) + '\n'


def to_csv(frame: pd.DataFrame) -> str:
    return frame.map(round_significant).to_csv(index=False, lineterminator='\n')


def _extractor(config: RunConfig) -> FeatureExtractor:
    return FeatureExtractor(config.scaling_params(), config.include_approximation, config.boundary)


def _evaluation_options(config: RunConfig) -> Dict[str, Any]:
    return {'include_approximation': config.include_approximation, 'boundary': config.boundary}


def cmd_score(ref_path: str, dist_path: str, config: RunConfig) -> str:
    score = _extractor(config).score_pair(load_image(ref_path), load_image(dist_path))
    payload = score.to_dict()
    if config.format == 'csv':
        return to_csv(pd.DataFrame([{k: v for k, v in payload.items() if k != 'params'}]))
    return to_json(payload)


def cmd_features(image_path: str, out_path: str, config: RunConfig,
                 normalized_png: Optional[str] = None, scaling_csv: Optional[str] = None) -> str:
    """Write the feature vector dump, plus optional normalization and scaling diagnostics."""
    if not out_path:
        raise ConfigError("features needs --out for the feature dump")
    extractor = _extractor(config)
    lab = srgb_to_lab(load_image(image_path))
    feature = extractor.build_feature(lab)
    write_feature_dump(feature, out_path)
    logger.info(f"Wrote {len(feature)} feature values to {out_path}")

    if normalized_png:
        plane = extractor.normalized_reconstruction(lab)
        span = float(np.ptp(plane)) or 1.0
        gray = np.rint(255.0 * (plane - plane.min()) / span).astype(np.uint8)
        save_image(RgbImage.from_array(gray), normalized_png)
        logger.info(f"Wrote normalized reconstruction to {normalized_png}")

    if scaling_csv:
        rows = extractor.scale(lab).diagnostics()
        with open(scaling_csv, 'w') as f:
            f.write(to_csv(pd.DataFrame(rows)))
        logger.info(f"Wrote {len(rows)} scaling rows to {scaling_csv}")

    return to_json({
        'image': image_path,
        'out': out_path,
        'length': len(feature),
        'segments': len(feature.layout),
        'branch': feature.branch,
        'cr': feature.color_ratio,
        'degenerate': feature.degenerate,
    })


def cmd_bench(manifest_path: str, config: RunConfig, plot: Optional[str] = None) -> str:
    manifest = load_manifest(manifest_path)
    report = evaluate_dataset(manifest, config.scaling_params(), config.jobs, config.plcc_raw,
                              **_evaluation_options(config))
    if plot:
        save_figure(scatter_with_fit(report), plot)
    if config.format == 'csv':
        row = {k: v for k, v in report.to_dict().items() if not isinstance(v, (dict, list))}
        return to_csv(pd.DataFrame([row]))
    return to_json(report.to_dict())


def cmd_sweep(manifest_path: str, k1_values: Sequence[float], k2_values: Sequence[float],
              config: RunConfig, plot: Optional[str] = None) -> str:
    manifest = load_manifest(manifest_path)
    grid = sweep_parameters(manifest, k1_values, k2_values, config.scaling_params(), config.jobs,
                            **_evaluation_options(config))
    best = grid.best
    if best is not None:
        logger.info(f"Best cell: K1={best['k1']}, K2={best['k2']}, SRCC={best['srcc']}")
    if plot:
        save_figure(sweep_heatmap(grid), plot)
    if config.format == 'json':
        return to_json({
            'dataset': manifest.dataset_name,
            'cells': grid.cells.to_dict(orient='records'),
            'best': best,
        })
    return grid.to_csv()


def cmd_ablate(manifest_path: str, config: RunConfig, windows: Sequence[int] = (3, 5, 7)) -> str:
    manifest = load_manifest(manifest_path)
    reports = ablate_window(manifest, config.scaling_params(), windows, config.jobs,
                            **_evaluation_options(config))
    if config.format == 'csv':
        return to_csv(ablation_table(reports))
    return to_json({mode: report.to_dict() for mode, report in reports.items()})


def cmd_distort(ref_path: str, kind: str, levels: int, seed: int, out_dir: str,
                manifest_name: Optional[str] = None) -> str:
    """Write a distortion ladder as PNG files; optionally a manifest rating milder levels higher."""
    ref = load_image(ref_path)
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(ref_path))[0]

    written = []
    rows = []
    for item in generate_distortions(ref, kind, levels, seed):
        path = os.path.join(out_dir, f"{stem}_{kind}_{item.level}.png")
        save_image(item.image, path)
        written.append({'path': path, 'level': item.level, 'magnitude': item.magnitude})
        rows.append((os.path.abspath(ref_path), os.path.abspath(path), float(levels + 1 - item.level), kind))

    if manifest_name:
        write_manifest(rows, os.path.join(out_dir, manifest_name))
    return to_json({'ref': ref_path, 'kind': kind, 'seed': seed, 'images': written})


def cmd_trend(image_paths: List[str], config: RunConfig, plot: Optional[str] = None) -> str:
    images = {os.path.basename(p): load_image(p) for p in image_paths}
    trend = level_trend(images, config.boundary)
    if plot:
        save_figure(trend_lines(trend), plot)
    if config.format == 'csv':
        return to_csv(trend)
    return to_json(trend.to_dict(orient='records'))


def cmd_summary(report_paths: List[str], config: RunConfig) -> str:
    reports = []
    for path in report_paths:
        try:
            with open(path, 'r') as f:
                reports.append(json.load(f))
        except FileNotFoundError:
            raise ManifestParseError(f"report not found: {path}")
        except json.JSONDecodeError as e:
            raise ManifestParseError(f"{path}: invalid report JSON ({e})")
    table = summarize_reports(reports)
    if config.format == 'csv':
        return to_csv(table)
    return to_json(table.to_dict(orient='records'))


def cmd_import(dataset: str, root: str, manifest_path: str) -> str:
    rows = import_dataset(dataset, root)
    write_manifest(rows, manifest_path)
    return to_json({'dataset': dataset, 'manifest': manifest_path, 'rows': len(rows)})
