"""
Dataset evaluation: scoring manifests, correlation reports, parameter sweeps,
window ablation and supporting baselines.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from skimage.color import rgb2gray
from skimage.metrics import peak_signal_noise_ratio

from bench.correlation import kendall, pearson, rmse, spearman
from bench.logistic import MIN_POINTS, LogisticFit, fit_logistic
from bench.manifest import DatasetManifest, ManifestRow
from model.color_space import RgbImage, load_image, srgb_to_lab
from model.errors import ConfigError, DegenerateInputError, DimensionMismatchError, IQAError
from model.features import FeatureExtractor
from model.frequency_scaling import ScalingParams
from model.wavelet_bank import LEVELS, WaveletBank, count_nonincreasing_transitions, level_statistics

logger = logging.getLogger(__name__)

PSNR_SENTINEL = 99.0
SIGNIFICANT_DIGITS = 6
SWEEP_COLUMNS = ['k1', 'k2', 'srcc', 'krcc', 'plcc']
TREND_MIN_TRANSITIONS = 5


def round_significant(value: Any, digits: int = SIGNIFICANT_DIGITS) -> Any:
    """Round floats (recursively inside dicts and lists) to ``digits`` significant digits."""
    if value is None:
        return None
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        if value == 0:
            return 0.0
        return float(f"{value:.{digits}g}")
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, dict):
        return {k: round_significant(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_significant(v, digits) for v in value]
    return value


@dataclass
class CorrelationReport:
    dataset: str
    params: ScalingParams
    n_pairs: int
    n_failed: int = 0
    srcc: Optional[float] = None
    krcc: Optional[float] = None
    plcc: Optional[float] = None
    rmse: Optional[float] = None
    plcc_raw: Optional[float] = None
    logistic: Optional[LogisticFit] = None
    degenerate: Optional[str] = None
    failures: List[Dict[str, Any]] = field(default_factory=list)
    by_tag: Dict[str, 'CorrelationReport'] = field(default_factory=dict)
    objective: List[float] = field(default_factory=list)
    mos: List[float] = field(default_factory=list)

    @property
    def abs_srcc(self) -> Optional[float]:
        return None if self.srcc is None else abs(self.srcc)

    def to_dict(self) -> Dict[str, Any]:
        report = {
            'dataset': self.dataset,
            'n_pairs': self.n_pairs,
            'n_failed': self.n_failed,
            'srcc': self.srcc,
            'abs_srcc': self.abs_srcc,
            'krcc': self.krcc,
            'plcc': self.plcc,
            'rmse': self.rmse,
            'logistic': self.logistic.to_dict() if self.logistic else None,
            'params': {
                'k1': self.params.k1,
                'k2': self.params.k2,
                'cr_threshold': self.params.cr_threshold,
                'mode': self.params.mode,
            },
        }
        if self.plcc_raw is not None:
            report['plcc_raw'] = self.plcc_raw
        if self.degenerate:
            report['degenerate'] = self.degenerate
        if self.failures:
            report['failures'] = self.failures
        if self.by_tag:
            report['by_tag'] = {tag: sub.to_dict() for tag, sub in self.by_tag.items()}
        return round_significant(report)


def correlate(dataset: str, objective: Sequence[float], mos: Sequence[float], params: ScalingParams,
              n_failed: int = 0, plcc_raw: bool = False) -> CorrelationReport:
    """Rank correlations on the raw scores; PLCC and RMSE after the logistic map."""
    objective = [float(v) for v in objective]
    mos = [float(v) for v in mos]
    report = CorrelationReport(dataset, params, n_pairs=len(objective), n_failed=n_failed,
                               objective=objective, mos=mos)
    try:
        report.srcc = spearman(objective, mos)
        report.krcc = kendall(objective, mos)
        if plcc_raw:
            report.plcc_raw = pearson(objective, mos)
    except DegenerateInputError as e:
        logger.warning(f"{dataset}: correlations not computed ({e})")
        report.degenerate = str(e)
        return report

    if len(objective) < MIN_POINTS:
        logger.warning(f"{dataset}: {len(objective)} pairs, logistic fit needs {MIN_POINTS}")
        return report

    report.logistic = fit_logistic(objective, mos)
    fitted = report.logistic.predict(objective)
    report.rmse = rmse(fitted, mos)
    try:
        report.plcc = pearson(fitted, mos)
    except DegenerateInputError as e:
        logger.warning(f"{dataset}: PLCC not computed ({e})")
        report.degenerate = str(e)
    return report


class DatasetEvaluator:
    """Scores manifest rows in parallel and reduces them to correlation reports.

    Each row is normalized once; every parameter set in ``param_grid`` then only
    re-runs scaling and pooling. Results are keyed by row index, so the reports
    do not depend on the number of workers.
    """

    def __init__(self, params: Optional[ScalingParams] = None, jobs: int = 1,
                 include_approximation: bool = True, boundary: str = 'symmetric', plcc_raw: bool = False):
        if jobs < 1:
            raise ConfigError(f"jobs must be at least 1, got {jobs}")
        self.params = params or ScalingParams()
        self.jobs = jobs
        self.plcc_raw = plcc_raw
        self.extractor = FeatureExtractor(self.params, include_approximation, boundary)

    def score_row(self, index: int, row: ManifestRow, param_grid: List[ScalingParams]) -> Dict[str, Any]:
        try:
            ref = load_image(row.ref_path)
            dist = load_image(row.dist_path)
            if ref.pixels.shape != dist.pixels.shape:
                raise DimensionMismatchError(
                    f"reference is {ref.width}x{ref.height}, distorted is {dist.width}x{dist.height}"
                )
            ref_norm = self.extractor.normalized_decompositions(srgb_to_lab(ref))
            dist_norm = self.extractor.normalized_decompositions(srgb_to_lab(dist))
            scores = [self.extractor.score_normalized(ref_norm, dist_norm, params) for params in param_grid]
        except IQAError as e:
            logger.error(f"Row {index + 1} failed: {e}")
            return {'row': index + 1, 'success': False, 'error': str(e), 'type': type(e).__name__}
        except Exception as e:
            logger.exception(f"Row {index + 1} failed unexpectedly")
            return {'row': index + 1, 'success': False, 'error': str(e), 'type': type(e).__name__}

        return {
            'row': index + 1,
            'success': True,
            'e': [s.e for s in scores],
            'branch': scores[0].branch,
            'mos': row.mos,
            'tag': row.tag,
        }

    def score_manifest(self, manifest: DatasetManifest,
                       param_grid: Optional[List[ScalingParams]] = None) -> List[Dict[str, Any]]:
        param_grid = param_grid or [self.params]
        logger.info(f"Scoring {len(manifest)} pairs of {manifest.dataset_name} "
                    f"under {len(param_grid)} parameter set(s) with {self.jobs} job(s)")
        if self.jobs == 1:
            return [self.score_row(i, row, param_grid) for i, row in enumerate(manifest.rows)]
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            futures = [pool.submit(self.score_row, i, row, param_grid) for i, row in enumerate(manifest.rows)]
            return [f.result() for f in futures]

    def report(self, manifest: DatasetManifest, results: List[Dict[str, Any]], params: ScalingParams,
               cell: int = 0, with_tags: bool = True) -> CorrelationReport:
        succeeded = [r for r in results if r['success']]
        failures = [r for r in results if not r['success']]
        report = correlate(manifest.dataset_name, [r['e'][cell] for r in succeeded],
                           [r['mos'] for r in succeeded], params, len(failures), self.plcc_raw)
        report.failures = failures
        if failures:
            logger.warning(f"{manifest.dataset_name}: {len(failures)} of {len(results)} rows failed")

        if with_tags:
            for tag in sorted({r['tag'] for r in succeeded}):
                rows = [r for r in succeeded if r['tag'] == tag]
                if len(rows) < MIN_POINTS:
                    continue
                report.by_tag[tag] = correlate(f"{manifest.dataset_name}/{tag}", [r['e'][cell] for r in rows],
                                               [r['mos'] for r in rows], params, plcc_raw=self.plcc_raw)
        return report

    def evaluate(self, manifest: DatasetManifest) -> CorrelationReport:
        return self.report(manifest, self.score_manifest(manifest), self.params)


@dataclass
class SweepGrid:
    k1_values: List[float]
    k2_values: List[float]
    cells: pd.DataFrame
    reports: List[CorrelationReport] = field(default_factory=list)

    @property
    def best(self) -> Optional[Dict[str, Any]]:
        """The cell with the largest |SRCC|; the first one wins ties."""
        valid = self.cells.dropna(subset=['srcc'])
        if valid.empty:
            return None
        index = valid['srcc'].abs().idxmax()
        return round_significant(self.cells.loc[index].to_dict())

    def to_csv(self, path_or_buf=None):
        frame = self.cells[SWEEP_COLUMNS].map(round_significant)
        return frame.to_csv(path_or_buf, index=False, lineterminator='\n')


def evaluate_dataset(manifest: DatasetManifest, params: Optional[ScalingParams] = None, jobs: int = 1,
                     plcc_raw: bool = False, **options) -> CorrelationReport:
    return DatasetEvaluator(params, jobs, plcc_raw=plcc_raw, **options).evaluate(manifest)


def sweep_parameters(manifest: DatasetManifest, k1_values: Sequence[float], k2_values: Sequence[float],
                     params: Optional[ScalingParams] = None, jobs: int = 1, **options) -> SweepGrid:
    """Evaluate every (K1, K2) cell; cells are ordered K1-major."""
    if not k1_values or not k2_values:
        raise ConfigError("sweep axes must be non-empty")
    base = params or ScalingParams()
    grid = [replace(base, k1=float(k1), k2=float(k2)) for k1 in k1_values for k2 in k2_values]

    evaluator = DatasetEvaluator(base, jobs, **options)
    results = evaluator.score_manifest(manifest, grid)
    reports = [evaluator.report(manifest, results, cell_params, cell, with_tags=False)
               for cell, cell_params in enumerate(grid)]

    cells = pd.DataFrame(
        [(p.k1, p.k2, r.srcc, r.krcc, r.plcc) for p, r in zip(grid, reports)],
        columns=SWEEP_COLUMNS,
    )
    logger.info(f"Sweep complete: {len(k1_values)}x{len(k2_values)} cells")
    return SweepGrid([float(v) for v in k1_values], [float(v) for v in k2_values], cells, reports)


def ablate_window(manifest: DatasetManifest, params: Optional[ScalingParams] = None,
                  windows: Sequence[int] = (3, 5, 7), jobs: int = 1, **options) -> Dict[str, CorrelationReport]:
    """Center-surround against each single-window size, otherwise identical settings."""
    base = params or ScalingParams()
    modes = ['cs'] + [f"win{k}" for k in windows]
    reports = {}
    for mode in modes:
        logger.info(f"Ablation: mode {mode}")
        reports[mode] = evaluate_dataset(manifest, replace(base, mode=mode), jobs, **options)
    return reports


def ablation_table(reports: Dict[str, CorrelationReport]) -> pd.DataFrame:
    return pd.DataFrame(
        [(mode, r.srcc, r.krcc, r.plcc, r.rmse) for mode, r in reports.items()],
        columns=['mode', 'srcc', 'krcc', 'plcc', 'rmse'],
    )


def summarize_reports(reports: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    """Mean SRCC/KRCC/PLCC per dataset plus an overall average row."""
    frame = pd.DataFrame(
        [{'dataset': r['dataset'], 'srcc': r.get('srcc'), 'krcc': r.get('krcc'), 'plcc': r.get('plcc')}
         for r in reports]
    )
    if frame.empty:
        raise ConfigError("no reports to summarize")
    per_dataset = frame.groupby('dataset', sort=True)[['srcc', 'krcc', 'plcc']].mean().reset_index()
    overall = per_dataset[['srcc', 'krcc', 'plcc']].mean()
    average = pd.DataFrame([{'dataset': 'average', **overall.to_dict()}])
    return pd.concat([per_dataset, average], ignore_index=True)


def level_trend(images: Dict[str, RgbImage], boundary: str = 'symmetric') -> pd.DataFrame:
    """Per-level detail deviation of each image's L plane, coarse to fine, with a trend verdict."""
    bank = WaveletBank(boundary)
    rows = []
    for name, image in images.items():
        stats = level_statistics(bank.decompose(srgb_to_lab(image).L, 'L'))
        transitions = count_nonincreasing_transitions(stats)
        rows.append({
            'image': name,
            **{f"sigma_{s}": stats[s] for s in range(1, LEVELS + 1)},
            'nonincreasing': transitions,
            'trend_holds': transitions >= TREND_MIN_TRANSITIONS,
        })
    return pd.DataFrame(rows)


def psnr_baseline(ref: RgbImage, dist: RgbImage) -> float:
    """PSNR in dB on the luma of two 8-bit images; identical images give the 99 dB sentinel."""
    if ref.pixels.shape != dist.pixels.shape:
        raise DimensionMismatchError(
            f"reference is {ref.width}x{ref.height}, distorted is {dist.width}x{dist.height}"
        )
    ref_luma = rgb2gray(ref.pixels)
    dist_luma = rgb2gray(dist.pixels)
    if np.array_equal(ref_luma, dist_luma):
        return PSNR_SENTINEL
    return min(float(peak_signal_noise_ratio(ref_luma, dist_luma, data_range=1.0)), PSNR_SENTINEL)
