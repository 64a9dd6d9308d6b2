"""
Dataset manifests: the canonical ref,dist,mos,tag CSV interchange.
"""

import logging
import math
import os
from dataclasses import dataclass
from typing import List, Tuple

import pandas as pd

from model.errors import ManifestParseError, MissingFilesError

logger = logging.getLogger(__name__)

MANIFEST_COLUMNS = ['ref', 'dist', 'mos', 'tag']
MIN_ROWS = 2


@dataclass(frozen=True)
class ManifestRow:
    ref_path: str
    dist_path: str
    mos: float
    tag: str


@dataclass(frozen=True)
class DatasetManifest:
    rows: Tuple[ManifestRow, ...]
    dataset_name: str

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def tags(self) -> List[str]:
        return sorted({row.tag for row in self.rows})

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.ref_path, r.dist_path, r.mos, r.tag) for r in self.rows],
            columns=MANIFEST_COLUMNS,
        )


def load_manifest(path: str, check_files: bool = True) -> DatasetManifest:
    """Read and validate a manifest CSV.

    Relative image paths are resolved against the manifest's directory. Data
    rows are numbered from 1 in error messages. With ``check_files`` every
    missing image is collected before a single MissingFilesError is raised.
    """
    if not os.path.isfile(path):
        raise ManifestParseError(f"manifest not found: {path}")

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8', skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise ManifestParseError(f"{path}: empty file, expected header {','.join(MANIFEST_COLUMNS)}")
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise ManifestParseError(f"{path}: {e}")

    columns = [c.strip() for c in frame.columns]
    if columns != MANIFEST_COLUMNS:
        raise ManifestParseError(
            f"{path}: header must be {','.join(MANIFEST_COLUMNS)}, got {','.join(columns)}"
        )
    frame.columns = columns

    base_dir = os.path.dirname(os.path.abspath(path))
    rows = []
    for index, record in enumerate(frame.itertuples(index=False), start=1):
        ref, dist, mos_text, tag = (str(v).strip() for v in record)
        if not ref or not dist:
            raise ManifestParseError("image path is empty", row=index)
        try:
            mos = float(mos_text)
        except ValueError:
            raise ManifestParseError(f"mos '{mos_text}' is not a number", row=index)
        if not math.isfinite(mos):
            raise ManifestParseError(f"mos '{mos_text}' is not finite", row=index)
        rows.append(ManifestRow(
            ref_path=os.path.normpath(os.path.join(base_dir, ref)),
            dist_path=os.path.normpath(os.path.join(base_dir, dist)),
            mos=mos,
            tag=tag,
        ))

    if len(rows) < MIN_ROWS:
        raise ManifestParseError(f"{path}: {len(rows)} data rows, at least {MIN_ROWS} are required")

    if check_files:
        missing = []
        for row in rows:
            for image_path in (row.ref_path, row.dist_path):
                if not os.path.isfile(image_path) and image_path not in missing:
                    missing.append(image_path)
        if missing:
            raise MissingFilesError(missing)

    name = os.path.splitext(os.path.basename(path))[0]
    logger.info(f"Loaded manifest {name}: {len(rows)} rows")
    return DatasetManifest(tuple(rows), name)


def write_manifest(rows: List[Tuple[str, str, float, str]], path: str):
    """Write manifest rows; paths are stored relative to the manifest's directory."""
    base_dir = os.path.dirname(os.path.abspath(path))
    frame = pd.DataFrame(rows, columns=MANIFEST_COLUMNS)
    for column in ('ref', 'dist'):
        frame[column] = [
            os.path.relpath(p, base_dir).replace(os.sep, '/') if os.path.isabs(p) else p
            for p in frame[column]
        ]
    frame.to_csv(path, index=False, float_format='%.6g')
    logger.info(f"Wrote manifest with {len(frame)} rows to {path}")
