"""
Read-only adapters from public IQA dataset layouts to manifest rows.

Each adapter returns (ref_path, dist_path, score, tag) tuples with absolute
paths; write_manifest turns them into the canonical CSV. Scores are copied as
the dataset publishes them: TID2013 ships MOS, CSIQ and LIVE ship DMOS.
"""

import logging
import os
from typing import Callable, Dict, List, Tuple

import numpy as np
import pandas as pd
from scipy.io import loadmat

from model.errors import ConfigError, ManifestParseError, MissingFilesError

logger = logging.getLogger(__name__)

Row = Tuple[str, str, float, str]

TID2013_DISTORTIONS = [
    'awgn', 'awgn2', 'scn', 'mn', 'hfn', 'in', 'qn', 'gblur', 'id', 'jpeg', 'jp2k', 'jpegt',
    'jp2kt', 'nepn', 'lbdi', 'ms', 'cc', 'ccs', 'mgn', 'cn', 'lcni', 'icqd', 'ca', 'ssr',
]

# CSIQ spreadsheet dst_type -> (folder under dst_imgs, tag)
CSIQ_DISTORTIONS = {
    'noise': ('awgn', 'awgn'),
    'jpeg': ('jpeg', 'jpeg'),
    'jpeg 2000': ('jpeg2000', 'jp2k'),
    'blur': ('blur', 'gblur'),
    'fnoise': ('fnoise', 'fnoise'),
    'contrast': ('contrast', 'contrast'),
}

# LIVE release 2 stores the five distortion folders back to back in one DMOS vector.
LIVE_DISTORTIONS = [('jp2k', 227), ('jpeg', 233), ('wn', 174), ('gblur', 174), ('fastfading', 174)]


def _find(directory: str, filename: str) -> str:
    """Case-insensitive lookup of ``filename`` inside ``directory``."""
    exact = os.path.join(directory, filename)
    if os.path.isfile(exact):
        return exact
    if os.path.isdir(directory):
        wanted = filename.lower()
        for entry in os.listdir(directory):
            if entry.lower() == wanted:
                return os.path.join(directory, entry)
    return exact


def _check(rows: List[Row]) -> List[Row]:
    missing = sorted({p for row in rows for p in row[:2] if not os.path.isfile(p)})
    if missing:
        raise MissingFilesError(missing)
    return rows


def tid2013_manifest(root: str) -> List[Row]:
    """Rows from mos_with_names.txt ("<mos> <iXX_DD_L.bmp>" per line)."""
    listing = os.path.join(root, 'mos_with_names.txt')
    if not os.path.isfile(listing):
        raise ManifestParseError(f"TID2013 score file not found: {listing}")

    rows = []
    with open(listing, 'r') as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                mos_text, filename = line.split()
                mos = float(mos_text)
                name, index, _ = os.path.splitext(filename)[0].split('_')
                tag = TID2013_DISTORTIONS[int(index) - 1]
            except (ValueError, IndexError):
                raise ManifestParseError(f"cannot parse '{line.strip()}'", row=number)
            rows.append((
                _find(os.path.join(root, 'reference_images'), f"{name}.bmp"),
                _find(os.path.join(root, 'distorted_images'), filename),
                mos,
                tag,
            ))
    return _check(rows)


def csiq_manifest(root: str) -> List[Row]:
    """Rows from the all_by_image sheet of csiq.DMOS.xlsx."""
    sheet = os.path.join(root, 'csiq.DMOS.xlsx')
    if not os.path.isfile(sheet):
        raise ManifestParseError(f"CSIQ score sheet not found: {sheet}")
    scores = pd.read_excel(sheet, sheet_name='all_by_image', header=3, usecols=[3, 5, 6, 8])
    scores.columns = ['image', 'dst_type', 'dst_lev', 'dmos']
    scores = scores.dropna()

    rows = []
    for number, record in enumerate(scores.itertuples(index=False), start=1):
        try:
            folder, tag = CSIQ_DISTORTIONS[str(record.dst_type).strip().lower()]
        except KeyError:
            raise ManifestParseError(f"unknown distortion type '{record.dst_type}'", row=number)
        image = str(record.image).strip()
        level = int(record.dst_lev)
        rows.append((
            _find(os.path.join(root, 'src_imgs'), f"{image}.png"),
            _find(os.path.join(root, 'dst_imgs', folder), f"{image}.{folder}.{level}.png"),
            float(record.dmos),
            tag,
        ))
    return _check(rows)


def live_manifest(root: str) -> List[Row]:
    """Rows from dmos_realigned.mat and refnames_all.mat; entries with DMOS 0 are references."""
    dmos_file = os.path.join(root, 'dmos_realigned.mat')
    release = os.path.join(root, 'databaserelease2')
    names_file = os.path.join(release, 'refnames_all.mat')
    for required in (dmos_file, names_file):
        if not os.path.isfile(required):
            raise ManifestParseError(f"LIVE file not found: {required}")

    dmos = loadmat(dmos_file)['dmos_new'].squeeze()
    names = np.hstack(np.hstack(loadmat(names_file)['refnames_all']))
    if len(names) != len(dmos):
        raise ManifestParseError(f"{len(names)} reference names for {len(dmos)} DMOS values")

    bounds = np.cumsum([0] + [count for _, count in LIVE_DISTORTIONS])
    rows = []
    for i, (name, score) in enumerate(zip(names, dmos)):
        if score == 0:
            continue
        group = int(np.searchsorted(bounds, i, side='right')) - 1
        folder = LIVE_DISTORTIONS[group][0]
        rows.append((
            _find(os.path.join(release, 'refimgs'), str(name)),
            _find(os.path.join(release, folder), f"img{i + 1 - bounds[group]}.bmp"),
            float(score),
            folder,
        ))
    return _check(rows)


DATASET_ADAPTERS: Dict[str, Callable[[str], List[Row]]] = {
    'tid2013': tid2013_manifest,
    'csiq': csiq_manifest,
    'live': live_manifest,
}


def import_dataset(name: str, root: str) -> List[Row]:
    try:
        adapter = DATASET_ADAPTERS[name.lower()]
    except KeyError:
        raise ConfigError(f"Unknown dataset: {name} (expected one of {', '.join(DATASET_ADAPTERS)})")
    rows = adapter(root)
    logger.info(f"Imported {len(rows)} rows from {name} at {root}")
    return rows
