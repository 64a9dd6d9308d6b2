#!/usr/bin/env python3
"""
Script to create a synthetic benchmark dataset: N reference images, a
distortion ladder per reference and kind, and a manifest for run_iqa.py.

Usage:
    python data/create_synthetic_manifest.py <out_dir> [n_refs] [levels] [size]

    out_dir: Directory that receives the images and manifest.csv
    n_refs: Number of reference images (default: 3)
    levels: Severity levels per distortion kind (default: 5)
    size: Width and height of every image in pixels (default: 128)

Examples:
    python data/create_synthetic_manifest.py data/synthetic
    python data/create_synthetic_manifest.py /tmp/ladder 5 5 256

The manifest rates the mildest level highest: mos = levels + 1 - level.
"""

import os
import sys
from typing import List, Tuple

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))

from bench.distortions import distortion_kinds, generate_distortions
from bench.manifest import write_manifest
from bench.synthetic import pink_noise_image
from model.color_space import load_image, save_image


class SyntheticDatasetCreator:
    """Writes reference images, distortion ladders and their manifest."""

    def __init__(self, out_dir: str, size: int = 128, seed: int = 0):
        self.out_dir = out_dir
        self.size = size
        self.seed = seed

    def create_reference(self, index: int) -> str:
        path = os.path.join(self.out_dir, 'reference', f"ref{index:02d}.png")
        os.makedirs(os.path.dirname(path), exist_ok=True)
        save_image(pink_noise_image(self.size, self.size, seed=self.seed + index), path)
        return path

    def create_ladders(self, ref_path: str, index: int, levels: int) -> List[Tuple[str, str, float, str]]:
        """Write every kind's ladder for one reference and return its manifest rows."""
        ref = load_image(ref_path)
        rows = []
        for kind in distortion_kinds():
            folder = os.path.join(self.out_dir, kind)
            os.makedirs(folder, exist_ok=True)
            for item in generate_distortions(ref, kind, levels, seed=self.seed + index):
                path = os.path.join(folder, f"ref{index:02d}_{item.level}.png")
                save_image(item.image, path)
                rows.append((os.path.abspath(ref_path), os.path.abspath(path), float(levels + 1 - item.level), kind))
        return rows

    def create_dataset(self, n_refs: int, levels: int) -> str:
        print(f"Creating synthetic dataset: {n_refs} references, {levels} levels, {self.size}px")
        rows = []
        for index in range(1, n_refs + 1):
            ref_path = self.create_reference(index)
            rows.extend(self.create_ladders(ref_path, index, levels))
            print(f"Created ladders for {ref_path}")

        manifest_path = os.path.join(self.out_dir, 'manifest.csv')
        write_manifest(rows, manifest_path)
        print(f"Wrote {len(rows)} rows to {manifest_path}")
        return manifest_path


def main():
    """Main function to create the synthetic dataset."""
    if len(sys.argv) < 2 or sys.argv[1] in ['-h', '--help']:
        print("Usage: python data/create_synthetic_manifest.py <out_dir> [n_refs] [levels] [size]")
        print("  n_refs: Number of reference images (default: 3)")
        print("  levels: Severity levels per distortion kind (default: 5)")
        print("  size: Image width and height (default: 128)")
        sys.exit(0 if len(sys.argv) > 1 else 1)

    try:
        out_dir = sys.argv[1]
        n_refs = int(sys.argv[2]) if len(sys.argv) > 2 else 3
        levels = int(sys.argv[3]) if len(sys.argv) > 3 else 5
        size = int(sys.argv[4]) if len(sys.argv) > 4 else 128

        if n_refs <= 0 or levels < 2:
            print("Error: n_refs must be positive and levels at least 2")
            sys.exit(1)

        manifest_path = SyntheticDatasetCreator(out_dir, size).create_dataset(n_refs, levels)
        print(f"\nTo evaluate it, use:")
        print(f"python run_iqa.py bench {manifest_path}")

    except ValueError as e:
        print(f"Error: Invalid input - {e}")
        sys.exit(1)
    except Exception as e:
        print(f"Error: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
