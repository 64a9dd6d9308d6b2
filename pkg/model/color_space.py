"""
Image decoding and CIELab conversion.

Images enter the pipeline as 8-bit sRGB and leave this module as three
aligned CIELab planes (D65 white point, 2 degree observer).
"""

import logging
import os
from dataclasses import dataclass
from typing import Dict

import numpy as np
from PIL import Image, UnidentifiedImageError
from skimage.color import lab2rgb, rgb2lab

from model.errors import ImageNotFoundError, ImageTooSmallError, UnsupportedFormatError

logger = logging.getLogger(__name__)

MIN_DIMENSION = 128
SUPPORTED_FORMATS = ('PNG', 'BMP')
_SUFFIX_FORMATS = {'.png': 'PNG', '.bmp': 'BMP'}
# Modes that decode to 8 bits per channel; anything else (I;16, I, F) is rejected.
_EIGHT_BIT_MODES = ('1', 'L', 'LA', 'P', 'RGB', 'RGBA')


@dataclass(frozen=True)
class RgbImage:
    """An 8-bit sRGB image stored as a (height, width, 3) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = self.pixels
        if pixels.dtype != np.uint8:
            raise UnsupportedFormatError(f"expected 8-bit pixels, got {pixels.dtype}")
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise UnsupportedFormatError(f"expected (height, width, 3) pixels, got shape {pixels.shape}")
        if self.height < MIN_DIMENSION or self.width < MIN_DIMENSION:
            raise ImageTooSmallError(
                f"image is {self.width}x{self.height}; both dimensions must be at least {MIN_DIMENSION}"
            )

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_array(cls, array: np.ndarray) -> 'RgbImage':
        """Wrap a uint8 array; single-channel arrays are replicated to three channels."""
        array = np.asarray(array)
        if array.ndim == 2:
            array = np.repeat(array[:, :, np.newaxis], 3, axis=2)
        return cls(np.ascontiguousarray(array))


@dataclass(frozen=True)
class LabImage:
    """Three CIELab planes sharing the source image's dimensions."""

    L: np.ndarray
    a: np.ndarray
    b: np.ndarray

    @property
    def width(self) -> int:
        return self.L.shape[1]

    @property
    def height(self) -> int:
        return self.L.shape[0]

    def planes(self) -> Dict[str, np.ndarray]:
        return {'L': self.L, 'a': self.a, 'b': self.b}


def _rawmode(img: Image.Image) -> str:
    # Pillow reports 48-bit PNGs as mode RGB; only the decoder rawmode keeps the depth.
    if not img.tile:
        return ''
    args = img.tile[0][3]
    if isinstance(args, tuple):
        args = args[0] if args else ''
    return str(args)


def load_image(path: str) -> RgbImage:
    """Decode a PNG or BMP file into an RgbImage."""
    if not os.path.isfile(path):
        raise ImageNotFoundError(f"image not found: {path}")

    try:
        with Image.open(path) as img:
            if img.format not in SUPPORTED_FORMATS:
                raise UnsupportedFormatError(f"{path}: format {img.format} is not PNG or BMP")
            if img.format == 'PNG' and ';16' in _rawmode(img):
                raise UnsupportedFormatError(f"{path}: 16-bit samples ({_rawmode(img)}) are not supported")
            img.load()
            if img.mode not in _EIGHT_BIT_MODES:
                raise UnsupportedFormatError(f"{path}: mode {img.mode} is not an 8-bit format")
            if img.mode in ('1', 'L', 'LA'):
                pixels = np.asarray(img.convert('L'), dtype=np.uint8)
            else:
                pixels = np.asarray(img.convert('RGB'), dtype=np.uint8)
    except UnsupportedFormatError:
        raise
    except (UnidentifiedImageError, Image.DecompressionBombError, OSError, SyntaxError, ValueError) as e:
        raise UnsupportedFormatError(f"{path}: cannot decode image ({e})") from e

    logger.debug(f"Loaded {path} ({pixels.shape[1]}x{pixels.shape[0]})")
    return RgbImage.from_array(pixels)


def save_image(img: RgbImage, path: str):
    """Write an RgbImage as PNG or BMP, chosen by the file suffix."""
    suffix = os.path.splitext(path)[1].lower()
    image_format = _SUFFIX_FORMATS.get(suffix)
    if image_format is None:
        raise UnsupportedFormatError(f"{path}: only .png and .bmp outputs are supported")
    Image.fromarray(img.pixels).save(path, format=image_format)


def srgb_to_lab(img: RgbImage) -> LabImage:
    """Convert an 8-bit sRGB image to CIELab (D65, 2 degree observer)."""
    lab = rgb2lab(img.pixels, illuminant='D65', observer='2')
    return LabImage(
        L=np.ascontiguousarray(lab[:, :, 0]),
        a=np.ascontiguousarray(lab[:, :, 1]),
        b=np.ascontiguousarray(lab[:, :, 2]),
    )


def lab_to_srgb(lab: LabImage) -> RgbImage:
    """Inverse of srgb_to_lab, rounded back to 8-bit values."""
    stacked = np.stack([lab.L, lab.a, lab.b], axis=-1)
    rgb = lab2rgb(stacked, illuminant='D65', observer='2')
    pixels = np.clip(np.rint(rgb * 255.0), 0, 255).astype(np.uint8)
    return RgbImage(pixels)
