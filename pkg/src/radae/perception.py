"""Camera-to-network preprocessing.

Five fixed steps: bilinear resize, vertical crop, grayscale by channel mean,
scale to [0,1], then per-image mean removal re-centered at 0.5 (clamped).
The mean re-centering keeps inputs in the unit interval so the cross-entropy
reconstruction stays well defined.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError


@dataclass
class RawImage:
    """Row-major intensity image; float data in [0,1] or integer data in [0,255]."""

    width: int
    height: int
    channels: int
    data: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ContractError("zero-sized image")
        if self.channels not in (1, 3):
            raise ContractError(f"channels must be 1 or 3, got {self.channels}")
        if self.data.size != self.width * self.height * self.channels:
            raise ContractError(
                f"data size {self.data.size} != {self.width}x{self.height}x{self.channels}")


@dataclass(frozen=True)
class FrameSpec:
    """Resize target (width x height), then crop_rows removed from top and bottom."""

    width: int = 128
    height: int = 96
    crop_rows: int = 19

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ContractError("frame dimensions must be >= 1")
        if self.crop_rows < 0 or self.height - 2 * self.crop_rows < 1:
            raise ContractError(f"crop_rows {self.crop_rows} leaves no rows")

    @property
    def out_height(self) -> int:
        return self.height - 2 * self.crop_rows

    @property
    def dim(self) -> int:
        return self.width * self.out_height


def resize_bilinear(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Separable bilinear resampling at pixel centers; (H,W) or (H,W,C) float."""
    h, w = img.shape[:2]
    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    y0 = np.clip(np.floor(ys).astype(int), 0, h - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = np.clip(ys - y0, 0.0, 1.0)
    wx = np.clip(xs - x0, 0.0, 1.0)
    if img.ndim == 3:
        wy = wy[:, None, None]
        wx = wx[None, :, None]
    else:
        wy = wy[:, None]
        wx = wx[None, :]
    top = img[y0][:, x0] * (1 - wx) + img[y0][:, x1] * wx
    bot = img[y1][:, x0] * (1 - wx) + img[y1][:, x1] * wx
    return top * (1 - wy) + bot * wy


def preprocess(img: RawImage, spec: FrameSpec = FrameSpec()) -> np.ndarray:
    """RawImage -> flat frame vector in [0,1]^dim."""
    data = np.asarray(img.data)
    shape = (img.height, img.width) if img.channels == 1 \
        else (img.height, img.width, img.channels)
    plane = data.reshape(shape).astype(float)
    if np.issubdtype(np.asarray(img.data).dtype, np.integer):
        plane = plane / 255.0
    plane = resize_bilinear(plane, spec.width, spec.height)
    if spec.crop_rows:
        plane = plane[spec.crop_rows:-spec.crop_rows]
    if plane.ndim == 3:
        plane = plane.mean(axis=2)
    plane = np.clip(plane, 0.0, 1.0)
    plane = np.clip(plane - plane.mean() + 0.5, 0.0, 1.0)
    return plane.reshape(-1)


def write_pgm(frame: np.ndarray, width: int, path) -> None:
    """Dump a flat [0,1] frame as binary PGM (P5, maxval 255)."""
    if frame.size % width:
        raise ContractError(f"frame size {frame.size} not divisible by width {width}")
    height = frame.size // width
    pixels = np.clip(np.round(frame * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        f.write(pixels.tobytes())
