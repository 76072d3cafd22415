"""Deterministic image perturbations: brightness, rotation, and tilt.

These implement the transformation applied to a fixed input image before it
is fed to the classifier under analysis.  Semantics are pinned down so runs
are byte-reproducible:

* 8-bit grayscale or RGB storage, one rounding rule everywhere (round half
  away from zero, then clamp to [0, 255]);
* geometric transforms use inverse mapping with bilinear interpolation
  about the image center ``((w-1)/2, (h-1)/2)``, reads outside the source
  filling with a constant (default 0, i.e. black);
* a positive rotation angle turns the image content counter-clockwise on
  screen; tilt is an out-of-plane rotation of the image plane about the
  horizontal axis through its center, viewed by a pinhole camera with
  focal length equal to the image height in pixels (configurable).
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image as PILImage
from PIL.PngImagePlugin import PngInfo

__all__ = [
    "Image",
    "PerturbStep",
    "PerturbationSpec",
    "brightness",
    "rotate",
    "tilt",
    "apply",
    "read_png",
    "write_png",
    "write_transformed_set",
    "read_manifest",
]

KINDS = ("brightness", "rotation", "tilt")


@dataclass
class Image:
    """8-bit image: samples stored row-major with shape (height, width, channels)."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels)
        if self.pixels.dtype != np.uint8:
            raise ValueError("pixels must be uint8")
        if self.pixels.ndim == 2:
            self.pixels = self.pixels[:, :, None]
        if self.pixels.ndim != 3 or self.pixels.shape[2] not in (1, 3):
            raise ValueError("pixels must have shape (h, w, 1) or (h, w, 3)")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


@dataclass(frozen=True)
class PerturbStep:
    kind: str
    parameter: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown perturbation kind: {self.kind}")


@dataclass(frozen=True)
class PerturbationSpec:
    """Ordered perturbation steps; each kind may appear at most once.

    Steps are applied in the listed order.  The canonical order when all
    three are used is brightness, rotation, tilt.
    """

    steps: tuple[PerturbStep, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        kinds = [s.kind for s in self.steps]
        if len(set(kinds)) != len(kinds):
            raise ValueError(f"each perturbation kind may appear at most once: {kinds}")

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return tuple(s.parameter for s in self.steps)


def _quantize(values: np.ndarray) -> np.ndarray:
    """Round half away from zero and clamp to the 8-bit range.

    Interpolated sample values are non-negative here, so rounding half away
    from zero reduces to floor(v + 0.5).
    """
    return np.clip(np.floor(values + 0.5), 0.0, 255.0).astype(np.uint8)


def brightness(img: Image, factor: float) -> Image:
    """Scale every sample by ``factor`` (1.0 is the original brightness)."""
    if not (math.isfinite(factor) and factor >= 0.0):
        raise ValueError(f"brightness factor must be finite and >= 0, got {factor}")
    return Image(_quantize(img.pixels.astype(float) * factor))


def _bilinear_lookup(pixels: np.ndarray, src_x: np.ndarray, src_y: np.ndarray, fill: float) -> np.ndarray:
    """Sample (h, w, c) pixels at fractional coordinates with constant fill."""
    h, w = pixels.shape[:2]
    x0 = np.floor(src_x).astype(int)
    y0 = np.floor(src_y).astype(int)
    fx = (src_x - x0)[..., None]
    fy = (src_y - y0)[..., None]

    def corner(yy, xx):
        valid = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        vals = pixels[np.clip(yy, 0, h - 1), np.clip(xx, 0, w - 1)].astype(float)
        vals[~valid] = fill
        return vals

    v00 = corner(y0, x0)
    v01 = corner(y0, x0 + 1)
    v10 = corner(y0 + 1, x0)
    v11 = corner(y0 + 1, x0 + 1)
    top = v00 * (1.0 - fx) + v01 * fx
    bottom = v10 * (1.0 - fx) + v11 * fx
    return top * (1.0 - fy) + bottom * fy


def _output_grid(img: Image) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0 : img.height, 0 : img.width]
    return xs.astype(float), ys.astype(float)


def rotate(img: Image, degrees: float, fill: float = 0.0) -> Image:
    """Rotate about the image center; output canvas keeps the input size.

    Inverse mapping: each output pixel reads the source at its position
    rotated by ``degrees`` about ``((w-1)/2, (h-1)/2)``, bilinearly
    interpolated, out-of-bounds reads filling with ``fill``.
    """
    if not math.isfinite(degrees):
        raise ValueError("rotation angle must be finite")
    theta = math.radians(degrees)
    cx, cy = (img.width - 1) / 2.0, (img.height - 1) / 2.0
    xs, ys = _output_grid(img)
    dx, dy = xs - cx, ys - cy
    src_x = math.cos(theta) * dx - math.sin(theta) * dy + cx
    src_y = math.sin(theta) * dx + math.cos(theta) * dy + cy
    return Image(_quantize(_bilinear_lookup(img.pixels, src_x, src_y, fill)))


def tilt(img: Image, degrees: float, focal_length: float | None = None, fill: float = 0.0) -> Image:
    """Tilt: perspective view of the image plane rotated about the
    horizontal axis through its center.

    The pinhole sits at distance ``focal_length`` (default: image height in
    pixels) from the plane; the plane is rotated by ``degrees`` about the
    horizontal center axis and re-projected.  The center pixel is a fixed
    point for every angle.  Requires ``abs(degrees) < 90``.
    """
    if not (math.isfinite(degrees) and abs(degrees) < 90.0):
        raise ValueError(f"tilt angle must satisfy |degrees| < 90, got {degrees}")
    f = float(focal_length) if focal_length is not None else float(img.height)
    if f <= 0:
        raise ValueError("focal length must be positive")
    theta = math.radians(degrees)
    cx, cy = (img.width - 1) / 2.0, (img.height - 1) / 2.0
    xs, ys = _output_grid(img)
    du, dv = xs - cx, ys - cy

    denom = f * math.cos(theta) - dv * math.sin(theta)
    behind = denom <= 1e-9
    denom = np.where(behind, 1.0, denom)
    v = f * dv / denom
    u = du * (f + v * math.sin(theta)) / f
    src_x = np.where(behind, -1e9, u + cx)
    src_y = np.where(behind, -1e9, v + cy)
    return Image(_quantize(_bilinear_lookup(img.pixels, src_x, src_y, fill)))


def apply(spec: PerturbationSpec, img: Image, xi_phys) -> Image:
    """Apply the perturbation steps in listed order using named values.

    ``xi_phys`` maps parameter names to values; every name referenced by
    a step must be present.
    """
    out = img
    for step in spec.steps:
        if step.parameter not in xi_phys:
            raise KeyError(f"missing value for perturbation parameter '{step.parameter}'")
        value = float(xi_phys[step.parameter])
        if step.kind == "brightness":
            out = brightness(out, value)
        elif step.kind == "rotation":
            out = rotate(out, value)
        else:
            out = tilt(out, value)
    return out


def read_png(path) -> Image:
    """Read an 8-bit grayscale or RGB PNG (no alpha)."""
    with PILImage.open(path) as pil:
        if pil.mode not in ("L", "RGB"):
            raise ValueError(
                f"unsupported PNG mode '{pil.mode}': expected 8-bit grayscale (L) or RGB"
            )
        return Image(np.asarray(pil, dtype=np.uint8))


def write_png(path, img: Image, text: dict[str, str] | None = None) -> None:
    """Write a PNG; optional key/value pairs go into tEXt chunks."""
    arr = img.pixels[:, :, 0] if img.channels == 1 else img.pixels
    pil = PILImage.fromarray(arr, mode="L" if img.channels == 1 else "RGB")
    info = None
    if text:
        info = PngInfo()
        for key, value in sorted(text.items()):
            info.add_text(key, value)
    pil.save(path, format="PNG", pnginfo=info)


def write_transformed_set(
    spec: PerturbationSpec,
    img: Image,
    samples,
    out_dir,
    config_digest: str | None = None,
) -> str:
    """Transform the image once per sample row and write the set to disk.

    Produces ``sample_<index>.png`` per row plus ``manifest.csv`` with
    columns index, the parameter values, and the file name.  Returns the
    manifest path.
    """
    os.makedirs(out_dir, exist_ok=True)
    names = samples.space.names
    text = {"config_digest": config_digest} if config_digest is not None else None

    buf = io.StringIO()
    if config_digest is not None:
        buf.write(f"# config_digest={config_digest}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", *names, "file"])
    for i, row in enumerate(samples.values):
        values = dict(zip(names, row))
        fname = f"sample_{i}.png"
        write_png(os.path.join(out_dir, fname), apply(spec, img, values), text=text)
        writer.writerow([i, *(format(v, ".17g") for v in row), fname])

    manifest_path = os.path.join(out_dir, "manifest.csv")
    with open(manifest_path, "w", newline="") as fh:
        fh.write(buf.getvalue())
    return manifest_path


def read_manifest(path) -> tuple[list[dict], str | None]:
    """Read a manifest back as a list of row dicts plus the embedded digest."""
    with open(path, newline="") as fh:
        first = fh.readline()
        digest = None
        if first.startswith("#"):
            if "config_digest=" in first:
                digest = first.split("config_digest=", 1)[1].strip()
            first = fh.readline()
        header = next(csv.reader([first]))
        rows = []
        for row in csv.reader(fh):
            if not row:
                continue
            record = dict(zip(header, row))
            rows.append(record)
    return rows, digest
