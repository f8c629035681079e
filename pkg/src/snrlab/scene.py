"""Test scenes: multinomial photon allocation, flat fields and PGM images."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSceneError, DomainError, SizeError, SnrlabIOError
from .walsh_hadamard import check_size


@dataclass(frozen=True)
class SceneVector:
    pixels: np.ndarray
    brightness: float = field(init=False)

    def __post_init__(self):
        px = np.array(self.pixels, dtype=np.float64)
        if px.ndim != 1:
            raise SizeError("scene pixels must be a 1-D vector")
        if np.any(px < 0) or not np.all(np.isfinite(px)):
            raise DomainError("scene pixels must be finite and nonnegative")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)
        object.__setattr__(self, "brightness", float(px.sum()))

    def __len__(self):
        return self.pixels.shape[0]

    @property
    def n(self) -> int:
        return self.pixels.shape[0]


def _photon_budget(x0) -> int:
    if x0 < 0:
        raise DomainError(f"photon budget must be >= 0, got {x0}")
    if int(x0) != x0:
        raise DomainError(f"random scenes need an integer photon budget, got {x0}")
    return int(x0)


def random_uniform_scene(n: int, x0, stream: np.random.Generator) -> SceneVector:
    """Drop ``x0`` photons onto ``n`` equally likely pixels.

    ``Generator.multinomial`` splits sequentially with binomials, so the total
    is conserved exactly.
    """
    n = check_size(n)
    counts = stream.multinomial(_photon_budget(x0), np.full(n, 1.0 / n))
    return SceneVector(counts)


def flat_scene(n: int, x0: float) -> SceneVector:
    n = check_size(n)
    if x0 < 0:
        raise DomainError(f"photon budget must be >= 0, got {x0}")
    return SceneVector(np.full(n, x0 / n))


def grid_shape(n: int) -> tuple[int, int]:
    """Pixel grid for ``n = 2**k``: rows ``2**(k//2)``, cols ``2**(k - k//2)``."""
    k = check_size(n).bit_length() - 1
    return 2 ** (k // 2), 2 ** (k - k // 2)


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    while True:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        break
    start = pos
    while pos < len(data) and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ValueError("truncated PGM header")
    return data[start:pos], pos


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) or ASCII (P2) graymap into a float64 2-D array."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise SnrlabIOError(f"cannot read image {path}: {exc}") from exc
    try:
        magic, pos = _next_token(data, 0)
        if magic not in (b"P5", b"P2"):
            raise ValueError(f"unsupported magic {magic!r}")
        w, pos = _next_token(data, pos)
        h, pos = _next_token(data, pos)
        maxval, pos = _next_token(data, pos)
        w, h, maxval = int(w), int(h), int(maxval)
        if not (w > 0 and h > 0 and 0 < maxval < 65536):
            raise ValueError("bad PGM dimensions or maxval")
        if magic == b"P2":
            img = np.array(data[pos:].split()[: w * h], dtype=np.float64)
        else:
            dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
            raw = data[pos + 1 : pos + 1 + w * h * dtype.itemsize]
            img = np.frombuffer(raw, dtype=dtype).astype(np.float64)
        if img.size != w * h:
            raise ValueError("truncated PGM pixel data")
    except ValueError as exc:
        raise SnrlabIOError(f"malformed PGM {path}: {exc}") from exc
    return img.reshape(h, w)


def write_pgm(path, img) -> None:
    img = np.asarray(img)
    maxval = int(img.max()) if img.size else 0
    maxval = max(maxval, 1)
    dtype = ">u2" if maxval > 255 else "u1"
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
        fh.write(np.asarray(img, dtype=dtype).tobytes())


def _area_average(img: np.ndarray, rows: int, cols: int) -> np.ndarray:
    h, w = img.shape
    r_edges = (np.arange(rows + 1) * h) // rows
    c_edges = (np.arange(cols + 1) * w) // cols
    out = np.empty((rows, cols))
    for i in range(rows):
        band = img[r_edges[i] : r_edges[i + 1]]
        for j in range(cols):
            out[i, j] = band[:, c_edges[j] : c_edges[j + 1]].mean()
    return out


def scene_from_image(path, n: int, x0: float) -> SceneVector:
    """Grayscale image, area-averaged onto the ``grid_shape(n)`` grid, scaled to sum ``x0``."""
    if x0 < 0:
        raise DomainError(f"photon budget must be >= 0, got {x0}")
    if not os.path.exists(path):
        raise SnrlabIOError(f"image not found: {path}")
    img = read_pgm(path)
    rows, cols = grid_shape(n)
    if img.shape[0] < rows or img.shape[1] < cols:
        raise SizeError(f"image {img.shape[1]}x{img.shape[0]} smaller than {cols}x{rows} grid")
    small = _area_average(img, rows, cols).ravel()
    total = small.sum()
    if total <= 0:
        if x0 > 0:
            raise DegenerateSceneError("all-black image cannot carry a positive photon budget")
        return SceneVector(np.zeros(n))
    return SceneVector(small * (x0 / total))
