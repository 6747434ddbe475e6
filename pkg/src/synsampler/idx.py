"""Reading and writing of the big-endian IDX array format, plus a synthetic
handwritten-digit stand-in for environments that lack the canonical files."""

from __future__ import annotations

import os
import struct

import numpy as np
from scipy.ndimage import gaussian_filter

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

CANONICAL_NAMES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}

_DTYPES = {
    0x08: np.dtype("u1"),
    0x09: np.dtype("i1"),
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}
_CODES = {(dt.kind, dt.itemsize): code for code, dt in _DTYPES.items()}


class IdxFormatError(ValueError):
    """A file violated the IDX format. ``byte_offset`` is the position at
    which the violation was detected."""

    def __init__(self, message: str, path, byte_offset: int):
        super().__init__(f"{path}: {message} (byte offset {byte_offset})")
        self.path = str(path)
        self.byte_offset = int(byte_offset)


def _parse(path):
    """Read one IDX file; returns (dtype_code, ndim, array)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4:
        raise IdxFormatError("truncated header", path, len(raw))
    zero_a, zero_b, code, ndim = struct.unpack(">BBBB", raw[:4])
    if zero_a != 0 or zero_b != 0 or code not in _DTYPES:
        raise IdxFormatError("wrong magic", path, 0)
    header_end = 4 + 4 * ndim
    if len(raw) < header_end:
        raise IdxFormatError("truncated header", path, len(raw))
    dims = struct.unpack(f">{ndim}I", raw[4:header_end])
    dtype = _DTYPES[code]
    n_items = int(np.prod(dims, dtype=np.int64)) if ndim else 1
    data_end = header_end + n_items * dtype.itemsize
    if len(raw) < data_end:
        raise IdxFormatError("truncated data", path, len(raw))
    if len(raw) > data_end:
        raise IdxFormatError("trailing bytes after data", path, data_end)
    data = np.frombuffer(raw, dtype=dtype, count=n_items, offset=header_end)
    arr = data.reshape(dims).astype(dtype.newbyteorder("="), copy=False)
    return code, ndim, arr


def read_idx(path) -> np.ndarray:
    """Read any well-formed IDX file into a native-endian array."""
    return _parse(path)[2]


def write_idx(path, array) -> None:
    """Write an array as an IDX file. The dtype must be one the format
    defines (u1, i1, >i2, >i4, >f4, >f8 after byte-order normalization)."""
    arr = np.asarray(array)
    key = (arr.dtype.kind, arr.dtype.itemsize)
    if key not in _CODES:
        raise ValueError(f"dtype {arr.dtype} has no IDX type code")
    if any(d > 0xFFFFFFFF for d in arr.shape):
        raise ValueError("dimension too large for the IDX header")
    code = _CODES[key]
    big = arr.astype(_DTYPES[code], copy=False)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">BBBB", 0, 0, code, arr.ndim))
        for d in arr.shape:
            fh.write(struct.pack(">I", d))
        fh.write(np.ascontiguousarray(big).tobytes())


def load_mnist(images_path, labels_path):
    """Load an image/label IDX pair in the layout the digit experiment uses.

    Returns ``(images, labels)`` where images is float32 of shape (n, 784)
    scaled to [0, 1] and labels is int64 of shape (n,). The image file must
    carry magic 0x00000803 with 28x28 items, the label file 0x00000801, and
    the item counts must agree.
    """
    img_code, img_ndim, images = _parse(images_path)
    if img_code != 0x08 or img_ndim != 3:
        raise IdxFormatError(
            f"wrong magic: expected 0x{IMAGE_MAGIC:08x} for images, "
            f"found 0x{(img_code << 8) | img_ndim:08x}",
            images_path,
            0,
        )
    lab_code, lab_ndim, labels = _parse(labels_path)
    if lab_code != 0x08 or lab_ndim != 1:
        raise IdxFormatError(
            f"wrong magic: expected 0x{LABEL_MAGIC:08x} for labels, "
            f"found 0x{(lab_code << 8) | lab_ndim:08x}",
            labels_path,
            0,
        )
    if images.shape[1:] != (28, 28):
        raise IdxFormatError(
            f"unexpected image shape {images.shape[1:]}, wanted (28, 28)",
            images_path,
            8,
        )
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(
            f"count mismatch: {images.shape[0]} images vs "
            f"{labels.shape[0]} labels",
            labels_path,
            4,
        )
    flat = images.reshape(images.shape[0], 784).astype(np.float32)
    flat *= np.float32(1.0 / 255.0)
    return flat, labels.astype(np.int64)


def _stroke_shapes(rng) -> np.ndarray:
    """Ten smoothed random polyline glyphs, one per class, peak value 1."""
    shapes = np.zeros((10, 28, 28), dtype=np.float32)
    for c in range(10):
        canvas = np.zeros((28, 28))
        pts = rng.uniform(5.0, 23.0, size=(4, 2))
        for k in range(3):
            t = np.linspace(0.0, 1.0, 60)[:, None]
            seg = pts[k] * (1.0 - t) + pts[k + 1] * t
            ij = np.clip(np.rint(seg).astype(np.intp), 0, 27)
            canvas[ij[:, 0], ij[:, 1]] = 1.0
        canvas = gaussian_filter(canvas, sigma=1.1)
        shapes[c] = canvas / canvas.max()
    return shapes


_SHIFT_RANGE = 2
_SPECKLE_P = 0.02
_CHUNK = 8192


def _instances(n_items, shapes, rng):
    """Noisy shifted instances of the class shapes as uint8 images."""
    labels = rng.integers(0, 10, size=n_items)
    shifts = rng.integers(-_SHIFT_RANGE, _SHIFT_RANGE + 1, size=(n_items, 2))
    brightness = rng.uniform(0.6, 1.0, size=n_items).astype(np.float32)
    images = np.empty((n_items, 28, 28), dtype=np.uint8)
    for lo in range(0, n_items, _CHUNK):
        hi = min(lo + _CHUNK, n_items)
        block = shapes[labels[lo:hi]].copy()
        for sx in range(-_SHIFT_RANGE, _SHIFT_RANGE + 1):
            for sy in range(-_SHIFT_RANGE, _SHIFT_RANGE + 1):
                sel = (shifts[lo:hi, 0] == sx) & (shifts[lo:hi, 1] == sy)
                if sel.any():
                    block[sel] = np.roll(block[sel], (sx, sy), axis=(1, 2))
        block *= brightness[lo:hi, None, None]
        speckle = rng.random(block.shape) < _SPECKLE_P
        block[speckle] = rng.random(int(speckle.sum()), dtype=np.float32)
        np.rint(np.clip(block, 0.0, 1.0) * 255.0, out=block)
        images[lo:hi] = block.astype(np.uint8)
    return images, labels.astype(np.uint8)


def synthetic_digit_set(n_train=60000, n_test=10000, seed=0):
    """Generate a synthetic stand-in for the canonical digit arrays.

    Ten fixed stroke glyphs play the role of digit classes; instances vary
    by shift, brightness, and speckle. Returns (train_images, train_labels,
    test_images, test_labels) with uint8 images of shape (n, 28, 28).
    """
    shape_ss, train_ss, test_ss = np.random.SeedSequence(seed).spawn(3)
    shapes = _stroke_shapes(np.random.default_rng(shape_ss))
    tr_img, tr_lab = _instances(n_train, shapes, np.random.default_rng(train_ss))
    te_img, te_lab = _instances(n_test, shapes, np.random.default_rng(test_ss))
    return tr_img, tr_lab, te_img, te_lab


def write_synthetic_mnist(out_dir, *, n_train=60000, n_test=10000, seed=0):
    """Write the synthetic set as four IDX files with the canonical names.

    Returns a dict with keys train_images, train_labels, test_images,
    test_labels mapping to the file paths.
    """
    tr_img, tr_lab, te_img, te_lab = synthetic_digit_set(n_train, n_test, seed)
    os.makedirs(out_dir, exist_ok=True)
    paths = {key: os.path.join(out_dir, name)
             for key, name in CANONICAL_NAMES.items()}
    write_idx(paths["train_images"], tr_img)
    write_idx(paths["train_labels"], tr_lab)
    write_idx(paths["test_images"], te_img)
    write_idx(paths["test_labels"], te_lab)
    return paths
