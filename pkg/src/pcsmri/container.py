"""Shared on-disk container for complex arrays: raw binary plus text sidecar.

Binary payload is little-endian interleaved (re, im) float pairs in C
order, coil-major for multi-coil data. The sidecar (same path, .hdr
suffix) is human-readable text with a fixed key order so files diff
cleanly:

    pcsmri-array v1
    kind: kspace
    coils: 4
    height: 128
    width: 128
    dtype: <c8
    layout: coil-major

``dtype`` is ``<c8`` (float32 pairs, the default) or ``<c16`` (float64
pairs, used where bit-level fidelity matters more than size). Plain
images are stored as coils=1. Round trips are bit-exact for data
already in the stored dtype.
"""

from pathlib import Path

import numpy as np

from .errors import ContainerError, ShapeError

_ARRAY_MAGIC = "pcsmri-array v1"
_DTYPES = ("<c8", "<c16")


def _sidecar(path):
    return Path(path).with_suffix(".hdr")


def save_array(path, arr, kind, dtype="<c8"):
    """Write a complex (H, W) or (coils, H, W) array with its sidecar."""
    if dtype not in _DTYPES:
        raise ContainerError(f"unsupported dtype {dtype!r}, expected one of {_DTYPES}")
    arr = np.asarray(arr)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or min(arr.shape) < 1:
        raise ShapeError(f"expected (H, W) or (coils, H, W), got shape {arr.shape}")
    if not kind or any(c.isspace() for c in kind):
        raise ContainerError(f"invalid kind {kind!r}")
    path = Path(path)
    payload = np.ascontiguousarray(arr.astype(dtype, copy=False))
    path.write_bytes(payload.tobytes())
    coils, height, width = arr.shape
    header = "\n".join(
        [
            _ARRAY_MAGIC,
            f"kind: {kind}",
            f"coils: {coils}",
            f"height: {height}",
            f"width: {width}",
            f"dtype: {dtype}",
            "layout: coil-major",
        ]
    )
    _sidecar(path).write_text(header + "\n")


def _parse_fields(lines, sidecar):
    fields = {}
    for line in lines:
        if not line.strip():
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ContainerError(f"malformed sidecar line {line!r} in {sidecar}")
        fields[key.strip()] = value.strip()
    return fields


def load_array(path, expect_kind=None):
    """Read an array written by save_array.

    Returns (arr, kind) with arr of shape (coils, height, width) in the
    stored dtype. Raises ContainerError on any structural problem, and
    on kind mismatch when ``expect_kind`` is given.
    """
    path = Path(path)
    sidecar = _sidecar(path)
    try:
        text = sidecar.read_text()
    except FileNotFoundError:
        raise ContainerError(f"missing array sidecar {sidecar}") from None
    lines = text.splitlines()
    if not lines or lines[0] != _ARRAY_MAGIC:
        raise ContainerError(f"{sidecar} is not a {_ARRAY_MAGIC} sidecar")
    fields = _parse_fields(lines[1:], sidecar)
    try:
        kind = fields["kind"]
        coils = int(fields["coils"])
        height = int(fields["height"])
        width = int(fields["width"])
        dtype = fields["dtype"]
        layout = fields["layout"]
    except (KeyError, ValueError) as exc:
        raise ContainerError(f"bad sidecar field in {sidecar}: {exc}") from None
    if dtype not in _DTYPES:
        raise ContainerError(f"unsupported dtype {dtype!r} in {sidecar}")
    if layout != "coil-major":
        raise ContainerError(f"unsupported layout {layout!r} in {sidecar}")
    if min(coils, height, width) < 1:
        raise ContainerError(f"non-positive dimensions in {sidecar}")
    if expect_kind is not None and kind != expect_kind:
        raise ContainerError(f"{path} holds kind={kind!r}, expected {expect_kind!r}")
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise ContainerError(f"missing array file {path}") from None
    expected = coils * height * width * np.dtype(dtype).itemsize
    if len(raw) != expected:
        raise ContainerError(
            f"{path} holds {len(raw)} bytes, sidecar implies {expected}"
        )
    arr = np.frombuffer(raw, dtype=dtype).reshape(coils, height, width)
    return arr.copy(), kind


def save_image(path, img, kind, dtype="<c8"):
    """Write a single (H, W) complex image."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ShapeError(f"expected a 2D image, got shape {img.shape}")
    save_array(path, img, kind, dtype=dtype)


def load_image(path, expect_kind=None):
    """Read a single-coil container back as an (H, W) array."""
    arr, kind = load_array(path, expect_kind=expect_kind)
    if arr.shape[0] != 1:
        raise ContainerError(f"{path} holds {arr.shape[0]} coils, expected 1")
    return arr[0], kind
