"""1D Cartesian undersampling masks with a fully sampled central ACS band.

The phase-encode direction is fixed to grid columns: a "line" is one
column of k-space, and the 2D mask is constant along each column (the
frequency-encode direction). Transpose data at the I/O boundary if your
convention differs.

Organ protocols ship as named presets: equispaced R=4 for brain, random
R=6 for knee and random R=8 for cardiac, all with a 24-line ACS band.
The cardiac pattern is a stand-in choice, not a literal clinical
trajectory. All masks use ``acs_width`` contiguous central lines.
"""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ContainerError, ShapeError

_MASK_MAGIC = "pcsmri-mask v1"


def acs_band(width, acs_width):
    """Index range (start, stop) of the central ACS band."""
    if acs_width < 0 or acs_width > width:
        raise ConfigError(f"acs_width {acs_width} out of range for width {width}")
    start = width // 2 - acs_width // 2
    return start, start + acs_width


@dataclass(frozen=True)
class SamplingMask:
    """Binary selection of phase-encode lines (columns) of an H x W grid.

    ``grid`` is the 0/1 diagonal of the projection U^H U materialized on
    the full grid. Instances are immutable and safe to share.
    """

    height: int
    width: int
    line_selected: np.ndarray
    acs_width: int
    acceleration: float
    kind: str = "custom"
    seed: int | None = None

    def __post_init__(self):
        lines = np.asarray(self.line_selected, dtype=bool).copy()
        if lines.shape != (self.width,):
            raise ShapeError(
                f"line_selected has shape {lines.shape}, expected ({self.width},)"
            )
        if self.height <= 0 or self.width <= 0:
            raise ShapeError("mask dimensions must be positive")
        start, stop = acs_band(self.width, self.acs_width)
        if not lines[start:stop].all():
            raise ConfigError("ACS band is not fully selected")
        lines.setflags(write=False)
        object.__setattr__(self, "line_selected", lines)

    @property
    def n_selected(self):
        return int(self.line_selected.sum())

    @property
    def sampling_ratio(self):
        return self.n_selected / self.width

    @property
    def grid(self):
        """Full H x W 0/1 grid (read-only view)."""
        g = np.broadcast_to(
            self.line_selected.astype(np.float64), (self.height, self.width)
        )
        return g

    def apply(self, ksp):
        return apply_mask(ksp, self)


def _check_budget(width, r, acs_width):
    if r < 1:
        raise ConfigError(f"acceleration must be >= 1, got {r}")
    budget = int(round(width / r))
    if budget > width:
        raise ConfigError(f"budget {budget} exceeds width {width}")
    if acs_width < 0:
        raise ConfigError("acs_width must be >= 0")
    if budget < acs_width:
        raise ConfigError(
            f"line budget round({width}/{r}) = {budget} is smaller than "
            f"the {acs_width}-line ACS band"
        )
    return budget


def make_random_mask(height, width, r, acs_width, seed):
    """Uniform random Cartesian mask with exactly round(width / r) lines.

    The ACS band counts toward the budget; the remaining lines are drawn
    uniformly without replacement from the non-ACS lines. Deterministic
    for a given seed.
    """
    budget = _check_budget(width, r, acs_width)
    start, stop = acs_band(width, acs_width)
    lines = np.zeros(width, dtype=bool)
    lines[start:stop] = True
    candidates = np.flatnonzero(~lines)
    n_extra = budget - acs_width
    rng = np.random.default_rng(seed)
    if n_extra > 0:
        chosen = rng.choice(candidates, size=n_extra, replace=False)
        lines[chosen] = True
    return SamplingMask(height, width, lines, acs_width, float(r), "random", seed)


def make_equispaced_mask(height, width, r, acs_width, seed):
    """Equispaced mask: stride-r lines from a random offset, ACS overlaid.

    The stride pattern contributes exactly ceil(width / r) lines (indices
    wrap modulo width when r does not divide width), so the realized
    sampling ratio can exceed 1/r by up to acs_width / width after the
    ACS overlay.
    """
    r_int = int(round(r))
    if abs(r - r_int) > 1e-12 or r_int < 1:
        raise ConfigError(f"equispaced masks need an integer acceleration, got {r}")
    _check_budget(width, r_int, acs_width)
    rng = np.random.default_rng(seed)
    offset = int(rng.integers(0, r_int))
    n_stride = math.ceil(width / r_int)
    stride_lines = (offset + r_int * np.arange(n_stride)) % width
    lines = np.zeros(width, dtype=bool)
    lines[stride_lines] = True
    start, stop = acs_band(width, acs_width)
    lines[start:stop] = True
    return SamplingMask(
        height, width, lines, acs_width, float(r_int), "equispaced", seed
    )


def apply_mask(ksp, mask):
    """Zero unselected lines; selected lines are copied bit-exactly.

    Realizes U^H U on a full grid, and U^H y when applied to measured
    data. Accepts (H, W) or batched (..., H, W) arrays.
    """
    ksp = np.asarray(ksp)
    if ksp.ndim < 2 or ksp.shape[-2:] != (mask.height, mask.width):
        raise ShapeError(
            f"k-space shape {ksp.shape} does not match mask "
            f"({mask.height}, {mask.width})"
        )
    return np.where(mask.line_selected, ksp, 0)


@dataclass(frozen=True)
class MaskProtocol:
    kind: str
    r: float
    acs_width: int


PRESETS = {
    "brain": MaskProtocol("equispaced", 4.0, 24),
    "knee": MaskProtocol("random", 6.0, 24),
    "cardiac": MaskProtocol("random", 8.0, 24),
}


def make_preset_mask(name, height, width, seed):
    try:
        proto = PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}"
        ) from None
    maker = make_equispaced_mask if proto.kind == "equispaced" else make_random_mask
    return maker(height, width, proto.r, proto.acs_width, seed)


def save_mask(path, mask):
    """Write a mask as width bytes of 0/1 line flags plus a text sidecar."""
    path = Path(path)
    mask.line_selected.astype(np.uint8).tofile(path)
    header = "\n".join(
        [
            _MASK_MAGIC,
            f"height: {mask.height}",
            f"width: {mask.width}",
            f"r: {mask.acceleration!r}",
            f"acs_width: {mask.acs_width}",
            f"kind: {mask.kind}",
            f"seed: {'none' if mask.seed is None else mask.seed}",
        ]
    )
    path.with_suffix(".hdr").write_text(header + "\n")


def load_mask(path):
    path = Path(path)
    sidecar = path.with_suffix(".hdr")
    try:
        text = sidecar.read_text()
    except FileNotFoundError:
        raise ContainerError(f"missing mask sidecar {sidecar}") from None
    lines = text.splitlines()
    if not lines or lines[0] != _MASK_MAGIC:
        raise ContainerError(f"{sidecar} is not a {_MASK_MAGIC} sidecar")
    fields = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        key, _, value = line.partition(":")
        fields[key.strip()] = value.strip()
    try:
        height = int(fields["height"])
        width = int(fields["width"])
        r = float(fields["r"])
        acs_width = int(fields["acs_width"])
        kind = fields["kind"]
        seed = None if fields["seed"] == "none" else int(fields["seed"])
    except (KeyError, ValueError) as exc:
        raise ContainerError(f"malformed mask sidecar {sidecar}: {exc}") from None
    flags = np.fromfile(path, dtype=np.uint8)
    if flags.size != width:
        raise ContainerError(
            f"{path} holds {flags.size} line flags, header says {width}"
        )
    return SamplingMask(height, width, flags.astype(bool), acs_width, r, kind, seed)


def mask_summary(mask):
    return (
        f"{mask.kind} mask {mask.height}x{mask.width}, R={mask.acceleration:g}, "
        f"acs={mask.acs_width}, lines={mask.n_selected} "
        f"(ratio {mask.sampling_ratio:.4f})"
    )
