"""Centered unitary 2D Fourier transforms and complex array helpers.

Conventions used throughout the package:

* images and k-space grids are complex numpy arrays of shape (H, W),
  optionally with leading batch axes such as a coil axis (Nc, H, W);
* k-space is always centered, i.e. the DC bin sits at index
  (H // 2, W // 2), matching how sampling masks are displayed;
* the transform pair is unitary (norm="ortho"), so fft2c/ifft2c are
  exact adjoints and inverses of each other and preserve the l2 norm.
  The closed-form data-consistency update relies on this.
"""

import numpy as np

from .errors import ShapeError

_AXES = (-2, -1)


def _check_grid(x, name="array"):
    x = np.asarray(x)
    if x.ndim < 2:
        raise ShapeError(f"{name} must have at least 2 dimensions, got {x.ndim}")
    if x.shape[-1] == 0 or x.shape[-2] == 0:
        raise ShapeError(f"{name} has a zero-sized dimension: {x.shape}")
    return x


def _check_same_shape(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def fft2c(img):
    """Centered, unitarily normalized 2D DFT over the last two axes."""
    img = _check_grid(img, "image")
    shifted = np.fft.ifftshift(img, axes=_AXES)
    ksp = np.fft.fft2(shifted, axes=_AXES, norm="ortho")
    return np.fft.fftshift(ksp, axes=_AXES)


def ifft2c(ksp):
    """Inverse of :func:`fft2c` (exact to round-off)."""
    ksp = _check_grid(ksp, "k-space")
    shifted = np.fft.ifftshift(ksp, axes=_AXES)
    img = np.fft.ifft2(shifted, axes=_AXES, norm="ortho")
    return np.fft.fftshift(img, axes=_AXES)


def add(a, b):
    a, b = _check_same_shape(a, b)
    return a + b


def sub(a, b):
    a, b = _check_same_shape(a, b)
    return a - b


def mul(a, b):
    """Hadamard (element-wise) product."""
    a, b = _check_same_shape(a, b)
    return a * b


def conj_mul(a, b):
    """Element-wise conj(a) * b."""
    a, b = _check_same_shape(a, b)
    return np.conj(a) * b


def scale(x, c):
    return np.asarray(x) * c


def l2_norm(x):
    return float(np.linalg.norm(np.asarray(x).ravel()))


def inner_product(a, b):
    """<a, b> = sum conj(a) * b (conjugate-linear in the first argument)."""
    a, b = _check_same_shape(a, b)
    return complex(np.vdot(a, b))
