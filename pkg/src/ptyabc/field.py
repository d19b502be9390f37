"""Centered, unitary 2D discrete Fourier transforms.

Fields are plain complex numpy arrays. Both transforms act on the last two
axes, so a ``(J, M, M)`` stack of exit waves is transformed in one call.
"""

import numpy as np

_AXES = (-2, -1)


def _check(f):
    f = np.asarray(f)
    if f.ndim < 2:
        raise ValueError(f"expected a 2D field, got shape {f.shape}")
    if f.shape[-1] == 0 or f.shape[-2] == 0:
        raise ValueError(f"field has a zero dimension: {f.shape}")
    return f.astype(np.complex128, copy=False)


def dft2_centered(f):
    """Forward DFT with ``1/sqrt(HW)`` scaling and the zero frequency at the array center."""
    f = _check(f)
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(f, axes=_AXES), norm="ortho"), axes=_AXES)


def idft2_centered(F):
    """Inverse of :func:`dft2_centered`."""
    F = _check(F)
    return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(F, axes=_AXES), norm="ortho"), axes=_AXES)
