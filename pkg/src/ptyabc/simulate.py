"""Synthetic ptychography datasets: phantom object, probes, scan and far-field data."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .field import dft2_centered
from .validation import check_field, check_intensities, check_positions

# Named probe configurations on a 64 px window.
PROBE_PRESETS = {
    "big": {"m": 64, "radius": 20.0, "edge_smooth": 4.0},
    "small": {"m": 64, "radius": 10.0, "edge_smooth": 4.0},
}


@dataclass(frozen=True)
class ScanGeometry:
    """Top-left offsets ``(row, col)`` of each probe window in the object frame."""

    positions: np.ndarray
    probe_size: int
    object_size: int

    def __post_init__(self):
        pos = check_positions(self.positions)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        m, n = int(self.probe_size), int(self.object_size)
        if m < 1 or n < m:
            raise ValueError(f"need 1 <= probe_size <= object_size, got {m}, {n}")
        if pos.min() < 0 or pos.max() + m > n:
            raise ValueError("scan position places the probe window outside the object")
        object.__setattr__(self, "probe_size", m)
        object.__setattr__(self, "object_size", n)

    def __len__(self):
        return len(self.positions)

    def windows(self):
        """Yield ``(rows, cols)`` slice pairs in position order."""
        m = self.probe_size
        for r, c in self.positions:
            yield slice(r, r + m), slice(c, c + m)

    def coverage(self):
        """Number of windows covering each object pixel."""
        n = self.object_size
        cov = np.zeros((n, n), dtype=np.int64)
        for win in self.windows():
            cov[win] += 1
        return cov


@dataclass(frozen=True)
class DiffractionStack:
    """Measured far-field intensities, one ``M x M`` pattern per scan position.

    ``photon_scale`` is the factor applied to the noiseless intensities before
    the Poisson draw, or ``None`` for noiseless data.
    """

    intensities: np.ndarray
    photon_scale: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "intensities", check_intensities(self.intensities))

    def __len__(self):
        return self.intensities.shape[0]

    @property
    def pattern_size(self):
        return self.intensities.shape[-1]

    @cached_property
    def amplitudes(self):
        return np.sqrt(self.intensities)

    @cached_property
    def amplitudes_fftorder(self):
        return np.fft.ifftshift(self.amplitudes, axes=(-2, -1))


@dataclass(frozen=True)
class GroundTruth:
    object: np.ndarray
    probe: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "object", check_field(self.object, "object"))
        object.__setattr__(self, "probe", check_field(self.probe, "probe"))


def _soft_disk(dist, radius, edge):
    if edge <= 0:
        return (dist <= radius).astype(np.float64)
    return np.clip((radius - dist) / edge + 0.5, 0.0, 1.0)


def make_phantom(n, amplitude_contrast=0.4, phase_range=1.0, cell_count=12, seed=0):
    """Procedural complex object made of soft-edged annular "cells".

    The background has unit amplitude and zero phase. Each cell has a rim
    thicker than its center, lowers the amplitude by up to
    ``amplitude_contrast`` and carries a phase offset drawn uniformly from
    ``[-phase_range, phase_range]``. Overlapping cells saturate, so the
    amplitude stays in ``[1 - amplitude_contrast, 1]`` and the phase in
    ``[-phase_range, phase_range]``.
    """
    n = int(n)
    if n < 32:
        raise ValueError(f"phantom size must be >= 32, got {n}")
    if int(cell_count) < 1:
        raise ValueError(f"cell_count must be >= 1, got {cell_count}")
    if not 0.0 <= amplitude_contrast <= 1.0:
        raise ValueError(f"amplitude_contrast must lie in [0, 1], got {amplitude_contrast}")
    if phase_range < 0:
        raise ValueError(f"phase_range must be >= 0, got {phase_range}")

    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:n, 0:n].astype(np.float64)
    weight = np.zeros((n, n))
    phase = np.zeros((n, n))
    for _ in range(int(cell_count)):
        radius = rng.uniform(n / 16, n / 8)
        cy, cx = rng.uniform(radius, n - radius, size=2)
        offset = rng.uniform(-phase_range, phase_range)
        dist = np.hypot(yy - cy, xx - cx)
        # biconcave profile: 0.5 at the center rising to 1 at the rim
        profile = 0.5 + 0.5 * np.minimum(dist / radius, 1.0) ** 2
        w = _soft_disk(dist, radius, edge=2.0) * profile
        weight += w
        phase += w * offset
    weight = np.clip(weight, 0.0, 1.0)
    phase = np.clip(phase, -phase_range, phase_range)
    return (1.0 - amplitude_contrast * weight) * np.exp(1j * phase)


def make_probe(m, radius, edge_smooth=0.0):
    """Centered circular top-hat, linearly rolled off over ``edge_smooth`` px, unit energy."""
    m = int(m)
    if m < 1:
        raise ValueError(f"probe size must be positive, got {m}")
    if not 1 <= radius <= m / 2:
        raise ValueError(f"probe radius must lie in [1, {m / 2}], got {radius}")
    if edge_smooth < 0:
        raise ValueError(f"edge_smooth must be >= 0, got {edge_smooth}")
    yy, xx = np.mgrid[0:m, 0:m].astype(np.float64)
    dist = np.hypot(yy - m // 2, xx - m // 2)
    if edge_smooth == 0:
        amp = (dist <= radius).astype(np.float64)
    else:
        amp = np.clip((radius + edge_smooth - dist) / edge_smooth, 0.0, 1.0)
    amp /= np.sqrt(np.sum(amp**2))
    return amp.astype(np.complex128)


def make_scan(rows, cols, step, jitter, m, n, seed=0):
    """Jittered raster scan, centered in the object frame, row-major order.

    Each offset is perturbed by an independent integer draw from
    ``[-jitter, jitter]`` per axis and then clamped into the frame.
    """
    rows, cols, step, jitter, m, n = (int(v) for v in (rows, cols, step, jitter, m, n))
    if rows < 1 or cols < 1:
        raise ValueError("scan grid needs at least one row and one column")
    if step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    if jitter < 0:
        raise ValueError(f"jitter must be >= 0, got {jitter}")
    span_r = (rows - 1) * step + m
    span_c = (cols - 1) * step + m
    if span_r > n or span_c > n:
        raise ValueError(f"a {rows}x{cols} grid with step {step} and window {m} does not fit in {n} px")
    off_r, off_c = (n - span_r) // 2, (n - span_c) // 2
    ii, jj = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    pos = np.stack([off_r + ii.ravel() * step, off_c + jj.ravel() * step], axis=1)
    if jitter:
        rng = np.random.default_rng(seed)
        pos = pos + rng.integers(-jitter, jitter + 1, size=pos.shape)
    pos = np.clip(pos, 0, n - m)
    return ScanGeometry(pos, m, n)


def exit_waves(probe, obj, geom):
    """``(J, M, M)`` stack of ``probe * object[window_j]``."""
    probe = np.asarray(probe)
    obj = np.asarray(obj)
    m, n = geom.probe_size, geom.object_size
    if probe.shape != (m, m) or obj.shape != (n, n):
        raise ValueError(
            f"probe {probe.shape} / object {obj.shape} inconsistent with geometry (M={m}, N={n})"
        )
    out = np.empty((len(geom), m, m), dtype=np.complex128)
    for j, win in enumerate(geom.windows()):
        out[j] = probe * obj[win]
    return out


def forward(truth, geom, photons_per_pattern=None, seed=0):
    """Far-field diffraction intensities for every scan position.

    With ``photons_per_pattern`` set, one global scale is chosen so that the
    mean expected total per pattern equals the budget, and each pattern is
    replaced by a Poisson draw from generator ``seed + j``.
    """
    psi = exit_waves(truth.probe, truth.object, geom)
    intensity = np.abs(dft2_centered(psi)) ** 2
    if photons_per_pattern is None:
        return DiffractionStack(intensity)
    if photons_per_pattern <= 0:
        raise ValueError(f"photons_per_pattern must be positive, got {photons_per_pattern}")
    scale = float(photons_per_pattern) / float(np.mean(intensity.sum(axis=(1, 2))))
    counts = np.empty_like(intensity)
    for j in range(len(intensity)):
        rng = np.random.default_rng(seed + j)
        counts[j] = rng.poisson(scale * intensity[j])
    return DiffractionStack(counts, photon_scale=scale)


def embed_center(f, size, fill=1.0):
    """Place ``f`` at the center of a ``size x size`` frame filled with ``fill``."""
    f = np.asarray(f)
    n = f.shape[0]
    if size < n:
        raise ValueError(f"frame {size} smaller than field {n}")
    out = np.full((size, size), fill, dtype=np.complex128)
    o = (size - n) // 2
    out[o : o + n, o : o + n] = f
    return out


def frame_size(rows, step, jitter, m, phantom_size, multiple=16):
    """Smallest frame, rounded up to ``multiple``, holding both the scan and the phantom."""
    need = max(phantom_size, (rows - 1) * step + m + 2 * jitter)
    return int(-(-need // multiple) * multiple)
