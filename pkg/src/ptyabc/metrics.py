"""Error metrics: data fidelity of an iterate and ambiguity-free object error."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MetricRegion:
    top: int
    left: int
    height: int
    width: int

    @classmethod
    def central(cls, shape, fraction=0.5):
        """Centered rectangle spanning ``fraction`` of each dimension."""
        h, w = shape
        rh, rw = max(1, int(round(h * fraction))), max(1, int(round(w * fraction)))
        return cls((h - rh) // 2, (w - rw) // 2, rh, rw)

    @property
    def slices(self):
        return slice(self.top, self.top + self.height), slice(self.left, self.left + self.width)

    def check(self, shape):
        if self.height < 1 or self.width < 1:
            raise ValueError("metric region must have positive area")
        if self.top < 0 or self.left < 0 or self.top + self.height > shape[0] or self.left + self.width > shape[1]:
            raise ValueError(f"metric region {self} exceeds field bounds {shape}")
        return self


def data_error(x, data):
    """Normalized far-field amplitude residual of the exit-wave stack ``x``."""
    amp = data.amplitudes_fftorder
    x = np.asarray(x)
    if x.shape != amp.shape:
        raise ValueError(f"iterate shape {x.shape} does not match data shape {amp.shape}")
    norm = float(np.sum(data.intensities))
    if norm == 0:
        raise ValueError("data_error undefined for all-zero data")
    # moduli are shift-invariant, so FFT order avoids recentering
    resid = np.abs(np.fft.fft2(x, norm="ortho")) - amp
    return float(np.sqrt(np.sum(resid**2) / norm))


def _region_pair(rec, truth, region):
    rec, truth = np.asarray(rec), np.asarray(truth)
    if rec.shape != truth.shape:
        raise ValueError(f"shape mismatch: {rec.shape} vs {truth.shape}")
    if region is None:
        region = MetricRegion(0, 0, *rec.shape)
    sl = region.check(rec.shape).slices
    return rec[sl], truth[sl]


def align_complex(rec, truth, region=None):
    """Best complex scale ``gamma`` mapping ``rec`` onto ``truth`` over ``region``.

    Returns ``(gamma, gamma * rec)``; the aligned field covers the full frame.
    """
    r, t = _region_pair(rec, truth, region)
    energy = float(np.sum(np.abs(r) ** 2))
    if energy == 0:
        raise ValueError("reconstruction is identically zero on the metric region")
    gamma = complex(np.vdot(r, t) / energy)
    return gamma, gamma * np.asarray(rec)


def object_nrmse(rec, truth, region=None):
    gamma, _ = align_complex(rec, truth, region)
    r, t = _region_pair(rec, truth, region)
    return float(np.linalg.norm(gamma * r - t) / np.linalg.norm(t))
