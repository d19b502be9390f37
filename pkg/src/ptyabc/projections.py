"""Product-space projections for blind ptychography.

The iterate is a stack of exit waves ``x = [psi_1 ... psi_J]`` with shape
``(J, M, M)``. The divide projection enforces the measured Fourier moduli on
every wave independently. The concur projection pulls the stack toward the
set of stacks that factor as ``probe * object[window_j]``; since that set is
nonconvex and its exact projection is out of reach, a warm-started
alternating least-squares fit of probe and object is used instead.
"""

from dataclasses import dataclass, replace

import numpy as np

from .simulate import exit_waves

EPS_FRAC = 1e-12
REG_FRAC = 1e-12


@dataclass(frozen=True)
class ProbeObjectPair:
    probe: np.ndarray
    object: np.ndarray

    def waves(self, geom):
        return exit_waves(self.probe, self.object, geom)

    def normalized(self):
        """Rescale the probe to unit energy and the object inversely."""
        energy = np.sqrt(np.sum(np.abs(self.probe) ** 2))
        if energy == 0:
            return self
        return replace(self, probe=self.probe / energy, object=self.object * energy)

    def probe_tilt(self):
        """Mean phase gradient ``(k_row, k_col)`` of the probe in rad/px."""
        p = self.probe
        k_row = np.angle(np.vdot(p[:-1, :], p[1:, :]))
        k_col = np.angle(np.vdot(p[:, :-1], p[:, 1:]))
        return float(k_row), float(k_col)

    def detilted(self):
        """Move the probe's linear phase ramp onto the object.

        ``P(u) exp(-ik.u)`` with ``O(r) exp(ik.r)`` changes every exit wave by
        a constant phase only, so the measured intensities cannot see ``k``.
        This fixes that freedom by giving the probe zero mean phase gradient.
        """
        k_row, k_col = self.probe_tilt()
        if k_row == 0 and k_col == 0:
            return self

        def ramp(shape):
            rr, cc = np.indices(shape)
            return np.exp(1j * (k_row * rr + k_col * cc))

        return replace(
            self,
            probe=self.probe / ramp(self.probe.shape),
            object=self.object * ramp(self.object.shape),
        )


def relax(projected, x, a):
    """``a * projected + (1 - a) * x``; a=1 projects, a=2 reflects, a=0 is the identity."""
    if a == 1:
        return projected
    if a == 0:
        return x
    return a * projected + (1 - a) * x


def project_modulus(psi, amplitude, eps_frac=EPS_FRAC):
    """Replace the Fourier modulus of ``psi`` by ``amplitude`` and keep its phase.

    ``amplitude`` is in centered frequency order, as produced by
    ``abs(dft2_centered(.))``. Works on a single field or a stack. Spectrum
    pixels with magnitude at or below ``eps_frac`` times the per-field peak
    get phase 0.
    """
    amplitude = np.asarray(amplitude, dtype=np.float64)
    if np.any(amplitude < 0):
        raise ValueError("amplitude must be nonnegative")
    return _project_modulus_fftorder(psi, np.fft.ifftshift(amplitude, axes=(-2, -1)), eps_frac)


def _centering_ramp(shape):
    ramps = [np.exp(-2j * np.pi * np.arange(n) * (n // 2) / n) for n in shape]
    return np.outer(ramps[0], ramps[1])


def _project_modulus_fftorder(psi, amplitude, eps_frac):
    # A circular shift of psi only multiplies its spectrum by a phase ramp,
    # which the projection carries through unchanged, so the centering
    # shifts of dft2_centered cancel once amplitude is in FFT order.
    psi = np.asarray(psi)
    if psi.shape != amplitude.shape:
        raise ValueError(f"wave shape {psi.shape} does not match amplitude shape {amplitude.shape}")
    spec = np.fft.fft2(psi, norm="ortho")
    mag = np.abs(spec)
    eps = eps_frac * mag.max(axis=(-2, -1), keepdims=True)
    small = mag <= eps
    np.divide(spec, mag, out=spec, where=~small)
    if np.any(small):
        # phase 0 in the centered frame is a linear ramp in the plain FFT frame
        spec[small] = np.broadcast_to(_centering_ramp(psi.shape[-2:]), spec.shape)[small]
    spec *= amplitude
    return np.fft.ifft2(spec, norm="ortho")


def divide_project(x, data, c=1.0, eps_frac=EPS_FRAC):
    """Relaxed divide projection: modulus constraint applied to each wave."""
    x = np.asarray(x)
    if x.shape != data.intensities.shape:
        raise ValueError(f"iterate shape {x.shape} does not match data shape {data.intensities.shape}")
    if c == 0:
        return x
    return relax(_project_modulus_fftorder(x, data.amplitudes_fftorder, eps_frac), x, c)


def _check_stack(x, geom):
    x = np.asarray(x)
    m = geom.probe_size
    if x.shape != (len(geom), m, m):
        raise ValueError(f"iterate shape {x.shape} inconsistent with geometry ({len(geom)}, {m}, {m})")
    return x


def update_object(x, probe, geom, reg_frac=REG_FRAC):
    """Least-squares object for fixed probe, accumulated over all windows."""
    x = _check_stack(x, geom)
    probe = np.asarray(probe)
    if probe.shape != (geom.probe_size,) * 2:
        raise ValueError(f"probe shape {probe.shape} inconsistent with geometry")
    n = geom.object_size
    num = np.zeros((n, n), dtype=np.complex128)
    den = np.zeros((n, n))
    pc = np.conj(probe)
    p2 = np.abs(probe) ** 2
    for j, win in enumerate(geom.windows()):
        num[win] += pc * x[j]
        den[win] += p2
    delta = reg_frac * den.max()
    if delta == 0:
        return np.zeros((n, n), dtype=np.complex128)
    return num / (den + delta)


def update_probe(x, obj, geom, reg_frac=REG_FRAC):
    """Least-squares probe for fixed object."""
    x = _check_stack(x, geom)
    obj = np.asarray(obj)
    if obj.shape != (geom.object_size,) * 2:
        raise ValueError(f"object shape {obj.shape} inconsistent with geometry")
    m = geom.probe_size
    num = np.zeros((m, m), dtype=np.complex128)
    den = np.zeros((m, m))
    for j, win in enumerate(geom.windows()):
        o = obj[win]
        num += np.conj(o) * x[j]
        den += np.abs(o) ** 2
    delta = reg_frac * den.max()
    if delta == 0:
        return np.zeros((m, m), dtype=np.complex128)
    return num / (den + delta)


def consistency_residual(x, pair, geom):
    """``sum_j ||psi_j - P * O_j||^2``."""
    return float(np.sum(np.abs(np.asarray(x) - pair.waves(geom)) ** 2))


def concur_project(x, geom, seed_pair, b=1.0, inner_iters=1, reg_frac=REG_FRAC, renorm=True):
    """Relaxed concur projection onto the probe-object factorization set.

    Runs ``inner_iters`` rounds of object-then-probe least squares from
    ``seed_pair``, synthesizes the consistent waves and blends them with
    ``x`` by ``b``. Returns the blended stack and the fitted pair.
    """
    x = _check_stack(x, geom)
    if inner_iters < 1:
        raise ValueError(f"inner_iters must be >= 1, got {inner_iters}")
    probe = seed_pair.probe
    obj = seed_pair.object
    for _ in range(inner_iters):
        obj = update_object(x, probe, geom, reg_frac)
        probe = update_probe(x, obj, geom, reg_frac)
    pair = ProbeObjectPair(probe, obj)
    if renorm:
        pair = pair.normalized()
    if b == 0:
        return x, pair
    return relax(pair.waves(geom), x, b), pair
