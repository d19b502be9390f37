import numpy as np
import pytest

from ptyabc.field import dft2_centered
from ptyabc.metrics import MetricRegion, align_complex, data_error, object_nrmse
from ptyabc.simulate import DiffractionStack, exit_waves

from conftest import crandn


def test_data_error_zero_at_truth(small_problem):
    truth, geom, data = small_problem
    assert data_error(exit_waves(truth.probe, truth.object, geom), data) <= 1e-10


def test_data_error_zero_waves_is_one(small_problem):
    _, _, data = small_problem
    assert data_error(np.zeros(data.intensities.shape), data) == pytest.approx(1.0, abs=1e-15)


def test_data_error_direct_oracle(rng):
    psi = crandn(rng, 1, 4, 4)
    I = rng.uniform(0, 3, (1, 4, 4))
    num = den = 0.0
    spec = dft2_centered(psi[0])
    for q in np.ndindex(4, 4):
        num += (abs(spec[q]) - np.sqrt(I[0][q])) ** 2
        den += I[0][q]
    assert abs(data_error(psi, DiffractionStack(I)) - np.sqrt(num / den)) <= 1e-12


def test_data_error_rejects_zero_data():
    with pytest.raises(ValueError):
        data_error(np.ones((1, 4, 4)), DiffractionStack(np.zeros((1, 4, 4))))


def test_align_global_phase(rng):
    t = crandn(rng, 8, 8)
    gamma, aligned = align_complex(1j * t, t)
    assert gamma == pytest.approx(-1j, abs=1e-15)
    np.testing.assert_allclose(aligned, t, atol=1e-14)


def test_align_scale(rng):
    t = crandn(rng, 8, 8)
    gamma, aligned = align_complex(2 * t, t)
    assert gamma == pytest.approx(0.5, abs=1e-15)
    np.testing.assert_allclose(aligned, t, atol=1e-14)


def test_align_matches_lstsq(rng):
    rec, t = crandn(rng, 8, 8), crandn(rng, 8, 8)
    region = MetricRegion(1, 2, 5, 4)
    sl = region.slices
    sol = np.linalg.lstsq(rec[sl].reshape(-1, 1), t[sl].ravel(), rcond=None)[0][0]
    gamma, _ = align_complex(rec, t, region)
    assert abs(gamma - sol) <= 1e-12 * abs(sol)


def test_align_rejects_zero_region(rng):
    rec = np.zeros((8, 8), complex)
    rec[0, 0] = 1
    with pytest.raises(ValueError):
        align_complex(rec, crandn(rng, 8, 8), MetricRegion(2, 2, 4, 4))


@pytest.mark.parametrize("theta", [0.0, 0.7, -2.9, np.pi])
def test_nrmse_phase_invariance(rng, theta):
    t = crandn(rng, 16, 16)
    assert object_nrmse(np.exp(1j * theta) * t, t) <= 1e-12


def test_nrmse_scale_invariance(rng):
    rec, t = crandn(rng, 16, 16), crandn(rng, 16, 16)
    base = object_nrmse(rec, t)
    for kappa in (3.0, -0.2 + 5j, 1e-3j):
        assert abs(object_nrmse(kappa * rec, t) - base) <= 1e-12


def test_nrmse_perturbation_scaling(rng):
    t = crandn(rng, 32, 32)
    noise = crandn(rng, 32, 32)
    eps = 1e-6
    # noise orthogonal to t is not absorbed by the alignment
    noise -= np.vdot(t, noise) / np.vdot(t, t) * t
    noise *= eps / np.linalg.norm(noise)
    assert object_nrmse(t + noise, t) == pytest.approx(eps / np.linalg.norm(t), rel=1e-6)


def test_nrmse_direct_formula(rng):
    rec, t = crandn(rng, 8, 8), crandn(rng, 8, 8)
    region = MetricRegion(2, 1, 4, 6)
    r, tt = rec[region.slices].ravel(), t[region.slices].ravel()
    g = np.sum(np.conj(r) * tt) / np.sum(np.abs(r) ** 2)
    expected = np.sqrt(np.sum(np.abs(g * r - tt) ** 2) / np.sum(np.abs(tt) ** 2))
    assert abs(object_nrmse(rec, t, region) - expected) <= 1e-12
    assert object_nrmse(t, t, region) <= 1e-15


def test_central_region():
    assert MetricRegion.central((160, 160)) == MetricRegion(40, 40, 80, 80)
    with pytest.raises(ValueError):
        MetricRegion(0, 0, 10, 10).check((8, 8))
