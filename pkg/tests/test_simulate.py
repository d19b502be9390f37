import numpy as np
import pytest

from ptyabc.field import dft2_centered
from ptyabc.simulate import (
    GroundTruth,
    ScanGeometry,
    embed_center,
    exit_waves,
    forward,
    make_phantom,
    make_probe,
    make_scan,
)


def test_featureless_phantom_is_one():
    f = make_phantom(64, 0.0, 0.0, 5, seed=1)
    np.testing.assert_array_equal(f, np.ones((64, 64)))


def test_phantom_deterministic():
    np.testing.assert_array_equal(make_phantom(64, 0.4, 1.0, 6, 9), make_phantom(64, 0.4, 1.0, 6, 9))
    assert not np.array_equal(make_phantom(64, 0.4, 1.0, 6, 9), make_phantom(64, 0.4, 1.0, 6, 10))


def test_phantom_ranges():
    f = make_phantom(128, 0.4, 1.0, 12, seed=7)
    assert np.abs(f).min() >= 0.6 - 1e-12
    assert np.abs(f).max() <= 1 + 1e-12
    assert np.abs(np.angle(f)).max() <= 1.0 + 1e-12
    # cells are actually present
    assert np.abs(f).min() < 0.7
    assert np.abs(np.angle(f)).max() > 0.3


@pytest.mark.parametrize("bad", [dict(n=16), dict(cell_count=0), dict(amplitude_contrast=1.5)])
def test_phantom_rejects_bad_arguments(bad):
    kw = dict(n=64, amplitude_contrast=0.4, phase_range=1.0, cell_count=3, seed=0) | bad
    with pytest.raises(ValueError):
        make_phantom(**kw)


def test_small_binary_probe():
    p = make_probe(4, 2, 0)
    yy, xx = np.mgrid[0:4, 0:4]
    mask = np.hypot(yy - 2, xx - 2) <= 2
    np.testing.assert_allclose(p, mask / np.sqrt(mask.sum()), atol=1e-15)


@pytest.mark.parametrize("m, r, s", [(64, 20, 4), (64, 10, 0), (33, 7.5, 2.5), (8, 4, 1)])
def test_probe_unit_energy(m, r, s):
    assert abs(np.sum(np.abs(make_probe(m, r, s)) ** 2) - 1) <= 1e-12


def test_probe_size_ratio():
    def support(p):
        a = np.abs(p)
        return np.count_nonzero(a >= a.max() / 2)

    ratio = support(make_probe(64, 20, 0)) / support(make_probe(64, 10, 0))
    assert 3.6 <= ratio <= 4.4


@pytest.mark.parametrize("radius", [0.5, 33])
def test_probe_radius_range(radius):
    with pytest.raises(ValueError):
        make_probe(64, radius)


def test_raster_positions():
    geom = make_scan(2, 2, 5, 0, m=4, n=9)
    np.testing.assert_array_equal(geom.positions, [[0, 0], [0, 5], [5, 0], [5, 5]])


def test_jittered_scan_deterministic_and_in_bounds():
    a = make_scan(8, 8, 12, 2, 64, 160, seed=7)
    b = make_scan(8, 8, 12, 2, 64, 160, seed=7)
    np.testing.assert_array_equal(a.positions, b.positions)
    assert len(a) == 64
    assert a.positions.min() >= 0 and a.positions.max() + 64 <= 160
    base = make_scan(8, 8, 12, 0, 64, 160)
    assert np.abs(a.positions - base.positions).max() <= 2
    assert np.any(a.positions != base.positions)


def test_scan_must_fit():
    with pytest.raises(ValueError):
        make_scan(8, 8, 12, 2, 64, 128)


def test_geometry_validation():
    with pytest.raises(ValueError):
        ScanGeometry([[0, 5]], 4, 8)
    with pytest.raises(ValueError):
        ScanGeometry(np.zeros((0, 2)), 4, 8)


def test_forward_delta_probe_flat_patterns():
    probe = np.zeros((4, 4), dtype=complex)
    probe[2, 2] = 1
    geom = make_scan(2, 2, 2, 0, 4, 6)
    data = forward(GroundTruth(np.ones((6, 6)), probe), geom)
    np.testing.assert_allclose(data.intensities, 1 / 16, atol=1e-15)


def test_forward_energy_conservation(small_problem):
    truth, geom, data = small_problem
    psi = exit_waves(truth.probe, truth.object, geom)
    np.testing.assert_allclose(data.intensities.sum(axis=(1, 2)), np.sum(np.abs(psi) ** 2, axis=(1, 2)), rtol=1e-12)


def test_forward_mismatch():
    geom = make_scan(2, 2, 2, 0, 4, 6)
    with pytest.raises(ValueError):
        forward(GroundTruth(np.ones((7, 7)), np.ones((4, 4))), geom)


def test_poisson_counts():
    truth = GroundTruth(make_phantom(128, 0.4, 1.0, 12, 7), make_probe(64, 20, 4))
    geom = make_scan(8, 8, 8, 0, 64, 128)
    clean = forward(truth, geom)
    noisy = forward(truth, geom, photons_per_pattern=1e6, seed=3)
    assert np.all(noisy.intensities == np.round(noisy.intensities))
    totals = noisy.intensities.sum(axis=(1, 2))
    expected = noisy.photon_scale * clean.intensities.sum(axis=(1, 2))
    # mean expected total equals the budget; each pattern within 5 sigma of its expectation
    assert abs(expected.mean() - 1e6) <= 1e-6 * 1e6
    assert np.all(np.abs(totals - expected) <= 5 * np.sqrt(expected))
    assert abs(totals.mean() - 1e6) <= 5 * np.sqrt(1e6 / len(totals))
    again = forward(truth, geom, photons_per_pattern=1e6, seed=3)
    np.testing.assert_array_equal(noisy.intensities, again.intensities)


def test_noiseless_data_consistent_with_truth(small_problem):
    truth, geom, data = small_problem
    psi = exit_waves(truth.probe, truth.object, geom)
    np.testing.assert_allclose(np.abs(dft2_centered(psi)), data.amplitudes, atol=1e-14)


def test_embed_center():
    out = embed_center(np.zeros((2, 2)), 6)
    assert out[2:4, 2:4].sum() == 0 and out.sum() == 32
