"""The desk-scale algorithm-comparison setup shared by the CLI and the tests."""

from dataclasses import dataclass

import numpy as np

from .metrics import MetricRegion
from .projections import ProbeObjectPair
from .simulate import (
    PROBE_PRESETS,
    DiffractionStack,
    GroundTruth,
    ScanGeometry,
    embed_center,
    forward,
    frame_size,
    make_phantom,
    make_probe,
    make_scan,
)


@dataclass(frozen=True)
class Benchmark:
    truth: GroundTruth
    geom: ScanGeometry
    data: DiffractionStack
    init: ProbeObjectPair
    region: MetricRegion


def initial_guess(geom, radius):
    """Unit object and an ideal (sharp-edged) circular aperture probe."""
    n, m = geom.object_size, geom.probe_size
    return ProbeObjectPair(make_probe(m, radius), np.ones((n, n), dtype=np.complex128))


def make_benchmark(
    probe="big",
    phantom_size=128,
    amplitude_contrast=0.4,
    phase_range=1.0,
    cell_count=12,
    grid=8,
    step=12,
    jitter=2,
    init_radius=24.0,
    photons=None,
    seed=7,
):
    """Phantom embedded in a frame large enough for the scan, plus noiseless or Poisson data.

    The phantom keeps its requested size; the frame around it is padded with
    the phantom's unit background.
    """
    cfg = PROBE_PRESETS[probe] if isinstance(probe, str) else dict(probe)
    m = cfg["m"]
    n = frame_size(grid, step, jitter, m, phantom_size)
    phantom = make_phantom(phantom_size, amplitude_contrast, phase_range, cell_count, seed)
    obj = embed_center(phantom, n)
    truth = GroundTruth(
        obj,
        make_probe(m, cfg["radius"], cfg["edge_smooth"]),
        meta={"probe": probe if isinstance(probe, str) else "custom", "phantom_size": phantom_size},
    )
    geom = make_scan(grid, grid, step, jitter, m, n, seed)
    data = forward(truth, geom, photons, seed)
    return Benchmark(truth, geom, data, initial_guess(geom, init_radius), MetricRegion.central((n, n)))
