"""Blind ptychographic phase retrieval with relaxed divide-and-concur projections."""

__version__ = "0.1.0"

from .engine import AlgoParams, DivergenceError, ErrorTrace, abc_step, compare, preset_params, run, sp_run
from .estimator import AbcReconstructor, SequentialProjections
from .field import dft2_centered, idft2_centered
from .metrics import MetricRegion, align_complex, data_error, object_nrmse
from .projections import ProbeObjectPair, concur_project, divide_project, project_modulus
from .simulate import DiffractionStack, GroundTruth, ScanGeometry, forward, make_phantom, make_probe, make_scan

__all__ = [
    "AbcReconstructor",
    "AlgoParams",
    "DiffractionStack",
    "DivergenceError",
    "ErrorTrace",
    "GroundTruth",
    "MetricRegion",
    "ProbeObjectPair",
    "ScanGeometry",
    "SequentialProjections",
    "abc_step",
    "align_complex",
    "compare",
    "concur_project",
    "data_error",
    "dft2_centered",
    "divide_project",
    "forward",
    "idft2_centered",
    "make_phantom",
    "make_probe",
    "make_scan",
    "object_nrmse",
    "preset_params",
    "project_modulus",
    "run",
    "sp_run",
]
