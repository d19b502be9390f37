"""scikit-learn style reconstructors.

``X`` is a ``(J, M, M)`` stack of measured intensities and ``positions`` a
``(J, 2)`` array of window offsets, passed to :meth:`fit` alongside ``X``::

    rec = AbcReconstructor(preset="raar", parameter=0.75, n_iter=300)
    rec.fit(X, positions=positions)
    rec.object_, rec.probe_, rec.trace_
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import engine
from .benchmark import initial_guess
from .metrics import MetricRegion, data_error
from .projections import EPS_FRAC, REG_FRAC, ProbeObjectPair
from .simulate import DiffractionStack, ScanGeometry
from .validation import check_field, check_intensities, check_positions


class _PtychoBase(BaseEstimator):
    def _setup(self, X, positions, object_size, init):
        data = DiffractionStack(check_intensities(X))
        positions = check_positions(positions)
        if len(positions) != len(data):
            raise ValueError(f"{len(data)} patterns but {len(positions)} positions")
        m = data.pattern_size
        if object_size is None:
            object_size = int(positions.max()) + m
        geom = ScanGeometry(positions, m, object_size)
        if init is None:
            init = initial_guess(geom, radius=0.375 * m)
        else:
            init = ProbeObjectPair(check_field(init.probe, "probe"), check_field(init.object, "object"))
        return data, geom, init

    def _finish(self, data, geom, pair, trace):
        self.geometry_ = geom
        self.probe_ = pair.probe
        self.object_ = pair.object
        self.trace_ = trace
        self.n_iter_ = len(trace)
        self.n_features_in_ = data.pattern_size**2
        return self

    def predict(self, positions=None):
        """Model intensities ``|F(P * O_j)|^2`` at ``positions`` (default: the fitted scan)."""
        check_is_fitted(self, "object_")
        geom = self.geometry_
        if positions is not None:
            geom = ScanGeometry(check_positions(positions), geom.probe_size, geom.object_size)
        from .field import dft2_centered

        return np.abs(dft2_centered(ProbeObjectPair(self.probe_, self.object_).waves(geom))) ** 2

    def score(self, X, positions=None):
        """Negative data error of the fitted pair against ``X``; higher is better."""
        check_is_fitted(self, "object_")
        geom = self.geometry_
        if positions is not None:
            geom = ScanGeometry(check_positions(positions), geom.probe_size, geom.object_size)
        waves = ProbeObjectPair(self.probe_, self.object_).waves(geom)
        return -data_error(waves, DiffractionStack(check_intensities(X)))


class AbcReconstructor(_PtychoBase):
    """Blind ptychography by the relaxed divide-and-concur ``(a, b, c)`` iteration.

    Parameters
    ----------
    preset : str
        One of ``dc, ar, dr, sf, raar, rrr, tlambda`` or ``custom``.
    parameter : float, optional
        Beta (raar, rrr) or lambda (tlambda); defaults to 0.75.
    a, b, c : float, optional
        Relaxations for ``preset="custom"``.
    n_iter : int
        Outer iterations.
    inner_iter : int
        Object/probe least-squares rounds per concur projection.
    """

    def __init__(
        self,
        preset="raar",
        parameter=None,
        a=None,
        b=None,
        c=None,
        n_iter=300,
        inner_iter=1,
        eps_frac=EPS_FRAC,
        reg_frac=REG_FRAC,
        renorm=True,
        detilt=True,
    ):
        self.preset = preset
        self.parameter = parameter
        self.a = a
        self.b = b
        self.c = c
        self.n_iter = n_iter
        self.inner_iter = inner_iter
        self.eps_frac = eps_frac
        self.reg_frac = reg_frac
        self.renorm = renorm
        self.detilt = detilt

    def _params(self):
        common = dict(
            iters=self.n_iter,
            inner_iters=self.inner_iter,
            eps_frac=self.eps_frac,
            reg_frac=self.reg_frac,
            renorm=self.renorm,
            detilt=self.detilt,
        )
        if self.preset == "custom":
            if None in (self.a, self.b, self.c):
                raise ValueError("preset='custom' needs a, b and c")
            return engine.AlgoParams(a=self.a, b=self.b, c=self.c, preset="custom", **common)
        return engine.AlgoParams.from_preset(self.preset, self.parameter, **common)

    def fit(self, X, y=None, positions=None, object_size=None, init=None, truth=None, metric_region=None):
        if positions is None:
            raise ValueError("positions are required")
        params = self._params()
        data, geom, init = self._setup(X, positions, object_size, init)
        if truth is not None and metric_region is None:
            metric_region = MetricRegion.central(truth.object.shape)
        pair, trace = engine.run(data, geom, init, params, truth, metric_region)
        self.params_ = params
        return self._finish(data, geom, pair, trace)


class SequentialProjections(_PtychoBase):
    """Position-by-position projection with local object and probe corrections."""

    def __init__(
        self,
        n_iter=100,
        order="fixed",
        alpha_obj=1.0,
        alpha_probe=1.0,
        eps_frac=EPS_FRAC,
        detilt=True,
        random_state=0,
    ):
        self.n_iter = n_iter
        self.order = order
        self.alpha_obj = alpha_obj
        self.alpha_probe = alpha_probe
        self.eps_frac = eps_frac
        self.detilt = detilt
        self.random_state = random_state

    def fit(self, X, y=None, positions=None, object_size=None, init=None, truth=None, metric_region=None):
        if positions is None:
            raise ValueError("positions are required")
        params = engine.AlgoParams(
            iters=self.n_iter,
            sp_order=self.order,
            sp_alpha_obj=self.alpha_obj,
            sp_alpha_probe=self.alpha_probe,
            eps_frac=self.eps_frac,
            detilt=self.detilt,
            seed=self.random_state,
        )
        data, geom, init = self._setup(X, positions, object_size, init)
        if truth is not None and metric_region is None:
            metric_region = MetricRegion.central(truth.object.shape)
        pair, trace = engine.sp_run(data, geom, init, params, truth, metric_region)
        self.params_ = params
        return self._finish(data, geom, pair, trace)
