"""The generalized relaxed divide-and-concur iteration and its reconstruction loops.

One step maps the exit-wave stack ``x`` to::

    x' = a * P_C^b(P_D^c(x)) + (1 - a) * x

where ``P_D`` is the modulus (divide) projection, ``P_C`` the probe-object
consistency (concur) projection, and a superscript ``r`` denotes the relaxed
operator ``r * P + (1 - r) * I``. Named algorithms are points in ``(a, b, c)``.
"""

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .metrics import data_error, object_nrmse
from .projections import (
    EPS_FRAC,
    REG_FRAC,
    ProbeObjectPair,
    concur_project,
    divide_project,
    project_modulus,
    relax,
)

logger = logging.getLogger(__name__)

PRESETS = ("dc", "ar", "dr", "sf", "raar", "rrr", "tlambda")
PARAMETERIZED = ("raar", "rrr", "tlambda")
DEFAULT_PARAMETER = 0.75


def preset_params(name, parameter=None):
    """``(a, b, c)`` realizing a named algorithm.

    ``raar``, ``rrr`` and ``tlambda`` need their parameter (beta or lambda,
    in ``(0, 1]``). ``custom`` takes the triple itself as ``parameter``.
    """
    name = str(name).lower()
    if name == "custom":
        if parameter is None or np.ndim(parameter) != 1 or len(parameter) != 3:
            raise ValueError("custom preset needs parameter=(a, b, c)")
        a, b, c = (float(v) for v in parameter)
        if not all(np.isfinite((a, b, c))):
            raise ValueError("custom relaxations must be finite")
        return a, b, c
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; valid: {', '.join(PRESETS + ('custom',))}")
    if name in PARAMETERIZED:
        if parameter is None:
            raise ValueError(f"preset {name!r} requires a parameter")
        p = float(parameter)
        if not 0 < p <= 1:
            raise ValueError(f"{name} parameter must lie in (0, 1], got {p}")
    if name == "dc":
        return 1.0, 1.0, 1.0
    if name in ("ar", "dr"):
        return 0.5, 2.0, 2.0
    if name == "sf":
        return 1.0, 2.0, 1.0
    if name == "raar":
        return 0.5, 2 * p, 2.0
    if name == "rrr":
        return p / 2, 2.0, 2.0
    return 1 / (1 + p), 1 + p, 1 + p


@dataclass
class AlgoParams:
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    preset: str = "custom"
    beta_or_lambda: float | None = None
    iters: int = 100
    inner_iters: int = 1
    eps_frac: float = EPS_FRAC
    reg_frac: float = REG_FRAC
    renorm: bool = True
    detilt: bool = True
    seed: int = 0
    sp_order: str = "fixed"
    sp_alpha_obj: float = 1.0
    sp_alpha_probe: float = 1.0

    def __post_init__(self):
        if int(self.iters) < 1:
            raise ValueError(f"iters must be >= 1, got {self.iters}")
        if int(self.inner_iters) < 1:
            raise ValueError(f"inner_iters must be >= 1, got {self.inner_iters}")
        if not all(np.isfinite((self.a, self.b, self.c))):
            raise ValueError("relaxations must be finite")
        if self.sp_order not in ("fixed", "shuffled"):
            raise ValueError(f"sp_order must be 'fixed' or 'shuffled', got {self.sp_order!r}")

    @classmethod
    def from_preset(cls, name, parameter=None, **kwargs):
        if parameter is None and str(name).lower() in PARAMETERIZED:
            parameter = DEFAULT_PARAMETER
        a, b, c = preset_params(name, parameter)
        return cls(a=a, b=b, c=c, preset=str(name).lower(), beta_or_lambda=parameter, **kwargs)

    @property
    def label(self):
        if self.preset == "sp":
            return f"sp:{self.sp_order}"
        if self.preset in PARAMETERIZED:
            return f"{self.preset}:{self.beta_or_lambda:g}"
        if self.preset == "custom":
            return f"custom:{self.a:g},{self.b:g},{self.c:g}"
        return self.preset


@dataclass
class ErrorTrace:
    label: str = ""
    iteration: list = field(default_factory=list)
    data_error: list = field(default_factory=list)
    object_nrmse: list = field(default_factory=list)
    elapsed_ms: list = field(default_factory=list)
    status: str = "ok"

    def __len__(self):
        return len(self.iteration)

    def append(self, it, derr, nrmse, elapsed):
        self.iteration.append(int(it))
        self.data_error.append(float(derr))
        self.object_nrmse.append(None if nrmse is None else float(nrmse))
        self.elapsed_ms.append(float(elapsed))

    @property
    def final_nrmse(self):
        return self.object_nrmse[-1] if self.object_nrmse else None


class DivergenceError(RuntimeError):
    """Raised when an iterate turns non-finite; carries the partial trace."""

    def __init__(self, iteration, trace, pair=None):
        super().__init__(f"diverged at iteration {iteration}")
        self.iteration = iteration
        self.trace = trace
        self.pair = pair


def abc_step(x, data, geom, pair, params):
    y = divide_project(x, data, params.c, params.eps_frac)
    z, pair = concur_project(
        y, geom, pair, params.b, params.inner_iters, params.reg_frac, params.renorm
    )
    return relax(z, x, params.a), pair


def _check_init(init, geom):
    m, n = geom.probe_size, geom.object_size
    if init.probe.shape != (m, m) or init.object.shape != (n, n):
        raise ValueError(
            f"init probe {init.probe.shape} / object {init.object.shape} inconsistent with (M={m}, N={n})"
        )
    return ProbeObjectPair(
        np.asarray(init.probe, dtype=np.complex128), np.asarray(init.object, dtype=np.complex128)
    )


def estimate(pair, params):
    """The reported reconstruction: the latest pair, tilt-free if ``params.detilt``."""
    return pair.detilted() if params.detilt else pair


def _nrmse(pair, truth, region, params):
    if truth is None:
        return None
    return object_nrmse(estimate(pair, params).object, truth.object, region)


def run(data, geom, init, params, truth=None, region=None, callback=None, from_pair=False):
    """Iterate ``abc_step`` from the exit waves of ``init``.

    Returns the last fitted probe-object pair and the per-iteration trace.
    The data error is measured on the exit-wave iterate itself, or on the
    waves re-synthesized from the fitted pair when ``from_pair`` is set.
    ``callback(k, x, pair)`` is invoked after each iteration if given.
    """
    if len(data) != len(geom):
        raise ValueError(f"{len(data)} patterns but {len(geom)} scan positions")
    pair = _check_init(init, geom)
    x = pair.waves(geom)
    trace = ErrorTrace(params.label)
    start = time.perf_counter()
    for k in range(1, params.iters + 1):
        x, pair = abc_step(x, data, geom, pair, params)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(pair.object))):
            trace.status = "diverged"
            raise DivergenceError(k, trace, pair)
        trace.append(
            k,
            data_error(pair.waves(geom) if from_pair else x, data),
            _nrmse(pair, truth, region, params),
            1e3 * (time.perf_counter() - start),
        )
        if callback is not None:
            callback(k, x, pair)
    logger.debug("%s finished: data_error=%.3e", trace.label, trace.data_error[-1])
    return estimate(pair, params), trace


def sp_run(data, geom, init, params, truth=None, region=None):
    """Sequential projections: one local modulus projection and update per position."""
    if len(data) != len(geom):
        raise ValueError(f"{len(data)} patterns but {len(geom)} scan positions")
    pair = _check_init(init, geom)
    probe, obj = pair.probe.copy(), pair.object.copy()
    amps = data.amplitudes
    windows = list(geom.windows())
    rng = np.random.default_rng(params.seed)
    trace = ErrorTrace(f"sp:{params.sp_order}")
    start = time.perf_counter()
    for k in range(1, params.iters + 1):
        order = np.arange(len(geom))
        if params.sp_order == "shuffled":
            order = rng.permutation(order)
        for j in order:
            win = windows[j]
            o = obj[win]
            psi = probe * o
            delta = project_modulus(psi, amps[j], params.eps_frac) - psi
            pmax = np.max(np.abs(probe) ** 2)
            omax = np.max(np.abs(o) ** 2)
            if pmax > 0:
                obj[win] = o + params.sp_alpha_obj * np.conj(probe) / pmax * delta
            if omax > 0:
                probe = probe + params.sp_alpha_probe * np.conj(o) / omax * delta
        if not (np.all(np.isfinite(probe)) and np.all(np.isfinite(obj))):
            trace.status = "diverged"
            raise DivergenceError(k, trace, ProbeObjectPair(probe, obj))
        live = ProbeObjectPair(probe, obj)
        trace.append(
            k,
            data_error(live.waves(geom), data),
            _nrmse(live, truth, region, params),
            1e3 * (time.perf_counter() - start),
        )
    return estimate(ProbeObjectPair(probe, obj), params), trace


def _as_params(spec, iters, kwargs):
    if isinstance(spec, AlgoParams):
        return replace(spec, iters=iters)
    name, parameter = (spec, None) if isinstance(spec, str) else spec
    if name == "sp":
        return AlgoParams(iters=iters, preset="sp", sp_order=parameter or "fixed", **kwargs)
    return AlgoParams.from_preset(name, parameter, iters=iters, **kwargs)


def compare(data, geom, init, presets, iters, truth=None, region=None, from_pair=False, **kwargs):
    """Run every preset from the same start; a diverging preset keeps its partial trace.

    ``presets`` holds names, ``(name, parameter)`` tuples or ``AlgoParams``;
    ``("sp", "fixed" | "shuffled")`` selects sequential projections.
    Returns ``{label: ErrorTrace}`` in input order.
    """
    if not presets:
        raise ValueError("compare needs at least one preset")
    traces = {}
    for spec in presets:
        params = _as_params(spec, iters, kwargs)
        try:
            if params.preset == "sp":
                _, trace = sp_run(data, geom, init, params, truth, region)
            else:
                _, trace = run(data, geom, init, params, truth, region, from_pair=from_pair)
        except DivergenceError as err:
            logger.warning("%s diverged at iteration %d", err.trace.label, err.iteration)
            trace = err.trace
        traces[trace.label] = trace
    return traces
