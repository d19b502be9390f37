"""Exact projections onto circles in the plane.

A small playground for the projection algebra: sequential projections, the
divide/concur product space and the relaxed ``(a, b, c)`` step all have
closed forms here, so identities can be checked to machine precision.
Points are length-2 arrays; a product point is a ``(K, 2)`` array holding
one plane point per circle.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Circle:
    center: tuple
    radius: float

    def __post_init__(self):
        center = tuple(float(v) for v in self.center)
        if len(center) != 2 or not all(np.isfinite(center)):
            raise ValueError(f"circle center must be a finite 2-vector, got {self.center}")
        if not self.radius > 0:
            raise ValueError(f"circle radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    @classmethod
    def parse(cls, text):
        """Build from ``"cx,cy,r"``."""
        parts = text.split(",")
        if len(parts) != 3:
            raise ValueError(f"circle spec must be 'cx,cy,r', got {text!r}")
        cx, cy, r = (float(p) for p in parts)
        return cls((cx, cy), r)


def project_circle(p, circle):
    """Nearest point of ``circle`` to ``p`` and a flag set when ``p`` is the center.

    The projection of the center is the whole circle; the point at angle 0 is
    returned in that case.
    """
    p = np.asarray(p, dtype=np.float64)
    c = np.asarray(circle.center)
    d = p - c
    big = np.max(np.abs(d))
    if big == 0:
        return c + np.array([circle.radius, 0.0]), True
    # rescale first so subnormal offsets still give a unit direction
    d = d / big
    return c + circle.radius * d / np.hypot(d[0], d[1]), False


def relax_point(p, proj, a):
    return a * np.asarray(proj, dtype=np.float64) + (1 - a) * np.asarray(p, dtype=np.float64)


def sp_iterate(p0, circles, order="fixed", relaxations=None, iters=100, seed=0, verbose=False):
    """Sequential projections through ``circles``.

    Returns a ``(iters + 1, 2)`` array: ``p0`` followed by the point after
    each sweep. With ``verbose`` every sub-projection is recorded instead,
    giving ``iters * K + 1`` rows.
    """
    if not circles:
        raise ValueError("sp_iterate needs at least one circle")
    if order not in ("fixed", "shuffled"):
        raise ValueError(f"order must be 'fixed' or 'shuffled', got {order!r}")
    if relaxations is None:
        relaxations = [1.0] * len(circles)
    if len(relaxations) != len(circles):
        raise ValueError("need one relaxation per circle")
    rng = np.random.default_rng(seed)
    p = np.asarray(p0, dtype=np.float64)
    out = [p]
    idx = np.arange(len(circles))
    for _ in range(iters):
        if order == "shuffled":
            idx = rng.permutation(len(circles))
        for k in idx:
            proj, _ = project_circle(p, circles[k])
            p = relax_point(p, proj, relaxations[k])
            if verbose:
                out.append(p)
        if not verbose:
            out.append(p)
    return np.array(out)


def _check_product(x, circles):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != 2 or x.shape[0] != len(circles):
        raise ValueError(f"product point shape {x.shape} does not match {len(circles)} circles")
    return x


def product_divide(x, circles):
    """Project each component onto its own circle."""
    x = _check_product(x, circles)
    return np.array([project_circle(xi, c)[0] for xi, c in zip(x, circles)])


def product_concur(x):
    """Replace every component by the mean of all components."""
    x = np.asarray(x, dtype=np.float64)
    return np.broadcast_to(x.mean(axis=0), x.shape).copy()


def abc_step(x, circles, a, b, c):
    """``a * P_C^b(P_D^c(x)) + (1 - a) * x`` with exact divide and concur."""
    x = _check_product(x, circles)
    y = relax_point(x, product_divide(x, circles), c)
    z = relax_point(y, product_concur(y), b)
    return relax_point(x, z, a)


def product_iterate(x0, circles, a, b, c, iters=100):
    """Repeated :func:`abc_step`; returns ``(iters + 1, K, 2)``."""
    x = _check_product(x0, circles)
    out = [x]
    for _ in range(iters):
        x = abc_step(x, circles, a, b, c)
        out.append(x)
    return np.array(out)


def shadow(x, circles):
    """Solution estimate of a product iterate: the concur of its divide projection."""
    return product_concur(product_divide(x, circles))[0]


def step_distances(traj):
    """Euclidean distance between successive rows of a trajectory."""
    traj = np.asarray(traj)
    diff = traj[1:] - traj[:-1]
    return np.sqrt(np.sum(diff.reshape(len(diff), -1) ** 2, axis=1))


def detect_cycle(traj, max_period=8, tol=1e-9, window=20):
    """Smallest period ``p >= 2`` with which the tail of ``traj`` repeats.

    A cycle needs the tail to repeat to ``tol`` while successive points
    still move by more than ``tol``; a settled (fixed) point returns 0, and
    0 is also returned when no period up to ``max_period`` fits.
    """
    traj = np.asarray(traj)
    if len(traj) < window + max_period + 1:
        window = max(1, len(traj) - max_period - 1)
    tail = traj[-window:]
    if np.all(step_distances(traj[-window - 1 :]) <= tol):
        return 0
    for p in range(2, max_period + 1):
        if len(traj) < window + p:
            break
        prev = traj[-window - p : -p]
        if np.max(np.abs(tail - prev)) <= tol:
            return p
    return 0
