"""Charts, scalar and vector fields, Lie brackets and a finite-difference oracle.

Fields are plain Python callables written against the functions in
:mod:`geo3.jets` (``exp``, ``sqrt``, ...).  The same callable is evaluated on
floats by the finite-difference oracle and on Taylor jets by the analytic
engine, so the two derivative paths share nothing but the formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, UsageError
from .jets import Jet, as_jet, einsum, stack

FD_STEP = 2e-5


@dataclass(frozen=True)
class Chart:
    """A coordinate domain.

    ``domain`` says where field formulas may be evaluated (finite-difference
    stencils included); ``constraint`` additionally pins down the manifold
    inside that domain, e.g. the unit sphere inside R^4 minus the origin.
    """

    id: str
    dim: int
    domain: Callable[[np.ndarray], np.ndarray]
    constraint: Optional[Callable[[np.ndarray], np.ndarray]] = None
    description: str = ""

    def points(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.dim:
            raise UsageError(f"chart {self.id!r} expects {self.dim} coordinates, got {pts.shape[-1]}")
        return pts

    def require_domain(self, points) -> np.ndarray:
        pts = self.points(points)
        ok = np.asarray(self.domain(pts), dtype=bool)
        if not np.all(ok):
            bad = pts.reshape(-1, self.dim)[~ok.reshape(-1)][0]
            raise DomainError(f"point {bad.tolist()} is outside the domain of chart {self.id!r}")
        return pts

    def require(self, points) -> np.ndarray:
        pts = self.require_domain(points)
        if self.constraint is not None:
            ok = np.asarray(self.constraint(pts), dtype=bool)
            if not np.all(ok):
                bad = pts.reshape(-1, self.dim)[~ok.reshape(-1)][0]
                raise DomainError(f"point {bad.tolist()} does not lie on chart {self.id!r}")
        return pts


def everywhere(points):
    return np.ones(np.shape(points)[:-1], dtype=bool)


@dataclass(frozen=True)
class ChartPoint:
    coords: tuple
    chart_id: str

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))


def _resolve(chart: Chart, p) -> tuple[np.ndarray, bool]:
    """Accept a ChartPoint, one coordinate tuple or an (N, n) array."""
    if isinstance(p, ChartPoint):
        if p.chart_id != chart.id:
            raise UsageError(f"point belongs to chart {p.chart_id!r}, field to {chart.id!r}")
        p = p.coords
    pts = chart.points(p)
    single = pts.ndim == 1
    return np.atleast_2d(pts), single


class ScalarField:
    """A smooth function on a chart, given by a jet-compatible formula."""

    def __init__(self, fn: Callable, chart: Chart, name: str = ""):
        self.fn = fn
        self.chart = chart
        self.name = name

    def __repr__(self):
        return f"ScalarField({self.name or self.fn!r} on {self.chart.id})"

    def jet(self, points, order: int = 2) -> Jet:
        pts = self.chart.require(points)
        out = self.fn(*Jet.variables(pts, order))
        return as_jet(out, pts.shape[:-1], self.chart.dim, order)

    def values(self, points) -> np.ndarray:
        """Plain float evaluation; only the chart domain is enforced."""
        pts = self.chart.require_domain(points)
        out = self.fn(*(pts[..., k] for k in range(self.chart.dim)))
        return np.broadcast_to(np.asarray(out, dtype=float), pts.shape[:-1]).copy()


def constant(value: float, chart: Chart) -> ScalarField:
    return ScalarField(lambda *x: value, chart, name=repr(value))


class VectorField:
    """Components of a vector field in the coordinate basis of one chart."""

    def __init__(self, components: Sequence[ScalarField], chart: Chart, name: str = ""):
        components = tuple(components)
        if len(components) != chart.dim:
            raise UsageError(f"{chart.id!r} needs {chart.dim} components, got {len(components)}")
        if any(c.chart.id != chart.id for c in components):
            raise UsageError("component fields live on another chart")
        self.components = components
        self.chart = chart
        self.name = name

    @classmethod
    def from_functions(cls, fns: Sequence[Callable], chart: Chart, name: str = "") -> "VectorField":
        comps = [ScalarField(f, chart, name=f"{name}[{k}]") for k, f in enumerate(fns)]
        return cls(comps, chart, name)

    def __repr__(self):
        return f"VectorField({self.name} on {self.chart.id})"

    def jets(self, points, order: int = 2) -> Jet:
        """Jets of all components, batch shape ``(..., n)``."""
        pts = self.chart.require(points)
        return stack([c.jet(pts, order) for c in self.components], axis=-1)

    def values(self, points) -> np.ndarray:
        pts = self.chart.require(points)
        return np.stack([c.values(pts) for c in self.components], axis=-1)


def _same_chart(*objs):
    ids = {o.chart.id for o in objs}
    if len(ids) != 1:
        raise UsageError(f"fields live on different charts: {sorted(ids)}")


def eval_jet(f: ScalarField, p, order: int = 2) -> Jet:
    """Value, gradient and Hessian of ``f`` at ``p`` from the analytic engine."""
    pts, single = _resolve(f.chart, p)
    jet = f.jet(pts, order)
    return jet[0] if single else jet


def bracket_jets(X: Jet, Y: Jet) -> Jet:
    """Lie bracket of component jets (batch ``(..., n)``), one order lower."""
    dX = X.partials()
    dY = Y.partials()
    k = min(dX.order, dY.order)
    X1, Y1 = X.truncate(k), Y.truncate(k)
    return einsum("...j,...kj->...k", X1, dY) - einsum("...j,...kj->...k", Y1, dX)


def lie_bracket(X: VectorField, Y: VectorField, p) -> np.ndarray:
    """Components of ``[X, Y]`` at ``p``: ``X^j d_j Y^k - Y^j d_j X^k``."""
    _same_chart(X, Y)
    pts, single = _resolve(X.chart, p)
    out = bracket_jets(X.jets(pts, 1), Y.jets(pts, 1)).value
    return out[0] if single else out


def directional_derivative(X: VectorField, f: ScalarField, p) -> np.ndarray:
    _same_chart(X, f)
    pts, single = _resolve(X.chart, p)
    out = np.einsum("...a,...a->...", X.values(pts), f.jet(pts, 1).gradient)
    return out[0] if single else out


def fd_steps(points, h: float = FD_STEP) -> np.ndarray:
    return h * (1.0 + np.abs(points))


def fd_oracle(f: ScalarField, p, h: float = FD_STEP) -> Jet:
    """Central-difference value, gradient and Hessian; an independent check only.

    The step in coordinate ``a`` is ``h * (1 + |x_a|)``.  Every point must sit
    at least two steps inside the field's domain along each axis.
    """
    pts, single = _resolve(f.chart, p)
    n = f.chart.dim
    steps = fd_steps(pts, h)
    unit = np.eye(n)
    for a in range(n):
        for s in (-2.0, 2.0):
            probe = pts + s * steps[:, a, None] * unit[a]
            if not np.all(f.chart.domain(probe)):
                raise DomainError(f"finite-difference stencil leaves the domain of {f.chart.id!r}")

    def at(shift):
        return f.values(pts + shift)

    f0 = at(0.0)
    grad = np.empty(pts.shape)
    hess = np.empty(pts.shape + (n,))
    for a in range(n):
        da = steps[:, a, None] * unit[a]
        fp, fm = at(da), at(-da)
        grad[:, a] = (fp - fm) / (2 * steps[:, a])
        hess[:, a, a] = (fp - 2 * f0 + fm) / steps[:, a] ** 2
        for b in range(a + 1, n):
            db = steps[:, b, None] * unit[b]
            mixed = (at(da + db) - at(da - db) - at(db - da) + at(-da - db)) / (
                4 * steps[:, a] * steps[:, b]
            )
            hess[:, a, b] = hess[:, b, a] = mixed
    jet = Jet.from_derivatives(f0, grad, hess)
    return jet[0] if single else jet


def oracle_discrepancy(f: ScalarField, points, h: float = FD_STEP) -> float:
    """Largest mixed relative gap between engine and oracle derivatives.

    Each entry is compared as ``|engine - oracle| / max(1, |engine|)``.
    """
    pts = np.atleast_2d(f.chart.points(points))
    exact = f.jet(pts, 2)
    approx = fd_oracle(f, pts, h)
    worst = 0.0
    for a, b in (
        (exact.value, approx.value),
        (exact.gradient, approx.gradient),
        (exact.hessian, approx.hessian),
    ):
        gap = np.abs(a - b) / np.maximum(1.0, np.abs(a))
        worst = max(worst, float(gap.max(initial=0.0)))
    return worst


@dataclass
class BoxSampler:
    """Seeded uniform sampling in a box, with rejection against extra constraints."""

    low: Sequence[float]
    high: Sequence[float]
    accept: Callable[[np.ndarray], np.ndarray] = everywhere
    max_rounds: int = 200
    _dim: int = field(init=False)

    def __post_init__(self):
        self.low = np.asarray(self.low, float)
        self.high = np.asarray(self.high, float)
        self._dim = len(self.low)

    def __call__(self, rng: np.random.Generator, n: int) -> np.ndarray:
        got = []
        count = 0
        for _ in range(self.max_rounds):
            pts = rng.uniform(self.low, self.high, size=(max(n, 16), self._dim))
            pts = pts[np.asarray(self.accept(pts), dtype=bool)]
            got.append(pts)
            count += len(pts)
            if count >= n:
                return np.concatenate(got)[:n]
        raise DomainError("rejection sampler could not fill the sample; box misses the domain")


def sphere_sampler(dim: int) -> Callable[[np.random.Generator, int], np.ndarray]:
    def sample(rng: np.random.Generator, n: int) -> np.ndarray:
        pts = rng.standard_normal((n, dim))
        return pts / np.linalg.norm(pts, axis=-1, keepdims=True)

    return sample
