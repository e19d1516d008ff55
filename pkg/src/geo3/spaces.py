"""Catalog of total spaces, base surfaces and submersions.

Two model families carry closed-form tables: the BCV spaces ``M_{m,l}``
(coordinates ``x, y, z``) and the Berger spheres ``S^3_eps`` (ambient
coordinates in R^4, restricted to the unit sphere).  Around them sit the
smaller worked examples: warped products, the Nil example and the
cylindrical projections.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .calculus import BoxSampler, Chart, ScalarField, VectorField, everywhere, sphere_sampler
from .errors import FrameError, ParameterError, UsageError
from .geometry import FrameField, FrameGeometry, MetricField, sectional_tensor
from .jets import exp, sqrt
from .submersion import ChartBase, Expectation, SphereBase, SubmersionSpec, rc_lhs

RIGIDITY_GRID = 10_000
RIGIDITY_TOL = 1e-3
CLUSTER_RADIUS = 0.05
ROTATION_TOL = 1e-12


@dataclass(frozen=True)
class BCVParams:
    m: float
    l: float

    def __post_init__(self):
        if not (np.isfinite(self.m) and np.isfinite(self.l)):
            raise ParameterError("BCV parameters must be finite")

    @property
    def R(self) -> float:
        return 4 * self.m - self.l**2


@dataclass(frozen=True)
class BergerParams:
    eps: float

    def __post_init__(self):
        if not np.isfinite(self.eps) or self.eps == 0:
            raise ParameterError("the Berger parameter eps must be finite and nonzero")

    @property
    def R(self) -> float:
        return 4 - 4 * self.eps**2


@dataclass
class SpaceDescriptor:
    """A total space with its preferred orthonormal frame.

    ``tables`` maps ``structure``, ``connection``, ``curvature`` and
    ``ricci`` to closed-form callables of an ``(N, n)`` point array; empty
    for spaces that only serve as examples.  ``rigidity`` is the pair
    ``(R, constant)`` entering the rotated-frame identities.
    """

    id: str
    label: str
    params: dict
    chart: Chart
    metric: MetricField
    frame: FrameField
    tables: dict = field(default_factory=dict)
    rigidity: Optional[tuple] = None
    sampler: Optional[Callable] = None
    description: str = ""

    def sample(self, n: int, seed: int) -> np.ndarray:
        return self.sampler(np.random.default_rng(seed), n)


def _frame(chart: Chart, metric: MetricField, name: str, *columns) -> FrameField:
    fields = [VectorField.from_functions(col, chart, name=f"{name}.e{i+1}") for i, col in enumerate(columns)]
    return FrameField(*fields, metric, name=name)


def _const(v):
    return lambda *x: v


# BCV spaces -------------------------------------------------------------------


def classify_bcv(m: float, l: float, tie: float = 1e-12) -> str:
    """Label (a)-(g) of the BCV classification; ``4m = l^2 > 0`` wins over (e)."""
    m0 = abs(m) <= tie
    l0 = abs(l) <= tie
    if m0 and l0:
        return "(a)"
    if m > tie and not l0 and abs(4 * m - l * l) <= tie:
        return "(b)"
    if m > tie and l0:
        return "(c)"
    if m < -tie and l0:
        return "(d)"
    if m > tie:
        return "(e)"
    if m < -tie:
        return "(f)"
    return "(g)"


BCV_MODELS = {
    "(a)": "R^3",
    "(b)": "S^3(m)",
    "(c)": "S^2(4m) x R",
    "(d)": "H^2(4m) x R",
    "(e)": "SU(2)",
    "(f)": "SL(2,R) universal cover",
    "(g)": "Nil",
}


def bcv_space(m: float, l: float) -> SpaceDescriptor:
    p = BCVParams(float(m), float(l))
    m, l = p.m, p.l

    def F(x, y):
        return 1 + m * (x * x + y * y)

    chart = Chart(
        id=f"bcv[m={m:g},l={l:g}]",
        dim=3,
        domain=lambda pts: F(pts[..., 0], pts[..., 1]) > 0,
        description="R^3 where 1 + m(x^2 + y^2) > 0",
    )

    def g(x, y, z):
        f = F(x, y)
        a = 0.5 * l * y / f  # dz + a dx + b dy
        b = -0.5 * l * x / f
        h = 1 / (f * f)
        return [[h + a * a, a * b, a], [a * b, h + b * b, b], [a, b, 1.0]]

    metric = MetricField(g, chart, name="g_bcv")
    frame = _frame(
        chart,
        metric,
        "bcv.E",
        (lambda x, y, z: F(x, y), _const(0.0), lambda x, y, z: -0.5 * l * y),
        (_const(0.0), lambda x, y, z: F(x, y), lambda x, y, z: 0.5 * l * x),
        (_const(0.0), _const(0.0), _const(1.0)),
    )

    def structure(pts):
        x, y = pts[:, 0], pts[:, 1]
        c = np.zeros((len(pts), 3, 3, 3))
        c[:, 0, 1] = np.stack([-2 * m * y, 2 * m * x, np.full_like(x, l)], -1)
        c[:, 1, 0] = -c[:, 0, 1]
        return c

    def connection(pts):
        x, y = pts[:, 0], pts[:, 1]
        gam = np.zeros((len(pts), 3, 3, 3))
        gam[:, 0, 0, 1] = 2 * m * y
        gam[:, 1, 1, 0] = 2 * m * x
        gam[:, 0, 1, 0] = -2 * m * y
        gam[:, 0, 1, 2] = l / 2
        gam[:, 1, 0, 1] = -2 * m * x
        gam[:, 1, 0, 2] = -l / 2
        gam[:, 2, 0, 1] = gam[:, 0, 2, 1] = -l / 2
        gam[:, 2, 1, 0] = gam[:, 1, 2, 0] = l / 2
        return gam

    def curvature(pts):
        n = len(pts)
        return sectional_tensor(np.full(n, 4 * m - 0.75 * l * l), np.full(n, l * l / 4), np.full(n, l * l / 4))

    def ricci(pts):
        d = np.array([4 * m - l * l / 2, 4 * m - l * l / 2, l * l / 2])
        return np.broadcast_to(np.diag(d), (len(pts), 3, 3)).copy()

    sampler = BoxSampler((-1, -1, -1), (1, 1, 1), accept=lambda pts: F(pts[:, 0], pts[:, 1]) >= 0.1)
    case = classify_bcv(m, l)
    return SpaceDescriptor(
        id="bcv",
        label=f"M_{{m,l}} {case} {BCV_MODELS[case]}",
        params={"m": m, "l": l},
        chart=chart,
        metric=metric,
        frame=frame,
        tables={"structure": structure, "connection": connection, "curvature": curvature, "ricci": ricci},
        rigidity=(p.R, l * l / 4),
        sampler=sampler,
        description="BCV space with its global frame E1 = F d_x - (ly/2) d_z, E2 = F d_y + (lx/2) d_z, E3 = d_z",
    )


def bcv_base(m: float) -> ChartBase:
    chart = Chart(
        id=f"bcv.base[m={m:g}]",
        dim=2,
        domain=lambda pts: 1 + m * (pts[..., 0] ** 2 + pts[..., 1] ** 2) > 0,
    )

    def h(u, v):
        c = 1 / (1 + m * (u * u + v * v)) ** 2
        return [[c, 0.0], [0.0, c]]

    return ChartBase(f"conformal[m={m:g}]", MetricField(h, chart, name="h_conformal"), "conformal plane of curvature 4m")


def bcv_projection(m: float = 0.0, l: float = 0.0, label: str = "", key: str = "") -> SubmersionSpec:
    space = bcv_space(m, l)
    m, l = space.params["m"], space.params["l"]
    chart = space.chart
    return SubmersionSpec(
        map_id="bcv.projection",
        total=space,
        base=bcv_base(m),
        components=(ScalarField(lambda x, y, z: x, chart, "x"), ScalarField(lambda x, y, z: y, chart, "y")),
        vertical_hint=VectorField.from_functions((_const(0.0), _const(0.0), _const(1.0)), chart, "d_z"),
        sampler=space.sampler,
        expected=Expectation(harmonic=True, kn=4 * m, rc0_holds=True, sigma2=l * l / 4),
        closed_form_frame=space.frame,
        label=label or f"BCV projection {classify_bcv(m, l)}",
        key=key or "bcv.projection",
        params={"m": m, "l": l},
        closed_form_data=lambda pts: {
            "f1": -2 * m * pts[:, 1],
            "f2": 2 * m * pts[:, 0],
            "f3": np.zeros(len(pts)),
            "kappa1": np.zeros(len(pts)),
            "kappa2": np.zeros(len(pts)),
            "sigma": np.full(len(pts), -l / 2),
        },
        description="(x, y, z) -> (x, y) onto the conformal plane with metric (dx^2 + dy^2)/F^2",
    )


# Berger spheres and the Hopf map --------------------------------------------


def hopf_fields(x1, x2, x3, x4):
    """The three left-invariant fields X1, X2, X3 parallelising S^3."""
    return (
        (-x2, x1, -x4, x3),
        (-x4, -x3, x2, x1),
        (-x3, x4, x1, -x2),
    )


def _sphere_chart(name: str) -> Chart:
    return Chart(
        id=name,
        dim=4,
        domain=lambda pts: np.linalg.norm(pts, axis=-1) > 0.5,
        constraint=lambda pts: np.abs(np.linalg.norm(pts, axis=-1) - 1) <= 1e-12,
        description="unit sphere S^3 inside R^4",
    )


def berger_space(eps: float) -> SpaceDescriptor:
    p = BergerParams(float(eps))
    e = p.eps
    chart = _sphere_chart(f"berger[eps={e:g}]")

    def g(*x):
        X1 = hopf_fields(*x)[0]
        r2 = sum(c * c for c in x)
        k = (e * e - 1) / r2
        return [[(1.0 if a == b else 0.0) + k * X1[a] * X1[b] for b in range(4)] for a in range(4)]

    metric = MetricField(g, chart, name="g_eps")

    def comp(i, scale=1.0):
        return tuple((lambda *x, a=a: scale * hopf_fields(*x)[i][a]) for a in range(4))

    frame = _frame(chart, metric, "berger.E", comp(1), comp(2), comp(0, 1 / e))

    def structure(pts):
        c = np.zeros((len(pts), 3, 3, 3))
        c[:, 0, 1, 2] = 2 * e
        c[:, 1, 2, 0] = 2 / e
        c[:, 2, 0, 1] = 2 / e
        return c - np.swapaxes(c, 1, 2)

    def connection(pts):
        gam = np.zeros((len(pts), 3, 3, 3))
        gam[:, 0, 1, 2] = e
        gam[:, 0, 2, 1] = -e
        gam[:, 1, 0, 2] = -e
        gam[:, 1, 2, 0] = e
        gam[:, 2, 0, 1] = (2 - e * e) / e
        gam[:, 2, 1, 0] = -(2 - e * e) / e
        return gam

    def curvature(pts):
        n = len(pts)
        return sectional_tensor(np.full(n, 4 - 3 * e * e), np.full(n, e * e), np.full(n, e * e))

    def ricci(pts):
        d = np.array([4 - 2 * e * e, 4 - 2 * e * e, 2 * e * e])
        return np.broadcast_to(np.diag(d), (len(pts), 3, 3)).copy()

    return SpaceDescriptor(
        id="berger",
        label=f"Berger sphere S^3_eps, eps={e:g}",
        params={"eps": e},
        chart=chart,
        metric=metric,
        frame=frame,
        tables={"structure": structure, "connection": connection, "curvature": curvature, "ricci": ricci},
        rigidity=(p.R, e * e),
        sampler=sphere_sampler(4),
        description="S^3 with the Hopf fibre direction scaled by eps; frame E1 = X2, E2 = X3, E3 = X1/eps",
    )


def hopf_components(x1, x2, x3, x4):
    return (
        x1 * x3 + x2 * x4,
        x2 * x3 - x1 * x4,
        0.5 * (x1 * x1 + x2 * x2 - x3 * x3 - x4 * x4),
    )


def hopf_map(eps: float = 1.0, label: str = "", key: str = "") -> SubmersionSpec:
    space = berger_space(eps)
    e = space.params["eps"]
    chart = space.chart
    comps = tuple(
        ScalarField(lambda *x, k=k: hopf_components(*x)[k], chart, name=f"psi[{k}]") for k in range(3)
    )
    return SubmersionSpec(
        map_id="berger.hopf",
        total=space,
        base=SphereBase("S2(4)", 0.5, "round sphere of radius 1/2 in R^3"),
        components=comps,
        vertical_hint=VectorField.from_functions(
            tuple((lambda *x, a=a: hopf_fields(*x)[0][a]) for a in range(4)), chart, "X1"
        ),
        sampler=space.sampler,
        expected=Expectation(harmonic=True, kn=4.0, rc0_holds=True, sigma2=e * e),
        closed_form_frame=space.frame,
        label=label or "Hopf map",
        key=key or "berger.hopf",
        params={"eps": e},
        description="Hopf map from the Berger sphere onto the sphere of radius 1/2",
    )


# smaller worked examples ----------------------------------------------------


def _plane_chart(name: str, domain=everywhere) -> Chart:
    return Chart(id=name, dim=2, domain=domain)


def _example_space(id, label, chart, metric, frame, sampler, description="") -> SpaceDescriptor:
    return SpaceDescriptor(
        id=id, label=label, params={}, chart=chart, metric=metric, frame=frame, sampler=sampler, description=description
    )


def example21(p: Callable = None, name: str = "y") -> SubmersionSpec:
    """Warped product ``e^{2p} dx^2 + dy^2 + dz^2`` projected to ``(x, y)``.

    ``p`` is any jet-compatible function of ``(x, y)``; the default is
    ``p = y``.  Pass ``p=lambda x, y: 0.0 * x`` and ``name="0"`` for the flat case.
    """
    if p is None:
        p = lambda x, y: y  # noqa: E731
        name = "y"
    chart = Chart(id=f"warped[p={name}]", dim=3, domain=everywhere)
    metric = MetricField(
        lambda x, y, z: [[exp(2 * p(x, y)), 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], chart, name="g_warped"
    )
    frame = _frame(
        chart,
        metric,
        "warped.e",
        (lambda x, y, z: exp(-p(x, y)), _const(0.0), _const(0.0)),
        (_const(0.0), _const(1.0), _const(0.0)),
        (_const(0.0), _const(0.0), _const(1.0)),
    )
    sampler = BoxSampler((-1, -1, -1), (1, 1, 1))
    space = _example_space("warped", f"e^(2p) dx^2 + dy^2 + dz^2, p = {name}", chart, metric, frame, sampler)
    base_chart = _plane_chart(f"warped.base[p={name}]")
    base = ChartBase(
        f"warped plane p={name}",
        MetricField(lambda u, v: [[exp(2 * p(u, v)), 0.0], [0.0, 1.0]], base_chart, name="h_warped"),
    )
    return SubmersionSpec(
        map_id="ex21.product",
        total=space,
        base=base,
        components=(ScalarField(lambda x, y, z: x, chart, "x"), ScalarField(lambda x, y, z: y, chart, "y")),
        vertical_hint=frame.e3,
        sampler=sampler,
        expected=Expectation(harmonic=True, rc0_holds=None),
        closed_form_frame=frame,
        label="Ex2.1",
        key="ex21",
        params={"p": name},
        description="product projection (x, y, z) -> (x, y)",
    )


def example22() -> SubmersionSpec:
    """``H^2 x R`` with metric ``e^{2y} dx^2 + dy^2 + dz^2`` projected to ``(y, z)``."""
    chart = Chart(id="h2xr", dim=3, domain=everywhere)
    metric = MetricField(lambda x, y, z: [[exp(2 * y), 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], chart, "g_h2xr")
    frame = _frame(
        chart,
        metric,
        "h2xr.e",
        (_const(0.0), _const(1.0), _const(0.0)),
        (_const(0.0), _const(0.0), _const(1.0)),
        (lambda x, y, z: exp(-y), _const(0.0), _const(0.0)),
    )
    sampler = BoxSampler((-1, -1, -1), (1, 1, 1))
    space = _example_space("h2xr", "H^2 x R", chart, metric, frame, sampler)
    base_chart = _plane_chart("flat.yz")
    base = ChartBase("flat (y,z)", MetricField(lambda u, v: [[1.0, 0.0], [0.0, 1.0]], base_chart, "h_flat"))
    return SubmersionSpec(
        map_id="ex22.h2xr",
        total=space,
        base=base,
        components=(ScalarField(lambda x, y, z: y, chart, "y"), ScalarField(lambda x, y, z: z, chart, "z")),
        vertical_hint=VectorField.from_functions((_const(1.0), _const(0.0), _const(0.0)), chart, "d_x"),
        sampler=sampler,
        expected=Expectation(harmonic=False, kn=0.0),
        closed_form_frame=frame,
        label="Ex2.2",
        key="ex22",
        description="(x, y, z) -> (y, z); fibres have curvature kappa1 = -1",
    )


def nil_example23() -> SubmersionSpec:
    """Nil space ``dx^2 + dy^2 + (dz - x dy)^2`` projected to ``(x, z)``.

    The base carries ``dx^2 + (1 + x^2)^{-1} dz^2``: with the frame below,
    that is the coefficient for which ``dpi(e2) = -sqrt(1 + x^2) d_z`` has
    unit length.
    """
    chart = Chart(id="nil", dim=3, domain=everywhere)
    metric = MetricField(
        lambda x, y, z: [[1.0, 0.0, 0.0], [0.0, 1 + x * x, -x], [0.0, -x, 1.0]], chart, name="g_nil"
    )
    frame = _frame(
        chart,
        metric,
        "nil.e",
        (_const(1.0), _const(0.0), _const(0.0)),
        (_const(0.0), lambda x, y, z: -x / sqrt(1 + x * x), lambda x, y, z: -sqrt(1 + x * x)),
        (_const(0.0), lambda x, y, z: 1 / sqrt(1 + x * x), _const(0.0)),
    )
    sampler = BoxSampler((-1.5, -1, -1), (1.5, 1, 1), accept=lambda pts: np.abs(pts[:, 0]) >= 0.05)
    space = _example_space("nil", "Nil", chart, metric, frame, sampler)
    base_chart = _plane_chart("nil.base")
    base = ChartBase(
        "dx^2 + dz^2/(1+x^2)", MetricField(lambda u, v: [[1.0, 0.0], [0.0, 1 / (1 + u * u)]], base_chart, "h_nil")
    )

    def data(pts):
        x = pts[:, 0]
        q = 1 + x * x
        zero = np.zeros(len(pts))
        return {"f1": zero, "f2": x / q, "f3": zero, "kappa1": -x / q, "kappa2": zero, "sigma": (1 - x * x) / (2 * q)}

    return SubmersionSpec(
        map_id="nil.example23",
        total=space,
        base=base,
        components=(ScalarField(lambda x, y, z: x, chart, "x"), ScalarField(lambda x, y, z: z, chart, "z")),
        vertical_hint=VectorField.from_functions((_const(0.0), _const(1.0), _const(0.0)), chart, "d_y"),
        sampler=sampler,
        expected=Expectation(harmonic=False, rc0_holds=False),
        closed_form_frame=frame,
        label="Ex2.3",
        key="ex23",
        closed_form_data=data,
        description="(x, y, z) -> (x, z); kappa1 = -x/(1+x^2)",
    )


def _cylinder_space():
    chart = Chart(id="cyl", dim=3, domain=lambda pts: pts[..., 0] > 0, description="(rho, z, theta), rho > 0")
    metric = MetricField(lambda r, z, t: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, r * r]], chart, "g_cyl")
    sampler = BoxSampler((0.1, -1, -np.pi), (2, 1, np.pi))
    return chart, metric, sampler


def cyl_remark21a() -> SubmersionSpec:
    """Cylindrical R^3 projected to ``(rho, z)``: RC0 holds yet the map is not harmonic."""
    chart, metric, sampler = _cylinder_space()
    frame = _frame(
        chart,
        metric,
        "cyl.a",
        (_const(1.0), _const(0.0), _const(0.0)),
        (_const(0.0), _const(1.0), _const(0.0)),
        (_const(0.0), _const(0.0), lambda r, z, t: 1 / r),
    )
    space = _example_space("cyl", "R^3 in cylindrical coordinates", chart, metric, frame, sampler)
    base = ChartBase(
        "flat (rho,z)",
        MetricField(lambda u, v: [[1.0, 0.0], [0.0, 1.0]], _plane_chart("cyl.base.a"), "h_flat"),
    )
    return SubmersionSpec(
        map_id="cyl.remark21a",
        total=space,
        base=base,
        components=(ScalarField(lambda r, z, t: r, chart, "rho"), ScalarField(lambda r, z, t: z, chart, "z")),
        vertical_hint=VectorField.from_functions((_const(0.0), _const(0.0), _const(1.0)), chart, "d_theta"),
        sampler=sampler,
        expected=Expectation(harmonic=False, kn=0.0, rc0_holds=True),
        closed_form_frame=frame,
        label="Rmk2.1a",
        key="rmk21a",
        closed_form_data=lambda pts: {
            "f1": np.zeros(len(pts)),
            "f2": np.zeros(len(pts)),
            "f3": np.zeros(len(pts)),
            "kappa1": -1 / pts[:, 0],
            "kappa2": np.zeros(len(pts)),
            "sigma": np.zeros(len(pts)),
        },
        description="(rho, z, theta) -> (rho, z); sigma = 0 and kappa1 = -1/rho",
    )


def cyl_remark21b() -> SubmersionSpec:
    """Cylindrical R^3 projected to ``(rho, theta)`` with the polar metric: harmonic."""
    chart, metric, sampler = _cylinder_space()
    frame = _frame(
        chart,
        metric,
        "cyl.b",
        (_const(1.0), _const(0.0), _const(0.0)),
        (_const(0.0), _const(0.0), lambda r, z, t: 1 / r),
        (_const(0.0), _const(1.0), _const(0.0)),
    )
    space = _example_space("cyl", "R^3 in cylindrical coordinates", chart, metric, frame, sampler)
    base_chart = _plane_chart("cyl.base.b", domain=lambda pts: pts[..., 0] > 0)
    base = ChartBase("polar plane", MetricField(lambda u, v: [[1.0, 0.0], [0.0, u * u]], base_chart, "h_polar"))
    return SubmersionSpec(
        map_id="cyl.remark21b",
        total=space,
        base=base,
        components=(ScalarField(lambda r, z, t: r, chart, "rho"), ScalarField(lambda r, z, t: t, chart, "theta")),
        vertical_hint=VectorField.from_functions((_const(0.0), _const(1.0), _const(0.0)), chart, "d_z"),
        sampler=sampler,
        expected=Expectation(harmonic=True, kn=0.0, rc0_holds=True),
        closed_form_frame=frame,
        label="Rmk2.1b",
        key="rmk21b",
        description="(rho, z, theta) -> (rho, theta) onto the polar plane",
    )


def scaled_plane_map() -> SubmersionSpec:
    """Flat ``(x, y, z) -> (x, 2y)``: not a Riemannian submersion (negative control)."""
    chart = Chart(id="flat3", dim=3, domain=everywhere)
    metric = MetricField(lambda x, y, z: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], chart, "g_flat")
    frame = _frame(
        chart,
        metric,
        "flat.e",
        (_const(1.0), _const(0.0), _const(0.0)),
        (_const(0.0), _const(1.0), _const(0.0)),
        (_const(0.0), _const(0.0), _const(1.0)),
    )
    sampler = BoxSampler((-1, -1, -1), (1, 1, 1))
    space = _example_space("flat3", "Euclidean R^3", chart, metric, frame, sampler)
    base = ChartBase("flat plane", MetricField(lambda u, v: [[1.0, 0.0], [0.0, 1.0]], _plane_chart("flat2"), "h_flat"))
    return SubmersionSpec(
        map_id="flat.scaled",
        total=space,
        base=base,
        components=(ScalarField(lambda x, y, z: x, chart, "x"), ScalarField(lambda x, y, z: 2 * y, chart, "2y")),
        vertical_hint=frame.e3,
        sampler=sampler,
        expected=Expectation(harmonic=True, kn=0.0, submersion=False),
        closed_form_frame=frame,
        label="scaled plane",
        key="flat.scaled",
        description="(x, y, z) -> (x, 2y), stretches the second direction by 2",
    )


# catalog --------------------------------------------------------------------

BCV_CASE_PARAMS = (
    ("i", 0.0, 0.0),
    ("ii", 0.25, 1.0),
    ("iii", 1.0, 0.0),
    ("iv", -1.0, 0.0),
    ("v", 1.0, 1.0),
    ("vi", -1.0, 1.0),
    ("vii", 0.0, 1.0),
)


def catalog() -> list:
    """Every shipped submersion, in a fixed order."""
    out = [example21(), example22(), nil_example23(), cyl_remark21a(), cyl_remark21b()]
    for roman, m, l in BCV_CASE_PARAMS:
        out.append(bcv_projection(m, l, label=f"Cor3.1({roman})", key=f"cor31.{roman}"))
    out.append(hopf_map(1.0, label="Hopf", key="hopf"))
    return out


def _bcv_factory(m=None, l=None, eps=None):
    if eps is not None:
        raise UsageError("bcv.projection takes --m and --l, not --eps")
    return bcv_projection(0.0 if m is None else m, 0.0 if l is None else l)


def _hopf_factory(m=None, l=None, eps=None):
    if m is not None or l is not None:
        raise UsageError("berger.hopf takes --eps, not --m/--l")
    return hopf_map(1.0 if eps is None else eps)


def _fixed(builder):
    def factory(m=None, l=None, eps=None):
        if m is not None or l is not None or eps is not None:
            raise UsageError("this map has no parameters")
        return builder()

    return factory


MAPS = {
    "bcv.projection": _bcv_factory,
    "berger.hopf": _hopf_factory,
    "ex21.product": _fixed(example21),
    "ex21.flat": _fixed(lambda: example21(lambda x, y: 0.0 * x, "0")),
    "ex22.h2xr": _fixed(example22),
    "nil.example23": _fixed(nil_example23),
    "cyl.remark21a": _fixed(cyl_remark21a),
    "cyl.remark21b": _fixed(cyl_remark21b),
    "flat.scaled": _fixed(scaled_plane_map),
}

SPACES = {
    "bcv": lambda m=None, l=None, eps=None: bcv_space(0.0 if m is None else m, 0.0 if l is None else l),
    "berger": lambda m=None, l=None, eps=None: berger_space(1.0 if eps is None else eps),
}

MAP_PARAMS = {"bcv.projection": ("m", "l"), "berger.hopf": ("eps",)}
SPACE_PARAMS = {"bcv": ("m", "l"), "berger": ("eps",)}


def get_map(map_id: str, **params) -> SubmersionSpec:
    try:
        factory = MAPS[map_id]
    except KeyError:
        raise UsageError(f"unknown map id {map_id!r}; known: {', '.join(sorted(MAPS))}") from None
    return factory(**params)


def get_space(space_id: str, **params) -> SpaceDescriptor:
    try:
        factory = SPACES[space_id]
    except KeyError:
        raise UsageError(f"unknown space id {space_id!r}; known: {', '.join(sorted(SPACES))}") from None
    return factory(**params)


# rotated frames and rigidity -----------------------------------------------


def rotation_about(axis: int, angle: float) -> np.ndarray:
    """Rotation by ``angle`` in the plane of the two frame vectors other than ``axis``."""
    i, j = [k for k in range(3) if k != axis]
    a = np.eye(3)
    c, s = np.cos(angle), np.sin(angle)
    a[i, i], a[i, j], a[j, i], a[j, j] = c, s, -s, c
    return a


def rotated_closed_form(a: np.ndarray, R: float, const: float) -> np.ndarray:
    """The seven rotated-frame components, in the order of ``RC_LABELS``."""
    a1, a2, a3 = a[0, 2], a[1, 2], a[2, 2]
    return np.array(
        [
            -a2 * a3 * R,
            a2 * a2 * R + const,
            -a1 * a2 * R,
            a3 * a3 * R + const,
            a1 * a3 * R,
            -a1 * a2 * R,
            a1 * a1 * R + const,
        ]
    )


@dataclass
class RotatedFrameReport:
    space_id: str
    rotation: np.ndarray
    engine: np.ndarray  # (N, 7)
    closed_form: np.ndarray  # (7,)
    tensor_defect: float

    @property
    def max_dev(self) -> float:
        return float(np.abs(self.engine - self.closed_form).max())


def rotated_frame_check(space: SpaceDescriptor, rotation, points) -> RotatedFrameReport:
    """Curvature in ``e_i = sum_j a_i^j E_j`` from the engine against the closed forms.

    Besides the seven listed components, the whole engine tensor in the rotated
    frame is compared with the tabulated tensor transformed by ``a``.
    """
    if space.rigidity is None or "curvature" not in space.tables:
        raise UsageError(f"space {space.id!r} has no rotated-frame closed forms")
    a = np.asarray(rotation, dtype=float)
    if a.shape != (3, 3) or not np.allclose(a @ a.T, np.eye(3), atol=ROTATION_TOL, rtol=0):
        raise FrameError("rotation matrix is not orthogonal within 1e-12")
    pts = np.atleast_2d(points)
    fg = FrameGeometry(space.frame.rotated(a), pts)
    R, const = space.rigidity
    transformed = np.einsum("ia,jb,kc,ld,nabcd->nijkl", a, a, a, a, space.tables["curvature"](pts))
    return RotatedFrameReport(
        space_id=space.id,
        rotation=a,
        engine=rc_lhs(fg.curvature),
        closed_form=rotated_closed_form(a, R, const),
        tensor_defect=float(np.abs(fg.curvature.R - transformed).max()),
    )


def fibonacci_sphere(n: int = RIGIDITY_GRID) -> np.ndarray:
    """``n`` nearly uniform unit vectors on a golden-angle spiral."""
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    r = np.sqrt(1 - z * z)
    phi = np.pi * (3 - np.sqrt(5)) * k
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


@dataclass
class RigidityResult:
    R: float
    constant: float
    rigid: bool
    clusters: np.ndarray  # (k, 3) unit cluster centres
    n_candidates: int

    @property
    def polar_only(self) -> bool:
        """Exactly two clusters, at ``(0, 0, 1)`` and ``(0, 0, -1)``."""
        if not self.rigid or len(self.clusters) != 2:
            return False
        z = np.sort(self.clusters[:, 2])
        return bool(np.allclose(z, [-1.0, 1.0], atol=CLUSTER_RADIUS))


def _cluster(points: np.ndarray, radius: float) -> np.ndarray:
    """Single-linkage clusters: points closer than ``radius`` share a cluster."""
    n = len(points)
    label = np.full(n, -1)
    close = np.linalg.norm(points[:, None] - points[None], axis=-1) <= radius
    for start in range(n):
        if label[start] >= 0:
            continue
        label[start] = start
        stack = [start]
        while stack:
            k = stack.pop()
            for j in np.flatnonzero(close[k] & (label < 0)):
                label[j] = start
                stack.append(j)
    centres = [points[label == k].mean(axis=0) for k in np.unique(label)]
    return np.array([c / np.linalg.norm(c) for c in centres]).reshape(-1, 3)


def vertical_direction_solver(
    R: float,
    constant_term: float,
    n: int = RIGIDITY_GRID,
    tol: float = RIGIDITY_TOL,
    radius: float = CLUSTER_RADIUS,
) -> RigidityResult:
    """Brute-force the directions ``(a_1^3, a_2^3, a_3^3)`` a harmonic vertical field may take.

    With ``R != 0`` the harmonic system forces ``(a_1^3)^2 = (a_2^3)^2`` and
    ``a_1^3 a_2^3 = 0`` (both equations carry a factor ``R``, divided out
    here), and ``sigma^2 = (a_1^3)^2 R + constant`` must be non-negative
    (tested after the same division by ``|R|``).
    With ``R = 0`` every direction survives and no rigidity follows.
    """
    grid = fibonacci_sphere(n)
    if R == 0:
        return RigidityResult(float(R), float(constant_term), False, np.empty((0, 3)), n)
    a1, a2 = grid[:, 0], grid[:, 1]
    sigma2 = (a1 * a1 * R + constant_term) / abs(R)
    keep = (np.abs(a1 * a1 - a2 * a2) <= tol) & (np.abs(a1 * a2) <= tol) & (sigma2 >= -tol)
    hits = grid[keep]
    return RigidityResult(float(R), float(constant_term), True, _cluster(hits, radius), int(keep.sum()))
