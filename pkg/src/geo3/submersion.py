"""Riemannian submersions from 3-manifolds onto surfaces.

For a natural orthonormal frame (``e_1, e_2`` horizontal, ``e_3`` vertical)
the brackets decompose as::

    [e_1, e_3] =  f3 e_2 + kappa1 e_3
    [e_2, e_3] = -f3 e_1 + kappa2 e_3
    [e_1, e_2] =  f1 e_1 + f2 e_2 - 2 sigma e_3

and everything else in this module (tension, base curvature, the curvature
identities) is written in terms of these six functions and their frame
derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .calculus import Chart, ScalarField, VectorField
from .errors import FrameNotNaturalError, InconclusiveError, StructuralError, UsageError
from .geometry import DerivedFrame, FrameField, FrameGeometry, MetricField
from .jets import Jet, einsum, sqrt, stack

NATURAL_TOL = 1e-8
SUBMERSION_TOL = 1e-9
HARMONIC_TOL = 1e-8
OBSTRUCTION_LEVEL = 1e-4
RANK_TOL = 1e-10

DATA_NAMES = ("f1", "f2", "f3", "kappa1", "kappa2", "sigma")

RC_LABELS = (
    "R(e1,e3,e1,e2)",
    "R(e1,e3,e1,e3)",
    "R(e1,e3,e2,e3)",
    "R(e1,e2,e1,e2)",
    "R(e1,e2,e2,e3)",
    "R(e2,e3,e1,e3)",
    "R(e2,e3,e2,e3)",
)
RC0_LABELS = RC_LABELS + ("e3(sigma)",)


# base surfaces --------------------------------------------------------------


class ChartBase:
    """A surface given by a 2-dimensional chart and a metric on it."""

    kind = "chart"
    target_dim = 2

    def __init__(self, id: str, metric: MetricField, description: str = ""):
        if metric.chart.dim != 2:
            raise UsageError("a chart base needs a 2-dimensional chart")
        self.id = id
        self.metric = metric
        self.chart = metric.chart
        self.description = description

    def gram(self, u) -> np.ndarray:
        return self.metric.matrix(u)

    def christoffel(self, u) -> np.ndarray:
        """``gamma[n, a, b, c]`` = coordinate Christoffel symbol Gamma^a_bc at ``u``."""
        return _christoffel(self.metric.jets(u, 1)).value

    def acceleration(self, u, velocity, second) -> np.ndarray:
        """Covariant second derivative along the map: ``second + sum_i Gamma(v_i, v_i)``."""
        gam = self.christoffel(u)
        return second + np.einsum("nabc,nib,nic->na", gam, velocity, velocity)

    def gauss_curvature(self, u) -> np.ndarray:
        return _gauss_curvature(self.metric.jets(u, 2))


class SphereBase:
    """Round 2-sphere of a given radius, embedded in R^3 with the induced metric."""

    kind = "sphere"
    target_dim = 3

    def __init__(self, id: str, radius: float, description: str = ""):
        self.id = id
        self.radius = float(radius)
        self.description = description

    def gram(self, u) -> np.ndarray:
        u = np.atleast_2d(u)
        return np.broadcast_to(np.eye(3), u.shape[:-1] + (3, 3))

    def acceleration(self, u, velocity, second) -> np.ndarray:
        n = u / np.linalg.norm(u, axis=-1, keepdims=True)
        return second - np.einsum("na,na->n", second, n)[:, None] * n

    def gauss_curvature(self, u) -> np.ndarray:
        return np.full(np.atleast_2d(u).shape[0], 1.0 / self.radius**2)


def _inverse2(h: Jet) -> Jet:
    det = h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0]
    rows = [[h[:, 1, 1] / det, -h[:, 0, 1] / det], [-h[:, 1, 0] / det, h[:, 0, 0] / det]]
    return stack([stack(r, axis=-1) for r in rows], axis=-2)


def _christoffel(h: Jet) -> Jet:
    dh = h.partials()  # dh[n, x, y, v] = d_v h_xy
    hinv = _inverse2(h.truncate(dh.order))
    lower = dh.transpose(0, 1, 3, 2) + dh - dh.transpose(0, 3, 1, 2)
    # lower[n, d, b, c] = d_b h_dc + d_c h_db - d_d h_bc
    return 0.5 * einsum("nad,ndbc->nabc", hinv, lower)


def _gauss_curvature(h: Jet) -> np.ndarray:
    """Gauss curvature of a 2-metric from order-2 jets, via coordinate curvature."""
    gam = _christoffel(h)  # order 1
    g0 = gam.value
    dg = gam.partials().value  # dg[n, a, b, c, v] = d_v Gamma^a_bc
    r = (
        dg[:, :, 1, 1, 0]
        - dg[:, :, 0, 1, 1]
        + np.einsum("nae,ne->na", g0[:, :, 0, :], g0[:, :, 1, 1])
        - np.einsum("nae,ne->na", g0[:, :, 1, :], g0[:, :, 0, 1])
    )  # R^a_{212}, 0-based: R(d_0, d_1) d_1
    hv = h.value
    return np.einsum("na,na->n", hv[:, 0, :], r) / np.linalg.det(hv)


# maps between the total space and the base ----------------------------


@dataclass
class Expectation:
    """What the literature says about a catalog map."""

    harmonic: Optional[bool]
    kn: Optional[float] = None
    rc0_holds: Optional[bool] = None
    submersion: bool = True
    sigma2: Optional[float] = None
    note: str = ""


@dataclass
class SubmersionSpec:
    map_id: str
    total: object  # spaces.SpaceDescriptor
    base: object  # ChartBase | SphereBase
    components: tuple
    vertical_hint: VectorField
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    expected: Expectation
    closed_form_frame: Optional[FrameField] = None
    label: str = ""
    key: str = ""
    params: dict = field(default_factory=dict)
    closed_form_data: Optional[Callable[[np.ndarray], dict]] = None
    description: str = ""

    def __post_init__(self):
        self.components = tuple(self.components)
        if len(self.components) != self.base.target_dim:
            raise UsageError(
                f"{self.map_id}: base {self.base.id!r} needs {self.base.target_dim} map components"
            )

    @property
    def chart(self) -> Chart:
        return self.total.chart

    @property
    def metric(self) -> MetricField:
        return self.total.metric

    def sample(self, n: int, seed: int) -> np.ndarray:
        if n < 1:
            raise UsageError("point count must be at least 1")
        return self.sampler(np.random.default_rng(seed), n)

    def map_jets(self, points, order: int = 2) -> Jet:
        pts = np.atleast_2d(self.chart.require(points))
        return stack([c.jet(pts, order) for c in self.components], axis=-1)

    def map_values(self, points) -> np.ndarray:
        pts = np.atleast_2d(self.chart.require(points))
        return np.stack([c.values(pts) for c in self.components], axis=-1)

    def base_gram(self, points) -> np.ndarray:
        return self.base.gram(self.map_values(points))

    def jacobian_rank_margin(self, points) -> np.ndarray:
        """Second singular value of the differential restricted to the tangent space."""
        pts = np.atleast_2d(points)
        J = self.map_jets(pts, 1).gradient  # (N, k, n)
        if self.chart.constraint is not None:
            proj = np.eye(pts.shape[-1]) - np.einsum("na,nb->nab", pts, pts) / np.einsum(
                "na,na->n", pts, pts
            )[:, None, None]
            J = J @ proj
        return np.linalg.svd(J, compute_uv=False)[:, 1]

    def oracle_fields(self) -> list:
        """Every closed-form scalar field of the spec, tagged with where it lives."""
        out = [(f"map[{k}]", c, "total") for k, c in enumerate(self.components)]
        n = self.chart.dim
        out += [(self.metric.entry(i, j).name, self.metric.entry(i, j), "total") for i in range(n) for j in range(i, n)]
        frame = self.closed_form_frame
        if frame is not None and not isinstance(frame, DerivedFrame):
            for i, vf in enumerate(frame.fields):
                out += [(f"e{i+1}[{k}]", c, "total") for k, c in enumerate(vf.components)]
        if isinstance(self.base, ChartBase):
            m = self.base.metric
            out += [(m.entry(i, j).name, m.entry(i, j), "base") for i in range(2) for j in range(i, 2)]
        return out


class GramSchmidtFrame(DerivedFrame):
    """Natural frame built from the map alone.

    ``e_3`` spans the kernel of the differential, oriented along the map's
    vertical hint; ``e_1`` and ``e_2`` come from horizontal lifts of the base
    coordinate directions, orthonormalised in that order.  Frame jets of order
    ``k`` need map jets of order ``k + 1``.
    """

    def __init__(self, spec: SubmersionSpec):
        if spec.chart.dim != 3 or not isinstance(spec.base, ChartBase):
            raise UsageError(
                f"{spec.map_id}: Gram-Schmidt frames need a 3-dimensional chart and a chart base; "
                "supply a closed-form frame"
            )
        super().__init__(spec.metric, name=f"{spec.map_id}.gram_schmidt")
        self.spec = spec

    def jets(self, points, order: int = 2) -> Jet:
        pts = np.atleast_2d(self.chart.require(points))
        D = self.spec.map_jets(pts, order + 1).partials()  # (N, 2, 3)
        G = self.metric.jets(pts, order)

        def inner(a, b):
            return _dot(a, einsum("nab,nb->na", G, b))

        d1, d2 = D[:, 0], D[:, 1]
        v = stack(
            [
                d1[:, 1] * d2[:, 2] - d1[:, 2] * d2[:, 1],
                d1[:, 2] * d2[:, 0] - d1[:, 0] * d2[:, 2],
                d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0],
            ],
            axis=-1,
        )
        hint = self.spec.vertical_hint.values(pts)
        sign = np.sign(np.einsum("na,nab,nb->n", v.value, G.value, hint))
        if np.any(sign == 0):
            raise StructuralError("kernel direction is g-orthogonal to the vertical hint")
        e3 = v * (sign / sqrt(inner(v, v)))[:, None]

        M = einsum("nak,nbk->nab", D, D)
        Minv = _inverse2(M)
        lifts = einsum("nbk,nba->nak", D, Minv)  # Euclidean right inverse of the differential
        X = [lifts[:, a] - e3 * inner(lifts[:, a], e3)[:, None] for a in range(2)]
        e1 = X[0] / sqrt(inner(X[0], X[0]))[:, None]
        w = X[1] - e1 * inner(X[1], e1)[:, None]
        e2 = w / sqrt(inner(w, w))[:, None]
        return stack([e1, e2, e3], axis=-2)


def _dot(a: Jet, b: Jet) -> Jet:
    return einsum("na,na->n", a, b)


def natural_frame(spec: SubmersionSpec, p=None) -> FrameField:
    """The closed-form frame when the map has one, else the Gram-Schmidt frame.

    When ``p`` is given the frame is checked there: rank 2 and orthonormality.
    """
    frame = spec.closed_form_frame or GramSchmidtFrame(spec)
    if p is not None:
        pts = np.atleast_2d(spec.chart.require(p))
        margin = spec.jacobian_rank_margin(pts)
        if np.any(margin <= RANK_TOL):
            k = int(np.argmin(margin))
            raise StructuralError(f"{spec.map_id}: differential drops rank at {pts[k].tolist()}")
        FrameGeometry(frame, pts)
    return frame


# integrability data ---------------------------------------------------------


@dataclass
class IntegrabilityData:
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    sigma: np.ndarray
    residual: np.ndarray
    # derivs[name][n, i] = e_{i+1}(name) at point n
    derivs: dict = field(default_factory=dict)

    def e(self, i: int, name: str) -> np.ndarray:
        """Frame derivative ``e_i(name)`` with 1-based ``i``."""
        return self.derivs[name][:, i - 1]

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in DATA_NAMES}


def _data_from_geometry(fg: FrameGeometry) -> IntegrabilityData:
    cj = fg.structure.jet
    jets = {
        "f1": cj[:, 0, 1, 0],
        "f2": cj[:, 0, 1, 1],
        "f3": 0.5 * (cj[:, 0, 2, 1] - cj[:, 1, 2, 0]),
        "kappa1": cj[:, 0, 2, 2],
        "kappa2": cj[:, 1, 2, 2],
        "sigma": -0.5 * cj[:, 0, 1, 2],
    }
    c = fg.structure.c
    shape_defect = np.sqrt(c[:, 0, 2, 0] ** 2 + c[:, 1, 2, 1] ** 2 + (c[:, 0, 2, 1] + c[:, 1, 2, 0]) ** 2)
    residual = np.hypot(shape_defect, fg.structure.residual)
    return IntegrabilityData(
        **{k: j.value for k, j in jets.items()},
        residual=residual,
        derivs={k: fg.frame_derivative(j) for k, j in jets.items()},
    )


def integrability_data(frame: FrameField, p, tol: float = NATURAL_TOL) -> IntegrabilityData:
    pts = np.atleast_2d(p)
    data = _data_from_geometry(FrameGeometry(frame, pts))
    if np.any(data.residual > tol):
        k = int(np.argmax(data.residual))
        raise FrameNotNaturalError(
            f"brackets do not decompose in natural-frame shape at {pts[k].tolist()} "
            f"(residual {data.residual[k]:.3e})"
        )
    return data


def rc_lhs(R) -> np.ndarray:
    """The seven curvature components, in the order of ``RC_LABELS``."""
    idx = [(1, 3, 1, 2), (1, 3, 1, 3), (1, 3, 2, 3), (1, 2, 1, 2), (1, 2, 2, 3), (2, 3, 1, 3), (2, 3, 2, 3)]
    return np.stack([R.component(*i) for i in idx], axis=-1)


def gauss_from_data(d: IntegrabilityData) -> np.ndarray:
    return d.e(1, "f2") - d.e(2, "f1") - d.f1**2 - d.f2**2 + 2 * d.f3 * d.sigma


def rc_rhs(d: IntegrabilityData) -> np.ndarray:
    """Right-hand sides of the curvature identities from integrability data."""
    s, k1, k2, f1, f2, f3 = d.sigma, d.kappa1, d.kappa2, d.f1, d.f2, d.f3
    return np.stack(
        [
            -d.e(1, "sigma") + 2 * k1 * s,
            d.e(1, "kappa1") + s**2 - k1**2 + k2 * f1,
            d.e(1, "kappa2") - d.e(3, "sigma") - k1 * f1 - k1 * k2,
            d.e(1, "f2") - d.e(2, "f1") - f1**2 - f2**2 + 2 * f3 * s - 3 * s**2,
            -d.e(2, "sigma") + 2 * k2 * s,
            d.e(2, "kappa1") + d.e(3, "sigma") + k2 * f2 - k1 * k2,
            s**2 + d.e(2, "kappa2") - k1 * f2 - k2**2,
        ],
        axis=-1,
    )


def rc0_residuals(lhs: np.ndarray, d: IntegrabilityData, kn: np.ndarray) -> np.ndarray:
    """Residuals of the harmonic system; the last column is ``|e3(sigma)|``."""
    s2 = d.sigma**2
    e3s = d.e(3, "sigma")
    return np.stack(
        [
            np.abs(lhs[:, 0] + d.e(1, "sigma")),
            np.abs(lhs[:, 1] - s2),
            np.maximum(np.abs(lhs[:, 2] + e3s), np.abs(lhs[:, 2])),
            np.abs(lhs[:, 3] - (kn - 3 * s2)),
            np.abs(lhs[:, 4] + d.e(2, "sigma")),
            np.maximum(np.abs(lhs[:, 5] - e3s), np.abs(lhs[:, 5])),
            np.abs(lhs[:, 6] - s2),
            np.abs(e3s),
        ],
        axis=-1,
    )


# the full pointwise analysis ------------------------------------------------


class Analysis:
    """Frame geometry, integrability data and map derivatives at a sample."""

    def __init__(self, spec: SubmersionSpec, points, frame: Optional[FrameField] = None):
        pts = np.atleast_2d(spec.chart.require(points))
        self.spec = spec
        self.points = pts
        self.frame = frame or natural_frame(spec)
        self.geom = FrameGeometry(self.frame, pts)
        self.data = _data_from_geometry(self.geom)
        P = spec.map_jets(pts, 2)
        self.u = P.value
        dP = P.partials()  # (N, k, n), order 1
        E1 = self.frame.jets(pts, 1)
        # Y[n, i, k] = e_i(pi^k), order-1 jets
        self._Y = einsum("nia,nka->nik", E1, dP)
        self.dpi = self._Y.value
        self.h = spec.base.gram(self.u)

    def pushforward_gram(self) -> np.ndarray:
        return np.einsum("nia,nab,njb->nij", self.dpi, self.h, self.dpi)

    def tension(self) -> np.ndarray:
        k1, k2 = self.data.kappa1, self.data.kappa2
        return -(k1[:, None] * self.dpi[:, 0] + k2[:, None] * self.dpi[:, 1])

    def tension_direct(self) -> np.ndarray:
        """Trace of the second fundamental form of the map, frame by frame."""
        eY = self.geom.frame_derivative(self._Y)  # eY[n, i, k, j] = e_j(e_i(pi^k))
        second = sum(eY[:, i, :, i] for i in range(3))
        gam = self.geom.connection.gamma
        second = second - np.einsum("nim,nmk->nk", np.einsum("niim->nim", gam), self.dpi)
        return self.spec.base.acceleration(self.u, self.dpi, second)

    def norm_h(self, vec) -> np.ndarray:
        return np.sqrt(np.einsum("na,nab,nb->n", vec, self.h, vec).clip(min=0))


# public operations ----------------------------------------------------------


@dataclass
class SubmersionCheck:
    max_vertical: float
    max_norm_defect: float
    max_orthogonality: float
    min_rank_margin: float
    tol: float
    worst_point: list

    @property
    def passed(self) -> bool:
        return max(self.max_vertical, self.max_norm_defect, self.max_orthogonality) <= self.tol

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_vertical": self.max_vertical,
            "max_norm_defect": self.max_norm_defect,
            "max_orthogonality": self.max_orthogonality,
            "min_rank_margin": self.min_rank_margin,
        }


def validate_submersion(spec: SubmersionSpec, points, tol: float = SUBMERSION_TOL) -> SubmersionCheck:
    """Check that the differential kills e3 and maps e1, e2 to an orthonormal pair."""
    pts = np.atleast_2d(spec.chart.require(points))
    margin = spec.jacobian_rank_margin(pts)
    if np.any(margin <= RANK_TOL):
        k = int(np.argmin(margin))
        raise StructuralError(f"{spec.map_id}: differential drops rank at {pts[k].tolist()}")
    an = Analysis(spec, pts)
    gram = an.pushforward_gram()
    vertical = np.sqrt(np.abs(gram[:, 2, 2]))
    norms = np.maximum(np.abs(np.sqrt(gram[:, 0, 0]) - 1), np.abs(np.sqrt(gram[:, 1, 1]) - 1))
    orth = np.abs(gram[:, 0, 1])
    worst = np.maximum(np.maximum(vertical, norms), orth)
    return SubmersionCheck(
        max_vertical=float(vertical.max()),
        max_norm_defect=float(norms.max()),
        max_orthogonality=float(orth.max()),
        min_rank_margin=float(margin.min()),
        tol=tol,
        worst_point=pts[int(np.argmax(worst))].tolist(),
    )


@dataclass
class TensionField:
    components: np.ndarray
    norm: np.ndarray


def tension_field(spec: SubmersionSpec, p) -> TensionField:
    """Tension as ``-dpi(kappa1 e1 + kappa2 e2)``, in base (or ambient base) coordinates."""
    an = Analysis(spec, p)
    t = an.tension()
    return TensionField(t, an.norm_h(t))


def tension_field_direct(spec: SubmersionSpec, p) -> TensionField:
    """Tension from second derivatives of the map and both connections."""
    an = Analysis(spec, p)
    t = an.tension_direct()
    return TensionField(t, an.norm_h(t))


def harmonic_verdict(kappa_max: float, tol: float = HARMONIC_TOL, obstruction: float = OBSTRUCTION_LEVEL) -> str:
    if kappa_max <= tol:
        return "harmonic"
    if kappa_max >= obstruction:
        return "non-harmonic"
    return "inconclusive"


def is_harmonic(spec: SubmersionSpec, points, tol: float = HARMONIC_TOL) -> bool:
    an = Analysis(spec, points)
    kmax = float(np.maximum(np.abs(an.data.kappa1), np.abs(an.data.kappa2)).max())
    verdict = harmonic_verdict(kmax, tol)
    if verdict == "inconclusive":
        raise InconclusiveError(f"{spec.map_id}: max |kappa| = {kmax:.3e} lies between {tol:g} and {OBSTRUCTION_LEVEL:g}")
    return verdict == "harmonic"


def energy_density(spec: SubmersionSpec, p) -> np.ndarray:
    """Half the squared norm of the differential."""
    pts = np.atleast_2d(p)
    an = Analysis(spec, pts)
    out = 0.5 * np.trace(an.pushforward_gram(), axis1=1, axis2=2)
    return out[0] if np.ndim(p) == 1 else out


def base_gauss_curvature(spec: SubmersionSpec, p) -> np.ndarray:
    """Gauss curvature of the base from integrability data.

    The ``2 f3 sigma`` term vanishes for adapted frames and is kept otherwise.
    """
    pts = np.atleast_2d(p)
    out = gauss_from_data(Analysis(spec, pts).data)
    return out[0] if np.ndim(p) == 1 else out


def base_gauss_curvature_direct(spec: SubmersionSpec, p) -> np.ndarray:
    """Gauss curvature of the base metric itself, evaluated at the image points."""
    pts = np.atleast_2d(p)
    out = spec.base.gauss_curvature(spec.map_values(pts))
    return out[0] if np.ndim(p) == 1 else out


@dataclass
class IdentityReport:
    map_id: str
    points: np.ndarray
    data: IntegrabilityData
    rc_lhs: np.ndarray
    rc_rhs: np.ndarray
    rc0: np.ndarray
    kn: np.ndarray
    tension_norm: np.ndarray
    tension_direct_norm: np.ndarray
    tol_harmonic: float = HARMONIC_TOL

    @property
    def rc(self) -> np.ndarray:
        return np.abs(self.rc_lhs - self.rc_rhs)

    @property
    def rc_max(self) -> float:
        return float(self.rc.max())

    @property
    def rc0_max(self) -> float:
        return float(self.rc0.max())

    @property
    def kappa(self) -> np.ndarray:
        return np.maximum(np.abs(self.data.kappa1), np.abs(self.data.kappa2))

    @property
    def kappa_max(self) -> float:
        return float(self.kappa.max())

    @property
    def verdict(self) -> str:
        return harmonic_verdict(self.kappa_max, self.tol_harmonic)

    @property
    def kn_mean(self) -> float:
        return float(self.kn.mean())

    @property
    def kn_spread(self) -> float:
        return float(self.kn.max() - self.kn.min())

    @property
    def sigma_min(self) -> float:
        return float(np.abs(self.data.sigma).min())


def identity_report(
    spec: SubmersionSpec, points, frame: Optional[FrameField] = None, tol_harmonic: float = HARMONIC_TOL
) -> IdentityReport:
    an = Analysis(spec, points, frame)
    lhs = rc_lhs(an.geom.curvature)
    kn = gauss_from_data(an.data)
    return IdentityReport(
        map_id=spec.map_id,
        points=an.points,
        data=an.data,
        rc_lhs=lhs,
        rc_rhs=rc_rhs(an.data),
        rc0=rc0_residuals(lhs, an.data, kn),
        kn=kn,
        tension_norm=an.norm_h(an.tension()),
        tension_direct_norm=an.norm_h(an.tension_direct()),
        tol_harmonic=tol_harmonic,
    )


def curvature_identity_residuals(spec: SubmersionSpec, points) -> IdentityReport:
    """Curvature components from the connection against the data-only right-hand sides."""
    return identity_report(spec, points)


def harmonic_system_residuals(spec: SubmersionSpec, points) -> IdentityReport:
    """Same report; read ``rc0`` for the harmonic system and the ``e3(sigma)`` condition."""
    return identity_report(spec, points)
