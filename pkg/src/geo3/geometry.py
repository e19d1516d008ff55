"""Metrics, orthonormal frames, the Levi-Civita connection and curvature.

All tensors are expressed in an orthonormal frame ``e_1, e_2, e_3``:

* structure functions  ``[e_i, e_j] = sum_k c[i, j, k] e_k``
* connection           ``nabla_{e_i} e_j = sum_k gamma[i, j, k] e_k``
* curvature operator   ``R(X, Y) Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z``
* curvature tensor     ``R[a, b, c, d] = g(R(e_c, e_d) e_b, e_a)``
* Ricci                ``Ric[a, b] = sum_i R[b, i, a, i]``

Array axes are ``(point, i, j, ...)`` with frame indices counted from 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .calculus import Chart, ChartPoint, ScalarField, VectorField, bracket_jets, _resolve
from .errors import DomainError, FrameError, UsageError
from .jets import Jet, as_jet, einsum, stack

ORTHONORMAL_TOL = 1e-9
SPD_FLOOR = 1e-12


class MetricField:
    """A Riemannian metric given by a formula returning an n x n nested sequence."""

    def __init__(self, fn: Callable, chart: Chart, name: str = ""):
        self.fn = fn
        self.chart = chart
        self.name = name

    def __repr__(self):
        return f"MetricField({self.name} on {self.chart.id})"

    def jets(self, points, order: int = 1) -> Jet:
        pts = self.chart.require(points)
        return self.compose(Jet.variables(pts, order), pts.shape[:-1], order)

    def compose(self, coords, shape, order) -> Jet:
        """Metric entries evaluated on arbitrary coordinate jets (e.g. a map)."""
        nvars = coords[0].nvars
        rows = self.fn(*coords)
        return stack(
            [stack([as_jet(e, shape, nvars, order) for e in row], axis=-1) for row in rows],
            axis=-2,
        )

    def matrix(self, points) -> np.ndarray:
        pts = self.chart.require_domain(points)
        rows = self.fn(*(pts[..., k] for k in range(self.chart.dim)))
        shape = pts.shape[:-1]
        return np.stack(
            [np.stack([np.broadcast_to(np.asarray(e, float), shape) for e in row], -1) for row in rows],
            -2,
        )

    def entry(self, i: int, j: int) -> ScalarField:
        return ScalarField(lambda *x: self.fn(*x)[i][j], self.chart, name=f"{self.name}[{i},{j}]")

    def check_spd(self, points, floor: float = SPD_FLOOR) -> np.ndarray:
        """Smallest eigenvalue per point; raises when the metric degenerates."""
        g = self.matrix(np.atleast_2d(points))
        if not np.allclose(g, np.swapaxes(g, -1, -2), atol=1e-14, rtol=0):
            raise DomainError(f"metric {self.name!r} is not symmetric")
        low = np.linalg.eigvalsh(g)[..., 0]
        if np.any(low <= floor):
            k = int(np.argmin(low))
            raise DomainError(
                f"metric {self.name!r} degenerates at {np.atleast_2d(points)[k].tolist()} "
                f"(smallest eigenvalue {low[k]:.3e})"
            )
        return low


class FrameField:
    """An ordered triple of vector fields, orthonormal for ``metric``."""

    def __init__(self, e1: VectorField, e2: VectorField, e3: VectorField, metric: MetricField, name: str = ""):
        ids = {e1.chart.id, e2.chart.id, e3.chart.id, metric.chart.id}
        if len(ids) != 1:
            raise UsageError(f"frame fields and metric live on different charts: {sorted(ids)}")
        self.fields = (e1, e2, e3)
        self.metric = metric
        self.chart = metric.chart
        self.name = name

    def __repr__(self):
        return f"FrameField({self.name} on {self.chart.id})"

    @property
    def e1(self):
        return self.fields[0]

    @property
    def e2(self):
        return self.fields[1]

    @property
    def e3(self):
        return self.fields[2]

    def jets(self, points, order: int = 2) -> Jet:
        """Component jets with batch shape ``(N, 3, n)``."""
        pts = self.chart.require(points)
        return stack([f.jets(pts, order) for f in self.fields], axis=-2)

    def values(self, points) -> np.ndarray:
        return self.jets(points, 0).value

    def orientation(self, points) -> np.ndarray:
        """Sign of the frame determinant (the unit normal is prepended in ambient charts)."""
        pts = np.atleast_2d(self.chart.require(points))
        E = self.values(pts)
        if E.shape[-1] == 4:
            E = np.concatenate([pts[:, None, :], E], axis=1)
        return np.sign(np.linalg.det(E))

    def gram(self, points) -> np.ndarray:
        pts = np.atleast_2d(self.chart.require(points))
        E = self.values(pts)
        return np.einsum("nia,nab,njb->nij", E, self.metric.matrix(pts), E)

    def rotated(self, rotation, name: str = "") -> "FrameField":
        """Frame ``e'_i = sum_j rotation[i, j] e_j`` for a constant orthogonal matrix."""
        a = np.asarray(rotation, dtype=float)
        if a.shape != (3, 3) or not np.allclose(a @ a.T, np.eye(3), atol=1e-12, rtol=0):
            raise FrameError("rotation matrix is not orthogonal within 1e-12")
        return LinearFrame(self, a, name=name or f"{self.name}.rotated")


class FrameMember(VectorField):
    """The i-th field of a frame whose components are only available as jets."""

    def __init__(self, frame: "FrameField", index: int):
        self.frame = frame
        self.index = index
        self.chart = frame.chart
        self.name = f"{frame.name}.e{index + 1}"
        self.components = ()

    def jets(self, points, order: int = 2) -> Jet:
        return self.frame.jets(np.atleast_2d(points), order)[:, self.index]

    def values(self, points) -> np.ndarray:
        return self.jets(np.atleast_2d(points), 0).value


class DerivedFrame(FrameField):
    """Base for frames computed from other data; subclasses implement ``jets``."""

    def __init__(self, metric: MetricField, name: str = ""):
        self.metric = metric
        self.chart = metric.chart
        self.name = name
        self.fields = tuple(FrameMember(self, i) for i in range(3))

    def jets(self, points, order: int = 2) -> Jet:
        raise NotImplementedError


class LinearFrame(DerivedFrame):
    def __init__(self, base: FrameField, matrix: np.ndarray, name: str = ""):
        super().__init__(base.metric, name)
        self.base = base
        self.matrix = np.asarray(matrix, float)

    def jets(self, points, order: int = 2) -> Jet:
        pts = np.atleast_2d(self.chart.require(points))
        return einsum("ij,njk->nik", self.matrix, self.base.jets(pts, order))


def check_orthonormal(gram: np.ndarray, points, tol: float = ORTHONORMAL_TOL):
    dev = np.abs(gram - np.eye(3)).max(axis=(-1, -2))
    if np.any(dev > tol):
        k = int(np.argmax(dev))
        raise FrameError(
            f"frame is not orthonormal at {np.atleast_2d(points)[k].tolist()} "
            f"(max |<e_i,e_j> - delta_ij| = {dev[k]:.3e})"
        )
    return dev


@dataclass
class StructureFunctions:
    """``c[n, i, j, k]``: coefficient of ``e_k`` in ``[e_i, e_j]`` at point ``n``."""

    c: np.ndarray
    residual: np.ndarray
    jet: Optional[Jet] = None

    def __post_init__(self):
        # exact antisymmetry, whatever rounding did to the two triangles
        self.c = 0.5 * (self.c - np.swapaxes(self.c, 1, 2))


@dataclass
class ConnectionCoefficients:
    """``gamma[n, i, j, k]``: coefficient of ``e_k`` in ``nabla_{e_i} e_j``."""

    gamma: np.ndarray
    jet: Optional[Jet] = None

    def metric_defect(self) -> float:
        return float(np.abs(self.gamma + np.swapaxes(self.gamma, 2, 3)).max(initial=0.0))

    def torsion_defect(self, c: StructureFunctions) -> float:
        return float(np.abs(self.gamma - np.swapaxes(self.gamma, 1, 2) - c.c).max(initial=0.0))


@dataclass
class CurvatureTensor:
    """``R[n, a, b, c, d] = g(R(e_c, e_d) e_b, e_a)``."""

    R: np.ndarray

    def component(self, a, b, c, d) -> np.ndarray:
        """1-based access matching the usual R_1212 notation."""
        return self.R[:, a - 1, b - 1, c - 1, d - 1]

    def symmetry_defects(self) -> dict:
        R = self.R
        bianchi = R + np.transpose(R, (0, 1, 3, 4, 2)) + np.transpose(R, (0, 1, 4, 2, 3))
        return {
            "antisym_ab": float(np.abs(R + np.swapaxes(R, 1, 2)).max()),
            "antisym_cd": float(np.abs(R + np.swapaxes(R, 3, 4)).max()),
            "pair": float(np.abs(R - np.transpose(R, (0, 3, 4, 1, 2))).max()),
            "bianchi": float(np.abs(bianchi).max()),
        }

    def ricci(self) -> np.ndarray:
        return np.einsum("nbiai->nab", self.R)


def koszul_connection(c: StructureFunctions) -> ConnectionCoefficients:
    """Orthonormal-frame Koszul formula ``gamma_ij^k = (c_ij^k - c_jk^i + c_ki^j) / 2``."""

    def rule(arr, axis0):
        # arr[..., i, j, k] with the frame axes starting at axis0
        a, b, k = axis0, axis0 + 1, axis0 + 2
        perm_jki = list(range(arr.ndim))
        perm_kij = list(range(arr.ndim))
        # (c_jk^i)[i,j,k] = c[j,k,i]  and  (c_ki^j)[i,j,k] = c[k,i,j]
        perm_jki[a], perm_jki[b], perm_jki[k] = k, a, b
        perm_kij[a], perm_kij[b], perm_kij[k] = b, k, a
        return perm_jki, perm_kij

    p1, p2 = rule(c.c, 1)
    gamma = 0.5 * (c.c - np.transpose(c.c, p1) + np.transpose(c.c, p2))
    jet = None
    if c.jet is not None:
        cc = c.jet.c
        q1, q2 = rule(cc, 1)
        jet = Jet(0.5 * (cc - np.transpose(cc, q1) + np.transpose(cc, q2)), c.jet.nvars, c.jet.order)
    return ConnectionCoefficients(gamma, jet)


class FrameGeometry:
    """Everything the frame method needs at a batch of points, computed once.

    Frame components are taken as order-2 jets; brackets, structure functions
    and connection coefficients are then order-1 jets, which is exactly what
    the curvature needs (one frame derivative of the connection).
    """

    def __init__(self, frame: FrameField, points, check: bool = True):
        pts = np.atleast_2d(frame.chart.require(points))
        self.frame = frame
        self.points = pts
        E = frame.jets(pts, 2)
        G = frame.metric.jets(pts, 1)
        E1 = E.truncate(1)
        self.E = E1.value
        self.G = G.value
        gram = np.einsum("nia,nab,njb->nij", self.E, self.G, self.E)
        self.orthonormality = check_orthonormal(gram, pts) if check else np.abs(gram - np.eye(3)).max(axis=(-1, -2))

        B = bracket_jets(E[:, :, None, :], E[:, None, :, :])  # (N, i, j, a)
        lowered = einsum("nab,nkb->nka", G, E1)  # g(e_k, .)
        cj = einsum("nija,nka->nijk", B, lowered)
        decomposed = np.einsum("nijk,nka->nija", cj.value, self.E)
        rest = B.value - decomposed
        self.brackets = B.value
        self.structure = StructureFunctions(
            cj.value.copy(),
            np.sqrt(np.einsum("nija,nab,nijb->nij", rest, self.G, rest).clip(min=0)).max(axis=(1, 2)),
            cj,
        )
        self.connection = koszul_connection(self.structure)
        self._curvature = None

    def frame_derivative(self, jet: Jet) -> np.ndarray:
        """``e_i(q)`` for an order >= 1 jet ``q`` of batch ``(N, ...)``; frame axis last."""
        return np.einsum("n...a,nia->n...i", jet.gradient, self.E)

    @property
    def curvature(self) -> CurvatureTensor:
        if self._curvature is None:
            self._curvature = CurvatureTensor(_frame_curvature(self))
        return self._curvature


def _frame_curvature(fg: FrameGeometry) -> np.ndarray:
    gamma = fg.connection.gamma
    c = fg.structure.c
    # dgamma[n, i, j, k, l] = e_i(gamma_jk^l)
    grad = fg.connection.jet.gradient  # (N, j, k, l, a)
    dgamma = np.einsum("njkla,nia->nijkl", grad, fg.E)
    op = (
        dgamma
        - np.swapaxes(dgamma, 1, 2)
        + np.einsum("njkm,nimq->nijkq", gamma, gamma)
        - np.einsum("nikm,njmq->nijkq", gamma, gamma)
        - np.einsum("nijp,npkq->nijkq", c, gamma)
    )
    # op[n, i, j, k, q]: e_q component of R(e_i, e_j) e_k ;  R[a,b,c,d] = op[c,d,b,a]
    return np.transpose(op, (0, 4, 3, 1, 2))


def _points_for(frame: FrameField, p):
    pts, single = _resolve(frame.chart, p)
    return pts, single


def structure_functions(frame: FrameField, p) -> StructureFunctions:
    pts, single = _points_for(frame, p)
    sf = FrameGeometry(frame, pts).structure
    if single:
        return StructureFunctions(sf.c[:1], sf.residual[:1], sf.jet[0:1])
    return sf


def riemann_frame(frame: FrameField, p) -> CurvatureTensor:
    pts, _ = _points_for(frame, p)
    return FrameGeometry(frame, pts).curvature


def ricci_frame(frame: FrameField, p) -> np.ndarray:
    pts, single = _points_for(frame, p)
    ric = FrameGeometry(frame, pts).curvature.ricci()
    return ric[0] if single else ric


def sectional_tensor(k12, k13, k23) -> np.ndarray:
    """Curvature tensor whose only independent entries are R_1212, R_1313, R_2323."""
    k12, k13, k23 = np.broadcast_arrays(*(np.asarray(k, float) for k in (k12, k13, k23)))
    R = np.zeros(k12.shape + (3, 3, 3, 3))
    for (a, b), k in zip(((0, 1), (0, 2), (1, 2)), (k12, k13, k23)):
        R[..., a, b, a, b] = R[..., b, a, b, a] = k
        R[..., a, b, b, a] = R[..., b, a, a, b] = -k
    return R


@dataclass
class TableReport:
    """Largest deviation of engine tables from closed forms over a sample."""

    space_id: str
    params: dict
    n_points: int
    max_dev: dict
    symmetry: dict
    orthonormality: float
    decomposition: float

    def passed(self, tol: float) -> bool:
        return all(v <= tol for v in self.max_dev.values())


def verify_connection_tables(space, points) -> TableReport:
    """Compare engine brackets, connection, curvature and Ricci with a space's closed forms."""
    tables = getattr(space, "tables", None)
    if not tables:
        raise UsageError(f"space {getattr(space, 'id', space)!r} has no closed-form tables")
    pts = np.atleast_2d(points)
    fg = FrameGeometry(space.frame, pts)
    computed = {
        "structure": fg.structure.c,
        "connection": fg.connection.gamma,
        "curvature": fg.curvature.R,
        "ricci": fg.curvature.ricci(),
    }
    dev = {}
    for key, value in computed.items():
        if key in tables:
            dev[key] = float(np.abs(value - tables[key](pts)).max())
    return TableReport(
        space_id=space.id,
        params=dict(space.params),
        n_points=len(pts),
        max_dev=dev,
        symmetry=fg.curvature.symmetry_defects(),
        orthonormality=float(fg.orthonormality.max()),
        decomposition=float(fg.structure.residual.max()),
    )
