"""Truncated multivariate Taylor arithmetic.

A :class:`Jet` stores the Taylor coefficients of a smooth function around a
batch of base points, truncated at a fixed total degree.  Arithmetic and the
elementary functions propagate the coefficients exactly, so derivatives of
composite expressions are correct to machine precision.

Coefficients live in the last axis of ``Jet.c``; every leading axis is a
batch axis (sample points, tensor indices, ...).  Monomials are ordered by
degree first, so the order-``k`` coefficients of an order-``K`` jet are a
prefix of its coefficient vector and truncation is a slice.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np


class _Tables:
    """Index bookkeeping for ``nvars`` variables up to total degree ``order``."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        monos = []
        for deg in range(order + 1):
            for combo in combinations_with_replacement(range(nvars), deg):
                exps = [0] * nvars
                for v in combo:
                    exps[v] += 1
                monos.append(tuple(exps))
        self.monomials = monos
        self.size = len(monos)
        self.index = {m: k for k, m in enumerate(monos)}
        self.degree = np.array([sum(m) for m in monos])

        left, right, out = [], [], []
        for i, a in enumerate(monos):
            for j, b in enumerate(monos):
                if sum(a) + sum(b) <= order:
                    left.append(i)
                    right.append(j)
                    out.append(self.index[tuple(x + y for x, y in zip(a, b))])
        self.left = np.array(left)
        self.right = np.array(right)
        scatter = np.zeros((len(out), self.size))
        scatter[np.arange(len(out)), out] = 1.0
        self.scatter = scatter

        # d/dx_v maps the coefficient of beta + e_v onto beta, scaled by (beta_v + 1).
        if order > 0:
            lower = size_of(nvars, order - 1)
            src = np.zeros((nvars, lower), dtype=int)
            fac = np.zeros((nvars, lower))
            for k in range(lower):
                beta = monos[k]
                for v in range(nvars):
                    alpha = list(beta)
                    alpha[v] += 1
                    src[v, k] = self.index[tuple(alpha)]
                    fac[v, k] = alpha[v]
            self.diff_src = src
            self.diff_fac = fac


@lru_cache(maxsize=None)
def tables(nvars: int, order: int) -> _Tables:
    return _Tables(nvars, order)


def size_of(nvars: int, order: int) -> int:
    return math.comb(nvars + order, order)


class Jet:
    """Batch of truncated Taylor expansions in ``nvars`` variables."""

    __slots__ = ("c", "nvars", "order")
    # Let Jet reflected operators win over ndarray broadcasting.
    __array_ufunc__ = None

    def __init__(self, coeffs, nvars: int, order: int):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[-1] != size_of(nvars, order):
            raise ValueError(
                f"expected {size_of(nvars, order)} coefficients, got {coeffs.shape[-1]}"
            )
        self.c = coeffs
        self.nvars = nvars
        self.order = order

    # construction -------------------------------------------------------

    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (size_of(nvars, order),))
        c[..., 0] = value
        return cls(c, nvars, order)

    @classmethod
    def variables(cls, points, order: int) -> list["Jet"]:
        """Coordinate functions seeded at ``points`` (shape ``(..., n)``)."""
        points = np.asarray(points, dtype=float)
        n = points.shape[-1]
        out = []
        for v in range(n):
            jet = cls.constant(points[..., v], n, order)
            if order > 0:
                jet.c[..., 1 + v] = 1.0
            out.append(jet)
        return out

    @classmethod
    def from_derivatives(cls, value, gradient, hessian=None) -> "Jet":
        """Build an order-1 or order-2 jet from explicit derivatives."""
        value = np.asarray(value, dtype=float)
        gradient = np.asarray(gradient, dtype=float)
        n = gradient.shape[-1]
        order = 1 if hessian is None else 2
        t = tables(n, order)
        c = np.zeros(value.shape + (t.size,))
        c[..., 0] = value
        c[..., 1 : 1 + n] = gradient
        if hessian is not None:
            hessian = np.asarray(hessian, dtype=float)
            for k in range(1 + n, t.size):
                i, j = _pair(t.monomials[k])
                c[..., k] = hessian[..., i, j] * (0.5 if i == j else 1.0)
        return cls(c, n, order)

    # views ----------------------------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.c.shape[:-1]

    @property
    def value(self) -> np.ndarray:
        return self.c[..., 0]

    @property
    def gradient(self) -> np.ndarray:
        if self.order < 1:
            raise ValueError("order-0 jet carries no gradient")
        return self.c[..., 1 : 1 + self.nvars]

    @property
    def hessian(self) -> np.ndarray:
        if self.order < 2:
            raise ValueError("jet of order < 2 carries no hessian")
        n = self.nvars
        t = tables(n, self.order)
        h = np.zeros(self.shape + (n, n))
        for k in range(1 + n, size_of(n, 2)):
            i, j = _pair(t.monomials[k])
            if i == j:
                h[..., i, i] = 2.0 * self.c[..., k]
            else:
                h[..., i, j] = self.c[..., k]
                h[..., j, i] = self.c[..., k]
        return h

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            raise IndexError("ellipsis indexing is ambiguous for jets")
        return Jet(self.c[idx], self.nvars, self.order)

    def __repr__(self) -> str:
        return f"Jet(nvars={self.nvars}, order={self.order}, shape={self.shape})"

    # structural operations -----------------------------------------------

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        if order == self.order:
            return self
        return Jet(self.c[..., : size_of(self.nvars, order)], self.nvars, order)

    def partials(self) -> "Jet":
        """All first partial derivatives, one order lower, as a trailing batch axis."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        t = tables(self.nvars, self.order)
        c = self.c[..., t.diff_src] * t.diff_fac
        return Jet(c, self.nvars, self.order - 1)

    def transpose(self, *axes) -> "Jet":
        nb = len(self.shape)
        return Jet(np.transpose(self.c, tuple(axes) + (nb,)), self.nvars, self.order)

    def sum(self, axis) -> "Jet":
        axis = _batch_axis(axis, len(self.shape))
        return Jet(self.c.sum(axis=axis), self.nvars, self.order)

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets over different variable sets")
            k = min(self.order, other.order)
            return self.truncate(k), other.truncate(k)
        return self, None

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b = self._coerce(other)
            return Jet(a.c + b.c, a.nvars, a.order)
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(self.shape, other.shape)
        c = np.broadcast_to(self.c, shape + self.c.shape[-1:]).copy()
        c[..., 0] += other
        return Jet(c, self.nvars, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.nvars, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self._coerce(other)
            t = tables(a.nvars, a.order)
            prod = a.c[..., t.left] * b.c[..., t.right]
            return Jet(prod @ t.scatter, a.nvars, a.order)
        other = np.asarray(other, dtype=float)
        return Jet(self.c * other[..., None], self.nvars, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        other = np.asarray(other, dtype=float)
        return Jet(self.c / other[..., None], self.nvars, self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            out = Jet.constant(np.ones(self.shape), self.nvars, self.order)
            base = self
            while p:
                if p & 1:
                    out = out * base
                p >>= 1
                if p:
                    base = base * base
            return out
        return power(self, p)

    def reciprocal(self) -> "Jet":
        a0 = self.value
        return _compose(self, [(-1.0) ** k / a0 ** (k + 1) for k in range(self.order + 1)])


def _pair(mono):
    idx = [v for v, e in enumerate(mono) for _ in range(e)]
    return idx[0], idx[1]


def _batch_axis(axis: int, nbatch: int) -> int:
    if axis < 0:
        axis += nbatch
    if not 0 <= axis < nbatch:
        raise ValueError("axis out of range for jet batch")
    return axis


def _compose(x: Jet, taylor: list) -> Jet:
    """Evaluate ``sum_k taylor[k] * (x - x0)^k`` by Horner's rule."""
    h = Jet(x.c.copy(), x.nvars, x.order)
    h.c[..., 0] = 0.0
    out = Jet.constant(taylor[-1], x.nvars, x.order)
    for coeff in reversed(taylor[:-1]):
        out = out * h + coeff
    return out


# elementary functions: accept jets, numpy arrays or plain numbers ---------


def exp(x):
    if not isinstance(x, Jet):
        return np.exp(x)
    e = np.exp(x.value)
    return _compose(x, [e / math.factorial(k) for k in range(x.order + 1)])


def log(x):
    if not isinstance(x, Jet):
        return np.log(x)
    a0 = x.value
    coeffs = [np.log(a0)] + [
        (-1.0) ** (k + 1) / (k * a0**k) for k in range(1, x.order + 1)
    ]
    return _compose(x, coeffs)


def power(x, p: float):
    if not isinstance(x, Jet):
        return np.power(x, p)
    a0 = x.value
    coeffs = []
    binom = 1.0
    for k in range(x.order + 1):
        coeffs.append(binom * a0 ** (p - k))
        binom *= (p - k) / (k + 1)
    return _compose(x, coeffs)


def sqrt(x):
    if not isinstance(x, Jet):
        return np.sqrt(x)
    return power(x, 0.5)


def sin(x):
    if not isinstance(x, Jet):
        return np.sin(x)
    a0 = x.value
    return _compose(
        x, [np.sin(a0 + k * np.pi / 2) / math.factorial(k) for k in range(x.order + 1)]
    )


def cos(x):
    if not isinstance(x, Jet):
        return np.cos(x)
    a0 = x.value
    return _compose(
        x, [np.cos(a0 + k * np.pi / 2) / math.factorial(k) for k in range(x.order + 1)]
    )


# batched tensor helpers --------------------------------------------------


def as_jet(x, shape, nvars: int, order: int) -> Jet:
    """Promote constants to jets and broadcast to the requested batch shape."""
    if isinstance(x, Jet):
        x = x.truncate(min(order, x.order)) if x.order > order else x
        c = np.broadcast_to(x.c, tuple(shape) + x.c.shape[-1:])
        return Jet(c, x.nvars, x.order)
    value = np.broadcast_to(np.asarray(x, dtype=float), tuple(shape))
    return Jet.constant(value, nvars, order)


def stack(items, axis: int = -1) -> Jet:
    """Stack jets (or constants) along a new batch axis."""
    jets = [i for i in items if isinstance(i, Jet)]
    if not jets:
        raise ValueError("stack needs at least one jet to fix nvars/order")
    nvars = jets[0].nvars
    order = min(j.order for j in jets)
    shape = np.broadcast_shapes(*[j.shape for j in jets])
    for i in items:
        if not isinstance(i, Jet):
            shape = np.broadcast_shapes(shape, np.shape(i))
    full = [as_jet(i, shape, nvars, order).truncate(order) for i in items]
    nb = len(shape)
    if axis < 0:
        axis += nb + 1
    c = np.stack([np.broadcast_to(j.c, shape + j.c.shape[-1:]) for j in full], axis=axis)
    return Jet(c, nvars, order)


def einsum(subscripts: str, a, b) -> Jet:
    """Bilinear contraction of two jets (or a jet and a plain array).

    ``subscripts`` follows :func:`numpy.einsum` for the batch axes; the Taylor
    product is applied along the hidden coefficient axis.
    """
    lhs, out = subscripts.split("->")
    sa, sb = lhs.split(",")
    if isinstance(a, Jet) and isinstance(b, Jet):
        a, b = a._coerce(b)
        t = tables(a.nvars, a.order)
        res = np.einsum(f"{sa}Z,{sb}Z->{out}Z", a.c[..., t.left], b.c[..., t.right])
        return Jet(res @ t.scatter, a.nvars, a.order)
    if isinstance(a, Jet):
        return Jet(np.einsum(f"{sa}Z,{sb}->{out}Z", a.c, np.asarray(b, float)), a.nvars, a.order)
    if isinstance(b, Jet):
        return Jet(np.einsum(f"{sa},{sb}Z->{out}Z", np.asarray(a, float), b.c), b.nvars, b.order)
    raise TypeError("einsum needs at least one jet operand")
