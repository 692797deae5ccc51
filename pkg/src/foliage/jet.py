"""Second-order jets: vectorized forward-mode differentiation along a frame.

A :class:`Jet` holds, for every point of a sample, the value of a tensor
quantity together with its first and second derivatives along a fixed
family of derivations ``e_1, ..., e_n`` (coordinate fields of a chart, or
the invariant frame of a Lie group):

    v[s, ...]        = f(x_s)
    d[s, i, ...]     = e_i(f)(x_s)
    h[s, i, j, ...]  = e_i(e_j(f))(x_s)

Every derivation obeys the Leibniz rule, so the usual dual-number
propagation works unchanged even when the derivations do not commute
(``h`` is then not symmetric in ``i, j``).  Derivatives that are not
available are dropped: the *order* of a jet is 2, 1 or 0 and decreases
whenever a derivative is taken out of it with :func:`grad`.
"""

from __future__ import annotations

from numbers import Number
from typing import Sequence

import numpy as np

MAX_ORDER = 2


class Jet:
    """Value plus first and second frame derivatives over a point sample."""

    __slots__ = ("v", "d", "h")
    __array_priority__ = 1000

    def __init__(self, v, d=None, h=None):
        self.v = np.asarray(v, dtype=float)
        self.d = None if d is None else np.asarray(d, dtype=float)
        self.h = None if h is None else np.asarray(h, dtype=float)
        if self.h is not None and self.d is None:
            raise ValueError("second derivatives given without first derivatives")

    # -- bookkeeping ---------------------------------------------------------

    @property
    def order(self) -> int:
        if self.h is not None:
            return 2
        return 1 if self.d is not None else 0

    @property
    def shape(self) -> tuple:
        return self.v.shape[1:]

    @property
    def ndim(self) -> int:
        return self.v.ndim - 1

    @property
    def nsamples(self) -> int:
        return self.v.shape[0]

    @property
    def nder(self) -> int | None:
        return None if self.d is None else self.d.shape[1]

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.v, self.d if order >= 1 else None, None)

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, samples={self.nsamples}, order={self.order})"

    @classmethod
    def constant(cls, value, nsamples: int, nder: int, order: int = MAX_ORDER):
        """A plain tensor with vanishing derivatives, broadcast over the sample."""
        value = np.asarray(value, dtype=float)
        v = np.broadcast_to(value, (nsamples,) + value.shape)
        return cls._with_zero_derivatives(v, nder, order)

    @classmethod
    def per_sample(cls, value, nder: int, order: int = MAX_ORDER):
        """Sample-wise constants: differ between points, but have zero derivatives."""
        v = np.asarray(value, dtype=float)
        return cls._with_zero_derivatives(v, nder, order)

    @classmethod
    def _with_zero_derivatives(cls, v, nder, order):
        s, shape = v.shape[0], v.shape[1:]
        d = np.broadcast_to(0.0, (s, nder) + shape) if order >= 1 else None
        h = np.broadcast_to(0.0, (s, nder, nder) + shape) if order >= 2 else None
        return cls(v, d, h)

    def __float__(self):
        if self.v.size != 1:
            raise TypeError("only single-valued jets convert to float")
        return float(self.v.reshape(-1)[0])

    # -- shape manipulation ---------------------------------------------------

    def _map(self, fn) -> "Jet":
        """Apply a shape operation acting on the trailing tensor axes."""
        v = fn(self.v, 1)
        d = None if self.d is None else fn(self.d, 2)
        h = None if self.h is None else fn(self.h, 3)
        return Jet(v, d, h)

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis for i in idx):
            raise IndexError("ellipsis indexing is not supported on jets")
        return self._map(lambda a, lead: a[(slice(None),) * lead + idx])

    def transpose(self, *axes) -> "Jet":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        return self._map(lambda a, lead: a.transpose(tuple(range(lead)) + tuple(lead + k for k in axes)))

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def moveaxis(self, source, destination) -> "Jet":
        nd = self.ndim

        def norm(ax):
            if isinstance(ax, (tuple, list)):
                return tuple(norm(a) for a in ax)
            return ax % nd

        src, dst = norm(source), norm(destination)

        def move(a, lead):
            if isinstance(src, tuple):
                return np.moveaxis(a, tuple(lead + s for s in src), tuple(lead + t for t in dst))
            return np.moveaxis(a, lead + src, lead + dst)

        return self._map(move)

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return self._map(lambda a, lead: a.reshape(a.shape[:lead] + tuple(shape)))

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(self.ndim))
        if not isinstance(axis, tuple):
            axis = (axis,)
        axis = tuple(a % self.ndim for a in axis)
        return self._map(lambda a, lead: a.sum(axis=tuple(lead + k for k in axis)))

    def expand(self, ndim: int) -> "Jet":
        """Insert leading singleton tensor axes so the tensor rank becomes ``ndim``."""
        extra = ndim - self.ndim
        if extra <= 0:
            return self
        return self._map(lambda a, lead: a.reshape(a.shape[:lead] + (1,) * extra + a.shape[lead:]))

    # -- arithmetic -------------------------------------------------------------

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        value = np.asarray(other, dtype=float)
        return Jet.constant(value, self.nsamples, self.nder or 0, self.order if self.nder else 0)

    def _pair(self, other):
        other = self._coerce(other)
        order = min(self.order, other.order)
        a, b = self.truncate(order), other.truncate(order)
        nd = max(a.ndim, b.ndim)
        return a.expand(nd), b.expand(nd), order

    def __add__(self, other):
        a, b, order = self._pair(other)
        return Jet(a.v + b.v,
                   None if order < 1 else a.d + b.d,
                   None if order < 2 else a.h + b.h)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v, None if self.d is None else -self.d, None if self.h is None else -self.h)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Number) or (isinstance(other, np.ndarray) and other.ndim == 0):
            s = float(other)
            return Jet(self.v * s, None if self.d is None else self.d * s,
                       None if self.h is None else self.h * s)
        a, b, order = self._pair(other)
        v = a.v * b.v
        d = h = None
        if order >= 1:
            av, bv = a.v[:, None], b.v[:, None]
            d = a.d * bv + av * b.d
        if order >= 2:
            av2, bv2 = a.v[:, None, None], b.v[:, None, None]
            cross = a.d[:, :, None] * b.d[:, None, :] + a.d[:, None, :] * b.d[:, :, None]
            h = a.h * bv2 + cross + av2 * b.h
        return Jet(v, d, h)

    __rmul__ = __mul__

    def reciprocal(self):
        return _unary(self, lambda x: 1.0 / x, lambda x: -1.0 / x**2, lambda x: 2.0 / x**3)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            return exp(log(self) * p)
        p = float(p)
        if p == 2.0:
            return self * self
        return _unary(self, lambda x: x**p, lambda x: p * x ** (p - 1),
                      lambda x: p * (p - 1) * x ** (p - 2))

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs:
            return NotImplemented
        table = {
            np.add: lambda a, b: _as(a, b).__add__(b),
            np.subtract: lambda a, b: _as(a, b).__sub__(b),
            np.multiply: lambda a, b: _as(a, b).__mul__(b),
            np.true_divide: lambda a, b: _as(a, b).__truediv__(b),
            np.power: lambda a, b: _as(a, b).__pow__(b),
            np.negative: lambda a: -a,
            np.sin: sin, np.cos: cos, np.exp: exp, np.log: log,
            np.sqrt: sqrt, np.square: lambda a: a * a,
        }
        fn = table.get(ufunc)
        if fn is None:
            return NotImplemented
        return fn(*inputs)


def _as(a, b):
    """Return a jet operand of a binary ufunc so the method call dispatches."""
    if isinstance(a, Jet):
        return a
    return b._coerce(a)


def _unary(a: Jet, f, f1, f2) -> Jet:
    v = f(a.v)
    d = h = None
    if a.order >= 1:
        g1 = f1(a.v)
        d = g1[:, None] * a.d
        if a.order >= 2:
            g2 = f2(a.v)
            h = g2[:, None, None] * a.d[:, :, None] * a.d[:, None, :] + g1[:, None, None] * a.h
    return Jet(v, d, h)


def sin(a):
    if not isinstance(a, Jet):
        return np.sin(a)
    return _unary(a, np.sin, np.cos, lambda x: -np.sin(x))


def cos(a):
    if not isinstance(a, Jet):
        return np.cos(a)
    return _unary(a, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x))


def exp(a):
    if not isinstance(a, Jet):
        return np.exp(a)
    return _unary(a, np.exp, np.exp, np.exp)


def log(a):
    if not isinstance(a, Jet):
        return np.log(a)
    return _unary(a, np.log, lambda x: 1.0 / x, lambda x: -1.0 / x**2)


def sqrt(a):
    if not isinstance(a, Jet):
        return np.sqrt(a)
    return _unary(a, np.sqrt, lambda x: 0.5 / np.sqrt(x), lambda x: -0.25 / x**1.5)


# -- contractions -----------------------------------------------------------------

_RESERVED = set("ZIJ")


def einsum(spec: str, *ops):
    """Einstein summation with Leibniz propagation of derivatives.

    Operands may mix jets and plain constant arrays.  Subscripts must use
    lowercase letters (and optionally ``...``); the sample and derivative
    axes are handled internally.
    """
    if "->" not in spec:
        raise ValueError("einsum on jets needs an explicit output")
    lhs, out = spec.replace(" ", "").split("->")
    subs = lhs.split(",")
    if len(subs) != len(ops):
        raise ValueError("operand count does not match subscripts")
    if _RESERVED & set(spec):
        raise ValueError("subscripts Z, I, J are reserved")
    jets = [k for k, o in enumerate(ops) if isinstance(o, Jet)]
    if not jets:
        return np.einsum(spec, *ops)
    order = min(ops[k].order for k in jets)
    arrays = [np.asarray(o, dtype=float) if not isinstance(o, Jet) else o for o in ops]

    def run(tags):
        parts, operands = [], []
        for k, (s, o) in enumerate(zip(subs, arrays)):
            tag = tags.get(k, "")
            if isinstance(o, Jet):
                arr = {"": o.v, "I": o.d, "J": o.d, "IJ": o.h}[tag]
                parts.append("Z" + tag + s)
            else:
                arr = o
                parts.append(s)
            operands.append(arr)
        head = "Z" + "".join(sorted(set("".join(tags.values())), key="IJ".index))
        big = len(ops) > 2 or max(a.size for a in operands) > 50_000
        return np.einsum(",".join(parts) + "->" + head + out, *operands, optimize=big)

    v = run({})
    d = h = None
    if order >= 1:
        d = sum(run({k: "I"}) for k in jets)
    if order >= 2:
        h = sum(run({k: "IJ"}) for k in jets)
        for k in jets:
            for m in jets:
                if k != m:
                    h = h + run({k: "I", m: "J"})
    return Jet(v, d, h)


def inv(a: Jet) -> Jet:
    """Matrix inverse over the last two tensor axes."""
    if not isinstance(a, Jet):
        return np.linalg.inv(a)
    b = np.linalg.inv(a.v)
    d = h = None
    if a.order >= 1:
        t = np.einsum("Z...ab,ZI...bc->ZI...ac", b, a.d)
        d = -np.einsum("ZI...ac,Z...cd->ZI...ad", t, b)
        if a.order >= 2:
            tb = np.einsum("ZI...ac,Z...cd->ZI...ad", t, b)
            two = np.einsum("ZI...ac,ZJ...cd->ZIJ...ad", t, tb) + np.einsum("ZJ...ac,ZI...cd->ZIJ...ad", t, tb)
            h = two - np.einsum("Z...ab,ZIJ...bc,Z...cd->ZIJ...ad", b, a.h, b, optimize=True)
    return Jet(b, d, h)


def grad(a: Jet) -> Jet:
    """Frame derivative ``e_j(a)`` as a new trailing tensor axis; lowers the order."""
    if a.order < 1:
        raise ValueError("jet carries no derivatives; evaluate at higher order")
    v = np.moveaxis(a.d, 1, -1)
    d = None if a.h is None else np.moveaxis(a.h, 2, -1)
    return Jet(v, d, None)


def stack(items: Sequence, axis: int = 0) -> Jet:
    """Stack jets and constants along a new tensor axis."""
    ref = next((x for x in items if isinstance(x, Jet)), None)
    if ref is None:
        raise TypeError("stack needs at least one jet to know the sample")
    order = min(x.order for x in items if isinstance(x, Jet))
    jets = [ref._coerce(x).truncate(order) for x in items]
    shape = np.broadcast_shapes(*(j.shape for j in jets))
    jets = [_broadcast(j, shape) for j in jets]
    if axis < 0:
        axis += len(shape) + 1
    v = np.stack([j.v for j in jets], axis=1 + axis)
    d = None if order < 1 else np.stack([j.d for j in jets], axis=2 + axis)
    h = None if order < 2 else np.stack([j.h for j in jets], axis=3 + axis)
    return Jet(v, d, h)


def concatenate(items: Sequence[Jet], axis: int = 0) -> Jet:
    order = min(x.order for x in items)
    items = [x.truncate(order) for x in items]
    nd = items[0].ndim
    axis %= nd
    v = np.concatenate([j.v for j in items], axis=1 + axis)
    d = None if order < 1 else np.concatenate([j.d for j in items], axis=2 + axis)
    h = None if order < 2 else np.concatenate([j.h for j in items], axis=3 + axis)
    return Jet(v, d, h)


def _broadcast(j: Jet, shape) -> Jet:
    if j.shape == tuple(shape):
        return j
    j = j.expand(len(shape))
    return j._map(lambda a, lead: np.broadcast_to(a, a.shape[:lead] + tuple(shape)))


def array(nested, like: Jet | None = None) -> Jet:
    """Build a tensor jet from a nested list of jets and numbers."""
    def find(x):
        if isinstance(x, Jet):
            return x
        if isinstance(x, (list, tuple)):
            for y in x:
                r = find(y)
                if r is not None:
                    return r
        return None

    ref = find(nested) or like
    if ref is None:
        raise TypeError("array needs a jet entry or a `like` jet")

    def build(x):
        if isinstance(x, Jet):
            return x
        if isinstance(x, (list, tuple)):
            return stack([build(y) for y in x])
        return ref._coerce(x)

    return build(nested)


def as_jet(x, like: Jet) -> Jet:
    """Coerce user output (jet, number, nested list) into a jet on ``like``'s sample."""
    if isinstance(x, Jet):
        return x
    if isinstance(x, (list, tuple)):
        return array(x, like=like)
    return like._coerce(x)
