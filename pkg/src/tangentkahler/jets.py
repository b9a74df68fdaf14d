"""Second-order multivariate dual numbers ("jets") over numpy arrays.

A :class:`Jet` carries an array value together with its gradient and (optionally)
Hessian with respect to ``n`` seed variables.  Derivative axes are always the
trailing axes: ``d1.shape == val.shape + (n,)`` and
``d2.shape == val.shape + (n, n)``.

Field evaluators in this package are written against the helpers at the bottom
of this module (:func:`sqrt`, :func:`einsum`, :func:`stack`, ...), which accept
plain arrays as well as jets, so the same code runs under exact differentiation
and under finite differences.
"""

from __future__ import annotations

import numpy as np

_D1 = "Y"
_D2 = "Z"


class Jet:
    __array_ufunc__ = None  # make ndarray (op) Jet defer to the reflected Jet method

    def __init__(self, val, d1, d2=None):
        self.val = np.asarray(val)
        self.d1 = np.asarray(d1)
        self.d2 = None if d2 is None else np.asarray(d2)

    @classmethod
    def variables(cls, z, order: int = 2) -> "Jet":
        z = np.asarray(z, dtype=float)
        n = z.shape[0]
        d2 = np.zeros((n, n, n)) if order >= 2 else None
        return cls(z.copy(), np.eye(n), d2)

    @property
    def n(self) -> int:
        return self.d1.shape[-1]

    @property
    def order(self) -> int:
        return 1 if self.d2 is None else 2

    @property
    def shape(self):
        return self.val.shape

    @property
    def ndim(self) -> int:
        return self.val.ndim

    def __len__(self):
        return len(self.val)

    def __repr__(self):
        return f"Jet(shape={self.shape}, n={self.n}, order={self.order})"

    # -- construction helpers -------------------------------------------------

    def _const(self, c) -> "Jet":
        c = np.asarray(c)
        d2 = None if self.d2 is None else np.zeros(c.shape + (self.n, self.n), dtype=c.dtype)
        return Jet(c, np.zeros(c.shape + (self.n,), dtype=c.dtype), d2)

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return self._const(other)

    # -- arithmetic -----------------------------------------------------------

    def __neg__(self):
        return Jet(-self.val, -self.d1, None if self.d2 is None else -self.d2)

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other)
            val = self.val + other
            d1 = np.broadcast_to(self.d1, val.shape + (self.n,))
            d2 = None if self.d2 is None else np.broadcast_to(self.d2, val.shape + (self.n, self.n))
            return Jet(val, d1, d2)
        d2 = None
        if self.d2 is not None and other.d2 is not None:
            d2 = self.d2 + other.d2
        return Jet(self.val + other.val, self.d1 + other.d1, d2)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other)
            d2 = None if self.d2 is None else self.d2 * c[..., None, None]
            return Jet(self.val * c, self.d1 * c[..., None], d2)
        f, g = self, other
        val = f.val * g.val
        d1 = f.d1 * g.val[..., None] + f.val[..., None] * g.d1
        d2 = None
        if f.d2 is not None and g.d2 is not None:
            d2 = (
                f.d2 * g.val[..., None, None]
                + f.val[..., None, None] * g.d2
                + f.d1[..., :, None] * g.d1[..., None, :]
                + f.d1[..., None, :] * g.d1[..., :, None]
            )
        return Jet(val, d1, d2)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            raise TypeError("jet exponents are not supported")
        if p == 2:
            return self * self
        v = self.val
        return self.apply(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def reciprocal(self):
        v = self.val
        return self.apply(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def conj(self):
        return Jet(
            np.conj(self.val), np.conj(self.d1), None if self.d2 is None else np.conj(self.d2)
        )

    @property
    def real(self):
        return Jet(self.val.real, self.d1.real, None if self.d2 is None else self.d2.real)

    @property
    def imag(self):
        return Jet(self.val.imag, self.d1.imag, None if self.d2 is None else self.d2.imag)

    def apply(self, f0, f1, f2=None) -> "Jet":
        """Chain rule for an elementwise function with value f0 and derivatives f1, f2."""
        f1 = np.asarray(f1)
        d1 = f1[..., None] * self.d1
        d2 = None
        if self.d2 is not None:
            d2 = np.asarray(f2)[..., None, None] * (
                self.d1[..., :, None] * self.d1[..., None, :]
            ) + f1[..., None, None] * self.d2
        return Jet(f0, d1, d2)

    # -- shape manipulation -----------------------------------------------------

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            k1 = key + (slice(None),)
            k2 = key + (slice(None), slice(None))
        else:
            k1 = k2 = key
        return Jet(self.val[key], self.d1[k1], None if self.d2 is None else self.d2[k2])

    def _axis(self, axis):
        return axis % self.ndim

    def sum(self, axis=None):
        if axis is None:
            axes = tuple(range(self.ndim))
        else:
            axes = (self._axis(axis),)
        return Jet(
            self.val.sum(axis=axes),
            self.d1.sum(axis=axes),
            None if self.d2 is None else self.d2.sum(axis=axes),
        )

    def swapaxes(self, a, b):
        a, b = self._axis(a), self._axis(b)
        return Jet(
            self.val.swapaxes(a, b),
            self.d1.swapaxes(a, b),
            None if self.d2 is None else self.d2.swapaxes(a, b),
        )

    @property
    def T(self):
        return self.swapaxes(0, 1)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        n = self.n
        return Jet(
            self.val.reshape(shape),
            self.d1.reshape(shape + (n,)),
            None if self.d2 is None else self.d2.reshape(shape + (n, n)),
        )

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)


# -- polymorphic helpers --------------------------------------------------------


def is_jet(x) -> bool:
    return isinstance(x, Jet)


def value(x):
    return x.val if isinstance(x, Jet) else np.asarray(x)


def sqrt(x):
    if isinstance(x, Jet):
        s = np.sqrt(x.val)
        return x.apply(s, 0.5 / s, -0.25 / (s * x.val))
    return np.sqrt(x)


def exp(x):
    if isinstance(x, Jet):
        e = np.exp(x.val)
        return x.apply(e, e, e)
    return np.exp(x)


def log(x):
    if isinstance(x, Jet):
        v = x.val
        return x.apply(np.log(v), 1.0 / v, -1.0 / v**2)
    return np.log(x)


def sin(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.val), np.cos(x.val)
        return x.apply(s, c, -s)
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.val), np.cos(x.val)
        return x.apply(c, -s, -c)
    return np.cos(x)


def conj(x):
    return x.conj() if isinstance(x, Jet) else np.conj(x)


def einsum(spec: str, a, b):
    """Two-operand einsum with the product rule applied to jet operands."""
    if not isinstance(a, Jet) and not isinstance(b, Jet):
        return np.einsum(spec, a, b)
    lhs, out = spec.split("->")
    sa, sb = lhs.split(",")
    Y, Z = _D1, _D2
    if isinstance(a, Jet) and not isinstance(b, Jet):
        d2 = None if a.d2 is None else np.einsum(f"{sa}{Y}{Z},{sb}->{out}{Y}{Z}", a.d2, b)
        return Jet(np.einsum(spec, a.val, b), np.einsum(f"{sa}{Y},{sb}->{out}{Y}", a.d1, b), d2)
    if isinstance(b, Jet) and not isinstance(a, Jet):
        d2 = None if b.d2 is None else np.einsum(f"{sa},{sb}{Y}{Z}->{out}{Y}{Z}", a, b.d2)
        return Jet(np.einsum(spec, a, b.val), np.einsum(f"{sa},{sb}{Y}->{out}{Y}", a, b.d1), d2)
    val = np.einsum(spec, a.val, b.val)
    d1 = np.einsum(f"{sa}{Y},{sb}->{out}{Y}", a.d1, b.val) + np.einsum(
        f"{sa},{sb}{Y}->{out}{Y}", a.val, b.d1
    )
    d2 = None
    if a.d2 is not None and b.d2 is not None:
        d2 = (
            np.einsum(f"{sa}{Y}{Z},{sb}->{out}{Y}{Z}", a.d2, b.val)
            + np.einsum(f"{sa},{sb}{Y}{Z}->{out}{Y}{Z}", a.val, b.d2)
            + np.einsum(f"{sa}{Y},{sb}{Z}->{out}{Y}{Z}", a.d1, b.d1)
            + np.einsum(f"{sa}{Z},{sb}{Y}->{out}{Y}{Z}", a.d1, b.d1)
        )
    return Jet(val, d1, d2)


def matmul(a, b):
    na, nb = value(a).ndim, value(b).ndim
    if na == 2 and nb == 2:
        return einsum("ij,jk->ik", a, b)
    if na == 2 and nb == 1:
        return einsum("ij,j->i", a, b)
    if na == 1 and nb == 2:
        return einsum("j,jk->k", a, b)
    if na == 1 and nb == 1:
        return einsum("i,i->", a, b)
    raise ValueError("matmul supports 1-D and 2-D operands only")


def dot(a, b):
    return einsum("i,i->", a, b)


def _template(items):
    for it in items:
        if isinstance(it, Jet):
            return it
    return None


def stack(items, axis: int = 0):
    t = _template(items)
    if t is None:
        return np.stack(items, axis=axis)
    jets = [t._coerce(it) for it in items]
    ndim = jets[0].ndim + 1
    ax = axis % ndim
    d2 = None
    if all(j.d2 is not None for j in jets):
        d2 = np.stack([j.d2 for j in jets], axis=ax)
    return Jet(
        np.stack([j.val for j in jets], axis=ax), np.stack([j.d1 for j in jets], axis=ax), d2
    )


def concatenate(items, axis: int = 0):
    t = _template(items)
    if t is None:
        return np.concatenate(items, axis=axis)
    jets = [t._coerce(it) for it in items]
    ax = axis % jets[0].ndim
    d2 = None
    if all(j.d2 is not None for j in jets):
        d2 = np.concatenate([j.d2 for j in jets], axis=ax)
    return Jet(
        np.concatenate([j.val for j in jets], axis=ax),
        np.concatenate([j.d1 for j in jets], axis=ax),
        d2,
    )


def block(rows):
    """2-D block assembly, ``rows`` being a list of lists of 2-D operands."""
    return concatenate([concatenate(r, axis=1) for r in rows], axis=0)


def derivatives(field, z, order: int = 2):
    """Exact value, gradient and Hessian of ``field`` at ``z`` (trailing derivative axes)."""
    out = field(Jet.variables(z, order=order))
    if not isinstance(out, Jet):
        out = np.asarray(out)
        n = len(z)
        return out, np.zeros(out.shape + (n,)), np.zeros(out.shape + (n, n)) if order >= 2 else None
    return out.val, out.d1, out.d2
