"""Forward-mode automatic differentiation for scalar pipelines.

The differentiable scalar is a dual number whose derivative part is a numpy
tangent vector: seeding the j-th input with the j-th basis vector makes every
downstream value carry the gradient row d(value)/d(inputs).  A constant
carries the scalar tangent ``0.0``, which broadcasts against any seeded
width, so mixed float/DiffScalar arithmetic needs no width bookkeeping.

Value semantics: every operation computes its primal with the same python
``math`` call and the same evaluation order as plain-float code, so the
``value`` component of any expression is bit-for-bit identical to evaluating
the expression without derivatives.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "DiffScalar",
    "lift",
    "seed_vector",
    "value_of",
    "tangent_of",
    "sin",
    "cos",
    "sqrt",
    "asin",
    "acos",
    "atan2",
    "absolute",
    "minimum",
    "maximum",
    "jacobian",
    "batch_jacobian",
]

# Cap for one-sided derivatives where the true derivative diverges
# (acos/asin at |u|=1, sqrt at 0).  Keeps optimization loops finite.
_DERIVATIVE_CAP = 1e8


class DiffScalar:
    """Dual number: a float value plus a tangent vector d(value)/d(seeds).

    ``grad`` is either a numpy vector of the seeded input width or the
    scalar ``0.0`` for quantities with no input dependence.
    """

    __slots__ = ("value", "grad")

    def __init__(self, value, grad=0.0):
        self.value = float(value)
        self.grad = grad

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, DiffScalar):
            return DiffScalar(self.value + other.value, self.grad + other.grad)
        return DiffScalar(self.value + other, self.grad)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DiffScalar):
            return DiffScalar(self.value - other.value, self.grad - other.grad)
        return DiffScalar(self.value - other, self.grad)

    def __rsub__(self, other):
        return DiffScalar(other - self.value, -self.grad)

    def __mul__(self, other):
        if isinstance(other, DiffScalar):
            return DiffScalar(
                self.value * other.value,
                self.grad * other.value + other.grad * self.value,
            )
        return DiffScalar(self.value * other, self.grad * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, DiffScalar):
            ov = other.value
            return DiffScalar(
                self.value / ov,
                (self.grad * ov - other.grad * self.value) / (ov * ov),
            )
        return DiffScalar(self.value / other, self.grad / other)

    def __rtruediv__(self, other):
        v = self.value
        return DiffScalar(other / v, self.grad * (-other / (v * v)))

    def __neg__(self):
        return DiffScalar(-self.value, -self.grad)

    def __pos__(self):
        return self

    def __pow__(self, exponent):
        v = self.value
        return DiffScalar(v**exponent, self.grad * (exponent * v ** (exponent - 1)))

    def __abs__(self):
        # Kink at 0 resolves to the positive branch: d|x|/dx = +1.
        if self.value < 0:
            return DiffScalar(-self.value, -self.grad)
        return DiffScalar(self.value, self.grad)

    # -- comparisons (on the primal value) ----------------------------------

    def __lt__(self, other):
        return self.value < value_of(other)

    def __le__(self, other):
        return self.value <= value_of(other)

    def __gt__(self, other):
        return self.value > value_of(other)

    def __ge__(self, other):
        return self.value >= value_of(other)

    def __eq__(self, other):
        return self.value == value_of(other)

    __hash__ = None

    # -- transcendental methods (named after numpy ufuncs so object-dtype
    #    arrays dispatch here) ----------------------------------------------

    def sin(self):
        return DiffScalar(math.sin(self.value), self.grad * math.cos(self.value))

    def cos(self):
        return DiffScalar(math.cos(self.value), self.grad * -math.sin(self.value))

    def sqrt(self):
        r = math.sqrt(self.value)
        scale = 0.5 / r if r > 0.5 / _DERIVATIVE_CAP else _DERIVATIVE_CAP
        return DiffScalar(r, self.grad * scale)

    def arcsin(self):
        v = self.value
        d = math.sqrt(max(1.0 - v * v, 0.0))
        scale = 1.0 / d if d > 1.0 / _DERIVATIVE_CAP else _DERIVATIVE_CAP
        return DiffScalar(math.asin(v), self.grad * scale)

    def arccos(self):
        v = self.value
        d = math.sqrt(max(1.0 - v * v, 0.0))
        scale = 1.0 / d if d > 1.0 / _DERIVATIVE_CAP else _DERIVATIVE_CAP
        return DiffScalar(math.acos(v), self.grad * -scale)

    def arctan2(self, other):
        if isinstance(other, DiffScalar):
            ov, og = other.value, other.grad
        else:
            ov, og = other, 0.0
        denom = self.value * self.value + ov * ov
        return DiffScalar(
            math.atan2(self.value, ov),
            (self.grad * ov - og * self.value) / denom,
        )

    def __repr__(self):
        return f"DiffScalar({self.value!r}, grad={self.grad!r})"


# -- float/DiffScalar dispatch helpers --------------------------------------


def value_of(x):
    """Primal value of a plain number or DiffScalar."""
    if isinstance(x, DiffScalar):
        return x.value
    return float(x)


def tangent_of(x, width):
    """Tangent vector of ``x`` as a dense length-``width`` array."""
    if isinstance(x, DiffScalar):
        g = x.grad
        if isinstance(g, np.ndarray):
            return np.asarray(g, dtype=float)
        return np.full(width, float(g))
    return np.zeros(width)


def lift(x, seed_index=None, num_inputs=None):
    """Wrap a float as a constant, or as the ``seed_index``-th independent input."""
    if seed_index is None:
        return DiffScalar(x, 0.0)
    if num_inputs is None:
        raise ValueError("num_inputs is required when seeding an input")
    if not 0 <= seed_index < num_inputs:
        raise IndexError(f"seed_index {seed_index} out of range for {num_inputs} inputs")
    g = np.zeros(num_inputs)
    g[seed_index] = 1.0
    return DiffScalar(x, g)


def seed_vector(values):
    """Seed each element of ``values`` as an independent input (width = len)."""
    values = np.asarray(values, dtype=float).ravel()
    k = values.size
    out = []
    for j, v in enumerate(values):
        g = np.zeros(k)
        g[j] = 1.0
        out.append(DiffScalar(v, g))
    return out


def sin(x):
    return x.sin() if isinstance(x, DiffScalar) else math.sin(x)


def cos(x):
    return x.cos() if isinstance(x, DiffScalar) else math.cos(x)


def sqrt(x):
    return x.sqrt() if isinstance(x, DiffScalar) else math.sqrt(x)


def asin(x):
    return x.arcsin() if isinstance(x, DiffScalar) else math.asin(x)


def acos(x):
    return x.arccos() if isinstance(x, DiffScalar) else math.acos(x)


def atan2(y, x):
    if isinstance(y, DiffScalar):
        return y.arctan2(x)
    if isinstance(x, DiffScalar):
        denom = y * y + x.value * x.value
        return DiffScalar(math.atan2(y, x.value), x.grad * (-y / denom))
    return math.atan2(y, x)


def absolute(x):
    return abs(x)


def minimum(a, b):
    """Smaller argument by value; ties resolve to the first argument."""
    return a if value_of(a) <= value_of(b) else b


def maximum(a, b):
    """Larger argument by value; ties resolve to the first argument."""
    return a if value_of(a) >= value_of(b) else b


# -- Jacobian drivers --------------------------------------------------------


def _row_of(y, width, label):
    v = value_of(y)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value in jacobian output {label}")
    row = tangent_of(y, width)
    if not np.all(np.isfinite(row)):
        raise ValueError(f"non-finite derivative in jacobian output {label}")
    return row


def jacobian(f, x):
    """Dense Jacobian J[i][j] = d f_i / d x_j from one seeded forward pass.

    ``f`` receives a 1-D object array of seeded DiffScalars and returns a
    sequence (any nesting) of outputs; the result has one row per flattened
    output.
    """
    x = np.asarray(x, dtype=float).ravel()
    inputs = np.array(seed_vector(x), dtype=object)
    outputs = np.ravel(np.asarray(f(inputs), dtype=object))
    jac = np.empty((outputs.size, x.size))
    for i, y in enumerate(outputs):
        jac[i] = _row_of(y, x.size, f"row {i}")
    return jac


def batch_jacobian(f, thetas, dof, batch_size=None):
    """Per-configuration Jacobians of a batched map, one per batch element.

    Every configuration is seeded in the same ``dof``-wide tangent space.
    Output element k depends only on configuration k, so a single forward
    evaluation yields all per-element Jacobians; the cross-element blocks
    are identically zero and never materialized.

    ``f`` maps a flat (b*dof,) object array to a (b, p) array of outputs;
    returns a list of b arrays of shape (p, dof).
    """
    flat = np.asarray(thetas, dtype=float).ravel()
    if dof == 0:
        if batch_size is None:
            raise ValueError("batch_size is required when dof == 0")
        b = batch_size
        inputs = np.array([], dtype=object)
    else:
        if flat.size % dof:
            raise ValueError(f"theta batch of length {flat.size} is not a multiple of dof {dof}")
        b = flat.size // dof
        if batch_size is not None and batch_size != b:
            raise ValueError(f"batch_size {batch_size} inconsistent with {flat.size} thetas of dof {dof}")
        seeds = []
        for j, v in enumerate(flat):
            g = np.zeros(dof)
            g[j % dof] = 1.0
            seeds.append(DiffScalar(v, g))
        inputs = np.array(seeds, dtype=object)
    outputs = np.asarray(f(inputs), dtype=object).reshape(b, -1)
    jacs = []
    for k in range(b):
        jac = np.empty((outputs.shape[1], dof))
        for i, y in enumerate(outputs[k]):
            jac[i] = _row_of(y, dof, f"batch {k}, row {i}")
        jacs.append(jac)
    return jacs
