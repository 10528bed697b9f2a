"""Second-order forward-mode differentiation.

A :class:`Jet2` carries the value, gradient and Hessian of a scalar with
respect to ``d`` active variables. Arithmetic and the elementary functions
below propagate all three with the exact first and second order chain
rules, so a field evaluated on seeded variable jets returns its exact
derivatives at the point. :class:`Jet1` drops the Hessian for callers
that only need gradients.
"""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Protocol, Union, runtime_checkable

import numpy as np
from numpy.typing import NDArray

from algemech.exceptions import DimensionError, DomainError

FloatArray = NDArray[np.float64]
Scalar = Union[float, "Jet1", "Jet2"]


@dataclass(frozen=True, slots=True, eq=False)
class Jet2:
    """Value, gradient and Hessian of a scalar at a point."""

    value: float
    grad: FloatArray
    hess: FloatArray

    # numpy scalars defer to the reflected operators below
    __array_ufunc__ = None

    @classmethod
    def variable(cls, value: float, index: int, dim: int) -> "Jet2":
        """Seed the ``index``-th active variable."""
        grad = np.zeros(dim)
        grad[index] = 1.0
        return cls(float(value), grad, np.zeros((dim, dim)))

    @classmethod
    def constant(cls, value: float, dim: int) -> "Jet2":
        return cls(float(value), np.zeros(dim), np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return int(self.grad.shape[0])

    def _chain(self, f0: float, f1: float, f2: float) -> "Jet2":
        """Compose with a univariate g given g(u), g'(u), g''(u)."""
        g = self.grad
        return Jet2(f0, f1 * g, f2 * np.multiply.outer(g, g) + f1 * self.hess)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, -self.hess)

    def __pos__(self) -> "Jet2":
        return self

    def __add__(self, other: Scalar) -> "Jet2":
        if isinstance(other, Jet2):
            return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)
        return Jet2(self.value + _constant(other), self.grad, self.hess)

    def __radd__(self, other: float) -> "Jet2":
        return Jet2(float(other) + self.value, self.grad, self.hess)

    def __sub__(self, other: Scalar) -> "Jet2":
        if isinstance(other, Jet2):
            return Jet2(self.value - other.value, self.grad - other.grad, self.hess - other.hess)
        return Jet2(self.value - _constant(other), self.grad, self.hess)

    def __rsub__(self, other: float) -> "Jet2":
        return Jet2(float(other) - self.value, -self.grad, -self.hess)

    def __mul__(self, other: Scalar) -> "Jet2":
        if isinstance(other, Jet2):
            u, v = self, other
            cross = np.multiply.outer(u.grad, v.grad)
            return Jet2(
                u.value * v.value,
                u.value * v.grad + v.value * u.grad,
                u.value * v.hess + v.value * u.hess + (cross + cross.T),
            )
        c = _constant(other)
        return Jet2(self.value * c, self.grad * c, self.hess * c)

    def __rmul__(self, other: float) -> "Jet2":
        c = float(other)
        return Jet2(c * self.value, c * self.grad, c * self.hess)

    def __truediv__(self, other: Scalar) -> "Jet2":
        if isinstance(other, Jet2):
            return self * other.reciprocal()
        c = _constant(other)
        if c == 0.0:
            raise DomainError("division by zero")
        return Jet2(self.value / c, self.grad / c, self.hess / c)

    def __rtruediv__(self, other: float) -> "Jet2":
        return float(other) * self.reciprocal()

    def __pow__(self, exponent: Scalar) -> "Jet2":
        return power(self, exponent)

    def __rpow__(self, base: float) -> "Jet2":
        return power(float(base), self)

    def reciprocal(self) -> "Jet2":
        u = self.value
        if u == 0.0:
            raise DomainError("division by zero")
        return self._chain(1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u))

    def __repr__(self) -> str:
        return f"Jet2(value={self.value!r}, grad={self.grad.tolist()!r}, hess={self.hess.tolist()!r})"


@dataclass(frozen=True, slots=True, eq=False)
class Jet1:
    """Value and gradient of a scalar at a point, without the Hessian."""

    value: float
    grad: FloatArray

    __array_ufunc__ = None

    @classmethod
    def variable(cls, value: float, index: int, dim: int) -> "Jet1":
        grad = np.zeros(dim)
        grad[index] = 1.0
        return cls(float(value), grad)

    @classmethod
    def constant(cls, value: float, dim: int) -> "Jet1":
        return cls(float(value), np.zeros(dim))

    @property
    def dim(self) -> int:
        return int(self.grad.shape[0])

    def _chain(self, f0: float, f1: float, f2: float) -> "Jet1":
        return Jet1(f0, f1 * self.grad)

    def __neg__(self) -> "Jet1":
        return Jet1(-self.value, -self.grad)

    def __pos__(self) -> "Jet1":
        return self

    def __add__(self, other: Scalar) -> "Jet1":
        if isinstance(other, Jet1):
            return Jet1(self.value + other.value, self.grad + other.grad)
        return Jet1(self.value + _constant(other), self.grad)

    def __radd__(self, other: float) -> "Jet1":
        return Jet1(float(other) + self.value, self.grad)

    def __sub__(self, other: Scalar) -> "Jet1":
        if isinstance(other, Jet1):
            return Jet1(self.value - other.value, self.grad - other.grad)
        return Jet1(self.value - _constant(other), self.grad)

    def __rsub__(self, other: float) -> "Jet1":
        return Jet1(float(other) - self.value, -self.grad)

    def __mul__(self, other: Scalar) -> "Jet1":
        if isinstance(other, Jet1):
            return Jet1(self.value * other.value, self.value * other.grad + other.value * self.grad)
        c = _constant(other)
        return Jet1(self.value * c, self.grad * c)

    def __rmul__(self, other: float) -> "Jet1":
        c = float(other)
        return Jet1(c * self.value, c * self.grad)

    def __truediv__(self, other: Scalar) -> "Jet1":
        if isinstance(other, Jet1):
            return self * other.reciprocal()
        c = _constant(other)
        if c == 0.0:
            raise DomainError("division by zero")
        return Jet1(self.value / c, self.grad / c)

    def __rtruediv__(self, other: float) -> "Jet1":
        return float(other) * self.reciprocal()

    def __pow__(self, exponent: Scalar) -> Scalar:
        return power(self, exponent)

    def __rpow__(self, base: float) -> Scalar:
        return power(float(base), self)

    def reciprocal(self) -> "Jet1":
        u = self.value
        if u == 0.0:
            raise DomainError("division by zero")
        return Jet1(1.0 / u, (-1.0 / (u * u)) * self.grad)

    def __repr__(self) -> str:
        return f"Jet1(value={self.value!r}, grad={self.grad.tolist()!r})"


JETS = (Jet1, Jet2)


def _constant(other: Scalar) -> float:
    if isinstance(other, JETS):
        raise TypeError("cannot combine jets of different order")
    return float(other)


def _value(u: Scalar) -> float:
    return u.value if isinstance(u, JETS) else float(u)


def sin(u: Scalar) -> Scalar:
    if isinstance(u, JETS):
        s, c = math.sin(u.value), math.cos(u.value)
        return u._chain(s, c, -s)
    return math.sin(u)


def cos(u: Scalar) -> Scalar:
    if isinstance(u, JETS):
        s, c = math.sin(u.value), math.cos(u.value)
        return u._chain(c, -s, -c)
    return math.cos(u)


def exp(u: Scalar) -> Scalar:
    try:
        e = math.exp(_value(u))
    except OverflowError as err:
        raise DomainError("exp overflow") from err
    if isinstance(u, JETS):
        return u._chain(e, e, e)
    return e


def log(u: Scalar) -> Scalar:
    v = _value(u)
    if v <= 0.0:
        raise DomainError("log of non-positive value")
    if isinstance(u, JETS):
        return u._chain(math.log(v), 1.0 / v, -1.0 / (v * v))
    return math.log(v)


def sqrt(u: Scalar) -> Scalar:
    v = _value(u)
    if v < 0.0:
        raise DomainError("sqrt of negative value")
    if isinstance(u, JETS):
        if v == 0.0:
            raise DomainError("sqrt is not differentiable at 0")
        r = math.sqrt(v)
        return u._chain(r, 0.5 / r, -0.25 / (r * v))
    return math.sqrt(v)


def _int_power(u: Scalar, k: int) -> Scalar:
    v = _value(u)
    if k < 0 and v == 0.0:
        raise DomainError("division by zero")
    if isinstance(u, JETS) and k == 0:
        return type(u).constant(1.0, u.dim)
    try:
        r = float(v**k)
        if not isinstance(u, JETS):
            return r
        f1 = k * v ** (k - 1)
        f2 = k * (k - 1) * v ** (k - 2) if k != 1 else 0.0
    except OverflowError as err:
        raise DomainError("power overflow") from err
    return u._chain(r, float(f1), float(f2))


def power(base: Scalar, exponent: Scalar) -> Scalar:
    """``base ^ exponent``.

    Integer-valued constant exponents use the exact integer power, so
    ``x^2`` and ``x*x`` agree. Any other exponent needs a positive base.
    """
    if not isinstance(exponent, JETS):
        k = float(exponent)
        if k.is_integer() and abs(k) <= 1024:
            return _int_power(base, int(k))
        v = _value(base)
        if v < 0.0 or (v == 0.0 and (k < 0 or isinstance(base, JETS))):
            raise DomainError("non-integer power of non-positive base")
        try:
            r = v**k
            if isinstance(base, JETS):
                return base._chain(r, k * v ** (k - 1), k * (k - 1) * v ** (k - 2))
        except OverflowError as err:
            raise DomainError("power overflow") from err
        return float(r)
    if _value(base) <= 0.0:
        raise DomainError("variable power of non-positive base")
    return exp(exponent * log(base))


@runtime_checkable
class ScalarField(Protocol):
    """A scalar function of ``arity`` ordered variables.

    Called with floats it returns a float; called with jets it returns a jet.
    """

    @property
    def arity(self) -> int: ...

    def __call__(self, args: Sequence[Scalar]) -> Scalar: ...


@dataclass(frozen=True)
class FunctionField:
    """Wrap a Python closure as a scalar field."""

    function: Callable[[Sequence[Scalar]], Scalar]
    arity: int
    name: str = "<closure>"

    def __call__(self, args: Sequence[Scalar]) -> Scalar:
        return self.function(args)


@dataclass(frozen=True)
class ConstantField:
    """Scalar field with a fixed value."""

    value: float
    arity: int
    name: str = field(default="const")

    def __call__(self, args: Sequence[Scalar]) -> Scalar:
        return self.value


def _check_point(f: ScalarField, point: Sequence[float] | FloatArray) -> FloatArray:
    x = np.asarray(point, dtype=np.float64).reshape(-1)
    if x.shape[0] != f.arity:
        raise DimensionError(f"field expects {f.arity} variables, got {x.shape[0]}")
    return x


def evaluate(f: ScalarField, point: Sequence[float] | FloatArray) -> float:
    """Evaluate ``f`` on plain floats."""
    x = _check_point(f, point)
    result = f([float(v) for v in x])
    return _value(result)


def jet_eval(f: ScalarField, point: Sequence[float] | FloatArray) -> Jet2:
    """Exact value, gradient and Hessian of ``f`` at ``point``.

    Args:
        f: Scalar field
        point: Coordinates, one per variable of ``f``

    Returns:
        Jet2 at the point

    Raises:
        DimensionError: If the point length differs from the field's arity
        DomainError: If evaluation leaves a function's domain
    """
    x = _check_point(f, point)
    d = x.shape[0]
    seeds = [Jet2.variable(float(v), i, d) for i, v in enumerate(x)]
    result = f(seeds)
    if isinstance(result, Jet2):
        return result
    return Jet2.constant(float(result), d)


def grad_eval(f: ScalarField, point: Sequence[float] | FloatArray) -> Jet1:
    """Value and gradient of ``f`` at ``point``, skipping the Hessian."""
    x = _check_point(f, point)
    d = x.shape[0]
    result = f([Jet1.variable(float(v), i, d) for i, v in enumerate(x)])
    if isinstance(result, Jet1):
        return result
    return Jet1.constant(_value(result), d)


def finite_diff_check(f: ScalarField, point: Sequence[float] | FloatArray, h: float) -> float:
    """Max abs deviation between jet derivatives and central differences.

    The gradient is checked against central differences of values; the
    Hessian against central differences of jet gradients.

    Args:
        f: Scalar field
        point: Evaluation point
        h: Step, must be positive

    Returns:
        Largest absolute deviation over gradient and Hessian entries
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = _check_point(f, point)
    d = x.shape[0]
    if d == 0:
        return 0.0

    jet = jet_eval(f, x)
    grad_fd = np.zeros(d)
    hess_fd = np.zeros((d, d))
    for i in range(d):
        step = np.zeros(d)
        step[i] = h
        grad_fd[i] = (evaluate(f, x + step) - evaluate(f, x - step)) / (2.0 * h)
        hess_fd[:, i] = (jet_eval(f, x + step).grad - jet_eval(f, x - step).grad) / (2.0 * h)

    return float(max(np.max(np.abs(jet.grad - grad_fd)), np.max(np.abs(jet.hess - hess_fd))))
