"""Tulczyjew-triple side of the dynamics.

Coordinates: (x, y) on E, (x, xi) on E*, (x, y, p, pi) on T*E and
(x, xi, p, pi) on T*E*. Tangent vectors carry (dx, dfiber).

The linear Poisson bivector on E* is assembled from its defining
evaluations on coordinate functions:

    Lambda(d xi_a, d xi_b) = <xi, [e_a, e_b]> = C^c_ab(x) xi_c
    Lambda(d xi_a, d x^i)  = rho(e_a)(x^i)   = rho^i_a(x)
    Lambda(d x^i, d x^j)   = 0

and the Hamiltonian-type map is X = Lambda~(theta) = theta -| Lambda, i.e.
X^l = theta_k Lambda(dz^k, dz^l).
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
import structlog

from algemech.core.algebroid import AlgebroidModel, PhasePoint, SectionE, bracket, dE_function
from algemech.core.expr import ExprField, FieldDomain, variable_names
from algemech.core.jet import FloatArray, Jet2, ScalarField, evaluate, grad_eval, jet_eval
from algemech.exceptions import (
    BasePointMismatchError,
    DimensionError,
    SideMismatchError,
    SingularHessianError,
)

logger = structlog.get_logger(__name__)

HESSIAN_CONDITION_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class Covector:
    """Element of T*E or T*E*: base point, base momenta p, fiber momenta pi."""

    base: PhasePoint
    p: FloatArray
    pi: FloatArray

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", np.asarray(self.p, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "pi", np.asarray(self.pi, dtype=np.float64).reshape(-1))
        if self.p.shape[0] != self.base.n or self.pi.shape[0] != self.base.m:
            raise DimensionError("covector components do not match its base point")

    @property
    def components(self) -> FloatArray:
        return np.concatenate([self.p, self.pi])

    @classmethod
    def from_components(cls, base: PhasePoint, components: FloatArray) -> "Covector":
        return cls(base, components[: base.n], components[base.n :])

    def __repr__(self) -> str:
        return f"Covector({self.base!r}, p={self.p.tolist()}, pi={self.pi.tolist()})"


@dataclass(frozen=True, eq=False)
class TangentVec:
    """Element of TE or TE*: base point, dx, dfiber."""

    base: PhasePoint
    dx: FloatArray
    dfiber: FloatArray

    def __post_init__(self) -> None:
        object.__setattr__(self, "dx", np.asarray(self.dx, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "dfiber", np.asarray(self.dfiber, dtype=np.float64).reshape(-1))
        if self.dx.shape[0] != self.base.n or self.dfiber.shape[0] != self.base.m:
            raise DimensionError("tangent vector components do not match its base point")

    @property
    def components(self) -> FloatArray:
        return np.concatenate([self.dx, self.dfiber])

    @classmethod
    def from_components(cls, base: PhasePoint, components: FloatArray) -> "TangentVec":
        return cls(base, components[: base.n], components[base.n :])

    def __repr__(self) -> str:
        return f"TangentVec({self.base!r}, dx={self.dx.tolist()}, dfiber={self.dfiber.tolist()})"


def _check_field(f: ScalarField, p: PhasePoint) -> None:
    names = getattr(f, "variables", None)
    if names is not None and tuple(names) != variable_names(p.side, p.n, p.m):
        raise SideMismatchError(
            f"field over {', '.join(names) or 'no variables'} evaluated at a point of {p.side.value}"
        )


def field_jet(f: ScalarField, p: PhasePoint) -> Jet2:
    """Jet of a field on E or E* at a phase point."""
    _check_field(f, p)
    return jet_eval(f, p.coords)


def field_gradient(f: ScalarField, p: PhasePoint) -> FloatArray:
    """Gradient of a field on E or E* at a phase point."""
    _check_field(f, p)
    return grad_eval(f, p.coords).grad


def differential(f: ScalarField, p: PhasePoint) -> Covector:
    """df at p as a covector."""
    return Covector.from_components(p, field_gradient(f, p))


def vertical_derivative(f: ScalarField, p: PhasePoint) -> FloatArray:
    """Fiber gradient of f at p."""
    return field_gradient(f, p)[p.n :]


def pairing(theta: Covector, X: TangentVec) -> float:
    """<theta, X> for a covector and a vector at the same point."""
    if not theta.base.same_as(X.base):
        raise BasePointMismatchError(f"covector at {theta.base!r}, vector at {X.base!r}")
    return float(theta.p @ X.dx + theta.pi @ X.dfiber)


def bivector_matrix(M: AlgebroidModel, p: PhasePoint) -> FloatArray:
    """B[k, l] = Lambda(dz^k, dz^l) in coordinates (x, xi)."""
    M.check_point(p, FieldDomain.ESTAR)
    n, m = M.n, M.m
    B = np.zeros((n + m, n + m))
    # Lambda(d iota_{e_a}, d iota_{e_b}) = iota_{[e_a, e_b]}
    B[n:, n:] = (p.fiber @ M.structure(p.x).reshape(m, m * m)).reshape(m, m)
    # Lambda(d iota_{e_a}, d x^i) = rho(e_a) x^i
    xi_x = M.anchor(p.x).T
    B[n:, :n] = xi_x
    B[:n, n:] = -xi_x.T
    return B


def bivector_from_brackets(M: AlgebroidModel, p: PhasePoint) -> FloatArray:
    """Lambda(dz^k, dz^l) entry by entry from the bracket and anchor of frame sections.

    Independent of the block layout in :func:`bivector_matrix`, which must agree with it.
    """
    M.check_point(p, FieldDomain.ESTAR)
    n, m = M.n, M.m
    B = np.zeros((n + m, n + m))
    frames = [SectionE.frame(a, n, m) for a in range(m)]
    coordinates = [M.field(f"x{i + 1}", FieldDomain.BASE) for i in range(n)]
    for a, e_a in enumerate(frames):
        for b, e_b in enumerate(frames):
            B[n + a, n + b] = float(p.fiber @ bracket(M, e_a, e_b, p.x))
        for i, x_i in enumerate(coordinates):
            value = dE_function(M, x_i, e_a, p.x)
            B[n + a, i] = value
            B[i, n + a] = -value
    return B


def lambda_matrix(M: AlgebroidModel, p: PhasePoint) -> FloatArray:
    """Matrix P of Lambda~ at a point of E*, so that X = P @ theta.

    P[l, k] = Lambda(dz^k, dz^l); P is skew-symmetric.
    """
    return bivector_matrix(M, p).T


def bivector(M: AlgebroidModel, p: PhasePoint, theta: Covector, theta2: Covector) -> float:
    """Lambda(theta, theta') at p."""
    for t in (theta, theta2):
        if not t.base.same_as(p):
            raise BasePointMismatchError(f"covector at {t.base!r}, expected {p!r}")
    return float(theta.components @ bivector_matrix(M, p) @ theta2.components)


def hamiltonian_field(M: AlgebroidModel, H: ScalarField, p: PhasePoint) -> TangentVec:
    """X_H = Lambda~(dH) at a point of E*."""
    M.check_point(p, FieldDomain.ESTAR)
    return TangentVec.from_components(p, lambda_matrix(M, p) @ field_gradient(H, p))


Force = Callable[[PhasePoint], PhasePoint]


@dataclass(frozen=True)
class FiberForce:
    """Force E* -> E* over the identity, one expression per fiber component."""

    components: tuple[ScalarField, ...]

    def __call__(self, p: PhasePoint) -> PhasePoint:
        if len(self.components) != p.m:
            raise DimensionError(f"force has {len(self.components)} components, fiber has {p.m}")
        for f in self.components:
            _check_field(f, p)
        values = [evaluate(f, p.coords) for f in self.components]
        return PhasePoint(FieldDomain.ESTAR, p.x, np.array(values, dtype=np.float64))


def forced_hamiltonian_field(
    M: AlgebroidModel, H: ScalarField, force: Force, p: PhasePoint
) -> TangentVec:
    """X_H minus the vertical lift of force(p)."""
    X = hamiltonian_field(M, H, p)
    phi = force(p)
    if phi.side != FieldDomain.ESTAR or not np.array_equal(phi.x, p.x):
        raise BasePointMismatchError(f"force moved the base point from {p.x.tolist()} to {phi.x.tolist()}")
    if phi.m != p.m:
        raise DimensionError("force fiber dimension differs from the model")
    return TangentVec(p, X.dx, X.dfiber - phi.fiber)


def r_map(theta: Covector) -> Covector:
    """Canonical isomorphism T*E -> T*E*: (x, y, p, pi) -> (x, xi=pi, -p, y)."""
    if theta.base.side != FieldDomain.E:
        raise SideMismatchError("r_map expects a covector on E")
    base = PhasePoint.on_estar(theta.base.x, theta.pi)
    return Covector(base, -theta.p, theta.base.fiber)


def r_inv(theta: Covector) -> Covector:
    """Inverse of :func:`r_map`: (x, xi, p, pi) -> (x, y=pi, -p, xi)."""
    if theta.base.side != FieldDomain.ESTAR:
        raise SideMismatchError("r_inv expects a covector on E*")
    base = PhasePoint.on_e(theta.base.x, theta.pi)
    return Covector(base, -theta.p, theta.base.fiber)


def epsilon_map(M: AlgebroidModel, theta: Covector) -> TangentVec:
    """epsilon_E(theta) = Lambda~(R_E(theta)), a vector at (x, xi=pi)."""
    M.check_point(theta.base, FieldDomain.E)
    image = r_map(theta)
    return TangentVec.from_components(image.base, lambda_matrix(M, image.base) @ image.components)


def legendre_map(L: ScalarField, a: PhasePoint) -> PhasePoint:
    """lambda_L(a) = (x, dL/dy)."""
    if a.side != FieldDomain.E:
        raise SideMismatchError("the Legendre map starts on E")
    return PhasePoint.on_estar(a.x, vertical_derivative(L, a))


def _legendre_tangent(jet: Jet2, a: PhasePoint, X: TangentVec) -> TangentVec:
    n = a.n
    dxi = jet.hess[n:, :n] @ X.dx + jet.hess[n:, n:] @ X.dfiber
    return TangentVec(PhasePoint.on_estar(a.x, jet.grad[n:]), X.dx, dxi)


def legendre_tangent(L: ScalarField, a: PhasePoint, X: TangentVec) -> TangentVec:
    """T lambda_L (X): chain rule through the Hessian of L."""
    if not X.base.same_as(a):
        raise BasePointMismatchError(f"vector at {X.base!r}, expected {a!r}")
    return _legendre_tangent(field_jet(L, a), a, X)


def el_residual_tt(
    M: AlgebroidModel, L: ScalarField, a: PhasePoint, X: TangentVec, jet: Jet2 | None = None
) -> FloatArray:
    """T lambda_L (X) - epsilon_E(dL(a)), components (dx-part, dxi-part).

    ``jet`` may carry the already evaluated jet of L at a.
    """
    M.check_point(a, FieldDomain.E)
    if not X.base.same_as(a):
        raise BasePointMismatchError(f"vector at {X.base!r}, expected {a!r}")
    if jet is None:
        jet = field_jet(L, a)
    lhs = _legendre_tangent(jet, a, X)
    rhs = epsilon_map(M, Covector.from_components(a, jet.grad))
    return lhs.components - rhs.components


def admissibility_residual(M: AlgebroidModel, a: PhasePoint, X: TangentVec) -> FloatArray:
    """rho(x) y - dx."""
    M.check_point(a, FieldDomain.E)
    if not X.base.same_as(a):
        raise BasePointMismatchError(f"vector at {X.base!r}, expected {a!r}")
    return M.anchor(a.x) @ a.fiber - X.dx


def solve_fiber_hessian(W: FloatArray, rhs: FloatArray, time: float | None = None) -> FloatArray:
    """Solve W v = rhs for the fiber Hessian W of a Lagrangian.

    One SVD gives both the 2-norm condition number and the solution.

    Raises:
        SingularHessianError: If W is singular or too badly conditioned
    """
    if W.shape[0] == 0:
        return np.zeros(0)
    if not np.all(np.isfinite(W)):
        raise SingularHessianError("fiber Hessian of the Lagrangian is singular", time=time)
    try:
        U, s, Vt = np.linalg.svd(W)
    except np.linalg.LinAlgError as e:
        raise SingularHessianError(f"fiber Hessian solve failed: {e}", time=time) from e
    if s[-1] == 0.0 or s[0] > HESSIAN_CONDITION_LIMIT * s[-1]:
        raise SingularHessianError("fiber Hessian of the Lagrangian is singular", time=time)
    return np.asarray(Vt.T @ ((U.T @ rhs) / s), dtype=np.float64)


def explicit_el_velocity(M: AlgebroidModel, L: ScalarField, a: PhasePoint) -> TangentVec:
    """Solution jet of the phase dynamics at a for regular L.

    dx = rho y, and W dy = epsilon_E(dL)_fiber - (d2L/dy dx) dx with W the fiber Hessian.

    Raises:
        SingularHessianError: If W is not invertible at a
    """
    M.check_point(a, FieldDomain.E)
    n = a.n
    jet = field_jet(L, a)
    dx = M.anchor(a.x) @ a.fiber
    eps = epsilon_map(M, Covector.from_components(a, jet.grad))
    rhs = eps.dfiber - jet.hess[n:, :n] @ dx
    dy = solve_fiber_hessian(jet.hess[n:, n:], rhs)
    return TangentVec(a, dx, dy)


def canonical_two_form(u: FloatArray, v: FloatArray, dim: int) -> float:
    """Canonical symplectic form dP ^ dq on a cotangent bundle.

    Vectors are laid out as (dq, dP), each half of length ``dim``.
    """
    return float(u[dim:] @ v[:dim] - v[dim:] @ u[:dim])


def r_map_coordinates(z: FloatArray, n: int, m: int) -> FloatArray:
    """:func:`r_map` on a flat coordinate vector (x, y, p, pi) of T*E."""
    x, y, p, pi = z[:n], z[n : n + m], z[n + m : 2 * n + m], z[2 * n + m :]
    image = r_map(Covector(PhasePoint.on_e(x, y), p, pi))
    return np.concatenate([image.base.x, image.base.fiber, image.p, image.pi])


def hamiltonian_from_text(M: AlgebroidModel, text: str) -> ExprField:
    """Compile a Hamiltonian over (x, xi)."""
    return M.field(text, FieldDomain.ESTAR)


def lagrangian_from_text(M: AlgebroidModel, text: str) -> ExprField:
    """Compile a Lagrangian over (x, y)."""
    return M.field(text, FieldDomain.E)


def force_from_texts(M: AlgebroidModel, texts: Sequence[str]) -> FiberForce:
    """Compile one force expression per fiber component over (x, xi)."""
    if len(texts) != M.m:
        raise DimensionError(f"model '{M.name}' needs {M.m} force components, got {len(texts)}")
    return FiberForce(tuple(M.field(t, FieldDomain.ESTAR) for t in texts))
