"""Prolongation side of the dynamics.

For P in {E, E*} the prolongation T^P E consists of pairs (e, X), e in E and
X tangent to P, with rho(e) = T pi(X). Its fiber over a point of P is
2m-dimensional with frame

    Z_a = (e_a, rho^i_a d/dx^i),    V_a = (0, d/dfiber_a)

and vectors are stored by their coefficients (e, w) in that frame, so the
anchor constraint holds by construction. Covectors carry coefficients
(alpha, beta) on the dual frame.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
import structlog

from algemech.core.algebroid import AlgebroidModel, PhasePoint, SectionE, SectionEstar, dE_oneform
from algemech.core.expr import FieldDomain
from algemech.core.jet import ConstantField, FloatArray, FunctionField, Jet2, Scalar, ScalarField, jet_eval
from algemech.core.tulczyjew import (
    HESSIAN_CONDITION_LIMIT,
    Covector,
    TangentVec,
    epsilon_map,
    field_jet,
    legendre_tangent,
    r_inv,
    r_map,
)
from algemech.exceptions import (
    BasePointMismatchError,
    DimensionError,
    InadmissibleJetError,
    SideMismatchError,
    SingularHessianError,
    SingularMatrixError,
)

logger = structlog.get_logger(__name__)

ADMISSIBILITY_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class ProlongVector:
    """Element (e, X) of T^P E in the {Z, V} frame; X = (rho(x) e, w)."""

    at: PhasePoint
    e: FloatArray
    w: FloatArray

    def __post_init__(self) -> None:
        object.__setattr__(self, "e", np.asarray(self.e, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=np.float64).reshape(-1))
        if self.e.shape[0] != self.at.m or self.w.shape[0] != self.at.m:
            raise DimensionError("prolongation vector coefficients do not match its point")

    @property
    def components(self) -> FloatArray:
        return np.concatenate([self.e, self.w])

    @classmethod
    def from_components(cls, at: PhasePoint, components: FloatArray) -> "ProlongVector":
        m = at.m
        return cls(at, components[:m], components[m:])

    def __repr__(self) -> str:
        return f"ProlongVector({self.at!r}, e={self.e.tolist()}, w={self.w.tolist()})"


@dataclass(frozen=True, eq=False)
class ProlongCovector:
    """Element of (T^P E)* with coefficients on the dual {Z, V} frame."""

    at: PhasePoint
    alpha: FloatArray
    beta: FloatArray

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=np.float64).reshape(-1))
        if self.alpha.shape[0] != self.at.m or self.beta.shape[0] != self.at.m:
            raise DimensionError("prolongation covector coefficients do not match its point")

    @property
    def components(self) -> FloatArray:
        return np.concatenate([self.alpha, self.beta])

    def __repr__(self) -> str:
        return f"ProlongCovector({self.at!r}, alpha={self.alpha.tolist()}, beta={self.beta.tolist()})"


@dataclass(frozen=True)
class OneForm:
    """One-form on P with one component field per coordinate (x, then fiber)."""

    components: tuple[ScalarField, ...]

    def jets(self, p: PhasePoint) -> list[Jet2]:
        if len(self.components) != p.n + p.m:
            raise DimensionError(f"one-form has {len(self.components)} components, P has {p.n + p.m}")
        return [jet_eval(f, p.coords) for f in self.components]

    def exterior_derivative(self, p: PhasePoint, X: TangentVec, X2: TangentVec) -> float:
        """d theta (X, X') = sum (d_k theta_l - d_l theta_k) X^k X'^l."""
        grads = np.array([j.grad for j in self.jets(p)], dtype=np.float64).reshape(
            p.n + p.m, p.n + p.m
        )
        # grads[k, l] = d_l theta_k
        curl = grads.T - grads
        return float(X.components @ curl @ X2.components)


Decomposition = Sequence[tuple[ScalarField, SectionEstar]]


def frame_vector(at: PhasePoint, k: int) -> ProlongVector:
    """k-th frame vector: Z_k for k < m, V_{k-m} otherwise."""
    c = np.zeros(2 * at.m)
    c[k] = 1.0
    return ProlongVector.from_components(at, c)


def include(M: AlgebroidModel, v: ProlongVector) -> tuple[FloatArray, TangentVec]:
    """Canonical inclusion (e, X) with X = (rho(x) e, w)."""
    M.check_point(v.at)
    return v.e, TangentVec(v.at, M.anchor(v.at.x) @ v.e, v.w)


def dual_project(
    M: AlgebroidModel, xi: Sequence[float] | FloatArray, theta: Covector, at: PhasePoint
) -> ProlongCovector:
    """(I_P)*(xi, theta): alpha = xi + rho^T p, beta = pi."""
    M.check_point(at)
    if not theta.base.same_as(at):
        raise BasePointMismatchError(f"covector at {theta.base!r}, expected {at!r}")
    xi_arr = np.asarray(xi, dtype=np.float64).reshape(-1)
    if xi_arr.shape[0] != M.m:
        raise DimensionError(f"xi has {xi_arr.shape[0]} entries, model has m={M.m}")
    return ProlongCovector(at, xi_arr + M.anchor(at.x).T @ theta.p, theta.pi)


def d_prolong_function(M: AlgebroidModel, f: ScalarField, v: ProlongVector) -> float:
    """d f (e, X) = X(f) for a function on P."""
    _, X = include(M, v)
    return float(field_jet(f, v.at).grad @ X.components)


def d_prolong_oneform(
    M: AlgebroidModel,
    decomposition: Decomposition,
    theta: OneForm | None,
    v: ProlongVector,
    v2: ProlongVector,
) -> float:
    """Exterior derivative of the one-form sum_i f_i (pr_E)* e^i + (pr_P)* theta on (v, v').

    Uses fiber-constant extensions of e and e':

        sum_i [X(f_i) <e^i, e'> - X'(f_i) <e^i, e> + f_i d_E e^i (e~, e~')] + d theta (X, X')
    """
    if not v.at.same_as(v2.at):
        raise BasePointMismatchError("prolongation vectors at different points")
    p = v.at
    _, X = include(M, v)
    _, X2 = include(M, v2)
    e_ext = SectionE.constant(v.e.tolist(), M.n)
    e2_ext = SectionE.constant(v2.e.tolist(), M.n)

    total = 0.0
    for f, section in decomposition:
        f_jet = field_jet(f, p)
        coeffs = section.at(p.x)
        total += float(f_jet.grad @ X.components) * float(coeffs @ v2.e)
        total -= float(f_jet.grad @ X2.components) * float(coeffs @ v.e)
        total += f_jet.value * dE_oneform(M, section, e_ext, e2_ext, p.x)
    if theta is not None:
        total += theta.exterior_derivative(p, X, X2)
    return total


def _pullback_field(M: AlgebroidModel, alpha: Sequence[ScalarField], a: int) -> FunctionField:
    rho = M.rho

    def component(args: Sequence[Scalar]) -> Scalar:
        total: Scalar = 0.0
        for i in range(M.n):
            total = total + rho[i][a](args) * alpha[i](args)
        return total

    return FunctionField(component, M.n, name=f"(rho^* alpha)_{a + 1}")


def decomposition_independence_residual(
    M: AlgebroidModel, alpha: Sequence[ScalarField], v: ProlongVector, v2: ProlongVector
) -> float:
    """Difference between the two ways of differentiating alpha(rho e) on T^P E.

    The same one-form is written as (pr_E)*(rho* alpha) and as
    (pr_P)*((T pi)* alpha); the residual of their exterior derivatives
    vanishes on (v, v') when the anchor is compatible with the bracket.

    Args:
        M: Model
        alpha: One-form on the base, n component fields of x
        v, v2: Prolongation vectors at the same point
    """
    if len(alpha) != M.n:
        raise DimensionError(f"alpha needs {M.n} components, got {len(alpha)}")
    p = v.at
    width = p.n + p.m
    one = ConstantField(1.0, width)
    via_anchor = SectionEstar(tuple(_pullback_field(M, alpha, a) for a in range(M.m)))
    lhs = d_prolong_oneform(M, [(one, via_anchor)], None, v, v2)

    n = M.n
    lifted = tuple(
        FunctionField(lambda args, f=f: f(args[:n]), width, name=f"pi^* alpha_{i + 1}")
        for i, f in enumerate(alpha)
    ) + tuple(ConstantField(0.0, width) for _ in range(M.m))
    rhs = d_prolong_oneform(M, [], OneForm(lifted), v, v2)
    return lhs - rhs


def mu_eval(M: AlgebroidModel, v: ProlongVector) -> float:
    """Tautological one-form: mu(xi)(e, X) = <xi, e>."""
    M.check_point(v.at, FieldDomain.ESTAR)
    return float(v.at.fiber @ v.e)


def mu_decomposition(M: AlgebroidModel) -> list[tuple[ScalarField, SectionEstar]]:
    """mu = sum_c xi_c (pr_E)* eps^c."""
    return [
        (M.field(f"xi{c + 1}", FieldDomain.ESTAR), SectionEstar.frame(c, M.n, M.m))
        for c in range(M.m)
    ]


def _contracted_structure(M: AlgebroidModel, at: PhasePoint) -> FloatArray:
    """K[a, b] = <xi, [e_a, e_b]> for frame sections, i.e. iota of the bracket."""
    return np.einsum("cab,c->ab", M.structure(at.x), at.fiber)


def _omega_pair(K: FloatArray, v: ProlongVector, v2: ProlongVector) -> float:
    # iota_[e~, e~'] - X(iota_e~') + X'(iota_e~); iota_e~ has gradient (0, e) on E*
    return float(v.e @ K @ v2.e - v.w @ v2.e + v2.w @ v.e)


def omega_evaluate(M: AlgebroidModel, v: ProlongVector, v2: ProlongVector) -> float:
    """Omega_E(v, v') by the evaluation formula with fiber-constant extensions."""
    M.check_point(v.at, FieldDomain.ESTAR)
    if not v.at.same_as(v2.at):
        raise BasePointMismatchError("prolongation vectors at different points")
    return _omega_pair(_contracted_structure(M, v.at), v, v2)


def omega_matrix(M: AlgebroidModel, at: PhasePoint) -> FloatArray:
    """O[k, l] = Omega_E(b_k, b_l) on the {Z, V} frame at a point of E*."""
    M.check_point(at, FieldDomain.ESTAR)
    K = _contracted_structure(M, at)
    frame = [frame_vector(at, k) for k in range(2 * M.m)]
    return np.array(
        [[_omega_pair(K, bk, bl) for bl in frame] for bk in frame], dtype=np.float64
    ).reshape(2 * M.m, 2 * M.m)


def _solve_contraction(O: FloatArray, rhs: FloatArray) -> FloatArray:
    """Solve iota_v Omega = rhs, i.e. O^T v = rhs."""
    if O.shape[0] == 0:
        return np.zeros(0)
    try:
        return np.asarray(np.linalg.solve(O.T, rhs), dtype=np.float64)
    except np.linalg.LinAlgError as e:
        raise SingularMatrixError(f"two-form is degenerate: {e}") from e


def omega_inv_solve(M: AlgebroidModel, c: ProlongCovector) -> ProlongVector:
    """The vector v with iota_v Omega_E = c."""
    O = omega_matrix(M, c.at)
    return ProlongVector.from_components(c.at, _solve_contraction(O, c.components))


def hamiltonian_section(M: AlgebroidModel, H: ScalarField, at: PhasePoint) -> ProlongVector:
    """Xi_H with iota_{Xi_H} Omega_E = dH."""
    M.check_point(at, FieldDomain.ESTAR)
    dH = Covector.from_components(at, field_jet(H, at).grad)
    section = omega_inv_solve(M, dual_project(M, np.zeros(M.m), dH, at))
    logger.debug("hamiltonian_section_solved", model=M.name, e=section.e.tolist())
    return section


def omega_inv_map(
    M: AlgebroidModel, xi: Sequence[float] | FloatArray, theta: Covector, at: PhasePoint
) -> tuple[FloatArray, TangentVec]:
    """I o Omega~^-1 o (I)* applied to (xi, theta)."""
    return include(M, omega_inv_solve(M, dual_project(M, xi, theta, at)))


TangentMap = Callable[[TangentVec], TangentVec]


def prolong_morphism(M: AlgebroidModel, tangent_map: TangentMap, v: ProlongVector) -> ProlongVector:
    """Prolongation of a fiber map P -> P' over the identity: (e, X) -> (e, T phi X).

    Args:
        M: Model
        tangent_map: T phi, sending X at p to a vector at phi(p)
        v: Vector of T^P E
    """
    _, X = include(M, v)
    image = tangent_map(X)
    if not np.array_equal(image.base.x, v.at.x) or not np.allclose(image.dx, X.dx):
        raise BasePointMismatchError("the map does not cover the identity of the base")
    return ProlongVector(image.base, v.e, image.dfiber)


def prolong_legendre(M: AlgebroidModel, L: ScalarField, v: ProlongVector) -> ProlongVector:
    """T^{lambda_L} E (e, X) = (e, T lambda_L X), a vector at lambda_L(a)."""
    M.check_point(v.at, FieldDomain.E)
    return prolong_morphism(M, lambda X: legendre_tangent(L, v.at, X), v)


def legendre_frame_map(M: AlgebroidModel, jet: Jet2, a: PhasePoint) -> FloatArray:
    """Matrix of T^{lambda_L} E in the frames at a and lambda_L(a).

    [[I, 0], [L_yx rho, L_yy]] acting on (e, w).
    """
    n, m = M.n, M.m
    T = np.zeros((2 * m, 2 * m))
    T[:m, :m] = np.eye(m)
    T[m:, :m] = jet.hess[n:, :n] @ M.anchor(a.x)
    T[m:, m:] = jet.hess[n:, n:]
    return T


def omega_L_matrix(M: AlgebroidModel, L: ScalarField, a: PhasePoint) -> FloatArray:
    """omega_L = (T^{lambda_L} E)* Omega_E in the frame at a. May be degenerate."""
    M.check_point(a, FieldDomain.E)
    jet = field_jet(L, a)
    T = legendre_frame_map(M, jet, a)
    O = omega_matrix(M, PhasePoint.on_estar(a.x, jet.grad[a.n :]))
    return np.asarray(T.T @ O @ T, dtype=np.float64)


def energy(L: ScalarField, a: PhasePoint) -> float:
    """E_L(a) = <lambda_L(a), a> - L(a)."""
    if a.side != FieldDomain.E:
        raise SideMismatchError("the energy lives on E")
    jet = field_jet(L, a)
    return float(jet.grad[a.n :] @ a.fiber - jet.value)


def energy_differential(L: ScalarField, a: PhasePoint) -> Covector:
    """dE_L at a, by the product rule on <dL/dy, y> - L."""
    if a.side != FieldDomain.E:
        raise SideMismatchError("the energy lives on E")
    n = a.n
    jet = field_jet(L, a)
    # d<dL/dy, y> = (d dL/dy)^T y + dL/dy dy
    grad = jet.hess[n:, :].T @ a.fiber
    grad[n:] += jet.grad[n:]
    return Covector.from_components(a, grad - jet.grad)


def _energy_rhs(M: AlgebroidModel, L: ScalarField, a: PhasePoint) -> ProlongCovector:
    return dual_project(M, np.zeros(M.m), energy_differential(L, a), a)


def el_residual_prolong(
    M: AlgebroidModel,
    L: ScalarField,
    a: PhasePoint,
    X: TangentVec,
    tol: float = ADMISSIBILITY_TOLERANCE,
) -> FloatArray:
    """Coefficients of iota_{(a, X)} omega_L - dE_L.

    Raises:
        InadmissibleJetError: If |dx - rho y| exceeds tol (relative to |rho y| when large)
    """
    M.check_point(a, FieldDomain.E)
    if not X.base.same_as(a):
        raise BasePointMismatchError(f"vector at {X.base!r}, expected {a!r}")
    rho_y = M.anchor(a.x) @ a.fiber
    gap = float(np.linalg.norm(X.dx - rho_y))
    if gap > tol * max(1.0, float(np.linalg.norm(rho_y))):
        raise InadmissibleJetError(f"jet is not admissible: |dx - rho y| = {gap:.3g}")
    v = np.concatenate([a.fiber, X.dfiber])
    return np.asarray(
        omega_L_matrix(M, L, a).T @ v - _energy_rhs(M, L, a).components, dtype=np.float64
    )


def solve_el_prolong(M: AlgebroidModel, L: ScalarField, a: PhasePoint) -> TangentVec:
    """Solution jet of iota_v omega_L = dE_L at a for regular L, returned as X = (rho e, w).

    Raises:
        SingularHessianError: If omega_L is degenerate at a
    """
    O_L = omega_L_matrix(M, L, a)
    rhs = _energy_rhs(M, L, a).components
    jet = field_jet(L, a)
    W = jet.hess[a.n :, a.n :]
    if W.shape[0] and (not np.all(np.isfinite(W)) or np.linalg.cond(W) > HESSIAN_CONDITION_LIMIT):
        raise SingularHessianError("omega_L is degenerate: fiber Hessian is singular")
    try:
        coeffs = _solve_contraction(O_L, rhs)
    except SingularMatrixError as e:
        raise SingularHessianError(f"omega_L is degenerate: {e}") from e
    v = ProlongVector.from_components(a, coeffs)
    return include(M, v)[1]


# Prolongation Tulczyjew triple. Covectors of the prolongations are handled
# through representatives (xi, theta) with xi in E* and theta in T*P.


def r_tilde(M: AlgebroidModel, xi: Sequence[float] | FloatArray, theta: Covector) -> ProlongCovector:
    """(xi, theta) -> (I_{E*})*(xi, R_E theta), at (x, pi)."""
    image = r_map(theta)
    return dual_project(M, xi, image, image.base)


def r_tilde_inverse(
    M: AlgebroidModel, xi: Sequence[float] | FloatArray, theta_star: Covector
) -> ProlongCovector:
    """(xi, theta*) -> (I_E)*(xi, R_E^-1 theta*), at (x, pi*)."""
    image = r_inv(theta_star)
    return dual_project(M, xi, image, image.base)


def eps_tilde(M: AlgebroidModel, xi: Sequence[float] | FloatArray, theta: Covector) -> ProlongVector:
    """Direct formula: the vector whose inclusion is (y, epsilon_E(theta) - V xi)."""
    xi_arr = np.asarray(xi, dtype=np.float64).reshape(-1)
    if xi_arr.shape[0] != M.m:
        raise DimensionError(f"xi has {xi_arr.shape[0]} entries, model has m={M.m}")
    X = epsilon_map(M, theta)
    return ProlongVector(X.base, theta.base.fiber, X.dfiber - xi_arr)
