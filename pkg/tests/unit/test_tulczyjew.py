"""Unit tests for the Tulczyjew-triple side: bivector, Hamiltonian fields, R_E and the EL residual."""

from pathlib import Path

import numpy as np
import pytest

from algemech.core.algebroid import (
    AlgebroidModel,
    PhasePoint,
    SectionE,
    anchor_apply,
    bracket,
    builtin,
    builtin_names,
    load_model,
)
from algemech.core.expr import ExprField, FieldDomain
from algemech.core.families import random_covector, random_point
from algemech.core.tulczyjew import (
    Covector,
    TangentVec,
    admissibility_residual,
    bivector,
    bivector_from_brackets,
    bivector_matrix,
    canonical_two_form,
    differential,
    el_residual_tt,
    epsilon_map,
    explicit_el_velocity,
    force_from_texts,
    forced_hamiltonian_field,
    hamiltonian_field,
    lambda_matrix,
    legendre_map,
    legendre_tangent,
    pairing,
    r_inv,
    r_map,
    r_map_coordinates,
    solve_fiber_hessian,
    vertical_derivative,
)
from algemech.exceptions import (
    BasePointMismatchError,
    DimensionError,
    SideMismatchError,
    SingularHessianError,
)

MODELS_DIR = Path(__file__).parents[2] / "configs" / "models"


class TestDifferentials:
    """Test suite for jets of fields at phase points."""

    def test_vertical_derivative_quadratic(self, tm2: AlgebroidModel) -> None:
        """Fiber gradient of 1/2 |y|^2 is y."""
        L = tm2.field("0.5*(y1^2 + y2^2)", FieldDomain.E)
        np.testing.assert_array_equal(vertical_derivative(L, PhasePoint.on_e([0.0, 0.0], [3.0, 4.0])), [3.0, 4.0])

    def test_vertical_derivative_mixed(self, tm1: AlgebroidModel) -> None:
        """d/dxi (x1 xi1) = x1."""
        H = tm1.field("x1*xi1", FieldDomain.ESTAR)
        np.testing.assert_array_equal(vertical_derivative(H, PhasePoint.on_estar([2.0], [5.0])), [2.0])

    def test_field_side_checked(self, tm1: AlgebroidModel) -> None:
        """A Hamiltonian cannot be evaluated at a point of E."""
        H = tm1.field("xi1", FieldDomain.ESTAR)
        with pytest.raises(SideMismatchError):
            differential(H, PhasePoint.on_e([0.0], [1.0]))

    def test_pairing_needs_same_point(self) -> None:
        """Pairing at different points is refused."""
        theta = Covector(PhasePoint.on_e([0.0], [1.0]), [1.0], [1.0])
        X = TangentVec(PhasePoint.on_e([0.0], [2.0]), [1.0], [1.0])
        with pytest.raises(BasePointMismatchError):
            pairing(theta, X)

    def test_covector_shape_checked(self) -> None:
        """Components must match the base point."""
        with pytest.raises(DimensionError):
            Covector(PhasePoint.on_e([0.0], [1.0]), [1.0, 2.0], [1.0])


class TestBivector:
    """Test suite for the linear Poisson bivector on E*."""

    def test_so3_fiber_block(self, so3: AlgebroidModel) -> None:
        """Lambda(d xi_1, d xi_2) = xi_3."""
        B = bivector_matrix(so3, PhasePoint.on_estar([], [0.0, 0.0, 1.0]))
        assert B[0, 1] == 1.0
        assert B[1, 0] == -1.0

    def test_tm2_canonical(self, tm2: AlgebroidModel) -> None:
        """tm2 gives the canonical block form."""
        P = lambda_matrix(tm2, PhasePoint.on_estar([0.5, 0.1], [2.0, -1.0]))
        expected = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
        np.testing.assert_array_equal(P, expected)

    def test_zero_covector_kills_fiber_block(self, heis3: AlgebroidModel) -> None:
        """The fiber block is linear in xi."""
        B = bivector_matrix(heis3, PhasePoint.on_estar([], [0.0, 0.0, 0.0]))
        assert not B.any()

    def test_skew(self, almost_lie_model: AlgebroidModel, rng: np.random.Generator) -> None:
        """The matrix is skew-symmetric at random points."""
        p = random_point(almost_lie_model, FieldDomain.ESTAR, rng)
        P = lambda_matrix(almost_lie_model, p)
        np.testing.assert_allclose(P, -P.T, atol=1e-14)

    @pytest.mark.parametrize("name", builtin_names())
    def test_blocks_match_bracket_and_anchor(self, name: str, rng: np.random.Generator) -> None:
        """Every block agrees with the entrywise bracket and anchor evaluation."""
        M = builtin(name)
        for _ in range(5):
            p = random_point(M, FieldDomain.ESTAR, rng)
            np.testing.assert_allclose(bivector_matrix(M, p), bivector_from_brackets(M, p), atol=1e-12)

    @pytest.mark.parametrize("filename", ["se2.json", "polar_action.json"])
    def test_model_files_match_bracket_and_anchor(self, filename: str, rng: np.random.Generator) -> None:
        """Bundled example models satisfy the same identity."""
        M = load_model(MODELS_DIR / filename)
        p = random_point(M, FieldDomain.ESTAR, rng)
        np.testing.assert_allclose(bivector_matrix(M, p), bivector_from_brackets(M, p), atol=1e-12)

    def test_polar_action_anchor_block(self) -> None:
        """Lambda(d xi_1, d x^i) is the rotation field at x."""
        M = load_model(MODELS_DIR / "polar_action.json")
        B = bivector_matrix(M, PhasePoint.on_estar([2.0, 3.0], [1.0]))
        np.testing.assert_array_equal(B[2, :2], [-3.0, 2.0])
        np.testing.assert_array_equal(B[:2, 2], [3.0, -2.0])

    def test_constant_sections(self, action1: AlgebroidModel, rng: np.random.Generator) -> None:
        """Lambda(d iota_e, d iota_e') = <xi, [e, e']> and Lambda(d iota_e, d x) = rho(e)."""
        p = random_point(action1, FieldDomain.ESTAR, rng)
        f, g = rng.normal(size=action1.m), rng.normal(size=action1.m)
        B = bivector_matrix(action1, p)
        n = action1.n
        e, e2 = SectionE.constant(f.tolist(), n), SectionE.constant(g.tolist(), n)
        assert f @ B[n:, n:] @ g == pytest.approx(float(p.fiber @ bracket(action1, e, e2, p.x)), abs=1e-12)
        np.testing.assert_allclose(f @ B[n:, :n], anchor_apply(action1, PhasePoint.on_e(p.x, f)), atol=1e-12)

    def test_bivector_evaluation_matches_matrix(self, action1: AlgebroidModel, rng: np.random.Generator) -> None:
        """Lambda(theta, theta') is theta B theta'."""
        p = random_point(action1, FieldDomain.ESTAR, rng)
        a, b = random_covector(p, rng), random_covector(p, rng)
        assert bivector(action1, p, a, b) == pytest.approx(-bivector(action1, p, b, a))


class TestHamiltonianField:
    """Test suite for X_H and the forced variant."""

    def test_rigid_body(self, so3: AlgebroidModel, rigid_body_h: ExprField) -> None:
        """X_H reproduces Euler's equations xi x I^-1 xi."""
        X = hamiltonian_field(so3, rigid_body_h, PhasePoint.on_estar([], [1.0, 1.0, 1.0]))
        np.testing.assert_allclose(X.dfiber, [-1.0 / 6.0, 2.0 / 3.0, -0.5])
        assert X.dx.size == 0

    def test_free_particle(self, tm1: AlgebroidModel) -> None:
        """H = 1/2 xi^2 moves x at speed xi."""
        H = tm1.field("0.5*xi1^2", FieldDomain.ESTAR)
        X = hamiltonian_field(tm1, H, PhasePoint.on_estar([0.3], [2.0]))
        np.testing.assert_array_equal(X.components, [2.0, 0.0])

    def test_constant_hamiltonian(self, almost_lie_model: AlgebroidModel, rng: np.random.Generator) -> None:
        """Constant H has zero field."""
        H = almost_lie_model.field("4", FieldDomain.ESTAR)
        X = hamiltonian_field(almost_lie_model, H, random_point(almost_lie_model, FieldDomain.ESTAR, rng))
        assert not X.components.any()

    def test_linear_drag(self, tm1: AlgebroidModel) -> None:
        """A force k xi slows the momentum at rate k xi."""
        H = tm1.field("0.5*xi1^2", FieldDomain.ESTAR)
        force = force_from_texts(tm1, ["0.5*xi1"])
        X = forced_hamiltonian_field(tm1, H, force, PhasePoint.on_estar([0.0], [2.0]))
        np.testing.assert_array_equal(X.components, [2.0, -1.0])

    def test_zero_force(self, so3: AlgebroidModel, rigid_body_h: ExprField) -> None:
        """A zero force leaves X_H unchanged."""
        p = PhasePoint.on_estar([], [0.2, -0.4, 1.0])
        force = force_from_texts(so3, ["0", "0", "0"])
        np.testing.assert_array_equal(
            forced_hamiltonian_field(so3, rigid_body_h, force, p).components,
            hamiltonian_field(so3, rigid_body_h, p).components,
        )

    def test_force_on_constant_hamiltonian(self, tm1: AlgebroidModel) -> None:
        """Constant H leaves only the vertical lift."""
        H = tm1.field("1", FieldDomain.ESTAR)
        force = force_from_texts(tm1, ["3"])
        X = forced_hamiltonian_field(tm1, H, force, PhasePoint.on_estar([1.0], [1.0]))
        np.testing.assert_array_equal(X.components, [0.0, -3.0])

    def test_force_must_cover_identity(self, tm1: AlgebroidModel) -> None:
        """Forces that move the base point are rejected."""
        H = tm1.field("0.5*xi1^2", FieldDomain.ESTAR)

        def shifting(p: PhasePoint) -> PhasePoint:
            return PhasePoint.on_estar(p.x + 1.0, p.fiber)

        with pytest.raises(BasePointMismatchError):
            forced_hamiltonian_field(tm1, H, shifting, PhasePoint.on_estar([0.0], [1.0]))

    def test_force_component_count(self, so3: AlgebroidModel) -> None:
        """One expression per fiber component."""
        with pytest.raises(DimensionError):
            force_from_texts(so3, ["0", "0"])


class TestCanonicalMap:
    """Test suite for R_E and epsilon_E."""

    def test_r_map_of_kinetic_differential(self, tm1: AlgebroidModel) -> None:
        """d(1/2 y^2) at (0, 1) maps to (0, xi=1; p=0, pi=1)."""
        L = tm1.field("0.5*y1^2", FieldDomain.E)
        image = r_map(differential(L, PhasePoint.on_e([0.0], [1.0])))
        assert image.base.same_as(PhasePoint.on_estar([0.0], [1.0]))
        np.testing.assert_array_equal(image.p, [0.0])
        np.testing.assert_array_equal(image.pi, [1.0])

    def test_r_map_of_zero(self) -> None:
        """The zero covector at (x, y) maps to (x, 0; 0, y)."""
        image = r_map(Covector(PhasePoint.on_e([1.0, 2.0], [3.0]), [0.0, 0.0], [0.0]))
        assert image.base.same_as(PhasePoint.on_estar([1.0, 2.0], [0.0]))
        np.testing.assert_array_equal(image.components, [0.0, 0.0, 3.0])

    def test_r_inverse(self, tm2: AlgebroidModel, rng: np.random.Generator) -> None:
        """r_inv undoes r_map."""
        theta = random_covector(random_point(tm2, FieldDomain.E, rng), rng)
        back = r_inv(r_map(theta))
        assert back.base.same_as(theta.base)
        np.testing.assert_array_equal(back.components, theta.components)

    def test_r_map_side(self) -> None:
        """r_map starts on E."""
        with pytest.raises(SideMismatchError):
            r_map(Covector(PhasePoint.on_estar([0.0], [1.0]), [0.0], [0.0]))

    def test_antisymplectic_on_basis(self) -> None:
        """R flips the sign of the canonical form on coordinate basis pairs."""
        n, m = 1, 2
        dim = 2 * (n + m)
        basis = np.eye(dim)
        z = np.arange(dim, dtype=np.float64)
        for i in range(dim):
            for j in range(dim):
                u = r_map_coordinates(z + basis[i], n, m) - r_map_coordinates(z, n, m)
                v = r_map_coordinates(z + basis[j], n, m) - r_map_coordinates(z, n, m)
                assert canonical_two_form(u, v, n + m) == -canonical_two_form(basis[i], basis[j], n + m)

    def test_epsilon_free_particle(self, tm1: AlgebroidModel) -> None:
        """epsilon(dL) for L = 1/2 y^2 is (dx = y, dxi = 0) at xi = y."""
        L = tm1.field("0.5*y1^2", FieldDomain.E)
        a = PhasePoint.on_e([0.4], [1.5])
        X = epsilon_map(tm1, differential(L, a))
        assert X.base.same_as(PhasePoint.on_estar([0.4], [1.5]))
        np.testing.assert_array_equal(X.components, [1.5, 0.0])

    def test_epsilon_of_zero(self, action1: AlgebroidModel) -> None:
        """The zero covector maps to the zero vector."""
        X = epsilon_map(action1, Covector(PhasePoint.on_e([0.5], [0.0]), [0.0], [0.0]))
        assert not X.components.any()


class TestEulerLagrange:
    """Test suite for the Tulczyjew form of the Euler-Lagrange equations."""

    def test_free_particle_solution(self, tm1: AlgebroidModel, free_particle_l: ExprField) -> None:
        """(dx, dy) = (y, 0) solves the free particle."""
        a = PhasePoint.on_e([0.1], [2.0])
        assert not el_residual_tt(tm1, free_particle_l, a, TangentVec(a, [2.0], [0.0])).any()

    def test_free_particle_wrong_acceleration(self, tm1: AlgebroidModel, free_particle_l: ExprField) -> None:
        """dy = 1 leaves a unit momentum residual."""
        a = PhasePoint.on_e([0.1], [2.0])
        np.testing.assert_array_equal(el_residual_tt(tm1, free_particle_l, a, TangentVec(a, [2.0], [1.0])), [0.0, 1.0])

    def test_rigid_body_solution(self, so3: AlgebroidModel, rigid_body_l: ExprField) -> None:
        """I dy = (I y) x y solves the rigid body."""
        inertia = np.array([1.0, 2.0, 3.0])
        y = np.array([0.3, -0.7, 1.1])
        dy = np.cross(inertia * y, y) / inertia
        a = PhasePoint.on_e([], y)
        np.testing.assert_allclose(el_residual_tt(so3, rigid_body_l, a, TangentVec(a, [], dy)), 0.0, atol=1e-12)

    def test_explicit_velocity_matches_residual(
        self, so3: AlgebroidModel, rigid_body_l: ExprField, rng: np.random.Generator
    ) -> None:
        """The explicit solve zeroes the residual."""
        a = random_point(so3, FieldDomain.E, rng)
        X = explicit_el_velocity(so3, rigid_body_l, a)
        np.testing.assert_allclose(el_residual_tt(so3, rigid_body_l, a, X), 0.0, atol=1e-12)

    def test_explicit_velocity_singular(self, tm1: AlgebroidModel) -> None:
        """Lagrangians linear in y have no explicit solution."""
        L = tm1.field("x1*y1", FieldDomain.E)
        with pytest.raises(SingularHessianError):
            explicit_el_velocity(tm1, L, PhasePoint.on_e([1.0], [1.0]))

    def test_solve_fiber_hessian(self) -> None:
        """Regular systems solve; singular and empty ones behave."""
        np.testing.assert_allclose(solve_fiber_hessian(np.diag([2.0, 4.0]), np.array([2.0, 2.0])), [1.0, 0.5])
        indefinite = np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(solve_fiber_hessian(indefinite, np.array([1.0, 2.0])), [2.0, 1.0])
        assert solve_fiber_hessian(np.zeros((0, 0)), np.zeros(0)).size == 0
        with pytest.raises(SingularHessianError, match="t=1.5"):
            solve_fiber_hessian(np.ones((2, 2)), np.zeros(2), time=1.5)

    def test_admissibility(self, tm2: AlgebroidModel, so3: AlgebroidModel, action1: AlgebroidModel) -> None:
        """rho(x) y - dx on three models."""
        a = PhasePoint.on_e([0.0, 0.0], [1.0, 2.0])
        assert not admissibility_residual(tm2, a, TangentVec(a, [1.0, 2.0], [0.0, 0.0])).any()
        b = PhasePoint.on_e([], [1.0, 2.0, 3.0])
        assert admissibility_residual(so3, b, TangentVec(b, [], [5.0, 5.0, 5.0])).size == 0
        c = PhasePoint.on_e([2.0], [3.0])
        np.testing.assert_array_equal(admissibility_residual(action1, c, TangentVec(c, [5.0], [0.0])), [1.0])

    def test_legendre(self, so3: AlgebroidModel, rigid_body_l: ExprField) -> None:
        """The rigid-body Legendre map is y -> I y, and its tangent is linear."""
        a = PhasePoint.on_e([], [1.0, 1.0, 1.0])
        assert legendre_map(rigid_body_l, a).same_as(PhasePoint.on_estar([], [1.0, 2.0, 3.0]))
        image = legendre_tangent(rigid_body_l, a, TangentVec(a, [], [1.0, 0.0, -1.0]))
        np.testing.assert_array_equal(image.dfiber, [1.0, 0.0, -3.0])
