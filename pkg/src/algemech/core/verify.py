"""Numeric certificates for the mechanics identities.

Every check draws seeded random samples, evaluates both sides of an
identity and reports the largest deviation. The two sides of each
comparison go through disjoint code paths: Tulczyjew-side quantities come
from :mod:`algemech.core.tulczyjew`, prolongation-side quantities from
:mod:`algemech.core.prolongation`.

Sample ``i`` of check ``c`` always uses the generator seeded with
``(seed, crc32(c), i)``, so results do not depend on worker count or order.
"""

import zlib
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import structlog

from algemech.core import families
from algemech.core.algebroid import AlgebroidModel, PhasePoint, almost_lie_residual, sample_base_points
from algemech.core.expr import ExprField, FieldDomain
from algemech.core.prolongation import (
    d_prolong_oneform,
    decomposition_independence_residual,
    el_residual_prolong,
    energy_differential,
    eps_tilde,
    frame_vector,
    hamiltonian_section,
    include,
    mu_decomposition,
    omega_inv_map,
    omega_inv_solve,
    omega_matrix,
    r_tilde,
    solve_el_prolong,
)
from algemech.core.tulczyjew import (
    HESSIAN_CONDITION_LIMIT,
    Covector,
    TangentVec,
    canonical_two_form,
    differential,
    el_residual_tt,
    epsilon_map,
    explicit_el_velocity,
    field_jet,
    hamiltonian_field,
    lambda_matrix,
    legendre_tangent,
    pairing,
    r_map,
    r_map_coordinates,
    vertical_derivative,
)
from algemech.exceptions import AlgeMechError, SingularHessianError
from algemech.models.report import VerificationReport

logger = structlog.get_logger(__name__)

FINITE_DIFFERENCE_TOLERANCE = 1e-5
FINITE_DIFFERENCE_STEP = 1e-4
EXACT_TOLERANCE = 1e-12
PERTURBATION = 0.1
CANONICAL_MODEL = "canonical"

# A sample returns its residual, or None when its precondition fails.
Sample = Callable[[np.random.Generator, int], float | None]
LagrangianFamily = Callable[[AlgebroidModel, np.random.Generator], ExprField]


def sample_rng(seed: int, check: str, index: int) -> np.random.Generator:
    """Generator for one sample, independent of evaluation order."""
    return np.random.default_rng([seed, zlib.crc32(check.encode("utf-8")), index])


def _run(
    check: str,
    model: str,
    sample: Sample,
    samples: int,
    seed: int,
    tol: float,
    workers: int = 1,
    expected_fail: bool = False,
    detail: str = "",
) -> VerificationReport:
    def evaluate(index: int) -> float | None:
        try:
            return sample(sample_rng(seed, check, index), index)
        except AlgeMechError as e:
            logger.warning("sample_failed", check=check, model=model, index=index, error=str(e))
            return float("inf")

    if workers > 1 and samples > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, range(samples)))
    else:
        results = [evaluate(i) for i in range(samples)]

    residuals = [r for r in results if r is not None]
    skipped = len(results) - len(residuals)
    if skipped:
        logger.warning("sample_skipped", check=check, model=model, skipped=skipped)
        if not residuals:
            detail = detail or "all samples skipped"
    worst = max(residuals, default=0.0)
    report = VerificationReport(
        check=check,
        model=model,
        samples=samples,
        max_residual=worst,
        tol=tol,
        expected_fail=expected_fail,
        seed=seed,
        skipped=skipped,
        detail=detail,
    )
    logger.info(
        "check_completed",
        check=check,
        model=model,
        max_residual=worst,
        outcome=report.outcome.value,
        skipped=skipped,
    )
    return report


def _max_abs(*arrays: np.ndarray) -> float:
    return max((float(np.max(np.abs(a), initial=0.0)) for a in arrays), default=0.0)


def verify_almost_lie(
    M: AlgebroidModel, samples: int, seed: int, tol: float, workers: int = 1
) -> VerificationReport:
    """Anchor compatibility gate rho[e, e'] = [rho e, rho e'] on frame sections."""

    def sample(rng: np.random.Generator, index: int) -> float:
        x = sample_base_points(M, 1, rng)[0]
        return _max_abs(almost_lie_residual(M, x))

    return _run("almost_lie", M.name, sample, samples, seed, tol, workers, expected_fail=not M.almost_lie)


def _gate(M: AlgebroidModel, seed: int) -> float:
    """Largest almost-Lie residual over a few seeded base points."""
    rng = sample_rng(seed, "precondition", 0)
    points = sample_base_points(M, 5, rng)
    return max((_max_abs(almost_lie_residual(M, x)) for x in points), default=0.0)


def _precondition_report(
    check: str, M: AlgebroidModel, samples: int, seed: int, tol: float, worst: float
) -> VerificationReport:
    logger.warning("precondition_failed", check=check, model=M.name, almost_lie_residual=worst)
    return VerificationReport(
        check=check,
        model=M.name,
        samples=samples,
        max_residual=worst,
        tol=tol,
        expected_fail=not M.almost_lie,
        seed=seed,
        skipped=samples,
        detail=f"precondition failed: not almost-Lie (residual {worst:.3g})",
    )


def verify_theorem_hamilton(
    M: AlgebroidModel, samples: int, seed: int, tol: float, workers: int = 1
) -> VerificationReport:
    """Hamiltonian section against (dv H, X_H), and the general inverse map formula.

    Per sample: Xi_H from the Omega solve equals (vertical derivative of H,
    Lambda~(dH)), and I o Omega~^-1 o I* sends (xi, theta) to
    (pi(theta), Lambda~(theta) - V xi).
    """
    check = "theorem_hamilton"
    worst = _gate(M, seed)
    if worst > tol:
        return _precondition_report(check, M, samples, seed, tol, worst)

    def sample(rng: np.random.Generator, index: int) -> float:
        H = families.random_hamiltonian(M, rng)
        p = families.random_point(M, FieldDomain.ESTAR, rng)
        section = hamiltonian_section(M, H, p)
        _, X = include(M, section)
        res_h = _max_abs(
            section.e - vertical_derivative(H, p), X.components - hamiltonian_field(M, H, p).components
        )

        xi = rng.uniform(-1.0, 1.0, size=M.m)
        theta = families.random_covector(p, rng)
        e, Y = omega_inv_map(M, xi, theta, p)
        expected = lambda_matrix(M, p) @ theta.components
        expected[M.n :] -= xi
        return max(res_h, _max_abs(e - theta.pi, Y.components - expected))

    return _run(check, M.name, sample, samples, seed, tol, workers)


def verify_lemma_L_to_EL(
    M: AlgebroidModel,
    samples: int,
    seed: int,
    tol: float,
    workers: int = 1,
    family: LagrangianFamily = families.random_lagrangian,
    check: str = "lemma_L_to_EL",
) -> VerificationReport:
    """<dE_L(a), X> = <R_E(dL(a)), T lambda_L(X)> for random (a, X)."""

    def sample(rng: np.random.Generator, index: int) -> float:
        L = family(M, rng)
        a = families.random_point(M, FieldDomain.E, rng)
        X = families.random_tangent(a, rng)
        lhs = pairing(energy_differential(L, a), X)
        rhs = pairing(r_map(differential(L, a)), legendre_tangent(L, a, X))
        return abs(lhs - rhs) / max(1.0, abs(lhs))

    return _run(check, M.name, sample, samples, seed, tol, workers)


def uniqueness_kernel_dimension(M: AlgebroidModel, L: ExprField, a: PhasePoint) -> int:
    """Kernel dimension of {pi(theta') = 0, theta' annihilates Im T lambda_L at a}.

    The unknown theta' = (p', pi') is a covector at the fixed point lambda_L(a).

    Raises:
        SingularHessianError: If the fiber Hessian of L is singular at a
    """
    n, m = a.n, a.m
    W = field_jet(L, a).hess[n:, n:]
    if m and (not np.all(np.isfinite(W)) or np.linalg.cond(W) > HESSIAN_CONDITION_LIMIT):
        raise SingularHessianError("fiber Hessian of the Lagrangian is singular")
    rows = []
    # v_{E*}(theta') = pi' = 0
    for b in range(m):
        row = np.zeros(n + m)
        row[n + b] = 1.0
        rows.append(row)
    # <theta', T lambda_L(X_k)> = 0 on a basis X_k of T_a E
    for k in range(n + m):
        basis = np.zeros(n + m)
        basis[k] = 1.0
        rows.append(legendre_tangent(L, a, TangentVec.from_components(a, basis)).components)
    system = np.array(rows).reshape(len(rows), n + m)
    return n + m - int(np.linalg.matrix_rank(system)) if system.size else n + m


def verify_theta_uniqueness(
    M: AlgebroidModel,
    samples: int,
    seed: int,
    workers: int = 1,
    family: LagrangianFamily = families.regular_lagrangian,
    check: str = "theta_uniqueness",
) -> VerificationReport:
    """Uniqueness of the covector in T*E* over a regular Lagrangian; residual is the kernel dimension."""

    def sample(rng: np.random.Generator, index: int) -> float | None:
        L = family(M, rng)
        a = families.random_point(M, FieldDomain.E, rng)
        try:
            return float(uniqueness_kernel_dimension(M, L, a))
        except SingularHessianError:
            logger.debug("sample_skipped", check=check, model=M.name, index=index)
            return None

    return _run(check, M.name, sample, samples, seed, 0.0, workers)


def verify_theorem_lagrangian(
    M: AlgebroidModel,
    samples: int,
    seed: int,
    tol: float,
    workers: int = 1,
    family: LagrangianFamily = families.regular_lagrangian,
) -> VerificationReport:
    """Solutions of one Euler-Lagrange formulation solve the other.

    Jets from the explicit Tulczyjew-side solve are fed to the prolongation
    residual, and jets from the prolongation solve to the Tulczyjew residual.
    """

    def sample(rng: np.random.Generator, index: int) -> float:
        L = family(M, rng)
        a = families.random_point(M, FieldDomain.E, rng)
        X = explicit_el_velocity(M, L, a)
        Y = solve_el_prolong(M, L, a)
        scale = max(1.0, float(np.linalg.norm(X.components)))
        return _max_abs(
            el_residual_prolong(M, L, a, X), el_residual_tt(M, L, a, Y), el_residual_tt(M, L, a, X)
        ) / scale

    return _run("theorem_lagrangian", M.name, sample, samples, seed, tol, workers)


def verify_theorem_lagrangian_separation(
    M: AlgebroidModel,
    samples: int,
    seed: int,
    tol: float,
    workers: int = 1,
    family: LagrangianFamily = families.regular_lagrangian,
) -> VerificationReport:
    """Perturbed solution jets violate both formulations.

    The fiber velocity of a solution jet is moved by a random vector of norm
    0.1. Residual is 10 * tol over the smaller residual norm, so the report
    passes (tolerance 1) iff both norms exceed 10 * tol.
    """
    threshold = 10.0 * tol

    def sample(rng: np.random.Generator, index: int) -> float:
        L = family(M, rng)
        a = families.random_point(M, FieldDomain.E, rng)
        X = explicit_el_velocity(M, L, a)
        direction = rng.normal(size=M.m)
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            return 0.0
        bumped = TangentVec(a, X.dx, X.dfiber + PERTURBATION * direction / norm)
        smallest = min(
            float(np.linalg.norm(el_residual_tt(M, L, a, bumped))),
            float(np.linalg.norm(el_residual_prolong(M, L, a, bumped))),
        )
        return threshold / smallest if smallest > 0 else float("inf")

    if M.m == 0:
        return _run("theorem_lagrangian.separation", M.name, lambda rng, i: None, samples, seed, 1.0, workers)
    return _run("theorem_lagrangian.separation", M.name, sample, samples, seed, 1.0, workers)


def verify_prolong_triple(
    M: AlgebroidModel, samples: int, seed: int, tol: float, workers: int = 1
) -> VerificationReport:
    """Direct formula for the prolongation epsilon against R~ followed by the Omega solve.

    Also checks that the generators (dL, 0) and (dH, 0) reproduce
    epsilon_E(dL) and X_H.
    """
    check = "prolong_triple"
    worst = _gate(M, seed)
    if worst > tol:
        return _precondition_report(check, M, samples, seed, tol, worst)

    def sample(rng: np.random.Generator, index: int) -> float:
        a = families.random_point(M, FieldDomain.E, rng)
        theta = families.random_covector(a, rng)
        xi = rng.uniform(-1.0, 1.0, size=M.m)
        direct = eps_tilde(M, xi, theta)
        composed = omega_inv_solve(M, r_tilde(M, xi, theta))
        res = _max_abs(direct.components - composed.components)

        L = families.random_lagrangian(M, rng)
        dL = differential(L, a)
        _, X_L = include(M, omega_inv_solve(M, r_tilde(M, np.zeros(M.m), dL)))
        res = max(res, _max_abs(X_L.components - epsilon_map(M, dL).components))

        H = families.random_hamiltonian(M, rng)
        p = families.random_point(M, FieldDomain.ESTAR, rng)
        _, X_H = omega_inv_map(M, np.zeros(M.m), differential(H, p), p)
        return max(res, _max_abs(X_H.components - hamiltonian_field(M, H, p).components))

    return _run(check, M.name, sample, samples, seed, tol, workers)


def verify_decomposition_independence(
    M: AlgebroidModel, samples: int, seed: int, tol: float, workers: int = 1
) -> VerificationReport:
    """The exterior derivative on T^P E does not depend on how a form is decomposed.

    Alternates P = E and P = E* across samples.
    """

    def sample(rng: np.random.Generator, index: int) -> float:
        side = FieldDomain.E if index % 2 == 0 else FieldDomain.ESTAR
        base = M.variables(FieldDomain.BASE)
        alpha = [M.field(families.polynomial_text(rng, base, degree=2), FieldDomain.BASE) for _ in base]
        p = families.random_point(M, side, rng)
        v = families.random_prolong_vector(p, rng)
        v2 = families.random_prolong_vector(p, rng)
        return abs(decomposition_independence_residual(M, alpha, v, v2))

    return _run(
        "decomposition_independence", M.name, sample, samples, seed, tol, workers, expected_fail=not M.almost_lie
    )


def verify_omega_tautological(
    M: AlgebroidModel, samples: int, seed: int, tol: float, workers: int = 1
) -> VerificationReport:
    """Omega_E from the evaluation formula equals minus d of the tautological form."""
    decomposition = mu_decomposition(M)

    def sample(rng: np.random.Generator, index: int) -> float:
        p = families.random_point(M, FieldDomain.ESTAR, rng)
        O = omega_matrix(M, p)
        frame = [frame_vector(p, k) for k in range(2 * M.m)]
        d_mu = np.array(
            [[d_prolong_oneform(M, decomposition, None, bk, bl) for bl in frame] for bk in frame]
        ).reshape(2 * M.m, 2 * M.m)
        return _max_abs(O + d_mu)

    return _run("omega_tautological", M.name, sample, samples, seed, tol, workers)


def _canonical_dims(rng: np.random.Generator) -> tuple[int, int]:
    return int(rng.integers(1, 4)), int(rng.integers(1, 4))


def verify_r_antisymplectic(
    samples: int, seed: int, tol: float = FINITE_DIFFERENCE_TOLERANCE, workers: int = 1
) -> VerificationReport:
    """R_E pulls the canonical form of T*E* back to minus that of T*E (finite differences)."""
    h = FINITE_DIFFERENCE_STEP

    def sample(rng: np.random.Generator, index: int) -> float:
        n, m = _canonical_dims(rng)
        dim = n + m
        z = rng.uniform(-1.0, 1.0, size=2 * dim)
        u = rng.uniform(-1.0, 1.0, size=2 * dim)
        v = rng.uniform(-1.0, 1.0, size=2 * dim)

        def push(w: np.ndarray) -> np.ndarray:
            return (r_map_coordinates(z + h * w, n, m) - r_map_coordinates(z - h * w, n, m)) / (2.0 * h)

        return abs(canonical_two_form(push(u), push(v), dim) + canonical_two_form(u, v, dim))

    return _run("r_antisymplectic", CANONICAL_MODEL, sample, samples, seed, tol, workers)


def verify_r_legs(
    samples: int, seed: int, tol: float = EXACT_TOLERANCE, workers: int = 1
) -> VerificationReport:
    """R_E covers the identity of the base and swaps the two legs E and E*.

    The E*-projection of theta becomes the base point of R_E(theta), and the
    base point y becomes the fiber momentum; base momenta change sign.
    """

    def sample(rng: np.random.Generator, index: int) -> float:
        n, m = _canonical_dims(rng)
        a = PhasePoint.on_e(rng.uniform(-1.0, 1.0, size=n), rng.uniform(-1.0, 1.0, size=m))
        theta = Covector(a, rng.uniform(-1.0, 1.0, size=n), rng.uniform(-1.0, 1.0, size=m))
        image = r_map(theta)
        return _max_abs(
            image.base.x - a.x, image.base.fiber - theta.pi, image.pi - a.fiber, image.p + theta.p
        )

    return _run("r_legs", CANONICAL_MODEL, sample, samples, seed, tol, workers)


def verify_model(
    M: AlgebroidModel, samples: int, seed: int, tol: float, workers: int = 1
) -> list[VerificationReport]:
    """All per-model checks.

    Models that fail the almost-Lie gate only get the checks that certify
    the failure.
    """
    gate = verify_almost_lie(M, samples, seed, tol, workers)
    if not M.almost_lie or not gate.passed:
        return [gate, verify_decomposition_independence(M, samples, seed, tol, workers)]

    reports = [
        gate,
        verify_theorem_hamilton(M, samples, seed, tol, workers),
        verify_lemma_L_to_EL(M, samples, seed, tol, workers),
        verify_lemma_L_to_EL(
            M, samples, seed, tol, workers, family=families.degenerate_lagrangian, check="lemma_L_to_EL.degenerate"
        ),
        verify_theta_uniqueness(M, samples, seed, workers),
        verify_theorem_lagrangian(M, samples, seed, tol, workers),
        verify_theorem_lagrangian_separation(M, samples, seed, tol, workers),
        verify_prolong_triple(M, samples, seed, tol, workers),
        verify_decomposition_independence(M, samples, seed, tol, workers),
        verify_omega_tautological(M, samples, seed, tol, workers),
    ]
    return reports


def verify_all(
    models: Sequence[AlgebroidModel],
    seed: int,
    samples: int = 100,
    tol: float = 1e-8,
    workers: int = 1,
) -> list[VerificationReport]:
    """Run every applicable check on every model, then the model-free checks once.

    Returns:
        Reports in a fixed order; an empty model list gives an empty list
    """
    if not models:
        return []
    reports: list[VerificationReport] = []
    for M in models:
        logger.info("model_verification_started", model=M.name, samples=samples, seed=seed)
        reports.extend(verify_model(M, samples, seed, tol, workers))
    reports.append(verify_r_antisymplectic(samples, seed, workers=workers))
    reports.append(verify_r_legs(samples, seed, workers=workers))
    return reports
