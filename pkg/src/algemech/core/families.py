"""Seeded scalar-field families and sample generators.

Random fields are built as DSL text, so every sampled H or L can be printed
and re-parsed exactly.
"""

from collections.abc import Sequence
from itertools import combinations_with_replacement

import numpy as np

from algemech.core.algebroid import AlgebroidModel, PhasePoint
from algemech.core.expr import ExprField, FieldDomain
from algemech.core.prolongation import ProlongVector
from algemech.core.tulczyjew import Covector, TangentVec

COEFFICIENT_RANGE = 2.0
MAX_DEGREE = 3
RIGID_BODY_INERTIA = (1.0, 2.0, 3.0)


def _coefficient(value: float) -> str:
    return f"({value!r})"


def _monomial(names: Sequence[str]) -> str:
    counts: dict[str, int] = {}
    for name in names:
        counts[name] = counts.get(name, 0) + 1
    return "*".join(name if k == 1 else f"{name}^{k}" for name, k in counts.items())


def polynomial_text(
    rng: np.random.Generator,
    variables: Sequence[str],
    degree: int = MAX_DEGREE,
    scale: float = COEFFICIENT_RANGE,
) -> str:
    """Random polynomial of total degree <= ``degree`` with coefficients in [-scale, scale]."""
    terms = [_coefficient(float(rng.uniform(-scale, scale)))]
    for d in range(1, degree + 1):
        for names in combinations_with_replacement(variables, d):
            terms.append(f"{_coefficient(float(rng.uniform(-scale, scale)))}*{_monomial(names)}")
    return " + ".join(terms)


def random_hamiltonian(M: AlgebroidModel, rng: np.random.Generator) -> ExprField:
    """Polynomial H on E* of degree <= 3."""
    return M.field(polynomial_text(rng, M.variables(FieldDomain.ESTAR)), FieldDomain.ESTAR)


def random_lagrangian(M: AlgebroidModel, rng: np.random.Generator) -> ExprField:
    """Polynomial L on E of degree <= 3, regular or not."""
    return M.field(polynomial_text(rng, M.variables(FieldDomain.E)), FieldDomain.E)


def _positive_definite(m: int, rng: np.random.Generator) -> np.ndarray:
    B = rng.uniform(-1.0, 1.0, size=(m, m))
    return B.T @ B + np.eye(m)


def regular_lagrangian(M: AlgebroidModel, rng: np.random.Generator) -> ExprField:
    """L = 1/2 y^T A y + c(x) . y - V(x) with A positive definite and c affine in x."""
    base = M.variables(FieldDomain.BASE)
    fiber = M.variables(FieldDomain.E)[M.n :]
    A = _positive_definite(M.m, rng)
    terms = ["0"]
    for a in range(M.m):
        for b in range(a, M.m):
            weight = 0.5 * A[a, b] if a == b else A[a, b]
            terms.append(f"{_coefficient(float(weight))}*{fiber[a]}*{fiber[b]}")
    for a in range(M.m):
        linear = polynomial_text(rng, base, degree=1, scale=1.0)
        terms.append(f"({linear})*{fiber[a]}")
    if base:
        terms.append(f"(-1.0)*({polynomial_text(rng, base, degree=2, scale=1.0)})")
    return M.field(" + ".join(terms), FieldDomain.E)


def degenerate_lagrangian(M: AlgebroidModel, rng: np.random.Generator) -> ExprField:
    """L linear in the fiber: c(x) . y + V(x). Its fiber Hessian vanishes."""
    base = M.variables(FieldDomain.BASE)
    fiber = M.variables(FieldDomain.E)[M.n :]
    terms = [f"({polynomial_text(rng, base, degree=2)})*{y}" for y in fiber]
    terms.append(polynomial_text(rng, base, degree=2))
    return M.field(" + ".join(terms), FieldDomain.E)


def physical_lagrangian(M: AlgebroidModel) -> ExprField:
    """Textbook Lagrangian for a builtin model; kinetic energy otherwise."""
    if M.name == "so3":
        I1, I2, I3 = RIGID_BODY_INERTIA
        text = f"0.5*({I1!r}*y1^2 + {I2!r}*y2^2 + {I3!r}*y3^2)"
    elif M.name == "action1":
        text = "0.5*y1^2 + x1*y1"
    elif M.name in ("tm1", "tm2"):
        kinetic = " + ".join(f"y{a + 1}^2" for a in range(M.m))
        potential = " + ".join(f"x{i + 1}^2" for i in range(M.n))
        text = f"0.5*({kinetic}) - 0.5*({potential})"
    else:
        text = "0.5*(" + " + ".join(f"y{a + 1}^2" for a in range(M.m)) + ")" if M.m else "0"
    return M.field(text, FieldDomain.E)


def physical_hamiltonian(M: AlgebroidModel) -> ExprField:
    """Legendre dual of :func:`physical_lagrangian`."""
    if M.name == "so3":
        I1, I2, I3 = RIGID_BODY_INERTIA
        text = f"0.5*(xi1^2/{I1!r} + xi2^2/{I2!r} + xi3^2/{I3!r})"
    elif M.name == "action1":
        text = "0.5*(xi1 - x1)^2"
    elif M.name in ("tm1", "tm2"):
        kinetic = " + ".join(f"xi{a + 1}^2" for a in range(M.m))
        potential = " + ".join(f"x{i + 1}^2" for i in range(M.n))
        text = f"0.5*({kinetic}) + 0.5*({potential})"
    else:
        text = "0.5*(" + " + ".join(f"xi{a + 1}^2" for a in range(M.m)) + ")" if M.m else "0"
    return M.field(text, FieldDomain.ESTAR)


def random_point(M: AlgebroidModel, side: FieldDomain, rng: np.random.Generator) -> PhasePoint:
    """Point with coordinates uniform in [-1, 1]."""
    x = rng.uniform(-1.0, 1.0, size=M.n)
    fiber = rng.uniform(-1.0, 1.0, size=M.m)
    return PhasePoint(side, x, fiber)


def random_covector(p: PhasePoint, rng: np.random.Generator) -> Covector:
    return Covector(p, rng.uniform(-1.0, 1.0, size=p.n), rng.uniform(-1.0, 1.0, size=p.m))


def random_tangent(p: PhasePoint, rng: np.random.Generator) -> TangentVec:
    return TangentVec(p, rng.uniform(-1.0, 1.0, size=p.n), rng.uniform(-1.0, 1.0, size=p.m))


def random_prolong_vector(p: PhasePoint, rng: np.random.Generator) -> ProlongVector:
    return ProlongVector(p, rng.uniform(-1.0, 1.0, size=p.m), rng.uniform(-1.0, 1.0, size=p.m))
