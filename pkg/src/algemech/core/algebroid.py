"""Almost-Lie algebroid data model and its bracket calculus.

Everything lives on one trivializing chart: the base is an open subset of
R^n, E = R^n x R^m with frame sections e_1..e_m, the anchor is the n x m
matrix of functions rho^i_a(x), and the bracket of frame sections is
[e_a, e_b] = C^c_ab(x) e_c.
"""

import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np
import structlog

from algemech.core.expr import ExprField, FieldDomain, compile_field, free_variables, variable_names
from algemech.core.jet import ConstantField, FloatArray, ScalarField, evaluate, jet_eval
from algemech.exceptions import (
    AlgeMechError,
    DimensionError,
    ExpressionError,
    ModelError,
    SideMismatchError,
)

logger = structlog.get_logger(__name__)

SKEW_TOLERANCE = 1e-12
SKEW_CHECK_POINTS = 5


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """A point of E (coordinates x, y) or of E* (coordinates x, xi)."""

    side: FieldDomain
    x: FloatArray
    fiber: FloatArray

    def __post_init__(self) -> None:
        if self.side == FieldDomain.BASE:
            raise SideMismatchError("a phase point lives on E or E*, not on the base")
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "fiber", np.asarray(self.fiber, dtype=np.float64).reshape(-1))

    @classmethod
    def on_e(cls, x: Sequence[float] | FloatArray, y: Sequence[float] | FloatArray) -> "PhasePoint":
        return cls(FieldDomain.E, np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))

    @classmethod
    def on_estar(
        cls, x: Sequence[float] | FloatArray, xi: Sequence[float] | FloatArray
    ) -> "PhasePoint":
        return cls(
            FieldDomain.ESTAR, np.asarray(x, dtype=np.float64), np.asarray(xi, dtype=np.float64)
        )

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    @property
    def m(self) -> int:
        return int(self.fiber.shape[0])

    @property
    def coords(self) -> FloatArray:
        """Base coordinates followed by fiber coordinates."""
        return np.concatenate([self.x, self.fiber])

    def same_as(self, other: "PhasePoint") -> bool:
        return (
            self.side == other.side
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.fiber, other.fiber)
        )

    def __repr__(self) -> str:
        return f"PhasePoint({self.side.value}, x={self.x.tolist()}, fiber={self.fiber.tolist()})"


@dataclass(frozen=True)
class SectionE:
    """Section e = f^a(x) e_a of E."""

    coeffs: tuple[ScalarField, ...]

    @classmethod
    def constant(cls, values: Sequence[float], n: int) -> "SectionE":
        return cls(tuple(ConstantField(float(v), n) for v in values))

    @classmethod
    def frame(cls, a: int, n: int, m: int) -> "SectionE":
        """The frame section e_a."""
        return cls.constant([1.0 if b == a else 0.0 for b in range(m)], n)

    def at(self, x: FloatArray) -> FloatArray:
        return np.array([evaluate(f, x) for f in self.coeffs], dtype=np.float64)

    def derivatives(self, x: FloatArray) -> FloatArray:
        """Coefficient gradients, shape (m, n)."""
        n = int(np.asarray(x).shape[0])
        if not self.coeffs:
            return np.zeros((0, n))
        return np.array([jet_eval(f, x).grad for f in self.coeffs], dtype=np.float64).reshape(
            len(self.coeffs), n
        )


@dataclass(frozen=True)
class SectionEstar(SectionE):
    """Section xi = f_a(x) eps^a of E*, coefficients on the dual frame."""

    @classmethod
    def constant(cls, values: Sequence[float], n: int) -> "SectionEstar":
        return cls(tuple(ConstantField(float(v), n) for v in values))

    @classmethod
    def frame(cls, a: int, n: int, m: int) -> "SectionEstar":
        return cls.constant([1.0 if b == a else 0.0 for b in range(m)], n)


def _is_constant(f: ScalarField) -> bool:
    if isinstance(f, ConstantField):
        return True
    if isinstance(f, ExprField):
        return not free_variables(f.expr)
    return f.arity == 0


@dataclass(frozen=True)
class AlgebroidModel:
    """Chart data of an almost-Lie algebroid.

    Attributes:
        name: Model name
        n: Base dimension
        m: Fiber rank
        rho: Anchor components, ``rho[i][a]`` is rho^i_a(x)
        C: Structure functions, ``C[c][a][b]`` is C^c_ab(x)
        almost_lie: Whether the model is declared to satisfy the anchor compatibility
        description: Free text
    """

    name: str
    n: int
    m: int
    rho: tuple[tuple[ScalarField, ...], ...]
    C: tuple[tuple[tuple[ScalarField, ...], ...], ...]
    almost_lie: bool = True
    description: str = ""

    def __post_init__(self) -> None:
        if self.n < 0 or self.m < 0:
            raise DimensionError("dimensions must be non-negative")
        if len(self.rho) != self.n or any(len(row) != self.m for row in self.rho):
            raise DimensionError(f"rho must be {self.n} x {self.m}")
        if len(self.C) != self.m or any(
            len(plane) != self.m or any(len(row) != self.m for row in plane) for plane in self.C
        ):
            raise DimensionError(f"C must be {self.m} x {self.m} x {self.m}")
        for f in self._fields():
            if f.arity != self.n:
                raise DimensionError(f"coefficient field arity {f.arity} differs from n={self.n}")

    def _fields(self) -> list[ScalarField]:
        out = [f for row in self.rho for f in row]
        out += [f for plane in self.C for row in plane for f in row]
        return out

    def base(self, x: Sequence[float] | FloatArray) -> FloatArray:
        arr = np.asarray(x, dtype=np.float64).reshape(-1)
        if arr.shape[0] != self.n:
            raise DimensionError(f"model '{self.name}' has n={self.n}, got {arr.shape[0]}")
        return arr

    def check_point(self, p: PhasePoint, side: FieldDomain | None = None) -> None:
        """Raise if ``p`` does not fit this model (or the requested side)."""
        if side is not None and p.side != side:
            raise SideMismatchError(f"expected a point on {side.value}, got {p.side.value}")
        if p.n != self.n or p.m != self.m:
            raise DimensionError(
                f"model '{self.name}' has (n, m)=({self.n}, {self.m}), point has ({p.n}, {p.m})"
            )

    def variables(self, domain: FieldDomain) -> tuple[str, ...]:
        return variable_names(domain, self.n, self.m)

    def field(self, text: str, domain: FieldDomain) -> ExprField:
        """Compile a DSL expression over this model's variables for ``domain``."""
        return compile_field(text, self.variables(domain))

    @cached_property
    def _anchor_table(self) -> FloatArray | None:
        """Anchor matrix when no entry depends on x."""
        if not all(_is_constant(f) for row in self.rho for f in row):
            return None
        return self._evaluate_anchor(np.zeros(self.n))

    @cached_property
    def _structure_table(self) -> FloatArray | None:
        """Structure functions when no entry depends on x."""
        if not all(_is_constant(f) for plane in self.C for row in plane for f in row):
            return None
        return self._evaluate_structure(np.zeros(self.n))

    def anchor(self, x: FloatArray) -> FloatArray:
        """Matrix rho^i_a(x), shape (n, m)."""
        table = self._anchor_table
        if table is not None:
            self.base(x)
            return table.copy()
        return self._evaluate_anchor(x)

    def _evaluate_anchor(self, x: FloatArray) -> FloatArray:
        return np.array(
            [[evaluate(f, x) for f in row] for row in self.rho], dtype=np.float64
        ).reshape(self.n, self.m)

    def anchor_derivatives(self, x: FloatArray) -> FloatArray:
        """``D[i, a, j] = d rho^i_a / d x^j``, shape (n, m, n)."""
        return np.array(
            [[jet_eval(f, x).grad for f in row] for row in self.rho], dtype=np.float64
        ).reshape(self.n, self.m, self.n)

    def structure(self, x: FloatArray) -> FloatArray:
        """``C[c, a, b]`` at x, shape (m, m, m)."""
        table = self._structure_table
        if table is not None:
            self.base(x)
            return table.copy()
        return self._evaluate_structure(x)

    def _evaluate_structure(self, x: FloatArray) -> FloatArray:
        return np.array(
            [[[evaluate(f, x) for f in row] for row in plane] for plane in self.C],
            dtype=np.float64,
        ).reshape(self.m, self.m, self.m)

    def structure_derivatives(self, x: FloatArray) -> FloatArray:
        """``D[c, a, b, j] = d C^c_ab / d x^j``, shape (m, m, m, n)."""
        return np.array(
            [[[jet_eval(f, x).grad for f in row] for row in plane] for plane in self.C],
            dtype=np.float64,
        ).reshape(self.m, self.m, self.m, self.n)


# Model construction


def _compile_table(entries: Any, variables: tuple[str, ...], label: str) -> Any:
    if isinstance(entries, list):
        return tuple(_compile_table(item, variables, f"{label}[{i}]") for i, item in enumerate(entries))
    if isinstance(entries, int | float) and not isinstance(entries, bool):
        return compile_field(repr(float(entries)), variables)
    if not isinstance(entries, str):
        raise ModelError(f"{label}: expected an expression string, got {type(entries).__name__}")
    try:
        return compile_field(entries, variables)
    except ExpressionError as e:
        raise ModelError(f"{label}: {e}") from e


def model_from_dict(data: Mapping[str, Any], validate: bool = True) -> AlgebroidModel:
    """Build a model from the JSON layout.

    Args:
        data: ``{"name", "n", "m", "rho", "C"}`` plus optional
            ``"almost_lie"`` and ``"description"``
        validate: Run the skew-symmetry check at sampled points

    Returns:
        The model

    Raises:
        ModelError: On missing keys, bad expressions, shape or skew violations
    """
    try:
        name = str(data["name"])
        n = int(data["n"])
        m = int(data["m"])
        rho_raw = data["rho"]
        c_raw = data["C"]
    except (KeyError, TypeError, ValueError) as e:
        raise ModelError(f"Malformed model description: {e}") from e

    variables = variable_names(FieldDomain.BASE, n, m)
    rho = _compile_table(rho_raw if n else [], variables, "rho")
    C = _compile_table(c_raw, variables, "C")

    model = AlgebroidModel(
        name=name,
        n=n,
        m=m,
        rho=rho,
        C=C,
        almost_lie=bool(data.get("almost_lie", True)),
        description=str(data.get("description", "")),
    )
    if validate:
        check_skew(model)
    logger.debug("model_built", model=name, n=n, m=m)
    return model


def model_to_dict(model: AlgebroidModel) -> dict[str, Any]:
    """Inverse of :func:`model_from_dict` for expression-backed models."""
    return {
        "name": model.name,
        "n": model.n,
        "m": model.m,
        "rho": [[str(f) for f in row] for row in model.rho],
        "C": [[[str(f) for f in row] for row in plane] for plane in model.C],
        "almost_lie": model.almost_lie,
        "description": model.description,
    }


def load_model(path: Path) -> AlgebroidModel:
    """Load a model JSON file.

    Raises:
        ModelError: If the file is missing, not JSON, or describes an invalid model
    """
    if not path.exists():
        raise ModelError(f"Model file not found: {path}")
    try:
        with path.open(encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ModelError(f"Failed to read model file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ModelError(f"Model file {path} must contain a JSON object")
    model = model_from_dict(data)
    logger.info("model_loaded", model=model.name, path=str(path))
    return model


def sample_base_points(model: AlgebroidModel, count: int, rng: np.random.Generator) -> FloatArray:
    """Seeded base points in [0.1, 1.0]^n, shape (count, n)."""
    return rng.uniform(0.1, 1.0, size=(count, model.n))


def check_skew(model: AlgebroidModel, points: FloatArray | None = None) -> None:
    """Verify C^c_ab = -C^c_ba at sampled points.

    Raises:
        ModelError: On a violation or when the structure functions cannot be evaluated
    """
    if points is None:
        points = sample_base_points(model, SKEW_CHECK_POINTS, np.random.default_rng(0))
    for x in points:
        try:
            c = model.structure(x)
        except AlgeMechError as e:
            raise ModelError(f"model '{model.name}': structure functions fail at {x.tolist()}: {e}") from e
        violation = float(np.max(np.abs(c + np.transpose(c, (0, 2, 1))), initial=0.0))
        if violation > SKEW_TOLERANCE:
            raise ModelError(
                f"model '{model.name}': structure functions are not skew-symmetric "
                f"(|C + C^T| = {violation:.3g} at x={x.tolist()})"
            )


# Builtin registry


def _zeros(m: int) -> list[list[list[str]]]:
    return [[["0"] * m for _ in range(m)] for _ in range(m)]


def _identity(n: int) -> list[list[str]]:
    return [["1" if i == a else "0" for a in range(n)] for i in range(n)]


def _so3_structure() -> list[list[list[str]]]:
    table = _zeros(3)
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        table[c][a][b] = "1"
        table[c][b][a] = "-1"
    return table


def _heis3_structure() -> list[list[list[str]]]:
    table = _zeros(3)
    table[2][0][1] = "1"
    table[2][1][0] = "-1"
    return table


BUILTIN_MODELS: dict[str, dict[str, Any]] = {
    "tm1": {
        "name": "tm1",
        "n": 1,
        "m": 1,
        "rho": _identity(1),
        "C": _zeros(1),
        "description": "Tangent bundle of R",
    },
    "tm2": {
        "name": "tm2",
        "n": 2,
        "m": 2,
        "rho": _identity(2),
        "C": _zeros(2),
        "description": "Tangent bundle of R^2",
    },
    "so3": {
        "name": "so3",
        "n": 0,
        "m": 3,
        "rho": [],
        "C": _so3_structure(),
        "description": "Lie algebra so(3) over a point",
    },
    "heis3": {
        "name": "heis3",
        "n": 0,
        "m": 3,
        "rho": [],
        "C": _heis3_structure(),
        "description": "Heisenberg Lie algebra over a point",
    },
    "action1": {
        "name": "action1",
        "n": 1,
        "m": 1,
        "rho": [["x1"]],
        "C": _zeros(1),
        "description": "Action algebroid of the scaling field x d/dx on R",
    },
    "broken2": {
        "name": "broken2",
        "n": 2,
        "m": 2,
        "rho": [["1", "0"], ["0", "x1"]],
        "C": _zeros(2),
        "almost_lie": False,
        "description": "Anchor incompatible with the zero bracket; not almost-Lie",
    },
}


def builtin_names() -> list[str]:
    return sorted(BUILTIN_MODELS)


def builtin(name: str) -> AlgebroidModel:
    """Return a registry model by name.

    Raises:
        ModelError: If the name is not registered
    """
    try:
        data = BUILTIN_MODELS[name]
    except KeyError:
        raise ModelError(
            f"Unknown model '{name}'. Builtin models: {', '.join(builtin_names())}"
        ) from None
    return model_from_dict(data)


# Calculus


def _coefficients(M: AlgebroidModel, e: SectionE | FloatArray | Sequence[float], x: FloatArray) -> FloatArray:
    if isinstance(e, SectionE):
        values = e.at(x)
    else:
        values = np.asarray(e, dtype=np.float64).reshape(-1)
    if values.shape[0] != M.m:
        raise DimensionError(f"section has {values.shape[0]} coefficients, model has m={M.m}")
    return values


def anchor_apply(M: AlgebroidModel, p: PhasePoint) -> FloatArray:
    """rho^i_a(x) y^a at a point of E."""
    M.check_point(p, FieldDomain.E)
    return M.anchor(p.x) @ p.fiber


def bracket(M: AlgebroidModel, e: SectionE, e2: SectionE, x: Sequence[float] | FloatArray) -> FloatArray:
    """Fiber coordinates of [e, e'](x).

    With e = f^a e_a and e' = g^b e_b:
    [e, e']^c = f^a g^b C^c_ab + rho(e)(g^c) - rho(e')(f^c).
    """
    x = M.base(x)
    f, g = _coefficients(M, e, x), _coefficients(M, e2, x)
    rho = M.anchor(x)
    result = np.einsum("cab,a,b->c", M.structure(x), f, g)
    if M.n:
        result = result + e2.derivatives(x) @ (rho @ f) - e.derivatives(x) @ (rho @ g)
    return result


def dE_function(
    M: AlgebroidModel,
    f: ScalarField,
    e: SectionE | FloatArray | Sequence[float],
    x: Sequence[float] | FloatArray,
) -> float:
    """d_E f(e) = rho(e) f at x, for a function f of the base."""
    x = M.base(x)
    vector = M.anchor(x) @ _coefficients(M, e, x)
    return float(jet_eval(f, x).grad @ vector)


def _pairing_gradient(xi: SectionEstar, e: SectionE, x: FloatArray) -> FloatArray:
    """Gradient of x -> <xi(x), e(x)>."""
    return xi.derivatives(x).T @ e.at(x) + e.derivatives(x).T @ xi.at(x)


def dE_oneform(
    M: AlgebroidModel,
    xi: SectionEstar,
    e: SectionE,
    e2: SectionE,
    x: Sequence[float] | FloatArray,
) -> float:
    """d_E xi(e, e') = rho(e)<xi, e'> - rho(e')<xi, e> - <xi, [e, e']>."""
    x = M.base(x)
    rho = M.anchor(x)
    value = -float(xi.at(x) @ bracket(M, e, e2, x))
    if M.n:
        value += float(_pairing_gradient(xi, e2, x) @ (rho @ e.at(x)))
        value -= float(_pairing_gradient(xi, e, x) @ (rho @ e2.at(x)))
    return value


def almost_lie_residual(M: AlgebroidModel, x: Sequence[float] | FloatArray) -> FloatArray:
    """R^i_ab = rho^i_c C^c_ab - (rho^j_a d_j rho^i_b - rho^j_b d_j rho^i_a), shape (n, m, m)."""
    x = M.base(x)
    rho = M.anchor(x)
    drho = M.anchor_derivatives(x)
    image = np.einsum("ic,cab->iab", rho, M.structure(x))
    lie = np.einsum("ja,ibj->iab", rho, drho) - np.einsum("jb,iaj->iab", rho, drho)
    return np.asarray(image - lie, dtype=np.float64)


def jacobi_residual(M: AlgebroidModel, x: Sequence[float] | FloatArray) -> FloatArray:
    """Cyclic sum of [[e_a, e_b], e_c] over frame sections, shape (m, m, m, m) as [g, a, b, c]."""
    x = M.base(x)
    C = M.structure(x)
    term = np.einsum("dab,gdc->gabc", C, C)
    if M.n:
        term = term - np.einsum("ic,gabi->gabc", M.anchor(x), M.structure_derivatives(x))
    return np.asarray(
        term + np.einsum("gbca->gabc", term) + np.einsum("gcab->gabc", term), dtype=np.float64
    )


def is_almost_lie(
    M: AlgebroidModel, points: FloatArray, tol: float = 1e-9
) -> tuple[bool, float]:
    """Numeric almost-Lie gate over the given base points.

    Returns:
        (holds, max abs residual)
    """
    worst = 0.0
    for x in points:
        worst = max(worst, float(np.max(np.abs(almost_lie_residual(M, x)), initial=0.0)))
    return worst <= tol, worst
