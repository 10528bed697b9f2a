"""Core functionality for AlgeMech."""

from algemech.core.algebroid import (
    AlgebroidModel,
    PhasePoint,
    SectionE,
    SectionEstar,
    builtin,
    builtin_names,
    load_model,
    model_from_dict,
    model_to_dict,
)
from algemech.core.dynamics import (
    Trajectory,
    integrate_el,
    integrate_el_prolong,
    integrate_forced,
    integrate_hamiltonian,
    rk4_step,
)
from algemech.core.expr import ExprField, FieldDomain, compile_field, parse, to_text
from algemech.core.jet import Jet1, Jet2, grad_eval, jet_eval
from algemech.core.prolongation import ProlongCovector, ProlongVector
from algemech.core.tulczyjew import Covector, TangentVec
from algemech.core.verify import verify_all

__all__ = [
    "AlgebroidModel",
    "PhasePoint",
    "SectionE",
    "SectionEstar",
    "builtin",
    "builtin_names",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "Trajectory",
    "integrate_el",
    "integrate_el_prolong",
    "integrate_forced",
    "integrate_hamiltonian",
    "rk4_step",
    "ExprField",
    "FieldDomain",
    "compile_field",
    "parse",
    "to_text",
    "Jet1",
    "Jet2",
    "grad_eval",
    "jet_eval",
    "ProlongCovector",
    "ProlongVector",
    "Covector",
    "TangentVec",
    "verify_all",
]
