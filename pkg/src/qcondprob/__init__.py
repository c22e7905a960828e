"""Conditional probability for quantum measurements, POVM dilation and BB84 equivalence."""

from .errors import *  # noqa: F401,F403
from .linalg import DEFAULT_TOL, FactorLayout, Tolerance
from .outcomes import Event, OutcomeSpace, all_events, complement, intersect, product_event, union
from .povm import OperatorValuedMeasure, ValidationReport, tensor_povm, validate
from .states import DensityOperator, ProbabilityTable, StateEnsemble, UnitaryOperator, probability_table, trace_rule
from .conditioning import (
    ConditionedState,
    condition_pvm,
    condition_rect_full,
    condition_rect_reduced,
    conditional_probability_pvm,
    conditional_probability_rect,
)
from .neumark import FamilyDilation, NeumarkDilation, dilate, dilate_family, lift_state, verify_lifting
from .probes import ChainScenario, ProbeStep, chain_conditional, chain_joint, chain_joint_bruteforce
from .bb84 import EntangledScenario, TransmittedScenario, derive_transmitted, equivalence_report

__version__ = "0.1.0"
