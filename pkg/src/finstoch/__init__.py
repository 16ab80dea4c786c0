"""Exact verification tools for finite stochastic kernels.

The package represents conditional distributions between finite sets
as row-stochastic matrices and builds on that one representation:
categorical composition and tensoring, conditionals and almost-sure
equality, conditional-independence checks, a semigraphoid derivation
engine, wiring-diagram models with local and ordered Markov property
checks and constructive factorization, latent constructions for
exchangeable sequences and arrays, and quantile representations that
outsource all randomness of a kernel to one uniform seed.
"""

from .ci import (
    PartitionReport,
    check_ci,
    check_mutual_ci,
    check_partition_lemma,
    ci_residual,
    common_refinement,
    mutual_ci_residual,
)
from .errors import (
    BadWireNaming,
    BudgetExceeded,
    DomainMismatch,
    FinstochError,
    InvalidTiming,
    NotAPartition,
    ParamMismatch,
    ShapeMismatch,
    SizeLimit,
    UnknownNode,
    UnknownWire,
    WireMismatch,
    WireOverlap,
)
from .exchange import (
    AHLemmaReport,
    AHSpec,
    PermSpec,
    adjacent_transpositions,
    ah_wires,
    build_ah_joint,
    build_definetti_joint,
    check_as_invariance,
    check_invariance,
    decode_names,
    grid_transpositions,
    invariance_residual,
    verify_ah_lemmas,
)
from .kernels import (
    DEFAULT_ATOL,
    CSReport,
    FinSet,
    JointState,
    Kernel,
    ParamKernel,
    as_equal,
    as_equal_residual,
    compose,
    conditional,
    copy_kernel,
    cs_check,
    deterministic_kernel,
    discard_kernel,
    identity,
    is_deterministic,
    marginalize,
    max_abs_diff,
    param_lift,
    parametric_as_equal,
    parametric_compose,
    parametric_cs_check,
    parametric_tensor,
    reindex,
    structural,
    swap_kernel,
    tensor,
    uniform_state,
)
from .markov import (
    MAX_ENTRIES,
    BoxAssignment,
    check_compatible,
    check_local_markov,
    check_ordered_markov,
    compatibility_residual,
    factorize,
    local_markov_residual,
    ordered_markov_residual,
    recompose,
)
from .models import (
    Box,
    CausalModel,
    TimingFunction,
    Violation,
    default_timing,
    ensure_valid,
    expand_ah_model,
    make_model,
    non_descendants,
    past,
    reaches,
    topo_order,
    validate_model,
    validate_timing,
)
from .quantiles import (
    Breakpoint,
    QuantileFunction,
    outsourced_form,
    pushforward_residual,
    quantile_pushback,
    verify_pushforward,
)
from .semigraphoid import (
    CLOSURE_RULES,
    RULES,
    CIStatement,
    Closure,
    Derivation,
    DerivationReport,
    DerivationStep,
    semigraphoid_closure,
    statement_holds,
    statement_key,
    validate_derivation,
)
from .serialization import (
    ahspec_from_json,
    ahspec_to_json,
    assignment_from_json,
    assignment_to_json,
    derivation_from_json,
    derivation_to_json,
    finset_from_json,
    finset_to_json,
    kernel_from_json,
    kernel_to_json,
    model_from_json,
    model_to_json,
    quantile_from_json,
    quantile_to_json,
    state_from_json,
    state_to_json,
    statement_from_json,
    statement_to_json,
    timing_from_json,
    timing_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "AHLemmaReport",
    "AHSpec",
    "BadWireNaming",
    "Box",
    "BoxAssignment",
    "Breakpoint",
    "BudgetExceeded",
    "CIStatement",
    "CLOSURE_RULES",
    "CSReport",
    "CausalModel",
    "Closure",
    "DEFAULT_ATOL",
    "Derivation",
    "DerivationReport",
    "DerivationStep",
    "DomainMismatch",
    "FinSet",
    "FinstochError",
    "InvalidTiming",
    "JointState",
    "Kernel",
    "MAX_ENTRIES",
    "NotAPartition",
    "ParamKernel",
    "ParamMismatch",
    "PartitionReport",
    "PermSpec",
    "QuantileFunction",
    "RULES",
    "ShapeMismatch",
    "SizeLimit",
    "TimingFunction",
    "UnknownNode",
    "UnknownWire",
    "Violation",
    "WireMismatch",
    "WireOverlap",
    "adjacent_transpositions",
    "ah_wires",
    "ahspec_from_json",
    "ahspec_to_json",
    "as_equal",
    "as_equal_residual",
    "assignment_from_json",
    "assignment_to_json",
    "build_ah_joint",
    "build_definetti_joint",
    "check_as_invariance",
    "check_ci",
    "check_compatible",
    "check_invariance",
    "check_local_markov",
    "check_mutual_ci",
    "check_ordered_markov",
    "check_partition_lemma",
    "ci_residual",
    "common_refinement",
    "compatibility_residual",
    "compose",
    "conditional",
    "copy_kernel",
    "cs_check",
    "decode_names",
    "default_timing",
    "derivation_from_json",
    "derivation_to_json",
    "deterministic_kernel",
    "discard_kernel",
    "ensure_valid",
    "expand_ah_model",
    "factorize",
    "finset_from_json",
    "finset_to_json",
    "grid_transpositions",
    "identity",
    "invariance_residual",
    "is_deterministic",
    "kernel_from_json",
    "kernel_to_json",
    "local_markov_residual",
    "make_model",
    "marginalize",
    "max_abs_diff",
    "model_from_json",
    "model_to_json",
    "mutual_ci_residual",
    "non_descendants",
    "ordered_markov_residual",
    "outsourced_form",
    "param_lift",
    "parametric_as_equal",
    "parametric_compose",
    "parametric_cs_check",
    "parametric_tensor",
    "past",
    "pushforward_residual",
    "quantile_from_json",
    "quantile_pushback",
    "quantile_to_json",
    "reaches",
    "recompose",
    "reindex",
    "semigraphoid_closure",
    "state_from_json",
    "state_to_json",
    "statement_from_json",
    "statement_holds",
    "statement_key",
    "statement_to_json",
    "structural",
    "swap_kernel",
    "tensor",
    "timing_from_json",
    "timing_to_json",
    "topo_order",
    "uniform_state",
    "validate_derivation",
    "validate_model",
    "validate_timing",
    "verify_ah_lemmas",
    "verify_pushforward",
]
