"""Evolving co-event schemes for quantum measure theory on finite history spaces."""

from .coevents import (
    CoEvent,
    check_prolongation_structure,
    coevent_ring,
    dual,
    evaluate,
    expand_around,
    from_truth_table,
    partial_difference,
    restrict_coevent,
    split_at_history,
    support,
    truth_table,
)
from .errors import (
    BudgetExceededError,
    CoEventError,
    InconsistentConstraintsError,
    InvalidLinkError,
    InvalidSupportError,
    NoPredecessorError,
    OracleScaleError,
    SchemeMisuseError,
    StageMismatchError,
    ValidationError,
    WalkTerminated,
)
from .measure import (
    DecoherenceMatrix,
    NullStructure,
    decoherence,
    enumerate_null_events,
    is_null_event,
    mu,
    validate_measure,
)
from .schemes import (
    RunResult,
    SchemeState,
    WalkPolicy,
    run,
    step_basic,
    step_classical,
    step_global,
    step_max_affirmative,
)
from .solver import (
    INITIAL,
    Budget,
    ConstraintFamily,
    SupportCandidate,
    build_constraints,
    enumerate_minimal_supports,
    is_valid_support,
    synthesize_coevents,
)
from .stages import (
    Event,
    History,
    Stage,
    StageSequence,
    event_algebra,
    extend_event,
    restrict_event,
    restrict_history,
    validate_stage_link,
)
from .systems import System, SystemSpec, build, build_custom, build_hopper, build_walker, load_system

__version__ = "0.1.0"
