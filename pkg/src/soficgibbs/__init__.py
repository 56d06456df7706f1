"""Gibbs measures, pressure and entropy on sofic subshifts via finite type approximations."""

from .errors import (
    BudgetExceeded,
    DepthMismatch,
    GapTooSmall,
    InsufficientContext,
    InvalidPotential,
    NoConvergence,
    NoMagicWord,
    NonPositiveEntry,
    NotPrimitive,
    ParseError,
    PeriodTooLarge,
    PresentationError,
    SoficGibbsError,
    SupportViolation,
    ValidationError,
    WordNotAdmissible,
)
from .symbolic import (
    Alphabet,
    PeriodicSet,
    SftApproximation,
    SoficPresentation,
    admissible_words,
    build_sft,
    enumerate_periodic,
    find_magic_word,
    is_magic,
    magic_boundary_constants,
    specification_length,
    specification_witness,
)
from .potential import Exponential, Polynomial, Potential, birkhoff_sum, derived_constants, finite_range
from .transfer import PerronData, TransferMatrix, build_transfer, gamma_tau, perron, power_estimate, projective_distance
from .constants import ProofConstants, proof_constants
from .gibbs import (
    CylinderMeasure,
    Estimate,
    convergence_study,
    elementary_measure,
    elementary_via_trace,
    entropy,
    gibbs_cylinder,
    gibbs_ratio_certificate,
    markov_extend,
    mixing_ratio,
    pressure,
    pressure_gap,
    relative_entropy,
    weak_distance,
)
from .estimator import FiniteTypeGibbs

__version__ = "0.1.0"
