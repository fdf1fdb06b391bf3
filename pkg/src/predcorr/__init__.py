"""Prediction-correction solvers for structured convex problems.

A run alternates a family-specific prediction step with a matrix-driven
correction. The plain mode carries the classical O(1/t) ergodic guarantee;
the accelerated mode reuses the same correction under a vanishing
extrapolation schedule and tightens the pointwise rate to O(1/t^2) while
the gap at the accelerated iterate decays like the schedule itself. Both
run only after the scheme's convergence certificate (two positive definite
matrices derived from the correction) has been checked.
"""
from .blocks import BlockVector
from .framework import (ConvergenceCertificate, CorrectionSpec, SingularCorrectionError,
                        SolverState, StoppingRule, SubproblemError,
                        UncertifiedSpecError, certify, correct, extrapolate, run)
from .linalg import (AsymmetryError, NotPositiveDefiniteError, cholesky_pd_check,
                     solve_spd, spectral_radius_gram, weighted_norm_sq)
from .problems import (FOperator, SplitMix64, VariationalInstance, gap_at,
                       instance_from_document, instance_to_document, kkt_oracle,
                       make_matrix_game, make_multiblock_quadratic,
                       make_saddle_quadratic, make_two_block_l1,
                       make_two_block_quadratic, pointwise_residual)
from .prox import (BoxIndicator, L1Penalty, ProxOp, QuadraticCost, SimplexIndicator,
                   project_box, project_simplex, prox_quadratic, soft_threshold)
from .schedule import DEFAULT_TAU_INIT, TauSchedule, tau_at, tau_next
from .solvers import (MultiBlockSpec, SaddleSpec, TwoBlockSpec,
                      multiblock_predict_baseline, multiblock_predict_faster,
                      saddle_predict_baseline, saddle_predict_faster,
                      solve_prediction_inclusion, two_block_predict_baseline,
                      two_block_predict_faster)
from .trace import CSV_COLUMNS, IterationTrace, TraceRecord

__version__ = "0.1.0"

__all__ = [
    "AsymmetryError", "BlockVector", "BoxIndicator", "CSV_COLUMNS",
    "ConvergenceCertificate", "CorrectionSpec", "DEFAULT_TAU_INIT", "FOperator",
    "IterationTrace", "L1Penalty", "MultiBlockSpec", "NotPositiveDefiniteError",
    "ProxOp", "QuadraticCost", "SaddleSpec", "SimplexIndicator",
    "SingularCorrectionError", "SolverState", "SplitMix64", "StoppingRule",
    "SubproblemError", "TauSchedule", "TraceRecord", "TwoBlockSpec",
    "UncertifiedSpecError", "VariationalInstance", "certify", "cholesky_pd_check",
    "correct", "extrapolate", "gap_at", "instance_from_document",
    "instance_to_document", "kkt_oracle", "make_matrix_game",
    "make_multiblock_quadratic", "make_saddle_quadratic", "make_two_block_l1",
    "make_two_block_quadratic", "multiblock_predict_baseline",
    "multiblock_predict_faster", "pointwise_residual", "project_box",
    "project_simplex", "prox_quadratic", "run", "saddle_predict_baseline",
    "saddle_predict_faster", "solve_prediction_inclusion", "soft_threshold",
    "solve_spd", "spectral_radius_gram", "tau_at", "tau_next",
    "two_block_predict_baseline", "two_block_predict_faster", "weighted_norm_sq",
]
