"""Integer-lattice frequency sets for exponential bases on parallelepipeds."""

from .bounds import (
    BoundCert, NegativeLog, kadec_B, kadec_bounds, lindner_log_lower_bound, tensor_bounds,
    transform_bounds,
)
from .construct import (
    ConditionReport, PerturbedSequence, avdonin_condition_check, bailey_condition_check,
    kadec_condition_check, lift_frequencies, rectangular_construction, rounded_dual_construction,
    rectangular_rule, rounded_dual_rule, spectral_norm_construction, spectral_norm_rule,
    spectral_norm_threshold, tensor_product,
)
from .decomp import Witness, WitnessReport, check_witness, find_witness_heuristic, parallelepiped_equal
from .errors import (
    BadAlpha, BadDiagonal, BadStructure, ConfigError, DuplicateAfterRounding, IncompleteBlock,
    NonConvergence, NormTooLarge, OutOfRange, ParalatticeError, Singular, TooLarge,
)
from .lattice import (
    BeattyRule, FreqSet, LatticeRule, beatty_fraenkel, density_estimate, lattice_points, round_half_up,
    rounded_lattice,
)
from .linalg import classify_matrix, det, inv, inv_transpose, spectral_norm
from .verify import (
    GramReport, assemble_gram, eig_range, equidistribution_check, gram_entry, orthogonality_test,
    truncation_ladder,
)

__version__ = "0.1.0"

__all__ = [
    "BadAlpha", "BadDiagonal", "BadStructure", "BeattyRule", "BoundCert", "ConditionReport",
    "ConfigError", "DuplicateAfterRounding", "FreqSet", "GramReport", "IncompleteBlock",
    "LatticeRule", "NegativeLog", "NonConvergence", "NormTooLarge", "OutOfRange",
    "ParalatticeError", "PerturbedSequence", "Singular", "TooLarge", "Witness", "WitnessReport",
    "assemble_gram", "avdonin_condition_check", "bailey_condition_check", "beatty_fraenkel",
    "check_witness", "classify_matrix", "density_estimate", "det", "eig_range",
    "equidistribution_check", "find_witness_heuristic", "gram_entry", "inv", "inv_transpose",
    "kadec_B", "kadec_bounds", "kadec_condition_check", "lattice_points", "lift_frequencies",
    "lindner_log_lower_bound", "orthogonality_test", "parallelepiped_equal",
    "rectangular_construction", "rectangular_rule", "round_half_up", "rounded_dual_construction",
    "rounded_dual_rule", "rounded_lattice", "spectral_norm", "spectral_norm_construction",
    "spectral_norm_rule", "spectral_norm_threshold", "tensor_bounds", "tensor_product",
    "transform_bounds", "truncation_ladder",
]
