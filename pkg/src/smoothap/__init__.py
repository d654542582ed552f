"""Smooth numbers in arithmetic progressions.

Exact counts of y-smooth integers per residue class, Dirichlet characters,
the saddle-point estimate and its inverse-Mellin integral, and detection of
the characters that obstruct equidistribution.
"""

from .characters import Character, CharacterGroup, build_group, enumerate_characters, euler_phi
from .distance import (PrimeFunction, ProblemSet, dist_char_twist, distance, flag_problem_characters,
                       kernel_subgroup, min_dist_over_t, problem_set, subgroup_index)
from .errors import CapacityError, DomainError, InvariantError, NumericError, PoleError
from .mellin import (ContourResult, MellinEvaluator, SmoothWeight, central_segment, contour_psi,
                     decay_bound, mellin_transform)
from .primes import (PrimeTable, SmoothCounts, build_prime_table, enumerate_smooth, is_smooth,
                     psi_character_exact, psi_exact, psi_progression_exact, psi_weighted_exact,
                     residue_histogram)
from .report import RunConfig, cmd_contour, cmd_equidist, cmd_psi, cmd_saddle, cmd_spectrum, cmd_subgroup
from .saddle import L_truncated, ht_estimate, log_L_truncated, phi2, saddle_data, solve_alpha, solve_xi

__version__ = "0.1.0"
