"""Finite-field Bayesian compressed sensing lab.

Source generation, sparse random sensing, exact MAP decoding, the full set
of closed-form recovery thresholds, and a seeded Monte Carlo harness that
validates the closed forms against brute-force oracles.
"""

from .gf import GF, FieldError
from .sources import (EntropyReport, GaussianFieldSource, SiSource, StmSource,
                      conditional_entropy_bound, epsilon_rho)
from .channel import CommNoise, MatrixLaw, SensingChannel, measure, noise_entropy
from .decoder import (DecodeResult, PosteriorScore, SearchSpaceError, decode,
                      decode_max_q_prob, decode_nc, decode_ncs, run_trial)
from .bounds import (BoundInputs, BoundReport, FParams, error_exponent_nc,
                     f_collision, figure_curves, necessary_ratio, select_alpha,
                     sufficient_ratio, upper_bound_nc)
from .harness import (Scenario, build_scenario, estimate_pe, phase_sweep,
                      scenario_bounds, verify_appendix_b,
                      verify_decoder_equivalence, verify_lemma2)

__version__ = "0.1.0"
