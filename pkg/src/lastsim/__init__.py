"""Sphere-decoding complexity simulator for LAST coded MIMO channels."""

from .analysis import (ExponentProfile, compute_L0, cutoff_multiplexing_gain,
                       dmt_exponent, hypersphere_volume, l_exponent,
                       l_out_theoretical, maximize_l_over_alpha,
                       partial_det_factorization_check,
                       sequential_complexity_theoretical)
from .channel import (ChannelRealization, EigenExponents, alpha_vector,
                      is_outage, last_rate, realify, sample_channel, transmit,
                      vec_real)
from .decoders import (DecodeOutcome, OracleScaleError, SingularLatticeError,
                       SphereConfig, babai_nearest_plane, brute_force_cvp,
                       default_radius, layer_count_enumeration, lll_reduce,
                       lr_aided_decode, sphere_decode, stack_sequential_decode)
from .harness import (ExperimentConfig, PointSummary, SweepResult, TrialRecord,
                      run_sweep, run_trial, tail_distribution)
from .lattices import (Lattice, NestedLastCode, RateInfeasibleError,
                       build_nested_code, construct_mod_p_lattice,
                       effective_radius, encode, fundamental_volume)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
