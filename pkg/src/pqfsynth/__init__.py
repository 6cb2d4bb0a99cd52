"""Probabilistic quantum circuits with fallback for diagonal rotations.

Compiles single-qubit Z-rotations into measurement-assisted protocols over
the Clifford+T, Clifford+V, and Clifford+pi/12 gate sets: a few cheap
probabilistic rounds plus a deterministic fallback, with exact ring
arithmetic end to end.
"""

__version__ = "0.1.0"

from .config import DEFAULT_CONFIG, SynthConfig
from .errors import (AssumptionFailure, DegenerateDecomposition,
                     InternalReductionFailure, InvalidInput, IterationCap,
                     NotAdjustable, PqfError, PrecisionExhausted,
                     PreconditionViolated, VerificationFailure)
from .exactsynth import (BASIS_PI12, BASIS_T, BASIS_V, Circuit, ExactUnitary,
                         eval_circuit, synth, synth_pi12, synth_t, synth_v)
from .fallback import fallback_approx, feasible_candidates, phase_distance
from .modifier import find_modifier, grid_point
from .normeq import solve_norm_eq, solve_two_squares
from .protocol import (PqfProtocol, Round, SimReport, build_pqf, build_round,
                       cost_moments, euler_decompose, expected_cost,
                       protocol_from_dict, protocol_to_dict, protocol_to_json,
                       reduce_angle, simulate, two_qubit_form)
from .relation import PhaseTarget, approx_phase, cf_phase, rescale_floor
from .rings import CycInt, RealCycInt
