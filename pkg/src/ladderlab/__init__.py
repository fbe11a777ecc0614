"""Numerical laboratory for iterated integrals of |zeta(1/2+it)|^2 along a model Jacob's ladder."""

from .zeta_kernel import DomainError, EvalMode, T_MIN, hardy_z, rs_theta, zeta_mod_sq
from .ladder import (EULER_GAMMA, Constants, LadderTable, WindowError, build_ladder, load_ladder,
                     phi1, phi1_inv, phi1_iter, reverse_point, save_ladder)
from .segments import DeltaSet, SegmentHandle, delta_set, segment, window_requirement
from .energy import (EnergyRecord, MeanValuePoints, energy_general, energy_pq, mean_value_points,
                     spectral_energy, weighted_energy)
from .algebra import (AlgebraReport, ExponentIndex, factorization_check, generator_check,
                      inverse_check, product_check, unit_check)
from .ortho import BaseSystem, GramReport, base_system, gram_matrix, weighted_eval

__version__ = "0.1.0"
