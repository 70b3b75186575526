"""Simulation and path analysis of obliquely reflected Brownian motion in a
planar wedge: boundary-layer martingale extraction, excursion/local-time
decomposition, strong p-variation machinery, and Skorokhod-problem checkers.
"""

from .config import ExperimentConfig, load_config
from .decompose import (BmDiagnostics, Decomposition, LayerCrossings,
                        PushComponents, bm_diagnostics, extract_martingale_part,
                        layer_crossings, occupation_outside, pushing_components,
                        wdelta)
from .excursions import (ExcursionSet, IndexEstimate, InverseLocalTime,
                         LocalTimeCurve, duration_tail_index, excursions,
                         inverse_local_time, local_time_curve, pool_excursions,
                         stable_jump_index)
from .geometry import (ConeDescriptor, VertexCone, WedgeConfig, cone_at,
                       contains, distance_outside, hull_is_full, make_wedge)
from .simulate import (PathBundle, SimParams, batch_simulate, reflect_step,
                       simulate)
from .skorokhod import (ESPReport, SPReport, ToleranceProfile, check_esp,
                        check_sp)
from .variation import (HolderReparam, TimeChange, VariationReport,
                        brute_force_p_variation, build_phi_pq, energy_sum,
                        holder_reparam, prefix_p_variation, strong_p_variation,
                        variation_levels)

__version__ = "0.1.0"
