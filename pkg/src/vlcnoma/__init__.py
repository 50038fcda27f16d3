"""Max-min user-rate simulator/optimizer for multi-carrier NOMA-enabled
centralized VLC networks."""

from .allocation import (AllocationMatrix, PenaltyParams, RateReport, SaParams,
                         TsParams, UNASSIGNED, evaluate, neighbor,
                         random_solution, simulated_annealing, tabu_search)
from .association import Binding, bind_max_gain, parity_cost, repair_parity
from .geometry import (Led, Room, Scenario, UserTerminal, channel_gain,
                       channel_matrix, distance_matrix, lambertian_order,
                       place_leds_lattice, sample_users)
from .harness import (ExperimentConfig, RealizationResult, ResultRow,
                      run_realization, run_sweep)
from .pairing import (Pair, PairSet, SCHEME_IMPOSED, SCHEME_NOT_IMPOSED,
                      d_nlupa)
from .phy import (NoiseConfig, PhyContext, PowerConfig, SubcarrierPlan,
                  dbm_to_watts, noise_variance, pair_rates, singleton_rate)
from .power_split import BisectionError, PowerSplit, bisect_split

__version__ = "0.1.0"
