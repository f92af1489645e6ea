"""BB84 quantum-key-distribution classical post-processing: analytic
secrecy-rate models, a deterministic seeded protocol simulator,
universal-hash authentication and privacy amplification, and the
classical computational-load budget."""

from .backend import BACKEND_NAME
from .params import (AttackSpec, BlockSpec, ChannelSpec, ConfigError,
                     DetectorSpec, Scenario, SecurityParams, SourceKind,
                     SourceSpec, SystemConfig, ValidationReport, load_config,
                     loads_config, serialize, validate)
from .photonics import SiftStats, expected_sift_stats, psi_geq, \
    transmission_probability
from .secrecy import (BoundsReport, ConstraintError, LeakageKind,
                      LeakageModel, PrivacyAmpBudget, SecrecyPoint,
                      binary_entropy, final_key_length, leakage_factors,
                      nu_max, secrecy_bounds_report, secrecy_capacity)
from .optimize import (CurvePoint, NoCapacityError, RangeResult, RateCurve,
                       max_range, optimal_mu, rate_curve)
from .hashing import (AuthKeyIndex, AuthTag, PAHashParams, SingleUseError,
                      equivalence_tag, pa_hash, wc_index_length, wc_tag)
from .protocol import (QBERAbortError, QuantumExchangeRecord, SessionReport,
                       SimulationSizeError, TranscriptLedger, run_session,
                       simulate_quantum_exchange)
from .loadmodel import (LoadBreakdown, computation_rate, computational_load,
                        iteration_counts)

__version__ = "0.1.0"
