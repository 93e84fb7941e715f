"""Deterministic simulator for trust-managed clustered wireless sensor
networks: a semi-centralized reputation protocol with spatial outlier
detection and packet sequence validation, an EigenTrust baseline behind the
same engine hooks, and a threat-level sweep harness with trade-off scoring.
"""

from .adversary import (AdversaryProfile, Oscillator, PopulationPlan,
                        assign_adversaries, malicious_forward, malicious_sense)
from .detection import (Incident, OutlierVerdict, VariogramInput,
                        assess_reading, check_data_consistency, estimate_path,
                        expected_value, inspect_sequence)
from .eigentrust import (InteractionLedger, compute_global_trust,
                         eigentrust_select_link, local_trust_matrix)
from .engine import (EnergyLedger, EventRecord, Packet, RunConfig,
                     SimulationEngine, deliver_hop, make_run_config,
                     run_simulation)
from .metrics import (MetricsRecord, NoBenevolentTrafficError,
                      NormalizationBoundError, ScoreWeights, compute_accuracy,
                      tradeoff_score)
from .protocol import (ClusterFullError, ClusterHeadState, LocalTrustEntry,
                       NodeState, ProtocolConstants, TrustThresholds,
                       TrustUpdate, band_for_seed, decay_spatial_presence,
                       default_trust, flood_registration, global_update,
                       local_update, pick_from_bands, select_link)
from .sweep import (CSV_HEADER, SweepError, SweepPoint, SweepReport,
                    SweepSpec, emit_csv, parse_csv, round_up_energy_cap,
                    run_sweep)
from .topology import (NetworkTopology, Position, TopologyConfig,
                       TopologyError, UnknownNodeError, distance,
                       generate_topology, head_grid_positions)

__version__ = "0.1.0"
