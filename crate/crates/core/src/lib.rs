//! Round-based lifetime simulator for clustered wireless sensor networks.
//!
//! Models a field of battery-powered nodes running rotating cluster-head
//! protocols under seven scenarios: a classic static-sink baseline, four
//! mobile-sink variants that relay far uplinks through rendezvous nodes
//! parked along the sink's travel line, and two variants that elect heads
//! with a weighted four-term score (residual energy, sink distance, head
//! separation, service history).
//!
//! Runs are deterministic for a given [`ScenarioSpec`]: one seeded
//! generator drives node placement and every election draw.
//!
//! ```
//! use wsn_sim::{default_scenario, run_simulation, Variant};
//!
//! let spec = default_scenario(Variant::Pms2, 450.0, 7).unwrap();
//! let records = run_simulation(&spec);
//! assert!(!records.is_empty());
//! ```

pub mod election;
pub mod energy;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod model;

pub use election::{
    assign_rn_labels, elect_cluster_heads, leach_threshold, sub_threshold_t1, sub_threshold_t2,
    sub_threshold_t3, sub_threshold_t4, z_threshold, ElectedCh, ElectionContext,
};
pub use energy::{aggregation_energy, rx_energy, threshold_distance, tx_energy};
pub use engine::{init_simulation, move_sink, run_simulation, SimulationState};
pub use error::{MetricsError, SpecError};
pub use metrics::{
    first_dead_round, quarter_dead_round, read_round_csv, round_csv_string, summarize_replicates,
    write_round_csv, LifetimeSummary, MetricAggregate, ReplicateAggregate, RoundRecord,
};
pub use model::{
    default_scenario, ElectionWeights, EnergyParams, FieldGeometry, NodeRole, NodeState,
    ScenarioPatch, ScenarioSpec, SinkMotion, SinkState, Variant,
};
