//! Domain types and configuration shared by every other module: protocol
//! variants, node state, field geometry, radio constants, and election
//! weights, plus the JSON config surface the CLI reads.

use serde::{Deserialize, Serialize};

use crate::error::SpecError;

/// Protocol variant under simulation.
///
/// `Static` is classic single-sink clustering. `Ms1`..`Ms4` add a mobile
/// sink and rendezvous relays with the classic probabilistic election.
/// `Pms2`/`Pms4` replace the election threshold with the four-term
/// weighted score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Static,
    Ms1,
    Ms2,
    Ms3,
    Ms4,
    Pms2,
    Pms4,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Static,
        Variant::Ms1,
        Variant::Ms2,
        Variant::Ms3,
        Variant::Ms4,
        Variant::Pms2,
        Variant::Pms4,
    ];

    /// True for every variant with a moving sink and rendezvous relays.
    pub fn is_mobile(self) -> bool {
        !matches!(self, Variant::Static)
    }

    /// Rendezvous nodes stand for election under MS3, MS4 and PMS4 only.
    pub fn rn_may_be_ch(self) -> bool {
        matches!(self, Variant::Ms3 | Variant::Ms4 | Variant::Pms4)
    }

    /// MS2 and MS4 additionally require candidates to hold at least the
    /// average residual energy.
    pub fn has_energy_gate(self) -> bool {
        matches!(self, Variant::Ms2 | Variant::Ms4)
    }

    /// PMS2 and PMS4 elect on the weighted four-term score.
    pub fn uses_weighted_threshold(self) -> bool {
        matches!(self, Variant::Pms2 | Variant::Pms4)
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s.to_ascii_lowercase().as_str() {
            "static" => Some(Variant::Static),
            "ms1" => Some(Variant::Ms1),
            "ms2" => Some(Variant::Ms2),
            "ms3" => Some(Variant::Ms3),
            "ms4" => Some(Variant::Ms4),
            "pms2" => Some(Variant::Pms2),
            "pms4" => Some(Variant::Pms4),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Static => "static",
            Variant::Ms1 => "ms1",
            Variant::Ms2 => "ms2",
            Variant::Ms3 => "ms3",
            Variant::Ms4 => "ms4",
            Variant::Pms2 => "pms2",
            Variant::Pms4 => "pms4",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Role a node holds for one round. Dead is absorbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    NormalNode,
    RendezvousNode,
    ClusterHead,
    Dead,
}

/// Per-node simulation state. Positions are fixed for the whole run;
/// only energy, role, cluster-head history and the relay buffer change.
#[derive(Debug, Clone)]
pub struct NodeState {
    /// 1-based node index.
    pub id: u32,
    pub x: f64,
    pub y: f64,
    /// Residual energy in Joules. May dip below zero for the one round
    /// between overspending and the next round-top death check.
    pub energy: f64,
    pub role: NodeRole,
    /// Rounds this node has served as cluster head.
    pub times_ch: u32,
    /// Round of the most recent cluster-head service.
    pub last_ch_round: Option<u32>,
    /// Bits buffered at a rendezvous node awaiting sink contact.
    pub rn_buffer_bits: u64,
}

impl NodeState {
    pub fn is_alive(&self) -> bool {
        self.role != NodeRole::Dead
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        let dx = self.x - x;
        let dy = self.y - y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Rectangular deployment region in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldGeometry {
    pub xm: f64,
    pub ym: f64,
}

impl FieldGeometry {
    pub fn square(dim: f64) -> FieldGeometry {
        FieldGeometry { xm: dim, ym: dim }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if !(self.xm > 0.0 && self.xm.is_finite()) || !(self.ym > 0.0 && self.ym.is_finite()) {
            return Err(SpecError::InvalidField {
                xm: self.xm,
                ym: self.ym,
            });
        }
        Ok(())
    }
}

/// First-order radio model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Initial node energy, J.
    pub e0: f64,
    /// Transmit electronics energy, J/bit.
    pub e_elec_tx: f64,
    /// Receive electronics energy, J/bit.
    pub e_elec_rx: f64,
    /// Aggregation energy, J/bit/signal.
    pub e_da: f64,
    /// Free-space amplifier energy, J/bit/m^2.
    pub e_fs: f64,
    /// Multipath amplifier energy, J/bit/m^4.
    pub e_amp: f64,
    /// Data packet size in bits.
    pub packet_bits: u64,
}

impl Default for EnergyParams {
    fn default() -> EnergyParams {
        EnergyParams {
            e0: 0.3,
            e_elec_tx: 50e-9,
            e_elec_rx: 50e-9,
            e_da: 5e-9,
            e_fs: 10e-12,
            e_amp: 0.0013e-12,
            packet_bits: 4000,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<(), SpecError> {
        let fields = [
            ("e0", self.e0),
            ("e_elec_tx", self.e_elec_tx),
            ("e_elec_rx", self.e_elec_rx),
            ("e_da", self.e_da),
            ("e_fs", self.e_fs),
            ("e_amp", self.e_amp),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SpecError::InvalidEnergyParam { name, value: v });
            }
        }
        if self.packet_bits == 0 {
            return Err(SpecError::InvalidEnergyParam {
                name: "packet_bits",
                value: 0.0,
            });
        }
        // The free-space/multipath crossover must sit above 1 m.
        if self.e_fs <= self.e_amp {
            return Err(SpecError::InvalidEnergyParam {
                name: "e_fs (must exceed e_amp)",
                value: self.e_fs,
            });
        }
        Ok(())
    }
}

/// Weights and gates of the election threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectionWeights {
    /// Desired cluster-head fraction.
    pub p: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    /// Residual-energy gate multiplier on the whole score.
    pub t1: f64,
    /// Residual-energy gate multiplier inside the energy sub-term.
    pub t2: f64,
    /// Sink-distance gate multiplier inside the distance sub-term.
    pub t3: f64,
}

impl Default for ElectionWeights {
    /// Calibrated defaults. None of these constants are prescribed by the
    /// protocol; they are chosen so that, at the default field sizes, the
    /// head count stays high enough to keep intra-cluster hops out of the
    /// multipath regime and the weighted variants elect a healthy,
    /// well-separated head population. See the README for the knobs.
    fn default() -> ElectionWeights {
        ElectionWeights {
            p: 0.25,
            a1: 0.1,
            a2: 0.1,
            a3: 0.5,
            a4: 0.3,
            t1: 0.6,
            t2: 1.0,
            t3: 0.5,
        }
    }
}

/// Tolerance on the weight normalization check.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

impl ElectionWeights {
    pub fn validate(&self) -> Result<(), SpecError> {
        for (name, v) in [
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
            ("a4", self.a4),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SpecError::InvalidWeight { name, value: v });
            }
        }
        let sum = self.a1 + self.a2 + self.a3 + self.a4;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(SpecError::WeightsNotNormalized { sum });
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(SpecError::InvalidWeight {
                name: "p",
                value: self.p,
            });
        }
        for (name, v) in [("t1", self.t1), ("t2", self.t2), ("t3", self.t3)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SpecError::InvalidWeight { name, value: v });
            }
        }
        Ok(())
    }
}

/// What the sink does when its next step would leave the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SinkMotion {
    /// Bounce off the boundary, flipping the velocity sign.
    #[default]
    Reflect,
    /// Re-enter from the opposite edge.
    Wrap,
    /// Park at the boundary with zero velocity.
    Stop,
}

/// Complete description of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub variant: Variant,
    pub field: FieldGeometry,
    pub num_nodes: u32,
    pub max_rounds: u32,
    /// Rendezvous band half-width as a fraction of the band centre.
    pub r_thresh: f64,
    pub weights: ElectionWeights,
    pub energy: EnergyParams,
    /// Sink displacement per round in meters (0 for the static variant).
    pub sink_speed: f64,
    /// Boundary behavior of the moving sink.
    #[serde(default)]
    pub sink_motion: SinkMotion,
    pub rng_seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        self.field.validate()?;
        self.weights.validate()?;
        self.energy.validate()?;
        if !(self.r_thresh > 0.0 && self.r_thresh < 1.0) {
            return Err(SpecError::InvalidRThresh {
                value: self.r_thresh,
            });
        }
        if self.num_nodes < 2 {
            return Err(SpecError::TooFewNodes {
                num_nodes: self.num_nodes,
            });
        }
        if self.max_rounds < 1 {
            return Err(SpecError::NoRounds);
        }
        if !(self.sink_speed.is_finite() && self.sink_speed >= 0.0) {
            return Err(SpecError::InvalidSinkSpeed {
                value: self.sink_speed,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization cannot fail")
    }
}

/// All-defaults scenario for a square field of the given dimension.
///
/// The static variant gets a parked central sink; mobile variants sweep
/// the full width once every 50 rounds.
pub fn default_scenario(variant: Variant, dim: f64, seed: u64) -> Result<ScenarioSpec, SpecError> {
    if !(dim > 0.0 && dim.is_finite()) {
        return Err(SpecError::InvalidField { xm: dim, ym: dim });
    }
    let spec = ScenarioSpec {
        variant,
        field: FieldGeometry::square(dim),
        num_nodes: 100,
        max_rounds: 3000,
        r_thresh: 0.16,
        weights: ElectionWeights::default(),
        energy: EnergyParams::default(),
        sink_speed: if variant.is_mobile() { dim / 25.0 } else { 0.0 },
        sink_motion: SinkMotion::default(),
        rng_seed: seed,
    };
    spec.validate()?;
    Ok(spec)
}

/// Sink position and per-round displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkState {
    pub x: f64,
    pub y: f64,
    pub dx: f64,
    pub dy: f64,
}

/// Partial scenario document as accepted from `--config` files. Every key
/// is optional; omitted keys fall back to built-in defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioPatch {
    pub variant: Option<Variant>,
    pub field: Option<FieldPatch>,
    pub num_nodes: Option<u32>,
    pub max_rounds: Option<u32>,
    pub r_thresh: Option<f64>,
    pub weights: Option<WeightsPatch>,
    pub energy: Option<EnergyPatch>,
    pub sink_speed: Option<f64>,
    pub sink_motion: Option<SinkMotion>,
    pub rng_seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldPatch {
    pub xm: Option<f64>,
    pub ym: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsPatch {
    pub p: Option<f64>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub a3: Option<f64>,
    pub a4: Option<f64>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub t3: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyPatch {
    pub e0: Option<f64>,
    pub e_elec_tx: Option<f64>,
    pub e_elec_rx: Option<f64>,
    pub e_da: Option<f64>,
    pub e_fs: Option<f64>,
    pub e_amp: Option<f64>,
    pub packet_bits: Option<u64>,
}

impl ScenarioPatch {
    pub fn from_json(text: &str) -> Result<ScenarioPatch, SpecError> {
        serde_json::from_str(text).map_err(|source| SpecError::ConfigParse {
            message: source.to_string(),
        })
    }

    /// Overlay this patch onto `base` and re-validate the result.
    pub fn apply(&self, base: &ScenarioSpec) -> Result<ScenarioSpec, SpecError> {
        let mut spec = base.clone();
        if let Some(v) = self.variant {
            spec.variant = v;
        }
        if let Some(f) = &self.field {
            spec.field.xm = f.xm.unwrap_or(spec.field.xm);
            spec.field.ym = f.ym.unwrap_or(spec.field.ym);
        }
        if let Some(n) = self.num_nodes {
            spec.num_nodes = n;
        }
        if let Some(r) = self.max_rounds {
            spec.max_rounds = r;
        }
        if let Some(r) = self.r_thresh {
            spec.r_thresh = r;
        }
        if let Some(w) = &self.weights {
            spec.weights.p = w.p.unwrap_or(spec.weights.p);
            spec.weights.a1 = w.a1.unwrap_or(spec.weights.a1);
            spec.weights.a2 = w.a2.unwrap_or(spec.weights.a2);
            spec.weights.a3 = w.a3.unwrap_or(spec.weights.a3);
            spec.weights.a4 = w.a4.unwrap_or(spec.weights.a4);
            spec.weights.t1 = w.t1.unwrap_or(spec.weights.t1);
            spec.weights.t2 = w.t2.unwrap_or(spec.weights.t2);
            spec.weights.t3 = w.t3.unwrap_or(spec.weights.t3);
        }
        if let Some(e) = &self.energy {
            spec.energy.e0 = e.e0.unwrap_or(spec.energy.e0);
            spec.energy.e_elec_tx = e.e_elec_tx.unwrap_or(spec.energy.e_elec_tx);
            spec.energy.e_elec_rx = e.e_elec_rx.unwrap_or(spec.energy.e_elec_rx);
            spec.energy.e_da = e.e_da.unwrap_or(spec.energy.e_da);
            spec.energy.e_fs = e.e_fs.unwrap_or(spec.energy.e_fs);
            spec.energy.e_amp = e.e_amp.unwrap_or(spec.energy.e_amp);
            spec.energy.packet_bits = e.packet_bits.unwrap_or(spec.energy.packet_bits);
        }
        if let Some(s) = self.sink_speed {
            spec.sink_speed = s;
        }
        if let Some(m) = self.sink_motion {
            spec.sink_motion = m;
        }
        if let Some(s) = self.rng_seed {
            spec.rng_seed = s;
        }
        spec.validate()?;
        Ok(spec)
    }
}
