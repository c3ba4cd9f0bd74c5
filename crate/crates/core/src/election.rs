//! Per-round role assignment: rendezvous-band labeling and cluster-head
//! election, including the four-term weighted threshold used by the
//! PMS2/PMS4 variants.

use rand::Rng;

use crate::model::{ElectionWeights, FieldGeometry, NodeRole, NodeState, ScenarioSpec, SinkState};

/// Floor applied to a node-to-sink distance before division, for the case
/// where the sink passes exactly over a node.
const SINK_DISTANCE_FLOOR: f64 = 1e-9;

/// Tolerant `value >= bound` for the energy/distance gates. Population
/// averages carry summation rounding, so a node sitting exactly at the
/// average (round 1: every node) must still clear an equality gate.
fn gate_met(value: f64, bound: f64) -> bool {
    value >= bound - bound.abs() * 1e-12
}

/// Position of a cluster head already elected this round.
#[derive(Debug, Clone, Copy)]
pub struct ElectedCh {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

/// Round-scoped inputs to the threshold terms: alive-population averages,
/// the sink snapshot, and the heads elected so far this round.
#[derive(Debug, Clone)]
pub struct ElectionContext {
    /// 1-based round index.
    pub round: u32,
    /// Mean residual energy over alive nodes, J.
    pub alive_avg_energy: f64,
    /// Mean node-to-sink distance over alive nodes, m.
    pub alive_avg_sink_dist: f64,
    /// Mean cluster-head service count over alive nodes.
    pub alive_avg_times_ch: f64,
    /// Heads elected earlier in this round, in election order.
    pub elected_so_far: Vec<ElectedCh>,
    pub sink: SinkState,
}

impl ElectionContext {
    /// Compute the alive-population averages for this round.
    pub fn for_round(round: u32, nodes: &[NodeState], sink: SinkState) -> ElectionContext {
        let mut alive = 0u32;
        let mut energy_sum = 0.0;
        let mut dist_sum = 0.0;
        let mut ch_sum = 0.0;
        for node in nodes.iter().filter(|n| n.is_alive()) {
            alive += 1;
            energy_sum += node.energy;
            dist_sum += node.distance_to(sink.x, sink.y);
            ch_sum += node.times_ch as f64;
        }
        let n = alive.max(1) as f64;
        ElectionContext {
            round,
            alive_avg_energy: energy_sum / n,
            alive_avg_sink_dist: dist_sum / n,
            alive_avg_times_ch: ch_sum / n,
            elected_so_far: Vec::new(),
            sink,
        }
    }
}

/// Label every alive node inside the horizontal band around the sink's
/// travel line as a rendezvous node; everything else alive becomes a
/// normal node. Dead nodes are untouched.
pub fn assign_rn_labels(nodes: &mut [NodeState], field: &FieldGeometry, r_thresh: f64) {
    let half = field.ym / 2.0;
    let lo = half * (1.0 - r_thresh);
    let hi = half * (1.0 + r_thresh);
    for node in nodes.iter_mut().filter(|n| n.is_alive()) {
        node.role = if node.y >= lo && node.y <= hi {
            NodeRole::RendezvousNode
        } else {
            NodeRole::NormalNode
        };
    }
}

/// Rotation cycle length in rounds: floor(1/p), with a nudge so exact
/// reciprocals like p = 0.05 do not land one below the integer.
fn rotation_cycle(p: f64) -> u32 {
    ((1.0 / p + 1e-9).floor().max(1.0)) as u32
}

/// Classic probabilistic election threshold with cluster-head rotation.
///
/// A node that already served as head in the current rotation cycle is
/// out of the eligible set and scores zero; the cycle (and with it
/// everyone's eligibility) resets every floor(1/p) rounds. The
/// denominator rises with the cycle position so the expected head count
/// stays near `p * N` even as the eligible set drains.
pub fn leach_threshold(p: f64, round: u32, node: &NodeState) -> f64 {
    let cycle = rotation_cycle(p);
    let position = (round - 1) % cycle;
    let cycle_start = round - position;
    if let Some(last) = node.last_ch_round {
        if last >= cycle_start {
            return 0.0;
        }
    }
    p / (1.0 - p * position as f64)
}

/// Residual-energy sub-term: rewards above-average energy, gated at
/// `t2` times the average.
pub fn sub_threshold_t1(node: &NodeState, ctx: &ElectionContext, w: &ElectionWeights) -> f64 {
    debug_assert!(ctx.alive_avg_energy > 0.0);
    if gate_met(node.energy, w.t2 * ctx.alive_avg_energy) {
        w.p * node.energy / ctx.alive_avg_energy
    } else {
        0.0
    }
}

/// Sink-distance sub-term: scores nodes at least `t3` times the average
/// distance from the sink, decaying with distance beyond it.
pub fn sub_threshold_t2(node: &NodeState, ctx: &ElectionContext, w: &ElectionWeights) -> f64 {
    let ds = node.distance_to(ctx.sink.x, ctx.sink.y);
    if gate_met(ds, w.t3 * ctx.alive_avg_sink_dist) {
        w.p * ctx.alive_avg_sink_dist / ds.max(SINK_DISTANCE_FLOOR)
    } else {
        0.0
    }
}

/// Head-separation sub-term: ratio of this node's mean distance to the
/// already-elected heads over their mean pairwise separation.
pub fn sub_threshold_t3(node: &NodeState, ctx: &ElectionContext, w: &ElectionWeights) -> f64 {
    let q = ctx.elected_so_far.len();
    if q <= 1 {
        return w.p;
    }
    let mut node_sum = 0.0;
    for ch in &ctx.elected_so_far {
        node_sum += node.distance_to(ch.x, ch.y);
    }
    let mean_to_heads = node_sum / q as f64;

    let mut pair_sum = 0.0;
    for (j, a) in ctx.elected_so_far.iter().enumerate() {
        for (i, b) in ctx.elected_so_far.iter().enumerate() {
            if i != j {
                let dx = a.x - b.x;
                let dy = a.y - b.y;
                pair_sum += (dx * dx + dy * dy).sqrt();
            }
        }
    }
    let mean_pairwise = pair_sum / (q * (q - 1)) as f64;
    if mean_pairwise == 0.0 {
        // All elected heads co-located; the ratio is undefined.
        return w.p;
    }
    w.p * mean_to_heads / mean_pairwise
}

/// Service-history sub-term: penalizes nodes that served as head more
/// often than the alive-population average.
pub fn sub_threshold_t4(node: &NodeState, ctx: &ElectionContext, w: &ElectionWeights) -> f64 {
    if ctx.round == 1 {
        return w.p;
    }
    w.p * ctx.alive_avg_times_ch / node.times_ch.max(1) as f64
}

/// The weighted election score: a normalized combination of the four
/// sub-terms, gated on holding at least `t1` times the average energy.
pub fn z_threshold(node: &NodeState, ctx: &ElectionContext, w: &ElectionWeights) -> f64 {
    if !gate_met(node.energy, w.t1 * ctx.alive_avg_energy) {
        return 0.0;
    }
    w.a1 * sub_threshold_t1(node, ctx, w)
        + w.a2 * sub_threshold_t2(node, ctx, w)
        + w.a3 * sub_threshold_t3(node, ctx, w)
        + w.a4 * sub_threshold_t4(node, ctx, w)
}

/// Run the election for one round. Candidates are visited in ascending id
/// order; each draws one uniform variate and wins when it falls below the
/// variant's threshold. Elected heads immediately join
/// `ctx.elected_so_far`, so later separation terms see them.
///
/// Rendezvous nodes are not candidates under MS1, MS2 and PMS2.
pub fn elect_cluster_heads<R: Rng>(
    nodes: &mut [NodeState],
    mut ctx: ElectionContext,
    spec: &ScenarioSpec,
    rng: &mut R,
) -> Vec<u32> {
    let mut elected = Vec::new();
    for node in nodes.iter_mut() {
        if !node.is_alive() {
            continue;
        }
        if node.role == NodeRole::RendezvousNode && !spec.variant.rn_may_be_ch() {
            continue;
        }
        let threshold = if spec.variant.uses_weighted_threshold() {
            z_threshold(node, &ctx, &spec.weights)
        } else {
            let base = leach_threshold(spec.weights.p, ctx.round, node);
            if spec.variant.has_energy_gate() && !gate_met(node.energy, ctx.alive_avg_energy) {
                0.0
            } else {
                base
            }
        };
        let draw: f64 = rng.random();
        if draw < threshold {
            node.role = NodeRole::ClusterHead;
            node.times_ch += 1;
            node.last_ch_round = Some(ctx.round);
            ctx.elected_so_far.push(ElectedCh {
                id: node.id,
                x: node.x,
                y: node.y,
            });
            elected.push(node.id);
        }
    }
    elected
}
