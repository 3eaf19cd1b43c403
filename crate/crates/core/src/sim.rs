//! Geometric sensor-field simulation: active/sleep scheduling from a
//! selection result, greedy geographic routing to the sink, an abstract
//! energy ledger, LTEF, and the adaptive re-selection loop.

use std::collections::BTreeMap;
use std::io::Write;

use crate::dataset::{take_window, DataMatrix, SensorPosition};
use crate::error::{Error, Result};
use crate::eval::{run_scenario, ExperimentReport, ScenarioOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeState {
    Active,
    Sleep,
    Sink,
}

impl NodeState {
    pub fn name(self) -> &'static str {
        match self {
            NodeState::Active => "active",
            NodeState::Sleep => "sleep",
            NodeState::Sink => "sink",
        }
    }
}

/// Per-node routes from every active sensor to the sink.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingPlan {
    pub sink_id: u32,
    /// Active sensor ids, ascending. Does not include the sink.
    pub active_ids: Vec<u32>,
    /// Hop sequence per active node: starts at the node, ends at the sink.
    pub paths: BTreeMap<u32, Vec<u32>>,
    /// Active nodes that had no active relay strictly closer to the sink
    /// and connect with a single direct hop.
    pub direct_to_sink: Vec<u32>,
    /// (start, length) of the historical window that produced this plan.
    pub epoch_window: (usize, usize),
}

impl RoutingPlan {
    /// Check the structural invariants of every path.
    pub fn validate(&self) -> Result<()> {
        for (&node, path) in &self.paths {
            if path.first() != Some(&node) {
                return Err(Error::Contract(format!(
                    "path of {node} does not start at {node}"
                )));
            }
            if path.last() != Some(&self.sink_id) {
                return Err(Error::Contract(format!(
                    "path of {node} does not end at the sink"
                )));
            }
            let mut seen = std::collections::HashSet::new();
            for hop in path {
                if !seen.insert(hop) {
                    return Err(Error::Contract(format!("path of {node} revisits {hop}")));
                }
                if *hop != self.sink_id && !self.active_ids.contains(hop) {
                    return Err(Error::Contract(format!(
                        "path of {node} traverses non-active node {hop}"
                    )));
                }
            }
        }
        for id in &self.active_ids {
            if !self.paths.contains_key(id) {
                return Err(Error::Contract(format!("active node {id} has no path")));
            }
        }
        Ok(())
    }
}

fn dist(a: &SensorPosition, b: &SensorPosition) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// Greedy geographic routing: each hop forwards to the active node that is
/// strictly closer to the sink and minimizes the remaining distance
/// (distance ties break toward the lower id); a node with no closer active
/// relay connects directly to the sink. Sources that start in that
/// situation are flagged in `direct_to_sink` (single long hop).
pub fn build_routing(
    positions: &[SensorPosition],
    active_ids: &[u32],
    sink_id: u32,
) -> Result<RoutingPlan> {
    let find = |id: u32| -> Result<&SensorPosition> {
        positions
            .iter()
            .find(|p| p.mote_id == id)
            .ok_or(Error::UnknownId(id))
    };
    let sink = find(sink_id)?;
    let mut active: Vec<u32> = active_ids
        .iter()
        .copied()
        .filter(|&id| id != sink_id)
        .collect();
    active.sort_unstable();
    active.dedup();
    for &id in &active {
        find(id)?;
    }

    let mut paths = BTreeMap::new();
    let mut direct = Vec::new();
    for &source in &active {
        let mut path = vec![source];
        let mut current = find(source)?;
        loop {
            let d_current = dist(current, sink);
            // best active relay strictly closer to the sink
            let mut relay: Option<(&SensorPosition, f64)> = None;
            for &cand in &active {
                if path.contains(&cand) {
                    continue;
                }
                let p = find(cand)?;
                let d = dist(p, sink);
                if d >= d_current {
                    continue;
                }
                let better = match relay {
                    None => true,
                    Some((rp, rd)) => d < rd || (d == rd && p.mote_id < rp.mote_id),
                };
                if better {
                    relay = Some((p, d));
                }
            }
            match relay {
                Some((p, _)) => {
                    path.push(p.mote_id);
                    current = p;
                }
                None => {
                    path.push(sink_id);
                    break;
                }
            }
        }
        // A source stuck at a distance-local-minimum takes one long hop:
        // no active node is closer to the sink, yet some active node is
        // nearer to the source than the sink itself.
        if path.len() == 2 {
            let src_pos = find(source)?;
            let d_sink = dist(src_pos, sink);
            let has_near_neighbor = active.iter().any(|&other| {
                other != source
                    && dist(find(other).expect("checked above"), src_pos) < d_sink
            });
            if has_near_neighbor {
                direct.push(source);
            }
        }
        paths.insert(source, path);
    }

    let plan = RoutingPlan {
        sink_id,
        active_ids: active,
        paths,
        direct_to_sink: direct,
        epoch_window: (0, 0),
    };
    plan.validate()?;
    Ok(plan)
}

/// Life-time extension factor: total sensors over participating sensors.
pub fn ltef(total_sensors: usize, participating: usize) -> Result<f64> {
    if participating == 0 || participating > total_sensors {
        return Err(Error::Contract(format!(
            "participating count must be in [1, {total_sensors}], got {participating}"
        )));
    }
    Ok(total_sensors as f64 / participating as f64)
}

/// Abstract per-hop message costs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub tx_cost: f64,
    pub rx_cost: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            tx_cost: 1.0,
            rx_cost: 0.5,
        }
    }
}

/// Cumulative transmissions, receptions and energy per node, plus
/// per-epoch totals. Sleeping nodes never appear.
#[derive(Debug, Clone)]
pub struct EnergyLedger {
    pub tx_count: BTreeMap<u32, u64>,
    pub rx_count: BTreeMap<u32, u64>,
    pub energy: BTreeMap<u32, f64>,
    pub per_epoch_totals: Vec<f64>,
    pub cost: CostModel,
}

impl EnergyLedger {
    pub fn total_energy(&self) -> f64 {
        self.energy.values().sum()
    }
}

/// Run the plan for `n_epochs`: every active node originates one message
/// per epoch, forwarded hop by hop along its path; each hop charges
/// `tx_cost` to the sender and `rx_cost` to the receiver.
pub fn simulate_epochs(plan: &RoutingPlan, n_epochs: usize, cost: CostModel) -> Result<EnergyLedger> {
    if n_epochs < 1 {
        return Err(Error::Contract("n_epochs must be at least 1".into()));
    }
    plan.validate()?;
    let mut ledger = EnergyLedger {
        tx_count: BTreeMap::new(),
        rx_count: BTreeMap::new(),
        energy: BTreeMap::new(),
        per_epoch_totals: Vec::with_capacity(n_epochs),
        cost,
    };
    for _ in 0..n_epochs {
        let mut epoch_total = 0.0;
        for path in plan.paths.values() {
            for hop in path.windows(2) {
                let (from, to) = (hop[0], hop[1]);
                *ledger.tx_count.entry(from).or_insert(0) += 1;
                *ledger.rx_count.entry(to).or_insert(0) += 1;
                *ledger.energy.entry(from).or_insert(0.0) += cost.tx_cost;
                *ledger.energy.entry(to).or_insert(0.0) += cost.rx_cost;
                epoch_total += cost.tx_cost + cost.rx_cost;
            }
        }
        ledger.per_epoch_totals.push(epoch_total);
    }
    Ok(ledger)
}

/// One stage of the adaptive loop.
#[derive(Debug, Clone)]
pub struct AdaptiveStage {
    pub window_len: usize,
    pub report: ExperimentReport,
    pub plan: RoutingPlan,
    /// Whether this stage's selection replaced the previous plan.
    pub adopted: bool,
}

/// Grow the historical window along `schedule`, re-select sensors at each
/// stage, and adopt the new routing plan only when the selection arm's
/// RMSE-percent stays at or under `rmse_threshold`. The first window is
/// always adopted.
pub fn adaptive_loop(
    full_matrix: &DataMatrix,
    positions: &[SensorPosition],
    sink_id: u32,
    schedule: &[usize],
    rmse_threshold: f64,
    opts: &ScenarioOptions,
) -> Result<Vec<AdaptiveStage>> {
    if schedule.is_empty() {
        return Err(Error::Contract("empty window schedule".into()));
    }
    if !schedule.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Contract(
            "window schedule must be strictly increasing".into(),
        ));
    }
    if *schedule.last().unwrap() > full_matrix.n_rows() {
        return Err(Error::Bounds(format!(
            "window {} exceeds {} rows",
            schedule.last().unwrap(),
            full_matrix.n_rows()
        )));
    }
    let matrix = full_matrix.clone().with_target(sink_id)?;

    let mut stages: Vec<AdaptiveStage> = Vec::with_capacity(schedule.len());
    for (i, &len) in schedule.iter().enumerate() {
        let window = take_window(&matrix, 0, len)?;
        let mut stage_opts = opts.clone();
        stage_opts.scenario = format!("window_{len}");
        let report = run_scenario(&window, &stage_opts, true)?;

        let selected = report
            .selected_ids
            .clone()
            .expect("selection arm always runs here");
        let within_threshold = report
            .rmse_selected
            .and_then(|r| r.percent)
            .map(|p| p <= rmse_threshold)
            .unwrap_or(false);
        let adopted = i == 0 || within_threshold;

        let plan = if adopted {
            let mut p = build_routing(positions, &selected, sink_id)?;
            p.epoch_window = (0, len);
            p
        } else {
            stages.last().expect("first stage always adopts").plan.clone()
        };
        stages.push(AdaptiveStage {
            window_len: len,
            report,
            plan,
            adopted,
        });
    }
    Ok(stages)
}

/// Plan export: a header with the sink id and window, then one
/// `mote_id,state,next_hop` line per positioned node.
pub fn write_plan<W: Write>(
    plan: &RoutingPlan,
    positions: &[SensorPosition],
    mut out: W,
) -> Result<()> {
    writeln!(
        out,
        "# sink={} window_start={} window_len={}",
        plan.sink_id, plan.epoch_window.0, plan.epoch_window.1
    )?;
    writeln!(out, "mote_id,state,next_hop")?;
    let mut ids: Vec<u32> = positions.iter().map(|p| p.mote_id).collect();
    ids.sort_unstable();
    for id in ids {
        let (state, next) = if id == plan.sink_id {
            (NodeState::Sink, String::from("-"))
        } else if let Some(path) = plan.paths.get(&id) {
            (NodeState::Active, path[1].to_string())
        } else {
            (NodeState::Sleep, String::from("-"))
        };
        writeln!(out, "{id},{},{next}", state.name())?;
    }
    Ok(())
}

/// Ledger export: per-node counters then per-epoch totals.
pub fn write_ledger<W: Write>(ledger: &EnergyLedger, mut out: W) -> Result<()> {
    writeln!(
        out,
        "# tx_cost={} rx_cost={}",
        ledger.cost.tx_cost, ledger.cost.rx_cost
    )?;
    writeln!(out, "mote_id,tx,rx,energy")?;
    for (&id, &e) in &ledger.energy {
        writeln!(
            out,
            "{id},{},{},{e}",
            ledger.tx_count.get(&id).copied().unwrap_or(0),
            ledger.rx_count.get(&id).copied().unwrap_or(0),
        )?;
    }
    writeln!(out, "epoch,total")?;
    for (i, t) in ledger.per_epoch_totals.iter().enumerate() {
        writeln!(out, "{i},{t}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(id: u32, x: f64, y: f64) -> SensorPosition {
        SensorPosition { mote_id: id, x, y }
    }

    #[test]
    fn empty_active_set_routes_nothing() {
        let positions = vec![pos(1, 0.0, 0.0), pos(2, 5.0, 0.0)];
        let plan = build_routing(&positions, &[], 2).unwrap();
        assert!(plan.paths.is_empty());
        assert!(plan.active_ids.is_empty());
    }

    #[test]
    fn collinear_relay_is_used() {
        // A at 10, B at 5, sink at 0, all on a line; B relays for A.
        let positions = vec![pos(1, 10.0, 0.0), pos(2, 5.0, 0.0), pos(3, 0.0, 0.0)];
        let plan = build_routing(&positions, &[1, 2], 3).unwrap();
        assert_eq!(plan.paths[&1], vec![1, 2, 3]);
        assert_eq!(plan.paths[&2], vec![2, 3]);
        assert!(plan.direct_to_sink.is_empty());
    }

    #[test]
    fn no_closer_relay_goes_direct() {
        // Node 1 has a nearby active neighbor (2) but no node closer to
        // the sink, so its hop to the sink is a flagged long hop.
        let positions = vec![pos(1, 4.0, 0.0), pos(2, 6.0, 0.0), pos(9, 0.0, 0.0)];
        let plan = build_routing(&positions, &[1, 2], 9).unwrap();
        assert_eq!(plan.paths[&1], vec![1, 9]);
        assert_eq!(plan.paths[&2], vec![2, 1, 9]);
        assert_eq!(plan.direct_to_sink, vec![1]);
    }

    #[test]
    fn unknown_id_is_an_error() {
        let positions = vec![pos(1, 0.0, 0.0)];
        assert!(matches!(
            build_routing(&positions, &[7], 1),
            Err(Error::UnknownId(7))
        ));
        assert!(matches!(
            build_routing(&positions, &[], 99),
            Err(Error::UnknownId(99))
        ));
    }

    #[test]
    fn ltef_paper_values() {
        assert_eq!(ltef(54, 2).unwrap(), 27.0);
        assert_eq!(ltef(53, 5).unwrap(), 10.6);
        assert_eq!(ltef(53, 8).unwrap(), 6.625);
        assert_eq!(ltef(7, 7).unwrap(), 1.0);
        assert!(ltef(5, 0).is_err());
        assert!(ltef(5, 6).is_err());
    }

    #[test]
    fn single_hop_energy() {
        let positions = vec![pos(1, 1.0, 0.0), pos(9, 0.0, 0.0)];
        let plan = build_routing(&positions, &[1], 9).unwrap();
        let ledger = simulate_epochs(
            &plan,
            1,
            CostModel {
                tx_cost: 1.0,
                rx_cost: 1.0,
            },
        )
        .unwrap();
        assert_eq!(ledger.energy[&1], 1.0);
        assert_eq!(ledger.energy[&9], 1.0);
        assert_eq!(ledger.per_epoch_totals, vec![2.0]);
    }

    #[test]
    fn sleeping_nodes_consume_nothing() {
        let positions = vec![
            pos(1, 1.0, 0.0),
            pos(2, 2.0, 0.0),
            pos(3, 3.0, 0.0),
            pos(9, 0.0, 0.0),
        ];
        let plan = build_routing(&positions, &[1], 9).unwrap();
        let ledger = simulate_epochs(&plan, 10, CostModel::default()).unwrap();
        assert!(!ledger.energy.contains_key(&2));
        assert!(!ledger.energy.contains_key(&3));
    }

    #[test]
    fn more_active_nodes_cost_more() {
        let positions = vec![
            pos(1, 1.0, 0.0),
            pos(2, 2.0, 0.0),
            pos(3, 3.0, 0.0),
            pos(9, 0.0, 0.0),
        ];
        let small = build_routing(&positions, &[1], 9).unwrap();
        let large = build_routing(&positions, &[1, 2, 3], 9).unwrap();
        let e_small = simulate_epochs(&small, 5, CostModel::default())
            .unwrap()
            .total_energy();
        let e_large = simulate_epochs(&large, 5, CostModel::default())
            .unwrap()
            .total_energy();
        assert!(e_large > e_small);
    }
}
