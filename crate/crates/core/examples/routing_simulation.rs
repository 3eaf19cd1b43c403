//! Build a greedy geographic routing plan for a chosen active set and
//! run the per-epoch energy simulation over it.
//!
//! Run: cargo run -p motesel --example routing_simulation

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use motesel::dataset::load_positions;
use motesel::sim::{build_routing, ltef, simulate_epochs, CostModel};

fn main() -> motesel::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/mini_positions.txt");
    let positions = load_positions(BufReader::new(File::open(&path)?))?;

    // motes 2, 3 and 4 stay awake; mote 6 is the sink
    let plan = build_routing(&positions, &[2, 3, 4], 6)?;
    plan.validate()?;

    println!("routes to sink {}:", plan.sink_id);
    for (node, path) in &plan.paths {
        println!("  {node}: {path:?}");
    }
    if !plan.direct_to_sink.is_empty() {
        println!("direct long hops: {:?}", plan.direct_to_sink);
    }
    println!(
        "ltef = {:.4} ({} sensors, {} awake)",
        ltef(positions.len(), plan.active_ids.len())?,
        positions.len(),
        plan.active_ids.len()
    );

    let ledger = simulate_epochs(&plan, 100, CostModel::default())?;
    println!("\nenergy after 100 epochs (tx {}, rx {}):", ledger.cost.tx_cost, ledger.cost.rx_cost);
    for (node, energy) in &ledger.energy {
        println!(
            "  mote {node}: {energy:>7.1} (tx {}, rx {})",
            ledger.tx_count.get(node).copied().unwrap_or(0),
            ledger.rx_count.get(node).copied().unwrap_or(0)
        );
    }
    println!("total: {:.1}", ledger.total_energy());
    Ok(())
}
