//! Pick a small sensor subset whose joint correlation profile best
//! predicts the sink, using merit-guided best-first search plus the
//! locally-predictive refinement sweep.
//!
//! Run: cargo run -p motesel --example select_sensors

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use motesel::dataset::{align_epochs, parse_sensor_log, GapPolicy, MeasurementField};
use motesel::select::{best_first_select, locally_predictive_pass, DEFAULT_STALL_LIMIT};
use motesel::stats::CorrelationMatrix;

fn main() -> motesel::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/mini_log.txt");
    let parsed = parse_sensor_log(BufReader::new(File::open(&data)?))?;
    let (matrix, _) = align_epochs(
        &parsed.readings,
        MeasurementField::Temperature,
        GapPolicy::ForwardFill,
        35,
        6,
    )?;

    let corr = CorrelationMatrix::from_data(&matrix)?;
    let sink = matrix.target_id();
    for &id in matrix.sensor_ids() {
        if id != sink {
            println!("|r(mote {id}, sink)| = {:.4}", corr.get(id, sink)?.abs());
        }
    }

    let base = best_first_select(&corr, sink, DEFAULT_STALL_LIMIT)?;
    println!("\nsearch evaluated {} subsets; best-merit trace:", base.evaluations);
    for (subset, merit) in &base.trace {
        println!("  {subset:?} merit {merit:.4}");
    }

    let refined = locally_predictive_pass(&base, &corr, sink)?;
    println!(
        "\nselected {:?} (merit {:.4}), {} of {} sensors stay awake",
        refined.selected,
        refined.merit,
        refined.selected.len(),
        matrix.n_cols() - 1
    );
    Ok(())
}
