//! Run the full adaptive loop: grow the historical window, re-select
//! sensors at each stage, and adopt the new routing plan only while the
//! selected subset keeps RMSE-percent under the threshold.
//!
//! Run: cargo run -p motesel --example adaptive_monitoring

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use motesel::dataset::{align_epochs, load_positions, parse_sensor_log, GapPolicy, MeasurementField};
use motesel::eval::ScenarioOptions;
use motesel::sim::adaptive_loop;

fn main() -> motesel::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let parsed = parse_sensor_log(BufReader::new(File::open(dir.join("mini_log.txt"))?))?;
    let (matrix, _) = align_epochs(
        &parsed.readings,
        MeasurementField::Temperature,
        GapPolicy::ForwardFill,
        35,
        6,
    )?;
    let positions = load_positions(BufReader::new(File::open(dir.join("mini_positions.txt"))?))?;

    let opts = ScenarioOptions {
        scenario: "adaptive".into(),
        seed: 7,
        ..Default::default()
    };
    let stages = adaptive_loop(&matrix, &positions, 6, &[35, 100, 200], 5.0, &opts)?;

    for stage in &stages {
        let rmse_pct = stage
            .report
            .rmse_selected
            .and_then(|r| r.percent)
            .unwrap_or(f64::NAN);
        println!(
            "window {:>3}: {} selected {:?} rmse {:.3}% ltef {:.2}",
            stage.window_len,
            if stage.adopted { "adopted " } else { "rejected" },
            stage.report.selected_ids.as_deref().unwrap_or(&[]),
            rmse_pct,
            stage.report.ltef.unwrap_or(f64::NAN)
        );
        for (node, path) in &stage.plan.paths {
            println!("  route {node}: {path:?}");
        }
    }
    Ok(())
}
