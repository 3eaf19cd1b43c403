//! Parse a raw sensor log into an aligned epoch-by-sensor matrix.
//!
//! Run: cargo run -p motesel --example ingest_dataset

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use motesel::dataset::{align_epochs, parse_sensor_log, GapPolicy, MeasurementField};

fn main() -> motesel::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/mini_log.txt");
    let parsed = parse_sensor_log(BufReader::new(File::open(&data)?))?;
    println!(
        "parsed {} readings, skipped {} malformed lines",
        parsed.readings.len(),
        parsed.malformed_lines
    );

    // Pivot to one row per epoch, one column per mote; forward-fill gaps
    // and keep only motes with at least 35 readings. Mote 6 is the sink.
    let (matrix, report) = align_epochs(
        &parsed.readings,
        MeasurementField::Temperature,
        GapPolicy::ForwardFill,
        35,
        6,
    )?;
    print!("{}", report.render());
    println!(
        "matrix: {} epochs x {} sensors, target = mote {}",
        matrix.n_rows(),
        matrix.n_cols(),
        matrix.target_id()
    );

    let ids = matrix.sensor_ids().to_vec();
    println!("first rows:");
    println!("epoch  {}", ids.iter().map(|i| format!("{i:>8}")).collect::<String>());
    for r in 0..3.min(matrix.n_rows()) {
        let cells: String = (0..matrix.n_cols())
            .map(|c| format!("{:>8.3}", matrix.value(r, c)))
            .collect();
        println!("{:>5}  {cells}", matrix.epochs()[r]);
    }
    Ok(())
}
