//! Compare cross-validated prediction error for the all-sensors model
//! against the selected-subset model, across the three fold schemes.
//!
//! Run: cargo run -p motesel --example cross_validate

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use motesel::dataset::{align_epochs, parse_sensor_log, GapPolicy, MeasurementField};
use motesel::eval::{auto_k, cross_validate, make_folds, FoldScheme};
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
    let base = best_first_select(&corr, matrix.target_id(), DEFAULT_STALL_LIMIT)?;
    let selected = locally_predictive_pass(&base, &corr, matrix.target_id())?.selected;
    let all = matrix.feature_ids();

    let k = auto_k(matrix.n_rows());
    println!("{} rows, k = {k}, selected {selected:?}\n", matrix.n_rows());

    for scheme in [
        FoldScheme::Contiguous,
        FoldScheme::Shuffled,
        FoldScheme::TargetStratified,
    ] {
        let plan = make_folds(k, scheme, 7, &matrix.target_column())?;
        let cv_all = cross_validate(&matrix, &all, &plan)?;
        let cv_sel = cross_validate(&matrix, &selected, &plan)?;
        println!("{scheme:?}:");
        println!(
            "  all {} sensors: rmse {:.4} ({:.3}%)",
            all.len(),
            cv_all.pooled.absolute,
            cv_all.pooled.percent.unwrap_or(f64::NAN)
        );
        println!(
            "  selected {}:     rmse {:.4} ({:.3}%)",
            selected.len(),
            cv_sel.pooled.absolute,
            cv_sel.pooled.percent.unwrap_or(f64::NAN)
        );
        println!(
            "  per-fold rmse (selected): {}",
            cv_sel
                .per_fold
                .iter()
                .map(|r| format!("{:.3}", r.absolute))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
    Ok(())
}
