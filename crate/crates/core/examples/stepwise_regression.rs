//! Fit a linear model of the sink from the other motes, then prune it
//! with backward stepwise elimination under AIC.
//!
//! Run: cargo run -p motesel --example stepwise_regression

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use motesel::dataset::{align_epochs, parse_sensor_log, GapPolicy, MeasurementField};
use motesel::regress::{fit_ols, stepwise_eliminate, LinearModel};

fn describe(label: &str, model: &LinearModel) {
    println!("{label}: aic {:.3}, rss {:.4}, {} rows", model.aic, model.rss, model.n_train);
    println!("  intercept {:.4}", model.intercept);
    for (id, coef) in model.attribute_ids.iter().zip(&model.coefficients) {
        println!("  mote {id}: {coef:+.4}");
    }
}

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

    let features = matrix.feature_ids();
    let full = fit_ols(&matrix, &features)?;
    describe("full model", &full);

    let pruned = stepwise_eliminate(&matrix, &features)?;
    println!();
    describe("after stepwise elimination", &pruned);
    println!(
        "  kept {} of {} regressors in {:.4}s",
        pruned.attribute_ids.len(),
        features.len(),
        pruned.build_time.as_secs_f64()
    );

    // predict the sink at the last epoch from the kept motes only
    let r = matrix.n_rows() - 1;
    let inputs: std::collections::HashMap<u32, f64> = pruned
        .attribute_ids
        .iter()
        .map(|&id| {
            let c = matrix.sensor_ids().iter().position(|&s| s == id).unwrap();
            (id, matrix.value(r, c))
        })
        .collect();
    let target_col = matrix.sensor_ids().iter().position(|&s| s == matrix.target_id()).unwrap();
    println!(
        "\nlast epoch: predicted {:.3}, actual {:.3}",
        pruned.predict(&inputs)?,
        matrix.value(r, target_col)
    );
    Ok(())
}
