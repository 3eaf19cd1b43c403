//! The pipeline commands behind the CLI binary: ingest, experiment,
//! simulate and report. Each command reads a [`RunConfig`] and writes its
//! outputs atomically (temp file + rename) under the configured directory.

use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::dataset::{
    align_epochs, load_positions, parse_sensor_log, read_matrix, take_window, write_matrix,
    DataMatrix, GapPolicy, MeasurementField, SensorPosition,
};
use crate::error::{Error, Result};
use crate::eval::{run_scenario, ExperimentReport, ScenarioOptions};
use crate::sim::{adaptive_loop, simulate_epochs, write_ledger, write_plan, CostModel};

fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn matrix_path(cfg: &RunConfig) -> PathBuf {
    cfg.output.dir.join("matrix.csv")
}

fn load_matrix(cfg: &RunConfig) -> Result<DataMatrix> {
    let path = matrix_path(cfg);
    let file = fs::File::open(&path).map_err(|e| {
        Error::Config(format!(
            "cannot open {} ({e}); run 'ingest' first",
            path.display()
        ))
    })?;
    read_matrix(BufReader::new(file), cfg.data.sink)
}

fn load_positions_from(cfg: &RunConfig) -> Result<Vec<SensorPosition>> {
    let path = cfg
        .data
        .positions
        .as_ref()
        .ok_or_else(|| Error::Config("no positions path configured".into()))?;
    let file = fs::File::open(path)
        .map_err(|e| Error::Config(format!("cannot open {} ({e})", path.display())))?;
    load_positions(BufReader::new(file))
}

fn scenario_opts(cfg: &RunConfig, name: String) -> Result<ScenarioOptions> {
    // k = None lets each window pick its fold count from its own size
    let k = if cfg.experiment.k == "auto" {
        None
    } else {
        Some(cfg.k_for(0)?)
    };
    Ok(ScenarioOptions {
        scenario: name,
        k,
        scheme: cfg.experiment.scheme.parse()?,
        seed: cfg.experiment.seed,
        stall_limit: cfg.experiment.stall_limit,
    })
}

/// Parse the raw log, align it into a matrix, and write `matrix.csv` plus
/// `ingest_report.txt`.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let data_path = cfg
        .data
        .path
        .as_ref()
        .ok_or_else(|| Error::Config("no data path configured".into()))?;
    let field: MeasurementField = cfg.data.field.parse()?;
    let gap: GapPolicy = cfg.ingest.gap_policy.parse()?;

    let file = fs::File::open(data_path)
        .map_err(|e| Error::Config(format!("cannot open {} ({e})", data_path.display())))?;
    let parsed = parse_sensor_log(BufReader::new(file))?;
    let (matrix, report) = align_epochs(
        &parsed.readings,
        field,
        gap,
        cfg.ingest.min_samples,
        cfg.data.sink,
    )?;

    let mut buf = Vec::new();
    write_matrix(&matrix, &mut buf)?;
    atomic_write(&matrix_path(cfg), &buf)?;

    let mut text = format!("malformed_lines: {}\n", parsed.malformed_lines);
    text.push_str(&report.render());
    writeln!(text, "rows: {}", matrix.n_rows()).unwrap();
    writeln!(text, "sensors: {}", matrix.n_cols()).unwrap();
    atomic_write(&cfg.output.dir.join("ingest_report.txt"), text.as_bytes())?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_ids(ids: &[u32]) -> String {
    ids.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn table_csv(reports: &[ExperimentReport], with_selection: bool) -> String {
    let mut s = String::new();
    if with_selection {
        s.push_str("scenario,n_sensors,n_train,k,selected_ids,rmse_all_abs,rmse_all_pct,rmse_sel_abs,rmse_sel_pct,ltef\n");
    } else {
        s.push_str("scenario,n_sensors,n_train,k,rmse_all_abs,rmse_all_pct\n");
    }
    for r in reports {
        if with_selection {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.scenario,
                r.n_sensors,
                r.n_train,
                r.k,
                fmt_ids(r.selected_ids.as_deref().unwrap_or(&[])),
                r.rmse_all.absolute,
                fmt_opt(r.rmse_all.percent),
                r.rmse_selected.map(|x| x.absolute.to_string()).unwrap_or_default(),
                fmt_opt(r.rmse_selected.and_then(|x| x.percent)),
                fmt_opt(r.ltef),
            )
            .unwrap();
        } else {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                r.scenario,
                r.n_sensors,
                r.n_train,
                r.k,
                r.rmse_all.absolute,
                fmt_opt(r.rmse_all.percent),
            )
            .unwrap();
        }
    }
    s
}

fn summary_text(reports: &[ExperimentReport], with_selection: bool) -> String {
    let mut s = String::from("experiment summary\n==================\n");
    for r in reports {
        writeln!(s, "\n{} ({} sensors, {} rows, k={})", r.scenario, r.n_sensors, r.n_train, r.k)
            .unwrap();
        writeln!(
            s,
            "  all sensors:    rmse {:.6} ({}) build {:.6}s",
            r.rmse_all.absolute,
            r.rmse_all
                .percent
                .map(|p| format!("{p:.4}%"))
                .unwrap_or_else(|| "n/a".into()),
            r.build_time_all.as_secs_f64(),
        )
        .unwrap();
        if let (Some(ids), Some(sel)) = (&r.selected_ids, r.rmse_selected) {
            writeln!(
                s,
                "  selected {:>2} of {}: rmse {:.6} ({}) build {:.6}s ltef {:.4}",
                ids.len(),
                r.n_sensors,
                sel.absolute,
                sel.percent
                    .map(|p| format!("{p:.4}%"))
                    .unwrap_or_else(|| "n/a".into()),
                r.build_time_selected.unwrap_or_default().as_secs_f64(),
                r.ltef.unwrap_or(f64::NAN),
            )
            .unwrap();
            writeln!(s, "  selected ids: {}", fmt_ids(ids)).unwrap();
        }
    }
    if with_selection {
        s.push_str(
            "\nnote: selection runs once on each full window, so its CV error\n\
             carries a mild optimistic bias relative to per-fold re-selection.\n",
        );
    }
    s
}

/// Run every configured window through `run_scenario` and write the
/// Table-shaped outputs: `experiment_table.csv`, `summary.txt`,
/// `build_times.csv` and (when positions are configured)
/// `selection_map.csv`.
pub fn cmd_experiment(cfg: &RunConfig, no_selection: bool) -> Result<()> {
    cfg.validate()?;
    let matrix = load_matrix(cfg)?;
    let with_selection = !no_selection;

    let mut reports = Vec::new();
    for w in &cfg.experiment.windows {
        let (start, len) = (w[0], w[1]);
        let window = take_window(&matrix, start, len)
            .map_err(|e| Error::Config(format!("window_{len}: {e}")))?;
        let opts = scenario_opts(cfg, format!("window_{len}"))?;
        let report = run_scenario(&window, &opts, with_selection)
            .map_err(|e| Error::Config(format!("window_{len}: {e}")))?;
        reports.push(report);
    }

    atomic_write(
        &cfg.output.dir.join("experiment_table.csv"),
        table_csv(&reports, with_selection).as_bytes(),
    )?;
    atomic_write(
        &cfg.output.dir.join("summary.txt"),
        summary_text(&reports, with_selection).as_bytes(),
    )?;

    // plot data: wall times per scenario, one bar pair per window
    let mut times = String::from("scenario,build_time_all_s,build_time_selected_s\n");
    for r in &reports {
        writeln!(
            times,
            "{},{},{}",
            r.scenario,
            r.build_time_all.as_secs_f64(),
            r.build_time_selected
                .map(|d| d.as_secs_f64().to_string())
                .unwrap_or_default(),
        )
        .unwrap();
    }
    atomic_write(&cfg.output.dir.join("build_times.csv"), times.as_bytes())?;

    if with_selection && cfg.data.positions.is_some() {
        let positions = load_positions_from(cfg)?;
        let mut map = String::from("window,mote_id,x,y,state\n");
        for r in &reports {
            let selected = r.selected_ids.as_deref().unwrap_or(&[]);
            for p in &positions {
                let state = if p.mote_id == cfg.data.sink {
                    "sink"
                } else if selected.contains(&p.mote_id) {
                    "active"
                } else {
                    "sleep"
                };
                writeln!(map, "{},{},{},{},{state}", r.n_train, p.mote_id, p.x, p.y).unwrap();
            }
        }
        atomic_write(&cfg.output.dir.join("selection_map.csv"), map.as_bytes())?;
    }
    Ok(())
}

/// Run the adaptive loop over the configured windows and write a plan and
/// energy ledger per stage plus an adoption log.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let matrix = load_matrix(cfg)?;
    let positions = load_positions_from(cfg)?;
    let schedule: Vec<usize> = cfg.experiment.windows.iter().map(|w| w[1]).collect();
    let opts = scenario_opts(cfg, "adaptive".into())?;

    let stages = adaptive_loop(
        &matrix,
        &positions,
        cfg.data.sink,
        &schedule,
        cfg.simulate.rmse_threshold,
        &opts,
    )?;

    let cost = CostModel {
        tx_cost: cfg.simulate.tx_cost,
        rx_cost: cfg.simulate.rx_cost,
    };
    let mut log = String::from("window,adopted,selected_ids,rmse_sel_pct,ltef\n");
    for stage in &stages {
        let mut plan_buf = Vec::new();
        write_plan(&stage.plan, &positions, &mut plan_buf)?;
        atomic_write(
            &cfg.output.dir.join(format!("plan_{}.csv", stage.window_len)),
            &plan_buf,
        )?;

        let ledger = simulate_epochs(&stage.plan, cfg.simulate.epochs, cost)?;
        let mut ledger_buf = Vec::new();
        write_ledger(&ledger, &mut ledger_buf)?;
        atomic_write(
            &cfg.output.dir.join(format!("ledger_{}.csv", stage.window_len)),
            &ledger_buf,
        )?;

        writeln!(
            log,
            "{},{},{},{},{}",
            stage.window_len,
            stage.adopted,
            fmt_ids(stage.report.selected_ids.as_deref().unwrap_or(&[])),
            fmt_opt(stage.report.rmse_selected.and_then(|r| r.percent)),
            fmt_opt(stage.report.ltef),
        )
        .unwrap();
    }
    atomic_write(&cfg.output.dir.join("adoption_log.csv"), log.as_bytes())?;
    Ok(())
}

/// Pretty-print previously written outputs.
pub fn cmd_report(cfg: &RunConfig) -> Result<String> {
    let mut out = String::new();
    let summary = cfg.output.dir.join("summary.txt");
    if summary.exists() {
        out.push_str(&fs::read_to_string(&summary)?);
    }
    let adoption = cfg.output.dir.join("adoption_log.csv");
    if adoption.exists() {
        out.push_str("\nadaptive routing\n================\n");
        for line in fs::read_to_string(&adoption)?.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() == 5 {
                writeln!(
                    out,
                    "  window {:>6}: {} selected [{}] rmse {}% ltef {}",
                    f[0],
                    if f[1] == "true" { "adopted " } else { "rejected" },
                    f[2].replace(';', ","),
                    if f[3].is_empty() { "n/a" } else { f[3] },
                    f[4],
                )
                .unwrap();
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Config(format!(
            "no outputs found under {}",
            cfg.output.dir.display()
        )));
    }
    Ok(out)
}
