//! Parsing of raw sensor logs and position files into an aligned,
//! gap-handled epoch-by-sensor matrix.
//!
//! The raw log is whitespace-separated with 8 fields per line in the order
//! `date time epoch mote_id temperature humidity light voltage`; lines with
//! 4-8 fields are accepted (trailing measurements optional).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::str::FromStr;

use chrono::{NaiveDate, NaiveTime};

use crate::error::{Error, Result};

/// Which measurement column of the log to model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementField {
    Temperature,
    Humidity,
    Light,
    Voltage,
}

impl MeasurementField {
    pub fn name(self) -> &'static str {
        match self {
            MeasurementField::Temperature => "temperature",
            MeasurementField::Humidity => "humidity",
            MeasurementField::Light => "light",
            MeasurementField::Voltage => "voltage",
        }
    }
}

impl FromStr for MeasurementField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "temperature" => Ok(MeasurementField::Temperature),
            "humidity" => Ok(MeasurementField::Humidity),
            "light" => Ok(MeasurementField::Light),
            "voltage" => Ok(MeasurementField::Voltage),
            other => Err(Error::Config(format!("unknown measurement field '{other}'"))),
        }
    }
}

/// One line of the raw log. Measurement fields may be absent;
/// `mote_id` and `epoch` are mandatory.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorReading {
    pub date: NaiveDate,
    pub time: NaiveTime,
    pub epoch: u64,
    pub mote_id: u32,
    pub temperature: Option<f64>,
    pub humidity: Option<f64>,
    pub light: Option<f64>,
    pub voltage: Option<f64>,
}

impl SensorReading {
    pub fn value(&self, field: MeasurementField) -> Option<f64> {
        match field {
            MeasurementField::Temperature => self.temperature,
            MeasurementField::Humidity => self.humidity,
            MeasurementField::Light => self.light,
            MeasurementField::Voltage => self.voltage,
        }
    }
}

#[derive(Debug)]
pub struct ParsedLog {
    pub readings: Vec<SensorReading>,
    /// Lines that failed to parse, counted and skipped.
    pub malformed_lines: usize,
}

fn parse_reading(line: &str) -> Option<SensorReading> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() < 4 || fields.len() > 8 {
        return None;
    }
    let date = NaiveDate::parse_from_str(fields[0], "%Y-%m-%d").ok()?;
    let time = NaiveTime::parse_from_str(fields[1], "%H:%M:%S%.f").ok()?;
    let epoch: u64 = fields[2].parse().ok()?;
    let mote_id: u32 = fields[3].parse().ok()?;
    if mote_id < 1 {
        return None;
    }
    let mut measurements = [None; 4];
    for (slot, raw) in measurements.iter_mut().zip(fields.iter().skip(4)) {
        let v: f64 = raw.parse().ok()?;
        if !v.is_finite() {
            return None;
        }
        *slot = Some(v);
    }
    Some(SensorReading {
        date,
        time,
        epoch,
        mote_id,
        temperature: measurements[0],
        humidity: measurements[1],
        light: measurements[2],
        voltage: measurements[3],
    })
}

/// Parse a raw sensor log. Malformed lines are skipped and counted;
/// a log with zero well-formed lines is an error.
pub fn parse_sensor_log<R: BufRead>(reader: R) -> Result<ParsedLog> {
    let mut readings = Vec::new();
    let mut malformed = 0usize;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_reading(&line) {
            Some(r) => readings.push(r),
            None => malformed += 1,
        }
    }
    if readings.is_empty() {
        return Err(Error::EmptyDataset(
            "no well-formed readings in input".into(),
        ));
    }
    Ok(ParsedLog {
        readings,
        malformed_lines: malformed,
    })
}

/// How to resolve missing cells after pivoting to the epoch grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapPolicy {
    DropRow,
    ForwardFill,
    ColumnMean,
}

impl FromStr for GapPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drop_row" => Ok(GapPolicy::DropRow),
            "forward_fill" => Ok(GapPolicy::ForwardFill),
            "column_mean" => Ok(GapPolicy::ColumnMean),
            other => Err(Error::Config(format!("unknown gap policy '{other}'"))),
        }
    }
}

/// Minimum non-missing readings a sensor needs before it is kept.
pub const DEFAULT_MIN_SAMPLES: usize = 35;

/// What ingestion did to the raw readings.
#[derive(Debug, Default)]
pub struct IngestReport {
    /// Sensors excluded for having fewer than `min_samples` readings,
    /// with their observed counts.
    pub dropped_sensors: Vec<(u32, usize)>,
    /// Readings discarded because a later one shared their (epoch, mote) key.
    pub duplicates: usize,
    /// Cells filled by the gap policy.
    pub gaps_filled: usize,
    /// (epoch, mote) cells where forward-fill had no predecessor and fell
    /// back to the column mean.
    pub mean_fallbacks: Vec<(u64, u32)>,
    /// Rows removed by the drop_row policy.
    pub rows_dropped: usize,
}

impl IngestReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "dropped_sensors: {}", self.dropped_sensors.len()).unwrap();
        for (id, n) in &self.dropped_sensors {
            writeln!(s, "  sensor {id}: {n} readings").unwrap();
        }
        writeln!(s, "duplicates: {}", self.duplicates).unwrap();
        writeln!(s, "gaps_filled: {}", self.gaps_filled).unwrap();
        writeln!(s, "mean_fallbacks: {}", self.mean_fallbacks.len()).unwrap();
        writeln!(s, "rows_dropped: {}", self.rows_dropped).unwrap();
        s
    }
}

/// Aligned epoch-by-sensor table with a designated target (sink) column.
/// Rows are sorted by epoch ascending, columns by sensor id ascending,
/// and no cell is missing.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    epochs: Vec<u64>,
    sensor_ids: Vec<u32>,
    values: Vec<Vec<f64>>, // row-major, rows = epochs
    target_id: u32,
}

impl DataMatrix {
    pub fn new(
        epochs: Vec<u64>,
        sensor_ids: Vec<u32>,
        values: Vec<Vec<f64>>,
        target_id: u32,
    ) -> Result<Self> {
        if epochs.len() < 2 || sensor_ids.len() < 2 {
            return Err(Error::Dimension(format!(
                "matrix must be at least 2x2, got {}x{}",
                epochs.len(),
                sensor_ids.len()
            )));
        }
        if values.len() != epochs.len() {
            return Err(Error::Dimension("row count != epoch count".into()));
        }
        if !epochs.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Contract("epochs must be strictly ascending".into()));
        }
        if !sensor_ids.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Contract(
                "sensor ids must be strictly ascending".into(),
            ));
        }
        for row in &values {
            if row.len() != sensor_ids.len() {
                return Err(Error::Dimension("ragged row".into()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Contract("non-finite cell".into()));
            }
        }
        if !sensor_ids.contains(&target_id) {
            return Err(Error::UnknownId(target_id));
        }
        Ok(DataMatrix {
            epochs,
            sensor_ids,
            values,
            target_id,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.epochs.len()
    }

    pub fn n_cols(&self) -> usize {
        self.sensor_ids.len()
    }

    pub fn epochs(&self) -> &[u64] {
        &self.epochs
    }

    pub fn sensor_ids(&self) -> &[u32] {
        &self.sensor_ids
    }

    pub fn target_id(&self) -> u32 {
        self.target_id
    }

    /// Column ids excluding the target.
    pub fn feature_ids(&self) -> Vec<u32> {
        self.sensor_ids
            .iter()
            .copied()
            .filter(|&id| id != self.target_id)
            .collect()
    }

    pub fn column_index(&self, id: u32) -> Result<usize> {
        self.sensor_ids
            .binary_search(&id)
            .map_err(|_| Error::UnknownId(id))
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[index]).collect()
    }

    pub fn column_by_id(&self, id: u32) -> Result<Vec<f64>> {
        Ok(self.column(self.column_index(id)?))
    }

    pub fn target_column(&self) -> Vec<f64> {
        self.column(self.column_index(self.target_id).expect("target present"))
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row][col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row]
    }

    /// Re-point the target at another existing column.
    pub fn with_target(mut self, target_id: u32) -> Result<Self> {
        if !self.sensor_ids.contains(&target_id) {
            return Err(Error::UnknownId(target_id));
        }
        self.target_id = target_id;
        Ok(self)
    }

    /// Keep only the rows whose index is in `rows` (ascending order assumed).
    pub(crate) fn subset_rows(&self, rows: &[usize]) -> Result<DataMatrix> {
        DataMatrix::new(
            rows.iter().map(|&r| self.epochs[r]).collect(),
            self.sensor_ids.clone(),
            rows.iter().map(|&r| self.values[r].clone()).collect(),
            self.target_id,
        )
    }
}

/// Pivot long-format readings into an epoch-by-sensor grid, drop sensors
/// with fewer than `min_samples` readings of `field`, then resolve the
/// remaining gaps per `gap_policy`.
pub fn align_epochs(
    readings: &[SensorReading],
    field: MeasurementField,
    gap_policy: GapPolicy,
    min_samples: usize,
    target_id: u32,
) -> Result<(DataMatrix, IngestReport)> {
    if readings.is_empty() {
        return Err(Error::EmptyDataset("no readings to align".into()));
    }
    let mut report = IngestReport::default();

    // Last occurrence wins for duplicate (epoch, mote) keys.
    let mut cells: BTreeMap<(u64, u32), f64> = BTreeMap::new();
    for r in readings {
        if let Some(v) = r.value(field) {
            if cells.insert((r.epoch, r.mote_id), v).is_some() {
                report.duplicates += 1;
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no readings carry a {} value",
            field.name()
        )));
    }

    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for (_, mote) in cells.keys() {
        *counts.entry(*mote).or_insert(0) += 1;
    }
    let mut kept: Vec<u32> = Vec::new();
    for (&mote, &n) in &counts {
        if n < min_samples {
            report.dropped_sensors.push((mote, n));
        } else {
            kept.push(mote);
        }
    }
    if kept.len() < 2 {
        return Err(Error::EmptyDataset(format!(
            "fewer than 2 sensors reach min_samples={min_samples}"
        )));
    }

    let epochs: Vec<u64> = cells
        .keys()
        .filter(|(_, m)| kept.contains(m))
        .map(|(e, _)| *e)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut grid: Vec<Vec<Option<f64>>> = epochs
        .iter()
        .map(|&e| kept.iter().map(|&m| cells.get(&(e, m)).copied()).collect())
        .collect();
    let mut row_epochs = epochs;

    match gap_policy {
        GapPolicy::DropRow => {
            let keep: Vec<bool> = grid
                .iter()
                .map(|row| row.iter().all(|c| c.is_some()))
                .collect();
            report.rows_dropped = keep.iter().filter(|&&k| !k).count();
            row_epochs = row_epochs
                .into_iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(e, _)| e)
                .collect();
            grid = grid
                .into_iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(r, _)| r)
                .collect();
        }
        GapPolicy::ForwardFill | GapPolicy::ColumnMean => {
            let means: Vec<f64> = (0..kept.len())
                .map(|c| {
                    let vals: Vec<f64> = grid.iter().filter_map(|row| row[c]).collect();
                    if vals.is_empty() {
                        0.0
                    } else {
                        vals.iter().sum::<f64>() / vals.len() as f64
                    }
                })
                .collect();
            for c in 0..kept.len() {
                let mut last: Option<f64> = None;
                for (r, epoch) in row_epochs.iter().enumerate() {
                    match grid[r][c] {
                        Some(v) => last = Some(v),
                        None => {
                            report.gaps_filled += 1;
                            let fill = match (gap_policy, last) {
                                (GapPolicy::ForwardFill, Some(prev)) => prev,
                                (GapPolicy::ForwardFill, None) => {
                                    // No predecessor for this sensor yet.
                                    report.mean_fallbacks.push((*epoch, kept[c]));
                                    means[c]
                                }
                                _ => means[c],
                            };
                            grid[r][c] = Some(fill);
                            if gap_policy == GapPolicy::ForwardFill {
                                last = Some(fill);
                            }
                        }
                    }
                }
            }
        }
    }

    if row_epochs.len() < 2 {
        return Err(Error::EmptyDataset(
            "fewer than 2 complete rows after gap handling".into(),
        ));
    }
    let values: Vec<Vec<f64>> = grid
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.unwrap()).collect())
        .collect();
    let matrix = DataMatrix::new(row_epochs, kept, values, target_id)?;
    Ok((matrix, report))
}

/// Contiguous row slice preserving column order and target.
pub fn take_window(matrix: &DataMatrix, start_row: usize, n_rows: usize) -> Result<DataMatrix> {
    let end = start_row
        .checked_add(n_rows)
        .ok_or_else(|| Error::Bounds("window overflow".into()))?;
    if end > matrix.n_rows() {
        return Err(Error::Bounds(format!(
            "window [{start_row}, {end}) exceeds {} rows",
            matrix.n_rows()
        )));
    }
    let rows: Vec<usize> = (start_row..end).collect();
    matrix.subset_rows(&rows)
}

/// A sensor's planar coordinates in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorPosition {
    pub mote_id: u32,
    pub x: f64,
    pub y: f64,
}

/// Parse a positions file: one "mote_id x y" line per sensor,
/// '#'-prefixed comment lines ignored.
pub fn load_positions<R: BufRead>(reader: R) -> Result<Vec<SensorPosition>> {
    let mut positions: Vec<SensorPosition> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(lineno, "expected 'mote_id x y'"));
        }
        let mote_id: u32 = fields[0]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad mote id '{}'", fields[0])))?;
        let x: f64 = fields[1]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad coordinate '{}'", fields[1])))?;
        let y: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad coordinate '{}'", fields[2])))?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::parse(lineno, "non-finite coordinate"));
        }
        if positions.iter().any(|p| p.mote_id == mote_id) {
            return Err(Error::parse(lineno, format!("duplicate mote id {mote_id}")));
        }
        positions.push(SensorPosition { mote_id, x, y });
    }
    Ok(positions)
}

/// Write a matrix as comma-delimited text: header row of sensor ids,
/// first column the epoch index.
pub fn write_matrix<W: Write>(matrix: &DataMatrix, mut out: W) -> Result<()> {
    write!(out, "epoch")?;
    for id in matrix.sensor_ids() {
        write!(out, ",{id}")?;
    }
    writeln!(out)?;
    for (r, epoch) in matrix.epochs().iter().enumerate() {
        write!(out, "{epoch}")?;
        for c in 0..matrix.n_cols() {
            write!(out, ",{}", fmt_cell(matrix.value(r, c)))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

// Shortest representation that round-trips exactly.
fn fmt_cell(v: f64) -> String {
    let mut s = format!("{v}");
    if s.parse::<f64>() != Ok(v) {
        s = format!("{v:?}");
    }
    s
}

/// Read a matrix previously written by [`write_matrix`].
pub fn read_matrix<R: BufRead>(reader: R, target_id: u32) -> Result<DataMatrix> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::EmptyDataset("matrix file is empty".into()))??;
    let mut ids = Vec::new();
    for (i, tok) in header.split(',').enumerate() {
        if i == 0 {
            if tok != "epoch" {
                return Err(Error::parse(1, "header must start with 'epoch'"));
            }
            continue;
        }
        ids.push(
            tok.parse::<u32>()
                .map_err(|_| Error::parse(1, format!("bad sensor id '{tok}'")))?,
        );
    }
    let mut epochs = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut toks = line.split(',');
        let epoch: u64 = toks
            .next()
            .unwrap()
            .parse()
            .map_err(|_| Error::parse(lineno, "bad epoch"))?;
        let row: Vec<f64> = toks
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("bad value '{t}'")))
            })
            .collect::<Result<_>>()?;
        if row.len() != ids.len() {
            return Err(Error::parse(lineno, "wrong number of columns"));
        }
        epochs.push(epoch);
        values.push(row);
    }
    DataMatrix::new(epochs, ids, values, target_id)
}
