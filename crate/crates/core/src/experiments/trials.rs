//! Trial-data CSV: `trial,p1_x,p1_y,...,pN_x,pN_y`, one numbered row per trial,
//! then a final row whose first field is literally `actual`.
//!
//! A trial that produced no estimate is written with both of its cells empty.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::sensor_sim::AmbientCondition;

#[derive(Debug, Clone, PartialEq)]
pub struct PositionTrials {
    pub actual: Point2D,
    /// Per-trial estimates in trial order; `None` marks a failed trial.
    pub trials: Vec<Option<Point2D>>,
}

impl PositionTrials {
    pub fn estimates(&self) -> impl Iterator<Item = Point2D> + '_ {
        self.trials.iter().flatten().copied()
    }

    pub fn failed_count(&self) -> usize {
        self.trials.iter().filter(|t| t.is_none()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialTable {
    pub experiment_id: String,
    /// Not stored in the CSV; `None` for tables loaded from disk.
    pub lighting: Option<AmbientCondition>,
    pub positions: Vec<PositionTrials>,
}

impl TrialTable {
    pub fn validate(&self) -> Result<()> {
        if self.positions.is_empty() {
            return Err(Error::invalid("trial table has no positions"));
        }
        let n = self.positions[0].trials.len();
        for (i, p) in self.positions.iter().enumerate() {
            if p.trials.is_empty() {
                return Err(Error::invalid(format!("position {} has no trials", i + 1)));
            }
            if p.trials.len() != n {
                return Err(Error::invalid("every position needs the same number of trials"));
            }
            if !p.actual.is_finite() || p.trials.iter().flatten().any(|t| !t.is_finite()) {
                return Err(Error::invalid(format!("position {} has non-finite values", i + 1)));
            }
        }
        Ok(())
    }

    pub fn trial_count(&self) -> usize {
        self.positions.first().map_or(0, |p| p.trials.len())
    }

    /// Every successful `(estimate, actual)` pair, position-major.
    pub fn pairs(&self) -> Vec<(Point2D, Point2D)> {
        self.positions
            .iter()
            .flat_map(|p| p.estimates().map(move |e| (e, p.actual)))
            .collect()
    }

    /// Same table with `f` applied to every estimate.
    pub fn map_estimates(&self, f: impl Fn(Point2D) -> Point2D) -> TrialTable {
        TrialTable {
            positions: self
                .positions
                .iter()
                .map(|p| PositionTrials {
                    actual: p.actual,
                    trials: p.trials.iter().map(|t| t.map(&f)).collect(),
                })
                .collect(),
            ..self.clone()
        }
    }

    pub fn from_reader<R: Read>(reader: R, path: &Path, experiment_id: &str) -> Result<Self> {
        parse(reader, path, experiment_id)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.validate()?;
        let io = |e: csv::Error| Error::io(PathBuf::from("<csv>"), e.into());
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["trial".to_string()];
        for k in 1..=self.positions.len() {
            header.push(format!("p{k}_x"));
            header.push(format!("p{k}_y"));
        }
        w.write_record(&header).map_err(io)?;
        for t in 0..self.trial_count() {
            let mut row = vec![(t + 1).to_string()];
            for p in &self.positions {
                match p.trials[t] {
                    Some(e) => row.extend([e.x.to_string(), e.y.to_string()]),
                    None => row.extend([String::new(), String::new()]),
                }
            }
            w.write_record(&row).map_err(io)?;
        }
        let mut row = vec!["actual".to_string()];
        for p in &self.positions {
            row.extend([p.actual.x.to_string(), p.actual.y.to_string()]);
        }
        w.write_record(&row).map_err(io)?;
        w.flush().map_err(|e| Error::io("<csv>", e))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

/// Reads a trial-data CSV; the experiment id is the file stem.
pub fn load_trials(path: &Path) -> Result<TrialTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse(file, path, &id)
}

fn parse<R: Read>(reader: R, path: &Path, experiment_id: &str) -> Result<TrialTable> {
    let err = |line: u64, column: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(err(1, 1, "empty file".into())),
        Some(r) => r.map_err(|e| csv_error(path, e))?,
    };
    let n_cols = header.len();
    if n_cols < 3 || n_cols % 2 == 0 {
        return Err(err(1, 1, format!("header needs `trial` plus x/y column pairs, got {n_cols} columns")));
    }
    let n_positions = (n_cols - 1) / 2;
    let mut expected = vec!["trial".to_string()];
    for k in 1..=n_positions {
        expected.push(format!("p{k}_x"));
        expected.push(format!("p{k}_y"));
    }
    for (col, (got, want)) in header.iter().zip(&expected).enumerate() {
        if got != want {
            return Err(err(1, col + 1, format!("expected header `{want}`, got `{got}`")));
        }
    }

    let mut trials: Vec<Vec<Option<Point2D>>> = vec![Vec::new(); n_positions];
    let mut actual: Option<Vec<Point2D>> = None;
    let mut last_line = 1;
    for record in records {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        last_line = line;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if actual.is_some() {
            return Err(err(line, 1, "rows after the `actual` row".into()));
        }
        if record.len() != n_cols {
            return Err(err(
                line,
                record.len().min(n_cols) + 1,
                format!("expected {n_cols} fields, got {}", record.len()),
            ));
        }
        let label = &record[0];
        let is_actual = label == "actual";
        if !is_actual && label.parse::<u64>().is_err() {
            return Err(err(line, 1, format!("expected a trial number or `actual`, got `{label}`")));
        }
        let mut row = Vec::with_capacity(n_positions);
        for k in 0..n_positions {
            let (cx, cy) = (1 + 2 * k, 2 + 2 * k);
            let (sx, sy) = (&record[cx], &record[cy]);
            if sx.is_empty() && sy.is_empty() && !is_actual {
                row.push(None);
                continue;
            }
            let num = |s: &str, col: usize| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(line, col + 1, format!("expected a number, got `{s}`")))
            };
            row.push(Some(Point2D::new(num(sx, cx)?, num(sy, cy)?)));
        }
        if is_actual {
            actual = Some(row.into_iter().flatten().collect());
        } else {
            for (k, v) in row.into_iter().enumerate() {
                trials[k].push(v);
            }
        }
    }

    let Some(actual) = actual else {
        let message = if trials[0].is_empty() {
            "no data rows"
        } else {
            "missing `actual` row"
        };
        return Err(err(last_line + 1, 1, message.into()));
    };
    if trials[0].is_empty() {
        return Err(err(last_line, 1, "no trial rows before `actual`".into()));
    }

    Ok(TrialTable {
        experiment_id: experiment_id.to_string(),
        lighting: None,
        positions: actual
            .into_iter()
            .zip(trials)
            .map(|(actual, trials)| PositionTrials { actual, trials })
            .collect(),
    })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::Parse {
            path: path.to_path_buf(),
            line,
            column: 1,
            message: format!("{kind:?}"),
        },
    }
}
