//! Precision and accuracy figures for a trial table.
//!
//! Precision is the population standard deviation (divisor `n`) of each axis
//! over a position's trials. Accuracy is the percent error: the mean over
//! trials of `|v - actual| / actual`, per axis, times 100. Note this is not
//! `|mean(v) - actual| / actual`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::experiments::trials::TrialTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

pub fn population_std(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("standard deviation of an empty list"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Ok((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt())
}

/// Mean absolute relative error against `actual`, in percent.
pub fn percent_error(values: &[f64], actual: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("percent error of an empty list"));
    }
    if actual == 0.0 || !actual.is_finite() {
        return Err(Error::invalid(format!("percent error needs a non-zero actual, got {actual}")));
    }
    let n = values.len() as f64;
    Ok(values.iter().map(|v| ((v - actual) / actual).abs()).sum::<f64>() / n * 100.0)
}

/// One column of the report: a position and axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisStats {
    pub position: usize,
    pub axis: Axis,
    pub std_dev: f64,
    pub percent_error: f64,
}

impl AxisStats {
    pub fn label(&self) -> String {
        format!("Position {} {}", self.position, self.axis.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub experiment_id: String,
    /// Position-major, x before y.
    pub columns: Vec<AxisStats>,
    pub avg_std_dev: f64,
    pub avg_percent_error: f64,
}

pub fn stats_report(table: &TrialTable) -> Result<StatsReport> {
    table.validate()?;
    let mut columns = Vec::with_capacity(table.positions.len() * 2);
    for (i, p) in table.positions.iter().enumerate() {
        let xs: Vec<f64> = p.estimates().map(|e| e.x).collect();
        let ys: Vec<f64> = p.estimates().map(|e| e.y).collect();
        if xs.is_empty() {
            return Err(Error::invalid(format!("position {} has no successful trials", i + 1)));
        }
        for (axis, values, actual) in [(Axis::X, &xs, p.actual.x), (Axis::Y, &ys, p.actual.y)] {
            columns.push(AxisStats {
                position: i + 1,
                axis,
                std_dev: population_std(values)?,
                percent_error: percent_error(values, actual)?,
            });
        }
    }
    let n = columns.len() as f64;
    Ok(StatsReport {
        experiment_id: table.experiment_id.clone(),
        avg_std_dev: columns.iter().map(|c| c.std_dev).sum::<f64>() / n,
        avg_percent_error: columns.iter().map(|c| c.percent_error).sum::<f64>() / n,
        columns,
    })
}

impl StatsReport {
    /// Two tables laid out like the published ones: one column per position
    /// and axis, then the row average.
    pub fn to_text(&self) -> String {
        let width = 14;
        let mut out = String::new();
        for (title, pct) in [("Standard Deviation", false), ("Percent Error", true)] {
            let _ = write!(out, "{title:<20}");
            for c in &self.columns {
                let _ = write!(out, "{:>width$}", c.label());
            }
            let _ = writeln!(out, "{:>width$}", "Average");
            let _ = write!(out, "{:<20}", self.experiment_id);
            let cell = |v: f64| if pct { format!("{v:.2}%") } else { format!("{v:.2}") };
            for c in &self.columns {
                let v = if pct { c.percent_error } else { c.std_dev };
                let _ = write!(out, "{:>width$}", cell(v));
            }
            let avg = if pct { self.avg_percent_error } else { self.avg_std_dev };
            let _ = writeln!(out, "{:>width$}", cell(avg));
            out.push('\n');
        }
        let _ = writeln!(out, "Average {:.2} (standard deviation, mm)", self.avg_std_dev);
        let _ = writeln!(out, "Average {:.2}% (percent error)", self.avg_percent_error);
        out
    }

    /// `metric,p1_x,...,average` with one row per metric, full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric");
        for c in &self.columns {
            let _ = write!(out, ",p{}_{}", c.position, c.axis.label());
        }
        out.push_str(",average\n");
        out.push_str("std_dev_mm");
        for c in &self.columns {
            let _ = write!(out, ",{}", c.std_dev);
        }
        let _ = writeln!(out, ",{}", self.avg_std_dev);
        out.push_str("percent_error");
        for c in &self.columns {
            let _ = write!(out, ",{}", c.percent_error);
        }
        let _ = writeln!(out, ",{}", self.avg_percent_error);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::trials::PositionTrials;
    use crate::geometry::Point2D;

    #[test]
    fn std_examples() {
        let p1x = [304.0, 329.0, 305.0, 307.0, 295.0, 302.0, 317.0, 319.0, 315.0, 292.0];
        assert!((population_std(&p1x).unwrap() - 10.85).abs() < 0.01);
        let p2x = [648.0, 638.0, 646.0, 636.0, 647.0, 636.0, 640.0, 635.0, 631.0, 647.0];
        assert!((population_std(&p2x).unwrap() - 5.82).abs() < 0.01);
        assert_eq!(population_std(&[5.0, 5.0, 5.0]).unwrap(), 0.0);
        assert!(population_std(&[]).is_err());
    }

    #[test]
    fn std_uses_n_divisor() {
        // 1, 3 -> mean 2, squared deviations 1 + 1, /2 -> 1
        assert_eq!(population_std(&[1.0, 3.0]).unwrap(), 1.0);
    }

    #[test]
    fn percent_error_examples() {
        let p3x_exp2 = [645.0, 686.0, 662.0, 670.0, 647.0, 655.0, 652.0, 657.0, 671.0, 649.0];
        assert!((percent_error(&p3x_exp2, 660.0).unwrap() - 1.58).abs() < 0.01);
        let p3x_exp1 = [659.0, 654.0, 804.0, 640.0, 636.0, 661.0, 652.0, 630.0, 645.0, 526.0];
        assert!((percent_error(&p3x_exp1, 330.0).unwrap() - 97.18).abs() < 0.01);
        assert_eq!(percent_error(&[7.0, 7.0], 7.0).unwrap(), 0.0);
        assert!(percent_error(&[1.0], 0.0).is_err());
        assert!(percent_error(&[], 1.0).is_err());
    }

    #[test]
    fn per_trial_convention_not_mean_of_trials() {
        let p1y_exp2 = [324.0, 304.0, 295.0, 289.0, 332.0, 299.0, 288.0, 326.0, 306.0, 309.0];
        let per_trial = percent_error(&p1y_exp2, 330.0).unwrap();
        let mean = p1y_exp2.iter().sum::<f64>() / 10.0;
        let of_mean = ((mean - 330.0) / 330.0).abs() * 100.0;
        assert!((per_trial - 7.03).abs() < 0.01);
        assert!((of_mean - 6.91).abs() < 0.01);
    }

    #[test]
    fn perfect_table_reports_zeros() {
        let table = TrialTable {
            experiment_id: "perfect".into(),
            lighting: None,
            positions: [(330.0, 330.0), (660.0, 330.0)]
                .iter()
                .map(|&(x, y)| PositionTrials {
                    actual: Point2D::new(x, y),
                    trials: vec![Some(Point2D::new(x, y)); 3],
                })
                .collect(),
        };
        let r = stats_report(&table).unwrap();
        assert_eq!(r.columns.len(), 4);
        assert!(r.columns.iter().all(|c| c.std_dev == 0.0 && c.percent_error == 0.0));
        assert_eq!((r.avg_std_dev, r.avg_percent_error), (0.0, 0.0));
    }

    #[test]
    fn failed_trials_are_skipped_but_all_failed_is_an_error() {
        let mut table = TrialTable {
            experiment_id: "f".into(),
            lighting: None,
            positions: vec![PositionTrials {
                actual: Point2D::new(10.0, 10.0),
                trials: vec![None, Some(Point2D::new(11.0, 9.0))],
            }],
        };
        let r = stats_report(&table).unwrap();
        assert!((r.columns[0].percent_error - 10.0).abs() < 1e-12);
        table.positions[0].trials[1] = None;
        assert!(stats_report(&table).is_err());
    }
}
