//! Position estimation from a pair of zone frames, plus per-axis software calibration.
//!
//! Each sensor contributes the lowest valid reading of its frame. Those two
//! ranges and the baseline form the triangle that locates the target.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{triangulate, Baseline, Point2D, Side, TriangleRanges};
use crate::kvfile::KvFile;
use crate::sensor_sim::ZoneFrame;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackEstimate {
    pub position: Point2D,
    pub range_a: f64,
    pub range_b: f64,
}

/// Smallest valid reading in `frame`.
pub fn min_valid_reading(frame: &ZoneFrame) -> Result<f64> {
    frame
        .valid_readings()
        .min_by(f64::total_cmp)
        .ok_or(Error::NoTarget)
}

/// Two-sensor tracker for a fixed rig.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracker {
    pub baseline: Baseline,
    /// Side of the sensor-one to sensor-two line the tracked region lies on.
    pub interior: Side,
    /// Added to each minimum reading, e.g. the target radius to aim at its axis.
    pub radius_compensation_mm: f64,
    pub calibration: Option<CalibrationModel>,
}

impl Tracker {
    /// Uncompensated, uncalibrated tracker.
    pub fn new(baseline: Baseline, interior: Side) -> Self {
        Self {
            baseline,
            interior,
            radius_compensation_mm: 0.0,
            calibration: None,
        }
    }

    pub fn with_radius_compensation(mut self, mm: f64) -> Self {
        self.radius_compensation_mm = mm;
        self
    }

    pub fn with_calibration(mut self, model: CalibrationModel) -> Self {
        self.calibration = Some(model);
        self
    }

    pub fn estimate(&self, frame_a: &ZoneFrame, frame_b: &ZoneFrame) -> Result<TrackEstimate> {
        let range_a = min_valid_reading(frame_a)? + self.radius_compensation_mm;
        let range_b = min_valid_reading(frame_b)? + self.radius_compensation_mm;
        let ranges = TriangleRanges::new(range_a, range_b)?;
        let raw = triangulate(ranges, &self.baseline, self.interior)?;
        let position = match &self.calibration {
            Some(model) => model.apply(raw),
            None => raw,
        };
        Ok(TrackEstimate {
            position,
            range_a,
            range_b,
        })
    }
}

/// Per-axis affine correction `actual ~ scale * estimated + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationModel {
    pub offset_x: f64,
    pub offset_y: f64,
    pub scale_x: f64,
    pub scale_y: f64,
}

impl Default for CalibrationModel {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl CalibrationModel {
    pub const IDENTITY: CalibrationModel = CalibrationModel {
        offset_x: 0.0,
        offset_y: 0.0,
        scale_x: 1.0,
        scale_y: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        let finite = [self.offset_x, self.offset_y, self.scale_x, self.scale_y]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.scale_x <= 0.0 || self.scale_y <= 0.0 {
            return Err(Error::invalid(format!(
                "calibration needs finite offsets and positive scales: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn apply(&self, p: Point2D) -> Point2D {
        Point2D::new(
            self.scale_x * p.x + self.offset_x,
            self.scale_y * p.y + self.offset_y,
        )
    }

    /// Key/value text form, one `key = value` per line.
    pub fn to_kv_string(&self) -> String {
        self.to_string()
    }

    pub fn from_kv_str(text: &str, path: &Path) -> Result<Self> {
        let kv = KvFile::parse(text, path)?;
        kv.reject_unknown(&["offset_x_mm", "offset_y_mm", "scale_x", "scale_y"])?;
        let model = Self {
            offset_x: kv.require("offset_x_mm")?,
            offset_y: kv.require("offset_y_mm")?,
            scale_x: kv.get("scale_x")?.unwrap_or(1.0),
            scale_y: kv.get("scale_y")?.unwrap_or(1.0),
        };
        model.validate().map_err(|e| kv.error(0, e.to_string()))?;
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv_str(&text, path)
    }
}

impl fmt::Display for CalibrationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "offset_x_mm = {}", self.offset_x)?;
        writeln!(f, "offset_y_mm = {}", self.offset_y)?;
        writeln!(f, "scale_x = {}", self.scale_x)?;
        writeln!(f, "scale_y = {}", self.scale_y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitMode {
    /// Scale fixed at 1; offset is the mean residual.
    #[default]
    OffsetOnly,
    /// Least-squares scale and offset per axis.
    Affine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationFit {
    pub model: CalibrationModel,
    /// Set when an affine fit was requested but an axis had to fall back to
    /// offset-only because the scale was not identifiable.
    pub scale_fallback: bool,
}

/// Fits a calibration from `(estimated, actual)` pairs.
pub fn fit_calibration(pairs: &[(Point2D, Point2D)], mode: FitMode) -> Result<CalibrationFit> {
    if pairs.is_empty() {
        return Err(Error::invalid("calibration needs at least one (estimate, actual) pair"));
    }
    if pairs.iter().any(|(e, a)| !e.is_finite() || !a.is_finite()) {
        return Err(Error::invalid("calibration pairs must be finite"));
    }
    let xs: Vec<(f64, f64)> = pairs.iter().map(|(e, a)| (e.x, a.x)).collect();
    let ys: Vec<(f64, f64)> = pairs.iter().map(|(e, a)| (e.y, a.y)).collect();
    let (fx, fy) = match mode {
        FitMode::OffsetOnly => (fit_offset(&xs), fit_offset(&ys)),
        FitMode::Affine => (fit_affine(&xs), fit_affine(&ys)),
    };
    Ok(CalibrationFit {
        model: CalibrationModel {
            offset_x: fx.offset,
            offset_y: fy.offset,
            scale_x: fx.scale,
            scale_y: fy.scale,
        },
        scale_fallback: fx.fell_back || fy.fell_back,
    })
}

struct AxisFit {
    scale: f64,
    offset: f64,
    fell_back: bool,
}

fn mean(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = v.clone().count() as f64;
    v.sum::<f64>() / n
}

fn fit_offset(pairs: &[(f64, f64)]) -> AxisFit {
    AxisFit {
        scale: 1.0,
        offset: mean(pairs.iter().map(|(e, a)| a - e)),
        fell_back: false,
    }
}

fn fit_affine(pairs: &[(f64, f64)]) -> AxisFit {
    let me = mean(pairs.iter().map(|p| p.0));
    let ma = mean(pairs.iter().map(|p| p.1));
    let var_e = pairs.iter().map(|(e, _)| (e - me).powi(2)).sum::<f64>();
    let cov = pairs.iter().map(|(e, a)| (e - me) * (a - ma)).sum::<f64>();
    let scale = cov / var_e;
    let flat = var_e <= f64::EPSILON * (me * me + 1.0) * pairs.len() as f64;
    // zero spread in the estimates, or a non-physical mirrored fit
    if flat || scale.is_nan() || scale <= 0.0 {
        return AxisFit {
            fell_back: true,
            ..fit_offset(pairs)
        };
    }
    AxisFit {
        scale,
        offset: ma - scale * me,
        fell_back: false,
    }
}
