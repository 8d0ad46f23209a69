//! Multi-zone infrared time-of-flight sensor simulator.
//!
//! The scene is a horizontal slice through the test frame: wall segments and a
//! vertical cylinder seen as a circle. A sensor divides its field of view into
//! `zones_per_side` columns of equal angular width. Each zone reports the
//! nearest surface anywhere inside its angular footprint, which is what a
//! real zone does when it stops its clock on the first returning photons.
//! Because the target is a vertical cylinder, every row of a column sees the
//! same noiseless range; rows only differ through independent noise.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::Point2D;

/// Readings are clamped below at this value so every valid reading stays positive.
pub const MIN_READING_MM: f64 = 1e-3;

/// Largest supported grid (the part has 64 SPADs, i.e. 8 x 8).
pub const MAX_ZONES_PER_SIDE: usize = 8;

/// Hits closer than this are the sensor's own mount and are ignored.
const SELF_HIT_MM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AmbientCondition {
    Dark,
    ArtificialLight,
}

impl AmbientCondition {
    pub fn label(self) -> &'static str {
        match self {
            AmbientCondition::Dark => "dark",
            AmbientCondition::ArtificialLight => "lit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorConfig {
    pub position: Point2D,
    /// Boresight direction, degrees counter-clockwise from `+x`.
    pub yaw_deg: f64,
    /// Total horizontal field of view in degrees.
    pub fov_deg: f64,
    pub zones_per_side: usize,
    pub max_range_mm: f64,
}

impl SensorConfig {
    pub const DEFAULT_FOV_DEG: f64 = 60.0;
    pub const DEFAULT_ZONES: usize = 4;
    pub const DEFAULT_MAX_RANGE_MM: f64 = 3500.0;

    /// A sensor with the default field of view, grid and range.
    pub fn new(position: Point2D, yaw_deg: f64) -> Self {
        Self {
            position,
            yaw_deg,
            fov_deg: Self::DEFAULT_FOV_DEG,
            zones_per_side: Self::DEFAULT_ZONES,
            max_range_mm: Self::DEFAULT_MAX_RANGE_MM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() || !self.yaw_deg.is_finite() {
            return Err(Error::invalid("sensor pose must be finite"));
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(Error::invalid(format!(
                "field of view must be in (0, 180) degrees, got {}",
                self.fov_deg
            )));
        }
        if !(1..=MAX_ZONES_PER_SIDE).contains(&self.zones_per_side) {
            return Err(Error::invalid(format!(
                "zones per side must be in 1..={MAX_ZONES_PER_SIDE}, got {}",
                self.zones_per_side
            )));
        }
        if !(self.max_range_mm > 0.0 && self.max_range_mm.is_finite()) {
            return Err(Error::invalid("max range must be positive and finite"));
        }
        Ok(())
    }

    /// Angular width of one zone column, degrees.
    pub fn zone_width_deg(&self) -> f64 {
        self.fov_deg / self.zones_per_side as f64
    }

    /// Centre azimuth of column `i`, degrees.
    pub fn zone_azimuth_deg(&self, i: usize) -> f64 {
        self.yaw_deg - self.fov_deg / 2.0 + (i as f64 + 0.5) * self.zone_width_deg()
    }
}

/// Stochastic range error model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Base Gaussian standard deviation, mm.
    pub sigma0_mm: f64,
    /// Additional standard deviation per metre of true range, mm/m.
    pub sigma_slope: f64,
    /// Per-zone probability of a spurious early trigger.
    pub outlier_prob: f64,
    /// Early triggers shorten the reading by up to this much, mm.
    pub outlier_shortening_max_mm: f64,
    /// Scales both sigma and outlier probability under artificial light.
    pub ambient_multiplier: f64,
}

impl Default for NoiseModel {
    /// Constants tuned so the simulated rig's dark-condition position scatter
    /// lands near what the physical rig showed (about 10 mm).
    fn default() -> Self {
        Self {
            sigma0_mm: 5.0,
            sigma_slope: 10.0,
            outlier_prob: 0.002,
            outlier_shortening_max_mm: 150.0,
            ambient_multiplier: 2.0,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            sigma0_mm: 0.0,
            sigma_slope: 0.0,
            outlier_prob: 0.0,
            outlier_shortening_max_mm: 0.0,
            ambient_multiplier: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.sigma0_mm,
            self.sigma_slope,
            self.outlier_prob,
            self.outlier_shortening_max_mm,
            self.ambient_multiplier,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("noise parameters must be finite"));
        }
        if self.sigma0_mm < 0.0 || self.sigma_slope < 0.0 || self.outlier_shortening_max_mm < 0.0 {
            return Err(Error::invalid("noise magnitudes must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.outlier_prob) {
            return Err(Error::invalid("outlier probability must be in [0, 1]"));
        }
        if self.ambient_multiplier < 1.0 {
            return Err(Error::invalid("ambient multiplier must be >= 1"));
        }
        Ok(())
    }

    /// Gaussian standard deviation at true range `d` under `condition`.
    pub fn sigma_at(&self, d: f64, condition: AmbientCondition) -> f64 {
        let sigma = self.sigma0_mm + self.sigma_slope * d / 1000.0;
        sigma * self.condition_factor(condition)
    }

    pub fn outlier_prob_for(&self, condition: AmbientCondition) -> f64 {
        (self.outlier_prob * self.condition_factor(condition)).min(1.0)
    }

    fn condition_factor(&self, condition: AmbientCondition) -> f64 {
        match condition {
            AmbientCondition::Dark => 1.0,
            AmbientCondition::ArtificialLight => self.ambient_multiplier,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Point2D,
    pub end: Point2D,
}

impl Segment {
    pub const fn new(start: Point2D, end: Point2D) -> Self {
        Self { start, end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point2D,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub walls: Vec<Segment>,
    pub target: Option<Circle>,
}

impl Scene {
    /// Three walls of a square frame with its lower-left corner at the origin.
    /// The side at `y = size` is left open so a subject can walk in.
    pub fn open_frame(size_mm: f64) -> Vec<Segment> {
        let (o, bx, tx, ty) = (
            Point2D::ORIGIN,
            Point2D::new(size_mm, 0.0),
            Point2D::new(size_mm, size_mm),
            Point2D::new(0.0, size_mm),
        );
        vec![Segment::new(o, bx), Segment::new(o, ty), Segment::new(bx, tx)]
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = &self.target {
            if !t.center.is_finite() {
                return Err(Error::invalid("target centre must be finite"));
            }
            if !(t.radius > 0.0 && t.radius.is_finite()) {
                return Err(Error::invalid("target radius must be positive"));
            }
        }
        if self.walls.iter().any(|w| !w.start.is_finite() || !w.end.is_finite()) {
            return Err(Error::invalid("wall endpoints must be finite"));
        }
        Ok(())
    }
}

/// One scan: a square grid of per-zone ranges in mm, row-major, `None` for no return.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneFrame {
    zones_per_side: usize,
    max_range_mm: f64,
    readings: Vec<Option<f64>>,
}

impl ZoneFrame {
    pub fn new(zones_per_side: usize, max_range_mm: f64, readings: Vec<Option<f64>>) -> Result<Self> {
        if zones_per_side == 0 || readings.len() != zones_per_side * zones_per_side {
            return Err(Error::invalid(format!(
                "expected {0}x{0} readings, got {1}",
                zones_per_side,
                readings.len()
            )));
        }
        if let Some(bad) = readings
            .iter()
            .flatten()
            .find(|&&d| !(d > 0.0 && d <= max_range_mm))
        {
            return Err(Error::invalid(format!(
                "reading {bad} outside (0, {max_range_mm}]"
            )));
        }
        Ok(Self {
            zones_per_side,
            max_range_mm,
            readings,
        })
    }

    pub fn zones_per_side(&self) -> usize {
        self.zones_per_side
    }

    pub fn max_range_mm(&self) -> f64 {
        self.max_range_mm
    }

    pub fn readings(&self) -> &[Option<f64>] {
        &self.readings
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.readings[row * self.zones_per_side + col]
    }

    pub fn valid_readings(&self) -> impl Iterator<Item = f64> + '_ {
        self.readings.iter().flatten().copied()
    }
}

/// Angular footprint of one zone, as its two bounding unit rays.
#[derive(Debug, Clone, Copy)]
struct Wedge {
    lo: Point2D,
    hi: Point2D,
}

impl Wedge {
    fn from_degrees(lo_deg: f64, hi_deg: f64) -> Self {
        Self {
            lo: Point2D::from_angle(lo_deg.to_radians()),
            hi: Point2D::from_angle(hi_deg.to_radians()),
        }
    }

    /// True when direction `v` lies inside the wedge (width below 180 degrees).
    fn contains(&self, v: Point2D) -> bool {
        self.lo.cross(v) >= 0.0 && v.cross(self.hi) >= 0.0
    }

    /// Nearest distance from the apex to any point of `seg` (relative to the
    /// apex) inside the wedge.
    fn nearest_on_segment(&self, p0: Point2D, p1: Point2D) -> Option<f64> {
        let dp = p1 - p0;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        // each half-plane constraint is f + t*g >= 0
        for (f, g) in [
            (self.lo.cross(p0), self.lo.cross(dp)),
            (p0.cross(self.hi), dp.cross(self.hi)),
        ] {
            if g == 0.0 {
                if f < 0.0 {
                    return None;
                }
            } else if g > 0.0 {
                t0 = t0.max(-f / g);
            } else {
                t1 = t1.min(-f / g);
            }
        }
        if t0 > t1 {
            return None;
        }
        let len2 = dp.dot(dp);
        let t = if len2 > 0.0 {
            (-p0.dot(dp) / len2).clamp(t0, t1)
        } else {
            t0
        };
        let d = (p0 + dp * t).norm();
        (d > SELF_HIT_MM).then_some(d)
    }

    fn nearest_on_circle(&self, center: Point2D, radius: f64) -> Option<f64> {
        let dc = center.norm();
        if dc <= radius {
            return None;
        }
        if self.contains(center) {
            return Some(dc - radius);
        }
        [self.lo, self.hi]
            .into_iter()
            .filter_map(|u| ray_circle(u, center, radius))
            .min_by(f64::total_cmp)
    }
}

/// First intersection of the ray from the origin along unit `u` with a circle.
fn ray_circle(u: Point2D, center: Point2D, radius: f64) -> Option<f64> {
    let b = u.dot(center);
    let disc = b * b - (center.dot(center) - radius * radius);
    if disc < 0.0 {
        return None;
    }
    let t = b - disc.sqrt();
    (t > SELF_HIT_MM).then_some(t)
}

/// Noiseless scan of `scene`.
pub fn cast_zone_rays(config: &SensorConfig, scene: &Scene) -> Result<ZoneFrame> {
    config.validate()?;
    scene.validate()?;
    let n = config.zones_per_side;
    let half = config.zone_width_deg() / 2.0;
    let origin = config.position;

    let columns: Vec<Option<f64>> = (0..n)
        .map(|i| {
            let az = config.zone_azimuth_deg(i);
            let wedge = Wedge::from_degrees(az - half, az + half);
            let walls = scene
                .walls
                .iter()
                .filter_map(|w| wedge.nearest_on_segment(w.start - origin, w.end - origin));
            let target = scene
                .target
                .and_then(|c| wedge.nearest_on_circle(c.center - origin, c.radius));
            walls
                .chain(target)
                .min_by(f64::total_cmp)
                .filter(|&d| d <= config.max_range_mm)
        })
        .collect();

    let readings = (0..n).flat_map(|_| columns.iter().copied()).collect();
    ZoneFrame::new(n, config.max_range_mm, readings)
}

/// Perturbs every valid reading with range-dependent Gaussian noise and
/// occasional early-trigger shortening.
///
/// Three variates are drawn per zone in row-major order whether or not the
/// zone is valid, so the random stream consumed depends only on the grid size.
pub fn apply_noise<R: Rng + ?Sized>(
    frame: &ZoneFrame,
    model: &NoiseModel,
    condition: AmbientCondition,
    rng: &mut R,
) -> ZoneFrame {
    let p_out = model.outlier_prob_for(condition);
    let max = frame.max_range_mm;
    let readings = frame
        .readings
        .iter()
        .map(|reading| {
            let z: f64 = StandardNormal.sample(rng);
            let trigger: f64 = rng.random();
            let shortening: f64 = rng.random();
            reading.map(|d| {
                let noisy = if trigger < p_out {
                    d - shortening * model.outlier_shortening_max_mm
                } else {
                    d + model.sigma_at(d, condition) * z
                };
                noisy.clamp(MIN_READING_MM, max)
            })
        })
        .collect();
    ZoneFrame {
        zones_per_side: frame.zones_per_side,
        max_range_mm: max,
        readings,
    }
}

pub fn scan<R: Rng + ?Sized>(
    config: &SensorConfig,
    scene: &Scene,
    model: &NoiseModel,
    condition: AmbientCondition,
    rng: &mut R,
) -> Result<ZoneFrame> {
    model.validate()?;
    let clean = cast_zone_rays(config, scene)?;
    Ok(apply_noise(&clean, model, condition, rng))
}
