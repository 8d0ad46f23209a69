//! Simulated replication of the tracking protocol: place the cylinder at each
//! marked position, scan with both sensors, triangulate, repeat.

use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::trials::{PositionTrials, TrialTable};
use crate::geometry::{Baseline, Point2D, Side};
use crate::kvfile::KvFile;
use crate::rng::trial_rng;
use crate::sensor_sim::{scan, AmbientCondition, Circle, NoiseModel, Scene, SensorConfig};
use crate::tracker::Tracker;

/// Marked positions used when a configuration does not list its own.
pub const DEFAULT_POSITIONS: [Point2D; 4] = [
    Point2D::new(330.0, 330.0),
    Point2D::new(660.0, 330.0),
    Point2D::new(660.0, 660.0),
    Point2D::new(330.0, 660.0),
];

/// Two sensors mounted in adjacent corners of an open square frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Rig {
    pub sensor_a: SensorConfig,
    pub sensor_b: SensorConfig,
    pub frame_size_mm: f64,
    pub target_radius_mm: f64,
    pub radius_compensation_mm: f64,
}

impl Default for Rig {
    fn default() -> Self {
        Self {
            sensor_a: SensorConfig::new(Point2D::ORIGIN, 45.0),
            sensor_b: SensorConfig::new(Point2D::new(1000.0, 0.0), 135.0),
            frame_size_mm: 1000.0,
            target_radius_mm: 50.0,
            radius_compensation_mm: 0.0,
        }
    }
}

impl Rig {
    pub fn validate(&self) -> Result<()> {
        self.sensor_a.validate()?;
        self.sensor_b.validate()?;
        if !(self.frame_size_mm > 0.0 && self.frame_size_mm.is_finite()) {
            return Err(Error::invalid("frame size must be positive"));
        }
        if !(self.target_radius_mm > 0.0 && self.target_radius_mm.is_finite()) {
            return Err(Error::invalid("target radius must be positive"));
        }
        if !self.radius_compensation_mm.is_finite() {
            return Err(Error::invalid("radius compensation must be finite"));
        }
        self.tracker().map(|_| ())
    }

    /// Tracker aimed at the frame interior.
    pub fn tracker(&self) -> Result<Tracker> {
        let baseline = Baseline::new(self.sensor_a.position, self.sensor_b.position)?;
        let half = self.frame_size_mm / 2.0;
        let interior = Side::of(Point2D::new(half, half), baseline.s1(), baseline.s2())
            .ok_or_else(|| Error::invalid("frame centre lies on the sensor baseline"))?;
        Ok(Tracker::new(baseline, interior).with_radius_compensation(self.radius_compensation_mm))
    }

    pub fn scene_with_target(&self, center: Point2D) -> Scene {
        Scene {
            walls: Scene::open_frame(self.frame_size_mm),
            target: Some(Circle {
                center,
                radius: self.target_radius_mm,
            }),
        }
    }

    fn contains(&self, p: Point2D) -> bool {
        p.is_finite() && p.x > 0.0 && p.y > 0.0 && p.x < self.frame_size_mm && p.y < self.frame_size_mm
    }
}

/// A trial whose scans could not be turned into a position.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    /// 1-based.
    pub position: usize,
    /// 1-based.
    pub trial: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedExperiment {
    pub table: TrialTable,
    pub failures: Vec<TrialFailure>,
}

impl SimulatedExperiment {
    /// 1-based indices of positions where every trial failed.
    pub fn lost_positions(&self) -> Vec<usize> {
        self.table
            .positions
            .iter()
            .enumerate()
            .filter(|(_, p)| p.estimates().next().is_none())
            .map(|(i, _)| i + 1)
            .collect()
    }
}

/// Runs `n_trials` scans of each position. Trial `t` of position `i` draws
/// from its own stream derived from `(seed, i, t)`.
pub fn run_simulated_experiment(
    rig: &Rig,
    actual_positions: &[Point2D],
    n_trials: usize,
    condition: AmbientCondition,
    model: &NoiseModel,
    seed: u64,
) -> Result<SimulatedExperiment> {
    rig.validate()?;
    model.validate()?;
    if n_trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    if actual_positions.is_empty() {
        return Err(Error::invalid("at least one position is required"));
    }
    if let Some(p) = actual_positions.iter().find(|p| !rig.contains(**p)) {
        return Err(Error::invalid(format!("position ({}, {}) is outside the frame", p.x, p.y)));
    }
    let tracker = rig.tracker()?;

    let mut failures = Vec::new();
    let mut positions = Vec::with_capacity(actual_positions.len());
    for (i, &actual) in actual_positions.iter().enumerate() {
        let scene = rig.scene_with_target(actual);
        let mut trials = Vec::with_capacity(n_trials);
        for t in 0..n_trials {
            let mut rng = trial_rng(seed, i, t);
            let outcome = scan(&rig.sensor_a, &scene, model, condition, &mut rng)
                .and_then(|a| Ok((a, scan(&rig.sensor_b, &scene, model, condition, &mut rng)?)))
                .and_then(|(a, b)| tracker.estimate(&a, &b));
            match outcome {
                Ok(est) => trials.push(Some(est.position)),
                Err(e @ (Error::NoTarget | Error::DegenerateTriangle { .. })) => {
                    failures.push(TrialFailure {
                        position: i + 1,
                        trial: t + 1,
                        reason: e.to_string(),
                    });
                    trials.push(None);
                }
                Err(e) => return Err(e),
            }
        }
        positions.push(PositionTrials { actual, trials });
    }

    Ok(SimulatedExperiment {
        table: TrialTable {
            experiment_id: format!("sim-{}-seed{seed}", condition.label()),
            lighting: Some(condition),
            positions,
        },
        failures,
    })
}

/// Everything a `key = value` rig file can set.
#[derive(Debug, Clone, PartialEq)]
pub struct RigConfig {
    pub rig: Rig,
    pub noise: NoiseModel,
    pub positions: Vec<Point2D>,
    pub seed: Option<u64>,
}

impl Default for RigConfig {
    fn default() -> Self {
        Self {
            rig: Rig::default(),
            noise: NoiseModel::default(),
            positions: DEFAULT_POSITIONS.to_vec(),
            seed: None,
        }
    }
}

pub const RIG_KEYS: &[&str] = &[
    "sensor1.x",
    "sensor1.y",
    "sensor1.yaw_deg",
    "sensor2.x",
    "sensor2.y",
    "sensor2.yaw_deg",
    "fov_deg",
    "zones",
    "max_range_mm",
    "noise.sigma0_mm",
    "noise.sigma_slope",
    "noise.outlier_prob",
    "noise.outlier_max_mm",
    "noise.ambient_multiplier",
    "target.radius_mm",
    "target.positions",
    "frame.size_mm",
    "tracker.radius_compensation_mm",
    "seed",
];

impl RigConfig {
    /// Parses a rig file. Missing keys keep their defaults; unknown keys are errors.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let kv = KvFile::parse(text, path)?;
        kv.reject_unknown(RIG_KEYS)?;
        let mut cfg = RigConfig::default();

        macro_rules! set {
            ($key:literal => $field:expr) => {
                if let Some(v) = kv.get($key)? {
                    $field = v;
                }
            };
        }
        let (a, b) = (&mut cfg.rig.sensor_a, &mut cfg.rig.sensor_b);
        set!("sensor1.x" => a.position.x);
        set!("sensor1.y" => a.position.y);
        set!("sensor1.yaw_deg" => a.yaw_deg);
        set!("sensor2.x" => b.position.x);
        set!("sensor2.y" => b.position.y);
        set!("sensor2.yaw_deg" => b.yaw_deg);
        for s in [&mut *a, &mut *b] {
            set!("fov_deg" => s.fov_deg);
            set!("zones" => s.zones_per_side);
            set!("max_range_mm" => s.max_range_mm);
        }
        set!("noise.sigma0_mm" => cfg.noise.sigma0_mm);
        set!("noise.sigma_slope" => cfg.noise.sigma_slope);
        set!("noise.outlier_prob" => cfg.noise.outlier_prob);
        set!("noise.outlier_max_mm" => cfg.noise.outlier_shortening_max_mm);
        set!("noise.ambient_multiplier" => cfg.noise.ambient_multiplier);
        set!("target.radius_mm" => cfg.rig.target_radius_mm);
        set!("frame.size_mm" => cfg.rig.frame_size_mm);
        set!("tracker.radius_compensation_mm" => cfg.rig.radius_compensation_mm);
        cfg.seed = kv.get("seed")?;
        if let Some((line, raw)) = kv.raw("target.positions") {
            cfg.positions = parse_positions(raw).map_err(|m| kv.error(line, m))?;
        }

        cfg.rig.validate().map_err(|e| kv.error(0, e.to_string()))?;
        cfg.noise.validate().map_err(|e| kv.error(0, e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

/// `x,y; x,y; ...`
fn parse_positions(raw: &str) -> std::result::Result<Vec<Point2D>, String> {
    let points = raw
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (x, y) = pair
                .split_once(',')
                .ok_or_else(|| format!("expected `x,y`, got `{pair}`"))?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad coordinate `{s}`"));
            Ok(Point2D::new(num(x)?, num(y)?))
        })
        .collect::<std::result::Result<Vec<_>, String>>()?;
    if points.is_empty() {
        return Err("target.positions is empty".into());
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::stats::stats_report;

    #[test]
    fn noiseless_compensated_run_hits_every_position() {
        let rig = Rig {
            radius_compensation_mm: 50.0,
            ..Rig::default()
        };
        let run = run_simulated_experiment(&rig, &DEFAULT_POSITIONS, 1, AmbientCondition::Dark, &NoiseModel::noiseless(), 0)
            .unwrap();
        assert!(run.failures.is_empty());
        for p in &run.table.positions {
            let e = p.trials[0].unwrap();
            assert!(e.distance_to(p.actual) < 5.0, "{e:?} vs {:?}", p.actual);
        }
    }

    #[test]
    fn same_seed_same_table() {
        let rig = Rig::default();
        let model = NoiseModel::default();
        let a = run_simulated_experiment(&rig, &DEFAULT_POSITIONS, 5, AmbientCondition::ArtificialLight, &model, 11).unwrap();
        let b = run_simulated_experiment(&rig, &DEFAULT_POSITIONS, 5, AmbientCondition::ArtificialLight, &model, 11).unwrap();
        assert_eq!(a, b);
        let c = run_simulated_experiment(&rig, &DEFAULT_POSITIONS, 5, AmbientCondition::ArtificialLight, &model, 12).unwrap();
        assert_ne!(a.table, c.table);
    }

    #[test]
    fn trial_streams_do_not_depend_on_other_positions() {
        let rig = Rig::default();
        let model = NoiseModel::default();
        let all = run_simulated_experiment(&rig, &DEFAULT_POSITIONS, 3, AmbientCondition::Dark, &model, 5).unwrap();
        let first = run_simulated_experiment(&rig, &DEFAULT_POSITIONS[..1], 3, AmbientCondition::Dark, &model, 5).unwrap();
        assert_eq!(all.table.positions[0], first.table.positions[0]);
    }

    #[test]
    fn default_dark_spread_is_in_band() {
        let run = run_simulated_experiment(&Rig::default(), &DEFAULT_POSITIONS, 10, AmbientCondition::Dark, &NoiseModel::default(), 0)
            .unwrap();
        let r = stats_report(&run.table).unwrap();
        assert!((5.0..=20.0).contains(&r.avg_std_dev), "{}", r.avg_std_dev);
    }

    #[test]
    fn lost_target_is_recorded_not_fatal() {
        // sensors look away from the frame, so nothing is ever in view
        let mut rig = Rig::default();
        rig.sensor_a.yaw_deg = -90.0;
        let run = run_simulated_experiment(&rig, &DEFAULT_POSITIONS[..2], 2, AmbientCondition::Dark, &NoiseModel::noiseless(), 0)
            .unwrap();
        assert_eq!(run.failures.len(), 4);
        assert_eq!(run.lost_positions(), vec![1, 2]);
        assert!(run.failures[0].reason.contains("no target"));
    }

    #[test]
    fn rejects_bad_requests() {
        let rig = Rig::default();
        let m = NoiseModel::default();
        assert!(run_simulated_experiment(&rig, &DEFAULT_POSITIONS, 0, AmbientCondition::Dark, &m, 0).is_err());
        assert!(run_simulated_experiment(&rig, &[Point2D::new(1500.0, 10.0)], 1, AmbientCondition::Dark, &m, 0).is_err());
        assert!(run_simulated_experiment(&rig, &[], 1, AmbientCondition::Dark, &m, 0).is_err());
    }

    #[test]
    fn rig_file_overrides_and_validates() {
        let text = "\
# corner rig
sensor1.yaw_deg = 40
zones = 8
noise.sigma0_mm = 3
target.positions = 100,200; 300,400
seed = 42
";
        let cfg = RigConfig::parse(text, Path::new("rig.cfg")).unwrap();
        assert_eq!(cfg.rig.sensor_a.yaw_deg, 40.0);
        assert_eq!(cfg.rig.sensor_a.zones_per_side, 8);
        assert_eq!(cfg.rig.sensor_b.zones_per_side, 8);
        assert_eq!(cfg.noise.sigma0_mm, 3.0);
        assert_eq!(cfg.positions, vec![Point2D::new(100.0, 200.0), Point2D::new(300.0, 400.0)]);
        assert_eq!(cfg.seed, Some(42));

        assert_eq!(RigConfig::parse("", Path::new("rig.cfg")).unwrap(), RigConfig::default());
        assert!(matches!(
            RigConfig::parse("colour = red\n", Path::new("rig.cfg")),
            Err(Error::Config { line: 1, .. })
        ));
        assert!(RigConfig::parse("zones = 0\n", Path::new("rig.cfg")).is_err());
        assert!(RigConfig::parse("target.positions = 1;2\n", Path::new("rig.cfg")).is_err());
        assert!(RigConfig::parse("sensor2.x = 0\n", Path::new("rig.cfg")).is_err());
    }
}
