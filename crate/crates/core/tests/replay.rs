use std::path::PathBuf;

use irtrack::experiments::{
    export_scatter, load_trials, note_anomalies, run_simulated_experiment, stats_report, Rig, TrialTable,
    DEFAULT_POSITIONS,
};
use irtrack::sensor_sim::{AmbientCondition, NoiseModel};
use irtrack::tracker::{fit_calibration, FitMode};
use irtrack::Point2D;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

const EXP1_STD: [f64; 8] = [10.85, 13.87, 6.14, 11.48, 63.27, 37.40, 36.74, 9.83];
const EXP2_STD: [f64; 8] = [8.89, 14.77, 5.82, 4.15, 12.29, 6.86, 18.66, 13.28];
const EXP1_PCT: [f64; 8] = [6.52, 14.52, 3.58, 21.79, 97.18, 8.73, 65.77, 17.05];
const EXP2_PCT: [f64; 8] = [4.30, 7.03, 2.97, 9.91, 1.58, 2.95, 5.27, 2.27];

#[test]
fn shipped_tables_load() {
    let t = load_trials(&data("exp1.csv")).unwrap();
    assert_eq!(t.experiment_id, "exp1");
    assert_eq!(t.positions.len(), 4);
    assert!(t.positions.iter().all(|p| p.trials.len() == 10));
    assert_eq!(t.positions[0].actual, Point2D::new(330.0, 330.0));
    // outliers are kept verbatim
    assert_eq!(t.positions[2].trials[2], Some(Point2D::new(804.0, 666.0)));
    assert_eq!(t.positions[2].trials[9], Some(Point2D::new(526.0, 725.0)));
}

#[test]
fn published_statistics_reproduce() {
    for (file, std, pct, avg_std, avg_pct) in [
        ("exp1.csv", EXP1_STD, EXP1_PCT, 23.70, 29.39),
        ("exp2.csv", EXP2_STD, EXP2_PCT, 10.59, 4.54),
    ] {
        let r = stats_report(&load_trials(&data(file)).unwrap()).unwrap();
        for (i, c) in r.columns.iter().enumerate() {
            assert!((c.std_dev - std[i]).abs() <= 0.01, "{file} {}: {}", c.label(), c.std_dev);
            assert!((c.percent_error - pct[i]).abs() <= 0.01, "{file} {}: {}", c.label(), c.percent_error);
        }
        assert!((r.avg_std_dev - avg_std).abs() <= 0.01, "{file}: {}", r.avg_std_dev);
        assert!((r.avg_percent_error - avg_pct).abs() <= 0.01, "{file}: {}", r.avg_percent_error);

        // averages are re-derivable from the report itself
        let mean_std = r.columns.iter().map(|c| c.std_dev).sum::<f64>() / 8.0;
        assert_eq!(mean_std, r.avg_std_dev);
    }
}

#[test]
fn loading_twice_gives_equal_reports() {
    let a = stats_report(&load_trials(&data("exp2.csv")).unwrap()).unwrap();
    let b = stats_report(&load_trials(&data("exp2.csv")).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn save_then_load_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["exp1.csv", "exp2.csv"] {
        let t = load_trials(&data(name)).unwrap();
        let out = dir.path().join(name);
        t.save(&out).unwrap();
        assert_eq!(load_trials(&out).unwrap(), t);
        assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(data(name)).unwrap());
    }
}

#[test]
fn offset_calibration_on_exp2_matches_mean_residual() {
    let t = load_trials(&data("exp2.csv")).unwrap();
    let fit = fit_calibration(&t.pairs(), FitMode::OffsetOnly).unwrap();

    // oracle: mean over the 40 trials of actual - measured, straight from the columns
    let raw = std::fs::read_to_string(data("exp2.csv")).unwrap();
    let rows: Vec<Vec<f64>> = raw
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    let (trials, actual) = rows.split_at(10);
    let mut sum = (0.0, 0.0);
    for row in trials {
        for k in 0..4 {
            sum.0 += actual[0][2 * k] - row[2 * k];
            sum.1 += actual[0][2 * k + 1] - row[2 * k + 1];
        }
    }
    assert!((fit.model.offset_x - sum.0 / 40.0).abs() < 1e-12);
    assert!((fit.model.offset_y - sum.1 / 40.0).abs() < 1e-12);
    assert_eq!((fit.model.offset_x, fit.model.offset_y), (9.5, 6.4));

    let calibrated = t.map_estimates(|p| fit.model.apply(p));
    let before = stats_report(&t).unwrap().avg_percent_error;
    let after = stats_report(&calibrated).unwrap().avg_percent_error;
    assert!(after < before, "{after} >= {before}");
    let mean_y_residual = calibrated.pairs().iter().map(|(e, a)| a.y - e.y).sum::<f64>() / 40.0;
    assert!(mean_y_residual.abs() < 1e-9);
}

#[test]
fn exp1_position_three_and_four_are_flagged() {
    let notes = note_anomalies(&load_trials(&data("exp1.csv")).unwrap());
    assert_eq!(notes.len(), 2, "{notes:?}");
    assert!(notes[0].starts_with("position 3"));
    assert!(notes[1].starts_with("position 4"));
    assert!(note_anomalies(&load_trials(&data("exp2.csv")).unwrap()).is_empty());
}

#[test]
fn scatter_files_for_exp2() {
    let dir = tempfile::tempdir().unwrap();
    let t = load_trials(&data("exp2.csv")).unwrap();
    let files = export_scatter(&t, dir.path(), "exp2").unwrap();
    let csv = std::fs::read_to_string(&files[0]).unwrap();
    assert_eq!(csv.lines().count(), 1 + 40 + 4);
    assert_eq!(csv.lines().filter(|l| l.ends_with(",true")).count(), 4);
    let svg = std::fs::read_to_string(&files[1]).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches(r#"class="trial""#).count(), 40);
}

/// Mean avg_std_dev over `reps` simulated runs.
fn mean_spread(model: &NoiseModel, condition: AmbientCondition, reps: u64) -> Vec<f64> {
    (0..reps)
        .map(|seed| {
            let run = run_simulated_experiment(&Rig::default(), &DEFAULT_POSITIONS, 10, condition, model, seed).unwrap();
            stats_report(&run.table).unwrap().avg_std_dev
        })
        .collect()
}

#[test]
fn stronger_ambient_light_does_not_tighten_grouping() {
    // one-sided paired comparison over the same 20 seed schedule
    let low = NoiseModel {
        ambient_multiplier: 1.5,
        ..NoiseModel::default()
    };
    let high = NoiseModel {
        ambient_multiplier: 3.0,
        ..NoiseModel::default()
    };
    let a = mean_spread(&low, AmbientCondition::ArtificialLight, 20);
    let b = mean_spread(&high, AmbientCondition::ArtificialLight, 20);
    let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| y - x).collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    // paired t statistic, one-sided at 95% (t_{0.95, 19} = 1.729)
    let t = mean / (sd / n.sqrt());
    assert!(t > 1.729, "mean diff {mean}, t {t}");
}

#[test]
fn simulated_table_is_valid_replay_input() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_simulated_experiment(&Rig::default(), &DEFAULT_POSITIONS, 10, AmbientCondition::Dark, &NoiseModel::default(), 3)
        .unwrap();
    let path = dir.path().join("sim.csv");
    run.table.save(&path).unwrap();
    let back: TrialTable = load_trials(&path).unwrap();
    assert_eq!(back.positions, run.table.positions);
}
