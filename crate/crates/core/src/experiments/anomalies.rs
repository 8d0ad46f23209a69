use crate::experiments::trials::TrialTable;
use crate::geometry::Point2D;

/// Positions whose trial centroid lies nearer to another position's recorded
/// actual than to its own. These usually indicate a mislabelled actual row.
pub fn note_anomalies(table: &TrialTable) -> Vec<String> {
    let actuals: Vec<Point2D> = table.positions.iter().map(|p| p.actual).collect();
    let mut notes = Vec::new();
    for (i, p) in table.positions.iter().enumerate() {
        let est: Vec<Point2D> = p.estimates().collect();
        if est.is_empty() {
            continue;
        }
        let n = est.len() as f64;
        let centroid = Point2D::new(
            est.iter().map(|e| e.x).sum::<f64>() / n,
            est.iter().map(|e| e.y).sum::<f64>() / n,
        );
        let own = centroid.distance_to(p.actual);
        let nearest = actuals
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .min_by(|a, b| centroid.distance_to(*a.1).total_cmp(&centroid.distance_to(*b.1)));
        if let Some((j, other)) = nearest {
            let d = centroid.distance_to(*other);
            if d < own {
                notes.push(format!(
                    "position {}: trial centroid ({:.1}, {:.1}) is {:.1} mm from its recorded actual ({}, {}) \
                     but {:.1} mm from position {}'s actual ({}, {})",
                    i + 1,
                    centroid.x,
                    centroid.y,
                    own,
                    p.actual.x,
                    p.actual.y,
                    d,
                    j + 1,
                    other.x,
                    other.y
                ));
            }
        }
    }
    notes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::trials::PositionTrials;

    #[test]
    fn swapped_actuals_are_flagged() {
        let pos = |actual: (f64, f64), near: (f64, f64)| PositionTrials {
            actual: Point2D::new(actual.0, actual.1),
            trials: vec![Some(Point2D::new(near.0, near.1))],
        };
        let table = TrialTable {
            experiment_id: "t".into(),
            lighting: None,
            positions: vec![
                pos((330.0, 330.0), (320.0, 300.0)),
                pos((330.0, 660.0), (650.0, 700.0)),
                pos((660.0, 660.0), (300.0, 680.0)),
            ],
        };
        let notes = note_anomalies(&table);
        assert_eq!(notes.len(), 2);
        assert!(notes[0].starts_with("position 2"));
        assert!(notes[1].starts_with("position 3"));
    }
}
