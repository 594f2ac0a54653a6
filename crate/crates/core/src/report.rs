use serde::{Deserialize, Serialize};

/// Why the branch-and-bound loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Relative gap at or below the tolerance (or the queue ran empty).
    GapTolerance,
    /// Absolute gap at or below the tolerance.
    AbsoluteGap,
    /// Integer-valued cost with `upper - lower < 1`.
    IntegerGap,
    NodeLimit,
    TimeLimit,
}

impl Termination {
    /// True when the report certifies global optimality within tolerance.
    pub fn is_certified(self) -> bool {
        matches!(self, Self::GapTolerance | Self::AbsoluteGap | Self::IntegerGap)
    }
}

/// Optimality certificate returned by every solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub best_point: Vec<f64>,
    pub upper: f64,
    pub lower: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    pub boxes_explored: usize,
    pub boxes_pruned: usize,
    pub wall_time: f64,
    pub terminated_by: Termination,
}

impl SolveReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_field_names() {
        let r = SolveReport {
            best_point: vec![1.0, 2.0],
            upper: 3.0,
            lower: 2.5,
            relative_gap: 1.0 / 6.0,
            iterations: 7,
            boxes_explored: 13,
            boxes_pruned: 4,
            wall_time: 0.25,
            terminated_by: Termination::GapTolerance,
        };
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in [
            "best_point",
            "upper",
            "lower",
            "relative_gap",
            "iterations",
            "boxes_explored",
            "boxes_pruned",
            "wall_time",
            "terminated_by",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["terminated_by"], "gap_tolerance");
        let back: SolveReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
