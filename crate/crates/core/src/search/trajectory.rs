use crate::grid::{BlockIndex, GridSpec};
use crate::occupancy::TimeInterval;
use serde::{Deserialize, Serialize};
use std::fmt;

/// One block of a 4D path. The block is held over `[t_enter, t_exit)`;
/// `hover` is the wait at the block centre before leaving it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockVisit {
    #[serde(flatten)]
    pub block: BlockIndex,
    pub t_enter: f64,
    pub t_exit: f64,
    pub hover: f64,
}

impl BlockVisit {
    pub fn interval(&self) -> TimeInterval {
        TimeInterval {
            start: self.t_enter,
            end: self.t_exit,
        }
    }

    pub fn duration(&self) -> f64 {
        self.t_exit - self.t_enter
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Planner {
    Astar,
    Cfastar,
}

impl fmt::Display for Planner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Planner::Astar => "astar",
            Planner::Cfastar => "cfastar",
        })
    }
}

/// A planned flight: ordered block visits annotated with enter/exit times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory4D {
    pub id: u64,
    pub aircraft: String,
    pub t_dep: f64,
    pub visits: Vec<BlockVisit>,
    pub flight_time: f64,
    pub planner: Planner,
}

impl Trajectory4D {
    pub fn new(
        id: u64,
        aircraft: impl Into<String>,
        t_dep: f64,
        visits: Vec<BlockVisit>,
        planner: Planner,
    ) -> Self {
        let flight_time = visits.last().map_or(0.0, |v| v.t_exit - t_dep);
        Self {
            id,
            aircraft: aircraft.into(),
            t_dep,
            visits,
            flight_time,
            planner,
        }
    }

    pub fn blocks(&self) -> impl Iterator<Item = BlockIndex> + '_ {
        self.visits.iter().map(|v| v.block)
    }

    pub fn total_hover(&self) -> f64 {
        self.visits.iter().map(|v| v.hover).sum()
    }

    pub fn arrival(&self) -> f64 {
        self.t_dep + self.flight_time
    }

    /// Structural checks: neighbouring visits, contiguous times, first entry at departure.
    pub fn is_well_formed(&self, grid: &GridSpec) -> bool {
        let Some(first) = self.visits.first() else {
            return false;
        };
        first.t_enter == self.t_dep
            && self
                .visits
                .iter()
                .all(|v| grid.contains(v.block) && v.t_exit >= v.t_enter && v.hover >= 0.0)
            && self.visits.windows(2).all(|w| {
                grid.link_between(w[0].block, w[1].block).is_some() && w[0].t_exit == w[1].t_enter
            })
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trajectory serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_line_shape() {
        let t = Trajectory4D::new(
            3,
            "DJI Phantom 4",
            1.5,
            vec![
                BlockVisit {
                    block: BlockIndex::new(0, 0, 0),
                    t_enter: 1.5,
                    t_exit: 2.0,
                    hover: 0.0,
                },
                BlockVisit {
                    block: BlockIndex::new(1, 0, 0),
                    t_enter: 2.0,
                    t_exit: 2.5,
                    hover: 0.0,
                },
            ],
            Planner::Cfastar,
        );
        let line = t.to_json_line();
        assert_eq!(
            line,
            r#"{"id":3,"aircraft":"DJI Phantom 4","t_dep":1.5,"visits":[{"i":0,"j":0,"k":0,"t_enter":1.5,"t_exit":2.0,"hover":0.0},{"i":1,"j":0,"k":0,"t_enter":2.0,"t_exit":2.5,"hover":0.0}],"flight_time":1.0,"planner":"cfastar"}"#
        );
        let back: Trajectory4D = serde_json::from_str(&line).unwrap();
        assert_eq!(back, t);
        let g = GridSpec::new([0.0; 3], 20.0, 40.0, 2, 1, 1).unwrap();
        assert!(t.is_well_formed(&g));
    }
}
