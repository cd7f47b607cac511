//! Flight-time heuristics, time annotation, baseline A* and conflict-free A*.

mod heuristic;
mod planner;
mod trajectory;

pub use heuristic::{heuristic_2d, heuristic_3d, heuristic_3d_sorted, TimeTable};
pub use planner::{
    advance, annotate_times, astar, cfa_star, reserve_trajectory, CfaOptions, GoalHold,
    SearchError, DEFAULT_HOVER_THRESHOLD,
};
pub use trajectory::{BlockVisit, Planner, Trajectory4D};
