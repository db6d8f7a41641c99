//! Exact ground truth for grid planning: goal-distance fields, optimal-action
//! sets, and the action prediction accuracy metric.
//!
//! Movement is 4-connected with unit edge costs through free cells. Distance
//! fields store the cost-to-goal per cell with `-1.0` marking obstacles and
//! cells disconnected from the goal. Two independent solvers are provided
//! (Dijkstra and plain breadth-first search); with unit costs they must agree
//! exactly, which the test suite and `oracle-check` exploit.

use crate::grid::GridMap;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::collections::VecDeque;
use thiserror::Error;

/// Sentinel for obstacle or unreachable cells, as serialized.
pub const UNREACHABLE: f32 = -1.0;

/// Moves on the 4-connected grid. The ordinal order is load-bearing: ties in
/// predicted-action selection break toward the lowest ordinal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Action {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    #[inline]
    pub fn ordinal(self) -> u8 {
        self as u8
    }

    /// (row delta, column delta).
    #[inline]
    pub fn delta(self) -> (isize, isize) {
        match self {
            Action::Up => (-1, 0),
            Action::Down => (1, 0),
            Action::Left => (0, -1),
            Action::Right => (0, 1),
        }
    }
}

/// Row-major index of the cell reached from `idx` by `action`, if in bounds.
#[inline]
pub fn neighbor(size: usize, idx: usize, action: Action) -> Option<usize> {
    let (r, c) = (idx / size, idx % size);
    let (dr, dc) = action.delta();
    let nr = r.checked_add_signed(dr)?;
    let nc = c.checked_add_signed(dc)?;
    if nr < size && nc < size {
        Some(nr * size + nc)
    } else {
        None
    }
}

/// Per-cell shortest-path cost to the goal, `-1.0` where undefined.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    pub size: usize,
    pub values: Vec<f32>,
    pub goal: usize,
}

impl DistanceField {
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.size + col]
    }

    /// True for free cells with a path to the goal (including the goal).
    #[inline]
    pub fn is_reachable(&self, idx: usize) -> bool {
        self.values[idx] >= 0.0
    }
}

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("field {field_size}x{field_size} does not match map {map_size}x{map_size}")]
    SizeMismatch { field_size: usize, map_size: usize },
    #[error("bellman consistency violated at cell {cell}: {reason}")]
    Inconsistent { cell: usize, reason: String },
}

fn check_same_shape(field: &DistanceField, map: &GridMap) -> Result<(), FieldError> {
    if field.size != map.size || field.values.len() != map.cells() {
        return Err(FieldError::SizeMismatch { field_size: field.size, map_size: map.size });
    }
    Ok(())
}

/// Exact goal-distance field by Dijkstra's algorithm.
pub fn dijkstra_field(map: &GridMap) -> DistanceField {
    let n = map.cells();
    let mut dist = vec![u32::MAX; n];
    let mut heap: BinaryHeap<Reverse<(u32, usize)>> = BinaryHeap::new();
    dist[map.goal] = 0;
    heap.push(Reverse((0, map.goal)));
    while let Some(Reverse((d, idx))) = heap.pop() {
        if d > dist[idx] {
            continue;
        }
        for action in Action::ALL {
            if let Some(next) = neighbor(map.size, idx, action) {
                if map.is_free(next) && d + 1 < dist[next] {
                    dist[next] = d + 1;
                    heap.push(Reverse((d + 1, next)));
                }
            }
        }
    }
    let values = (0..n)
        .map(|i| {
            if map.is_free(i) && dist[i] != u32::MAX {
                dist[i] as f32
            } else {
                UNREACHABLE
            }
        })
        .collect();
    DistanceField { size: map.size, values, goal: map.goal }
}

/// Goal-distance field by breadth-first search. Independent of
/// [`dijkstra_field`]; with unit edge costs the two must agree exactly.
pub fn bfs_field(map: &GridMap) -> DistanceField {
    let n = map.cells();
    let mut values = vec![UNREACHABLE; n];
    let mut queue = VecDeque::new();
    values[map.goal] = 0.0;
    queue.push_back(map.goal);
    while let Some(idx) = queue.pop_front() {
        let next_value = values[idx] + 1.0;
        for action in Action::ALL {
            if let Some(next) = neighbor(map.size, idx, action) {
                if map.is_free(next) && values[next] < 0.0 {
                    values[next] = next_value;
                    queue.push_back(next);
                }
            }
        }
    }
    DistanceField { size: map.size, values, goal: map.goal }
}

/// Verify the local shortest-path conditions of `field` against `map`:
/// goal value 0, obstacles/unreachable at -1.0, and for every reachable
/// non-goal free cell `d(c) == 1 + min` over free reachable neighbors.
pub fn bellman_check(field: &DistanceField, map: &GridMap) -> Result<(), FieldError> {
    check_same_shape(field, map)?;
    if field.goal != map.goal {
        return Err(FieldError::Inconsistent {
            cell: field.goal,
            reason: format!("field goal {} != map goal {}", field.goal, map.goal),
        });
    }
    if field.values[map.goal] != 0.0 {
        return Err(FieldError::Inconsistent {
            cell: map.goal,
            reason: format!("goal value {} != 0", field.values[map.goal]),
        });
    }
    for cell in 0..map.cells() {
        let v = field.values[cell];
        if !map.is_free(cell) {
            if v != UNREACHABLE {
                return Err(FieldError::Inconsistent {
                    cell,
                    reason: format!("obstacle cell has value {v}"),
                });
            }
            continue;
        }
        let best = Action::ALL
            .iter()
            .filter_map(|&a| neighbor(map.size, cell, a))
            .filter(|&n| map.is_free(n) && field.values[n] >= 0.0)
            .map(|n| field.values[n])
            .fold(f32::INFINITY, f32::min);
        if v < 0.0 {
            if v != UNREACHABLE {
                return Err(FieldError::Inconsistent {
                    cell,
                    reason: format!("negative value {v} is not the -1.0 sentinel"),
                });
            }
            if best.is_finite() {
                return Err(FieldError::Inconsistent {
                    cell,
                    reason: "marked unreachable but has a reachable neighbor".into(),
                });
            }
        } else if cell != map.goal && v != 1.0 + best {
            return Err(FieldError::Inconsistent {
                cell,
                reason: format!("value {v} != 1 + min neighbor {best}"),
            });
        }
    }
    Ok(())
}

/// Per-cell set of optimal actions, as a 4-bit mask per cell. Obstacle and
/// unreachable cells have empty sets; the goal cell's "stay" is represented
/// by its empty mask plus the stored goal index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicySet {
    pub size: usize,
    pub goal: usize,
    masks: Vec<u8>,
}

impl PolicySet {
    #[inline]
    pub fn contains(&self, idx: usize, action: Action) -> bool {
        self.masks[idx] & (1 << action.ordinal()) != 0
    }

    pub fn actions(&self, idx: usize) -> Vec<Action> {
        Action::ALL.iter().copied().filter(|&a| self.contains(idx, a)).collect()
    }

    #[inline]
    pub fn is_empty(&self, idx: usize) -> bool {
        self.masks[idx] == 0
    }
}

/// Optimal-action sets from an exact distance field: action `a` is optimal at
/// a reachable free non-goal cell iff it moves to a free neighbor one step
/// closer to the goal.
pub fn optimal_policy(field: &DistanceField, map: &GridMap) -> Result<PolicySet, FieldError> {
    check_same_shape(field, map)?;
    let mut masks = vec![0u8; map.cells()];
    for cell in 0..map.cells() {
        if cell == map.goal || !map.is_free(cell) || !field.is_reachable(cell) {
            continue;
        }
        for action in Action::ALL {
            if let Some(n) = neighbor(map.size, cell, action) {
                if map.is_free(n) && field.values[n] == field.values[cell] - 1.0 {
                    masks[cell] |= 1 << action.ordinal();
                }
            }
        }
    }
    Ok(PolicySet { size: map.size, goal: map.goal, masks })
}

/// Greedy action from a predicted field: at each free non-goal cell, move
/// toward the free neighbor with the smallest predicted value, ties broken by
/// the lowest action ordinal. Cells with no free neighbor get `None`.
/// Non-finite predictions compare as +infinity.
pub fn predicted_policy(pred: &[f32], map: &GridMap) -> Vec<Option<Action>> {
    assert_eq!(pred.len(), map.cells(), "prediction length mismatch");
    let mut out = vec![None; map.cells()];
    for cell in 0..map.cells() {
        if cell == map.goal || !map.is_free(cell) {
            continue;
        }
        let mut best: Option<(f32, Action)> = None;
        for action in Action::ALL {
            if let Some(n) = neighbor(map.size, cell, action) {
                if !map.is_free(n) {
                    continue;
                }
                let v = if pred[n].is_finite() { pred[n] } else { f32::INFINITY };
                match best {
                    Some((bv, _)) if v >= bv => {}
                    _ => best = Some((v, action)),
                }
            }
        }
        out[cell] = best.map(|(_, a)| a);
    }
    out
}

/// Correct/evaluated counts of one map's action predictions. Evaluated cells
/// are the reachable free non-goal cells of the ground-truth field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AccuracyTally {
    pub correct: u64,
    pub evaluated: u64,
}

impl AccuracyTally {
    pub fn merge(&mut self, other: AccuracyTally) {
        self.correct += other.correct;
        self.evaluated += other.evaluated;
    }

    /// Fraction correct; defined as 1.0 when nothing was evaluated (the
    /// caller can detect that case from `evaluated == 0`).
    pub fn fraction(&self) -> f64 {
        if self.evaluated == 0 {
            1.0
        } else {
            self.correct as f64 / self.evaluated as f64
        }
    }
}

/// Action prediction accuracy of `pred` against the exact field `truth`.
/// A prediction is correct when the greedy action lies in the optimal set.
pub fn action_accuracy(
    pred: &[f32],
    truth: &DistanceField,
    map: &GridMap,
) -> Result<AccuracyTally, FieldError> {
    check_same_shape(truth, map)?;
    let policy = optimal_policy(truth, map)?;
    let greedy = predicted_policy(pred, map);
    let mut tally = AccuracyTally::default();
    for cell in 0..map.cells() {
        if cell == map.goal || !map.is_free(cell) || !truth.is_reachable(cell) {
            continue;
        }
        tally.evaluated += 1;
        if let Some(a) = greedy[cell] {
            if policy.contains(cell, a) {
                tally.correct += 1;
            }
        }
    }
    Ok(tally)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GenSpec, GridMap, OBSTACLE};

    fn map_3x3_with(blocked: &[(usize, usize)], goal: (usize, usize)) -> GridMap {
        let mut occ = vec![0u8; 9];
        for &(r, c) in blocked {
            occ[r * 3 + c] = OBSTACLE;
        }
        GridMap::new(3, occ, goal.0 * 3 + goal.1).unwrap()
    }

    #[test]
    fn empty_2x2_distances() {
        let map = GridMap::empty(2, 0).unwrap();
        let field = dijkstra_field(&map);
        assert_eq!(field.values, vec![0.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn empty_3x3_manhattan() {
        let map = GridMap::empty(3, 0).unwrap();
        let field = dijkstra_field(&map);
        assert_eq!(field.at(2, 2), 4.0);
        bellman_check(&field, &map).unwrap();
    }

    #[test]
    fn blocked_column_unreachable() {
        let map = map_3x3_with(&[(0, 1), (1, 1), (2, 1)], (0, 0));
        let field = dijkstra_field(&map);
        for r in 0..3 {
            assert_eq!(field.at(r, 2), UNREACHABLE, "row {r}");
            assert_eq!(field.at(r, 1), UNREACHABLE, "obstacle row {r}");
        }
        assert_eq!(field, bfs_field(&map));
        bellman_check(&field, &map).unwrap();
    }

    #[test]
    fn bfs_matches_dijkstra_on_random_maps() {
        for seed in 0..10 {
            for m in 5..=15 {
                let spec = GenSpec::new(m, 6, seed, 100);
                for i in 0..100 {
                    let map = crate::grid::generate_map(&spec, i).unwrap();
                    assert_eq!(dijkstra_field(&map), bfs_field(&map));
                }
            }
        }
    }

    #[test]
    fn empty_15x15_center_goal_max_distance() {
        let map = GridMap::empty(15, 7 * 15 + 7).unwrap();
        let field = bfs_field(&map);
        let max = field.values.iter().cloned().fold(f32::MIN, f32::max);
        assert_eq!(max, 14.0);
    }

    #[test]
    fn policy_unique_decreasing_neighbor() {
        let map = GridMap::empty(2, 0).unwrap();
        let field = dijkstra_field(&map);
        let policy = optimal_policy(&field, &map).unwrap();
        assert_eq!(policy.actions(1), vec![Action::Left]);
        assert_eq!(policy.actions(3), vec![Action::Up, Action::Left]);
        assert!(policy.is_empty(0));
    }

    /// Test-only oracle: first moves of all shortest paths, by brute-force
    /// enumeration bounded by the true distance.
    fn brute_force_first_moves(map: &GridMap, start: usize, dist: &DistanceField) -> Vec<Action> {
        fn reaches(map: &GridMap, cell: usize, goal: usize, budget: u32) -> bool {
            if cell == goal {
                return true;
            }
            if budget == 0 {
                return false;
            }
            Action::ALL.iter().any(|&a| {
                neighbor(map.size, cell, a)
                    .filter(|&n| map.is_free(n))
                    .is_some_and(|n| reaches(map, n, goal, budget - 1))
            })
        }
        let d = dist.values[start];
        assert!(d > 0.0);
        Action::ALL
            .iter()
            .copied()
            .filter(|&a| {
                neighbor(map.size, start, a)
                    .filter(|&n| map.is_free(n))
                    .is_some_and(|n| reaches(map, n, map.goal, d as u32 - 1))
            })
            .collect()
    }

    #[test]
    fn policy_matches_brute_force_path_enumeration() {
        let map = map_3x3_with(&[(1, 1)], (0, 0));
        let field = dijkstra_field(&map);
        let policy = optimal_policy(&field, &map).unwrap();
        let start = map.index(2, 2);
        let expected = brute_force_first_moves(&map, start, &field);
        assert_eq!(policy.actions(start), expected);
        assert_eq!(expected, vec![Action::Up, Action::Left]);
        // Every reachable non-goal cell agrees with enumeration.
        for cell in 0..9 {
            if cell == map.goal || !map.is_free(cell) || !field.is_reachable(cell) {
                continue;
            }
            assert_eq!(policy.actions(cell), brute_force_first_moves(&map, cell, &field));
        }
    }

    #[test]
    fn predicted_policy_of_truth_is_optimal() {
        let spec = GenSpec::new(9, 5, 17, 50);
        for i in 0..50 {
            let map = crate::grid::generate_map(&spec, i).unwrap();
            let field = dijkstra_field(&map);
            let policy = optimal_policy(&field, &map).unwrap();
            let greedy = predicted_policy(&field.values, &map);
            for cell in 0..map.cells() {
                if cell == map.goal || !map.is_free(cell) || !field.is_reachable(cell) {
                    continue;
                }
                let a = greedy[cell].expect("reachable cell must have a greedy action");
                assert!(policy.contains(cell, a), "map {i} cell {cell}");
            }
        }
    }

    #[test]
    fn constant_prediction_breaks_ties_by_ordinal() {
        let map = GridMap::empty(2, 0).unwrap();
        let greedy = predicted_policy(&[0.0; 4], &map);
        assert_eq!(greedy[3], Some(Action::Up));
    }

    #[test]
    fn sign_flipped_truth_scores_poorly() {
        let map = GridMap::empty(3, 0).unwrap();
        let truth = dijkstra_field(&map);
        let flipped: Vec<f32> = truth.values.iter().map(|v| -v).collect();
        let tally = action_accuracy(&flipped, &truth, &map).unwrap();
        assert_eq!(tally.evaluated, 8);
        // Brute-force recount with an independent argmin loop.
        let policy = optimal_policy(&truth, &map).unwrap();
        let mut correct = 0;
        for cell in 1..9 {
            let mut best_v = f32::INFINITY;
            let mut best_a = None;
            for a in Action::ALL {
                if let Some(n) = neighbor(3, cell, a) {
                    if map.is_free(n) && flipped[n] < best_v {
                        best_v = flipped[n];
                        best_a = Some(a);
                    }
                }
            }
            if policy.contains(cell, best_a.unwrap()) {
                correct += 1;
            }
        }
        assert_eq!(tally.correct, correct);
        assert_eq!(tally.correct, 1); // only the far corner's ordinal tie lands in the set
        assert!(tally.fraction() < 0.5);
    }

    #[test]
    fn accuracy_of_truth_is_one() {
        let spec = GenSpec::new(15, 5, 23, 20);
        for i in 0..20 {
            let map = crate::grid::generate_map(&spec, i).unwrap();
            let truth = dijkstra_field(&map);
            let tally = action_accuracy(&truth.values, &truth, &map).unwrap();
            assert_eq!(tally.correct, tally.evaluated, "map {i}");
        }
    }

    #[test]
    fn accuracy_invariant_under_constant_shift() {
        let map = GridMap::empty(3, 0).unwrap();
        let truth = dijkstra_field(&map);
        let shifted: Vec<f32> = truth.values.iter().map(|v| v + 0.3).collect();
        let tally = action_accuracy(&shifted, &truth, &map).unwrap();
        assert_eq!(tally.fraction(), 1.0);
    }

    #[test]
    fn goal_only_map_counts_as_empty_evaluation() {
        // Goal enclosed by obstacles: nothing to evaluate, fraction pinned to 1.
        let map = map_3x3_with(&[(0, 1), (1, 0)], (0, 0));
        let truth = dijkstra_field(&map);
        let tally = action_accuracy(&truth.values, &truth, &map).unwrap();
        assert_eq!(tally.evaluated, 0);
        assert_eq!(tally.fraction(), 1.0);
    }

    #[test]
    fn bellman_check_rejects_corrupted_field() {
        let map = GridMap::empty(3, 0).unwrap();
        let mut field = dijkstra_field(&map);
        field.values[5] += 1.0;
        assert!(matches!(bellman_check(&field, &map), Err(FieldError::Inconsistent { .. })));
    }
}
