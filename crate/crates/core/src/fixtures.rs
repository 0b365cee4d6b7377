//! Embedded three-agent, ten-waypoint case study.
//!
//! The published `delta` and aggregated `gamma + delta` matrices are the
//! ground truth. The separately published `gamma` does not sum with `delta`
//! to the aggregated matrix, so the case-study `gamma` is recovered as
//! `aggregated - delta` (every entry lands in 1..=10). The published `gamma`
//! is kept as [`printed_gamma`].

use crate::model::{Assignment, Matrix, Problem, UtilityParams};

pub const CASE_STUDY_DELTA: [[f64; 10]; 3] = [
    [5., 4., 2., 6., 3., 7., 2., 10., 9., 1.],
    [8., 2., 4., 5., 9., 5., 2., 4., 9., 2.],
    [1., 1., 4., 7., 1., 6., 9., 7., 1., 9.],
];

pub const PRINTED_GAMMA: [[f64; 10]; 3] = [
    [5., 9., 5., 2., 4., 9., 2., 5., 7., 9.],
    [7., 1., 6., 9., 7., 1., 9., 10., 4., 1.],
    [3., 7., 2., 10., 9., 1., 1., 6., 7., 8.],
];

pub const CASE_STUDY_AGGREGATED: [[f64; 10]; 3] = [
    [6., 10., 9., 14., 6., 12., 5., 17., 14., 3.],
    [13., 9., 13., 15., 17., 15., 4., 7., 10., 8.],
    [11., 5., 5., 15., 3., 9., 10., 10., 7., 16.],
];

/// Zero-based golden assignment: agent 0 -> waypoint 7, 1 -> 4, 2 -> 9.
pub const CASE_STUDY_ASSIGNMENT: [(usize, usize); 3] = [(0, 7), (1, 4), (2, 9)];

pub const CASE_STUDY_UTILITY: f64 = 50.0;

pub fn case_study_delta() -> Matrix {
    Matrix::from_rows(&CASE_STUDY_DELTA).expect("static shape")
}

pub fn printed_gamma() -> Matrix {
    Matrix::from_rows(&PRINTED_GAMMA).expect("static shape")
}

pub fn case_study_aggregated() -> Matrix {
    Matrix::from_rows(&CASE_STUDY_AGGREGATED).expect("static shape")
}

pub fn case_study_gamma() -> Matrix {
    let delta = case_study_delta();
    let agg = case_study_aggregated();
    let data = agg
        .as_slice()
        .iter()
        .zip(delta.as_slice())
        .map(|(a, d)| a - d)
        .collect();
    Matrix::from_row_major(3, 10, data).expect("static shape")
}

pub fn case_study_params() -> UtilityParams {
    UtilityParams::new(case_study_gamma(), case_study_delta())
}

/// Fully connected matching-mode case-study problem.
pub fn case_study() -> Problem {
    Problem::matching(case_study_params()).expect("case study is valid")
}

pub fn case_study_assignment() -> Assignment {
    Assignment::from_pairs(CASE_STUDY_ASSIGNMENT).expect("injective")
}
