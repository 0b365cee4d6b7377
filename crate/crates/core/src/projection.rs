//! Euclidean projection onto the capped simplex `{v >= 0, lower <= sum(v) <= upper}`.
//!
//! Both ADMM subproblems reduce to this projection. The minimiser has the
//! form `v = max(w - theta, 0)`; `theta` is zero when the clipped vector
//! already satisfies the sum bounds, and otherwise is the unique value for
//! which the clipped sum hits the violated bound.

const BISECTION_TOL: f64 = 1e-12;
const BISECTION_MAX_STEPS: usize = 200;

/// Projects `w` onto `{v >= 0, lower <= sum(v) <= upper}`.
///
/// Requires finite `w` and `0 <= lower <= upper`.
pub fn project_capped_simplex(w: &[f64], lower: f64, upper: f64) -> Vec<f64> {
    debug_assert!(0.0 <= lower && lower <= upper, "bounds [{lower}, {upper}]");
    if w.is_empty() {
        return Vec::new();
    }
    let clipped_sum: f64 = w.iter().map(|&v| v.max(0.0)).sum();
    if lower <= clipped_sum && clipped_sum <= upper {
        return w.iter().map(|&v| v.max(0.0)).collect();
    }
    let target = if clipped_sum > upper { upper } else { lower };
    if target == 0.0 {
        return vec![0.0; w.len()];
    }
    let theta = if lower == upper {
        threshold_by_sort(w, target)
    } else {
        threshold_by_bisection(w, target, lower)
    };
    w.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// `theta` with `sum(max(w - theta, 0)) == target` via the sorted prefix rule.
fn threshold_by_sort(w: &[f64], target: f64) -> f64 {
    let mut sorted = w.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut theta = sorted[0] - target;
    for (j, &value) in sorted.iter().enumerate() {
        prefix += value;
        let candidate = (prefix - target) / (j + 1) as f64;
        if value - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    theta
}

fn threshold_by_bisection(w: &[f64], target: f64, lower: f64) -> f64 {
    let clipped = |theta: f64| -> f64 { w.iter().map(|&v| (v - theta).max(0.0)).sum() };
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = w.iter().copied().fold(f64::INFINITY, f64::min);
    // clipped(lo) >= n * (lower + 1) > target and clipped(hi) == 0 <= target.
    let mut lo = min - lower - 1.0;
    let mut hi = max;
    for _ in 0..BISECTION_MAX_STEPS {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if clipped(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Recompute theta exactly on the support found by bisection.
    let theta = 0.5 * (lo + hi);
    let (sum, count) = w
        .iter()
        .filter(|&&v| v > theta)
        .fold((0.0, 0usize), |(s, c), &v| (s + v, c + 1));
    if count == 0 {
        return theta;
    }
    (sum - target) / count as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    /// Grid search over the unit simplex in two dimensions.
    fn grid_minimiser(w: [f64; 2]) -> [f64; 2] {
        let mut best = ([0.0, 0.0], f64::INFINITY);
        for i in 0..=1000 {
            let a = i as f64 / 1000.0;
            let v = [a, 1.0 - a];
            let d = (v[0] - w[0]).powi(2) + (v[1] - w[1]).powi(2);
            if d < best.1 {
                best = (v, d);
            }
        }
        best.0
    }

    #[test]
    fn point_on_simplex_is_fixed() {
        assert!(close(
            &project_capped_simplex(&[0.5, 0.5], 1.0, 1.0),
            &[0.5, 0.5],
            1e-15
        ));
    }

    #[test]
    fn corner_matches_grid_search() {
        let v = project_capped_simplex(&[2.0, 0.0], 1.0, 1.0);
        let grid = grid_minimiser([2.0, 0.0]);
        assert!(close(&v, &grid, 1e-3));
        assert!(close(&v, &[1.0, 0.0], 1e-15));
    }

    #[test]
    fn negative_input_clips_to_zero() {
        assert_eq!(
            project_capped_simplex(&[-1.0, -2.0], 0.0, 1.0),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn cap_binds_with_positive_threshold() {
        // theta = 0.4667 gives 3 * (0.8 - theta) = 1.
        let v = project_capped_simplex(&[0.8, 0.8, 0.8], 0.0, 1.0);
        assert!(close(&v, &[1.0 / 3.0; 3], 1e-14), "{v:?}");
    }

    #[test]
    fn floor_binds_with_negative_threshold() {
        let v = project_capped_simplex(&[0.0], 5.0, 6.0);
        assert!(close(&v, &[5.0], 1e-12), "{v:?}");
        let v = project_capped_simplex(&[0.1, -0.3, 0.2], 1.0, 2.0);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_cap_returns_zero() {
        assert_eq!(
            project_capped_simplex(&[1.0, 2.0], 0.0, 0.0),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn sort_and_bisection_agree() {
        let w = [0.6, 1.0, 0.6, 0.3, 0.5, 1.0, 0.3, 0.6, 0.8, 1.0];
        let a = threshold_by_sort(&w, 1.0);
        let b = threshold_by_bisection(&w, 1.0, 1.0);
        assert!((a - 0.7).abs() < 1e-12 && (a - b).abs() < 1e-12);
    }
}
