/// Euclidean projection of `v` onto `{c ≥ 0, Σc = total}`.
///
/// The result is `c_i = max(v_i − τ, 0)`; the threshold `τ` is found exactly
/// by sorting and scanning the breakpoints. A non-positive `total` yields the
/// zero vector.
pub fn project_simplex(v: &[f64], total: f64) -> Vec<f64> {
    if v.is_empty() || total <= 0.0 {
        return vec![0.0; v.len()];
    }
    let tau = simplex_threshold(v, total);
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// The shift `τ` used by [`project_simplex`].
pub fn simplex_threshold(v: &[f64], total: f64) -> f64 {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = u[0] - total;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - total) / (k + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        } else {
            break;
        }
    }
    tau
}
