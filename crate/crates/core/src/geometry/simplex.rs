/// Euclidean projection onto `{x ≥ 0, Σx = 1}` by sort-and-threshold.
pub fn euclidean_simplex_projection(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    project_simplex_into(v, &mut out);
    out
}

pub(crate) fn project_simplex_into(v: &[f64], out: &mut [f64]) {
    let n = v.len();
    if n == 0 {
        return;
    }
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = sorted[0] - 1.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    out.iter_mut().zip(v).for_each(|(o, x)| *o = (x - theta).max(0.0));
}
