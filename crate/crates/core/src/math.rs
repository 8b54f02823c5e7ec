//! Log-domain helpers.

/// `log(sum(exp(values)))`, stable for large magnitudes. Returns `-inf` for an
/// empty slice or when every entry is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Normalizes log-weights into a probability vector in place of a fresh Vec.
/// Returns `None` when all weights are `-inf`.
pub fn normalize_log(values: &[f64]) -> Option<Vec<f64>> {
    let lse = log_sum_exp(values);
    if !lse.is_finite() {
        return None;
    }
    Some(values.iter().map(|v| (v - lse).exp()).collect())
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
