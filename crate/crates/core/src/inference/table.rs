//! Dense log-domain potential tables over a set of agents, each with `m` labels.

/// Row-major table, `vars[0]` varying slowest.
#[derive(Debug, Clone)]
pub(crate) struct LogTable {
    pub vars: Vec<usize>,
    pub values: Vec<f64>,
}

/// For each variable of `outer`, its stride inside a table over `inner`
/// (zero if absent). `inner` must be a subset of `outer`.
fn strides_within(inner: &[usize], outer: &[usize], m: usize) -> Vec<usize> {
    let mut inner_strides = vec![0; inner.len()];
    let mut s = 1;
    for i in (0..inner.len()).rev() {
        inner_strides[i] = s;
        s *= m;
    }
    outer
        .iter()
        .map(|v| {
            inner
                .iter()
                .position(|w| w == v)
                .map_or(0, |i| inner_strides[i])
        })
        .collect()
}

/// Visits every index of a table over `len` variables together with the
/// matching index in a projected table whose per-variable strides are given.
fn for_each_projection(len: usize, m: usize, strides: &[usize], mut f: impl FnMut(usize, usize)) {
    let size = m.pow(len as u32);
    let mut digits = vec![0usize; len];
    let mut sub = 0usize;
    for idx in 0..size {
        f(idx, sub);
        // odometer increment, last variable fastest
        let mut j = len;
        while j > 0 {
            j -= 1;
            digits[j] += 1;
            sub += strides[j];
            if digits[j] < m {
                break;
            }
            sub -= strides[j] * m;
            digits[j] = 0;
        }
    }
}

impl LogTable {
    pub fn zeros(vars: Vec<usize>, m: usize) -> Self {
        let size = m.pow(vars.len() as u32);
        Self {
            vars,
            values: vec![0.0; size],
        }
    }

    /// Pointwise sum with a table whose variables are a subset of ours.
    pub fn add(&mut self, vars: &[usize], values: &[f64], m: usize) {
        let strides = strides_within(vars, &self.vars, m);
        let target = &mut self.values;
        for_each_projection(self.vars.len(), m, &strides, |idx, sub| {
            target[idx] += values[sub];
        });
    }

    pub fn add_table(&mut self, other: &LogTable, m: usize) {
        self.add(&other.vars, &other.values, m);
    }

    /// Log-sum-exp over every variable not in `keep`; result is ordered as `keep`.
    pub fn marginalize(&self, keep: &[usize], m: usize) -> LogTable {
        let strides = strides_within(keep, &self.vars, m);
        let size = m.pow(keep.len() as u32);
        let mut max = vec![f64::NEG_INFINITY; size];
        for_each_projection(self.vars.len(), m, &strides, |idx, sub| {
            if self.values[idx] > max[sub] {
                max[sub] = self.values[idx];
            }
        });
        let mut sum = vec![0.0; size];
        for_each_projection(self.vars.len(), m, &strides, |idx, sub| {
            if max[sub] > f64::NEG_INFINITY {
                sum[sub] += (self.values[idx] - max[sub]).exp();
            }
        });
        let values = max
            .iter()
            .zip(&sum)
            .map(|(mx, s)| if *mx == f64::NEG_INFINITY { *mx } else { mx + s.ln() })
            .collect();
        LogTable {
            vars: keep.to_vec(),
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_broadcasts_by_variable_identity() {
        let mut t = LogTable::zeros(vec![3, 1], 2);
        t.add(&[1], &[10.0, 20.0], 2);
        assert_eq!(t.values, vec![10.0, 20.0, 10.0, 20.0]);
        t.add(&[3], &[1.0, 2.0], 2);
        assert_eq!(t.values, vec![11.0, 21.0, 12.0, 22.0]);
        // reordered scope
        t.add(&[1, 3], &[0.0, 100.0, 0.0, 0.0], 2);
        assert_eq!(t.values, vec![11.0, 21.0, 112.0, 22.0]);
    }

    #[test]
    fn marginalize_matches_direct_sums() {
        let mut t = LogTable::zeros(vec![0, 1, 2], 3);
        for (i, v) in t.values.iter_mut().enumerate() {
            *v = (i as f64 * 0.37).sin();
        }
        let m = t.marginalize(&[2, 0], 3);
        for a in 0..3 {
            for c in 0..3 {
                let direct: f64 = (0..3).map(|b| t.values[a * 9 + b * 3 + c].exp()).sum();
                assert!((m.values[c * 3 + a] - direct.ln()).abs() < 1e-14);
            }
        }
        let all = t.marginalize(&[], 3);
        let direct: f64 = t.values.iter().map(|v| v.exp()).sum();
        assert!((all.values[0] - direct.ln()).abs() < 1e-14);
    }
}
