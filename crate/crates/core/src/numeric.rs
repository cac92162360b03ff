//! Small numerical helpers shared by the estimators.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sums over a fixed number of lanes.
#[derive(Debug, Clone)]
pub struct CompensatedVec {
    lanes: Vec<CompensatedSum>,
}

impl CompensatedVec {
    pub fn zeros(k: usize) -> Self {
        Self { lanes: vec![CompensatedSum::new(); k] }
    }

    #[inline]
    pub fn add(&mut self, xs: &[f64]) {
        for (lane, &x) in self.lanes.iter_mut().zip(xs) {
            lane.add(x);
        }
    }

    #[inline]
    pub fn add_scaled(&mut self, scale: f64, xs: &[f64]) {
        for (lane, &x) in self.lanes.iter_mut().zip(xs) {
            lane.add(scale * x);
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.lanes.iter().map(CompensatedSum::value).collect()
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Logistic function `1 / (1 + e^{-z})`.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let mut s = CompensatedSum::new();
    for &x in xs {
        s.add((x - m).exp());
    }
    m + s.value().ln()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean distance between two equally long vectors.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `ln C(m, 2)` for the number of unordered index pairs among `m` points.
pub fn ln_pairs(m: usize) -> f64 {
    let m = m as f64;
    (m * (m - 1.0) / 2.0).ln()
}

pub fn n_pairs(m: usize) -> u64 {
    let m = m as u64;
    m * m.saturating_sub(1) / 2
}
