//! Sufficient statistics `H = Σ_t h(x_{t:t-d})` and their change under
//! transpositions of interior positions.
//!
//! Positions are 0-based. With order `d` and length `n`, position `s` is
//! swappable when `d <= s < n - d`: the first and last `d` observations stay
//! fixed. The series is never physically permuted; windows read through the
//! current [`Permutation`].

use crate::error::{Error, Result};
use crate::numeric::CompensatedVec;
use crate::series::TimeSeries;
use crate::spec::DependenceSpec;

/// Ordering of the observations with the first and last `frozen` positions fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<usize>,
    frozen: usize,
}

impl Permutation {
    pub fn identity(n: usize, frozen: usize) -> Self {
        Self { order: (0..n).collect(), frozen }
    }

    pub fn from_order(order: Vec<usize>, frozen: usize) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &i in &order {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Shape(format!("{order:?} is not a permutation of 0..{n}")));
            }
        }
        for (pos, &i) in order.iter().enumerate() {
            if (pos < frozen || pos + frozen >= n) && i != pos {
                return Err(Error::Shape(format!("frozen position {pos} maps to {i}")));
            }
        }
        Ok(Self { order, frozen })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn frozen(&self) -> usize {
        self.frozen
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    /// Half-open range of swappable positions.
    pub fn interior(&self) -> std::ops::Range<usize> {
        self.frozen..self.order.len().saturating_sub(self.frozen).max(self.frozen)
    }

    pub fn check_swap(&self, s1: usize, s2: usize) -> Result<()> {
        let r = self.interior();
        if s1 < s2 && r.contains(&s1) && r.contains(&s2) {
            Ok(())
        } else {
            Err(Error::BoundaryViolation { s1, s2, lo: r.start, hi: r.end })
        }
    }

    pub fn swap(&mut self, s1: usize, s2: usize) -> Result<()> {
        self.check_swap(s1, s2)?;
        self.order.swap(s1, s2);
        Ok(())
    }
}

fn check_compatible(spec: &DependenceSpec, series: &TimeSeries) -> Result<()> {
    if series.dim() != spec.dim() {
        return Err(Error::Shape(format!(
            "series has {} columns, spec expects {}",
            series.dim(),
            spec.dim()
        )));
    }
    if series.len() <= spec.order() {
        return Err(Error::InsufficientData { needed: spec.order(), got: series.len() });
    }
    Ok(())
}

/// Fills `buf` with the window ending at position `t`, reading observations
/// through `order` after optionally transposing positions `swap`.
#[inline]
fn fill_window(
    series: &TimeSeries,
    order: &[usize],
    d: usize,
    t: usize,
    swap: Option<(usize, usize)>,
    buf: &mut [f64],
) {
    let p = series.dim();
    for i in 0..=d {
        let mut pos = t - i;
        if let Some((a, b)) = swap {
            if pos == a {
                pos = b;
            } else if pos == b {
                pos = a;
            }
        }
        buf[i * p..(i + 1) * p].copy_from_slice(series.row(order[pos]));
    }
}

#[inline]
fn eval_terms(spec: &DependenceSpec, window: &[f64], out: &mut [f64]) {
    let p = spec.dim();
    for (o, term) in out.iter_mut().zip(spec.terms()) {
        *o = term.eval(window, p);
    }
}

/// `h` evaluated on a window whose row `i` is `x_{t-i}`.
pub fn eval_h(spec: &DependenceSpec, window: &[f64]) -> Result<Vec<f64>> {
    spec.eval(window)
}

/// `H = Σ_{t=d}^{n-1} h(window ending at t)` in the natural order.
pub fn total_statistic(spec: &DependenceSpec, series: &TimeSeries) -> Result<Vec<f64>> {
    check_compatible(spec, series)?;
    let order: Vec<usize> = (0..series.len()).collect();
    Ok(total_with_order(spec, series, &order))
}

/// `H` of the series read through `order`.
pub fn total_statistic_ordered(
    spec: &DependenceSpec,
    series: &TimeSeries,
    order: &Permutation,
) -> Result<Vec<f64>> {
    check_compatible(spec, series)?;
    if order.len() != series.len() {
        return Err(Error::Shape(format!("order of length {} for {} rows", order.len(), series.len())));
    }
    Ok(total_with_order(spec, series, order.as_slice()))
}

fn total_with_order(spec: &DependenceSpec, series: &TimeSeries, order: &[usize]) -> Vec<f64> {
    let d = spec.order();
    let mut window = vec![0.0; (d + 1) * spec.dim()];
    let mut h = vec![0.0; spec.k()];
    let mut acc = CompensatedVec::zeros(spec.k());
    for t in d..series.len() {
        fill_window(series, order, d, t, None, &mut window);
        eval_terms(spec, &window, &mut h);
        acc.add(&h);
    }
    acc.values()
}

/// `H(π∘τ_{s1,s2}∘x) − H(π∘x)` for the given current order.
pub fn delta_statistic_swap(
    spec: &DependenceSpec,
    series: &TimeSeries,
    current_order: &Permutation,
    s1: usize,
    s2: usize,
) -> Result<Vec<f64>> {
    let mut eval = SwapEvaluator::new(spec, series, current_order.clone())?;
    eval.delta(s1, s2)
}

/// Incremental evaluator for swap deltas.
///
/// Caches `h` on every window under the current order so a swap delta only
/// evaluates the at most `2(d+1)` windows that contain a swapped position.
#[derive(Debug, Clone)]
pub struct SwapEvaluator<'a> {
    spec: &'a DependenceSpec,
    series: &'a TimeSeries,
    order: Permutation,
    cache: Vec<f64>,
    window: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> SwapEvaluator<'a> {
    pub fn new(spec: &'a DependenceSpec, series: &'a TimeSeries, order: Permutation) -> Result<Self> {
        check_compatible(spec, series)?;
        if order.len() != series.len() {
            return Err(Error::Shape(format!("order of length {} for {} rows", order.len(), series.len())));
        }
        if order.frozen() != spec.order() {
            return Err(Error::Shape(format!(
                "permutation freezes {} positions, spec order is {}",
                order.frozen(),
                spec.order()
            )));
        }
        let k = spec.k();
        let d = spec.order();
        let mut me = Self {
            spec,
            series,
            order,
            cache: vec![0.0; series.len() * k],
            window: vec![0.0; (d + 1) * spec.dim()],
            scratch: vec![0.0; k],
        };
        for t in d..series.len() {
            me.refresh(t);
        }
        Ok(me)
    }

    pub fn identity(spec: &'a DependenceSpec, series: &'a TimeSeries) -> Result<Self> {
        Self::new(spec, series, Permutation::identity(series.len(), spec.order()))
    }

    pub fn spec(&self) -> &DependenceSpec {
        self.spec
    }

    pub fn order(&self) -> &Permutation {
        &self.order
    }

    pub fn k(&self) -> usize {
        self.spec.k()
    }

    fn refresh(&mut self, t: usize) {
        let k = self.spec.k();
        fill_window(self.series, self.order.as_slice(), self.spec.order(), t, None, &mut self.window);
        eval_terms(self.spec, &self.window, &mut self.cache[t * k..(t + 1) * k]);
    }

    /// `H` under the current order, summed from the window cache.
    pub fn total(&self) -> Vec<f64> {
        let k = self.spec.k();
        let mut acc = CompensatedVec::zeros(k);
        for t in self.spec.order()..self.series.len() {
            acc.add(&self.cache[t * k..(t + 1) * k]);
        }
        acc.values()
    }

    /// Checked swap delta.
    pub fn delta(&mut self, s1: usize, s2: usize) -> Result<Vec<f64>> {
        self.order.check_swap(s1, s2)?;
        let mut out = vec![0.0; self.spec.k()];
        self.delta_into(s1, s2, &mut out);
        Ok(out)
    }

    /// Writes the swap delta into `out`. Requires `s1 < s2`, both swappable.
    #[inline]
    pub fn delta_into(&mut self, s1: usize, s2: usize, out: &mut [f64]) {
        debug_assert!(self.order.check_swap(s1, s2).is_ok());
        out.fill(0.0);
        let d = self.spec.order();
        let first = s1..=s1 + d;
        let second = if s2 <= s1 + d { s1 + d + 1..=s2 + d } else { s2..=s2 + d };
        for t in first.chain(second) {
            self.accumulate_window_delta(t, (s1, s2), out);
        }
    }

    #[inline]
    fn accumulate_window_delta(&mut self, t: usize, swap: (usize, usize), out: &mut [f64]) {
        let k = self.spec.k();
        fill_window(self.series, self.order.as_slice(), self.spec.order(), t, Some(swap), &mut self.window);
        eval_terms(self.spec, &self.window, &mut self.scratch);
        let cached = &self.cache[t * k..(t + 1) * k];
        for ((o, new), old) in out.iter_mut().zip(&self.scratch).zip(cached) {
            *o += new - old;
        }
    }

    /// Applies the transposition to the current order and updates the cache.
    pub fn apply_swap(&mut self, s1: usize, s2: usize) -> Result<()> {
        self.order.swap(s1, s2)?;
        let d = self.spec.order();
        let hi = (s2 + d).min(self.series.len() - 1);
        if s2 <= s1 + d {
            for t in s1..=hi {
                self.refresh(t);
            }
        } else {
            for t in (s1..=s1 + d).chain(s2..=hi) {
                self.refresh(t);
            }
        }
        Ok(())
    }

    /// Resets to a given order, rebuilding the cache.
    pub fn reset(&mut self, order: Permutation) -> Result<()> {
        if order.len() != self.series.len() || order.frozen() != self.spec.order() {
            return Err(Error::Shape("order incompatible with evaluator".into()));
        }
        self.order = order;
        for t in self.spec.order()..self.series.len() {
            self.refresh(t);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::MonomialTerm;
    use proptest::prelude::*;

    fn ar1() -> DependenceSpec {
        DependenceSpec::ar(1).unwrap()
    }

    fn series(v: &[f64]) -> TimeSeries {
        TimeSeries::univariate(v.to_vec()).unwrap()
    }

    #[test]
    fn two_window_sum() {
        assert_eq!(total_statistic(&ar1(), &series(&[1.0, 2.0, 3.0])).unwrap(), vec![8.0]);
    }

    #[test]
    fn zero_series_has_zero_statistic() {
        let spec = DependenceSpec::ar(3).unwrap();
        assert_eq!(total_statistic(&spec, &series(&[0.0; 7])).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn two_lag_statistic() {
        let spec = DependenceSpec::parse("0:0*1:0\n0:0*2:0").unwrap();
        // order 2: only the windows ending at the third and fourth values count
        let h = total_statistic(&spec, &series(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(h, vec![6.0 + 12.0, 3.0 + 8.0]);
    }

    #[test]
    fn two_lag_statistic_with_order_one_sum() {
        let spec = DependenceSpec::parse("order=1\n0:0*1:0").unwrap();
        assert_eq!(total_statistic(&spec, &series(&[1.0, 2.0, 3.0, 4.0])).unwrap(), vec![20.0]);
    }

    #[test]
    fn short_series_is_rejected() {
        let spec = DependenceSpec::ar(2).unwrap();
        assert!(matches!(
            total_statistic(&spec, &series(&[1.0, 2.0])),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn equal_values_swap_to_zero() {
        let s = series(&[0.3, 1.0, 2.0, 1.0, -0.4]);
        let d = delta_statistic_swap(&ar1(), &s, &Permutation::identity(5, 1), 1, 3).unwrap();
        assert_eq!(d, vec![0.0]);
    }

    #[test]
    fn adjacent_swap_matches_recompute() {
        let s = series(&[1.0, 2.0, 3.0, 4.0]);
        let d = delta_statistic_swap(&ar1(), &s, &Permutation::identity(4, 1), 1, 2).unwrap();
        let swapped = series(&[1.0, 3.0, 2.0, 4.0]);
        let want = total_statistic(&ar1(), &swapped).unwrap()[0] - 20.0;
        assert_eq!(d, vec![want]);
        assert_eq!(want, -3.0);
    }

    #[test]
    fn frozen_positions_cannot_swap() {
        let s = series(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let id = Permutation::identity(5, 1);
        for (a, b) in [(0, 2), (1, 4), (2, 2), (3, 1)] {
            assert!(matches!(
                delta_statistic_swap(&ar1(), &s, &id, a, b),
                Err(Error::BoundaryViolation { .. })
            ));
        }
    }

    #[test]
    fn reversal_invariance_for_lag_one_product() {
        let v = [0.3, -1.2, 2.5, 0.7, -0.1, 1.9];
        let mut r = v;
        r.reverse();
        assert_eq!(
            total_statistic(&ar1(), &series(&v)).unwrap(),
            total_statistic(&ar1(), &series(&r)).unwrap()
        );
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::from_order(vec![0, 2, 1, 3], 1).is_ok());
        assert!(Permutation::from_order(vec![1, 0, 2, 3], 1).is_err());
        assert!(Permutation::from_order(vec![0, 1, 1, 3], 1).is_err());
    }

    fn mixed_spec() -> DependenceSpec {
        let t = |s: &str| s.parse::<MonomialTerm>().unwrap();
        DependenceSpec::new(
            2,
            2,
            vec![t("0:0*1:0"), t("0:1^2*2:0"), t("0:0*0:1*1:1^2"), t("0:1*2:1")],
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn incremental_delta_matches_recompute(
            values in prop::collection::vec(-2.0f64..2.0, 24),
            swaps in prop::collection::vec((0usize..1000, 0usize..1000), 1..12),
        ) {
            let spec = mixed_spec();
            let s = TimeSeries::real(values, 2).unwrap();
            let n = s.len();
            let d = spec.order();
            let mut eval = SwapEvaluator::identity(&spec, &s).unwrap();
            let m = n - 2 * d;
            for (a, b) in swaps {
                let (mut s1, mut s2) = (d + a % m, d + b % m);
                if s1 == s2 { continue; }
                if s1 > s2 { std::mem::swap(&mut s1, &mut s2); }
                let before = eval.total();
                let delta = eval.delta(s1, s2).unwrap();
                let mut next = eval.order().clone();
                next.swap(s1, s2).unwrap();
                let after = total_statistic_ordered(&spec, &s, &next).unwrap();
                for k in 0..spec.k() {
                    prop_assert!((before[k] + delta[k] - after[k]).abs() < 1e-12 * (1.0 + after[k].abs()));
                }
                eval.apply_swap(s1, s2).unwrap();
                let cached = eval.total();
                for k in 0..spec.k() {
                    prop_assert!((cached[k] - after[k]).abs() < 1e-12 * (1.0 + after[k].abs()));
                }
            }
        }
    }
}
