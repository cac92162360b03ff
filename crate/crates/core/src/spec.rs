//! Dependence functions built from monomials of lagged state components.
//!
//! A [`DependenceSpec`] maps a window `(x_t, x_{t-1}, …, x_{t-d})` to `K`
//! reals; entry `k` is the product of `x_{t-lag, component}^exponent` over
//! the factors of term `k`.
//!
//! The text form has one term per line, factors written `lag:component^exponent`
//! and joined by `*`, so `0:0^1*1:0^1` is `x_t x_{t-1}`. Optional `order=` and
//! `dim=` lines fix `d` and `p` when they exceed what the terms mention; `#`
//! starts a comment.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub lag: usize,
    pub component: usize,
    pub exponent: u32,
}

impl Factor {
    pub fn new(lag: usize, component: usize, exponent: u32) -> Self {
        Self { lag, component, exponent }
    }
}

/// Product of factors, kept sorted by `(lag, component)` with merged exponents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonomialTerm {
    factors: Vec<Factor>,
}

impl MonomialTerm {
    pub fn new(factors: impl IntoIterator<Item = Factor>) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for f in factors {
            if f.exponent == 0 {
                return Err(Error::InvalidSpec(format!(
                    "factor {}:{} has exponent 0",
                    f.lag, f.component
                )));
            }
            *merged.entry((f.lag, f.component)).or_insert(0) += f.exponent;
        }
        if merged.is_empty() {
            return Err(Error::InvalidSpec("term without factors".into()));
        }
        let factors = merged
            .into_iter()
            .map(|((lag, component), exponent)| Factor { lag, component, exponent })
            .collect();
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn max_lag(&self) -> usize {
        self.factors.iter().map(|f| f.lag).max().unwrap_or(0)
    }

    pub fn has_current(&self) -> bool {
        self.factors.iter().any(|f| f.lag == 0)
    }

    /// Value on a window whose row `i` is `x_{t-i}` (row-major, width `p`).
    #[inline]
    pub fn eval(&self, window: &[f64], p: usize) -> f64 {
        self.factors
            .iter()
            .map(|f| window[f.lag * p + f.component].powi(f.exponent as i32))
            .product()
    }
}

impl fmt::Display for MonomialTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, fac) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "{}:{}^{}", fac.lag, fac.component, fac.exponent)?;
        }
        Ok(())
    }
}

impl FromStr for MonomialTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_usize = |v: &str, what: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad {what} `{v}` in term `{s}`")))
        };
        let mut factors = Vec::new();
        for part in s.split('*') {
            let part = part.trim();
            let (loc, exp) = match part.split_once('^') {
                Some((loc, exp)) => (loc, parse_usize(exp, "exponent")?),
                None => (part, 1),
            };
            let (lag, comp) = loc
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("factor `{part}` is not lag:component^exp")))?;
            let exponent = u32::try_from(exp)
                .map_err(|_| Error::Parse(format!("exponent too large in `{part}`")))?;
            factors.push(Factor::new(parse_usize(lag, "lag")?, parse_usize(comp, "component")?, exponent));
        }
        MonomialTerm::new(factors)
    }
}

/// The dependence function `h : X^{d+1} → R^K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DependenceSpec {
    order: usize,
    dim: usize,
    terms: Vec<MonomialTerm>,
}

impl DependenceSpec {
    pub fn new(order: usize, dim: usize, terms: Vec<MonomialTerm>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidSpec("order must be at least 1".into()));
        }
        if dim == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        if terms.is_empty() {
            return Err(Error::InvalidSpec("at least one term is required".into()));
        }
        for t in &terms {
            for f in t.factors() {
                if f.lag > order {
                    return Err(Error::InvalidSpec(format!("term `{t}` uses lag {} > order {order}", f.lag)));
                }
                if f.component >= dim {
                    return Err(Error::InvalidSpec(format!(
                        "term `{t}` uses component {} >= dim {dim}",
                        f.component
                    )));
                }
            }
            if !t.has_current() {
                return Err(Error::InvalidSpec(format!(
                    "term `{t}` has no lag-0 factor and only shifts the conditional model by a constant"
                )));
            }
        }
        Ok(Self { order, dim, terms })
    }

    /// `x_t x_{t-i}` for `i = 1..=d`, the univariate AR(d) dependence.
    pub fn ar(d: usize) -> Result<Self> {
        let terms = (1..=d)
            .map(|i| MonomialTerm::new([Factor::new(0, 0, 1), Factor::new(i, 0, 1)]))
            .collect::<Result<_>>()?;
        Self::new(d, 1, terms)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of terms `K`.
    pub fn k(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[MonomialTerm] {
        &self.terms
    }

    /// Evaluates `h` on a `(d+1) × p` row-major window whose row `i` is `x_{t-i}`.
    pub fn eval(&self, window: &[f64]) -> Result<Vec<f64>> {
        let expected = (self.order + 1) * self.dim;
        if window.len() != expected {
            return Err(Error::Shape(format!(
                "window has {} values, spec needs {} = ({} + 1) × {}",
                window.len(),
                expected,
                self.order,
                self.dim
            )));
        }
        Ok(self.terms.iter().map(|t| t.eval(window, self.dim)).collect())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut order = None;
        let mut dim = None;
        let mut terms = Vec::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                let v: usize = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad value in `{line}`")))?;
                match key.trim() {
                    "order" => order = Some(v),
                    "dim" => dim = Some(v),
                    other => return Err(Error::Parse(format!("unknown directive `{other}`"))),
                }
                continue;
            }
            terms.push(line.parse::<MonomialTerm>()?);
        }
        let max_lag = terms.iter().map(MonomialTerm::max_lag).max().unwrap_or(0);
        let max_comp = terms
            .iter()
            .flat_map(|t| t.factors().iter().map(|f| f.component))
            .max()
            .unwrap_or(0);
        Self::new(order.unwrap_or(max_lag.max(1)), dim.unwrap_or(max_comp + 1), terms)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

impl fmt::Display for DependenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "order={}", self.order)?;
        writeln!(f, "dim={}", self.dim)?;
        for t in &self.terms {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for DependenceSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Kronecker dependence `(x_t)^{a} ⊗ (x_{t-lag})^{b}` for each `(lag, a, b)`.
///
/// Each block contributes `p²` terms; term `i·p + j` is
/// `x_{t,i}^a x_{t-lag,j}^b`, so the coefficient block equals `vec(Θ)` when
/// `Θ` is stored column-major (coefficient of term `i·p + j` is `Θ_{j,i}`).
pub fn kron_spec(p: usize, lags: &[(usize, u32, u32)]) -> Result<DependenceSpec> {
    if p == 0 {
        return Err(Error::InvalidSpec("dimension must be at least 1".into()));
    }
    if lags.is_empty() {
        return Err(Error::InvalidSpec("no Kronecker blocks requested".into()));
    }
    let mut terms = Vec::with_capacity(lags.len() * p * p);
    let mut order = 1;
    for &(lag, exp_t, exp_lag) in lags {
        if lag == 0 || exp_t == 0 || exp_lag == 0 {
            return Err(Error::InvalidSpec(format!(
                "Kronecker block ({lag}, {exp_t}, {exp_lag}) needs lag, exponents >= 1"
            )));
        }
        order = order.max(lag);
        for i in 0..p {
            for j in 0..p {
                terms.push(MonomialTerm::new([
                    Factor::new(0, i, exp_t),
                    Factor::new(lag, j, exp_lag),
                ])?);
            }
        }
    }
    DependenceSpec::new(order, p, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(s: &str) -> MonomialTerm {
        s.parse().unwrap()
    }

    #[test]
    fn single_product() {
        let spec = DependenceSpec::ar(1).unwrap();
        assert_eq!(spec.eval(&[2.0, 3.0]).unwrap(), vec![6.0]);
    }

    #[test]
    fn zero_annihilates() {
        let spec = DependenceSpec::ar(1).unwrap();
        for x in [-3.5, 0.0, 1e6] {
            assert_eq!(spec.eval(&[x, 0.0]).unwrap(), vec![0.0]);
        }
    }

    #[test]
    fn third_order_products() {
        let spec = DependenceSpec::new(
            2,
            1,
            vec![term("0:0*1:0"), term("0:0*2:0"), term("0:0*1:0*2:0")],
        )
        .unwrap();
        assert_eq!(spec.eval(&[1.0, 2.0, 3.0]).unwrap(), vec![2.0, 3.0, 6.0]);
    }

    #[test]
    fn window_shape_is_checked() {
        let spec = DependenceSpec::ar(2).unwrap();
        assert!(matches!(spec.eval(&[1.0, 2.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn terms_are_canonical() {
        assert_eq!(term("1:0^1*0:0^1"), term("0:0*1:0"));
        assert_eq!(term("0:0*0:0^2*1:0"), term("0:0^3*1:0^1"));
    }

    #[test]
    fn rejects_terms_without_current_state() {
        let err = DependenceSpec::new(2, 1, vec![term("1:0*2:0")]);
        assert!(matches!(err, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn rejects_out_of_range_factors() {
        assert!(DependenceSpec::new(1, 1, vec![term("0:0*2:0")]).is_err());
        assert!(DependenceSpec::new(1, 1, vec![term("0:1*1:0")]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let spec = kron_spec(2, &[(1, 1, 1), (1, 2, 1)]).unwrap();
        let again: DependenceSpec = spec.to_string().parse().unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn parse_infers_order_and_dim() {
        let spec = DependenceSpec::parse("# AR(2)\n0:0^1*1:0^1\n0:0^1*2:0^1\n").unwrap();
        assert_eq!(spec, DependenceSpec::ar(2).unwrap());
    }

    #[test]
    fn scalar_kron_is_ar1() {
        assert_eq!(kron_spec(1, &[(1, 1, 1)]).unwrap(), DependenceSpec::ar(1).unwrap());
    }

    #[test]
    fn bivariate_kron_ordering() {
        let spec = kron_spec(2, &[(1, 1, 1)]).unwrap();
        let names: Vec<String> = spec.terms().iter().map(ToString::to_string).collect();
        assert_eq!(names, ["0:0^1*1:0^1", "0:0^1*1:1^1", "0:1^1*1:0^1", "0:1^1*1:1^1"]);
    }

    #[test]
    fn sixteen_term_mixed_spec() {
        let spec = kron_spec(2, &[(1, 1, 1), (1, 1, 2), (1, 2, 1), (1, 2, 2)]).unwrap();
        assert_eq!(spec.k(), 16);
        assert_eq!(spec.order(), 1);
    }

    #[test]
    fn scaling_a_factor_scales_by_its_power() {
        let spec = DependenceSpec::new(
            1,
            2,
            vec![term("0:0^2*1:1"), term("0:1*1:0"), term("0:0*1:1^3")],
        )
        .unwrap();
        let w = [0.7, -1.3, 2.1, 0.4];
        let base = spec.eval(&w).unwrap();
        let c = 1.7;
        let mut scaled = w;
        scaled[0] *= c; // x_{t,0}
        let got = spec.eval(&scaled).unwrap();
        let powers = [2, 0, 1];
        for k in 0..3 {
            let want = base[k] * c.powi(powers[k]);
            assert!((got[k] - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }
}
