//! Flat `key=value` text format for model parameters.
//!
//! ```text
//! # AR(2)
//! phi.1=0.5
//! phi.2=0.3
//! sigma2=0.5
//! ```
//!
//! Keys are `phi.i`/`sigma2` (classical AR), `theta.i`/`tau2` (minimum
//! information AR), `A.k.i.j`/`Sigma.i.j` (classical VAR) and
//! `Theta.i.j`/`B.i.j` (minimum information VAR(1)). Indices are 1-based.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::{
    mininfo_to_ar, mininfo_to_var1, ClassicalArParams, ClassicalVarParams, MinInfoArParams, MinInfoVarParams,
};

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Ar(ClassicalArParams),
    MinInfoAr(MinInfoArParams),
    Var(ClassicalVarParams),
    MinInfoVar(MinInfoVarParams),
}

impl ModelParams {
    /// Dimension of each observation.
    pub fn dim(&self) -> usize {
        match self {
            Self::Ar(_) | Self::MinInfoAr(_) => 1,
            Self::Var(v) => v.dim(),
            Self::MinInfoVar(v) => v.b().nrows(),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Self::Ar(a) => a.order(),
            Self::MinInfoAr(a) => a.order(),
            Self::Var(v) => v.order(),
            Self::MinInfoVar(_) => 1,
        }
    }

    /// Converts minimum-information parameters to classical ones.
    pub fn to_classical(&self) -> Result<Self> {
        Ok(match self {
            Self::MinInfoAr(m) => Self::Ar(mininfo_to_ar(m)?),
            Self::MinInfoVar(m) => Self::Var(mininfo_to_var1(m)?),
            other => other.clone(),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<String, f64> = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value, got {line:?}", no + 1)))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad number {:?}", no + 1, value.trim())))?;
            if kv.insert(key.trim().to_string(), value).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key {}", no + 1, key.trim())));
            }
        }
        let families: Vec<&str> = ["phi", "sigma2", "theta", "tau2", "A", "Sigma", "Theta", "B"]
            .into_iter()
            .filter(|f| kv.keys().any(|k| k == f || k.starts_with(&format!("{f}."))))
            .collect();
        match families.as_slice() {
            ["phi", "sigma2"] => {
                let phi = vector(&kv, "phi")?;
                Ok(Self::Ar(ClassicalArParams::new(phi, kv["sigma2"])?))
            }
            ["theta", "tau2"] => {
                let theta = vector(&kv, "theta")?;
                Ok(Self::MinInfoAr(MinInfoArParams::new(theta, kv["tau2"])?))
            }
            ["A", "Sigma"] => {
                let sigma = matrix(&kv, "Sigma")?;
                let p = sigma.nrows();
                let mut blocks = Vec::new();
                for k in 1.. {
                    let prefix = format!("A.{k}");
                    let sub: BTreeMap<String, f64> = kv
                        .iter()
                        .filter_map(|(key, v)| key.strip_prefix(&format!("{prefix}.")).map(|rest| (format!("A.{rest}"), *v)))
                        .collect();
                    if sub.is_empty() {
                        break;
                    }
                    blocks.push(matrix_sized(&sub, "A", p)?);
                }
                let used: usize = blocks.len() * p * p + p * p;
                if used != kv.len() {
                    return Err(Error::Parse("unexpected or non-contiguous A.k.i.j keys".into()));
                }
                Ok(Self::Var(ClassicalVarParams::new(blocks, sigma)?))
            }
            ["Theta", "B"] => {
                let b = matrix(&kv, "B")?;
                let theta = matrix_sized(&kv, "Theta", b.nrows())?;
                Ok(Self::MinInfoVar(MinInfoVarParams::new(theta, b)?))
            }
            _ => Err(Error::Parse(format!(
                "unrecognised key set {:?}; expected phi+sigma2, theta+tau2, A+Sigma or Theta+B",
                kv.keys().collect::<Vec<_>>()
            ))),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

fn index_of(key: &str, prefix: &str) -> Option<Vec<usize>> {
    key.strip_prefix(prefix)?.strip_prefix('.')?.split('.').map(|s| s.parse().ok()).collect()
}

fn vector(kv: &BTreeMap<String, f64>, name: &str) -> Result<Vec<f64>> {
    let mut entries: Vec<(usize, f64)> = Vec::new();
    for (k, v) in kv {
        if let Some(idx) = index_of(k, name) {
            match idx.as_slice() {
                [i] if *i >= 1 => entries.push((*i, *v)),
                _ => return Err(Error::Parse(format!("bad key {k}"))),
            }
        }
    }
    entries.sort_by_key(|e| e.0);
    if entries.is_empty() || entries.iter().enumerate().any(|(pos, (i, _))| *i != pos + 1) {
        return Err(Error::Parse(format!("{name}.i keys must be 1..d without gaps")));
    }
    Ok(entries.into_iter().map(|e| e.1).collect())
}

fn matrix(kv: &BTreeMap<String, f64>, name: &str) -> Result<DMatrix<f64>> {
    let count = kv.keys().filter(|k| index_of(k, name).is_some()).count();
    let p = (count as f64).sqrt().round() as usize;
    if p == 0 || p * p != count {
        return Err(Error::Parse(format!("{name} needs p² entries, found {count}")));
    }
    matrix_sized(kv, name, p)
}

fn matrix_sized(kv: &BTreeMap<String, f64>, name: &str, p: usize) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::from_element(p, p, f64::NAN);
    let mut count = 0;
    for (k, v) in kv {
        if let Some(idx) = index_of(k, name) {
            match idx.as_slice() {
                [i, j] if (1..=p).contains(i) && (1..=p).contains(j) => {
                    m[(i - 1, j - 1)] = *v;
                    count += 1;
                }
                _ => return Err(Error::Parse(format!("bad key {k} for a {p}×{p} matrix"))),
            }
        }
    }
    if count != p * p {
        return Err(Error::Parse(format!("{name} needs {} entries, found {count}", p * p)));
    }
    Ok(m)
}

fn write_matrix(out: &mut String, prefix: &str, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let _ = writeln!(out, "{prefix}.{}.{}={:?}", i + 1, j + 1, m[(i, j)]);
        }
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        match self {
            Self::Ar(a) => {
                for (i, v) in a.phi().iter().enumerate() {
                    let _ = writeln!(out, "phi.{}={v:?}", i + 1);
                }
                let _ = writeln!(out, "sigma2={:?}", a.sigma2());
            }
            Self::MinInfoAr(a) => {
                for (i, v) in a.theta().iter().enumerate() {
                    let _ = writeln!(out, "theta.{}={v:?}", i + 1);
                }
                let _ = writeln!(out, "tau2={:?}", a.tau2());
            }
            Self::Var(v) => {
                for (k, a) in v.a().iter().enumerate() {
                    write_matrix(&mut out, &format!("A.{}", k + 1), a);
                }
                write_matrix(&mut out, "Sigma", v.sigma());
            }
            Self::MinInfoVar(v) => {
                write_matrix(&mut out, "Theta", v.theta());
                write_matrix(&mut out, "B", v.b());
            }
        }
        f.write_str(&out)
    }
}

impl FromStr for ModelParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ar_round_trip() {
        let text = "# AR(2)\nphi.1=0.5\nphi.2=0.3\nsigma2=0.5\n";
        let p: ModelParams = text.parse().unwrap();
        assert!(matches!(&p, ModelParams::Ar(a) if a.phi() == [0.5, 0.3] && a.sigma2() == 0.5));
        assert_eq!(p.to_string(), "phi.1=0.5\nphi.2=0.3\nsigma2=0.5\n");
    }

    #[test]
    fn var_round_trip() {
        let text = "A.1.1.1=0.5\nA.1.1.2=0.1\nA.1.2.1=0.1\nA.1.2.2=0.5\nSigma.1.1=0.5\nSigma.1.2=0\nSigma.2.1=0\nSigma.2.2=0.5\n";
        let p = ModelParams::parse(text).unwrap();
        let ModelParams::Var(v) = &p else { panic!() };
        assert_eq!(v.a()[0][(0, 1)], 0.1);
        assert_eq!(ModelParams::parse(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn mininfo_converts_to_classical() {
        let p = ModelParams::parse("theta.1=1\ntau2=0.6666666666666666\n").unwrap();
        let ModelParams::Ar(c) = p.to_classical().unwrap() else { panic!() };
        assert!((c.phi()[0] - 0.5).abs() < 1e-12);
        assert!((c.sigma2() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mininfo_var_parses() {
        let p = ModelParams::parse("Theta.1.1=1\nTheta.1.2=0.2\nTheta.2.1=0.2\nTheta.2.2=1\nB.1.1=1\nB.1.2=0\nB.2.1=0\nB.2.2=1\n").unwrap();
        assert_eq!(p.dim(), 2);
        assert!(matches!(p.to_classical().unwrap(), ModelParams::Var(_)));
    }

    #[test]
    fn rejects_mixed_or_gappy_keys() {
        assert!(ModelParams::parse("phi.1=0.5\ntau2=1\n").is_err());
        assert!(ModelParams::parse("phi.2=0.5\nsigma2=1\n").is_err());
        assert!(ModelParams::parse("phi.1=0.5\nphi.1=0.4\nsigma2=1\n").is_err());
        assert!(ModelParams::parse("phi.1=1.5\nsigma2=1\n").is_err());
    }
}
