//! Symmetric test functions described by data.
//!
//! Every built-in function depends on `x` only through the block norms
//! `|x_{α_i}|` and the singleton coordinates `x_k`, `k ∈ R`, squared, so it is
//! invariant under rotations inside each block and even in every coordinate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{extremal_function, ExtremalFunction, ExtremalParams};
use crate::quadrature::Integrand;
use crate::sampling::shard_rng;
use crate::symmetry::Symmetry;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Constant { value: f64 },
    /// `exp(Σ_i a_i |x_{α_i}|² + Σ_k b_k x_k²)`.
    Exponential { blocks: Vec<f64>, singles: Vec<f64> },
    /// `1 + Σ_i a_i |x_{α_i}|² + Σ_k b_k x_k²` with nonnegative coefficients.
    Quadratic { blocks: Vec<f64>, singles: Vec<f64> },
    /// Truncated extremal function.
    Extremal { gamma: f64, trunc: f64 },
}

enum Body {
    Constant(f64),
    Exponential(Vec<f64>, Vec<f64>),
    Quadratic(Vec<f64>, Vec<f64>),
    Extremal(ExtremalFunction),
}

/// A [`FunctionSpec`] bound to a symmetry.
pub struct SymmetricFunction {
    sym: Symmetry,
    blocks: Vec<Vec<usize>>,
    singles: Vec<usize>,
    body: Body,
}

impl SymmetricFunction {
    pub fn new(spec: &FunctionSpec, sym: &Symmetry) -> Result<Self> {
        let blocks: Vec<Vec<usize>> = sym.alphas().iter().map(|a| a.positions().collect()).collect();
        let singles: Vec<usize> = sym.r_mask().positions().collect();
        let check = |a: &[f64], b: &[f64], nonneg: bool| -> Result<()> {
            if a.len() != blocks.len() || b.len() != singles.len() {
                return Err(Error::InvalidParameter(format!(
                    "expected {} block and {} single coefficients, got {} and {}",
                    blocks.len(),
                    singles.len(),
                    a.len(),
                    b.len()
                )));
            }
            if a.iter().chain(b).any(|v| !v.is_finite() || (nonneg && *v < 0.0)) {
                return Err(Error::InvalidParameter("coefficients must be finite and, here, nonnegative".into()));
            }
            Ok(())
        };
        let body = match spec {
            FunctionSpec::Constant { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(Error::InvalidParameter(format!("constant {value} must be finite and >= 0")));
                }
                Body::Constant(*value)
            }
            FunctionSpec::Exponential { blocks: a, singles: b } => {
                check(a, b, false)?;
                Body::Exponential(a.clone(), b.clone())
            }
            FunctionSpec::Quadratic { blocks: a, singles: b } => {
                check(a, b, true)?;
                Body::Quadratic(a.clone(), b.clone())
            }
            FunctionSpec::Extremal { gamma, trunc } => {
                Body::Extremal(extremal_function(sym, ExtremalParams::new(*gamma, *trunc)?)?)
            }
        };
        Ok(Self { sym: sym.clone(), blocks, singles, body })
    }

    fn quadratic_form(&self, a: &[f64], b: &[f64], x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (block, &c) in self.blocks.iter().zip(a) {
            s += c * block.iter().map(|&i| x[i] * x[i]).sum::<f64>();
        }
        for (&k, &c) in self.singles.iter().zip(b) {
            s += c * x[k] * x[k];
        }
        s
    }
}

impl Integrand for SymmetricFunction {
    fn dim(&self) -> usize {
        self.sym.n()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match &self.body {
            Body::Constant(v) => *v,
            Body::Exponential(a, b) => self.quadratic_form(a, b, x).exp(),
            Body::Quadratic(a, b) => 1.0 + self.quadratic_form(a, b, x),
            Body::Extremal(f) => f.eval(x),
        }
    }

    fn symmetry(&self) -> Option<&Symmetry> {
        Some(&self.sym)
    }
}

/// Bounded exponential functions with coefficients uniform in `[−2, 2]`,
/// one per symmetry, reproducible from `seed`.
pub fn random_bounded_family(fams: &[Symmetry], seed: u64) -> Vec<FunctionSpec> {
    let mut rng = shard_rng(seed, 0);
    fams.iter()
        .map(|s| FunctionSpec::Exponential {
            blocks: (0..s.blocks()).map(|_| rng.random_range(-2.0..=2.0)).collect(),
            singles: (0..s.r_mask().weight()).map(|_| rng.random_range(-2.0..=2.0)).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_index::MultiIndex;

    fn sym() -> Symmetry {
        Symmetry::new(vec![MultiIndex::from_positions(4, [0, 1]).unwrap()]).unwrap()
    }

    #[test]
    fn evaluates_specs() {
        let s = sym();
        let x = [0.5, 0.5, 0.5, 0.5];
        let q = FunctionSpec::Quadratic { blocks: vec![2.0], singles: vec![1.0, 0.0] };
        assert!((SymmetricFunction::new(&q, &s).unwrap().eval(&x) - 2.25).abs() < 1e-12);
        let e = FunctionSpec::Exponential { blocks: vec![-1.0], singles: vec![0.0, 2.0] };
        assert!((SymmetricFunction::new(&e, &s).unwrap().eval(&x) - 0.0f64.exp()).abs() < 1e-12);
        let c = FunctionSpec::Constant { value: 3.0 };
        assert_eq!(SymmetricFunction::new(&c, &s).unwrap().eval(&x), 3.0);
    }

    #[test]
    fn rejects_bad_specs() {
        let s = sym();
        let short = FunctionSpec::Quadratic { blocks: vec![1.0], singles: vec![1.0] };
        assert!(SymmetricFunction::new(&short, &s).is_err());
        let neg = FunctionSpec::Quadratic { blocks: vec![-1.0], singles: vec![0.0, 0.0] };
        assert!(SymmetricFunction::new(&neg, &s).is_err());
        assert!(SymmetricFunction::new(&FunctionSpec::Constant { value: -1.0 }, &s).is_err());
    }

    #[test]
    fn spec_json() {
        let spec: FunctionSpec = serde_json::from_str(r#"{"kind":"extremal","gamma":0.25,"trunc":0.01}"#).unwrap();
        assert_eq!(spec, FunctionSpec::Extremal { gamma: 0.25, trunc: 0.01 });
        let back = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<FunctionSpec>(&back).unwrap(), spec);
    }

    #[test]
    fn random_family_is_reproducible() {
        let fams = vec![sym(), sym()];
        assert_eq!(random_bounded_family(&fams, 5), random_bounded_family(&fams, 5));
        assert_ne!(random_bounded_family(&fams, 5), random_bounded_family(&fams, 6));
    }
}
