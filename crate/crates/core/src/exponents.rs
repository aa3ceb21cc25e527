//! Exponent and counting formulas, in exact integer and rational arithmetic.
//!
//! For a family of symmetries `A^1, …, A^m`, every field `L_{i,j}` gets an
//! occurrence count `c(e) = #{J : e ∉ A^J}`. The uniform exponent is the
//! largest count and the per-function exponent of `J` is the largest count
//! over the fields missing from `A^J`. For balanced families (all block
//! assignments of a fixed length profile) these counts have closed forms.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::multi_index::{check_dimension, MAX_DIM};
use crate::numbers::{factorial, multinomial, to_rational, Count, Ratio};
use crate::symmetry::Symmetry;

/// Length profile `(α̃_1, …, α̃_N)` of a balanced family together with the
/// number `R̃ = n − Σ α̃_i` of single-variable coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BalancedType {
    n: usize,
    lengths: Vec<usize>,
    r_tilde: usize,
}

impl BalancedType {
    pub fn new(n: usize, lengths: Vec<usize>) -> Result<Self> {
        check_dimension(n)?;
        let bad = |msg: String| Err(Error::InvalidBalancedType(msg));
        if lengths.is_empty() {
            return bad("at least one block length is required".into());
        }
        if let Some(l) = lengths.iter().find(|&&l| l < 2) {
            return bad(format!("block length {l} is below 2"));
        }
        if lengths.windows(2).any(|w| w[0] < w[1]) {
            return bad(format!("lengths {lengths:?} must be weakly decreasing"));
        }
        let total: usize = lengths.iter().sum();
        if total > n {
            return bad(format!("lengths sum to {total} > n = {n}"));
        }
        if lengths[0] > n - 1 {
            return bad(format!("leading length {} must be at most n-1 = {}", lengths[0], n - 1));
        }
        Ok(Self { n, r_tilde: n - total, lengths })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn r_tilde(&self) -> usize {
        self.r_tilde
    }

    /// Every valid type in dimension `n`, in lexicographically decreasing
    /// order of the length vector.
    pub fn all_for_dimension(n: usize) -> Result<Vec<BalancedType>> {
        check_dimension(n)?;
        fn rec(remaining: usize, max_part: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if !cur.is_empty() {
                out.push(cur.clone());
            }
            for part in (2..=max_part.min(remaining)).rev() {
                cur.push(part);
                rec(remaining - part, part, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, n - 1, &mut Vec::new(), &mut out);
        out.sort_by(|a, b| b.cmp(a));
        out.into_iter().map(|l| BalancedType::new(n, l)).collect()
    }

    /// Parts `(α̃_1, …, α̃_N, R̃)` of the multinomial `J_max`.
    pub(crate) fn parts(&self) -> Vec<i64> {
        self.lengths
            .iter()
            .map(|&l| l as i64)
            .chain(std::iter::once(self.r_tilde as i64))
            .collect()
    }

    pub(crate) fn parts_with(&self, slot: usize, delta: i64) -> Vec<i64> {
        let mut p = self.parts();
        p[slot] += delta;
        p
    }

    /// A printable label such as `n=4:(2,2)`.
    pub fn label(&self) -> String {
        let l: Vec<String> = self.lengths.iter().map(usize::to_string).collect();
        format!("n={}:({})", self.n, l.join(","))
    }
}

impl std::fmt::Debug for BalancedType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for BalancedType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            n: usize,
            lengths: Vec<usize>,
            r_tilde: Option<usize>,
        }
        let r = Repr::deserialize(d)?;
        let t = BalancedType::new(r.n, r.lengths).map_err(D::Error::custom)?;
        match r.r_tilde {
            Some(v) if v != t.r_tilde => {
                Err(D::Error::custom(format!("r_tilde must be {} for these lengths", t.r_tilde)))
            }
            _ => Ok(t),
        }
    }
}

/// `J_max = n! / (α̃_1! ⋯ α̃_N! R̃!)`, the number of ordered block assignments.
pub fn j_max(t: &BalancedType) -> BigUint {
    multinomial(t.n as i64, &t.parts())
}

/// Number of ordered block assignments whose edge set contains a fixed field:
/// `Σ_i (n−2; α̃_1, …, α̃_i − 2, …, α̃_N, R̃)`.
pub fn edge_membership_count(t: &BalancedType) -> BigUint {
    (0..t.lengths.len())
        .map(|i| multinomial(t.n as i64 - 2, &t.parts_with(i, -2)))
        .sum()
}

/// Closed-form sharp exponent
/// `(n−2)! (n(n−1) − Σ α̃_i(α̃_i−1)) / (α̃_1! ⋯ α̃_N! R̃!)`.
pub fn balanced_exponent(t: &BalancedType) -> Result<BigUint> {
    let n = t.n as u64;
    let inner: u64 = n * (n - 1) - t.lengths.iter().map(|&l| (l * (l - 1)) as u64).sum::<u64>();
    let num = factorial(t.n - 2) * inner;
    let den = t.parts().iter().fold(BigUint::one(), |acc, &p| acc * factorial(p as usize));
    let (q, r) = num.div_rem(&den);
    if !r.is_zero() {
        return Err(Error::Internal(format!("exponent for {t:?} is not an integer")));
    }
    Ok(q)
}

/// `Π_j (multiplicity of length j)!`: the number of orderings of equal-length
/// blocks that describe the same symmetry.
pub fn overcount_factor(t: &BalancedType) -> BigUint {
    multiplicity_factor(&t.lengths)
}

fn multiplicity_factor(lengths: &[usize]) -> BigUint {
    let mut mult: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in lengths {
        *mult.entry(l).or_default() += 1;
    }
    mult.values().fold(BigUint::one(), |acc, &m| acc * factorial(m))
}

/// `δ̃ = n − p̃^{-1} (n − α̃_1) J_max`.
pub fn balanced_local_delta(t: &BalancedType) -> Result<Ratio> {
    let p = balanced_exponent(t)?;
    let loss = to_rational(&j_max(t)) * BigInt::from(t.n - t.lengths[0]) / to_rational(&p);
    let delta = BigRational::from_integer(BigInt::from(t.n)) - loss;
    if !delta.is_positive() {
        return Err(Error::NonPositiveDelta(Ratio(delta).to_string()));
    }
    Ok(Ratio(delta))
}

/// Both sides of `Σ_i (n−1; …, α̃_i − 1, …, R̃) + (R̃/n) J_max = J_max`.
pub fn partition_identity_sides(t: &BalancedType) -> (BigRational, BigRational) {
    let jm = to_rational(&j_max(t));
    let blocks: BigUint = (0..t.lengths.len())
        .map(|i| multinomial(t.n as i64 - 1, &t.parts_with(i, -1)))
        .sum();
    let singles = jm.clone() * BigInt::from(t.r_tilde) / BigInt::from(t.n);
    (to_rational(&blocks) + singles, jm)
}

/// `(n−2)!/(Π α̃_i! R̃!) · [Σ_i (n−α̃_i) α̃_i + (n−1) R̃]`, the value of
/// `1/γ` at the divergence threshold of the extremal family.
pub fn critical_exponent_closed_form(t: &BalancedType) -> BigRational {
    let n = t.n as i64;
    let bracket: i64 = t.lengths.iter().map(|&l| (n - l as i64) * l as i64).sum::<i64>()
        + (n - 1) * t.r_tilde as i64;
    let den = t.parts().iter().fold(BigUint::one(), |acc, &p| acc * factorial(p as usize));
    to_rational(&factorial(t.n - 2)) * BigInt::from(bracket) / to_rational(&den)
}

/// Outcome of the exact counting identities for one balanced type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub label: String,
    pub exponent: Count,
    pub j_max: Count,
    pub edge_count: Count,
    /// `p̃ = J_max − edge_membership_count`.
    pub counting: bool,
    /// Block and single-variable counts of functions depending on a fixed
    /// coordinate add up to `J_max`.
    pub partition: bool,
    /// `1/γ_critical` from the radial lower bound equals `p̃`.
    pub critical_gamma: bool,
    /// The closed bracket form of `1/γ_critical` equals `p̃`.
    pub critical_closed_form: bool,
}

impl IdentityCheck {
    pub fn all_pass(&self) -> bool {
        self.counting && self.partition && self.critical_gamma && self.critical_closed_form
    }
}

pub fn check_identities(t: &BalancedType) -> Result<IdentityCheck> {
    let p = balanced_exponent(t)?;
    let jm = j_max(t);
    let ec = edge_membership_count(t);
    let (lhs, rhs) = partition_identity_sides(t);
    let p_rat = to_rational(&p);
    let gamma = crate::extremal::critical_gamma(t)?;
    Ok(IdentityCheck {
        label: t.label(),
        counting: jm >= ec && &jm - &ec == p,
        partition: lhs == rhs,
        critical_gamma: gamma.0.recip() == p_rat,
        critical_closed_form: critical_exponent_closed_form(t) == p_rat,
        exponent: Count(p),
        j_max: Count(jm),
        edge_count: Count(ec),
    })
}

/// Runs [`check_identities`] for every balanced type with `3 <= n <= max_n`.
pub fn identity_sweep(max_n: usize) -> Result<Vec<IdentityCheck>> {
    if !(3..=MAX_DIM).contains(&max_n) {
        return Err(Error::InvalidDimension(max_n));
    }
    let mut out = Vec::new();
    for n in 3..=max_n {
        for t in BalancedType::all_for_dimension(n)? {
            out.push(check_identities(&t)?);
        }
    }
    Ok(out)
}

fn check_family(fams: &[Symmetry]) -> Result<usize> {
    let n = fams.first().ok_or(Error::EmptyFamily)?.n();
    if let Some(bad) = fams.iter().find(|s| s.n() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.n() });
    }
    Ok(n)
}

/// `c(e)` for every pair `a < b`, indexed as `counts[a][b]`.
fn complement_counts(fams: &[Symmetry], n: usize) -> Vec<Vec<usize>> {
    let mut counts = vec![vec![0usize; n]; n];
    for s in fams {
        for (a, row) in counts.iter_mut().enumerate() {
            for (b, c) in row.iter_mut().enumerate().skip(a + 1) {
                if !s.contains_edge(a, b) {
                    *c += 1;
                }
            }
        }
    }
    counts
}

/// Occurrences of the most recurrent field among the complements `(A^J)^c`.
pub fn uniform_exponent(fams: &[Symmetry]) -> Result<usize> {
    let n = check_family(fams)?;
    let counts = complement_counts(fams, n);
    let best = counts.iter().flatten().copied().max().unwrap_or(0);
    if best == 0 {
        return Err(Error::DegenerateFamily(
            "every field lies in every symmetry set, so all functions are constant".into(),
        ));
    }
    Ok(best)
}

/// For each `J`, the largest `c(e)` over fields `e ∉ A^J`.
pub fn per_function_exponents(fams: &[Symmetry]) -> Result<Vec<usize>> {
    let n = check_family(fams)?;
    let counts = complement_counts(fams, n);
    fams.iter()
        .enumerate()
        .map(|(j, s)| {
            let mut best = 0;
            for (a, row) in counts.iter().enumerate() {
                for (b, &c) in row.iter().enumerate().skip(a + 1) {
                    if !s.contains_edge(a, b) {
                        best = best.max(c);
                    }
                }
            }
            if best == 0 {
                Err(Error::DegenerateFamily(format!(
                    "symmetry {} contains every field, so its function is constant",
                    j + 1
                )))
            } else {
                Ok(best)
            }
        })
        .collect()
}

/// `δ̃ = n − Σ_J p_J^{-1} (n − |α_1^J|)`.
pub fn local_delta(fams: &[Symmetry], exps: &[usize]) -> Result<Ratio> {
    let n = check_family(fams)?;
    if fams.len() != exps.len() {
        return Err(Error::InvalidParameter(format!(
            "{} symmetries but {} exponents",
            fams.len(),
            exps.len()
        )));
    }
    let mut delta = BigRational::from_integer(BigInt::from(n));
    for (s, &p) in fams.iter().zip(exps) {
        if p == 0 {
            return Err(Error::InvalidParameter("exponents must be positive".into()));
        }
        let d = (n - s.alphas()[0].weight()) as i64;
        delta -= BigRational::new(BigInt::from(d), BigInt::from(p));
    }
    if !delta.is_positive() {
        return Err(Error::NonPositiveDelta(Ratio(delta).to_string()));
    }
    Ok(Ratio(delta))
}

/// Exponents and counts for one inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    /// `p̃`.
    pub p_uniform: Count,
    /// `p̃_J`, one per function; a single entry when `per_function_collapsed`.
    pub p_per_function: Vec<Count>,
    /// Set for balanced types, where every `p̃_J` equals `p̃`.
    #[serde(default)]
    pub per_function_collapsed: bool,
    /// Number of functions `m` (equals `J_max` for balanced families).
    pub j_count: Count,
    /// `δ̃` of the localized Euclidean inequality.
    pub delta: Ratio,
    /// Orderings of equal-length blocks counted separately in `j_count`;
    /// present when all symmetries share one length profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overcount: Option<Count>,
}

impl ExponentReport {
    pub fn for_balanced(t: &BalancedType) -> Result<Self> {
        let p = Count(balanced_exponent(t)?);
        Ok(Self {
            p_per_function: vec![p.clone()],
            p_uniform: p,
            per_function_collapsed: true,
            j_count: Count(j_max(t)),
            delta: balanced_local_delta(t)?,
            overcount: Some(Count(overcount_factor(t))),
        })
    }

    pub fn for_family(fams: &[Symmetry]) -> Result<Self> {
        let p = uniform_exponent(fams)?;
        let per = per_function_exponents(fams)?;
        let delta = local_delta(fams, &per)?;
        let first = fams[0].lengths();
        let overcount = fams
            .iter()
            .all(|s| s.lengths() == first)
            .then(|| Count(multiplicity_factor(&first)));
        Ok(Self {
            p_uniform: Count::from(p),
            p_per_function: per.into_iter().map(Count::from).collect(),
            per_function_collapsed: false,
            j_count: Count::from(fams.len()),
            delta,
            overcount,
        })
    }
}
