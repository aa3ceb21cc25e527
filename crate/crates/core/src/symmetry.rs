//! Subsets of the rotation fields `L_{i,j}` of `so(n)` and their structure.
//!
//! An [`EdgeSet`] identifies the field `L_{i,j}` with the edge `(i,j)` of the
//! complete graph on `n` vertices. Because `[L_{i,j}, L_{j,k}] = ±L_{i,k}` and
//! fields on disjoint index pairs commute, the basis fields inside the Lie
//! subalgebra generated by a subset are exactly the edges of the cliques
//! spanned by the connected components of the graph. Maximal subsets are
//! disjoint unions of cliques, and their components are the blocks
//! `α_1, …, α_N` of the structure decomposition.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::multi_index::{check_dimension, MultiIndex};

/// A set of rotation fields, stored as 0-based pairs `(i, j)` with `i < j`.
///
/// The JSON form uses 1-based indices: `{"n": 4, "edges": [[1,2],[3,4]]}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    n: usize,
    edges: BTreeSet<(u8, u8)>,
}

impl EdgeSet {
    pub fn empty(n: usize) -> Result<Self> {
        check_dimension(n)?;
        Ok(Self { n, edges: BTreeSet::new() })
    }

    /// All `C(n,2)` fields.
    pub fn complete(n: usize) -> Result<Self> {
        let mut set = Self::empty(n)?;
        for i in 0..n {
            for j in i + 1..n {
                set.edges.insert((i as u8, j as u8));
            }
        }
        Ok(set)
    }

    /// Builds an edge set from 1-based pairs, as written in external input.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut set = Self::empty(n)?;
        for &(i, j) in pairs {
            if i == 0 || i >= j || j > n {
                return Err(Error::InvalidEdge { i, j, n });
            }
            set.edges.insert(((i - 1) as u8, (j - 1) as u8));
        }
        Ok(set)
    }

    /// Builds an edge set from 0-based pairs in either order.
    pub fn from_zero_based(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = Self::empty(n)?;
        for (a, b) in pairs {
            let (i, j) = (a.min(b), a.max(b));
            if i == j || j >= n {
                return Err(Error::InvalidEdge { i: a + 1, j: b + 1, n });
            }
            set.edges.insert((i as u8, j as u8));
        }
        Ok(set)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// 0-based membership test; the pair may be given in either order.
    pub fn contains(&self, a: usize, b: usize) -> bool {
        let (i, j) = (a.min(b), a.max(b));
        self.edges.contains(&(i as u8, j as u8))
    }

    /// 0-based pairs in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(i, j)| (i as usize, j as usize))
    }

    /// 1-based pairs in lexicographic order.
    pub fn to_pairs(&self) -> Vec<(usize, usize)> {
        self.iter().map(|(i, j)| (i + 1, j + 1)).collect()
    }

    pub fn is_superset(&self, other: &EdgeSet) -> bool {
        self.edges.is_superset(&other.edges)
    }

    /// Vertex sets of the connected components with at least two vertices,
    /// each as a bitmask, ordered by smallest vertex.
    fn components(&self) -> Vec<u64> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for (i, j) in self.iter() {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
        let mut masks = vec![0u64; self.n];
        for v in 0..self.n {
            let r = find(&mut parent, v);
            masks[r] |= 1 << v;
        }
        masks.into_iter().filter(|m| m.count_ones() >= 2).collect()
    }

    fn from_cliques(n: usize, blocks: impl IntoIterator<Item = u64>) -> Self {
        let mut edges = BTreeSet::new();
        for mask in blocks {
            let verts: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            for (a, &i) in verts.iter().enumerate() {
                for &j in &verts[a + 1..] {
                    edges.insert((i as u8, j as u8));
                }
            }
        }
        Self { n, edges }
    }

    /// Basis fields of the Lie subalgebra generated by `self`: the union of
    /// cliques on the connected components of the edge graph.
    pub fn lie_closure(&self) -> EdgeSet {
        Self::from_cliques(self.n, self.components())
    }

    /// `A` is maximal when it equals the basis part of the subalgebra it generates.
    pub fn is_maximal(&self) -> bool {
        self.lie_closure() == *self
    }

    /// Structure decomposition of a maximal, nonempty subset.
    pub fn decompose(&self) -> Result<Symmetry> {
        if self.is_empty() {
            return Err(Error::EmptySymmetry);
        }
        let closure = self.lie_closure();
        if closure != *self {
            return Err(Error::NotMaximal { missing: closure.len() - self.len() });
        }
        let mut masks = self.components();
        masks.sort_by_key(|m| (std::cmp::Reverse(m.count_ones()), m.trailing_zeros()));
        let alphas = masks
            .into_iter()
            .map(|m| MultiIndex::from_mask(self.n, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Symmetry::new(alphas)?.canonical())
    }
}

impl fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EdgeSet(n={}, {:?})", self.n, self.to_pairs())
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeSetRepr {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl Serialize for EdgeSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EdgeSetRepr { n: self.n, edges: self.to_pairs().into_iter().map(|(i, j)| [i, j]).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EdgeSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = EdgeSetRepr::deserialize(d)?;
        let pairs: Vec<_> = repr.edges.iter().map(|e| (e[0], e[1])).collect();
        EdgeSet::from_pairs(repr.n, &pairs).map_err(serde::de::Error::custom)
    }
}

/// Structure of a maximal subset: blocks `α_1, …, α_N` and the single-variable
/// mask `R = ᾱ_1 − Σ_{i≥2} α_i`.
///
/// The block order is significant: the function attached to a symmetry
/// depends on `x_{ᾱ_1}`, so two orderings of equal-length blocks give
/// different (though equivalent) functions. [`EdgeSet::decompose`] returns the
/// canonical order; [`crate::enumerate`] emits every ordering.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Symmetry {
    n: usize,
    alphas: Vec<MultiIndex>,
    r_mask: MultiIndex,
}

impl Symmetry {
    /// Validates the block list and computes the `R` mask.
    pub fn new(alphas: Vec<MultiIndex>) -> Result<Self> {
        let first = alphas.first().ok_or(Error::EmptySymmetry)?;
        let n = first.n();
        let mut used = MultiIndex::zeros(n)?;
        let mut prev = usize::MAX;
        for (k, a) in alphas.iter().enumerate() {
            if a.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: a.n() });
            }
            if a.weight() < 2 {
                return Err(Error::InvalidSymmetry(format!("alpha_{} = {a} has length < 2", k + 1)));
            }
            if a.weight() > prev {
                return Err(Error::InvalidSymmetry(format!(
                    "block lengths must be weakly decreasing; alpha_{} is longer than alpha_{k}",
                    k + 1
                )));
            }
            if !a.orthogonal(&used)? {
                return Err(Error::InvalidSymmetry(format!("alpha_{} = {a} overlaps an earlier block", k + 1)));
            }
            prev = a.weight();
            used = used.union(a)?;
        }
        let mut r_mask = first.complement();
        for a in &alphas[1..] {
            r_mask = r_mask.minus(a)?;
        }
        Ok(Self { n, alphas, r_mask })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphas(&self) -> &[MultiIndex] {
        &self.alphas
    }

    /// Number of blocks `N`.
    pub fn blocks(&self) -> usize {
        self.alphas.len()
    }

    pub fn r_mask(&self) -> MultiIndex {
        self.r_mask
    }

    /// Block lengths `(|α_1|, …, |α_N|)`.
    pub fn lengths(&self) -> Vec<usize> {
        self.alphas.iter().map(MultiIndex::weight).collect()
    }

    /// `ᾱ_1`: the coordinates a symmetric function actually depends on.
    pub fn dependence_mask(&self) -> MultiIndex {
        self.alphas[0].complement()
    }

    /// Whether `L_{a,b}` (0-based) lies in the symmetry's edge set.
    pub fn contains_edge(&self, a: usize, b: usize) -> bool {
        self.alphas.iter().any(|al| al.contains(a) && al.contains(b))
    }

    /// Union of the cliques on the blocks.
    pub fn edges(&self) -> EdgeSet {
        EdgeSet::from_cliques(self.n, self.alphas.iter().map(MultiIndex::mask))
    }

    /// Equal-length blocks ordered by smallest contained index.
    pub fn is_canonical(&self) -> bool {
        self.alphas.windows(2).all(|w| {
            w[0].weight() > w[1].weight() || w[0].first() < w[1].first()
        })
    }

    pub fn canonical(&self) -> Symmetry {
        let mut alphas = self.alphas.clone();
        alphas.sort_by(|a, b| b.weight().cmp(&a.weight()).then(a.first().cmp(&b.first())));
        Symmetry::new(alphas).expect("reordering equal-length blocks preserves validity")
    }
}

impl fmt::Debug for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<Vec<usize>> =
            self.alphas.iter().map(|a| a.positions().map(|p| p + 1).collect()).collect();
        let r: Vec<usize> = self.r_mask.positions().map(|p| p + 1).collect();
        write!(f, "Symmetry(n={}, alphas={blocks:?}, R={r:?})", self.n)
    }
}

#[derive(Serialize, Deserialize)]
struct SymmetryRepr {
    n: usize,
    alphas: Vec<MultiIndex>,
    r: MultiIndex,
}

impl Serialize for Symmetry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SymmetryRepr { n: self.n, alphas: self.alphas.clone(), r: self.r_mask }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Symmetry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SymmetryRepr::deserialize(d)?;
        let sym = Symmetry::new(repr.alphas).map_err(D::Error::custom)?;
        if sym.n != repr.n {
            return Err(D::Error::custom(format!("n={} but blocks have length {}", repr.n, sym.n)));
        }
        if sym.r_mask != repr.r {
            return Err(D::Error::custom(format!("r must equal {} for these blocks", sym.r_mask)));
        }
        Ok(sym)
    }
}
