//! Rankings with ties and the permutohedron cell structure.
//!
//! Projecting a utility point to ordinal information yields an ordered
//! partition of the candidates: candidates sharing (numerically
//! indistinguishable) utility levels share a tier. On the sphere for four
//! candidates these patterns are the cells of the permutohedron: strict
//! orders are facets, three distinct levels an edge, two a vertex.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{Permutation, UtilityPoint};

/// Coordinates closer than this merge into one tier.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

/// Largest `m` for which all `m!` strict orders are enumerated.
pub const MAX_ENUMERATION_M: usize = 8;

/// An ordered partition of the candidate set `{0, .., m-1}`: earlier tiers
/// are more preferred, candidates within a tier are tied.
///
/// Displays in one-based notation, tiers joined by `>` and ties by `=`,
/// e.g. `1>4>2=3`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PreferenceOrder {
    tiers: Vec<Vec<usize>>,
}

impl PreferenceOrder {
    /// Builds an order from tiers, validating the partition property.
    /// Candidates within each tier are sorted, so equal partitions compare
    /// equal regardless of input order.
    pub fn new(tiers: Vec<Vec<usize>>) -> Result<Self> {
        if tiers.is_empty() {
            return Err(Error::InvalidOrder("no tiers".into()));
        }
        let m: usize = tiers.iter().map(Vec::len).sum();
        let mut seen = vec![false; m];
        for tier in &tiers {
            if tier.is_empty() {
                return Err(Error::InvalidOrder("empty tier".into()));
            }
            for &c in tier {
                if c >= m || seen[c] {
                    return Err(Error::InvalidOrder(format!(
                        "tiers do not partition 0..{m} (candidate {c})"
                    )));
                }
                seen[c] = true;
            }
        }
        let mut tiers = tiers;
        for tier in tiers.iter_mut() {
            tier.sort_unstable();
        }
        Ok(Self { tiers })
    }

    /// Strict order from a ranking (most preferred first).
    pub fn strict(ranking: &[usize]) -> Result<Self> {
        Self::new(ranking.iter().map(|&c| vec![c]).collect())
    }

    /// The single-tier order: everyone tied.
    pub fn all_tied(m: usize) -> Result<Self> {
        Self::new(vec![(0..m).collect()])
    }

    pub fn m(&self) -> usize {
        self.tiers.iter().map(Vec::len).sum()
    }

    pub fn tiers(&self) -> &[Vec<usize>] {
        &self.tiers
    }

    pub fn tier_count(&self) -> usize {
        self.tiers.len()
    }

    pub fn is_strict(&self) -> bool {
        self.tiers.iter().all(|t| t.len() == 1)
    }

    /// For strict orders, the ranking (most preferred first).
    pub fn ranking(&self) -> Option<Vec<usize>> {
        if self.is_strict() {
            Some(self.tiers.iter().map(|t| t[0]).collect())
        } else {
            None
        }
    }

    /// Rank of each candidate: `ranks()[c]` is the tier index of `c`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.m()];
        for (r, tier) in self.tiers.iter().enumerate() {
            for &c in tier {
                ranks[c] = r;
            }
        }
        ranks
    }

    /// The order seen after relabeling candidates by `sigma`, matching the
    /// coordinate action on points: `to_order(permute(x, sigma))` equals
    /// `to_order(x).relabel(sigma)`.
    pub fn relabel(&self, sigma: &Permutation) -> Result<Self> {
        if sigma.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                actual: sigma.len(),
            });
        }
        let inv = sigma.inverse();
        Self::new(
            self.tiers
                .iter()
                .map(|tier| tier.iter().map(|&c| inv.image(c)).collect())
                .collect(),
        )
    }

    /// Tiers in reverse sequence (the order of the reversed agent).
    pub fn reversed(&self) -> Self {
        Self {
            tiers: self.tiers.iter().rev().cloned().collect(),
        }
    }
}

impl fmt::Display for PreferenceOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, tier) in self.tiers.iter().enumerate() {
            if i > 0 {
                write!(f, ">")?;
            }
            for (j, c) in tier.iter().enumerate() {
                if j > 0 {
                    write!(f, "=")?;
                }
                write!(f, "{}", c + 1)?;
            }
        }
        Ok(())
    }
}

impl FromStr for PreferenceOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tiers = Vec::new();
        for tier_str in s.split('>') {
            let mut tier = Vec::new();
            for c in tier_str.split('=') {
                let c = c.trim();
                let n: usize = c
                    .parse()
                    .map_err(|_| Error::InvalidOrder(format!("bad candidate label {c:?}")))?;
                if n == 0 {
                    return Err(Error::InvalidOrder("labels are one-based".into()));
                }
                tier.push(n - 1);
            }
            tiers.push(tier);
        }
        Self::new(tiers)
    }
}

/// Permutohedron cell taxonomy, named after the three-dimensional
/// permutohedron of m = 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellKind {
    /// A strict order (m distinct utility levels).
    Facet,
    /// Exactly three distinct levels (m = 4).
    Edge,
    /// Exactly two distinct levels (m = 4).
    Vertex,
    /// Anything the taxonomy does not name, including total indifference.
    Other,
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CellKind::Facet => "Facet",
            CellKind::Edge => "Edge",
            CellKind::Vertex => "Vertex",
            CellKind::Other => "Other",
        };
        f.write_str(s)
    }
}

/// Ordinal projection of a utility point: candidates sorted by decreasing
/// utility, with coordinates within `tie_tol` of each other merged into one
/// tier (transitively, so the grouping is order-independent). The
/// indifference point projects to the single all-tied tier.
pub fn to_order(x: &UtilityPoint, tie_tol: f64) -> PreferenceOrder {
    assert!(tie_tol >= 0.0, "tie tolerance must be nonnegative");
    let m = x.m();
    let coords = match x.coords() {
        None => return PreferenceOrder::all_tied(m).expect("m >= 1"),
        Some(c) => c,
    };
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| {
        coords[b]
            .partial_cmp(&coords[a])
            .expect("canonical coordinates are finite")
            .then(a.cmp(&b))
    });
    let mut tiers: Vec<Vec<usize>> = vec![vec![idx[0]]];
    for win in idx.windows(2) {
        let (prev, cur) = (win[0], win[1]);
        if coords[prev] - coords[cur] <= tie_tol {
            tiers.last_mut().unwrap().push(cur);
        } else {
            tiers.push(vec![cur]);
        }
    }
    PreferenceOrder::new(tiers).expect("sorted grouping is a partition")
}

/// Cell containing an order: facets are strict orders for any `m`; the
/// edge/vertex names are specific to the m = 4 permutohedron.
pub fn cell_kind(o: &PreferenceOrder) -> CellKind {
    let m = o.m();
    let t = o.tier_count();
    if t == m {
        CellKind::Facet
    } else if m == 4 && t == 3 {
        CellKind::Edge
    } else if m == 4 && t == 2 {
        CellKind::Vertex
    } else {
        CellKind::Other
    }
}

/// Kendall tau distance between strict orders: the number of candidate
/// pairs the two rankings disagree on.
pub fn kendall_tau(a: &PreferenceOrder, b: &PreferenceOrder) -> Result<usize> {
    if !a.is_strict() || !b.is_strict() {
        return Err(Error::NonStrictOrder);
    }
    if a.m() != b.m() {
        return Err(Error::DimensionMismatch {
            expected: a.m(),
            actual: b.m(),
        });
    }
    let ra = a.ranks();
    let rb = b.ranks();
    let m = a.m();
    let mut discordant = 0;
    for i in 0..m {
        for j in (i + 1)..m {
            let da = ra[i].cmp(&ra[j]);
            let db = rb[i].cmp(&rb[j]);
            if da != db {
                discordant += 1;
            }
        }
    }
    Ok(discordant)
}

/// All `m!` strict orders, in lexicographic order of their rankings.
/// Capped at m = 8.
pub fn enumerate_strict_orders(m: usize) -> Result<Vec<PreferenceOrder>> {
    if m == 0 {
        return Err(Error::InvalidOrder("no candidates".into()));
    }
    if m > MAX_ENUMERATION_M {
        return Err(Error::SizeLimit {
            m,
            max: MAX_ENUMERATION_M,
        });
    }
    let mut ranking: Vec<usize> = (0..m).collect();
    let mut out = Vec::with_capacity((1..=m).product());
    loop {
        out.push(PreferenceOrder::strict(&ranking).expect("permutation is a partition"));
        if !next_permutation(&mut ranking) {
            break;
        }
    }
    Ok(out)
}

/// Advances to the lexicographically next permutation in place; false once
/// the sequence wraps.
fn next_permutation(seq: &mut [usize]) -> bool {
    let n = seq.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && seq[i - 1] >= seq[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while seq[j] <= seq[i - 1] {
        j -= 1;
    }
    seq.swap(i - 1, j);
    seq[i..].reverse();
    true
}
