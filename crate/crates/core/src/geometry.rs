//! The quotient construction and its round geometry.
//!
//! A utility vector `u` in `R^m` and `a*u + b*1` (with `a > 0`) describe the
//! same preferences, so the utility space is the quotient of `R^m` by that
//! relation. Removing the class of constant vectors (total indifference),
//! what remains is in bijection with the unit sphere of the zero-sum
//! hyperplane `H`: project out the mean, normalize. That sphere
//! representative is the canonical stored form here, and the great-circle
//! (round) metric on it is the distance. For `m = 3` the module also carries
//! the hexagonal cube-edge metric, which shares the round metric's
//! symmetries without being proportional to it.

use crate::error::{Error, Result};

/// Norm threshold below which a projected vector counts as indifferent.
/// Canonicalization divides by this norm, so it cannot be zero-tolerant.
pub const DEFAULT_INDIFFERENCE_TOL: f64 = 1e-9;

/// An arbitrary representative of a preference class: `m` finite utility
/// levels, one per candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct RawUtility {
    values: Vec<f64>,
}

impl RawUtility {
    /// Wraps a vector of utility levels. Fails on empty input or non-finite
    /// entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidUtility("empty vector".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidUtility(format!("non-finite entry {v}")));
        }
        Ok(Self { values })
    }

    /// Number of candidates.
    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Canonical point of the utility space: either the indifference point or a
/// unit vector of the zero-sum hyperplane `H`.
///
/// The sphere representative satisfies `|sum| <= 1e-12` and
/// `|norm - 1| <= 1e-12`; constructors enforce this.
#[derive(Clone, Debug, PartialEq)]
pub struct UtilityPoint {
    m: usize,
    // None encodes the indifference point.
    coords: Option<Vec<f64>>,
}

impl UtilityPoint {
    /// The class of constant vectors over `m` candidates.
    pub fn indifference(m: usize) -> Self {
        Self { m, coords: None }
    }

    /// Wraps coordinates that are already canonical (zero sum, unit norm,
    /// both within 1e-12). Intended for deserialization paths; use
    /// [`canonicalize`] for arbitrary vectors.
    pub fn from_canonical(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidUtility("empty vector".into()));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidUtility("non-finite entry".into()));
        }
        let sum: f64 = coords.iter().sum();
        let norm = norm(&coords);
        if sum.abs() > 1e-12 {
            return Err(Error::InvalidUtility(format!(
                "coordinates sum to {sum:e}, expected 0"
            )));
        }
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidUtility(format!(
                "coordinate norm is {norm}, expected 1"
            )));
        }
        Ok(Self {
            m: coords.len(),
            coords: Some(coords),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_indifference(&self) -> bool {
        self.coords.is_none()
    }

    /// Sphere coordinates, or `None` for the indifference point.
    pub fn coords(&self) -> Option<&[f64]> {
        self.coords.as_deref()
    }

    /// Sphere coordinates, with the indifference point encoded as the zero
    /// vector (its natural representative in `H`).
    pub fn coords_or_zero(&self) -> Vec<f64> {
        match &self.coords {
            Some(c) => c.clone(),
            None => vec![0.0; self.m],
        }
    }
}

/// A permutation of the candidate set `{0, .., m-1}` in one-line notation:
/// `sigma.image(i)` is where candidate slot `i` draws its utility from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let m = map.len();
        let mut seen = vec![false; m];
        for &j in &map {
            if j >= m || seen[j] {
                return Err(Error::InvalidPermutation(format!(
                    "{map:?} is not a bijection of 0..{m}"
                )));
            }
            seen[j] = true;
        }
        Ok(Self(map))
    }

    pub fn identity(m: usize) -> Self {
        Self((0..m).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Self(inv)
    }

    /// Reorders a slice: `out[i] = values[sigma(i)]`.
    pub fn apply<T: Copy>(&self, values: &[T]) -> Vec<T> {
        self.0.iter().map(|&j| values[j]).collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthogonal projection onto the zero-sum hyperplane `H`: subtracts the
/// mean from every coordinate (the matrix `Id - J/m`).
pub fn project_to_hyperplane(u: &RawUtility) -> Vec<f64> {
    let mean = u.values().iter().sum::<f64>() / u.m() as f64;
    u.values().iter().map(|v| v - mean).collect()
}

/// Canonical projection with the default indifference threshold.
pub fn canonicalize(u: &RawUtility) -> UtilityPoint {
    canonicalize_with_tol(u, DEFAULT_INDIFFERENCE_TOL)
}

/// Canonical projection: project onto `H`, normalize. Vectors whose
/// projection has norm at most `tol` collapse to the indifference point.
pub fn canonicalize_with_tol(u: &RawUtility, tol: f64) -> UtilityPoint {
    assert!(tol > 0.0, "indifference tolerance must be positive");
    let proj = project_to_hyperplane(u);
    let n = norm(&proj);
    if n <= tol {
        UtilityPoint::indifference(u.m())
    } else {
        UtilityPoint {
            m: u.m(),
            coords: Some(proj.into_iter().map(|v| v / n).collect()),
        }
    }
}

fn canonical_pair<'a>(x: &'a UtilityPoint, y: &'a UtilityPoint) -> Result<(&'a [f64], &'a [f64])> {
    if x.m() != y.m() {
        return Err(Error::DimensionMismatch {
            expected: x.m(),
            actual: y.m(),
        });
    }
    match (x.coords(), y.coords()) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::IndifferencePoint),
    }
}

/// Great-circle distance in radians between two sphere points, i.e. the
/// round metric of the utility space. The arccos argument is clamped to
/// `[-1, 1]`, and coordinate-identical (resp. exactly negated) pairs short
///-circuit to 0 (resp. pi): arccos is infinitely steep there, so the last
/// ulp of the stored norm would otherwise cost ~1e-8.
pub fn distance(x: &UtilityPoint, y: &UtilityPoint) -> Result<f64> {
    let (a, b) = canonical_pair(x, y)?;
    if a == b {
        return Ok(0.0);
    }
    if a.iter().zip(b).all(|(p, q)| *p == -*q) {
        return Ok(std::f64::consts::PI);
    }
    Ok(dot(a, b).clamp(-1.0, 1.0).acos())
}

/// Preference reversal: negates the sphere representative, keeping relative
/// intensities. The indifference point is its own inverse.
pub fn invert(x: &UtilityPoint) -> UtilityPoint {
    UtilityPoint {
        m: x.m,
        coords: x
            .coords
            .as_ref()
            .map(|c| c.iter().map(|v| -v).collect()),
    }
}

/// Candidate relabeling `(u_1,..,u_m) -> (u_sigma(1),..,u_sigma(m))`.
/// An isometry of every candidate-symmetric metric on the sphere.
pub fn permute(x: &UtilityPoint, sigma: &Permutation) -> Result<UtilityPoint> {
    if sigma.len() != x.m() {
        return Err(Error::DimensionMismatch {
            expected: x.m(),
            actual: sigma.len(),
        });
    }
    Ok(UtilityPoint {
        m: x.m,
        coords: x.coords.as_ref().map(|c| sigma.apply(c)),
    })
}

/// Deterministic orthonormal basis of the zero-sum hyperplane `H` of `R^m`,
/// built by Gram-Schmidt over the projected canonical basis vectors
/// `P_H e_1, .., P_H e_{m-1}` (in that order, with one re-orthogonalization
/// pass). Every caller that needs coordinates on `H` uses this basis, so
/// results are reproducible and independent of any RNG.
pub fn hyperplane_basis(m: usize) -> Vec<Vec<f64>> {
    assert!(m >= 1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m - 1);
    for i in 0..m.saturating_sub(1) {
        let mut v = vec![-1.0 / m as f64; m];
        v[i] += 1.0;
        // two passes of classical Gram-Schmidt for numerical hygiene
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let n = norm(&v);
        debug_assert!(n > 1e-8, "projected basis vectors are independent");
        for vi in v.iter_mut() {
            *vi /= n;
        }
        basis.push(v);
    }
    basis
}

// ---------------------------------------------------------------------------
// The m = 3 cube-edge metric.
//
// Taking for each class the representative with min coordinate -1 and max
// coordinate +1 identifies the punctured utility space for three candidates
// with the closed hexagon of six unit-cube edges (all sign patterns of
// (+-1,+-1,+-1) except the two constant ones). Measuring lengths along that
// hexagon yields a metric that is permutation-invariant and has unanimity
// geodesics, yet is not a multiple of the round metric.
// ---------------------------------------------------------------------------

/// Vertices of the hexagonal cycle, in cyclic order.
const HEX_VERTICES: [[f64; 3]; 6] = [
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, 1.0, 1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
];

/// Total length of the cycle: six edges of length two.
const HEX_LENGTH: f64 = 12.0;

/// Min/max-normalized representative: affine image of the canonical
/// coordinates with min -1 and max +1. The extremes are assigned exactly.
fn cube_representative(coords: &[f64]) -> [f64; 3] {
    let mut imin = 0;
    let mut imax = 0;
    for i in 1..3 {
        if coords[i] < coords[imin] {
            imin = i;
        }
        if coords[i] > coords[imax] {
            imax = i;
        }
    }
    let (lo, hi) = (coords[imin], coords[imax]);
    let mut rep = [0.0; 3];
    for i in 0..3 {
        rep[i] = (2.0 * coords[i] - hi - lo) / (hi - lo);
    }
    rep[imin] = -1.0;
    rep[imax] = 1.0;
    rep
}

/// Arc-length position of a cube representative along the hexagon, in
/// `[0, 12)`. Vertices belong to two edges but get a consistent position.
fn hexagon_arc_position(rep: &[f64; 3]) -> f64 {
    for (e, start) in HEX_VERTICES.iter().enumerate() {
        let end = &HEX_VERTICES[(e + 1) % 6];
        // the coordinate that varies along this edge
        let free = (0..3)
            .find(|&i| (start[i] - end[i]).abs() > 0.5)
            .expect("consecutive hexagon vertices differ");
        let fixed_match = (0..3)
            .filter(|&i| i != free)
            .all(|i| (rep[i] - start[i]).abs() <= 1e-9);
        if fixed_match {
            return 2.0 * e as f64 + (rep[free] - start[free]).abs();
        }
    }
    unreachable!("min/max-normalized representatives lie on the hexagon");
}

/// Shortest-path length along the hexagonal cube-edge cycle (m = 3 only).
pub fn cube_distance_m3(x: &UtilityPoint, y: &UtilityPoint) -> Result<f64> {
    if x.m() != 3 || y.m() != 3 {
        return Err(Error::DimensionError {
            required: 3,
            actual: if x.m() != 3 { x.m() } else { y.m() },
        });
    }
    let (a, b) = canonical_pair(x, y)?;
    let sa = hexagon_arc_position(&cube_representative(a));
    let sb = hexagon_arc_position(&cube_representative(b));
    let d = (sa - sb).abs();
    Ok(d.min(HEX_LENGTH - d))
}
