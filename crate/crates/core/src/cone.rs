//! The summation operator, computed as convex-cone membership.
//!
//! The sum of a set `A` of utility points is the set of points respecting
//! every unanimous lottery preference of `A`; geometrically it is the image
//! of the closed convex cone spanned by representatives of `A`. A continuum
//! cannot be materialized, so the API answers membership queries instead,
//! by two independent routes:
//!
//! * [`sum_contains`] decides exactly whether the canonical vector of `v`
//!   is a nonnegative combination of the generators, via a Lawson-Hanson
//!   nonnegative least-squares solve;
//! * [`unanimity_oracle`] probes the defining property directly: it scans
//!   quasi-uniform directions `D` of the unit sphere of `H` looking for a
//!   counterexample direction that all generators weakly like while `v`
//!   strictly dislikes.
//!
//! The two must agree away from the cone boundary (up to the oracle grid's
//! angular resolution), which is what the characterization theorem of the
//! summation operator asserts.

use crate::error::{Error, Result};
use crate::geometry::{hyperplane_basis, UtilityPoint};
use crate::numeric::inverse_normal_cdf;

/// Residual norm below which a nonnegative combination counts as exact.
pub const CONE_FEASIBILITY_TOL: f64 = 1e-9;

/// Violations beyond this threshold make the oracle report a counterexample.
const ORACLE_VIOLATION_TOL: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn check_dims(set: &[UtilityPoint], v: &UtilityPoint) -> Result<usize> {
    let m = v.m();
    for u in set {
        if u.m() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: u.m(),
            });
        }
    }
    Ok(m)
}

fn generators(set: &[UtilityPoint]) -> Vec<&[f64]> {
    // Indifferent members add only the 1-direction, which vanishes in H.
    set.iter().filter_map(|u| u.coords()).collect()
}

/// Whether `v` belongs to the sum of `set`.
///
/// The empty combination is allowed, so the indifference point is always a
/// member, and every member of `set` trivially is.
pub fn sum_contains(set: &[UtilityPoint], v: &UtilityPoint) -> Result<bool> {
    Ok(cone_distance(set, v)? <= CONE_FEASIBILITY_TOL)
}

/// Euclidean distance from the canonical vector of `v` (zero for the
/// indifference point) to the convex cone of the generators. For unit `v`
/// this equals the sine of the angular distance to the cone.
pub fn cone_distance(set: &[UtilityPoint], v: &UtilityPoint) -> Result<f64> {
    check_dims(set, v)?;
    if v.is_indifference() {
        return Ok(0.0);
    }
    let gens = generators(set);
    let target = v.coords().expect("non-indifferent");
    if gens.is_empty() {
        // the cone of the empty set is {0}
        return Ok(norm(target));
    }
    let (_, residual) = nnls(&gens, target);
    Ok(residual)
}

/// Grid approximation of the unanimity characterization: returns `false`
/// iff some probed direction is weakly approved by every member of `set`
/// (inner product >= 0, reached exactly by a local feasibility polish) yet
/// disapproved by `v` with margin 1e-9. `grid_resolution` must be at least
/// 16; larger grids resolve thinner counterexample regions.
pub fn unanimity_oracle(
    set: &[UtilityPoint],
    v: &UtilityPoint,
    grid_resolution: usize,
) -> Result<bool> {
    assert!(grid_resolution >= 16, "grid_resolution must be >= 16");
    let m = check_dims(set, v)?;
    if v.is_indifference() {
        // <0, d> is never negative: indifference respects everything
        return Ok(true);
    }
    let gens = generators(set);
    let target = v.coords().expect("non-indifferent");

    for mut dir in sphere_grid(m, grid_resolution) {
        let slack = min_slack(&gens, &dir);
        if slack >= 0.0 {
            if dot(target, &dir) < -ORACLE_VIOLATION_TOL {
                return Ok(false);
            }
            continue;
        }
        // Near-misses are polished onto the feasible set so that
        // counterexample regions of measure zero (degenerate cones) are
        // still reachable from nearby grid points.
        if slack >= -0.5
            && dot(target, &dir) < 0.25
            && polish(&gens, &mut dir)
            && dot(target, &dir) < -ORACLE_VIOLATION_TOL
        {
            return Ok(false);
        }
    }
    Ok(true)
}

fn min_slack(gens: &[&[f64]], dir: &[f64]) -> f64 {
    gens.iter()
        .map(|g| dot(g, dir))
        .fold(f64::INFINITY, f64::min)
}

/// Cyclic projection onto the half-spaces `<g, .> >= 0`, renormalizing each
/// pass. Returns true when the direction became feasible to 1e-12, which
/// keeps the certificate exact enough that no true member of the cone can
/// ever be rejected.
fn polish(gens: &[&[f64]], dir: &mut [f64]) -> bool {
    for _ in 0..40 {
        let mut worst = 0.0f64;
        for g in gens {
            let c = dot(g, dir);
            if c < 0.0 {
                worst = worst.min(c);
                for (d, gi) in dir.iter_mut().zip(*g) {
                    *d -= c * gi;
                }
            }
        }
        let n = norm(dir);
        if n < 1e-6 {
            return false; // collapsed towards the apex; nothing here
        }
        for d in dir.iter_mut() {
            *d /= n;
        }
        if worst >= -1e-12 && min_slack(gens, dir) >= -1e-12 {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Deterministic quasi-uniform grids on the unit sphere of H.
// ---------------------------------------------------------------------------

/// `resolution` quasi-uniform unit vectors of `H`, in ambient coordinates.
/// Uniform angles on the circle for m = 3, a Fibonacci spiral for m = 4 and
/// a Kronecker low-discrepancy sequence pushed through the normal quantile
/// for higher dimensions. Deterministic: no RNG is involved.
pub fn sphere_grid(m: usize, resolution: usize) -> Vec<Vec<f64>> {
    assert!(m >= 2, "the sphere of H is empty for m < 2");
    let basis = hyperplane_basis(m);
    let d = m - 1;
    let embed = |coords: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (c, b) in coords.iter().zip(&basis) {
            for (o, bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    };

    match d {
        1 => vec![embed(&[1.0]), embed(&[-1.0])],
        2 => (0..resolution)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / resolution as f64;
                embed(&[t.cos(), t.sin()])
            })
            .collect(),
        3 => {
            // Fibonacci sphere
            let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
            (0..resolution)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / resolution as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = 2.0 * std::f64::consts::PI * (k as f64 / golden).fract();
                    embed(&[r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
        _ => {
            // Kronecker sequence with the generalized-plastic-constant
            // alphas, mapped through the normal quantile and normalized.
            let gamma = plastic_constant(d);
            let alphas: Vec<f64> = (1..=d).map(|j| gamma.powi(-(j as i32))).collect();
            (0..resolution)
                .map(|k| {
                    let mut coords: Vec<f64> = alphas
                        .iter()
                        .map(|a| {
                            let t = (0.5 + (k as f64 + 1.0) * a).fract();
                            inverse_normal_cdf(t.clamp(1e-12, 1.0 - 1e-12))
                        })
                        .collect();
                    let n = norm(&coords);
                    if n < 1e-12 {
                        coords = std::iter::once(1.0)
                            .chain(std::iter::repeat(0.0))
                            .take(d)
                            .collect();
                    } else {
                        for c in coords.iter_mut() {
                            *c /= n;
                        }
                    }
                    embed(&coords)
                })
                .collect()
        }
    }
}

/// Positive root of x^(d+1) = x + 1 (Newton iteration).
fn plastic_constant(d: usize) -> f64 {
    let p = d as f64 + 1.0;
    let mut x = 1.5f64;
    for _ in 0..64 {
        let f = x.powf(p) - x - 1.0;
        let fp = p * x.powf(p - 1.0) - 1.0;
        let next = x - f / fp;
        if (next - x).abs() < 1e-15 {
            return next;
        }
        x = next;
    }
    x
}

// ---------------------------------------------------------------------------
// Lawson-Hanson nonnegative least squares.
// ---------------------------------------------------------------------------

/// Minimizes `|| sum_j x_j col_j - target ||` over `x >= 0`. Returns the
/// weights and the residual norm. Columns and target share length `d`; the
/// active/passive bookkeeping keeps the passive set small (at most `d` in
/// exact arithmetic), so plenty of columns are cheap.
fn nnls(cols: &[&[f64]], target: &[f64]) -> (Vec<f64>, f64) {
    let d = target.len();
    let k = cols.len();
    let mut x = vec![0.0f64; k];
    let mut passive = vec![false; k];

    let residual = |x: &[f64]| -> Vec<f64> {
        let mut r = target.to_vec();
        for (j, col) in cols.iter().enumerate() {
            if x[j] != 0.0 {
                for (ri, ci) in r.iter_mut().zip(*col) {
                    *ri -= x[j] * ci;
                }
            }
        }
        r
    };

    let max_outer = 5 * k + 50;
    for _ in 0..max_outer {
        let r = residual(&x);
        // gradient of the objective towards each inactive column
        let mut best = usize::MAX;
        let mut best_w = 1e-11;
        for (j, col) in cols.iter().enumerate() {
            if !passive[j] {
                let w = dot(col, &r);
                if w > best_w {
                    best_w = w;
                    best = j;
                }
            }
        }
        if best == usize::MAX {
            break;
        }
        passive[best] = true;

        // inner loop: keep the passive solution strictly positive
        for _ in 0..max_outer {
            let idx: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
            let z = least_squares(cols, target, &idx);
            if z.iter().all(|&zi| zi > 0.0) {
                for (pos, &j) in idx.iter().enumerate() {
                    x[j] = z[pos];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (pos, &j) in idx.iter().enumerate() {
                if z[pos] <= 0.0 {
                    let denom = x[j] - z[pos];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            let alpha = alpha.clamp(0.0, 1.0);
            for (pos, &j) in idx.iter().enumerate() {
                x[j] += alpha * (z[pos] - x[j]);
                if x[j] <= 1e-14 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }

    let r = residual(&x);
    let _ = d;
    (x, norm(&r))
}

/// Unconstrained least squares over the selected columns via Householder
/// QR; rank-deficient directions get coefficient zero.
fn least_squares(cols: &[&[f64]], target: &[f64], idx: &[usize]) -> Vec<f64> {
    let d = target.len();
    let p = idx.len();
    // column-major working copy, p columns of length d, plus the rhs
    let mut a: Vec<Vec<f64>> = idx.iter().map(|&j| cols[j].to_vec()).collect();
    let mut b = target.to_vec();

    let steps = p.min(d);
    let mut diag = vec![0.0f64; steps];
    for s in 0..steps {
        // Householder vector annihilating a[s][s+1..]
        let col = &a[s];
        let sigma: f64 = col[s..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if sigma < 1e-300 {
            diag[s] = 0.0;
            continue;
        }
        let alpha = if col[s] >= 0.0 { -sigma } else { sigma };
        let mut w: Vec<f64> = vec![0.0; d];
        w[s] = col[s] - alpha;
        w[(s + 1)..d].copy_from_slice(&col[(s + 1)..d]);
        let wn2: f64 = w[s..].iter().map(|v| v * v).sum();
        if wn2 < 1e-300 {
            diag[s] = alpha;
            continue;
        }
        for item in a.iter_mut().skip(s) {
            let c = 2.0 * w[s..].iter().zip(&item[s..]).map(|(x, y)| x * y).sum::<f64>() / wn2;
            for (wi, it) in w[s..].iter().zip(item[s..].iter_mut()) {
                *it -= c * wi;
            }
        }
        let c = 2.0 * w[s..].iter().zip(&b[s..]).map(|(x, y)| x * y).sum::<f64>() / wn2;
        for (wi, bi) in w[s..].iter().zip(b[s..].iter_mut()) {
            *bi -= c * wi;
        }
        diag[s] = a[s][s];
    }

    // back substitution on the triangular factor
    let mut z = vec![0.0f64; p];
    for s in (0..steps).rev() {
        let mut acc = b[s];
        for t in (s + 1)..steps {
            acc -= a[t][s] * z[t];
        }
        z[s] = if diag[s].abs() > 1e-12 {
            acc / diag[s]
        } else {
            0.0
        };
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{canonicalize, invert, RawUtility};

    fn canon(values: &[f64]) -> UtilityPoint {
        canonicalize(&RawUtility::new(values.to_vec()).unwrap())
    }

    #[test]
    fn nnls_solves_small_cases() {
        // target inside the cone
        let c1 = [1.0, 0.0, 0.0];
        let c2 = [0.0, 1.0, 0.0];
        let cols: Vec<&[f64]> = vec![&c1, &c2];
        let (x, r) = nnls(&cols, &[2.0, 3.0, 0.0]);
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12);
        assert!(r < 1e-12);

        // target needing a sign flip: weight clamps to zero
        let (x, r) = nnls(&cols, &[-1.0, 2.0, 0.0]);
        assert_eq!(x[0], 0.0);
        assert!((x[1] - 2.0).abs() < 1e-12);
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_ray_membership() {
        let u = canon(&[0.7, -0.2, -0.5, 0.0]);
        let set = vec![u.clone()];
        assert!(sum_contains(&set, &u).unwrap());
        assert!(sum_contains(&set, &UtilityPoint::indifference(4)).unwrap());
        let w = canon(&[0.0, 1.0, -1.0, 0.0]);
        assert!(!sum_contains(&set, &w).unwrap());
        assert!(!sum_contains(&set, &invert(&u)).unwrap());
    }

    #[test]
    fn antipodal_pair_sums_to_line() {
        let u = canon(&[1.0, 0.0, 0.0, 0.0]);
        let set = vec![u.clone(), invert(&u)];
        assert!(sum_contains(&set, &u).unwrap());
        assert!(sum_contains(&set, &invert(&u)).unwrap());
        assert!(sum_contains(&set, &UtilityPoint::indifference(4)).unwrap());
        // anything off the line is out
        let w = canon(&[0.0, 2.0, -1.0, -1.0]);
        assert!(!sum_contains(&set, &w).unwrap());
    }

    #[test]
    fn planar_cone_membership() {
        let a = canon(&[1.0, 0.0, -1.0]);
        let b = canon(&[0.0, 1.0, -1.0]);
        let set = vec![a, b];
        assert!(sum_contains(&set, &canon(&[1.0, 1.0, -2.0])).unwrap());
        assert!(!sum_contains(&set, &canon(&[-1.0, -1.0, 2.0])).unwrap());
    }

    #[test]
    fn empty_set_contains_only_indifference() {
        let set: Vec<UtilityPoint> = vec![];
        assert!(sum_contains(&set, &UtilityPoint::indifference(3)).unwrap());
        assert!(!sum_contains(&set, &canon(&[1.0, 0.0, -1.0])).unwrap());
        // all-indifferent sets behave like the empty set
        let set = vec![UtilityPoint::indifference(3)];
        assert!(!sum_contains(&set, &canon(&[1.0, 0.0, -1.0])).unwrap());
    }

    #[test]
    fn membership_is_monotone_in_the_set() {
        let a = canon(&[1.0, -0.3, -0.7]);
        let b = canon(&[-0.2, 1.0, -0.8]);
        let c = canon(&[0.1, -1.0, 0.9]);
        let small = vec![a.clone(), b.clone()];
        let big = vec![a, b, c];
        for probe in [
            canon(&[0.9, 0.2, -1.1]),
            canon(&[0.5, 0.5, -1.0]),
            canon(&[-1.0, 0.4, 0.6]),
        ] {
            if sum_contains(&small, &probe).unwrap() {
                assert!(sum_contains(&big, &probe).unwrap());
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let set = vec![canon(&[1.0, -1.0, 0.0])];
        let v = canon(&[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            sum_contains(&set, &v),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn grids_are_unit_zero_sum_and_deterministic() {
        for m in [3usize, 4, 5, 6] {
            let grid = sphere_grid(m, 64);
            assert_eq!(grid.len(), 64);
            for g in &grid {
                assert!((dot(g, g).sqrt() - 1.0).abs() < 1e-9, "m={m}");
                assert!(g.iter().sum::<f64>().abs() < 1e-9);
            }
            assert_eq!(grid, sphere_grid(m, 64));
        }
        let two = sphere_grid(2, 16);
        assert_eq!(two.len(), 2);
    }

    #[test]
    fn oracle_accepts_members_at_any_resolution() {
        let a = canon(&[1.0, -0.2, -0.8, 0.0]);
        let b = canon(&[0.0, 1.0, -0.4, -0.6]);
        let set = vec![a.clone(), b.clone()];
        for res in [16, 128, 2048] {
            assert!(unanimity_oracle(&set, &a, res).unwrap());
            assert!(unanimity_oracle(&set, &b, res).unwrap());
            assert!(unanimity_oracle(&set, &UtilityPoint::indifference(4), res).unwrap());
        }
        // a positive combination is a member as well
        let mix = canon(&[1.0, 0.8, -1.2, -0.6]);
        assert!(sum_contains(&set, &mix).unwrap());
        assert!(unanimity_oracle(&set, &mix, 4096).unwrap());
    }

    // The degenerate case from the antipodal example: the counterexample
    // directions form a measure-zero set, reachable only through the
    // feasibility polish.
    #[test]
    fn oracle_rejects_orthogonal_point_for_antipodal_pair() {
        let u = canon(&[1.0, 0.0, 0.0, -1.0]);
        let v = canon(&[0.0, 1.0, -1.0, 0.0]); // orthogonal to u in H
        let set = vec![u.clone(), invert(&u)];
        assert!(!sum_contains(&set, &v).unwrap());
        assert!(!unanimity_oracle(&set, &v, 10_000).unwrap());

        // m = 5 works too
        let u = canon(&[1.0, 0.0, 0.0, 0.0, -1.0]);
        let v = canon(&[0.0, 1.0, -1.0, 0.0, 0.0]);
        let set = vec![u.clone(), invert(&u)];
        assert!(!unanimity_oracle(&set, &v, 10_000).unwrap());
    }

    #[test]
    fn oracle_rejects_clear_non_members() {
        let a = canon(&[1.0, 0.0, -1.0]);
        let b = canon(&[0.0, 1.0, -1.0]);
        let set = vec![a, b];
        assert!(!unanimity_oracle(&set, &canon(&[-1.0, -1.0, 2.0]), 4096).unwrap());
        assert!(unanimity_oracle(&set, &canon(&[1.0, 1.0, -2.0]), 4096).unwrap());
    }
}
