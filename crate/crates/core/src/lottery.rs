//! Lotteries over candidates and the duality with utility points.
//!
//! A lottery is a probability vector over the `m` candidates; the
//! difference of two lotteries (a *bipoint*) lives in the zero-sum
//! hyperplane `H`. A utility point acts on bipoints through the inner
//! product: the sign of `<u, M - L>` decides the preference between the
//! lotteries `L` and `M`. This is the entire computational content of the
//! duality between the utility space and `H*`.

use crate::error::{Error, Result};
use crate::geometry::{RawUtility, UtilityPoint};

/// Comparisons closer to zero than this count as indifference.
pub const PREFERENCE_TOL: f64 = 1e-12;

/// A probability distribution over the candidates: nonnegative entries
/// summing to one (within 1e-12).
#[derive(Clone, Debug, PartialEq)]
pub struct Lottery {
    probs: Vec<f64>,
}

impl Lottery {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidLottery("empty vector".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidLottery(
                "entries must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidLottery(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// The lottery that elects candidate `i` with certainty.
    pub fn degenerate(m: usize, i: usize) -> Result<Self> {
        if i >= m {
            return Err(Error::InvalidLottery(format!(
                "candidate {i} out of range for m = {m}"
            )));
        }
        let mut probs = vec![0.0; m];
        probs[i] = 1.0;
        Ok(Self { probs })
    }

    pub fn m(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Difference of two lotteries; an element of the tangent polytope of the
/// simplex, hence of `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bipoint {
    delta: Vec<f64>,
}

impl Bipoint {
    /// Wraps a zero-sum vector (within 1e-12).
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        let sum: f64 = delta.iter().sum();
        if sum.abs() > 1e-12 {
            return Err(Error::InvalidBipoint(sum));
        }
        Ok(Self { delta })
    }

    /// Bipoint from `from` to `to`, i.e. `to - from`.
    pub fn between(from: &Lottery, to: &Lottery) -> Result<Self> {
        if from.m() != to.m() {
            return Err(Error::DimensionMismatch {
                expected: from.m(),
                actual: to.m(),
            });
        }
        Ok(Self {
            delta: to
                .probs()
                .iter()
                .zip(from.probs())
                .map(|(t, f)| t - f)
                .collect(),
        })
    }

    pub fn m(&self) -> usize {
        self.delta.len()
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }
}

/// How the second lottery compares to the first under a given utility.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preference {
    /// `M` is strictly worse than `L`.
    LessPreferred,
    Indifferent,
    /// `M` is strictly better than `L`.
    MorePreferred,
}

impl Preference {
    /// The comparison made by the reversed agent.
    pub fn reversed(self) -> Self {
        match self {
            Preference::LessPreferred => Preference::MorePreferred,
            Preference::Indifferent => Preference::Indifferent,
            Preference::MorePreferred => Preference::LessPreferred,
        }
    }
}

fn classify(inner: f64) -> Preference {
    if inner > PREFERENCE_TOL {
        Preference::MorePreferred
    } else if inner < -PREFERENCE_TOL {
        Preference::LessPreferred
    } else {
        Preference::Indifferent
    }
}

fn preference_of(u: &[f64], l: &Lottery, m: &Lottery) -> Result<Preference> {
    if l.m() != u.len() || m.m() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: if l.m() != u.len() { l.m() } else { m.m() },
        });
    }
    let bipoint = Bipoint::between(l, m)?;
    let inner: f64 = u.iter().zip(bipoint.delta()).map(|(a, b)| a * b).sum();
    Ok(classify(inner))
}

/// Compares lottery `m` against lottery `l` for an agent at utility point
/// `u`: the sign of `<u, m - l>`, with an indifference band of 1e-12.
/// The indifference point is indifferent between all lotteries.
pub fn prefers(u: &UtilityPoint, l: &Lottery, m: &Lottery) -> Result<Preference> {
    match u.coords() {
        None => {
            if l.m() != u.m() || m.m() != u.m() {
                return Err(Error::DimensionMismatch {
                    expected: u.m(),
                    actual: if l.m() != u.m() { l.m() } else { m.m() },
                });
            }
            Ok(Preference::Indifferent)
        }
        Some(c) => preference_of(c, l, m),
    }
}

/// [`prefers`] for an arbitrary representative; the answer only depends on
/// its equivalence class, since bipoints are zero-sum.
pub fn prefers_raw(u: &RawUtility, l: &Lottery, m: &Lottery) -> Result<Preference> {
    preference_of(u.values(), l, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{canonicalize, invert};

    fn raw(values: &[f64]) -> RawUtility {
        RawUtility::new(values.to_vec()).unwrap()
    }

    #[test]
    fn lottery_validation() {
        assert!(Lottery::new(vec![0.5, 0.5]).is_ok());
        assert!(Lottery::new(vec![0.5, 0.6]).is_err());
        assert!(Lottery::new(vec![-0.1, 1.1]).is_err());
        assert!(Lottery::new(vec![]).is_err());
        assert_eq!(
            Lottery::degenerate(3, 1).unwrap().probs(),
            &[0.0, 1.0, 0.0]
        );
        assert!(Lottery::degenerate(3, 3).is_err());
    }

    #[test]
    fn bipoint_lies_in_h() {
        let l = Lottery::new(vec![0.2, 0.3, 0.5]).unwrap();
        let m = Lottery::new(vec![0.6, 0.4, 0.0]).unwrap();
        let b = Bipoint::between(&l, &m).unwrap();
        assert!(b.delta().iter().sum::<f64>().abs() <= 1e-12);
        assert!(Bipoint::new(vec![0.1, -0.1, 0.0]).is_ok());
        assert!(Bipoint::new(vec![0.1, 0.1, 0.0]).is_err());
    }

    // u = (5/3, -1/3, -4/3) against the sure lotteries on candidates 1 and
    // 2: <u, M - L> = -2, so M is the worse lottery.
    #[test]
    fn prefers_fig2_example() {
        let u = raw(&[5.0 / 3.0, -1.0 / 3.0, -4.0 / 3.0]);
        let l = Lottery::degenerate(3, 0).unwrap();
        let m = Lottery::degenerate(3, 1).unwrap();
        assert_eq!(prefers_raw(&u, &l, &m).unwrap(), Preference::LessPreferred);
        // canonical representative gives the same ordering
        let cu = canonicalize(&u);
        assert_eq!(prefers(&cu, &l, &m).unwrap(), Preference::LessPreferred);
    }

    #[test]
    fn equal_lotteries_are_indifferent() {
        let u = canonicalize(&raw(&[1.0, -2.0, 0.5, 0.5]));
        let l = Lottery::new(vec![0.25; 4]).unwrap();
        assert_eq!(prefers(&u, &l, &l).unwrap(), Preference::Indifferent);
    }

    #[test]
    fn inversion_flips_orderings() {
        let u = canonicalize(&raw(&[0.9, -0.3, 2.0, -1.1]));
        let v = invert(&u);
        let lotteries = [
            Lottery::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap(),
            Lottery::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
            Lottery::new(vec![0.25, 0.25, 0.25, 0.25]).unwrap(),
        ];
        for l in &lotteries {
            for m in &lotteries {
                let a = prefers(&u, l, m).unwrap();
                let b = prefers(&v, l, m).unwrap();
                assert_eq!(a.reversed(), b);
            }
        }
    }

    #[test]
    fn indifference_point_is_indifferent() {
        let ind = UtilityPoint::indifference(3);
        let l = Lottery::degenerate(3, 0).unwrap();
        let m = Lottery::degenerate(3, 2).unwrap();
        assert_eq!(prefers(&ind, &l, &m).unwrap(), Preference::Indifferent);
    }

    #[test]
    fn dimension_mismatch_detected() {
        let u = canonicalize(&raw(&[1.0, 0.0, -1.0]));
        let l = Lottery::new(vec![0.5, 0.5]).unwrap();
        let m = Lottery::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            prefers(&u, &l, &m),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
