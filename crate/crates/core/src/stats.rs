//! Aggregate analysis of sampled populations: ordinal histograms, the
//! chi-square test against the equal-facet-probability claim, mean
//! resultant vectors, and geodesic-ball probabilities (the finite-sample
//! version of comparing densities against the uniform measure).
//!
//! Indifference points carry no sphere position, so they are excluded from
//! spherical statistics and reported as a separate count.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{canonicalize, distance, RawUtility, UtilityPoint};
use crate::numeric::{compensated_sum, regularized_gamma_q};
use crate::ordinal::{to_order, PreferenceOrder, MAX_ENUMERATION_M};

/// Histogram of ordinal projections over a population. Every point counts,
/// including ties and the indifference point (under the all-tied key).
pub fn facet_histogram(
    pop: &[UtilityPoint],
    tie_tol: f64,
) -> Result<BTreeMap<PreferenceOrder, usize>> {
    let mut counts = BTreeMap::new();
    for (i, p) in pop.iter().enumerate() {
        if p.m() != pop[0].m() {
            return Err(Error::DimensionMismatch {
                expected: pop[0].m(),
                actual: p.m(),
            });
        }
        if p.m() > MAX_ENUMERATION_M {
            return Err(Error::SizeLimit {
                m: p.m(),
                max: MAX_ENUMERATION_M,
            });
        }
        let _ = i;
        *counts.entry(to_order(p, tie_tol)).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Upper-tail chi-square p-value with `df` degrees of freedom.
pub fn chi_square_pvalue(statistic: f64, df: usize) -> f64 {
    assert!(df > 0, "need at least one degree of freedom");
    if statistic <= 0.0 {
        return 1.0;
    }
    regularized_gamma_q(df as f64 / 2.0, statistic / 2.0)
}

/// Pearson chi-square of strict-order counts against the uniform law over
/// all `m!` orders. Orders absent from the map count as zero. Returns the
/// statistic and its upper-tail p-value (df = m! - 1).
pub fn chi_square_uniformity(
    counts: &BTreeMap<PreferenceOrder, usize>,
    m: usize,
) -> Result<(f64, f64)> {
    if m > MAX_ENUMERATION_M {
        return Err(Error::SizeLimit {
            m,
            max: MAX_ENUMERATION_M,
        });
    }
    let mut total = 0usize;
    for (order, c) in counts {
        if !order.is_strict() {
            return Err(Error::NonStrictKeys);
        }
        if order.m() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: order.m(),
            });
        }
        total += c;
    }
    if total == 0 {
        return Err(Error::EmptyPopulation);
    }
    let cells: usize = (1..=m).product();
    let expected = total as f64 / cells as f64;
    // zero-count orders each contribute `expected`, without enumerating them
    let observed_part: f64 = counts
        .values()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let statistic = observed_part + (cells - counts.len()) as f64 * expected;
    let df = cells - 1;
    let p = if df == 0 {
        1.0
    } else {
        chi_square_pvalue(statistic, df)
    };
    Ok((statistic, p))
}

/// Arithmetic mean of the canonical vectors of the non-indifferent points:
/// returns its direction (canonicalized) and its length in `[0, 1]`, the
/// standard concentration measure of a spherical sample.
pub fn mean_resultant(pop: &[UtilityPoint]) -> Result<(UtilityPoint, f64)> {
    let spherical: Vec<&UtilityPoint> = pop.iter().filter(|p| !p.is_indifference()).collect();
    let first = spherical.first().ok_or(Error::EmptyPopulation)?;
    let m = first.m();
    let mut mean = Vec::with_capacity(m);
    for i in 0..m {
        let coord_sum = compensated_sum(spherical.iter().map(|p| {
            debug_assert_eq!(p.m(), m);
            p.coords().expect("filtered")[i]
        }));
        mean.push(coord_sum / spherical.len() as f64);
    }
    let length = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
    if length <= 1e-12 {
        return Err(Error::DegenerateMean);
    }
    let direction = canonicalize(&RawUtility::new(mean).expect("finite"));
    Ok((direction, length))
}

/// Fraction of the non-indifferent population within geodesic `radius` of
/// `center`. Radius must lie in `(0, pi]`; at pi the ball is the whole
/// sphere.
pub fn ball_probability(pop: &[UtilityPoint], center: &UtilityPoint, radius: f64) -> Result<f64> {
    if center.is_indifference() {
        return Err(Error::IndifferenceCenter);
    }
    if !(radius > 0.0 && radius <= std::f64::consts::PI) {
        return Err(Error::InvalidRadius(radius));
    }
    let mut inside = 0usize;
    let mut total = 0usize;
    for p in pop {
        if p.is_indifference() {
            continue;
        }
        total += 1;
        if distance(p, center)? <= radius {
            inside += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyPopulation);
    }
    Ok(inside as f64 / total as f64)
}

/// Ratio of ball probabilities of a population against a reference sample
/// of the uniform measure, at the same center and radius: the finite-sample
/// estimate of the density `d mu / d mu_0`.
pub fn empirical_density_ratio(
    pop: &[UtilityPoint],
    center: &UtilityPoint,
    radius: f64,
    reference_pop: &[UtilityPoint],
) -> Result<f64> {
    let p = ball_probability(pop, center, radius)?;
    let q = ball_probability(reference_pop, center, radius)?;
    if q == 0.0 {
        return Err(Error::InfiniteRatio);
    }
    Ok(p / q)
}

// ---------------------------------------------------------------------------
// Machine-readable report
// ---------------------------------------------------------------------------

/// Summary statistics of a population, as emitted by the CLI `stats`
/// subcommand. Optional sections are omitted when undefined (empty
/// population, tied orders, degenerate mean, no ball query).
#[derive(Clone, Debug, Serialize)]
pub struct PopulationReport {
    pub n: usize,
    pub n_indifferent: usize,
    pub facets: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_resultant_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ball_probability: Option<f64>,
}

/// Report over utility points. Ball statistics are included when a
/// `(center, radius)` query is given.
pub fn report_from_points(
    pop: &[UtilityPoint],
    tie_tol: f64,
    ball: Option<(&UtilityPoint, f64)>,
) -> Result<PopulationReport> {
    let n = pop.len();
    let n_indifferent = pop.iter().filter(|p| p.is_indifference()).count();
    let orders: Vec<PreferenceOrder> = pop
        .iter()
        .filter(|p| !p.is_indifference())
        .map(|p| to_order(p, tie_tol))
        .collect();
    let mut report = report_over_orders(n, n_indifferent, &orders)?;
    report.mean_resultant_length = match mean_resultant(pop) {
        Ok((_, len)) => Some(len),
        Err(Error::EmptyPopulation) | Err(Error::DegenerateMean) => None,
        Err(e) => return Err(e),
    };
    if let Some((center, radius)) = ball {
        report.ball_probability = Some(ball_probability(pop, center, radius)?);
    }
    Ok(report)
}

/// Report over sampled orders (Mallows populations). All-tied orders play
/// the role of the indifference point.
pub fn report_from_orders(orders: &[PreferenceOrder]) -> Result<PopulationReport> {
    let n = orders.len();
    let (indifferent, rest): (Vec<_>, Vec<_>) = orders
        .iter()
        .cloned()
        .partition(|o| o.tier_count() == 1 && o.m() > 1);
    report_over_orders(n, indifferent.len(), &rest)
}

fn report_over_orders(
    n: usize,
    n_indifferent: usize,
    orders: &[PreferenceOrder],
) -> Result<PopulationReport> {
    let mut facets: BTreeMap<PreferenceOrder, usize> = BTreeMap::new();
    for o in orders {
        *facets.entry(o.clone()).or_insert(0) += 1;
    }
    let chi = if !orders.is_empty()
        && orders[0].m() <= MAX_ENUMERATION_M
        && facets.keys().all(|o| o.is_strict())
    {
        Some(chi_square_uniformity(&facets, orders[0].m())?)
    } else {
        None
    };
    Ok(PopulationReport {
        n,
        n_indifferent,
        facets: facets
            .into_iter()
            .map(|(o, c)| (o.to_string(), c))
            .collect(),
        chi2: chi.map(|(s, _)| s),
        p_value: chi.map(|(_, p)| p),
        mean_resultant_length: None,
        ball_probability: None,
    })
}
