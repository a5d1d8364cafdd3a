//! Probability cultures over the utility space, with seedable samplers.
//!
//! Three models are provided. The uniform measure on the sphere of `H` is
//! the canonical generalization of the Impartial Culture: every strict
//! order of preference becomes equally likely. The Von Mises-Fisher family
//! polarizes a population around a pole `u0` with concentration `kappa`,
//! with density `C_k * exp(kappa <u, u0>)` relative to the uniform
//! *probability* measure. The Mallows family does the ordinal analogue,
//! weighting strict orders by `exp(-kappa * kendall_tau(order, pole))`.
//!
//! Sampling is deterministic: a named generator (ChaCha12) seeded from a
//! 64-bit integer, with per-agent substreams so that serial and parallel
//! population generation produce identical output.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{canonicalize, hyperplane_basis, RawUtility, UtilityPoint};
use crate::numeric::adaptive_simpson;
use crate::ordinal::{enumerate_strict_orders, kendall_tau, PreferenceOrder, MAX_ENUMERATION_M};

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

/// Deterministic random stream: ChaCha12 seeded from a 64-bit integer.
///
/// `substream(i)` derives the i-th independent stream of the same seed
/// (ChaCha's native stream mechanism), so population generation can hand
/// one stream per agent index and stay byte-reproducible under any thread
/// count.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha12Rng,
}

impl RandomStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for index `i`; index streams never overlap the
    /// root stream.
    pub fn substream(&self, index: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(index.wrapping_add(1));
        Self {
            seed: self.seed,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

// ---------------------------------------------------------------------------
// Culture specification
// ---------------------------------------------------------------------------

/// The three sampling models.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CultureKind {
    Uniform,
    Vmf,
    Mallows,
}

impl CultureKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CultureKind::Uniform => "uniform",
            CultureKind::Vmf => "vmf",
            CultureKind::Mallows => "mallows",
        }
    }
}

impl std::str::FromStr for CultureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(CultureKind::Uniform),
            "vmf" => Ok(CultureKind::Vmf),
            "mallows" => Ok(CultureKind::Mallows),
            other => Err(Error::InvalidSpec(format!("unknown culture kind {other:?}"))),
        }
    }
}

/// Center of a polarized culture: a sphere point for VMF, a strict order
/// for Mallows.
#[derive(Clone, Debug, PartialEq)]
pub enum Pole {
    Utility(UtilityPoint),
    Ranking(PreferenceOrder),
}

/// Parameters of a sampling distribution over the utility space.
///
/// Serializes to a JSON object with keys `kind`, `m`, `kappa`, `pole`,
/// `indifference_prob` and `seed`; the pole is a coordinate array (VMF,
/// canonicalized on load) or an order string (Mallows).
#[derive(Clone, Debug, PartialEq)]
pub struct CultureSpec {
    kind: CultureKind,
    m: usize,
    kappa: f64,
    pole: Option<Pole>,
    indifference_prob: f64,
    seed: u64,
}

impl CultureSpec {
    pub fn uniform(m: usize, seed: u64) -> Result<Self> {
        Self::build(CultureKind::Uniform, m, 0.0, None, 0.0, seed)
    }

    pub fn vmf(m: usize, kappa: f64, pole: UtilityPoint, seed: u64) -> Result<Self> {
        Self::build(
            CultureKind::Vmf,
            m,
            kappa,
            Some(Pole::Utility(pole)),
            0.0,
            seed,
        )
    }

    pub fn mallows(m: usize, kappa: f64, pole: PreferenceOrder, seed: u64) -> Result<Self> {
        Self::build(
            CultureKind::Mallows,
            m,
            kappa,
            Some(Pole::Ranking(pole)),
            0.0,
            seed,
        )
    }

    /// Probability of emitting the indifference point (the all-tied order
    /// for Mallows) instead of a regular draw.
    pub fn with_indifference_prob(mut self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidSpec(format!(
                "indifference_prob {p} outside [0, 1]"
            )));
        }
        self.indifference_prob = p;
        Ok(self)
    }

    fn build(
        kind: CultureKind,
        m: usize,
        kappa: f64,
        pole: Option<Pole>,
        indifference_prob: f64,
        seed: u64,
    ) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidSpec(format!("m = {m}, need m >= 2")));
        }
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::InvalidSpec(format!("kappa = {kappa}, need finite >= 0")));
        }
        if !(0.0..=1.0).contains(&indifference_prob) {
            return Err(Error::InvalidSpec(format!(
                "indifference_prob {indifference_prob} outside [0, 1]"
            )));
        }
        match (kind, &pole) {
            (CultureKind::Uniform, None) => {}
            (CultureKind::Uniform, Some(_)) => {
                return Err(Error::InvalidSpec("uniform culture takes no pole".into()));
            }
            (CultureKind::Vmf, Some(Pole::Utility(p))) => {
                if p.is_indifference() {
                    return Err(Error::InvalidSpec(
                        "vmf pole must not be the indifference point".into(),
                    ));
                }
                if p.m() != m {
                    return Err(Error::InvalidSpec(format!(
                        "vmf pole has m = {}, spec has m = {m}",
                        p.m()
                    )));
                }
            }
            (CultureKind::Mallows, Some(Pole::Ranking(o))) => {
                if !o.is_strict() {
                    return Err(Error::InvalidSpec("mallows pole must be a strict order".into()));
                }
                if o.m() != m {
                    return Err(Error::InvalidSpec(format!(
                        "mallows pole has m = {}, spec has m = {m}",
                        o.m()
                    )));
                }
                if m > MAX_ENUMERATION_M {
                    return Err(Error::InvalidSpec(format!(
                        "mallows supports m <= {MAX_ENUMERATION_M}, got {m}"
                    )));
                }
            }
            _ => {
                return Err(Error::InvalidSpec(
                    "pole type does not match culture kind".into(),
                ));
            }
        }
        Ok(Self {
            kind,
            m,
            kappa,
            pole,
            indifference_prob,
            seed,
        })
    }

    pub fn kind(&self) -> CultureKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn pole(&self) -> Option<&Pole> {
        self.pole.as_ref()
    }

    pub fn indifference_prob(&self) -> f64 {
        self.indifference_prob
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The stream all samplers for this spec start from.
    pub fn stream(&self) -> RandomStream {
        RandomStream::from_seed(self.seed)
    }
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    kind: String,
    m: usize,
    kappa: f64,
    pole: Option<PoleRepr>,
    indifference_prob: f64,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PoleRepr {
    Coords(Vec<f64>),
    Order(String),
}

impl Serialize for CultureSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pole = match &self.pole {
            None => None,
            Some(Pole::Utility(p)) => Some(PoleRepr::Coords(p.coords_or_zero())),
            Some(Pole::Ranking(o)) => Some(PoleRepr::Order(o.to_string())),
        };
        SpecRepr {
            kind: self.kind.as_str().to_string(),
            m: self.m,
            kappa: self.kappa,
            pole,
            indifference_prob: self.indifference_prob,
            seed: self.seed,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CultureSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SpecRepr::deserialize(deserializer)?;
        let kind: CultureKind = repr.kind.parse().map_err(D::Error::custom)?;
        let pole = match repr.pole {
            None => None,
            Some(PoleRepr::Coords(v)) => {
                let raw = RawUtility::new(v).map_err(D::Error::custom)?;
                Some(Pole::Utility(canonicalize(&raw)))
            }
            Some(PoleRepr::Order(s)) => {
                let o: PreferenceOrder = s.parse().map_err(D::Error::custom)?;
                Some(Pole::Ranking(o))
            }
        };
        CultureSpec::build(kind, repr.m, repr.kappa, pole, repr.indifference_prob, repr.seed)
            .map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Uniform sampling
// ---------------------------------------------------------------------------

/// Uniform draw from the sphere of `H`: `m` standard normals, projected and
/// normalized. The degenerate zero projection (probability zero) retries.
pub fn sample_uniform(m: usize, stream: &mut RandomStream) -> UtilityPoint {
    assert!(m >= 2, "the sphere of H is empty for m < 2");
    loop {
        let values: Vec<f64> = (0..m).map(|_| StandardNormal.sample(stream)).collect();
        let raw = RawUtility::new(values).expect("normals are finite");
        let point = canonicalize(&raw);
        if !point.is_indifference() {
            return point;
        }
    }
}

// ---------------------------------------------------------------------------
// Von Mises-Fisher
// ---------------------------------------------------------------------------

/// A prepared VMF culture: pole, concentration and the log normalization
/// constant (computed once by quadrature).
#[derive(Clone, Debug)]
pub struct VmfModel {
    m: usize,
    kappa: f64,
    pole: Vec<f64>,
    /// orthonormal tangent directions at the pole, ambient coordinates
    tangent: Vec<Vec<f64>>,
    log_c: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl VmfModel {
    pub fn new(spec: &CultureSpec) -> Result<Self> {
        let Some(Pole::Utility(pole)) = spec.pole() else {
            return Err(Error::InvalidSpec("vmf model needs a vmf spec".into()));
        };
        if spec.kind() != CultureKind::Vmf {
            return Err(Error::InvalidSpec("vmf model needs a vmf spec".into()));
        }
        let pole = pole.coords().expect("validated non-indifferent").to_vec();
        let m = spec.m();
        Ok(Self {
            tangent: tangent_basis(m, &pole),
            log_c: log_normalizer(m, spec.kappa()),
            m,
            kappa: spec.kappa(),
            pole,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Log density of `u` relative to the uniform probability measure:
    /// `log C_k + kappa * <u, pole>`.
    pub fn log_density(&self, u: &UtilityPoint) -> Result<f64> {
        if u.m() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                actual: u.m(),
            });
        }
        let coords = u.coords().ok_or(Error::IndifferencePoint)?;
        Ok(self.log_c + self.kappa * dot(coords, &self.pole))
    }

    /// One draw by Wood's rejection method: a colatitude cosine `w` from
    /// the marginal, a uniform tangent direction, composed as
    /// `w * pole + sqrt(1 - w^2) * t`.
    pub fn sample(&self, stream: &mut RandomStream) -> UtilityPoint {
        let m = self.m;
        if m == 2 {
            // the sphere is two points; the density fixes the odds
            let p_pole = 1.0 / (1.0 + (-2.0 * self.kappa).exp());
            let take_pole = stream.random::<f64>() < p_pole;
            let coords: Vec<f64> = if take_pole {
                self.pole.clone()
            } else {
                self.pole.iter().map(|v| -v).collect()
            };
            return UtilityPoint::from_canonical(coords).expect("pole is canonical");
        }

        let w = wood_colatitude_cos(self.kappa, m - 1, stream);
        let sin_theta = (1.0 - w * w).max(0.0).sqrt();

        // uniform direction in the tangent space (dimension m - 2)
        let t_dim = self.tangent.len();
        let mut coeffs;
        loop {
            coeffs = (0..t_dim)
                .map(|_| StandardNormal.sample(stream))
                .collect::<Vec<f64>>();
            let n = dot(&coeffs, &coeffs).sqrt();
            if n > 1e-100 {
                for c in coeffs.iter_mut() {
                    *c /= n;
                }
                break;
            }
        }

        let mut out = vec![0.0; m];
        for (o, p) in out.iter_mut().zip(&self.pole) {
            *o = w * p;
        }
        for (c, t) in coeffs.iter().zip(&self.tangent) {
            for (o, ti) in out.iter_mut().zip(t) {
                *o += sin_theta * c * ti;
            }
        }
        // renormalize against accumulated rounding
        let raw = RawUtility::new(out).expect("finite by construction");
        let point = canonicalize(&raw);
        debug_assert!(!point.is_indifference());
        point
    }
}

/// Orthonormal basis of the tangent space of the sphere of `H` at `pole`:
/// the deterministic basis of `H`, rotated by the Householder reflection
/// that sends its first vector to the pole.
fn tangent_basis(m: usize, pole: &[f64]) -> Vec<Vec<f64>> {
    let basis = hyperplane_basis(m);
    let d = m - 1;
    // pole in basis coordinates
    let p: Vec<f64> = basis.iter().map(|b| dot(pole, b)).collect();
    let mut w = p.clone();
    w[0] -= 1.0;
    let wn2 = dot(&w, &w);
    let mut tangent = Vec::with_capacity(d - 1);
    for j in 1..d {
        // column j of the reflection I - 2 w w^T / |w|^2 (identity if the
        // pole already is the first basis vector)
        let mut col = vec![0.0; d];
        col[j] = 1.0;
        if wn2 > 1e-24 {
            let c = 2.0 * w[j] / wn2;
            for (ci, wi) in col.iter_mut().zip(&w) {
                *ci -= c * wi;
            }
        }
        // back to ambient coordinates
        let mut amb = vec![0.0; m];
        for (ci, b) in col.iter().zip(&basis) {
            for (a, bi) in amb.iter_mut().zip(b) {
                *a += ci * bi;
            }
        }
        tangent.push(amb);
    }
    tangent
}

/// Cosine of the colatitude under VMF concentration `kappa` on the sphere
/// `S^(d-1)` (Ulrich's algorithm as revised by Wood: a Beta envelope with
/// exact rejection).
fn wood_colatitude_cos(kappa: f64, d: usize, stream: &mut RandomStream) -> f64 {
    debug_assert!(d >= 2);
    let a = (d - 1) as f64;
    let b = a / (2.0 * kappa + (4.0 * kappa * kappa + a * a).sqrt());
    let x0 = (1.0 - b) / (1.0 + b);
    let c = kappa * x0 + a * (1.0 - x0 * x0).ln();
    let beta = Beta::new(a / 2.0, a / 2.0).expect("valid shape");
    loop {
        let z: f64 = beta.sample(stream);
        let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        let u: f64 = stream.random();
        if kappa * w + a * (1.0 - x0 * w).ln() - c >= u.ln() {
            return w.clamp(-1.0, 1.0);
        }
    }
}

/// `log C_k` for the density `C_k exp(kappa <u, u0>)` relative to the
/// uniform probability measure on the sphere of `H`:
/// `1/C_k = int exp(k cos t) sin^(m-3) t dt / int sin^(m-3) t dt`.
/// The integrand is shifted by `exp(-kappa)` to avoid overflow.
fn log_normalizer(m: usize, kappa: f64) -> f64 {
    if kappa == 0.0 {
        return 0.0;
    }
    if m == 2 {
        // two-point sphere: 1/C = cosh(kappa)
        return -(kappa + (-2.0 * kappa).exp().ln_1p() - std::f64::consts::LN_2);
    }
    let pow = (m - 3) as f64;
    let shifted = |t: f64| (kappa * (t.cos() - 1.0)).exp() * t.sin().powf(pow);
    let plain = |t: f64| t.sin().powf(pow);
    let num = adaptive_simpson(&shifted, 0.0, std::f64::consts::PI, 1e-14);
    let den = adaptive_simpson(&plain, 0.0, std::f64::consts::PI, 1e-14);
    -(kappa + num.ln() - den.ln())
}

// ---------------------------------------------------------------------------
// Mallows
// ---------------------------------------------------------------------------

struct MallowsRim {
    reference: Vec<usize>,
    phi: f64,
}

impl MallowsRim {
    fn new(spec: &CultureSpec) -> Result<Self> {
        let Some(Pole::Ranking(pole)) = spec.pole() else {
            return Err(Error::InvalidSpec("mallows sampler needs a mallows spec".into()));
        };
        Ok(Self {
            reference: pole.ranking().expect("validated strict"),
            phi: (-spec.kappa()).exp(),
        })
    }

    /// Repeated-insertion draw: item `j` of the reference (1-based) lands
    /// at position `i` in `1..=j` with probability `phi^(j-i) / Z_j`, which
    /// composes to exactly `phi^kendall_tau(order, pole) / Z`.
    fn sample(&self, stream: &mut RandomStream) -> PreferenceOrder {
        let m = self.reference.len();
        let mut list: Vec<usize> = Vec::with_capacity(m);
        for (j, &item) in self.reference.iter().enumerate() {
            let slots = j + 1;
            // weights phi^(slots-i) for i = 1..=slots, accumulated from the
            // bottom slot (weight 1) upwards
            let mut total = 0.0;
            let mut weight = 1.0;
            for _ in 0..slots {
                total += weight;
                weight *= self.phi;
            }
            let target = stream.random::<f64>() * total;
            let mut acc = 0.0;
            let mut weight = 1.0;
            let mut pos = 0; // counted from the bottom
            for k in 0..slots {
                acc += weight;
                if target < acc || k == slots - 1 {
                    pos = k;
                    break;
                }
                weight *= self.phi;
            }
            list.insert(slots - 1 - pos, item);
        }
        PreferenceOrder::strict(&list).expect("insertion keeps a permutation")
    }
}

/// One exact Mallows draw via repeated insertion.
pub fn sample_mallows(spec: &CultureSpec, stream: &mut RandomStream) -> Result<PreferenceOrder> {
    if spec.kind() != CultureKind::Mallows {
        return Err(Error::InvalidSpec("sample_mallows needs a mallows spec".into()));
    }
    Ok(MallowsRim::new(spec)?.sample(stream))
}

/// The full Mallows distribution as an explicit table over all `m!` strict
/// orders; exact inverse-CDF sampling and the normalizer come for free.
pub struct MallowsEnumeration {
    orders: Vec<PreferenceOrder>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl MallowsEnumeration {
    pub fn new(spec: &CultureSpec) -> Result<Self> {
        let Some(Pole::Ranking(pole)) = spec.pole() else {
            return Err(Error::InvalidSpec("mallows table needs a mallows spec".into()));
        };
        let orders = enumerate_strict_orders(spec.m())?;
        let mut weights = Vec::with_capacity(orders.len());
        for o in &orders {
            let delta = kendall_tau(o, pole)? as f64;
            weights.push((-spec.kappa() * delta).exp());
        }
        let z: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / z).collect();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cdf.push(acc);
        }
        Ok(Self { orders, probs, cdf })
    }

    pub fn orders(&self) -> &[PreferenceOrder] {
        &self.orders
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Inverse-CDF draw; distributionally identical to the insertion
    /// sampler (not draw-for-draw).
    pub fn sample(&self, stream: &mut RandomStream) -> PreferenceOrder {
        let u: f64 = stream.random();
        let i = self.cdf.partition_point(|&c| c <= u);
        self.orders[i.min(self.orders.len() - 1)].clone()
    }
}

/// One exact Mallows draw by enumeration (cross-check for the insertion
/// sampler; prefer [`MallowsEnumeration`] in loops).
pub fn sample_mallows_enumerated(
    spec: &CultureSpec,
    stream: &mut RandomStream,
) -> Result<PreferenceOrder> {
    Ok(MallowsEnumeration::new(spec)?.sample(stream))
}

/// Exact Mallows probability of a strict order:
/// `exp(-kappa d(o, pole)) / sum_t exp(-kappa d(t, pole))`.
pub fn mallows_pmf(order: &PreferenceOrder, spec: &CultureSpec) -> Result<f64> {
    let Some(Pole::Ranking(pole)) = spec.pole() else {
        return Err(Error::InvalidSpec("mallows_pmf needs a mallows spec".into()));
    };
    let delta = kendall_tau(order, pole)? as f64;
    let orders = enumerate_strict_orders(spec.m())?;
    let z: f64 = orders
        .iter()
        .map(|o| {
            let d = kendall_tau(o, pole).expect("enumerated orders are strict") as f64;
            (-spec.kappa() * d).exp()
        })
        .sum();
    Ok((-spec.kappa() * delta).exp() / z)
}

// ---------------------------------------------------------------------------
// Population sampling with the indifference mixture
// ---------------------------------------------------------------------------

/// One sampled agent: a point for the continuous cultures, an order for
/// Mallows.
#[derive(Clone, Debug, PartialEq)]
pub enum Sample {
    Utility(UtilityPoint),
    Ranking(PreferenceOrder),
}

enum SamplerKind {
    Uniform,
    Vmf(Box<VmfModel>),
    Mallows(MallowsRim),
}

/// A culture compiled for repeated sampling (normalizers and bases are
/// computed once).
pub struct CultureSampler {
    m: usize,
    indifference_prob: f64,
    inner: SamplerKind,
}

impl CultureSampler {
    pub fn new(spec: &CultureSpec) -> Result<Self> {
        let inner = match spec.kind() {
            CultureKind::Uniform => SamplerKind::Uniform,
            CultureKind::Vmf => SamplerKind::Vmf(Box::new(VmfModel::new(spec)?)),
            CultureKind::Mallows => SamplerKind::Mallows(MallowsRim::new(spec)?),
        };
        Ok(Self {
            m: spec.m(),
            indifference_prob: spec.indifference_prob(),
            inner,
        })
    }

    /// One agent: a Bernoulli indifference draw first, then the culture
    /// draw.
    pub fn sample(&self, stream: &mut RandomStream) -> Sample {
        let indifferent = stream.random::<f64>() < self.indifference_prob;
        match &self.inner {
            SamplerKind::Uniform => Sample::Utility(if indifferent {
                UtilityPoint::indifference(self.m)
            } else {
                sample_uniform(self.m, stream)
            }),
            SamplerKind::Vmf(model) => Sample::Utility(if indifferent {
                UtilityPoint::indifference(self.m)
            } else {
                model.sample(stream)
            }),
            SamplerKind::Mallows(rim) => Sample::Ranking(if indifferent {
                PreferenceOrder::all_tied(self.m).expect("m >= 2")
            } else {
                rim.sample(stream)
            }),
        }
    }

    /// Agent `index` of the population rooted at `stream`: always drawn
    /// from the index-derived substream.
    pub fn sample_agent(&self, stream: &RandomStream, index: u64) -> Sample {
        self.sample(&mut stream.substream(index))
    }
}

/// One draw with everything prepared on the fly; see [`CultureSampler`]
/// for loops.
pub fn sample_one(spec: &CultureSpec, stream: &mut RandomStream) -> Result<Sample> {
    Ok(CultureSampler::new(spec)?.sample(stream))
}

/// `n` independent agents. Agent `i` uses `stream.substream(i)`, so the
/// output is a pure function of (spec, stream seed, n) and parallel
/// generation over indices reproduces it exactly.
pub fn sample_population(spec: &CultureSpec, n: usize, stream: &RandomStream) -> Result<Vec<Sample>> {
    let sampler = CultureSampler::new(spec)?;
    Ok((0..n)
        .map(|i| sampler.sample_agent(stream, i as u64))
        .collect())
}

/// Density of a VMF culture at `u`, log scale, relative to the uniform
/// probability measure. Builds the normalizer each call; use [`VmfModel`]
/// when evaluating many points.
pub fn vmf_log_density(u: &UtilityPoint, spec: &CultureSpec) -> Result<f64> {
    VmfModel::new(spec)?.log_density(u)
}

/// Convenience VMF draw; see [`VmfModel::sample`].
pub fn sample_vmf(spec: &CultureSpec, stream: &mut RandomStream) -> Result<UtilityPoint> {
    Ok(VmfModel::new(spec)?.sample(stream))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance;

    fn canon(values: &[f64]) -> UtilityPoint {
        canonicalize(&RawUtility::new(values.to_vec()).unwrap())
    }

    fn order(s: &str) -> PreferenceOrder {
        s.parse().unwrap()
    }

    #[test]
    fn streams_are_deterministic_and_split() {
        let mut a = RandomStream::from_seed(7);
        let mut b = RandomStream::from_seed(7);
        for _ in 0..32 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut s0 = a.substream(0);
        let mut s1 = a.substream(1);
        let (x0, x1) = (s0.next_u64(), s1.next_u64());
        assert_ne!(x0, x1);
        // substreams derive from the seed, not the stream position
        assert_eq!(a.substream(0).next_u64(), x0);
    }

    #[test]
    fn spec_validation() {
        assert!(CultureSpec::uniform(1, 0).is_err());
        assert!(CultureSpec::uniform(4, 0).is_ok());
        assert!(CultureSpec::vmf(3, -1.0, canon(&[1.0, 0.0, -1.0]), 0).is_err());
        assert!(CultureSpec::vmf(3, 1.0, UtilityPoint::indifference(3), 0).is_err());
        assert!(CultureSpec::vmf(4, 1.0, canon(&[1.0, 0.0, -1.0]), 0).is_err());
        assert!(CultureSpec::mallows(3, 1.0, order("1>2=3"), 0).is_err());
        assert!(CultureSpec::mallows(3, 1.0, order("1>2>3"), 0).is_ok());
        assert!(CultureSpec::uniform(4, 0)
            .unwrap()
            .with_indifference_prob(1.5)
            .is_err());
    }

    #[test]
    fn spec_json_roundtrip() {
        let specs = [
            CultureSpec::uniform(4, 99).unwrap(),
            CultureSpec::vmf(4, 10.0, canon(&[0.5, 0.5, -0.5, -0.5]), 1).unwrap(),
            CultureSpec::mallows(3, 1.5, order("2>1>3"), 3)
                .unwrap()
                .with_indifference_prob(0.25)
                .unwrap(),
        ];
        for spec in specs {
            let json = serde_json::to_string(&spec).unwrap();
            let back: CultureSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(spec, back);
        }
        // a raw (non-canonical) pole is canonicalized on load
        let json = r#"{"kind":"vmf","m":3,"kappa":2.0,"pole":[2.0,1.0,0.0],"indifference_prob":0.0,"seed":5}"#;
        let spec: CultureSpec = serde_json::from_str(json).unwrap();
        let Some(Pole::Utility(p)) = spec.pole() else {
            panic!("expected utility pole")
        };
        assert!((p.coords().unwrap()[0] - 0.7071067811865475).abs() < 1e-12);
    }

    #[test]
    fn uniform_draws_are_canonical_and_reproducible() {
        let mut s1 = RandomStream::from_seed(11);
        let mut s2 = RandomStream::from_seed(11);
        for _ in 0..200 {
            let a = sample_uniform(4, &mut s1);
            let b = sample_uniform(4, &mut s2);
            assert_eq!(a, b);
            let c = a.coords().unwrap();
            assert!(c.iter().sum::<f64>().abs() <= 1e-12);
            assert!((c.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn uniform_coordinate_means_vanish() {
        let mut stream = RandomStream::from_seed(3);
        let n = 20_000;
        let mut sums = [0.0f64; 4];
        for _ in 0..n {
            let p = sample_uniform(4, &mut stream);
            for (s, c) in sums.iter_mut().zip(p.coords().unwrap()) {
                *s += c;
            }
        }
        // coordinate variance is 1/(m-1) hmm; 4 sigma over n draws
        let se = (1.0 / 3.0f64 / n as f64).sqrt();
        for s in sums {
            assert!((s / n as f64).abs() < 4.0 * se, "mean {}", s / n as f64);
        }
    }

    #[test]
    fn vmf_concentrates_near_pole() {
        let pole = canon(&[1.0, 0.3, -0.6, -0.7]);
        let spec = CultureSpec::vmf(4, 50.0, pole.clone(), 21).unwrap();
        let model = VmfModel::new(&spec).unwrap();
        let mut stream = spec.stream();
        let n = 20_000;
        let mut mean = vec![0.0f64; 4];
        for _ in 0..n {
            let p = model.sample(&mut stream);
            let c = p.coords().unwrap();
            assert!(c.iter().sum::<f64>().abs() <= 1e-12);
            assert!((c.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() <= 1e-12);
            for (acc, c) in mean.iter_mut().zip(c) {
                *acc += c;
            }
        }
        for v in mean.iter_mut() {
            *v /= n as f64;
        }
        let dir = canon(&mean);
        let angle = distance(&dir, &pole).unwrap();
        assert!(angle < 0.05, "mean direction is {angle} rad from the pole");
    }

    #[test]
    fn vmf_m2_matches_two_point_density() {
        let pole = canon(&[1.0, 0.0]);
        let spec = CultureSpec::vmf(2, 1.0, pole.clone(), 5).unwrap();
        let model = VmfModel::new(&spec).unwrap();
        let mut stream = spec.stream();
        let n = 50_000;
        let mut hits = 0;
        for _ in 0..n {
            if model.sample(&mut stream) == pole {
                hits += 1;
            }
        }
        let want = 1.0 / (1.0 + (-2.0f64).exp());
        let got = hits as f64 / n as f64;
        assert!((got - want).abs() < 4.0 * (want * (1.0 - want) / n as f64).sqrt());
        // density checks out too
        let ld = model.log_density(&pole).unwrap();
        assert!((ld - (1.0 - 1.0f64.cosh().ln())).abs() < 1e-12);
    }

    #[test]
    fn vmf_log_density_reference_values() {
        // log C_k frozen from 50-digit quadrature
        let cases = [
            (3usize, 1.0, -0.23591435850717865),
            (3, 5.0, -3.3046817758225333),
            (4, 1.0, -0.16143936157119562),
            (4, 5.0, -2.697369506045584),
            (4, 20.0, -16.311120545886062),
            (5, 1.0, -0.12249919306911403),
            (5, 5.0, -2.2756512986715203),
        ];
        for (m, kappa, want) in cases {
            let got = log_normalizer(m, kappa);
            assert!(
                (got - want).abs() < 1e-10,
                "m={m} kappa={kappa}: {got} vs {want}"
            );
        }
        assert_eq!(log_normalizer(4, 0.0), 0.0);
    }

    #[test]
    fn vmf_density_ratio_across_poles() {
        let pole = canon(&[1.0, -1.0, 0.5, -0.5]);
        let spec = CultureSpec::vmf(4, 3.0, pole.clone(), 0).unwrap();
        let model = VmfModel::new(&spec).unwrap();
        let there = model.log_density(&pole).unwrap();
        let back = model.log_density(&crate::geometry::invert(&pole)).unwrap();
        assert!((there - back - 6.0).abs() < 1e-12); // e^{2 kappa}
        assert!(model.log_density(&UtilityPoint::indifference(4)).is_err());
    }

    #[test]
    fn mallows_insertion_matches_pmf() {
        let spec = CultureSpec::mallows(3, 1.0, order("1>2>3"), 17).unwrap();
        let mut stream = spec.stream();
        let orders = enumerate_strict_orders(3).unwrap();
        let n = 200_000;
        let mut counts = std::collections::BTreeMap::new();
        for _ in 0..n {
            let o = sample_mallows(&spec, &mut stream).unwrap();
            *counts.entry(o).or_insert(0usize) += 1;
        }
        for o in &orders {
            let p = mallows_pmf(o, &spec).unwrap();
            let got = *counts.get(o).unwrap_or(&0) as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (got - p).abs() < 4.0 * se,
                "{o}: freq {got} vs pmf {p} (se {se})"
            );
        }
    }

    #[test]
    fn mallows_pmf_reference_value() {
        // delta multiset over S_3 is {0,1,1,2,2,3}
        let spec = CultureSpec::mallows(3, 1.0, order("1>2>3"), 0).unwrap();
        let p = mallows_pmf(&order("1>2>3"), &spec).unwrap();
        let want = 0.4863301075752072; // 1/(1 + 2/e + 2/e^2 + 1/e^3)
        assert!((p - want).abs() < 1e-12);

        // kappa = 0 is uniform, and the pmf sums to one
        let spec0 = CultureSpec::mallows(3, 0.0, order("1>2>3"), 0).unwrap();
        let total: f64 = enumerate_strict_orders(3)
            .unwrap()
            .iter()
            .map(|o| mallows_pmf(o, &spec0).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((mallows_pmf(&order("3>1>2"), &spec0).unwrap() - 1.0 / 6.0).abs() < 1e-12);

        // the pole is the unique mode for kappa > 0
        let spec = CultureSpec::mallows(4, 0.7, order("2>4>1>3"), 0).unwrap();
        let mode_p = mallows_pmf(&order("2>4>1>3"), &spec).unwrap();
        for o in enumerate_strict_orders(4).unwrap() {
            if o != order("2>4>1>3") {
                assert!(mallows_pmf(&o, &spec).unwrap() < mode_p);
            }
        }
    }

    #[test]
    fn population_mixture_and_determinism() {
        let spec = CultureSpec::uniform(3, 123)
            .unwrap()
            .with_indifference_prob(1.0)
            .unwrap();
        let pop = sample_population(&spec, 50, &spec.stream()).unwrap();
        assert!(pop.iter().all(|s| matches!(
            s,
            Sample::Utility(p) if p.is_indifference()
        )));

        let spec = CultureSpec::vmf(4, 2.0, canon(&[1.0, 0.0, 0.0, -1.0]), 5)
            .unwrap()
            .with_indifference_prob(0.3)
            .unwrap();
        let a = sample_population(&spec, 64, &spec.stream()).unwrap();
        let b = sample_population(&spec, 64, &spec.stream()).unwrap();
        assert_eq!(a, b);
        // agents are index-addressable
        let sampler = CultureSampler::new(&spec).unwrap();
        for (i, s) in a.iter().enumerate() {
            assert_eq!(*s, sampler.sample_agent(&spec.stream(), i as u64));
        }

        let spec = CultureSpec::mallows(3, 0.5, order("1>2>3"), 9)
            .unwrap()
            .with_indifference_prob(1.0)
            .unwrap();
        let pop = sample_population(&spec, 10, &spec.stream()).unwrap();
        assert!(pop.iter().all(|s| matches!(
            s,
            Sample::Ranking(o) if o.tier_count() == 1
        )));
    }

    #[test]
    fn indifference_fraction_tracks_probability() {
        let spec = CultureSpec::uniform(3, 77)
            .unwrap()
            .with_indifference_prob(0.1)
            .unwrap();
        let n = 50_000;
        let pop = sample_population(&spec, n, &spec.stream()).unwrap();
        let frac = pop
            .iter()
            .filter(|s| matches!(s, Sample::Utility(p) if p.is_indifference()))
            .count() as f64
            / n as f64;
        let se = (0.1f64 * 0.9 / n as f64).sqrt();
        assert!((frac - 0.1).abs() < 4.0 * se, "fraction {frac}");
    }
}
