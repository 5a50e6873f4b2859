//! Random-vector specifications, the standard-normal to physical-space map,
//! and seeded sampling primitives.
//!
//! All acquisition geometry lives in U-space (independent standard normals).
//! Marginals are independent, so the isoprobabilistic transform reduces to
//! one monotone map per component, `x_j = F_j^{-1}(Phi(u_j))`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Probabilities are clamped to `[EPS_PROB, 1 - EPS_PROB]` before inverting a CDF.
pub const EPS_PROB: f64 = 1e-16;

/// Number of samples generated per independent sub-stream of a Monte Carlo
/// population. Fixing it makes a population independent of how it is split
/// across batches or workers.
pub const MC_CHUNK: usize = 1 << 16;

static CLAMP_EVENTS: AtomicU64 = AtomicU64::new(0);

/// Number of times a CDF value had to be clamped away from 0 or 1.
pub fn clamp_events() -> u64 {
    CLAMP_EVENTS.load(Ordering::Relaxed)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse standard normal CDF: Acklam's rational approximation followed by
/// one Halley refinement step against `normal_cdf`.
pub fn normal_ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley step; the residual is taken on the smaller tail for accuracy.
    let e = if x < 0.0 {
        normal_cdf(x) - p
    } else {
        (1.0 - p) - normal_cdf(-x)
    };
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Normal,
    Lognormal,
    /// Type-I largest-value distribution.
    Gumbel,
}

/// One marginal distribution in its internal parameterisation.
///
/// * normal: `param1` = mean, `param2` = standard deviation
/// * lognormal: `param1` = mean of ln X, `param2` = std of ln X
/// * gumbel: `param1` = location `a`, `param2` = scale `b`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    pub kind: DistributionKind,
    pub param1: f64,
    pub param2: f64,
}

impl Marginal {
    pub fn new(kind: DistributionKind, param1: f64, param2: f64) -> Result<Self> {
        if !(param2 > 0.0) || !param2.is_finite() || !param1.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "{kind:?} marginal needs finite parameters with param2 > 0, got ({param1}, {param2})"
            )));
        }
        Ok(Marginal { kind, param1, param2 })
    }

    pub fn standard_normal() -> Self {
        Marginal { kind: DistributionKind::Normal, param1: 0.0, param2: 1.0 }
    }

    /// Builds a marginal from its mean and standard deviation.
    pub fn from_moments(kind: DistributionKind, mean: f64, std: f64) -> Result<Self> {
        if !(std > 0.0) || !std.is_finite() {
            return Err(Error::InvalidParameter(format!("standard deviation must be > 0, got {std}")));
        }
        match kind {
            DistributionKind::Normal => Marginal::new(kind, mean, std),
            DistributionKind::Lognormal => {
                if !(mean > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "lognormal mean must be > 0, got {mean}"
                    )));
                }
                let cv = std / mean;
                let sigma_ln = (cv * cv).ln_1p().sqrt();
                let mu_ln = mean.ln() - 0.5 * sigma_ln * sigma_ln;
                Marginal::new(kind, mu_ln, sigma_ln)
            }
            DistributionKind::Gumbel => {
                let scale = std * 6f64.sqrt() / std::f64::consts::PI;
                let location = mean - EULER_GAMMA * scale;
                Marginal::new(kind, location, scale)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self.kind {
            DistributionKind::Normal => self.param1,
            DistributionKind::Lognormal => (self.param1 + 0.5 * self.param2 * self.param2).exp(),
            DistributionKind::Gumbel => self.param1 + EULER_GAMMA * self.param2,
        }
    }

    pub fn std(&self) -> f64 {
        match self.kind {
            DistributionKind::Normal => self.param2,
            DistributionKind::Lognormal => {
                let s2 = self.param2 * self.param2;
                self.mean() * s2.exp_m1().sqrt()
            }
            DistributionKind::Gumbel => self.param2 * std::f64::consts::PI / 6f64.sqrt(),
        }
    }

    /// Maps a standard-normal coordinate to this marginal.
    pub fn from_standard(&self, u: f64) -> f64 {
        match self.kind {
            DistributionKind::Normal => self.param1 + self.param2 * u,
            DistributionKind::Lognormal => (self.param1 + self.param2 * u).exp(),
            DistributionKind::Gumbel => {
                // -ln F(x) = exp(-(x-a)/b); evaluate -ln Phi(u) on the accurate tail.
                let mut lower = normal_cdf(u);
                let mut upper = normal_cdf(-u);
                if lower < EPS_PROB || upper < EPS_PROB {
                    CLAMP_EVENTS.fetch_add(1, Ordering::Relaxed);
                    lower = lower.max(EPS_PROB);
                    upper = upper.max(EPS_PROB);
                }
                let neg_ln_p = if u > 0.0 { -(-upper).ln_1p() } else { -lower.ln() };
                self.param1 - self.param2 * neg_ln_p.ln()
            }
        }
    }
}

/// Independent marginals of the physical random vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomVectorSpec {
    marginals: Vec<Marginal>,
}

impl RandomVectorSpec {
    pub fn new(marginals: Vec<Marginal>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidParameter("random vector needs at least one marginal".into()));
        }
        Ok(RandomVectorSpec { marginals })
    }

    /// `dim` independent standard normals; `u_to_x` is the identity.
    pub fn standard_normal(dim: usize) -> Self {
        assert!(dim >= 1);
        RandomVectorSpec { marginals: vec![Marginal::standard_normal(); dim] }
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn is_standard_normal(&self) -> bool {
        self.marginals.iter().all(|m| *m == Marginal::standard_normal())
    }

    pub fn u_to_x(&self, u: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; u.len()];
        self.u_to_x_into(u, &mut x);
        x
    }

    pub fn u_to_x_into(&self, u: &[f64], x: &mut [f64]) {
        assert_eq!(u.len(), self.dim(), "point dimension does not match the random vector");
        for ((xj, &uj), m) in x.iter_mut().zip(u).zip(&self.marginals) {
            *xj = m.from_standard(uj);
        }
    }
}

/// Row-major matrix of sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    cols: usize,
    values: Vec<f64>,
}

impl SampleMatrix {
    pub fn new(cols: usize) -> Self {
        assert!(cols >= 1);
        SampleMatrix { cols, values: Vec::new() }
    }

    pub fn from_flat(cols: usize, values: Vec<f64>) -> Result<Self> {
        if cols == 0 || values.len() % cols != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} values do not form rows of width {cols}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("sample matrix entries must be finite".into()));
        }
        Ok(SampleMatrix { cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("rows have unequal lengths".into()));
        }
        SampleMatrix::from_flat(cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.values.len() / self.cols
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.cols)
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols);
        self.values.extend_from_slice(row);
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter_rows().map(<[f64]>::to_vec).collect()
    }
}

/// Identifies a reproducible random stream.
///
/// Streams with the same `(seed, stream_id)` yield identical sequences;
/// ChaCha's 64-bit stream parameter keeps distinct ids independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: i64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: i64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id as u64);
        rng
    }

    /// A child stream keyed by `(self, index)`.
    pub fn substream(&self, index: u64) -> RngStream {
        let mixed = splitmix64(self.seed ^ splitmix64(self.stream_id as u64 ^ 0x6a09_e667_f3bc_c909));
        RngStream { seed: mixed, stream_id: index as i64 }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// An unbounded standard-normal population in U-space.
///
/// Sample `i` lives in chunk `i / MC_CHUNK`, and each chunk is drawn from
/// its own sub-stream, so any index range can be regenerated independently.
///
/// Clones share one draw counter, so a caller can check how many samples
/// were generated through any handle.
#[derive(Debug, Clone)]
pub struct McPopulation {
    dim: usize,
    stream: RngStream,
    draws: Arc<AtomicU64>,
}

impl McPopulation {
    pub fn new(dim: usize, stream: RngStream) -> Self {
        assert!(dim >= 1);
        McPopulation { dim, stream, draws: Arc::new(AtomicU64::new(0)) }
    }

    pub fn stream(&self) -> RngStream {
        self.stream
    }

    /// Samples generated so far through this population or its clones.
    pub fn drawn(&self) -> u64 {
        self.draws.load(Ordering::Relaxed)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn chunk(&self, index: usize, len: usize) -> Vec<f64> {
        self.draws.fetch_add(len as u64, Ordering::Relaxed);
        let mut rng = self.stream.substream(index as u64).rng();
        (0..len * self.dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
    }

    /// Calls `f(first_index, flat_rows)` for consecutive slices covering
    /// `start..end`, each slice at most one chunk long.
    pub fn for_each_chunk<F>(&self, start: usize, end: usize, mut f: F)
    where
        F: FnMut(usize, &[f64]),
    {
        let mut pos = start;
        while pos < end {
            let chunk = pos / MC_CHUNK;
            let chunk_start = chunk * MC_CHUNK;
            let chunk_end = (chunk_start + MC_CHUNK).min(end);
            let values = self.chunk(chunk, chunk_end - chunk_start);
            let offset = (pos - chunk_start) * self.dim;
            f(pos, &values[offset..]);
            pos = chunk_end;
        }
    }

    /// Chunk-aligned work items covering `start..end`, for parallel consumers.
    pub fn chunk_ranges(start: usize, end: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut pos = start;
        while pos < end {
            let next = ((pos / MC_CHUNK + 1) * MC_CHUNK).min(end);
            out.push((pos, next));
            pos = next;
        }
        out
    }

    pub fn rows(&self, start: usize, end: usize) -> SampleMatrix {
        let mut values = Vec::with_capacity((end - start) * self.dim);
        self.for_each_chunk(start, end, |_, rows| values.extend_from_slice(rows));
        SampleMatrix { cols: self.dim, values }
    }
}

/// `n` i.i.d. standard-normal vectors of the spec's dimension.
pub fn sample_mc(n: usize, spec: &RandomVectorSpec, stream: RngStream) -> Result<SampleMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("Monte Carlo sample size must be >= 1".into()));
    }
    Ok(McPopulation::new(spec.dim(), stream).rows(0, n))
}

/// `m` points in `[-bound, bound]^dim`, one point per stratum on every axis.
pub fn latin_hypercube(m: usize, dim: usize, bound: f64, stream: RngStream) -> Result<SampleMatrix> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("Latin hypercube needs m >= 2, got {m}")));
    }
    if !(bound > 0.0) || dim == 0 {
        return Err(Error::InvalidParameter(format!(
            "Latin hypercube needs bound > 0 and dim >= 1, got bound {bound}, dim {dim}"
        )));
    }
    let mut rng = stream.rng();
    let width = 2.0 * bound / m as f64;
    let mut values = vec![0.0; m * dim];
    let mut perm: Vec<usize> = (0..m).collect();
    for d in 0..dim {
        perm.shuffle(&mut rng);
        for (i, &stratum) in perm.iter().enumerate() {
            let offset: f64 = rng.gen();
            let v = -bound + (stratum as f64 + offset) * width;
            values[i * dim + d] = v.clamp(-bound, bound);
        }
    }
    Ok(SampleMatrix { cols: dim, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cdf_reference_values() {
        assert_relative_eq!(normal_cdf(0.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(normal_cdf(-2.0), 0.022_750_131_948_179_21, max_relative = 1e-12);
        assert_relative_eq!(normal_cdf(-3.5), 2.326_290_790_355_25e-4, max_relative = 1e-12);
        assert_relative_eq!(normal_cdf(-6.0), 9.865_876_450_376_98e-10, max_relative = 1e-10);
    }

    #[test]
    fn ppf_inverts_cdf() {
        for &p in &[1e-12, 1e-8, 2.32e-4, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9] {
            let x = normal_ppf(p);
            assert_relative_eq!(normal_cdf(x), p, max_relative = 1e-10);
        }
        assert_relative_eq!(normal_ppf(normal_cdf(-3.5)), -3.5, epsilon = 1e-10);
    }

    #[test]
    fn normal_moments_pass_through() {
        let m = Marginal::from_moments(DistributionKind::Normal, 1.0, 0.05).unwrap();
        assert_eq!(m, Marginal { kind: DistributionKind::Normal, param1: 1.0, param2: 0.05 });
    }

    #[test]
    fn lognormal_moment_matching() {
        let m = Marginal::from_moments(DistributionKind::Lognormal, 2e-3, 2e-4).unwrap();
        assert_relative_eq!(m.param2, 0.099_751_345_119_592_7, max_relative = 1e-9);
        assert_relative_eq!(m.param1, (2e-3f64).ln() - 0.5 * m.param2 * m.param2, max_relative = 1e-14);
        assert_relative_eq!(m.mean(), 2e-3, max_relative = 1e-12);
        assert_relative_eq!(m.std(), 2e-4, max_relative = 1e-12);
    }

    #[test]
    fn gumbel_moment_matching() {
        let m = Marginal::from_moments(DistributionKind::Gumbel, 5e4, 7.5e3).unwrap();
        assert_relative_eq!(m.param2, 5847.726_009, max_relative = 1e-9);
        assert_relative_eq!(m.param1, 46624.600_943, max_relative = 1e-9);
        assert_relative_eq!(m.mean(), 5e4, max_relative = 1e-12);
        assert_relative_eq!(m.std(), 7.5e3, max_relative = 1e-12);
    }

    #[test]
    fn invalid_moments_rejected() {
        assert!(Marginal::from_moments(DistributionKind::Normal, 1.0, 0.0).is_err());
        assert!(Marginal::from_moments(DistributionKind::Gumbel, 1.0, -1.0).is_err());
        assert!(Marginal::from_moments(DistributionKind::Lognormal, 0.0, 1.0).is_err());
        assert!(Marginal::from_moments(DistributionKind::Lognormal, -2.0, 1.0).is_err());
    }

    #[test]
    fn medians_at_origin() {
        let normal = Marginal::from_moments(DistributionKind::Normal, 1.0, 0.05).unwrap();
        assert_eq!(normal.from_standard(0.0), 1.0);
        let logn = Marginal::from_moments(DistributionKind::Lognormal, 2e-3, 2e-4).unwrap();
        assert_relative_eq!(logn.from_standard(0.0), 2e-3 / 1.01f64.sqrt(), max_relative = 1e-12);
        assert_eq!(Marginal::standard_normal().from_standard(2.0), 2.0);
    }

    #[test]
    fn gumbel_quantile_matches_cdf() {
        let m = Marginal::from_moments(DistributionKind::Gumbel, 5e4, 7.5e3).unwrap();
        for &u in &[-5.0, -1.0, 0.0, 1.5, 4.0, 7.0] {
            let x = m.from_standard(u);
            let cdf = (-(-(x - m.param1) / m.param2).exp()).exp();
            if u < 0.0 {
                assert_relative_eq!(cdf, normal_cdf(u), max_relative = 1e-9);
            } else {
                assert_relative_eq!(1.0 - cdf, normal_cdf(-u), max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn gumbel_far_tail_clamps() {
        let m = Marginal::from_moments(DistributionKind::Gumbel, 0.0, 1.0).unwrap();
        let before = clamp_events();
        let x = m.from_standard(-40.0);
        assert!(x.is_finite());
        assert!(clamp_events() > before);
    }

    #[test]
    fn lhs_rejects_small_designs() {
        assert!(latin_hypercube(1, 2, 3.0, RngStream::new(1, 0)).is_err());
        assert!(latin_hypercube(5, 2, 0.0, RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn lhs_fills_every_stratum() {
        let s = latin_hypercube(6, 2, 3.0, RngStream::new(11, 0)).unwrap();
        for d in 0..2 {
            let mut hit = [false; 6];
            for row in s.iter_rows() {
                hit[((row[d] + 3.0) / 1.0).floor().min(5.0) as usize] = true;
            }
            assert!(hit.iter().all(|&h| h));
        }
        assert_eq!(s, latin_hypercube(6, 2, 3.0, RngStream::new(11, 0)).unwrap());
    }

    #[test]
    fn lhs_bounded_in_high_dimension() {
        let s = latin_hypercube(20, 10, 3.0, RngStream::new(5, 0)).unwrap();
        assert_eq!((s.rows(), s.cols()), (20, 10));
        assert!(s.as_flat().iter().all(|v| (-3.0..=3.0).contains(v)));
    }

    #[test]
    fn substreams_are_distinct() {
        let base = RngStream::new(7, -1);
        assert_ne!(base.substream(0), base.substream(1));
        let a: u64 = base.substream(0).rng().gen();
        let b: u64 = base.substream(1).rng().gen();
        assert_ne!(a, b);
        let c: u64 = RngStream::new(7, 1).rng().gen();
        let d: u64 = RngStream::new(7, 2).rng().gen();
        assert_ne!(c, d);
    }

    #[test]
    fn population_ranges_are_consistent() {
        let pop = McPopulation::new(3, RngStream::new(4, -1));
        let whole = pop.rows(0, MC_CHUNK + 10);
        let tail = pop.rows(MC_CHUNK - 5, MC_CHUNK + 10);
        assert_eq!(tail.row(0), whole.row(MC_CHUNK - 5));
        assert_eq!(tail.row(14), whole.row(MC_CHUNK + 9));
        let ranges = McPopulation::chunk_ranges(10, 2 * MC_CHUNK + 1);
        assert_eq!(ranges, vec![(10, MC_CHUNK), (MC_CHUNK, 2 * MC_CHUNK), (2 * MC_CHUNK, 2 * MC_CHUNK + 1)]);
    }
}
