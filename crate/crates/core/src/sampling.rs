//! Bounded densities and the binomial / Poisson city samplers.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::geom::{AxisSquare, CityLayout, Point2};
use crate::math;
use crate::rng::{Philox4x32, StreamSeed};

/// Proposals allowed for a single point before the sampler gives up.
pub const MAX_PROPOSALS: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("rejection sampler stalled in city {city} after {proposals} proposals")]
    RejectionStall { city: usize, proposals: u64 },
    #[error("point {index} lies in no selected city")]
    StrayPoint { index: usize },
    #[error("invalid density: {0}")]
    InvalidDensity(&'static str),
    #[error("invalid Poisson mean {0}")]
    InvalidMean(f64),
}

/// A density on the unit square bounded by `0 < eps1 <= f <= eps2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DensitySpec {
    Uniform,
    /// `f(x, y) = 1 + delta cos(2πx) cos(2πy)` with `0 <= delta < 1`.
    Cosine { delta: f64 },
}

impl DensitySpec {
    pub fn cosine(delta: f64) -> Result<Self, SamplingError> {
        if (0.0..1.0).contains(&delta) {
            Ok(Self::Cosine { delta })
        } else {
            Err(SamplingError::InvalidDensity("cosine delta must lie in [0, 1)"))
        }
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        match *self {
            Self::Uniform => Ok(()),
            Self::Cosine { delta } => Self::cosine(delta).map(|_| ()),
        }
    }

    #[inline]
    pub fn value(&self, p: Point2) -> f64 {
        match *self {
            Self::Uniform => 1.0,
            Self::Cosine { delta } => 1.0 + delta * math::cos(2.0 * PI * p.x) * math::cos(2.0 * PI * p.y),
        }
    }

    pub fn eps1(&self) -> f64 {
        match *self {
            Self::Uniform => 1.0,
            Self::Cosine { delta } => 1.0 - delta,
        }
    }

    pub fn eps2(&self) -> f64 {
        match *self {
            Self::Uniform => 1.0,
            Self::Cosine { delta } => 1.0 + delta,
        }
    }

    pub fn eta1(&self) -> f64 {
        self.eps1() / self.eps2()
    }

    pub fn eta2(&self) -> f64 {
        self.eps2() / self.eps1()
    }

    pub fn is_uniform(&self) -> bool {
        match *self {
            Self::Uniform => true,
            Self::Cosine { delta } => delta == 0.0,
        }
    }

    /// Exact `∫ f` over an axis square.
    pub fn mass(&self, sq: &AxisSquare) -> f64 {
        let area = sq.side * sq.side;
        match *self {
            Self::Uniform => area,
            Self::Cosine { delta } => {
                let ix = cos_integral(sq.origin.x, sq.side);
                let iy = cos_integral(sq.origin.y, sq.side);
                area + delta * ix * iy
            }
        }
    }

    /// City probabilities `p_l = ∫_{S_l} f / ∫_{∪ S_j} f`.
    pub fn city_probabilities(&self, layout: &CityLayout) -> Vec<f64> {
        let masses: Vec<f64> = layout.squares.iter().map(|sq| self.mass(sq)).collect();
        let total: f64 = masses.iter().sum();
        masses.into_iter().map(|m| m / total).collect()
    }
}

fn cos_integral(a: f64, len: f64) -> f64 {
    (math::sin(2.0 * PI * (a + len)) - math::sin(2.0 * PI * a)) / (2.0 * PI)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Process {
    Binomial,
    Poisson,
}

/// One sampled point set.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub points: Vec<Point2>,
    /// City index of every point, parallel to `points`.
    pub cities: Vec<u32>,
    pub process: Process,
    pub seed: StreamSeed,
    /// `n` for binomial batches, the Poisson mean for Poisson batches.
    pub n_target: u64,
    pub layout: Option<CityLayout>,
    /// Points redrawn because they repeated an x- or y-coordinate.
    pub ties_resampled: u32,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn pick_city(cum: &[f64], rng: &mut Philox4x32) -> usize {
    let u = rng.next_f64() * cum[cum.len() - 1];
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

fn draw_in_square(
    sq: &AxisSquare,
    city: usize,
    f: &DensitySpec,
    rng: &mut Philox4x32,
) -> Result<Point2, SamplingError> {
    let ceiling = f.eps2();
    let uniform = f.is_uniform();
    for _ in 0..MAX_PROPOSALS {
        let p = Point2::new(
            sq.origin.x + sq.side * rng.next_f64(),
            sq.origin.y + sq.side * rng.next_f64(),
        );
        if !sq.contains(p) {
            continue;
        }
        if uniform || rng.next_f64() * ceiling < f.value(p) {
            return Ok(p);
        }
    }
    Err(SamplingError::RejectionStall {
        city,
        proposals: MAX_PROPOSALS,
    })
}

/// Indices (other than the first occurrence) sharing an x- or y-coordinate.
fn tied_indices(points: &[Point2]) -> Vec<usize> {
    let mut flagged = vec![false; points.len()];
    let mut order: Vec<usize> = (0..points.len()).collect();
    for axis in [0, 1] {
        let key = |i: usize| if axis == 0 { points[i].x } else { points[i].y };
        order.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
        for w in order.windows(2) {
            if key(w[0]) == key(w[1]) {
                flagged[w[0].max(w[1])] = true;
            }
        }
    }
    (0..points.len()).filter(|&i| flagged[i]).collect()
}

fn resolve_ties(
    points: &mut [Point2],
    cities: &[u32],
    layout: &CityLayout,
    f: &DensitySpec,
    rng: &mut Philox4x32,
) -> Result<u32, SamplingError> {
    let mut redrawn = 0;
    loop {
        let tied = tied_indices(points);
        if tied.is_empty() {
            return Ok(redrawn);
        }
        for i in tied {
            let city = cities[i] as usize;
            points[i] = draw_in_square(&layout.squares[city], city, f, rng)?;
            redrawn += 1;
        }
    }
}

/// `n` i.i.d. points from `f` restricted and renormalized to the selected cities.
pub fn sample_binomial_cities(
    n: usize,
    layout: &CityLayout,
    f: &DensitySpec,
    seed: StreamSeed,
) -> Result<SampleBatch, SamplingError> {
    f.validate()?;
    let mut rng = seed.rng();
    let cum = cumulative(&f.city_probabilities(layout));
    let mut points = Vec::with_capacity(n);
    let mut cities = Vec::with_capacity(n);
    for _ in 0..n {
        let city = pick_city(&cum, &mut rng);
        points.push(draw_in_square(&layout.squares[city], city, f, &mut rng)?);
        cities.push(city as u32);
    }
    let ties_resampled = resolve_ties(&mut points, &cities, layout, f, &mut rng)?;
    Ok(SampleBatch {
        points,
        cities,
        process: Process::Binomial,
        seed,
        n_target: n as u64,
        layout: Some(layout.clone()),
        ties_resampled,
    })
}

/// Poisson process with intensity `n_mean · g_N`: independent per-city
/// Poisson counts, then i.i.d. points from `f` inside each city.
pub fn sample_poisson_cities(
    n_mean: f64,
    layout: &CityLayout,
    f: &DensitySpec,
    seed: StreamSeed,
) -> Result<SampleBatch, SamplingError> {
    f.validate()?;
    if !(n_mean > 0.0 && n_mean.is_finite()) {
        return Err(SamplingError::InvalidMean(n_mean));
    }
    let mut rng = seed.rng();
    let probs = f.city_probabilities(layout);
    let mut counts = Vec::with_capacity(probs.len());
    for &p in &probs {
        let lambda = n_mean * p;
        let k = if lambda > 0.0 {
            let dist = Poisson::new(lambda).map_err(|_| SamplingError::InvalidMean(lambda))?;
            dist.sample(&mut rng) as usize
        } else {
            0
        };
        counts.push(k);
    }
    let total: usize = counts.iter().sum();
    let mut points = Vec::with_capacity(total);
    let mut cities = Vec::with_capacity(total);
    for (city, &k) in counts.iter().enumerate() {
        for _ in 0..k {
            points.push(draw_in_square(&layout.squares[city], city, f, &mut rng)?);
            cities.push(city as u32);
        }
    }
    let ties_resampled = resolve_ties(&mut points, &cities, layout, f, &mut rng)?;
    Ok(SampleBatch {
        points,
        cities,
        process: Process::Poisson,
        seed,
        n_target: math::round(n_mean) as u64,
        layout: Some(layout.clone()),
        ties_resampled,
    })
}

/// `n` i.i.d. points from `f` on the whole unit square.
pub fn sample_unit_square(
    n: usize,
    f: &DensitySpec,
    seed: StreamSeed,
) -> Result<SampleBatch, SamplingError> {
    sample_binomial_cities(n, &CityLayout::unit(), f, seed)
}

/// Per-city node counts `N_l`.
pub fn city_counts(points: &[Point2], layout: &CityLayout) -> Result<Vec<usize>, SamplingError> {
    let mut counts = vec![0usize; layout.city_count()];
    for (index, &p) in points.iter().enumerate() {
        let l = layout
            .city_of(p)
            .ok_or(SamplingError::StrayPoint { index })?;
        counts[l] += 1;
    }
    Ok(counts)
}

/// The band events `U_l = {η1 n / 2N <= N_l <= 2 η2 n / N}` and their conjunction.
pub fn occupancy_event_u(counts: &[usize], n: u64, f: &DensitySpec) -> (Vec<bool>, bool) {
    let cities = counts.len() as f64;
    let lo = f.eta1() * n as f64 / (2.0 * cities);
    let hi = 2.0 * f.eta2() * n as f64 / cities;
    let events: Vec<bool> = counts
        .iter()
        .map(|&c| {
            let c = c as f64;
            lo <= c && c <= hi
        })
        .collect();
    let all = events.iter().all(|&e| e);
    (events, all)
}
