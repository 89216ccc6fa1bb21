//! Sample-moment accumulators and event counters.

use alloc::string::String;

use crate::math;

/// Summary statistics of a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    /// Unbiased sample variance (zero for fewer than two values).
    pub variance: f64,
    /// `√(variance / count)`.
    pub stderr_mean: f64,
    pub count: u64,
    pub min: f64,
    pub max: f64,
}

impl MomentEstimate {
    pub fn std_dev(&self) -> f64 {
        math::sqrt(self.variance)
    }

    pub fn from_values(values: &[f64]) -> Self {
        let mut acc = MomentAccumulator::new();
        acc.extend(values.iter().copied());
        acc.estimate()
    }
}

/// One-pass (Welford) accumulator; [`MomentAccumulator::merge`] combines
/// partial accumulators with Chan's update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl Default for MomentAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl MomentAccumulator {
    pub const fn new() -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn extend(&mut self, xs: impl IntoIterator<Item = f64>) {
        for x in xs {
            self.push(x);
        }
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.count as f64, other.count as f64);
        self.mean += delta * nb / n as f64;
        self.m2 += other.m2 + delta * delta * na * nb / n as f64;
        self.count = n;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn estimate(&self) -> MomentEstimate {
        let variance = if self.count > 1 {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        } else {
            0.0
        };
        let stderr_mean = if self.count > 0 {
            math::sqrt(variance / self.count as f64)
        } else {
            0.0
        };
        MomentEstimate {
            mean: self.mean,
            variance,
            stderr_mean,
            count: self.count,
            min: self.min,
            max: self.max,
        }
    }
}

/// Empirical frequency of a named event.
#[derive(Clone, Debug, PartialEq)]
pub struct EventStats {
    pub name: String,
    pub trials: u64,
    pub occurrences: u64,
    pub frequency: f64,
}

impl EventStats {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            trials: 0,
            occurrences: 0,
            frequency: 0.0,
        }
    }

    pub fn record(&mut self, happened: bool) {
        self.trials += 1;
        self.occurrences += happened as u64;
        self.frequency = self.occurrences as f64 / self.trials as f64;
    }

    /// Binomial standard error of the frequency.
    pub fn stderr(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        math::sqrt(self.frequency * (1.0 - self.frequency) / self.trials as f64)
    }
}

/// Pearson correlation; zero when either sample is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / math::sqrt(sxx * syy)
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}
