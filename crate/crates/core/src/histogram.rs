//! Discretized probability densities over time.
//!
//! A [`HistogramDensity`] covers `[0, bin_width * bin_count)` with a set of
//! equal-width bins plus a tail mass for values at or beyond the last edge.
//! Besides its mass, every bin remembers the mass-weighted mean of the values
//! that fell into it and the range `[lo, hi]` they spanned. Quadrature treats a
//! bin as an atom at its mean when that range is degenerate and as the linear
//! density on the range with that mean otherwise, so point masses integrate
//! exactly while discretized continuous densities keep second-order accuracy
//! at partially covered bins.

use thiserror::Error;

/// Tolerance on total mass for a density to count as complete.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("INVALID_DENSITY: bin width must be positive and finite (got {0})")]
    BinWidth(f64),
    #[error("INVALID_DENSITY: a density needs at least one bin")]
    NoBins,
    #[error("INVALID_DENSITY: bin {index}: {reason}")]
    Bin { index: usize, reason: String },
    #[error("INVALID_DENSITY: tail mass {0} is negative or not finite")]
    Tail(f64),
    #[error("INVALID_DENSITY: total mass {0} exceeds 1")]
    TotalMass(f64),
    #[error("INVALID_DENSITY: horizon {horizon} s does not cover {needed} s")]
    Horizon { horizon: f64, needed: f64 },
}

impl DensityError {
    pub fn code(&self) -> &'static str {
        "INVALID_DENSITY"
    }
}

/// One histogram bin: its probability mass and where that mass sits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub mass: f64,
    /// Mass-weighted mean of the values in the bin.
    pub mean: f64,
    /// Smallest value carrying mass.
    pub lo: f64,
    /// Largest value carrying mass.
    pub hi: f64,
}

impl Bin {
    const EMPTY: Bin = Bin {
        mass: 0.0,
        mean: 0.0,
        lo: 0.0,
        hi: 0.0,
    };

    /// Mass spread uniformly over `[lo, hi]`, e.g. a discretized continuous density.
    pub fn uniform(mass: f64, lo: f64, hi: f64) -> Self {
        Bin {
            mass,
            mean: 0.5 * (lo + hi),
            lo,
            hi,
        }
    }

    /// Mass at or below `x`, and its first moment.
    ///
    /// Inside `[lo, hi]` the mass follows the linear density with the bin's
    /// mean (slope clamped to keep it non-negative), so both quantities are
    /// continuous in `x` and exact at the bin edges.
    pub fn portion_below(&self, x: f64) -> (f64, f64) {
        if self.mass == 0.0 || x < self.lo {
            (0.0, 0.0)
        } else if x >= self.hi {
            (self.mass, self.mass * self.mean)
        } else {
            // lo <= x < hi, so the range is non-degenerate here.
            let w = self.hi - self.lo;
            let c = (6.0 * (self.mean - 0.5 * (self.lo + self.hi)) / w).clamp(-1.0, 1.0);
            let u = (x - self.lo) / w;
            let below = u * (1.0 + c * (u - 1.0));
            let moment_u = u * u * (0.5 + c * (2.0 * u / 3.0 - 0.5));
            (self.mass * below, self.mass * (self.lo * below + w * moment_u))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramDensity {
    bin_width: f64,
    bins: Vec<Bin>,
    tail: f64,
}

impl HistogramDensity {
    /// All-zero density; `is_empty()` reports true.
    pub fn empty(bin_width: f64, bin_count: usize) -> Self {
        HistogramDensity {
            bin_width,
            bins: vec![Bin::EMPTY; bin_count],
            tail: 0.0,
        }
    }

    /// Every unit of mass lies beyond the last bin edge.
    pub fn tail_only(bin_width: f64, bin_count: usize) -> Self {
        HistogramDensity {
            tail: 1.0,
            ..Self::empty(bin_width, bin_count)
        }
    }

    pub fn point_mass(bin_width: f64, bin_count: usize, value: f64) -> Self {
        let mut builder = HistogramBuilder::new(bin_width, bin_count);
        builder.add(value, 1.0);
        builder.normalized()
    }

    /// Assembles a density from explicit bins, checking every invariant.
    pub fn from_bins(bin_width: f64, bins: Vec<Bin>, tail: f64) -> Result<Self, DensityError> {
        let density = HistogramDensity { bin_width, bins, tail };
        density.validate()?;
        Ok(density)
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        if !(self.bin_width.is_finite() && self.bin_width > 0.0) {
            return Err(DensityError::BinWidth(self.bin_width));
        }
        if self.bins.is_empty() {
            return Err(DensityError::NoBins);
        }
        for (index, bin) in self.bins.iter().enumerate() {
            let bad = |reason: &str| DensityError::Bin {
                index,
                reason: reason.to_string(),
            };
            if !(bin.mass.is_finite() && bin.mass >= 0.0) {
                return Err(bad("mass is negative or not finite"));
            }
            if bin.mass == 0.0 {
                continue;
            }
            let left = index as f64 * self.bin_width;
            let right = left + self.bin_width;
            let slack = 1e-9 * right.max(1.0);
            if !(bin.lo.is_finite() && bin.hi.is_finite() && bin.mean.is_finite()) {
                return Err(bad("support is not finite"));
            }
            if bin.lo > bin.hi || bin.lo < left - slack || bin.hi > right + slack {
                return Err(bad("support escapes the bin edges"));
            }
            if bin.mean < bin.lo - slack || bin.mean > bin.hi + slack {
                return Err(bad("mean lies outside the support"));
            }
        }
        if !(self.tail.is_finite() && self.tail >= 0.0) {
            return Err(DensityError::Tail(self.tail));
        }
        let total = self.total_mass();
        if total > 1.0 + MASS_TOLERANCE {
            return Err(DensityError::TotalMass(total));
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    /// Right edge of the last bin.
    pub fn horizon(&self) -> f64 {
        self.bin_width * self.bins.len() as f64
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail
    }

    pub fn total_mass(&self) -> f64 {
        self.bins.iter().map(|b| b.mass).sum::<f64>() + self.tail
    }

    pub fn is_empty(&self) -> bool {
        self.total_mass() == 0.0
    }

    pub fn is_complete(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= MASS_TOLERANCE
    }

    /// Index of the heaviest bin, ignoring the tail.
    pub fn mode_bin(&self) -> Option<usize> {
        self.bins
            .iter()
            .enumerate()
            .filter(|(_, b)| b.mass > 0.0)
            .max_by(|a, b| a.1.mass.total_cmp(&b.1.mass))
            .map(|(i, _)| i)
    }

    /// Mean over the binned mass (tail excluded), normalized by that mass.
    pub fn binned_mean(&self) -> Option<f64> {
        let mass: f64 = self.bins.iter().map(|b| b.mass).sum();
        (mass > 0.0).then(|| self.bins.iter().map(|b| b.mass * b.mean).sum::<f64>() / mass)
    }

    fn bin_index(&self, x: f64) -> usize {
        ((x / self.bin_width).floor().max(0.0) as usize).min(self.bins.len() - 1)
    }

    /// Binned mass at values `<= x`. The tail never counts.
    pub fn mass_below(&self, x: f64) -> f64 {
        self.cumulative(x).0
    }

    /// `∫₀ˣ τ f(τ) dτ` over the binned mass.
    pub fn partial_moment(&self, x: f64) -> f64 {
        self.cumulative(x).1
    }

    /// `E[min(τ, x)]` over all mass, tail included; the tail sits beyond `x`
    /// as long as `x` does not exceed the horizon.
    pub fn truncated_mean(&self, x: f64) -> f64 {
        let (below, moment) = self.cumulative(x);
        moment + x * (self.total_mass() - below).max(0.0)
    }

    fn cumulative(&self, x: f64) -> (f64, f64) {
        if x < 0.0 {
            return (0.0, 0.0);
        }
        let k = self.bin_index(x);
        let (mut mass, mut moment) = self.bins[..k]
            .iter()
            .fold((0.0, 0.0), |(m, s), b| (m + b.mass, s + b.mass * b.mean));
        let (m, s) = self.bins[k].portion_below(x);
        mass += m;
        moment += s;
        (mass, moment)
    }

    /// Prefix sums of mass and first moment, for repeated cumulative queries.
    pub(crate) fn prefix_table(&self) -> PrefixTable<'_> {
        let mut mass = Vec::with_capacity(self.bins.len() + 1);
        let mut moment = Vec::with_capacity(self.bins.len() + 1);
        let (mut m, mut s) = (0.0, 0.0);
        mass.push(m);
        moment.push(s);
        for b in &self.bins {
            m += b.mass;
            s += b.mass * b.mean;
            mass.push(m);
            moment.push(s);
        }
        PrefixTable {
            density: self,
            mass,
            moment,
        }
    }

    /// L1 distance between two densities on the same grid, tail included.
    pub fn l1_distance(&self, other: &HistogramDensity) -> f64 {
        assert_eq!(self.bins.len(), other.bins.len(), "histograms on different grids");
        self.bins
            .iter()
            .zip(&other.bins)
            .map(|(a, b)| (a.mass - b.mass).abs())
            .sum::<f64>()
            + (self.tail - other.tail).abs()
    }
}

pub(crate) struct PrefixTable<'a> {
    density: &'a HistogramDensity,
    mass: Vec<f64>,
    moment: Vec<f64>,
}

impl PrefixTable<'_> {
    /// Same as [`HistogramDensity::mass_below`] and [`HistogramDensity::partial_moment`], in O(1).
    pub(crate) fn below(&self, x: f64) -> (f64, f64) {
        if x < 0.0 {
            return (0.0, 0.0);
        }
        let k = self.density.bin_index(x);
        let (m, s) = self.density.bins[k].portion_below(x);
        (self.mass[k] + m, self.moment[k] + s)
    }
}

/// Accumulates weighted samples into a histogram.
#[derive(Debug, Clone)]
pub struct HistogramBuilder {
    bin_width: f64,
    mass: Vec<f64>,
    moment: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    tail: f64,
}

impl HistogramBuilder {
    pub fn new(bin_width: f64, bin_count: usize) -> Self {
        assert!(bin_width > 0.0 && bin_count > 0, "degenerate histogram grid");
        HistogramBuilder {
            bin_width,
            mass: vec![0.0; bin_count],
            moment: vec![0.0; bin_count],
            lo: vec![f64::INFINITY; bin_count],
            hi: vec![f64::NEG_INFINITY; bin_count],
            tail: 0.0,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.bin_width * self.mass.len() as f64
    }

    /// Adds `weight` at `value`; values at or past the horizon go to the tail.
    pub fn add(&mut self, value: f64, weight: f64) {
        debug_assert!(value >= 0.0 && weight >= 0.0);
        let index = (value / self.bin_width).floor();
        // NaN lands in the tail too
        if index.partial_cmp(&(self.mass.len() as f64)) != Some(std::cmp::Ordering::Less) {
            self.tail += weight;
            return;
        }
        let i = index.max(0.0) as usize;
        self.mass[i] += weight;
        self.moment[i] += weight * value;
        self.lo[i] = self.lo[i].min(value);
        self.hi[i] = self.hi[i].max(value);
    }

    pub fn add_tail(&mut self, weight: f64) {
        self.tail += weight;
    }

    pub fn total_weight(&self) -> f64 {
        self.mass.iter().sum::<f64>() + self.tail
    }

    /// Scales the accumulated weight to unit mass; an empty builder yields an
    /// empty density.
    pub fn normalized(self) -> HistogramDensity {
        let total = self.total_weight();
        let scale = if total > 0.0 { 1.0 / total } else { 0.0 };
        let bins = (0..self.mass.len())
            .map(|i| {
                let m = self.mass[i];
                if m == 0.0 {
                    return Bin::EMPTY;
                }
                let mean = if self.lo[i] == self.hi[i] {
                    self.lo[i]
                } else {
                    (self.moment[i] / m).clamp(self.lo[i], self.hi[i])
                };
                Bin {
                    mass: m * scale,
                    mean,
                    lo: self.lo[i],
                    hi: self.hi[i],
                }
            })
            .collect();
        HistogramDensity {
            bin_width: self.bin_width,
            bins,
            tail: self.tail * scale,
        }
    }
}
