//! Normalized power radiation patterns.
//!
//! Terminals use the cosine-power family `(cos θ)^α` over the front
//! hemisphere, whose gain is `G = 2(α + 1)`. Unit cells use `cos θ`. Both are
//! zero behind the aperture and independent of azimuth. Measured patterns can
//! be plugged in through [`TabulatedPattern`].

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::geometry::CellLinkGeometry;

/// Radiation pattern of a transmit or receive antenna.
#[derive(Debug, Clone, PartialEq)]
pub enum AntennaPattern {
    /// Unit pattern over the full sphere, gain 1.
    Isotropic,
    /// `(cos θ)^exponent` on the front hemisphere, zero behind.
    CosinePower {
        exponent: f64,
    },
    Tabulated(TabulatedPattern),
}

impl AntennaPattern {
    pub fn cosine_power(exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent >= 0.0) {
            return Err(Error::invalid(
                "pattern exponent",
                format!("must be >= 0, got {exponent}"),
            ));
        }
        Ok(AntennaPattern::CosinePower { exponent })
    }

    /// Pattern implied by a linear gain: isotropic for `G = 1`, cosine-power
    /// with `α = G/2 − 1` for `G ≥ 2`.
    pub fn for_gain(gain: f64) -> Result<Self> {
        if gain == 1.0 {
            Ok(AntennaPattern::Isotropic)
        } else {
            Ok(AntennaPattern::CosinePower {
                exponent: exponent_from_gain(gain)?,
            })
        }
    }

    /// Directivity of the pattern, 4π over its solid-angle integral.
    pub fn gain(&self) -> f64 {
        match self {
            AntennaPattern::Isotropic => 1.0,
            AntennaPattern::CosinePower { exponent } => 2.0 * (exponent + 1.0),
            AntennaPattern::Tabulated(t) => t.gain(),
        }
    }

    /// Pattern value at off-boresight angle `theta` in `[0, π]`.
    pub fn value(&self, theta: f64) -> f64 {
        match self {
            AntennaPattern::Isotropic => 1.0,
            AntennaPattern::CosinePower { exponent } => {
                if theta > FRAC_PI_2 {
                    0.0
                } else {
                    cosine_power(theta.cos(), *exponent)
                }
            }
            AntennaPattern::Tabulated(t) => t.value(theta),
        }
    }

    /// Pattern value given `cos θ` directly; avoids the `acos` round trip on
    /// the hot path.
    pub fn value_at_cos(&self, cos_theta: f64) -> f64 {
        match self {
            AntennaPattern::Isotropic => 1.0,
            AntennaPattern::CosinePower { exponent } => cosine_power(cos_theta, *exponent),
            AntennaPattern::Tabulated(t) => t.value(cos_theta.clamp(-1.0, 1.0).acos()),
        }
    }
}

/// `c^α` for `c > 0`. Zero behind the aperture; at exactly `c = 0` the
/// value is 0 for `α > 0` and 1 for `α = 0` (the closed front hemisphere).
fn cosine_power(c: f64, exponent: f64) -> f64 {
    if c < 0.0 {
        0.0
    } else if c == 0.0 {
        if exponent == 0.0 {
            1.0
        } else {
            0.0
        }
    } else if exponent == 1.0 {
        c
    } else {
        (exponent * c.ln()).exp()
    }
}

/// Unit-cell radiation pattern.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum CellPattern {
    /// `cos θ` on the front hemisphere.
    #[default]
    Cosine,
    Tabulated(TabulatedPattern),
}

impl CellPattern {
    pub fn value(&self, theta: f64) -> f64 {
        match self {
            CellPattern::Cosine => unit_cell_pattern_value(theta),
            CellPattern::Tabulated(t) => t.value(theta),
        }
    }

    pub fn value_at_cos(&self, cos_theta: f64) -> f64 {
        match self {
            CellPattern::Cosine => cos_theta.max(0.0),
            CellPattern::Tabulated(t) => t.value(cos_theta.clamp(-1.0, 1.0).acos()),
        }
    }
}

/// Pattern sampled on a strictly increasing θ grid starting at 0, linearly
/// interpolated between samples and zero past the last sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPattern {
    thetas: Vec<f64>,
    values: Vec<f64>,
    gain: f64,
}

impl TabulatedPattern {
    pub fn new(thetas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if thetas.len() != values.len() || thetas.len() < 2 {
            return Err(Error::invalid(
                "pattern table",
                "needs at least two (theta, value) samples of equal length",
            ));
        }
        if thetas[0] != 0.0 {
            return Err(Error::invalid(
                "pattern table",
                "first sample must be at theta = 0",
            ));
        }
        if thetas.iter().any(|t| t.is_nan())
            || thetas.windows(2).any(|w| w[1] <= w[0])
            || thetas[thetas.len() - 1] > PI
        {
            return Err(Error::invalid(
                "pattern table",
                "theta samples must increase strictly within [0, π]",
            ));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("pattern table", "values must lie in [0, 1]"));
        }
        let mut table = Self {
            thetas,
            values,
            gain: 0.0,
        };
        table.gain = gain_from_pattern(|t| table.value(t));
        Ok(table)
    }

    /// `cos^exponent` sampled at `samples` evenly spaced angles on
    /// `[0, π/2]`; handy for legacy cell models such as `cos³θ`.
    pub fn from_cosine_power(exponent: f64, samples: usize) -> Result<Self> {
        let samples = samples.max(2);
        let step = FRAC_PI_2 / (samples - 1) as f64;
        let thetas: Vec<f64> = (0..samples).map(|i| i as f64 * step).collect();
        let values = thetas
            .iter()
            .map(|t| cosine_power(t.cos().max(0.0), exponent).min(1.0))
            .collect();
        Self::new(thetas, values)
    }

    pub fn value(&self, theta: f64) -> f64 {
        let last = self.thetas.len() - 1;
        if theta < 0.0 || theta > self.thetas[last] {
            return 0.0;
        }
        let i = self.thetas.partition_point(|&t| t <= theta);
        if i > last {
            return self.values[last];
        }
        let (t0, t1) = (self.thetas[i - 1], self.thetas[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (v1 - v0) * (theta - t0) / (t1 - t0)
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }
}

/// Exponent α of the cosine-power pattern with gain `G`: `α = G/2 − 1`.
pub fn exponent_from_gain(gain: f64) -> Result<f64> {
    if !(gain.is_finite() && gain >= 2.0) {
        return Err(Error::invalid(
            "antenna gain",
            format!("cosine-power patterns need G >= 2 (use the isotropic pattern for G = 1), got {gain}"),
        ));
    }
    Ok(gain / 2.0 - 1.0)
}

/// Gain of `(cos θ)^α` by numerical integration over the sphere.
pub fn gain_from_pattern_integral(exponent: f64) -> f64 {
    gain_from_pattern(|theta| {
        if theta > FRAC_PI_2 {
            0.0
        } else {
            cosine_power(theta.cos(), exponent)
        }
    })
}

/// `4π / ∫∫ F(θ) sin θ dθ dφ` for an azimuth-independent pattern `F`.
pub fn gain_from_pattern(pattern: impl Fn(f64) -> f64) -> f64 {
    // Front and back hemispheres are integrated separately so a jump at π/2
    // never falls inside a Simpson panel.
    let integrand = |t: f64| pattern(t) * t.sin();
    let front = simpson(&integrand, 0.0, FRAC_PI_2 * (1.0 - 1e-15), 8192);
    let back = simpson(&integrand, FRAC_PI_2 * (1.0 + 1e-15), PI, 8192);
    4.0 * PI / (2.0 * PI * (front + back))
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels + panels % 2;
    let h = (b - a) / panels as f64;
    let inner: f64 = (1..panels)
        .map(|i| {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f(a + i as f64 * h)
        })
        .sum();
    (f(a) + inner + f(b)) * h / 3.0
}

pub fn antenna_pattern_value(pattern: &AntennaPattern, theta: f64) -> f64 {
    pattern.value(theta)
}

/// `cos θ` on the front hemisphere, 0 behind.
pub fn unit_cell_pattern_value(theta: f64) -> f64 {
    if theta > FRAC_PI_2 {
        0.0
    } else {
        theta.cos().max(0.0)
    }
}

/// Joint normalized pattern of transmit antenna, cell (twice) and receive
/// antenna for one cell. Always in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CombinedPatternValue(f64);

impl CombinedPatternValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Patterns of both terminals and of the unit cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSet {
    pub tx: AntennaPattern,
    pub cell: CellPattern,
    pub rx: AntennaPattern,
}

impl PatternSet {
    /// Cosine-power terminals derived from the gains and `cos θ` cells.
    pub fn from_gains(tx_gain: f64, rx_gain: f64) -> Result<Self> {
        Ok(Self {
            tx: AntennaPattern::for_gain(tx_gain)?,
            cell: CellPattern::Cosine,
            rx: AntennaPattern::for_gain(rx_gain)?,
        })
    }

    pub fn swapped(&self) -> Self {
        Self {
            tx: self.rx.clone(),
            cell: self.cell.clone(),
            rx: self.tx.clone(),
        }
    }

    pub fn combine(&self, geom: &CellLinkGeometry) -> CombinedPatternValue {
        let v = self.tx.value_at_cos(geom.cos_theta_tx)
            * self.cell.value_at_cos(geom.cos_theta_t)
            * self.cell.value_at_cos(geom.cos_theta_r)
            * self.rx.value_at_cos(geom.cos_theta_rx);
        CombinedPatternValue(v.clamp(0.0, 1.0))
    }
}

/// Joint pattern for cosine-power terminals of gains `gt`, `gr` (1 selects
/// the isotropic pattern) and `cos θ` unit cells.
pub fn combined_pattern(geom: &CellLinkGeometry, gt: f64, gr: f64) -> Result<CombinedPatternValue> {
    Ok(PatternSet::from_gains(gt, gr)?.combine(geom))
}
