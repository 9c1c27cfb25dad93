//! Per-cell reflection coefficients.

use std::f64::consts::{PI, TAU};
use std::ops::RangeInclusive;

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};
use crate::geometry::{cell_link, Point3, RisGrid};

/// One selectable response of a unit cell, e.g. coding "0" or "1" of a
/// 1-bit surface.
#[derive(Debug, Clone, PartialEq)]
pub struct CodingState {
    label: String,
    amplitude: f64,
    phase: f64,
}

impl CodingState {
    /// `phase` in radians.
    pub fn new(label: impl Into<String>, amplitude: f64, phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&amplitude) {
            return Err(Error::invalid(
                "reflection amplitude",
                format!("must lie in [0, 1] for a passive surface, got {amplitude}"),
            ));
        }
        ensure_finite("reflection phase", phase)?;
        Ok(Self {
            label: label.into(),
            amplitude,
            phase,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn coefficient(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

/// Complex reflection coefficient of every cell, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionMap {
    rows: usize,
    cols: usize,
    coefficients: Vec<Complex64>,
}

impl ReflectionMap {
    pub fn from_coefficients(
        rows: usize,
        cols: usize,
        coefficients: Vec<Complex64>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 || coefficients.len() != rows * cols {
            return Err(Error::invalid(
                "reflection map",
                format!(
                    "expected {rows}x{cols} coefficients, got {}",
                    coefficients.len()
                ),
            ));
        }
        if let Some(c) = coefficients
            .iter()
            .find(|c| c.norm().is_nan() || c.norm() > 1.0 + 1e-12)
        {
            return Err(Error::invalid(
                "reflection map",
                format!(
                    "|Γ| must not exceed 1 for a passive surface, found {}",
                    c.norm()
                ),
            ));
        }
        Ok(Self {
            rows,
            cols,
            coefficients,
        })
    }

    fn filled(grid: &RisGrid, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut f = f;
        let coefficients = grid.cells().map(|(n, m, _)| f(n, m)).collect();
        Self {
            rows: grid.rows(),
            cols: grid.cols(),
            coefficients,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Coefficient of cell `(n, m)`, 1-based.
    pub fn get(&self, n: usize, m: usize) -> Option<Complex64> {
        if n == 0 || n > self.rows || m == 0 || m > self.cols {
            return None;
        }
        Some(self.coefficients[(n - 1) * self.cols + (m - 1)])
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `(n, m, Γ)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, &c)| (i / self.cols + 1, i % self.cols + 1, c))
    }

    pub fn matches(&self, grid: &RisGrid) -> Result<()> {
        if self.rows != grid.rows() || self.cols != grid.cols() {
            return Err(Error::DimensionMismatch {
                map_rows: self.rows,
                map_cols: self.cols,
                rows: grid.rows(),
                cols: grid.cols(),
            });
        }
        Ok(())
    }

    /// The common |Γ| when every cell shares it (to 1e-12 relative).
    pub fn uniform_amplitude(&self) -> Option<f64> {
        let first = self.coefficients[0].norm();
        let tol = 1e-12 * first.max(f64::MIN_POSITIVE);
        self.coefficients
            .iter()
            .all(|c| (c.norm() - first).abs() <= tol)
            .then_some(first)
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Every cell in the same state.
pub fn uniform_coding(grid: &RisGrid, state: &CodingState) -> ReflectionMap {
    let c = state.coefficient();
    ReflectionMap::filled(grid, |_, _| c)
}

/// Column stripes: cell `(n, m)` takes `state0` when `((m − 1) mod P) + 1`
/// falls inside `window`, otherwise `state1`. Rows are identical.
pub fn stripe_coding(
    grid: &RisGrid,
    period: usize,
    window: RangeInclusive<usize>,
    state0: &CodingState,
    state1: &CodingState,
) -> Result<ReflectionMap> {
    if period < 2 {
        return Err(Error::invalid(
            "stripe period",
            format!("must be at least 2, got {period}"),
        ));
    }
    if window.is_empty() || *window.start() < 1 || *window.end() > period {
        return Err(Error::invalid(
            "stripe window",
            format!(
                "must be a non-empty interval within [1, {period}], got [{}, {}]",
                window.start(),
                window.end()
            ),
        ));
    }
    let (c0, c1) = (state0.coefficient(), state1.coefficient());
    Ok(ReflectionMap::filled(grid, |_, m| {
        if window.contains(&((m - 1) % period + 1)) {
            c0
        } else {
            c1
        }
    }))
}

/// Co-phasing design: each cell compensates its own path phase
/// `2π(r^t + r^r)/λ`, so every contribution arrives in phase at `rx`.
pub fn focusing_phases(
    grid: &RisGrid,
    tx: &Point3,
    rx: &Point3,
    amplitude: f64,
) -> Result<ReflectionMap> {
    if !(0.0..=1.0).contains(&amplitude) {
        return Err(Error::invalid(
            "reflection amplitude",
            format!("must lie in [0, 1], got {amplitude}"),
        ));
    }
    for p in [tx, rx] {
        if !(p.is_finite() && p.z > 0.0) {
            return Err(Error::BehindSurface { z: p.z });
        }
    }
    let k = TAU / grid.wavelength();
    let (d1, d2) = (tx.norm(), rx.norm());
    let mut coefficients = Vec::with_capacity(grid.cell_count());
    for (n, m, center) in grid.cells() {
        let g = cell_link(&center, tx, rx, d1, d2).ok_or(Error::CoincidentTerminal { n, m })?;
        let phase = wrap_phase(k * (g.r_t + g.r_r));
        coefficients.push(Complex64::from_polar(amplitude, phase));
    }
    Ok(ReflectionMap {
        rows: grid.rows(),
        cols: grid.cols(),
        coefficients,
    })
}

/// Snaps every cell to whichever of the two states is nearer in wrapped
/// phase; exact ties go to `state0`.
pub fn quantize_1bit(
    map: &ReflectionMap,
    state0: &CodingState,
    state1: &CodingState,
) -> Result<ReflectionMap> {
    if wrap_phase(state0.phase() - state1.phase()) == 0.0 {
        return Err(Error::invalid(
            "1-bit states",
            "the two states must have distinct phases",
        ));
    }
    let (c0, c1) = (state0.coefficient(), state1.coefficient());
    let coefficients = map
        .coefficients
        .iter()
        .map(|c| {
            let ideal = c.arg();
            let d0 = wrap_phase(ideal - state0.phase()).abs();
            let d1 = wrap_phase(ideal - state1.phase()).abs();
            if d0 <= d1 {
                c0
            } else {
                c1
            }
        })
        .collect();
    Ok(ReflectionMap {
        rows: map.rows,
        cols: map.cols,
        coefficients,
    })
}
