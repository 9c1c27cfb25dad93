//! Received power and path loss of an RIS-assisted link.
//!
//! The general models sum one complex term per cell,
//!
//! ```text
//! S = Σ √F(n,m) · Γ(n,m) / (r^t · r^r) · exp(−j 2π (r^t + r^r) / λ)
//! ```
//!
//! and scale `|S|²` by a prefactor. The refined model uses
//! `G_t G_r G_line (d_x d_y)² / 16π²`; the legacy model uses
//! `G_t G_r G_line G d_x d_y λ² / 64π³` with an explicit per-cell scattering
//! gain `G`. The closed forms in [`closed_form`] are special cases.
//!
//! Terms are produced in row-major cell order and reduced with a fixed-shape
//! pairwise tree, so results do not depend on the number of worker threads.

pub mod closed_form;
pub mod reduce;
pub mod sweep;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::configuration::ReflectionMap;
use crate::error::{ensure_positive, Error, Result};
use crate::geometry::{cell_link, CellLinkGeometry, RisGrid, TerminalPlacement};
use crate::patterns::PatternSet;
use crate::units::{linear_to_db, watts_to_dbm};

pub use closed_form::{
    metal_plate_rcs, metal_plate_received_power, pathloss_farfield_beam_refined,
    pathloss_nearfield_broadcast, pathloss_nearfield_focus_refined, pathloss_single_cell,
    FarFieldLink,
};
pub use sweep::{sweep_angle, sweep_distance, Abscissa, Model, SweepRange, SweepRow, SweepTable};

/// Scattering gain used by the legacy general model unless overridden;
/// makes `Gλ²/4π = λ²/π`.
pub const DEFAULT_LEGACY_SCATTERING_GAIN: f64 = 4.0;

/// Transmit/receive antenna gains and the lumped line gain. Every formula
/// uses the product `G_t · G_r · G_line`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaGains {
    pub tx: f64,
    pub rx: f64,
    pub line: f64,
}

impl AntennaGains {
    pub fn new(tx: f64, rx: f64, line: f64) -> Result<Self> {
        ensure_positive("transmit antenna gain", tx)?;
        ensure_positive("receive antenna gain", rx)?;
        ensure_positive("line gain", line)?;
        Ok(Self { tx, rx, line })
    }

    pub fn product(&self) -> f64 {
        self.tx * self.rx * self.line
    }
}

/// Path loss `P_t / P_r`, or the explicit absence of any coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathLoss {
    Finite(f64),
    NoCoupling,
}

impl PathLoss {
    pub(crate) fn from_ratio(pl: f64) -> Self {
        if pl.is_finite() && pl > 0.0 {
            PathLoss::Finite(pl)
        } else {
            PathLoss::NoCoupling
        }
    }

    pub fn linear(&self) -> Option<f64> {
        match *self {
            PathLoss::Finite(pl) => Some(pl),
            PathLoss::NoCoupling => None,
        }
    }

    /// `None` for no coupling; there is no finite dB value to report.
    pub fn db(&self) -> Option<f64> {
        self.linear().map(linear_to_db)
    }

    pub fn is_no_coupling(&self) -> bool {
        matches!(self, PathLoss::NoCoupling)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerResult {
    pub transmit_power: f64,
    pub received_power: f64,
}

impl PowerResult {
    pub fn new(transmit_power: f64, received_power: f64) -> Self {
        Self {
            transmit_power,
            received_power,
        }
    }

    /// Inverts a path loss at the given transmit power.
    pub fn from_path_loss(transmit_power: f64, pl: PathLoss) -> Self {
        let received_power = match pl {
            PathLoss::Finite(pl) => transmit_power / pl,
            PathLoss::NoCoupling => 0.0,
        };
        Self::new(transmit_power, received_power)
    }

    pub fn is_no_coupling(&self) -> bool {
        self.received_power == 0.0
    }

    pub fn path_loss(&self) -> PathLoss {
        if self.is_no_coupling() {
            PathLoss::NoCoupling
        } else {
            PathLoss::from_ratio(self.transmit_power / self.received_power)
        }
    }

    pub fn received_dbm(&self) -> Option<f64> {
        (!self.is_no_coupling()).then(|| watts_to_dbm(self.received_power))
    }
}

/// Everything needed to evaluate a link.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    grid: RisGrid,
    map: ReflectionMap,
    tx: TerminalPlacement,
    rx: TerminalPlacement,
    transmit_power: f64,
    line_gain: f64,
    patterns: PatternSet,
}

impl Scenario {
    /// Terminal patterns follow from the gains (cosine-power, or isotropic
    /// for unit gain); cells use `cos θ`; line gain 1.
    pub fn new(
        grid: RisGrid,
        map: ReflectionMap,
        tx: TerminalPlacement,
        rx: TerminalPlacement,
        transmit_power: f64,
    ) -> Result<Self> {
        map.matches(&grid)?;
        ensure_positive("transmit power", transmit_power)?;
        let patterns = PatternSet::from_gains(tx.gain(), rx.gain())?;
        Ok(Self {
            grid,
            map,
            tx,
            rx,
            transmit_power,
            line_gain: 1.0,
            patterns,
        })
    }

    pub fn with_line_gain(mut self, line_gain: f64) -> Result<Self> {
        self.line_gain = ensure_positive("line gain", line_gain)?;
        Ok(self)
    }

    /// Sets `G_line` so that `G_t G_r G_line` equals the calibrated product.
    pub fn with_calibrated_product(self, gain_product: f64) -> Result<Self> {
        ensure_positive("calibrated gain product", gain_product)?;
        let line = gain_product / (self.tx.gain() * self.rx.gain());
        self.with_line_gain(line)
    }

    pub fn with_patterns(mut self, patterns: PatternSet) -> Self {
        self.patterns = patterns;
        self
    }

    pub fn with_map(mut self, map: ReflectionMap) -> Result<Self> {
        map.matches(&self.grid)?;
        self.map = map;
        Ok(self)
    }

    pub fn with_tx(mut self, tx: TerminalPlacement) -> Self {
        self.tx = tx;
        self
    }

    pub fn with_rx(mut self, rx: TerminalPlacement) -> Self {
        self.rx = rx;
        self
    }

    /// Exchanges the roles of the two terminals (positions, gains and
    /// patterns); the reflection map is kept.
    pub fn reversed(&self) -> Self {
        Self {
            tx: self.rx,
            rx: self.tx,
            patterns: self.patterns.swapped(),
            ..self.clone()
        }
    }

    pub fn grid(&self) -> &RisGrid {
        &self.grid
    }

    pub fn map(&self) -> &ReflectionMap {
        &self.map
    }

    pub fn tx(&self) -> &TerminalPlacement {
        &self.tx
    }

    pub fn rx(&self) -> &TerminalPlacement {
        &self.rx
    }

    pub fn transmit_power(&self) -> f64 {
        self.transmit_power
    }

    pub fn line_gain(&self) -> f64 {
        self.line_gain
    }

    pub fn patterns(&self) -> &PatternSet {
        &self.patterns
    }

    pub fn gains(&self) -> AntennaGains {
        AntennaGains {
            tx: self.tx.gain(),
            rx: self.rx.gain(),
            line: self.line_gain,
        }
    }

    /// Distances of the terminals from the surface center, `(d1, d2)`.
    pub fn distances(&self) -> (f64, f64) {
        (self.tx.position().norm(), self.rx.position().norm())
    }

    fn geometries(&self) -> Vec<CellLinkGeometry> {
        let (tx, rx) = (self.tx.position(), self.rx.position());
        let (d1, d2) = (tx.norm(), rx.norm());
        let centers: Vec<_> = self.grid.cells().map(|(_, _, c)| c).collect();
        centers
            .par_iter()
            .map(|c| {
                cell_link(c, &tx, &rx, d1, d2)
                    .expect("terminals lie strictly in front of the surface")
            })
            .collect()
    }

    /// Geometry of one cell under this scenario.
    pub fn cell_geometry(&self, n: usize, m: usize) -> Result<CellLinkGeometry> {
        crate::geometry::link_geometry(&self.grid, &self.tx.position(), &self.rx.position(), n, m)
    }
}

fn cell_term(
    geom: &CellLinkGeometry,
    patterns: &PatternSet,
    gamma: Complex64,
    k: f64,
) -> Complex64 {
    let f = patterns.combine(geom).value();
    if f == 0.0 || gamma == Complex64::new(0.0, 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    let amplitude = f.sqrt() / (geom.r_t * geom.r_r);
    gamma * amplitude * Complex64::from_polar(1.0, -k * (geom.r_t + geom.r_r))
}

/// Coherent per-cell sum `S` shared by the general models.
pub fn coupling_sum(s: &Scenario) -> Complex64 {
    let k = TAU / s.grid.wavelength();
    let geoms = s.geometries();
    let terms: Vec<Complex64> = geoms
        .par_iter()
        .zip(s.map.coefficients().par_iter())
        .map(|(g, &gamma)| cell_term(g, &s.patterns, gamma, k))
        .collect();
    reduce::par_pairwise_sum(&terms)
}

/// Magnitude sum `Σ √F / (r^t r^r)` used by the focusing closed form.
pub(crate) fn magnitude_sum(s: &Scenario) -> f64 {
    let terms: Vec<f64> = s
        .geometries()
        .par_iter()
        .map(|g| s.patterns.combine(g).value().sqrt() / (g.r_t * g.r_r))
        .collect();
    reduce::par_pairwise_sum(&terms)
}

/// Refined general model: the per-cell scattering gain is tied to the cell
/// area, `G = 4π d_x d_y / λ²`.
pub fn received_power_general_refined(s: &Scenario) -> PowerResult {
    let area = s.grid.cell_area();
    let prefactor = s.gains().product() * area * area / (16.0 * PI * PI);
    let sum = coupling_sum(s);
    PowerResult::new(
        s.transmit_power,
        s.transmit_power * prefactor * sum.norm_sqr(),
    )
}

/// Legacy general model with an explicit per-cell scattering gain.
pub fn received_power_general_legacy(s: &Scenario, scattering_gain: f64) -> Result<PowerResult> {
    ensure_positive("scattering gain", scattering_gain)?;
    let lambda = s.grid.wavelength();
    let prefactor = s.gains().product() * scattering_gain * s.grid.cell_area() * lambda * lambda
        / (64.0 * PI.powi(3));
    let sum = coupling_sum(s);
    Ok(PowerResult::new(
        s.transmit_power,
        s.transmit_power * prefactor * sum.norm_sqr(),
    ))
}

/// Scattering gain that makes the legacy model coincide with the refined one.
pub fn area_scattering_gain(grid: &RisGrid) -> f64 {
    let lambda = grid.wavelength();
    4.0 * PI * grid.cell_area() / (lambda * lambda)
}

/// Complex received-signal contribution `s_r / s_t` of one cell.
pub fn cell_received_signal(s: &Scenario, n: usize, m: usize) -> Result<Complex64> {
    let geom = s.cell_geometry(n, m)?;
    let gamma = s.map.get(n, m).ok_or(Error::CellOutOfRange {
        n,
        m,
        rows: s.grid.rows(),
        cols: s.grid.cols(),
    })?;
    let k = TAU / s.grid.wavelength();
    let scale = s.gains().product().sqrt() * s.grid.cell_area() / (4.0 * PI);
    Ok(cell_term(&geom, &s.patterns, gamma, k) * scale)
}
