//! Angle and distance sweeps of the receiver.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io;

use rayon::prelude::*;

use super::closed_form::{
    metal_plate_received_power, pathloss_farfield_beam_refined, pathloss_nearfield_broadcast,
    pathloss_nearfield_focus_refined, FarFieldLink,
};
use super::{
    received_power_general_legacy, received_power_general_refined, PowerResult, Scenario,
    DEFAULT_LEGACY_SCATTERING_GAIN,
};
use crate::error::{ensure_finite, Error, Result};
use crate::geometry::spherical_to_cartesian;

/// Token written in place of a dBm value when there is no coupling.
pub const NO_COUPLING: &str = "no-coupling";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abscissa {
    /// Signed reception angle in degrees; negative means azimuth π.
    AngleDeg,
    /// Receiver distance d2 in meters.
    DistanceM,
}

/// A received-power model that can be evaluated on a [`Scenario`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// Refined general model (area-tied scattering gain).
    Refined,
    /// Legacy general model with an explicit scattering gain.
    Legacy {
        scattering_gain: f64,
    },
    FarFieldBeam,
    NearFieldFocus,
    NearFieldBroadcast,
    MetalPlate,
}

impl Model {
    pub const LEGACY: Model = Model::Legacy {
        scattering_gain: DEFAULT_LEGACY_SCATTERING_GAIN,
    };

    pub fn name(&self) -> &'static str {
        match self {
            Model::Refined => "refined",
            Model::Legacy { .. } => "legacy",
            Model::FarFieldBeam => "farfield",
            Model::NearFieldFocus => "focus",
            Model::NearFieldBroadcast => "broadcast",
            Model::MetalPlate => "plate",
        }
    }

    /// CSV column the model is written to. All closed forms share one column.
    pub fn column(&self) -> &'static str {
        match self {
            Model::Refined => "refined_dbm",
            Model::Legacy { .. } => "legacy_dbm",
            _ => "closedform_dbm",
        }
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self, Model::Refined | Model::Legacy { .. })
    }

    pub fn evaluate(&self, s: &Scenario) -> Result<PowerResult> {
        let pt = s.transmit_power();
        let amplitude = || {
            s.map()
                .uniform_amplitude()
                .ok_or(Error::NonUniformAmplitude)
        };
        match *self {
            Model::Refined => Ok(received_power_general_refined(s)),
            Model::Legacy { scattering_gain } => received_power_general_legacy(s, scattering_gain),
            Model::FarFieldBeam => {
                let pl = pathloss_farfield_beam_refined(
                    s.grid(),
                    s.gains(),
                    FarFieldLink::of(s),
                    amplitude()?,
                )?;
                Ok(PowerResult::from_path_loss(pt, pl))
            }
            Model::NearFieldFocus => Ok(PowerResult::from_path_loss(
                pt,
                pathloss_nearfield_focus_refined(s)?,
            )),
            Model::NearFieldBroadcast => {
                let (d1, d2) = s.distances();
                let pl = pathloss_nearfield_broadcast(
                    s.gains(),
                    d1,
                    d2,
                    s.grid().wavelength(),
                    amplitude()?,
                )?;
                Ok(PowerResult::from_path_loss(pt, pl))
            }
            Model::MetalPlate => {
                let (d1, d2) = s.distances();
                metal_plate_received_power(s.grid(), s.gains(), d1, d2, pt)
            }
        }
    }
}

/// Inclusive range `start, start + step, …, ≤ stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        ensure_finite("sweep start", start)?;
        ensure_finite("sweep stop", stop)?;
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid(
                "sweep step",
                format!("must be positive, got {step}"),
            ));
        }
        if stop < start {
            return Err(Error::invalid(
                "sweep range",
                format!("stop {stop} is below start {start}"),
            ));
        }
        Ok(Self { start, stop, step })
    }

    /// Points are `start + i·step`, never accumulated, so reruns and
    /// reversed loops agree exactly.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    /// Received power in dBm per column; `None` means no coupling.
    pub dbm: Vec<Option<f64>>,
}

/// Received power versus one abscissa, one column per model.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    abscissa: Abscissa,
    columns: Vec<String>,
    rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Rows must have strictly increasing `x` and one value per column.
    pub fn new(abscissa: Abscissa, columns: Vec<String>, rows: Vec<SweepRow>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::invalid(
                "sweep table",
                "needs at least one model column",
            ));
        }
        for (i, c) in columns.iter().enumerate() {
            if c == "x" || columns[..i].contains(c) {
                return Err(Error::invalid(
                    "sweep table",
                    format!("duplicate column `{c}`"),
                ));
            }
        }
        if let Some(r) = rows
            .iter()
            .find(|r| r.dbm.len() != columns.len() || !r.x.is_finite())
        {
            return Err(Error::invalid(
                "sweep table",
                format!("malformed row at x = {}", r.x),
            ));
        }
        if rows.windows(2).any(|w| w[1].x <= w[0].x) {
            return Err(Error::invalid(
                "sweep table",
                "abscissa must increase strictly",
            ));
        }
        Ok(Self {
            abscissa,
            columns,
            rows,
        })
    }

    pub fn abscissa(&self) -> Abscissa {
        self.abscissa
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// `(x, dBm)` pairs of one column.
    pub fn series(&self, column: usize) -> impl Iterator<Item = (f64, Option<f64>)> + '_ {
        self.rows.iter().map(move |r| (r.x, r.dbm[column]))
    }

    /// Row with the highest finite value in `column` among rows whose `x`
    /// satisfies `filter`.
    pub fn argmax(&self, column: usize, filter: impl Fn(f64) -> bool) -> Option<(f64, f64)> {
        self.series(column)
            .filter(|(x, _)| filter(*x))
            .filter_map(|(x, v)| v.map(|v| (x, v)))
            .fold(None, |best, (x, v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((x, v)),
            })
    }

    /// CSV with header `x,<columns>`; dBm at 12 decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format_abscissa(r.x));
            for v in &r.dbm {
                match v {
                    Some(v) => write!(out, ",{v:.12}").unwrap(),
                    None => write!(out, ",{NO_COUPLING}").unwrap(),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, mut w: impl io::Write) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}

/// Fixed 12 decimals with trailing zeros trimmed.
pub fn format_abscissa(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn columns_of(models: &[Model]) -> Result<Vec<String>> {
    if models.iter().filter(|m| m.is_closed_form()).count() > 1 {
        return Err(Error::invalid(
            "sweep models",
            "at most one closed-form model per table",
        ));
    }
    Ok(models.iter().map(|m| m.column().to_string()).collect())
}

fn run(
    s: &Scenario,
    abscissa: Abscissa,
    xs: Vec<f64>,
    models: &[Model],
    place: impl Fn(f64) -> Result<crate::geometry::Point3> + Sync,
) -> Result<SweepTable> {
    let columns = columns_of(models)?;
    let rows = xs
        .par_iter()
        .map(|&x| {
            let rx = s.rx().with_position(place(x)?)?;
            let point = s.clone().with_rx(rx);
            let dbm = models
                .iter()
                .map(|m| m.evaluate(&point).map(|p| p.received_dbm()))
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepRow { x, dbm })
        })
        .collect::<Result<Vec<_>>>()?;
    SweepTable::new(abscissa, columns, rows)
}

/// Moves the receiver over signed reception angles (degrees) at its current
/// distance from the surface center. Negative angles place it at azimuth π.
pub fn sweep_angle(s: &Scenario, range: SweepRange, models: &[Model]) -> Result<SweepTable> {
    if range.start <= -90.0 || range.stop >= 90.0 {
        return Err(Error::invalid(
            "angle sweep",
            format!(
                "span must lie inside (-90, 90) degrees, got [{}, {}]",
                range.start, range.stop
            ),
        ));
    }
    let (_, d2) = s.distances();
    run(s, Abscissa::AngleDeg, range.points(), models, |a| {
        let phi = if a < 0.0 { PI } else { 0.0 };
        spherical_to_cartesian(d2, a.abs().to_radians(), phi)
    })
}

/// Moves the receiver along a fixed direction (`theta_r`, `phi_r` in
/// radians) over distances `range` in meters.
pub fn sweep_distance(
    s: &Scenario,
    range: SweepRange,
    theta_r: f64,
    phi_r: f64,
    models: &[Model],
) -> Result<SweepTable> {
    if range.start <= 0.0 {
        return Err(Error::invalid(
            "distance sweep",
            "distances must be positive",
        ));
    }
    run(s, Abscissa::DistanceM, range.points(), models, |d| {
        spherical_to_cartesian(d, theta_r, phi_r)
    })
}
