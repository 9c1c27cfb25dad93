//! Calibration arithmetic, measurement files, model-vs-measurement comparison
//! and unit-cell efficiency metrics.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::sweep::NO_COUPLING;
use crate::engine::{Abscissa, SweepRow, SweepTable};
use crate::error::{ensure_positive, Error, Result};
use crate::units::{db_to_linear, linear_to_db};

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error("conflicting duplicate at x = {x}: {first} dBm vs {second} dBm")]
    ConflictingDuplicate { x: f64, first: f64, second: f64 },
    #[error("a series needs at least 2 points, found {0}")]
    TooFewPoints(usize),
    #[error("abscissa mismatch: model is {model:?}, measurements are {measured:?}")]
    AbscissaMismatch { model: Abscissa, measured: Abscissa },
    #[error("unknown model column `{0}`")]
    UnknownColumn(String),
    #[error("no measurement lies where the model is defined on [{lo}, {hi}]")]
    EmptyOverlap { lo: f64, hi: f64 },
    #[error(transparent)]
    Model(#[from] Error),
}

/// Measured `G_t G_r G_line` of one measurement system.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRecord {
    pub system: String,
    pub frequency: f64,
    pub gain_product_db: f64,
}

impl CalibrationRecord {
    pub fn new(system: impl Into<String>, frequency: f64, gain_product_db: f64) -> Result<Self> {
        ensure_positive("frequency", frequency)?;
        if !gain_product_db.is_finite() {
            return Err(Error::invalid("gain product", "must be finite"));
        }
        Ok(Self {
            system: system.into(),
            frequency,
            gain_product_db,
        })
    }

    pub fn gain_product(&self) -> f64 {
        db_to_linear(self.gain_product_db)
    }
}

/// Calibrations of the two horn-antenna measurement systems.
pub fn reference_calibrations() -> [CalibrationRecord; 3] {
    let rec = |system: &str, f: f64, db: f64| CalibrationRecord {
        system: system.to_string(),
        frequency: f,
        gain_product_db: db,
    };
    [
        rec("A", 27e9, 2.9),
        rec("B", 27e9, 24.0),
        rec("B", 33e9, 22.0),
    ]
}

/// Gain product in dB that makes a direct link of length `d` deliver
/// `received` from `transmitted`: `10 log10((Pr/Pt)(4πd/λ)²)`.
pub fn calibration_gain(transmitted: f64, received: f64, d: f64, wavelength: f64) -> Result<f64> {
    ensure_positive("transmit power", transmitted)?;
    ensure_positive("received power", received)?;
    ensure_positive("distance", d)?;
    ensure_positive("wavelength", wavelength)?;
    let spread = 4.0 * PI * d / wavelength;
    Ok(linear_to_db(received / transmitted * spread * spread))
}

/// Received power of a direct link with gain product `gain_product_db`.
pub fn direct_link_received_power(
    transmitted: f64,
    gain_product_db: f64,
    d: f64,
    wavelength: f64,
) -> Result<f64> {
    ensure_positive("transmit power", transmitted)?;
    ensure_positive("distance", d)?;
    ensure_positive("wavelength", wavelength)?;
    let ratio = wavelength / (4.0 * PI * d);
    Ok(transmitted * db_to_linear(gain_product_db) * ratio * ratio)
}

/// Scattering, power and area figures of a unit cell. The scattering metric
/// is the cell area itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaReport {
    pub frequency: f64,
    /// m²
    pub scattering: f64,
    /// W
    pub unit_power: f64,
    /// m²
    pub area: f64,
    /// Scattering per watt, m²/W.
    pub energy_efficiency: f64,
    /// Scattering per area.
    pub area_efficiency: f64,
    /// W/m²
    pub power_density: f64,
}

pub fn spa_metrics(
    cell_width: f64,
    cell_length: f64,
    frequency: f64,
    unit_power: f64,
) -> Result<SpaReport> {
    ensure_positive("cell width", cell_width)?;
    ensure_positive("cell length", cell_length)?;
    ensure_positive("frequency", frequency)?;
    ensure_positive("unit-cell power", unit_power)?;
    Ok(SpaReport::from_area(
        frequency,
        cell_width * cell_length,
        unit_power,
    ))
}

impl SpaReport {
    fn from_area(frequency: f64, area: f64, unit_power: f64) -> Self {
        SpaReport {
            frequency,
            scattering: area,
            unit_power,
            area,
            energy_efficiency: area / unit_power,
            area_efficiency: 1.0,
            power_density: unit_power / area,
        }
    }

    /// Same design at another frequency: cell sides scale with the
    /// wavelength, unit-cell power is unchanged.
    pub fn scaled_to(&self, frequency: f64) -> Result<SpaReport> {
        ensure_positive("frequency", frequency)?;
        let k = self.frequency / frequency;
        Ok(SpaReport::from_area(
            frequency,
            self.area * k * k,
            self.unit_power,
        ))
    }
}

/// Measured received power against a sweep abscissa, sorted by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSeries {
    abscissa: Abscissa,
    points: Vec<(f64, f64)>,
}

impl MeasurementSeries {
    /// Sorts the points; exact duplicates collapse, conflicting ones are
    /// rejected.
    pub fn new(abscissa: Abscissa, mut points: Vec<(f64, f64)>) -> Result<Self, CampaignError> {
        if let Some(&(x, y)) = points
            .iter()
            .find(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(
                Error::invalid("measurement", format!("non-finite point ({x}, {y})")).into(),
            );
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(points.len());
        for (x, y) in points {
            match out.last() {
                Some(&(px, py)) if px == x => {
                    if py != y {
                        return Err(CampaignError::ConflictingDuplicate {
                            x,
                            first: py,
                            second: y,
                        });
                    }
                }
                _ => out.push((x, y)),
            }
        }
        if out.len() < 2 {
            return Err(CampaignError::TooFewPoints(out.len()));
        }
        Ok(Self {
            abscissa,
            points: out,
        })
    }

    /// Finite values of one model column, treated as measurements.
    pub fn from_table(table: &SweepTable, column: usize) -> Result<Self, CampaignError> {
        let points = table
            .series(column)
            .filter_map(|(x, v)| v.map(|v| (x, v)))
            .collect();
        Self::new(table.abscissa(), points)
    }

    pub fn abscissa(&self) -> Abscissa {
        self.abscissa
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with header `x,power_dbm`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,power_dbm\n");
        for (x, y) in &self.points {
            writeln!(out, "{x},{y}").unwrap();
        }
        out
    }
}

fn reader(data: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(data)
}

fn csv_error(e: csv::Error) -> CampaignError {
    let line = e.position().map_or(0, |p| p.line());
    CampaignError::Parse {
        line,
        reason: e.to_string(),
    }
}

fn parse_number(field: &str, line: u64, what: &str) -> Result<f64, CampaignError> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CampaignError::Parse {
            line,
            reason: format!("{what} `{field}` is not a finite number"),
        })
}

pub fn parse_measurements(
    data: &str,
    abscissa: Abscissa,
) -> Result<MeasurementSeries, CampaignError> {
    let mut rdr = reader(data.as_bytes());
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "power_dbm"] {
        return Err(CampaignError::Parse {
            line: 1,
            reason: format!(
                "expected header `x,power_dbm`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        points.push((
            parse_number(&rec[0], line, "x")?,
            parse_number(&rec[1], line, "power")?,
        ));
    }
    MeasurementSeries::new(abscissa, points)
}

fn read_file(path: &Path) -> Result<String, CampaignError> {
    std::fs::read_to_string(path).map_err(|source| CampaignError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_measurements(
    path: impl AsRef<Path>,
    abscissa: Abscissa,
) -> Result<MeasurementSeries, CampaignError> {
    parse_measurements(&read_file(path.as_ref())?, abscissa)
}

/// Parses a sweep table written by [`SweepTable::to_csv`].
pub fn parse_sweep_table(data: &str, abscissa: Abscissa) -> Result<SweepTable, CampaignError> {
    let mut rdr = reader(data.as_bytes());
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.get(0) != Some("x") || headers.len() < 2 {
        return Err(CampaignError::Parse {
            line: 1,
            reason: "expected header `x,<model columns>`".into(),
        });
    }
    let columns: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let x = parse_number(&rec[0], line, "x")?;
        let dbm = rec
            .iter()
            .skip(1)
            .map(|f| match f {
                NO_COUPLING => Ok(None),
                f => parse_number(f, line, "power").map(Some),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(SweepRow { x, dbm });
    }
    Ok(SweepTable::new(abscissa, columns, rows)?)
}

pub fn load_sweep_table(
    path: impl AsRef<Path>,
    abscissa: Abscissa,
) -> Result<SweepTable, CampaignError> {
    parse_sweep_table(&read_file(path.as_ref())?, abscissa)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub x: f64,
    pub model_dbm: f64,
    pub measured_dbm: f64,
    /// measured − model
    pub residual_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rmse_db: f64,
    /// Mean of measured − model.
    pub bias_db: f64,
    pub residuals: Vec<Residual>,
}

impl Comparison {
    pub fn points(&self) -> usize {
        self.residuals.len()
    }

    /// CSV with header `x,model_dbm,meas_dbm,residual_db`.
    pub fn residuals_csv(&self) -> String {
        let mut out = String::from("x,model_dbm,meas_dbm,residual_db\n");
        for r in &self.residuals {
            writeln!(
                out,
                "{},{:.12},{:.12},{:.12}",
                r.x, r.model_dbm, r.measured_dbm, r.residual_db
            )
            .unwrap();
        }
        out
    }
}

/// Model value at `x` by linear interpolation in dB; `None` outside the
/// table or next to a no-coupling row.
fn interpolate(rows: &[SweepRow], column: usize, x: f64) -> Option<f64> {
    let i = rows.partition_point(|r| r.x < x);
    let hi = rows.get(i)?;
    if hi.x == x {
        return hi.dbm[column];
    }
    let lo = rows.get(i.checked_sub(1)?)?;
    let (y0, y1) = (lo.dbm[column]?, hi.dbm[column]?);
    let t = (x - lo.x) / (hi.x - lo.x);
    Some(y0 + t * (y1 - y0))
}

/// Compares one model column against measurements. Measurements outside the
/// model range are ignored; nothing is extrapolated.
pub fn compare(
    table: &SweepTable,
    column: &str,
    measured: &MeasurementSeries,
) -> Result<Comparison, CampaignError> {
    if table.abscissa() != measured.abscissa() {
        return Err(CampaignError::AbscissaMismatch {
            model: table.abscissa(),
            measured: measured.abscissa(),
        });
    }
    let col = table
        .column_index(column)
        .ok_or_else(|| CampaignError::UnknownColumn(column.to_string()))?;
    let rows = table.rows();
    let residuals: Vec<Residual> = measured
        .points()
        .iter()
        .filter_map(|&(x, measured_dbm)| {
            interpolate(rows, col, x).map(|model_dbm| Residual {
                x,
                model_dbm,
                measured_dbm,
                residual_db: measured_dbm - model_dbm,
            })
        })
        .collect();
    if residuals.is_empty() {
        let lo = rows.first().map_or(f64::NAN, |r| r.x);
        let hi = rows.last().map_or(f64::NAN, |r| r.x);
        return Err(CampaignError::EmptyOverlap { lo, hi });
    }
    let n = residuals.len() as f64;
    let bias_db = residuals.iter().map(|r| r.residual_db).sum::<f64>() / n;
    let rmse_db = (residuals
        .iter()
        .map(|r| r.residual_db * r.residual_db)
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(Comparison {
        rmse_db,
        bias_db,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SPEED_OF_LIGHT;

    fn table(points: &[(f64, Option<f64>)]) -> SweepTable {
        let rows = points
            .iter()
            .map(|&(x, v)| SweepRow { x, dbm: vec![v] })
            .collect();
        SweepTable::new(Abscissa::AngleDeg, vec!["refined_dbm".into()], rows).unwrap()
    }

    #[test]
    fn lossless_link_has_zero_gain() {
        let lambda = SPEED_OF_LIGHT / 27e9;
        let d = 1.7;
        let pr = 0.1 * (lambda / (4.0 * PI * d)).powi(2);
        assert!(calibration_gain(0.1, pr, d, lambda).unwrap().abs() < 1e-12);
    }

    #[test]
    fn reproduces_reference_calibration() {
        let lambda = SPEED_OF_LIGHT / 27e9;
        let pr = direct_link_received_power(0.1, 24.0, 1.0, lambda).unwrap();
        let g = calibration_gain(0.1, pr, 1.0, lambda).unwrap();
        assert!((g - 24.0).abs() < 1e-12);
        let b27 = &reference_calibrations()[1];
        assert_eq!(
            (b27.system.as_str(), b27.frequency, b27.gain_product_db),
            ("B", 27e9, 24.0)
        );
    }

    #[test]
    fn doubling_distance_adds_six_db() {
        let lambda = SPEED_OF_LIGHT / 33e9;
        let a = calibration_gain(1.0, 1e-6, 1.0, lambda).unwrap();
        let b = calibration_gain(1.0, 1e-6, 2.0, lambda).unwrap();
        assert!((b - a - 20.0 * 2f64.log10()).abs() < 1e-12);
        assert!(calibration_gain(0.0, 1e-6, 1.0, lambda).is_err());
    }

    #[test]
    fn spa_identities_and_scaling() {
        let lambda = |f: f64| SPEED_OF_LIGHT / f;
        let r = spa_metrics(lambda(3e9) / 2.0, lambda(3e9) / 2.0, 3e9, 2.8e-3).unwrap();
        assert_eq!(r.energy_efficiency * r.unit_power, r.scattering);
        assert!((r.power_density * r.area - r.unit_power).abs() <= 1e-15 * r.unit_power);
        let hi = spa_metrics(lambda(30e9) / 2.0, lambda(30e9) / 2.0, 30e9, 2.8e-3).unwrap();
        // higher frequency: smaller cells, so less scattering per watt
        assert!((r.energy_efficiency / hi.energy_efficiency - 100.0).abs() < 1e-9);
        assert!((hi.power_density / r.power_density - 100.0).abs() < 1e-9);
        let scaled = r.scaled_to(30e9).unwrap();
        assert!((scaled.energy_efficiency / hi.energy_efficiency - 1.0).abs() < 1e-12);
        let half = spa_metrics(1e-3, 2e-3, 28e9, 3.75e-3 / 2.0).unwrap();
        let full = spa_metrics(1e-3, 2e-3, 28e9, 3.75e-3).unwrap();
        assert!((half.energy_efficiency / full.energy_efficiency - 2.0).abs() < 1e-12);
    }

    #[test]
    fn measurement_parsing() {
        let s = parse_measurements(
            "x,power_dbm\n2,-40\n-1,-50.5\n0.5,-45\n",
            Abscissa::AngleDeg,
        )
        .unwrap();
        assert_eq!(s.points(), &[(-1.0, -50.5), (0.5, -45.0), (2.0, -40.0)]);
        let err =
            parse_measurements("x,power_dbm\n1,-40\nabc,-60\n", Abscissa::AngleDeg).unwrap_err();
        assert!(matches!(err, CampaignError::Parse { line: 3, .. }), "{err}");
        assert!(matches!(
            parse_measurements("angle,p\n1,2\n3,4\n", Abscissa::AngleDeg),
            Err(CampaignError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_measurements("x,power_dbm\n1,-40\n", Abscissa::AngleDeg),
            Err(CampaignError::TooFewPoints(1))
        ));
        assert!(matches!(
            parse_measurements("x,power_dbm\n1,-40\n1,-41\n2,-3\n", Abscissa::AngleDeg),
            Err(CampaignError::ConflictingDuplicate { .. })
        ));
        let dup =
            parse_measurements("x,power_dbm\n1,-40\n1,-40\n2,-3\n", Abscissa::AngleDeg).unwrap();
        assert_eq!(dup.len(), 2);
    }

    #[test]
    fn sweep_table_round_trip() {
        let t = table(&[
            (-1.0, Some(-50.123456789012)),
            (0.0, None),
            (1.5, Some(-3.0)),
        ]);
        let back = parse_sweep_table(&t.to_csv(), Abscissa::AngleDeg).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn self_comparison_is_exact() {
        let t = table(&[(0.0, Some(-40.0)), (1.0, Some(-42.0)), (2.0, Some(-47.5))]);
        let m = MeasurementSeries::from_table(&t, 0).unwrap();
        let c = compare(&t, "refined_dbm", &m).unwrap();
        assert_eq!((c.rmse_db, c.bias_db, c.points()), (0.0, 0.0, 3));
    }

    #[test]
    fn constant_offset() {
        let t = table(&[(0.0, Some(-40.0)), (1.0, Some(-42.0)), (2.0, Some(-47.5))]);
        let m = MeasurementSeries::new(
            Abscissa::AngleDeg,
            vec![(0.0, -37.0), (1.0, -39.0), (2.0, -44.5)],
        )
        .unwrap();
        let c = compare(&t, "refined_dbm", &m).unwrap();
        assert!((c.rmse_db - 3.0).abs() < 1e-12);
        assert!((c.bias_db - 3.0).abs() < 1e-12);
    }

    #[test]
    fn midpoints_of_linear_segments_interpolate_exactly() {
        let t = table(&[(0.0, Some(-40.0)), (2.0, Some(-44.0)), (4.0, Some(-48.0))]);
        let m = MeasurementSeries::new(
            Abscissa::AngleDeg,
            vec![(1.0, -42.0), (3.0, -46.0), (9.0, 0.0)],
        )
        .unwrap();
        let c = compare(&t, "refined_dbm", &m).unwrap();
        assert_eq!(c.points(), 2);
        assert!(c.rmse_db < 1e-12);
    }

    #[test]
    fn comparison_domain_errors() {
        let t = table(&[(0.0, Some(-40.0)), (1.0, None), (2.0, Some(-44.0))]);
        let far =
            MeasurementSeries::new(Abscissa::AngleDeg, vec![(5.0, -1.0), (6.0, -1.0)]).unwrap();
        assert!(matches!(
            compare(&t, "refined_dbm", &far),
            Err(CampaignError::EmptyOverlap { .. })
        ));
        let near_gap =
            MeasurementSeries::new(Abscissa::AngleDeg, vec![(0.5, -1.0), (1.5, -1.0)]).unwrap();
        assert!(matches!(
            compare(&t, "refined_dbm", &near_gap),
            Err(CampaignError::EmptyOverlap { .. })
        ));
        let dist =
            MeasurementSeries::new(Abscissa::DistanceM, vec![(0.5, -1.0), (1.5, -1.0)]).unwrap();
        assert!(matches!(
            compare(&t, "refined_dbm", &dist),
            Err(CampaignError::AbscissaMismatch { .. })
        ));
        assert!(matches!(
            compare(&t, "legacy_dbm", &near_gap),
            Err(CampaignError::UnknownColumn(_))
        ));
    }
}
