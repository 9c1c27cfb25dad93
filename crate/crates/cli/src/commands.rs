//! Subcommands. Each writes its report to `out` and warnings to `err`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ris_pathloss::campaign::{
    calibration_gain, compare, load_measurements, load_sweep_table, spa_metrics, CampaignError,
};
use ris_pathloss::engine::{
    pathloss_single_cell, sweep_angle, sweep_distance, Abscissa, Model, PowerResult, Scenario,
    SweepRange, DEFAULT_LEGACY_SCATTERING_GAIN,
};
use ris_pathloss::geometry::SPEED_OF_LIGHT;
use ris_pathloss::units::{db_to_linear, dbm_to_watts};
use thiserror::Error;

use crate::config::{ConfigError, ScenarioConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] ris_pathloss::Error),
    #[error(transparent)]
    Campaign(#[from] CampaignError),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for bad configuration or arguments, 3 for I/O, 4 when a comparison
    /// has nothing to compare.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Io { .. }) | CliError::Write { .. } => 3,
            CliError::Campaign(CampaignError::Io { .. }) => 3,
            CliError::Campaign(
                CampaignError::EmptyOverlap { .. }
                | CampaignError::AbscissaMismatch { .. }
                | CampaignError::UnknownColumn(_),
            ) => 4,
            _ => 2,
        }
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Parser)]
#[command(
    name = "rispl",
    version,
    about = "Path loss of links assisted by a reconfigurable intelligent surface"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Received power and path loss of a scenario.
    Pathloss(PathlossArgs),
    /// Received power while moving the receiver; writes a CSV table.
    Sweep(SweepArgs),
    /// RMSE and bias of a measurement file against a sweep table.
    Compare(CompareArgs),
    /// Scattering, power and area figures of a unit cell.
    Spa(SpaArgs),
    /// Gain product G_t G_r G_line of a direct calibration link.
    Calibrate(CalibrateArgs),
    /// Reflection coefficients of the configured coding as CSV.
    Design(DesignArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    Refined,
    Legacy,
    Farfield,
    Focus,
    Broadcast,
    SingleCell,
    Plate,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClosedForm {
    Farfield,
    Focus,
    Broadcast,
    Plate,
}

impl From<ClosedForm> for Model {
    fn from(c: ClosedForm) -> Model {
        match c {
            ClosedForm::Farfield => Model::FarFieldBeam,
            ClosedForm::Focus => Model::NearFieldFocus,
            ClosedForm::Broadcast => Model::NearFieldBroadcast,
            ClosedForm::Plate => Model::MetalPlate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Angle,
    Distance,
}

impl From<Kind> for Abscissa {
    fn from(k: Kind) -> Abscissa {
        match k {
            Kind::Angle => Abscissa::AngleDeg,
            Kind::Distance => Abscissa::DistanceM,
        }
    }
}

#[derive(Debug, Args)]
pub struct PathlossArgs {
    pub config: PathBuf,
    #[arg(long, value_enum, default_value = "refined")]
    pub model: ModelChoice,
    /// Per-cell scattering gain of the legacy model.
    #[arg(long, default_value_t = DEFAULT_LEGACY_SCATTERING_GAIN)]
    pub scattering_gain: f64,
    /// Cell `n,m` for the single-cell model; defaults to the central cell.
    #[arg(long, value_parser = parse_cell)]
    pub cell: Option<(usize, usize)>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Degrees for angle sweeps, meters for distance sweeps.
    #[arg(long, allow_hyphen_values = true)]
    pub start: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub stop: f64,
    #[arg(long)]
    pub step: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Add a legacy-model column.
    #[arg(long)]
    pub legacy: bool,
    #[arg(long, default_value_t = DEFAULT_LEGACY_SCATTERING_GAIN)]
    pub scattering_gain: f64,
    /// Add a closed-form column.
    #[arg(long, value_enum)]
    pub closed_form: Option<ClosedForm>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Sweep table written by `sweep`.
    pub model: PathBuf,
    /// Measurements with header `x,power_dbm`.
    pub measurements: PathBuf,
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value = "refined_dbm")]
    pub column: String,
    /// Write per-point residuals here.
    #[arg(long)]
    pub residuals: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpaArgs {
    #[arg(long)]
    pub dx_mm: f64,
    #[arg(long)]
    pub dy_mm: f64,
    #[arg(long)]
    pub f_ghz: f64,
    #[arg(long)]
    pub pu_mw: f64,
    /// Also report the same design scaled to this frequency.
    #[arg(long)]
    pub compare_f_ghz: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub pt_dbm: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub pr_dbm: f64,
    #[arg(long)]
    pub d_m: f64,
    #[arg(long)]
    pub f_ghz: f64,
    /// Antenna gain budget G_t G_r; a larger result is reported as suspect.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub antenna_gain_db: f64,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    pub config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_cell(s: &str) -> Result<(usize, usize), String> {
    let (n, m) = s.split_once(',').ok_or("expected `n,m`")?;
    let n = n.trim().parse().map_err(|_| format!("bad row `{n}`"))?;
    let m = m.trim().parse().map_err(|_| format!("bad column `{m}`"))?;
    Ok((n, m))
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Pathloss(a) => cmd_pathloss(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Compare(a) => cmd_compare(&a, out),
        Command::Spa(a) => cmd_spa(&a, out),
        Command::Calibrate(a) => cmd_calibrate(&a, out, err),
        Command::Design(a) => cmd_design(&a, out),
    }
}

fn stdout_error(source: std::io::Error) -> CliError {
    CliError::Write {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn power_line(name: &str, p: &PowerResult) -> String {
    match (p.received_dbm(), p.path_loss().db()) {
        (Some(dbm), Some(pl)) => format!("{name}: Pr = {dbm:.6} dBm, PL = {pl:.6} dB"),
        _ => format!("{name}: no-coupling"),
    }
}

fn single_cell(s: &Scenario, cell: Option<(usize, usize)>) -> Result<PowerResult> {
    let grid = s.grid();
    let (n, m) = cell.unwrap_or((grid.rows().div_ceil(2), grid.cols().div_ceil(2)));
    let geom = s.cell_geometry(n, m)?;
    let gamma = s.map().get(n, m).expect("cell checked by geometry");
    let pl = pathloss_single_cell(
        &geom,
        s.patterns(),
        s.gains(),
        grid.cell_width(),
        grid.cell_length(),
        gamma,
    )?;
    Ok(PowerResult::from_path_loss(s.transmit_power(), pl))
}

pub fn cmd_pathloss(a: &PathlossArgs, out: &mut dyn Write) -> Result<()> {
    let s = ScenarioConfig::load(&a.config)?.to_scenario()?;
    let legacy = Model::Legacy {
        scattering_gain: a.scattering_gain,
    };
    let evaluate = |choice: ModelChoice| -> Result<(&'static str, PowerResult)> {
        let model = match choice {
            ModelChoice::Refined => Model::Refined,
            ModelChoice::Legacy => legacy,
            ModelChoice::Farfield => Model::FarFieldBeam,
            ModelChoice::Focus => Model::NearFieldFocus,
            ModelChoice::Broadcast => Model::NearFieldBroadcast,
            ModelChoice::Plate => Model::MetalPlate,
            ModelChoice::SingleCell => return Ok(("single-cell", single_cell(&s, a.cell)?)),
            ModelChoice::All => unreachable!(),
        };
        Ok((model.name(), model.evaluate(&s)?))
    };
    let mut lines = Vec::new();
    if a.model == ModelChoice::All {
        use ModelChoice::*;
        for choice in [
            Refined, Legacy, Farfield, Focus, Broadcast, SingleCell, Plate,
        ] {
            let name = choice
                .to_possible_value()
                .expect("not skipped")
                .get_name()
                .to_string();
            lines.push(match evaluate(choice) {
                Ok((_, p)) => power_line(&name, &p),
                Err(e) => format!("{name}: unavailable ({e})"),
            });
        }
    } else {
        let (name, p) = evaluate(a.model)?;
        lines.push(power_line(name, &p));
    }
    for l in lines {
        writeln!(out, "{l}").map_err(stdout_error)?;
    }
    Ok(())
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let s = ScenarioConfig::load(&a.config)?.to_scenario()?;
    let range =
        SweepRange::new(a.start, a.stop, a.step).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut models = vec![Model::Refined];
    if a.legacy {
        models.push(Model::Legacy {
            scattering_gain: a.scattering_gain,
        });
    }
    models.extend(a.closed_form.map(Model::from));
    let table = match a.kind {
        Kind::Angle => sweep_angle(&s, range, &models)?,
        Kind::Distance => {
            let dir = s.rx().position();
            sweep_distance(&s, range, dir.elevation(), dir.azimuth(), &models)?
        }
    };
    write_file(&a.out, &table.to_csv())?;
    writeln!(
        out,
        "wrote {} rows to {}",
        table.rows().len(),
        a.out.display()
    )
    .map_err(stdout_error)?;
    Ok(())
}

/// Rounds to the printed precision so a tiny negative value prints as 0.00.
fn two_decimals(x: f64) -> f64 {
    (x * 100.0).round() / 100.0 + 0.0
}

pub fn cmd_compare(a: &CompareArgs, out: &mut dyn Write) -> Result<()> {
    let kind = Abscissa::from(a.kind);
    let table = load_sweep_table(&a.model, kind)?;
    let meas = load_measurements(&a.measurements, kind)?;
    let c = compare(&table, &a.column, &meas)?;
    if let Some(path) = &a.residuals {
        write_file(path, &c.residuals_csv())?;
    }
    writeln!(
        out,
        "RMSE {:.2} dB, bias {:+.2} dB, n = {}",
        two_decimals(c.rmse_db),
        two_decimals(c.bias_db),
        c.points()
    )
    .map_err(stdout_error)?;
    Ok(())
}

pub fn cmd_spa(a: &SpaArgs, out: &mut dyn Write) -> Result<()> {
    let r = spa_metrics(
        a.dx_mm * 1e-3,
        a.dy_mm * 1e-3,
        a.f_ghz * 1e9,
        a.pu_mw * 1e-3,
    )?;
    let mut text = format!(
        "frequency: {} GHz\nscattering (cell area): {:.6e} m^2\nunit-cell power: {:.6e} W\n\
         energy efficiency: {:.6e} m^2/W\narea efficiency: {:.6}\npower density: {:.6e} W/m^2\n",
        a.f_ghz,
        r.scattering,
        r.unit_power,
        r.energy_efficiency,
        r.area_efficiency,
        r.power_density
    );
    if let Some(f2) = a.compare_f_ghz {
        let other = r.scaled_to(f2 * 1e9)?;
        text.push_str(&format!(
            "at {f2} GHz with wavelength-scaled cells:\n  energy efficiency: {:.6e} m^2/W\n  power density: {:.6e} W/m^2\n\
             energy-efficiency ratio ({} GHz / {f2} GHz): {:.2}\npower-density ratio ({f2} GHz / {} GHz): {:.2}\n",
            other.energy_efficiency,
            other.power_density,
            a.f_ghz,
            r.energy_efficiency / other.energy_efficiency,
            a.f_ghz,
            other.power_density / r.power_density,
        ));
    }
    out.write_all(text.as_bytes()).map_err(stdout_error)
}

pub fn cmd_calibrate(a: &CalibrateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    if a.f_ghz.is_nan() || a.f_ghz <= 0.0 {
        return Err(CliError::Usage(format!(
            "--f-ghz must be positive, got {}",
            a.f_ghz
        )));
    }
    let lambda = SPEED_OF_LIGHT / (a.f_ghz * 1e9);
    let g = calibration_gain(
        dbm_to_watts(a.pt_dbm),
        dbm_to_watts(a.pr_dbm),
        a.d_m,
        lambda,
    )?;
    writeln!(out, "GtGrGline = {g:.2} dB ({:.6} linear)", db_to_linear(g)).map_err(stdout_error)?;
    if g > a.antenna_gain_db {
        writeln!(
            err,
            "warning: received power is above the free-space bound for a {:.2} dB antenna budget; \
             the implied line gain is {:+.2} dB",
            a.antenna_gain_db,
            g - a.antenna_gain_db
        )
        .map_err(stdout_error)?;
    }
    Ok(())
}

pub fn cmd_design(a: &DesignArgs, out: &mut dyn Write) -> Result<()> {
    let map = ScenarioConfig::load(&a.config)?.map()?;
    let mut csv = String::from("n,m,amp,phase_deg\n");
    for (n, m, g) in map.iter() {
        let (amp, phase) = g.to_polar();
        csv.push_str(&format!(
            "{n},{m},{amp:.12},{:.12}\n",
            phase.to_degrees() + 0.0
        ));
    }
    match &a.out {
        Some(path) => {
            write_file(path, &csv)?;
            writeln!(
                out,
                "wrote {} cells to {}",
                map.rows() * map.cols(),
                path.display()
            )
            .map_err(stdout_error)
        }
        None => out.write_all(csv.as_bytes()).map_err(stdout_error),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_argument() {
        assert_eq!(parse_cell("3,17"), Ok((3, 17)));
        assert_eq!(parse_cell(" 1 , 2 "), Ok((1, 2)));
        assert!(parse_cell("3").is_err());
        assert!(parse_cell("a,1").is_err());
    }

    #[test]
    fn exit_codes() {
        let usage = CliError::Usage("x".into());
        assert_eq!(usage.exit_code(), 2);
        let overlap = CliError::Campaign(CampaignError::EmptyOverlap { lo: 0.0, hi: 1.0 });
        assert_eq!(overlap.exit_code(), 4);
        let io = CliError::Write {
            path: "x".into(),
            source: std::io::Error::other("denied"),
        };
        assert_eq!(io.exit_code(), 3);
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn rounding_hides_negative_zero() {
        assert_eq!(format!("{:+.2}", two_decimals(-1e-9)), "+0.00");
        assert_eq!(format!("{:+.2}", two_decimals(3.0)), "+3.00");
    }
}
