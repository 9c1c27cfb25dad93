//! Closed-form path-loss expressions for specific configurations.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::{magnitude_sum, AntennaGains, PathLoss, PowerResult, Scenario};
use crate::error::{ensure_positive, Error, Result};
use crate::geometry::{CellLinkGeometry, RisGrid};
use crate::patterns::PatternSet;

/// Far-field link seen from the surface center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarFieldLink {
    pub d1: f64,
    pub d2: f64,
    /// Elevation of the transmitter, radians.
    pub theta_t: f64,
    /// Elevation of the receiver, radians.
    pub theta_r: f64,
}

impl FarFieldLink {
    /// Link parameters of a scenario's terminal placements.
    pub fn of(s: &Scenario) -> Self {
        let (tx, rx) = (s.tx().position(), s.rx().position());
        Self {
            d1: tx.norm(),
            d2: rx.norm(),
            theta_t: tx.elevation(),
            theta_r: rx.elevation(),
        }
    }
}

fn ensure_amplitude(a: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&a) {
        Ok(a)
    } else {
        Err(Error::invalid(
            "reflection amplitude",
            format!("must lie in [0, 1], got {a}"),
        ))
    }
}

fn ensure_elevation(name: &'static str, theta: f64) -> Result<f64> {
    if (0.0..=FRAC_PI_2).contains(&theta) {
        Ok(theta)
    } else {
        Err(Error::invalid(
            name,
            format!("must lie in [0, π/2], got {theta}"),
        ))
    }
}

/// `cos θ` that is exactly zero at grazing, where `f64` gives 6e-17.
fn elevation_cos(theta: f64) -> f64 {
    if theta >= FRAC_PI_2 {
        0.0
    } else {
        theta.cos()
    }
}

/// Far-field beamforming:
/// `16π² (d1 d2)² / (G_t G_r G_line (M N d_x d_y)² cos θ_t cos θ_r A²)`.
pub fn pathloss_farfield_beam_refined(
    grid: &RisGrid,
    gains: AntennaGains,
    link: FarFieldLink,
    amplitude: f64,
) -> Result<PathLoss> {
    ensure_positive("d1", link.d1)?;
    ensure_positive("d2", link.d2)?;
    let theta_t = ensure_elevation("transmit elevation", link.theta_t)?;
    let theta_r = ensure_elevation("receive elevation", link.theta_r)?;
    let a = ensure_amplitude(amplitude)?;
    let area = grid.aperture_area();
    let angular = elevation_cos(theta_t) * elevation_cos(theta_r);
    let d = link.d1 * link.d2;
    Ok(PathLoss::from_ratio(
        16.0 * PI * PI * d * d / (gains.product() * area * area * angular * a * a),
    ))
}

/// Near-field focusing with all phases co-phased at the receiver:
/// `16π² / (G_t G_r G_line (d_x d_y)² A² (Σ √F / r^t r^r)²)`.
///
/// Needs a map with one amplitude everywhere; the map's phases are ignored.
pub fn pathloss_nearfield_focus_refined(s: &Scenario) -> Result<PathLoss> {
    let a = s
        .map()
        .uniform_amplitude()
        .ok_or(Error::NonUniformAmplitude)?;
    let area = s.grid().cell_area();
    let sum = magnitude_sum(s);
    Ok(PathLoss::from_ratio(
        16.0 * PI * PI / (s.gains().product() * area * area * a * a * sum * sum),
    ))
}

/// Near-field broadcasting of an electrically large surface:
/// `16π² (d1 + d2)² / (G_t G_r G_line λ² A²)`.
pub fn pathloss_nearfield_broadcast(
    gains: AntennaGains,
    d1: f64,
    d2: f64,
    wavelength: f64,
    amplitude: f64,
) -> Result<PathLoss> {
    ensure_positive("d1", d1)?;
    ensure_positive("d2", d2)?;
    ensure_positive("wavelength", wavelength)?;
    let a = ensure_amplitude(amplitude)?;
    let d = d1 + d2;
    Ok(PathLoss::from_ratio(
        16.0 * PI * PI * d * d / (gains.product() * wavelength * wavelength * a * a),
    ))
}

/// Path loss through a single cell:
/// `16π² (r^t r^r)² / (G_t G_r G_line (d_x d_y)² F |Γ|²)`.
pub fn pathloss_single_cell(
    geom: &CellLinkGeometry,
    patterns: &PatternSet,
    gains: AntennaGains,
    cell_width: f64,
    cell_length: f64,
    gamma: Complex64,
) -> Result<PathLoss> {
    ensure_positive("cell width", cell_width)?;
    ensure_positive("cell length", cell_length)?;
    let f = patterns.combine(geom).value();
    let area = cell_width * cell_length;
    let r = geom.r_t * geom.r_r;
    Ok(PathLoss::from_ratio(
        16.0 * PI * PI * r * r / (gains.product() * area * area * f * gamma.norm_sqr()),
    ))
}

/// Radar cross section of a flat conducting plate the size of the surface at
/// normal incidence, `4π (M N d_x d_y)² / λ²`.
pub fn metal_plate_rcs(grid: &RisGrid) -> f64 {
    let area = grid.aperture_area();
    let lambda = grid.wavelength();
    4.0 * PI * area * area / (lambda * lambda)
}

/// Received power off an equally sized metal plate at normal incidence, via
/// the bistatic radar equation `P_t G_t G_r λ² σ / (64π³ (d1 d2)²)`.
pub fn metal_plate_received_power(
    grid: &RisGrid,
    gains: AntennaGains,
    d1: f64,
    d2: f64,
    transmit_power: f64,
) -> Result<PowerResult> {
    ensure_positive("d1", d1)?;
    ensure_positive("d2", d2)?;
    ensure_positive("transmit power", transmit_power)?;
    let lambda = grid.wavelength();
    let d = d1 * d2;
    let pr = transmit_power * gains.product() * lambda * lambda * metal_plate_rcs(grid)
        / (64.0 * PI.powi(3) * d * d);
    Ok(PowerResult::new(transmit_power, pr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configuration::{focusing_phases, uniform_coding, CodingState};
    use crate::engine::received_power_general_refined;
    use crate::geometry::{link_geometry, spherical_to_cartesian, Point3, TerminalPlacement};
    use crate::units::{db_to_linear, linear_to_db};

    fn gains(g: f64) -> AntennaGains {
        AntennaGains::new(g, g, 1.0).unwrap()
    }

    fn db(pl: PathLoss) -> f64 {
        pl.db().unwrap()
    }

    fn ris2() -> RisGrid {
        RisGrid::new(40, 40, 3.8e-3, 3.8e-3, 33e9).unwrap()
    }

    fn link(d1: f64, d2: f64, theta: f64) -> FarFieldLink {
        FarFieldLink {
            d1,
            d2,
            theta_t: theta,
            theta_r: theta,
        }
    }

    #[test]
    fn farfield_distance_law() {
        let g = ris2();
        let a = pathloss_farfield_beam_refined(&g, gains(100.0), link(3.0, 4.0, 0.2), 0.8).unwrap();
        let b = pathloss_farfield_beam_refined(&g, gains(100.0), link(6.0, 8.0, 0.2), 0.8).unwrap();
        assert!((db(b) - db(a) - 20.0 * 4f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn farfield_angle_law() {
        let g = ris2();
        let a = pathloss_farfield_beam_refined(&g, gains(100.0), link(3.0, 4.0, 0.0), 0.8).unwrap();
        let b = pathloss_farfield_beam_refined(&g, gains(100.0), link(3.0, 4.0, PI / 4.0), 0.8)
            .unwrap();
        assert!((db(b) - db(a) - 3.010_299_956_639_812).abs() < 1e-9);
    }

    #[test]
    fn farfield_grazing_is_no_coupling() {
        let pl =
            pathloss_farfield_beam_refined(&ris2(), gains(10.0), link(3.0, 4.0, FRAC_PI_2), 1.0)
                .unwrap();
        assert!(pl.is_no_coupling());
        assert!(
            pathloss_farfield_beam_refined(&ris2(), gains(10.0), link(3.0, 4.0, 2.0), 1.0).is_err()
        );
        assert!(
            pathloss_farfield_beam_refined(&ris2(), gains(10.0), link(0.0, 4.0, 0.0), 1.0).is_err()
        );
    }

    #[test]
    fn farfield_monotone_in_angle() {
        let mut prev = 0.0;
        for i in 0..89 {
            let t = (i as f64).to_radians();
            let pl = pathloss_farfield_beam_refined(
                &ris2(),
                gains(10.0),
                FarFieldLink {
                    d1: 2.0,
                    d2: 3.0,
                    theta_t: t,
                    theta_r: 0.3,
                },
                1.0,
            )
            .unwrap()
            .linear()
            .unwrap();
            assert!(pl > prev);
            prev = pl;
        }
    }

    #[test]
    fn farfield_matches_co_phased_general_model() {
        // RIS2 at the Fraunhofer distance, calibrated product 22.0 dB.
        let grid = ris2();
        let theta = 10f64.to_radians();
        let tx = spherical_to_cartesian(5.0, theta, PI).unwrap();
        let rx = spherical_to_cartesian(5.0, theta, 0.0).unwrap();
        let map = focusing_phases(&grid, &tx, &rx, 0.8).unwrap();
        let s = Scenario::new(
            grid,
            map,
            TerminalPlacement::new(tx, 128.8).unwrap(),
            TerminalPlacement::new(rx, 128.8).unwrap(),
            0.1,
        )
        .unwrap()
        .with_calibrated_product(db_to_linear(22.0))
        .unwrap();
        let general = received_power_general_refined(&s).path_loss();
        let closed =
            pathloss_farfield_beam_refined(&grid, s.gains(), FarFieldLink::of(&s), 0.8).unwrap();
        assert!(
            (db(general) - db(closed)).abs() < 0.5,
            "{} vs {}",
            db(general),
            db(closed)
        );
    }

    fn ris2_focus(d1: f64) -> Scenario {
        let grid = ris2();
        let theta = 10f64.to_radians();
        let tx = spherical_to_cartesian(d1, theta, PI).unwrap();
        let rx = spherical_to_cartesian(1.5, 0.0, 0.0).unwrap();
        Scenario::new(
            grid,
            focusing_phases(&grid, &tx, &rx, 0.8).unwrap(),
            TerminalPlacement::new(tx, 128.8).unwrap(),
            TerminalPlacement::new(rx, 128.8).unwrap(),
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn focus_identity_with_general_model() {
        let s = ris2_focus(0.25);
        let general = received_power_general_refined(&s)
            .path_loss()
            .linear()
            .unwrap();
        let closed = pathloss_nearfield_focus_refined(&s)
            .unwrap()
            .linear()
            .unwrap();
        assert!(((general - closed) / closed).abs() <= 1e-12);
    }

    #[test]
    fn focus_amplitude_law() {
        let s = ris2_focus(0.25);
        let half = uniform_coding(s.grid(), &CodingState::new("h", 0.4, 0.0).unwrap());
        let a = pathloss_nearfield_focus_refined(&s).unwrap();
        let b = pathloss_nearfield_focus_refined(&s.with_map(half).unwrap()).unwrap();
        assert!((db(b) - db(a) - 20.0 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn focus_rejects_mixed_amplitudes() {
        use crate::configuration::stripe_coding;
        let s = ris2_focus(1.0);
        let (s0, s1) = (
            CodingState::new("0", 0.9, 0.0).unwrap(),
            CodingState::new("1", 0.7, 1.0).unwrap(),
        );
        let map = stripe_coding(s.grid(), 4, 1..=2, &s0, &s1).unwrap();
        assert_eq!(
            pathloss_nearfield_focus_refined(&s.with_map(map).unwrap()),
            Err(Error::NonUniformAmplitude)
        );
    }

    #[test]
    fn focus_single_cell_is_single_cell_model() {
        let grid = RisGrid::new(1, 1, 5e-3, 4e-3, 30e9).unwrap();
        let tx = Point3::new(0.2, 0.1, 0.5);
        let rx = Point3::new(-0.4, 0.0, 0.9);
        let s = Scenario::new(
            grid,
            focusing_phases(&grid, &tx, &rx, 0.6).unwrap(),
            TerminalPlacement::new(tx, 10.0).unwrap(),
            TerminalPlacement::new(rx, 14.0).unwrap(),
            1.0,
        )
        .unwrap();
        let focus = pathloss_nearfield_focus_refined(&s)
            .unwrap()
            .linear()
            .unwrap();
        let geom = link_geometry(&grid, &tx, &rx, 1, 1).unwrap();
        let single = pathloss_single_cell(
            &geom,
            s.patterns(),
            s.gains(),
            5e-3,
            4e-3,
            s.map().get(1, 1).unwrap(),
        )
        .unwrap()
        .linear()
        .unwrap();
        assert!(((focus - single) / single).abs() < 1e-13);
    }

    #[test]
    fn broadcast_laws() {
        let g = gains(128.8);
        let l = 9e-3;
        let a = db(pathloss_nearfield_broadcast(g, 0.5, 1.0, l, 0.8).unwrap());
        let b = db(pathloss_nearfield_broadcast(g, 1.0, 2.0, l, 0.8).unwrap());
        let c = db(pathloss_nearfield_broadcast(g, 1.2, 0.3, l, 0.8).unwrap());
        assert!((b - a - 20.0 * 2f64.log10()).abs() < 1e-9);
        assert!((a - c).abs() < 1e-9);
        assert!(pathloss_nearfield_broadcast(g, 0.5, 1.0, l, 0.0)
            .unwrap()
            .is_no_coupling());
        assert!(pathloss_nearfield_broadcast(g, -0.5, 1.0, l, 0.5).is_err());
    }

    #[test]
    fn single_cell_boresight_value() {
        let f = 27e9;
        let lambda = crate::geometry::SPEED_OF_LIGHT / f;
        let grid = RisGrid::new(1, 1, lambda / 2.0, lambda / 2.0, f).unwrap();
        let geom = link_geometry(
            &grid,
            &Point3::new(0.0, 0.0, 1.0),
            &Point3::new(0.0, 0.0, 1.0),
            1,
            1,
        )
        .unwrap();
        let patterns = PatternSet::from_gains(1.0, 1.0).unwrap();
        let pl = pathloss_single_cell(
            &geom,
            &patterns,
            gains(1.0),
            lambda / 2.0,
            lambda / 2.0,
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        let quarter = lambda * lambda / 4.0;
        let expected = 16.0 * PI * PI / (quarter * quarter);
        assert!(((pl.linear().unwrap() - expected) / expected).abs() < 1e-14);
        assert!((db(pl) - 112.2).abs() < 0.05);

        let smaller = pathloss_single_cell(
            &geom,
            &patterns,
            gains(1.0),
            lambda / 4.0,
            lambda / 2.0,
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        assert!((db(smaller) - db(pl) - 20.0 * 2f64.log10()).abs() < 1e-9);

        let dead = pathloss_single_cell(
            &geom,
            &patterns,
            gains(1.0),
            1e-3,
            1e-3,
            Complex64::new(0.0, 0.0),
        )
        .unwrap();
        assert!(dead.is_no_coupling());
    }

    #[test]
    fn single_cell_behind_pattern_is_no_coupling() {
        let geom = CellLinkGeometry {
            r_t: 1.0,
            r_r: 1.0,
            d_nm: 0.0,
            cos_theta_t: 0.0,
            cos_theta_r: 1.0,
            cos_theta_tx: 1.0,
            cos_theta_rx: 1.0,
        };
        let pl = pathloss_single_cell(
            &geom,
            &PatternSet::from_gains(10.0, 10.0).unwrap(),
            gains(10.0),
            1e-3,
            1e-3,
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        assert!(pl.is_no_coupling());
    }

    #[test]
    fn plate_rcs_ris1() {
        let grid = RisGrid::new(20, 56, 1.4e-3, 2.8e-3, 27e9).unwrap();
        assert!((metal_plate_rcs(&grid) - 1.964).abs() < 1e-3);
    }

    #[test]
    fn plate_equals_farfield_at_normal_incidence() {
        let grid = RisGrid::new(20, 56, 1.4e-3, 2.8e-3, 27e9).unwrap();
        let g = AntennaGains::new(109.6, 109.6, 0.02).unwrap();
        let plate = metal_plate_received_power(&grid, g, 1.3, 2.6, 0.1).unwrap();
        let ff = pathloss_farfield_beam_refined(&grid, g, link(1.3, 2.6, 0.0), 1.0).unwrap();
        let pl = plate.path_loss().linear().unwrap();
        assert!(((pl - ff.linear().unwrap()) / pl).abs() < 1e-13);
        assert!(linear_to_db(pl).is_finite());
    }
}
