//! End-to-end scenarios on the two reference surfaces.

use std::f64::consts::PI;

use ris_pathloss::configuration::{focusing_phases, stripe_coding, uniform_coding, CodingState};
use ris_pathloss::engine::{
    pathloss_nearfield_broadcast, received_power_general_refined, sweep_angle, sweep_distance,
    Model, Scenario, SweepRange,
};
use ris_pathloss::geometry::{spherical_to_cartesian, RisGrid, TerminalPlacement};
use ris_pathloss::units::db_to_linear;

fn ris1() -> RisGrid {
    RisGrid::new(20, 56, 1.4e-3, 2.8e-3, 27e9).unwrap()
}

fn ris2() -> RisGrid {
    RisGrid::new(40, 40, 3.8e-3, 3.8e-3, 33e9).unwrap()
}

fn at(d: f64, theta_deg: f64, phi: f64, gain_db: f64) -> TerminalPlacement {
    TerminalPlacement::new(
        spherical_to_cartesian(d, theta_deg.to_radians(), phi).unwrap(),
        db_to_linear(gain_db),
    )
    .unwrap()
}

fn stripe_peaks(
    grid: RisGrid,
    period: usize,
    window: std::ops::RangeInclusive<usize>,
    d1: f64,
    d2: f64,
    s0: CodingState,
    s1: CodingState,
) -> (f64, f64) {
    let map = stripe_coding(&grid, period, window, &s0, &s1).unwrap();
    let s = Scenario::new(
        grid,
        map,
        at(d1, 0.0, 0.0, 20.4),
        at(d2, 0.0, 0.0, 20.4),
        0.1,
    )
    .unwrap();
    let t = sweep_angle(
        &s,
        SweepRange::new(-60.0, 60.0, 0.5).unwrap(),
        &[Model::Refined],
    )
    .unwrap();
    let neg = t.argmax(0, |x| x < -5.0).unwrap().0;
    let pos = t.argmax(0, |x| x > 5.0).unwrap().0;
    (neg, pos)
}

#[test]
fn ris1_stripe_coding_steers_two_beams() {
    let s0 = CodingState::new("0", 0.9, 165f64.to_radians()).unwrap();
    let s1 = CodingState::new("1", 0.7, 0.0).unwrap();
    let (neg, pos) = stripe_peaks(ris1(), 14, 1..=7, 1.3, 2.6, s0, s1);
    assert!((neg + 34.0).abs() <= 1.5, "{neg}");
    assert!((pos - 34.0).abs() <= 1.5, "{pos}");
}

#[test]
fn ris2_stripe_coding_steers_two_beams() {
    let s0 = CodingState::new("0", 0.8, 150f64.to_radians()).unwrap();
    let s1 = CodingState::new("1", 0.8, 0.0).unwrap();
    let (neg, pos) = stripe_peaks(ris2(), 4, 1..=2, 5.0, 5.0, s0, s1);
    assert!((neg + 37.0).abs() <= 1.5, "{neg}");
    assert!((pos - 37.0).abs() <= 1.5, "{pos}");
}

#[test]
fn broadcast_closed_form_tracks_near_field_uniform_surface() {
    let grid = ris2();
    let state = CodingState::new("0", 0.8, 150f64.to_radians()).unwrap();
    let map = uniform_coding(&grid, &state);
    let tx = at(0.25, 10.0, PI, 21.1);
    let s = Scenario::new(grid, map, tx, at(1.0, 10.0, 0.0, 21.1), 1.0).unwrap();
    let t = sweep_distance(
        &s,
        SweepRange::new(0.25, 2.0, 0.05).unwrap(),
        10f64.to_radians(),
        0.0,
        &[Model::Refined, Model::NearFieldBroadcast],
    )
    .unwrap();
    for r in t.rows() {
        let (refined, broadcast) = (r.dbm[0].unwrap(), r.dbm[1].unwrap());
        assert!(
            (refined - broadcast).abs() <= 3.0,
            "d2 = {}: {refined} vs {broadcast}",
            r.x
        );
    }
}

#[test]
fn far_field_distance_laws() {
    let grid = ris1();
    let s0 = CodingState::new("0", 0.9, 165f64.to_radians()).unwrap();
    let map = uniform_coding(&grid, &s0);
    let near = Scenario::new(
        grid,
        map.clone(),
        at(20.0, 10.0, PI, 20.4),
        at(20.0, 10.0, 0.0, 20.4),
        1.0,
    )
    .unwrap();
    let far = near.clone().with_tx(at(40.0, 10.0, PI, 20.4));
    let range = SweepRange::new(20.0, 200.0, 20.0).unwrap();
    let theta = 10f64.to_radians();
    let a = sweep_distance(&near, range, theta, 0.0, &[Model::Refined]).unwrap();
    let b = sweep_distance(&far, range, theta, 0.0, &[Model::Refined]).unwrap();
    for (ra, rb) in a.rows().iter().zip(b.rows()) {
        let offset = ra.dbm[0].unwrap() - rb.dbm[0].unwrap();
        assert!((offset - 6.02).abs() < 0.05, "{offset}");
    }
    // last decade of received power vs d2
    let p = |d: f64| {
        let s = near.clone().with_rx(at(d, 10.0, 0.0, 20.4));
        received_power_general_refined(&s).received_dbm().unwrap()
    };
    let slope = p(200.0) - p(20.0);
    assert!((slope + 20.0).abs() < 0.2, "{slope}");
}

#[test]
fn focusing_beats_uniform_coding_off_specular() {
    let grid = ris2();
    let tx = at(1.0, 0.0, 0.0, 21.1);
    let rx = at(1.5, 30.0, 0.0, 21.1);
    let uniform = uniform_coding(&grid, &CodingState::new("0", 0.8, 0.0).unwrap());
    let focus = focusing_phases(&grid, &tx.position(), &rx.position(), 0.8).unwrap();
    let s = Scenario::new(grid, uniform, tx, rx, 1.0).unwrap();
    let p_uniform = received_power_general_refined(&s).received_power;
    let p_focus = received_power_general_refined(&s.with_map(focus).unwrap()).received_power;
    assert!(p_focus > 10.0 * p_uniform);
}

#[test]
fn broadcast_closed_form_depends_only_on_total_path() {
    let gains = ris_pathloss::engine::AntennaGains::new(100.0, 100.0, 1.0).unwrap();
    let lambda = ris2().wavelength();
    let a = pathloss_nearfield_broadcast(gains, 0.5, 1.5, lambda, 0.8)
        .unwrap()
        .db()
        .unwrap();
    let b = pathloss_nearfield_broadcast(gains, 1.2, 0.8, lambda, 0.8)
        .unwrap()
        .db()
        .unwrap();
    assert!((a - b).abs() < 1e-12);
}
