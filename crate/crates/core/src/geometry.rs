//! Coordinate frame of the RIS-assisted link.
//!
//! The surface lies in the x-y plane with its centroid at the origin. Unit
//! cell `(n, m)` sits in row `n` (along y) and column `m` (along x), both
//! 1-based. Terminals live in the half-space `z > 0`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Elevation from the surface normal, radians.
    pub fn elevation(&self) -> f64 {
        (self.z / self.norm()).clamp(-1.0, 1.0).acos()
    }

    /// Azimuth in the surface plane, radians in `(-π, π]`.
    pub fn azimuth(&self) -> f64 {
        self.y.atan2(self.x)
    }
}

/// Places a point at distance `d` along elevation `theta` (from the surface
/// normal) and azimuth `phi`.
pub fn spherical_to_cartesian(d: f64, theta: f64, phi: f64) -> Result<Point3> {
    ensure_positive("distance", d)?;
    ensure_finite("azimuth", phi)?;
    if !(theta.is_finite() && (0.0..FRAC_PI_2).contains(&theta)) {
        return Err(Error::invalid(
            "elevation",
            format!("must lie in [0, π/2) so the terminal is in front of the surface, got {theta}"),
        ));
    }
    let (sin_t, cos_t) = theta.sin_cos();
    let (sin_p, cos_p) = phi.sin_cos();
    Ok(Point3::new(d * sin_t * cos_p, d * sin_t * sin_p, d * cos_t))
}

/// Unit-cell lattice of the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisGrid {
    rows: usize,
    cols: usize,
    cell_width: f64,
    cell_length: f64,
    frequency: f64,
}

impl RisGrid {
    /// `rows` = N (along y), `cols` = M (along x). `cell_width` is d_x and
    /// `cell_length` is d_y, both in meters.
    pub fn new(
        rows: usize,
        cols: usize,
        cell_width: f64,
        cell_length: f64,
        frequency: f64,
    ) -> Result<Self> {
        if rows == 0 {
            return Err(Error::invalid("rows", "must be at least 1"));
        }
        if cols == 0 {
            return Err(Error::invalid("cols", "must be at least 1"));
        }
        ensure_positive("cell width", cell_width)?;
        ensure_positive("cell length", cell_length)?;
        ensure_positive("frequency", frequency)?;
        Ok(Self {
            rows,
            cols,
            cell_width,
            cell_length,
            frequency,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    pub fn cell_length(&self) -> f64 {
        self.cell_length
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency
    }

    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_width * self.cell_length
    }

    /// Aperture extent along x (M·d_x).
    pub fn width(&self) -> f64 {
        self.cols as f64 * self.cell_width
    }

    /// Aperture extent along y (N·d_y).
    pub fn length(&self) -> f64 {
        self.rows as f64 * self.cell_length
    }

    pub fn aperture_area(&self) -> f64 {
        self.cell_count() as f64 * self.cell_area()
    }

    /// Center of cell `(n, m)`, 1-based.
    pub fn cell_center(&self, n: usize, m: usize) -> Result<Point3> {
        if n == 0 || n > self.rows || m == 0 || m > self.cols {
            return Err(Error::CellOutOfRange {
                n,
                m,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(self.center_unchecked(n, m))
    }

    fn center_unchecked(&self, n: usize, m: usize) -> Point3 {
        let x = (m as f64 - (self.cols as f64 + 1.0) / 2.0) * self.cell_width;
        let y = (n as f64 - (self.rows as f64 + 1.0) / 2.0) * self.cell_length;
        Point3::new(x, y, 0.0)
    }

    /// All cells as `(n, m, center)` in row-major order: row 1 columns
    /// 1..=M, then row 2, and so on.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, Point3)> + '_ {
        (1..=self.rows)
            .flat_map(move |n| (1..=self.cols).map(move |m| (n, m, self.center_unchecked(n, m))))
    }

    /// Near/far-field boundary 2D²/λ, with D the longer aperture side.
    pub fn fraunhofer_distance(&self) -> f64 {
        let d = self.width().max(self.length());
        2.0 * d * d / self.wavelength()
    }
}

/// A transmitter or receiver: where it is and its linear power gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalPlacement {
    position: Point3,
    gain: f64,
}

impl TerminalPlacement {
    pub fn new(position: Point3, gain: f64) -> Result<Self> {
        ensure_in_front(&position)?;
        if !(gain.is_finite() && gain >= 1.0) {
            return Err(Error::invalid(
                "antenna gain",
                format!("must be at least 1, got {gain}"),
            ));
        }
        Ok(Self { position, gain })
    }

    pub fn position(&self) -> Point3 {
        self.position
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn with_position(self, position: Point3) -> Result<Self> {
        Self::new(position, self.gain)
    }
}

fn ensure_in_front(p: &Point3) -> Result<()> {
    if !p.is_finite() {
        return Err(Error::invalid(
            "position",
            format!("coordinates must be finite, got {p:?}"),
        ));
    }
    if p.z <= 0.0 {
        return Err(Error::BehindSurface { z: p.z });
    }
    Ok(())
}

/// Distances and direction cosines of one cell relative to both terminals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellLinkGeometry {
    /// Transmitter to cell distance r^t.
    pub r_t: f64,
    /// Receiver to cell distance r^r.
    pub r_r: f64,
    /// Cell to surface-center distance.
    pub d_nm: f64,
    /// Cell-side elevation cosine towards the transmitter.
    pub cos_theta_t: f64,
    /// Cell-side elevation cosine towards the receiver.
    pub cos_theta_r: f64,
    /// Off-boresight cosine at the transmit antenna (boresight at the surface center).
    pub cos_theta_tx: f64,
    /// Off-boresight cosine at the receive antenna.
    pub cos_theta_rx: f64,
}

impl CellLinkGeometry {
    /// Same cell seen with the two terminals exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            r_t: self.r_r,
            r_r: self.r_t,
            d_nm: self.d_nm,
            cos_theta_t: self.cos_theta_r,
            cos_theta_r: self.cos_theta_t,
            cos_theta_tx: self.cos_theta_rx,
            cos_theta_rx: self.cos_theta_tx,
        }
    }
}

/// Geometry of cell `(n, m)` for terminals at `tx` and `rx`.
pub fn link_geometry(
    grid: &RisGrid,
    tx: &Point3,
    rx: &Point3,
    n: usize,
    m: usize,
) -> Result<CellLinkGeometry> {
    ensure_in_front(tx)?;
    ensure_in_front(rx)?;
    let center = grid.cell_center(n, m)?;
    cell_link(&center, tx, rx, tx.norm(), rx.norm()).ok_or(Error::CoincidentTerminal { n, m })
}

/// Unchecked per-cell kernel. `d1`/`d2` are the terminal distances to the
/// surface center. Returns `None` when a terminal sits on the cell center.
pub(crate) fn cell_link(
    center: &Point3,
    tx: &Point3,
    rx: &Point3,
    d1: f64,
    d2: f64,
) -> Option<CellLinkGeometry> {
    let r_t = tx.distance(center);
    let r_r = rx.distance(center);
    if r_t == 0.0 || r_r == 0.0 {
        return None;
    }
    let d_nm = (center.x * center.x + center.y * center.y).sqrt();
    let d_nm_sq = d_nm * d_nm;
    Some(CellLinkGeometry {
        r_t,
        r_r,
        d_nm,
        cos_theta_t: clamp_cos(tx.z / r_t),
        cos_theta_r: clamp_cos(rx.z / r_r),
        cos_theta_tx: law_of_cosines(d1, r_t, d_nm_sq),
        cos_theta_rx: law_of_cosines(d2, r_r, d_nm_sq),
    })
}

/// Angle at the terminal between the surface center and the cell.
fn law_of_cosines(to_center: f64, to_cell: f64, center_to_cell_sq: f64) -> f64 {
    clamp_cos(
        (to_center * to_center + to_cell * to_cell - center_to_cell_sq)
            / (2.0 * to_center * to_cell),
    )
}

fn clamp_cos(c: f64) -> f64 {
    c.clamp(-1.0, 1.0)
}
