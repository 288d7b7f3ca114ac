//! Manhattan-grid environments, ground-user paths and link geometry.
//!
//! A city is a regular grid of square buildings of width `W` separated by
//! streets of width `S`. Along each axis the grid repeats with pitch
//! `S + W`: block `k` holds a street on `[k(S+W), k(S+W) + S]` followed by a
//! building on `[k(S+W) + S, (k+1)(S+W)]`. The default user path runs along
//! the centerline `x = S/2` of the first street.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Error, Result};

/// Side of the square region in which aerial base stations are placed (m).
pub const PLACEMENT_REGION_M: f64 = 1000.0;

/// Built-up parameters of an urban environment together with the grid
/// dimensions they imply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentParams {
    /// Ratio of land area covered by buildings.
    pub alpha: f64,
    /// Buildings per square kilometre.
    pub beta: f64,
    /// Rayleigh scale of the building heights (m).
    pub gamma: f64,
    /// Building width `W` (m).
    pub building_width: f64,
    /// Street width `S` (m).
    pub street_width: f64,
}

impl EnvironmentParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        check_domain("gamma", gamma, gamma > 0.0 && gamma.is_finite(), "gamma > 0")?;
        let (building_width, street_width) = derive_grid_dimensions(alpha, beta)?;
        Ok(Self {
            alpha,
            beta,
            gamma,
            building_width,
            street_width,
        })
    }

    /// Grid pitch `S + W` (m).
    pub fn block_pitch(&self) -> f64 {
        self.street_width + self.building_width
    }

    /// Buildings per axis needed to cover the placement region plus the
    /// user path: `ceil(1000 / (S + W)) + 1`.
    pub fn default_grid_extent(&self) -> usize {
        (PLACEMENT_REGION_M / self.block_pitch()).ceil() as usize + 1
    }
}

/// Building width `W = 1000 sqrt(alpha / beta)` and street width
/// `S = 1000 / sqrt(beta) - W`.
pub fn derive_grid_dimensions(alpha: f64, beta: f64) -> Result<(f64, f64)> {
    check_domain("alpha", alpha, alpha > 0.0 && alpha <= 1.0, "0 < alpha <= 1")?;
    check_domain("beta", beta, beta > 0.0 && beta.is_finite(), "beta > 0")?;
    let building = 1000.0 * (alpha / beta).sqrt();
    let street = 1000.0 / beta.sqrt() - building;
    if street <= 0.0 {
        return Err(Error::InvalidEnvironment(format!(
            "alpha = {alpha}, beta = {beta} leave no room for streets (S = {street:.3} m)"
        )));
    }
    Ok((building, street))
}

/// Inverse CDF of the Rayleigh distribution with scale `gamma`.
pub fn rayleigh_inverse_cdf(gamma: f64, u: f64) -> f64 {
    gamma * (-2.0 * (1.0 - u).ln()).sqrt()
}

/// Axis-aligned footprint of one building.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Footprint {
    /// True when `p` lies strictly inside the footprint.
    pub fn contains_interior(&self, p: Point2) -> bool {
        p.x > self.x_min && p.x < self.x_max && p.y > self.y_min && p.y < self.y_max
    }
}

/// A concrete city: building heights on a `rows x cols` grid.
///
/// Row index `i` counts blocks along `x`, column index `j` along `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    params: EnvironmentParams,
    rows: usize,
    cols: usize,
    heights: Vec<f64>,
    max_height: f64,
}

impl GridLayout {
    /// Builds a layout from explicit row-major heights.
    pub fn from_heights(
        params: EnvironmentParams,
        rows: usize,
        cols: usize,
        heights: Vec<f64>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "layout needs at least one building per axis, got {rows} x {cols}"
            )));
        }
        if heights.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "expected {} heights for a {rows} x {cols} layout, got {}",
                rows * cols,
                heights.len()
            )));
        }
        if let Some(&h) = heights.iter().find(|h| !(**h >= 0.0 && h.is_finite())) {
            return Err(Error::Domain {
                name: "building height",
                value: h,
                expected: "finite and >= 0",
            });
        }
        let max_height = heights.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            params,
            rows,
            cols,
            heights,
            max_height,
        })
    }

    pub fn params(&self) -> &EnvironmentParams {
        &self.params
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major building heights.
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn height(&self, i: usize, j: usize) -> f64 {
        self.heights[i * self.cols + j]
    }

    pub fn max_height(&self) -> f64 {
        self.max_height
    }

    pub fn footprint(&self, i: usize, j: usize) -> Footprint {
        let pitch = self.params.block_pitch();
        let s = self.params.street_width;
        Footprint {
            x_min: i as f64 * pitch + s,
            x_max: (i + 1) as f64 * pitch,
            y_min: j as f64 * pitch + s,
            y_max: (j + 1) as f64 * pitch,
        }
    }

    /// Building whose footprint interior contains `p`, if any.
    pub fn building_at(&self, p: Point2) -> Option<(usize, usize)> {
        let pitch = self.params.block_pitch();
        let (fi, fj) = ((p.x / pitch).floor(), (p.y / pitch).floor());
        if fi < 0.0 || fj < 0.0 || fi >= self.rows as f64 || fj >= self.cols as f64 {
            return None;
        }
        let (i, j) = (fi as usize, fj as usize);
        self.footprint(i, j).contains_interior(p).then_some((i, j))
    }

    pub fn export(&self) -> LayoutExport {
        LayoutExport {
            alpha: self.params.alpha,
            beta: self.params.beta,
            gamma: self.params.gamma,
            building_width: self.params.building_width,
            street_width: self.params.street_width,
            rows: self.rows,
            cols: self.cols,
            heights: self.heights.clone(),
        }
    }
}

/// JSON shape of an exported layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutExport {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(rename = "W")]
    pub building_width: f64,
    #[serde(rename = "S")]
    pub street_width: f64,
    #[serde(rename = "I")]
    pub rows: usize,
    #[serde(rename = "J")]
    pub cols: usize,
    pub heights: Vec<f64>,
}

/// Samples a layout with independent Rayleigh(`gamma`) building heights.
pub fn generate_layout<R: Rng + ?Sized>(
    params: EnvironmentParams,
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> Result<GridLayout> {
    let heights = (0..rows * cols)
        .map(|_| rayleigh_inverse_cdf(params.gamma, rng.random::<f64>()))
        .collect();
    GridLayout::from_heights(params, rows, cols, heights)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

/// Straight ground-user path sampled at a fixed resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct UePath {
    start: Point2,
    end: Point2,
    resolution: f64,
    /// Distance of every sample from `start`.
    offsets: Vec<f64>,
}

impl UePath {
    /// Path from `start` to `end`, sampled every `resolution` metres with
    /// the endpoint always included (the last interval may be shorter).
    pub fn new(start: Point2, end: Point2, resolution: f64) -> Result<Self> {
        check_domain(
            "resolution",
            resolution,
            resolution > 0.0 && resolution.is_finite(),
            "resolution > 0",
        )?;
        let length = start.distance(end);
        check_domain("path length", length, length > 0.0 && length.is_finite(), "d_p > 0")?;
        // Guard against 0.9 / 0.3 = 3.0000000000000004 adding a sliver step.
        let steps = (length / resolution - 1e-9).ceil().max(1.0) as usize;
        let mut offsets: Vec<f64> = (0..steps).map(|k| k as f64 * resolution).collect();
        offsets.push(length);
        Ok(Self {
            start,
            end,
            resolution,
            offsets,
        })
    }

    pub fn start(&self) -> Point2 {
        self.start
    }

    pub fn end(&self) -> Point2 {
        self.end
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn length(&self) -> f64 {
        *self.offsets.last().expect("path has at least two samples")
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Distance along the path of each sample.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Ground position at distance `s` from the start.
    pub fn point_at(&self, s: f64) -> Point2 {
        let t = s / self.length();
        Point2::new(
            self.start.x + t * (self.end.x - self.start.x),
            self.start.y + t * (self.end.y - self.start.y),
        )
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = Point2> + '_ {
        self.offsets.iter().map(|&s| self.point_at(s))
    }

    /// Grid axis the path is (mostly) aligned with.
    pub fn street_axis(&self) -> StreetAxis {
        if (self.end.x - self.start.x).abs() > (self.end.y - self.start.y).abs() {
            StreetAxis::X
        } else {
            StreetAxis::Y
        }
    }
}

/// Path along the street centerline `x = S/2`, from `y = 0` to `y = d_p`.
pub fn build_path(length: f64, resolution: f64, street_width: f64, _building_width: f64) -> Result<UePath> {
    let x = street_width / 2.0;
    UePath::new(Point2::new(x, 0.0), Point2::new(x, length), resolution)
}

/// Position of the aerial base station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsPlacement {
    pub x: f64,
    pub y: f64,
    /// Altitude above ground (m).
    pub h: f64,
}

impl AbsPlacement {
    pub fn new(x: f64, y: f64, h: f64) -> Result<Self> {
        check_domain("ABS altitude", h, h > 0.0 && h.is_finite(), "h > 0")?;
        Ok(Self { x, y, h })
    }

    pub fn ground(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Direction of the street the user stands in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StreetAxis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkAngles {
    /// Elevation of the ABS seen from the user, degrees in `(0, 90]`.
    pub theta: f64,
    /// Azimuth from the street axis folded into `[0, 90]` degrees.
    pub phi: f64,
    pub horizontal_distance: f64,
}

/// Elevation and folded azimuth of the link from a ground user to the ABS.
///
/// A user directly below the ABS gets `theta = 90` and `phi = 0`.
pub fn link_angles(ue: Point2, abs: &AbsPlacement, street_axis: StreetAxis) -> LinkAngles {
    let (dx, dy) = (abs.x - ue.x, abs.y - ue.y);
    let horizontal_distance = dx.hypot(dy);
    if horizontal_distance == 0.0 {
        return LinkAngles {
            theta: 90.0,
            phi: 0.0,
            horizontal_distance,
        };
    }
    let (along, across) = match street_axis {
        StreetAxis::X => (dx.abs(), dy.abs()),
        StreetAxis::Y => (dy.abs(), dx.abs()),
    };
    LinkAngles {
        theta: abs.h.atan2(horizontal_distance).to_degrees(),
        phi: across.atan2(along).to_degrees(),
        horizontal_distance,
    }
}
