//! Geometry-based LOS ground truth on explicit layouts.
//!
//! Buildings are closed boxes `footprint x [0, height]`. A link is blocked
//! when the straight segment from the user (at ground level) to the ABS
//! passes through the interior of a box; tangent contacts count as LOS.
//!
//! Candidate buildings are found by walking the grid columns crossed by the
//! ground projection of the ray, stopping where the ray climbs above the
//! tallest building of the layout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AbsPlacement, Footprint, GridLayout, Point2, UePath};
use crate::segmenter::{LinkState, LosTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LosMethod {
    /// Exact ray/box intersection.
    Full,
    /// Each crossed building is reduced to the wall the ray enters through.
    Wall,
}

/// Ray from a ground user to the ABS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray3 {
    pub origin: [f64; 3],
    pub target: [f64; 3],
}

impl Ray3 {
    pub fn new(ue: Point2, abs: &AbsPlacement) -> Self {
        Self {
            origin: [ue.x, ue.y, 0.0],
            target: [abs.x, abs.y, abs.h],
        }
    }

    fn delta(&self) -> [f64; 3] {
        [
            self.target[0] - self.origin[0],
            self.target[1] - self.origin[1],
            self.target[2] - self.origin[2],
        ]
    }

    /// Open parameter interval over which the ground projection is strictly
    /// inside the footprint.
    fn footprint_span(&self, fp: &Footprint) -> Option<(f64, f64)> {
        let d = self.delta();
        let (ax, bx) = slab(self.origin[0], d[0], fp.x_min, fp.x_max)?;
        let (ay, by) = slab(self.origin[1], d[1], fp.y_min, fp.y_max)?;
        let (enter, exit) = (ax.max(ay), bx.min(by));
        (enter < exit).then_some((enter, exit))
    }

    /// Exact slab test against `footprint x [0, height]`.
    pub fn hits_box(&self, fp: &Footprint, height: f64) -> bool {
        let Some((enter, exit)) = self.footprint_span(fp) else {
            return false;
        };
        let d = self.delta();
        let below_roof = if d[2] > 0.0 {
            (height - self.origin[2]) / d[2]
        } else if self.origin[2] < height {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        enter.max(0.0) < exit.min(1.0).min(below_roof)
    }

    /// Single-wall test: altitude of the ray where it enters the footprint.
    pub fn hits_entry_wall(&self, fp: &Footprint, height: f64) -> bool {
        match self.footprint_span(fp) {
            Some((enter, exit)) if enter < 1.0 && exit > 0.0 => {
                let t = enter.max(0.0);
                self.origin[2] + t * (self.target[2] - self.origin[2]) < height
            }
            _ => false,
        }
    }
}

fn slab(origin: f64, dir: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    if dir == 0.0 {
        (lo < origin && origin < hi).then_some((f64::NEG_INFINITY, f64::INFINITY))
    } else {
        let (t1, t2) = ((lo - origin) / dir, (hi - origin) / dir);
        Some((t1.min(t2), t1.max(t2)))
    }
}

/// Calls `visit(i, j)` for every grid cell the ground projection of `ray`
/// crosses while the ray is below `ceiling`. Stops early when `visit`
/// returns true and reports whether it did.
fn any_candidate(layout: &GridLayout, ray: &Ray3, ceiling: f64, mut visit: impl FnMut(usize, usize) -> bool) -> bool {
    let d = ray.delta();
    if ceiling <= ray.origin[2] {
        return false;
    }
    let t_cap = if d[2] > 0.0 {
        ((ceiling - ray.origin[2]) / d[2]).min(1.0)
    } else {
        1.0
    };
    let pitch = layout.params().block_pitch();
    let x_at = |t: f64| ray.origin[0] + t * d[0];
    let y_at = |t: f64| ray.origin[1] + t * d[1];
    let cell_range = |a: f64, b: f64, n: usize| -> Option<(usize, usize)> {
        let lo = (a.min(b) / pitch).floor() - 1.0;
        let hi = (a.max(b) / pitch).floor() + 1.0;
        if hi < 0.0 || lo >= n as f64 {
            return None;
        }
        Some((lo.max(0.0) as usize, hi.min(n as f64 - 1.0) as usize))
    };

    let Some((i_lo, i_hi)) = cell_range(x_at(0.0), x_at(t_cap), layout.rows()) else {
        return false;
    };
    for i in i_lo..=i_hi {
        let (mut t0, mut t1) = if d[0] == 0.0 {
            (0.0, t_cap)
        } else {
            let a = (i as f64 * pitch - ray.origin[0]) / d[0];
            let b = ((i + 1) as f64 * pitch - ray.origin[0]) / d[0];
            (a.min(b), a.max(b))
        };
        t0 = t0.max(0.0);
        t1 = t1.min(t_cap);
        if t0 > t1 {
            continue;
        }
        if let Some((j_lo, j_hi)) = cell_range(y_at(t0), y_at(t1), layout.cols()) {
            for j in j_lo..=j_hi {
                if visit(i, j) {
                    return true;
                }
            }
        }
    }
    false
}

fn check_position(ue: Point2, layout: &GridLayout) -> Result<()> {
    match layout.building_at(ue) {
        Some(_) => Err(Error::InvalidPosition { x: ue.x, y: ue.y }),
        None => Ok(()),
    }
}

fn los_check(ue: Point2, abs: &AbsPlacement, layout: &GridLayout, method: LosMethod) -> Result<LinkState> {
    check_position(ue, layout)?;
    let ray = Ray3::new(ue, abs);
    let blocked = any_candidate(layout, &ray, layout.max_height(), |i, j| {
        let fp = layout.footprint(i, j);
        let h = layout.height(i, j);
        match method {
            LosMethod::Full => ray.hits_box(&fp, h),
            LosMethod::Wall => ray.hits_entry_wall(&fp, h),
        }
    });
    Ok(if blocked { LinkState::Nlos } else { LinkState::Los })
}

/// Exact LOS verdict for one user position.
pub fn los_check_full(ue: Point2, abs: &AbsPlacement, layout: &GridLayout) -> Result<LinkState> {
    los_check(ue, abs, layout, LosMethod::Full)
}

/// Single-wall LOS verdict for one user position.
pub fn los_check_wall(ue: Point2, abs: &AbsPlacement, layout: &GridLayout) -> Result<LinkState> {
    los_check(ue, abs, layout, LosMethod::Wall)
}

pub fn los_state(ue: Point2, abs: &AbsPlacement, layout: &GridLayout, method: LosMethod) -> Result<LinkState> {
    los_check(ue, abs, layout, method)
}

/// Checks every path sample and run-length encodes the verdicts. Segment
/// boundaries sit halfway between adjacent samples with different states.
pub fn trace_path_los(path: &UePath, abs: &AbsPlacement, layout: &GridLayout, method: LosMethod) -> Result<LosTrace> {
    let offsets = path.offsets();
    let mut boundaries: Vec<(LinkState, f64)> = Vec::new();
    let mut prev: Option<LinkState> = None;
    for (k, p) in path.points().enumerate() {
        let state = los_check(p, abs, layout, method)?;
        if prev != Some(state) {
            let start = if k == 0 { 0.0 } else { 0.5 * (offsets[k - 1] + offsets[k]) };
            boundaries.push((state, start));
            prev = Some(state);
        }
    }
    Ok(LosTrace::from_boundaries(boundaries, path.length()))
}
