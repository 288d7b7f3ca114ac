//! Probabilistic LOS/NLOS segmentation of a user path.
//!
//! The path is walked block by block (one block = one building plus one
//! street, length `S + W`). At each block start the first neighbor decides
//! whether the user begins in a building shadow of length `W`; the rest of
//! the block is filled with segments whose state comes from the second
//! neighbor's NLOS probability and whose lengths are uniform on `(0, S]`
//! for LOS and `(0, W]` for NLOS. Angles are refreshed at every segment
//! boundary.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Result};
use crate::geometry::{link_angles, AbsPlacement, EnvironmentParams, UePath};
use crate::los_model::{p_nlos_link, Neighbor};
use crate::stats::Ecdf;

/// Boundary tolerance when mapping path samples onto segments (m).
const BOUNDARY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkState {
    Los,
    Nlos,
}

impl LinkState {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkState::Los => "LOS",
            LinkState::Nlos => "NLOS",
        }
    }
}

impl fmt::Display for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosSegment {
    pub state: LinkState,
    /// Distance of the segment start from the path start (m).
    pub start: f64,
    pub length: f64,
}

impl LosSegment {
    pub fn end(&self) -> f64 {
        self.start + self.length
    }
}

/// Ordered segments tiling a path of length `path_length`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosTrace {
    segments: Vec<LosSegment>,
    path_length: f64,
}

impl LosTrace {
    /// Builds a trace from `(state, start)` boundaries; each segment runs to
    /// the next start, the last one to `path_length`.
    pub fn from_boundaries(boundaries: Vec<(LinkState, f64)>, path_length: f64) -> Self {
        let mut segments = Vec::with_capacity(boundaries.len());
        for (k, &(state, start)) in boundaries.iter().enumerate() {
            let end = boundaries.get(k + 1).map_or(path_length, |b| b.1);
            if end > start {
                segments.push(LosSegment {
                    state,
                    start,
                    length: end - start,
                });
            }
        }
        Self {
            segments,
            path_length,
        }
    }

    /// Single-state trace covering the whole path.
    pub fn uniform(state: LinkState, path_length: f64) -> Self {
        Self::from_boundaries(vec![(state, 0.0)], path_length)
    }

    pub fn segments(&self) -> &[LosSegment] {
        &self.segments
    }

    pub fn path_length(&self) -> f64 {
        self.path_length
    }

    /// Joins adjacent segments that share a state.
    pub fn merged(&self) -> LosTrace {
        let mut boundaries: Vec<(LinkState, f64)> = Vec::new();
        for seg in &self.segments {
            if boundaries.last().map(|b| b.0) != Some(seg.state) {
                boundaries.push((seg.state, seg.start));
            }
        }
        Self::from_boundaries(boundaries, self.path_length)
    }

    pub fn lengths_of(&self, state: LinkState) -> impl Iterator<Item = f64> + '_ {
        self.segments
            .iter()
            .filter(move |s| s.state == state)
            .map(|s| s.length)
    }

    /// Fraction of the path length in NLOS.
    pub fn nlos_fraction(&self) -> f64 {
        self.lengths_of(LinkState::Nlos).sum::<f64>() / self.path_length
    }

    /// State at distance `s` along the path; boundaries belong to the later
    /// segment.
    pub fn state_at(&self, s: f64) -> LinkState {
        let idx = self
            .segments
            .partition_point(|seg| seg.start <= s + BOUNDARY_EPS)
            .max(1);
        self.segments[idx - 1].state
    }
}

/// Runs the block-wise segmentation for one ABS placement. The returned
/// trace holds the raw (unmerged) segments; call [`LosTrace::merged`] for
/// contiguous LOS/NLOS runs.
pub fn generate_segments<R: Rng + ?Sized>(
    params: &EnvironmentParams,
    abs: &AbsPlacement,
    path: &UePath,
    rng: &mut R,
) -> Result<LosTrace> {
    let length = path.length();
    check_domain("path length", length, length > 0.0, "d_p > 0")?;
    let axis = path.street_axis();
    let pitch = params.block_pitch();
    let (street, building) = (params.street_width, params.building_width);

    let p_nlos = |s: f64, neighbor: Neighbor| -> Result<f64> {
        let angles = link_angles(path.point_at(s), abs, axis);
        p_nlos_link(&angles, params, neighbor)
    };

    let mut boundaries: Vec<(LinkState, f64)> = Vec::new();
    let blocks = (length / pitch - 1e-12).ceil().max(1.0) as usize;
    for k in 0..blocks {
        let block_start = k as f64 * pitch;
        let block_end = ((k + 1) as f64 * pitch).min(length);
        let mut pos = block_start;

        if rng.random::<f64>() < p_nlos(pos, Neighbor::First)? {
            boundaries.push((LinkState::Nlos, pos));
            pos += building;
        }
        while pos < block_end {
            let (state, max_len) = if rng.random::<f64>() < p_nlos(pos, Neighbor::Second)? {
                (LinkState::Nlos, building)
            } else {
                (LinkState::Los, street)
            };
            boundaries.push((state, pos));
            // (0, max_len]: never a zero-length step
            pos += max_len * (1.0 - rng.random::<f64>());
        }
        // Overshoot past block_end is clipped by the next block's first
        // boundary, which always sits at the next block origin.
    }
    Ok(LosTrace::from_boundaries(boundaries, length))
}

/// Labels each path sample with the state of its containing segment.
pub fn pointwise_states(trace: &LosTrace, path: &UePath) -> Vec<LinkState> {
    path.offsets().iter().map(|&s| trace.state_at(s)).collect()
}

/// Pooled merged-NLOS run lengths of `traces` as an empirical CDF.
pub fn nlos_length_cdf(traces: &[LosTrace]) -> Ecdf {
    Ecdf::new(
        traces
            .iter()
            .flat_map(|t| t.merged().lengths_of(LinkState::Nlos).collect::<Vec<_>>())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_path;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn urban() -> EnvironmentParams {
        EnvironmentParams::new(0.3, 500.0, 15.0).unwrap()
    }

    fn path_for(p: &EnvironmentParams, length: f64, resolution: f64) -> UePath {
        build_path(length, resolution, p.street_width, p.building_width).unwrap()
    }

    #[test]
    fn flat_city_is_all_los() {
        let params = EnvironmentParams::new(0.3, 500.0, 1e-9).unwrap();
        let path = path_for(&params, 1000.0, 0.3);
        let abs = AbsPlacement::new(600.0, 300.0, 40.0).unwrap();
        let trace = generate_segments(&params, &abs, &path, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let merged = trace.merged();
        assert_eq!(merged.segments().len(), 1);
        assert_eq!(merged.segments()[0].state, LinkState::Los);
        assert!((merged.segments()[0].length - 1000.0).abs() < 1e-6);
    }

    #[test]
    fn overhead_limit_is_all_los() {
        let params = urban();
        let path = path_for(&params, 1000.0, 0.3);
        let abs = AbsPlacement::new(500.0, 500.0, 1e12).unwrap();
        let trace = generate_segments(&params, &abs, &path, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(trace.merged().segments().len(), 1);
        assert_eq!(trace.nlos_fraction(), 0.0);
    }

    #[test]
    fn boundary_points_belong_to_later_segment() {
        let trace = LosTrace::from_boundaries(vec![(LinkState::Nlos, 0.0), (LinkState::Los, 10.0)], 20.0);
        let path = UePath::new(crate::Point2::new(0.0, 0.0), crate::Point2::new(0.0, 20.0), 5.0).unwrap();
        use LinkState::*;
        assert_eq!(pointwise_states(&trace, &path), vec![Nlos, Nlos, Los, Los, Los]);

        let all = LosTrace::uniform(Los, 20.0);
        assert!(pointwise_states(&all, &path).iter().all(|s| *s == Los));
    }

    #[test]
    fn pointwise_fraction_tracks_segment_fraction() {
        let params = urban();
        let path = path_for(&params, 1000.0, 0.3);
        let abs = AbsPlacement::new(400.0, 800.0, 60.0).unwrap();
        for seed in 0..20 {
            let trace = generate_segments(&params, &abs, &path, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let states = pointwise_states(&trace, &path);
            let nlos = states.iter().filter(|s| **s == LinkState::Nlos).count() as f64;
            let by_points = nlos / states.len() as f64;
            let runs = trace.merged().segments().len() as f64;
            // each run boundary can shift the count by one sample
            let tol = (runs + 1.0) * path.resolution() / path.length();
            assert!((by_points - trace.nlos_fraction()).abs() <= tol);
        }
    }

    #[test]
    fn merging_joins_equal_neighbors() {
        use LinkState::*;
        let raw = LosTrace::from_boundaries(
            vec![(Nlos, 0.0), (Nlos, 3.0), (Los, 5.0), (Los, 6.0), (Nlos, 9.0)],
            12.0,
        );
        let merged = raw.merged();
        let got: Vec<_> = merged.segments().iter().map(|s| (s.state, s.start, s.length)).collect();
        assert_eq!(got, vec![(Nlos, 0.0, 5.0), (Los, 5.0, 4.0), (Nlos, 9.0, 3.0)]);
    }

    #[test]
    fn nlos_cdf_pools_merged_runs() {
        use LinkState::*;
        let a = LosTrace::from_boundaries(vec![(Los, 0.0), (Nlos, 2.0), (Nlos, 4.0), (Los, 9.0)], 20.0);
        let b = LosTrace::from_boundaries(vec![(Nlos, 0.0), (Los, 15.0)], 20.0);
        let cdf = nlos_length_cdf(&[a, b]);
        assert_eq!(cdf.samples(), &[7.0, 15.0]);
        assert_eq!(cdf.eval(10.0), Some(0.5));
        assert!(nlos_length_cdf(&[LosTrace::uniform(Los, 5.0)]).is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn traces_tile_and_respect_raw_bounds(
            seed in any::<u64>(),
            preset in 0usize..4,
            x in 0.0f64..1000.0, y in 0.0f64..1000.0, h in 30.0f64..300.0,
            length in 1.0f64..1500.0,
        ) {
            let (alpha, beta, gamma) = [(0.1, 750.0, 8.0), (0.3, 500.0, 15.0), (0.5, 300.0, 20.0), (0.5, 300.0, 50.0)][preset];
            let params = EnvironmentParams::new(alpha, beta, gamma).unwrap();
            let path = path_for(&params, length, 0.3);
            let abs = AbsPlacement::new(x, y, h).unwrap();
            let trace = generate_segments(&params, &abs, &path, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();

            let total: f64 = trace.segments().iter().map(|s| s.length).sum();
            prop_assert!((total - length).abs() < 1e-6);
            prop_assert!(trace.segments()[0].start == 0.0);
            for w in trace.segments().windows(2) {
                prop_assert!((w[0].end() - w[1].start).abs() < 1e-9);
            }
            for s in trace.segments() {
                prop_assert!(s.length > 0.0);
                let bound = match s.state {
                    LinkState::Los => params.street_width,
                    LinkState::Nlos => params.building_width,
                };
                prop_assert!(s.length <= bound + 1e-9);
            }
            let merged = trace.merged();
            let merged_total: f64 = merged.segments().iter().map(|s| s.length).sum();
            prop_assert!((merged_total - length).abs() < 1e-6);
            for w in merged.segments().windows(2) {
                prop_assert!(w[0].state != w[1].state);
            }
        }

        #[test]
        fn same_seed_same_trace(seed in any::<u64>()) {
            let params = urban();
            let path = path_for(&params, 300.0, 0.3);
            let abs = AbsPlacement::new(100.0, 100.0, 50.0).unwrap();
            let a = generate_segments(&params, &abs, &path, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = generate_segments(&params, &abs, &path, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
