//! Empirical distribution functions and two-sample comparisons.

use std::cmp::Ordering;

/// Empirical CDF over a pool of finite samples.
///
/// An empty pool is a legitimate state (for example, no outage runs at a
/// high EIRP); query methods return `None` for it instead of panicking.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    /// Builds the ECDF, dropping non-finite samples.
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.retain(|x| x.is_finite());
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        Self { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// `F(x) = #{samples <= x} / n`.
    pub fn eval(&self, x: f64) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        let count = self.sorted.partition_point(|&v| v <= x);
        Some(count as f64 / self.len() as f64)
    }

    /// Linearly interpolated quantile (the common "type 7" definition).
    pub fn quantile(&self, p: f64) -> Option<f64> {
        if self.is_empty() || !(0.0..=1.0).contains(&p) {
            return None;
        }
        let pos = p * (self.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        Some(self.sorted[lo] + frac * (self.sorted[hi] - self.sorted[lo]))
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.is_empty()).then(|| self.sorted.iter().sum::<f64>() / self.len() as f64)
    }

    /// Distinct step locations with the CDF value reached at each.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (k, &x) in self.sorted.iter().enumerate() {
            let y = (k + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = y,
                _ => out.push((x, y)),
            }
        }
        out
    }

    /// At most `max_points` `(x, F(x))` pairs suitable for plotting. Pools
    /// with few distinct values are emitted exactly; larger pools are
    /// reduced to quantiles at evenly spaced probability levels.
    pub fn plot_points(&self, max_points: usize) -> Vec<(f64, f64)> {
        let steps = self.steps();
        if steps.len() <= max_points || max_points < 2 {
            return steps;
        }
        let n = self.len();
        (1..=max_points)
            .map(|k| {
                let p = k as f64 / max_points as f64;
                let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
                let x = self.sorted[rank - 1];
                (x, self.eval(x).unwrap_or(p))
            })
            .collect()
    }
}

/// Two-sample Kolmogorov-Smirnov distance `sup |F_a - F_b|`.
pub fn ks_distance(a: &Ecdf, b: &Ecdf) -> Option<f64> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let (xa, xb) = (a.samples(), b.samples());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Some(d)
}

/// Asymptotic critical value of the two-sample KS distance at level
/// `alpha`: `c(alpha) sqrt((n + m) / (n m))`.
pub fn ks_critical_value(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

/// Normalized autocorrelation of `values` at lags `0..=max_lag`.
pub fn autocorrelation(values: &[f64], max_lag: usize) -> Vec<f64> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let var = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|lag| {
            let cov = centered[..n - lag]
                .iter()
                .zip(&centered[lag..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / (n - lag) as f64;
            cov / var
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_jumps_to_one() {
        let e = Ecdf::new(vec![7.0]);
        assert_eq!(e.eval(6.999), Some(0.0));
        assert_eq!(e.eval(7.0), Some(1.0));
    }

    #[test]
    fn two_samples_half_steps() {
        let e = Ecdf::new(vec![15.0, 5.0]);
        assert_eq!(e.eval(5.0), Some(0.5));
        assert_eq!(e.eval(14.9), Some(0.5));
        assert_eq!(e.eval(15.0), Some(1.0));
        assert_eq!(e.steps(), vec![(5.0, 0.5), (15.0, 1.0)]);
    }

    #[test]
    fn empty_pool_is_flagged() {
        let e = Ecdf::new(vec![]);
        assert!(e.is_empty());
        assert_eq!(e.eval(1.0), None);
        assert_eq!(e.quantile(0.5), None);
        assert_eq!(ks_distance(&e, &Ecdf::new(vec![1.0])), None);
    }

    #[test]
    fn quantiles_interpolate() {
        let e = Ecdf::new((1..=5).map(f64::from).collect());
        assert_eq!(e.quantile(0.0), Some(1.0));
        assert_eq!(e.quantile(0.5), Some(3.0));
        assert_eq!(e.quantile(0.625), Some(3.5));
        assert_eq!(e.quantile(1.0), Some(5.0));
    }

    #[test]
    fn ks_distance_matches_hand_computation() {
        let a = Ecdf::new(vec![1.0, 2.0, 3.0, 4.0]);
        let b = Ecdf::new(vec![3.0, 4.0, 5.0, 6.0]);
        assert_eq!(ks_distance(&a, &b), Some(0.5));
        assert_eq!(ks_distance(&a, &a), Some(0.0));
        let far = Ecdf::new(vec![10.0, 11.0]);
        assert_eq!(ks_distance(&a, &far), Some(1.0));
    }

    #[test]
    fn plot_points_end_at_one() {
        let e = Ecdf::new((0..10_000).map(|k| (k % 977) as f64).collect());
        let pts = e.plot_points(100);
        assert_eq!(pts.len(), 100);
        assert_eq!(pts.last().unwrap().1, 1.0);
        assert!(pts.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
    }

    #[test]
    fn critical_value_at_one_percent() {
        // c(0.01) = 1.6276
        let c = ks_critical_value(100, 100, 0.01);
        assert!((c - 1.6276 * (0.02f64).sqrt()).abs() < 1e-3);
    }
}
