use serde::{Deserialize, Serialize};

use super::geometry::MapGeometry;
use crate::error::{Result, SomError};

pub const DEFAULT_ALPHA0: f64 = 0.1;

/// Learning rate and radius both decay as `x0 · exp(−k·(t/T)²)`; with
/// `k = ln 100` they end at 1% of their starting values.
pub const DEFAULT_DECAY: f64 = std::f64::consts::LN_10 * 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSchedule {
    pub alpha0: f64,
    pub sigma0: f64,
    pub iterations: u64,
    pub decay: f64,
    pub seed: u64,
}

impl TrainingSchedule {
    /// Defaults for a geometry: α₀ = 0.1, σ₀ = max(nrows, ncols)/2 (at least 1),
    /// `T` = the geometry's iteration count.
    pub fn for_geometry(g: &MapGeometry, seed: u64) -> Self {
        Self {
            alpha0: DEFAULT_ALPHA0,
            sigma0: (g.nrows.max(g.ncols) as f64 / 2.0).max(1.0),
            iterations: g.num_iterations,
            decay: DEFAULT_DECAY,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 > 0.0 && self.alpha0 <= 1.0) {
            return Err(SomError::InvalidSchedule(format!(
                "alpha0 must lie in (0, 1], got {}",
                self.alpha0
            )));
        }
        if !(self.sigma0 >= 1.0 && self.sigma0.is_finite()) {
            return Err(SomError::InvalidSchedule(format!(
                "sigma0 must be at least 1, got {}",
                self.sigma0
            )));
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return Err(SomError::InvalidSchedule(format!("bad decay constant {}", self.decay)));
        }
        Ok(())
    }

    fn progress_factor(&self, t: u64) -> f64 {
        let frac = t as f64 / self.iterations as f64;
        (-self.decay * frac * frac).exp()
    }

    pub fn alpha(&self, t: u64) -> f64 {
        self.alpha0 * self.progress_factor(t)
    }

    pub fn sigma(&self, t: u64) -> f64 {
        (self.sigma0 * self.progress_factor(t)).max(1.0)
    }

    /// Learning rate and radius at iteration `t`.
    pub fn at(&self, t: u64) -> Decayed {
        Decayed {
            alpha: self.alpha(t),
            sigma: self.sigma(t),
        }
    }
}

/// Schedule values frozen for one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decayed {
    pub alpha: f64,
    pub sigma: f64,
}

impl Decayed {
    /// Gaussian activation of a unit at lattice distance `grid_dist` from the winner.
    #[inline]
    pub fn kernel(&self, grid_dist: f64) -> f64 {
        self.alpha * (-(grid_dist * grid_dist) / (2.0 * self.sigma * self.sigma)).exp()
    }
}

/// Activation `h` of a unit at `grid_dist` from the winner at iteration `t`.
pub fn neighborhood(grid_dist: f64, t: u64, s: &TrainingSchedule) -> f64 {
    s.at(t).kernel(grid_dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sched(t: u64) -> TrainingSchedule {
        TrainingSchedule {
            alpha0: 0.1,
            sigma0: 5.0,
            iterations: t,
            decay: DEFAULT_DECAY,
            seed: 0,
        }
    }

    #[test]
    fn decay_constant_is_ln_100() {
        assert!((DEFAULT_DECAY - 100f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn winner_gets_alpha0_at_start() {
        assert_eq!(neighborhood(0.0, 0, &sched(1000)), 0.1);
    }

    #[test]
    fn tails_vanish() {
        let s = sched(1000);
        assert!(neighborhood(50.0, 0, &s) < 1e-20);
        assert_eq!(neighborhood(1e6, 0, &s), 0.0);
        assert!(neighborhood(1.0, 0, &s) > neighborhood(2.0, 0, &s));
    }

    #[test]
    fn final_rate_near_one_percent() {
        let s = sched(1000);
        let h = neighborhood(0.0, 999, &s);
        assert!((h / 0.001 - 1.0).abs() < 0.03, "{h}");
    }

    #[test]
    fn radius_floor() {
        let s = sched(100);
        assert_eq!(s.sigma(99), 1.0);
        assert_eq!(s.sigma(0), 5.0);
    }

    #[test]
    fn validation() {
        assert!(sched(10).validate().is_ok());
        let mut s = sched(10);
        s.alpha0 = 0.0;
        assert!(s.validate().is_err());
        s.alpha0 = 1.5;
        assert!(s.validate().is_err());
        let mut s = sched(10);
        s.sigma0 = 0.5;
        assert!(s.validate().is_err());
    }

    #[test]
    fn defaults_from_geometry() {
        let g = MapGeometry::from_eigenvalues(400, 1.0, 1.0).unwrap();
        let s = TrainingSchedule::for_geometry(&g, 9);
        assert_eq!(s.alpha0, 0.1);
        assert_eq!(s.sigma0, 5.5);
        assert_eq!(s.iterations, 20800);
        let tiny = MapGeometry::from_eigenvalues(400, 1.0, 1.0).unwrap().with_override(1, 1, 5).unwrap();
        assert_eq!(TrainingSchedule::for_geometry(&tiny, 0).sigma0, 1.0);
    }
}
