use crate::error::{Error, Result};

/// Time grid `0 = t_0 < ... < t_N = T` carrying the weights of the measure
/// "Lebesgue on `[0, T]` plus a unit atom at `T`".
///
/// For a right-continuous step function `x` that is constant on each
/// `[t_k, t_{k+1})`, `∫ x dκ = Σ_k w_k x(t_k)` holds exactly with
/// `w_k = t_{k+1} - t_k` for `k < N` and `w_N = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    weights: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidGrid("grid has no times".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidGrid(format!(
                "grid must start at 0, starts at {}",
                times[0]
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("grid times must be finite".into()));
        }
        if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "grid not strictly increasing at index {}",
                k + 1
            )));
        }
        let n = times.len();
        let mut weights: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        weights.push(1.0);
        debug_assert_eq!(weights.len(), n);
        Ok(Self { times, weights })
    }

    /// `steps + 1` equally spaced times on `[0, horizon]`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidGrid(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            // a single time point: the grid {0}, horizon collapses to 0
            return Self::new(vec![0.0]);
        }
        let h = horizon / steps as f64;
        let mut times: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();
        times[steps] = horizon;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, k: usize) -> f64 {
        self.times[k]
    }

    /// κ-weights, one per time index.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    /// Number of time points (`N + 1`).
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the last time point.
    pub fn last_index(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Total κ-mass, `T + 1`.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Whether every time of `self` is also a time of `finer` and both share a horizon.
    pub fn is_nested_in(&self, finer: &TimeGrid) -> bool {
        let tol = 1e-12 * (1.0 + self.horizon().abs());
        if (self.horizon() - finer.horizon()).abs() > tol {
            return false;
        }
        let mut j = 0;
        for &t in &self.times {
            while j < finer.times.len() && finer.times[j] < t - tol {
                j += 1;
            }
            if j == finer.times.len() || (finer.times[j] - t).abs() > tol {
                return false;
            }
        }
        true
    }
}
