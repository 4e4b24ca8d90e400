//! Time-dependent master-equation coefficients from `u̇/u = −Γ(t) − iΩ(t)`.

use crate::solver::{AmplitudeSeries, TimeGrid};

/// Default `|u|` below which Γ and Ω are flagged invalid.
pub const DEFAULT_EPSILON_U: f64 = 1e-6;

/// Decay rate, shifted frequency and frequency shift per grid point.
///
/// Entries where `valid[k]` is false sit at near-zeros of `u`; their
/// numeric values carry no meaning.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSeries {
    pub grid: TimeGrid,
    pub omega_0: f64,
    pub gamma: Vec<f64>,
    pub omega: Vec<f64>,
    pub delta_omega: Vec<f64>,
    pub valid: Vec<bool>,
}

impl CoefficientSeries {
    /// Indices of valid points with `t_a ≤ t ≤ t_b`.
    pub fn valid_in(&self, t_a: f64, t_b: f64) -> impl Iterator<Item = usize> + '_ {
        let lo = self.grid.index_at(t_a);
        let lo = if self.grid.time(lo) < t_a - 1e-12 {
            lo + 1
        } else {
            lo
        };
        let hi = self.grid.index_at(t_b);
        (lo..=hi).filter(move |&k| self.valid[k])
    }

    /// Mean of `Γ` over valid points of `[t_a, t_b]`, `None` if there are none.
    pub fn mean_gamma(&self, t_a: f64, t_b: f64) -> Option<f64> {
        mean(self.valid_in(t_a, t_b).map(|k| self.gamma[k]))
    }

    pub fn mean_delta_omega(&self, t_a: f64, t_b: f64) -> Option<f64> {
        mean(self.valid_in(t_a, t_b).map(|k| self.delta_omega[k]))
    }

    /// Number of sign changes of `Γ` across consecutive valid points.
    pub fn gamma_sign_changes(&self, t_a: f64, t_b: f64) -> usize {
        let mut last: Option<bool> = None;
        let mut changes = 0;
        for k in self.valid_in(t_a, t_b) {
            let g = self.gamma[k];
            if g == 0.0 {
                continue;
            }
            let positive = g > 0.0;
            if let Some(prev) = last {
                if prev != positive {
                    changes += 1;
                }
            }
            last = Some(positive);
        }
        changes
    }

    /// True when every point in `[0, t]` is valid.
    pub fn valid_through(&self, t: f64) -> bool {
        self.valid[..=self.grid.index_at(t)].iter().all(|&v| v)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// `Γ = −Re(u̇/u)`, `Ω = −Im(u̇/u)`, `δω = ω₀ − Ω` wherever `|u| ≥ epsilon_u`.
pub fn extract_rates(series: &AmplitudeSeries, epsilon_u: f64, omega_0: f64) -> CoefficientSeries {
    let count = series.u.len();
    let mut gamma = Vec::with_capacity(count);
    let mut omega = Vec::with_capacity(count);
    let mut delta_omega = Vec::with_capacity(count);
    let mut valid = Vec::with_capacity(count);
    for (u, du) in series.u.iter().zip(&series.u_dot) {
        if u.norm() >= epsilon_u {
            let log_derivative = du / u;
            // 0.0 − x keeps zeros unsigned
            let w = 0.0 - log_derivative.im;
            gamma.push(0.0 - log_derivative.re);
            omega.push(w);
            delta_omega.push(omega_0 - w);
            valid.push(true);
        } else {
            gamma.push(f64::NAN);
            omega.push(f64::NAN);
            delta_omega.push(f64::NAN);
            valid.push(false);
        }
    }
    CoefficientSeries {
        grid: series.grid,
        omega_0,
        gamma,
        omega,
        delta_omega,
        valid,
    }
}
