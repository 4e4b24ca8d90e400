//! Amplitude equation `u̇ + iω₀u + ∫₀ᵗ μ(t−s) u(s) ds = 0`, `u(0) = 1`.
//!
//! The equation is integrated for `x(t) = u(t) e^{iω₀t}`, which obeys
//! `ẋ = −∫₀ᵗ K(t−s) x(s) ds` with `K(τ) = μ(τ) e^{iω₀τ}`. Free rotation is
//! then exact and only the memory term is discretized: trapezoidal product
//! integration for the convolution, trapezoidal rule for the ODE, and the
//! diagonal weight treated implicitly.

use num_complex::Complex64;
use thiserror::Error;

use crate::spectral::{markovian_coefficients, Kernel, SpectralError, SpectralParams};

/// Largest admissible `|u|` before a solve is rejected.
pub const STABILITY_LIMIT: f64 = 1.0 + 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error(
        "amplitude left the unit disk at step {step} (t = {time}, |u| = {magnitude}); \
         reduce dt below {dt}"
    )]
    Unstable {
        step: usize,
        time: f64,
        magnitude: f64,
        dt: f64,
    },
    #[error("convergence study needs 2..=6 levels, got {0}")]
    Levels(usize),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Uniform grid `t_k = k·dt`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, dt: f64) -> Result<Self, SolverError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SolverError::InvalidGrid(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if !(t_max >= dt && t_max.is_finite()) {
            return Err(SolverError::InvalidGrid(format!(
                "t_max must be at least dt, got t_max = {t_max}, dt = {dt}"
            )));
        }
        let steps = (t_max / dt).round() as usize;
        Ok(Self { dt, steps })
    }

    pub fn from_steps(dt: f64, steps: usize) -> Result<Self, SolverError> {
        if steps == 0 {
            return Err(SolverError::InvalidGrid("need at least one step".into()));
        }
        Self::new(steps as f64 * dt, dt)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of grid points, `steps + 1`.
    pub fn count(&self) -> usize {
        self.steps + 1
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.steps)
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count()).map(|k| self.time(k))
    }

    /// Same horizon with `dt / factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            dt: self.dt / factor as f64,
            steps: self.steps * factor,
        }
    }

    /// Index of the last grid point with `t_k ≤ t`.
    pub fn index_at(&self, t: f64) -> usize {
        (((t / self.dt) + 1e-9).floor().max(0.0) as usize).min(self.steps)
    }
}

/// Step that resolves the kernel decay time `1/ωc` and the short-time
/// coherent scale `1/√μ(0)`.
pub fn default_dt(params: &SpectralParams) -> f64 {
    let mut dt = 1e-3f64.min(0.05 / params.omega_c());
    let mu0 = params.total_weight();
    if mu0 > 0.0 {
        dt = dt.min(0.05 / mu0.sqrt());
    }
    dt
}

/// `u(t)` and `u̇(t)` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSeries {
    pub grid: TimeGrid,
    pub u: Vec<Complex64>,
    pub u_dot: Vec<Complex64>,
}

impl AmplitudeSeries {
    pub fn max_abs(&self) -> f64 {
        self.u.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|u_a − u_b|` over the first `count` points.
    pub fn max_deviation(&self, other: &AmplitudeSeries, count: usize) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .take(count)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Solves the amplitude equation on `grid`.
pub fn solve_u(
    kernel: &Kernel,
    grid: &TimeGrid,
    omega_0: f64,
) -> Result<AmplitudeSeries, SolverError> {
    let h = grid.dt();
    let count = grid.count();
    let rotating: Vec<Complex64> = kernel
        .tabulate(h, count)
        .into_iter()
        .enumerate()
        .map(|(k, mu)| mu * Complex64::from_polar(1.0, omega_0 * grid.time(k)))
        .collect();
    let x = integrate_memory(&rotating, h);

    let mut u = Vec::with_capacity(count);
    let mut u_dot = Vec::with_capacity(count);
    u.push(Complex64::new(1.0, 0.0));
    u_dot.push(Complex64::new(0.0, -omega_0));
    for (k, &(xk, fk)) in x.iter().enumerate().skip(1) {
        let phase = Complex64::from_polar(1.0, -omega_0 * grid.time(k));
        let uk = xk * phase;
        let magnitude = uk.norm();
        if magnitude.is_nan() || magnitude > STABILITY_LIMIT {
            return Err(SolverError::Unstable {
                step: k,
                time: grid.time(k),
                magnitude,
                dt: h,
            });
        }
        u.push(uk);
        u_dot.push((fk - Complex64::i() * omega_0 * xk) * phase);
    }
    Ok(AmplitudeSeries {
        grid: *grid,
        u,
        u_dot,
    })
}

/// Trapezoidal product integration of `ẋ = −∫₀ᵗ K(t−s) x(s) ds`, `x(0) = 1`.
/// Returns `(x_k, ẋ_k)` per grid point.
fn integrate_memory(kernel: &[Complex64], h: f64) -> Vec<(Complex64, Complex64)> {
    let count = kernel.len();
    let half = 0.5 * h;
    let diag = Complex64::new(1.0, 0.0) + kernel[0] * (half * half);
    let mut x: Vec<Complex64> = Vec::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    x.push(Complex64::new(1.0, 0.0));
    out.push((x[0], Complex64::new(0.0, 0.0)));
    // reversed kernel so the history sum walks both slices forwards
    let reversed: Vec<Complex64> = kernel.iter().rev().copied().collect();
    let mut f_prev = Complex64::new(0.0, 0.0);
    for k in 1..count {
        // Σ_{j=1}^{k-1} K_{k-j} x_j
        let lo = count - k;
        let history = dot(&reversed[lo..count - 1], &x[1..k]);
        let s = (kernel[k] * x[0] * 0.5 + history) * h;
        let xk = (x[k - 1] + f_prev * half - s * half) / diag;
        let fk = -(s + kernel[0] * xk * half);
        x.push(xk);
        out.push((xk, fk));
        f_prev = fk;
    }
    out
}

/// `Σ a_i b_i` with four independent accumulators.
fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [[0.0f64; 2]; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let rem_a = chunks_a.remainder();
    let rem_b = chunks_b.remainder();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for i in 0..4 {
            acc[i][0] += ca[i].re * cb[i].re - ca[i].im * cb[i].im;
            acc[i][1] += ca[i].re * cb[i].im + ca[i].im * cb[i].re;
        }
    }
    let mut re = (acc[0][0] + acc[1][0]) + (acc[2][0] + acc[3][0]);
    let mut im = (acc[0][1] + acc[1][1]) + (acc[2][1] + acc[3][1]);
    for (p, q) in rem_a.iter().zip(rem_b) {
        re += p.re * q.re - p.im * q.im;
        im += p.re * q.im + p.im * q.re;
    }
    Complex64::new(re, im)
}

/// Markovian amplitude `u(t) = exp(−i(ω₀ − δω)t − πJ(ω₀)t)`.
pub fn markovian_u(
    params: &SpectralParams,
    grid: &TimeGrid,
) -> Result<AmplitudeSeries, SolverError> {
    let m = markovian_coefficients(params)?;
    let rate = Complex64::new(m.gamma_m, m.omega_m);
    let u: Vec<Complex64> = grid.times().map(|t| (-rate * t).exp()).collect();
    let u_dot = u.iter().map(|z| -rate * z).collect();
    Ok(AmplitudeSeries {
        grid: *grid,
        u,
        u_dot,
    })
}

/// Self-convergence of [`solve_u`] under repeated halving of `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Step size of each studied level, coarsest first.
    pub dts: Vec<f64>,
    /// `max |u_level − u_reference|` over the coarse grid points.
    pub max_errors: Vec<f64>,
    /// `log2(err_l / err_{l+1})`; `None` where both errors sit at round-off.
    pub orders: Vec<Option<f64>>,
    /// Step of the reference solution.
    pub reference_dt: f64,
}

/// Errors below this are treated as round-off when estimating orders.
pub const ROUND_OFF_FLOOR: f64 = 1e-13;

/// Solves on `levels` grids `dt, dt/2, …` and measures each against a
/// reference two halvings finer than the last level, so the reference's own
/// error stays a sixteenth of the finest studied error.
pub fn convergence_study(
    kernel: &Kernel,
    base_grid: &TimeGrid,
    levels: usize,
    omega_0: f64,
) -> Result<ConvergenceReport, SolverError> {
    if !(2..=6).contains(&levels) {
        return Err(SolverError::Levels(levels));
    }
    let reference_factor = 1usize << (levels + 1);
    let reference_grid = base_grid.refined(reference_factor);
    let reference = solve_u(kernel, &reference_grid, omega_0)?;

    let mut dts = Vec::with_capacity(levels);
    let mut max_errors = Vec::with_capacity(levels);
    for level in 0..levels {
        let factor = 1usize << level;
        let grid = base_grid.refined(factor);
        let series = solve_u(kernel, &grid, omega_0)?;
        let err = (0..base_grid.count())
            .map(|k| (series.u[k * factor] - reference.u[k * reference_factor]).norm())
            .fold(0.0, f64::max);
        dts.push(grid.dt());
        max_errors.push(err);
    }
    let orders = max_errors
        .windows(2)
        .map(|w| {
            if w[0] < ROUND_OFF_FLOOR || w[1] < ROUND_OFF_FLOOR {
                None
            } else {
                Some((w[0] / w[1]).log2())
            }
        })
        .collect();
    Ok(ConvergenceReport {
        dts,
        max_errors,
        orders,
        reference_dt: reference_grid.dt(),
    })
}
