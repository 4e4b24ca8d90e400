//! Brute-force validators.
//!
//! * A finite bath evolved exactly in the single-excitation sector, where
//!   the system amplitude is `u(t)` itself.
//! * A truncated number-basis density matrix, both for reconstructing the
//!   evolved cat and for propagating the time-dependent master equation.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::cat::{CatState, EvolvedCat};
use crate::quadrature::{self, GaussLegendre};
use crate::rates::CoefficientSeries;
use crate::solver::{AmplitudeSeries, TimeGrid};
use crate::spectral::{BathMode, Kernel, SpectralParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("bath needs at least 2 modes, got {0}")]
    TooFewModes(usize),
    #[error("omega_max must exceed zero, got {0}")]
    BadCutoff(f64),
    #[error(
        "bath recurrence time {recurrence:.3} does not exceed horizon {horizon}; \
         use at least {required_count} modes"
    )]
    Recurrence {
        recurrence: f64,
        horizon: f64,
        required_count: usize,
    },
    #[error("excitation norm drifted by {drift:e} at t = {time}; step too large")]
    NormDrift { drift: f64, time: f64 },
    #[error("Fock truncation at n_max = {n_max} drops weight {tail:e} for |beta| = {beta_abs}")]
    Truncation {
        n_max: usize,
        tail: f64,
        beta_abs: f64,
    },
    #[error("coefficients invalid at t = {0} inside the requested window")]
    InvalidCoefficients(f64),
    #[error("density-matrix trace drifted to {trace} at t = {time}")]
    TraceDrift { trace: f64, time: f64 },
}

/// How continuum frequencies are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingScheme {
    /// Uniform bins with the mode at each bin centre.
    MidpointUniform,
    /// Gauss–Legendre nodes on `[0, ω_max]`.
    GaussLegendre,
}

/// A finite set of bath oscillators.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBath {
    pub modes: Vec<BathMode>,
    pub omega_max: f64,
    pub scheme: SamplingScheme,
}

impl DiscreteBath {
    /// One mode with the given frequency and weight `|g|²`.
    pub fn single_mode(omega: f64, weight: f64) -> Self {
        Self {
            modes: vec![BathMode { omega, weight }],
            omega_max: omega,
            scheme: SamplingScheme::MidpointUniform,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.modes.iter().map(|m| m.weight).sum()
    }

    /// Widest gap between neighbouring modes.
    pub fn max_spacing(&self) -> f64 {
        let mut omegas: Vec<f64> = self.modes.iter().map(|m| m.omega).collect();
        omegas.sort_by(f64::total_cmp);
        let mut gap = omegas.first().copied().unwrap_or(0.0);
        for w in omegas.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        gap
    }

    /// `2π / Δω` for the widest gap; infinite for a single mode.
    pub fn recurrence_time(&self) -> f64 {
        if self.modes.len() < 2 {
            f64::INFINITY
        } else {
            2.0 * PI / self.max_spacing()
        }
    }

    pub fn kernel(&self) -> Kernel {
        Kernel::DiscreteSum(self.modes.clone())
    }
}

/// Samples `J` on `count` modes in `(0, omega_max]`.
///
/// Midpoint modes carry the exact bin integral `∫_bin J dω` as their
/// weight, so the total weight matches `∫₀^{ω_max} J dω` to quadrature
/// precision.
pub fn discretize_bath(
    params: &SpectralParams,
    count: usize,
    omega_max: f64,
    horizon: f64,
    scheme: SamplingScheme,
) -> Result<DiscreteBath, OracleError> {
    if count < 2 {
        return Err(OracleError::TooFewModes(count));
    }
    if omega_max.is_nan() || omega_max <= 0.0 {
        return Err(OracleError::BadCutoff(omega_max));
    }
    let rule = GaussLegendre::standard();
    let modes: Vec<BathMode> = match scheme {
        SamplingScheme::MidpointUniform => {
            let width = omega_max / count as f64;
            (0..count)
                .map(|k| {
                    let lo = k as f64 * width;
                    let hi = lo + width;
                    let weight = if k == 0 {
                        quadrature::graded_panel(rule, hi, |w| params.density(w))
                    } else {
                        rule.integrate(lo, hi, |w| params.density(w))
                    };
                    BathMode {
                        omega: lo + 0.5 * width,
                        weight,
                    }
                })
                .collect()
        }
        SamplingScheme::GaussLegendre => GaussLegendre::new(count)
            .mapped(0.0, omega_max)
            .map(|(w, q)| BathMode {
                omega: w,
                weight: params.density(w) * q,
            })
            .collect(),
    };
    let bath = DiscreteBath {
        modes,
        omega_max,
        scheme,
    };
    let recurrence = bath.recurrence_time();
    if recurrence <= horizon {
        let per_mode = match scheme {
            SamplingScheme::MidpointUniform => 1.0,
            // widest Gauss–Legendre gap is about π/2 times the mean gap
            SamplingScheme::GaussLegendre => PI / 2.0,
        };
        let required_count = (horizon * omega_max * per_mode / (2.0 * PI)).floor() as usize + 1;
        return Err(OracleError::Recurrence {
            recurrence,
            horizon,
            required_count,
        });
    }
    Ok(bath)
}

/// Target for the per-step RK4 phase increment `h·ρ`, where `ρ` bounds the
/// spectral radius of the single-excitation Hamiltonian.
const RK4_PHASE_PER_STEP: f64 = 0.005;
const NORM_DRIFT_LIMIT: f64 = 1e-8;

/// Evolves one excitation shared between the system mode and the bath,
/// starting in the system mode, with classical RK4. Returns the system
/// amplitude as `u(t)` and its exact right-hand side as `u̇(t)`.
pub fn oracle_amplitude(
    bath: &DiscreteBath,
    omega_0: f64,
    grid: &TimeGrid,
) -> Result<AmplitudeSeries, OracleError> {
    if bath.recurrence_time() <= grid.t_max() {
        let omega_max = bath.omega_max;
        return Err(OracleError::Recurrence {
            recurrence: bath.recurrence_time(),
            horizon: grid.t_max(),
            required_count: (grid.t_max() * omega_max / (2.0 * PI)).floor() as usize + 1,
        });
    }
    let omegas: Vec<f64> = bath.modes.iter().map(|m| m.omega).collect();
    let couplings: Vec<f64> = bath.modes.iter().map(|m| m.weight.sqrt()).collect();
    let radius =
        omegas.iter().fold(omega_0.abs(), |acc, w| acc.max(w.abs())) + bath.total_weight().sqrt();
    let substeps = ((grid.dt() * radius / RK4_PHASE_PER_STEP).ceil() as usize).max(1);
    let h = grid.dt() / substeps as f64;

    let mut system = Complex64::new(1.0, 0.0);
    let mut modes = vec![Complex64::new(0.0, 0.0); omegas.len()];
    let mut u = Vec::with_capacity(grid.count());
    let mut u_dot = Vec::with_capacity(grid.count());
    let rhs_system = |c0: Complex64, cs: &[Complex64]| -> Complex64 {
        let coupled: Complex64 = couplings.iter().zip(cs).map(|(g, c)| c * *g).sum();
        -Complex64::i() * (c0 * omega_0 + coupled)
    };
    u.push(system);
    u_dot.push(rhs_system(system, &modes));

    let dim = modes.len();
    let mut k_sys = [Complex64::new(0.0, 0.0); 4];
    let mut k_modes = vec![vec![Complex64::new(0.0, 0.0); dim]; 4];
    let mut stage = vec![Complex64::new(0.0, 0.0); dim];
    let minus_i = -Complex64::i();
    for step in 1..grid.count() {
        for _ in 0..substeps {
            for s in 0..4 {
                let factor = match s {
                    0 => 0.0,
                    1 | 2 => 0.5 * h,
                    _ => h,
                };
                let c0 = if s == 0 {
                    system
                } else {
                    system + k_sys[s - 1] * factor
                };
                if s == 0 {
                    stage.copy_from_slice(&modes);
                } else {
                    let prev = &k_modes[s - 1];
                    for ((st, m), k) in stage.iter_mut().zip(&modes).zip(prev) {
                        *st = m + k * factor;
                    }
                }
                k_sys[s] = rhs_system(c0, &stage);
                for (((out, st), w), g) in k_modes[s]
                    .iter_mut()
                    .zip(&stage)
                    .zip(&omegas)
                    .zip(&couplings)
                {
                    *out = minus_i * (st * *w + c0 * *g);
                }
            }
            system += (k_sys[0] + k_sys[1] * 2.0 + k_sys[2] * 2.0 + k_sys[3]) * (h / 6.0);
            for (i, m) in modes.iter_mut().enumerate() {
                *m += (k_modes[0][i] + k_modes[1][i] * 2.0 + k_modes[2][i] * 2.0 + k_modes[3][i])
                    * (h / 6.0);
            }
        }
        let norm = system.norm_sqr() + modes.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let drift = (norm - 1.0).abs();
        if drift > NORM_DRIFT_LIMIT {
            return Err(OracleError::NormDrift {
                drift,
                time: grid.time(step),
            });
        }
        u.push(system);
        u_dot.push(rhs_system(system, &modes));
    }
    Ok(AmplitudeSeries {
        grid: *grid,
        u,
        u_dot,
    })
}

/// Density matrix in the number basis `|0⟩ … |n_max⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    pub matrix: Array2<Complex64>,
}

/// Allowed weight outside the truncated basis for each coherent label.
pub const FOCK_TAIL_LIMIT: f64 = 1e-12;

/// `Σ_{n > n_max} e^{−|β|²} |β|^{2n} / n!`, summed directly.
pub fn coherent_tail(beta_abs: f64, n_max: usize) -> f64 {
    let x = beta_abs * beta_abs;
    if x == 0.0 {
        return 0.0;
    }
    // log of the first dropped Poisson term
    let mut log_term =
        -x + (n_max + 1) as f64 * x.ln() - (1..=n_max + 1).map(|k| (k as f64).ln()).sum::<f64>();
    let mut tail = 0.0;
    for n in n_max + 1.. {
        let term = log_term.exp();
        tail += term;
        if term < 1e-18 * tail.max(1e-300) && (n as f64) > x {
            break;
        }
        log_term += x.ln() - ((n + 1) as f64).ln();
    }
    tail
}

/// Normalized coherent-state amplitudes `⟨n|β⟩`, `n = 0..=n_max`.
fn coherent_amplitudes(beta: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut amp = Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    out.push(amp);
    for n in 1..=n_max {
        amp = amp * beta / (n as f64).sqrt();
        out.push(amp);
    }
    out
}

impl FockDensity {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `Σ_i w_i |β_i⟩⟨γ_i|` with normalized kets, after checking that every
    /// label fits in the truncated basis.
    pub fn from_dyads(
        dyads: &[(f64, Complex64, Complex64)],
        n_max: usize,
    ) -> Result<Self, OracleError> {
        let dim = n_max + 1;
        let mut matrix = Array2::<Complex64>::zeros((dim, dim));
        for &(w, ket, bra) in dyads {
            for label in [ket, bra] {
                let tail = coherent_tail(label.norm(), n_max);
                if tail >= FOCK_TAIL_LIMIT {
                    return Err(OracleError::Truncation {
                        n_max,
                        tail,
                        beta_abs: label.norm(),
                    });
                }
            }
            let a = coherent_amplitudes(ket, n_max);
            let b = coherent_amplitudes(bra, n_max);
            for m in 0..dim {
                for n in 0..dim {
                    matrix[[m, n]] += a[m] * b[n].conj() * w;
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn from_evolved_cat(cat: &EvolvedCat, n_max: usize) -> Result<Self, OracleError> {
        Self::from_dyads(&cat.normalized_dyads(), n_max)
    }

    pub fn from_cat(cat: &CatState, n_max: usize) -> Result<Self, OracleError> {
        Self::from_evolved_cat(
            &crate::cat::evolve_cat(cat, Complex64::new(1.0, 0.0)),
            n_max,
        )
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.diag().iter().sum()
    }

    /// `Tr ρ²`, computed as a full matrix product.
    pub fn purity(&self) -> f64 {
        self.matrix
            .dot(&self.matrix)
            .diag()
            .iter()
            .sum::<Complex64>()
            .re
    }
}

/// Purity obtained by propagating the master equation.
#[derive(Debug, Clone, PartialEq)]
pub struct PuritySeries {
    pub grid: TimeGrid,
    /// Number of propagated grid points (a prefix of `grid`).
    pub len: usize,
    pub purity: Vec<f64>,
    pub max_trace_error: f64,
}

const TRACE_DRIFT_LIMIT: f64 = 1e-8;

/// Propagates `ρ̇ = −iΩ(t)[a†a, ρ] + Γ(t)(2aρa† − a†aρ − ρa†a)` in the
/// number basis with RK4 on the coefficient grid, interpolating `Γ` and `Ω`
/// linearly inside each step.
///
/// `until` restricts the window to `[0, until]`; every coefficient inside
/// the window must be valid.
pub fn fock_master_propagation(
    coeffs: &CoefficientSeries,
    initial: &CatState,
    n_max: usize,
    until: Option<f64>,
) -> Result<PuritySeries, OracleError> {
    let grid = coeffs.grid;
    let last = until.map_or(grid.steps(), |t| grid.index_at(t));
    if let Some(k) = (0..=last).find(|&k| !coeffs.valid[k]) {
        return Err(OracleError::InvalidCoefficients(grid.time(k)));
    }
    let mut rho = FockDensity::from_cat(initial, n_max)?.matrix;
    let dim = n_max + 1;
    let sqrt_pairs: Array2<f64> =
        Array2::from_shape_fn((dim, dim), |(m, n)| (((m + 1) * (n + 1)) as f64).sqrt());
    let rhs = |rho: &Array2<Complex64>, gamma: f64, omega: f64| -> Array2<Complex64> {
        Array2::from_shape_fn((dim, dim), |(m, n)| {
            let rotate = Complex64::new(0.0, -omega * (m as f64 - n as f64)) * rho[[m, n]];
            let gain = if m + 1 < dim && n + 1 < dim {
                rho[[m + 1, n + 1]] * (2.0 * sqrt_pairs[[m, n]])
            } else {
                Complex64::new(0.0, 0.0)
            };
            rotate + (gain - rho[[m, n]] * (m + n) as f64) * gamma
        })
    };
    let purity_of = |rho: &Array2<Complex64>| rho.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let trace_of = |rho: &Array2<Complex64>| rho.diag().iter().map(|z| z.re).sum::<f64>();

    let h = grid.dt();
    let mut purity = Vec::with_capacity(last + 1);
    purity.push(purity_of(&rho));
    let mut max_trace_error: f64 = (trace_of(&rho) - 1.0).abs();
    for k in 1..=last {
        let (g0, g1) = (coeffs.gamma[k - 1], coeffs.gamma[k]);
        let (w0, w1) = (coeffs.omega[k - 1], coeffs.omega[k]);
        let (gm, wm) = (0.5 * (g0 + g1), 0.5 * (w0 + w1));
        let k1 = rhs(&rho, g0, w0);
        let k2 = rhs(&(&rho + &(&k1 * Complex64::new(0.5 * h, 0.0))), gm, wm);
        let k3 = rhs(&(&rho + &(&k2 * Complex64::new(0.5 * h, 0.0))), gm, wm);
        let k4 = rhs(&(&rho + &(&k3 * Complex64::new(h, 0.0))), g1, w1);
        rho = &rho
            + &((&k1
                + &(&k2 * Complex64::new(2.0, 0.0))
                + &(&k3 * Complex64::new(2.0, 0.0))
                + &k4)
                * Complex64::new(h / 6.0, 0.0));
        let trace = trace_of(&rho);
        let err = (trace - 1.0).abs();
        if err > TRACE_DRIFT_LIMIT {
            return Err(OracleError::TraceDrift {
                trace,
                time: grid.time(k),
            });
        }
        max_trace_error = max_trace_error.max(err);
        purity.push(purity_of(&rho));
    }
    Ok(PuritySeries {
        grid,
        len: last + 1,
        purity,
        max_trace_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat::{evolve_cat, purity};
    use crate::rates::{extract_rates, DEFAULT_EPSILON_U};
    use crate::solver::solve_u;

    #[test]
    fn zero_coupling_bath_has_zero_weights() {
        let p = SpectralParams::new(0.0, 1.0, 1.0).unwrap();
        let b = discretize_bath(&p, 100, 30.0, 10.0, SamplingScheme::MidpointUniform).unwrap();
        assert!(b.modes.iter().all(|m| m.weight == 0.0));
    }

    #[test]
    fn bath_weight_matches_moment() {
        let p = SpectralParams::new(5.0, 1.0, 1.0).unwrap();
        let expect = p.total_weight() - p.tail_weight(30.0);
        for scheme in [
            SamplingScheme::MidpointUniform,
            SamplingScheme::GaussLegendre,
        ] {
            let b = discretize_bath(&p, 2000, 30.0, 25.0, scheme).unwrap();
            let rel = (b.total_weight() - expect).abs() / expect;
            assert!(rel < 1e-6, "{scheme:?}: {rel}");
            assert!(b.modes.iter().all(|m| m.omega > 0.0 && m.omega <= 30.0));
        }
    }

    #[test]
    fn recurrence_violation_is_rejected() {
        let p = SpectralParams::new(5.0, 1.0, 1.0).unwrap();
        match discretize_bath(&p, 100, 30.0, 25.0, SamplingScheme::MidpointUniform) {
            Err(OracleError::Recurrence { required_count, .. }) => {
                assert!(required_count > 100);
                let b = discretize_bath(
                    &p,
                    required_count,
                    30.0,
                    25.0,
                    SamplingScheme::MidpointUniform,
                );
                assert!(b.is_ok());
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            discretize_bath(&p, 1, 30.0, 1.0, SamplingScheme::MidpointUniform),
            Err(OracleError::TooFewModes(1))
        ));
    }

    #[test]
    fn single_mode_oracle_is_cosine() {
        let bath = DiscreteBath::single_mode(1.0, 1.0);
        let grid = TimeGrid::new(6.0, 1e-3).unwrap();
        let s = oracle_amplitude(&bath, 1.0, &grid).unwrap();
        for (t, u) in grid.times().zip(&s.u) {
            assert!((u - Complex64::from_polar(t.cos(), -t)).norm() < 1e-9);
        }
    }

    #[test]
    fn uncoupled_oracle_is_free_rotation() {
        let p = SpectralParams::new(0.0, 1.0, 1.0).unwrap();
        let bath = discretize_bath(&p, 50, 30.0, 5.0, SamplingScheme::MidpointUniform).unwrap();
        let grid = TimeGrid::new(5.0, 1e-2).unwrap();
        let s = oracle_amplitude(&bath, 1.0, &grid).unwrap();
        for (t, u) in grid.times().zip(&s.u) {
            assert!((u - Complex64::from_polar(1.0, -t)).norm() < 1e-10);
        }
    }

    #[test]
    fn oracle_and_solver_agree_on_small_bath() {
        let p = SpectralParams::new(2.0, 1.0, 1.0).unwrap();
        let bath = discretize_bath(&p, 200, 15.0, 20.0, SamplingScheme::MidpointUniform).unwrap();
        let grid = TimeGrid::new(20.0, 5e-4).unwrap();
        let oracle = oracle_amplitude(&bath, 1.0, &grid).unwrap();
        let solved = solve_u(&bath.kernel(), &grid, 1.0).unwrap();
        let dev = oracle.max_deviation(&solved, grid.count());
        assert!(dev < 1e-6, "{dev}");
    }

    #[test]
    fn coherent_tail_is_small_and_monotone() {
        assert_eq!(coherent_tail(0.0, 3), 0.0);
        assert!(coherent_tail(1.5, 24) < 1e-12);
        assert!(coherent_tail(1.5, 10) > coherent_tail(1.5, 12));
        // P(n > 0) for |β|² = 1
        assert!((coherent_tail(1.0, 0) - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn truncation_guard() {
        let cat = CatState::new(Complex64::new(3.0, 0.0));
        assert!(matches!(
            FockDensity::from_cat(&cat, 10),
            Err(OracleError::Truncation { .. })
        ));
    }

    #[test]
    fn fock_reconstruction_matches_closed_form() {
        for beta in [0.4, 1.0, 1.5] {
            let cat = CatState::new(Complex64::new(beta, 0.3 * beta));
            for i in 0..=10 {
                let s = i as f64 / 10.0;
                let ev = evolve_cat(&cat, Complex64::from_polar(s.sqrt(), 0.4));
                let rho = FockDensity::from_evolved_cat(&ev, 24).unwrap();
                assert!((rho.trace() - 1.0).norm() < 1e-10);
                assert!((rho.purity() - purity(&cat, s.sqrt())).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn master_equation_unitary_limit() {
        let grid = TimeGrid::new(5.0, 1e-3).unwrap();
        let n = grid.count();
        let coeffs = CoefficientSeries {
            grid,
            omega_0: 1.0,
            gamma: vec![0.0; n],
            omega: vec![1.0; n],
            delta_omega: vec![0.0; n],
            valid: vec![true; n],
        };
        let cat = CatState::new(Complex64::new(1.0, 0.0));
        let p = fock_master_propagation(&coeffs, &cat, 16, None).unwrap();
        let worst = p.purity.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
        let vacuum = CatState::new(Complex64::new(0.0, 0.0));
        let p = fock_master_propagation(&coeffs, &vacuum, 4, None).unwrap();
        assert!(p.purity.iter().all(|x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn master_equation_rejects_invalid_window() {
        let grid = TimeGrid::new(1.0, 0.1).unwrap();
        let n = grid.count();
        let mut valid = vec![true; n];
        valid[5] = false;
        let coeffs = CoefficientSeries {
            grid,
            omega_0: 1.0,
            gamma: vec![0.1; n],
            omega: vec![1.0; n],
            delta_omega: vec![0.0; n],
            valid,
        };
        let cat = CatState::new(Complex64::new(1.0, 0.0));
        assert!(matches!(
            fock_master_propagation(&coeffs, &cat, 16, None),
            Err(OracleError::InvalidCoefficients(_))
        ));
        let ok = fock_master_propagation(&coeffs, &cat, 16, Some(0.4)).unwrap();
        assert_eq!(ok.len, 5);
    }

    #[test]
    fn master_equation_tracks_closed_form_purity() {
        let p = SpectralParams::new(0.5, 5.0, 1.0).unwrap();
        let grid = TimeGrid::new(4.0, 1e-3).unwrap();
        let s = solve_u(&Kernel::ClosedForm(p), &grid, 1.0).unwrap();
        let r = extract_rates(&s, DEFAULT_EPSILON_U, 1.0);
        let cat = CatState::new(Complex64::new(1.0, 0.0));
        let fock = fock_master_propagation(&r, &cat, 16, None).unwrap();
        for (k, pf) in fock.purity.iter().enumerate() {
            let pc = purity(&cat, s.u[k].norm());
            assert!((pf - pc).abs() < 1e-4, "t={}", grid.time(k));
        }
        assert!(fock.max_trace_error < 1e-8);
    }
}
