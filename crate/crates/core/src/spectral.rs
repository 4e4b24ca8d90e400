//! Spectral densities, memory kernels and Markovian-limit coefficients.
//!
//! All frequencies are in units of the system frequency and all times in
//! units of its inverse. The system frequency is still carried explicitly
//! as `omega_0` so that the Markovian formulas read literally.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::{gamma, gamma_ur};
use thiserror::Error;

use crate::quadrature::{self, GaussLegendre, PANEL_ORDER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("spectral density evaluated at negative frequency {0}")]
    NegativeFrequency(f64),
    #[error("principal-value quadrature did not converge: {coarse} vs {fine} after refinement")]
    PrincipalValueNotConverged { coarse: f64, fine: f64 },
}

/// Low-frequency behaviour of the bath, fixed by the Ohmicity exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathClass {
    SubOhmic,
    Ohmic,
    SuperOhmic,
}

impl std::fmt::Display for BathClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BathClass::SubOhmic => "sub-Ohmic",
            BathClass::Ohmic => "Ohmic",
            BathClass::SuperOhmic => "super-Ohmic",
        })
    }
}

/// Parameters of the family `J(ω) = η ω (ω/ωc)^{n-1} exp(-ω/ωc)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    eta: f64,
    omega_c: f64,
    n: f64,
    omega_0: f64,
}

impl SpectralParams {
    /// Parameters with the system frequency fixed to one.
    pub fn new(eta: f64, omega_c: f64, n: f64) -> Result<Self, SpectralError> {
        Self::with_omega_0(eta, omega_c, n, 1.0)
    }

    pub fn with_omega_0(
        eta: f64,
        omega_c: f64,
        n: f64,
        omega_0: f64,
    ) -> Result<Self, SpectralError> {
        check(eta, "eta", |v| v >= 0.0, "must be non-negative")?;
        check(omega_c, "omega_c", |v| v > 0.0, "must be positive")?;
        check(n, "n", |v| v > 0.0, "must be positive")?;
        check(omega_0, "omega_0", |v| v > 0.0, "must be positive")?;
        Ok(Self {
            eta,
            omega_c,
            n,
            omega_0,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn omega_0(&self) -> f64 {
        self.omega_0
    }

    /// Copy with a different coupling strength.
    pub fn with_eta(self, eta: f64) -> Result<Self, SpectralError> {
        Self::with_omega_0(eta, self.omega_c, self.n, self.omega_0)
    }

    pub fn class(&self) -> BathClass {
        if self.n < 1.0 {
            BathClass::SubOhmic
        } else if self.n == 1.0 {
            BathClass::Ohmic
        } else {
            BathClass::SuperOhmic
        }
    }

    /// Environmental correlation time, taken as `1/ωc`. Display only.
    pub fn tau_e(&self) -> f64 {
        1.0 / self.omega_c
    }

    /// System time scale `1/ω₀`. Display only.
    pub fn tau_0(&self) -> f64 {
        1.0 / self.omega_0
    }

    /// `J(ω)` without the domain check; callers guarantee `omega >= 0`.
    pub(crate) fn density(&self, omega: f64) -> f64 {
        if self.eta == 0.0 || omega == 0.0 {
            return 0.0;
        }
        let r = omega / self.omega_c;
        self.eta * self.omega_c * r.powf(self.n) * (-r).exp()
    }

    /// Total coupling weight `∫₀^∞ J dω = η Γ(n+1) ωc²`.
    pub fn total_weight(&self) -> f64 {
        self.eta * gamma(self.n + 1.0) * self.omega_c * self.omega_c
    }

    /// `∫_Λ^∞ J dω` in closed form via the regularized upper incomplete gamma.
    pub fn tail_weight(&self, lambda: f64) -> f64 {
        if self.eta == 0.0 {
            return 0.0;
        }
        self.total_weight() * gamma_ur(self.n + 1.0, lambda / self.omega_c)
    }
}

fn check(
    value: f64,
    name: &'static str,
    ok: impl Fn(f64) -> bool,
    reason: &'static str,
) -> Result<(), SpectralError> {
    if value.is_finite() && ok(value) {
        Ok(())
    } else {
        Err(SpectralError::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}

/// `J(ω) = η ω (ω/ωc)^{n-1} e^{-ω/ωc}`.
pub fn spectral_density(params: &SpectralParams, omega: f64) -> Result<f64, SpectralError> {
    if omega.is_nan() || omega < 0.0 {
        return Err(SpectralError::NegativeFrequency(omega));
    }
    Ok(params.density(omega))
}

/// `μ(x) = ∫₀^∞ J(ω) e^{-iωx} dω = η Γ(n+1) ωc² / (1 + i ωc x)^{n+1}`.
pub fn kernel_closed_form(params: &SpectralParams, x: f64) -> Complex64 {
    if params.eta == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let z = Complex64::new(1.0, params.omega_c * x);
    let p = params.n + 1.0;
    let denom = if p.fract() == 0.0 && p <= 16.0 {
        z.powi(p as i32)
    } else {
        z.powf(p)
    };
    params.total_weight() / denom
}

/// Settings for the quadrature-backed kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Fixed total node count. `None` sizes the panels at every evaluation
    /// point so that each panel sees at most half an oscillation.
    pub nodes: Option<usize>,
    /// Upper frequency cutoff in units of `ωc`.
    pub cutoff_factor: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: None,
            cutoff_factor: 30.0,
        }
    }
}

pub const MIN_QUADRATURE_NODES: usize = 200;
pub const MIN_CUTOFF_FACTOR: f64 = 30.0;

/// Why a quadrature kernel value may miss its accuracy target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureWarning {
    TooFewNodes { nodes: usize },
    CutoffTooLow { cutoff_factor: f64 },
    Underresolved { panel_width: f64, required: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEstimate {
    pub value: Complex64,
    pub warning: Option<QuadratureWarning>,
}

/// Widest panel that keeps a 16-point rule at round-off for this `x`.
fn resolved_panel_width(params: &SpectralParams, x: f64) -> f64 {
    let decay = 0.5 * params.omega_c;
    if x == 0.0 {
        decay
    } else {
        decay.min(PI / x.abs())
    }
}

/// `μ(x)` by composite Gauss–Legendre over `[0, Λ]`, `Λ = cutoff_factor·ωc`.
pub fn kernel_quadrature(
    params: &SpectralParams,
    x: f64,
    config: &QuadratureConfig,
) -> KernelEstimate {
    let zero = Complex64::new(0.0, 0.0);
    let lambda = config.cutoff_factor * params.omega_c;
    let required = resolved_panel_width(params, x);
    let (panels, mut warning) = match config.nodes {
        None => (
            ((lambda / required).ceil() as usize).max(MIN_QUADRATURE_NODES.div_ceil(PANEL_ORDER)),
            None,
        ),
        Some(nodes) => {
            let panels = nodes.div_ceil(PANEL_ORDER).max(1);
            let width = lambda / panels as f64;
            let warning = if nodes < MIN_QUADRATURE_NODES {
                Some(QuadratureWarning::TooFewNodes { nodes })
            } else if width > required {
                Some(QuadratureWarning::Underresolved {
                    panel_width: width,
                    required,
                })
            } else {
                None
            };
            (panels, warning)
        }
    };
    if config.cutoff_factor < MIN_CUTOFF_FACTOR {
        warning = warning.or(Some(QuadratureWarning::CutoffTooLow {
            cutoff_factor: config.cutoff_factor,
        }));
    }
    if params.eta == 0.0 {
        return KernelEstimate {
            value: zero,
            warning,
        };
    }
    let rule = GaussLegendre::standard();
    let value = quadrature::composite_graded_at_zero(rule, lambda, panels, |w| {
        let (s, c) = (w * x).sin_cos();
        Complex64::new(c, -s) * params.density(w)
    });
    KernelEstimate { value, warning }
}

/// A single bath oscillator: frequency and coupling weight `|g|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathMode {
    pub omega: f64,
    pub weight: f64,
}

/// Memory kernel `μ(x)` in one of three realizations.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    ClosedForm(SpectralParams),
    Quadrature {
        params: SpectralParams,
        config: QuadratureConfig,
    },
    /// `μ(x) = Σ_k |g_k|² e^{-iω_k x}` over a finite set of modes.
    DiscreteSum(Vec<BathMode>),
}

impl Kernel {
    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            Kernel::ClosedForm(p) => kernel_closed_form(p, x),
            Kernel::Quadrature { params, config } => kernel_quadrature(params, x, config).value,
            Kernel::DiscreteSum(modes) => modes
                .iter()
                .map(|m| {
                    let (s, c) = (m.omega * x).sin_cos();
                    Complex64::new(c, -s) * m.weight
                })
                .sum(),
        }
    }

    /// `μ(0)`, the total coupling weight seen by this kernel.
    pub fn at_zero(&self) -> f64 {
        self.eval(0.0).re
    }

    /// Values `μ(k·dt)` for `k = 0..count`.
    pub fn tabulate(&self, dt: f64, count: usize) -> Vec<Complex64> {
        (0..count)
            .into_par_iter()
            .map(|k| self.eval(k as f64 * dt))
            .collect()
    }
}

/// Markovian-limit coefficients of the master equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovianCoefficients {
    /// `π J(ω₀)`.
    pub gamma_m: f64,
    /// Principal-value shift `P∫ J(ω)/(ω−ω₀) dω`.
    pub delta_omega: f64,
    /// `ω₀ − δω`.
    pub omega_m: f64,
}

pub fn markovian_coefficients(
    params: &SpectralParams,
) -> Result<MarkovianCoefficients, SpectralError> {
    let gamma_m = PI * params.density(params.omega_0);
    let delta_omega = pv_integral(params)?.value;
    Ok(MarkovianCoefficients {
        gamma_m,
        delta_omega,
        omega_m: params.omega_0 - delta_omega,
    })
}

/// Result of the principal-value evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalValue {
    /// Integral over the truncated domain `[0, Λ]`.
    pub value: f64,
    /// Upper bound on the neglected `∫_Λ^∞ J/(ω−ω₀) dω`.
    pub tail_bound: f64,
    /// Upper limit `Λ = max(30 ωc, 10 ω₀)`.
    pub upper_limit: f64,
}

const PV_REL_TOL: f64 = 1e-6;

/// `P∫₀^∞ J(ω)/(ω−ω₀) dω` by singularity subtraction.
///
/// The regular part `(J(ω) − J(ω₀))/(ω − ω₀)` is integrated on panels with
/// a breakpoint at `ω₀`; the subtracted pole contributes
/// `J(ω₀) ln((Λ − ω₀)/ω₀)`. The result is accepted only if a second pass
/// with twice the panels agrees to `1e-6` relative.
pub fn pv_integral(params: &SpectralParams) -> Result<PrincipalValue, SpectralError> {
    let w0 = params.omega_0;
    let upper_limit = (30.0 * params.omega_c).max(10.0 * w0);
    if params.eta == 0.0 {
        return Ok(PrincipalValue {
            value: 0.0,
            tail_bound: 0.0,
            upper_limit,
        });
    }
    let base_width = 0.5 * params.omega_c.min(w0);
    let coarse = pv_truncated(params, upper_limit, base_width);
    let fine = pv_truncated(params, upper_limit, 0.5 * base_width);
    let scale = fine.abs().max(params.eta * params.omega_c);
    if (fine - coarse).abs() > PV_REL_TOL * scale {
        return Err(SpectralError::PrincipalValueNotConverged { coarse, fine });
    }
    Ok(PrincipalValue {
        value: fine,
        tail_bound: params.tail_weight(upper_limit) / (upper_limit - w0),
        upper_limit,
    })
}

fn pv_truncated(params: &SpectralParams, upper: f64, width: f64) -> f64 {
    let w0 = params.omega_0;
    let j0 = params.density(w0);
    let regular = |w: f64| (params.density(w) - j0) / (w - w0);
    let rule = GaussLegendre::standard();
    let below = ((w0 / width).ceil() as usize).max(1);
    let above = (((upper - w0) / width).ceil() as usize).max(1);
    let lower_part: f64 = quadrature::composite_graded_at_zero(rule, w0, below, regular);
    let upper_part: f64 = quadrature::composite(rule, w0, upper, above, regular);
    lower_part + upper_part + j0 * ((upper - w0) / w0).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weak() -> SpectralParams {
        SpectralParams::new(0.1, 50.0, 1.0).unwrap()
    }

    fn resonant() -> SpectralParams {
        SpectralParams::new(5.0, 1.0, 1.0).unwrap()
    }

    /// `Ei(x)` for `x > 0` by its convergent power series.
    fn ei(x: f64) -> f64 {
        const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..200 {
            term *= x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        EULER_GAMMA + x.ln() + sum
    }

    fn ohmic_shift(p: &SpectralParams) -> f64 {
        let r = p.omega_0() / p.omega_c();
        p.eta() * (p.omega_c() - p.omega_0() * (-r).exp() * ei(r))
    }

    #[test]
    fn parameter_validation() {
        assert!(SpectralParams::new(-0.1, 1.0, 1.0).is_err());
        assert!(SpectralParams::new(0.1, 0.0, 1.0).is_err());
        assert!(SpectralParams::new(0.1, 1.0, 0.0).is_err());
        assert!(SpectralParams::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(SpectralParams::with_omega_0(0.1, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn classification() {
        let c = |n| SpectralParams::new(1.0, 1.0, n).unwrap().class();
        assert_eq!(c(0.5), BathClass::SubOhmic);
        assert_eq!(c(1.0), BathClass::Ohmic);
        assert_eq!(c(2.0), BathClass::SuperOhmic);
        assert_eq!(resonant().tau_e(), 1.0);
    }

    #[test]
    fn density_examples() {
        assert_eq!(spectral_density(&weak(), 0.0).unwrap(), 0.0);
        let j = spectral_density(&weak(), 1.0).unwrap();
        assert!((j - 0.1 * (-0.02f64).exp()).abs() < 1e-15);
        assert!((j - 0.0980199).abs() < 1e-7);
        let j = spectral_density(&resonant(), 1.0).unwrap();
        assert!((j - 1.839397).abs() < 1e-6);
        assert_eq!(
            spectral_density(&weak(), -1.0),
            Err(SpectralError::NegativeFrequency(-1.0))
        );
    }

    #[test]
    fn closed_form_examples() {
        let p = weak();
        let mu0 = kernel_closed_form(&p, 0.0);
        assert!((mu0 - Complex64::new(250.0, 0.0)).norm() < 1e-12);
        let mu = kernel_closed_form(&p, 0.02);
        assert!((mu - Complex64::new(0.0, -125.0)).norm() < 1e-11);
        assert!(kernel_closed_form(&p, 1e6).norm() < 1e-6);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let cfg = QuadratureConfig::default();
        for &n in &[0.5, 1.0, 2.0, 3.0] {
            for &wc in &[0.2, 1.0, 50.0] {
                let p = SpectralParams::new(0.7, wc, n).unwrap();
                let scale = p.total_weight();
                for &x in &[0.0, 0.013, 0.4, 3.0, 17.0, 100.0] {
                    let est = kernel_quadrature(&p, x, &cfg);
                    assert!(est.warning.is_none());
                    let err = (est.value - kernel_closed_form(&p, x)).norm();
                    assert!(err <= 1e-8 * scale, "n={n} wc={wc} x={x} err={err}");
                }
            }
        }
    }

    #[test]
    fn quadrature_zero_coupling_and_warnings() {
        let p = resonant().with_eta(0.0).unwrap();
        let est = kernel_quadrature(&p, 1.3, &QuadratureConfig::default());
        assert_eq!(est.value, Complex64::new(0.0, 0.0));
        let few = QuadratureConfig {
            nodes: Some(64),
            cutoff_factor: 30.0,
        };
        assert!(matches!(
            kernel_quadrature(&resonant(), 0.0, &few).warning,
            Some(QuadratureWarning::TooFewNodes { nodes: 64 })
        ));
        let coarse = QuadratureConfig {
            nodes: Some(256),
            cutoff_factor: 30.0,
        };
        assert!(matches!(
            kernel_quadrature(&resonant(), 50.0, &coarse).warning,
            Some(QuadratureWarning::Underresolved { .. })
        ));
        let short = QuadratureConfig {
            nodes: None,
            cutoff_factor: 10.0,
        };
        assert!(matches!(
            kernel_quadrature(&resonant(), 0.0, &short).warning,
            Some(QuadratureWarning::CutoffTooLow { .. })
        ));
    }

    #[test]
    fn markovian_examples() {
        let m = markovian_coefficients(&weak()).unwrap();
        assert!((m.gamma_m - PI * 0.1 * (-0.02f64).exp()).abs() < 1e-15);
        assert!((m.gamma_m - 0.307938).abs() < 1e-6);
        assert!((m.delta_omega - 5.3249).abs() < 1e-4, "{}", m.delta_omega);
        assert_eq!(m.omega_m, 1.0 - m.delta_omega);

        let free = markovian_coefficients(&weak().with_eta(0.0).unwrap()).unwrap();
        assert_eq!(
            (free.gamma_m, free.delta_omega, free.omega_m),
            (0.0, 0.0, 1.0)
        );
    }

    #[test]
    fn pv_matches_exponential_integral() {
        for p in [weak(), resonant(), SpectralParams::new(5.0, 0.2, 1.0).unwrap()] {
            let pv = pv_integral(&p).unwrap();
            let oracle = ohmic_shift(&p);
            assert!((pv.value - oracle).abs() < 1e-6, "{} vs {oracle}", pv.value);
            assert!(pv.tail_bound < 1e-9);
        }
    }

    #[test]
    fn pv_refinement_stable() {
        for n in [0.5, 1.0, 2.0, 3.0] {
            let p = SpectralParams::new(0.3, 4.0, n).unwrap();
            let width = 0.5 * p.omega_c().min(p.omega_0());
            let upper = 30.0 * p.omega_c();
            let a = pv_truncated(&p, upper, width);
            let b = pv_truncated(&p, upper, 0.25 * width);
            assert!((a - b).abs() < 1e-6 * a.abs(), "n={n}: {a} {b}");
        }
    }

    #[test]
    fn discrete_kernel_sums_modes() {
        let k = Kernel::DiscreteSum(vec![
            BathMode {
                omega: 1.0,
                weight: 0.5,
            },
            BathMode {
                omega: 2.0,
                weight: 0.25,
            },
        ]);
        assert_eq!(k.at_zero(), 0.75);
        let x = 0.3;
        let expect = Complex64::from_polar(0.5, -x) + Complex64::from_polar(0.25, -2.0 * x);
        assert!((k.eval(x) - expect).norm() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = SpectralParams> {
            (
                0.0..5.0f64,
                0.2..50.0f64,
                prop::sample::select(vec![0.5, 1.0, 2.0, 3.0]),
            )
                .prop_map(|(e, w, n)| SpectralParams::new(e, w, n).unwrap())
        }

        proptest! {
            #[test]
            fn density_non_negative(p in params(), w in 0.0..500.0f64) {
                prop_assert!(spectral_density(&p, w).unwrap() >= 0.0);
            }

            #[test]
            fn kernel_conjugate_symmetry(p in params(), x in -100.0..100.0f64) {
                let a = kernel_closed_form(&p, -x);
                let b = kernel_closed_form(&p, x).conj();
                prop_assert!((a - b).norm() <= 1e-12 * p.total_weight().max(1e-300));
                let cfg = QuadratureConfig::default();
                let qa = kernel_quadrature(&p, -x, &cfg).value;
                let qb = kernel_quadrature(&p, x, &cfg).value.conj();
                prop_assert!((qa - qb).norm() <= 1e-12 * p.total_weight().max(1e-300));
            }

            #[test]
            fn gamma_m_linear_in_eta(p in params()) {
                let m1 = markovian_coefficients(&p).unwrap();
                let m2 = markovian_coefficients(&p.with_eta(2.0 * p.eta()).unwrap()).unwrap();
                prop_assert_eq!(m2.gamma_m, 2.0 * m1.gamma_m);
            }
        }
    }
}
