//! Schrödinger-cat states under the reduced propagating map.
//!
//! Internally dyads use Bargmann kets `|β⟩ = e^{β a†}|0⟩`, for which the
//! map reads `|β⟩⟨γ| ↦ e^{(1−|u|²) γ̄β} |uβ⟩⟨uγ|`. Everything handed to
//! callers as a weight is expressed against normalized coherent states;
//! [`bargmann_to_normalized`] is the single conversion point.

use num_complex::Complex64;

/// Factor turning a coefficient of the Bargmann dyad `|β⟩⟨γ|` into the
/// coefficient of the normalized dyad.
pub fn bargmann_to_normalized(beta: Complex64, gamma: Complex64) -> f64 {
    (0.5 * (beta.norm_sqr() + gamma.norm_sqr())).exp()
}

/// Image of a single coherent dyad under the propagating map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatedDyad {
    /// Prefactor of the Bargmann dyad `|β_out⟩⟨γ_out|`.
    pub scale: Complex64,
    /// Prefactor of the normalized dyad, relative to the normalized input.
    pub normalized_scale: Complex64,
    pub beta_out: Complex64,
    pub gamma_out: Complex64,
}

/// Maps `|β⟩⟨γ|` through the propagating function with amplitude `u`.
pub fn propagate_dyad(beta: Complex64, gamma: Complex64, u: Complex64) -> PropagatedDyad {
    let loss = 1.0 - u.norm_sqr();
    let overlap_exponent = gamma.conj() * beta;
    let scale = (overlap_exponent * loss).exp();
    let beta_out = u * beta;
    let gamma_out = u * gamma;
    // normalized in, normalized out
    let normalized_scale =
        scale * bargmann_to_normalized(beta_out, gamma_out) / bargmann_to_normalized(beta, gamma);
    PropagatedDyad {
        scale,
        normalized_scale,
        beta_out,
        gamma_out,
    }
}

/// Even cat `(|β₀⟩ + |−β₀⟩)(⟨β₀| + ⟨−β₀|) / N` in Bargmann kets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatState {
    beta0: Complex64,
    norm: f64,
}

impl CatState {
    pub fn new(beta0: Complex64) -> Self {
        let b = beta0.norm_sqr();
        Self {
            beta0,
            norm: 2.0 * (b.exp() + (-b).exp()),
        }
    }

    pub fn beta0(&self) -> Complex64 {
        self.beta0
    }

    /// `N = 2(e^{|β₀|²} + e^{−|β₀|²})`.
    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Cat state after evolution with amplitude `u`:
/// `[d (|β⟩⟨β| + |−β⟩⟨−β|) + c (|−β⟩⟨β| + |β⟩⟨−β|)]` with `β = β₀u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolvedCat {
    pub beta0: Complex64,
    pub u: Complex64,
    pub beta: Complex64,
    /// `d = e^{|β₀|²−|β|²}/N`, Bargmann convention.
    pub diag_weight: f64,
    /// `c = e^{−(|β₀|²−|β|²)}/N`, Bargmann convention.
    pub cross_weight: f64,
    pub purity: f64,
}

impl EvolvedCat {
    /// Weight of `|β⟩⟨β|` (and `|−β⟩⟨−β|`) with normalized kets.
    pub fn normalized_diag_weight(&self) -> f64 {
        self.diag_weight * bargmann_to_normalized(self.beta, self.beta)
    }

    /// Weight of `|β⟩⟨−β|` (and its adjoint) with normalized kets.
    pub fn normalized_cross_weight(&self) -> f64 {
        self.cross_weight * bargmann_to_normalized(self.beta, -self.beta)
    }

    /// The four normalized dyads as `(weight, ket label, bra label)`.
    pub fn normalized_dyads(&self) -> [(f64, Complex64, Complex64); 4] {
        let (d, c, b) = (
            self.normalized_diag_weight(),
            self.normalized_cross_weight(),
            self.beta,
        );
        [(d, b, b), (d, -b, -b), (c, -b, b), (c, b, -b)]
    }
}

pub fn evolve_cat(cat: &CatState, u: Complex64) -> EvolvedCat {
    let beta = cat.beta0 * u;
    let lost = cat.beta0.norm_sqr() - beta.norm_sqr();
    EvolvedCat {
        beta0: cat.beta0,
        u,
        beta,
        diag_weight: lost.exp() / cat.norm,
        cross_weight: (-lost).exp() / cat.norm,
        purity: purity(cat, u.norm()),
    }
}

/// `Tr ρ²` of the evolved cat,
/// `2/N² [e^{2b₀} + e^{−2b₀} + e^{2b₀−4b} + e^{−2b₀+4b} + 4]`, `b₀ = |β₀|²`,
/// `b = |β₀|² u_abs²`. Evaluated with `e^{2b₀}` factored out of numerator
/// and `N²` so large amplitudes do not overflow.
pub fn purity(cat: &CatState, u_abs: f64) -> f64 {
    let b0 = cat.beta0.norm_sqr();
    let b = b0 * u_abs * u_abs;
    let e = (-2.0 * b0).exp();
    let numerator = 1.0 + e * e + (-4.0 * b).exp() + (-4.0 * b0 + 4.0 * b).exp() + 4.0 * e;
    let denominator = 2.0 * (1.0 + e) * (1.0 + e);
    (numerator / denominator).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dyad_identity_at_unit_amplitude() {
        let d = propagate_dyad(c(0.3, -1.2), c(-0.7, 0.1), c(1.0, 0.0));
        assert_eq!(d.scale, c(1.0, 0.0));
        assert_eq!(d.beta_out, c(0.3, -1.2));
        assert_eq!(d.gamma_out, c(-0.7, 0.1));
        assert!((d.normalized_scale - 1.0).norm() < 1e-15);
    }

    #[test]
    fn dyad_full_decay_to_vacuum() {
        let (b, g) = (c(0.5, 0.5), c(1.0, -0.25));
        let d = propagate_dyad(b, g, c(0.0, 0.0));
        assert_eq!(d.beta_out, c(0.0, 0.0));
        assert_eq!(d.gamma_out, c(0.0, 0.0));
        assert!((d.scale - (g.conj() * b).exp()).norm() < 1e-15);
    }

    #[test]
    fn cross_term_normalized_weight() {
        let beta0 = c(1.0, 0.0);
        for s in [0.0, 0.25, 0.5, 0.9] {
            let u = Complex64::from_polar(f64::sqrt(s), 0.7);
            let d = propagate_dyad(beta0, -beta0, u);
            let expect = (-2.0 * beta0.norm_sqr() * (1.0 - s)).exp();
            assert!((d.normalized_scale - expect).norm() < 1e-14, "s={s}");
        }
    }

    #[test]
    fn evolved_weights_match_dyad_map() {
        let cat = CatState::new(c(0.8, 0.6));
        let u = Complex64::from_polar(0.6, -1.1);
        let ev = evolve_cat(&cat, u);
        let b0 = cat.beta0();
        // initial Bargmann cat: all four dyads carry 1/N
        let diag = propagate_dyad(b0, b0, u).scale.re / cat.norm();
        let cross = propagate_dyad(-b0, b0, u).scale.re / cat.norm();
        assert!((diag - ev.diag_weight).abs() < 1e-14);
        assert!((cross - ev.cross_weight).abs() < 1e-14);
    }

    #[test]
    fn purity_endpoints_and_minimum() {
        let cat = CatState::new(c(1.0, 0.0));
        assert!((purity(&cat, 1.0) - 1.0).abs() < 1e-12);
        assert!((purity(&cat, 0.0) - 1.0).abs() < 1e-12);
        let mid = purity(&cat, 0.5f64.sqrt());
        assert!((mid - 0.7100).abs() < 5e-5, "{mid}");
        let n2 = 4.0 * ((2.0f64).exp() + 2.0 + (-2.0f64).exp());
        assert!((cat.norm() * cat.norm() - n2).abs() < 1e-12);
        let ev = evolve_cat(&cat, c(0.0, 0.0));
        assert!((ev.purity - 1.0).abs() < 1e-15);
    }

    #[test]
    fn purity_minimum_is_global_at_half() {
        let cat = CatState::new(c(1.0, 0.0));
        let closed = |s: f64| {
            let n = cat.norm();
            2.0 / (n * n)
                * ((2.0f64).exp()
                    + (-2.0f64).exp()
                    + (2.0 - 4.0 * s).exp()
                    + (4.0 * s - 2.0).exp()
                    + 4.0)
        };
        let min = (0..=1000)
            .map(|i| closed(i as f64 / 1000.0))
            .fold(f64::INFINITY, f64::min);
        assert!((min - closed(0.5)).abs() < 1e-15);
        for i in 0..=20 {
            let s = i as f64 / 20.0;
            assert!((purity(&cat, s.sqrt()) - closed(s)).abs() < 1e-14);
        }
    }

    #[test]
    fn large_amplitude_does_not_overflow() {
        let cat = CatState::new(c(30.0, 0.0));
        let p = purity(&cat, 0.5);
        assert!(p.is_finite() && p > 0.0 && p <= 1.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn purity_in_unit_interval(re in -3.0..3.0f64, im in -3.0..3.0f64, a in 0.0..=1.0f64) {
                let p = purity(&CatState::new(c(re, im)), a);
                prop_assert!(p > 0.0 && p <= 1.0);
            }

            #[test]
            fn purity_reflection_symmetry(b in 0.0..3.0f64, s in 0.0..=1.0f64) {
                let cat = CatState::new(c(b, 0.0));
                let p1 = purity(&cat, s.sqrt());
                let p2 = purity(&cat, (1.0 - s).sqrt());
                prop_assert!((p1 - p2).abs() <= 1e-14);
            }

            #[test]
            fn contraction_bounds_label(re in -2.0..2.0f64, im in -2.0..2.0f64, a in 0.0..=1.0f64, ph in 0.0..6.3f64) {
                let ev = evolve_cat(&CatState::new(c(re, im)), Complex64::from_polar(a, ph));
                prop_assert!(ev.beta.norm() <= ev.beta0.norm() * (1.0 + 1e-12));
            }
        }
    }
}
