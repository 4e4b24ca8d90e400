//! Composite Gauss–Legendre quadrature.
//!
//! Panels near a lower endpoint at zero are graded geometrically so that
//! integrands behaving like `ω^a` with non-integer `a` still converge
//! exponentially in the panel count.

use std::ops::{Add, Mul};
use std::sync::OnceLock;

use num_traits::Zero;

/// Nodes per panel used throughout the crate.
pub const PANEL_ORDER: usize = 16;

/// Ratio between consecutive graded panels next to the origin.
const GRADING_RATIO: f64 = 0.15;
/// Number of graded sub-panels inside the first panel.
const GRADING_LEVELS: usize = 18;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `order`-point rule by Newton iteration on the Legendre
    /// three-term recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess for the i-th largest root
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared 16-point rule.
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(PANEL_ORDER))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes mapped to `[a, b]` paired with their scaled weights.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// Single-panel integral of `f` over `[a, b]`.
    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: Zero + Add<Output = T> + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        self.mapped(a, b)
            .fold(T::zero(), |acc, (x, w)| acc + f(x) * w)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, dp)
}

/// Integrates `f` over `[a, b]` split into `panels` equal panels.
pub fn composite<T, F>(rule: &GaussLegendre, a: f64, b: f64, panels: usize, mut f: F) -> T
where
    T: Zero + Add<Output = T> + Mul<f64, Output = T>,
    F: FnMut(f64) -> T,
{
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = T::zero();
    for p in 0..panels {
        let lo = a + h * p as f64;
        let hi = if p + 1 == panels { b } else { lo + h };
        total = total + rule.integrate(lo, hi, &mut f);
    }
    total
}

/// Like [`composite`] on `[0, b]`, but the first panel is replaced by a
/// geometric cascade of sub-panels accumulating at the origin.
pub fn composite_graded_at_zero<T, F>(rule: &GaussLegendre, b: f64, panels: usize, mut f: F) -> T
where
    T: Zero + Add<Output = T> + Mul<f64, Output = T>,
    F: FnMut(f64) -> T,
{
    let panels = panels.max(1);
    let h = b / panels as f64;
    let mut total = graded_panel(rule, h, &mut f);
    if panels > 1 {
        total = total + composite(rule, h, b, panels - 1, &mut f);
    }
    total
}

/// Integral over `[0, h]` on panels `[h r^{j+1}, h r^j]`; the innermost
/// remainder `[0, h r^L]` gets a single plain panel.
pub fn graded_panel<T, F>(rule: &GaussLegendre, h: f64, mut f: F) -> T
where
    T: Zero + Add<Output = T> + Mul<f64, Output = T>,
    F: FnMut(f64) -> T,
{
    let mut hi = h;
    let mut total = T::zero();
    for _ in 0..GRADING_LEVELS {
        let lo = hi * GRADING_RATIO;
        total = total + rule.integrate(lo, hi, &mut f);
        hi = lo;
    }
    total + rule.integrate(0.0, hi, &mut f)
}
