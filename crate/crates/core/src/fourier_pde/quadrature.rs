//! Adaptive Gauss-Legendre quadrature for smooth complex integrands.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Result, SpeclabError};

/// Points per panel.
const ORDER: usize = 15;
/// Bisection depth after which a panel is declared non-convergent.
const MAX_DEPTH: u32 = 40;

/// Nodes and weights (`n >= 1`) of the `n`-point Gauss-Legendre rule on `[-1, 1]`, by
/// Newton iteration on `P_n` from Chebyshev initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn panel(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> Complex64 {
    let (x, w) = rule();
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    x.iter()
        .zip(w)
        .map(|(&t, &wt)| f(mid + half * t) * wt)
        .sum::<Complex64>()
        * half
}

fn refine(f: &impl Fn(f64) -> Complex64, a: f64, b: f64, whole: Complex64, tol: f64, depth: u32) -> Result<Complex64> {
    let mid = (a + b) / 2.0;
    let (left, right) = (panel(f, a, mid), panel(f, mid, b));
    let halves = left + right;
    // the second test stops refinement once the estimate hits roundoff
    let diff = (halves - whole).norm();
    if diff <= tol || diff <= 100.0 * f64::EPSILON * halves.norm() {
        return Ok(halves);
    }
    if depth >= MAX_DEPTH {
        return Err(SpeclabError::Accuracy(format!(
            "quadrature did not converge on [{a}, {b}] (error estimate {diff:.3e})"
        )));
    }
    Ok(refine(f, a, mid, left, tol / 2.0, depth + 1)? + refine(f, mid, b, right, tol / 2.0, depth + 1)?)
}

/// `int_a^b f` to absolute tolerance `tol`, starting from `panels` equal
/// panels and bisecting any panel whose two halves disagree with it.
pub fn integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, panels: usize, tol: f64) -> Result<Complex64> {
    if !(a.is_finite() && b.is_finite()) || !(tol > 0.0) {
        return Err(SpeclabError::Validation(
            "quadrature needs finite bounds and a positive tolerance".into(),
        ));
    }
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + h * p as f64;
        let hi = if p + 1 == panels { b } else { lo + h };
        total += refine(&f, lo, hi, panel(&f, lo, hi), tol / panels as f64, 0)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m8: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((m8 - 2.0 / 9.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn gaussian_and_oscillation() {
        let g = integrate(|x| Complex64::new((-x * x).exp(), 0.0), -8.0, 8.0, 4, 1e-13).unwrap();
        assert!((g.re - PI.sqrt()).abs() < 1e-12);
        let osc = integrate(|x| Complex64::from_polar(1.0, 40.0 * x), 0.0, PI, 1, 1e-12).unwrap();
        assert!(osc.norm() < 1e-11);
    }

    #[test]
    fn non_convergence_is_reported() {
        let r = integrate(|x| Complex64::new(1.0 / (x - 1.0 / 3.0), 0.0), 0.0, 1.0, 1, 1e-10);
        assert!(matches!(r, Err(SpeclabError::Accuracy(_))));
    }
}
