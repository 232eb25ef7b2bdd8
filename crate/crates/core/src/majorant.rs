//! Scalar majorants of the coefficient norms and the certified radius of
//! time-analyticity.
//!
//! With `α = 2‖ϖ₀‖` and the transform constant `K`, the interior and
//! exterior coefficient norms are dominated by sequences `α_s`, `β_s`
//! obeying
//!
//! ```text
//! (s+1) α_{s+1} = ½ α^{s+1}/s! + (1+K²) A_s + K² (C_s + B_s)
//! (s+1) β_{s+1} = (1+K²) B_s + K² (C_s + A_s)
//! ```
//!
//! with the convolutions `A_s = Σ (k+1) α_{k+1} α_{s−k}`, `B_s` (same with β)
//! and `C_s = Σ (k+1)(α_{k+1} β_{s−k} + β_{k+1} α_{s−k})`. The partial sums
//! `h_N(ξ) = Σ (α_s + β_s) ξ^s` stay below `2/(1+2K²)` for
//! `ξ < T* = e^{−4/(1+2K²)} / (α(1+2K²))`. `T*` falls with `α`; in `K` it
//! rises up to `K = √(3/2)` and falls after.
//!
//! Sequences are stored scaled by `T*^s`, which keeps them bounded.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MajorantError {
    #[error("alpha must be positive and finite (got {0})")]
    InvalidAlpha(f64),
    #[error("K must be non-negative and finite (got {0})")]
    InvalidK(f64),
    #[error("4Rc = {0} exceeds 1: no real roots")]
    NoRealRoots(f64),
    #[error("|t| = {t} is outside the certified radius {t_star}")]
    OutsideRadius { t: f64, t_star: f64 },
}

/// Orders stored explicitly; the geometric cap covers the rest.
pub const MAX_ORDER: usize = 64;

/// `T* = e^{−4/(1+2K²)} / (α(1+2K²))`.
pub fn certified_radius(alpha: f64, k: f64) -> Result<f64, MajorantError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(MajorantError::InvalidAlpha(alpha));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(MajorantError::InvalidK(k));
    }
    let m = 1.0 + 2.0 * k * k;
    Ok((-4.0 / m).exp() / (alpha * m))
}

/// One step of `h_{N+1} = (αξ/2) e^{αξ} + ((1+2K²)/2) h_N²`.
pub fn h_step(h: f64, xi: f64, alpha: f64, k: f64) -> f64 {
    0.5 * alpha * xi * (alpha * xi).exp() + 0.5 * (1.0 + 2.0 * k * k) * h * h
}

/// Roots of `R x² − x + c`, ascending.
pub fn root_interval(c: f64, r: f64) -> Result<(f64, f64), MajorantError> {
    let disc = 1.0 - 4.0 * r * c;
    if disc < 0.0 {
        return Err(MajorantError::NoRealRoots(4.0 * r * c));
    }
    let s = disc.sqrt();
    // lo in the cancellation-free form 2c/(1 + s)
    Ok((2.0 * c / (1.0 + s), (1.0 + s) / (2.0 * r)))
}

/// The cap `2/(1+2K²)` on `h_N`.
pub fn h_cap(k: f64) -> f64 {
    2.0 / (1.0 + 2.0 * k * k)
}

/// Majorant data for one datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantState {
    pub alpha: f64,
    pub k: f64,
    /// Sup bound constant of the Cauchy transform, used by [`MajorantState::tail_bound`].
    pub k0: f64,
    pub t_star: f64,
    /// `α_s T*^s`, index `s` (index 0 unused and zero).
    pub alpha_scaled: Vec<f64>,
    /// `β_s T*^s`.
    pub beta_scaled: Vec<f64>,
}

impl MajorantState {
    /// Fills the sequences through [`MAX_ORDER`].
    pub fn new(alpha: f64, k: f64, k0: f64) -> Result<Self, MajorantError> {
        let t_star = certified_radius(alpha, k)?;
        let mut st = Self { alpha, k, k0, t_star, alpha_scaled: vec![0.0, 0.5 * alpha * t_star], beta_scaled: vec![0.0, 0.0] };
        for s in 1..MAX_ORDER {
            let (a, b) = st.recurse_scaled(s);
            st.alpha_scaled.push(a);
            st.beta_scaled.push(b);
        }
        Ok(st)
    }

    /// Scaled `(α̃_{s+1}, β̃_{s+1})` from orders `1..=s`.
    fn recurse_scaled(&self, s: usize) -> (f64, f64) {
        let (a, b) = (&self.alpha_scaled, &self.beta_scaled);
        let (mut aa, mut bb, mut cc) = (0.0, 0.0, 0.0);
        for k in 0..s {
            let w = (k + 1) as f64;
            aa += w * a[k + 1] * a[s - k];
            bb += w * b[k + 1] * b[s - k];
            cc += w * (a[k + 1] * b[s - k] + b[k + 1] * a[s - k]);
        }
        let tau = self.t_star;
        let k2 = self.k * self.k;
        // ½ (ατ)^{s+1} / s!
        let lead = 0.5 * ((s as f64 + 1.0) * (self.alpha * tau).ln() - ln_factorial(s)).exp();
        let n = (s + 1) as f64;
        let an = (lead + (1.0 + k2) * aa + k2 * (cc + bb)) / n;
        let bn = ((1.0 + k2) * bb + k2 * (cc + aa)) / n;
        (an, bn)
    }

    /// Unscaled `(α_{s+1}, β_{s+1})` from the stored orders `1..=s`.
    pub fn recurse_bounds(&self, s: usize) -> (f64, f64) {
        assert!(s >= 1 && s < self.alpha_scaled.len(), "orders 1..={} are stored", self.alpha_scaled.len() - 1);
        let (a, b) = self.recurse_scaled(s);
        let f = self.t_star.powi(-(s as i32 + 1));
        (a * f, b * f)
    }

    /// `α_s` (may overflow to infinity for large `s`).
    pub fn alpha_s(&self, s: usize) -> f64 {
        self.alpha_scaled[s] * self.t_star.powi(-(s as i32))
    }

    pub fn beta_s(&self, s: usize) -> f64 {
        self.beta_scaled[s] * self.t_star.powi(-(s as i32))
    }

    pub fn ln_alpha_s(&self, s: usize) -> f64 {
        self.alpha_scaled[s].ln() - s as f64 * self.t_star.ln()
    }

    /// `h_N(ξ) = Σ_{s ≤ N} (α_s + β_s) ξ^s` for `N ≤ MAX_ORDER`.
    pub fn partial_sum(&self, n: usize, xi: f64) -> f64 {
        let q = xi / self.t_star;
        (1..=n.min(MAX_ORDER)).map(|s| (self.alpha_scaled[s] + self.beta_scaled[s]) * q.powi(s as i32)).sum()
    }

    /// `K₀ Σ_{s>S} (α_s + β_s) |t|^s`: explicit terms through [`MAX_ORDER`],
    /// then `(α_s + β_s) T*^s ≤ 2/(1+2K²)` turns the rest into a geometric tail.
    pub fn tail_bound(&self, s_trunc: usize, t: f64) -> Result<f64, MajorantError> {
        let t = t.abs();
        if t >= self.t_star {
            return Err(MajorantError::OutsideRadius { t, t_star: self.t_star });
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let q = t / self.t_star;
        let explicit: f64 = (s_trunc + 1..=MAX_ORDER).map(|s| (self.alpha_scaled[s] + self.beta_scaled[s]) * q.powi(s as i32)).sum();
        let from = (s_trunc.max(MAX_ORDER) + 1) as i32;
        let geometric = h_cap(self.k) * q.powi(from) / (1.0 - q);
        Ok(self.k0 * (explicit + geometric))
    }

    /// Per-order table `(s, α_s, β_s)` through `n`.
    pub fn table(&self, n: usize) -> Vec<(usize, f64, f64)> {
        (1..=n.min(MAX_ORDER)).map(|s| (s, self.alpha_s(s), self.beta_s(s))).collect()
    }

    /// Largest `h_N(ξ)` over `N ≤ n_max` when iterating [`h_step`] from `h₁ = αξ/2`.
    pub fn h_iteration_max(&self, xi: f64, n_max: usize) -> f64 {
        let mut h = 0.5 * self.alpha * xi;
        let mut top = h;
        for _ in 1..n_max {
            h = h_step(h, xi, self.alpha, self.k);
            top = top.max(h);
        }
        top
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn radius_examples() {
        assert!((certified_radius(1.0, 1.0).unwrap() - (-4.0f64 / 3.0).exp() / 3.0).abs() < 1e-15);
        assert!((certified_radius(1.0, 1.0).unwrap() - 0.08786).abs() < 1e-5);
        assert!((certified_radius(2.0, 0.0).unwrap() - 0.5 * (-4.0f64).exp()).abs() < 1e-16);
        assert!(certified_radius(1e12, 1.0).unwrap() < 1e-12);
        assert!(matches!(certified_radius(0.0, 1.0), Err(MajorantError::InvalidAlpha(_))));
        assert!(matches!(certified_radius(1.0, -1.0), Err(MajorantError::InvalidK(_))));
    }

    #[test]
    fn recursion_examples() {
        let st = MajorantState::new(1.0, 0.0, 1.0).unwrap();
        let (a, b) = st.recurse_bounds(1);
        assert!((a - 0.375).abs() < 1e-14 && b == 0.0);
        let st = MajorantState::new(1.0, 1.0, 1.0).unwrap();
        let (a, b) = st.recurse_bounds(1);
        assert!((a - 0.5).abs() < 1e-14 && (b - 0.125).abs() < 1e-14);
        assert!((st.alpha_s(1) - 0.5).abs() < 1e-15 && st.beta_s(1) == 0.0);
        assert!((st.alpha_s(2) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn h_step_examples() {
        assert!((h_step(0.05, 0.1, 1.0, 1.0) - (0.05 * 0.1f64.exp() + 1.5 * 0.0025)).abs() < 1e-15);
        assert!((h_step(0.05, 0.1, 1.0, 1.0) - 0.0590085459).abs() < 1e-10);
        assert_eq!(h_step(0.3, 0.0, 1.0, 2.0), 4.5 * 0.09);
        assert_eq!(h_step(0.0, 0.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn root_examples() {
        let (lo, hi) = root_interval(1.0 / 12.0, 1.5).unwrap();
        let s = 0.5f64.sqrt();
        assert!((lo - (1.0 - s) / 3.0).abs() < 1e-15 && (hi - (1.0 + s) / 3.0).abs() < 1e-15);
        let (lo, hi) = root_interval(0.25 / 2.0, 2.0).unwrap();
        assert!((lo - 0.25).abs() < 1e-15 && (hi - 0.25).abs() < 1e-15);
        let (lo, hi) = root_interval(1e-18, 2.0).unwrap();
        assert!(lo < 1e-17 && lo >= 1e-18 && (hi - 0.5).abs() < 1e-15);
        assert!(matches!(root_interval(1.0, 1.0), Err(MajorantError::NoRealRoots(_))));
    }

    #[test]
    fn h_iteration_stays_capped() {
        for (alpha, k) in [(1.0, 1.0), (4.0, 0.5), (0.3, 2.0)] {
            let st = MajorantState::new(alpha, k, 1.0).unwrap();
            for j in 1..=20 {
                let xi = 0.99 * st.t_star * j as f64 / 20.0;
                assert!(st.h_iteration_max(xi, 200) <= h_cap(k));
            }
            // the stored sequences respect the same cap
            assert!(st.partial_sum(MAX_ORDER, 0.99 * st.t_star) <= h_cap(k));
        }
    }

    #[test]
    fn tail_bound_behaviour() {
        let st = MajorantState::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(st.tail_bound(4, 0.0).unwrap(), 0.0);
        let a = st.tail_bound(4, 0.04).unwrap();
        let b = st.tail_bound(6, 0.04).unwrap();
        assert!(a > 0.0 && b < a);
        let near = st.tail_bound(1, 0.999 * st.t_star).unwrap();
        assert!(near.is_finite());
        assert!(matches!(st.tail_bound(1, st.t_star), Err(MajorantError::OutsideRadius { .. })));
    }

    #[test]
    fn large_alpha_does_not_overflow() {
        let st = MajorantState::new(1e6, 3.0, 1.0).unwrap();
        assert!(st.alpha_scaled.iter().all(|v| v.is_finite()));
        assert!(st.ln_alpha_s(60).is_finite());
    }

    proptest! {
        #[test]
        fn radius_decreasing_in_alpha(a in 0.01f64..100.0, k in 0.0f64..5.0, da in 0.001f64..1.0) {
            let t = certified_radius(a, k).unwrap();
            prop_assert!(certified_radius(a * (1.0 + da), k).unwrap() < t);
        }

        // d/dm [e^{−4/m}/m] has the sign of 4 − m, m = 1 + 2K²
        #[test]
        fn radius_in_k_peaks_at_sqrt_three_halves(a in 0.01f64..100.0, k in 0.0f64..5.0, dk in 0.001f64..1.0) {
            let kc = 1.5f64.sqrt();
            let t = certified_radius(a, k).unwrap();
            if k >= kc {
                prop_assert!(certified_radius(a, k + dk).unwrap() < t);
            } else if k + dk <= kc {
                prop_assert!(certified_radius(a, k + dk).unwrap() > t);
            }
        }

        #[test]
        fn h_step_monotone(h in 0.0f64..10.0, dh in 0.0f64..1.0, xi in 0.0f64..1.0, a in 0.0f64..10.0, k in 0.0f64..3.0) {
            prop_assert!(h_step(h + dh, xi, a, k) >= h_step(h, xi, a, k));
        }

        #[test]
        fn sequences_nonnegative(a in 0.01f64..50.0, k in 0.0f64..4.0) {
            let st = MajorantState::new(a, k, 1.0).unwrap();
            prop_assert!(st.alpha_scaled.iter().chain(&st.beta_scaled).all(|v| *v >= 0.0 && v.is_finite()));
        }
    }
}
