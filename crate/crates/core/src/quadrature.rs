//! Numerical integration: Gauss–Legendre and Gauss–Kronrod rules, adaptive
//! 1-D and nested 2-D integration, weakly singular polar quadrature, the
//! symmetric-ring principal-value oracle and closed-curve line integrals.

use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("tolerance not met: estimate {estimate} with error {error:e}")]
    ToleranceNotMet { estimate: C64, error: f64 },
    #[error("integrand grows faster than r^(gamma - eps) near the center (local exponent {exponent:.3})")]
    SingularityTooStrong { exponent: f64 },
    #[error("ring extrapolation did not settle: last two values differ by {gap:e}")]
    NonConvergent { estimate: C64, gap: f64 },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
}

/// Tolerances and limits shared by every routine in this module.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub singularity_exponent: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-8, max_subdivisions: 400, singularity_exponent: 0.0 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(QuadError::InvalidSpec("tolerances must be positive".into()));
        }
        if !(0.0..2.0).contains(&self.singularity_exponent) {
            return Err(QuadError::InvalidSpec("singularity exponent must lie in [0, 2)".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(QuadError::InvalidSpec("max_subdivisions must be positive".into()));
        }
        Ok(())
    }

    /// Tolerance band used next to the boundary, where integrands are only Hölder.
    pub fn near_boundary(&self) -> Self {
        Self { rel_tol: self.rel_tol.max(1e-6), ..*self }
    }

    pub fn tolerance_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

// ---------------------------------------------------------------------------
// Fixed rules

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> C64>(&self, mut f: F, a: f64, b: f64) -> C64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        let mut acc = C64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(c + h * x) * *w;
        }
        acc * h
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel for an `N`-vector of complex integrands.
/// Returns the Kronrod estimates and the summed |K − G| error.
pub fn gk15_vec<const N: usize, F: FnMut(f64) -> [C64; N]>(f: &mut F, a: f64, b: f64) -> ([C64; N], f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let zero = C64::new(0.0, 0.0);
    let mut k = [zero; N];
    let mut g = [zero; N];
    let fc = f(c);
    for j in 0..N {
        k[j] = fc[j] * WGK[7];
        g[j] = fc[j] * WG[3];
    }
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for j in 0..N {
            let s = f1[j] + f2[j];
            k[j] += s * WGK[i];
            if i % 2 == 1 {
                g[j] += s * WG[i / 2];
            }
        }
    }
    let mut err = 0.0;
    for j in 0..N {
        k[j] *= h;
        g[j] *= h;
        err += (k[j] - g[j]).norm();
    }
    (k, err)
}

pub fn gk15<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64) -> (C64, f64) {
    let (v, e) = gk15_vec(&mut |x| [f(x)], a, b);
    (v[0], e)
}

// ---------------------------------------------------------------------------
// Adaptive 1-D

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<const N: usize> {
    pub value: [C64; N],
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
    pub converged: bool,
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [C64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive GK15 over `[a, b]` split first at `breaks`, bisecting
/// the worst panel until the summed error drops below
/// `max(abs_tol, rel_tol·|value|)` or `max_panels` is reached.
pub fn adaptive_vec<const N: usize, F: FnMut(f64) -> [C64; N]>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Estimate<N> {
    let zero = [C64::new(0.0, 0.0); N];
    if a == b {
        return Estimate { value: zero, error: 0.0, evaluations: 0, intervals: 0, converged: true };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|x| *x > lo && *x < hi).collect();
    inner.sort_by(f64::total_cmp);
    for x in inner {
        if x - cuts.last().unwrap() > 1e-14 * (hi - lo) {
            cuts.push(x);
        }
    }
    cuts.push(hi);

    let mut heap = BinaryHeap::new();
    let mut total = zero;
    let mut err = 0.0;
    let mut evals = 0;
    for w in cuts.windows(2) {
        let (v, e) = gk15_vec(&mut f, w[0], w[1]);
        evals += 15;
        for j in 0..N {
            total[j] += v[j];
        }
        err += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e });
    }
    let mut converged = false;
    loop {
        let scale = total.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if err <= abs_tol.max(rel_tol * scale) {
            converged = true;
            break;
        }
        if heap.len() >= max_panels {
            break;
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15_vec(&mut f, worst.a, mid);
        let (v2, e2) = gk15_vec(&mut f, mid, worst.b);
        evals += 30;
        for j in 0..N {
            total[j] += v1[j] + v2[j] - worst.value[j];
        }
        err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // re-sum to shed accumulated rounding from the running updates
    let mut value = zero;
    let mut error = 0.0;
    for p in heap.iter() {
        for j in 0..N {
            value[j] += p.value[j];
        }
        error += p.error;
    }
    for v in value.iter_mut() {
        *v *= sign;
    }
    Estimate { value, error, evaluations: evals, intervals: heap.len(), converged }
}

pub fn adaptive<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Estimate<1> {
    adaptive_vec(|x| [f(x)], a, b, &[], spec.abs_tol, spec.rel_tol, spec.max_subdivisions)
}

/// Real-valued convenience wrapper.
pub fn adaptive_real<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    adaptive_vec(|x| [C64::new(f(x), 0.0)], a, b, &[], abs_tol, rel_tol, 2000).value[0].re
}

// ---------------------------------------------------------------------------
// 2-D

/// Integration regions for [`adaptive_2d`].
pub enum Region2d<'a> {
    Rect { x: (f64, f64), y: (f64, f64) },
    Disk { center: C64, radius: f64 },
    Annulus { center: C64, inner: f64, outer: f64 },
    /// Star-shaped region `{center + r e^{iφ} : r < radius(φ)}`.
    Star { center: C64, radius: &'a (dyn Fn(f64) -> f64 + Sync) },
}

/// Nested adaptive integration of `f` against area measure.
pub fn adaptive_2d<F: Fn(C64) -> C64>(f: F, region: &Region2d, spec: &QuadratureSpec) -> Result<Estimate<1>, QuadError> {
    spec.validate()?;
    let inner_tol = 0.1 * spec.abs_tol;
    let mut ok = true;
    let mut evals = 0;
    let est = match region {
        Region2d::Rect { x, y } => {
            let ylen = (y.1 - y.0).abs().max(1e-300);
            adaptive_vec(
                |xv| {
                    let e = adaptive_vec(|yv| [f(C64::new(xv, yv))], y.0, y.1, &[], inner_tol / ylen, 0.1 * spec.rel_tol, spec.max_subdivisions);
                    ok &= e.converged;
                    evals += e.evaluations;
                    e.value
                },
                x.0,
                x.1,
                &[],
                spec.abs_tol,
                spec.rel_tol,
                spec.max_subdivisions,
            )
        }
        Region2d::Disk { center, radius } => polar_region(&f, *center, 0.0, &|_| *radius, spec, &mut ok, &mut evals),
        Region2d::Annulus { center, inner, outer } => polar_region(&f, *center, *inner, &|_| *outer, spec, &mut ok, &mut evals),
        Region2d::Star { center, radius } => polar_region(&f, *center, 0.0, radius, spec, &mut ok, &mut evals),
    };
    let est = Estimate { evaluations: est.evaluations + evals, converged: est.converged && ok, ..est };
    if est.converged {
        Ok(est)
    } else {
        Err(QuadError::ToleranceNotMet { estimate: est.value[0], error: est.error })
    }
}

fn polar_region<F: Fn(C64) -> C64>(
    f: &F,
    center: C64,
    r_in: f64,
    r_out: &dyn Fn(f64) -> f64,
    spec: &QuadratureSpec,
    ok: &mut bool,
    evals: &mut usize,
) -> Estimate<1> {
    adaptive_vec(
        |phi| {
            let e = C64::from_polar(1.0, phi);
            let ro = r_out(phi);
            let est = adaptive_vec(|r| [f(center + e * r) * r], r_in, ro, &[], 0.1 * spec.abs_tol / TAU, 0.1 * spec.rel_tol, spec.max_subdivisions);
            *ok &= est.converged;
            *evals += est.evaluations;
            est.value
        },
        0.0,
        TAU,
        &[0.5 * PI, PI, 1.5 * PI],
        spec.abs_tol,
        spec.rel_tol,
        spec.max_subdivisions,
    )
}

// ---------------------------------------------------------------------------
// Weakly singular polar quadrature

/// Kernel choices for [`polar_singular`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularKernel {
    /// `1/(ζ̄ − z̄)²`
    Beurling,
    /// `1/|ζ − z|²`
    Modulus,
}

/// `∫_{B_radius(z)} (f(ζ) − f(z)) K(ζ − z) dm(ζ)` for a γ-Hölder `f`.
///
/// The radial variable is graded as `r = radius·u^{1/γ}`, which turns the
/// `r^{γ−1}` weight into a bounded integrand.
pub fn polar_singular<F: Fn(C64) -> C64>(
    f: F,
    z: C64,
    radius: f64,
    gamma: f64,
    kernel: SingularKernel,
    spec: &QuadratureSpec,
) -> Result<C64, QuadError> {
    spec.validate()?;
    let fz = f(z);
    check_local_growth(&f, fz, z, radius, gamma)?;
    let inv_g = 1.0 / gamma;
    let est = adaptive_vec(
        |phi| {
            let e = C64::from_polar(1.0, phi);
            let k = match kernel {
                SingularKernel::Beurling => C64::from_polar(1.0, 2.0 * phi),
                SingularKernel::Modulus => C64::new(1.0, 0.0),
            };
            let radial = adaptive_vec(
                |u| {
                    let r = radius * u.powf(inv_g);
                    [(f(z + e * r) - fz) * (inv_g / u)]
                },
                0.0,
                1.0,
                &[],
                0.1 * spec.abs_tol,
                0.1 * spec.rel_tol,
                spec.max_subdivisions,
            );
            [radial.value[0] * k]
        },
        0.0,
        TAU,
        &[0.5 * PI, PI, 1.5 * PI],
        spec.abs_tol,
        spec.rel_tol,
        spec.max_subdivisions,
    );
    if est.converged {
        Ok(est.value[0])
    } else {
        Err(QuadError::ToleranceNotMet { estimate: est.value[0], error: est.error })
    }
}

fn check_local_growth<F: Fn(C64) -> C64>(f: &F, fz: C64, z: C64, radius: f64, gamma: f64) -> Result<(), QuadError> {
    let sample = |r: f64| -> f64 {
        (0..8)
            .map(|j| (f(z + C64::from_polar(r, 0.3 + j as f64 * TAU / 8.0)) - fz).norm())
            .fold(0.0, f64::max)
    };
    let r_hi = radius * 2f64.powi(-6);
    let r_lo = radius * 2f64.powi(-16);
    let (m_hi, m_lo) = (sample(r_hi), sample(r_lo));
    if m_lo <= 1e-300 || m_hi <= 1e-300 {
        return Ok(());
    }
    let exponent = (m_hi / m_lo).ln() / (r_hi / r_lo).ln();
    if exponent < gamma - 0.15 {
        return Err(QuadError::SingularityTooStrong { exponent });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Principal-value ring oracle

/// Density interface for the ring oracle: values plus the locations of
/// discontinuities seen from a center point.
pub trait RingDensity {
    fn value(&self, zeta: C64) -> C64;
    /// Angles (absolute, radians) where the density may jump on `|ζ − z| = r`.
    fn circle_breaks(&self, z: C64, r: f64) -> Vec<f64>;
    /// Radii where the jump structure on circles around `z` changes.
    fn radial_breaks(&self, z: C64) -> Vec<f64>;
    /// Radius around `z` outside of which the density vanishes, if any.
    fn support_radius(&self, z: C64) -> Option<f64>;
}

/// Ring oracle output: extrapolated value plus the raw ring sequence.
#[derive(Debug, Clone)]
pub struct RingEstimate {
    pub value: C64,
    pub gap: f64,
    pub raw: Vec<C64>,
}

/// `B̄_ε[f](z) = −(1/π) ∫_{|ζ−z|>ε} f(ζ)/(z̄−ζ̄)² dm`, Richardson-extrapolated
/// over `eps` (assumed halving). `R` splits the near region from the mapped
/// far tail. `leading_order` is the exponent of the first ring-residual term.
pub fn pv_ring_oracle<D: RingDensity + ?Sized>(
    f: &D,
    z: C64,
    eps: &[f64],
    r_split: f64,
    leading_order: f64,
    spec: &QuadratureSpec,
) -> Result<RingEstimate, QuadError> {
    spec.validate()?;
    assert!(eps.len() >= 2, "need at least two ring radii");
    let ang_tol = 0.01 * spec.abs_tol;
    let ring = |r: f64| -> C64 {
        let mut breaks = f.circle_breaks(z, r);
        for b in breaks.iter_mut() {
            *b = b.rem_euclid(TAU);
        }
        let est = adaptive_vec(
            |phi| {
                let e = C64::from_polar(1.0, phi);
                [f.value(z + e * r) * (e * e)]
            },
            0.0,
            TAU,
            &breaks,
            ang_tol,
            0.01 * spec.rel_tol,
            4 * spec.max_subdivisions,
        );
        est.value[0]
    };
    let rad_breaks = f.radial_breaks(z);
    let radial = |lo: f64, hi: f64| -> C64 {
        if hi <= lo {
            return C64::new(0.0, 0.0);
        }
        let logs: Vec<f64> = rad_breaks.iter().filter(|r| **r > lo && **r < hi).map(|r| r.ln()).collect();
        adaptive_vec(|s| [ring(s.exp())], lo.ln(), hi.ln(), &logs, 0.1 * spec.abs_tol, 0.1 * spec.rel_tol, spec.max_subdivisions).value[0]
    };
    let support = f.support_radius(z);
    let r_split = r_split.max(eps[0]);
    let mut outer = radial(eps[0], support.map_or(r_split, |s| s.min(r_split).max(eps[0])));
    let needs_tail = support.map_or(true, |s| s > r_split);
    if needs_tail {
        // r = R/t on t ∈ (0, 1]; dr/r = −dt/t
        let t_breaks: Vec<f64> = rad_breaks.iter().filter(|r| **r > r_split).map(|r| r_split / r).collect();
        let t_lo = support.map_or(0.0, |s| r_split / s);
        let tail = adaptive_vec(
            |t| if t <= 0.0 { [C64::new(0.0, 0.0)] } else { [ring(r_split / t) / t] },
            t_lo,
            1.0,
            &t_breaks,
            0.1 * spec.abs_tol,
            0.1 * spec.rel_tol,
            spec.max_subdivisions,
        );
        outer += tail.value[0];
    }
    let mut raw = Vec::with_capacity(eps.len());
    let mut acc = outer;
    raw.push(acc * (-1.0 / PI));
    for w in eps.windows(2) {
        acc += radial(w[1], w[0]);
        raw.push(acc * (-1.0 / PI));
    }
    let ratio = eps[0] / eps[1];
    let (value, gap) = richardson(&raw, ratio, leading_order);
    if gap > 1e3 * spec.tolerance_for(value.norm()) {
        return Err(QuadError::NonConvergent { estimate: value, gap });
    }
    Ok(RingEstimate { value, gap, raw })
}

/// Richardson table for values sampled at geometrically shrinking `h`
/// (`h_k = h_0 / ratio^k`) with error terms `h^{p}, h^{2p}, …`.
/// Returns the most extrapolated entry and its gap to the previous one.
pub fn richardson(values: &[C64], ratio: f64, p: f64) -> (C64, f64) {
    let n = values.len();
    if n == 1 {
        return (values[0], f64::INFINITY);
    }
    let mut table = values.to_vec();
    let mut last_gap = f64::INFINITY;
    let mut best = values[n - 1];
    for level in 1..n {
        let fac = ratio.powf(p * level as f64);
        let next: Vec<C64> = (0..table.len() - 1).map(|i| (table[i + 1] * fac - table[i]) / (fac - 1.0)).collect();
        let cand = *next.last().unwrap();
        last_gap = (cand - best).norm();
        best = cand;
        table = next;
    }
    (best, last_gap)
}

// ---------------------------------------------------------------------------
// Line integrals

/// A closed curve parametrized over `[0, 2π)`.
pub trait ClosedCurve {
    fn point(&self, t: f64) -> C64;
    fn derivative(&self, t: f64) -> C64;
}

#[derive(Debug, Clone, Copy)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
}

impl ClosedCurve for Circle {
    fn point(&self, t: f64) -> C64 {
        self.center + C64::from_polar(self.radius, t)
    }
    fn derivative(&self, t: f64) -> C64 {
        C64::new(0.0, 1.0) * C64::from_polar(self.radius, t)
    }
}

/// `∮ f(ζ) dζ`, adaptive GK over eight initial panels.
pub fn line_integral<C: ClosedCurve + ?Sized, F: Fn(C64) -> C64>(curve: &C, f: F, spec: &QuadratureSpec) -> C64 {
    let breaks: Vec<f64> = (1..8).map(|k| k as f64 * TAU / 8.0).collect();
    adaptive_vec(
        |t| [f(curve.point(t)) * curve.derivative(t)],
        0.0,
        TAU,
        &breaks,
        spec.abs_tol,
        spec.rel_tol,
        spec.max_subdivisions,
    )
    .value[0]
}

/// Raw `∫_{B_{R₀/2}(0) ∩ {Im ζ ≥ α}} dm/ζ̄²` in closed form.
pub fn half_plane_cap(alpha: f64, r0: f64) -> f64 {
    let t0 = (2.0 * alpha / r0).clamp(-1.0, 1.0);
    t0.asin() + t0 * (1.0 - t0 * t0).sqrt() - 0.5 * PI
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = GaussLegendre::new(10);
        let v = gl.integrate(|x| c(x.powi(18), 0.0), -1.0, 1.0);
        assert!((v.re - 2.0 / 19.0).abs() < 1e-14);
        let w: f64 = gl.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gk15_exact_on_degree_22() {
        let (v, _) = gk15(|x| c(x.powi(22), 0.0), 0.0, 1.0);
        assert!((v.re - 1.0 / 23.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let e = adaptive(|x| c(1.0 / x.sqrt(), 0.0), 0.0, 1.0, &QuadratureSpec::default());
        assert!(e.converged);
        assert!((e.value[0].re - 2.0).abs() < 2e-8);
    }

    #[test]
    fn disk_area_and_moment() {
        let spec = QuadratureSpec::default();
        let area = adaptive_2d(|_| c(1.0, 0.0), &Region2d::Disk { center: c(0.0, 0.0), radius: 1.0 }, &spec).unwrap();
        assert!((area.value[0].re - PI).abs() < 1e-9);
        let m = adaptive_2d(|z| z, &Region2d::Disk { center: c(0.0, 0.0), radius: 1.0 }, &spec).unwrap();
        assert!(m.value[0].norm() < 1e-9);
    }

    #[test]
    fn annulus_inverse_fourth_power() {
        let spec = QuadratureSpec::default();
        let v = adaptive_2d(|z| c(z.norm().powi(-4), 0.0), &Region2d::Annulus { center: c(0.0, 0.0), inner: 1.0, outer: 2.0 }, &spec).unwrap();
        assert!((v.value[0].re - 0.75 * PI).abs() < 1e-9);
    }

    #[test]
    fn rect_region() {
        let spec = QuadratureSpec::default();
        let v = adaptive_2d(|z| c(z.re * z.im, 0.0), &Region2d::Rect { x: (0.0, 1.0), y: (0.0, 2.0) }, &spec).unwrap();
        assert!((v.value[0].re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn polar_singular_examples() {
        let spec = QuadratureSpec::default();
        let z = c(0.2, -0.1);
        let v = polar_singular(|w| c((w - z).norm().sqrt(), 0.0), z, 1.0, 0.5, SingularKernel::Modulus, &spec).unwrap();
        assert!((v.re - 4.0 * PI).abs() < 1e-8, "{v}");
        let v = polar_singular(|_| c(3.0, 1.0), z, 1.0, 0.5, SingularKernel::Beurling, &spec).unwrap();
        assert!(v.norm() < 1e-12);
        let v = polar_singular(|w| w - z, z, 1.0, 0.5, SingularKernel::Beurling, &spec).unwrap();
        assert!(v.norm() < 1e-9);
    }

    #[test]
    fn polar_singular_rejects_strong_singularity() {
        let spec = QuadratureSpec::default();
        let z = c(0.0, 0.0);
        let r = polar_singular(|w| c(w.norm().powf(0.1), 0.0), z, 1.0, 0.5, SingularKernel::Modulus, &spec);
        assert!(matches!(r, Err(QuadError::SingularityTooStrong { .. })));
    }

    #[test]
    fn residue_identity_on_grid() {
        for i in 0..5 {
            for j in 0..5 {
                let a = c(0.1 + 0.2 * i as f64, 0.05 * j as f64);
                let r = a.norm() * (1.2 + 0.3 * j as f64);
                let num = adaptive_real(
                    |t| {
                        let w = C64::from_polar(r, -t);
                        1.0 / ((w + a.conj()).norm_sqr() * (w - a.conj()).norm_sqr())
                    },
                    0.0,
                    TAU,
                    1e-16,
                    1e-14,
                );
                let exact = TAU / (r.powi(4) - a.norm().powi(4));
                assert!(((num - exact) / exact).abs() < 1e-10, "{i} {j}: {num} vs {exact}");
            }
        }
    }

    #[test]
    fn line_integral_residue_and_cancellation() {
        let spec = QuadratureSpec::default();
        let unit = Circle { center: c(0.0, 0.0), radius: 1.0 };
        let v = line_integral(&unit, |w| 1.0 / w, &spec);
        assert!((v - c(0.0, TAU)).norm() < 1e-12);
        let z = c(0.3, 0.2);
        let small = Circle { center: z, radius: 1e-3 };
        assert!(line_integral(&small, |w| 1.0 / (w - z).conj(), &spec).norm() < 1e-12);
        let w0 = c(-0.1, 0.4);
        let big = Circle { center: w0, radius: 0.5 };
        for k in 0..6 {
            let zz = w0 + C64::from_polar(0.45 * k as f64 / 5.0, 1.3 * k as f64);
            assert!(line_integral(&big, |w| 1.0 / (w - zz).conj(), &spec).norm() < 1e-9);
        }
    }

    #[test]
    fn half_plane_cap_matches_polar_quadrature() {
        let r0: f64 = 1.0;
        let rr = 0.5 * r0;
        for alpha in [0.05, 0.1, 0.25, 0.4] {
            // ∫ cos 2φ · ln(R sin φ/α) dφ over the chord window
            let phi0 = (alpha / rr).asin();
            let num = adaptive_real(|p| (2.0 * p).cos() * (rr * p.sin() / alpha).ln(), phi0, PI - phi0, 1e-14, 1e-13);
            let cf = half_plane_cap(alpha, r0);
            assert!((num - cf).abs() < 1e-10, "{alpha}: {num} vs {cf}");
            assert!(cf.abs() <= 0.5 * PI);
        }
        assert!(half_plane_cap(0.5, 1.0).abs() < 1e-15);
    }

    #[test]
    fn richardson_removes_linear_and_quadratic_terms() {
        let vals: Vec<C64> = (0..5).map(|k| {
            let h = 0.5f64.powi(k);
            c(1.0 + 0.3 * h - 0.2 * h * h + 0.05 * h.powi(3), 0.0)
        }).collect();
        let (v, _) = richardson(&vals, 2.0, 1.0);
        assert!((v.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec { singularity_exponent: 2.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = QuadratureSpec { abs_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
