//! Conjugate Cauchy and Beurling transforms of piecewise densities.
//!
//! With the kernel fixed by `∂_z C̄ = id`, both transforms are evaluated in
//! polar coordinates around the target `z`:
//!
//! ```text
//! C̄[f](z) = (1/π) ∫ f(ζ)/(z̄ − ζ̄) dm   = −(1/π) ∫dφ e^{iφ}  ∫ f(z + r e^{iφ}) dr
//! B̄[f](z) = −(1/π) pv∫ f/(z̄ − ζ̄)² dm = −(1/π) ∫dφ e^{2iφ} ∫ f(z + r e^{iφ}) dr/r
//! ```
//!
//! Every ray is cut at its boundary crossings and at `r = δ(z)`. Beyond `δ`
//! the B̄ integral is absolutely convergent (`Q`). Inside the ball the side
//! value at `z` is subtracted (`L`). On ∂Ω the subtracted constants leave a
//! purely geometric term, the jump `f_int(z) − f_ext(z)` times `Θ_Ω(z)`.
//!
//! Radial-polynomial densities on disks also have exact transforms
//! ([`RadialLaurent`]), used by the analytic backend.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{triple_norm, FieldError, NormOptions, Part, PiecewiseField};
use crate::geometry::{GeometryError, PatchDomain, Shape, Side};
use crate::quadrature::{adaptive_vec, richardson, QuadError, QuadratureSpec};
use crate::{par_map, Parallelism, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("analytic backend cannot represent this input: {0}")]
    Unsupported(String),
    #[error("extrapolation did not settle (gap {gap:e})")]
    NonConvergent { gap: f64 },
}

const ZERO: C64 = C64::new(0.0, 0.0);

// ---------------------------------------------------------------------------
// Quadrature engine

/// Knobs of the polar engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineOptions {
    pub spec: QuadratureSpec,
    /// Radius of the L-ball at boundary points; `None` means `R₀/2`.
    pub boundary_radius: Option<f64>,
    /// Points within `band·scale` of ∂Ω are snapped onto it.
    pub band: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self { spec: QuadratureSpec::default(), boundary_radius: None, band: 1e-10 }
    }
}

/// Pieces of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub side: Side,
    /// Target actually used (snapped onto ∂Ω for boundary points).
    pub point: C64,
    pub delta: f64,
    pub cauchy: C64,
    pub q: C64,
    pub l: C64,
    /// `Θ_Ω(z)`, zero off ∂Ω.
    pub theta: C64,
    /// `f_int(z) − f_ext(z)` at boundary points, zero elsewhere.
    pub jump: C64,
}

impl Decomposition {
    pub fn beurling(&self) -> C64 {
        self.q + self.l + self.jump * self.theta
    }
}

#[derive(Clone, Copy)]
enum Kind<'a> {
    Zero,
    Const(C64),
    General(&'a Part),
}

fn kind(p: &Part) -> Kind<'_> {
    match p {
        Part::Zero => Kind::Zero,
        Part::Constant(c) if *c == ZERO => Kind::Zero,
        Part::Constant(c) => Kind::Const(*c),
        other => Kind::General(other),
    }
}

struct Engine<'a> {
    domain: &'a PatchDomain,
    kinds: [Kind<'a>; 2],
    z: C64,
    delta: f64,
    /// Value subtracted inside the ball, per side (interior, exterior).
    sub: [C64; 2],
    inner_abs: f64,
    inner_rel: f64,
    max_panels: usize,
    far_len: f64,
}

fn side_index(s: Side) -> usize {
    match s {
        Side::Interior => 0,
        _ => 1,
    }
}

impl<'a> Engine<'a> {
    /// `[∫ f dr, ∫ f/r dr]` (or `∫ (f − c)/r dr` when `sub` is given) over
    /// `[a, b]`, `b` possibly infinite.
    fn radial(&self, part: &Part, e: C64, a: f64, b: f64, sub: Option<C64>) -> Result<[C64; 2], TransformError> {
        let z = self.z;
        let est = if b.is_finite() {
            adaptive_vec(
                |r| {
                    let v = part.eval(z + e * r);
                    match sub {
                        Some(c) => [v, (v - c) / r],
                        None => [v, v / r],
                    }
                },
                a,
                b,
                &[],
                self.inner_abs,
                self.inner_rel,
                self.max_panels,
            )
        } else {
            // r = a + L s/(1 − s)
            let len = self.far_len.max(a);
            adaptive_vec(
                |s| {
                    if s >= 1.0 {
                        return [ZERO; 2];
                    }
                    let om = 1.0 - s;
                    let r = a + len * s / om;
                    let jac = len / (om * om);
                    let v = part.eval(z + e * r);
                    if !(v.re.is_finite() && v.im.is_finite()) || v == ZERO {
                        return [ZERO; 2];
                    }
                    [v * jac, v * (jac / r)]
                },
                0.0,
                1.0,
                &[],
                self.inner_abs,
                self.inner_rel,
                self.max_panels,
            )
        };
        if !est.converged {
            return Err(QuadError::ToleranceNotMet { estimate: est.value[1], error: est.error }.into());
        }
        Ok(est.value)
    }

    /// Adds the contributions of a piece `[a, b]` on `side` to `acc = [C̄, Q, L]`
    /// (radial parts, before the angular weights).
    fn piece(&self, side: Side, e: C64, a: f64, b: f64, acc: &mut [C64; 3]) -> Result<(), TransformError> {
        let k = self.kinds[side_index(side)];
        let s = self.sub[side_index(side)];
        let d = self.delta;
        if a < d {
            let hi = b.min(d);
            match k {
                Kind::Zero => {
                    if a > 0.0 {
                        acc[2] -= s * (hi / a).ln();
                    }
                }
                Kind::Const(c) => {
                    acc[0] += c * (hi - a);
                    if a > 0.0 {
                        acc[2] += (c - s) * (hi / a).ln();
                    }
                }
                Kind::General(p) => {
                    let c0 = if a > 0.0 { p.eval(self.z + e * a) } else { s };
                    let v = self.radial(p, e, a, hi, Some(c0))?;
                    acc[0] += v[0];
                    acc[2] += v[1];
                    if a > 0.0 {
                        acc[2] += (c0 - s) * (hi / a).ln();
                    }
                }
            }
        }
        if b > d {
            let lo = a.max(d);
            match k {
                Kind::Zero => {}
                Kind::Const(c) => {
                    if !b.is_finite() {
                        return Err(FieldError::DivergentTail { exponent: 0.0 }.into());
                    }
                    acc[0] += c * (b - lo);
                    acc[1] += c * (b / lo).ln();
                }
                Kind::General(p) => {
                    let v = self.radial(p, e, lo, b, None)?;
                    acc[0] += v[0];
                    acc[1] += v[1];
                }
            }
        }
        Ok(())
    }

    fn ray(&self, phi: f64, cross: &mut Vec<f64>) -> Result<[C64; 3], TransformError> {
        let e = C64::from_polar(1.0, phi);
        self.domain.ray_crossings(self.z, e, cross);
        let mut acc = [ZERO; 3];
        let mut a = 0.0;
        let m = cross.len();
        for i in 0..=m {
            let (b, side) = if i < m {
                let b = cross[i];
                let mid = self.z + e * (0.5 * (a + b));
                (b, if self.domain.is_inside(mid) { Side::Interior } else { Side::Exterior })
            } else {
                (f64::INFINITY, Side::Exterior)
            };
            self.piece(side, e, a, b, &mut acc)?;
            a = b;
        }
        Ok(acc)
    }
}

/// `Θ_Ω(τ) = −(1/π) ∫_0^radius J(r) dr/r` with `J(r) = ∫_{arcs in Ω} e^{2iφ} dφ`.
pub fn theta_geometric(domain: &PatchDomain, tau: C64, radius: f64, spec: &QuadratureSpec) -> Result<C64, TransformError> {
    let breaks: Vec<f64> = domain.critical_distances(tau).into_iter().filter(|r| *r > 0.0 && *r < radius).collect();
    let est = adaptive_vec(
        |r| [domain.inside_arc_moment(tau, r) / r],
        0.0,
        radius,
        &breaks,
        0.01 * spec.abs_tol,
        0.01 * spec.rel_tol,
        spec.max_subdivisions,
    );
    if !est.converged {
        return Err(QuadError::ToleranceNotMet { estimate: est.value[0], error: est.error }.into());
    }
    Ok(est.value[0] * (-1.0 / PI))
}

/// Full Q/L/Θ decomposition and the Cauchy transform at `z`.
pub fn decompose(f: &PiecewiseField, z: C64, opt: &EngineOptions) -> Result<Decomposition, TransformError> {
    opt.spec.validate()?;
    let domain: &PatchDomain = f.domain();
    let proj = domain.nearest_boundary(z);
    let scale = domain.length_scale();
    let on_boundary = proj.distance <= opt.band * scale;
    let (point, side, delta) = if on_boundary {
        (proj.tau, Side::Boundary, opt.boundary_radius.unwrap_or(0.5 * domain.r0()))
    } else {
        let side = if domain.is_inside(z) { Side::Interior } else { Side::Exterior };
        let delta = match opt.boundary_radius {
            Some(r) => proj.distance.max(r),
            None => domain.delta_from_distance(proj.distance),
        };
        (z, side, delta)
    };
    let sub = match side {
        Side::Boundary => [f.interior.eval(point), f.exterior.eval(point)],
        w => {
            let v = f.side_value(w, point);
            [v, v]
        }
    };
    let spec = &opt.spec;
    let engine = Engine {
        domain,
        kinds: [kind(&f.interior), kind(&f.exterior)],
        z: point,
        delta,
        sub,
        inner_abs: 0.02 * spec.abs_tol,
        inner_rel: 0.1 * spec.rel_tol,
        max_panels: spec.max_subdivisions,
        far_len: domain.far_scale(),
    };

    let mut breaks: Vec<f64> = Vec::new();
    if proj.distance > 0.0 {
        let phi_n = (proj.tau - point).arg();
        breaks.push(phi_n);
        breaks.push(phi_n + PI);
    }
    if on_boundary {
        let t = domain.tangent(proj.theta).arg();
        breaks.push(t);
        breaks.push(t + PI);
    }
    breaks.extend(domain.tangent_directions(point));
    breaks.extend(domain.circle_crossings(point, delta));
    for b in breaks.iter_mut() {
        *b = b.rem_euclid(TAU);
    }

    let mut err: Option<TransformError> = None;
    let mut cross = Vec::with_capacity(8);
    let est = adaptive_vec(
        |phi| {
            if err.is_some() {
                return [ZERO; 3];
            }
            match engine.ray(phi, &mut cross) {
                Ok(v) => {
                    let e1 = C64::from_polar(1.0, phi);
                    let e2 = e1 * e1;
                    [v[0] * e1, v[1] * e2, v[2] * e2]
                }
                Err(e) => {
                    err = Some(e);
                    [ZERO; 3]
                }
            }
        },
        0.0,
        TAU,
        &breaks,
        spec.abs_tol,
        spec.rel_tol,
        spec.max_subdivisions,
    );
    if let Some(e) = err {
        return Err(e);
    }
    if !est.converged {
        return Err(QuadError::ToleranceNotMet { estimate: est.value[1] + est.value[2], error: est.error }.into());
    }
    let k = -1.0 / PI;
    let (theta, jump) = if on_boundary {
        let j = sub[0] - sub[1];
        let th = if j == ZERO { ZERO } else { theta_geometric(domain, point, delta, spec)? };
        (th, j)
    } else {
        (ZERO, ZERO)
    };
    Ok(Decomposition {
        side,
        point,
        delta,
        cauchy: est.value[0] * k,
        q: est.value[1] * k,
        l: est.value[2] * k,
        theta,
        jump,
    })
}

// ---------------------------------------------------------------------------
// Exact transforms of radial densities on disks

/// Radial density about a disk: `Σ a_k ρ^k` inside and `Σ b_k ρ^{−k}`
/// outside, with `ρ = |z − c|²`. The same container holds the transform
/// profiles `h` (`C̄ = w·h`) and `g` (`B̄ = (w/w̄)·g`), `w = z − c`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialLaurent {
    pub center: C64,
    pub radius: f64,
    /// `a_k`, coefficient of `ρ^k`.
    pub interior: Vec<C64>,
    /// `b_k`, coefficient of `ρ^{−k}`.
    pub exterior: Vec<C64>,
}

fn poly(c: &[C64], x: f64) -> C64 {
    c.iter().rev().fold(ZERO, |acc, a| acc * x + a)
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n).map(|i| a.get(i).copied().unwrap_or(ZERO) + b.get(i).copied().unwrap_or(ZERO)).collect()
}

fn trim(mut v: Vec<C64>) -> Vec<C64> {
    while v.last().is_some_and(|c| *c == ZERO) {
        v.pop();
    }
    v
}

impl RadialLaurent {
    pub fn zero(center: C64, radius: f64) -> Self {
        Self { center, radius, interior: Vec::new(), exterior: Vec::new() }
    }

    pub fn indicator(center: C64, radius: f64, value: C64) -> Self {
        Self { center, radius, interior: vec![value], exterior: Vec::new() }
    }

    /// Recognizes piecewise-constant fields with zero exterior on disk domains.
    pub fn from_field(f: &PiecewiseField) -> Result<Self, TransformError> {
        let Shape::Disk { center, radius } = f.domain().shape() else {
            return Err(TransformError::Unsupported("domain is not a disk".into()));
        };
        match (&f.interior, &f.exterior) {
            (Part::Zero, Part::Zero) => Ok(Self::zero(center, radius)),
            (Part::Constant(c), Part::Zero) => Ok(Self::indicator(center, radius, *c)),
            _ => Err(TransformError::Unsupported("only constant interior parts with zero exterior".into())),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.interior.iter().chain(&self.exterior).all(|c| *c == ZERO)
    }

    pub fn eval_interior(&self, rho: f64) -> C64 {
        poly(&self.interior, rho)
    }

    pub fn eval_exterior(&self, rho: f64) -> C64 {
        poly(&self.exterior, 1.0 / rho)
    }

    /// Side value; the boundary gets the average of the two limits.
    pub fn eval_side(&self, side: Side, z: C64) -> C64 {
        let rho = (z - self.center).norm_sqr();
        match side {
            Side::Interior => self.eval_interior(rho),
            Side::Exterior => self.eval_exterior(rho),
            Side::Boundary => {
                let r2 = self.radius * self.radius;
                0.5 * (self.eval_interior(r2) + self.eval_exterior(r2))
            }
        }
    }

    pub fn side_of(&self, z: C64) -> Side {
        let m = (z - self.center).norm();
        let band = 1e-12 * self.radius;
        if (m - self.radius).abs() <= band {
            Side::Boundary
        } else if m < self.radius {
            Side::Interior
        } else {
            Side::Exterior
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.eval_side(self.side_of(z), z)
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            interior: self.interior.iter().map(|c| c * s).collect(),
            exterior: self.exterior.iter().map(|c| c * s).collect(),
            ..self.clone()
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            interior: self.interior.iter().map(|c| c.conj()).collect(),
            exterior: self.exterior.iter().map(|c| c.conj()).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { interior: trim(poly_add(&self.interior, &o.interior)), exterior: trim(poly_add(&self.exterior, &o.exterior)), ..self.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self { interior: trim(poly_mul(&self.interior, &o.interior)), exterior: trim(poly_mul(&self.exterior, &o.exterior)), ..self.clone() }
    }

    fn check_exterior(&self) -> Result<(), TransformError> {
        for k in 0..2 {
            if self.exterior.get(k).is_some_and(|c| *c != ZERO) {
                return Err(TransformError::Unsupported(format!("exterior term ρ^-{k} has no finite transform in this class")));
            }
        }
        Ok(())
    }

    /// Profile `h` with `C̄[f](z) = w·h(|w|²)`, from `(ρh)' = f` and regularity at 0.
    pub fn cauchy_profile(&self) -> Result<Self, TransformError> {
        self.check_exterior()?;
        let r2 = self.radius * self.radius;
        let interior: Vec<C64> = self.interior.iter().enumerate().map(|(k, a)| a / (k as f64 + 1.0)).collect();
        let mass: C64 = self.interior.iter().enumerate().map(|(k, a)| a * r2.powi(k as i32 + 1) / (k as f64 + 1.0)).sum();
        // ρh = mass + Σ b_k (ρ^{1−k} − R^{2−2k})/(1 − k)
        let mut exterior = vec![ZERO; self.exterior.len().max(2)];
        let mut c1 = mass;
        for (k, b) in self.exterior.iter().enumerate().skip(2) {
            let den = 1.0 - k as f64;
            exterior[k] += b / den;
            c1 -= b * r2.powi(1 - k as i32) / den;
        }
        exterior[1] = c1;
        Ok(Self { interior: trim(interior), exterior: trim(exterior), ..self.clone() })
    }

    /// Profile `g = ρ h'` with `B̄[f](z) = (w/w̄)·g(|w|²)`.
    pub fn beurling_profile(&self) -> Result<Self, TransformError> {
        let h = self.cauchy_profile()?;
        Ok(Self {
            interior: h.interior.iter().enumerate().map(|(k, c)| c * k as f64).collect(),
            exterior: h.exterior.iter().enumerate().map(|(k, c)| c * -(k as f64)).collect(),
            ..h
        })
    }

    /// `C̄[f](z)` (continuous across the circle).
    pub fn cauchy(&self, z: C64) -> Result<C64, TransformError> {
        let h = self.cauchy_profile()?;
        Ok(h.apply_cauchy(z))
    }

    /// `B̄[f](z)`, with the average of the one-sided limits on the circle.
    pub fn beurling(&self, z: C64) -> Result<C64, TransformError> {
        let g = self.beurling_profile()?;
        Ok(g.apply_beurling(z))
    }

    /// Treats `self` as a Cauchy profile `h` and returns `w·h`.
    pub fn apply_cauchy(&self, z: C64) -> C64 {
        let w = z - self.center;
        let side = match self.side_of(z) {
            Side::Boundary => Side::Interior,
            s => s,
        };
        w * self.eval_side(side, z)
    }

    /// Treats `self` as a Beurling profile `g` and returns `(w/w̄)·g`.
    pub fn apply_beurling(&self, z: C64) -> C64 {
        let w = z - self.center;
        if w == ZERO {
            return ZERO;
        }
        (w / w.conj()) * self.eval(z)
    }

    /// The density as a field with closure parts on `domain`.
    pub fn to_field(&self, domain: Arc<PatchDomain>) -> PiecewiseField {
        let (a, b) = (self.clone(), self.clone());
        let interior = if self.interior.is_empty() { Part::Zero } else { Part::func(move |z| a.eval_side(Side::Interior, z)) };
        let exterior = if self.exterior.is_empty() { Part::Zero } else { Part::func(move |z| b.eval_side(Side::Exterior, z)) };
        PiecewiseField::new(domain, interior, exterior)
    }
}

// ---------------------------------------------------------------------------
// Backend

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BackendMode {
    #[default]
    Quadrature,
    AnalyticDisk,
}

/// Restricted operators `Φ = χ_Ω B̄`, `Ψ = χ_{ℂ∖Ω̄} B̄`, `Γ = χ_{∂Ω} B̄`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Restriction {
    Phi,
    Psi,
    Gamma,
}

/// Evaluation strategy for C̄ and B̄ on a fixed domain.
#[derive(Debug, Clone)]
pub struct TransformBackend {
    pub mode: BackendMode,
    pub domain: Arc<PatchDomain>,
    pub options: EngineOptions,
    pub parallelism: Parallelism,
}

impl TransformBackend {
    pub fn quadrature(domain: Arc<PatchDomain>, spec: QuadratureSpec) -> Self {
        Self {
            mode: BackendMode::Quadrature,
            domain,
            options: EngineOptions { spec, ..Default::default() },
            parallelism: Parallelism::default(),
        }
    }

    pub fn analytic_disk(domain: Arc<PatchDomain>) -> Result<Self, TransformError> {
        if !matches!(domain.shape(), Shape::Disk { .. }) {
            return Err(TransformError::Unsupported("analytic backend needs a disk domain".into()));
        }
        Ok(Self { mode: BackendMode::AnalyticDisk, ..Self::quadrature(domain, QuadratureSpec::default()) })
    }

    pub fn with_parallelism(mut self, p: Parallelism) -> Self {
        self.parallelism = p;
        self
    }

    pub fn with_options(mut self, o: EngineOptions) -> Self {
        self.options = o;
        self
    }

    pub fn decompose(&self, f: &PiecewiseField, z: C64) -> Result<Decomposition, TransformError> {
        decompose(f, z, &self.options)
    }

    /// `(C̄[f](z), B̄[f](z))` in one pass.
    pub fn both(&self, f: &PiecewiseField, z: C64) -> Result<(C64, C64), TransformError> {
        match self.mode {
            BackendMode::Quadrature => {
                let d = self.decompose(f, z)?;
                Ok((d.cauchy, d.beurling()))
            }
            BackendMode::AnalyticDisk => {
                let r = RadialLaurent::from_field(f)?;
                Ok((r.cauchy(z)?, r.beurling(z)?))
            }
        }
    }

    pub fn cauchy(&self, f: &PiecewiseField, z: C64) -> Result<C64, TransformError> {
        self.both(f, z).map(|v| v.0)
    }

    pub fn beurling(&self, f: &PiecewiseField, z: C64) -> Result<C64, TransformError> {
        self.both(f, z).map(|v| v.1)
    }

    pub fn beurling_q(&self, f: &PiecewiseField, z: C64) -> Result<C64, TransformError> {
        self.decompose(f, z).map(|d| d.q)
    }

    pub fn beurling_l(&self, f: &PiecewiseField, z: C64) -> Result<C64, TransformError> {
        self.decompose(f, z).map(|d| d.l)
    }

    /// `Θ_W(z)` at radius `R₀/2` (or the configured radius): zero off ∂Ω,
    /// and `Θ_{ℂ∖Ω} = −Θ_Ω` since the two sides fill the ball.
    pub fn theta_term(&self, w: Side, z: C64) -> Result<C64, TransformError> {
        let d = &self.domain;
        let proj = d.nearest_boundary(z);
        if proj.distance > self.options.band * d.length_scale() {
            return Ok(ZERO);
        }
        let radius = self.options.boundary_radius.unwrap_or(0.5 * d.r0());
        let th = theta_geometric(d, proj.tau, radius, &self.options.spec)?;
        Ok(match w {
            Side::Exterior => -th,
            _ => th,
        })
    }

    /// Batched `(C̄, B̄)` over points, ordered like the input.
    pub fn eval_many(&self, f: &PiecewiseField, points: &[C64]) -> Vec<Result<(C64, C64), TransformError>> {
        par_map(points.len(), self.parallelism, |k| self.both(f, points[k]))
    }

    /// Field whose only nonzero part is the named region, valued `B̄[f]` there.
    /// Evaluation is lazy; failures evaluate to NaN.
    pub fn restricted(&self, op: Restriction, f: &PiecewiseField) -> PiecewiseField {
        let b = self.clone();
        let g = f.clone();
        let part = Part::func(move |z| b.beurling(&g, z).unwrap_or(C64::new(f64::NAN, f64::NAN)));
        let dom = self.domain.clone();
        match op {
            Restriction::Phi => PiecewiseField::new(dom, part, Part::Zero).with_boundary(crate::fields::BoundaryPart::Explicit(Part::Zero)),
            Restriction::Psi => PiecewiseField::new(dom, Part::Zero, part).with_boundary(crate::fields::BoundaryPart::Explicit(Part::Zero)),
            Restriction::Gamma => PiecewiseField::new(dom, Part::Zero, Part::Zero).with_boundary(crate::fields::BoundaryPart::Explicit(part)),
        }
    }

    // -----------------------------------------------------------------------
    // Checks

    /// Compares `B̄[g](z)` at a boundary point with the average of the two
    /// one-sided limits, each extrapolated from `z ∓ h n` over `hs` (halving).
    pub fn jump_check(&self, g: &PiecewiseField, z: C64, hs: &[f64]) -> Result<JumpCheck, TransformError> {
        assert!(hs.len() >= 2);
        let proj = self.domain.nearest_boundary(z);
        let (tau, n) = (proj.tau, proj.normal);
        let lhs = self.beurling(g, tau)?;
        if g.is_zero() {
            return Ok(JumpCheck { lhs, rhs: ZERO, residual: lhs.norm(), interior_limit: ZERO, exterior_limit: ZERO });
        }
        let pts: Vec<C64> = hs.iter().flat_map(|h| [tau - n * *h, tau + n * *h]).collect();
        let vals = self.eval_many(g, &pts);
        let mut inner = Vec::with_capacity(hs.len());
        let mut outer = Vec::with_capacity(hs.len());
        for (k, v) in vals.into_iter().enumerate() {
            let b = v?.1;
            if k % 2 == 0 {
                inner.push(b);
            } else {
                outer.push(b);
            }
        }
        let ratio = hs[0] / hs[1];
        let (li, gi) = richardson(&inner, ratio, 1.0);
        let (le, ge) = richardson(&outer, ratio, 1.0);
        let gap = gi.max(ge);
        if !(gap <= 1e-2 * (1.0 + li.norm() + le.norm())) {
            return Err(TransformError::NonConvergent { gap });
        }
        let rhs = 0.5 * (li + le);
        Ok(JumpCheck { lhs, rhs, residual: (lhs - rhs).norm(), interior_limit: li, exterior_limit: le })
    }

    /// Extrapolated `⟨f, φ_{z,ε}⟩` over the halving sequence `eps`.
    pub fn density_probe(&self, f: &PiecewiseField, z: C64, eps: &[f64], m: Mollifier) -> Result<C64, TransformError> {
        let vals: Vec<C64> = eps.iter().map(|e| mollified(f, z, *e, m, &self.options.spec)).collect::<Result<_, _>>()?;
        if vals.len() == 1 {
            return Ok(vals[0]);
        }
        let (v, gap) = richardson(&vals, eps[0] / eps[1], 1.0);
        if !(gap <= 1e-2 * (1.0 + v.norm())) {
            return Err(TransformError::NonConvergent { gap });
        }
        Ok(v)
    }

    /// Empirical ratios of the uniform, one-sided Hölder and decay bounds.
    pub fn bound_report(&self, f: &PiecewiseField, samples: &BoundSamples) -> Result<BoundEvidence, TransformError> {
        let dom = &self.domain;
        let gamma = dom.holder_gamma();
        let norm = triple_norm(f, Side::Interior, &samples.norm_options)?.total + triple_norm(f, Side::Exterior, &samples.norm_options)?.total;
        if norm == 0.0 {
            return Ok(BoundEvidence::default());
        }
        let b = |pts: &[C64]| -> Result<Vec<C64>, TransformError> {
            par_map(pts.len(), self.parallelism, |k| self.beurling(f, pts[k])).into_iter().collect()
        };
        let sup_vals = b(&samples.sup_points)?;
        let sup = sup_vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let holder = |pairs: &[(C64, C64)]| -> Result<f64, TransformError> {
            let pts: Vec<C64> = pairs.iter().flat_map(|(a, b)| [*a, *b]).collect();
            let v = b(&pts)?;
            Ok(pairs
                .iter()
                .enumerate()
                .map(|(k, (a, bb))| (v[2 * k] - v[2 * k + 1]).norm() / (a - bb).norm().powf(gamma))
                .fold(0.0, f64::max))
        };
        let hi = holder(&samples.interior_pairs)?;
        let he = holder(&samples.exterior_pairs)?;
        let far = b(&samples.far_points)?;
        let c = if f.exterior.is_zero() { 0.0 } else { f.decay_constant() };
        let r0 = dom.r0();
        let decay = samples
            .far_points
            .iter()
            .zip(&far)
            .map(|(z, v)| {
                let d = dom.nearest_boundary(*z).distance;
                v.norm() * (r0 * r0).max(d * d) / ((1.0 + d.ln()).max(1.0) * norm * (1.0 + c))
            })
            .fold(0.0, f64::max);
        let (sr, hr_i, hr_e) = (sup / norm, hi / norm, he / norm);
        Ok(BoundEvidence {
            sup_ratio: sr,
            holder_ratio_interior: hr_i,
            holder_ratio_exterior: hr_e,
            decay_ratio: decay,
            k_fit: sr.max(hr_i).max(hr_e),
            norm,
        })
    }
}

/// Result of [`TransformBackend::jump_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpCheck {
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
    pub interior_limit: C64,
    pub exterior_limit: C64,
}

/// Empirical constants of the uniform and Hölder bounds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundEvidence {
    pub sup_ratio: f64,
    pub holder_ratio_interior: f64,
    pub holder_ratio_exterior: f64,
    pub decay_ratio: f64,
    pub k_fit: f64,
    /// `‖f‖_γ` used as the denominator.
    pub norm: f64,
}

/// Sample sets for [`TransformBackend::bound_report`].
#[derive(Debug, Clone)]
pub struct BoundSamples {
    pub sup_points: Vec<C64>,
    pub interior_pairs: Vec<(C64, C64)>,
    pub exterior_pairs: Vec<(C64, C64)>,
    pub far_points: Vec<C64>,
    pub norm_options: NormOptions,
}

impl BoundSamples {
    /// Rings in star coordinates on both sides (clustered at ∂Ω), short
    /// one-sided pairs along normals and tangents, and far circles.
    /// `density` scales every count.
    pub fn new(domain: &PatchDomain, density: usize) -> Self {
        let nt = 16 * density;
        let rhos = [0.0, 0.3, 0.6, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995, 0.999, 1.001, 1.005, 1.01, 1.02, 1.05, 1.1, 1.3, 1.7, 2.5];
        let mut sup_points = Vec::new();
        for &r in &rhos {
            let m = if r == 0.0 { 1 } else { nt };
            for j in 0..m {
                sup_points.push(domain.from_star(r, TAU * (j as f64 + 0.5) / m as f64));
            }
        }
        let mut interior_pairs = Vec::new();
        let mut exterior_pairs = Vec::new();
        let scale = domain.length_scale();
        for j in 0..nt {
            let th = TAU * (j as f64 + 0.25) / nt as f64;
            let n = domain.normal(th);
            let t = domain.tangent(th);
            let b = domain.boundary_point(th);
            for k in 1..=4 {
                let h = scale * 0.02 * 0.5f64.powi(k);
                let (zi, ze) = (b - n * (2.0 * h), b + n * (2.0 * h));
                interior_pairs.push((zi, zi - n * h));
                interior_pairs.push((zi, zi + t * (0.5 * h)));
                exterior_pairs.push((ze, ze + n * h));
                exterior_pairs.push((ze, ze + t * (0.5 * h)));
            }
        }
        let m = domain.far_scale();
        let mut far_points = Vec::new();
        for &r in &[2.0, 5.0, 10.0, 50.0] {
            for j in 0..nt / 2 {
                far_points.push(domain.center() + C64::from_polar(r * m, TAU * (j as f64 + 0.1) / (nt / 2) as f64));
            }
        }
        let mut norm_options = NormOptions::default();
        for _ in 1..density {
            norm_options = norm_options.doubled();
        }
        Self { sup_points, interior_pairs, exterior_pairs, far_points, norm_options }
    }
}

// ---------------------------------------------------------------------------
// Mollifiers

/// Stock mollifiers, radial, supported on the unit disk, unit mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mollifier {
    /// `exp(−1/(1 − s²))`
    Bump,
    /// `(1 − s²)²`
    Polynomial,
}

impl Mollifier {
    fn profile(&self, s: f64) -> f64 {
        if s >= 1.0 {
            return 0.0;
        }
        match self {
            Mollifier::Bump => (-1.0 / (1.0 - s * s)).exp(),
            Mollifier::Polynomial => (1.0 - s * s).powi(2),
        }
    }

    /// `2π ∫_0^1 m(s) s ds`.
    pub fn mass(&self) -> f64 {
        match self {
            Mollifier::Polynomial => PI / 3.0,
            Mollifier::Bump => {
                use std::sync::OnceLock;
                static MASS: OnceLock<f64> = OnceLock::new();
                *MASS.get_or_init(|| {
                    let e = adaptive_vec(|s| [C64::new(Mollifier::Bump.profile(s) * s, 0.0)], 0.0, 1.0, &[], 1e-16, 1e-14, 2000);
                    TAU * e.value[0].re
                })
            }
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.profile(s) / self.mass()
    }
}

fn mollified(f: &PiecewiseField, z: C64, eps: f64, m: Mollifier, spec: &QuadratureSpec) -> Result<C64, TransformError> {
    let dom = f.domain();
    let mut cross = Vec::new();
    let mut breaks: Vec<f64> = dom.circle_crossings(z, eps);
    let proj = dom.nearest_boundary(z);
    if proj.distance > 0.0 {
        breaks.push((proj.tau - z).arg().rem_euclid(TAU));
    } else {
        let t = dom.tangent(proj.theta).arg();
        breaks.push(t.rem_euclid(TAU));
        breaks.push((t + PI).rem_euclid(TAU));
    }
    let est = adaptive_vec(
        |phi| {
            let e = C64::from_polar(1.0, phi);
            dom.ray_crossings(z, e, &mut cross);
            let mut acc = ZERO;
            let mut a = 0.0;
            let mut cuts: Vec<f64> = cross.iter().copied().filter(|r| *r < eps).collect();
            cuts.push(eps);
            for b in cuts {
                let mid = z + e * (0.5 * (a + b));
                let part = if dom.is_inside(mid) { &f.interior } else { &f.exterior };
                if !part.is_zero() {
                    let v = adaptive_vec(
                        |r| [part.eval(z + e * r) * (m.eval(r / eps) * r)],
                        a,
                        b,
                        &[],
                        0.01 * spec.abs_tol * eps * eps,
                        0.1 * spec.rel_tol,
                        spec.max_subdivisions,
                    );
                    acc += v.value[0];
                }
                a = b;
            }
            [acc]
        },
        0.0,
        TAU,
        &breaks,
        spec.abs_tol * eps * eps,
        spec.rel_tol,
        spec.max_subdivisions,
    );
    Ok(est.value[0] / (eps * eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::BoundaryPart;
    use crate::quadrature::pv_ring_oracle;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn disk() -> Arc<PatchDomain> {
        Arc::new(PatchDomain::unit_disk(0.5))
    }

    fn ellipse() -> Arc<PatchDomain> {
        Arc::new(PatchDomain::ellipse(c(0.0, 0.0), 2.0, 1.0, 0.5).unwrap())
    }

    fn backend(d: Arc<PatchDomain>) -> TransformBackend {
        TransformBackend::quadrature(d, QuadratureSpec::default()).with_parallelism(Parallelism::Sequential)
    }

    #[test]
    fn disk_indicator_closed_forms() {
        let d = disk();
        let b = backend(d.clone());
        let f = PiecewiseField::indicator(d, c(1.0, 0.0));
        let cases = [
            (c(0.3, 0.0), c(0.3, 0.0), c(0.0, 0.0)),
            (c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)),
            (c(2.0, 0.0), c(0.5, 0.0), c(-0.25, 0.0)),
            (c(1.0, 0.0), c(1.0, 0.0), c(-0.5, 0.0)),
        ];
        for (z, cv, bv) in cases {
            let (cc, bb) = b.both(&f, z).unwrap();
            assert!((cc - cv).norm() < 1e-8, "C̄ at {z}: {cc}");
            assert!((bb - bv).norm() < 1e-8, "B̄ at {z}: {bb}");
        }
        // off-axis and close to the circle
        for z in [c(0.3, -0.5), c(0.6, 0.79), c(-1.02, 0.1), c(0.0, 0.999)] {
            let w = z;
            let (cc, bb) = b.both(&f, z).unwrap();
            let (ce, be) = if w.norm() < 1.0 { (w, c(0.0, 0.0)) } else { (1.0 / w.conj(), -1.0 / (w.conj() * w.conj())) };
            assert!((cc - ce).norm() < 1e-7 * (1.0 + ce.norm()), "{z}: {cc} vs {ce}");
            assert!((bb - be).norm() < 1e-6 * (1.0 + be.norm()), "{z}: {bb} vs {be}");
        }
    }

    #[test]
    fn q_and_l_examples() {
        let d = disk();
        let b = backend(d.clone());
        let f = PiecewiseField::indicator(d.clone(), c(1.0, 0.0));
        assert!(b.beurling_q(&f, c(0.0, 0.0)).unwrap().norm() < 1e-12);
        assert!((b.beurling_q(&f, c(2.0, 0.0)).unwrap() - c(-0.25, 0.0)).norm() < 1e-9);
        assert!(b.beurling_l(&f, c(0.3, 0.0)).unwrap().norm() < 1e-12);
        assert_eq!(b.beurling_q(&PiecewiseField::zero(d.clone()), c(0.2, 0.1)).unwrap(), c(0.0, 0.0));
        // f = ζ and f = ζ̄ on a ball inside Ω integrate to zero against the kernel
        let big = Arc::new(PatchDomain::disk(c(0.0, 0.0), 3.0, 0.5).unwrap());
        let b3 = backend(big.clone());
        let fz = PiecewiseField::new(big.clone(), Part::func(|z| z), Part::Zero);
        let fzb = PiecewiseField::new(big, Part::func(|z: C64| z.conj()), Part::Zero);
        let z = c(0.2, 0.1);
        assert!(b3.beurling_l(&fz, z).unwrap().norm() < 1e-10);
        assert!(b3.beurling_l(&fzb, z).unwrap().norm() < 1e-10);
    }

    #[test]
    fn theta_term_at_disk_boundary() {
        let d = disk();
        let b = backend(d.clone());
        assert_eq!(b.theta_term(Side::Interior, c(0.2, 0.0)).unwrap(), c(0.0, 0.0));
        let f = PiecewiseField::indicator(d.clone(), c(1.0, 0.0));
        let th = b.theta_term(Side::Interior, c(1.0, 0.0)).unwrap();
        let q = b.beurling_q(&f, c(1.0, 0.0)).unwrap();
        assert!((th - (c(-0.5, 0.0) - q)).norm() < 1e-9, "{th} {q}");
        assert!((b.theta_term(Side::Exterior, c(1.0, 0.0)).unwrap() + th).norm() < 1e-15);
        // at z = 1 the inside arc is |φ − π| < acos(r/2), so J(r) = sin(2 asin(r/2))
        // and Θ = −(1/π) ∫_0^{1/2} √(1 − r²/4) dr
        assert!((th.re + 0.15748117876285372).abs() < 1e-9 && th.im.abs() < 1e-12, "{th}");
    }

    #[test]
    fn combined_value_is_radius_invariant() {
        let d = ellipse();
        let f = PiecewiseField::new(d.clone(), Part::func(|z: C64| c(1.0 + 0.3 * z.re, 0.2 * z.im)), Part::Zero);
        let z = d.boundary_point(0.7);
        let r0 = d.r0();
        let mut vals = Vec::new();
        for r in [0.5 * r0, 0.25 * r0] {
            let b = backend(d.clone()).with_options(EngineOptions { boundary_radius: Some(r), ..Default::default() });
            let dec = b.decompose(&f, z).unwrap();
            vals.push(dec.beurling());
        }
        assert!((vals[0] - vals[1]).norm() < 1e-7, "{vals:?}");
    }

    #[test]
    fn matches_ring_oracle() {
        let d = ellipse();
        let b = backend(d.clone());
        let f = PiecewiseField::new(d.clone(), Part::func(|z: C64| c(1.0, 0.5) + z * 0.3 + z.conj() * z * 0.1), Part::Zero);
        let spec = QuadratureSpec::default();
        for z in [c(0.4, 0.2), c(2.5, 0.4), c(-1.0, -0.5)] {
            let v = b.beurling(&f, z).unwrap();
            let dist = d.nearest_boundary(z).distance;
            let eps: Vec<f64> = (0..5).map(|k| 0.2 * dist * 0.5f64.powi(k)).collect();
            let o = pv_ring_oracle(&f, z, &eps, 1.0, 2.0, &spec).unwrap();
            assert!((v - o.value).norm() < 1e-7 * (1.0 + v.norm()), "{z}: {v} vs {}", o.value);
        }
    }

    #[test]
    fn derivative_identities() {
        let d = ellipse();
        let b = backend(d.clone());
        let g = |z: C64| c(1.0, 0.0) + z * z * 0.2 + z.conj() * c(0.0, 0.3);
        let f = PiecewiseField::new(d.clone(), Part::func(g), Part::Zero);
        let z = c(0.3, 0.2);
        let h = 1e-2;
        let cz = |w: C64| b.cauchy(&f, w).unwrap();
        let d4 = |e: C64| (cz(z - e * 2.0 * h) - 8.0 * cz(z - e * h) + 8.0 * cz(z + e * h) - cz(z + e * 2.0 * h)) / (12.0 * h);
        let dx = d4(c(1.0, 0.0));
        let dy = d4(c(0.0, 1.0));
        let dz = 0.5 * (dx - c(0.0, 1.0) * dy);
        let dzb = 0.5 * (dx + c(0.0, 1.0) * dy);
        assert!((dz - g(z)).norm() < 1e-6, "{dz} {}", g(z));
        assert!((dzb - b.beurling(&f, z).unwrap()).norm() < 1e-6);
    }

    #[test]
    fn two_sided_field_with_decaying_exterior() {
        // f = 1 inside the unit disk, ρ^{-2} outside: radial closed forms apply
        let d = disk();
        let b = backend(d.clone());
        let r = RadialLaurent { center: c(0.0, 0.0), radius: 1.0, interior: vec![c(1.0, 0.0)], exterior: vec![c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)] };
        let f = r.to_field(d);
        for z in [c(0.3, 0.1), c(1.5, -0.4), c(0.0, 1.0), c(-4.0, 2.0)] {
            let (cc, bb) = b.both(&f, z).unwrap();
            let (ce, be) = (r.cauchy(z).unwrap(), r.beurling(z).unwrap());
            assert!((cc - ce).norm() < 1e-7, "{z}: {cc} vs {ce}");
            assert!((bb - be).norm() < 1e-7, "{z}: {bb} vs {be}");
        }
    }

    #[test]
    fn radial_laurent_profiles() {
        let one = RadialLaurent::indicator(c(0.0, 0.0), 2.0, c(1.0, 0.0));
        let z = c(3.0, 1.0);
        assert!((one.cauchy(z).unwrap() - 4.0 / z.conj()).norm() < 1e-14);
        assert!((one.beurling(z).unwrap() + 4.0 / (z.conj() * z.conj())).norm() < 1e-14);
        assert!((one.beurling(c(2.0, 0.0)).unwrap() - c(-0.5, 0.0)).norm() < 1e-14);
        // ∂_z (w h) = f checked by finite differences on a two-sided density
        let f = RadialLaurent { center: c(0.5, 0.0), radius: 1.0, interior: vec![c(1.0, 0.0), c(0.0, 2.0)], exterior: vec![c(0.0, 0.0), c(0.0, 0.0), c(0.3, 0.1), c(-0.2, 0.0)] };
        for z in [c(0.7, 0.3), c(2.0, 1.0)] {
            let h = 1e-4;
            let cz = |w: C64| f.cauchy(w).unwrap();
            let dx = (cz(z + h) - cz(z - h)) / (2.0 * h);
            let dy = (cz(z + c(0.0, h)) - cz(z - c(0.0, h))) / (2.0 * h);
            assert!((0.5 * (dx - c(0.0, 1.0) * dy) - f.eval(z)).norm() < 1e-7);
            assert!((0.5 * (dx + c(0.0, 1.0) * dy) - f.beurling(z).unwrap()).norm() < 1e-7);
        }
        // continuity of C̄ across the circle
        let zb = c(1.5, 0.0);
        assert!((f.cauchy(zb * (1.0 + 1e-12)).unwrap() - f.cauchy(zb * (1.0 - 1e-12)).unwrap()).norm() < 1e-9);
        let bad = RadialLaurent { exterior: vec![c(0.0, 0.0), c(1.0, 0.0)], ..f };
        assert!(matches!(bad.cauchy(z), Err(TransformError::Unsupported(_))));
    }

    #[test]
    fn analytic_backend_matches_quadrature() {
        let d = disk();
        let q = backend(d.clone());
        let a = TransformBackend::analytic_disk(d.clone()).unwrap();
        let f = PiecewiseField::indicator(d, c(0.0, 1.0));
        for z in [c(0.2, 0.3), c(1.3, -0.2), c(0.0, -1.0)] {
            let (c1, b1) = q.both(&f, z).unwrap();
            let (c2, b2) = a.both(&f, z).unwrap();
            assert!((c1 - c2).norm() < 1e-8 && (b1 - b2).norm() < 1e-8);
        }
        assert!(TransformBackend::analytic_disk(ellipse()).is_err());
    }

    #[test]
    fn restricted_operators() {
        let d = disk();
        let b = backend(d.clone());
        let f = PiecewiseField::indicator(d, c(1.0, 0.0));
        let phi = b.restricted(Restriction::Phi, &f);
        assert!(phi.interior_value(c(0.2, 0.1)).norm() < 1e-9);
        assert!(phi.exterior.is_zero());
        let psi = b.restricted(Restriction::Psi, &f);
        assert!((psi.exterior_value(c(2.0, 0.0)) - c(-0.25, 0.0)).norm() < 1e-9);
        let gamma = b.restricted(Restriction::Gamma, &f);
        assert!((gamma.boundary_value(c(1.0, 0.0)) - c(-0.5, 0.0)).norm() < 1e-9);
        assert!(matches!(gamma.boundary, BoundaryPart::Explicit(_)));
    }

    #[test]
    fn jump_formula_on_disk_and_zero() {
        let d = disk();
        let b = backend(d.clone());
        let f = PiecewiseField::indicator(d.clone(), c(1.0, 0.0));
        let hs: Vec<f64> = (0..4).map(|k| 0.02 * 0.5f64.powi(k)).collect();
        let j = b.jump_check(&f, c(1.0, 0.0), &hs).unwrap();
        assert!((j.lhs - c(-0.5, 0.0)).norm() < 1e-8);
        assert!((j.rhs - c(-0.5, 0.0)).norm() < 1e-6, "{:?}", j);
        let z = b.jump_check(&PiecewiseField::zero(d), c(0.0, 1.0), &hs).unwrap();
        assert_eq!((z.lhs, z.rhs, z.residual), (c(0.0, 0.0), c(0.0, 0.0), 0.0));
    }

    #[test]
    fn density_probe_values() {
        let d = disk();
        let b = backend(d.clone());
        let f = PiecewiseField::indicator(d, c(1.0, 0.0));
        for m in [Mollifier::Bump, Mollifier::Polynomial] {
            let eps = [1e-3, 5e-4];
            for (z, want) in [(c(0.5, 0.0), 1.0), (c(0.0, 1.0), 0.5), (c(2.0, 0.0), 0.0)] {
                let v = b.density_probe(&f, z, &eps, m).unwrap();
                assert!((v.re - want).abs() < 1e-4 && v.im.abs() < 1e-6, "{m:?} {z}: {v}");
            }
        }
        assert!((Mollifier::Bump.mass() - 0.46651239).abs() < 1e-6, "{}", Mollifier::Bump.mass());
    }
}
