//! Piecewise densities on ℂ split across ∂Ω: an interior part continuous up
//! to the boundary from inside, an exterior part continuous from outside, and
//! a boundary part. Parts are constants, closures, or collocation meshes in
//! star coordinates (`ρ` inside, `u = 1/ρ` outside, so the exterior mesh
//! reaches infinity at `u = 0`).

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{classify_signed, PatchDomain, Side};
use crate::quadrature::{adaptive_vec, RingDensity};
use crate::{par_map, Parallelism, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("exterior part decays like r^-{exponent:.3}, too slowly for the L^q norm")]
    DivergentTail { exponent: f64 },
    #[error("norm requested on the boundary set, which has zero area")]
    BoundaryRegion,
    #[error("norm integral did not converge (error {0:e})")]
    NormQuadrature(f64),
}

pub type Evaluator = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// One side of a piecewise field.
#[derive(Clone)]
pub enum Part {
    Zero,
    Constant(C64),
    Func(Evaluator),
    Mesh(Arc<MeshPart>),
}

impl std::fmt::Debug for Part {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Part::Zero => write!(f, "Zero"),
            Part::Constant(c) => write!(f, "Constant({c})"),
            Part::Func(_) => write!(f, "Func"),
            Part::Mesh(m) => write!(f, "Mesh({}x{})", m.n_radial(), m.n_theta()),
        }
    }
}

impl Part {
    pub fn func<F: Fn(C64) -> C64 + Send + Sync + 'static>(f: F) -> Self {
        Part::Func(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, z: C64) -> C64 {
        match self {
            Part::Zero => C64::new(0.0, 0.0),
            Part::Constant(c) => *c,
            Part::Func(f) => f(z),
            Part::Mesh(m) => m.eval(z),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Part::Zero => true,
            Part::Constant(c) => *c == C64::new(0.0, 0.0),
            Part::Mesh(m) => m.values.iter().all(|v| *v == C64::new(0.0, 0.0)),
            Part::Func(_) => false,
        }
    }

    /// True when the part is a constant (including zero).
    pub fn constant_value(&self) -> Option<C64> {
        match self {
            Part::Zero => Some(C64::new(0.0, 0.0)),
            Part::Constant(c) => Some(*c),
            _ => None,
        }
    }

    pub fn scaled(&self, s: C64) -> Part {
        match self {
            Part::Zero => Part::Zero,
            Part::Constant(c) => Part::Constant(c * s),
            Part::Func(f) => {
                let f = f.clone();
                Part::func(move |z| f(z) * s)
            }
            Part::Mesh(m) => Part::Mesh(Arc::new(m.map(|v| v * s))),
        }
    }
}

/// Boundary part of a field.
#[derive(Clone, Debug)]
pub enum BoundaryPart {
    /// `½(interior limit + exterior limit)`.
    Average,
    Explicit(Part),
    /// Values at equispaced boundary parameters, trigonometric interpolation between them.
    Samples(Arc<TrigSamples>),
}

/// Trigonometric interpolant of samples at `θ_j = 2πj/n`.
#[derive(Clone, Debug)]
pub struct TrigSamples {
    coeffs: Vec<(i32, C64)>,
}

impl TrigSamples {
    pub fn new(values: &[C64]) -> Self {
        let n = values.len();
        assert!(n >= 1);
        let kmax = (n as i32 - 1) / 2;
        let kmin = -(n as i32) / 2;
        let coeffs = (kmin..=kmax)
            .map(|k| {
                let s: C64 = values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * C64::from_polar(1.0, -TAU * (k as f64) * j as f64 / n as f64))
                    .sum();
                (k, s / n as f64)
            })
            .collect();
        Self { coeffs }
    }

    pub fn eval(&self, theta: f64) -> C64 {
        self.coeffs.iter().map(|(k, c)| c * C64::from_polar(1.0, *k as f64 * theta)).sum()
    }
}

/// Collocation layout for mesh parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub n_radial: usize,
    pub n_theta: usize,
    /// Angular stencil width; `n_theta` selects global trigonometric interpolation.
    pub stencil: usize,
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self { n_radial: 20, n_theta: 64, stencil: 64 }
    }
}

/// A side of a field sampled on a tensor mesh in star coordinates:
/// Chebyshev–Gauss nodes in the radial variable (ρ inside, u = 1/ρ outside)
/// and equispaced periodic nodes in θ.
#[derive(Clone)]
pub struct MeshPart {
    domain: Arc<PatchDomain>,
    side: Side,
    spec: MeshSpec,
    x: Vec<f64>,
    w: Vec<f64>,
    values: Vec<C64>,
    /// Exterior parts interpolate `u^{−p} f` and multiply back by `u^p`.
    decay: u32,
    stored: Vec<C64>,
}

impl MeshPart {
    fn layout(spec: &MeshSpec) -> (Vec<f64>, Vec<f64>) {
        let n = spec.n_radial;
        let x = (0..n).map(|i| 0.5 * (1.0 - ((2 * i + 1) as f64 * PI / (2 * n) as f64).cos())).collect();
        let w = (0..n)
            .map(|i| {
                let s = ((2 * i + 1) as f64 * PI / (2 * n) as f64).sin();
                if i % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        (x, w)
    }

    /// Node positions, row-major (radial index outer, θ index inner).
    pub fn node_positions(domain: &PatchDomain, side: Side, spec: &MeshSpec) -> Vec<C64> {
        let (x, _) = Self::layout(spec);
        let mut out = Vec::with_capacity(spec.n_radial * spec.n_theta);
        for xi in &x {
            for j in 0..spec.n_theta {
                let th = TAU * j as f64 / spec.n_theta as f64;
                let rho = match side {
                    Side::Interior => *xi,
                    _ => 1.0 / xi,
                };
                out.push(domain.from_star(rho, th));
            }
        }
        out
    }

    pub fn from_values(domain: Arc<PatchDomain>, side: Side, spec: MeshSpec, values: Vec<C64>) -> Self {
        assert!(matches!(side, Side::Interior | Side::Exterior), "mesh parts live on a side");
        assert_eq!(values.len(), spec.n_radial * spec.n_theta);
        assert!(spec.stencil >= 2 && spec.stencil <= spec.n_theta && spec.stencil % 2 == 0);
        let (x, w) = Self::layout(&spec);
        Self { domain, side, spec, x, w, stored: values.clone(), values, decay: 0 }
    }

    /// Exterior part vanishing like `|z|^{−p}` at infinity.
    pub fn with_decay(mut self, p: u32) -> Self {
        if self.side != Side::Exterior {
            return self;
        }
        let nt = self.spec.n_theta;
        self.decay = p;
        self.stored = self.values.iter().enumerate().map(|(k, v)| v * self.x[k / nt].powi(-(p as i32))).collect();
        self
    }

    pub fn decay(&self) -> u32 {
        self.decay
    }

    pub fn sample<F: Fn(C64) -> C64 + Sync>(domain: Arc<PatchDomain>, side: Side, spec: MeshSpec, par: Parallelism, f: F) -> Self {
        let nodes = Self::node_positions(&domain, side, &spec);
        let values = par_map(nodes.len(), par, |k| f(nodes[k]));
        Self::from_values(domain, side, spec, values)
    }

    pub fn map<F: Fn(C64) -> C64>(&self, f: F) -> Self {
        let values = self.values.iter().map(|v| f(*v)).collect();
        Self::from_values(self.domain.clone(), self.side, self.spec, values).with_decay(self.decay)
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }
    pub fn spec(&self) -> MeshSpec {
        self.spec
    }
    pub fn side(&self) -> Side {
        self.side
    }
    pub fn domain(&self) -> &Arc<PatchDomain> {
        &self.domain
    }
    pub fn n_radial(&self) -> usize {
        self.spec.n_radial
    }
    pub fn n_theta(&self) -> usize {
        self.spec.n_theta
    }
    pub fn nodes(&self) -> Vec<C64> {
        Self::node_positions(&self.domain, self.side, &self.spec)
    }

    pub fn eval(&self, z: C64) -> C64 {
        let (rho, th) = self.domain.star_coords(z);
        let x = match self.side {
            Side::Interior => rho,
            _ => {
                if rho == 0.0 {
                    1.05
                } else {
                    1.0 / rho
                }
            }
        };
        let x = x.min(1.05);
        self.eval_star(x, th) * x.powi(self.decay as i32)
    }

    /// Interpolant of the stored values at radial coordinate `x` (ρ or u) and angle `θ`;
    /// equals the field when there is no decay weight.
    pub fn eval_star(&self, x: f64, theta: f64) -> C64 {
        let nt = self.spec.n_theta;
        if self.spec.stencil == nt {
            return self.eval_trig(x, theta);
        }
        let m = self.spec.stencil;
        let h = TAU / nt as f64;
        let s_abs = theta.rem_euclid(TAU) / h;
        let base = s_abs.floor() as i64 - (m as i64 / 2 - 1);
        let s = s_abs - base as f64;
        let mut lw = [0.0f64; 32];
        let lw = &mut lw[..m];
        let mut exact = None;
        let mut den = 0.0;
        for k in 0..m {
            let d = s - k as f64;
            if d == 0.0 {
                exact = Some(k);
                break;
            }
            let bw = binom_sign(m - 1, k) / d;
            lw[k] = bw;
            den += bw;
        }
        if let Some(k) = exact {
            lw.iter_mut().for_each(|v| *v = 0.0);
            lw[k] = 1.0;
        } else {
            lw.iter_mut().for_each(|v| *v /= den);
        }
        let cols: Vec<usize> = (0..m).map(|k| (base + k as i64).rem_euclid(nt as i64) as usize).collect();

        let mut num = C64::new(0.0, 0.0);
        let mut dsum = 0.0;
        for (i, xi) in self.x.iter().enumerate() {
            let row = &self.stored[i * nt..(i + 1) * nt];
            let mut v = C64::new(0.0, 0.0);
            for k in 0..m {
                v += row[cols[k]] * lw[k];
            }
            let d = x - xi;
            if d == 0.0 {
                return v;
            }
            let t = self.w[i] / d;
            num += v * t;
            dsum += t;
        }
        num / dsum
    }
}

impl MeshPart {
    fn radial_combine<F: Fn(&[C64]) -> C64>(&self, x: f64, row_value: F) -> C64 {
        let nt = self.spec.n_theta;
        let mut num = C64::new(0.0, 0.0);
        let mut dsum = 0.0;
        for (i, xi) in self.x.iter().enumerate() {
            let v = row_value(&self.stored[i * nt..(i + 1) * nt]);
            let d = x - xi;
            if d == 0.0 {
                return v;
            }
            let t = self.w[i] / d;
            num += v * t;
            dsum += t;
        }
        num / dsum
    }

    /// Barycentric trigonometric interpolation in θ (even `n_theta`).
    fn eval_trig(&self, x: f64, theta: f64) -> C64 {
        let nt = self.spec.n_theta;
        let h = TAU / nt as f64;
        let th = theta.rem_euclid(TAU);
        let s = th / h;
        if (s - s.round()).abs() < 1e-14 {
            let k = (s.round() as usize) % nt;
            return self.radial_combine(x, |row| row[k]);
        }
        let mut lw = vec![0.0; nt];
        let mut den = 0.0;
        for (k, w) in lw.iter_mut().enumerate() {
            let c = 1.0 / (0.5 * (th - k as f64 * h)).tan();
            *w = if k % 2 == 0 { c } else { -c };
            den += *w;
        }
        lw.iter_mut().for_each(|w| *w /= den);
        self.radial_combine(x, |row| row.iter().zip(&lw).map(|(v, w)| v * w).sum())
    }
}

fn binom_sign(n: usize, k: usize) -> f64 {
    let mut c = 1.0;
    for j in 0..k {
        c = c * (n - j) as f64 / (j + 1) as f64;
    }
    if k % 2 == 0 {
        c
    } else {
        -c
    }
}

/// A density on ℂ split into interior, exterior and boundary parts.
#[derive(Clone, Debug)]
pub struct PiecewiseField {
    domain: Arc<PatchDomain>,
    pub interior: Part,
    pub exterior: Part,
    pub boundary: BoundaryPart,
    decay_constant: Option<f64>,
}

impl PiecewiseField {
    pub fn new(domain: Arc<PatchDomain>, interior: Part, exterior: Part) -> Self {
        Self { domain, interior, exterior, boundary: BoundaryPart::Average, decay_constant: None }
    }

    pub fn zero(domain: Arc<PatchDomain>) -> Self {
        Self::new(domain, Part::Zero, Part::Zero)
    }

    /// `value·χ_Ω` with half value on ∂Ω.
    pub fn indicator(domain: Arc<PatchDomain>, value: C64) -> Self {
        Self::new(domain, Part::Constant(value), Part::Zero)
    }

    pub fn with_boundary(mut self, b: BoundaryPart) -> Self {
        self.boundary = b;
        self
    }

    pub fn with_decay_constant(mut self, c: f64) -> Self {
        self.decay_constant = Some(c);
        self
    }

    pub fn domain(&self) -> &Arc<PatchDomain> {
        &self.domain
    }

    pub fn is_zero(&self) -> bool {
        self.interior.is_zero()
            && self.exterior.is_zero()
            && match &self.boundary {
                BoundaryPart::Average => true,
                BoundaryPart::Explicit(p) => p.is_zero(),
                BoundaryPart::Samples(s) => s.coeffs.iter().all(|(_, c)| *c == C64::new(0.0, 0.0)),
            }
    }

    /// True when the field has a compactly supported, constant-per-side form.
    pub fn is_piecewise_constant(&self) -> bool {
        self.interior.constant_value().is_some() && self.exterior.constant_value().is_some()
    }

    pub fn part(&self, side: Side) -> &Part {
        match side {
            Side::Interior => &self.interior,
            _ => &self.exterior,
        }
    }

    #[inline]
    pub fn interior_value(&self, z: C64) -> C64 {
        self.interior.eval(z)
    }

    #[inline]
    pub fn exterior_value(&self, z: C64) -> C64 {
        self.exterior.eval(z)
    }

    /// Boundary value at `z ∈ ∂Ω`.
    pub fn boundary_value(&self, z: C64) -> C64 {
        match &self.boundary {
            BoundaryPart::Average => 0.5 * (self.interior.eval(z) + self.exterior.eval(z)),
            BoundaryPart::Explicit(p) => p.eval(z),
            BoundaryPart::Samples(s) => s.eval(self.domain.star_coords(z).1),
        }
    }

    pub fn side_value(&self, side: Side, z: C64) -> C64 {
        match side {
            Side::Interior => self.interior_value(z),
            Side::Exterior => self.exterior_value(z),
            Side::Boundary => self.boundary_value(z),
        }
    }

    /// Value at `z` with the boundary band of `band`.
    pub fn evaluate_with_band(&self, z: C64, band: f64) -> C64 {
        let side = classify_signed(self.domain.signed_distance(z), band);
        self.side_value(side, z)
    }

    pub fn evaluate(&self, z: C64) -> C64 {
        self.evaluate_with_band(z, 1e-9 * self.domain.length_scale())
    }

    /// Interior/exterior value by the exact star test (boundary has measure zero).
    #[inline]
    pub fn value_ae(&self, z: C64) -> C64 {
        if self.domain.is_inside(z) {
            self.interior.eval(z)
        } else {
            self.exterior.eval(z)
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        let boundary = match &self.boundary {
            BoundaryPart::Average => BoundaryPart::Average,
            BoundaryPart::Explicit(p) => BoundaryPart::Explicit(p.scaled(s)),
            BoundaryPart::Samples(t) => BoundaryPart::Samples(Arc::new(TrigSamples {
                coeffs: t.coeffs.iter().map(|(k, c)| (*k, c * s)).collect(),
            })),
        };
        Self {
            domain: self.domain.clone(),
            interior: self.interior.scaled(s),
            exterior: self.exterior.scaled(s),
            boundary,
            decay_constant: self.decay_constant.map(|c| c * s.norm()),
        }
    }

    /// Stored or fitted decay constant `C` with `|ψ(z)| ≤ C / max{R₀², d²}`.
    pub fn decay_constant(&self) -> f64 {
        self.decay_constant.unwrap_or_else(|| {
            let m = self.domain.far_scale() + self.domain.r0();
            decay_fit(self, &[m, 2.0 * m, 5.0 * m, 10.0 * m, 50.0 * m])
        })
    }

    /// Largest `|ζ − z|` over the support when the exterior part vanishes.
    pub fn support_radius(&self, z: C64) -> Option<f64> {
        if !self.exterior.is_zero() {
            return None;
        }
        let d = &self.domain;
        let n = 256;
        let far = (0..n).map(|j| (d.boundary_point(TAU * j as f64 / n as f64) - z).norm()).fold(0.0, f64::max);
        Some(far * 1.01 + 1e-12)
    }

    /// Boundary compatibility residual `|ι − ½(φ_lim + ψ_lim)|` at `n` boundary nodes.
    pub fn boundary_compatibility(&self, n: usize) -> f64 {
        (0..n)
            .map(|j| {
                let z = self.domain.boundary_point(TAU * j as f64 / n as f64);
                (self.boundary_value(z) - 0.5 * (self.interior_value(z) + self.exterior_value(z))).norm()
            })
            .fold(0.0, f64::max)
    }
}

impl RingDensity for PiecewiseField {
    fn value(&self, zeta: C64) -> C64 {
        self.value_ae(zeta)
    }
    fn circle_breaks(&self, z: C64, r: f64) -> Vec<f64> {
        self.domain.circle_crossings(z, r)
    }
    fn radial_breaks(&self, z: C64) -> Vec<f64> {
        self.domain.critical_distances(z)
    }
    fn support_radius(&self, z: C64) -> Option<f64> {
        PiecewiseField::support_radius(self, z)
    }
}

// ---------------------------------------------------------------------------
// Norms

/// Hölder + L^p + L^q norm with `p = 2/(1−γ)`, `q = 2/(1+γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct TripleNorm {
    pub holder: f64,
    pub lp: f64,
    pub lq: f64,
    pub total: f64,
    pub p: f64,
    pub q: f64,
}

impl TripleNorm {
    pub fn new(holder: f64, lp: f64, lq: f64, gamma: f64) -> Self {
        Self { holder, lp, lq, total: holder + lp + lq, p: 2.0 / (1.0 - gamma), q: 2.0 / (1.0 + gamma) }
    }
}

/// Sampling resolution for empirical norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormOptions {
    pub n_radial: usize,
    pub n_theta: usize,
    pub scales: usize,
    pub directions: usize,
    pub far_pairs: usize,
    pub seed: u64,
    pub rel_tol: f64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { n_radial: 12, n_theta: 48, scales: 10, directions: 4, far_pairs: 2000, seed: 7, rel_tol: 1e-7 }
    }
}

impl NormOptions {
    pub fn doubled(&self) -> Self {
        Self { n_radial: 2 * self.n_radial, n_theta: 2 * self.n_theta, far_pairs: 2 * self.far_pairs, ..*self }
    }
}

/// Point samples of one side: a star grid including the boundary limit, plus
/// a far shell for the exterior.
pub fn side_samples(domain: &PatchDomain, side: Side, opt: &NormOptions) -> Vec<C64> {
    let mut pts = Vec::new();
    for i in 0..=opt.n_radial {
        let x = i as f64 / opt.n_radial as f64;
        for j in 0..opt.n_theta {
            let th = TAU * j as f64 / opt.n_theta as f64;
            match side {
                Side::Interior => pts.push(domain.from_star(x, th)),
                _ => {
                    if x > 0.0 {
                        pts.push(domain.from_star(1.0 / x, th));
                    }
                }
            }
        }
    }
    if matches!(side, Side::Interior) {
        pts.push(domain.center());
    }
    pts
}

/// Pairs for the Hölder seminorm: dyadic near pairs around each anchor plus
/// seeded random far pairs and antipodal boundary pairs.
pub fn holder_pairs(domain: &PatchDomain, side: Side, opt: &NormOptions) -> Vec<(C64, C64)> {
    let anchors = side_samples(domain, side, opt);
    let inside = |z: C64| match side {
        Side::Interior => domain.star_coords(z).0 <= 1.0,
        _ => domain.star_coords(z).0 >= 1.0,
    };
    let diam = domain.diameter();
    let mut pairs = Vec::new();
    for a in &anchors {
        for s in 0..opt.scales {
            let len = diam * 0.5f64.powi(s as i32 + 1);
            for k in 0..opt.directions {
                let dir = C64::from_polar(1.0, PI * k as f64 / opt.directions as f64 + 0.1);
                let b = a + dir * len;
                if inside(b) {
                    pairs.push((*a, b));
                }
            }
        }
    }
    let n = opt.n_theta.max(8);
    for j in 0..n {
        let th = TAU * j as f64 / n as f64;
        pairs.push((domain.boundary_point(th), domain.boundary_point(th + PI)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let m = anchors.len();
    for _ in 0..opt.far_pairs {
        let i = rng.gen_range(0..m);
        let j = rng.gen_range(0..m);
        if i != j {
            pairs.push((anchors[i], anchors[j]));
        }
    }
    pairs
}

/// Empirical sup of `|f(z) − f(w)| / |z − w|^γ` over the given pairs.
pub fn holder_seminorm<F: Fn(C64) -> C64>(f: F, pairs: &[(C64, C64)], gamma: f64) -> f64 {
    pairs
        .iter()
        .filter(|(a, b)| a != b)
        .map(|(a, b)| (f(*a) - f(*b)).norm() / (a - b).norm().powf(gamma))
        .fold(0.0, f64::max)
}

fn side_evaluator<'a>(f: &'a PiecewiseField, side: Side) -> impl Fn(C64) -> C64 + 'a {
    move |z| f.part(side).eval(z)
}

/// `(∫_side |f|^p dm)^{1/p}` in star coordinates.
pub fn lp_norm(f: &PiecewiseField, side: Side, p: f64, rel_tol: f64) -> Result<f64, FieldError> {
    let dom = f.domain();
    let part = f.part(side);
    if part.is_zero() {
        return Ok(0.0);
    }
    let c = dom.center();
    let jac = |th: f64| {
        let (g, d1, _) = dom.curve().eval3(th);
        ((g - c).conj() * d1).im
    };
    let abs_tol = 1e-14;
    let est = adaptive_vec(
        |th| {
            let (g, _) = (dom.curve().point(th) - c, 0);
            let j = jac(th);
            let inner = adaptive_vec(
                |x| {
                    let v = match side {
                        Side::Interior => part.eval(c + g * x).norm().powf(p) * x,
                        _ => {
                            if x <= 0.0 {
                                0.0
                            } else {
                                let u = x * x * x;
                                part.eval(c + g / u).norm().powf(p) * 3.0 * x * x / (u * u * u)
                            }
                        }
                    };
                    [C64::new(v * j, 0.0)]
                },
                0.0,
                1.0,
                &[],
                abs_tol,
                0.1 * rel_tol,
                400,
            );
            inner.value
        },
        0.0,
        TAU,
        &[0.5 * PI, PI, 1.5 * PI],
        abs_tol,
        rel_tol,
        400,
    );
    if !est.converged && est.error > 1e-4 * est.value[0].re.abs() {
        return Err(FieldError::NormQuadrature(est.error));
    }
    Ok(est.value[0].re.max(0.0).powf(1.0 / p))
}

/// Fitted power-law decay exponent of the exterior part at large radii.
pub fn decay_exponent(f: &PiecewiseField) -> f64 {
    let m = f.domain().far_scale();
    let c = f.domain().center();
    let sup = |r: f64| (0..16).map(|k| f.exterior.eval(c + C64::from_polar(r, 0.2 + TAU * k as f64 / 16.0)).norm()).fold(0.0, f64::max);
    let (a, b) = (sup(10.0 * m), sup(100.0 * m));
    if a == 0.0 && b == 0.0 {
        return f64::INFINITY;
    }
    if b == 0.0 {
        return f64::INFINITY;
    }
    (a / b).ln() / 10f64.ln()
}

pub fn triple_norm(f: &PiecewiseField, side: Side, opt: &NormOptions) -> Result<TripleNorm, FieldError> {
    let dom = f.domain();
    let gamma = dom.holder_gamma();
    if matches!(side, Side::Boundary) {
        return Err(FieldError::BoundaryRegion);
    }
    if f.part(side).is_zero() {
        return Ok(TripleNorm::new(0.0, 0.0, 0.0, gamma));
    }
    let (p, q) = (2.0 / (1.0 - gamma), 2.0 / (1.0 + gamma));
    if matches!(side, Side::Exterior) {
        let k = decay_exponent(f);
        if k * q <= 2.0 + 1e-3 {
            return Err(FieldError::DivergentTail { exponent: k });
        }
    }
    let ev = side_evaluator(f, side);
    let pts = side_samples(dom, side, opt);
    let sup = pts.iter().map(|z| ev(*z).norm()).fold(0.0, f64::max);
    let pairs = holder_pairs(dom, side, opt);
    let semi = holder_seminorm(&ev, &pairs, gamma);
    let lp = lp_norm(f, side, p, opt.rel_tol)?;
    let lq = lp_norm(f, side, q, opt.rel_tol)?;
    Ok(TripleNorm::new(sup + semi, lp, lq, gamma))
}

/// Least `C` with `|f_ext(z)| ≤ C / max{R₀², d(z)²}` on circles `|z − c| = R`
/// for the given radii; `+∞` when the bound keeps growing with the radius.
pub fn decay_fit(f: &PiecewiseField, radii: &[f64]) -> f64 {
    if f.exterior.is_zero() {
        return 0.0;
    }
    let dom = f.domain();
    let r0sq = dom.r0() * dom.r0();
    let c = dom.center();
    let mut per_radius: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| {
            let m = (0..64)
                .map(|k| {
                    let z = c + C64::from_polar(r, TAU * k as f64 / 64.0 + 0.05);
                    let d = dom.nearest_boundary(z).distance;
                    f.exterior.eval(z).norm() * r0sq.max(d * d)
                })
                .fold(0.0, f64::max);
            (r, m)
        })
        .collect();
    per_radius.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = per_radius.len();
    if n >= 2 {
        let (r1, c1) = per_radius[n - 2];
        let (r2, c2) = per_radius[n - 1];
        if c1 > 0.0 && c2 / c1 > (r2 / r1).sqrt() {
            return f64::INFINITY;
        }
    }
    per_radius.iter().map(|x| x.1).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Dumps

/// One row of a field dump.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FieldRow {
    pub region: String,
    pub re_z: f64,
    pub im_z: f64,
    pub re_f: f64,
    pub im_f: f64,
}

pub fn dump_rows(f: &PiecewiseField, opt: &NormOptions) -> Vec<FieldRow> {
    let dom = f.domain();
    let mut rows = Vec::new();
    let mut push = |region: &str, z: C64, v: C64| rows.push(FieldRow { region: region.into(), re_z: z.re, im_z: z.im, re_f: v.re, im_f: v.im });
    for z in side_samples(dom, Side::Interior, opt) {
        if dom.star_coords(z).0 < 1.0 {
            push("interior", z, f.interior_value(z));
        }
    }
    for z in side_samples(dom, Side::Exterior, opt) {
        if dom.star_coords(z).0 > 1.0 {
            push("exterior", z, f.exterior_value(z));
        }
    }
    for j in 0..opt.n_theta {
        let z = dom.boundary_point(TAU * j as f64 / opt.n_theta as f64);
        push("boundary", z, f.boundary_value(z));
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn disk() -> Arc<PatchDomain> {
        Arc::new(PatchDomain::unit_disk(0.5))
    }

    #[test]
    fn indicator_values_by_region() {
        let f = PiecewiseField::indicator(disk(), c(1.0, 0.0));
        assert_eq!(f.evaluate(c(0.5, 0.0)), c(1.0, 0.0));
        assert_eq!(f.evaluate(c(0.0, 1.0)), c(0.5, 0.0));
        assert_eq!(f.evaluate(c(3.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn mesh_interpolates_smooth_fields() {
        let d = Arc::new(PatchDomain::ellipse(c(0.0, 0.0), 2.0, 1.0, 0.5).unwrap());
        let f = |z: C64| (z * 0.7).exp() + z.conj() * z;
        let m = MeshPart::sample(d.clone(), Side::Interior, MeshSpec::default(), Parallelism::Sequential, f);
        for k in 0..30 {
            let z = d.from_star(0.03 * k as f64 + 0.05, 0.41 * k as f64);
            assert!((m.eval(z) - f(z)).norm() < 1e-8, "{z}");
        }
        let g = |z: C64| 1.0 / (z.conj() * z.conj()) + 0.3 / (z.conj().powi(3));
        let m = MeshPart::sample(d.clone(), Side::Exterior, MeshSpec::default(), Parallelism::Sequential, g);
        for k in 0..30 {
            let z = d.from_star(1.0 + 0.4 * k as f64, 0.37 * k as f64);
            assert!((m.eval(z) - g(z)).norm() < 1e-5, "{z}: {}", (m.eval(z) - g(z)).norm());
        }
    }

    #[test]
    fn trig_samples_reproduce_band_limited_data() {
        let vals: Vec<C64> = (0..16).map(|j| {
            let t = TAU * j as f64 / 16.0;
            c(t.cos(), 0.5 * (3.0 * t).sin())
        }).collect();
        let s = TrigSamples::new(&vals);
        let t = 0.123;
        assert!((s.eval(t) - c(t.cos(), 0.5 * (3.0 * t).sin())).norm() < 1e-12);
    }

    #[test]
    fn triple_norm_of_indicator() {
        let f = PiecewiseField::indicator(disk(), c(0.0, 1.0));
        let n = triple_norm(&f, Side::Interior, &NormOptions::default()).unwrap();
        assert!((n.holder - 1.0).abs() < 1e-12);
        assert!((n.lp - PI.powf(0.25)).abs() < 1e-6);
        assert!((n.lq - PI.powf(0.75)).abs() < 1e-6);
        assert!((n.total - 4.6910).abs() < 1e-4);
        assert!((1.0 / n.p + 1.0 / n.q - 1.0).abs() < 1e-15);
        let e = triple_norm(&f, Side::Exterior, &NormOptions::default()).unwrap();
        assert_eq!(e.total, 0.0);
        let z = triple_norm(&PiecewiseField::zero(disk()), Side::Interior, &NormOptions::default()).unwrap();
        assert_eq!(z, TripleNorm::new(0.0, 0.0, 0.0, 0.5));
    }

    #[test]
    fn holder_seminorm_examples() {
        let d = disk();
        let opt = NormOptions::default();
        let pairs = holder_pairs(&d, Side::Interior, &opt);
        assert_eq!(holder_seminorm(|_| c(2.0, 1.0), &pairs, 0.5), 0.0);
        let s = holder_seminorm(|z| z, &pairs, 0.5);
        assert!((s - 2f64.sqrt()).abs() < 1e-9, "{s}");
        // monotone in the sample set
        let s_half = holder_seminorm(|z| z * z, &pairs[..pairs.len() / 2], 0.5);
        assert!(holder_seminorm(|z| z * z, &pairs, 0.5) >= s_half);
    }

    #[test]
    fn holder_seminorm_of_bump_below_lipschitz_bound() {
        let d = disk();
        let pairs = holder_pairs(&d, Side::Interior, &NormOptions::default());
        // bump exp(-|z|²): Lipschitz constant sup|∇| = √2·e^{-1/2}
        let lip = 2f64.sqrt() * (-0.5f64).exp();
        let s = holder_seminorm(|z| c((-z.norm_sqr()).exp(), 0.0), &pairs, 0.5);
        assert!(s > 0.0 && s <= lip * 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn decay_fit_examples() {
        let d = disk();
        let f = PiecewiseField::new(d.clone(), Part::Zero, Part::func(|z| 1.0 / (z.conj() * z.conj())));
        let cst = decay_fit(&f, &[5.0, 10.0, 50.0]);
        assert!((cst - 1.0).abs() < 0.05, "{cst}");
        assert_eq!(decay_fit(&PiecewiseField::zero(d.clone()), &[5.0, 10.0]), 0.0);
        let slow = PiecewiseField::new(d, Part::Zero, Part::func(|z| 1.0 / z.conj()));
        assert!(decay_fit(&slow, &[5.0, 10.0, 50.0]).is_infinite());
    }

    #[test]
    fn slow_exterior_decay_is_rejected() {
        let slow = PiecewiseField::new(disk(), Part::Zero, Part::func(|z| 1.0 / z.conj()));
        assert!(matches!(triple_norm(&slow, Side::Exterior, &NormOptions::default()), Err(FieldError::DivergentTail { .. })));
    }

    #[test]
    fn exterior_lp_norm_closed_form() {
        // ∫_{|z|>1} |z|^{-2p} dm = 2π/(2p − 2)
        let f = PiecewiseField::new(disk(), Part::Zero, Part::func(|z| 1.0 / (z.conj() * z.conj())));
        for p in [4.0 / 3.0, 4.0] {
            let v = lp_norm(&f, Side::Exterior, p, 1e-9).unwrap();
            let exact = (TAU / (2.0 * p - 2.0)).powf(1.0 / p);
            assert!((v - exact).abs() < 1e-7, "{p}: {v} vs {exact}");
        }
    }

    #[test]
    fn boundary_compatibility_of_average() {
        let f = PiecewiseField::new(disk(), Part::func(|z| z), Part::func(|z| 1.0 / z.conj()));
        assert!(f.boundary_compatibility(64) < 1e-15);
    }
}
