//! The patch domain Ω: a simple, positively oriented closed curve given by a
//! truncated Fourier series, plus the metric queries the transforms need
//! (distance, projection, normals, local graphs, ray and circle crossings,
//! angle defects) and the tubular radius R₀.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("boundary curve is not simple (sampled chord {0:e})")]
    NotSimple(f64),
    #[error("boundary curve is negatively oriented")]
    NegativeOrientation,
    #[error("domain is not star-shaped about its center")]
    NotStarShaped,
    #[error("Hölder exponent must lie in (0, 1), got {0}")]
    InvalidGamma(f64),
    #[error("boundary is degenerate: {0}")]
    DegenerateBoundary(String),
    #[error("point is not on the boundary (distance {0:e})")]
    NotOnBoundary(f64),
}

/// `γ(θ) = Σ c_k e^{ikθ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCurve {
    modes: Vec<(i32, C64)>,
    kmax: usize,
}

impl FourierCurve {
    pub fn new(modes: Vec<(i32, C64)>) -> Self {
        let kmax = modes.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        Self { modes, kmax }
    }

    pub fn modes(&self) -> &[(i32, C64)] {
        &self.modes
    }

    pub fn point(&self, t: f64) -> C64 {
        self.eval3(t).0
    }

    /// Value, first and second derivative.
    pub fn eval3(&self, t: f64) -> (C64, C64, C64) {
        if self.modes.len() <= 4 {
            let mut p = C64::new(0.0, 0.0);
            let mut d1 = p;
            let mut d2 = p;
            for &(k, c) in &self.modes {
                let kf = k as f64;
                let term = c * C64::from_polar(1.0, kf * t);
                p += term;
                d1 += term * C64::new(0.0, kf);
                d2 -= term * (kf * kf);
            }
            return (p, d1, d2);
        }
        let e = C64::from_polar(1.0, t);
        let one = C64::new(1.0, 0.0);
        if self.kmax <= 64 {
            let mut pos = [one; 65];
            let mut neg = [one; 65];
            self.eval3_with(e, &mut pos[..=self.kmax], &mut neg[..=self.kmax])
        } else {
            let mut pos = vec![one; self.kmax + 1];
            let mut neg = vec![one; self.kmax + 1];
            self.eval3_with(e, &mut pos, &mut neg)
        }
    }

    fn eval3_with(&self, e: C64, pos: &mut [C64], neg: &mut [C64]) -> (C64, C64, C64) {
        let ei = e.conj();
        for k in 1..pos.len() {
            pos[k] = pos[k - 1] * e;
            neg[k] = neg[k - 1] * ei;
        }
        let mut p = C64::new(0.0, 0.0);
        let mut d1 = p;
        let mut d2 = p;
        for &(k, c) in &self.modes {
            let w = if k >= 0 { pos[k as usize] } else { neg[(-k) as usize] };
            let term = c * w;
            let kf = k as f64;
            p += term;
            d1 += term * C64::new(0.0, kf);
            d2 -= term * (kf * kf);
        }
        (p, d1, d2)
    }

    /// Enclosed signed area `π Σ k |c_k|²`.
    pub fn signed_area(&self) -> f64 {
        PI * self.modes.iter().map(|(k, c)| *k as f64 * c.norm_sqr()).sum::<f64>()
    }
}

impl crate::quadrature::ClosedCurve for FourierCurve {
    fn point(&self, t: f64) -> C64 {
        self.eval3(t).0
    }
    fn derivative(&self, t: f64) -> C64 {
        self.eval3(t).1
    }
}

/// Shapes with closed-form star coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disk { center: C64, radius: f64 },
    Ellipse { center: C64, a: f64, b: f64 },
    General,
}

/// Region labels used across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Interior,
    Exterior,
    Boundary,
}

/// Nearest-point projection onto ∂Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub tau: C64,
    pub theta: f64,
    pub distance: f64,
    /// Outward unit normal at `tau`.
    pub normal: C64,
    /// Two or more minimizers within tolerance.
    pub ambiguous: bool,
}

#[derive(Debug, Clone)]
struct Table {
    theta: Vec<f64>,
    p: Vec<C64>,
    d1: Vec<C64>,
    d2: Vec<C64>,
    star_arg: Vec<f64>,
}

/// The patch domain. Immutable after construction.
#[derive(Debug, Clone)]
pub struct PatchDomain {
    curve: FourierCurve,
    shape: Shape,
    center: C64,
    gamma: f64,
    r0: f64,
    r1: f64,
    kappa_max: f64,
    reach: f64,
    area: f64,
    diameter: f64,
    far_scale: f64,
    scale: f64,
    table: Table,
}

impl PatchDomain {
    pub fn disk(center: C64, radius: f64, gamma: f64) -> Result<Self, GeometryError> {
        let curve = FourierCurve::new(vec![(0, center), (1, C64::new(radius, 0.0))]);
        Self::build(curve, Shape::Disk { center, radius }, gamma)
    }

    pub fn unit_disk(gamma: f64) -> Self {
        Self::disk(C64::new(0.0, 0.0), 1.0, gamma).expect("unit disk")
    }

    /// Axis-aligned ellipse `center + a cos t + i b sin t`.
    pub fn ellipse(center: C64, a: f64, b: f64, gamma: f64) -> Result<Self, GeometryError> {
        let curve = FourierCurve::new(vec![
            (0, center),
            (1, C64::new(0.5 * (a + b), 0.0)),
            (-1, C64::new(0.5 * (a - b), 0.0)),
        ]);
        Self::build(curve, Shape::Ellipse { center, a, b }, gamma)
    }

    pub fn fourier(modes: Vec<(i32, C64)>, gamma: f64) -> Result<Self, GeometryError> {
        Self::build(FourierCurve::new(modes), Shape::General, gamma)
    }

    fn build(curve: FourierCurve, shape: Shape, gamma: f64) -> Result<Self, GeometryError> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(GeometryError::InvalidGamma(gamma));
        }
        let signed = curve.signed_area();
        if !signed.is_finite() || signed.abs() < 1e-14 {
            return Err(GeometryError::DegenerateBoundary("zero enclosed area".into()));
        }
        if signed < 0.0 {
            return Err(GeometryError::NegativeOrientation);
        }
        let n = (32 * curve.kmax).max(512).next_multiple_of(8);
        let mut table = Table { theta: vec![], p: vec![], d1: vec![], d2: vec![], star_arg: vec![] };
        for j in 0..n {
            let t = TAU * j as f64 / n as f64;
            let (p, d1, d2) = curve.eval3(t);
            table.theta.push(t);
            table.p.push(p);
            table.d1.push(d1);
            table.d2.push(d2);
        }

        let scale = table.p.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1e-300);
        let mut diameter: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                diameter = diameter.max((table.p[i] - table.p[j]).norm());
            }
        }
        if let Some(gap) = polygon_self_intersection(&table.p) {
            return Err(GeometryError::NotSimple(gap));
        }

        let center = match shape {
            Shape::Disk { center, .. } | Shape::Ellipse { center, .. } => center,
            Shape::General => curve.modes.iter().find(|(k, _)| *k == 0).map(|(_, c)| *c).unwrap_or_default(),
        };
        let star_ok = |c: C64| (0..4 * n).all(|j| {
            let (p, d1, _) = curve.eval3(TAU * j as f64 / (4 * n) as f64);
            ((p - c).conj() * d1).im > 0.0
        });
        let center = if star_ok(center) {
            center
        } else {
            let centroid = area_centroid(&table.p);
            if star_ok(centroid) {
                centroid
            } else {
                return Err(GeometryError::NotStarShaped);
            }
        };
        let mut prev = 0.0;
        for (j, p) in table.p.iter().enumerate() {
            let a = (p - center).arg();
            let a = if j == 0 { a } else { prev + wrap(a - prev) };
            table.star_arg.push(a);
            prev = a;
        }

        let mut dom = Self {
            curve,
            shape,
            center,
            gamma,
            r0: 0.0,
            r1: 0.0,
            kappa_max: 0.0,
            reach: 0.0,
            area: signed,
            diameter,
            far_scale: 0.0,
            scale,
            table,
        };
        let (r0, r1) = dom.compute_r0()?;
        dom.r0 = r0;
        dom.r1 = r1;
        dom.far_scale = scale + r0;
        Ok(dom)
    }

    pub fn curve(&self) -> &FourierCurve {
        &self.curve
    }
    pub fn shape(&self) -> Shape {
        self.shape
    }
    pub fn center(&self) -> C64 {
        self.center
    }
    pub fn holder_gamma(&self) -> f64 {
        self.gamma
    }
    pub fn r0(&self) -> f64 {
        self.r0
    }
    pub fn r1(&self) -> f64 {
        self.r1
    }
    pub fn area(&self) -> f64 {
        self.area
    }
    pub fn diameter(&self) -> f64 {
        self.diameter
    }
    /// `M = max{|w| : w ∈ closure(Ω ∪ U_{R₀})}`.
    pub fn far_scale(&self) -> f64 {
        self.far_scale
    }
    pub fn max_curvature(&self) -> f64 {
        self.kappa_max
    }
    pub fn reach(&self) -> f64 {
        self.reach
    }
    /// Length scale used for relative tolerances.
    pub fn length_scale(&self) -> f64 {
        self.scale.max(self.diameter)
    }

    pub fn boundary_point(&self, theta: f64) -> C64 {
        self.curve.point(theta)
    }

    pub fn tangent(&self, theta: f64) -> C64 {
        let d = self.curve.eval3(theta).1;
        d / d.norm()
    }

    /// Outward unit normal.
    pub fn normal(&self, theta: f64) -> C64 {
        self.tangent(theta) * C64::new(0.0, -1.0)
    }

    pub fn curvature(&self, theta: f64) -> f64 {
        let (_, d1, d2) = self.curve.eval3(theta);
        (d1.conj() * d2).im / d1.norm().powi(3)
    }

    // ---------------------------------------------------------------------
    // Star coordinates: z = c + ρ g(θ), g = γ − c.

    /// `(ρ, θ)` with `z = center + ρ (γ(θ) − center)`; ρ < 1 inside.
    pub fn star_coords(&self, z: C64) -> (f64, f64) {
        let w = z - self.center;
        match self.shape {
            Shape::Disk { radius, .. } => {
                let r = w.norm();
                if r == 0.0 {
                    return (0.0, 0.0);
                }
                (r / radius, w.arg().rem_euclid(TAU))
            }
            Shape::Ellipse { a, b, .. } => {
                let t = (a * w.im).atan2(b * w.re).rem_euclid(TAU);
                ((w.re / a).hypot(w.im / b), t)
            }
            Shape::General => {
                let r = w.norm();
                if r == 0.0 {
                    return (0.0, 0.0);
                }
                let t = self.star_angle(w);
                let g = self.curve.point(t) - self.center;
                (r / g.norm(), t)
            }
        }
    }

    fn star_angle(&self, w: C64) -> f64 {
        let sa = &self.table.star_arg;
        let n = sa.len();
        let base = sa[0];
        let phi = base + (w.arg() - base).rem_euclid(TAU);
        // sa is increasing on [base, base + 2π)
        let j = match sa.binary_search_by(|x| x.total_cmp(&phi)) {
            Ok(j) => j,
            Err(j) => j.saturating_sub(1),
        };
        let (a0, t0) = (sa[j], self.table.theta[j]);
        let (a1, t1) = if j + 1 < n { (sa[j + 1], self.table.theta[j + 1]) } else { (base + TAU, TAU) };
        let mut t = t0 + (t1 - t0) * (phi - a0) / (a1 - a0);
        for _ in 0..4 {
            let (p, d1, _) = self.curve.eval3(t);
            let g = p - self.center;
            let f = wrap(g.arg() - phi);
            let df = (g.conj() * d1).im / g.norm_sqr();
            let step = f / df;
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        t.rem_euclid(TAU)
    }

    pub fn from_star(&self, rho: f64, theta: f64) -> C64 {
        self.center + (self.curve.point(theta) - self.center) * rho
    }

    /// Interior test by star coordinate; exact up to rounding.
    pub fn is_inside(&self, z: C64) -> bool {
        self.star_coords(z).0 < 1.0
    }

    /// Winding number of the tabulated polygon around `z`.
    pub fn winding_number(&self, z: C64) -> f64 {
        let p = &self.table.p;
        let n = p.len();
        let mut acc = 0.0;
        for j in 0..n {
            let a = p[j] - z;
            let b = p[(j + 1) % n] - z;
            acc += (b / a).arg();
        }
        acc / TAU
    }

    // ---------------------------------------------------------------------
    // Root finding over the periodic parameter

    /// All roots in θ of `F(γ, γ', γ'')`, given also its θ-derivative
    /// `dF(γ, γ', γ'')`. Pairs of roots hiding inside one table cell are found
    /// by locating the interior extremum of F.
    fn periodic_roots<F, D>(&self, f: F, df: D, out: &mut Vec<f64>)
    where
        F: Fn(C64, C64, C64) -> f64,
        D: Fn(C64, C64, C64) -> f64,
    {
        out.clear();
        let t = &self.table;
        let n = t.theta.len();
        let fv: Vec<f64> = (0..n).map(|j| f(t.p[j], t.d1[j], t.d2[j])).collect();
        let dv: Vec<f64> = (0..n).map(|j| df(t.p[j], t.d1[j], t.d2[j])).collect();
        let ff = |th: f64| {
            let (p, d1, d2) = self.curve.eval3(th);
            f(p, d1, d2)
        };
        let dff = |th: f64| {
            let (p, d1, d2) = self.curve.eval3(th);
            df(p, d1, d2)
        };
        for j in 0..n {
            let k = (j + 1) % n;
            let a = t.theta[j];
            let b = if k == 0 { TAU } else { t.theta[k] };
            let (fa, fb) = (fv[j], fv[k]);
            if fa == 0.0 {
                out.push(a);
                continue;
            }
            if fa.signum() != fb.signum() && fb != 0.0 {
                out.push(illinois(&ff, a, b, fa, fb).rem_euclid(TAU));
            } else if dv[j].signum() != dv[k].signum() && fb != 0.0 {
                let ts = illinois(&dff, a, b, dv[j], dv[k]);
                let fs = ff(ts);
                if fs == 0.0 {
                    out.push(ts.rem_euclid(TAU));
                } else if fs.signum() != fa.signum() {
                    out.push(illinois(&ff, a, ts, fa, fs).rem_euclid(TAU));
                    out.push(illinois(&ff, ts, b, fs, fb).rem_euclid(TAU));
                }
            }
        }
    }

    /// Distances along the ray `z + r e` (|e| = 1, r > 0) at which it crosses ∂Ω, sorted.
    pub fn ray_crossings(&self, z: C64, e: C64, out: &mut Vec<f64>) {
        let conic = match self.shape {
            Shape::Disk { center, radius } => Some((center, radius, radius)),
            Shape::Ellipse { center, a, b } => Some((center, a, b)),
            Shape::General => None,
        };
        if let Some((c, a, b)) = conic {
            out.clear();
            let w = z - c;
            let (ex, ey) = (e.re / a, e.im / b);
            let (wx, wy) = (w.re / a, w.im / b);
            let qa = ex * ex + ey * ey;
            let qb = 2.0 * (wx * ex + wy * ey);
            let qc = wx * wx + wy * wy - 1.0;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc <= 0.0 {
                return;
            }
            let q = -0.5 * (qb + qb.signum() * disc.sqrt());
            let tiny = 1e-13 * self.scale;
            for r in [q / qa, qc / q] {
                if r > tiny {
                    out.push(r);
                }
            }
            out.sort_by(f64::total_cmp);
            return;
        }
        let ec = e.conj();
        let mut roots = Vec::with_capacity(8);
        self.periodic_roots(|p, _, _| (ec * (p - z)).im, |_, d1, _| (ec * d1).im, &mut roots);
        out.clear();
        let tiny = 1e-13 * self.scale;
        for th in roots {
            let r = (ec * (self.curve.point(th) - z)).re;
            if r > tiny {
                out.push(r);
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < tiny);
    }

    /// Absolute angles (in [0, 2π)) where the circle `|ζ − z| = r` meets ∂Ω.
    pub fn circle_crossings(&self, z: C64, r: f64) -> Vec<f64> {
        if let Shape::Disk { center, radius } = self.shape {
            let w = z - center;
            let m = w.norm();
            if m == 0.0 || r == 0.0 {
                return Vec::new();
            }
            let cs = (radius * radius - m * m - r * r) / (2.0 * r * m);
            if cs.abs() >= 1.0 {
                return Vec::new();
            }
            let base = w.arg();
            let off = cs.acos();
            return vec![(base + off).rem_euclid(TAU), (base - off).rem_euclid(TAU)];
        }
        let r2 = r * r;
        let mut roots = Vec::with_capacity(8);
        self.periodic_roots(|p, _, _| (p - z).norm_sqr() - r2, |p, d1, _| 2.0 * ((p - z).conj() * d1).re, &mut roots);
        roots.iter().map(|th| (self.curve.point(*th) - z).arg().rem_euclid(TAU)).collect()
    }

    /// Directions from `z` of rays tangent to ∂Ω.
    pub fn tangent_directions(&self, z: C64) -> Vec<f64> {
        let mut roots = Vec::new();
        self.periodic_roots(|p, d1, _| ((p - z).conj() * d1).im, |p, _, d2| ((p - z).conj() * d2).im, &mut roots);
        let tiny = 1e-12 * self.scale;
        roots
            .iter()
            .filter_map(|th| {
                let w = self.curve.point(*th) - z;
                (w.norm() > tiny).then(|| w.arg().rem_euclid(TAU))
            })
            .collect()
    }

    /// Parameters of critical points of `θ ↦ |γ(θ) − z|`.
    fn distance_critical(&self, z: C64) -> Vec<f64> {
        let mut roots = Vec::new();
        self.periodic_roots(
            |p, d1, _| ((p - z).conj() * d1).re,
            |p, d1, d2| d1.norm_sqr() + ((p - z).conj() * d2).re,
            &mut roots,
        );
        roots
    }

    /// Radii where circles about `z` become tangent to ∂Ω.
    pub fn critical_distances(&self, z: C64) -> Vec<f64> {
        let mut d: Vec<f64> = self.distance_critical(z).iter().map(|th| (self.curve.point(*th) - z).norm()).collect();
        d.sort_by(f64::total_cmp);
        d
    }

    // ---------------------------------------------------------------------
    // Metric queries

    pub fn nearest_boundary(&self, z: C64) -> Projection {
        if let Shape::Disk { center, radius } = self.shape {
            let w = z - center;
            let m = w.norm();
            let theta = if m == 0.0 { 0.0 } else { w.arg().rem_euclid(TAU) };
            let normal = C64::from_polar(1.0, theta);
            return Projection {
                tau: center + normal * radius,
                theta,
                distance: (m - radius).abs(),
                normal,
                ambiguous: m <= 1e-12 * radius,
            };
        }
        let t = &self.table;
        let mut best_j = 0;
        let mut best = f64::INFINITY;
        for (j, p) in t.p.iter().enumerate() {
            let d = (p - z).norm_sqr();
            if d < best {
                best = d;
                best_j = j;
            }
        }
        let mut cands: Vec<(f64, f64)> = self
            .distance_critical(z)
            .into_iter()
            .filter(|th| {
                let (p, d1, d2) = self.curve.eval3(*th);
                d1.norm_sqr() + ((p - z).conj() * d2).re >= 0.0
            })
            .map(|th| ((self.curve.point(th) - z).norm(), th))
            .collect();
        if cands.is_empty() {
            cands.push(((t.p[best_j] - z).norm(), t.theta[best_j]));
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (distance, theta) = cands[0];
        let tol = 1e-9 * (self.scale + distance);
        let degenerate = {
            let (lo, hi) = t.p.iter().map(|p| (p - z).norm()).fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
            hi - lo < tol
        };
        let h = TAU / t.theta.len() as f64;
        let ambiguous = degenerate
            || cands.iter().skip(1).any(|(d, th)| *d - distance < tol && wrap(th - theta).abs() > 2.0 * h);
        Projection { tau: self.curve.point(theta), theta, distance, normal: self.normal(theta), ambiguous }
    }

    /// Negative inside, positive outside.
    pub fn signed_distance(&self, z: C64) -> f64 {
        let d = self.nearest_boundary(z).distance;
        if self.is_inside(z) {
            -d
        } else {
            d
        }
    }

    /// `δ(z) = max{d(z), R₀/2}`.
    pub fn delta(&self, z: C64) -> f64 {
        self.delta_from_distance(self.nearest_boundary(z).distance)
    }

    pub fn delta_from_distance(&self, d: f64) -> f64 {
        d.max(0.5 * self.r0)
    }

    /// `Δ(z) = max{|z|², d(z)²}`.
    pub fn big_delta(&self, z: C64) -> f64 {
        let d = self.nearest_boundary(z).distance;
        z.norm_sqr().max(d * d)
    }

    pub fn region_classify(&self, z: C64, band: f64) -> Side {
        classify_signed(self.signed_distance(z), band)
    }

    /// `∫ e^{2iφ} dφ` over the arcs of `|ζ − z| = r` lying inside Ω.
    pub fn inside_arc_moment(&self, z: C64, r: f64) -> C64 {
        let mut a = self.circle_crossings(z, r);
        if a.is_empty() {
            return C64::new(0.0, 0.0);
        }
        a.sort_by(f64::total_cmp);
        let mut acc = C64::new(0.0, 0.0);
        let m = a.len();
        for i in 0..m {
            let lo = a[i];
            let hi = if i + 1 < m { a[i + 1] } else { a[0] + TAU };
            let mid = 0.5 * (lo + hi);
            if self.is_inside(z + C64::from_polar(r, mid)) {
                acc += (C64::from_polar(1.0, 2.0 * hi) - C64::from_polar(1.0, 2.0 * lo)) / C64::new(0.0, 2.0);
            }
        }
        acc
    }

    /// Normalized angle defect `ϑ(z; r) = r^{−γ} ∫_{arcs in Ω} e^{2iφ} dφ` at a boundary point.
    pub fn theta_angles(&self, z: C64, r: f64) -> Result<C64, GeometryError> {
        let d = self.nearest_boundary(z).distance;
        if d > 1e-8 * self.length_scale() {
            return Err(GeometryError::NotOnBoundary(d));
        }
        Ok(self.inside_arc_moment(z, r) / r.powf(self.gamma))
    }

    /// Local graph `φ_{z₀}(s)`: the boundary point with tangential offset `s`
    /// from `γ(θ₀)` sits at `z₀ + s T + φ(s) N` (N outward).
    pub fn local_graph(&self, theta0: f64, s: f64) -> Option<f64> {
        let (z0, d1, _) = self.curve.eval3(theta0);
        let tan = d1 / d1.norm();
        let nor = tan * C64::new(0.0, -1.0);
        let g = |th: f64| (tan.conj() * (self.curve.point(th) - z0)).re - s;
        let speed = d1.norm();
        let span = (2.0 * s.abs() / speed).max(1e-12);
        let (a, b) = if s >= 0.0 { (theta0, theta0 + span) } else { (theta0 - span, theta0) };
        let (ga, gb) = (g(a), g(b));
        if ga.signum() == gb.signum() && ga != 0.0 && gb != 0.0 {
            return None;
        }
        let th = illinois(&g, a, b, ga, gb);
        Some((nor.conj() * (self.curve.point(th) - z0)).re)
    }

    /// Tubular radius `R₀` (reach, capped at 1) and graph radius `R₁`.
    pub fn compute_r0(&mut self) -> Result<(f64, f64), GeometryError> {
        let n = self.table.theta.len();
        let fine = 4 * n;
        let kappa = |t: f64| self.curvature(t).abs();
        let mut jmax = 0;
        let mut kmax = 0.0;
        for j in 0..fine {
            let k = kappa(TAU * j as f64 / fine as f64);
            if k > kmax {
                kmax = k;
                jmax = j;
            }
        }
        let h = TAU / fine as f64;
        let (mut a, mut b) = (TAU * jmax as f64 / fine as f64 - h, TAU * jmax as f64 / fine as f64 + h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if kappa(c) > kappa(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let kmax = kmax.max(kappa(0.5 * (a + b)));
        if !kmax.is_finite() {
            return Err(GeometryError::DegenerateBoundary("curvature not finite".into()));
        }

        // narrowest double normal
        let t = &self.table;
        let mut neck = f64::INFINITY;
        for i in 0..n {
            let ti = t.d1[i] / t.d1[i].norm();
            for j in i + 1..n {
                let c = t.p[j] - t.p[i];
                let len = c.norm();
                if len <= 0.0 {
                    continue;
                }
                let tj = t.d1[j] / t.d1[j].norm();
                let ch = c / len;
                let e = (ch.conj() * ti).re.abs().max((ch.conj() * tj).re.abs());
                if e < 0.02 {
                    // chord of a near-double-normal pair, corrected to first order
                    neck = neck.min(len / (1.0 - e * e).sqrt());
                }
            }
        }
        let curv_radius = if kmax > 0.0 { 1.0 / kmax } else { f64::INFINITY };
        let reach = curv_radius.min(0.5 * neck);
        if !reach.is_finite() || reach <= 0.0 {
            return Err(GeometryError::DegenerateBoundary("reach estimate failed".into()));
        }
        self.kappa_max = kmax;
        self.reach = reach;
        let r0 = reach.min(1.0);
        let r1 = if kmax > 0.0 { r0.min(0.7 / kmax) } else { r0 };
        Ok((r0, r1))
    }
}

pub fn classify_signed(sd: f64, band: f64) -> Side {
    if sd.abs() <= band {
        Side::Boundary
    } else if sd < 0.0 {
        Side::Interior
    } else {
        Side::Exterior
    }
}

/// Wrap an angle difference into (−π, π].
pub fn wrap(a: f64) -> f64 {
    let mut x = a.rem_euclid(TAU);
    if x > PI {
        x -= TAU;
    }
    x
}

/// First pair of non-adjacent polygon edges that intersect, reported as the
/// distance between their start points.
fn polygon_self_intersection(p: &[C64]) -> Option<f64> {
    let n = p.len();
    let cross = |a: C64, b: C64| a.re * b.im - a.im * b.re;
    for i in 0..n {
        let (a0, a1) = (p[i], p[(i + 1) % n]);
        let (lo_x, hi_x) = (a0.re.min(a1.re), a0.re.max(a1.re));
        let (lo_y, hi_y) = (a0.im.min(a1.im), a0.im.max(a1.im));
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (b0, b1) = (p[j], p[(j + 1) % n]);
            if b0.re.max(b1.re) < lo_x || b0.re.min(b1.re) > hi_x || b0.im.max(b1.im) < lo_y || b0.im.min(b1.im) > hi_y {
                continue;
            }
            let d1 = cross(a1 - a0, b0 - a0);
            let d2 = cross(a1 - a0, b1 - a0);
            let d3 = cross(b1 - b0, a0 - b0);
            let d4 = cross(b1 - b0, a1 - b0);
            if d1 * d2 <= 0.0 && d3 * d4 <= 0.0 {
                return Some((a0 - b0).norm());
            }
        }
    }
    None
}

fn area_centroid(p: &[C64]) -> C64 {
    let n = p.len();
    let mut a = 0.0;
    let mut c = C64::new(0.0, 0.0);
    for j in 0..n {
        let (u, v) = (p[j], p[(j + 1) % n]);
        let cr = u.re * v.im - v.re * u.im;
        a += cr;
        c += (u + v) * cr;
    }
    c / (3.0 * a)
}

/// Illinois false position on a bracket with a sign change.
pub(crate) fn illinois<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut side = 0;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c.is_finite() && c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() < 4.0 * f64::EPSILON * (1.0 + c.abs()) {
            return c;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ellipse() -> PatchDomain {
        PatchDomain::ellipse(c(0.0, 0.0), 2.0, 1.0, 0.5).unwrap()
    }

    // brute-force nearest point on a dense sample, the oracle for projections
    fn dense_distance(d: &PatchDomain, z: C64) -> (f64, f64) {
        let n = 200_000;
        (0..n)
            .map(|j| {
                let t = TAU * j as f64 / n as f64;
                ((d.boundary_point(t) - z).norm(), t)
            })
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
    }

    #[test]
    fn signed_distance_examples() {
        let d = PatchDomain::unit_disk(0.5);
        assert!((d.signed_distance(c(0.5, 0.0)) + 0.5).abs() < 1e-12);
        assert!((d.signed_distance(c(2.0, 0.0)) - 1.0).abs() < 1e-12);
        let e = ellipse();
        let (dd, _) = dense_distance(&e, c(0.0, 0.0));
        assert!((dd - 1.0).abs() < 1e-9);
        assert!((e.signed_distance(c(0.0, 0.0)) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn nearest_boundary_examples() {
        let d = PatchDomain::unit_disk(0.5);
        let p = d.nearest_boundary(c(2.0, 0.0));
        assert!((p.tau - c(1.0, 0.0)).norm() < 1e-12);
        assert!((p.distance - 1.0).abs() < 1e-12);
        assert!((p.normal - c(1.0, 0.0)).norm() < 1e-12);
        assert!(!p.ambiguous);
        let p = d.nearest_boundary(c(0.0, 0.3));
        assert!((p.tau - c(0.0, 1.0)).norm() < 1e-12);
        assert!((p.distance - 0.7).abs() < 1e-12);
        assert!((p.normal - c(0.0, 1.0)).norm() < 1e-12);
        assert!(d.nearest_boundary(c(0.0, 0.0)).ambiguous);

        let e = ellipse();
        let p = e.nearest_boundary(c(1.9, 0.0));
        assert!((p.tau - c(2.0, 0.0)).norm() < 1e-10);
        assert!((p.distance - 0.1).abs() < 1e-12);
        let z = c(0.7, 1.6);
        let (dd, _) = dense_distance(&e, z);
        assert!((e.nearest_boundary(z).distance - dd).abs() < 1e-9);
        assert!(e.nearest_boundary(c(0.0, 0.0)).ambiguous);
    }

    #[test]
    fn projection_is_idempotent() {
        let e = ellipse();
        for k in 0..40 {
            let tau = e.boundary_point(0.157 * k as f64);
            let p = e.nearest_boundary(tau);
            assert!((p.tau - tau).norm() < 1e-12);
            assert!(p.distance < 1e-12);
        }
    }

    #[test]
    fn delta_and_classification() {
        let e = ellipse();
        assert!((e.r0() - 0.5).abs() < 1e-9);
        assert!((e.delta(c(1.9, 0.0)) - 0.25).abs() < 1e-9);
        assert!((e.delta_from_distance(0.8) - 0.8).abs() < 1e-15);
        assert!((e.delta(e.boundary_point(1.0)) - 0.25).abs() < 1e-9);
        let d = PatchDomain::unit_disk(0.5);
        assert_eq!(d.region_classify(c(0.5, 0.0), 1e-9), Side::Interior);
        assert_eq!(d.region_classify(d.boundary_point(0.3), 1e-9), Side::Boundary);
        assert_eq!(d.region_classify(c(5.0, 0.0), 1e-9), Side::Exterior);
        assert!((d.big_delta(c(3.0, 0.0)) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn r0_examples() {
        let d = PatchDomain::unit_disk(0.5);
        assert!(d.r0() <= 1.0 && d.r0() > 0.99);
        let d3 = PatchDomain::disk(c(0.0, 0.0), 3.0, 0.5).unwrap();
        assert_eq!(d3.r0(), 1.0);
        let e = ellipse();
        assert!(e.r0() <= 0.5 + 1e-12);
        assert!(e.r1() <= e.r0());
    }

    #[test]
    fn r0_projection_single_valued_on_grid() {
        let d = PatchDomain::unit_disk(0.5);
        let r0 = d.r0();
        let mut count = 0;
        for i in 0..100 {
            for j in 0..100 {
                let z = c(-2.0 + 4.0 * i as f64 / 99.0, -2.0 + 4.0 * j as f64 / 99.0);
                let p = d.nearest_boundary(z);
                if p.distance < 0.999 * r0 {
                    count += 1;
                    assert!(!p.ambiguous, "{z}");
                }
            }
        }
        assert!(count > 1000);
    }

    #[test]
    fn theta_angles_disk_matches_circle_intersection() {
        let d = PatchDomain::unit_disk(0.5);
        for th in [0.0, 0.7, 2.5] {
            let z = d.boundary_point(th);
            let r = 0.2f64;
            let a = (r / 2.0).asin();
            let expect = C64::from_polar(1.0, 2.0 * th) * (2.0 * a).sin() / r.sqrt();
            let v = d.theta_angles(z, r).unwrap();
            assert!((v - expect).norm() < 1e-12, "{v} vs {expect}");
        }
        assert!(matches!(d.theta_angles(c(0.5, 0.0), 0.1), Err(GeometryError::NotOnBoundary(_))));
    }

    #[test]
    fn theta_angles_vanish_on_locally_flat_boundary() {
        // a wide ellipse is locally flat near its co-vertex relative to the probe radius
        let e = PatchDomain::ellipse(c(0.0, 0.0), 1.0e3, 1.0, 0.5).unwrap();
        let z = e.boundary_point(0.5 * PI);
        let v = e.theta_angles(z, 1e-3).unwrap();
        assert!(v.norm() < 1e-5, "{v}");
    }

    #[test]
    fn theta_angles_decay_with_r() {
        let e = ellipse();
        let z = e.boundary_point(0.4);
        let v1 = e.theta_angles(z, 1e-2).unwrap().norm();
        let v2 = e.theta_angles(z, 1e-3).unwrap().norm();
        // ϑ ≈ κ r^{1−γ}: ten times smaller r gives √10 smaller value
        assert!((v1 / v2 - 10f64.sqrt()).abs() < 0.05, "{}", v1 / v2);
    }

    #[test]
    fn local_graph_lies_on_boundary() {
        let e = ellipse();
        for k in 0..12 {
            let th = 0.5 * k as f64;
            let z0 = e.boundary_point(th);
            let tan = e.tangent(th);
            let nor = e.normal(th);
            assert!(e.local_graph(th, 0.0).unwrap().abs() < 1e-14);
            for s in [-0.1, -0.03, 0.05, 0.12] {
                let phi = e.local_graph(th, s).unwrap();
                let p = z0 + tan * s + nor * phi;
                assert!(e.nearest_boundary(p).distance < 1e-10);
                // C^{1,1} curve: |φ| ≤ κ_max s²
                assert!(phi.abs() <= e.max_curvature() * s * s + 1e-12);
            }
        }
    }

    #[test]
    fn ray_and_circle_crossings() {
        let d = PatchDomain::unit_disk(0.5);
        let mut out = vec![];
        d.ray_crossings(c(0.5, 0.0), c(1.0, 0.0), &mut out);
        assert_eq!(out.len(), 1);
        assert!((out[0] - 0.5).abs() < 1e-12);
        d.ray_crossings(c(-2.0, 0.0), c(1.0, 0.0), &mut out);
        assert_eq!(out.len(), 2);
        assert!((out[0] - 1.0).abs() < 1e-12 && (out[1] - 3.0).abs() < 1e-12);
        // grazing ray: both crossings within one table cell
        d.ray_crossings(c(-2.0, 0.999_999), c(1.0, 0.0), &mut out);
        assert_eq!(out.len(), 2);
        let half = (1.0f64 - 0.999_999f64.powi(2)).sqrt();
        assert!((out[0] - (2.0 - half)).abs() < 1e-9);
        // small circle around a boundary point
        let a = d.circle_crossings(c(1.0, 0.0), 1e-4);
        assert_eq!(a.len(), 2);
        let e = ellipse();
        let dirs = e.tangent_directions(c(0.0, 3.0));
        assert_eq!(dirs.len(), 2);
        assert!(e.tangent_directions(c(0.1, 0.2)).is_empty());
    }

    #[test]
    fn star_coordinates_roundtrip_general_shape() {
        let dom = PatchDomain::fourier(vec![(0, c(0.1, 0.0)), (1, c(1.0, 0.0)), (-2, c(0.1, 0.05)), (3, c(0.03, 0.0))], 0.5).unwrap();
        for k in 0..50 {
            let rho = 0.05 + 0.04 * k as f64;
            let th = 0.37 * k as f64 % TAU;
            let z = dom.from_star(rho, th);
            let (r2, t2) = dom.star_coords(z);
            assert!((r2 - rho).abs() < 1e-12, "{rho} {r2}");
            assert!(wrap(t2 - th).abs() < 1e-11);
            assert_eq!(dom.is_inside(z), rho < 1.0);
            let w = dom.winding_number(z);
            assert!((w - if rho < 1.0 { 1.0 } else { 0.0 }).abs() < 1e-9 || (rho - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(matches!(PatchDomain::fourier(vec![(-1, c(1.0, 0.0))], 0.5), Err(GeometryError::NegativeOrientation)));
        assert!(matches!(PatchDomain::unit_disk(0.5).clone().holder_gamma(), g if g == 0.5));
        assert!(matches!(PatchDomain::disk(c(0.0, 0.0), 1.0, 1.0), Err(GeometryError::InvalidGamma(_))));
        // limaçon with an inner loop crosses itself at the origin
        let r = PatchDomain::fourier(vec![(0, c(1.0, 0.0)), (1, c(1.0, 0.0)), (2, c(1.0, 0.0))], 0.5);
        assert!(matches!(r, Err(GeometryError::NotSimple(_))));
    }

    #[test]
    fn area_and_far_scale() {
        let e = ellipse();
        assert!((e.area() - 2.0 * PI).abs() < 1e-12);
        assert!((e.diameter() - 4.0).abs() < 1e-9);
        assert!((e.far_scale() - 2.5).abs() < 1e-9);
    }
}
