//! Time-power-series coefficients of the flow `ψ(z,t) = Σ ξ^(s)(z) t^s`.
//!
//! Writing `θ^(s) = ∂_z ξ^(s)` and `η^(s) = ∂_z̄ ξ^(s) = B̄[θ^(s)]`, the flow
//! equation `ψ_tz ψ̄_z − ψ_tz̄ ψ̄_z̄ = ϖ₀(1 + a t)` gives, order by order,
//!
//! ```text
//! θ^(1) = ϖ₀
//! θ^(s+1) = [a^(s) − Σ_{k=0}^{s−1} (k+1)(θ^(k+1) conj θ^(s−k) − η^(k+1) conj η^(s−k))] / (s+1)
//! ξ^(s) = C̄[θ^(s)]
//! ```
//!
//! Products are taken pointwise on each side of ∂Ω. The quadrature path
//! works on a fixed collocation mesh per side; on disks the analytic path
//! keeps every coefficient as an exact radial Laurent series.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{triple_norm, FieldError, MeshPart, MeshSpec, NormOptions, Part, PiecewiseField, TripleNorm};
use crate::geometry::{PatchDomain, Side};
use crate::quadrature::QuadratureSpec;
use crate::majorant::{MajorantError, MajorantState};
use crate::transforms::{BackendMode, EngineOptions, RadialLaurent, TransformBackend, TransformError};
use crate::{Parallelism, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Majorant(#[from] MajorantError),
    #[error("order {order}: {side:?} norm {measured:.4e} exceeds twice the majorant {bound:.4e}")]
    NormBlowup { order: usize, side: Side, measured: f64, bound: f64 },
    #[error("invalid order {0}")]
    InvalidOrder(usize),
}

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioKind {
    Euler,
    AggregationConsistent,
    AggregationPaperForm,
    CustomAnalytic,
}

pub type Generator = Arc<dyn Fn(usize) -> PiecewiseField + Send + Sync>;

/// Right-hand side `ϖ₀(z)(1 + a(z,t) t) = Σ_s a^(s)(z) t^s` with `a^(0) = ϖ₀`.
#[derive(Clone)]
pub struct ScenarioRHS {
    pub kind: ScenarioKind,
    /// `ω̂` (Euler) or `c` (aggregation).
    pub amplitude: f64,
    pub varpi0: PiecewiseField,
    generator: Option<Generator>,
}

impl std::fmt::Debug for ScenarioRHS {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScenarioRHS").field("kind", &self.kind).field("amplitude", &self.amplitude).finish()
    }
}

impl ScenarioRHS {
    /// Vorticity `ω̂ χ_Ω`; the flow equation sees `ϖ₀ = ½ i ω̂ χ_Ω`.
    pub fn euler(domain: Arc<PatchDomain>, omega_hat: f64) -> Self {
        Self {
            kind: ScenarioKind::Euler,
            amplitude: omega_hat,
            varpi0: PiecewiseField::indicator(domain, C64::new(0.0, 0.5 * omega_hat)),
            generator: None,
        }
    }

    /// Density `c χ_Ω` with velocity `−½ C̄[ρ]`: `ϖ₀ = −(c/2) χ_Ω`, time-constant RHS.
    pub fn aggregation_consistent(domain: Arc<PatchDomain>, c: f64) -> Self {
        Self {
            kind: ScenarioKind::AggregationConsistent,
            amplitude: c,
            varpi0: PiecewiseField::indicator(domain, C64::new(-0.5 * c, 0.0)),
            generator: None,
        }
    }

    /// The `(c/2)(1 − ct)^{−3}` right-hand side with a cubic collapse rate; not consistent
    /// with the transport law under a single velocity convention.
    pub fn aggregation_paper(domain: Arc<PatchDomain>, c: f64) -> Self {
        Self {
            kind: ScenarioKind::AggregationPaperForm,
            amplitude: c,
            varpi0: PiecewiseField::indicator(domain, C64::new(0.5 * c, 0.0)),
            generator: None,
        }
    }

    /// User datum with `a^(s)` supplied by `generator(s)` for `s ≥ 1`.
    pub fn custom<G: Fn(usize) -> PiecewiseField + Send + Sync + 'static>(varpi0: PiecewiseField, generator: G) -> Self {
        Self { kind: ScenarioKind::CustomAnalytic, amplitude: 1.0, varpi0, generator: Some(Arc::new(generator)) }
    }

    pub fn domain(&self) -> &Arc<PatchDomain> {
        self.varpi0.domain()
    }

    /// `a^(s) / ϖ₀` for the built-in kinds.
    pub fn rhs_factor(&self, s: usize) -> Option<f64> {
        match self.kind {
            ScenarioKind::Euler | ScenarioKind::AggregationConsistent => Some(if s == 0 { 1.0 } else { 0.0 }),
            ScenarioKind::AggregationPaperForm => {
                let n = s as f64;
                Some(0.5 * (n + 1.0) * (n + 2.0) * self.amplitude.powi(s as i32))
            }
            ScenarioKind::CustomAnalytic => None,
        }
    }

    /// `a^(s)` as a field (`s = 0` gives `ϖ₀`).
    pub fn rhs_coeff(&self, s: usize) -> PiecewiseField {
        if s == 0 {
            return self.varpi0.clone();
        }
        match (&self.generator, self.rhs_factor(s)) {
            (Some(g), _) => g(s),
            (None, Some(f)) if f == 0.0 => PiecewiseField::zero(self.domain().clone()),
            (None, Some(f)) => self.varpi0.scaled(C64::new(f, 0.0)),
            (None, None) => unreachable!("custom scenarios carry a generator"),
        }
    }

    /// `Σ_s a^(s)(z) t^s` on the given side.
    pub fn rhs_value(&self, side: Side, z: C64, t: f64) -> C64 {
        let w0 = self.varpi0.side_value(side, z);
        match self.kind {
            ScenarioKind::Euler | ScenarioKind::AggregationConsistent => w0,
            ScenarioKind::AggregationPaperForm => w0 / (1.0 - self.amplitude * t).powi(3),
            ScenarioKind::CustomAnalytic => {
                let mut acc = w0;
                let mut tp = 1.0;
                for s in 1..=60 {
                    tp *= t;
                    let term = self.rhs_coeff(s).side_value(side, z) * tp;
                    acc += term;
                    if term.norm() < 1e-17 * (1.0 + acc.norm()) {
                        break;
                    }
                }
                acc
            }
        }
    }
}

/// How coefficients are computed and checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub mode: BackendMode,
    pub mesh: MeshSpec,
    pub engine: EngineOptions,
    pub parallelism: Parallelism,
    /// Per-order triple norms when set.
    pub norms: Option<NormOptions>,
    /// Abort with `NormBlowup` when a norm exceeds twice the majorant built with this `K`.
    pub blowup_k: Option<f64>,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            mode: BackendMode::Quadrature,
            mesh: MeshSpec { n_radial: 12, n_theta: 24, stencil: 24 },
            engine: EngineOptions { spec: QuadratureSpec { abs_tol: 1e-9, rel_tol: 1e-7, ..Default::default() }, ..Default::default() },
            parallelism: Parallelism::default(),
            norms: None,
            blowup_k: None,
        }
    }
}

impl SeriesConfig {
    pub fn analytic() -> Self {
        Self { mode: BackendMode::AnalyticDisk, ..Default::default() }
    }

    fn backend(&self, domain: &Arc<PatchDomain>) -> Result<TransformBackend, TransformError> {
        let b = match self.mode {
            BackendMode::Quadrature => TransformBackend::quadrature(domain.clone(), self.engine.spec).with_options(self.engine),
            BackendMode::AnalyticDisk => TransformBackend::analytic_disk(domain.clone())?,
        };
        Ok(b.with_parallelism(self.parallelism))
    }
}

/// Node values on the interior and exterior meshes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeValues {
    pub theta: [Vec<C64>; 2],
    pub eta: [Vec<C64>; 2],
    pub xi: [Vec<C64>; 2],
}

/// Exact profiles on a disk: `θ`, and `g`, `h` with `η = (w/w̄) g`, `ξ = w h`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCoefficient {
    pub theta: RadialLaurent,
    pub g: RadialLaurent,
    pub h: RadialLaurent,
}

/// One order of the series.
#[derive(Debug, Clone)]
pub struct SeriesCoefficients {
    pub order: usize,
    /// `θ^(s) = ∂_z ξ^(s)`.
    pub theta: PiecewiseField,
    /// `η^(s) = ∂_z̄ ξ^(s) = B̄[θ^(s)]`.
    pub eta: PiecewiseField,
    /// `ξ^(s) = C̄[θ^(s)]`, same value on both sides of ∂Ω.
    pub xi: PiecewiseField,
    /// Interior and exterior triple norms of `θ^(s)`.
    pub triple_norms: Option<(TripleNorm, TripleNorm)>,
    pub nodes: Option<NodeValues>,
    pub radial: Option<RadialCoefficient>,
}

impl SeriesCoefficients {
    /// `ξ^(0)(z) = z`.
    pub fn identity(domain: Arc<PatchDomain>) -> Self {
        let id = PiecewiseField::new(domain.clone(), Part::func(|z| z), Part::func(|z| z));
        let one = PiecewiseField::new(domain.clone(), Part::Constant(C64::new(1.0, 0.0)), Part::Constant(C64::new(1.0, 0.0)));
        Self { order: 0, theta: one, eta: PiecewiseField::zero(domain), xi: id, triple_norms: None, nodes: None, radial: None }
    }

    /// `(ξ, θ, η)` at `z`, using `side` for the one-sided quantities.
    pub fn values(&self, side: Side, z: C64) -> (C64, C64, C64) {
        let s = match side {
            Side::Boundary => Side::Interior,
            s => s,
        };
        (self.xi.side_value(s, z), self.theta.side_value(side, z), self.eta.side_value(side, z))
    }
}

/// A built series.
#[derive(Debug, Clone)]
pub struct Series {
    pub scenario: ScenarioRHS,
    pub config: SeriesConfig,
    /// Orders `0..=S`.
    pub coeffs: Vec<SeriesCoefficients>,
}

impl Series {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn domain(&self) -> &Arc<PatchDomain> {
        self.scenario.domain()
    }
}

// ---------------------------------------------------------------------------

fn node_sets(domain: &PatchDomain, mesh: &MeshSpec) -> [Vec<C64>; 2] {
    [MeshPart::node_positions(domain, Side::Interior, mesh), MeshPart::node_positions(domain, Side::Exterior, mesh)]
}

/// Constant parts are recognized so the transform can integrate them in closed form.
fn part_from_values(domain: &Arc<PatchDomain>, side: Side, mesh: MeshSpec, values: Vec<C64>, scale: f64, detect_constant: bool, decay: u32) -> Part {
    if values.iter().all(|v| *v == ZERO) {
        return Part::Zero;
    }
    if detect_constant {
        let mean = values.iter().sum::<C64>() / values.len() as f64;
        let spread = values.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
        if spread <= 1e-11 * scale {
            return if mean.norm() <= 1e-14 * scale { Part::Zero } else { Part::Constant(mean) };
        }
    }
    Part::Mesh(Arc::new(MeshPart::from_values(domain.clone(), side, mesh, values).with_decay(decay)))
}

/// Exterior parts are given their decay at infinity (`θ`, `η` like `|z|^{−2}`,
/// `ξ` like `|z|^{−1}`); quadrature noise would otherwise leave a constant
/// there, which breaks the next transform of `θ` and every norm.
fn field_from_nodes(domain: &Arc<PatchDomain>, mesh: MeshSpec, v: &[Vec<C64>; 2], is_theta: bool, decay: u32) -> PiecewiseField {
    let scale = v.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
    PiecewiseField::new(
        domain.clone(),
        part_from_values(domain, Side::Interior, mesh, v[0].clone(), scale, is_theta, 0),
        part_from_values(domain, Side::Exterior, mesh, v[1].clone(), scale, is_theta, decay),
    )
}

fn radial_fields(domain: &Arc<PatchDomain>, r: &RadialCoefficient) -> (PiecewiseField, PiecewiseField, PiecewiseField) {
    let theta = r.theta.to_field(domain.clone());
    let side_part = |prof: &RadialLaurent, side: Side, beurling: bool| -> Part {
        let empty = match side {
            Side::Interior => prof.interior.is_empty(),
            _ => prof.exterior.is_empty(),
        };
        if empty {
            return Part::Zero;
        }
        let p = prof.clone();
        if beurling {
            Part::func(move |z| {
                let w = z - p.center;
                if w == ZERO {
                    ZERO
                } else {
                    (w / w.conj()) * p.eval_side(side, z)
                }
            })
        } else {
            Part::func(move |z| (z - p.center) * p.eval_side(side, z))
        }
    };
    let eta = PiecewiseField::new(domain.clone(), side_part(&r.g, Side::Interior, true), side_part(&r.g, Side::Exterior, true));
    let xi = PiecewiseField::new(domain.clone(), side_part(&r.h, Side::Interior, false), side_part(&r.h, Side::Exterior, false));
    (theta, eta, xi)
}

fn finish(
    order: usize,
    domain: &Arc<PatchDomain>,
    cfg: &SeriesConfig,
    theta_nodes: Option<[Vec<C64>; 2]>,
    theta_radial: Option<RadialLaurent>,
) -> Result<SeriesCoefficients, SeriesError> {
    let mut out = if let Some(th) = theta_radial {
        let rc = RadialCoefficient { g: th.beurling_profile()?, h: th.cauchy_profile()?, theta: th };
        let (theta, eta, xi) = radial_fields(domain, &rc);
        SeriesCoefficients { order, theta, eta, xi, triple_norms: None, nodes: None, radial: Some(rc) }
    } else {
        let tv = theta_nodes.expect("quadrature path carries node values");
        let theta = field_from_nodes(domain, cfg.mesh, &tv, true, 2);
        let backend = cfg.backend(domain)?;
        let mut xi = [Vec::new(), Vec::new()];
        let mut eta = [Vec::new(), Vec::new()];
        let nodes = node_sets(domain, &cfg.mesh);
        for side in 0..2 {
            for r in backend.eval_many(&theta, &nodes[side]) {
                let (c, b) = r?;
                xi[side].push(c);
                eta[side].push(b);
            }
        }
        let eta_f = field_from_nodes(domain, cfg.mesh, &eta, false, 2);
        let xi_f = field_from_nodes(domain, cfg.mesh, &xi, false, 1);
        SeriesCoefficients { order, theta, eta: eta_f, xi: xi_f, triple_norms: None, nodes: Some(NodeValues { theta: tv, eta, xi }), radial: None }
    };
    if let Some(opt) = &cfg.norms {
        let ni = triple_norm(&out.theta, Side::Interior, opt)?;
        let ne = triple_norm(&out.theta, Side::Exterior, opt)?;
        out.triple_norms = Some((ni, ne));
    }
    Ok(out)
}

/// `θ^(1) = ϖ₀`, `η^(1) = B̄[ϖ₀]`, `ξ^(1) = C̄[ϖ₀]`.
pub fn first_order(scn: &ScenarioRHS, cfg: &SeriesConfig) -> Result<SeriesCoefficients, SeriesError> {
    let domain = scn.domain();
    match cfg.mode {
        BackendMode::AnalyticDisk => finish(1, domain, cfg, None, Some(RadialLaurent::from_field(&scn.varpi0)?)),
        BackendMode::Quadrature => {
            let nodes = node_sets(domain, &cfg.mesh);
            let tv = [
                nodes[0].iter().map(|z| scn.varpi0.interior_value(*z)).collect(),
                nodes[1].iter().map(|z| scn.varpi0.exterior_value(*z)).collect(),
            ];
            finish(1, domain, cfg, Some(tv), None)
        }
    }
}

/// Order `s + 1` from `history[k]` = order `k + 1`, `k < s`.
pub fn recursion_step(history: &[SeriesCoefficients], scn: &ScenarioRHS, cfg: &SeriesConfig) -> Result<SeriesCoefficients, SeriesError> {
    let s = history.len();
    if s == 0 {
        return Err(SeriesError::InvalidOrder(0));
    }
    let at = |order: usize| &history[order - 1];
    let domain = scn.domain();
    let inv = 1.0 / (s as f64 + 1.0);
    match cfg.mode {
        BackendMode::AnalyticDisk => {
            let rad = |order: usize| at(order).radial.as_ref().ok_or(TransformError::Unsupported("history lacks radial data".into()));
            let a = RadialLaurent::from_field(&scn.rhs_coeff(s))?;
            let mut acc = a;
            for k in 0..s {
                let (p, q) = (rad(k + 1)?, rad(s - k)?);
                let w = C64::new(-(k as f64 + 1.0), 0.0);
                let prod = p.theta.mul(&q.theta.conj()).add(&p.g.mul(&q.g.conj()).scaled(C64::new(-1.0, 0.0)));
                acc = acc.add(&prod.scaled(w));
            }
            finish(s + 1, domain, cfg, None, Some(acc.scaled(C64::new(inv, 0.0))))
        }
        BackendMode::Quadrature => {
            let nodes = node_sets(domain, &cfg.mesh);
            let a = scn.rhs_coeff(s);
            let mut tv: [Vec<C64>; 2] = [Vec::new(), Vec::new()];
            for side in 0..2 {
                let sd = if side == 0 { Side::Interior } else { Side::Exterior };
                let n = nodes[side].len();
                let mut v: Vec<C64> = nodes[side].iter().map(|z| a.side_value(sd, *z)).collect();
                for k in 0..s {
                    let p = at(k + 1).nodes.as_ref().ok_or(TransformError::Unsupported("history lacks node values".into()))?;
                    let q = at(s - k).nodes.as_ref().ok_or(TransformError::Unsupported("history lacks node values".into()))?;
                    let w = k as f64 + 1.0;
                    for i in 0..n {
                        v[i] -= w * (p.theta[side][i] * q.theta[side][i].conj() - p.eta[side][i] * q.eta[side][i].conj());
                    }
                }
                for x in v.iter_mut() {
                    *x *= inv;
                }
                tv[side] = v;
            }
            finish(s + 1, domain, cfg, Some(tv), None)
        }
    }
}

/// Orders `0..=s_max`, with the optional blow-up guard against the majorant.
pub fn build(scn: &ScenarioRHS, s_max: usize, cfg: &SeriesConfig) -> Result<Series, SeriesError> {
    let domain = scn.domain().clone();
    let mut coeffs = vec![SeriesCoefficients::identity(domain.clone())];
    if s_max == 0 {
        return Ok(Series { scenario: scn.clone(), config: *cfg, coeffs });
    }
    let guard = match (cfg.blowup_k, &cfg.norms) {
        (Some(k), Some(opt)) => {
            let w = triple_norm(&scn.varpi0, Side::Interior, opt)?.total;
            Some(MajorantState::new(2.0 * w, k, 1.0)?)
        }
        _ => None,
    };
    let mut hist: Vec<SeriesCoefficients> = Vec::with_capacity(s_max);
    for s in 1..=s_max {
        let c = if s == 1 { first_order(scn, cfg)? } else { recursion_step(&hist, scn, cfg)? };
        if let (Some(m), Some((ni, ne))) = (&guard, &c.triple_norms) {
            if s <= crate::majorant::MAX_ORDER {
                for (side, measured, bound) in [(Side::Interior, ni.total, m.alpha_s(s)), (Side::Exterior, ne.total, m.beta_s(s))] {
                    if measured > 2.0 * bound + 1e-12 {
                        return Err(SeriesError::NormBlowup { order: s, side, measured, bound });
                    }
                }
            }
        }
        hist.push(c);
    }
    coeffs.extend(hist);
    Ok(Series { scenario: scn.clone(), config: *cfg, coeffs })
}

/// `λ^s/s!` with `λ = iω̂/2`: interior `ξ^(s)/z` for the rotating disk.
pub fn rotation_coefficient(omega_hat: f64, s: usize) -> C64 {
    let lam = C64::new(0.0, 0.5 * omega_hat);
    let fact: f64 = (1..=s).map(|k| k as f64).product();
    lam.powi(s as i32) / fact
}

/// Coefficient of `t^s` in `√(1 − ct)`.
pub fn collapse_coefficient(c: f64, s: usize) -> f64 {
    // binom(1/2, s) (−c)^s
    let mut b = 1.0;
    for j in 0..s {
        b *= (0.5 - j as f64) / (j as f64 + 1.0);
    }
    b * (-c).powi(s as i32)
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

    fn small_mesh() -> MeshSpec {
        MeshSpec { n_radial: 10, n_theta: 16, stencil: 16 }
    }

    #[test]
    fn rhs_coefficients() {
        let d = disk();
        let e = ScenarioRHS::euler(d.clone(), 2.0);
        assert!(e.rhs_coeff(3).is_zero());
        assert_eq!(e.varpi0.interior_value(c(0.0, 0.0)), c(0.0, 1.0));
        let p = ScenarioRHS::aggregation_paper(d.clone(), 1.0);
        assert_eq!(p.rhs_factor(1), Some(3.0));
        assert_eq!(p.rhs_factor(2), Some(6.0));
        let a1 = p.rhs_coeff(1);
        assert_eq!(a1.interior_value(c(0.1, 0.0)), p.varpi0.interior_value(c(0.1, 0.0)) * 3.0);
        // Σ a^(s) t^s = ϖ₀ (1 − ct)^{-3}
        let t: f64 = 0.1;
        let series: C64 = (0..80).map(|s| p.rhs_coeff(s).interior_value(c(0.0, 0.0)) * t.powi(s as i32)).sum();
        assert!((series - p.rhs_value(Side::Interior, c(0.0, 0.0), t)).norm() < 1e-14);
        let q = ScenarioRHS::aggregation_consistent(d.clone(), 1.0);
        assert_eq!(q.rhs_value(Side::Interior, c(0.2, 0.0), 0.3), c(-0.5, 0.0));
        let g = ScenarioRHS::custom(PiecewiseField::indicator(d.clone(), c(1.0, 0.0)), move |s| PiecewiseField::indicator(disk(), c(0.5f64.powi(s as i32), 0.0)));
        assert!((g.rhs_value(Side::Interior, c(0.0, 0.0), 0.5) - c(4.0 / 3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn euler_disk_analytic() {
        let d = disk();
        let scn = ScenarioRHS::euler(d.clone(), 2.0);
        let s = build(&scn, 10, &SeriesConfig::analytic()).unwrap();
        let z = c(0.5, 0.0);
        assert!((s.coeffs[1].xi.side_value(Side::Interior, z) - c(0.0, 0.5)).norm() < 1e-15);
        assert!(s.coeffs[1].eta.side_value(Side::Interior, z).norm() < 1e-15);
        assert!((s.coeffs[1].xi.side_value(Side::Exterior, c(2.0, 0.0)) - c(0.0, 0.5)).norm() < 1e-15);
        assert!((s.coeffs[2].theta.interior_value(z) - c(-0.5, 0.0)).norm() < 1e-15);
        assert!((s.coeffs[2].theta.exterior_value(c(2.0, 0.0)) - c(1.0 / 32.0, 0.0)).norm() < 1e-15);
        assert!((s.coeffs[3].xi.side_value(Side::Interior, z) - c(0.0, -0.5 / 6.0)).norm() < 1e-15);
        for k in 1..=10 {
            let want = rotation_coefficient(2.0, k) * c(0.3, -0.2);
            assert!((s.coeffs[k].xi.side_value(Side::Interior, c(0.3, -0.2)) - want).norm() < 1e-12, "order {k}");
        }
    }

    #[test]
    fn exterior_flow_matches_point_vortex_orbit() {
        // outside the unit disk the exact flow is z e^{it/|z|²} for ω̂ = 2
        let d = disk();
        let s = build(&ScenarioRHS::euler(d, 2.0), 12, &SeriesConfig::analytic()).unwrap();
        let z = c(1.5, 0.7);
        let t: f64 = 0.3;
        let psi: C64 = s.coeffs.iter().enumerate().map(|(k, co)| co.xi.side_value(Side::Exterior, z) * t.powi(k as i32)).sum();
        let exact = z * C64::from_polar(1.0, t / z.norm_sqr());
        assert!((psi - exact).norm() < 1e-10, "{psi} {exact}");
    }

    #[test]
    fn aggregation_consistent_disk() {
        let d = disk();
        let s = build(&ScenarioRHS::aggregation_consistent(d, 1.0), 4, &SeriesConfig::analytic()).unwrap();
        let z = c(0.4, 0.3);
        assert!((s.coeffs[1].xi.side_value(Side::Interior, z) - z * -0.5).norm() < 1e-15);
        assert!((s.coeffs[2].xi.side_value(Side::Interior, z) - z * -0.125).norm() < 1e-15);
        for k in 1..=4 {
            assert!((s.coeffs[k].xi.side_value(Side::Interior, z) - z * collapse_coefficient(1.0, k)).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_datum_and_order_zero() {
        let d = disk();
        let scn = ScenarioRHS::custom(PiecewiseField::zero(d.clone()), move |_| PiecewiseField::zero(disk()));
        let cfg = SeriesConfig { mesh: small_mesh(), parallelism: Parallelism::Sequential, ..Default::default() };
        let s = build(&scn, 3, &cfg).unwrap();
        for co in &s.coeffs[1..] {
            assert!(co.theta.is_zero());
        }
        let id = build(&scn, 0, &cfg).unwrap();
        assert_eq!(id.order(), 0);
        assert_eq!(id.coeffs[0].xi.side_value(Side::Interior, c(0.2, 0.3)), c(0.2, 0.3));
    }

    #[test]
    fn quadrature_path_matches_analytic_on_disk() {
        let d = disk();
        let scn = ScenarioRHS::euler(d.clone(), 2.0);
        let cfg = SeriesConfig { mesh: small_mesh(), parallelism: Parallelism::Sequential, ..Default::default() };
        let q = build(&scn, 3, &cfg).unwrap();
        let a = build(&scn, 3, &SeriesConfig::analytic()).unwrap();
        for k in 1..=3 {
            for z in [c(0.3, 0.2), c(-0.5, 0.1), c(1.7, 0.4), c(-3.0, -2.0)] {
                let side = if z.norm() < 1.0 { Side::Interior } else { Side::Exterior };
                let (xq, tq, eq) = q.coeffs[k].values(side, z);
                let (xa, ta, ea) = a.coeffs[k].values(side, z);
                let scale = 1.0 + xa.norm();
                assert!((xq - xa).norm() < 1e-5 * scale, "ξ order {k} at {z}: {xq} vs {xa}");
                assert!((tq - ta).norm() < 1e-5 * (1.0 + ta.norm()), "θ order {k} at {z}");
                assert!((eq - ea).norm() < 1e-5 * (1.0 + ea.norm()), "η order {k} at {z}");
            }
        }
    }

    #[test]
    fn derivative_consistency_analytic() {
        let d = disk();
        let s = build(&ScenarioRHS::aggregation_consistent(d, 1.0), 5, &SeriesConfig::analytic()).unwrap();
        let h = 1e-5;
        for co in &s.coeffs[1..] {
            for (z, side) in [(c(0.3, 0.4), Side::Interior), (c(1.4, -0.9), Side::Exterior)] {
                let x = |w: C64| co.xi.side_value(side, w);
                let dx = (x(z + h) - x(z - h)) / (2.0 * h);
                let dy = (x(z + c(0.0, h)) - x(z - c(0.0, h))) / (2.0 * h);
                let dz = 0.5 * (dx - c(0.0, 1.0) * dy);
                let dzb = 0.5 * (dx + c(0.0, 1.0) * dy);
                assert!((dz - co.theta.side_value(side, z)).norm() < 1e-8);
                assert!((dzb - co.eta.side_value(side, z)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn blowup_guard_trips_on_tiny_bound() {
        let d = disk();
        let scn = ScenarioRHS::euler(d, 2.0);
        let cfg = SeriesConfig { norms: Some(NormOptions::default()), blowup_k: Some(0.0), ..SeriesConfig::analytic() };
        // with K = 0 the exterior majorant vanishes while the exterior θ^(2) does not
        assert!(matches!(build(&scn, 3, &cfg), Err(SeriesError::NormBlowup { order: 2, side: Side::Exterior, .. })));
        let ok = SeriesConfig { blowup_k: Some(1.0), ..cfg };
        assert!(build(&ScenarioRHS::euler(disk(), 2.0), 3, &ok).is_ok());
    }
}
