//! Summed flow map `ψ(z,t) = Σ_s ξ^(s)(z) t^s` and the checks built on it.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{GeometryError, PatchDomain, Side};
use crate::quadrature::{adaptive_vec, QuadError, QuadratureSpec};
use crate::series::{build, ScenarioKind, ScenarioRHS, Series, SeriesConfig, SeriesError};
use crate::{par_map, Parallelism, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("Newton inversion stalled after {iterations} iterations (residual {residual:.3e})")]
    NewtonFailed { iterations: usize, residual: f64 },
    #[error("Jacobian degenerate at {0}")]
    Degenerate(C64),
    #[error("{0}")]
    Unsupported(String),
}

const ZERO: C64 = C64::new(0.0, 0.0);

/// `ψ` and its first derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub psi: C64,
    pub psi_z: C64,
    pub psi_zbar: C64,
    pub psi_t: C64,
    pub psi_tz: C64,
    pub psi_tzbar: C64,
}

impl FlowState {
    /// `|ψ_z|² − |ψ_z̄|²`.
    pub fn jacobian(&self) -> f64 {
        self.psi_z.norm_sqr() - self.psi_zbar.norm_sqr()
    }

    /// `|A_z| + |A_z̄|` with `A = ψ − z`.
    pub fn grad_a(&self) -> f64 {
        (self.psi_z - 1.0).norm() + self.psi_zbar.norm()
    }
}

/// Outcome of a Newton inversion `ψ(z,t) = x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inverse {
    pub z: C64,
    pub iterations: usize,
    pub residual: f64,
}

/// One truncated series, valid for times near `t0`.
#[derive(Debug, Clone)]
pub struct FlowSeries {
    pub series: Arc<Series>,
    /// Start time of this segment.
    pub t0: f64,
}

impl FlowSeries {
    pub fn new(series: Series) -> Self {
        Self { series: Arc::new(series), t0: 0.0 }
    }

    pub fn build(scn: &ScenarioRHS, order: usize, cfg: &SeriesConfig) -> Result<Self, FlowError> {
        Ok(Self::new(build(scn, order, cfg)?))
    }

    pub fn domain(&self) -> &Arc<PatchDomain> {
        self.series.domain()
    }

    pub fn scenario(&self) -> &ScenarioRHS {
        &self.series.scenario
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    fn side(&self, z: C64) -> Side {
        if self.domain().is_inside(z) {
            Side::Interior
        } else {
            Side::Exterior
        }
    }

    pub fn state(&self, z: C64, t: f64) -> FlowState {
        self.state_on(self.side(z), z, t)
    }

    /// State using the limits from `side`.
    pub fn state_on(&self, side: Side, z: C64, t: f64) -> FlowState {
        let tau = t - self.t0;
        let mut st = FlowState { psi: ZERO, psi_z: ZERO, psi_zbar: ZERO, psi_t: ZERO, psi_tz: ZERO, psi_tzbar: ZERO };
        let mut tp = 1.0;
        let mut tpm = 0.0;
        for (s, c) in self.series.coeffs.iter().enumerate() {
            let (x, th, et) = c.values(side, z);
            st.psi += x * tp;
            st.psi_z += th * tp;
            st.psi_zbar += et * tp;
            if s >= 1 {
                let k = s as f64 * tpm;
                st.psi_t += x * k;
                st.psi_tz += th * k;
                st.psi_tzbar += et * k;
            }
            tpm = tp;
            tp *= tau;
        }
        st
    }

    pub fn psi(&self, z: C64, t: f64) -> C64 {
        let tau = t - self.t0;
        let side = match self.side(z) {
            Side::Exterior => Side::Exterior,
            _ => Side::Interior,
        };
        let mut acc = ZERO;
        let mut tp = 1.0;
        for c in &self.series.coeffs {
            acc += c.xi.side_value(side, z) * tp;
            tp *= tau;
        }
        acc
    }

    /// `ψ_tz ψ̄_z − ψ_tz̄ ψ̄_z̄ − ϖ₀(1 + a t)`.
    pub fn meq_residual(&self, z: C64, t: f64) -> C64 {
        let side = self.side(z);
        let st = self.state_on(side, z, t);
        st.psi_tz * st.psi_z.conj() - st.psi_tzbar * st.psi_zbar.conj() - self.scenario().rhs_value(side, z, t - self.t0)
    }

    pub fn jacobian(&self, z: C64, t: f64) -> f64 {
        self.state(z, t).jacobian()
    }

    /// Lagrangian velocity `ψ_t(z,t)`.
    pub fn velocity(&self, z: C64, t: f64) -> C64 {
        self.state(z, t).psi_t
    }

    /// `sup |∇A|` over `points`, both one-sided limits at boundary samples.
    pub fn grad_a_sup(&self, points: &[C64], t: f64, par: Parallelism) -> f64 {
        par_map(points.len(), par, |k| self.state(points[k], t).grad_a()).into_iter().fold(0.0, f64::max)
    }

    /// `min |ψ(z₁) − ψ(z₂)| / |z₁ − z₂|` over all pairs of `points`.
    pub fn injectivity_ratio(&self, points: &[C64], t: f64) -> f64 {
        let img: Vec<C64> = points.iter().map(|z| self.psi(*z, t)).collect();
        let mut m = f64::INFINITY;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d = (points[i] - points[j]).norm();
                if d > 0.0 {
                    m = m.min((img[i] - img[j]).norm() / d);
                }
            }
        }
        m
    }

    /// Solves `ψ(z,t) = x` by Newton's method started at `x`.
    pub fn invert(&self, x: C64, t: f64, tol: f64, max_iter: usize) -> Result<Inverse, FlowError> {
        let mut z = x;
        let scale = 1.0 + x.norm();
        for it in 0..=max_iter {
            let st = self.state(z, t);
            let r = x - st.psi;
            if r.norm() <= tol * scale {
                return Ok(Inverse { z, iterations: it, residual: r.norm() });
            }
            if it == max_iter {
                return Err(FlowError::NewtonFailed { iterations: it, residual: r.norm() });
            }
            let (a, b) = (st.psi_z, st.psi_zbar);
            let det = a.norm_sqr() - b.norm_sqr();
            if det.abs() < 1e-14 {
                return Err(FlowError::Degenerate(z));
            }
            z += (a.conj() * r - b * r.conj()) / det;
        }
        unreachable!()
    }

    /// `ψ(τ_k, t)` at `n` boundary points equispaced in the star angle.
    pub fn boundary_evolution(&self, t: f64, n: usize) -> Vec<C64> {
        let tau = t - self.t0;
        (0..n)
            .map(|k| {
                let b = self.domain().boundary_point(TAU * k as f64 / n as f64);
                let mut acc = ZERO;
                let mut tp = 1.0;
                for c in &self.series.coeffs {
                    acc += c.xi.boundary_value(b) * tp;
                    tp *= tau;
                }
                acc
            })
            .collect()
    }

    /// `ψ_t(z,t) − (1/π)∫_Ω ϖ₀(ζ) / conj(ψ(z,t) − ψ(ζ,t)) dA(ζ)`: the
    /// velocity law pulled back to the reference domain (mass-weighted, so
    /// `ρ_t J = ρ₀` is built in). Defined for the transport scenarios.
    pub fn velocity_residual(&self, z: C64, t: f64, spec: &QuadratureSpec) -> Result<C64, FlowError> {
        match self.scenario().kind {
            ScenarioKind::Euler | ScenarioKind::AggregationConsistent => {}
            k => return Err(FlowError::Unsupported(format!("no transport law for {k:?}"))),
        }
        let dom = self.domain().clone();
        let w0 = &self.scenario().varpi0.interior;
        let st = self.state(z, t);
        let pz = st.psi;
        let mut cross = Vec::new();
        let mut fail = false;
        let mut breaks = dom.tangent_directions(z);
        breaks.iter_mut().for_each(|b| *b = b.rem_euclid(TAU));
        let est = adaptive_vec(
            |phi| {
                let e = C64::from_polar(1.0, phi);
                dom.ray_crossings(z, e, &mut cross);
                let mut pts = vec![0.0];
                pts.extend(cross.iter().copied());
                let mut acc = ZERO;
                for w in pts.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    if !dom.is_inside(z + e * (0.5 * (a + b))) {
                        continue;
                    }
                    let r = adaptive_vec(
                        |r| {
                            if r == 0.0 {
                                return [ZERO];
                            }
                            let zeta = z + e * r;
                            let d = (pz - self.psi(zeta, t)).conj();
                            [w0.eval(zeta) * r / d]
                        },
                        a,
                        b,
                        &[],
                        0.05 * spec.abs_tol,
                        0.1 * spec.rel_tol,
                        spec.max_subdivisions,
                    );
                    fail |= !r.converged;
                    acc += r.value[0];
                }
                [acc]
            },
            0.0,
            TAU,
            &breaks,
            spec.abs_tol,
            spec.rel_tol,
            spec.max_subdivisions,
        );
        if fail || !est.converged {
            return Err(QuadError::ToleranceNotMet { estimate: est.value[0], error: est.error }.into());
        }
        Ok(st.psi_t - est.value[0] / PI)
    }

    /// Refits the boundary at `t1` with `n_modes` Fourier modes per sign and
    /// starts a fresh series there.
    pub fn restart(&self, t1: f64, n_modes: usize, order: usize, cfg: &SeriesConfig) -> Result<FlowSeries, FlowError> {
        let n = (8 * n_modes + 8).max(64);
        let pts = self.boundary_evolution(t1, n);
        let mut modes = Vec::with_capacity(2 * n_modes + 1);
        let kk = std::iter::once(0).chain((1..=n_modes as i32).flat_map(|k| [k, -k]));
        for k in kk {
            let c: C64 = pts.iter().enumerate().map(|(j, p)| p * C64::from_polar(1.0, -(k as f64) * TAU * j as f64 / n as f64)).sum::<C64>() / n as f64;
            modes.push((k, c));
        }
        let gamma = self.domain().holder_gamma();
        let c1 = modes.iter().find(|m| m.0 == 1).map_or(0.0, |m| m.1.norm());
        let round = modes.iter().filter(|m| m.0 != 0 && m.0 != 1).all(|m| m.1.norm() <= 1e-12 * c1);
        // a circle stays a disk so the closed-form backend remains usable
        let dom = Arc::new(if round { PatchDomain::disk(modes[0].1, c1, gamma)? } else { PatchDomain::fourier(modes, gamma)? });
        let old = self.scenario();
        let dt = t1 - self.t0;
        let scn = match old.kind {
            ScenarioKind::Euler => ScenarioRHS::euler(dom, old.amplitude),
            ScenarioKind::AggregationConsistent => ScenarioRHS::aggregation_consistent(dom, restart_amplitude(old.amplitude, dt)),
            ScenarioKind::AggregationPaperForm => ScenarioRHS::aggregation_paper(dom, restart_amplitude(old.amplitude, dt)),
            ScenarioKind::CustomAnalytic => return Err(FlowError::Unsupported("restart of a custom datum".into())),
        };
        let mut next = FlowSeries::build(&scn, order, cfg)?;
        next.t0 = t1;
        Ok(next)
    }
}

/// `c' = c / (1 − c t₁)`: the uniform density after collapsing for `t₁`.
pub fn restart_amplitude(c: f64, t1: f64) -> f64 {
    c / (1.0 - c * t1)
}

/// Logarithmic time `s = −ln(1 − ct)` in which the collapse is linear.
pub fn aggregation_rescale(c: f64, t: f64) -> f64 {
    -(1.0 - c * t).ln()
}

/// Largest time traced for collapse at rate `c`.
pub fn aggregation_t_max(c: f64) -> f64 {
    0.95 / c
}

/// Segments glued at their start times.
#[derive(Debug, Clone)]
pub struct FlowChain {
    pub segments: Vec<FlowSeries>,
}

impl FlowChain {
    pub fn new(first: FlowSeries) -> Self {
        Self { segments: vec![first] }
    }

    /// Extends the chain with a restart at `t1`.
    pub fn push_restart(&mut self, t1: f64, n_modes: usize, order: usize, cfg: &SeriesConfig) -> Result<(), FlowError> {
        let next = self.segments.last().expect("non-empty chain").restart(t1, n_modes, order, cfg)?;
        self.segments.push(next);
        Ok(())
    }

    /// Composes segment maps up to time `t`.
    pub fn psi(&self, z: C64, t: f64) -> C64 {
        let mut x = z;
        for (i, seg) in self.segments.iter().enumerate() {
            let end = self.segments.get(i + 1).map(|n| n.t0);
            match end {
                Some(t1) if t > t1 => x = seg.psi(x, t1),
                _ => return seg.psi(x, t),
            }
        }
        x
    }
}

/// Polygon area by the shoelace formula.
pub fn polygon_area(p: &[C64]) -> f64 {
    let n = p.len();
    0.5 * (0..n).map(|k| (p[k].conj() * p[(k + 1) % n]).im).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::SeriesConfig;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn euler(order: usize) -> FlowSeries {
        let d = Arc::new(PatchDomain::unit_disk(0.5));
        FlowSeries::build(&ScenarioRHS::euler(d, 2.0), order, &SeriesConfig::analytic()).unwrap()
    }

    #[test]
    fn rotating_disk() {
        let f = euler(14);
        for z in [c(0.3, 0.4), c(-0.7, 0.1), c(0.0, 0.0)] {
            for t in [-0.3, 0.1, 0.3] {
                let exact = z * C64::from_polar(1.0, t);
                assert!((f.psi(z, t) - exact).norm() < 1e-12);
                let st = f.state(z, t);
                assert!((st.psi_t - exact * c(0.0, 1.0)).norm() < 1e-11);
                assert!((st.jacobian() - 1.0).abs() < 1e-11);
                assert!(f.meq_residual(z, t).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn exterior_meq_residual_vanishes() {
        let f = euler(16);
        for z in [c(1.3, 0.2), c(-2.0, 1.5)] {
            assert!(f.meq_residual(z, 0.2).norm() < 1e-10);
        }
    }

    #[test]
    fn newton_round_trip() {
        let f = euler(14);
        for z in [c(0.2, 0.5), c(1.5, -0.3), c(0.9, 0.0)] {
            let x = f.psi(z, 0.25);
            let inv = f.invert(x, 0.25, 1e-13, 20).unwrap();
            assert!((inv.z - z).norm() < 1e-10, "{z} -> {}", inv.z);
        }
    }

    #[test]
    fn collapse_and_restart() {
        let d = Arc::new(PatchDomain::unit_disk(0.5));
        let cfg = SeriesConfig::analytic();
        let f = FlowSeries::build(&ScenarioRHS::aggregation_consistent(d, 1.0), 24, &cfg).unwrap();
        let z = c(0.3, -0.2);
        assert!((f.psi(z, 0.3) - z * (0.7f64).sqrt()).norm() < 1e-8);
        assert!((f.jacobian(z, 0.3) - 0.7).abs() < 1e-8);
        let pts = f.boundary_evolution(0.3, 256);
        assert!((polygon_area(&pts) - PI * 0.7).abs() < 1e-3);
        // restart at 0.3 onto a Fourier disk of radius √0.7
        let cfg_q = SeriesConfig { mesh: crate::fields::MeshSpec { n_radial: 8, n_theta: 12, stencil: 12 }, parallelism: Parallelism::Sequential, ..Default::default() };
        let next = f.restart(0.3, 2, 1, &cfg_q).unwrap();
        assert!((next.domain().boundary_point(0.0).norm() - 0.7f64.sqrt()).abs() < 1e-8);
        assert!((next.scenario().amplitude - 1.0 / 0.7).abs() < 1e-14);
        assert!((aggregation_rescale(1.0, 0.3) - -(0.7f64).ln()).abs() < 1e-15);
        assert_eq!(aggregation_t_max(2.0), 0.475);
        let chain = FlowChain { segments: vec![f.clone(), next] };
        assert_eq!(chain.psi(z, 0.2), f.psi(z, 0.2));
    }

    #[test]
    fn velocity_law_holds_for_rotation() {
        let f = euler(14);
        let spec = QuadratureSpec { abs_tol: 1e-9, rel_tol: 1e-8, ..Default::default() };
        for z in [c(0.4, 0.2), c(1.6, 0.0)] {
            let r = f.velocity_residual(z, 0.2, &spec).unwrap();
            assert!(r.norm() < 1e-7, "{z}: {r}");
        }
    }

    #[test]
    fn injectivity_and_gradient() {
        let f = euler(14);
        let pts: Vec<C64> = (0..20).map(|k| C64::from_polar(0.1 + 0.1 * k as f64, 0.7 * k as f64)).collect();
        // rotation is an isometry inside; the exterior shear keeps the ratio near 1
        assert!((f.grad_a_sup(&pts[..8], 0.1, Parallelism::Sequential) - (C64::from_polar(1.0, 0.1) - 1.0).norm()).abs() < 1e-12);
        assert!(f.injectivity_ratio(&pts[..8], 0.1) > 1.0 - 1e-12);
    }
}
