//! The acceptance battery: ten oracle checks, one result line each.
//!
//! Series that several checks share are built once per [`Suite`] and cached;
//! their build time is charged to the first check that asks for them.

use std::f64::consts::TAU;
use std::path::Path;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::fields::{triple_norm, MeshSpec, NormOptions, Part, PiecewiseField};
use crate::flow::{FlowError, FlowSeries};
use crate::geometry::{PatchDomain, Side};
use crate::io::{config_hash, fmt_f, to_json, write_json, write_table, Sidecar};
use crate::majorant::{certified_radius, h_cap, MajorantState};
use crate::quadrature::{adaptive_2d, adaptive_real, pv_ring_oracle, QuadratureSpec, Region2d};
use crate::series::{rotation_coefficient, ScenarioRHS, SeriesConfig};
use crate::transforms::{BoundSamples, Mollifier, TransformBackend};
use crate::{Parallelism, C64};

/// One line of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
    pub budget_s: Option<f64>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {:<34} {:>8.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_s,
            self.detail
        )
    }
}

/// Sizes and seed of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub seed: u64,
    pub parallelism: Parallelism,
    pub spec: QuadratureSpec,
    /// Collocation mesh of the Euler disk series.
    pub disk_mesh: MeshSpec,
    /// Collocation mesh of the aggregation disk and the ellipse series.
    pub small_mesh: MeshSpec,
}

impl Profile {
    pub fn desk() -> Self {
        Self {
            seed: 20240601,
            parallelism: Parallelism::default(),
            spec: QuadratureSpec::default(),
            disk_mesh: MeshSpec { n_radial: 12, n_theta: 24, stencil: 24 },
            small_mesh: MeshSpec { n_radial: 10, n_theta: 16, stencil: 16 },
        }
    }

    fn series_config(&self, mesh: MeshSpec) -> SeriesConfig {
        SeriesConfig { mesh, parallelism: self.parallelism, ..SeriesConfig::default() }
    }
}

type Cached = OnceLock<Result<FlowSeries, FlowError>>;

/// Runs criteria and caches the series they share.
pub struct Suite {
    pub profile: Profile,
    disk: Arc<PatchDomain>,
    ellipse: Arc<PatchDomain>,
    euler_disk_q: Cached,
    agg_disk_q: Cached,
    euler_ellipse_q: Cached,
}

const OMEGA: f64 = 2.0;
const C_AGG: f64 = 1.0;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn fail_detail<E: std::fmt::Display>(e: E) -> String {
    format!("error: {e}")
}

/// `|v − e| ≤ tol |e|`, or `|v| ≤ tol · scale` when `e = 0`.
fn rel_ok(v: C64, e: C64, tol: f64, scale: f64) -> (bool, f64) {
    let err = (v - e).norm();
    let den = if e == C64::new(0.0, 0.0) { scale } else { e.norm() };
    (err <= tol * den, err / den)
}

impl Suite {
    pub fn new(profile: Profile) -> Self {
        Self {
            profile,
            disk: Arc::new(PatchDomain::unit_disk(0.5)),
            ellipse: Arc::new(PatchDomain::ellipse(c(0.0, 0.0), 2.0, 1.0, 0.5).expect("ellipse")),
            euler_disk_q: OnceLock::new(),
            agg_disk_q: OnceLock::new(),
            euler_ellipse_q: OnceLock::new(),
        }
    }

    fn backend(&self, d: &Arc<PatchDomain>) -> TransformBackend {
        TransformBackend::quadrature(d.clone(), self.profile.spec).with_parallelism(self.profile.parallelism)
    }

    fn euler_disk_q(&self) -> Result<&FlowSeries, String> {
        let cfg = self.profile.series_config(self.profile.disk_mesh);
        self.euler_disk_q
            .get_or_init(|| FlowSeries::build(&ScenarioRHS::euler(self.disk.clone(), OMEGA), 6, &cfg))
            .as_ref()
            .map_err(fail_detail)
    }

    fn agg_disk_q(&self) -> Result<&FlowSeries, String> {
        let cfg = self.profile.series_config(self.profile.small_mesh);
        self.agg_disk_q
            .get_or_init(|| FlowSeries::build(&ScenarioRHS::aggregation_consistent(self.disk.clone(), C_AGG), 8, &cfg))
            .as_ref()
            .map_err(fail_detail)
    }

    fn euler_ellipse_q(&self) -> Result<&FlowSeries, String> {
        let cfg = SeriesConfig { norms: Some(NormOptions::default()), ..self.profile.series_config(self.profile.small_mesh) };
        self.euler_ellipse_q
            .get_or_init(|| FlowSeries::build(&ScenarioRHS::euler(self.ellipse.clone(), OMEGA), 8, &cfg))
            .as_ref()
            .map_err(fail_detail)
    }

    fn analytic(&self, scn: ScenarioRHS, order: usize) -> Result<FlowSeries, String> {
        let cfg = SeriesConfig { norms: Some(NormOptions::default()), ..SeriesConfig::analytic() };
        FlowSeries::build(&scn, order, &cfg).map_err(fail_detail)
    }

    /// Plot inputs: `boundary.csv`, `norms.csv`, `radius.json` and `field.csv`, each CSV with a sidecar.
    pub fn write_artifacts(&self, dir: &Path) -> Result<(), String> {
        let spec = self.profile.spec;
        let hash = config_hash(&format!("suite desk {}", self.profile.seed));
        let agg = self.analytic(ScenarioRHS::aggregation_consistent(self.disk.clone(), C_AGG), 24)?;
        let mut rows = Vec::new();
        for k in 0..=6 {
            let t = 0.05 * k as f64 / C_AGG;
            for (i, b) in agg.boundary_evolution(t, 64).iter().enumerate() {
                rows.push(vec![fmt_f(t), i.to_string(), fmt_f(b.re), fmt_f(b.im)]);
            }
        }
        let sc = Sidecar::new(&["t", "index", "re", "im"], &hash, &spec).with_extra(json!({ "scenario": "aggregation_consistent", "c": C_AGG }));
        write_table(&dir.join("boundary.csv"), &sc, &rows).map_err(fail_detail)?;

        let euler = self.analytic(ScenarioRHS::euler(self.disk.clone(), OMEGA), 8)?;
        let m = self.majorant_for(&euler)?;
        let mut rows = Vec::new();
        for s in 1..=8 {
            let (ni, ne) = euler.series.coeffs[s].triple_norms.as_ref().ok_or("missing norms")?;
            rows.push(vec![s.to_string(), fmt_f(ni.total), fmt_f(ne.total), fmt_f(m.alpha_s(s)), fmt_f(m.beta_s(s))]);
        }
        let sc = Sidecar::new(&["s", "norm_interior", "norm_exterior", "alpha_s", "beta_s"], &hash, &spec).with_extra(json!({ "scenario": "euler", "omega": OMEGA }));
        write_table(&dir.join("norms.csv"), &sc, &rows).map_err(fail_detail)?;

        let mut grid = Vec::new();
        for a in [0.25, 0.5, 1.0, 2.0, 4.0] {
            for k in [0.25, 0.5, 1.0, 2.0, 4.0] {
                grid.push(json!({ "alpha": a, "K": k, "T_star": certified_radius(a, k).map_err(fail_detail)? }));
            }
        }
        let radius = json!({ "alpha": m.alpha, "K": m.k, "T_star": m.t_star, "sensitivity": grid });
        write_json(&dir.join("radius.json"), &to_json(&radius)).map_err(fail_detail)?;

        let f = PiecewiseField::indicator(self.ellipse.clone(), c(1.0, 0.0));
        let pts: Vec<C64> = (0..41).flat_map(|i| (0..41).map(move |j| c(-3.0 + 0.15 * j as f64, -3.0 + 0.15 * i as f64))).collect();
        let b = self.backend(&self.ellipse);
        let mut rows = Vec::new();
        for (z, v) in pts.iter().zip(b.eval_many(&f, &pts)) {
            let (cv, bv) = v.map_err(fail_detail)?;
            rows.push(vec![fmt_f(z.re), fmt_f(z.im), fmt_f(cv.re), fmt_f(cv.im), fmt_f(bv.re), fmt_f(bv.im)]);
        }
        let sc = Sidecar::new(&["re_z", "im_z", "re_cauchy", "im_cauchy", "re_beurling", "im_beurling"], &hash, &spec).with_extra(json!({ "field": "ellipse indicator", "a": 2.0, "b": 1.0 }));
        write_table(&dir.join("field.csv"), &sc, &rows).map_err(fail_detail)
    }

    /// Off-boundary probes: random points with `d(z) ≥ 0.05 · scale` within `3 · scale`.
    fn probes(&self, d: &PatchDomain, n: usize, salt: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.profile.seed ^ salt);
        let scale = d.length_scale();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let z = d.center() + C64::from_polar(rng.gen_range(0.0..1.5 * scale), rng.gen_range(0.0..TAU));
            if d.nearest_boundary(z).distance >= 0.05 * scale {
                out.push(z);
            }
        }
        out
    }

    pub fn run(&self, id: u32) -> CriterionResult {
        let t0 = Instant::now();
        let (name, budget, out): (&str, Option<f64>, Result<(bool, String), String>) = match id {
            1 => ("disk closed forms", Some(30.0), self.c1()),
            2 => ("decomposition vs ring oracle", Some(300.0), self.c2()),
            3 => ("jump formula on ellipse", Some(120.0), self.c3()),
            4 => ("cancellation and residue identities", Some(10.0), self.c4()),
            5 => ("Euler disk series", Some(600.0), self.c5()),
            6 => ("aggregation disk (consistent)", Some(600.0), self.c6()),
            7 => ("Meq residual", None, self.c7()),
            8 => ("majorant domination", None, self.c8()),
            9 => ("flow regularity", None, self.c9()),
            10 => ("Jacobian laws and bound stability", None, self.c10()),
            _ => ("unknown", None, Err(format!("no criterion {id}"))),
        };
        let elapsed = t0.elapsed().as_secs_f64();
        let (ok, mut detail) = out.unwrap_or_else(|e| (false, e));
        let in_time = budget.map_or(true, |b| elapsed <= b);
        if !in_time {
            detail += &format!("; over the {:.0}s budget", budget.unwrap_or(0.0));
        }
        CriterionResult { id, name: name.into(), passed: ok && in_time, detail, elapsed_s: elapsed, budget_s: budget }
    }

    pub fn run_all(&self) -> Vec<CriterionResult> {
        (1..=10).map(|id| self.run(id)).collect()
    }

    // -----------------------------------------------------------------------

    fn c1(&self) -> Result<(bool, String), String> {
        let d = &self.disk;
        let b = self.backend(d);
        let f = PiecewiseField::indicator(d.clone(), c(1.0, 0.0));
        let mut pts = vec![(c(0.0, 0.0), false)];
        for (k, r) in [0.25, 0.5, 0.75, 0.9, 1.1, 1.5, 2.0, 4.0, 10.0, 0.95, 0.99, 0.999, 1.0, 1.001, 1.01, 1.05].iter().enumerate() {
            for j in 0..6 {
                let z = C64::from_polar(*r, TAU * j as f64 / 6.0 + 0.37 * k as f64);
                pts.push((z, (r - 1.0f64).abs() < 0.1));
            }
        }
        let zs: Vec<C64> = pts.iter().map(|p| p.0).collect();
        // the generic part forces numerical radial integration
        let generic = PiecewiseField::new(d.clone(), Part::func(|_| c(1.0, 0.0)), Part::Zero);
        let mut vals = b.eval_many(&f, &zs);
        vals.extend(b.eval_many(&generic, &zs));
        let (mut worst_far, mut worst_band) = (0.0f64, 0.0f64);
        let mut ok = true;
        for ((z, band), v) in pts.iter().chain(pts.iter()).zip(vals) {
            let (cv, bv) = v.map_err(fail_detail)?;
            let r = z.norm();
            let (ce, be) = if (r - 1.0).abs() < 1e-12 {
                (1.0 / z.conj(), -0.5 / (z.conj() * z.conj()))
            } else if r < 1.0 {
                (*z, c(0.0, 0.0))
            } else {
                (1.0 / z.conj(), -1.0 / (z.conj() * z.conj()))
            };
            let tol = if *band { 1e-4 } else { 1e-6 };
            for (v, e) in [(cv, ce), (bv, be)] {
                let (good, rel) = rel_ok(v, e, tol, 1.0);
                ok &= good;
                if *band {
                    worst_band = worst_band.max(rel);
                } else {
                    worst_far = worst_far.max(rel);
                }
            }
        }
        Ok((ok, format!("{} points x 2 representations; max rel err {worst_far:.2e} (d>=0.1, tol 1e-6), {worst_band:.2e} (band, tol 1e-4)", pts.len())))
    }

    fn c2(&self) -> Result<(bool, String), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.profile.seed ^ 2);
        let spec = self.profile.spec;
        let mut worst = 0.0f64;
        let mut ok = true;
        for case in 0..50 {
            let d = if case % 2 == 0 { self.disk.clone() } else { self.ellipse.clone() };
            let mut coef = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let (a0, a1, a2, a3, e0) = (coef(), coef(), coef(), coef(), coef());
            let interior = Part::func(move |z: C64| a0 + a1 * z + a2 * z.conj() + a3 * z.norm_sqr() * 0.5);
            let exterior = if case % 3 == 0 {
                Part::Zero
            } else {
                let cen = d.center();
                Part::func(move |z: C64| e0 / (z - cen).norm().powi(3))
            };
            let f = PiecewiseField::new(d.clone(), interior, exterior);
            let z = self.probes(&d, 1, 1000 + case as u64)[0];
            let v = self.backend(&d).beurling(&f, z).map_err(fail_detail)?;
            let dist = d.nearest_boundary(z).distance;
            let eps: Vec<f64> = (0..5).map(|k| 0.2 * dist * 0.5f64.powi(k)).collect();
            let o = pv_ring_oracle(&f, z, &eps, d.length_scale(), 2.0, &spec).map_err(fail_detail)?;
            let err = (v - o.value).norm() / (1.0 + v.norm());
            worst = worst.max(err);
            ok &= err <= 1e-5;
        }
        Ok((ok, format!("50 cases; max |B̄ − oracle|/(1+|B̄|) = {worst:.2e} (tol 1e-5)")))
    }

    fn c3(&self) -> Result<(bool, String), String> {
        let d = &self.ellipse;
        let g = PiecewiseField::new(d.clone(), Part::func(|z: C64| c(z.re, 0.0)), Part::Zero);
        let b = self.backend(d);
        let hs: Vec<f64> = (0..4).map(|k| 0.02 * 0.5f64.powi(k)).collect();
        let mut worst = 0.0f64;
        for k in 0..16 {
            let tau = d.boundary_point(TAU * k as f64 / 16.0);
            let j = b.jump_check(&g, tau, &hs).map_err(fail_detail)?;
            worst = worst.max(j.residual);
        }
        Ok((worst <= 5e-3, format!("16 boundary points; max residual {worst:.2e} (tol 5e-3)")))
    }

    fn c4(&self) -> Result<(bool, String), String> {
        let spec = QuadratureSpec { abs_tol: 1e-12, rel_tol: 1e-12, ..self.profile.spec };
        let mut ring_worst = 0.0f64;
        for (z, eps, r) in [(c(0.0, 0.0), 0.1, 1.0), (c(0.3, -0.2), 0.01, 0.5), (c(-1.0, 2.0), 0.3, 2.0)] {
            let region = Region2d::Annulus { center: z, inner: eps, outer: r };
            for p in [1, 2] {
                let v = adaptive_2d(|w: C64| 1.0 / (z.conj() - w.conj()).powi(p), &region, &spec).map_err(fail_detail)?;
                ring_worst = ring_worst.max(v.value[0].norm());
            }
        }
        let rings_ok = ring_worst <= 1e-8;
        let (stated_worst, corrected_worst) = residue_identity_errors();
        let stated_ok = stated_worst <= 1e-10;
        Ok((
            rings_ok && stated_ok,
            format!(
                "rings max {ring_worst:.1e} (tol 1e-8); stated 2π/(|a|⁴+r⁴) rel err {stated_worst:.2e} (tol 1e-10) {}; 2π/(r⁴−|a|⁴) rel err {corrected_worst:.1e}",
                if stated_ok { "holds" } else { "does not hold" }
            ),
        ))
    }

    fn c5(&self) -> Result<(bool, String), String> {
        let scn = ScenarioRHS::euler(self.disk.clone(), OMEGA);
        let an = self.analytic(scn.clone(), 12)?;
        let mut a_err = 0.0f64;
        let interior: Vec<C64> = (0..3).flat_map(|i| (0..6).map(move |j| C64::from_polar(0.2 + 0.3 * i as f64, 1.1 * j as f64 + 0.2))).collect();
        for s in 1..=10 {
            for z in &interior {
                let v = an.series.coeffs[s].xi.side_value(Side::Interior, *z);
                a_err = a_err.max((v - rotation_coefficient(OMEGA, s) * z).norm());
            }
        }
        let q = self.euler_disk_q()?;
        let mut q_err = 0.0f64;
        for s in 1..=6 {
            for z in &interior {
                let e = rotation_coefficient(OMEGA, s) * z;
                q_err = q_err.max((q.series.coeffs[s].xi.side_value(Side::Interior, *z) - e).norm() / e.norm());
            }
        }
        // exterior tail, reported only: far-field values at high order sit near the mesh noise floor
        let exterior: Vec<C64> = (0..6).map(|j| C64::from_polar(1.3, 1.1 * j as f64 + 0.5)).collect();
        let mut ext_err = 0.0f64;
        for s in 1..=6 {
            for z in &exterior {
                let e = an.series.coeffs[s].xi.side_value(Side::Exterior, *z);
                ext_err = ext_err.max((q.series.coeffs[s].xi.side_value(Side::Exterior, *z) - e).norm() / e.norm());
            }
        }
        let mut f_err = 0.0f64;
        let disk_pts: Vec<C64> = std::iter::once(c(0.0, 0.0)).chain((1..=4).flat_map(|i| (0..12).map(move |j| C64::from_polar(0.2 * i as f64, TAU * j as f64 / 12.0)))).collect();
        for k in -6..=6 {
            let t = 0.05 * k as f64;
            for z in &disk_pts {
                let exact = z * C64::from_polar(1.0, 0.5 * OMEGA * t);
                f_err = f_err.max((an.psi(*z, t) - exact).norm());
            }
        }
        let ok = a_err <= 1e-12 && q_err <= 1e-4 && f_err <= 1e-5;
        Ok((ok, format!("analytic s<=10 err {a_err:.1e} (tol 1e-12); quadrature s<=6 rel err {q_err:.2e} (tol 1e-4, exterior |z|=1.3 {ext_err:.1e} info); flow S=12 sup err {f_err:.1e} (tol 1e-5)")))
    }

    fn c6(&self) -> Result<(bool, String), String> {
        let scn = ScenarioRHS::aggregation_consistent(self.disk.clone(), C_AGG);
        let an = self.analytic(scn, 24)?;
        let q = self.agg_disk_q()?;
        let pts: Vec<C64> = std::iter::once(c(0.0, 0.0)).chain((1..=4).flat_map(|i| (0..8).map(move |j| C64::from_polar(0.2 * i as f64, TAU * j as f64 / 8.0 + 0.1)))).collect();
        let mut worst = [0.0f64; 3];
        let mut worst_q = [0.0f64; 3];
        for k in -6..=6 {
            let t = 0.05 * k as f64 / C_AGG;
            let shrink = (1.0 - C_AGG * t).sqrt();
            let rho = C_AGG / (1.0 - C_AGG * t);
            for (f, w) in [(&an, &mut worst), (q, &mut worst_q)] {
                for z in &pts {
                    w[0] = w[0].max((f.psi(*z, t) - z * shrink).norm());
                    w[1] = w[1].max((rho * f.jacobian(*z, t) - C_AGG).abs() / C_AGG);
                }
                for b in f.boundary_evolution(t, 64) {
                    w[2] = w[2].max((b.norm() - shrink).abs());
                }
            }
        }
        let ok = worst.iter().chain(&worst_q).all(|e| *e <= 1e-4);
        Ok((
            ok,
            format!(
                "analytic S=24: psi {:.1e}, rho*J {:.1e}, radius {:.1e}; quadrature S=8: psi {:.1e}, rho*J {:.1e}, radius {:.1e} (tol 1e-4, |ct|<=0.3)",
                worst[0], worst[1], worst[2], worst_q[0], worst_q[1], worst_q[2]
            ),
        ))
    }

    fn c7(&self) -> Result<(bool, String), String> {
        let probes = self.probes(&self.disk, 100, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(self.profile.seed ^ 77);
        let times: Vec<f64> = (0..100).map(|_| rng.gen_range(-0.2..0.2)).collect();
        let max_res = |f: &FlowSeries| probes.iter().zip(&times).map(|(z, t)| f.meq_residual(*z, *t).norm()).fold(0.0, f64::max);
        let e_an = self.analytic(ScenarioRHS::euler(self.disk.clone(), OMEGA), 12)?;
        let a_an = self.analytic(ScenarioRHS::aggregation_consistent(self.disk.clone(), C_AGG), 24)?;
        let r = [max_res(self.euler_disk_q()?), max_res(self.agg_disk_q()?), max_res(&e_an), max_res(&a_an)];
        let ok = r[0] <= 1e-4 && r[1] <= 1e-4 && r[2] <= 1e-8 && r[3] <= 1e-8;
        Ok((ok, format!("quadrature Euler {:.1e}, aggregation {:.1e} (tol 1e-4); analytic Euler {:.1e}, aggregation {:.1e} (tol 1e-8)", r[0], r[1], r[2], r[3])))
    }

    /// `α = 2‖ϖ₀‖` and `K` fitted from the bound report and the measured `‖B̄ϖ₀‖/‖ϖ₀‖`.
    fn majorant_for(&self, f: &FlowSeries) -> Result<MajorantState, String> {
        let c1 = &f.series.coeffs[1];
        let (ni, ne) = c1.triple_norms.as_ref().ok_or("series built without norms")?;
        let w0 = ni.total + ne.total;
        let opt = NormOptions::default();
        let eta = triple_norm(&c1.eta, Side::Interior, &opt).map_err(fail_detail)?.total + triple_norm(&c1.eta, Side::Exterior, &opt).map_err(fail_detail)?.total;
        let ev = self.backend(f.domain()).bound_report(&f.scenario().varpi0, &BoundSamples::new(f.domain(), 1)).map_err(fail_detail)?;
        let k = ev.k_fit.max(eta / w0);
        MajorantState::new(2.0 * w0, k, 1.0).map_err(fail_detail)
    }

    fn c8(&self) -> Result<(bool, String), String> {
        let disk = self.analytic(ScenarioRHS::euler(self.disk.clone(), OMEGA), 8)?;
        let ell = self.euler_ellipse_q()?;
        let mut ok = true;
        let mut parts = Vec::new();
        for (name, f) in [("disk", &disk), ("ellipse", ell)] {
            let m = self.majorant_for(f)?;
            let mut worst = 0.0f64;
            for s in 1..=8 {
                let (ni, ne) = f.series.coeffs[s].triple_norms.as_ref().ok_or("missing norms")?;
                let (a, b) = (m.alpha_s(s), m.beta_s(s));
                let ri = if a > 0.0 { ni.total / a } else if ni.total > 0.0 { f64::INFINITY } else { 0.0 };
                let re = if b > 0.0 { ne.total / b } else if ne.total > 0.0 { f64::INFINITY } else { 0.0 };
                worst = worst.max(ri).max(re);
            }
            ok &= worst <= 1.1;
            parts.push(format!("{name}: max norm/majorant {worst:.3} (alpha {:.3}, K {:.3})", m.alpha, m.k));
        }
        let mut h_worst = 0.0f64;
        for (alpha, k) in [(1.0, 1.0), (0.5, 0.3), (7.5, 1.2), (2.0, 3.0)] {
            let m = MajorantState::new(alpha, k, 1.0).map_err(fail_detail)?;
            for i in 1..=20 {
                let xi = 0.99 * m.t_star * i as f64 / 20.0;
                h_worst = h_worst.max(m.h_iteration_max(xi, 200) / h_cap(k));
            }
        }
        ok &= h_worst <= 1.0;
        let tr = certified_radius(1.0, 1.0).map_err(fail_detail)?;
        let tr_err = (tr - (-4.0f64 / 3.0).exp() / 3.0).abs();
        ok &= tr_err <= 1e-12;
        parts.push(format!("max h_N/cap {h_worst:.4}; |T*(1,1) − e^(-4/3)/3| = {tr_err:.1e}"));
        Ok((ok, parts.join("; ")))
    }

    fn c9(&self) -> Result<(bool, String), String> {
        let f = self.euler_ellipse_q()?;
        let d = f.domain().clone();
        let m = self.majorant_for(f)?;
        let ts = m.t_star;
        let mut samples = self.probes(&d, 300, 9);
        for k in 0..64 {
            let b = d.boundary_point(TAU * k as f64 / 64.0);
            let n = d.normal(TAU * k as f64 / 64.0);
            samples.push(b - n * 1e-6);
            samples.push(b + n * 1e-6);
        }
        let mut grad = 0.0f64;
        let mut inj_ok = true;
        let mut inj_min = f64::INFINITY;
        let inj_pts: Vec<C64> = samples.iter().step_by(3).copied().collect();
        for k in -4..=4 {
            let t = 0.9 * ts * k as f64 / 4.0;
            let g = f.grad_a_sup(&samples, t, self.profile.parallelism);
            grad = grad.max(g);
            let r = f.injectivity_ratio(&inj_pts, t);
            inj_min = inj_min.min(r);
            inj_ok &= r >= 1.0 - g;
        }
        let t = 0.9 * ts;
        let pts = self.probes(&d, 1000, 99);
        let mut rt = 0.0f64;
        let mut iters = 0;
        for z in &pts {
            let x = f.psi(*z, t);
            let inv = f.invert(x, t, 1e-14, 8).map_err(fail_detail)?;
            rt = rt.max((inv.z - z).norm());
            iters = iters.max(inv.iterations);
        }
        let ok = grad < 0.5 && rt <= 1e-8 && iters <= 8 && inj_ok;
        Ok((ok, format!("T* {ts:.3e}; grad_A_sup {grad:.2e} (< 0.5); Newton round-trip {rt:.1e} in <= {iters} iterations on 1000 points; injectivity min {inj_min:.4}")))
    }

    fn c10(&self) -> Result<(bool, String), String> {
        let mut j_worst = 0.0f64;
        let mut rng = ChaCha8Rng::seed_from_u64(self.profile.seed ^ 10);
        for (d, f) in [(&self.disk, self.euler_disk_q()?), (&self.ellipse, self.euler_ellipse_q()?)] {
            for z in self.probes(d, 100, 10) {
                let t = rng.gen_range(-0.2..0.2);
                j_worst = j_worst.max((f.jacobian(z, t) - 1.0).abs());
            }
        }
        let mut ok = j_worst <= 1e-4;
        let mut parts = vec![format!("Euler |J−1| max {j_worst:.1e} (tol 1e-4, |t|<=0.2)")];

        let d = &self.ellipse;
        let b = self.backend(d);
        let mut stab = Vec::new();
        let fields = [
            ("chi", PiecewiseField::indicator(d.clone(), c(1.0, 0.0))),
            ("g", PiecewiseField::new(d.clone(), Part::func(|z| c(1.0 + 0.3 * z.re, 0.2 * z.im)), Part::Zero)),
        ];
        for (name, f) in fields {
            let e1 = b.bound_report(&f, &BoundSamples::new(d, 1)).map_err(fail_detail)?;
            let e2 = b.bound_report(&f, &BoundSamples::new(d, 2)).map_err(fail_detail)?;
            let pairs = [
                ("sup", e1.sup_ratio, e2.sup_ratio),
                ("holder_int", e1.holder_ratio_interior, e2.holder_ratio_interior),
                ("holder_ext", e1.holder_ratio_exterior, e2.holder_ratio_exterior),
                ("decay", e1.decay_ratio, e2.decay_ratio),
            ];
            // B̄χ is constant inside an ellipse, so a ratio may vanish at both densities
            let floor = 1e-8 * e1.sup_ratio;
            for (n, a, bb) in pairs {
                let finite = a.is_finite() && bb.is_finite();
                ok &= finite && (bb - a).abs() <= 0.1 * a.abs().max(floor);
                stab.push(format!("{name}.{n} {a:.3}->{bb:.3}"));
            }
        }
        parts.push(format!("bound ratios under doubling: {}", stab.join(", ")));

        let disk = &self.disk;
        let chi = PiecewiseField::indicator(disk.clone(), c(1.0, 0.0));
        let bd = self.backend(disk);
        let mut probe = Vec::new();
        for (z, want) in [(c(0.5, 0.0), 1.0), (c(0.0, 1.0), 0.5), (c(2.0, 0.0), 0.0)] {
            let v = bd.density_probe(&chi, z, &[1e-3], Mollifier::Bump).map_err(fail_detail)?;
            ok &= (v - want).norm() <= 2e-2;
            probe.push(format!("{:.4}", v.re));
        }
        parts.push(format!("density probe {} (want 1/0.5/0, tol 2e-2)", probe.join("/")));
        Ok((ok, parts.join("; ")))
    }
}

/// Worst relative errors of `2π/(|a|⁴+r⁴)` (stated) and `2π/(r⁴−|a|⁴)` (corrected)
/// against `∫₀^{2π} dθ / (|re^{−iθ}+ā|² |re^{−iθ}−ā|²)` on a 5×5 grid of `(|a|, r)`.
pub fn residue_identity_errors() -> (f64, f64) {
    let (mut stated_worst, mut corrected_worst) = (0.0f64, 0.0f64);
    for ai in 1..=5 {
        let a = C64::from_polar(0.1 * ai as f64, 0.3 * ai as f64);
        for ri in 0..5 {
            let r = 0.7 + 0.2 * ri as f64;
            let num = adaptive_real(
                |th| {
                    let e = C64::from_polar(r, -th);
                    1.0 / ((e + a.conj()).norm_sqr() * (e - a.conj()).norm_sqr())
                },
                0.0,
                TAU,
                1e-14,
                1e-14,
            );
            let a4 = a.norm().powi(4);
            let r4 = r.powi(4);
            stated_worst = stated_worst.max((num - TAU / (a4 + r4)).abs() / (TAU / (a4 + r4)));
            corrected_worst = corrected_worst.max((num - TAU / (r4 - a4)).abs() / (TAU / (r4 - a4)));
        }
    }
    (stated_worst, corrected_worst)
}

/// Runs the whole battery.
pub fn run_suite(profile: Profile) -> Vec<CriterionResult> {
    Suite::new(profile).run_all()
}
