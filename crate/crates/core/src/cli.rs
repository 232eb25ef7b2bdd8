//! Command-line front end.
//!
//! Exit codes: 0 success, 1 numerical or acceptance failure, 2 bad
//! configuration. Every CSV gets a JSON sidecar (see [`crate::io`]).

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::acceptance::{Profile, Suite};
use crate::fields::{MeshSpec, NormOptions, PiecewiseField};
use crate::flow::{aggregation_t_max, FlowChain, FlowSeries};
use crate::geometry::{PatchDomain, Side};
use crate::io::{
    config_hash, field_extra, field_rows, fmt_f, read_field, read_points, to_json, write_json, write_table, DomainConfig, IoError, Sidecar,
    FIELD_COLUMNS,
};
use crate::majorant::{certified_radius, MajorantState};
use crate::quadrature::QuadratureSpec;
use crate::series::{ScenarioKind, ScenarioRHS, SeriesConfig};
use crate::transforms::{BackendMode, BoundSamples, TransformBackend};
use crate::{Parallelism, C64};

#[derive(Debug, Parser)]
#[command(name = "patchflow", version, about = "Patch transforms, flow series and their certification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
pub enum ScenarioArg {
    Euler,
    AggConsistent,
    AggPaper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
pub enum BackendArg {
    Quadrature,
    Analytic,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct Common {
    /// Domain file (`kind = disk|ellipse|fourier`, ...); unit disk when absent.
    #[arg(long, global = true)]
    pub domain: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "euler")]
    pub scenario: ScenarioArg,
    /// `ω̂` (Euler) or `c` (aggregation).
    #[arg(long, global = true, default_value_t = 2.0)]
    pub amplitude: f64,
    #[arg(long, global = true, default_value_t = 6)]
    pub order: usize,
    /// Quadrature tolerances; each command has its own defaults.
    #[arg(long, global = true)]
    pub quad_abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub quad_rel_tol: Option<f64>,
    /// Worker threads; 1 runs sequentially. Defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Output file or directory; not part of the config hash.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "quadrature")]
    pub backend: BackendArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate C̄ and B̄ or verify the jump relation.
    Transform {
        #[command(subcommand)]
        action: TransformCmd,
        #[command(flatten)]
        common: Common,
    },
    /// Build the coefficient series.
    Series {
        #[command(subcommand)]
        action: SeriesCmd,
        #[command(flatten)]
        common: Common,
    },
    /// Certified radius of the majorant.
    Radius {
        #[command(subcommand)]
        action: RadiusCmd,
        #[command(flatten)]
        common: Common,
    },
    /// Trace or validate the flow map.
    Flow {
        #[command(subcommand)]
        action: FlowCmd,
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance battery.
    Suite {
        #[command(subcommand)]
        action: SuiteCmd,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Subcommand)]
pub enum TransformCmd {
    /// `re_z, im_z, side, re_cauchy, im_cauchy, re_beurling, im_beurling` at each point.
    Eval {
        /// Field CSV (`region, re_z, im_z, re_f, im_f`); indicator times amplitude when absent.
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long)]
        points: PathBuf,
    },
    /// Compare B̄ on ∂Ω with the mean of its one-sided limits.
    JumpVerify {
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        n: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum SeriesCmd {
    /// Writes `xi_SS.csv` per order and `manifest.json`.
    Build {
        #[arg(long, default_value_t = 10)]
        mesh_radial: usize,
        #[arg(long, default_value_t = 16)]
        mesh_theta: usize,
        /// Skip the triple norms and the K fit in the manifest.
        #[arg(long)]
        no_norms: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum RadiusCmd {
    Certify {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long = "K")]
        k: Option<f64>,
        /// Series directory with a norms manifest.
        #[arg(long)]
        from_series: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        table: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum FlowCmd {
    /// `t, index, re_z, im_z, re_psi, im_psi, jacobian` per time and point.
    Trace {
        #[arg(long)]
        series: PathBuf,
        /// `start:step:stop`.
        #[arg(long, default_value = "0:0.05:0.3")]
        times: String,
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        restart_at: Option<f64>,
    },
    /// JSON report of residuals and invariants.
    Validate {
        #[arg(long)]
        series: PathBuf,
        #[arg(long, default_value_t = 100)]
        probes: usize,
        #[arg(long, default_value_t = 0.2)]
        t_max: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum SuiteCmd {
    Run {
        #[arg(long, default_value = "desk")]
        profile: String,
        /// Only these criteria (comma separated).
        #[arg(long)]
        only: Option<String>,
    },
}

/// Command failure, mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn numeric<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Numeric(e.to_string())
}

impl Common {
    fn parallelism(&self) -> Parallelism {
        match self.threads {
            Some(1) => Parallelism::Sequential,
            _ => Parallelism::Parallel,
        }
    }

    fn spec(&self) -> Result<QuadratureSpec, Failure> {
        self.spec_over(QuadratureSpec::default())
    }

    fn spec_over(&self, base: QuadratureSpec) -> Result<QuadratureSpec, Failure> {
        let s = QuadratureSpec { abs_tol: self.quad_abs_tol.unwrap_or(base.abs_tol), rel_tol: self.quad_rel_tol.unwrap_or(base.rel_tol), ..base };
        s.validate().map_err(|e| Failure::Config(e.to_string()))?;
        Ok(s)
    }

    fn domain_config(&self) -> Result<DomainConfig, Failure> {
        match &self.domain {
            Some(p) => Ok(DomainConfig::load(p)?),
            None => Ok(DomainConfig::unit_disk()),
        }
    }

    fn out_dir(&self, default: &str) -> Result<PathBuf, Failure> {
        let p = self.out.clone().unwrap_or_else(|| PathBuf::from(default));
        fs::create_dir_all(&p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
        Ok(p)
    }

    fn out_file(&self, default: &str) -> Result<PathBuf, Failure> {
        let p = self.out.clone().unwrap_or_else(|| PathBuf::from(default));
        if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Failure::Config(format!("{}: {e}", parent.display())))?;
        }
        Ok(p)
    }

    fn hash(&self, sub: &str, dom: &DomainConfig) -> String {
        config_hash(&format!("{sub}\n{}\n{}", serde_json::to_string(self).unwrap_or_default(), dom.to_text()))
    }

    fn scenario(&self, d: Arc<PatchDomain>) -> Result<ScenarioRHS, Failure> {
        if !(self.amplitude.is_finite() && self.amplitude != 0.0) {
            return Err(Failure::Config("amplitude must be finite and non-zero".into()));
        }
        Ok(match self.scenario {
            ScenarioArg::Euler => ScenarioRHS::euler(d, self.amplitude),
            ScenarioArg::AggConsistent => ScenarioRHS::aggregation_consistent(d, self.amplitude),
            ScenarioArg::AggPaper => ScenarioRHS::aggregation_paper(d, self.amplitude),
        })
    }

    fn backend(&self, d: Arc<PatchDomain>) -> Result<TransformBackend, Failure> {
        let b = match self.backend {
            BackendArg::Quadrature => TransformBackend::quadrature(d, self.spec()?),
            BackendArg::Analytic => TransformBackend::analytic_disk(d).map_err(|e| Failure::Config(e.to_string()))?,
        };
        Ok(b.with_parallelism(self.parallelism()))
    }
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Interior => "interior",
        Side::Exterior => "exterior",
        Side::Boundary => "boundary",
    }
}

/// Parses `start:step:stop`.
pub fn parse_times(s: &str) -> Result<Vec<f64>, Failure> {
    let v: Vec<f64> = s.split(':').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| Failure::Config(format!("bad time range {s}")))?;
    match v.as_slice() {
        [t] => Ok(vec![*t]),
        [a, h, b] if *h > 0.0 && b >= a => {
            let n = ((b - a) / h + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| a + h * k as f64).collect())
        }
        _ => Err(Failure::Config(format!("bad time range {s}"))),
    }
}

fn load_field(path: &Option<PathBuf>, d: &Arc<PatchDomain>, amplitude: f64) -> Result<PiecewiseField, Failure> {
    match path {
        Some(p) => Ok(read_field(p, d.clone())?),
        None => Ok(PiecewiseField::indicator(d.clone(), C64::new(amplitude, 0.0))),
    }
}

fn transform(action: &TransformCmd, common: &Common) -> Result<i32, Failure> {
    let dc = common.domain_config()?;
    let d = dc.build()?;
    let b = common.backend(d.clone())?;
    let spec = common.spec()?;
    match action {
        TransformCmd::Eval { field, points } => {
            let f = load_field(field, &d, common.amplitude)?;
            let pts = read_points(points)?;
            let vals = b.eval_many(&f, &pts);
            let mut rows = Vec::with_capacity(pts.len());
            for (z, v) in pts.iter().zip(vals) {
                let (cv, bv) = v.map_err(numeric)?;
                let side = d.region_classify(*z, 1e-10 * d.length_scale());
                rows.push(vec![fmt_f(z.re), fmt_f(z.im), side_name(side).into(), fmt_f(cv.re), fmt_f(cv.im), fmt_f(bv.re), fmt_f(bv.im)]);
            }
            let out = common.out_file("vals.csv")?;
            let sc = Sidecar::new(&["re_z", "im_z", "side", "re_cauchy", "im_cauchy", "re_beurling", "im_beurling"], &common.hash("transform eval", &dc), &spec);
            write_table(&out, &sc, &rows)?;
            Ok(0)
        }
        TransformCmd::JumpVerify { field, n } => {
            let f = load_field(field, &d, common.amplitude)?;
            let hs: Vec<f64> = (0..4).map(|k| 0.02 * d.length_scale() * 0.5f64.powi(k)).collect();
            let mut rows = Vec::new();
            let mut worst = 0.0f64;
            for k in 0..*n {
                let th = TAU * k as f64 / *n as f64;
                let tau = d.boundary_point(th);
                let j = b.jump_check(&f, tau, &hs).map_err(numeric)?;
                worst = worst.max(j.residual);
                rows.push(vec![fmt_f(th), fmt_f(tau.re), fmt_f(tau.im), fmt_f(j.lhs.re), fmt_f(j.lhs.im), fmt_f(j.rhs.re), fmt_f(j.rhs.im), fmt_f(j.residual)]);
            }
            let out = common.out_file("jump.csv")?;
            let sc = Sidecar::new(&["theta", "re_tau", "im_tau", "re_lhs", "im_lhs", "re_rhs", "im_rhs", "residual"], &common.hash("transform jump-verify", &dc), &spec)
                .with_extra(json!({ "max_residual": worst }));
            write_table(&out, &sc, &rows)?;
            say(&format!("max jump residual {worst:.3e}"));
            Ok(0)
        }
    }
}

/// Everything needed to rebuild a series deterministically.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SeriesManifest {
    pub domain: String,
    pub scenario: ScenarioKind,
    pub amplitude: f64,
    pub order: usize,
    pub config: SeriesConfig,
    pub config_hash: String,
    #[serde(default)]
    pub norms: Vec<Value>,
    #[serde(default)]
    pub varpi0_norm: Option<f64>,
    #[serde(default)]
    pub k_fit: Option<f64>,
}

impl SeriesManifest {
    pub fn load(dir: &Path) -> Result<Self, Failure> {
        let p = dir.join("manifest.json");
        let text = fs::read_to_string(&p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))
    }

    pub fn rebuild(&self) -> Result<FlowSeries, Failure> {
        let dc = DomainConfig::parse(&self.domain)?;
        let d = dc.build()?;
        let scn = match self.scenario {
            ScenarioKind::Euler => ScenarioRHS::euler(d, self.amplitude),
            ScenarioKind::AggregationConsistent => ScenarioRHS::aggregation_consistent(d, self.amplitude),
            ScenarioKind::AggregationPaperForm => ScenarioRHS::aggregation_paper(d, self.amplitude),
            ScenarioKind::CustomAnalytic => return Err(Failure::Config("custom scenarios cannot be rebuilt from a manifest".into())),
        };
        let cfg = SeriesConfig { norms: None, ..self.config };
        FlowSeries::build(&scn, self.order, &cfg).map_err(numeric)
    }
}

fn series(action: &SeriesCmd, common: &Common) -> Result<i32, Failure> {
    let SeriesCmd::Build { mesh_radial, mesh_theta, no_norms } = action;
    let norms = !*no_norms;
    if common.order < 1 {
        return Err(Failure::Config("order must be at least 1".into()));
    }
    if *mesh_radial < 2 || *mesh_theta < 4 || mesh_theta % 2 != 0 {
        return Err(Failure::Config("mesh needs n_radial >= 2 and an even n_theta >= 4".into()));
    }
    let dc = common.domain_config()?;
    let d = dc.build()?;
    let scn = common.scenario(d.clone())?;
    let base = SeriesConfig::default();
    let spec = common.spec_over(base.engine.spec)?;
    let mesh = MeshSpec { n_radial: *mesh_radial, n_theta: *mesh_theta, stencil: *mesh_theta };
    let mode = match common.backend {
        BackendArg::Quadrature => BackendMode::Quadrature,
        BackendArg::Analytic => BackendMode::AnalyticDisk,
    };
    let engine = crate::transforms::EngineOptions { spec, ..base.engine };
    let norm_opt = NormOptions { seed: common.seed, ..NormOptions::default() };
    let cfg = SeriesConfig { mode, mesh, engine, parallelism: common.parallelism(), norms: norms.then_some(norm_opt), blowup_k: None };
    let f = FlowSeries::build(&scn, common.order, &cfg).map_err(numeric)?;
    let dir = common.out_dir("series")?;
    let hash = common.hash("series build", &dc);
    for (s, co) in f.series.coeffs.iter().enumerate() {
        let mut extra = field_extra(&mesh, 1);
        extra["order"] = json!(s);
        extra["quantity"] = json!("xi");
        let sc = Sidecar::new(&FIELD_COLUMNS, &hash, &spec).with_extra(extra);
        write_table(&dir.join(format!("xi_{s:02}.csv")), &sc, &field_rows(&co.xi, &mesh))?;
    }
    let mut manifest = SeriesManifest {
        domain: dc.to_text(),
        scenario: scn.kind,
        amplitude: common.amplitude,
        order: common.order,
        config: SeriesConfig { norms: None, ..cfg },
        config_hash: hash,
        norms: Vec::new(),
        varpi0_norm: None,
        k_fit: None,
    };
    if norms {
        for (s, co) in f.series.coeffs.iter().enumerate().skip(1) {
            if let Some((ni, ne)) = &co.triple_norms {
                manifest.norms.push(json!({ "order": s, "interior": to_json(ni), "exterior": to_json(ne) }));
            }
        }
        if let Some((ni, ne)) = &f.series.coeffs[1].triple_norms {
            manifest.varpi0_norm = Some(ni.total + ne.total);
        }
        let ev = TransformBackend::quadrature(d.clone(), spec)
            .with_parallelism(common.parallelism())
            .bound_report(&scn.varpi0, &BoundSamples::new(&d, 1))
            .map_err(numeric)?;
        manifest.k_fit = Some(ev.k_fit);
    }
    write_json(&dir.join("manifest.json"), &to_json(&manifest))?;
    Ok(0)
}

fn radius(action: &RadiusCmd, common: &Common) -> Result<i32, Failure> {
    let RadiusCmd::Certify { alpha, k, from_series, table } = action;
    let (alpha, k) = match from_series {
        Some(dir) => {
            let m = SeriesManifest::load(dir)?;
            let w = m.varpi0_norm.ok_or_else(|| Failure::Config("manifest has no norms; rebuild with --norms".into()))?;
            let k = k.or(m.k_fit).ok_or_else(|| Failure::Config("no K given and none fitted".into()))?;
            (2.0 * w, k)
        }
        None => (alpha.ok_or_else(|| Failure::Config("--alpha is required".into()))?, k.ok_or_else(|| Failure::Config("--K is required".into()))?),
    };
    let t_star = certified_radius(alpha, k).map_err(|e| Failure::Config(e.to_string()))?;
    let m = MajorantState::new(alpha, k, 1.0).map_err(|e| Failure::Config(e.to_string()))?;
    let per_order: Vec<Value> = m.table(*table).into_iter().map(|(s, a, b)| json!({ "s": s, "alpha_s": a, "beta_s": b })).collect();
    let v = to_json(&json!({ "alpha": alpha, "K": k, "T_star": t_star, "per_order_table": per_order }));
    let text = serde_json::to_string_pretty(&v).map_err(numeric)?;
    say(&text);
    if common.out.is_some() {
        write_json(&common.out_file("radius.json")?, &v)?;
    }
    Ok(0)
}

fn flow(action: &FlowCmd, common: &Common) -> Result<i32, Failure> {
    match action {
        FlowCmd::Trace { series, times, points, restart_at } => {
            let m = SeriesManifest::load(series)?;
            let f = m.rebuild()?;
            let d = f.domain().clone();
            let mut ts = parse_times(times)?;
            if matches!(m.scenario, ScenarioKind::AggregationConsistent | ScenarioKind::AggregationPaperForm) && m.amplitude > 0.0 {
                let cap = aggregation_t_max(m.amplitude);
                ts.retain(|t| *t <= cap);
            }
            let pts = match points {
                Some(p) => read_points(p)?,
                None => (0..64).map(|k| d.boundary_point(TAU * k as f64 / 64.0)).collect(),
            };
            let mut chain = FlowChain::new(f.clone());
            if let Some(t1) = restart_at {
                chain.push_restart(*t1, 8, m.order, &m.config).map_err(numeric)?;
            }
            let mut rows = Vec::new();
            for t in &ts {
                for (i, z) in pts.iter().enumerate() {
                    let p = chain.psi(*z, *t);
                    rows.push(vec![fmt_f(*t), i.to_string(), fmt_f(z.re), fmt_f(z.im), fmt_f(p.re), fmt_f(p.im), fmt_f(f.jacobian(*z, *t))]);
                }
            }
            let out = common.out_file("traj.csv")?;
            let sc = Sidecar::new(&["t", "index", "re_z", "im_z", "re_psi", "im_psi", "jacobian"], &m.config_hash, &m.config.engine.spec)
                .with_extra(json!({ "restart_at": restart_at, "jacobian_segment": "first" }));
            write_table(&out, &sc, &rows)?;
            Ok(0)
        }
        FlowCmd::Validate { series, probes, t_max } => {
            let m = SeriesManifest::load(series)?;
            let f = m.rebuild()?;
            let report = validate_report(&f, *probes, *t_max, common.seed, common.parallelism());
            let out = common.out_file("validate.json")?;
            write_json(&out, &to_json(&report))?;
            say(&serde_json::to_string_pretty(&to_json(&report)).map_err(numeric)?);
            Ok(0)
        }
    }
}

/// Residuals and invariants of a built flow on seeded off-boundary probes.
pub fn validate_report(f: &FlowSeries, n: usize, t_max: f64, seed: u64, par: Parallelism) -> Value {
    use rand::{Rng, SeedableRng};
    let d = f.domain().clone();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let scale = d.length_scale();
    let mut probes = Vec::new();
    while probes.len() < n {
        let z = d.center() + C64::from_polar(rng.gen_range(0.0..1.5 * scale), rng.gen_range(0.0..TAU));
        if d.nearest_boundary(z).distance >= 0.05 * scale {
            probes.push((z, rng.gen_range(-t_max..t_max)));
        }
    }
    let meq = probes.iter().map(|(z, t)| f.meq_residual(*z, *t).norm()).fold(0.0, f64::max);
    let scn = f.scenario();
    let c = scn.amplitude;
    let interior: Vec<&(C64, f64)> = probes.iter().filter(|(z, _)| d.is_inside(*z)).collect();
    // J against 1 − ct (mass-consistent) and against (1 − ct)^3 (the cubic-rate form)
    let j_dev = |law: &dyn Fn(f64) -> f64| interior.iter().map(|(z, t)| (f.jacobian(*z, *t) - law(*t)).abs()).fold(0.0, f64::max);
    let jac = match scn.kind {
        ScenarioKind::Euler => json!({ "law": "J = 1", "max_dev": j_dev(&|_| 1.0) }),
        _ => json!({
            "mass_consistent": { "law": "J = 1 - ct", "max_dev": j_dev(&|t| 1.0 - c * t) },
            "cubic_rate": { "law": "J = (1 - ct)^3", "max_dev": j_dev(&|t| (1.0 - c * t).powi(3)) },
        }),
    };
    let mut newton = 0.0f64;
    let mut iters = 0;
    let mut newton_fail = 0;
    for (z, t) in &probes {
        match f.invert(f.psi(*z, *t), *t, 1e-14, 20) {
            Ok(inv) => {
                newton = newton.max((inv.z - z).norm());
                iters = iters.max(inv.iterations);
            }
            Err(_) => newton_fail += 1,
        }
    }
    let pts: Vec<C64> = probes.iter().map(|p| p.0).collect();
    let grads: Vec<Value> = (0..=4).map(|k| t_max * k as f64 / 4.0).map(|t| json!({ "t": t, "grad_A_sup": f.grad_a_sup(&pts, t, par) })).collect();
    let vel_spec = QuadratureSpec { abs_tol: 1e-8, rel_tol: 1e-7, ..Default::default() };
    let vel: Vec<Value> = probes
        .iter()
        .take(4)
        .map(|(z, t)| match f.velocity_residual(*z, *t, &vel_spec) {
            Ok(r) => json!({ "re_z": z.re, "im_z": z.im, "t": t, "residual": r.norm() }),
            Err(e) => json!({ "re_z": z.re, "im_z": z.im, "t": t, "error": e.to_string() }),
        })
        .collect();
    json!({
        "scenario": format!("{:?}", scn.kind),
        "amplitude": c,
        "order": f.order(),
        "probes": n,
        "t_max": t_max,
        "meq_residual_max": meq,
        "jacobian": jac,
        "newton": { "max_round_trip": newton, "max_iterations": iters, "failures": newton_fail },
        "grad_A_sup": grads,
        "velocity_residual": vel,
    })
}

fn suite(action: &SuiteCmd, common: &Common) -> Result<i32, Failure> {
    let SuiteCmd::Run { profile, only } = action;
    let mut p = match profile.as_str() {
        "desk" => Profile::desk(),
        other => return Err(Failure::Config(format!("unknown profile {other}"))),
    };
    p.seed = common.seed;
    p.parallelism = common.parallelism();
    p.spec = common.spec()?;
    let ids: Vec<u32> = match only {
        Some(s) => s.split(',').map(|x| x.trim().parse::<u32>()).collect::<Result<_, _>>().map_err(|_| Failure::Config(format!("bad criterion list {s}")))?,
        None => (1..=10).collect(),
    };
    if ids.iter().any(|i| !(1..=10).contains(i)) {
        return Err(Failure::Config("criteria are numbered 1 to 10".into()));
    }
    let s = Suite::new(p);
    let mut results = Vec::new();
    for id in ids {
        let r = s.run(id);
        say(&r.line());
        results.push(r);
    }
    let passed = results.iter().all(|r| r.passed);
    let dir = common.out_dir("suite")?;
    write_json(&dir.join("suite.json"), &to_json(&json!({ "profile": profile, "seed": p.seed, "passed": passed, "criteria": results })))?;
    s.write_artifacts(&dir).map_err(numeric)?;
    Ok(if passed { 0 } else { 1 })
}

/// Parses `args` and runs; returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let res = match &cli.command {
        Command::Transform { action, common } => setup(common).and_then(|_| transform(action, common)),
        Command::Series { action, common } => setup(common).and_then(|_| series(action, common)),
        Command::Radius { action, common } => setup(common).and_then(|_| radius(action, common)),
        Command::Flow { action, common } => setup(common).and_then(|_| flow(action, common)),
        Command::Suite { action, common } => setup(common).and_then(|_| suite(action, common)),
    };
    match res {
        Ok(code) => code,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            2
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("error: {m}");
            1
        }
    }
}

/// Prints a line; a closed pipe is not an error.
fn say(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn setup(common: &Common) -> Result<(), Failure> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be positive".into()));
        }
        #[cfg(feature = "parallel")]
        {
            // a second call in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_ranges() {
        assert_eq!(parse_times("0:0.1:0.3").ok().unwrap().len(), 4);
        assert_eq!(parse_times("0.2").ok().unwrap(), vec![0.2]);
        assert!(parse_times("0:-1:2").is_err());
        assert!(parse_times("a:b").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_from(["patchflow", "radius", "certify", "--alpha", "1", "--K", "1"]), 0);
        assert_eq!(run_from(["patchflow", "radius", "certify", "--alpha", "-1", "--K", "1"]), 2);
        assert_eq!(run_from(["patchflow", "radius", "certify"]), 2);
        assert_eq!(run_from(["patchflow", "bogus"]), 2);
        assert_eq!(run_from(["patchflow", "suite", "run", "--profile", "huge"]), 2);
    }
}
