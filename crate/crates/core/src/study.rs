//! Convergence studies over a refinement hierarchy.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    error_record, error_triple_norm, inf_sup_constant, jump_equivalence_ratio, korn_ratio, skin_l2, vh_norm,
    ConvergenceReport, ErrorRecord, HalfNormGram,
};
use crate::cases::{case_ball3d, case_disk2d, oracle_check, AnalyticSolution, PressureVariant, ProblemData};
use crate::error::{Error, Result};
use crate::forms::{
    assemble_broken_stiffness, assemble_jump_gram, assemble_system, assemble_vh_gram, SchemeParams,
};
use crate::geometry::SmoothDomain;
use crate::mesh::{mesh_quality, FacetComplex, QualityReport, SimplexMesh};
use crate::solver::solve;
use crate::spaces::{boundary_mean, cr_normal_trace, DiscreteLift, FacetFunction, DATA_DEGREE};

/// Largest accepted data quadrature degree.
pub const MAX_QUAD_DEGREE: usize = 20;

/// Points sampled by the oracle before a study starts.
pub const ORACLE_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Markdown => "markdown",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Markdown => "md",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            other => Err(Error::Config(format!("unknown format `{other}` (csv|markdown)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: SmoothDomain,
    pub levels: usize,
    pub gamma: f64,
    /// ε = eps_coef · h^eps_exp
    pub eps_coef: f64,
    pub eps_exp: f64,
    pub nu: f64,
    /// Uniform refinements of the coarse mesh before level 0.
    pub base_refinements: usize,
    /// Degree of the rules for f, τ and g.
    pub quad_degree: usize,
    pub pressure_variant: PressureVariant,
    pub format: OutputFormat,
    pub diagnostics: bool,
    pub seed: u64,
}

impl RunConfig {
    pub fn defaults(case: SmoothDomain) -> Self {
        let (gamma, eps_exp, levels, base_refinements) = match case {
            SmoothDomain::Disk2d => (2.0, 2.0, 4, 3),
            SmoothDomain::Ball3d => (5.0, 1.0, 3, 2),
        };
        Self {
            case,
            levels,
            gamma,
            eps_coef: 0.1,
            eps_exp,
            nu: 1.0,
            base_refinements,
            quad_degree: DATA_DEGREE,
            pressure_variant: PressureVariant::default(),
            format: OutputFormat::Csv,
            diagnostics: false,
            seed: 2024,
        }
    }

    /// Builds a config from `key = value` entries applied in order on top of
    /// the defaults of the last `case` entry (disk2d if none).
    pub fn from_entries<'a>(entries: impl IntoIterator<Item = (&'a str, &'a str)> + Clone) -> Result<Self> {
        let case = entries
            .clone()
            .into_iter()
            .filter(|(k, _)| *k == "case")
            .last()
            .map(|(_, v)| v.parse())
            .transpose()?
            .unwrap_or(SmoothDomain::Disk2d);
        let mut cfg = Self::defaults(case);
        for (k, v) in entries {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
        }
        match key {
            "case" => self.case = value.parse()?,
            "levels" => self.levels = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "eps_coef" => self.eps_coef = num(key, value)?,
            "eps_exp" => self.eps_exp = num(key, value)?,
            "nu" => self.nu = num(key, value)?,
            "base_refinements" => self.base_refinements = num(key, value)?,
            "quad_degree" => self.quad_degree = num(key, value)?,
            "pressure_variant" => self.pressure_variant = value.parse()?,
            "format" => self.format = value.parse()?,
            "diagnostics" => self.diagnostics = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_entries(parse_entries(text)?.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect::<Vec<_>>())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.levels < 1 {
            return bad("levels must be at least 1".into());
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.eps_coef > 0.0 && self.eps_coef.is_finite()) {
            return bad(format!("eps_coef must be positive, got {}", self.eps_coef));
        }
        if !self.eps_exp.is_finite() || self.eps_exp < 0.0 {
            return bad(format!("eps_exp must be non-negative, got {}", self.eps_exp));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if !(1..=MAX_QUAD_DEGREE).contains(&self.quad_degree) {
            return bad(format!("quad_degree must lie in 1..={}", MAX_QUAD_DEGREE));
        }
        if self.levels + self.base_refinements > 9 {
            return bad("levels + base_refinements exceeds 9".into());
        }
        Ok(())
    }

    pub fn eps(&self, h: f64) -> f64 {
        self.eps_coef * h.powf(self.eps_exp)
    }

    /// Every effective parameter as `(key, value)`.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        vec![
            ("case", self.case.name().to_string()),
            ("levels", self.levels.to_string()),
            ("gamma", self.gamma.to_string()),
            ("eps_coef", self.eps_coef.to_string()),
            ("eps_exp", self.eps_exp.to_string()),
            ("nu", self.nu.to_string()),
            ("base_refinements", self.base_refinements.to_string()),
            ("quad_degree", self.quad_degree.to_string()),
            ("pressure_variant", self.pressure_variant.name().to_string()),
            ("format", self.format.name().to_string()),
            ("diagnostics", self.diagnostics.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    pub fn manufactured(&self) -> (AnalyticSolution, ProblemData) {
        match self.case {
            SmoothDomain::Disk2d => case_disk2d(self.nu),
            SmoothDomain::Ball3d => case_ball3d(self.nu, self.pressure_variant),
        }
    }
}

/// Splits `key = value` lines, skipping blanks and `#` comments.
pub fn parse_entries(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}

/// Stage of the pipeline, reported on failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Oracle,
    Mesh,
    Assembly,
    Solve,
    Analysis,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Oracle => "oracle",
            Stage::Mesh => "mesh",
            Stage::Assembly => "assembly",
            Stage::Solve => "solve",
            Stage::Analysis => "analysis",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed{}: {source}", level.map(|l| format!(" at level {l}")).unwrap_or_default())]
pub struct StudyError {
    pub stage: Stage,
    pub level: Option<usize>,
    #[source]
    pub source: Error,
}

fn at(stage: Stage, level: Option<usize>) -> impl FnOnce(Error) -> StudyError {
    move |source| StudyError { stage, level, source }
}

/// Per-level diagnostic quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// min (a_h + j_h)(v, v) / ‖v‖²_{V_h}
    pub korn: f64,
    /// max Σ h_e^{-1}‖⟦v⟧‖² / Σ_T ‖∇v‖²
    pub jump_ratio: f64,
    /// measured inf-sup constant of b_h
    pub inf_sup: f64,
    /// ‖ũ − u_h‖_{L²(Ω_h∖Ω)} / (h ⫴ũ − u_h⫴)
    pub skin_ratio: f64,
    /// max |(v_h·n_h)(m_e) − μ_e| over random μ
    pub lift_exactness: f64,
    /// ‖v_h‖_{V_h} / ‖μ‖_{1/2,Λ_h} for a smooth trace
    pub lift_stability: f64,
}

#[derive(Debug, Clone)]
pub struct LevelResult {
    pub level: usize,
    pub mesh: SimplexMesh,
    pub quality: QualityReport,
    pub eps: f64,
    pub n_dofs: usize,
    pub record: ErrorRecord,
    pub k: f64,
    pub residual: f64,
    pub seconds: f64,
    pub diagnostics: Option<Diagnostics>,
}

#[derive(Debug, Clone)]
pub struct Study {
    pub config: RunConfig,
    pub levels: Vec<LevelResult>,
    pub report: ConvergenceReport,
}

/// Samples of the random diagnostics.
const KORN_SAMPLES: usize = 200;
const JUMP_SAMPLES: usize = 50;
const INF_SUP_SAMPLES: usize = 20;
const LIFT_SAMPLES: usize = 20;

pub fn run_study(config: &RunConfig) -> std::result::Result<Study, StudyError> {
    config.validate().map_err(at(Stage::Config, None))?;
    let (sol, data) = config.manufactured();
    oracle_check(&sol, &data, ORACLE_POINTS, config.seed).map_err(at(Stage::Oracle, None))?;

    let domain = config.case;
    let mut mesh = SimplexMesh::coarse(domain);
    for _ in 0..config.base_refinements {
        mesh = mesh.refine(domain).map_err(at(Stage::Mesh, None))?;
    }
    let mut levels = Vec::with_capacity(config.levels);
    for level in 0..config.levels {
        if level > 0 {
            mesh = mesh.refine(domain).map_err(at(Stage::Mesh, Some(level)))?;
        }
        levels.push(run_level(config, level, &mesh, &sol, &data)?);
    }
    let report = ConvergenceReport { records: levels.iter().map(|l| l.record).collect() };
    Ok(Study { config: config.clone(), levels, report })
}

fn run_level(
    config: &RunConfig,
    level: usize,
    mesh: &SimplexMesh,
    sol: &AnalyticSolution,
    data: &ProblemData,
) -> std::result::Result<LevelResult, StudyError> {
    let start = Instant::now();
    let facets = FacetComplex::build(mesh).map_err(at(Stage::Mesh, Some(level)))?;
    let quality = mesh_quality(mesh, &facets, &config.case);
    let h = mesh.mesh_size();
    let eps = config.eps(h);
    let mut params = SchemeParams::new(eps, config.gamma, config.nu);
    params.quad_degree = config.quad_degree;
    let system = assemble_system(mesh, &facets, data, params);
    if system.rhs.iter().any(|v| !v.is_finite()) {
        return Err(at(Stage::Assembly, Some(level))(Error::SolveFailure("non-finite load vector".into())));
    }
    let solution = solve(&system, mesh, &facets).map_err(at(Stage::Solve, Some(level)))?;
    let record = error_record(sol, &*data.g, &solution, mesh, &facets);
    let diagnostics = if config.diagnostics {
        Some(diagnostics(config, mesh, &facets, sol, &system, &solution.u).map_err(at(Stage::Analysis, Some(level)))?)
    } else {
        None
    };
    let seconds = start.elapsed().as_secs_f64();
    log::info!(
        "level {level}: {} cells, h = {h:.4}, eps = {eps:.3e}, l2_u = {:.3e}, h1_u = {:.3e}, l2_p = {:.3e} ({seconds:.1} s)",
        mesh.n_cells(),
        record.l2_u,
        record.h1_u,
        record.l2_p
    );
    Ok(LevelResult {
        level,
        mesh: mesh.clone(),
        quality,
        eps,
        n_dofs: system.size(),
        record,
        k: solution.k,
        residual: solution.residual,
        seconds,
        diagnostics,
    })
}

fn diagnostics(
    config: &RunConfig,
    mesh: &SimplexMesh,
    facets: &FacetComplex,
    sol: &AnalyticSolution,
    system: &crate::forms::SaddleSystem,
    uh: &crate::spaces::CrFunction,
) -> Result<Diagnostics> {
    let vh = assemble_vh_gram(mesh, facets);
    let aj = system.a.add_scaled(&system.j, 1.0);
    let korn = korn_ratio(mesh, facets, &aj, &vh, KORN_SAMPLES, config.seed);
    let jump_ratio = jump_equivalence_ratio(
        facets,
        &assemble_jump_gram(mesh, facets),
        &assemble_broken_stiffness(mesh, facets),
        JUMP_SAMPLES,
        config.seed,
    );
    let inf_sup = inf_sup_constant(mesh, facets, &system.b, &vh, INF_SUP_SAMPLES, config.seed)?;

    let triple = error_triple_norm(sol, uh, mesh, facets);
    let outside = skin_l2(mesh, facets, &config.case, &|c, b, x| {
        let (e, v) = ((sol.u)(x), uh.eval_barycentric(facets, c, b));
        std::array::from_fn(|k| e[k] - v[k])
    });
    let skin_ratio = if triple == 0.0 { 0.0 } else { outside / (mesh.mesh_size() * triple) };

    let lift = DiscreteLift::new(mesh, facets)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut lift_exactness: f64 = 0.0;
    for _ in 0..LIFT_SAMPLES {
        let mu = FacetFunction::scalar((0..facets.n_boundary()).map(|_| rng.random_range(-1.0..1.0)).collect());
        let v = lift.apply(mesh, facets, &mu);
        let tr = cr_normal_trace(&v, facets);
        for (a, b) in tr.values.iter().zip(&mu.values) {
            lift_exactness = lift_exactness.max((a - b).abs());
        }
    }
    let mu = smooth_trace(mesh, facets);
    let gram = HalfNormGram::build(mesh, facets)?;
    let lift_stability = vh_norm(&vh, &lift.apply(mesh, facets, &mu)) / gram.norm(&mu);

    Ok(Diagnostics { korn, jump_ratio, inf_sup, skin_ratio, lift_exactness, lift_stability })
}

/// Π_h^∂ of sin θ (polar angle in 2D, elevation in 3D) on Γ_h, used for
/// lifting stability.
pub fn smooth_trace(mesh: &SimplexMesh, facets: &FacetComplex) -> FacetFunction {
    let axis = mesh.dim() - 1;
    boundary_mean(mesh, facets, move |x| x[axis] / crate::geometry::dot(x, x).sqrt())
}

fn fmt_e(v: f64) -> String {
    format!("{v:.6e}")
}

fn fmt_order(v: Option<f64>) -> String {
    v.map(|o| format!("{o:.3}")).unwrap_or_default()
}

/// Entry i of the returned vector is the order between levels i−1 and i.
fn shifted_orders(report: &ConvergenceReport, f: impl Fn(&ErrorRecord) -> f64) -> Vec<Option<f64>> {
    let h = report.h();
    let e = report.column(f);
    let mut out = vec![None];
    for i in 1..h.len() {
        out.push(if e[i - 1] == 0.0 || e[i] == 0.0 {
            None
        } else {
            Some((e[i - 1] / e[i]).ln() / (h[i - 1] / h[i]).ln())
        });
    }
    out
}

type Column = (&'static str, &'static str, fn(&ErrorRecord) -> f64);

const COLUMNS: [Column; 3] = [
    ("l2_u", "‖u − u_h‖_{L²}", |r| r.l2_u),
    ("h1_u", "⫴u − u_h⫴", |r| r.h1_u),
    ("l2_p", "‖p − p̊_h‖_{L²}", |r| r.l2_p),
];

impl Study {
    fn header(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.config.echo() {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header();
        let orders: Vec<_> = COLUMNS.iter().map(|c| shifted_orders(&self.report, c.2)).collect();
        s.push_str("h,l2_u,eoc_l2_u,h1_u,eoc_h1_u,l2_p,eoc_l2_p\n");
        for (i, r) in self.report.records.iter().enumerate() {
            let mut row = vec![fmt_e(r.h)];
            for (c, o) in COLUMNS.iter().zip(&orders) {
                row.push(fmt_e((c.2)(r)));
                row.push(fmt_order(o[i]));
            }
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = self.header();
        s.push('\n');
        let orders: Vec<_> = COLUMNS.iter().map(|c| shifted_orders(&self.report, c.2)).collect();
        s.push_str("| h |");
        for c in &COLUMNS {
            let _ = write!(s, " {} | Order |", c.1);
        }
        s.push_str("\n|---|");
        s.push_str(&"---:|---:|".repeat(COLUMNS.len()));
        s.push('\n');
        for (i, r) in self.report.records.iter().enumerate() {
            let _ = write!(s, "| {:.4} |", r.h);
            for (c, o) in COLUMNS.iter().zip(&orders) {
                let _ = write!(s, " {:.2e} | {} |", (c.2)(r), fmt_order(o[i]));
            }
            s.push('\n');
        }
        s
    }

    pub fn render(&self) -> String {
        match self.config.format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Markdown => self.to_markdown(),
        }
    }

    /// Per-level secondary quantities and, when enabled, diagnostics.
    pub fn diagnostics_csv(&self) -> String {
        let mut s = self.header();
        let flux = shifted_orders(&self.report, |r| r.flux);
        let flux_w = shifted_orders(&self.report, |r| r.flux_weighted);
        s.push_str(
            "level,cells,dofs,h,eps,volume,skin_constant,min_regularity,h1_semi_u,l2_p_raw,k_h,\
             flux,eoc_flux,flux_weighted,eoc_flux_weighted,residual,\
             korn,jump_ratio,inf_sup,skin_ratio,lift_exactness,lift_stability\n",
        );
        for (i, l) in self.levels.iter().enumerate() {
            let r = &l.record;
            let mut row = vec![
                l.level.to_string(),
                l.mesh.n_cells().to_string(),
                l.n_dofs.to_string(),
                fmt_e(r.h),
                fmt_e(l.eps),
                fmt_e(l.quality.volume),
                fmt_e(l.quality.skin_constant),
                fmt_e(l.quality.min_regularity),
                fmt_e(r.h1_semi_u),
                fmt_e(r.l2_p_raw),
                fmt_e(l.k),
                fmt_e(r.flux),
                fmt_order(flux[i]),
                fmt_e(r.flux_weighted),
                fmt_order(flux_w[i]),
                fmt_e(l.residual),
            ];
            match &l.diagnostics {
                Some(d) => row.extend(
                    [d.korn, d.jump_ratio, d.inf_sup, d.skin_ratio, d.lift_exactness, d.lift_stability].map(fmt_e),
                ),
                None => row.extend(std::iter::repeat_n(String::new(), 6)),
            }
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}
