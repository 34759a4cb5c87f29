use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use kforge_core::builders::{self, BracketConvention};
use kforge_core::dgla::{validate, DgLa, Status, ValidateOptions};
use kforge_core::equivariance::{
    self, average_metric, check_family_equivariance, check_infinitesimal_equivariance, group_closure,
    validate_action, validate_group_action, Action, GroupAction,
};
use kforge_core::hodge::{betti_numbers, hodge_data, random_metric, HodgeData, MetricData};
use kforge_core::io;
use kforge_core::kuranishi::{
    gauge_transform, mc_residual, solve_kuranishi, verify_family, KuranishiFamily, SolveOptions,
    DEFAULT_MAX_PARAMS,
};
use kforge_core::{Error, Scalar};

use crate::args::{
    AverageArgs, BuildCommand, Convention, EquivarianceArgs, GaugeArgs, HodgeArgs, KuranishiArgs,
    MetricArg, ValidateArgs,
};

/// Environment variable overriding the parameter-count limit.
pub const MAX_PARAMS_ENV: &str = "KFORGE_MAX_PARAMS";

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Input { .. } | Error::Metric(_)) | CliError::Io(_) => 2,
            CliError::Core(Error::Guard(_)) => 3,
            CliError::Core(Error::Consistency(_)) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Everything a command produced, for the summary and the run report.
#[derive(Debug, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub checks: Vec<(String, bool)>,
    pub inputs: Vec<(PathBuf, String)>,
    pub artifacts: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    fn check(&mut self, name: impl Into<String>, ok: bool) {
        let name = name.into();
        self.lines.push(format!("{name}: {}", if ok { "pass" } else { "FAIL" }));
        self.checks.push((name, ok));
    }

    fn say(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn read(&mut self, path: &Path) -> CliResult<Value> {
        let bytes = fs::read(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push((path.to_path_buf(), hex::encode(Sha256::digest(&bytes))));
        let text = String::from_utf8(bytes)
            .map_err(|_| CliError::Core(Error::input(format!("{} is not UTF-8", path.display()))))?;
        io::parse_json(&text).map_err(|e| in_file(path, e))
    }

    fn emit(&mut self, path: &Option<PathBuf>, v: &Value) -> CliResult<()> {
        if let Some(p) = path {
            fs::write(p, io::to_canonical_string(v))
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
            self.say(format!("wrote {}", p.display()));
            self.artifacts.push(p.clone());
        }
        Ok(())
    }
}

fn in_file(path: &Path, e: Error) -> CliError {
    match e {
        Error::Input { path: p, message } => CliError::Core(Error::Input {
            path: if p.is_empty() { path.display().to_string() } else { format!("{}:{p}", path.display()) },
            message,
        }),
        other => CliError::Core(other),
    }
}

fn load_dgla(out: &mut Outcome, path: &Path) -> CliResult<io::DglaDocument> {
    let v = out.read(path)?;
    io::parse_dgla(&v).map_err(|e| in_file(path, e))
}

fn load_metric(out: &mut Outcome, doc: &io::DglaDocument, arg: &MetricArg) -> CliResult<MetricData> {
    match &arg.metric {
        None => Ok(doc.metric_or_identity()),
        Some(p) => {
            let v = out.read(p)?;
            io::parse_metric(&v, doc.dgla.shape()).map_err(|e| in_file(p, e))
        }
    }
}

fn load_action(out: &mut Outcome, l: &DgLa, path: &Path) -> CliResult<Action> {
    let v = out.read(path)?;
    io::parse_action(&v, l.shape()).map_err(|e| in_file(path, e))
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::Skipped => "skipped",
    }
}

pub fn validate_cmd(a: &ValidateArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let doc = load_dgla(&mut out, &a.dgla)?;
    let report = validate(&doc.dgla, ValidateOptions { skip_jacobi: a.skip_jacobi });
    for ax in &report.axioms {
        if ax.status == Status::Skipped {
            out.say(format!("{}: skipped", ax.axiom));
        } else {
            out.check(ax.axiom, ax.status == Status::Pass);
        }
        if let Some(w) = &ax.witness {
            out.say(format!("  witness ({}): defect {}", w.names.join(", "), w.defect));
        }
    }
    out.emit(&a.emit, &json!({ "axioms": report.axioms, "passed": report.passed() }))?;
    Ok(out)
}

fn harmonic_json(h: &HodgeData) -> Value {
    let degrees: Vec<Value> = h
        .shape()
        .degrees()
        .map(|q| {
            let basis: Vec<Value> = h
                .harmonic_basis(q)
                .iter()
                .map(|v| Value::Array(v.iter().map(io::scalar_to_json).collect()))
                .collect();
            json!({ "degree": q, "dim": basis.len(), "basis": basis })
        })
        .collect();
    Value::Array(degrees)
}

pub fn hodge_cmd(a: &HodgeArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let doc = load_dgla(&mut out, &a.dgla)?;
    let l = &doc.dgla;
    let m = load_metric(&mut out, &doc, &a.metric)?;
    let h = hodge_data(l, &m)?;
    let betti = betti_numbers(l);
    let checks = h.verify(l);
    let betti_match = betti == h.harmonic_dims();
    let fmt_counts = |c: &std::collections::BTreeMap<i32, usize>| {
        c.iter().map(|(q, n)| format!("{q}:{n}")).collect::<Vec<_>>().join(" ")
    };
    out.say(format!("betti numbers: {}", fmt_counts(&betti)));
    out.say(format!("harmonic dims: {}", fmt_counts(&h.harmonic_dims())));
    out.check("splitting_exact", checks.splitting_exact);
    out.check("hodge_identities", checks.all());
    out.check("betti_matches_harmonic", betti_match);

    let mut random = Vec::new();
    if a.random_metrics > 0 {
        out.say(format!("random metrics: {} (seed {})", a.random_metrics, a.seed));
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        for k in 0..a.random_metrics {
            let rm = random_metric(l.shape(), &mut rng, 4);
            let rh = hodge_data(l, &rm)?;
            let c = rh.verify(l);
            let b = rh.harmonic_dims() == betti;
            out.check(format!("random_metric[{k}].splitting_exact"), c.splitting_exact && c.all());
            out.check(format!("random_metric[{k}].betti_matches_harmonic"), b);
            random.push(json!({ "index": k, "checks": c, "betti_matches_harmonic": b }));
        }
    }
    let betti_json: Vec<Value> = betti.iter().map(|(q, n)| json!({ "degree": q, "betti": n })).collect();
    let report = json!({
        "betti": betti_json,
        "harmonic": harmonic_json(&h),
        "splitting_exact": checks.splitting_exact,
        "checks": checks,
        "betti_matches_harmonic": betti_match,
        "random_metrics": { "seed": a.seed, "runs": random },
    });
    out.emit(&a.emit, &report)?;
    Ok(out)
}

fn max_params() -> CliResult<usize> {
    match std::env::var(MAX_PARAMS_ENV) {
        Err(_) => Ok(DEFAULT_MAX_PARAMS),
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Core(Error::at(MAX_PARAMS_ENV, format!("not a count: '{s}'")))),
    }
}

fn solve(out: &mut Outcome, l: &DgLa, h: &HodgeData, order: u32, force: bool) -> CliResult<KuranishiFamily> {
    let opts = SolveOptions { order, max_params: max_params()?, force };
    let f = solve_kuranishi(l, h, opts)?;
    if let Some(n) = &f.notice {
        out.say(format!("notice: {n}"));
    }
    Ok(f)
}

fn describe_family(out: &mut Outcome, l: &DgLa, f: &KuranishiFamily) {
    out.say(format!("parameters: {} (order {})", f.parameters.len(), f.order));
    out.say(format!("alpha = {}", f.alpha.format_with(l.space())));
    if f.ideal_generators.is_empty() {
        out.say("ideal: (0), the germ is smooth");
    }
    for g in &f.ideal_generators {
        out.say(format!("ideal generator [{}]: {}", g.coordinate, g.polynomial.format(&f.parameters)));
    }
}

pub fn kuranishi_cmd(a: &KuranishiArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let doc = load_dgla(&mut out, &a.dgla)?;
    let l = &doc.dgla;
    let m = load_metric(&mut out, &doc, &a.metric)?;
    let h = hodge_data(l, &m)?;
    let f = solve(&mut out, l, &h, a.order, a.force)?;
    describe_family(&mut out, l, &f);
    let d = verify_family(l, &h, &f)?;
    out.check("harmonic_part_is_linear", d.harmonic_part_is_linear);
    out.check("coclosed", d.coclosed);
    out.check("kuranishi_condition", d.kuranishi_condition);
    out.check("elliptic_equation", d.elliptic_equation);
    out.check("fixed_point_identity", d.fixed_point_identity);
    out.emit(&a.emit, &io::family_to_json(&f, Some(&d)))?;
    Ok(out)
}

fn report_action_checks(out: &mut Outcome, r: &equivariance::ActionReport) {
    for c in &r.checks {
        let label = format!("action.{}", c.condition);
        match (c.status, c.informational) {
            (Status::Skipped, _) => out.say(format!("{label}: skipped")),
            (s, true) => out.say(format!("{label}: {} (informational)", status_word(s))),
            (s, false) => out.check(label, s == Status::Pass),
        }
        if let (Some(g), Some(w)) = (c.generator, &c.witness) {
            out.say(format!("  generator {g}: {w}"));
        }
    }
}

fn matrix_text(m: &kforge_core::Matrix) -> String {
    let rows: Vec<String> = m
        .to_rows()
        .iter()
        .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
        .collect();
    format!("[{}]", rows.join("; "))
}

pub fn equivariance_cmd(a: &EquivarianceArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let doc = load_dgla(&mut out, &a.dgla)?;
    let l = &doc.dgla;
    let mut m = load_metric(&mut out, &doc, &a.metric)?;
    let action = load_action(&mut out, l, &a.action)?;
    if a.average_metric {
        match &action {
            Action::Finite(g) => {
                m = average_metric(l.shape(), &m, g, a.max_group_size)?;
                out.say("metric replaced by its group average");
            }
            Action::Infinitesimal(_) => {
                return Err(Error::at("kind", "metric averaging needs a finite action").into());
            }
        }
    }
    let vr = validate_action(l, &m, &action)?;
    report_action_checks(&mut out, &vr);
    let mut doc_out = json!({ "action": vr });
    if vr.passed() {
        let h = hodge_data(l, &m)?;
        let f = solve(&mut out, l, &h, a.order, a.force)?;
        let er = match &action {
            Action::Finite(g) => check_family_equivariance(l, &h, &f, g)?,
            Action::Infinitesimal(x) => check_infinitesimal_equivariance(&h, &f, x)?,
        };
        for g in &er.generators {
            out.say(format!("generator {}: rho1 = {}, rho2 = {}", g.generator, matrix_text(&g.rho1), matrix_text(&g.rho2)));
            out.check(format!("generator[{}].alpha", g.generator), g.alpha);
            out.check(format!("generator[{}].obstruction", g.generator), g.obstruction);
            out.check(format!("generator[{}].ideal_invariant", g.generator), g.ideal_invariant);
            out.check(format!("generator[{}].mc_commutes", g.generator), g.mc_commutes);
            if let Some(w) = &g.witness {
                out.say(format!("  witness: {w}"));
            }
        }
        out.say(format!("checked through total degree {}", er.max_degree));
        doc_out["equivariance"] = serde_json::to_value(&er).expect("report serializes");
        doc_out["family"] = io::family_to_json(&f, None);
    } else {
        out.say("action invalid; family equivariance not checked");
    }
    out.emit(&a.emit, &doc_out)?;
    Ok(out)
}

pub fn average_cmd(a: &AverageArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let doc = load_dgla(&mut out, &a.dgla)?;
    let l = &doc.dgla;
    let m = load_metric(&mut out, &doc, &a.metric)?;
    let g = match load_action(&mut out, l, &a.action)? {
        Action::Finite(g) => g,
        Action::Infinitesimal(_) => return Err(Error::at("kind", "metric averaging needs a finite action").into()),
    };
    let group = group_closure(l.shape(), &g, a.max_group_size)?;
    out.say(format!("group order: {}", group.len()));
    let avg = average_metric(l.shape(), &m, &g, a.max_group_size)?;
    let full = GroupAction::new(group, None);
    let r = validate_group_action(l, &avg, &full)?;
    out.check("averaged_metric_invariant", r.status(equivariance::COND_METRIC) == Status::Pass);
    out.check("averaged_metric_positive", avg.validate().is_ok());
    out.emit(&a.emit, &io::metric_to_json(&avg, l.shape()))?;
    Ok(out)
}

pub fn gauge_cmd(a: &GaugeArgs) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let doc = load_dgla(&mut out, &a.dgla)?;
    let l = &doc.dgla;
    let xv = out.read(&a.xi)?;
    let xi = io::parse_series(&xv, l.shape()).map_err(|e| in_file(&a.xi, e))?;
    let sv = out.read(&a.series)?;
    let s = io::parse_series(&sv, l.shape()).map_err(|e| in_file(&a.series, e))?;
    let g = gauge_transform(l, &xi, &s)?;
    let back = gauge_transform(l, &xi.neg(), &g)?;
    out.say(format!("result = {}", g.format_with(l.space())));
    out.check("inverse_gauge_restores_input", back == s);
    if mc_residual(l, &s)?.is_zero() {
        out.check("maurer_cartan_preserved", mc_residual(l, &g)?.is_zero());
    }
    out.emit(&a.emit, &io::series_to_json(&g))?;
    Ok(out)
}

fn read_matrix(out: &mut Outcome, path: &Path, r: usize) -> CliResult<kforge_core::Matrix> {
    let v = out.read(path)?;
    io::parse_matrix(&v, r, r, "").map_err(|e| in_file(path, e))
}

pub fn build_cmd(b: &BuildCommand) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    match b {
        BuildCommand::TorusConstants { dim, rank, convention, emit } => {
            let conv = match convention {
                Convention::Graded => BracketConvention::Graded,
                Convention::SameWedge => BracketConvention::SameWedge,
            };
            let (l, _) = builders::torus_constants_with(*dim, *rank, conv)?;
            out.say(format!("torus constants n={dim} r={rank}: dims {:?}", l.shape().dims));
            out.emit(emit, &io::dgla_to_json(&l, None))?;
        }
        BuildCommand::Twisted { cutoff, twist, emit } => {
            let c: Scalar = twist
                .parse()
                .map_err(|e: String| CliError::Core(Error::at("--twist", e)))?;
            let (l, _) = builders::twisted_dolbeault(*cutoff, &c)?;
            out.say(format!("twisted Dolbeault M={cutoff} c={c}: dims {:?}", l.shape().dims));
            out.say("symbol of d on mode (m1, m2) is m1 + i*m2 + c (rescaled Fourier symbol)");
            out.emit(emit, &io::dgla_to_json(&l, None))?;
        }
        BuildCommand::Toy3 { emit, emit_action } => {
            let (l, _, a) = builders::toy3();
            out.say(format!("toy3: dims {:?} in degrees 1..2", l.shape().dims));
            out.emit(emit, &io::dgla_to_json(&l, None))?;
            out.emit(emit_action, &io::action_to_json(&Action::Finite(a), l.shape()))?;
        }
        BuildCommand::Conjugation { dim, rank, matrix, emit } => {
            let (l, _) = builders::torus_constants(*dim, *rank)?;
            let h = read_matrix(&mut out, matrix, *rank)?;
            let (a, info) = builders::conjugation_action(&l, &h)?;
            out.say(format!(
                "h^dagger h is {}a multiple of the identity",
                if info.unitary_up_to_scale { "" } else { "not " }
            ));
            out.emit(emit, &io::action_to_json(&Action::Finite(a), l.shape()))?;
        }
    }
    Ok(out)
}
