//! Command-line front-end: argument parsing, dispatch to the core library,
//! and JSON/CSV rendering with the request settings echoed for provenance.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use linegerm::classify::{
    classify_germ, normal_form, ClassifyOptions, GermClassification, Relation,
};
use linegerm::conjugacy::{
    builtin, c0_conjugacy, c1_conjugator_with, rectify_regular, scale_conjugacy,
    solve_homological_with, ConjugacyWitness, HomologicalOptions, BUILTINS,
};
use linegerm::flows::{flow_with, verify_conjugacy, FlowOptions, VerifyGrid, X_MAX};
use linegerm::jets::DEFAULT_ZERO_TOL;
use linegerm::quad::QuadTolerance;
use linegerm::unfold::{
    build_unfolding, sweep, FamilyKind, ParamRange, SweepOptions, DEFAULT_GRID_CAP,
};
use linegerm::Expression;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "linegerm",
    version,
    about = "Classify and conjugate germs of vector fields on the line"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a germ and list its normal forms.
    Classify(ClassifyArgs),
    /// Print one normal form of a germ.
    NormalForm(NormalFormArgs),
    /// Build a conjugating map and sample it.
    Conjugate(ConjugateArgs),
    /// Check a conjugacy numerically on a grid of points and times.
    Verify(VerifyArgs),
    /// Solve the homological equation for a deformation.
    Homological(HomologicalArgs),
    /// Integrate the flow of a field.
    Flow(FlowArgs),
    /// Sweep an unfolding family and tabulate its equilibria.
    Unfold(UnfoldArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the document here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GermArgs {
    /// Largest degeneracy order searched for.
    #[arg(long, default_value_t = 7)]
    pub max_order: usize,
    /// Relative zero threshold for jet coefficients.
    #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
    pub tol: f64,
    /// Classify flat germs by sampling the sign of the field.
    #[arg(long)]
    pub sample_signs: bool,
}

impl GermArgs {
    fn options(&self) -> ClassifyOptions {
        ClassifyOptions {
            max_order: self.max_order,
            tol: self.tol,
            sample_signs: self.sample_signs,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    /// Field expression in `x`.
    #[arg(long, allow_hyphen_values = true)]
    pub field: String,
    #[command(flatten)]
    pub germ: GermArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationArg {
    C0,
    C1,
    Cinf,
}

impl From<RelationArg> for Relation {
    fn from(r: RelationArg) -> Relation {
        match r {
            RelationArg::C0 => Relation::C0,
            RelationArg::C1 => Relation::C1,
            RelationArg::Cinf => Relation::Cinf,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct NormalFormArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub field: String,
    #[arg(long, value_enum, default_value = "cinf")]
    pub relation: RelationArg,
    /// Use the tangent-to-identity form.
    #[arg(long)]
    pub tti: bool,
    #[command(flatten)]
    pub germ: GermArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Topological conjugacy of `f` onto `g`.
    C0,
    /// Smooth conjugacy of `f` onto its normal form.
    C1,
    /// Straightening of a regular field.
    Rectify,
    /// Scaling between `b x^k` and `a x^k`.
    Scale,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstructionArgs {
    /// Source field.
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,
    /// Target field (for the c0 method).
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
    /// Half-width of the neighborhood used by the construction.
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    /// Target the tangent-to-identity normal form.
    #[arg(long)]
    pub tti: bool,
    /// Coefficients and order for the scale method.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub k: Option<u32>,
    #[command(flatten)]
    pub germ: GermArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ConjugateArgs {
    #[arg(long, value_enum, default_value = "c0")]
    pub method: Method,
    #[command(flatten)]
    pub build: ConstructionArgs,
    /// Number of sample points of the map.
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Map to check: `builtin:<name>`, or one of c0, c1, rectify, scale.
    #[arg(long, default_value = "c0")]
    pub map: String,
    #[command(flatten)]
    pub build: ConstructionArgs,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 21)]
    pub nx: usize,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub t_max: f64,
    #[arg(long, default_value_t = 11)]
    pub nt: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct HomologicalArgs {
    /// Degenerate germ `f`.
    #[arg(long, allow_hyphen_values = true)]
    pub f: String,
    /// Deformation coefficient `g`.
    #[arg(long, allow_hyphen_values = true)]
    pub g: String,
    /// Deformation coefficient `k`.
    #[arg(long, allow_hyphen_values = true)]
    pub k: String,
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub quad_abs: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub quad_rel: f64,
    #[arg(long, default_value_t = 41)]
    pub samples: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct FlowArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub field: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    /// Escape bound on `|x|`.
    #[arg(long, default_value_t = X_MAX)]
    pub escape: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum FamilyArg {
    #[value(name = "Q")]
    Q,
    #[value(name = "Q1")]
    Q1,
    #[value(name = "F")]
    F,
    #[value(name = "F1")]
    F1,
}

impl From<FamilyArg> for FamilyKind {
    fn from(f: FamilyArg) -> FamilyKind {
        match f {
            FamilyArg::Q => FamilyKind::Q,
            FamilyArg::Q1 => FamilyKind::Q1,
            FamilyArg::F => FamilyKind::F,
            FamilyArg::F1 => FamilyKind::F1,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct UnfoldArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub k: usize,
    /// Leading coefficient (Q1, F1).
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Modulus (F, F1).
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<f64>,
    /// Leading sign of family F.
    #[arg(long, allow_hyphen_values = true)]
    pub sign: Option<i8>,
    /// Sweep the modulus as an extra last parameter.
    #[arg(long)]
    pub modulus_parameter: bool,
    /// One range per parameter, `lo:hi:count` or a single value. Missing
    /// ranges default to `-1:1:5`.
    #[arg(long = "range", allow_hyphen_values = true)]
    pub ranges: Vec<String>,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub window_lo: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub window_hi: f64,
    /// Largest grid size accepted.
    #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
    pub cap: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

/// A rendered document and where it goes.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub body: String,
    pub output: Option<PathBuf>,
}

/// Process outcome: exit code plus the text for each stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and runs the request.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let result = dispatch(&cli.command).and_then(|r| match &r.output {
        Some(path) => fs::write(path, &r.body)
            .map(|_| String::new())
            .map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            }),
        None => Ok(r.body),
    });
    match result {
        Ok(stdout) => Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("linegerm: {e}\n"),
        },
    }
}

fn parse_expr(text: &str, what: &str) -> Result<Expression, CliError> {
    Expression::parse(text)
        .map_err(|e| CliError::Usage(format!("cannot parse {what} `{text}`: {e}")))
}

fn required<'a>(value: &'a Option<String>, flag: &str, context: &str) -> Result<&'a str, CliError> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("{context} needs --{flag}")))
}

fn settings<S: Serialize>(s: &S) -> Value {
    serde_json::to_value(s).expect("settings serialize")
}

// `{"verb", "settings", ...result}` as pretty JSON.
fn json_document(verb: &str, settings: Value, result: Value) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("verb".into(), json!(verb));
    doc.insert("settings".into(), settings);
    match result {
        Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("result".into(), other);
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("document serializes");
    text.push('\n');
    text
}

// Provenance line `# linegerm <verb> key=value ...` followed by the table.
fn csv_document(verb: &str, settings: &Value, table: &str) -> String {
    let mut line = format!("# linegerm {verb}");
    flatten_settings(settings, "", &mut line);
    format!("{line}\n{table}")
}

// Appends ` key=value` pairs, with nested objects as dotted keys.
fn flatten_settings(value: &Value, prefix: &str, line: &mut String) {
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                let key = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten_settings(v, &key, line);
            }
        }
        Value::String(s) if !s.contains(char::is_whitespace) => {
            line.push_str(&format!(" {prefix}={s}"))
        }
        other => line.push_str(&format!(" {prefix}={other}")),
    }
}

fn render(
    verb: &str,
    out: &OutputArgs,
    settings: Value,
    json: Value,
    csv: Option<String>,
) -> Result<Rendered, CliError> {
    let body = match out.format {
        Format::Json => json_document(verb, settings, json),
        Format::Csv => {
            let table = csv.ok_or_else(|| CliError::Usage(format!("{verb} has no CSV output")))?;
            csv_document(verb, &settings, &table)
        }
    };
    Ok(Rendered {
        body,
        output: out.output.clone(),
    })
}

fn classify(field: &str, germ: &GermArgs) -> Result<GermClassification, CliError> {
    let f = parse_expr(field, "field")?;
    classify_germ(&f, &germ.options()).map_err(domain)
}

/// Runs one parsed command and renders its document.
pub fn dispatch(command: &Command) -> Result<Rendered, CliError> {
    match command {
        Command::Classify(args) => {
            let c = classify(&args.field, &args.germ)?;
            let report = serde_json::to_value(c.report()).expect("report serializes");
            render("classify", &args.out, settings(args), report, None)
        }
        Command::NormalForm(args) => {
            let c = classify(&args.field, &args.germ)?;
            let nf = normal_form(&c, args.relation.into(), args.tti).map_err(domain)?;
            let result = json!({
                "kind": c.kind,
                "k": c.k,
                "relation": nf.relation,
                "tangent_to_identity": nf.tangent_to_identity,
                "expression": nf.to_string(),
                "terms": nf.terms.iter().map(|&(n, v)| json!({"degree": n, "coefficient": v})).collect::<Vec<_>>(),
            });
            let csv =
                nf.terms
                    .iter()
                    .fold(String::from("degree,coefficient\n"), |mut s, (n, v)| {
                        s.push_str(&format!("{n},{v}\n"));
                        s
                    });
            render("normal-form", &args.out, settings(args), result, Some(csv))
        }
        Command::Conjugate(args) => {
            let w = construct(args.method, &args.build)?;
            let result = json!({
                "witness": w.summary(),
                "samples": w.samples(args.samples),
            });
            let csv = w.to_csv(args.samples);
            render("conjugate", &args.out, settings(args), result, Some(csv))
        }
        Command::Verify(args) => verify(args),
        Command::Homological(args) => {
            let f = parse_expr(&args.f, "f")?;
            let g = parse_expr(&args.g, "g")?;
            let k = parse_expr(&args.k, "k")?;
            let opts = HomologicalOptions {
                radius: args.radius,
                tol: QuadTolerance {
                    abs: args.quad_abs,
                    rel: args.quad_rel,
                    ..QuadTolerance::default()
                },
                grid: args.grid,
            };
            let s = solve_homological_with(&f, &g, &k, &opts).map_err(domain)?;
            let n = args.samples.max(2);
            let mut rows = Vec::with_capacity(n);
            let mut csv = String::from("x,value,derivative\n");
            for i in 0..n {
                let x = -s.radius + 2.0 * s.radius * i as f64 / (n - 1) as f64;
                let value = s.eval(x).map_err(domain)?;
                let derivative = s.eval_derivative(x).ok();
                csv.push_str(&format!(
                    "{x},{value},{}\n",
                    derivative.map(|d| d.to_string()).unwrap_or_default()
                ));
                rows.push(json!({"x": x, "value": value, "derivative": derivative}));
            }
            let mut result = serde_json::to_value(s.summary()).expect("summary serializes");
            result["samples"] = Value::Array(rows);
            render("homological", &args.out, settings(args), result, Some(csv))
        }
        Command::Flow(args) => {
            let f = parse_expr(&args.field, "field")?;
            let opts = FlowOptions {
                rtol: args.rtol,
                atol: args.atol,
                x_max: args.escape,
                ..FlowOptions::default()
            };
            let r = flow_with(&f, args.x0, args.t, &opts).map_err(domain)?;
            let result = serde_json::to_value(r).expect("flow result serializes");
            let status = result["status"].as_str().unwrap_or_default().to_string();
            let csv = format!(
                "x0,t,value,status\n{},{},{},{status}\n",
                args.x0, args.t, r.value
            );
            render("flow", &args.out, settings(args), result, Some(csv))
        }
        Command::Unfold(args) => unfold(args),
    }
}

fn construct(method: Method, b: &ConstructionArgs) -> Result<ConjugacyWitness, CliError> {
    let context = format!("method {}", method_name(method));
    match method {
        Method::C0 => {
            let f = parse_expr(required(&b.f, "f", &context)?, "f")?;
            let g = parse_expr(required(&b.g, "g", &context)?, "g")?;
            c0_conjugacy(&f, &g, b.eps).map_err(domain)
        }
        Method::C1 => {
            let f = parse_expr(required(&b.f, "f", &context)?, "f")?;
            c1_conjugator_with(&f, b.eps, b.tti, &b.germ.options()).map_err(domain)
        }
        Method::Rectify => {
            let f = parse_expr(required(&b.f, "f", &context)?, "f")?;
            rectify_regular(&f, b.tti, b.eps).map_err(domain)
        }
        Method::Scale => {
            let missing = |flag: &str| CliError::Usage(format!("{context} needs --{flag}"));
            let a = b.a.ok_or_else(|| missing("a"))?;
            let bb = b.b.ok_or_else(|| missing("b"))?;
            let k = b.k.ok_or_else(|| missing("k"))?;
            scale_conjugacy(a, bb, k).map_err(domain)
        }
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::C0 => "c0",
        Method::C1 => "c1",
        Method::Rectify => "rectify",
        Method::Scale => "scale",
    }
}

fn verify(args: &VerifyArgs) -> Result<Rendered, CliError> {
    let b = &args.build;
    let witness = if let Some(name) = args.map.strip_prefix("builtin:") {
        builtin(name)
            .map_err(|e| CliError::Usage(format!("{e}; available: {}", BUILTINS.join(", "))))?
    } else {
        let method = Method::from_str(&args.map, true).map_err(|_| {
            CliError::Usage(format!(
                "unknown map `{}` (expected builtin:<name>, c0, c1, rectify or scale)",
                args.map
            ))
        })?;
        construct(method, b)?
    };
    let f = parse_expr(required(&b.f, "f", "verify")?, "f")?;
    let g = match (&b.g, &witness.target) {
        (Some(g), _) => parse_expr(g, "g")?,
        (None, Some(target)) => target.clone(),
        (None, None) => return Err(CliError::Usage("verify needs --g for this map".into())),
    };
    let grid = VerifyGrid::uniform(
        (args.x_min, args.x_max),
        args.nx,
        (args.t_min, args.t_max),
        args.nt,
    );
    let report = verify_conjugacy(&f, &g, &witness, &grid).map_err(domain)?;
    let result = json!({
        "max_residual": report.max_residual,
        "evaluated": report.evaluated,
        "skipped": report.skipped,
        "g": g.to_string(),
        "witness": witness.summary(),
    });
    render(
        "verify",
        &args.out,
        settings(args),
        result,
        Some(report.to_csv()),
    )
}

fn parse_range(text: &str, index: usize) -> Result<ParamRange, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "range {} `{text}` is not `lo:hi:count` or a number",
            index + 1
        ))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(ParamRange::fixed(v.trim().parse().map_err(|_| bad())?)),
        [lo, hi, n] => Ok(ParamRange::new(
            lo.trim().parse().map_err(|_| bad())?,
            hi.trim().parse().map_err(|_| bad())?,
            n.trim().parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

fn unfold(args: &UnfoldArgs) -> Result<Rendered, CliError> {
    let mut fam = build_unfolding(args.family.into(), args.k, args.a, args.d).map_err(domain)?;
    if let Some(sign) = args.sign {
        fam = fam.with_sign(sign).map_err(domain)?;
    }
    if args.modulus_parameter {
        fam = fam.with_modulus_parameter();
    }
    let p = fam.param_count();
    if args.ranges.len() > p {
        return Err(CliError::Usage(format!(
            "family {} with k = {} has {p} parameters but {} ranges were given",
            fam.kind,
            fam.k,
            args.ranges.len()
        )));
    }
    let mut grid = args
        .ranges
        .iter()
        .enumerate()
        .map(|(i, r)| parse_range(r, i))
        .collect::<Result<Vec<_>, _>>()?;
    grid.resize(p, ParamRange::new(-1.0, 1.0, 5));
    let opts = SweepOptions {
        window: (args.window_lo, args.window_hi),
        cap: args.cap,
    };
    let table = sweep(&fam, &grid, &opts).map_err(domain)?;
    let result = json!({
        "family": fam,
        "grid": grid,
        "rows": table.rows,
    });
    render(
        "unfold",
        &args.out,
        settings(args),
        result,
        Some(table.to_csv()),
    )
}
