//! `diskharm` command-line front end.
//!
//! Exit codes: 0 success or all checks passed, 1 a verification failed,
//! 2 usage or configuration error, 3 numerical non-convergence.

use clap::{Args, Parser, Subcommand, ValueEnum};
use diskharm::boundary::{boundary_derivative, lp_circle_norm};
use diskharm::calculus::{self, LocalGeometry};
use diskharm::constants::c_of_p;
use diskharm::ellipticity::{classify, GridOptions};
use diskharm::extension::{extend_oracle, OracleBudget};
use diskharm::norms::{bergman_norm, circle_mean, hardy_norm, FieldQuantity, NormOptions};
use diskharm::suite::run_suite;
use diskharm::verify::{
    run_statement, run_statement_many, EllipticConstants, StatementId, VerifyOptions,
};
use diskharm::{
    BoundarySpec, Complex64, DiskField, Error, Exponent, ExtensionOptions, Preset, RunConfig,
    Scalar,
};
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "diskharm",
    version,
    about = "Harmonic extensions of boundary data on the unit disk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the harmonic extension f = P[F] and the quadrature oracle.
    Extend {
        #[command(flatten)]
        common: Common,
        /// Evaluation point `re,im`; repeatable. Defaults to the origin.
        #[arg(long = "at", value_parser = parse_point, allow_hyphen_values = true)]
        at: Vec<Complex64>,
    },
    /// Wirtinger and polar derivatives and the local geometry of D_f.
    Derive {
        #[command(flatten)]
        common: Common,
        /// Evaluation point `re,im`; repeatable.
        #[arg(long = "at", value_parser = parse_point, allow_hyphen_values = true, required = true)]
        at: Vec<Complex64>,
    },
    /// Circle means, Hardy and Bergman norms, or boundary L^p norms.
    Norm {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        exponents: Exponents,
        /// Circle mean at `--r`, Hardy or Bergman norm, or boundary L^p norm.
        #[arg(long, value_enum, default_value = "hardy")]
        kind: NormChoice,
        /// Scalar field: f, fz, fzbar, opnorm, min-stretch, ft, fr, ft-over-r.
        /// For `--kind boundary`: f or fdot.
        #[arg(long, default_value = "f")]
        scalar: String,
        /// Radius for `--kind circle`.
        #[arg(long)]
        r: Option<f64>,
    },
    /// The constant C(p) and its closed-form upper bound.
    Constants {
        #[command(flatten)]
        output: Output,
        #[command(flatten)]
        exponents: Exponents,
    },
    /// Estimate ellipticity constants and sup|ω|, and classify the field.
    Ellipticity {
        #[command(flatten)]
        common: Common,
        /// Comma separated list of K values to scan.
        #[arg(long = "K", default_value = "1")]
        k: String,
    },
    /// Run one checker; exits 1 if it fails.
    Verify {
        /// lemma-fr, lemma-ft, thm1-bergman, thm1-counterexample,
        /// thm2-finite-p or thm2-infinite-p.
        statement: String,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        exponents: Exponents,
        /// Quasiregularity constant K ≥ 1; required by the thm2 checkers.
        #[arg(long = "K")]
        k: Option<f64>,
        /// Additive constant K'. Omitted: estimated on the grid and inflated by 5%.
        #[arg(long = "Kprime")]
        kprime: Option<f64>,
    },
    /// Run every checker over a preset and exponent matrix.
    Suite {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        exponents: Exponents,
        /// Comma separated presets; defaults to the full catalogue.
        #[arg(long)]
        presets: Option<String>,
    },
}

#[derive(Args, Clone)]
struct Output {
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format; CSV drops the error estimates and diagnostics.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Clone)]
struct Exponents {
    /// Comma separated exponents; `inf` allowed.
    #[arg(long = "p")]
    p: Option<String>,
}

#[derive(Args, Clone)]
struct Common {
    /// Boundary specification as a JSON document.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Built-in boundary function, e.g. `abs-sin`, `mode:1`, `affine:0.5`.
    #[arg(long)]
    preset: Option<String>,
    /// Series truncation N.
    #[arg(long = "N", default_value_t = ExtensionOptions::default().truncation)]
    n: usize,
    /// Per-point truncation tolerance of the series.
    #[arg(long, default_value_t = ExtensionOptions::default().tail_tolerance)]
    tol: f64,
    /// Radial levels of the grid r = 1 - 2^-k.
    #[arg(long, default_value_t = 12)]
    levels: usize,
    /// Angles on the coarsest ellipticity grid.
    #[arg(long, default_value_t = GridOptions::default().base_angles)]
    angular: usize,
    /// Seed for the pointwise spot checks.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormChoice {
    Circle,
    Hardy,
    Bergman,
    Boundary,
}

/// A command result: the JSON document, CSV rows, and whether it passed.
struct Outcome {
    json: Value,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    pass: bool,
    /// Set when some checker failed numerically; the report is still written.
    numerical: Option<String>,
}

enum Failure {
    Usage(String),
    Lib(Error),
    Io(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(e) if e.is_numerical() => 3,
            Failure::Numerical(_) => 3,
            _ => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Numerical(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

fn parse_point(s: &str) -> Result<Complex64, String> {
    let mut it = s.split(',');
    let re = it
        .next()
        .unwrap_or_default()
        .trim()
        .parse::<f64>()
        .map_err(|e| e.to_string())?;
    let im = match it.next() {
        Some(t) => t.trim().parse::<f64>().map_err(|e| e.to_string())?,
        None => 0.0,
    };
    Ok(Complex64::new(re, im))
}

fn exponents(e: &Exponents, default: &str) -> Result<Vec<Exponent>, Failure> {
    let list = Exponent::parse_list(e.p.as_deref().unwrap_or(default))?;
    if list.is_empty() {
        return Err(Failure::Usage("--p needs at least one exponent".into()));
    }
    Ok(list)
}

fn extension_options(c: &Common) -> ExtensionOptions {
    ExtensionOptions {
        truncation: c.n,
        tail_tolerance: c.tol,
        ..ExtensionOptions::default()
    }
}

fn load_spec(c: &Common) -> Result<BoundarySpec, Failure> {
    match (&c.input, &c.preset) {
        (Some(_), Some(_)) => Err(Failure::Usage(
            "give either --input or --preset, not both".into(),
        )),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            Ok(BoundarySpec::from_json(&text)?)
        }
        (None, Some(name)) => Ok(BoundarySpec::preset(name.parse::<Preset>()?)),
        (None, None) => Err(Failure::Usage(
            "a boundary is required: --input <file> or --preset <name>".into(),
        )),
    }
}

fn load_field(c: &Common) -> Result<DiskField, Failure> {
    Ok(DiskField::new(load_spec(c)?, extension_options(c))?)
}

fn verify_options(c: &Common) -> VerifyOptions {
    VerifyOptions {
        seed: c.seed,
        grid: GridOptions {
            levels: c.levels,
            base_angles: c.angular,
        },
        ..VerifyOptions::default()
    }
    .with_levels(c.levels)
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn cmd_extend(common: &Common, at: &[Complex64]) -> Result<Outcome, Failure> {
    let field = load_field(common)?;
    let points: Vec<Complex64> = if at.is_empty() {
        vec![Complex64::new(0.0, 0.0)]
    } else {
        at.to_vec()
    };
    let mut out = Vec::new();
    let mut rows = Vec::new();
    for &z in &points {
        let e = field.eval(z)?;
        let o = extend_oracle(field.spec(), z, OracleBudget::default())?;
        rows.push(vec![
            z.re.to_string(),
            z.im.to_string(),
            e.value.re.to_string(),
            e.value.im.to_string(),
            o.value.re.to_string(),
            o.value.im.to_string(),
        ]);
        out.push(json!({
            "z": complex_json(z),
            "value": complex_json(e.value),
            "bound": e.bound,
            "degraded": e.degraded,
            "truncation": e.truncation,
            "oracle": { "value": complex_json(o.value), "error": o.error, "panels": o.panels },
            "difference": (e.value - o.value).norm(),
        }));
    }
    Ok(Outcome {
        json: json!({ "boundary": field.spec().label(), "points": out }),
        header: vec!["re", "im", "f_re", "f_im", "oracle_re", "oracle_im"],
        rows,
        pass: true,
        numerical: None,
    })
}

fn cmd_derive(common: &Common, at: &[Complex64]) -> Result<Outcome, Failure> {
    let field = load_field(common)?;
    let mut out = Vec::new();
    let mut rows = Vec::new();
    for &z in at {
        let pack = calculus::polar(&field, z)?;
        let geo = calculus::local_geometry(&field, z)?;
        let check = LocalGeometry::from_wirtinger(pack.f_z, pack.f_zbar);
        rows.push(vec![
            z.re.to_string(),
            z.im.to_string(),
            pack.f_z.norm().to_string(),
            pack.f_zbar.norm().to_string(),
            geo.op_norm.to_string(),
            geo.min_stretch.to_string(),
            geo.jacobian.to_string(),
        ]);
        out.push(json!({
            "z": complex_json(z),
            "f_z": complex_json(pack.f_z),
            "f_zbar": complex_json(pack.f_zbar),
            "f_t": complex_json(pack.f_t),
            "f_r": complex_json(pack.f_r),
            "bound": pack.bound,
            "degraded": pack.degraded,
            "op_norm": geo.op_norm,
            "min_stretch": geo.min_stretch,
            "jacobian": geo.jacobian,
            "dilatation": geo.dilatation.map(complex_json),
            "dilatation_conj_route": check.dilatation.map(complex_json),
        }));
    }
    Ok(Outcome {
        json: json!({ "boundary": field.spec().label(), "points": out }),
        header: vec![
            "re",
            "im",
            "abs_f_z",
            "abs_f_zbar",
            "op_norm",
            "min_stretch",
            "jacobian",
        ],
        rows,
        pass: true,
        numerical: None,
    })
}

fn cmd_norm(
    common: &Common,
    e: &Exponents,
    kind: NormChoice,
    scalar: &str,
    r: Option<f64>,
) -> Result<Outcome, Failure> {
    let ps = exponents(e, "2")?;
    let opts = NormOptions {
        levels: common.levels,
        ..NormOptions::default()
    };
    let mut reports = Vec::new();
    if let NormChoice::Boundary = kind {
        let spec = load_spec(common)?;
        let target = match scalar {
            "f" => spec,
            "fdot" => boundary_derivative(&spec)?,
            other => {
                return Err(Failure::Usage(format!(
                    "boundary norms take --scalar f or fdot, not `{other}`"
                )))
            }
        };
        for &p in &ps {
            reports.push(lp_circle_norm(&target, p)?);
        }
    } else {
        let field = load_field(common)?;
        let quantity: FieldQuantity = scalar.parse()?;
        let s = Scalar::of(&field, quantity);
        for &p in &ps {
            reports.push(match kind {
                NormChoice::Circle => {
                    let r = r.ok_or_else(|| Failure::Usage("--kind circle needs --r".into()))?;
                    circle_mean(&s, r, p, &opts)?
                }
                NormChoice::Hardy => hardy_norm(&s, p, &opts)?,
                NormChoice::Bergman => bergman_norm(&s, p, &opts)?,
                NormChoice::Boundary => unreachable!(),
            });
        }
    }
    let rows = reports
        .iter()
        .map(|n| {
            vec![
                to_json(&n.kind)["kind"]
                    .as_str()
                    .unwrap_or_default()
                    .to_string(),
                n.p.to_string(),
                if n.divergent {
                    "inf".into()
                } else {
                    n.value.to_string()
                },
            ]
        })
        .collect();
    Ok(Outcome {
        json: json!({ "scalar": scalar, "reports": reports }),
        header: vec!["kind", "p", "value"],
        rows,
        pass: true,
        numerical: None,
    })
}

fn cmd_constants(e: &Exponents) -> Result<Outcome, Failure> {
    let ps = exponents(e, "1")?;
    let mut reports = Vec::new();
    for p in ps {
        match p {
            Exponent::Finite(v) => reports.push(c_of_p(v)?),
            Exponent::Infinity => return Err(Error::UnsupportedExponent(f64::INFINITY).into()),
        }
    }
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.p.to_string(),
                r.c_value.to_string(),
                r.upper_bound.to_string(),
                r.margin.to_string(),
            ]
        })
        .collect();
    Ok(Outcome {
        json: to_json(&reports),
        header: vec!["p", "C(p)", "bound", "margin"],
        rows,
        pass: true,
        numerical: None,
    })
}

fn cmd_ellipticity(common: &Common, k: &str) -> Result<Outcome, Failure> {
    let field = load_field(common)?;
    let ks = k
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("bad K value `{t}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let grid = GridOptions {
        levels: common.levels,
        base_angles: common.angular,
    };
    let report = classify(&field, &ks, &grid)?;
    let rows = report
        .scan
        .iter()
        .map(|s| {
            vec![
                s.k.to_string(),
                s.kprime.to_string(),
                report.qr_constant.to_string(),
            ]
        })
        .collect();
    Ok(Outcome {
        json: json!({ "boundary": field.spec().label(), "report": report }),
        header: vec!["K", "Kprime_estimate", "qr_constant"],
        rows,
        pass: true,
        numerical: None,
    })
}

fn report_rows(reports: &[diskharm::VerificationReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|r| {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            vec![
                r.statement_id.to_string(),
                r.parameters.boundary.clone(),
                r.parameters.p.map(|p| p.to_string()).unwrap_or_default(),
                opt(r.parameters.k),
                opt(r.parameters.kprime),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.margin.to_string(),
                r.pass.to_string(),
            ]
        })
        .collect()
}

const REPORT_HEADER: [&str; 9] = [
    "statement_id",
    "boundary",
    "p",
    "K",
    "Kprime",
    "lhs",
    "rhs",
    "margin",
    "pass",
];

fn cmd_verify(
    statement: &str,
    common: &Common,
    e: &Exponents,
    k: Option<f64>,
    kprime: Option<f64>,
) -> Result<Outcome, Failure> {
    let id: StatementId = statement.parse()?;
    let opts = verify_options(common);
    let constants = EllipticConstants { k, kprime };
    let reports = if id == StatementId::Thm1Counterexample {
        let field = DiskField::new(
            BoundarySpec::preset(Preset::AbsSin),
            extension_options(common),
        )?;
        vec![run_statement(
            id,
            &field,
            Exponent::Infinity,
            constants,
            &opts,
        )?]
    } else {
        let field = load_field(common)?;
        let ps = match id {
            StatementId::Thm2InfiniteP => vec![Exponent::Infinity],
            _ => exponents(e, "2")?,
        };
        run_statement_many(id, &field, &ps, constants, &opts)?
    };
    let pass = reports.iter().all(|r| r.pass);
    let json = if reports.len() == 1 {
        to_json(&reports[0])
    } else {
        to_json(&reports)
    };
    Ok(Outcome {
        rows: report_rows(&reports),
        json,
        header: REPORT_HEADER.to_vec(),
        pass,
        numerical: None,
    })
}

fn cmd_suite(common: &Common, e: &Exponents, presets: Option<&str>) -> Result<Outcome, Failure> {
    if common.input.is_some() || common.preset.is_some() {
        return Err(Failure::Usage(
            "suite takes --presets, not --input or --preset".into(),
        ));
    }
    let mut config = RunConfig {
        truncation: common.n,
        tol: common.tol,
        levels: common.levels,
        angular: common.angular,
        seed: common.seed,
        ..RunConfig::default()
    };
    if let Some(list) = presets {
        config.presets = list
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<Preset>())
            .collect::<Result<_, _>>()?;
    }
    if e.p.is_some() {
        config.exponents = exponents(e, "")?;
    }
    let report = run_suite(&config)?;
    for err in &report.errors {
        eprintln!(
            "error: {} on {}: {}",
            err.statement_id, err.boundary, err.error
        );
    }
    let numerical = report.has_numerical_errors().then(|| {
        format!(
            "{} checker(s) failed numerically",
            report.errors.iter().filter(|e| e.numerical).count()
        )
    });
    Ok(Outcome {
        rows: report_rows(&report.reports),
        pass: report.pass,
        json: to_json(&report),
        header: REPORT_HEADER.to_vec(),
        numerical,
    })
}

fn write_output(output: &Output, outcome: &Outcome) -> Result<(), Failure> {
    let mut buf = Vec::new();
    match output.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &outcome.json)
                .map_err(|e| Failure::Io(e.to_string()))?;
            buf.push(b'\n');
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&outcome.header)
                .map_err(|e| Failure::Io(e.to_string()))?;
            for row in &outcome.rows {
                w.write_record(row)
                    .map_err(|e| Failure::Io(e.to_string()))?;
            }
            w.flush().map_err(|e| Failure::Io(e.to_string()))?;
        }
    }
    match &output.out {
        Some(path) => {
            std::fs::write(path, &buf).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|e| Failure::Io(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let (output, outcome) = match &cli.command {
        Command::Extend { common, at } => (&common.output, cmd_extend(common, at)?),
        Command::Derive { common, at } => (&common.output, cmd_derive(common, at)?),
        Command::Norm {
            common,
            exponents,
            kind,
            scalar,
            r,
        } => (
            &common.output,
            cmd_norm(common, exponents, *kind, scalar, *r)?,
        ),
        Command::Constants { output, exponents } => (output, cmd_constants(exponents)?),
        Command::Ellipticity { common, k } => (&common.output, cmd_ellipticity(common, k)?),
        Command::Verify {
            statement,
            common,
            exponents,
            k,
            kprime,
        } => (
            &common.output,
            cmd_verify(statement, common, exponents, *k, *kprime)?,
        ),
        Command::Suite {
            common,
            exponents,
            presets,
        } => (
            &common.output,
            cmd_suite(common, exponents, presets.as_deref())?,
        ),
    };
    write_output(output, &outcome)?;
    match outcome.numerical {
        Some(m) => Err(Failure::Numerical(m)),
        None => Ok(outcome.pass),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("diskharm: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
