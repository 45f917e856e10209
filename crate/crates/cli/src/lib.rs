//! Request handling for the `realization-lab` command line tool.
//!
//! A request is a command, an input document, a seed and tolerances. The
//! report embeds the full request, so re-running `report.request` yields
//! the same bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use realization_core::echelon::{
    block_echelon_reduce, build_selector_t, check_row_spec, jordan_row_spec, sample_controllable_b,
};
use realization_core::families::{
    conjecture_probe, family_report, invariant_subspace_containment, inverse_matrix_family,
};
use realization_core::feedback::{
    completion_disjoint, minimality_equivalence_report, per_eigenvalue_completion, siso_all_d_check,
};
use realization_core::generate::derive_seed;
use realization_core::io::{matrix_serde, MatrixRef, Scalar};
use realization_core::minimality::{
    alpha, is_minimal, is_minimal_kalman, pbh_controllable, rank_formula_check,
};
use realization_core::numeric::{cluster_eigenvalues, numeric_rank, spectrum};
use realization_core::squaring::{
    reduced_square, square_realization, square_with_transform, transfer_identity_error,
    SquaringTransform,
};
use realization_core::{CMatrix, Complex64, Error, JordanSpec, Realization, RowSpec, Tolerances};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Number of sample points used to confirm the squared transfer identity.
const TRANSFER_POINTS: usize = 10;

/// Scalar `D` samples for the SISO all-`D` check.
const SISO_D_SAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Minimality verdict, alpha and the rank formula.
    Analyze,
    /// Square realization with alpha inputs and outputs.
    Square,
    /// The four minimality criteria side by side.
    Feedback,
    /// Completions of the D block.
    Complete,
    /// psi(L), its minimality chain and the inverse family.
    Family,
    /// Random search for minimal systems with spect(A) meeting spect(L).
    Probe,
    /// Row spec, echelon reduction and selector for a Jordan structure.
    Echelon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

/// Everything needed to reproduce one report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRequest {
    pub command: Command,
    pub seed: u64,
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<Scalar>>,
    pub input: Value,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CliError {
    /// 2 for input problems, 3 for numerical breakdown.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_input_error() => 3,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(Error::Dimension(_)) => "dimension",
            CliError::Core(Error::NonFinite(_)) => "non_finite",
            CliError::Core(Error::Precondition(_)) => "precondition",
            CliError::Core(Error::IndexOutOfRange { .. }) => "index_out_of_range",
            CliError::Core(Error::PoleEvaluation { .. }) => "pole_evaluation",
            CliError::Core(Error::SingularBridge { .. }) => "singular_bridge",
            CliError::Core(Error::SingularFamily) => "singular_family",
            CliError::Core(Error::NoGainFound { .. }) => "no_gain_found",
            CliError::Core(Error::NumericalBreakdown(_)) => "numerical_breakdown",
            CliError::Core(Error::InvariantFailure(_)) => "invariant_failure",
            CliError::Input(_) => "schema",
            CliError::Io { .. } => "io",
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn parse<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> CliResult<T> {
    serde_json::from_value(v).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

fn object(input: &Value) -> CliResult<serde_json::Map<String, Value>> {
    input
        .as_object()
        .cloned()
        .ok_or_else(|| CliError::Input("input must be a JSON object".into()))
}

/// Splits the realization keys `A, B, C, D` from command-specific extras.
fn split_system(
    input: &Value,
    extras: &[&str],
) -> CliResult<(Realization, serde_json::Map<String, Value>)> {
    let mut obj = object(input)?;
    let mut rest = serde_json::Map::new();
    for key in extras {
        if let Some(v) = obj.remove(*key) {
            rest.insert((*key).to_string(), v);
        }
    }
    Ok((parse(Value::Object(obj), "system")?, rest))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values are serializable")
}

fn matrix_value(m: &CMatrix) -> Value {
    to_value(&MatrixRef(m))
}

fn optional_matrix(
    extra: &serde_json::Map<String, Value>,
    key: &str,
) -> CliResult<Option<CMatrix>> {
    #[derive(Deserialize)]
    struct M(#[serde(with = "matrix_serde")] CMatrix);
    extra
        .get(key)
        .cloned()
        .map(|v| parse::<M>(v, key).map(|m| m.0))
        .transpose()
}

fn dims(r: &Realization) -> Value {
    json!({ "n": r.n(), "m": r.m(), "p": r.p() })
}

fn analyze(req: &AnalysisRequest) -> CliResult<Value> {
    let (r, _) = split_system(&req.input, &[])?;
    let tol = &req.tolerances;
    Ok(json!({
        "dims": dims(&r),
        "verdict": to_value(&is_minimal(&r, tol)?),
        "kalman_minimal": is_minimal_kalman(&r, tol)?,
        "alpha": alpha(r.a(), tol)?,
        "clusters": to_value(&cluster_eigenvalues(r.a(), tol)?),
        "rank_formula": to_value(&rank_formula_check(&r, tol)?),
        "spectrum_A": to_value(&spectrum(r.a())?.values),
        "spectrum_L": if r.is_square() { to_value(&spectrum(&r.assemble_l().l)?.values) } else { Value::Null },
    }))
}

fn square(req: &AnalysisRequest) -> CliResult<Value> {
    let (r, extra) = split_system(&req.input, &["T_b", "T_c"])?;
    let tol = &req.tolerances;
    let t_b = optional_matrix(&extra, "T_b")?;
    let t_c = optional_matrix(&extra, "T_c")?;
    let (sq, x, source) = match (t_b, t_c) {
        (None, None) => {
            let (sq, x) = square_realization(&r, tol, req.seed)?;
            (sq, x, "constructed")
        }
        (t_b, t_c) => {
            let k = t_b
                .as_ref()
                .map(|t| t.ncols())
                .or(t_c.as_ref().map(|t| t.nrows()))
                .unwrap_or(0);
            let t_b = t_b.unwrap_or_else(|| CMatrix::identity(r.m(), k));
            let t_c = t_c.unwrap_or_else(|| CMatrix::identity(k, r.p()));
            let sq = square_with_transform(&r, &t_b, &t_c)?;
            (sq, SquaringTransform { t_b, t_c, alpha: k }, "supplied")
        }
    };
    Ok(json!({
        "dims": dims(&r),
        "transform_source": source,
        "transform": to_value(&x),
        "alpha": alpha(r.a(), tol)?,
        "L_sq": matrix_value(&sq.assemble_l().l),
        "realization": to_value(&sq),
        "verdict": to_value(&is_minimal(&sq, tol)?),
        "transfer_identity_error": transfer_identity_error(&r, &sq, &x, TRANSFER_POINTS, tol)?,
    }))
}

fn feedback(req: &AnalysisRequest) -> CliResult<Value> {
    let (r, _) = split_system(&req.input, &[])?;
    let report = minimality_equivalence_report(&r, &req.tolerances, req.seed)?;
    Ok(json!({ "dims": dims(&r), "criteria": to_value(&report) }))
}

fn complete(req: &AnalysisRequest) -> CliResult<Value> {
    let (r, _) = split_system(&req.input, &[])?;
    let tol = &req.tolerances;
    let verdict = is_minimal(&r, tol)?;
    let given = if r.is_square() {
        to_value(&completion_disjoint(r.a(), r.b(), r.c(), r.d(), tol)?)
    } else {
        Value::Null
    };
    let (sq, squared_by) = if verdict.minimal {
        (square_realization(&r, tol, req.seed)?.0, "minimal")
    } else {
        (reduced_square(&r, tol, req.seed)?.0, "reduced")
    };
    let per = per_eigenvalue_completion(sq.a(), sq.b(), sq.c(), tol)?;
    let siso = if r.m() == 1 && r.p() == 1 && verdict.minimal {
        Value::Bool(siso_all_d_check(
            &r,
            SISO_D_SAMPLES,
            derive_seed(req.seed, 1),
            tol,
        )?)
    } else {
        Value::Null
    };
    Ok(json!({
        "dims": dims(&r),
        "minimal": verdict.minimal,
        "given_D": given,
        "squared_by": squared_by,
        "squared_dim": sq.m(),
        "all_cleared": per.iter().all(|pl| pl.cleared),
        "per_eigenvalue": to_value(&per),
        "siso_all_D": siso,
    }))
}

fn family(req: &AnalysisRequest) -> CliResult<Value> {
    let (r, extra) = split_system(&req.input, &["psi"])?;
    let psi: Vec<Complex64> = match (&req.psi, extra.get("psi")) {
        (Some(p), _) => p.iter().map(|z| z.0).collect(),
        (None, Some(v)) => parse::<Vec<Scalar>>(v.clone(), "psi")?
            .into_iter()
            .map(|z| z.0)
            .collect(),
        (None, None) => return Err(CliError::Input("family needs psi coefficients".into())),
    };
    let tol = &req.tolerances;
    let rep = family_report(&r, &psi, tol)?;
    let psi_l = rep.tilde.assemble_l().l;
    let inverse = match inverse_matrix_family(&r, tol) {
        Ok(inv) => json!({
            "realization": to_value(&inv),
            "minimal": is_minimal(&inv, tol)?.minimal,
        }),
        Err(Error::SingularFamily) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    Ok(json!({
        "dims": dims(&r),
        "report": to_value(&rep),
        "spectrum_psi_L": to_value(&spectrum(&psi_l)?.values),
        "spectrum_tilde_A": to_value(&spectrum(rep.tilde.a())?.values),
        "containment": invariant_subspace_containment(&r.assemble_l().l, &psi, tol)?,
        "inverse": inverse,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeInput {
    n: usize,
    p: usize,
    trials: usize,
}

fn probe(req: &AnalysisRequest) -> CliResult<Value> {
    let input: ProbeInput = parse(req.input.clone(), "probe input")?;
    let out = conjecture_probe(input.n, input.p, input.trials, req.seed, &req.tolerances)?;
    Ok(to_value(&out))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EchelonInput {
    jordan: JordanSpec,
    #[serde(rename = "B", default, with = "realization_core::io::opt_matrix_serde")]
    b: Option<CMatrix>,
    m: Option<usize>,
}

fn one_based(spec: &RowSpec) -> Value {
    Value::Array(
        spec.blocks()
            .iter()
            .map(|b| json!({ "height": b.height, "rows": b.rows.iter().map(|r| r + 1).collect::<Vec<_>>() }))
            .collect(),
    )
}

fn echelon(req: &AnalysisRequest) -> CliResult<Value> {
    let input: EchelonInput = parse(req.input.clone(), "echelon input")?;
    let tol = &req.tolerances;
    let spec = input.jordan;
    let rows = jordan_row_spec(&spec);
    let (b, sampled) = match (input.b, input.m) {
        (Some(b), _) => (b, false),
        (None, Some(m)) => (sample_controllable_b(&spec, m, req.seed, tol)?, true),
        (None, None) => return Err(CliError::Input("echelon needs \"B\" or \"m\"".into())),
    };
    let satisfied = check_row_spec(&b, &rows, tol)?;
    let a = spec.assemble();
    let mut out = json!({
        "n": spec.n(),
        "alpha": spec.alpha(),
        "rho": rows.rho(),
        "row_spec": one_based(&rows),
        "B_sampled": sampled,
        "B": matrix_value(&b),
        "rank_B": numeric_rank(&b, tol),
        "spec_satisfied": satisfied,
        "controllable": pbh_controllable(&a, &b, tol)?.holds,
    });
    if satisfied {
        let e = block_echelon_reduce(&b, &rows, tol)?;
        let t = build_selector_t(&b, &rows, tol, derive_seed(req.seed, 1))?;
        let extra = json!({
            "U": matrix_value(&e.u),
            "B_tilde": matrix_value(&e.reduced),
            "pivots": e.pivots.iter().map(|p| p.iter().map(|c| c + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "T": matrix_value(&t),
            "BT": matrix_value(&(&b * &t)),
        });
        if let (Value::Object(o), Value::Object(x)) = (&mut out, extra) {
            o.extend(x);
        }
    }
    Ok(out)
}

fn compute(req: &AnalysisRequest) -> CliResult<Value> {
    req.tolerances.validate()?;
    match req.command {
        Command::Analyze => analyze(req),
        Command::Square => square(req),
        Command::Feedback => feedback(req),
        Command::Complete => complete(req),
        Command::Family => family(req),
        Command::Probe => probe(req),
        Command::Echelon => echelon(req),
    }
}

/// Runs a request; the report always embeds the request.
pub fn run(req: &AnalysisRequest) -> (Value, i32) {
    let request = to_value(req);
    match compute(req) {
        Ok(result) => (
            json!({ "request": request, "status": "ok", "result": result }),
            0,
        ),
        Err(e) => {
            let code = e.exit_code();
            (error_report(Some(request), &e), code)
        }
    }
}

/// Machine-readable error document.
pub fn error_report(request: Option<Value>, e: &CliError) -> Value {
    let status = if e.exit_code() == 3 {
        "numerical_breakdown"
    } else {
        "input_error"
    };
    json!({
        "request": request.unwrap_or(Value::Null),
        "status": status,
        "error": { "kind": e.kind(), "message": e.to_string() },
    })
}

/// Reads and parses a JSON input file.
pub fn read_input(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Tolerances with command-line overrides applied.
pub fn tolerances(rank_tol: Option<f64>, eig_tol: Option<f64>) -> Tolerances {
    let mut tol = Tolerances::default();
    if let Some(x) = rank_tol {
        tol.rank_rel = x;
    }
    if let Some(x) = eig_tol {
        tol.eig_match = x;
    }
    tol
}

/// Canonical serialization of a report.
pub fn to_json(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Reports write complex numbers as pairs of floats; integer pairs (counts,
/// indices, plain-number input) are left alone.
fn complex_of(v: &Value) -> Option<(f64, f64)> {
    match v.as_array()?.as_slice() {
        [re, im] if re.is_f64() && im.is_f64() => Some((re.as_f64()?, im.as_f64()?)),
        _ => None,
    }
}

fn fmt_complex(re: f64, im: f64) -> String {
    if im == 0.0 {
        format!("{re:.6}")
    } else {
        let sign = if im < 0.0 { '-' } else { '+' };
        format!("{re:.6}{sign}{:.6}i", im.abs())
    }
}

fn matrix_rows(v: &Value) -> Option<Vec<Vec<(f64, f64)>>> {
    let rows = v.as_array()?;
    if rows.is_empty() {
        return None;
    }
    rows.iter()
        .map(|r| {
            let r = r.as_array()?;
            if r.is_empty() {
                return None;
            }
            r.iter().map(complex_of).collect::<Option<Vec<_>>>()
        })
        .collect()
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match x {
                    Value::Object(_) => {
                        let _ = writeln!(out, "{pad}{k}:");
                        render(x, indent + 1, out);
                    }
                    Value::Array(_) if matrix_rows(x).is_some() => {
                        let _ = writeln!(out, "{pad}{k}:");
                        render(x, indent + 1, out);
                    }
                    Value::Array(items) if items.iter().any(|i| i.is_object()) => {
                        let _ = writeln!(out, "{pad}{k}:");
                        for (i, item) in items.iter().enumerate() {
                            let _ = writeln!(out, "{pad}  [{i}]");
                            render(item, indent + 2, out);
                        }
                    }
                    _ => {
                        let _ = writeln!(out, "{pad}{k}: {}", inline(x));
                    }
                }
            }
        }
        _ => match matrix_rows(v) {
            Some(rows) => {
                for row in rows {
                    let cells: Vec<String> =
                        row.iter().map(|&(re, im)| fmt_complex(re, im)).collect();
                    let _ = writeln!(out, "{pad}[ {} ]", cells.join("  "));
                }
            }
            None => {
                let _ = writeln!(out, "{pad}{}", inline(v));
            }
        },
    }
}

fn inline(v: &Value) -> String {
    if let Some((re, im)) = complex_of(v) {
        return fmt_complex(re, im);
    }
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(inline).collect();
            format!("[{}]", parts.join(", "))
        }
        other => other.to_string(),
    }
}

/// Human-readable rendering of a report document.
pub fn to_text(report: &Value) -> String {
    let mut out = String::new();
    render(report, 0, &mut out);
    out
}

pub fn format_report(report: &Value, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Text => to_text(report),
    }
}

/// Outcome of one batch entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchEntry {
    pub input: String,
    pub report: String,
    pub exit_code: i32,
}

/// JSON files in `dir`, sorted, excluding reports written by earlier runs.
pub fn batch_inputs(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension().is_some_and(|x| x == "json")
                && !p.to_string_lossy().ends_with(".report.json")
        })
        .collect();
    files.sort();
    Ok(files)
}

fn report_path(input: &Path, out_dir: &Path, format: Format) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = match format {
        Format::Json => "report.json",
        Format::Text => "report.txt",
    };
    out_dir.join(format!("{stem}.{ext}"))
}

/// Runs one input file and writes its report.
fn run_file(
    path: &Path,
    out_dir: &Path,
    template: &AnalysisRequest,
    format: Format,
) -> CliResult<BatchEntry> {
    let (report, code) = match read_input(path) {
        Ok(input) => run(&AnalysisRequest {
            input,
            ..template.clone()
        }),
        Err(e) => (error_report(None, &e), e.exit_code()),
    };
    let target = report_path(path, out_dir, format);
    std::fs::write(&target, format_report(&report, format)).map_err(|e| CliError::Io {
        path: target.clone(),
        message: e.to_string(),
    })?;
    Ok(BatchEntry {
        input: path.display().to_string(),
        report: target.display().to_string(),
        exit_code: code,
    })
}

/// Runs every input in `dir`, concurrently, writing one report per file.
/// A failing file does not stop the others; entries come back in file order.
pub fn run_batch(
    dir: &Path,
    out_dir: &Path,
    template: &AnalysisRequest,
    format: Format,
) -> CliResult<Vec<BatchEntry>> {
    let files = batch_inputs(dir)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io {
        path: out_dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(files.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut results: Vec<Option<CliResult<BatchEntry>>> = (0..files.len()).map(|_| None).collect();
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let Some(path) = files.get(i) else { break };
                let entry = run_file(path, out_dir, template, format);
                slots
                    .lock()
                    .expect("no worker panics while holding the lock")[i] = Some(entry);
            });
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("every file was processed"))
        .collect()
}
