mod json;

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_rational::Rational64;
use serde_json::{json, Value};
use toricsec::search::DEFAULT_MAX_POOL;
use toricsec::{
    build_model, certify_full, enumerate_collections, ext_profile, is_strong_exceptional,
    order_by_hom, replay_certificate, standard_box, standard_collection, PicClass, SearchWindow,
    StackyFanInput, ToricStackModel,
};

#[derive(Parser)]
#[command(name = "toricsec", version)]
#[command(about = "Strong exceptional collections of line bundles on Fano toric stacks of Picard rank 1 and 2")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the model of a fan and print its invariants
    Validate {
        /// Fan JSON file, or - for stdin
        fan: PathBuf,
    },
    /// Shrink a maximal strong exceptional collection to a standard one
    Certify {
        fan: PathBuf,
        /// Collection JSON file
        #[arg(required_unless_present = "replay")]
        collection: Option<PathBuf>,
        /// Include the evidence behind every move
        #[arg(long)]
        trace: bool,
        /// Re-validate a certificate instead of producing one
        #[arg(long, value_name = "FILE", conflicts_with = "collection")]
        replay: Option<PathBuf>,
    },
    /// List maximal collections in a window, up to twist
    Enumerate {
        fan: PathBuf,
        /// a0,a1,f0,f1 (rank 1: a0,a1 is the degree range)
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long, default_value_t = DEFAULT_MAX_POOL)]
        max_pool: usize,
        /// Exceptional (orderable) instead of strong exceptional
        #[arg(long)]
        exceptional: bool,
    },
    /// Print the standard full strong exceptional collection
    Standard { fan: PathBuf },
    /// Which Ext groups from O(D1) to O(D2) are nonzero
    Ext {
        fan: PathBuf,
        /// Comma-separated Pic coordinates
        #[arg(allow_hyphen_values = true)]
        from: String,
        #[arg(allow_hyphen_values = true)]
        to: String,
        /// Read the classes as exponent vectors instead
        #[arg(long)]
        exponents: bool,
    },
    /// Check that a collection is strong exceptional
    Check { fan: PathBuf, collection: PathBuf },
}

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input (exit 2).
    Parse(String),
    /// The input is well formed but the mathematics says no (exit 1).
    Domain(toricsec::Error),
}

impl From<toricsec::Error> for CliError {
    fn from(e: toricsec::Error) -> Self {
        CliError::Domain(e)
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Parse(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<(StackyFanInput, ToricStackModel), CliError> {
    let fan: StackyFanInput = serde_json::from_value(read_json(path)?)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let model = build_model(&fan)?;
    Ok((fan, model))
}

fn load_collection(model: &ToricStackModel, path: &Path) -> Result<Vec<PicClass>, CliError> {
    json::collection(model, &read_json(path)?)
}

fn parse_ints(s: &str) -> Result<Vec<i64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Parse(format!("not an integer list: {s}")))
        })
        .collect()
}

fn parse_class(model: &ToricStackModel, s: &str, exponents: bool) -> Result<PicClass, CliError> {
    let v = parse_ints(s)?;
    let want = if exponents {
        model.num_rays()
    } else {
        model.picard_rank()
    };
    if v.len() != want {
        return Err(CliError::Parse(format!(
            "{s}: expected {want} integers"
        )));
    }
    Ok(if exponents {
        model.class_of(&v)
    } else {
        PicClass::new(v)
    })
}

fn parse_window(model: &ToricStackModel, s: &str) -> Result<SearchWindow, CliError> {
    let parts: Vec<Rational64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Parse(format!("bad window bound {t:?}")))
        })
        .collect::<Result<_, _>>()?;
    let bounds: [Rational64; 4] = match parts.len() {
        4 => [parts[0], parts[1], parts[2], parts[3]],
        2 if model.picard_rank() == 1 => [parts[0], parts[1], parts[0], parts[1]],
        _ => return Err(CliError::Parse("window needs a0,a1,f0,f1".into())),
    };
    Ok(SearchWindow::from_bounds(model, bounds)?)
}

fn window_json(w: &SearchWindow) -> Value {
    match w {
        SearchWindow::Degrees { low, high } => json!({ "degrees": [low, high] }),
        SearchWindow::Box(bx) => json::pic_box(bx),
    }
}

fn validate(fan: &Path) -> Result<Value, CliError> {
    let (_, model) = load_model(fan)?;
    Ok(json::model_summary(&model))
}

fn certify(fan: &Path, collection: &Path, trace: bool) -> Result<Value, CliError> {
    let (input, model) = load_model(fan)?;
    let set = load_collection(&model, collection)?;
    let cert = certify_full(&model, &set)?;
    Ok(json::certificate(&model, &input, &cert, trace))
}

/// Validates every step independently, then regenerates the certificate
/// from its input and requires the same canonical bytes.
fn replay(fan: &Path, cert_path: &Path) -> Result<Value, CliError> {
    let (_, model) = load_model(fan)?;
    let mut doc = read_json(cert_path)?;
    if doc.get("status").is_some() {
        doc = doc
            .get("payload")
            .cloned()
            .ok_or_else(|| CliError::Parse("result envelope has no payload".into()))?;
    }
    let cert_fan = json::certificate_fan(&doc)?;
    if build_model(&cert_fan)?.rays() != model.rays() {
        return Err(toricsec::Error::ReplayMismatch(
            "certificate was made for a different fan".into(),
        )
        .into());
    }
    let (cert, trace) = json::parse_certificate(&model, &doc)?;
    replay_certificate(&model, &cert)?;
    let fresh = certify_full(&model, &cert.input)?;
    let regenerated = json::certificate(&model, &cert_fan, &fresh, trace);
    let canonical = |v: &Value| serde_json::to_string_pretty(v).expect("JSON serializes");
    if canonical(&regenerated) != canonical(&doc) {
        return Err(toricsec::Error::ReplayMismatch(
            "certificate differs from the regenerated one".into(),
        )
        .into());
    }
    Ok(json!({
        "replayed": true,
        "steps": cert.steps.len(),
        "final": json::classes(&model, &cert.final_collection),
        "verdict": "full",
    }))
}

fn enumerate(
    fan: &Path,
    window: Option<&str>,
    max_pool: usize,
    exceptional: bool,
) -> Result<Value, CliError> {
    let (_, model) = load_model(fan)?;
    let window = match window {
        Some(s) => parse_window(&model, s)?,
        None => SearchWindow::default_for(&model)?,
    };
    let out = enumerate_collections(&model, &window, !exceptional, max_pool)?;
    Ok(json!({
        "window": window_json(&window),
        "strong": !exceptional,
        "pool_size": out.pool_size,
        "count": out.collections.len(),
        "collections": out
            .collections
            .iter()
            .map(|c| json::classes(&model, c))
            .collect::<Vec<_>>(),
    }))
}

fn standard(fan: &Path) -> Result<Value, CliError> {
    let (_, model) = load_model(fan)?;
    let set = standard_collection(&model)?;
    let mut out = json!({ "collection": json::classes(&model, &set) });
    if model.picard_rank() == 2 {
        let g = standard_box(&model)?;
        out["center"] = json!([json::rational(g.center.0), json::rational(g.center.1)]);
        out["attempt"] = json!(g.attempt);
        out["box"] = json::pic_box(&g.bounds);
    }
    Ok(out)
}

fn ext(fan: &Path, from: &str, to: &str, exponents: bool) -> Result<Value, CliError> {
    let (_, model) = load_model(fan)?;
    let d1 = parse_class(&model, from, exponents)?;
    let d2 = parse_class(&model, to, exponents)?;
    let p = ext_profile(&model, &d1, &d2)?;
    let mut out = serde_json::to_value(p).expect("profile serializes");
    out["from"] = json::class(&model, &d1);
    out["to"] = json::class(&model, &d2);
    Ok(out)
}

fn check(fan: &Path, collection: &Path) -> Result<Value, CliError> {
    let (_, model) = load_model(fan)?;
    let set = load_collection(&model, collection)?;
    is_strong_exceptional(&model, &set)?;
    let order = order_by_hom(&model, &set)?;
    Ok(json!({
        "strong_exceptional": true,
        "size": set.len(),
        "k0_rank": model.k0_rank(),
        "maximal_length": set.len() == model.k0_rank(),
        "order": json::classes(&model, &order),
    }))
}

fn run(cli: &Cli) -> Result<Value, CliError> {
    match &cli.command {
        Command::Validate { fan } => validate(fan),
        Command::Certify {
            fan,
            replay: Some(cert),
            ..
        } => replay(fan, cert),
        Command::Certify {
            fan,
            collection,
            trace,
            ..
        } => certify(fan, collection.as_deref().expect("clap requires it"), *trace),
        Command::Enumerate {
            fan,
            window,
            max_pool,
            exceptional,
        } => enumerate(fan, window.as_deref(), *max_pool, *exceptional),
        Command::Standard { fan } => standard(fan),
        Command::Ext {
            fan,
            from,
            to,
            exponents,
        } => ext(fan, from, to, *exponents),
        Command::Check { fan, collection } => check(fan, collection),
    }
}

fn error_json(err: &CliError) -> Value {
    match err {
        CliError::Parse(msg) => json!({
            "code": "ParseError",
            "message": msg,
            "witnesses": [],
        }),
        CliError::Domain(e) => json!({
            "code": e.code(),
            "message": e.to_string(),
            "witnesses": e.witnesses().iter().map(|c| c.coords().to_vec()).collect::<Vec<_>>(),
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(CliError::Parse(format!("--jobs: {e}"))),
        },
        None => run(&cli),
    };
    let (doc, code) = match &result {
        Ok(payload) => (json!({ "status": "ok", "payload": payload }), 0),
        Err(e) => (
            json!({ "status": "error", "error": error_json(e) }),
            if matches!(e, CliError::Parse(_)) { 2 } else { 1 },
        ),
    };
    let text = serde_json::to_string_pretty(&doc).expect("JSON serializes");
    // a closed pipe is not an error of ours
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(code)
}
