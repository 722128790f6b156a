//! JSON encoding of model data, classes and certificates, and the inverse
//! parsing used by `--replay`.

use num_rational::Rational64;
use serde_json::{json, Map, Value};
use toricsec::moves::{MoveEvidence, MoveRule, ParallelogramFit, Phase};
use toricsec::{
    Direction, MoveStep, PicBox, PicClass, ShrinkCertificate, StackyFanInput, StandardWitness,
    ToricStackModel,
};

use crate::CliError;

pub fn class(model: &ToricStackModel, d: &PicClass) -> Value {
    json!({ "pic": d.coords(), "exponents": model.lift(d) })
}

pub fn classes(model: &ToricStackModel, ds: &[PicClass]) -> Value {
    Value::Array(ds.iter().map(|d| class(model, d)).collect())
}

pub fn rational(q: Rational64) -> Value {
    Value::String(q.to_string())
}

pub fn model_summary(model: &ToricStackModel) -> Value {
    let mut out = Map::new();
    out.insert("picard_rank".into(), json!(model.picard_rank()));
    out.insert("k0_rank".into(), json!(model.k0_rank()));
    out.insert("lattice_rank".into(), json!(model.lattice_rank()));
    out.insert("rays".into(), json!(model.rays()));
    out.insert("r".into(), Value::Array(model.r().iter().map(|q| rational(*q)).collect()));
    out.insert("basis".into(), json!(model.basis_lifts()));
    out.insert(
        "e_classes".into(),
        Value::Array(model.e_class().iter().map(|c| json!(c.coords())).collect()),
    );
    out.insert(
        "maximal_cones".into(),
        Value::Array(
            model
                .maximal_cones()
                .iter()
                .map(|c| json!({ "rays": c.rays, "multiplicity": c.multiplicity }))
                .collect(),
        ),
    );
    if model.picard_rank() == 1 {
        out.insert("weights".into(), json!(model.weights()));
    } else {
        out.insert("alpha".into(), json!(model.alpha()));
        out.insert("i_plus".into(), json!(model.i_plus()));
        out.insert("i_minus".into(), json!(model.i_minus()));
        out.insert("e_plus".into(), class(model, model.e_plus().unwrap()));
        out.insert("e_minus".into(), class(model, model.e_minus().unwrap()));
        out.insert("alpha_e_plus".into(), json!(model.alpha_e_plus()));
    }
    Value::Object(out)
}

pub fn pic_box(bx: &PicBox) -> Value {
    json!({
        "alpha": [rational(bx.alpha.0), rational(bx.alpha.1)],
        "f": [rational(bx.f.0), rational(bx.f.1)],
    })
}

fn witness(w: &StandardWitness) -> Value {
    match w {
        StandardWitness::Interval { low, high } => {
            json!({ "kind": "interval", "low": low, "high": high })
        }
        StandardWitness::Parallelogram(fit) => json!({
            "kind": "parallelogram",
            "center": [rational(fit.center.0), rational(fit.center.1)],
            "attempt": fit.attempt,
            "box": pic_box(&fit.bounds),
        }),
    }
}

fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::Rank1 => "rank1",
        Phase::Strip => "strip",
        Phase::FReduce => "f_reduce",
    }
}

fn rule_name(r: MoveRule) -> &'static str {
    match r {
        MoveRule::Forced => "forced",
        MoveRule::Free => "free",
        MoveRule::OnlyAvailable => "only_available",
    }
}

fn evidence(e: &MoveEvidence) -> Value {
    json!({
        "rule": rule_name(e.rule),
        "minus_open": e.minus_open,
        "plus_open": e.plus_open,
        "forced_minus": e.forced_minus,
        "forced_plus": e.forced_plus,
        "f_range": [rational(e.f_range.0), rational(e.f_range.1)],
    })
}

fn step(model: &ToricStackModel, s: &MoveStep, trace: bool) -> Value {
    let mut out = Map::new();
    out.insert("removed".into(), class(model, &s.removed));
    out.insert("added".into(), class(model, &s.added));
    out.insert("direction".into(), json!(s.direction.name()));
    out.insert("koszul_required".into(), classes(model, &s.koszul_required));
    out.insert(
        "checks".into(),
        json!({
            "koszul_all_present": s.koszul_all_present,
            "added_absent": s.added_absent,
            "post_strong": s.post_strong_ok,
        }),
    );
    if trace {
        out.insert("phase".into(), json!(phase_name(s.phase)));
        if let Some(e) = &s.evidence {
            out.insert("evidence".into(), evidence(e));
        }
    }
    Value::Object(out)
}

pub fn certificate(
    model: &ToricStackModel,
    fan: &StackyFanInput,
    cert: &ShrinkCertificate,
    trace: bool,
) -> Value {
    json!({
        "input": {
            "fan": serde_json::to_value(fan).expect("fan input serializes"),
            "bundles": classes(model, &cert.input),
        },
        "basis": model.basis_lifts(),
        "trace": trace,
        "steps": cert.steps.iter().map(|s| step(model, s, trace)).collect::<Vec<_>>(),
        "final": classes(model, &cert.final_collection),
        "witness": witness(&cert.witness),
        "verdict": "full",
    })
}

fn parse_err(msg: impl Into<String>) -> CliError {
    CliError::Parse(msg.into())
}

fn int_vec(v: &Value, what: &str) -> Result<Vec<i64>, CliError> {
    v.as_array()
        .ok_or_else(|| parse_err(format!("{what} must be an array")))?
        .iter()
        .map(|x| x.as_i64().ok_or_else(|| parse_err(format!("{what} must hold integers"))))
        .collect()
}

fn int_rows(v: &Value, what: &str) -> Result<Vec<Vec<i64>>, CliError> {
    v.as_array()
        .ok_or_else(|| parse_err(format!("{what} must be an array")))?
        .iter()
        .map(|row| int_vec(row, what))
        .collect()
}

/// Checks that an echoed basis names the same classes as the model's.
fn check_basis(model: &ToricStackModel, basis: &Value) -> Result<(), CliError> {
    let rows = int_rows(basis, "basis")?;
    let ok = rows.len() == model.picard_rank()
        && rows.iter().enumerate().all(|(k, a)| {
            a.len() == model.num_rays() && {
                let mut unit = vec![0; model.picard_rank()];
                unit[k] = 1;
                model.class_of(a) == PicClass::new(unit)
            }
        });
    if ok {
        Ok(())
    } else {
        Err(parse_err("echoed basis does not match the model's Pic basis"))
    }
}

fn exponents_to_class(model: &ToricStackModel, a: &[i64]) -> Result<PicClass, CliError> {
    if a.len() != model.num_rays() {
        return Err(parse_err(format!(
            "exponent vector {a:?} has length {}, expected {}",
            a.len(),
            model.num_rays()
        )));
    }
    Ok(model.class_of(a))
}

fn pic_to_class(model: &ToricStackModel, p: Vec<i64>) -> Result<PicClass, CliError> {
    if p.len() != model.picard_rank() {
        return Err(parse_err(format!(
            "Pic coordinates {p:?} have length {}, expected {}",
            p.len(),
            model.picard_rank()
        )));
    }
    Ok(PicClass::new(p))
}

/// `{"bundles": [[a_1..a_m], ...]}` or `{"pic": [[..], ...], "basis": [...]}`.
pub fn collection(model: &ToricStackModel, v: &Value) -> Result<Vec<PicClass>, CliError> {
    if let Some(bundles) = v.get("bundles") {
        return int_rows(bundles, "bundles")?
            .iter()
            .map(|a| exponents_to_class(model, a))
            .collect();
    }
    if let Some(pic) = v.get("pic") {
        let basis = v
            .get("basis")
            .ok_or_else(|| parse_err("Pic coordinates need the echoed \"basis\""))?;
        check_basis(model, basis)?;
        return int_rows(pic, "pic")?
            .into_iter()
            .map(|p| pic_to_class(model, p))
            .collect();
    }
    Err(parse_err("collection needs \"bundles\" or \"pic\""))
}

/// A class written as `{"pic": [...], "exponents": [...]}`; both parts must
/// agree when both are present.
fn class_value(model: &ToricStackModel, v: &Value) -> Result<PicClass, CliError> {
    let from_pic = v.get("pic").map(|p| int_vec(p, "pic")).transpose()?;
    let from_exp = v.get("exponents").map(|e| int_vec(e, "exponents")).transpose()?;
    match (from_pic, from_exp) {
        (Some(p), Some(e)) => {
            let c = pic_to_class(model, p)?;
            if exponents_to_class(model, &e)? != c {
                return Err(CliError::Domain(toricsec::Error::ReplayMismatch(format!(
                    "exponents {e:?} do not represent {c}"
                ))));
            }
            Ok(c)
        }
        (Some(p), None) => pic_to_class(model, p),
        (None, Some(e)) => exponents_to_class(model, &e),
        (None, None) => Err(parse_err("class needs \"pic\" or \"exponents\"")),
    }
}

fn class_list(model: &ToricStackModel, v: Option<&Value>, what: &str) -> Result<Vec<PicClass>, CliError> {
    v.and_then(Value::as_array)
        .ok_or_else(|| parse_err(format!("certificate needs \"{what}\"")))?
        .iter()
        .map(|c| class_value(model, c))
        .collect()
}

fn rational_value(v: &Value) -> Result<Rational64, CliError> {
    v.as_str()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err("expected a rational written as \"n/d\""))
}

fn pair(v: Option<&Value>) -> Result<(Rational64, Rational64), CliError> {
    match v.and_then(Value::as_array).map(Vec::as_slice) {
        Some([a, b]) => Ok((rational_value(a)?, rational_value(b)?)),
        _ => Err(parse_err("expected a pair of rationals")),
    }
}

fn parse_witness(v: &Value) -> Result<StandardWitness, CliError> {
    match v.get("kind").and_then(Value::as_str) {
        Some("interval") => {
            let get = |k: &str| {
                v.get(k)
                    .and_then(Value::as_i64)
                    .ok_or_else(|| parse_err(format!("interval witness needs \"{k}\"")))
            };
            Ok(StandardWitness::Interval {
                low: get("low")?,
                high: get("high")?,
            })
        }
        Some("parallelogram") => {
            let bx = v.get("box").ok_or_else(|| parse_err("witness needs \"box\""))?;
            Ok(StandardWitness::Parallelogram(ParallelogramFit {
                center: pair(v.get("center"))?,
                attempt: v
                    .get("attempt")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| parse_err("witness needs \"attempt\""))?
                    as u32,
                bounds: PicBox {
                    alpha: pair(bx.get("alpha"))?,
                    f: pair(bx.get("f"))?,
                },
            }))
        }
        _ => Err(parse_err("unknown witness kind")),
    }
}

fn parse_step(model: &ToricStackModel, v: &Value) -> Result<MoveStep, CliError> {
    let direction = v
        .get("direction")
        .and_then(Value::as_str)
        .and_then(Direction::from_name)
        .ok_or_else(|| parse_err("step has no valid \"direction\""))?;
    let checks = v.get("checks").ok_or_else(|| parse_err("step needs \"checks\""))?;
    let flag = |k: &str| {
        checks
            .get(k)
            .and_then(Value::as_bool)
            .ok_or_else(|| parse_err(format!("checks need \"{k}\"")))
    };
    let removed = class_value(
        model,
        v.get("removed").ok_or_else(|| parse_err("step needs \"removed\""))?,
    )?;
    let added = class_value(
        model,
        v.get("added").ok_or_else(|| parse_err("step needs \"added\""))?,
    )?;
    Ok(MoveStep {
        removed,
        added,
        direction,
        koszul_required: class_list(model, v.get("koszul_required"), "koszul_required")?,
        koszul_all_present: flag("koszul_all_present")?,
        added_absent: flag("added_absent")?,
        post_strong_ok: flag("post_strong")?,
        phase: if model.picard_rank() == 1 {
            Phase::Rank1
        } else {
            Phase::Strip
        },
        evidence: None,
    })
}

/// The fan of a certificate.
pub fn certificate_fan(v: &Value) -> Result<StackyFanInput, CliError> {
    let fan = v
        .get("input")
        .and_then(|i| i.get("fan"))
        .ok_or_else(|| parse_err("certificate needs \"input.fan\""))?;
    serde_json::from_value(fan.clone()).map_err(|e| parse_err(format!("fan: {e}")))
}

/// Parsed certificate and whether it was written with `--trace`.
pub fn parse_certificate(
    model: &ToricStackModel,
    v: &Value,
) -> Result<(ShrinkCertificate, bool), CliError> {
    if let Some(basis) = v.get("basis") {
        check_basis(model, basis)?;
    }
    if v.get("verdict").and_then(Value::as_str) != Some("full") {
        return Err(parse_err("certificate verdict must be \"full\""));
    }
    let input = class_list(model, v.get("input").and_then(|i| i.get("bundles")), "input.bundles")?;
    let steps = v
        .get("steps")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("certificate needs \"steps\""))?
        .iter()
        .map(|s| parse_step(model, s))
        .collect::<Result<Vec<_>, _>>()?;
    let final_collection = class_list(model, v.get("final"), "final")?;
    let witness = parse_witness(
        v.get("witness")
            .ok_or_else(|| parse_err("certificate needs \"witness\""))?,
    )?;
    let trace = v.get("trace").and_then(Value::as_bool).unwrap_or(false);
    Ok((
        ShrinkCertificate {
            input,
            steps,
            final_collection,
            witness,
            verdict: toricsec::moves::Verdict::Full,
        },
        trace,
    ))
}
