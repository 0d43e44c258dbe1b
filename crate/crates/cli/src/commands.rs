use std::path::Path;

use serde_json::json;

use flagval::af::{check_af, classify_rank2, rank3_reduce, AFVerdict, Rank2Class, Rank2Outcome};
use flagval::field::{
    find_af_in_span, is_c_pair_field, pool, recheck_c_pair_failure, reconstruct_valuation, CPairOutcome, LogFunction, LogKind,
    ReconstructOptions, ReconstructionOutcome, ReconstructionResult, SpanOptions, SpanSearch, Valuation,
};
use flagval::geometry::{
    find_three_point_reduction, image_shape, phi_image, verify_proposition, Proposition, Ring, ThreePointReduction, VerifyOptions,
};
use flagval::io::{parse_function, parse_log_function};
use flagval::{Error, InvariantFunction, ValueSet, Window};

use crate::report::{Failure, Input, InputDigest, Outcome, EXIT_CERTIFIED, EXIT_EXCEPTIONAL, EXIT_REFUTED};
use crate::Command;

pub fn dispatch(command: &Command) -> Result<(Outcome, Vec<InputDigest>), Failure> {
    match command {
        Command::CheckAf { file, window, depth } => single(file, |input| check_af_file(input, *window, *depth)),
        Command::Classify { file } => single(file, classify_file),
        Command::Cpair { f1, f2, degree, budget } => pair(f1, f2, |a, b| cpair(a, b, *degree, *budget)),
        Command::FindAf { f1, f2, degree, coefficient_bound } => pair(f1, f2, |a, b| find_af(a, b, *degree, *coefficient_bound)),
        Command::Reconstruct { file, pool_degree, axiom_pairs } => single(file, |input| reconstruct(input, *pool_degree, *axiom_pairs)),
        Command::Verify { proposition, q, budget, samples, seed } => {
            Ok((verify(proposition, *q, *budget as u128, *samples, *seed)?, Vec::new()))
        }
    }
}

fn single(path: &Path, run: impl FnOnce(&Input) -> Result<Outcome, Failure>) -> Result<(Outcome, Vec<InputDigest>), Failure> {
    let input = Input::read(path)?;
    Ok((run(&input)?, vec![input.digest]))
}

fn pair(a: &Path, b: &Path, run: impl FnOnce(Loaded, Loaded) -> Result<Outcome, Failure>) -> Result<(Outcome, Vec<InputDigest>), Failure> {
    let (a, b) = (Input::read(a)?, Input::read(b)?);
    let outcome = run(Loaded::from(&a)?, Loaded::from(&b)?)?;
    Ok((outcome, vec![a.digest, b.digest]))
}

/// A function file or a logarithmic function file, told apart by the
/// presence of a `model` key.
enum Loaded {
    Table(InvariantFunction),
    Log(LogFunction),
}

impl Loaded {
    fn from(input: &Input) -> Result<Loaded, Failure> {
        let is_log = serde_json::from_str::<serde_json::Value>(&input.text).is_ok_and(|v| v.get("model").is_some());
        if is_log {
            input.parse(parse_log_function).map(Loaded::Log)
        } else {
            input.parse(parse_function).map(Loaded::Table)
        }
    }
}

fn verdict_outcome(verdict: &AFVerdict) -> Outcome {
    let code = match verdict {
        AFVerdict::Certified { .. } => EXIT_CERTIFIED,
        AFVerdict::Refuted { .. } => EXIT_REFUTED,
        AFVerdict::Exceptional { .. } => EXIT_EXCEPTIONAL,
    };
    Outcome::new(verdict.label(), code, verdict, verdict.label())
}

fn check_af_file(input: &Input, window: Option<i64>, depth: Option<u32>) -> Result<Outcome, Failure> {
    let mut f = input.parse(parse_function)?;
    if let Some(d) = depth {
        let Some((p, _)) = f.depth_params() else {
            return Err(Failure::Usage("--depth applies to depth-k functions on Z^n".into()));
        };
        if d == 0 || d > 12 {
            return Err(Failure::Usage(format!("--depth must lie in 1..=12, got {d}")));
        }
        f = f.snapshot(p, d)?;
    }
    if let Some(m) = window {
        if f.depth_params().is_none() {
            return Err(Failure::Usage("--window applies to depth-k functions on Z^n".into()));
        }
        if m < 1 || (2 * m as u128 + 1).checked_pow(f.rank() as u32).is_none_or(|n| n > 1 << 22) {
            return Err(Failure::Usage(format!("--window {m} is out of range for rank {}", f.rank())));
        }
        f = f.with_window(Window::new(m, f.window().depth));
    }
    Ok(verdict_outcome(&check_af(&f)?))
}

fn classify_file(input: &Input) -> Result<Outcome, Failure> {
    let f = input.parse(parse_function)?;
    match f.rank() {
        2 => Ok(match classify_rank2(&f)? {
            Rank2Outcome::Class { class } => {
                let kind = match &class {
                    Rank2Class::Constant { .. } => "class:constant",
                    Rank2Class::OffSubgroup { .. } => "class:offSubgroup",
                    Rank2Class::Typical { .. } => "class:typical",
                };
                Outcome::new(kind, EXIT_CERTIFIED, &class, kind)
            }
            outcome @ Rank2Outcome::NotAF { .. } => Outcome::new("refuted", EXIT_REFUTED, &outcome, "refuted"),
        }),
        3 => match rank3_reduce(&f) {
            Ok(verdict) => Ok(verdict_outcome(&verdict)),
            Err(Error::Rank2Failure(witness)) => {
                Ok(Outcome::new("refuted", EXIT_REFUTED, json!({ "rank2Witness": witness }), "a rank-2 restriction is not AF"))
            }
            Err(e) => Err(e.into()),
        },
        r => Err(Failure::Usage(format!("classify takes rank-2 or rank-3 functions, got rank {r}"))),
    }
}

/// The ring a table's values are read in for the φ-map.
fn ring_of(f: &InvariantFunction) -> Ring {
    match f.value_set() {
        ValueSet::Residue(m) => Ring::Residue { p: *m },
        ValueSet::Padic { p, precision } => Ring::Padic { p: *p, precision: *precision },
        ValueSet::Finite(_) => Ring::Rational,
    }
}

fn cpair(a: Loaded, b: Loaded, degree: usize, budget: u64) -> Result<Outcome, Failure> {
    match (a, b) {
        (Loaded::Log(f1), Loaded::Log(f2)) => {
            let out = is_c_pair_field(&f1, &f2, degree, budget)?;
            Ok(match &out {
                CPairOutcome::Pass { modules_checked, .. } => {
                    Outcome::new("cPair", EXIT_CERTIFIED, &out, format!("c-pair on {modules_checked} pool planes"))
                }
                CPairOutcome::Fail { .. } => {
                    let rechecked = recheck_c_pair_failure(&f1, &f2, &out)?;
                    Outcome::new("notCPair", EXIT_REFUTED, json!({ "outcome": out, "witnessRechecked": rechecked }), "not a c-pair")
                }
            })
        }
        (Loaded::Table(f1), Loaded::Table(f2)) => {
            let ring = ring_of(&f1);
            ring.check_supported()?;
            let pm = phi_image(&f1, &f2, ring)?;
            if let Some(line) = pm.line_law_violation() {
                let points: Vec<_> = pm.space.lines()[line].iter().map(|&i| &pm.space.points()[i]).collect();
                let result = json!({ "ring": ring, "violatingLine": points });
                return Ok(Outcome::new("notCPair", EXIT_REFUTED, result, "a line's image is not collinear"));
            }
            let shape = if f1.rank() == 3 { Some(image_shape(&pm, true)?) } else { None };
            Ok(Outcome::new("cPair", EXIT_CERTIFIED, json!({ "ring": ring, "imageShape": shape }), "c-pair"))
        }
        _ => Err(Failure::Usage("cpair needs two function files or two logarithmic function files".into())),
    }
}

fn find_af(a: Loaded, b: Loaded, degree: usize, coefficient_bound: i64) -> Result<Outcome, Failure> {
    match (a, b) {
        (Loaded::Log(f1), Loaded::Log(f2)) => {
            let opts = SpanOptions { cpair_degree: degree, coefficient_bound, ..SpanOptions::default() };
            match find_af_in_span(&f1, &f2, &opts) {
                Ok(found @ SpanSearch::AfElement { .. }) => Ok(Outcome::new("afElement", EXIT_CERTIFIED, &found, "AF element found")),
                Ok(none @ SpanSearch::NotFound { .. }) => Ok(Outcome::new("notFound", EXIT_REFUTED, &none, "no AF element in range")),
                Err(Error::NotACPair(why)) => Ok(Outcome::new("notCPair", EXIT_REFUTED, json!({ "reason": why }), "not a c-pair")),
                Err(e) => Err(e.into()),
            }
        }
        (Loaded::Table(f1), Loaded::Table(f2)) => match find_three_point_reduction(&f1, &f2, ring_of(&f1)) {
            Ok(found @ ThreePointReduction::NoReduction { .. }) => {
                Ok(Outcome::new("afElement", EXIT_CERTIFIED, &found, "AF element found"))
            }
            Ok(red @ ThreePointReduction::Reduction { .. }) => {
                Ok(Outcome::new("reduction", EXIT_REFUTED, &red, "three-point reduction found"))
            }
            Err(Error::NotACPair(why)) => Ok(Outcome::new("notCPair", EXIT_REFUTED, json!({ "reason": why }), "not a c-pair")),
            Err(e) => Err(e.into()),
        },
        _ => Err(Failure::Usage("find-af needs two function files or two logarithmic function files".into())),
    }
}

/// The source valuations an input names: its places, or its character's valuation.
fn named_valuations(f: &LogFunction) -> Vec<Valuation> {
    match &f.kind {
        LogKind::PlaceWeights(ws) => ws.iter().map(|(pl, _)| Valuation::Place(pl.clone())).collect(),
        LogKind::Character { valuation, .. } => vec![valuation.clone()],
        LogKind::Linear(_) => Vec::new(),
    }
}

/// Whether the reconstructed `O` and `m` agree with `v` on every pool element.
fn agrees_on_pool(r: &ReconstructionResult, v: &Valuation, degree: usize) -> Result<bool, Error> {
    for e in pool(r.f.model, degree) {
        let value = v.value(&e)?;
        let zero = vec![0; value.len()];
        let ord = v.compare(&value, &zero);
        if r.in_o(&e)? != ord.is_ge() || r.in_m(&e)? != ord.is_gt() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn scale_name(v: &Valuation) -> &'static str {
    match v.to_string().as_str() {
        "lex" => "Z2-lex",
        "revlex" => "Z2-revlex",
        _ => "Z",
    }
}

fn reconstruct(input: &Input, pool_degree: usize, axiom_pairs: usize) -> Result<Outcome, Failure> {
    let f = input.parse(parse_log_function)?;
    let opts = ReconstructOptions { pool_degree, axiom_pairs, ..ReconstructOptions::default() };
    match reconstruct_valuation(&f, &opts)? {
        ReconstructionOutcome::Reconstructed(r) => {
            let mut identified = None;
            for v in named_valuations(&f) {
                if agrees_on_pool(&r, &v, pool_degree)? {
                    identified = Some(v);
                    break;
                }
            }
            let place = identified.as_ref().and_then(|v| match v {
                Valuation::Place(p) => Some(p.to_string()),
                Valuation::Monomial(_) => None,
            });
            let scale = identified.as_ref().map_or("unidentified", scale_name);
            let summary = format!("valuation reconstructed, scale {scale}");
            let result = json!({
                "scale": scale,
                "place": place,
                "valuation": identified.map(|v| v.to_string()),
                "reconstruction": r,
            });
            Ok(Outcome::new("reconstructed", EXIT_CERTIFIED, result, summary))
        }
        not_af @ ReconstructionOutcome::NotAF { .. } => Ok(Outcome::new("notAF", EXIT_REFUTED, &not_af, "not AF")),
    }
}

fn verify(name: &str, q: u64, budget: u128, samples: usize, seed: u64) -> Result<Outcome, Failure> {
    let Some(prop) = Proposition::ALL.into_iter().find(|p| p.name() == name) else {
        let known: Vec<&str> = Proposition::ALL.iter().map(Proposition::name).collect();
        return Err(Failure::Usage(format!("unknown proposition {name:?}; expected one of {}", known.join(", "))));
    };
    let report = verify_proposition(prop, q, &VerifyOptions { budget, samples, seed })?;
    let summary = format!("{} instances, {} violations", report.instances, report.violations.len());
    Ok(if report.passed() {
        Outcome::new("verified", EXIT_CERTIFIED, &report, summary)
    } else {
        Outcome::new("violated", EXIT_REFUTED, &report, summary)
    })
}
