use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use troprank_core::constructions::{predecessors, surjective_separation, Induction};
use troprank_core::graph::ChainOfLoops;
use troprank_core::report::{CaseReport, RunOptions, VerdictKind};
use troprank_core::series::enumerate_paths;
use troprank_core::{case_library, CaseSpec, ParameterQuadruple, RangeClass, ENGINE_VERSION};

use crate::input::{self, CaseArgs, ParamArgs};
use crate::{CliError, Expect, Format, RunArgs, Status};

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n"))?,
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            r => r?,
        },
    }
    Ok(())
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes")
}

fn check_long(cases: &[CaseSpec], allow: bool) -> Result<(), CliError> {
    match cases.iter().find(|c| c.expensive && !allow) {
        Some(c) => Err(CliError::Input(format!(
            "case {} is long-running; pass --allow-long to run it",
            c.name
        ))),
        None => Ok(()),
    }
}

/// Runs cases on the worker pool; output order follows input order.
fn run_cases(cases: &[CaseSpec], opts: &RunOptions) -> Result<Vec<CaseReport>, CliError> {
    let results: Vec<_> = cases.par_iter().map(|c| CaseReport::run(c, opts)).collect();
    Ok(results.into_iter().collect::<Result<_, _>>()?)
}

fn status_of(r: &CaseReport, expect: Expect) -> Status {
    match (r.verdict, expect) {
        (VerdictKind::Unknown, _) => Status::Unknown,
        (VerdictKind::Dependent, Expect::Independent) => Status::UnexpectedDependent,
        _ => Status::Ok,
    }
}

fn summary(r: &CaseReport) -> String {
    format!(
        "{}: {:?} ({} functions, {:.0} ms)",
        r.case.sidecar.name, r.verdict, r.family_size, r.timing_ms
    )
}

pub fn verify(case: &CaseArgs, run: &RunArgs, out: Option<&Path>) -> Result<Status, CliError> {
    let cases = case.cases()?;
    check_long(&cases, run.allow_long)?;
    let reports = run_cases(&cases, &run.options())?;
    for r in &reports {
        eprintln!("{}", summary(r));
    }
    let text = match reports.as_slice() {
        [one] => pretty(one),
        many => pretty(&many),
    };
    emit(out, &text)?;
    Ok(reports
        .iter()
        .map(|r| status_of(r, run.expect))
        .max()
        .unwrap_or(Status::Ok))
}

#[derive(Debug, Serialize)]
struct InductStep {
    name: String,
    op: Induction,
    parameters: ParameterQuadruple,
    range: RangeClass,
    family_size: usize,
    size_law: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    separation: Option<bool>,
    tableau: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    long_bridges: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<CaseReport>,
}

pub fn induct(
    case: &CaseArgs,
    op: Induction,
    count: usize,
    recheck: Option<&RunArgs>,
) -> Result<Status, CliError> {
    let mut cur = case.single()?;
    let mut images = Vec::with_capacity(count);
    for _ in 0..count {
        cur = op
            .apply(&cur)
            .map_err(|e| CliError::Input(format!("{}: {e}", cur.name)))?;
        images.push(cur.clone());
    }
    let reports: Vec<Option<CaseReport>> = match recheck {
        Some(run) => {
            check_long(&images, run.allow_long)?;
            run_cases(&images, &run.options())?
                .into_iter()
                .map(Some)
                .collect()
        }
        None => vec![None; images.len()],
    };
    let mut status = Status::Ok;
    let mut steps = Vec::new();
    for (c, report) in images.iter().zip(reports) {
        let separation = (op == Induction::R)
            .then(|| surjective_separation(c))
            .transpose()?;
        let size_law = c.size_law_holds();
        if !size_law || separation == Some(false) {
            status = status.max(Status::Unknown);
        }
        if let Some(r) = &report {
            status = status.max(status_of(r, recheck.map_or(Expect::Any, |a| a.expect)));
        }
        eprintln!(
            "{}: {} |A|={} size law {}{}{}",
            c.name,
            c.params,
            c.family.len(),
            if size_law { "ok" } else { "FAILED" },
            separation.map_or(String::new(), |s| format!(
                ", separation {}",
                if s { "ok" } else { "FAILED" }
            )),
            report
                .as_ref()
                .map_or(String::new(), |r| format!(", {:?}", r.verdict)),
        );
        steps.push(InductStep {
            name: c.name.clone(),
            op,
            parameters: c.params,
            range: c.params.classify_range(),
            family_size: c.family.len(),
            size_law,
            separation,
            tableau: c.tableau.to_text(),
            long_bridges: c.long_bridges.as_ref().map(|s| s.iter().copied().collect()),
            report,
        });
    }
    emit(None, &pretty(&steps))?;
    Ok(status)
}

pub fn derive(case: &CaseArgs) -> Result<Status, CliError> {
    let target = if case.library.is_some() || case.tableau.is_some() {
        case.single()?.params
    } else {
        case.select.resolve()?
    };
    let found = predecessors(&target);
    if found.is_empty() {
        return Err(CliError::Input(format!(
            "({},{},{},{}) cannot be deduced from any case of smaller genus",
            target.r, target.s, target.rho, target.m
        )));
    }
    let rows: Vec<_> = found
        .iter()
        .map(|(op, p)| json!({ "op": op, "source": p }))
        .collect();
    emit(
        None,
        &pretty(&json!({ "target": target, "derivations": rows })),
    )?;
    Ok(Status::Ok)
}

fn table(reports: &[CaseReport]) -> String {
    let mut s = format!(
        "{:<2}{:<20} {:>3} {:>3} {:>3} {:>3} {:>4} {:<10} {:>4} {:<11} {:>10}\n",
        "", "case", "r", "s", "rho", "m", "g", "range", "|A|", "verdict", "ms"
    );
    for r in reports {
        let p = &r.parameters;
        let flag = if r.verdict == VerdictKind::Independent {
            ""
        } else {
            "!"
        };
        let range = serde_json::to_value(r.range.kind)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        let verdict = serde_json::to_value(r.verdict)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        s.push_str(&format!(
            "{:<2}{:<20} {:>3} {:>3} {:>3} {:>3} {:>4} {:<10} {:>4} {:<11} {:>10.1}\n",
            flag,
            r.case.sidecar.name,
            p.r,
            p.s,
            p.rho,
            p.m,
            p.g,
            range,
            r.family_size,
            verdict,
            r.timing_ms
        ));
    }
    s
}

pub fn report(
    library: &[String],
    batch: Option<&Path>,
    format: Format,
    json_out: Option<&Path>,
    run: &RunArgs,
) -> Result<Status, CliError> {
    let mut cases = Vec::new();
    for name in library {
        cases.extend(input::library_matches(name, &ParamArgs::default())?);
    }
    if let Some(b) = batch {
        cases.extend(input::load_batch(b)?);
    }
    if library.is_empty() && batch.is_none() {
        cases = case_library();
    }
    let (cases, skipped): (Vec<CaseSpec>, Vec<CaseSpec>) = cases
        .into_iter()
        .partition(|c| run.allow_long || !c.expensive);
    for c in &skipped {
        eprintln!("skipping long-running case {} (use --allow-long)", c.name);
    }
    let reports = run_cases(&cases, &run.options())?;
    let aggregate = json!({
        "schema_version": troprank_core::report::SCHEMA_VERSION,
        "engine_version": ENGINE_VERSION,
        "cases": reports,
    });
    if let Some(p) = json_out {
        emit(Some(p), &pretty(&aggregate))?;
    }
    match format {
        Format::Table => emit(None, table(&reports).trim_end())?,
        Format::Json => emit(None, &pretty(&aggregate))?,
    }
    Ok(reports
        .iter()
        .map(|r| status_of(r, run.expect))
        .max()
        .unwrap_or(Status::Ok))
}

pub fn enumerate(params: &ParamArgs, limit: usize, format: Format) -> Result<Status, CliError> {
    let p = params.resolve()?;
    let paths = enumerate_paths(p.r, p.s, p.rho, limit);
    let tableaux: Vec<_> = paths.iter().map(|path| path.to_tableau()).collect();
    match format {
        Format::Json => emit(None, &pretty(&tableaux))?,
        Format::Table => {
            let text: Vec<String> = tableaux
                .iter()
                .enumerate()
                .map(|(i, t)| format!("# tableau {}\n{}", i + 1, t.to_text().trim_end()))
                .collect();
            emit(None, &text.join("\n\n"))?;
            eprintln!("{} tableaux for {p}", tableaux.len());
        }
    }
    Ok(Status::Ok)
}

pub fn lengths_emit(
    params: &ParamArgs,
    long: Option<Vec<usize>>,
    out: Option<&Path>,
) -> Result<Status, CliError> {
    let p = params.resolve()?;
    let long = long.map(|v| v.into_iter().collect());
    let g = ChainOfLoops::instantiate_admissible(&p, long.as_ref())?;
    emit(out, &pretty(&g.to_file()))?;
    Ok(Status::Ok)
}

pub fn lengths_validate(file: &Path, params: &ParamArgs) -> Result<Status, CliError> {
    let p = params.resolve()?;
    let parsed = serde_json::from_str(&input::read_text(file)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
    let g = ChainOfLoops::from_file(parsed)
        .map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
    if g.genus() != p.genus() {
        return Err(CliError::Input(format!(
            "{}: genus {} but the parameters need {}",
            file.display(),
            g.genus(),
            p.genus()
        )));
    }
    let adm = g.verify_admissible(&p);
    emit(None, &pretty(&adm))?;
    if adm.ok() {
        Ok(Status::Ok)
    } else {
        Err(CliError::Input(format!(
            "{}: {} admissibility violations",
            file.display(),
            adm.violations.len()
        )))
    }
}
