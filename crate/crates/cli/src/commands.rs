use std::fs;
use std::io::Write;
use std::path::Path;

use seqpovm::io::{
    csv_field, format_sig15, parse_povm_doc, parse_state, report_csv, ReportDoc, TreeDoc,
};
use seqpovm::sequential::{execute_exact, plan, sample, verify_tree, VerifyReport};
use seqpovm::usd::{scenario, UsdInput};
use seqpovm::{Error, Povm, Violation};
use serde::Serialize;

use crate::{Cli, Command, Format};

/// Trials and tolerance for the consistency check run by `simulate`.
const VERIFY_TRIALS: usize = 64;
const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn domain(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_parse() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

type CmdResult<T> = Result<T, Failure>;

pub fn run(cli: &Cli) -> CmdResult<()> {
    match &cli.command {
        Command::Validate { file } => validate(cli, file),
        Command::Plan { file, strategy } => {
            let p = load_povm(file, cli.tol)?;
            let tree = plan(&p, *strategy)?;
            let out = match cli.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&TreeDoc::from_tree(&tree))?,
                Format::Csv => {
                    let mut s = String::from("outcome_label,path,depth\n");
                    for (j, path) in tree.paths().iter().enumerate() {
                        let ids: Vec<String> = path.iter().map(|i| i.to_string()).collect();
                        s.push_str(&format!(
                            "{},{},{}\n",
                            csv_field(&tree.labels()[j]),
                            ids.join("/"),
                            path.len()
                        ));
                    }
                    s
                }
            };
            emit(cli, &out)
        }
        Command::Simulate {
            file,
            state,
            strategy,
            shots,
            seed,
        } => {
            let p = load_povm(file, cli.tol)?;
            let rho = parse_state(&read(state)?, cli.tol)?;
            if rho.dim() != p.dim() {
                return Err(Error::dims(p.dim(), rho.dim()).into());
            }
            let tree = plan(&p, *strategy)?;
            let report = match shots {
                Some(n) => sample(&tree, &rho, *n, *seed)?,
                None => execute_exact(&tree, &rho)?,
            };
            let verify = verify_tree(&tree, &p, VERIFY_TRIALS, VERIFY_TOL)?;
            let out = match cli.format.unwrap_or(Format::Csv) {
                Format::Json => to_json(&ReportDoc::new(&report, Some(&verify)))?,
                Format::Csv => {
                    eprintln!("{}", verify_line(&verify));
                    report_csv(&report)
                }
            };
            emit(cli, &out)?;
            if verify.pass() {
                Ok(())
            } else {
                Err(Failure::domain(format!(
                    "tree statistics disagree with the POVM ({})",
                    verify_line(&verify)
                )))
            }
        }
        Command::Usd {
            omega,
            scenario: which,
            shots,
            seed,
        } => {
            let rows = usd_rows(omega, &which.kinds(), *shots, *seed)?;
            let out = match cli.format.unwrap_or(Format::Csv) {
                Format::Json => to_json(&rows)?,
                Format::Csv => usd_csv(&rows),
            };
            emit(cli, &out)
        }
    }
}

fn verify_line(v: &VerifyReport) -> String {
    format!(
        "verify_residual={:.3e} trials={} tol={:.1e} {}",
        v.max_deviation,
        v.trials,
        v.tol,
        if v.pass() { "ok" } else { "FAILED" }
    )
}

#[derive(Serialize)]
struct ValidateDoc {
    valid: bool,
    dim: Option<usize>,
    labels: Vec<String>,
    violations: Vec<String>,
}

fn validate(cli: &Cli, file: &Path) -> CmdResult<()> {
    let doc = parse_povm_doc(&read(file)?)?;
    let labels: Vec<String> = doc.effects.iter().map(|e| e.label.clone()).collect();
    let dim = doc.dim;
    let (report, failure) = match doc.into_povm(cli.tol) {
        Ok(_) => (
            ValidateDoc {
                valid: true,
                dim: Some(dim),
                labels,
                violations: vec![],
            },
            None,
        ),
        Err(Error::InvalidPovm(vs)) => {
            let violations: Vec<String> = vs.iter().map(Violation::to_string).collect();
            let msg = format!("invalid POVM: {}", violations.join("; "));
            (
                ValidateDoc {
                    valid: false,
                    dim: Some(dim),
                    labels,
                    violations,
                },
                Some(Failure::domain(msg)),
            )
        }
        Err(e) => return Err(e.into()),
    };
    let out = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut s = String::from("valid,violation\n");
            if report.violations.is_empty() {
                s.push_str("true,\n");
            }
            for v in &report.violations {
                s.push_str(&format!("false,{}\n", csv_field(v)));
            }
            s
        }
    };
    emit(cli, &out)?;
    failure.map_or(Ok(()), Err)
}

#[derive(Debug, Clone, Serialize)]
struct UsdRow {
    omega: f64,
    scenario: &'static str,
    input: &'static str,
    outcome: String,
    exact_p: f64,
    emp_freq: Option<f64>,
    shots: Option<u64>,
}

fn usd_rows(
    omegas: &[f64],
    kinds: &[seqpovm::ScenarioKind],
    shots: Option<u64>,
    seed: u64,
) -> CmdResult<Vec<UsdRow>> {
    let mut rows = Vec::new();
    let mut run_index = 0u64;
    for &w in omegas {
        for &kind in kinds {
            let sc = scenario(w, kind)?;
            for input in UsdInput::ALL {
                let rho = sc.problem.state(input);
                let report = match shots {
                    // each (angle, scenario, input) run gets its own seed
                    Some(n) => sample(&sc.tree, &rho, n, seed.wrapping_add(run_index))?,
                    None => execute_exact(&sc.tree, &rho)?,
                };
                run_index += 1;
                for (j, rec) in report.outcomes.iter().enumerate() {
                    rows.push(UsdRow {
                        omega: sc.problem.omega,
                        scenario: kind.name(),
                        input: input.name(),
                        outcome: rec.label.clone(),
                        exact_p: rec.exact_probability,
                        emp_freq: report.frequency(j),
                        shots: report.shots,
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn usd_csv(rows: &[UsdRow]) -> String {
    let mut s = String::from("omega,scenario,input,outcome,exact_p,emp_freq,shots\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_sig15(r.omega),
            r.scenario,
            r.input,
            csv_field(&r.outcome),
            format_sig15(r.exact_p),
            r.emp_freq.map(format_sig15).unwrap_or_default(),
            r.shots.map(|n| n.to_string()).unwrap_or_default(),
        ));
    }
    s
}

fn read(path: &Path) -> CmdResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn load_povm(path: &Path, tol: f64) -> CmdResult<Povm> {
    Ok(parse_povm_doc(&read(path)?)?.into_povm(tol)?)
}

fn to_json<T: Serialize>(value: &T) -> CmdResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn emit(cli: &Cli, text: &str) -> CmdResult<()> {
    match &cli.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::io(e.to_string()))
        }
    }
}
