use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dfb_core::poset::{
    dfbf_domain, parse_poset_file, theorem_report, theorem_sweep, DomainSpec, LoadedPoset,
};
use dfb_core::realline::{
    emit_plot_csv, parse_expr, real_domain, resolve_self_reference, Expr, RealError, DEFAULT_WINDOW,
};
use dfb_core::subtyping::GroundGraph;
use dfb_core::validity::check_type;
use dfb_core::{parse_program, parse_type, ClassTable};
use serde_json::{json, Value};

use crate::{PosetCommand, RealArgs};

pub const OK: u8 = 0;
pub const SEMANTIC_FAILURE: u8 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Internal(_) => "internal",
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// Text for standard output, the JSON object for `--json`, and the exit code.
pub struct Report {
    pub code: u8,
    pub text: String,
    pub json: Value,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_table(path: &Path) -> Result<ClassTable, CliError> {
    let src = read(path)?;
    let program =
        parse_program(&src).map_err(|e| CliError::Input(format!("{}:{e}", path.display())))?;
    ClassTable::build(&program).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn check(path: &Path, query: Option<&str>) -> Result<Report, CliError> {
    let table = load_table(path)?;
    let mut text = String::new();
    for w in table.warnings() {
        writeln!(text, "{}:{w}", path.display()).unwrap();
    }
    let warnings = json!(table.warnings());

    let Some(query) = query else {
        let classes: Vec<&str> = table.declared().map(|c| c.name.as_str()).collect();
        writeln!(
            text,
            "ok: {} classes, {} warnings",
            classes.len(),
            table.warnings().len()
        )
        .unwrap();
        return Ok(Report {
            code: OK,
            text,
            json: json!({ "classes": classes, "warnings": warnings }),
        });
    };

    let ty = parse_type(query).map_err(|e| CliError::Input(format!("query:{e}")))?;
    let verdict = check_type(&table, &ty).map_err(|e| CliError::Input(format!("{ty}: {e}")))?;
    writeln!(text, "{ty}: {}", verdict.status).unwrap();
    for r in &verdict.reasons {
        writeln!(text, "  {r}").unwrap();
    }
    let code = if verdict.is_valid() {
        OK
    } else {
        SEMANTIC_FAILURE
    };
    Ok(Report {
        code,
        text,
        json: json!({ "type": ty.to_string(), "verdict": verdict, "warnings": warnings }),
    })
}

pub fn graph(path: &Path, depth: usize, out: Option<&Path>) -> Result<Report, CliError> {
    let table = load_table(path)?;
    let graph = GroundGraph::build(&table, depth);
    let dot = graph.to_dot();
    let summary = json!({ "depth": depth, "nodes": graph.nodes.len(), "edges": graph.edges.len() });
    let (text, json) = match out {
        Some(out) => {
            fs::write(out, &dot).map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
            let text = format!(
                "wrote {} nodes and {} edges to {}\n",
                graph.nodes.len(),
                graph.edges.len(),
                out.display()
            );
            (
                text,
                json!({ "graph": summary, "out": out.display().to_string() }),
            )
        }
        None => (dot.clone(), json!({ "graph": summary, "dot": dot })),
    };
    Ok(Report {
        code: OK,
        text,
        json,
    })
}

fn load_poset(path: &Path) -> Result<LoadedPoset, CliError> {
    let src = read(path)?;
    parse_poset_file(&src).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn poset(command: PosetCommand) -> Result<Report, CliError> {
    match command {
        PosetCommand::Domain {
            file,
            lower,
            upper,
            strict,
        } => {
            let loaded = load_poset(&file)?;
            let map = |name: Option<String>| -> Result<_, CliError> {
                name.map(|n| loaded.map(&n).cloned().map_err(input))
                    .transpose()
            };
            let spec = DomainSpec::new(map(lower)?, map(upper)?, strict, strict).map_err(input)?;
            let members = loaded
                .poset
                .names(dfbf_domain(&loaded.poset, &spec).members);
            let text = format!("{{{}}}\n", members.join(", "));
            Ok(Report {
                code: OK,
                text,
                json: json!({ "members": members, "strict": strict }),
            })
        }
        PosetCommand::Theorem {
            file: Some(file),
            map,
            non_strict,
            ..
        } => {
            let strict = !non_strict;
            let loaded = load_poset(&file)?;
            let name = map.expect("clap requires --map with a file");
            let g = loaded.map(&name).map_err(input)?;
            let report = theorem_report(&loaded.poset, g, strict);
            let passed = usize::from(report.holds());
            let text = format!(
                "{passed}/1 pass\nupper agrees: {}\nlower agrees: {}\nsingle step: {}\n",
                report.upper_agrees, report.lower_agrees, report.single_step
            );
            let code = if report.holds() { OK } else { SEMANTIC_FAILURE };
            Ok(Report {
                code,
                text,
                json: json!({ "map": name, "report": report, "strict": strict }),
            })
        }
        PosetCommand::Theorem {
            random,
            max_size,
            seed,
            non_strict,
            ..
        } => {
            let strict = !non_strict;
            let runs = random.expect("clap requires a file or --random");
            let summary = theorem_sweep(runs, max_size as usize, seed, strict);
            let mut text = format!(
                "{}/{} pass\nsingle step: {}/{}\n",
                summary.passed, runs, summary.single_step, runs
            );
            if !summary.failures.is_empty() {
                let seeds: Vec<String> = summary.failures.iter().map(u64::to_string).collect();
                writeln!(text, "counterexample seeds: {}", seeds.join(" ")).unwrap();
            }
            let code = if summary.failures.is_empty() {
                OK
            } else {
                SEMANTIC_FAILURE
            };
            let json =
                json!({ "max_size": max_size, "seed": seed, "strict": strict, "summary": summary });
            Ok(Report { code, text, json })
        }
    }
}

fn bound(name: &str, src: Option<&str>, body: Option<&Expr>) -> Result<Option<Expr>, CliError> {
    let Some(src) = src else { return Ok(None) };
    let e = parse_expr(src).map_err(|e| CliError::Input(format!("--{name}: {e}")))?;
    if !e.has_self_ref() {
        return Ok(Some(e));
    }
    let body = body.ok_or_else(|| {
        CliError::Input(format!("--{name} refers to f(x) but no --body was given"))
    })?;
    resolve_self_reference(&e, body)
        .map(Some)
        .map_err(|e| CliError::Input(format!("--{name}: {e}")))
}

pub fn real(args: &RealArgs) -> Result<Report, CliError> {
    let body = match &args.body {
        Some(src) => {
            let e = parse_expr(src).map_err(|e| CliError::Input(format!("--body: {e}")))?;
            if e.has_self_ref() {
                return Err(input(RealError::SelfReferenceInBody));
            }
            Some(e)
        }
        None => None,
    };
    let lower = bound("lower", args.lower.as_deref(), body.as_ref())?;
    let upper = bound("upper", args.upper.as_deref(), body.as_ref())?;
    let window = args
        .window
        .as_deref()
        .map_or(DEFAULT_WINDOW, |w| (w[0], w[1]));

    let report =
        real_domain(lower.as_ref(), upper.as_ref(), window, args.grid, args.tol).map_err(input)?;
    if !report.excluded.is_empty() {
        eprintln!(
            "note: {} samples excluded (bound undefined)",
            report.excluded.len()
        );
    }
    if let Some(path) = &args.csv {
        emit_plot_csv(body.as_ref(), lower.as_ref(), upper.as_ref(), &report, path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    let mut json = json!({ "domain": report, "display": report.intervals.to_string() });
    let resolved = |e: &Option<Expr>| e.as_ref().map(Expr::to_string);
    json["lower"] = json!(resolved(&lower));
    json["upper"] = json!(resolved(&upper));
    Ok(Report {
        code: OK,
        text: format!("{}\n", report.intervals),
        json,
    })
}
