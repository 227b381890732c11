use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lfk_core::verify::{
    describe, Claim, Outcome, VerificationReport, Verifier, VerifyOptions, DEFAULT_SEED,
};
use lfk_core::{
    as_class_reduce, hilbert_symbol_q2, parse_element, unit_class_reduce, AdaptedBasis, Error,
    Field, FieldDescriptor, FpSubspace, Line, PairingContext, Result, Space,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "lfk",
    version,
    about = "Exponent-p class spaces, degree-p extensions and pairings of local fields"
)]
struct Cli {
    /// Working precision in uniformizer digits (characteristic 0).
    #[arg(long, global = true, env = "LFK_PREC")]
    prec: Option<i64>,
    /// Window for characteristic-p computations.
    #[arg(long, global = true)]
    window: Option<i64>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Directory receiving one JSON report per verified claim.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print the constants of a field.
    Describe {
        #[arg(value_name = "FIELD")]
        descriptor: Option<String>,
        #[arg(long = "field")]
        field: Option<String>,
    },
    /// Run one computation.
    Compute {
        #[command(subcommand)]
        what: Compute,
    },
    /// Check claims on a field (`all` by default).
    Verify {
        #[arg(long)]
        field: String,
        #[arg(value_name = "CLAIM")]
        claims: Vec<String>,
        /// Record wall-clock runtimes in the reports.
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Args)]
struct FieldArg {
    #[arg(long)]
    field: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Mult,
    Add,
}

#[derive(Subcommand)]
enum Compute {
    /// Level δ of the line through a class.
    Level {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long, allow_hyphen_values = true)]
        elt: String,
        #[arg(long, value_enum)]
        space: Option<SpaceArg>,
    },
    /// Ramification break of the extension attached to a line.
    Break {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long, allow_hyphen_values = true)]
        line: String,
    },
    /// Whether an element pairs trivially with a line.
    Pair {
        #[command(flatten)]
        field: FieldArg,
        /// Generator of the line (an additive class in characteristic p).
        #[arg(long, alias = "add", allow_hyphen_values = true)]
        line: String,
        /// Multiplicative element.
        #[arg(long, alias = "mult", allow_hyphen_values = true)]
        elt: String,
    },
    /// Norm class subgroup of the extension attached to a line.
    NormGroup {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long, allow_hyphen_values = true)]
        line: String,
    },
    /// Reduced representative and coordinates of a class.
    Class {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long, allow_hyphen_values = true)]
        elt: String,
        #[arg(long, value_enum)]
        space: Option<SpaceArg>,
    },
}

/// What a command produced: a JSON value plus a human rendering.
struct Output {
    json: Value,
    table: String,
    exit: u8,
}

fn open_field(cli: &Cli, text: &str) -> Result<Field> {
    let mut d = FieldDescriptor::parse(text)?;
    if let Some(prec) = cli.prec {
        d = d.with_precision(prec);
    }
    lfk_core::make_field(d)
}

fn window(cli: &Cli, field: &Field) -> Option<i64> {
    if field.is_char_zero() {
        None
    } else {
        Some(cli.window.unwrap_or(lfk_core::class_spaces::DEFAULT_WINDOW))
    }
}

fn default_space(field: &Field, space: Option<SpaceArg>) -> Space {
    match space {
        Some(SpaceArg::Mult) => Space::Mult,
        Some(SpaceArg::Add) => Space::Add,
        None if field.is_char_zero() => Space::Mult,
        None => Space::Add,
    }
}

fn line_space(field: &Field) -> Space {
    default_space(field, None)
}

fn subspace_json(basis: &AdaptedBasis, s: &FpSubspace) -> Value {
    json!({
        "basis_labels": basis.labels(),
        "rows": s.basis().iter().map(|v| v.coords().to_vec()).collect::<Vec<_>>(),
        "dim": s.dim(),
        "codim": s.codim(),
    })
}

fn run_describe(cli: &Cli, text: &str) -> Result<Output> {
    let field = open_field(cli, text)?;
    let s = describe(&field);
    let show = |x: Option<i64>| x.map_or("∞".to_string(), |v| v.to_string());
    let table = format!(
        "field {}\np={} f={} e={} c={} pc={} q={} mu_p={}{}",
        s.field,
        s.p,
        s.f,
        show(s.e),
        show(s.c),
        show(s.pc),
        s.q,
        if s.mu_p { "yes" } else { "no" },
        s.d.map_or(String::new(), |d| format!(" d={d}")),
    );
    Ok(Output {
        json: serde_json::to_value(&s).unwrap(),
        table,
        exit: 0,
    })
}

fn run_compute(cli: &Cli, what: &Compute) -> Result<Output> {
    match what {
        Compute::Level { field, elt, space } => {
            let field = open_field(cli, &field.field)?;
            let space = default_space(&field, *space);
            let basis = AdaptedBasis::new(&field, space, window(cli, &field))?;
            let x = parse_element(&field, elt)?;
            let coords = basis.coordinates(&x)?;
            let level = basis.level_of(&coords);
            let delta = basis.line_level(&coords);
            let json = json!({
                "field": field.descriptor.to_string(),
                "space": space,
                "element": x.to_string(),
                "coords": coords.coords(),
                "trivial": coords.is_zero(),
                "filtration_index": level,
                "delta": delta,
            });
            let table = match delta {
                Some(d) => format!("delta={d}"),
                None if coords.is_zero() => "trivial class (no line)".into(),
                None => format!("filtration index {}", level.unwrap_or(0)),
            };
            Ok(Output {
                json,
                table,
                exit: 0,
            })
        }
        Compute::Break { field, line } => {
            let field = open_field(cli, &field.field)?;
            let basis = AdaptedBasis::new(&field, line_space(&field), window(cli, &field))?;
            let x = parse_element(&field, line)?;
            let line = Line::through(&basis, &x)?;
            let ext = lfk_core::attach_extension(&line)?;
            let eps = ext.ramification_break();
            let json = json!({
                "field": field.descriptor.to_string(),
                "line": x.to_string(),
                "delta": line.level,
                "unramified": ext.is_unramified,
                "break": eps,
            });
            Ok(Output {
                json,
                table: format!("epsilon={eps}"),
                exit: 0,
            })
        }
        Compute::Pair { field, line, elt } => {
            let field = open_field(cli, &field.field)?;
            let ctx = PairingContext::new(&field, window(cli, &field))?;
            let lb = ctx.add.as_ref().unwrap_or(&ctx.mult);
            let a = parse_element(&field, line)?;
            let b = parse_element(&field, elt)?;
            let l = Line::through(lb, &a)?;
            let trivial = ctx.pairs_trivially(&l, &b)?;
            let mut json = json!({
                "field": field.descriptor.to_string(),
                "line": a.to_string(),
                "element": b.to_string(),
                "pairing": if trivial { "trivial" } else { "nontrivial" },
            });
            if field.p == 2 && field.e == Some(1) && field.f == 1 {
                json["hilbert_symbol"] = json!(hilbert_symbol_q2(&a, &b)?);
            }
            if !field.is_char_zero() {
                json["residue_value"] = json!(lfk_core::series_residue_and_dlog(&a, &b)?);
            }
            let table = if trivial { "trivial" } else { "nontrivial" }.to_string();
            Ok(Output {
                json,
                table,
                exit: 0,
            })
        }
        Compute::NormGroup { field, line } => {
            let field = open_field(cli, &field.field)?;
            let ctx = PairingContext::new(&field, window(cli, &field))?;
            let lb = ctx.add.as_ref().unwrap_or(&ctx.mult);
            let a = parse_element(&field, line)?;
            let l = Line::through(lb, &a)?;
            let n = ctx.norm_group(&l)?;
            let labels = ctx.mult.labels();
            let rows: Vec<String> = n
                .basis()
                .iter()
                .map(|v| {
                    let terms: Vec<String> = v
                        .coords()
                        .iter()
                        .zip(&labels)
                        .filter(|(c, _)| **c != 0)
                        .map(|(c, l)| {
                            if *c == 1 {
                                format!("[{l}]")
                            } else {
                                format!("{c}[{l}]")
                            }
                        })
                        .collect();
                    terms.join(" + ")
                })
                .collect();
            let json = json!({
                "field": field.descriptor.to_string(),
                "line": a.to_string(),
                "norm_group": subspace_json(&ctx.mult, &n),
            });
            Ok(Output {
                json,
                table: format!("span{{{}}} codim {}", rows.join(", "), n.codim()),
                exit: 0,
            })
        }
        Compute::Class { field, elt, space } => {
            let field = open_field(cli, &field.field)?;
            let space = default_space(&field, *space);
            let x = parse_element(&field, elt)?;
            let basis = AdaptedBasis::new(&field, space, window(cli, &field))?;
            let coords = basis.coordinates(&x)?;
            let (status, level, rep) = match space {
                Space::Mult if field.is_char_zero() => {
                    let r = unit_class_reduce(&x)?;
                    (r.status, r.level, r.normalized_rep.to_string())
                }
                Space::Add => {
                    let r = as_class_reduce(&x)?;
                    (r.status, r.level, r.normalized_rep.to_string())
                }
                Space::Mult => {
                    let status = if coords.is_zero() {
                        lfk_core::ClassStatus::Trivial
                    } else {
                        lfk_core::ClassStatus::Nontrivial
                    };
                    (status, basis.level_of(&coords).unwrap_or(0), x.to_string())
                }
            };
            let json = json!({
                "field": field.descriptor.to_string(),
                "space": space,
                "element": x.to_string(),
                "status": status,
                "level": level,
                "normalized_rep": rep,
                "basis_labels": basis.labels(),
                "coords": coords.coords(),
            });
            let status_text = serde_json::to_value(status).unwrap();
            let table = format!(
                "{} level={} rep={} coords={:?}",
                status_text.as_str().unwrap(),
                level,
                rep,
                coords.coords()
            );
            Ok(Output {
                json,
                table,
                exit: 0,
            })
        }
    }
}

fn run_verify(cli: &Cli, field_text: &str, claims: &[String], timings: bool) -> Result<Output> {
    let field = open_field(cli, field_text)?;
    let options = VerifyOptions {
        seed: cli.seed,
        window: cli.window,
        timings,
        ..VerifyOptions::default()
    };
    let selected: Vec<Claim> = if claims.is_empty() || claims.iter().any(|c| c == "all") {
        lfk_core::applicable_claims(&field)
    } else {
        let mut v = Vec::new();
        for c in claims {
            let claim = Claim::parse(c)?;
            if !v.contains(&claim) {
                v.push(claim);
            }
        }
        v
    };
    let verifier = Verifier::new(&field, options)?;
    let reports: Vec<VerificationReport> = verifier.run_claims(&selected)?;
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir)
            .map_err(|e| Error::Malformed(format!("cannot create {}: {e}", dir.display())))?;
        for r in &reports {
            let path = dir.join(format!("{}.json", r.claim_id));
            let text = serde_json::to_string_pretty(r).unwrap() + "\n";
            fs::write(&path, text)
                .map_err(|e| Error::Malformed(format!("cannot write {}: {e}", path.display())))?;
        }
    }
    let all_pass = reports.iter().all(|r| r.status == Outcome::Pass);
    let mut table = String::new();
    for r in &reports {
        let status = if r.status == Outcome::Pass {
            "pass"
        } else {
            "FAIL"
        };
        table.push_str(&format!(
            "{:<6} {:<4} {}\n",
            r.claim_id, status, r.statement
        ));
        if let Some(c) = &r.counterexample {
            table.push_str(&format!("       counterexample: {c}\n"));
        }
    }
    table.push_str(&format!(
        "{} of {} claims pass on {}{}",
        reports.iter().filter(|r| r.status == Outcome::Pass).count(),
        reports.len(),
        field.descriptor,
        verifier
            .options
            .window
            .map_or(String::new(), |w| format!(" (window {w})")),
    ));
    Ok(Output {
        json: serde_json::to_value(&reports).unwrap(),
        table,
        exit: if all_pass { 0 } else { 1 },
    })
}

fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Describe { descriptor, field } => {
            let text = descriptor
                .as_deref()
                .or(field.as_deref())
                .ok_or_else(|| Error::Malformed("describe needs a field descriptor".into()))?;
            run_describe(cli, text)
        }
        Command::Compute { what } => run_compute(cli, what),
        Command::Verify {
            field,
            claims,
            timings,
        } => run_verify(cli, field, claims, *timings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).unwrap()),
                Format::Table => println!("{}", out.table),
            }
            ExitCode::from(out.exit)
        }
        Err(e) => {
            eprintln!("lfk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
