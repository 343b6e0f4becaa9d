use std::fs;
use std::process::ExitCode;

use adelic_core::adeles::{FlagId, Prec, Scenario};
use adelic_core::coeff::Field;
use adelic_core::direct_image::{di_form, di_symbol, table_pairing, FlagContext};
use adelic_core::error::Error;
use adelic_core::expr::{apply_directives_l2, eval, l2_env, parse, parse_full, Caps};
use adelic_core::local2d::{res_inner, res_outer, res_total, Form2, L2Series};
use adelic_core::report::Report;
use adelic_core::series::var;
use adelic_core::symbols::{tame_symbol, triple_symbol};
use adelic_core::verify::{self, SUITES};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "adelic", version, about = "Residues, symbols and direct images on two-dimensional local fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Expand a global function at a flag of the scenario.
    Expand {
        #[arg(long)]
        func: String,
        /// Flag as point@curve, e.g. o@F0.
        #[arg(long)]
        flag: String,
        #[arg(long, default_value = "8,8", value_parser = parse_prec)]
        prec: Prec,
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Residue of a 2-form `E du^dt` in k((u))((t)).
    Res {
        #[arg(long, value_enum)]
        kind: ResKind,
        #[arg(long)]
        form: String,
        #[arg(long, default_value = "8,8", value_parser = parse_prec)]
        prec: Prec,
    },
    /// Symbols of local elements in u, t.
    Symbol {
        #[arg(long, value_enum)]
        kind: SymbolKind,
        /// Comma-separated arguments; commas inside parentheses are kept.
        #[arg(long, num_args = 1.., required = true)]
        args: Vec<String>,
        #[arg(long, default_value = "8,8", value_parser = parse_prec)]
        prec: Prec,
        /// For `pushforward`: expand global arguments at this flag instead.
        #[arg(long)]
        flag: Option<String>,
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Direct image of a 2-form, at a flag (global expression) or on the
    /// local fibre field (local expression).
    Pushforward {
        #[arg(long)]
        form: String,
        #[arg(long)]
        flag: Option<String>,
        #[arg(long, default_value = "8,8", value_parser = parse_prec)]
        prec: Prec,
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "8,8", value_parser = parse_prec)]
        prec: Prec,
        #[arg(long)]
        scenario: Option<String>,
        /// Print the full JSON report instead of a summary.
        #[arg(long)]
        json: bool,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<String>,
    },
    /// Summarise a saved JSON report.
    Report {
        #[arg(long)]
        json: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ResKind {
    Inner,
    Outer,
    Total,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymbolKind {
    Tame,
    Triple,
    Table,
    Pushforward,
}

fn parse_prec(s: &str) -> Result<Prec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| x.parse::<i64>().map_err(|_| format!("bad precision {x:?}"));
    let (pu, pt) = match parts.as_slice() {
        [p] => (num(p)?, num(p)?),
        [a, b] => (num(a)?, num(b)?),
        _ => return Err("expected Pu,Pt".into()),
    };
    if pu < 1 || pt < 1 {
        return Err("precisions must be positive".into());
    }
    Ok(Prec::new(pu, pt))
}

enum Failure {
    Usage(String),
    Core(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::UnknownFlag(_) | Error::Scenario(_) => Failure::Usage(e.to_string()),
            e => Failure::Core(e),
        }
    }
}

/// Splits on top-level commas.
fn split_args(raw: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for a in raw {
        let mut depth = 0;
        let mut cur = String::new();
        for ch in a.chars() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    out.push(cur.trim().trim_matches('"').to_string());
                    cur.clear();
                    continue;
                }
                _ => {}
            }
            cur.push(ch);
        }
        if !cur.trim().is_empty() {
            out.push(cur.trim().trim_matches('"').to_string());
        }
    }
    out
}

fn load_scenario(path: &Option<String>) -> Result<Scenario, Failure> {
    match path {
        None => Ok(Scenario::builtin()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{p}: {e}")))?;
            Ok(Scenario::from_json(&text)?)
        }
    }
}

/// A value of k((u))((t)) written in u and t.
fn local(text: &str, p: Prec) -> Result<L2Series, Failure> {
    let parsed = parse_full(text)?;
    if parsed.form.is_some() {
        return Err(Failure::Usage(format!("{text:?}: expected an element, not a form")));
    }
    let env = l2_env("u", "t", &Field::Rationals, Caps::new(p.inner, p.outer));
    Ok(apply_directives_l2(&eval(&parsed.expr, &env)?, &parsed.directives)?)
}

fn local_form(text: &str, p: Prec) -> Result<Form2, Failure> {
    let parsed = parse_full(text)?;
    let sign = adelic_core::adeles::scenario::form_sign(&parsed, "u", "t")?;
    let env = l2_env("u", "t", &Field::Rationals, Caps::new(p.inner, p.outer));
    let g = apply_directives_l2(&eval(&parsed.expr, &env)?, &parsed.directives)?;
    let w = Form2::new(g);
    Ok(if sign < 0 { w.neg() } else { w })
}

fn fibre_ctx() -> FlagContext {
    FlagContext::fibre(var("u"), var("t"), var("t"), Field::Rationals).expect("the standard fibre flag")
}

fn arity(args: &[String], n: usize) -> Result<(), Failure> {
    if args.len() != n {
        return Err(Failure::Usage(format!("expected {n} arguments, got {}", args.len())));
    }
    Ok(())
}

fn summarise(r: &Report) {
    let failed: Vec<_> = r.failures().collect();
    for c in &failed {
        let inputs: Vec<String> = c.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("FAIL {} :: {}", inputs.join(" "), c.residual);
    }
    println!("{}: {} cases, {} failed", r.suite, r.cases.len(), failed.len());
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Expand { func, flag, prec, scenario } => {
            let scn = load_scenario(&scenario)?;
            let f = FlagId::parse(&flag)?;
            println!("{}", scn.expand_function(&parse(&func)?, &f, prec.inner, prec.outer)?);
        }
        Cmd::Res { kind, form, prec } => {
            let w = local_form(&form, prec)?;
            match kind {
                ResKind::Inner => println!("{}", res_inner(&w)?),
                ResKind::Outer => println!("{}", res_outer(&w)?),
                ResKind::Total => println!("{}", res_total(&w)?),
            }
        }
        Cmd::Symbol { kind, args, prec, flag, scenario } => {
            let args = split_args(&args);
            match kind {
                SymbolKind::Tame => {
                    arity(&args, 2)?;
                    println!("{}", tame_symbol(&local(&args[0], prec)?, &local(&args[1], prec)?)?);
                }
                SymbolKind::Table => {
                    arity(&args, 2)?;
                    println!("{}", table_pairing(&local(&args[0], prec)?, &local(&args[1], prec)?)?);
                }
                SymbolKind::Triple => {
                    arity(&args, 3)?;
                    let x: Vec<L2Series> = args.iter().map(|a| local(a, prec)).collect::<Result<_, _>>()?;
                    println!("{}", triple_symbol(&x[0], &x[1], &x[2])?);
                }
                SymbolKind::Pushforward => {
                    arity(&args, 2)?;
                    match flag {
                        None => println!("{}", di_symbol(&fibre_ctx(), &local(&args[0], prec)?, &local(&args[1], prec)?)?),
                        Some(fl) => {
                            let scn = load_scenario(&scenario)?;
                            let f = FlagId::parse(&fl)?;
                            let ex = |s: &str| -> Result<L2Series, Failure> {
                                Ok(scn.expand_function(&parse(s)?, &f, prec.inner, prec.outer)?.bounded(prec.inner, prec.outer))
                            };
                            println!("{}", di_symbol(&scn.flag_context(&f)?, &ex(&args[0])?, &ex(&args[1])?)?);
                        }
                    }
                }
            }
        }
        Cmd::Pushforward { form, flag, prec, scenario } => match flag {
            None => println!("{}", di_form(&fibre_ctx(), &local_form(&form, prec)?)?),
            Some(fl) => {
                let scn = load_scenario(&scenario)?;
                let f = FlagId::parse(&fl)?;
                let w = scn.expand_form_text(&form, &f, prec.inner, prec.outer)?;
                println!("{}", di_form(&scn.flag_context(&f)?, &w)?);
            }
        },
        Cmd::Verify { suite, seed, prec, scenario, json, out } => {
            let scn = match &scenario {
                None => None,
                Some(_) => Some(load_scenario(&scenario)?),
            };
            let r = verify::run(&suite, seed, prec, scn.as_ref())?;
            if let Some(path) = out {
                fs::write(&path, r.to_json()).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
            }
            if json {
                println!("{}", r.to_json());
            } else {
                summarise(&r);
            }
            if !r.pass {
                return Err(Failure::Verification);
            }
        }
        Cmd::Report { json } => {
            let text = fs::read_to_string(&json).map_err(|e| Failure::Usage(format!("{json}: {e}")))?;
            let r: Report = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{json}: {e}")))?;
            summarise(&r);
            if !r.pass {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e @ Error::InsufficientPrecision(_))) => {
            eprintln!("error: {e}");
            eprintln!("hint: the truncation cannot certify the answer; retry with a larger --prec");
            ExitCode::from(3)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
