use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qpcurrent::catalog;
use qpcurrent::dsl::{parse, print_session};
use qpcurrent::report::{first_diff, Report, RunReport};
use qpcurrent::{run_source, Options};

#[derive(Parser)]
#[command(name = "qpcurrent", version, about = "Exact current algebras of QP manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a .qp file (or only the statements given with --exec).
    Run {
        file: Option<PathBuf>,
        /// Extra statements appended after the file, e.g. "show {x[1], xi[1]};".
        #[arg(long)]
        exec: Option<String>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Built-in scenarios.
    Catalog {
        #[command(subcommand)]
        action: CatalogCmd,
    },
    /// Print a .qp file in canonical form.
    Fmt { file: PathBuf },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// List scenario names.
    List,
    /// Print the source of a scenario.
    Show { name: String },
    /// Run a scenario.
    Run {
        name: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Compare scenarios against their golden files (all if no name is given).
    Verify {
        name: Option<String>,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Args)]
struct Flags {
    /// Emit the JSON report instead of text.
    #[arg(long)]
    json: bool,
    /// Compare the text report with this file, byte for byte.
    #[arg(long, value_name = "FILE")]
    expect: Option<PathBuf>,
    #[arg(long, value_name = "K", default_value_t = qpcurrent_core::DEFAULT_MAX_TWIST_ORDER)]
    max_twist_order: usize,
    /// Report raw results without reducing modulo the declared relations.
    #[arg(long)]
    no_reduce: bool,
    /// Worker threads for commutator tables.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Record elapsed times (JSON only; text output stays deterministic).
    #[arg(long)]
    timing: bool,
}

impl Flags {
    fn options(&self) -> Options {
        Options { max_twist_order: self.max_twist_order, reduce: !self.no_reduce, jobs: self.jobs.max(1) }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Run { file, exec, flags } => {
            let (name, mut source) = match &file {
                Some(path) => match fs::read_to_string(path) {
                    Ok(s) => (path.display().to_string(), s),
                    Err(e) => {
                        eprintln!("error: cannot read {}: {e}", path.display());
                        return ExitCode::FAILURE;
                    }
                },
                None if exec.is_some() => ("<exec>".to_string(), String::new()),
                None => {
                    eprintln!("error: give a file, --exec, or both");
                    return ExitCode::from(2);
                }
            };
            if let Some(extra) = exec {
                if !source.is_empty() && !source.ends_with('\n') {
                    source.push('\n');
                }
                source.push_str(&extra);
            }
            let report = run_source(&name, &source, &flags.options(), flags.timing);
            emit(report, &flags)
        }
        Cmd::Catalog { action } => catalog_cmd(action),
        Cmd::Fmt { file } => {
            let source = match fs::read_to_string(&file) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", file.display());
                    return ExitCode::FAILURE;
                }
            };
            match parse(&source) {
                Ok(ast) => {
                    print!("{}", print_session(&ast));
                    ExitCode::SUCCESS
                }
                Err(diags) => {
                    for d in diags {
                        eprintln!("{}", d.render(&file.display().to_string(), &source));
                    }
                    ExitCode::FAILURE
                }
            }
        }
    }
}

fn emit(report: RunReport, flags: &Flags) -> ExitCode {
    for d in &report.diagnostics {
        eprintln!("{d}");
    }
    let text = report.to_text();
    let report_entries = report.entries_text();
    let mut ok = report.ok;
    if flags.json {
        println!("{}", Report::new(vec![report], vec![]).to_json());
    } else {
        print!("{}", report_entries);
    }
    if let Some(path) = &flags.expect {
        match fs::read_to_string(path) {
            Ok(expected) => {
                if let Some(d) = first_diff(&expected, &text) {
                    eprintln!(
                        "mismatch against {} at line {}:\n  expected: {}\n  actual:   {}",
                        path.display(),
                        d.line,
                        d.expected.as_deref().unwrap_or("<end of file>"),
                        d.actual.as_deref().unwrap_or("<end of output>")
                    );
                    ok = false;
                }
            }
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                ok = false;
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn catalog_cmd(action: CatalogCmd) -> ExitCode {
    let lookup = |name: &str| {
        let s = catalog::find(name);
        if s.is_none() {
            eprintln!("error: no scenario `{name}`; try `qpcurrent catalog list`");
        }
        s
    };
    match action {
        CatalogCmd::List => {
            for s in catalog::scenarios() {
                println!("{:<18} {}", s.name, s.summary);
            }
            ExitCode::SUCCESS
        }
        CatalogCmd::Show { name } => match lookup(&name) {
            Some(s) => {
                print!("{}", s.source);
                ExitCode::SUCCESS
            }
            None => ExitCode::FAILURE,
        },
        CatalogCmd::Run { name, flags } => match lookup(&name) {
            Some(s) => emit(s.run(&flags.options(), flags.timing), &flags),
            None => ExitCode::FAILURE,
        },
        CatalogCmd::Verify { name, json, jobs } => {
            let selected: Vec<_> = match &name {
                Some(n) => match lookup(n) {
                    Some(s) => vec![s],
                    None => return ExitCode::FAILURE,
                },
                None => catalog::scenarios().iter().collect(),
            };
            let verdicts: Vec<_> = selected.iter().map(|s| s.verify(jobs)).collect();
            let report = Report::new(vec![], verdicts);
            if json {
                println!("{}", report.to_json());
            } else {
                for v in &report.verification {
                    match &v.diff {
                        None => println!("PASS {}", v.scenario),
                        Some(d) => {
                            println!("FAIL {} (first difference at line {})", v.scenario, d.line);
                            println!("  expected: {}", d.expected.as_deref().unwrap_or("<end of file>"));
                            println!("  actual:   {}", d.actual.as_deref().unwrap_or("<end of output>"));
                        }
                    }
                }
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
