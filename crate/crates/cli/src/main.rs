use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use multiphase_cli::checks::{self, CheckOutcome};
use multiphase_cli::elaborate::{elaborate, ElabTheory};
use multiphase_cli::report::{self, CheckResultJson};
use multiphase_cli::{examples, parse};
use multiphase_core::numcheck::Plan;
use multiphase_core::symmetry::lie_derivative_of_section;
use multiphase_core::Expr;

#[derive(Parser)]
#[command(
    name = "multiphase",
    about = "Covariant Hamiltonian structures of first-order field theories",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Forms,
    Legendre,
    Noether,
    Bracket,
    Transitivity,
    All,
}

impl Suite {
    fn as_str(self) -> &'static str {
        match self {
            Suite::Forms => "forms",
            Suite::Legendre => "legendre",
            Suite::Noether => "noether",
            Suite::Bracket => "bracket",
            Suite::Transitivity => "transitivity",
            Suite::All => "all",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Derive the covariant Hamiltonian structures of a theory file.
    Derive {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Show the Noether data of one generator family.
    Noether {
        file: PathBuf,
        #[arg(long)]
        generator: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite against a theory file.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the shipped example theories, or write them to a directory.
    Examples {
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &PathBuf) -> Result<ElabTheory, String> {
    let src = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let doc = match parse(&src) {
        Ok(d) => d,
        Err(diags) => {
            for d in &diags {
                eprintln!("{d}");
            }
            return Err(format!(
                "{}: {} parse error(s)",
                path.display(),
                diags.len()
            ));
        }
    };
    match elaborate(&doc) {
        Ok(et) => Ok(et),
        Err(diags) => {
            for d in &diags {
                eprintln!("{d}");
            }
            Err(format!(
                "{}: {} elaboration error(s)",
                path.display(),
                diags.len()
            ))
        }
    }
}

fn emit(text: String, out: &Option<PathBuf>) -> Result<(), String> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Derive {
            file,
            format,
            out,
            seed,
        } => {
            let et = load(&file)?;
            let text = match format {
                Format::Text => report::render_text(&et.theory),
                Format::Structured => {
                    let rep = report::derive_report(&et.theory, seed);
                    serde_json::to_string_pretty(&rep).map_err(|e| e.to_string())?
                }
            };
            emit(text, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Noether {
            file,
            generator,
            format,
            out,
        } => {
            let et = load(&file)?;
            let theory = &et.theory;
            let gen = theory
                .generator(&generator)
                .ok_or_else(|| format!("no generator named `{generator}` in this theory"))?;
            let jc = &theory.charts;
            let phi = report::generic_section_with_extras(theory);
            let current =
                multiphase_core::symmetry::noether_current(jc, &theory.lagrangian, gen, &phi);
            let di = multiphase_core::symmetry::divergence_identity(
                jc,
                &theory.lagrangian,
                gen,
                &theory.section_extras,
            );
            let mut contributing: Vec<String> = Vec::new();
            let mut lies: HashMap<String, Expr> = HashMap::new();
            for entry in jc.variational_entries() {
                let lie = lie_derivative_of_section(jc, gen, &phi, entry);
                if !lie.is_zero() {
                    contributing.push(format!("{}", Expr::sym(entry.y)));
                    lies.insert(format!("{}", Expr::sym(entry.y)), lie);
                }
            }
            let (quasi, quasi_detail) = checks::quasi_symmetry(theory, gen);
            match format {
                Format::Text => {
                    let mut s = String::new();
                    s.push_str(&format!(
                        "generator {} of theory {}\n",
                        gen.name, theory.name
                    ));
                    s.push_str(&format!(
                        "\nmomentum map J(ξ):\n{}\n",
                        multiphase_core::symmetry::lagrangian_momentum_map(
                            jc,
                            &theory.lagrangian,
                            gen
                        )
                    ));
                    s.push_str(&format!("\nnoether current (j¹φ)*J(ξ):\n{current}\n"));
                    s.push_str(&format!(
                        "\ndivergence identity residual: {}\n",
                        if di.residual.is_zero() { "0" } else { "nonzero" }
                    ));
                    s.push_str(&format!("symmetry status: {quasi_detail}\n"));
                    s.push_str("\ncontributing field components (nonzero £_ξφ):\n");
                    for c in &contributing {
                        s.push_str(&format!("  {c}\n"));
                    }
                    if quasi {
                        s.push_str(
                            "\non shell, the exterior derivative of the current vanishes: \
                             the current is conserved.\n",
                        );
                    }
                    emit(s, &out)?;
                }
                Format::Structured => {
                    let doc = serde_json::json!({
                        "schema_version": report::SCHEMA_VERSION,
                        "theory": theory.name,
                        "generator": gen.name,
                        "noether_current": report::form_to_json(&current),
                        "divergence_residual": report::expr_to_json(&di.residual),
                        "symmetry": quasi,
                        "contributing_components": contributing,
                    });
                    emit(
                        serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?,
                        &out,
                    )?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            file,
            suite,
            samples,
            tol,
            seed,
            format,
            out,
        } => {
            let et = load(&file)?;
            let plan = Plan::new(samples, tol, seed);
            let outcomes = checks::run_suite(&et, suite.as_str(), &plan);
            let failed: Vec<&CheckOutcome> = outcomes.iter().filter(|o| !o.passed).collect();
            match format {
                Format::Text => {
                    let mut s = String::new();
                    for o in &outcomes {
                        s.push_str(&format!(
                            "[{}] {}/{}: {}\n",
                            if o.passed { "pass" } else { "FAIL" },
                            o.suite,
                            o.name,
                            o.detail
                        ));
                    }
                    s.push_str(&format!(
                        "{} checks, {} failed",
                        outcomes.len(),
                        failed.len()
                    ));
                    emit(s, &out)?;
                }
                Format::Structured => {
                    let doc: Vec<CheckResultJson> = outcomes
                        .iter()
                        .map(|o| CheckResultJson {
                            suite: o.suite.clone(),
                            name: o.name.clone(),
                            passed: o.passed,
                            detail: o.detail.clone(),
                        })
                        .collect();
                    emit(
                        serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?,
                        &out,
                    )?;
                }
            }
            if failed.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                for o in &failed {
                    eprintln!("verification failure: {}/{}: {}", o.suite, o.name, o.detail);
                }
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Examples { emit: dir } => {
            match dir {
                Some(d) => {
                    fs::create_dir_all(&d)
                        .map_err(|e| format!("cannot create {}: {e}", d.display()))?;
                    for (name, src) in examples::EXAMPLES {
                        fs::write(d.join(name), src)
                            .map_err(|e| format!("cannot write {name}: {e}"))?;
                    }
                    println!("wrote {} example files to {}", examples::EXAMPLES.len(), d.display());
                }
                None => {
                    for (name, src) in examples::EXAMPLES {
                        let title = src
                            .lines()
                            .find(|l| l.starts_with('#'))
                            .map(|l| l.trim_start_matches('#').trim())
                            .unwrap_or("");
                        println!("{name:<18} {title}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
