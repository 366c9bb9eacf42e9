//! `jetpoisson verify <suite> [flags]`: runs a verification suite and
//! prints the report. Exits 0 iff every check passed, 1 if one failed and
//! 2 on a configuration or I/O error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use jetpoisson::quantum::SetKind;
use jetpoisson::suite::{run_suite, ParamValue, PhiSpec, Suite, SuiteConfig};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "jetpoisson", version, about = "Exact checks of Poisson-Lie structures on jet groups and their quantizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Group,
    Poisson,
    Phi,
    Bialgebra,
    Cybe,
    Classify,
    Density,
    Quantum,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetArg {
    #[value(name = "R1")]
    R1,
    #[value(name = "R2")]
    R2,
    #[value(name = "R3")]
    R3,
    #[value(name = "R2-ansatz")]
    R2Ansatz,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct VerifyArgs {
    suite: SuiteArg,
    /// Number of coordinates, or the top cochain index for bialgebra and cybe.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 2)]
    d: u32,
    /// Family parameter, or the density weight: a rational or `symbolic`.
    #[arg(long, default_value = "symbolic")]
    lambda: String,
    #[arg(long = "h-order")]
    h_order: Option<u32>,
    #[arg(long, value_enum)]
    set: Option<SetArg>,
    #[arg(long = "C")]
    c: Option<String>,
    #[arg(long = "C1")]
    c1: Option<String>,
    #[arg(long = "C2")]
    c2: Option<String>,
    #[arg(long = "C3")]
    c3: Option<String>,
    #[arg(long = "C4")]
    c4: Option<String>,
    #[arg(long = "C5")]
    c5: Option<String>,
    /// power, extended, linear, exp or table:<file>.
    #[arg(long, default_value = "power")]
    phi: String,
    /// Total degree for truncated phi tables and phi-equation checks.
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config(a: &VerifyArgs) -> Result<SuiteConfig, String> {
    let suite = match a.suite {
        SuiteArg::Group => Suite::Group,
        SuiteArg::Poisson => Suite::Poisson,
        SuiteArg::Phi => Suite::Phi,
        SuiteArg::Bialgebra => Suite::Bialgebra,
        SuiteArg::Cybe => Suite::Cybe,
        SuiteArg::Classify => Suite::Classify,
        SuiteArg::Density => Suite::Density,
        SuiteArg::Quantum => Suite::Quantum,
        SuiteArg::All => Suite::All,
    };
    let phi = match a.phi.as_str() {
        "power" => PhiSpec::Power,
        "extended" => PhiSpec::Extended,
        "linear" => PhiSpec::Linear,
        "exp" => PhiSpec::Exp,
        other => match other.strip_prefix("table:") {
            Some(path) => PhiSpec::Table(std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path, e))?),
            None => return Err(format!("unknown --phi {}", other)),
        },
    };
    let mut params = BTreeMap::new();
    let named = [("C", &a.c), ("C1", &a.c1), ("C2", &a.c2), ("C3", &a.c3), ("C4", &a.c4), ("C5", &a.c5)];
    for (name, v) in named {
        if let Some(v) = v {
            params.insert(name.to_string(), v.parse::<ParamValue>().map_err(|e| e.to_string())?);
        }
    }
    let set = a.set.map(|s| match s {
        SetArg::R1 => SetKind::R1,
        SetArg::R2 => SetKind::R2,
        SetArg::R3 => SetKind::R3,
        SetArg::R2Ansatz => SetKind::R2Ansatz,
    });
    Ok(SuiteConfig {
        suite,
        n: a.n,
        d: a.d,
        h_order: a.h_order,
        lambda: a.lambda.parse().map_err(|e: jetpoisson::suite::ConfigError| e.to_string())?,
        params,
        set,
        phi,
        degree: a.degree,
    })
}

fn main() -> ExitCode {
    let Command::Verify(args) = Cli::parse().command;
    let report = match config(&args).and_then(|cfg| run_suite(&cfg).map_err(|e| e.to_string())) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::from(2);
        }
    };
    let mut body = match args.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    if !body.ends_with('\n') {
        body.push('\n');
    }
    let written = match &args.out {
        Some(path) => std::fs::write(path, &body).map_err(|e| format!("{}: {}", path.display(), e)),
        None => {
            print!("{}", body);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {}", e);
        return ExitCode::from(2);
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
