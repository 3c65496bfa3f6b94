//! `cusp-char`: characteristic sequences of cuspidal plane-curve
//! singularities from a local parametrization.

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cusp_char::report::{
    run_analyze, run_check, run_oracle, InputDocument, OutputFormat, Report, TruncationSpec,
};

#[derive(Parser)]
#[command(
    name = "cusp-char",
    version,
    about = "Topological type of a cuspidal plane-curve singularity given by (x(t), y(t))"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Determine the characteristic sequence via the derived-polynomial
    /// recursion (the fast route).
    Analyze(CommonArgs),
    /// Determine it via the classical Newton-Puiseux expansion (the slow,
    /// independent route).
    Oracle(CommonArgs),
    /// Run both routes, compare all outputs and the leading-coefficient
    /// identity; exit 0 only on full agreement.
    Check(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON input document; `-` reads stdin.
    #[arg(long, default_value = "-")]
    input: String,
    /// Output format (overrides the document's `output_format`).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Treat the inputs as certified only up to `t^N`, or as `exact`
    /// polynomials (overrides the document's `truncation`).
    #[arg(long)]
    truncation: Option<String>,
    /// Step limit for the recursion.
    #[arg(long)]
    max_steps: Option<usize>,
    /// Include the normalized Puiseux coefficient table.
    #[arg(long)]
    coeffs: bool,
    /// Report wall-clock time per engine.
    #[arg(long)]
    time: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Human,
    Json,
}

fn read_input(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("cannot read stdin: {e}"))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))
    }
}

fn parse_truncation(arg: &str) -> Result<TruncationSpec, String> {
    if arg == "exact" {
        Ok(TruncationSpec::Exact(cusp_char::report::ExactWord::Exact))
    } else {
        arg.parse::<u64>()
            .map(TruncationSpec::Bound)
            .map_err(|_| format!("--truncation takes a non-negative integer or `exact`, got `{arg}`"))
    }
}

struct Resolved {
    doc_format: Option<OutputFormat>,
    request: Result<cusp_char::report::Request, String>,
}

fn resolve(args: &CommonArgs) -> Result<Resolved, String> {
    let text = read_input(&args.input)?;
    let doc: InputDocument =
        serde_json::from_str(&text).map_err(|e| format!("invalid input document: {e}"))?;
    let truncation = match &args.truncation {
        Some(t) => Some(parse_truncation(t)?),
        None => None,
    };
    let request = doc.resolve(truncation, args.max_steps, args.coeffs, args.time);
    Ok(Resolved {
        doc_format: doc.output_format,
        request,
    })
}

fn chosen_format(args: &CommonArgs, doc_format: Option<OutputFormat>) -> OutputFormat {
    match args.format {
        Some(FormatArg::Human) => OutputFormat::Human,
        Some(FormatArg::Json) => OutputFormat::Json,
        None => doc_format.unwrap_or(OutputFormat::Human),
    }
}

fn emit_report(report: &Report, format: OutputFormat) -> ExitCode {
    match format {
        OutputFormat::Human => print!("{}", report.render_human()),
        OutputFormat::Json => println!(
            "{}",
            serde_json::to_string_pretty(report).expect("serializable report")
        ),
    }
    ExitCode::from(report.status.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, runner): (&CommonArgs, fn(&cusp_char::report::Request) -> Report) =
        match &cli.command {
            Command::Analyze(a) => (a, run_analyze),
            Command::Oracle(a) => (a, run_oracle),
            Command::Check(a) => return run_check_command(a),
        };

    match resolve(args) {
        Err(message) => emit_report(&Report::input_error(message), chosen_format(args, None)),
        Ok(Resolved {
            doc_format,
            request,
        }) => {
            let format = chosen_format(args, doc_format);
            match request {
                Err(message) => emit_report(&Report::input_error(message), format),
                Ok(req) => emit_report(&runner(&req), format),
            }
        }
    }
}

fn run_check_command(args: &CommonArgs) -> ExitCode {
    match resolve(args) {
        Err(message) => emit_report(&Report::input_error(message), chosen_format(args, None)),
        Ok(Resolved {
            doc_format,
            request,
        }) => {
            let format = chosen_format(args, doc_format);
            match request {
                Err(message) => emit_report(&Report::input_error(message), format),
                Ok(req) => {
                    let out = run_check(&req);
                    match format {
                        OutputFormat::Human => print!("{}", out.render_human()),
                        OutputFormat::Json => println!(
                            "{}",
                            serde_json::to_string_pretty(&out).expect("serializable report")
                        ),
                    }
                    ExitCode::from(out.status.exit_code() as u8)
                }
            }
        }
    }
}
