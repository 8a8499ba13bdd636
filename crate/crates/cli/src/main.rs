mod spill;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use corelog::model::{diff::first_divergence, CoreLog, Timestamp};
use corelog::ocel::{from_ocel, round_trip, to_ocel_with, DecodeError, EncodeError, EncodeMode, OcelDocument, OcelFormat, RoundTripError};
use corelog::parsers::{parse, MappingConfig, ParserProfile};
use corelog::stats;
use corelog::validation::report::{write_report, ReportFormat};
use corelog::validation::{normalize, validate, Diagnostic};

/// Process exit status; the numbers are a stable contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Exit {
    Ok = 0,
    Io = 1,
    Errors = 2,
    Warnings = 3,
}

#[derive(Parser)]
#[command(name = "corelog", version, about = "Convert, validate and inspect IoT-enhanced event logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse or load a log and write it as OCEL 2.0.
    Convert(ConvertArgs),
    /// Check a log against the structural rules.
    Validate(ValidateArgs),
    /// Print counts per class, relation counts, time span and top event types.
    Stats(StatsArgs),
    /// Encode, write, read and decode a log, then compare with the original.
    #[command(name = "roundtrip-check")]
    RoundtripCheck(RoundtripArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    DatastreamTrier,
    DatastreamTum,
    Nice,
    Cairo,
    OcelJson,
    OcelCsv,
    Custom,
}

impl InputFormat {
    fn ocel(self) -> Option<OcelFormat> {
        match self {
            InputFormat::OcelJson => Some(OcelFormat::Json),
            InputFormat::OcelCsv => Some(OcelFormat::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    OcelJson,
    OcelCsv,
}

impl From<OutputFormat> for OcelFormat {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::OcelJson => OcelFormat::Json,
            OutputFormat::OcelCsv => OcelFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportArg {
    Text,
    Structured,
}

#[derive(Args)]
struct InputArgs {
    /// Input file (an OCEL CSV bundle is a directory).
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "from", value_enum)]
    from: InputFormat,
    /// Mapping file for `--from custom`.
    #[arg(long)]
    mapping: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportArg::Text)]
    report: ReportArg,
}

#[derive(Args)]
struct ConvertArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output file, or directory for ocel-csv.
    #[arg(long)]
    output: PathBuf,
    #[arg(long = "to", value_enum)]
    to: OutputFormat,
    /// Refuse to write, and exit 2, if any error diagnostic is found.
    #[arg(long)]
    strict: bool,
    /// Exit 3 when warnings are reported.
    #[arg(long)]
    strict_warnings: bool,
    /// Pass the records through a spill-to-disk session flushing every N
    /// records. Segments go under $CORELOG_SEGMENT_DIR, else the temp dir.
    #[arg(long, value_name = "N")]
    spill_records: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Exit 3 when only warnings are reported.
    #[arg(long)]
    strict_warnings: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Count only events at or after this RFC 3339 time.
    #[arg(long)]
    since: Option<String>,
    /// Count only events at or before this RFC 3339 time.
    #[arg(long)]
    until: Option<String>,
    #[arg(long, default_value_t = 10)]
    top: usize,
}

#[derive(Args)]
struct RoundtripArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long = "to", value_enum, default_value_t = OutputFormat::OcelJson)]
    to: OutputFormat,
}

/// Fatal problem, reported as one line; exit 1 unless stated otherwise.
struct Failure {
    exit: Exit,
    message: String,
}

impl Failure {
    fn io(message: impl Into<String>) -> Self {
        Self { exit: Exit::Io, message: message.into() }
    }
}

struct Loaded {
    log: CoreLog,
    /// Parser, importer and validation findings, normalized.
    diagnostics: Vec<Diagnostic>,
    counts: BTreeMap<String, usize>,
    /// The document as read, for OCEL inputs.
    document: Option<OcelDocument>,
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))
}

fn load(args: &InputArgs) -> Result<Loaded, Failure> {
    if let Some(format) = args.from.ocel() {
        let (document, mut diagnostics) = format
            .backend()
            .read_path(&args.input)
            .map_err(|e| decode_failure(&args.input, e))?;
        let (log, more) = from_ocel(&document).map_err(|e| decode_failure(&args.input, e))?;
        diagnostics.extend(more);
        diagnostics.extend(validate(&log));
        normalize(&mut diagnostics);
        return Ok(Loaded { log, diagnostics, counts: BTreeMap::new(), document: Some(document) });
    }
    let profile = match args.from {
        InputFormat::DatastreamTrier => ParserProfile::DataStreamTrier,
        InputFormat::DatastreamTum => ParserProfile::DataStreamTum,
        InputFormat::Nice => ParserProfile::Nice,
        InputFormat::Cairo => ParserProfile::Cairo,
        InputFormat::Custom => {
            let path = args.mapping.as_ref().ok_or_else(|| Failure::io("--from custom requires --mapping"))?;
            let mapping: MappingConfig = serde_json::from_slice(&read_bytes(path)?)
                .map_err(|e| Failure::io(format!("mapping {}: {e}", path.display())))?;
            ParserProfile::Custom(mapping)
        }
        InputFormat::OcelJson | InputFormat::OcelCsv => unreachable!("handled above"),
    };
    let bytes = read_bytes(&args.input)?;
    let report = parse(&bytes, &profile).map_err(|e| Failure::io(format!("{}: {e}", args.input.display())))?;
    Ok(Loaded {
        log: report.log,
        diagnostics: report.diagnostics,
        counts: report.counts,
        document: None,
    })
}

/// Unreadable files exit 1; content the importer rejects exits 1 as well,
/// except under roundtrip-check where it counts as a mismatch.
fn decode_failure(path: &Path, e: DecodeError) -> Failure {
    Failure::io(format!("{}: {e}", path.display()))
}

fn emit_report(diagnostics: &[Diagnostic], counts: &BTreeMap<String, usize>, format: ReportArg) -> io::Result<()> {
    let mut err = io::stderr().lock();
    match format {
        ReportArg::Structured => write_report(diagnostics, ReportFormat::Structured, &mut err),
        ReportArg::Text => {
            write_report(diagnostics, ReportFormat::Text, &mut err)?;
            if !counts.is_empty() {
                let line: Vec<String> = counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
                writeln!(err, "counts {}", line.join(" "))?;
            }
            Ok(())
        }
    }
}

fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

fn has_warnings(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(|d| !d.is_error())
}

fn convert(args: &ConvertArgs) -> Result<Exit, Failure> {
    let mut loaded = load(&args.input)?;
    let target = OcelFormat::from(args.to);
    if let Some(n) = args.spill_records {
        let streamed = spill::stream_through(loaded.log, n)?;
        loaded.log = streamed.log;
        loaded.diagnostics.extend(streamed.diagnostics);
        normalize(&mut loaded.diagnostics);
        loaded.counts.insert("segments".into(), streamed.segments);
        loaded.document = None;
    }
    emit_report(&loaded.diagnostics, &loaded.counts, args.input.report).map_err(|e| Failure::io(e.to_string()))?;
    if args.strict && has_errors(&loaded.diagnostics) {
        return Ok(Exit::Errors);
    }
    // OCEL to OCEL is a pure re-serialization of the document as read.
    let document = match loaded.document {
        Some(doc) => doc,
        None => {
            let mode = if args.strict { EncodeMode::Strict } else { EncodeMode::Lenient };
            to_ocel_with(&loaded.log, mode).map_err(encode_failure)?
        }
    };
    target
        .backend()
        .write_path(&document, &args.output)
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", args.output.display())))?;
    if args.strict_warnings && has_warnings(&loaded.diagnostics) {
        return Ok(Exit::Warnings);
    }
    Ok(Exit::Ok)
}

fn encode_failure(e: EncodeError) -> Failure {
    let exit = if matches!(e, EncodeError::InvalidLog(_)) { Exit::Errors } else { Exit::Io };
    Failure { exit, message: format!("cannot encode: {e}") }
}

fn validate_cmd(args: &ValidateArgs) -> Result<Exit, Failure> {
    let loaded = load(&args.input)?;
    emit_report(&loaded.diagnostics, &BTreeMap::new(), args.input.report).map_err(|e| Failure::io(e.to_string()))?;
    Ok(if has_errors(&loaded.diagnostics) {
        Exit::Errors
    } else if args.strict_warnings && has_warnings(&loaded.diagnostics) {
        Exit::Warnings
    } else {
        Exit::Ok
    })
}

fn parse_time(raw: &Option<String>, flag: &str) -> Result<Option<Timestamp>, Failure> {
    raw.as_deref()
        .map(|s| Timestamp::parse(s).map_err(|e| Failure::io(format!("{flag}: {e}"))))
        .transpose()
}

fn stats_cmd(args: &StatsArgs) -> Result<Exit, Failure> {
    let window = match (parse_time(&args.since, "--since")?, parse_time(&args.until, "--until")?) {
        (None, None) => None,
        (from, to) => Some((from.unwrap_or(Timestamp::parse("0001-01-01T00:00:00Z").expect("valid")), to.unwrap_or(Timestamp::parse("9999-12-31T23:59:59Z").expect("valid")))),
    };
    let loaded = load(&args.input)?;
    let summary = stats::compute(&loaded.log, window, args.top);
    emit_report(&loaded.diagnostics, &BTreeMap::new(), args.input.report).map_err(|e| Failure::io(e.to_string()))?;
    let mut out = io::stdout().lock();
    let written = match args.input.report {
        ReportArg::Text => write!(out, "{summary}"),
        ReportArg::Structured => serde_json::to_writer_pretty(&mut out, &summary)
            .map_err(io::Error::from)
            .and_then(|_| writeln!(out)),
    };
    written.map_err(|e| Failure::io(e.to_string()))?;
    Ok(Exit::Ok)
}

fn roundtrip_cmd(args: &RoundtripArgs) -> Result<Exit, Failure> {
    let loaded = match load(&args.input) {
        Ok(l) => l,
        Err(f) if args.input.from.ocel().is_some() && !is_unreadable(&args.input.input) => {
            eprintln!("roundtrip mismatch: input does not decode: {}", f.message);
            return Ok(Exit::Errors);
        }
        Err(f) => return Err(f),
    };
    emit_report(&loaded.diagnostics, &loaded.counts, args.input.report).map_err(|e| Failure::io(e.to_string()))?;
    let format = OcelFormat::from(args.to);
    let expected = loaded.log.canonicalize();
    match round_trip(&loaded.log, format, EncodeMode::Lenient) {
        Ok(back) if back == expected => {
            if args.input.report == ReportArg::Text {
                eprintln!("roundtrip identical via {format}");
            }
            Ok(Exit::Ok)
        }
        Ok(back) => {
            let at = first_divergence(&expected, &back).unwrap_or_else(|| "<unknown>".into());
            eprintln!("roundtrip mismatch via {format} at {at}");
            Ok(Exit::Errors)
        }
        Err(RoundTripError::Encode(e)) => Err(encode_failure(e)),
        Err(RoundTripError::Decode(e)) => {
            eprintln!("roundtrip mismatch via {format}: re-read failed: {e}");
            Ok(Exit::Errors)
        }
    }
}

fn is_unreadable(path: &Path) -> bool {
    fs::metadata(path).is_err()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors share exit 1 with I/O; --help and --version exit 0
            return ExitCode::from(if e.use_stderr() { Exit::Io as u8 } else { Exit::Ok as u8 });
        }
    };
    let result = match &cli.command {
        Command::Convert(a) => convert(a),
        Command::Validate(a) => validate_cmd(a),
        Command::Stats(a) => stats_cmd(a),
        Command::RoundtripCheck(a) => roundtrip_cmd(a),
    };
    let exit = result.unwrap_or_else(|f| {
        eprintln!("error: {}", f.message);
        f.exit
    });
    ExitCode::from(exit as u8)
}
