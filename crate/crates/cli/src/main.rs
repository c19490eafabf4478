//! `mpsprep`: decompose amplitude vectors into matrix product states, compile
//! them into sequential circuits, simulate the result, and benchmark corpora.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use env_logger::Env;
use mpsprep::bench::{self, BenchRecord, Corpus, Method, TargetSpec};
use mpsprep::circuit::{synthesize, Circuit, WIDE_GATE_WARNING};
use mpsprep::mps::{decompose, mean_normalized_bipartite_entropy, AmplitudeVector, MpsState};
use mpsprep::report::format_sig;
use mpsprep::{sim, Error};

const EXIT_BAD_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "mpsprep", version, about = "MPS-based quantum state preparation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose an amplitude file into a right-canonical MPS.
    Decompose(IoArgs),
    /// Compile an MPS file into a circuit.
    Synthesize(IoArgs),
    /// Run a circuit on |0...0> and write the output probabilities as CSV.
    Simulate(SimulateArgs),
    /// Truncate greedily down to a fidelity threshold and compile.
    Sweep(SweepArgs),
    /// Compare methods over a seeded corpus of targets.
    Bench(BenchArgs),
    /// Print the mean normalized bipartite entropy of an amplitude file.
    Entropy(InputArgs),
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct IoArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Circuit JSON.
    #[arg(long)]
    input: PathBuf,
    /// Amplitude file to compare against.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Probability CSV; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    /// Circuit JSON destination.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    fidelity: f64,
    /// Format of the record printed to stdout.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    qubits: usize,
    #[arg(long, value_enum)]
    corpus: CorpusArg,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.95, 0.99])]
    thresholds: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Table destination; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusArg {
    Sparse,
    Dense,
    Normal,
    Lognormal,
    Sinusoidal,
    Smooth,
}

impl From<CorpusArg> for Corpus {
    fn from(c: CorpusArg) -> Self {
        match c {
            CorpusArg::Sparse => Corpus::Sparse,
            CorpusArg::Dense => Corpus::Dense,
            CorpusArg::Normal => Corpus::Normal,
            CorpusArg::Lognormal => Corpus::Lognormal,
            CorpusArg::Sinusoidal => Corpus::Sinusoidal,
            CorpusArg::Smooth => Corpus::Smooth,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::NumericalFailure(_)
        | Error::NotIsometry { .. }
        | Error::NotCanonical { .. }
        | Error::StaleStep { .. } => EXIT_NUMERICAL,
        _ => EXIT_BAD_INPUT,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decompose(a) => cmd_decompose(&a),
        Command::Synthesize(a) => cmd_synthesize(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Entropy(a) => cmd_entropy(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn read_file(path: &Path) -> mpsprep::Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn read_amplitudes(path: &Path) -> mpsprep::Result<AmplitudeVector> {
    let v = AmplitudeVector::from_json_str(&read_file(path)?)?;
    if v.is_normalized() {
        return Ok(v);
    }
    log::warn!(
        "{}: norm is {}, normalizing",
        path.display(),
        format_sig(v.norm())
    );
    v.normalized()
}

fn write_text(path: &Path, text: &str) -> mpsprep::Result<()> {
    let f = File::create(path)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    let mut f = BufWriter::new(f);
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

fn sink(path: Option<&Path>) -> mpsprep::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            io::Error::new(e.kind(), format!("{}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| format_sig(x)).collect();
    format!("[{}]", parts.join(", "))
}

fn print_entropy(v: &AmplitudeVector) -> mpsprep::Result<()> {
    match mean_normalized_bipartite_entropy(v) {
        Ok(r) => {
            println!("entropy {}", format_sig(r.mean));
            println!("entropy_per_cut {}", fmt_list(&r.per_cut));
            Ok(())
        }
        Err(Error::Undefined(_)) => {
            println!("entropy undefined");
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn cmd_decompose(a: &IoArgs) -> mpsprep::Result<()> {
    let v = read_amplitudes(&a.input)?;
    let mps = decompose(&v, None)?;
    if let Some(out) = &a.output {
        write_text(out, &mps.to_json_string()?)?;
    }
    println!("num_qubits {}", v.num_qubits());
    println!("bond_dims {:?}", mps.bond_dims());
    print_entropy(&v)
}

fn print_circuit_summary(c: &Circuit) {
    let meta = c.metadata();
    println!("num_qubits {}", c.num_qubits());
    println!("widths {:?}", meta.widths);
    println!("histogram {}", bench::histogram_string(&meta.width_histogram));
    println!("entangling_cost {}", meta.entangling_cost);
    println!("depth_estimate {}", meta.depth_estimate);
    if let Some(&w) = meta.widths.iter().max().filter(|&&w| w >= WIDE_GATE_WARNING) {
        log::warn!("widest gate acts on {w} qubits");
    }
}

fn cmd_synthesize(a: &IoArgs) -> mpsprep::Result<()> {
    let mps = MpsState::from_json_str(&read_file(&a.input)?)?;
    let circuit = synthesize(&mps)?;
    if let Some(out) = &a.output {
        write_text(out, &circuit.to_json_string()?)?;
    }
    print_circuit_summary(&circuit);
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> mpsprep::Result<()> {
    let circuit = Circuit::from_json_str(&read_file(&a.input)?)?;
    let target = a.target.as_deref().map(read_amplitudes).transpose()?;
    let (probabilities, target_probabilities) = match &target {
        Some(t) => {
            let v = sim::verify(&circuit, t)?;
            eprintln!("fidelity {}", format_sig(v.fidelity));
            (v.probabilities, Some(v.target_probabilities))
        }
        None => (sim::run(&circuit)?.probabilities(), None),
    };
    sim::write_probabilities_csv(
        sink(a.output.as_deref())?,
        circuit.num_qubits(),
        &probabilities,
        target_probabilities.as_deref(),
    )
}

fn cmd_sweep(a: &SweepArgs) -> mpsprep::Result<()> {
    let v = read_amplitudes(&a.input)?;
    let outcome = bench::sweep_to_threshold(&v, a.fidelity)?;
    if let Some(out) = &a.output {
        write_text(out, &outcome.circuit.to_json_string()?)?;
    }
    let entropy = match mean_normalized_bipartite_entropy(&v) {
        Ok(r) => r.mean,
        Err(Error::Undefined(_)) => 0.0,
        Err(e) => return Err(e),
    };
    let record = BenchRecord::from_outcome(
        &TargetSpec::file(&a.input, v.num_qubits()),
        entropy,
        Method::Adaptive,
        a.fidelity,
        &outcome,
    );
    write_records(&[record], None, a.format, None)
}

fn write_records(
    records: &[BenchRecord],
    seed: Option<u64>,
    format: Format,
    output: Option<&Path>,
) -> mpsprep::Result<()> {
    let mut w = sink(output)?;
    match format {
        Format::Csv => bench::write_csv(records, seed, &mut w)?,
        Format::Json => bench::write_json(records, seed, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> mpsprep::Result<()> {
    if a.count == 0 {
        return Err(Error::BadInput("--count must be at least 1".into()));
    }
    if a.jobs == Some(0) {
        return Err(Error::BadInput("--jobs must be at least 1".into()));
    }
    let specs = bench::corpus(a.corpus.into(), a.qubits, a.count, a.seed);
    for spec in &specs {
        spec.validate()?;
    }
    log::info!(
        "{} targets, {} thresholds, seed {}",
        specs.len(),
        a.thresholds.len(),
        a.seed
    );
    let records = bench::compare(&specs, &a.thresholds, a.jobs)?;
    for method in Method::ALL {
        let costs: Vec<u64> = records
            .iter()
            .filter(|r| r.method == method)
            .map(|r| r.entangling_cost)
            .collect();
        let mean = costs.iter().sum::<u64>() as f64 / costs.len().max(1) as f64;
        log::info!("{}: mean entangling cost {mean:.1}", method.label());
    }
    write_records(&records, Some(a.seed), a.format, a.output.as_deref())
}

fn cmd_entropy(a: &InputArgs) -> mpsprep::Result<()> {
    let v = read_amplitudes(&a.input)?;
    println!("num_qubits {}", v.num_qubits());
    print_entropy(&v)
}
