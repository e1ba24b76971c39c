//! Command-line front end for the `lorenz-code` library.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lorenz_code::cipher::{self, CipherContainer, CipherKey};
use lorenz_code::cup::{self, ErrorLawReference, MectConfig};
use lorenz_code::lorenz::{write_trajectory_csv, LorenzSetup};
use lorenz_code::oneway::{hash8, BaseConfig, KeyBlock, KeyFormat};
use lorenz_code::quality::{self, TestReport};
use lorenz_code::{ErrorKind, Literal};

/// Environment variable naming a default base-parameter file.
pub const CONFIG_ENV: &str = "LORENZ_CODE_CONFIG";

#[derive(Debug, Parser)]
#[command(
    name = "lorenz-code",
    version,
    about = "Multiple-precision Lorenz integration, uncertainty experiments, and the Lorenz Code hash and stream cipher",
    long_about = "Multiple-precision Lorenz integration, uncertainty experiments, and the Lorenz Code hash and stream cipher.\n\nTimes and step sizes are nondimensional model time; precisions are significand bits. Research cipher, not for production security."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the Lorenz system with fixed-step RK4 and print `t,x,y,z` CSV.
    Integrate(IntegrateArgs),
    /// Measure the maximum effective computation time; CSV `p,h,delta,T`.
    Mect(MectArgs),
    /// Sample and fit the step-size error law; CSV `h,error,fitA,fitB,hstar`.
    FitErrorLaw(FitArgs),
    /// Extrapolate the divergence time to another precision.
    Extrapolate(ExtrapolateArgs),
    /// Hash an 8-byte key to 64 lowercase hex digits.
    Hash(HashArgs),
    /// Print keystream blocks as hex, one 32-byte block per line.
    Keystream(KeystreamArgs),
    /// Encrypt a file into an LZC1 container.
    Encrypt(CryptArgs),
    /// Decrypt an LZC1 container.
    Decrypt(CryptArgs),
    /// Run the monobit, runs, chi-square and serial-correlation tests.
    Randtest(RandtestArgs),
    /// Count digest collisions over distinct pseudorandom keys.
    Collide(CollideArgs),
    /// Measure digest changes under single-bit key flips.
    Avalanche(AvalancheArgs),
}

fn literal(s: &str) -> Result<Literal, String> {
    Literal::parse(s).map_err(|e| e.to_string())
}

/// Lorenz coefficients and initial point.
#[derive(Debug, Args)]
struct SystemArgs {
    /// σ (Prandtl number); decimal or a/b
    #[arg(long, value_parser = literal, default_value = "10")]
    sigma: Literal,
    /// γ (scaled Rayleigh number); decimal or a/b
    #[arg(long, value_parser = literal, default_value = "28")]
    gamma: Literal,
    /// β (geometric factor); decimal or a/b
    #[arg(long, value_parser = literal, default_value = "8/3")]
    beta: Literal,
    /// Initial x
    #[arg(long, value_parser = literal, default_value = "5")]
    x0: Literal,
    /// Initial y
    #[arg(long, value_parser = literal, default_value = "5")]
    y0: Literal,
    /// Initial z
    #[arg(long, value_parser = literal, default_value = "10")]
    z0: Literal,
}

impl SystemArgs {
    fn setup(&self) -> LorenzSetup {
        LorenzSetup {
            sigma: self.sigma.clone(),
            gamma: self.gamma.clone(),
            beta: self.beta.clone(),
            x0: self.x0.clone(),
            y0: self.y0.clone(),
            z0: self.z0.clone(),
        }
    }
}

#[derive(Debug, Args)]
struct IntegrateArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Precision in bits
    #[arg(long = "prec", default_value_t = 256)]
    prec: u32,
    /// Step size (nondimensional time)
    #[arg(long, value_parser = literal, default_value = "0.01")]
    h: Literal,
    /// End time (nondimensional time)
    #[arg(long, value_parser = literal, default_value = "1")]
    t: Literal,
    /// Print a row every N steps (the final state is always printed)
    #[arg(long, default_value_t = 1)]
    every: u64,
}

#[derive(Debug, Args)]
struct MectArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Precision in bits; repeat for several rows
    #[arg(long = "prec", default_values_t = [24u32, 53])]
    prec: Vec<u32>,
    /// Step size (nondimensional time)
    #[arg(long, value_parser = literal, default_value = "0.01")]
    h: Literal,
    /// Divergence threshold on |x_p - x_ref|
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Give up after this time (nondimensional time)
    #[arg(long = "t-max", default_value_t = 500.0)]
    t_max: f64,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Precision of the sampled runs in bits
    #[arg(long = "prec", default_value_t = 24)]
    prec: u32,
    /// Fixed comparison time (nondimensional time)
    #[arg(long, value_parser = literal, default_value = "5")]
    t: Literal,
    /// Step sizes to sample (nondimensional time); comma separated
    #[arg(long, value_parser = literal, value_delimiter = ',',
          default_value = "0.1,0.05,0.02,0.01,0.005,0.002,0.001,0.0005")]
    h: Vec<Literal>,
    /// Precision of the reference orbit in bits
    #[arg(long = "ref-prec", default_value_t = 256)]
    ref_prec: u32,
    /// Step of the reference orbit (default: smallest sampled h / 16)
    #[arg(long = "ref-h", value_parser = literal)]
    ref_h: Option<Literal>,
}

#[derive(Debug, Args)]
struct ExtrapolateArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Known divergence time as `bits:T`; give two, or none to measure them
    #[arg(long, value_parser = anchor, num_args = 1)]
    anchor: Vec<(u32, f64)>,
    /// Precisions in bits to measure when no anchors are given
    #[arg(long = "prec", default_values_t = [24u32, 53])]
    prec: Vec<u32>,
    /// Step size used for measured anchors (nondimensional time)
    #[arg(long, value_parser = literal, default_value = "0.01")]
    h: Literal,
    /// Divergence threshold for measured anchors
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Precision in bits to predict
    #[arg(long, default_value_t = 256)]
    target: u32,
    /// Method order m
    #[arg(long, default_value_t = 4)]
    order: u32,
}

fn anchor(s: &str) -> Result<(u32, f64), String> {
    let (p, t) = s.split_once(':').ok_or("expected bits:T, e.g. 24:17")?;
    let p = p.trim().parse().map_err(|_| format!("bad precision {p:?}"))?;
    let t = t.trim().parse().map_err(|_| format!("bad time {t:?}"))?;
    Ok((p, t))
}

/// Base parameters of the hash; flags override the config file.
#[derive(Debug, Args)]
struct BaseArgs {
    /// Base-parameter file of `name = value` lines (default: $LORENZ_CODE_CONFIG)
    #[arg(long)]
    config: Option<PathBuf>,
    /// σ; decimal or a/b
    #[arg(long, value_parser = literal)]
    sigma: Option<Literal>,
    /// γ (at least 28 after key perturbation)
    #[arg(long, value_parser = literal)]
    gamma: Option<Literal>,
    /// β; decimal or a/b
    #[arg(long, value_parser = literal)]
    beta: Option<Literal>,
    /// Initial x
    #[arg(long, value_parser = literal)]
    x0: Option<Literal>,
    /// Initial y
    #[arg(long, value_parser = literal)]
    y0: Option<Literal>,
    /// Initial z
    #[arg(long, value_parser = literal)]
    z0: Option<Literal>,
    /// Base step size (nondimensional time)
    #[arg(long, value_parser = literal)]
    h: Option<Literal>,
    /// Base integration time (nondimensional time, at least 200)
    #[arg(long, value_parser = literal)]
    t: Option<Literal>,
    /// Precision in bits (at least 256)
    #[arg(long = "prec")]
    prec: Option<u32>,
    /// Step perturbation per unit of the seventh key byte (nondimensional time)
    #[arg(long = "h-perturb-scale", value_parser = literal)]
    h_perturb_scale: Option<Literal>,
    /// Perturb h by m7/1000 like the other bytes (large steps may diverge)
    #[arg(long = "wide-h-perturb", conflicts_with = "h_perturb_scale")]
    wide_h_perturb: bool,
}

impl BaseArgs {
    fn base(&self) -> Result<BaseConfig, CliError> {
        let mut base = BaseConfig::default();
        let path = self
            .config
            .clone()
            .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
        if let Some(path) = path {
            base.apply_config(&read_text(&path)?)?;
        }
        let set = |slot: &mut Literal, v: &Option<Literal>| {
            if let Some(v) = v {
                *slot = v.clone();
            }
        };
        set(&mut base.setup.sigma, &self.sigma);
        set(&mut base.setup.gamma, &self.gamma);
        set(&mut base.setup.beta, &self.beta);
        set(&mut base.setup.x0, &self.x0);
        set(&mut base.setup.y0, &self.y0);
        set(&mut base.setup.z0, &self.z0);
        set(&mut base.h, &self.h);
        set(&mut base.t, &self.t);
        set(&mut base.h_perturb_scale, &self.h_perturb_scale);
        if self.wide_h_perturb {
            base.h_perturb_scale = Literal::parse(BaseConfig::WIDE_H_PERTURB)?;
        }
        if let Some(p) = self.prec {
            base.precision = p;
        }
        base.validate()?;
        Ok(base)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KeyFormatArg {
    Hex,
    Ascii,
}

#[derive(Debug, Args)]
struct KeyArgs {
    /// 16 hex digits or 8 ASCII characters
    #[arg(long)]
    key: String,
    /// Force how --key is read
    #[arg(long = "key-format", value_enum)]
    key_format: Option<KeyFormatArg>,
}

impl KeyArgs {
    fn key(&self) -> Result<KeyBlock, CliError> {
        let format = match self.key_format {
            None => KeyFormat::Auto,
            Some(KeyFormatArg::Hex) => KeyFormat::Hex,
            Some(KeyFormatArg::Ascii) => KeyFormat::Ascii,
        };
        Ok(KeyBlock::parse(&self.key, format)?)
    }
}

#[derive(Debug, Args)]
struct HashArgs {
    #[command(flatten)]
    key: KeyArgs,
    #[command(flatten)]
    base: BaseArgs,
}

#[derive(Debug, Args)]
struct KeystreamArgs {
    #[command(flatten)]
    key: KeyArgs,
    #[command(flatten)]
    base: BaseArgs,
    /// Number of 32-byte blocks
    #[arg(long, default_value_t = 1)]
    blocks: usize,
    /// Write raw bytes to this file instead of hex to standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CryptArgs {
    #[command(flatten)]
    key: KeyArgs,
    #[command(flatten)]
    base: BaseArgs,
    /// Input file
    #[arg(long = "in")]
    input: PathBuf,
    /// Output file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["input", "keystream_key"]))]
struct RandtestArgs {
    /// File of bytes to test
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Test the keystream of this key instead (16 hex digits or 8 ASCII characters)
    #[arg(long = "keystream-key")]
    keystream_key: Option<String>,
    /// Force how --keystream-key is read
    #[arg(long = "key-format", value_enum)]
    key_format: Option<KeyFormatArg>,
    /// Keystream bytes to generate (rounded up to whole 32-byte blocks)
    #[arg(long, default_value_t = 262_144)]
    bytes: usize,
    /// Significance level
    #[arg(long, default_value_t = quality::DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    base: BaseArgs,
}

#[derive(Debug, Args)]
struct CollideArgs {
    /// Number of distinct keys
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Seed of the key generator
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    base: BaseArgs,
}

#[derive(Debug, Args)]
struct AvalancheArgs {
    /// Number of single-bit flips (at least 100)
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Seed of the trial generator
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    base: BaseArgs,
}

#[derive(Debug)]
enum CliError {
    Core(lorenz_code::Error),
    Io { path: PathBuf, source: io::Error },
    Usage(String),
}

impl From<lorenz_code::Error> for CliError {
    fn from(e: lorenz_code::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<lorenz_code::FormatError> for CliError {
    fn from(e: lorenz_code::FormatError) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.kind() == ErrorKind::Domain => 1,
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            CliError::Core(e) if e.kind() == ErrorKind::Format => "format",
            CliError::Core(_) => "domain",
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Core(e) => {
                let mut msg = e.to_string();
                let mut src = std::error::Error::source(e);
                while let Some(s) = src {
                    let s_msg = s.to_string();
                    if !msg.contains(&s_msg) {
                        msg = format!("{msg}: {s_msg}");
                    }
                    src = s.source();
                }
                msg
            }
            CliError::Io { path, source } => format!("{}: {source}", path.display()),
            CliError::Usage(m) => m.clone(),
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source,
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code: 0 on success, 1 on a domain, validation or usage
/// error, 2 on an I/O or format error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = write!(out, "{}", e.render());
                return if e.kind() == K::DisplayHelpOnMissingArgumentOrSubcommand { 1 } else { 0 };
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(err, "error[usage]: {first}");
            return 1;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {}", e.label(), e.message().replace('\n', " "));
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Integrate(a) => {
            let spec = a.system.setup().spec(&a.h, &a.t, a.prec)?;
            let mut buf = Vec::new();
            write_trajectory_csv(&spec, a.every, &mut buf)?;
            out.write_all(&buf).map_err(stdout_err)
        }
        Command::Mect(a) => {
            let cfg = MectConfig {
                h: a.h,
                delta: a.delta,
                t_max: a.t_max,
            };
            let rows = cup::measure_mect_many(&a.system.setup(), &a.prec, &cfg);
            writeln!(out, "p,h,delta,T").map_err(stdout_err)?;
            for row in rows {
                let e = row?;
                writeln!(out, "{},{},{},{}", e.precision, cfg.h, e.delta, e.mect).map_err(stdout_err)?;
            }
            Ok(())
        }
        Command::FitErrorLaw(a) => {
            let h_min = a
                .h
                .iter()
                .min_by(|x, y| x.to_f64().total_cmp(&y.to_f64()))
                .ok_or_else(|| CliError::Usage("no step sizes given".into()))?;
            let ref_h = match a.ref_h {
                Some(h) => h,
                None => Literal::Quotient(h_min.to_string(), "16".into()),
            };
            let reference = ErrorLawReference {
                precision: a.ref_prec,
                h: ref_h,
            };
            let (samples, fit) = cup::measure_error_law(&a.system.setup(), a.prec, &a.t, &a.h, &reference)?;
            let hstar = cup::optimal_step(&fit).map_or_else(|_| "nan".to_string(), |h| h.to_string());
            writeln!(out, "h,error,fitA,fitB,hstar").map_err(stdout_err)?;
            for (h, e) in samples {
                writeln!(out, "{h},{e:e},{:e},{:e},{hstar}", fit.a, fit.b).map_err(stdout_err)?;
            }
            Ok(())
        }
        Command::Extrapolate(a) => {
            let anchors = match a.anchor.len() {
                2 => a.anchor.clone(),
                0 => {
                    if a.prec.len() != 2 {
                        return Err(CliError::Usage("give exactly two --prec values to measure".into()));
                    }
                    let cfg = MectConfig {
                        h: a.h.clone(),
                        delta: a.delta,
                        ..MectConfig::default()
                    };
                    cup::measure_mect_many(&a.system.setup(), &a.prec, &cfg)
                        .into_iter()
                        .map(|r| r.map(|e| (e.precision, e.mect)))
                        .collect::<Result<_, _>>()?
                }
                n => return Err(CliError::Usage(format!("give two --anchor values, got {n}"))),
            };
            let (model, t) = cup::extrapolate_mect(anchors[0], anchors[1], a.order, a.target)?;
            let (lo, hi) = (model.anchors[0], model.anchors[1]);
            writeln!(out, "p1,T1,p2,T2,chat,target,T").map_err(stdout_err)?;
            writeln!(out, "{},{},{},{},{:.6},{},{:.4}", lo.0, lo.1, hi.0, hi.1, model.chat, a.target, t)
                .map_err(stdout_err)
        }
        Command::Hash(a) => {
            let d = hash8(&a.base.base()?, &a.key.key()?)?;
            writeln!(out, "{d}").map_err(stdout_err)
        }
        Command::Keystream(a) => {
            let key = CipherKey::new(a.key.key()?, a.base.base()?)?;
            let bytes = cipher::keystream(&key, a.blocks)?;
            match a.out {
                Some(path) => write_bytes(&path, &bytes),
                None => bytes
                    .chunks(cipher::GROUP)
                    .try_for_each(|b| writeln!(out, "{}", hex::encode(b)))
                    .map_err(stdout_err),
            }
        }
        Command::Encrypt(a) => {
            let key = CipherKey::new(a.key.key()?, a.base.base()?)?;
            let plain = read_bytes(&a.input)?;
            write_bytes(&a.out, &cipher::encrypt(&key, &plain)?.to_bytes())
        }
        Command::Decrypt(a) => {
            let key = CipherKey::new(a.key.key()?, a.base.base()?)?;
            let container = CipherContainer::from_bytes(&read_bytes(&a.input)?)?;
            write_bytes(&a.out, &cipher::decrypt(&key, &container)?)
        }
        Command::Randtest(a) => {
            let bytes = match (&a.input, &a.keystream_key) {
                (Some(path), _) => read_bytes(path)?,
                (None, Some(k)) => {
                    let keys = KeyArgs {
                        key: k.clone(),
                        key_format: a.key_format,
                    };
                    let key = CipherKey::new(keys.key()?, a.base.base()?)?;
                    cipher::keystream(&key, a.bytes.div_ceil(cipher::GROUP))?
                }
                (None, None) => unreachable!("clap requires a source"),
            };
            let reports = quality::battery(&bytes, a.alpha)?;
            write_reports(out, &reports, a.format).map_err(stdout_err)
        }
        Command::Collide(a) => {
            let r = quality::collision_scan(&a.base.base()?, a.n, a.seed)?;
            match a.format {
                Format::Text => {
                    writeln!(out, "distinct inputs: {}", r.distinct_inputs).map_err(stdout_err)?;
                    writeln!(out, "collisions: {}", r.collisions).map_err(stdout_err)?;
                    for (x, y) in &r.pairs {
                        writeln!(out, "  {x} {y}").map_err(stdout_err)?;
                    }
                    Ok(())
                }
                Format::Csv => {
                    writeln!(out, "n,seed,distinct_inputs,collisions").map_err(stdout_err)?;
                    writeln!(out, "{},{},{},{}", a.n, a.seed, r.distinct_inputs, r.collisions).map_err(stdout_err)
                }
            }
        }
        Command::Avalanche(a) => {
            let r = quality::avalanche_scan(&a.base.base()?, a.trials, a.seed)?;
            match a.format {
                Format::Text => writeln!(
                    out,
                    "trials: {}\nmean hamming distance: {:.3} of 256 bits\nper-bit flip frequency: min {:.3}, max {:.3}",
                    r.trials,
                    r.mean_distance,
                    r.min_frequency(),
                    r.max_frequency()
                )
                .map_err(stdout_err),
                Format::Csv => {
                    writeln!(out, "bit,frequency").map_err(stdout_err)?;
                    for (i, f) in r.bit_frequency.iter().enumerate() {
                        writeln!(out, "{i},{f}").map_err(stdout_err)?;
                    }
                    Ok(())
                }
            }
        }
    }
}

fn write_reports(out: &mut dyn Write, reports: &[TestReport], format: Format) -> io::Result<()> {
    match format {
        Format::Text => {
            for r in reports {
                writeln!(
                    out,
                    "{:<20} statistic {:>14.6}  p {:.6}  {}  ({} bits, alpha {})",
                    r.test_name,
                    r.statistic,
                    r.p_value,
                    if r.pass { "PASS" } else { "FAIL" },
                    r.sample_bits,
                    r.alpha
                )?;
            }
            Ok(())
        }
        Format::Csv => {
            writeln!(out, "test,statistic,p_value,pass,sample_bits")?;
            for r in reports {
                writeln!(out, "{},{},{},{},{}", r.test_name, r.statistic, r.p_value, r.pass, r.sample_bits)?;
            }
            Ok(())
        }
    }
}
