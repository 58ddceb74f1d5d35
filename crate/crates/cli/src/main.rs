//! `gbtc`: encode and decode PGM images, run the GMRF experiment, and
//! produce RD and metric tables as CSV.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input or flags.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use pathgbt::codec::{decode_image, encode_image, CodecConfig, TransformSet};
use pathgbt::eval::{self, rd, textures, GmrfModel, PseExperiment, RunDirection};
use pathgbt::image::Plane;
use pathgbt::learning;
use pathgbt::transforms;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Codec(#[from] pathgbt::Error),
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Codec(_) | CliError::Invalid(_) => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(io_err(path))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(io_err(path))
}

fn read_pgm(path: &Path) -> CliResult<Plane> {
    Plane::parse_pgm(&read_file(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn write_pgm(path: &Path, image: &Plane) -> CliResult<()> {
    let mut buf = Vec::new();
    image.write_pgm(&mut buf).map_err(io_err(path))?;
    write_file(path, &buf)
}

/// Writes to `out`, or standard output when absent.
fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, text.as_bytes()),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(io_err(Path::new("<stdout>"))),
    }
}

fn parse_transforms(s: &str) -> Result<TransformSet, String> {
    TransformSet::parse(s).ok_or_else(|| format!("expected dct, dct+gbt or dct+dst, got {s:?}"))
}

fn parse_block_size(s: &str) -> Result<usize, String> {
    match s.parse() {
        Ok(n @ (4 | 8 | 16 | 32)) => Ok(n),
        _ => Err(format!("expected 4, 8, 16 or 32, got {s:?}")),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gbtc",
    version,
    about = "Intra image codec with online-learned path graph transforms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CodecArgs {
    /// Quantization parameter.
    #[arg(long, default_value_t = 27, value_parser = clap::value_parser!(u8).range(0..=51))]
    qp: u8,
    /// Block size (4, 8, 16 or 32).
    #[arg(long, default_value_t = 16, value_parser = parse_block_size)]
    block_size: usize,
    /// Number of template clusters.
    #[arg(long, default_value_t = learning::DEFAULT_CLUSTERS, value_parser = clap::value_parser!(u8).range(1..=255).map(usize::from))]
    clusters: usize,
    /// Centroid learning rate in (0, 1].
    #[arg(long, default_value_t = learning::DEFAULT_RHO)]
    rho: f64,
    /// Edge-weight regularizer, positive.
    #[arg(long, default_value_t = transforms::DEFAULT_ALPHA)]
    alpha: f64,
    /// Blocks a cluster must absorb before its GBT is offered.
    #[arg(long, default_value_t = learning::DEFAULT_M_MIN, value_parser = clap::value_parser!(u8).map(usize::from))]
    m_min: usize,
    /// Transform set: dct, dct+gbt or dct+dst.
    #[arg(long, default_value = "dct+gbt", value_parser = parse_transforms)]
    transforms: TransformSet,
}

impl CodecArgs {
    fn config(&self, image: &Plane) -> CliResult<CodecConfig> {
        let cfg = CodecConfig {
            n: self.block_size,
            qp: self.qp,
            k: self.clusters,
            rho: self.rho,
            alpha: self.alpha,
            m_min: self.m_min,
            transforms: self.transforms,
            ..CodecConfig::for_image(image)
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    /// Unit-weight 8-point path.
    Uniform,
    /// 8-point path with weights 0.1, 0.25, ..., 1.0.
    Nonuniform,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Direction {
    Horizontal,
    Vertical,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode a binary PGM (P5, maxval 255) into a bitstream.
    ///
    /// Prints one CSV line `rate_bpp,psnr,usage_percent`, where PSNR is that
    /// of the encoder reconstruction and usage is the share of candidate
    /// blocks coded with the alternative transform.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        /// Also write the encoder's final cluster-state dump here.
        #[arg(long)]
        dump_state: Option<PathBuf>,
    },
    /// Decode a bitstream into a PGM.
    Decode {
        input: PathBuf,
        output: PathBuf,
        /// Write the decoder's final cluster-state dump here.
        #[arg(long)]
        dump_state: Option<PathBuf>,
    },
    /// Average power spectral entropy of DCT, learned GBT and KLT on
    /// samples of an 8-point path GMRF.
    ///
    /// CSV columns: training_size,dct,gbt,klt (one row per size).
    PseExperiment {
        #[arg(long, value_enum, default_value = "uniform")]
        model: Model,
        /// Training set sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = PseExperiment::default().training_sizes)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Held-out test samples per trial.
        #[arg(long, default_value_t = 1000)]
        n_test: usize,
        #[arg(long, default_value_t = transforms::DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, env = "GBTC_SEED", default_value_t = 0)]
        seed: u64,
        /// Output CSV path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quality and texture metrics of a test image against a reference.
    ///
    /// CSV columns: psnr,ssim,glnu_reference,glnu_test.
    Metrics {
        reference: PathBuf,
        test: PathBuf,
        /// Gray levels for the run-length matrix.
        #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u16).range(1..=256).map(usize::from))]
        levels: usize,
        #[arg(long, value_enum, default_value = "horizontal")]
        direction: Direction,
    },
    /// Per-image and mean BD-rate (percent) of a test RD table against an
    /// anchor. Both inputs use the rd-sweep CSV schema.
    ///
    /// CSV columns: image,bd_rate_percent; the last row is `mean`.
    BdRate { anchor: PathBuf, test: PathBuf },
    /// Encode every PGM in a directory at each QP.
    ///
    /// CSV columns: image,qp,rate_bpp,psnr,ssim, sorted by image then qp.
    RdSweep {
        input_dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = rd::DEFAULT_QPS.to_vec(), value_parser = clap::value_parser!(u8).range(0..=51))]
        qps: Vec<u8>,
        #[command(flatten)]
        codec: CodecArgs,
        /// Output CSV path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the 10-image synthetic texture suite as PGM files.
    Textures {
        output_dir: PathBuf,
        #[arg(long, default_value_t = 320)]
        size: usize,
        #[arg(long, env = "GBTC_SEED", default_value_t = 0)]
        seed: u64,
    },
}

fn cmd_encode(input: &Path, output: &Path, codec: &CodecArgs, dump: Option<&Path>) -> CliResult<()> {
    let image = read_pgm(input)?;
    let cfg = codec.config(&image)?;
    let enc = encode_image(&image, &cfg)?;
    write_file(output, &enc.bytes)?;
    if let Some(path) = dump {
        let text = enc.bank.as_ref().map(|b| b.dump()).unwrap_or_default();
        write_file(path, text.as_bytes())?;
    }
    let psnr = eval::psnr(&image, &enc.recon)?;
    println!(
        "{},{},{}",
        enc.bits_per_pixel(),
        psnr,
        enc.stats.usage_percent(cfg.transforms)
    );
    Ok(())
}

fn cmd_decode(input: &Path, output: &Path, dump: Option<&Path>) -> CliResult<()> {
    let dec = decode_image(&read_file(input)?)?;
    write_pgm(output, &dec.image)?;
    if let Some(path) = dump {
        let text = dec.bank.as_ref().map(|b| b.dump()).unwrap_or_default();
        write_file(path, text.as_bytes())?;
    }
    Ok(())
}

fn cmd_metrics(reference: &Path, test: &Path, levels: usize, direction: Direction) -> CliResult<()> {
    let (a, b) = (read_pgm(reference)?, read_pgm(test)?);
    let dir = match direction {
        Direction::Horizontal => RunDirection::Horizontal,
        Direction::Vertical => RunDirection::Vertical,
    };
    println!("psnr,ssim,glnu_reference,glnu_test");
    println!(
        "{},{},{},{}",
        eval::psnr(&a, &b)?,
        eval::ssim(&a, &b)?,
        eval::glnu(&a, levels, dir)?,
        eval::glnu(&b, levels, dir)?
    );
    Ok(())
}

fn read_rd_table(path: &Path) -> CliResult<Vec<rd::RdRow>> {
    let text =
        String::from_utf8(read_file(path)?).map_err(|_| CliError::Invalid(format!("{}: not UTF-8", path.display())))?;
    rd::parse_rd_csv(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn cmd_bd_rate(anchor: &Path, test: &Path) -> CliResult<()> {
    let (per_image, mean) = eval::bd_rate_table(&read_rd_table(anchor)?, &read_rd_table(test)?)?;
    println!("image,bd_rate_percent");
    for (name, v) in per_image {
        println!("{name},{v}");
    }
    println!("mean,{mean}");
    Ok(())
}

fn pgm_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::Invalid(format!("{}: no .pgm files", dir.display())));
    }
    Ok(files)
}

fn cmd_rd_sweep(dir: &Path, qps: &[u8], codec: &CodecArgs, out: Option<&Path>) -> CliResult<()> {
    let images = pgm_files(dir)?
        .into_iter()
        .map(|path| {
            let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            Ok((name, read_pgm(&path)?))
        })
        .collect::<CliResult<Vec<(String, Plane)>>>()?;
    let jobs: Vec<(usize, u8)> = (0..images.len())
        .flat_map(|i| qps.iter().map(move |&qp| (i, qp)))
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(i, qp)| {
            let (name, image) = &images[i];
            let cfg = CodecConfig {
                qp,
                ..codec.config(image)?
            };
            let (point, _) = rd::rd_point(image, &cfg)?;
            Ok(rd::RdRow {
                image: name.clone(),
                qp,
                point,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    rd::sort_rows(&mut rows);
    let mut buf = Vec::new();
    rd::write_rd_csv(&rows, &mut buf).expect("writing to memory");
    emit(out, &String::from_utf8(buf).expect("CSV is UTF-8"))
}

fn cmd_pse(model: Model, exp: &PseExperiment, out: Option<&Path>) -> CliResult<()> {
    let model = match model {
        Model::Uniform => GmrfModel::uniform(8)?,
        Model::Nonuniform => GmrfModel::nonuniform()?,
    };
    let results = eval::run_pse_experiment(&model, exp)?;
    let mut buf = Vec::new();
    eval::write_pse_csv(&results, &mut buf).expect("writing to memory");
    emit(out, &String::from_utf8(buf).expect("CSV is UTF-8"))
}

fn cmd_textures(dir: &Path, size: usize, seed: u64) -> CliResult<()> {
    if size == 0 || size > usize::from(u16::MAX) {
        return Err(CliError::Invalid(format!("size {size} outside 1..=65535")));
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (name, image) in textures::render_suite(size, seed) {
        write_pgm(&dir.join(format!("{name}.pgm")), &image)?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Encode {
            input,
            output,
            codec,
            dump_state,
        } => cmd_encode(&input, &output, &codec, dump_state.as_deref()),
        Command::Decode {
            input,
            output,
            dump_state,
        } => cmd_decode(&input, &output, dump_state.as_deref()),
        Command::PseExperiment {
            model,
            sizes,
            trials,
            n_test,
            alpha,
            seed,
            out,
        } => {
            let exp = PseExperiment {
                training_sizes: sizes,
                n_test,
                trials,
                alpha,
                seed,
            };
            cmd_pse(model, &exp, out.as_deref())
        }
        Command::Metrics {
            reference,
            test,
            levels,
            direction,
        } => cmd_metrics(&reference, &test, levels, direction),
        Command::BdRate { anchor, test } => cmd_bd_rate(&anchor, &test),
        Command::RdSweep {
            input_dir,
            qps,
            codec,
            out,
        } => cmd_rd_sweep(&input_dir, &qps, &codec, out.as_deref()),
        Command::Textures { output_dir, size, seed } => cmd_textures(&output_dir, size, seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gbtc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
