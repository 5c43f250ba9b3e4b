use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use spectral_pq::bench::{
    run_experiment, standard_corpus, write_cb_records_csv, write_motion_csv, write_qp_map,
    write_quant_table_csv, write_report_csv, ExperimentOptions, Sequence, SWEEP_QPS,
};
use spectral_pq::frame::{load_sequence, write_sequence};
use spectral_pq::metrics::sequence_quality;
use spectral_pq::pipeline::{decode_sequence_detailed, encode_sequence, EncoderConfig, Mode};
use spectral_pq::transform::TransformSpec;
use spectral_pq::{Error, Result};

#[derive(Parser)]
#[command(name = "spq", version, about = "Spectral-PQ RGB 4:4:4 codec")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode a raw planar G, B, R sequence.
    Encode(EncodeArgs),
    /// Decode a bitstream to raw planar G, B, R.
    Decode(DecodeArgs),
    /// Per-channel PSNR and SSIM of a reconstruction.
    Metrics(MetricsArgs),
    /// Sweep modes and QPs over sequences and report rates and quality.
    Bench(BenchArgs),
    /// Print the QP table or a transform basis.
    Dump(DumpArgs),
}

#[derive(Args)]
struct Geometry {
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    #[arg(long, default_value_t = 8)]
    bitdepth: u32,
}

#[derive(Args, Clone)]
struct CodingArgs {
    #[arg(long, default_value_t = 30.0)]
    fps: f64,
    #[arg(long, default_value_t = 30)]
    gop: usize,
    #[arg(long, default_value_t = 32)]
    cu_size: usize,
    #[arg(long, default_value_t = 64)]
    ctu_size: usize,
    #[arg(long, default_value_t = 16)]
    search_range: i32,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    rdoq: bool,
}

impl CodingArgs {
    fn config(&self, qp: i32, mode: Mode) -> EncoderConfig {
        EncoderConfig {
            base_qp: qp,
            mode,
            rdoq: self.rdoq,
            gop: self.gop,
            ctu_size: self.ctu_size,
            cu_size: self.cu_size,
            search_range: self.search_range,
            fps: self.fps,
            ..EncoderConfig::default()
        }
    }
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    geometry: Geometry,
    #[command(flatten)]
    coding: CodingArgs,
    #[arg(long, default_value_t = 27)]
    qp: i32,
    #[arg(long, default_value = "spectral-pq")]
    mode: Mode,
    #[arg(long)]
    out: PathBuf,
    /// Per-CB QP derivation records.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Per-PU motion vectors.
    #[arg(long)]
    motion_csv: Option<PathBuf>,
    /// Directory for a QP heat map.
    #[arg(long)]
    dump_qp_maps: Option<PathBuf>,
    /// Also write the encoder reconstruction.
    #[arg(long)]
    recon: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Per-CU QPs as read from the stream.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    recon: PathBuf,
    #[command(flatten)]
    geometry: Geometry,
}

#[derive(Args)]
struct BenchArgs {
    /// Raw sequences; the synthetic corpus is used when none are given.
    #[arg(long)]
    input: Vec<PathBuf>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long, default_value_t = 8)]
    bitdepth: u32,
    #[command(flatten)]
    coding: CodingArgs,
    #[arg(long, value_delimiter = ',', default_values_t = SWEEP_QPS)]
    qp: Vec<i32>,
    #[arg(long, value_delimiter = ',', default_values_t = Mode::ALL)]
    mode: Vec<Mode>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    dump_qp_maps: Option<PathBuf>,
}

#[derive(Args)]
struct DumpArgs {
    /// Transform basis size; the QP table is printed when omitted.
    #[arg(long)]
    basis: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn encode(a: EncodeArgs) -> Result<()> {
    let g = &a.geometry;
    let frames = load_sequence(&a.input, g.width, g.height, g.bitdepth, None)?;
    let cfg = a.coding.config(a.qp, a.mode);
    let out = encode_sequence(&frames, &cfg)?;
    fs::write(&a.out, &out.bitstream)?;
    info!(
        "{} frames, {} bits, channel bits G/B/R {:?}",
        frames.len(),
        out.total_bits(),
        out.channel_bits()
    );
    if let Some(p) = &a.csv {
        write_cb_records_csv(&out.frames, File::create(p)?)?;
    }
    if let Some(p) = &a.motion_csv {
        write_motion_csv(
            &out.frames,
            cfg.cu_size,
            out.header.width.div_ceil(cfg.ctu_size) * cfg.ctu_size,
            File::create(p)?,
        )?;
    }
    if let Some(dir) = &a.dump_qp_maps {
        fs::create_dir_all(dir)?;
        write_qp_map(
            &dir.join(format!("qp_{}_{}.png", cfg.mode, cfg.base_qp)),
            &out,
        )?;
    }
    if let Some(p) = &a.recon {
        write_sequence(p, &out.recon)?;
    }
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<()> {
    let bytes = fs::read(&a.input)?;
    let seq = decode_sequence_detailed(&bytes)?;
    if let Some(p) = &a.csv {
        let mut w = BufWriter::new(File::create(p)?);
        writeln!(w, "frame,cu,qp_g,qp_b,qp_r")?;
        for (fi, f) in seq.frames.iter().enumerate() {
            for (cu, q) in f.qps.iter().enumerate() {
                writeln!(w, "{fi},{cu},{},{},{}", q[0], q[1], q[2])?;
            }
        }
    }
    let h = seq.header;
    write_sequence(&a.out, &seq.into_frames())?;
    info!(
        "{}x{} {}-bit, {} frames, mode {}",
        h.width, h.height, h.bit_depth, h.frame_count, h.mode
    );
    Ok(())
}

fn metrics(a: MetricsArgs) -> Result<()> {
    let g = &a.geometry;
    let src = load_sequence(&a.input, g.width, g.height, g.bitdepth, None)?;
    let rec = load_sequence(&a.recon, g.width, g.height, g.bitdepth, Some(src.len()))?;
    let q = sequence_quality(&src, &rec)?;
    println!("channel,psnr,ssim");
    for (i, name) in ["G", "B", "R"].iter().enumerate() {
        println!("{name},{:.4},{:.6}", q.psnr[i], q.ssim[i]);
    }
    println!(
        "RGB,,{:.6}{}",
        q.ssim_mean,
        if q.visually_lossless() {
            ",visually-lossless"
        } else {
            ""
        }
    );
    Ok(())
}

fn bench(a: BenchArgs) -> Result<bool> {
    let sequences = if a.input.is_empty() {
        standard_corpus(a.seed)
    } else {
        let (w, h) = match (a.width, a.height) {
            (Some(w), Some(h)) => (w, h),
            _ => {
                return Err(Error::Config(
                    "--width and --height are required with --input".into(),
                ))
            }
        };
        a.input
            .iter()
            .map(|p| {
                Ok(Sequence {
                    name: p
                        .file_stem()
                        .map_or("seq".into(), |s| s.to_string_lossy().into_owned()),
                    frames: load_sequence(p, w, h, a.bitdepth, None)?,
                })
            })
            .collect::<Result<_>>()?
    };
    if let Some(dir) = &a.dump_qp_maps {
        fs::create_dir_all(dir)?;
    }
    let opts = ExperimentOptions {
        threads: a.threads,
        qp_map_dir: a.dump_qp_maps.clone(),
        ..Default::default()
    };
    let base = a.coding.config(27, Mode::AnchorFlat);
    let rows = run_experiment(&sequences, &a.qp, &a.mode, &base, &opts)?;
    for r in rows.iter().filter(|r| !r.is_ok()) {
        error!(
            "{} {} qp {}: {}",
            r.sequence,
            r.mode,
            r.base_qp,
            r.error.as_deref().unwrap_or("")
        );
    }
    write_report_csv(&rows, output(a.csv.as_ref())?)?;
    Ok(rows.iter().all(|r| r.is_ok()))
}

fn dump(a: DumpArgs) -> Result<()> {
    let mut w = output(a.out.as_ref())?;
    match a.basis {
        None => write_quant_table_csv(w),
        Some(n) => {
            let spec = TransformSpec::dct(n)?;
            for row in spec.basis.chunks(n) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                writeln!(w, "{}", line.join(","))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Encode(a) => encode(a).map(|_| true),
        Cmd::Decode(a) => decode(a).map(|_| true),
        Cmd::Metrics(a) => metrics(a).map(|_| true),
        Cmd::Bench(a) => bench(a),
        Cmd::Dump(a) => dump(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            error!("{e}");
            ExitCode::FAILURE
        }
    }
}
