use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lut_loopfilter::cost::{
    analytic_cost, preset_cost, published_kmacs_rounding, CostReport, CostVector, EnergyTable, KmacsRounding,
};
use lut_loopfilter::io::config::RunConfig;
use lut_loopfilter::io::dump::{lutset_from_dumps, read_dump};
use lut_loopfilter::io::lutfile::{load_lutset, read_header, save_lutset};
use lut_loopfilter::io::pgm::{read_pgm, write_pgm};
use lut_loopfilter::lut::preset;
use lut_loopfilter::pipeline::filter_with;
use lut_loopfilter::rdo::{decide, describe, psnr, RdoConfig, RdoDecision};
use lut_loopfilter::transfer::{cache_clipped_lut, Oracle};
use lut_loopfilter::{LatticeGrid, LutSet, PipelinePreset, PlaneU8, PresetName};

#[derive(Parser)]
#[command(name = "lutfilter", version, about = "LUT-based in-loop filter for 8-bit planes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cache an oracle, or assemble trainer dumps, into a LUT file.
    BuildLut(BuildLutArgs),
    /// Filter a PGM plane, optionally with CTU-level RDO against an original.
    Filter(FilterArgs),
    /// Report PSNR before/after filtering, CTU usage and the flag grid.
    Eval(EvalArgs),
    /// Print operation counts and energy per pixel and per frame.
    Cost(CostArgs),
    /// Print the header and records of a LUT file.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Identity,
    Mean,
    Affine,
}

#[derive(Args)]
struct BuildLutArgs {
    #[arg(long)]
    preset: Option<PresetName>,
    #[arg(long, value_enum, default_value = "identity", conflicts_with = "from_dump")]
    oracle: OracleKind,
    /// Affine coefficients and bias: "c0,c1,c2,c3,bias".
    #[arg(long, default_value = "1,0,0,0,0")]
    affine: String,
    #[arg(long)]
    qp: Option<i32>,
    /// key=value file with pattern and weight overrides.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trainer value dumps, one per (stage, pattern).
    #[arg(long, num_args = 1..)]
    from_dump: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RdoArgs {
    #[arg(long)]
    ctu_size: Option<usize>,
    /// Defaults to the QP schedule of the LUT set.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    flag_bits_on: Option<f64>,
    #[arg(long)]
    flag_bits_off: Option<f64>,
    /// Write the CTU flag grid (rows of 0/1) here.
    #[arg(long)]
    flags_out: Option<PathBuf>,
}

#[derive(Args)]
struct FilterArgs {
    /// LUT file, or a directory searched for the set matching --qp.
    #[arg(long)]
    luts: Option<PathBuf>,
    #[arg(long)]
    qp: Option<i32>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    original: Option<PathBuf>,
    /// Keep the filter only on CTUs where it lowers the RD cost (needs --original).
    #[arg(long)]
    rdo: bool,
    #[command(flatten)]
    rdo_args: RdoArgs,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    luts: Option<PathBuf>,
    #[arg(long)]
    qp: Option<i32>,
    /// Reconstructed (degraded) plane.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    original: Option<PathBuf>,
    #[command(flatten)]
    rdo_args: RdoArgs,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Kv,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long, default_value = "V")]
    preset: PresetName,
    #[arg(long, default_value_t = 1920)]
    width: u64,
    #[arg(long, default_value_t = 1080)]
    height: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Per-pixel vector "int8_add,int8_mul,int32_add,int32_mul".
    #[arg(long, conflicts_with = "analytic")]
    custom: Option<String>,
    /// Use the structural estimate instead of the published vector.
    #[arg(long)]
    analytic: bool,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    luts: PathBuf,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p).with_context(|| format!("reading config {}", p.display())),
        None => Ok(RunConfig::default()),
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, n: usize, what: &str) -> Result<Vec<T>> {
    let v = text
        .split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| anyhow!("{what}: cannot parse {s:?}")))
        .collect::<Result<Vec<T>>>()?;
    if v.len() != n {
        bail!("{what}: expected {n} comma-separated values, got {}", v.len());
    }
    Ok(v)
}

fn build_lut(args: BuildLutArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let name = args
        .preset
        .or(cfg.preset)
        .ok_or_else(|| anyhow!("no preset given (--preset or `preset` in the config)"))?;
    let qp = args.qp.or(cfg.qp).unwrap_or(0);
    let base = preset(name)?;
    let preset = cfg.apply_to_preset(&base)?;

    let set = if !args.from_dump.is_empty() {
        let dumps = args
            .from_dump
            .iter()
            .map(|p| read_dump(p).with_context(|| format!("reading dump {}", p.display())))
            .collect::<Result<Vec<_>>>()?;
        lutset_from_dumps(preset, qp, dumps)?
    } else {
        let oracle = match args.oracle {
            OracleKind::Identity => Oracle::Identity,
            OracleKind::Mean => Oracle::Mean,
            OracleKind::Affine => {
                let v: Vec<f64> = parse_list(&args.affine, 5, "--affine")?;
                Oracle::Affine {
                    coeffs: [v[0], v[1], v[2], v[3]],
                    bias: v[4],
                }
            }
        };
        LutSet::build(preset, qp, |stage, p| {
            cache_clipped_lut(&oracle, LatticeGrid::STANDARD, p.id(), stage, qp)
        })?
    };
    save_lutset(&args.out, &set).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {}: preset {}, qp {}, {} LUTs, {} value bytes",
        args.out.display(),
        set.preset().name(),
        qp,
        set.len(),
        set.storage_bytes()
    );
    Ok(())
}

/// Loads a LUT file, or picks the single set in a directory whose QP matches.
fn resolve_luts(path: &Path, qp: Option<i32>) -> Result<LutSet> {
    if !path.is_dir() {
        let set = load_lutset(path).with_context(|| format!("loading {}", path.display()))?;
        if let Some(qp) = qp {
            if set.qp() != qp {
                bail!("{} holds LUTs for QP {}, not {qp}", path.display(), set.qp());
            }
        }
        return Ok(set);
    }
    let qp = qp.ok_or_else(|| anyhow!("--qp is required when --luts is a directory"))?;
    let mut entries: Vec<PathBuf> = fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "lut"))
        .collect();
    entries.sort();
    let matches: Vec<PathBuf> = entries
        .into_iter()
        .filter(|p| read_header(p).is_ok_and(|h| h.qp == qp))
        .collect();
    match matches.as_slice() {
        [one] => Ok(load_lutset(one).with_context(|| format!("loading {}", one.display()))?),
        [] => bail!("no LUT file for QP {qp} in {}", path.display()),
        many => bail!("{} LUT files for QP {qp} in {}", many.len(), path.display()),
    }
}

fn required<'a>(flag: Option<&'a Path>, cfg: Option<&'a Path>, name: &str) -> Result<&'a Path> {
    flag.or(cfg)
        .ok_or_else(|| anyhow!("missing --{name} (or `{name}` in the config)"))
}

fn rdo_config(args: &RdoArgs, cfg: &RunConfig, qp: i32) -> Result<RdoConfig> {
    let base = cfg.rdo(Some(qp));
    let rdo = RdoConfig {
        ctu_size: args.ctu_size.unwrap_or(base.ctu_size),
        lambda: args.lambda.unwrap_or(base.lambda),
        flag_bits_on: args.flag_bits_on.unwrap_or(base.flag_bits_on),
        flag_bits_off: args.flag_bits_off.unwrap_or(base.flag_bits_off),
    };
    rdo.validate()?;
    Ok(rdo)
}

/// The set to filter with; config pattern or weight overrides must agree with it.
fn checked_set(set: LutSet, cfg: &RunConfig) -> Result<LutSet> {
    let wanted = cfg.apply_to_preset(set.preset())?;
    if &wanted == set.preset() {
        return Ok(set);
    }
    let luts = set.luts().cloned().collect();
    Ok(LutSet::new(wanted, set.qp(), luts)?)
}

fn write_flags(path: Option<&Path>, decision: &RdoDecision) -> Result<()> {
    if let Some(p) = path {
        fs::write(p, decision.flags.to_text_grid()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn load_plane(path: &Path) -> Result<PlaneU8> {
    read_pgm(path).with_context(|| format!("reading {}", path.display()))
}

fn filter(args: FilterArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let luts_path = required(args.luts.as_deref(), cfg.luts.as_deref(), "luts")?;
    let set = checked_set(resolve_luts(luts_path, args.qp.or(cfg.qp))?, &cfg)?;
    let input = load_plane(required(args.input.as_deref(), cfg.input.as_deref(), "input")?)?;
    let output_path = required(args.output.as_deref(), cfg.output.as_deref(), "output")?;

    let filtered = filter_with(&input, &set)?;
    let result = if args.rdo {
        let original = load_plane(required(args.original.as_deref(), cfg.original.as_deref(), "original")?)?;
        let rdo = rdo_config(&args.rdo_args, &cfg, set.qp())?;
        let decision = decide(&input, &filtered, &original, &rdo)?;
        write_flags(args.rdo_args.flags_out.as_deref(), &decision)?;
        println!("{}", describe(&decision.stats));
        decision.output
    } else {
        if args.rdo_args.flags_out.is_some() {
            bail!("--flags-out needs --rdo");
        }
        filtered
    };
    write_pgm(output_path, &result).with_context(|| format!("writing {}", output_path.display()))?;
    Ok(())
}

fn fmt_psnr(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.4}")
    }
}

fn eval(args: EvalArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let luts_path = required(args.luts.as_deref(), cfg.luts.as_deref(), "luts")?;
    let set = checked_set(resolve_luts(luts_path, args.qp.or(cfg.qp))?, &cfg)?;
    let recon = load_plane(required(args.input.as_deref(), cfg.input.as_deref(), "input")?)?;
    let original = load_plane(required(args.original.as_deref(), cfg.original.as_deref(), "original")?)?;
    let rdo = rdo_config(&args.rdo_args, &cfg, set.qp())?;

    let filtered = filter_with(&recon, &set)?;
    let decision = decide(&recon, &filtered, &original, &rdo)?;
    write_flags(args.rdo_args.flags_out.as_deref(), &decision)?;

    println!("preset {} qp {} ctu {} lambda {}", set.preset().name(), set.qp(), rdo.ctu_size, rdo.lambda);
    println!("psnr_unfiltered {}", fmt_psnr(psnr(&recon, &original)?));
    println!("psnr_filtered   {}", fmt_psnr(psnr(&filtered, &original)?));
    println!("psnr_rdo        {}", fmt_psnr(psnr(&decision.output, &original)?));
    println!(
        "usage {}/{} ratio {:.4}",
        decision.stats.n_test,
        decision.stats.n_total,
        decision.stats.ratio()
    );
    print!("{}", decision.flags.to_text_grid());
    Ok(())
}

fn cost(args: CostArgs) -> Result<()> {
    let (label, cv, rounding) = if let Some(text) = &args.custom {
        let v: Vec<u64> = parse_list(text, 4, "--custom")?;
        ("custom".to_string(), CostVector::new(v[0], v[1], v[2], v[3]), KmacsRounding::Nearest)
    } else if args.analytic {
        let p: PipelinePreset = preset(args.preset)?;
        (
            format!("{} (analytic estimate)", args.preset),
            analytic_cost(&p),
            KmacsRounding::Nearest,
        )
    } else {
        let cv = preset_cost(args.preset).with_context(|| "use --custom or --analytic for this preset")?;
        (args.preset.to_string(), cv, published_kmacs_rounding(args.preset))
    };
    let report = CostReport::new(label, cv, args.width, args.height, rounding, &EnergyTable::default())?;
    match args.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Kv => print!("{}", report.to_key_values()),
    }
    Ok(())
}

fn inspect(args: InspectArgs) -> Result<()> {
    let h = read_header(&args.luts).with_context(|| format!("reading {}", args.luts.display()))?;
    println!("format version {}", h.version);
    println!("preset {}", h.preset);
    println!("qp {}", h.qp);
    println!("luts {}", h.lut_count);
    println!("checksum {:08x}", h.checksum);
    for r in &h.records {
        let offsets: Vec<String> = r
            .pattern
            .offsets()
            .iter()
            .map(|o| format!("({},{})", o.dy, o.dx))
            .collect();
        println!(
            "stage {} pattern {} weight {} offsets {}",
            r.stage,
            r.pattern.id(),
            r.weight,
            offsets.join(" ")
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::BuildLut(a) => build_lut(a),
        Command::Filter(a) => filter(a),
        Command::Eval(a) => eval(a),
        Command::Cost(a) => cost(a),
        Command::Inspect(a) => inspect(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lutfilter: {e:#}");
            ExitCode::FAILURE
        }
    }
}
