use std::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use descrack::archsim::{self, HardwareModel, CALIBRATED_CYCLES_PER_BLOCK};
use descrack::des::{self, Block, Key56, Key64};
use descrack::engines::{self, EngineKind};
use descrack::keysearch::{self, KeyRange, PlainCipherPair, SearchConfig, StopMode};

type CmdResult = Result<ExitCode, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "descrack", version, about = "DES known-plaintext key search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt one 64-bit block.
    Encrypt(BlockArgs),
    /// Decrypt one 64-bit block.
    Decrypt(BlockArgs),
    /// Search a key range for keys consistent with known pairs.
    Crack(CrackArgs),
    /// Measure engine throughput on pseudorandom inputs.
    Bench(BenchArgs),
    /// Estimate search time on modelled hardware.
    Estimate(EstimateArgs),
}

#[derive(Args)]
struct BlockArgs {
    /// Block as 16 hex digits.
    #[arg(value_parser = parse_block)]
    block: Block,
    /// Key as 14 hex digits (56-bit) or 16 hex digits (with parity bits).
    #[arg(long, value_parser = parse_key)]
    key: Key56,
}

#[derive(Args)]
struct CrackArgs {
    /// File with one `<plaintext> <ciphertext>` pair per line.
    #[arg(required_unless_present = "pair", conflicts_with = "pair")]
    pairs_file: Option<PathBuf>,
    /// Inline pair as `<plaintext>:<ciphertext>`; repeatable.
    #[arg(long, value_parser = parse_pair)]
    pair: Vec<PlainCipherPair>,
    /// First key of the range, 14 hex digits.
    #[arg(long, value_parser = parse_key56, default_value = "00000000000000")]
    start: Key56,
    /// End of the range (exclusive), 14 hex digits; defaults to the end of the keyspace.
    #[arg(long, value_parser = parse_key56)]
    end: Option<Key56>,
    /// Required when --end is omitted.
    #[arg(long)]
    yes_full_keyspace: bool,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=4096))]
    workers: u32,
    #[arg(long, value_parser = parse_engine, default_value = "bitsliced")]
    engine: EngineKind,
    #[arg(long, value_enum, default_value = "all")]
    stop: Stop,
    /// Checkpoint file; resumed from when it exists.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Seconds between progress lines; 0 disables them.
    #[arg(long, default_value_t = keysearch::DEFAULT_PROGRESS_INTERVAL, value_parser = parse_non_negative)]
    progress_interval: f64,
    /// Seconds between checkpoint saves.
    #[arg(long, default_value_t = keysearch::DEFAULT_CHECKPOINT_INTERVAL, value_parser = parse_positive)]
    checkpoint_interval: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stop {
    First,
    All,
}

#[derive(Args)]
struct BenchArgs {
    /// rolled, unrolled, bitsliced or all.
    #[arg(long, default_value = "all", value_parser = parse_engine_set)]
    engine: EngineSet,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    seconds: f64,
}

#[derive(Clone)]
struct EngineSet(Vec<EngineKind>);

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    fpgas: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    instances: u32,
    #[arg(long, value_parser = parse_positive)]
    freq_mhz: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    cycles_per_key: u32,
    #[arg(long, default_value_t = CALIBRATED_CYCLES_PER_BLOCK, value_parser = clap::value_parser!(u32).range(1..))]
    cycles_per_block: u32,
    #[arg(long, default_value_t = 56, value_parser = clap::value_parser!(u32).range(1..=128))]
    keyspace_bits: u32,
    /// Fraction of the keyspace searched; 0.5 is the average case.
    #[arg(long, default_value_t = 0.5, value_parser = parse_fraction)]
    fraction: f64,
}

fn parse_block(s: &str) -> Result<Block, String> {
    Block::from_hex(s).map_err(|e| e.to_string())
}

fn parse_key56(s: &str) -> Result<Key56, String> {
    Key56::from_hex(s).map_err(|e| e.to_string())
}

fn parse_key(s: &str) -> Result<Key56, String> {
    match s.len() {
        14 => parse_key56(s),
        16 => Key64::from_hex(s)
            .map(Key64::to_key56)
            .map_err(|e| e.to_string()),
        n => Err(format!("expected 14 or 16 hex digits, found {n}")),
    }
}

fn parse_pair(s: &str) -> Result<PlainCipherPair, String> {
    let (p, c) = s
        .split_once(':')
        .ok_or("expected <plaintext>:<ciphertext>")?;
    Ok(PlainCipherPair::new(parse_block(p)?, parse_block(c)?))
}

fn parse_engine(s: &str) -> Result<EngineKind, String> {
    s.parse().map_err(|e: engines::EngineError| e.to_string())
}

fn parse_engine_set(s: &str) -> Result<EngineSet, String> {
    if s.eq_ignore_ascii_case("all") {
        Ok(EngineSet(EngineKind::ALL.to_vec()))
    } else {
        parse_engine(s).map(|k| EngineSet(vec![k]))
    }
}

fn parse_float(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: {s}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    parse_float(s).and_then(|v| {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(format!("must be positive, got {v}"))
        }
    })
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    parse_float(s).and_then(|v| {
        if v >= 0.0 {
            Ok(v)
        } else {
            Err(format!("must not be negative, got {v}"))
        }
    })
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    parse_float(s).and_then(|v| {
        if v > 0.0 && v <= 1.0 {
            Ok(v)
        } else {
            Err(format!("must lie in (0, 1], got {v}"))
        }
    })
}

fn cmd_encrypt(args: BlockArgs) -> CmdResult {
    println!("{}", des::encrypt_block(args.block, args.key));
    Ok(ExitCode::SUCCESS)
}

fn cmd_decrypt(args: BlockArgs) -> CmdResult {
    println!("{}", des::decrypt_block(args.block, args.key));
    Ok(ExitCode::SUCCESS)
}

fn cmd_crack(args: CrackArgs) -> CmdResult {
    let pairs = match &args.pairs_file {
        Some(path) => keysearch::load_pairs(path)?,
        None => args.pair,
    };
    let end = match args.end {
        Some(end) => end.value(),
        None if args.yes_full_keyspace => Key56::SPACE,
        None => {
            return Err(
                "no --end given; pass --yes-full-keyspace to search to the end of the keyspace"
                    .into(),
            )
        }
    };
    let mut config = SearchConfig::new(pairs, KeyRange::new(args.start.value(), end)?);
    config.workers = args.workers as usize;
    config.engine = args.engine;
    config.stop_mode = match args.stop {
        Stop::First => StopMode::FirstMatch,
        Stop::All => StopMode::Exhaustive,
    };
    config.checkpoint_path = args.checkpoint;
    config.progress_interval = args.progress_interval;
    config.checkpoint_interval = args.checkpoint_interval;

    let report = keysearch::crack_with(&config, &keysearch::CancelToken::new(), |p| {
        eprintln!("{p}")
    })?;
    if report.matches.is_empty() {
        println!("no match");
    }
    for key in &report.matches {
        println!("match {key}");
    }
    println!("keys_tested {}", report.keys_tested);
    println!("elapsed {:.3}", report.elapsed);
    println!("rate {:.0}", report.keys_per_second);
    Ok(if report.matches.is_empty() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_bench(args: BenchArgs) -> CmdResult {
    println!(
        "{:<10} {:>12} {:>8} {:>14} {:>16}",
        "engine", "blocks", "seconds", "keys/s", "bits/s"
    );
    for kind in args.engine.0 {
        let s = engines::bench(kind, args.seconds)?;
        println!(
            "{:<10} {:>12} {:>8.3} {:>14.0} {:>16.0}",
            s.engine.name(),
            s.blocks_processed,
            s.elapsed,
            s.keys_per_second,
            s.throughput_bits_per_second
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_estimate(args: EstimateArgs) -> CmdResult {
    let model = HardwareModel {
        fpga_count: args.fpgas,
        instances_per_fpga: args.instances,
        clock_hz: args.freq_mhz * 1e6,
        cycles_per_key: args.cycles_per_key,
        cycles_per_block: args.cycles_per_block,
        keyspace_bits: args.keyspace_bits,
    };
    let est = archsim::expected_search_time(&model, args.fraction)?;
    println!("keys_per_second    {:.6e}", est.keys_per_second);
    println!("worst_case_seconds {:.6e}", est.worst_case_seconds);
    println!("worst_case_days    {:.3}", est.worst_case_days());
    println!("expected_seconds   {:.6e}", est.expected_seconds);
    println!("expected_days      {:.3}", est.expected_days);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Encrypt(args) => cmd_encrypt(args),
        Command::Decrypt(args) => cmd_decrypt(args),
        Command::Crack(args) => cmd_crack(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Estimate(args) => cmd_estimate(args),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
