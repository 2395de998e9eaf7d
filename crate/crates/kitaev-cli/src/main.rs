//! Command-line front end for the honeycomb-model solver.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use config::{parse_config_echo, parse_lattice, FlipSpec, Format, GaugeChoice, Mode, ScanConfig};

#[derive(Parser)]
#[command(
    name = "kitaev",
    about = "Exact solver for the Kitaev honeycomb model: vortex-sector spectra, phase diagrams, \
             gap surfaces, spin-basis diagonalization, and the six-spin interference protocol",
    version
)]
struct Cli {
    /// Load the full scan configuration from a JSON file instead of flags.
    /// A previous output of this tool also works: its embedded config echo
    /// reproduces the run.
    #[arg(long, value_name = "PATH", global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Lattice size as n1xn2 (unit cells).
    #[arg(long, value_name = "N1xN2")]
    lattice: Option<String>,
    /// Brillouin-zone quadrature points per axis.
    #[arg(long, value_name = "M")]
    quad: Option<usize>,
    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Scan-level worker threads (0 = automatic). Results never depend on it.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Output format (where a choice exists).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug, Default)]
struct CouplingArgs {
    #[arg(long)]
    jx: Option<f64>,
    #[arg(long)]
    jy: Option<f64>,
    #[arg(long)]
    jz: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Gaps, densities and gapless predicates over the simplex jx+jy+jz = 1.
    PhaseDiagram {
        /// Points per simplex axis.
        #[arg(long, value_name = "R")]
        simplex_res: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Anyon-pair and fermion gap surfaces over (jx, jy) at fixed jz.
    GapSurface {
        /// Grid points per coupling axis.
        #[arg(long, value_name = "R")]
        grid_res: Option<usize>,
        /// Add exact-diagonalization gap and sector columns.
        #[arg(long)]
        ed: bool,
        #[command(flatten)]
        couplings: CouplingArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Exact single-particle spectrum of one gauge sector.
    SectorSpectrum {
        /// Base gauge configuration.
        #[arg(long, value_enum)]
        gauge: Option<GaugeChoice>,
        /// Link flips applied on top, e.g. --flip z:1,2 (repeatable).
        #[arg(long = "flip", value_name = "KIND:X,Y")]
        flips: Vec<FlipSpec>,
        #[command(flatten)]
        couplings: CouplingArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// First-excitation gap of the spin Hamiltonian over (jx, jy).
    EdGap {
        /// Grid points per coupling axis.
        #[arg(long, value_name = "R")]
        grid_res: Option<usize>,
        #[command(flatten)]
        couplings: CouplingArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Energy of one adjacent vortex pair versus the density estimate.
    TwoVortex {
        #[command(flatten)]
        couplings: CouplingArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// The six-spin loop-and-rotate protocol.
    Interference {
        #[command(flatten)]
        couplings: CouplingArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn apply_common(cfg: &mut ScanConfig, common: &CommonArgs) -> anyhow::Result<()> {
    if let Some(lattice) = &common.lattice {
        cfg.lattice = parse_lattice(lattice)?;
    }
    if let Some(quad) = common.quad {
        cfg.quad = quad;
    }
    if let Some(threads) = common.threads {
        cfg.threads = threads;
    }
    if let Some(format) = common.format {
        cfg.format = format;
    }
    cfg.out = common.out.clone();
    Ok(())
}

fn apply_couplings(cfg: &mut ScanConfig, couplings: &CouplingArgs) {
    if let Some(jx) = couplings.jx {
        cfg.jx = jx;
    }
    if let Some(jy) = couplings.jy {
        cfg.jy = jy;
    }
    if let Some(jz) = couplings.jz {
        cfg.jz = jz;
    }
}

fn resolve(cli: &Cli) -> anyhow::Result<ScanConfig> {
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ScanConfig = match serde_json::from_str(&text) {
            Ok(cfg) => cfg,
            Err(_) => parse_config_echo(&text)
                .with_context(|| format!("parsing config {}", path.display()))?,
        };
        return Ok(cfg);
    }
    let Some(command) = &cli.command else {
        anyhow::bail!("either a subcommand or --config is required (see --help)");
    };
    Ok(match command {
        Command::PhaseDiagram { simplex_res, common } => {
            let mut cfg = ScanConfig::new(Mode::PhaseDiagram);
            if let Some(res) = simplex_res {
                cfg.simplex_res = *res;
            }
            apply_common(&mut cfg, common)?;
            cfg
        }
        Command::GapSurface { grid_res, ed, couplings, common } => {
            let mut cfg = ScanConfig::new(Mode::GapSurface);
            cfg.grid_res = grid_res.unwrap_or(if *ed { 9 } else { 33 });
            cfg.ed = *ed;
            apply_couplings(&mut cfg, couplings);
            apply_common(&mut cfg, common)?;
            cfg
        }
        Command::SectorSpectrum { gauge, flips, couplings, common } => {
            let mut cfg = ScanConfig::new(Mode::SectorSpectrum);
            cfg.format = Format::Json;
            if let Some(g) = gauge {
                cfg.gauge = *g;
            }
            cfg.flips = flips.clone();
            cfg.jx = 1.0;
            cfg.jy = 1.0;
            apply_couplings(&mut cfg, couplings);
            apply_common(&mut cfg, common)?;
            cfg
        }
        Command::EdGap { grid_res, couplings, common } => {
            let mut cfg = ScanConfig::new(Mode::EdGap);
            if let Some(res) = grid_res {
                cfg.grid_res = *res;
            }
            apply_couplings(&mut cfg, couplings);
            apply_common(&mut cfg, common)?;
            cfg
        }
        Command::TwoVortex { couplings, common } => {
            let mut cfg = ScanConfig::new(Mode::TwoVortex);
            cfg.format = Format::Json;
            cfg.lattice = [8, 8];
            cfg.quad = 256;
            cfg.jx = 0.05;
            cfg.jy = 0.05;
            apply_couplings(&mut cfg, couplings);
            apply_common(&mut cfg, common)?;
            cfg
        }
        Command::Interference { couplings, common } => {
            let mut cfg = ScanConfig::new(Mode::Interference);
            cfg.format = Format::Json;
            cfg.jx = 1.0;
            cfg.jy = 1.0;
            apply_couplings(&mut cfg, couplings);
            apply_common(&mut cfg, common)?;
            cfg
        }
    })
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let cfg = resolve(&cli)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cfg.mode {
        Mode::PhaseDiagram => commands::cmd_phase_diagram(&cfg),
        Mode::GapSurface => commands::cmd_gap_surface(&cfg),
        Mode::SectorSpectrum => commands::cmd_sector_spectrum(&cfg),
        Mode::EdGap => commands::cmd_ed_gap(&cfg),
        Mode::TwoVortex => commands::cmd_two_vortex(&cfg),
        Mode::Interference => commands::cmd_interference(&cfg),
    }
}
