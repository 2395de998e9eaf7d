//! Scan configuration: every run resolves its flags into one `ScanConfig`,
//! embeds it verbatim in the output header, and can be re-run from that
//! header alone.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};

use kitaev::lattice::{Cell, LinkKind, LinkRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    PhaseDiagram,
    GapSurface,
    SectorSpectrum,
    EdGap,
    TwoVortex,
    Interference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeChoice {
    VortexFree,
    VortexLattice,
}

/// One link flip, written `kind:cell_x,cell_y` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipSpec {
    pub kind: LinkKind,
    pub cell: [usize; 2],
}

impl FlipSpec {
    pub fn link(&self) -> LinkRef {
        LinkRef {
            cell: Cell::new(self.cell[0], self.cell[1]),
            kind: self.kind,
        }
    }
}

impl FromStr for FlipSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, cell) = s
            .split_once(':')
            .ok_or_else(|| anyhow!("flip must look like z:1,2 (got {s:?})"))?;
        let kind = match kind {
            "x" => LinkKind::X,
            "y" => LinkKind::Y,
            "z" => LinkKind::Z,
            other => bail!("unknown link kind {other:?} (expected x, y or z)"),
        };
        let (cx, cy) = cell
            .split_once(',')
            .ok_or_else(|| anyhow!("flip cell must be two comma-separated integers"))?;
        Ok(FlipSpec {
            kind,
            cell: [
                cx.trim().parse().context("flip cell x")?,
                cy.trim().parse().context("flip cell y")?,
            ],
        })
    }
}

fn default_jz() -> f64 {
    1.0
}
fn default_simplex_res() -> usize {
    50
}
fn default_grid_res() -> usize {
    9
}
fn default_lattice() -> [usize; 2] {
    [2, 4]
}
fn default_quad() -> usize {
    128
}
fn default_format() -> Format {
    Format::Csv
}
fn default_gauge() -> GaugeChoice {
    GaugeChoice::VortexFree
}

/// The full, resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub mode: Mode,
    #[serde(default)]
    pub jx: f64,
    #[serde(default)]
    pub jy: f64,
    #[serde(default = "default_jz")]
    pub jz: f64,
    #[serde(default = "default_simplex_res")]
    pub simplex_res: usize,
    #[serde(default = "default_grid_res")]
    pub grid_res: usize,
    #[serde(default = "default_lattice")]
    pub lattice: [usize; 2],
    #[serde(default = "default_quad")]
    pub quad: usize,
    /// 0 means the rayon default; results are independent of this value.
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_format")]
    pub format: Format,
    #[serde(default = "default_gauge")]
    pub gauge: GaugeChoice,
    #[serde(default)]
    pub flips: Vec<FlipSpec>,
    /// Include the exact-diagonalization columns in the gap surface.
    #[serde(default)]
    pub ed: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ScanConfig {
    pub fn new(mode: Mode) -> Self {
        ScanConfig {
            mode,
            jx: 0.0,
            jy: 0.0,
            jz: default_jz(),
            simplex_res: default_simplex_res(),
            grid_res: default_grid_res(),
            lattice: default_lattice(),
            quad: default_quad(),
            threads: 0,
            format: default_format(),
            gauge: default_gauge(),
            flips: Vec::new(),
            ed: false,
            out: None,
        }
    }

    /// Single-line JSON used in output headers.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serialization cannot fail")
    }
}

/// Recovers the `ScanConfig` embedded in an output produced by this tool,
/// from either the `# config = {...}` header line of a CSV or the `config`
/// field of a JSON document.
pub fn parse_config_echo(text: &str) -> anyhow::Result<ScanConfig> {
    if let Some(line) = text.lines().find(|l| l.starts_with("# config = ")) {
        let json = line.trim_start_matches("# config = ");
        return serde_json::from_str(json).context("parsing CSV config header");
    }
    let doc: serde_json::Value = serde_json::from_str(text).context("output is neither CSV with a config header nor JSON")?;
    let config = doc
        .get("config")
        .ok_or_else(|| anyhow!("JSON output carries no config field"))?;
    serde_json::from_value(config.clone()).context("parsing JSON config field")
}

pub fn parse_lattice(s: &str) -> anyhow::Result<[usize; 2]> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("lattice must look like 2x4 (got {s:?})"))?;
    Ok([
        a.trim().parse().context("lattice n1")?,
        b.trim().parse().context("lattice n2")?,
    ])
}
