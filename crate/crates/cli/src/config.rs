//! Command-line configuration and its parsing helpers.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pnedelec::interp::projection::InnerProductSpec;
use pnedelec::meshasm::{BoundaryCondition, Mesh, MeshKind};
use pnedelec::Rational;
use serde::Serialize;

/// Decimal expansion used for `--scale pi`.
pub const PI_DECIMAL: &str = "3.14159265358979323846";

#[derive(Parser, Debug, Serialize)]
#[command(name = "pnedelec", version, about = "p-version Nedelec edge elements on tetrahedra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Check dimensions, unisolvence, exactness, projectors and locality.
    Verify(VerifyArgs),
    /// Interpolation error study for an analytic field.
    Interp(InterpArgs),
    /// Maxwell eigenvalue spectrum.
    Eig(EigArgs),
    /// Generate or convert a mesh.
    Mesh(MeshArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    /// Plain mesh text (mesh only).
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bc {
    None,
    Dirichlet,
}

impl From<Bc> for BoundaryCondition {
    fn from(b: Bc) -> Self {
        match b {
            Bc::None => BoundaryCondition::None,
            Bc::Dirichlet => BoundaryCondition::Dirichlet,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ip {
    L2,
    Fractional,
}

#[derive(Args, Debug, Serialize)]
pub struct Common {
    /// Output format; defaults depend on the subcommand.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Suppress the summary printed to stderr.
    #[arg(long)]
    pub quiet: bool,
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct MeshSource {
    /// `reference`, `cube6`, `cube_grid` or a mesh file.
    #[arg(long)]
    pub mesh: Option<String>,
    /// Subdivisions per axis for `cube_grid`.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Uniform scaling, `pi` or a rational such as `3/2`.
    #[arg(long)]
    pub scale: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// Degree or range, e.g. `2`, `0..3` (inclusive) or `0,2`.
    #[arg(long, default_value = "0..3")]
    pub p: String,
    /// Random inputs per commuting-diagram check.
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long, hide = true)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub inject_fault: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct InterpArgs {
    #[arg(long, default_value = "1..4")]
    pub p: String,
    /// `grad_sine`, `curl_sine` or `exp_cycle`.
    #[arg(long, default_value = "grad_sine")]
    pub field: String,
    #[arg(long, value_enum, default_value_t = Ip::L2)]
    pub ip: Ip,
    /// Fixed fractional exponent; the degree-dependent default otherwise.
    #[arg(long)]
    pub ip_eps: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub source: MeshSource,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct EigArgs {
    #[arg(long, default_value = "1..3")]
    pub p: String,
    #[arg(long, value_enum, default_value_t = Bc::Dirichlet)]
    pub bc: Bc,
    /// Diagonal permittivity, e.g. `1,2,4`.
    #[arg(long)]
    pub eps: Option<String>,
    /// Diagonal permeability.
    #[arg(long)]
    pub mu: Option<String>,
    /// Upper end of the spurious scan window.
    #[arg(long)]
    pub window: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub source: MeshSource,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct MeshArgs {
    /// `reference`, `cube6` or `cube_grid`.
    #[arg(long)]
    pub gen: Option<String>,
    /// Existing mesh file to convert.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub scale: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

pub fn parse_p_range(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    let num = |t: &str| t.trim().parse::<usize>().with_context(|| format!("invalid degree `{t}` in `--p {s}`"));
    let ps = if let Some((a, b)) = s.split_once("..") {
        let (lo, hi) = (num(a)?, num(b.trim_start_matches('='))?);
        if lo > hi {
            bail!("empty degree range `{s}`");
        }
        (lo..=hi).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if ps.is_empty() {
        bail!("no degrees given");
    }
    Ok(ps)
}

pub fn parse_scale(s: &str) -> Result<Rational> {
    let text = if s.eq_ignore_ascii_case("pi") { PI_DECIMAL } else { s };
    let r: Rational = text.parse().map_err(|_| anyhow::anyhow!("invalid scale `{s}`; use `pi` or a rational like 3/2"))?;
    if r.to_f64() <= 0.0 {
        bail!("scale must be positive");
    }
    Ok(r)
}

pub fn parse_diagonal(s: &str) -> Result<[Rational; 3]> {
    let v: Vec<Rational> = s
        .split(',')
        .map(|t| t.trim().parse::<Rational>().map_err(|_| anyhow::anyhow!("invalid tensor entry `{t}`")))
        .collect::<Result<_>>()?;
    match <[Rational; 3]>::try_from(v) {
        Ok(d) => Ok(d),
        Err(_) => bail!("expected three comma-separated diagonal entries, got `{s}`"),
    }
}

pub fn generator(name: &str, n: usize) -> Result<MeshKind> {
    match name {
        "reference" | "reference_tet" => Ok(MeshKind::ReferenceTet),
        "cube6" => Ok(MeshKind::Cube6),
        "cube_grid" if n >= 1 => Ok(MeshKind::CubeGrid(n)),
        "cube_grid" => bail!("--n must be at least 1"),
        _ => bail!("unknown mesh generator `{name}`; expected reference, cube6 or cube_grid"),
    }
}

/// Resolved mesh plus the cube side length when the mesh is a generated cube.
pub struct LoadedMesh {
    pub mesh: Mesh,
    pub cube_side: Option<f64>,
}

pub fn load_mesh(src: &MeshSource, default: &str) -> Result<LoadedMesh> {
    let name = src.mesh.as_deref().unwrap_or(default);
    let scale = src.scale.as_deref().map(parse_scale).transpose()?;
    let (mesh, cube) = match generator(name, src.n) {
        Ok(kind) => (Mesh::generate(kind), kind != MeshKind::ReferenceTet),
        Err(_) if std::path::Path::new(name).exists() => {
            let text = std::fs::read_to_string(name).with_context(|| format!("reading mesh file `{name}`"))?;
            (Mesh::from_text(&text).with_context(|| format!("parsing mesh file `{name}`"))?, false)
        }
        Err(e) => return Err(e.context(format!("`{name}` is neither a generator nor an existing file"))),
    };
    let side = scale.as_ref().map_or(1.0, Rational::to_f64);
    let mesh = match &scale {
        Some(s) => mesh.scaled(s),
        None => mesh,
    };
    Ok(LoadedMesh {
        mesh,
        cube_side: cube.then_some(side),
    })
}

pub fn inner_product(ip: Ip, eps: Option<f64>) -> Result<InnerProductSpec> {
    match (ip, eps) {
        (Ip::L2, None) => Ok(InnerProductSpec::l2()),
        (Ip::L2, Some(_)) => bail!("--ip-eps requires --ip fractional"),
        (Ip::Fractional, None) => Ok(InnerProductSpec::fractional_auto()),
        (Ip::Fractional, Some(e)) if e > 0.0 && e < 0.5 => Ok(InnerProductSpec::fractional(e)),
        (Ip::Fractional, Some(e)) => bail!("--ip-eps must lie in (0, 0.5), got {e}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_p_range("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_p_range("1..=2").unwrap(), vec![1, 2]);
        assert_eq!(parse_p_range("4").unwrap(), vec![4]);
        assert_eq!(parse_p_range("0, 2").unwrap(), vec![0, 2]);
        assert!(parse_p_range("3..1").is_err());
        assert!(parse_p_range("x").is_err());
    }

    #[test]
    fn scales_and_tensors() {
        assert!((parse_scale("pi").unwrap().to_f64() - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(parse_scale("3/2").unwrap(), Rational::new(3, 2));
        assert!(parse_scale("-1").is_err());
        assert_eq!(parse_diagonal("1,2,4").unwrap()[2], Rational::from_integer(4));
        assert!(parse_diagonal("1,2").is_err());
    }
}
