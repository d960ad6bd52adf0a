//! Versioned JSON run configuration. Proof runs must be replayable from
//! artifacts alone, so no environment variables are consulted.

use anyhow::{bail, Context};
use nsorbit::spectral::{ModeKey, MultiIndex, SpectralField, SupportBox};
use nsorbit::symmetry::{close_group, taylor_green_16, Frac, Group, PhysicalSymmetry};
use nsorbit::validator::TruncationScheme;
use nsorbit::vorticity::{taylor_green_forcing, Forcing, ForcingProvenance};
use num_complex::Complex64 as C64;
use rigor::RigorousComplex;
use serde::Deserialize;
use std::path::Path;

pub const SCHEMA: &str = "nsorbit-config-1";

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub nu: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(rename = "box")]
    pub support: SupportBox,
    pub ndagger: u32,
    pub ntilde: u32,
    #[serde(default)]
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub group: GroupSpec,
    #[serde(default = "default_true")]
    pub essentially_2d: bool,
    #[serde(default)]
    pub threads: usize,
}

fn default_eta() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Deserialize, Debug, Default)]
#[serde(untagged)]
pub enum ForcingSpec {
    #[default]
    Unset,
    Preset(String),
    Explicit {
        modes: Vec<(i32, i32, i32, i32, u8, f64, f64)>,
    },
}

#[derive(Deserialize, Debug, Default)]
#[serde(untagged)]
pub enum GroupSpec {
    #[default]
    Unset,
    Preset(String),
    Generators {
        generators: Vec<GeneratorSpec>,
    },
}

#[derive(Deserialize, Debug)]
pub struct GeneratorSpec {
    /// row-major 3x3 signed permutation matrix
    pub c: [i8; 9],
    /// spatial shift in units of 2 pi, as [num, den] fractions
    pub ctilde: [[i64; 2]; 3],
    /// time shift in units of the period, as [num, den]
    pub d: [i64; 2],
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if cfg.schema != SCHEMA {
            bail!("unsupported config schema '{}' (expected {SCHEMA})", cfg.schema);
        }
        if !(cfg.nu > 0.0) {
            bail!("config nu must be positive");
        }
        if !(cfg.eta >= 1.0) {
            bail!("config eta must be at least 1");
        }
        if cfg.ntilde < cfg.ndagger {
            bail!("config ntilde must be at least ndagger");
        }
        Ok(cfg)
    }

    pub fn scheme(&self) -> TruncationScheme {
        TruncationScheme {
            support: self.support,
            ndagger: self.ndagger,
            ntilde: self.ntilde,
            eta: self.eta,
            nu: self.nu,
            essentially_2d: self.essentially_2d,
        }
    }

    pub fn group(&self) -> anyhow::Result<Group> {
        match &self.group {
            GroupSpec::Unset => Ok(taylor_green_16()),
            GroupSpec::Preset(name) => match name.as_str() {
                "taylor-green-16" => Ok(taylor_green_16()),
                "trivial" => Ok(Group::trivial()),
                other => bail!("unknown group preset '{other}'"),
            },
            GroupSpec::Generators { generators } => {
                let gens: Vec<PhysicalSymmetry> = generators
                    .iter()
                    .map(|g| {
                        let c = [
                            [g.c[0], g.c[1], g.c[2]],
                            [g.c[3], g.c[4], g.c[5]],
                            [g.c[6], g.c[7], g.c[8]],
                        ];
                        let ct = [
                            Frac::new(g.ctilde[0][0], g.ctilde[0][1]),
                            Frac::new(g.ctilde[1][0], g.ctilde[1][1]),
                            Frac::new(g.ctilde[2][0], g.ctilde[2][1]),
                        ];
                        PhysicalSymmetry::new(c, ct, Frac::new(g.d[0], g.d[1]))
                    })
                    .collect::<Result<_, _>>()
                    .context("invalid generator")?;
                close_group(&gens, 1024).context("generator closure")
            }
        }
    }

    pub fn forcing_rigorous(&self) -> anyhow::Result<Forcing<RigorousComplex>> {
        match &self.forcing {
            ForcingSpec::Unset => Ok(taylor_green_forcing()),
            ForcingSpec::Preset(name) => match name.as_str() {
                "taylor-green" => Ok(taylor_green_forcing()),
                other => bail!("unknown forcing preset '{other}'"),
            },
            ForcingSpec::Explicit { modes } => {
                let mut f = SpectralField::new();
                for (n1, n2, n3, n4, m, re, im) in modes {
                    if !(1..=3).contains(m) {
                        bail!("forcing mode component {m} out of range");
                    }
                    f.set(
                        ModeKey::new(MultiIndex::new(*n1, *n2, *n3, *n4), (*m - 1) as usize),
                        RigorousComplex::point(*re, *im),
                    );
                }
                Ok(Forcing::from_field(f, ForcingProvenance::Explicit)?)
            }
        }
    }

    pub fn forcing_f64(&self) -> anyhow::Result<Forcing<C64>> {
        let f = self.forcing_rigorous()?;
        Ok(Forcing {
            fomega: f.fomega.midpoint(),
            provenance: f.provenance,
        })
    }
}
