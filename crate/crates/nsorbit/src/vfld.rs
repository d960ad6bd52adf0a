//! The `VFLD-1` field file format: a JSON document with all reals encoded
//! as lowercase hexadecimal IEEE-754 bit patterns for bit-exact round
//! trips. Point-valued files store one hex string per real part,
//! interval-valued files store `[lo, hi]` pairs.

use crate::error::{Error, Result};
use crate::spectral::{ModeKey, MultiIndex, SpectralField, SupportBox};
use crate::validator::{BoundsReport, TruncationScheme};
use rigor::{f64_from_hex, f64_to_hex, RigorousComplex, RigorousReal};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const VERSION: &str = "VFLD-1";

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(untagged)]
enum HexOrPair {
    Hex(String),
    Pair([String; 2]),
}

type RawMode = (i32, i32, i32, i32, u8, HexOrPair, HexOrPair);

#[derive(Serialize, Deserialize, Debug)]
struct RawFile {
    version: String,
    eta: String,
    nu: String,
    omega_hex: String,
    #[serde(rename = "box")]
    support: SupportBox,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
    modes: Vec<RawMode>,
}

/// A parsed field file: interval coefficients (point intervals when the
/// file was point-valued), the frequency, and the declared parameters.
#[derive(Clone, Debug)]
pub struct FieldFile {
    pub eta: f64,
    pub nu: f64,
    pub omega: f64,
    pub support: SupportBox,
    pub provenance: Option<String>,
    pub field: SpectralField<RigorousComplex>,
}

fn parse_real(h: &HexOrPair, row: usize) -> Result<RigorousReal> {
    match h {
        HexOrPair::Hex(s) => f64_from_hex(s)
            .map(RigorousReal::point)
            .ok_or_else(|| Error::Format(format!("mode row {row}: bad hex '{s}'"))),
        HexOrPair::Pair([lo, hi]) => RigorousReal::from_hex_pair(lo, hi)
            .ok_or_else(|| Error::Format(format!("mode row {row}: bad interval pair"))),
    }
}

pub fn read_field_file(path: &Path) -> Result<FieldFile> {
    let text = std::fs::read_to_string(path)?;
    let raw: RawFile = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    if raw.version != VERSION {
        return Err(Error::Format(format!(
            "unsupported version '{}' (expected {VERSION})",
            raw.version
        )));
    }
    let eta = f64_from_hex(&raw.eta).ok_or_else(|| Error::Format("bad eta hex".into()))?;
    let nu = f64_from_hex(&raw.nu).ok_or_else(|| Error::Format("bad nu hex".into()))?;
    let omega =
        f64_from_hex(&raw.omega_hex).ok_or_else(|| Error::Format("bad omega hex".into()))?;
    let mut field = SpectralField::new();
    for (row, (n1, n2, n3, n4, m, re, im)) in raw.modes.iter().enumerate() {
        if !(1..=3).contains(m) {
            return Err(Error::Format(format!("mode row {row}: component {m}")));
        }
        let n = MultiIndex::new(*n1, *n2, *n3, *n4);
        if n.is_origin() {
            return Err(Error::Format(format!("mode row {row}: origin mode")));
        }
        if !raw.support.contains(&n) {
            return Err(Error::Format(format!(
                "mode row {row}: index outside the declared box"
            )));
        }
        let re = parse_real(re, row)?;
        let im = parse_real(im, row)?;
        field.set(
            ModeKey::new(n, (*m - 1) as usize),
            RigorousComplex::new(re, im),
        );
    }
    Ok(FieldFile {
        eta,
        nu,
        omega,
        support: raw.support,
        provenance: raw.provenance,
        field,
    })
}

fn encode_real(v: &RigorousReal) -> HexOrPair {
    if v.is_point() {
        HexOrPair::Hex(f64_to_hex(v.lo()))
    } else {
        let [lo, hi] = v.to_hex_pair();
        HexOrPair::Pair([lo, hi])
    }
}

pub fn write_field_file(path: &Path, file: &FieldFile) -> Result<()> {
    let mut keys = file.field.sorted_keys();
    keys.sort();
    let modes: Vec<RawMode> = keys
        .iter()
        .map(|j| {
            let v = file.field.get(j);
            (
                j.n.n1,
                j.n.n2,
                j.n.n3,
                j.n.n4,
                (j.comp + 1) as u8,
                encode_real(&v.re),
                encode_real(&v.im),
            )
        })
        .collect();
    let raw = RawFile {
        version: VERSION.into(),
        eta: f64_to_hex(file.eta),
        nu: f64_to_hex(file.nu),
        omega_hex: f64_to_hex(file.omega),
        support: file.support,
        provenance: file.provenance.clone(),
        modes,
    };
    let text = serde_json::to_string_pretty(&raw).expect("serializable");
    std::fs::write(path, text)?;
    Ok(())
}

fn real_pair(v: &RigorousReal) -> [String; 2] {
    v.to_hex_pair()
}

fn opt_pair(v: &Option<RigorousReal>) -> Option<[String; 2]> {
    v.as_ref().map(real_pair)
}

#[derive(Serialize, Deserialize, Debug)]
pub struct ReportJson {
    pub version: String,
    pub success: bool,
    pub scheme: TruncationScheme,
    pub omega_bar_hex: String,
    pub y0: [String; 2],
    pub z0: [String; 2],
    pub z1_finite: [String; 2],
    pub z1_tail: [String; 2],
    pub z2: [String; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmin: Option<[String; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmax: Option<[String; 2]>,
    pub contraction_margin: f64,
    pub discriminant_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub block_dim: usize,
    pub e_dagger_modes: usize,
    pub z1_columns: usize,
    pub timing_ms: Vec<(String, u128)>,
    /// rough peak working-set estimate of the dense blocks
    pub block_bytes: usize,
}

pub fn report_to_json(report: &BoundsReport) -> ReportJson {
    ReportJson {
        version: "NSORBIT-REPORT-1".into(),
        success: report.success,
        scheme: report.scheme,
        omega_bar_hex: f64_to_hex(report.omega_bar),
        y0: real_pair(&report.y0),
        z0: real_pair(&report.z0),
        z1_finite: real_pair(&report.z1_finite),
        z1_tail: real_pair(&report.z1_tail),
        z2: real_pair(&report.z2),
        rmin: opt_pair(&report.rmin),
        rmax: opt_pair(&report.rmax),
        contraction_margin: report.contraction_margin,
        discriminant_margin: report.discriminant_margin,
        failure: report.failure_attribution(),
        block_dim: report.block_dim,
        e_dagger_modes: report.e_dagger_modes,
        z1_columns: report.z1_columns,
        timing_ms: report.timing_ms.clone(),
        block_bytes: report.block_dim * report.block_dim * 32 * 2,
    }
}

pub fn write_report(path: &Path, report: &BoundsReport) -> Result<()> {
    let json = report_to_json(report);
    std::fs::write(path, serde_json::to_string_pretty(&json).expect("serializable"))?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<ReportJson> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Recover the interval bounds from a parsed report.
pub fn report_interval(pair: &[String; 2]) -> Result<RigorousReal> {
    RigorousReal::from_hex_pair(&pair[0], &pair[1])
        .ok_or_else(|| Error::Format("bad interval pair in report".into()))
}
