//! Recovery of velocity and pressure from a validated vorticity orbit with
//! rigorous error bounds, sup-norm error statements, physical-space
//! snapshots, and the reflection-symmetry diagnostic.

use crate::error::{Error, Result};
use crate::spectral::{
    advect, biot_savart, norm_field, Coeff, ModeKey, MultiIndex, ScalarSeq, SpectralField,
    WeightedNorm,
};
use crate::symmetry::{lift_sigma, OrbitCatalog, ReducedState};
use crate::validator::BoundsReport;
use num_complex::Complex64 as C64;
use rigor::{RigorousComplex, RigorousReal};
use std::collections::HashMap;

/// A reduced orbit together with a successful validation report.
#[derive(Clone, Debug)]
pub struct ValidatedOrbit {
    pub phi_bar: ReducedState<RigorousComplex>,
    pub report: BoundsReport,
}

impl ValidatedOrbit {
    pub fn new(phi_bar: ReducedState<RigorousComplex>, report: BoundsReport) -> Result<Self> {
        if !report.success {
            return Err(Error::NotValidated);
        }
        Ok(Self { phi_bar, report })
    }

    pub fn rmin(&self) -> RigorousReal {
        self.report.rmin.expect("success implies a radius")
    }
}

/// Velocity recovery: u = M Sigma phi with the validation radius as the
/// coefficient-norm error bound.
pub fn velocity_with_error(
    orbit: &ValidatedOrbit,
    catalog: &OrbitCatalog,
) -> Result<(SpectralField<RigorousComplex>, RigorousReal)> {
    let w = lift_sigma(&orbit.phi_bar, catalog)?;
    Ok((biot_savart(&w), orbit.rmin()))
}

/// Pressure coefficients from the Poisson relation at the approximate
/// velocity:
/// `p_n = -(1/n~^2) sum_l n_l ([(u star D~) u]^(l)_n + i f^(l)_n)`, zero on
/// spatial-mean modes; the error bound is (2 ||u|| + r) r.
pub fn pressure_with_error(
    orbit: &ValidatedOrbit,
    forcing_velocity: &SpectralField<RigorousComplex>,
    catalog: &OrbitCatalog,
) -> Result<(ScalarSeq<RigorousComplex>, RigorousReal)> {
    let (u, r) = velocity_with_error(orbit, catalog)?;
    let eta = RigorousReal::point(orbit.report.scheme.eta);
    let adv = advect(&u, &u);
    let mut modes: std::collections::BTreeSet<MultiIndex> = adv.support_modes().into_iter().collect();
    modes.extend(forcing_velocity.support_modes());
    let mut p: ScalarSeq<RigorousComplex> = HashMap::new();
    for n in modes {
        let nsq = n.sp_sq();
        if nsq == 0 {
            continue;
        }
        let mut acc = RigorousComplex::zero();
        for l in 0..3 {
            let k = n.get(l) as i64;
            if k == 0 {
                continue;
            }
            let term = adv
                .get(&ModeKey::new(n, l))
                .add(&forcing_velocity.get(&ModeKey::new(n, l)).mul_i());
            acc = acc.add(&term.scale_int(k));
        }
        let v = acc.neg().div_pos_int(nsq);
        if !v.is_exact_zero() {
            p.insert(n, v);
        }
    }
    let unorm = norm_field(&u, &WeightedNorm::plain(eta));
    let err = (unorm.scale_int(2) + r) * r;
    Ok((p, err))
}

/// Scalar-potential recovery for curl-free fields:
/// `p_n = i Phi^(k)_n / n_k` for any k with n_k != 0, so that Phi = -grad p.
/// Checks the componentwise consistency `n_l Phi^(m) = n_m Phi^(l)` and the
/// absence of spatial-mean content.
pub fn gradient_recover(
    phi_field: &SpectralField<RigorousComplex>,
) -> Result<ScalarSeq<RigorousComplex>> {
    let mut out: ScalarSeq<RigorousComplex> = HashMap::new();
    for n in phi_field.support_modes() {
        let v = [
            phi_field.get(&ModeKey::new(n, 0)),
            phi_field.get(&ModeKey::new(n, 1)),
            phi_field.get(&ModeKey::new(n, 2)),
        ];
        if n.sp_sq() == 0 {
            if v.iter().any(|c| !c.contains_zero()) {
                return Err(Error::NotCurlFree(format!(
                    "nonzero spatial-mean content at n4 = {}",
                    n.n4
                )));
            }
            continue;
        }
        // consistency: n_l Phi^(m) = n_m Phi^(l) within enclosures
        for l in 0..3 {
            for m in (l + 1)..3 {
                let a = v[m].scale_int(n.get(l) as i64);
                let b = v[l].scale_int(n.get(m) as i64);
                if !a.sub(&b).contains_zero() {
                    return Err(Error::NotCurlFree(format!(
                        "curl component ({l},{m}) nonzero at {n:?}"
                    )));
                }
            }
        }
        let k = (0..3).find(|&k| n.get(k) != 0).expect("spatial part nonzero");
        let val = v[k].mul_i().div_pos_int(n.get(k).unsigned_abs() as i64);
        let val = if n.get(k) < 0 { val.neg() } else { val };
        if !val.is_exact_zero() {
            out.insert(n, val);
        }
    }
    Ok(out)
}

/// Sup-norm error statement of a validated orbit: the weighted coefficient
/// norms control the sup norms, and the stated comparisons are against the
/// time-dilated approximation.
#[derive(Clone, Debug, serde::Serialize)]
pub struct C0ErrorStatement {
    pub vorticity_c0: [String; 2],
    pub velocity_c0: [String; 2],
    pub pressure_c0: [String; 2],
    pub frequency_err: [String; 2],
    pub dilation_note: String,
}

pub fn c0_error_statement(
    orbit: &ValidatedOrbit,
    forcing_velocity: &SpectralField<RigorousComplex>,
    catalog: &OrbitCatalog,
) -> Result<C0ErrorStatement> {
    let r = orbit.rmin();
    let (_, perr) = pressure_with_error(orbit, forcing_velocity, catalog)?;
    Ok(C0ErrorStatement {
        vorticity_c0: r.to_hex_pair(),
        velocity_c0: r.to_hex_pair(),
        pressure_c0: perr.to_hex_pair(),
        frequency_err: r.to_hex_pair(),
        dilation_note: "bounds compare the exact solution with the approximation \
                        run at the dilated time t * Omega / Omega_bar"
            .into(),
    })
}

/// Physical-space samples of one scalar component by direct trigonometric
/// summation on a uniform (x1, x2) grid at x3 = 0.
pub struct GridSnapshot {
    pub time: f64,
    pub resolution: usize,
    /// row-major values[ix1 * resolution + ix2]
    pub values: Vec<f64>,
}

pub fn grid_snapshot(
    field: &SpectralField<C64>,
    comp: usize,
    omega: f64,
    times: &[f64],
    resolution: usize,
    normalization: f64,
) -> Vec<GridSnapshot> {
    let coeffs: Vec<(MultiIndex, C64)> = field.comps[comp]
        .iter()
        .map(|(n, v)| (*n, *v))
        .collect();
    times
        .iter()
        .map(|&t| {
            let mut values = vec![0.0; resolution * resolution];
            for i1 in 0..resolution {
                let x1 = 2.0 * std::f64::consts::PI * i1 as f64 / resolution as f64;
                for i2 in 0..resolution {
                    let x2 = 2.0 * std::f64::consts::PI * i2 as f64 / resolution as f64;
                    let mut acc = 0.0;
                    for (n, v) in &coeffs {
                        let phase =
                            n.n1 as f64 * x1 + n.n2 as f64 * x2 + n.n4 as f64 * omega * t;
                        acc += v.re * phase.cos() - v.im * phase.sin();
                    }
                    values[i1 * resolution + i2] = acc / normalization;
                }
            }
            GridSnapshot {
                time: t,
                resolution,
                values,
            }
        })
        .collect()
}

pub fn snapshot_to_csv(s: &GridSnapshot) -> String {
    let mut out = String::from("x1,x2,value\n");
    for i1 in 0..s.resolution {
        let x1 = 2.0 * std::f64::consts::PI * i1 as f64 / s.resolution as f64;
        for i2 in 0..s.resolution {
            let x2 = 2.0 * std::f64::consts::PI * i2 as f64 / s.resolution as f64;
            out.push_str(&format!(
                "{x1:.10},{x2:.10},{:.12e}\n",
                s.values[i1 * s.resolution + i2]
            ));
        }
    }
    out
}

/// Deviation from the x1-reflection symmetry: the maximum over sampled
/// times and reflection planes of E(u - S u) / (4 E(u)), where E is the
/// kinetic energy and S reflects about the plane x1 = c (flipping the first
/// velocity component). Computed spectrally, non-rigorously.
pub fn symmetry_deviation(u: &SpectralField<C64>, omega: f64, times: &[f64], shifts: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for &t in times {
        // spatial coefficients at time t
        let mut at_t: [HashMap<(i32, i32, i32), C64>; 3] = Default::default();
        for (j, v) in u.iter() {
            let phase = C64::new(0.0, j.n.n4 as f64 * omega * t).exp();
            let key = (j.n.n1, j.n.n2, j.n.n3);
            *at_t[j.comp].entry(key).or_insert(C64::new(0.0, 0.0)) += v * phase;
        }
        let energy: f64 = at_t
            .iter()
            .flat_map(|c| c.values())
            .map(|v| v.norm_sqr())
            .sum();
        if energy == 0.0 {
            continue;
        }
        for s in 0..shifts {
            let c = 2.0 * std::f64::consts::PI * s as f64 / shifts as f64;
            // [S u]^(m)_n = sigma_m u^(m)_{(-n1, n2, n3)} e^{-2 i c n1},
            // sigma = (-1, 1, 1)
            let mut diff = 0.0;
            for (m, comp) in at_t.iter().enumerate() {
                let sigma = if m == 0 { -1.0 } else { 1.0 };
                for (&(n1, n2, n3), &v) in comp {
                    let mirrored = comp
                        .get(&(-n1, n2, n3))
                        .copied()
                        .unwrap_or(C64::new(0.0, 0.0));
                    let phase = C64::new(0.0, -2.0 * c * n1 as f64).exp();
                    diff += (v - sigma * mirrored * phase).norm_sqr();
                }
            }
            worst = worst.max(diff / (4.0 * energy));
        }
    }
    worst
}
