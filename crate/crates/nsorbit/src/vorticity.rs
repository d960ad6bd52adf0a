//! The zero-finding map for periodic orbits of the vorticity equation on
//! states W = (Omega, omega), plus its first and second derivatives, the
//! phase condition, and the Taylor-Green forcing data.
//!
//! For each mode n != 0 the map reads
//! `F_n(W) = i Omega n4 w_n + Psi_n(w) + nu n~^2 w_n - fw_n`, where
//! `Psi(w) = i (M w star D~) w - i (w star D~) M w` is the quadratic
//! advection term, and the scalar phase component is
//! `F_phase(W) = i sum_{l,n} w_n^(l) n4 conj(what_n^(l))`.

use crate::error::{Error, Result};
use crate::spectral::{
    advect, biot_savart, divergence, partial, Coeff, CoeffAcc, ModeKey, MultiIndex, ScalarSeq,
    SpectralField,
};
use num_complex::Complex64 as C64;
use rigor::RigorousComplex;

/// Angular frequency plus vorticity coefficients; the full unknown of the
/// zero-finding problem. `omega` excludes the n = 0 mode. The frequency is
/// stored as the scalar type of the profile; physical states keep it real.
#[derive(Clone, Debug, PartialEq)]
pub struct State<T: Coeff> {
    pub omega: T,
    pub field: SpectralField<T>,
}

impl<T: Coeff> State<T> {
    pub fn new(omega: T, field: SpectralField<T>) -> Result<Self> {
        if field.has_origin_modes() {
            return Err(Error::ForcingInvalid(
                "state carries an n = 0 mode".into(),
            ));
        }
        Ok(Self { omega, field })
    }

    pub fn zero() -> Self {
        Self {
            omega: T::zero(),
            field: SpectralField::new(),
        }
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> State<U> {
        State {
            omega: f(&self.omega),
            field: self.field.map(&f),
        }
    }
}

impl State<RigorousComplex> {
    pub fn midpoint(&self) -> State<C64> {
        self.map(|v| v.mid_c64())
    }
}

impl State<C64> {
    pub fn to_rigorous(&self) -> State<RigorousComplex> {
        self.map(|v| RigorousComplex::point(v.re, v.im))
    }
}

/// How a forcing came to be; carried through files for provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ForcingProvenance {
    Preset(String),
    Explicit,
}

/// Curl of the body force, time-independent with zero spatial average.
#[derive(Clone, Debug)]
pub struct Forcing<T: Coeff> {
    pub fomega: SpectralField<T>,
    pub provenance: ForcingProvenance,
}

impl<T: Coeff> Forcing<T> {
    pub fn from_field(fomega: SpectralField<T>, provenance: ForcingProvenance) -> Result<Self> {
        let f = Self { fomega, provenance };
        f.validate()?;
        Ok(f)
    }

    /// Time-independence (n4 = 0 on all modes) and zero spatial average.
    pub fn validate(&self) -> Result<()> {
        if self.fomega.iter().any(|(j, _)| j.n.n4 != 0) {
            return Err(Error::ForcingInvalid("time-dependent mode".into()));
        }
        if !self.fomega.zero_spatial_mean() {
            return Err(Error::ForcingInvalid("nonzero spatial average".into()));
        }
        Ok(())
    }
}

/// Reference orbit fixing the time translate through the phase condition.
#[derive(Clone, Debug)]
pub struct PhaseReference<T: Coeff> {
    pub omega_hat: SpectralField<T>,
}

impl<T: Coeff> PhaseReference<T> {
    pub fn new(omega_hat: SpectralField<T>) -> Self {
        Self { omega_hat }
    }
}

/// The curl of the Taylor-Green body force: four unit modes in the third
/// component, 4 sin x1 sin x2 expanded into exponentials.
pub fn taylor_green_forcing<T: Coeff>() -> Forcing<T> {
    let mut f = SpectralField::new();
    let one = T::one();
    for (n1, n2, sign) in [(1, 1, -1i64), (-1, -1, -1), (1, -1, 1), (-1, 1, 1)] {
        f.set(
            ModeKey::new(MultiIndex::new(n1, n2, 0, 0), 2),
            one.scale_int(sign),
        );
    }
    Forcing {
        fomega: f,
        provenance: ForcingProvenance::Preset("taylor-green".into()),
    }
}

/// The Taylor-Green body force itself (velocity equation side): the curl of
/// this field equals `taylor_green_forcing`.
pub fn taylor_green_velocity_forcing<T: Coeff>() -> SpectralField<T> {
    let mut f = SpectralField::new();
    let half_i = T::one().mul_i().div_pos_int(2);
    // 2 sin x1 cos x2 and -2 cos x1 sin x2
    for (n1, n2, s1, s2) in [
        (1, 1, -1i64, 1i64),
        (1, -1, -1, -1),
        (-1, 1, 1, 1),
        (-1, -1, 1, -1),
    ] {
        let n = MultiIndex::new(n1, n2, 0, 0);
        f.set(ModeKey::new(n, 0), half_i.scale_int(s1));
        f.set(ModeKey::new(n, 1), half_i.scale_int(s2));
    }
    f
}

/// The explicit steady solution at viscosity nu: omega* = fw / (2 nu), with
/// a placeholder unit frequency.
pub fn viscous_equilibrium<T: Coeff>(nu: f64) -> State<T> {
    assert!(nu > 0.0);
    let f = taylor_green_forcing::<T>();
    let half = T::one().div_pos_int(2).scale_f64(1.0 / 1.0);
    // omega* = fw * (1 / (2 nu)); write as (fw / 2) * (1/nu) to keep the
    // halving exact.
    let field = f
        .fomega
        .map(|v| v.mul(&half).scale_f64(1.0 / nu));
    State {
        omega: T::one(),
        field,
    }
}

/// Exact quadratic advection term Psi(w) = i (M w star D~) w - i (w star D~) M w.
pub fn nonlinearity_psi<T: Coeff>(omega: &SpectralField<T>) -> SpectralField<T> {
    let u = biot_savart(omega);
    let a = advect(&u, omega);
    let b = advect(omega, &u);
    let mut out = SpectralField::new();
    for (j, v) in a.iter() {
        out.add_to(j, v.mul_i());
    }
    for (j, v) in b.iter() {
        out.add_to(j, v.mul_i().neg());
    }
    out
}

fn heat_symbol<T: Coeff>(omega_bar: &T, nu: f64, n: &MultiIndex, v: &T) -> T {
    // i Omega n4 v + nu n~^2 v
    let rot = omega_bar.mul(v).mul_i().scale_int(n.n4 as i64);
    let visc = v.scale_int(n.sp_sq()).scale_f64(nu);
    rot.add(&visc)
}

/// Phase condition value: i sum over modes of w n4 conj(what).
fn phase_value<T: Coeff>(field: &SpectralField<T>, phase: &PhaseReference<T>) -> T {
    let mut acc = T::Acc::default();
    for (j, h) in phase.omega_hat.iter() {
        let n4 = j.n.n4 as i64;
        if n4 == 0 {
            continue;
        }
        let w = field.get(&j);
        if !w.is_exact_zero() {
            acc.add_prod(&w.scale_int(n4), &h.conj());
        }
    }
    acc.finish().mul_i()
}

/// The full residual (F_phase(W), (F_n(W))). Output modes at n = 0 are
/// dropped (the map is defined on Z^4_*).
pub fn residual_f<T: Coeff>(
    w: &State<T>,
    nu: f64,
    forcing: &Forcing<T>,
    phase: &PhaseReference<T>,
) -> Result<(T, SpectralField<T>)> {
    forcing.validate()?;
    let mut out = nonlinearity_psi(&w.field);
    for (j, v) in w.field.iter() {
        out.add_to(j, heat_symbol(&w.omega, nu, &j.n, v));
    }
    for (j, v) in forcing.fomega.iter() {
        out.add_to(j, v.neg());
    }
    for c in 0..3 {
        out.comps[c].remove(&MultiIndex::ZERO);
    }
    Ok((phase_value(&w.field, phase), out))
}

/// Derivative of Psi at omega_bar applied to v:
/// i[(M wb star D~) v - (v star D~) M wb + (M v star D~) wb - (wb star D~) M v].
pub fn dpsi_action<T: Coeff>(
    omega_bar: &SpectralField<T>,
    v: &SpectralField<T>,
) -> SpectralField<T> {
    let u_bar = biot_savart(omega_bar);
    let u_v = biot_savart(v);
    let mut out = SpectralField::new();
    for (sign, term) in [
        (1i64, advect(&u_bar, v)),
        (-1, advect(v, &u_bar)),
        (1, advect(&u_v, omega_bar)),
        (-1, advect(omega_bar, &u_v)),
    ] {
        for (j, val) in term.iter() {
            out.add_to(j, val.mul_i().scale_int(sign));
        }
    }
    out
}

/// Full Frechet derivative action DF(Wbar) V, including the frequency
/// column i D4 wbar and the phase-condition row.
pub fn jacobian_action<T: Coeff>(
    w_bar: &State<T>,
    v: &State<T>,
    nu: f64,
    phase: &PhaseReference<T>,
) -> (T, SpectralField<T>) {
    let mut out = dpsi_action(&w_bar.field, &v.field);
    for (j, val) in v.field.iter() {
        out.add_to(j, heat_symbol(&w_bar.omega, nu, &j.n, val));
    }
    // frequency column: dOmega * i n4 wbar_n
    for (j, val) in w_bar.field.iter() {
        let t = v.omega.mul(val).mul_i().scale_int(j.n.n4 as i64);
        out.add_to(j, t);
    }
    for c in 0..3 {
        out.comps[c].remove(&MultiIndex::ZERO);
    }
    (phase_value(&v.field, phase), out)
}

/// Second derivative (independent of the base point; F is quadratic):
/// first component vanishes, the rest is the symmetric bilinear form.
pub fn second_derivative_action<T: Coeff>(
    v1: &State<T>,
    v2: &State<T>,
) -> (T, SpectralField<T>) {
    let u1 = biot_savart(&v1.field);
    let u2 = biot_savart(&v2.field);
    let mut out = SpectralField::new();
    for (sign, term) in [
        (1i64, advect(&u2, &v1.field)),
        (1, advect(&u1, &v2.field)),
        (-1, advect(&v2.field, &u1)),
        (-1, advect(&v1.field, &u2)),
    ] {
        for (j, val) in term.iter() {
            out.add_to(j, val.mul_i().scale_int(sign));
        }
    }
    // Omega'' D4 w' + Omega' D4 w''
    for (a, b) in [(v2.omega, &v1.field), (v1.omega, &v2.field)] {
        for (j, val) in b.iter() {
            out.add_to(j, a.mul(val).mul_i().scale_int(j.n.n4 as i64));
        }
    }
    for c in 0..3 {
        out.comps[c].remove(&MultiIndex::ZERO);
    }
    (T::zero(), out)
}

/// True iff the divergence of the nonlinear part of F encloses zero
/// coefficientwise for the given divergence-free field.
pub fn check_divergence_preservation(omega: &SpectralField<RigorousComplex>) -> bool {
    let psi = nonlinearity_psi(omega);
    divergence(&psi).values().all(|v| v.contains_zero())
}

/// Precomputed convolution tables for explicit Jacobian columns.
///
/// For a column at j = (n, m) the entries over rows k = n + s are
/// `i [ delta_{l,m} sum_p k_p (M wb)^(p)_s - (D_m (M wb)^(l))_s
///      + sum_p M_n^(p,m) (D_p wb^(l))_s - sum_p n_p M_n^(l,m) wb^(p)_s ]`,
/// with the first term written with the row factor k_p. Tables are stored
/// densely over the offset list so the per-column loop is lookup-free.
pub struct JacobianTables<T: Coeff> {
    /// M wb as a field (for norms and vanishing checks)
    pub m_w: SpectralField<T>,
    /// union of all table supports (offsets s), sorted
    pub offsets: Vec<MultiIndex>,
    /// per offset: (M wb)^(p)
    m_w_at: Vec<[T; 3]>,
    /// per offset: D_m (M wb)^(l), indexed [m][l]
    d_mw_at: Vec<[[T; 3]; 3]>,
    /// per offset: D_p wb^(l), indexed [p][l]
    d_w_at: Vec<[[T; 3]; 3]>,
    /// per offset: wb^(p)
    w_at: Vec<[T; 3]>,
}

impl<T: Coeff> JacobianTables<T> {
    pub fn new(omega_bar: &SpectralField<T>) -> Self {
        let m_w = biot_savart(omega_bar);
        let mk = |a: usize, l: usize, f: &SpectralField<T>| partial(a, &f.comps[l]);
        let d_mw: [[ScalarSeq<T>; 3]; 3] =
            std::array::from_fn(|m| std::array::from_fn(|l| mk(m, l, &m_w)));
        let d_w: [[ScalarSeq<T>; 3]; 3] =
            std::array::from_fn(|p| std::array::from_fn(|l| mk(p, l, omega_bar)));
        let mut offsets: std::collections::BTreeSet<MultiIndex> = std::collections::BTreeSet::new();
        offsets.extend(m_w.support_modes());
        offsets.extend(omega_bar.support_modes());
        let offsets: Vec<MultiIndex> = offsets.into_iter().collect();
        let get = |seq: &ScalarSeq<T>, s: &MultiIndex| seq.get(s).copied().unwrap_or_else(T::zero);
        let m_w_at = offsets
            .iter()
            .map(|s| std::array::from_fn(|p| m_w.get(&ModeKey::new(*s, p))))
            .collect();
        let d_mw_at = offsets
            .iter()
            .map(|s| std::array::from_fn(|m| std::array::from_fn(|l| get(&d_mw[m][l], s))))
            .collect();
        let d_w_at = offsets
            .iter()
            .map(|s| std::array::from_fn(|p| std::array::from_fn(|l| get(&d_w[p][l], s))))
            .collect();
        let w_at = offsets
            .iter()
            .map(|s| std::array::from_fn(|p| omega_bar.get(&ModeKey::new(*s, p))))
            .collect();
        Self {
            m_w,
            offsets,
            m_w_at,
            d_mw_at,
            d_w_at,
            w_at,
        }
    }

    /// Entries of the mode column (n, mcol) of DPsi(wbar): sparse rows
    /// (k, l) -> value over k = n + s for offsets s in the tables.
    pub fn dpsi_column(&self, n: &MultiIndex, mcol: usize) -> Vec<(ModeKey, T)> {
        let nsq = n.sp_sq();
        let m_num = crate::spectral::biot_savart_numerators(n);
        // M_n^(p, mcol) = i num[p][mcol] / nsq (zero when n~ = 0)
        let m_col: [Option<T>; 3] = std::array::from_fn(|p| {
            if nsq == 0 || m_num[p][mcol] == 0 {
                None
            } else {
                Some(T::one().mul_i().scale_int(m_num[p][mcol]).div_pos_int(nsq))
            }
        });
        let np = [n.n1 as i64, n.n2 as i64, n.n3 as i64];
        let mut out = Vec::with_capacity(self.offsets.len() * 2);
        for (si, s) in self.offsets.iter().enumerate() {
            let k = n.add(s);
            if k.is_origin() {
                continue;
            }
            let kp = [k.n1 as i64, k.n2 as i64, k.n3 as i64];
            for l in 0..3 {
                let mut acc = T::zero();
                let mut any = false;
                // term 1: delta_{l,m} sum_p k_p (M wb)^(p)_s
                if l == mcol {
                    for p in 0..3 {
                        let v = &self.m_w_at[si][p];
                        if kp[p] != 0 && !v.is_exact_zero() {
                            acc = acc.add(&v.scale_int(kp[p]));
                            any = true;
                        }
                    }
                }
                // term 2: -(D_mcol (M wb)^(l))_s
                let v2 = &self.d_mw_at[si][mcol][l];
                if !v2.is_exact_zero() {
                    acc = acc.sub(v2);
                    any = true;
                }
                // term 3: sum_p M_n^(p,mcol) (D_p wb^(l))_s
                for p in 0..3 {
                    if let Some(mv) = &m_col[p] {
                        let v = &self.d_w_at[si][p][l];
                        if !v.is_exact_zero() {
                            acc = acc.add(&mv.mul(v));
                            any = true;
                        }
                    }
                }
                // term 4: -sum_p n_p M_n^(l,mcol) wb^(p)_s
                if let Some(mv) = &m_col[l] {
                    for p in 0..3 {
                        let v = &self.w_at[si][p];
                        if np[p] != 0 && !v.is_exact_zero() {
                            acc = acc.add(&mv.scale_int(-np[p]).mul(v));
                            any = true;
                        }
                    }
                }
                if any {
                    let val = acc.mul_i();
                    if !val.is_exact_zero() {
                        out.push((ModeKey::new(k, l), val));
                    }
                }
            }
        }
        out
    }
}
