//! A-posteriori validation machinery: heat-symbol index sets, uniform tail
//! estimates, the approximate derivative and approximate inverse on the
//! symmetry-reduced finite block, the four bounds Y0 / Z0 / Z1 / Z2, and
//! the radii-polynomial verdict.
//!
//! The operator pair acts as the assembled finite block on the modes with
//! heat symbol at most N-dagger and diagonally (by the symbol, respectively
//! its reciprocal) on the rest. All bound computations return outward
//! enclosures; a report is only `success` when the contraction inequalities
//! hold for the upper endpoints.

use crate::error::{Error, Result};
use crate::spectral::{
    eta_pow, norm_compmax, norm_scalar, partial, Coeff, ModeKey, MultiIndex, SpectralField,
    SupportBox, WeightedNorm,
};
use crate::symmetry::{
    lift_sigma, orbit_data, symmetrize_input, OrbitCatalog, ReducedState,
};
use crate::vorticity::{residual_f, Forcing, JacobianTables, PhaseReference, State};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rigor::{ExactSum, RigorousComplex, RigorousReal};
use std::collections::{HashMap, HashSet};

/// Truncation parameters of a validation run.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct TruncationScheme {
    /// Rectangular support of the numerical solution.
    pub support: SupportBox,
    /// Heat-symbol cutoff of the finite block.
    pub ndagger: u32,
    /// Column cutoff of the truncation-defect bound; at least `ndagger`.
    pub ntilde: u32,
    /// Geometric weight of the coefficient norm (>= 1).
    pub eta: f64,
    /// Kinematic viscosity (> 0).
    pub nu: f64,
    /// Claim that one velocity component vanishes identically, enabling the
    /// sharper tail constant. Verified against the data before use.
    pub essentially_2d: bool,
}

impl TruncationScheme {
    pub fn validate(&self) -> Result<()> {
        if self.ntilde < self.ndagger {
            return Err(Error::SchemeInvalid(format!(
                "ntilde = {} < ndagger = {}",
                self.ntilde, self.ndagger
            )));
        }
        if !(self.eta >= 1.0) {
            return Err(Error::SchemeInvalid(format!("eta = {} < 1", self.eta)));
        }
        if !(self.nu > 0.0) {
            return Err(Error::SchemeInvalid(format!("nu = {} <= 0", self.nu)));
        }
        if self.ndagger == 0 {
            return Err(Error::SchemeInvalid("ndagger = 0".into()));
        }
        Ok(())
    }

    pub fn eta_interval(&self) -> RigorousReal {
        RigorousReal::point(self.eta)
    }
}

/// The diagonal symbol of the dominant linear part: lambda_n is the
/// reciprocal of nu n~^2 + i OmegaBar n4 and mu(n) its modulus.
#[derive(Clone, Copy, Debug)]
pub struct DiagonalTail {
    pub nu: RigorousReal,
    pub omega_bar: RigorousReal,
}

impl DiagonalTail {
    pub fn new(nu: f64, omega_bar: f64) -> Result<Self> {
        if !(nu > 0.0) || !(omega_bar > 0.0) {
            return Err(Error::SchemeInvalid(format!(
                "tail symbol needs nu > 0 and OmegaBar > 0, got {nu}, {omega_bar}"
            )));
        }
        Ok(Self {
            nu: RigorousReal::point(nu),
            omega_bar: RigorousReal::point(omega_bar),
        })
    }

    /// Real part nu n~^2 of the symbol.
    fn re(&self, n: &MultiIndex) -> RigorousReal {
        self.nu.scale_int(n.sp_sq())
    }

    /// Imaginary part OmegaBar n4.
    fn im(&self, n: &MultiIndex) -> RigorousReal {
        self.omega_bar.scale_int(n.n4 as i64)
    }

    /// mu(n) = |nu n~^2 + i OmegaBar n4|.
    pub fn mu(&self, n: &MultiIndex) -> RigorousReal {
        (self.re(n).square() + self.im(n).square())
            .sqrt()
            .expect("nonnegative")
    }

    /// lambda_n = 1 / (nu n~^2 + i OmegaBar n4); n must be nonzero.
    pub fn lambda(&self, n: &MultiIndex) -> RigorousComplex {
        debug_assert!(!n.is_origin());
        let den = self.re(n).square() + self.im(n).square();
        RigorousComplex::new(
            self.re(n).try_div(&den).expect("nonzero symbol"),
            (-self.im(n)).try_div(&den).expect("nonzero symbol"),
        )
    }

    /// |lambda_n| as an enclosure.
    pub fn lambda_abs(&self, n: &MultiIndex) -> RigorousReal {
        self.mu(n).recip().expect("nonzero symbol")
    }

    /// Conservative membership test for E(N): a mode whose mu enclosure
    /// straddles N is included (enlarging the finite set is always sound;
    /// the tail suprema then run over a subset of the true complement).
    pub fn in_e(&self, n: &MultiIndex, ncap: u32) -> bool {
        !n.is_origin() && self.mu(n).lo() <= ncap as f64
    }

    /// Smallest mu over the translates n - s, s in the box (attained at the
    /// componentwise clamp); lower endpoint. Used for Minkowski-sum
    /// membership tests n in E(N) + box.
    pub fn clamped_mu_lo(&self, n: &MultiIndex, b: &SupportBox) -> f64 {
        let clamp = |v: i32, r: u32| -> i32 {
            let r = r as i32;
            if v > r {
                v - r
            } else if v < -r {
                v + r
            } else {
                0
            }
        };
        let k = MultiIndex::new(
            clamp(n.n1, b.nx1),
            clamp(n.n2, b.nx2),
            clamp(n.n3, b.nx3),
            clamp(n.n4, b.nt),
        );
        self.mu(&k).lo()
    }
}

/// The exact finite set E(N) = {n != 0 : mu(n) <= N}, with conservative
/// inclusion of boundary straddlers. Sorted deterministically.
pub fn enumerate_e(ncap: u32, tail: &DiagonalTail) -> Vec<MultiIndex> {
    let sp_max = (ncap as f64 / tail.nu.lo()).sqrt().ceil() as i32 + 1;
    let t_max = (ncap as f64 / tail.omega_bar.lo()).ceil() as i32 + 1;
    let mut out = Vec::new();
    for n1 in -sp_max..=sp_max {
        for n2 in -sp_max..=sp_max {
            let s12 = (n1 as i64).pow(2) + (n2 as i64).pow(2);
            if tail.nu.lo() * s12 as f64 > ncap as f64 + 1.0 {
                continue;
            }
            for n3 in -sp_max..=sp_max {
                for n4 in -t_max..=t_max {
                    let n = MultiIndex::new(n1, n2, n3, n4);
                    if tail.in_e(&n, ncap) {
                        out.push(n);
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Count |E(N)| without materializing the set.
pub fn count_e(ncap: u32, tail: &DiagonalTail) -> usize {
    let sp_max = (ncap as f64 / tail.nu.lo()).sqrt().ceil() as i32 + 1;
    let t_max = (ncap as f64 / tail.omega_bar.lo()).ceil() as i32 + 1;
    let mut c = 0usize;
    for n1 in -sp_max..=sp_max {
        for n2 in -sp_max..=sp_max {
            for n3 in -sp_max..=sp_max {
                for n4 in -t_max..=t_max {
                    if tail.in_e(&MultiIndex::new(n1, n2, n3, n4), ncap) {
                        c += 1;
                    }
                }
            }
        }
    }
    c
}

/// Rigorous upper enclosures of the five tail suprema over n outside E(N):
/// |lambda|, |lambda| |n_m|, |lambda| sum |n_m| (and its two-component
/// sharpening), |lambda| |n|_inf.
#[derive(Clone, Copy, Debug)]
pub struct TailSupBounds {
    /// sup |lambda_n| <= 1/N
    pub lam: RigorousReal,
    /// sup |lambda_n| |n_m| <= 1/sqrt(nu N), each m
    pub lam_k: RigorousReal,
    /// sup |lambda_n| (|n_1|+|n_2|+|n_3|) <= sqrt(3)/sqrt(nu N)
    pub lam_sum3: RigorousReal,
    /// sup |lambda_n| sum_{m != p} |n_m| <= sqrt(2)/sqrt(nu N)
    pub lam_sum2: RigorousReal,
    /// sup |lambda_n| |n|_inf <= max(1/sqrt(nu N), 1/OmegaBar)
    pub lam_inf: RigorousReal,
}

pub fn tail_sup_bounds(ncap: u32, tail: &DiagonalTail) -> TailSupBounds {
    let ncap = RigorousReal::from_int(ncap as i64);
    let lam = ncap.recip().expect("N >= 1");
    let s = (tail.nu * ncap).sqrt().expect("positive");
    let lam_k = s.recip().expect("positive");
    let sqrt3 = RigorousReal::from_int(3).sqrt().unwrap();
    let sqrt2 = RigorousReal::from_int(2).sqrt().unwrap();
    let lam_sum3 = sqrt3.try_div(&s).unwrap();
    let lam_sum2 = sqrt2.try_div(&s).unwrap();
    let lam_inf = lam_k.max(&tail.omega_bar.recip().expect("positive"));
    TailSupBounds {
        lam,
        lam_k,
        lam_sum3,
        lam_sum2,
        lam_inf,
    }
}

/// Index map of the reduced finite block: slot 0 is the phase unknown, the
/// remaining slots are symmetric orbit representatives with modes in
/// E(N-dagger), sorted by (mu(n), lexicographic key).
#[derive(Clone, Debug)]
pub struct BlockIndex {
    pub keys: Vec<ModeKey>,
    pub slot: HashMap<ModeKey, usize>,
    /// xi^s weights per slot; slot 0 carries the unit frequency weight.
    pub weights: Vec<RigorousReal>,
    /// E(N-dagger) as a membership set over modes.
    pub e_dagger: HashSet<MultiIndex>,
}

impl BlockIndex {
    pub fn dim(&self) -> usize {
        self.keys.len() + 1
    }

    pub fn weight(&self, slot: usize) -> RigorousReal {
        self.weights[slot]
    }
}

pub fn build_block_index(
    scheme: &TruncationScheme,
    tail: &DiagonalTail,
    catalog: &OrbitCatalog,
) -> BlockIndex {
    let e_modes = enumerate_e(scheme.ndagger, tail);
    let group = catalog.group();
    let mut keys: Vec<ModeKey> = Vec::new();
    for n in &e_modes {
        for c in 0..3 {
            let j = ModeKey::new(*n, c);
            let data = orbit_data(group, &j);
            if data.symmetric && data.rep == j {
                keys.push(j);
            }
        }
    }
    keys.sort_by(|a, b| {
        let ma = tail.mu(&a.n).mid();
        let mb = tail.mu(&b.n).mid();
        ma.total_cmp(&mb).then(a.cmp(b))
    });
    let slot: HashMap<ModeKey, usize> = keys
        .iter()
        .enumerate()
        .map(|(i, j)| (*j, i + 1))
        .collect();
    let eta = scheme.eta_interval();
    let mut weights = vec![RigorousReal::one()];
    for j in &keys {
        let data = orbit_data(group, j);
        weights.push(eta_pow(&eta, j.n.l1()).scale_int(data.orbit_size as i64));
    }
    BlockIndex {
        keys,
        slot,
        weights,
        e_dagger: e_modes.into_iter().collect(),
    }
}

/// Sparse column-major block (the approximate derivative).
#[derive(Clone, Debug)]
pub struct SparseBlock {
    pub dim: usize,
    /// per column: (row, value) sorted by row
    pub cols: Vec<Vec<(u32, RigorousComplex)>>,
}

/// Dense column-major block (the approximate inverse; point intervals).
#[derive(Clone, Debug)]
pub struct DenseBlock {
    pub dim: usize,
    pub data: Vec<RigorousComplex>,
}

impl DenseBlock {
    pub fn at(&self, r: usize, c: usize) -> &RigorousComplex {
        &self.data[c * self.dim + r]
    }

    pub fn col(&self, c: usize) -> &[RigorousComplex] {
        &self.data[c * self.dim..(c + 1) * self.dim]
    }
}

/// Reduced column of DPsi at the lifted state, transported through the
/// symmetrization. Uses the equivariance of DPsi at symmetric states to
/// assemble everything from the single representative column: with one
/// witness g per orbit member of the column index,
/// `C^red_{j', j} = sum_g alpha_g(r)^{-1} C_{r, j}` over full rows r with
/// `beta_g(r) = j'`.
pub fn reduced_dpsi_column(
    tables: &JacobianTables<RigorousComplex>,
    catalog: &OrbitCatalog,
    j: &ModeKey,
) -> HashMap<ModeKey, RigorousComplex> {
    let group = catalog.group();
    debug_assert!({
        let data = orbit_data(group, j);
        data.symmetric && data.rep == *j
    });
    let mut witnesses: Vec<usize> = Vec::new();
    let mut seen: HashSet<ModeKey> = HashSet::new();
    for gi in 0..group.order() {
        if seen.insert(group.beta(gi, j)) {
            witnesses.push(gi);
        }
    }
    let mut out: HashMap<ModeKey, RigorousComplex> = HashMap::new();
    for (row, v) in tables.dpsi_column(&j.n, j.comp) {
        let rd = orbit_data(group, &row);
        if !rd.symmetric {
            continue;
        }
        for &gi in &witnesses {
            if group.beta(gi, &row) != rd.rep {
                continue;
            }
            let phase: RigorousComplex = crate::symmetry::UnitPhase::unit_from_turn(
                group.alpha_turn(gi, &row).neg().mod1(),
            );
            let add = phase.mul(&v);
            out.entry(rd.rep)
                .and_modify(|acc| *acc = acc.add(&add))
                .or_insert(add);
        }
    }
    out
}

/// The approximate derivative on the finite block: the reduced derivative
/// of the zero-finding map at the lifted state, restricted to slots of the
/// block index (diagonal heat symbol plus transported quadratic columns,
/// frequency column and phase row).
pub fn build_ahat(
    phi_bar: &ReducedState<RigorousComplex>,
    phi_hat: &ReducedState<RigorousComplex>,
    tail: &DiagonalTail,
    catalog: &OrbitCatalog,
    index: &BlockIndex,
) -> Result<SparseBlock> {
    let w_bar = lift_sigma(phi_bar, catalog)?;
    let tables = JacobianTables::new(&w_bar);
    let dim = index.dim();

    let mut cols: Vec<Vec<(u32, RigorousComplex)>> = (0..index.keys.len())
        .into_par_iter()
        .map(|ci| {
            let j = index.keys[ci];
            let mut entries: Vec<(u32, RigorousComplex)> = Vec::new();
            // phase row: i |G.j| n4 conj(phihat_j)
            let n4 = j.n.n4 as i64;
            if n4 != 0 {
                let h = phi_hat.get(&j);
                if !h.is_exact_zero() {
                    let osize = orbit_data(catalog.group(), &j).orbit_size as i64;
                    entries.push((0, h.conj().mul_i().scale_int(n4 * osize)));
                }
            }
            let mut body: HashMap<ModeKey, RigorousComplex> =
                reduced_dpsi_column(&tables, catalog, &j);
            // diagonal heat symbol
            let diag = RigorousComplex::new(
                tail.nu.scale_int(j.n.sp_sq()),
                tail.omega_bar.scale_int(n4),
            );
            body.entry(j)
                .and_modify(|v| *v = v.add(&diag))
                .or_insert(diag);
            for (row, v) in body {
                if let Some(&slot) = index.slot.get(&row) {
                    if !v.is_exact_zero() {
                        entries.push((slot as u32, v));
                    }
                }
            }
            entries.sort_by_key(|(r, _)| *r);
            entries
        })
        .collect();

    // frequency column (slot 0): i n4 phibar_j at block rows
    let mut omega_col: Vec<(u32, RigorousComplex)> = Vec::new();
    for (j, v) in &phi_bar.phi {
        if let Some(&slot) = index.slot.get(j) {
            if j.n.n4 != 0 {
                omega_col.push((slot as u32, v.mul_i().scale_int(j.n.n4 as i64)));
            }
        }
    }
    omega_col.sort_by_key(|(r, _)| *r);
    let mut all = Vec::with_capacity(dim);
    all.push(omega_col);
    all.append(&mut cols);
    Ok(SparseBlock { dim, cols: all })
}

/// Floating-point inverse of the midpoint of the finite block, stored as
/// point intervals; the diagonal tail inverts the heat symbol exactly, so
/// only this block is certified (through Z0).
pub fn build_a(ahat: &SparseBlock) -> Result<DenseBlock> {
    let dim = ahat.dim;
    let mut mid = DMatrix::<C64>::zeros(dim, dim);
    for (c, col) in ahat.cols.iter().enumerate() {
        for (r, v) in col {
            mid[(*r as usize, c)] = v.mid_c64();
        }
    }
    let inv = mid.clone().lu().try_inverse().ok_or(Error::SingularFiniteBlock)?;
    let mut data = Vec::with_capacity(dim * dim);
    for c in 0..dim {
        for r in 0..dim {
            let z = inv[(r, c)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::SingularFiniteBlock);
            }
            data.push(RigorousComplex::point(z.re, z.im));
        }
    }
    Ok(DenseBlock { dim, data })
}

/// w = A v for a sparse vector v over block slots; deterministic
/// accumulation in slot order.
fn dense_times_sparse(a: &DenseBlock, v: &[(u32, RigorousComplex)]) -> Vec<RigorousComplex> {
    let mut w = vec![RigorousComplex::zero(); a.dim];
    for (s, val) in v {
        let col = a.col(*s as usize);
        for r in 0..a.dim {
            let t = col[r].mul(val);
            if !t.is_exact_zero() {
                w[r] = w[r].add(&t);
            }
        }
    }
    w
}

/// Weighted block norm of a column vector: sum over slots of xi^s |w_slot|.
fn weighted_col_norm(w: &[RigorousComplex], index: &BlockIndex) -> RigorousReal {
    let mut lo = ExactSum::new();
    let mut hi = ExactSum::new();
    for (s, v) in w.iter().enumerate() {
        if v.is_exact_zero() {
            continue;
        }
        let t = v.abs() * index.weight(s);
        lo.add(t.lo());
        hi.add(t.hi());
    }
    RigorousReal::new(lo.round_down().max(0.0), hi.round_up())
}

/// Residual bound: the weighted norm of the approximate inverse applied to
/// the residual at the lifted state, finite part by the dense block and
/// tail part through the diagonal.
pub fn bound_y0(
    phi_bar: &ReducedState<RigorousComplex>,
    phi_hat: &ReducedState<RigorousComplex>,
    a: &DenseBlock,
    scheme: &TruncationScheme,
    tail: &DiagonalTail,
    catalog: &OrbitCatalog,
    index: &BlockIndex,
    forcing: &Forcing<RigorousComplex>,
) -> Result<RigorousReal> {
    let ssum = scheme.support.sum(&scheme.support);
    if !forcing.fomega.within_box(&ssum) {
        return Err(Error::ForcingSupport);
    }
    let w_bar = lift_sigma(phi_bar, catalog)?;
    let w_hat = lift_sigma(phi_hat, catalog)?;
    let state = State::new(phi_bar.omega, w_bar)?;
    let phase = PhaseReference::new(w_hat);
    let (fp, fr) = residual_f(&state, scheme.nu, forcing, &phase)?;

    // reduced residual: read at symmetric representatives
    let group = catalog.group();
    let mut fin: Vec<(u32, RigorousComplex)> = vec![(0, fp)];
    let mut tail_terms: Vec<(ModeKey, RigorousComplex)> = Vec::new();
    for (j, v) in fr.iter() {
        let data = orbit_data(group, &j);
        if !(data.symmetric && data.rep == j) {
            continue;
        }
        match index.slot.get(&j) {
            Some(&s) => fin.push((s as u32, *v)),
            None => tail_terms.push((j, *v)),
        }
    }
    fin.sort_by_key(|(s, _)| *s);
    let w = dense_times_sparse(a, &fin);
    let finite_part = weighted_col_norm(&w, index);

    let eta = scheme.eta_interval();
    let mut lo = ExactSum::new();
    let mut hi = ExactSum::new();
    tail_terms.sort_by_key(|(j, _)| *j);
    for (j, v) in tail_terms {
        let data = orbit_data(group, &j);
        let weight = eta_pow(&eta, j.n.l1()).scale_int(data.orbit_size as i64);
        let t = tail.lambda_abs(&j.n) * v.abs() * weight;
        lo.add(t.lo());
        hi.add(t.hi());
    }
    let tail_part = RigorousReal::new(lo.round_down().max(0.0), hi.round_up());
    Ok(finite_part + tail_part)
}

/// Approximate-inverse defect: the weighted column-sup norm of
/// I - A Ahat on the finite block (the tails are exact inverses).
pub fn bound_z0(a: &DenseBlock, ahat: &SparseBlock, index: &BlockIndex) -> RigorousReal {
    let norms: Vec<RigorousReal> = (0..ahat.dim)
        .into_par_iter()
        .map(|c| {
            let mut w = dense_times_sparse(a, &ahat.cols[c]);
            w[c] = w[c].sub(&RigorousComplex::one());
            let col_norm = weighted_col_norm(&w, index);
            col_norm.try_div(&index.weight(c)).expect("positive weight")
        })
        .collect();
    norms
        .into_iter()
        .fold(RigorousReal::zero(), |acc, x| acc.max(&x))
}

/// Output of the truncation-defect bound.
#[derive(Clone, Copy, Debug)]
pub struct Z1Bound {
    pub finite: RigorousReal,
    pub tail: RigorousReal,
    /// number of explicitly normed columns
    pub finite_columns: usize,
}

/// Truncation defect: explicit weighted column norms of A C over the
/// column set E(Ntilde) + support (plus the frequency column), and the
/// four-term uniform tail estimate with the lifted state, maximized over
/// the component index.
pub fn bound_z1(
    phi_bar: &ReducedState<RigorousComplex>,
    phi_hat: &ReducedState<RigorousComplex>,
    a: &DenseBlock,
    scheme: &TruncationScheme,
    tail: &DiagonalTail,
    catalog: &OrbitCatalog,
    index: &BlockIndex,
) -> Result<Z1Bound> {
    let group = catalog.group();
    let w_bar = lift_sigma(phi_bar, catalog)?;
    if !w_bar.within_box(&scheme.support) {
        return Err(Error::SchemeInvalid(
            "state support exceeds the scheme box".into(),
        ));
    }
    let tail_part = z1_tail(&w_bar, scheme, tail)?;

    let tables = JacobianTables::new(&w_bar);
    let eta = scheme.eta_interval();

    // explicit columns: n in E(Ntilde) + support box (clamped-mu test)
    let sp_max = (scheme.ntilde as f64 / tail.nu.lo()).sqrt().ceil() as i32 + 1;
    let t_max = (scheme.ntilde as f64 / tail.omega_bar.lo()).ceil() as i32 + 1;
    let b = &scheme.support;
    let (bx1, bx2, bx3, bt) = (b.nx1 as i32, b.nx2 as i32, b.nx3 as i32, b.nt as i32);
    let mut columns: Vec<ModeKey> = Vec::new();
    for n1 in -(sp_max + bx1)..=(sp_max + bx1) {
        for n2 in -(sp_max + bx2)..=(sp_max + bx2) {
            for n3 in -(sp_max + bx3)..=(sp_max + bx3) {
                for n4 in -(t_max + bt)..=(t_max + bt) {
                    let n = MultiIndex::new(n1, n2, n3, n4);
                    if n.is_origin() || tail.clamped_mu_lo(&n, b) > scheme.ntilde as f64 {
                        continue;
                    }
                    for c in 0..3 {
                        let j = ModeKey::new(n, c);
                        let d = orbit_data(group, &j);
                        if d.symmetric && d.rep == j {
                            columns.push(j);
                        }
                    }
                }
            }
        }
    }
    columns.sort();
    let n_cols = columns.len();

    let col_norms: Vec<RigorousReal> = columns
        .into_par_iter()
        .map(|j| z1_column_norm(&j, &tables, phi_hat, a, scheme, tail, catalog, index, &eta))
        .collect::<Result<Vec<_>>>()?;

    // frequency column of C: i n4 phibar at reduced rows outside the block
    let mut omega_norm = RigorousReal::zero();
    {
        let mut lo = ExactSum::new();
        let mut hi = ExactSum::new();
        for (j, v) in &phi_bar.phi {
            if index.slot.contains_key(j) || j.n.n4 == 0 {
                continue;
            }
            let d = orbit_data(group, j);
            let weight = eta_pow(&eta, j.n.l1()).scale_int(d.orbit_size as i64);
            let t = tail.lambda_abs(&j.n) * v.abs().scale_int(j.n.n4.unsigned_abs() as i64) * weight;
            lo.add(t.lo());
            hi.add(t.hi());
        }
        omega_norm = omega_norm.max(&RigorousReal::new(lo.round_down().max(0.0), hi.round_up()));
    }

    let finite = col_norms
        .into_iter()
        .fold(omega_norm, |acc, x| acc.max(&x));
    Ok(Z1Bound {
        finite,
        tail: tail_part,
        finite_columns: n_cols + 1,
    })
}

/// Weighted norm of one explicit column of A C, divided by the column
/// weight.
#[allow(clippy::too_many_arguments)]
fn z1_column_norm(
    j: &ModeKey,
    tables: &JacobianTables<RigorousComplex>,
    phi_hat: &ReducedState<RigorousComplex>,
    a: &DenseBlock,
    scheme: &TruncationScheme,
    tail: &DiagonalTail,
    catalog: &OrbitCatalog,
    index: &BlockIndex,
    eta: &RigorousReal,
) -> Result<RigorousReal> {
    let group = catalog.group();
    let col_weight = eta_pow(eta, j.n.l1()).scale_int(orbit_data(group, j).orbit_size as i64);
    let in_block = index.slot.contains_key(j);
    let touches_block =
        in_block || tail.clamped_mu_lo(&j.n, &scheme.support) <= scheme.ndagger as f64;
    let in_support = scheme.support.contains(&j.n);

    if !touches_block && !in_support {
        // Tail-only column: bound by the unreduced single-representative
        // column sum (the symmetrized column norm is bounded by it).
        let mut lo = ExactSum::new();
        let mut hi = ExactSum::new();
        for (row, v) in tables.dpsi_column(&j.n, j.comp) {
            let t = tail.lambda_abs(&row.n) * v.abs() * eta_pow(eta, row.n.l1());
            lo.add(t.lo());
            hi.add(t.hi());
        }
        let s = RigorousReal::new(lo.round_down().max(0.0), hi.round_up());
        return s.try_div(&eta_pow(eta, j.n.l1())).map_err(Into::into);
    }

    // transported column with rows split between the block and the tail
    let body = reduced_dpsi_column(tables, catalog, j);
    let mut fin: Vec<(u32, RigorousComplex)> = Vec::new();
    let mut lo = ExactSum::new();
    let mut hi = ExactSum::new();
    let mut rows: Vec<(ModeKey, RigorousComplex)> = body.into_iter().collect();
    rows.sort_by_key(|(r, _)| *r);
    for (row, v) in rows {
        match index.slot.get(&row) {
            Some(&s) => {
                if !in_block {
                    fin.push((s as u32, v));
                }
                // in-block columns have their block rows inside Ahat: C = 0
            }
            None => {
                let d = orbit_data(group, &row);
                let weight = eta_pow(eta, row.n.l1()).scale_int(d.orbit_size as i64);
                let t = tail.lambda_abs(&row.n) * v.abs() * weight;
                lo.add(t.lo());
                hi.add(t.hi());
            }
        }
    }
    // phase row entry for support columns outside the block
    if !in_block && in_support && j.n.n4 != 0 {
        let h = phi_hat.get(j);
        if !h.is_exact_zero() {
            let osize = orbit_data(group, j).orbit_size as i64;
            fin.push((0, h.conj().mul_i().scale_int(j.n.n4 as i64 * osize)));
        }
    }
    let mut norm = RigorousReal::new(lo.round_down().max(0.0), hi.round_up());
    if !fin.is_empty() {
        fin.sort_by_key(|(s, _)| *s);
        let w = dense_times_sparse(a, &fin);
        norm = norm + weighted_col_norm(&w, index);
    }
    norm.try_div(&col_weight).map_err(Into::into)
}

/// The four-term tail formula with the lifted state, maximized over the
/// component index; uses the two-component constant for verified
/// essentially-2D data.
fn z1_tail(
    w_bar: &SpectralField<RigorousComplex>,
    scheme: &TruncationScheme,
    tail: &DiagonalTail,
) -> Result<RigorousReal> {
    let eta = scheme.eta_interval();
    let plain = WeightedNorm::plain(eta);
    let u_bar = crate::spectral::biot_savart(w_bar);

    let coef = if scheme.essentially_2d {
        if !(0..3).any(|p| u_bar.comps[p].is_empty()) {
            let worst = (0..3)
                .max_by_key(|&p| u_bar.comps[p].len())
                .unwrap_or(2);
            return Err(Error::NotActually2D(worst + 1));
        }
        RigorousReal::from_int(2).sqrt().unwrap()
    } else {
        RigorousReal::from_int(3).sqrt().unwrap()
    };
    let ntilde = RigorousReal::from_int(scheme.ntilde as i64);
    let sqrt_nu_n = (tail.nu * ntilde).sqrt().unwrap();
    let inv_n = ntilde.recip().unwrap();

    let compmax = norm_compmax(&u_bar, &eta);
    let w_norms: Vec<RigorousReal> = (0..3)
        .map(|p| norm_scalar(&w_bar.comps[p], &plain))
        .collect();
    let d_mw = |m: usize, l: usize| norm_scalar(&partial(m, &u_bar.comps[l]), &plain);
    let d_w = |p: usize, l: usize| norm_scalar(&partial(p, &w_bar.comps[l]), &plain);

    let mut best = RigorousReal::zero();
    for m in 0..3 {
        let mut t = coef.try_div(&sqrt_nu_n).unwrap() * compmax;
        // sum_p (1 + (1 - delta_{p,m})/2) ||w^(p)||, avoiding enclosure
        // subtraction
        let mut s = RigorousReal::zero();
        for p in 0..3 {
            let c = if p == m {
                RigorousReal::one()
            } else {
                RigorousReal::new(1.5, 1.5)
            };
            s = s + c * w_norms[p];
        }
        t = t + inv_n * s;
        let mut s2 = RigorousReal::zero();
        for l in 0..3 {
            s2 = s2 + d_mw(m, l);
            for p in 0..3 {
                if p != m {
                    s2 = s2 + d_w(p, l);
                }
            }
        }
        t = t + inv_n * s2;
        best = best.max(&t);
    }
    Ok(best)
}

/// Lipschitz bound of the derivative difference: (4 + sqrt 2) times the
/// weighted operator norm of A from the derivative-loss space, taking the
/// larger of the explicit column norms and the diagonal tail constant.
pub fn bound_z2(
    a: &DenseBlock,
    scheme: &TruncationScheme,
    tail: &DiagonalTail,
    index: &BlockIndex,
) -> RigorousReal {
    let sup = tail_sup_bounds(scheme.ndagger, tail);
    let col_norms: Vec<RigorousReal> = (1..a.dim)
        .into_par_iter()
        .map(|c| {
            let w = a.col(c);
            let norm = weighted_col_norm(w, index);
            let j = index.keys[c - 1];
            // 1/xitilde = |n|_inf / xi^s
            norm.scale_int(j.n.linf())
                .try_div(&index.weight(c))
                .expect("positive weight")
        })
        .collect();
    let norm_a = col_norms
        .into_iter()
        .fold(sup.lam_inf, |acc, x| acc.max(&x));
    let factor = RigorousReal::from_int(4) + RigorousReal::from_int(2).sqrt().unwrap();
    factor * norm_a
}

/// Verdict of the radii-polynomial inequalities.
#[derive(Clone, Copy, Debug)]
pub struct RadiiOutcome {
    pub success: bool,
    pub rmin: Option<RigorousReal>,
    pub rmax: Option<RigorousReal>,
    /// 1 - (Z0 + Z1) at upper endpoints; must be positive
    pub contraction_margin: f64,
    /// (1 - (Z0+Z1))^2 - 2 Y0 Z2 at upper endpoints; must be positive
    pub discriminant_margin: f64,
}

/// Closed-form radii-polynomial check: both inequalities are evaluated at
/// the upper endpoints; on success the minimal radius is rounded up and the
/// maximal rounded down.
pub fn radii_polynomial(
    y0: RigorousReal,
    z0: RigorousReal,
    z1: RigorousReal,
    z2: RigorousReal,
) -> RadiiOutcome {
    let z = z0 + z1;
    let one = RigorousReal::one();
    let gap = one - RigorousReal::point(z.hi());
    let contraction_margin = gap.lo();
    let disc = RigorousReal::point(gap.lo()).square()
        - RigorousReal::point(2.0) * RigorousReal::point(y0.hi()) * RigorousReal::point(z2.hi());
    let discriminant_margin = disc.lo();
    let success = z.hi() < 1.0 && discriminant_margin > 0.0 && y0.is_finite() && z2.is_finite();
    if !success {
        return RadiiOutcome {
            success: false,
            rmin: None,
            rmax: None,
            contraction_margin,
            discriminant_margin,
        };
    }
    // interval evaluation of the closed forms
    let gap_iv = one - z;
    let disc_iv = gap_iv.square() - RigorousReal::point(2.0) * y0 * z2;
    let sqrt_disc = disc_iv
        .max(&RigorousReal::zero())
        .sqrt()
        .expect("nonnegative discriminant");
    let rmin = (gap_iv - sqrt_disc).try_div(&z2).expect("positive Z2");
    let rmax = gap_iv.try_div(&z2).expect("positive Z2");
    RadiiOutcome {
        success: true,
        rmin: Some(rmin.max(&RigorousReal::zero())),
        rmax: Some(rmax),
        contraction_margin,
        discriminant_margin,
    }
}

/// Full bounds report of a validation run.
#[derive(Clone, Debug)]
pub struct BoundsReport {
    pub scheme: TruncationScheme,
    pub omega_bar: f64,
    pub y0: RigorousReal,
    pub z0: RigorousReal,
    pub z1_finite: RigorousReal,
    pub z1_tail: RigorousReal,
    pub z2: RigorousReal,
    pub success: bool,
    pub rmin: Option<RigorousReal>,
    pub rmax: Option<RigorousReal>,
    pub contraction_margin: f64,
    pub discriminant_margin: f64,
    pub block_dim: usize,
    pub e_dagger_modes: usize,
    pub z1_columns: usize,
    pub timing_ms: Vec<(String, u128)>,
}

impl BoundsReport {
    pub fn z1(&self) -> RigorousReal {
        self.z1_finite.max(&self.z1_tail)
    }

    /// Human-readable attribution of the failing inequality, if any.
    pub fn failure_attribution(&self) -> Option<String> {
        if self.success {
            return None;
        }
        if self.contraction_margin <= 0.0 {
            Some(format!(
                "contraction inequality failed: Z0 + Z1 = {:.6e} >= 1 (margin {:.6e})",
                self.z0.hi() + self.z1().hi(),
                self.contraction_margin
            ))
        } else {
            Some(format!(
                "discriminant inequality failed: 2 Y0 Z2 = {:.6e} > (1 - (Z0+Z1))^2 = {:.6e} (margin {:.6e})",
                2.0 * self.y0.hi() * self.z2.hi(),
                self.contraction_margin * self.contraction_margin,
                self.discriminant_margin
            ))
        }
    }
}

/// End-to-end validation: symmetrize the candidate, build the operator
/// pair, evaluate the four bounds and check the radii polynomial.
pub fn validate(
    phi_bar: &ReducedState<RigorousComplex>,
    scheme: &TruncationScheme,
    catalog: &mut OrbitCatalog,
    forcing: &Forcing<RigorousComplex>,
) -> Result<BoundsReport> {
    scheme.validate()?;
    forcing.validate()?;
    let t_start = std::time::Instant::now();
    let mut timing: Vec<(String, u128)> = Vec::new();
    let mut lap = std::time::Instant::now();
    let mark = |timing: &mut Vec<(String, u128)>, lap: &mut std::time::Instant, name: &str| {
        timing.push((name.into(), lap.elapsed().as_millis()));
        *lap = std::time::Instant::now();
    };

    // catalog coverage for the small sets handled through it
    let mut cover: Vec<ModeKey> = phi_bar.phi.keys().copied().collect();
    for n in scheme.support.sum(&scheme.support).iter_nonzero() {
        for c in 0..3 {
            cover.push(ModeKey::new(n, c));
        }
    }
    catalog.ensure_modes(cover);

    let phi0 = symmetrize_input(phi_bar, catalog)?;
    let omega_bar = {
        let (re, im) = (phi0.omega.re.mid(), phi0.omega.im.mid());
        debug_assert!(im.abs() < 1e-12, "frequency not real after symmetrization");
        let _ = im;
        re
    };
    if !(omega_bar > 0.0) {
        return Err(Error::SchemeInvalid(format!(
            "nonpositive frequency {omega_bar}"
        )));
    }
    let phi0 = ReducedState {
        omega: RigorousComplex::from_real(phi0.omega.re),
        phi: phi0.phi.clone(),
    };
    // default phase reference: the symmetrized state itself
    let phi_hat = phi0.clone();
    let tail = DiagonalTail::new(scheme.nu, omega_bar)?;
    mark(&mut timing, &mut lap, "symmetrize");

    let index = build_block_index(scheme, &tail, catalog);
    mark(&mut timing, &mut lap, "index");
    let ahat = build_ahat(&phi0, &phi_hat, &tail, catalog, &index)?;
    mark(&mut timing, &mut lap, "ahat");
    let a = build_a(&ahat)?;
    mark(&mut timing, &mut lap, "invert");
    let y0 = bound_y0(&phi0, &phi_hat, &a, scheme, &tail, catalog, &index, forcing)?;
    mark(&mut timing, &mut lap, "y0");
    let z0 = bound_z0(&a, &ahat, &index);
    mark(&mut timing, &mut lap, "z0");
    let z1 = bound_z1(&phi0, &phi_hat, &a, scheme, &tail, catalog, &index)?;
    mark(&mut timing, &mut lap, "z1");
    let z2 = bound_z2(&a, scheme, &tail, &index);
    mark(&mut timing, &mut lap, "z2");

    for (name, b) in [("Y0", &y0), ("Z0", &z0), ("Z1f", &z1.finite), ("Z1t", &z1.tail), ("Z2", &z2)]
    {
        if !b.is_finite() || b.lo() < 0.0 {
            return Err(Error::SchemeInvalid(format!(
                "bound {name} is not a finite nonnegative enclosure: {b:?}"
            )));
        }
    }

    let outcome = radii_polynomial(y0, z0, z1.finite.max(&z1.tail), z2);
    timing.push(("total".into(), t_start.elapsed().as_millis()));
    Ok(BoundsReport {
        scheme: *scheme,
        omega_bar,
        y0,
        z0,
        z1_finite: z1.finite,
        z1_tail: z1.tail,
        z2,
        success: outcome.success,
        rmin: outcome.rmin,
        rmax: outcome.rmax,
        contraction_margin: outcome.contraction_margin,
        discriminant_margin: outcome.discriminant_margin,
        block_dim: index.dim(),
        e_dagger_modes: index.e_dagger.len(),
        z1_columns: z1.finite_columns,
        timing_ms: timing,
    })
}

/// Non-binding parameter suggestion: grow the solution box until the
/// predicted 2 Y0 Z2 is about 1e-2, then pick the column cutoff from the
/// tail formula and a block cutoff below it.
pub struct ParameterSuggestion {
    pub target_product: f64,
    pub predicted_product: f64,
    pub suggested_ntilde: u32,
    pub suggested_ndagger: u32,
    pub note: String,
}

pub fn suggest_parameters(
    residual_norm: f64,
    omega_bar: f64,
    scheme: &TruncationScheme,
    state_norms: f64,
) -> ParameterSuggestion {
    let z2_guess = (4.0 + std::f64::consts::SQRT_2) * (1.0 / omega_bar).max(0.5);
    let product = 2.0 * residual_norm * z2_guess;
    let target: f64 = 1e-2;
    // tail ~ c * ||w|| / sqrt(nu Ntilde) + ...: solve for tail ~ 1 - sqrt(target)
    let budget = 1.0 - target.sqrt();
    let c = 3f64.sqrt() * state_norms;
    let ntilde = ((c / budget).powi(2) / scheme.nu).ceil().max(8.0) as u32;
    let ndagger = (ntilde / 2).max(4);
    let note = if product > target {
        "residual too large: grow the solution box before raising cutoffs".to_string()
    } else {
        "residual is small enough; cutoffs sized from the tail formula".to_string()
    };
    ParameterSuggestion {
        target_product: target,
        predicted_product: product,
        suggested_ntilde: ntilde,
        suggested_ndagger: ndagger,
        note,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::taylor_green_16;

    fn tail_025() -> DiagonalTail {
        DiagonalTail::new(0.25, 1.0).unwrap()
    }

    #[test]
    fn mu_examples() {
        let t = tail_025();
        // nu = 0.25, OmegaBar = 1, n = (2,0,0,3): |1 + 3i| = sqrt(10)
        let m = t.mu(&MultiIndex::new(2, 0, 0, 3));
        assert!(m.contains(10f64.sqrt()));
        assert!(m.width() < 1e-14);
        assert!(t.mu(&MultiIndex::ZERO).contains(0.0));
        // monotone in |n4| at fixed spatial part
        let mut prev = t.mu(&MultiIndex::new(1, 1, 0, 0)).hi();
        for n4 in 1..6 {
            let cur = t.mu(&MultiIndex::new(1, 1, 0, n4)).lo();
            assert!(cur >= prev - 1e-12);
            prev = t.mu(&MultiIndex::new(1, 1, 0, n4)).hi();
        }
    }

    #[test]
    fn lambda_is_reciprocal_of_symbol() {
        let t = DiagonalTail::new(0.3, 0.7).unwrap();
        let n = MultiIndex::new(1, -2, 0, 3);
        let lam = t.lambda(&n);
        let sym = RigorousComplex::new(
            t.nu.scale_int(n.sp_sq()),
            t.omega_bar.scale_int(n.n4 as i64),
        );
        let prod = lam.mul(&sym);
        assert!(prod.contains(1.0, 0.0));
        assert!(t.lambda_abs(&n).overlaps(&lam.abs()));
    }

    #[test]
    fn enumerate_e_basic_properties() {
        let t = tail_025();
        let e10 = enumerate_e(10, &t);
        let e20 = enumerate_e(20, &t);
        assert!(e10.len() < e20.len());
        let set20: HashSet<MultiIndex> = e20.iter().copied().collect();
        for n in &e10 {
            assert!(set20.contains(n), "E(10) not inside E(20)");
            assert!(set20.contains(&n.neg()), "E not symmetric under negation");
            assert!(!n.is_origin());
            // necessary condition: spatial part below N/nu
            assert!(0.25 * n.sp_sq() as f64 <= 10.0 + 1e-9);
        }
        assert_eq!(count_e(10, &t), e10.len());
    }

    #[test]
    fn tail_sup_bound_values() {
        // N = 100, nu = 0.25: 1/sqrt(nu N) = 1/5
        let t = tail_025();
        let s = tail_sup_bounds(100, &t);
        assert!(s.lam_k.contains(0.2));
        assert!(s.lam.contains(0.01));
        assert!(s.lam_sum3.contains(3f64.sqrt() / 5.0));
        assert!(s.lam_sum2.contains(2f64.sqrt() / 5.0));
        // lam_inf = max(1/5, 1/1) = 1
        assert!(s.lam_inf.contains(1.0));
        // exactly representable check at a power-of-two cutoff
        let s2 = tail_sup_bounds(128, &t);
        assert_eq!(s2.lam.lo(), 1.0 / 128.0);
        assert_eq!(s2.lam.hi(), 1.0 / 128.0);
    }

    /// Exhaustive oracle on a small box: every claimed supremum dominates
    /// the directly computed quantity outside E(N).
    #[test]
    fn tail_bounds_dominate_direct_scan_small() {
        let t = DiagonalTail::new(0.3, 0.8).unwrap();
        let ncap = 12u32;
        let s = tail_sup_bounds(ncap, &t);
        for n1 in -10..=10i32 {
            for n2 in -10..=10i32 {
                for n3 in -6..=6i32 {
                    for n4 in -14..=14i32 {
                        let n = MultiIndex::new(n1, n2, n3, n4);
                        if n.is_origin() || t.in_e(&n, ncap) {
                            continue;
                        }
                        let la = t.lambda_abs(&n);
                        assert!(la.hi() <= s.lam.hi() + 1e-15);
                        for m in 0..3 {
                            let q = la.scale_int(n.get(m).unsigned_abs() as i64);
                            assert!(q.hi() <= s.lam_k.hi() * (1.0 + 1e-12));
                        }
                        let sum3 = n.n1.unsigned_abs() as i64
                            + n.n2.unsigned_abs() as i64
                            + n.n3.unsigned_abs() as i64;
                        assert!(la.scale_int(sum3).hi() <= s.lam_sum3.hi() * (1.0 + 1e-12));
                        assert!(la.scale_int(n.linf()).hi() <= s.lam_inf.hi() * (1.0 + 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn radii_polynomial_closed_form() {
        // Y0 = 0.1, Z0+Z1 = 0.5, Z2 = 1 -> rmin = 0.5 - sqrt(0.05), rmax = 0.5
        let out = radii_polynomial(
            RigorousReal::point(0.1),
            RigorousReal::point(0.25),
            RigorousReal::point(0.25),
            RigorousReal::point(1.0),
        );
        assert!(out.success);
        let rmin = out.rmin.unwrap();
        let rmax = out.rmax.unwrap();
        assert!(rmin.contains(0.5 - 0.05f64.sqrt()));
        assert!((rmin.mid() - 0.2763932022500210).abs() < 1e-12);
        assert!(rmax.contains(0.5));

        // Y0 = 0 gives rmin = 0
        let out0 = radii_polynomial(
            RigorousReal::zero(),
            RigorousReal::point(0.25),
            RigorousReal::point(0.25),
            RigorousReal::point(1.0),
        );
        assert!(out0.success);
        assert!(out0.rmin.unwrap().contains(0.0));

        // Z0 + Z1 >= 1 fails regardless of Y0
        let bad = radii_polynomial(
            RigorousReal::zero(),
            RigorousReal::point(0.6),
            RigorousReal::point(0.5),
            RigorousReal::point(1.0),
        );
        assert!(!bad.success);
        assert!(bad.contraction_margin <= 0.0);
    }

    #[test]
    fn block_index_round_trips() {
        let scheme = TruncationScheme {
            support: SupportBox::new(2, 2, 0, 1),
            ndagger: 3,
            ntilde: 6,
            eta: 1.0,
            nu: 0.5,
            essentially_2d: true,
        };
        let tail = DiagonalTail::new(0.5, 1.0).unwrap();
        let catalog = OrbitCatalog::new(taylor_green_16());
        let index = build_block_index(&scheme, &tail, &catalog);
        assert!(index.dim() > 1);
        for (i, j) in index.keys.iter().enumerate() {
            assert_eq!(index.slot[j], i + 1);
        }
        // sorted by mu then lex
        for w in index.keys.windows(2) {
            let (a, b) = (tail.mu(&w[0].n).mid(), tail.mu(&w[1].n).mid());
            assert!(a < b || (a == b && w[0] < w[1]));
        }
    }

    /// The transported single-representative assembly agrees with the
    /// direct sum over orbit members.
    #[test]
    fn transported_columns_match_direct_assembly() {
        use crate::symmetry::{group_average, UnitPhase};
        use rand::{Rng, SeedableRng};
        let group = taylor_green_16();
        let mut catalog = OrbitCatalog::new(group.clone());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(91);
        // random symmetric state
        let mut raw = crate::spectral::SpectralField::<RigorousComplex>::new();
        for _ in 0..14 {
            let n = MultiIndex::new(
                rng.gen_range(-2..=2),
                rng.gen_range(-2..=2),
                0,
                rng.gen_range(-2..=2),
            );
            if n.is_origin() {
                continue;
            }
            raw.set(
                ModeKey::new(n, rng.gen_range(0..3)),
                RigorousComplex::point(
                    rng.gen_range(-16i64..=16) as f64 / 8.0,
                    rng.gen_range(-16i64..=16) as f64 / 8.0,
                ),
            );
        }
        let w_bar = group_average(&raw, &group);
        let mut cover = vec![];
        for (jj, _) in w_bar.iter() {
            cover.push(jj);
        }
        for n1 in -3..=3 {
            for n2 in -3..=3 {
                for n4 in -3..=3 {
                    let n = MultiIndex::new(n1, n2, 0, n4);
                    if !n.is_origin() {
                        for c in 0..3 {
                            cover.push(ModeKey::new(n, c));
                        }
                    }
                }
            }
        }
        catalog.ensure_modes(cover);
        let tables = JacobianTables::new(&w_bar);

        let direct = |j: &ModeKey| -> HashMap<ModeKey, RigorousComplex> {
            let mut out: HashMap<ModeKey, RigorousComplex> = HashMap::new();
            let mut seen = HashSet::new();
            for gi in 0..group.order() {
                let member = group.beta(gi, j);
                if !seen.insert(member) {
                    continue;
                }
                let phase: RigorousComplex =
                    UnitPhase::unit_from_turn(group.alpha_turn(gi, j).neg().mod1());
                for (row, v) in tables.dpsi_column(&member.n, member.comp) {
                    let rd = orbit_data(&group, &row);
                    if rd.symmetric && rd.rep == row {
                        let add = phase.mul(&v);
                        out.entry(row)
                            .and_modify(|acc| *acc = acc.add(&add))
                            .or_insert(add);
                    }
                }
            }
            out
        };

        let mut tested = 0;
        for n1 in -2..=2 {
            for n2 in -2..=2 {
                for n4 in -2..=2 {
                    let n = MultiIndex::new(n1, n2, 0, n4);
                    if n.is_origin() {
                        continue;
                    }
                    for c in 0..3 {
                        let j = ModeKey::new(n, c);
                        let d = orbit_data(&group, &j);
                        if !(d.symmetric && d.rep == j) {
                            continue;
                        }
                        let a = reduced_dpsi_column(&tables, &catalog, &j);
                        let b = direct(&j);
                        let keys: HashSet<ModeKey> =
                            a.keys().chain(b.keys()).copied().collect();
                        for k in keys {
                            let va = a.get(&k).copied().unwrap_or(RigorousComplex::zero());
                            let vb = b.get(&k).copied().unwrap_or(RigorousComplex::zero());
                            assert!(
                                va.overlaps(&vb),
                                "column {j} row {k}: {va:?} vs {vb:?}"
                            );
                        }
                        tested += 1;
                    }
                }
            }
        }
        assert!(tested > 10);
    }

    #[test]
    fn z0_zero_for_exact_inverse_and_sensitive_to_perturbation() {
        // diagonal-only Ahat: A is the exact reciprocal diagonal up to
        // rounding, Z0 ~ 0
        let dim = 6;
        let mut cols = Vec::new();
        for c in 0..dim {
            let v = RigorousComplex::point(1.0 + c as f64, 0.5 * c as f64);
            cols.push(vec![(c as u32, v)]);
        }
        let ahat = SparseBlock { dim, cols };
        let a = build_a(&ahat).unwrap();
        let index = BlockIndex {
            keys: (1..dim)
                .map(|i| ModeKey::new(MultiIndex::new(i as i32, 0, 0, 0), 0))
                .collect(),
            slot: (1..dim)
                .map(|i| (ModeKey::new(MultiIndex::new(i as i32, 0, 0, 0), 0), i))
                .collect(),
            weights: (0..dim).map(|_| RigorousReal::one()).collect(),
            e_dagger: HashSet::new(),
        };
        let z0 = bound_z0(&a, &ahat, &index);
        assert!(z0.hi() < 1e-14, "z0 = {z0:?}");

        // perturb one entry of A by eps: Z0 >= eps * weight ratio
        let mut a2 = a.clone();
        let eps = 1e-3;
        let idx = 2 * dim + 4;
        a2.data[idx] = a2.data[idx].add(&RigorousComplex::point(eps, 0.0));
        let z0p = bound_z0(&a2, &ahat, &index);
        // column 2 of A Ahat changes by eps * ahat[2,2]
        let scale = ahat.cols[2][0].1.abs().lo();
        assert!(z0p.hi() >= eps * scale * 0.99, "z0 = {z0p:?}");
    }
}
