//! Finite symmetry groups acting on Fourier modes: physical generators,
//! induced index/phase actions, trivial/symmetric classification, the
//! fundamental-domain reduction with its lift and projection, and the
//! conjugation involution on reduced variables.
//!
//! A physical symmetry acts on a velocity field as
//! `[a_g u](x, t) = C^T u(C x + 2 pi Ctilde, t + 2 pi D / Omega)` with `C` a
//! signed permutation matrix and rational shifts. On vorticity coefficients
//! this induces `(gamma_g w)_j = alpha_g(j) w_{beta_g(j)}` where `beta`
//! permutes mode keys and `alpha` is a root of unity kept in exact rational
//! phase arithmetic.

use crate::error::{Error, Result};
use crate::spectral::{Coeff, CoeffAcc, ModeKey, MultiIndex, SpectralField};
use num_complex::Complex64 as C64;
use rigor::{RigorousComplex, RigorousReal};
use std::collections::HashMap;

/// Reduced fraction with positive denominator; exact shift/phase bookkeeping.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Frac {
    num: i64,
    den: i64,
}

impl Frac {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let s = if den < 0 { -1 } else { 1 };
        let (num, den) = (num * s, den * s);
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub const ZERO: Self = Self { num: 0, den: 1 };

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }

    pub fn neg(&self) -> Self {
        Self {
            num: -self.num,
            den: self.den,
        }
    }

    pub fn mul_int(&self, k: i64) -> Self {
        Self::new(self.num * k, self.den)
    }

    /// Representative in [0, 1).
    pub fn mod1(&self) -> Self {
        Self {
            num: self.num.rem_euclid(self.den),
            den: self.den,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Enclosure of pi.
fn pi_interval() -> RigorousReal {
    // fl(pi) lies below pi
    RigorousReal::new(std::f64::consts::PI, std::f64::consts::PI.next_up())
}

/// Enclosure of cos(2 pi t) for a rational turn t, by exact quadrant
/// reduction and an alternating Taylor tail on [0, pi/2].
fn cos_turn_interval(t: Frac) -> RigorousReal {
    let t = t.mod1();
    // quadrant k = floor(4t), remainder r = t - k/4 in [0, 1/4)
    let k = (4 * t.num).div_euclid(t.den);
    let r = t.add(&Frac::new(-k, 4)).mod1();
    debug_assert!(r.num * 4 < r.den || r.is_zero());
    let x = RigorousReal::point(2.0)
        * pi_interval()
        * RigorousReal::from_int(r.num).try_div(&RigorousReal::from_int(r.den)).unwrap();
    let (c, s) = cos_sin_small(x);
    match k.rem_euclid(4) {
        0 => c,
        1 => -s,
        2 => -c,
        _ => s,
    }
}

fn sin_turn_interval(t: Frac) -> RigorousReal {
    cos_turn_interval(t.add(&Frac::new(-1, 4)))
}

/// cos and sin on [0, pi/2) by alternating series with bracketing partial
/// sums (terms decrease monotonically there).
fn cos_sin_small(x: RigorousReal) -> (RigorousReal, RigorousReal) {
    let x2 = x.square();
    let mut cos_terms = vec![RigorousReal::one()];
    let mut sin_terms = vec![x];
    let mut tc = RigorousReal::one();
    let mut ts = x;
    for k in 1..12 {
        let dc = RigorousReal::from_int((2 * k - 1) * (2 * k));
        tc = (tc * x2).try_div(&dc).unwrap();
        cos_terms.push(tc);
        let ds = RigorousReal::from_int((2 * k) * (2 * k + 1));
        ts = (ts * x2).try_div(&ds).unwrap();
        sin_terms.push(ts);
    }
    (alternating_sum(&cos_terms), alternating_sum(&sin_terms))
}

fn alternating_sum(terms: &[RigorousReal]) -> RigorousReal {
    // partial sums bracket the limit once terms decrease
    let mut partial = RigorousReal::zero();
    let mut prev = RigorousReal::new(f64::NEG_INFINITY, f64::INFINITY);
    for (k, t) in terms.iter().enumerate() {
        partial = if k % 2 == 0 { partial + *t } else { partial - *t };
        if k + 1 == terms.len() {
            // enclose between the last two partial sums
            return partial.hull(&prev).max(&RigorousReal::new(-1.0, -1.0)).min(&RigorousReal::new(1.0, 1.0));
        }
        prev = partial;
    }
    partial
}

/// Scalar types that can represent the unit phase e^{2 pi i t}: exactly for
/// quarter turns, as an enclosure (or float approximation) otherwise.
pub trait UnitPhase: Coeff {
    fn unit_from_turn(t: Frac) -> Self;
}

impl UnitPhase for C64 {
    fn unit_from_turn(t: Frac) -> Self {
        if let Some(z) = quarter_turn(t) {
            return C64::new(z.0 as f64, z.1 as f64);
        }
        let a = 2.0 * std::f64::consts::PI * t.to_f64();
        C64::new(a.cos(), a.sin())
    }
}

impl UnitPhase for RigorousComplex {
    fn unit_from_turn(t: Frac) -> Self {
        if let Some(z) = quarter_turn(t) {
            return RigorousComplex::point(z.0 as f64, z.1 as f64);
        }
        RigorousComplex::new(cos_turn_interval(t), sin_turn_interval(t))
    }
}

fn quarter_turn(t: Frac) -> Option<(i8, i8)> {
    let t = t.mod1();
    if t.den > 4 || t.den == 3 {
        return None;
    }
    match (4 * t.num) / t.den {
        0 => Some((1, 0)),
        1 => Some((0, 1)),
        2 => Some((-1, 0)),
        _ => Some((0, -1)),
    }
}

/// One physical symmetry: a signed permutation `C` with rational spatial
/// shift (units of 2 pi) and rational time shift (units of the period).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PhysicalSymmetry {
    c: [[i8; 3]; 3],
    ctilde: [Frac; 3],
    d: Frac,
}

impl PhysicalSymmetry {
    pub fn new(c: [[i8; 3]; 3], ctilde: [Frac; 3], d: Frac) -> Result<Self> {
        for row in &c {
            if row.iter().filter(|&&v| v != 0).count() != 1
                || row.iter().any(|&v| !(-1..=1).contains(&v))
            {
                return Err(Error::Format("C is not a signed permutation".into()));
            }
        }
        for col in 0..3 {
            if (0..3).filter(|&r| c[r][col] != 0).count() != 1 {
                return Err(Error::Format("C is not a signed permutation".into()));
            }
        }
        Ok(Self {
            c,
            ctilde: [ctilde[0].mod1(), ctilde[1].mod1(), ctilde[2].mod1()],
            d: d.mod1(),
        })
    }

    pub fn identity() -> Self {
        Self {
            c: [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
            ctilde: [Frac::ZERO; 3],
            d: Frac::ZERO,
        }
    }

    /// Composition as affine maps: (self * other)(x) = self(other(x)).
    pub fn compose(&self, o: &Self) -> Self {
        let mut c = [[0i8; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0i8;
                for k in 0..3 {
                    s += self.c[i][k] * o.c[k][j];
                }
                c[i][j] = s;
            }
        }
        let mut ctilde = [Frac::ZERO; 3];
        for i in 0..3 {
            let mut acc = self.ctilde[i];
            for k in 0..3 {
                if self.c[i][k] != 0 {
                    acc = acc.add(&o.ctilde[k].mul_int(self.c[i][k] as i64));
                }
            }
            ctilde[i] = acc.mod1();
        }
        Self {
            c,
            ctilde,
            d: self.d.add(&o.d).mod1(),
        }
    }

    /// Permutation tau and signs rho with C[m][m'] = rho(m') delta_{m, tau(m')}.
    fn tau_rho(&self) -> ([usize; 3], [i8; 3]) {
        let mut tau = [0usize; 3];
        let mut rho = [0i8; 3];
        for mp in 0..3 {
            for m in 0..3 {
                if self.c[m][mp] != 0 {
                    tau[mp] = m;
                    rho[mp] = self.c[m][mp];
                }
            }
        }
        (tau, rho)
    }

    pub fn det(&self) -> i8 {
        let c = &self.c;
        let d = c[0][0] as i32 * (c[1][1] as i32 * c[2][2] as i32 - c[1][2] as i32 * c[2][1] as i32)
            - c[0][1] as i32 * (c[1][0] as i32 * c[2][2] as i32 - c[1][2] as i32 * c[2][0] as i32)
            + c[0][2] as i32 * (c[1][0] as i32 * c[2][1] as i32 - c[1][1] as i32 * c[2][0] as i32);
        d as i8
    }

    fn apply_c(&self, n: &MultiIndex) -> MultiIndex {
        let v = [n.n1, n.n2, n.n3];
        let mut w = [0i32; 3];
        for i in 0..3 {
            for k in 0..3 {
                w[i] += self.c[i][k] as i32 * v[k];
            }
        }
        MultiIndex::new(w[0], w[1], w[2], n.n4)
    }

    /// beta_g(j): index part of the right action on coefficients.
    pub fn beta(&self, j: &ModeKey) -> ModeKey {
        let (tau, _) = self.tau_rho();
        ModeKey::new(self.apply_c(&j.n), tau[j.comp])
    }

    /// Turn fraction of alpha_g(j) = det(C) rho(m) e^{2 i pi (n~ . C^T Ctilde + n4 D)}.
    pub fn alpha_turn(&self, j: &ModeKey) -> Frac {
        let (_, rho) = self.tau_rho();
        // n~ . C^T Ctilde = (C n~) . Ctilde
        let cn = self.apply_c(&j.n);
        let sp = [cn.n1, cn.n2, cn.n3];
        let mut t = self.d.mul_int(j.n.n4 as i64);
        for k in 0..3 {
            if sp[k] != 0 {
                t = t.add(&self.ctilde[k].mul_int(sp[k] as i64));
            }
        }
        let sign = self.det() * rho[j.comp];
        if sign < 0 {
            t = t.add(&Frac::new(1, 2));
        }
        t.mod1()
    }
}

/// A finite group of physical symmetries, closed under composition.
#[derive(Clone, Debug)]
pub struct Group {
    elements: Vec<PhysicalSymmetry>,
    inverse: Vec<usize>,
}

impl Group {
    pub fn trivial() -> Self {
        close_group(&[], 4).expect("trivial closure")
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[PhysicalSymmetry] {
        &self.elements
    }

    pub fn element(&self, gi: usize) -> &PhysicalSymmetry {
        &self.elements[gi]
    }

    pub fn inverse_of(&self, gi: usize) -> usize {
        self.inverse[gi]
    }

    pub fn beta(&self, gi: usize, j: &ModeKey) -> ModeKey {
        self.elements[gi].beta(j)
    }

    pub fn alpha_turn(&self, gi: usize, j: &ModeKey) -> Frac {
        self.elements[gi].alpha_turn(j)
    }

    pub fn alpha<T: UnitPhase>(&self, gi: usize, j: &ModeKey) -> T {
        T::unit_from_turn(self.alpha_turn(gi, j))
    }

    /// gamma_g applied to a coefficient field: (gamma_g w)_j = alpha_g(j) w_{beta_g(j)}.
    pub fn apply<T: UnitPhase>(&self, gi: usize, field: &SpectralField<T>) -> SpectralField<T> {
        let gii = self.inverse_of(gi);
        let mut out = SpectralField::new();
        for (jj, v) in field.iter() {
            // output index j with beta_g(j) = jj
            let j = self.beta(gii, &jj);
            debug_assert_eq!(self.beta(gi, &j), jj);
            let a: T = self.alpha(gi, &j);
            out.set(j, a.mul(v));
        }
        out
    }

    /// True when gamma_g field == field exactly for every group element.
    pub fn is_invariant<T: UnitPhase>(&self, field: &SpectralField<T>) -> bool {
        (0..self.order()).all(|gi| self.apply(gi, field) == *field)
    }
}

/// Closure of a generator list under composition; errors if the closure
/// exceeds `cap` elements.
pub fn close_group(generators: &[PhysicalSymmetry], cap: usize) -> Result<Group> {
    let mut elements = vec![PhysicalSymmetry::identity()];
    let mut seen: std::collections::HashSet<PhysicalSymmetry> =
        elements.iter().copied().collect();
    let mut frontier = elements.clone();
    while let Some(e) = frontier.pop() {
        for g in generators {
            for prod in [e.compose(g), g.compose(&e)] {
                if seen.insert(prod) {
                    if seen.len() > cap {
                        return Err(Error::NonFiniteClosure(cap));
                    }
                    elements.push(prod);
                    frontier.push(prod);
                }
            }
        }
    }
    elements.sort();
    let identity = PhysicalSymmetry::identity();
    let mut inverse = vec![usize::MAX; elements.len()];
    for (i, a) in elements.iter().enumerate() {
        for (k, b) in elements.iter().enumerate() {
            if a.compose(b) == identity {
                inverse[i] = k;
            }
        }
    }
    assert!(inverse.iter().all(|&i| i != usize::MAX), "closure lacks inverses");
    Ok(Group { elements, inverse })
}

/// The order-16 group of the Taylor-Green forcing: generated by the
/// simultaneous reflection S_{x1} S_{x2}, the half-cell shift reflection
/// D S_{x1}, and the quarter-period rotation-shift P_4 S_{x1} R.
pub fn taylor_green_16() -> Group {
    let g1 = PhysicalSymmetry::new(
        [[-1, 0, 0], [0, -1, 0], [0, 0, 1]],
        [Frac::ZERO; 3],
        Frac::ZERO,
    )
    .unwrap();
    let g2 = PhysicalSymmetry::new(
        [[-1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [Frac::new(1, 2), Frac::new(1, 2), Frac::ZERO],
        Frac::ZERO,
    )
    .unwrap();
    let g3 = PhysicalSymmetry::new(
        [[0, 1, 0], [1, 0, 0], [0, 0, 1]],
        [Frac::new(1, 2), Frac::ZERO, Frac::ZERO],
        Frac::new(1, 4),
    )
    .unwrap();
    close_group(&[g1, g2, g3], 64).expect("order-16 closure")
}

/// Per-mode orbit data: representative, sizes, the trivial/symmetric
/// dichotomy flag and the transport phase from the representative.
#[derive(Clone, Copy, Debug)]
pub struct OrbitData {
    pub rep: ModeKey,
    pub orbit_size: u32,
    pub stab_order: u32,
    pub symmetric: bool,
    /// turn of alphatilde(rep, j); meaningful only when `symmetric`
    pub transport: Frac,
}

/// Orbit data for one mode, computed directly from the group action (no
/// catalog); safe to call concurrently.
pub fn orbit_data(group: &Group, j: &ModeKey) -> OrbitData {
    let order = group.order();
    let mut images: Vec<ModeKey> = Vec::with_capacity(order);
    let mut rep = *j;
    for gi in 0..order {
        let m = group.beta(gi, j);
        if m < rep {
            rep = m;
        }
        images.push(m);
    }
    let mut sorted = images;
    sorted.sort_unstable();
    sorted.dedup();
    let orbit_size = sorted.len() as u32;
    let stab_order = (order / sorted.len()) as u32;
    // free orbits have a trivial stabilizer and are always symmetric
    let mut symmetric = true;
    let mut witness = 0usize;
    if stab_order == 1 {
        // find a witness g with g.rep = j
        for gi in 0..order {
            if group.beta(gi, &rep) == *j {
                witness = gi;
                break;
            }
        }
    } else {
        for gi in 0..order {
            let m = group.beta(gi, &rep);
            if m == rep && !group.alpha_turn(gi, &rep).mod1().is_zero() {
                symmetric = false;
            }
            if m == *j {
                witness = gi;
            }
        }
    }
    let transport = group.alpha_turn(witness, &rep).neg().mod1();
    OrbitData {
        rep,
        orbit_size,
        stab_order,
        symmetric,
        transport,
    }
}

type OrbitEntry = OrbitData;

/// Catalog of group orbits over a set of modes. Queries after construction
/// are read-only and thread-safe.
#[derive(Clone, Debug)]
pub struct OrbitCatalog {
    group: Group,
    entries: HashMap<ModeKey, OrbitEntry>,
}

impl OrbitCatalog {
    pub fn new(group: Group) -> Self {
        Self {
            group,
            entries: HashMap::new(),
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    /// Catalog the full orbits of all the given modes.
    pub fn ensure_modes(&mut self, modes: impl IntoIterator<Item = ModeKey>) {
        for j in modes {
            if self.entries.contains_key(&j) {
                continue;
            }
            self.insert_orbit(&j);
        }
    }

    fn insert_orbit(&mut self, j0: &ModeKey) {
        let base = orbit_data(&self.group, j0);
        let order = self.group.order();
        for gi in 0..order {
            let j = self.group.beta(gi, &base.rep);
            if !self.entries.contains_key(&j) {
                let transport = self.group.alpha_turn(gi, &base.rep).neg().mod1();
                self.entries.insert(j, OrbitEntry { transport, ..base });
            }
        }
    }

    fn entry(&self, j: &ModeKey) -> Result<&OrbitEntry> {
        self.entries
            .get(j)
            .ok_or_else(|| Error::UncataloguedMode(j.to_string()))
    }

    pub fn contains(&self, j: &ModeKey) -> bool {
        self.entries.contains_key(j)
    }

    pub fn representative(&self, j: &ModeKey) -> Result<ModeKey> {
        Ok(self.entry(j)?.rep)
    }

    pub fn orbit_size(&self, j: &ModeKey) -> Result<u32> {
        Ok(self.entry(j)?.orbit_size)
    }

    pub fn stabilizer_order(&self, j: &ModeKey) -> Result<u32> {
        Ok(self.entry(j)?.stab_order)
    }

    pub fn is_symmetric(&self, j: &ModeKey) -> Result<bool> {
        Ok(self.entry(j)?.symmetric)
    }

    /// j is the canonical unknowns slot of its orbit: symmetric and minimal.
    pub fn is_reduced_key(&self, j: &ModeKey) -> Result<bool> {
        let e = self.entry(j)?;
        Ok(e.symmetric && e.rep == *j)
    }

    /// Transport phase alphatilde(rep(j), j) as an exact turn.
    pub fn transport_turn(&self, j: &ModeKey) -> Result<Frac> {
        Ok(self.entry(j)?.transport)
    }

    /// All members of the orbit of `j` with their transport turns, sorted.
    pub fn orbit_members(&self, j: &ModeKey) -> Result<Vec<(ModeKey, Frac)>> {
        let rep = self.representative(j)?;
        let g = &self.group;
        let mut out: Vec<(ModeKey, Frac)> = (0..g.order())
            .map(|gi| g.beta(gi, &rep))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .map(|m| (m, self.entries[&m].transport))
            .collect();
        out.sort_by_key(|(m, _)| *m);
        Ok(out)
    }
}

/// Frequency plus coefficients on the symmetry-reduced index set. Keys are
/// orbit representatives of symmetric orbits.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedState<T: Coeff> {
    pub omega: T,
    pub phi: HashMap<ModeKey, T>,
}

impl<T: Coeff> ReducedState<T> {
    pub fn new(omega: T) -> Self {
        Self {
            omega,
            phi: HashMap::new(),
        }
    }

    pub fn get(&self, j: &ModeKey) -> T {
        self.phi.get(j).copied().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, j: ModeKey, v: T) {
        if v.is_exact_zero() {
            self.phi.remove(&j);
        } else {
            self.phi.insert(j, v);
        }
    }

    pub fn sorted_keys(&self) -> Vec<ModeKey> {
        let mut k: Vec<ModeKey> = self.phi.keys().copied().collect();
        k.sort();
        k
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> ReducedState<U> {
        ReducedState {
            omega: f(&self.omega),
            phi: self
                .phi
                .iter()
                .filter_map(|(j, v)| {
                    let u = f(v);
                    (!u.is_exact_zero()).then_some((*j, u))
                })
                .collect(),
        }
    }
}

impl ReducedState<RigorousComplex> {
    pub fn midpoint(&self) -> ReducedState<C64> {
        self.map(|v| v.mid_c64())
    }
}

impl ReducedState<C64> {
    pub fn to_rigorous(&self) -> ReducedState<RigorousComplex> {
        self.map(|v| RigorousComplex::point(v.re, v.im))
    }
}

/// Lift Sigma: X^red -> X^sym: Sigma phi = sum_j phi_j sum_{j' in G.j}
/// alphatilde(j, j') e_{j'}. Errors on modes missing from the catalog.
pub fn lift_sigma<T: UnitPhase>(
    phi: &ReducedState<T>,
    catalog: &OrbitCatalog,
) -> Result<SpectralField<T>> {
    let mut out = SpectralField::new();
    for (j, v) in &phi.phi {
        if !catalog.is_reduced_key(j)? {
            return Err(Error::UncataloguedMode(format!(
                "{j} is not a symmetric orbit representative"
            )));
        }
        for (jp, turn) in catalog.orbit_members(j)? {
            let a = T::unit_from_turn(turn);
            out.set(jp, a.mul(v));
        }
    }
    Ok(out)
}

/// Projection Pi: X -> X^red: read the coefficients at the symmetric orbit
/// representatives.
pub fn project_pi<T: UnitPhase>(
    omega: T,
    field: &SpectralField<T>,
    catalog: &OrbitCatalog,
) -> Result<ReducedState<T>> {
    let mut out = ReducedState::new(omega);
    for (j, v) in field.iter() {
        if catalog.is_reduced_key(&j)? {
            out.set(j, *v);
        }
    }
    Ok(out)
}

/// Group average A = (1/|G|) sum_g gamma_g; the projection of X onto X^sym.
pub fn group_average<T: UnitPhase>(field: &SpectralField<T>, group: &Group) -> SpectralField<T> {
    let order = group.order() as i64;
    let mut accs: [HashMap<MultiIndex, T::Acc>; 3] =
        [HashMap::new(), HashMap::new(), HashMap::new()];
    for gi in 0..group.order() {
        let t = group.apply(gi, field);
        for (j, v) in t.iter() {
            accs[j.comp].entry(j.n).or_default().add_term(v);
        }
    }
    let mut out = SpectralField::new();
    for (c, acc) in accs.into_iter().enumerate() {
        for (n, a) in acc {
            let v = a.finish();
            if !v.is_exact_zero() {
                out.set(ModeKey::new(n, c), v.div_pos_int(order));
            }
        }
    }
    out
}

/// Complex-conjugation symmetry gamma_*: (gamma_* w)_n = conj(w_{-n}).
pub fn gamma_star<T: Coeff>(field: &SpectralField<T>) -> SpectralField<T> {
    let mut out = SpectralField::new();
    for (j, v) in field.iter() {
        out.set(ModeKey::new(j.n.neg(), j.comp), v.conj());
    }
    out
}

/// The conjugation involution on reduced variables: Pi gamma_* Sigma
/// (frequency conjugated alongside).
pub fn conj_reduced<T: UnitPhase>(
    phi: &ReducedState<T>,
    catalog: &OrbitCatalog,
) -> Result<ReducedState<T>> {
    let lifted = lift_sigma(phi, catalog)?;
    project_pi(phi.omega.conj(), &gamma_star(&lifted), catalog)
}

/// Symmetrize numerical input: project onto the divergence-free symmetric
/// subspace and average with its conjugation image, so the output is a
/// valid center for validation. Idempotent up to rounding.
pub fn symmetrize_input<T: UnitPhase>(
    phi: &ReducedState<T>,
    catalog: &OrbitCatalog,
) -> Result<ReducedState<T>> {
    let lifted = lift_sigma(phi, catalog)?;
    // modewise divergence-free projection
    let mut divfree = SpectralField::new();
    for n in lifted.support_modes() {
        let w = [
            lifted.get(&ModeKey::new(n, 0)),
            lifted.get(&ModeKey::new(n, 1)),
            lifted.get(&ModeKey::new(n, 2)),
        ];
        let p = crate::spectral::project_div_free(&n, w);
        for (c, v) in p.into_iter().enumerate() {
            divfree.set(ModeKey::new(n, c), v);
        }
    }
    let averaged = group_average(&divfree, catalog.group());
    let sym = project_pi(phi.omega, &averaged, catalog)?;
    // conjugation-average: 1/2 (phi + gammatilde_* phi); makes Omega real
    let conj = conj_reduced(&sym, catalog)?;
    let half = |a: T, b: T| a.add(&b).div_pos_int(2);
    let mut out = ReducedState::new(half(sym.omega, conj.omega));
    let keys: std::collections::BTreeSet<ModeKey> =
        sym.phi.keys().chain(conj.phi.keys()).copied().collect();
    for j in keys {
        out.set(j, half(sym.get(&j), conj.get(&j)));
    }
    Ok(out)
}

/// Reduced-space norm with the orbit-size weights: sum of xi^s_j |phi_j|
/// plus |Omega| (unit frequency weight).
pub fn reduced_norm(
    phi: &ReducedState<RigorousComplex>,
    catalog: &OrbitCatalog,
    eta: &RigorousReal,
) -> Result<RigorousReal> {
    let mut acc = phi.omega.abs();
    for (j, v) in &phi.phi {
        let w = crate::spectral::eta_pow(eta, j.n.l1()).scale_int(catalog.orbit_size(j)? as i64);
        acc = acc + v.abs() * w;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tg_catalog(extent: i32, nt: i32) -> OrbitCatalog {
        let mut cat = OrbitCatalog::new(taylor_green_16());
        let mut modes = vec![];
        for n1 in -extent..=extent {
            for n2 in -extent..=extent {
                for n4 in -nt..=nt {
                    let n = MultiIndex::new(n1, n2, 0, n4);
                    if !n.is_origin() {
                        for c in 0..3 {
                            modes.push(ModeKey::new(n, c));
                        }
                    }
                }
            }
        }
        cat.ensure_modes(modes);
        cat
    }

    #[test]
    fn taylor_green_group_has_order_16() {
        assert_eq!(taylor_green_16().order(), 16);
    }

    #[test]
    fn single_generators_close_small() {
        let g1 = PhysicalSymmetry::new(
            [[-1, 0, 0], [0, -1, 0], [0, 0, 1]],
            [Frac::ZERO; 3],
            Frac::ZERO,
        )
        .unwrap();
        assert_eq!(close_group(&[g1], 64).unwrap().order(), 2);
        assert_eq!(close_group(&[], 64).unwrap().order(), 1);
    }

    #[test]
    fn closure_cap_errors() {
        // an irrational-free but high-order rotation: shift by 1/1000
        let g = PhysicalSymmetry::new(
            [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
            [Frac::new(1, 1000), Frac::ZERO, Frac::ZERO],
            Frac::ZERO,
        )
        .unwrap();
        assert!(matches!(
            close_group(&[g], 100),
            Err(Error::NonFiniteClosure(100))
        ));
    }

    #[test]
    fn mode_action_matches_published_tables() {
        let g = taylor_green_16();
        // locate the generators inside the closed group
        let g1 = PhysicalSymmetry::new(
            [[-1, 0, 0], [0, -1, 0], [0, 0, 1]],
            [Frac::ZERO; 3],
            Frac::ZERO,
        )
        .unwrap();
        let g3 = PhysicalSymmetry::new(
            [[0, 1, 0], [1, 0, 0], [0, 0, 1]],
            [Frac::new(1, 2), Frac::ZERO, Frac::ZERO],
            Frac::new(1, 4),
        )
        .unwrap();

        // g1 at ((1,1,0,0), m=3): beta = ((-1,-1,0,0), 3), alpha = +1
        let j = ModeKey::new(MultiIndex::new(1, 1, 0, 0), 2);
        assert_eq!(
            g1.beta(&j),
            ModeKey::new(MultiIndex::new(-1, -1, 0, 0), 2)
        );
        assert!(g1.alpha_turn(&j).is_zero());
        // and alpha = -1 on components 1, 2
        for c in [0, 1] {
            let jj = ModeKey::new(MultiIndex::new(2, -1, 0, 3), c);
            assert_eq!(g1.alpha_turn(&jj), Frac::new(1, 2));
        }

        // g3 at ((1,1,0,0), m=1): beta swaps to component 2, alpha = +1
        let j1 = ModeKey::new(MultiIndex::new(1, 1, 0, 0), 0);
        assert_eq!(g3.beta(&j1), ModeKey::new(MultiIndex::new(1, 1, 0, 0), 1));
        // alpha_{g3}(n, m) = -(-1)^{n2} i^{n4}: here -(-1)^1 i^0 = +1
        assert!(g3.alpha_turn(&j1).is_zero());
        // generic check of the closed-form alpha for g3
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = MultiIndex::new(
                rng.gen_range(-5..=5),
                rng.gen_range(-5..=5),
                rng.gen_range(-5..=5),
                rng.gen_range(-5..=5),
            );
            let m = rng.gen_range(0..3);
            let t = g3.alpha_turn(&ModeKey::new(n, m));
            // -(-1)^{n2} i^{n4} as a turn: 1/2 + n2/2 + n4/4
            let expect = Frac::new(1, 2)
                .add(&Frac::new(n.n2 as i64, 2))
                .add(&Frac::new(n.n4 as i64, 4))
                .mod1();
            assert_eq!(t, expect, "n={n:?} m={m}");
        }

        // identity fixes everything with alpha = 1
        let id = PhysicalSymmetry::identity();
        let j = ModeKey::new(MultiIndex::new(2, 0, -1, 7), 1);
        assert_eq!(id.beta(&j), j);
        assert!(id.alpha_turn(&j).is_zero());
        assert_eq!(g.order(), 16);
    }

    #[test]
    fn beta_is_left_action_and_alpha_cocycle() {
        let g = taylor_green_16();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let j = ModeKey::new(
                MultiIndex::new(
                    rng.gen_range(-4..=4),
                    rng.gen_range(-4..=4),
                    rng.gen_range(-4..=4),
                    rng.gen_range(-4..=4),
                ),
                rng.gen_range(0..3),
            );
            for a in 0..g.order() {
                for b in 0..g.order() {
                    let ab = g.element(a).compose(g.element(b));
                    // beta_{ab}(j) = beta_a(beta_b(j))
                    assert_eq!(ab.beta(&j), g.element(a).beta(&g.element(b).beta(&j)));
                    // alpha_{ab}(j) = alpha_a(beta_b(j)) alpha_b(j)
                    let lhs = ab.alpha_turn(&j);
                    let rhs = g
                        .element(a)
                        .alpha_turn(&g.element(b).beta(&j))
                        .add(&g.element(b).alpha_turn(&j))
                        .mod1();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn conjugation_relations_for_negated_modes() {
        let g = taylor_green_16();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..300 {
            let j = ModeKey::new(
                MultiIndex::new(
                    rng.gen_range(-4..=4),
                    rng.gen_range(-4..=4),
                    rng.gen_range(-4..=4),
                    rng.gen_range(-4..=4),
                ),
                rng.gen_range(0..3),
            );
            let jm = ModeKey::new(j.n.neg(), j.comp);
            for gi in 0..g.order() {
                let b = g.beta(gi, &j);
                let bm = g.beta(gi, &jm);
                assert_eq!(bm.n, b.n.neg());
                assert_eq!(bm.comp, b.comp);
                // alpha(-n, m) = conj(alpha(n, m))
                assert_eq!(g.alpha_turn(gi, &jm), g.alpha_turn(gi, &j).neg().mod1());
            }
        }
    }

    #[test]
    fn dichotomy_and_lagrange_over_test_box() {
        let cat = tg_catalog(3, 3);
        let g = cat.group();
        for (j, e) in &cat.entries {
            assert_eq!(16 % e.orbit_size, 0, "orbit size divides |G|");
            assert_eq!(e.orbit_size * e.stab_order, 16, "orbit-stabilizer");
            // stabilizer phase sum is 0 or |G_j| exactly
            let stab: Vec<usize> = (0..g.order()).filter(|&gi| g.beta(gi, j) == *j).collect();
            assert_eq!(stab.len() as u32, e.stab_order);
            let mut re = 0i64;
            let mut im = 0i64;
            for &gi in &stab {
                let t = g.alpha_turn(gi, j).mod1();
                // shipped group: quarter turns only
                let q = (t.num() * 4) / t.den();
                assert_eq!(t.den() * q, 4 * t.num(), "quarter turn");
                match q {
                    0 => re += 1,
                    1 => im += 1,
                    2 => re -= 1,
                    _ => im -= 1,
                }
            }
            if e.symmetric {
                assert_eq!((re, im), (stab.len() as i64, 0));
            } else {
                assert_eq!((re, im), (0, 0));
            }
        }
        // a mode fixed by some g with alpha = -1 must be trivial:
        // ((0,0,0,1), m=3) is fixed by g2-like elements with alpha = -1
        let j = ModeKey::new(MultiIndex::new(0, 0, 0, 1), 2);
        assert!(!cat.is_symmetric(&j).unwrap());
    }

    #[test]
    fn transport_consistency_on_symmetric_orbits() {
        let cat = tg_catalog(3, 2);
        let g = cat.group();
        for (j, e) in &cat.entries {
            if !e.symmetric || e.rep != *j {
                continue;
            }
            // any two elements sending rep to the same member agree on alpha
            for a in 0..g.order() {
                for b in 0..g.order() {
                    if g.beta(a, j) == g.beta(b, j) {
                        assert_eq!(g.alpha_turn(a, j), g.alpha_turn(b, j));
                    }
                }
            }
        }
    }

    #[test]
    fn s_vector_reproduces_catalog() {
        // S = sum_g gamma_g sum_{j in J^dom cap J-box} e_j has entries
        // |G_j| alphatilde(j, j') at symmetric modes and 0 at trivial ones.
        let cat = tg_catalog(2, 2);
        let g = cat.group();
        let mut basis = SpectralField::<RigorousComplex>::new();
        for (j, e) in &cat.entries {
            if e.rep == *j {
                basis.set(*j, RigorousComplex::one());
            }
        }
        let mut s = SpectralField::<RigorousComplex>::new();
        for gi in 0..g.order() {
            s = s.add_field(&g.apply(gi, &basis));
        }
        for (j, e) in &cat.entries {
            let v = s.get(j);
            if e.symmetric {
                let t: RigorousComplex = RigorousComplex::unit_from_turn(e.transport);
                let expect = t.scale_int(e.stab_order as i64);
                assert!(v.overlaps(&expect), "S mismatch at {j}");
            } else {
                assert!(v.contains_zero(), "trivial mode with nonzero S at {j}");
            }
        }
    }

    fn random_reduced(
        cat: &OrbitCatalog,
        rng: &mut ChaCha8Rng,
        count: usize,
    ) -> ReducedState<RigorousComplex> {
        let mut reps: Vec<ModeKey> = cat
            .entries
            .iter()
            .filter(|(j, e)| e.symmetric && e.rep == **j)
            .map(|(j, _)| *j)
            .collect();
        reps.sort();
        let mut out = ReducedState::new(RigorousComplex::point(
            rng.gen_range(0.25..2.0),
            0.0,
        ));
        for _ in 0..count {
            let j = reps[rng.gen_range(0..reps.len())];
            let v = RigorousComplex::point(
                (rng.gen_range(-32i64..=32) as f64) / 16.0,
                (rng.gen_range(-32i64..=32) as f64) / 16.0,
            );
            out.set(j, v);
        }
        out
    }

    #[test]
    fn sigma_pi_round_trips_and_norm_compatibility() {
        let cat = tg_catalog(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let eta = RigorousReal::one();
        for _ in 0..50 {
            let phi = random_reduced(&cat, &mut rng, 12);
            let lifted = lift_sigma(&phi, &cat).unwrap();
            // Pi Sigma = id
            let back = project_pi(phi.omega, &lifted, &cat).unwrap();
            for j in phi.sorted_keys() {
                assert!(back.get(&j).overlaps(&phi.get(&j)));
            }
            for j in back.sorted_keys() {
                assert!(back.get(&j).overlaps(&phi.get(&j)));
            }
            // lifted field is G-invariant
            assert!(cat.group().is_invariant(&lifted));
            // Sigma Pi = id on averaged (symmetric) fields
            let relift = lift_sigma(&back, &cat).unwrap();
            assert_eq!(relift, lifted);
            // norm compatibility: ||Sigma phi||_X = ||phi||_red
            let full = crate::spectral::norm_field(
                &lifted,
                &crate::spectral::WeightedNorm::plain(eta),
            ) + phi.omega.abs();
            let red = reduced_norm(&phi, &cat, &eta).unwrap();
            assert!(full.overlaps(&red), "norms {full:?} vs {red:?}");
        }
    }

    #[test]
    fn group_average_properties() {
        let cat = tg_catalog(2, 2);
        let g = cat.group();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        // average of a symmetric field is itself (on exact dyadics)
        let phi = random_reduced(&cat, &mut rng, 8);
        let sym = lift_sigma(&phi, &cat).unwrap();
        let avg = group_average(&sym, g);
        for (j, v) in sym.iter() {
            assert!(avg.get(&j).overlaps(v));
        }
        // average of e_j for a trivial mode is 0
        let jt = ModeKey::new(MultiIndex::new(0, 0, 0, 1), 2);
        assert!(!cat.is_symmetric(&jt).unwrap());
        let mut e = SpectralField::<RigorousComplex>::new();
        e.set(jt, RigorousComplex::one());
        let a = group_average(&e, g);
        for (_, v) in a.iter() {
            assert!(v.contains_zero());
        }
        // averaging commutes with gamma_* on real-symmetric inputs
        let mut f = SpectralField::<RigorousComplex>::new();
        for _ in 0..10 {
            let n = MultiIndex::new(
                rng.gen_range(-2..=2),
                rng.gen_range(-2..=2),
                0,
                rng.gen_range(-2..=2),
            );
            if n.is_origin() {
                continue;
            }
            let c = rng.gen_range(0..3);
            let re = (rng.gen_range(-16i64..=16) as f64) / 8.0;
            let im = (rng.gen_range(-16i64..=16) as f64) / 8.0;
            f.set(ModeKey::new(n, c), RigorousComplex::point(re, im));
            f.set(ModeKey::new(n.neg(), c), RigorousComplex::point(re, -im));
        }
        let lhs = gamma_star(&group_average(&f, g));
        let rhs = group_average(&gamma_star(&f), g);
        let keys: std::collections::BTreeSet<ModeKey> =
            lhs.iter().map(|(j, _)| j).chain(rhs.iter().map(|(j, _)| j)).collect();
        for j in keys {
            assert!(lhs.get(&j).overlaps(&rhs.get(&j)));
        }
    }

    #[test]
    fn conjugation_involution_and_norm_preservation() {
        let cat = tg_catalog(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let eta = RigorousReal::one();
        for _ in 0..30 {
            let phi = random_reduced(&cat, &mut rng, 10);
            let c1 = conj_reduced(&phi, &cat).unwrap();
            let c2 = conj_reduced(&c1, &cat).unwrap();
            for j in phi.sorted_keys().into_iter().chain(c2.sorted_keys()) {
                assert!(c2.get(&j).overlaps(&phi.get(&j)), "involution at {j}");
            }
            let n1 = reduced_norm(&phi, &cat, &eta).unwrap();
            let n2 = reduced_norm(&c1, &cat, &eta).unwrap();
            assert!(n1.overlaps(&n2));
        }
    }

    #[test]
    fn symmetrize_output_is_divergence_free_and_idempotent() {
        let cat = tg_catalog(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let phi = random_reduced(&cat, &mut rng, 10);
            let s = symmetrize_input(&phi, &cat).unwrap();
            // divergence of the lift encloses zero coefficientwise
            let lifted = lift_sigma(&s, &cat).unwrap();
            for (_, v) in crate::spectral::divergence(&lifted) {
                assert!(v.contains_zero());
            }
            // gammatilde_*-fixed
            let c = conj_reduced(&s, &cat).unwrap();
            for j in s.sorted_keys() {
                assert!(c.get(&j).overlaps(&s.get(&j)));
            }
            assert!(c.omega.overlaps(&s.omega));
            // idempotent up to rounding
            let s2 = symmetrize_input(&s, &cat).unwrap();
            for j in s.sorted_keys().into_iter().chain(s2.sorted_keys()) {
                let (a, b) = (s.get(&j), s2.get(&j));
                let d = a.sub(&b);
                assert!(d.re.abs().hi() < 1e-12 && d.im.abs().hi() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_phase_enclosures_for_general_turns() {
        // quarter turns exact
        let t: RigorousComplex = RigorousComplex::unit_from_turn(Frac::new(3, 4));
        assert_eq!(t, RigorousComplex::point(0.0, -1.0));
        // eighth turn: sqrt(2)/2 pair enclosed
        let e: RigorousComplex = RigorousComplex::unit_from_turn(Frac::new(1, 8));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(e.re.contains(s) || e.re.contains(s.next_down()) || e.re.contains(s.next_up()));
        assert!(e.re.width() < 1e-13 && e.im.width() < 1e-13);
        // third turn: cos = -1/2 exactly inside
        let th: RigorousComplex = RigorousComplex::unit_from_turn(Frac::new(1, 3));
        assert!(th.re.contains(-0.5));
        assert!(th.im.width() < 1e-13);
        // |alpha| = 1 within enclosure
        let n = th.norm_sq();
        assert!(n.contains(1.0));
    }
}
