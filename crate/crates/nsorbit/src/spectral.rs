//! Space-time Fourier sequences over Z^4, weighted l1 norms, discrete
//! differential operators, convolution, and the Biot-Savart-type operator
//! recovering velocity coefficients from vorticity coefficients.
//!
//! Conventions: a scalar sequence is a sparse map n -> c_n over
//! n = (n1, n2, n3, n4), where (n1, n2, n3) are spatial wave numbers and n4
//! the temporal harmonic. `partial` multiplies by n_l without the factor i;
//! the i's are carried explicitly by the formulas that need them. Components
//! are indexed 0..3 internally and written out as m = 1..3.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use rigor::{ExactSum, RigorousComplex, RigorousReal};
use std::collections::HashMap;

/// A space-time Fourier index n = (n1, n2, n3, n4).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct MultiIndex {
    pub n1: i32,
    pub n2: i32,
    pub n3: i32,
    pub n4: i32,
}

impl MultiIndex {
    pub const fn new(n1: i32, n2: i32, n3: i32, n4: i32) -> Self {
        Self { n1, n2, n3, n4 }
    }

    pub const ZERO: Self = Self::new(0, 0, 0, 0);

    pub fn is_origin(&self) -> bool {
        *self == Self::ZERO
    }

    /// |n|_1 = sum of |n_j|.
    pub fn l1(&self) -> i64 {
        self.n1.unsigned_abs() as i64
            + self.n2.unsigned_abs() as i64
            + self.n3.unsigned_abs() as i64
            + self.n4.unsigned_abs() as i64
    }

    /// |n|_inf over all four entries.
    pub fn linf(&self) -> i64 {
        self.n1
            .unsigned_abs()
            .max(self.n2.unsigned_abs())
            .max(self.n3.unsigned_abs())
            .max(self.n4.unsigned_abs()) as i64
    }

    /// Spatial sup norm |n~|_inf.
    pub fn sp_linf(&self) -> i64 {
        self.n1
            .unsigned_abs()
            .max(self.n2.unsigned_abs())
            .max(self.n3.unsigned_abs()) as i64
    }

    /// Spatial square n~^2 = n1^2 + n2^2 + n3^2, exact in integers.
    pub fn sp_sq(&self) -> i64 {
        let (a, b, c) = (self.n1 as i64, self.n2 as i64, self.n3 as i64);
        a * a + b * b + c * c
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.n1 + o.n1,
            self.n2 + o.n2,
            self.n3 + o.n3,
            self.n4 + o.n4,
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(
            self.n1 - o.n1,
            self.n2 - o.n2,
            self.n3 - o.n3,
            self.n4 - o.n4,
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.n1, -self.n2, -self.n3, -self.n4)
    }

    /// Entry by axis 0..3 (= x1, x2, x3, t).
    pub fn get(&self, axis: usize) -> i32 {
        match axis {
            0 => self.n1,
            1 => self.n2,
            2 => self.n3,
            3 => self.n4,
            _ => panic!("axis out of range"),
        }
    }
}

/// One scalar coefficient of a three-component field: the pair (n, m).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ModeKey {
    pub n: MultiIndex,
    /// Component index 0..3 (serialized as m = 1..3).
    pub comp: usize,
}

impl ModeKey {
    pub const fn new(n: MultiIndex, comp: usize) -> Self {
        Self { n, comp }
    }
}

impl std::fmt::Display for ModeKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(({}, {}, {}, {}), m={})",
            self.n.n1,
            self.n.n2,
            self.n.n3,
            self.n.n4,
            self.comp + 1
        )
    }
}

/// Rectangular coefficient box: |n1| <= nx1, |n2| <= nx2, |n3| <= nx3,
/// |n4| <= nt (the origin is excluded from solution supports separately).
#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
pub struct SupportBox {
    pub nx1: u32,
    pub nx2: u32,
    pub nx3: u32,
    pub nt: u32,
}

impl SupportBox {
    pub fn new(nx1: u32, nx2: u32, nx3: u32, nt: u32) -> Self {
        Self { nx1, nx2, nx3, nt }
    }

    pub fn contains(&self, n: &MultiIndex) -> bool {
        n.n1.unsigned_abs() <= self.nx1
            && n.n2.unsigned_abs() <= self.nx2
            && n.n3.unsigned_abs() <= self.nx3
            && n.n4.unsigned_abs() <= self.nt
    }

    /// All indices in the box except the origin.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        let (a, b, c, d) = (
            self.nx1 as i32,
            self.nx2 as i32,
            self.nx3 as i32,
            self.nt as i32,
        );
        (-a..=a).flat_map(move |n1| {
            (-b..=b).flat_map(move |n2| {
                (-c..=c).flat_map(move |n3| {
                    (-d..=d).filter_map(move |n4| {
                        let n = MultiIndex::new(n1, n2, n3, n4);
                        (!n.is_origin()).then_some(n)
                    })
                })
            })
        })
    }

    /// Minkowski sum with another box.
    pub fn sum(&self, o: &Self) -> Self {
        Self::new(
            self.nx1 + o.nx1,
            self.nx2 + o.nx2,
            self.nx3 + o.nx3,
            self.nt + o.nt,
        )
    }
}

/// Scalar coefficient abstraction: rigorous complex intervals on the proof
/// side, plain complex doubles in the solver profile.
pub trait Coeff: Clone + Copy + PartialEq + Send + Sync + std::fmt::Debug + 'static {
    type Acc: CoeffAcc<Self>;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_exact_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// Exact multiplication by i.
    fn mul_i(&self) -> Self;
    fn conj(&self) -> Self;
    /// Exact scaling by a (small) integer.
    fn scale_int(&self, k: i64) -> Self;
    /// Division by a positive integer.
    fn div_pos_int(&self, k: i64) -> Self;
    fn scale_f64(&self, x: f64) -> Self;
    fn from_c64(z: C64) -> Self;
    fn mid_c64(&self) -> C64;
}

/// Coefficient accumulator for convolution-style sums. For rigorous
/// coefficients this is exact (order-independent) accumulation of the
/// directed product endpoints.
pub trait CoeffAcc<T>: Default {
    fn add_term(&mut self, t: &T);
    fn add_prod(&mut self, a: &T, b: &T);
    fn finish(&self) -> T;
}

impl Coeff for C64 {
    type Acc = C64Acc;

    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn is_exact_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn mul_i(&self) -> Self {
        C64::new(-self.im, self.re)
    }
    fn conj(&self) -> Self {
        C64::new(self.re, -self.im)
    }
    fn scale_int(&self, k: i64) -> Self {
        self * (k as f64)
    }
    fn div_pos_int(&self, k: i64) -> Self {
        self / (k as f64)
    }
    fn scale_f64(&self, x: f64) -> Self {
        self * x
    }
    fn from_c64(z: C64) -> Self {
        z
    }
    fn mid_c64(&self) -> C64 {
        *self
    }
}

#[derive(Default)]
pub struct C64Acc {
    sum: C64,
}

impl CoeffAcc<C64> for C64Acc {
    fn add_term(&mut self, t: &C64) {
        self.sum += t;
    }
    fn add_prod(&mut self, a: &C64, b: &C64) {
        self.sum += a * b;
    }
    fn finish(&self) -> C64 {
        self.sum
    }
}

impl Coeff for RigorousComplex {
    type Acc = RigAcc;

    fn zero() -> Self {
        RigorousComplex::zero()
    }
    fn one() -> Self {
        RigorousComplex::one()
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero_point()
    }
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn sub(&self, o: &Self) -> Self {
        *self - *o
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }
    fn mul_i(&self) -> Self {
        RigorousComplex::mul_i(self)
    }
    fn conj(&self) -> Self {
        RigorousComplex::conj(self)
    }
    fn scale_int(&self, k: i64) -> Self {
        RigorousComplex::scale_int(self, k)
    }
    fn div_pos_int(&self, k: i64) -> Self {
        debug_assert!(k > 0);
        self.div_real(&RigorousReal::from_int(k))
            .expect("positive integer divisor")
    }
    fn scale_f64(&self, x: f64) -> Self {
        self.mul_real(&RigorousReal::point(x))
    }
    fn from_c64(z: C64) -> Self {
        RigorousComplex::point(z.re, z.im)
    }
    fn mid_c64(&self) -> C64 {
        let (re, im) = self.mid();
        C64::new(re, im)
    }
}

/// Exact endpoint accumulator for rectangular complex intervals.
pub struct RigAcc {
    re_lo: ExactSum,
    re_hi: ExactSum,
    im_lo: ExactSum,
    im_hi: ExactSum,
}

impl Default for RigAcc {
    fn default() -> Self {
        Self {
            re_lo: ExactSum::new(),
            re_hi: ExactSum::new(),
            im_lo: ExactSum::new(),
            im_hi: ExactSum::new(),
        }
    }
}

impl RigAcc {
    #[inline]
    fn add_real(lo: &mut ExactSum, hi: &mut ExactSum, iv: RigorousReal) {
        lo.add(iv.lo());
        hi.add(iv.hi());
    }
}

impl CoeffAcc<RigorousComplex> for RigAcc {
    fn add_term(&mut self, t: &RigorousComplex) {
        Self::add_real(&mut self.re_lo, &mut self.re_hi, t.re);
        Self::add_real(&mut self.im_lo, &mut self.im_hi, t.im);
    }

    #[inline]
    fn add_prod(&mut self, a: &RigorousComplex, b: &RigorousComplex) {
        // re += a.re b.re - a.im b.im ; im += a.re b.im + a.im b.re.
        // Each real product is one directed interval multiply; the outer
        // sums are exact, so term order never shows in the result.
        Self::add_real(&mut self.re_lo, &mut self.re_hi, a.re * b.re);
        Self::add_real(&mut self.re_lo, &mut self.re_hi, -(a.im * b.im));
        Self::add_real(&mut self.im_lo, &mut self.im_hi, a.re * b.im);
        Self::add_real(&mut self.im_lo, &mut self.im_hi, a.im * b.re);
    }

    fn finish(&self) -> RigorousComplex {
        RigorousComplex::new(
            RigorousReal::new(self.re_lo.round_down(), self.re_hi.round_up()),
            RigorousReal::new(self.im_lo.round_down(), self.im_hi.round_up()),
        )
    }
}

/// Sparse scalar Fourier sequence.
pub type ScalarSeq<T> = HashMap<MultiIndex, T>;

/// Three-component sparse Fourier field; houses vorticities, velocities and
/// forcings. Coefficients absent from the maps are exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField<T: Coeff> {
    pub comps: [ScalarSeq<T>; 3],
}

impl<T: Coeff> Default for SpectralField<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Coeff> SpectralField<T> {
    pub fn new() -> Self {
        Self {
            comps: [HashMap::new(), HashMap::new(), HashMap::new()],
        }
    }

    pub fn get(&self, j: &ModeKey) -> T {
        self.comps[j.comp].get(&j.n).copied().unwrap_or_else(T::zero)
    }

    /// Insert, dropping exact zeros.
    pub fn set(&mut self, j: ModeKey, v: T) {
        if v.is_exact_zero() {
            self.comps[j.comp].remove(&j.n);
        } else {
            self.comps[j.comp].insert(j.n, v);
        }
    }

    pub fn add_to(&mut self, j: ModeKey, v: T) {
        let cur = self.get(&j);
        self.set(j, cur.add(&v));
    }

    pub fn len(&self) -> usize {
        self.comps.iter().map(|c| c.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.iter().all(|c| c.is_empty())
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeKey, &T)> {
        self.comps
            .iter()
            .enumerate()
            .flat_map(|(c, m)| m.iter().map(move |(n, v)| (ModeKey::new(*n, c), v)))
    }

    /// Keys in deterministic (component, lexicographic) order.
    pub fn sorted_keys(&self) -> Vec<ModeKey> {
        let mut keys: Vec<ModeKey> = self.iter().map(|(j, _)| j).collect();
        keys.sort();
        keys
    }

    /// Union of the mode supports of all components, sorted.
    pub fn support_modes(&self) -> Vec<MultiIndex> {
        let mut s: Vec<MultiIndex> = self
            .comps
            .iter()
            .flat_map(|c| c.keys().copied())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        s.sort();
        s
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> SpectralField<U> {
        let mut out = SpectralField::new();
        for (j, v) in self.iter() {
            out.set(j, f(v));
        }
        out
    }

    pub fn add_field(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (j, v) in o.iter() {
            out.add_to(j, *v);
        }
        out
    }

    pub fn sub_field(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (j, v) in o.iter() {
            out.add_to(j, v.neg());
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v.mul(&s))
    }

    pub fn within_box(&self, b: &SupportBox) -> bool {
        self.iter().all(|(j, _)| b.contains(&j.n))
    }

    pub fn has_origin_modes(&self) -> bool {
        self.comps.iter().any(|c| c.contains_key(&MultiIndex::ZERO))
    }

    /// True when no mode has a spatial index n~ = 0.
    pub fn zero_spatial_mean(&self) -> bool {
        !self
            .iter()
            .any(|(j, _)| j.n.n1 == 0 && j.n.n2 == 0 && j.n.n3 == 0)
    }
}

impl SpectralField<RigorousComplex> {
    pub fn midpoint(&self) -> SpectralField<C64> {
        self.map(|v| v.mid_c64())
    }

    /// All coefficient enclosures contain zero.
    pub fn encloses_zero(&self) -> bool {
        self.iter().all(|(_, v)| v.contains_zero())
    }

    pub fn overlaps(&self, o: &Self) -> bool {
        let keys: std::collections::BTreeSet<ModeKey> =
            self.iter().map(|(j, _)| j).chain(o.iter().map(|(j, _)| j)).collect();
        keys.iter().all(|j| self.get(j).overlaps(&o.get(j)))
    }
}

impl SpectralField<C64> {
    pub fn to_rigorous(&self) -> SpectralField<RigorousComplex> {
        self.map(|v| RigorousComplex::point(v.re, v.im))
    }

    pub fn sup_coeff(&self) -> f64 {
        self.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max)
    }
}

/// Convolution of scalar sequences: (a * b)_n = sum_k a_k b_{n-k}. Both
/// inputs finitely supported; the result support is the Minkowski sum.
pub fn convolve<T: Coeff>(a: &ScalarSeq<T>, b: &ScalarSeq<T>) -> ScalarSeq<T> {
    let mut accs: HashMap<MultiIndex, T::Acc> = HashMap::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let n = ka.add(kb);
            accs.entry(n).or_default().add_prod(va, vb);
        }
    }
    accs.into_iter()
        .filter_map(|(n, acc)| {
            let v = acc.finish();
            (!v.is_exact_zero()).then_some((n, v))
        })
        .collect()
}

/// (D_l a)_n = n_l a_n for axis l in 0..4 (no factor i).
pub fn partial<T: Coeff>(axis: usize, a: &ScalarSeq<T>) -> ScalarSeq<T> {
    a.iter()
        .filter_map(|(n, v)| {
            let k = n.get(axis) as i64;
            (k != 0).then(|| (*n, v.scale_int(k)))
        })
        .collect()
}

/// [(a star D~) b]^(l) = sum_m a^(m) * (D_m b^(l)): the l-th component in
/// Fourier space of (a . grad) b, up to a factor i.
pub fn advect<T: Coeff>(a: &SpectralField<T>, b: &SpectralField<T>) -> SpectralField<T> {
    let mut out = SpectralField::new();
    for l in 0..3 {
        let mut accs: HashMap<MultiIndex, T::Acc> = HashMap::new();
        for m in 0..3 {
            let dmb = partial(m, &b.comps[l]);
            for (ka, va) in &a.comps[m] {
                for (kb, vb) in &dmb {
                    accs.entry(ka.add(kb)).or_default().add_prod(va, vb);
                }
            }
        }
        out.comps[l] = accs
            .into_iter()
            .filter_map(|(n, acc)| {
                let v = acc.finish();
                (!v.is_exact_zero()).then_some((n, v))
            })
            .collect();
    }
    out
}

/// Entries of the Biot-Savart matrix at spatial index n~: an antisymmetric
/// integer matrix divided by n~^2 and multiplied by i. Returns the (row,
/// col) integer numerators.
pub fn biot_savart_numerators(n: &MultiIndex) -> [[i64; 3]; 3] {
    let (a, b, c) = (n.n1 as i64, n.n2 as i64, n.n3 as i64);
    [[0, -c, b], [c, 0, -a], [-b, a, 0]]
}

/// Modewise velocity recovery u = M omega; all spatial-mean modes map to
/// zero.
pub fn biot_savart<T: Coeff>(omega: &SpectralField<T>) -> SpectralField<T> {
    let mut out = SpectralField::new();
    for n in omega.support_modes() {
        let nsq = n.sp_sq();
        if nsq == 0 {
            continue;
        }
        let num = biot_savart_numerators(&n);
        let w = [
            omega.get(&ModeKey::new(n, 0)),
            omega.get(&ModeKey::new(n, 1)),
            omega.get(&ModeKey::new(n, 2)),
        ];
        for l in 0..3 {
            // (i/n~^2) * sum_m num[l][m] w_m ; each row has two entries.
            let mut acc = T::zero();
            for m in 0..3 {
                if num[l][m] != 0 && !w[m].is_exact_zero() {
                    acc = acc.add(&w[m].scale_int(num[l][m]));
                }
            }
            if !acc.is_exact_zero() {
                out.set(ModeKey::new(n, l), acc.mul_i().div_pos_int(nsq));
            }
        }
    }
    out
}

/// Fourier curl with the explicit factor i: (curl a)_n = i n~ x a_n, so that
/// curl(biot_savart(w)) = w on divergence-free fields without spatial-mean
/// modes.
pub fn curl<T: Coeff>(a: &SpectralField<T>) -> SpectralField<T> {
    let mut out = SpectralField::new();
    for n in a.support_modes() {
        let (k1, k2, k3) = (n.n1 as i64, n.n2 as i64, n.n3 as i64);
        let v = [
            a.get(&ModeKey::new(n, 0)),
            a.get(&ModeKey::new(n, 1)),
            a.get(&ModeKey::new(n, 2)),
        ];
        let rows = [
            v[2].scale_int(k2).sub(&v[1].scale_int(k3)),
            v[0].scale_int(k3).sub(&v[2].scale_int(k1)),
            v[1].scale_int(k1).sub(&v[0].scale_int(k2)),
        ];
        for (l, r) in rows.into_iter().enumerate() {
            if !r.is_exact_zero() {
                out.set(ModeKey::new(n, l), r.mul_i());
            }
        }
    }
    out
}

/// Divergence in the D_l convention (no factor i): sum_m n_m a^(m)_n. The
/// divergence-free condition of the solution space is exactly this sum
/// vanishing.
pub fn divergence<T: Coeff>(a: &SpectralField<T>) -> ScalarSeq<T> {
    let mut out: ScalarSeq<T> = HashMap::new();
    for n in a.support_modes() {
        let mut acc = T::Acc::default();
        for m in 0..3 {
            let k = n.get(m) as i64;
            if k != 0 {
                let v = a.get(&ModeKey::new(n, m));
                if !v.is_exact_zero() {
                    acc.add_term(&v.scale_int(k));
                }
            }
        }
        let v = acc.finish();
        if !v.is_exact_zero() {
            out.insert(n, v);
        }
    }
    out
}

/// Weighted norm selector. `plain` is the geometric l1_eta norm; the minus
/// variants divide the weight by max(|n~|_inf^2, |n4|), |n|_inf and
/// |n~|_inf respectively.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NormKind {
    Plain,
    Minus21,
    Minus11,
    Minus10,
}

#[derive(Clone, Copy, Debug)]
pub struct WeightedNorm {
    pub kind: NormKind,
    pub eta: RigorousReal,
}

impl WeightedNorm {
    pub fn plain(eta: RigorousReal) -> Self {
        Self {
            kind: NormKind::Plain,
            eta,
        }
    }

    pub fn unit() -> Self {
        Self::plain(RigorousReal::one())
    }
}

/// eta^k as an enclosure; exact fast path at eta = 1.
pub fn eta_pow(eta: &RigorousReal, k: i64) -> RigorousReal {
    debug_assert!(k >= 0);
    if *eta == RigorousReal::one() {
        return RigorousReal::one();
    }
    let mut acc = RigorousReal::one();
    for _ in 0..k {
        acc = acc * *eta;
    }
    acc
}

fn norm_divisor(kind: NormKind, n: &MultiIndex) -> Option<i64> {
    match kind {
        NormKind::Plain => Some(1),
        NormKind::Minus21 => Some(n.sp_linf().pow(2).max(n.n4.unsigned_abs() as i64)),
        NormKind::Minus11 => Some(n.linf()),
        NormKind::Minus10 => {
            let d = n.sp_linf();
            (d > 0).then_some(d)
        }
    }
}

/// Upper-bounding enclosure of a weighted scalar-sequence norm.
pub fn norm_scalar(a: &ScalarSeq<RigorousComplex>, w: &WeightedNorm) -> RigorousReal {
    let mut lo = ExactSum::new();
    let mut hi = ExactSum::new();
    for (n, v) in a {
        if v.is_zero_point() {
            continue;
        }
        let div = match norm_divisor(w.kind, n) {
            Some(d) => d,
            None => {
                // nonzero coefficient where the weight is undefined
                return RigorousReal::new(0.0, f64::INFINITY);
            }
        };
        debug_assert!(div >= 1);
        let term = v.abs() * eta_pow(&w.eta, n.l1());
        let term = if div == 1 {
            term
        } else {
            term.try_div(&RigorousReal::from_int(div)).expect("positive divisor")
        };
        lo.add(term.lo());
        hi.add(term.hi());
    }
    RigorousReal::new(lo.round_down().max(0.0), hi.round_up())
}

/// Norm of a three-component field: the sum of the component norms.
pub fn norm_field(a: &SpectralField<RigorousComplex>, w: &WeightedNorm) -> RigorousReal {
    let mut acc = RigorousReal::zero();
    for c in &a.comps {
        acc = acc + norm_scalar(c, w);
    }
    acc
}

/// l1_eta norm of the sequence n -> max_p |a^(p)_n| (used by the tail bound
/// of the truncation-defect estimate).
pub fn norm_compmax(a: &SpectralField<RigorousComplex>, eta: &RigorousReal) -> RigorousReal {
    let mut lo = ExactSum::new();
    let mut hi = ExactSum::new();
    for n in a.support_modes() {
        let mut m = RigorousReal::zero();
        for c in 0..3 {
            m = m.max(&a.get(&ModeKey::new(n, c)).abs());
        }
        let term = m * eta_pow(eta, n.l1());
        lo.add(term.lo());
        hi.add(term.hi());
    }
    RigorousReal::new(lo.round_down().max(0.0), hi.round_up())
}

/// Checked helper turning a three-vector coefficient into its orthogonal
/// projection onto the plane n~ . w = 0 (the modewise divergence-free
/// projection); identity for n~ = 0.
pub fn project_div_free<T: Coeff>(n: &MultiIndex, w: [T; 3]) -> [T; 3] {
    let nsq = n.sp_sq();
    if nsq == 0 {
        return w;
    }
    let axes = [n.n1 as i64, n.n2 as i64, n.n3 as i64];
    // dot = n~ . w
    let mut dot = T::zero();
    for m in 0..3 {
        if axes[m] != 0 {
            dot = dot.add(&w[m].scale_int(axes[m]));
        }
    }
    let mut out = w;
    if !dot.is_exact_zero() {
        let scaled = dot.div_pos_int(nsq);
        for m in 0..3 {
            if axes[m] != 0 {
                out[m] = out[m].sub(&scaled.scale_int(axes[m]));
            }
        }
    }
    out
}

/// Errors if any mode of `a` sits at the spatial mean or outside Z^4_*.
pub fn reject_mean_modes<T: Coeff>(a: &SpectralField<T>, what: &str) -> Result<()> {
    if a.has_origin_modes() {
        return Err(Error::ForcingInvalid(format!("{what} has an n = 0 mode")));
    }
    Ok(())
}
