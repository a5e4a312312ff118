//! Signed permutations ρ𝔠 of [1, k], their involutions, and the block
//! representatives t_w and x_w attached to a composition n = n₁ + … + n_k + r.
//!
//! Block layout of an N × N matrix: (n₁, …, n_k, n₀ + 2r, n_k, …, n₁).
//! ι(g₁, …, g_k; h) = diag(g₁, …, g_k, h, g_k*, …, g₁*) with
//! g* = w ᵗg^{−τ} w.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{self, Case, FormInvariants};
use crate::localfield::SquareClass;
use crate::numfield::{
    hilbert90_matrix, matrix_apply, tau_transpose, BiquadMatrix, Involution, NumFieldError,
};
use crate::symspace::{
    self, classify_minus_one, orbit_invariants, realize, y_orbit_bit, y_representative, ClassicalPair, Component,
    SymSpaceError, XComponent, XOrbitInvariant,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeylError {
    #[error("composition parts must be positive")]
    ZeroPart,
    #[error("composition sums to {got}, the pair has n = {expected}")]
    WrongTotal { expected: usize, got: usize },
    #[error("split_even_sign is only allowed for r = 0 with last part ≠ 1 in the split even orthogonal case")]
    SignNotAllowed,
    #[error("split_even_sign is required for this composition")]
    SignRequired,
    #[error("r = 1 is not a standard Levi in the split even orthogonal case")]
    SplitEvenRankOne,
    #[error("not a permutation of [1, {0}]")]
    NotPermutation(usize),
    #[error("index {0} out of range")]
    IndexRange(usize),
    #[error("signed permutation is not an involution")]
    NotInvolution,
    #[error("w does not preserve the parts: n_ρ(i) ≠ n_i")]
    Incompatible,
    #[error("w has size {got}, composition has k = {expected}")]
    WrongK { expected: usize, got: usize },
    #[error("w is not in the admissible set (o(𝔠) must be even)")]
    NotAdmissible,
    #[error("expected {expected} y bits, got {got}")]
    YBitCount { expected: usize, got: usize },
    #[error("bits must be 0 or 1")]
    BadBit,
    #[error("z invariant {0} is not an orbit of X_r in the required component")]
    UnrealizableZ(String),
    #[error("matrix is not of the form t_w·ι(…)")]
    NotInLevi,
    #[error(transparent)]
    SymSpace(#[from] SymSpaceError),
    #[error(transparent)]
    NumField(#[from] NumFieldError),
    #[error(transparent)]
    Form(#[from] forms::FormError),
    #[error(transparent)]
    Local(#[from] crate::localfield::LocalFieldError),
}

pub type Result<T> = std::result::Result<T, WeylError>;

/// α = (n₁, …, n_k; r), with a sign choosing between the two standard
/// parabolics of type (n₁, …, n_k) in the split even orthogonal case.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Composition {
    pub parts: Vec<usize>,
    pub r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_even_sign: Option<i8>,
}

impl Composition {
    pub fn new(parts: Vec<usize>, r: usize) -> Result<Self> {
        if parts.contains(&0) {
            return Err(WeylError::ZeroPart);
        }
        Ok(Composition { parts, r, split_even_sign: None })
    }

    pub fn with_sign(mut self, sign: i8) -> Self {
        self.split_even_sign = Some(sign);
        self
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum::<usize>() + self.r
    }

    /// Whether the κ-conjugated parabolic is meant.
    pub fn kappa_twisted(&self) -> bool {
        self.split_even_sign == Some(-1)
    }

    /// Checks the composition against a pair.
    pub fn validate(&self, pair: &ClassicalPair) -> Result<()> {
        if self.parts.contains(&0) {
            return Err(WeylError::ZeroPart);
        }
        if self.n() != pair.n() {
            return Err(WeylError::WrongTotal { expected: pair.n(), got: self.n() });
        }
        let split = pair.is_split_even_orthogonal();
        if split && self.r == 1 {
            return Err(WeylError::SplitEvenRankOne);
        }
        let needs_sign = split && self.r == 0 && self.parts.last().is_some_and(|&l| l != 1);
        match self.split_even_sign {
            Some(s) if !needs_sign || !(s == 1 || s == -1) => Err(WeylError::SignNotAllowed),
            None if needs_sign => Err(WeylError::SignRequired),
            _ => Ok(()),
        }
    }

    /// All compositions of n with at most `max_k` parts each at most
    /// `max_part`, valid for the pair (both signs where needed).
    pub fn enumerate(pair: &ClassicalPair, max_k: usize, max_part: usize) -> Vec<Composition> {
        let n = pair.n();
        let mut out = Vec::new();
        let mut parts = Vec::new();
        fn rec(n: usize, max_k: usize, max_part: usize, parts: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, usize)>) {
            let used: usize = parts.iter().sum();
            out.push((parts.clone(), n - used));
            if parts.len() == max_k {
                return;
            }
            for p in 1..=max_part.min(n - used) {
                parts.push(p);
                rec(n, max_k, max_part, parts, out);
                parts.pop();
            }
        }
        let mut raw = Vec::new();
        rec(n, max_k, max_part, &mut parts, &mut raw);
        for (parts, r) in raw {
            let base = Composition { parts, r, split_even_sign: None };
            for c in [base.clone(), base.clone().with_sign(1), base.with_sign(-1)] {
                if c.validate(pair).is_ok() {
                    out.push(c);
                }
            }
        }
        out
    }
}

/// w = ρ𝔠: w(e_i) = ±e_{ρ(i)}, with sign − exactly for i ∈ 𝔠.
/// Stored 0-based; JSON uses 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "SignedPermJson", into = "SignedPermJson")]
pub struct SignedPerm {
    rho: Vec<usize>,
    c: Vec<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignedPermJson {
    pub rho: Vec<usize>,
    #[serde(default)]
    pub c: Vec<usize>,
}

impl TryFrom<SignedPermJson> for SignedPerm {
    type Error = WeylError;
    fn try_from(j: SignedPermJson) -> Result<Self> {
        let k = j.rho.len();
        let rho = j.rho.iter().map(|&x| x.checked_sub(1).ok_or(WeylError::IndexRange(x))).collect::<Result<Vec<_>>>()?;
        let mut c = vec![false; k];
        for &i in &j.c {
            if i == 0 || i > k {
                return Err(WeylError::IndexRange(i));
            }
            c[i - 1] = true;
        }
        SignedPerm::new(rho, c)
    }
}

impl From<SignedPerm> for SignedPermJson {
    fn from(w: SignedPerm) -> Self {
        SignedPermJson { rho: w.rho.iter().map(|x| x + 1).collect(), c: w.c_indices().iter().map(|x| x + 1).collect() }
    }
}

impl SignedPerm {
    pub fn new(rho: Vec<usize>, c: Vec<bool>) -> Result<Self> {
        let k = rho.len();
        if c.len() != k {
            return Err(WeylError::NotPermutation(k));
        }
        let mut seen = vec![false; k];
        for &x in &rho {
            if x >= k || seen[x] {
                return Err(WeylError::NotPermutation(k));
            }
            seen[x] = true;
        }
        Ok(SignedPerm { rho, c })
    }

    pub fn identity(k: usize) -> Self {
        SignedPerm { rho: (0..k).collect(), c: vec![false; k] }
    }

    /// The elementary sign change of index i (0-based).
    pub fn sign_change(k: usize, i: usize) -> Self {
        let mut w = Self::identity(k);
        w.c[i] = true;
        w
    }

    /// The transposition of i and i + 1 (0-based).
    pub fn adjacent_swap(k: usize, i: usize) -> Self {
        let mut w = Self::identity(k);
        w.rho.swap(i, i + 1);
        w
    }

    pub fn k(&self) -> usize {
        self.rho.len()
    }

    pub fn rho(&self) -> &[usize] {
        &self.rho
    }

    pub fn in_c(&self, i: usize) -> bool {
        self.c[i]
    }

    pub fn c_mask(&self) -> &[bool] {
        &self.c
    }

    pub fn c_indices(&self) -> Vec<usize> {
        (0..self.k()).filter(|&i| self.c[i]).collect()
    }

    pub fn sign(&self, i: usize) -> i64 {
        if self.c[i] {
            -1
        } else {
            1
        }
    }

    /// self ∘ other.
    pub fn compose(&self, other: &SignedPerm) -> SignedPerm {
        let k = self.k();
        let rho = (0..k).map(|i| self.rho[other.rho[i]]).collect();
        let c = (0..k).map(|i| other.c[i] ^ self.c[other.rho[i]]).collect();
        SignedPerm { rho, c }
    }

    pub fn inverse(&self) -> SignedPerm {
        let k = self.k();
        let mut rho = vec![0; k];
        let mut c = vec![false; k];
        for i in 0..k {
            rho[self.rho[i]] = i;
            c[self.rho[i]] = self.c[i];
        }
        SignedPerm { rho, c }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.k())
    }

    pub fn is_involution(&self) -> bool {
        self.compose(self).is_identity()
    }

    /// Whether n_{ρ(i)} = n_i for all i.
    pub fn compatible(&self, parts: &[usize]) -> bool {
        self.k() == parts.len() && (0..self.k()).all(|i| parts[self.rho[i]] == parts[i])
    }

    /// The image of a coordinate vector: (wλ)_{ρ(i)} = ±λ_i.
    pub fn act<T: Clone + std::ops::Neg<Output = T>>(&self, v: &[T]) -> Vec<T> {
        let mut out = v.to_vec();
        for i in 0..self.k() {
            out[self.rho[i]] = if self.c[i] { -v[i].clone() } else { v[i].clone() };
        }
        out
    }

    /// All 2^k·k! signed permutations.
    pub fn all(k: usize) -> Vec<SignedPerm> {
        let mut perms = Vec::new();
        let mut cur: Vec<usize> = (0..k).collect();
        permutations(&mut cur, 0, &mut perms);
        let mut out = Vec::new();
        for rho in perms {
            for mask in 0..(1u32 << k) {
                let c = (0..k).map(|i| mask >> i & 1 == 1).collect();
                out.push(SignedPerm { rho: rho.clone(), c });
            }
        }
        out
    }
}

fn permutations(cur: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
    if start == cur.len() {
        out.push(cur.clone());
        return;
    }
    for i in start..cur.len() {
        cur.swap(start, i);
        permutations(cur, start + 1, out);
        cur.swap(start, i);
    }
}

/// A signed involution: ρ² = id and ρ(𝔠) = 𝔠.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "SignedPerm", into = "SignedPerm")]
pub struct SignedInvolution(SignedPerm);

impl TryFrom<SignedPerm> for SignedInvolution {
    type Error = WeylError;
    fn try_from(w: SignedPerm) -> Result<Self> {
        if w.is_involution() {
            Ok(SignedInvolution(w))
        } else {
            Err(WeylError::NotInvolution)
        }
    }
}

impl From<SignedInvolution> for SignedPerm {
    fn from(w: SignedInvolution) -> Self {
        w.0
    }
}

impl std::ops::Deref for SignedInvolution {
    type Target = SignedPerm;
    fn deref(&self) -> &SignedPerm {
        &self.0
    }
}

impl SignedInvolution {
    pub fn new(w: SignedPerm) -> Result<Self> {
        Self::try_from(w)
    }

    pub fn identity(k: usize) -> Self {
        SignedInvolution(SignedPerm::identity(k))
    }

    pub fn perm(&self) -> &SignedPerm {
        &self.0
    }

    /// I(w) = {i ∈ 𝔠 : ρ(i) = i}, 0-based and increasing.
    pub fn fixed_in_c(&self) -> Vec<usize> {
        (0..self.k()).filter(|&i| self.c[i] && self.rho[i] == i).collect()
    }

    /// o(𝔠): the number of i ∈ 𝔠 with n_i odd.
    pub fn odd_count(&self, parts: &[usize]) -> usize {
        (0..self.k()).filter(|&i| self.c[i] && parts[i] % 2 == 1).count()
    }

    /// N(w) = Σ_{i ∈ I(w)} n_i.
    pub fn fixed_size(&self, parts: &[usize]) -> usize {
        self.fixed_in_c().iter().map(|&i| parts[i]).sum()
    }

    /// Conjugate s w s⁻¹.
    pub fn conjugate(&self, s: &SignedPerm) -> SignedInvolution {
        SignedInvolution(s.compose(&self.0).compose(&s.inverse()))
    }

    /// Sort key (|𝔠|, ρ, 𝔠) with 𝔠 compared as an increasing index list.
    pub fn order_key(&self) -> (usize, Vec<usize>, Vec<usize>) {
        (self.c_indices().len(), self.rho.clone(), self.c_indices())
    }
}

/// Whether the admissible set requires o(𝔠) even.
pub fn parity_rule_applies(pair: &ClassicalPair, comp: &Composition) -> bool {
    pair.is_split_even_orthogonal() && comp.r == 0
}

/// Involutions w with n_{ρ(i)} = n_i, and o(𝔠) even when `circ` is set,
/// sorted by (|𝔠|, ρ, 𝔠).
pub fn enumerate_involutions(comp: &Composition, circ: bool) -> Vec<SignedInvolution> {
    let k = comp.k();
    let mut matchings = Vec::new();
    fn rec(rho: &mut Vec<usize>, i: usize, parts: &[usize], out: &mut Vec<Vec<usize>>) {
        let k = rho.len();
        if i == k {
            out.push(rho.clone());
            return;
        }
        if rho[i] != usize::MAX {
            return rec(rho, i + 1, parts, out);
        }
        rho[i] = i;
        rec(rho, i + 1, parts, out);
        for j in i + 1..k {
            if rho[j] == usize::MAX && parts[j] == parts[i] {
                rho[i] = j;
                rho[j] = i;
                rec(rho, i + 1, parts, out);
                rho[j] = usize::MAX;
            }
        }
        rho[i] = usize::MAX;
    }
    rec(&mut vec![usize::MAX; k], 0, &comp.parts, &mut matchings);
    let mut out = Vec::new();
    for rho in matchings {
        let orbits: Vec<usize> = (0..k).filter(|&i| rho[i] >= i).collect();
        for mask in 0..(1u32 << orbits.len()) {
            let mut c = vec![false; k];
            for (b, &i) in orbits.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    c[i] = true;
                    c[rho[i]] = true;
                }
            }
            let w = SignedInvolution(SignedPerm { rho: rho.clone(), c });
            if !circ || w.odd_count(&comp.parts) % 2 == 0 {
                out.push(w);
            }
        }
    }
    out.sort_by_key(|w| w.order_key());
    out
}

/// The same set by filtering all 2^k·k! signed permutations.
pub fn enumerate_involutions_brute(comp: &Composition, circ: bool) -> Vec<SignedInvolution> {
    let mut out: Vec<SignedInvolution> = SignedPerm::all(comp.k())
        .into_iter()
        .filter(|w| w.is_involution() && w.compatible(&comp.parts))
        .map(SignedInvolution)
        .filter(|w| !circ || w.odd_count(&comp.parts) % 2 == 0)
        .collect();
    out.sort_by_key(|w| w.order_key());
    out
}

/// Admissible involutions for a pair and composition.
pub fn admissible_involutions(pair: &ClassicalPair, comp: &Composition) -> Vec<SignedInvolution> {
    enumerate_involutions(comp, parity_rule_applies(pair, comp))
}

fn check_w(comp: &Composition, w: &SignedPerm) -> Result<()> {
    if w.k() != comp.k() {
        return Err(WeylError::WrongK { expected: comp.k(), got: w.k() });
    }
    if !w.compatible(&comp.parts) {
        return Err(WeylError::Incompatible);
    }
    Ok(())
}

/// Row offsets of the 2k + 1 diagonal blocks.
struct Layout {
    starts: Vec<usize>,
    sizes: Vec<usize>,
}

impl Layout {
    fn new(comp: &Composition, pair: &ClassicalPair) -> Self {
        let mut sizes = comp.parts.clone();
        sizes.push(pair.n0() + 2 * comp.r);
        sizes.extend(comp.parts.iter().rev());
        let mut starts = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for s in &sizes {
            starts.push(acc);
            acc += s;
        }
        Layout { starts, sizes }
    }

    fn block(&self, i: usize) -> (usize, usize) {
        (self.starts[i], self.sizes[i])
    }

    fn mirror(&self, i: usize) -> (usize, usize) {
        let j = self.sizes.len() - 1 - i;
        (self.starts[j], self.sizes[j])
    }

    fn middle(&self) -> (usize, usize) {
        let k = (self.sizes.len() - 1) / 2;
        (self.starts[k], self.sizes[k])
    }
}

/// g* = w ᵗg^{−τ} w.
pub fn star(g: &BiquadMatrix) -> Result<BiquadMatrix> {
    let w = BiquadMatrix::antidiagonal(g.rows(), g.zero_elem());
    let inv = tau_transpose(g).inverse().ok_or(NumFieldError::NotInvertible)?;
    Ok(w.mul(&inv).mul(&w))
}

/// ι(g₁, …, g_k; h).
pub fn iota(comp: &Composition, pair: &ClassicalPair, gs: &[BiquadMatrix], h: &BiquadMatrix) -> Result<BiquadMatrix> {
    let layout = Layout::new(comp, pair);
    let f = pair.field();
    let size = pair.n0() + 2 * comp.n();
    let mut out = BiquadMatrix::zeros(size, size, &f.zero());
    if gs.len() != comp.k() {
        return Err(WeylError::WrongK { expected: comp.k(), got: gs.len() });
    }
    for (i, g) in gs.iter().enumerate() {
        let (s, n) = layout.block(i);
        if g.rows() != n {
            return Err(SymSpaceError::Dimension { expected: n, got: g.rows() }.into());
        }
        out.set_block(s, s, g);
        let (ms, _) = layout.mirror(i);
        out.set_block(ms, ms, &star(g)?);
    }
    let (ms, mn) = layout.middle();
    if h.rows() != mn {
        return Err(SymSpaceError::Dimension { expected: mn, got: h.rows() }.into());
    }
    out.set_block(ms, ms, h);
    Ok(out)
}

/// κ = ι(I_{n−1}; w₂), used for the second parabolic in the split even
/// orthogonal case.
pub fn kappa(pair: &ClassicalPair) -> BiquadMatrix {
    pair.eta(pair.n())
}

/// η_{m,M}: η_m, or the identity when r = 0 in the split even orthogonal case.
fn eta_m_levi(pair: &ClassicalPair, comp: &Composition, m: usize) -> BiquadMatrix {
    if parity_rule_applies(pair, comp) {
        BiquadMatrix::identity(pair.n0() + 2 * m, &pair.field().zero())
    } else {
        pair.eta(m)
    }
}

fn t_rho(comp: &Composition, pair: &ClassicalPair, w: &SignedPerm) -> Result<BiquadMatrix> {
    let f = pair.field();
    let n: usize = comp.parts.iter().sum();
    let mut starts = vec![0];
    for p in &comp.parts {
        starts.push(starts.last().unwrap() + p);
    }
    let mut wr = BiquadMatrix::zeros(n, n, &f.zero());
    for j in 0..comp.k() {
        let i = w.rho()[j];
        for t in 0..comp.parts[j] {
            wr.set(starts[i] + t, starts[j] + t, f.one());
        }
    }
    let whole = Composition { parts: if n > 0 { vec![n] } else { vec![] }, r: comp.r, split_even_sign: None };
    let gs: Vec<BiquadMatrix> = if n > 0 { vec![wr] } else { vec![] };
    iota(&whole, pair, &gs, &BiquadMatrix::identity(pair.n0() + 2 * comp.r, &f.zero()))
}

fn t_index(comp: &Composition, pair: &ClassicalPair, i: usize) -> BiquadMatrix {
    let f = pair.field();
    let layout = Layout::new(comp, pair);
    let size = pair.n0() + 2 * comp.n();
    let mut t = BiquadMatrix::identity(size, &f.zero());
    let (s, ni) = layout.block(i);
    let (ms, _) = layout.mirror(i);
    let mid_start = s + ni;
    let m = comp.parts[i + 1..].iter().sum::<usize>() + comp.r;
    let mid_size = pair.n0() + 2 * m;
    let zero = BiquadMatrix::zeros(2 * ni + mid_size, 2 * ni + mid_size, &f.zero());
    t.set_block(s, s, &zero);
    let eta = eta_m_levi(pair, comp, m).pow(ni % 2);
    t.set_block(mid_start, mid_start, &eta);
    let eps = f.from_int(pair.epsilon());
    for a in 0..ni {
        t.set(s + a, ms + a, f.one());
        t.set(ms + a, s + a, eps.clone());
    }
    t
}

/// t_w = t_ρ·Π_{i∈𝔠} t_i, conjugated by κ for the second split even
/// parabolic.
pub fn build_tw(comp: &Composition, w: &SignedPerm, pair: &ClassicalPair) -> Result<BiquadMatrix> {
    comp.validate(pair)?;
    check_w(comp, w)?;
    let mut t = t_rho(comp, pair, w)?;
    for i in w.c_indices() {
        t = t.mul(&t_index(comp, pair, i));
    }
    if comp.kappa_twisted() {
        let k = kappa(pair);
        t = k.mul(&t).mul(&k);
    }
    Ok(t)
}

/// ι or its κ-conjugate, matching [`build_tw`].
pub fn levi_embed(comp: &Composition, pair: &ClassicalPair, gs: &[BiquadMatrix], h: &BiquadMatrix) -> Result<BiquadMatrix> {
    let m = iota(comp, pair, gs, h)?;
    if comp.kappa_twisted() {
        let k = kappa(pair);
        return Ok(k.mul(&m).mul(&k));
    }
    Ok(m)
}

/// Image blocks of t_w ι(g; h) t_w⁻¹: g'_i = g_{ρ⁻¹(i)} off 𝔠, g*_{ρ⁻¹(i)}
/// on 𝔠, and h' = η_r^{o} h η_r^{−o}.
pub fn conjugated_blocks(
    comp: &Composition,
    w: &SignedPerm,
    pair: &ClassicalPair,
    gs: &[BiquadMatrix],
    h: &BiquadMatrix,
) -> Result<(Vec<BiquadMatrix>, BiquadMatrix)> {
    let inv = w.inverse();
    let mut out = Vec::with_capacity(gs.len());
    for i in 0..comp.k() {
        let g = &gs[inv.rho()[i]];
        out.push(if w.in_c(i) { star(g)? } else { g.clone() });
    }
    let odd = (0..comp.k()).filter(|&i| w.in_c(i) && comp.parts[i] % 2 == 1).count();
    let eta = eta_m_levi(pair, comp, comp.r).pow(odd % 2);
    let hp = eta.mul(h).mul(&eta.inverse().expect("η is an involution"));
    Ok((out, hp))
}

/// Component of X_r holding z: the complement iff the case is orthogonal,
/// o(𝔠) is odd, and n₀ > 0 or r > 1.
pub fn z_component(comp: &Composition, w: &SignedInvolution, pair: &ClassicalPair) -> XComponent {
    if pair.case() != Case::Orthogonal {
        return XComponent::Full;
    }
    let odd = w.odd_count(&comp.parts) % 2 == 1;
    if odd && (pair.n0() > 0 || comp.r > 1) {
        XComponent::Complement
    } else {
        XComponent::Sx
    }
}

/// The orbits of X_r ∩ η_r^{o(𝔠)} G_r°.
pub fn z_orbits(comp: &Composition, w: &SignedInvolution, pair: &ClassicalPair) -> Result<Vec<XOrbitInvariant>> {
    Ok(orbit_invariants(&pair.with_n(comp.r), z_component(comp, w, pair))?)
}

/// δ_{w,M}.
pub fn delta(comp: &Composition, w: &SignedInvolution, pair: &ClassicalPair) -> Result<u32> {
    let n0 = pair.n0();
    let r = comp.r;
    Ok(match pair.case() {
        Case::Symplectic => 0,
        Case::Unitary => u32::from(n0 + 2 * r > 0),
        Case::Orthogonal => {
            if r == 0 && n0 <= 1 {
                0
            } else if r == 0 && n0 == 2 {
                let odd = w.odd_count(&comp.parts) % 2 == 1;
                let det = pair.kernel_det();
                let target = if odd { -BigRational::from_integer(pair.field().a().into()) } else { -BigRational::one() };
                let p = pair.prime();
                u32::from(SquareClass::reduce(&det, p)? != SquareClass::reduce(&target, p)?)
            } else {
                1
            }
        }
    })
}

/// 2^{|I(w)| + δ}.
pub fn admissible_orbit_count(comp: &Composition, w: &SignedInvolution, pair: &ClassicalPair) -> Result<usize> {
    comp.validate(pair)?;
    check_w(comp, w)?;
    if parity_rule_applies(pair, comp) && w.odd_count(&comp.parts) % 2 == 1 {
        return Err(WeylError::NotAdmissible);
    }
    Ok(1 << (w.fixed_in_c().len() as u32 + delta(comp, w, pair)?))
}

/// The representative x_w with its predicted G°-orbit.
#[derive(Debug, Clone)]
pub struct Xw {
    pub x: BiquadMatrix,
    pub t: BiquadMatrix,
    pub predicted: XOrbitInvariant,
}

fn check_xw_inputs(
    comp: &Composition,
    w: &SignedInvolution,
    y_bits: &[u8],
    z_inv: &XOrbitInvariant,
    pair: &ClassicalPair,
) -> Result<()> {
    comp.validate(pair)?;
    check_w(comp, w)?;
    if parity_rule_applies(pair, comp) && w.odd_count(&comp.parts) % 2 == 1 {
        return Err(WeylError::NotAdmissible);
    }
    let fixed = w.fixed_in_c();
    if y_bits.len() != fixed.len() {
        return Err(WeylError::YBitCount { expected: fixed.len(), got: y_bits.len() });
    }
    if y_bits.iter().any(|&b| b > 1) {
        return Err(WeylError::BadBit);
    }
    if !z_orbits(comp, w, pair)?.contains(z_inv) {
        return Err(WeylError::UnrealizableZ(z_inv.to_string()));
    }
    Ok(())
}

/// The G°-orbit of x_w predicted from (w, y bits, z) without building it.
pub fn predicted_invariant(
    comp: &Composition,
    w: &SignedInvolution,
    y_bits: &[u8],
    z_inv: &XOrbitInvariant,
    pair: &ClassicalPair,
) -> Result<XOrbitInvariant> {
    check_xw_inputs(comp, w, y_bits, z_inv, pair)?;
    let o = w.odd_count(&comp.parts);
    let pair_r = pair.with_n(comp.r);
    match pair.case() {
        Case::Symplectic => Ok(XOrbitInvariant::Symplectic),
        Case::Unitary => {
            let mut bit = (o as u8 & 1) * classify_minus_one(pair)?;
            bit ^= y_bits.iter().fold(0, |a, b| a ^ b);
            if pair_r.size() > 0 {
                if let XOrbitInvariant::Unitary { gamma_bit } = z_inv {
                    bit ^= gamma_bit;
                }
            }
            Ok(XOrbitInvariant::Unitary { gamma_bit: bit })
        }
        Case::Orthogonal => {
            let p = pair.prime();
            let e = pair.e_ext();
            let partial = SquareClass::reduce(&pair.form_det(), p)?;
            let base = hasse_of_gram(pair)?;
            let mut lhs = BigRational::one();
            let sign_exp = comp.r * o + binom2(w.fixed_size(&comp.parts));
            if sign_exp % 2 == 1 {
                lhs = -lhs;
            }
            if o % 2 == 1 {
                lhs *= BigRational::from_integer(2.into()) * pair.kernel_det();
            }
            for (idx, &i) in w.fixed_in_c().iter().enumerate() {
                let y = y_representative(pair, comp.parts[i], y_bits[idx])?;
                lhs *= y.det().as_rational().ok_or(SymSpaceError::FormNotRational)?;
            }
            let mut hasse = base * e.eta_rat(&lhs)?;
            if pair_r.size() > 0 {
                if let XOrbitInvariant::Orthogonal { hasse: hz, .. } = z_inv {
                    hasse *= hz * hasse_of_gram(&pair_r)?;
                }
            }
            Ok(XOrbitInvariant::Orthogonal { component: Component::Sx, partial, hasse })
        }
    }
}

fn binom2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn hasse_of_gram(pair: &ClassicalPair) -> Result<i8> {
    if pair.size() == 0 {
        return Ok(1);
    }
    match forms::gram_invariants(&pair.j_rational(), pair.prime())? {
        FormInvariants::Orthogonal { hasse, .. } => Ok(hasse),
        _ => unreachable!("orthogonal Gram matrix"),
    }
}

fn seed_for(comp: &Composition, w: &SignedInvolution, z: &XOrbitInvariant) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    (comp, w, z).hash(&mut h);
    h.finish()
}

/// x_w({y_i}, z) = t_w ι(u₁, …, u_k; η_r^{o(𝔠)} z) with u_i = w σ(y_i) on
/// I(w), u_i = ε for the smaller index of each 2-cycle of ρ inside 𝔠, and
/// u_i = I otherwise.
pub fn build_xw(
    comp: &Composition,
    w: &SignedInvolution,
    y_bits: &[u8],
    z_inv: &XOrbitInvariant,
    pair: &ClassicalPair,
) -> Result<Xw> {
    let predicted = predicted_invariant(comp, w, y_bits, z_inv, pair)?;
    let f = pair.field();
    let pair_r = pair.with_n(comp.r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(comp, w, z_inv));
    let (z, _) = realize(&pair_r, z_inv, &mut rng, 500)?;
    let fixed = w.fixed_in_c();
    let mut us = Vec::with_capacity(comp.k());
    for i in 0..comp.k() {
        let n = comp.parts[i];
        match fixed.iter().position(|&j| j == i) {
            Some(idx) => {
                let y = y_representative(pair, n, y_bits[idx])?;
                let wn = BiquadMatrix::antidiagonal(n, &f.zero());
                us.push(wn.mul(&matrix_apply(&y, Involution::Sigma)));
            }
            // a paired index of 𝔠 needs g*_{ρ(i)} σ(g_i) = ε
            None if w.in_c(i) && w.rho()[i] > i => {
                us.push(BiquadMatrix::identity(n, &f.zero()).scale(&f.from_int(pair.epsilon())))
            }
            None => us.push(BiquadMatrix::identity(n, &f.zero())),
        }
    }
    let o = w.odd_count(&comp.parts);
    let h = eta_m_levi(pair, comp, comp.r).pow(o % 2).mul(&z);
    let t = build_tw(comp, w, pair)?;
    let x = t.mul(&levi_embed(comp, pair, &us, &h)?);
    Ok(Xw { x, t, predicted })
}

/// Recovers (y bits, z invariant), the M°-orbit label of x ∈ X ∩ t_w M, by
/// exact arithmetic on the blocks of t_w⁻¹x.
pub fn levi_orbit_label(
    x: &BiquadMatrix,
    comp: &Composition,
    w: &SignedInvolution,
    pair: &ClassicalPair,
) -> Result<(Vec<u8>, XOrbitInvariant)> {
    let t = build_tw(comp, w, pair)?;
    let mut m = t.inverse().ok_or(NumFieldError::NotInvertible)?.mul(x);
    if comp.kappa_twisted() {
        let k = kappa(pair);
        m = k.mul(&m).mul(&k);
    }
    let layout = Layout::new(comp, pair);
    let f = pair.field();
    // m must be block diagonal
    for bi in 0..layout.sizes.len() {
        for bj in 0..layout.sizes.len() {
            if bi != bj {
                let blk = m.block(layout.starts[bi], layout.starts[bj], layout.sizes[bi], layout.sizes[bj]);
                if !blk.is_zero() {
                    return Err(WeylError::NotInLevi);
                }
            }
        }
    }
    let mut bits = Vec::new();
    for i in w.fixed_in_c() {
        let (s, n) = layout.block(i);
        let u = m.block(s, s, n, n);
        let wn = BiquadMatrix::antidiagonal(n, &f.zero());
        let y = matrix_apply(&wn.mul(&u), Involution::Sigma);
        bits.push(y_orbit_bit(pair, &y)?);
    }
    let (ms, mn) = layout.middle();
    let h = m.block(ms, ms, mn, mn);
    let o = w.odd_count(&comp.parts);
    let z = eta_m_levi(pair, comp, comp.r).pow(o % 2).mul(&h);
    let pair_r = pair.with_n(comp.r);
    let z_inv = if mn == 0 {
        orbit_invariants(&pair_r, XComponent::Full)?.remove(0)
    } else {
        let zz = hilbert90_matrix(&z).ok_or(SymSpaceError::NotInX)?;
        symspace::classify_x(&z, &zz, &pair_r)?
    };
    Ok((bits, z_inv))
}

/// One factor of the stabilizer of x_w in M°.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StabilizerFactor {
    /// g_{ρ(i)} determined by g_i ∈ GL_n(E'); `twisted` when i ∈ 𝔠.
    GlExtension { indices: [usize; 2], n: usize, twisted: bool },
    /// g_i ∈ GL_n(F').
    GlFixed { index: usize, n: usize },
    /// σ(g_i) ∈ U(y_i).
    Unitary { index: usize, n: usize, y_bit: u8 },
    /// h in the stabilizer of z in G_r°.
    FixedGroup { r: usize, z: XOrbitInvariant },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerShape {
    pub factors: Vec<StabilizerFactor>,
}

/// Stabilizer of x_w in M°, one factor per ρ-orbit plus the r-block.
/// Indices are 1-based.
pub fn stabilizer_shape(
    comp: &Composition,
    w: &SignedInvolution,
    y_bits: &[u8],
    z_inv: &XOrbitInvariant,
) -> Result<StabilizerShape> {
    if w.k() != comp.k() {
        return Err(WeylError::WrongK { expected: comp.k(), got: w.k() });
    }
    let fixed = w.fixed_in_c();
    if y_bits.len() != fixed.len() {
        return Err(WeylError::YBitCount { expected: fixed.len(), got: y_bits.len() });
    }
    let mut factors = Vec::new();
    for i in 0..comp.k() {
        let j = w.rho()[i];
        let n = comp.parts[i];
        if j > i {
            factors.push(StabilizerFactor::GlExtension { indices: [i + 1, j + 1], n, twisted: w.in_c(i) });
        } else if j == i && !w.in_c(i) {
            factors.push(StabilizerFactor::GlFixed { index: i + 1, n });
        } else if j == i {
            let idx = fixed.iter().position(|&f| f == i).expect("i ∈ I(w)");
            factors.push(StabilizerFactor::Unitary { index: i + 1, n, y_bit: y_bits[idx] });
        }
    }
    factors.push(StabilizerFactor::FixedGroup { r: comp.r, z: *z_inv });
    Ok(StabilizerShape { factors })
}

/// Every (y bits, z) choice for w in increasing order.
pub fn xw_choices(
    comp: &Composition,
    w: &SignedInvolution,
    pair: &ClassicalPair,
) -> Result<Vec<(Vec<u8>, XOrbitInvariant)>> {
    let m = w.fixed_in_c().len();
    let zs = z_orbits(comp, w, pair)?;
    let mut out = Vec::new();
    for mask in 0..(1u32 << m) {
        let bits: Vec<u8> = (0..m).map(|i| (mask >> i & 1) as u8).collect();
        for z in &zs {
            out.push((bits.clone(), *z));
        }
    }
    Ok(out)
}

/// Distinct M°-orbit labels reached by x_w over all choices, recomputed from
/// the matrices.
pub fn realized_levi_labels(
    comp: &Composition,
    w: &SignedInvolution,
    pair: &ClassicalPair,
) -> Result<BTreeSet<(Vec<u8>, XOrbitInvariant)>> {
    let mut out = BTreeSet::new();
    for (bits, z) in xw_choices(comp, w, pair)? {
        let xw = build_xw(comp, w, &bits, &z, pair)?;
        out.insert(levi_orbit_label(&xw.x, comp, w, pair)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::{in_isometry_group, in_symmetric_space, is_fixed_by};

    fn pair(case: Case, kernel: &[i64], n: usize) -> ClassicalPair {
        match case {
            Case::Unitary => ClassicalPair::from_ints(case, 3, -1, Some(3), kernel, n).unwrap(),
            _ => ClassicalPair::from_ints(case, 3, -1, None, kernel, n).unwrap(),
        }
    }

    fn comp(parts: &[usize], r: usize) -> Composition {
        Composition::new(parts.to_vec(), r).unwrap()
    }

    #[test]
    fn spec_enumeration_examples() {
        assert_eq!(enumerate_involutions(&comp(&[2], 0), false).len(), 2);
        assert_eq!(enumerate_involutions(&comp(&[1, 1], 0), false).len(), 6);
        assert_eq!(enumerate_involutions(&comp(&[1, 2], 0), false).len(), 4);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for parts in [vec![1, 1, 1], vec![1, 2, 1], vec![2, 2, 1, 1], vec![1, 1, 1, 1, 1]] {
            for circ in [false, true] {
                let c = comp(&parts, 0);
                assert_eq!(enumerate_involutions(&c, circ), enumerate_involutions_brute(&c, circ));
            }
        }
    }

    #[test]
    fn group_law() {
        let all = SignedPerm::all(3);
        assert_eq!(all.len(), 48);
        for a in all.iter().step_by(5) {
            assert!(a.compose(&a.inverse()).is_identity());
            for b in all.iter().step_by(7) {
                let v = vec![1i64, 10, 100];
                assert_eq!(a.compose(b).act(&v), a.act(&b.act(&v)));
            }
        }
    }

    #[test]
    fn json_is_one_based() {
        let w = SignedInvolution::new(SignedPerm::new(vec![1, 0], vec![true, true]).unwrap()).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"rho":[2,1],"c":[1,2]}"#);
        let back: SignedInvolution = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
        assert!(serde_json::from_str::<SignedInvolution>(r#"{"rho":[2,3,1],"c":[]}"#).is_err());
    }

    #[test]
    fn symplectic_single_sign_change() {
        let p = pair(Case::Symplectic, &[], 1);
        let c = comp(&[1], 0);
        let w = SignedPerm::sign_change(1, 0);
        let t = build_tw(&c, &w, &p).unwrap();
        let f = p.field();
        let expect = BiquadMatrix::from_rows(vec![vec![f.zero(), f.one()], vec![f.from_int(-1), f.zero()]], &f.zero());
        assert_eq!(t, expect);
        assert_eq!(t.mul(&t), BiquadMatrix::identity(2, &f.zero()).neg());
        assert!(build_tw(&c, &SignedPerm::identity(1), &p).unwrap().is_identity());
    }

    #[test]
    fn tw_identities_small() {
        let pairs = [
            pair(Case::Orthogonal, &[1], 2),
            pair(Case::Orthogonal, &[], 2),
            pair(Case::Unitary, &[1], 2),
            pair(Case::Symplectic, &[], 2),
        ];
        for p in pairs {
            for c in Composition::enumerate(&p, 2, 2) {
                for w in enumerate_involutions(&c, false) {
                    let t = build_tw(&c, &w, &p).unwrap();
                    assert!(is_fixed_by(&t, Involution::Sigma));
                    assert!(in_isometry_group(&t, &p.j_matrix(), p.case()).unwrap());
                    let us: Vec<_> = (0..c.k())
                        .map(|i| {
                            let e = if w.in_c(i) { p.epsilon() } else { 1 };
                            BiquadMatrix::identity(c.parts[i], &p.field().zero()).scale(&p.field().from_int(e))
                        })
                        .collect();
                    let mid = BiquadMatrix::identity(p.n0() + 2 * c.r, &p.field().zero());
                    assert_eq!(t.mul(&t), levi_embed(&c, &p, &us, &mid).unwrap(), "{c:?} {w:?}");
                }
            }
        }
    }

    #[test]
    fn incompatible_w_rejected() {
        let p = pair(Case::Symplectic, &[], 3);
        let c = comp(&[1, 2], 0);
        let w = SignedPerm::new(vec![1, 0], vec![false, false]).unwrap();
        assert_eq!(build_tw(&c, &w, &p), Err(WeylError::Incompatible));
    }

    #[test]
    fn xw_lands_in_x() {
        for p in [pair(Case::Orthogonal, &[1], 2), pair(Case::Unitary, &[], 2), pair(Case::Symplectic, &[], 2)] {
            for c in Composition::enumerate(&p, 2, 2) {
                for w in admissible_involutions(&p, &c) {
                    for (bits, z) in xw_choices(&c, &w, &p).unwrap() {
                        let xw = build_xw(&c, &w, &bits, &z, &p).unwrap();
                        assert!(in_symmetric_space(&xw.x, &p.j_matrix(), p.case()).unwrap(), "{:?} {c:?} {w:?} {bits:?} {z}", p.case());
                        let got = symspace::classify_x_auto(&xw.x, &p).unwrap();
                        assert_eq!(got, xw.predicted, "{c:?} {w:?} {bits:?} {z}");
                    }
                }
            }
        }
    }

    #[test]
    fn identity_xw_is_identity() {
        let p = pair(Case::Orthogonal, &[1], 1);
        let c = comp(&[1], 0);
        let w = SignedInvolution::identity(1);
        let z = orbit_invariants(&p.with_n(0), XComponent::Sx).unwrap()[0];
        let xw = build_xw(&c, &w, &[], &z, &p).unwrap();
        assert!(xw.x.is_identity());
    }

    #[test]
    fn stabilizer_examples() {
        let z = XOrbitInvariant::Symplectic;
        let s = stabilizer_shape(&comp(&[1, 1], 0), &SignedInvolution::identity(2), &[], &z).unwrap();
        assert!(matches!(s.factors[0], StabilizerFactor::GlFixed { .. }));
        assert!(matches!(s.factors[1], StabilizerFactor::GlFixed { .. }));
        let swap = SignedInvolution::new(SignedPerm::adjacent_swap(2, 0)).unwrap();
        let s = stabilizer_shape(&comp(&[1, 1], 0), &swap, &[], &z).unwrap();
        assert_eq!(s.factors.len(), 2);
        assert!(matches!(s.factors[0], StabilizerFactor::GlExtension { twisted: false, .. }));
        let c1 = SignedInvolution::new(SignedPerm::sign_change(1, 0)).unwrap();
        let s = stabilizer_shape(&comp(&[1], 0), &c1, &[1], &z).unwrap();
        assert_eq!(s.factors[0], StabilizerFactor::Unitary { index: 1, n: 1, y_bit: 1 });
    }

    #[test]
    fn admissible_counts_symplectic_and_unitary() {
        let p = pair(Case::Symplectic, &[], 2);
        for c in Composition::enumerate(&p, 2, 2) {
            for w in admissible_involutions(&p, &c) {
                let n = admissible_orbit_count(&c, &w, &p).unwrap();
                assert_eq!(n, 1 << w.fixed_in_c().len());
            }
        }
        let p = pair(Case::Unitary, &[], 2);
        let c = comp(&[1, 1], 0);
        for w in admissible_involutions(&p, &c) {
            assert_eq!(admissible_orbit_count(&c, &w, &p).unwrap(), 1 << w.fixed_in_c().len());
        }
    }

    fn grid_pairs() -> Vec<ClassicalPair> {
        let mut out = Vec::new();
        for n in 1..=2 {
            out.push(pair(Case::Orthogonal, &[], n));
            out.push(pair(Case::Orthogonal, &[1], n));
            out.push(pair(Case::Orthogonal, &[1, 1], n));
            out.push(pair(Case::Orthogonal, &[1, 3], n));
            out.push(pair(Case::Unitary, &[], n));
            out.push(pair(Case::Unitary, &[1], n));
            out.push(pair(Case::Symplectic, &[], n));
        }
        out
    }

    #[test]
    fn conjugation_formula() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for p in grid_pairs() {
            for c in Composition::enumerate(&p, 2, 2) {
                let pr = p.with_n(c.r);
                for w in enumerate_involutions(&c, false) {
                    let t = build_tw(&c, &w, &p).unwrap();
                    let gs: Vec<_> = c
                        .parts
                        .iter()
                        .map(|&n| loop {
                            let g = crate::numfield::random_matrix(p.field(), n, &mut rng, 4);
                            if !g.det().is_zero() {
                                break g;
                            }
                        })
                        .collect();
                    let h = symspace::random_group_element(&pr, &mut rng);
                    let m = levi_embed(&c, &p, &gs, &h).unwrap();
                    let (g2, h2) = conjugated_blocks(&c, &w, &p, &gs, &h).unwrap();
                    let lhs = t.mul(&m).mul(&t.inverse().unwrap());
                    assert_eq!(lhs, levi_embed(&c, &p, &g2, &h2).unwrap(), "{c:?} {w:?}");
                }
            }
        }
    }

    #[test]
    fn admissible_count_matches_realized_labels() {
        for p in grid_pairs() {
            for c in Composition::enumerate(&p, 2, 2) {
                for w in admissible_involutions(&p, &c) {
                    let expect = admissible_orbit_count(&c, &w, &p).unwrap();
                    let labels = realized_levi_labels(&c, &w, &p).unwrap();
                    assert_eq!(labels.len(), expect, "{p:?} {c:?} {w:?}");
                    for (bits, z) in xw_choices(&c, &w, &p).unwrap() {
                        let xw = build_xw(&c, &w, &bits, &z, &p).unwrap();
                        assert!(in_symmetric_space(&xw.x, &p.j_matrix(), p.case()).unwrap());
                        assert_eq!(symspace::classify_x_auto(&xw.x, &p).unwrap(), xw.predicted, "{c:?} {w:?} {bits:?} {z}");
                    }
                }
            }
        }
    }
}
