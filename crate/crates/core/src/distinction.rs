//! Deciding distinction of π₁ × … × π_k ⋉ π₀ by the orbit x, from symbolic
//! facts about the cuspidal data.
//!
//! Facts are never inferred from representations. Isomorphism classes of
//! twists π^{σ^a τ^b ∨^c} are tracked by union-find over (label, mask).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::Case;
use crate::localfield::QuadExtension;
use crate::models;
use crate::symspace::{
    classify_minus_one, orbit_invariants, y_representative, ClassicalPair, ParityMap, SymSpaceError, XComponent,
    XOrbitInvariant,
};
use crate::weyl::{self, Composition, SignedInvolution, SignedPerm, WeylError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistinctionError {
    #[error("datum has {got} labels, composition has k = {expected}")]
    LabelCount { expected: usize, got: usize },
    #[error("index {0} out of range")]
    IndexRange(usize),
    #[error("inconsistent facts: {0}")]
    Inconsistent(String),
    #[error("target {0} is not an orbit in the identity component of X")]
    BadTarget(String),
    #[error("malformed palindrome: {0}")]
    MalformedPalindrome(String),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    SymSpace(#[from] SymSpaceError),
    #[error(transparent)]
    Local(#[from] crate::localfield::LocalFieldError),
}

pub type Result<T> = std::result::Result<T, DistinctionError>;

const SIGMA: u8 = 1;
const TAU: u8 = 2;
const DUAL: u8 = 4;

/// (i, U(y)-bit) flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitaryFlag {
    pub index: usize,
    pub bit: u8,
}

/// Symbolic cuspidal data. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CuspidalDatum {
    pub labels: Vec<String>,
    /// (i, j): π_j ≅ σ(π_i)^∨.
    #[serde(default)]
    pub conj_dual: Vec<[usize; 2]>,
    /// (i, j): π_j ≅ π_i^{τσ}.
    #[serde(default)]
    pub sigma_tau: Vec<[usize; 2]>,
    /// π_i is GL_{n_i}(F')-distinguished.
    #[serde(default)]
    pub linear_dist: Vec<usize>,
    /// π_i is U(y)-distinguished for y in the orbit with the given bit.
    #[serde(default)]
    pub unitary_dist: Vec<UnitaryFlag>,
    /// Orbits z of X_r with π₀ distinguished by the stabilizer of z.
    #[serde(default)]
    pub pi0_dist: Vec<XOrbitInvariant>,
}

/// Union-find over (label, twist mask).
#[derive(Debug, Clone)]
pub struct IsoOracle {
    parent: Vec<usize>,
}

impl IsoOracle {
    pub fn new(k: usize) -> Self {
        IsoOracle { parent: (0..8 * k).collect() }
    }

    fn node(i: usize, mask: u8) -> usize {
        8 * i + mask as usize
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    /// Records (j, 0) ≅ (i, twist), with all further twists.
    pub fn assert_iso(&mut self, j: usize, i: usize, twist: u8) {
        for m in 0..8u8 {
            let a = self.find(Self::node(j, m));
            let b = self.find(Self::node(i, m ^ twist));
            self.parent[a] = b;
        }
    }

    pub fn iso(&mut self, j: usize, mj: u8, i: usize, mi: u8) -> bool {
        self.find(Self::node(j, mj)) == self.find(Self::node(i, mi))
    }
}

impl CuspidalDatum {
    pub fn k(&self) -> usize {
        self.labels.len()
    }

    /// Checks indices and sizes against a composition.
    pub fn validate(&self, comp: &Composition) -> Result<()> {
        let k = comp.k();
        if self.labels.len() != k {
            return Err(DistinctionError::LabelCount { expected: k, got: self.labels.len() });
        }
        let check = |i: usize| if i == 0 || i > k { Err(DistinctionError::IndexRange(i)) } else { Ok(()) };
        for (name, rel) in [("conj_dual", &self.conj_dual), ("sigma_tau", &self.sigma_tau)] {
            for &[i, j] in rel {
                check(i)?;
                check(j)?;
                if comp.parts[i - 1] != comp.parts[j - 1] {
                    return Err(DistinctionError::Inconsistent(format!(
                        "{name}({i},{j}) relates blocks of sizes {} and {}",
                        comp.parts[i - 1],
                        comp.parts[j - 1]
                    )));
                }
            }
        }
        for &i in &self.linear_dist {
            check(i)?;
        }
        for f in &self.unitary_dist {
            check(f.index)?;
            if f.bit > 1 {
                return Err(DistinctionError::Inconsistent(format!("unitary_dist bit {}", f.bit)));
            }
        }
        Ok(())
    }

    /// The oracle with every fact and its standard consequences.
    pub fn oracle(&self) -> IsoOracle {
        let mut o = IsoOracle::new(self.k());
        for &[i, j] in &self.conj_dual {
            o.assert_iso(j - 1, i - 1, SIGMA | DUAL);
        }
        for &[i, j] in &self.sigma_tau {
            o.assert_iso(j - 1, i - 1, SIGMA | TAU);
        }
        for &i in &self.linear_dist {
            o.assert_iso(i - 1, i - 1, SIGMA | DUAL);
        }
        for f in &self.unitary_dist {
            o.assert_iso(f.index - 1, f.index - 1, SIGMA | TAU);
        }
        o
    }

    fn unitary_flag(&self, i: usize, bit: u8) -> bool {
        self.unitary_dist.iter().any(|f| f.index == i + 1 && f.bit == bit)
    }

    /// Relabels by a permutation: new index perm[i] holds old index i
    /// (0-based).
    pub fn permuted(&self, perm: &[usize]) -> CuspidalDatum {
        let k = self.k();
        let mut labels = vec![String::new(); k];
        for i in 0..k {
            labels[perm[i]] = self.labels[i].clone();
        }
        let m = |i: usize| perm[i - 1] + 1;
        CuspidalDatum {
            labels,
            conj_dual: self.conj_dual.iter().map(|&[i, j]| [m(i), m(j)]).collect(),
            sigma_tau: self.sigma_tau.iter().map(|&[i, j]| [m(i), m(j)]).collect(),
            linear_dist: self.linear_dist.iter().map(|&i| m(i)).collect(),
            unitary_dist: self.unitary_dist.iter().map(|f| UnitaryFlag { index: m(f.index), bit: f.bit }).collect(),
            pi0_dist: self.pi0_dist.clone(),
        }
    }
}

/// A witness (w, y bits on I(w), z).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub w: SignedInvolution,
    /// 1-based index in I(w) → orbit bit.
    pub y_bits: BTreeMap<usize, u8>,
    pub z_orbit: XOrbitInvariant,
}

impl Witness {
    pub fn bits_vec(&self) -> Vec<u8> {
        self.y_bits.values().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateFailure {
    pub w: SignedInvolution,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub distinguished: bool,
    pub witness: Option<Witness>,
    pub failure_log: Vec<CandidateFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecideOptions {
    /// Overrides the bundled parity map in the unitary case.
    pub y_parity: Option<ParityMap>,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions { y_parity: None }
    }
}

/// The representation-theoretic rows for w; `Err` names the first failure.
fn rows_hold(data: &CuspidalDatum, oracle: &mut IsoOracle, w: &SignedInvolution) -> std::result::Result<(), String> {
    for i in 0..w.k() {
        let j = w.rho()[i];
        let in_c = w.in_c(i);
        match (in_c, j == i) {
            (false, false) if !oracle.iso(j, 0, i, SIGMA | DUAL) => {
                return Err(format!("π_{} is not σ(π_{})^∨", j + 1, i + 1));
            }
            (false, true) if !data.linear_dist.contains(&(i + 1)) => {
                return Err(format!("π_{} is not GL(F')-distinguished", i + 1));
            }
            (true, false) if !oracle.iso(j, 0, i, SIGMA | TAU) => {
                return Err(format!("π_{} is not π_{}^τσ", j + 1, i + 1));
            }
            (true, true) if !data.unitary_dist.iter().any(|f| f.index == i + 1) => {
                return Err(format!("π_{} is not U(y)-distinguished", i + 1));
            }
            _ => {}
        }
    }
    Ok(())
}

/// The arithmetic condition tying (w, y bits, z) to the target orbit.
pub fn arithmetic_condition(
    pair: &ClassicalPair,
    comp: &Composition,
    w: &SignedInvolution,
    y_bits: &[u8],
    z: &XOrbitInvariant,
    target: &XOrbitInvariant,
    parity: ParityMap,
) -> Result<bool> {
    let o = w.odd_count(&comp.parts);
    let pair_r = pair.with_n(comp.r);
    match (pair.case(), target) {
        (Case::Symplectic, _) => Ok(true),
        (Case::Unitary, XOrbitInvariant::Unitary { gamma_bit: t }) => {
            let mut bit = (o as u8 & 1) * classify_minus_one(pair)?;
            if parity == ParityMap::Iso {
                bit ^= y_bits.iter().fold(0, |a, b| a ^ b);
            }
            if pair_r.size() > 0 {
                if let XOrbitInvariant::Unitary { gamma_bit } = z {
                    bit ^= gamma_bit;
                }
            }
            Ok(bit == *t)
        }
        (Case::Orthogonal, XOrbitInvariant::Orthogonal { hasse: hx, .. }) => {
            let e: QuadExtension = pair.e_ext();
            let mut value = num_rational::BigRational::from_integer(1.into());
            if (comp.r * o + binom2(w.fixed_size(&comp.parts))) % 2 == 1 {
                value = -value;
            }
            if o % 2 == 1 {
                value *= num_rational::BigRational::from_integer(2.into()) * pair.kernel_det();
            }
            for (idx, &i) in w.fixed_in_c().iter().enumerate() {
                let y = y_representative(pair, comp.parts[i], y_bits[idx])?;
                value *= y.det().as_rational().ok_or(SymSpaceError::FormNotRational)?;
            }
            let in_norm = e.eta_rat(&value)? == 1;
            let lhs_ratio = if pair_r.size() == 0 {
                1
            } else {
                match z {
                    XOrbitInvariant::Orthogonal { hasse, .. } => hasse * base_hasse(&pair_r)?,
                    _ => return Err(DistinctionError::BadTarget(z.to_string())),
                }
            };
            let rhs_ratio = hx * base_hasse(pair)?;
            Ok(in_norm == (lhs_ratio == rhs_ratio))
        }
        _ => Err(DistinctionError::BadTarget(target.to_string())),
    }
}

fn binom2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn base_hasse(pair: &ClassicalPair) -> Result<i8> {
    let id = crate::numfield::BiquadMatrix::identity(pair.size(), &pair.field().zero());
    match crate::symspace::classify_x(&id, &id, pair)? {
        XOrbitInvariant::Orthogonal { hasse, .. } => Ok(hasse),
        other => Err(DistinctionError::BadTarget(other.to_string())),
    }
}

fn bit_vectors(m: usize) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = (0..(1u32 << m)).map(|mask| (0..m).map(|i| ((mask >> (m - 1 - i)) & 1) as u8).collect()).collect();
    out.sort();
    out
}

/// Decides distinction and returns the first witness in the order
/// (|𝔠|, ρ, 𝔠), then y bits, then z.
pub fn decide(
    pair: &ClassicalPair,
    comp: &Composition,
    data: &CuspidalDatum,
    target: &XOrbitInvariant,
    options: &DecideOptions,
) -> Result<Verdict> {
    comp.validate(pair)?;
    data.validate(comp)?;
    let component = if pair.case() == Case::Orthogonal { XComponent::Sx } else { XComponent::Full };
    if !orbit_invariants(pair, component)?.contains(target) {
        return Err(DistinctionError::BadTarget(target.to_string()));
    }
    let parity = match (pair.case(), options.y_parity) {
        (Case::Unitary, Some(p)) => p,
        (Case::Unitary, None) => models::parity_for(pair)?,
        _ => ParityMap::Iso,
    };
    let trivial_pi0 = pair.n0() == 0 && comp.r == 0;
    let mut oracle = data.oracle();
    let mut log = Vec::new();
    for w in weyl::admissible_involutions(pair, comp) {
        if let Err(reason) = rows_hold(data, &mut oracle, &w) {
            log.push(CandidateFailure { w, reason });
            continue;
        }
        let fixed = w.fixed_in_c();
        let zs: Vec<XOrbitInvariant> = weyl::z_orbits(comp, &w, pair)?
            .into_iter()
            .filter(|z| trivial_pi0 || data.pi0_dist.contains(z))
            .collect();
        if zs.is_empty() {
            log.push(CandidateFailure { w, reason: "π₀ is not distinguished by any admissible z".into() });
            continue;
        }
        let mut found = None;
        'search: for bits in bit_vectors(fixed.len()) {
            if fixed.iter().zip(&bits).any(|(&i, &b)| !data.unitary_flag(i, b)) {
                continue;
            }
            for z in &zs {
                if arithmetic_condition(pair, comp, &w, &bits, z, target, parity)? {
                    found = Some((bits.clone(), *z));
                    break 'search;
                }
            }
        }
        match found {
            Some((bits, z)) => {
                let y_bits = fixed.iter().zip(bits).map(|(&i, b)| (i + 1, b)).collect();
                return Ok(Verdict {
                    distinguished: true,
                    witness: Some(Witness { w, y_bits, z_orbit: z }),
                    failure_log: log,
                });
            }
            None => log.push(CandidateFailure { w, reason: "no (y, z) meets the arithmetic condition for the target".into() }),
        }
    }
    Ok(Verdict { distinguished: false, witness: None, failure_log: log })
}

/// w(π₁, …, π_k) ≅ (σ(π₁)^∨, …, σ(π_k)^∨) with π'_i = π_{ρ⁻¹(i)} off 𝔠 and
/// π*_{ρ⁻¹(i)} = (π_{ρ⁻¹(i)}^∨)^τ on 𝔠.
pub fn necessary_condition(data: &CuspidalDatum, w: &SignedPerm) -> bool {
    if w.k() != data.k() {
        return false;
    }
    let mut oracle = data.oracle();
    let inv = w.inverse();
    (0..w.k()).all(|i| {
        let src = inv.rho()[i];
        let mask = if w.in_c(i) { TAU | DUAL } else { 0 };
        oracle.iso(src, mask, i, SIGMA | DUAL)
    })
}

/// Characters χ of F'^* for the GL product check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chi {
    Trivial,
    Eta,
}

/// One factor of a GL product, as a label with twists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymRep {
    pub label: String,
    #[serde(default = "one")]
    pub n: usize,
    /// Any of "sigma", "tau", "dual".
    #[serde(default)]
    pub twist: Vec<String>,
}

fn one() -> usize {
    1
}

/// A palindromic product π₁ … π_k Π₀ (π_k^∨)^τ … (π₁^∨)^τ with facts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlProduct {
    pub blocks: Vec<SymRep>,
    /// Label of Π₀; absent when Π₀ is the trivial representation of GL₀.
    #[serde(default)]
    pub middle: Option<String>,
    /// (a, b): b ≅ σ(a)^∨.
    #[serde(default)]
    pub conj_dual: Vec<[String; 2]>,
    /// (a, b): b ≅ a^{τσ}.
    #[serde(default)]
    pub sigma_tau: Vec<[String; 2]>,
    /// Labels that are (GL(F'), χ∘det)-distinguished.
    #[serde(default)]
    pub chi_dist: Vec<String>,
    /// Labels that are U(y)-distinguished for some y.
    #[serde(default)]
    pub unitary_dist: Vec<String>,
}

/// A distinguished unit in the decomposition; positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GlUnit {
    OpenPair { positions: [usize; 2] },
    Closed { position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlDecomposition {
    pub distinguished: bool,
    pub chi: Chi,
    pub w: Option<SignedInvolution>,
    pub units: Vec<GlUnit>,
}

fn twist_mask(t: &[String]) -> Result<u8> {
    let mut m = 0;
    for s in t {
        m ^= match s.as_str() {
            "sigma" => SIGMA,
            "tau" => TAU,
            "dual" => DUAL,
            other => return Err(DistinctionError::MalformedPalindrome(format!("unknown twist {other}"))),
        };
    }
    Ok(m)
}

/// Searches the matchings that make the product (GL(F'), χ∘det)-distinguished.
pub fn gl_product_check(product: &GlProduct, chi: Chi) -> Result<GlDecomposition> {
    let total = product.blocks.len();
    let has_middle = product.middle.is_some();
    if total % 2 != 0 {
        return Err(DistinctionError::MalformedPalindrome(format!("{total} outer blocks")));
    }
    let k = total / 2;
    let mut labels = Vec::with_capacity(k);
    let mut parts = Vec::with_capacity(k);
    for i in 0..k {
        let front = &product.blocks[i];
        let back = &product.blocks[total - 1 - i];
        if twist_mask(&front.twist)? != 0 {
            return Err(DistinctionError::MalformedPalindrome(format!("block {} must be untwisted", i + 1)));
        }
        if back.label != front.label || back.n != front.n || twist_mask(&back.twist)? != TAU | DUAL {
            return Err(DistinctionError::MalformedPalindrome(format!(
                "block {} must be the τ-twisted dual of block {}",
                total - i,
                i + 1
            )));
        }
        labels.push(front.label.clone());
        parts.push(front.n);
    }
    let index = |l: &str| labels.iter().position(|x| x == l);
    let mut data = CuspidalDatum { labels: labels.clone(), ..Default::default() };
    for [a, b] in &product.conj_dual {
        if let (Some(i), Some(j)) = (index(a), index(b)) {
            data.conj_dual.push([i + 1, j + 1]);
        }
    }
    for [a, b] in &product.sigma_tau {
        if let (Some(i), Some(j)) = (index(a), index(b)) {
            data.sigma_tau.push([i + 1, j + 1]);
        }
    }
    for l in &product.chi_dist {
        if let Some(i) = index(l) {
            data.linear_dist.push(i + 1);
        }
    }
    for l in &product.unitary_dist {
        if let Some(i) = index(l) {
            data.unitary_dist.push(UnitaryFlag { index: i + 1, bit: 0 });
        }
    }
    let comp = Composition::new(parts, 0)?;
    data.validate(&comp)?;
    let middle_ok = product.middle.as_ref().is_none_or(|m| product.chi_dist.contains(m));
    let pos = |i: usize| i + 1;
    let mirror = |i: usize| total - i + usize::from(has_middle);
    let mut oracle = data.oracle();
    if middle_ok {
        for w in weyl::enumerate_involutions(&comp, false) {
            if rows_hold(&data, &mut oracle, &w).is_err() {
                continue;
            }
            let mut units = Vec::new();
            for i in 0..k {
                let j = w.rho()[i];
                match (w.in_c(i), j.cmp(&i)) {
                    (false, std::cmp::Ordering::Greater) => {
                        units.push(GlUnit::OpenPair { positions: [pos(i), pos(j)] });
                        units.push(GlUnit::OpenPair { positions: [mirror(j), mirror(i)] });
                    }
                    (true, std::cmp::Ordering::Greater) => {
                        units.push(GlUnit::OpenPair { positions: [pos(i), mirror(j)] });
                        units.push(GlUnit::OpenPair { positions: [pos(j), mirror(i)] });
                    }
                    (false, std::cmp::Ordering::Equal) => {
                        units.push(GlUnit::Closed { position: pos(i) });
                        units.push(GlUnit::Closed { position: mirror(i) });
                    }
                    (true, std::cmp::Ordering::Equal) => {
                        units.push(GlUnit::OpenPair { positions: [pos(i), mirror(i)] });
                    }
                    _ => {}
                }
            }
            if has_middle {
                units.push(GlUnit::Closed { position: k + 1 });
            }
            return Ok(GlDecomposition { distinguished: true, chi, w: Some(w), units });
        }
    }
    Ok(GlDecomposition { distinguished: false, chi, w: None, units: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symspace::classify_x_auto;
    use proptest::prelude::*;

    fn inv(rho: Vec<usize>, c: Vec<bool>) -> SignedInvolution {
        SignedInvolution::new(SignedPerm::new(rho, c).unwrap()).unwrap()
    }

    fn datum(k: usize) -> CuspidalDatum {
        CuspidalDatum { labels: (1..=k).map(|i| format!("pi{i}")).collect(), ..Default::default() }
    }

    fn symp(n: usize) -> ClassicalPair {
        ClassicalPair::from_ints(Case::Symplectic, 3, -1, None, &[], n).unwrap()
    }

    #[test]
    fn symplectic_examples() {
        let opts = DecideOptions::default();
        let mut d = datum(1);
        d.linear_dist.push(1);
        let v = decide(&symp(1), &Composition::new(vec![1], 0).unwrap(), &d, &XOrbitInvariant::Symplectic, &opts).unwrap();
        assert!(v.distinguished);
        assert!(v.witness.unwrap().w.is_identity());

        let mut d = datum(2);
        d.conj_dual.push([1, 2]);
        let v = decide(&symp(2), &Composition::new(vec![1, 1], 0).unwrap(), &d, &XOrbitInvariant::Symplectic, &opts).unwrap();
        assert_eq!(v.witness.unwrap().w, inv(vec![1, 0], vec![false, false]));

        let v = decide(&symp(2), &Composition::new(vec![1, 1], 0).unwrap(), &datum(2), &XOrbitInvariant::Symplectic, &opts).unwrap();
        assert!(!v.distinguished);
        assert_eq!(v.failure_log.len(), 6);
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let mut d = datum(2);
        d.conj_dual.push([1, 2]);
        let err = decide(&symp(3), &Composition::new(vec![1, 2], 0).unwrap(), &d, &XOrbitInvariant::Symplectic, &DecideOptions::default());
        assert!(matches!(err, Err(DistinctionError::Inconsistent(_))));
    }

    #[test]
    fn necessary_condition_examples() {
        let mut d = datum(2);
        d.sigma_tau.push([1, 2]);
        assert!(necessary_condition(&d, &inv(vec![1, 0], vec![true, true])));
        assert!(!necessary_condition(&datum(2), &inv(vec![1, 0], vec![false, false])));
    }

    #[test]
    fn gl_examples() {
        let rep = |l: &str, t: &[&str]| SymRep { label: l.into(), n: 1, twist: t.iter().map(|s| s.to_string()).collect() };
        let product = GlProduct {
            blocks: vec![rep("a", &[]), rep("b", &[]), rep("b", &["tau", "dual"]), rep("a", &["dual", "tau"])],
            middle: None,
            conj_dual: vec![],
            sigma_tau: vec![],
            chi_dist: vec!["a".into(), "b".into()],
            unitary_dist: vec![],
        };
        let d = gl_product_check(&product, Chi::Trivial).unwrap();
        assert!(d.distinguished);
        assert!(d.units.iter().all(|u| matches!(u, GlUnit::Closed { .. })));

        let pair = GlProduct { chi_dist: vec![], conj_dual: vec![["a".into(), "b".into()]], ..product.clone() };
        let d = gl_product_check(&pair, Chi::Eta).unwrap();
        assert!(d.distinguished);
        assert_eq!(d.units[0], GlUnit::OpenPair { positions: [1, 2] });

        let none = GlProduct { chi_dist: vec![], ..product.clone() };
        assert!(!gl_product_check(&none, Chi::Trivial).unwrap().distinguished);

        let bad = GlProduct { blocks: vec![rep("a", &[]), rep("a", &[])], ..product };
        assert!(matches!(gl_product_check(&bad, Chi::Trivial), Err(DistinctionError::MalformedPalindrome(_))));
    }

    fn unitary_pair(n: usize) -> ClassicalPair {
        ClassicalPair::from_ints(Case::Unitary, 3, -1, Some(3), &[1], n).unwrap()
    }

    #[test]
    fn witnesses_are_sound() {
        let pairs = [
            unitary_pair(2),
            ClassicalPair::from_ints(Case::Orthogonal, 3, -1, None, &[1], 2).unwrap(),
            ClassicalPair::from_ints(Case::Orthogonal, 3, -1, None, &[], 2).unwrap(),
            symp(2),
        ];
        let mut checked = 0;
        for pair in pairs {
            let comp_list = Composition::enumerate(&pair, 2, 2);
            let component = if pair.case() == Case::Orthogonal { XComponent::Sx } else { XComponent::Full };
            for comp in comp_list {
                let k = comp.k();
                let mut d = datum(k);
                d.linear_dist = (1..=k).filter(|i| i % 2 == 1).collect();
                d.unitary_dist = (1..=k).flat_map(|i| [UnitaryFlag { index: i, bit: 0 }, UnitaryFlag { index: i, bit: 1 }]).collect();
                if k == 2 && comp.parts[0] == comp.parts[1] {
                    d.conj_dual.push([1, 2]);
                }
                d.pi0_dist = orbit_invariants(&pair.with_n(comp.r), XComponent::Full).unwrap();
                for target in orbit_invariants(&pair, component).unwrap() {
                    let v = decide(&pair, &comp, &d, &target, &DecideOptions::default()).unwrap();
                    if let Some(wit) = v.witness {
                        assert!(necessary_condition(&d, &wit.w));
                        let xw = weyl::build_xw(&comp, &wit.w, &wit.bits_vec(), &wit.z_orbit, &pair).unwrap();
                        assert_eq!(classify_x_auto(&xw.x, &pair).unwrap(), target, "{comp:?} {wit:?}");
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked >= 20, "only {checked} witnesses");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn relabeling_is_equivariant(flags in 0u8..16, rel in 0usize..3) {
            let pair = unitary_pair(2);
            let comp = Composition::new(vec![1, 1], 0).unwrap();
            let mut d = datum(2);
            if flags & 1 == 1 { d.linear_dist.push(1); }
            if flags & 2 == 2 { d.linear_dist.push(2); }
            if flags & 4 == 4 { d.unitary_dist.push(UnitaryFlag { index: 1, bit: flags >> 3 }); }
            match rel { 1 => d.conj_dual.push([1, 2]), 2 => d.sigma_tau.push([2, 1]), _ => {} }
            d.pi0_dist = orbit_invariants(&pair.with_n(0), XComponent::Full).unwrap();
            let swapped = d.permuted(&[1, 0]);
            let s = SignedPerm::adjacent_swap(2, 0);
            for target in orbit_invariants(&pair, XComponent::Full).unwrap() {
                let a = decide(&pair, &comp, &d, &target, &DecideOptions::default()).unwrap();
                let b = decide(&pair, &comp, &swapped, &target, &DecideOptions::default()).unwrap();
                prop_assert_eq!(a.distinguished, b.distinguished);
                if let Some(w) = a.witness {
                    let moved = w.w.conjugate(&s);
                    let mut o = swapped.oracle();
                    prop_assert!(rows_hold(&swapped, &mut o, &moved).is_ok());
                }
            }
        }
    }
}
