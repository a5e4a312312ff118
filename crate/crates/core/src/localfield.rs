//! Square classes, Hilbert symbols and quadratic norm groups over the
//! p-adic completions of ℚ.
//!
//! Every local invariant in the crate is a function of square classes, so
//! [`SquareClass`] is the currency here. For odd `p` the unit part is labelled
//! `1` or `u`, where `u` is the least positive non-residue mod `p`. For `p = 2`
//! the unit part is recorded mod 8.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalFieldError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("zero has no square class")]
    Zero,
    #[error("square classes live over different primes ({0} and {1})")]
    PrimeMismatch(u64, u64),
    #[error("unit label {unit} is not canonical for p = {p}")]
    BadUnit { p: u64, unit: u64 },
    #[error("valuation parity must be 0 or 1, got {0}")]
    BadValuation(u8),
    #[error("the trivial square class does not define a quadratic extension")]
    TrivialExtension,
    #[error("a Klein extension needs two distinct non-trivial classes with non-trivial product")]
    DegenerateKlein,
    #[error("input {0} is too large for the exhaustive oracle")]
    OracleRange(i64),
    #[error("integer {0} is too large to factor by trial division")]
    FactorRange(String),
    #[error("reciprocity fails: {0:?}")]
    ReciprocityFailure(Vec<PlaceSymbol>),
}

pub type Result<T> = std::result::Result<T, LocalFieldError>;

/// A rational prime, verified at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(LocalFieldError::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn is_two(self) -> bool {
        self.0 == 2
    }

    /// Smallest positive quadratic non-residue mod p (odd p only).
    pub fn nonresidue(self) -> u64 {
        assert!(!self.is_two(), "no unit non-residue label at p = 2");
        (2..self.0)
            .find(|&a| pow_mod(a, (self.0 - 1) / 2, self.0) == self.0 - 1)
            .expect("odd primes have non-residues")
    }

    /// Order of F*/F*²: 4 for odd p, 8 for p = 2.
    pub fn class_count(self) -> usize {
        if self.is_two() {
            8
        } else {
            4
        }
    }
}

impl TryFrom<u64> for Prime {
    type Error = LocalFieldError;
    fn try_from(p: u64) -> Result<Self> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = (acc as u128 * base as u128 % m as u128) as u64;
        }
        base = (base as u128 * base as u128 % m as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Splits `x = p^v · rest` with `p ∤ rest`.
fn split_valuation(x: &BigInt, p: u64) -> (u64, BigInt) {
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut rest = x.clone();
    while !rest.is_zero() && (&rest % &pb).is_zero() {
        rest /= &pb;
        v += 1;
    }
    (v, rest)
}

/// An element of F*/F*² for F = ℚ_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawSquareClass", into = "RawSquareClass")]
pub struct SquareClass {
    prime: Prime,
    val: u8,
    unit: u64,
}

#[derive(Serialize, Deserialize)]
struct RawSquareClass {
    p: u64,
    val: u8,
    unit: u64,
}

impl TryFrom<RawSquareClass> for SquareClass {
    type Error = LocalFieldError;
    fn try_from(raw: RawSquareClass) -> Result<Self> {
        SquareClass::new(Prime::new(raw.p)?, raw.val, raw.unit)
    }
}

impl From<SquareClass> for RawSquareClass {
    fn from(c: SquareClass) -> Self {
        RawSquareClass { p: c.prime.0, val: c.val, unit: c.unit }
    }
}

impl SquareClass {
    pub fn new(prime: Prime, val: u8, unit: u64) -> Result<Self> {
        if val > 1 {
            return Err(LocalFieldError::BadValuation(val));
        }
        let ok = if prime.is_two() {
            matches!(unit, 1 | 3 | 5 | 7)
        } else {
            unit == 1 || unit == prime.nonresidue()
        };
        if !ok {
            return Err(LocalFieldError::BadUnit { p: prime.0, unit });
        }
        Ok(SquareClass { prime, val, unit })
    }

    pub fn one(prime: Prime) -> Self {
        SquareClass { prime, val: 0, unit: 1 }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn val_parity(&self) -> u8 {
        self.val
    }

    pub fn unit(&self) -> u64 {
        self.unit
    }

    pub fn is_one(&self) -> bool {
        self.val == 0 && self.unit == 1
    }

    /// The class of a nonzero rational.
    pub fn reduce(x: &BigRational, prime: Prime) -> Result<Self> {
        if x.is_zero() {
            return Err(LocalFieldError::Zero);
        }
        let p = prime.0;
        let (vn, n) = split_valuation(x.numer(), p);
        let (vd, d) = split_valuation(x.denom(), p);
        let val = ((vn + vd) % 2) as u8;
        let unit = if prime.is_two() {
            let prod = (n * d).mod_floor(&BigInt::from(8));
            prod.to_u64().unwrap()
        } else {
            let pb = BigInt::from(p);
            let un = n.mod_floor(&pb).to_u64().unwrap();
            let ud = d.mod_floor(&pb).to_u64().unwrap();
            let e = (p - 1) / 2;
            let residue = pow_mod(un * ud % p, e, p) == 1;
            if residue {
                1
            } else {
                prime.nonresidue()
            }
        };
        Ok(SquareClass { prime, val, unit })
    }

    pub fn from_int(x: i64, prime: Prime) -> Result<Self> {
        Self::reduce(&BigRational::from_integer(BigInt::from(x)), prime)
    }

    pub fn minus_one(prime: Prime) -> Self {
        Self::from_int(-1, prime).unwrap()
    }

    /// An integer representative p^val · unit.
    pub fn representative(&self) -> BigRational {
        let mut r = BigInt::from(self.unit);
        if self.val == 1 {
            r *= BigInt::from(self.prime.0);
        }
        BigRational::from_integer(r)
    }

    pub fn mul(&self, other: &SquareClass) -> Result<SquareClass> {
        check_same(self, other)?;
        Self::reduce(&(self.representative() * other.representative()), self.prime)
    }

    pub fn neg(&self) -> SquareClass {
        Self::reduce(&-self.representative(), self.prime).unwrap()
    }

    /// Whether the unit part is a square (odd p only meaningful sign).
    fn unit_legendre(&self) -> i8 {
        if self.unit == 1 {
            1
        } else {
            -1
        }
    }

    /// All 4 (odd p) or 8 (p = 2) classes, in canonical order.
    pub fn all(prime: Prime) -> Vec<SquareClass> {
        let units: Vec<u64> = if prime.is_two() { vec![1, 3, 5, 7] } else { vec![1, prime.nonresidue()] };
        let mut out = Vec::new();
        for val in 0..2u8 {
            for &unit in &units {
                out.push(SquareClass { prime, val, unit });
            }
        }
        out
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]_{}", self.representative(), self.prime)
    }
}

fn check_same(a: &SquareClass, b: &SquareClass) -> Result<()> {
    if a.prime != b.prime {
        Err(LocalFieldError::PrimeMismatch(a.prime.0, b.prime.0))
    } else {
        Ok(())
    }
}

fn sign_from_parity(e: u64) -> i8 {
    if e % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The quadratic Hilbert symbol (a, b) over ℚ_p, via the closed formulas.
pub fn hilbert(a: &SquareClass, b: &SquareClass) -> Result<i8> {
    check_same(a, b)?;
    let p = a.prime.0;
    let (al, be) = (a.val as u64, b.val as u64);
    if p == 2 {
        let eps = |u: u64| ((u - 1) / 2) % 2;
        let omega = |u: u64| ((u * u - 1) / 8) % 2;
        let e = eps(a.unit) * eps(b.unit) + al * omega(b.unit) + be * omega(a.unit);
        Ok(sign_from_parity(e))
    } else {
        let mut s = sign_from_parity(al * be * ((p - 1) / 2));
        if be == 1 {
            s *= a.unit_legendre();
        }
        if al == 1 {
            s *= b.unit_legendre();
        }
        Ok(s)
    }
}

/// Hilbert symbol of two nonzero rationals at p.
pub fn hilbert_rat(a: &BigRational, b: &BigRational, p: Prime) -> Result<i8> {
    hilbert(&SquareClass::reduce(a, p)?, &SquareClass::reduce(b, p)?)
}

/// Decides solvability of z² = a x² + b y² over ℚ_p by exhaustive search for a
/// primitive solution modulo p^m, m = 2·v_p(4ab) + 3, which lifts by Hensel.
///
/// Even powers of p are divided out of a and b first; this does not change
/// the solvability question.
pub fn hilbert_oracle(a: i64, b: i64, prime: Prime) -> Result<i8> {
    if a == 0 || b == 0 {
        return Err(LocalFieldError::Zero);
    }
    for v in [a, b] {
        if v.unsigned_abs() > 1_000_000 {
            return Err(LocalFieldError::OracleRange(v));
        }
    }
    let p = prime.0 as i128;
    let strip = |mut x: i128| {
        while x % (p * p) == 0 {
            x /= p * p;
        }
        x
    };
    let (a, b) = (strip(a as i128), strip(b as i128));
    let mut v = 0u32;
    let mut t = 4 * a * b;
    while t % p == 0 {
        t /= p;
        v += 1;
    }
    let m = 2 * v + 3;
    let modulus = p.pow(m);
    if modulus > 50_000_000 {
        return Err(LocalFieldError::OracleRange(modulus as i64));
    }
    let md = modulus as u64;
    let am = a.rem_euclid(modulus) as u64;
    let bm = b.rem_euclid(modulus) as u64;
    let mulm = |x: u64, y: u64| (x as u128 * y as u128 % md as u128) as u64;

    let mut squares = vec![false; md as usize];
    let mut b_squares = vec![false; md as usize];
    for t in 0..md {
        let s = mulm(t, t);
        squares[s as usize] = true;
        b_squares[mulm(bm, s) as usize] = true;
    }
    for t in 0..md {
        let s = mulm(t, t);
        // z = 1: b y² = 1 − a x²
        let r1 = (1 + md - mulm(am, s)) % md;
        // x = 1: z² = a + b y²
        let r2 = (am + mulm(bm, s)) % md;
        // y = 1: z² = b + a x²
        let r3 = (bm + mulm(am, s)) % md;
        if b_squares[r1 as usize] || squares[r2 as usize] || squares[r3 as usize] {
            return Ok(1);
        }
    }
    Ok(-1)
}

/// A quadratic extension ℚ_p(√d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawQuad", into = "RawQuad")]
pub struct QuadExtension {
    d: SquareClass,
}

#[derive(Serialize, Deserialize)]
struct RawQuad {
    d: SquareClass,
}

impl TryFrom<RawQuad> for QuadExtension {
    type Error = LocalFieldError;
    fn try_from(r: RawQuad) -> Result<Self> {
        QuadExtension::new(r.d)
    }
}

impl From<QuadExtension> for RawQuad {
    fn from(q: QuadExtension) -> Self {
        RawQuad { d: q.d }
    }
}

impl QuadExtension {
    pub fn new(d: SquareClass) -> Result<Self> {
        if d.is_one() {
            return Err(LocalFieldError::TrivialExtension);
        }
        Ok(QuadExtension { d })
    }

    pub fn from_int(d: i64, p: Prime) -> Result<Self> {
        Self::new(SquareClass::from_int(d, p)?)
    }

    pub fn base(&self) -> Prime {
        self.d.prime
    }

    pub fn d(&self) -> SquareClass {
        self.d
    }

    /// η_{E/F}(a): +1 iff a is a norm from E.
    pub fn eta(&self, a: &SquareClass) -> Result<i8> {
        hilbert(a, &self.d)
    }

    pub fn eta_rat(&self, a: &BigRational) -> Result<i8> {
        self.eta(&SquareClass::reduce(a, self.base())?)
    }

    /// The norm group as a set of square classes (index two).
    pub fn norm_group(&self) -> BTreeSet<SquareClass> {
        SquareClass::all(self.base())
            .into_iter()
            .filter(|c| self.eta(c).unwrap() == 1)
            .collect()
    }
}

/// Free-function form of [`QuadExtension::eta`].
pub fn eta(e: &QuadExtension, a: &SquareClass) -> Result<i8> {
    e.eta(a)
}

/// A biquadratic (Klein four) extension ℚ_p(√d1, √d2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KleinExtension {
    pub d1: SquareClass,
    pub d2: SquareClass,
}

impl KleinExtension {
    pub fn new(d1: SquareClass, d2: SquareClass) -> Result<Self> {
        check_same(&d1, &d2)?;
        let d3 = d1.mul(&d2)?;
        if d1.is_one() || d2.is_one() || d3.is_one() {
            return Err(LocalFieldError::DegenerateKlein);
        }
        Ok(KleinExtension { d1, d2 })
    }

    pub fn base(&self) -> Prime {
        self.d1.prime
    }

    /// The three intermediate quadratic extensions: √d1, √d2, √(d1 d2).
    pub fn quadratic_subfields(&self) -> [QuadExtension; 3] {
        let d3 = self.d1.mul(&self.d2).unwrap();
        [
            QuadExtension::new(self.d1).unwrap(),
            QuadExtension::new(self.d2).unwrap(),
            QuadExtension::new(d3).unwrap(),
        ]
    }
}

/// A place of ℚ together with the local Hilbert symbol there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceSymbol {
    /// `None` is the real place.
    pub prime: Option<u64>,
    pub symbol: i8,
}

fn prime_factors(n: &BigInt) -> Result<BTreeSet<u64>> {
    let mut n = n.abs().to_u64().ok_or_else(|| LocalFieldError::FactorRange(n.to_string()))?;
    let mut out = BTreeSet::new();
    let mut d = 2u64;
    while d * d <= n {
        while n % d == 0 {
            out.insert(d);
            n /= d;
        }
        d += 1;
    }
    if n > 1 {
        out.insert(n);
    }
    Ok(out)
}

/// Checks Hilbert reciprocity ∏_v (a, b)_v = 1 over the places dividing 2ab∞.
pub fn reciprocity_check(a: &BigRational, b: &BigRational) -> Result<Vec<PlaceSymbol>> {
    if a.is_zero() || b.is_zero() {
        return Err(LocalFieldError::Zero);
    }
    let mut primes = BTreeSet::from([2u64]);
    for x in [a.numer(), a.denom(), b.numer(), b.denom()] {
        primes.extend(prime_factors(x)?);
    }
    let mut places = Vec::new();
    let mut product = 1i8;
    for p in primes {
        let s = hilbert_rat(a, b, Prime(p))?;
        product *= s;
        places.push(PlaceSymbol { prime: Some(p), symbol: s });
    }
    let real = if a.is_negative() && b.is_negative() { -1 } else { 1 };
    product *= real;
    places.push(PlaceSymbol { prime: None, symbol: real });
    if product == 1 {
        Ok(places)
    } else {
        Err(LocalFieldError::ReciprocityFailure(places))
    }
}

#[cfg(test)]
pub(crate) fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[cfg(test)]
pub(crate) fn rat_frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn sc(x: i64, p: u64) -> SquareClass {
        SquareClass::from_int(x, pr(p)).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert!(sc(9, 5).is_one());
        let five = sc(5, 5);
        assert_eq!((five.val_parity(), five.unit()), (1, 1));
        // 50 = 5²·2 and 2 is not a square mod 5
        assert_eq!(sc(50, 5), sc(2, 5));
        assert_eq!(sc(2, 5).unit(), 2);
        assert!(SquareClass::reduce(&rat(0), pr(3)).is_err());
    }

    #[test]
    fn class_counts() {
        for p in [2, 3, 5, 7, 11] {
            let all = SquareClass::all(pr(p));
            assert_eq!(all.len(), pr(p).class_count());
            let set: BTreeSet<_> = all.iter().collect();
            assert_eq!(set.len(), all.len());
        }
    }

    #[test]
    fn reduce_is_multiplicative() {
        for p in [2, 3, 5, 7] {
            for x in -30i64..30 {
                for y in -30i64..30 {
                    if x == 0 || y == 0 {
                        continue;
                    }
                    assert_eq!(sc(x, p).mul(&sc(y, p)).unwrap(), sc(x * y, p));
                }
            }
        }
    }

    #[test]
    fn hilbert_examples() {
        for p in [2, 3, 5, 7] {
            for b in SquareClass::all(pr(p)) {
                assert_eq!(hilbert(&SquareClass::one(pr(p)), &b).unwrap(), 1);
                assert_eq!(hilbert(&b, &b.neg()).unwrap(), 1);
            }
        }
        // (3, u)_3 with u = 2 the non-residue
        assert_eq!(hilbert(&sc(3, 3), &sc(2, 3)).unwrap(), -1);
        assert_eq!(hilbert(&sc(-1, 2), &sc(-1, 2)).unwrap(), -1);
        assert!(hilbert(&sc(3, 3), &sc(3, 5)).is_err());
    }

    #[test]
    fn hilbert_group_laws_exhaustive() {
        for p in [2, 3, 5, 7, 11, 13] {
            let all = SquareClass::all(pr(p));
            for a in &all {
                for b in &all {
                    assert_eq!(hilbert(a, b).unwrap(), hilbert(b, a).unwrap());
                    for c in &all {
                        let lhs = hilbert(&a.mul(b).unwrap(), c).unwrap();
                        assert_eq!(lhs, hilbert(a, c).unwrap() * hilbert(b, c).unwrap());
                    }
                }
                if !a.is_one() {
                    assert!(all.iter().any(|b| hilbert(a, b).unwrap() == -1));
                }
            }
        }
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(hilbert_oracle(1, 7, pr(3)).unwrap(), 1);
        assert_eq!(hilbert_oracle(3, 3, pr(3)).unwrap(), hilbert(&sc(3, 3), &sc(3, 3)).unwrap());
        assert_eq!(hilbert_oracle(2, 5, pr(5)).unwrap(), hilbert(&sc(2, 5), &sc(5, 5)).unwrap());
        assert_eq!(hilbert_oracle(3, 2, pr(3)).unwrap(), -1);
    }

    #[test]
    fn eta_examples() {
        let e = QuadExtension::from_int(3, pr(3)).unwrap();
        assert_eq!(e.eta(&SquareClass::one(pr(3))).unwrap(), 1);
        assert_eq!(e.eta(&sc(-3, 3)).unwrap(), 1);
        assert_eq!(e.eta(&sc(2, 3)).unwrap(), hilbert_oracle(2, 3, pr(3)).unwrap());
        assert_eq!(e.eta(&sc(2, 3)).unwrap(), -1);
        assert_eq!(e.norm_group().len(), 2);
        assert!(QuadExtension::from_int(4, pr(3)).is_err());
    }

    #[test]
    fn klein_subfields_have_distinct_norm_groups() {
        for p in [2, 3, 5, 7] {
            let all = SquareClass::all(pr(p));
            for d1 in &all {
                for d2 in &all {
                    if let Ok(k) = KleinExtension::new(*d1, *d2) {
                        let groups: BTreeSet<_> =
                            k.quadratic_subfields().iter().map(|q| q.norm_group()).collect();
                        assert_eq!(groups.len(), 3);
                    }
                }
            }
        }
    }

    #[test]
    fn reciprocity_examples() {
        assert!(reciprocity_check(&rat(-1), &rat(-1)).is_ok());
        assert!(reciprocity_check(&rat(1), &rat(17)).is_ok());
        let places = reciprocity_check(&rat(3), &rat(5)).unwrap();
        assert_eq!(places.len(), 4);
        assert!(reciprocity_check(&rat_frac(-7, 12), &rat_frac(5, -9)).is_ok());
    }

    #[test]
    fn square_class_json() {
        let c = sc(10, 5);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"p":5,"val":1,"unit":2}"#);
        let back: SquareClass = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<SquareClass>(r#"{"p":5,"val":0,"unit":3}"#).is_err());
    }
}
