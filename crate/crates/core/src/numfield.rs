//! Exact arithmetic in ℚ(√a, √b) with the commuting involutions σ and τ.
//!
//! σ fixes √b and negates √a, τ fixes √a and negates √b. With `b` absent the
//! field is the quadratic ℚ(√a) and τ acts trivially; this models the cases
//! where F' = F.
//!
//! In the notation of the symmetric pair: E = ℚ(√a), F' = ℚ(√b),
//! F'' = ℚ(√ab), and ı = √a.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::Case;
use crate::linalg::{Matrix, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumFieldError {
    #[error("{0} is not a square-free integer other than 0 and 1")]
    NotSquareFree(i64),
    #[error("a and b must be distinct (got {0})")]
    EqualGenerators(i64),
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("element is not invertible")]
    NotInvertible,
    #[error("element does not have norm one for the requested involution")]
    NotNormOne,
    #[error("cannot parse rational {0:?}")]
    BadRational(String),
    #[error("an element needs exactly four coefficients, got {0}")]
    BadCoefficientCount(usize),
    #[error("coefficients outside ℚ(√a) are not allowed in a quadratic field")]
    NotInSubfield,
}

pub type Result<T> = std::result::Result<T, NumFieldError>;

fn is_squarefree(n: i64) -> bool {
    if n == 0 || n == 1 {
        return false;
    }
    let m = n.unsigned_abs();
    let mut d = 2u64;
    while d * d <= m {
        if m % (d * d) == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The field ℚ(√a, √b), or ℚ(√a) when `b` is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawField")]
pub struct BiquadField {
    a: i64,
    b: Option<i64>,
}

#[derive(Deserialize)]
struct RawField {
    a: i64,
    #[serde(default)]
    b: Option<i64>,
}

impl TryFrom<RawField> for BiquadField {
    type Error = NumFieldError;
    fn try_from(r: RawField) -> Result<Self> {
        match r.b {
            Some(b) => BiquadField::new(r.a, b),
            None => BiquadField::quadratic(r.a),
        }
    }
}

impl BiquadField {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        for x in [a, b] {
            if !is_squarefree(x) {
                return Err(NumFieldError::NotSquareFree(x));
            }
        }
        if a == b {
            return Err(NumFieldError::EqualGenerators(a));
        }
        Ok(BiquadField { a, b: Some(b) })
    }

    /// ℚ(√a) with τ = id.
    pub fn quadratic(a: i64) -> Result<Self> {
        if !is_squarefree(a) {
            return Err(NumFieldError::NotSquareFree(a));
        }
        Ok(BiquadField { a, b: None })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> Option<i64> {
        self.b
    }

    pub fn is_degenerate(&self) -> bool {
        self.b.is_none()
    }

    fn b_or_zero(&self) -> i64 {
        self.b.unwrap_or(0)
    }

    pub fn zero(&self) -> BiquadElement {
        BiquadElement { field: *self, c: [zero(), zero(), zero(), zero()] }
    }

    pub fn one(&self) -> BiquadElement {
        self.from_rational(BigRational::one())
    }

    pub fn from_rational(&self, q: BigRational) -> BiquadElement {
        BiquadElement { field: *self, c: [q, zero(), zero(), zero()] }
    }

    pub fn from_int(&self, n: i64) -> BiquadElement {
        self.from_rational(BigRational::from_integer(n.into()))
    }

    /// Element from the four coefficients of 1, √a, √b, √ab.
    pub fn element(&self, c: [BigRational; 4]) -> Result<BiquadElement> {
        if self.is_degenerate() && !(c[2].is_zero() && c[3].is_zero()) {
            return Err(NumFieldError::NotInSubfield);
        }
        Ok(BiquadElement { field: *self, c })
    }

    /// √a, the fixed trace-zero generator ı of E/F.
    pub fn sqrt_a(&self) -> BiquadElement {
        BiquadElement { field: *self, c: [zero(), BigRational::one(), zero(), zero()] }
    }

    /// √b (only in the biquadratic case).
    pub fn sqrt_b(&self) -> BiquadElement {
        assert!(!self.is_degenerate(), "√b is not in a quadratic field");
        BiquadElement { field: *self, c: [zero(), zero(), BigRational::one(), zero()] }
    }

    pub fn sqrt_ab(&self) -> BiquadElement {
        assert!(!self.is_degenerate(), "√ab is not in a quadratic field");
        BiquadElement { field: *self, c: [zero(), zero(), zero(), BigRational::one()] }
    }

    /// A generator g with ι(g) = −g for the given involution.
    pub fn odd_generator(&self, inv: Involution) -> BiquadElement {
        match inv {
            Involution::Sigma | Involution::SigmaTau => self.sqrt_a(),
            Involution::Tau => {
                if self.is_degenerate() {
                    panic!("τ is trivial on a quadratic field")
                } else {
                    self.sqrt_b()
                }
            }
        }
    }

    /// A random element with small numerators and denominators.
    pub fn random_element<R: Rng>(&self, rng: &mut R, bound: i64) -> BiquadElement {
        let mut c: [BigRational; 4] = [zero(), zero(), zero(), zero()];
        let slots = if self.is_degenerate() { 2 } else { 4 };
        for slot in c.iter_mut().take(slots) {
            let n = rng.gen_range(-bound..=bound);
            let d = rng.gen_range(1..=bound.max(1));
            *slot = BigRational::new(n.into(), d.into());
        }
        BiquadElement { field: *self, c }
    }
}

impl fmt::Display for BiquadField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.b {
            Some(b) => write!(f, "Q(sqrt({}), sqrt({}))", self.a, b),
            None => write!(f, "Q(sqrt({}))", self.a),
        }
    }
}

fn zero() -> BigRational {
    BigRational::zero()
}

/// The three non-trivial automorphisms of ℚ(√a, √b).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Involution {
    Sigma,
    Tau,
    SigmaTau,
}

/// c₀ + c₁√a + c₂√b + c₃√ab with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BiquadElement {
    field: BiquadField,
    c: [BigRational; 4],
}

impl fmt::Debug for BiquadElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for BiquadElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "√a", "√b", "√ab"];
        let mut first = true;
        for (c, n) in self.c.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if n.is_empty() {
                write!(f, "{}", c)?;
            } else {
                write!(f, "({}){}", c, n)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl BiquadElement {
    pub fn field(&self) -> BiquadField {
        self.field
    }

    pub fn coeffs(&self) -> &[BigRational; 4] {
        &self.c
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.field, o.field, "mixing elements of different fields");
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1..].iter().all(|x| x.is_zero())
    }

    /// The rational value, if the element lies in ℚ.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.c[1..].iter().all(|x| x.is_zero()) {
            Some(self.c[0].clone())
        } else {
            None
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        let c = std::array::from_fn(|i| &self.c[i] + &o.c[i]);
        BiquadElement { field: self.field, c }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.check(o);
        let c = std::array::from_fn(|i| &self.c[i] - &o.c[i]);
        BiquadElement { field: self.field, c }
    }

    pub fn neg(&self) -> Self {
        let c = std::array::from_fn(|i| -&self.c[i]);
        BiquadElement { field: self.field, c }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let c = std::array::from_fn(|i| &self.c[i] * q);
        BiquadElement { field: self.field, c }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        let a = BigRational::from_integer(self.field.a.into());
        let b = BigRational::from_integer(self.field.b_or_zero().into());
        let ab = &a * &b;
        let [x0, x1, x2, x3] = &self.c;
        let [y0, y1, y2, y3] = &o.c;
        let c0 = x0 * y0 + &a * (x1 * y1) + &b * (x2 * y2) + &ab * (x3 * y3);
        let c1 = x0 * y1 + x1 * y0 + &b * (x2 * y3 + x3 * y2);
        let c2 = x0 * y2 + x2 * y0 + &a * (x1 * y3 + x3 * y1);
        let c3 = x0 * y3 + x3 * y0 + x1 * y2 + x2 * y1;
        BiquadElement { field: self.field, c: [c0, c1, c2, c3] }
    }

    pub fn apply(&self, inv: Involution) -> Self {
        let flips: [bool; 4] = match inv {
            Involution::Sigma => [false, true, false, true],
            Involution::Tau => [false, false, true, true],
            Involution::SigmaTau => [false, true, true, false],
        };
        let c = std::array::from_fn(|i| if flips[i] { -&self.c[i] } else { self.c[i].clone() });
        BiquadElement { field: self.field, c }
    }

    pub fn sigma(&self) -> Self {
        self.apply(Involution::Sigma)
    }

    pub fn tau(&self) -> Self {
        self.apply(Involution::Tau)
    }

    /// N_{E'/F}(x), a rational number.
    pub fn norm_to_base(&self) -> BigRational {
        let n = self.mul(&self.sigma()).mul(&self.tau()).mul(&self.apply(Involution::SigmaTau));
        let full = n.as_rational().expect("full norm is rational");
        if self.field.is_degenerate() {
            // τ is trivial here, so the product above is the square of N_{E/F}.
            let r = self.mul(&self.sigma()).as_rational().expect("quadratic norm is rational");
            debug_assert_eq!(&r * &r, full);
            r
        } else {
            full
        }
    }

    /// x · ι(x) for an involution ι.
    pub fn relative_norm(&self, inv: Involution) -> Self {
        self.mul(&self.apply(inv))
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let others = self.sigma().mul(&self.tau()).mul(&self.apply(Involution::SigmaTau));
        let n = self.mul(&others).as_rational().expect("full norm is rational");
        Some(others.scale(&n.recip()))
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self.mul(&i))
    }

    /// Coefficients as "n/d" strings.
    pub fn to_strings(&self) -> [String; 4] {
        std::array::from_fn(|i| self.c[i].to_string())
    }

    pub fn from_strings(field: BiquadField, s: &[String]) -> Result<Self> {
        if s.len() != 4 {
            return Err(NumFieldError::BadCoefficientCount(s.len()));
        }
        let mut c: [BigRational; 4] = [zero(), zero(), zero(), zero()];
        for (slot, t) in c.iter_mut().zip(s) {
            *slot = parse_rational(t)?;
        }
        field.element(c)
    }
}

/// Parses "n", "n/d" or "-n/d".
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || NumFieldError::BadRational(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(n, d))
    } else {
        Ok(BigRational::from_integer(BigInt::from_str(t).map_err(|_| bad())?))
    }
}

/// A rational in JSON: an integer or an "n/d" string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalJson {
    Int(i64),
    Str(String),
}

impl RationalJson {
    pub fn parse(&self) -> Result<BigRational> {
        match self {
            RationalJson::Int(n) => Ok(BigRational::from_integer((*n).into())),
            RationalJson::Str(s) => parse_rational(s),
        }
    }

    pub fn from_rational(q: &BigRational) -> Self {
        match rational_to_i64(q) {
            Some(n) => RationalJson::Int(n),
            None => RationalJson::Str(q.to_string()),
        }
    }
}

/// Rational → i64 when it is an integer that fits.
pub fn rational_to_i64(q: &BigRational) -> Option<i64> {
    if q.is_integer() {
        q.numer().to_i64()
    } else {
        None
    }
}

/// Square-free part of a nonzero rational, as an integer with the same square class over ℚ.
pub fn squarefree_part(q: &BigRational) -> BigInt {
    let n = q.numer() * q.denom();
    let sign = if n.is_negative() { -1 } else { 1 };
    let mut m = n.abs();
    let mut out = BigInt::one();
    let mut d = BigInt::from(2);
    while &d * &d <= m {
        let dd = &d * &d;
        while (&m % &dd).is_zero() {
            m /= &dd;
        }
        if (&m % &d).is_zero() {
            m /= &d;
            out *= &d;
        }
        d += 1;
    }
    out * m * sign
}

/// Recovers c' with c' / ι(c') = x, given x · ι(x) = 1.
pub fn recover_hilbert90(x: &BiquadElement, inv: Involution) -> Result<BiquadElement> {
    if !x.relative_norm(inv).is_one() {
        return Err(NumFieldError::NotNormOne);
    }
    let one = x.field.one();
    if x.add(&one).is_zero() {
        Ok(x.field.odd_generator(inv))
    } else {
        Ok(one.add(x))
    }
}

impl Scalar for BiquadElement {
    fn zero_like(&self) -> Self {
        self.field.zero()
    }
    fn one_like(&self) -> Self {
        self.field.one()
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn negated(&self) -> Self {
        self.neg()
    }
    fn inverse(&self) -> Option<Self> {
        self.inv()
    }
}

pub type BiquadMatrix = Matrix<BiquadElement>;

pub fn apply_involution(x: &BiquadElement, which: Involution) -> BiquadElement {
    x.apply(which)
}

pub fn matrix_apply(m: &BiquadMatrix, which: Involution) -> BiquadMatrix {
    m.map(|e| e.apply(which), m.zero_elem())
}

/// ᵗg^τ.
pub fn tau_transpose(m: &BiquadMatrix) -> BiquadMatrix {
    matrix_apply(&m.transpose(), Involution::Tau)
}

/// Embeds a rational matrix.
pub fn from_rational_matrix(field: BiquadField, m: &Matrix<BigRational>) -> BiquadMatrix {
    m.map(|q| field.from_rational(q.clone()), &field.zero())
}

/// Whether every entry is fixed by the involution.
pub fn is_fixed_by(m: &BiquadMatrix, which: Involution) -> bool {
    matrix_apply(m, which) == *m
}

/// Rational entries, when all entries are rational.
pub fn to_rational_matrix(m: &BiquadMatrix) -> Option<Matrix<BigRational>> {
    let rows: Option<Vec<Vec<BigRational>>> =
        (0..m.rows()).map(|i| m.row(i).iter().map(|e| e.as_rational()).collect()).collect();
    rows.map(|r| Matrix::from_rows(r, &BigRational::zero()))
}

fn check_square_pair(g: &BiquadMatrix, j: &BiquadMatrix) -> Result<()> {
    if !g.is_square() || !j.is_square() || g.rows() != j.rows() {
        return Err(NumFieldError::Dimension(format!(
            "{}x{} against {}x{}",
            g.rows(),
            g.cols(),
            j.rows(),
            j.cols()
        )));
    }
    if g.rows() > 0 && g.get(0, 0).field() != j.get(0, 0).field() {
        return Err(NumFieldError::FieldMismatch);
    }
    Ok(())
}

/// ᵗg^τ j g = j. The case only matters through τ, which is trivial unless unitary.
pub fn in_isometry_group(g: &BiquadMatrix, j: &BiquadMatrix, _case: Case) -> Result<bool> {
    check_square_pair(g, j)?;
    Ok(tau_transpose(g).mul(j).mul(g) == *j)
}

/// Isometry and x · σ(x) = I.
pub fn in_symmetric_space(x: &BiquadMatrix, j: &BiquadMatrix, case: Case) -> Result<bool> {
    if !in_isometry_group(x, j, case)? {
        return Ok(false);
    }
    Ok(x.mul(&matrix_apply(x, Involution::Sigma)).is_identity())
}

/// Matrix Hilbert 90 for σ: z with z · σ(z)⁻¹ = x, given x · σ(x) = I.
///
/// Any c gives z = c + x σ(c) with x σ(z) = z; the first invertible choice
/// from a fixed sequence of test matrices, then of seeded random matrices,
/// is returned.
pub fn hilbert90_matrix(x: &BiquadMatrix) -> Option<BiquadMatrix> {
    let n = x.rows();
    let field = if n == 0 { return Some(x.clone()) } else { x.get(0, 0).field() };
    let sx_c = |c: &BiquadMatrix| c.add(&x.mul(&matrix_apply(c, Involution::Sigma)));
    let mut candidates: Vec<BiquadMatrix> = vec![BiquadMatrix::identity(n, &field.zero())];
    candidates.push(BiquadMatrix::identity(n, &field.zero()).scale(&field.sqrt_a()));
    for shift in 1..=6i64 {
        let diag: Vec<BiquadElement> = (0..n)
            .map(|i| {
                let k = ((i as i64 * shift) % 5) + 1;
                if (i as i64 + shift) % 2 == 0 {
                    field.from_int(k)
                } else {
                    field.sqrt_a().scale(&BigRational::from_integer(k.into()))
                }
            })
            .collect();
        let mut c = BiquadMatrix::diagonal(&diag, &field.zero());
        for i in 0..n.saturating_sub(1) {
            c.set(i, i + 1, field.from_int(shift));
        }
        candidates.push(c);
    }
    for c in candidates {
        let z = sx_c(&c);
        if !z.det().is_zero() {
            return Some(z);
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..64 {
        let z = sx_c(&random_matrix(field, n, &mut rng, 3));
        if !z.det().is_zero() {
            return Some(z);
        }
    }
    None
}

/// A random matrix with small entries.
pub fn random_matrix<R: Rng>(field: BiquadField, n: usize, rng: &mut R, bound: i64) -> BiquadMatrix {
    BiquadMatrix::from_fn(n, n, &field.zero(), |_, _| field.random_element(rng, bound))
}

/// Serializable matrix: field plus row-major coefficient strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub field: RawFieldOut,
    pub rows: Vec<Vec<[String; 4]>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawFieldOut {
    pub a: i64,
    pub b: Option<i64>,
}

impl MatrixJson {
    pub fn from_matrix(field: BiquadField, m: &BiquadMatrix) -> Self {
        MatrixJson {
            field: RawFieldOut { a: field.a, b: field.b },
            rows: (0..m.rows()).map(|i| m.row(i).iter().map(|e| e.to_strings()).collect()).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<(BiquadField, BiquadMatrix)> {
        let field = match self.field.b {
            Some(b) => BiquadField::new(self.field.a, b)?,
            None => BiquadField::quadratic(self.field.a)?,
        };
        let rows: Result<Vec<Vec<BiquadElement>>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|e| BiquadElement::from_strings(field, e)).collect())
            .collect();
        let rows = rows?;
        if rows.iter().any(|r| r.len() != rows.len()) {
            return Err(NumFieldError::Dimension("matrix must be square".into()));
        }
        Ok((field, BiquadMatrix::from_rows(rows, &field.zero())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn field() -> BiquadField {
        BiquadField::new(-1, 3).unwrap()
    }

    #[test]
    fn construction_rules() {
        assert!(BiquadField::new(2, 2).is_err());
        assert!(BiquadField::new(4, 3).is_err());
        assert!(BiquadField::new(1, 3).is_err());
        assert!(BiquadField::new(-1, 2).is_ok());
        assert!(BiquadField::quadratic(-3).is_ok());
    }

    #[test]
    fn involution_examples() {
        let f = field();
        assert_eq!(f.sqrt_a().sigma(), f.sqrt_a().neg());
        assert_eq!(f.sqrt_a().tau(), f.sqrt_a());
        assert_eq!(f.sqrt_ab().apply(Involution::SigmaTau), f.sqrt_ab());
        assert_eq!(f.sqrt_a().mul(&f.sqrt_a()), f.from_int(-1));
        assert_eq!(f.sqrt_a().mul(&f.sqrt_b()), f.sqrt_ab());
    }

    #[test]
    fn field_axioms_and_homomorphy() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for f in [field(), BiquadField::new(2, 5).unwrap(), BiquadField::quadratic(-1).unwrap()] {
            for _ in 0..300 {
                let x = f.random_element(&mut rng, 9);
                let y = f.random_element(&mut rng, 9);
                let z = f.random_element(&mut rng, 9);
                assert_eq!(x.mul(&y), y.mul(&x));
                assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
                assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
                if !x.is_zero() {
                    assert!(x.mul(&x.inv().unwrap()).is_one());
                }
                for inv in [Involution::Sigma, Involution::Tau, Involution::SigmaTau] {
                    assert_eq!(x.mul(&y).apply(inv), x.apply(inv).mul(&y.apply(inv)));
                    assert_eq!(x.apply(inv).apply(inv), x);
                }
                assert_eq!(x.sigma().tau(), x.tau().sigma());
                // N_{E'/F} = N_{E/F} ∘ N_{E'/E}
                if !f.is_degenerate() && !x.is_zero() {
                    let ne = x.relative_norm(Involution::Tau);
                    let nf = ne.relative_norm(Involution::Sigma).as_rational().unwrap();
                    assert_eq!(nf, x.norm_to_base());
                }
            }
        }
    }

    #[test]
    fn hilbert90_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = field();
        for _ in 0..100 {
            let c = f.random_element(&mut rng, 7);
            if c.is_zero() {
                continue;
            }
            let x = c.div(&c.tau()).unwrap();
            let c2 = recover_hilbert90(&x, Involution::Tau).unwrap();
            assert_eq!(c2.div(&c2.tau()).unwrap(), x);
        }
        let m1 = f.from_int(-1);
        assert_eq!(recover_hilbert90(&m1, Involution::Tau).unwrap(), f.sqrt_b());
        assert!(recover_hilbert90(&f.from_int(2), Involution::Tau).is_err());
    }

    #[test]
    fn isometry_examples() {
        let f = field();
        let w2 = BiquadMatrix::antidiagonal(2, &f.zero());
        assert!(in_isometry_group(&BiquadMatrix::identity(2, &f.zero()), &w2, Case::Unitary).unwrap());
        // ι(t) = diag(t, t^{-τ}) preserves w₂
        let t = f.sqrt_a();
        let g = BiquadMatrix::diagonal(&[t.clone(), t.tau().inv().unwrap()], &f.zero());
        assert!(in_isometry_group(&g, &w2, Case::Unitary).unwrap());
        let bad = BiquadMatrix::diagonal(&[f.from_int(2), f.one()], &f.zero());
        assert!(!in_isometry_group(&bad, &w2, Case::Unitary).unwrap());
        assert!(in_symmetric_space(&BiquadMatrix::identity(2, &f.zero()), &w2, Case::Unitary).unwrap());
        // diag(2, 1/2) is an isometry of w₂ but 2·σ(2) ≠ 1
        let h = BiquadMatrix::diagonal(&[f.from_int(2), f.from_rational(BigRational::new(1.into(), 2.into()))], &f.zero());
        assert!(in_isometry_group(&h, &w2, Case::Unitary).unwrap());
        assert!(!in_symmetric_space(&h, &w2, Case::Unitary).unwrap());
    }

    #[test]
    fn matrix_hilbert90() {
        let f = field();
        let w2 = BiquadMatrix::antidiagonal(2, &f.zero());
        let x = w2.clone();
        let z = hilbert90_matrix(&x).unwrap();
        assert_eq!(z.mul(&matrix_apply(&z, Involution::Sigma).inverse().unwrap()), x);
    }

    #[test]
    fn json_round_trip() {
        let f = field();
        let m = BiquadMatrix::diagonal(&[f.sqrt_a(), f.from_int(3)], &f.zero());
        let j = MatrixJson::from_matrix(f, &m);
        let s = serde_json::to_string(&j).unwrap();
        let back: MatrixJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_matrix().unwrap().1, m);
        assert_eq!(parse_rational("-3/6").unwrap(), BigRational::new((-1).into(), 2.into()));
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn squarefree_parts() {
        assert_eq!(squarefree_part(&BigRational::new(50.into(), 1.into())), BigInt::from(2));
        assert_eq!(squarefree_part(&BigRational::new((-3).into(), 4.into())), BigInt::from(-3));
        assert_eq!(squarefree_part(&BigRational::new(5.into(), 3.into())), BigInt::from(15));
    }
}
