//! The symmetric space X = {x ∈ G(E) : x·σ(x) = I} of a classical Galois
//! pair and the classification of its orbits under twisted conjugation
//! g·x = g x σ(g)⁻¹.
//!
//! Orbits are recorded by invariants. Writing x = z σ(z)⁻¹, the form
//! y = ᵗz^τ ȷ z has entries fixed by σ and its class determines the orbit:
//! in the orthogonal case through (det y, Hasse y) together with det x, in
//! the unitary case through a single bit.
//!
//! Unitary bits are Γ-classes, Γ = {a^{1−σ} : a ∈ (E'/E)₁}. For u in
//! (E'/E)₁ ∩ (E'/F')₁ pick c with c/σ(c) = u; then c·τ(c) is rational and
//! u ∈ Γ exactly when it is a norm from F'. This gives the closed form
//! bit(−1) = [(a, b)_p = −1], which [`gamma_index_data`] cross-checks against
//! the brute-force Hilbert symbol and a bounded global search.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{self, Case, DiagForm, FormError, FormInvariants};
use crate::linalg::QMatrix;
use crate::localfield::{hilbert_oracle, LocalFieldError, Prime, QuadExtension, SquareClass};
use crate::numfield::{
    from_rational_matrix, hilbert90_matrix, in_symmetric_space, is_fixed_by, matrix_apply, recover_hilbert90,
    tau_transpose, to_rational_matrix, BiquadElement, BiquadField, BiquadMatrix, Involution, NumFieldError,
    RationalJson,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymSpaceError {
    #[error("field {field} does not model the required local extension at p = {p}: {reason}")]
    ModelNotLocal { field: String, p: u64, reason: String },
    #[error("kernel of rank {n0} is not allowed for the {case:?} case")]
    KernelRank { case: Case, n0: usize },
    #[error("kernel form is isotropic")]
    IsotropicKernel,
    #[error("matrix is not in the symmetric space")]
    NotInX,
    #[error("z does not satisfy x = z·σ(z)⁻¹")]
    WrongWitness,
    #[error("ᵗz^τ ȷ z is not defined over the base field")]
    FormNotRational,
    #[error("component {0:?} only applies to the orthogonal case")]
    ComponentNotApplicable(XComponent),
    #[error("operation requires the unitary case")]
    NotUnitary,
    #[error("invariants from different cases cannot be compared")]
    MixedInvariants,
    #[error("element is not in (E'/E)₁ ∩ (E'/F')₁")]
    NotInGammaAmbient,
    #[error("element is not fixed by στ")]
    NotInSubfield,
    #[error("no sample realized the orbit {0}")]
    Unrealized(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Local(#[from] LocalFieldError),
    #[error(transparent)]
    NumField(#[from] NumFieldError),
}

pub type Result<T> = std::result::Result<T, SymSpaceError>;

/// A classical Galois pair: a kernel ȷ of rank n₀ and the split extension
/// ȷ[n] of size N = n₀ + 2n, over an explicit model of E'/F at a prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PairSpec", into = "PairSpec")]
pub struct ClassicalPair {
    case: Case,
    prime: Prime,
    field: BiquadField,
    kernel: Vec<BigRational>,
    n: usize,
}

/// JSON form of a [`ClassicalPair`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSpec {
    pub case: Case,
    pub p: u64,
    pub a: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<i64>,
    #[serde(default)]
    pub kernel: Vec<RationalJson>,
    pub n: usize,
}

impl TryFrom<PairSpec> for ClassicalPair {
    type Error = SymSpaceError;
    fn try_from(s: PairSpec) -> Result<Self> {
        let prime = Prime::new(s.p)?;
        let field = match s.b {
            Some(b) => BiquadField::new(s.a, b)?,
            None => BiquadField::quadratic(s.a)?,
        };
        let kernel = s.kernel.iter().map(|k| k.parse()).collect::<std::result::Result<Vec<_>, _>>()?;
        ClassicalPair::new(s.case, prime, field, kernel, s.n)
    }
}

impl From<ClassicalPair> for PairSpec {
    fn from(p: ClassicalPair) -> Self {
        PairSpec {
            case: p.case,
            p: p.prime.get(),
            a: p.field.a(),
            b: p.field.b(),
            kernel: p.kernel.iter().map(RationalJson::from_rational).collect(),
            n: p.n,
        }
    }
}

fn nonsquare_at(d: i64, p: Prime) -> Result<bool> {
    Ok(!SquareClass::from_int(d, p)?.is_one())
}

impl ClassicalPair {
    pub fn new(case: Case, prime: Prime, field: BiquadField, kernel: Vec<BigRational>, n: usize) -> Result<Self> {
        let bad = |reason: &str| SymSpaceError::ModelNotLocal {
            field: field.to_string(),
            p: prime.get(),
            reason: reason.to_string(),
        };
        if !nonsquare_at(field.a(), prime)? {
            return Err(bad("a is a square, so E/F is trivial"));
        }
        match (case, field.b()) {
            (Case::Unitary, None) => return Err(bad("the unitary case needs F' = F(√b)")),
            (Case::Unitary, Some(b)) => {
                if !nonsquare_at(b, prime)? {
                    return Err(bad("b is a square, so F'/F is trivial"));
                }
                if !nonsquare_at(field.a() * b, prime)? {
                    return Err(bad("ab is a square, so E = F'"));
                }
            }
            (_, Some(_)) => return Err(bad("F' = F in this case, so b must be absent")),
            (_, None) => {}
        }
        let n0 = kernel.len();
        let max = match case {
            Case::Symplectic => 0,
            Case::Unitary => 2,
            Case::Orthogonal => 4,
        };
        if n0 > max {
            return Err(SymSpaceError::KernelRank { case, n0 });
        }
        let pair = ClassicalPair { case, prime, field, kernel, n };
        if n0 > 0 && !forms::is_anisotropic(&pair.kernel_form()?)? {
            return Err(SymSpaceError::IsotropicKernel);
        }
        Ok(pair)
    }

    pub fn from_ints(case: Case, p: u64, a: i64, b: Option<i64>, kernel: &[i64], n: usize) -> Result<Self> {
        let field = match b {
            Some(b) => BiquadField::new(a, b)?,
            None => BiquadField::quadratic(a)?,
        };
        let kernel = kernel.iter().map(|&k| BigRational::from_integer(k.into())).collect();
        Self::new(case, Prime::new(p)?, field, kernel, n)
    }

    pub fn case(&self) -> Case {
        self.case
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn field(&self) -> BiquadField {
        self.field
    }

    pub fn kernel(&self) -> &[BigRational] {
        &self.kernel
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n0(&self) -> usize {
        self.kernel.len()
    }

    /// Matrix size N = n₀ + 2n.
    pub fn size(&self) -> usize {
        self.n0() + 2 * self.n
    }

    pub fn epsilon(&self) -> i64 {
        self.case.epsilon()
    }

    pub fn is_split_even_orthogonal(&self) -> bool {
        self.case == Case::Orthogonal && self.kernel.is_empty()
    }

    /// The same kernel with a different Witt index.
    pub fn with_n(&self, n: usize) -> ClassicalPair {
        ClassicalPair { n, ..self.clone() }
    }

    /// E/F as a local quadratic extension.
    pub fn e_ext(&self) -> QuadExtension {
        QuadExtension::from_int(self.field.a(), self.prime).expect("validated at construction")
    }

    /// F'/F in the unitary case.
    pub fn fprime_ext(&self) -> Option<QuadExtension> {
        self.field.b().map(|b| QuadExtension::from_int(b, self.prime).expect("validated at construction"))
    }

    pub fn kernel_form(&self) -> Result<DiagForm> {
        Ok(match self.case {
            Case::Symplectic => DiagForm::symplectic(self.prime, 0)?,
            Case::Orthogonal => DiagForm::orthogonal(self.prime, self.kernel.clone())?,
            Case::Unitary => DiagForm::unitary(self.fprime_ext().expect("unitary has F'"), self.kernel.clone())?,
        })
    }

    /// det ȷ, with the empty determinant equal to 1.
    pub fn kernel_det(&self) -> BigRational {
        self.kernel.iter().fold(BigRational::one(), |acc, x| acc * x)
    }

    /// The Gram matrix ȷ[n].
    pub fn j_matrix(&self) -> BiquadMatrix {
        let f = self.field;
        let size = self.size();
        let mut j = BiquadMatrix::zeros(size, size, &f.zero());
        for i in 0..self.n {
            j.set(i, size - 1 - i, f.one());
            j.set(size - 1 - i, i, f.from_int(self.epsilon()));
        }
        for (i, k) in self.kernel.iter().enumerate() {
            j.set(self.n + i, self.n + i, f.from_rational(k.clone()));
        }
        j
    }

    /// ȷ[n] as a rational matrix (all cases: the entries are rational).
    pub fn j_rational(&self) -> QMatrix {
        to_rational_matrix(&self.j_matrix()).expect("ȷ[n] is rational")
    }

    /// det ȷ[n].
    pub fn form_det(&self) -> BigRational {
        self.j_rational().det()
    }

    /// The fixed involution η₀ of the kernel: identity unless orthogonal,
    /// where it is the determinant −1 witness.
    pub fn eta0(&self) -> QMatrix {
        let n0 = self.n0();
        let zero = BigRational::zero();
        if self.case != Case::Orthogonal || n0 == 0 {
            return QMatrix::identity(n0, &zero);
        }
        let gram = QMatrix::diagonal(&self.kernel, &zero);
        forms::det_image_witness(&gram, &-BigRational::one()).expect("diagonal kernel is nondegenerate")
    }

    /// η_m in G_m, a matrix of size n₀ + 2m.
    pub fn eta(&self, m: usize) -> BiquadMatrix {
        let f = self.field;
        let size = self.n0() + 2 * m;
        let mut out = BiquadMatrix::identity(size, &f.zero());
        if self.case != Case::Orthogonal || m == 0 && self.n0() == 0 {
            return out;
        }
        if self.n0() > 0 {
            out.set_block(m, m, &from_rational_matrix(f, &self.eta0()));
        } else {
            let w2 = BiquadMatrix::antidiagonal(2, &f.zero());
            out.set_block(m - 1, m - 1, &w2);
        }
        out
    }

    /// Whether det ȷ[n] lies in the given class times −1.
    fn form_det_is(&self, times: &BigRational) -> Result<bool> {
        let lhs = SquareClass::reduce(&self.form_det(), self.prime)?;
        let rhs = SquareClass::reduce(&(-times.clone()), self.prime)?;
        Ok(lhs == rhs)
    }

    fn a_rat(&self) -> BigRational {
        BigRational::from_integer(self.field.a().into())
    }
}

/// Orthogonal components: det x = 1 or det x = −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Sx,
    Complement,
}

/// Which part of X to count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XComponent {
    Full,
    Sx,
    Complement,
}

/// Complete invariant of an orbit in X.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum XOrbitInvariant {
    Symplectic,
    Unitary { gamma_bit: u8 },
    Orthogonal { component: Component, partial: SquareClass, hasse: i8 },
}

impl std::fmt::Display for XOrbitInvariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            XOrbitInvariant::Symplectic => write!(f, "symplectic"),
            XOrbitInvariant::Unitary { gamma_bit } => write!(f, "unitary[{gamma_bit}]"),
            XOrbitInvariant::Orthogonal { component, partial, hasse } => {
                write!(f, "orthogonal[{component:?}, {partial}, {hasse}]")
            }
        }
    }
}

/// The norm bit of a rational for F'/F.
fn fprime_bit(pair: &ClassicalPair, q: &BigRational) -> Result<u8> {
    let ext = pair.fprime_ext().ok_or(SymSpaceError::NotUnitary)?;
    Ok(u8::from(ext.eta_rat(q)? == -1))
}

/// Γ-class bit of u ∈ (E'/E)₁ ∩ (E'/F')₁ (unitary case).
pub fn gamma_bit(pair: &ClassicalPair, u: &BiquadElement) -> Result<u8> {
    if pair.case != Case::Unitary {
        return Err(SymSpaceError::NotUnitary);
    }
    if !u.relative_norm(Involution::Sigma).is_one() || !u.relative_norm(Involution::Tau).is_one() {
        return Err(SymSpaceError::NotInGammaAmbient);
    }
    let c = recover_hilbert90(u, Involution::Sigma)?;
    let norm = c.relative_norm(Involution::Tau).as_rational().ok_or(SymSpaceError::NotInGammaAmbient)?;
    fprime_bit(pair, &norm)
}

/// Contribution of det y_i ∈ F'' = (E')^{στ} through det y_i^{τ−1}:
/// the F'/F norm bit of N_{F''/F}(det y_i).
pub fn y_contribution_bit(pair: &ClassicalPair, d: &BiquadElement) -> Result<u8> {
    if pair.case != Case::Unitary {
        return Err(SymSpaceError::NotUnitary);
    }
    if d.apply(Involution::SigmaTau) != *d {
        return Err(SymSpaceError::NotInSubfield);
    }
    let n = d.relative_norm(Involution::Tau).as_rational().ok_or(SymSpaceError::NotInSubfield)?;
    fprime_bit(pair, &n)
}

/// How the y-orbit bits feed the Γ-class of x_w.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityMap {
    Iso,
    Trivial,
}

/// The quotient (E'/E)₁ ∩ (E'/F')₁ / Γ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaData {
    pub quotient_size: usize,
    pub identity_bit: u8,
    pub minus_one_bit: u8,
    /// The same bit from the brute-force Hilbert symbol.
    pub minus_one_oracle_bit: u8,
    /// A global c with c^{(1−σ)(1−τ)} = −1, if one was found in the search box.
    pub minus_one_certificate: Option<[String; 4]>,
    pub y_parity: ParityMap,
}

/// Searches c with integer coefficients in [−bound, bound] and
/// c^{(1−σ)(1−τ)} = −1. Finding one proves −1 ∈ Γ at every place.
pub fn search_minus_one_certificate(field: BiquadField, bound: i64) -> Option<BiquadElement> {
    let minus_one = field.from_int(-1);
    let r = |x: i64| BigRational::from_integer(x.into());
    for c0 in -bound..=bound {
        for c1 in -bound..=bound {
            for c2 in -bound..=bound {
                for c3 in -bound..=bound {
                    let c = field.element([r(c0), r(c1), r(c2), r(c3)]).ok()?;
                    if c.is_zero() {
                        continue;
                    }
                    let num = c.mul(&c.apply(Involution::SigmaTau));
                    let den = c.sigma().mul(&c.tau());
                    if num.div(&den).as_ref() == Some(&minus_one) {
                        return Some(c);
                    }
                }
            }
        }
    }
    None
}

/// Γ-class of −1 by the closed form.
pub fn classify_minus_one(pair: &ClassicalPair) -> Result<u8> {
    gamma_bit(pair, &pair.field.from_int(-1))
}

/// A fixed u* ∈ F'' with contribution bit 1, or a rational non-norm from E
/// in the other cases.
pub fn nonnorm_representative(pair: &ClassicalPair) -> Result<BiquadElement> {
    let f = pair.field;
    match pair.case {
        Case::Unitary => {
            for h in 0..50i64 {
                for x in -h..=h {
                    for y in [h - x.abs(), -(h - x.abs())] {
                        let d = f.from_int(x).add(&f.sqrt_ab().scale(&BigRational::from_integer(y.into())));
                        if d.is_zero() {
                            continue;
                        }
                        if y_contribution_bit(pair, &d)? == 1 {
                            return Ok(d);
                        }
                    }
                }
            }
            Err(SymSpaceError::Unrealized("non-norm in F''".into()))
        }
        _ => {
            let e = pair.e_ext();
            for k in 1..200i64 {
                for u in [k, -k] {
                    if e.eta_rat(&BigRational::from_integer(u.into()))? == -1 {
                        return Ok(f.from_int(u));
                    }
                }
            }
            Err(SymSpaceError::Unrealized("non-norm from E".into()))
        }
    }
}

/// Index-two data for Γ (unitary case).
pub fn gamma_index_data(pair: &ClassicalPair) -> Result<GammaData> {
    if pair.case != Case::Unitary {
        return Err(SymSpaceError::NotUnitary);
    }
    let minus_one_bit = classify_minus_one(pair)?;
    let b = pair.field.b().expect("unitary");
    let oracle = hilbert_oracle(pair.field.a(), b, pair.prime)?;
    let cert = search_minus_one_certificate(pair.field, 2);
    let u_star = nonnorm_representative(pair)?;
    let u = u_star.tau().div(&u_star).expect("nonzero");
    let y_parity = if gamma_bit(pair, &u)? == 1 { ParityMap::Iso } else { ParityMap::Trivial };
    Ok(GammaData {
        quotient_size: 2,
        identity_bit: gamma_bit(pair, &pair.field.one())?,
        minus_one_bit,
        minus_one_oracle_bit: u8::from(oracle == -1),
        minus_one_certificate: cert.map(|c| c.to_strings()),
        y_parity,
    })
}

/// Orbit invariant of x = z σ(z)⁻¹ through y = ᵗz^τ ȷ z.
pub fn classify_x(x: &BiquadMatrix, z: &BiquadMatrix, pair: &ClassicalPair) -> Result<XOrbitInvariant> {
    let size = pair.size();
    if x.rows() != size || z.rows() != size {
        return Err(SymSpaceError::Dimension { expected: size, got: x.rows() });
    }
    let j = pair.j_matrix();
    if !in_symmetric_space(x, &j, pair.case)? {
        return Err(SymSpaceError::NotInX);
    }
    if size > 0 && x.mul(&matrix_apply(z, Involution::Sigma)) != *z {
        return Err(SymSpaceError::WrongWitness);
    }
    let y = tau_transpose(z).mul(&j).mul(z);
    if !is_fixed_by(&y, Involution::Sigma) {
        return Err(SymSpaceError::FormNotRational);
    }
    invariant_of_form(&y, x, pair)
}

fn invariant_of_form(y: &BiquadMatrix, x: &BiquadMatrix, pair: &ClassicalPair) -> Result<XOrbitInvariant> {
    match pair.case {
        Case::Symplectic => Ok(XOrbitInvariant::Symplectic),
        Case::Unitary => {
            if y.rows() == 0 {
                return Ok(XOrbitInvariant::Unitary { gamma_bit: 0 });
            }
            let d = y.det().as_rational().ok_or(SymSpaceError::FormNotRational)?;
            let bit = fprime_bit(pair, &d)? ^ fprime_bit(pair, &pair.form_det())?;
            Ok(XOrbitInvariant::Unitary { gamma_bit: bit })
        }
        Case::Orthogonal => {
            let det_x = x.det();
            let component = if det_x.is_one() { Component::Sx } else { Component::Complement };
            if y.rows() == 0 {
                return Ok(XOrbitInvariant::Orthogonal { component, partial: SquareClass::one(pair.prime), hasse: 1 });
            }
            let yq = to_rational_matrix(y).ok_or(SymSpaceError::FormNotRational)?;
            match forms::gram_invariants(&yq, pair.prime)? {
                FormInvariants::Orthogonal { disc, hasse, .. } => {
                    Ok(XOrbitInvariant::Orthogonal { component, partial: disc, hasse })
                }
                _ => unreachable!(),
            }
        }
    }
}

/// [`classify_x`] with z recovered by matrix Hilbert 90.
pub fn classify_x_auto(x: &BiquadMatrix, pair: &ClassicalPair) -> Result<XOrbitInvariant> {
    let z = hilbert90_matrix(x).ok_or(SymSpaceError::NotInX)?;
    classify_x(x, &z, pair)
}

/// Number of G-orbits in X or in one of its orthogonal components.
pub fn orbit_count_x(pair: &ClassicalPair, component: XComponent) -> Result<usize> {
    let size = pair.size();
    match pair.case {
        Case::Symplectic | Case::Unitary if component != XComponent::Full => {
            Err(SymSpaceError::ComponentNotApplicable(component))
        }
        Case::Symplectic => Ok(1),
        Case::Unitary => Ok(if size == 0 { 1 } else { 2 }),
        Case::Orthogonal => {
            let sx = match size {
                0 | 1 => 1,
                2 if pair.form_det_is(&BigRational::one())? => 1,
                _ => 2,
            };
            let complement = match size {
                0 => 0,
                1 => 1,
                2 if pair.form_det_is(&pair.a_rat())? => 1,
                _ => 2,
            };
            Ok(match component {
                XComponent::Full => sx + complement,
                XComponent::Sx => sx,
                XComponent::Complement => complement,
            })
        }
    }
}

/// The invariants of all orbits in a component, in increasing order.
pub fn orbit_invariants(pair: &ClassicalPair, component: XComponent) -> Result<Vec<XOrbitInvariant>> {
    match pair.case {
        Case::Symplectic | Case::Unitary if component != XComponent::Full => {
            Err(SymSpaceError::ComponentNotApplicable(component))
        }
        Case::Symplectic => Ok(vec![XOrbitInvariant::Symplectic]),
        Case::Unitary => {
            let bits: &[u8] = if pair.size() == 0 { &[0] } else { &[0, 1] };
            Ok(bits.iter().map(|&b| XOrbitInvariant::Unitary { gamma_bit: b }).collect())
        }
        Case::Orthogonal => {
            let mut out = Vec::new();
            let comps: &[Component] = match component {
                XComponent::Full => &[Component::Sx, Component::Complement],
                XComponent::Sx => &[Component::Sx],
                XComponent::Complement => &[Component::Complement],
            };
            let size = pair.size();
            for &c in comps {
                if size == 0 {
                    if c == Component::Sx {
                        out.push(XOrbitInvariant::Orthogonal { component: c, partial: SquareClass::one(pair.prime), hasse: 1 });
                    }
                    continue;
                }
                let mut det = pair.form_det();
                if c == Component::Complement {
                    det *= pair.a_rat();
                }
                let partial = SquareClass::reduce(&det, pair.prime)?;
                let forced = size == 1 || (size == 2 && partial == SquareClass::minus_one(pair.prime));
                let hasses: &[i8] = if forced { &[1] } else { &[-1, 1] };
                for &h in hasses {
                    out.push(XOrbitInvariant::Orthogonal { component: c, partial, hasse: h });
                }
            }
            out.sort();
            Ok(out)
        }
    }
}

/// Whether two invariants describe the same G°-orbit.
pub fn same_g0_orbit(i1: &XOrbitInvariant, i2: &XOrbitInvariant) -> Result<bool> {
    use XOrbitInvariant::*;
    match (i1, i2) {
        (Symplectic, Symplectic) | (Unitary { .. }, Unitary { .. }) | (Orthogonal { .. }, Orthogonal { .. }) => {
            Ok(i1 == i2)
        }
        _ => Err(SymSpaceError::MixedInvariants),
    }
}

/// A random rational whose p-adic valuation ranges over −1..=2.
pub fn random_rational<R: Rng>(rng: &mut R, p: Prime) -> BigRational {
    let num: i64 = rng.gen_range(-5..=5);
    let den: i64 = rng.gen_range(1..=4);
    let e: i32 = rng.gen_range(-1..=2);
    let pp = BigRational::from_integer(p.get().into());
    let scale = if e >= 0 { num_traits::pow(pp, e as usize) } else { pp.recip() };
    BigRational::new(num.into(), den.into()) * scale
}

fn random_in<R: Rng>(rng: &mut R, field: BiquadField, p: Prime, slots: &[usize]) -> BiquadElement {
    let mut c: [BigRational; 4] = std::array::from_fn(|_| BigRational::zero());
    for &s in slots {
        c[s] = random_rational(rng, p);
    }
    field.element(c).expect("slots respect the field")
}

/// A random matrix S with ᵗS^τ = sign·S. With `full` the entries lie in E',
/// otherwise in F' = (E')^σ.
pub fn random_hermitian<R: Rng>(
    rng: &mut R,
    field: BiquadField,
    p: Prime,
    size: usize,
    sign: i64,
    full: bool,
) -> BiquadMatrix {
    let degenerate = field.is_degenerate();
    let off: Vec<usize> = match (full, degenerate) {
        (true, false) => vec![0, 1, 2, 3],
        (true, true) => vec![0, 1],
        (false, false) => vec![0, 2],
        (false, true) => vec![0],
    };
    // τ-fixed slots are 0, 1; τ-odd slots are 2, 3
    let diag: Vec<usize> = off.iter().copied().filter(|&s| (s < 2) == (sign == 1)).collect();
    let mut s = BiquadMatrix::zeros(size, size, &field.zero());
    for i in 0..size {
        s.set(i, i, random_in(rng, field, p, &diag));
        for j in i + 1..size {
            let e = random_in(rng, field, p, &off);
            let t = e.tau().scale(&BigRational::from_integer(sign.into()));
            s.set(i, j, e);
            s.set(j, i, t);
        }
    }
    s
}

/// Cayley transform (I + A)(I − A)⁻¹.
pub fn cayley(a: &BiquadMatrix) -> Option<BiquadMatrix> {
    let id = BiquadMatrix::identity(a.rows(), a.zero_elem());
    Some(id.add(a).mul(&id.sub(a).inverse()?))
}

/// A random element of G(E) built by the Cayley transform of J⁻¹S.
pub fn random_group_element<R: Rng>(pair: &ClassicalPair, rng: &mut R) -> BiquadMatrix {
    let j = pair.j_matrix();
    let jinv = j.inverse().expect("ȷ[n] is invertible");
    loop {
        let s = random_hermitian(rng, pair.field, pair.prime, pair.size(), -pair.epsilon(), true);
        if let Some(g) = cayley(&jinv.mul(&s)) {
            return g;
        }
    }
}

/// A random point of X in the requested orthogonal component (`Sx` in the
/// other cases), built from a Cayley transform of an element A with
/// σ(A) = −ηAη. Returns `None` when the complement is empty.
pub fn sample_x<R: Rng>(pair: &ClassicalPair, component: Component, rng: &mut R) -> Option<BiquadMatrix> {
    let size = pair.size();
    let f = pair.field;
    let j = pair.j_matrix();
    let jinv = j.inverse().expect("ȷ[n] is invertible");
    let iota = f.sqrt_a();
    if component == Component::Sx || pair.case != Case::Orthogonal {
        loop {
            let s = random_hermitian(rng, f, pair.prime, size, -pair.epsilon(), false);
            let a = jinv.mul(&s).scale(&iota);
            if let Some(x) = cayley(&a) {
                return Some(x);
            }
        }
    }
    if size == 0 {
        return None;
    }
    let jq = pair.j_rational();
    let eta = from_rational_matrix(f, &forms::det_image_witness(&jq, &-BigRational::one()).ok()?);
    let half = f.from_rational(BigRational::new(1.into(), 2.into()));
    loop {
        let s = random_hermitian(rng, f, pair.prime, size, -1, false);
        let b = jinv.mul(&s);
        let conj = eta.mul(&b).mul(&eta);
        let plus = b.add(&conj).scale(&half);
        let minus = b.sub(&conj).scale(&half);
        let a = plus.scale(&iota).add(&minus);
        if let Some(c) = cayley(&a) {
            return Some(eta.mul(&c));
        }
    }
}

/// x = z σ(z)⁻¹ where z acts on the pair (e₀, e_{N−1}) by columns (1, ½)
/// and (c, −c/2) for the fixed u* = c ∈ F''. Then ᵗz^τ ȷ z = diag(1, −N(c))
/// on that pair, which reaches the unitary orbit the Cayley sampler rarely
/// hits.
fn twisted_unitary_x(pair: &ClassicalPair) -> Result<Option<(BiquadMatrix, BiquadMatrix)>> {
    if pair.case != Case::Unitary || pair.n == 0 {
        return Ok(None);
    }
    let f = pair.field;
    let size = pair.size();
    let c = nonnorm_representative(pair)?;
    let half = BigRational::new(1.into(), 2.into());
    let mut z = BiquadMatrix::identity(size, &f.zero());
    z.set(size - 1, 0, f.from_rational(half.clone()));
    z.set(0, size - 1, c.clone());
    z.set(size - 1, size - 1, c.scale(&-half));
    let zs = matrix_apply(&z, Involution::Sigma);
    let x = z.mul(&zs.inverse().ok_or(NumFieldError::NotInvertible)?);
    Ok(Some((x, z)))
}

/// Finds (x, z) with x = z σ(z)⁻¹ in the orbit with invariant `target`.
pub fn realize<R: Rng>(
    pair: &ClassicalPair,
    target: &XOrbitInvariant,
    rng: &mut R,
    attempts: usize,
) -> Result<(BiquadMatrix, BiquadMatrix)> {
    let component = match target {
        XOrbitInvariant::Orthogonal { component, .. } => *component,
        _ => Component::Sx,
    };
    let f = pair.field;
    let id = BiquadMatrix::identity(pair.size(), &f.zero());
    if classify_x(&id, &id, pair).as_ref() == Ok(target) {
        return Ok((id.clone(), id));
    }
    if let Some((x, z)) = twisted_unitary_x(pair)? {
        if classify_x(&x, &z, pair)? == *target {
            return Ok((x, z));
        }
    }
    for _ in 0..attempts {
        let Some(x) = sample_x(pair, component, rng) else { break };
        let Some(z) = hilbert90_matrix(&x) else { continue };
        if classify_x(&x, &z, pair)? == *target {
            return Ok((x, z));
        }
    }
    Err(SymSpaceError::Unrealized(target.to_string()))
}

/// Representative of the y-orbit with the given bit, in
/// Y_m(E'/(E')^{στ}, ε): diag(u*, 1, …, 1) or the identity, times ı when
/// ε = −1.
pub fn y_representative(pair: &ClassicalPair, m: usize, bit: u8) -> Result<BiquadMatrix> {
    let f = pair.field;
    let mut entries = vec![f.one(); m];
    if bit == 1 && m > 0 {
        entries[0] = nonnorm_representative(pair)?;
    }
    let mut y = BiquadMatrix::diagonal(&entries, &f.zero());
    if pair.epsilon() == -1 {
        y = y.scale(&f.sqrt_a());
    }
    Ok(y)
}

/// Orbit bit of y ∈ Y_m(E'/(E')^{στ}, ε).
pub fn y_orbit_bit(pair: &ClassicalPair, y: &BiquadMatrix) -> Result<u8> {
    let f = pair.field;
    let mut d = y.det();
    if pair.epsilon() == -1 {
        let m = y.rows();
        let iota_m = (0..m).fold(f.one(), |acc, _| acc.mul(&f.sqrt_a()));
        d = d.div(&iota_m).ok_or(NumFieldError::NotInvertible)?;
    }
    match pair.case {
        Case::Unitary => y_contribution_bit(pair, &d),
        _ => {
            let q = d.as_rational().ok_or(SymSpaceError::FormNotRational)?;
            Ok(u8::from(pair.e_ext().eta_rat(&q)? == -1))
        }
    }
}
