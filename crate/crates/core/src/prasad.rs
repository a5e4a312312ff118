//! Prasad's quadratic character ω_{Y,E/F}, spinor norms, wsn and the
//! opposition group for quasi-split classical groups.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{self, hasse_of, DiagForm, FormError};
use crate::linalg::QMatrix;
use crate::localfield::{hilbert, LocalFieldError, Prime, QuadExtension, SquareClass};
use crate::numfield::{
    self, matrix_apply, recover_hilbert90, BiquadElement, BiquadField, BiquadMatrix, Involution, NumFieldError,
    RationalJson,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrasadError {
    #[error("{0} is not quasi-split")]
    NotQuasiSplit(String),
    #[error("√{0} generates no quadratic extension of ℚ_{1}")]
    DegenerateExtension(i64, u64),
    #[error("matrix is not an isometry of the form")]
    NotIsometry,
    #[error("matrix has determinant ≠ 1")]
    NotSpecial,
    #[error("matrix is not unitary for w_m")]
    NotUnitary,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("group element does not match the character")]
    WrongElement,
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Local(#[from] LocalFieldError),
    #[error(transparent)]
    NumField(#[from] NumFieldError),
}

pub type Result<T> = std::result::Result<T, PrasadError>;

/// A quasi-split classical group over F = ℚ_p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum GroupDescriptor {
    #[serde(rename = "GL")]
    Gl { m: usize },
    /// U(m, K/F) with K = F(√k); `k` absent means K = E.
    #[serde(rename = "U")]
    Unitary {
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<i64>,
    },
    /// Sp(2m).
    #[serde(rename = "Sp")]
    Sp { m: usize },
    /// SO(m) of a diagonal form; the split form when `form` is absent.
    #[serde(rename = "SO")]
    So {
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        form: Option<Vec<RationalJson>>,
    },
}

impl GroupDescriptor {
    fn name(&self) -> String {
        match self {
            GroupDescriptor::Gl { m } => format!("GL({m})"),
            GroupDescriptor::Unitary { m, k: None } => format!("U({m}, E/F)"),
            GroupDescriptor::Unitary { m, k: Some(k) } => format!("U({m}, F(√{k})/F)"),
            GroupDescriptor::Sp { m } => format!("Sp({})", 2 * m),
            GroupDescriptor::So { m, .. } => format!("SO({m})"),
        }
    }

    /// Entries of the orthogonal form; a split diagonal form by default.
    pub fn so_entries(&self) -> Result<Vec<BigRational>> {
        match self {
            GroupDescriptor::So { m, form: Some(f) } => {
                if f.len() != *m {
                    return Err(PrasadError::Dimension(format!("form of length {} for SO({m})", f.len())));
                }
                Ok(f.iter().map(|x| x.parse()).collect::<std::result::Result<_, _>>()?)
            }
            GroupDescriptor::So { m, form: None } => {
                let mut e = Vec::with_capacity(*m);
                for i in 0..*m {
                    e.push(BigRational::from_integer(if i % 2 == 0 { 1 } else { -1 }.into()));
                }
                Ok(e)
            }
            _ => Err(PrasadError::WrongElement),
        }
    }

    /// Replaces `k` by `None` when K = E and checks quasi-splitness.
    pub fn normalized(&self, e: &QuadExtension) -> Result<GroupDescriptor> {
        let p = e.base();
        match self {
            GroupDescriptor::Unitary { m, k: Some(k) } => {
                let class = SquareClass::from_int(*k, p)?;
                if class.is_one() {
                    return Err(PrasadError::DegenerateExtension(*k, p.get()));
                }
                numfield::BiquadField::quadratic(*k)?;
                Ok(GroupDescriptor::Unitary { m: *m, k: if class == e.d() { None } else { Some(*k) } })
            }
            GroupDescriptor::So { .. } => {
                let f = DiagForm::orthogonal(p, self.so_entries()?)?;
                if anisotropic_kernel_dim(&f)? > 2 {
                    return Err(PrasadError::NotQuasiSplit(self.name()));
                }
                Ok(self.clone())
            }
            other => Ok(other.clone()),
        }
    }
}

/// Dimension of the anisotropic kernel of a nondegenerate form over ℚ_p.
pub fn anisotropic_kernel_dim(f: &DiagForm) -> Result<usize> {
    let p = f.prime;
    let m = f.rank;
    let classes: Vec<SquareClass> =
        f.entries.iter().map(|x| SquareClass::reduce(x, p)).collect::<std::result::Result<_, _>>()?;
    let mut d = SquareClass::one(p);
    for c in &classes {
        d = d.mul(c)?;
    }
    let eps = hasse_of(&classes)?;
    let m1 = SquareClass::minus_one(p);
    // Hasse invariant of the kernel after splitting off h hyperbolic planes.
    let kernel_hasse = |h: usize| -> Result<i8> {
        let dk = if h % 2 == 1 { d.neg() } else { d };
        let mut s = eps;
        if h % 2 == 1 {
            s *= hilbert(&dk, &m1)?;
        }
        if (h * h.saturating_sub(1) / 2) % 2 == 1 {
            s *= hilbert(&m1, &m1)?;
        }
        Ok(s)
    };
    if m % 2 == 1 {
        return Ok(if kernel_hasse((m - 1) / 2)? == 1 { 1 } else { 3 });
    }
    let disc = if (m / 2) % 2 == 1 { d.neg() } else { d };
    if !disc.is_one() {
        return Ok(2);
    }
    Ok(if kernel_hasse(m / 2)? == 1 { 0 } else { 4 })
}

/// A quadratic character written as a composite of a norm-residue symbol with
/// a standard homomorphism.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CharacterFormula {
    Trivial,
    /// η_{E/F}^e ∘ det.
    EtaDet { exponent: usize, ext: QuadExtension },
    /// η_{E/F}^e ∘ sn.
    EtaSn { exponent: usize, ext: QuadExtension },
    /// η_{EK/K}^e ∘ wsn, evaluated as η_{E/F}^e ∘ N_{K/F} ∘ wsn.
    EtaWsn { exponent: usize, ext: QuadExtension, k: i64 },
}

/// Group elements on which a [`CharacterFormula`] can be evaluated.
#[derive(Debug, Clone)]
pub enum GroupElement {
    Gl(QMatrix),
    Sp(QMatrix),
    So { g: QMatrix, gram: QMatrix },
    Unitary(BiquadMatrix),
}

impl CharacterFormula {
    pub fn exponent(&self) -> usize {
        match self {
            CharacterFormula::Trivial => 0,
            CharacterFormula::EtaDet { exponent, .. }
            | CharacterFormula::EtaSn { exponent, .. }
            | CharacterFormula::EtaWsn { exponent, .. } => *exponent,
        }
    }

    /// Whether the character is trivial (η² = 1).
    pub fn is_trivial(&self) -> bool {
        self.exponent() % 2 == 0
    }

    /// The same character with exponent reduced mod 2.
    pub fn reduced(&self) -> CharacterFormula {
        if self.is_trivial() {
            return CharacterFormula::Trivial;
        }
        match self.clone() {
            CharacterFormula::EtaDet { ext, .. } => CharacterFormula::EtaDet { exponent: 1, ext },
            CharacterFormula::EtaSn { ext, .. } => CharacterFormula::EtaSn { exponent: 1, ext },
            CharacterFormula::EtaWsn { ext, k, .. } => CharacterFormula::EtaWsn { exponent: 1, ext, k },
            CharacterFormula::Trivial => CharacterFormula::Trivial,
        }
    }

    pub fn symbol(&self) -> String {
        match self {
            CharacterFormula::Trivial => "1".into(),
            CharacterFormula::EtaDet { exponent, .. } => format!("η_{{E/F}}^{exponent} ∘ det"),
            CharacterFormula::EtaSn { exponent, .. } => format!("η_{{E/F}}^{exponent} ∘ sn"),
            CharacterFormula::EtaWsn { exponent, .. } => format!("η_{{EK/K}}^{exponent} ∘ wsn"),
        }
    }

    pub fn evaluate(&self, g: &GroupElement) -> Result<i8> {
        let pow = |v: i8| if self.is_trivial() { 1 } else { v };
        match (self, g) {
            (CharacterFormula::Trivial, _) => Ok(1),
            (CharacterFormula::EtaDet { ext, .. }, GroupElement::Gl(m)) => {
                let det = m.det();
                if det.is_zero() {
                    return Err(PrasadError::Dimension("singular matrix".into()));
                }
                Ok(pow(ext.eta_rat(&det)?))
            }
            (CharacterFormula::EtaSn { ext, .. }, GroupElement::So { g, gram }) => {
                Ok(pow(ext.eta(&spinor_norm(g, gram, ext.base())?)?))
            }
            (CharacterFormula::EtaWsn { ext, k, .. }, GroupElement::Unitary(g)) => {
                if g.zero_elem().field().a() != *k {
                    return Err(PrasadError::WrongElement);
                }
                Ok(pow(ext.eta_rat(&wsn(g)?.norm_to_base())?))
            }
            _ => Err(PrasadError::WrongElement),
        }
    }
}

/// ω_{Y,E/F} for a quasi-split classical group Y.
pub fn prasad_character(y: &GroupDescriptor, e: &QuadExtension) -> Result<CharacterFormula> {
    let y = y.normalized(e)?;
    let ext = *e;
    Ok(match y {
        GroupDescriptor::Gl { m } => CharacterFormula::EtaDet { exponent: m.saturating_sub(1), ext },
        GroupDescriptor::Unitary { k: None, .. } | GroupDescriptor::Sp { .. } => CharacterFormula::Trivial,
        GroupDescriptor::So { .. } => {
            let f = DiagForm::orthogonal(e.base(), y.so_entries()?)?;
            CharacterFormula::EtaSn { exponent: anisotropic_kernel_dim(&f)?, ext }
        }
        GroupDescriptor::Unitary { m, k: Some(k) } => CharacterFormula::EtaWsn { exponent: m.saturating_sub(1), ext, k },
    })
}

/// The opposition group Y^{op, E/F}.
pub fn opposition_group(y: &GroupDescriptor, e: &QuadExtension) -> Result<GroupDescriptor> {
    let y = y.normalized(e)?;
    Ok(match y {
        GroupDescriptor::Gl { m } => GroupDescriptor::Unitary { m, k: None },
        GroupDescriptor::Unitary { m, k: None } => GroupDescriptor::Gl { m },
        GroupDescriptor::Unitary { m, k: Some(k) } => {
            let k2 = i64::try_from(third_quadratic(e, k)).map_err(|_| PrasadError::DegenerateExtension(k, e.base().get()))?;
            GroupDescriptor::Unitary { m, k: Some(k2) }
        }
        other => other,
    })
}

fn bilinear(gram: &QMatrix, u: &[BigRational], v: &[BigRational]) -> BigRational {
    let n = u.len();
    let mut s = BigRational::zero();
    for i in 0..n {
        if u[i].is_zero() {
            continue;
        }
        for j in 0..n {
            s += &u[i] * gram.get(i, j) * &v[j];
        }
    }
    s
}

fn apply(g: &QMatrix, v: &[BigRational]) -> Vec<BigRational> {
    (0..g.rows()).map(|i| (0..g.cols()).fold(BigRational::zero(), |a, j| a + g.get(i, j) * &v[j])).collect()
}

/// The reflection s_v: x ↦ x − 2 b(x, v)/q(v) · v.
pub fn reflection(gram: &QMatrix, v: &[BigRational]) -> QMatrix {
    let n = v.len();
    let q = bilinear(gram, v, v);
    let gv = apply(&gram.transpose(), v);
    let two = BigRational::from_integer(2.into());
    QMatrix::from_fn(n, n, &BigRational::zero(), |i, j| {
        let delta = if i == j { BigRational::one() } else { BigRational::zero() };
        delta - &two * &v[i] * &gv[j] / &q
    })
}

/// Anisotropic vectors v₁, …, v_k with g = s_{v₁} ⋯ s_{v_k}.
pub fn reflection_decomposition(g: &QMatrix, gram: &QMatrix) -> Result<Vec<Vec<BigRational>>> {
    let n = gram.rows();
    if !gram.is_square() || g.rows() != n || g.cols() != n {
        return Err(PrasadError::Dimension(format!("{}×{} element for rank {n}", g.rows(), g.cols())));
    }
    if g.transpose().mul(gram).mul(g) != *gram {
        return Err(PrasadError::NotIsometry);
    }
    let basis = forms::diagonalize(gram)?.change;
    let mut h = g.clone();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for i in 0..n {
        let e: Vec<BigRational> = (0..n).map(|r| basis.get(r, i).clone()).collect();
        let diff = |h: &QMatrix| -> Vec<BigRational> { apply(h, &e).iter().zip(&e).map(|(a, b)| a - b).collect() };
        let mut u = diff(&h);
        if u.iter().all(|x| x.is_zero()) {
            continue;
        }
        if bilinear(gram, &u, &u).is_zero() {
            h = h.mul(&reflection(gram, &e));
            right.push(e.clone());
            u = diff(&h);
        }
        h = reflection(gram, &u).mul(&h);
        left.push(u);
    }
    debug_assert!(h.is_identity());
    right.reverse();
    left.extend(right);
    Ok(left)
}

/// sn(g) ∈ F*/F*² for g ∈ SO(gram).
pub fn spinor_norm(g: &QMatrix, gram: &QMatrix, p: Prime) -> Result<SquareClass> {
    if g.rows() == gram.rows() && g.det() != BigRational::one() {
        return Err(PrasadError::NotSpecial);
    }
    let vs = reflection_decomposition(g, gram)?;
    let product = vs.iter().fold(BigRational::one(), |a, v| a * bilinear(gram, v, v));
    Ok(SquareClass::reduce(&product, p)?)
}

/// wsn(g) ∈ K*/F* for g ∈ U(w_m, K/F), K = ℚ(√k) with conjugation σ.
///
/// The class is returned normalized as 1 or t + √k.
pub fn wsn(g: &BiquadMatrix) -> Result<BiquadElement> {
    let field = g.zero_elem().field();
    let n = g.rows();
    let w = BiquadMatrix::antidiagonal(n, &field.zero());
    if matrix_apply(&g.transpose(), Involution::Sigma).mul(&w).mul(g) != w {
        return Err(PrasadError::NotUnitary);
    }
    let z = recover_hilbert90(&g.det(), Involution::Sigma)?;
    Ok(normalize_mod_base(&z, &field))
}

fn normalize_mod_base(z: &BiquadElement, field: &BiquadField) -> BiquadElement {
    let c = z.coeffs();
    if c[1].is_zero() {
        return field.one();
    }
    field.from_rational(&c[0] / &c[1]).add(&field.sqrt_a())
}

/// Representative integer of the third quadratic subfield of EK.
pub fn third_quadratic(e: &QuadExtension, k: i64) -> BigInt {
    numfield::squarefree_part(&(e.d().representative() * BigRational::from_integer(k.into())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn ext(d: i64, p: u64) -> QuadExtension {
        QuadExtension::from_int(d, Prime::new(p).unwrap()).unwrap()
    }

    fn qm(rows: &[&[i64]]) -> QMatrix {
        QMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect(), &q(0))
    }

    fn random_so<R: Rng>(gram: &QMatrix, rng: &mut R) -> QMatrix {
        let n = gram.rows();
        let ginv = gram.inverse().unwrap();
        loop {
            let mut s = QMatrix::zeros(n, n, &q(0));
            for i in 0..n {
                for j in i + 1..n {
                    let v = BigRational::new(rng.gen_range(-3..=3).into(), rng.gen_range(1..=2).into());
                    s.set(i, j, v.clone());
                    s.set(j, i, -v);
                }
            }
            let a = ginv.mul(&s);
            let id = QMatrix::identity(n, &q(0));
            if let Some(inv) = id.add(&a).inverse() {
                return id.sub(&a).mul(&inv);
            }
        }
    }

    fn siegel(h: &QMatrix) -> QMatrix {
        let n = h.rows();
        let w = QMatrix::antidiagonal(n, &q(0));
        let star = w.mul(&h.transpose().inverse().unwrap()).mul(&w);
        QMatrix::block_diag(&[h.clone(), star], &q(0))
    }

    #[test]
    fn table_examples() {
        let e = ext(-1, 3);
        let gl3 = prasad_character(&GroupDescriptor::Gl { m: 3 }, &e).unwrap();
        assert_eq!(gl3, CharacterFormula::EtaDet { exponent: 2, ext: e });
        assert_eq!(gl3.reduced(), CharacterFormula::Trivial);
        let gl2 = prasad_character(&GroupDescriptor::Gl { m: 2 }, &e).unwrap();
        assert!(!gl2.is_trivial());
        assert_eq!(prasad_character(&GroupDescriptor::Sp { m: 2 }, &e).unwrap(), CharacterFormula::Trivial);
        assert_eq!(prasad_character(&GroupDescriptor::Unitary { m: 2, k: None }, &e).unwrap(), CharacterFormula::Trivial);
        assert_eq!(
            prasad_character(&GroupDescriptor::Unitary { m: 2, k: Some(-1) }, &e).unwrap(),
            CharacterFormula::Trivial
        );
        let so5 = prasad_character(&GroupDescriptor::So { m: 5, form: None }, &e).unwrap();
        assert_eq!(so5, CharacterFormula::EtaSn { exponent: 1, ext: e });
        let so4 = GroupDescriptor::So { m: 4, form: Some([1, 1, 1, 3].map(RationalJson::Int).to_vec()) };
        assert_eq!(prasad_character(&so4, &e).unwrap().exponent(), 2);
        let u = prasad_character(&GroupDescriptor::Unitary { m: 2, k: Some(3) }, &e).unwrap();
        assert_eq!(u, CharacterFormula::EtaWsn { exponent: 1, ext: e, k: 3 });
    }

    #[test]
    fn non_quasi_split_rejected() {
        let e = ext(-1, 3);
        // ⟨1, 1, 3, 3⟩ up to squares: the anisotropic quaternary form at 3.
        let aniso = GroupDescriptor::So { m: 4, form: Some([1, -2, 3, -6].map(RationalJson::Int).to_vec()) };
        let f = DiagForm::from_ints(Prime::new(3).unwrap(), &[1, -2, 3, -6]).unwrap();
        assert!(forms::is_anisotropic(&f).unwrap());
        assert!(matches!(prasad_character(&aniso, &e), Err(PrasadError::NotQuasiSplit(_))));
        assert!(matches!(
            prasad_character(&GroupDescriptor::Unitary { m: 2, k: Some(7) }, &e),
            Err(PrasadError::DegenerateExtension(7, 3))
        ));
    }

    #[test]
    fn opposition_examples() {
        let e = ext(-1, 3);
        assert_eq!(opposition_group(&GroupDescriptor::Gl { m: 3 }, &e).unwrap(), GroupDescriptor::Unitary { m: 3, k: None });
        assert_eq!(opposition_group(&GroupDescriptor::Sp { m: 2 }, &e).unwrap(), GroupDescriptor::Sp { m: 2 });
        let GroupDescriptor::Unitary { m: 2, k: Some(k) } = opposition_group(&GroupDescriptor::Unitary { m: 2, k: Some(3) }, &e).unwrap() else {
            panic!("unitary expected");
        };
        let p = e.base();
        assert_eq!(SquareClass::from_int(k, p).unwrap(), SquareClass::from_int(-3, p).unwrap());
        let all = [
            GroupDescriptor::Gl { m: 2 },
            GroupDescriptor::Unitary { m: 3, k: None },
            GroupDescriptor::Unitary { m: 2, k: Some(3) },
            GroupDescriptor::Unitary { m: 2, k: Some(-3) },
            GroupDescriptor::Sp { m: 1 },
            GroupDescriptor::So { m: 3, form: None },
        ];
        for y in all {
            let back = opposition_group(&opposition_group(&y, &e).unwrap(), &e).unwrap();
            assert_eq!(back, y.normalized(&e).unwrap());
        }
    }

    #[test]
    fn kernel_dim_matches_construction() {
        let p = Prime::new(3).unwrap();
        let candidates: Vec<i64> = vec![1, -1, 3, -3, 2, -2, 6, -6];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let r = rng.gen_range(0..=4usize);
            let entries: Vec<i64> = (0..r).map(|_| candidates[rng.gen_range(0..candidates.len())]).collect();
            let kernel = DiagForm::from_ints(p, &entries).unwrap();
            if !forms::is_anisotropic(&kernel).unwrap() {
                continue;
            }
            let h = rng.gen_range(0..=2usize);
            let mut all = entries.clone();
            for _ in 0..h {
                all.extend([1, -1]);
            }
            let f = DiagForm::from_ints(p, &all).unwrap();
            assert_eq!(anisotropic_kernel_dim(&f).unwrap(), r, "{entries:?} + {h}H");
        }
    }

    #[test]
    fn identity_and_torus() {
        let p = Prime::new(5).unwrap();
        let w2 = qm(&[&[0, 1], &[1, 0]]);
        assert!(spinor_norm(&QMatrix::identity(2, &q(0)), &w2, p).unwrap().is_one());
        for t in [2i64, 3, 5, 10, -1] {
            let g = QMatrix::diagonal(&[q(t), BigRational::new(1.into(), t.into())], &q(0));
            assert_eq!(spinor_norm(&g, &w2, p).unwrap(), SquareClass::from_int(t, p).unwrap());
        }
    }

    #[test]
    fn non_isometries_rejected() {
        let p = Prime::new(3).unwrap();
        let gram = qm(&[&[1, 0], &[0, 1]]);
        assert_eq!(spinor_norm(&qm(&[&[2, 0], &[0, 1]]), &gram, p), Err(PrasadError::NotSpecial));
        assert_eq!(spinor_norm(&qm(&[&[1, 1], &[0, 1]]), &gram, p), Err(PrasadError::NotIsometry));
    }

    #[test]
    fn siegel_spinor_norm_is_det() {
        let p = Prime::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(1..=2usize);
            let h = loop {
                let m = QMatrix::from_fn(n, n, &q(0), |_, _| q(rng.gen_range(-4..=4)));
                if !m.det().is_zero() {
                    break m;
                }
            };
            let gram = QMatrix::antidiagonal(2 * n, &q(0));
            let sn = spinor_norm(&siegel(&h), &gram, p).unwrap();
            assert_eq!(sn, SquareClass::reduce(&h.det(), p).unwrap());
        }
    }

    #[test]
    fn decomposition_reassembles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let grams = [qm(&[&[1, 0, 0], &[0, 2, 0], &[0, 0, -3]]), QMatrix::antidiagonal(4, &q(0)), qm(&[&[0, 1], &[1, 0]])];
        for gram in &grams {
            for _ in 0..20 {
                let g = random_so(gram, &mut rng);
                let vs = reflection_decomposition(&g, gram).unwrap();
                assert_eq!(vs.len() % 2, 0);
                let back = vs.iter().fold(QMatrix::identity(gram.rows(), &q(0)), |a, v| a.mul(&reflection(gram, v)));
                assert_eq!(back, g);
            }
        }
    }

    #[test]
    fn wsn_examples() {
        let field = BiquadField::quadratic(3).unwrap();
        let id = BiquadMatrix::identity(2, &field.zero());
        assert!(wsn(&id).unwrap().is_one());
        let minus = BiquadMatrix::diagonal(&[field.from_int(-1)], &field.zero());
        assert_eq!(wsn(&minus).unwrap(), field.sqrt_a());
        let bad = BiquadMatrix::diagonal(&[field.from_int(2), field.one()], &field.zero());
        assert_eq!(wsn(&bad), Err(PrasadError::NotUnitary));
    }

    fn random_unitary<R: Rng>(field: BiquadField, n: usize, rng: &mut R) -> BiquadMatrix {
        let w = BiquadMatrix::antidiagonal(n, &field.zero());
        loop {
            let r = numfield::random_matrix(field, n, rng, 2);
            let s = r.sub(&matrix_apply(&r.transpose(), Involution::Sigma));
            let a = w.mul(&s);
            let id = BiquadMatrix::identity(n, &field.zero());
            if let Some(inv) = id.add(&a).inverse() {
                return id.sub(&a).mul(&inv);
            }
        }
    }

    #[test]
    fn wsn_inverts_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in [3i64, -1, 2] {
            let field = BiquadField::quadratic(k).unwrap();
            for _ in 0..30 {
                let n = rng.gen_range(1..=3usize);
                let g = random_unitary(field, n, &mut rng);
                let z = wsn(&g).unwrap();
                assert_eq!(z.div(&z.sigma()).unwrap(), g.det());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn spinor_norm_is_multiplicative(seed in any::<u64>(), which in 0usize..3) {
            let p = Prime::new(3).unwrap();
            let grams = [qm(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 3]]), QMatrix::antidiagonal(4, &q(0)), qm(&[&[1, 0], &[0, -2]])];
            let gram = &grams[which];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_so(gram, &mut rng);
            let h = random_so(gram, &mut rng);
            let sg = spinor_norm(&g, gram, p).unwrap();
            let sh = spinor_norm(&h, gram, p).unwrap();
            prop_assert_eq!(spinor_norm(&g.mul(&h), gram, p).unwrap(), sg.mul(&sh).unwrap());
        }

        #[test]
        fn characters_are_quadratic(seed in any::<u64>(), m in 1usize..4) {
            let e = ext(-1, 3);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gl = prasad_character(&GroupDescriptor::Gl { m }, &e).unwrap();
            let g = loop {
                let g = QMatrix::from_fn(m, m, &q(0), |_, _| q(rng.gen_range(-5..=5)));
                if !g.det().is_zero() { break g; }
            };
            let v = gl.evaluate(&GroupElement::Gl(g.clone())).unwrap();
            prop_assert_eq!(v * v, 1);
            prop_assert_eq!(gl.evaluate(&GroupElement::Gl(g.mul(&g))).unwrap(), 1);

            let so = GroupDescriptor::So { m: 3, form: None };
            let chi = prasad_character(&so, &e).unwrap();
            let gram = QMatrix::diagonal(&so.so_entries().unwrap(), &q(0));
            let x = random_so(&gram, &mut rng);
            let v = chi.evaluate(&GroupElement::So { g: x.clone(), gram: gram.clone() }).unwrap();
            prop_assert_eq!(v * v, 1);
            prop_assert_eq!(chi.evaluate(&GroupElement::So { g: x.mul(&x), gram }).unwrap(), 1);

            let u = prasad_character(&GroupDescriptor::Unitary { m: 2, k: Some(3) }, &e).unwrap();
            let field = BiquadField::quadratic(3).unwrap();
            let y = random_unitary(field, 2, &mut rng);
            let v = u.evaluate(&GroupElement::Unitary(y.clone())).unwrap();
            prop_assert_eq!(v * v, 1);
            prop_assert_eq!(u.evaluate(&GroupElement::Unitary(y.mul(&y))).unwrap(), 1);
        }
    }
}
