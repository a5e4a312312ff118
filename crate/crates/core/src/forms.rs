//! ε-hermitian forms over ℚ_p and their complete invariants.
//!
//! Orthogonal forms are classified by rank, determinant class and Hasse
//! invariant Π_{i<j} (a_i, a_j). Hermitian forms for a quadratic extension
//! K/k are classified by rank and the class of the determinant modulo
//! N(K/k), recorded as a single bit. Symplectic forms have a unique class in
//! every even rank.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::QMatrix;
use crate::localfield::{hilbert, LocalFieldError, Prime, QuadExtension, SquareClass};
use crate::numfield::{BiquadElement, BiquadMatrix, Involution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("Gram matrix is singular")]
    Singular,
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("Gram matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("symplectic forms carry no invariant beyond rank")]
    SymplecticInvariants,
    #[error("symplectic rank must be even, got {0}")]
    OddSymplecticRank(usize),
    #[error("rank must be positive")]
    ZeroRank,
    #[error("forms of different kinds cannot be compared ({0:?} against {1:?})")]
    MixedCases(Case, Case),
    #[error("forms live over different local data")]
    MixedLocalData,
    #[error("a unitary form needs the quadratic extension K/k")]
    MissingExtension,
    #[error("orthogonal orbit counts per class need a discriminant")]
    MissingDiscriminant,
    #[error("diagonal entries must be nonzero")]
    ZeroEntry,
    #[error("target determinant is not allowed: {0}")]
    BadDeterminant(String),
    #[error(transparent)]
    Local(#[from] LocalFieldError),
}

pub type Result<T> = std::result::Result<T, FormError>;

/// The three kinds of classical forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Symplectic,
    Orthogonal,
    Unitary,
}

impl Case {
    /// The sign ε with ᵗy^τ = ε y.
    pub fn epsilon(self) -> i64 {
        match self {
            Case::Symplectic => -1,
            _ => 1,
        }
    }
}

/// A diagonal form over ℚ_p.
///
/// Unitary entries are rationals (diagonal hermitian entries lie in the base
/// field); symplectic forms store only the rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagForm {
    pub case: Case,
    pub prime: Prime,
    pub ext: Option<QuadExtension>,
    pub rank: usize,
    pub entries: Vec<BigRational>,
}

impl DiagForm {
    pub fn orthogonal(prime: Prime, entries: Vec<BigRational>) -> Result<Self> {
        if entries.iter().any(|e| e.is_zero()) {
            return Err(FormError::ZeroEntry);
        }
        Ok(DiagForm { case: Case::Orthogonal, prime, ext: None, rank: entries.len(), entries })
    }

    pub fn unitary(ext: QuadExtension, entries: Vec<BigRational>) -> Result<Self> {
        if entries.iter().any(|e| e.is_zero()) {
            return Err(FormError::ZeroEntry);
        }
        Ok(DiagForm { case: Case::Unitary, prime: ext.base(), ext: Some(ext), rank: entries.len(), entries })
    }

    pub fn symplectic(prime: Prime, rank: usize) -> Result<Self> {
        if rank % 2 == 1 {
            return Err(FormError::OddSymplecticRank(rank));
        }
        Ok(DiagForm { case: Case::Symplectic, prime, ext: None, rank, entries: Vec::new() })
    }

    pub fn from_ints(prime: Prime, entries: &[i64]) -> Result<Self> {
        Self::orthogonal(prime, entries.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    pub fn determinant(&self) -> BigRational {
        self.entries.iter().fold(BigRational::one(), |acc, x| acc * x)
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(&self, other: &DiagForm) -> Result<DiagForm> {
        if self.case != other.case {
            return Err(FormError::MixedCases(self.case, other.case));
        }
        if self.prime != other.prime || self.ext != other.ext {
            return Err(FormError::MixedLocalData);
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Ok(DiagForm { rank: self.rank + other.rank, entries, ..self.clone() })
    }
}

/// Complete invariants of a form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum FormInvariants {
    Symplectic { rank: usize },
    Orthogonal { rank: usize, disc: SquareClass, hasse: i8 },
    Unitary { rank: usize, det_norm_bit: u8 },
}

/// A congruence diagonalization D = ᵗP G P.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonalization {
    pub diagonal: Vec<BigRational>,
    pub change: QMatrix,
}

/// Congruence diagonalization of a symmetric rational matrix by symmetric
/// elimination. A vanishing pivot is repaired by swapping in a later nonzero
/// diagonal entry or, failing that, by adding a later basis vector whose
/// off-diagonal pairing is nonzero.
pub fn diagonalize(gram: &QMatrix) -> Result<Diagonalization> {
    if !gram.is_square() {
        return Err(FormError::NotSquare(gram.rows(), gram.cols()));
    }
    if gram.transpose() != *gram {
        return Err(FormError::NotSymmetric);
    }
    let n = gram.rows();
    let zero = BigRational::zero();
    let mut a = gram.clone();
    let mut p = QMatrix::identity(n, &zero);
    // a ← ᵗE a E and p ← p E for elementary column operations E
    let add_col = |a: &mut QMatrix, p: &mut QMatrix, dst: usize, src: usize, f: &BigRational| {
        for r in 0..n {
            let v = a.get(r, dst) + f * a.get(r, src);
            a.set(r, dst, v);
            let v = p.get(r, dst) + f * p.get(r, src);
            p.set(r, dst, v);
        }
        for c in 0..n {
            let v = a.get(dst, c) + f * a.get(src, c);
            a.set(dst, c, v);
        }
    };
    let swap = |a: &mut QMatrix, p: &mut QMatrix, i: usize, j: usize| {
        for r in 0..n {
            let (x, y) = (a.get(r, i).clone(), a.get(r, j).clone());
            a.set(r, i, y);
            a.set(r, j, x);
            let (x, y) = (p.get(r, i).clone(), p.get(r, j).clone());
            p.set(r, i, y);
            p.set(r, j, x);
        }
        for c in 0..n {
            let (x, y) = (a.get(i, c).clone(), a.get(j, c).clone());
            a.set(i, c, y);
            a.set(j, c, x);
        }
    };
    for i in 0..n {
        if a.get(i, i).is_zero() {
            if let Some(j) = (i + 1..n).find(|&j| !a.get(j, j).is_zero()) {
                swap(&mut a, &mut p, i, j);
            } else if let Some(j) = (i + 1..n).find(|&j| !a.get(i, j).is_zero()) {
                add_col(&mut a, &mut p, i, j, &BigRational::one());
            } else {
                return Err(FormError::Singular);
            }
        }
        let piv = a.get(i, i).clone();
        for j in i + 1..n {
            if a.get(i, j).is_zero() {
                continue;
            }
            let f = -(a.get(i, j) / &piv);
            add_col(&mut a, &mut p, j, i, &f);
        }
    }
    let diagonal: Vec<BigRational> = (0..n).map(|i| a.get(i, i).clone()).collect();
    Ok(Diagonalization { diagonal, change: p })
}

/// Product of Hilbert symbols over pairs i < j.
pub fn hasse_of(entries: &[SquareClass]) -> Result<i8> {
    let mut h = 1i8;
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            h *= hilbert(&entries[i], &entries[j])?;
        }
    }
    Ok(h)
}

/// Complete invariants of a diagonal form.
pub fn invariants(f: &DiagForm) -> Result<FormInvariants> {
    match f.case {
        Case::Symplectic => Err(FormError::SymplecticInvariants),
        Case::Orthogonal => {
            let classes: Vec<SquareClass> =
                f.entries.iter().map(|e| SquareClass::reduce(e, f.prime)).collect::<std::result::Result<_, _>>()?;
            let mut disc = SquareClass::one(f.prime);
            for c in &classes {
                disc = disc.mul(c)?;
            }
            Ok(FormInvariants::Orthogonal { rank: f.rank, disc, hasse: hasse_of(&classes)? })
        }
        Case::Unitary => {
            let ext = f.ext.ok_or(FormError::MissingExtension)?;
            let eta = ext.eta_rat(&f.determinant())?;
            Ok(FormInvariants::Unitary { rank: f.rank, det_norm_bit: u8::from(eta == -1) })
        }
    }
}

/// Invariants of a symmetric Gram matrix at p.
pub fn gram_invariants(gram: &QMatrix, prime: Prime) -> Result<FormInvariants> {
    let d = diagonalize(gram)?;
    invariants(&DiagForm::orthogonal(prime, d.diagonal)?)
}

fn case_invariants(f: &DiagForm) -> Result<FormInvariants> {
    match f.case {
        Case::Symplectic => Ok(FormInvariants::Symplectic { rank: f.rank }),
        _ => invariants(f),
    }
}

/// Whether two forms are equivalent.
pub fn equivalent(f: &DiagForm, g: &DiagForm) -> Result<bool> {
    if f.case != g.case {
        return Err(FormError::MixedCases(f.case, g.case));
    }
    if f.prime != g.prime || f.ext != g.ext {
        return Err(FormError::MixedLocalData);
    }
    Ok(case_invariants(f)? == case_invariants(g)?)
}

/// Number of equivalence classes of rank `rank` forms, per determinant class
/// in the orthogonal case.
pub fn orbit_count(case: Case, rank: usize, disc: Option<&SquareClass>) -> Result<usize> {
    if rank == 0 {
        return Err(FormError::ZeroRank);
    }
    match case {
        Case::Symplectic => {
            if rank % 2 == 1 {
                Err(FormError::OddSymplecticRank(rank))
            } else {
                Ok(1)
            }
        }
        Case::Unitary => Ok(2),
        Case::Orthogonal => {
            let d = disc.ok_or(FormError::MissingDiscriminant)?;
            Ok(orthogonal_count_for_disc(rank, d))
        }
    }
}

fn orthogonal_count_for_disc(rank: usize, disc: &SquareClass) -> usize {
    match rank {
        0 | 1 => 1,
        2 if *disc == SquareClass::minus_one(disc.prime()) => 1,
        _ => 2,
    }
}

/// Total number of orthogonal classes of a given rank over ℚ_p.
pub fn orbit_count_total(rank: usize, prime: Prime) -> usize {
    SquareClass::all(prime).iter().map(|d| orthogonal_count_for_disc(rank, d)).sum()
}

/// All (disc, hasse) pairs realized by diagonal forms of the given rank,
/// found by enumerating tuples of square classes.
pub fn realizable_invariants(rank: usize, prime: Prime) -> BTreeSet<(SquareClass, i8)> {
    let classes = SquareClass::all(prime);
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; rank];
    loop {
        let entries: Vec<SquareClass> = idx.iter().map(|&i| classes[i]).collect();
        let mut disc = SquareClass::one(prime);
        for c in &entries {
            disc = disc.mul(c).unwrap();
        }
        out.insert((disc, hasse_of(&entries).unwrap()));
        // nondecreasing index tuples suffice since the invariants are symmetric
        let mut pos = rank;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] + 1 < classes.len() {
                idx[pos] += 1;
                for q in pos + 1..rank {
                    idx[q] = idx[pos];
                }
                break;
            }
        }
    }
}

/// Whether a diagonal orthogonal form is anisotropic over ℚ_p.
pub fn is_anisotropic(f: &DiagForm) -> Result<bool> {
    match f.case {
        Case::Symplectic => Ok(f.rank == 0),
        Case::Orthogonal => orthogonal_anisotropic(f),
        Case::Unitary => {
            let ext = f.ext.ok_or(FormError::MissingExtension)?;
            match f.rank {
                0 | 1 => Ok(true),
                2 => {
                    let minus_det = -f.determinant();
                    Ok(ext.eta_rat(&minus_det)? == -1)
                }
                _ => Ok(false),
            }
        }
    }
}

fn orthogonal_anisotropic(f: &DiagForm) -> Result<bool> {
    let p = f.prime;
    let classes: Vec<SquareClass> =
        f.entries.iter().map(|e| SquareClass::reduce(e, p)).collect::<std::result::Result<_, _>>()?;
    let mut d = SquareClass::one(p);
    for c in &classes {
        d = d.mul(c)?;
    }
    let eps = hasse_of(&classes)?;
    let m1 = SquareClass::minus_one(p);
    Ok(match f.rank {
        0 | 1 => true,
        2 => d != m1,
        3 => hilbert(&m1, &d.neg())? != eps,
        4 => d.is_one() && eps != hilbert(&m1, &m1)?,
        _ => false,
    })
}

/// The closed Hasse invariant of ȷ ⊕ n hyperbolic planes, for an orthogonal
/// kernel ȷ: (det ȷ, −1)^n (−1, −1)^{n(n−1)/2} Hasse(ȷ).
pub fn split_extension_hasse(kernel: &DiagForm, n: usize) -> Result<i8> {
    let p = kernel.prime;
    let m1 = SquareClass::minus_one(p);
    let det = SquareClass::reduce(&kernel.determinant(), p)?;
    let h = match invariants(kernel)? {
        FormInvariants::Orthogonal { hasse, .. } => hasse,
        _ => unreachable!(),
    };
    let a = hilbert(&det, &m1)?;
    let b = hilbert(&m1, &m1)?;
    let pow = |s: i8, e: usize| if e % 2 == 0 { 1 } else { s };
    Ok(pow(a, n) * pow(b, n * n.saturating_sub(1) / 2) * h)
}

/// An isometry of the Gram matrix with prescribed determinant ±1, built as
/// P · diag(a, I) · P⁻¹ from the diagonalizing change of basis. It squares to
/// the identity.
pub fn det_image_witness(gram: &QMatrix, a: &BigRational) -> Result<QMatrix> {
    if !(a.is_one() || *a == -BigRational::one()) {
        return Err(FormError::BadDeterminant(a.to_string()));
    }
    let d = diagonalize(gram)?;
    let n = gram.rows();
    if n == 0 {
        return Err(FormError::ZeroRank);
    }
    let mut diag = QMatrix::identity(n, &BigRational::zero());
    diag.set(0, 0, a.clone());
    let pinv = d.change.inverse().ok_or(FormError::Singular)?;
    Ok(d.change.mul(&diag).mul(&pinv))
}

/// Unitary analogue for a diagonal hermitian form: diag(a, I) with a·τ(a) = 1.
pub fn det_image_witness_unitary(rank: usize, a: &BiquadElement) -> Result<BiquadMatrix> {
    if rank == 0 {
        return Err(FormError::ZeroRank);
    }
    if !a.relative_norm(Involution::Tau).is_one() {
        return Err(FormError::BadDeterminant(a.to_string()));
    }
    let field = a.field();
    let mut entries = vec![field.one(); rank];
    entries[0] = a.clone();
    Ok(BiquadMatrix::diagonal(&entries, &field.zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localfield::{rat, rat_frac};
    use crate::numfield::{tau_transpose, BiquadField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pr(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn q(rows: &[&[i64]]) -> QMatrix {
        QMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect(), &rat(0))
    }

    #[test]
    fn hyperbolic_plane() {
        let g = q(&[&[0, 1], &[1, 0]]);
        let d = diagonalize(&g).unwrap();
        assert_eq!(d.diagonal, vec![rat(2), rat_frac(-1, 2)]);
        let back = d.change.transpose().mul(&g).mul(&d.change);
        assert_eq!(back, QMatrix::diagonal(&d.diagonal, &rat(0)));
        for p in [3, 5, 7, 11] {
            let inv = gram_invariants(&g, pr(p)).unwrap();
            assert_eq!(
                inv,
                FormInvariants::Orthogonal { rank: 2, disc: SquareClass::minus_one(pr(p)), hasse: 1 }
            );
        }
    }

    #[test]
    fn diagonal_is_fixed() {
        let g = q(&[&[3, 0, 0], &[0, -2, 0], &[0, 0, 5]]);
        let d = diagonalize(&g).unwrap();
        assert_eq!(d.diagonal, vec![rat(3), rat(-2), rat(5)]);
        assert!(d.change.is_identity());
    }

    #[test]
    fn simple_invariants() {
        let p = pr(5);
        let ones = DiagForm::from_ints(p, &[1, 1, 1]).unwrap();
        assert_eq!(invariants(&ones).unwrap(), FormInvariants::Orthogonal { rank: 3, disc: SquareClass::one(p), hasse: 1 });
        let pair = DiagForm::from_ints(p, &[7, -7]).unwrap();
        match invariants(&pair).unwrap() {
            FormInvariants::Orthogonal { disc, hasse, .. } => {
                assert_eq!(disc, SquareClass::minus_one(p));
                assert_eq!(hasse, 1);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn same_disc_different_hasse() {
        // diag(1,1,−1) against diag(a, u, −a u) with u not a norm from ℚ_3(√a)
        let p = pr(3);
        let a = -1i64;
        let u = 3i64;
        assert_eq!(hilbert(&SquareClass::from_int(u, p).unwrap(), &SquareClass::from_int(a, p).unwrap()).unwrap(), -1);
        let f = DiagForm::from_ints(p, &[1, 1, -1]).unwrap();
        let g = DiagForm::from_ints(p, &[a, u, -a * u]).unwrap();
        assert!(!equivalent(&f, &g).unwrap());
        assert!(equivalent(&f, &f).unwrap());
    }

    #[test]
    fn orbit_count_rules() {
        let p = pr(3);
        assert_eq!(orbit_count(Case::Symplectic, 4, None).unwrap(), 1);
        assert!(orbit_count(Case::Symplectic, 3, None).is_err());
        assert_eq!(orbit_count(Case::Unitary, 3, None).unwrap(), 2);
        let m1 = SquareClass::minus_one(p);
        assert_eq!(orbit_count(Case::Orthogonal, 2, Some(&m1)).unwrap(), 1);
        assert_eq!(orbit_count(Case::Orthogonal, 2, Some(&SquareClass::one(p))).unwrap(), 2);
        assert_eq!(orbit_count(Case::Orthogonal, 3, Some(&m1)).unwrap(), 2);
        assert_eq!(orbit_count(Case::Orthogonal, 1, Some(&m1)).unwrap(), 1);
        assert_eq!(orbit_count(Case::Orthogonal, 3, None), Err(FormError::MissingDiscriminant));
    }

    #[test]
    fn orbit_count_matches_enumeration() {
        for (p, max_rank) in [(3u64, 4usize), (5, 4), (2, 3)] {
            let p = pr(p);
            for rank in 1..=max_rank {
                let seen = realizable_invariants(rank, p);
                for d in SquareClass::all(p) {
                    let count = seen.iter().filter(|(disc, _)| *disc == d).count();
                    assert_eq!(count, orbit_count(Case::Orthogonal, rank, Some(&d)).unwrap(), "p={p} rank={rank} d={d}");
                }
                assert_eq!(seen.len(), orbit_count_total(rank, p));
            }
        }
    }

    #[test]
    fn split_hasse_closed_form() {
        for p in [2u64, 3, 5] {
            let p = pr(p);
            for kernel in [vec![], vec![1], vec![1, 1], vec![1, 1, -3], vec![2, 3, 5, 7]] {
                let k = DiagForm::from_ints(p, &kernel).unwrap();
                for n in 0..4 {
                    let n0 = kernel.len();
                    let size = n0 + 2 * n;
                    let mut g = QMatrix::zeros(size, size, &rat(0));
                    for i in 0..n {
                        g.set(i, size - 1 - i, rat(1));
                        g.set(size - 1 - i, i, rat(1));
                    }
                    for (i, &e) in kernel.iter().enumerate() {
                        g.set(n + i, n + i, rat(e));
                    }
                    if size == 0 {
                        continue;
                    }
                    let hasse = match gram_invariants(&g, p).unwrap() {
                        FormInvariants::Orthogonal { hasse, .. } => hasse,
                        _ => unreachable!(),
                    };
                    assert_eq!(hasse, split_extension_hasse(&k, n).unwrap(), "p={p} kernel={kernel:?} n={n}");
                }
            }
        }
    }

    #[test]
    fn anisotropy() {
        let p = pr(3);
        for (entries, expected) in [
            (vec![1], true),
            (vec![1, 1], true),
            (vec![1, -1], false),
            (vec![1, 1, -3], true),
            (vec![1, 1, -3, -3], true),
            (vec![1, 1, 1, 1], false),
            (vec![1, 1, 1], false),
            (vec![1, 1, -3, -3, 1], false),
        ] {
            let f = DiagForm::from_ints(p, &entries).unwrap();
            assert_eq!(orthogonal_anisotropic(&f).unwrap(), expected, "{entries:?}");
        }
    }

    #[test]
    fn witness_is_involutive_isometry() {
        let g = q(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 3]]);
        let h = det_image_witness(&g, &rat(-1)).unwrap();
        assert_eq!(h.transpose().mul(&g).mul(&h), g);
        assert_eq!(h.det(), rat(-1));
        assert!(h.mul(&h).is_identity());
        assert!(det_image_witness(&g, &rat(1)).unwrap().is_identity());
        assert!(det_image_witness(&g, &rat(2)).is_err());
    }

    #[test]
    fn unitary_witness() {
        let f = BiquadField::new(-1, 3).unwrap();
        let c = f.from_int(1).add(&f.sqrt_b());
        let a = c.div(&c.tau()).unwrap();
        let h = det_image_witness_unitary(1, &a).unwrap();
        assert_eq!(h.get(0, 0), &a);
        let j = BiquadMatrix::diagonal(&[f.from_int(1), f.from_int(2)], &f.zero());
        let h2 = det_image_witness_unitary(2, &a).unwrap();
        assert_eq!(tau_transpose(&h2).mul(&j).mul(&h2), j);
    }

    #[test]
    fn congruence_invariance_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let n = rng.gen_range(2..=4);
            let mut g = QMatrix::zeros(n, n, &rat(0));
            for i in 0..n {
                for j in i..n {
                    let v = rat(rng.gen_range(-9..=9));
                    g.set(i, j, v.clone());
                    g.set(j, i, v);
                }
            }
            if g.det().is_zero() {
                continue;
            }
            let mut t = QMatrix::identity(n, &rat(0));
            for i in 0..n {
                for j in i + 1..n {
                    t.set(i, j, rat(rng.gen_range(-3..=3)));
                }
            }
            let g2 = t.transpose().mul(&g).mul(&t);
            for p in [2u64, 3, 5] {
                assert_eq!(gram_invariants(&g, pr(p)).unwrap(), gram_invariants(&g2, pr(p)).unwrap());
            }
        }
    }
}
