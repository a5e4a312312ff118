//! The graph of involutions for classical pairs, on restricted roots in
//! ℝ^k, and the cones D_{M,x}(c).
//!
//! θ acts by (θλ)_i = s_i λ_{ρ(i)}. Positive roots are e_i − e_j, e_i + e_j
//! (i < j) and ℓe_i, where ℓ = 2 when r = 0 in the split even orthogonal
//! case and ℓ = 1 otherwise. Descent reaches vertices with no simple α
//! satisfying −α ≠ θα < 0; such vertices are reported as terminal, not as
//! minimal.

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symspace::ClassicalPair;
use crate::weyl::{self, Composition, SignedInvolution, SignedPerm, WeylError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvGraphError {
    #[error("the zero vector is not a root")]
    ZeroRoot,
    #[error("vector length {got} does not match k = {expected}")]
    Length { expected: usize, got: usize },
    #[error("descent exceeded {0} steps")]
    NoTermination(usize),
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

pub type Result<T> = std::result::Result<T, InvGraphError>;

/// θ on ℝ^k attached to a signed involution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaAction {
    pub rho: Vec<usize>,
    pub signs: Vec<i64>,
}

impl ThetaAction {
    pub fn from_involution(w: &SignedPerm) -> Self {
        ThetaAction { rho: w.rho().to_vec(), signs: (0..w.k()).map(|i| w.sign(i)).collect() }
    }

    /// −id.
    pub fn minus_identity(k: usize) -> Self {
        ThetaAction { rho: (0..k).collect(), signs: vec![-1; k] }
    }

    pub fn k(&self) -> usize {
        self.rho.len()
    }

    pub fn apply<T>(&self, v: &[T]) -> Vec<T>
    where
        T: Clone + std::ops::Neg<Output = T>,
    {
        (0..self.k()).map(|i| if self.signs[i] < 0 { -v[self.rho[i]].clone() } else { v[self.rho[i]].clone() }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootSign {
    Positive,
    Negative,
}

/// Sign of a root: that of its first nonzero coordinate.
pub fn root_sign(v: &[i64]) -> Option<RootSign> {
    v.iter().find(|x| **x != 0).map(|x| if *x > 0 { RootSign::Positive } else { RootSign::Negative })
}

/// The restricted roots for k blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictedRoots {
    pub k: usize,
    /// ℓ in the last simple root ℓe_k.
    pub last_multiplier: i64,
}

impl RestrictedRoots {
    pub fn for_pair(pair: &ClassicalPair, comp: &Composition) -> Self {
        let long = weyl::parity_rule_applies(pair, comp);
        RestrictedRoots { k: comp.k(), last_multiplier: if long { 2 } else { 1 } }
    }

    fn unit(&self, i: usize, x: i64) -> Vec<i64> {
        let mut v = vec![0; self.k];
        v[i] = x;
        v
    }

    /// α₁, …, α_k.
    pub fn simple(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(self.k);
        for i in 0..self.k.saturating_sub(1) {
            let mut v = self.unit(i, 1);
            v[i + 1] = -1;
            out.push(v);
        }
        if self.k > 0 {
            out.push(self.unit(self.k - 1, self.last_multiplier));
        }
        out
    }

    /// The k² positive roots.
    pub fn positive(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        for i in 0..self.k {
            for j in i + 1..self.k {
                let mut a = self.unit(i, 1);
                a[j] = -1;
                out.push(a);
                let mut b = self.unit(i, 1);
                b[j] = 1;
                out.push(b);
            }
            out.push(self.unit(i, self.last_multiplier));
        }
        out
    }
}

/// θα and its sign.
pub fn theta_on_root(theta: &ThetaAction, alpha: &[i64]) -> Result<(Vec<i64>, RootSign)> {
    if alpha.len() != theta.k() {
        return Err(InvGraphError::Length { expected: theta.k(), got: alpha.len() });
    }
    let image = theta.apply(alpha);
    let sign = root_sign(&image).ok_or(InvGraphError::ZeroRoot)?;
    Ok((image, sign))
}

/// Whether α gives an edge: θα < 0 and θα ≠ −α.
pub fn is_edge(theta: &ThetaAction, alpha: &[i64]) -> Result<bool> {
    let (image, sign) = theta_on_root(theta, alpha)?;
    let neg: Vec<i64> = alpha.iter().map(|x| -x).collect();
    Ok(sign == RootSign::Negative && image != neg)
}

/// A vertex (M, x) of the graph, x recorded through its involution class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub comp: Composition,
    pub w: SignedInvolution,
}

impl Vertex {
    pub fn theta(&self) -> ThetaAction {
        ThetaAction::from_involution(&self.w)
    }
}

/// The elementary symmetry of the i-th simple root (0-based) as a signed
/// permutation: a swap for i < k − 1, a sign change for the last root.
pub fn elementary_symmetry(k: usize, i: usize) -> SignedPerm {
    if i + 1 < k {
        SignedPerm::adjacent_swap(k, i)
    } else {
        SignedPerm::sign_change(k, i)
    }
}

/// The neighbour across the i-th simple root.
pub fn cross_edge(v: &Vertex, i: usize) -> Vertex {
    let k = v.comp.k();
    let s = elementary_symmetry(k, i);
    let mut comp = v.comp.clone();
    if i + 1 < k {
        comp.parts.swap(i, i + 1);
    }
    Vertex { comp, w: v.w.conjugate(&s) }
}

/// Edges available at a vertex, as simple-root indices (0-based).
pub fn edges(v: &Vertex, roots: &RestrictedRoots) -> Result<Vec<usize>> {
    let theta = v.theta();
    let mut out = Vec::new();
    for (i, a) in roots.simple().iter().enumerate() {
        if is_edge(&theta, a)? {
            out.push(i);
        }
    }
    Ok(out)
}

/// Number of positive roots β with θβ < 0.
pub fn negative_count(v: &Vertex, roots: &RestrictedRoots) -> Result<usize> {
    let theta = v.theta();
    let mut n = 0;
    for b in roots.positive() {
        if theta_on_root(&theta, &b)?.1 == RootSign::Negative {
            n += 1;
        }
    }
    Ok(n)
}

/// One step of a descent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentStep {
    pub step: usize,
    /// 1-based index of the simple root.
    pub alpha_index: usize,
    pub alpha: Vec<i64>,
    pub new_comp: Composition,
    pub new_w: SignedInvolution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descent {
    pub path: Vec<DescentStep>,
    pub terminal: Vertex,
    /// Terminal vertices are not checked for minimality in the stronger sense.
    pub minimality_verified: bool,
}

/// Repeatedly crosses the least available edge until none is left.
pub fn descend(pair: &ClassicalPair, v: &Vertex) -> Result<Descent> {
    v.comp.validate(pair)?;
    if !v.w.compatible(&v.comp.parts) {
        return Err(WeylError::Incompatible.into());
    }
    let roots = RestrictedRoots::for_pair(pair, &v.comp);
    let bound = roots.positive().len();
    let simple = roots.simple();
    let mut cur = v.clone();
    let mut path = Vec::new();
    loop {
        let Some(&i) = edges(&cur, &roots)?.first() else { break };
        if path.len() == bound {
            return Err(InvGraphError::NoTermination(bound));
        }
        cur = cross_edge(&cur, i);
        path.push(DescentStep {
            step: path.len() + 1,
            alpha_index: i + 1,
            alpha: simple[i].clone(),
            new_comp: cur.comp.clone(),
            new_w: cur.w.clone(),
        });
    }
    Ok(Descent { path, terminal: cur, minimality_verified: false })
}

/// ⟨λ, α^∨⟩ = 2(λ·α)/(α·α).
pub fn coroot_pairing(lambda: &[Rational64], alpha: &[i64]) -> Rational64 {
    let dot: Rational64 = lambda.iter().zip(alpha).map(|(l, a)| *l * Rational64::from_integer(*a)).sum();
    let norm: i64 = alpha.iter().map(|a| a * a).sum();
    dot * Rational64::new(2, norm)
}

/// λ ∈ D(c): θλ = −λ and ⟨λ, α^∨⟩ > c for every positive α with θα < 0.
pub fn cone_contains(theta: &ThetaAction, roots: &RestrictedRoots, lambda: &[Rational64], c: Rational64) -> Result<bool> {
    if lambda.len() != theta.k() {
        return Err(InvGraphError::Length { expected: theta.k(), got: lambda.len() });
    }
    let image = theta.apply(lambda);
    if image.iter().zip(lambda).any(|(a, b)| !(*a + *b).is_zero()) {
        return Ok(false);
    }
    for alpha in roots.positive() {
        if theta_on_root(theta, &alpha)?.1 == RootSign::Negative && coroot_pairing(lambda, &alpha) <= c {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Both sides of D_{M,x}(c) = s_α⁻¹ D_{M₁,x₁}(c) ∩ {⟨λ, α^∨⟩ > c} for the
/// edge across the i-th simple root.
pub fn cone_recursion_sides(
    v: &Vertex,
    roots: &RestrictedRoots,
    i: usize,
    lambda: &[Rational64],
    c: Rational64,
) -> Result<(bool, bool)> {
    let lhs = cone_contains(&v.theta(), roots, lambda, c)?;
    let next = cross_edge(v, i);
    let s = elementary_symmetry(v.comp.k(), i);
    let moved = s.act(lambda);
    let alpha = &roots.simple()[i];
    let rhs = cone_contains(&next.theta(), roots, &moved, c)? && coroot_pairing(lambda, alpha) > c;
    Ok((lhs, rhs))
}

/// Projection μ ↦ (μ − θμ)/2 onto the anti-invariant subspace.
pub fn anti_invariant_part(theta: &ThetaAction, mu: &[Rational64]) -> Vec<Rational64> {
    let t = theta.apply(mu);
    mu.iter().zip(t).map(|(a, b)| (*a - b) / Rational64::from_integer(2)).collect()
}

/// All vertices (comp, w) with comp from [`Composition::enumerate`].
pub fn all_vertices(pair: &ClassicalPair, max_k: usize, max_part: usize) -> Vec<Vertex> {
    let mut out = Vec::new();
    for comp in Composition::enumerate(pair, max_k, max_part) {
        for w in weyl::enumerate_involutions(&comp, false) {
            out.push(Vertex { comp: comp.clone(), w });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::Case;
    use proptest::prelude::*;

    fn inv(rho: Vec<usize>, c: Vec<bool>) -> SignedInvolution {
        SignedInvolution::new(SignedPerm::new(rho, c).unwrap()).unwrap()
    }

    fn q(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    #[test]
    fn theta_examples() {
        let id = ThetaAction::from_involution(&SignedPerm::identity(2));
        assert!(!is_edge(&id, &[1, -1]).unwrap());
        let c1 = ThetaAction::from_involution(&inv(vec![0, 1], vec![true, false]));
        assert_eq!(theta_on_root(&c1, &[1, -1]).unwrap(), (vec![-1, -1], RootSign::Negative));
        assert!(is_edge(&c1, &[1, -1]).unwrap());
        let swap = ThetaAction::from_involution(&inv(vec![1, 0], vec![false, false]));
        assert_eq!(theta_on_root(&swap, &[1, -1]).unwrap().0, vec![-1, 1]);
        assert!(!is_edge(&swap, &[1, -1]).unwrap());
        assert_eq!(theta_on_root(&c1, &[0, 0]), Err(InvGraphError::ZeroRoot));
    }

    #[test]
    fn descent_example() {
        let pair = ClassicalPair::from_ints(Case::Symplectic, 3, -1, None, &[], 3).unwrap();
        let comp = Composition::new(vec![1, 2], 0).unwrap();
        let v = Vertex { comp, w: inv(vec![0, 1], vec![true, false]) };
        let d = descend(&pair, &v).unwrap();
        assert_eq!(d.path.len(), 1);
        assert_eq!(d.path[0].alpha, vec![1, -1]);
        assert_eq!(d.terminal.comp.parts, vec![2, 1]);
        assert_eq!(d.terminal.w, inv(vec![0, 1], vec![false, true]));
        assert!(descend(&pair, &d.terminal).unwrap().path.is_empty());
        assert!(!d.minimality_verified);
    }

    #[test]
    fn descent_terminates_and_counts_drop() {
        for (case, kernel) in [(Case::Orthogonal, vec![]), (Case::Orthogonal, vec![1]), (Case::Symplectic, vec![])] {
            for n in 1..=5 {
                let pair = ClassicalPair::from_ints(case, 3, -1, None, &kernel, n).unwrap();
                for v in all_vertices(&pair, 4, 2) {
                    let roots = RestrictedRoots::for_pair(&pair, &v.comp);
                    let d = descend(&pair, &v).unwrap();
                    assert!(d.path.len() <= roots.positive().len());
                    let mut prev = negative_count(&v, &roots).unwrap();
                    for s in &d.path {
                        let cur = negative_count(&Vertex { comp: s.new_comp.clone(), w: s.new_w.clone() }, &roots).unwrap();
                        assert!(cur < prev);
                        prev = cur;
                    }
                    assert!(edges(&d.terminal, &roots).unwrap().is_empty());
                }
            }
        }
    }

    #[test]
    fn minus_identity_cone() {
        let roots = RestrictedRoots { k: 2, last_multiplier: 1 };
        let theta = ThetaAction::minus_identity(2);
        assert!(cone_contains(&theta, &roots, &[q(5), q(2)], q(1)).unwrap());
        assert!(!cone_contains(&theta, &roots, &[q(2), q(2)], q(1)).unwrap());
        assert!(!cone_contains(&theta, &roots, &[q(0), q(0)], q(1)).unwrap());
    }

    #[test]
    fn double_crossing_returns() {
        let pair = ClassicalPair::from_ints(Case::Orthogonal, 3, -1, None, &[1], 4).unwrap();
        for v in all_vertices(&pair, 3, 2) {
            for i in 0..v.comp.k() {
                assert_eq!(cross_edge(&cross_edge(&v, i), i), v);
            }
        }
    }

    proptest! {
        #[test]
        fn theta_is_involution(k in 1usize..6, seed in 0usize..1000) {
            let comp = Composition::new(vec![1; k], 0).unwrap();
            let all = weyl::enumerate_involutions(&comp, false);
            let w = &all[seed % all.len()];
            let t = ThetaAction::from_involution(w);
            let v: Vec<i64> = (0..k as i64).map(|i| 3 * i - 7).collect();
            prop_assert_eq!(t.apply(&t.apply(&v)), v);
        }

        #[test]
        fn cone_recursion_random(seed in 0usize..500, a in -6i64..6, b in -6i64..6, c in -6i64..6, d in 1i64..4) {
            let pair = ClassicalPair::from_ints(Case::Orthogonal, 3, -1, None, &[], 3).unwrap();
            let verts = all_vertices(&pair, 3, 2);
            let v = &verts[seed % verts.len()];
            let roots = RestrictedRoots::for_pair(&pair, &v.comp);
            let k = v.comp.k();
            let mu: Vec<Rational64> = [a, b, c].iter().take(k).map(|x| Rational64::new(*x, d)).collect();
            let lam = anti_invariant_part(&v.theta(), &mu);
            for i in edges(v, &roots).unwrap() {
                let (l, r) = cone_recursion_sides(v, &roots, i, &lam, Rational64::new(-1, 2)).unwrap();
                prop_assert_eq!(l, r);
            }
        }
    }
}
