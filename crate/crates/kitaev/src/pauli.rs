//! Signed Pauli-string algebra with exact phase bookkeeping.
//!
//! A [`PauliString`] is a complex coefficient times a tensor product of
//! single-site Pauli operators. Products track the i / -i / -1 phases of the
//! single-site multiplication table exactly, two strings either commute or
//! anticommute according to the parity of their site-wise anticommuting
//! overlaps, and application to a computational-basis state vector runs in
//! one pass via bit masks (`sigma^y = i sigma^x sigma^z`, so a string is a
//! phase times an X-mask flip and a Z-mask sign).

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

/// A single-site Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `a * b = phase * c` on one site.
    fn mul(a: Pauli, b: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match (a, b) {
            (I, p) | (p, I) => (one, p),
            (X, X) | (Y, Y) | (Z, Z) => (one, I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
        }
    }

    fn anticommutes(a: Pauli, b: Pauli) -> bool {
        a != Pauli::I && b != Pauli::I && a != b
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A scalar multiple of a tensor product of single-site Paulis. Identity
/// factors are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    coefficient: Complex64,
    factors: BTreeMap<usize, Pauli>,
}

impl PauliString {
    pub fn new<C: Into<Complex64>>(
        coefficient: C,
        factors: impl IntoIterator<Item = (usize, Pauli)>,
    ) -> Self {
        let mut out = PauliString {
            coefficient: coefficient.into(),
            factors: BTreeMap::new(),
        };
        for (site, p) in factors {
            if p != Pauli::I {
                let prev = out.factors.insert(site, p);
                assert!(prev.is_none(), "duplicate factor on site {site}");
            }
        }
        out
    }

    pub fn identity() -> Self {
        PauliString::new(1.0, [])
    }

    pub fn single<C: Into<Complex64>>(coefficient: C, site: usize, p: Pauli) -> Self {
        PauliString::new(coefficient, [(site, p)])
    }

    pub fn coefficient(&self) -> Complex64 {
        self.coefficient
    }

    pub fn factors(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        self.factors.iter().map(|(&s, &p)| (s, p))
    }

    pub fn factor_at(&self, site: usize) -> Pauli {
        self.factors.get(&site).copied().unwrap_or(Pauli::I)
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn max_site(&self) -> Option<usize> {
        self.factors.keys().next_back().copied()
    }

    /// True when the string is a scalar multiple of the identity.
    pub fn is_scalar(&self) -> bool {
        self.factors.is_empty()
    }

    /// Operator product `self * other` with exact phase tracking.
    pub fn product(&self, other: &PauliString) -> PauliString {
        let mut coefficient = self.coefficient * other.coefficient;
        let mut factors = self.factors.clone();
        for (&site, &p) in &other.factors {
            let (phase, combined) = Pauli::mul(self.factor_at(site), p);
            coefficient *= phase;
            if combined == Pauli::I {
                factors.remove(&site);
            } else {
                factors.insert(site, combined);
            }
        }
        PauliString { coefficient, factors }
    }

    /// Hermitian adjoint: basis strings are self-adjoint, so only the
    /// coefficient conjugates.
    pub fn adjoint(&self) -> PauliString {
        PauliString {
            coefficient: self.coefficient.conj(),
            factors: self.factors.clone(),
        }
    }

    /// Inverse of a unitary string (`|coefficient| = 1`).
    pub fn inverse(&self) -> PauliString {
        debug_assert!(
            (self.coefficient.norm() - 1.0).abs() < 1e-12,
            "inverse of a non-unitary string"
        );
        self.adjoint()
    }

    /// Two strings commute iff an even number of sites carry anticommuting
    /// factor pairs.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let overlaps = self
            .factors
            .iter()
            .filter(|(site, p)| Pauli::anticommutes(**p, other.factor_at(**site)))
            .count();
        overlaps % 2 == 0
    }

    /// X-flip mask, Z-sign mask, and total scalar of the normal form
    /// `scalar * X^{xmask} Z^{zmask}`.
    pub(crate) fn masks(&self) -> (u64, u64, Complex64) {
        let mut xm = 0u64;
        let mut zm = 0u64;
        let mut scalar = self.coefficient;
        for (&site, &p) in &self.factors {
            assert!(site < 64, "site index too large for the mask representation");
            match p {
                Pauli::X => xm |= 1 << site,
                Pauli::Z => zm |= 1 << site,
                Pauli::Y => {
                    xm |= 1 << site;
                    zm |= 1 << site;
                    scalar *= Complex64::new(0.0, 1.0);
                }
                Pauli::I => {}
            }
        }
        (xm, zm, scalar)
    }

    /// Applies the string to a state vector over `log2(state.len())` spins.
    /// Bit `i` of a basis index is spin `i`, with bit 0 the +1 eigenstate of
    /// `sigma^z`.
    pub fn apply(&self, state: &[Complex64]) -> Vec<Complex64> {
        assert!(state.len().is_power_of_two(), "state length must be 2^n");
        if let Some(max) = self.max_site() {
            assert!(1usize << (max + 1) <= state.len(), "state too small for site {max}");
        }
        let (xm, zm, scalar) = self.masks();
        let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
        for (idx, amp) in state.iter().enumerate() {
            let sign = if ((idx as u64 & zm).count_ones()) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            out[idx ^ xm as usize] = scalar * sign * amp;
        }
        out
    }

    /// `<state| self |state>`.
    pub fn expectation(&self, state: &[Complex64]) -> Complex64 {
        let applied = self.apply(state);
        state
            .iter()
            .zip(&applied)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Dense matrix over `n` spins; for tests and tiny systems only.
    pub fn to_matrix(&self, n_spins: usize) -> nalgebra::DMatrix<Complex64> {
        let dim = 1usize << n_spins;
        assert!(dim <= 1 << 12, "dense Pauli matrices are capped at 12 spins");
        let (xm, zm, scalar) = self.masks();
        let mut m = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
        for col in 0..dim {
            let sign = if ((col as u64 & zm).count_ones()) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            m[(col ^ xm as usize, col)] = scalar * sign;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.4}{:+.4}i)", self.coefficient.re, self.coefficient.im)?;
        if self.factors.is_empty() {
            return write!(f, " I");
        }
        for (site, p) in &self.factors {
            write!(f, " {}{}", p.symbol(), site)?;
        }
        Ok(())
    }
}

/// Scalar value of the group commutator `a b a^-1 b^-1` of two unitary
/// strings; +1 when they commute and -1 when they anticommute.
pub fn string_commutator_phase(a: &PauliString, b: &PauliString) -> Complex64 {
    let product = a
        .product(b)
        .product(&a.inverse())
        .product(&b.inverse());
    debug_assert!(product.is_scalar(), "group commutator of Pauli strings is a scalar");
    product.coefficient()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_site_table_against_dense_matrices() {
        for a in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
            for b in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
                let lhs = PauliString::single(1.0, 0, a)
                    .product(&PauliString::single(1.0, 0, b))
                    .to_matrix(1);
                let rhs = PauliString::single(1.0, 0, a).to_matrix(1)
                    * PauliString::single(1.0, 0, b).to_matrix(1);
                assert!((lhs - rhs).norm() < 1e-14, "{a:?} * {b:?}");
            }
        }
    }

    #[test]
    fn commutation_predicate_matches_matrix_commutators() {
        let strings = [
            PauliString::new(1.0, [(0, Pauli::X), (1, Pauli::Y)]),
            PauliString::new(1.0, [(1, Pauli::Z), (2, Pauli::Z)]),
            PauliString::new(c(0.0, 1.0), [(0, Pauli::Z), (2, Pauli::X), (3, Pauli::Y)]),
            PauliString::new(1.0, [(3, Pauli::X)]),
        ];
        for a in &strings {
            for b in &strings {
                let ma = a.to_matrix(4);
                let mb = b.to_matrix(4);
                let comm = (&ma * &mb - &mb * &ma).norm();
                assert_eq!(a.commutes_with(b), comm < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn y_phase_bookkeeping_is_exact() {
        // sigma^x sigma^y = i sigma^z
        let p = PauliString::single(1.0, 0, Pauli::X).product(&PauliString::single(1.0, 0, Pauli::Y));
        assert_eq!(p.coefficient(), c(0.0, 1.0));
        assert_eq!(p.factor_at(0), Pauli::Z);
        // and the reverse order picks up the opposite sign
        let q = PauliString::single(1.0, 0, Pauli::Y).product(&PauliString::single(1.0, 0, Pauli::X));
        assert_eq!(q.coefficient(), c(0.0, -1.0));
    }

    #[test]
    fn apply_matches_dense_matrix() {
        let s = PauliString::new(c(0.5, -0.25), [(0, Pauli::Y), (2, Pauli::X), (3, Pauli::Z)]);
        let dim = 16;
        let state: Vec<Complex64> = (0..dim)
            .map(|i| c((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let fast = s.apply(&state);
        let m = s.to_matrix(4);
        for r in 0..dim {
            let mut acc = c(0.0, 0.0);
            for col in 0..dim {
                acc += m[(r, col)] * state[col];
            }
            assert!((acc - fast[r]).norm() < 1e-13);
        }
    }

    #[test]
    fn commutator_phase_of_crossing_strings() {
        let zs = PauliString::new(1.0, [(0, Pauli::Z), (1, Pauli::Z), (2, Pauli::Z)]);
        let xs = PauliString::new(1.0, [(2, Pauli::X), (5, Pauli::X)]);
        assert_eq!(string_commutator_phase(&zs, &xs), c(-1.0, 0.0));
        let disjoint = PauliString::new(1.0, [(7, Pauli::X)]);
        assert_eq!(string_commutator_phase(&zs, &disjoint), c(1.0, 0.0));
    }

    fn arb_pauli() -> impl Strategy<Value = Pauli> {
        prop_oneof![
            Just(Pauli::I),
            Just(Pauli::X),
            Just(Pauli::Y),
            Just(Pauli::Z)
        ]
    }

    fn arb_string(n: usize) -> impl Strategy<Value = PauliString> {
        proptest::collection::vec(arb_pauli(), n).prop_map(|ps| {
            PauliString::new(1.0, ps.into_iter().enumerate())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn product_is_associative(
            a in arb_string(4),
            b in arb_string(4),
            d in arb_string(4),
        ) {
            let lhs = a.product(&b).product(&d);
            let rhs = a.product(&b.product(&d));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn strings_commute_or_anticommute(a in arb_string(4), b in arb_string(4)) {
            let ab = a.product(&b);
            let ba = b.product(&a);
            if a.commutes_with(&b) {
                prop_assert_eq!(ab, ba);
            } else {
                let mut neg = ba.clone();
                neg = PauliString::new(-neg.coefficient(), neg.factors());
                prop_assert_eq!(ab, neg);
            }
        }

        #[test]
        fn unitary_strings_square_to_a_phase(a in arb_string(5)) {
            let sq = a.product(&a);
            prop_assert!(sq.is_scalar());
            prop_assert!((sq.coefficient().norm() - 1.0).abs() < 1e-12);
        }
    }
}
