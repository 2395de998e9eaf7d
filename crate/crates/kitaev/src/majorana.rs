//! Quadratic Majorana form of a gauge sector and its exact spectrum.
//!
//! In a fixed gauge configuration the spin model reduces to
//! `H = (i/4) sum_{jk} A_{jk} c_j c_k` with a real antisymmetric `A` carrying
//! `2 J_alpha u_{jk}` on links. Its canonical form gives fermion modes with
//! energies `eps_m >= 0`, `H = sum_m eps_m (b_m^dag b_m - 1/2)`, so the sector
//! ground energy is `-1/2 sum_m eps_m` and the fermionic gap is `min_m eps_m`.
//!
//! The mode energies are the non-negative eigenvalues of the Hermitian matrix
//! `iA`. Honeycomb links only join the two sublattices, so `A` is block
//! off-diagonal in the (A-sites, B-sites) split and those eigenvalues equal
//! the singular values of the A-to-B block; [`mode_energies`] takes that
//! route (it is an order of magnitude faster at a few thousand sites), while
//! [`mode_energies_hermitian`] keeps the direct eigensolve for cross-checks
//! and for forms without the bipartite structure.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::lattice::{flip_link, vortex_free_gauge, GaugeConfig, LatticeSpec, LinkKind, LinkRef};
use crate::{Error, Result};

/// Bond strengths of the three link types, restricted to non-negative values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl Couplings {
    pub fn new(jx: f64, jy: f64, jz: f64) -> Result<Self> {
        if jx < 0.0 || jy < 0.0 || jz < 0.0 || !(jx.is_finite() && jy.is_finite() && jz.is_finite())
        {
            return Err(Error::NegativeCoupling { jx, jy, jz });
        }
        Ok(Couplings { jx, jy, jz })
    }

    pub fn by_kind(&self, kind: LinkKind) -> f64 {
        match kind {
            LinkKind::X => self.jx,
            LinkKind::Y => self.jy,
            LinkKind::Z => self.jz,
        }
    }

    pub fn sum(&self) -> f64 {
        self.jx + self.jy + self.jz
    }
}

/// The real antisymmetric coupling matrix of one gauge sector.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    matrix: DMatrix<f64>,
}

impl QuadraticForm {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.matrix[(j, k)]
    }
}

/// Exact single-particle data of one gauge sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub couplings: Couplings,
    #[serde(rename = "fluxes")]
    pub sector_fluxes: Vec<i8>,
    /// Sorted non-negative mode energies, one per unit cell.
    pub mode_energies: Vec<f64>,
    pub ground_energy: f64,
    pub gap: f64,
}

/// Builds the antisymmetric matrix with `A[a][b] = 2 J_alpha u` for each link
/// in its stored A -> B orientation. Contributions add, which only matters on
/// degenerate tori where several links join the same site pair.
pub fn assemble(spec: LatticeSpec, g: &GaugeConfig, j: Couplings) -> Result<QuadraticForm> {
    if g.spec() != spec {
        return Err(Error::LatticeMismatch {
            expected_n1: spec.n1(),
            expected_n2: spec.n2(),
            found_n1: g.spec().n1(),
            found_n2: g.spec().n2(),
        });
    }
    Couplings::new(j.jx, j.jy, j.jz)?;
    let n = spec.n_sites();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for l in spec.links() {
        let (sa, sb) = spec.link_endpoints(l);
        let w = 2.0 * j.by_kind(l.kind) * f64::from(g.u(l)?);
        a[(sa, sb)] += w;
        a[(sb, sa)] -= w;
    }
    Ok(QuadraticForm { matrix: a })
}

/// Non-negative mode energies of the form, ascending.
///
/// Uses the singular values of the sublattice off-diagonal block when the
/// form is bipartite (always the case for honeycomb gauges) and the Hermitian
/// eigensolve otherwise.
pub fn mode_energies(q: &QuadraticForm) -> Vec<f64> {
    match bipartite_block(q) {
        Some(block) => {
            let mut sv: Vec<f64> = block.svd(false, false).singular_values.iter().copied().collect();
            sv.sort_by(|a, b| a.partial_cmp(b).expect("singular values are finite"));
            sv
        }
        None => mode_energies_hermitian(q),
    }
}

/// Non-negative eigenvalues of the Hermitian matrix `iA`, ascending.
///
/// The full eigensolve; its spectrum comes in exact +/- pairs, which tests
/// use as a consistency check on the assembled form.
pub fn mode_energies_hermitian(q: &QuadraticForm) -> Vec<f64> {
    let n = q.dimension();
    let h = DMatrix::<Complex64>::from_fn(n, n, |r, c| Complex64::new(0.0, q.matrix[(r, c)]));
    let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    ev.split_off(n / 2)
}

/// The A-to-B block when the form couples only even to odd site indices.
fn bipartite_block(q: &QuadraticForm) -> Option<DMatrix<f64>> {
    let n = q.dimension();
    if n % 2 != 0 {
        return None;
    }
    let half = n / 2;
    for r in 0..n {
        for c in 0..n {
            if (r % 2 == c % 2) && q.matrix[(r, c)] != 0.0 {
                return None;
            }
        }
    }
    Some(DMatrix::from_fn(half, half, |r, c| q.matrix[(2 * r, 2 * c + 1)]))
}

/// Assembles and diagonalizes one sector.
pub fn sector_spectrum(spec: LatticeSpec, g: &GaugeConfig, j: Couplings) -> Result<SpectrumResult> {
    let q = assemble(spec, g, j)?;
    let mode_energies = mode_energies(&q);
    let ground_energy = -0.5 * mode_energies.iter().sum::<f64>();
    let gap = mode_energies.first().copied().unwrap_or(0.0);
    Ok(SpectrumResult {
        couplings: j,
        sector_fluxes: g.fluxes(),
        mode_energies,
        ground_energy,
        gap,
    })
}

/// Ground-energy cost of the adjacent vortex pair created by flipping one
/// z-link of the vortex-free gauge (the two-vortex configuration a single
/// spin rotation produces). The pair sits at the lattice center; on small
/// tori it interacts with its periodic images, so the value should be read
/// as a function of lattice size rather than a converged scalar.
pub fn two_vortex_gap(spec: LatticeSpec, j: Couplings) -> Result<f64> {
    let base = vortex_free_gauge(spec);
    let flipped = flip_link(
        &base,
        LinkRef {
            cell: spec.wrap(spec.n1() as isize / 2, spec.n2() as isize / 2),
            kind: LinkKind::Z,
        },
    )?;
    let e_vf = sector_spectrum(spec, &base, j)?.ground_energy;
    let e_2v = sector_spectrum(spec, &flipped, j)?.ground_energy;
    Ok(e_2v - e_vf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{vortex_lattice_gauge, Cell};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn f_abs(px: f64, py: f64, j: Couplings) -> f64 {
        let re = 2.0 * (j.jx * px.cos() + j.jy * py.cos() + j.jz);
        let im = 2.0 * (j.jx * px.sin() + j.jy * py.sin());
        re.hypot(im)
    }

    fn vf_discrete_modes(n1: usize, n2: usize, j: Couplings) -> Vec<f64> {
        let mut out = Vec::with_capacity(n1 * n2);
        for k1 in 0..n1 {
            for k2 in 0..n2 {
                out.push(f_abs(
                    2.0 * PI * k1 as f64 / n1 as f64,
                    2.0 * PI * k2 as f64 / n2 as f64,
                    j,
                ));
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    #[test]
    fn rejects_negative_couplings() {
        assert!(Couplings::new(1.0, -0.1, 1.0).is_err());
        assert!(Couplings::new(0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn single_z_bond_form_on_smallest_torus() {
        let spec = LatticeSpec::new(1, 1).unwrap();
        let j = Couplings::new(0.0, 0.0, 1.0).unwrap();
        let q = assemble(spec, &vortex_free_gauge(spec), j).unwrap();
        assert_eq!(q.dimension(), 2);
        assert_eq!(q.entry(0, 1), 2.0);
        assert_eq!(q.entry(1, 0), -2.0);
    }

    #[test]
    fn rows_have_three_entries_of_magnitude_two() {
        let spec = LatticeSpec::new(2, 2).unwrap();
        let j = Couplings::new(1.0, 1.0, 1.0).unwrap();
        let q = assemble(spec, &vortex_free_gauge(spec), j).unwrap();
        for r in 0..q.dimension() {
            let row: Vec<f64> = (0..q.dimension())
                .map(|c| q.entry(r, c))
                .filter(|v| *v != 0.0)
                .collect();
            assert_eq!(row.len(), 3);
            assert!(row.iter().all(|v| v.abs() == 2.0));
        }
    }

    #[test]
    fn assembled_form_is_antisymmetric_bit_exactly() {
        let spec = LatticeSpec::new(3, 2).unwrap();
        let j = Couplings::new(0.3, 1.7, 0.9).unwrap();
        let g = flip_link(
            &vortex_free_gauge(spec),
            LinkRef { cell: Cell::new(1, 1), kind: LinkKind::X },
        )
        .unwrap();
        let q = assemble(spec, &g, j).unwrap();
        for r in 0..q.dimension() {
            for c in 0..q.dimension() {
                // exact float equality; the two triangles are written from
                // the same products, never recomputed
                assert_eq!(q.entry(r, c), -q.entry(c, r));
            }
        }
    }

    #[test]
    fn assemble_rejects_mismatched_lattice() {
        let spec = LatticeSpec::new(2, 2).unwrap();
        let other = LatticeSpec::new(2, 3).unwrap();
        let j = Couplings::new(1.0, 1.0, 1.0).unwrap();
        let g = vortex_free_gauge(other);
        assert!(matches!(
            assemble(spec, &g, j),
            Err(Error::LatticeMismatch { .. })
        ));
    }

    #[test]
    fn z_dimer_modes_are_flat() {
        let spec = LatticeSpec::new(3, 3).unwrap();
        let j = Couplings::new(0.0, 0.0, 1.0).unwrap();
        let q = assemble(spec, &vortex_free_gauge(spec), j).unwrap();
        for e in mode_energies(&q) {
            assert_relative_eq!(e, 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn zero_couplings_give_zero_modes() {
        let spec = LatticeSpec::new(2, 3).unwrap();
        let j = Couplings::new(0.0, 0.0, 0.0).unwrap();
        let q = assemble(spec, &vortex_free_gauge(spec), j).unwrap();
        assert!(mode_energies(&q).iter().all(|&e| e == 0.0));
    }

    #[test]
    fn vortex_free_modes_match_discrete_dispersion() {
        let spec = LatticeSpec::new(4, 5).unwrap();
        let j = Couplings::new(0.8, 1.3, 0.6).unwrap();
        let q = assemble(spec, &vortex_free_gauge(spec), j).unwrap();
        let modes = mode_energies(&q);
        let expected = vf_discrete_modes(4, 5, j);
        assert_eq!(modes.len(), expected.len());
        for (m, e) in modes.iter().zip(&expected) {
            assert_relative_eq!(m, e, epsilon = 1e-10);
        }
    }

    #[test]
    fn svd_and_hermitian_routes_agree() {
        let spec = LatticeSpec::new(3, 4).unwrap();
        let j = Couplings::new(1.1, 0.4, 0.9).unwrap();
        let g = flip_link(
            &vortex_free_gauge(spec),
            LinkRef { cell: Cell::new(0, 2), kind: LinkKind::Z },
        )
        .unwrap();
        let q = assemble(spec, &g, j).unwrap();
        let fast = mode_energies(&q);
        let herm = mode_energies_hermitian(&q);
        for (a, b) in fast.iter().zip(&herm) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn hermitian_spectrum_pairs_exactly() {
        let spec = LatticeSpec::new(3, 3).unwrap();
        let j = Couplings::new(0.7, 1.0, 1.2).unwrap();
        let q = assemble(spec, &vortex_free_gauge(spec), j).unwrap();
        let n = q.dimension();
        let h = DMatrix::<Complex64>::from_fn(n, n, |r, c| Complex64::new(0.0, q.matrix[(r, c)]));
        let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (neg, pos) = ev.split_at(n / 2);
        let worst = neg
            .iter()
            .rev()
            .zip(pos)
            .map(|(m, p)| (m + p).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-10, "pairing defect {worst:.2e}");
    }

    #[test]
    fn dimer_ground_energy_is_minus_jz_per_plaquette() {
        let j = Couplings::new(0.0, 0.0, 1.0).unwrap();
        for (n1, n2) in [(2, 2), (3, 3), (2, 4)] {
            let spec = LatticeSpec::new(n1, n2).unwrap();
            let s = sector_spectrum(spec, &vortex_free_gauge(spec), j).unwrap();
            assert_relative_eq!(s.ground_energy, -(spec.n_plaquettes() as f64), epsilon = 1e-12);
            assert_relative_eq!(s.gap, 2.0, epsilon = 1e-13);
        }
        // the vortex-lattice bands are also flat there
        let spec = LatticeSpec::new(2, 2).unwrap();
        let s = sector_spectrum(spec, &vortex_lattice_gauge(spec).unwrap(), j).unwrap();
        assert_relative_eq!(s.ground_energy, -4.0, epsilon = 1e-12);
        assert_eq!(s.sector_fluxes, vec![-1; 4]);
    }

    #[test]
    fn vortex_free_sector_wins_at_symmetric_couplings() {
        let spec = LatticeSpec::new(6, 6).unwrap();
        let j = Couplings::new(1.0, 1.0, 1.0).unwrap();
        let vf = sector_spectrum(spec, &vortex_free_gauge(spec), j).unwrap();
        let vl = sector_spectrum(spec, &vortex_lattice_gauge(spec).unwrap(), j).unwrap();
        assert!(vf.ground_energy < vl.ground_energy);
    }

    #[test]
    fn spectrum_json_shape() {
        let spec = LatticeSpec::new(1, 1).unwrap();
        let j = Couplings::new(0.0, 0.0, 1.0).unwrap();
        let s = sector_spectrum(spec, &vortex_free_gauge(spec), j).unwrap();
        let value = serde_json::to_value(&s).unwrap();
        for key in ["couplings", "fluxes", "mode_energies", "ground_energy", "gap"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        let back: SpectrumResult = serde_json::from_value(value).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn two_vortex_gap_converges_in_the_gapped_regime() {
        let j = Couplings::new(0.1, 0.1, 1.0).unwrap();
        // the (4,4) torus is too small: the pair overlaps its periodic images
        // and the sector energy dips below vortex-free, so convergence is only
        // monotone from (6,6) on
        let g6 = two_vortex_gap(LatticeSpec::new(6, 6).unwrap(), j).unwrap();
        let g8 = two_vortex_gap(LatticeSpec::new(8, 8).unwrap(), j).unwrap();
        assert!(g6 > 0.0 && g8 > 0.0);
        assert!((g8 - g6).abs() < 0.1 * g8, "g6={g6:.3e} g8={g8:.3e}");
    }

    #[test]
    fn two_vortex_gap_vanishes_for_pure_z_couplings() {
        // only the flipped link's dimer changes, and |u| does not enter the
        // dimer energy
        let j = Couplings::new(0.0, 0.0, 1.0).unwrap();
        let gap = two_vortex_gap(LatticeSpec::new(4, 4).unwrap(), j).unwrap();
        assert_relative_eq!(gap, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn x_link_flip_costs_the_same_kind_of_pair() {
        let spec = LatticeSpec::new(6, 6).unwrap();
        let j = Couplings::new(0.1, 0.1, 1.0).unwrap();
        let base = vortex_free_gauge(spec);
        let flipped = flip_link(
            &base,
            LinkRef { cell: Cell::new(3, 3), kind: LinkKind::X },
        )
        .unwrap();
        let fluxes = flipped.fluxes();
        assert_eq!(fluxes.iter().filter(|&&f| f == -1).count(), 2);
        let gap = sector_spectrum(spec, &flipped, j).unwrap().ground_energy
            - sector_spectrum(spec, &base, j).unwrap().ground_energy;
        assert!(gap > 0.0);
    }

    #[test]
    fn vortex_pair_energies_add_in_the_toric_regime() {
        // two well-separated pairs cost the sum of the individual pairs
        let spec = LatticeSpec::new(8, 8).unwrap();
        let j = Couplings::new(0.05, 0.05, 1.0).unwrap();
        let base = vortex_free_gauge(spec);
        let e0 = sector_spectrum(spec, &base, j).unwrap().ground_energy;
        let z_pair = flip_link(&base, LinkRef { cell: Cell::new(4, 4), kind: LinkKind::Z }).unwrap();
        let y_pair = {
            let g = flip_link(&base, LinkRef { cell: Cell::new(4, 4), kind: LinkKind::X }).unwrap();
            flip_link(&g, LinkRef { cell: Cell::new(4, 3), kind: LinkKind::Y }).unwrap()
        };
        let both = {
            let g = flip_link(&z_pair, LinkRef { cell: Cell::new(4, 4), kind: LinkKind::X }).unwrap();
            flip_link(&g, LinkRef { cell: Cell::new(4, 3), kind: LinkKind::Y }).unwrap()
        };
        assert_eq!(both.fluxes().iter().filter(|&&f| f == -1).count(), 4);
        let ez = sector_spectrum(spec, &z_pair, j).unwrap().ground_energy - e0;
        let ey = sector_spectrum(spec, &y_pair, j).unwrap().ground_energy - e0;
        let ex = sector_spectrum(spec, &both, j).unwrap().ground_energy - e0;
        assert!((ex - ez - ey).abs() < 0.05 * ex, "ez={ez:.3e} ey={ey:.3e} ex={ex:.3e}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn discrete_dispersion_matches_for_random_couplings(
            jx in 0.05f64..1.5,
            jy in 0.05f64..1.5,
            jz in 0.05f64..1.5,
        ) {
            let spec = LatticeSpec::new(4, 4).unwrap();
            let j = Couplings::new(jx, jy, jz).unwrap();
            let q = assemble(spec, &vortex_free_gauge(spec), j).unwrap();
            let modes = mode_energies(&q);
            let expected = vf_discrete_modes(4, 4, j);
            for (m, e) in modes.iter().zip(&expected) {
                prop_assert!((m - e).abs() < 1e-9);
            }
        }

        #[test]
        fn spectrum_depends_on_gauge_only_through_fluxes(
            jx in 0.05f64..1.5,
            jy in 0.05f64..1.5,
            jz in 0.05f64..1.5,
            site in 0usize..18,
        ) {
            // negating the three links at one site is the gauge transformation
            // generated by the local fermion-parity operator
            let spec = LatticeSpec::new(3, 3).unwrap();
            let j = Couplings::new(jx, jy, jz).unwrap();
            let g = vortex_free_gauge(spec);
            let mut transformed = g.clone();
            for l in spec.site_links(site).unwrap() {
                transformed = flip_link(&transformed, l).unwrap();
            }
            prop_assert_eq!(transformed.fluxes(), g.fluxes());
            let a = sector_spectrum(spec, &g, j).unwrap();
            let b = sector_spectrum(spec, &transformed, j).unwrap();
            for (ma, mb) in a.mode_energies.iter().zip(&b.mode_energies) {
                prop_assert!((ma - mb).abs() < 1e-10);
            }
        }
    }
}
