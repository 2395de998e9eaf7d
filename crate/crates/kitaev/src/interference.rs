//! The six-spin hexagon experiment: one plaquette of the honeycomb model,
//! a vortex created by a single spin rotation, and a loop operator whose
//! interference with a superposition rotation exposes the pi statistical
//! phase.
//!
//! The hexagon couples sites 0..5 around the loop with bond kinds
//! `x, z, y, x, z, y` (bond `i` joins sites `i` and `i+1 mod 6`). The loop
//! operator `S` carries at each site the Pauli of the third direction, the
//! one not used by its two boundary bonds:
//! `S = s^z_0 s^y_1 s^x_2 s^z_3 s^y_4 s^x_5`. This is exactly the plaquette
//! operator of the single hexagon, it commutes with the Hamiltonian, squares
//! to the identity, and anticommutes with the vortex rotation `s^z_5`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::lattice::LinkKind;
use crate::majorana::Couplings;
use crate::pauli::{Pauli, PauliString};
use crate::spin_ed::SpinOperator;
use crate::{Error, Result};

/// Bond kinds around the hexagon; bond `i` joins sites `i` and `i+1 mod 6`.
pub const HEXAGON_BOND_KINDS: [LinkKind; 6] = [
    LinkKind::X,
    LinkKind::Z,
    LinkKind::Y,
    LinkKind::X,
    LinkKind::Z,
    LinkKind::Y,
];

/// The spin that hosts the vortex rotation.
pub const VORTEX_SITE: usize = 5;

/// Six spins on one hexagonal plaquette with only the boundary interactions.
#[derive(Debug, Clone)]
pub struct HexagonModel {
    pub couplings: Couplings,
    pub hamiltonian: SpinOperator,
    pub loop_operator: PauliString,
    pub vortex_rotation: PauliString,
    pub boundary_link_types: [LinkKind; 6],
}

/// Builds the hexagon Hamiltonian, the loop operator, and the vortex
/// rotation.
pub fn build_hexagon(j: Couplings) -> HexagonModel {
    let terms = HEXAGON_BOND_KINDS
        .iter()
        .enumerate()
        .map(|(i, kind)| {
            let p = match kind {
                LinkKind::X => Pauli::X,
                LinkKind::Y => Pauli::Y,
                LinkKind::Z => Pauli::Z,
            };
            PauliString::new(-j.by_kind(*kind), [(i, p), ((i + 1) % 6, p)])
        })
        .collect();
    let loop_factors = [Pauli::Z, Pauli::Y, Pauli::X, Pauli::Z, Pauli::Y, Pauli::X];
    HexagonModel {
        couplings: j,
        hamiltonian: SpinOperator::new(6, terms),
        loop_operator: PauliString::new(1.0, loop_factors.into_iter().enumerate()),
        vortex_rotation: PauliString::single(1.0, VORTEX_SITE, Pauli::Z),
        boundary_link_types: HEXAGON_BOND_KINDS,
    }
}

/// The ground state of the `S = +1` sector and the vortex state
/// `|v> = s^z |gs>`. Degeneracy inside the sector is resolved
/// deterministically by the dense eigensolver; any `S = +1` ground state
/// serves the protocol identically since only `S|gs> = +|gs>` enters.
pub fn ground_and_vortex(model: &HexagonModel) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let (energy_plus, gs) = lowest_in_plus_sector(model)?;
    let _ = energy_plus;
    let v = model.vortex_rotation.apply(&gs);
    Ok((gs, v))
}

/// True when the lowest `S = +1` state is also the global ground state; when
/// false the protocol still runs, but the state labeled `|gs>` is only the
/// lowest state of the `+1` sector.
pub fn plus_sector_holds_global_ground(model: &HexagonModel) -> bool {
    let h = hamiltonian_dense(model);
    let global_min = h
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b));
    match lowest_in_plus_sector(model) {
        Ok((e_plus, _)) => e_plus <= global_min + 1e-10,
        Err(_) => false,
    }
}

fn hamiltonian_dense(model: &HexagonModel) -> DMatrix<f64> {
    let dense = model.hamiltonian.to_dense();
    DMatrix::from_fn(dense.nrows(), dense.ncols(), |r, c| dense[(r, c)].re)
}

/// Lowest eigenpair of the Hamiltonian restricted to the `S = +1` subspace.
fn lowest_in_plus_sector(model: &HexagonModel) -> Result<(f64, Vec<Complex64>)> {
    let dim = 64;
    let h = hamiltonian_dense(model);
    let s_dense = model.loop_operator.to_matrix(6);
    let s_real = DMatrix::from_fn(dim, dim, |r, c| s_dense[(r, c)].re);

    // orthonormal basis of the +1 eigenspace of S from its spectral split
    let eig_s = s_real.symmetric_eigen();
    let plus_columns: Vec<usize> = (0..dim)
        .filter(|&i| eig_s.eigenvalues[i] > 0.0)
        .collect();
    if plus_columns.is_empty() {
        return Err(Error::NoConvergence { residual: f64::INFINITY, target: 0.0 });
    }
    let basis = DMatrix::from_fn(dim, plus_columns.len(), |r, c| {
        eig_s.eigenvectors[(r, plus_columns[c])]
    });

    let restricted = basis.transpose() * &h * &basis;
    let eig = restricted.symmetric_eigen();
    let mut best = 0;
    for i in 1..plus_columns.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    let lifted = &basis * eig.eigenvectors.column(best);
    let state: Vec<Complex64> = lifted.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Ok((eig.eigenvalues[best], state))
}

/// Applies the loop operator: `S|gs> = +|gs>`, `S|v> = -|v>`.
pub fn run_loop(model: &HexagonModel, state: &[Complex64]) -> Vec<Complex64> {
    model.loop_operator.apply(state)
}

/// Energies of the ground and vortex states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorEnergies {
    pub gs: f64,
    pub v: f64,
}

/// Outcome of the rotate-loop-unrotate protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceReport {
    pub couplings: Couplings,
    pub s_expectation_gs: f64,
    pub s_expectation_v: f64,
    pub fidelity_v: f64,
    pub fidelity_gs: f64,
    pub energies: SectorEnergies,
    /// False when the global ground state sits in the `S = -1` sector and
    /// `|gs>` had to be relabeled as the lowest `S = +1` state.
    #[serde(skip)]
    pub plus_sector_is_global_ground: bool,
}

/// Runs `R -> S -> R^{-1}` on the ground state with `R = (1 - i s^z)/sqrt 2`
/// and returns the squared overlaps with `|v>` and `|gs>`. Anyonic
/// statistics sends the ground state to the vortex state, `(1, 0)`; a loop
/// that commutes with the rotation recombines to `(0, 1)` instead.
pub fn run_interference(model: &HexagonModel) -> Result<InterferenceReport> {
    run_interference_with(model, &model.loop_operator)
}

/// The same protocol with an arbitrary loop operator in place of `S`.
pub fn run_interference_with(
    model: &HexagonModel,
    loop_op: &PauliString,
) -> Result<InterferenceReport> {
    let (gs, v) = ground_and_vortex(model)?;
    let h = &model.hamiltonian;

    let rotated = rotate(&gs, &model.vortex_rotation, false);
    let looped = loop_op.apply(&rotated);
    let outcome = rotate(&looped, &model.vortex_rotation, true);

    let fidelity = |target: &[Complex64]| {
        let overlap: Complex64 = target
            .iter()
            .zip(&outcome)
            .map(|(t, o)| t.conj() * o)
            .sum();
        overlap.norm_sqr()
    };

    Ok(InterferenceReport {
        couplings: model.couplings,
        s_expectation_gs: model.loop_operator.expectation(&gs).re,
        s_expectation_v: model.loop_operator.expectation(&v).re,
        fidelity_v: fidelity(&v),
        fidelity_gs: fidelity(&gs),
        energies: SectorEnergies {
            gs: h.expectation(&gs).re,
            v: h.expectation(&v).re,
        },
        plus_sector_is_global_ground: plus_sector_holds_global_ground(model),
    })
}

/// `R = (1 - i s^z)/sqrt 2` (or its inverse) applied to a state.
fn rotate(state: &[Complex64], rotation: &PauliString, inverse: bool) -> Vec<Complex64> {
    let applied = rotation.apply(state);
    let i = Complex64::new(0.0, if inverse { 1.0 } else { -1.0 });
    let norm = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    state
        .iter()
        .zip(&applied)
        .map(|(s, a)| norm * (s + i * a))
        .collect()
}
