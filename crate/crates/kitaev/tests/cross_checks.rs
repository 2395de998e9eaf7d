//! Finite-size against continuum: large-lattice sector spectra must approach
//! the quadrature densities, pinning the integral normalization from both
//! sides.

use kitaev::analytic::{vf_ground_energy_density, vl_ground_energy_density, QuadratureGrid};
use kitaev::lattice::{vortex_free_gauge, vortex_lattice_gauge, LatticeSpec};
use kitaev::majorana::{sector_spectrum, Couplings};

fn j(jx: f64, jy: f64, jz: f64) -> Couplings {
    Couplings::new(jx, jy, jz).unwrap()
}

#[test]
fn thirty_two_torus_matches_the_quadrature_densities() {
    let spec = LatticeSpec::new(32, 32).unwrap();
    let grid = QuadratureGrid::midpoint(256).unwrap();
    let cells = spec.n_plaquettes() as f64;

    // the symmetric point is the worst case: both sectors are gapless there
    for jj in [j(1.0, 1.0, 1.0), j(0.4, 0.7, 1.0)] {
        let vf = sector_spectrum(spec, &vortex_free_gauge(spec), jj)
            .unwrap()
            .ground_energy
            / cells;
        let vf_quad = vf_ground_energy_density(jj, &grid);
        assert!(
            (vf - vf_quad).abs() < 1e-3,
            "vortex-free {jj:?}: lattice {vf:.6} vs quadrature {vf_quad:.6}"
        );

        let vl = sector_spectrum(spec, &vortex_lattice_gauge(spec).unwrap(), jj)
            .unwrap()
            .ground_energy
            / cells;
        let vl_quad = vl_ground_energy_density(jj, &grid);
        assert!(
            (vl - vl_quad).abs() < 1e-3,
            "vortex-lattice {jj:?}: lattice {vl:.6} vs quadrature {vl_quad:.6}"
        );
    }
}
