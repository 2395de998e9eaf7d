//! Closed-form dispersions, energy densities, gaps, and gapless-phase
//! predicates for the vortex-free and vortex-lattice sectors.
//!
//! Vortex-free sector: one band `|f(p)|` with
//! `f(p) = 2 (Jx e^{i px} + Jy e^{i py} + Jz)` over the square-lattice zone
//! `p in [-pi, pi]^2`.
//!
//! Vortex-lattice sector: the staggered z-link signs couple each momentum `p`
//! to its companion `p~ = (px + pi, py)`. Writing
//! `M(p) = 2 Jx e^{i px} + 2 Jy e^{i py}` and `N = 2 Jz`, the coupled pair
//! block reduces to the 2x2 problem `C = [[M(p), N], [N, M(p~)]]` whose
//! singular values are the two band energies:
//!
//! ```text
//! |A|, |B| = sqrt( ( |M|^2 + |M~|^2 + 2 N^2 +/- sqrt(D) ) / 2 ),
//! D = (|M|^2 - |M~|^2)^2 + 4 N^2 |M(p) + conj(M(p~))|^2.
//! ```
//!
//! `|A| >= |B|` always (adding a positive real to a number with non-negative
//! real part grows the modulus), `|A|` never vanishes while `Jz > 0`, and
//! `|B| = 0` exactly when `M(p) M(p~) = N^2`, which is solvable precisely
//! when the three squared triangle inequalities hold.
//!
//! All densities use the measure `(2 pi)^{-2} d^2p` per unit cell, so the
//! dimer limit `Jx = Jy = 0` gives exactly `-Jz` per plaquette.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::majorana::Couplings;
use crate::{Error, Result};

/// Crystal momentum on the effective square lattice, components in
/// `[-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Momentum {
    pub px: f64,
    pub py: f64,
}

impl Momentum {
    pub fn new(px: f64, py: f64) -> Self {
        Momentum { px, py }
    }

    /// The companion momentum `(px + pi, py)` folded back into the zone.
    pub fn companion(&self) -> Momentum {
        Momentum {
            px: fold(self.px + PI),
            py: self.py,
        }
    }
}

fn fold(x: f64) -> f64 {
    let mut v = (x + PI).rem_euclid(2.0 * PI) - PI;
    if v < -PI {
        v += 2.0 * PI;
    }
    v
}

/// Which of the two analytically solved sectors a momentum-space quantity
/// refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    VortexFree,
    VortexLattice,
}

/// Periodic quadrature rule; for periodic integrands both rules converge
/// spectrally and agree on translated node sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureRule {
    Midpoint,
    Trapezoid,
}

/// Uniform Brillouin-zone grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub mx: usize,
    pub my: usize,
    pub rule: QuadratureRule,
}

impl QuadratureGrid {
    pub const MIN_POINTS: usize = 4;

    pub fn new(mx: usize, my: usize, rule: QuadratureRule) -> Result<Self> {
        if mx < Self::MIN_POINTS || my < Self::MIN_POINTS {
            return Err(Error::GridTooCoarse {
                mx,
                my,
                min: Self::MIN_POINTS,
            });
        }
        Ok(QuadratureGrid { mx, my, rule })
    }

    pub fn midpoint(m: usize) -> Result<Self> {
        Self::new(m, m, QuadratureRule::Midpoint)
    }

    fn node(&self, i: usize, m: usize) -> f64 {
        let step = 2.0 * PI / m as f64;
        match self.rule {
            QuadratureRule::Midpoint => -PI + (i as f64 + 0.5) * step,
            QuadratureRule::Trapezoid => -PI + i as f64 * step,
        }
    }

    fn nodes_x(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.mx).map(|i| self.node(i, self.mx))
    }

    fn nodes_y(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.my).map(|i| self.node(i, self.my))
    }

    /// Zone average of a function over the full grid.
    fn average(&self, mut f: impl FnMut(Momentum) -> f64) -> f64 {
        let mut total = 0.0;
        for px in self.nodes_x() {
            for py in self.nodes_y() {
                total += f(Momentum { px, py });
            }
        }
        total / (self.mx * self.my) as f64
    }

    /// Best grid point of a function (minimum value and its momentum).
    fn minimum(&self, mut f: impl FnMut(Momentum) -> f64) -> (f64, Momentum) {
        let mut best = (f64::INFINITY, Momentum::new(0.0, 0.0));
        for px in self.nodes_x() {
            for py in self.nodes_y() {
                let p = Momentum { px, py };
                let v = f(p);
                if v < best.0 {
                    best = (v, p);
                }
            }
        }
        best
    }
}

/// Vortex-free dispersion amplitude `f(p) = 2 (Jx e^{i px} + Jy e^{i py} + Jz)`.
pub fn f_vf(p: Momentum, j: Couplings) -> Complex64 {
    2.0 * (j.jx * Complex64::new(0.0, p.px).exp()
        + j.jy * Complex64::new(0.0, p.py).exp()
        + j.jz)
}

/// Fermionic gap of the vortex-free sector: grid-seeded, descent-refined
/// minimum of `|f|`.
pub fn vf_gap(j: Couplings, grid: &QuadratureGrid) -> f64 {
    let f = |p: Momentum| f_vf(p, j).norm();
    let (_, seed) = grid.minimum(f);
    let (v, _) = refine_minimum(f, seed, 2.0 * PI / grid.mx.min(grid.my) as f64);
    v.max(0.0)
}

/// The three triangle inequalities (boundary inclusive) that delimit the
/// gapless phase of the vortex-free sector.
pub fn vf_is_gapless(j: Couplings) -> bool {
    j.jx <= j.jy + j.jz && j.jy <= j.jz + j.jx && j.jz <= j.jx + j.jy
}

/// Ground-state energy per unit cell of the vortex-free sector,
/// `-(1/2) (2 pi)^{-2} integral |f(p)| d^2 p`.
pub fn vf_ground_energy_density(j: Couplings, grid: &QuadratureGrid) -> f64 {
    -0.5 * grid.average(|p| f_vf(p, j).norm())
}

/// The pair of band energies of the vortex-lattice sector at one momentum,
/// sorted `a_abs >= b_abs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPair {
    pub a_abs: f64,
    pub b_abs: f64,
}

fn m_of(p: Momentum, j: Couplings) -> Complex64 {
    2.0 * (j.jx * Complex64::new(0.0, p.px).exp() + j.jy * Complex64::new(0.0, p.py).exp())
}

/// Vortex-lattice band energies from the closed form. Near the singular
/// locus `|M(p) + conj(M(p~))| < 1e-8 (Jx+Jy+Jz)` of the transformation the
/// value is taken from the coupled-block diagonalization instead.
pub fn vl_bands(p: Momentum, j: Couplings) -> BandPair {
    let m = m_of(p, j);
    let mt = m_of(p.companion(), j);
    let coupling = (m + mt.conj()).norm();
    if coupling < 1e-8 * j.sum() {
        return vl_bands_block(p, j);
    }
    vl_bands_closed_form(p, j)
}

/// The closed-form route on its own (no singular-point fallback).
pub fn vl_bands_closed_form(p: Momentum, j: Couplings) -> BandPair {
    let m = m_of(p, j);
    let mt = m_of(p.companion(), j);
    let n = 2.0 * j.jz;
    let (m2, mt2) = (m.norm_sqr(), mt.norm_sqr());
    let trace = m2 + mt2 + 2.0 * n * n;
    let disc = (m2 - mt2).powi(2) + 4.0 * n * n * (m + mt.conj()).norm_sqr();
    let root = disc.sqrt();
    BandPair {
        a_abs: (0.5 * (trace + root)).sqrt(),
        b_abs: (0.5 * (trace - root)).max(0.0).sqrt(),
    }
}

/// Band energies from the 4x4 coupled `(p, p~)` Majorana block: the
/// Hermitian matrix `i A(p)` in the basis `(c_A(p), c_B(p), c_A(p~), c_B(p~))`
/// has eigenvalues `{ +/-|A|, +/-|B| }`. This is the numerically robust dual
/// route used as the fallback at singular points of the transformation.
pub fn vl_bands_block(p: Momentum, j: Couplings) -> BandPair {
    let m = m_of(p, j);
    let mt = m_of(p.companion(), j);
    let n = Complex64::new(2.0 * j.jz, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    #[rustfmt::skip]
    let block = nalgebra::DMatrix::<Complex64>::from_row_slice(4, 4, &[
        zero,          i * m,  zero,           i * n,
        -i * m.conj(), zero,   -i * n,         zero,
        zero,          i * n,  zero,           i * mt,
        -i * n,        zero,   -i * mt.conj(), zero,
    ]);
    let mut ev: Vec<f64> = block.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    BandPair {
        a_abs: ev[3],
        b_abs: ev[2].max(0.0),
    }
}

/// Fermionic gap of the vortex-lattice sector: minimum of the lower band over
/// the zone (`|A| >= |B|`, so this is the overall band minimum).
pub fn vl_gap(j: Couplings, grid: &QuadratureGrid) -> f64 {
    let f = |p: Momentum| vl_bands(p, j).b_abs;
    let (_, seed) = grid.minimum(f);
    let (v, _) = refine_minimum(f, seed, 2.0 * PI / grid.mx.min(grid.my) as f64);
    v.max(0.0)
}

/// The three squared triangle inequalities (boundary inclusive) that delimit
/// the gapless phase of the vortex-lattice sector.
pub fn vl_is_gapless(j: Couplings) -> bool {
    let (x2, y2, z2) = (j.jx * j.jx, j.jy * j.jy, j.jz * j.jz);
    x2 + y2 >= z2 && y2 + z2 >= x2 && z2 + x2 >= y2
}

/// Ground-state energy per unit cell of the vortex-lattice sector,
/// `-(2 pi)^{-2} integral over the halved zone of (|A| + |B|)/2`.
///
/// Both bands are invariant under `px -> px + pi`, so the halved-zone
/// integral equals the full-zone average of `(|A| + |B|)/4`; using the full
/// grid keeps the node set identical to the vortex-free quadrature, which
/// makes the coupling-edge equalities between the two densities exact.
pub fn vl_ground_energy_density(j: Couplings, grid: &QuadratureGrid) -> f64 {
    -0.25
        * grid.average(|p| {
            let bands = vl_bands(p, j);
            bands.a_abs + bands.b_abs
        })
}

/// Energy of one non-interacting vortex pair, estimated from the densities:
/// the vortex-lattice carries one vortex per unit cell, so a pair costs twice
/// the per-cell density difference.
pub fn anyon_pair_gap(j: Couplings, grid: &QuadratureGrid) -> f64 {
    2.0 * (vl_ground_energy_density(j, grid) - vf_ground_energy_density(j, grid))
}

/// Zero-gap momenta of the requested sector, deduplicated by zone
/// periodicity; empty in the gapped phase. Gapless phases away from their
/// boundaries carry exactly two such conical points.
pub fn fermi_points(sector: Sector, j: Couplings, grid: &QuadratureGrid) -> Vec<Momentum> {
    let gapless = match sector {
        Sector::VortexFree => vf_is_gapless(j),
        Sector::VortexLattice => vl_is_gapless(j),
    };
    if !gapless || j.sum() == 0.0 {
        return Vec::new();
    }
    let f = |p: Momentum| match sector {
        Sector::VortexFree => f_vf(p, j).norm(),
        Sector::VortexLattice => vl_bands(p, j).b_abs,
    };

    // refine from the best grid points and keep the refined zeros
    let mut seeds: Vec<(f64, Momentum)> = Vec::new();
    for px in grid.nodes_x() {
        for py in grid.nodes_y() {
            let p = Momentum { px, py };
            seeds.push((f(p), p));
        }
    }
    seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite band values"));
    seeds.truncate(24);

    let zero_tol = 1e-6 * j.sum();
    let step = 2.0 * PI / grid.mx.min(grid.my) as f64;
    let mut points: Vec<Momentum> = Vec::new();
    for (_, seed) in seeds {
        let (v, p) = refine_minimum(f, seed, step);
        if v >= zero_tol {
            continue;
        }
        let canonical = canonical_point(sector, p);
        if !points
            .iter()
            .any(|q| periodic_distance(sector, *q, canonical) < 1e-4)
        {
            points.push(canonical);
        }
    }
    points.sort_by(|a, b| {
        (a.px, a.py)
            .partial_cmp(&(b.px, b.py))
            .expect("finite momenta")
    });
    points
}

/// Momenta folded into the zone; vortex-lattice points additionally land in
/// the halved zone `px in [-pi/2, pi/2)` since `p` and its companion label
/// the same band pair.
fn canonical_point(sector: Sector, p: Momentum) -> Momentum {
    let mut px = fold(p.px);
    let py = fold(p.py);
    if sector == Sector::VortexLattice && !(-PI / 2.0..PI / 2.0).contains(&px) {
        px = fold(px + PI);
    }
    Momentum { px, py }
}

fn periodic_distance(sector: Sector, a: Momentum, b: Momentum) -> f64 {
    let period_x = match sector {
        Sector::VortexFree => 2.0 * PI,
        Sector::VortexLattice => PI,
    };
    let dx = (a.px - b.px).rem_euclid(period_x);
    let dx = dx.min(period_x - dx);
    let dy = (a.py - b.py).rem_euclid(2.0 * PI);
    let dy = dy.min(2.0 * PI - dy);
    dx.hypot(dy)
}

/// Nelder-Mead refinement of a 2-d minimum from a seed point. The band
/// surfaces are smooth away from isolated cones, where grid minima alone
/// systematically overestimate gaps; the simplex contracts onto the cone tip
/// at a linear rate, which is enough for the gap tolerances used here.
fn refine_minimum(f: impl Fn(Momentum) -> f64, seed: Momentum, scale: f64) -> (f64, Momentum) {
    let eval = |x: [f64; 2]| f(Momentum::new(x[0], x[1]));
    let mut simplex = [
        [seed.px, seed.py],
        [seed.px + scale, seed.py],
        [seed.px, seed.py + scale],
    ];
    let mut values = simplex.map(eval);

    for _ in 0..250 {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
        let (best, mid, worst) = (order[0], order[1], order[2]);
        if (values[worst] - values[best]).abs() < 1e-14
            && sub(simplex[worst], simplex[best]).iter().all(|d| d.abs() < 1e-13)
        {
            break;
        }
        let centroid = [
            0.5 * (simplex[best][0] + simplex[mid][0]),
            0.5 * (simplex[best][1] + simplex[mid][1]),
        ];
        let reflected = add(centroid, sub(centroid, simplex[worst]));
        let fr = eval(reflected);
        if fr < values[best] {
            let expanded = add(centroid, scale2(sub(centroid, simplex[worst]), 2.0));
            let fe = eval(expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[mid] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = add(centroid, scale2(sub(simplex[worst], centroid), 0.5));
            let fc = eval(contracted);
            if fc < values[worst] {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                for i in [mid, worst] {
                    simplex[i] = add(simplex[best], scale2(sub(simplex[i], simplex[best]), 0.5));
                    values[i] = eval(simplex[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..3 {
        if values[i] < values[best] {
            best = i;
        }
    }
    (values[best], Momentum::new(simplex[best][0], simplex[best][1]))
}

fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn scale2(a: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] * s, a[1] * s]
}
