//! Periodic honeycomb geometry, Z2 gauge configurations, and plaquette fluxes.
//!
//! The lattice is an `n1 x n2` torus of two-site unit cells. Cell `(sx, sy)`
//! holds an A-site and a B-site joined by its z-link; its x-link connects the
//! A-site to the B-site of cell `(sx+1, sy)` and its y-link to the B-site of
//! `(sx, sy+1)`. Every link value `u` is stored once, for the orientation
//! A-site -> B-site; traversing a link the other way negates it.
//!
//! With this storage convention the flux of a plaquette is the plain product
//! of the six stored boundary values. Walking the hexagon traverses exactly
//! three links against their stored orientation, and the resulting sign
//! cancels the sign of the Majorana-bilinear loop product, so the stored-value
//! product equals the eigenvalue of the six-site Pauli plaquette operator on
//! the corresponding spin sector (see `spin_ed::plaquette_operator`).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Unit-cell coordinates, taken modulo the lattice dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub fn new(x: usize, y: usize) -> Self {
        Cell { x, y }
    }
}

/// The three bond directions of the honeycomb lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    #[serde(rename = "x")]
    X,
    #[serde(rename = "y")]
    Y,
    #[serde(rename = "z")]
    Z,
}

impl LinkKind {
    pub const ALL: [LinkKind; 3] = [LinkKind::X, LinkKind::Y, LinkKind::Z];

    fn index(self) -> usize {
        match self {
            LinkKind::X => 0,
            LinkKind::Y => 1,
            LinkKind::Z => 2,
        }
    }
}

/// The two sites of a unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sublattice {
    A,
    B,
}

/// One oriented link, identified by its home cell and kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinkRef {
    pub cell: Cell,
    pub kind: LinkKind,
}

/// One hexagonal plaquette, identified by its home cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlaquetteRef {
    pub cell: Cell,
}

/// A boundary link of a plaquette together with its traversal direction in
/// the clockwise walk (`forward` means A -> B, the stored orientation).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryLink {
    pub link: LinkRef,
    pub forward: bool,
}

/// Periodic honeycomb lattice of `n1 x n2` unit cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeSpec {
    n1: usize,
    n2: usize,
}

impl LatticeSpec {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::EmptyLattice { n1, n2 });
        }
        Ok(LatticeSpec { n1, n2 })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn n_cells(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn n_sites(&self) -> usize {
        2 * self.n_cells()
    }

    pub fn n_links(&self) -> usize {
        3 * self.n_cells()
    }

    pub fn n_plaquettes(&self) -> usize {
        self.n_cells()
    }

    /// Tori with a single cell in some direction carry multi-links (several
    /// links joining the same site pair); they stay valid for brute-force
    /// oracles but are flagged in serialized output.
    pub fn is_degenerate(&self) -> bool {
        self.n1 == 1 || self.n2 == 1
    }

    pub fn wrap(&self, x: isize, y: isize) -> Cell {
        Cell {
            x: x.rem_euclid(self.n1 as isize) as usize,
            y: y.rem_euclid(self.n2 as isize) as usize,
        }
    }

    fn shifted(&self, c: Cell, dx: isize, dy: isize) -> Cell {
        self.wrap(c.x as isize + dx, c.y as isize + dy)
    }

    /// Row-major cell enumeration: `(0,0), (0,1), ..., (0,n2-1), (1,0), ...`
    pub fn cell_index(&self, c: Cell) -> usize {
        debug_assert!(c.x < self.n1 && c.y < self.n2);
        c.x * self.n2 + c.y
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.n1).flat_map(move |x| (0..self.n2).map(move |y| Cell { x, y }))
    }

    pub fn site_index(&self, c: Cell, sub: Sublattice) -> usize {
        2 * self.cell_index(c)
            + match sub {
                Sublattice::A => 0,
                Sublattice::B => 1,
            }
    }

    pub fn site_cell(&self, site: usize) -> (Cell, Sublattice) {
        let cell_index = site / 2;
        let cell = Cell {
            x: cell_index / self.n2,
            y: cell_index % self.n2,
        };
        let sub = if site % 2 == 0 {
            Sublattice::A
        } else {
            Sublattice::B
        };
        (cell, sub)
    }

    /// Deterministic link enumeration: cells row-major, kinds in order x, y, z.
    pub fn links(&self) -> impl Iterator<Item = LinkRef> + '_ {
        self.cells()
            .flat_map(|cell| LinkKind::ALL.into_iter().map(move |kind| LinkRef { cell, kind }))
    }

    pub fn link_index(&self, l: LinkRef) -> usize {
        3 * self.cell_index(l.cell) + l.kind.index()
    }

    pub fn contains_link(&self, l: LinkRef) -> bool {
        l.cell.x < self.n1 && l.cell.y < self.n2
    }

    /// Endpoints of a link in the stored orientation `(A-site, B-site)`.
    pub fn link_endpoints(&self, l: LinkRef) -> (usize, usize) {
        let a = self.site_index(l.cell, Sublattice::A);
        let b_cell = match l.kind {
            LinkKind::X => self.shifted(l.cell, 1, 0),
            LinkKind::Y => self.shifted(l.cell, 0, 1),
            LinkKind::Z => l.cell,
        };
        (a, self.site_index(b_cell, Sublattice::B))
    }

    /// The three links incident to a site, in kind order x, y, z.
    pub fn site_links(&self, site: usize) -> Result<[LinkRef; 3]> {
        if site >= self.n_sites() {
            return Err(Error::UnknownSite {
                site,
                n_sites: self.n_sites(),
            });
        }
        let (cell, sub) = self.site_cell(site);
        Ok(match sub {
            Sublattice::A => [
                LinkRef { cell, kind: LinkKind::X },
                LinkRef { cell, kind: LinkKind::Y },
                LinkRef { cell, kind: LinkKind::Z },
            ],
            Sublattice::B => [
                LinkRef { cell: self.shifted(cell, -1, 0), kind: LinkKind::X },
                LinkRef { cell: self.shifted(cell, 0, -1), kind: LinkKind::Y },
                LinkRef { cell, kind: LinkKind::Z },
            ],
        })
    }

    pub fn plaquettes(&self) -> impl Iterator<Item = PlaquetteRef> + '_ {
        self.cells().map(|cell| PlaquetteRef { cell })
    }

    pub fn plaquette_index(&self, p: PlaquetteRef) -> usize {
        self.cell_index(p.cell)
    }

    /// The six sites of a plaquette in clockwise walk order, starting at the
    /// A-site of its home cell.
    pub fn plaquette_sites(&self, p: PlaquetteRef) -> [usize; 6] {
        let s = p.cell;
        let ex = self.shifted(s, 1, 0);
        let ey = self.shifted(s, 0, 1);
        let exy = self.shifted(s, 1, 1);
        [
            self.site_index(s, Sublattice::A),
            self.site_index(ex, Sublattice::B),
            self.site_index(ex, Sublattice::A),
            self.site_index(exy, Sublattice::B),
            self.site_index(ey, Sublattice::A),
            self.site_index(ey, Sublattice::B),
        ]
    }

    /// Kinds of the outward link at each site of `plaquette_sites`, i.e. the
    /// one link per site not on the hexagon boundary.
    pub fn plaquette_outward_kinds() -> [LinkKind; 6] {
        [
            LinkKind::Z,
            LinkKind::Y,
            LinkKind::X,
            LinkKind::Z,
            LinkKind::Y,
            LinkKind::X,
        ]
    }

    /// The six boundary links of a plaquette in clockwise walk order, each
    /// with the direction in which the walk traverses it.
    pub fn plaquette_boundary(&self, p: PlaquetteRef) -> [BoundaryLink; 6] {
        let s = p.cell;
        let ex = self.shifted(s, 1, 0);
        let ey = self.shifted(s, 0, 1);
        [
            BoundaryLink { link: LinkRef { cell: s, kind: LinkKind::X }, forward: true },
            BoundaryLink { link: LinkRef { cell: ex, kind: LinkKind::Z }, forward: false },
            BoundaryLink { link: LinkRef { cell: ex, kind: LinkKind::Y }, forward: true },
            BoundaryLink { link: LinkRef { cell: ey, kind: LinkKind::X }, forward: false },
            BoundaryLink { link: LinkRef { cell: ey, kind: LinkKind::Z }, forward: true },
            BoundaryLink { link: LinkRef { cell: s, kind: LinkKind::Y }, forward: false },
        ]
    }

    /// The two plaquettes whose boundaries contain the given link. On
    /// degenerate tori the two coincide (the link then enters one boundary
    /// twice and flipping it changes no flux).
    pub fn plaquettes_adjacent_to(&self, l: LinkRef) -> Result<[PlaquetteRef; 2]> {
        if !self.contains_link(l) {
            return Err(Error::UnknownLink(l));
        }
        let c = l.cell;
        Ok(match l.kind {
            LinkKind::Z => [
                PlaquetteRef { cell: self.shifted(c, -1, 0) },
                PlaquetteRef { cell: self.shifted(c, 0, -1) },
            ],
            LinkKind::X => [
                PlaquetteRef { cell: c },
                PlaquetteRef { cell: self.shifted(c, 0, -1) },
            ],
            LinkKind::Y => [
                PlaquetteRef { cell: c },
                PlaquetteRef { cell: self.shifted(c, -1, 0) },
            ],
        })
    }
}

/// An assignment u = +/-1 on every oriented link of a lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeConfig {
    spec: LatticeSpec,
    values: Vec<i8>,
}

impl GaugeConfig {
    /// Uniform gauge with the given value on every link.
    pub fn uniform(spec: LatticeSpec, value: i8) -> Self {
        assert!(value == 1 || value == -1, "gauge values are +1 or -1");
        GaugeConfig {
            spec,
            values: vec![value; spec.n_links()],
        }
    }

    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    /// Stored value of a link in its canonical A -> B orientation.
    pub fn u(&self, l: LinkRef) -> Result<i8> {
        if !self.spec.contains_link(l) {
            return Err(Error::UnknownLink(l));
        }
        Ok(self.values[self.spec.link_index(l)])
    }

    /// All fluxes in plaquette enumeration order.
    pub fn fluxes(&self) -> Vec<i8> {
        self.spec.plaquettes().map(|p| plaquette_flux(self, p)).collect()
    }

    pub(crate) fn negate_link(&mut self, l: LinkRef) {
        let i = self.spec.link_index(l);
        self.values[i] = -self.values[i];
    }

    pub fn to_json(&self) -> String {
        let spec = self.spec;
        let links = spec
            .links()
            .map(|l| LinkJson {
                cell: [l.cell.x, l.cell.y],
                kind: l.kind,
                u: self.values[spec.link_index(l)],
            })
            .collect();
        let doc = GaugeJson {
            n1: spec.n1,
            n2: spec.n2,
            degenerate: if spec.is_degenerate() { Some(true) } else { None },
            links,
        };
        serde_json::to_string_pretty(&doc).expect("gauge serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GaugeJson = serde_json::from_str(text)?;
        let spec = LatticeSpec::new(doc.n1, doc.n2)?;
        let mut values: Vec<Option<i8>> = vec![None; spec.n_links()];
        for entry in &doc.links {
            let link = LinkRef {
                cell: Cell::new(entry.cell[0], entry.cell[1]),
                kind: entry.kind,
            };
            if !spec.contains_link(link) {
                return Err(Error::MalformedGauge(format!(
                    "link cell [{}, {}] outside {}x{} lattice",
                    entry.cell[0], entry.cell[1], doc.n1, doc.n2
                )));
            }
            if entry.u != 1 && entry.u != -1 {
                return Err(Error::MalformedGauge(format!("link value {} is not +/-1", entry.u)));
            }
            let idx = spec.link_index(link);
            if values[idx].is_some() {
                return Err(Error::MalformedGauge(format!("duplicate link {:?}", link)));
            }
            values[idx] = Some(entry.u);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::MalformedGauge(format!("missing link #{i}"))))
            .collect::<Result<Vec<i8>>>()?;
        Ok(GaugeConfig { spec, values })
    }
}

#[derive(Serialize, Deserialize)]
struct GaugeJson {
    n1: usize,
    n2: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    degenerate: Option<bool>,
    links: Vec<LinkJson>,
}

#[derive(Serialize, Deserialize)]
struct LinkJson {
    cell: [usize; 2],
    kind: LinkKind,
    u: i8,
}

/// The gauge with u = +1 on every link: flux +1 on every plaquette.
pub fn vortex_free_gauge(spec: LatticeSpec) -> GaugeConfig {
    GaugeConfig::uniform(spec, 1)
}

/// The gauge with the sign of every other z-link column negated: flux -1 on
/// every plaquette. Each plaquette boundary holds the z-links of two
/// x-adjacent cells, exactly one of which sits in an odd column, so all
/// fluxes flip relative to the vortex-free gauge. The alternation only
/// closes around the torus when `n1` is even.
pub fn vortex_lattice_gauge(spec: LatticeSpec) -> Result<GaugeConfig> {
    if spec.n1() % 2 != 0 {
        return Err(Error::OddColumnCount { n1: spec.n1() });
    }
    let mut g = GaugeConfig::uniform(spec, 1);
    for cell in spec.cells() {
        if cell.x % 2 == 1 {
            g.negate_link(LinkRef { cell, kind: LinkKind::Z });
        }
    }
    Ok(g)
}

/// Returns a new gauge differing from `g` on exactly the given link.
pub fn flip_link(g: &GaugeConfig, l: LinkRef) -> Result<GaugeConfig> {
    if !g.spec().contains_link(l) {
        return Err(Error::UnknownLink(l));
    }
    let mut out = g.clone();
    out.negate_link(l);
    Ok(out)
}

/// Flux through a plaquette: the product of the six stored boundary values.
///
/// Equivalently the clockwise-ordered product of oriented gauge values times
/// the sign `(-1)^3` from the three backward traversals; the stored-value
/// form is used because it matches the spin plaquette operator eigenvalue.
pub fn plaquette_flux(g: &GaugeConfig, p: PlaquetteRef) -> i8 {
    let spec = g.spec();
    let mut f = 1i8;
    for b in spec.plaquette_boundary(p) {
        f *= g.u(b.link).expect("boundary links belong to the lattice");
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flux_counts(g: &GaugeConfig) -> (usize, usize) {
        let fluxes = g.fluxes();
        let minus = fluxes.iter().filter(|&&f| f == -1).count();
        (fluxes.len() - minus, minus)
    }

    #[test]
    fn counting_formulas() {
        let spec = LatticeSpec::new(2, 2).unwrap();
        assert_eq!((spec.n_sites(), spec.n_links(), spec.n_plaquettes()), (8, 12, 4));
        let spec = LatticeSpec::new(2, 4).unwrap();
        assert_eq!((spec.n_sites(), spec.n_links(), spec.n_plaquettes()), (16, 24, 8));
        let spec = LatticeSpec::new(1, 1).unwrap();
        assert_eq!((spec.n_sites(), spec.n_links(), spec.n_plaquettes()), (2, 3, 1));
        assert!(spec.is_degenerate());
    }

    #[test]
    fn rejects_empty_lattice() {
        assert!(matches!(LatticeSpec::new(0, 3), Err(Error::EmptyLattice { .. })));
        assert!(matches!(LatticeSpec::new(4, 0), Err(Error::EmptyLattice { .. })));
    }

    #[test]
    fn smallest_torus_is_a_multilink() {
        // all three links of the (1,1) torus join the same two sites
        let spec = LatticeSpec::new(1, 1).unwrap();
        let endpoints: Vec<_> = spec.links().map(|l| spec.link_endpoints(l)).collect();
        assert_eq!(endpoints, vec![(0, 1), (0, 1), (0, 1)]);
    }

    #[test]
    fn every_site_touches_one_link_of_each_kind() {
        let spec = LatticeSpec::new(3, 4).unwrap();
        for site in 0..spec.n_sites() {
            let kinds: Vec<_> = spec.site_links(site).unwrap().iter().map(|l| l.kind).collect();
            assert_eq!(kinds, vec![LinkKind::X, LinkKind::Y, LinkKind::Z]);
            for l in spec.site_links(site).unwrap() {
                let (a, b) = spec.link_endpoints(l);
                assert!(a == site || b == site, "site link must touch the site");
            }
        }
    }

    #[test]
    fn plaquette_boundary_has_two_links_of_each_kind() {
        let spec = LatticeSpec::new(3, 3).unwrap();
        for p in spec.plaquettes() {
            let boundary = spec.plaquette_boundary(p);
            for kind in LinkKind::ALL {
                assert_eq!(boundary.iter().filter(|b| b.link.kind == kind).count(), 2);
            }
            // walk alternates stored and reversed orientation
            assert_eq!(boundary.iter().filter(|b| b.forward).count(), 3);
        }
    }

    #[test]
    fn boundary_walk_is_a_closed_hexagon() {
        let spec = LatticeSpec::new(3, 4).unwrap();
        for p in spec.plaquettes() {
            let sites = spec.plaquette_sites(p);
            let boundary = spec.plaquette_boundary(p);
            for (i, b) in boundary.iter().enumerate() {
                let (a, bb) = spec.link_endpoints(b.link);
                let (from, to) = (sites[i], sites[(i + 1) % 6]);
                if b.forward {
                    assert_eq!((a, bb), (from, to));
                } else {
                    assert_eq!((a, bb), (to, from));
                }
            }
        }
    }

    #[test]
    fn vortex_free_gauge_has_unit_flux() {
        for (n1, n2) in [(2, 2), (1, 1), (4, 4)] {
            let spec = LatticeSpec::new(n1, n2).unwrap();
            let g = vortex_free_gauge(spec);
            assert!(g.fluxes().iter().all(|&f| f == 1), "({n1},{n2})");
        }
    }

    #[test]
    fn vortex_lattice_gauge_has_negative_flux() {
        for (n1, n2) in [(2, 2), (4, 2)] {
            let spec = LatticeSpec::new(n1, n2).unwrap();
            let g = vortex_lattice_gauge(spec).unwrap();
            assert!(g.fluxes().iter().all(|&f| f == -1), "({n1},{n2})");
        }
    }

    #[test]
    fn vortex_lattice_rejects_odd_columns() {
        let spec = LatticeSpec::new(3, 2).unwrap();
        assert!(matches!(vortex_lattice_gauge(spec), Err(Error::OddColumnCount { n1: 3 })));
    }

    #[test]
    fn single_flip_creates_a_vortex_pair() {
        let spec = LatticeSpec::new(4, 4).unwrap();
        let g = vortex_free_gauge(spec);
        let flipped = flip_link(
            &g,
            LinkRef { cell: Cell::new(2, 1), kind: LinkKind::Z },
        )
        .unwrap();
        assert_eq!(flux_counts(&flipped), (14, 2));
        // the -1 plaquettes are exactly the two adjacent ones
        let adj = spec
            .plaquettes_adjacent_to(LinkRef { cell: Cell::new(2, 1), kind: LinkKind::Z })
            .unwrap();
        for p in adj {
            assert_eq!(plaquette_flux(&flipped, p), -1);
        }
    }

    #[test]
    fn flip_is_an_involution() {
        let spec = LatticeSpec::new(3, 3).unwrap();
        let g = vortex_free_gauge(spec);
        let l = LinkRef { cell: Cell::new(1, 2), kind: LinkKind::Y };
        let twice = flip_link(&flip_link(&g, l).unwrap(), l).unwrap();
        assert_eq!(twice, g);
    }

    #[test]
    fn flip_on_vortex_lattice_heals_two_plaquettes() {
        let spec = LatticeSpec::new(2, 2).unwrap();
        let g = vortex_lattice_gauge(spec).unwrap();
        let flipped = flip_link(
            &g,
            LinkRef { cell: Cell::new(0, 0), kind: LinkKind::X },
        )
        .unwrap();
        assert_eq!(flux_counts(&flipped), (2, 2));
    }

    #[test]
    fn flip_rejects_unknown_link() {
        let spec = LatticeSpec::new(2, 2).unwrap();
        let g = vortex_free_gauge(spec);
        let bad = LinkRef { cell: Cell::new(5, 0), kind: LinkKind::X };
        assert!(matches!(flip_link(&g, bad), Err(Error::UnknownLink(_))));
    }

    #[test]
    fn all_negative_gauge_on_smallest_torus() {
        // each of the three links appears twice in the single hexagon, so the
        // six sign flips cancel
        let spec = LatticeSpec::new(1, 1).unwrap();
        let g = GaugeConfig::uniform(spec, -1);
        assert_eq!(g.fluxes(), vec![1]);
    }

    #[test]
    fn json_round_trip_and_field_order() {
        let spec = LatticeSpec::new(2, 2).unwrap();
        let g = flip_link(
            &vortex_free_gauge(spec),
            LinkRef { cell: Cell::new(1, 0), kind: LinkKind::Y },
        )
        .unwrap();
        let text = g.to_json();
        assert!(text.contains("\"n1\": 2"));
        // first link entry is cell (0,0) kind x
        let first = text.find("\"cell\"").unwrap();
        assert!(text[first..].starts_with("\"cell\": [\n        0,\n        0\n      ],\n      \"kind\": \"x\""));
        let back = GaugeConfig::from_json(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn json_rejects_missing_and_duplicate_links() {
        let spec = LatticeSpec::new(1, 1).unwrap();
        let g = vortex_free_gauge(spec);
        let text = g.to_json();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        let mut trimmed = doc.clone();
        trimmed["links"].as_array_mut().unwrap().pop();
        assert!(GaugeConfig::from_json(&trimmed.to_string()).is_err());
        let mut doubled = doc;
        let repeat = doubled["links"][0].clone();
        doubled["links"].as_array_mut().unwrap().push(repeat);
        assert!(GaugeConfig::from_json(&doubled.to_string()).is_err());
    }

    #[test]
    fn degenerate_lattice_flagged_in_json() {
        let spec = LatticeSpec::new(1, 2).unwrap();
        let text = vortex_free_gauge(spec).to_json();
        assert!(text.contains("\"degenerate\": true"));
        let spec = LatticeSpec::new(2, 2).unwrap();
        assert!(!vortex_free_gauge(spec).to_json().contains("degenerate"));
    }

    fn arbitrary_gauge(n1: usize, n2: usize) -> impl Strategy<Value = GaugeConfig> {
        let spec = LatticeSpec::new(n1, n2).unwrap();
        proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], spec.n_links()).prop_map(
            move |values| GaugeConfig { spec, values },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn flux_product_over_torus_is_positive(g in arbitrary_gauge(3, 4)) {
            // every link enters exactly two plaquette boundaries
            let product: i32 = g.fluxes().iter().map(|&f| f as i32).product();
            prop_assert_eq!(product, 1);
        }

        #[test]
        fn flip_negates_exactly_the_adjacent_fluxes(
            g in arbitrary_gauge(3, 3),
            cell_x in 0usize..3,
            cell_y in 0usize..3,
            kind in prop_oneof![Just(LinkKind::X), Just(LinkKind::Y), Just(LinkKind::Z)],
        ) {
            let spec = g.spec();
            let l = LinkRef { cell: Cell::new(cell_x, cell_y), kind };
            let before = g.fluxes();
            let after = flip_link(&g, l).unwrap().fluxes();
            let adj = spec.plaquettes_adjacent_to(l).unwrap();
            let adj_idx: Vec<usize> = adj.iter().map(|&p| spec.plaquette_index(p)).collect();
            for (i, (b, a)) in before.iter().zip(&after).enumerate() {
                if adj_idx.contains(&i) {
                    prop_assert_eq!(*a, -b);
                } else {
                    prop_assert_eq!(*a, *b);
                }
            }
        }

        #[test]
        fn site_gauge_transformation_preserves_fluxes(
            g in arbitrary_gauge(4, 3),
            site in 0usize..24,
        ) {
            let spec = g.spec();
            let mut transformed = g.clone();
            for l in spec.site_links(site).unwrap() {
                transformed.negate_link(l);
            }
            prop_assert_eq!(transformed.fluxes(), g.fluxes());
        }
    }
}
