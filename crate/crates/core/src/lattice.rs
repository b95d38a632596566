//! Finite bipartite lattices.
//!
//! A [`LatticeGraph`] stores sites, a two-coloring into sublattices A and B,
//! and undirected bonds carrying a relative hopping weight. The physical
//! amplitude of a bond is `t * weight` unless overridden in the model
//! parameters. Generated lattices additionally carry integer positions and
//! per-axis periods, which drive unit-cell decompositions, inversions and
//! momentum phases.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sublattice {
    A,
    B,
}

impl Sublattice {
    /// The sign η: +1 on A, −1 on B.
    pub fn sign(self) -> f64 {
        match self {
            Sublattice::A => 1.0,
            Sublattice::B => -1.0,
        }
    }
}

/// An undirected bond. `origin` is the site the generator stepped from, which
/// fixes the owning unit cell on translation-invariant lattices.
#[derive(Clone, Debug, PartialEq)]
pub struct Bond {
    pub origin: usize,
    pub target: usize,
    pub weight: f64,
}

impl Bond {
    pub fn endpoints(&self) -> (usize, usize) {
        (self.origin, self.target)
    }

    pub fn touches(&self, x: usize) -> bool {
        self.origin == x || self.target == x
    }

    pub fn other(&self, x: usize) -> Option<usize> {
        if self.origin == x {
            Some(self.target)
        } else if self.target == x {
            Some(self.origin)
        } else {
            None
        }
    }
}

/// Integer embedding of a generated lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    /// One coordinate vector per site.
    pub positions: Vec<Vec<i64>>,
    /// Extent of the coordinate range along each axis.
    pub extents: Vec<i64>,
    /// Whether each axis wraps around.
    pub periodic: Vec<bool>,
}

impl Geometry {
    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    /// Displacement `to − from`, taken as the minimum image along periodic axes.
    pub fn displacement(&self, from: usize, to: usize) -> Vec<i64> {
        let a = &self.positions[from];
        let b = &self.positions[to];
        (0..self.dim())
            .map(|k| {
                let mut d = b[k] - a[k];
                if self.periodic[k] {
                    let period = self.extents[k];
                    d = d.rem_euclid(period);
                    if 2 * d > period {
                        d -= period;
                    }
                }
                d
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeGraph {
    name: String,
    sublattice: Vec<Sublattice>,
    bonds: Vec<Bond>,
    geometry: Option<Geometry>,
    /// Translation unit cells (site lists, anchor first) for generated
    /// translation-invariant lattices.
    cells: Option<Vec<Vec<usize>>>,
}

impl fmt::Display for LatticeGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl LatticeGraph {
    /// One-dimensional chain of `length` sites; `pbc` closes it into a ring.
    pub fn chain(length: usize, pbc: bool) -> Result<Self> {
        if length < 2 {
            return Err(Error::InvalidLattice(format!(
                "chain needs at least 2 sites, got {length}"
            )));
        }
        let mut g = Self::hypercube(&[length], pbc)?;
        g.name = format!("chain({length},{})", if pbc { "pbc" } else { "open" });
        Ok(g)
    }

    /// Star graph: center site 0 on sublattice B and `k` leaves on A.
    pub fn star(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidLattice("star needs at least one leaf".into()));
        }
        let mut sublattice = vec![Sublattice::A; k + 1];
        sublattice[0] = Sublattice::B;
        let bonds = (1..=k)
            .map(|leaf| Bond {
                origin: 0,
                target: leaf,
                weight: 1.0,
            })
            .collect();
        Self::assemble(format!("star({k})"), sublattice, bonds, None, None)
    }

    /// Hypercubic lattice with the given side lengths. Sites are numbered
    /// lexicographically with axis 0 running fastest.
    ///
    /// Periodic sides must be even. A periodic side of length 2 produces two
    /// parallel bonds between the same pair, which are merged into one bond of
    /// weight 2.
    pub fn hypercube(dims: &[usize], pbc: bool) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidLattice(format!(
                "bad hypercube sides {dims:?}"
            )));
        }
        if pbc {
            if let Some(&odd) = dims.iter().find(|&&d| d % 2 == 1) {
                return Err(Error::NotBipartite(format!(
                    "periodic side of odd length {odd}"
                )));
            }
        }
        let n: usize = dims.iter().product();
        let strides: Vec<usize> = dims
            .iter()
            .scan(1usize, |acc, &d| {
                let s = *acc;
                *acc *= d;
                Some(s)
            })
            .collect();
        let coords = |site: usize| -> Vec<i64> {
            dims.iter()
                .zip(&strides)
                .map(|(&d, &s)| ((site / s) % d) as i64)
                .collect()
        };
        let positions: Vec<Vec<i64>> = (0..n).map(coords).collect();
        let sublattice = positions
            .iter()
            .map(|p| {
                if p.iter().sum::<i64>() % 2 == 0 {
                    Sublattice::A
                } else {
                    Sublattice::B
                }
            })
            .collect();
        let mut bonds = Vec::new();
        for (site, pos) in positions.iter().enumerate() {
            for (axis, (&d, &s)) in dims.iter().zip(&strides).enumerate() {
                let c = pos[axis] as usize;
                let target = if c + 1 < d {
                    site + s
                } else if pbc && d > 1 {
                    site + s - d * s
                } else {
                    continue;
                };
                bonds.push(Bond {
                    origin: site,
                    target,
                    weight: 1.0,
                });
            }
        }
        let geometry = Geometry {
            positions,
            extents: dims.iter().map(|&d| d as i64).collect(),
            periodic: vec![pbc; dims.len()],
        };
        let cells = (0..n).map(|x| vec![x]).collect();
        let name = format!(
            "hypercube({},{})",
            dims.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("x"),
            if pbc { "pbc" } else { "open" }
        );
        Self::assemble(name, sublattice, bonds, Some(geometry), Some(cells))
    }

    /// Two-dimensional Lieb lattice of `lx × ly` three-site cells.
    ///
    /// Positions use doubled coordinates: the corner of cell (i, j) sits at
    /// (2i, 2j) on sublattice B, the two edge centers at (2i+1, 2j) and
    /// (2i, 2j+1) on sublattice A. Site `3c` is the corner of cell `c`, sites
    /// `3c+1` and `3c+2` its edge centers; cells are numbered with i fastest.
    pub fn lieb2d(lx: usize, ly: usize, pbc: bool) -> Result<Self> {
        if lx == 0 || ly == 0 {
            return Err(Error::InvalidLattice(
                "Lieb lattice needs lx, ly >= 1".into(),
            ));
        }
        let n = 3 * lx * ly;
        if pbc && n % 2 == 1 {
            return Err(Error::OddSiteCount(n));
        }
        let cell = |i: usize, j: usize| i + lx * j;
        let mut positions = vec![Vec::new(); n];
        let mut sublattice = vec![Sublattice::A; n];
        let mut bonds = Vec::new();
        let mut cells = Vec::with_capacity(lx * ly);
        for j in 0..ly {
            for i in 0..lx {
                let c = cell(i, j);
                let (corner, xedge, yedge) = (3 * c, 3 * c + 1, 3 * c + 2);
                let (x, y) = (2 * i as i64, 2 * j as i64);
                positions[corner] = vec![x, y];
                positions[xedge] = vec![x + 1, y];
                positions[yedge] = vec![x, y + 1];
                sublattice[corner] = Sublattice::B;
                cells.push(vec![corner, xedge, yedge]);
                let bond = |origin, target| Bond {
                    origin,
                    target,
                    weight: 1.0,
                };
                bonds.push(bond(corner, xedge));
                bonds.push(bond(corner, yedge));
                if i + 1 < lx {
                    bonds.push(bond(xedge, 3 * cell(i + 1, j)));
                } else if pbc {
                    bonds.push(bond(xedge, 3 * cell(0, j)));
                }
                if j + 1 < ly {
                    bonds.push(bond(yedge, 3 * cell(i, j + 1)));
                } else if pbc {
                    bonds.push(bond(yedge, 3 * cell(i, 0)));
                }
            }
        }
        let geometry = Geometry {
            positions,
            extents: vec![2 * lx as i64, 2 * ly as i64],
            periodic: vec![pbc, pbc],
        };
        let name = format!("lieb2d({lx}x{ly},{})", if pbc { "pbc" } else { "open" });
        Self::assemble(name, sublattice, bonds, Some(geometry), Some(cells))
    }

    /// A graph from an explicit edge list `(x, y, weight)` and an explicit
    /// bipartition. Inconsistent labels are rejected, never repaired.
    pub fn custom(
        name: impl Into<String>,
        sublattice: Vec<Sublattice>,
        edges: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let n = sublattice.len();
        if n == 0 {
            return Err(Error::InvalidLattice("graph has no sites".into()));
        }
        let mut bonds = Vec::with_capacity(edges.len());
        for &(x, y, w) in edges {
            if x >= n || y >= n {
                return Err(Error::InvalidLattice(format!(
                    "edge ({x},{y}) references a site outside 0..{n}"
                )));
            }
            if !w.is_finite() {
                return Err(Error::InvalidLattice(format!(
                    "edge ({x},{y}) has weight {w}"
                )));
            }
            bonds.push(Bond {
                origin: x,
                target: y,
                weight: w,
            });
        }
        Self::assemble(name.into(), sublattice, bonds, None, None)
    }

    fn assemble(
        name: String,
        sublattice: Vec<Sublattice>,
        raw: Vec<Bond>,
        geometry: Option<Geometry>,
        cells: Option<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        let n = sublattice.len();
        if n > 32 {
            return Err(Error::InvalidLattice(format!(
                "{n} sites exceed the 32-site limit of the occupation encoding"
            )));
        }
        let mut merged: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut bonds: Vec<Bond> = Vec::with_capacity(raw.len());
        for b in raw {
            if b.origin == b.target {
                return Err(Error::NotBipartite(format!(
                    "self-loop at site {}",
                    b.origin
                )));
            }
            if sublattice[b.origin] == sublattice[b.target] {
                return Err(Error::NotBipartite(format!(
                    "bond ({},{}) joins two sites of sublattice {:?}",
                    b.origin, b.target, sublattice[b.origin]
                )));
            }
            let key = (b.origin.min(b.target), b.origin.max(b.target));
            match merged.get(&key) {
                Some(&i) => bonds[i].weight += b.weight,
                None => {
                    merged.insert(key, bonds.len());
                    bonds.push(b);
                }
            }
        }
        bonds.retain(|b| b.weight != 0.0);
        let graph = LatticeGraph {
            name,
            sublattice,
            bonds,
            geometry,
            cells,
        };
        if !graph.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(graph)
    }

    fn is_connected(&self) -> bool {
        let n = self.num_sites();
        let adjacency = self.adjacency();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_sites(&self) -> usize {
        self.sublattice.len()
    }

    pub fn sublattice(&self, x: usize) -> Sublattice {
        self.sublattice[x]
    }

    pub fn sublattices(&self) -> &[Sublattice] {
        &self.sublattice
    }

    /// Sublattice sign η_x.
    pub fn eta(&self, x: usize) -> f64 {
        self.sublattice[x].sign()
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn geometry(&self) -> Option<&Geometry> {
        self.geometry.as_ref()
    }

    /// Neighbor lists `(site, weight)` for every site.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.num_sites()];
        for b in &self.bonds {
            adj[b.origin].push((b.target, b.weight));
            adj[b.target].push((b.origin, b.weight));
        }
        for list in &mut adj {
            list.sort_by_key(|&(y, _)| y);
        }
        adj
    }

    pub fn count(&self, s: Sublattice) -> usize {
        self.sublattice.iter().filter(|&&l| l == s).count()
    }

    /// Sublattice imbalance ||Λ_A| − |Λ_B|| / 2, the total spin of the
    /// repulsive half-filled ground state.
    pub fn imbalance_spin(&self) -> f64 {
        let a = self.count(Sublattice::A) as f64;
        let b = self.count(Sublattice::B) as f64;
        (a - b).abs() / 2.0
    }

    /// Fraction of sites on the smaller sublattice.
    pub fn minority_fraction(&self) -> f64 {
        let a = self.count(Sublattice::A);
        let b = self.count(Sublattice::B);
        a.min(b) as f64 / self.num_sites() as f64
    }

    /// Largest number of neighbors of any site.
    pub fn max_coordination(&self) -> usize {
        self.adjacency().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Whether the lattice carries a translation group: generated with
    /// geometry, unit cells, and every axis periodic.
    pub fn is_translation_invariant(&self) -> bool {
        match (&self.geometry, &self.cells) {
            (Some(g), Some(_)) => g.periodic.iter().all(|&p| p),
            _ => false,
        }
    }

    /// Decomposition into disjoint unit cells with bond ownership.
    ///
    /// Generated lattices use their translation cells (one site for chains
    /// and hypercubes, three for the Lieb lattice) and assign each bond to the
    /// cell of its origin, so all cells carry congruent terms even across a
    /// periodic boundary. Other graphs use one-site cells and assign each bond
    /// to its smaller endpoint.
    pub fn unit_cells(&self) -> UnitCellDecomposition {
        let n = self.num_sites();
        let (cells, by_origin) = match &self.cells {
            Some(c) => (c.clone(), true),
            None => ((0..n).map(|x| vec![x]).collect::<Vec<_>>(), false),
        };
        let mut site_cell = vec![0; n];
        for (c, members) in cells.iter().enumerate() {
            for &x in members {
                site_cell[x] = c;
            }
        }
        let bond_cell: Vec<usize> = self
            .bonds
            .iter()
            .map(|b| {
                let owner = if by_origin {
                    b.origin
                } else {
                    b.origin.min(b.target)
                };
                site_cell[owner]
            })
            .collect();
        let supports = cells
            .iter()
            .enumerate()
            .map(|(c, members)| {
                let mut s: Vec<usize> = members.clone();
                for (b, &owner) in self.bonds.iter().zip(&bond_cell) {
                    if owner == c {
                        s.push(b.origin);
                        s.push(b.target);
                    }
                }
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        UnitCellDecomposition {
            cells,
            site_cell,
            bond_cell,
            supports,
        }
    }

    /// Spatial inversion through the position of site `center`:
    /// r ↦ 2 r_center − r, wrapped along periodic axes. The map must send
    /// sites to sites, preserve the sublattice labels and carry bonds onto
    /// bonds of equal weight.
    pub fn inversion(&self, center: usize) -> Result<InversionMap> {
        let geom = self
            .geometry
            .as_ref()
            .ok_or_else(|| Error::Symmetry(format!("{} has no spatial embedding", self.name)))?;
        if center >= self.num_sites() {
            return Err(Error::OutOfRange(format!("inversion center {center}")));
        }
        let index: HashMap<&[i64], usize> = geom
            .positions
            .iter()
            .enumerate()
            .map(|(x, p)| (p.as_slice(), x))
            .collect();
        let c = &geom.positions[center];
        let mut perm = Vec::with_capacity(self.num_sites());
        for (x, p) in geom.positions.iter().enumerate() {
            let image: Vec<i64> = (0..geom.dim())
                .map(|k| {
                    let v = 2 * c[k] - p[k];
                    if geom.periodic[k] {
                        v.rem_euclid(geom.extents[k])
                    } else {
                        v
                    }
                })
                .collect();
            let y = *index.get(image.as_slice()).ok_or_else(|| {
                Error::Symmetry(format!("inversion sends site {x} outside the lattice"))
            })?;
            if self.sublattice[y] != self.sublattice[x] {
                return Err(Error::Symmetry(format!(
                    "inversion exchanges sublattices at site {x}"
                )));
            }
            perm.push(y);
        }
        let weights: HashMap<(usize, usize), f64> = self
            .bonds
            .iter()
            .map(|b| ((b.origin.min(b.target), b.origin.max(b.target)), b.weight))
            .collect();
        for b in &self.bonds {
            let (x, y) = (perm[b.origin], perm[b.target]);
            match weights.get(&(x.min(y), x.max(y))) {
                Some(&w) if w == b.weight => {}
                _ => {
                    return Err(Error::Symmetry(format!(
                        "inversion does not preserve bond ({},{})",
                        b.origin, b.target
                    )))
                }
            }
        }
        Ok(InversionMap { center, perm })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitCellDecomposition {
    /// Member sites of each cell, anchor first.
    pub cells: Vec<Vec<usize>>,
    /// Cell index of every site.
    pub site_cell: Vec<usize>,
    /// Owning cell of every bond, aligned with [`LatticeGraph::bonds`].
    pub bond_cell: Vec<usize>,
    /// Sites touched by each cell's local Hamiltonian.
    pub supports: Vec<Vec<usize>>,
}

impl UnitCellDecomposition {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InversionMap {
    pub center: usize,
    /// Image of every site.
    pub perm: Vec<usize>,
}

impl InversionMap {
    pub fn apply(&self, x: usize) -> usize {
        self.perm[x]
    }
}
