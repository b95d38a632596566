use std::fmt;
use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

/// Occupation word: bit `m` set iff mode `m` is occupied. Modes `0..L` are
/// spin up by site, modes `L..2L` spin down by site.
pub type Config = u64;

pub const MAX_SITES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// Mode index of `(site, spin)` on a lattice of `num_sites` sites.
pub fn mode(site: usize, spin: Spin, num_sites: usize) -> usize {
    match spin {
        Spin::Up => site,
        Spin::Down => site + num_sites,
    }
}

/// Particle numbers of a configuration.
pub fn counts(config: Config, num_sites: usize) -> (usize, usize) {
    let up_mask = (1u64 << num_sites) - 1;
    (
        (config & up_mask).count_ones() as usize,
        (config >> num_sites).count_ones() as usize,
    )
}

pub fn is_occupied(config: Config, site: usize, spin: Spin, num_sites: usize) -> bool {
    config >> mode(site, spin, num_sites) & 1 == 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SectorKey {
    pub n_up: usize,
    pub n_down: usize,
}

impl SectorKey {
    pub fn new(n_up: usize, n_down: usize) -> Self {
        SectorKey { n_up, n_down }
    }

    pub fn total(self) -> usize {
        self.n_up + self.n_down
    }

    /// N↑ − N↓.
    pub fn tower(self) -> i64 {
        self.n_up as i64 - self.n_down as i64
    }

    pub fn parity(self) -> (Parity, Parity) {
        (Parity::of(self.n_up), Parity::of(self.n_down))
    }

    /// The key after adding `(d_up, d_down)` particles, if it stays within
    /// `0..=num_sites` for both species.
    pub fn shifted(self, d_up: i64, d_down: i64, num_sites: usize) -> Option<SectorKey> {
        let up = self.n_up as i64 + d_up;
        let down = self.n_down as i64 + d_down;
        let l = num_sites as i64;
        (0..=l).contains(&up).then_some(())?;
        (0..=l).contains(&down).then_some(())?;
        Some(SectorKey::new(up as usize, down as usize))
    }
}

impl fmt::Display for SectorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n_up, self.n_down)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Parity {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Which `(N↑, N↓)` sectors a basis keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasisRestriction {
    Full,
    /// (even, even) ∪ (odd, odd).
    Even,
    EvenEven,
    OddOdd,
    EvenOdd,
    OddEven,
    Fixed {
        n_up: usize,
        n_down: usize,
    },
    /// All sectors with N↑ + N↓ = n.
    FixedTotal(usize),
    /// All sectors with N↑ − N↓ = m.
    Tower(i64),
}

impl BasisRestriction {
    pub fn contains(&self, key: SectorKey) -> bool {
        use Parity::*;
        match *self {
            BasisRestriction::Full => true,
            BasisRestriction::Even => key.parity().0 == key.parity().1,
            BasisRestriction::EvenEven => key.parity() == (Even, Even),
            BasisRestriction::OddOdd => key.parity() == (Odd, Odd),
            BasisRestriction::EvenOdd => key.parity() == (Even, Odd),
            BasisRestriction::OddEven => key.parity() == (Odd, Even),
            BasisRestriction::Fixed { n_up, n_down } => key == SectorKey::new(n_up, n_down),
            BasisRestriction::FixedTotal(n) => key.total() == n,
            BasisRestriction::Tower(m) => key.tower() == m,
        }
    }

    pub fn keys(&self, num_sites: usize) -> Vec<SectorKey> {
        let mut keys = Vec::new();
        for n_up in 0..=num_sites {
            for n_down in 0..=num_sites {
                let key = SectorKey::new(n_up, n_down);
                if self.contains(key) {
                    keys.push(key);
                }
            }
        }
        keys
    }
}

/// Sorted configurations of one `(N↑, N↓)` sector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorBasis {
    num_sites: usize,
    key: SectorKey,
    configs: Vec<Config>,
}

impl SectorBasis {
    pub fn enumerate(num_sites: usize, n_up: usize, n_down: usize) -> Result<Self> {
        if num_sites == 0 || num_sites > MAX_SITES {
            return Err(Error::OutOfRange(format!(
                "site count {num_sites} outside 1..={MAX_SITES}"
            )));
        }
        if n_up > num_sites || n_down > num_sites {
            return Err(Error::OutOfRange(format!(
                "sector ({n_up},{n_down}) on {num_sites} sites"
            )));
        }
        let ups = combinations(num_sites, n_up);
        let downs = combinations(num_sites, n_down);
        let mut configs = Vec::with_capacity(ups.len() * downs.len());
        for &d in &downs {
            for &u in &ups {
                configs.push(d << num_sites | u);
            }
        }
        Ok(SectorBasis {
            num_sites,
            key: SectorKey::new(n_up, n_down),
            configs,
        })
    }

    pub fn key(&self) -> SectorKey {
        self.key
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn configs(&self) -> &[Config] {
        &self.configs
    }

    pub fn index_of(&self, config: Config) -> Option<usize> {
        self.configs.binary_search(&config).ok()
    }
}

/// All `k`-subsets of `0..n` as ascending bit masks.
fn combinations(n: usize, k: usize) -> Vec<Config> {
    if k == 0 {
        return vec![0];
    }
    let limit: u64 = 1u64 << n;
    let mut out = Vec::new();
    let mut v: u64 = (1u64 << k) - 1;
    while v < limit {
        out.push(v);
        // Gosper's hack: next larger word with the same popcount.
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    out
}

/// A union of sector bases, ordered by sector key. Global indices run
/// through the sectors in that order.
#[derive(Clone, Debug)]
pub struct Basis {
    num_sites: usize,
    sectors: Vec<SectorBasis>,
    offsets: Vec<usize>,
    dim: usize,
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.num_sites == other.num_sites
            && self.sectors.len() == other.sectors.len()
            && self
                .sectors
                .iter()
                .zip(&other.sectors)
                .all(|(a, b)| a.key == b.key)
    }
}

impl Eq for Basis {}

impl Basis {
    pub fn new(num_sites: usize, restriction: BasisRestriction) -> Result<Self> {
        Self::from_keys(num_sites, restriction.keys(num_sites))
    }

    pub fn sector(num_sites: usize, n_up: usize, n_down: usize) -> Result<Self> {
        Self::new(num_sites, BasisRestriction::Fixed { n_up, n_down })
    }

    /// Basis over the given sectors; duplicates are merged and order is
    /// normalized.
    pub fn from_keys(num_sites: usize, mut keys: Vec<SectorKey>) -> Result<Self> {
        if num_sites == 0 || num_sites > MAX_SITES {
            return Err(Error::OutOfRange(format!(
                "site count {num_sites} outside 1..={MAX_SITES}"
            )));
        }
        keys.sort_unstable();
        keys.dedup();
        let sectors = keys
            .iter()
            .map(|k| SectorBasis::enumerate(num_sites, k.n_up, k.n_down))
            .collect::<Result<Vec<_>>>()?;
        let mut offsets = Vec::with_capacity(sectors.len());
        let mut dim = 0;
        for s in &sectors {
            offsets.push(dim);
            dim += s.dim();
        }
        Ok(Basis {
            num_sites,
            sectors,
            offsets,
            dim,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    pub fn sectors(&self) -> &[SectorBasis] {
        &self.sectors
    }

    pub fn keys(&self) -> Vec<SectorKey> {
        self.sectors.iter().map(|s| s.key).collect()
    }

    pub fn contains_key(&self, key: SectorKey) -> bool {
        self.position_of_key(key).is_some()
    }

    fn position_of_key(&self, key: SectorKey) -> Option<usize> {
        self.sectors.binary_search_by_key(&key, |s| s.key).ok()
    }

    /// Global index range of the sector with the given key.
    pub fn range_of(&self, key: SectorKey) -> Option<Range<usize>> {
        self.position_of_key(key).map(|i| self.sector_range(i))
    }

    /// Global index range of the `i`-th sector.
    pub fn sector_range(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i] + self.sectors[i].dim()
    }

    pub fn index_of(&self, config: Config) -> Option<usize> {
        let (up, down) = counts(config, self.num_sites);
        let i = self.position_of_key(SectorKey::new(up, down))?;
        self.sectors[i]
            .index_of(config)
            .map(|j| self.offsets[i] + j)
    }

    pub fn config(&self, index: usize) -> Config {
        let i = self.sector_position(index);
        self.sectors[i].configs[index - self.offsets[i]]
    }

    /// Key of the sector holding global index `index`.
    pub fn key_of(&self, index: usize) -> SectorKey {
        self.sectors[self.sector_position(index)].key
    }

    fn sector_position(&self, index: usize) -> usize {
        assert!(
            index < self.dim,
            "basis index {index} out of range {}",
            self.dim
        );
        self.offsets.partition_point(|&o| o <= index) - 1
    }

    pub fn configs(&self) -> impl Iterator<Item = Config> + '_ {
        self.sectors.iter().flat_map(|s| s.configs.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn sector_dimensions() {
        assert_eq!(SectorBasis::enumerate(2, 1, 0).unwrap().dim(), 2);
        assert_eq!(SectorBasis::enumerate(4, 2, 2).unwrap().dim(), 36);
        assert_eq!(SectorBasis::enumerate(8, 4, 4).unwrap().dim(), 4900);
    }

    #[test]
    fn configs_sorted_with_right_counts() {
        for l in 1..=6 {
            for u in 0..=l {
                for d in 0..=l {
                    let s = SectorBasis::enumerate(l, u, d).unwrap();
                    assert_eq!(s.dim(), binomial(l, u) * binomial(l, d));
                    assert!(s.configs().windows(2).all(|w| w[0] < w[1]));
                    assert!(s.configs().iter().all(|&c| counts(c, l) == (u, d)));
                }
            }
        }
    }

    #[test]
    fn full_basis_covers_fock_space() {
        let b = Basis::new(3, BasisRestriction::Full).unwrap();
        assert_eq!(b.dim(), 64);
        for i in 0..b.dim() {
            assert_eq!(b.index_of(b.config(i)), Some(i));
        }
    }

    #[test]
    fn parity_blocks_partition_full() {
        let l = 4;
        let total: usize = [
            BasisRestriction::EvenEven,
            BasisRestriction::OddOdd,
            BasisRestriction::EvenOdd,
            BasisRestriction::OddEven,
        ]
        .iter()
        .map(|r| Basis::new(l, *r).unwrap().dim())
        .sum();
        assert_eq!(total, 256);
        assert_eq!(
            Basis::new(l, BasisRestriction::Even).unwrap().dim(),
            Basis::new(l, BasisRestriction::EvenEven).unwrap().dim()
                + Basis::new(l, BasisRestriction::OddOdd).unwrap().dim()
        );
    }

    #[test]
    fn out_of_range_sector() {
        assert!(SectorBasis::enumerate(2, 3, 0).is_err());
        assert!(Basis::sector(33, 0, 0).is_err());
    }

    #[test]
    fn shifted_keys_stay_in_range() {
        let k = SectorKey::new(2, 0);
        assert_eq!(k.shifted(1, 0, 3), Some(SectorKey::new(3, 0)));
        assert_eq!(k.shifted(0, -1, 3), None);
        assert_eq!(k.shifted(2, 0, 3), None);
    }
}
