//! Finite boxes in `Z^d` with nearest-neighbour adjacency and the L1 graph metric.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A box `[0, e_0) x ... x [0, e_{d-1})` in `Z^d`, sites indexed row-major.
///
/// No periodic wrap: boundary sites have fewer than `2d` neighbours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    extents: Vec<usize>,
    strides: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
}

impl Lattice {
    pub fn new_box(extents: &[usize]) -> Result<Self> {
        if extents.is_empty() {
            return Err(Error::EmptyExtents);
        }
        if let Some(axis) = extents.iter().position(|&e| e == 0) {
            return Err(Error::ZeroExtent { axis });
        }
        let d = extents.len();
        let mut strides = vec![1; d];
        for k in (0..d.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * extents[k + 1];
        }
        let len: usize = extents.iter().product();
        let mut lat = Lattice {
            extents: extents.to_vec(),
            strides,
            neighbors: Vec::with_capacity(len),
        };
        for site in 0..len {
            let c = lat.coords_unchecked(site);
            let mut nb = Vec::with_capacity(2 * d);
            for k in 0..d {
                if c[k] > 0 {
                    nb.push(site - lat.strides[k]);
                }
                if c[k] + 1 < extents[k] {
                    nb.push(site + lat.strides[k]);
                }
            }
            nb.sort_unstable();
            lat.neighbors.push(nb);
        }
        Ok(lat)
    }

    /// A 1D chain of `n` sites.
    pub fn chain(n: usize) -> Result<Self> {
        Self::new_box(&[n])
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, site: usize) -> &[usize] {
        &self.neighbors[site]
    }

    pub fn degree(&self, site: usize) -> usize {
        self.neighbors[site].len()
    }

    /// Unordered nearest-neighbour pairs `(i, j)` with `i < j`, each edge once.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn coords(&self, site: usize) -> Result<Vec<usize>> {
        self.check(site)?;
        Ok(self.coords_unchecked(site))
    }

    pub fn site_at(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: coords.len(),
            });
        }
        let mut site = 0;
        for (k, &c) in coords.iter().enumerate() {
            if c >= self.extents[k] {
                return Err(Error::SiteOutOfRange {
                    site: c,
                    len: self.extents[k],
                });
            }
            site += c * self.strides[k];
        }
        Ok(site)
    }

    fn coords_unchecked(&self, site: usize) -> Vec<usize> {
        self.strides
            .iter()
            .zip(&self.extents)
            .map(|(&s, &e)| (site / s) % e)
            .collect()
    }

    fn check(&self, site: usize) -> Result<()> {
        if site < self.len() {
            Ok(())
        } else {
            Err(Error::SiteOutOfRange {
                site,
                len: self.len(),
            })
        }
    }

    /// L1 distance between the coordinates of `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> Result<usize> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.distance_unchecked(i, j))
    }

    fn distance_unchecked(&self, i: usize, j: usize) -> usize {
        self.strides
            .iter()
            .zip(&self.extents)
            .map(|(&s, &e)| ((i / s) % e).abs_diff((j / s) % e))
            .sum()
    }

    pub fn distance_to_set(&self, i: usize, set: &SiteSet) -> Result<usize> {
        self.check(i)?;
        set.members
            .iter()
            .map(|&s| self.distance(i, s))
            .try_fold(None, |best: Option<usize>, d| {
                d.map(|d| Some(best.map_or(d, |b| b.min(d))))
            })?
            .ok_or(Error::EmptySiteSet)
    }

    /// Minimal distance between two site sets.
    pub fn set_distance(&self, a: &SiteSet, b: &SiteSet) -> Result<usize> {
        if b.is_empty() {
            return Err(Error::EmptySiteSet);
        }
        a.members
            .iter()
            .map(|&i| self.distance_to_set(i, b))
            .try_fold(None, |best: Option<usize>, d| {
                d.map(|d| Some(best.map_or(d, |x| x.min(d))))
            })?
            .ok_or(Error::EmptySiteSet)
    }

    /// Lattice support of the coordinate observable `x_i`.
    pub fn support_of_coordinate(&self, i: usize) -> Result<SiteSet> {
        self.check(i)?;
        Ok(SiteSet::singleton(i))
    }

    pub fn site_set(&self, members: impl IntoIterator<Item = usize>) -> Result<SiteSet> {
        let set = SiteSet {
            members: members.into_iter().collect(),
        };
        for &s in &set.members {
            self.check(s)?;
        }
        Ok(set)
    }
}

/// A set of lattice sites, e.g. the support `S_g` of an observable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SiteSet {
    members: BTreeSet<usize>,
}

impl SiteSet {
    pub fn singleton(i: usize) -> Self {
        SiteSet {
            members: BTreeSet::from([i]),
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_disjoint(&self, other: &SiteSet) -> bool {
        self.members.is_disjoint(&other.members)
    }

    pub fn union(&self, other: &SiteSet) -> SiteSet {
        SiteSet {
            members: self.members.union(&other.members).copied().collect(),
        }
    }
}

impl FromIterator<usize> for SiteSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        SiteSet {
            members: iter.into_iter().collect(),
        }
    }
}
