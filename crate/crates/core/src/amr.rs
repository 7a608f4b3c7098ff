//! Statically refined two-dimensional Cartesian grids.
//!
//! Cells are addressed by `(level, i, j)`; a level-ℓ cell covers `r^ℓ`-times
//! finer index space than level 0. Only leaves carry data. Adjacent leaves
//! differ by at most one level, so a face is either conforming or one of the
//! `r` sub-faces of a coarse face.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outer box and level-0 resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub dims: [usize; 2],
    pub periodic: [bool; 2],
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for d in 0..2 {
            if self.dims[d] == 0 {
                return Err(Error::config("domain.cells", "cell counts must be positive"));
            }
            if !(self.hi[d] > self.lo[d]) {
                return Err(Error::config("domain.hi", "upper corner must exceed lower corner"));
            }
        }
        Ok(())
    }

    /// Level-0 cell size per direction.
    pub fn h0(&self) -> [f64; 2] {
        [
            (self.hi[0] - self.lo[0]) / self.dims[0] as f64,
            (self.hi[1] - self.lo[1]) / self.dims[1] as f64,
        ]
    }

    pub fn length(&self) -> [f64; 2] {
        [self.hi[0] - self.lo[0], self.hi[1] - self.lo[1]]
    }
}

/// Refinement thresholds on the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefinementParams {
    pub factor: usize,
    pub max_level: usize,
    pub chi_plus: f64,
    /// Recoarsening threshold; inert for static geometry.
    pub chi_minus: f64,
}

impl Default for RefinementParams {
    fn default() -> Self {
        RefinementParams {
            factor: 3,
            max_level: 1,
            chi_plus: 0.01,
            chi_minus: 0.001,
        }
    }
}

impl RefinementParams {
    pub fn validate(&self) -> Result<()> {
        if self.factor != 2 && self.factor != 3 {
            return Err(Error::InvalidRefinement(format!("factor {} (expected 2 or 3)", self.factor)));
        }
        if self.max_level > 4 {
            return Err(Error::InvalidRefinement(format!("max level {} exceeds 4", self.max_level)));
        }
        if !(self.chi_minus >= 0.0 && self.chi_plus > self.chi_minus) {
            return Err(Error::InvalidRefinement("thresholds must satisfy 0 <= chi- < chi+".into()));
        }
        Ok(())
    }
}

/// Address of a grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub level: usize,
    pub i: usize,
    pub j: usize,
}

impl CellKey {
    fn idx(&self, d: usize) -> usize {
        if d == 0 {
            self.i
        } else {
            self.j
        }
    }

    fn with(&self, d: usize, v: usize) -> CellKey {
        let mut k = *self;
        if d == 0 {
            k.i = v
        } else {
            k.j = v
        }
        k
    }

    pub fn parent(&self, r: usize) -> Option<CellKey> {
        (self.level > 0).then(|| CellKey {
            level: self.level - 1,
            i: self.i / r,
            j: self.j / r,
        })
    }

    pub fn children(&self, r: usize) -> impl Iterator<Item = CellKey> + '_ {
        let base = *self;
        (0..r).flat_map(move |b| {
            (0..r).map(move |a| CellKey {
                level: base.level + 1,
                i: base.i * r + a,
                j: base.j * r + b,
            })
        })
    }
}

/// Where a face sits relative to a coarse face it subdivides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubFace {
    /// True when the finer leaf is on the minus side.
    pub fine_is_minus: bool,
    /// Position `k ∈ 0..r` of the sub-face along the coarse face.
    pub k: usize,
}

impl SubFace {
    /// Interval of the coarse-face tangential coordinate covered by the sub-face.
    pub fn coarse_interval(&self, r: usize) -> (f64, f64) {
        (self.k as f64 / r as f64, (self.k + 1) as f64 / r as f64)
    }
}

/// Interior face between two leaves, oriented along +axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub axis: usize,
    pub minus: usize,
    pub plus: usize,
    pub sub: Option<SubFace>,
}

/// Face neighbour of a leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Boundary,
    Same(usize),
    Coarser(usize),
    Finer(usize),
}

/// Leaves of a statically refined grid with their faces.
#[derive(Debug, Clone)]
pub struct AmrGrid {
    pub spec: GridSpec,
    pub factor: usize,
    pub leaves: Vec<CellKey>,
    pub faces: Vec<Face>,
    index: HashMap<CellKey, usize>,
}

impl AmrGrid {
    /// Uniform level-0 grid.
    pub fn uniform(spec: GridSpec, factor: usize) -> Result<Self> {
        spec.validate()?;
        let mut leaves = Vec::with_capacity(spec.dims[0] * spec.dims[1]);
        for j in 0..spec.dims[1] {
            for i in 0..spec.dims[0] {
                leaves.push(CellKey { level: 0, i, j });
            }
        }
        AmrGrid::from_leaves(spec, factor, leaves)
    }

    /// Builds a grid from a set of leaves, which must tile the box.
    pub fn from_leaves(spec: GridSpec, factor: usize, mut leaves: Vec<CellKey>) -> Result<Self> {
        leaves.sort_by_key(|k| (k.level, k.j, k.i));
        let index = leaves.iter().enumerate().map(|(n, k)| (*k, n)).collect();
        let mut g = AmrGrid {
            spec,
            factor,
            leaves,
            faces: Vec::new(),
            index,
        };
        g.faces = g.build_faces()?;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn leaf_index(&self, k: &CellKey) -> Option<usize> {
        self.index.get(k).copied()
    }

    pub fn max_level(&self) -> usize {
        self.leaves.iter().map(|k| k.level).max().unwrap_or(0)
    }

    fn dims_at(&self, level: usize) -> [usize; 2] {
        let s = self.factor.pow(level as u32);
        [self.spec.dims[0] * s, self.spec.dims[1] * s]
    }

    /// Cell size at `level`.
    pub fn h(&self, level: usize) -> [f64; 2] {
        let s = self.factor.pow(level as u32) as f64;
        let h0 = self.spec.h0();
        [h0[0] / s, h0[1] / s]
    }

    /// Lower corner and size of a leaf.
    pub fn cell_box(&self, leaf: usize) -> ([f64; 2], [f64; 2]) {
        let k = self.leaves[leaf];
        let h = self.h(k.level);
        (
            [self.spec.lo[0] + k.i as f64 * h[0], self.spec.lo[1] + k.j as f64 * h[1]],
            h,
        )
    }

    pub fn center(&self, leaf: usize) -> [f64; 2] {
        let (lo, h) = self.cell_box(leaf);
        [lo[0] + 0.5 * h[0], lo[1] + 0.5 * h[1]]
    }

    /// Smallest cell size over all leaves and directions.
    pub fn h_min(&self) -> f64 {
        let h = self.h(self.max_level());
        h[0].min(h[1])
    }

    /// Finds the leaf covering `key`'s region, searching ancestors.
    fn covering(&self, key: CellKey) -> Option<usize> {
        let mut k = Some(key);
        while let Some(c) = k {
            if let Some(&n) = self.index.get(&c) {
                return Some(n);
            }
            k = c.parent(self.factor);
        }
        None
    }

    /// Neighbour across the face of `leaf` in direction `axis`, `side = ±1`.
    pub fn neighbor(&self, leaf: usize, axis: usize, side: i64) -> Result<Neighbor> {
        let k = self.leaves[leaf];
        let n = self.dims_at(k.level)[axis] as i64;
        let mut v = k.idx(axis) as i64 + side;
        if v < 0 || v >= n {
            if !self.spec.periodic[axis] {
                return Ok(Neighbor::Boundary);
            }
            v = v.rem_euclid(n);
        }
        let key = k.with(axis, v as usize);
        if let Some(&m) = self.index.get(&key) {
            return Ok(Neighbor::Same(m));
        }
        if let Some(m) = self.covering(key) {
            let jump = k.level - self.leaves[m].level;
            return if jump == 1 {
                Ok(Neighbor::Coarser(m))
            } else {
                Err(Error::LevelJump(jump))
            };
        }
        // Region is refined: the adjacent child layer must consist of leaves.
        let r = self.factor;
        let t = 1 - axis;
        let near = if side > 0 { 0 } else { r - 1 };
        let first = key.children(r).find(|c| c.idx(axis) % r == near && c.idx(t) % r == 0);
        match first.and_then(|c| self.index.get(&c)) {
            Some(&m) => Ok(Neighbor::Finer(m)),
            None => Err(Error::LevelJump(2)),
        }
    }

    fn build_faces(&self) -> Result<Vec<Face>> {
        let r = self.factor;
        let mut faces = Vec::new();
        for (n, k) in self.leaves.iter().enumerate() {
            for axis in 0..2 {
                let t = 1 - axis;
                match self.neighbor(n, axis, 1)? {
                    Neighbor::Boundary => {}
                    Neighbor::Same(m) => faces.push(Face {
                        axis,
                        minus: n,
                        plus: m,
                        sub: None,
                    }),
                    Neighbor::Coarser(m) => faces.push(Face {
                        axis,
                        minus: n,
                        plus: m,
                        sub: Some(SubFace {
                            fine_is_minus: true,
                            k: k.idx(t) % r,
                        }),
                    }),
                    Neighbor::Finer(first) => {
                        let base = self.leaves[first];
                        for s in 0..r {
                            let key = base.with(t, base.idx(t) + s);
                            let m = *self.index.get(&key).ok_or(Error::LevelJump(2))?;
                            faces.push(Face {
                                axis,
                                minus: n,
                                plus: m,
                                sub: Some(SubFace {
                                    fine_is_minus: false,
                                    k: s,
                                }),
                            });
                        }
                    }
                }
            }
        }
        Ok(faces)
    }

    /// Leaf containing `x`; points on a face belong to the lower cell.
    pub fn locate(&self, x: [f64; 2]) -> Result<usize> {
        let s = &self.spec;
        for d in 0..2 {
            if !(x[d] >= s.lo[d] && x[d] <= s.hi[d]) {
                return Err(Error::OutsideDomain(x));
            }
        }
        for level in 0..=self.max_level() {
            let h = self.h(level);
            let dims = self.dims_at(level);
            let idx = |d: usize| -> usize {
                let t = (x[d] - s.lo[d]) / h[d];
                ((t.ceil() as i64 - 1).max(0) as usize).min(dims[d] - 1)
            };
            let key = CellKey {
                level,
                i: idx(0),
                j: idx(1),
            };
            if let Some(&n) = self.index.get(&key) {
                return Ok(n);
            }
        }
        Err(Error::OutsideDomain(x))
    }

    /// Hash of the leaf set, used to check that grids stay static.
    pub fn grid_hash(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.factor.hash(&mut h);
        self.leaves.hash(&mut h);
        h.finish()
    }

    /// Number of leaves per level.
    pub fn level_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.max_level() + 1];
        for k in &self.leaves {
            c[k.level] += 1;
        }
        c
    }

    /// Minimum-image vector from the center of `a` to the center of `b`.
    fn center_offset(&self, a: usize, b: usize) -> [f64; 2] {
        let (ca, cb) = (self.center(a), self.center(b));
        let len = self.spec.length();
        std::array::from_fn(|d| {
            let mut v = cb[d] - ca[d];
            if self.spec.periodic[d] {
                if v > 0.5 * len[d] {
                    v -= len[d];
                } else if v < -0.5 * len[d] {
                    v += len[d];
                }
            }
            v
        })
    }
}

/// Gradient indicator `χ_i = max_c |φ_c − φ_i| / ‖x_c − x_i‖` over face neighbours.
pub fn estimator(grid: &AmrGrid, means: &[f64]) -> Vec<f64> {
    let mut chi = vec![0.0f64; grid.len()];
    for f in &grid.faces {
        let off = grid.center_offset(f.minus, f.plus);
        let dist = off[0].hypot(off[1]);
        let v = (means[f.plus] - means[f.minus]).abs() / dist;
        chi[f.minus] = chi[f.minus].max(v);
        chi[f.plus] = chi[f.plus].max(v);
    }
    chi
}

/// Leaves eligible for recoarsening (`χ < χ−`). Unused by the static driver.
pub fn coarsen_candidates(chi: &[f64], params: &RefinementParams) -> Vec<bool> {
    chi.iter().map(|&c| c < params.chi_minus).collect()
}

/// Refines the flagged leaves and then closes the leaf set to 1-irregularity.
pub fn refine_leaves(grid: &AmrGrid, flagged: &[bool], max_level: usize) -> Result<AmrGrid> {
    let r = grid.factor;
    let mut leaves: std::collections::BTreeSet<CellKey> = grid.leaves.iter().copied().collect();
    let mut work: Vec<CellKey> = grid
        .leaves
        .iter()
        .zip(flagged)
        .filter(|(k, &f)| f && k.level < max_level)
        .map(|(k, _)| *k)
        .collect();
    while let Some(k) = work.pop() {
        if !leaves.remove(&k) {
            continue;
        }
        leaves.extend(k.children(r));
        // Neighbours two levels coarser than the new children must be split.
        for axis in 0..2 {
            for side in [-1i64, 1] {
                let dims = {
                    let s = r.pow(k.level as u32);
                    [grid.spec.dims[0] * s, grid.spec.dims[1] * s]
                };
                let mut v = k.idx(axis) as i64 + side;
                if v < 0 || v >= dims[axis] as i64 {
                    if !grid.spec.periodic[axis] {
                        continue;
                    }
                    v = v.rem_euclid(dims[axis] as i64);
                }
                let nk = k.with(axis, v as usize);
                let mut anc = nk.parent(r);
                while let Some(a) = anc {
                    if leaves.contains(&a) {
                        work.push(a);
                        break;
                    }
                    anc = a.parent(r);
                }
            }
        }
    }
    AmrGrid::from_leaves(grid.spec, r, leaves.into_iter().collect())
}

/// Builds the static grid by repeated estimator passes on the cell means of φ.
///
/// `mean` returns the mean of φ over the box `(lo, h)`.
pub fn refine_static(
    spec: GridSpec,
    params: &RefinementParams,
    mean: &(dyn Fn([f64; 2], [f64; 2]) -> Result<f64> + Sync),
) -> Result<AmrGrid> {
    params.validate()?;
    let mut grid = AmrGrid::uniform(spec, params.factor)?;
    for _ in 0..params.max_level {
        let means = cell_means(&grid, mean)?;
        let chi = estimator(&grid, &means);
        let flagged: Vec<bool> = chi.iter().map(|&c| c > params.chi_plus).collect();
        if !flagged
            .iter()
            .zip(&grid.leaves)
            .any(|(&f, k)| f && k.level < params.max_level)
        {
            break;
        }
        grid = refine_leaves(&grid, &flagged, params.max_level)?;
    }
    Ok(grid)
}

fn cell_means(
    grid: &AmrGrid,
    mean: &(dyn Fn([f64; 2], [f64; 2]) -> Result<f64> + Sync),
) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let (lo, h) = grid.cell_box(n);
            mean(lo, h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(nx: usize, ny: usize, periodic: bool) -> GridSpec {
        GridSpec {
            lo: [0.0, 0.0],
            hi: [nx as f64, ny as f64],
            dims: [nx, ny],
            periodic: [periodic; 2],
        }
    }

    #[test]
    fn uniform_faces() {
        let g = AmrGrid::uniform(spec(4, 3, false), 3).unwrap();
        assert_eq!(g.faces.len(), 3 * 3 + 4 * 2);
        let p = AmrGrid::uniform(spec(4, 3, true), 3).unwrap();
        assert_eq!(p.faces.len(), 2 * 12);
    }

    #[test]
    fn step_estimator() {
        let g = AmrGrid::uniform(spec(2, 1, false), 3).unwrap();
        let chi = estimator(&g, &[1.0, 0.0]);
        assert_eq!(chi, vec![1.0, 1.0]);
        let flat = estimator(&g, &[0.3, 0.3]);
        assert_eq!(flat, vec![0.0, 0.0]);
    }

    #[test]
    fn refining_one_cell() {
        let g = AmrGrid::uniform(spec(3, 3, false), 3).unwrap();
        let mut flags = vec![false; 9];
        flags[4] = true;
        let f = refine_leaves(&g, &flags, 1).unwrap();
        assert_eq!(f.len(), 8 + 9);
        let area: f64 = (0..f.len()).map(|n| f.cell_box(n).1.iter().product::<f64>()).sum();
        assert_relative_eq!(area, 9.0, max_relative = 1e-12);
        let sub = f.faces.iter().filter(|x| x.sub.is_some()).count();
        assert_eq!(sub, 4 * 3);
        assert_eq!(f.level_counts(), vec![8, 9]);
    }

    #[test]
    fn locate_tie_break() {
        let g = AmrGrid::uniform(spec(3, 3, false), 3).unwrap();
        assert_eq!(g.locate([1.0, 0.5]).unwrap(), g.leaf_index(&CellKey { level: 0, i: 0, j: 0 }).unwrap());
        assert_eq!(g.locate([0.0, 0.0]).unwrap(), 0);
        assert_eq!(g.locate([3.0, 3.0]).unwrap(), 8);
        assert!(g.locate([3.5, 0.0]).is_err());
    }

    #[test]
    fn closure_enforces_one_irregularity() {
        let g = AmrGrid::uniform(spec(3, 3, false), 3).unwrap();
        let mut flags = vec![false; 9];
        flags[4] = true;
        let g1 = refine_leaves(&g, &flags, 2).unwrap();
        // Refine one child at the corner of the refined block.
        let corner = g1.leaf_index(&CellKey { level: 1, i: 3, j: 3 }).unwrap();
        let mut f2 = vec![false; g1.len()];
        f2[corner] = true;
        let g2 = refine_leaves(&g1, &f2, 2).unwrap();
        assert!(g2.len() > g1.len());
        for n in 0..g2.len() {
            for axis in 0..2 {
                for side in [-1, 1] {
                    g2.neighbor(n, axis, side).unwrap();
                }
            }
        }
    }

    #[test]
    fn bad_factor_rejected() {
        let p = RefinementParams {
            factor: 4,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(Error::InvalidRefinement(_))));
    }
}
