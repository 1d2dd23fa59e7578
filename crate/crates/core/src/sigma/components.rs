//! `(σ, x, n)`-components of a triangle and their deep cells.
//!
//! Inside `Δₙ` every Y-cell below the hypotenuse has its σ-image in the
//! triangle, so the σ-edges form a forest whose roots are the Y-cells of the
//! hypotenuse. A component is one tree.

use serde::{Deserialize, Serialize};

use super::sigma_step;
use crate::error::{Error, Result};
use crate::lattice::{Patch, Position, Triangle};
use crate::union_find::UnionFind;

const NONE: u32 = u32::MAX;

/// Summary of one component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentInfo {
    pub id: u32,
    pub cells: usize,
    /// The root: the component's only hypotenuse cell.
    pub hypotenuse: Position,
    /// `∂Δₙ ∩ C` in row-major order.
    pub boundary: Vec<Position>,
    pub extremal: Position,
    pub deep: usize,
    pub deep2: usize,
}

/// Deep cells of a triangle: those reached by σ from a Y-cell of the legs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeepMarking {
    triangle: Triangle,
    deep: Vec<bool>,
    deep2: Vec<bool>,
}

impl DeepMarking {
    pub fn triangle(&self) -> Triangle {
        self.triangle
    }

    pub fn is_deep(&self, p: Position) -> bool {
        self.triangle.index(p).is_some_and(|i| self.deep[i])
    }

    /// Deep with two deep σ-antecedents inside the triangle.
    pub fn is_deep2(&self, p: Position) -> bool {
        self.triangle.index(p).is_some_and(|i| self.deep2[i])
    }

    pub fn deep_cells(&self) -> impl Iterator<Item = Position> + '_ {
        self.triangle.cells().filter(|&p| self.is_deep(p))
    }

    pub fn deep2_cells(&self) -> impl Iterator<Item = Position> + '_ {
        self.triangle.cells().filter(|&p| self.is_deep2(p))
    }

    pub fn deep_count(&self) -> usize {
        self.deep.iter().filter(|&&d| d).count()
    }

    pub fn deep2_count(&self) -> usize {
        self.deep2.iter().filter(|&&d| d).count()
    }

    /// `card(deep2 ∩ Δ°ₙ)`.
    pub fn deep2_interior_count(&self) -> usize {
        self.deep2_cells().filter(|&p| self.triangle.in_interior(p)).count()
    }
}

/// The component forest of a triangle patch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentTable {
    triangle: Triangle,
    comp: Vec<u32>,
    parent: Vec<u32>,
    components: Vec<ComponentInfo>,
    marking: DeepMarking,
}

impl ComponentTable {
    pub fn triangle(&self) -> Triangle {
        self.triangle
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[ComponentInfo] {
        &self.components
    }

    pub fn marking(&self) -> &DeepMarking {
        &self.marking
    }

    /// Component of a Y-cell, `None` for 0-cells and cells outside.
    pub fn component_of(&self, p: Position) -> Option<u32> {
        let i = self.triangle.index(p)?;
        (self.comp[i] != NONE).then_some(self.comp[i])
    }

    /// `σ(p)` when it lies in the triangle.
    pub fn parent(&self, p: Position) -> Option<Position> {
        let i = self.triangle.index(p)?;
        (self.parent[i] != NONE).then(|| self.cell_at(self.parent[i] as usize))
    }

    /// σ-antecedents of `p` inside the triangle.
    pub fn children(&self, p: Position) -> impl Iterator<Item = Position> + '_ {
        [Position::new(p.k - 1, p.l), Position::new(p.k, p.l - 1)]
            .into_iter()
            .filter(move |&q| self.parent(q) == Some(p))
    }

    /// Y-cells of component `c` in row-major order.
    pub fn cells_of(&self, c: u32) -> impl Iterator<Item = Position> + '_ {
        self.triangle.cells().filter(move |&p| self.component_of(p) == Some(c))
    }

    fn cell_at(&self, idx: usize) -> Position {
        let n = self.triangle.n as usize;
        let mut j = 0;
        let mut start = 0;
        while start + (n + 1 - j) <= idx {
            start += n + 1 - j;
            j += 1;
        }
        Position::new(self.triangle.base.k + (idx - start) as i64, self.triangle.base.l + j as i64)
    }

    /// `cell_k,cell_l,component,deep,deep2,extremal`, one line per Y-cell.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cell_k,cell_l,component,deep,deep2,extremal\n");
        for p in self.triangle.cells() {
            let Some(c) = self.component_of(p) else { continue };
            let ext = self.components[c as usize].extremal == p;
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.k,
                p.l,
                c,
                self.marking.is_deep(p) as u8,
                self.marking.is_deep2(p) as u8,
                ext as u8
            ));
        }
        s
    }
}

/// Cells of `tri` ordered by level, then by `k`.
fn level_order(tri: Triangle) -> impl Iterator<Item = Position> {
    let n = tri.n as i64;
    (0..=n).flat_map(move |s| (0..=s).map(move |i| Position::new(tri.base.k + i, tri.base.l + s - i)))
}

fn sigma_parents(x: &Patch, tri: Triangle) -> Vec<u32> {
    let mut parent = vec![NONE; tri.cell_count()];
    for p in tri.cells() {
        if !x.bit(p) || tri.on_hypotenuse(p) {
            continue;
        }
        let (_, q) = sigma_step(x, p).expect("both successors lie in the triangle");
        parent[tri.index(p).unwrap()] = tri.index(q).unwrap() as u32;
    }
    parent
}

fn mark(x: &Patch, tri: Triangle, parent: &[u32]) -> DeepMarking {
    let mut deep = vec![false; tri.cell_count()];
    for p in level_order(tri) {
        let i = tri.index(p).unwrap();
        if x.bit(p) && tri.on_legs(p) {
            deep[i] = true;
        }
        if deep[i] && parent[i] != NONE {
            deep[parent[i] as usize] = true;
        }
    }
    let mut deep2 = vec![false; tri.cell_count()];
    for p in tri.cells() {
        let i = tri.index(p).unwrap();
        if !deep[i] {
            continue;
        }
        let both = [Position::new(p.k - 1, p.l), Position::new(p.k, p.l - 1)].iter().all(|&q| {
            tri.index(q).is_some_and(|j| parent[j] == i as u32 && deep[j])
        });
        deep2[i] = both;
    }
    DeepMarking { triangle: tri, deep, deep2 }
}

/// Deep marking of a triangle patch.
pub fn deep_marking(x: &Patch) -> Result<DeepMarking> {
    let tri = x.geometry().as_triangle().ok_or(Error::NotATriangle)?;
    Ok(mark(x, tri, &sigma_parents(x, tri)))
}

/// Splits the Y-cells of a triangle patch into `(σ, x, n)`-components.
///
/// Components are numbered by the `k` of their hypotenuse cell.
pub fn components(x: &Patch) -> Result<ComponentTable> {
    let tri = x.geometry().as_triangle().ok_or(Error::NotATriangle)?;
    let parent = sigma_parents(x, tri);
    let mut uf = UnionFind::new(tri.cell_count());
    for (i, &p) in parent.iter().enumerate() {
        if p != NONE {
            uf.union(i as u32, p);
        }
    }
    let mut root_id = vec![NONE; tri.cell_count()];
    let mut components = Vec::new();
    for h in tri.hypotenuse() {
        if x.bit(h) {
            let r = uf.find(tri.index(h).unwrap() as u32);
            root_id[r as usize] = components.len() as u32;
            components.push(ComponentInfo {
                id: components.len() as u32,
                cells: 0,
                hypotenuse: h,
                boundary: Vec::new(),
                extremal: h,
                deep: 0,
                deep2: 0,
            });
        }
    }
    let marking = mark(x, tri, &parent);
    let mut comp = vec![NONE; tri.cell_count()];
    for p in tri.cells() {
        if !x.bit(p) {
            continue;
        }
        let i = tri.index(p).unwrap();
        let c = root_id[uf.find(i as u32) as usize];
        debug_assert_ne!(c, NONE, "every tree is rooted on the hypotenuse");
        comp[i] = c;
        let info = &mut components[c as usize];
        info.cells += 1;
        if tri.on_boundary(p) {
            info.boundary.push(p);
        }
        let key = |q: Position| (q.level(), std::cmp::Reverse(q.k));
        if key(p) < key(info.extremal) {
            info.extremal = p;
        }
        info.deep += marking.deep[i] as usize;
        info.deep2 += marking.deep2[i] as usize;
    }
    Ok(ComponentTable { triangle: tri, comp, parent, components, marking })
}

/// The cell of component `c` of lowest level, largest `k` among ties.
pub fn extremal_cell(table: &ComponentTable, c: u32) -> Position {
    table.components[c as usize].extremal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::sample_haar;
    use crate::lattice::Geometry;
    use crate::sigma::trace;

    fn pos(k: i64, l: i64) -> Position {
        Position::new(k, l)
    }

    fn hand() -> Patch {
        Patch::triangle_from_bottom_row(Position::ORIGIN, &[true, false, true]).unwrap()
    }

    #[test]
    fn hand_components() {
        let t = components(&hand()).unwrap();
        assert_eq!(t.len(), 2);
        let c0 = t.component_of(pos(0, 0)).unwrap();
        assert_eq!(t.component_of(pos(0, 1)), Some(c0));
        assert_eq!(t.component_of(pos(1, 1)), Some(c0));
        let c1 = t.component_of(pos(2, 0)).unwrap();
        assert_ne!(c0, c1);
        assert_eq!(extremal_cell(&t, c0), pos(0, 0));
        assert_eq!(extremal_cell(&t, c1), pos(2, 0));
        assert_eq!(t.cells_of(c0).count(), 3);
        assert_eq!(t.children(pos(1, 1)).collect::<Vec<_>>(), vec![pos(0, 1)]);
    }

    #[test]
    fn all_ones_bottom_row() {
        let x = Patch::triangle_from_bottom_row(Position::ORIGIN, &[true, true]).unwrap();
        assert!(!x.bit(pos(0, 1)));
        let t = components(&x).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.parent(pos(0, 0)), Some(pos(1, 0)));
    }

    #[test]
    fn hand_marking() {
        let m = deep_marking(&hand()).unwrap();
        assert!(m.is_deep(pos(0, 0)));
        assert!(m.is_deep(pos(1, 1)));
        assert_eq!(m.deep2_count(), 0);
    }

    #[test]
    fn csv_lines() {
        let t = components(&hand()).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("cell_k,cell_l,component,deep,deep2,extremal\n0,0,0,1,0,1\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn zero_patch_has_no_components() {
        let t = components(&Patch::zeros(Geometry::triangle(pos(3, 3), 5))).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn not_a_triangle() {
        let x = Patch::zeros(Geometry::square_at(pos(0, 0), 3, 3));
        assert_eq!(components(&x).unwrap_err(), Error::NotATriangle);
    }

    /// Component ids agree with forwarding every trajectory to the hypotenuse.
    #[test]
    fn components_match_trajectory_forwarding() {
        for s in 0..200 {
            let g = Geometry::triangle(pos(-3, 5), 32);
            let x = sample_haar(&g, s);
            let t = components(&x).unwrap();
            let tri = t.triangle();
            let mut roots = std::collections::BTreeSet::new();
            for p in x.ones() {
                let tr = trace(&x, p, 64).unwrap();
                let end = tr.last();
                assert!(tri.on_hypotenuse(end));
                assert_eq!(t.component_of(p), t.component_of(end));
                roots.insert(end);
            }
            assert_eq!(roots.len(), t.len());
            assert!(t.len() <= 33);
        }
    }
}
