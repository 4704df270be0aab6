//! Slab geometry: sites, columns, boxes, annuli, ribbons and reflections.
//!
//! Coordinates are integer; a site `(x, y, z)` projects to the column
//! `(x, y)`. Boxes always span the full layer range of the active graph
//! mode, so every region type here is described by its column footprint.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::error::Error;
use crate::{ColumnSet, Result};

/// A lattice vertex of the slab.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    pub x: i32,
    pub y: i32,
    /// Layer index: `0..=1` for the two-layer slab, `0..=2` in periodic mode.
    pub z: u8,
}

impl Site {
    pub const fn new(x: i32, y: i32, z: u8) -> Self {
        Site { x, y, z }
    }

    /// Projection onto the square lattice.
    pub const fn column(&self) -> Column {
        Column {
            x: self.x,
            y: self.y,
        }
    }
}

/// A projection fiber: the pair (or triple) of sites sharing `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Column {
    pub x: i32,
    pub y: i32,
}

impl Column {
    pub const fn new(x: i32, y: i32) -> Self {
        Column { x, y }
    }

    /// The site of this column at the given layer.
    pub const fn site(&self, z: u8) -> Site {
        Site {
            x: self.x,
            y: self.y,
            z,
        }
    }

    /// The four lattice neighbours in the square lattice.
    pub fn neighbours4(&self) -> [Column; 4] {
        [
            Column::new(self.x + 1, self.y),
            Column::new(self.x - 1, self.y),
            Column::new(self.x, self.y + 1),
            Column::new(self.x, self.y - 1),
        ]
    }

    /// Chebyshev distance, the metric of square boxes `B(v; l)`.
    pub fn cheb(&self, other: &Column) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn is_adjacent4(&self, other: &Column) -> bool {
        (self.x - other.x).abs() + (self.y - other.y).abs() == 1
    }
}

/// Which slab graph is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphMode {
    /// `Z² × {0,1}` with Euclidean distance-one adjacency.
    Sandwich2,
    /// `Z² × {0,1,2}` where layers 0 and 2 are additionally neighbours, so
    /// all three layers of a column are pairwise adjacent.
    Periodic3,
}

impl GraphMode {
    pub const fn layers(&self) -> u8 {
        match self {
            GraphMode::Sandwich2 => 2,
            GraphMode::Periodic3 => 3,
        }
    }

    /// Whether two distinct layers of one column are joined by an edge.
    pub const fn layers_adjacent(&self, a: u8, b: u8) -> bool {
        match self {
            GraphMode::Sandwich2 => a.abs_diff(b) == 1,
            GraphMode::Periodic3 => a != b,
        }
    }

    /// Bit mask with one bit per valid layer.
    pub const fn full_mask(&self) -> u8 {
        match self {
            GraphMode::Sandwich2 => 0b11,
            GraphMode::Periodic3 => 0b111,
        }
    }
}

/// An axis-aligned box of columns, implicitly spanning all layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoxRegion {
    pub x_min: i32,
    pub x_max: i32,
    pub y_min: i32,
    pub y_max: i32,
}

impl BoxRegion {
    pub fn new(x_min: i32, x_max: i32, y_min: i32, y_max: i32) -> Result<Self> {
        if x_min > x_max || y_min > y_max {
            return Err(Error::InvalidParameter(format!(
                "box bounds out of order: [{x_min},{x_max}]x[{y_min},{y_max}]"
            )));
        }
        Ok(BoxRegion {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    /// The centered box `[-n, n] × [-m, m]`.
    pub fn centered(n: i32, m: i32) -> Result<Self> {
        if n < 0 || m < 0 {
            return Err(Error::InvalidParameter(format!(
                "centered box needs n, m >= 0, got ({n}, {m})"
            )));
        }
        BoxRegion::new(-n, n, -m, m)
    }

    /// The box `B(v; l)`: `[-l, l]²` translated to be centered at `v`.
    pub fn around(v: Column, l: i32) -> Result<Self> {
        if l < 0 {
            return Err(Error::InvalidParameter(format!(
                "box radius must be >= 0, got {l}"
            )));
        }
        BoxRegion::new(v.x - l, v.x + l, v.y - l, v.y + l)
    }

    pub fn width(&self) -> i32 {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> i32 {
        self.y_max - self.y_min + 1
    }

    pub fn column_count(&self) -> usize {
        self.width() as usize * self.height() as usize
    }

    pub fn site_count(&self, mode: GraphMode) -> usize {
        self.column_count() * mode.layers() as usize
    }

    pub fn contains_column(&self, c: Column) -> bool {
        c.x >= self.x_min && c.x <= self.x_max && c.y >= self.y_min && c.y <= self.y_max
    }

    pub fn contains_site(&self, s: Site, mode: GraphMode) -> bool {
        self.contains_column(s.column()) && s.z < mode.layers()
    }

    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        other.x_min >= self.x_min
            && other.x_max <= self.x_max
            && other.y_min >= self.y_min
            && other.y_max <= self.y_max
    }

    /// Columns in lexicographic `(y, x)` order, matching configuration bit order.
    pub fn columns(self) -> impl Iterator<Item = Column> {
        let xs = self.x_min..=self.x_max;
        (self.y_min..=self.y_max).flat_map(move |y| xs.clone().map(move |x| Column::new(x, y)))
    }

    /// Sites in lexicographic `(y, x, z)` order.
    pub fn sites(self, mode: GraphMode) -> impl Iterator<Item = Site> {
        self.columns()
            .flat_map(move |c| (0..mode.layers()).map(move |z| c.site(z)))
    }

    pub fn top_columns(self) -> impl Iterator<Item = Column> {
        (self.x_min..=self.x_max).map(move |x| Column::new(x, self.y_max))
    }

    pub fn bottom_columns(self) -> impl Iterator<Item = Column> {
        (self.x_min..=self.x_max).map(move |x| Column::new(x, self.y_min))
    }

    pub fn left_columns(self) -> impl Iterator<Item = Column> {
        (self.y_min..=self.y_max).map(move |y| Column::new(self.x_min, y))
    }

    pub fn right_columns(self) -> impl Iterator<Item = Column> {
        (self.y_min..=self.y_max).map(move |y| Column::new(self.x_max, y))
    }

    /// Columns on the outer rim of the box.
    pub fn boundary_columns(&self) -> BTreeSet<Column> {
        self.columns()
            .filter(|c| {
                c.x == self.x_min || c.x == self.x_max || c.y == self.y_min || c.y == self.y_max
            })
            .collect()
    }

    /// Smallest box containing both operands.
    pub fn hull(&self, other: &BoxRegion) -> BoxRegion {
        BoxRegion {
            x_min: self.x_min.min(other.x_min),
            x_max: self.x_max.max(other.x_max),
            y_min: self.y_min.min(other.y_min),
            y_max: self.y_max.max(other.y_max),
        }
    }

    /// Dense index of a column in `(y, x)` order; caller must check containment.
    pub(crate) fn column_index(&self, c: Column) -> usize {
        debug_assert!(self.contains_column(c));
        (c.y - self.y_min) as usize * self.width() as usize + (c.x - self.x_min) as usize
    }
}

/// The square annulus `B(center; outer) \ B(center; inner)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Annulus {
    pub center: Column,
    pub inner: i32,
    pub outer: i32,
}

impl Annulus {
    pub fn new(center: Column, inner: i32, outer: i32) -> Result<Self> {
        if inner <= 0 || inner >= outer {
            return Err(Error::InvalidParameter(format!(
                "annulus needs 0 < inner < outer, got ({inner}, {outer})"
            )));
        }
        Ok(Annulus {
            center,
            inner,
            outer,
        })
    }

    /// Columns with Chebyshev distance in `(inner, outer]` from the center.
    pub fn contains_column(&self, c: Column) -> bool {
        let d = self.center.cheb(&c);
        d > self.inner && d <= self.outer
    }

    pub fn outer_box(&self) -> BoxRegion {
        BoxRegion::around(self.center, self.outer).expect("outer radius validated")
    }

    pub fn columns(self) -> impl Iterator<Item = Column> {
        self.outer_box()
            .columns()
            .filter(move |c| self.contains_column(*c))
    }

    pub fn is_disjoint(&self, other: &Annulus) -> bool {
        self.columns().all(|c| !other.contains_column(c))
    }
}

/// A layer-saturated column set `R(X) = π⁻¹(π(X))`, carrier of crossing
/// decompositions. The region records which box the ribbon lives in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ribbon {
    columns: ColumnSet,
    region: BoxRegion,
}

impl Ribbon {
    pub fn from_columns(columns: ColumnSet, region: BoxRegion) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptySet("ribbon columns"));
        }
        if let Some(c) = columns.iter().find(|c| !region.contains_column(**c)) {
            return Err(Error::OutsideRegion(format!(
                "ribbon column ({}, {})",
                c.x, c.y
            )));
        }
        Ok(Ribbon { columns, region })
    }

    pub fn columns(&self) -> &ColumnSet {
        &self.columns
    }

    pub fn region(&self) -> &BoxRegion {
        &self.region
    }

    pub fn contains(&self, c: Column) -> bool {
        self.columns.contains(&c)
    }

    /// All sites of the ribbon under the given mode.
    pub fn sites(&self, mode: GraphMode) -> impl Iterator<Item = Site> + '_ {
        self.columns
            .iter()
            .flat_map(move |c| (0..mode.layers()).map(move |z| c.site(z)))
    }

    /// Whether a column (not necessarily on the ribbon) touches the ribbon.
    pub fn is_adjacent(&self, c: Column) -> bool {
        c.neighbours4().iter().any(|n| self.columns.contains(n))
    }
}

/// Neighbours of a site under the mode's adjacency, optionally restricted to
/// a box. Horizontal edges require equal layers; vertical edges join layers
/// the mode declares adjacent.
pub fn neighbors(s: Site, mode: GraphMode, region: Option<&BoxRegion>) -> Result<Vec<Site>> {
    if s.z >= mode.layers() {
        return Err(Error::InvalidParameter(format!(
            "layer {} out of range for mode",
            s.z
        )));
    }
    if let Some(r) = region {
        if !r.contains_site(s, mode) {
            return Err(Error::OutsideRegion(format!(
                "site ({}, {}, {})",
                s.x, s.y, s.z
            )));
        }
    }
    let mut out = Vec::with_capacity(6);
    for c in s.column().neighbours4() {
        out.push(c.site(s.z));
    }
    for z in 0..mode.layers() {
        if z != s.z && mode.layers_adjacent(s.z, z) {
            out.push(Site::new(s.x, s.y, z));
        }
    }
    if let Some(r) = region {
        out.retain(|n| r.contains_site(*n, mode));
    }
    Ok(out)
}

/// The ribbon of a site set: every layer over every column the set projects to.
pub fn ribbon_of<I: IntoIterator<Item = Site>>(sites: I, region: BoxRegion) -> Result<Ribbon> {
    let columns: ColumnSet = sites.into_iter().map(|s| s.column()).collect();
    if columns.is_empty() {
        return Err(Error::EmptySet("ribbon source set"));
    }
    Ribbon::from_columns(columns, region)
}

/// Reflect a ribbon about the horizontal mirror line `y = axis_y / 2`, i.e.
/// the map `y ↦ axis_y − y` on columns.
pub fn reflect_ribbon(r: &Ribbon, axis_y: i32) -> Ribbon {
    let columns: ColumnSet = r
        .columns
        .iter()
        .map(|c| Column::new(c.x, axis_y - c.y))
        .collect();
    let region = BoxRegion {
        x_min: r.region.x_min,
        x_max: r.region.x_max,
        y_min: axis_y - r.region.y_max,
        y_max: axis_y - r.region.y_min,
    };
    Ribbon { columns, region }
}

/// The k-th box of the alternating dyadic chain anchored at the origin:
/// `[0, 2n] × [0, n]` for `k = 0`, then boxes doubling along alternating axes.
pub fn bk_box(k: u32, n: i32) -> Result<BoxRegion> {
    if n < 1 {
        return Err(Error::InvalidParameter(format!("chain needs n >= 1, got {n}")));
    }
    let pow = |e: u32| -> Result<i64> {
        let f = 1i64.checked_shl(e).ok_or(Error::RangeOverflow)?;
        f.checked_mul(n as i64).ok_or(Error::RangeOverflow)
    };
    let (w, h) = if k == 0 {
        (pow(1)?, pow(0)?)
    } else if k % 2 == 1 {
        (pow(k)?, pow(k + 1)?)
    } else {
        (pow(k + 1)?, pow(k)?)
    };
    if w > i32::MAX as i64 || h > i32::MAX as i64 {
        return Err(Error::RangeOverflow);
    }
    BoxRegion::new(0, w as i32, 0, h as i32)
}

/// The dyadic annuli `B(v; 2^{j+1}) \ B(v; 2^j)` for `j = 1..=k`, where
/// `k = max(1, ⌊⌊log₂ n⌋ / 2⌋)`.
pub fn prop6_annuli(v: Column, n: i32) -> Result<Vec<Annulus>> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "annulus family needs n >= 4, got {n}"
        )));
    }
    let k = ((n as u32).ilog2() / 2).max(1);
    (1..=k)
        .map(|j| Annulus::new(v, 1 << j, 1 << (j + 1)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sandwich_degree_five_in_bulk() {
        let ns = neighbors(Site::new(0, 0, 0), GraphMode::Sandwich2, None).unwrap();
        assert_eq!(ns.len(), 5);
        let expect: BTreeSet<Site> = [
            Site::new(1, 0, 0),
            Site::new(-1, 0, 0),
            Site::new(0, 1, 0),
            Site::new(0, -1, 0),
            Site::new(0, 0, 1),
        ]
        .into_iter()
        .collect();
        assert_eq!(ns.into_iter().collect::<BTreeSet<_>>(), expect);
    }

    #[test]
    fn corner_site_degree_three() {
        let b = BoxRegion::new(0, 4, 0, 4).unwrap();
        let ns = neighbors(Site::new(0, 0, 0), GraphMode::Sandwich2, Some(&b)).unwrap();
        assert_eq!(ns.len(), 3);
    }

    #[test]
    fn periodic_mode_joins_outer_layers() {
        let ns = neighbors(Site::new(0, 0, 0), GraphMode::Periodic3, None).unwrap();
        assert!(ns.contains(&Site::new(0, 0, 1)));
        assert!(ns.contains(&Site::new(0, 0, 2)));
        assert_eq!(ns.len(), 6);
    }

    #[test]
    fn adjacency_symmetric_irreflexive() {
        let b = BoxRegion::new(-2, 2, -2, 2).unwrap();
        for mode in [GraphMode::Sandwich2, GraphMode::Periodic3] {
            for s in b.sites(mode) {
                let ns = neighbors(s, mode, Some(&b)).unwrap();
                assert!(!ns.contains(&s));
                for t in ns {
                    let back = neighbors(t, mode, Some(&b)).unwrap();
                    assert!(back.contains(&s));
                }
            }
        }
    }

    #[test]
    fn neighbors_outside_region_rejected() {
        let b = BoxRegion::new(0, 2, 0, 2).unwrap();
        assert!(matches!(
            neighbors(Site::new(5, 0, 0), GraphMode::Sandwich2, Some(&b)),
            Err(Error::OutsideRegion(_))
        ));
    }

    #[test]
    fn ribbon_collapses_layers() {
        let region = BoxRegion::new(0, 5, 0, 5).unwrap();
        let r = ribbon_of([Site::new(3, 4, 1)], region).unwrap();
        assert_eq!(r.columns().len(), 1);
        assert!(r.contains(Column::new(3, 4)));

        let r2 = ribbon_of([Site::new(0, 0, 0), Site::new(0, 0, 1)], region).unwrap();
        assert_eq!(r2.columns().len(), 1);
    }

    #[test]
    fn ribbon_of_l_shaped_path() {
        let region = BoxRegion::new(0, 5, 0, 5).unwrap();
        let path = [Site::new(1, 2, 0), Site::new(2, 2, 0), Site::new(2, 3, 0)];
        let r = ribbon_of(path, region).unwrap();
        let expect: ColumnSet = path.iter().map(|s| s.column()).collect();
        assert_eq!(*r.columns(), expect);
    }

    #[test]
    fn ribbon_empty_rejected() {
        let region = BoxRegion::new(0, 5, 0, 5).unwrap();
        assert!(matches!(
            ribbon_of(core::iter::empty(), region),
            Err(Error::EmptySet(_))
        ));
    }

    #[test]
    fn ribbon_same_projection_same_ribbon() {
        let region = BoxRegion::new(0, 5, 0, 5).unwrap();
        let a = ribbon_of([Site::new(1, 1, 0), Site::new(2, 1, 0)], region).unwrap();
        let b = ribbon_of([Site::new(1, 1, 1), Site::new(2, 1, 1)], region).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reflection_examples() {
        let region = BoxRegion::new(0, 4, 0, 4).unwrap();
        let r = Ribbon::from_columns([Column::new(2, 0)].into_iter().collect(), region).unwrap();
        let refl = reflect_ribbon(&r, 4);
        assert!(refl.contains(Column::new(2, 4)));

        // symmetric about the mid-line of a height-n box maps to itself
        let sym = Ribbon::from_columns(
            [Column::new(1, 1), Column::new(1, 3), Column::new(2, 2)]
                .into_iter()
                .collect(),
            region,
        )
        .unwrap();
        assert_eq!(reflect_ribbon(&sym, 4), sym);
    }

    #[test]
    fn reflection_is_involution() {
        let region = BoxRegion::new(0, 6, 0, 6).unwrap();
        let r = Ribbon::from_columns(
            [Column::new(0, 1), Column::new(1, 1), Column::new(1, 2)]
                .into_iter()
                .collect(),
            region,
        )
        .unwrap();
        assert_eq!(reflect_ribbon(&reflect_ribbon(&r, 6), 6), r);
    }

    #[test]
    fn chain_boxes_match_construction() {
        assert_eq!(bk_box(0, 3).unwrap(), BoxRegion::new(0, 6, 0, 3).unwrap());
        assert_eq!(bk_box(1, 3).unwrap(), BoxRegion::new(0, 6, 0, 12).unwrap());
        assert_eq!(bk_box(2, 1).unwrap(), BoxRegion::new(0, 8, 0, 4).unwrap());
    }

    #[test]
    fn chain_boxes_nest_and_share_long_extent() {
        for k in 0..6u32 {
            let a = bk_box(k, 2).unwrap();
            let b = bk_box(k + 1, 2).unwrap();
            assert!(b.contains_box(&a));
            // consecutive boxes agree along the axis the smaller one crosses
            if k % 2 == 0 {
                assert_eq!(a.x_min, b.x_min);
                assert_eq!(a.x_max, b.x_max);
            } else {
                assert_eq!(a.y_min, b.y_min);
                assert_eq!(a.y_max, b.y_max);
            }
        }
    }

    #[test]
    fn chain_box_overflow_detected() {
        assert!(matches!(bk_box(40, 1000), Err(Error::RangeOverflow)));
    }

    #[test]
    fn annulus_family_examples() {
        let v = Column::new(0, 0);
        let anns = prop6_annuli(v, 16).unwrap();
        assert_eq!(anns.len(), 2);
        assert_eq!((anns[0].inner, anns[0].outer), (2, 4));
        assert_eq!((anns[1].inner, anns[1].outer), (4, 8));

        assert_eq!(prop6_annuli(v, 4).unwrap().len(), 1);
        assert!(prop6_annuli(v, 3).is_err());
    }

    #[test]
    fn annulus_family_disjoint_and_contained() {
        let v = Column::new(3, -2);
        for n in [4, 7, 16, 64, 100] {
            let anns = prop6_annuli(v, n).unwrap();
            let k = anns.len() as u32;
            let outer = BoxRegion::around(v, 1 << (k + 1)).unwrap();
            for (i, a) in anns.iter().enumerate() {
                for b in anns.iter().skip(i + 1) {
                    assert!(a.is_disjoint(b));
                }
                assert!(a.columns().all(|c| outer.contains_column(c)));
            }
        }
    }

    #[test]
    fn box_iteration_order_is_y_major() {
        let b = BoxRegion::new(0, 1, 0, 1).unwrap();
        let cols: Vec<Column> = b.columns().collect();
        assert_eq!(
            cols,
            [
                Column::new(0, 0),
                Column::new(1, 0),
                Column::new(0, 1),
                Column::new(1, 1)
            ]
        );
    }
}
