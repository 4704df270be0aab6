//! Exact curve regions on the half-unit cell grid.
//!
//! Everything works in doubled coordinates: column `(x, y)` sits at point
//! `(2x, 2y)` and owns the four unit cells around that point, so one cell is
//! a quarter of a column square. A crossing's curve (path steps, the two
//! half-edge stubs closing it against the region boundary, and the region
//! boundary itself) runs along cell edges, which makes "strictly left of the
//! curve" an exact integer flood fill. Sub-column resolution matters: a
//! crossing can cut off slivers and pockets containing no lattice column at
//! all, and the strict-progress argument of the surgery loop counts exactly
//! those cells.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::bits::Bits;
use crate::error::Error;
use crate::lattice::{BoxRegion, Column};
use crate::{ColumnSet, Result};

/// Axis direction on the column lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Dir {
    N,
    S,
    E,
    W,
}

impl Dir {
    pub(crate) fn step(self) -> (i32, i32) {
        match self {
            Dir::N => (0, 1),
            Dir::S => (0, -1),
            Dir::E => (1, 0),
            Dir::W => (-1, 0),
        }
    }

    pub(crate) fn right(self) -> Dir {
        match self {
            Dir::N => Dir::E,
            Dir::E => Dir::S,
            Dir::S => Dir::W,
            Dir::W => Dir::N,
        }
    }

    pub(crate) fn left(self) -> Dir {
        self.right().right().right()
    }

    pub(crate) fn offset(self, c: Column) -> Column {
        let (dx, dy) = self.step();
        Column::new(c.x + dx, c.y + dy)
    }
}

/// All four directions in a fixed deterministic order.
pub(crate) const DIRS: [Dir; 4] = [Dir::N, Dir::W, Dir::E, Dir::S];

type Point = (i32, i32);

/// Doubled-coordinate cell grid over the bounding box of a column region.
struct CellGrid {
    cx0: i32,
    cy0: i32,
    w: usize,
    h: usize,
    cell_ok: Bits,
    /// Blocked unit segments, indexed by their lower/left endpoint.
    hseg: Bits,
    vseg: Bits,
}

impl CellGrid {
    fn new(bbox: &BoxRegion, cols: &ColumnSet) -> CellGrid {
        let cx0 = 2 * bbox.x_min - 1;
        let cy0 = 2 * bbox.y_min - 1;
        let w = 2 * bbox.width() as usize;
        let h = 2 * bbox.height() as usize;
        let mut grid = CellGrid {
            cx0,
            cy0,
            w,
            h,
            cell_ok: Bits::new(w * h),
            hseg: Bits::new((w + 1) * (h + 1)),
            vseg: Bits::new((w + 1) * (h + 1)),
        };
        for c in cols {
            let (px, py) = (2 * c.x, 2 * c.y);
            for cell in [(px - 1, py - 1), (px, py - 1), (px - 1, py), (px, py)] {
                let i = grid.cell_index(cell);
                grid.cell_ok.set(i);
            }
        }
        grid
    }

    #[inline]
    fn cell_index(&self, (i, j): Point) -> usize {
        debug_assert!(self.cell_in_domain((i, j)));
        (j - self.cy0) as usize * self.w + (i - self.cx0) as usize
    }

    #[inline]
    fn cell_in_domain(&self, (i, j): Point) -> bool {
        i >= self.cx0
            && i < self.cx0 + self.w as i32
            && j >= self.cy0
            && j < self.cy0 + self.h as i32
    }

    #[inline]
    fn point_index(&self, (x, y): Point) -> usize {
        debug_assert!(
            x >= self.cx0
                && x <= self.cx0 + self.w as i32
                && y >= self.cy0
                && y <= self.cy0 + self.h as i32
        );
        (y - self.cy0) as usize * (self.w + 1) + (x - self.cx0) as usize
    }

    fn block_hseg(&mut self, p: Point) {
        let i = self.point_index(p);
        self.hseg.set(i);
    }

    fn block_vseg(&mut self, p: Point) {
        let i = self.point_index(p);
        self.vseg.set(i);
    }

    /// Block the two unit segments of a path step between adjacent columns.
    fn block_step(&mut self, a: Column, b: Column) {
        debug_assert!(a.is_adjacent4(&b));
        let (ax, ay) = (2 * a.x, 2 * a.y);
        if b.x == a.x + 1 {
            self.block_hseg((ax, ay));
            self.block_hseg((ax + 1, ay));
        } else if b.x == a.x - 1 {
            self.block_hseg((ax - 1, ay));
            self.block_hseg((ax - 2, ay));
        } else if b.y == a.y + 1 {
            self.block_vseg((ax, ay));
            self.block_vseg((ax, ay + 1));
        } else {
            self.block_vseg((ax, ay - 1));
            self.block_vseg((ax, ay - 2));
        }
    }

    /// Block the half-edge stub leaving a column toward the region boundary,
    /// returning the boundary point it lands on.
    fn block_stub(&mut self, c: Column, d: Dir) -> Point {
        let (px, py) = (2 * c.x, 2 * c.y);
        match d {
            Dir::N => {
                self.block_vseg((px, py));
                (px, py + 1)
            }
            Dir::S => {
                self.block_vseg((px, py - 1));
                (px, py - 1)
            }
            Dir::E => {
                self.block_hseg((px, py));
                (px + 1, py)
            }
            Dir::W => {
                self.block_hseg((px - 1, py));
                (px - 1, py)
            }
        }
    }

    /// Block every boundary segment of the region and collect the directed
    /// boundary edges (region on the left, counterclockwise orientation).
    fn block_boundary(&mut self) -> BTreeMap<Point, Vec<Dir>> {
        let mut edges: BTreeMap<Point, Vec<Dir>> = BTreeMap::new();
        for j in 0..self.h as i32 {
            for i in 0..self.w as i32 {
                let cell = (self.cx0 + i, self.cy0 + j);
                if !self.cell_ok.get(self.cell_index(cell)) {
                    continue;
                }
                let (ci, cj) = cell;
                let missing = |g: &CellGrid, di: i32, dj: i32| -> bool {
                    let n = (ci + di, cj + dj);
                    !g.cell_in_domain(n) || !g.cell_ok.get(g.cell_index(n))
                };
                if missing(self, 0, -1) {
                    self.block_hseg((ci, cj));
                    edges.entry((ci, cj)).or_default().push(Dir::E);
                }
                if missing(self, 1, 0) {
                    self.block_vseg((ci + 1, cj));
                    edges.entry((ci + 1, cj)).or_default().push(Dir::N);
                }
                if missing(self, 0, 1) {
                    self.block_hseg((ci, cj + 1));
                    edges.entry((ci + 1, cj + 1)).or_default().push(Dir::W);
                }
                if missing(self, -1, 0) {
                    self.block_vseg((ci, cj));
                    edges.entry((ci, cj + 1)).or_default().push(Dir::S);
                }
            }
        }
        edges
    }

    /// The region cell on the left of a directed boundary edge.
    fn left_cell_of(p: Point, d: Dir) -> Point {
        match d {
            Dir::E => (p.0, p.1),
            Dir::N => (p.0 - 1, p.1),
            Dir::W => (p.0 - 1, p.1 - 1),
            Dir::S => (p.0, p.1 - 1),
        }
    }

    /// Flood from seed cells through unblocked shared edges.
    fn flood(&self, seeds: impl IntoIterator<Item = Point>) -> Bits {
        let mut seen = Bits::new(self.w * self.h);
        let mut stack: Vec<Point> = Vec::new();
        for s in seeds {
            if self.cell_in_domain(s) {
                let i = self.cell_index(s);
                if self.cell_ok.get(i) && !seen.get(i) {
                    seen.set(i);
                    stack.push(s);
                }
            }
        }
        while let Some((i, j)) = stack.pop() {
            let moves = [
                ((i + 1, j), self.vseg.get(self.point_index((i + 1, j)))),
                ((i - 1, j), self.vseg.get(self.point_index((i, j)))),
                ((i, j + 1), self.hseg.get(self.point_index((i, j + 1)))),
                ((i, j - 1), self.hseg.get(self.point_index((i, j)))),
            ];
            for (n, blocked) in moves {
                if blocked || !self.cell_in_domain(n) {
                    continue;
                }
                let ni = self.cell_index(n);
                if self.cell_ok.get(ni) && !seen.get(ni) {
                    seen.set(ni);
                    stack.push(n);
                }
            }
        }
        seen
    }
}

/// Trace the boundary loop through `start`, hugging the region (right turn
/// first at pinch points).
fn trace_loop(
    edges: &BTreeMap<Point, Vec<Dir>>,
    start: Point,
) -> Option<Vec<(Point, Dir)>> {
    let first = *edges.get(&start)?.first()?;
    let mut out = Vec::new();
    let (mut p, mut d) = (start, first);
    loop {
        out.push((p, d));
        let (dx, dy) = d.step();
        let q = (p.0 + dx, p.1 + dy);
        let avail = edges.get(&q).map(Vec::as_slice).unwrap_or(&[]);
        let next = [d.right(), d, d.left()]
            .into_iter()
            .find(|o| avail.contains(o))?;
        p = q;
        d = next;
        if p == start && d == first {
            return Some(out);
        }
    }
}

/// Which boundary arc carries the flood seeds.
#[derive(Debug, Clone, Copy)]
pub(crate) enum SeedPick {
    /// The arc running counterclockwise from the target stub foot to the
    /// source stub foot. In the canonical top-down frame this is the east
    /// side, so the unseeded side is everything left of the crossing.
    CcwTgtToSrc,
    /// The arc containing the loop vertex farthest (Chebyshev) from the
    /// given column; used for quarter-circuits, where the exterior side
    /// touches the annulus rim.
    FarthestFrom(Column),
}

/// The exact region cut off by one crossing curve: the region cells not
/// reachable from the seed arc, and the region columns strictly inside.
#[derive(Debug, Clone)]
pub(crate) struct CurveRegion {
    pub cells: Bits,
    pub cell_count: usize,
    pub columns: ColumnSet,
    cx0: i32,
    cy0: i32,
    w: usize,
    h: usize,
}

impl CurveRegion {
    pub(crate) fn contains_column(&self, c: Column) -> bool {
        self.columns.contains(&c)
    }

    fn cell_at(&self, (i, j): Point) -> bool {
        if i < self.cx0
            || j < self.cy0
            || i >= self.cx0 + self.w as i32
            || j >= self.cy0 + self.h as i32
        {
            return false;
        }
        self.cells
            .get((j - self.cy0) as usize * self.w + (i - self.cx0) as usize)
    }

    /// Whether the open midpoint of an off-curve lattice edge lies strictly
    /// inside. The caller guarantees the edge is not on the curve.
    pub(crate) fn contains_edge_midpoint(&self, a: Column, b: Column) -> bool {
        let m = (a.x + b.x, a.y + b.y); // doubled midpoint
        self.cell_at(m)
            || self.cell_at((m.0 - 1, m.1))
            || self.cell_at((m.0, m.1 - 1))
            || self.cell_at((m.0 - 1, m.1 - 1))
    }

    pub(crate) fn is_strict_subset(&self, other: &CurveRegion) -> bool {
        self.cells.is_strict_subset(&other.cells)
    }

    /// Enclosed cells as doubled-coordinate lower-left corners.
    pub(crate) fn cell_corners(&self) -> BTreeSet<(i32, i32)> {
        let mut out = BTreeSet::new();
        for j in 0..self.h {
            for i in 0..self.w {
                if self.cells.get(j * self.w + i) {
                    out.insert((self.cx0 + i as i32, self.cy0 + j as i32));
                }
            }
        }
        out
    }
}

/// Compute the region cut off by a crossing curve.
///
/// `curve` must be a self-avoiding column path inside `cols`; the stub
/// directions at its endpoints must each point at a non-region neighbour.
pub(crate) fn curve_region(
    bbox: &BoxRegion,
    cols: &ColumnSet,
    curve: &[Column],
    src_dir: Dir,
    tgt_dir: Dir,
    pick: SeedPick,
) -> Result<CurveRegion> {
    let mut grid = CellGrid::new(bbox, cols);
    let edges = grid.block_boundary();
    for pair in curve.windows(2) {
        grid.block_step(pair[0], pair[1]);
    }
    let src_foot = grid.block_stub(curve[0], src_dir);
    let tgt_foot = grid.block_stub(*curve.last().unwrap(), tgt_dir);

    let loop_edges = trace_loop(&edges, src_foot).ok_or_else(|| {
        Error::DegenerateGeometry("crossing endpoint is not on the region's outer boundary".into())
    })?;
    let m = loop_edges.len();
    let a = loop_edges
        .iter()
        .position(|(p, _)| *p == src_foot)
        .expect("loop starts at the source foot");
    let b = loop_edges
        .iter()
        .position(|(p, _)| *p == tgt_foot)
        .ok_or_else(|| {
            Error::DegenerateGeometry(
                "crossing endpoints lie on different boundary components".into(),
            )
        })?;
    let arc_between = |from: usize, to: usize| -> Vec<usize> {
        let mut out = Vec::new();
        let mut i = from;
        while i != to {
            out.push(i);
            i = (i + 1) % m;
        }
        out
    };
    let seed_arc: Vec<usize> = match pick {
        SeedPick::CcwTgtToSrc => arc_between(b, a),
        SeedPick::FarthestFrom(center) => {
            let far = loop_edges
                .iter()
                .enumerate()
                .max_by_key(|(_, (p, _))| {
                    ((p.0 - 2 * center.x).abs().max((p.1 - 2 * center.y).abs()), p.0, p.1)
                })
                .map(|(i, _)| i)
                .unwrap();
            let arc1 = arc_between(b, a);
            if arc1.contains(&far) {
                arc1
            } else {
                arc_between(a, b)
            }
        }
    };
    let seeds: Vec<Point> = seed_arc
        .into_iter()
        .map(|i| {
            let (p, d) = loop_edges[i];
            CellGrid::left_cell_of(p, d)
        })
        .collect();
    let reached = grid.flood(seeds);

    let mut cells = Bits::new(grid.w * grid.h);
    let mut count = 0usize;
    for j in 0..grid.h {
        for i in 0..grid.w {
            let idx = j * grid.w + i;
            if grid.cell_ok.get(idx) && !reached.get(idx) {
                cells.set(idx);
                count += 1;
            }
        }
    }

    let on_curve: BTreeSet<Column> = curve.iter().copied().collect();
    let mut columns = ColumnSet::new();
    for c in cols {
        if on_curve.contains(c) {
            continue;
        }
        let idx = grid.cell_index((2 * c.x, 2 * c.y));
        if cells.get(idx) {
            columns.insert(*c);
        }
    }

    Ok(CurveRegion {
        cells,
        cell_count: count,
        columns,
        cx0: grid.cx0,
        cy0: grid.cy0,
        w: grid.w,
        h: grid.h,
    })
}
