//! Lattice path algebra: the strongly-self-avoiding reduction, projected
//! paths, exact Jordan left regions, crossing surgery, and the extremal
//! crossing ribbons (left-most, lowest, innermost) built on one engine.
//!
//! A top-down crossing of a box is a site path whose first vertex is on the
//! top side, last vertex on the bottom side, and no other vertex on either.
//! Its projection, after collapsing consecutive layer moves, is a
//! self-avoiding column path; closing that curve with two half-edge stubs
//! and the region's west boundary yields a Jordan curve whose bounded side
//! is the crossing's left region. The left-most open crossing ribbon is the
//! one whose left region is minimal; it is unique, and the event that a
//! given ribbon is extremal depends only on the ribbon and its region.

mod cells;
mod engine;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::Configuration;
use crate::error::Error;
use crate::lattice::{Annulus, BoxRegion, Column, Ribbon, Site};
use crate::{ColumnSet, Result};

use cells::{Dir, SeedPick};
use engine::{CrossProblem, EarEnd};

/// An ordered site sequence with unit steps (layer moves stay in-column).
/// The empty path is allowed only as a degenerate connector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePath {
    sites: Vec<Site>,
}

impl LatticePath {
    pub fn new(sites: Vec<Site>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::EmptySet("path sites"));
        }
        for w in sites.windows(2) {
            let (a, b) = (w[0], w[1]);
            let planar = (a.x - b.x).abs() + (a.y - b.y).abs();
            let ok = (planar == 1 && a.z == b.z) || (planar == 0 && a.z != b.z);
            if !ok {
                return Err(Error::InvalidParameter(format!(
                    "path step ({}, {}, {}) -> ({}, {}, {}) is not a slab edge",
                    a.x, a.y, a.z, b.x, b.y, b.z
                )));
            }
        }
        Ok(LatticePath { sites })
    }

    /// The zero-column connector between already-adjacent ribbons.
    pub fn empty() -> Self {
        LatticePath { sites: Vec::new() }
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn first(&self) -> Option<Site> {
        self.sites.first().copied()
    }

    pub fn last(&self) -> Option<Site> {
        self.sites.last().copied()
    }

    /// The ribbon spanned by the path's columns.
    pub fn ribbon(&self, region: BoxRegion) -> Result<Ribbon> {
        crate::lattice::ribbon_of(self.sites.iter().copied(), region)
    }
}

/// A self-avoiding column path with unit steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectedPath {
    columns: Vec<Column>,
}

impl ProjectedPath {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptySet("projected path columns"));
        }
        for w in columns.windows(2) {
            if !w[0].is_adjacent4(&w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "projected step ({}, {}) -> ({}, {}) is not a lattice edge",
                    w[0].x, w[0].y, w[1].x, w[1].y
                )));
            }
        }
        let distinct: BTreeSet<Column> = columns.iter().copied().collect();
        if distinct.len() != columns.len() {
            return Err(Error::NotStronglySelfAvoiding);
        }
        Ok(ProjectedPath { columns })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Columns strictly left of a crossing's curve, with the exact enclosed
/// area at quarter-column cell resolution. `area` counts columns (slivers
/// and empty pockets do not contribute); `cell_area` counts enclosed cells,
/// the measure the surgery loop strictly decreases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeftRegion {
    columns: ColumnSet,
    cells: BTreeSet<(i32, i32)>,
}

impl LeftRegion {
    pub fn columns(&self) -> &ColumnSet {
        &self.columns
    }

    /// Number of lattice columns strictly inside.
    pub fn area(&self) -> usize {
        self.columns.len()
    }

    /// Enclosed quarter-column cells, identified by their doubled-coordinate
    /// lower-left corner.
    pub fn cells(&self) -> &BTreeSet<(i32, i32)> {
        &self.cells
    }

    /// Number of enclosed quarter-column cells.
    pub fn cell_area(&self) -> usize {
        self.cells.len()
    }

    /// Whether this region is strictly contained in another, at cell
    /// resolution.
    pub fn is_strict_subset(&self, other: &LeftRegion) -> bool {
        self.cells.len() < other.cells.len() && self.cells.is_subset(&other.cells)
    }
}

/// Whether equal projections only occur at consecutive indices.
pub fn is_strongly_self_avoiding(p: &LatticePath) -> bool {
    let sites = p.sites();
    let mut last_seen: BTreeMap<Column, usize> = BTreeMap::new();
    for (i, s) in sites.iter().enumerate() {
        if let Some(prev) = last_seen.insert(s.column(), i) {
            if i - prev > 1 {
                return false;
            }
        }
    }
    true
}

fn check_crossing_shape(sites: &[Site], boxr: &BoxRegion, name: &str) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::NotACrossing(format!("{name} is empty")));
    }
    for s in sites {
        if !boxr.contains_column(s.column()) {
            return Err(Error::NotACrossing(format!(
                "{name} leaves the box at ({}, {}, {})",
                s.x, s.y, s.z
            )));
        }
    }
    if sites[0].y != boxr.y_max {
        return Err(Error::NotACrossing(format!(
            "{name} does not start on the top side"
        )));
    }
    if sites.last().unwrap().y != boxr.y_min {
        return Err(Error::NotACrossing(format!(
            "{name} does not end on the bottom side"
        )));
    }
    for s in &sites[1..sites.len().saturating_sub(1)] {
        if s.y == boxr.y_max || s.y == boxr.y_min {
            return Err(Error::NotACrossing(format!(
                "{name} touches the top or bottom side at an interior vertex"
            )));
        }
    }
    Ok(())
}

/// The strongly-self-avoiding reduction of a top-down crossing walk: remove
/// exact loops and same-column detours until none remain. The first and
/// last vertices are never removed and the output vertex set is a subset of
/// the input's, so openness is preserved.
pub fn remove_loops(p: &LatticePath, boxr: &BoxRegion) -> Result<LatticePath> {
    check_crossing_shape(p.sites(), boxr, "walk")?;
    let reduced = engine::ssa_reduce(p.sites().to_vec());
    LatticePath::new(reduced)
}

/// Project a strongly self-avoiding path and collapse consecutive duplicate
/// columns, yielding a self-avoiding column path.
pub fn tilde_pi(p: &LatticePath) -> Result<ProjectedPath> {
    if !is_strongly_self_avoiding(p) {
        return Err(Error::NotStronglySelfAvoiding);
    }
    ProjectedPath::new(engine::curve_of(p.sites()))
}

fn check_projected_crossing(pp: &ProjectedPath, boxr: &BoxRegion) -> Result<()> {
    let cols = pp.columns();
    if cols.is_empty() {
        return Err(Error::NotACrossing("projected path is empty".into()));
    }
    for c in cols {
        if !boxr.contains_column(*c) {
            return Err(Error::NotACrossing(format!(
                "projected path leaves the box at ({}, {})",
                c.x, c.y
            )));
        }
    }
    if cols[0].y != boxr.y_max || cols.last().unwrap().y != boxr.y_min {
        return Err(Error::NotACrossing(
            "projected path does not join the top side to the bottom side".into(),
        ));
    }
    for c in &cols[1..cols.len().saturating_sub(1)] {
        if c.y == boxr.y_max || c.y == boxr.y_min {
            return Err(Error::NotACrossing(
                "projected path touches the top or bottom side at an interior vertex".into(),
            ));
        }
    }
    Ok(())
}

/// The lattice columns of the box strictly inside the Jordan curve built
/// from a self-avoiding top-down crossing: the curve is the path polyline
/// plus vertical stubs to just outside the box and the western portion of
/// the box boundary. Computed as the cells not reachable from the east.
pub fn jordan_left_region(pp: &ProjectedPath, boxr: &BoxRegion) -> Result<LeftRegion> {
    check_projected_crossing(pp, boxr)?;
    let prob = CrossProblem::for_box(boxr);
    let reg = engine::region_for(&prob, pp.columns())?;
    let cells = reg.cell_corners();
    Ok(LeftRegion {
        columns: reg.columns,
        cells,
    })
}

/// Rewire two open strongly self-avoiding top-down crossings of one box
/// into one whose left region is strictly smaller than `q`'s: follow `q`
/// until `p`'s curve deviates into `q`'s left region, traverse the
/// deviation, and rejoin `q`. The output's vertices come from `p ∪ q`, so
/// it is open whenever both inputs are.
pub fn surgery(p: &LatticePath, q: &LatticePath, boxr: &BoxRegion) -> Result<LatticePath> {
    for (path, name) in [(p, "P"), (q, "Q")] {
        check_crossing_shape(path.sites(), boxr, name)
            .map_err(|e| Error::SurgeryPrecondition(format!("{e}")))?;
        if !is_strongly_self_avoiding(path) {
            return Err(Error::SurgeryPrecondition(format!(
                "{name} is not strongly self-avoiding"
            )));
        }
    }
    let prob = CrossProblem::for_box(boxr);
    let q_sites = q.sites();
    let q_curve = engine::curve_of(q_sites);
    let q_reg = engine::region_for(&prob, &q_curve)?;
    let q_pos: BTreeMap<Column, usize> =
        q_curve.iter().enumerate().map(|(i, c)| (*c, i)).collect();

    let p_sites = p.sites();
    let p_curve = engine::curve_of(p_sites);
    // site index ranges per curve column of p
    let mut p_groups: BTreeMap<Column, (usize, usize)> = BTreeMap::new();
    for (i, s) in p_sites.iter().enumerate() {
        p_groups
            .entry(s.column())
            .and_modify(|e| e.1 = i)
            .or_insert((i, i));
    }

    // first maximal run of p's curve strictly inside q's left region
    let mut run: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < p_curve.len() {
        if q_reg.contains_column(p_curve[i]) {
            let start = i;
            while i + 1 < p_curve.len() && q_reg.contains_column(p_curve[i + 1]) {
                i += 1;
            }
            run = Some((start, i));
            break;
        }
        i += 1;
    }

    let walk = if let Some((a, b)) = run {
        let (from, ear_start) = if a == 0 {
            (EarEnd::Boundary, 0usize)
        } else {
            let z1 = p_curve[a - 1];
            (EarEnd::Anchor(z1), p_groups[&z1].1)
        };
        let (to, ear_end) = if b + 1 == p_curve.len() {
            (EarEnd::Boundary, p_sites.len() - 1)
        } else {
            let z2 = p_curve[b + 1];
            (EarEnd::Anchor(z2), p_groups[&z2].0)
        };
        let ear = &p_sites[ear_start..=ear_end];
        engine::splice(q_sites, &q_curve, ear, from, to)
    } else {
        // degenerate deviation: a step of p between two non-consecutive
        // columns of q's curve, cutting through the region
        let mut found = None;
        for w in p_sites.windows(2) {
            let (a, b) = (w[0].column(), w[1].column());
            if a == b {
                continue;
            }
            let (Some(&pa), Some(&pb)) = (q_pos.get(&a), q_pos.get(&b)) else {
                continue;
            };
            if pa.abs_diff(pb) >= 2 && q_reg.contains_edge_midpoint(a, b) {
                found = Some(([w[0], w[1]], a, b));
                break;
            }
        }
        let Some((ear, a, b)) = found else {
            return Err(Error::SurgeryPrecondition(
                "the curve of P does not enter the left region of Q".into(),
            ));
        };
        engine::splice(q_sites, &q_curve, &ear, EarEnd::Anchor(a), EarEnd::Anchor(b))
    };

    let out = engine::canonical_crossing(walk, &prob).ok_or_else(|| {
        Error::SurgeryPrecondition("spliced walk lost its crossing shape".into())
    })?;
    debug_assert!({
        let t_reg = engine::region_for(&prob, &engine::curve_of(&out)).unwrap();
        t_reg.is_strict_subset(&q_reg)
    });
    LatticePath::new(out)
}

/// The left-most open crossing with its ribbon, left region and one
/// witnessing path.
#[derive(Debug, Clone)]
pub struct LeftmostCrossing {
    pub ribbon: Ribbon,
    pub left: LeftRegion,
    pub path: LatticePath,
}

fn validate_box_in_cfg(cfg: &Configuration, boxr: &BoxRegion) -> Result<()> {
    if !cfg.region().contains_box(boxr) {
        return Err(Error::OutsideRegion(format!(
            "box [{},{}]x[{},{}] not inside configuration region",
            boxr.x_min, boxr.x_max, boxr.y_min, boxr.y_max
        )));
    }
    Ok(())
}

/// Left-most crossing ribbon by iterated surgery, the construction the
/// decomposition proof follows.
pub fn leftmost_ribbon_by_surgery(
    cfg: &Configuration,
    boxr: &BoxRegion,
) -> Result<Option<Ribbon>> {
    validate_box_in_cfg(cfg, boxr)?;
    let prob = CrossProblem::for_box(boxr);
    Ok(engine::minimal_crossing(cfg, &prob)?
        .map(|(_, curve, _)| Ribbon::from_columns(curve.into_iter().collect(), *boxr).unwrap()))
}

/// Left-most crossing ribbon by the direct west-hugging search on the
/// column graph. Must agree with the surgery construction everywhere.
pub fn leftmost_ribbon_fast(cfg: &Configuration, boxr: &BoxRegion) -> Result<Option<Ribbon>> {
    validate_box_in_cfg(cfg, boxr)?;
    Ok(engine::leftmost_fast_curve(cfg, boxr)
        .map(|curve| Ribbon::from_columns(curve.into_iter().collect(), *boxr).unwrap()))
}

/// The left-most open top-down crossing ribbon of a box, or `None` when no
/// open crossing exists.
pub fn leftmost_ribbon(cfg: &Configuration, boxr: &BoxRegion) -> Result<Option<Ribbon>> {
    leftmost_ribbon_fast(cfg, boxr)
}

/// Left region of a crossing ribbon: the union of the left regions of every
/// crossing curve traversing exactly the ribbon's columns. This is the
/// dependence region of the left-most event: together with the ribbon it
/// carries every site whose state the event can read.
pub fn ribbon_left_region(ribbon: &Ribbon, boxr: &BoxRegion) -> Result<LeftRegion> {
    let prob = CrossProblem::for_box(boxr);
    ribbon_left_region_impl(&prob, ribbon, boxr)
}

fn ribbon_left_region_impl(
    prob: &CrossProblem,
    ribbon: &Ribbon,
    boxr: &BoxRegion,
) -> Result<LeftRegion> {
    let support = ribbon.columns();
    let starts: Vec<Column> = support.iter().copied().filter(|c| c.y == boxr.y_max).collect();
    let mut union_cols = ColumnSet::new();
    let mut union_cells: BTreeSet<(i32, i32)> = BTreeSet::new();

    // depth-first enumeration of crossing sequencings covering the support
    let mut stack: Vec<Column> = Vec::new();
    let mut seen: BTreeSet<Column> = BTreeSet::new();
    fn dfs(
        cur: Column,
        stack: &mut Vec<Column>,
        seen: &mut BTreeSet<Column>,
        support: &ColumnSet,
        boxr: &BoxRegion,
        out: &mut Vec<Vec<Column>>,
    ) {
        stack.push(cur);
        seen.insert(cur);
        if cur.y == boxr.y_min && seen.len() == support.len() {
            out.push(stack.clone());
        } else {
            for n in cur.neighbours4() {
                if support.contains(&n)
                    && !seen.contains(&n)
                    && n.y != boxr.y_max
                    && (n.y != boxr.y_min || seen.len() + 1 == support.len())
                {
                    dfs(n, stack, seen, support, boxr, out);
                }
            }
        }
        stack.pop();
        seen.remove(&cur);
    }
    let mut curves = Vec::new();
    for s in starts {
        dfs(s, &mut stack, &mut seen, support, boxr, &mut curves);
    }
    for curve in &curves {
        let reg = engine::region_for(prob, curve)?;
        union_cols.extend(reg.columns.iter().copied());
        union_cells.extend(reg.cell_corners());
    }
    Ok(LeftRegion {
        columns: union_cols,
        cells: union_cells,
    })
}

/// Full detail of the left-most crossing: ribbon, left region (unioned over
/// all curves with that ribbon) and one witnessing open path.
pub fn leftmost_crossing_detail(
    cfg: &Configuration,
    boxr: &BoxRegion,
) -> Result<Option<LeftmostCrossing>> {
    validate_box_in_cfg(cfg, boxr)?;
    let prob = CrossProblem::for_box(boxr);
    let Some((path, curve, _)) = engine::minimal_crossing(cfg, &prob)? else {
        return Ok(None);
    };
    let ribbon = Ribbon::from_columns(curve.iter().copied().collect(), *boxr).unwrap();
    let left = ribbon_left_region_impl(&prob, &ribbon, boxr)?;
    Ok(Some(LeftmostCrossing {
        ribbon,
        left,
        path: LatticePath::new(path)?,
    }))
}

/// A connected column region with designated boundary pieces a crossing
/// must join.
#[derive(Debug, Clone)]
pub struct ColumnRegion {
    pub columns: ColumnSet,
    pub sources: ColumnSet,
    pub targets: ColumnSet,
}

fn hull_of(cols: &ColumnSet) -> Result<BoxRegion> {
    if cols.is_empty() {
        return Err(Error::EmptySet("region columns"));
    }
    BoxRegion::new(
        cols.iter().map(|c| c.x).min().unwrap(),
        cols.iter().map(|c| c.x).max().unwrap(),
        cols.iter().map(|c| c.y).min().unwrap(),
        cols.iter().map(|c| c.y).max().unwrap(),
    )
}

fn stub_out_of(cols: &ColumnSet, c: Column) -> Result<Dir> {
    cells::DIRS
        .into_iter()
        .find(|d| !cols.contains(&d.offset(c)))
        .ok_or_else(|| {
            Error::DegenerateGeometry(format!(
                "boundary column ({}, {}) is interior to the region",
                c.x, c.y
            ))
        })
}

/// The lowest open crossing ribbon of a column region from its source piece
/// to its target piece: the left-most machinery applied under the rotation
/// `(x, y) ↦ (y, −x)`, which maps "lowest" to "left-most".
pub fn lowest_crossing_ribbon(
    cfg: &Configuration,
    region: &ColumnRegion,
) -> Result<Option<Ribbon>> {
    let orig_hull = hull_of(&region.columns)?;
    validate_box_in_cfg(cfg, &orig_hull)?;
    if region.sources.is_empty() || region.targets.is_empty() {
        return Err(Error::EmptySet("crossing boundary pieces"));
    }
    for piece in [&region.sources, &region.targets] {
        if let Some(c) = piece.iter().find(|c| !region.columns.contains(c)) {
            return Err(Error::OutsideRegion(format!(
                "boundary column ({}, {})",
                c.x, c.y
            )));
        }
    }

    let rot = |c: Column| Column::new(c.y, -c.x);
    let unrot = |c: Column| Column::new(-c.y, c.x);
    let cols: ColumnSet = region.columns.iter().map(|c| rot(*c)).collect();
    let bbox = hull_of(&cols)?;
    let mode = cfg.mode();
    let mut rcfg = Configuration::all_closed(bbox, mode);
    for c in &cols {
        let o = unrot(*c);
        for z in 0..mode.layers() {
            if cfg.is_open(o.site(z)) {
                rcfg.set(c.site(z), true);
            }
        }
    }
    let mut src = BTreeMap::new();
    for c in &region.sources {
        let rc = rot(*c);
        src.insert(rc, stub_out_of(&cols, rc)?);
    }
    let mut tgt = BTreeMap::new();
    for c in &region.targets {
        let rc = rot(*c);
        tgt.insert(rc, stub_out_of(&cols, rc)?);
    }
    let prob = CrossProblem {
        cols,
        bbox,
        src,
        tgt,
        pick: SeedPick::CcwTgtToSrc,
    };
    Ok(engine::minimal_crossing(&rcfg, &prob)?.map(|(_, curve, _)| {
        let cols: ColumnSet = curve.into_iter().map(unrot).collect();
        Ribbon::from_columns(cols, orig_hull).unwrap()
    }))
}

/// The innermost open crossing quarter-circuit ribbon in an annulus sector:
/// an open path through `annulus ∩ region` attaching to ribbon `r` on one
/// end and ribbon `u` on the other, minimizing the enclosed side toward the
/// annulus center.
pub fn innermost_quarter_circuit(
    cfg: &Configuration,
    annulus: &Annulus,
    region: &ColumnSet,
    r: &Ribbon,
    u: &Ribbon,
) -> Result<Option<Ribbon>> {
    validate_box_in_cfg(cfg, &annulus.outer_box())?;
    let cols: ColumnSet = annulus
        .columns()
        .filter(|c| region.contains(c) && !r.contains(*c) && !u.contains(*c))
        .collect();
    if cols.is_empty() {
        return Err(Error::DegenerateGeometry(
            "annulus sector contains no playable columns".into(),
        ));
    }
    let toward = |c: Column, rib: &Ribbon| -> Option<Dir> {
        cells::DIRS.into_iter().find(|d| rib.contains(d.offset(c)))
    };
    let mut src = BTreeMap::new();
    let mut tgt = BTreeMap::new();
    for c in &cols {
        if let Some(d) = toward(*c, r) {
            src.insert(*c, d);
        }
        if let Some(d) = toward(*c, u) {
            tgt.insert(*c, d);
        }
    }
    // a column adjacent to both ribbons counts as a source only
    for c in src.keys() {
        tgt.remove(c);
    }
    if src.is_empty() || tgt.is_empty() {
        return Err(Error::DegenerateGeometry(
            "a bounding ribbon is not adjacent to the annulus sector".into(),
        ));
    }
    let bbox = hull_of(&cols)?;
    let prob = CrossProblem {
        cols,
        bbox,
        src,
        tgt,
        pick: SeedPick::FarthestFrom(annulus.center),
    };
    Ok(engine::minimal_crossing(cfg, &prob)?.map(|(_, curve, _)| {
        Ribbon::from_columns(curve.into_iter().collect(), annulus.outer_box()).unwrap()
    }))
}

/// Deterministic shortest connector: a column path of at most `max_len`
/// columns inside `allowed`, whose first column touches `a` and last
/// touches `b`, lexicographically smallest among the shortest. Returns the
/// empty path when the ribbons are already adjacent, `None` when no such
/// connector exists.
pub fn connector_path(
    a: &Ribbon,
    b: &Ribbon,
    allowed: &ColumnSet,
    max_len: usize,
) -> Option<LatticePath> {
    let adjacent_direct = a
        .columns()
        .iter()
        .any(|c| c.neighbours4().iter().any(|n| b.contains(*n)));
    if adjacent_direct {
        return Some(LatticePath::empty());
    }
    // columns-to-b distance, counting columns on the path inclusive
    let mut dist: BTreeMap<Column, usize> = BTreeMap::new();
    let mut frontier: Vec<Column> = allowed
        .iter()
        .copied()
        .filter(|c| b.is_adjacent(*c))
        .collect();
    for c in &frontier {
        dist.insert(*c, 1);
    }
    let mut d = 1;
    while !frontier.is_empty() && d < max_len {
        let mut next = Vec::new();
        for c in &frontier {
            for n in c.neighbours4() {
                if allowed.contains(&n) && !dist.contains_key(&n) {
                    dist.insert(n, d + 1);
                    next.push(n);
                }
            }
        }
        frontier = next;
        d += 1;
    }
    let start = allowed
        .iter()
        .copied()
        .filter(|c| a.is_adjacent(*c) && dist.contains_key(c))
        .min_by_key(|c| (dist[c], *c))?;
    if dist[&start] > max_len {
        return None;
    }
    let mut cols = vec![start];
    let mut cur = start;
    while dist[&cur] > 1 {
        let next = cur
            .neighbours4()
            .into_iter()
            .filter(|n| dist.get(n) == Some(&(dist[&cur] - 1)))
            .min()
            .expect("distance field is consistent");
        cols.push(next);
        cur = next;
    }
    LatticePath::new(cols.into_iter().map(|c| c.site(0)).collect()).ok()
}

/// Deterministic junction column within lattice distance 2 of both ribbons.
pub fn choose_junction(r: &Ribbon, u: &Ribbon) -> Result<Column> {
    let near = |rib: &Ribbon| -> ColumnSet {
        let mut out = ColumnSet::new();
        for c in rib.columns() {
            for dx in -2i32..=2 {
                for dy in -2i32..=2 {
                    if dx.abs() + dy.abs() <= 2 {
                        out.insert(Column::new(c.x + dx, c.y + dy));
                    }
                }
            }
        }
        out
    };
    near(r)
        .intersection(&near(u))
        .min_by_key(|c| **c)
        .copied()
        .ok_or_else(|| {
            Error::DegenerateGeometry("ribbons are more than distance 2 apart everywhere".into())
        })
}

/// All self-avoiding top-down crossing column paths of a box, in a fixed
/// deterministic order. Exhaustive-oracle support for small boxes.
pub fn all_crossing_curves(boxr: &BoxRegion) -> Vec<ProjectedPath> {
    let mut out = Vec::new();
    let mut stack: Vec<Column> = Vec::new();
    let mut seen: BTreeSet<Column> = BTreeSet::new();
    fn dfs(
        cur: Column,
        boxr: &BoxRegion,
        stack: &mut Vec<Column>,
        seen: &mut BTreeSet<Column>,
        out: &mut Vec<ProjectedPath>,
    ) {
        stack.push(cur);
        seen.insert(cur);
        if cur.y == boxr.y_min {
            out.push(ProjectedPath::new(stack.clone()).unwrap());
        } else {
            for n in [
                Column::new(cur.x, cur.y - 1),
                Column::new(cur.x - 1, cur.y),
                Column::new(cur.x + 1, cur.y),
                Column::new(cur.x, cur.y + 1),
            ] {
                if boxr.contains_column(n) && !seen.contains(&n) && n.y != boxr.y_max {
                    dfs(n, boxr, stack, seen, out);
                }
            }
        }
        stack.pop();
        seen.remove(&cur);
    }
    for c in boxr.top_columns() {
        if boxr.y_min == boxr.y_max {
            out.push(ProjectedPath::new(vec![c]).unwrap());
        } else {
            dfs(c, boxr, &mut stack, &mut seen, &mut out);
        }
    }
    out
}

/// Whether a column path can be traversed by an open site path in the
/// configuration: feasible layers are propagated along the curve, switching
/// layers inside a column whenever enough of it is open.
pub fn curve_is_open(pp: &ProjectedPath, cfg: &Configuration) -> bool {
    let mode = cfg.mode();
    let cols = pp.columns();
    let mut feasible = cfg.open_layers(cols[0]);
    if feasible == 0 {
        return false;
    }
    for w in cols.windows(2) {
        let here = cfg.open_layers(w[0]);
        // allow in-column layer moves between open, adjacent layers
        let mut extended = feasible;
        loop {
            let mut grown = extended;
            for z1 in 0..mode.layers() {
                if extended & (1 << z1) == 0 {
                    continue;
                }
                for z2 in 0..mode.layers() {
                    if here & (1 << z2) != 0 && mode.layers_adjacent(z1, z2) {
                        grown |= 1 << z2;
                    }
                }
            }
            if grown == extended {
                break;
            }
            extended = grown;
        }
        feasible = extended & cfg.open_layers(w[1]);
        if feasible == 0 {
            return false;
        }
    }
    true
}
