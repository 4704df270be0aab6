//! The minimal-region crossing engine.
//!
//! A crossing problem is a playable column region with designated source and
//! target columns, each exposed to the region boundary through its stub
//! direction. Among all open strongly self-avoiding crossings the engine
//! extracts the one whose cut-off region is minimal, by iterated surgery:
//! while any open material lets the current crossing deviate into its own
//! region, splice the deviation in, which strictly shrinks the region at
//! cell resolution. The fixed point is the unique extremal crossing ribbon.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::config::Configuration;
use crate::connectivity::Components;
use crate::lattice::{BoxRegion, Column, Site};
use crate::{ColumnSet, Result};

use super::cells::{curve_region, CurveRegion, Dir, SeedPick, DIRS};

pub(crate) struct CrossProblem {
    pub cols: ColumnSet,
    pub bbox: BoxRegion,
    pub src: BTreeMap<Column, Dir>,
    pub tgt: BTreeMap<Column, Dir>,
    pub pick: SeedPick,
}

impl CrossProblem {
    /// The canonical box problem: top row to bottom row, region to the west.
    pub(crate) fn for_box(boxr: &BoxRegion) -> CrossProblem {
        let cols: ColumnSet = boxr.columns().collect();
        let src = boxr.top_columns().map(|c| (c, Dir::N)).collect();
        let tgt = boxr.bottom_columns().map(|c| (c, Dir::S)).collect();
        CrossProblem {
            cols,
            bbox: *boxr,
            src,
            tgt,
            pick: SeedPick::CcwTgtToSrc,
        }
    }

    fn is_src(&self, c: Column) -> bool {
        self.src.contains_key(&c)
    }

    fn is_tgt(&self, c: Column) -> bool {
        self.tgt.contains_key(&c)
    }
}

/// Collapse a strongly self-avoiding site path to its column sequence.
pub(crate) fn curve_of(path: &[Site]) -> Vec<Column> {
    let mut out: Vec<Column> = Vec::with_capacity(path.len());
    for s in path {
        if out.last() != Some(&s.column()) {
            out.push(s.column());
        }
    }
    out
}

pub(crate) fn region_for(prob: &CrossProblem, curve: &[Column]) -> Result<CurveRegion> {
    let src_dir = prob.src[&curve[0]];
    let tgt_dir = prob.tgt[curve.last().unwrap()];
    curve_region(&prob.bbox, &prob.cols, curve, src_dir, tgt_dir, prob.pick)
}

/// The strongly-self-avoiding reduction: repeatedly remove exact loops
/// (keeping the later visit) and same-column detours (keeping both column
/// visits, which are slab-adjacent), until no loops remain. Endpoints are
/// never removed.
pub(crate) fn ssa_reduce(mut p: Vec<Site>) -> Vec<Site> {
    'outer: loop {
        for i in 0..p.len() {
            let mut j_found = None;
            for j in (i + 1..p.len()).rev() {
                if p[j] == p[i] {
                    j_found = Some(j);
                    break;
                }
            }
            if let Some(j) = j_found {
                p.drain(i..j);
                continue 'outer;
            }
        }
        for i in 0..p.len() {
            let mut j_found = None;
            for j in (i + 2..p.len()).rev() {
                if p[j].column() == p[i].column() {
                    j_found = Some(j);
                    break;
                }
            }
            if let Some(j) = j_found {
                p.drain(i + 1..j);
                continue 'outer;
            }
        }
        return p;
    }
}

/// Trim a site walk to the canonical crossing shape — start at the last
/// source contact before the first target contact — then remove loops.
pub(crate) fn canonical_crossing(walk: Vec<Site>, prob: &CrossProblem) -> Option<Vec<Site>> {
    let ft = walk.iter().position(|s| prob.is_tgt(s.column()))?;
    let fs = walk[..=ft].iter().rposition(|s| prob.is_src(s.column()))?;
    let reduced = ssa_reduce(walk[fs..=ft].to_vec());
    debug_assert!(is_valid_crossing(&reduced, prob));
    Some(reduced)
}

pub(crate) fn is_valid_crossing(path: &[Site], prob: &CrossProblem) -> bool {
    if path.is_empty()
        || !prob.is_src(path[0].column())
        || !prob.is_tgt(path.last().unwrap().column())
    {
        return false;
    }
    let mut seen: BTreeMap<Column, usize> = BTreeMap::new();
    for (i, s) in path.iter().enumerate() {
        if !prob.cols.contains(&s.column()) {
            return false;
        }
        if i > 0 && i + 1 < path.len() && (prob.is_src(s.column()) || prob.is_tgt(s.column())) {
            return false;
        }
        if i > 0 {
            let a = path[i - 1];
            let planar = (a.x - s.x).abs() + (a.y - s.y).abs();
            let ok = (planar == 1 && a.z == s.z) || (planar == 0 && a.z != s.z);
            if !ok {
                return false;
            }
        }
        if let Some(prev) = seen.insert(s.column(), i) {
            if i - prev > 1 {
                return false;
            }
        }
    }
    true
}

fn site_key(bbox: &BoxRegion, layers: u8, s: Site) -> usize {
    bbox.column_index(s.column()) * layers as usize + s.z as usize
}

fn site_from_key(bbox: &BoxRegion, layers: u8, k: usize) -> Site {
    let col_idx = k / layers as usize;
    let z = (k % layers as usize) as u8;
    let y = bbox.y_min + (col_idx / bbox.width() as usize) as i32;
    let x = bbox.x_min + (col_idx % bbox.width() as usize) as i32;
    Site::new(x, y, z)
}

fn open_neighbors(cfg: &Configuration, prob: &CrossProblem, s: Site) -> Vec<Site> {
    let mode = cfg.mode();
    let mut out = Vec::with_capacity(6);
    for d in DIRS {
        let c = d.offset(s.column());
        let n = c.site(s.z);
        if prob.cols.contains(&c) && cfg.is_open(n) {
            out.push(n);
        }
    }
    for z in 0..mode.layers() {
        if z != s.z && mode.layers_adjacent(s.z, z) {
            let n = Site::new(s.x, s.y, z);
            if cfg.is_open(n) {
                out.push(n);
            }
        }
    }
    out
}

/// Some open crossing of the problem, in canonical form, if one exists.
pub(crate) fn initial_crossing(cfg: &Configuration, prob: &CrossProblem) -> Option<Vec<Site>> {
    let layers = cfg.mode().layers();
    let size = prob.bbox.column_count() * layers as usize;
    let mut parent: Vec<u32> = vec![u32::MAX; size];
    let mut origin: Vec<bool> = vec![false; size];
    let mut queue: VecDeque<Site> = VecDeque::new();
    let mut sources: Vec<Site> = prob
        .src
        .keys()
        .flat_map(|c| (0..layers).map(move |z| c.site(z)))
        .filter(|s| cfg.is_open(*s))
        .collect();
    sources.sort();
    for s in &sources {
        let k = site_key(&prob.bbox, layers, *s);
        if !origin[k] {
            origin[k] = true;
            queue.push_back(*s);
        }
    }
    let mut hit: Option<Site> = None;
    while let Some(s) = queue.pop_front() {
        if prob.is_tgt(s.column()) {
            hit = Some(s);
            break;
        }
        for n in open_neighbors(cfg, prob, s) {
            let k = site_key(&prob.bbox, layers, n);
            if !origin[k] && parent[k] == u32::MAX {
                parent[k] = site_key(&prob.bbox, layers, s) as u32;
                queue.push_back(n);
            }
        }
    }
    let hit = hit?;
    let mut walk = vec![hit];
    let mut k = site_key(&prob.bbox, layers, hit);
    while !origin[k] {
        k = parent[k] as usize;
        walk.push(site_from_key(&prob.bbox, layers, k));
    }
    walk.reverse();
    canonical_crossing(walk, prob)
}

/// How an ear attaches at each end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum EarEnd {
    /// The ear attaches to the current curve at this column.
    Anchor(Column),
    /// The ear endpoint is a source/target column inside the region and
    /// becomes the new crossing's own endpoint.
    Boundary,
}

#[derive(Default)]
struct RootInfo {
    anchors: BTreeSet<Column>,
    has_src: bool,
    has_tgt: bool,
}

/// Shortest open site path through one component of the region interior
/// between the given attachment ends, including bridge sites over anchor
/// columns.
fn ear_path(
    cfg: &Configuration,
    prob: &CrossProblem,
    comps: &Components,
    root: u32,
    interior: &ColumnSet,
    from: EarEnd,
    to: EarEnd,
) -> Option<Vec<Site>> {
    let layers = cfg.mode().layers();
    let in_comp = |c: Column| interior.contains(&c) && comps.comp_of(c) == Some(root);

    // start sites, each with its optional bridge site over the from-anchor
    let mut starts: Vec<(Site, Option<Site>)> = Vec::new();
    match from {
        EarEnd::Anchor(z) => {
            let z_mask = cfg.open_layers(z);
            for d in DIRS {
                let c = d.offset(z);
                if !in_comp(c) {
                    continue;
                }
                let shared = cfg.open_layers(c) & z_mask;
                for l in 0..layers {
                    if shared & (1 << l) != 0 {
                        starts.push((c.site(l), Some(z.site(l))));
                    }
                }
            }
        }
        EarEnd::Boundary => {
            for c in interior {
                if prob.is_src(*c) && comps.comp_of(*c) == Some(root) {
                    for l in 0..layers {
                        let s = c.site(l);
                        if cfg.is_open(s) {
                            starts.push((s, None));
                        }
                    }
                }
            }
        }
    }
    starts.sort();

    let exit_bridge = |s: Site| -> Option<Option<Site>> {
        match to {
            EarEnd::Anchor(z) => {
                if s.column().is_adjacent4(&z) && cfg.open_layers(z) & (1 << s.z) != 0 {
                    Some(Some(z.site(s.z)))
                } else {
                    None
                }
            }
            EarEnd::Boundary => prob.is_tgt(s.column()).then_some(None),
        }
    };

    let size = prob.bbox.column_count() * layers as usize;
    let mut parent: Vec<u32> = vec![u32::MAX; size];
    let mut entry: BTreeMap<usize, Option<Site>> = BTreeMap::new();
    let mut queue: VecDeque<Site> = VecDeque::new();
    for (s, bridge) in starts {
        let k = site_key(&prob.bbox, layers, s);
        if let alloc::collections::btree_map::Entry::Vacant(e) = entry.entry(k) {
            e.insert(bridge);
            queue.push_back(s);
        }
    }
    let mut end: Option<(Site, Option<Site>)> = None;
    while let Some(s) = queue.pop_front() {
        if let Some(bridge) = exit_bridge(s) {
            end = Some((s, bridge));
            break;
        }
        for n in open_neighbors(cfg, prob, s) {
            if !in_comp(n.column()) {
                continue;
            }
            let k = site_key(&prob.bbox, layers, n);
            if !entry.contains_key(&k) && parent[k] == u32::MAX {
                parent[k] = site_key(&prob.bbox, layers, s) as u32;
                queue.push_back(n);
            }
        }
    }
    let (hit, end_bridge) = end?;

    let mut ear = vec![hit];
    let mut k = site_key(&prob.bbox, layers, hit);
    while !entry.contains_key(&k) {
        k = parent[k] as usize;
        ear.push(site_from_key(&prob.bbox, layers, k));
    }
    ear.reverse();
    if let Some(Some(bridge)) = entry.get(&site_key(&prob.bbox, layers, ear[0])) {
        ear.insert(0, *bridge);
    }
    if let Some(bridge) = end_bridge {
        ear.push(bridge);
    }
    Some(ear)
}

/// Groups of consecutive site indices per curve column.
fn column_groups(path: &[Site]) -> BTreeMap<Column, (usize, usize)> {
    let mut map: BTreeMap<Column, (usize, usize)> = BTreeMap::new();
    for (i, s) in path.iter().enumerate() {
        map.entry(s.column())
            .and_modify(|e| e.1 = i)
            .or_insert((i, i));
    }
    map
}

/// Splice an ear into the current crossing: follow the crossing to the
/// ear's first attachment, traverse the ear, rejoin at the second.
pub(crate) fn splice(
    cur: &[Site],
    curve: &[Column],
    ear: &[Site],
    from: EarEnd,
    to: EarEnd,
) -> Vec<Site> {
    let pos: BTreeMap<Column, usize> = curve.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let groups = column_groups(cur);
    let mut ear = ear.to_vec();
    let (mut from, mut to) = (from, to);
    if let (EarEnd::Anchor(z1), EarEnd::Anchor(z2)) = (from, to) {
        if pos[&z1] > pos[&z2] {
            ear.reverse();
            (from, to) = (EarEnd::Anchor(z2), EarEnd::Anchor(z1));
        }
    }
    let mut walk: Vec<Site> = Vec::with_capacity(cur.len() + ear.len());
    match from {
        EarEnd::Anchor(z1) => {
            let w1_idx = groups[&z1].0;
            walk.extend_from_slice(&cur[..=w1_idx]);
            if ear[0] == cur[w1_idx] {
                walk.extend_from_slice(&ear[1..]);
            } else {
                walk.extend_from_slice(&ear);
            }
        }
        EarEnd::Boundary => walk.extend_from_slice(&ear),
    }
    match to {
        EarEnd::Anchor(z2) => {
            let w2_idx = groups[&z2].1;
            if *walk.last().unwrap() == cur[w2_idx] {
                walk.extend_from_slice(&cur[w2_idx + 1..]);
            } else {
                walk.extend_from_slice(&cur[w2_idx..]);
            }
        }
        EarEnd::Boundary => {}
    }
    walk
}

/// One improvement step: find an open deviation into the current region,
/// splice it, and return the new crossing with its strictly smaller region.
fn improve(
    cfg: &Configuration,
    prob: &CrossProblem,
    cur: &[Site],
    curve: &[Column],
    reg: &CurveRegion,
) -> Result<Option<(Vec<Site>, Vec<Column>, CurveRegion)>> {
    let pos: BTreeMap<Column, usize> = curve.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let interior = &reg.columns;

    // A proposal whose canonical trim degenerates back to the current
    // crossing is skipped; that happens when an ear can only attach through
    // the crossing's own endpoint column, and no real improvement passes
    // that way.
    let accept = |walk: Vec<Site>| -> Result<Option<(Vec<Site>, Vec<Column>, CurveRegion)>> {
        let Some(t) = canonical_crossing(walk, prob) else {
            return Ok(None);
        };
        let t_curve = curve_of(&t);
        let t_reg = region_for(prob, &t_curve)?;
        if t_reg.cells.is_strict_subset(&reg.cells) {
            Ok(Some((t, t_curve, t_reg)))
        } else {
            Ok(None)
        }
    };

    if !interior.is_empty() {
        let comps = Components::build(cfg, prob.bbox, |c| interior.contains(&c));
        let mut roots: BTreeMap<u32, RootInfo> = BTreeMap::new();
        for c in interior {
            let Some(root) = comps.comp_of(*c) else { continue };
            let info = roots.entry(root).or_default();
            info.has_src |= prob.is_src(*c);
            info.has_tgt |= prob.is_tgt(*c);
            let mask = cfg.open_layers(*c);
            for d in DIRS {
                let n = d.offset(*c);
                if pos.contains_key(&n) && cfg.open_layers(n) & mask != 0 {
                    info.anchors.insert(n);
                }
            }
        }

        let last_pos = curve.len() - 1;
        for (root, info) in &roots {
            let mut by_pos: Vec<Column> = info.anchors.iter().copied().collect();
            by_pos.sort_by_key(|c| pos[c]);
            let mut plans: Vec<(EarEnd, EarEnd)> = Vec::new();
            if by_pos.len() >= 2 {
                plans.push((
                    EarEnd::Anchor(by_pos[0]),
                    EarEnd::Anchor(*by_pos.last().unwrap()),
                ));
            }
            if info.has_src {
                // attaching at the crossing's first column trims to a no-op
                if let Some(z) = by_pos.iter().find(|c| pos[c] > 0) {
                    plans.push((EarEnd::Boundary, EarEnd::Anchor(*z)));
                }
            }
            if info.has_tgt {
                if let Some(z) = by_pos.iter().rev().find(|c| pos[c] < last_pos) {
                    plans.push((EarEnd::Anchor(*z), EarEnd::Boundary));
                }
            }
            if info.has_src && info.has_tgt {
                plans.push((EarEnd::Boundary, EarEnd::Boundary));
            }
            for (from, to) in plans {
                let Some(ear) = ear_path(cfg, prob, &comps, *root, interior, from, to) else {
                    continue;
                };
                let walk = if from == EarEnd::Boundary && to == EarEnd::Boundary {
                    ear
                } else {
                    splice(cur, curve, &ear, from, to)
                };
                if let Some(out) = accept(walk)? {
                    return Ok(Some(out));
                }
            }
        }
    }

    // shortcut edges: two non-consecutive curve columns joined by an open
    // slab edge whose midpoint lies inside the region
    for (i, a) in curve.iter().enumerate() {
        for b in curve.iter().skip(i + 2) {
            if !a.is_adjacent4(b) {
                continue;
            }
            let shared = cfg.open_layers(*a) & cfg.open_layers(*b);
            if shared == 0 || !reg.contains_edge_midpoint(*a, *b) {
                continue;
            }
            let l = shared.trailing_zeros() as u8;
            let ear = [a.site(l), b.site(l)];
            let walk = splice(cur, curve, &ear, EarEnd::Anchor(*a), EarEnd::Anchor(*b));
            if let Some(out) = accept(walk)? {
                return Ok(Some(out));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
pub(crate) fn improve_for_tests(
    cfg: &Configuration,
    prob: &CrossProblem,
    cur: &[Site],
    curve: &[Column],
    reg: &CurveRegion,
) -> Option<(Vec<Site>, Vec<Column>, CurveRegion)> {
    improve(cfg, prob, cur, curve, reg).unwrap()
}

/// Extract the minimal-region open crossing by iterated surgery.
pub(crate) fn minimal_crossing(
    cfg: &Configuration,
    prob: &CrossProblem,
) -> Result<Option<(Vec<Site>, Vec<Column>, CurveRegion)>> {
    let Some(mut cur) = initial_crossing(cfg, prob) else {
        return Ok(None);
    };
    let mut curve = curve_of(&cur);
    let mut reg = region_for(prob, &curve)?;
    // each step frees at least one cell
    let mut budget = 4 * prob.bbox.column_count() + 16;
    while let Some((t, t_curve, t_reg)) = improve(cfg, prob, &cur, &curve, &reg)? {
        cur = t;
        curve = t_curve;
        reg = t_reg;
        budget -= 1;
        if budget == 0 {
            debug_assert!(false, "surgery loop exceeded its area budget");
            break;
        }
    }
    Ok(Some((cur, curve, reg)))
}

/// Direct extraction of the minimal top-down crossing of a box: ordered
/// depth-first search on the column graph, always trying the right-hand
/// turn first so the walk hugs the west side of its cluster.
pub(crate) fn leftmost_fast_curve(cfg: &Configuration, boxr: &BoxRegion) -> Option<Vec<Column>> {
    let edge = |a: Column, b: Column| -> bool {
        boxr.contains_column(b) && cfg.open_layers(a) & cfg.open_layers(b) != 0
    };
    for sx in boxr.x_min..=boxr.x_max {
        let start = Column::new(sx, boxr.y_max);
        if cfg.open_layers(start) == 0 {
            continue;
        }
        if boxr.y_min == boxr.y_max {
            return Some(vec![start]);
        }
        let mut stack: Vec<(Column, Dir, u8)> = vec![(start, Dir::S, 0)];
        let mut on_stack: BTreeSet<Column> = [start].into_iter().collect();
        while let Some(frame) = stack.last_mut() {
            let (c, heading, turn) = (frame.0, frame.1, frame.2);
            if turn >= 3 {
                on_stack.remove(&c);
                stack.pop();
                continue;
            }
            frame.2 += 1;
            let dir = match turn {
                0 => heading.right(),
                1 => heading,
                _ => heading.left(),
            };
            let n = dir.offset(c);
            if n.y == boxr.y_max || on_stack.contains(&n) || !edge(c, n) {
                continue;
            }
            if n.y == boxr.y_min {
                let mut path: Vec<Column> = stack.iter().map(|f| f.0).collect();
                path.push(n);
                return Some(path);
            }
            stack.push((n, dir, 0));
            on_stack.insert(n);
        }
    }
    None
}
