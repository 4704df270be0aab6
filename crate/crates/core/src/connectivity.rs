//! Cluster structure and event detection.
//!
//! The load-bearing data structure is the column graph: one node per column
//! holding at least one open site, carrying its set of open layers, with an
//! edge between lattice-adjacent columns exactly when they share an open
//! layer. All layers of one column are mutually adjacent in both graph
//! modes, so two sites are joined by an open path iff their columns' nodes
//! lie in one component of this quotient. Every event detector reduces to
//! component queries on column graphs restricted to the event's geometry;
//! circuits use a cut-ray double cover.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::Configuration;
use crate::error::Error;
use crate::lattice::{reflect_ribbon, Annulus, BoxRegion, Column, Ribbon, Site};
use crate::{ColumnSet, Result};

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut i: u32) -> u32 {
        while self.parent[i as usize] != i {
            let grandparent = self.parent[self.parent[i as usize] as usize];
            self.parent[i as usize] = grandparent;
            i = grandparent;
        }
        i
    }

    /// Returns true when the two sets were distinct.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }
}

/// The thin-sandwich quotient of a configuration: one node per column with
/// an open site, edges between adjacent columns sharing an open layer.
#[derive(Debug, Clone)]
pub struct ColumnGraph {
    region: BoxRegion,
    /// Node id per column in `(y, x)` order; `u32::MAX` marks closed columns.
    node_of: Vec<u32>,
    nodes: Vec<(Column, u8)>,
}

/// Component label per column-graph node, canonicalized to the smallest
/// node index of each component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabels {
    labels: Vec<u32>,
}

impl ClusterLabels {
    pub fn label(&self, node: usize) -> u32 {
        self.labels[node]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn component_count(&self) -> usize {
        self.labels
            .iter()
            .enumerate()
            .filter(|(i, l)| **l == *i as u32)
            .count()
    }
}

impl ColumnGraph {
    pub fn region(&self) -> &BoxRegion {
        &self.region
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, i: usize) -> (Column, u8) {
        self.nodes[i]
    }

    pub fn node_of(&self, c: Column) -> Option<usize> {
        if !self.region.contains_column(c) {
            return None;
        }
        let idx = self.node_of[self.region.column_index(c)];
        (idx != u32::MAX).then_some(idx as usize)
    }

    /// Open-layer mask of a column's node.
    pub fn layers(&self, node: usize) -> u8 {
        self.nodes[node].1
    }

    /// Undirected edges as node index pairs.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (i, (c, mask)) in self.nodes.iter().enumerate() {
            for n in [Column::new(c.x + 1, c.y), Column::new(c.x, c.y + 1)] {
                if let Some(j) = self.node_of(n) {
                    if mask & self.nodes[j].1 != 0 {
                        out.push((i as u32, j as u32));
                    }
                }
            }
        }
        out
    }

    pub fn component_of(&self, c: Column, labels: &ClusterLabels) -> Option<u32> {
        self.node_of(c).map(|i| labels.label(i))
    }
}

/// Build the column graph of a whole configuration.
pub fn column_graph(cfg: &Configuration) -> ColumnGraph {
    let region = *cfg.region();
    let mut node_of = vec![u32::MAX; region.column_count()];
    let mut nodes = Vec::new();
    for c in region.columns() {
        let mask = cfg.open_layers(c);
        if mask != 0 {
            node_of[region.column_index(c)] = nodes.len() as u32;
            nodes.push((c, mask));
        }
    }
    ColumnGraph {
        region,
        node_of,
        nodes,
    }
}

/// Connected-component labels of a column graph.
pub fn clusters(g: &ColumnGraph) -> ClusterLabels {
    let mut uf = UnionFind::new(g.nodes.len());
    for (a, b) in g.edges() {
        uf.union(a, b);
    }
    let mut smallest = vec![u32::MAX; g.nodes.len()];
    for i in 0..g.nodes.len() as u32 {
        let r = uf.find(i) as usize;
        if smallest[r] == u32::MAX {
            smallest[r] = i;
        }
    }
    let labels = (0..g.nodes.len() as u32)
        .map(|i| smallest[uf.find(i) as usize])
        .collect();
    ClusterLabels { labels }
}

/// Column components of a configuration restricted to a sub-box and a column
/// filter. Used by every detector; the quotient stays sound under column-wise
/// restriction because intra-column edges are never cut.
pub(crate) struct Components {
    base: BoxRegion,
    mask: Vec<u8>,
    comp: Vec<u32>,
}

impl Components {
    pub(crate) fn build<F: Fn(Column) -> bool>(
        cfg: &Configuration,
        within: BoxRegion,
        allow: F,
    ) -> Components {
        let w = within.width() as usize;
        let count = within.column_count();
        let mut mask = vec![0u8; count];
        for (i, c) in within.columns().enumerate() {
            if allow(c) {
                mask[i] = cfg.open_layers(c);
            }
        }
        let mut uf = UnionFind::new(count);
        for i in 0..count {
            if mask[i] == 0 {
                continue;
            }
            if i % w != 0 && mask[i - 1] & mask[i] != 0 {
                uf.union(i as u32, (i - 1) as u32);
            }
            if i >= w && mask[i - w] & mask[i] != 0 {
                uf.union(i as u32, (i - w) as u32);
            }
        }
        let comp = (0..count as u32)
            .map(|i| if mask[i as usize] != 0 { uf.find(i) } else { u32::MAX })
            .collect();
        Components {
            base: within,
            mask,
            comp,
        }
    }

    pub(crate) fn layer_mask(&self, c: Column) -> u8 {
        if !self.base.contains_column(c) {
            return 0;
        }
        self.mask[self.base.column_index(c)]
    }

    pub(crate) fn comp_of(&self, c: Column) -> Option<u32> {
        if !self.base.contains_column(c) {
            return None;
        }
        let r = self.comp[self.base.column_index(c)];
        (r != u32::MAX).then_some(r)
    }

    pub(crate) fn count(&self) -> usize {
        self.comp.len()
    }
}

/// A symbolic event over configurations. Every kind is increasing: opening
/// a site never destroys the event.
#[derive(Debug, Clone, PartialEq)]
pub enum EventSpec {
    /// Open left-right crossing of the centered box `[-n, n] × [-m, m]`.
    CrossLr { n: i32, m: i32 },
    /// Open top-down crossing of an arbitrary box.
    TopDown { region: BoxRegion },
    /// Open circuit around the center inside a square annulus.
    Circuit { annulus: Annulus },
    /// Long-way crossing of the k-th box of the alternating dyadic chain.
    ChainCross { k: u32, n: i32 },
    /// Top-down crossing of the lower-middle quarter square `S3` that is
    /// hooked, inside the enclosing rectangle `S2`, to `S2`'s right side.
    QuarterAnchor { n: i32 },
    /// The right side of `S2` reaches the given `S3` crossing ribbon through
    /// the region strictly right of the ribbon and its mirror image.
    RightHook { n: i32, crossing: Ribbon },
    /// An open path in `annulus ∩ within` holding a fully open column next
    /// to ribbon `a` and a fully open column next to ribbon `b`.
    AnnulusHook {
        annulus: Annulus,
        within: ColumnSet,
        a: Ribbon,
        b: Ribbon,
    },
    /// Open connection between two site sets inside a box.
    Connect {
        region: BoxRegion,
        sources: Vec<Site>,
        targets: Vec<Site>,
    },
}

/// The middle rectangle `S2 = [n/2, 3n/2] × [0, n]`.
pub fn s2_box(n: i32) -> Result<BoxRegion> {
    check_quarter_scale(n)?;
    BoxRegion::new(n / 2, 3 * n / 2, 0, n)
}

/// The lower quarter square `S3 = [n/2, n] × [0, n/2]`.
pub fn s3_box(n: i32) -> Result<BoxRegion> {
    check_quarter_scale(n)?;
    BoxRegion::new(n / 2, n, 0, n / 2)
}

fn check_quarter_scale(n: i32) -> Result<()> {
    if n < 4 || n % 4 != 0 {
        return Err(Error::InvalidParameter(format!(
            "quarter-box geometry needs n ≡ 0 (mod 4) and n >= 4, got {n}"
        )));
    }
    Ok(())
}

impl EventSpec {
    /// Smallest box a configuration must cover for this event.
    pub fn ambient_region(&self) -> Result<BoxRegion> {
        match self {
            EventSpec::CrossLr { n, m } => BoxRegion::centered(*n, *m),
            EventSpec::TopDown { region } => Ok(*region),
            EventSpec::Circuit { annulus } => Ok(annulus.outer_box()),
            EventSpec::ChainCross { k, n } => crate::lattice::bk_box(*k, *n),
            EventSpec::QuarterAnchor { n } => s2_box(*n),
            EventSpec::RightHook { n, .. } => s2_box(*n),
            EventSpec::AnnulusHook { annulus, .. } => Ok(annulus.outer_box()),
            EventSpec::Connect { region, .. } => Ok(*region),
        }
    }

    /// Short stable name for reports.
    pub fn kind_name(&self) -> &'static str {
        match self {
            EventSpec::CrossLr { .. } => "cross_lr",
            EventSpec::TopDown { .. } => "top_down",
            EventSpec::Circuit { .. } => "circuit",
            EventSpec::ChainCross { .. } => "chain_cross",
            EventSpec::QuarterAnchor { .. } => "quarter_anchor",
            EventSpec::RightHook { .. } => "right_hook",
            EventSpec::AnnulusHook { .. } => "annulus_hook",
            EventSpec::Connect { .. } => "connect",
        }
    }
}

/// Whether the event holds in the configuration.
pub fn occurs(event: &EventSpec, cfg: &Configuration) -> Result<bool> {
    let ambient = event.ambient_region()?;
    if !cfg.region().contains_box(&ambient) {
        return Err(Error::OutsideRegion(format!(
            "event box [{},{}]x[{},{}] not inside configuration region",
            ambient.x_min, ambient.x_max, ambient.y_min, ambient.y_max
        )));
    }
    match event {
        EventSpec::CrossLr { .. } => Ok(side_to_side(cfg, ambient, Axis::Horizontal)),
        EventSpec::TopDown { region } => Ok(side_to_side(cfg, *region, Axis::Vertical)),
        EventSpec::Circuit { annulus } => Ok(circuit_occurs(cfg, annulus)),
        EventSpec::ChainCross { k, .. } => {
            let axis = if k % 2 == 1 { Axis::Vertical } else { Axis::Horizontal };
            Ok(side_to_side(cfg, ambient, axis))
        }
        EventSpec::QuarterAnchor { n } => quarter_anchor_occurs(cfg, *n),
        EventSpec::RightHook { n, crossing } => right_hook_occurs(cfg, *n, crossing),
        EventSpec::AnnulusHook {
            annulus,
            within,
            a,
            b,
        } => annulus_hook_occurs(cfg, annulus, within, a, b),
        EventSpec::Connect {
            region,
            sources,
            targets,
        } => connect_occurs(cfg, *region, sources, targets),
    }
}

enum Axis {
    Horizontal,
    Vertical,
}

fn side_to_side(cfg: &Configuration, region: BoxRegion, axis: Axis) -> bool {
    let comps = Components::build(cfg, region, |_| true);
    let mut on_start = vec![false; comps.count()];
    let (start, finish): (Vec<Column>, Vec<Column>) = match axis {
        Axis::Horizontal => (region.left_columns().collect(), region.right_columns().collect()),
        Axis::Vertical => (region.top_columns().collect(), region.bottom_columns().collect()),
    };
    for c in start {
        if let Some(r) = comps.comp_of(c) {
            on_start[r as usize] = true;
        }
    }
    finish
        .into_iter()
        .any(|c| comps.comp_of(c).is_some_and(|r| on_start[r as usize]))
}

/// Cut-ray circuit detection: cut the annulus along the dual ray east of the
/// center, duplicate every node into two copies, route cut-crossing edges to
/// the opposite copy, and look for a node joined to its own twin.
fn circuit_occurs(cfg: &Configuration, ann: &Annulus) -> bool {
    let base = ann.outer_box();
    let count = base.column_count();
    let mut mask = vec![0u8; count];
    for c in ann.columns() {
        mask[base.column_index(c)] = cfg.open_layers(c);
    }
    let mut uf = UnionFind::new(2 * count);
    let crosses_cut =
        |c: Column| -> bool { c.y == ann.center.y && c.x > ann.center.x };
    for c in ann.columns() {
        let i = base.column_index(c);
        if mask[i] == 0 {
            continue;
        }
        let east = Column::new(c.x + 1, c.y);
        if ann.contains_column(east) {
            let j = base.column_index(east);
            if mask[i] & mask[j] != 0 {
                uf.union(2 * i as u32, 2 * j as u32);
                uf.union(2 * i as u32 + 1, 2 * j as u32 + 1);
            }
        }
        let north = Column::new(c.x, c.y + 1);
        if ann.contains_column(north) {
            let j = base.column_index(north);
            if mask[i] & mask[j] != 0 {
                if crosses_cut(c) {
                    uf.union(2 * i as u32, 2 * j as u32 + 1);
                    uf.union(2 * i as u32 + 1, 2 * j as u32);
                } else {
                    uf.union(2 * i as u32, 2 * j as u32);
                    uf.union(2 * i as u32 + 1, 2 * j as u32 + 1);
                }
            }
        }
    }
    ann.columns().any(|c| {
        let i = base.column_index(c);
        mask[i] != 0 && uf.find(2 * i as u32) == uf.find(2 * i as u32 + 1)
    })
}

fn quarter_anchor_occurs(cfg: &Configuration, n: i32) -> Result<bool> {
    let s2 = s2_box(n)?;
    let s3 = s3_box(n)?;
    let comps3 = Components::build(cfg, s3, |_| true);
    let comps2 = Components::build(cfg, s2, |_| true);

    let mut right_hooked = vec![false; comps2.count()];
    for c in s2.right_columns() {
        if let Some(r) = comps2.comp_of(c) {
            right_hooked[r as usize] = true;
        }
    }

    let mut top = vec![false; comps3.count()];
    let mut bottom = vec![false; comps3.count()];
    let mut hooked = vec![false; comps3.count()];
    for c in s3.columns() {
        let Some(r3) = comps3.comp_of(c) else { continue };
        if c.y == s3.y_max {
            top[r3 as usize] = true;
        }
        if c.y == s3.y_min {
            bottom[r3 as usize] = true;
        }
        if comps2
            .comp_of(c)
            .is_some_and(|r2| right_hooked[r2 as usize])
        {
            hooked[r3 as usize] = true;
        }
    }
    Ok((0..comps3.count()).any(|r| top[r] && bottom[r] && hooked[r]))
}

fn right_hook_occurs(cfg: &Configuration, n: i32, crossing: &Ribbon) -> Result<bool> {
    let s2 = s2_box(n)?;
    let s3 = s3_box(n)?;
    for c in crossing.columns() {
        if !s3.contains_column(*c) {
            return Err(Error::OutsideRegion(format!(
                "crossing ribbon column ({}, {}) not inside the quarter box",
                c.x, c.y
            )));
        }
    }
    let mirrored = reflect_ribbon(crossing, n);
    let mut wall: ColumnSet = crossing.columns().clone();
    wall.extend(mirrored.columns().iter().copied());
    let g = region_right_of_wall(&wall, &s2);

    let comps = Components::build(cfg, s2, |c| g.contains(&c));
    let mut right = vec![false; comps.count()];
    for c in s2.right_columns() {
        if let Some(r) = comps.comp_of(c) {
            right[r as usize] = true;
        }
    }
    Ok(g.iter().any(|c| {
        crossing.is_adjacent(*c)
            && comps.comp_of(*c).is_some_and(|r| right[r as usize])
    }))
}

fn annulus_hook_occurs(
    cfg: &Configuration,
    ann: &Annulus,
    within: &ColumnSet,
    a: &Ribbon,
    b: &Ribbon,
) -> Result<bool> {
    let base = ann.outer_box();
    let comps = Components::build(cfg, base, |c| {
        ann.contains_column(c) && within.contains(&c)
    });
    let full = cfg.mode().full_mask();
    let mut near_a = vec![false; comps.count()];
    let mut near_b = vec![false; comps.count()];
    for c in ann.columns() {
        if !within.contains(&c) || comps.layer_mask(c) != full {
            continue;
        }
        let Some(r) = comps.comp_of(c) else { continue };
        if a.is_adjacent(c) {
            near_a[r as usize] = true;
        }
        if b.is_adjacent(c) {
            near_b[r as usize] = true;
        }
    }
    Ok((0..comps.count()).any(|r| near_a[r] && near_b[r]))
}

fn connect_occurs(
    cfg: &Configuration,
    region: BoxRegion,
    sources: &[Site],
    targets: &[Site],
) -> Result<bool> {
    for s in sources.iter().chain(targets) {
        if !region.contains_site(*s, cfg.mode()) {
            return Err(Error::OutsideRegion(format!(
                "endpoint site ({}, {}, {})",
                s.x, s.y, s.z
            )));
        }
    }
    let comps = Components::build(cfg, region, |_| true);
    let mut from_source = vec![false; comps.count()];
    for s in sources {
        if cfg.is_open(*s) {
            if let Some(r) = comps.comp_of(s.column()) {
                from_source[r as usize] = true;
            }
        }
    }
    Ok(targets.iter().any(|s| {
        cfg.is_open(*s)
            && comps
                .comp_of(s.column())
                .is_some_and(|r| from_source[r as usize])
    }))
}

/// 4-adjacency flood fill over a column predicate.
pub(crate) fn flood_columns<F: Fn(Column) -> bool>(
    base: &BoxRegion,
    starts: impl IntoIterator<Item = Column>,
    passable: F,
) -> Vec<bool> {
    let mut seen = vec![false; base.column_count()];
    let mut queue: Vec<Column> = Vec::new();
    for c in starts {
        if base.contains_column(c) && passable(c) && !seen[base.column_index(c)] {
            seen[base.column_index(c)] = true;
            queue.push(c);
        }
    }
    while let Some(c) = queue.pop() {
        for n in c.neighbours4() {
            if base.contains_column(n) && passable(n) && !seen[base.column_index(n)] {
                seen[base.column_index(n)] = true;
                queue.push(n);
            }
        }
    }
    seen
}

fn ribbon_crosses_top_down(columns: &ColumnSet, boxr: &BoxRegion) -> bool {
    let reached = flood_columns(
        boxr,
        boxr.top_columns().filter(|c| columns.contains(c)),
        |c| columns.contains(&c),
    );
    boxr.bottom_columns()
        .any(|c| columns.contains(&c) && reached[boxr.column_index(c)])
}

/// Columns of the box strictly left of a top-down crossing ribbon: off the
/// ribbon and not reachable from the box's right side by a lattice path
/// avoiding the ribbon.
pub fn region_left_of(r: &Ribbon, boxr: &BoxRegion) -> Result<ColumnSet> {
    for c in r.columns() {
        if !boxr.contains_column(*c) {
            return Err(Error::OutsideRegion(format!(
                "ribbon column ({}, {})",
                c.x, c.y
            )));
        }
    }
    if !ribbon_crosses_top_down(r.columns(), boxr) {
        return Err(Error::NotACrossing(
            "ribbon does not contain a top-down lattice path of the box".into(),
        ));
    }
    let reached = flood_columns(
        boxr,
        boxr.right_columns().filter(|c| !r.contains(*c)),
        |c| !r.contains(c),
    );
    Ok(boxr
        .columns()
        .filter(|c| !r.contains(*c) && !reached[boxr.column_index(*c)])
        .collect())
}

fn region_right_of_wall(wall: &ColumnSet, boxr: &BoxRegion) -> ColumnSet {
    let reached = flood_columns(
        boxr,
        boxr.right_columns().filter(|c| !wall.contains(c)),
        |c| !wall.contains(&c),
    );
    boxr.columns()
        .filter(|c| reached[boxr.column_index(*c)])
        .collect()
}

/// The region of `s2` strictly right of a crossing ribbon and its mirror:
/// every column reachable from the right side avoiding the joint wall. Each
/// such column can also reach the wall, so the two clauses of the defining
/// property coincide.
pub fn region_right_g(r: &Ribbon, r_reflected: &Ribbon, s2: &BoxRegion) -> Result<ColumnSet> {
    let mut wall: ColumnSet = r.columns().clone();
    wall.extend(r_reflected.columns().iter().copied());
    for c in &wall {
        if !s2.contains_column(*c) {
            return Err(Error::OutsideRegion(format!(
                "wall column ({}, {})",
                c.x, c.y
            )));
        }
    }
    if !ribbon_crosses_top_down(&wall, s2) {
        return Err(Error::NotACrossing(
            "joint ribbon does not cross the rectangle top to bottom".into(),
        ));
    }
    Ok(region_right_of_wall(&wall, s2))
}

/// Columns of `g` cut off from `g`'s bottom boundary by the ribbon `u`,
/// unioned with the extra ribbon's columns.
pub fn region_above(
    g: &ColumnSet,
    u: &Ribbon,
    extra: Option<&Ribbon>,
) -> Result<ColumnSet> {
    if g.is_empty() {
        return Err(Error::EmptySet("region for the above-cut"));
    }
    let min_y = g.iter().map(|c| c.y).min().unwrap();
    let max_y = g.iter().map(|c| c.y).max().unwrap();
    let x_min = g.iter().map(|c| c.x).min().unwrap();
    let x_max = g.iter().map(|c| c.x).max().unwrap();
    let base = BoxRegion::new(x_min, x_max, min_y, max_y)?;
    let reached = flood_columns(
        &base,
        g.iter().copied().filter(|c| c.y == min_y && !u.contains(*c)),
        |c| g.contains(&c) && !u.contains(c),
    );
    if g.iter()
        .any(|c| c.y == max_y && !u.contains(*c) && reached[base.column_index(*c)])
    {
        return Err(Error::NotACrossing(
            "ribbon does not separate the region's bottom from its top".into(),
        ));
    }
    let mut out: ColumnSet = g
        .iter()
        .copied()
        .filter(|c| !u.contains(*c) && !reached[base.column_index(*c)])
        .collect();
    if let Some(e) = extra {
        out.extend(e.columns().iter().copied());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{enumerate, sample, Configuration, Seed};
    use crate::lattice::{GraphMode, Site};

    fn cfg_with(region: BoxRegion, mode: GraphMode, open: &[Site]) -> Configuration {
        Configuration::from_open_sites(region, mode, open.iter().copied()).unwrap()
    }

    /// Site-level BFS over open sites, the reduction oracle.
    fn site_bfs_partition(cfg: &Configuration) -> alloc::collections::BTreeMap<Site, usize> {
        let mode = cfg.mode();
        let mut label = alloc::collections::BTreeMap::new();
        let mut next = 0usize;
        for s in cfg.region().sites(mode) {
            if !cfg.is_open(s) || label.contains_key(&s) {
                continue;
            }
            let mut stack = vec![s];
            label.insert(s, next);
            while let Some(t) = stack.pop() {
                for n in crate::lattice::neighbors(t, mode, Some(cfg.region())).unwrap() {
                    if cfg.is_open(n) && !label.contains_key(&n) {
                        label.insert(n, next);
                        stack.push(n);
                    }
                }
            }
            next += 1;
        }
        label
    }

    fn partitions_agree(cfg: &Configuration) -> bool {
        let g = column_graph(cfg);
        let labels = clusters(&g);
        let site_labels = site_bfs_partition(cfg);
        let open: Vec<Site> = cfg.open_sites().collect();
        for (i, a) in open.iter().enumerate() {
            for b in open.iter().skip(i + 1) {
                let quotient_same = g.component_of(a.column(), &labels)
                    == g.component_of(b.column(), &labels);
                let site_same = site_labels[a] == site_labels[b];
                if quotient_same != site_same {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn single_column_both_layers_one_node() {
        let b = BoxRegion::new(0, 2, 0, 2).unwrap();
        let cfg = cfg_with(b, GraphMode::Sandwich2, &[Site::new(1, 1, 0), Site::new(1, 1, 1)]);
        let g = column_graph(&cfg);
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.layers(0), 0b11);
    }

    #[test]
    fn mismatched_layers_no_edge() {
        let b = BoxRegion::new(0, 2, 0, 0).unwrap();
        let cfg = cfg_with(b, GraphMode::Sandwich2, &[Site::new(0, 0, 0), Site::new(1, 0, 1)]);
        let g = column_graph(&cfg);
        assert_eq!(g.node_count(), 2);
        assert!(g.edges().is_empty());
        let labels = clusters(&g);
        assert_eq!(labels.component_count(), 2);
    }

    #[test]
    fn empty_graph_no_labels() {
        let b = BoxRegion::new(0, 1, 0, 1).unwrap();
        let g = column_graph(&Configuration::all_closed(b, GraphMode::Sandwich2));
        assert_eq!(g.node_count(), 0);
        assert!(clusters(&g).is_empty());
    }

    #[test]
    fn all_open_box_single_component() {
        let b = BoxRegion::new(0, 3, 0, 3).unwrap();
        let g = column_graph(&Configuration::all_open(b, GraphMode::Sandwich2));
        assert_eq!(clusters(&g).component_count(), 1);
    }

    #[test]
    fn two_distant_sites_two_components() {
        let b = BoxRegion::new(0, 4, 0, 4).unwrap();
        let cfg = cfg_with(b, GraphMode::Sandwich2, &[Site::new(0, 0, 0), Site::new(4, 4, 1)]);
        assert_eq!(clusters(&column_graph(&cfg)).component_count(), 2);
    }

    #[test]
    fn reduction_matches_site_bfs_random() {
        let b = BoxRegion::new(0, 4, 0, 4).unwrap();
        let seed = Seed::new(2024);
        for trial in 0..1000 {
            let p = 0.2 + 0.6 * (trial % 7) as f64 / 6.0;
            let cfg = sample(b, GraphMode::Sandwich2, p, seed, trial).unwrap();
            assert!(partitions_agree(&cfg), "trial {trial} disagreed");
        }
    }

    #[test]
    fn reduction_matches_site_bfs_periodic3() {
        let b = BoxRegion::new(0, 3, 0, 3).unwrap();
        let seed = Seed::new(77);
        for trial in 0..300 {
            let cfg = sample(b, GraphMode::Periodic3, 0.4, seed, trial).unwrap();
            assert!(partitions_agree(&cfg), "trial {trial} disagreed");
        }
    }

    #[test]
    fn reduction_matches_site_bfs_exhaustive_small() {
        // every configuration of a 2x2-column box (8 sites)
        let b = BoxRegion::new(0, 1, 0, 1).unwrap();
        for cfg in enumerate(b, GraphMode::Sandwich2, 24).unwrap() {
            assert!(partitions_agree(&cfg));
        }
    }

    #[test]
    fn cross_lr_basics() {
        let e = EventSpec::CrossLr { n: 1, m: 1 };
        let b = BoxRegion::centered(1, 1).unwrap();
        assert!(occurs(&e, &Configuration::all_open(b, GraphMode::Sandwich2)).unwrap());
        assert!(!occurs(&e, &Configuration::all_closed(b, GraphMode::Sandwich2)).unwrap());
    }

    #[test]
    fn cross_lr_blocked_by_layer_mismatch() {
        let b = BoxRegion::centered(1, 1).unwrap();
        let cfg = cfg_with(
            b,
            GraphMode::Sandwich2,
            &[Site::new(-1, 0, 0), Site::new(0, 0, 1), Site::new(1, 0, 0)],
        );
        assert!(!occurs(&EventSpec::CrossLr { n: 1, m: 1 }, &cfg).unwrap());
        // opening the shared layer connects it
        let mut cfg2 = cfg.clone();
        cfg2.set(Site::new(0, 0, 0), true);
        assert!(occurs(&EventSpec::CrossLr { n: 1, m: 1 }, &cfg2).unwrap());
    }

    #[test]
    fn circuit_explicit_square_loop() {
        let ann = Annulus::new(Column::new(0, 0), 1, 2).unwrap();
        let b = ann.outer_box();
        let loop_sites: Vec<Site> = b
            .columns()
            .filter(|c| c.cheb(&Column::new(0, 0)) == 2)
            .map(|c| c.site(0))
            .collect();
        let cfg = cfg_with(b, GraphMode::Sandwich2, &loop_sites);
        assert!(occurs(&EventSpec::Circuit { annulus: ann }, &cfg).unwrap());

        // removing one column of the loop breaks it
        let broken: Vec<Site> = loop_sites
            .iter()
            .copied()
            .filter(|s| s.column() != Column::new(2, 0))
            .collect();
        let cfg2 = cfg_with(b, GraphMode::Sandwich2, &broken);
        assert!(!occurs(&EventSpec::Circuit { annulus: ann }, &cfg2).unwrap());
    }

    /// Independent circuit oracle: BFS over (node, signed cut crossings),
    /// looking for a closed open walk whose projection winds once.
    fn circuit_winding_oracle(cfg: &Configuration, ann: &Annulus) -> bool {
        let base = ann.outer_box();
        let count = base.column_count();
        let mut mask = vec![0u8; count];
        for c in ann.columns() {
            mask[base.column_index(c)] = cfg.open_layers(c);
        }
        let max_wind = 3i32; // levels tracked: enough to find any ±1 walk
        let offset = max_wind as usize;
        let levels = 2 * offset + 1;
        for start in ann.columns() {
            let si = base.column_index(start);
            if mask[si] == 0 {
                continue;
            }
            let mut seen = vec![false; count * levels];
            let key = |i: usize, w: i32| i * levels + (w + max_wind) as usize;
            let mut queue = alloc::collections::VecDeque::new();
            seen[key(si, 0)] = true;
            queue.push_back((start, 0i32));
            while let Some((c, w)) = queue.pop_front() {
                let i = base.column_index(c);
                for n in c.neighbours4() {
                    if !ann.contains_column(n) {
                        continue;
                    }
                    let j = base.column_index(n);
                    if mask[i] & mask[j] == 0 {
                        continue;
                    }
                    let dw = if c.y == ann.center.y && n.y == ann.center.y + 1 && c.x > ann.center.x
                    {
                        1
                    } else if n.y == ann.center.y && c.y == ann.center.y + 1 && n.x > ann.center.x {
                        -1
                    } else {
                        0
                    };
                    let w2 = w + dw;
                    if w2.abs() > max_wind {
                        continue;
                    }
                    if n == start && w2.abs() == 1 {
                        return true;
                    }
                    if !seen[key(j, w2)] {
                        seen[key(j, w2)] = true;
                        queue.push_back((n, w2));
                    }
                }
            }
        }
        false
    }

    #[test]
    fn circuit_cut_ray_matches_winding_oracle_exhaustive_columns() {
        // exhaustively over column-level open/closed patterns of Ann(1,2)
        let ann = Annulus::new(Column::new(0, 0), 1, 2).unwrap();
        let b = ann.outer_box();
        let cols: Vec<Column> = ann.columns().collect();
        assert_eq!(cols.len(), 16);
        for pattern in 0u32..(1 << 16) {
            let open: Vec<Site> = cols
                .iter()
                .enumerate()
                .filter(|(i, _)| (pattern >> i) & 1 == 1)
                .flat_map(|(_, c)| [c.site(0), c.site(1)])
                .collect();
            let cfg = cfg_with(b, GraphMode::Sandwich2, &open);
            assert_eq!(
                circuit_occurs(&cfg, &ann),
                circuit_winding_oracle(&cfg, &ann),
                "pattern {pattern:#x} disagreed"
            );
        }
    }

    #[test]
    fn circuit_cut_ray_matches_winding_oracle_random_sites() {
        let seed = Seed::new(31);
        for (ann, trials) in [
            (Annulus::new(Column::new(0, 0), 1, 2).unwrap(), 6000u64),
            (Annulus::new(Column::new(0, 0), 2, 4).unwrap(), 4000u64),
        ] {
            let b = ann.outer_box();
            for t in 0..trials {
                let p = 0.3 + 0.5 * (t % 5) as f64 / 4.0;
                let cfg = sample(b, GraphMode::Sandwich2, p, seed, t).unwrap();
                assert_eq!(
                    circuit_occurs(&cfg, &ann),
                    circuit_winding_oracle(&cfg, &ann),
                    "trial {t} disagreed"
                );
            }
        }
    }

    #[test]
    fn detectors_are_increasing_under_single_flips() {
        let seed = Seed::new(404);
        let ann = Annulus::new(Column::new(0, 0), 1, 2).unwrap();
        let events = [
            (EventSpec::CrossLr { n: 2, m: 2 }, BoxRegion::centered(2, 2).unwrap()),
            (
                EventSpec::TopDown {
                    region: BoxRegion::new(0, 3, 0, 3).unwrap(),
                },
                BoxRegion::new(0, 3, 0, 3).unwrap(),
            ),
            (EventSpec::Circuit { annulus: ann }, ann.outer_box()),
        ];
        for (event, region) in events {
            for t in 0..200 {
                let cfg = sample(region, GraphMode::Sandwich2, 0.5, seed, t).unwrap();
                let before = occurs(&event, &cfg).unwrap();
                if !before {
                    continue;
                }
                // opening any single site must keep the event true
                for s in region.sites(GraphMode::Sandwich2) {
                    if !cfg.is_open(s) {
                        let mut more = cfg.clone();
                        more.set(s, true);
                        assert!(occurs(&event, &more).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn event_outside_region_is_domain_error() {
        let b = BoxRegion::centered(1, 1).unwrap();
        let cfg = Configuration::all_open(b, GraphMode::Sandwich2);
        assert!(matches!(
            occurs(&EventSpec::CrossLr { n: 5, m: 5 }, &cfg),
            Err(Error::OutsideRegion(_))
        ));
    }

    #[test]
    fn region_left_of_straight_wall() {
        let boxr = BoxRegion::new(0, 4, 0, 4).unwrap();
        let wall: ColumnSet = (0..=4).map(|y| Column::new(2, y)).collect();
        let r = Ribbon::from_columns(wall, boxr).unwrap();
        let left = region_left_of(&r, &boxr).unwrap();
        let expect: ColumnSet = boxr.columns().filter(|c| c.x < 2).collect();
        assert_eq!(left, expect);
    }

    #[test]
    fn region_left_of_full_box_is_empty() {
        let boxr = BoxRegion::new(0, 2, 0, 2).unwrap();
        let r = Ribbon::from_columns(boxr.columns().collect(), boxr).unwrap();
        assert!(region_left_of(&r, &boxr).unwrap().is_empty());
    }

    #[test]
    fn region_left_of_staircase_matches_hand_flood() {
        let boxr = BoxRegion::new(0, 4, 0, 4).unwrap();
        // staircase: down at x=1 to y=2, east to x=3, down to y=0
        let stairs: ColumnSet = [
            (1, 4),
            (1, 3),
            (1, 2),
            (2, 2),
            (3, 2),
            (3, 1),
            (3, 0),
        ]
        .into_iter()
        .map(|(x, y)| Column::new(x, y))
        .collect();
        let r = Ribbon::from_columns(stairs, boxr).unwrap();
        let left = region_left_of(&r, &boxr).unwrap();
        let expect: ColumnSet = [
            (0, 0),
            (0, 1),
            (0, 2),
            (0, 3),
            (0, 4),
            (1, 0),
            (1, 1),
            (2, 0),
            (2, 1),
        ]
        .into_iter()
        .map(|(x, y)| Column::new(x, y))
        .collect();
        assert_eq!(left, expect);
    }

    #[test]
    fn region_left_partition_property() {
        let boxr = BoxRegion::new(0, 4, 0, 4).unwrap();
        let stairs: ColumnSet = [(2, 4), (2, 3), (1, 3), (1, 2), (1, 1), (2, 1), (2, 0)]
            .into_iter()
            .map(|(x, y)| Column::new(x, y))
            .collect();
        let r = Ribbon::from_columns(stairs.clone(), boxr).unwrap();
        let left = region_left_of(&r, &boxr).unwrap();
        let reached = flood_columns(
            &boxr,
            boxr.right_columns().filter(|c| !stairs.contains(c)),
            |c| !stairs.contains(&c),
        );
        let right: ColumnSet = boxr
            .columns()
            .filter(|c| reached[boxr.column_index(*c)])
            .collect();
        // L, ribbon, right-reachable partition the box
        assert_eq!(
            left.len() + stairs.len() + right.len(),
            boxr.column_count()
        );
        assert!(left.intersection(&right).next().is_none());
        assert!(left.intersection(&stairs).next().is_none());
    }

    #[test]
    fn region_left_requires_crossing() {
        let boxr = BoxRegion::new(0, 4, 0, 4).unwrap();
        let blob: ColumnSet = [Column::new(2, 2)].into_iter().collect();
        let r = Ribbon::from_columns(blob, boxr).unwrap();
        assert!(matches!(
            region_left_of(&r, &boxr),
            Err(Error::NotACrossing(_))
        ));
    }

    #[test]
    fn region_right_g_wall_cases() {
        let n = 4;
        let s2 = s2_box(n).unwrap(); // [2,6]x[0,4]
        let wall: ColumnSet = (0..=2).map(|y| Column::new(3, y)).collect();
        let r = Ribbon::from_columns(wall, s3_box(n).unwrap()).unwrap();
        let refl = reflect_ribbon(&r, n);
        let g = region_right_g(&r, &refl, &s2).unwrap();
        let expect: ColumnSet = s2.columns().filter(|c| c.x > 3).collect();
        assert_eq!(g, expect);

        // wall on the right edge leaves nothing
        let edge: ColumnSet = (0..=4).map(|y| Column::new(6, y)).collect();
        let re = Ribbon::from_columns(edge, s2).unwrap();
        let refl_e = reflect_ribbon(&re, n);
        assert!(region_right_g(&re, &refl_e, &s2).unwrap().is_empty());
    }

    #[test]
    fn region_above_wall_cases() {
        let g: ColumnSet = BoxRegion::new(0, 3, 0, 3).unwrap().columns().collect();
        let boxr = BoxRegion::new(0, 3, 0, 3).unwrap();
        let wall: ColumnSet = (0..=3).map(|x| Column::new(x, 1)).collect();
        let u = Ribbon::from_columns(wall, boxr).unwrap();
        let above = region_above(&g, &u, None).unwrap();
        let expect: ColumnSet = g.iter().copied().filter(|c| c.y > 1).collect();
        assert_eq!(above, expect);

        // ribbon along the top edge leaves only the extra
        let top: ColumnSet = (0..=3).map(|x| Column::new(x, 3)).collect();
        let u_top = Ribbon::from_columns(top, boxr).unwrap();
        let extra = Ribbon::from_columns([Column::new(0, 0)].into_iter().collect(), boxr).unwrap();
        let above = region_above(&g, &u_top, Some(&extra)).unwrap();
        assert_eq!(above, extra.columns().clone());

        // non-separating ribbon rejected
        let stub = Ribbon::from_columns([Column::new(0, 1)].into_iter().collect(), boxr).unwrap();
        assert!(matches!(
            region_above(&g, &stub, None),
            Err(Error::NotACrossing(_))
        ));
    }

    #[test]
    fn region_above_staircase_matches_hand_flood() {
        let g: ColumnSet = BoxRegion::new(0, 3, 0, 3).unwrap().columns().collect();
        let boxr = BoxRegion::new(0, 3, 0, 3).unwrap();
        let stairs: ColumnSet = [(0, 1), (1, 1), (1, 2), (2, 2), (3, 2)]
            .into_iter()
            .map(|(x, y)| Column::new(x, y))
            .collect();
        let u = Ribbon::from_columns(stairs, boxr).unwrap();
        let above = region_above(&g, &u, None).unwrap();
        let expect: ColumnSet = [(0, 2), (0, 3), (1, 3), (2, 3), (3, 3)]
            .into_iter()
            .map(|(x, y)| Column::new(x, y))
            .collect();
        assert_eq!(above, expect);
    }

    #[test]
    fn quarter_anchor_all_open_and_closed() {
        let n = 4;
        let s2 = s2_box(n).unwrap();
        let e = EventSpec::QuarterAnchor { n };
        assert!(occurs(&e, &Configuration::all_open(s2, GraphMode::Sandwich2)).unwrap());
        assert!(!occurs(&e, &Configuration::all_closed(s2, GraphMode::Sandwich2)).unwrap());
        assert!(matches!(
            EventSpec::QuarterAnchor { n: 6 }.ambient_region(),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn quarter_anchor_needs_the_hook() {
        let n = 4;
        let s2 = s2_box(n).unwrap();
        // a bare top-down crossing of S3 with nothing reaching the right side
        let open: Vec<Site> = (0..=2).map(|y| Site::new(3, y, 0)).collect();
        let cfg = cfg_with(s2, GraphMode::Sandwich2, &open);
        assert!(!occurs(&EventSpec::QuarterAnchor { n }, &cfg).unwrap());
        // extend it to the right side along the bottom row
        let mut open2 = open.clone();
        open2.extend((4..=6).map(|x| Site::new(x, 0, 0)));
        let cfg2 = cfg_with(s2, GraphMode::Sandwich2, &open2);
        assert!(occurs(&EventSpec::QuarterAnchor { n }, &cfg2).unwrap());
    }

    #[test]
    fn right_hook_depends_only_on_region_right_of_wall() {
        let n = 4;
        let s2 = s2_box(n).unwrap();
        let s3 = s3_box(n).unwrap();
        let wall: ColumnSet = (0..=2).map(|y| Column::new(3, y)).collect();
        let r = Ribbon::from_columns(wall, s3).unwrap();
        let e = EventSpec::RightHook { n, crossing: r };
        // open path from right side to the wall's east flank
        let open: Vec<Site> = (4..=6).map(|x| Site::new(x, 2, 1)).collect();
        let cfg = cfg_with(s2, GraphMode::Sandwich2, &open);
        assert!(occurs(&e, &cfg).unwrap());
        // same path stopping short does not hook
        let cfg2 = cfg_with(s2, GraphMode::Sandwich2, &open[..2]);
        assert!(!occurs(&e, &cfg2).unwrap());
    }
}
