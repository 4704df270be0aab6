//! Exhaustive ground truth on tiny boxes: exact event probabilities as
//! open-count polynomials, and configuration-by-configuration verification
//! of the left-most crossing decomposition, its measurability, and the
//! slab's forced-connection property.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

use sandwich_core::config::{enumerate, sample, Configuration, Seed};
use sandwich_core::connectivity::{clusters, column_graph, occurs, EventSpec};
use sandwich_core::lattice::{neighbors, BoxRegion, Column, GraphMode, Site};
use sandwich_core::pathalg::{
    all_crossing_curves, curve_is_open, jordan_left_region, leftmost_ribbon,
    leftmost_ribbon_by_surgery, ribbon_left_region,
};
use sandwich_core::ColumnSet;

use crate::error::Result;
use crate::formats::configuration_to_string;

/// Exact probability of an event on a finite box, stored as satisfying
/// configuration counts per number of open sites, so identities between
/// events can be checked coefficient by coefficient.
#[derive(Debug, Clone, Serialize)]
pub struct ExactProbability {
    pub event: String,
    pub n_sites: u32,
    /// `counts[j]` = satisfying configurations with exactly `j` open sites.
    pub counts: Vec<u64>,
}

impl ExactProbability {
    /// Evaluate the polynomial `sum_j counts[j] p^j (1-p)^(N-j)`.
    pub fn evaluate(&self, p: f64) -> f64 {
        let n = self.n_sites as i32;
        self.counts
            .iter()
            .enumerate()
            .map(|(j, c)| *c as f64 * p.powi(j as i32) * (1.0 - p).powi(n - j as i32))
            .sum()
    }

    pub fn satisfying_total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn enumeration_chunks(total: u64) -> Vec<(u64, u64)> {
    let chunk = 1u64 << 14;
    let mut out = Vec::new();
    let mut start = 0;
    while start < total {
        out.push((start, (start + chunk).min(total)));
        start += chunk;
    }
    out
}

/// Exact event probability by full enumeration of the region.
pub fn exact_probability(
    event: &EventSpec,
    region: &BoxRegion,
    mode: GraphMode,
    cap: u32,
) -> Result<ExactProbability> {
    let it = enumerate(*region, mode, cap)?;
    let total = it.total();
    let n_sites = region.site_count(mode) as u32;
    // validate geometry once
    occurs(event, &Configuration::all_closed(*region, mode))?;
    let counts = enumeration_chunks(total)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut counts = vec![0u64; n_sites as usize + 1];
            for idx in lo..hi {
                let cfg = Configuration::from_index(*region, mode, idx);
                if occurs(event, &cfg).expect("validated geometry") {
                    counts[cfg.open_count()] += 1;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; n_sites as usize + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(ExactProbability {
        event: crate::estimators::describe_event(event),
        n_sites,
        counts,
    })
}

/// Every crossing curve of the box with its ribbon and dominance relation,
/// precomputed once for the exhaustive checks.
struct CurveTable {
    curves: Vec<sandwich_core::ProjectedPath>,
    ribbons: Vec<ColumnSet>,
    /// `dominates[i]` lists curves whose region is strictly inside curve
    /// i's region.
    dominated_by: Vec<Vec<usize>>,
}

fn curve_table(boxr: &BoxRegion) -> CurveTable {
    let curves = all_crossing_curves(boxr);
    let regions: Vec<_> = curves
        .iter()
        .map(|c| jordan_left_region(c, boxr).expect("enumerated curves are crossings"))
        .collect();
    let ribbons: Vec<ColumnSet> = curves
        .iter()
        .map(|c| c.columns().iter().copied().collect())
        .collect();
    let dominated_by = (0..curves.len())
        .map(|i| {
            (0..curves.len())
                .filter(|j| *j != i && regions[*j].is_strict_subset(&regions[i]))
                .collect()
        })
        .collect();
    CurveTable {
        curves,
        ribbons,
        dominated_by,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub universe: u64,
    pub curve_count: usize,
    pub ribbon_count: usize,
    /// Open-count polynomial of the top-down crossing event.
    pub crossing_counts: Vec<u64>,
    /// Coefficient-wise sum of the per-ribbon extremal-event polynomials.
    pub ribbon_sum_counts: Vec<u64>,
    pub identity_holds: bool,
    /// Configurations violating "crossing iff exactly one extremal ribbon,
    /// and it is the one the extraction returns" (serialized).
    pub counterexamples: Vec<String>,
    pub passed: bool,
}

/// Exhaustively verify the crossing decomposition on a small box: for every
/// configuration, a top-down crossing exists iff exactly one curve is open
/// and region-minimal among open curves; that curve's ribbon matches the
/// left-most extraction; and summing the per-ribbon events recovers the
/// crossing event coefficient-exactly.
pub fn verify_decomposition(
    boxr: &BoxRegion,
    mode: GraphMode,
    cap: u32,
) -> Result<DecompositionReport> {
    let it = enumerate(*boxr, mode, cap)?;
    let total = it.total();
    let n_sites = boxr.site_count(mode) as usize;
    let table = curve_table(boxr);
    let td = EventSpec::TopDown { region: *boxr };

    struct Partial {
        crossing_counts: Vec<u64>,
        per_ribbon: BTreeMap<Vec<Column>, Vec<u64>>,
        counterexamples: Vec<String>,
    }

    let merged = enumeration_chunks(total)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut part = Partial {
                crossing_counts: vec![0; n_sites + 1],
                per_ribbon: BTreeMap::new(),
                counterexamples: Vec::new(),
            };
            for idx in lo..hi {
                let cfg = Configuration::from_index(*boxr, mode, idx);
                let crossing = occurs(&td, &cfg).expect("geometry inside region");
                let open: Vec<usize> = (0..table.curves.len())
                    .filter(|i| curve_is_open(&table.curves[*i], &cfg))
                    .collect();
                let minimal: Vec<usize> = open
                    .iter()
                    .copied()
                    .filter(|i| !table.dominated_by[*i].iter().any(|j| open.contains(j)))
                    .collect();
                let extracted = leftmost_ribbon(&cfg, boxr).expect("box inside region");
                let ok = if crossing {
                    minimal.len() == 1
                        && extracted
                            .as_ref()
                            .is_some_and(|r| *r.columns() == table.ribbons[minimal[0]])
                } else {
                    open.is_empty() && extracted.is_none()
                };
                if !ok {
                    part.counterexamples
                        .push(configuration_to_string(&cfg));
                    continue;
                }
                if crossing {
                    part.crossing_counts[cfg.open_count()] += 1;
                    let key: Vec<Column> =
                        table.ribbons[minimal[0]].iter().copied().collect();
                    part.per_ribbon
                        .entry(key)
                        .or_insert_with(|| vec![0; n_sites + 1])[cfg.open_count()] += 1;
                }
            }
            part
        })
        .reduce(
            || Partial {
                crossing_counts: vec![0; n_sites + 1],
                per_ribbon: BTreeMap::new(),
                counterexamples: Vec::new(),
            },
            |mut a, b| {
                for (x, y) in a.crossing_counts.iter_mut().zip(&b.crossing_counts) {
                    *x += y;
                }
                for (k, v) in b.per_ribbon {
                    let e = a.per_ribbon.entry(k).or_insert_with(|| vec![0; n_sites + 1]);
                    for (x, y) in e.iter_mut().zip(v) {
                        *x += y;
                    }
                }
                a.counterexamples.extend(b.counterexamples);
                a
            },
        );

    let mut ribbon_sum = vec![0u64; n_sites + 1];
    for v in merged.per_ribbon.values() {
        for (x, y) in ribbon_sum.iter_mut().zip(v) {
            *x += y;
        }
    }
    let identity_holds = ribbon_sum == merged.crossing_counts;
    let passed = identity_holds && merged.counterexamples.is_empty();
    Ok(DecompositionReport {
        universe: total,
        curve_count: table.curves.len(),
        ribbon_count: merged.per_ribbon.len(),
        crossing_counts: merged.crossing_counts,
        ribbon_sum_counts: ribbon_sum,
        identity_holds,
        counterexamples: merged.counterexamples,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasurabilityReport {
    pub universe: u64,
    pub flips_checked: u64,
    /// Serialized configuration plus flipped site for every violation of
    /// "flips outside the ribbon and its left region never change the
    /// extraction".
    pub counterexamples: Vec<String>,
    /// One exhibited configuration where flipping a site inside the
    /// dependence region does change the ribbon.
    pub inside_flip_witness: Option<String>,
    pub passed: bool,
}

/// Exhaustive flip test: the extremal ribbon depends only on the state of
/// sites over the ribbon and its left region.
pub fn verify_measurability(
    boxr: &BoxRegion,
    mode: GraphMode,
    cap: u32,
) -> Result<MeasurabilityReport> {
    let it = enumerate(*boxr, mode, cap)?;
    let total = it.total();

    struct Partial {
        flips: u64,
        counterexamples: Vec<String>,
        witness: Option<String>,
    }

    let merged = enumeration_chunks(total)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut part = Partial {
                flips: 0,
                counterexamples: Vec::new(),
                witness: None,
            };
            for idx in lo..hi {
                let cfg = Configuration::from_index(*boxr, mode, idx);
                let Some(ribbon) = leftmost_ribbon(&cfg, boxr).expect("box in region") else {
                    continue;
                };
                let left = ribbon_left_region(&ribbon, boxr).expect("extracted ribbon");
                for s in boxr.sites(mode) {
                    let inside = ribbon.contains(s.column()) || left.columns().contains(&s.column());
                    if inside {
                        if part.witness.is_none() {
                            let mut flipped = cfg.clone();
                            flipped.flip(s);
                            let after = leftmost_ribbon(&flipped, boxr).expect("box in region");
                            if after.as_ref().map(|r| r.columns()) != Some(ribbon.columns()) {
                                part.witness = Some(format!(
                                    "flip ({}, {}, {}) changes the ribbon on:\n{}",
                                    s.x,
                                    s.y,
                                    s.z,
                                    configuration_to_string(&cfg)
                                ));
                            }
                        }
                        continue;
                    }
                    part.flips += 1;
                    let mut flipped = cfg.clone();
                    flipped.flip(s);
                    let after = leftmost_ribbon(&flipped, boxr).expect("box in region");
                    if after.as_ref().map(|r| r.columns()) != Some(ribbon.columns()) {
                        part.counterexamples.push(format!(
                            "flip ({}, {}, {}) outside the dependence region changes the ribbon on:\n{}",
                            s.x,
                            s.y,
                            s.z,
                            configuration_to_string(&cfg)
                        ));
                    }
                }
            }
            part
        })
        .reduce(
            || Partial {
                flips: 0,
                counterexamples: Vec::new(),
                witness: None,
            },
            |mut a, b| {
                a.flips += b.flips;
                a.counterexamples.extend(b.counterexamples);
                if a.witness.is_none() {
                    a.witness = b.witness;
                }
                a
            },
        );

    let passed = merged.counterexamples.is_empty();
    Ok(MeasurabilityReport {
        universe: total,
        flips_checked: merged.flips,
        counterexamples: merged.counterexamples,
        inside_flip_witness: merged.witness,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThinSandwichReport {
    pub trials: u64,
    pub failures: u64,
    pub passed: bool,
}

fn random_open_walk(
    cfg: &mut Configuration,
    start: Site,
    steps: usize,
    rng: &mut impl rand_core::RngCore,
) -> Vec<Site> {
    let mut walk = vec![start];
    cfg.set(start, true);
    let mut cur = start;
    for _ in 0..steps {
        let moves = neighbors(cur, cfg.mode(), Some(cfg.region())).expect("inside region");
        let next = moves[rng.next_u32() as usize % moves.len()];
        cfg.set(next, true);
        walk.push(next);
        cur = next;
    }
    walk
}

/// Plant pairs of open paths whose projections share a column inside random
/// configurations and assert both paths always land in one open cluster.
pub fn verify_thin_sandwich(
    mode: GraphMode,
    trials: u64,
    seed: Seed,
) -> Result<ThinSandwichReport> {
    let region = BoxRegion::new(0, 11, 0, 11)?;
    let failures: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.derive(0x75).rng(t);
            let mut cfg =
                sample(region, mode, 0.5, seed.derive(0x76), t).expect("valid probability");
            let rand_site = |rng: &mut sandwich_core::config::ChaCha8Rng| {
                let x = region.x_min + (rng.next_u32() as i32).rem_euclid(region.width());
                let y = region.y_min + (rng.next_u32() as i32).rem_euclid(region.height());
                let z = (rng.next_u32() % mode.layers() as u32) as u8;
                Site::new(x, y, z)
            };
            let walk1 = random_open_walk(&mut cfg, rand_site(&mut rng), 14, &mut rng);
            // plant the second walk through a column of the first
            let shared = walk1[rng.next_u32() as usize % walk1.len()].column();
            let z2 = (rng.next_u32() % mode.layers() as u32) as u8;
            let walk2 = random_open_walk(&mut cfg, shared.site(z2), 14, &mut rng);

            let graph = column_graph(&cfg);
            let labels = clusters(&graph);
            let anchor = graph
                .component_of(walk1[0].column(), &labels)
                .expect("walk sites are open");
            let connected = walk1
                .iter()
                .chain(&walk2)
                .all(|s| graph.component_of(s.column(), &labels) == Some(anchor));
            u64::from(!connected)
        })
        .sum();
    Ok(ThinSandwichReport {
        trials,
        failures,
        passed: failures == 0,
    })
}
