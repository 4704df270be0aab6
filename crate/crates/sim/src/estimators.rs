//! Monte Carlo estimation with Wilson confidence intervals, and empirical
//! verification of the crossing-probability inequalities: the five-box
//! gluing bound, independence squaring, the dyadic halving chain, the
//! finite-box criterion, the box-chain certificate, and the strong-RSW
//! trend.
//!
//! Every estimate is deterministic given its seed: trial `i` of estimate
//! `e` draws from substream `(derive(e), i)`, so trials parallelize freely
//! and success counting is order-independent.

use rayon::prelude::*;
use serde::Serialize;

use sandwich_core::config::{sample, sample_field, Seed};
use sandwich_core::connectivity::{occurs, EventSpec};
use sandwich_core::lattice::{bk_box, BoxRegion, Column, GraphMode, Site};
use sandwich_core::Configuration;

use crate::error::{Result, SimError};
use crate::stats::{trials_for_half_width, wilson_interval};

pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// Maximum CI half-width the inequality checks tolerate before demanding
/// more trials.
pub const DEFAULT_SLACK_BUDGET: f64 = 0.02;

/// A Monte Carlo estimate of one event probability.
#[derive(Debug, Clone, Serialize)]
pub struct Estimate {
    pub event: String,
    pub p: f64,
    pub trials: u64,
    pub successes: u64,
    pub point: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub confidence: f64,
}

impl Estimate {
    pub fn half_width(&self) -> f64 {
        (self.ci_hi - self.ci_lo) / 2.0
    }
}

/// Compact, stable label for an event.
pub fn describe_event(event: &EventSpec) -> String {
    match event {
        EventSpec::CrossLr { n, m } => format!("cross_lr({n},{m})"),
        EventSpec::TopDown { region } => format!(
            "top_down([{},{}]x[{},{}])",
            region.x_min, region.x_max, region.y_min, region.y_max
        ),
        EventSpec::Circuit { annulus } => format!(
            "circuit(({},{});{},{})",
            annulus.center.x, annulus.center.y, annulus.inner, annulus.outer
        ),
        EventSpec::ChainCross { k, n } => format!("chain_cross({k},{n})"),
        EventSpec::QuarterAnchor { n } => format!("quarter_anchor({n})"),
        EventSpec::RightHook { n, .. } => format!("right_hook({n})"),
        EventSpec::AnnulusHook { annulus, .. } => format!(
            "annulus_hook(({},{});{},{})",
            annulus.center.x, annulus.center.y, annulus.inner, annulus.outer
        ),
        EventSpec::Connect { .. } => "connect".into(),
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SimError::Usage(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Estimate one event probability from independent samples.
pub fn estimate_event(
    event: &EventSpec,
    mode: GraphMode,
    p: f64,
    trials: u64,
    seed: Seed,
) -> Result<Estimate> {
    estimate_event_with(event, mode, p, trials, seed, DEFAULT_CONFIDENCE)
}

pub fn estimate_event_with(
    event: &EventSpec,
    mode: GraphMode,
    p: f64,
    trials: u64,
    seed: Seed,
    confidence: f64,
) -> Result<Estimate> {
    check_probability(p)?;
    if trials == 0 {
        return Err(SimError::Usage("trials must be >= 1".into()));
    }
    let region = event.ambient_region()?;
    // surface geometry errors once, before the parallel loop
    occurs(event, &Configuration::all_closed(region, mode))?;
    let successes: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let cfg = sample(region, mode, p, seed, t).expect("validated probability");
            u64::from(occurs(event, &cfg).expect("validated geometry"))
        })
        .sum();
    let (ci_lo, ci_hi) = wilson_interval(successes, trials, confidence);
    Ok(Estimate {
        event: describe_event(event),
        p,
        trials,
        successes,
        point: successes as f64 / trials as f64,
        ci_lo,
        ci_hi,
        confidence,
    })
}

/// Finite proxy for the infinite-cluster density: the origin site connected
/// to the boundary of the centered box of radius `n`.
pub fn theta_proxy(
    mode: GraphMode,
    p: f64,
    n: i32,
    trials: u64,
    seed: Seed,
) -> Result<Estimate> {
    if n < 1 {
        return Err(SimError::Usage(format!("theta proxy needs n >= 1, got {n}")));
    }
    let region = BoxRegion::centered(n, n)?;
    let targets: Vec<Site> = region
        .boundary_columns()
        .into_iter()
        .flat_map(|c| (0..mode.layers()).map(move |z| c.site(z)))
        .collect();
    let event = EventSpec::Connect {
        region,
        sources: vec![Site::new(0, 0, 0)],
        targets,
    };
    let mut est = estimate_event(&event, mode, p, trials, seed)?;
    est.event = format!("theta_proxy({n})");
    Ok(est)
}

/// One verified inequality instance in a cascade report.
#[derive(Debug, Clone, Serialize)]
pub struct CascadeCheck {
    /// Which inequality this instantiates.
    pub name: String,
    pub scale: u32,
    pub lhs: f64,
    pub rhs: f64,
    /// One-sided allowance from the combined confidence intervals.
    pub slack: f64,
    /// False when the check's premise is not met at this run's estimates.
    pub applicable: bool,
    pub holds: bool,
}

/// Estimates and inequality checks for the rectangle-doubling cascade.
#[derive(Debug, Clone, Serialize)]
pub struct CascadeReport {
    pub n: i32,
    pub p: f64,
    pub depth: u32,
    pub trials: u64,
    pub estimates: Vec<Estimate>,
    pub checks: Vec<CascadeCheck>,
    pub passed: bool,
}

/// Verify the crossing cascade at one density: for each doubling step, the
/// five-box gluing bound `P(long) >= P(short)^5`, the disjoint-rectangle
/// squaring `P(wide^c) <= P(long^c)^2`, and (when the 49/50 premise holds)
/// the dyadic halving chain, all with CI-aware slack.
pub fn verify_cascade(
    mode: GraphMode,
    p: f64,
    n: i32,
    depth: u32,
    trials: u64,
    seed: Seed,
) -> Result<CascadeReport> {
    check_probability(p)?;
    if n < 1 || depth < 1 {
        return Err(SimError::Usage(format!(
            "cascade needs n >= 1 and depth >= 1, got n={n}, depth={depth}"
        )));
    }
    let needed = trials_for_half_width(DEFAULT_SLACK_BUDGET, DEFAULT_CONFIDENCE);
    if trials < needed {
        return Err(SimError::Resource(format!(
            "cascade checks need at least {needed} trials for half-widths below \
             {DEFAULT_SLACK_BUDGET} (got {trials})"
        )));
    }

    // xs[m] = P(E(2^{m+1} n, 2^m n)); ys[m] = P(E(2^{m+1} n, 2^{m-1} n))
    let mut xs: Vec<Estimate> = Vec::new();
    let mut ys: Vec<Option<Estimate>> = vec![None];
    let mut stream = 0u64;
    for m in 0..=depth {
        let long = (1i64 << (m + 1)) * n as i64;
        let short = (1i64 << m) * n as i64;
        if long > i32::MAX as i64 {
            return Err(SimError::Usage("cascade boxes overflow coordinates".into()));
        }
        let e = EventSpec::CrossLr {
            n: long as i32,
            m: short as i32,
        };
        xs.push(estimate_event(&e, mode, p, trials, seed.derive(stream))?);
        stream += 1;
        if m >= 1 {
            let e = EventSpec::CrossLr {
                n: long as i32,
                m: (short / 2) as i32,
            };
            ys.push(Some(estimate_event(&e, mode, p, trials, seed.derive(stream))?));
            stream += 1;
        }
    }

    let mut checks = Vec::new();
    let premise = xs[0].point >= 49.0 / 50.0;
    for m in 1..=depth as usize {
        let y = ys[m].as_ref().unwrap();
        let x_prev = &xs[m - 1];
        let x = &xs[m];

        // gluing: P(E(2L, S)) >= P(E(L, S))^5
        let lhs = y.point;
        let rhs = x_prev.point.powi(5);
        let slack = y.half_width() + 5.0 * x_prev.half_width();
        checks.push(CascadeCheck {
            name: "gluing_power5".into(),
            scale: m as u32,
            lhs,
            rhs,
            slack,
            applicable: true,
            holds: lhs >= rhs - slack,
        });

        // squaring: P(E(2L, 2S)^c) <= P(E(2L, S)^c)^2
        let lhs = 1.0 - x.point;
        let rhs = (1.0 - y.point).powi(2);
        let slack = x.half_width() + 2.0 * y.half_width();
        checks.push(CascadeCheck {
            name: "independence_squaring".into(),
            scale: m as u32,
            lhs,
            rhs,
            slack,
            applicable: true,
            holds: lhs <= rhs + slack,
        });

        // halving chain: P(E(2^{m+1}n, 2^m n)^c) <= 2^{-m} P(E(2n,n)^c),
        // valid under the 49/50 premise at the base scale
        let lhs = 1.0 - x.point;
        let rhs = (1.0 - xs[0].point) / (1u64 << m) as f64;
        let slack = x.half_width() + xs[0].half_width() / (1u64 << m) as f64;
        checks.push(CascadeCheck {
            name: "dyadic_halving".into(),
            scale: m as u32,
            lhs,
            rhs,
            slack,
            applicable: premise,
            holds: !premise || lhs <= rhs + slack,
        });
    }
    // the bootstrap step used between gluing and halving: for x >= 49/50,
    // (1 - x^5)^2 <= (1/2)(1 - x)
    if premise {
        let x = xs[0].point;
        let lhs = (1.0 - x.powi(5)).powi(2);
        let rhs = 0.5 * (1.0 - x);
        checks.push(CascadeCheck {
            name: "bootstrap_poly".into(),
            scale: 0,
            lhs,
            rhs,
            slack: 0.0,
            applicable: true,
            holds: lhs <= rhs,
        });
    }

    let passed = checks.iter().all(|c| !c.applicable || c.holds);
    let mut estimates = xs;
    estimates.extend(ys.into_iter().flatten());
    Ok(CascadeReport {
        n,
        p,
        depth,
        trials,
        estimates,
        checks,
        passed,
    })
}

/// The finite-box criterion report: whether the square crossing probability
/// provably (at the interval's confidence) exceeds `1 - epsilon`.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub n: i32,
    pub p: f64,
    pub epsilon: f64,
    pub estimate: Estimate,
    pub satisfied: bool,
}

pub fn check_criterion(
    mode: GraphMode,
    p: f64,
    n: i32,
    epsilon: f64,
    trials: u64,
    seed: Seed,
) -> Result<CriterionReport> {
    if !(0.0..1.0).contains(&epsilon) || epsilon == 0.0 {
        return Err(SimError::Usage(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let estimate = estimate_event(&EventSpec::CrossLr { n, m: n }, mode, p, trials, seed)?;
    let satisfied = estimate.ci_lo > 1.0 - epsilon;
    Ok(CriterionReport {
        n,
        p,
        epsilon,
        estimate,
        satisfied,
    })
}

/// Witness that two consecutive chain crossings glue: a column both
/// crossings' ribbons contain, so the slab forces a connection there.
#[derive(Debug, Clone, Serialize)]
pub struct JunctionWitness {
    pub k: u32,
    pub column_x: i32,
    pub column_y: i32,
    /// Whether the two crossings' clusters are indeed one component.
    pub connected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub n: i32,
    pub k_max: u32,
    /// Whether each chain box is crossed the long way.
    pub holds: Vec<bool>,
    /// Largest prefix of the chain that holds, if the first link does.
    pub k0: Option<u32>,
    pub junctions: Vec<JunctionWitness>,
    /// All junction witnesses exist and glue.
    pub sound: bool,
}

/// A long-way crossing of a box as a column path, or `None`.
fn crossing_column_path(
    cfg: &Configuration,
    region: &BoxRegion,
    vertical: bool,
) -> Option<Vec<Column>> {
    let (starts, is_end): (Vec<Column>, Box<dyn Fn(Column) -> bool>) = if vertical {
        (
            region.bottom_columns().collect(),
            Box::new(move |c: Column| c.y == region.y_max),
        )
    } else {
        (
            region.left_columns().collect(),
            Box::new(move |c: Column| c.x == region.x_max),
        )
    };
    let mut parent: std::collections::BTreeMap<Column, Column> = Default::default();
    let mut queue: std::collections::VecDeque<Column> = Default::default();
    let mut seen: std::collections::BTreeSet<Column> = Default::default();
    for c in starts {
        if cfg.open_layers(c) != 0 && seen.insert(c) {
            queue.push_back(c);
        }
    }
    while let Some(c) = queue.pop_front() {
        if is_end(c) {
            let mut path = vec![c];
            let mut cur = c;
            while let Some(prev) = parent.get(&cur) {
                path.push(*prev);
                cur = *prev;
            }
            path.reverse();
            return Some(path);
        }
        for nb in c.neighbours4() {
            if region.contains_column(nb)
                && cfg.open_layers(c) & cfg.open_layers(nb) != 0
                && seen.insert(nb)
            {
                parent.insert(nb, c);
                queue.push_back(nb);
            }
        }
    }
    None
}

/// Check the dyadic box chain on a fixed configuration: which links hold,
/// and for each consecutive pair of crossings produce the gluing witness —
/// the shared projection column that forces the two open paths to connect.
pub fn certificate(cfg: &Configuration, n: i32, k_max: u32) -> Result<CertificateReport> {
    let top_box = bk_box(k_max, n)?;
    if !cfg.region().contains_box(&top_box) {
        return Err(SimError::Usage(format!(
            "configuration region does not cover the chain up to K={k_max}"
        )));
    }
    let mut holds = Vec::new();
    let mut paths: Vec<Option<Vec<Column>>> = Vec::new();
    for k in 0..=k_max {
        let boxr = bk_box(k, n)?;
        let vertical = k % 2 == 1;
        let path = crossing_column_path(cfg, &boxr, vertical);
        holds.push(path.is_some());
        paths.push(path);
    }
    let k0 = if holds[0] {
        Some(holds.iter().take_while(|h| **h).count() as u32 - 1)
    } else {
        None
    };

    let graph = sandwich_core::connectivity::column_graph(cfg);
    let labels = sandwich_core::connectivity::clusters(&graph);

    let mut junctions = Vec::new();
    for k in 0..k_max as usize {
        let (Some(pk), Some(pk1)) = (&paths[k], &paths[k + 1]) else {
            continue;
        };
        let boxk = bk_box(k as u32, n)?;
        // the successor's crossing starts inside this box; its prefix up to
        // the first exit crosses the box the short way
        let prefix: Vec<Column> = pk1
            .iter()
            .take_while(|c| boxk.contains_column(**c))
            .copied()
            .collect();
        let in_pk: std::collections::BTreeSet<Column> = pk.iter().copied().collect();
        let witness = prefix.iter().copied().filter(|c| in_pk.contains(c)).min();
        if let Some(w) = witness {
            let connected = graph.component_of(pk[0], &labels)
                == graph.component_of(pk1[0], &labels);
            junctions.push(JunctionWitness {
                k: k as u32,
                column_x: w.x,
                column_y: w.y,
                connected,
            });
        }
    }
    let expected = holds.windows(2).filter(|w| w[0] && w[1]).count();
    let sound = junctions.len() == expected && junctions.iter().all(|j| j.connected);
    Ok(CertificateReport {
        n,
        k_max,
        holds,
        k0,
        junctions,
        sound,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PcReport {
    pub n: i32,
    pub trials: u64,
    pub tol: f64,
    pub p_lo: f64,
    pub p_hi: f64,
}

/// Bisection on shared coupling fields: per-field indicators are monotone
/// in p, so the empirical square-crossing probability is a nondecreasing
/// step function and the level-1/2 crossing is bracketed cleanly.
pub(crate) fn bisect_level(
    mut eval: impl FnMut(f64) -> f64,
    level: f64,
    tol: f64,
) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if eval(lo) >= level {
        return (lo, lo);
    }
    if eval(hi) < level {
        return (hi, hi);
    }
    while hi - lo > tol {
        let mid = (lo + hi) / 2.0;
        if eval(mid) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Heuristic finite-size locator for the critical density: the density at
/// which the square crossing probability passes 1/2. Not a rigorous bound.
pub fn estimate_pc(
    mode: GraphMode,
    n: i32,
    trials: u64,
    tol: f64,
    seed: Seed,
) -> Result<PcReport> {
    if tol <= 0.0 {
        return Err(SimError::Usage(format!("tol must be > 0, got {tol}")));
    }
    if trials == 0 {
        return Err(SimError::Usage("trials must be >= 1".into()));
    }
    let event = EventSpec::CrossLr { n, m: n };
    let region = event.ambient_region()?;
    occurs(&event, &Configuration::all_closed(region, mode))?;
    let fields: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|t| sample_field(region, mode, seed.derive(0xFC), t))
        .collect();
    let eval = |p: f64| -> f64 {
        let hits: u64 = fields
            .par_iter()
            .map(|f| {
                let cfg = f.threshold(p).expect("p in range");
                u64::from(occurs(&event, &cfg).expect("validated geometry"))
            })
            .sum();
        hits as f64 / trials as f64
    };
    let (p_lo, p_hi) = bisect_level(eval, 0.5, tol);
    Ok(PcReport {
        n,
        trials,
        tol,
        p_lo,
        p_hi,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FkgReport {
    pub p: f64,
    pub trials: u64,
    pub event_a: String,
    pub event_b: String,
    pub p_a: f64,
    pub p_b: f64,
    pub p_ab: f64,
    pub covariance: f64,
    pub slack: f64,
    /// Set when the covariance is significantly negative, which the
    /// positive-association inequality forbids for increasing events.
    pub flagged: bool,
}

/// Empirical positive-association sanity check for two increasing events on
/// a common box.
pub fn fkg_check(
    a: &EventSpec,
    b: &EventSpec,
    mode: GraphMode,
    p: f64,
    trials: u64,
    seed: Seed,
) -> Result<FkgReport> {
    check_probability(p)?;
    if trials == 0 {
        return Err(SimError::Usage("trials must be >= 1".into()));
    }
    let ra = a.ambient_region()?;
    let rb = b.ambient_region()?;
    if ra != rb {
        return Err(SimError::Usage(
            "association check needs both events on one common box".into(),
        ));
    }
    occurs(a, &Configuration::all_closed(ra, mode))?;
    occurs(b, &Configuration::all_closed(ra, mode))?;
    let (ca, cb, cab) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let cfg = sample(ra, mode, p, seed, t).expect("validated probability");
            let ia = occurs(a, &cfg).expect("validated geometry");
            let ib = occurs(b, &cfg).expect("validated geometry");
            (u64::from(ia), u64::from(ib), u64::from(ia && ib))
        })
        .reduce(|| (0, 0, 0), |x, y| (x.0 + y.0, x.1 + y.1, x.2 + y.2));
    let n = trials as f64;
    let (p_a, p_b, p_ab) = (ca as f64 / n, cb as f64 / n, cab as f64 / n);
    let hw = |s: u64| {
        let (lo, hi) = wilson_interval(s, trials, DEFAULT_CONFIDENCE);
        (hi - lo) / 2.0
    };
    let slack = hw(cab) + hw(ca) + hw(cb);
    let covariance = p_ab - p_a * p_b;
    Ok(FkgReport {
        p,
        trials,
        event_a: describe_event(a),
        event_b: describe_event(b),
        p_a,
        p_b,
        p_ab,
        covariance,
        slack,
        flagged: covariance < -slack,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendReport {
    pub p: f64,
    pub trials: u64,
    pub ns: Vec<i32>,
    pub estimates: Vec<Estimate>,
    /// The last estimate's lower bound clears the first one's upper bound,
    /// or every estimate already exceeds 0.99.
    pub meets_criterion: bool,
}

/// Estimates of the 2:1 rectangle crossing along a scale sequence, with the
/// CI-separation trend assessment (no strict monotonicity is claimed).
pub fn strong_rsw_trend(
    mode: GraphMode,
    p: f64,
    ns: &[i32],
    trials: u64,
    seed: Seed,
) -> Result<TrendReport> {
    if ns.is_empty() {
        return Err(SimError::Usage("trend needs at least one scale".into()));
    }
    let mut estimates = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let e = EventSpec::CrossLr { n: 2 * n, m: n };
        estimates.push(estimate_event(&e, mode, p, trials, seed.derive(i as u64))?);
    }
    let first = &estimates[0];
    let last = estimates.last().unwrap();
    let meets_criterion =
        last.ci_lo > first.ci_hi || estimates.iter().all(|e| e.point > 0.99);
    Ok(TrendReport {
        p,
        trials,
        ns: ns.to_vec(),
        estimates,
        meets_criterion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_degenerate_densities() {
        let e = EventSpec::CrossLr { n: 2, m: 2 };
        let one = estimate_event(&e, GraphMode::Sandwich2, 1.0, 50, Seed::new(1)).unwrap();
        assert_eq!(one.point, 1.0);
        let zero = estimate_event(&e, GraphMode::Sandwich2, 0.0, 50, Seed::new(1)).unwrap();
        assert_eq!(zero.point, 0.0);
        assert!(estimate_event(&e, GraphMode::Sandwich2, 1.5, 50, Seed::new(1)).is_err());
    }

    #[test]
    fn estimates_are_reproducible() {
        let e = EventSpec::CrossLr { n: 3, m: 3 };
        let a = estimate_event(&e, GraphMode::Sandwich2, 0.55, 400, Seed::new(7)).unwrap();
        let b = estimate_event(&e, GraphMode::Sandwich2, 0.55, 400, Seed::new(7)).unwrap();
        assert_eq!(a.successes, b.successes);
        let c = estimate_event(&e, GraphMode::Sandwich2, 0.55, 400, Seed::new(8)).unwrap();
        assert_ne!(a.successes, c.successes);
    }

    #[test]
    fn theta_proxy_degenerate_and_nested() {
        let one = theta_proxy(GraphMode::Sandwich2, 1.0, 4, 30, Seed::new(2)).unwrap();
        assert_eq!(one.point, 1.0);
        let zero = theta_proxy(GraphMode::Sandwich2, 0.0, 4, 30, Seed::new(2)).unwrap();
        assert_eq!(zero.point, 0.0);

        // per shared coupling field the indicator is nonincreasing in n
        let region = BoxRegion::centered(8, 8).unwrap();
        for t in 0..60 {
            let field = sample_field(region, GraphMode::Sandwich2, Seed::new(5), t);
            let cfg = field.threshold(0.7).unwrap();
            let hit = |n: i32| {
                let r = BoxRegion::centered(n, n).unwrap();
                let targets: Vec<Site> = r
                    .boundary_columns()
                    .into_iter()
                    .flat_map(|c| [c.site(0), c.site(1)])
                    .collect();
                occurs(
                    &EventSpec::Connect {
                        region: r,
                        sources: vec![Site::new(0, 0, 0)],
                        targets,
                    },
                    &cfg,
                )
                .unwrap()
            };
            assert!(!hit(8) || hit(4), "containment violated at trial {t}");
        }
    }

    #[test]
    fn cascade_degenerate_densities() {
        for p in [0.0, 1.0] {
            let r = verify_cascade(GraphMode::Sandwich2, p, 2, 2, 5000, Seed::new(3)).unwrap();
            assert!(r.passed, "cascade flagged a violation at p={p}");
        }
    }

    #[test]
    fn cascade_rejects_insufficient_trials() {
        match verify_cascade(GraphMode::Sandwich2, 0.6, 2, 1, 10, Seed::new(3)) {
            Err(SimError::Resource(msg)) => assert!(msg.contains("trials")),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn bootstrap_polynomial_value() {
        let x: f64 = 0.98;
        let lhs = (1.0 - x.powi(5)).powi(2);
        assert!((lhs - 0.009231).abs() < 1e-5);
        assert!(lhs <= 0.5 * (1.0 - x));
    }

    #[test]
    fn criterion_degenerate_densities() {
        let yes = check_criterion(GraphMode::Sandwich2, 1.0, 4, 0.02, 400, Seed::new(4)).unwrap();
        assert!(yes.satisfied);
        let no = check_criterion(GraphMode::Sandwich2, 0.0, 4, 0.02, 400, Seed::new(4)).unwrap();
        assert!(!no.satisfied);
        assert!(check_criterion(GraphMode::Sandwich2, 0.5, 4, 0.0, 10, Seed::new(4)).is_err());
    }

    #[test]
    fn criterion_agrees_with_exact_threshold_at_n1() {
        // compare the reported side of the threshold with the exact value
        // from full enumeration at n = 1, p = 0.9
        let region = BoxRegion::centered(1, 1).unwrap();
        let exact = crate::oracle::exact_probability(
            &EventSpec::CrossLr { n: 1, m: 1 },
            &region,
            GraphMode::Sandwich2,
            24,
        )
        .unwrap();
        let truth = exact.evaluate(0.9);
        let eps = 0.02;
        let report =
            check_criterion(GraphMode::Sandwich2, 0.9, 1, eps, 60_000, Seed::new(11)).unwrap();
        if truth > 1.0 - eps + 0.005 {
            assert!(report.satisfied);
        }
        if truth < 1.0 - eps - 0.005 {
            assert!(!report.satisfied);
        }
    }

    #[test]
    fn certificate_all_open_chain() {
        let n = 1;
        let k = 4;
        let region = bk_box(k, n).unwrap();
        let cfg = Configuration::all_open(region, GraphMode::Sandwich2);
        let r = certificate(&cfg, n, k).unwrap();
        assert!(r.holds.iter().all(|h| *h));
        assert_eq!(r.k0, Some(k));
        assert_eq!(r.junctions.len(), k as usize);
        assert!(r.sound);

        let closed = Configuration::all_closed(region, GraphMode::Sandwich2);
        let r = certificate(&closed, n, k).unwrap();
        assert_eq!(r.k0, None);
    }

    #[test]
    fn bisection_contract() {
        // forced-true events collapse the bracket to the left endpoint
        assert_eq!(bisect_level(|_| 1.0, 0.5, 0.01), (0.0, 0.0));
        // never-true events collapse to the right endpoint
        assert_eq!(bisect_level(|_| 0.0, 0.5, 0.01), (1.0, 1.0));
        // a smooth level crossing is bracketed within tolerance
        let (lo, hi) = bisect_level(|p| p * p, 0.5, 1e-3);
        assert!(hi - lo <= 1e-3);
        let root = 0.5f64.sqrt();
        assert!(lo <= root && root <= hi + 1e-3);
    }

    #[test]
    fn pc_bracket_brackets_the_level() {
        let r = estimate_pc(GraphMode::Sandwich2, 4, 400, 0.02, Seed::new(9)).unwrap();
        assert!(r.p_hi - r.p_lo <= 0.02 + 1e-12);
        assert!(r.p_lo < r.p_hi);
        // reproducible
        let r2 = estimate_pc(GraphMode::Sandwich2, 4, 400, 0.02, Seed::new(9)).unwrap();
        assert_eq!((r.p_lo, r.p_hi), (r2.p_lo, r2.p_hi));
    }

    #[test]
    fn fkg_same_event_nonnegative() {
        let a = EventSpec::CrossLr { n: 2, m: 2 };
        let r = fkg_check(&a, &a, GraphMode::Sandwich2, 0.5, 2000, Seed::new(12)).unwrap();
        assert!(r.covariance >= 0.0);
        assert!(!r.flagged);

        let one = fkg_check(&a, &a, GraphMode::Sandwich2, 1.0, 100, Seed::new(12)).unwrap();
        assert_eq!(one.covariance, 0.0);
    }

    #[test]
    fn fkg_cross_and_topdown() {
        let region = BoxRegion::centered(2, 2).unwrap();
        let a = EventSpec::CrossLr { n: 2, m: 2 };
        let b = EventSpec::TopDown { region };
        let r = fkg_check(&a, &b, GraphMode::Sandwich2, 0.6, 4000, Seed::new(13)).unwrap();
        assert!(
            r.covariance >= -3.0 * r.slack,
            "covariance {} below -3x slack {}",
            r.covariance,
            r.slack
        );
    }

    #[test]
    fn fkg_requires_common_box() {
        let a = EventSpec::CrossLr { n: 2, m: 2 };
        let b = EventSpec::CrossLr { n: 3, m: 3 };
        assert!(fkg_check(&a, &b, GraphMode::Sandwich2, 0.5, 10, Seed::new(1)).is_err());
    }

    #[test]
    fn trend_at_full_density() {
        let r = strong_rsw_trend(GraphMode::Sandwich2, 1.0, &[2, 4], 50, Seed::new(14)).unwrap();
        assert!(r.estimates.iter().all(|e| e.point == 1.0));
        assert!(r.meets_criterion);
    }
}
