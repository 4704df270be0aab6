//! Text serialization of configurations: a header line
//! `mode x_min x_max y_min y_max`, then one `x y z bit` line per site in
//! canonical `(y, x, z)` order.

use sandwich_core::config::Configuration;
use sandwich_core::lattice::{BoxRegion, GraphMode, Site};

use crate::error::{Result, SimError};

fn mode_name(mode: GraphMode) -> &'static str {
    match mode {
        GraphMode::Sandwich2 => "sandwich2",
        GraphMode::Periodic3 => "periodic3",
    }
}

pub fn parse_mode(s: &str) -> Result<GraphMode> {
    match s {
        "sandwich2" => Ok(GraphMode::Sandwich2),
        "periodic3" => Ok(GraphMode::Periodic3),
        other => Err(SimError::Parse(format!("unknown graph mode '{other}'"))),
    }
}

pub fn configuration_to_string(cfg: &Configuration) -> String {
    let r = cfg.region();
    let mut out = format!(
        "{} {} {} {} {}\n",
        mode_name(cfg.mode()),
        r.x_min,
        r.x_max,
        r.y_min,
        r.y_max
    );
    for s in r.sites(cfg.mode()) {
        out.push_str(&format!(
            "{} {} {} {}\n",
            s.x,
            s.y,
            s.z,
            u8::from(cfg.is_open(s))
        ));
    }
    out
}

pub fn configuration_from_str(text: &str) -> Result<Configuration> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| SimError::Parse("empty configuration file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(SimError::Parse(format!(
            "header must be 'mode x_min x_max y_min y_max', got '{header}'"
        )));
    }
    let mode = parse_mode(fields[0])?;
    let nums: Vec<i32> = fields[1..]
        .iter()
        .map(|f| {
            f.parse::<i32>()
                .map_err(|_| SimError::Parse(format!("bad header coordinate '{f}'")))
        })
        .collect::<Result<_>>()?;
    let region = BoxRegion::new(nums[0], nums[1], nums[2], nums[3])
        .map_err(SimError::Core)?;

    let mut cfg = Configuration::all_closed(region, mode);
    let mut seen = vec![false; region.site_count(mode)];
    for line in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(SimError::Parse(format!(
                "site line must be 'x y z bit', got '{line}'"
            )));
        }
        let x: i32 = parts[0]
            .parse()
            .map_err(|_| SimError::Parse(format!("bad x in '{line}'")))?;
        let y: i32 = parts[1]
            .parse()
            .map_err(|_| SimError::Parse(format!("bad y in '{line}'")))?;
        let z: u8 = parts[2]
            .parse()
            .map_err(|_| SimError::Parse(format!("bad z in '{line}'")))?;
        let bit: u8 = parts[3]
            .parse()
            .map_err(|_| SimError::Parse(format!("bad bit in '{line}'")))?;
        let site = Site::new(x, y, z);
        if !region.contains_site(site, mode) {
            return Err(SimError::Parse(format!(
                "site ({x}, {y}, {z}) outside the header region"
            )));
        }
        if bit > 1 {
            return Err(SimError::Parse(format!("bit must be 0 or 1 in '{line}'")));
        }
        let idx = cfg.site_index(site);
        if seen[idx] {
            return Err(SimError::Parse(format!(
                "site ({x}, {y}, {z}) listed twice"
            )));
        }
        seen[idx] = true;
        cfg.set(site, bit == 1);
    }
    if seen.iter().any(|s| !s) {
        return Err(SimError::Parse("configuration file misses sites".into()));
    }
    Ok(cfg)
}
