//! Scenario config files.
//!
//! ```text
//! # comment
//! [grid]
//! nx = 201
//! ny = 201
//! [initial]
//! type = drops
//! drops = 100.5 100.5 10.05 0.3; 150.5 150.5 10.05 0.3
//! [boundaries]
//! west = inflow 0.05 1.0
//! ```
//!
//! Sections and keys, with defaults for anything omitted:
//!
//! | section | key | default |
//! |---|---|---|
//! | `run` | `name` | `scenario` |
//! | `run` | `t_end` | `10` s |
//! | `run` | `snapshot_every` | `0` (final snapshot only) |
//! | `run` | `output_dir` | none (no snapshots) |
//! | `grid` | `nx`, `ny` | `64` |
//! | `grid` | `dx`, `dy` | `1` m |
//! | `physics` | `g` | `9.81` |
//! | `physics` | `manning_n`, `nu_art` | `0` |
//! | `policy` | `cfl` | `0.9` |
//! | `policy` | `dt_max` | `inf` |
//! | `policy` | `dt_min` | `1e-9` |
//! | `policy` | `h_min` | `1e-6` |
//! | `executor` | `kind` | `naive` (also `tiled[:T]`, `decomposed:N[:tiled[:T]]`) |
//! | `boundaries` | `north`, `south`, `east`, `west` | `reflective` |
//! | `initial` | `type` | `flat` |
//!
//! Boundary values are `reflective`, `transmissive`, `inflow Q H` or
//! `fixed ETA`. The `initial` keys depend on `type`:
//!
//! * `flat`: `depth` (1)
//! * `drops`: `depth` (1), `drops` as `;`-separated `cx cy radius amplitude` groups (none)
//! * `channel`: `slope` (0.001), `depth` (1)
//! * `vortex`: `cx`, `cy` (domain centre), `peak_speed` (1), `core_radius` (nx·dx/10), `depth` (10)
//! * `dam_break`: `split_x` (domain centre), `h_left` (1), `h_right` (0.5)
//! * `snapshot`: `path` (required)

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::executor::ExecutorKind;
use crate::grid::{BoundaryKind, Edge, GridSpec};
use crate::io::snapshot::HEADER_BYTES;
use crate::scenarios::{Drop, InitialCondition, ScenarioConfig};
use crate::scheme::PhysicsParams;
use crate::timestep::{PolicyError, StabilityPolicy};

/// Where a config value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override(String),
    Unknown,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override(s) => write!(f, "override `{s}`"),
            Origin::Unknown => write!(f, "config"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{origin}: {message}")]
pub struct ConfigError {
    pub origin: Origin,
    pub message: String,
}

fn err(origin: &Origin, message: impl Into<String>) -> ConfigError {
    ConfigError { origin: origin.clone(), message: message.into() }
}

const SECTIONS: [(&str, &[&str]); 7] = [
    ("run", &["name", "t_end", "snapshot_every", "output_dir"]),
    ("grid", &["nx", "ny", "dx", "dy"]),
    ("physics", &["g", "manning_n", "nu_art"]),
    ("policy", &["cfl", "dt_max", "dt_min", "h_min"]),
    ("executor", &["kind"]),
    ("boundaries", &["north", "south", "east", "west"]),
    (
        "initial",
        &[
            "type", "depth", "drops", "slope", "cx", "cy", "peak_speed", "core_radius", "split_x", "h_left", "h_right",
            "path",
        ],
    ),
];

const INITIAL_KEYS: [(&str, &[&str]); 6] = [
    ("flat", &["depth"]),
    ("drops", &["depth", "drops"]),
    ("channel", &["slope", "depth"]),
    ("vortex", &["cx", "cy", "peak_speed", "core_radius", "depth"]),
    ("dam_break", &["split_x", "h_left", "h_right"]),
    ("snapshot", &["path"]),
];

fn known_keys(section: &str) -> Option<&'static [&'static str]> {
    SECTIONS.iter().find(|(s, _)| *s == section).map(|(_, k)| *k)
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    origin: Origin,
}

/// Raw `(section, key) -> value` table with provenance for error messages.
#[derive(Debug, Default)]
struct Table {
    entries: BTreeMap<(String, String), Entry>,
}

impl Table {
    fn insert(&mut self, section: &str, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        let keys = known_keys(section).ok_or_else(|| err(&origin, format!("unknown section [{section}]")))?;
        if !keys.contains(&key) {
            return Err(err(&origin, format!("unknown key `{key}` in [{section}]")));
        }
        let slot = (section.to_string(), key.to_string());
        if let (Origin::Line(_), Some(prev)) = (&origin, self.entries.get(&slot)) {
            return Err(err(&origin, format!("duplicate key `{key}` in [{section}] (first set at {})", prev.origin)));
        }
        self.entries.insert(slot, Entry { value: value.trim().to_string(), origin });
        Ok(())
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn origin(&self, section: &str, key: &str) -> Origin {
        self.get(section, key).map(|e| e.origin.clone()).unwrap_or(Origin::Unknown)
    }

    fn parse<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => e.value.parse().map_err(|_| {
                err(&e.origin, format!("malformed value `{}` for {section}.{key}", e.value))
            }),
        }
    }

    fn positive(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v: f64 = self.parse(section, key, default)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(err(&self.origin(section, key), format!("{section}.{key} must be positive and finite, got {v}")));
        }
        Ok(v)
    }
}

fn parse_text(text: &str, table: &mut Table) -> Result<(), ConfigError> {
    let mut section: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let origin = Origin::Line(n + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(&origin, format!("malformed section header `{line}`")))?
                .trim();
            if known_keys(name).is_none() {
                return Err(err(&origin, format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(&origin, format!("expected `key = value`, got `{line}`")))?;
        let sec = section.as_deref().ok_or_else(|| err(&origin, "key outside of any [section]"))?;
        table.insert(sec, key.trim(), value, origin)?;
    }
    Ok(())
}

/// Applies a `section.key=value` override.
fn apply_override(table: &mut Table, spec: &str) -> Result<(), ConfigError> {
    let origin = Origin::Override(spec.to_string());
    let (path, value) = spec.split_once('=').ok_or_else(|| err(&origin, "expected section.key=value"))?;
    let (section, key) = path.trim().split_once('.').ok_or_else(|| err(&origin, "expected section.key=value"))?;
    table.insert(section.trim(), key.trim(), value, origin)
}

/// Parses a config file with documented defaults for omitted keys.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_config_with(text, &[])
}

/// Parses a config file, then applies `section.key=value` overrides in order.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<ScenarioConfig, ConfigError> {
    let mut table = Table::default();
    parse_text(text, &mut table)?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    resolve(&table)
}

/// Parses one boundary value: `reflective`, `transmissive`, `inflow Q H` or `fixed ETA`.
pub fn parse_boundary(value: &str) -> Result<BoundaryKind, String> {
    let words: Vec<&str> = value.split_whitespace().collect();
    let num = |w: &str| w.parse::<f64>().map_err(|_| format!("bad number `{w}` in boundary `{value}`"));
    match words.as_slice() {
        ["reflective"] => Ok(BoundaryKind::ReflectiveWall),
        ["transmissive"] => Ok(BoundaryKind::Transmissive),
        ["inflow", q, h] => Ok(BoundaryKind::InflowDischarge { q_n: num(q)?, h_in: num(h)? }),
        ["fixed", eta] => Ok(BoundaryKind::FixedElevation { eta_out: num(eta)? }),
        _ => Err(format!(
            "bad boundary `{value}` (expected reflective, transmissive, inflow Q H or fixed ETA)"
        )),
    }
}

fn boundary_text(b: BoundaryKind) -> String {
    match b {
        BoundaryKind::ReflectiveWall => "reflective".into(),
        BoundaryKind::Transmissive => "transmissive".into(),
        BoundaryKind::InflowDischarge { q_n, h_in } => format!("inflow {q_n:?} {h_in:?}"),
        BoundaryKind::FixedElevation { eta_out } => format!("fixed {eta_out:?}"),
    }
}

fn parse_drops(value: &str) -> Result<Vec<Drop>, String> {
    value
        .split(';')
        .map(str::trim)
        .filter(|g| !g.is_empty())
        .map(|group| {
            let nums: Result<Vec<f64>, _> = group.split_whitespace().map(str::parse::<f64>).collect();
            match nums.as_deref() {
                Ok([cx, cy, radius, amplitude]) if *radius > 0.0 => {
                    Ok(Drop { cx: *cx, cy: *cy, radius: *radius, amplitude: *amplitude })
                }
                _ => Err(format!("bad drop `{group}` (expected cx cy radius amplitude, radius > 0)")),
            }
        })
        .collect()
}

fn resolve(t: &Table) -> Result<ScenarioConfig, ConfigError> {
    let d = ScenarioConfig::default();

    let nx: usize = t.parse("grid", "nx", d.grid.nx)?;
    let ny: usize = t.parse("grid", "ny", d.grid.ny)?;
    for (key, v) in [("nx", nx), ("ny", ny)] {
        if v < 3 {
            return Err(err(&t.origin("grid", key), format!("grid.{key} must be at least 3, got {v}")));
        }
    }
    let grid = GridSpec { nx, ny, dx: t.positive("grid", "dx", d.grid.dx)?, dy: t.positive("grid", "dy", d.grid.dy)? };

    let physics = PhysicsParams {
        g: t.parse("physics", "g", d.physics.g)?,
        manning_n: t.parse("physics", "manning_n", d.physics.manning_n)?,
        nu_art: t.parse("physics", "nu_art", d.physics.nu_art)?,
    };
    if let Err(e) = physics.validate() {
        // Messages start with the offending key name.
        let msg = e.to_string();
        let key = ["g", "manning_n", "nu_art"].into_iter().find(|k| msg.contains(&format!("{k} must"))).unwrap_or("g");
        return Err(err(&t.origin("physics", key), format!("physics.{msg}")));
    }

    let policy = StabilityPolicy {
        cfl: t.parse("policy", "cfl", d.policy.cfl)?,
        dt_max: t.parse("policy", "dt_max", d.policy.dt_max)?,
        dt_min: t.parse("policy", "dt_min", d.policy.dt_min)?,
        h_min: t.parse("policy", "h_min", d.policy.h_min)?,
    };
    if let Err(e) = policy.validate() {
        let key = match e {
            PolicyError::Cfl(_) => "cfl",
            PolicyError::DtMin(_) => "dt_min",
            PolicyError::DtMax { .. } => "dt_max",
            PolicyError::HMin(_) => "h_min",
        };
        return Err(err(&t.origin("policy", key), format!("out of range: {e}")));
    }

    let executor = match t.get("executor", "kind") {
        None => d.executor,
        Some(e) => ExecutorKind::parse(&e.value).map_err(|m| err(&e.origin, m))?,
    };
    executor.validate(&grid).map_err(|m| err(&t.origin("executor", "kind"), m.to_string()))?;

    let mut boundaries = d.boundaries;
    for edge in Edge::ALL {
        if let Some(e) = t.get("boundaries", edge.name()) {
            let b = parse_boundary(&e.value).map_err(|m| err(&e.origin, m))?;
            if let BoundaryKind::InflowDischarge { q_n, h_in } = b {
                if !q_n.is_finite() || !(h_in >= policy.h_min) {
                    return Err(err(&e.origin, format!("inflow needs finite Q and H >= h_min ({}), got `{}`", policy.h_min, e.value)));
                }
            }
            boundaries.set(edge, b);
        }
    }

    let initial = resolve_initial(t, &grid)?;

    let t_end: f64 = t.parse("run", "t_end", d.t_end)?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(err(&t.origin("run", "t_end"), format!("run.t_end must be finite and >= 0, got {t_end}")));
    }
    let snapshot_every: f64 = t.parse("run", "snapshot_every", d.snapshot_every)?;
    if !(snapshot_every >= 0.0 && snapshot_every.is_finite()) {
        return Err(err(
            &t.origin("run", "snapshot_every"),
            format!("run.snapshot_every must be finite and >= 0, got {snapshot_every}"),
        ));
    }
    let name = t.get("run", "name").map(|e| e.value.clone()).unwrap_or(d.name);
    let output_dir = t.get("run", "output_dir").map(|e| PathBuf::from(&e.value)).filter(|p| !p.as_os_str().is_empty());

    Ok(ScenarioConfig { name, grid, physics, policy, executor, boundaries, t_end, snapshot_every, initial, output_dir })
}

fn resolve_initial(t: &Table, grid: &GridSpec) -> Result<InitialCondition, ConfigError> {
    let kind = t.get("initial", "type").map(|e| e.value.as_str()).unwrap_or("flat");
    let type_origin = t.origin("initial", "type");
    let allowed = INITIAL_KEYS
        .iter()
        .find(|(k, _)| *k == kind)
        .map(|(_, keys)| *keys)
        .ok_or_else(|| {
            let names: Vec<&str> = INITIAL_KEYS.iter().map(|(k, _)| *k).collect();
            err(&type_origin, format!("unknown initial type `{kind}` (expected one of {})", names.join(", ")))
        })?;
    for ((section, key), e) in &t.entries {
        if section == "initial" && key != "type" && !allowed.contains(&key.as_str()) {
            return Err(err(&e.origin, format!("key `{key}` does not apply to initial type `{kind}`")));
        }
    }
    let (lx, ly) = grid.extent();
    let depth = |default: f64| t.positive("initial", "depth", default);
    Ok(match kind {
        "flat" => InitialCondition::FlatPool { depth: depth(1.0)? },
        "drops" => {
            let drops = match t.get("initial", "drops") {
                None => Vec::new(),
                Some(e) => parse_drops(&e.value).map_err(|m| err(&e.origin, m))?,
            };
            InitialCondition::Drops { depth: depth(1.0)?, drops }
        }
        "channel" => InitialCondition::ChannelSlope { slope: t.parse("initial", "slope", 0.001)?, depth: depth(1.0)? },
        "vortex" => InitialCondition::VortexField {
            cx: t.parse("initial", "cx", lx / 2.0)?,
            cy: t.parse("initial", "cy", ly / 2.0)?,
            peak_speed: t.parse("initial", "peak_speed", 1.0)?,
            core_radius: t.positive("initial", "core_radius", lx / 10.0)?,
            depth: depth(10.0)?,
        },
        "dam_break" => InitialCondition::DamBreak1D {
            split_x: t.parse("initial", "split_x", lx / 2.0)?,
            h_left: t.positive("initial", "h_left", 1.0)?,
            h_right: t.positive("initial", "h_right", 0.5)?,
        },
        "snapshot" => {
            let e = t.get("initial", "path").ok_or_else(|| err(&type_origin, "initial type `snapshot` needs `path`"))?;
            let path = PathBuf::from(&e.value);
            check_snapshot_dims(&path, grid).map_err(|m| err(&e.origin, m))?;
            InitialCondition::Snapshot { path }
        }
        _ => unreachable!("initial type checked above"),
    })
}

/// Compares a snapshot's header dimensions with the grid when the file is
/// readable; unreadable files are reported when the state is built.
fn check_snapshot_dims(path: &std::path::Path, grid: &GridSpec) -> Result<(), String> {
    use std::io::Read;
    let Ok(mut f) = std::fs::File::open(path) else { return Ok(()) };
    let mut head = [0u8; HEADER_BYTES];
    if f.read_exact(&mut head).is_err() || &head[..4] != b"SWS1" {
        return Ok(());
    }
    let nx = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes")) as usize;
    let ny = u32::from_le_bytes(head[12..16].try_into().expect("4 bytes")) as usize;
    if (nx, ny) != (grid.nx, grid.ny) {
        return Err(format!("dimension mismatch: snapshot is {nx}x{ny}, grid is {}x{}", grid.nx, grid.ny));
    }
    Ok(())
}

/// Writes `cfg` in the config format. Every key is written explicitly, so
/// the output does not depend on the defaults.
pub fn emit_config(cfg: &ScenarioConfig) -> String {
    let mut s = String::new();
    let mut line = |text: String| {
        s.push_str(&text);
        s.push('\n');
    };
    line("[run]".into());
    line(format!("name = {}", cfg.name));
    line(format!("t_end = {:?}", cfg.t_end));
    line(format!("snapshot_every = {:?}", cfg.snapshot_every));
    if let Some(dir) = &cfg.output_dir {
        line(format!("output_dir = {}", dir.display()));
    }
    line(String::new());
    line("[grid]".into());
    line(format!("nx = {}", cfg.grid.nx));
    line(format!("ny = {}", cfg.grid.ny));
    line(format!("dx = {:?}", cfg.grid.dx));
    line(format!("dy = {:?}", cfg.grid.dy));
    line(String::new());
    line("[physics]".into());
    line(format!("g = {:?}", cfg.physics.g));
    line(format!("manning_n = {:?}", cfg.physics.manning_n));
    line(format!("nu_art = {:?}", cfg.physics.nu_art));
    line(String::new());
    line("[policy]".into());
    line(format!("cfl = {:?}", cfg.policy.cfl));
    line(format!("dt_max = {:?}", cfg.policy.dt_max));
    line(format!("dt_min = {:?}", cfg.policy.dt_min));
    line(format!("h_min = {:?}", cfg.policy.h_min));
    line(String::new());
    line("[executor]".into());
    line(format!("kind = {}", cfg.executor));
    line(String::new());
    line("[boundaries]".into());
    for edge in Edge::ALL {
        line(format!("{} = {}", edge.name(), boundary_text(cfg.boundaries.get(edge))));
    }
    line(String::new());
    line("[initial]".into());
    match &cfg.initial {
        InitialCondition::FlatPool { depth } => {
            line("type = flat".into());
            line(format!("depth = {depth:?}"));
        }
        InitialCondition::Drops { depth, drops } => {
            line("type = drops".into());
            line(format!("depth = {depth:?}"));
            let mut groups = String::new();
            for (n, d) in drops.iter().enumerate() {
                if n > 0 {
                    groups.push_str("; ");
                }
                let _ = write!(groups, "{:?} {:?} {:?} {:?}", d.cx, d.cy, d.radius, d.amplitude);
            }
            line(format!("drops = {groups}"));
        }
        InitialCondition::ChannelSlope { slope, depth } => {
            line("type = channel".into());
            line(format!("slope = {slope:?}"));
            line(format!("depth = {depth:?}"));
        }
        InitialCondition::VortexField { cx, cy, peak_speed, core_radius, depth } => {
            line("type = vortex".into());
            line(format!("cx = {cx:?}"));
            line(format!("cy = {cy:?}"));
            line(format!("peak_speed = {peak_speed:?}"));
            line(format!("core_radius = {core_radius:?}"));
            line(format!("depth = {depth:?}"));
        }
        InitialCondition::DamBreak1D { split_x, h_left, h_right } => {
            line("type = dam_break".into());
            line(format!("split_x = {split_x:?}"));
            line(format!("h_left = {h_left:?}"));
            line(format!("h_right = {h_right:?}"));
        }
        InitialCondition::Snapshot { path } => {
            line("type = snapshot".into());
            line(format!("path = {}", path.display()));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::executor::InnerKind;
    use crate::scenarios::{gen_channel_flood, gen_dam_break, gen_five_drops, gen_inlet_flood, gen_vortex};

    #[test]
    fn run_only_file_gives_defaults() {
        let cfg = parse_config("[run]\n").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(parse_config("").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn round_trips_every_generator() {
        for cfg in [
            gen_five_drops(201, false).unwrap(),
            gen_inlet_flood(65).unwrap(),
            gen_channel_flood(65).unwrap(),
            gen_vortex(65).unwrap(),
            gen_dam_break(400, 1.0, 0.5).unwrap(),
        ] {
            let text = emit_config(&cfg);
            assert_eq!(parse_config(&text).unwrap(), cfg, "{text}");
        }
        let mut cfg = ScenarioConfig {
            executor: ExecutorKind::Decomposed { workers: 4, inner: InnerKind::Tiled { tile: 8 } },
            output_dir: Some("out/x".into()),
            initial: InitialCondition::Snapshot { path: "init.sws".into() },
            ..ScenarioConfig::default()
        };
        cfg.boundaries.east = BoundaryKind::FixedElevation { eta_out: 1.25 };
        cfg.boundaries.north = BoundaryKind::Transmissive;
        assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn range_error_names_the_line() {
        let e = parse_config("[policy]\n# stricter\ncfl = 1.5\n").unwrap_err();
        assert_eq!(e.origin, Origin::Line(3));
        assert!(e.to_string().starts_with("line 3:"), "{e}");
        assert!(e.message.contains("cfl"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("[grid]\nnx = 10\nbogus = 1\n", 3),
            ("[nope]\n", 1),
            ("[grid]\nnx = ten\n", 2),
            ("nx = 3\n", 1),
            ("[grid]\nnx = 2\n", 2),
            ("[boundaries]\nwest = inflow 1\n", 2),
            ("[initial]\ntype = flat\nslope = 0.1\n", 3),
            ("[physics]\ng = 9.81\nnu_art = 0.7\n", 3),
            ("[grid]\nny = 10\n[executor]\nkind = decomposed:4\n", 4),
            ("[grid]\nnx = 5\nnx = 6\n", 3),
        ];
        for (text, line) in cases {
            let e = parse_config(text).unwrap_err();
            assert_eq!(e.origin, Origin::Line(line), "{text:?}: {e}");
        }
    }

    #[test]
    fn overrides_replace_values() {
        let cfg = parse_config_with("[grid]\nnx = 10\n", &["grid.nx=20".into(), "physics.nu_art = 0.05".into()]).unwrap();
        assert_eq!(cfg.grid.nx, 20);
        assert_eq!(cfg.physics.nu_art, 0.05);
        let e = parse_config_with("", &["policy.cfl=2".into()]).unwrap_err();
        assert_eq!(e.origin, Origin::Override("policy.cfl=2".into()));
        assert!(parse_config_with("", &["nodot=1".into()]).is_err());
    }

    #[test]
    fn snapshot_dimensions_are_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.sws");
        let fs = crate::grid::FieldSet::still_water(GridSpec::new(4, 5, 1.0, 1.0).unwrap(), 1.0);
        crate::io::write_snapshot(&fs, 9.81, &mut std::fs::File::create(&path).unwrap()).unwrap();
        let text = format!("[grid]\nnx = 4\nny = 5\n[initial]\ntype = snapshot\npath = {}\n", path.display());
        assert!(parse_config(&text).is_ok());
        let bad = text.replace("ny = 5", "ny = 6");
        assert_eq!(parse_config(&bad).unwrap_err().origin, Origin::Line(6));
    }
}
