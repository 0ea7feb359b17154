//! Run configuration: a small `key = value` format with `[bc]`, `[adapt]` and
//! `[output]` sections, plus named presets.
//!
//! ```text
//! # comment
//! preset = reflection        # optional; defaults come from the preset
//! family = bbm-bbm           # bbm-bbm | bona-smith | kdv-kdv | general
//! theta2 = 0.8               # optional overrides of the generating parameters
//! xmin = -40                 # xmax, ymin, ymax likewise
//! dx = 0.5                   # or nx = 160, ny = 160
//! dt = 0.1
//! t_end = 10
//! algorithm = 1              # 1 | 2
//! reuse_operators = true
//! amplitude = 0.2            # eta0 = amplitude * exp(-(x^2 + y^2) / width)
//! width = 5
//! n_list = 10, 20, 40, 80    # convergence study sizes
//! note = free text
//!
//! [bc]
//! eta = neumann              # every side of one variable
//! u.left = dirichlet         # one side: left | right | bottom | top
//! periodic = both            # x | y | both | none, for all variables
//!
//! [adapt]
//! err = 1e-4
//! hmin = 0.5                 # defaults to the mesh spacing
//! nbvx = 1000000
//! cadence = 1
//! levels = 2
//!
//! [output]
//! directory = out
//! snapshot_times = 0, 20, 40, 70
//! section_times = 2, 5
//! section_y = 0
//! section_samples = 321
//! series_every = 1
//! record_timing = true
//! ```

use std::fmt::Write as _;

use crate::adapt::AdaptParams;
use crate::assembly::{BoundarySpec, Condition, Variable};
use crate::error::{Error, Result};
use crate::mesh::{build_rect_mesh, Point, Side, TriMesh};
use crate::model::{
    bona_smith_mu, coefficients, family_preset, validate, Coefficients, SystemFamily, DEFAULT_BONA_SMITH_THETA2,
};

pub const PRESETS: [&str; 5] = ["reflection", "kdv-periodic", "compare", "convergence", "benchmark"];

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptConfig {
    pub err: f64,
    /// `None` means the uniform mesh spacing.
    pub hmin: Option<f64>,
    pub nbvx: usize,
    pub cadence: usize,
    pub levels: u32,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            err: 1e-4,
            hmin: None,
            nbvx: 1_000_000,
            cadence: 1,
            levels: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub directory: String,
    pub snapshot_times: Vec<f64>,
    pub section_times: Vec<f64>,
    pub section_y: f64,
    pub section_samples: usize,
    /// Steps between rows of the time series.
    pub series_every: usize,
    /// Write measured step times; when false the column is zero so that
    /// repeated runs produce identical files.
    pub record_timing: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: "out".into(),
            snapshot_times: vec![0.0],
            section_times: Vec::new(),
            section_y: 0.0,
            section_samples: 321,
            series_every: 1,
            record_timing: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub family: SystemFamily,
    pub theta2: Option<f64>,
    pub nu: Option<f64>,
    pub mu: Option<f64>,
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub t_end: f64,
    pub algorithm: u8,
    pub reuse_operators: bool,
    pub amplitude: f64,
    pub width: f64,
    pub bc: BoundarySpec,
    pub adapt: Option<AdaptConfig>,
    pub output: OutputConfig,
    pub n_list: Vec<usize>,
    pub note: Option<String>,
}

impl RunConfig {
    /// Defaults of a family: `[-40, 40]^2`, spacing 0.5, step 0.1, zero Dirichlet
    /// data; KdV-KdV switches to step 0.001 and periodic conditions.
    pub fn family_defaults(family: SystemFamily) -> Self {
        let (dt, bc) = match family {
            SystemFamily::KdvKdv => (0.001, BoundarySpec::periodic()),
            _ => (0.1, BoundarySpec::dirichlet()),
        };
        RunConfig {
            preset: None,
            family,
            theta2: (family == SystemFamily::BonaSmith).then_some(DEFAULT_BONA_SMITH_THETA2),
            nu: None,
            mu: None,
            xmin: -40.0,
            xmax: 40.0,
            ymin: -40.0,
            ymax: 40.0,
            nx: 160,
            ny: 160,
            dt,
            t_end: 10.0,
            algorithm: 1,
            reuse_operators: true,
            amplitude: 0.2,
            width: 5.0,
            bc,
            adapt: None,
            output: OutputConfig::default(),
            n_list: vec![10, 20, 40, 80],
            note: None,
        }
    }

    pub fn dx(&self) -> f64 {
        (self.xmax - self.xmin) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.ymax - self.ymin) / self.ny as f64
    }

    /// Sets `nx`, `ny` from a target spacing.
    pub fn set_spacing(&mut self, dx: f64) -> Result<()> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::invalid(format!("dx must be positive, got {dx}")));
        }
        self.nx = ((self.xmax - self.xmin) / dx).round().max(1.0) as usize;
        self.ny = ((self.ymax - self.ymin) / dx).round().max(1.0) as usize;
        Ok(())
    }

    pub fn coefficients(&self) -> Result<Coefficients> {
        let coef = match self.family {
            SystemFamily::General => match (self.theta2, self.nu, self.mu) {
                (Some(t), Some(n), Some(m)) => coefficients(t, n, m)?,
                _ => return Err(Error::invalid("family = general needs theta2, nu and mu")),
            },
            SystemFamily::BonaSmith => {
                let t = self.theta2.unwrap_or(DEFAULT_BONA_SMITH_THETA2);
                let mu = match self.mu {
                    Some(m) => m,
                    None => bona_smith_mu(t)?,
                };
                coefficients(t, self.nu.unwrap_or(0.0), mu)?
            }
            family => {
                let base = family_preset(family, None)?;
                if self.theta2.is_none() && self.nu.is_none() && self.mu.is_none() {
                    base
                } else {
                    coefficients(
                        self.theta2.unwrap_or(base.theta2),
                        self.nu.unwrap_or(base.nu),
                        self.mu.unwrap_or(base.mu),
                    )?
                }
            }
        };
        if let Some(v) = validate(&coef).first() {
            return Err(Error::invalid(format!("coefficients violate {v}")));
        }
        Ok(coef)
    }

    pub fn mesh(&self) -> Result<TriMesh> {
        build_rect_mesh(self.xmin, self.xmax, self.ymin, self.ymax, self.nx, self.ny)
    }

    pub fn adapt_params(&self) -> Option<AdaptParams> {
        self.adapt.as_ref().map(|a| AdaptParams {
            err: a.err,
            hmin: a.hmin.unwrap_or_else(|| self.dx().min(self.dy())),
            nbvx: a.nbvx,
            cadence: a.cadence,
            levels: a.levels,
        })
    }

    /// `(eta0, u0, v0)` of the Gaussian heap at rest.
    pub fn initial(&self) -> impl Fn(Point) -> [f64; 3] {
        let (a, w) = (self.amplitude, self.width);
        move |p| [a * (-(p[0] * p[0] + p[1] * p[1]) / w).exp(), 0.0, 0.0]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::invalid(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if !(self.xmax > self.xmin) || !(self.ymax > self.ymin) {
            return Err(Error::invalid("domain extents must satisfy xmin < xmax and ymin < ymax"));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::invalid("nx and ny must be positive"));
        }
        if !(self.width > 0.0) {
            return Err(Error::invalid("width must be positive"));
        }
        if !matches!(self.algorithm, 1 | 2) {
            return Err(Error::invalid(format!("algorithm must be 1 or 2, got {}", self.algorithm)));
        }
        self.bc.validate()?;
        if let Some(p) = self.adapt_params() {
            p.validate()?;
        }
        if self.output.series_every == 0 {
            return Err(Error::invalid("series_every must be at least 1"));
        }
        self.coefficients().map(|_| ())
    }

    /// Text that parses back to this configuration.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        if let Some(p) = &self.preset {
            line("preset", p.clone());
        }
        line("family", self.family.name().into());
        for (k, v) in [("theta2", self.theta2), ("nu", self.nu), ("mu", self.mu)] {
            if let Some(v) = v {
                line(k, fmt_f64(v));
            }
        }
        line("xmin", fmt_f64(self.xmin));
        line("xmax", fmt_f64(self.xmax));
        line("ymin", fmt_f64(self.ymin));
        line("ymax", fmt_f64(self.ymax));
        line("nx", self.nx.to_string());
        line("ny", self.ny.to_string());
        line("dt", fmt_f64(self.dt));
        line("t_end", fmt_f64(self.t_end));
        line("algorithm", self.algorithm.to_string());
        line("reuse_operators", self.reuse_operators.to_string());
        line("amplitude", fmt_f64(self.amplitude));
        line("width", fmt_f64(self.width));
        line("n_list", join(self.n_list.iter().map(|n| n.to_string())));
        if let Some(n) = &self.note {
            line("note", n.clone());
        }
        s.push_str("\n[bc]\n");
        for var in Variable::ALL {
            for side in Side::ALL {
                let _ = writeln!(s, "{}.{} = {}", var.name(), side.name(), self.bc.get(var, side));
            }
        }
        if let Some(a) = &self.adapt {
            s.push_str("\n[adapt]\n");
            let _ = writeln!(s, "err = {}", fmt_f64(a.err));
            if let Some(h) = a.hmin {
                let _ = writeln!(s, "hmin = {}", fmt_f64(h));
            }
            let _ = writeln!(s, "nbvx = {}", a.nbvx);
            let _ = writeln!(s, "cadence = {}", a.cadence);
            let _ = writeln!(s, "levels = {}", a.levels);
        }
        let o = &self.output;
        s.push_str("\n[output]\n");
        let _ = writeln!(s, "directory = {}", o.directory);
        let _ = writeln!(s, "snapshot_times = {}", join(o.snapshot_times.iter().map(|&t| fmt_f64(t))));
        let _ = writeln!(s, "section_times = {}", join(o.section_times.iter().map(|&t| fmt_f64(t))));
        let _ = writeln!(s, "section_y = {}", fmt_f64(o.section_y));
        let _ = writeln!(s, "section_samples = {}", o.section_samples);
        let _ = writeln!(s, "series_every = {}", o.series_every);
        let _ = writeln!(s, "record_timing = {}", o.record_timing);
        s
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(", ")
}

/// Configurations of a named preset; `compare` expands to three runs.
pub fn preset_configs(name: &str) -> Result<Vec<RunConfig>> {
    let tag = |mut c: RunConfig| {
        c.preset = Some(name.to_string());
        c
    };
    let configs = match name {
        "reflection" => {
            let mut c = RunConfig::family_defaults(SystemFamily::BbmBbm);
            c.amplitude = 0.2;
            c.width = 5.0;
            c.t_end = 70.0;
            c.bc = reflection_bc();
            c.output.snapshot_times = vec![0.0, 20.0, 40.0, 70.0];
            vec![c]
        }
        "kdv-periodic" => {
            let mut c = RunConfig::family_defaults(SystemFamily::KdvKdv);
            c.amplitude = 0.5;
            c.t_end = 60.0;
            c.output.snapshot_times = vec![0.0, 10.0, 20.0, 60.0];
            vec![c]
        }
        "compare" => [SystemFamily::BbmBbm, SystemFamily::BonaSmith, SystemFamily::KdvKdv]
            .into_iter()
            .map(compare_member)
            .collect(),
        "convergence" => {
            let mut c = RunConfig::family_defaults(SystemFamily::BbmBbm);
            (c.xmin, c.xmax, c.ymin, c.ymax) = (0.0, 1.0, 0.0, 1.0);
            (c.nx, c.ny) = (10, 10);
            c.t_end = 1.0;
            c.dt = 0.1;
            c.n_list = vec![10, 20, 40, 80];
            vec![c]
        }
        "benchmark" => {
            let mut c = RunConfig::family_defaults(SystemFamily::BbmBbm);
            c.amplitude = 0.2;
            c.t_end = 10.0;
            vec![c]
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown preset `{other}` (known: {})",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(configs.into_iter().map(tag).collect())
}

/// Single-run preset; for `compare` this is its BBM-BBM member.
pub fn preset(name: &str) -> Result<RunConfig> {
    Ok(preset_configs(name)?.remove(0))
}

fn compare_member(family: SystemFamily) -> RunConfig {
    let mut c = RunConfig::family_defaults(family);
    c.amplitude = 0.5;
    c.t_end = 25.0;
    c.output.snapshot_times = Vec::new();
    c.output.section_times = vec![2.0, 5.0, 10.0, 15.0, 20.0, 25.0];
    if family == SystemFamily::BonaSmith {
        c.note = Some(format!("bona-smith theta2 = {}", fmt_f64(DEFAULT_BONA_SMITH_THETA2)));
    }
    c
}

/// Zero Neumann data for eta everywhere; u and v vanish on the left and top sides.
pub fn reflection_bc() -> BoundarySpec {
    let mut bc = BoundarySpec::neumann();
    for var in [Variable::U, Variable::V] {
        bc.set(var, Side::Left, Condition::DirichletZero);
        bc.set(var, Side::Top, Condition::DirichletZero);
    }
    bc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Section {
    Top,
    Bc,
    Adapt,
    Output,
}

struct Entry<'a> {
    line: usize,
    section: Section,
    key: &'a str,
    value: &'a str,
}

fn tokenize(text: &str) -> Result<Vec<Entry<'_>>> {
    let mut section = Section::Top;
    let mut entries: Vec<Entry<'_>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            section = match name.trim() {
                "bc" => Section::Bc,
                "adapt" => Section::Adapt,
                "output" => Section::Output,
                other => return Err(Error::config(line, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::config(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(Error::config(line, "empty key"));
        }
        if let Some(prev) = entries.iter().find(|e| e.section == section && e.key == key) {
            return Err(Error::config(line, format!("duplicate key `{key}` (first on line {})", prev.line)));
        }
        entries.push(Entry {
            line,
            section,
            key,
            value,
        });
    }
    Ok(entries)
}

fn num(e: &Entry<'_>) -> Result<f64> {
    e.value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::config(e.line, format!("`{}` expects a number, got `{}`", e.key, e.value)))
}

fn count(e: &Entry<'_>) -> Result<usize> {
    e.value
        .parse::<usize>()
        .map_err(|_| Error::config(e.line, format!("`{}` expects a non-negative integer, got `{}`", e.key, e.value)))
}

fn flag(e: &Entry<'_>) -> Result<bool> {
    match e.value {
        "true" => Ok(true),
        "false" => Ok(false),
        v => Err(Error::config(e.line, format!("`{}` expects true or false, got `{v}`", e.key))),
    }
}

fn list<T: std::str::FromStr>(e: &Entry<'_>) -> Result<Vec<T>> {
    if e.value.is_empty() {
        return Ok(Vec::new());
    }
    e.value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| Error::config(e.line, format!("`{}`: cannot parse list item `{}`", e.key, s.trim())))
        })
        .collect()
}

fn condition(e: &Entry<'_>) -> Result<Condition> {
    Condition::parse(e.value).ok_or_else(|| {
        Error::config(
            e.line,
            format!("`{}` expects dirichlet, neumann or periodic, got `{}`", e.key, e.value),
        )
    })
}

/// Parses a configuration, applying preset or family defaults before the
/// explicit keys.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let entries = tokenize(text)?;
    let top = |key: &str| entries.iter().find(|e| e.section == Section::Top && e.key == key);
    let family = match top("family") {
        Some(e) => Some(
            SystemFamily::parse(e.value)
                .ok_or_else(|| Error::config(e.line, format!("unknown family `{}`", e.value)))?,
        ),
        None => None,
    };
    let mut cfg = match (top("preset"), family) {
        (Some(e), fam) => {
            let configs = preset_configs(e.value).map_err(|err| Error::config(e.line, err.to_string()))?;
            let chosen = fam.and_then(|f| configs.iter().find(|c| c.family == f).cloned());
            match (chosen, fam) {
                (Some(c), _) => c,
                (None, Some(f)) => RunConfig {
                    family: f,
                    theta2: (f == SystemFamily::BonaSmith).then_some(DEFAULT_BONA_SMITH_THETA2),
                    ..configs[0].clone()
                },
                (None, None) => configs[0].clone(),
            }
        }
        (None, Some(f)) => RunConfig::family_defaults(f),
        (None, None) => {
            return Err(Error::config(
                0,
                "missing required key: `family` (bbm-bbm, bona-smith, kdv-kdv, general) or `preset` \
                 (reflection, kdv-periodic, compare, convergence, benchmark)",
            ))
        }
    };
    let mut dx = None;
    let mut explicit_n = [false; 2];
    for e in &entries {
        match e.section {
            Section::Top => match e.key {
                "preset" | "family" => {}
                "theta2" => cfg.theta2 = Some(num(e)?),
                "nu" => cfg.nu = Some(num(e)?),
                "mu" => cfg.mu = Some(num(e)?),
                "xmin" => cfg.xmin = num(e)?,
                "xmax" => cfg.xmax = num(e)?,
                "ymin" => cfg.ymin = num(e)?,
                "ymax" => cfg.ymax = num(e)?,
                "dx" => dx = Some((num(e)?, e.line)),
                "nx" => {
                    cfg.nx = count(e)?;
                    explicit_n[0] = true;
                }
                "ny" => {
                    cfg.ny = count(e)?;
                    explicit_n[1] = true;
                }
                "dt" => cfg.dt = num(e)?,
                "t_end" => cfg.t_end = num(e)?,
                "algorithm" => {
                    cfg.algorithm = match e.value {
                        "1" => 1,
                        "2" => 2,
                        v => return Err(Error::config(e.line, format!("`algorithm` expects 1 or 2, got `{v}`"))),
                    }
                }
                "reuse_operators" => cfg.reuse_operators = flag(e)?,
                "amplitude" => cfg.amplitude = num(e)?,
                "width" => cfg.width = num(e)?,
                "n_list" => cfg.n_list = list(e)?,
                "note" => cfg.note = Some(e.value.to_string()),
                k => return Err(Error::config(e.line, format!("unknown key `{k}`"))),
            },
            Section::Bc => apply_bc(&mut cfg.bc, e)?,
            Section::Adapt => {
                if e.key == "enabled" {
                    if flag(e)? {
                        cfg.adapt.get_or_insert_with(AdaptConfig::default);
                    } else {
                        cfg.adapt = None;
                    }
                    continue;
                }
                let a = cfg.adapt.get_or_insert_with(AdaptConfig::default);
                match e.key {
                    "err" => a.err = num(e)?,
                    "hmin" => a.hmin = Some(num(e)?),
                    "nbvx" => a.nbvx = count(e)?,
                    "cadence" => a.cadence = count(e)?,
                    "levels" => {
                        a.levels = e
                            .value
                            .parse()
                            .map_err(|_| Error::config(e.line, format!("`levels` expects an integer, got `{}`", e.value)))?
                    }
                    k => return Err(Error::config(e.line, format!("unknown [adapt] key `{k}`"))),
                }
            }
            Section::Output => {
                let o = &mut cfg.output;
                match e.key {
                    "directory" => o.directory = e.value.to_string(),
                    "snapshot_times" => o.snapshot_times = list(e)?,
                    "section_times" => o.section_times = list(e)?,
                    "section_y" => o.section_y = num(e)?,
                    "section_samples" => o.section_samples = count(e)?,
                    "series_every" => o.series_every = count(e)?,
                    "record_timing" => o.record_timing = flag(e)?,
                    k => return Err(Error::config(e.line, format!("unknown [output] key `{k}`"))),
                }
            }
        }
    }
    if let Some((h, line)) = dx {
        let (nx, ny) = (cfg.nx, cfg.ny);
        cfg.set_spacing(h).map_err(|err| Error::config(line, err.to_string()))?;
        if explicit_n[0] {
            cfg.nx = nx;
        }
        if explicit_n[1] {
            cfg.ny = ny;
        }
    }
    cfg.validate().map_err(|err| match err {
        Error::Config { .. } => err,
        other => Error::config(0, other.to_string()),
    })?;
    Ok(cfg)
}

fn apply_bc(bc: &mut BoundarySpec, e: &Entry<'_>) -> Result<()> {
    if e.key == "periodic" {
        let (x, y) = match e.value {
            "x" => (true, false),
            "y" => (false, true),
            "both" => (true, true),
            "none" => (false, false),
            v => return Err(Error::config(e.line, format!("`periodic` expects x, y, both or none, got `{v}`"))),
        };
        for var in Variable::ALL {
            for (on, sides) in [(x, [Side::Left, Side::Right]), (y, [Side::Bottom, Side::Top])] {
                for side in sides {
                    if on {
                        bc.set(var, side, Condition::Periodic);
                    } else if bc.get(var, side) == Condition::Periodic {
                        bc.set(var, side, Condition::DirichletZero);
                    }
                }
            }
        }
        return Ok(());
    }
    let (var, side) = match e.key.split_once('.') {
        Some((v, s)) => (v, Some(s)),
        None => (e.key, None),
    };
    let var = Variable::parse(var).ok_or_else(|| Error::config(e.line, format!("unknown [bc] key `{}`", e.key)))?;
    let c = condition(e)?;
    match side {
        None => Side::ALL.into_iter().for_each(|s| bc.set(var, s, c)),
        Some(s) => {
            let side = Side::parse(s).ok_or_else(|| Error::config(e.line, format!("unknown side `{s}`")))?;
            bc.set(var, side, c);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_alone_gives_defaults() {
        let c = parse_config("family = bbm-bbm\n").unwrap();
        let k = c.coefficients().unwrap();
        assert_eq!((k.a, k.c), (0.0, 0.0));
        assert!((k.b - 1.0 / 6.0).abs() < 1e-16 && (k.d - 1.0 / 6.0).abs() < 1e-16);
        assert_eq!((c.dx(), c.dt), (0.5, 0.1));
        assert_eq!((c.xmin, c.xmax, c.ymin, c.ymax), (-40.0, 40.0, -40.0, 40.0));
    }

    #[test]
    fn kdv_defaults() {
        let c = parse_config("family = kdv-kdv").unwrap();
        assert_eq!(c.dt, 0.001);
        assert_eq!(c.bc, BoundarySpec::periodic());
    }

    #[test]
    fn empty_file_lists_required_keys() {
        match parse_config("# nothing\n\n") {
            Err(Error::Config { message, .. }) => assert!(message.contains("family") && message.contains("preset")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("family = bbm-bbm\nbogus = 1\n", 2),
            ("family = bbm-bbm\n\ndt = fast\n", 3),
            ("family = nope\n", 1),
            ("family = bbm-bbm\n[bc]\neta.middle = neumann\n", 3),
            ("family = bbm-bbm\n[colors]\n", 2),
            ("family = bbm-bbm\ndt = 0.1\ndt = 0.2\n", 3),
        ];
        for (text, line) in cases {
            match parse_config(text) {
                Err(Error::Config { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn reflection_boundary_conditions() {
        let c = preset("reflection").unwrap();
        for s in Side::ALL {
            assert_eq!(c.bc.get(Variable::Eta, s), Condition::NeumannZero);
        }
        for v in [Variable::U, Variable::V] {
            assert_eq!(c.bc.get(v, Side::Left), Condition::DirichletZero);
            assert_eq!(c.bc.get(v, Side::Top), Condition::DirichletZero);
            assert_eq!(c.bc.get(v, Side::Right), Condition::NeumannZero);
            assert_eq!(c.bc.get(v, Side::Bottom), Condition::NeumannZero);
        }
        assert_eq!((c.amplitude, c.width), (0.2, 5.0));
    }

    #[test]
    fn compare_records_bona_smith_theta() {
        let cs = preset_configs("compare").unwrap();
        assert_eq!(cs.len(), 3);
        let bs = cs.iter().find(|c| c.family == SystemFamily::BonaSmith).unwrap();
        assert_eq!(bs.theta2, Some(9.0 / 11.0));
        assert!(bs.note.as_deref().unwrap().contains("theta2"));
        assert!(cs.iter().all(|c| c.amplitude == 0.5));
    }

    #[test]
    fn presets_round_trip() {
        for name in PRESETS {
            for c in preset_configs(name).unwrap() {
                let text = c.render();
                assert_eq!(parse_config(&text).unwrap(), c, "{name}\n{text}");
            }
        }
    }

    #[test]
    fn dx_and_explicit_counts() {
        let c = parse_config("family = bbm-bbm\ndx = 2\n").unwrap();
        assert_eq!((c.nx, c.ny), (40, 40));
        let c = parse_config("family = bbm-bbm\ndx = 2\nny = 10\n").unwrap();
        assert_eq!((c.nx, c.ny), (40, 10));
    }

    #[test]
    fn bc_section() {
        let c = parse_config("family = bbm-bbm\n[bc]\neta = neumann\nu.left = neumann\nperiodic = y\n").unwrap();
        assert_eq!(c.bc.get(Variable::Eta, Side::Right), Condition::NeumannZero);
        assert_eq!(c.bc.get(Variable::U, Side::Left), Condition::NeumannZero);
        assert_eq!(c.bc.get(Variable::V, Side::Top), Condition::Periodic);
        assert!(parse_config("family = bbm-bbm\n[bc]\neta.left = periodic\n").is_err());
    }

    #[test]
    fn adapt_section_defaults_hmin_to_spacing() {
        let c = parse_config("family = bbm-bbm\ndx = 1\n[adapt]\nerr = 1e-2\n").unwrap();
        let p = c.adapt_params().unwrap();
        assert_eq!((p.err, p.hmin, p.cadence), (1e-2, 1.0, 1));
    }
}
