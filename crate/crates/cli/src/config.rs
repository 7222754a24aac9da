//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! [experiment]
//! kind = bbm-sweep
//! [grid]
//! lo = -2
//! hi = 2
//! cells = 2048
//! ```
//!
//! Lists are comma separated. Scalars given for a per-axis grid key apply to
//! every axis.

use std::collections::BTreeMap;
use std::fmt;

use gagliardo::{DiagMode, Perturbation, Weight, WeightPreset};

use crate::error::{ConfigErrors, ConfigIssue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExperimentKind {
    Kdp,
    Seminorm,
    BbmSweep,
    Flow,
    Stability,
    VerifySuite,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Kdp,
        ExperimentKind::Seminorm,
        ExperimentKind::BbmSweep,
        ExperimentKind::Flow,
        ExperimentKind::Stability,
        ExperimentKind::VerifySuite,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Kdp => "kdp",
            ExperimentKind::Seminorm => "seminorm",
            ExperimentKind::BbmSweep => "bbm-sweep",
            ExperimentKind::Flow => "flow",
            ExperimentKind::Stability => "stability",
            ExperimentKind::VerifySuite => "verify-suite",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Sections that must appear in a config for this kind.
    fn required(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Kdp => &["kdp"],
            ExperimentKind::Seminorm => &["grid", "function", "fractional"],
            ExperimentKind::BbmSweep => &["grid", "function", "sweep"],
            ExperimentKind::Flow => &["grid", "function", "flow"],
            ExperimentKind::Stability => &["grid", "function", "stability"],
            ExperimentKind::VerifySuite => &[],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("experiment", &["kind", "name", "seed"]),
    ("grid", &["dim", "lo", "hi", "cells"]),
    ("domain", &["lo", "hi"]),
    ("function", &["preset", "amplitude", "center", "radius", "frequency", "phase"]),
    (
        "weight",
        &["preset", "value", "offset", "slope", "lo", "hi", "a", "b", "omega", "width"],
    ),
    ("fractional", &["s", "p", "refine", "diag_mode"]),
    ("flow", &["kind", "s", "horizon", "dt", "tol", "max_iter", "samples"]),
    ("sweep", &["p", "s_list"]),
    ("kdp", &["dims", "p_list", "s_list"]),
    (
        "stability",
        &[
            "n_list",
            "s_list",
            "u_amplitude",
            "u_frequency",
            "g_amplitude",
            "g_frequency",
            "horizon",
            "dt",
            "samples",
        ],
    ),
    ("verify", &["cells", "hardy_instances", "variation_instances"]),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionPreset {
    /// `amplitude (1 - |x - center|^2 / radius^2)_+^2`.
    Bump,
    /// `amplitude` on the open cube of half-width `radius` around `center`.
    Indicator,
    /// `amplitude prod_a sin(frequency x_a + phase)`.
    Sine,
    /// `amplitude prod_a cos(frequency x_a + phase)`.
    Cosine,
    /// Independent uniform samples in `[-amplitude, amplitude]` drawn from the seed.
    Random,
}

impl FunctionPreset {
    fn as_str(self) -> &'static str {
        match self {
            FunctionPreset::Bump => "bump",
            FunctionPreset::Indicator => "indicator",
            FunctionPreset::Sine => "sine",
            FunctionPreset::Cosine => "cosine",
            FunctionPreset::Random => "random",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            FunctionPreset::Bump,
            FunctionPreset::Indicator,
            FunctionPreset::Sine,
            FunctionPreset::Cosine,
            FunctionPreset::Random,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            FunctionPreset::Bump | FunctionPreset::Indicator => &["center", "radius"],
            FunctionPreset::Sine | FunctionPreset::Cosine => &["frequency", "phase"],
            FunctionPreset::Random => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub preset: FunctionPreset,
    pub amplitude: f64,
    pub center: Vec<f64>,
    pub radius: f64,
    pub frequency: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSpec {
    pub s: f64,
    pub p: f64,
    pub refine: usize,
    pub diag_mode: DiagMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowKindSpec {
    Fractional,
    Local,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub kind: FlowKindSpec,
    pub s: f64,
    pub horizon: f64,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub p: f64,
    pub s_list: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdpSpec {
    pub dims: Vec<usize>,
    pub p_list: Vec<f64>,
    pub s_list: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySpec {
    pub n_list: Vec<u32>,
    pub s_list: Vec<f64>,
    pub u_amplitude: f64,
    pub u_frequency: f64,
    pub g_amplitude: f64,
    pub g_frequency: f64,
    pub horizon: f64,
    pub dt: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySpec {
    pub cells: usize,
    pub hardy_instances: usize,
    pub variation_instances: usize,
}

/// A validated experiment description with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub name: String,
    pub seed: u64,
    pub grid: GridSpec,
    pub domain: DomainSpec,
    pub function: FunctionSpec,
    pub weight: WeightPreset,
    pub fractional: FractionalSpec,
    pub flow: FlowSpec,
    pub sweep: SweepSpec,
    pub kdp: KdpSpec,
    pub stability: StabilitySpec,
    pub verify: VerifySpec,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Default)]
struct Raw {
    sections: BTreeMap<String, (usize, BTreeMap<String, Entry>)>,
}

fn lex(text: &str, issues: &mut Vec<ConfigIssue>) -> Raw {
    let mut raw = Raw::default();
    let mut current: Option<String> = None;
    for (k, line) in text.lines().enumerate() {
        let n = k + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']').map(str::trim) else {
                issues.push(ConfigIssue::at(n, format!("malformed section header `{line}`")));
                current = None;
                continue;
            };
            if !SCHEMA.iter().any(|(s, _)| *s == name) {
                issues.push(ConfigIssue::at(n, format!("unknown section [{name}]")));
                current = None;
                continue;
            }
            if let Some((first, _)) = raw.sections.get(name) {
                issues.push(ConfigIssue::at(
                    n,
                    format!("section [{name}] repeated (lines {first} and {n})"),
                ));
            } else {
                raw.sections.insert(name.to_string(), (n, BTreeMap::new()));
            }
            current = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            issues.push(ConfigIssue::at(n, format!("expected `key = value`, found `{line}`")));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(section) = &current else {
            issues.push(ConfigIssue::at(n, format!("key `{key}` appears outside any valid section")));
            continue;
        };
        let allowed = SCHEMA.iter().find(|(s, _)| s == section).map_or(&[][..], |(_, k)| *k);
        if !allowed.contains(&key) {
            issues.push(ConfigIssue::at(n, format!("unknown key `{key}` in section [{section}]")));
            continue;
        }
        let entries = &mut raw.sections.get_mut(section).expect("section registered").1;
        if let Some(prev) = entries.get(key) {
            issues.push(ConfigIssue::at(
                n,
                format!("duplicate key `{section}.{key}` (lines {} and {n})", prev.line),
            ));
            continue;
        }
        entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line: n,
            },
        );
    }
    raw
}

#[derive(Clone, Copy)]
enum Range {
    Any,
    Positive,
    AtLeast(f64),
    Open(f64, f64),
}

impl Range {
    fn check(self, v: f64) -> Option<String> {
        let ok = match self {
            Range::Any => v.is_finite(),
            Range::Positive => v.is_finite() && v > 0.0,
            Range::AtLeast(a) => v.is_finite() && v >= a,
            Range::Open(a, b) => v > a && v < b,
        };
        (!ok).then(|| match self {
            Range::Any => "must be finite".to_string(),
            Range::Positive => "must be finite and > 0".to_string(),
            Range::AtLeast(a) => format!("must be finite and >= {a}"),
            Range::Open(a, b) => format!("is outside the open interval ({a}, {b})"),
        })
    }
}

struct Reader<'a> {
    raw: &'a Raw,
    issues: &'a mut Vec<ConfigIssue>,
}

impl Reader<'_> {
    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.raw.sections.get(section).and_then(|(_, e)| e.get(key))
    }

    fn has_section(&self, section: &str) -> bool {
        self.raw.sections.contains_key(section)
    }

    fn fail(&mut self, e: &Entry, section: &str, key: &str, why: impl fmt::Display) {
        self.issues.push(ConfigIssue::at(
            e.line,
            format!("`{section}.{key}` = {} {why}", e.value),
        ));
    }

    fn string(&mut self, section: &str, key: &str, default: &str) -> (String, Option<usize>) {
        match self.entry(section, key) {
            Some(e) => (e.value.clone(), Some(e.line)),
            None => (default.to_string(), None),
        }
    }

    fn real(&mut self, section: &str, key: &str, default: f64, range: Range) -> f64 {
        let Some(e) = self.entry(section, key).cloned() else {
            return default;
        };
        match e.value.parse::<f64>() {
            Ok(v) => {
                if let Some(why) = range.check(v) {
                    self.fail(&e, section, key, why);
                }
                v
            }
            Err(_) => {
                self.fail(&e, section, key, "is not a number");
                default
            }
        }
    }

    fn int<T: std::str::FromStr + Copy + PartialOrd + fmt::Display>(
        &mut self,
        section: &str,
        key: &str,
        default: T,
        min: T,
    ) -> T {
        let Some(e) = self.entry(section, key).cloned() else {
            return default;
        };
        match e.value.parse::<T>() {
            Ok(v) if v >= min => v,
            Ok(_) => {
                self.fail(&e, section, key, format!("must be an integer >= {min}"));
                default
            }
            Err(_) => {
                self.fail(&e, section, key, "is not a nonnegative integer");
                default
            }
        }
    }

    fn list<T: std::str::FromStr>(&mut self, section: &str, key: &str, default: Vec<T>) -> (Vec<T>, Option<usize>) {
        let Some(e) = self.entry(section, key).cloned() else {
            return (default, None);
        };
        let parsed: Option<Vec<T>> = e.value.split(',').map(|t| t.trim().parse::<T>().ok()).collect();
        match parsed {
            Some(v) if !v.is_empty() => (v, Some(e.line)),
            _ => {
                self.fail(&e, section, key, "is not a comma-separated list of numbers");
                (default, Some(e.line))
            }
        }
    }

    fn real_list(&mut self, section: &str, key: &str, default: Vec<f64>, range: Range) -> Vec<f64> {
        let (v, line) = self.list::<f64>(section, key, default);
        if let Some(line) = line {
            for x in &v {
                if let Some(why) = range.check(*x) {
                    self.issues.push(ConfigIssue::at(line, format!("`{section}.{key}` entry {x} {why}")));
                }
            }
        }
        v
    }

    /// Per-axis list, a scalar being repeated `dim` times.
    fn axes<T: std::str::FromStr + Clone>(&mut self, section: &str, key: &str, default: T, dim: usize) -> Vec<T> {
        let (v, line) = self.list::<T>(section, key, vec![default; dim]);
        match (v.len(), line) {
            (1, _) => vec![v[0].clone(); dim],
            (n, Some(line)) if n != dim => {
                self.issues.push(ConfigIssue::at(
                    line,
                    format!("`{section}.{key}` has {n} entries but the grid has dimension {dim}"),
                ));
                vec![v[0].clone(); dim]
            }
            _ => v,
        }
    }

    /// Rejects keys of `section` that the chosen variant does not use.
    fn only(&mut self, section: &str, allowed: &[&str], variant: &str) {
        if let Some((_, entries)) = self.raw.sections.get(section) {
            for (key, e) in entries {
                if !allowed.contains(&key.as_str()) {
                    self.issues.push(ConfigIssue::at(
                        e.line,
                        format!("key `{section}.{key}` does not apply to {variant}"),
                    ));
                }
            }
        }
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// Parses and validates `text`, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let mut issues = Vec::new();
    let raw = lex(text, &mut issues);
    let mut r = Reader {
        raw: &raw,
        issues: &mut issues,
    };

    if !r.has_section("experiment") {
        r.issues.push(ConfigIssue::general("missing required section [experiment]"));
    }
    let (kind_text, kind_line) = r.string("experiment", "kind", "");
    let kind = match (ExperimentKind::parse(&kind_text), kind_line) {
        (Some(k), _) => Some(k),
        (None, Some(line)) => {
            r.issues.push(ConfigIssue::at(line, format!("unknown experiment kind `{kind_text}`")));
            None
        }
        (None, None) => {
            if r.has_section("experiment") {
                r.issues.push(ConfigIssue::general("missing required key `experiment.kind`"));
            }
            None
        }
    };
    if let Some(k) = kind {
        for s in k.required() {
            if !r.has_section(s) {
                r.issues.push(ConfigIssue::general(format!("missing required section [{s}] for {k}")));
            }
        }
    }
    let (name, name_line) = r.string("experiment", "name", kind.map_or("", |k| k.as_str()));
    if let Some(line) = name_line {
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            r.issues.push(ConfigIssue::at(
                line,
                format!("`experiment.name` = {name} must be nonempty and use only [A-Za-z0-9_-]"),
            ));
        }
    }
    let seed = r.int("experiment", "seed", 0u64, 0);

    // grid and domain
    let dim = r.int("grid", "dim", 1usize, 1);
    let dim = if dim > 3 {
        let e = r.entry("grid", "dim").cloned().expect("dim was read");
        r.fail(&e, "grid", "dim", "must be 1, 2 or 3");
        1
    } else {
        dim
    };
    let lo = r.axes("grid", "lo", -1.0f64, dim);
    let hi = r.axes("grid", "hi", 1.0f64, dim);
    let cells = r.axes("grid", "cells", 200usize, dim);
    if lo.iter().zip(&hi).any(|(a, b)| !(a < b && a.is_finite() && b.is_finite())) {
        r.issues.push(ConfigIssue::general("grid bounds need finite lo < hi on every axis"));
    }
    if cells.iter().any(|&c| c < 2) {
        r.issues.push(ConfigIssue::general("`grid.cells` needs at least 2 cells per axis"));
    }
    let grid = GridSpec { dim, lo, hi, cells };
    let domain = DomainSpec {
        lo: r.axes("domain", "lo", f64::NAN, dim),
        hi: r.axes("domain", "hi", f64::NAN, dim),
    };
    let domain = DomainSpec {
        lo: domain.lo.iter().zip(&grid.lo).map(|(d, g)| if d.is_nan() { *g } else { *d }).collect(),
        hi: domain.hi.iter().zip(&grid.hi).map(|(d, g)| if d.is_nan() { *g } else { *d }).collect(),
    };
    if domain.lo.iter().zip(&domain.hi).any(|(a, b)| !(a < b)) {
        r.issues.push(ConfigIssue::general("domain bounds need lo < hi on every axis"));
    }

    // function
    let (preset_text, preset_line) = r.string("function", "preset", "bump");
    let preset = FunctionPreset::parse(&preset_text).unwrap_or_else(|| {
        r.issues.push(ConfigIssue::at(
            preset_line.unwrap_or(0),
            format!("unknown function preset `{preset_text}` (bump, indicator, sine, cosine, random)"),
        ));
        FunctionPreset::Bump
    });
    let mut allowed = vec!["preset", "amplitude"];
    allowed.extend_from_slice(preset.keys());
    r.only("function", &allowed, &format!("function preset {}", preset.as_str()));
    let function = FunctionSpec {
        preset,
        amplitude: r.real("function", "amplitude", 1.0, Range::Any),
        center: r.axes("function", "center", 0.0, dim),
        radius: r.real("function", "radius", 1.0, Range::Positive),
        frequency: r.real("function", "frequency", std::f64::consts::PI, Range::Any),
        phase: r.real("function", "phase", 0.0, Range::Any),
    };

    let weight = read_weight(&mut r);

    let fractional = {
        let (mode_text, mode_line) = r.string("fractional", "diag_mode", DiagMode::GradientCorrect.as_str());
        let diag_mode = DiagMode::parse(&mode_text).unwrap_or_else(|| {
            r.issues.push(ConfigIssue::at(
                mode_line.unwrap_or(0),
                format!("unknown diag_mode `{mode_text}` (exclude, gradient-correct)"),
            ));
            DiagMode::GradientCorrect
        });
        FractionalSpec {
            s: r.real("fractional", "s", 0.5, Range::Open(0.0, 1.0)),
            p: r.real("fractional", "p", 2.0, Range::AtLeast(1.0)),
            refine: r.int("fractional", "refine", gagliardo::params::DEFAULT_NEAR_DIAG_REFINE, 1),
            diag_mode,
        }
    };

    let flow = {
        let (kind_text, kind_line) = r.string("flow", "kind", "fractional");
        let kind = match kind_text.as_str() {
            "fractional" => FlowKindSpec::Fractional,
            "local" => FlowKindSpec::Local,
            other => {
                r.issues.push(ConfigIssue::at(
                    kind_line.unwrap_or(0),
                    format!("unknown flow kind `{other}` (fractional, local)"),
                ));
                FlowKindSpec::Fractional
            }
        };
        let horizon = r.real("flow", "horizon", 0.05, Range::Positive);
        let dt = r.real("flow", "dt", horizon / 200.0, Range::Positive);
        if dt > horizon {
            r.issues.push(ConfigIssue::general(format!("`flow.dt` = {dt} exceeds `flow.horizon` = {horizon}")));
        }
        FlowSpec {
            kind,
            s: r.real("flow", "s", 0.5, Range::Open(0.0, 1.0)),
            horizon,
            dt,
            tol: r.real("flow", "tol", 1e-10, Range::Positive),
            max_iter: r.int("flow", "max_iter", 10_000usize, 1),
            samples: r.int("flow", "samples", 10usize, 1),
        }
    };

    let sweep = SweepSpec {
        p: r.real("sweep", "p", 2.0, Range::AtLeast(1.0)),
        s_list: r.real_list("sweep", "s_list", vec![0.8, 0.9, 0.95, 0.99], Range::Open(0.0, 1.0)),
    };
    if !strictly_increasing(&sweep.s_list) {
        r.issues.push(ConfigIssue::general("`sweep.s_list` must be strictly increasing"));
    }

    let kdp = {
        let (dims, line) = r.list::<usize>("kdp", "dims", vec![1, 2, 3]);
        if dims.iter().any(|d| !(1..=3).contains(d)) {
            r.issues.push(ConfigIssue::at(line.unwrap_or(0), "`kdp.dims` entries must be 1, 2 or 3"));
        }
        KdpSpec {
            dims,
            p_list: r.real_list("kdp", "p_list", vec![1.0, 1.5, 2.0, 3.0], Range::AtLeast(1.0)),
            s_list: r.real_list("kdp", "s_list", vec![0.1, 0.5, 0.9], Range::Open(0.0, 1.0)),
        }
    };

    let stability = {
        let (n_list, n_line) = r.list::<u32>("stability", "n_list", vec![1, 2, 4, 8, 16]);
        let s_list = r.real_list("stability", "s_list", vec![0.6, 0.8, 0.9, 0.95, 0.99], Range::Open(0.0, 1.0));
        if n_list.len() != s_list.len() {
            r.issues.push(ConfigIssue::at(
                n_line.unwrap_or(0),
                format!("`stability.n_list` has {} entries but `stability.s_list` has {}", n_list.len(), s_list.len()),
            ));
        }
        if !n_list.windows(2).all(|w| w[0] < w[1]) || n_list.first() == Some(&0) {
            r.issues.push(ConfigIssue::general("`stability.n_list` must be positive and strictly increasing"));
        }
        if !strictly_increasing(&s_list) {
            r.issues.push(ConfigIssue::general("`stability.s_list` must be strictly increasing"));
        }
        let horizon = r.real("stability", "horizon", 0.05, Range::Positive);
        let dt = r.real("stability", "dt", horizon / 200.0, Range::Positive);
        if dt > horizon {
            r.issues.push(ConfigIssue::general(format!(
                "`stability.dt` = {dt} exceeds `stability.horizon` = {horizon}"
            )));
        }
        StabilitySpec {
            n_list,
            s_list,
            u_amplitude: r.real("stability", "u_amplitude", 0.3, Range::Any),
            u_frequency: r.real("stability", "u_frequency", std::f64::consts::PI, Range::Any),
            g_amplitude: r.real("stability", "g_amplitude", 0.5, Range::Any),
            g_frequency: r.real("stability", "g_frequency", std::f64::consts::PI, Range::Any),
            horizon,
            dt,
            samples: r.int("stability", "samples", 5usize, 1),
        }
    };

    let verify = VerifySpec {
        cells: r.int("verify", "cells", 200usize, 8),
        hardy_instances: r.int("verify", "hardy_instances", 1000usize, 1),
        variation_instances: r.int("verify", "variation_instances", 20usize, 1),
    };

    match (kind, issues.is_empty()) {
        (Some(kind), true) => Ok(ExperimentConfig {
            kind,
            name,
            seed,
            grid,
            domain,
            function,
            weight,
            fractional,
            flow,
            sweep,
            kdp,
            stability,
            verify,
        }),
        _ => {
            issues.sort_by_key(|i| i.line.unwrap_or(0));
            Err(ConfigErrors(issues))
        }
    }
}

fn read_weight(r: &mut Reader<'_>) -> WeightPreset {
    let (text, line) = r.string("weight", "preset", "constant");
    let keys: &[&str] = match text.as_str() {
        "constant" => &["preset", "value"],
        "affine" => &["preset", "offset", "slope", "lo", "hi"],
        "sigmoid" => &["preset", "a", "b"],
        "cos-taper" => &["preset", "a", "omega", "width"],
        other => {
            r.issues.push(ConfigIssue::at(
                line.unwrap_or(0),
                format!("unknown weight preset `{other}` (constant, affine, sigmoid, cos-taper)"),
            ));
            return WeightPreset::Constant { value: 1.0 };
        }
    };
    r.only("weight", keys, &format!("weight preset {text}"));
    let preset = match text.as_str() {
        "constant" => WeightPreset::Constant {
            value: r.real("weight", "value", 1.0, Range::Positive),
        },
        "affine" => WeightPreset::AffineClamped {
            offset: r.real("weight", "offset", 2.0, Range::Any),
            slope: r.real("weight", "slope", 0.5, Range::Any),
            lo: r.real("weight", "lo", 1.0, Range::Positive),
            hi: r.real("weight", "hi", 3.0, Range::Positive),
        },
        "sigmoid" => WeightPreset::Sigmoid {
            a: r.real("weight", "a", 2.0, Range::Any),
            b: r.real("weight", "b", 2.0, Range::Any),
        },
        _ => WeightPreset::CosTaper {
            a: r.real("weight", "a", 0.5, Range::Any),
            omega: r.real("weight", "omega", 1.0, Range::Any),
            width: r.real("weight", "width", 1.0, Range::Positive),
        },
    };
    if let Err(e) = Weight::new(preset.clone()) {
        r.issues.push(ConfigIssue::at(line.unwrap_or(0), format!("weight preset rejected: {e}")));
    }
    preset
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn weight(&self) -> Weight {
        Weight::new(self.weight.clone()).expect("validated while parsing")
    }

    /// Perturbation field of the weight family used by the stability run.
    pub fn weight_perturbation(&self) -> Perturbation {
        Perturbation::Sine {
            amplitude: self.stability.g_amplitude,
            frequency: self.stability.g_frequency,
        }
    }

    /// `(section.key, value)` pairs of the normalized form, in output order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut put = |section: &str, key: &str, value: String| out.push((format!("{section}.{key}"), value));
        put("experiment", "kind", self.kind.to_string());
        put("experiment", "name", self.name.clone());
        put("experiment", "seed", self.seed.to_string());
        let g = &self.grid;
        put("grid", "dim", g.dim.to_string());
        put("grid", "lo", join(&g.lo));
        put("grid", "hi", join(&g.hi));
        put("grid", "cells", join(&g.cells));
        put("domain", "lo", join(&self.domain.lo));
        put("domain", "hi", join(&self.domain.hi));
        let f = &self.function;
        put("function", "preset", f.preset.as_str().to_string());
        put("function", "amplitude", f.amplitude.to_string());
        for key in f.preset.keys() {
            let v = match *key {
                "center" => join(&f.center),
                "radius" => f.radius.to_string(),
                "frequency" => f.frequency.to_string(),
                _ => f.phase.to_string(),
            };
            put("function", key, v);
        }
        match self.weight {
            WeightPreset::Constant { value } => {
                put("weight", "preset", "constant".into());
                put("weight", "value", value.to_string());
            }
            WeightPreset::AffineClamped { offset, slope, lo, hi } => {
                put("weight", "preset", "affine".into());
                put("weight", "offset", offset.to_string());
                put("weight", "slope", slope.to_string());
                put("weight", "lo", lo.to_string());
                put("weight", "hi", hi.to_string());
            }
            WeightPreset::Sigmoid { a, b } => {
                put("weight", "preset", "sigmoid".into());
                put("weight", "a", a.to_string());
                put("weight", "b", b.to_string());
            }
            WeightPreset::CosTaper { a, omega, width } => {
                put("weight", "preset", "cos-taper".into());
                put("weight", "a", a.to_string());
                put("weight", "omega", omega.to_string());
                put("weight", "width", width.to_string());
            }
        }
        let fr = &self.fractional;
        put("fractional", "s", fr.s.to_string());
        put("fractional", "p", fr.p.to_string());
        put("fractional", "refine", fr.refine.to_string());
        put("fractional", "diag_mode", fr.diag_mode.as_str().to_string());
        let fl = &self.flow;
        put(
            "flow",
            "kind",
            match fl.kind {
                FlowKindSpec::Fractional => "fractional",
                FlowKindSpec::Local => "local",
            }
            .into(),
        );
        put("flow", "s", fl.s.to_string());
        put("flow", "horizon", fl.horizon.to_string());
        put("flow", "dt", fl.dt.to_string());
        put("flow", "tol", fl.tol.to_string());
        put("flow", "max_iter", fl.max_iter.to_string());
        put("flow", "samples", fl.samples.to_string());
        put("sweep", "p", self.sweep.p.to_string());
        put("sweep", "s_list", join(&self.sweep.s_list));
        put("kdp", "dims", join(&self.kdp.dims));
        put("kdp", "p_list", join(&self.kdp.p_list));
        put("kdp", "s_list", join(&self.kdp.s_list));
        let st = &self.stability;
        put("stability", "n_list", join(&st.n_list));
        put("stability", "s_list", join(&st.s_list));
        put("stability", "u_amplitude", st.u_amplitude.to_string());
        put("stability", "u_frequency", st.u_frequency.to_string());
        put("stability", "g_amplitude", st.g_amplitude.to_string());
        put("stability", "g_frequency", st.g_frequency.to_string());
        put("stability", "horizon", st.horizon.to_string());
        put("stability", "dt", st.dt.to_string());
        put("stability", "samples", st.samples.to_string());
        let v = &self.verify;
        put("verify", "cells", v.cells.to_string());
        put("verify", "hardy_instances", v.hardy_instances.to_string());
        put("verify", "variation_instances", v.variation_instances.to_string());
        out
    }

    /// Canonical config text. Parsing it yields `self` again.
    pub fn normalized(&self) -> String {
        let mut text = String::new();
        let mut section = String::new();
        for (key, value) in self.entries() {
            let (s, k) = key.split_once('.').expect("qualified key");
            if s != section {
                if !text.is_empty() {
                    text.push('\n');
                }
                text.push_str(&format!("[{s}]\n"));
                section = s.to_string();
            }
            text.push_str(&format!("{k} = {value}\n"));
        }
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_kdp_config_gets_defaults() {
        let cfg = parse_config("[experiment]\nkind = kdp\n[kdp]\ndims = 1\np_list = 2\n").unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Kdp);
        assert_eq!(cfg.name, "kdp");
        assert_eq!(cfg.kdp.dims, vec![1]);
        assert_eq!(cfg.kdp.s_list, vec![0.1, 0.5, 0.9]);
        assert_eq!(cfg.fractional.refine, 3);
        assert_eq!(cfg.grid.cells, vec![200]);
    }

    #[test]
    fn s_equal_to_one_is_out_of_range() {
        let err = parse_config("[experiment]\nkind = seminorm\n[grid]\n[function]\n[fractional]\ns = 1.0\n").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("fractional.s") && text.contains("(0, 1)"), "{text}");
        assert_eq!(err.0[0].line, Some(6));
    }

    #[test]
    fn duplicate_keys_name_both_lines() {
        let err = parse_config("[experiment]\nkind = kdp\n[kdp]\ndims = 1\n\ndims = 2\n").unwrap_err();
        assert!(err.to_string().contains("lines 4 and 6"), "{err}");
    }

    #[test]
    fn all_errors_are_collected() {
        let text = "[experiment]\nkind = flow\nbogus = 1\n[grid]\ncells = 1\n[flow]\ntol = -1\n[nowhere]\n";
        let err = parse_config(text).unwrap_err();
        let msg = err.to_string();
        for needle in ["bogus", "cells", "flow.tol", "[nowhere]", "missing required section [function]"] {
            assert!(msg.contains(needle), "{needle} not in {msg}");
        }
    }

    #[test]
    fn irrelevant_preset_keys_are_rejected() {
        let err = parse_config("[experiment]\nkind = kdp\n[kdp]\n[weight]\npreset = constant\nomega = 2\n").unwrap_err();
        assert!(err.to_string().contains("weight.omega"));
    }

    #[test]
    fn normalized_text_round_trips() {
        let text = "[experiment]\nkind = stability\nseed = 7\n[grid]\nlo = -1\nhi = 1\ncells = 64\n\
                    [function]\npreset = cosine\nfrequency = 1.5707963267948966\n[weight]\npreset = sigmoid\n\
                    [stability]\nhorizon = 0.01\n";
        let cfg = parse_config(text).unwrap();
        let norm = cfg.normalized();
        let again = parse_config(&norm).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.normalized(), norm);
    }
}
