//! Flat `key = value` scenario files.
//!
//! One assignment per line, `#` starts a comment, complex numbers are
//! written `re,im`, time lists either `t0,t1,...` or `start:stop:n`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kerrloss::{CoherentAmplitude, FockCutoff, KerrLossParams, C64};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    ExactVsOracle,
    PurityScan,
    GenerationVsPropagationLoss,
    ConditionedCat,
    CorrelatedVsUncorrelated,
    BeamsplitDecoherence,
    CrescentState,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::ExactVsOracle,
        Scenario::PurityScan,
        Scenario::GenerationVsPropagationLoss,
        Scenario::ConditionedCat,
        Scenario::CorrelatedVsUncorrelated,
        Scenario::BeamsplitDecoherence,
        Scenario::CrescentState,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ExactVsOracle => "exact-vs-oracle",
            Scenario::PurityScan => "purity-scan",
            Scenario::GenerationVsPropagationLoss => "generation-vs-propagation-loss",
            Scenario::ConditionedCat => "conditioned-cat",
            Scenario::CorrelatedVsUncorrelated => "correlated-vs-uncorrelated",
            Scenario::BeamsplitDecoherence => "beamsplit-decoherence",
            Scenario::CrescentState => "crescent-state",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::ExactVsOracle => "closed-form state vs. master-equation integration over t_samples",
            Scenario::PurityScan => "closed-form purity over t_samples",
            Scenario::GenerationVsPropagationLoss => {
                "quadrature-conditioned cross-Kerr state with loss during generation vs. 50% loss afterwards"
            }
            Scenario::ConditionedCat => "cat in the rotated mode after no detection in the lossy one, per loss panel",
            Scenario::CorrelatedVsUncorrelated => "purity with and without the loss cross-correlation",
            Scenario::BeamsplitDecoherence => "negativity grown from |10> by a common reservoir, per gamma_bar",
            Scenario::CrescentState => "Wigner and Q functions of the quadrature-conditioned cross-Kerr state",
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            Scenario::ExactVsOracle | Scenario::PurityScan | Scenario::CorrelatedVsUncorrelated => {
                &["alpha1", "alpha2", "t_samples"]
            }
            Scenario::GenerationVsPropagationLoss | Scenario::CrescentState => &["alpha1", "alpha2", "chi", "t"],
            Scenario::ConditionedCat => &["alpha1", "chi"],
            Scenario::BeamsplitDecoherence => &["g1", "g2", "gamma_bar", "t_samples"],
        }
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario '{s}'"))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the Kerr coupling is written.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KerrForm {
    /// `χ n₁n₂`
    Cross,
    /// `χ(n₁ + n₂)²`
    Symmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PanelSet {
    /// The six standard loss panels, rates in units of `chi`.
    All,
    /// One panel from the configured rates.
    Single,
}

pub const KEYS: &[&str] = &[
    "scenario",
    "kerr",
    "chi",
    "gamma1",
    "gamma2",
    "gamma12",
    "d1",
    "d2",
    "d12",
    "alpha1",
    "alpha2",
    "t",
    "t_samples",
    "cutoff",
    "padding",
    "tol",
    "validation_tol",
    "grid_extent",
    "grid_points",
    "x",
    "g1",
    "g2",
    "delta_w",
    "chi_c",
    "gamma_bar",
    "panels",
    "out_dir",
];

/// Raw assignments in file order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Entries(pub Vec<(String, String)>);

impl Entries {
    pub fn parse(text: &str) -> Result<Self, Vec<String>> {
        let mut out = Vec::new();
        let mut errors = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                errors.push(format!("line {}: expected 'key = value', got '{line}'", i + 1));
                continue;
            };
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() {
                errors.push(format!("line {}: empty key", i + 1));
            } else if out.iter().any(|(seen, _): &(String, String)| *seen == k) {
                errors.push(format!("line {}: duplicate key '{k}'", i + 1));
            } else {
                out.push((k, v));
            }
        }
        if errors.is_empty() {
            Ok(Entries(out))
        } else {
            Err(errors)
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Replaces a value in place or appends it.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.0.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.0.push((key.to_string(), value)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub entries: Entries,
    pub kerr: KerrForm,
    pub chi: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma12: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
    pub alpha1: CoherentAmplitude,
    pub alpha2: CoherentAmplitude,
    pub t: Option<f64>,
    pub t_samples: Vec<f64>,
    pub cutoff: Option<usize>,
    pub padding: usize,
    pub tol: f64,
    pub validation_tol: f64,
    pub grid_extent: f64,
    pub grid_points: usize,
    pub x: f64,
    pub g1: f64,
    pub g2: f64,
    pub delta_w: f64,
    pub chi_c: f64,
    pub gamma_bar: Vec<f64>,
    pub panels: PanelSet,
    pub out_dir: Option<PathBuf>,
}

fn parse_f64(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("'{v}' is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{v}' is not finite"))
    }
}

fn parse_complex(v: &str) -> Result<C64, String> {
    match v.split_once(',') {
        Some((re, im)) => Ok(C64::new(parse_f64(re.trim())?, parse_f64(im.trim())?)),
        None => Ok(C64::new(parse_f64(v)?, 0.0)),
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    if let Some((start, rest)) = v.split_once(':') {
        let (stop, n) = rest
            .split_once(':')
            .ok_or_else(|| format!("'{v}': ranges are written start:stop:n"))?;
        let (start, stop) = (parse_f64(start.trim())?, parse_f64(stop.trim())?);
        let n: usize = n.trim().parse().map_err(|_| format!("'{n}' is not a count"))?;
        return linspace(start, stop, n);
    }
    v.split(',').map(|s| parse_f64(s.trim())).collect()
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Result<Vec<f64>, String> {
    match n {
        0 => Err("a range needs at least one point".into()),
        1 => Ok(vec![start]),
        _ => Ok((0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect()),
    }
}

/// Collects typed values and every problem found on the way.
struct Reader<'a> {
    entries: &'a Entries,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn read<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Option<T> {
        let v = self.entries.get(key)?;
        match parse(v) {
            Ok(x) => Some(x),
            Err(e) => {
                self.errors.push(format!("{key}: {e}"));
                None
            }
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        self.read(key, parse_f64).unwrap_or(default)
    }

    fn usize_opt(&mut self, key: &str) -> Option<usize> {
        self.read(key, |v| v.parse::<usize>().map_err(|_| format!("'{v}' is not a non-negative integer")))
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        let entries = Entries::parse(&text).map_err(CliError::Config)?;
        Self::from_entries(entries).map_err(CliError::Config)
    }

    /// Typed, invariant-checked view of `entries`; reports every violation.
    pub fn from_entries(entries: Entries) -> Result<Self, Vec<String>> {
        let mut r = Reader {
            entries: &entries,
            errors: Vec::new(),
        };
        for (k, _) in &entries.0 {
            if !KEYS.contains(&k.as_str()) {
                r.errors.push(format!("unknown key '{k}'"));
            }
        }
        let scenario = match entries.get("scenario") {
            Some(s) => s.parse::<Scenario>().map_err(|e| r.errors.push(e)).ok(),
            None => {
                r.errors.push("missing required key 'scenario'".into());
                None
            }
        };
        if let Some(sc) = scenario {
            for key in sc.required() {
                if entries.get(key).is_none() {
                    r.errors.push(format!("scenario {sc} requires '{key}'"));
                }
            }
        }

        let kerr = r
            .read("kerr", |v| match v {
                "cross" => Ok(KerrForm::Cross),
                "symmetric" => Ok(KerrForm::Symmetric),
                _ => Err(format!("'{v}' is neither 'cross' nor 'symmetric'")),
            })
            .unwrap_or(match scenario {
                Some(Scenario::ConditionedCat | Scenario::CorrelatedVsUncorrelated) => KerrForm::Symmetric,
                _ => KerrForm::Cross,
            });
        let panels = r
            .read("panels", |v| match v {
                "all" => Ok(PanelSet::All),
                "single" => Ok(PanelSet::Single),
                _ => Err(format!("'{v}' is neither 'all' nor 'single'")),
            })
            .unwrap_or(PanelSet::All);

        let cfg = ScenarioConfig {
            scenario: scenario.unwrap_or(Scenario::ExactVsOracle),
            kerr,
            chi: r.f64_or("chi", 0.0),
            gamma1: r.f64_or("gamma1", 0.0),
            gamma2: r.f64_or("gamma2", 0.0),
            gamma12: r.f64_or("gamma12", 0.0),
            d1: r.f64_or("d1", 0.0),
            d2: r.f64_or("d2", 0.0),
            d12: r.f64_or("d12", 0.0),
            alpha1: r.read("alpha1", parse_complex).unwrap_or_default().into(),
            alpha2: r.read("alpha2", parse_complex).unwrap_or_default().into(),
            t: r.read("t", parse_f64),
            t_samples: r.read("t_samples", parse_list).unwrap_or_default(),
            cutoff: r.usize_opt("cutoff"),
            padding: r.usize_opt("padding").unwrap_or(kerrloss::oracle::DEFAULT_PADDING),
            tol: r.f64_or("tol", kerrloss::oracle::DEFAULT_TOL),
            validation_tol: r.f64_or("validation_tol", 1e-8),
            grid_extent: r.f64_or("grid_extent", 5.0),
            grid_points: r.usize_opt("grid_points").unwrap_or(101),
            x: r.f64_or("x", 0.0),
            g1: r.f64_or("g1", 0.0),
            g2: r.f64_or("g2", 0.0),
            delta_w: r.f64_or("delta_w", 0.0),
            chi_c: r.f64_or("chi_c", 0.0),
            gamma_bar: r.read("gamma_bar", parse_list).unwrap_or_default(),
            panels,
            out_dir: entries.get("out_dir").map(PathBuf::from),
            entries: entries.clone(),
        };
        let mut errors = r.errors;
        if scenario.is_some() {
            errors.extend(cfg.invariant_violations());
        }
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(errors)
        }
    }

    pub fn params(&self) -> KerrLossParams {
        let base = match self.kerr {
            KerrForm::Cross => KerrLossParams::cross_kerr(self.chi),
            KerrForm::Symmetric => KerrLossParams::symmetric_kerr(self.chi),
        };
        base.with_loss(self.gamma1, self.gamma2)
            .with_cross_loss(self.gamma12)
            .with_dephasing(self.d1, self.d2)
            .with_cross_dephasing(self.d12)
    }

    /// Explicit cutoff, or the recommended one for the larger amplitude.
    pub fn fock_cutoff(&self) -> Result<FockCutoff, kerrloss::KerrError> {
        match self.cutoff {
            Some(n) => FockCutoff::new(n),
            None => Ok(FockCutoff::recommended(self.alpha1.abs().max(self.alpha2.abs()))),
        }
    }

    fn invariant_violations(&self) -> Vec<String> {
        let mut v = self.params().violations();
        let sc = self.scenario;
        let positive = |name: &str, x: f64, v: &mut Vec<String>| {
            if !(x > 0.0) {
                v.push(format!("{name} must be positive, got {x}"));
            }
        };
        positive("tol", self.tol, &mut v);
        positive("validation_tol", self.validation_tol, &mut v);
        positive("grid_extent", self.grid_extent, &mut v);
        if self.grid_points < 2 {
            v.push(format!("grid_points must be at least 2, got {}", self.grid_points));
        }
        if let Some(t) = self.t {
            if t < 0.0 {
                v.push(format!("t must be non-negative, got {t}"));
            }
        }
        if self.t_samples.iter().any(|&t| t < 0.0) {
            v.push("t_samples must be non-negative".into());
        }
        if self.t_samples.windows(2).any(|w| w[1] < w[0]) {
            v.push("t_samples must be ascending".into());
        }
        if self.gamma_bar.iter().any(|&g| g < 0.0) {
            v.push("gamma_bar values must be non-negative".into());
        }
        if let Some(n) = self.cutoff {
            match FockCutoff::new(n) {
                Err(e) => v.push(e.to_string()),
                Ok(c) if sc != Scenario::BeamsplitDecoherence => {
                    for a in [self.alpha1, self.alpha2] {
                        if let Err(e) = c.check(a) {
                            v.push(e.to_string());
                        }
                    }
                }
                Ok(_) => {}
            }
        }
        let uncorrelated = self.gamma12 == 0.0 && self.d12 == 0.0;
        match sc {
            Scenario::ExactVsOracle | Scenario::PurityScan | Scenario::GenerationVsPropagationLoss
            | Scenario::CrescentState
                if !uncorrelated =>
            {
                v.push(format!("scenario {sc} uses the closed-form solution and needs gamma12 = d12 = 0"));
            }
            _ => {}
        }
        if sc == Scenario::PurityScan && (self.d1 != 0.0 || self.d2 != 0.0) {
            v.push("purity-scan needs d1 = d2 = 0".into());
        }
        if matches!(sc, Scenario::ExactVsOracle | Scenario::PurityScan | Scenario::GenerationVsPropagationLoss | Scenario::CrescentState)
            && self.kerr != KerrForm::Cross
        {
            v.push(format!("scenario {sc} needs kerr = cross"));
        }
        if sc == Scenario::ConditionedCat {
            if self.kerr != KerrForm::Symmetric {
                v.push("conditioned-cat needs kerr = symmetric".into());
            }
            if self.d1 != 0.0 || self.d2 != 0.0 || self.d12 != 0.0 {
                v.push("conditioned-cat needs zero dephasing".into());
            }
            if self.t.is_none() && !(self.chi > 0.0) {
                v.push("conditioned-cat without 't' needs chi > 0 (t defaults to pi/(2 chi))".into());
            }
        }
        if sc == Scenario::BeamsplitDecoherence && self.g1 == 0.0 && self.g2 == 0.0 {
            v.push("g1 and g2 cannot both vanish".into());
        }
        v
    }
}
