//! Experiment configuration: TOML schema, field-level validation and
//! resolution into a runnable [`Plan`].

use std::fmt;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use ofdm_cf::bounds::DistortionMetric;
use ofdm_cf::codes::{CodeSpec, GeneratorMatrix, ENUMERATION_LIMIT};
use ofdm_cf::hpa::{CubicParams, SelParams};
use ofdm_cf::metrics::RELIABLE_COUNT;
use ofdm_cf::signal::Codeword;
use serde::{Deserialize, Serialize};

/// Largest threshold grid a range may expand to.
const MAX_GRID: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Ccdf,
    BoundsCompare,
    EffectiveCf,
    AomScaling,
    Balance,
    CodeCf,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Self::Ccdf,
        Self::BoundsCompare,
        Self::EffectiveCf,
        Self::AomScaling,
        Self::Balance,
        Self::CodeCf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ccdf => "ccdf",
            Self::BoundsCompare => "bounds-compare",
            Self::EffectiveCf => "effective-cf",
            Self::AomScaling => "aom-scaling",
            Self::Balance => "balance",
            Self::CodeCf => "code-cf",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Self::Ccdf => "crest-factor CCDF of a code, exhaustive or Monte Carlo",
            Self::BoundsCompare => "exact or empirical CCDF next to the analytical upper bounds",
            Self::EffectiveCf => "effective crest factor at one or more tail levels, optionally over several N",
            Self::AomScaling => "AOM exceedance under the log log N clip schedule, with its analytical bound",
            Self::Balance => "distortion-metric tail under clipping against the balancing bounds",
            Self::CodeCf => "worst-case crest factor of a code at several oversampling factors",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Self::Ccdf => &["x", "ccdf", "reliable"],
            Self::BoundsCompare => &["x", "exact", "union_chernoff", "thm1", "thm2", "thm3_linear"],
            Self::EffectiveCf => &["N", "epsilon", "effective_cf", "cf_sq_over_ln_n"],
            Self::AomScaling => &["N", "lambda_N", "mu_N", "empirical_prob", "analytic_bound"],
            Self::Balance => &["x", "empirical", "thm4", "thm5"],
            Self::CodeCf => &["L", "code_cf"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exhaustive,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HSelector {
    /// `d² / N`, which sums to the AOM.
    ScaledSquare,
    Magnitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CcdfBoundSelector {
    /// The enumerated (or sampled) crest-factor distribution itself.
    Exact,
    Thm3Linear,
    Thm3Nonlinear,
    UnionChernoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeKind {
    Uncoded,
    Generator,
    Explicit,
    Repetition,
    EvenWeight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub kind: CodeKind,
    /// Generator matrix file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_file: Option<PathBuf>,
    /// Inline generator rows as bit strings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<String>>,
    /// Explicit codewords as bit strings (`0` maps to +1, `1` to -1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplifierModel {
    Sel,
    Cubic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplifierConfig {
    pub model: AmplifierModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// One experiment, as read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oversampling: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oversampling_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_min: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_range: Option<ThresholdRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<HSelector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ccdf_bound: Option<CcdfBoundSelector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<CodeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplifier: Option<AmplifierConfig>,
}

/// A TOML syntax or schema error, located in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        toml::from_str(text).map_err(|e| {
            let offset = e.span().map_or(0, |s| s.start);
            let (line, column) = line_column(text, offset);
            ParseError {
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })
    }

    /// The config as TOML, for the CSV header.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config types always serialize")
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.field, self.message)
    }
}

#[derive(Debug, Default)]
pub struct Report {
    pub issues: Vec<Issue>,
}

impl Report {
    fn error(&mut self, field: &str, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: Severity::Error,
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn warn(&mut self, field: &str, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: Severity::Warning,
            field: field.to_string(),
            message: message.into(),
        });
    }

    pub fn has_errors(&self) -> bool {
        self.issues.iter().any(|i| i.severity == Severity::Error)
    }
}

/// How probabilities are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Exhaustive,
    MonteCarlo { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplifier {
    Sel(SelParams),
    Cubic(CubicParams),
}

/// A validated experiment with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    Ccdf {
        code: CodeSpec,
        oversampling: usize,
        thresholds: Vec<f64>,
        sampling: Sampling,
        amplifier: Option<Amplifier>,
    },
    BoundsCompare {
        code: CodeSpec,
        oversampling: usize,
        thresholds: Vec<f64>,
        sampling: Sampling,
        k_range: RangeInclusive<u32>,
        c_w: Option<f64>,
    },
    EffectiveCf {
        codes: Vec<CodeSpec>,
        oversampling: usize,
        epsilons: Vec<f64>,
        thresholds: Option<Vec<f64>>,
        sampling: Sampling,
    },
    AomScaling {
        ns: Vec<usize>,
        oversampling: usize,
        x: f64,
        eps: f64,
        k: u32,
        trials: usize,
        seed: u64,
    },
    Balance {
        code: CodeSpec,
        oversampling: usize,
        lambda: f64,
        xs: Vec<f64>,
        sampling: Sampling,
        h: HSelector,
        bound: CcdfBoundSelector,
        k_range: RangeInclusive<u32>,
        c_w: Option<f64>,
    },
    CodeCf {
        code: CodeSpec,
        oversampling: Vec<usize>,
    },
}

impl HSelector {
    pub fn metric(self, n: usize) -> DistortionMetric {
        match self {
            Self::ScaledSquare => DistortionMetric::ScaledSquare { n },
            Self::Magnitude => DistortionMetric::Magnitude,
        }
    }
}

/// Checks every field and, when no errors were found, resolves the plan.
///
/// `base` is the directory relative paths in the config resolve against.
pub fn validate(cfg: &ExperimentConfig, base: &Path) -> (Report, Option<Plan>) {
    let mut r = Report::default();
    let plan = Validator { cfg, base, r: &mut r }.plan();
    if r.has_errors() {
        (r, None)
    } else {
        (r, plan)
    }
}

struct Validator<'a> {
    cfg: &'a ExperimentConfig,
    base: &'a Path,
    r: &'a mut Report,
}

impl Validator<'_> {
    fn plan(&mut self) -> Option<Plan> {
        let exp = self.cfg.experiment;
        self.unused_fields();
        let plan = match exp {
            Experiment::Ccdf => {
                let code = self.code();
                let oversampling = self.oversampling();
                let thresholds = self.thresholds(true, false);
                let sampling = self.sampling(code.as_ref());
                let amplifier = self.amplifier(false);
                Plan::Ccdf {
                    code: code?,
                    oversampling,
                    thresholds: thresholds?,
                    sampling: sampling?,
                    amplifier,
                }
            }
            Experiment::BoundsCompare => {
                let code = self.code();
                let oversampling = self.oversampling();
                let thresholds = self.thresholds(true, false);
                let sampling = self.sampling(code.as_ref());
                let k_range = self.k_range();
                let c_w = self.c_w();
                Plan::BoundsCompare {
                    code: code?,
                    oversampling,
                    thresholds: thresholds?,
                    sampling: sampling?,
                    k_range: k_range?,
                    c_w,
                }
            }
            Experiment::EffectiveCf => {
                let codes = self.effective_cf_codes();
                let oversampling = self.oversampling();
                let thresholds = self.thresholds(false, false);
                let sampling = codes.as_ref().and_then(|c| {
                    // The largest code decides whether enumeration is feasible.
                    let largest = c.iter().max_by(|a, b| a.ln_size().total_cmp(&b.ln_size()));
                    self.sampling(largest)
                });
                let epsilons = self.epsilons(sampling, codes.as_deref());
                Plan::EffectiveCf {
                    codes: codes?,
                    oversampling,
                    epsilons: epsilons?,
                    thresholds,
                    sampling: sampling?,
                }
            }
            Experiment::AomScaling => self.aom_scaling()?,
            Experiment::Balance => {
                let code = self.code();
                let oversampling = self.oversampling();
                if oversampling != 1 {
                    self.r.warn(
                        "oversampling",
                        "the balancing bounds are stated for L = 1; the empirical column uses L samples",
                    );
                }
                let xs = self.thresholds(true, true);
                let sampling = self.sampling(code.as_ref());
                let lambda = match self.amplifier(true) {
                    Some(Amplifier::Sel(p)) => Some(p.lambda()),
                    Some(Amplifier::Cubic(_)) => {
                        self.r.error("amplifier.model", "balance needs the sel model");
                        None
                    }
                    None => None,
                };
                let k_range = self.k_range();
                let c_w = self.c_w();
                Plan::Balance {
                    code: code?,
                    oversampling,
                    lambda: lambda?,
                    xs: xs?,
                    sampling: sampling?,
                    h: self.cfg.h.unwrap_or(HSelector::ScaledSquare),
                    bound: self.cfg.ccdf_bound.unwrap_or(CcdfBoundSelector::Thm3Linear),
                    k_range: k_range?,
                    c_w,
                }
            }
            Experiment::CodeCf => {
                let code = self.code();
                let ls = self.oversampling_list();
                if let Some(c) = &code {
                    self.require_enumerable(c, "code");
                }
                Plan::CodeCf {
                    code: code?,
                    oversampling: ls?,
                }
            }
        };
        Some(plan)
    }

    fn unused_fields(&mut self) {
        let c = self.cfg;
        let exp = c.experiment;
        let present: [(&str, bool); 18] = [
            ("n_list", c.n_list.is_some()),
            ("oversampling_list", c.oversampling_list.is_some()),
            ("k_min", c.k_min.is_some()),
            ("k_max", c.k_max.is_some()),
            ("k", c.k.is_some()),
            ("mode", c.mode.is_some()),
            ("trials", c.trials.is_some()),
            ("seed", c.seed.is_some()),
            ("thresholds", c.thresholds.is_some()),
            ("threshold_range", c.threshold_range.is_some()),
            ("x", c.x.is_some()),
            ("epsilon", c.epsilon.is_some()),
            ("epsilons", c.epsilons.is_some()),
            ("h", c.h.is_some()),
            ("ccdf_bound", c.ccdf_bound.is_some()),
            ("c_w", c.c_w.is_some()),
            ("amplifier", c.amplifier.is_some()),
            ("oversampling", c.oversampling.is_some()),
        ];
        let used: &[&str] = match exp {
            Experiment::Ccdf => &[
                "oversampling",
                "mode",
                "trials",
                "seed",
                "thresholds",
                "threshold_range",
                "amplifier",
            ],
            Experiment::BoundsCompare => &[
                "oversampling",
                "mode",
                "trials",
                "seed",
                "thresholds",
                "threshold_range",
                "k_min",
                "k_max",
                "c_w",
            ],
            Experiment::EffectiveCf => &[
                "n_list",
                "oversampling",
                "mode",
                "trials",
                "seed",
                "thresholds",
                "threshold_range",
                "epsilons",
            ],
            Experiment::AomScaling => &["n_list", "oversampling", "trials", "seed", "x", "epsilon", "k"],
            Experiment::Balance => &[
                "oversampling",
                "mode",
                "trials",
                "seed",
                "thresholds",
                "threshold_range",
                "h",
                "ccdf_bound",
                "c_w",
                "k_min",
                "k_max",
                "amplifier",
            ],
            Experiment::CodeCf => &["oversampling", "oversampling_list"],
        };
        for (name, set) in present {
            if set && !used.contains(&name) {
                self.r.warn(name, format!("not used by the {exp} experiment"));
            }
        }
        if exp == Experiment::AomScaling && c.code.is_some() {
            self.r.warn("code", "aom-scaling always uses uncoded BPSK");
        }
    }

    fn positive_int(&mut self, field: &str, v: usize) -> bool {
        if v == 0 {
            self.r.error(field, "must be at least 1");
            false
        } else {
            true
        }
    }

    fn oversampling(&mut self) -> usize {
        let l = self.cfg.oversampling.unwrap_or(1);
        if self.positive_int("oversampling", l) {
            l
        } else {
            1
        }
    }

    fn oversampling_list(&mut self) -> Option<Vec<usize>> {
        let list = match (&self.cfg.oversampling_list, self.cfg.oversampling) {
            (Some(list), _) => list.clone(),
            (None, Some(l)) => vec![l],
            (None, None) => vec![1],
        };
        if list.is_empty() {
            self.r.error("oversampling_list", "must not be empty");
            return None;
        }
        let mut ok = true;
        for &l in &list {
            ok &= self.positive_int("oversampling_list", l);
        }
        ok.then_some(list)
    }

    fn k_range(&mut self) -> Option<RangeInclusive<u32>> {
        let lo = self.cfg.k_min.unwrap_or(3);
        let hi = self.cfg.k_max.unwrap_or(64);
        let mut ok = true;
        if lo < 3 {
            self.r.error("k_min", format!("must satisfy K ≥ 3, got {lo}"));
            ok = false;
        }
        if hi < lo {
            self.r
                .error("k_max", format!("must be at least k_min = {lo}, got {hi}"));
            ok = false;
        }
        ok.then_some(lo..=hi)
    }

    fn c_w(&mut self) -> Option<f64> {
        let c_w = self.cfg.c_w?;
        if !(c_w >= 0.0 && c_w.is_finite()) {
            self.r.error("c_w", format!("must be finite and ≥ 0, got {c_w}"));
        }
        Some(c_w)
    }

    fn sampling(&mut self, code: Option<&CodeSpec>) -> Option<Sampling> {
        let mode = self.cfg.mode.unwrap_or(if self.cfg.trials.is_some() {
            Mode::MonteCarlo
        } else {
            Mode::Exhaustive
        });
        match mode {
            Mode::Exhaustive => {
                if let Some(c) = code {
                    self.require_enumerable(c, "mode");
                }
                if self.cfg.trials.is_some() || self.cfg.seed.is_some() {
                    self.r.warn("trials", "ignored in exhaustive mode");
                }
                Some(Sampling::Exhaustive)
            }
            Mode::MonteCarlo => self
                .trials_and_seed()
                .map(|(trials, seed)| Sampling::MonteCarlo { trials, seed }),
        }
    }

    fn trials_and_seed(&mut self) -> Option<(usize, u64)> {
        let trials = match self.cfg.trials {
            None => {
                self.r.error("trials", "required for Monte Carlo runs");
                None
            }
            Some(0) => {
                self.r.error("trials", "must be at least 1");
                None
            }
            Some(t) => usize::try_from(t).ok().or_else(|| {
                self.r.error("trials", "too large for this platform");
                None
            }),
        };
        let seed = self.cfg.seed;
        if seed.is_none() {
            self.r
                .error("seed", "required for Monte Carlo runs; there is no clock-based default");
        }
        Some((trials?, seed?))
    }

    fn require_enumerable(&mut self, code: &CodeSpec, field: &str) {
        if code.ln_size() > (ENUMERATION_LIMIT as f64).ln() + 1e-9 {
            self.r.error(
                field,
                format!(
                    "exhaustive enumeration of {} codewords exceeds the limit of {ENUMERATION_LIMIT}; use mode = \"monte-carlo\"",
                    fmt_size(code)
                ),
            );
        }
    }

    fn thresholds(&mut self, required: bool, strictly_positive: bool) -> Option<Vec<f64>> {
        let grid = match (&self.cfg.thresholds, &self.cfg.threshold_range) {
            (Some(_), Some(_)) => {
                self.r
                    .error("thresholds", "give either thresholds or threshold_range, not both");
                return None;
            }
            (Some(t), None) => t.clone(),
            (None, Some(range)) => self.expand_range(*range)?,
            (None, None) => {
                if required {
                    self.r.error("thresholds", "required (or give threshold_range)");
                }
                return None;
            }
        };
        if grid.is_empty() {
            self.r.error("thresholds", "must not be empty");
            return None;
        }
        if let Some(bad) = grid
            .iter()
            .find(|&&v| !v.is_finite() || v < 0.0 || (strictly_positive && v == 0.0))
        {
            let need = if strictly_positive { "> 0" } else { "≥ 0" };
            self.r.error(
                "thresholds",
                format!("every value must be finite and {need}, found {bad}"),
            );
            return None;
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            self.r.error("thresholds", "must be strictly increasing");
            return None;
        }
        Some(grid)
    }

    fn expand_range(&mut self, r: ThresholdRange) -> Option<Vec<f64>> {
        if !(r.start.is_finite() && r.stop.is_finite() && r.stop >= r.start) {
            self.r.error("threshold_range", "needs finite start ≤ stop");
            return None;
        }
        if !(r.step > 0.0 && r.step.is_finite()) {
            self.r.error("threshold_range.step", "must be finite and > 0");
            return None;
        }
        let count = ((r.stop - r.start) / r.step + 1e-9).floor() + 1.0;
        if count > MAX_GRID as f64 {
            self.r
                .error("threshold_range", format!("expands to more than {MAX_GRID} points"));
            return None;
        }
        Some((0..count as usize).map(|i| r.start + i as f64 * r.step).collect())
    }

    fn amplifier(&mut self, required: bool) -> Option<Amplifier> {
        let Some(a) = &self.cfg.amplifier else {
            if required {
                self.r.error("amplifier", "required (model = \"sel\" with lambda)");
            }
            return None;
        };
        match a.model {
            AmplifierModel::Sel => {
                if a.a.is_some() || a.b.is_some() {
                    self.r.warn("amplifier", "a and b are only used by the cubic model");
                }
                let Some(lambda) = a.lambda else {
                    self.r.error("amplifier.lambda", "required by the sel model");
                    return None;
                };
                match SelParams::new(lambda) {
                    Ok(p) => Some(Amplifier::Sel(p)),
                    Err(_) => {
                        self.r
                            .error("amplifier.lambda", format!("must be finite and > 0, got {lambda}"));
                        None
                    }
                }
            }
            AmplifierModel::Cubic => {
                if a.lambda.is_some() {
                    self.r.warn("amplifier.lambda", "only used by the sel model");
                }
                let (Some(ca), Some(cb)) = (a.a, a.b) else {
                    self.r.error("amplifier", "the cubic model needs both a and b");
                    return None;
                };
                match CubicParams::new(ca, cb) {
                    Ok(p) => Some(Amplifier::Cubic(p)),
                    Err(e) => {
                        self.r.error("amplifier", e.to_string());
                        None
                    }
                }
            }
        }
    }

    fn code(&mut self) -> Option<CodeSpec> {
        let n = self.cfg.n;
        if n == Some(0) {
            self.r.error("n", "must be at least 1");
            return None;
        }
        let kind = self.cfg.code.as_ref().map_or(CodeKind::Uncoded, |c| c.kind);
        let spec = match kind {
            CodeKind::Uncoded | CodeKind::Repetition | CodeKind::EvenWeight => {
                let Some(n) = n else {
                    self.r.error("n", "required for this code kind");
                    return None;
                };
                let spec = match kind {
                    CodeKind::Uncoded => CodeSpec::uncoded(n),
                    CodeKind::Repetition => CodeSpec::repetition(n),
                    _ => CodeSpec::even_weight(n),
                };
                match spec {
                    Ok(s) => s,
                    Err(e) => {
                        self.r.error("code", e.to_string());
                        return None;
                    }
                }
            }
            CodeKind::Generator => self.generator()?,
            CodeKind::Explicit => self.explicit()?,
        };
        if let Some(n) = n {
            if spec.n() != n {
                self.r
                    .error("n", format!("is {n} but the code has length {}", spec.n()));
                return None;
            }
        }
        Some(spec)
    }

    fn generator(&mut self) -> Option<CodeSpec> {
        let code = self.cfg.code.as_ref().expect("generator kind implies a code section");
        let text = match (&code.generator_file, &code.rows) {
            (Some(_), Some(_)) => {
                self.r.error("code", "give either generator_file or rows, not both");
                return None;
            }
            (Some(path), None) => {
                let full = self.base.join(path);
                match std::fs::read_to_string(&full) {
                    Ok(t) => t,
                    Err(e) => {
                        self.r
                            .error("code.generator_file", format!("cannot read {}: {e}", full.display()));
                        return None;
                    }
                }
            }
            (None, Some(rows)) => rows.join("\n"),
            (None, None) => {
                self.r.error("code", "the generator kind needs generator_file or rows");
                return None;
            }
        };
        if code.words.is_some() {
            self.r.warn("code.words", "only used by the explicit kind");
        }
        match GeneratorMatrix::parse(&text) {
            Ok(g) => Some(CodeSpec::Generator(g)),
            Err(e) => {
                let field = if code.rows.is_some() {
                    "code.rows"
                } else {
                    "code.generator_file"
                };
                self.r.error(field, e.to_string());
                None
            }
        }
    }

    fn explicit(&mut self) -> Option<CodeSpec> {
        let code = self.cfg.code.as_ref().expect("explicit kind implies a code section");
        if code.rows.is_some() || code.generator_file.is_some() {
            self.r
                .warn("code", "rows and generator_file are only used by the generator kind");
        }
        let Some(words) = &code.words else {
            self.r.error("code.words", "required by the explicit kind");
            return None;
        };
        let mut parsed = Vec::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            let bits: Option<Vec<u8>> = w
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    '0' => Some(0),
                    '1' => Some(1),
                    _ => None,
                })
                .collect();
            match bits.map(|b| Codeword::from_bits(&b)) {
                Some(Ok(c)) => parsed.push(c),
                _ => {
                    self.r.error(
                        "code.words",
                        format!("word {} is not a non-empty bit string: {w:?}", i + 1),
                    );
                    return None;
                }
            }
        }
        match CodeSpec::explicit(parsed) {
            Ok(s) => Some(s),
            Err(e) => {
                self.r.error("code.words", e.to_string());
                None
            }
        }
    }

    fn effective_cf_codes(&mut self) -> Option<Vec<CodeSpec>> {
        let Some(ns) = &self.cfg.n_list else {
            return self.code().map(|c| vec![c]);
        };
        if self.cfg.n.is_some() {
            self.r.error("n_list", "give either n or n_list, not both");
            return None;
        }
        if self.cfg.code.as_ref().is_some_and(|c| c.kind != CodeKind::Uncoded) {
            self.r.error("n_list", "only supported for uncoded BPSK");
            return None;
        }
        if ns.is_empty() {
            self.r.error("n_list", "must not be empty");
            return None;
        }
        let mut out = Vec::with_capacity(ns.len());
        for &n in ns {
            match CodeSpec::uncoded(n) {
                Ok(c) => out.push(c),
                Err(_) => {
                    self.r.error("n_list", "every N must be at least 1");
                    return None;
                }
            }
        }
        Some(out)
    }

    fn epsilons(&mut self, sampling: Option<Sampling>, codes: Option<&[CodeSpec]>) -> Option<Vec<f64>> {
        let Some(eps) = &self.cfg.epsilons else {
            self.r.error("epsilons", "required");
            return None;
        };
        if eps.is_empty() {
            self.r.error("epsilons", "must not be empty");
            return None;
        }
        if let Some(bad) = eps.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
            self.r
                .error("epsilons", format!("every value must lie in (0, 1], found {bad}"));
            return None;
        }
        let floor = match (sampling, codes) {
            (Some(Sampling::MonteCarlo { trials, .. }), _) => Some((RELIABLE_COUNT / trials as f64, "Monte Carlo")),
            (Some(Sampling::Exhaustive), Some(codes)) => codes
                .iter()
                .map(|c| (-c.ln_size()).exp())
                .reduce(f64::max)
                .map(|f| (f, "enumeration")),
            _ => None,
        };
        if let Some((floor, what)) = floor {
            for &e in eps.iter().filter(|&&e| e < floor) {
                self.r.warn(
                    "epsilons",
                    format!("{e} is below the {what} resolution floor {floor}; it will be reported as unresolved"),
                );
            }
        }
        Some(eps.clone())
    }

    fn aom_scaling(&mut self) -> Option<Plan> {
        let oversampling = self.oversampling();
        let ns = match &self.cfg.n_list {
            None => {
                self.r.error("n_list", "required");
                None
            }
            Some(ns) if ns.is_empty() => {
                self.r.error("n_list", "must not be empty");
                None
            }
            Some(ns) => {
                if let Some(bad) = ns.iter().find(|&&n| n < 3) {
                    self.r.error(
                        "n_list",
                        format!("every N must be at least 3 so that ln ln N > 0, found {bad}"),
                    );
                    None
                } else {
                    Some(ns.clone())
                }
            }
        };
        let x = match self.cfg.x {
            None => {
                self.r.error("x", "required");
                None
            }
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                self.r.error("x", format!("must be finite and > 0, got {x}"));
                None
            }
            Some(x) => Some(x),
        };
        let eps = match self.cfg.epsilon {
            None => {
                self.r.error("epsilon", "required");
                None
            }
            Some(e) if !(e > 0.0 && e.is_finite()) => {
                self.r.error("epsilon", format!("must be finite and > 0, got {e}"));
                None
            }
            Some(e) => Some(e),
        };
        let k = match self.cfg.k.unwrap_or(16) {
            k if k < 3 => {
                self.r.error("k", format!("must satisfy K ≥ 3, got {k}"));
                None
            }
            k => Some(k),
        };
        if self.cfg.mode == Some(Mode::Exhaustive) {
            self.r.error("mode", "aom-scaling is Monte Carlo only");
        }
        let ts = self.trials_and_seed();
        let (trials, seed) = ts?;
        Some(Plan::AomScaling {
            ns: ns?,
            oversampling,
            x: x?,
            eps: eps?,
            k: k?,
            trials,
            seed,
        })
    }
}

fn fmt_size(code: &CodeSpec) -> String {
    let bits = code.ln_size() / std::f64::consts::LN_2;
    if bits < 63.0 {
        format!("{}", code.size())
    } else {
        format!("2^{bits:.0}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn issues(text: &str) -> Vec<Issue> {
        let cfg = ExperimentConfig::parse(text).unwrap();
        validate(&cfg, Path::new(".")).0.issues
    }

    #[test]
    fn parse_error_has_position() {
        let e = ExperimentConfig::parse("experiment = \"ccdf\"\nn = = 4\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.column > 1);
        let e = ExperimentConfig::parse("experiment = \"ccdf\"\nbogus = 1\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert_eq!(e.column, 1);
    }

    #[test]
    fn k_below_three_cites_rule() {
        let found = issues("experiment = \"bounds-compare\"\nn = 8\nk_min = 2\nthresholds = [1.0]\n");
        assert!(found
            .iter()
            .any(|i| i.severity == Severity::Error && i.field == "k_min" && i.message.contains("K ≥ 3")));
    }

    #[test]
    fn negative_lambda_is_an_error() {
        let found = issues(
            "experiment = \"balance\"\nn = 8\nthresholds = [0.1]\n[amplifier]\nmodel = \"sel\"\nlambda = -1.0\n",
        );
        assert!(found
            .iter()
            .any(|i| i.severity == Severity::Error && i.field == "amplifier.lambda"));
    }

    #[test]
    fn unresolvable_epsilon_warns() {
        let found =
            issues("experiment = \"effective-cf\"\nn = 64\ntrials = 100000\nseed = 1\nepsilons = [1e-2, 1e-8]\n");
        let warn: Vec<_> = found.iter().filter(|i| i.severity == Severity::Warning).collect();
        assert_eq!(warn.len(), 1, "{found:?}");
        assert!(warn[0].message.contains("resolution floor"));
        assert!(!found.iter().any(|i| i.severity == Severity::Error));
    }

    #[test]
    fn monte_carlo_needs_seed() {
        let found = issues("experiment = \"ccdf\"\nn = 64\ntrials = 10\nthresholds = [1.0]\n");
        assert!(found.iter().any(|i| i.field == "seed" && i.severity == Severity::Error));
    }

    #[test]
    fn range_expands_without_drift() {
        let cfg = ExperimentConfig::parse(
            "experiment = \"ccdf\"\nn = 10\nthreshold_range = { start = 1.0, stop = 3.0, step = 0.25 }\n",
        )
        .unwrap();
        let (report, plan) = validate(&cfg, Path::new("."));
        assert!(!report.has_errors());
        let Some(Plan::Ccdf {
            thresholds, sampling, ..
        }) = plan
        else {
            panic!("wrong plan")
        };
        assert_eq!(thresholds.len(), 9);
        assert_eq!(thresholds[8], 3.0);
        assert_eq!(sampling, Sampling::Exhaustive);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let text = "experiment = \"balance\"\nn = 10\nthresholds = [0.001, 0.01]\nccdf_bound = \"exact\"\n\
                    [code]\nkind = \"uncoded\"\n[amplifier]\nmodel = \"sel\"\nlambda = 1.5\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn enumeration_limit_is_enforced() {
        let found = issues("experiment = \"ccdf\"\nn = 64\nthresholds = [1.0]\n");
        assert!(found
            .iter()
            .any(|i| i.field == "mode" && i.message.contains("monte-carlo")));
    }
}
