//! The plain-text run configuration.
//!
//! A run config is UTF-8, line oriented: `key = value` pairs grouped under
//! `[environment]`, `[policy.<name>]`, and `[sweep]` section headers, with
//! `#` comment lines and blank lines ignored. Unknown sections and unknown
//! keys are errors; parsing collects *every* violation with its line number
//! rather than stopping at the first, so a validation pass can report the
//! whole file at once.
//!
//! `[environment]` describes the synthetic world and the replay protocol
//! (trial count, list size, seeds, checkpoint interval). Setting the three
//! `*_taxonomy` keys switches the environment onto externally supplied
//! taxonomy files, and `critical_situations` seeds the critical set from a
//! file instead of the critical clusters' archetypes. Each `[policy.X]`
//! section contributes one entry to the comparison roster; `[sweep]`
//! configures the threshold calibration.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use crate::policies::PolicyKind;
use crate::simulator::{DecoyConfig, EnvironmentConfig, PolicyEntry};
use crate::situation::SimilarityWeights;

/// One problem found in a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    /// 1-based line, when the problem is tied to one.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found in a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Replay protocol parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub trials: u64,
    pub list_size: usize,
    pub seeds: Vec<u64>,
    pub checkpoint_interval: u64,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            trials: 10_000,
            list_size: 10,
            seeds: vec![1],
            checkpoint_interval: 1_000,
        }
    }
}

/// Threshold-calibration parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub sample_per_cluster: usize,
    pub duplicate_pairs: usize,
    pub ambiguous_pairs: usize,
    pub thresholds: Vec<f64>,
}

/// Paths referenced by the config, relative to the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalFiles {
    pub location_taxonomy: Option<PathBuf>,
    pub time_taxonomy: Option<PathBuf>,
    pub social_taxonomy: Option<PathBuf>,
    pub critical_situations: Option<PathBuf>,
}

impl ExternalFiles {
    pub fn has_taxonomies(&self) -> bool {
        self.location_taxonomy.is_some()
    }
}

/// A fully parsed and cross-checked run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub environment: EnvironmentConfig,
    pub protocol: Protocol,
    /// Roster in file order.
    pub policies: Vec<PolicyEntry>,
    pub sweep: Option<SweepSettings>,
    pub files: ExternalFiles,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        Parser::run(text)
    }
}

/// Keys of one section with their lines, consumed as they are interpreted.
struct KeyBag {
    section: String,
    entries: HashMap<String, (String, usize)>,
}

impl KeyBag {
    fn new(section: impl Into<String>) -> Self {
        KeyBag {
            section: section.into(),
            entries: HashMap::new(),
        }
    }

    fn insert(&mut self, key: &str, value: &str, line: usize, issues: &mut Vec<ConfigIssue>) {
        if self.entries.contains_key(key) {
            issues.push(ConfigIssue {
                line: Some(line),
                message: format!("duplicate key `{key}` in [{}]", self.section),
            });
            return;
        }
        self.entries
            .insert(key.to_string(), (value.to_string(), line));
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    /// Remaining keys are unknown; one issue each.
    fn drain_unknown(&mut self, issues: &mut Vec<ConfigIssue>) {
        let mut rest: Vec<(String, (String, usize))> = self.entries.drain().collect();
        rest.sort_by_key(|(_, (_, line))| *line);
        for (key, (_, line)) in rest {
            issues.push(ConfigIssue {
                line: Some(line),
                message: format!("unknown key `{key}` in [{}]", self.section),
            });
        }
    }
}

struct Parser {
    issues: Vec<ConfigIssue>,
}

impl Parser {
    fn run(text: &str) -> Result<RunConfig, ConfigError> {
        let mut parser = Parser { issues: Vec::new() };
        let config = parser.parse(text);
        if parser.issues.is_empty() {
            Ok(config)
        } else {
            Err(ConfigError {
                issues: parser.issues,
            })
        }
    }

    fn issue(&mut self, line: usize, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            line: Some(line),
            message: message.into(),
        });
    }

    fn global_issue(&mut self, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            line: None,
            message: message.into(),
        });
    }

    fn parse(&mut self, text: &str) -> RunConfig {
        enum Target {
            Environment,
            Sweep,
            Policy(usize),
            Skip,
        }

        let mut env_bag = KeyBag::new("environment");
        let mut sweep_bag: Option<KeyBag> = None;
        let mut policy_bags: Vec<(String, usize, KeyBag)> = Vec::new();
        let mut current: Option<Target> = None;

        for (offset, raw) in text.lines().enumerate() {
            let line = offset + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(inner) = trimmed.strip_prefix('[') {
                let Some(name) = inner.strip_suffix(']') else {
                    self.issue(line, "unterminated section header");
                    current = Some(Target::Skip);
                    continue;
                };
                let name = name.trim();
                current = Some(match name {
                    "environment" => Target::Environment,
                    "sweep" => {
                        if sweep_bag.is_some() {
                            self.issue(line, "duplicate [sweep] section");
                            Target::Skip
                        } else {
                            sweep_bag = Some(KeyBag::new("sweep"));
                            Target::Sweep
                        }
                    }
                    _ => match name.strip_prefix("policy.") {
                        Some(pname) if !pname.is_empty() => {
                            if policy_bags.iter().any(|(n, _, _)| n == pname) {
                                self.issue(line, format!("duplicate policy `{pname}`"));
                                Target::Skip
                            } else {
                                policy_bags.push((
                                    pname.to_string(),
                                    line,
                                    KeyBag::new(format!("policy.{pname}")),
                                ));
                                Target::Policy(policy_bags.len() - 1)
                            }
                        }
                        _ => {
                            self.issue(line, format!("unknown section [{name}]"));
                            Target::Skip
                        }
                    },
                });
                continue;
            }
            let Some(eq) = trimmed.find('=') else {
                self.issue(line, "expected `key = value` or a [section] header");
                continue;
            };
            let key = trimmed[..eq].trim();
            let value = trimmed[eq + 1..].trim();
            if key.is_empty() {
                self.issue(line, "missing key before `=`");
                continue;
            }
            match &current {
                None => self.issue(line, format!("key `{key}` outside any section")),
                Some(Target::Skip) => {}
                Some(Target::Environment) => env_bag.insert(key, value, line, &mut self.issues),
                Some(Target::Sweep) => sweep_bag
                    .as_mut()
                    .expect("sweep bag exists while targeted")
                    .insert(key, value, line, &mut self.issues),
                Some(Target::Policy(i)) => {
                    policy_bags[*i].2.insert(key, value, line, &mut self.issues)
                }
            }
        }

        let (environment, protocol, files) = self.interpret_environment(env_bag);
        let policies = policy_bags
            .into_iter()
            .filter_map(|(name, line, bag)| self.interpret_policy(name, line, bag, &protocol))
            .collect::<Vec<_>>();
        let sweep = sweep_bag.map(|bag| self.interpret_sweep(bag, &environment.weights));

        self.cross_checks(&environment, &policies, &files);

        RunConfig {
            environment,
            protocol,
            policies,
            sweep,
            files,
        }
    }

    fn f64_value(&mut self, bag: &mut KeyBag, key: &str, default: f64) -> f64 {
        match bag.take(key) {
            None => default,
            Some((value, line)) => match value.parse::<f64>() {
                Ok(v) => v,
                Err(_) => {
                    self.issue(line, format!("`{key}` expects a number, got `{value}`"));
                    default
                }
            },
        }
    }

    fn opt_f64_value(&mut self, bag: &mut KeyBag, key: &str) -> Option<(f64, usize)> {
        let (value, line) = bag.take(key)?;
        match value.parse::<f64>() {
            Ok(v) => Some((v, line)),
            Err(_) => {
                self.issue(line, format!("`{key}` expects a number, got `{value}`"));
                None
            }
        }
    }

    fn u64_value(&mut self, bag: &mut KeyBag, key: &str, default: u64) -> u64 {
        match bag.take(key) {
            None => default,
            Some((value, line)) => match value.parse::<u64>() {
                Ok(v) => v,
                Err(_) => {
                    self.issue(
                        line,
                        format!("`{key}` expects a non-negative integer, got `{value}`"),
                    );
                    default
                }
            },
        }
    }

    fn usize_value(&mut self, bag: &mut KeyBag, key: &str, default: usize) -> usize {
        self.u64_value(bag, key, default as u64) as usize
    }

    fn path_value(&mut self, bag: &mut KeyBag, key: &str) -> Option<PathBuf> {
        bag.take(key).map(|(value, _)| PathBuf::from(value))
    }

    fn u64_list(&mut self, bag: &mut KeyBag, key: &str, default: Vec<u64>) -> Vec<u64> {
        match bag.take(key) {
            None => default,
            Some((value, line)) => {
                let mut out = Vec::new();
                for part in value.split(',') {
                    match part.trim().parse::<u64>() {
                        Ok(v) => out.push(v),
                        Err(_) => {
                            self.issue(
                                line,
                                format!("`{key}` expects comma-separated integers, got `{value}`"),
                            );
                            return default;
                        }
                    }
                }
                if out.is_empty() {
                    self.issue(line, format!("`{key}` must list at least one value"));
                    return default;
                }
                out
            }
        }
    }

    fn f64_list(&mut self, bag: &mut KeyBag, key: &str) -> Option<(Vec<f64>, usize)> {
        let (value, line) = bag.take(key)?;
        let mut out = Vec::new();
        for part in value.split(',') {
            match part.trim().parse::<f64>() {
                Ok(v) => out.push(v),
                Err(_) => {
                    self.issue(
                        line,
                        format!("`{key}` expects comma-separated numbers, got `{value}`"),
                    );
                    return None;
                }
            }
        }
        Some((out, line))
    }

    fn interpret_environment(
        &mut self,
        mut bag: KeyBag,
    ) -> (EnvironmentConfig, Protocol, ExternalFiles) {
        let defaults = EnvironmentConfig::default();
        let proto_defaults = Protocol::default();

        let seed = self.u64_value(&mut bag, "seed", defaults.seed);
        let clusters = self.usize_value(&mut bag, "clusters", defaults.clusters);
        let critical_clusters =
            self.usize_value(&mut bag, "critical_clusters", defaults.critical_clusters);
        let situations = self.usize_value(&mut bag, "situations", defaults.situations);
        let docs_per_situation =
            self.usize_value(&mut bag, "docs_per_situation", defaults.docs_per_situation);
        let branch_depth =
            self.usize_value(&mut bag, "branch_depth", defaults.branch_depth as usize) as u32;
        let best_click_prob = self.f64_value(&mut bag, "best_click_prob", defaults.best_click_prob);
        let base_click_prob = self.f64_value(&mut bag, "base_click_prob", defaults.base_click_prob);
        let dud_docs = self.usize_value(&mut bag, "dud_docs", defaults.dud_docs);
        let dud_click_prob = self.f64_value(&mut bag, "dud_click_prob", defaults.dud_click_prob);

        let decoy = match self.opt_f64_value(&mut bag, "decoy_click_prob") {
            Some((click_prob, _)) => Some(DecoyConfig {
                click_prob,
                preseed: self.u64_value(&mut bag, "decoy_preseed", 3),
            }),
            None => {
                if let Some((_, line)) = bag.take("decoy_preseed") {
                    self.issue(line, "`decoy_preseed` needs `decoy_click_prob` to be set");
                }
                None
            }
        };

        let alpha_location = self.f64_value(&mut bag, "alpha_location", 1.0);
        let alpha_time = self.f64_value(&mut bag, "alpha_time", 1.0);
        let alpha_social = self.f64_value(&mut bag, "alpha_social", 1.0);
        let weights = match SimilarityWeights::new(alpha_location, alpha_time, alpha_social) {
            Ok(w) => w,
            Err(e) => {
                self.global_issue(format!("alpha_location/alpha_time/alpha_social: {e}"));
                SimilarityWeights::default()
            }
        };

        let protocol = Protocol {
            trials: self.u64_value(&mut bag, "trials", proto_defaults.trials),
            list_size: self.usize_value(&mut bag, "list_size", proto_defaults.list_size),
            seeds: self.u64_list(&mut bag, "seeds", proto_defaults.seeds.clone()),
            checkpoint_interval: self.u64_value(
                &mut bag,
                "checkpoint_interval",
                proto_defaults.checkpoint_interval,
            ),
        };

        let files = ExternalFiles {
            location_taxonomy: self.path_value(&mut bag, "location_taxonomy"),
            time_taxonomy: self.path_value(&mut bag, "time_taxonomy"),
            social_taxonomy: self.path_value(&mut bag, "social_taxonomy"),
            critical_situations: self.path_value(&mut bag, "critical_situations"),
        };

        bag.drain_unknown(&mut self.issues);

        let environment = EnvironmentConfig {
            seed,
            clusters,
            critical_clusters,
            situations,
            docs_per_situation,
            branch_depth,
            best_click_prob,
            base_click_prob,
            dud_docs,
            dud_click_prob,
            decoy,
            weights,
        };
        (environment, protocol, files)
    }

    fn interpret_policy(
        &mut self,
        name: String,
        section_line: usize,
        mut bag: KeyBag,
        protocol: &Protocol,
    ) -> Option<PolicyEntry> {
        let Some((kind_name, kind_line)) = bag.take("policy") else {
            self.issue(
                section_line,
                format!("policy `{name}` is missing the `policy` key"),
            );
            bag.drain_unknown(&mut self.issues);
            return None;
        };

        let require_f64 = |parser: &mut Self, bag: &mut KeyBag, key: &str| match parser
            .opt_f64_value(bag, key)
        {
            Some((v, _)) => Some(v),
            None => {
                parser.issue(
                    kind_line,
                    format!("policy kind `{kind_name}` requires the `{key}` key"),
                );
                None
            }
        };

        let kind = match kind_name.as_str() {
            "exploit" => Some(PolicyKind::Exploit),
            "eps_greedy" => {
                require_f64(self, &mut bag, "epsilon").map(|epsilon| PolicyKind::EpsGreedy { epsilon })
            }
            "eps_beginning" => require_f64(self, &mut bag, "epsilon").map(|epsilon| {
                PolicyKind::EpsBeginning {
                    epsilon,
                    total_iterations: self.u64_value(&mut bag, "total_iterations", protocol.trials),
                }
            }),
            "eps_decreasing_ratio" => require_f64(self, &mut bag, "epsilon0")
                .map(|epsilon0| PolicyKind::EpsDecreasingRatio { epsilon0 }),
            "eps_decreasing_step" => require_f64(self, &mut bag, "epsilon0").map(|start| {
                PolicyKind::EpsDecreasingStep {
                    start,
                    step: self.f64_value(&mut bag, "step", 0.01),
                    period: self.u64_value(&mut bag, "period", 100),
                }
            }),
            "eg" => {
                let candidates = match self.f64_list(&mut bag, "eg_candidates") {
                    Some((list, _)) => list,
                    None => crate::policies::EgState::default_candidates(),
                };
                Some(PolicyKind::ExponentiatedGradient {
                    candidates,
                    floor: self.f64_value(&mut bag, "eg_floor", 0.1),
                    learning_rate: self.f64_value(&mut bag, "eg_rate", 0.1),
                })
            }
            "contextual" => Some(PolicyKind::Contextual),
            other => {
                self.issue(kind_line, format!("unknown policy kind `{other}`"));
                None
            }
        };

        let threshold = match kind {
            Some(PolicyKind::Contextual) => {
                self.opt_f64_value(&mut bag, "threshold_b").map(|(v, l)| (v, Some(l)))
            }
            _ => None,
        };

        bag.drain_unknown(&mut self.issues);
        let kind = kind?;
        if let Err(e) = kind.validate() {
            self.issue(kind_line, format!("policy `{name}`: {e}"));
            return None;
        }
        let mut entry = PolicyEntry::new(name, kind);
        if let Some((value, _)) = threshold {
            entry = entry.with_threshold(value);
        }
        Some(entry)
    }

    fn interpret_sweep(&mut self, mut bag: KeyBag, weights: &SimilarityWeights) -> SweepSettings {
        let max = weights.total();
        let sample_per_cluster = self.usize_value(&mut bag, "sample_per_cluster", 12);
        let duplicate_pairs = self.usize_value(&mut bag, "duplicate_pairs", 1);
        let ambiguous_pairs = self.usize_value(&mut bag, "ambiguous_pairs", 1);
        let b_min = self.opt_f64_value(&mut bag, "b_min");
        let b_max = self.opt_f64_value(&mut bag, "b_max");
        let b_step = self.opt_f64_value(&mut bag, "b_step");

        let lo = b_min.map(|(v, _)| v).unwrap_or(0.0);
        let hi = b_max.map(|(v, _)| v).unwrap_or(max);
        let step = b_step.map(|(v, _)| v).unwrap_or(0.1);

        for (key, value, line) in [
            ("b_min", lo, b_min.map(|(_, l)| l)),
            ("b_max", hi, b_max.map(|(_, l)| l)),
        ] {
            if !(0.0..=max).contains(&value) {
                self.issues.push(ConfigIssue {
                    line,
                    message: format!("`{key}` {value} outside [0, {max}]"),
                });
            }
        }
        if step <= 0.0 || !step.is_finite() {
            self.issues.push(ConfigIssue {
                line: b_step.map(|(_, l)| l),
                message: format!("`b_step` must be positive, got {step}"),
            });
        }
        if sample_per_cluster == 0 {
            self.global_issue("[sweep] sample_per_cluster must be at least 1");
        }

        bag.drain_unknown(&mut self.issues);

        let mut thresholds = Vec::new();
        if step > 0.0 && hi >= lo {
            let count = ((hi - lo) / step).round() as usize;
            for i in 0..=count {
                let b = lo + step * i as f64;
                if b <= max + 1e-9 {
                    thresholds.push(b.min(max));
                }
            }
        }

        SweepSettings {
            sample_per_cluster,
            duplicate_pairs,
            ambiguous_pairs,
            thresholds,
        }
    }

    fn cross_checks(
        &mut self,
        environment: &EnvironmentConfig,
        policies: &[PolicyEntry],
        files: &ExternalFiles,
    ) {
        if let Err(e) = environment.validate() {
            self.global_issue(format!("[environment]: {e}"));
        }

        let max = environment.weights.total();
        for entry in policies {
            if !(0.0..=max).contains(&entry.critical_threshold)
                || entry.critical_threshold == 0.0
            {
                self.global_issue(format!(
                    "policy `{}`: threshold_b {} outside (0, {max}]",
                    entry.name, entry.critical_threshold
                ));
            }
        }

        let taxonomy_paths = [
            &files.location_taxonomy,
            &files.time_taxonomy,
            &files.social_taxonomy,
        ];
        let given = taxonomy_paths.iter().filter(|p| p.is_some()).count();
        if given != 0 && given != 3 {
            self.global_issue(
                "location_taxonomy, time_taxonomy and social_taxonomy must be set together",
            );
        }

        let contextual = policies
            .iter()
            .any(|p| matches!(p.kind, PolicyKind::Contextual));
        if contextual
            && environment.critical_clusters == 0
            && files.critical_situations.is_none()
        {
            self.global_issue(
                "a contextual policy needs critical situations: set critical_clusters >= 1 \
                 or provide a critical_situations file",
            );
        }
    }
}
