//! The trial loop and the policy-comparison harness.
//!
//! Each trial runs three tasks: retrieve the past situation most similar to
//! the current one, let the policy pick a ranked list from that situation's
//! document statistics, then record the observed clicks under the current
//! situation. The cumulative click-through rate — total clicks over total
//! recommendations so far — is checkpointed at a fixed interval.
//!
//! Three seeded random streams keep replays byte-reproducible and
//! comparisons fair: the situation stream and the click draws are shared by
//! every policy run on the same seed (common random numbers), while policy
//! randomness gets its own stream.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Environment, SimulatorError};
use crate::policies::{
    contextual_select, effective_epsilon, select_documents, EgState, PolicyKind, SelectionContext,
};
use crate::situation::{situation_sim, CriticalSituationSet, Situation};
use crate::usermodel::{CaseBase, DocumentId};

const CLICK_STREAM_SALT: u64 = 0x9E37_79B9_7F4A_7C15;
const POLICY_STREAM_SALT: u64 = 0xD1B5_4A32_D192_ED03;

/// Protocol parameters of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOptions {
    pub trials: u64,
    /// Documents recommended per trial.
    pub list_size: usize,
    /// Cumulative CTR is emitted every this many trials.
    pub checkpoint_interval: u64,
    pub seed: u64,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            trials: 10_000,
            list_size: 10,
            checkpoint_interval: 1_000,
            seed: 1,
        }
    }
}

/// Everything one trial produced.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// 1-based trial index.
    pub iteration: u64,
    pub situation: Situation,
    pub epsilon_used: f64,
    pub recommended: Vec<DocumentId>,
    /// One 0/1 reward per recommended document.
    pub rewards: Vec<u8>,
}

/// One cumulative-CTR checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtrPoint {
    pub iteration: u64,
    pub average_ctr: f64,
}

/// Cumulative click-through rate over the run, checkpoint by checkpoint.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CtrSeries {
    pub checkpoints: Vec<CtrPoint>,
}

impl CtrSeries {
    pub fn final_ctr(&self) -> f64 {
        self.checkpoints.last().map(|p| p.average_ctr).unwrap_or(0.0)
    }

    /// The checkpoint at `iteration`, if one was emitted there.
    pub fn at(&self, iteration: u64) -> Option<f64> {
        self.checkpoints
            .iter()
            .find(|p| p.iteration == iteration)
            .map(|p| p.average_ctr)
    }
}

/// The full outcome of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub records: Vec<TrialRecord>,
    pub series: CtrSeries,
}

impl RunOutcome {
    pub fn final_ctr(&self) -> f64 {
        self.series.final_ctr()
    }
}

/// Memo of pairwise situation similarities between stream situations.
/// Case-base entries all come from the stream during simulation, so the
/// scan over the case base reduces to table lookups after warm-up; foreign
/// situations fall back to a direct computation.
struct SimTable {
    n: usize,
    values: Vec<f64>,
}

impl SimTable {
    fn new(n: usize) -> Self {
        SimTable {
            n,
            values: vec![f64::NAN; n * n],
        }
    }

    fn get(&self, i: usize, j: usize) -> Option<f64> {
        let v = self.values[i * self.n + j];
        if v.is_nan() {
            None
        } else {
            Some(v)
        }
    }

    fn put(&mut self, i: usize, j: usize, value: f64) {
        self.values[i * self.n + j] = value;
    }
}

/// The exhaustive nearest-situation scan, memoized over stream situations.
/// Ties go to the earliest entry; equivalent to
/// [`crate::situation::nearest_past_situation`] by construction.
fn nearest_in_case_base(
    env: &Environment,
    sims: &mut SimTable,
    current: &Situation,
    case_base: &CaseBase,
) -> Result<(usize, f64), SimulatorError> {
    let weights = env.weights();
    let taxonomies = env.taxonomies();
    let current_index = env.situation_index(current);
    let mut nearest_slot = 0usize;
    let mut nearest_sim = f64::NEG_INFINITY;
    for (slot, past) in case_base.situations().iter().enumerate() {
        let sim = match (current_index, env.situation_index(past)) {
            (Some(i), Some(j)) => match sims.get(i, j) {
                Some(v) => v,
                None => {
                    let v = situation_sim(current, past, weights, taxonomies)?;
                    sims.put(i, j, v);
                    v
                }
            },
            _ => situation_sim(current, past, weights, taxonomies)?,
        };
        if sim > nearest_sim {
            nearest_sim = sim;
            nearest_slot = slot;
        }
    }
    Ok((nearest_slot, nearest_sim))
}

/// Runs the trial loop for one policy over one seeded stream.
///
/// The case base must start non-empty (the environment bootstrap provides
/// one entry per cluster); the contextual policy additionally needs a
/// non-empty critical set. Both are mutated in place and can be inspected
/// afterwards.
pub fn run_trials(
    env: &Environment,
    policy: &PolicyKind,
    case_base: &mut CaseBase,
    critical: &mut CriticalSituationSet,
    opts: &TrialOptions,
) -> Result<RunOutcome, SimulatorError> {
    policy.validate()?;
    if case_base.is_empty() {
        return Err(SimulatorError::EmptyCaseBase);
    }
    if matches!(policy, PolicyKind::Contextual) && critical.is_empty() {
        return Err(SimulatorError::MissingCriticalSet);
    }
    if opts.trials < 1 {
        return Err(SimulatorError::CountTooSmall {
            name: "trials",
            minimum: 1,
            value: opts.trials as usize,
        });
    }
    if opts.list_size < 1 {
        return Err(SimulatorError::CountTooSmall {
            name: "list_size",
            minimum: 1,
            value: opts.list_size,
        });
    }
    let interval = opts.checkpoint_interval.max(1);

    let weights = env.weights();
    let taxonomies = env.taxonomies();
    let mut situation_rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut click_rng = ChaCha8Rng::seed_from_u64(opts.seed ^ CLICK_STREAM_SALT);
    let mut policy_rng = ChaCha8Rng::seed_from_u64(opts.seed ^ POLICY_STREAM_SALT);

    let mut eg = match policy {
        PolicyKind::ExponentiatedGradient {
            candidates,
            floor,
            learning_rate,
        } => Some(EgState::new(candidates.clone(), *floor, *learning_rate)?),
        _ => None,
    };

    let mut sims = SimTable::new(env.situations().len());
    let mut records = Vec::with_capacity(opts.trials as usize);
    let mut series = CtrSeries::default();
    let mut total_clicks = 0u64;
    let mut total_recs = 0u64;

    for t in 1..=opts.trials {
        let current = env.draw_situation(&mut situation_rng).clone();

        // Task 1: nearest past situation, exhaustive over the case base.
        let (nearest_slot, _) = nearest_in_case_base(env, &mut sims, &current, case_base)?;
        let nearest = case_base.situations()[nearest_slot].clone();

        // A first-time situation gets its own entry, carrying the nearest
        // entry's document set at zero counts.
        if !case_base.contains(&current) {
            case_base.seed_from(current.clone(), &nearest)?;
        }

        // Task 2: the policy picks the ranked list from the nearest
        // situation's statistics.
        let (recommended, epsilon_used, eg_choice) = match policy {
            PolicyKind::Contextual => {
                let out = contextual_select(
                    &current,
                    critical,
                    case_base,
                    &nearest,
                    opts.list_size,
                    weights,
                    taxonomies,
                    &mut policy_rng,
                )?;
                (out.recommended, out.criticality.epsilon, None)
            }
            _ => {
                let candidates = case_base.candidate_documents(&nearest)?;
                let ctx = SelectionContext {
                    candidates,
                    list_size: opts.list_size,
                    iteration: t,
                    epsilon_inputs: None,
                };
                let decision = effective_epsilon(policy, &ctx, eg.as_ref(), &mut policy_rng)?;
                let recommended = select_documents(&ctx, decision.epsilon, &mut policy_rng)?;
                (recommended, decision.epsilon, decision.eg_choice)
            }
        };

        // Task 3: draw clicks and record the feedback under the current
        // situation. Reading time derives from the click draw so that the
        // shared click stream advances identically for every policy.
        let mut rewards = Vec::with_capacity(recommended.len());
        let mut any_click = false;
        for doc in &recommended {
            let draw: f64 = rand::Rng::random(&mut click_rng);
            let clicked = draw < env.click_probability(&current, doc);
            rewards.push(u8::from(clicked));
            any_click |= clicked;
            case_base.record_feedback(&current, doc, clicked);
            if clicked {
                case_base.add_reading_time(&current, doc, (1.0 - draw) * 120.0);
            }
            total_clicks += u64::from(clicked);
            total_recs += 1;
        }

        if let (Some(eg_state), Some(choice)) = (eg.as_mut(), eg_choice) {
            eg_state.update(choice, any_click)?;
        }

        records.push(TrialRecord {
            iteration: t,
            situation: current,
            epsilon_used,
            recommended,
            rewards,
        });

        let due = t % interval == 0 || t == opts.trials;
        if due && series.checkpoints.last().map(|p| p.iteration) != Some(t) {
            series.checkpoints.push(CtrPoint {
                iteration: t,
                average_ctr: total_clicks as f64 / total_recs as f64,
            });
        }
    }

    Ok(RunOutcome { records, series })
}

/// A named policy in a comparison roster.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEntry {
    pub name: String,
    pub kind: PolicyKind,
    /// Criticality threshold used to seed this policy's critical set.
    pub critical_threshold: f64,
}

impl PolicyEntry {
    pub fn new(name: impl Into<String>, kind: PolicyKind) -> Self {
        PolicyEntry {
            name: name.into(),
            kind,
            critical_threshold: 2.4,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.critical_threshold = threshold;
        self
    }
}

/// One (policy, seed) run in a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub policy: String,
    pub seed: u64,
    pub series: CtrSeries,
    pub final_ctr: f64,
    /// How many situations the run added to the critical set.
    pub critical_growth: u64,
}

/// Results of running a roster of policies over a list of seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Sorted by (policy, seed).
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    /// Distinct policy names, sorted.
    pub fn policies(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.rows.iter().map(|r| r.policy.as_str()).collect();
        names.sort();
        names.dedup();
        names
    }

    /// Mean final cumulative CTR of a policy across its seeds.
    pub fn final_mean(&self, policy: &str) -> Option<f64> {
        let finals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.policy == policy)
            .map(|r| r.final_ctr)
            .collect();
        if finals.is_empty() {
            None
        } else {
            Some(finals.iter().sum::<f64>() / finals.len() as f64)
        }
    }

    /// Rows of one policy, seed order.
    pub fn rows_for(&self, policy: &str) -> Vec<&ComparisonRow> {
        self.rows.iter().filter(|r| r.policy == policy).collect()
    }

    /// Writes the comparison as CSV: `policy,seed,iteration,avg_ctr`, one
    /// row per checkpoint, ordered by policy, seed, iteration.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "policy,seed,iteration,avg_ctr")?;
        for row in &self.rows {
            for point in &row.series.checkpoints {
                writeln!(
                    out,
                    "{},{},{},{:.6}",
                    row.policy, row.seed, point.iteration, point.average_ctr
                )?;
            }
        }
        Ok(())
    }
}

/// Runs every roster entry over every seed on the same environment, with
/// common random numbers across policies. Each run starts from a fresh
/// bootstrap case base and critical set.
pub fn compare_policies(
    env: &Environment,
    roster: &[PolicyEntry],
    opts: &TrialOptions,
    seeds: &[u64],
) -> Result<Comparison, SimulatorError> {
    let mut rows = Vec::with_capacity(roster.len() * seeds.len());
    for entry in roster {
        entry.kind.validate()?;
        for &seed in seeds {
            let mut case_base = env.bootstrap_case_base();
            let mut critical = env.critical_set(entry.critical_threshold)?;
            let before = critical.len();
            let run = run_trials(
                env,
                &entry.kind,
                &mut case_base,
                &mut critical,
                &TrialOptions { seed, ..*opts },
            )?;
            rows.push(ComparisonRow {
                policy: entry.name.clone(),
                seed,
                final_ctr: run.final_ctr(),
                series: run.series,
                critical_growth: (critical.len() - before) as u64,
            });
        }
    }
    rows.sort_by(|a, b| a.policy.cmp(&b.policy).then(a.seed.cmp(&b.seed)));
    Ok(Comparison { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::EnvironmentConfig;
    use crate::situation::nearest_past_situation;

    fn small_env() -> Environment {
        Environment::generate(&EnvironmentConfig {
            clusters: 4,
            critical_clusters: 1,
            situations: 16,
            docs_per_situation: 8,
            dud_docs: 2,
            ..EnvironmentConfig::default()
        })
        .unwrap()
    }

    fn short_opts(trials: u64, seed: u64) -> TrialOptions {
        TrialOptions {
            trials,
            list_size: 4,
            checkpoint_interval: 100,
            seed,
        }
    }

    fn run(env: &Environment, policy: PolicyKind, opts: &TrialOptions) -> RunOutcome {
        let mut cb = env.bootstrap_case_base();
        let mut sc = env.critical_set(2.4).unwrap();
        run_trials(env, &policy, &mut cb, &mut sc, opts).unwrap()
    }

    #[test]
    fn checkpoints_and_denominators_line_up() {
        let env = small_env();
        let out = run(&env, PolicyKind::EpsGreedy { epsilon: 0.5 }, &short_opts(1_000, 3));
        assert_eq!(out.series.checkpoints.len(), 10);
        assert_eq!(out.records.len(), 1_000);
        let recs: usize = out.records.iter().map(|r| r.recommended.len()).sum();
        assert_eq!(recs, 4_000, "4 slots per trial, pools are large enough");
        for r in &out.records {
            assert_eq!(r.recommended.len(), r.rewards.len());
        }
        let last = out.series.checkpoints.last().unwrap();
        assert_eq!(last.iteration, 1_000);
    }

    #[test]
    fn protocol_scale_checkpoints_and_denominator() {
        // The standard protocol: 10000 trials of 10 recommendations with a
        // checkpoint every 1000.
        let env = Environment::generate(&EnvironmentConfig::default()).unwrap();
        let mut cb = env.bootstrap_case_base();
        let mut sc = env.critical_set(2.4).unwrap();
        let out = run_trials(
            &env,
            &PolicyKind::EpsGreedy { epsilon: 0.5 },
            &mut cb,
            &mut sc,
            &TrialOptions {
                trials: 10_000,
                list_size: 10,
                checkpoint_interval: 1_000,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(out.series.checkpoints.len(), 10);
        let denominator: usize = out.records.iter().map(|r| r.recommended.len()).sum();
        assert_eq!(denominator, 100_000);
    }

    #[test]
    fn a_partial_final_checkpoint_is_emitted() {
        let env = small_env();
        let out = run(&env, PolicyKind::Exploit, &short_opts(250, 3));
        let iters: Vec<u64> = out.series.checkpoints.iter().map(|p| p.iteration).collect();
        assert_eq!(iters, vec![100, 200, 250]);
    }

    #[test]
    fn all_click_environment_pins_ctr_at_one() {
        let env = Environment::generate(&EnvironmentConfig {
            clusters: 2,
            critical_clusters: 1,
            situations: 4,
            docs_per_situation: 6,
            dud_docs: 1,
            best_click_prob: 1.0,
            base_click_prob: 1.0,
            dud_click_prob: 1.0,
            ..EnvironmentConfig::default()
        })
        .unwrap();
        let out = run(&env, PolicyKind::EpsGreedy { epsilon: 0.3 }, &short_opts(500, 11));
        for p in &out.series.checkpoints {
            assert_eq!(p.average_ctr, 1.0);
        }
    }

    #[test]
    fn series_recomputes_exactly_from_the_trial_records() {
        let env = small_env();
        let out = run(&env, PolicyKind::EpsGreedy { epsilon: 0.9 }, &short_opts(730, 5));
        let mut clicks = 0u64;
        let mut recs = 0u64;
        let mut expected = Vec::new();
        for r in &out.records {
            clicks += r.rewards.iter().map(|&x| u64::from(x)).sum::<u64>();
            recs += r.rewards.len() as u64;
            if r.iteration % 100 == 0 || r.iteration == 730 {
                expected.push(CtrPoint {
                    iteration: r.iteration,
                    average_ctr: clicks as f64 / recs as f64,
                });
            }
        }
        assert_eq!(out.series.checkpoints, expected);
    }

    #[test]
    fn exploitation_beats_full_exploration_where_it_already_knows_best() {
        // Two documents, probabilities 0.9 / 0.1, one recommendation per
        // trial. The single cluster is critical, so the best document sits
        // first and exploitation finds it from the zero-count start; full
        // exploration keeps alternating.
        let env = Environment::generate(&EnvironmentConfig {
            clusters: 1,
            critical_clusters: 1,
            situations: 2,
            docs_per_situation: 2,
            dud_docs: 0,
            best_click_prob: 0.9,
            base_click_prob: 0.1,
            ..EnvironmentConfig::default()
        })
        .unwrap();
        let opts = TrialOptions {
            trials: 3_000,
            list_size: 1,
            checkpoint_interval: 1_000,
            seed: 21,
        };
        let exploit = run(&env, PolicyKind::Exploit, &opts);
        let explore = run(&env, PolicyKind::EpsGreedy { epsilon: 1.0 }, &opts);
        let expected_explore = 0.5; // (0.9 + 0.1) / 2
        assert!((exploit.final_ctr() - 0.9).abs() < 0.05, "{}", exploit.final_ctr());
        assert!(
            (explore.final_ctr() - expected_explore).abs() < 0.05,
            "{}",
            explore.final_ctr()
        );
        assert!(exploit.final_ctr() - explore.final_ctr() >= 0.3);
    }

    #[test]
    fn common_random_numbers_make_zero_epsilon_policies_identical() {
        let env = small_env();
        let opts = short_opts(400, 17);
        let a = run(&env, PolicyKind::Exploit, &opts);
        let b = run(&env, PolicyKind::EpsGreedy { epsilon: 0.0 }, &opts);
        assert_eq!(a.records, b.records);
        assert_eq!(a.series, b.series);
    }

    #[test]
    fn contextual_exploits_exactly_on_critical_situations() {
        let env = small_env();
        let mut cb = env.bootstrap_case_base();
        let mut sc = env.critical_set(2.4).unwrap();
        let out = run_trials(
            &env,
            &PolicyKind::Contextual,
            &mut cb,
            &mut sc,
            &short_opts(500, 23),
        )
        .unwrap();
        for r in &out.records {
            let in_critical = env.in_critical_cluster(&r.situation);
            assert_eq!(
                r.epsilon_used == 0.0,
                in_critical,
                "trial {} used epsilon {} for situation {}",
                r.iteration,
                r.epsilon_used,
                r.situation
            );
        }
        // Every encountered critical-cluster situation was registered.
        let seen_critical: std::collections::HashSet<_> = out
            .records
            .iter()
            .filter(|r| env.in_critical_cluster(&r.situation))
            .map(|r| r.situation.clone())
            .collect();
        let archetype = env.clusters()[0].archetype();
        let newly_registered = seen_critical.iter().filter(|s| *s != archetype).count();
        assert_eq!(sc.len(), 1 + newly_registered);
    }

    #[test]
    fn memoized_nearest_scan_matches_the_module_operation() {
        let env = small_env();
        let mut cb = env.bootstrap_case_base();
        // Grow the case base a little first.
        let mut sc = env.critical_set(2.4).unwrap();
        run_trials(
            &env,
            &PolicyKind::EpsGreedy { epsilon: 0.5 },
            &mut cb,
            &mut sc,
            &short_opts(200, 29),
        )
        .unwrap();

        let mut table = SimTable::new(env.situations().len());
        for current in env.situations() {
            // Twice: first fills the memo, second reads it.
            for _ in 0..2 {
                let (slot, sim) =
                    nearest_in_case_base(&env, &mut table, current, &cb).unwrap();
                let oracle = nearest_past_situation(
                    current,
                    cb.situations(),
                    env.weights(),
                    env.taxonomies(),
                )
                .unwrap();
                assert_eq!(slot, oracle.index);
                assert_eq!(sim, oracle.similarity);
            }
        }
    }

    #[test]
    fn empty_case_base_and_missing_critical_set_are_rejected() {
        let env = small_env();
        let mut cb = CaseBase::new();
        let mut sc = env.critical_set(2.4).unwrap();
        assert!(matches!(
            run_trials(&env, &PolicyKind::Exploit, &mut cb, &mut sc, &short_opts(10, 1)),
            Err(SimulatorError::EmptyCaseBase)
        ));

        let mut cb = env.bootstrap_case_base();
        let mut empty_sc = CriticalSituationSet::new(2.4).unwrap();
        assert!(matches!(
            run_trials(
                &env,
                &PolicyKind::Contextual,
                &mut cb,
                &mut empty_sc,
                &short_opts(10, 1)
            ),
            Err(SimulatorError::MissingCriticalSet)
        ));
    }

    #[test]
    fn comparison_reduces_to_a_single_run_and_reruns_identically() {
        let env = small_env();
        let opts = short_opts(300, 0);
        let roster = vec![PolicyEntry::new("greedy", PolicyKind::EpsGreedy { epsilon: 0.5 })];
        let cmp = compare_policies(&env, &roster, &opts, &[77]).unwrap();
        assert_eq!(cmp.rows.len(), 1);

        let direct = run(&env, PolicyKind::EpsGreedy { epsilon: 0.5 }, &short_opts(300, 77));
        assert_eq!(cmp.rows[0].series, direct.series);
        assert_eq!(cmp.rows[0].final_ctr, direct.final_ctr());

        let again = compare_policies(&env, &roster, &opts, &[77]).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        cmp.write_csv(&mut a).unwrap();
        again.write_csv(&mut b).unwrap();
        assert_eq!(a, b, "rerun must be byte-identical");
    }

    #[test]
    fn comparison_rows_are_ordered_and_csv_is_well_formed() {
        let env = small_env();
        let opts = TrialOptions {
            trials: 200,
            list_size: 2,
            checkpoint_interval: 100,
            seed: 0,
        };
        let roster = vec![
            PolicyEntry::new("zzz", PolicyKind::Exploit),
            PolicyEntry::new("aaa", PolicyKind::EpsGreedy { epsilon: 0.5 }),
        ];
        let cmp = compare_policies(&env, &roster, &opts, &[2, 1]).unwrap();
        let order: Vec<(String, u64)> = cmp
            .rows
            .iter()
            .map(|r| (r.policy.clone(), r.seed))
            .collect();
        assert_eq!(
            order,
            vec![
                ("aaa".into(), 1),
                ("aaa".into(), 2),
                ("zzz".into(), 1),
                ("zzz".into(), 2)
            ]
        );
        let mut csv = Vec::new();
        cmp.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("policy,seed,iteration,avg_ctr"));
        let first = lines.next().unwrap();
        assert!(first.starts_with("aaa,1,100,0."), "{first}");
        assert_eq!(text.lines().count(), 1 + 4 * 2);
    }

    #[test]
    fn full_roster_runs_to_completion() {
        let env = small_env();
        let opts = short_opts(300, 0);
        let roster = vec![
            PolicyEntry::new("exploit", PolicyKind::Exploit),
            PolicyEntry::new("greedy05", PolicyKind::EpsGreedy { epsilon: 0.5 }),
            PolicyEntry::new("greedy09", PolicyKind::EpsGreedy { epsilon: 0.9 }),
            PolicyEntry::new(
                "beginning",
                PolicyKind::EpsBeginning {
                    epsilon: 0.5,
                    total_iterations: 300,
                },
            ),
            PolicyEntry::new(
                "decstep",
                PolicyKind::EpsDecreasingStep {
                    start: 0.99,
                    step: 0.01,
                    period: 100,
                },
            ),
            PolicyEntry::new(
                "eg",
                PolicyKind::ExponentiatedGradient {
                    candidates: crate::policies::EgState::default_candidates(),
                    floor: 0.1,
                    learning_rate: 0.1,
                },
            ),
            PolicyEntry::new("contextual", PolicyKind::Contextual),
        ];
        let cmp = compare_policies(&env, &roster, &opts, &[1, 2]).unwrap();
        assert_eq!(cmp.rows.len(), 14);
        assert_eq!(cmp.policies().len(), 7);
        for row in &cmp.rows {
            assert!((0.0..=1.0).contains(&row.final_ctr));
        }
        let growth: u64 = cmp
            .rows_for("contextual")
            .iter()
            .map(|r| r.critical_growth)
            .sum();
        assert!(growth > 0, "the contextual runs should grow the critical set");
    }
}
