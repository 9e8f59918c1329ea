//! The analysis stages. Each stage reads the artifacts of earlier stages
//! from `<out>/<stage>/` and writes its own next to them.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use cyborg_core::flips::{calibrate, classify_agent, detect_flips, flip_stats, FlipDirection, DELTA_BIN_WIDTH};
use cyborg_core::ingest::{author_set, filter_consistent_agents, window_by_day};
use cyborg_core::network::{
    betweenness_partial, build_comm_graph, compare_groups, eigenvector_centrality, normalize_betweenness,
    total_degree, AgentMetrics, Group,
};
use cyborg_core::rng::derive_seed;
use cyborg_core::scoring::{extract_features, AutomationSources, ReferenceWeights};
use cyborg_core::stance::{
    build_bipartite, propagate_stance, split_by_stance_and_class, PropagationConfig, StanceAssignment, StanceLabel,
    Stratum,
};
use cyborg_core::stats::{class_position, cohort_report};
use cyborg_core::synth::{gen_population, PopulationSpec, CORONAVIRUS_FLIP_TARGETS, ELECTIONS_FLIP_TARGETS};
use cyborg_core::topics::{lda_fit, preprocess, top_terms, LdaConfig, Stopwords};
use cyborg_core::{
    AgentClass, BotLabel, CoreError, CyborgThresholds, Day, FlipStats, PostRecord, ProfileSnapshot, ReferenceScorer,
    ScoreSeries, ScorerContract, Timestamp,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::archive::{self, ArchiveError, ParseReport};
use crate::config::{PipelineConfig, SynthShape};
use crate::error::{CliError, CliResult};
use crate::formats::{self, *};
use crate::timefmt::{format_day, parse_day};

/// Brandes sources per parallel task. Fixed so that the floating-point
/// summation order does not depend on the worker count.
const BETWEENNESS_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Synth,
    Ingest,
    Score,
    Flips,
    Calibrate,
    Classify,
    Network,
    Stance,
    Topics,
    Cohort,
    Report,
}

impl Stage {
    /// Order used by `all`; `synth` only runs there when no input is given.
    pub const ANALYSIS: [Stage; 10] = [
        Stage::Ingest,
        Stage::Score,
        Stage::Flips,
        Stage::Calibrate,
        Stage::Classify,
        Stage::Network,
        Stage::Stance,
        Stage::Topics,
        Stage::Cohort,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Ingest => "ingest",
            Stage::Score => "score",
            Stage::Flips => "flips",
            Stage::Calibrate => "calibrate",
            Stage::Classify => "classify",
            Stage::Network => "network",
            Stage::Stance => "stance",
            Stage::Topics => "topics",
            Stage::Cohort => "cohort",
            Stage::Report => "report",
        }
    }
}

/// Artifact locations under the output directory.
#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Workspace { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, stage: Stage, file: &str) -> PathBuf {
        self.root.join(stage.name()).join(file)
    }

    /// Path of an upstream artifact, or the missing-artifact error.
    pub fn require(&self, stage: Stage, file: &str) -> CliResult<PathBuf> {
        let p = self.path(stage, file);
        if p.is_file() {
            Ok(p)
        } else {
            Err(CliError::MissingArtifact(p))
        }
    }

    fn create(&self, stage: Stage, file: &str) -> CliResult<PathBuf> {
        let p = self.path(stage, file);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::config("output.dir", format!("cannot create {}: {e}", dir.display())))?;
        }
        Ok(p)
    }

    fn write(&self, stage: Stage, file: &str, contents: &str) -> CliResult<()> {
        let p = self.create(stage, file)?;
        fs::write(&p, contents).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", p.display())))
    }

    fn write_json<T: Serialize>(&self, stage: Stage, file: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(stage, file, &text)
    }

    fn write_csv<T: Serialize>(&self, stage: Stage, file: &str, header: &[&str], rows: &[T]) -> CliResult<()> {
        self.write(stage, file, &csv_string(header, rows)?)
    }

    /// Shown in reports: relative to the output directory when inside it,
    /// so reports do not depend on where the tree lives.
    fn display(&self, p: &Path) -> String {
        p.strip_prefix(&self.root).unwrap_or(p).display().to_string()
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let file = File::open(path).map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

fn require_input(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::MissingArtifact(path.to_path_buf()))
    }
}

fn load_posts(ws: &Workspace) -> CliResult<Vec<PostRecord>> {
    let path = ws.require(Stage::Ingest, "posts.jsonl")?;
    let (posts, _) = archive::read_archive_file(&path).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
    Ok(posts)
}

fn load_flip_rows(ws: &Workspace, stage: Stage, file: &str) -> CliResult<Vec<FlipRow>> {
    Ok(read_csv(&ws.require(stage, file)?)?)
}

fn load_classes(ws: &Workspace) -> CliResult<BTreeMap<String, AgentClass>> {
    load_flip_rows(ws, Stage::Classify, "flips.csv")?
        .into_iter()
        .map(|r| match r.agent_class() {
            Some(c) => Ok((r.agent_id, c)),
            None => Err(CliError::runtime(format!("classify/flips.csv: agent {} has no valid class", r.agent_id))),
        })
        .collect()
}

/// Most recent profile snapshot of every author.
fn latest_profiles(posts: &[PostRecord]) -> BTreeMap<String, ProfileSnapshot> {
    let mut latest: BTreeMap<&str, &PostRecord> = BTreeMap::new();
    for p in posts {
        let slot = latest.entry(&p.author_id).or_insert(p);
        if (p.created_at, &p.post_id) >= (slot.created_at, &slot.post_id) {
            *slot = p;
        }
    }
    latest.into_iter().map(|(a, p)| (a.to_string(), p.author_profile.clone())).collect()
}

fn class_counts<'a, I: IntoIterator<Item = &'a AgentClass>>(classes: I) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> = AgentClass::ALL.iter().map(|c| (c.as_str().to_string(), 0)).collect();
    for c in classes {
        *counts.entry(c.as_str().to_string()).or_default() += 1;
    }
    counts
}

fn progress(stage: Stage, message: impl std::fmt::Display) {
    eprintln!("[{}] {message}", stage.name());
}

pub struct Pipeline {
    pub config: PipelineConfig,
    pub ws: Workspace,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Self {
        let ws = Workspace::new(config.output.dir.clone());
        Pipeline { config, ws }
    }

    pub fn run(&mut self, stage: Stage) -> CliResult<()> {
        match stage {
            Stage::Synth => self.synth().map(|_| ()),
            Stage::Ingest => self.ingest(),
            Stage::Score => self.score(),
            Stage::Flips => self.flips(),
            Stage::Calibrate => self.calibrate(),
            Stage::Classify => self.classify(),
            Stage::Network => self.network(),
            Stage::Stance => self.stance(),
            Stage::Topics => self.topics(),
            Stage::Cohort => self.cohort(),
            Stage::Report => self.report(),
        }
    }

    /// Every stage in order. Without input archives a synthetic population
    /// is generated first and used as input, suspension list and ground
    /// truth.
    pub fn run_all(&mut self) -> CliResult<()> {
        if self.config.input.paths.is_empty() {
            let manifest = self.synth()?;
            let c = &mut self.config;
            c.input.paths = vec![self.ws.path(Stage::Synth, "archive.jsonl")];
            c.input.suspensions.get_or_insert_with(|| self.ws.path(Stage::Synth, "suspensions.csv"));
            c.input.ground_truth.get_or_insert_with(|| self.ws.path(Stage::Synth, "ground_truth.csv"));
            c.cohort.analysis_date.get_or_insert(manifest.analysis_date);
        }
        for stage in Stage::ANALYSIS {
            self.run(stage)?;
        }
        Ok(())
    }

    fn synth(&self) -> CliResult<SynthManifest> {
        let c = &self.config;
        let targets = match c.synth.shape {
            SynthShape::Coronavirus => CORONAVIRUS_FLIP_TARGETS,
            SynthShape::Elections => ELECTIONS_FLIP_TARGETS,
        };
        let mut spec = PopulationSpec::from_flip_targets(c.synth.agents, targets, c.run.seed);
        spec.degree_inflation = c.synth.degree_inflation;
        spec.thresholds = c.thresholds.thresholds();
        let pop = gen_population(&spec).map_err(|e| match e {
            CoreError::Infeasible(_) | CoreError::OutOfRange { .. } => {
                CliError::config("thresholds", format!("synthetic population cannot be built: {e}"))
            }
            other => other.into(),
        })?;

        let path = self.ws.create(Stage::Synth, "archive.jsonl")?;
        let file = File::create(&path).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
        archive::write_archive(&pop.posts, BufWriter::new(file))?;

        let truth: Vec<GroundTruthRow> = pop
            .truth()
            .map(|t| GroundTruthRow {
                agent_id: t.agent_id.clone(),
                class: t.class.as_str().to_string(),
                true_flips: t.true_flips,
                true_mean_delta: t.true_mean_delta,
            })
            .collect();
        self.ws.write_csv(Stage::Synth, "ground_truth.csv", &GROUND_TRUTH_HEADER, &truth)?;
        let suspensions: Vec<SuspensionRow> = pop
            .truth()
            .map(|t| SuspensionRow { agent_id: t.agent_id.clone(), suspended: t.suspended })
            .collect();
        self.ws.write_csv(Stage::Synth, "suspensions.csv", &SUSPENSION_HEADER, &suspensions)?;

        let manifest = SynthManifest {
            seed: c.run.seed,
            agents: spec.total_agents(),
            shape: c.synth.shape,
            start_day: format_day(spec.start_day),
            days: spec.days,
            analysis_date: format_day(pop.analysis_date.day()),
            degree_inflation: spec.degree_inflation,
            classes: class_counts(pop.truth().map(|t| &t.class)),
            posts: pop.posts.len(),
        };
        self.ws.write_json(Stage::Synth, "manifest.json", &manifest)?;
        progress(Stage::Synth, format!("{} agents, {} posts", manifest.agents, manifest.posts));
        Ok(manifest)
    }

    fn ingest(&self) -> CliResult<()> {
        let paths = &self.config.input.paths;
        if paths.is_empty() {
            return Err(CliError::config("input.paths", "no input archives given"));
        }
        for p in paths {
            require_input(p)?;
        }
        let mut snapshots = Vec::new();
        let mut inputs = Vec::new();
        let mut all_posts = Vec::new();
        for (path, result) in paths.iter().zip(archive::read_archive_files(paths)) {
            let (posts, report) = result.map_err(|e| match e {
                ArchiveError::WrongFormat { .. } => CliError::runtime(format!("{}: {e}", path.display())),
                ArchiveError::Io(io) => CliError::runtime(format!("cannot read {}: {io}", path.display())),
            })?;
            let authors = author_set(&posts);
            inputs.push(InputReport { path: self.ws.display(path), agents: authors.len(), report });
            snapshots.push(authors);
            all_posts.push(posts);
        }
        let consistent = filter_consistent_agents(&snapshots)?;
        let mut posts: Vec<PostRecord> =
            all_posts.into_iter().flatten().filter(|p| consistent.contains(&p.author_id)).collect();
        posts.sort_by(|a, b| (a.created_at, &a.post_id).cmp(&(b.created_at, &b.post_id)));

        let path = self.ws.create(Stage::Ingest, "posts.jsonl")?;
        let file = File::create(&path).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
        archive::write_archive(&posts, BufWriter::new(file))?;
        let report = IngestReport { inputs, consistent_agents: consistent.len(), posts: posts.len() };
        self.ws.write_json(Stage::Ingest, "report.json", &report)?;
        progress(Stage::Ingest, format!("{} posts from {} consistent agents", report.posts, report.consistent_agents));
        Ok(())
    }

    fn scorer(&self) -> CliResult<ReferenceScorer> {
        let weights = match &self.config.scoring.weights {
            None => ReferenceWeights::default(),
            Some(p) => {
                require_input(p)?;
                let text = fs::read_to_string(p)?;
                parse_weights(&p.display().to_string(), &text)
                    .map_err(|e| CliError::config("scoring.weights", e.to_string()))?
            }
        };
        Ok(ReferenceScorer::new(weights))
    }

    fn score(&self) -> CliResult<()> {
        if let Some(external) = &self.config.scoring.external_scores {
            return self.import_scores(external);
        }
        let scorer = self.scorer()?;
        let automation = AutomationSources::new(self.config.scoring.automation_sources.iter().cloned());
        let posts = load_posts(&self.ws)?;
        let agents: Vec<_> = window_by_day(posts).into_iter().collect();
        let per_agent: Vec<(Vec<DailyScoreRow>, Vec<FeatureRow>)> = agents
            .par_iter()
            .map(|(agent, windows)| {
                let mut scores = Vec::with_capacity(windows.len());
                let mut features = Vec::with_capacity(windows.len());
                for w in windows {
                    let f = extract_features(w, &automation);
                    let day = format_day(w.day);
                    scores.push(DailyScoreRow {
                        agent_id: agent.clone(),
                        day: day.clone(),
                        probability: cyborg_core::scoring::score(&f, &scorer),
                        scorer_id: scorer.scorer_id().to_string(),
                    });
                    features.push(FeatureRow::new(agent, day, &f));
                }
                (scores, features)
            })
            .collect();
        let (scores, features): (Vec<_>, Vec<_>) = per_agent.into_iter().unzip();
        let scores: Vec<DailyScoreRow> = scores.into_iter().flatten().collect();
        let features: Vec<FeatureRow> = features.into_iter().flatten().collect();
        self.ws.write_csv(Stage::Score, "daily_scores.csv", &DAILY_SCORE_HEADER, &scores)?;
        self.ws.write_csv(Stage::Score, "features.csv", &FEATURE_HEADER, &features)?;
        progress(Stage::Score, format!("{} agents, {} agent-days", agents.len(), scores.len()));
        Ok(())
    }

    fn import_scores(&self, path: &Path) -> CliResult<()> {
        require_input(path)?;
        let rows: Vec<ExternalScoreRow> = read_csv(path)?;
        let mut out: BTreeMap<(String, Day), DailyScoreRow> = BTreeMap::new();
        for r in rows {
            let day = parse_day(&r.day)
                .ok_or_else(|| CliError::runtime(format!("{}: bad day {:?}", path.display(), r.day)))?;
            if !(0.0..=1.0).contains(&r.probability) {
                return Err(CliError::runtime(format!(
                    "{}: probability {} for {} outside [0, 1]",
                    path.display(),
                    r.probability,
                    r.agent_id
                )));
            }
            let row = DailyScoreRow {
                agent_id: r.agent_id.clone(),
                day: format_day(day),
                probability: r.probability,
                scorer_id: r.scorer_id.unwrap_or_else(|| "external".to_string()),
            };
            if out.insert((r.agent_id.clone(), day), row).is_some() {
                return Err(CliError::runtime(format!("{}: two scores for {} on {}", path.display(), r.agent_id, r.day)));
            }
        }
        let rows: Vec<DailyScoreRow> = out.into_values().collect();
        self.ws.write_csv(Stage::Score, "daily_scores.csv", &DAILY_SCORE_HEADER, &rows)?;
        self.ws.write_csv::<FeatureRow>(Stage::Score, "features.csv", &FEATURE_HEADER, &[])?;
        progress(Stage::Score, format!("imported {} agent-days", rows.len()));
        Ok(())
    }

    fn load_series(&self) -> CliResult<Vec<ScoreSeries>> {
        let path = self.ws.require(Stage::Score, "daily_scores.csv")?;
        let rows: Vec<DailyScoreRow> = read_csv(&path)?;
        let mut grouped: BTreeMap<String, Vec<(Day, f64)>> = BTreeMap::new();
        for r in rows {
            let day = parse_day(&r.day)
                .ok_or_else(|| CliError::runtime(format!("{}: bad day {:?}", path.display(), r.day)))?;
            grouped.entry(r.agent_id).or_default().push((day, r.probability));
        }
        grouped
            .into_iter()
            .map(|(agent, mut obs)| {
                obs.sort_by_key(|o| o.0);
                Ok(ScoreSeries::new(agent, obs)?)
            })
            .collect()
    }

    fn flips(&self) -> CliResult<()> {
        let bot_threshold = self.config.thresholds.bot_threshold;
        let series = self.load_series()?;
        let results: Vec<(FlipRow, Vec<EventRow>)> = series
            .par_iter()
            .map(|s| {
                let events = detect_flips(s, bot_threshold);
                let stats = flip_stats(s, &events);
                let rows = events
                    .iter()
                    .map(|e| EventRow {
                        agent_id: s.agent_id.clone(),
                        from_day: format_day(e.from_day),
                        to_day: format_day(e.to_day),
                        direction: match e.direction {
                            FlipDirection::BotToHuman => "bot_to_human",
                            FlipDirection::HumanToBot => "human_to_bot",
                        },
                        abs_delta: e.abs_delta,
                    })
                    .collect();
                (FlipRow::new(&stats, None), rows)
            })
            .collect();
        let (stats, events): (Vec<FlipRow>, Vec<Vec<EventRow>>) = results.into_iter().unzip();
        let events: Vec<EventRow> = events.into_iter().flatten().collect();
        self.ws.write_csv(Stage::Flips, "flip_stats.csv", &FLIP_STATS_HEADER, &stats)?;
        self.ws.write_csv(Stage::Flips, "events.csv", &EVENT_HEADER, &events)?;
        self.ws.write_json(Stage::Flips, "params.json", &FlipParams { bot_threshold })?;
        progress(Stage::Flips, format!("{} agents, {} flips", stats.len(), events.len()));
        Ok(())
    }

    fn flip_stats(&self) -> CliResult<Vec<FlipStats>> {
        Ok(load_flip_rows(&self.ws, Stage::Flips, "flip_stats.csv")?.iter().map(FlipRow::stats).collect())
    }

    fn calibrate(&self) -> CliResult<()> {
        let stats = self.flip_stats()?;
        let percentile = self.config.thresholds.percentile;
        let cal = calibrate(&stats, percentile)?;
        let file = CalibrationFile {
            percentile,
            population: "agents with at least one flip".to_string(),
            agents: stats.len(),
            flipping_agents: cal.flip_table.population,
            flip_table: cal.flip_table.rows.iter().map(|&(n, c)| CumulativeRow { n_flips: n, cumulative: c }).collect(),
            delta_histogram: cal
                .delta_histogram
                .counts
                .iter()
                .enumerate()
                .map(|(k, &count)| HistogramRow::new(k, count))
                .collect(),
            flips_at_percentile: cal.flips_at_percentile,
            delta_at_percentile: cal.delta_at_percentile,
            min_flips: cal.min_flips,
            min_mean_delta: cal.min_mean_delta,
        };
        self.ws.write_json(Stage::Calibrate, "calibration.json", &file)?;
        progress(
            Stage::Calibrate,
            format!("min_flips {}, min_mean_delta {} at the {percentile}th percentile", file.min_flips, file.min_mean_delta),
        );
        Ok(())
    }

    fn thresholds(&self) -> CliResult<(CyborgThresholds, &'static str)> {
        let mut t = self.config.thresholds.thresholds();
        if !self.config.thresholds.use_calibration {
            return Ok((t, "config"));
        }
        let cal: CalibrationFile = read_json(&self.ws.require(Stage::Calibrate, "calibration.json")?)?;
        t.min_flips = cal.min_flips.max(1);
        t.min_mean_delta = cal.min_mean_delta;
        Ok((t, "calibration"))
    }

    fn classify(&self) -> CliResult<()> {
        let rows = load_flip_rows(&self.ws, Stage::Flips, "flip_stats.csv")?;
        let params: FlipParams = read_json(&self.ws.require(Stage::Flips, "params.json")?)?;
        let (thresholds, source) = self.thresholds()?;
        if params.bot_threshold != thresholds.bot_threshold {
            return Err(CliError::runtime(format!(
                "flips were computed at bot threshold {}, configuration says {}; rerun flips",
                params.bot_threshold, thresholds.bot_threshold
            )));
        }
        let series: BTreeMap<String, ScoreSeries> =
            self.load_series()?.into_iter().map(|s| (s.agent_id.clone(), s)).collect();
        let mut out = Vec::with_capacity(rows.len());
        for r in rows {
            let labels: Vec<BotLabel> = series
                .get(&r.agent_id)
                .map(|s| s.labels(thresholds.bot_threshold))
                .ok_or_else(|| CliError::runtime(format!("no daily scores for agent {}", r.agent_id)))?;
            let class = classify_agent(&r.stats(), &thresholds, &labels);
            out.push(FlipRow { class: Some(class.as_str().to_string()), ..r });
        }
        self.ws.write_csv(Stage::Classify, "flips.csv", &FLIPS_HEADER, &out)?;
        let counts = class_counts(out.iter().filter_map(|r| r.agent_class()).collect::<Vec<_>>().iter());
        self.ws.write_json(
            Stage::Classify,
            "thresholds.json",
            &ThresholdsFile {
                source: source.to_string(),
                bot_threshold: thresholds.bot_threshold,
                min_flips: thresholds.min_flips,
                min_mean_delta: thresholds.min_mean_delta,
                classes: counts.clone(),
            },
        )?;
        progress(Stage::Classify, format!("{counts:?}"));
        Ok(())
    }

    fn network(&self) -> CliResult<()> {
        let posts = load_posts(&self.ws)?;
        let classes = load_classes(&self.ws)?;
        let graph = build_comm_graph(&posts);
        let n = graph.node_count();

        let starts: Vec<usize> = (0..n).step_by(BETWEENNESS_CHUNK).collect();
        let partials: Vec<Vec<f64>> = starts
            .par_iter()
            .map(|&s| betweenness_partial(&graph, s..(s + BETWEENNESS_CHUNK).min(n)))
            .collect();
        let mut raw = vec![0.0; n];
        for part in &partials {
            for (acc, x) in raw.iter_mut().zip(part) {
                *acc += x;
            }
        }
        let betweenness = normalize_betweenness(raw);
        let degree = total_degree(&graph);
        let eigen = if n == 0 {
            None
        } else {
            let net = &self.config.network;
            Some(eigenvector_centrality(&graph, net.eigen_tol, net.eigen_max_iter)?)
        };

        let mut retweets: BTreeMap<&str, f64> = BTreeMap::new();
        for p in &posts {
            if let Some(t) = &p.retweet_of {
                *retweets.entry(t.as_str()).or_default() += 1.0;
            }
        }
        let profiles = latest_profiles(&posts);
        let mut metrics = BTreeMap::new();
        let mut rows = Vec::new();
        for (agent, &class) in &classes {
            let idx = graph.index_of(agent);
            let at = |v: &[f64]| idx.map_or(0.0, |i| v[i]);
            let profile = profiles.get(agent).cloned().unwrap_or_default();
            let m = AgentMetrics {
                verified: profile.is_verified,
                retweets: retweets.get(agent.as_str()).copied().unwrap_or(0.0),
                followers: profile.followers_count as f64,
                friends: profile.friends_count as f64,
                betweenness: at(&betweenness),
                eigenvector: eigen.as_ref().map_or(0.0, |e| at(&e.scores)),
                total_degree: at(&degree),
            };
            rows.push(CentralityRow {
                agent_id: agent.clone(),
                class: class.as_str(),
                betweenness: m.betweenness,
                eigenvector: m.eigenvector,
                total_degree: m.total_degree,
            });
            metrics.insert(agent.clone(), m);
        }
        self.ws.write_csv(Stage::Network, "centrality.csv", &CENTRALITY_HEADER, &rows)?;

        let comparison: Vec<ComparisonCsvRow> = compare_groups(&metrics, &classes)?
            .into_iter()
            .map(|r| ComparisonCsvRow {
                metric: r.metric.to_string(),
                cyborgs: r.cyborg_mean,
                non_cyborgs: r.non_cyborg_mean,
                t: r.t,
                p_value: r.p_value,
                higher: match r.higher {
                    Some(Group::Cyborg) => "cyborgs".to_string(),
                    Some(Group::NonCyborg) => "non_cyborgs".to_string(),
                    None => String::new(),
                },
            })
            .collect();
        self.ws.write_csv(Stage::Network, "group_comparison.csv", &COMPARISON_HEADER, &comparison)?;
        let summary = NetworkSummary {
            nodes: n,
            edges: graph.edge_count(),
            eigen_iterations: eigen.as_ref().map_or(0, |e| e.iterations),
            eigenvalue: eigen.as_ref().map_or(0.0, |e| e.eigenvalue),
            eigen_residual: eigen.as_ref().map_or(0.0, |e| e.residual),
            eigen_component_size: eigen.as_ref().map_or(0, |e| e.component_size),
            eigen_largest_component_only: eigen.as_ref().is_some_and(|e| e.disconnected),
        };
        self.ws.write_json(Stage::Network, "summary.json", &summary)?;
        progress(Stage::Network, format!("{} nodes, {} edges", summary.nodes, summary.edges));
        Ok(())
    }

    fn stance(&self) -> CliResult<()> {
        let c = &self.config.stance;
        let lexicon = formats::load_lexicon(&c.lexicon).map_err(|e| match e {
            FormatError::Io { .. } => CliError::MissingArtifact(PathBuf::from(&c.lexicon)),
            other => CliError::config("stance.lexicon", other.to_string()),
        })?;
        let posts = load_posts(&self.ws)?;
        let classes = load_classes(&self.ws)?;
        let graph = build_bipartite(&posts);
        let config = PropagationConfig { max_iter: c.max_iter, tol: c.tol, neutral_band: c.neutral_band };
        let result = propagate_stance(&graph, &lexicon, &config);

        let users: Vec<StanceRow> = result
            .users
            .iter()
            .map(|(id, a)| StanceRow { id: id.clone(), score: a.score, label: a.label.as_str(), seed: "" })
            .collect();
        let hashtags: Vec<StanceRow> = result
            .hashtags
            .iter()
            .map(|(id, a)| StanceRow {
                id: id.clone(),
                score: a.score,
                label: a.label.as_str(),
                seed: if lexicon.pro.contains(id) {
                    "pro"
                } else if lexicon.anti.contains(id) {
                    "anti"
                } else {
                    ""
                },
            })
            .collect();
        self.ws.write_csv(Stage::Stance, "users.csv", &["agent_id", "score", "label", "seed"], &users)?;
        self.ws.write_csv(Stage::Stance, "hashtags.csv", &["hashtag", "score", "label", "seed"], &hashtags)?;

        let strata = split_by_stance_and_class(&posts, &result.users, &classes);
        let mut labels: BTreeMap<String, usize> = [StanceLabel::Pro, StanceLabel::Anti, StanceLabel::Neutral]
            .iter()
            .map(|l| (l.as_str().to_string(), 0))
            .collect();
        for a in result.users.values() {
            *labels.entry(a.label.as_str().to_string()).or_default() += 1;
        }
        let summary = StanceSummary {
            lexicon: lexicon.name.clone(),
            iterations: result.iterations,
            residual: result.residual,
            converged: result.converged,
            users: labels,
            unused_seeds: result.unused_seeds.clone(),
            strata: Stratum::ALL
                .iter()
                .zip(&strata)
                .map(|(s, posts)| {
                    let agents: BTreeSet<&str> = posts.iter().map(|p| p.author_id.as_str()).collect();
                    (s.as_str().to_string(), StratumSize { agents: agents.len(), posts: posts.len() })
                })
                .collect(),
        };
        self.ws.write_json(Stage::Stance, "summary.json", &summary)?;
        progress(
            Stage::Stance,
            format!("{} iterations, residual {:e}, converged {}", summary.iterations, summary.residual, summary.converged),
        );
        Ok(())
    }

    fn topics(&self) -> CliResult<()> {
        let c = &self.config.topics;
        let stopwords = match &c.stopwords {
            None => Stopwords::builtin(),
            Some(p) => {
                require_input(p)?;
                Stopwords::from_text(&fs::read_to_string(p)?)
            }
        };
        let posts = load_posts(&self.ws)?;
        let classes = load_classes(&self.ws)?;
        let users: Vec<StanceCsvRow> = read_csv(&self.ws.require(Stage::Stance, "users.csv")?)?;
        let assignments: BTreeMap<String, StanceAssignment> = users
            .into_iter()
            .map(|r| {
                let label = StanceLabel::parse(&r.label)
                    .ok_or_else(|| CliError::runtime(format!("stance/users.csv: bad label {:?}", r.label)))?;
                Ok((r.agent_id, StanceAssignment { score: r.score, label }))
            })
            .collect::<CliResult<_>>()?;
        let strata = split_by_stance_and_class(&posts, &assignments, &classes);
        let seed = self.config.run.seed;
        let files: Vec<TopicsFile> = Stratum::ALL
            .par_iter()
            .zip(strata.par_iter())
            .enumerate()
            .map(|(i, (stratum, posts))| {
                let corpus = preprocess(posts.iter().map(|p| p.text.as_str()), &stopwords);
                let config = LdaConfig {
                    topics: c.k,
                    alpha: c.alpha,
                    beta: c.beta,
                    iterations: c.iterations,
                    seed: derive_seed(seed, i as u64 + 1),
                };
                let mut file = TopicsFile {
                    stratum: stratum.as_str().to_string(),
                    documents: corpus.documents.len(),
                    tokens: corpus.token_count(),
                    vocabulary: corpus.vocabulary.len(),
                    k: c.k,
                    alpha: config.alpha(),
                    beta: c.beta,
                    iterations: c.iterations,
                    seed: config.seed,
                    skipped: None,
                    topics: Vec::new(),
                };
                match lda_fit(&corpus, &config) {
                    Ok(model) => {
                        file.topics = (0..model.topics)
                            .map(|t| TopicTerms {
                                topic: t,
                                terms: top_terms(&model, t, c.top_n)
                                    .into_iter()
                                    .map(|(term, probability)| TermWeight { term, probability })
                                    .collect(),
                            })
                            .collect();
                    }
                    Err(e) => file.skipped = Some(e.to_string()),
                }
                file
            })
            .collect();
        for f in &files {
            self.ws.write_json(Stage::Topics, &format!("topics_{}.json", f.stratum), f)?;
        }
        progress(
            Stage::Topics,
            files.iter().map(|f| format!("{}: {} docs", f.stratum, f.documents)).collect::<Vec<_>>().join(", "),
        );
        Ok(())
    }

    fn analysis_date(&self, posts: &[PostRecord]) -> Timestamp {
        match self.config.cohort.analysis_date.as_deref().and_then(parse_day) {
            Some(d) => d.start(),
            None => posts.iter().map(|p| p.created_at.day().succ().start()).max().unwrap_or_default(),
        }
    }

    fn cohort(&self) -> CliResult<()> {
        let classes = load_classes(&self.ws)?;
        let posts = load_posts(&self.ws)?;
        let mut profiles = latest_profiles(&posts);
        if let Some(path) = &self.config.input.suspensions {
            require_input(path)?;
            let rows: Vec<SuspensionRow> = read_csv(path)?;
            for r in rows {
                if let Some(p) = profiles.get_mut(&r.agent_id) {
                    p.is_suspended = Some(r.suspended);
                }
            }
        }
        let date = self.analysis_date(&posts);
        let report = cohort_report(&profiles, &classes, date);
        let anova_p = report.anova.as_ref().ok().map(|a| a.p_value);
        let rows: Vec<CohortCsvRow> = report
            .rows
            .iter()
            .map(|r| CohortCsvRow {
                class: r.class.as_str().to_string(),
                n: r.n,
                n_suspended: r.n_suspended,
                prop_suspended: r.prop_suspended,
                n_alive: r.n_alive,
                mean_lifespan_days: r.mean_lifespan_days,
                stddev_lifespan_days: r.stddev_lifespan_days,
                anova_p,
            })
            .collect();
        self.ws.write_csv(Stage::Cohort, "cohort.csv", &COHORT_HEADER, &rows)?;
        let points = regression_points(&report);
        self.ws.write_csv(Stage::Cohort, "regression_points.csv", &POINTS_HEADER, &points)?;
        let stats = CohortStats {
            analysis_date: format_day(date.day()),
            class_encoding: AgentClass::ALL.iter().map(|&c| (c.as_str().to_string(), class_position(c))).collect(),
            anova: report.anova.as_ref().ok().map(|a| AnovaJson {
                f: a.f,
                df_between: a.df_between,
                df_within: a.df_within,
                p_value: a.p_value,
            }),
            anova_error: report.anova.as_ref().err().cloned(),
            slope: report.fit.as_ref().ok().map(|f| f.slope),
            intercept: report.fit.as_ref().ok().map(|f| f.intercept),
            fit_error: report.fit.as_ref().err().cloned(),
        };
        self.ws.write_json(Stage::Cohort, "anova.json", &stats)?;
        progress(Stage::Cohort, format!("analysis date {}, ANOVA p {:?}", stats.analysis_date, anova_p));
        Ok(())
    }

    fn report(&self) -> CliResult<()> {
        let cal: CalibrationFile = read_json(&self.ws.require(Stage::Calibrate, "calibration.json")?)?;
        let flips = load_flip_rows(&self.ws, Stage::Classify, "flips.csv")?;
        let thresholds: ThresholdsFile = read_json(&self.ws.require(Stage::Classify, "thresholds.json")?)?;
        let cohort: Vec<CohortCsvRow> = read_csv(&self.ws.require(Stage::Cohort, "cohort.csv")?)?;
        let cohort_stats: CohortStats = read_json(&self.ws.require(Stage::Cohort, "anova.json")?)?;
        let points: Vec<PointRow> = read_csv(&self.ws.require(Stage::Cohort, "regression_points.csv")?)?;

        let max_flips = flips.iter().map(|r| r.n_flips).max().unwrap_or(0);
        let mut by_count = vec![0usize; max_flips as usize + 1];
        for r in &flips {
            by_count[r.n_flips as usize] += 1;
        }
        let flipping: usize = by_count.iter().skip(1).sum();
        let mut running = 0;
        let fig1: Vec<Fig1Row> = by_count
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, &agents)| {
                running += agents;
                let share = |x: usize| if flipping == 0 { 0.0 } else { x as f64 / flipping as f64 };
                Fig1Row { n_flips: n as u32, agents, proportion: share(agents), cumulative: share(running) }
            })
            .collect();
        self.ws.write_csv(Stage::Report, "fig1_flip_proportions.csv", &["n_flips", "agents", "proportion", "cumulative"], &fig1)?;
        self.ws.write_csv(Stage::Report, "fig2_delta_histogram.csv", &["bin_lo", "bin_hi", "agents"], &cal.delta_histogram)?;

        let fig3: Vec<Fig3Row> = AgentClass::ALL
            .iter()
            .map(|&class| {
                let mut v: Vec<f64> =
                    flips.iter().filter(|r| r.agent_class() == Some(class)).map(|r| r.score_stddev).collect();
                v.sort_by(f64::total_cmp);
                Fig3Row::new(class, &v)
            })
            .collect();
        self.ws.write_csv(Stage::Report, "fig3_score_stddev.csv", &["class", "agents", "mean", "sd", "median"], &fig3)?;
        self.ws.write_csv(Stage::Report, "longevity_points.csv", &POINTS_HEADER, &points)?;

        let ground_truth = match &self.config.input.ground_truth {
            None => None,
            Some(path) => {
                require_input(path)?;
                let truth: Vec<GroundTruthRow> = read_csv(path)?;
                let got: BTreeMap<&str, &str> =
                    flips.iter().map(|r| (r.agent_id.as_str(), r.class.as_deref().unwrap_or(""))).collect();
                let mut mismatches = Vec::new();
                let mut missing = 0;
                for t in &truth {
                    match got.get(t.agent_id.as_str()) {
                        None => missing += 1,
                        Some(&c) if c != t.class => mismatches.push(MismatchRow {
                            agent_id: t.agent_id.clone(),
                            expected: t.class.clone(),
                            actual: c.to_string(),
                        }),
                        Some(_) => {}
                    }
                }
                self.ws.write_csv(
                    Stage::Report,
                    "ground_truth_mismatches.csv",
                    &["agent_id", "expected", "actual"],
                    &mismatches,
                )?;
                Some(GroundTruthSummary {
                    agents: truth.len(),
                    compared: truth.len() - missing,
                    missing,
                    mismatches: mismatches.len(),
                })
            }
        };

        let optional_csv = |stage, file| -> CliResult<Option<Vec<ComparisonCsvRow>>> {
            let p = self.ws.path(stage, file);
            if p.is_file() {
                Ok(Some(read_csv(&p)?))
            } else {
                Ok(None)
            }
        };
        let stance_path = self.ws.path(Stage::Stance, "summary.json");
        let summary = ReportSummary {
            agents: flips.len(),
            classes: class_counts(flips.iter().filter_map(|r| r.agent_class()).collect::<Vec<_>>().iter()),
            thresholds,
            calibration: CalibrationSummary {
                percentile: cal.percentile,
                population: cal.population.clone(),
                flipping_agents: cal.flipping_agents,
                flips_at_percentile: cal.flips_at_percentile,
                delta_at_percentile: cal.delta_at_percentile,
                min_flips: cal.min_flips,
                min_mean_delta: cal.min_mean_delta,
                delta_mode_bin: cal
                    .delta_histogram
                    .iter()
                    .fold(None::<&HistogramRow>, |best, r| match best {
                        Some(b) if b.agents >= r.agents => Some(b),
                        _ => Some(r),
                    })
                    .map(|r| [r.bin_lo, r.bin_hi]),
            },
            alternation_violations: flips.iter().filter(|r| r.n_b2h.abs_diff(r.n_h2b) > 1).count(),
            cohort,
            cohort_stats,
            network: optional_csv(Stage::Network, "group_comparison.csv")?,
            stance: if stance_path.is_file() { Some(read_json(&stance_path)?) } else { None },
            ground_truth,
        };
        self.ws.write_json(Stage::Report, "summary.json", &summary)?;
        progress(Stage::Report, format!("{} agents, classes {:?}", summary.agents, summary.classes));
        Ok(())
    }
}

fn regression_points(report: &cyborg_core::stats::CohortReport) -> Vec<PointRow> {
    report
        .rows
        .iter()
        .filter_map(|r| {
            r.mean_lifespan_days.map(|m| PointRow {
                class: r.class.as_str().to_string(),
                x: class_position(r.class),
                mean_lifespan_days: m,
                fitted: report.fit.as_ref().ok().map(|f| f.predict(class_position(r.class))),
            })
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SynthManifest {
    pub seed: u64,
    pub agents: usize,
    pub shape: SynthShape,
    pub start_day: String,
    pub days: u32,
    pub analysis_date: String,
    pub degree_inflation: f64,
    pub classes: BTreeMap<String, usize>,
    pub posts: usize,
}

#[derive(Debug, Serialize)]
struct InputReport {
    path: String,
    agents: usize,
    #[serde(flatten)]
    report: ParseReport,
}

#[derive(Debug, Serialize)]
struct IngestReport {
    inputs: Vec<InputReport>,
    consistent_agents: usize,
    posts: usize,
}

#[derive(Debug, Serialize)]
struct FeatureRow {
    agent_id: String,
    day: String,
    account_age_days: f64,
    followers: u64,
    friends: u64,
    statuses: u64,
    follower_friend_ratio: f64,
    posts_today: u64,
    mean_interpost_gap_seconds: f64,
    gap_coefficient_of_variation: f64,
    distinct_sources: u64,
    automation_source_fraction: f64,
    retweet_fraction: f64,
    hashtags_per_post: f64,
}

const FEATURE_HEADER: [&str; 14] = [
    "agent_id",
    "day",
    "account_age_days",
    "followers",
    "friends",
    "statuses",
    "follower_friend_ratio",
    "posts_today",
    "mean_interpost_gap_seconds",
    "gap_coefficient_of_variation",
    "distinct_sources",
    "automation_source_fraction",
    "retweet_fraction",
    "hashtags_per_post",
];

impl FeatureRow {
    fn new(agent: &str, day: String, f: &cyborg_core::FeatureVector) -> Self {
        FeatureRow {
            agent_id: agent.to_string(),
            day,
            account_age_days: f.account_age_days,
            followers: f.followers,
            friends: f.friends,
            statuses: f.statuses,
            follower_friend_ratio: f.follower_friend_ratio,
            posts_today: f.posts_today,
            mean_interpost_gap_seconds: f.mean_interpost_gap_seconds,
            gap_coefficient_of_variation: f.gap_coefficient_of_variation,
            distinct_sources: f.distinct_sources,
            automation_source_fraction: f.automation_source_fraction,
            retweet_fraction: f.retweet_fraction,
            hashtags_per_post: f.hashtags_per_post,
        }
    }
}

#[derive(Debug, Serialize)]
struct EventRow {
    agent_id: String,
    from_day: String,
    to_day: String,
    direction: &'static str,
    abs_delta: f64,
}

const EVENT_HEADER: [&str; 5] = ["agent_id", "from_day", "to_day", "direction", "abs_delta"];

#[derive(Debug, Serialize, Deserialize)]
struct FlipParams {
    bot_threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CumulativeRow {
    pub n_flips: u32,
    pub cumulative: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub agents: usize,
}

impl HistogramRow {
    fn new(k: usize, agents: usize) -> Self {
        let (lo, hi) = cyborg_core::flips::DeltaHistogram::bin_range(k);
        debug_assert!((hi - lo - DELTA_BIN_WIDTH).abs() < 1e-12);
        HistogramRow { bin_lo: lo, bin_hi: hi, agents }
    }
}

/// `calibrate/calibration.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub percentile: f64,
    pub population: String,
    pub agents: usize,
    pub flipping_agents: usize,
    pub flip_table: Vec<CumulativeRow>,
    pub delta_histogram: Vec<HistogramRow>,
    pub flips_at_percentile: f64,
    pub delta_at_percentile: f64,
    pub min_flips: u32,
    pub min_mean_delta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdsFile {
    pub source: String,
    pub bot_threshold: f64,
    pub min_flips: u32,
    pub min_mean_delta: f64,
    pub classes: BTreeMap<String, usize>,
}

#[derive(Debug, Serialize)]
struct CentralityRow {
    agent_id: String,
    class: &'static str,
    betweenness: f64,
    eigenvector: f64,
    total_degree: f64,
}

const CENTRALITY_HEADER: [&str; 5] = ["agent_id", "class", "betweenness", "eigenvector", "total_degree"];

/// One row of `network/group_comparison.csv`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonCsvRow {
    pub metric: String,
    pub cyborgs: f64,
    pub non_cyborgs: f64,
    pub t: f64,
    pub p_value: f64,
    /// `cyborgs`, `non_cyborgs`, or empty when not significant.
    pub higher: String,
}

const COMPARISON_HEADER: [&str; 6] = ["metric", "cyborgs", "non_cyborgs", "t", "p_value", "higher"];

#[derive(Debug, Serialize)]
struct NetworkSummary {
    nodes: usize,
    edges: usize,
    eigen_iterations: usize,
    eigenvalue: f64,
    eigen_residual: f64,
    eigen_component_size: usize,
    eigen_largest_component_only: bool,
}

#[derive(Debug, Serialize)]
struct StanceRow {
    id: String,
    score: f64,
    label: &'static str,
    seed: &'static str,
}

#[derive(Debug, Deserialize)]
struct StanceCsvRow {
    agent_id: String,
    score: f64,
    label: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StratumSize {
    pub agents: usize,
    pub posts: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StanceSummary {
    pub lexicon: String,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub users: BTreeMap<String, usize>,
    pub unused_seeds: Vec<String>,
    pub strata: BTreeMap<String, StratumSize>,
}

#[derive(Debug, Serialize)]
struct TermWeight {
    term: String,
    probability: f64,
}

#[derive(Debug, Serialize)]
struct TopicTerms {
    topic: usize,
    terms: Vec<TermWeight>,
}

#[derive(Debug, Serialize)]
struct TopicsFile {
    stratum: String,
    documents: usize,
    tokens: usize,
    vocabulary: usize,
    k: usize,
    alpha: f64,
    beta: f64,
    iterations: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    skipped: Option<String>,
    topics: Vec<TopicTerms>,
}

/// One row of `cohort/cohort.csv`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortCsvRow {
    pub class: String,
    pub n: usize,
    pub n_suspended: usize,
    pub prop_suspended: Option<f64>,
    pub n_alive: usize,
    pub mean_lifespan_days: Option<f64>,
    pub stddev_lifespan_days: Option<f64>,
    pub anova_p: Option<f64>,
}

const COHORT_HEADER: [&str; 8] = [
    "class",
    "n",
    "n_suspended",
    "prop_suspended",
    "n_alive",
    "mean_lifespan_days",
    "stddev_lifespan_days",
    "anova_p",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnovaJson {
    pub f: f64,
    pub df_between: f64,
    pub df_within: f64,
    pub p_value: f64,
}

/// `cohort/anova.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortStats {
    pub analysis_date: String,
    pub class_encoding: BTreeMap<String, f64>,
    pub anova: Option<AnovaJson>,
    pub anova_error: Option<String>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub fit_error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointRow {
    pub class: String,
    pub x: f64,
    pub mean_lifespan_days: f64,
    pub fitted: Option<f64>,
}

const POINTS_HEADER: [&str; 4] = ["class", "x", "mean_lifespan_days", "fitted"];

#[derive(Debug, Serialize)]
struct Fig1Row {
    n_flips: u32,
    agents: usize,
    proportion: f64,
    cumulative: f64,
}

#[derive(Debug, Serialize)]
struct Fig3Row {
    class: &'static str,
    agents: usize,
    mean: Option<f64>,
    sd: Option<f64>,
    median: Option<f64>,
}

impl Fig3Row {
    /// `sorted` ascending.
    fn new(class: AgentClass, sorted: &[f64]) -> Self {
        let n = sorted.len();
        let mean = (n > 0).then(|| sorted.iter().sum::<f64>() / n as f64);
        let sd = mean.filter(|_| n >= 2).map(|m| {
            (sorted.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64).sqrt()
        });
        let median = (n > 0).then(|| {
            if n % 2 == 1 {
                sorted[n / 2]
            } else {
                (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
            }
        });
        Fig3Row { class: class.as_str(), agents: n, mean, sd, median }
    }
}

#[derive(Debug, Serialize)]
struct MismatchRow {
    agent_id: String,
    expected: String,
    actual: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GroundTruthSummary {
    pub agents: usize,
    pub compared: usize,
    pub missing: usize,
    pub mismatches: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub percentile: f64,
    pub population: String,
    pub flipping_agents: usize,
    pub flips_at_percentile: f64,
    pub delta_at_percentile: f64,
    pub min_flips: u32,
    pub min_mean_delta: f64,
    pub delta_mode_bin: Option<[f64; 2]>,
}

/// `report/summary.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ReportSummary {
    pub agents: usize,
    pub classes: BTreeMap<String, usize>,
    pub thresholds: ThresholdsFile,
    pub calibration: CalibrationSummary,
    /// Agents whose bot-to-human and human-to-bot counts differ by more
    /// than one.
    pub alternation_violations: usize,
    pub cohort: Vec<CohortCsvRow>,
    pub cohort_stats: CohortStats,
    pub network: Option<Vec<ComparisonCsvRow>>,
    pub stance: Option<StanceSummary>,
    pub ground_truth: Option<GroundTruthSummary>,
}
