//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines land in the
//! `cargo test` output. Criteria 4, 6, 10 and 11 share the two end-to-end
//! runs of the `cyborg` binary on the bundled 5k-agent fixture.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use cyborg::archive::read_archive_file;
use cyborg::formats::{read_csv, FlipRow, GroundTruthRow};
use cyborg::pipeline::{CohortCsvRow, CohortStats, ComparisonCsvRow};
use cyborg_core::flips::{calibrate, detect_flips, flip_count_distribution, flip_stats, percentile_threshold, FlipDirection};
use cyborg_core::ingest::window_by_day;
use cyborg_core::network::{betweenness, eigenvector_centrality, total_degree, EIGEN_MAX_ITER, EIGEN_TOL};
use cyborg_core::rng::Rng;
use cyborg_core::scoring::{extract_features, score, AutomationSources, DEFAULT_AUTOMATION_SOURCES};
use cyborg_core::stance::{build_bipartite, propagate_stance, Bipartite, PropagationConfig, SeedLexicon};
use cyborg_core::stats::{cohen_kappa, one_way_anova, pooled_t_test, welch_t_test};
use cyborg_core::synth::{gen_series_population, PopulationSpec, CORONAVIRUS_FLIP_TARGETS};
use cyborg_core::topics::{lda_fit, lda_fit_observed, top_terms, Corpus, LdaConfig};
use cyborg_core::{
    AgentClass, CommGraph, Day, PostRecord, ProfileSnapshot, ReferenceScorer, ScoreSeries, Timestamp,
};
use statrs::distribution::{ContinuousCDF, StudentsT};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------------------
// 1. flip oracle

struct OracleStats {
    events: Vec<(i32, i32, bool, f64)>,
    n_b2h: u32,
    n_h2b: u32,
    mean: f64,
    stddev: f64,
}

/// Labels from integer grid points, so the bot cut is an exact integer test.
fn flip_oracle(days: &[i32], grid: &[u32]) -> OracleStats {
    let bot = |k: u32| k >= 70;
    let p = |k: u32| k as f64 / 100.0;
    let mut events = Vec::new();
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            if j == i + 1 && bot(grid[i]) != bot(grid[j]) {
                events.push((days[i], days[j], bot(grid[i]), (p(grid[j]) - p(grid[i])).abs()));
            }
        }
    }
    let n_b2h = events.iter().filter(|e| e.2).count() as u32;
    let mean = if events.is_empty() { 0.0 } else { events.iter().map(|e| e.3).sum::<f64>() / events.len() as f64 };
    let n = grid.len() as f64;
    let mu = grid.iter().map(|&k| p(k)).sum::<f64>() / n;
    let stddev = (grid.iter().map(|&k| (p(k) - mu).powi(2)).sum::<f64>() / n).sqrt();
    OracleStats { n_h2b: events.len() as u32 - n_b2h, events, n_b2h, mean, stddev }
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut rng = Rng::seed_from_u64(0xF11B);
    let mut injected = 0;
    for case in 0..10_000 {
        let len = rng.range_inclusive(2, 30) as usize;
        let mut grid: Vec<u32> = (0..len)
            .map(|_| loop {
                let k = rng.below(101) as u32;
                if k != 70 {
                    break k;
                }
            })
            .collect();
        if rng.bernoulli(0.2) {
            let at = rng.below(len as u64) as usize;
            grid[at] = 70;
            injected += 1;
        }
        let mut days = Vec::with_capacity(len);
        let mut d = 18_000;
        for _ in 0..len {
            d += rng.range_inclusive(1, 3) as i32;
            days.push(d);
        }
        let obs: Vec<(Day, f64)> = days.iter().zip(&grid).map(|(&d, &k)| (Day(d), k as f64 / 100.0)).collect();
        let series = ScoreSeries::new(format!("a{case}"), obs).map_err(|e| e.to_string())?;
        let events = detect_flips(&series, 0.70);
        let stats = flip_stats(&series, &events);
        let want = flip_oracle(&days, &grid);
        let got: Vec<(i32, i32, bool, f64)> = events
            .iter()
            .map(|e| (e.from_day.0, e.to_day.0, e.direction == FlipDirection::BotToHuman, e.abs_delta))
            .collect();
        ensure(got == want.events, || format!("case {case}: events {got:?} vs oracle {:?}", want.events))?;
        ensure(
            (stats.n_flips, stats.n_bot_to_human, stats.n_human_to_bot)
                == (want.events.len() as u32, want.n_b2h, want.n_h2b),
            || format!("case {case}: counts differ"),
        )?;
        ensure(stats.mean_abs_delta == want.mean, || {
            format!("case {case}: mean delta {} vs {}", stats.mean_abs_delta, want.mean)
        })?;
        ensure((stats.score_stddev - want.stddev).abs() < 1e-12, || {
            format!("case {case}: stddev {} vs {}", stats.score_stddev, want.stddev)
        })?;
    }
    let elapsed = t0.elapsed();
    within_time(elapsed, 5.0)?;
    Ok(format!("10000 series ({injected} with an injected 0.70) match, {:.2}s", elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------------------
// 2. exhaustive small cases

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    const GRID: [f64; 5] = [0.6, 0.65, 0.7, 0.75, 0.8];
    let mut checked = 0usize;
    for len in 1..=6u32 {
        for code in 0..5usize.pow(len) {
            let mut c = code;
            let scores: Vec<f64> = (0..len)
                .map(|_| {
                    let s = GRID[c % 5];
                    c /= 5;
                    s
                })
                .collect();
            let sign_changes = scores.windows(2).filter(|w| (w[0] - 0.70 >= 0.0) != (w[1] - 0.70 >= 0.0)).count();
            let series = ScoreSeries::from_scores("x", Day(0), &scores).map_err(|e| e.to_string())?;
            let n = detect_flips(&series, 0.70).len();
            ensure(n == sign_changes, || format!("{scores:?}: {n} flips, {sign_changes} sign changes"))?;
            checked += 1;
        }
    }
    let elapsed = t0.elapsed();
    within_time(elapsed, 10.0)?;
    Ok(format!("{checked} sequences, {:.2}s", elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------------------
// 3. calibration recovery

fn criterion_3() -> Outcome {
    let t0 = Instant::now();
    let spec = PopulationSpec::from_flip_targets(100_000, CORONAVIRUS_FLIP_TARGETS, 42);
    let agents = gen_series_population(&spec).map_err(|e| e.to_string())?;
    let stats: Vec<_> = agents
        .iter()
        .map(|a| {
            let s = &a.generated.series;
            flip_stats(s, &detect_flips(s, 0.70))
        })
        .collect();
    let table = flip_count_distribution(&stats).map_err(|e| e.to_string())?;
    let mut shares = Vec::new();
    for (n, target) in (1..=4).zip(CORONAVIRUS_FLIP_TARGETS) {
        let got = table.at(n).ok_or_else(|| format!("no row for {n} flips"))?;
        ensure((got - target).abs() * 100.0 <= 0.5, || {
            format!("cumulative share at {n} flips is {:.2}%, target {:.2}%", got * 100.0, target * 100.0)
        })?;
        shares.push(format!("{:.2}", got * 100.0));
    }
    let cal = calibrate(&stats, 75.0).map_err(|e| e.to_string())?;
    ensure(cal.min_flips == 3, || format!("flip threshold {}", cal.min_flips))?;
    ensure((cal.min_mean_delta - 0.10).abs() <= 0.05, || format!("delta threshold {}", cal.min_mean_delta))?;
    let counts: Vec<f64> = stats.iter().filter(|s| s.n_flips > 0).map(|s| s.n_flips as f64).collect();
    let nearest_rank = percentile_threshold(&counts, 75.0).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    within_time(elapsed, 60.0)?;
    Ok(format!(
        "cumulative % [{}], flip threshold {} (nearest-rank value {nearest_rank}), delta threshold {:.3}, {:.1}s",
        shares.join(", "),
        cal.min_flips,
        cal.min_mean_delta,
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// 4, 6, 10, 11: end-to-end runs

struct Run {
    dir: PathBuf,
    elapsed: Duration,
}

fn run_all(dir: &Path) -> Result<Run, String> {
    let t0 = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_cyborg"))
        .args(["all", "--seed", "42", "--out"])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("cyborg all exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(Run { dir: dir.to_path_buf(), elapsed: t0.elapsed() })
}

fn criterion_4(run: &Run) -> Outcome {
    let truth: Vec<GroundTruthRow> = read_csv(&run.dir.join("synth/ground_truth.csv")).map_err(|e| e.to_string())?;
    let got: Vec<FlipRow> = read_csv(&run.dir.join("classify/flips.csv")).map_err(|e| e.to_string())?;
    let got: BTreeMap<&str, &FlipRow> = got.iter().map(|r| (r.agent_id.as_str(), r)).collect();
    let mut errors = 0;
    let mut first = None;
    for t in &truth {
        let class = got.get(t.agent_id.as_str()).and_then(|r| r.agent_class()).map(AgentClass::as_str);
        if class != Some(t.class.as_str()) {
            errors += 1;
            first.get_or_insert_with(|| format!("{}: expected {}, got {class:?}", t.agent_id, t.class));
        }
    }
    ensure(errors == 0, || format!("{errors} misclassified, first {}", first.unwrap_or_default()))?;
    let violations = got.values().filter(|r| r.n_b2h.abs_diff(r.n_h2b) > 1).count();
    ensure(violations == 0, || format!("{violations} agents break the alternation invariant"))?;
    ensure(got.len() == truth.len(), || format!("{} classified, {} in ground truth", got.len(), truth.len()))?;
    Ok(format!("{} agents, 0 errors, 0 alternation violations", truth.len()))
}

fn criterion_6(run: &Run) -> Outcome {
    let rows: Vec<ComparisonCsvRow> =
        read_csv(&run.dir.join("network/group_comparison.csv")).map_err(|e| e.to_string())?;
    let expect = [
        ("Degree centrality", "cyborgs"),
        ("Betweenness centrality", "cyborgs"),
        ("Avg # followers", "cyborgs"),
        ("Avg # friends", "cyborgs"),
        ("% verified accounts", "non_cyborgs"),
    ];
    let mut parts = Vec::new();
    for (metric, side) in expect {
        let row = rows.iter().find(|r| r.metric == metric).ok_or_else(|| format!("no row for {metric}"))?;
        ensure(row.higher == side && row.p_value < 0.001, || {
            format!("{metric}: higher={:?} p={:e}, want {side} with p < 0.001", row.higher, row.p_value)
        })?;
        parts.push(format!("{metric} p={:.1e}", row.p_value));
    }
    Ok(parts.join("; "))
}

fn criterion_10(run: &Run) -> Outcome {
    let rows: Vec<CohortCsvRow> = read_csv(&run.dir.join("cohort/cohort.csv")).map_err(|e| e.to_string())?;
    let stats: CohortStats = serde_json::from_str(
        &std::fs::read_to_string(run.dir.join("cohort/anova.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let row = |class: &str| rows.iter().find(|r| r.class == class).ok_or_else(|| format!("no {class} row"));
    let mut parts = Vec::new();
    for (class, target) in [("bot", 89.2), ("cyborg", 56.0), ("human", 19.5)] {
        let got = row(class)?.prop_suspended.ok_or_else(|| format!("no {class} suspension share"))? * 100.0;
        ensure((got - target).abs() <= 3.0, || format!("{class} suspended {got:.2}%, target {target}%"))?;
        parts.push(format!("{class} {got:.1}%"));
    }
    let life = |class: &str| -> Result<f64, String> {
        row(class)?.mean_lifespan_days.ok_or_else(|| format!("no {class} lifespan"))
    };
    let (c, h, b) = (life("cyborg")?, life("human")?, life("bot")?);
    ensure(c > h && h > b, || format!("mean lifespans cyborg {c:.0}, human {h:.0}, bot {b:.0}"))?;
    let slope = stats.slope.ok_or("no regression slope")?;
    ensure(slope < 0.0, || format!("slope {slope}"))?;
    let p = stats.anova.as_ref().ok_or("no ANOVA")?.p_value;
    ensure(p < 0.05, || format!("ANOVA p = {p}"))?;
    Ok(format!("suspended {}; lifespans {c:.0} > {h:.0} > {b:.0}; slope {slope:.1}; ANOVA p {p:.1e}", parts.join(", ")))
}

fn tree(dir: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_path_buf();
                files.insert(rel, std::fs::read(&path).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(files)
}

fn criterion_11(a: &Run, b: &Run) -> Outcome {
    let (ta, tb) = (tree(&a.dir)?, tree(&b.dir)?);
    let names_a: BTreeSet<_> = ta.keys().collect();
    let names_b: BTreeSet<_> = tb.keys().collect();
    ensure(names_a == names_b, || "artifact trees list different files".to_string())?;
    for (name, bytes) in &ta {
        ensure(tb[name] == *bytes, || format!("{} differs between runs", name.display()))?;
    }
    let slowest = a.elapsed.max(b.elapsed);
    within_time(slowest, 180.0)?;
    let bytes: usize = ta.values().map(Vec::len).sum();
    Ok(format!(
        "{} files, {bytes} bytes identical; runs took {:.1}s and {:.1}s",
        ta.len(),
        a.elapsed.as_secs_f64(),
        b.elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// 5. centrality

fn random_connected_graph(rng: &mut Rng) -> (usize, Vec<(usize, usize)>) {
    let n = rng.range_inclusive(1, 8) as usize;
    let p = rng.uniform(0.2, 0.8);
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.bernoulli(p) {
                    edges.push((i, j));
                }
            }
        }
        if connected(n, &edges) {
            return (n, edges);
        }
    }
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.iter().all(|&s| s)
}

fn simple_paths(adj: &[Vec<bool>], s: usize, t: usize) -> Vec<Vec<usize>> {
    fn walk(adj: &[Vec<bool>], path: &mut Vec<usize>, t: usize, out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if v == t {
            out.push(path.clone());
            return;
        }
        for w in 0..adj.len() {
            if adj[v][w] && !path.contains(&w) {
                path.push(w);
                walk(adj, path, t, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(adj, &mut vec![s], t, &mut out);
    out
}

/// Every shortest path listed explicitly; normalized over unordered pairs.
fn betweenness_oracle(n: usize, adj: &[Vec<bool>]) -> Vec<f64> {
    let mut b = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let paths = simple_paths(adj, s, t);
            let shortest = paths.iter().map(Vec::len).min().unwrap();
            let best: Vec<&Vec<usize>> = paths.iter().filter(|p| p.len() == shortest).collect();
            for (v, acc) in b.iter_mut().enumerate() {
                if v != s && v != t {
                    *acc += best.iter().filter(|p| p.contains(&v)).count() as f64 / best.len() as f64;
                }
            }
        }
    }
    if n < 3 {
        return vec![0.0; n];
    }
    let norm = 2.0 / ((n - 1) as f64 * (n - 2) as f64);
    b.iter().map(|x| x * norm).collect()
}

fn graph_of(n: usize, edges: &[(usize, usize)]) -> (CommGraph, Vec<String>) {
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let g = CommGraph::from_edges(
        edges.iter().map(|&(a, b)| (names[a].as_str(), names[b].as_str(), 1)),
        names.iter().map(String::as_str),
    );
    (g, names)
}

fn criterion_5() -> Outcome {
    let mut rng = Rng::seed_from_u64(0xCE27);
    let mut worst_b: f64 = 0.0;
    let mut worst_r: f64 = 0.0;
    for case in 0..1000 {
        let (n, edges) = random_connected_graph(&mut rng);
        let (g, names) = graph_of(n, &edges);
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in &edges {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        let idx: Vec<usize> = names.iter().map(|s| g.index_of(s).unwrap()).collect();
        let want = betweenness_oracle(n, &adj);
        let got = betweenness(&g);
        for v in 0..n {
            let err = (got[idx[v]] - want[v]).abs();
            worst_b = worst_b.max(err);
            ensure(err <= 1e-9, || format!("case {case}: betweenness of n{v} {} vs {}", got[idx[v]], want[v]))?;
        }
        let deg = total_degree(&g);
        for v in 0..n {
            let row_sum = adj[v].iter().filter(|&&x| x).count() as f64;
            let want = if n < 2 { 0.0 } else { row_sum / (n - 1) as f64 };
            ensure(deg[idx[v]] == want, || format!("case {case}: degree of n{v} {} vs {want}", deg[idx[v]]))?;
        }
        if edges.is_empty() {
            continue;
        }
        let e = eigenvector_centrality(&g, EIGEN_TOL, EIGEN_MAX_ITER).map_err(|e| format!("case {case}: {e}"))?;
        let v: Vec<f64> = (0..n).map(|i| e.scores[idx[i]]).collect();
        let av: Vec<f64> = (0..n).map(|i| (0..n).filter(|&j| adj[i][j]).map(|j| v[j]).sum()).collect();
        let lambda = v.iter().zip(&av).map(|(a, b)| a * b).sum::<f64>() / v.iter().map(|a| a * a).sum::<f64>();
        let residual = v.iter().zip(&av).map(|(x, ax)| (ax - lambda * x).abs()).fold(0.0, f64::max);
        worst_r = worst_r.max(residual);
        ensure(residual < 1e-7, || format!("case {case}: eigenvector residual {residual:e}"))?;
    }

    let (k3, _) = graph_of(3, &[(0, 1), (1, 2), (0, 2)]);
    let e = eigenvector_centrality(&k3, EIGEN_TOL, EIGEN_MAX_ITER).map_err(|e| e.to_string())?;
    let third = 1.0 / 3f64.sqrt();
    ensure(e.scores.iter().all(|s| (s - third).abs() < 1e-6), || format!("K3 scores {:?}", e.scores))?;
    let (path, names) = graph_of(3, &[(0, 1), (1, 2)]);
    let e = eigenvector_centrality(&path, EIGEN_TOL, EIGEN_MAX_ITER).map_err(|e| e.to_string())?;
    let want = [0.5, 1.0 / 2f64.sqrt(), 0.5];
    for (name, w) in names.iter().zip(want) {
        let s = e.scores[path.index_of(name).unwrap()];
        ensure((s - w).abs() < 1e-6, || format!("3-path {name}: {s} vs {w}"))?;
    }
    Ok(format!("1000 graphs; worst betweenness error {worst_b:.1e}, worst residual {worst_r:.1e}; K3 and 3-path match"))
}

// ---------------------------------------------------------------------------
// 7. stance

fn bipartite(edges: &[(&str, &str, u64)]) -> Bipartite {
    Bipartite::from_weights(&edges.iter().map(|&(u, h, w)| ((u.to_string(), h.to_string()), w)).collect())
}

fn mirrored(a: &cyborg_core::stance::StanceResult, b: &cyborg_core::stance::StanceResult) -> bool {
    a.users.len() == b.users.len()
        && a.hashtags.len() == b.hashtags.len()
        && a.users.iter().all(|(k, v)| b.users[k].score == -v.score)
        && a.hashtags.iter().all(|(k, v)| b.hashtags[k].score == -v.score)
}

fn criterion_7(run: &Run) -> Outcome {
    let (posts, _) = read_archive_file(&run.dir.join("ingest/posts.jsonl")).map_err(|e| e.to_string())?;
    let lexicon = cyborg::formats::builtin_lexicon("vaccine").ok_or("no vaccine lexicon")?;
    let config = PropagationConfig::default();
    let mut parts = Vec::new();

    let fixture = build_bipartite(&posts);
    let r = propagate_stance(&fixture, &lexicon, &config);
    ensure(r.converged && r.residual < 1e-6, || format!("fixture: residual {:e} after {}", r.residual, r.iterations))?;
    let swapped = propagate_stance(&fixture, &lexicon.swapped(), &config);
    ensure(mirrored(&r, &swapped), || "fixture: swapped seeds do not negate every score".to_string())?;
    parts.push(format!("5k fixture residual {:.1e} in {} rounds", r.residual, r.iterations));

    let small = bipartite(&[("u1", "p", 2), ("u1", "h", 1), ("u2", "h", 3), ("u2", "a", 1), ("u3", "h", 1)]);
    let small_lex = SeedLexicon::new("t", ["p"], ["a"]).map_err(|e| e.to_string())?;
    let r = propagate_stance(&small, &small_lex, &config);
    ensure(r.converged && r.residual < 1e-6, || format!("small fixture: residual {:e}", r.residual))?;
    ensure(mirrored(&r, &propagate_stance(&small, &small_lex.swapped(), &config)), || {
        "small fixture: swap asymmetry".to_string()
    })?;

    // u1 = (1 + h)/2, h = (u1 + u2)/2, u2 = h  =>  u1 = h = u2 = 1
    let chain = bipartite(&[("u1", "pro", 1), ("u1", "h", 1), ("u2", "h", 1)]);
    let chain_lex = SeedLexicon::new("t", ["pro"], Vec::<&str>::new()).map_err(|e| e.to_string())?;
    let tight = PropagationConfig { max_iter: 1000, tol: 1e-9, neutral_band: 0.1 };
    let r = propagate_stance(&chain, &chain_lex, &tight);
    for (name, got) in [("u1", r.users["u1"].score), ("h", r.hashtags["h"].score), ("u2", r.users["u2"].score)] {
        ensure((got - 1.0).abs() < 1e-6, || format!("chain {name} = {got}, hand solution 1"))?;
    }
    parts.push("hand fixed point within 1e-6".to_string());
    parts.push("swap symmetry exact".to_string());
    Ok(parts.join("; "))
}

// ---------------------------------------------------------------------------
// 8. LDA

fn two_block_corpus(seed: u64) -> Corpus {
    let mut rng = Rng::seed_from_u64(seed);
    let docs = (0..100)
        .map(|d| {
            let block = if d < 50 { 'a' } else { 'b' };
            (0..40).map(|_| format!("{block}{:03}", rng.below(100))).collect()
        })
        .collect();
    Corpus::from_token_lists(docs)
}

fn criterion_8() -> Outcome {
    let t0 = Instant::now();
    let corpus = two_block_corpus(8);
    let config = LdaConfig { topics: 2, alpha: Some(0.5), beta: 0.01, iterations: 500, seed: 2024 };
    let lengths: Vec<u64> = corpus.documents.iter().map(|d| d.len() as u64).collect();
    let total = corpus.token_count() as u64;
    let mut conservation: Result<(), String> = Ok(());
    let model = lda_fit_observed(&corpus, &config, |sweep, state| {
        if conservation.is_err() {
            return;
        }
        let tw = state.topic_word_counts();
        let dt = state.doc_topic_counts();
        let ok = tw.iter().map(|r| r.iter().sum::<u64>()).sum::<u64>() == total
            && tw.iter().zip(state.topic_totals()).all(|(r, &t)| r.iter().sum::<u64>() == t)
            && dt.iter().zip(&lengths).all(|(r, &len)| r.iter().sum::<u64>() == len)
            && (0..corpus.vocabulary.len()).all(|w| {
                tw.iter().map(|r| r[w]).sum::<u64>()
                    == corpus.documents.iter().flatten().filter(|&&t| t as usize == w).count() as u64
            });
        if !ok {
            conservation = Err(format!("counts not conserved after sweep {sweep}"));
        }
    })
    .map_err(|e| e.to_string())?;
    conservation?;
    let mut purities = Vec::new();
    for t in 0..model.topics {
        let terms = top_terms(&model, t, 10);
        let a = terms.iter().filter(|(w, _)| w.starts_with('a')).count();
        let purity = a.max(terms.len() - a) as f64 / terms.len() as f64;
        ensure(purity >= 0.9, || format!("topic {t} top terms {terms:?}"))?;
        purities.push(purity);
    }
    let again = lda_fit(&corpus, &config).map_err(|e| e.to_string())?;
    ensure(again == model, || "same seed gave a different model".to_string())?;
    let elapsed = t0.elapsed();
    within_time(elapsed, 30.0)?;
    Ok(format!("top-10 purity {purities:?}, counts conserved every sweep, deterministic, {:.2}s", elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------------------
// 9. statistics

fn criterion_9() -> Outcome {
    ensure(cohen_kappa(&["a", "b", "a"], &["a", "b", "a"]) == Ok(1.0), || "perfect agreement".into())?;
    let k = cohen_kappa(&["x", "x", "y", "y"], &["y", "y", "x", "x"]).map_err(|e| e.to_string())?;
    ensure((k + 1.0).abs() < 1e-12, || format!("balanced disagreement kappa {k}"))?;
    // table (20, 5 / 10, 15): p_o = 35/50, p_e = (25*30 + 25*20)/2500 = 0.5
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (la, lb, n) in [(0, 0, 20), (0, 1, 5), (1, 0, 10), (1, 1, 15)] {
        a.extend(std::iter::repeat(la).take(n));
        b.extend(std::iter::repeat(lb).take(n));
    }
    let k = cohen_kappa(&a, &b).map_err(|e| e.to_string())?;
    ensure((k - 0.4).abs() < 1e-12, || format!("2x2 kappa {k}"))?;

    // group means 2, 12, 22; SS_between = 3 * 200 = 600 on 2 df; SS_within = 6 on 6 df
    let an = one_way_anova(&[[1.0, 2.0, 3.0], [11.0, 12.0, 13.0], [21.0, 22.0, 23.0]]).map_err(|e| e.to_string())?;
    ensure((an.f - 300.0).abs() < 1e-9, || format!("ANOVA F {}", an.f))?;

    let x = [4.1, 5.3, 6.2, 5.8, 4.9, 5.5];
    let y = [6.4, 7.1, 5.9, 7.8, 6.6];
    let an = one_way_anova(&[&x[..], &y[..]]).map_err(|e| e.to_string())?;
    let pooled = pooled_t_test(&x, &y).map_err(|e| e.to_string())?;
    ensure((an.f - pooled.t * pooled.t).abs() < 1e-9, || format!("F {} vs t^2 {}", an.f, pooled.t * pooled.t))?;

    let w = welch_t_test(&x, &y).map_err(|e| e.to_string())?;
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let var = |s: &[f64]| {
        let m = mean(s);
        s.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (s.len() - 1) as f64
    };
    let (sx, sy) = (var(&x) / x.len() as f64, var(&y) / y.len() as f64);
    let t = (mean(&x) - mean(&y)) / (sx + sy).sqrt();
    let df = (sx + sy).powi(2) / (sx * sx / (x.len() - 1) as f64 + sy * sy / (y.len() - 1) as f64);
    let p = 2.0 * StudentsT::new(0.0, 1.0, df).map_err(|e| e.to_string())?.cdf(-t.abs());
    ensure((w.t - t).abs() < 1e-6 && (w.df - df).abs() < 1e-6 && (w.p_value - p).abs() < 1e-6, || {
        format!("Welch t={} df={} p={} vs t={t} df={df} p={p}", w.t, w.df, w.p_value)
    })?;
    Ok(format!("kappa 1 / -1 / 0.4, F = 300, F = t^2, Welch t = {t:.4} p = {p:.4}"))
}

// ---------------------------------------------------------------------------
// reference scorer separation

fn synthetic_day(rng: &mut Rng, agent: &str, scripted: bool) -> Vec<PostRecord> {
    let day = Day(18_400);
    let profile = ProfileSnapshot {
        followers_count: if scripted { rng.below(300) } else { rng.below(3000) },
        friends_count: if scripted { 100 + rng.below(1900) } else { rng.below(1000) },
        statuses_count: rng.below(20_000),
        account_created_at: Timestamp(day.start().0 - 86_400 * rng.range_inclusive(30, 4000)),
        ..Default::default()
    };
    let n = if scripted { rng.range_inclusive(24, 96) } else { rng.range_inclusive(1, 6) };
    let mut t = day.start().0 + rng.below(600) as i64;
    let gap = 86_000 / n;
    (0..n)
        .map(|k| {
            let post = PostRecord {
                post_id: format!("{agent}-{k}"),
                author_id: agent.to_string(),
                created_at: Timestamp(t.min(day.start().0 + 86_399)),
                text: "post".to_string(),
                hashtags: if scripted { vec!["news".into(), "covid19".into()] } else { vec![] },
                retweet_of: (scripted || rng.bernoulli(0.1)).then(|| "someone".to_string()),
                source_client: if scripted {
                    DEFAULT_AUTOMATION_SOURCES[rng.below(4) as usize].to_string()
                } else {
                    "Twitter Web App".to_string()
                },
                author_profile: profile.clone(),
                ..Default::default()
            };
            t += if scripted { gap + rng.range_inclusive(-5, 5) } else { rng.range_inclusive(600, 86_000 / n) };
            post
        })
        .collect()
}

fn scorer_separation() -> Outcome {
    let mut rng = Rng::seed_from_u64(0x5C0E);
    let scorer = ReferenceScorer::new(cyborg::formats::parse_weights("reference", cyborg::formats::REFERENCE_WEIGHTS)
        .map_err(|e| e.to_string())?);
    let automation = AutomationSources::new(DEFAULT_AUTOMATION_SOURCES);
    let mut lowest_scripted: f64 = 1.0;
    let mut highest_organic: f64 = 0.0;
    for i in 0..500 {
        for scripted in [true, false] {
            let agent = format!("{}{i}", if scripted { "s" } else { "o" });
            let windows = window_by_day(synthetic_day(&mut rng, &agent, scripted));
            for w in windows.values().flatten() {
                let p = score(&extract_features(w, &automation), &scorer);
                if scripted {
                    lowest_scripted = lowest_scripted.min(p);
                } else {
                    highest_organic = highest_organic.max(p);
                }
            }
        }
    }
    ensure(lowest_scripted >= 0.8, || format!("a scripted day scored {lowest_scripted}"))?;
    ensure(highest_organic <= 0.4, || format!("an organic day scored {highest_organic}"))?;
    Ok(format!("scripted days >= {lowest_scripted:.3}, organic days <= {highest_organic:.3}"))
}

// ---------------------------------------------------------------------------

fn report(label: &str, outcome: Outcome, failures: &mut Vec<String>) {
    match outcome {
        Ok(detail) => println!("PASS  {label}: {detail}"),
        Err(detail) => {
            println!("FAIL  {label}: {detail}");
            failures.push(label.to_string());
        }
    }
}

fn main() {
    // `cargo test -- --list` and filters: nothing to enumerate here
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut failures = Vec::new();
    report("1 flip-oracle equivalence", criterion_1(), &mut failures);
    report("2 exhaustive small cases", criterion_2(), &mut failures);
    report("3 calibration recovery", criterion_3(), &mut failures);

    let scratch = tempfile::tempdir().expect("temporary directory");
    let first = run_all(&scratch.path().join("first"));
    let second = run_all(&scratch.path().join("second"));
    let with_run = |f: fn(&Run) -> Outcome| match &first {
        Ok(run) => f(run),
        Err(e) => Err(format!("end-to-end run failed: {e}")),
    };

    report("4 classification fidelity", with_run(criterion_4), &mut failures);
    report("5 centrality equivalence", criterion_5(), &mut failures);
    report("6 group-direction reproduction", with_run(criterion_6), &mut failures);
    report("7 stance propagation", with_run(criterion_7), &mut failures);
    report("8 LDA planted recovery", criterion_8(), &mut failures);
    report("9 statistics cross-checks", criterion_9(), &mut failures);
    report("10 cohort reproduction", with_run(criterion_10), &mut failures);
    let determinism = match (&first, &second) {
        (Ok(a), Ok(b)) => criterion_11(a, b),
        (Err(e), _) | (_, Err(e)) => Err(format!("end-to-end run failed: {e}")),
    };
    report("11 end-to-end determinism", determinism, &mut failures);
    report("reference scorer separation", scorer_separation(), &mut failures);

    if failures.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: {} failing: {}", failures.len(), failures.join(", "));
        std::process::exit(1);
    }
}
