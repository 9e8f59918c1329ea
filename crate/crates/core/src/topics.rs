//! Text preprocessing and latent Dirichlet allocation by collapsed Gibbs
//! sampling.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::rng::Rng;
use crate::{CoreError, CoreResult};

const BUILTIN_STOPWORDS: &str = include_str!("../data/stopwords.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    /// One word per line; blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn builtin() -> Self {
        Self::from_text(BUILTIN_STOPWORDS)
    }

    pub fn none() -> Self {
        Stopwords(BTreeSet::new())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::builtin()
    }
}

fn is_url(word: &str) -> bool {
    let w = word.to_ascii_lowercase();
    w.starts_with("http://") || w.starts_with("https://") || w.starts_with("www.")
}

/// Splits one text into tokens.
pub fn tokenize(text: &str, stopwords: &Stopwords) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        if is_url(word) || word.starts_with('@') {
            continue;
        }
        let mut current = String::new();
        let mut flush = |current: &mut String| {
            if current.chars().count() >= 2 && !stopwords.contains(current) {
                out.push(core::mem::take(current));
            } else {
                current.clear();
            }
        };
        for c in word.chars() {
            if c.is_alphanumeric() || c == '_' {
                current.extend(c.to_lowercase());
            } else if c == '\'' || c == '\u{2019}' {
                // apostrophes join: "don't" -> "dont"
            } else {
                flush(&mut current);
            }
        }
        flush(&mut current);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    /// Documents as token ids; none is empty.
    pub documents: Vec<Vec<u32>>,
    /// Sorted vocabulary; a token's id is its position here.
    pub vocabulary: Vec<String>,
}

impl Corpus {
    pub fn from_token_lists(docs: Vec<Vec<String>>) -> Self {
        let vocabulary: Vec<String> =
            docs.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let index: BTreeMap<&str, u32> =
            vocabulary.iter().enumerate().map(|(i, w)| (w.as_str(), i as u32)).collect();
        let documents = docs
            .iter()
            .filter(|d| !d.is_empty())
            .map(|d| d.iter().map(|w| index[w.as_str()]).collect())
            .collect();
        Corpus { documents, vocabulary }
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn id_of(&self, word: &str) -> Option<u32> {
        self.vocabulary.binary_search_by(|w| w.as_str().cmp(word)).ok().map(|i| i as u32)
    }
}

/// Tokenizes every text and drops the ones left empty.
pub fn preprocess<'a, I>(texts: I, stopwords: &Stopwords) -> Corpus
where
    I: IntoIterator<Item = &'a str>,
{
    Corpus::from_token_lists(texts.into_iter().map(|t| tokenize(t, stopwords)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaConfig {
    pub topics: usize,
    /// `None` means `50 / topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig { topics: 5, alpha: None, beta: 0.01, iterations: 1000, seed: 0 }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.topics as f64)
    }
}

/// Sampler state, visible to observers between sweeps.
#[derive(Debug, Clone)]
pub struct GibbsState {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    assignments: Vec<Vec<u32>>,
    doc_topic: Vec<Vec<u64>>,
    topic_word: Vec<Vec<u64>>,
    topic_total: Vec<u64>,
}

impl GibbsState {
    pub fn topic_word_counts(&self) -> &[Vec<u64>] {
        &self.topic_word
    }

    pub fn doc_topic_counts(&self) -> &[Vec<u64>] {
        &self.doc_topic
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_total
    }

    /// `log p(w | z)` with the topic-word distributions integrated out.
    pub fn log_likelihood(&self) -> f64 {
        let vb = self.v as f64 * self.beta;
        let lg_b = libm::lgamma(self.beta);
        let mut ll = self.k as f64 * (libm::lgamma(vb) - self.v as f64 * lg_b);
        for t in 0..self.k {
            for &c in &self.topic_word[t] {
                if c > 0 {
                    ll += libm::lgamma(c as f64 + self.beta) - lg_b;
                }
            }
            ll -= libm::lgamma(self.topic_total[t] as f64 + vb);
        }
        ll
    }

    fn sweep(&mut self, docs: &[Vec<u32>], rng: &mut Rng, weights: &mut [f64]) {
        let vb = self.v as f64 * self.beta;
        for (d, doc) in docs.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let w = w as usize;
                let old = self.assignments[d][i] as usize;
                self.doc_topic[d][old] -= 1;
                self.topic_word[old][w] -= 1;
                self.topic_total[old] -= 1;
                for (t, weight) in weights.iter_mut().enumerate() {
                    *weight = (self.doc_topic[d][t] as f64 + self.alpha) * (self.topic_word[t][w] as f64 + self.beta)
                        / (self.topic_total[t] as f64 + vb);
                }
                let new = rng.categorical(weights);
                self.assignments[d][i] = new as u32;
                self.doc_topic[d][new] += 1;
                self.topic_word[new][w] += 1;
                self.topic_total[new] += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub vocabulary: Vec<String>,
    /// `topics x V`, rows sum to 1.
    pub topic_word: Vec<Vec<f64>>,
    /// `D x topics`, rows sum to 1.
    pub doc_topic: Vec<Vec<f64>>,
}

pub fn lda_fit(corpus: &Corpus, config: &LdaConfig) -> CoreResult<TopicModel> {
    lda_fit_observed(corpus, config, |_, _| {})
}

/// As [`lda_fit`], calling `observer(sweep, state)` after every sweep.
pub fn lda_fit_observed<F>(corpus: &Corpus, config: &LdaConfig, mut observer: F) -> CoreResult<TopicModel>
where
    F: FnMut(usize, &GibbsState),
{
    let k = config.topics;
    if corpus.is_empty() {
        return Err(CoreError::Empty("corpus"));
    }
    if k == 0 {
        return Err(CoreError::OutOfRange { field: "topics", value: 0.0 });
    }
    let tokens = corpus.token_count();
    if k > tokens {
        return Err(CoreError::TooManyTopics { topics: k, tokens });
    }
    let alpha = config.alpha();
    if !(alpha > 0.0) {
        return Err(CoreError::OutOfRange { field: "alpha", value: alpha });
    }
    if !(config.beta > 0.0) {
        return Err(CoreError::OutOfRange { field: "beta", value: config.beta });
    }

    let v = corpus.vocabulary.len();
    let mut rng = Rng::seed_from_u64(config.seed);
    let mut state = GibbsState {
        k,
        v,
        alpha,
        beta: config.beta,
        assignments: Vec::with_capacity(corpus.documents.len()),
        doc_topic: vec![vec![0; k]; corpus.documents.len()],
        topic_word: vec![vec![0; v]; k],
        topic_total: vec![0; k],
    };
    for (d, doc) in corpus.documents.iter().enumerate() {
        let mut z = Vec::with_capacity(doc.len());
        for &w in doc {
            let t = rng.below(k as u64) as usize;
            z.push(t as u32);
            state.doc_topic[d][t] += 1;
            state.topic_word[t][w as usize] += 1;
            state.topic_total[t] += 1;
        }
        state.assignments.push(z);
    }

    let mut weights = vec![0.0; k];
    for sweep in 0..config.iterations {
        state.sweep(&corpus.documents, &mut rng, &mut weights);
        observer(sweep, &state);
    }

    let vb = v as f64 * config.beta;
    let topic_word = (0..k)
        .map(|t| {
            let den = state.topic_total[t] as f64 + vb;
            state.topic_word[t].iter().map(|&c| (c as f64 + config.beta) / den).collect()
        })
        .collect();
    let ka = k as f64 * alpha;
    let doc_topic = corpus
        .documents
        .iter()
        .zip(&state.doc_topic)
        .map(|(doc, counts)| {
            let den = doc.len() as f64 + ka;
            counts.iter().map(|&c| (c as f64 + alpha) / den).collect()
        })
        .collect();
    Ok(TopicModel {
        topics: k,
        alpha,
        beta: config.beta,
        seed: config.seed,
        vocabulary: corpus.vocabulary.clone(),
        topic_word,
        doc_topic,
    })
}

/// The `n` most probable terms of `topic`, ties broken lexicographically.
pub fn top_terms(model: &TopicModel, topic: usize, n: usize) -> Vec<(String, f64)> {
    let row = &model.topic_word[topic];
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then_with(|| model.vocabulary[a].cmp(&model.vocabulary[b])));
    idx.into_iter().take(n).map(|i| (model.vocabulary[i].clone(), row[i])).collect()
}
