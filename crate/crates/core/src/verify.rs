//! Exhaustive checks of relations between the generators `a`, `b`, `c`.
//!
//! A relation holds on the mapping torus when it acts as the identity, flow
//! included, on every configuration. Configurations decompose into anchored
//! blocks, so it is enough to check short blocks as periodic points and long
//! blocks through their prefixes: once the last visible bit of `2w` followed
//! by an unknown continuation is never looked at, longer blocks behave alike.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{identity_flow, FlowedWord, Piece};
use crate::rules::{apply_rule_traced, builtin_generator, Applied, LocalRule};
use crate::symbol::{AnchoredWord, Boundary};
use crate::veelike::{
    anchored_apply_traced, builtin_bijection, compile_to_local_rule, PrefixBijection,
};

const DEFAULT_RELATIONS: [&str; 9] = [
    "aa",
    "bbb",
    "cc",
    "abababab",
    "cacaca",
    "cabbabacabbabacbcababbacababba",
    "acbcbabbcbbcbcabcbbcabbacbbcbcbabb",
    "abbcbcabbabbcbcbbabbcbbcbabcbbcabb",
    "cabbcbbcbacabacbcbbcabbcabcbbcbbacbacbcbbcabb",
];

/// A further relation that follows from the defaults.
pub const EXTRA_RELATION: &str = "bbacbbcbabcbbcbbabbcbcbbabbacbcbba";

pub const DEFAULT_MAX_LEN: usize = 11;
pub const WITNESS_CAP: usize = 5;

/// A word over the generator names, applied left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    word: String,
    label: String,
}

impl Relation {
    pub fn new(word: &str) -> Result<Relation> {
        Self::with_label(word, word)
    }

    pub fn with_label(word: &str, label: &str) -> Result<Relation> {
        if word.is_empty() {
            return Err(Error::EmptyWord);
        }
        if let Some(g) = word.chars().find(|g| !matches!(g, 'a' | 'b' | 'c')) {
            return Err(Error::UnknownGenerator(g));
        }
        Ok(Relation {
            word: word.to_string(),
            label: label.to_string(),
        })
    }

    pub fn word(&self) -> &str {
        &self.word
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.word)
    }
}

pub fn default_relations() -> Vec<Relation> {
    DEFAULT_RELATIONS
        .iter()
        .map(|w| Relation::new(w).unwrap())
        .collect()
}

/// One relation per line, optionally `label: word`; `#` starts a comment.
pub fn parse_relations(text: &str) -> Result<Vec<Relation>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (label, word) = match line.split_once(':') {
            Some((l, w)) => (l.trim(), w.trim()),
            None => (line, line),
        };
        let rel = Relation::with_label(word, label).map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(rel);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    RuleTable,
    Bijection,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Engine> {
        match s {
            "rule-table" | "rules" => Ok(Engine::RuleTable),
            "bijection" => Ok(Engine::Bijection),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::RuleTable => "rule-table",
            Engine::Bijection => "bijection",
        })
    }
}

/// The three generators, both as local rules and as prefix bijections.
#[derive(Debug, Clone)]
pub struct Generators {
    rules: [LocalRule; 3],
    bijections: [PrefixBijection; 3],
}

impl Generators {
    pub fn standard() -> Generators {
        let rule = |g| builtin_generator(g).expect("built-in rule");
        let bij = |g| builtin_bijection(g).expect("built-in bijection");
        Generators {
            rules: [rule("a"), rule("b"), rule("c")],
            bijections: [bij("a"), bij("b"), bij("c")],
        }
    }

    /// Replaces `c`; the rule engine then uses the compiled form of `c`.
    pub fn with_c(c: PrefixBijection) -> Result<Generators> {
        let mut gens = Self::standard();
        gens.rules[2] = compile_to_local_rule(&c)?;
        gens.bijections[2] = c;
        Ok(gens)
    }

    pub fn with_broken_c() -> Generators {
        Self::with_c(builtin_bijection("c_broken").expect("built-in bijection"))
            .expect("broken c compiles")
    }

    fn index(g: char) -> Result<usize> {
        match g {
            'a' => Ok(0),
            'b' => Ok(1),
            'c' => Ok(2),
            other => Err(Error::UnknownGenerator(other)),
        }
    }

    pub fn rule(&self, g: char) -> Result<&LocalRule> {
        Ok(&self.rules[Self::index(g)?])
    }

    pub fn bijection(&self, g: char) -> Result<&PrefixBijection> {
        Ok(&self.bijections[Self::index(g)?])
    }

    pub fn step(&self, g: char, engine: Engine, fw: &FlowedWord) -> Result<Applied> {
        let i = Self::index(g)?;
        match engine {
            Engine::RuleTable => apply_rule_traced(&self.rules[i], fw),
            Engine::Bijection => anchored_apply_traced(&self.bijections[i], fw),
        }
    }
}

impl Default for Generators {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub generator: char,
    pub flow: FlowedWord,
    pub read: BTreeSet<isize>,
    pub rewritten: BTreeSet<isize>,
}

impl Step {
    pub fn depth(&self) -> usize {
        self.read
            .iter()
            .chain(&self.rewritten)
            .max()
            .map_or(0, |&p| p.max(0) as usize + 1)
    }
}

/// The initial word and every intermediate image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub initial: FlowedWord,
    pub steps: Vec<Step>,
}

impl Trace {
    pub fn final_flow(&self) -> &FlowedWord {
        self.steps.last().map_or(&self.initial, |s| &s.flow)
    }

    /// Deepest position any step reads or rewrites, counting the anchor as 1.
    pub fn read_depth(&self) -> usize {
        self.steps.iter().map(Step::depth).max().unwrap_or(0)
    }

    pub fn touches(&self, pos: isize) -> bool {
        self.steps
            .iter()
            .any(|s| s.read.contains(&pos) || s.rewritten.contains(&pos))
    }

    /// All rows, the initial word first.
    pub fn rows(&self) -> impl Iterator<Item = &FlowedWord> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|s| &s.flow))
    }
}

pub fn apply_relation(
    rel: &Relation,
    fw: &FlowedWord,
    engine: Engine,
    gens: &Generators,
) -> Result<Trace> {
    let mut steps: Vec<Step> = Vec::with_capacity(rel.len());
    for (i, g) in rel.word().chars().enumerate() {
        let current = steps.last().map_or(fw, |s| &s.flow);
        let applied = gens.step(g, engine, current).map_err(|e| Error::AtStep {
            step: i + 1,
            generator: g,
            source: Box::new(e),
        })?;
        steps.push(Step {
            generator: g,
            flow: applied.flow,
            read: applied.read,
            rewritten: applied.rewritten,
        });
    }
    Ok(Trace {
        initial: fw.clone(),
        steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Every bit word, by length and then lexicographically.
    Circular,
    /// Words not ending in 0 up to the length, then every word of that
    /// length followed by a bowtie.
    BowtieSuite,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TestWord {
    pub bits: String,
    pub boundary: Boundary,
}

impl TestWord {
    pub fn anchored(&self) -> Result<AnchoredWord> {
        AnchoredWord::from_bits(&self.bits, self.boundary)
    }
}

impl fmt::Display for TestWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2{}", self.bits)?;
        if let Some(m) = self.boundary.marker() {
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// All bit words of length `len` in lexicographic order.
pub fn bit_words(len: usize) -> impl Iterator<Item = String> {
    (0..1u64 << len).map(move |k| {
        (0..len)
            .rev()
            .map(|i| if k >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    })
}

pub fn enumerate_test_words(scheme: Scheme, max_len: usize) -> Vec<TestWord> {
    let word = |bits: String, boundary| TestWord { bits, boundary };
    match scheme {
        Scheme::Circular => (0..=max_len)
            .flat_map(bit_words)
            .map(|b| word(b, Boundary::Circular))
            .collect(),
        Scheme::BowtieSuite => (0..=max_len)
            .flat_map(bit_words)
            .filter(|b| !b.ends_with('0'))
            .map(|b| word(b, Boundary::Circular))
            .chain(bit_words(max_len).map(|b| word(b, Boundary::Bowtie)))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Verdict {
    pub fn from_ok(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_pass() { "PASS" } else { "FAIL" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Circular,
    Frontier,
    Sentinel,
}

/// A word on which the relation is not the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub word: String,
    pub phase: Phase,
    pub result_word: Option<String>,
    pub pieces: Vec<Piece>,
    pub description: String,
}

impl Witness {
    fn from_outcome(tw: &TestWord, phase: Phase, outcome: &Result<Trace>) -> Witness {
        let word = tw.to_string();
        match outcome {
            Ok(trace) => {
                let flow = trace.final_flow();
                let description = if flow.word_string() != format!("2{}", tw.bits) {
                    format!("word changed to {}", flow.word_string())
                } else {
                    format!(
                        "word restored with distorted flow ({} pieces)",
                        flow.pieces().len()
                    )
                };
                Witness {
                    word,
                    phase,
                    result_word: Some(flow.word_string()),
                    pieces: flow.pieces(),
                    description,
                }
            }
            Err(e) => Witness {
                word,
                phase,
                result_word: None,
                pieces: vec![],
                description: e.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationReport {
    pub relation: String,
    pub label: String,
    pub engine: Engine,
    pub max_len: usize,
    pub verdict: Verdict,
    pub stabilization_length: Option<usize>,
    pub read_depth: Option<usize>,
    pub circular_words: usize,
    pub skipped_illegal: usize,
    pub frontier_words: usize,
    pub sentinel_words: usize,
    pub failed_words: usize,
    pub sentinel_incidents: usize,
    pub bowtie_incidents: usize,
    pub witnesses: Vec<Witness>,
}

fn run(rel: &Relation, tw: &TestWord, engine: Engine, gens: &Generators) -> Result<Trace> {
    let word = tw.anchored()?;
    apply_relation(rel, &identity_flow(&word), engine, gens)
}

fn is_identity_run(tw: &TestWord, outcome: &Result<Trace>) -> bool {
    match (outcome, tw.anchored()) {
        (Ok(trace), Ok(word)) => trace.final_flow().is_identity(&word),
        _ => false,
    }
}

/// Runs the three phases: periodic blocks up to `max_len` letters, blocks
/// with an unknown continuation until the last bit stops mattering, and
/// blocks of `max_len` letters before a sentinel.
pub fn check_relation(
    rel: &Relation,
    max_len: usize,
    engine: Engine,
    gens: &Generators,
) -> RelationReport {
    assert!(max_len >= 1, "max_len must be at least 1");
    let bits = max_len - 1;
    let mut witnesses: Vec<Witness> = Vec::new();
    let mut failed_words = 0;
    let mut record = |tw: &TestWord, phase, outcome: &Result<Trace>| {
        failed_words += 1;
        if witnesses.len() < WITNESS_CAP {
            witnesses.push(Witness::from_outcome(tw, phase, outcome));
        }
    };

    // Phase 1: periodic points (2w)^Z. Words ending in 0 wrap onto 02.
    let all = enumerate_test_words(Scheme::Circular, bits);
    let (circular, illegal): (Vec<_>, Vec<_>) =
        all.into_iter().partition(|tw| !tw.bits.ends_with('0'));
    let outcomes: Vec<_> = circular
        .par_iter()
        .map(|tw| run(rel, tw, engine, gens))
        .collect();
    for (tw, outcome) in circular.iter().zip(&outcomes) {
        if !is_identity_run(tw, outcome) {
            record(tw, Phase::Circular, outcome);
        }
    }

    // Phase 2: 2w followed by arbitrary bits.
    let mut stabilization_length = None;
    let mut safe_length = None;
    let mut bowtie_incidents = 0;
    let mut frontier_words = 0;
    for len in 0..=bits {
        let words: Vec<TestWord> = bit_words(len)
            .map(|b| TestWord {
                bits: b,
                boundary: Boundary::Bowtie,
            })
            .collect();
        frontier_words += words.len();
        let outcomes: Vec<_> = words
            .par_iter()
            .map(|tw| run(rel, tw, engine, gens))
            .collect();
        let mut stable = true;
        if safe_length.is_none() && outcomes.iter().all(|o| o.is_ok()) {
            safe_length = Some(len);
        }
        for (tw, outcome) in words.iter().zip(&outcomes) {
            match outcome {
                Ok(trace) => {
                    if trace.touches(len as isize) {
                        stable = false;
                    }
                    if !is_identity_run(tw, outcome) {
                        record(tw, Phase::Frontier, outcome);
                    }
                }
                Err(e) => {
                    stable = false;
                    if matches!(
                        e.root(),
                        Error::BowtieRewritten(_) | Error::BowtieDependent(_)
                    ) {
                        bowtie_incidents += 1;
                    } else {
                        record(tw, Phase::Frontier, outcome);
                    }
                }
            }
        }
        if stable {
            stabilization_length = Some(len);
            break;
        }
    }
    if stabilization_length.is_none() {
        failed_words += 1;
        if witnesses.len() < WITNESS_CAP {
            witnesses.push(Witness {
                word: format!("2{}~", "?".repeat(bits)),
                phase: Phase::Frontier,
                result_word: None,
                pieces: vec![],
                description: format!("last bit still touched at length {bits}"),
            });
        }
    }

    // Phase 3: nothing may look past max_len letters.
    let words: Vec<TestWord> = bit_words(bits)
        .map(|b| TestWord {
            bits: b,
            boundary: Boundary::Sentinel,
        })
        .collect();
    let outcomes: Vec<_> = words
        .par_iter()
        .map(|tw| run(rel, tw, engine, gens))
        .collect();
    let mut sentinel_incidents = 0;
    for (tw, outcome) in words.iter().zip(&outcomes) {
        if matches!(outcome, Err(e) if matches!(e.root(), Error::SentinelRead(_))) {
            sentinel_incidents += 1;
        }
        if !is_identity_run(tw, outcome) {
            failed_words += 1;
            if witnesses.len() < WITNESS_CAP {
                witnesses.push(Witness::from_outcome(tw, Phase::Sentinel, outcome));
            }
        }
    }

    RelationReport {
        relation: rel.word().to_string(),
        label: rel.label().to_string(),
        engine,
        max_len,
        verdict: Verdict::from_ok(failed_words == 0),
        stabilization_length,
        // symbols, anchor included, that must be visible before no step
        // depends on the continuation
        read_depth: safe_length.map(|l| l + 1),
        circular_words: circular.len(),
        skipped_illegal: illegal.len(),
        frontier_words,
        sentinel_words: words.len(),
        failed_words,
        sentinel_incidents,
        bowtie_incidents,
        witnesses,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmbeddingSummary {
    pub verdict: Verdict,
    pub engine: Engine,
    pub max_len: usize,
    pub reports: Vec<RelationReport>,
}

pub fn verify_embedding(
    relations: &[Relation],
    max_len: usize,
    engine: Engine,
    gens: &Generators,
) -> EmbeddingSummary {
    let reports: Vec<RelationReport> = relations
        .par_iter()
        .map(|rel| check_relation(rel, max_len, engine, gens))
        .collect();
    EmbeddingSummary {
        verdict: Verdict::from_ok(reports.iter().all(|r| r.verdict.is_pass())),
        engine,
        max_len,
        reports,
    }
}
