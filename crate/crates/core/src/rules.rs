//! Local rules `u(v)w:v'`: parsing, the exactly-once coverage check, and
//! application to flowed words.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{BlockRewrite, FlowedWord};
use crate::symbol::{word_string, Boundary, Symbol, VertexShift};

/// A literal symbol or a bit variable named `A`..`Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternToken {
    Lit(Symbol),
    Var(char),
}

impl PatternToken {
    fn parse(c: char) -> Option<PatternToken> {
        match c {
            '0' | '1' | '2' => Symbol::from_char(c).ok().map(PatternToken::Lit),
            'A'..='Z' => Some(PatternToken::Var(c)),
            _ => None,
        }
    }

    fn instantiate(self, vars: &[char], bits: u32) -> Symbol {
        match self {
            PatternToken::Lit(s) => s,
            PatternToken::Var(x) => {
                let i = vars.iter().position(|&v| v == x).expect("bound variable");
                Symbol::bit(bits >> i & 1 == 1)
            }
        }
    }
}

impl fmt::Display for PatternToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternToken::Lit(s) => write!(f, "{s}"),
            PatternToken::Var(x) => write!(f, "{x}"),
        }
    }
}

/// Rewrites `v` to `v_out` wherever it occurs between contexts `u` and `w`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mapping {
    pub u: Vec<PatternToken>,
    pub v: Vec<PatternToken>,
    pub w: Vec<PatternToken>,
    pub v_out: Vec<PatternToken>,
}

impl Mapping {
    pub fn parse(text: &str) -> std::result::Result<Mapping, String> {
        let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let (lhs, rhs) = text
            .split_once(':')
            .ok_or_else(|| "missing ':'".to_string())?;
        let open = lhs.find('(').ok_or_else(|| "missing '('".to_string())?;
        let close = lhs.find(')').ok_or_else(|| "missing ')'".to_string())?;
        if close < open || lhs[open + 1..].contains('(') || lhs[close + 1..].contains(')') {
            return Err("malformed parentheses".into());
        }
        let tokens = |s: &str| -> std::result::Result<Vec<PatternToken>, String> {
            s.chars()
                .map(|c| PatternToken::parse(c).ok_or_else(|| format!("illegal literal {c:?}")))
                .collect()
        };
        let mapping = Mapping {
            u: tokens(&lhs[..open])?,
            v: tokens(&lhs[open + 1..close])?,
            w: tokens(&lhs[close + 1..])?,
            v_out: tokens(rhs)?,
        };
        mapping.check()?;
        Ok(mapping)
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.v.is_empty() {
            return Err("empty rewritten part".into());
        }
        if self.v_out.is_empty() {
            return Err("empty replacement".into());
        }
        let bound = self.variables();
        for t in &self.v_out {
            if let PatternToken::Var(x) = t {
                if !bound.contains(x) {
                    return Err(format!("unbound variable {x} in replacement"));
                }
            }
        }
        Ok(())
    }

    /// Variables of `u v w` in order of first appearance.
    pub fn variables(&self) -> Vec<char> {
        let mut vars = Vec::new();
        for t in self.u.iter().chain(&self.v).chain(&self.w) {
            if let PatternToken::Var(x) = *t {
                if !vars.contains(&x) {
                    vars.push(x);
                }
            }
        }
        vars
    }

    pub fn window_len(&self) -> usize {
        self.u.len() + self.v.len() + self.w.len()
    }

    /// `v` is all bit variables and is copied unchanged.
    pub fn is_deep_neutral(&self) -> bool {
        self.v.iter().all(|t| matches!(t, PatternToken::Var(_))) && self.v == self.v_out
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |ts: &[PatternToken]| ts.iter().map(|t| t.to_string()).collect::<String>();
        write!(
            f,
            "{}({}){}:{}",
            join(&self.u),
            join(&self.v),
            join(&self.w),
            join(&self.v_out)
        )
    }
}

/// A mapping with every bit variable instantiated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundMapping {
    pub pattern: usize,
    /// `u v w` concatenated.
    pub window: Vec<Symbol>,
    pub u_len: usize,
    pub v_len: usize,
    pub output: Vec<Symbol>,
    /// Window positions whose value the mapping depends on.
    pub value_read: Vec<bool>,
    /// True when the output equals `v` letter for letter.
    pub identity: bool,
}

impl GroundMapping {
    pub fn v(&self) -> &[Symbol] {
        &self.window[self.u_len..self.u_len + self.v_len]
    }
}

/// A named list of mappings, with its ground instances precomputed.
#[derive(Debug, Clone)]
pub struct LocalRule {
    name: String,
    mappings: Vec<Mapping>,
    ground: Vec<GroundMapping>,
    by_first: [Vec<usize>; 3],
}

impl PartialEq for LocalRule {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.mappings == other.mappings
    }
}

impl LocalRule {
    pub fn new(name: impl Into<String>, mappings: Vec<Mapping>) -> Result<LocalRule> {
        let shift = VertexShift::standard();
        let mut ground = Vec::new();
        for (pattern, m) in mappings.iter().enumerate() {
            m.check().map_err(|msg| Error::Parse {
                line: pattern + 1,
                msg,
            })?;
            let vars = m.variables();
            let copy = m.v == m.v_out;
            let neutral = m.is_deep_neutral();
            let used: Vec<char> = m
                .v_out
                .iter()
                .filter_map(|t| match t {
                    PatternToken::Var(x) => Some(*x),
                    _ => None,
                })
                .collect();
            let tokens: Vec<PatternToken> = m.u.iter().chain(&m.v).chain(&m.w).copied().collect();
            let value_read: Vec<bool> = tokens
                .iter()
                .map(|t| match t {
                    _ if neutral => false,
                    PatternToken::Lit(_) => true,
                    PatternToken::Var(x) => !copy && used.contains(x),
                })
                .collect();
            let mut any_legal = false;
            for bits in 0..1u32 << vars.len() {
                let window: Vec<Symbol> =
                    tokens.iter().map(|t| t.instantiate(&vars, bits)).collect();
                if !shift.is_legal_word(&window, false)? {
                    continue;
                }
                let output: Vec<Symbol> =
                    m.v_out.iter().map(|t| t.instantiate(&vars, bits)).collect();
                if !shift.is_legal_word(&output, false)? {
                    return Err(Error::Parse {
                        line: pattern + 1,
                        msg: format!("replacement {} is not a legal word", word_string(&output)),
                    });
                }
                any_legal = true;
                let v = &window[m.u.len()..m.u.len() + m.v.len()];
                let identity = v == output.as_slice();
                ground.push(GroundMapping {
                    pattern,
                    u_len: m.u.len(),
                    v_len: m.v.len(),
                    identity,
                    output,
                    value_read: value_read.clone(),
                    window,
                });
            }
            if !any_legal {
                return Err(Error::Parse {
                    line: pattern + 1,
                    msg: format!("mapping {m} has no legal instance"),
                });
            }
        }
        let mut by_first: [Vec<usize>; 3] = Default::default();
        for (i, g) in ground.iter().enumerate() {
            if let Some(k) = g.v()[0].index() {
                by_first[k].push(i);
            }
        }
        Ok(LocalRule {
            name: name.into(),
            mappings,
            ground,
            by_first,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mappings(&self) -> &[Mapping] {
        &self.mappings
    }

    pub fn ground(&self) -> &[GroundMapping] {
        &self.ground
    }

    /// Longest `|u| + |v| + |w|` over all mappings.
    pub fn radius(&self) -> usize {
        self.mappings
            .iter()
            .map(Mapping::window_len)
            .max()
            .unwrap_or(0)
    }

    fn max_v(&self) -> usize {
        self.mappings.iter().map(|m| m.v.len()).max().unwrap_or(0)
    }

    /// Every mapping whose `v` is made of bit variables copies it unchanged.
    pub fn deep_bits_neutral(&self) -> bool {
        self.mappings
            .iter()
            .filter(|m| m.v.iter().all(|t| matches!(t, PatternToken::Var(_))))
            .all(Mapping::is_deep_neutral)
    }

    pub fn without_mapping(&self, index: usize) -> Result<LocalRule> {
        let mut mappings = self.mappings.clone();
        mappings.remove(index);
        LocalRule::new(format!("{}-without-{index}", self.name), mappings)
    }

    pub fn with_mapping(&self, mapping: Mapping) -> Result<LocalRule> {
        let mut mappings = self.mappings.clone();
        mappings.push(mapping);
        LocalRule::new(format!("{}-plus", self.name), mappings)
    }
}

impl fmt::Display for LocalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# {}", self.name)?;
        for m in &self.mappings {
            writeln!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Parses a rule file: one mapping per line, `#` starts a comment.
pub fn parse_local_rule(text: &str, name: &str) -> Result<LocalRule> {
    let mut mappings: Vec<Mapping> = Vec::new();
    let mut lines: Vec<usize> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let m = Mapping::parse(line).map_err(|msg| Error::Parse { line: i + 1, msg })?;
        if let Some(j) = mappings.iter().position(|x| *x == m) {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("duplicate mapping (first on line {})", lines[j]),
            });
        }
        mappings.push(m);
        lines.push(i + 1);
    }
    LocalRule::new(name, mappings).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line: lines[line - 1],
            msg,
        },
        other => other,
    })
}

const RULE_A: &str = "AB(C):C\n(2)2:201\n(200):201\n(201)A:200\n(201)2:2\n(21)2:21\n(21A):21A\n";
const RULE_B: &str =
    "AB(C):C\n(2)2:2\n(200):200\n(201)A:210\n(201)2:21\n(21)2:211\n(210)A:211\n(211):201\n";
const RULE_C: &str = "A0(B):B\n1(A):A\n(2)2:21\n(200):21\n(201):201\n(21)A:200\n(21)2:2\n";

/// The hand-written rule tables for the generators, plus the compiled rule
/// of the broken `c` variant.
pub fn builtin_generator(name: &str) -> Result<LocalRule> {
    match name {
        "a" => parse_local_rule(RULE_A, "a"),
        "b" => parse_local_rule(RULE_B, "b"),
        "c" => parse_local_rule(RULE_C, "c"),
        "c_broken_rule" | "c_broken" => {
            crate::veelike::compile_to_local_rule(&crate::veelike::builtin_bijection("c_broken")?)
        }
        other => Err(Error::UnknownName(other.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverWitness {
    pub window: String,
    pub offset: usize,
    pub count: usize,
    pub mappings: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub window_len: usize,
    pub windows_checked: usize,
    pub witnesses: Vec<CoverWitness>,
}

fn legal_words(shift: &VertexShift, len: usize) -> Vec<Vec<Symbol>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn go(shift: &VertexShift, len: usize, cur: &mut Vec<Symbol>, out: &mut Vec<Vec<Symbol>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for &s in shift.alphabet() {
            if cur.last().is_none_or(|&p| shift.allows(p, s)) {
                cur.push(s);
                go(shift, len, cur, out);
                cur.pop();
            }
        }
    }
    go(shift, len, &mut cur, &mut out);
    out
}

/// Counts, for the center cell of every legal window of length `2R - 1`,
/// how many ground mappings place it inside their rewritten part.
pub fn validate_partition(rule: &LocalRule, shift: &VertexShift) -> ValidationReport {
    let radius = rule.radius().max(1);
    let len = 2 * radius - 1;
    let center = radius - 1;
    let windows = legal_words(shift, len);
    let mut witnesses = Vec::new();
    for z in &windows {
        let mut hits = Vec::new();
        for g in rule.ground() {
            for k in 0..g.v_len {
                // v starts at center - k; the window must fit inside z
                let Some(start) = center.checked_sub(k) else {
                    continue;
                };
                let Some(lo) = start.checked_sub(g.u_len) else {
                    continue;
                };
                if lo + g.window.len() > len {
                    continue;
                }
                if z[lo..lo + g.window.len()] == g.window[..] {
                    hits.push(g.pattern);
                }
            }
        }
        if hits.len() != 1 {
            let count = hits.len();
            hits.sort_unstable();
            hits.dedup();
            witnesses.push(CoverWitness {
                window: word_string(z),
                offset: center,
                count,
                mappings: hits,
            });
        }
    }
    ValidationReport {
        ok: witnesses.is_empty(),
        window_len: len,
        windows_checked: windows.len(),
        witnesses,
    }
}

/// Result of one generator step, with what the step looked at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Applied {
    pub flow: FlowedWord,
    /// Positions (relative to letter 0, unwrapped) whose value was used.
    pub read: BTreeSet<isize>,
    /// Positions inside blocks that were actually changed.
    pub rewritten: BTreeSet<isize>,
}

impl Applied {
    /// Deepest position read or rewritten, counted from letter 0 inclusive.
    pub fn depth(&self) -> usize {
        self.read
            .iter()
            .chain(&self.rewritten)
            .max()
            .map_or(0, |&p| (p + 1).max(0) as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Look {
    Known(Symbol),
    /// Beyond a sentinel, or left of the word start.
    Any,
    /// Inside the bowtie continuation.
    Bit,
}

fn look(word: &[Symbol], boundary: Boundary, pos: isize) -> Look {
    let n = word.len() as isize;
    match boundary {
        Boundary::Circular => Look::Known(word[pos.rem_euclid(n) as usize]),
        _ if pos < 0 => Look::Any,
        _ if pos < n => Look::Known(word[pos as usize]),
        Boundary::Sentinel => Look::Any,
        Boundary::Bowtie => Look::Bit,
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    ground: usize,
    start: isize,
    /// Bowtie positions and the bit this instance needs there.
    needs: Vec<(isize, Symbol)>,
}

fn unknown_error(boundary: Boundary, pos: isize) -> Error {
    if pos < 0 {
        Error::ReadBeforeAnchor(pos)
    } else if boundary == Boundary::Bowtie {
        Error::BowtieRewritten(pos)
    } else {
        Error::SentinelRead(pos)
    }
}

/// Matches ground mapping `g` with its `v` starting at `start`.
fn try_match(
    rule: &LocalRule,
    ground: usize,
    word: &[Symbol],
    boundary: Boundary,
    start: isize,
) -> Result<Option<Candidate>> {
    let g = &rule.ground[ground];
    let lo = start - g.u_len as isize;
    let n = word.len() as isize;
    let mut needs = Vec::new();
    let mut any_at = None;
    for (k, &want) in g.window.iter().enumerate() {
        let pos = lo + k as isize;
        match look(word, boundary, pos) {
            Look::Known(s) if s == want => {}
            Look::Known(_) => return Ok(None),
            Look::Any => {
                any_at.get_or_insert(pos);
            }
            Look::Bit if !want.is_bit() => return Ok(None),
            Look::Bit => needs.push((pos, want)),
        }
    }
    if let Some(pos) = any_at {
        return Err(unknown_error(boundary, pos));
    }
    if boundary != Boundary::Circular {
        let v_end = start + g.v_len as isize;
        if v_end > n {
            return Err(unknown_error(boundary, n));
        }
    }
    Ok(Some(Candidate {
        ground,
        start,
        needs,
    }))
}

/// Selects, for every cell, the ground mapping covering it.
fn select_covers(rule: &LocalRule, word: &[Symbol], boundary: Boundary) -> Result<Vec<Candidate>> {
    let n = word.len();
    let circular = boundary == Boundary::Circular;
    let mut covers: Vec<Vec<Candidate>> = vec![Vec::new(); n];
    let first_start = if circular {
        0
    } else {
        1 - rule.max_v() as isize
    };
    for start in first_start..n as isize {
        let candidates: &[usize] = match look(word, boundary, start) {
            Look::Known(s) => match s.index() {
                Some(k) => &rule.by_first[k],
                None => continue,
            },
            _ => {
                // v starts left of the word: only relevant if it reaches a known cell
                for (gi, g) in rule.ground.iter().enumerate() {
                    if start + (g.v_len as isize) <= 0 {
                        continue;
                    }
                    if try_match(rule, gi, word, boundary, start)?.is_some() {
                        return Err(Error::ReadBeforeAnchor(start));
                    }
                }
                continue;
            }
        };
        for &gi in candidates {
            let g = &rule.ground[gi];
            if let Some(cand) = try_match(rule, gi, word, boundary, start)? {
                for k in 0..g.v_len as isize {
                    let cell = if circular {
                        (start + k).rem_euclid(n as isize)
                    } else {
                        start + k
                    };
                    covers[cell as usize].push(cand.clone());
                }
            }
        }
    }
    let mut chosen = Vec::with_capacity(n);
    for (cell, cands) in covers.into_iter().enumerate() {
        chosen.push(resolve(rule, cell as isize, cands)?);
    }
    Ok(chosen)
}

fn resolve(rule: &LocalRule, cell: isize, cands: Vec<Candidate>) -> Result<Candidate> {
    if cands.iter().all(|c| c.needs.is_empty()) {
        return match cands.len() {
            0 => Err(Error::NoCoveringMapping(cell)),
            1 => Ok(cands.into_iter().next().unwrap()),
            _ => Err(Error::AmbiguousCover(cell)),
        };
    }
    let mut positions: Vec<isize> = cands
        .iter()
        .flat_map(|c| c.needs.iter().map(|&(p, _)| p))
        .collect();
    positions.sort_unstable();
    positions.dedup();
    let key = |c: &Candidate| {
        let g = &rule.ground[c.ground];
        (g.pattern, c.start, g.output.clone())
    };
    let mut picked: Option<Candidate> = None;
    for bits in 0..1u64 << positions.len() {
        let value = |p: isize| {
            let i = positions.iter().position(|&q| q == p).unwrap();
            Symbol::bit(bits >> i & 1 == 1)
        };
        let mut sel = cands
            .iter()
            .filter(|c| c.needs.iter().all(|&(p, s)| value(p) == s));
        let first = sel.next().ok_or(Error::NoCoveringMapping(cell))?;
        if sel.next().is_some() {
            return Err(Error::AmbiguousCover(cell));
        }
        match &picked {
            None => picked = Some(first.clone()),
            Some(p) if key(p) == key(first) => {}
            Some(_) => return Err(Error::BowtieDependent(cell)),
        }
    }
    Ok(picked.expect("at least one assignment"))
}

/// Applies a local rule, recording what was read and rewritten.
pub fn apply_rule_traced(rule: &LocalRule, fw: &FlowedWord) -> Result<Applied> {
    let word = fw.word();
    let boundary = fw.boundary();
    let n = word.len() as isize;
    let chosen = select_covers(rule, &word, boundary)?;
    let origin = match boundary {
        Boundary::Circular if chosen[0].start != 0 => chosen[0].start - n,
        _ => chosen[0].start,
    };
    if origin > 0 {
        return Err(Error::AmbiguousCover(0));
    }
    let mut plan = Vec::new();
    let mut read = BTreeSet::new();
    let mut rewritten = BTreeSet::new();
    let mut pos = origin;
    while pos < origin + n {
        let cell = if boundary == Boundary::Circular {
            pos.rem_euclid(n)
        } else {
            pos
        };
        let cand = &chosen[cell as usize];
        if cand.start.rem_euclid(n) != pos.rem_euclid(n) {
            return Err(Error::AmbiguousCover(cell));
        }
        let g = &rule.ground[cand.ground];
        let lo = pos - g.u_len as isize;
        for (k, &r) in g.value_read.iter().enumerate() {
            if r {
                read.insert(lo + k as isize);
            }
        }
        if !g.identity {
            rewritten.extend(pos..pos + g.v_len as isize);
        }
        plan.push(BlockRewrite {
            start: pos,
            len: g.v_len,
            output: g.output.clone(),
        });
        pos += g.v_len as isize;
    }
    if pos != origin + n {
        return Err(Error::AmbiguousCover(origin.rem_euclid(n)));
    }
    let flow = fw.rewrite(&plan)?;
    Ok(Applied {
        flow,
        read,
        rewritten,
    })
}

pub fn apply_rule(rule: &LocalRule, fw: &FlowedWord) -> Result<FlowedWord> {
    apply_rule_traced(rule, fw).map(|a| a.flow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{identity_flow, int, rat, Piece};
    use crate::symbol::{parse_symbols, AnchoredWord};

    fn fw(s: &str) -> FlowedWord {
        identity_flow(&AnchoredWord::parse(s).unwrap())
    }

    fn spans(f: &FlowedWord) -> Vec<(crate::flow::Rational, crate::flow::Rational)> {
        f.pieces().into_iter().map(|p| (p.c, p.d)).collect()
    }

    #[test]
    fn parse_examples() {
        let m = Mapping::parse("AB(G):G").unwrap();
        assert_eq!(m.u, vec![PatternToken::Var('A'), PatternToken::Var('B')]);
        assert_eq!(m.v, vec![PatternToken::Var('G')]);
        assert!(m.w.is_empty());
        assert_eq!(m.v_out, vec![PatternToken::Var('G')]);

        let m = Mapping::parse("(201)A:200").unwrap();
        assert!(m.u.is_empty());
        assert_eq!(m.v.len(), 3);
        assert_eq!(m.w, vec![PatternToken::Var('A')]);
        assert_eq!(m.to_string(), "(201)A:200");

        assert!(Mapping::parse("(2)2:xyz")
            .unwrap_err()
            .contains("illegal literal"));
        assert!(Mapping::parse("()2:2").unwrap_err().contains("empty"));
        assert!(Mapping::parse("(2)2:B").unwrap_err().contains("unbound"));
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = parse_local_rule("# comment\n(2)2:201\n\n(2)2:201\n", "dup").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
        let err = parse_local_rule("(2)2:201\n(2)2:x\n", "bad").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn printer_round_trips() {
        for g in ["a", "b", "c"] {
            let rule = builtin_generator(g).unwrap();
            let again = parse_local_rule(&rule.to_string(), g).unwrap();
            assert_eq!(again, rule);
        }
    }

    #[test]
    fn builtin_tables() {
        let a = builtin_generator("a").unwrap();
        assert_eq!(a.mappings().len(), 7);
        assert_eq!(builtin_generator("b").unwrap().mappings().len(), 8);
        assert_eq!(
            builtin_generator("b").unwrap().mappings()[7].to_string(),
            "(211):201"
        );
        let c = builtin_generator("c").unwrap();
        assert_eq!(c.mappings().len(), 7);
        assert_eq!(c.mappings()[0].to_string(), "A0(B):B");
        assert_eq!(c.mappings()[1].to_string(), "1(A):A");
        assert!(matches!(builtin_generator("d"), Err(Error::UnknownName(_))));
        for g in ["a", "b", "c"] {
            assert!(builtin_generator(g).unwrap().deep_bits_neutral());
        }
    }

    #[test]
    fn builtins_partition() {
        let shift = VertexShift::standard();
        for g in ["a", "b", "c"] {
            let report = validate_partition(&builtin_generator(g).unwrap(), &shift);
            assert!(
                report.ok,
                "{g}: {:?}",
                &report.witnesses[..report.witnesses.len().min(3)]
            );
        }
    }

    #[test]
    fn deleting_21_2_uncovers_an_anchor() {
        let a = builtin_generator("a").unwrap();
        let idx = a
            .mappings()
            .iter()
            .position(|m| m.to_string() == "(21)2:21")
            .unwrap();
        let report = validate_partition(&a.without_mapping(idx).unwrap(), &VertexShift::standard());
        assert!(!report.ok);
        assert!(report
            .witnesses
            .iter()
            .any(|w| w.count == 0 && w.window[w.offset..].starts_with("212")));
    }

    #[test]
    fn duplicate_cover_is_reported() {
        let a = builtin_generator("a").unwrap();
        let dup = a.with_mapping(Mapping::parse("(2)2:2").unwrap()).unwrap();
        let report = validate_partition(&dup, &VertexShift::standard());
        assert!(report.witnesses.iter().any(|w| w.count == 2));
    }

    #[test]
    fn apply_examples() {
        let a = builtin_generator("a").unwrap();
        let out = apply_rule(&a, &fw("2")).unwrap();
        assert_eq!(out.word_string(), "201");
        assert_eq!(
            out.pieces(),
            vec![
                Piece::new(Symbol::S2, int(0), int(1), int(0), rat(1, 3)),
                Piece::new(Symbol::S0, int(0), int(1), rat(1, 3), rat(2, 3)),
                Piece::new(Symbol::S1, int(0), int(1), rat(2, 3), int(1)),
            ]
        );

        let b = builtin_generator("b").unwrap();
        let out = apply_rule(&b, &fw("21")).unwrap();
        assert_eq!(out.word_string(), "211");
        assert_eq!(
            spans(&out),
            vec![
                (int(0), rat(2, 3)),
                (rat(2, 3), rat(4, 3)),
                (rat(4, 3), int(2))
            ]
        );

        let out = apply_rule(&a, &fw("201")).unwrap();
        assert_eq!(out.word_string(), "2");
        assert_eq!(spans(&out), vec![(int(0), int(3))]);
    }

    #[test]
    fn sentinel_is_never_read_silently() {
        let a = builtin_generator("a").unwrap();
        assert!(matches!(
            apply_rule(&a, &fw("203")),
            Err(Error::SentinelRead(_))
        ));
        assert!(matches!(
            apply_rule(&a, &fw("2013")),
            Err(Error::SentinelRead(_))
        ));
        // deep enough: the sentinel stays out of reach
        assert!(apply_rule(&a, &fw("20113")).is_ok());
    }

    #[test]
    fn bowtie_semantics() {
        let a = builtin_generator("a").unwrap();
        // (201)A:200 picks the same rewrite for either continuation bit
        let out = apply_rule_traced(&a, &fw("201~")).unwrap();
        assert_eq!(out.flow.word_string(), "200");
        assert_eq!(out.depth(), 3);
        // the block 2 0 ? would have to rewrite the bowtie
        assert!(matches!(
            apply_rule(&a, &fw("20~")),
            Err(Error::BowtieRewritten(_))
        ));
        // 2 ? : (2)2 is impossible, (200)/(201)/(21..) all reach into the bowtie
        assert!(matches!(
            apply_rule(&a, &fw("2~")),
            Err(Error::BowtieRewritten(_))
        ));

        // a right-context literal on the bowtie makes the choice value-dependent
        let dependent = parse_local_rule("AB(C):C\n(2)2:2\n(20)0:20\n(20)1:21\n(21):21\n", "dep");
        let rule = dependent.unwrap();
        assert!(matches!(
            apply_rule(&rule, &fw("20~")),
            Err(Error::BowtieDependent(_))
        ));
    }

    #[test]
    fn incomplete_rules_fail_to_apply() {
        let a = builtin_generator("a").unwrap();
        let idx = a
            .mappings()
            .iter()
            .position(|m| m.to_string() == "(21)2:21")
            .unwrap();
        let broken = a.without_mapping(idx).unwrap();
        assert_eq!(
            apply_rule(&broken, &fw("21")),
            Err(Error::NoCoveringMapping(0))
        );
        let dup = a.with_mapping(Mapping::parse("(2)2:2").unwrap()).unwrap();
        assert_eq!(apply_rule(&dup, &fw("2")), Err(Error::AmbiguousCover(0)));
    }

    #[test]
    fn wrapped_blocks_are_rewritten_in_place() {
        // rotate 2 1 so the block 21 straddles the base point
        let a = builtin_generator("b").unwrap();
        let rotated = fw("21").rotate(&int(1)).unwrap();
        assert_eq!(rotated.word_string(), "12");
        let out = apply_rule(&a, &rotated).unwrap();
        let direct = apply_rule(&a, &fw("21")).unwrap();
        assert_eq!(out.rotate(&(out.span() - int(1))).unwrap(), direct);
        assert_eq!(parse_symbols("112").unwrap(), out.word());
    }
}
