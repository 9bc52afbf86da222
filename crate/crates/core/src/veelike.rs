//! Prefix-code bijections of Cantor space and their action on anchored words.
//!
//! An anchored block is an anchor `2` followed by the maximal run of bits
//! after it. If a domain word `p` is a proper prefix of the visible run, the
//! sub-block `2p` becomes `2q`. Otherwise the run is read as a finite-support
//! point (padded with zeros), mapped, stripped of trailing zeros, and written
//! over the whole block. Rewrites always have constant slope.

use std::collections::BTreeSet;
use std::fmt;

use num::{BigInt, BigRational, One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{BlockRewrite, FlowedWord};
use crate::rules::{validate_partition, Applied, LocalRule, Mapping, PatternToken};
use crate::symbol::{Boundary, Symbol, VertexShift};

/// A bijection between two complete prefix codes of `{0,1}^N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixBijection {
    name: String,
    pairs: Vec<(String, String)>,
}

impl PrefixBijection {
    /// Stores the pairs as given; see [`validate_bijection`].
    pub fn new(name: impl Into<String>, pairs: Vec<(String, String)>) -> PrefixBijection {
        PrefixBijection {
            name: name.into(),
            pairs,
        }
    }

    pub fn from_strs(name: &str, pairs: &[(&str, &str)]) -> PrefixBijection {
        Self::new(
            name,
            pairs
                .iter()
                .map(|(p, q)| (p.to_string(), q.to_string()))
                .collect(),
        )
    }

    /// Parses `p -> q` lines; `#` starts a comment.
    pub fn parse(text: &str, name: &str) -> Result<PrefixBijection> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (p, q) = line.split_once("->").ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "expected `p -> q`".into(),
            })?;
            let (p, q) = (p.trim(), q.trim());
            for c in p.chars().chain(q.chars()) {
                if c != '0' && c != '1' {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("illegal bit {c:?}"),
                    });
                }
            }
            pairs.push((p.to_string(), q.to_string()));
        }
        Ok(Self::new(name, pairs))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    /// Longest domain word.
    pub fn depth(&self) -> usize {
        self.pairs.iter().map(|(p, _)| p.len()).max().unwrap_or(0)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let check = validate_bijection(self);
        if check.ok {
            Ok(())
        } else {
            Err(Error::InvalidBijection(check.diagnostics.join("; ")))
        }
    }

    /// The pair whose domain word is a prefix of `bits`, if any.
    fn prefix_of(&self, bits: &str) -> Option<&(String, String)> {
        self.pairs
            .iter()
            .find(|(p, _)| bits.starts_with(p.as_str()))
    }

    pub fn inverse(&self) -> PrefixBijection {
        Self::new(
            format!("{}^-1", self.name),
            self.pairs
                .iter()
                .map(|(p, q)| (q.clone(), p.clone()))
                .collect(),
        )
    }
}

impl fmt::Display for PrefixBijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# {}", self.name)?;
        for (p, q) in &self.pairs {
            writeln!(f, "{p} -> {q}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BijectionCheck {
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

fn kraft_sum(words: &[&str]) -> BigRational {
    words.iter().fold(BigRational::zero(), |acc, w| {
        acc + BigRational::new(BigInt::one(), BigInt::one() << w.len())
    })
}

fn code_problems(side: &str, words: &[&str], out: &mut Vec<String>) {
    for (i, a) in words.iter().enumerate() {
        if a.chars().any(|c| c != '0' && c != '1') {
            out.push(format!("{side} word {a:?} is not a bit word"));
        }
        for b in &words[i + 1..] {
            if a.starts_with(b) || b.starts_with(a) {
                out.push(format!("{side} words {a:?} and {b:?} are not prefix-free"));
            }
        }
    }
    let sum = kraft_sum(words);
    if !sum.is_one() {
        out.push(format!("{side} Kraft sum is {sum}, not 1"));
    }
}

/// Both sides must be complete prefix codes; pairing them is then a bijection.
pub fn validate_bijection(bij: &PrefixBijection) -> BijectionCheck {
    let mut diagnostics = Vec::new();
    if bij.pairs.is_empty() {
        diagnostics.push("no pairs".to_string());
    }
    let domain: Vec<&str> = bij.pairs.iter().map(|(p, _)| p.as_str()).collect();
    let range: Vec<&str> = bij.pairs.iter().map(|(_, q)| q.as_str()).collect();
    code_problems("domain", &domain, &mut diagnostics);
    code_problems("range", &range, &mut diagnostics);
    BijectionCheck {
        ok: diagnostics.is_empty(),
        diagnostics,
    }
}

/// Image of `w 0^inf`, with trailing zeros removed.
pub fn finite_support_image(bij: &PrefixBijection, w: &str) -> String {
    let depth = bij.depth().max(w.len());
    let padded = format!("{w:0<depth$}");
    let (p, q) = bij.prefix_of(&padded).expect("complete prefix code");
    let mut image = q.clone();
    image.push_str(&padded[p.len()..]);
    image.trim_end_matches('0').to_string()
}

/// The built-in generators and the broken `c` variant.
pub fn builtin_bijection(name: &str) -> Result<PrefixBijection> {
    let pairs: &[(&str, &str)] = match name {
        "a" => &[("00", "01"), ("01", "00"), ("1", "1")],
        "b" => &[("01", "10"), ("10", "11"), ("11", "01"), ("00", "00")],
        "c" => &[("00", "1"), ("1", "00"), ("01", "01")],
        "c_broken" => &[("000", "10"), ("001", "11"), ("1", "00"), ("01", "01")],
        other => return Err(Error::UnknownName(other.to_string())),
    };
    Ok(PrefixBijection::from_strs(name, pairs))
}

fn bits_of(symbols: &[Symbol]) -> String {
    symbols.iter().map(|s| s.as_char()).collect()
}

fn symbols_of(bits: &str) -> Vec<Symbol> {
    bits.chars().map(|c| Symbol::bit(c == '1')).collect()
}

/// Applies the bijection to every anchored block, recording what was read.
pub fn anchored_apply_traced(bij: &PrefixBijection, fw: &FlowedWord) -> Result<Applied> {
    let word = fw.word();
    let boundary = fw.boundary();
    let circular = boundary == Boundary::Circular;
    let n = word.len() as isize;
    let at = |pos: isize| -> Symbol {
        if circular {
            word[pos.rem_euclid(n) as usize]
        } else {
            word[pos as usize]
        }
    };
    let anchors: Vec<isize> = (0..n).filter(|&i| word[i as usize] == Symbol::S2).collect();
    let mut plan = Vec::new();
    let mut read = BTreeSet::new();
    let mut rewritten = BTreeSet::new();
    let identity = |pos: isize, plan: &mut Vec<BlockRewrite>| {
        plan.push(BlockRewrite {
            start: pos,
            len: 1,
            output: vec![at(pos)],
        });
    };
    if anchors.is_empty() {
        if !circular {
            return Err(Error::ReadBeforeAnchor(0));
        }
        for pos in 0..n {
            identity(pos, &mut plan);
        }
        return Ok(Applied {
            flow: fw.rewrite(&plan)?,
            read,
            rewritten,
        });
    }
    let origin = if anchors[0] == 0 {
        0
    } else if circular {
        anchors[anchors.len() - 1] - n
    } else {
        return Err(Error::ReadBeforeAnchor(0));
    };
    let mut pos = origin;
    while pos < origin + n {
        debug_assert_eq!(at(pos), Symbol::S2);
        // the visible run of bits after this anchor
        let mut end = pos + 1;
        while end < origin + n && at(end) != Symbol::S2 {
            end += 1;
        }
        let run: Vec<Symbol> = (pos + 1..end).map(at).collect();
        let x = bits_of(&run);
        // what follows the run: an anchor, or the word's terminator
        let terminated_by_anchor = circular || end < n;
        let found = bij.prefix_of(&x);
        let proper = match found {
            Some((p, _)) => {
                p.len() < x.len() || boundary == Boundary::Bowtie && !terminated_by_anchor
            }
            None => false,
        };
        if proper {
            let (p, q) = found.unwrap();
            let len = p.len() + 1;
            read.extend(pos..pos + len as isize);
            let mut output = vec![Symbol::S2];
            output.extend(symbols_of(q));
            if p != q {
                rewritten.extend(pos..pos + len as isize);
            }
            plan.push(BlockRewrite {
                start: pos,
                len,
                output,
            });
            for k in pos + len as isize..end {
                identity(k, &mut plan);
            }
        } else {
            if !terminated_by_anchor {
                return Err(match boundary {
                    Boundary::Bowtie => Error::BowtieRewritten(end),
                    _ => Error::SentinelRead(end),
                });
            }
            let image = finite_support_image(bij, &x);
            read.extend(pos..=end);
            if image != x {
                rewritten.extend(pos..end);
            }
            let mut output = vec![Symbol::S2];
            output.extend(symbols_of(&image));
            plan.push(BlockRewrite {
                start: pos,
                len: (end - pos) as usize,
                output,
            });
        }
        pos = end;
    }
    Ok(Applied {
        flow: fw.rewrite(&plan)?,
        read,
        rewritten,
    })
}

pub fn anchored_apply(bij: &PrefixBijection, fw: &FlowedWord) -> Result<FlowedWord> {
    bij.ensure_valid()?;
    anchored_apply_traced(bij, fw).map(|a| a.flow)
}

fn lits(s: &str) -> Vec<PatternToken> {
    s.chars()
        .map(|c| PatternToken::Lit(Symbol::from_char(c).expect("bit or anchor")))
        .collect()
}

const BIT: PatternToken = PatternToken::Var('A');

/// True when a bit whose left neighbours are exactly the bits `u` (with an
/// unknown stretch further left) must lie beyond any rewritten block.
fn bits_prove_beyond(bij: &PrefixBijection, u: &str) -> bool {
    let m = bij.depth();
    if u.len() >= m {
        return true;
    }
    (0..m - u.len()).all(|extra| {
        (0..1u32 << extra).all(|s| {
            let prefix: String = (0..extra)
                .map(|i| if s >> i & 1 == 1 { '1' } else { '0' })
                .collect();
            bij.prefix_of(&(prefix + u)).is_some()
        })
    })
}

/// Turns a prefix bijection into a local rule with the same action.
pub fn compile_to_local_rule(bij: &PrefixBijection) -> Result<LocalRule> {
    bij.ensure_valid()?;
    let m = bij.depth();
    let mut mappings: Vec<Mapping> = Vec::new();
    let ends_legally_before_anchor = |w: &str| !w.ends_with('0');

    // Deep bits: minimal left contexts that place the bit beyond any block.
    let mut contexts: Vec<String> = Vec::new();
    if bij.prefix_of("").is_some() {
        contexts.push(String::new());
    } else {
        for len in 1..=m {
            for s in 0..1u32 << len {
                let u: String = (0..len)
                    .rev()
                    .map(|i| if s >> i & 1 == 1 { '1' } else { '0' })
                    .collect();
                let minimal = (1..len).all(|i| !bits_prove_beyond(bij, &u[i..]));
                if minimal && bits_prove_beyond(bij, &u) {
                    contexts.push(u);
                }
            }
        }
        for len in 1..m {
            for s in 0..1u32 << len {
                let y: String = (0..len)
                    .rev()
                    .map(|i| if s >> i & 1 == 1 { '1' } else { '0' })
                    .collect();
                let minimal = (0..len).all(|i| !bits_prove_beyond(bij, &y[i..]));
                if minimal && bij.prefix_of(&y).is_some() {
                    contexts.push(format!("2{y}"));
                }
            }
        }
    }
    for u in &contexts {
        mappings.push(Mapping {
            u: lits(u),
            v: vec![BIT],
            w: vec![],
            v_out: vec![BIT],
        });
    }

    // Blocks that contain a whole domain word.
    for (p, q) in bij.pairs() {
        let block = lits(&format!("2{p}"));
        let out = lits(&format!("2{q}"));
        let fallback = lits(&format!("2{}", finite_support_image(bij, p)));
        if !ends_legally_before_anchor(p) || fallback == out {
            mappings.push(Mapping {
                u: vec![],
                v: block,
                w: vec![],
                v_out: out,
            });
        } else {
            mappings.push(Mapping {
                u: vec![],
                v: block.clone(),
                w: vec![BIT],
                v_out: out,
            });
            mappings.push(Mapping {
                u: vec![],
                v: block,
                w: lits("2"),
                v_out: fallback,
            });
        }
    }

    // Runs too short to contain a domain word, closed by the next anchor.
    let mut short: Vec<String> = Vec::new();
    for (p, _) in bij.pairs() {
        for k in 0..p.len() {
            let w = &p[..k];
            if ends_legally_before_anchor(w) && !short.iter().any(|s| s == w) {
                short.push(w.to_string());
            }
        }
    }
    short.sort_by(|x, y| x.len().cmp(&y.len()).then(x.cmp(y)));
    for w in &short {
        mappings.push(Mapping {
            u: vec![],
            v: lits(&format!("2{w}")),
            w: lits("2"),
            v_out: lits(&format!("2{}", finite_support_image(bij, w))),
        });
    }

    let rule = LocalRule::new(format!("compiled-{}", bij.name()), mappings)?;
    let report = validate_partition(&rule, &VertexShift::standard());
    if !report.ok {
        return Err(Error::Compile(report.witnesses.len()));
    }
    Ok(rule)
}
