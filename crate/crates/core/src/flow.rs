//! Flowed words: a word together with the piecewise-linear reparametrization
//! of the flow that has accumulated on it.
//!
//! Each letter owns a tile `[0, 1]`. A piece `(s, a, b, c, d)` says that the
//! portion `[a, b]` of the tile of letter `s` is laid out linearly over the
//! physical interval `[c, d]`. The physical axis is the flow line of the
//! configuration the computation started from, so composing rewrites composes
//! the PL maps.
//!
//! Internally every letter keeps its segments in unwrapped physical
//! coordinates: for a circular word the first letter may start before 0 (it
//! straddles the base point), and [`FlowedWord::pieces`] folds that part back
//! to the end of `[0, span)`.

use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::symbol::{word_string, AnchoredWord, Boundary, Symbol, VertexShift};

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats as `num/den`, always with an explicit denominator.
pub fn rational_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => Some(Rational::from_integer(text.parse().ok()?)),
    }
}

/// One linear piece of the layout.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Piece {
    pub symbol: Symbol,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl Piece {
    pub fn new(symbol: Symbol, a: Rational, b: Rational, c: Rational, d: Rational) -> Self {
        Piece { symbol, a, b, c, d }
    }

    /// Physical length per unit of tile.
    pub fn stretch(&self) -> Rational {
        (&self.d - &self.c) / (&self.b - &self.a)
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},{})",
            self.symbol, self.a, self.b, self.c, self.d
        )
    }
}

impl Serialize for Piece {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(5))?;
        match self.symbol.index() {
            Some(i) => seq.serialize_element(&i)?,
            None => seq.serialize_element(&self.symbol.as_char().to_string())?,
        }
        for r in [&self.a, &self.b, &self.c, &self.d] {
            seq.serialize_element(&rational_string(r))?;
        }
        seq.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Segment {
    a: Rational,
    b: Rational,
    c: Rational,
    d: Rational,
}

impl Segment {
    fn shifted(&self, by: &Rational) -> Segment {
        Segment {
            a: self.a.clone(),
            b: self.b.clone(),
            c: &self.c + by,
            d: &self.d + by,
        }
    }

    fn collinear_with(&self, next: &Segment) -> bool {
        self.b == next.a
            && self.d == next.c
            && (&self.b - &self.a) * (&next.d - &next.c)
                == (&next.b - &next.a) * (&self.d - &self.c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Letter {
    symbol: Symbol,
    segments: Vec<Segment>,
}

impl Letter {
    fn start(&self) -> &Rational {
        &self.segments[0].c
    }

    fn end(&self) -> &Rational {
        &self.segments[self.segments.len() - 1].d
    }

    fn shifted(&self, by: &Rational) -> Letter {
        Letter {
            symbol: self.symbol,
            segments: self.segments.iter().map(|s| s.shifted(by)).collect(),
        }
    }

    fn merged(&self) -> Letter {
        let mut out: Vec<Segment> = Vec::with_capacity(self.segments.len());
        for seg in &self.segments {
            match out.last_mut() {
                Some(prev) if prev.collinear_with(seg) => {
                    prev.b = seg.b.clone();
                    prev.d = seg.d.clone();
                }
                _ => out.push(seg.clone()),
            }
        }
        Letter {
            symbol: self.symbol,
            segments: out,
        }
    }
}

/// One block of a rewrite plan: letters `start .. start + len` (indices taken
/// cyclically for circular words, `start` may be negative) become `output`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockRewrite {
    pub start: isize,
    pub len: usize,
    pub output: Vec<Symbol>,
}

/// A word with its accumulated flow distortion.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlowedWord {
    boundary: Boundary,
    letters: Vec<Letter>,
}

/// The undistorted layout: letter `k` occupies `[k, k + 1]`.
pub fn identity_flow(word: &AnchoredWord) -> FlowedWord {
    FlowedWord::unit_layout(word.letters(), word.boundary())
}

impl FlowedWord {
    fn unit_layout(symbols: &[Symbol], boundary: Boundary) -> FlowedWord {
        let letters = symbols
            .iter()
            .enumerate()
            .map(|(k, &symbol)| Letter {
                symbol,
                segments: vec![Segment {
                    a: Rational::zero(),
                    b: Rational::one(),
                    c: int(k as i64),
                    d: int(k as i64 + 1),
                }],
            })
            .collect();
        FlowedWord { boundary, letters }
    }

    /// Builds a flowed word from its serialized piece list and validates every
    /// invariant. For circular words the list may begin in the middle of the
    /// first letter, whose remaining pieces then close the list.
    pub fn from_pieces(
        word: &[Symbol],
        boundary: Boundary,
        pieces: &[Piece],
    ) -> Result<FlowedWord> {
        let bad = |msg: &str| Error::Invariant(msg.to_string());
        if pieces.is_empty() || word.is_empty() {
            return Err(bad("empty piece list"));
        }
        if !pieces[0].c.is_zero() {
            return Err(bad("physical span must start at 0"));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.a >= Rational::zero() && p.a < p.b && p.b <= Rational::one()) {
                return Err(Error::Invariant(format!("piece {i} has bad tile interval")));
            }
            if p.c >= p.d {
                return Err(Error::Invariant(format!(
                    "piece {i} has empty physical interval"
                )));
            }
            if i > 0 && pieces[i - 1].d != p.c {
                return Err(Error::Invariant(format!("piece {i} is not contiguous")));
            }
        }
        let mut groups: Vec<Vec<&Piece>> = Vec::new();
        for p in pieces {
            let start_new = match groups.last() {
                None => true,
                Some(g) => g[g.len() - 1].b.is_one(),
            };
            if start_new {
                groups.push(vec![p]);
            } else {
                let g = groups.last_mut().unwrap();
                if g[g.len() - 1].b != p.a || g[g.len() - 1].symbol != p.symbol {
                    return Err(bad("pieces of one letter do not chain"));
                }
                g.push(p);
            }
        }
        let seam = !pieces[0].a.is_zero();
        if seam && boundary != Boundary::Circular {
            return Err(bad("only circular words may start inside a tile"));
        }
        let span = pieces[pieces.len() - 1].d.clone();
        let to_letter = |g: &[&Piece], shift: &Rational| Letter {
            symbol: g[0].symbol,
            segments: g
                .iter()
                .map(|p| Segment {
                    a: p.a.clone(),
                    b: p.b.clone(),
                    c: &p.c + shift,
                    d: &p.d + shift,
                })
                .collect(),
        };
        let mut letters = Vec::new();
        if seam {
            let head = groups.pop().unwrap();
            if head[0].a != Rational::zero()
                || head[head.len() - 1].b != pieces[0].a
                || head[0].symbol != pieces[0].symbol
            {
                return Err(bad("seam letter does not close up"));
            }
            let mut first = to_letter(&head, &-&span);
            let mut tail = to_letter(&groups[0], &Rational::zero())
                .segments
                .into_iter();
            // the cut at the base point is not a break of the layout
            let joint = tail.next().unwrap();
            let last = first.segments.last_mut().unwrap();
            if last.collinear_with(&joint) {
                last.b = joint.b;
                last.d = joint.d;
            } else {
                first.segments.push(joint);
            }
            first.segments.extend(tail);
            letters.push(first);
            for g in &groups[1..] {
                letters.push(to_letter(g, &Rational::zero()));
            }
        } else {
            for g in &groups {
                letters.push(to_letter(g, &Rational::zero()));
            }
        }
        for (i, l) in letters.iter().enumerate() {
            if !l.segments[0].a.is_zero() || !l.segments[l.segments.len() - 1].b.is_one() {
                return Err(Error::Invariant(format!(
                    "letter {i} does not cover its tile"
                )));
            }
        }
        let fw = FlowedWord { boundary, letters };
        if fw.word() != word {
            return Err(Error::Invariant(format!(
                "pieces spell {} but the word is {}",
                word_string(&fw.word()),
                word_string(word)
            )));
        }
        fw.check()?;
        Ok(fw)
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn word(&self) -> Vec<Symbol> {
        self.letters.iter().map(|l| l.symbol).collect()
    }

    pub fn word_string(&self) -> String {
        word_string(&self.word())
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn span(&self) -> Rational {
        self.letters[self.letters.len() - 1].end() - self.letters[0].start()
    }

    /// Unwrapped physical interval of each letter.
    pub fn letter_intervals(&self) -> Vec<(Rational, Rational)> {
        self.letters
            .iter()
            .map(|l| (l.start().clone(), l.end().clone()))
            .collect()
    }

    /// Pieces of letter `i` in unwrapped coordinates.
    pub fn letter_pieces(&self, i: usize) -> Vec<Piece> {
        let l = &self.letters[i];
        l.segments
            .iter()
            .map(|s| Piece::new(l.symbol, s.a.clone(), s.b.clone(), s.c.clone(), s.d.clone()))
            .collect()
    }

    /// Number of piece boundaries lying strictly inside a tile.
    pub fn intra_tile_breaks(&self) -> usize {
        self.letters.iter().map(|l| l.segments.len() - 1).sum()
    }

    /// Physical positions of the intra-tile breaks, folded into `[0, span)`.
    pub fn break_points(&self) -> Vec<Rational> {
        let span = self.span();
        let mut points: Vec<Rational> = self
            .letters
            .iter()
            .flat_map(|l| {
                l.segments[..l.segments.len() - 1]
                    .iter()
                    .map(|s| s.d.clone())
            })
            .map(|x| if x.is_negative() { x + &span } else { x })
            .collect();
        points.sort();
        points
    }

    /// The serialized piece list, physically ordered over `[0, span]`.
    pub fn pieces(&self) -> Vec<Piece> {
        let span = self.span();
        let mut front = Vec::new();
        let mut back = Vec::new();
        for l in &self.letters {
            for s in &l.segments {
                let piece = |a: &Rational, b: &Rational, c: &Rational, d: &Rational| {
                    Piece::new(l.symbol, a.clone(), b.clone(), c.clone(), d.clone())
                };
                if !s.c.is_negative() {
                    front.push(piece(&s.a, &s.b, &s.c, &s.d));
                } else if !s.d.is_positive() {
                    back.push(piece(&s.a, &s.b, &(&s.c + &span), &(&s.d + &span)));
                } else {
                    let cut = &s.a + (-&s.c) * (&s.b - &s.a) / (&s.d - &s.c);
                    back.push(piece(&s.a, &cut, &(&s.c + &span), &span));
                    front.push(piece(&cut, &s.b, &Rational::zero(), &s.d));
                }
            }
        }
        front.extend(back);
        front
    }

    /// Validates contiguity, tile coverage, positive slopes and legality.
    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(msg));
        if self.letters.is_empty() {
            return fail("no letters".into());
        }
        let zero = Rational::zero();
        let first = self.letters[0].start();
        if first.is_positive() || (self.boundary != Boundary::Circular && !first.is_zero()) {
            return fail("letter 0 must contain the base point".into());
        }
        if !self.letters[0].end().is_positive() {
            return fail("letter 0 must contain the base point".into());
        }
        let mut prev_end: Option<&Rational> = None;
        for (i, l) in self.letters.iter().enumerate() {
            if l.segments.is_empty() {
                return fail(format!("letter {i} has no pieces"));
            }
            if !l.segments[0].a.is_zero() || !l.segments[l.segments.len() - 1].b.is_one() {
                return fail(format!("letter {i} does not cover its tile"));
            }
            for (k, s) in l.segments.iter().enumerate() {
                if s.a >= s.b || s.a < zero || s.b > Rational::one() {
                    return fail(format!("letter {i} piece {k} has a bad tile interval"));
                }
                if s.c >= s.d {
                    return fail(format!("letter {i} piece {k} has a non-positive slope"));
                }
                if k > 0 && (l.segments[k - 1].b != s.a || l.segments[k - 1].d != s.c) {
                    return fail(format!("letter {i} piece {k} does not chain"));
                }
                if let Some(end) = prev_end {
                    if k == 0 && *end != s.c {
                        return fail(format!("letter {i} is not contiguous with its predecessor"));
                    }
                }
            }
            prev_end = Some(l.end());
        }
        let circular = self.boundary == Boundary::Circular;
        if !VertexShift::standard().is_legal_word(&self.word(), circular)? {
            return Err(Error::IllegalWord(self.word_string()));
        }
        Ok(())
    }

    /// Merges collinear neighbouring pieces inside each tile.
    pub fn normalize(&self) -> FlowedWord {
        FlowedWord {
            boundary: self.boundary,
            letters: self.letters.iter().map(Letter::merged).collect(),
        }
    }

    /// True iff the word equals `original` and every letter sits undistorted
    /// at its original unit interval.
    pub fn is_identity(&self, original: &AnchoredWord) -> bool {
        self.boundary == original.boundary()
            && self.letters.len() == original.len()
            && self
                .letters
                .iter()
                .zip(original.letters())
                .enumerate()
                .all(|(k, (l, &s))| {
                    let fresh = l.merged();
                    l.symbol == s
                        && fresh.segments.len() == 1
                        && fresh.segments[0].c == int(k as i64)
                        && fresh.segments[0].d == int(k as i64 + 1)
                })
    }

    /// Moves the base point of a circular word forward by `t`.
    pub fn rotate(&self, t: &Rational) -> Result<FlowedWord> {
        if self.boundary != Boundary::Circular {
            return Err(Error::RotateRequiresCircular);
        }
        let span = self.span();
        if t.is_negative() || *t >= span {
            return Err(Error::RotationOutOfRange(rational_string(t)));
        }
        let shift = -t;
        let letters = self.letters.iter().map(|l| l.shifted(&shift)).collect();
        Ok(FlowedWord {
            boundary: self.boundary,
            letters,
        }
        .reanchored(&span))
    }

    /// Cycles letters so that letter 0 contains the base point.
    fn reanchored(mut self, span: &Rational) -> FlowedWord {
        let n = self.letters.len();
        let neg_span = -span;
        for _ in 0..n {
            if self.letters[0].end().is_positive() {
                break;
            }
            let l = self.letters.remove(0).shifted(span);
            self.letters.push(l);
        }
        for _ in 0..n {
            if !self.letters[0].start().is_positive() {
                break;
            }
            let l = self.letters.pop().unwrap().shifted(&neg_span);
            self.letters.insert(0, l);
        }
        self
    }

    /// Applies a rewrite plan. Each block's letters are replaced by the
    /// block's output at constant slope in the block's current tile
    /// coordinates, composed with the block's existing layout.
    pub fn rewrite(&self, plan: &[BlockRewrite]) -> Result<FlowedWord> {
        let n = self.letters.len() as isize;
        let circular = self.boundary == Boundary::Circular;
        let span = self.span();
        let mut expected = plan.first().map(|b| b.start).unwrap_or(0);
        let origin = expected;
        let mut out: Vec<Letter> = Vec::with_capacity(self.letters.len() + 4);
        for block in plan {
            if block.start != expected || block.len == 0 || block.output.is_empty() {
                return Err(Error::Invariant(
                    "rewrite plan does not tile the word".into(),
                ));
            }
            let fetch = |pos: isize| -> Result<Letter> {
                if circular {
                    let idx = pos.rem_euclid(n) as usize;
                    let wraps = pos.div_euclid(n);
                    let l = &self.letters[idx];
                    Ok(if wraps == 0 {
                        l.clone()
                    } else {
                        l.shifted(&(&span * int(wraps as i64)))
                    })
                } else if pos >= 0 && pos < n {
                    Ok(self.letters[pos as usize].clone())
                } else {
                    Err(Error::Invariant("rewrite plan leaves the word".into()))
                }
            };
            let old: Vec<Letter> = (block.start..block.start + block.len as isize)
                .map(fetch)
                .collect::<Result<_>>()?;
            out.extend(compose_block(&old, &block.output));
            expected += block.len as isize;
        }
        if expected != origin + n {
            return Err(Error::Invariant(
                "rewrite plan does not tile the word".into(),
            ));
        }
        let mut fw = FlowedWord {
            boundary: self.boundary,
            letters: out,
        };
        if circular {
            fw = fw.reanchored(&span);
        }
        let fw = fw.normalize();
        if cfg!(debug_assertions) {
            fw.check()?;
        } else if circular && !VertexShift::standard().is_legal_word(&fw.word(), true)? {
            return Err(Error::IllegalWord(fw.word_string()));
        }
        Ok(fw)
    }
}

/// Lays `output` over the tile space of `old` at constant slope.
fn compose_block(old: &[Letter], output: &[Symbol]) -> Vec<Letter> {
    let len = old.len();
    let new_len = output.len();
    if len == new_len {
        return old
            .iter()
            .zip(output)
            .map(|(l, &symbol)| Letter {
                symbol,
                segments: l.segments.clone(),
            })
            .collect();
    }
    // Segments in block tile space [0, len].
    let segs: Vec<(Rational, Rational, &Rational, &Rational)> = old
        .iter()
        .enumerate()
        .flat_map(|(k, l)| {
            let k = int(k as i64);
            l.segments
                .iter()
                .map(move |s| (&k + &s.a, &k + &s.b, &s.c, &s.d))
        })
        .collect();
    let scale = rat(new_len as i64, len as i64);
    let mut result = Vec::with_capacity(new_len);
    let mut cursor = 0usize;
    for (k, &symbol) in output.iter().enumerate() {
        let lo = rat((k * len) as i64, new_len as i64);
        let hi = rat(((k + 1) * len) as i64, new_len as i64);
        let kq = int(k as i64);
        let mut segments = Vec::new();
        while cursor < segs.len() {
            let (sa, sb, sc, sd) = &segs[cursor];
            if *sb <= lo {
                cursor += 1;
                continue;
            }
            if *sa >= hi {
                break;
            }
            let x0 = if *sa > lo { sa.clone() } else { lo.clone() };
            let x1 = if *sb < hi { sb.clone() } else { hi.clone() };
            let slope = (*sd - *sc) / (sb - sa);
            let c = *sc + (&x0 - sa) * &slope;
            let d = *sc + (&x1 - sa) * &slope;
            segments.push(Segment {
                a: &x0 * &scale - &kq,
                b: &x1 * &scale - &kq,
                c,
                d,
            });
            if *sb <= hi {
                cursor += 1;
            } else {
                break;
            }
        }
        result.push(Letter { symbol, segments });
    }
    result
}

impl fmt::Display for FlowedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [", self.word_string())?;
        for (i, p) in self.pieces().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

#[derive(Serialize)]
struct FlowedWordJson {
    word: String,
    boundary: Boundary,
    span: String,
    pieces: Vec<Piece>,
}

impl Serialize for FlowedWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FlowedWordJson {
            word: self.word_string(),
            boundary: self.boundary,
            span: rational_string(&self.span()),
            pieces: self.pieces(),
        }
        .serialize(serializer)
    }
}
