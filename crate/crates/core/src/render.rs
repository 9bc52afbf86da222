//! SVG spacetime diagrams of relation traces.
//!
//! Each row is one flowed word: a line marks a `0`, a box a `1`, a triple
//! line the anchor `2`, and a cross the unknown continuation of a bowtie
//! word. Tile boundaries get black ticks, slope breaks inside a tile gray
//! ones. Every piece carries its exact rational coordinates as attributes.

use std::fmt::Write as _;

use num::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{identity_flow, rational_string, FlowedWord, Rational};
use crate::symbol::{AnchoredWord, Boundary, Symbol};
use crate::verify::{
    apply_relation, default_relations, enumerate_test_words, Engine, Generators, Relation, Scheme,
    Trace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// One row per step, flow left to right, time downwards.
    Rows,
    /// One column per step, flow downwards, time left to right.
    Columns,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenderOptions {
    pub orientation: Orientation,
    /// Pixels per unit of flow.
    pub scale: f64,
    pub show_discontinuities: bool,
    pub engine: Engine,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            orientation: Orientation::Rows,
            scale: 24.0,
            show_discontinuities: true,
            engine: Engine::RuleTable,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramSpec {
    pub word: AnchoredWord,
    pub relation: Relation,
    pub options: RenderOptions,
}

impl DiagramSpec {
    pub fn new(word: AnchoredWord, relation: Relation) -> DiagramSpec {
        DiagramSpec {
            word,
            relation,
            options: RenderOptions::default(),
        }
    }

    pub fn with_options(mut self, options: RenderOptions) -> DiagramSpec {
        self.options = options;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenderStats {
    pub rows: usize,
    pub pieces_per_row: Vec<usize>,
    pub discontinuities_per_row: Vec<usize>,
    pub discontinuities: usize,
}

impl RenderStats {
    fn of(trace: &Trace) -> RenderStats {
        let pieces_per_row: Vec<usize> = trace.rows().map(|r| r.pieces().len()).collect();
        let discontinuities_per_row: Vec<usize> =
            trace.rows().map(FlowedWord::intra_tile_breaks).collect();
        RenderStats {
            rows: pieces_per_row.len(),
            discontinuities: discontinuities_per_row.iter().sum(),
            pieces_per_row,
            discontinuities_per_row,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Diagram {
    pub svg: String,
    pub stats: RenderStats,
    pub trace: Trace,
}

fn px(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Places flow coordinate `u` and band coordinate `v` of row `row`.
struct Frame {
    orientation: Orientation,
    scale: f64,
    band: f64,
    pitch: f64,
    margin: f64,
}

impl Frame {
    fn new(options: &RenderOptions) -> Frame {
        let band = 0.5 * options.scale;
        Frame {
            orientation: options.orientation,
            scale: options.scale,
            band,
            pitch: band * 2.0,
            margin: options.scale * 1.5,
        }
    }

    fn point(&self, row: usize, u: f64, v: f64) -> (f64, f64) {
        let along = self.margin + u * self.scale;
        let across = self.margin + row as f64 * self.pitch + v;
        match self.orientation {
            Orientation::Rows => (along, across),
            Orientation::Columns => (across, along),
        }
    }

    fn line(
        &self,
        out: &mut String,
        row: usize,
        (u0, v0): (f64, f64),
        (u1, v1): (f64, f64),
        attrs: &str,
    ) {
        let (x0, y0) = self.point(row, u0, v0);
        let (x1, y1) = self.point(row, u1, v1);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" {attrs}/>"#,
            px(x0),
            px(y0),
            px(x1),
            px(y1)
        );
    }
}

const INK: &str = r##"stroke="#000" stroke-width="1""##;
const TICK: &str = r##"class="tile" stroke="#000" stroke-width="1.5""##;
const GRAY: &str = r##"class="gray" stroke="#999" stroke-width="1.5""##;

fn glyph_levels(symbol: Symbol) -> &'static [f64] {
    match symbol {
        Symbol::S0 => &[0.5],
        Symbol::S1 => &[0.2, 0.8],
        _ => &[0.2, 0.5, 0.8],
    }
}

fn draw_row(out: &mut String, frame: &Frame, row: usize, label: &str, fw: &FlowedWord, gray: bool) {
    let h = frame.band;
    let _ = writeln!(
        out,
        r#"<g class="row" data-step="{row}" data-word="{}" data-span="{}">"#,
        fw.word_string(),
        rational_string(&fw.span())
    );
    let (lx, ly) = frame.point(row, -0.75, 0.5 * h);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="monospace" font-size="{}" text-anchor="middle" dominant-baseline="middle">{label}</text>"#,
        px(lx),
        px(ly),
        px(0.6 * frame.scale)
    );
    for p in fw.pieces() {
        let _ = writeln!(
            out,
            r#"<g class="piece" data-symbol="{}" data-a="{}" data-b="{}" data-c="{}" data-d="{}">"#,
            p.symbol,
            rational_string(&p.a),
            rational_string(&p.b),
            rational_string(&p.c),
            rational_string(&p.d)
        );
        let (c, d) = (to_f64(&p.c), to_f64(&p.d));
        for level in glyph_levels(p.symbol) {
            frame.line(out, row, (c, level * h), (d, level * h), INK);
        }
        out.push_str("</g>\n");
    }
    let span = fw.span();
    let mut ticks: Vec<Rational> = fw
        .letter_intervals()
        .into_iter()
        .map(|(start, _)| {
            if start < Rational::from_integer(0.into()) {
                start + &span
            } else {
                start
            }
        })
        .collect();
    ticks.push(span.clone());
    ticks.sort();
    for t in &ticks {
        let u = to_f64(t);
        frame.line(out, row, (u, 0.0), (u, h), TICK);
    }
    if fw.boundary() == Boundary::Bowtie {
        let s = to_f64(&span);
        out.push_str(r#"<g class="bowtie">"#);
        out.push('\n');
        frame.line(out, row, (s, 0.0), (s + 1.0, h), INK);
        frame.line(out, row, (s, h), (s + 1.0, 0.0), INK);
        out.push_str("</g>\n");
    }
    if gray {
        for t in fw.break_points() {
            let u = to_f64(&t);
            frame.line(out, row, (u, -0.15 * h), (u, 1.15 * h), GRAY);
        }
    }
    out.push_str("</g>\n");
}

/// Draws precomputed rows; `labels[i]` is shown beside row `i`.
pub fn render_rows(
    rows: &[&FlowedWord],
    labels: &[String],
    title: &str,
    options: &RenderOptions,
) -> String {
    let frame = Frame::new(options);
    let longest = rows.iter().map(|r| to_f64(&r.span())).fold(0.0, f64::max) + 1.0;
    let along = 2.0 * frame.margin + longest * frame.scale;
    let across = 2.0 * frame.margin + rows.len() as f64 * frame.pitch;
    let (width, height) = match options.orientation {
        Orientation::Rows => (along, across),
        Orientation::Columns => (across, along),
    };
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = px(width),
        h = px(height)
    );
    let _ = writeln!(out, "<title>{title}</title>");
    for (i, row) in rows.iter().enumerate() {
        let label = labels.get(i).map_or("", String::as_str);
        draw_row(
            &mut out,
            &frame,
            i,
            label,
            row,
            options.show_discontinuities,
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn render_trace(spec: &DiagramSpec, gens: &Generators) -> Result<Diagram> {
    let trace = apply_relation(
        &spec.relation,
        &identity_flow(&spec.word),
        spec.options.engine,
        gens,
    )?;
    let rows: Vec<&FlowedWord> = trace.rows().collect();
    let labels: Vec<String> = std::iter::once(String::new())
        .chain(trace.steps.iter().map(|s| s.generator.to_string()))
        .collect();
    let title = format!("{} {}", spec.word, spec.relation);
    let svg = render_rows(&rows, &labels, &title, &spec.options);
    let stats = RenderStats::of(&trace);
    Ok(Diagram { svg, stats, trace })
}

/// Bits per word for each relation of the diagram suite, in default relation order.
pub const APPENDIX_BITS: [usize; 9] = [2, 2, 2, 2, 3, 3, 3, 3, 3];

pub fn appendix_panels() -> Vec<(Relation, usize)> {
    default_relations().into_iter().zip(APPENDIX_BITS).collect()
}

#[derive(Debug, Clone)]
pub struct SuiteDiagram {
    pub relation: Relation,
    pub word: AnchoredWord,
    pub diagram: Diagram,
}

impl SuiteDiagram {
    /// A file name unique within the suite.
    pub fn file_name(&self) -> String {
        let word = self.word.to_string().replace('~', "x");
        format!("{}_{}.svg", self.relation.label(), word)
    }
}

#[derive(Debug, Clone)]
pub struct Suite {
    pub diagrams: Vec<SuiteDiagram>,
    pub discontinuities: usize,
}

/// Renders every relation on the bowtie suite of words of its length.
pub fn render_appendix_suite(
    panels: &[(Relation, usize)],
    options: &RenderOptions,
    gens: &Generators,
) -> Result<Suite> {
    let jobs: Vec<(&Relation, AnchoredWord)> = panels
        .iter()
        .map(|(rel, bits)| {
            enumerate_test_words(Scheme::BowtieSuite, *bits)
                .into_iter()
                .map(|tw| tw.anchored().map(|w| (rel, w)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let diagrams: Vec<SuiteDiagram> = jobs
        .par_iter()
        .map(|(rel, word)| {
            let spec = DiagramSpec::new(word.clone(), (*rel).clone()).with_options(*options);
            render_trace(&spec, gens)
                .map(|diagram| SuiteDiagram {
                    relation: (*rel).clone(),
                    word: word.clone(),
                    diagram,
                })
                .map_err(|e| Error::Invariant(format!("{} on {}: {e}", rel, word)))
        })
        .collect::<Result<Vec<_>>>()?;
    let discontinuities = diagrams
        .iter()
        .map(|d| d.diagram.stats.discontinuities)
        .sum();
    Ok(Suite {
        diagrams,
        discontinuities,
    })
}
