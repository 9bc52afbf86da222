//! Flowed words over the shift on `{0, 1, 2}` and exact checks of relations
//! between locally defined homeomorphisms of its mapping torus.

pub mod error;
pub mod flow;
pub mod render;
pub mod rules;
pub mod symbol;
pub mod veelike;
pub mod verify;

pub use error::{Error, Result};
pub use flow::{
    identity_flow, int, parse_rational, rat, rational_string, FlowedWord, Piece, Rational,
};
pub use render::{
    appendix_panels, render_appendix_suite, render_rows, render_trace, Diagram, DiagramSpec,
    Orientation, RenderOptions, RenderStats, Suite,
};
pub use rules::{
    apply_rule, apply_rule_traced, builtin_generator, parse_local_rule, validate_partition,
    Applied, LocalRule, Mapping, ValidationReport,
};
pub use symbol::{
    is_legal_word, parse_symbols, word_string, AnchoredWord, Boundary, Symbol, VertexShift,
};
pub use veelike::{
    anchored_apply, anchored_apply_traced, builtin_bijection, compile_to_local_rule,
    finite_support_image, validate_bijection, PrefixBijection,
};
pub use verify::{
    apply_relation, check_relation, default_relations, enumerate_test_words, parse_relations,
    verify_embedding, EmbeddingSummary, Engine, Generators, Relation, RelationReport, Scheme,
    Trace, Verdict, EXTRA_RELATION,
};
