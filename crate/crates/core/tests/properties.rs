mod common;

use std::collections::HashSet;

use flowtwist::verify::{bit_words, Generators};
use flowtwist::{
    apply_relation, builtin_bijection, builtin_generator, check_relation, compile_to_local_rule,
    default_relations, finite_support_image, identity_flow, is_legal_word, parse_symbols, rat,
    validate_bijection, validate_partition, AnchoredWord, Boundary, Engine, Error, PrefixBijection,
    Relation, VertexShift,
};
use proptest::prelude::*;

fn word_strategy(max_len: usize) -> impl Strategy<Value = AnchoredWord> {
    prop::sample::select(common::circular_words(max_len))
}

fn relation_strategy() -> impl Strategy<Value = Relation> {
    "[abc]{1,8}".prop_map(|w| Relation::new(&w).unwrap())
}

fn engine_strategy() -> impl Strategy<Value = Engine> {
    prop_oneof![Just(Engine::RuleTable), Just(Engine::Bijection)]
}

/// A complete prefix code grown by splitting leaves, in the order `picks`.
fn code_from_picks(picks: &[usize]) -> Vec<String> {
    let mut leaves = vec![String::new()];
    for &p in picks {
        let leaf = leaves.remove(p % leaves.len());
        leaves.push(format!("{leaf}0"));
        leaves.push(format!("{leaf}1"));
    }
    leaves.sort();
    leaves
}

fn bijection_strategy() -> impl Strategy<Value = PrefixBijection> {
    (1usize..5)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0usize..8, n),
                prop::collection::vec(0usize..8, n),
                Just((0..=n).collect::<Vec<usize>>()).prop_shuffle(),
            )
        })
        .prop_map(|(d, r, perm)| {
            let domain = code_from_picks(&d);
            let range = code_from_picks(&r);
            let pairs = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| (domain[i].clone(), range[j].clone()))
                .collect();
            PrefixBijection::new("random", pairs)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalize_is_idempotent(word in word_strategy(8), rel in relation_strategy(), engine in engine_strategy()) {
        let gens = Generators::standard();
        let trace = apply_relation(&rel, &identity_flow(&word), engine, &gens).unwrap();
        let once = trace.final_flow().normalize();
        prop_assert_eq!(once.normalize(), once.clone());
        prop_assert_eq!(once.word(), trace.final_flow().word());
        prop_assert!(once.check().is_ok());
    }

    #[test]
    fn rotation_has_an_inverse(word in word_strategy(8), rel in relation_strategy(), num in 1i64..64, den in 1i64..7) {
        let gens = Generators::standard();
        let fw = apply_relation(&rel, &identity_flow(&word), Engine::RuleTable, &gens).unwrap().final_flow().clone();
        let span = fw.span();
        let t = rat(num, den);
        prop_assume!(t < span);
        let back = fw.rotate(&t).unwrap().rotate(&(&span - &t)).unwrap();
        prop_assert_eq!(back.normalize(), fw.normalize());
    }

    #[test]
    fn legality_is_the_absence_of_02(text in "[012]{1,12}", circular in any::<bool>()) {
        let word = parse_symbols(&text).unwrap();
        let wrapped = if circular { format!("{text}{}", &text[..1]) } else { text.clone() };
        let expected = !wrapped.contains("02");
        prop_assert_eq!(is_legal_word(&word, &VertexShift::standard(), circular).unwrap(), expected);
    }

    #[test]
    fn rewriting_commutes_with_integer_rotation(word in word_strategy(9), rel in relation_strategy(), engine in engine_strategy(), k in 0usize..9) {
        let gens = Generators::standard();
        let fw = identity_flow(&word);
        let t = rat((k % word.len()) as i64, 1);
        let rotated = fw.rotate(&t).unwrap();
        let via_rotation = apply_relation(&rel, &rotated, engine, &gens).unwrap();
        let direct = apply_relation(&rel, &fw, engine, &gens).unwrap();
        prop_assert_eq!(
            via_rotation.final_flow().normalize(),
            direct.final_flow().rotate(&t).unwrap().normalize()
        );
    }

    #[test]
    fn random_bijections_permute_finite_supports(bij in bijection_strategy()) {
        prop_assert!(validate_bijection(&bij).ok);
        let inverse = bij.inverse();
        let mut seen = HashSet::new();
        for w in common::reduced_bit_words(8) {
            let image = finite_support_image(&bij, &w);
            prop_assert!(!image.ends_with('0'));
            prop_assert_eq!(finite_support_image(&inverse, &image), w);
            prop_assert!(seen.insert(image));
        }
    }

    #[test]
    fn random_bijections_compile_to_equivalent_rules(bij in bijection_strategy()) {
        match compile_to_local_rule(&bij) {
            Ok(rule) => {
                prop_assert!(validate_partition(&rule, &VertexShift::standard()).ok);
                for word in common::circular_words(6) {
                    let fw = identity_flow(&word);
                    let by_rule = flowtwist::apply_rule(&rule, &fw).unwrap().normalize();
                    let by_bij = flowtwist::anchored_apply(&bij, &fw).unwrap().normalize();
                    prop_assert_eq!(by_rule, by_bij, "{}", word);
                }
            }
            Err(e) => prop_assert!(matches!(e, Error::Compile(_)), "{}", e),
        }
    }
}

#[test]
fn builtin_finite_support_images_are_bijective() {
    for name in ["a", "b", "c", "c_broken"] {
        let bij = builtin_bijection(name).unwrap();
        let inverse = bij.inverse();
        let words = common::reduced_bit_words(10);
        let images: HashSet<String> = words
            .iter()
            .map(|w| finite_support_image(&bij, w))
            .collect();
        assert_eq!(images.len(), words.len(), "{name} is not injective");
        for w in &words {
            assert_eq!(
                &finite_support_image(&inverse, &finite_support_image(&bij, w)),
                w
            );
        }
    }
}

#[test]
fn generator_orders_on_periodic_words() {
    let gens = Generators::standard();
    let words = common::circular_words(12);
    assert!(words.len() > 40_000);
    for rel in ["aa", "bbb", "cc"] {
        let rel = Relation::new(rel).unwrap();
        for engine in [Engine::RuleTable, Engine::Bijection] {
            for word in &words {
                let trace = apply_relation(&rel, &identity_flow(word), engine, &gens).unwrap();
                assert!(
                    trace.final_flow().is_identity(word),
                    "{rel} on {word} ({engine})"
                );
            }
        }
    }
}

#[test]
fn single_mapping_changes_break_the_partition() {
    let shift = VertexShift::standard();
    for name in ["a", "b", "c"] {
        let rule = builtin_generator(name).unwrap();
        assert!(validate_partition(&rule, &shift).ok);
        for (i, m) in rule.mappings().iter().enumerate() {
            let deleted = validate_partition(&rule.without_mapping(i).unwrap(), &shift);
            assert!(
                deleted.witnesses.iter().any(|w| w.count == 0),
                "{name}: deleting {m}"
            );
            let doubled = validate_partition(&rule.with_mapping(m.clone()).unwrap(), &shift);
            assert!(
                doubled.witnesses.iter().any(|w| w.count == 2),
                "{name}: duplicating {m}"
            );
        }
    }
}

#[test]
fn stabilization_is_monotone() {
    let gens = Generators::standard();
    for rel in default_relations() {
        let report = check_relation(&rel, 6, Engine::RuleTable, &gens);
        let l = report.stabilization_length.unwrap();
        for len in [l + 1, l + 2] {
            for bits in bit_words(len) {
                let word = AnchoredWord::from_bits(&bits, Boundary::Bowtie).unwrap();
                let trace =
                    apply_relation(&rel, &identity_flow(&word), Engine::RuleTable, &gens).unwrap();
                assert!(
                    !trace.touches(len as isize),
                    "{rel} touches the end of {word}"
                );
                assert!(trace.final_flow().is_identity(&word));
            }
        }
    }
}

#[test]
fn a_non_relation_is_caught_early() {
    let gens = Generators::standard();
    for engine in [Engine::RuleTable, Engine::Bijection] {
        let report = check_relation(&Relation::new("ab").unwrap(), 11, engine, &gens);
        assert!(!report.verdict.is_pass());
        let first = &report.witnesses[0];
        assert!(first.word.len() <= 4, "{}", first.word);
    }
}

#[test]
fn sentinel_words_are_safe_at_full_length() {
    let gens = Generators::standard();
    for rel in default_relations() {
        let report = check_relation(&rel, 11, Engine::Bijection, &gens);
        assert_eq!(report.sentinel_incidents, 0, "{rel}");
        assert_eq!(report.sentinel_words, 1024);
        assert_eq!(report.circular_words, 1024);
    }
}
