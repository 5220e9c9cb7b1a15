mod common;

use std::collections::{BTreeSet, HashSet};

use bfst::btype::{
    build_constraint, combine_constraints, compile_btype, compile_btype_detailed, compile_table, count_bsequences,
    enforce, enumerate_bsequences, model_table, preliminary_model, sequence_fst, sequence_pairs, strip_markers,
    strip_markers_by_composition, BTypeConfig, CompileError, ConstraintKind, ConstraintSpec, Constraints, Stage,
};
use bfst::fst::{union_all, Budget, Fst};
use bfst::hmm::{
    disambiguate, random_model, viterbi, BTypeSequence, ClassId, Context, HmmModel, TagId, TaggedBTypeSequence,
};
use bfst::symbols::{Side, SymbolId, TableRef};
use common::{class_sequences, class_string, language, markers_hold, relation, strings, tag_string, uniform_model, Base};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn budget() -> Budget {
    Budget::states(200_000)
}

fn toy(seed: u64, nt: usize, nc: usize) -> HmmModel {
    random_model(&mut ChaCha8Rng::seed_from_u64(seed), nt, nc)
}

/// Tags and classes of the windowed example, plus singletons so every
/// class the example needs exists.
fn example_model() -> HmmModel {
    let tags = ["ADJ", "CONJ", "DET", "NOUN", "PRON", "VERB"];
    uniform_model(&tags, &[&[1], &[2, 4], &[0, 3, 5], &[3, 5], &[5]])
}

fn names(table: &TableRef, pairs: &[(SymbolId, SymbolId)]) -> Vec<String> {
    pairs
        .iter()
        .map(|&(u, l)| if u == l { table.name(u).to_owned() } else { format!("{}:{}", table.name(u), table.name(l)) })
        .collect()
}

// enumeration

#[test]
fn no_context_gives_one_window_per_class() {
    let m = toy(1, 3, 5);
    let seqs: Vec<_> = enumerate_bsequences(&m, &BTypeConfig::new(0, 0)).unwrap().collect();
    assert_eq!(seqs.len(), 5);
    assert!(seqs.iter().all(|s| s.left == Context::None && s.right == Context::None && s.back.is_empty()));
}

#[test]
fn one_back_two_tags_three_classes() {
    let m = toy(2, 2, 3);
    let seqs: Vec<_> = enumerate_bsequences(&m, &BTypeConfig::new(1, 0)).unwrap().collect();
    // Three centers, each after either tag or the sentence edge.
    assert_eq!(seqs.len(), 3 * (2 + 1));
    assert_eq!(count_bsequences(&m, &BTypeConfig::new(1, 0)), 9);
}

/// Windows counted by brute force: every left and right context of every
/// shape, kept if it is a legal window.
fn brute_count(nt: usize, nc: usize, beta: usize, alpha: usize) -> usize {
    let side = |len: usize| -> usize {
        if len == 0 {
            return 1;
        }
        let mut n = 0;
        // Contexts of `j` classes, then a tag (j = len−1) or the edge (j < len).
        for j in 0..len {
            let strings = nc.pow(j as u32);
            if j == len - 1 {
                n += strings * nt;
            }
            n += strings;
        }
        n
    };
    side(beta) * nc * side(alpha)
}

#[test]
fn counts_match_enumeration_without_duplicates() {
    for (nt, nc) in [(2, 3), (3, 4)] {
        let m = toy(nt as u64, nt, nc);
        for beta in 0..=2 {
            for alpha in 0..=2 {
                let cfg = BTypeConfig::new(beta, alpha);
                let seqs: Vec<BTypeSequence> = enumerate_bsequences(&m, &cfg).unwrap().collect();
                let distinct: HashSet<&BTypeSequence> = seqs.iter().collect();
                assert_eq!(distinct.len(), seqs.len());
                assert_eq!(seqs.len(), brute_count(nt, nc, beta, alpha));
                assert_eq!(count_bsequences(&m, &cfg), seqs.len() as u128);
                for s in &seqs {
                    assert!(s.back.len() < beta.max(1) && s.ahead.len() < alpha.max(1));
                    if let Context::Tag(_) = s.left {
                        assert_eq!(s.back.len(), beta - 1);
                    }
                    if let Context::Tag(_) = s.right {
                        assert_eq!(s.ahead.len(), alpha - 1);
                    }
                    assert_eq!(s.left == Context::None, beta == 0);
                    assert_eq!(s.right == Context::None, alpha == 0);
                }
            }
        }
    }
}

#[test]
fn enumeration_contains_the_windowed_example() {
    let m = example_model();
    let (tag, class) = (|n: &str| m.tag_id(n).unwrap(), |n: &str| m.class_id(n).unwrap());
    let want = BTypeSequence {
        left: Context::Tag(tag("CONJ")),
        back: vec![class("[DET,PRON]")],
        center: class("[ADJ,NOUN,VERB]"),
        ahead: vec![class("[NOUN,VERB]")],
        right: Context::Tag(tag("VERB")),
    };
    assert!(enumerate_bsequences(&m, &BTypeConfig::new(2, 2)).unwrap().any(|s| s == want));
}

#[test]
fn enumeration_respects_the_budget() {
    let m = toy(3, 3, 5);
    let cfg = BTypeConfig::new(3, 3).with_max_states(100);
    let e = enumerate_bsequences(&m, &cfg).err().unwrap();
    assert!(matches!(e, CompileError::NotComputable { stage: Stage::Enumerate, limit: 100, .. }));
}

// sequence transducers

#[test]
fn sequence_without_context_is_one_pair() {
    let m = toy(4, 2, 3);
    let table = compile_table(&m, &BTypeConfig::new(0, 0));
    let s = BTypeSequence { left: Context::None, back: vec![], center: ClassId(2), ahead: vec![], right: Context::None };
    let t = disambiguate(&m, &s).unwrap();
    let f = sequence_fst(&m, &table, &t);
    assert_eq!((f.num_states(), f.num_arcs()), (2, 1));
    let c = bfst::btype::class_symbol(&m, ClassId(2));
    assert_eq!(relation(&f, 2), BTreeSet::from([(vec![c], vec![bfst::btype::tag_symbol(t.chosen)])]));
}

#[test]
fn windowed_example_markers() {
    let m = example_model();
    let table = compile_table(&m, &BTypeConfig::new(2, 2));
    let (tag, class) = (|n: &str| m.tag_id(n).unwrap(), |n: &str| m.class_id(n).unwrap());
    let source = BTypeSequence {
        left: Context::Tag(tag("CONJ")),
        back: vec![class("[DET,PRON]")],
        center: class("[ADJ,NOUN,VERB]"),
        ahead: vec![class("[NOUN,VERB]")],
        right: Context::Tag(tag("VERB")),
    };
    let t = TaggedBTypeSequence { source, chosen: tag("ADJ"), context_tags: vec![] };
    assert_eq!(
        names(&table, &sequence_pairs(&m, &table, &t)),
        ["CONJ-B2", "[DET,PRON]-B1", "[ADJ,NOUN,VERB]:ADJ", "[NOUN,VERB]-A1", "VERB-A2"]
    );
}

#[test]
fn boundary_windows_use_edge_markers() {
    let m = example_model();
    let table = compile_table(&m, &BTypeConfig::new(2, 2));
    let (tag, class) = (|n: &str| m.tag_id(n).unwrap(), |n: &str| m.class_id(n).unwrap());
    let source = BTypeSequence {
        left: Context::Boundary,
        back: vec![class("[DET,PRON]")],
        center: class("[ADJ,NOUN,VERB]"),
        ahead: vec![],
        right: Context::Boundary,
    };
    let t = TaggedBTypeSequence { source, chosen: tag("NOUN"), context_tags: vec![] };
    assert_eq!(
        names(&table, &sequence_pairs(&m, &table, &t)),
        ["<#>-B2", "[DET,PRON]-B1", "[ADJ,NOUN,VERB]:NOUN", "<#>-A1"]
    );
}

// preliminary model

fn tagged_pairs(m: &HmmModel, cfg: &BTypeConfig, table: &TableRef) -> Vec<Vec<(SymbolId, SymbolId)>> {
    enumerate_bsequences(m, cfg)
        .unwrap()
        .map(|s| sequence_pairs(m, table, &disambiguate(m, &s).unwrap()))
        .collect()
}

#[test]
fn preliminary_of_one_sequence_is_its_star() {
    let m = toy(5, 2, 3);
    let table = compile_table(&m, &BTypeConfig::new(1, 1));
    let pairs = tagged_pairs(&m, &BTypeConfig::new(1, 1), &table);
    let one = &pairs[7];
    let b = preliminary_model(&table, std::slice::from_ref(one), &budget()).unwrap();
    let (up, low): (Vec<SymbolId>, Vec<SymbolId>) = one.iter().copied().unzip();
    for k in 0..=3 {
        assert!(b.transduces(&up.repeat(k), &low.repeat(k)));
    }
    assert!(b.transduces(&[], &[]));
    assert!(!b.transduces(&up[..up.len() - 1], &low[..low.len() - 1]));
}

#[test]
fn preliminary_matches_the_starred_union() {
    let m = toy(6, 2, 2);
    for cfg in [BTypeConfig::new(0, 0), BTypeConfig::new(1, 0), BTypeConfig::new(0, 1)] {
        let table = compile_table(&m, &cfg);
        let pairs = tagged_pairs(&m, &cfg, &table);
        let b = preliminary_model(&table, &pairs, &budget()).unwrap();
        let linear: Vec<Fst> = pairs.iter().map(|p| Fst::linear(table.clone(), p).unwrap()).collect();
        let oracle = union_all(&linear).unwrap().star();
        assert_eq!(relation(&b, 6), relation(&oracle, 6));
    }
}

// constraints

fn spec(table: &TableRef, kind: ConstraintKind, side: Side, distance: usize, name: &str) -> ConstraintSpec {
    ConstraintSpec { kind, side, distance, symbol: table.lookup(name).unwrap() }
}

fn ids(table: &TableRef, s: &str) -> Vec<SymbolId> {
    s.split_whitespace().map(|n| table.lookup(n).unwrap()).collect()
}

/// Language of one constraint, and of the scanning checker restricted to its
/// marker, over all strings up to `len`.
fn check_constraint(table: &TableRef, spec: &ConstraintSpec, len: usize) {
    let r = build_constraint(spec, table, &budget()).unwrap();
    assert!(r.is_acceptor());
    let marker = table.lookup(&spec.marker_name(table)).unwrap();
    let got = language(&r, len);
    for s in strings(&table.sigma(), len) {
        let only_this: Vec<SymbolId> = s.iter().copied().filter(|&x| !table.is_marker(x) || x == marker).collect();
        // Other markers are unconstrained, so drop them before checking.
        let want = markers_hold(table, &only_this, |_| true);
        assert_eq!(got.contains(&s), want, "{spec}: {}", s.iter().map(|&x| table.name(x)).collect::<Vec<_>>().join(" "));
    }
}

#[test]
fn tag_constraint_looking_back() {
    let m = uniform_model(&["t", "u"], &[&[0], &[1], &[0, 1]]);
    let table = compile_table(&m, &BTypeConfig::new(1, 1));
    let s = spec(&table, ConstraintKind::Tag, Side::Back, 1, "t");
    let r = build_constraint(&s, &table, &budget()).unwrap();
    assert!(r.transduces(&ids(&table, "t t-B1"), &ids(&table, "t t-B1")));
    assert!(!r.transduces(&ids(&table, "u t-B1"), &ids(&table, "u t-B1")));
    check_constraint(&table, &s, 3);
}

#[test]
fn boundary_constraint_looking_back() {
    let m = uniform_model(&["t", "u"], &[&[0], &[1], &[0, 1]]);
    let table = compile_table(&m, &BTypeConfig::new(1, 1));
    let s = spec(&table, ConstraintKind::Boundary, Side::Back, 1, "<#>");
    let r = build_constraint(&s, &table, &budget()).unwrap();
    let acc = |x: &str| r.transduces(&ids(&table, x), &ids(&table, x));
    assert!(acc("<#>-B1"));
    assert!(acc("[t] <#>-B1"));
    assert!(!acc("t <#>-B1"));
    check_constraint(&table, &s, 3);
}

#[test]
fn tag_constraint_looking_ahead() {
    let m = uniform_model(&["t", "u"], &[&[0], &[1], &[0, 1]]);
    let table = compile_table(&m, &BTypeConfig::new(1, 1));
    let s = spec(&table, ConstraintKind::Tag, Side::Ahead, 1, "t");
    let r = build_constraint(&s, &table, &budget()).unwrap();
    let acc = |x: &str| r.transduces(&ids(&table, x), &ids(&table, x));
    assert!(acc("t-A1 t"));
    assert!(!acc("t-A1 u"));
    assert!(!acc("t-A1"));
    check_constraint(&table, &s, 3);
}

#[test]
fn every_constraint_matches_the_scanner() {
    let m = uniform_model(&["t", "u"], &[&[0], &[0, 1]]);
    let cfg = BTypeConfig::new(2, 2);
    let table = compile_table(&m, &cfg);
    for s in bfst::btype::constraint_specs(&m, &cfg) {
        check_constraint(&table, &s, 3);
    }
}

#[test]
fn specs_follow_the_distance_table() {
    let m = toy(7, 2, 3);
    let specs = bfst::btype::constraint_specs(&m, &BTypeConfig::new(2, 1));
    let of = |k: ConstraintKind| -> BTreeSet<i64> { specs.iter().filter(|s| s.kind == k).map(|s| s.delta()).collect() };
    assert_eq!(of(ConstraintKind::Tag), BTreeSet::from([-2, 1]));
    assert_eq!(of(ConstraintKind::Class), BTreeSet::from([-1]));
    assert_eq!(of(ConstraintKind::Boundary), BTreeSet::from([-2, -1, 1]));
    assert!(bfst::btype::constraint_specs(&m, &BTypeConfig::new(0, 0)).is_empty());
}

#[test]
fn combined_constraints() {
    let m = uniform_model(&["t", "u"], &[&[0], &[0, 1]]);
    let cfg = BTypeConfig::new(0, 0);
    let table = compile_table(&m, &cfg);
    let r = combine_constraints(&m, &cfg, &table).unwrap();
    for f in [&r.tags, &r.classes, &r.boundary] {
        assert!(f.equivalent(&Fst::sigma_star(table.clone())));
    }

    let cfg = BTypeConfig::new(1, 0);
    let table = compile_table(&m, &cfg);
    let r = combine_constraints(&m, &cfg, &table).unwrap();
    let got = language(&r.tags, 5);
    for s in strings(&table.sigma(), 5) {
        assert_eq!(got.contains(&s), markers_hold(&table, &s, |b| b == Base::Tag));
    }

    let cfg = BTypeConfig::new(1, 1);
    let table = compile_table(&m, &cfg);
    let r = combine_constraints(&m, &cfg, &table).unwrap();
    let acc = |x: &str| r.boundary.transduces(&ids(&table, x), &ids(&table, x));
    assert!(acc("<#>-B1 t <#>-A1"));
    assert!(!acc("t <#>-B1"));
    assert!(!acc("<#>-A1 t"));
}

// enforcement and stripping

fn trivial_constraints(table: &TableRef) -> Constraints {
    let all = Fst::sigma_star(table.clone());
    Constraints { tags: all.clone(), classes: all.clone(), boundary: all }
}

#[test]
fn enforcing_nothing_changes_nothing() {
    let m = toy(8, 2, 3);
    let cfg = BTypeConfig::new(1, 1);
    let table = compile_table(&m, &cfg);
    let b1 = preliminary_model(&table, &tagged_pairs(&m, &cfg, &table), &budget()).unwrap();
    let b2 = enforce(&b1, &trivial_constraints(&table), &budget()).unwrap();
    assert!(b2.equivalent(&b1));
}

#[test]
fn one_tag_is_forced() {
    let m = uniform_model(&["X"], &[&[0]]);
    let x = bfst::btype::tag_symbol(TagId(0));
    let c = bfst::btype::class_symbol(&m, ClassId(0));
    for (beta, alpha) in [(0, 0), (1, 1), (2, 1)] {
        let b = compile_btype(&m, &BTypeConfig::new(beta, alpha)).unwrap();
        for n in 1..=4 {
            assert_eq!(b.apply_all(&vec![c; n], 10).unwrap(), vec![vec![x; n]]);
        }
    }
}

#[test]
fn enforced_paths_pass_every_marker_check() {
    let m = toy(9, 2, 3);
    for (beta, alpha, len) in [(1, 1, 9), (2, 0, 9), (0, 2, 9)] {
        let compiled = compile_btype_detailed(&m, &BTypeConfig::new(beta, alpha)).unwrap();
        let table = compiled.enforced.table().clone();
        let rel = relation(&compiled.enforced, len);
        assert!(rel.len() > 1);
        for (up, low) in &rel {
            assert!(markers_hold(&table, up, |b| b == Base::Class), "({beta},{alpha})");
            assert!(markers_hold(&table, low, |b| b != Base::Class), "({beta},{alpha})");
        }
    }
}

#[test]
fn stripping_a_marker_free_transducer_is_a_no_op() {
    let m = toy(10, 2, 3);
    let table = compile_table(&m, &BTypeConfig::new(0, 0));
    let pairs = tagged_pairs(&m, &BTypeConfig::new(0, 0), &table);
    let b = preliminary_model(&table, &pairs, &budget()).unwrap();
    assert!(strip_markers(&b, &budget()).unwrap().equivalent(&b));
}

#[test]
fn stripping_one_block_leaves_its_pair() {
    let m = example_model();
    let table = compile_table(&m, &BTypeConfig::new(2, 2));
    let source = BTypeSequence {
        left: Context::Tag(m.tag_id("CONJ").unwrap()),
        back: vec![m.class_id("[DET,PRON]").unwrap()],
        center: m.class_id("[ADJ,NOUN,VERB]").unwrap(),
        ahead: vec![m.class_id("[NOUN,VERB]").unwrap()],
        right: Context::Tag(m.tag_id("VERB").unwrap()),
    };
    let adj = m.tag_id("ADJ").unwrap();
    let f = sequence_fst(&m, &table, &TaggedBTypeSequence { source: source.clone(), chosen: adj, context_tags: vec![] });
    let s = strip_markers(&f, &budget()).unwrap();
    let c0 = bfst::btype::class_symbol(&m, source.center);
    assert_eq!(relation(&s, 5), BTreeSet::from([(vec![c0], vec![bfst::btype::tag_symbol(adj)])]));
}

#[test]
fn both_stripping_methods_agree() {
    for seed in 0..4 {
        let m = toy(20 + seed, 2 + (seed as usize % 2), 3);
        for (beta, alpha) in [(1, 1), (2, 1), (1, 2)] {
            let compiled = compile_btype_detailed(&m, &BTypeConfig::new(beta, alpha)).unwrap();
            let a = strip_markers(&compiled.enforced, &budget()).unwrap();
            let b = strip_markers_by_composition(&compiled.enforced, &budget()).unwrap();
            assert_eq!(relation(&a, 5), relation(&b, 5), "seed {seed} ({beta},{alpha})");
            assert!(a.equivalent(&b));
        }
    }
}

// compilation

#[test]
fn no_context_model_is_one_state_of_best_emitters() {
    let m = toy(11, 3, 6);
    let b = compile_btype(&m, &BTypeConfig::new(0, 0)).unwrap();
    assert_eq!((b.num_states(), b.num_arcs()), (1, 6));
    for c in m.class_ids() {
        let out = b.apply_all(&[class_string(&m, &[c])[0]], 10).unwrap();
        assert_eq!(out, vec![tag_string(&[m.best_emitter(c)])]);
    }
    assert_eq!(b.table().len(), model_table(&m).len());
}

#[test]
fn outputs_contain_the_viterbi_path() {
    for seed in 0..3 {
        let m = toy(30 + seed, 3, 4);
        let b = compile_btype(&m, &BTypeConfig::new(1, 1)).unwrap();
        for cs in class_sequences(&m, 5) {
            let out = b.apply_all(&class_string(&m, &cs), 10_000).unwrap();
            assert!(!out.is_empty());
            assert!(out.contains(&tag_string(&viterbi(&m, &cs).unwrap())), "seed {seed}");
        }
    }
}

#[test]
fn budget_errors_name_their_stage() {
    let mut r = ChaCha8Rng::seed_from_u64(12);
    let m = random_model(&mut r, 3, 5);
    let e = compile_btype(&m, &BTypeConfig::new(1, 1).with_max_states(20)).unwrap_err();
    assert!(e.stage().is_some());
    assert!(e.to_string().contains(e.stage().unwrap().as_str()), "{e}");
    let big = BTypeConfig::new(3, 3).with_max_states(r.gen_range(10..50));
    assert!(matches!(compile_btype(&m, &big), Err(CompileError::NotComputable { stage: Stage::Enumerate, .. })));
}

#[test]
fn report_covers_every_stage() {
    let m = toy(13, 2, 3);
    let c = compile_btype_detailed(&m, &BTypeConfig::new(1, 1)).unwrap();
    let stages: Vec<Stage> = c.report.stages.iter().map(|s| s.stage).collect();
    assert_eq!(
        stages,
        [Stage::Enumerate, Stage::Disambiguate, Stage::Preliminary, Stage::Constraints, Stage::Enforce, Stage::Strip]
    );
    assert_eq!((c.report.states, c.report.arcs), (c.fst.num_states(), c.fst.num_arcs()));
    assert_eq!(c.report.sequences as u128, count_bsequences(&m, &BTypeConfig::new(1, 1)));
}
