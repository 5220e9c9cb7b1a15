mod common;

use bfst::btype::{compile_btype, BTypeConfig};
use bfst::corpus::Token;
use bfst::fst::Fst;
use bfst::hmm::{random_model, viterbi, ClassId, HmmModel, UNKNOWN_CLASS};
use bfst::lexicon::{read_lexicon_file, Lexicon, LexiconSources, TagMap, TagSet};
use bfst::tagger::{
    count_results, end_class, gold_tokens, segment, segment_tokens, to_tokens, write_tagged, FstBinding, Mode,
    Sentence, Tagger, TaggerError, SYNTHETIC_END_WORD,
};
use common::{class_sequences, class_string, outputs, relation, uniform_model_named};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAGS: [&str; 11] = ["AT", "CS", "DT", "IN", "NN", "RB", "SENT", "VB", "VBD", "VBN", "WPS"];

/// The tag inventory of the worked tagging example.
fn example_model() -> HmmModel {
    let classes: [(&str, &[usize]); 9] = [
        ("[AT]", &[0]),
        ("[CS,DT,WPS]", &[1, 2, 10]),
        ("[IN]", &[3]),
        ("[IN,RB]", &[3, 5]),
        ("[NN,VB]", &[4, 7]),
        ("[NN,VB,VBD]", &[4, 7, 8]),
        ("[SENT]", &[6]),
        ("[VBD,VBN]", &[8, 9]),
        (UNKNOWN_CLASS, &[4, 7, 8]),
    ];
    uniform_model_named(&TAGS, &classes)
}

fn example_lexicon(m: &HmmModel) -> Lexicon {
    let words = read_lexicon_file(
        "The\tAT\nshare\tNN,VB\nof\tIN\ntripled\tVBD,VBN\nwithin\tIN,RB\nthat\tCS,DT,WPS\n\
         span\tNN,VB,VBD\ntime\tNN,VB\n.\tSENT\n"
            .as_bytes(),
    )
    .unwrap();
    let unknown: TagSet = ["NN", "VB", "VBD"].iter().map(|s| s.to_string()).collect();
    Lexicon::bind(&LexiconSources::from_files(words, TagMap::new(), unknown), m).unwrap()
}

const EXAMPLE: &str = "The share of tripled within that span of time .";

fn toy(seed: u64) -> HmmModel {
    random_model(&mut ChaCha8Rng::seed_from_u64(seed), 3, 4)
}

fn sentence(m: &HmmModel, classes: &[ClassId]) -> Sentence {
    Sentence {
        words: classes.iter().map(|&c| m.class(c).name.clone()).collect(),
        classes: classes.to_vec(),
        gold: None,
        synthetic_end: false,
    }
}

// segmentation

#[test]
fn sentences_end_at_the_end_class() {
    let m = example_model();
    let lex = example_lexicon(&m);
    let end = end_class(&m, "SENT");
    let s = segment(&lex, "a b . c .".split(' '), end);
    assert_eq!(s.iter().map(Sentence::len).collect::<Vec<_>>(), [3, 2]);
    assert!(s.iter().all(|s| !s.synthetic_end && s.classes.last() == end.as_ref()));
}

#[test]
fn trailing_words_get_a_synthetic_end() {
    let m = example_model();
    let lex = example_lexicon(&m);
    let end = end_class(&m, "SENT");
    let s = segment(&lex, "a b . c".split(' '), end);
    assert_eq!(s.len(), 2);
    assert!(s[1].synthetic_end);
    assert_eq!((s[1].len(), s[1].real_len()), (2, 1));
    assert_eq!(s[1].words[1], SYNTHETIC_END_WORD);
    assert_eq!(s[1].classes[1], end.unwrap());
    // Without a known end class the fragment is kept as is.
    let s = segment(&lex, "a b . c".split(' '), None);
    assert_eq!(s.iter().map(Sentence::len).collect::<Vec<_>>(), [4]);
}

#[test]
fn blank_lines_split_and_empty_input_is_empty() {
    let m = example_model();
    let lex = example_lexicon(&m);
    assert!(segment(&lex, Vec::<String>::new(), end_class(&m, "SENT")).is_empty());
    let s = segment(&lex, ["a", "b", "", "c", "."], None);
    assert_eq!(s.iter().map(Sentence::len).collect::<Vec<_>>(), [2, 2]);
}

#[test]
fn lookup_gives_the_class_column() {
    let m = example_model();
    let lex = example_lexicon(&m);
    let s = segment(&lex, EXAMPLE.split(' '), end_class(&m, "SENT"));
    assert_eq!(s.len(), 1);
    let classes: Vec<&str> = s[0].classes.iter().map(|&c| m.class(c).name.as_str()).collect();
    assert_eq!(
        classes,
        ["[AT]", "[NN,VB]", "[IN]", "[VBD,VBN]", "[IN,RB]", "[CS,DT,WPS]", "[NN,VB,VBD]", "[IN]", "[NN,VB]", "[SENT]"]
    );
    assert_eq!(m.class(lex.lookup("walrus")).name, UNKNOWN_CLASS);
}

#[test]
fn gold_tags_ride_along() {
    let m = example_model();
    let lex = example_lexicon(&m);
    let toks = [Token::new("The", "AT"), Token::new("time", "NN"), Token::new(".", "SENT"), Token::new("of", "IN")];
    let s = segment_tokens(&lex, &toks, end_class(&m, "SENT"));
    assert_eq!(s[0].gold.as_deref(), Some(&["AT".to_owned(), "NN".to_owned(), "SENT".to_owned()][..]));
    assert!(s[1].synthetic_end);
    assert_eq!(gold_tokens(&s), toks);
}

// tagging

#[test]
fn output_columns() {
    let m = example_model();
    let lex = example_lexicon(&m);
    let s = segment(&lex, EXAMPLE.split(' '), end_class(&m, "SENT"));
    let t = Tagger::hmm(&m);
    let r = t.tag_all(&s, Mode::First).unwrap();
    let mut out = Vec::new();
    write_tagged(&mut out, &m, &s, &r, true).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert_eq!(lines[0], "The\t[AT]\tAT");
    assert_eq!(lines[9], ".\t[SENT]\tSENT");
    assert_eq!(lines[10], "");
    let tokens = to_tokens(&m, &s, &r);
    assert_eq!(tokens.len(), 10);
    for (tok, &c) in tokens.iter().zip(&s[0].classes) {
        assert!(m.class(c).contains(m.tag_id(&tok.tag).unwrap()));
    }
}

#[test]
fn singleton_classes_are_forced() {
    let m = example_model();
    let b = compile_btype(&m, &BTypeConfig::new(1, 1)).unwrap();
    let t = Tagger::fst(&m, &b).unwrap();
    let singles: Vec<ClassId> = ["[AT]", "[IN]", "[SENT]", "[IN]"].iter().map(|n| m.class_id(n).unwrap()).collect();
    let r = t.tag_sentence(&sentence(&m, &singles), Mode::COUNT, 0).unwrap();
    let names: Vec<&str> = r.tags.iter().map(|&x| m.tag_name(x)).collect();
    assert_eq!(names, ["AT", "IN", "SENT", "IN"]);
    assert_eq!(r.n_results, Some(1));
}

#[test]
fn sequential_transducers_give_one_result() {
    for seed in 0..3 {
        let m = toy(seed);
        for (beta, alpha) in [(0, 0), (1, 0), (0, 1), (2, 0)] {
            let b = compile_btype(&m, &BTypeConfig::new(beta, alpha)).unwrap();
            let t = Tagger::fst(&m, &b).unwrap();
            for cs in class_sequences(&m, 4) {
                assert_eq!(t.tag_sentence(&sentence(&m, &cs), Mode::COUNT, 0).unwrap().n_results, Some(1));
            }
        }
    }
}

#[test]
fn all_results_contain_the_hmm_choice() {
    for seed in 0..3 {
        let m = toy(seed + 10);
        let b = compile_btype(&m, &BTypeConfig::new(1, 1)).unwrap();
        let t = Tagger::fst(&m, &b).unwrap();
        for cs in class_sequences(&m, 4) {
            let r = t.tag_sentence(&sentence(&m, &cs), Mode::ALL, 0).unwrap();
            assert!(r.alternatives.contains(&viterbi(&m, &cs).unwrap()));
            assert_eq!(r.n_results, Some(r.alternatives.len()));
            assert_eq!(r.tags, r.alternatives[0]);
        }
    }
}

#[test]
fn counts_match_path_enumeration() {
    // Look for a sentence with exactly two readings and check it against
    // the paths of the transducer.
    let mut found = 0;
    for seed in 0..40 {
        let m = toy(seed);
        let b = compile_btype(&m, &BTypeConfig::new(1, 1)).unwrap();
        let rel = relation(&b, 4);
        for cs in class_sequences(&m, 4) {
            let input = class_string(&m, &cs);
            let n = count_results(&b, &input, 100).unwrap();
            assert_eq!(n, outputs(&rel, &input).len());
            if n == 2 {
                found += 1;
            }
        }
        if found > 0 {
            break;
        }
    }
    assert!(found > 0, "no sentence with two readings");
}

#[test]
fn count_limit_is_an_error() {
    for seed in 0..40 {
        let m = toy(seed);
        let b = compile_btype(&m, &BTypeConfig::new(1, 1)).unwrap();
        let t = Tagger::fst(&m, &b).unwrap();
        for cs in class_sequences(&m, 4) {
            let s = sentence(&m, &cs);
            if t.tag_sentence(&s, Mode::COUNT, 0).unwrap().n_results > Some(1) {
                let e = t.tag_sentence(&s, Mode::Count { limit: 1 }, 7).unwrap_err();
                assert!(matches!(e, TaggerError::Fst { sentence: 7, .. }));
                return;
            }
        }
    }
    panic!("no ambiguous sentence found");
}

#[test]
fn hmm_mode_is_viterbi() {
    let m = toy(3);
    let t = Tagger::hmm(&m);
    assert!(!t.uses_fst());
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let sentences: Vec<Sentence> = (0..50)
        .map(|_| {
            let n = r.gen_range(1..10);
            sentence(&m, &(0..n).map(|_| ClassId(r.gen_range(0..4))).collect::<Vec<_>>())
        })
        .collect();
    let got = t.tag_all(&sentences, Mode::First).unwrap();
    for (s, g) in sentences.iter().zip(&got) {
        assert_eq!(g.tags, viterbi(&m, &s.classes).unwrap());
    }
}

#[test]
fn first_mode_is_deterministic_and_ordered() {
    let m = toy(4);
    let b = compile_btype(&m, &BTypeConfig::new(2, 1)).unwrap();
    let t = Tagger::fst(&m, &b).unwrap();
    let sentences: Vec<Sentence> = class_sequences(&m, 3).iter().map(|cs| sentence(&m, cs)).collect();
    let a = t.tag_all(&sentences, Mode::First).unwrap();
    let again = t.tag_all(&sentences, Mode::First).unwrap();
    assert_eq!(a, again);
    for (i, s) in sentences.iter().enumerate() {
        assert_eq!(a[i], t.tag_sentence(s, Mode::First, i).unwrap());
        let first = b.apply_first(&class_string(&m, &s.classes)).unwrap().unwrap();
        assert_eq!(common::tag_string(&a[i].tags), first);
    }
    // Loading the transducer from text changes nothing.
    let loaded = Fst::from_text(&b.to_text()).unwrap();
    let t2 = Tagger::fst(&m, &loaded).unwrap();
    assert_eq!(t2.tag_all(&sentences, Mode::First).unwrap(), a);
}

#[test]
fn classes_missing_from_the_transducer_name_the_word() {
    let small = uniform_model_named(&["A", "B"], &[("[A]", &[0][..]), ("[A,B]", &[0, 1]), ("[B]", &[1])]);
    let b = compile_btype(&small, &BTypeConfig::new(0, 0)).unwrap();
    let big = uniform_model_named(
        &["A", "B"],
        &[("[A]", &[0][..]), ("[A,B]", &[0, 1]), ("[B]", &[1]), (UNKNOWN_CLASS, &[0, 1])],
    );
    let binding = FstBinding::new(&b, &big).unwrap();
    let t = Tagger::fst(&big, &b).unwrap();
    let s = Sentence {
        words: vec!["x".into(), "mystery".into()],
        classes: vec![ClassId(0), ClassId(3)],
        gold: None,
        synthetic_end: false,
    };
    let e = t.tag_sentence(&s, Mode::First, 0).unwrap_err();
    assert!(matches!(&e, TaggerError::UnknownClass { word, .. } if word == "mystery"), "{e}");
    assert!(e.to_string().contains("mystery"));
    assert_eq!(binding.first(&big, &[ClassId(1)]).unwrap().map(|v| v.len()), Some(1));
}

#[test]
fn foreign_tags_are_rejected() {
    let m = toy(5);
    let b = compile_btype(&m, &BTypeConfig::new(0, 0)).unwrap();
    let other = uniform_model_named(&["Q"], &[("[Q]", &[0][..])]);
    assert!(matches!(FstBinding::new(&b, &other), Err(TaggerError::UnknownOutput(_))));
}

#[test]
fn class_word_lexicon_round_trips_classes() {
    let m = example_model();
    let s = LexiconSources::from_files(bfst::eval::class_lexicon(&m), TagMap::new(), TagSet::new());
    let lex = Lexicon::bind(&s, &m).unwrap();
    for c in m.class_ids() {
        assert_eq!(lex.lookup(&m.class(c).name), c);
    }
}
