use rand::seq::SliceRandom;
use rand::Rng;

use super::{class_name, HmmModel, TagId};

/// A random model with tags `T0..` and `n_classes` distinct classes that
/// together cover every tag. All admissible probabilities are bounded away
/// from zero.
///
/// # Panics
///
/// If `n_tags` is 0 or at least 16, or `n_classes` is not between `n_tags`
/// and `2^n_tags − 1`.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, n_tags: usize, n_classes: usize) -> HmmModel {
    assert!(n_tags > 0 && n_tags < 16, "n_tags out of range");
    assert!(n_classes >= n_tags && n_classes < (1 << n_tags), "n_classes out of range");
    let width = (n_tags - 1).to_string().len();
    let tags: Vec<String> = (0..n_tags).map(|i| format!("T{i:0width$}")).collect();

    let mut masks: Vec<u32> = (1..(1u32 << n_tags)).collect();
    let full = (1u32 << n_tags) - 1;
    let chosen = loop {
        masks.shuffle(rng);
        let pick = &masks[..n_classes];
        if pick.iter().fold(0, |acc, m| acc | m) == full {
            let mut pick = pick.to_vec();
            pick.sort_by_key(|m| (m.count_ones(), m.reverse_bits()));
            break pick;
        }
    };
    let classes: Vec<(String, Vec<TagId>)> = chosen
        .iter()
        .map(|&mask| {
            let members: Vec<TagId> = (0..n_tags as u32).filter(|i| mask & (1 << i) != 0).map(TagId).collect();
            let names: Vec<&str> = members.iter().map(|t| tags[t.index()].as_str()).collect();
            (class_name(&names), members)
        })
        .collect();

    let mut weights = |n: usize| -> Vec<f64> {
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    };
    let pi = weights(n_tags);
    let a = (0..n_tags).map(|_| weights(n_tags)).collect();
    let mut b = vec![vec![0.0; n_tags]; classes.len()];
    for t in 0..n_tags {
        let holders: Vec<usize> =
            (0..classes.len()).filter(|&c| classes[c].1.contains(&TagId(t as u32))).collect();
        let w = weights(holders.len());
        for (&c, p) in holders.iter().zip(w) {
            b[c][t] = p;
        }
    }
    HmmModel::new(tags, classes, pi, a, b).expect("random model is well formed")
}
