use rand::seq::SliceRandom;

use super::ClassifierError;
use crate::augmentation::{AugmentedRow, Origin};
use crate::rng::seeded;
use crate::IntentClass;

/// Indices into the row slice passed to [`stratified_folds`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits primary rows into `k` folds with positive counts differing by at
/// most one. Auxiliary rows join every training split and no test fold.
///
/// Primary rows are ordered by doc id, positives and negatives are shuffled
/// separately with `seed`, then dealt round-robin: positive `i` goes to fold
/// `i % k`, negative `j` to fold `(positives + j) % k` so fold sizes also
/// stay within one of each other.
pub fn stratified_folds(
    rows: &[AugmentedRow],
    target: IntentClass,
    k: usize,
    seed: u64,
) -> Result<Vec<Fold>, ClassifierError> {
    if k < 2 {
        return Err(ClassifierError::InvalidK(k));
    }
    let mut primary: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].origin == Origin::Primary).collect();
    primary.sort_by(|&a, &b| rows[a].doc_id.cmp(&rows[b].doc_id));
    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) = primary.into_iter().partition(|&i| rows[i].intents.contains(&target));
    if pos.len() < k || neg.len() < k {
        return Err(ClassifierError::TooFewRows {
            k,
            positives: pos.len(),
            negatives: neg.len(),
        });
    }
    let mut rng = seeded(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let mut tests: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &row) in pos.iter().enumerate() {
        tests[i % k].push(row);
    }
    for (j, &row) in neg.iter().enumerate() {
        tests[(pos.len() + j) % k].push(row);
    }
    let mut fold_of = vec![usize::MAX; rows.len()];
    for (f, test) in tests.iter_mut().enumerate() {
        test.sort_unstable();
        for &i in test.iter() {
            fold_of[i] = f;
        }
    }
    Ok(tests
        .into_iter()
        .enumerate()
        .map(|(f, test)| Fold {
            train: (0..rows.len()).filter(|&i| fold_of[i] != f).collect(),
            test,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::IntentSet;

    fn rows(pos: usize, neg: usize, aux: usize) -> Vec<AugmentedRow> {
        let mk = |id: String, origin, positive: bool| AugmentedRow {
            doc_id: id,
            origin,
            tokens: vec![],
            intents: if positive { IntentSet::from([IntentClass::BugReport]) } else { IntentSet::new() },
        };
        let mut out = Vec::new();
        out.extend((0..pos).map(|i| mk(format!("p{i}"), Origin::Primary, true)));
        out.extend((0..neg).map(|i| mk(format!("n{i}"), Origin::Primary, false)));
        out.extend((0..aux).map(|i| mk(format!("a{i}"), Origin::Auxiliary, true)));
        out
    }

    fn positives_per_fold(r: &[AugmentedRow], folds: &[Fold]) -> Vec<usize> {
        folds
            .iter()
            .map(|f| f.test.iter().filter(|&&i| r[i].intents.contains(&IntentClass::BugReport)).count())
            .collect()
    }

    #[test]
    fn exact_division() {
        let r = rows(5, 5, 0);
        let folds = stratified_folds(&r, IntentClass::BugReport, 5, 1).unwrap();
        for f in &folds {
            assert_eq!(f.test.len(), 2);
        }
        assert_eq!(positives_per_fold(&r, &folds), [1, 1, 1, 1, 1]);
    }

    #[test]
    fn seven_positives() {
        let r = rows(7, 9, 0);
        let folds = stratified_folds(&r, IntentClass::BugReport, 5, 3).unwrap();
        let mut counts = positives_per_fold(&r, &folds);
        counts.sort_unstable();
        assert_eq!(counts, [1, 1, 1, 2, 2]);
    }

    #[test]
    fn auxiliary_rows_only_train() {
        let r = rows(6, 6, 4);
        let folds = stratified_folds(&r, IntentClass::BugReport, 3, 3).unwrap();
        for f in &folds {
            assert!(f.test.iter().all(|&i| r[i].origin == Origin::Primary));
            assert!((12..16).all(|i| f.train.contains(&i)));
            assert_eq!(f.train.len() + f.test.len(), r.len());
        }
    }

    #[test]
    fn too_few_rows() {
        let r = rows(4, 10, 0);
        assert!(matches!(
            stratified_folds(&r, IntentClass::BugReport, 5, 0),
            Err(ClassifierError::TooFewRows { positives: 4, .. })
        ));
    }

    #[test]
    fn row_order_does_not_matter() {
        let r = rows(6, 7, 2);
        let mut rev = r.clone();
        rev.reverse();
        let ids = |rows: &[AugmentedRow], folds: Vec<Fold>| -> Vec<Vec<String>> {
            folds
                .into_iter()
                .map(|f| {
                    let mut v: Vec<_> = f.test.iter().map(|&i| rows[i].doc_id.clone()).collect();
                    v.sort();
                    v
                })
                .collect()
        };
        let a = ids(&r, stratified_folds(&r, IntentClass::BugReport, 3, 9).unwrap());
        let b = ids(&rev, stratified_folds(&rev, IntentClass::BugReport, 3, 9).unwrap());
        assert_eq!(a, b);
    }
}
