//! Cross-module properties checked over generated inputs.

use proptest::prelude::*;

use issueforge_core::augmentation::{
    augment, candidate_pool, read_augmented, select_auxiliary, write_augmented, AugmentationSpec, Method,
};
use issueforge_core::classifier::{stratified_folds, train, Confusion, Hyper, Metrics};
use issueforge_core::extraction::{extract, PatternSet};
use issueforge_core::ingestion::{filter_repos, load_corpus, write_corpus, Corpus, RawIssue, RepoRecord, TemplateFile, TemplateFormat};
use issueforge_core::label_norm::{assign_intents, normalize_label, IntentLexicon, LabelNormalizer};
use issueforge_core::similarity::{cosine, rank_similar, tfidf, RepoProfile};
use issueforge_core::textprep::{DocSource, Preprocessor, ProcessedDocument, WordLists};
use issueforge_core::{IntentClass, IntentSet};

const LABELS: &[&str] = &[
    "bug", "Bug", "type: bug", "crash", "enhancement", "feature request", "question", "can't reproduce",
    "wontfix", "P1", "help wanted", "🐛 bug", "Feature",
];

fn corpus_strategy() -> impl Strategy<Value = Corpus> {
    let repo = (0u64..6, 0u64..4, ".{0,40}", proptest::option::of(".{0,40}"));
    let issue = (0usize..4, ".{0,30}", ".{0,80}", proptest::collection::vec(0usize..LABELS.len(), 0..3));
    (
        proptest::collection::vec(repo, 1..4),
        proptest::collection::vec(issue, 0..60),
        proptest::collection::vec((0usize..4, ".{0,60}", any::<bool>()), 0..4),
    )
        .prop_map(|(repos, issues, templates)| {
            let mut c = Corpus::default();
            for (i, (contributors, stars, readme, about)) in repos.iter().enumerate() {
                c.repos.push(RepoRecord {
                    repo_id: format!("o/r{i}"),
                    full_name: format!("o/r{i}"),
                    contributors: *contributors,
                    stars: *stars,
                    labeled_issue_count: 0,
                    readme_text: Some(readme.clone()),
                    about_text: about.clone(),
                });
            }
            let n = c.repos.len();
            for (j, (r, title, body, labels)) in issues.into_iter().enumerate() {
                let repo = format!("o/r{}", r % n);
                c.issues.push(RawIssue {
                    issue_id: format!("{repo}#{j}"),
                    repo_id: repo,
                    title,
                    body,
                    label_names: labels.into_iter().map(|l| LABELS[l].to_string()).collect(),
                    created_at: "2024-01-01T00:00:00Z".into(),
                });
            }
            for (j, (r, raw_text, yaml)) in templates.into_iter().enumerate() {
                let path = format!(".github/ISSUE_TEMPLATE/t{j}.{}", if yaml { "yml" } else { "md" });
                c.templates.push(TemplateFile {
                    repo_id: format!("o/r{}", r % n),
                    format: TemplateFormat::from_path(&path).unwrap(),
                    path,
                    raw_text,
                });
            }
            c.issues.sort_by(|a, b| (&a.repo_id, &a.issue_id).cmp(&(&b.repo_id, &b.issue_id)));
            c.templates.sort_by(|a, b| (&a.repo_id, &a.path).cmp(&(&b.repo_id, &b.path)));
            c.recount();
            c
        })
}

fn words() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop_oneof![
            Just("crash".to_string()),
            Just("The".to_string()),
            Just("doesn't".to_string()),
            Just("never".to_string()),
            Just("Login".to_string()),
            Just("have to".to_string()),
            Just("running".to_string()),
            Just("what".to_string()),
            "[A-Za-z0-9']{1,9}",
        ],
        0..20,
    )
    .prop_map(|w| w.join(" "))
}

fn doc(id: &str, app: &str, tokens: &[&str], intents: &[IntentClass]) -> ProcessedDocument {
    ProcessedDocument {
        doc_id: id.into(),
        source: DocSource::IssueBody,
        app_id: Some(app.into()),
        tokens: tokens.iter().map(|t| t.to_string()).collect(),
        intents: intents.iter().copied().collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filter_is_idempotent_and_monotone(c in corpus_strategy(), a in 0u64..5, b in 0u64..4) {
        let once = filter_repos(&c, a, b).corpus;
        prop_assert_eq!(&filter_repos(&once, a, b).corpus, &once);
        let stricter = filter_repos(&c, a + 1, b + 1).corpus;
        prop_assert!(stricter.repos.iter().all(|r| once.repos.contains(r)));
    }

    #[test]
    fn corpus_round_trips(c in corpus_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(&c, dir.path()).unwrap();
        prop_assert_eq!(load_corpus(dir.path()).unwrap(), c);
    }

    #[test]
    fn normalized_labels_are_clean_and_stable(label in ".{0,30}") {
        let n = normalize_label(&label);
        prop_assert_eq!(normalize_label(&n), n.clone());
        prop_assert!(!n.chars().any(|c| c.is_ascii_digit() || c.is_uppercase()));
        let lists = WordLists::bundled();
        prop_assert!(!n.split(' ').any(|t| t != "not" && lists.negative_modifiers.contains(t)));
    }

    #[test]
    fn intents_grow_with_lexicon_and_shrink_with_frequency(c in corpus_strategy(), f in 1usize..6) {
        let norm = LabelNormalizer::bundled();
        let mut small = IntentLexicon::bundled();
        small.entries.retain(|k, _| k != "crash" && k != "question");
        let full = IntentLexicon::bundled();
        let a = assign_intents(&c, &small, f, &norm).unwrap();
        let b = assign_intents(&c, &full, f, &norm).unwrap();
        let rare = assign_intents(&c, &full, f + 3, &norm).unwrap();
        for (id, set) in &a.intents {
            prop_assert!(set.is_subset(&b.intents[id]));
        }
        for (id, set) in &rare.intents {
            prop_assert!(set.is_subset(&b.intents[id]));
        }
    }

    #[test]
    fn first_match_survives_dropping_later_sections(body in proptest::collection::vec(
        (prop_oneof![
            Just("## Actual behavior"), Just("## Steps to reproduce"), Just("**Describe the bug**"),
            Just("### Environment"), Just("Description:"), Just("## Expected behavior"),
        ], "[a-z ]{1,30}"),
        1..6,
    )) {
        let prep = Preprocessor::bundled();
        let patterns = PatternSet::bundled();
        let text: Vec<String> = body.iter().map(|(t, c)| format!("{t}\n{c}")).collect();
        let mk = |b: String| RawIssue {
            issue_id: "o/r#1".into(),
            repo_id: "o/r".into(),
            title: String::new(),
            body: b,
            label_names: vec![],
            created_at: String::new(),
        };
        let full = extract(&mk(text.join("\n")), &patterns, &prep);
        prop_assert_eq!(&full, &extract(&mk(text.join("\n")), &patterns, &prep));
        // once a prefix yields a section match, appending sections keeps it
        let mut first: Option<_> = None;
        for keep in 1..=text.len() {
            let got = extract(&mk(text[..keep].join("\n")), &patterns, &prep);
            match &first {
                Some(hit) => prop_assert_eq!(Some(hit), got.as_ref()),
                None => first = got.filter(|e| e.matched_pattern.is_some()),
            }
        }
    }

    #[test]
    fn preprocessing_is_idempotent_and_clean(text in words()) {
        let prep = Preprocessor::bundled();
        let lists = WordLists::bundled();
        let once = prep.preprocess(&text);
        prop_assert_eq!(prep.preprocess(&once.join(" ")), once.clone());
        for t in &once {
            prop_assert!(!t.chars().any(|c| c.is_ascii_digit() || c.is_uppercase()), "{}", t);
            prop_assert!(!lists.is_removable_stopword(t), "{}", t);
        }
    }

    #[test]
    fn noise_free_text_is_untouched(text in "[A-Za-z ,!?\n]{0,120}") {
        prop_assert_eq!(Preprocessor::bundled().strip_noise(&text), text);
    }

    #[test]
    fn scaling_counts_keeps_cosine(docs in proptest::collection::vec(proptest::collection::vec(0u8..8, 1..10), 2..6), k in 2usize..4) {
        let docs: Vec<Vec<String>> = docs.iter().map(|d| d.iter().map(|t| format!("w{t}")).collect()).collect();
        let mut scaled = docs.clone();
        scaled[0] = docs[0].iter().flat_map(|t| std::iter::repeat_n(t.clone(), k)).collect();
        let (a, b) = (tfidf(&docs), tfidf(&scaled));
        for j in 1..docs.len() {
            prop_assert!((cosine(&a[0], &a[j]) - cosine(&b[0], &b[j])).abs() < 1e-12);
        }
    }

    #[test]
    fn ranking_is_a_permutation_of_other_profiles(docs in proptest::collection::vec(proptest::collection::vec(0u8..8, 1..10), 2..7)) {
        let mut profiles: Vec<RepoProfile> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| RepoProfile {
                repo_id: format!("r{i}"),
                tokens: d.iter().map(|t| format!("w{t}")).collect(),
                vector: Default::default(),
            })
            .collect();
        issueforge_core::similarity::vectorize(&mut profiles);
        let ranking = rank_similar("r0", &profiles).unwrap();
        let mut ids: Vec<&str> = ranking.ranked.iter().map(|(id, _)| id.as_str()).collect();
        ids.sort();
        let want: Vec<String> = (1..docs.len()).map(|i| format!("r{i}")).collect();
        prop_assert_eq!(ids, want.iter().map(String::as_str).collect::<Vec<_>>());
        prop_assert!(ranking.ranked.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn auxiliary_never_outgrows_primary(n in 1usize..40, r in 0.0f64..=1.0, seed in any::<u64>()) {
        let pool: Vec<ProcessedDocument> = (0..80).map(|i| doc(&format!("p{i}"), &format!("a{}", i % 4), &["x"], &[])).collect();
        let sel = select_auxiliary(&pool, n, &AugmentationSpec::between_app(r, seed), None).unwrap();
        prop_assert!(sel.rows.len() <= n);
    }

    #[test]
    fn pools_nest(seed in any::<u64>(), k in 0usize..4) {
        let pool: Vec<ProcessedDocument> = (0..40).map(|i| doc(&format!("p{i}"), &format!("a{}", i % 5), &["x"], &[])).collect();
        let profiles: Vec<RepoProfile> = {
            let mut p: Vec<RepoProfile> = (0..5)
                .map(|i| RepoProfile { repo_id: format!("a{i}"), tokens: vec![format!("t{}", i % 2), "app".into()], vector: Default::default() })
                .collect();
            issueforge_core::similarity::vectorize(&mut p);
            p
        };
        let ranking = rank_similar("a0", &profiles).unwrap();
        let spec = |method, include_same_app| AugmentationSpec {
            method,
            ratio: 0.3,
            seed,
            target_app: (method != Method::BetweenApp).then(|| "a0".to_string()),
            top_k_similar: k,
            include_same_app,
        };
        let within = candidate_pool(&pool, &spec(Method::WithinApp, false), None).unwrap();
        let context = candidate_pool(&pool, &spec(Method::WithinContext, true), Some(&ranking)).unwrap();
        let between = candidate_pool(&pool, &spec(Method::BetweenApp, false), None).unwrap();
        prop_assert!(within.iter().all(|d| context.contains(d)));
        prop_assert!(context.iter().all(|d| between.contains(d)));
    }

    #[test]
    fn metric_bounds(tp in 0usize..20, fp in 0usize..20, tn in 0usize..20, fn_ in 0usize..20) {
        let m = Metrics::from_confusion(&Confusion { tp, fp, tn, fn_ });
        for v in [m.precision, m.recall, m.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        let (lo, hi) = (m.precision.min(m.recall), m.precision.max(m.recall));
        let harmonic = if lo + hi == 0.0 { 0.0 } else { 2.0 * lo * hi / (lo + hi) };
        prop_assert!((m.f1 - harmonic).abs() < 1e-12);
    }
}

#[test]
fn augmented_output_is_byte_identical_for_a_seed() {
    let primary: Vec<ProcessedDocument> = (0..30)
        .map(|i| doc(&format!("rev:{i}"), "app", &["crash", "app"], &[IntentClass::BugReport]))
        .collect();
    let pool: Vec<ProcessedDocument> = (0..50).map(|i| doc(&format!("o/r#{i}/body"), "o/r", &["slow", "sync"], &[])).collect();
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for name in ["a.jsonl", "b.jsonl"] {
        let spec = AugmentationSpec::between_app(0.5, 11);
        let sel = select_auxiliary(&pool, primary.len(), &spec, None).unwrap();
        let ds = augment(&primary, &sel, Some(&spec), spec.seed);
        let path = dir.path().join(name);
        write_augmented(&path, &ds.rows).unwrap();
        assert_eq!(read_augmented(&path).unwrap(), ds.rows);
        bytes.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn training_ignores_test_rows() {
    use issueforge_core::augmentation::{AugmentedRow, Origin};
    let rows: Vec<AugmentedRow> = (0..30)
        .map(|i| AugmentedRow {
            doc_id: format!("d{i:02}"),
            origin: Origin::Primary,
            tokens: vec![if i % 3 == 0 { "crash" } else { "love" }.to_string(), format!("w{i}")],
            intents: if i % 3 == 0 { IntentSet::from([IntentClass::BugReport]) } else { IntentSet::new() },
        })
        .collect();
    let folds = stratified_folds(&rows, IntentClass::BugReport, 5, 3).unwrap();
    let fold = &folds[0];
    let fit = |rows: &[AugmentedRow]| {
        let train_rows: Vec<&AugmentedRow> = fold.train.iter().map(|&i| &rows[i]).collect();
        train(&train_rows, IntentClass::BugReport, &Hyper::default()).unwrap()
    };
    let before = fit(&rows);
    let mut swapped = rows.clone();
    for &i in &fold.test {
        swapped[i].tokens = vec!["completely".into(), "different".into()];
    }
    assert_eq!(stratified_folds(&swapped, IntentClass::BugReport, 5, 3).unwrap(), folds);
    let after = fit(&swapped);
    assert_eq!(before.features, after.features);
    assert_eq!(before.model.weights, after.model.weights);
    assert_eq!(before.model.bias, after.model.bias);
}
