use hubo_reason::bench::synthetic::{generate, write_cassettes, SyntheticSpec};
use hubo_reason::bench::{emit_report, parse_dataset, run_batch, score, EnergyTable};
use hubo_reason::llm_client::{LlmClient, ModelSpec, ReplayMode};
use hubo_reason::pipeline::{Pipeline, PipelineConfig, PlanEntry};

const DATASET: &str = r#"{"id":"b","question":"Which came first? The bridge opened. The town grew.","options":[{"label":"A","text":"the bridge"},{"label":"B","text":"the town"}],"target":"A"}
{"id":"a","question":"Did rain delay the match? The pitch flooded. Play stopped at noon.","options":["Yes","No","Ambiguous"],"target":"Yes"}
"#;

#[test]
fn stub_batch_report_has_one_row_and_plot_per_question() {
    let records = parse_dataset(DATASET).unwrap();
    let client = LlmClient::offline();
    let pipeline = Pipeline::new(PipelineConfig::default(), &client).unwrap();
    let results = run_batch(&pipeline, &records, None, 2).unwrap();
    assert_eq!(
        results
            .iter()
            .map(|r| r.question_id.as_str())
            .collect::<Vec<_>>(),
        ["b", "a"]
    );

    let summary = score(&results, &records, &EnergyTable::default()).unwrap();
    assert_eq!(summary.n_total, 2);
    assert_eq!(
        summary.n_correct + summary.n_incorrect + summary.n_unparsed,
        2
    );
    // Stub models have no energy entry.
    assert!(summary.estimated_wh.is_none());

    let out = tempfile::tempdir().unwrap();
    let files = emit_report(&summary, &results, out.path(), 0.5).unwrap();
    let csv = std::fs::read_to_string(&files.table).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("a,"));
    assert_eq!(files.plots.len(), 2);
    for p in &files.plots {
        let svg = std::fs::read_to_string(p).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains(r#"class="tau""#));
    }
    let back: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&files.summary).unwrap()).unwrap();
    assert_eq!(back["n_total"], 2);
}

#[test]
fn synthetic_replay_reaches_the_designed_reason_counts() {
    let spec = SyntheticSpec {
        n_questions: 3,
        reasons_min: 5,
        reasons_max: 12,
        ..SyntheticSpec::default()
    };
    let questions = generate(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let model = ModelSpec::new(
        "openai",
        "gpt-4o",
        "https://api.openai.com/v1",
        "OPENAI_API_KEY",
    )
    .unwrap();
    let config = PipelineConfig {
        sampling_plan: vec![PlanEntry {
            model: model.clone(),
            count: 20,
        }],
        ..PipelineConfig::default()
    };
    write_cassettes(&questions, dir.path(), &model, &config.decoding).unwrap();
    let client = LlmClient::new(ReplayMode::ReplayStrict, Some(dir.path().into())).unwrap();
    let pipeline = Pipeline::new(config, &client).unwrap();
    let records: Vec<_> = questions.iter().map(|q| q.record.clone()).collect();
    let results = run_batch(&pipeline, &records, None, 1).unwrap();
    for (q, r) in questions.iter().zip(&results) {
        assert_eq!(r.num_reasons, q.designed_reasons, "{}", r.question_id);
        assert!(!r.is_unparsed());
    }
    let summary = score(&results, &records, &EnergyTable::default()).unwrap();
    // Sampling tokens are priced; the stub answer model is not, so no total.
    assert!(summary.tokens_by_model["gpt-4o"] > 0);
    assert!(summary.estimated_wh.is_none());
}
