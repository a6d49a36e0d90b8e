mod common;

use basin_copilot::eval::{answer_relevancy, context_precision, context_recall, faithfulness, ground_truth_similarity};
use basin_copilot::hydro::{nearest_stations, Target};
use basin_copilot::index::MetadataFilter;
use basin_copilot::ingest::{chunk_text, load_corpus, parse_document, ChunkConfig, DocumentMeta, TextFormat};
use basin_copilot::protocol::{ConversationTurn, Role, ToolCall, TurnContent};
use basin_copilot::provider::openai::{turn_to_wire, wire_to_turn};
use basin_copilot::provider::{ChatResponse, Embedder, MockEmbedder, RuleJudge};
use common::conversations::{run, suite};
use common::oracle::{self, filter_matches, read_raw};
use common::random::{random_filter, random_index, random_query};
use common::Workspace;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

fn words(min: usize, max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[a-z]{3,8}", min..max)
}

fn sentence() -> impl Strategy<Value = String> {
    words(3, 9).prop_map(|w| {
        let mut s = w.join(" ");
        s.push('.');
        s
    })
}

proptest! {
    #![proptest_config(Config::with_cases(64))]

    #[test]
    fn larger_chunks_never_add_chunks(body in "[a-z \n]{0,3000}", size in 50usize..800, grow in 0usize..800, overlap_frac in 0.0f64..0.5) {
        let doc = parse_document(body.as_bytes(), TextFormat::Txt, DocumentMeta::new("d"));
        prop_assume!(doc.is_ok());
        let doc = doc.unwrap();
        let overlap = (size as f64 * overlap_frac) as usize;
        let small = ChunkConfig { chunk_size: size, overlap, min_tail: 0 };
        let large = ChunkConfig { chunk_size: size + grow, overlap, min_tail: 0 };
        prop_assert!(chunk_text(&doc, large).len() <= chunk_text(&doc, small).len());
    }

    #[test]
    fn mock_vectors_are_unit_or_zero(text in "[ -~]{0,200}") {
        let e = MockEmbedder::default();
        let v = e.embed_one(&text);
        prop_assert_eq!(v.len(), e.dimension());
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-12);
        prop_assert_eq!(&v, &e.embed(std::slice::from_ref(&text)).unwrap()[0]);
        // Same vector as the hand-applied hashing rule.
        let want = oracle::embed(&text, e.dimension());
        prop_assert!(v.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn search_hits_are_sorted_bounded_and_filtered(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_index(&mut rng, 200);
        let q = random_query(&mut rng, &r);
        let f = random_filter(&mut rng, 20);
        let k = rng.gen_range(1..=r.entries.len() + 2);
        let hits = r.index.search(&q, &f, k).unwrap();
        prop_assert!(hits.len() <= k);
        for w in hits.windows(2) {
            prop_assert!(w[0].score > w[1].score || (w[0].score == w[1].score && w[0].chunk_id < w[1].chunk_id));
        }
        for h in &hits {
            prop_assert!((-1.0..=1.0).contains(&h.score));
            let meta = &r.entries.iter().find(|e| e.id == h.chunk_id).unwrap().meta;
            prop_assert!(filter_matches(&f, meta));
        }
        // The empty filter matches everything.
        let all = r.index.search(&q, &MetadataFilter::default(), r.entries.len()).unwrap();
        prop_assert_eq!(all.len(), r.entries.len());
    }

    #[test]
    fn sample_scores_stay_in_unit_interval(
        question in sentence(),
        answer in prop::collection::vec(sentence(), 0..4),
        contexts in prop::collection::vec(prop::collection::vec(sentence(), 1..4), 0..4),
        gt in prop::collection::vec(sentence(), 0..3),
    ) {
        let answer = answer.join(" ");
        let contexts: Vec<String> = contexts.into_iter().map(|c| c.join(" ")).collect();
        let gt = gt.join(" ");
        let e = MockEmbedder::default();
        let scores = [
            faithfulness(&answer, &contexts, &RuleJudge).unwrap(),
            answer_relevancy(&question, &answer, &RuleJudge, &e, 3).unwrap(),
            context_precision(&gt, &contexts, &RuleJudge).unwrap(),
            context_recall(&gt, &contexts, &RuleJudge).unwrap(),
            ground_truth_similarity(&answer, &gt, &e).unwrap(),
        ];
        for s in scores.into_iter().flatten() {
            prop_assert!(s.is_finite() && (0.0..=1.0).contains(&s), "{}", s);
        }
    }

    #[test]
    fn supported_statement_never_lowers_faithfulness(
        context in prop::collection::vec(sentence(), 1..5),
        answer in prop::collection::vec(sentence(), 1..5),
        pick in any::<prop::sample::Index>(),
    ) {
        let contexts = vec![context.join(" ")];
        let before = faithfulness(&answer.join(" "), &contexts, &RuleJudge).unwrap().unwrap();
        let mut more = answer.clone();
        more.push(context[pick.index(context.len())].clone());
        let after = faithfulness(&more.join(" "), &contexts, &RuleJudge).unwrap().unwrap();
        prop_assert!(after >= before, "{} -> {}", before, after);
    }

    #[test]
    fn chat_responses_round_trip_as_json(text in ".{0,80}", names in prop::collection::vec("[a-z_]{1,12}", 0..4), n in any::<i64>()) {
        let r = if names.is_empty() {
            ChatResponse::text(text)
        } else {
            let calls = names.iter().map(|name| {
                let mut arguments = Map::new();
                arguments.insert("n".into(), json!(n));
                arguments.insert("s".into(), Value::String(text.clone()));
                ToolCall { call_id: String::new(), name: name.clone(), arguments }
            }).collect();
            ChatResponse::calls(calls)
        };
        let back: ChatResponse = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn turns_round_trip_through_wire_format(text in ".{0,80}", name in "[a-z_]{1,12}", id in "[a-z0-9]{1,10}", n in any::<i32>()) {
        let mut arguments = Map::new();
        arguments.insert("k".into(), json!(n));
        arguments.insert("q".into(), Value::String(text.clone()));
        let turns = [
            ConversationTurn { role: Role::User, content: TurnContent::Text { text: text.clone() }, refs: Vec::new() },
            ConversationTurn { role: Role::Assistant, content: TurnContent::ToolCalls { calls: vec![ToolCall { call_id: id, name, arguments }] }, refs: Vec::new() },
        ];
        for t in turns {
            prop_assert_eq!(wire_to_turn(&turn_to_wire(&t)).unwrap(), t);
        }
    }
}

#[test]
fn nearest_is_prefix_of_exhaustive_order() {
    let ws = Workspace::new(42);
    let ds = ws.datasets();
    let raw = read_raw(ws.path());
    let mut runner = TestRunner::new(Config::with_cases(128));
    runner
        .run(&(-35.0f64..-15.0, 20.0f64..40.0, 1usize..25), |(lat, lon, n)| {
            let got: Vec<String> =
                nearest_stations(&ds, &Target::Point { lat, lon }, n, None).unwrap().stations.into_iter().map(|s| s.station.station_id).collect();
            let all: Vec<String> = oracle::nearest(&raw, lat, lon, raw.stations.len(), None).into_iter().map(|w| w.0).collect();
            prop_assert_eq!(got.len(), n.min(all.len()));
            prop_assert_eq!(&got[..], &all[..got.len()]);
            Ok(())
        })
        .unwrap();
}

#[test]
fn chunk_text_reproduces_body_span() {
    let ws = Workspace::new(42);
    let docs = load_corpus(&ws.file("corpus/corpus.json")).unwrap();
    let index = ws.index();
    let mut seen = 0;
    for c in index.chunks() {
        let doc = docs.iter().find(|d| d.doc_id == c.doc_id).expect("chunk resolves to a document");
        let [a, b] = c.char_span;
        let text: String = doc.body.chars().skip(a).take(b - a).collect();
        assert_eq!(text, c.text, "{}", c.chunk_id);
        seen += 1;
    }
    assert_eq!(seen, index.len());
}

#[test]
fn scripted_replay_is_byte_identical() {
    let ws = Workspace::new(42);
    for conv in suite() {
        let a = serde_json::to_string(&run(&ws, &conv).transcript).unwrap();
        let b = serde_json::to_string(&run(&ws, &conv).transcript).unwrap();
        assert_eq!(a, b, "{}", conv.name);
    }
}
