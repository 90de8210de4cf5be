use otslab_core::graph::random_graph;
use otslab_core::words::{take_word, RandomWord};
use serde_json::Value;

fn load(name: &str) -> Value {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn eleven_agent_random_graph() {
    let golden = load("random_graph_11_agents.json");
    let seed = golden["seed"].as_u64().unwrap();
    let g = random_graph(11, 0.3, 0.5, seed).unwrap();
    let want: Vec<(u64, u64, String)> = golden["edges"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["from"].as_u64().unwrap(), e["to"].as_u64().unwrap(), e["label"].as_str().unwrap().to_string()))
        .collect();
    let got: Vec<(u64, u64, String)> = g
        .edges()
        .iter()
        .map(|e| (e.from.display() as u64, e.to.display() as u64, e.label.clone()))
        .collect();
    assert_eq!(got, want);
    assert!(g.is_strongly_connected());
    assert!(g.weights().iter().all(|&w| w == 0.5));
}

#[test]
fn uniform_word_on_random_graph() {
    let golden = load("uniform_word_first_100.json");
    let seed = golden["seed"].as_u64().unwrap();
    let g = random_graph(11, 0.3, 0.5, seed).unwrap();
    let word = take_word(&mut RandomWord::uniform(&g, seed).unwrap(), &[], 100).unwrap();
    let labels: Vec<&str> = word.iter().map(|&e| g.label(e)).collect();
    let want: Vec<&str> = golden["word"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(labels, want);
}
