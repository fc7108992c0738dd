//! Drive the chat-completions gateway against a local mock endpoint that
//! rate-limits the first request, then show the cache absorbing a repeat.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;

use persona_audit::corpus::synthetic_hate3;
use persona_audit::label::Task;
use persona_audit::parsing::parse_completion;
use persona_audit::personas::by_id;
use persona_audit::prompting::{plan_run, render, PromptSpec, Variant};
use persona_audit::provider::{Gateway, HttpChat, ProviderConfig, ProviderKind, Request, ResponseCache, RetryPolicy};

/// Answers `replies.len()` requests in order with (status, body).
fn mock_server(replies: Vec<(u16, String)>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
    let addr = listener.local_addr().expect("addr");
    std::thread::spawn(move || {
        for (status, body) in replies {
            let (stream, _) = listener.accept().expect("accept");
            let mut reader = BufReader::new(stream);
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).expect("header");
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().expect("length");
                }
                if line == "\r\n" {
                    break;
                }
            }
            let mut req_body = vec![0; len];
            reader.read_exact(&mut req_body).expect("body");
            let mut stream = reader.into_inner();
            let head = format!(
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n",
                body.len()
            );
            stream.write_all(head.as_bytes()).and_then(|_| stream.write_all(body.as_bytes())).expect("reply");
        }
    });
    format!("http://{addr}/v1/chat/completions")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let content = r#"{\"label\": \"Offensive language\", \"rationale\": [\"idiots\"]}"#;
    let ok = format!(
        r#"{{"choices": [{{"message": {{"role": "assistant", "content": "{content}", "reasoning_content": "The word idiots is an insult."}}}}]}}"#
    );
    let url = mock_server(vec![(429, r#"{"error": "slow down"}"#.into()), (200, ok)]);

    let config = ProviderConfig {
        kind: ProviderKind::HttpChat,
        endpoint_url: Some(url),
        model_name: "mock-model".into(),
        api_key_env: None,
        max_parallel: 1,
        retry: RetryPolicy {
            max_attempts: 3,
            backoff_ms: vec![10],
        },
        ..Default::default()
    };
    let dir = std::env::temp_dir().join(format!("persona-audit-http-{}", std::process::id()));
    let cache = ResponseCache::open(dir.join("cache.jsonl"))?;
    let gateway = Gateway::new(Box::new(HttpChat::from_config(&config)?), config.max_parallel).with_cache(cache);

    let instances = synthetic_hate3(1, 3);
    let persona = by_id("age_65").expect("registered persona");
    let item = &plan_run(&instances, &[persona], 1)?[0];
    let spec = PromptSpec {
        task: Task::Hate3,
        persona,
        variant: Variant::Cot,
        reasoning_field: false,
    };
    let prompt = render(&spec, &instances[0])?;
    let req = Request {
        item,
        instance: &instances[0],
        persona,
        prompt: &prompt,
        variant: Variant::Cot,
    };

    let first = gateway.complete(&req)?;
    println!("attempt {} after rate limit, {:.3}s", first.attempt, first.latency_secs);
    println!("raw text:\n{}", first.text);
    let parsed = parse_completion(&first.text, &prompt.schema);
    println!("label {:?}, reasoning {:?}", parsed.label, parsed.reasoning_text);

    let again = gateway.complete(&req)?;
    println!("repeat served from cache: {} (backend calls {})", again == first, gateway.backend_calls());
    std::fs::remove_dir_all(dir)?;
    Ok(())
}
