use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::time::Duration;

use citegraph_core::vectorize::{embed_query, EmbeddingProvider};
use citegraph_core::Error;
use citegraph_service::remote::RemoteProvider;

/// Serve `responses` one connection each, answering with the given JSON.
fn stub(responses: Vec<String>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for body in responses {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut req = vec![0; len];
            reader.read_exact(&mut req).unwrap();
            assert!(String::from_utf8(req).unwrap().contains("\"text\""));
            write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                body.len(),
                body
            )
            .unwrap();
        }
    });
    format!("http://{addr}/embed")
}

#[test]
fn remote_embeddings_and_dimension_check() {
    let url = stub(vec![r#"{"vector":[0.5,0.25,1.0]}"#.into(), r#"{"vector":[1.0,2.0]}"#.into()]);
    let p = RemoteProvider::new(url, 3, "test-model", Duration::from_secs(5));
    assert_eq!(p.tag(), "remote:test-model");
    let v = embed_query(&p, "a query", 3).unwrap();
    assert_eq!(v.0, vec![0.5, 0.25, 1.0]);
    let err = embed_query(&p, "another query", 3).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch { expected: 3, actual: 2, .. }), "{err}");
}

#[test]
fn unreachable_endpoint_is_a_provider_error() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/embed", listener.local_addr().unwrap());
    drop(listener);
    let p = RemoteProvider::new(url, 3, "gone", Duration::from_secs(2));
    assert!(matches!(p.embed("text"), Err(Error::Provider(_))));
}
