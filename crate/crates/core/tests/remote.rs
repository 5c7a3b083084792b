use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::Command;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use findtrack_core::backends::remote::WireFrame;
use findtrack_core::backends::{
    histogram_embed_masked, text_embed, Aligner, BuiltinBackend, RemoteSession, Segmenter,
};
use findtrack_core::cli::{run_from, EXIT_BACKEND, EXIT_OK};
use findtrack_core::identify::identify_target;
use findtrack_core::io::{read_mask_dir, write_frame_dir};
use findtrack_core::mask::RleMask;
use findtrack_core::synthgen::{generate, scenario, SceneSpec};
use findtrack_core::{BinaryMask, Error, PipelineConfig, VideoSequence};
use serde_json::{json, Value};

/// Serves one connection; `handler` maps each request to a reply (or none).
fn serve<F>(handler: F) -> (String, mpsc::Receiver<Value>)
where
    F: Fn(&Value) -> Option<Value> + Send + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut writer = stream.try_clone().unwrap();
        for line in BufReader::new(stream).lines() {
            let Ok(line) = line else { break };
            let req: Value = serde_json::from_str(&line).unwrap();
            let _ = tx.send(req.clone());
            if let Some(reply) = handler(&req) {
                let mut s = serde_json::to_string(&reply).unwrap();
                s.push('\n');
                if writer.write_all(s.as_bytes()).is_err() {
                    break;
                }
            }
        }
    });
    (format!("tcp:{addr}"), rx)
}

/// A wire-level adapter around the built-in backend.
fn builtin_reply(req: &Value) -> Option<Value> {
    let id = req["id"].clone();
    let frame = || {
        let wf: WireFrame = serde_json::from_value(req["frame"].clone()).unwrap();
        wf.to_frame(1).unwrap()
    };
    let reply = match req["op"].as_str().unwrap() {
        "hello" => json!({"id": id, "embed_dim": findtrack_core::backends::EMBED_DIM}),
        "segment" => {
            let seg = BuiltinBackend
                .segment(&frame(), req["text"].as_str().unwrap())
                .unwrap();
            json!({"id": id, "mask": seg.mask.to_rle(), "confidence": seg.confidence})
        }
        "embed_masked" => {
            let rle: RleMask = serde_json::from_value(req["mask"].clone()).unwrap();
            let e = histogram_embed_masked(&frame(), &rle.decode().unwrap()).unwrap();
            json!({"id": id, "embedding": e.values()})
        }
        "embed_text" => {
            let e = text_embed(req["text"].as_str().unwrap()).unwrap();
            json!({"id": id, "embedding": e.values()})
        }
        op => json!({"id": id, "error": "unknown_op", "message": op}),
    };
    Some(reply)
}

fn small_scene() -> VideoSequence {
    let mut spec: SceneSpec = scenario("translate", 4).unwrap();
    spec.num_frames = 10;
    spec.objects[0].exit_frame = 10;
    generate(&spec).unwrap().video
}

#[test]
fn tcp_session_matches_builtin_bit_exactly() {
    let (addr, requests) = serve(builtin_reply);
    let session = RemoteSession::connect(&addr, Duration::from_secs(10)).unwrap();
    assert_eq!(session.embed_dim(), findtrack_core::backends::EMBED_DIM);

    let video = small_scene();
    let config = PipelineConfig::default();
    let remote = identify_target(&video, &config, &session, &session).unwrap();
    let local = identify_target(&video, &config, &BuiltinBackend, &BuiltinBackend).unwrap();
    assert_eq!(remote, local);

    // Requests carry increasing ids and schema-conformant payloads.
    let seen: Vec<Value> = requests.try_iter().collect();
    assert_eq!(seen[0], json!({"id": 0, "op": "hello"}));
    for (i, r) in seen.iter().enumerate() {
        assert_eq!(r["id"].as_u64(), Some(i as u64));
        match r["op"].as_str().unwrap() {
            "segment" => assert!(r["frame"]["rgb_b64"].is_string() && r["text"].is_string()),
            "embed_masked" => assert!(r["mask"]["counts"].is_array()),
            "embed_text" => assert!(r["frame"].is_null()),
            "hello" => {}
            op => panic!("unexpected op {op}"),
        }
    }
}

#[test]
fn mask_rle_round_trips_across_the_wire() {
    let (addr, _) = serve(|req| match req["op"].as_str() {
        Some("hello") => Some(json!({"id": req["id"], "embed_dim": 3})),
        _ => {
            let wf: WireFrame = serde_json::from_value(req["frame"].clone()).unwrap();
            let mask = BinaryMask::from_fn(wf.w, wf.h, |x, y| (x * 7 + y * 3) % 5 == 0);
            Some(json!({"id": req["id"], "mask": mask.to_rle(), "confidence": 0.25}))
        }
    });
    let session = RemoteSession::connect(&addr, Duration::from_secs(10)).unwrap();
    let frame = findtrack_core::Frame::filled(1, 13, 9, [1, 2, 3]).unwrap();
    let seg = session.segment(&frame, "the red circle").unwrap();
    assert_eq!(
        seg.mask,
        BinaryMask::from_fn(13, 9, |x, y| (x * 7 + y * 3) % 5 == 0)
    );
    assert_eq!(seg.confidence, 0.25);
}

fn hello_then<F>(f: F) -> String
where
    F: Fn(&Value) -> Option<Value> + Send + 'static,
{
    serve(move |req| {
        if req["op"] == "hello" {
            Some(json!({"id": req["id"], "embed_dim": 2}))
        } else {
            f(req)
        }
    })
    .0
}

#[test]
fn error_replies_surface_as_protocol_errors() {
    let addr = hello_then(|req| {
        Some(json!({"id": req["id"], "error": "model_failure", "message": "out of memory"}))
    });
    let session = RemoteSession::connect(&addr, Duration::from_secs(10)).unwrap();
    let err = session.embed_text("the red circle").unwrap_err();
    assert!(
        matches!(err, Error::Protocol(ref m) if m.contains("out of memory")),
        "{err}"
    );
    assert!(err.is_backend());
}

#[test]
fn schema_violations_are_rejected() {
    let frame = findtrack_core::Frame::filled(1, 4, 4, [0; 3]).unwrap();

    let addr = hello_then(|req| Some(json!({"id": req["id"], "embedding": [1.0, 2.0, 3.0]})));
    let s = RemoteSession::connect(&addr, Duration::from_secs(10)).unwrap();
    assert!(matches!(s.embed_text("x"), Err(Error::Protocol(_))));

    let addr = hello_then(|req| {
        Some(json!({"id": req["id"], "mask": {"size": [4, 4], "counts": [16]}, "confidence": 1.5}))
    });
    let s = RemoteSession::connect(&addr, Duration::from_secs(10)).unwrap();
    assert!(matches!(s.segment(&frame, "x"), Err(Error::Protocol(_))));

    let addr = hello_then(|req| {
        Some(
            json!({"id": req["id"], "mask": {"size": [4, 4], "counts": [3, 4]}, "confidence": 0.5}),
        )
    });
    let s = RemoteSession::connect(&addr, Duration::from_secs(10)).unwrap();
    assert!(matches!(s.segment(&frame, "x"), Err(Error::Protocol(_))));

    let addr = hello_then(|req| {
        Some(json!({"id": req["id"], "mask": {"size": [5, 4], "counts": [20]}, "confidence": 0.5}))
    });
    let s = RemoteSession::connect(&addr, Duration::from_secs(10)).unwrap();
    assert!(matches!(s.segment(&frame, "x"), Err(Error::Protocol(_))));

    let addr = hello_then(|req| {
        Some(json!({"id": req["id"].as_u64().unwrap() + 5, "embedding": [1.0, 0.0]}))
    });
    let s = RemoteSession::connect(&addr, Duration::from_secs(10)).unwrap();
    assert!(matches!(s.embed_text("x"), Err(Error::Protocol(_))));
}

#[test]
fn silent_backend_times_out() {
    let addr = hello_then(|_| None);
    let s = RemoteSession::connect(&addr, Duration::from_millis(200)).unwrap();
    let err = s.embed_text("x").unwrap_err();
    assert!(matches!(err, Error::BackendTimeout(_)), "{err}");
    assert!(err.is_backend());
}

#[test]
fn bad_handshakes_fail() {
    let (addr, _) = serve(|req| Some(json!({"id": req["id"], "embed_dim": 0})));
    assert!(matches!(
        RemoteSession::connect(&addr, Duration::from_secs(5)),
        Err(Error::HandshakeFailure(_))
    ));
    let (addr, _) = serve(|_| None);
    assert!(matches!(
        RemoteSession::connect(&addr, Duration::from_millis(200)),
        Err(Error::HandshakeFailure(_))
    ));
    assert!(matches!(
        RemoteSession::connect("stdio:exit 0", Duration::from_secs(5)),
        Err(Error::HandshakeFailure(_))
    ));
}

fn python_available() -> bool {
    Command::new("python3")
        .arg("--version")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn stub_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/stub_backend.py")
}

#[test]
fn cli_run_over_stdio_stub() {
    if !python_available() {
        eprintln!("python3 not found; skipping stdio stub run");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let video = small_scene();
    let frames = dir.path().join("frames");
    write_frame_dir(&video, &frames).unwrap();
    let out = dir.path().join("out");
    let backend = format!("stdio:python3 {}", stub_path().display());
    let code = run_from([
        "findtrack",
        "run",
        "--frames",
        frames.to_str().unwrap(),
        "--text",
        video.expression(),
        "--out",
        out.to_str().unwrap(),
        "--backend",
        &backend,
    ]);
    assert_eq!(code, EXIT_OK);
    let masks = read_mask_dir(&out.join("masks")).unwrap();
    assert_eq!(masks.len(), 10);
    let manifest: Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["backend"], backend.as_str());
    assert_eq!(manifest["candidates"].as_array().unwrap().len(), 5);
    assert!(manifest["key_frame"].is_u64());
}

#[test]
fn cli_exits_3_when_backend_breaks() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames");
    write_frame_dir(&small_scene(), &frames).unwrap();
    let addr = hello_then(|req| Some(json!({"id": req["id"], "error": "boom", "message": "x"})));
    let out = dir.path().join("out");
    let code = run_from([
        "findtrack",
        "run",
        "--frames",
        frames.to_str().unwrap(),
        "--text",
        "the red circle",
        "--out",
        out.to_str().unwrap(),
        "--backend",
        &addr,
    ]);
    assert_eq!(code, EXIT_BACKEND);
    assert!(!out.join("masks").exists());
}
