use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use mgl_core::bk::Snapshot;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn mgl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn learn_prints_the_program() {
    let dir = fixtures().join("exp1");
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("h.pl");
    let o = mgl(&[
        "learn",
        "--pos-file",
        p(&dir.join("pos.facts")),
        "--neg-file",
        p(&dir.join("neg.facts")),
        "--bk-file",
        p(&dir.join("bk.facts")),
        "--metarules",
        "chain",
        "--max-clauses",
        "2",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rule = "category(A,B) :- contains(A,C), related_to(C,B).";
    assert_eq!(stdout(&o).trim(), rule);
    assert_eq!(std::fs::read_to_string(out).unwrap().trim(), rule);
}

#[test]
fn learn_without_hypothesis_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let path = tmp.path().join(name);
        std::fs::write(&path, text).unwrap();
        path
    };
    let pos = write("pos.facts", "category([swim,lesson],family).\n");
    let bk = write("bk.facts", "contains([swim,lesson],swim).\nrelated_to(swim,exercise).\n");
    let o = mgl(&["learn", "--pos-file", p(&pos), "--bk-file", p(&bk)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no hypothesis"));
}

#[test]
fn bad_input_exits_2() {
    let dir = fixtures().join("exp1");
    let tmp = tempfile::tempdir().unwrap();
    let broken = tmp.path().join("broken.facts");
    std::fs::write(&broken, "category([call,mother],family\n").unwrap();
    let missing = tmp.path().join("missing.facts");
    let bk = dir.join("bk.facts");
    for pos in [&broken, &missing] {
        let o = mgl(&["learn", "--pos-file", p(pos), "--bk-file", p(&bk)]);
        assert_eq!(o.status.code(), Some(2), "{}", pos.display());
    }
    let o = mgl(&[
        "learn",
        "--pos-file",
        p(&dir.join("pos.facts")),
        "--bk-file",
        p(&bk),
        "--metarules",
        "nosuchrule",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = mgl(&[
        "eval",
        "--dataset",
        p(&fixtures().join("tasks_test.csv")),
        "--snapshot",
        p(&fixtures().join("tasks_bk.facts")),
        "--target",
        "gardening",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn metarules_from_a_file() {
    let dir = fixtures().join("exp1");
    let tmp = tempfile::tempdir().unwrap();
    let m = tmp.path().join("meta.txt");
    std::fs::write(&m, "meta chain: P(A,B) :- Q(A,C), R(C,B).\n").unwrap();
    let o = mgl(&[
        "learn",
        "--pos-file",
        p(&dir.join("pos.facts")),
        "--neg-file",
        p(&dir.join("neg.facts")),
        "--bk-file",
        p(&dir.join("bk.facts")),
        "--metarules",
        p(&m),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).trim(), "category(A,B) :- contains(A,C), related_to(C,B).");
}

#[test]
fn eval_reports_mean_last() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("report.txt");
    let curve = tmp.path().join("curve.csv");
    let baseline = tmp.path().join("baseline.csv");
    std::fs::write(&baseline, "count,mean_accuracy,stddev\n1,0.5,0.0\n2,0.5,0.0\n").unwrap();
    let o = mgl(&[
        "eval",
        "--dataset",
        p(&fixtures().join("tasks_test.csv")),
        "--train",
        p(&fixtures().join("tasks_train.csv")),
        "--snapshot",
        p(&fixtures().join("tasks_bk.facts")),
        "--target",
        "family",
        "--seed",
        "7",
        "--report",
        p(&report),
        "--curve",
        "neg",
        "--max-count",
        "2",
        "--curve-out",
        p(&curve),
        "--baseline",
        p(&baseline),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().last().unwrap(), "mean_accuracy=0.855172");
    assert!(std::fs::read_to_string(&report).unwrap().contains("mean_accuracy: 0.8551724137931034"));
    let c = std::fs::read_to_string(&curve).unwrap();
    assert_eq!(c.lines().count(), 3);
    assert!(c.lines().nth(1).unwrap().starts_with("1,0.855172413793103"));
    assert!(tmp.path().join("curve.trials.csv").exists());
    let merged = std::fs::read_to_string(tmp.path().join("curve.comparison.csv")).unwrap();
    assert!(merged.lines().next().unwrap().contains("baseline_mean_accuracy"));
}

#[test]
fn bk_show_lists_neighbours() {
    let snap = fixtures().join("tasks_bk.facts");
    let o = mgl(&["bk", "show", "--snapshot", p(&snap), "--word", "mother"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "mother family 4.0"));
    let o = mgl(&["bk", "show", "--snapshot", p(&snap), "--word", "zebra"]);
    assert_eq!(o.status.code(), Some(2));
}

/// Answers every request with `body` and counts requests.
fn stub_endpoint(body: &'static str) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            counter.fetch_add(1, Ordering::SeqCst);
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            while reader.read_line(&mut line).is_ok_and(|n| n > 2) {
                line.clear();
            }
            let _ = write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.flush();
            let mut sink = [0u8; 16];
            let _ = stream.read(&mut sink);
        }
    });
    (format!("http://{addr}"), hits)
}

const MOTHER_EDGES: &str = r#"{"edges":[{"start":{"@id":"/c/en/mother"},"end":{"@id":"/c/en/family"},"rel":{"@id":"/r/RelatedTo"},"weight":4.0},{"start":{"@id":"/c/en/mom/n"},"end":{"@id":"/c/en/mother"},"rel":{"@id":"/r/RelatedTo"},"weight":2.0}]}"#;

#[test]
fn bk_fetch_writes_snapshot_from_stub() {
    let (endpoint, hits) = stub_endpoint(MOTHER_EDGES);
    let tmp = tempfile::tempdir().unwrap();
    let snap = tmp.path().join("bk.facts");
    let o = mgl(&[
        "bk",
        "fetch",
        "--words",
        "mother",
        "--endpoint",
        &endpoint,
        "--snapshot",
        p(&snap),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(hits.load(Ordering::SeqCst), 1);
    let s = Snapshot::load(&snap).unwrap();
    assert!(s.knows("mother"));
    assert!(s.has_edge("mother", "family"));
    assert!(s.has_edge("mom", "mother"));
    assert_eq!(s.len(), 2);
}

#[test]
fn bk_fetch_network_failure_exits_4_without_writing() {
    let port = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let tmp = tempfile::tempdir().unwrap();
    let snap = tmp.path().join("bk.facts");
    let o = mgl(&[
        "bk",
        "fetch",
        "--words",
        "mother,call",
        "--endpoint",
        &format!("http://127.0.0.1:{port}"),
        "--snapshot",
        p(&snap),
        "--attempts",
        "1",
        "--timeout-secs",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!snap.exists());

    let existing = fixtures().join("tasks_bk.facts");
    let copy = tmp.path().join("copy.facts");
    std::fs::copy(&existing, &copy).unwrap();
    let o = mgl(&[
        "bk",
        "fetch",
        "--words",
        "zebra",
        "--endpoint",
        &format!("http://127.0.0.1:{port}"),
        "--snapshot",
        p(&copy),
        "--attempts",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(std::fs::read(&copy).unwrap(), std::fs::read(&existing).unwrap());
}

#[test]
fn serve_answers_over_tcp() {
    use std::process::Stdio;
    let tmp = tempfile::tempdir().unwrap();
    let session = tmp.path().join("s.pl");
    let mut child = Command::new(env!("CARGO_BIN_EXE_mgl"))
        .args([
            "serve",
            "--port",
            "0",
            "--snapshot",
            p(&fixtures().join("tasks_bk.facts")),
            "--session-file",
            p(&session),
        ])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut first = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut first).unwrap();
    let addr = first.trim().strip_prefix("listening on http://").unwrap().to_string();
    let body = r#"{"text":"call mother","category":"family"}"#;
    let mut stream = std::net::TcpStream::connect(&addr).unwrap();
    write!(
        stream,
        "POST /api/labels HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut reply = String::new();
    stream.read_to_string(&mut reply).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    assert!(reply.contains(r#""new_hypothesis":["category(A,B) :- contains(A,C), related_to(C,B)."]"#));
    let saved = mgl_core::classifier::SessionState::load(&session).unwrap();
    assert_eq!(saved.examples.len(), 1);
    assert!(saved.snapshot_path.is_some());
}
