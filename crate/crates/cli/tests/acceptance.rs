//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any failed. Oracles here are reimplemented from the written
//! definitions rather than calling back into the code under test.

use std::io::{BufRead, BufReader};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use pano_agents::{fixture_audio, BackendSuite, TextPrompt};
use pano_core::{
    edge_blend, gaussian_blur, last_frame, recenter, seam_continuity, to_equirect, yaw_to_shift, EquirectFrame,
    Frame, ProjectionParams, YawAngle,
};
use pano_service::INTERRUPTED;
use pano_session::{FeedbackAction, Session, SessionConfig, SessionError};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    }};
}

// ---------------------------------------------------------------------------
// Oracles

/// Normalizes into [-180, 180) and maps to columns, rounding half-column
/// ties toward zero.
fn oracle_shift(theta: f64, width: u32) -> i64 {
    let mut t = theta % 360.0;
    if t >= 180.0 {
        t -= 360.0;
    } else if t < -180.0 {
        t += 360.0;
    }
    let x = t * f64::from(width) / 360.0;
    let lo = x.floor();
    let frac = x - lo;
    // Above half rounds up; an exact half rounds up only for negatives,
    // which is toward zero.
    let r = if frac > 0.5 || (frac == 0.5 && x < 0.0) { lo + 1.0 } else { lo };
    r as i64
}

/// Output column x shows input column x + shift, wrapping.
fn oracle_rotate(frame: &Frame, shift: i64) -> Frame {
    let w = i64::from(frame.width());
    Frame::from_fn(frame.width(), frame.height(), |x, y| {
        frame.pixel((i64::from(x) + shift).rem_euclid(w) as u32, y)
    })
    .unwrap()
}

/// Direct 2D Gaussian convolution: square support of radius ceil(3 sigma),
/// rows wrap, columns reflect about the half-sample boundary.
fn oracle_blur(frame: &Frame, sigma: f64) -> Frame {
    let r = (3.0 * sigma).ceil().max(1.0) as i64;
    let (w, h) = (i64::from(frame.width()), i64::from(frame.height()));
    let reflect = |i: i64| {
        let m = i.rem_euclid(2 * h);
        if m < h {
            m
        } else {
            2 * h - 1 - m
        }
    };
    let mut weights = Vec::new();
    let mut total = 0.0;
    for dy in -r..=r {
        for dx in -r..=r {
            let g = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
            weights.push((dx, dy, g));
            total += g;
        }
    }
    Frame::from_fn(frame.width(), frame.height(), |x, y| {
        let mut acc = [0.0f64; 3];
        for &(dx, dy, g) in &weights {
            let sx = (i64::from(x) + dx).rem_euclid(w) as u32;
            let sy = reflect(i64::from(y) + dy) as u32;
            let p = frame.pixel(sx, sy);
            for c in 0..3 {
                acc[c] += g * f64::from(p[c]);
            }
        }
        acc.map(|v| (v / total).round().clamp(0.0, 255.0) as u8)
    })
    .unwrap()
}

/// Mean absolute difference between the outer columns, over [0, 1].
fn oracle_seam(frame: &Frame) -> f64 {
    let last = frame.width() - 1;
    let mut total = 0u64;
    for y in 0..frame.height() {
        let (a, b) = (frame.pixel(0, y), frame.pixel(last, y));
        for c in 0..3 {
            total += u64::from(a[c].abs_diff(b[c]));
        }
    }
    total as f64 / (f64::from(frame.height()) * 3.0 * 255.0)
}

fn random_frame(rng: &mut StdRng, w: u32, h: u32) -> Frame {
    Frame::from_fn(w, h, |_, _| [rng.random(), rng.random(), rng.random()]).unwrap()
}

fn equirect(frame: Frame) -> EquirectFrame {
    EquirectFrame::new(frame).unwrap()
}

// ---------------------------------------------------------------------------
// Criteria

fn geometry() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut max_dev = 0i64;
    for run in 0..100 {
        // Horizontal stripes ten rows tall: the background blur pulls them
        // well away from black and white (even at the poles, where the
        // reflected outer stripe doubles up), while the sharp foreground
        // starts on a black row and ends on a white one. The foreground's
        // vertical extent is therefore measurable from pixels alone.
        let src_w = rng.random_range(80..=600u32);
        let src = Frame::from_fn(src_w, 200, |_, y| if (y / 10) % 2 == 0 { [0; 3] } else { [255; 3] }).unwrap();
        let out_w = 2 * rng.random_range(48..=512u32);
        let out = to_equirect(&src, &ProjectionParams::with_width(out_w)).map_err(|e| e.to_string())?;
        let (w, h) = out.dimensions();
        ensure!(w == 2 * h && w == out_w, "run {run}: output {w}x{h} for width {out_w}");

        let x = w / 2;
        let strong: Vec<u32> = (0..h)
            .filter(|&y| !(20..=235).contains(&out.pixel(x, y)[0]))
            .collect();
        let (top, bottom) = (strong[0], *strong.last().unwrap());
        let measured = i64::from(bottom - top + 1);
        let expected = (0.75 * f64::from(h)).round() as i64;
        let dev = (measured - expected).abs();
        max_dev = max_dev.max(dev);
        ensure!(dev <= 1, "run {run}: foreground {measured} px tall, expected {expected} (canvas {w}x{h})");
    }
    Ok(format!("100 runs 2:1 exact, foreground height max deviation {max_dev} px"))
}

fn yaw_mapping() -> Outcome {
    let shift = |deg: f64, w: u32| yaw_to_shift(YawAngle::new(deg).unwrap(), w);
    ensure!(shift(45.0, 2048) == 256, "yaw 45 at 2048 gave {}", shift(45.0, 2048));
    ensure!(shift(-90.0, 1440) == -360, "yaw -90 at 1440 gave {}", shift(-90.0, 1440));
    let mut rng = StdRng::seed_from_u64(2);
    let mut ties = 0;
    for case in 0..10_000 {
        let w = 2 * rng.random_range(1..=4096u32);
        let theta = match case % 4 {
            // Angles on or next to half-column ties, where rounding decides.
            0 => {
                ties += 1;
                let k = rng.random_range(-(w as i64)..(w as i64)) as f64;
                (k + 0.5) * 360.0 / f64::from(w)
            }
            1 => f64::from(rng.random_range(-1080..=1080i32)),
            _ => rng.random_range(-1000.0..1000.0),
        };
        let got = shift(theta, w);
        let want = oracle_shift(theta, w);
        ensure!(got == want, "theta {theta} width {w}: got {got}, oracle {want}");
    }
    Ok(format!("2 fixed examples + 10000 oracle cases ({ties} at half-column ties)"))
}

fn recenter_algebra() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    for i in 0..200 {
        let w = 2 * rng.random_range(2..=160u32);
        let f = equirect(random_frame(&mut rng, w, w / 2));
        ensure!(recenter(&f, YawAngle::ZERO) == f, "frame {i}: recenter by 0 changed the frame");
        let a = rng.random_range(-720.0..720.0);
        let b = rng.random_range(-720.0..720.0);
        let (ya, yb) = (YawAngle::new(a).unwrap(), YawAngle::new(b).unwrap());
        let once = recenter(&f, ya);
        ensure!(
            *once.as_frame() == oracle_rotate(f.as_frame(), oracle_shift(a, w)),
            "frame {i}: recenter by {a} is not a {}-column rotation",
            oracle_shift(a, w)
        );
        let twice = recenter(&once, yb);
        let summed = oracle_rotate(f.as_frame(), oracle_shift(a, w) + oracle_shift(b, w));
        ensure!(*twice.as_frame() == summed, "frame {i}: shifts by {a} then {b} do not add");
        let mut before: Vec<&[u8]> = f.as_bytes().chunks(3).collect();
        let mut after: Vec<&[u8]> = twice.as_bytes().chunks(3).collect();
        before.sort_unstable();
        after.sort_unstable();
        ensure!(before == after, "frame {i}: pixel multiset changed");
    }
    Ok("200 frames byte-exact: identity, additive composition, multiset".into())
}

fn seam_improvement() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst_ratio: f64 = 0.0;
    for i in 0..50 {
        let w = 2 * rng.random_range(20..=200u32);
        let mut frame = random_frame(&mut rng, w, w / 2);
        // Force the outer columns apart so the input is not seamless.
        for y in 0..w / 2 {
            frame.set_pixel(0, y, [10, 20, 30]);
            frame.set_pixel(w - 1, y, [220, 200, 180]);
        }
        let before = seam_continuity(&equirect(frame.clone()));
        let blended = edge_blend(&equirect(frame.clone()), 0.05).map_err(|e| e.to_string())?;
        let after = seam_continuity(&blended);
        ensure!(
            (before - oracle_seam(&frame)).abs() < 1e-12 && (after - oracle_seam(blended.as_frame())).abs() < 1e-12,
            "frame {i}: seam metric disagrees with its definition"
        );
        ensure!(after < before, "frame {i}: seam {after} not below {before}");
        worst_ratio = worst_ratio.max(after / before);
    }
    let toy = Frame::from_fn(200, 100, |x, _| if x < 100 { [0; 3] } else { [255; 3] }).unwrap();
    let blended = edge_blend(&equirect(toy), 0.05).map_err(|e| e.to_string())?;
    for y in 0..100 {
        for x in [0, 199] {
            for v in blended.pixel(x, y) {
                ensure!((f64::from(v) - 127.5).abs() <= 1.0, "toy ({x},{y}) = {v}, not mid-gray");
            }
        }
    }
    Ok(format!("50 frames strictly improved (worst after/before {worst_ratio:.4}); toy edge at mid-gray"))
}

fn blur_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut worst = 0i32;
    let mut frames = 0;
    for w in 2..=16u32 {
        for h in 2..=16u32 {
            let f = random_frame(&mut rng, w, h);
            for sigma in [0.5, 1.0, 2.0] {
                let got = gaussian_blur(&f, sigma).map_err(|e| e.to_string())?;
                let want = oracle_blur(&f, sigma);
                for (a, b) in got.as_bytes().iter().zip(want.as_bytes()) {
                    let d = (i32::from(*a) - i32::from(*b)).abs();
                    worst = worst.max(d);
                    ensure!(d <= 1, "{w}x{h} sigma {sigma}: off by {d}");
                }
                frames += 1;
            }
        }
    }
    Ok(format!("{frames} frame/sigma pairs, every size 2..16 squared, max deviation {worst}"))
}

const E2E_SCRIPT: &str = "segment 1: text \"a storm rolls in over the bay\" yaw 45\nsegment 2: speech aurora yaw -90\n";

fn e2e_session() -> Result<(Session, pano_core::Clip), String> {
    let backends = BackendSuite::mock();
    let config = SessionConfig {
        target_segments: 3,
        segment_duration_s: 10.0,
        fps: 24,
        seed: 7,
        params: ProjectionParams::with_width(1024),
    };
    let mut s = Session::start(TextPrompt::new("a quiet harbor at dawn").unwrap(), None, config, &backends)
        .map_err(|e| e.to_string())?;
    let actions = [
        FeedbackAction::text("a storm rolls in over the bay").with_recenter(YawAngle::new(45.0).unwrap()),
        FeedbackAction::speech(fixture_audio("aurora").unwrap()).with_recenter(YawAngle::new(-90.0).unwrap()),
    ];
    s.run_generation(0, &backends).map_err(|e| e.to_string())?;
    for (k, action) in actions.iter().enumerate() {
        s.apply_feedback(action, &backends).map_err(|e| e.to_string())?;
        s.run_generation(k + 1, &backends).map_err(|e| e.to_string())?;
    }
    let clip = s.finalize().map_err(|e| e.to_string())?;
    Ok((s, clip))
}

fn chain_cli_hash(script: &Path) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pano"))
        .args(["chain", "--prompt", "a quiet harbor at dawn", "--seed", "7", "--json", "--yaw-script"])
        .arg(script)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "pano chain failed: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    Ok(v["sha256"].as_str().unwrap_or_default().to_owned())
}

fn end_to_end() -> Outcome {
    let (session, clip) = e2e_session()?;
    ensure!(clip.len() == 720, "final clip has {} frames", clip.len());
    ensure!(clip.duration_seconds() == 30.0, "final clip lasts {} s", clip.duration_seconds());
    ensure!(clip.dimensions() == (1024, 512), "final clip is {:?}", clip.dimensions());
    let segs = session.segments();
    for k in 1..3 {
        let prev = last_frame(segs[k - 1].clip.as_ref().unwrap());
        let yaw = segs[k].yaw_at_generation.degrees();
        let expected = oracle_rotate(prev, oracle_shift(yaw, 1024));
        ensure!(
            *segs[k].image_prompt.as_frame() == expected,
            "segment {k}: image prompt is not the previous last frame rotated by {yaw}"
        );
    }
    let (_, again) = e2e_session()?;
    ensure!(again.content_hash() == clip.content_hash(), "in-process rerun hash differs");

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let script = dir.path().join("script.txt");
    std::fs::write(&script, E2E_SCRIPT).map_err(|e| e.to_string())?;
    let (first, second) = (chain_cli_hash(&script)?, chain_cli_hash(&script)?);
    ensure!(first == second, "pano chain reruns differ: {first} vs {second}");
    ensure!(first == clip.content_hash(), "pano chain hash {first} differs from the library run");
    Ok(format!("720 frames, 30.0 s, chaining byte-exact for segments 1 and 2, hash {}", &first[..16]))
}

// ---------------------------------------------------------------------------
// Service process

struct Server {
    child: Child,
    base: String,
}

impl Server {
    fn start(root: &Path, extra: &[&str]) -> Result<Self, String> {
        let mut child = Command::new(env!("CARGO_BIN_EXE_pano"))
            .args(["serve", "--port", "0", "--root"])
            .arg(root)
            .args(extra)
            .env("RUST_LOG", "error")
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| e.to_string())?;
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .map_err(|e| e.to_string())?;
        let addr = line
            .trim()
            .strip_prefix("listening on ")
            .ok_or_else(|| format!("unexpected first line {line:?}"))?;
        Ok(Self {
            child,
            base: format!("http://{addr}/api/v1"),
        })
    }

    fn kill(mut self) {
        // SIGKILL: no chance to clean up.
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

struct Api {
    http: reqwest::blocking::Client,
    base: String,
}

impl Api {
    fn new(server: &Server) -> Self {
        Self {
            http: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(30))
                .build()
                .unwrap(),
            base: server.base.clone(),
        }
    }

    fn send(&self, method: &str, path: &str, body: Option<Value>) -> Result<(u16, Vec<u8>), String> {
        let url = format!("{}{path}", self.base);
        let req = match method {
            "GET" => self.http.get(url),
            _ => self.http.post(url),
        };
        let req = match body {
            Some(b) => req.json(&b),
            None => req,
        };
        let resp = req.send().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        Ok((status, resp.bytes().map_err(|e| e.to_string())?.to_vec()))
    }

    fn json(&self, method: &str, path: &str, body: Option<Value>) -> Result<(u16, Value), String> {
        let (status, bytes) = self.send(method, path, body)?;
        Ok((status, serde_json::from_slice(&bytes).unwrap_or(Value::Null)))
    }

    fn job_phase(&self, id: &str, k: usize) -> Result<String, String> {
        let (_, jobs) = self.json("GET", &format!("/sessions/{id}/jobs"), None)?;
        let job = jobs
            .as_array()
            .and_then(|a| a.iter().rev().find(|j| j["segment_index"] == k))
            .ok_or_else(|| format!("no job for segment {k}"))?;
        Ok(job["phase"].as_str().unwrap_or_default().to_owned())
    }

    fn wait_phase(&self, id: &str, k: usize, accept: &[&str]) -> Result<String, String> {
        let deadline = Instant::now() + Duration::from_secs(60);
        loop {
            let phase = self.job_phase(id, k)?;
            if accept.contains(&phase.as_str()) {
                return Ok(phase);
            }
            ensure!(Instant::now() < deadline, "segment {k} stuck in {phase}");
            thread::sleep(Duration::from_millis(5));
        }
    }
}

fn kill_and_restart() -> Result<String, String> {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let server = Server::start(root.path(), &["--mock-latency-ms", "1500"])?;
    let api = Api::new(&server);
    let (status, created) = api.json(
        "POST",
        "/sessions",
        Some(json!({ "text": "harbor lights", "params": { "out_width": 128 }, "segment_duration_s": 1.0, "fps": 12 })),
    )?;
    ensure!(status == 201, "create returned {status}");
    let id = created["session_id"].as_str().unwrap().to_owned();
    ensure!(api.send("POST", &format!("/sessions/{id}/segments/0/generate"), None)?.0 == 202, "generate 0");
    ensure!(api.wait_phase(&id, 0, &["done", "error"])? == "done", "segment 0 failed");
    let (status, _) = api.json("POST", &format!("/sessions/{id}/feedback"), Some(json!({ "text": "fog", "yaw_degrees": 60 })))?;
    ensure!(status == 201, "feedback returned {status}");

    let fetch_all = |api: &Api| -> Result<Vec<Vec<u8>>, String> {
        let mut files = Vec::new();
        for f in 0..12 {
            let (s, bytes) = api.send("GET", &format!("/sessions/{id}/segments/0/frames/{f}"), None)?;
            ensure!(s == 200, "frame {f} returned {s}");
            files.push(bytes);
        }
        files.push(api.send("GET", &format!("/sessions/{id}/segments/0/image_prompt"), None)?.1);
        files.push(api.send("GET", &format!("/sessions/{id}/segments/1/image_prompt"), None)?.1);
        Ok(files)
    };
    let before_files = fetch_all(&api)?;
    let (_, before) = api.json("GET", &format!("/sessions/{id}"), None)?;

    ensure!(api.send("POST", &format!("/sessions/{id}/segments/1/generate"), None)?.0 == 202, "generate 1");
    api.wait_phase(&id, 1, &["running"])?;
    thread::sleep(Duration::from_millis(200));
    server.kill();

    let server = Server::start(root.path(), &[])?;
    let api = Api::new(&server);
    let (status, after) = api.json("GET", &format!("/sessions/{id}"), None)?;
    ensure!(status == 200, "reloaded manifest returned {status}");
    ensure!(after["segments"][0] == before["segments"][0], "segment 0 manifest changed across restart");
    ensure!(after["segments"][1]["status"] == "failed", "segment 1 is {}", after["segments"][1]["status"]);
    ensure!(after["segments"][1]["error"] == INTERRUPTED, "segment 1 error {}", after["segments"][1]["error"]);
    ensure!(fetch_all(&api)? == before_files, "stored PNGs changed across restart");
    ensure!(api.send("POST", &format!("/sessions/{id}/segments/1/generate"), None)?.0 == 202, "retry");
    ensure!(api.wait_phase(&id, 1, &["done", "error"])? == "done", "retried segment failed");
    Ok("SIGKILL mid-generation: 14 PNGs byte-exact, interrupted segment failed then retried".into())
}

const FUZZ_TEXTS: [&str; 3] = ["fog bank", "neon alley", "salt flats"];

fn ordering_fuzz() -> Result<String, String> {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let server = Server::start(root.path(), &[])?;
    let api = Api::new(&server);
    let backends = BackendSuite::mock();
    let mut rng = StdRng::seed_from_u64(8);
    let (mut calls, mut out_of_order, mut round) = (0, 0, 0u64);
    while calls < 1000 {
        let target = rng.random_range(1..=4usize);
        let text = FUZZ_TEXTS[round as usize % FUZZ_TEXTS.len()];
        let (status, created) = api.json(
            "POST",
            "/sessions",
            Some(json!({
                "text": text, "params": { "out_width": 64 }, "target_segments": target,
                "segment_duration_s": 0.25, "fps": 8, "seed": round,
            })),
        )?;
        ensure!(status == 201, "create returned {status}");
        let id = created["session_id"].as_str().unwrap().to_owned();
        let config = SessionConfig {
            target_segments: target,
            segment_duration_s: 0.25,
            fps: 8,
            seed: round,
            params: ProjectionParams::with_width(64),
        };
        let mut mirror = Session::start_with_id(id.clone(), TextPrompt::new(text).unwrap(), None, config, &backends)
            .map_err(|e| e.to_string())?;
        round += 1;

        for _ in 0..40 {
            let n = mirror.segments().len();
            let (label, status, expected): (String, u16, Result<(), SessionError>) = match rng.random_range(0..10) {
                0..=3 => {
                    let k = rng.random_range(0..=n);
                    let (status, _) = api.send("POST", &format!("/sessions/{id}/segments/{k}/generate"), None)?;
                    if status == 202 {
                        api.wait_phase(&id, k, &["done", "error"])?;
                    }
                    (format!("generate {k}"), status, mirror.run_generation(k, &backends).map(|_| ()))
                }
                4..=7 => {
                    let yaw = rng.random_range(-400.0..400.0);
                    let (status, _) = api.send(
                        "POST",
                        &format!("/sessions/{id}/feedback"),
                        Some(json!({ "reuse": true, "yaw_degrees": yaw })),
                    )?;
                    let action = FeedbackAction::reuse().with_recenter(YawAngle::new(yaw).unwrap());
                    ("feedback".into(), status, mirror.apply_feedback(&action, &backends).map(|_| ()))
                }
                _ => {
                    let (status, _) = api.send("POST", &format!("/sessions/{id}/finalize"), None)?;
                    ("finalize".into(), status, mirror.finalize().map(|_| ()))
                }
            };
            calls += 1;
            match expected {
                Err(e) if e.is_ordering() => {
                    out_of_order += 1;
                    ensure!(status == 409, "call {calls} ({label}) is out of order ({e}) but got {status}");
                }
                Err(SessionError::NoSuchSegment(_)) => {
                    ensure!(status == 404, "call {calls} ({label}): expected 404, got {status}")
                }
                Err(e) => return Err(format!("call {calls} ({label}): mirror failed unexpectedly: {e}")),
                Ok(()) => ensure!((200..300).contains(&status), "call {calls} ({label}) is legal but got {status}"),
            }
        }
        let (_, m) = api.json("GET", &format!("/sessions/{id}"), None)?;
        for (i, seg) in mirror.segments().iter().enumerate() {
            ensure!(m["segments"][i]["status"] == seg.status.as_str(), "session {id} segment {i} diverged");
        }
    }
    drop(server);
    Ok(format!("{calls} calls, {out_of_order} out-of-order requests all answered 409"))
}

fn durability() -> Outcome {
    let restart = kill_and_restart()?;
    let fuzz = ordering_fuzz()?;
    Ok(format!("{restart}; {fuzz}"))
}

fn throughput() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_pano"))
        .args(["bench", "--json", "--width", "2048", "--seconds", "2"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "bench failed: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let recenter_fps = v["recenter_fps"].as_f64().unwrap_or(0.0);
    let equirect_fps = v["to_equirect_fps"].as_f64().unwrap_or(0.0);
    // Targets 120 and 15 frames/s with a 2x tolerance.
    ensure!(recenter_fps >= 60.0, "recenter {recenter_fps:.1} frames/s < 60");
    ensure!(equirect_fps >= 7.5, "to_equirect {equirect_fps:.1} frames/s < 7.5");
    Ok(format!(
        "2048x1024 single core: recenter {recenter_fps:.0} fps (target 120), to_equirect {equirect_fps:.1} fps (target 15)"
    ))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 8] = [
        ("equirect geometry", Some(Duration::from_secs(30)), geometry),
        ("yaw mapping", Some(Duration::from_secs(5)), yaw_mapping),
        ("recenter algebra", Some(Duration::from_secs(30)), recenter_algebra),
        ("seam improvement", None, seam_improvement),
        ("blur oracle", None, blur_oracle),
        ("co-creation loop end-to-end", Some(Duration::from_secs(120)), end_to_end),
        ("service durability", None, durability),
        ("throughput", None, throughput),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{:.2} s]", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{:.2} s]", elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
