use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const KICK: &str = "[kick]\nfield = [[1, 0.0, 0.15915494309189535]]\n";

struct Run {
    dir: TempDir,
    out: Output,
}

impl Run {
    fn code(&self) -> i32 {
        self.out.status.code().unwrap()
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join("out").join(rel)
    }

    fn json(&self, rel: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.path(rel)).unwrap()).unwrap()
    }
}

fn config(points: usize, mode: &str, body: &str) -> String {
    format!(
        "[grid]\npoints = {points}\n\n[run]\nmode = \"{mode}\"\noutput = \"OUT\"\nseed = 7\n{body}"
    )
}

fn run_in(dir: TempDir, command: &str, text: &str, extra: &[&str]) -> Run {
    let cfg = dir.path().join("config.toml");
    let out_dir = dir.path().join("out");
    fs::write(&cfg, text.replace("OUT", out_dir.to_str().unwrap())).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_seqresp"))
        .arg(command)
        .arg(&cfg)
        .args(extra)
        .output()
        .unwrap();
    Run { dir, out }
}

fn run(command: &str, text: &str, extra: &[&str]) -> Run {
    run_in(TempDir::new().unwrap(), command, text, extra)
}

fn read_grid(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

fn doubling(extra_run: &str, rest: &str) -> String {
    config(256, "deterministic", &format!("{extra_run}\n[reference]\ndegree = 2\n\n{rest}"))
}

fn noisy(extra_run: &str, rest: &str) -> String {
    config(
        128,
        "noisy",
        &format!(
            "{extra_run}\n[reference]\ndegree = 2\nterms = [[1, 0.0, 0.05]]\n\n[drift]\ndirection = [[1, 0.0, 1.0]]\n\n\
             [noise]\nkind = \"bump\"\nwidth = 0.05\nfloor = 0.3\n\n{rest}"
        ),
    )
}

#[test]
fn certify_doubling_passes() {
    let r = run("certify", &doubling("", ""), &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let cert = r.json("certificate.json");
    assert_eq!(cert["pass"], true);
    assert!((cert["certificate"]["C_T0"].as_f64().unwrap() - 6.0).abs() < 1e-8);
    let manifest = r.json("run_certify.json");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["exit_code"], 0);
}

#[test]
fn non_expanding_map_is_an_invalid_system() {
    let text = config(64, "deterministic", "\n[reference]\ndegree = 2\nterms = [[1, 0.0, 0.2]]\n");
    let r = run("certify", &text, &[]);
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("not uniformly expanding"), "{}", r.stderr());
    assert_eq!(r.json("run_certify.json")["exit_code"], 2);
}

#[test]
fn missing_field_is_a_config_error() {
    let text = doubling("", "").replace("seed = 7\n", "");
    let r = run("certify", &text, &[]);
    assert_eq!(r.code(), 1);
    assert!(r.stderr().contains("seed"), "{}", r.stderr());
}

#[test]
fn equivariant_doubling_is_uniform_and_unique() {
    let r = run("equivariant", &doubling("burn_in = 60\nreport = 5", KICK), &["--two-seed", "--emit-gnuplot"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let manifest = r.json("family.json");
    let entries = manifest["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 5);
    for e in entries {
        let values = read_grid(&r.path(e["file"].as_str().unwrap()));
        assert!(values.iter().all(|v| (v - 1.0).abs() <= 1e-8));
    }
    assert!(r.json("uniqueness.json")["l1_gap"].as_f64().unwrap() <= 1e-8);
    assert!(r.path("family.gp").exists());
}

#[test]
fn non_convergence_exits_with_three() {
    let text = config(
        64,
        "noisy",
        "burn_in = 2\nwindow = [0, 6]\n\n[reference]\ndegree = 2\n\n[drift]\ndirection = [[1, 0.0, 1.0]]\n\n\
         [noise]\nkind = \"bump\"\nwidth = 0.01\n",
    );
    let r = run("equivariant", &text, &[]);
    assert_eq!(r.code(), 3, "{}", r.stderr());
}

#[test]
fn respond_closed_form_validates() {
    let r = run("respond", &doubling("burn_in = 60\nreport = 4", &format!("{KICK}\n[response]\neps = [1e-2, 1e-3]\n")), &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let summary = r.json("validation.json");
    assert_eq!(summary["pass"], true);
    assert!(summary["D"][1].as_f64().unwrap() <= 1e-2);
    let manifest = r.json("response.json");
    for e in manifest["entries"].as_array().unwrap() {
        let eta = read_grid(&r.path(e["file"].as_str().unwrap()));
        let n = eta.len() as f64;
        for (i, v) in eta.iter().enumerate() {
            let x = i as f64 / n;
            assert!((v + (2.0 * std::f64::consts::PI * x).cos()).abs() <= 1e-5);
        }
    }
}

#[test]
fn zero_perturbation_gives_zero_response() {
    let r = run("respond", &doubling("burn_in = 60\nreport = 3", "[kick]\nfield = []\n"), &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    for e in r.json("response.json")["entries"].as_array().unwrap() {
        assert!(read_grid(&r.path(e["file"].as_str().unwrap())).iter().all(|v| *v == 0.0));
    }
}

#[test]
fn tail_not_small_exits_with_four() {
    let r = run(
        "respond",
        &doubling("burn_in = 60", &format!("{KICK}\n[response]\ntruncation = 2\ntolerance = 1e-6\n")),
        &[],
    );
    assert_eq!(r.code(), 4);
    assert!(r.stderr().contains("need K >="), "{}", r.stderr());
}

#[test]
fn memory_writes_decay_table() {
    let r = run("memory", &doubling("", "[memory]\nk_max = 4\nperturbation = [[4, 1.0, 0.0]]\n"), &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let csv = fs::read_to_string(r.path("memory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,w11_norm,l1_norm,fitted_rate");
    assert_eq!(lines.len(), 5);
    let w11_at_3: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
    assert!(w11_at_3 <= 1e-8, "frequency 4 dies after three doubling steps");
}

#[test]
fn noisy_respond_and_simulate() {
    let text = noisy("burn_in = 60\nreport = 3", "[simulate]\nsamples = 200000\nsteps = 4\n");
    let r = run("respond", &text, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    assert_eq!(r.json("validation.json")["pass"], true);
    let r = run_in(r.dir, "simulate", &text, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    assert!(r.json("simulate.json")["l1_distance"].as_f64().unwrap() <= 0.05);
}

#[test]
fn simulate_requires_noisy_mode() {
    let r = run("simulate", &doubling("", KICK), &[]);
    assert_eq!(r.code(), 1);
}

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if !p.file_name().unwrap().to_str().unwrap().starts_with("run_") {
                files.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn identical_config_gives_identical_files() {
    let text = noisy("burn_in = 60\nreport = 3", "[simulate]\nsamples = 100000\nsteps = 3\n");
    let a = run("simulate", &text, &[]);
    let b = run("simulate", &text, &[]);
    assert_eq!(a.code(), 0);
    assert_eq!(snapshot(&a.dir.path().join("out")), snapshot(&b.dir.path().join("out")));
    let threads = text.replace("points = 128", "points = 128\nthreads = 1");
    let c = run("simulate", &threads, &[]);
    assert_eq!(snapshot(&a.dir.path().join("out")), snapshot(&c.dir.path().join("out")));
}
