use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eigenres::corpus::{generate_corpus, SpeakerProfile};
use eigenres::signal::{white_noise, write_wav, Signal};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_eigenres"));
    c.env_remove("EIGENRES_SEED").env("RUST_LOG", "error");
    c
}

fn run(c: &mut Command) -> Output {
    c.output().expect("spawn eigenres")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus");
        std::fs::create_dir(&corpus).unwrap();
        for (i, u) in generate_corpus(&SpeakerProfile::male(), 5, 6, 2.0).iter().enumerate() {
            write_wav(&u.signal, corpus.join(format!("u{i}.wav"))).unwrap();
        }
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn trained(&self) -> PathBuf {
        let model = self.path("model.egrs");
        let o = run(bin().arg("train").arg(self.path("corpus")).arg(&model));
        assert!(o.status.success(), "{}", stderr(&o));
        model
    }
}

#[test]
fn full_pipeline() {
    let fx = Fixture::new();
    let o = run(bin().arg("train").arg(fx.path("corpus")).arg(fx.path("model.egrs")));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains(" m=") && text.contains("f0_star=") && text.contains("I(1)="));

    let wav = fx.path("corpus/u0.wav");
    let track = fx.path("u0.egtk");
    let o = run(bin()
        .arg("analyze")
        .arg(&wav)
        .arg(fx.path("model.egrs"))
        .arg(&track)
        .arg("--csv"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("records="));
    let csv = std::fs::read_to_string(fx.path("u0.csv")).unwrap();
    assert!(csv.starts_with("time,f0,gain,c1,"));

    let out = fx.path("u0_re.wav");
    let o = run(bin()
        .arg("synth")
        .arg(&track)
        .arg(&out)
        .arg("--model")
        .arg(fx.path("model.egrs")));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(eigenres::signal::read_wav(&out).unwrap().len() > 0);

    let o = run(bin()
        .arg("copysynth")
        .arg(&wav)
        .arg(fx.path("model.egrs"))
        .arg(fx.path("cs")));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let line = stdout(&o);
    assert!(line.contains("lsd_eigen=") && line.contains("lsd_pulse=") && line.contains("winner="));
    assert!(fx.path("cs/u0_eigen.wav").exists() && fx.path("cs/u0_pulse.wav").exists());
}

#[test]
fn inspect_writes_plot_data() {
    let fx = Fixture::new();
    let model = fx.trained();
    let out = fx.path("ins");
    let o = run(bin().arg("inspect").arg(&model).arg(&out));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = eigenres::eigen::load_model(&model).unwrap();
    let curve = std::fs::read_to_string(out.join("ik_curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), m.r() + 1);
    assert!(curve.lines().last().unwrap().ends_with(",1.000000000000"));
    for i in 1..=m.k_default() {
        let e = std::fs::read_to_string(out.join(format!("eigenresidual_{i}.csv"))).unwrap();
        assert_eq!(e.lines().count(), m.m());
    }
    assert!(!out.join(format!("eigenresidual_{}.csv", m.k_default() + 1)).exists());
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.starts_with(&format!("m={} r={} f0_star=", m.m(), m.r())));
}

#[test]
fn synth_is_deterministic_and_seeded() {
    let fx = Fixture::new();
    let model = fx.trained();
    let track = fx.path("t.egtk");
    assert!(run(bin()
        .arg("analyze")
        .arg(fx.path("corpus/u1.wav"))
        .arg(&model)
        .arg(&track))
    .status
    .success());
    let synth = |name: &str, seed: Option<&str>, env: Option<&str>| -> Vec<u8> {
        let out = fx.path(name);
        let mut c = bin();
        c.arg("synth").arg(&track).arg(&out).arg("--model").arg(&model);
        if let Some(s) = seed {
            c.arg("--seed").arg(s);
        }
        if let Some(e) = env {
            c.env("EIGENRES_SEED", e);
        }
        let o = run(&mut c);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let a = synth("a.wav", Some("3"), None);
    assert_eq!(a, synth("b.wav", Some("3"), None));
    assert_eq!(a, synth("c.wav", None, Some("3")));
    assert_eq!(a, synth("d.wav", Some("3"), Some("8")));
    assert_ne!(a, synth("e.wav", Some("4"), None));
    assert_eq!(synth("f.wav", None, None), synth("g.wav", Some("0"), None));
}

#[test]
fn config_file_and_dump() {
    let fx = Fixture::new();
    let o = run(bin().arg("--dump-config"));
    assert_eq!(o.status.code(), Some(0));
    let dumped = stdout(&o);
    let cfg = fx.path("run.cfg");
    std::fs::write(
        &cfg,
        dumped.replace("synth.excitation = eigen", "synth.excitation = pulse"),
    )
    .unwrap();
    let o = run(bin().arg("--config").arg(&cfg).arg("--dump-config"));
    assert!(stdout(&o).contains("synth.excitation = pulse"));

    // pulse excitation from config needs no model
    let model = fx.trained();
    let track = fx.path("t.egtk");
    assert!(run(bin()
        .arg("analyze")
        .arg(fx.path("corpus/u2.wav"))
        .arg(&model)
        .arg(&track))
    .status
    .success());
    let o = run(bin()
        .arg("--config")
        .arg(&cfg)
        .arg("synth")
        .arg(&track)
        .arg(fx.path("p.wav")));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    std::fs::write(&cfg, "envelope.order = 20\nnot.a.key = 1\n").unwrap();
    let o = run(bin().arg("--config").arg(&cfg).arg("--dump-config"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown config key 'not.a.key'"));
}

fn expect_error(o: &Output, code: i32, needle: &str) {
    assert_eq!(o.status.code(), Some(code), "stderr: {}", stderr(&o));
    let err = stderr(o);
    let lines: Vec<&str> = err.lines().filter(|l| l.starts_with("error=")).collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].contains(needle), "{err}");
}

#[test]
fn usage_and_input_errors() {
    let fx = Fixture::new();
    expect_error(&run(bin().arg("frobnicate")), 2, "error=usage");
    expect_error(&run(bin().arg("train")), 2, "required arguments");
    expect_error(&run(&mut bin()), 2, "missing subcommand");

    let empty = fx.path("empty");
    std::fs::create_dir(&empty).unwrap();
    std::fs::write(empty.join("broken.wav"), b"not audio").unwrap();
    expect_error(
        &run(bin().arg("train").arg(&empty).arg(fx.path("m.egrs"))),
        2,
        "no usable frames",
    );

    let model = fx.trained();
    let track = fx.path("t.egtk");
    assert!(run(bin()
        .arg("analyze")
        .arg(fx.path("corpus/u0.wav"))
        .arg(&model)
        .arg(&track))
    .status
    .success());
    expect_error(
        &run(bin().arg("synth").arg(&track).arg(fx.path("x.wav"))),
        2,
        "--model is required",
    );
    expect_error(
        &run(bin()
            .arg("synth")
            .arg(&track)
            .arg(fx.path("x.wav"))
            .args(["--excitation", "buzz"])),
        2,
        "expected eigen|pulse",
    );

    let other = fx.path("8k.wav");
    write_wav(&Signal::new(white_noise(8000, 1).into_vec(), 8000).unwrap(), &other).unwrap();
    expect_error(
        &run(bin().arg("analyze").arg(&other).arg(&model).arg(fx.path("o.egtk"))),
        2,
        "sample rate mismatch",
    );

    let bogus = fx.path("bogus.egrs");
    std::fs::write(&bogus, b"definitely not a model").unwrap();
    expect_error(
        &run(bin().arg("inspect").arg(&bogus).arg(fx.path("i"))),
        2,
        "not an eigenmodel file",
    );
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let fx = Fixture::new();
    let target: &Path = &fx.path("missing/dir/model.egrs");
    expect_error(
        &run(bin().arg("train").arg(fx.path("corpus")).arg(target)),
        1,
        "error=runtime",
    );
}
