use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use shapefit::RasterImage;

const SMALL: &[&str] = &["--levels", "4,12", "--probes", "30", "--climbers", "2", "--max-age", "10"];

fn shapefit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapefit")).args(args).env_remove("SHAPEFIT_WORKERS").output().unwrap()
}

fn shapefit_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapefit")).args(args).env(key, value).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn photo(path: &Path, w: u32, h: u32, seed: u32) {
    RasterImage::from_fn(w, h, |x, y| {
        let r = ((x * 7 + seed * 31) % 256) as u8;
        let g = ((y * 11 + x * y) % 256) as u8;
        let b = if (x / 5 + y / 4 + seed).is_multiple_of(2) { 200 } else { 40 };
        [r, g, b]
    })
    .unwrap()
    .save_png(path)
    .unwrap();
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn with_small<'a>(base: &[&'a str]) -> Vec<&'a str> {
    let mut v = base.to_vec();
    v.extend_from_slice(SMALL);
    v
}

#[test]
fn fit_writes_every_level_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("a.png");
    photo(&img, 40, 30, 1);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let out = shapefit(&with_small(&["fit", s(&img), "-o", s(&a), "--trace", "--seed", "5"]));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("level\trmse\tsvg_bytes\tforced_steps\n4\t"), "{stdout}");
    for f in ["4.svg", "4.json", "4.png", "12.svg", "12.json", "12.png", "trace.jsonl", "config.txt"] {
        assert!(a.join(f).is_file(), "{f}");
    }
    assert_eq!(fs::read_to_string(a.join("trace.jsonl")).unwrap().lines().count(), 12);
    let png = RasterImage::open(a.join("12.png")).unwrap();
    assert_eq!((png.width(), png.height()), (40, 30));

    // Rerun from the recorded configuration alone.
    let out = shapefit(&["fit", s(&img), "-o", s(&b), "--config", s(&a.join("config.txt"))]);
    assert_eq!(code(&out), 0);
    for f in ["4.svg", "12.svg", "12.json", "12.png", "config.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn flags_override_config_file_which_overrides_environment() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("a.png");
    photo(&img, 20, 20, 2);
    let cfg = dir.path().join("c.txt");
    fs::write(&cfg, "# test\nalpha = 90\nmode = 1\nworkers = 3\nlevels = 2,4\nprobes = 20\nmax-age = 5\n").unwrap();

    let out_dir = dir.path().join("o1");
    let o = shapefit_env(&["fit", s(&img), "-o", s(&out_dir), "--config", s(&cfg), "--alpha", "200"], "SHAPEFIT_WORKERS", "2");
    assert_eq!(code(&o), 0);
    let resolved = fs::read_to_string(out_dir.join("config.txt")).unwrap();
    for line in ["alpha = 200", "mode = 1", "workers = 3", "levels = 2,4", "probes = 20", "max_age = 5"] {
        assert!(resolved.lines().any(|l| l == line), "{line} in {resolved}");
    }

    let out_dir = dir.path().join("o2");
    let o = shapefit_env(&["fit", s(&img), "-o", s(&out_dir), "--levels", "3"], "SHAPEFIT_WORKERS", "2");
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(out_dir.join("config.txt")).unwrap().contains("workers = 2\n"));
    let o = shapefit_env(&["fit", s(&img), "-o", s(&out_dir), "--levels", "3", "--workers", "1"], "SHAPEFIT_WORKERS", "2");
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(out_dir.join("config.txt")).unwrap().contains("workers = 1\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("a.png");
    photo(&img, 16, 16, 3);
    let out = dir.path().join("o");
    let o = s(&out);

    assert_eq!(code(&shapefit(&["fit"])), 2);
    assert_eq!(code(&shapefit(&["fit", s(&img), "--bogus"])), 2);
    assert_eq!(code(&shapefit(&["fit", s(&img), "--mode", "2"])), 2);
    assert_eq!(code(&shapefit(&["fit", s(&img), "-o", o, "--levels", "5,3"])), 2);
    assert_eq!(code(&shapefit(&["fit", s(&img), "-o", o, "--alpha", "0"])), 2);
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "colour = red\n").unwrap();
    assert_eq!(code(&shapefit(&["fit", s(&img), "-o", o, "--config", s(&bad)])), 2);
    assert_eq!(code(&shapefit(&["fit", s(&img), "-o", o, "--config", s(&dir.path().join("none.txt"))])), 2);
    assert_eq!(code(&shapefit_env(&["fit", s(&img), "-o", o], "SHAPEFIT_WORKERS", "many")), 2);

    let missing = shapefit(&["fit", s(&dir.path().join("missing.png")), "-o", o]);
    assert_eq!(code(&missing), 1);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("missing.png"));
    let junk = dir.path().join("junk.png");
    fs::write(&junk, b"not a png").unwrap();
    assert_eq!(code(&shapefit(&["fit", s(&junk), "-o", o])), 1);
    assert_eq!(code(&shapefit(&["size", s(&junk)])), 1);
    assert_eq!(code(&shapefit(&["render", s(&junk), "-o", s(&dir.path().join("r.png"))])), 1);
    assert_eq!(code(&shapefit(&["analyze", s(&junk)])), 1);
}

#[test]
fn render_and_size_accept_json_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("a.png");
    photo(&img, 50, 24, 4);
    let out = dir.path().join("o");
    assert_eq!(code(&shapefit(&with_small(&["fit", s(&img), "-o", s(&out)]))), 0);

    let (from_json, from_svg) = (dir.path().join("j.png"), dir.path().join("s.png"));
    assert_eq!(code(&shapefit(&["render", s(&out.join("12.json")), "-o", s(&from_json)])), 0);
    assert_eq!(code(&shapefit(&["render", s(&out.join("12.svg")), "-o", s(&from_svg)])), 0);
    assert_eq!(fs::read(&from_json).unwrap(), fs::read(&from_svg).unwrap());
    assert_eq!(fs::read(&from_json).unwrap(), fs::read(out.join("12.png")).unwrap());

    let working = dir.path().join("w.png");
    assert_eq!(code(&shapefit(&["render", s(&out.join("12.json")), "-o", s(&working), "--scale", "working"])), 0);
    assert!(RasterImage::open(&working).is_ok());

    let a = shapefit(&["size", s(&out.join("12.json"))]);
    let b = shapefit(&["size", s(&out.join("12.svg"))]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let svg_len = fs::metadata(out.join("12.svg")).unwrap().len();
    assert!(text.starts_with(&format!("svg_bytes\t{svg_len}\n")), "{text}");
    let json = shapefit(&["size", s(&out.join("12.json")), "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["svg_bytes"], svg_len);
}

fn corpus(root: &Path, per_class: u32) {
    for (c, class) in ["cats", "dogs"].iter().enumerate() {
        fs::create_dir_all(root.join(class)).unwrap();
        for i in 0..per_class {
            photo(&root.join(class).join(format!("{i:02}.png")), 18 + i, 14 + c as u32, i * 3 + c as u32);
        }
    }
}

fn manifest_lines(out: &Path) -> usize {
    fs::read_to_string(out.join("manifest.jsonl")).unwrap().lines().count()
}

#[test]
fn dataset_interrupt_resume_and_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    corpus(&input, 5);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let base = |out: &PathBuf| -> Vec<String> {
        let mut v: Vec<String> =
            ["dataset", s(&input), "-o", s(out), "--modes", "0,1", "--split", "3:1:1", "--seed", "8"].map(String::from).to_vec();
        v.extend(SMALL.iter().map(|x| x.to_string()));
        v
    };
    let run = |args: Vec<String>| shapefit(&args.iter().map(String::as_str).collect::<Vec<_>>());

    let mut partial = base(&b);
    partial.extend(["--stop-after", "3"].map(String::from));
    let o = run(partial);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--resume"));
    assert_eq!(manifest_lines(&b), 3);
    assert!(b.join("config.txt").is_file());

    let mut resume = base(&b);
    resume.push("--resume".into());
    assert_eq!(code(&run(resume)), 0);
    let o = run(base(&a));
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "entries\t10\nok\t10\nfailed\t0\n");
    assert_eq!(fs::read(a.join("manifest.jsonl")).unwrap(), fs::read(b.join("manifest.jsonl")).unwrap());
    assert_eq!(manifest_lines(&a), 10);

    // The recorded configuration reproduces the run.
    let c = dir.path().join("c");
    let cfg = a.join("config.txt");
    assert_eq!(code(&shapefit(&["dataset", s(&input), "-o", s(&c), "--config", s(&cfg)])), 0);
    assert_eq!(fs::read(a.join("manifest.jsonl")).unwrap(), fs::read(c.join("manifest.jsonl")).unwrap());

    let manifest = a.join("manifest.jsonl");
    let report = dir.path().join("report");
    let csv = dir.path().join("g.csv");
    let args = ["analyze", s(&manifest), "--groups", "4", "--sample", "8", "--seed", "3"];
    let first = shapefit(&[&args[..], &["--out", s(&report), "--csv", s(&csv)]].concat());
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let second = shapefit(&args);
    assert_eq!(first.stdout, second.stdout);
    for f in ["report.json", "summary.json", "groups.csv", "config.txt"] {
        assert!(report.join(f).is_file(), "{f}");
    }
    assert_eq!(fs::read(&csv).unwrap(), fs::read(report.join("groups.csv")).unwrap());
    let json = shapefit(&[&args[..], &["--format", "json"]].concat());
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["groups"]["groups"].as_array().unwrap().len(), 4);

    assert_eq!(code(&shapefit(&["analyze", s(&manifest)])), 1);
    assert_eq!(code(&shapefit(&["dataset", s(&input), "-o", s(&c), "--split", "8:x"])), 2);
}
