use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use trisr_core::volume_io::synthetic::{phantom, PhantomConfig};
use trisr_core::volume_io::{self, Volume};

const SUBCOMMANDS: [&str; 7] = ["convert", "patch", "downsample", "train", "infer", "eval", "dynamics"];

const TINY_CONFIG: &str = "\
[train]
total_iters = 3
batch_size = 1
checkpoint_every = 2

[data]
window = 16
stride = 16

[model]
base_channels = 4
growth_channels = 4
num_rrdb = 1
critic_stages = 4:2,8:2
fe_base_channels = 4
";

fn trisr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trisr")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_phantom(dir: &Path, name: &str, edge: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    volume_io::save(&phantom([edge; 3], seed, &PhantomConfig::default()).unwrap(), &path).unwrap();
    path
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn help_output_matches_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for name in std::iter::once("trisr").chain(SUBCOMMANDS) {
        let out = if name == "trisr" { trisr(&["--help"]) } else { trisr(&[name, "--help"]) };
        assert_eq!(out.status.code(), Some(0), "{name} --help");
        let golden = golden_dir().join(format!("{name}.txt"));
        if update {
            fs::write(&golden, &out.stdout).unwrap();
        }
        let expected = fs::read_to_string(&golden).unwrap_or_else(|_| panic!("missing {}", golden.display()));
        assert_eq!(stdout(&out), expected, "help text of `{name}` changed");
    }
}

#[test]
fn help_lists_every_flag() {
    let expect: [(&str, &[&str]); 7] = [
        ("convert", &["--in", "--out"]),
        ("patch", &["--in", "--out", "--window", "--stride", "--normalize"]),
        ("downsample", &["--in", "--out"]),
        ("train", &["--config", "--data", "--out", "--set", "--iters", "--seed", "--resume", "--stop-after", "--log-every"]),
        ("infer", &["--checkpoint", "--in", "--out", "--window", "--stride", "--threads"]),
        ("eval", &["--ref", "--test", "--data-range", "--window"]),
        ("dynamics", &["--loss", "--noise", "--pairing", "--sigma0", "--steps", "--lr", "--theta0", "--psi0", "--seed", "--out"]),
    ];
    for (cmd, flags) in expect {
        let help = stdout(&trisr(&[cmd, "--help"]));
        for f in flags {
            assert!(help.contains(f), "`{cmd} --help` lacks {f}");
        }
    }
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(trisr(&[]).status.code(), Some(1));
    assert_eq!(trisr(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(trisr(&["eval", "--ref", "a.rvol", "--test", "b.rvol", "--bogus"]).status.code(), Some(1));
    let dir = TempDir::new().unwrap();
    let vol = write_phantom(dir.path(), "v.rvol", 32, 0);
    let out = dir.path().join("run");
    let o = trisr(&["train", "--data", p(&vol), "--out", p(&out), "--set", "train.no_such_key=1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn data_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.rvol");
    let out = dir.path().join("out.rvol");
    assert_eq!(trisr(&["downsample", "--in", p(&missing), "--out", p(&out)]).status.code(), Some(2));
    let bad = dir.path().join("bad.rvol");
    fs::write(&bad, b"XXXX0000").unwrap();
    assert_eq!(trisr(&["convert", "--in", p(&bad), "--out", p(&out)]).status.code(), Some(2));
    let odd = dir.path().join("odd.rvol");
    volume_io::save(&Volume::zeros([3, 4, 4], [1.0; 3]).unwrap(), &odd).unwrap();
    assert_eq!(trisr(&["downsample", "--in", p(&odd), "--out", p(&out)]).status.code(), Some(2));
}

#[test]
fn downsample_halves_and_convert_round_trips() {
    let dir = TempDir::new().unwrap();
    let hr = write_phantom(dir.path(), "hr.rvol", 16, 3);
    let lr = dir.path().join("lr.rvol");
    let o = trisr(&["downsample", "--in", p(&hr), "--out", p(&lr)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[downsample]"));
    assert_eq!(volume_io::load(&lr).unwrap().dims(), [8, 8, 8]);

    let nii = dir.path().join("hr.nii");
    let back = dir.path().join("back.rvol");
    assert!(trisr(&["convert", "--in", p(&hr), "--out", p(&nii)]).status.success());
    assert!(trisr(&["convert", "--in", p(&nii), "--out", p(&back)]).status.success());
    assert_eq!(volume_io::load(&back).unwrap(), volume_io::load(&hr).unwrap());
}

#[test]
fn patch_writes_one_file_per_origin() {
    let dir = TempDir::new().unwrap();
    let v = write_phantom(dir.path(), "v.rvol", 24, 1);
    let out = dir.path().join("patches");
    let o = trisr(&["patch", "--in", p(&v), "--out", p(&out), "--window", "16", "--stride", "8"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "8 patches");
    let origins = fs::read_to_string(out.join("origins.csv")).unwrap();
    assert_eq!(origins.lines().count(), 9);
    assert_eq!(volume_io::load(&out.join("patch_00007.rvol")).unwrap().dims(), [16; 3]);
}

#[test]
fn eval_prints_a_csv_row_per_test_volume() {
    let dir = TempDir::new().unwrap();
    let a = write_phantom(dir.path(), "a.rvol", 16, 1);
    let b = write_phantom(dir.path(), "b.rvol", 16, 2);
    let o = trisr(&["eval", "--ref", p(&a), "--test", p(&a), p(&b)]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("test,psnr,ssim,nrmse"));
    let same: Vec<f64> = lines[1].split(',').skip(1).take(3).map(|v| v.parse().unwrap()).collect();
    assert_eq!(same, [99.0, 1.0, 0.0]);
}

#[test]
fn train_then_infer_end_to_end() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("data");
    fs::create_dir(&data).unwrap();
    write_phantom(&data, "a.rvol", 32, 5);
    let cfg = dir.path().join("tiny.ini");
    fs::write(&cfg, TINY_CONFIG).unwrap();
    let run = dir.path().join("run");
    let o = trisr(&["train", "--config", p(&cfg), "--data", p(&data), "--out", p(&run), "--log-every", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("[train]") && err.contains("total_iters = 3"));
    let csv = fs::read_to_string(run.join("losses.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(run.join("checkpoints/state_00000002.tsrc").exists());
    assert!(run.join("state.tsrc").exists());

    let lr = write_phantom(dir.path(), "lr.rvol", 16, 9);
    let sr = dir.path().join("sr.rvol");
    let gen = run.join("generator.tsrc");
    let o = trisr(&["infer", "--checkpoint", p(&gen), "--in", p(&lr), "--out", p(&sr), "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(volume_io::load(&sr).unwrap().dims(), [32, 32, 32]);
}

#[test]
fn diverging_training_exits_3_and_dumps_state() {
    let dir = TempDir::new().unwrap();
    let vol = write_phantom(dir.path(), "v.rvol", 32, 0);
    let cfg = dir.path().join("tiny.ini");
    fs::write(&cfg, TINY_CONFIG).unwrap();
    let run = dir.path().join("run");
    let o = trisr(&[
        "train", "--config", p(&cfg), "--data", p(&vol), "--out", p(&run), "--set", "train.gamma=1e30", "--iters", "20",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(run.join("failed_state.tsrc").exists());
}

#[test]
fn dynamics_writes_trajectory_and_portrait() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("dyn");
    let o = trisr(&["dynamics", "--loss", "ragan", "--noise", "annealed", "--steps", "50", "--out", p(&out)]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(out.join("trajectory.csv")).unwrap().lines().count(), 52);
    assert!(fs::read(out.join("trajectory.pgm")).unwrap().starts_with(b"P5\n"));
}
