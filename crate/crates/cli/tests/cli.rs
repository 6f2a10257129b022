use std::fs;
use std::path::Path;
use std::process::Command;

fn binrbm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_binrbm"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn gen_config(out_dir: &Path) -> String {
    format!(
        "n=8\nm=2\nd=12\nbeta=1.0\nseed=11\nout_dir={}\n",
        out_dir.display()
    )
}

#[test]
fn generate_writes_both_files_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    for out in [&out_a, &out_b] {
        let cfg = write_config(tmp.path(), "gen.cfg", &gen_config(out));
        let status = binrbm().args(["generate", "--config"]).arg(&cfg).status().unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let model_a = fs::read(out_a.join("teacher-model.txt")).unwrap();
    let model_b = fs::read(out_b.join("teacher-model.txt")).unwrap();
    assert_eq!(model_a, model_b);
    let data_a = fs::read(out_a.join("dataset.txt")).unwrap();
    let data_b = fs::read(out_b.join("dataset.txt")).unwrap();
    assert_eq!(data_a, data_b);
    assert!(String::from_utf8(data_a).unwrap().starts_with("# binrbm-dataset N=8 D=12\n"));
}

#[test]
fn generate_unwritable_out_dir_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "gen.cfg",
        "n=4\nm=1\nd=2\nseed=1\nout_dir=/proc/no-such-place\n",
    );
    let out = binrbm().args(["generate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_config_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.cfg", "n=4\nm=1\nd=2\nlearning_rate=0.1\n");
    let out = binrbm().args(["generate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_runs_both_variants_and_writes_well_formed_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "gen.cfg", &gen_config(&out));
    assert_eq!(binrbm().args(["generate", "--config"]).arg(&cfg).status().unwrap().code(), Some(0));
    for variant in ["huang", "bayes"] {
        let tcfg = write_config(
            tmp.path(),
            "train.cfg",
            &format!(
                "m=2\ndata_path={d}\nmodel_path={m}\nout_dir={o}\nvariant={variant}\nalpha=0.05\nepochs=3\nseed=11\n",
                d = out.join("dataset.txt").display(),
                m = out.join("teacher-model.txt").display(),
                o = out.display()
            ),
        );
        let res = binrbm().args(["train", "--config"]).arg(&tcfg).output().unwrap();
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
        let trace = fs::read_to_string(out.join(format!("{variant}-trace.csv"))).unwrap();
        let lines: Vec<&str> = trace.lines().collect();
        assert_eq!(
            lines[0],
            "epoch,elbo,overlap,clip_events,max_abs_lambda,max_abs_eta,mp_failures,wall_ms"
        );
        assert_eq!(lines.len(), 1 + 3 + 1); // header + epochs + closing row
        assert!(out.join(format!("{variant}-vstate.txt")).exists());
    }
}

#[test]
fn train_zero_epochs_single_row() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "gen.cfg", &gen_config(&out));
    assert_eq!(binrbm().args(["generate", "--config"]).arg(&cfg).status().unwrap().code(), Some(0));
    let tcfg = write_config(
        tmp.path(),
        "train.cfg",
        &format!(
            "m=2\ndata_path={d}\nout_dir={o}\nvariant=bayes\nepochs=0\nseed=11\n",
            d = out.join("dataset.txt").display(),
            o = out.display()
        ),
    );
    assert_eq!(binrbm().args(["train", "--config"]).arg(&tcfg).status().unwrap().code(), Some(0));
    let trace = fs::read_to_string(out.join("bayes-trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2); // header + one row
}

#[test]
fn train_missing_dataset_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let tcfg = write_config(
        tmp.path(),
        "train.cfg",
        &format!(
            "m=2\ndata_path={}/nope.txt\nout_dir={}\nepochs=1\n",
            tmp.path().display(),
            tmp.path().display()
        ),
    );
    assert_eq!(binrbm().args(["train", "--config"]).arg(&tcfg).output().unwrap().status.code(), Some(2));
}

#[test]
fn train_dimension_mismatch_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "gen.cfg", &gen_config(&out));
    assert_eq!(binrbm().args(["generate", "--config"]).arg(&cfg).status().unwrap().code(), Some(0));
    // dataset has N=8; claim n=9
    let tcfg = write_config(
        tmp.path(),
        "train.cfg",
        &format!(
            "n=9\nm=2\ndata_path={d}\nout_dir={o}\nepochs=1\n",
            d = out.join("dataset.txt").display(),
            o = out.display()
        ),
    );
    assert_eq!(binrbm().args(["train", "--config"]).arg(&tcfg).output().unwrap().status.code(), Some(3));
}

#[test]
fn check_identities_passes() {
    let out = binrbm().args(["check", "--suite", "identities"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn check_mpcheck_forced_zero_tolerance_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "tol.cfg", "check_tolerance=0\n");
    let out = binrbm()
        .args(["check", "--suite", "mpcheck", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn check_unknown_suite_exits_2() {
    let out = binrbm().args(["check", "--suite", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_env_var_is_validated() {
    let out = binrbm()
        .env("BINRBM_THREADS", "zero")
        .args(["check", "--suite", "identities"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let ok = binrbm()
        .env("BINRBM_THREADS", "2")
        .args(["check", "--suite", "identities"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
}
