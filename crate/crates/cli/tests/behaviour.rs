mod common;

use common::*;
use efpf_kit_cli::output::{reformat_csv, reformat_json};

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn domain_errors_exit_2_with_one_line() {
    let out = run_line("efpf --alpha 2 --theta 1 --gamma 1 --n 3 --m 1");
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: kind=domain msg=\""), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    let out = run_line("efpf --alpha 0.5");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error: kind=usage"));
    let out = run_line("frobnicate");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_and_truncation_exit_3() {
    let out =
        run_line("cotrans --model bb --N 3 --alpha -1 --theta 2 --n 2 --m 20 --l 3 --brute-force");
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("kind=infeasible"));
    let out =
        run_line("consistency --model ibp3 --gamma 50 --alpha 0.5 --theta 1 --n 2 --m 1 --j-max 5");
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("kind=truncation"));
}

#[test]
fn failed_assert_exits_4_and_still_reports() {
    let out = run_line("limit-scan --alpha -1 --theta 2 --n 2 --k 1 --path constant --N 2 --m-grid 100,1000,10000 --assert --tol 1e-9");
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("kind=assert"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"final_gap\""));
}

#[test]
fn passing_audits_exit_0() {
    for line in [
        "consistency --model bb --N 3 --alpha -1 --theta 2 --n 2 --m 2 --assert --tol 1e-10",
        "consistency --model ibp3 --gamma 1 --alpha 0.5 --theta 1 --n 3 --m 1,2 --assert --tol 1e-9",
        "cotrans --model bb --N 2 --alpha -1 --theta 2 --n 1 --m 4 --l 2 --brute-force --assert --tol 1e-11",
        "identities --alpha 0 --theta 1.5 --n 4 --m 30 --assert --tol 1e-11",
        "growth-law --model bb --N 3 --alpha -1 --theta 2 --n 500 --runs 100 --seed 1 --assert --tol 0.01",
    ] {
        let out = run_line(line);
        assert_eq!(out.status.code(), Some(0), "{line}: {}", stderr(&out));
    }
}

#[test]
fn outputs_round_trip_byte_identically() {
    for (name, line) in GOLDEN {
        let out = run_line(line);
        let text = String::from_utf8(out.stdout).unwrap();
        if name.ends_with(".json") {
            assert_eq!(reformat_json(&text).unwrap(), text, "{name}");
        } else {
            assert_eq!(reformat_csv(&text), text, "{name}");
        }
    }
    let out =
        run_line("limit-scan --alpha 0.5 --theta 1 --n 2 --k 1 --path log1p --m-grid 100,1000");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"nan\""));
    assert_eq!(reformat_json(&text).unwrap(), text);
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = std::env::temp_dir().join(format!("efpf-kit-config-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(
        &cfg,
        "# bb audit\ncommand=consistency\nmodel=bb\nN=3\nalpha=-1\ntheta=2\nn=2\nm=2\nassert=true\ntol=1e-10\n",
    )
    .unwrap();
    let cfg_s = cfg.to_str().unwrap();

    let from_file = run(&["--config", cfg_s]);
    assert_eq!(from_file.status.code(), Some(0), "{}", stderr(&from_file));
    let direct = run_line(
        "consistency --model bb --N 3 --alpha -1 --theta 2 --n 2 --m 2 --assert --tol 1e-10",
    );
    assert_eq!(from_file.stdout, direct.stdout);

    let overridden = run(&["consistency", "--config", cfg_s, "--n", "3", "--m", "1,2"]);
    assert_eq!(overridden.status.code(), Some(0), "{}", stderr(&overridden));
    let text = String::from_utf8(overridden.stdout).unwrap();
    assert!(
        text.contains("\"n\": 3,") && text.contains("\"m\": [1, 2],"),
        "{text}"
    );

    let out_path = dir.join("out.csv");
    let written = run(&[
        "--config",
        cfg_s,
        "--output",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(written.status.code(), Some(0));
    assert!(written.stdout.is_empty());
    assert!(std::fs::read_to_string(&out_path)
        .unwrap()
        .starts_with("command,model,"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn seeds_reproduce_and_thread_count_does_not_matter() {
    let line =
        "growth-law --model ibp3 --gamma 1 --alpha 0.5 --theta 1 --n 1000 --runs 64 --seed 9";
    let a = run_line(line);
    let b = std::process::Command::new(BIN)
        .args(line.split_whitespace())
        .env("EFPF_KIT_THREADS", "1")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run_line("sample --model ibp3 --gamma 3 --alpha 0.2 --theta 1 --n 10 --seed 9");
    let d = run_line("sample --model ibp3 --gamma 3 --alpha 0.2 --theta 1 --n 10 --seed 9");
    let e = run_line("sample --model ibp3 --gamma 3 --alpha 0.2 --theta 1 --n 10 --seed 10");
    assert_eq!(c.stdout, d.stdout);
    assert_ne!(c.stdout, e.stdout);
}

#[test]
fn efpf_matches_library() {
    use efpf_core::efpf::{efpf_ibp3, FeatureCounts, Ibp3Params};
    let out = run_line("efpf --model ibp3 --gamma 1 --alpha 0.5 --theta 1 --n 3 --m 1,2");
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = Ibp3Params::new(1.0, 0.5, 1.0).unwrap();
    let lib = efpf_ibp3(&p, &FeatureCounts::new(3, vec![1, 2]).unwrap()).log_mag();
    assert_eq!(v["log_prob"].as_f64().unwrap(), lib);
}
