mod common;

use common::*;
use efpf_kit_cli::golden::SUBCOMMANDS;

#[test]
fn pinned_commands_match_golden_files() {
    let failures: Vec<String> = check_all_golden()
        .into_iter()
        .filter_map(|(_, r)| r.err())
        .collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn help_matches_golden_files() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    compare_golden("help.txt", &out.stdout).unwrap();
    for sub in SUBCOMMANDS {
        let out = run(&[sub, "--help"]);
        assert!(out.status.success(), "{sub}");
        compare_golden(&format!("help_{sub}.txt"), &out.stdout).unwrap();
    }
}

#[test]
fn help_lists_every_flag() {
    let expected: &[(&str, &[&str])] = &[
        (
            "efpf",
            &[
                "--model", "--gamma", "--alpha", "--theta", "--N", "--n", "--m", "--output",
                "--out", "--config",
            ],
        ),
        (
            "consistency",
            &["--j-max", "--tail-tol", "--assert", "--tol"],
        ),
        ("cotrans", &["--l", "--k", "--brute-force"]),
        ("limit-scan", &["--path", "--c", "--m-grid"]),
        ("sample", &["--seed", "--stream"]),
        ("growth-law", &["--runs", "--seed"]),
        ("identities", &["--l", "--assert"]),
    ];
    for (sub, flags) in expected {
        let text = String::from_utf8(run(&[sub, "--help"]).stdout).unwrap();
        for f in *flags {
            assert!(
                text.contains(&format!("{f} ")) || text.contains(&format!("{f}\n")),
                "{sub} {f}"
            );
        }
    }
}
