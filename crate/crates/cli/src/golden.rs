//! Pinned invocations whose outputs are kept as golden files under
//! `tests/golden` of this crate.

/// `(file name, command line)` for each pinned command.
pub const GOLDEN: &[(&str, &str)] = &[
    (
        "efpf_ibp3.json",
        "efpf --model ibp3 --gamma 1 --alpha 0.5 --theta 1 --n 3 --m 1,2",
    ),
    (
        "efpf_bb.csv",
        "efpf --model bb --N 3 --alpha -1 --theta 2 --n 4 --m 1,3 --output csv",
    ),
    (
        "consistency_bb.json",
        "consistency --model bb --N 3 --alpha -1 --theta 2 --n 2 --m 2 --assert --tol 1e-10",
    ),
    (
        "cotrans_ibp.json",
        "cotrans --alpha 0.5 --theta 1 --n 2 --m 5 --l 3",
    ),
    (
        "cotrans_bb_brute.csv",
        "cotrans --model bb --N 3 --alpha -1 --theta 2 --n 2 --m 6 --l 3 --brute-force --output csv",
    ),
    (
        "limit_scan_constant.csv",
        "limit-scan --alpha -1 --theta 2 --n 2 --k 1 --path constant --N 2 --m-grid 100,1000,10000 --output csv",
    ),
    (
        "sample_ibp3.csv",
        "sample --model ibp3 --gamma 2 --alpha 0.5 --theta 1 --n 6 --seed 7 --output csv",
    ),
    (
        "sample_bb.json",
        "sample --model bb --N 3 --alpha -1 --theta 2 --n 8 --seed 11 --stream 2",
    ),
    (
        "growth_law_bb.json",
        "growth-law --model bb --N 3 --alpha -1 --theta 2 --n 500 --runs 200 --seed 5",
    ),
    (
        "identities.json",
        "identities --alpha 0.5 --theta 1 --n 3 --m 20 --l 4",
    ),
];

/// Every subcommand name.
pub const SUBCOMMANDS: &[&str] = &[
    "efpf",
    "consistency",
    "cotrans",
    "limit-scan",
    "sample",
    "growth-law",
    "identities",
];
