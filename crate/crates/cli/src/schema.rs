//! Column layouts of every CSV the runner writes. Plotting scripts read
//! these files and nothing else, so a change here is a format change.

pub const ISING_PHASE: &[&str] = &["J1_over_h", "J2_over_h", "n", "gap", "phase_label"];

/// One row per evolution performed while searching for `t_a`.
pub const TA_RUNS: &[&str] = &["family", "path_label", "n", "epsilon", "t_tot", "fidelity", "norm_drift"];

/// `t_a` is empty when the target fidelity was not reached.
pub const TA_SUMMARY: &[&str] = &["path_label", "n", "t_a"];

pub const IS_ORDER: &[&str] = &[
    "Omega_over_Vg",
    "Ve_over_Vg",
    "n",
    "order_parameter",
    "gap",
    "m2",
    "m3",
    "phase_label",
];

pub const STAR_ENTROPY: &[&str] = &["b", "beta", "S_over_b", "center_occupation"];

/// Classical mixing and the two-state coupling at each `(b, β)`;
/// `t_mix` counts single-site steps and `t_m = t_mix/(2b+1)`.
pub const STAR_CLASSICAL: &[&str] = &[
    "b",
    "beta",
    "t_mix",
    "t_m",
    "parent_gap",
    "coupling_two_state",
    "coupling_full",
];

pub const MIXING_BOUND: &[&str] = &[
    "model",
    "instance",
    "n",
    "beta",
    "basis_size",
    "parent_gap",
    "t_mix",
    "t_m",
    "lower_bound",
    "bound_holds",
];

const LAYOUTS: &[(&str, &[&str])] = &[
    ("ising_phase.csv", ISING_PHASE),
    ("ising_ta_runs.csv", TA_RUNS),
    ("is_ta_runs.csv", TA_RUNS),
    ("star_ta_runs.csv", TA_RUNS),
    ("ising_ta.csv", TA_SUMMARY),
    ("is_ta.csv", TA_SUMMARY),
    ("star_ta.csv", TA_SUMMARY),
    ("is_order.csv", IS_ORDER),
    ("star_entropy.csv", STAR_ENTROPY),
    ("star_classical.csv", STAR_CLASSICAL),
    ("mixing_bound.csv", MIXING_BOUND),
];

/// Layout of a file by its name, which may carry an experiment-name
/// prefix such as `small_ising_ta.csv`.
pub fn columns_of(file: &str) -> Option<&'static [&'static str]> {
    let base = file.rsplit('/').next().unwrap_or(file);
    LAYOUTS
        .iter()
        .filter(|(name, _)| base == *name || base.strip_suffix(name).is_some_and(|p| p.ends_with('_')))
        .max_by_key(|(name, _)| name.len())
        .map(|(_, cols)| *cols)
}
