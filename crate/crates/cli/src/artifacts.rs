//! Deterministic artifact writers.
//!
//! CSV numbers use 17 significant digits (round-trip exact for f64); JSON
//! goes through serde with fixed struct field order. Re-running an
//! identical configuration reproduces every artifact byte for byte.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use klab_core::solver::{NonlocalTrajectory, SpectralField};
use serde::Serialize;

/// 17-significant-digit scientific notation.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Time label for field filenames: plain Display, trimmed by Rust's float
/// formatting ("1", "0.5", "2.5").
pub fn time_label(t: f64) -> String {
    format!("{t}")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable artifact");
    text.push('\n');
    fs::write(path, text)
}

/// `trajectory.csv`: one row per emitted time sample.
pub fn write_trajectory_csv(
    path: &Path,
    traj: &NonlocalTrajectory,
    i_values: &[f64],
    j_values: &[f64],
    l2_series: &[f64],
) -> std::io::Result<()> {
    let mut out = String::from("t,s,sprime,I,J,l2_energy\n");
    for k in 0..traj.len() {
        let i_v = i_values.get(k).copied().unwrap_or(f64::NAN);
        let j_v = j_values.get(k).copied().unwrap_or(f64::NAN);
        let l2 = l2_series.get(k).copied().unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_g17(traj.time(k)),
            fmt_g17(traj.s[k]),
            fmt_g17(traj.sprime[k]),
            fmt_g17(i_v),
            fmt_g17(j_v),
            fmt_g17(l2),
        ));
    }
    fs::write(path, out)
}

/// `fields_t<label>.csv`: columns rho, omega_index, component, re, im.
pub fn write_field_csv(path: &Path, field: &SpectralField) -> std::io::Result<()> {
    let grid = field.grid();
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "rho,omega_index,component,re,im")?;
    for q in 0..grid.n_sphere() {
        for i in 0..grid.n_rho() {
            let flat = grid.flat(q, i);
            for c in 0..field.components() {
                let z = field.entry(flat, c);
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    fmt_g17(grid.rho_nodes()[i]),
                    q,
                    c,
                    fmt_g17(z.re),
                    fmt_g17(z.im),
                )?;
            }
        }
    }
    w.flush()
}

/// `tau_profile.csv`: the τ-profile of the y-norm integrand.
pub fn write_tau_profile_csv(path: &Path, taus: &[f64], profile: &[f64]) -> std::io::Result<()> {
    let mut out = String::from("tau,profile\n");
    for (t, p) in taus.iter().zip(profile) {
        out.push_str(&format!("{},{}\n", fmt_g17(*t), fmt_g17(*p)));
    }
    fs::write(path, out)
}

pub fn ensure_dir(dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)
}

pub fn artifact_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
