//! Cross-platform reproducibility: outputs of the deterministic math are
//! frozen as bit patterns. Any platform that implements IEEE-754 basic
//! operations must reproduce every line exactly.
//!
//! Regenerate (only after an intentional change) with
//! `LOCKSTEP_REGEN_GOLDEN=1 cargo test -p lockstep-core --test golden`.

use std::fs;
use std::path::PathBuf;

use lockstep_core::{det_cos, det_exp, det_ln, det_sin, det_tan, DetRng};

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.txt"))
}

fn inputs(lo: f64, hi: f64, salt: u64) -> Vec<f64> {
    let mut xs = vec![0.0, -0.0, 1.0, -1.0, 0.5, 2.0, std::f64::consts::PI, 1e-300, 5e-324];
    let mut rng = DetRng::new(0x601d_0000 + salt);
    xs.extend((0..240).map(|_| rng.range(lo, hi)));
    xs
}

fn render(f: fn(f64) -> f64, xs: &[f64]) -> String {
    xs.iter().map(|&x| format!("{:016x} {:016x}\n", x.to_bits(), f(x).to_bits())).collect()
}

fn check(name: &str, f: fn(f64) -> f64, xs: Vec<f64>) {
    let path = golden_path(name);
    if std::env::var_os("LOCKSTEP_REGEN_GOLDEN").is_some() {
        fs::write(&path, render(f, &xs)).unwrap();
        return;
    }
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = 0;
    for (n, line) in text.lines().enumerate() {
        let (input, output) = line.split_once(' ').expect("two hex fields");
        let x = f64::from_bits(u64::from_str_radix(input, 16).unwrap());
        let want = u64::from_str_radix(output, 16).unwrap();
        assert_eq!(f(x).to_bits(), want, "{name} line {}: input {x:e}", n + 1);
        lines += 1;
    }
    assert!(lines >= 200, "{name}: golden file too short");
}

#[test]
fn sin_golden() {
    check("det_sin", det_sin, inputs(-1e3, 1e3, 1));
}

#[test]
fn cos_golden() {
    check("det_cos", det_cos, inputs(-1e3, 1e3, 2));
}

#[test]
fn tan_golden() {
    check("det_tan", det_tan, inputs(-10.0, 10.0, 3));
}

#[test]
fn exp_golden() {
    check("det_exp", det_exp, inputs(-750.0, 710.0, 4));
}

#[test]
fn ln_golden() {
    check("det_ln", det_ln, inputs(1e-9, 1e9, 5));
}
