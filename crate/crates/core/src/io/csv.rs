//! Diagnostics time series as CSV.

use crate::dynamics::{angular_pairs, DiagnosticsRecord};

const AXES: [&str; 3] = ["x", "y", "z"];

/// Seventeen significant digits, enough to round-trip any f64.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn diagnostics_header(d: usize) -> String {
    let mut cols = vec!["t".to_string(), "mass".to_string()];
    cols.extend(AXES[..d].iter().map(|a| format!("p{a}")));
    cols.push("kinetic".into());
    cols.extend(AXES[..d].iter().map(|a| format!("x{a}")));
    for c in ["ham", "gradsq", "virial_rhs"] {
        cols.push(c.into());
    }
    for (i, j) in angular_pairs(d) {
        cols.push(format!("ang_{}{}_re", AXES[i], AXES[j]));
        cols.push(format!("ang_{}{}_im", AXES[i], AXES[j]));
    }
    cols.join(",")
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord], d: usize) -> String {
    let mut out = diagnostics_header(d);
    out.push('\n');
    for r in records {
        let mut row = vec![r.t, r.mass];
        row.extend(&r.momentum);
        row.push(r.kinetic);
        row.extend(&r.position);
        row.extend([r.hamiltonian, r.grad_norm_sq, r.virial_rhs]);
        for a in &r.angular {
            row.extend([a.re, a.im]);
        }
        let cells: Vec<String> = row.into_iter().map(format_number).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headers() {
        assert_eq!(
            diagnostics_header(2),
            "t,mass,px,py,kinetic,xx,xy,ham,gradsq,virial_rhs,ang_xy_re,ang_xy_im"
        );
        assert_eq!(diagnostics_header(3).split(',').count(), 2 + 3 + 1 + 3 + 3 + 6);
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, -1.0 / 3.0, 6.02e23, f64::MIN_POSITIVE] {
            assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
        }
    }
}
