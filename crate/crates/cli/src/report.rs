//! Residual reports: per-point records plus a summary that is always
//! recomputable from them, serialized as JSON or CSV.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub rng_seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub coords: Vec<f64>,
    /// None at non-convergent points.
    pub phi: Option<f64>,
    pub params: Vec<f64>,
    /// Normalized residuals aligned with `residual_names`; empty when the
    /// point failed.
    pub residuals: Vec<f64>,
    /// "ok", "singular", "no-converge" or "error".
    pub status: String,
    pub iterations: usize,
}

impl PointRecord {
    pub fn converged(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total_points: usize,
    pub converged_points: usize,
    pub convergence_fraction: f64,
    /// Max |normalized residual| over convergent points; None when
    /// nothing converged.
    pub max_normalized: Option<f64>,
    pub rms_normalized: Option<f64>,
}

impl Summary {
    pub fn from_points(points: &[PointRecord]) -> Summary {
        let total = points.len();
        let converged = points.iter().filter(|p| p.converged()).count();
        let mut max: Option<f64> = None;
        let mut sum_sq = 0.0;
        let mut n = 0usize;
        for p in points.iter().filter(|p| p.converged()) {
            for &r in &p.residuals {
                let a = r.abs();
                // NaN must poison the maximum, not vanish into it.
                max = Some(match max {
                    Some(m) if !(a.is_nan() || m.is_nan()) => m.max(a),
                    Some(_) => f64::NAN,
                    None => a,
                });
                sum_sq += r * r;
                n += 1;
            }
        }
        Summary {
            total_points: total,
            converged_points: converged,
            convergence_fraction: if total == 0 { 1.0 } else { converged as f64 / total as f64 },
            max_normalized: max,
            rms_normalized: (n > 0).then(|| (sum_sq / n as f64).sqrt()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub scenario: String,
    pub equation: String,
    pub provenance: Provenance,
    pub coord_names: Vec<String>,
    pub param_names: Vec<String>,
    pub residual_names: Vec<String>,
    pub points: Vec<PointRecord>,
    pub summary: Summary,
}

impl ResidualReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Fixed columns: coords…, phi, params…, residual_<name>…, status,
    /// iterations. Failed points leave the numeric cells empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut header: Vec<String> = self.coord_names.clone();
        header.push("phi".into());
        header.extend(self.param_names.iter().cloned());
        header.extend(self.residual_names.iter().map(|n| format!("residual_{n}")));
        header.push("status".into());
        header.push("iterations".into());
        out.push_str(&header.join(","));
        out.push('\n');
        for p in &self.points {
            let mut row: Vec<String> = p.coords.iter().map(|c| format!("{c}")).collect();
            match p.phi {
                Some(v) => row.push(format!("{v}")),
                None => row.push(String::new()),
            }
            for i in 0..self.param_names.len() {
                row.push(p.params.get(i).map_or_else(String::new, |v| format!("{v}")));
            }
            for i in 0..self.residual_names.len() {
                row.push(p.residuals.get(i).map_or_else(String::new, |v| format!("{v}")));
            }
            row.push(p.status.clone());
            row.push(format!("{}", p.iterations));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// FNV-1a over the canonical config serialization; enough to pin a
/// report to the exact configuration that produced it.
pub fn config_hash(canonical: &str) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in canonical.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}
