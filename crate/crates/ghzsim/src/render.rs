//! Text rendering of levels, numbers and detection tables.

use std::collections::BTreeMap;

use ghzsim_core::verify::LevelDistribution;
use serde_json::{json, Value};

/// Round to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// 12 significant digits, scientific notation for very small or large values.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let r = round_sig(x);
    if r == 0.0 {
        "0".to_string()
    } else if r.abs() < 1e-4 || r.abs() >= 1e12 {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

/// JSON number rounded to 12 significant digits (non-finite becomes null).
pub fn json_num(x: f64) -> Value {
    json!(round_sig(x))
}

/// OAM levels as letters `a, b, c, ...` when `d <= 26`, else as digits.
pub fn render_oam(levels: &[u32], d: u32) -> String {
    if d <= 26 {
        levels.iter().map(|&l| char::from(b'a' + l as u8)).collect()
    } else {
        render_spatial(levels, d)
    }
}

/// Spatial levels as a digit string when `d <= 10`, else comma-separated.
pub fn render_spatial(levels: &[u32], d: u32) -> String {
    if d <= 10 {
        levels.iter().map(|l| l.to_string()).collect()
    } else {
        let parts: Vec<String> = levels.iter().map(|l| l.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

fn parity_subscript(x: &[u32], d: u32) -> String {
    if d <= 10 {
        x.iter().map(|v| v.to_string()).collect()
    } else {
        x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Markdown analogue of the parity (OAM) and phase (spatial) detection tables.
pub fn tables_markdown(
    d: u32,
    n: usize,
    parity: &BTreeMap<Vec<u32>, LevelDistribution>,
    phase: &BTreeMap<u32, LevelDistribution>,
) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "Table 1. Initial states and the possible detections in OAM DOF (d={d}, n={n}).\n\n"
    ));
    out.push_str("| Initial states | Possible detections in OAM DOF |\n|---|---|\n");
    for (x, dist) in parity {
        let outcomes: Vec<String> = dist.keys().map(|o| render_oam(o, d)).collect();
        out.push_str(&format!(
            "| \\|ψ_{}^k⟩ | {}. |\n",
            parity_subscript(x, d),
            outcomes.join(", ")
        ));
    }
    let generic = if n == 3 { "mn" } else { "x" };
    out.push_str(&format!(
        "\nTable 2. Initial states and the possible detections in spatial-mode DOF (d={d}, n={n}).\n\n"
    ));
    out.push_str("| Initial states | Possible detections in spatial-mode DOF |\n|---|---|\n");
    for (k, dist) in phase {
        let outcomes: Vec<String> = dist.keys().map(|o| render_spatial(o, d)).collect();
        out.push_str(&format!("| \\|ψ_{generic}^{k}⟩ | {}. |\n", outcomes.join(", ")));
    }
    out
}

pub fn tables_json(
    d: u32,
    parity: &BTreeMap<Vec<u32>, LevelDistribution>,
    phase: &BTreeMap<u32, LevelDistribution>,
) -> (Value, Value) {
    let row = |dist: &LevelDistribution, render: &dyn Fn(&[u32]) -> String| {
        (
            dist.keys().map(|o| json!(o)).collect::<Vec<_>>(),
            dist.keys().map(|o| json!(render(o))).collect::<Vec<_>>(),
            dist.values().map(|&p| json_num(p)).collect::<Vec<_>>(),
        )
    };
    let parity_rows: Vec<Value> = parity
        .iter()
        .map(|(x, dist)| {
            let (outcomes, rendered, probs) = row(dist, &|o| render_oam(o, d));
            json!({"x": x, "outcomes": outcomes, "rendered": rendered, "probabilities": probs})
        })
        .collect();
    let phase_rows: Vec<Value> = phase
        .iter()
        .map(|(k, dist)| {
            let (outcomes, rendered, probs) = row(dist, &|o| render_spatial(o, d));
            json!({"k": k, "outcomes": outcomes, "rendered": rendered, "probabilities": probs})
        })
        .collect();
    (Value::Array(parity_rows), Value::Array(phase_rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(2.220446049250313e-16), "2.22044604925e-16");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(json_num(1.0 / 9.0), json!(0.111111111111));
    }

    #[test]
    fn level_rendering() {
        assert_eq!(render_oam(&[0, 0, 1], 3), "aab");
        assert_eq!(render_oam(&[25, 0], 26), "za");
        assert_eq!(render_oam(&[26, 0], 27), "(26,0)");
        assert_eq!(render_spatial(&[0, 1, 2], 3), "012");
        assert_eq!(render_spatial(&[10, 1], 11), "(10,1)");
    }
}
