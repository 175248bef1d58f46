//! Aggregate run summaries: serialization, parsing, and backend comparison.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Per-scan statistics over the successful trials of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanAggregate {
    pub scan: u32,
    pub true_cardinality: usize,
    pub mean_cardinality: f64,
    pub std_cardinality: f64,
    pub mean_ospa: f64,
    pub mean_step_seconds: f64,
}

/// Aggregate summary of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub scenario_hash: u64,
    pub backend: String,
    pub trials: usize,
    pub failed_trials: Vec<usize>,
    pub mean_step_seconds: f64,
    pub scans: Vec<ScanAggregate>,
}

/// Format a value with 9 significant digits in plain decimal notation.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (8 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

impl Summary {
    /// Render as a structured text document (key/value header, then one
    /// whitespace-separated row per scan).
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "scenario_hash = {:016x}", self.scenario_hash).unwrap();
        writeln!(out, "backend = {}", self.backend).unwrap();
        writeln!(out, "trials = {}", self.trials).unwrap();
        let failed: Vec<String> =
            self.failed_trials.iter().map(usize::to_string).collect();
        writeln!(out, "failed_trials = [{}]", failed.join(", ")).unwrap();
        writeln!(out, "mean_step_seconds = {}", fmt_sig(self.mean_step_seconds)).unwrap();
        writeln!(
            out,
            "# scan true_cardinality mean_cardinality std_cardinality mean_ospa mean_step_seconds"
        )
        .unwrap();
        for s in &self.scans {
            writeln!(
                out,
                "{} {} {} {} {} {}",
                s.scan,
                s.true_cardinality,
                fmt_sig(s.mean_cardinality),
                fmt_sig(s.std_cardinality),
                fmt_sig(s.mean_ospa),
                fmt_sig(s.mean_step_seconds),
            )
            .unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut scenario_hash = None;
        let mut backend = None;
        let mut trials = None;
        let mut failed_trials = Vec::new();
        let mut mean_step_seconds = None;
        let mut scans = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| format!("summary line {}: {msg}", i + 1);
            if let Some((key, value)) = line.split_once('=') {
                let (key, value) = (key.trim(), value.trim());
                match key {
                    "scenario_hash" => {
                        scenario_hash = Some(
                            u64::from_str_radix(value, 16)
                                .map_err(|_| err("bad scenario hash"))?,
                        )
                    }
                    "backend" => backend = Some(value.to_owned()),
                    "trials" => {
                        trials = Some(value.parse().map_err(|_| err("bad trial count"))?)
                    }
                    "failed_trials" => {
                        let inner = value.trim_matches(['[', ']']);
                        for part in inner.split(',').filter(|p| !p.trim().is_empty()) {
                            failed_trials.push(
                                part.trim().parse().map_err(|_| err("bad failed trial"))?,
                            );
                        }
                    }
                    "mean_step_seconds" => {
                        mean_step_seconds =
                            Some(value.parse().map_err(|_| err("bad mean step time"))?)
                    }
                    _ => return Err(err(&format!("unknown key '{key}'"))),
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 6 {
                return Err(err("expected 6 columns"));
            }
            let num =
                |s: &str| -> Result<f64, String> { s.parse().map_err(|_| err("bad number")) };
            scans.push(ScanAggregate {
                scan: fields[0].parse().map_err(|_| err("bad scan index"))?,
                true_cardinality: fields[1].parse().map_err(|_| err("bad cardinality"))?,
                mean_cardinality: num(fields[2])?,
                std_cardinality: num(fields[3])?,
                mean_ospa: num(fields[4])?,
                mean_step_seconds: num(fields[5])?,
            });
        }
        Ok(Summary {
            scenario_hash: scenario_hash.ok_or("summary missing scenario_hash")?,
            backend: backend.ok_or("summary missing backend")?,
            trials: trials.ok_or("summary missing trials")?,
            failed_trials,
            mean_step_seconds: mean_step_seconds.ok_or("summary missing mean_step_seconds")?,
            scans,
        })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read summary {}: {e}", path.display()))?;
        Self::parse(&text)
    }
}

/// Comparison of two runs over the same scenario.
#[derive(Debug, Clone)]
pub struct Comparison {
    /// `(scan, OSPA A, OSPA B, B - A)` per scan.
    pub ospa_deltas: Vec<(u32, f64, f64, f64)>,
    /// Mean step time of A divided by mean step time of B.
    pub runtime_ratio: f64,
}

/// Compare two summaries; errors unless the scenario hashes match.
pub fn compare_backends(a: &Summary, b: &Summary) -> Result<Comparison, String> {
    if a.scenario_hash != b.scenario_hash {
        return Err(format!(
            "scenario mismatch: {:016x} vs {:016x}",
            a.scenario_hash, b.scenario_hash
        ));
    }
    if a.scans.len() != b.scans.len() {
        return Err("summaries cover different scan counts".into());
    }
    let ospa_deltas = a
        .scans
        .iter()
        .zip(&b.scans)
        .map(|(x, y)| (x.scan, x.mean_ospa, y.mean_ospa, y.mean_ospa - x.mean_ospa))
        .collect();
    let runtime_ratio = if b.mean_step_seconds > 0.0 {
        a.mean_step_seconds / b.mean_step_seconds
    } else {
        f64::NAN
    };
    Ok(Comparison {
        ospa_deltas,
        runtime_ratio,
    })
}

/// Round to two significant digits for report output.
pub fn two_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample() -> Summary {
        Summary {
            scenario_hash: 0xdeadbeef,
            backend: "ranked".into(),
            trials: 3,
            failed_trials: vec![1],
            mean_step_seconds: 0.125,
            scans: vec![
                ScanAggregate {
                    scan: 0,
                    true_cardinality: 2,
                    mean_cardinality: 1.5,
                    std_cardinality: 0.5,
                    mean_ospa: 33.25,
                    mean_step_seconds: 0.1,
                },
                ScanAggregate {
                    scan: 1,
                    true_cardinality: 3,
                    mean_cardinality: 3.0,
                    std_cardinality: 0.0,
                    mean_ospa: 12.0,
                    mean_step_seconds: 0.15,
                },
            ],
        }
    }

    #[test]
    fn render_parse_round_trip() {
        let s = sample();
        let parsed = Summary::parse(&s.render()).unwrap();
        assert_eq!(parsed, s);
    }

    #[test]
    fn compare_identical_runs() {
        let s = sample();
        let c = compare_backends(&s, &s).unwrap();
        assert_relative_eq!(c.runtime_ratio, 1.0);
        for (_, _, _, delta) in &c.ospa_deltas {
            assert_relative_eq!(*delta, 0.0);
        }
    }

    #[test]
    fn compare_synthetic_values() {
        let a = sample();
        let mut b = sample();
        b.scans[0].mean_ospa = 35.25;
        b.mean_step_seconds = 0.0625;
        let c = compare_backends(&a, &b).unwrap();
        assert_relative_eq!(c.ospa_deltas[0].3, 2.0, epsilon = 1e-12);
        assert_relative_eq!(c.runtime_ratio, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn compare_rejects_mismatched_scenarios() {
        let a = sample();
        let mut b = sample();
        b.scenario_hash ^= 1;
        assert!(compare_backends(&a, &b).is_err());
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(123.456789123), "123.456789");
        assert_eq!(fmt_sig(0.000123456789123), "0.000123456789");
        assert_eq!(fmt_sig(-5.0), "-5.00000000");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1234567891.0), "1234567891");
    }

    #[test]
    fn two_sig_rounding() {
        assert_relative_eq!(two_sig(3.37421), 3.4);
        assert_relative_eq!(two_sig(0.01234), 0.012);
        assert_relative_eq!(two_sig(150.0), 150.0);
    }
}
