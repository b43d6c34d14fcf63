use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;

use critmoments::kergin::SuiteCheck;

use crate::config::ExperimentKind;
use crate::run::{BezoutRow, FactorizationRow, KerginRow, MomentRow, Summary};
use crate::Manifest;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .with_context(|| format!("parsing {}", path.display()))
}

/// Plain-text summary of the artifacts in `dir`.
pub fn report(dir: &Path) -> Result<String> {
    let manifest: Manifest = read_json(&dir.join("manifest.json"))?;
    let summary: Summary = read_json(&dir.join("summary.json"))?;
    if summary.kind != manifest.config.kind || summary.config_hash != manifest.config_hash {
        bail!("summary.json does not belong to the run in manifest.json");
    }
    let csv = dir.join(&manifest.csv);
    let mut out = String::new();
    writeln!(
        out,
        "{} run, config {}, version {}, seeds {:?}, {:.1}s",
        manifest.config.kind,
        &manifest.config_hash[..12],
        manifest.version,
        manifest.seeds,
        manifest.wall_time_s
    )?;
    writeln!(out)?;
    match manifest.config.kind {
        ExperimentKind::Moments => moments_table(&mut out, &read_csv(&csv)?, &manifest)?,
        ExperimentKind::Factorization => factorization_table(&mut out, &read_csv(&csv)?)?,
        ExperimentKind::Bezout => bezout_table(&mut out, &read_csv(&csv)?)?,
        ExperimentKind::KerginSuite => kergin_table(&mut out, &read_csv(&csv)?)?,
        ExperimentKind::Exponent | ExperimentKind::SigmaProbe | ExperimentKind::Crofton => {
            results_table(&mut out, &summary.results)?
        }
    }
    writeln!(out)?;
    writeln!(
        out,
        "{:<36} {:>12} {:>12}  result",
        "check", "value", "tolerance"
    )?;
    for c in &summary.checks {
        writeln!(
            out,
            "{:<36} {:>12.4e} {:>12.4e}  {}",
            c.name,
            c.value,
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" }
        )?;
    }
    Ok(out)
}

/// `|m_n − m_{⌈n/2⌉}| / |m_n|` for running means `m`.
pub fn drift(running: &[f64]) -> f64 {
    let n = running.len();
    let (last, half) = (running[n - 1], running[n.div_ceil(2) - 1]);
    if last == 0.0 {
        0.0
    } else {
        ((last - half) / last).abs()
    }
}

fn running_means(xs: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut sum = 0.0;
    xs.enumerate()
        .map(|(i, x)| {
            sum += x;
            sum / (i + 1) as f64
        })
        .collect()
}

fn moments_table(out: &mut String, rows: &[MomentRow], manifest: &Manifest) -> Result<()> {
    let p_max = manifest.config.p.unwrap_or(1);
    let mut by_seed: BTreeMap<u64, Vec<&MomentRow>> = BTreeMap::new();
    for r in rows {
        by_seed.entry(r.seed).or_default().push(r);
    }
    writeln!(
        out,
        "{:>6} {:>2} {:>10} {:>10} {:>10} {:>10} {:>8} {:>5}",
        "seed", "p", "m(n/4)", "m(n/2)", "m(3n/4)", "m(n)", "drift", "max"
    )?;
    for (seed, samples) in &by_seed {
        let n = samples.len();
        if n == 0 {
            continue;
        }
        let max = samples.iter().map(|r| r.count).max().unwrap_or(0);
        for p in 1..=p_max {
            let m = running_means(samples.iter().map(|r| (r.count as f64).powi(p as i32)));
            let at = |q: usize| m[(q * n).div_ceil(4).max(1) - 1];
            writeln!(
                out,
                "{:>6} {:>2} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>8.4} {:>5}",
                seed,
                p,
                at(1),
                at(2),
                at(3),
                m[n - 1],
                drift(&m),
                max
            )?;
        }
        let suspect = samples.iter().filter(|r| r.suspect).count();
        writeln!(out, "{:>6} samples {n}, suspect {suspect}", "")?;
    }
    Ok(())
}

fn factorization_table(out: &mut String, rows: &[FactorizationRow]) -> Result<()> {
    let rel = rows
        .iter()
        .map(|r| (r.rho - r.r * r.sigma).abs() / r.rho)
        .fold(0.0, f64::max);
    let in_se = rows
        .iter()
        .map(|r| (r.rho - r.r * r.sigma).abs() / r.stderr)
        .fold(0.0, f64::max);
    writeln!(out, "configurations          {}", rows.len())?;
    writeln!(out, "max |rho - R sigma|/rho  {rel:.4e}")?;
    writeln!(out, "max |rho - R sigma|/se   {in_se:.3}")?;
    Ok(())
}

fn bezout_table(out: &mut String, rows: &[BezoutRow]) -> Result<()> {
    let violations = rows.iter().filter(|r| r.count > r.bound).count();
    let suspect = rows.iter().filter(|r| r.suspect).count();
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for r in rows {
        *histogram.entry(r.count).or_default() += 1;
    }
    writeln!(out, "systems     {}", rows.len())?;
    writeln!(out, "bound       {}", rows.first().map_or(0, |r| r.bound))?;
    writeln!(out, "violations  {violations}")?;
    writeln!(out, "suspect     {suspect}")?;
    writeln!(out, "{:>6} {:>8}", "count", "systems")?;
    for (count, n) in histogram {
        writeln!(out, "{count:>6} {n:>8}")?;
    }
    Ok(())
}

fn kergin_table(out: &mut String, rows: &[KerginRow]) -> Result<()> {
    writeln!(
        out,
        "{:<16} {:>6} {:>12} {:>12}",
        "check", "cases", "max error", "tolerance"
    )?;
    for check in SuiteCheck::ALL {
        let errors: Vec<f64> = rows
            .iter()
            .filter(|r| r.check == check)
            .map(|r| r.error)
            .collect();
        let worst = errors.iter().copied().fold(0.0, f64::max);
        writeln!(
            out,
            "{:<16} {:>6} {:>12.3e} {:>12.1e}",
            check.name(),
            errors.len(),
            worst,
            check.tolerance()
        )?;
    }
    Ok(())
}

/// Flat key/value listing of the JSON results, one line per leaf.
fn results_table(out: &mut String, results: &serde_json::Value) -> Result<()> {
    fn walk(out: &mut String, prefix: &str, v: &serde_json::Value) -> std::fmt::Result {
        match v {
            serde_json::Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(out, &key, v)?;
                }
                Ok(())
            }
            serde_json::Value::Array(items) => {
                for (i, v) in items.iter().enumerate() {
                    walk(out, &format!("{prefix}[{i}]"), v)?;
                }
                Ok(())
            }
            leaf => writeln!(out, "{prefix:<32} {leaf}"),
        }
    }
    walk(out, "", results)?;
    Ok(())
}
