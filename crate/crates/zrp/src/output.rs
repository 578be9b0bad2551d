//! CSV and JSON writers. Every file is written to a temporary sibling first
//! and renamed into place, so readers never see partial output.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use zrp_core::fluid::{entropy, entropy_production, tilted_density, ProbabilityVector};
use zrp_core::metrics::MixingCurve;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// In-memory CSV table with a fixed header; floats use shortest round-trip
/// formatting.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<I, S>(header: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn into_bytes(self) -> Result<Vec<u8>> {
        Ok(self.writer.into_inner().map_err(|e| e.into_error())?)
    }

    pub fn write(self, path: &Path) -> Result<()> {
        write_atomic(path, &self.into_bytes()?)
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

/// One row of the trajectory table.
pub struct TrajectoryRow {
    pub replica: usize,
    pub t: f64,
    pub heights: Vec<u64>,
    pub nonempty_fraction: f64,
    pub max_height: u64,
}

pub fn trajectory_table(tracked: usize, rows: &[TrajectoryRow]) -> Result<Table> {
    let mut header = vec!["replica_id".to_string(), "t".to_string()];
    header.extend((1..=tracked).map(|i| format!("height_{i}")));
    header.push("nonempty_fraction".into());
    header.push("max_height".into());
    let mut table = Table::new(header)?;
    for r in rows {
        let mut fields = vec![r.replica.to_string(), num(r.t)];
        fields.extend(r.heights.iter().map(u64::to_string));
        fields.push(num(r.nonempty_fraction));
        fields.push(r.max_height.to_string());
        table.row(fields)?;
    }
    Ok(table)
}

pub fn fluid_table(times: &[f64], states: &[ProbabilityVector]) -> Result<Table> {
    let k_max = states.first().map_or(0, ProbabilityVector::k_max);
    let mut header = vec!["t".to_string()];
    header.extend((0..=k_max).map(|k| format!("q{k}")));
    header.extend(["mass", "mean", "entropy", "V"].map(String::from));
    let mut table = Table::new(header)?;
    for (t, q) in times.iter().zip(states) {
        let mut fields = vec![num(*t)];
        fields.extend(q.weights().iter().map(|w| num(*w)));
        fields.push(num(q.total_mass()));
        fields.push(num(tilted_density(q)));
        fields.push(num(entropy(q)));
        fields.push(entropy_production(q).map_or("inf".to_string(), num));
        table.row(fields)?;
    }
    Ok(table)
}

pub fn solid_table(times: &[f64], f: &[f64], v: &[Vec<f64>]) -> Result<Table> {
    let tracked = v.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string(), "f".to_string()];
    header.extend((1..=tracked).map(|i| format!("v_{i}")));
    let mut table = Table::new(header)?;
    for ((t, f), v) in times.iter().zip(f).zip(v) {
        let mut fields = vec![num(*t), num(*f)];
        fields.extend(v.iter().map(|x| num(*x)));
        table.row(fields)?;
    }
    Ok(table)
}

/// Mixing curve with times already in units of `n`.
pub fn mixing_table(curve: &MixingCurve) -> Result<Table> {
    let mut table = Table::new(["t_over_n", "tv_lower", "stderr"])?;
    for ((t, v), e) in curve.times().iter().zip(curve.tv()).zip(curve.stderr()) {
        table.row([num(*t), num(*v), num(*e)])?;
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct MixingSummary {
    pub n: usize,
    pub rho: f64,
    pub epsilon: f64,
    pub statistic: String,
    pub crossing_t_over_n: Option<f64>,
    pub predicted_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SolidSummary {
    pub rho: f64,
    pub u: Vec<f64>,
    pub t: Vec<f64>,
    pub mixing_constant: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headers_are_exact() {
        let t = trajectory_table(2, &[]).unwrap().into_bytes().unwrap();
        assert_eq!(
            t,
            b"replica_id,t,height_1,height_2,nonempty_fraction,max_height\n"
        );
        let s = solid_table(&[0.5], &[0.25], &[vec![0.25]])
            .unwrap()
            .into_bytes()
            .unwrap();
        assert_eq!(s, b"t,f,v_1\n0.5,0.25,0.25\n");
        let q = ProbabilityVector::point_mass(1, 2).unwrap();
        let f = fluid_table(&[0.0], &[q]).unwrap().into_bytes().unwrap();
        assert!(f.starts_with(b"t,q0,q1,q2,mass,mean,entropy,V\n0,0,1,0,1,1,"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
