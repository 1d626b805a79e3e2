use serde::Serialize;
use sha2::{Digest, Sha256};

use povm_spt::experiments::{Fig3Point, Fig4Point, Table1Record};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// sha256 of the resolved config's JSON form.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_string(config).expect("configs serialize");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Ten significant digits, trailing zeros dropped.
pub fn fmt_num(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.9e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if a == 0.0 || (1e-6..1e15).contains(&a) {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}

pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
}

pub trait CsvRow {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

fn opt(v: Option<usize>) -> String {
    v.map(|n| n.to_string()).unwrap_or_default()
}

impl CsvRow for Table1Record {
    const HEADER: &'static [&'static str] =
        &["row", "state", "observable", "method", "n_effects", "kappa_sq", "provenance"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.row.to_string(),
            self.state.clone(),
            self.observable.clone(),
            self.method.clone(),
            opt(self.n_effects),
            fmt_num(self.kappa_sq),
            self.provenance.clone(),
        ]
    }
}

impl CsvRow for Fig3Point {
    const HEADER: &'static [&'static str] = &["n_observables", "n_effects", "kappa_sq", "kappa_sq_a", "kappa_sq_b"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.n_observables.to_string(),
            self.n_effects.to_string(),
            fmt_num(self.kappa_sq),
            fmt_num(self.kappa_sq_a),
            fmt_num(self.kappa_sq_b),
        ]
    }
}

impl CsvRow for Fig4Point {
    const HEADER: &'static [&'static str] = &["n_qubits", "series", "n_effects", "log2_kappa_sq", "log2_per_qubit"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.n_qubits.to_string(),
            self.series.clone(),
            opt(self.n_effects),
            fmt_num(self.log2_kappa_sq),
            fmt_num(self.log2_per_qubit),
        ]
    }
}

pub fn to_csv<R: CsvRow>(rows: &[R], prov: &Provenance) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = R::HEADER.to_vec();
    header.extend(["seed", "config_hash", "version"]);
    w.write_record(&header)?;
    for r in rows {
        let mut f = r.fields();
        f.extend([prov.seed.to_string(), prov.config_hash.clone(), VERSION.to_string()]);
        w.write_record(&f)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    experiment: &'a str,
    seed: u64,
    config_hash: &'a str,
    version: &'a str,
    config: &'a C,
    result: &'a R,
}

pub fn to_json<C: Serialize, R: Serialize>(experiment: &str, config: &C, result: &R, prov: &Provenance) -> String {
    let env = Envelope {
        experiment,
        seed: prov.seed,
        config_hash: &prov.config_hash,
        version: VERSION,
        config,
        result,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("results serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(64.0), "64");
        assert_eq!(fmt_num(9.000600000123456), "9.0006");
        assert_eq!(fmt_num(3.169925001442312), "3.169925001");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(2f64.powi(384)), "3.94020062e115");
        assert_eq!(fmt_num(-1.5e-9), "-1.5e-9");
    }

    #[test]
    fn hash_is_stable_hex() {
        let h = config_hash(&vec![1, 2, 3]);
        assert_eq!(h.len(), 64);
        assert_eq!(h, config_hash(&vec![1, 2, 3]));
        assert_ne!(h, config_hash(&vec![1, 2, 4]));
    }
}
