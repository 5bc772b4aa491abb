use std::io;
use std::path::Path;

use serde_json::Value;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// An in-memory CSV table with a header row.
#[derive(Debug, Clone)]
pub struct Table {
    name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_bytes(&self) -> io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }
}

/// Everything a command produces. Nothing touches the disk until
/// [`Outputs::write`], so a failed run leaves no partial files.
#[derive(Debug, Clone)]
pub struct Outputs {
    pub tables: Vec<Table>,
    pub summary: Value,
}

impl Outputs {
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for table in &self.tables {
            std::fs::write(dir.join(table.name), table.to_bytes()?)?;
        }
        let mut json = serde_json::to_string_pretty(&self.summary)?;
        json.push('\n');
        std::fs::write(dir.join("summary.json"), json)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn table_has_header() {
        let mut t = Table::new("t.csv", &["j", "s_j"]);
        t.push(vec!["1".into(), float(0.5)]);
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(text, "j,s_j\n1,5.0000000000000000e-1\n");
    }
}
