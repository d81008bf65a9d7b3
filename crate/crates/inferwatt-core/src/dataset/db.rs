//! Hardware power specs and regional grid carbon intensities.
//!
//! Both databases ship with built-in entries so the estimator works out of
//! the box, and both can be replaced wholesale from a JSON file. Lookups
//! are case-insensitive on the key; insertion order is preserved so that
//! listings are stable.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Power and memory envelope of one accelerator model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareSpec {
    pub name: String,
    pub tdp_watts: f64,
    pub memory_gb: f64,
}

/// Registry of known accelerators, keyed by name (case-insensitive).
#[derive(Debug, Clone)]
pub struct HardwareDb {
    entries: Vec<HardwareSpec>,
}

impl HardwareDb {
    /// Database pre-populated with common datacenter accelerators.
    pub fn builtin() -> Self {
        let entries = vec![
            spec("NVIDIA A100-80GB", 400.0, 80.0),
            spec("NVIDIA A100-40GB", 250.0, 40.0),
            spec("NVIDIA H100-SXM", 700.0, 80.0),
            spec("NVIDIA H100-PCIe", 350.0, 80.0),
            spec("NVIDIA V100-SXM2-32GB", 300.0, 32.0),
            spec("NVIDIA T4", 70.0, 16.0),
            spec("NVIDIA L4", 72.0, 24.0),
        ];
        HardwareDb { entries }
    }

    pub fn empty() -> Self {
        HardwareDb {
            entries: Vec::new(),
        }
    }

    pub fn get(&self, name: &str) -> Result<&HardwareSpec> {
        let wanted = name.trim();
        self.entries
            .iter()
            .find(|e| e.name.eq_ignore_ascii_case(wanted))
            .ok_or_else(|| Error::UnknownHardware {
                name: wanted.to_string(),
                available: self.entries.iter().map(|e| e.name.clone()).collect(),
            })
    }

    pub fn add(&mut self, entry: HardwareSpec) -> Result<()> {
        validate_spec(&entry)?;
        if self
            .entries
            .iter()
            .any(|e| e.name.eq_ignore_ascii_case(&entry.name))
        {
            return Err(Error::DuplicateHardware { name: entry.name });
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[HardwareSpec] {
        &self.entries
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw: Vec<HardwareSpec> = read_json(path)?;
        let mut db = HardwareDb::empty();
        for entry in raw {
            db.add(entry).map_err(|e| Error::ModelFile {
                path: Some(path.to_path_buf()),
                message: e.to_string(),
            })?;
        }
        Ok(db)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, &self.entries)
    }
}

fn spec(name: &str, tdp_watts: f64, memory_gb: f64) -> HardwareSpec {
    HardwareSpec {
        name: name.to_string(),
        tdp_watts,
        memory_gb,
    }
}

fn validate_spec(entry: &HardwareSpec) -> Result<()> {
    if entry.name.trim().is_empty() {
        return Err(Error::InvalidParameter {
            name: "name",
            message: "hardware name must not be empty".to_string(),
        });
    }
    if !(entry.tdp_watts.is_finite() && entry.tdp_watts > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tdp_watts",
            message: format!("`{}` must be a positive number", entry.tdp_watts),
        });
    }
    if !(entry.memory_gb.is_finite() && entry.memory_gb > 0.0) {
        return Err(Error::InvalidParameter {
            name: "memory_gb",
            message: format!("`{}` must be a positive number", entry.memory_gb),
        });
    }
    Ok(())
}

/// Average grid carbon intensity for one region, in grams CO2-equivalent
/// per kilowatt-hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionEntry {
    pub region_code: String,
    pub rci_g_per_kwh: f64,
}

/// Region-code → carbon-intensity lookup. The `default` region is the
/// world-average figure used when a request names no region.
#[derive(Debug, Clone)]
pub struct RciDb {
    entries: Vec<RegionEntry>,
}

/// Region code resolved when an estimate names neither a region nor an
/// explicit carbon intensity.
pub const DEFAULT_REGION: &str = "default";

impl RciDb {
    /// Database with the world-average default plus a few illustrative
    /// regional grids.
    pub fn builtin() -> Self {
        let entries = vec![
            region(DEFAULT_REGION, 475.0),
            region("us-east", 394.0),
            region("us-west", 253.0),
            region("eu-north", 45.0),
            region("eu-central", 338.0),
            region("ap-southeast", 486.0),
        ];
        RciDb { entries }
    }

    pub fn empty() -> Self {
        RciDb {
            entries: Vec::new(),
        }
    }

    pub fn get(&self, code: &str) -> Result<&RegionEntry> {
        let wanted = code.trim();
        self.entries
            .iter()
            .find(|e| e.region_code.eq_ignore_ascii_case(wanted))
            .ok_or_else(|| Error::UnknownRegion {
                code: wanted.to_string(),
                available: self.entries.iter().map(|e| e.region_code.clone()).collect(),
            })
    }

    pub fn add(&mut self, entry: RegionEntry) -> Result<()> {
        if entry.region_code.trim().is_empty() {
            return Err(Error::InvalidParameter {
                name: "region_code",
                message: "region code must not be empty".to_string(),
            });
        }
        // Zero is legal: a hypothetical fully-renewable grid.
        if !(entry.rci_g_per_kwh.is_finite() && entry.rci_g_per_kwh >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "rci_g_per_kwh",
                message: format!("`{}` must be a non-negative number", entry.rci_g_per_kwh),
            });
        }
        if self
            .entries
            .iter()
            .any(|e| e.region_code.eq_ignore_ascii_case(&entry.region_code))
        {
            return Err(Error::InvalidParameter {
                name: "region_code",
                message: format!("duplicate region `{}`", entry.region_code),
            });
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[RegionEntry] {
        &self.entries
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw: Vec<RegionEntry> = read_json(path)?;
        let mut db = RciDb::empty();
        for entry in raw {
            db.add(entry).map_err(|e| Error::ModelFile {
                path: Some(path.to_path_buf()),
                message: e.to_string(),
            })?;
        }
        Ok(db)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, &self.entries)
    }
}

fn region(code: &str, rci_g_per_kwh: f64) -> RegionEntry {
    RegionEntry {
        region_code: code.to_string(),
        rci_g_per_kwh,
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::ModelFile {
        path: Some(path.to_path_buf()),
        message: e.to_string(),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, value).map_err(|e| Error::ModelFile {
        path: Some(path.to_path_buf()),
        message: e.to_string(),
    })?;
    use std::io::Write;
    writeln!(writer).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_has_a100_80gb() {
        let db = HardwareDb::builtin();
        let a100 = db.get("NVIDIA A100-80GB").unwrap();
        assert_eq!(a100.tdp_watts, 400.0);
        assert_eq!(a100.memory_gb, 80.0);
    }

    #[test]
    fn lookup_is_case_insensitive() {
        let db = HardwareDb::builtin();
        assert!(db.get("nvidia a100-80gb").is_ok());
        assert!(db.get("  NVIDIA T4 ").is_ok());
    }

    #[test]
    fn unknown_hardware_lists_available() {
        let db = HardwareDb::builtin();
        let err = db.get("TPU v5").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("TPU v5"));
        assert!(msg.contains("NVIDIA A100-80GB"));
    }

    #[test]
    fn duplicate_add_rejected() {
        let mut db = HardwareDb::builtin();
        let err = db
            .add(HardwareSpec {
                name: "nvidia t4".to_string(),
                tdp_watts: 75.0,
                memory_gb: 16.0,
            })
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateHardware { .. }));
    }

    #[test]
    fn nonpositive_tdp_rejected() {
        let mut db = HardwareDb::empty();
        let err = db
            .add(HardwareSpec {
                name: "Imaginary-0".to_string(),
                tdp_watts: 0.0,
                memory_gb: 8.0,
            })
            .unwrap_err();
        assert!(err.to_string().contains("tdp_watts"));
    }

    #[test]
    fn hardware_save_load_round_trip() {
        let db = HardwareDb::builtin();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hw.json");
        db.save(&path).unwrap();
        let loaded = HardwareDb::load(&path).unwrap();
        assert_eq!(loaded.entries(), db.entries());
    }

    #[test]
    fn builtin_rci_default_region() {
        let db = RciDb::builtin();
        assert_eq!(db.get(DEFAULT_REGION).unwrap().rci_g_per_kwh, 475.0);
    }

    #[test]
    fn unknown_region_lists_available() {
        let db = RciDb::builtin();
        let err = db.get("atlantis").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("atlantis"));
        assert!(msg.contains("default"));
    }

    #[test]
    fn zero_intensity_region_is_legal() {
        let mut db = RciDb::empty();
        db.add(RegionEntry {
            region_code: "hydro-only".to_string(),
            rci_g_per_kwh: 0.0,
        })
        .unwrap();
        assert_eq!(db.get("hydro-only").unwrap().rci_g_per_kwh, 0.0);
    }

    #[test]
    fn negative_intensity_rejected() {
        let mut db = RciDb::empty();
        let err = db
            .add(RegionEntry {
                region_code: "bad".to_string(),
                rci_g_per_kwh: -1.0,
            })
            .unwrap_err();
        assert!(err.to_string().contains("rci_g_per_kwh"));
    }

    #[test]
    fn rci_save_load_round_trip() {
        let db = RciDb::builtin();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rci.json");
        db.save(&path).unwrap();
        let loaded = RciDb::load(&path).unwrap();
        assert_eq!(loaded.entries(), db.entries());
    }

    #[test]
    fn malformed_json_names_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hw.json");
        std::fs::write(&path, "{not json").unwrap();
        let err = HardwareDb::load(&path).unwrap_err();
        assert!(matches!(err, Error::ModelFile { .. }));
    }
}
