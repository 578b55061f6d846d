//! Serialization of sweep results, trajectories, and lattice snapshots.
//!
//! All writers build the full byte content in memory and write it in one
//! call, and all numbers are formatted with Rust's shortest-roundtrip float
//! display, so identical inputs always produce byte-identical files.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::strategy::{Strategy, StrategyProfile};

use super::{LatticeDims, PhaseRecord, SweepSpec};

fn fmt(value: f64) -> String {
    format!("{value}")
}

/// Header of the phase CSV produced by sweeps.
pub fn phase_csv_header() -> &'static str {
    "r_p,r_l,r_g,beta,sigma,mu,lattice_w,lattice_h,strategy_setting,replicates,label,label_fraction,mean_rounds"
}

/// One CSV data row for a sweep cell.
pub fn phase_csv_row(record: &PhaseRecord) -> String {
    let p = &record.params;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        fmt(p.r_p),
        fmt(p.r_l),
        fmt(p.r_g),
        fmt(p.beta),
        fmt(p.sigma),
        fmt(p.mu),
        record.lattice.width,
        record.lattice.height,
        record.setting.name(),
        record.outcomes.len(),
        record.label,
        fmt(record.label_fraction),
        fmt(record.mean_rounds),
    )
}

pub fn phase_csv_string(records: &[PhaseRecord]) -> String {
    let mut out = String::from(phase_csv_header());
    out.push('\n');
    for record in records {
        out.push_str(&phase_csv_row(record));
        out.push('\n');
    }
    out
}

pub fn export_phase_csv(records: &[PhaseRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, phase_csv_string(records))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Trajectory CSV: a `round` column followed by one count column per
/// strategy type in canonical order. Row 0 is the initial profile.
pub fn trajectory_csv_string(trajectory: &Trajectory) -> String {
    let labels: Vec<&str> = trajectory
        .setting
        .strategies()
        .iter()
        .map(|s| s.label())
        .collect();
    let mut out = format!("round,{}\n", labels.join(","));
    for (round, counts) in trajectory.frequencies.iter().enumerate() {
        out.push_str(&round.to_string());
        for count in counts {
            out.push(',');
            out.push_str(&count.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn export_trajectory_csv(trajectory: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, trajectory_csv_string(trajectory))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Fixed color map of the snapshot pixmaps, one RGB triple per strategy.
pub fn strategy_color(strategy: Strategy) -> [u8; 3] {
    match strategy.label() {
        "C" | "CCC" => [44, 160, 44],
        "D" | "DDD" => [214, 39, 40],
        "CCD" => [31, 119, 180],
        "CDC" => [23, 190, 207],
        "CDD" => [148, 103, 189],
        "DCC" => [255, 127, 14],
        "DCD" => [188, 189, 34],
        "DDC" => [227, 119, 194],
        _ => unreachable!("all strategy labels are mapped"),
    }
}

/// Plain-text snapshot: one line per lattice row, labels separated by one
/// space, nodes in row-major order.
pub fn snapshot_text(profile: &StrategyProfile, dims: LatticeDims) -> String {
    let mut out = String::new();
    for row in 0..dims.height {
        for col in 0..dims.width {
            if col > 0 {
                out.push(' ');
            }
            out.push_str(profile.get(row * dims.width + col).label());
        }
        out.push('\n');
    }
    out
}

/// Binary portable pixmap (P6), one pixel per lattice cell, colored by
/// [`strategy_color`].
pub fn snapshot_pixmap(profile: &StrategyProfile, dims: LatticeDims) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", dims.width, dims.height).into_bytes();
    for node in 0..dims.node_count() {
        out.extend_from_slice(&strategy_color(profile.get(node)));
    }
    out
}

/// Paths of one exported snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotFiles {
    pub text: PathBuf,
    pub pixmap: PathBuf,
}

/// Writes `snapshot_round_<round>.txt` and `.ppm` into `dir`.
pub fn export_snapshot(
    profile: &StrategyProfile,
    dims: LatticeDims,
    round: u64,
    dir: impl AsRef<Path>,
) -> Result<SnapshotFiles> {
    let dir = dir.as_ref();
    let text = dir.join(format!("snapshot_round_{round}.txt"));
    let pixmap = dir.join(format!("snapshot_round_{round}.ppm"));
    std::fs::write(&text, snapshot_text(profile, dims))
        .map_err(|e| Error::io(text.display().to_string(), e))?;
    std::fs::write(&pixmap, snapshot_pixmap(profile, dims))
        .map_err(|e| Error::io(pixmap.display().to_string(), e))?;
    Ok(SnapshotFiles { text, pixmap })
}

/// Creates (truncating) a sweep manifest and writes its header line: the
/// JSON of the sweep spec the manifest belongs to.
pub fn start_manifest(path: impl AsRef<Path>, spec: &SweepSpec) -> Result<File> {
    let path = path.as_ref();
    let mut file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let header = serde_json::to_string(spec)?;
    writeln!(file, "{header}").map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(file)
}

/// Reopens an existing manifest to append further completed cells.
pub fn open_manifest_for_append(path: impl AsRef<Path>) -> Result<File> {
    let path = path.as_ref();
    OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Appends one completed cell record as a JSON line and flushes, so an
/// interrupted sweep can resume from everything written so far.
pub fn append_manifest_record(sink: &mut impl Write, record: &PhaseRecord) -> Result<()> {
    let line = serde_json::to_string(record)?;
    writeln!(sink, "{line}").map_err(|e| Error::io("manifest".to_string(), e))?;
    sink.flush().map_err(|e| Error::io("manifest".to_string(), e))
}

/// Loads a manifest written by [`start_manifest`] /
/// [`append_manifest_record`], keyed by cell index. Fails if the header spec
/// does not match `expected`, which guards against resuming a sweep with a
/// different configuration.
pub fn load_manifest(
    path: impl AsRef<Path>,
    expected: &SweepSpec,
) -> Result<BTreeMap<usize, PhaseRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(path.display().to_string(), e))?
        .ok_or_else(|| Error::Config(format!("manifest {} is empty", path.display())))?;
    let written_for: SweepSpec = serde_json::from_str(&header)?;
    if &written_for != expected {
        return Err(Error::Config(format!(
            "manifest {} was written for a different sweep config",
            path.display()
        )));
    }
    let cell_count = expected.grid.cell_count();
    let mut records = BTreeMap::new();
    for line in lines {
        let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PhaseRecord = serde_json::from_str(&line)?;
        if record.cell_index >= cell_count {
            return Err(Error::Config(format!(
                "manifest records cell {} but the grid has {} cells",
                record.cell_index, cell_count
            )));
        }
        records.insert(record.cell_index, record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TerminalStatus;
    use crate::experiments::{sweep, ParamGrid};
    use crate::strategy::StrategySetting;

    fn sample_trajectory(rounds: usize) -> Trajectory {
        let setting = StrategySetting::Binary;
        let profile = StrategyProfile::uniform(Strategy::D, 4);
        let mut frequencies = vec![vec![2, 2]];
        for _ in 0..rounds {
            frequencies.push(vec![1, 3]);
        }
        Trajectory {
            setting,
            node_count: 4,
            frequencies,
            snapshots: vec![],
            final_profile: profile,
            status: TerminalStatus::RoundCapReached,
        }
    }

    #[test]
    fn trajectory_csv_has_one_row_per_round_plus_header() {
        let csv = trajectory_csv_string(&sample_trajectory(350));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 352);
        assert_eq!(lines[0], "round,C,D");
        assert_eq!(lines[1], "0,2,2");
        assert_eq!(lines[351], "350,1,3");
    }

    #[test]
    fn phase_csv_shape_for_a_two_by_two_grid() {
        let spec = SweepSpec {
            grid: ParamGrid {
                r_p: vec![1.0, 2.0],
                r_l: vec![3.0, 4.0],
                ..ParamGrid::default()
            },
            lattice: LatticeDims {
                width: 3,
                height: 3,
            },
            setting: StrategySetting::Binary,
            replicates: 2,
            stop: crate::dynamics::StopCriteria {
                max_rounds: 50,
                stability_window: 0,
            },
            base_seed: 5,
            init: Default::default(),
            update_scheme: Default::default(),
            target_selection: Default::default(),
            quorum: super::super::DEFAULT_QUORUM,
        };
        let output = sweep(&spec, 1, &BTreeMap::new(), |_, _| Ok(())).unwrap();
        let csv = phase_csv_string(&output.records);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], phase_csv_header());
        assert!(lines[1].starts_with("1,3,5,0.5,1,0,3,3,binary,2,"));
        // Byte-stable on re-render.
        assert_eq!(csv, phase_csv_string(&output.records));
    }

    #[test]
    fn snapshot_text_and_pixmap_shapes() {
        let dims = LatticeDims {
            width: 10,
            height: 10,
        };
        let mut profile = StrategyProfile::uniform(Strategy::C, 100);
        profile.set(3, Strategy::D);
        let text = snapshot_text(&profile, dims);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[0], "C C C D C C C C C C");
        assert!(lines.iter().all(|l| l.split(' ').count() == 10));

        let pixmap = snapshot_pixmap(&profile, dims);
        let header = b"P6\n10 10\n255\n";
        assert_eq!(&pixmap[..header.len()], header);
        assert_eq!(pixmap.len(), header.len() + 300);
        assert_eq!(&pixmap[header.len()..header.len() + 3], &[44, 160, 44]);
        assert_eq!(
            &pixmap[header.len() + 9..header.len() + 12],
            &[214, 39, 40]
        );
    }

    #[test]
    fn snapshot_export_writes_both_files() {
        let dir = tempfile::tempdir().unwrap();
        let dims = LatticeDims {
            width: 3,
            height: 3,
        };
        let profile = StrategyProfile::uniform(Strategy::parse("CCD").unwrap(), 9);
        let files = export_snapshot(&profile, dims, 42, dir.path()).unwrap();
        assert!(files.text.ends_with("snapshot_round_42.txt"));
        assert_eq!(
            std::fs::read_to_string(&files.text).unwrap().lines().count(),
            3
        );
        assert!(std::fs::read(&files.pixmap).unwrap().starts_with(b"P6\n3 3\n255\n"));
    }

    #[test]
    fn manifest_round_trip_and_spec_guard() {
        let spec = SweepSpec {
            grid: ParamGrid::default(),
            lattice: LatticeDims {
                width: 3,
                height: 3,
            },
            setting: StrategySetting::Binary,
            replicates: 1,
            stop: crate::dynamics::StopCriteria {
                max_rounds: 10,
                stability_window: 0,
            },
            base_seed: 9,
            init: Default::default(),
            update_scheme: Default::default(),
            target_selection: Default::default(),
            quorum: super::super::DEFAULT_QUORUM,
        };
        let output = sweep(&spec, 1, &BTreeMap::new(), |_, _| Ok(())).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        let mut file = start_manifest(&path, &spec).unwrap();
        for record in &output.records {
            append_manifest_record(&mut file, record).unwrap();
        }
        drop(file);

        let loaded = load_manifest(&path, &spec).unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded[&0], output.records[0]);

        let mut other = spec.clone();
        other.base_seed = 10;
        assert!(matches!(
            load_manifest(&path, &other),
            Err(Error::Config(_))
        ));
    }
}
