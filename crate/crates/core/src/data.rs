//! Cohort, trajectory, and feature-table types plus the file formats that
//! carry them.
//!
//! Trajectory files are delimiter-separated numeric text, one frame per
//! row. Missing cells are empty or the literal `NaN`; an optional single
//! header row is auto-detected by a non-numeric first row. Manifests are
//! CSV with the exact header `participant_id,path,label`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

fn values_bitwise_equal(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x.is_nan() && y.is_nan()) || x.to_bits() == y.to_bits())
}

/// One participant's frame-level multivariate series, stored row-major
/// (frames x channels). Missing frames are explicit NaN entries; infinities
/// are rejected at construction.
#[derive(Debug, Clone)]
pub struct TrajectoryMatrix {
    participant_id: String,
    values: Vec<f64>,
    frame_count: usize,
    channel_count: usize,
}

impl TrajectoryMatrix {
    pub fn new(
        participant_id: impl Into<String>,
        values: Vec<f64>,
        frame_count: usize,
        channel_count: usize,
    ) -> Result<Self> {
        let participant_id = participant_id.into();
        if frame_count < 2 {
            return Err(Error::Data(format!(
                "trajectory {participant_id}: fewer than 2 frames"
            )));
        }
        if channel_count < 1 {
            return Err(Error::Data(format!(
                "trajectory {participant_id}: needs at least 1 channel"
            )));
        }
        if values.len() != frame_count * channel_count {
            return Err(Error::Data(format!(
                "trajectory {participant_id}: {} values do not fill {frame_count} x {channel_count}",
                values.len()
            )));
        }
        if values.iter().any(|v| v.is_infinite()) {
            return Err(Error::Data(format!(
                "trajectory {participant_id}: contains infinite values"
            )));
        }
        Ok(Self {
            participant_id,
            values,
            frame_count,
            channel_count,
        })
    }

    pub fn participant_id(&self) -> &str {
        &self.participant_id
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    pub fn get(&self, frame: usize, channel: usize) -> f64 {
        self.values[frame * self.channel_count + channel]
    }

    /// Full column for `channel`, NaN entries included.
    pub fn channel(&self, channel: usize) -> Vec<f64> {
        (0..self.frame_count).map(|t| self.get(t, channel)).collect()
    }

    /// Finite subsequence of `channel` with temporal order preserved.
    pub fn finite_channel(&self, channel: usize) -> Vec<f64> {
        (0..self.frame_count)
            .map(|t| self.get(t, channel))
            .filter(|v| v.is_finite())
            .collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Equality is bitwise on finite values with NaN positions matched, so it
/// expresses the round-trip guarantee of the trajectory file format.
impl PartialEq for TrajectoryMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.participant_id == other.participant_id
            && self.frame_count == other.frame_count
            && self.channel_count == other.channel_count
            && values_bitwise_equal(&self.values, &other.values)
    }
}

/// Binary depression label for one participant (1 = depressed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRecord {
    pub participant_id: String,
    pub label: u8,
}

impl LabelRecord {
    pub fn new(participant_id: impl Into<String>, label: u8) -> Result<Self> {
        if label > 1 {
            return Err(Error::Data(format!("label must be 0 or 1, got {label}")));
        }
        Ok(Self {
            participant_id: participant_id.into(),
            label,
        })
    }
}

/// Ordered cohort of labeled trajectories sharing one channel count.
#[derive(Debug, Clone)]
pub struct Cohort {
    members: Vec<(TrajectoryMatrix, LabelRecord)>,
    channel_count: usize,
}

impl Cohort {
    pub fn new(members: Vec<(TrajectoryMatrix, LabelRecord)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Data("cohort has no members".into()));
        }
        let channel_count = members[0].0.channel_count();
        let mut seen = std::collections::HashSet::new();
        let mut class_seen = [false, false];
        for (traj, rec) in &members {
            if traj.participant_id() != rec.participant_id {
                return Err(Error::Data(format!(
                    "trajectory id {} does not match label id {}",
                    traj.participant_id(),
                    rec.participant_id
                )));
            }
            if !seen.insert(rec.participant_id.clone()) {
                return Err(Error::Data(format!(
                    "duplicate participant_id {}",
                    rec.participant_id
                )));
            }
            if traj.channel_count() != channel_count {
                return Err(Error::Data(format!(
                    "participant {} has {} channels, expected {channel_count}",
                    rec.participant_id,
                    traj.channel_count()
                )));
            }
            class_seen[rec.label as usize] = true;
        }
        if !(class_seen[0] && class_seen[1]) {
            return Err(Error::Data(
                "cohort must contain at least one member of each class".into(),
            ));
        }
        Ok(Self {
            members,
            channel_count,
        })
    }

    pub fn members(&self) -> &[(TrajectoryMatrix, LabelRecord)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    pub fn labels(&self) -> Vec<u8> {
        self.members.iter().map(|(_, r)| r.label).collect()
    }

    pub fn participant_ids(&self) -> Vec<String> {
        self.members
            .iter()
            .map(|(_, r)| r.participant_id.clone())
            .collect()
    }
}

/// Participants x features matrix with labels and a validity mask for
/// undefined cells.
#[derive(Debug, Clone)]
pub struct CohortFeatureTable {
    pub participant_ids: Vec<String>,
    pub labels: Vec<u8>,
    pub feature_names: Vec<String>,
    features: Vec<f64>,
    valid: Vec<bool>,
}

impl CohortFeatureTable {
    /// All-invalid table of the given shape; extractors fill cells in.
    pub fn empty(
        participant_ids: Vec<String>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
    ) -> Self {
        assert_eq!(participant_ids.len(), labels.len());
        let cells = participant_ids.len() * feature_names.len();
        Self {
            participant_ids,
            labels,
            feature_names,
            features: vec![f64::NAN; cells],
            valid: vec![false; cells],
        }
    }

    pub fn n_participants(&self) -> usize {
        self.participant_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn set(&mut self, row: usize, col: usize, value: Option<f64>) {
        let idx = row * self.n_features() + col;
        match value {
            Some(v) => {
                self.features[idx] = v;
                self.valid[idx] = true;
            }
            None => {
                self.features[idx] = f64::NAN;
                self.valid[idx] = false;
            }
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let idx = row * self.n_features() + col;
        self.valid[idx].then(|| self.features[idx])
    }

    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.valid[row * self.n_features() + col]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.features[row * self.n_features() + col]
    }

    /// Column values and validity for the given rows.
    pub fn column_for_rows(&self, col: usize, rows: &[usize]) -> (Vec<f64>, Vec<bool>) {
        let vals = rows.iter().map(|&r| self.value(r, col)).collect();
        let mask = rows.iter().map(|&r| self.is_valid(r, col)).collect();
        (vals, mask)
    }

    /// Concatenate feature blocks side by side; all tables must share
    /// participant order and labels.
    pub fn hconcat(tables: &[CohortFeatureTable]) -> Result<CohortFeatureTable> {
        let first = tables
            .first()
            .ok_or_else(|| Error::Data("no feature tables to concatenate".into()))?;
        let mut names = Vec::new();
        for t in tables {
            if t.participant_ids != first.participant_ids || t.labels != first.labels {
                return Err(Error::Data(
                    "feature tables disagree on participants or labels".into(),
                ));
            }
            names.extend(t.feature_names.iter().cloned());
        }
        let mut out = CohortFeatureTable::empty(
            first.participant_ids.clone(),
            first.labels.clone(),
            names,
        );
        for row in 0..first.n_participants() {
            let mut col_out = 0;
            for t in tables {
                for col in 0..t.n_features() {
                    out.set(row, col_out, t.get(row, col));
                    col_out += 1;
                }
            }
        }
        Ok(out)
    }
}

impl PartialEq for CohortFeatureTable {
    fn eq(&self, other: &Self) -> bool {
        self.participant_ids == other.participant_ids
            && self.labels == other.labels
            && self.feature_names == other.feature_names
            && self.valid == other.valid
            && values_bitwise_equal(&self.features, &other.features)
    }
}

/// Result of loading one trajectory file.
#[derive(Debug)]
pub struct LoadedTrajectory {
    pub matrix: TrajectoryMatrix,
    /// Number of cells that were blank or unparseable and became NaN.
    pub warnings: usize,
}

fn split_row(line: &str) -> Vec<String> {
    if line.contains(',') {
        line.split(',').map(|c| c.trim().to_string()).collect()
    } else if line.contains('\t') {
        line.split('\t').map(|c| c.trim().to_string()).collect()
    } else {
        line.split_whitespace().map(|c| c.to_string()).collect()
    }
}

/// Parse one cell: finite number, NaN encoding (empty or literal NaN), or
/// garbage. Returns `(value, counts_as_warning)`.
fn parse_cell(cell: &str) -> (f64, bool) {
    if cell.is_empty() {
        return (f64::NAN, true);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => (v, false),
        Ok(v) if v.is_nan() => (f64::NAN, false),
        _ => (f64::NAN, true), // infinities and unparseable text
    }
}

fn row_is_header(cells: &[String]) -> bool {
    // A header cell is non-empty text that does not parse as a number;
    // empty and `NaN`/`inf` cells count as data.
    cells
        .iter()
        .any(|c| !c.is_empty() && c.parse::<f64>().is_err())
}

/// Load a trajectory file, validating shape and the channel count when
/// `expected_channels` is given.
pub fn load_trajectory(path: &Path, expected_channels: Option<usize>) -> Result<LoadedTrajectory> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "unknown".into());

    let mut rows: Vec<Vec<String>> = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
        .map(split_row)
        .collect();
    if rows.is_empty() {
        return Err(Error::Data(format!("{}: empty trajectory file", path.display())));
    }
    if row_is_header(&rows[0]) {
        rows.remove(0);
    }
    if rows.len() < 2 {
        return Err(Error::Data(format!(
            "{}: fewer than 2 frames",
            path.display()
        )));
    }
    let width = rows[0].len();
    if width == 0 {
        return Err(Error::Data(format!("{}: empty first row", path.display())));
    }
    if let Some(expected) = expected_channels {
        if width != expected {
            return Err(Error::Data(format!(
                "{}: expected {expected} channels, found {width}",
                path.display()
            )));
        }
    }

    let mut values = Vec::with_capacity(rows.len() * width);
    let mut warnings = 0usize;
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Data(format!(
                "{}: row {} has {} cells, expected {width}",
                path.display(),
                i + 1,
                row.len()
            )));
        }
        for cell in row {
            let (v, warn) = parse_cell(cell);
            values.push(v);
            warnings += warn as usize;
        }
    }
    let frame_count = rows.len();
    let matrix = TrajectoryMatrix::new(id, values, frame_count, width)?;
    Ok(LoadedTrajectory { matrix, warnings })
}

/// Write a trajectory as comma-separated text, `NaN` for missing cells.
/// Finite values use the shortest round-trip decimal form, so a reload
/// reproduces them bit for bit.
pub fn write_trajectory(traj: &TrajectoryMatrix, path: &Path) -> Result<()> {
    let mut out = String::new();
    for t in 0..traj.frame_count() {
        for c in 0..traj.channel_count() {
            if c > 0 {
                out.push(',');
            }
            let v = traj.get(t, c);
            if v.is_nan() {
                out.push_str("NaN");
            } else {
                out.push_str(&format!("{v}"));
            }
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub const MANIFEST_HEADER: &str = "participant_id,path,label";

/// One parsed manifest row.
#[derive(Debug, Clone)]
struct ManifestRow {
    participant_id: String,
    path: PathBuf,
    label: u8,
}

fn parse_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{}: empty manifest", path.display())))?;
    if header.trim() != MANIFEST_HEADER {
        return Err(Error::Data(format!(
            "{}: manifest header must be `{MANIFEST_HEADER}`, got `{header}`",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Data(format!(
                "{}: manifest row {} must have 3 fields",
                path.display(),
                i + 2
            )));
        }
        let label: u8 = parts[2].trim().parse().map_err(|_| {
            Error::Data(format!(
                "{}: manifest row {}: label `{}` is not 0 or 1",
                path.display(),
                i + 2,
                parts[2]
            ))
        })?;
        if label > 1 {
            return Err(Error::Data(format!(
                "{}: manifest row {}: label {} outside {{0,1}}",
                path.display(),
                i + 2,
                label
            )));
        }
        rows.push(ManifestRow {
            participant_id: parts[0].trim().to_string(),
            path: PathBuf::from(parts[1].trim()),
            label,
        });
    }
    Ok(rows)
}

/// Load a manifest and all referenced trajectories into a validated cohort,
/// preserving manifest row order. Distinct participants load in parallel
/// when the `parallel` feature is enabled; assembly order is row order
/// regardless of scheduling.
pub fn load_manifest(manifest_path: &Path, data_root: &Path) -> Result<Cohort> {
    let rows = parse_manifest(manifest_path)?;
    if rows.is_empty() {
        return Err(Error::Data(format!(
            "{}: manifest lists no participants",
            manifest_path.display()
        )));
    }

    let load_one = |row: &ManifestRow| -> Result<(TrajectoryMatrix, LabelRecord)> {
        let full = data_root.join(&row.path);
        let loaded = load_trajectory(&full, None)?;
        // The file stem may differ from the manifest id; the manifest wins.
        let m = loaded.matrix;
        let matrix = TrajectoryMatrix::new(
            row.participant_id.clone(),
            m.values().to_vec(),
            m.frame_count(),
            m.channel_count(),
        )?;
        let record = LabelRecord::new(row.participant_id.clone(), row.label)?;
        Ok((matrix, record))
    };

    #[cfg(feature = "parallel")]
    let members: Result<Vec<_>> = {
        use rayon::prelude::*;
        rows.par_iter().map(load_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let members: Result<Vec<_>> = rows.iter().map(load_one).collect();

    Cohort::new(members?)
}

/// Write a cohort to `dir` as a manifest plus one trajectory file per
/// participant. Returns the manifest path.
pub fn write_cohort(cohort: &Cohort, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let traj_dir = dir.join("trajectories");
    fs::create_dir_all(&traj_dir).map_err(|e| Error::io(&traj_dir, e))?;
    let mut manifest = String::from(MANIFEST_HEADER);
    manifest.push('\n');
    for (traj, rec) in cohort.members() {
        let rel = format!("trajectories/{}.csv", rec.participant_id);
        write_trajectory(traj, &dir.join(&rel))?;
        manifest.push_str(&format!("{},{},{}\n", rec.participant_id, rel, rec.label));
    }
    let manifest_path = dir.join("manifest.csv");
    fs::write(&manifest_path, manifest).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}

/// Uniform-stride frame subsample bounding the quadratic recurrence cost.
///
/// Keeps the first frame, preserves order, and returns the input unchanged
/// when it already fits. Idempotent for a fixed `max_frames`.
pub fn subsample_frames(traj: &TrajectoryMatrix, max_frames: usize) -> Result<TrajectoryMatrix> {
    if max_frames < 2 {
        return Err(Error::Config(format!(
            "max_frames must be at least 2, got {max_frames}"
        )));
    }
    let t = traj.frame_count();
    if t <= max_frames {
        return Ok(traj.clone());
    }
    let stride = t.div_ceil(max_frames);
    let c = traj.channel_count();
    let mut values = Vec::with_capacity(t.div_ceil(stride) * c);
    let mut frames = 0;
    let mut i = 0;
    while i < t {
        values.extend((0..c).map(|ch| traj.get(i, ch)));
        frames += 1;
        i += stride;
    }
    TrajectoryMatrix::new(traj.participant_id(), values, frames, c)
}

/// Write a feature table as TSV: `participant_id`, `label`, then one column
/// per feature, `NA` for invalid cells.
pub fn write_feature_table_tsv(table: &CohortFeatureTable, path: &Path) -> Result<()> {
    let mut out = String::from("participant_id\tlabel");
    for name in &table.feature_names {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    for row in 0..table.n_participants() {
        out.push_str(&table.participant_ids[row]);
        out.push('\t');
        out.push_str(&table.labels[row].to_string());
        for col in 0..table.n_features() {
            out.push('\t');
            match table.get(row, col) {
                Some(v) => out.push_str(&format!("{v}")),
                None => out.push_str("NA"),
            }
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read a feature table written by [`write_feature_table_tsv`].
pub fn read_feature_table_tsv(path: &Path) -> Result<CohortFeatureTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{}: empty feature table", path.display())))?;
    let cols: Vec<&str> = header.split('\t').collect();
    if cols.len() < 3 || cols[0] != "participant_id" || cols[1] != "label" {
        return Err(Error::Data(format!(
            "{}: feature table must start with participant_id<TAB>label",
            path.display()
        )));
    }
    let feature_names: Vec<String> = cols[2..].iter().map(|s| s.to_string()).collect();
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut cells: Vec<Option<f64>> = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != cols.len() {
            return Err(Error::Data(format!(
                "{}: row {} has {} fields, expected {}",
                path.display(),
                i + 2,
                parts.len(),
                cols.len()
            )));
        }
        ids.push(parts[0].to_string());
        let label: u8 = parts[1].parse().map_err(|_| {
            Error::Data(format!("{}: row {}: bad label `{}`", path.display(), i + 2, parts[1]))
        })?;
        if label > 1 {
            return Err(Error::Data(format!(
                "{}: row {}: label {} outside {{0,1}}",
                path.display(),
                i + 2,
                label
            )));
        }
        labels.push(label);
        for cell in &parts[2..] {
            if *cell == "NA" {
                cells.push(None);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    Error::Data(format!(
                        "{}: row {}: bad value `{cell}`",
                        path.display(),
                        i + 2
                    ))
                })?;
                cells.push(Some(v));
            }
        }
    }
    let mut table = CohortFeatureTable::empty(ids, labels, feature_names);
    let nf = table.n_features();
    for (idx, cell) in cells.into_iter().enumerate() {
        table.set(idx / nf, idx % nf, cell);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, contents).unwrap();
        p
    }

    #[test]
    fn load_plain_numeric_file() {
        let dir = tempdir().unwrap();
        let p = write_file(dir.path(), "a.csv", "1.0,2.0\n3.0,4.0\n5.0,6.0\n");
        let loaded = load_trajectory(&p, None).unwrap();
        assert_eq!(loaded.matrix.frame_count(), 3);
        assert_eq!(loaded.matrix.channel_count(), 2);
        assert_eq!(loaded.warnings, 0);
        assert_eq!(loaded.matrix.get(2, 1), 6.0);
    }

    #[test]
    fn single_row_is_an_error() {
        let dir = tempdir().unwrap();
        let p = write_file(dir.path(), "a.csv", "1.0,2.0\n");
        let err = load_trajectory(&p, None).unwrap_err();
        assert!(err.to_string().contains("fewer than 2 frames"), "{err}");
    }

    #[test]
    fn blank_cell_becomes_nan_with_warning() {
        let dir = tempdir().unwrap();
        let p = write_file(dir.path(), "a.csv", "1.0,2.0\n,4.0\n");
        let loaded = load_trajectory(&p, None).unwrap();
        assert!(loaded.matrix.get(1, 0).is_nan());
        assert_eq!(loaded.warnings, 1);
    }

    #[test]
    fn literal_nan_is_not_a_warning() {
        let dir = tempdir().unwrap();
        let p = write_file(dir.path(), "a.csv", "1.0,NaN\n3.0,4.0\n");
        let loaded = load_trajectory(&p, None).unwrap();
        assert!(loaded.matrix.get(0, 1).is_nan());
        assert_eq!(loaded.warnings, 0);
    }

    #[test]
    fn header_row_is_skipped() {
        let dir = tempdir().unwrap();
        let p = write_file(dir.path(), "a.csv", "f0,f1\n1.0,2.0\n3.0,4.0\n");
        let loaded = load_trajectory(&p, None).unwrap();
        assert_eq!(loaded.matrix.frame_count(), 2);
        assert_eq!(loaded.matrix.get(0, 0), 1.0);
    }

    #[test]
    fn inconsistent_widths_rejected() {
        let dir = tempdir().unwrap();
        let p = write_file(dir.path(), "a.csv", "1.0,2.0\n3.0\n");
        assert!(load_trajectory(&p, None).is_err());
    }

    #[test]
    fn expected_channels_enforced() {
        let dir = tempdir().unwrap();
        let p = write_file(dir.path(), "a.csv", "1,2\n3,4\n");
        assert!(load_trajectory(&p, Some(3)).is_err());
        assert!(load_trajectory(&p, Some(2)).is_ok());
    }

    #[test]
    fn infinities_are_warned_into_nan() {
        let dir = tempdir().unwrap();
        let p = write_file(dir.path(), "a.csv", "1.0,inf\n3.0,4.0\n");
        let loaded = load_trajectory(&p, None).unwrap();
        assert!(loaded.matrix.get(0, 1).is_nan());
        assert_eq!(loaded.warnings, 1);
    }

    #[test]
    fn subsample_noop_and_stride() {
        let values: Vec<f64> = (0..10).map(|t| t as f64).collect();
        let traj = TrajectoryMatrix::new("p", values, 10, 1).unwrap();
        let same = subsample_frames(&traj, 200).unwrap();
        assert_eq!(same, traj);

        let sub = subsample_frames(&traj, 5).unwrap();
        assert_eq!(sub.frame_count(), 5);
        let kept: Vec<f64> = (0..5).map(|t| sub.get(t, 0)).collect();
        assert_eq!(kept, vec![0.0, 2.0, 4.0, 6.0, 8.0]);

        // boundary: T = max_frames
        let two = TrajectoryMatrix::new("q", vec![1.0, 2.0], 2, 1).unwrap();
        assert_eq!(subsample_frames(&two, 2).unwrap(), two);
    }

    #[test]
    fn subsample_is_idempotent() {
        let values: Vec<f64> = (0..37).map(|t| (t as f64).sin()).collect();
        let traj = TrajectoryMatrix::new("p", values, 37, 1).unwrap();
        for max in [2usize, 3, 5, 10, 36, 37] {
            let once = subsample_frames(&traj, max).unwrap();
            let twice = subsample_frames(&once, max).unwrap();
            assert_eq!(once, twice, "max_frames={max}");
        }
    }

    #[test]
    fn manifest_roundtrip_preserves_order_and_labels() {
        let dir = tempdir().unwrap();
        write_file(dir.path(), "t1.csv", "1,2\n3,4\n");
        write_file(dir.path(), "t2.csv", "5,6\n7,8\n");
        write_file(dir.path(), "t3.csv", "0,1\n2,3\n");
        write_file(dir.path(), "t4.csv", "9,8\n7,6\n");
        let manifest = write_file(
            dir.path(),
            "manifest.csv",
            "participant_id,path,label\nzed,t1.csv,0\nann,t2.csv,1\nbob,t3.csv,0\ncat,t4.csv,1\n",
        );
        let cohort = load_manifest(&manifest, dir.path()).unwrap();
        assert_eq!(cohort.len(), 4);
        assert_eq!(cohort.participant_ids(), vec!["zed", "ann", "bob", "cat"]);
        assert_eq!(cohort.labels(), vec![0, 1, 0, 1]);
    }

    #[test]
    fn manifest_duplicate_id_rejected() {
        let dir = tempdir().unwrap();
        write_file(dir.path(), "t1.csv", "1\n2\n");
        let manifest = write_file(
            dir.path(),
            "manifest.csv",
            "participant_id,path,label\np,t1.csv,0\np,t1.csv,1\n",
        );
        let err = load_manifest(&manifest, dir.path()).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn manifest_single_class_rejected() {
        let dir = tempdir().unwrap();
        write_file(dir.path(), "t1.csv", "1\n2\n");
        write_file(dir.path(), "t2.csv", "3\n4\n");
        let manifest = write_file(
            dir.path(),
            "manifest.csv",
            "participant_id,path,label\na,t1.csv,0\nb,t2.csv,0\n",
        );
        let err = load_manifest(&manifest, dir.path()).unwrap_err();
        assert!(err.to_string().contains("each class"), "{err}");
    }

    #[test]
    fn manifest_bad_label_rejected() {
        let dir = tempdir().unwrap();
        write_file(dir.path(), "t1.csv", "1\n2\n");
        let manifest = write_file(
            dir.path(),
            "manifest.csv",
            "participant_id,path,label\na,t1.csv,2\n",
        );
        assert!(load_manifest(&manifest, dir.path()).is_err());
    }

    #[test]
    fn trajectory_roundtrip_is_bitwise() {
        let dir = tempdir().unwrap();
        let values = vec![
            1.0,
            std::f64::consts::PI,
            f64::NAN,
            -0.1,
            1e-300,
            2.0f64.powi(-40) + 1.0,
        ];
        let traj = TrajectoryMatrix::new("p", values, 3, 2).unwrap();
        let p = dir.path().join("t.csv");
        write_trajectory(&traj, &p).unwrap();
        let back = load_trajectory(&p, None).unwrap().matrix;
        assert_eq!(back.frame_count(), 3);
        for t in 0..3 {
            for c in 0..2 {
                let a = traj.get(t, c);
                let b = back.get(t, c);
                assert!(
                    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()),
                    "mismatch at ({t},{c}): {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn feature_table_tsv_roundtrip() {
        let dir = tempdir().unwrap();
        let mut table = CohortFeatureTable::empty(
            vec!["a".into(), "b".into()],
            vec![0, 1],
            vec!["f1".into(), "f2".into()],
        );
        table.set(0, 0, Some(0.125));
        table.set(0, 1, None);
        table.set(1, 0, Some(-3.5));
        table.set(1, 1, Some(1e-9));
        let p = dir.path().join("feat.tsv");
        write_feature_table_tsv(&table, &p).unwrap();
        let back = read_feature_table_tsv(&p).unwrap();
        assert_eq!(back, table);
    }
}
