//! Manifest parsing for `validate`: a CSV listing one video per row.
//!
//! Header `video_id,trace_path,annotation_path` is mandatory. Relative
//! paths are resolved against the manifest's own directory.

use std::path::{Path, PathBuf};

pub const MANIFEST_COLUMNS: [&str; 3] = ["video_id", "trace_path", "annotation_path"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub video_id: String,
    pub trace_path: PathBuf,
    pub annotation_path: PathBuf,
}

pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Vec<ManifestEntry>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| format!("manifest header: {e}"))?;
    let found: Vec<&str> = headers.iter().collect();
    if found != MANIFEST_COLUMNS {
        return Err(format!(
            "manifest header must be `{}`, found `{}`",
            MANIFEST_COLUMNS.join(","),
            found.join(",")
        ));
    }

    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| format!("manifest row {row}: {e}"))?;
        if record.len() != 3 {
            return Err(format!(
                "manifest row {row}: expected 3 fields, found {}",
                record.len()
            ));
        }
        let video_id = record[0].to_string();
        if video_id.is_empty() {
            return Err(format!("manifest row {row}: empty video_id"));
        }
        entries.push(ManifestEntry {
            video_id,
            trace_path: resolve(base_dir, &record[1]),
            annotation_path: resolve(base_dir, &record[2]),
        });
    }
    Ok(entries)
}

fn resolve(base_dir: &Path, path: &str) -> PathBuf {
    let path = Path::new(path);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base_dir.join(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rows_and_resolves_relative_paths() {
        let text = "video_id,trace_path,annotation_path\nv1,traces/v1.csv,/abs/v1.txt\n";
        let entries = parse_manifest(text, Path::new("/data")).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].video_id, "v1");
        assert_eq!(entries[0].trace_path, Path::new("/data/traces/v1.csv"));
        assert_eq!(entries[0].annotation_path, Path::new("/abs/v1.txt"));
    }

    #[test]
    fn empty_manifest_is_ok() {
        let entries =
            parse_manifest("video_id,trace_path,annotation_path\n", Path::new(".")).unwrap();
        assert!(entries.is_empty());
    }

    #[test]
    fn rejects_wrong_header() {
        let err = parse_manifest("id,trace,ann\n", Path::new(".")).unwrap_err();
        assert!(err.contains("video_id,trace_path,annotation_path"));
    }

    #[test]
    fn quoted_paths_may_contain_commas() {
        let text = "video_id,trace_path,annotation_path\nv1,\"a,b.csv\",v1.txt\n";
        let entries = parse_manifest(text, Path::new(".")).unwrap();
        assert_eq!(entries[0].trace_path, Path::new("./a,b.csv"));
    }
}
