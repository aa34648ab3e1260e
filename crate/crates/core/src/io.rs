//! CSV and file helpers.
//!
//! Event streams use the columns `window_index,setting_label,outcome`;
//! coincidence trials use `setting_a,setting_b,a,b`. Other record types
//! (spreadsheet rows, ball pairs, game rounds, campaign runs) serialize
//! through the same generic writers with their own headers.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{PairedTrial, StationEvent};

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(&text)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_atomic(path, csv_string(rows)?.as_bytes())
}

pub fn read_events(path: &Path) -> Result<Vec<StationEvent>> {
    let events: Vec<StationEvent> = read_csv(path)?;
    check_window_order(&events)?;
    Ok(events)
}

pub fn read_trials(path: &Path) -> Result<Vec<PairedTrial>> {
    read_csv(path)
}

/// Window indices must be strictly increasing within one stream.
pub fn check_window_order(events: &[StationEvent]) -> Result<()> {
    for w in events.windows(2) {
        if w[1].window_index <= w[0].window_index {
            return Err(Error::InvalidParameter(format!(
                "window_index not strictly increasing at {} -> {}",
                w[0].window_index, w[1].window_index
            )));
        }
    }
    Ok(())
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let wrap = |source| Error::File {
        path: path.display().to_string(),
        source,
    };
    {
        let mut f = fs::File::create(&tmp).map_err(wrap)?;
        f.write_all(bytes).map_err(wrap)?;
        f.sync_all().map_err(wrap)?;
    }
    fs::rename(&tmp, path).map_err(wrap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Outcome, Setting};

    #[test]
    fn event_csv_schema() {
        let ev = vec![
            StationEvent::new(0, Setting(1), Outcome::Plus),
            StationEvent::new(3, Setting(0), Outcome::NoCount),
        ];
        let s = csv_string(&ev).unwrap();
        assert_eq!(s, "window_index,setting_label,outcome\n0,1,1\n3,0,0\n");
        let back: Vec<StationEvent> = parse_csv(&s).unwrap();
        assert_eq!(back, ev);
    }

    #[test]
    fn trial_csv_schema() {
        let t = vec![PairedTrial::new(Setting(0), Setting(2), Outcome::Minus, Outcome::Plus)];
        assert_eq!(csv_string(&t).unwrap(), "setting_a,setting_b,a,b\n0,2,-1,1\n");
    }

    #[test]
    fn rejects_bad_outcome() {
        let r: Result<Vec<StationEvent>> = parse_csv("window_index,setting_label,outcome\n0,0,5\n");
        assert!(r.is_err());
    }

    #[test]
    fn rejects_unordered_windows() {
        let ev = vec![
            StationEvent::new(2, Setting(0), Outcome::Plus),
            StationEvent::new(2, Setting(0), Outcome::Plus),
        ];
        assert!(check_window_order(&ev).is_err());
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
