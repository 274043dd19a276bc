use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use fbmwalk::PathSample;

use crate::config::Format;

/// `t,x` rows with 17 significant digits, LF line endings.
pub fn write_csv(path: &PathSample, out: &mut impl Write) -> io::Result<()> {
    out.write_all(b"t,x\n")?;
    for (t, x) in path.times().zip(&path.values) {
        writeln!(out, "{t:.16e},{x:.16e}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Record {
    t: f64,
    x: f64,
}

pub fn write_jsonl(path: &PathSample, out: &mut impl Write) -> io::Result<()> {
    for (t, &x) in path.times().zip(&path.values) {
        serde_json::to_writer(&mut *out, &Record { t, x })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_path(path: &PathSample, format: Format, out: &mut impl Write) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(path, out),
        Format::Jsonl => write_jsonl(path, out),
    }
}

/// File for path `index` of `count`: the output itself for a single path,
/// `<stem>_<seed>.<ext>` otherwise.
pub fn path_file(out: &Path, seed: u64, count: usize, format: Format) -> PathBuf {
    if count == 1 {
        return out.to_path_buf();
    }
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "path".into());
    out.with_file_name(format!("{stem}_{seed}.{}", format.extension()))
}

/// `<stem>.meta.json` next to the output.
pub fn sidecar_file(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "path".into());
    out.with_file_name(format!("{stem}.meta.json"))
}

pub fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// Pretty JSON to a file, or to standard output when `out` is `None`.
pub fn write_json(value: &impl Serialize, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            serde_json::to_writer_pretty(&mut w, value)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            serde_json::to_writer_pretty(&mut w, value)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use fbmwalk::make_grid;

    fn read_csv(text: &str) -> anyhow::Result<Vec<(f64, f64)>> {
        let mut lines = text.lines();
        anyhow::ensure!(lines.next() == Some("t,x"), "missing t,x header");
        lines
            .map(|line| {
                let (t, x) = line.split_once(',').context("row without a comma")?;
                Ok((t.parse()?, x.parse()?))
            })
            .collect()
    }

    fn sample() -> PathSample {
        let grid = make_grid(4, 1.0, 1).unwrap();
        PathSample::new(grid, vec![0.0, 0.1, -1.0 / 3.0, 2.5e-300, 1e17], false).unwrap()
    }

    #[test]
    fn csv_round_trips_bit_for_bit() {
        let p = sample();
        let mut buf = Vec::new();
        write_csv(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x\n0.0000000000000000e0,0.0000000000000000e0\n"));
        assert!(!text.contains('\r'));
        let rows = read_csv(&text).unwrap();
        assert_eq!(rows.len(), 5);
        for ((t, x), (t0, x0)) in rows.iter().zip(p.times().zip(&p.values)) {
            assert_eq!(t.to_bits(), t0.to_bits());
            assert_eq!(x.to_bits(), x0.to_bits());
        }
    }

    #[test]
    fn jsonl_has_one_record_per_point() {
        let mut buf = Vec::new();
        write_jsonl(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first, serde_json::json!({"t": 0.0, "x": 0.0}));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn file_names() {
        let out = Path::new("/tmp/run.csv");
        assert_eq!(path_file(out, 7, 1, Format::Csv), out);
        assert_eq!(path_file(out, 7, 3, Format::Csv), Path::new("/tmp/run_7.csv"));
        assert_eq!(sidecar_file(out), Path::new("/tmp/run.meta.json"));
    }
}
