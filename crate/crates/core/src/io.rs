//! On-disk formats, byte-exact and deterministic.
//!
//! # Scan file (`.rps`)
//!
//! Little-endian binary, one scan per file:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "RPS1"
//! 4       4     azimuth_count   (u32)
//! 8       4     range_bin_count (u32)
//! 12      8     range_resolution, meters per bin (f64)
//! 20      8     timestamp, seconds (f64)
//! 28      8     intensity_scale (f64)
//! 36      N     samples, row-major by azimuth (u8); intensity = b/255 * scale
//! ```
//!
//! Recorded radar data with 8-bit samples converts in losslessly with
//! `intensity_scale = 1`.
//!
//! # Occupancy raster (`.pgm` + `.meta`)
//!
//! Binary 16-bit PGM (`P5`, maxval 65535, big-endian samples, row 0 the
//! north edge); occupancy = sample / 65535. The sidecar `.meta` file holds
//! UTF-8 `key=value` lines: `meters_per_pixel`, `origin_x`, `origin_y`,
//! `origin_theta` (floats printed with shortest round-trip formatting).
//!
//! # Trajectory CSVs
//!
//! Ground truth: header `t,x,y,theta`. Localization output: header
//! `t,x,y,theta,gt_x,gt_y,gt_theta,fitness,gated` with `gated` 0/1.
//! All floats use [`fmt_sig9`]: nine significant digits, fixed-point
//! inside `1e-4..1e9`, scientific outside.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::occupancy::OccupancyImage;
use crate::scan::PolarScan;
use crate::se2::Pose2;

const SCAN_MAGIC: &[u8; 4] = b"RPS1";

/// Nine significant digits; deterministic.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.8e}");
    let (_, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}

fn format_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn write_scan(path: &Path, scan: &PolarScan<f64>, intensity_scale: f64) -> Result<()> {
    assert!(intensity_scale > 0.0);
    let mut buf = Vec::with_capacity(36 + scan.intensities().len());
    buf.extend_from_slice(SCAN_MAGIC);
    buf.extend_from_slice(&(scan.azimuth_count() as u32).to_le_bytes());
    buf.extend_from_slice(&(scan.range_bin_count() as u32).to_le_bytes());
    buf.extend_from_slice(&scan.range_resolution.to_le_bytes());
    buf.extend_from_slice(&scan.timestamp.to_le_bytes());
    buf.extend_from_slice(&intensity_scale.to_le_bytes());
    for v in scan.intensities() {
        let q = (v / intensity_scale * 255.0).round().clamp(0.0, 255.0) as u8;
        buf.push(q);
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_scan(path: &Path) -> Result<PolarScan<f64>> {
    let mut file = fs::File::open(path)?;
    let mut header = [0u8; 36];
    file.read_exact(&mut header)
        .map_err(|_| format_error(path, "truncated scan header"))?;
    if &header[0..4] != SCAN_MAGIC {
        return Err(format_error(path, "bad magic, expected RPS1"));
    }
    let azimuths = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let bins = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let resolution = f64::from_le_bytes(header[12..20].try_into().unwrap());
    let timestamp = f64::from_le_bytes(header[20..28].try_into().unwrap());
    let scale = f64::from_le_bytes(header[28..36].try_into().unwrap());
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(format_error(path, "intensity_scale must be positive"));
    }
    let mut samples = Vec::new();
    file.read_to_end(&mut samples)?;
    if samples.len() != azimuths * bins {
        return Err(format_error(
            path,
            format!(
                "expected {} samples, found {}",
                azimuths * bins,
                samples.len()
            ),
        ));
    }
    let intensities: Vec<f64> = samples
        .iter()
        .map(|b| f64::from(*b) / 255.0 * scale)
        .collect();
    PolarScan::new(azimuths, bins, resolution, timestamp, intensities)
}

/// Scan files in a dataset directory, sorted by filename.
pub fn list_scan_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "rps") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn write_raster(pgm_path: &Path, img: &OccupancyImage<f64>) -> Result<()> {
    let mut buf = Vec::with_capacity(32 + img.values().len() * 2);
    buf.extend_from_slice(format!("P5\n{} {}\n65535\n", img.width(), img.height()).as_bytes());
    for v in img.values() {
        let q = (v * 65535.0).round().clamp(0.0, 65535.0) as u16;
        buf.extend_from_slice(&q.to_be_bytes());
    }
    fs::write(pgm_path, buf)?;
    let meta = format!(
        "meters_per_pixel={}\norigin_x={}\norigin_y={}\norigin_theta={}\n",
        img.meters_per_pixel, img.origin.x, img.origin.y, img.origin.theta
    );
    fs::write(meta_path(pgm_path), meta)?;
    Ok(())
}

fn meta_path(pgm_path: &Path) -> PathBuf {
    pgm_path.with_extension("meta")
}

pub fn read_raster(pgm_path: &Path) -> Result<OccupancyImage<f64>> {
    let data = fs::read(pgm_path)?;
    // Header: "P5" <ws> width <ws> height <ws> maxval <single ws> samples.
    let mut fields = Vec::new();
    let mut pos = 0usize;
    while fields.len() < 4 && pos < data.len() {
        while pos < data.len() && data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        fields.push(
            std::str::from_utf8(&data[start..pos])
                .map_err(|_| format_error(pgm_path, "non-ascii header"))?
                .to_string(),
        );
    }
    if fields.len() != 4 || fields[0] != "P5" {
        return Err(format_error(pgm_path, "expected binary PGM (P5)"));
    }
    pos += 1; // single whitespace after maxval
    let width: usize = fields[1]
        .parse()
        .map_err(|_| format_error(pgm_path, "bad width"))?;
    let height: usize = fields[2]
        .parse()
        .map_err(|_| format_error(pgm_path, "bad height"))?;
    let maxval: u32 = fields[3]
        .parse()
        .map_err(|_| format_error(pgm_path, "bad maxval"))?;
    if maxval != 65535 {
        return Err(format_error(pgm_path, "expected 16-bit PGM (maxval 65535)"));
    }
    let samples = &data[pos..];
    if samples.len() != width * height * 2 {
        return Err(format_error(
            pgm_path,
            format!(
                "expected {} sample bytes, found {}",
                width * height * 2,
                samples.len()
            ),
        ));
    }
    let values: Vec<f64> = samples
        .chunks_exact(2)
        .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])) / 65535.0)
        .collect();

    let meta_file = meta_path(pgm_path);
    let meta = fs::read_to_string(&meta_file)?;
    let mut mpp = None;
    let mut ox = None;
    let mut oy = None;
    let mut otheta = None;
    for (lineno, line) in meta.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format_error(&meta_file, format!("line {}: missing '='", lineno + 1)))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format_error(&meta_file, format!("line {}: bad number", lineno + 1)))?;
        match key.trim() {
            "meters_per_pixel" => mpp = Some(value),
            "origin_x" => ox = Some(value),
            "origin_y" => oy = Some(value),
            "origin_theta" => otheta = Some(value),
            other => {
                return Err(format_error(
                    &meta_file,
                    format!("unknown key '{other}'"),
                ))
            }
        }
    }
    let mpp = mpp.ok_or_else(|| format_error(&meta_file, "missing meters_per_pixel"))?;
    let origin = Pose2::new(
        ox.ok_or_else(|| format_error(&meta_file, "missing origin_x"))?,
        oy.ok_or_else(|| format_error(&meta_file, "missing origin_y"))?,
        otheta.unwrap_or(0.0),
    );
    OccupancyImage::new(width, height, mpp, origin, values)
}

pub fn write_ground_truth(path: &Path, trajectory: &[(f64, Pose2<f64>)]) -> Result<()> {
    let mut out = String::from("t,x,y,theta\n");
    for (t, p) in trajectory {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_sig9(*t),
            fmt_sig9(p.x),
            fmt_sig9(p.y),
            fmt_sig9(p.theta)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_ground_truth(path: &Path) -> Result<Vec<(f64, Pose2<f64>)>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("t,x,y,theta") => {}
        _ => return Err(format_error(path, "expected header 't,x,y,theta'")),
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(format_error(
                path,
                format!("line {}: expected 4 columns", lineno + 2),
            ));
        }
        let mut vals = [0.0f64; 4];
        for (slot, col) in vals.iter_mut().zip(&cols) {
            *slot = col
                .trim()
                .parse()
                .map_err(|_| format_error(path, format!("line {}: bad number", lineno + 2)))?;
        }
        out.push((vals[0], Pose2::new(vals[1], vals[2], vals[3])));
    }
    Ok(out)
}

/// One output row of the localization pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub pose: Pose2<f64>,
    pub ground_truth: Pose2<f64>,
    pub fitness: f64,
    pub gated: bool,
}

pub fn write_trajectory(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    let mut out = String::from("t,x,y,theta,gt_x,gt_y,gt_theta,fitness,gated\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_sig9(r.t),
            fmt_sig9(r.pose.x),
            fmt_sig9(r.pose.y),
            fmt_sig9(r.pose.theta),
            fmt_sig9(r.ground_truth.x),
            fmt_sig9(r.ground_truth.y),
            fmt_sig9(r.ground_truth.theta),
            fmt_sig9(r.fitness),
            u8::from(r.gated)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads the estimate columns of a localization output CSV.
pub fn read_trajectory_estimates(path: &Path) -> Result<Vec<(f64, Pose2<f64>)>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.starts_with("t,x,y,theta") => {}
        _ => return Err(format_error(path, "expected localization CSV header")),
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 4 {
            return Err(format_error(
                path,
                format!("line {}: expected >= 4 columns", lineno + 2),
            ));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| format_error(path, format!("line {}: bad number", lineno + 2)))
        };
        out.push((
            parse(cols[0])?,
            Pose2::new(parse(cols[1])?, parse(cols[2])?, parse(cols[3])?),
        ));
    }
    Ok(out)
}

/// SHA-256 of a file, lowercase hex.
pub fn sha256_hex(path: &Path) -> Result<String> {
    let mut file = fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 65536];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    Ok(hex)
}

/// Plot-ready CSV of an error report: time series plus histograms.
pub fn write_error_series(path: &Path, report: &crate::evaluation::TrajectoryErrorReport) -> Result<()> {
    let mut out = String::from("t,lat_error_m,long_error_m,yaw_error_deg\n");
    for i in 0..report.n_samples {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_sig9(report.timestamps[i]),
            fmt_sig9(report.lat_errors_m[i]),
            fmt_sig9(report.long_errors_m[i]),
            fmt_sig9(report.yaw_errors_deg[i]),
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_error_histograms(
    path: &Path,
    report: &crate::evaluation::TrajectoryErrorReport,
) -> Result<()> {
    let mut out = String::from("axis,bin_low,bin_high,count\n");
    for (axis, hist) in [
        ("lat", &report.lat_histogram),
        ("long", &report.long_histogram),
    ] {
        for (i, count) in hist.counts.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                axis,
                fmt_sig9(hist.edges[i]),
                fmt_sig9(hist.edges[i + 1]),
                count
            ));
        }
    }
    fs::write(path, out)?;
    Ok(())
}
