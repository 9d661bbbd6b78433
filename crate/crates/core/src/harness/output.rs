use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use super::config::SliceAxis;
use super::run::{FrameMoments, RunReport};
use super::HarnessError;
use crate::propagator::GridSpec;

/// Seventeen significant digits, shared by CSV and JSON so the two agree exactly.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON with every float written by [`format_number`].
struct NumberFormatter(PrettyFormatter<'static>);

impl Formatter for NumberFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_number(value).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, NumberFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report values are finite");
    buf.push(b'\n');
    String::from_utf8(buf).expect("json is utf-8")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn energy_csv(report: &RunReport) -> String {
    let e = &report.energy;
    let mut out = String::from("t,wce_energy,mc_energy,reference\n");
    for (n, t) in e.times.iter().enumerate() {
        let w = e.wce.as_ref().map(|v| v[n]);
        let m = e.mc.as_ref().map(|v| v[n]);
        writeln!(out, "{},{},{},{}", format_number(*t), opt(w), opt(m), format_number(e.reference[n])).unwrap();
    }
    out
}

fn scan_csv(report: &RunReport) -> Option<String> {
    let scan = report.energy_scan.as_ref()?;
    let mut out = String::from("t");
    for s in scan {
        let sigma = format_number(s.sigma);
        if s.wce.is_some() {
            write!(out, ",wce_sigma={sigma}").unwrap();
        }
        if s.mc.is_some() {
            write!(out, ",mc_sigma={sigma}").unwrap();
        }
        write!(out, ",reference_sigma={sigma}").unwrap();
    }
    out.push('\n');
    for (n, t) in report.energy.times.iter().enumerate() {
        out.push_str(&format_number(*t));
        for s in scan {
            for series in [&s.wce, &s.mc].into_iter().flatten() {
                write!(out, ",{}", format_number(series[n])).unwrap();
            }
            write!(out, ",{}", format_number(s.reference[n])).unwrap();
        }
        out.push('\n');
    }
    Some(out)
}

const AXES: [&str; 3] = ["x", "y", "z"];
const MOMENTS: [&str; 4] = ["mean", "m2", "m3", "m4"];

/// One row per selected grid point: coordinates, then moments per estimator.
fn moments_csv(grid: &GridSpec, frame: &FrameMoments, c: usize, keep: &dyn Fn([usize; 3]) -> bool) -> String {
    let cm = &frame.components[c];
    let estimators: Vec<(&str, &[Vec<f64>; 4])> =
        [("wce", cm.wce.as_ref()), ("mc", cm.mc.as_ref())].into_iter().filter_map(|(n, m)| m.map(|m| (n, m))).collect();
    let mut out = AXES[..grid.dim()].join(",");
    for (name, _) in &estimators {
        for m in MOMENTS {
            write!(out, ",{name}_{m}").unwrap();
        }
    }
    out.push('\n');
    for i in 0..grid.points() {
        if !keep(grid.multi_index(i)) {
            continue;
        }
        let x = grid.coordinates(i);
        let coords: Vec<String> = x[..grid.dim()].iter().map(|v| format_number(*v)).collect();
        out.push_str(&coords.join(","));
        for (_, m) in &estimators {
            for k in m.iter() {
                write!(out, ",{}", format_number(k[i])).unwrap();
            }
        }
        out.push('\n');
    }
    out
}

/// Files of a report as `(name, contents)`, in writing order.
pub fn render_outputs(report: &RunReport) -> Vec<(String, String)> {
    let mut files = vec![("energy.csv".to_string(), energy_csv(report))];
    if let Some(grid) = &report.grid {
        for frame in &report.frames {
            for (c, cm) in frame.components.iter().enumerate() {
                let name = if frame.is_final {
                    format!("moments_{}.csv", cm.component)
                } else {
                    format!("moments_{}_t{}.csv", cm.component, frame.time)
                };
                files.push((name, moments_csv(grid, frame, c, &|_| true)));
            }
        }
        let last = report.final_frame();
        for axis in report.config.slice.iter().flatten() {
            let a = SliceAxis::index(*axis);
            for (c, cm) in last.components.iter().enumerate() {
                // the plane at index 0 is also the plane at the far boundary
                let csv = moments_csv(grid, last, c, &|idx| idx[a] == 0);
                files.push((format!("slice_{}_{}.csv", cm.component, axis.name()), csv));
            }
        }
    }
    if let Some(scan) = scan_csv(report) {
        files.push(("energy_scan.csv".to_string(), scan));
    }
    files.push(("report.json".to_string(), to_json(report)));
    files
}

/// Writes all outputs into `dir`; on failure every file written so far is removed.
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let io_err = |path: &Path, source: io::Error| HarnessError::Io { path: path.to_path_buf(), source };
    let created_dir = !dir.exists();
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    for (name, contents) in render_outputs(report) {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, contents) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            if created_dir {
                let _ = fs::remove_dir(dir);
            }
            return Err(io_err(&path, e));
        }
        written.push(path);
    }
    Ok(written)
}
