use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use framecheck::net::NetGrid;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::error::CliError;

/// Pretty JSON with every float written to 17 significant digits.
struct Sci17(PrettyFormatter<'static>);

impl Formatter for Sci17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, x: f64) -> io::Result<()> {
        write!(w, "{x:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, x: f32) -> io::Result<()> {
        self.write_f64(w, x as f64)
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

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Sci17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    fs::write(&path, to_json_string(value)?).map_err(io_err(&path))?;
    Ok(path)
}

fn csv_float(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_net_csv(dir: &Path, grid: &NetGrid) -> Result<PathBuf, CliError> {
    ensure_dir(dir)?;
    let path = dir.join("net.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["i", "j", "x1", "x2", "u", "v", "theta", "valid"])?;
    let opt = |x: Option<f64>| x.map(csv_float).unwrap_or_default();
    for r in grid.rows() {
        w.write_record([
            r.i.to_string(),
            r.j.to_string(),
            csv_float(r.x1),
            csv_float(r.x2),
            opt(r.u),
            opt(r.v),
            opt(r.theta),
            r.valid.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_get_seventeen_digits() {
        let s = to_json_string(&json!({"x": 0.1, "n": 3, "nan": f64::NAN, "v": [1.5]})).unwrap();
        assert!(s.contains("\"x\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("\"nan\": null"));
        assert!(s.contains("1.5000000000000000e0"));
    }

    #[test]
    fn formatted_floats_round_trip() {
        for x in [std::f64::consts::PI, 1.0 / 3.0, 6273.762_451_1, -2.5e-300] {
            let s = format!("{x:.16e}");
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
