//! Output encodings: JSON and CSV with every float at 17 significant digits.

use std::io::{self, Write};

use filippov_core::flow::PiecewiseTrajectory;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub const TRAJECTORY_SCHEMA: &str = "filippov-trajectory/v1";
pub const TRAJECTORY_COLUMNS: &str = "t,x1,x2,x3,kind,segment";

/// `d.dddddddddddddddde±x`: round-trips every finite `f64`.
pub fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON whose floats are written by [`sig17`].
pub struct Sig17Formatter<'a>(PrettyFormatter<'a>);

impl Default for Sig17Formatter<'_> {
    fn default() -> Self {
        Sig17Formatter(PrettyFormatter::new())
    }
}

impl Formatter for Sig17Formatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(sig17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter::default());
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn trajectory_header(digest: &str, seed: u64) -> String {
    format!("# {TRAJECTORY_SCHEMA} spec={digest} seed={seed} columns={TRAJECTORY_COLUMNS}\n")
}

/// Appends one row per sample; segment indices start at `first_segment`.
/// Returns the next free segment index.
pub fn write_trajectory_rows(out: &mut String, traj: &PiecewiseTrajectory, first_segment: usize) -> usize {
    let mut index = first_segment;
    for seg in &traj.segments {
        for (t, x) in &seg.samples {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                sig17(*t),
                sig17(x[0]),
                sig17(x[1]),
                sig17(x[2]),
                seg.kind.name(),
                index
            ));
        }
        index += 1;
    }
    index
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0, -0.0] {
            assert_eq!(sig17(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn json_uses_sig17_and_stays_valid() {
        let text = to_json(&serde_json::json!({"x": 0.1, "n": 3, "v": [1.5]}));
        assert!(text.contains("1.0000000000000001e-1"));
        assert!(text.contains("\"n\": 3"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["v"][0].as_f64(), Some(1.5));
    }
}
