//! Control-field interchange format.
//!
//! Controls serialize to CSV with header `t,C`: one row per grid cell, the
//! midpoint time and the sample, both with 17 significant digits so `f64`
//! values survive a round trip exactly. The reader reconstructs the uniform
//! grid from the midpoint times and rejects files whose times do not sit on
//! one.

use std::io::{BufRead, Write};

use crate::control::{ControlField, ShapeFunction, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Format a scalar with 17 significant digits (lossless for `f64`).
pub fn fmt_scalar<S: Real>(v: S) -> String {
    format!("{:.16e}", v.as_f64())
}

/// Write a control field as `t,C` rows.
pub fn write_control_csv<S: Real, W: Write>(w: &mut W, c: &ControlField<S>) -> Result<()> {
    writeln!(w, "t,C")?;
    for (k, &sample) in c.samples().iter().enumerate() {
        writeln!(w, "{},{}", fmt_scalar(c.grid().midpoint(k)), fmt_scalar(sample))?;
    }
    Ok(())
}

/// Parse a control field written by [`write_control_csv`].
///
/// The shape function is metadata not carried by the file and must be
/// supplied by the caller.
pub fn read_control_csv<S: Real, R: BufRead>(
    r: &mut R,
    shape: ShapeFunction<S>,
) -> Result<ControlField<S>> {
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => {
            return Err(Error::Parse { line: 1, message: "empty file, expected header `t,C`".into() })
        }
    };
    if header.trim_end() != "t,C" {
        return Err(Error::Parse { line: 1, message: format!("expected header `t,C`, got `{header}`") });
    }

    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let (t_str, c_str) = match (parts.next(), parts.next(), parts.next()) {
            (Some(t), Some(c), None) => (t, c),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: "expected exactly two comma-separated fields".into(),
                })
            }
        };
        let t: f64 = t_str.trim().parse().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad time value `{t_str}`: {e}"),
        })?;
        let c: f64 = c_str.trim().parse().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad control value `{c_str}`: {e}"),
        })?;
        times.push(t);
        samples.push(S::of(c));
    }
    if times.is_empty() {
        return Err(Error::Parse { line: 2, message: "no samples in file".into() });
    }

    // The first midpoint fixes dt = 2·t₀ (exact doubling); every row must
    // sit on the implied uniform midpoint grid.
    let n = times.len();
    let dt = 2.0 * times[0];
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Parse { line: 2, message: format!("first midpoint {} implies a non-positive grid", times[0]) });
    }
    let t_f = dt * n as f64;
    let tol = 1e-9 * t_f.max(1.0);
    for (k, &t) in times.iter().enumerate() {
        let expect = (k as f64 + 0.5) * dt;
        if (t - expect).abs() > tol {
            return Err(Error::Parse {
                line: k + 2,
                message: format!("non-uniform grid: time {t} but expected {expect}"),
            });
        }
    }
    let grid = TimeGrid::new(n, S::of(t_f))?;
    ControlField::new(grid, shape, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::io::BufReader;

    fn shape() -> ShapeFunction<f64> {
        ShapeFunction::new(1.0).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let grid = TimeGrid::new(1024, 1.0).unwrap();
        let samples: Vec<f64> = (0..1024).map(|_| rng.gen_range(-30.0..30.0)).collect();
        let c = ControlField::new(grid, shape(), samples).unwrap();

        let mut buf = Vec::new();
        write_control_csv(&mut buf, &c).unwrap();
        let back = read_control_csv(&mut BufReader::new(buf.as_slice()), shape()).unwrap();
        assert_eq!(back.samples(), c.samples());
        assert_eq!(back.grid(), c.grid());

        // Writing the reconstruction reproduces the bytes.
        let mut buf2 = Vec::new();
        write_control_csv(&mut buf2, &back).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        let err = read_control_csv(&mut BufReader::new(&b""[..]), shape()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = read_control_csv(&mut BufReader::new(&b"t,C\n"[..]), shape()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let data = b"t,C\n5.0e-1,1.0\n0.75,not-a-number\n";
        let err = read_control_csv(&mut BufReader::new(&data[..]), shape()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_uniform_grid_is_rejected() {
        let data = b"t,C\n0.125,1.0\n0.5,2.0\n0.625,3.0\n0.875,4.0\n";
        let err = read_control_csv(&mut BufReader::new(&data[..]), shape()).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("non-uniform"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bad_header_is_rejected() {
        let data = b"time,amplitude\n0.5,1.0\n";
        let err = read_control_csv(&mut BufReader::new(&data[..]), shape()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
