//! CSV form of a sampled path: header `t,x1,...,xd`, one row per grid point,
//! numbers written with 17 significant digits.

use std::io::{BufRead, Write};

use super::SampledPath;
use crate::error::{Error, Result};

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_path_csv<W: Write>(path: &SampledPath, mut out: W) -> Result<()> {
    let mut header = String::from("t");
    for c in 1..=path.dim() {
        header.push_str(&format!(",x{c}"));
    }
    writeln!(out, "{header}")?;
    for j in 0..=path.n_cells() {
        let mut line = fmt_f64(path.time(j));
        for v in path.value(j) {
            line.push(',');
            line.push_str(&fmt_f64(*v));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_path_csv<R: BufRead>(input: R) -> Result<SampledPath> {
    let mut dim = None;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match dim {
            None => {
                if fields.first() != Some(&"t") || fields.len() < 2 {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "expected header `t,x1,...,xd`".into(),
                    });
                }
                for (c, f) in fields[1..].iter().enumerate() {
                    if *f != format!("x{}", c + 1) {
                        return Err(Error::Parse {
                            line: lineno,
                            message: format!("unexpected column name `{f}`"),
                        });
                    }
                }
                dim = Some(fields.len() - 1);
            }
            Some(d) => {
                if fields.len() != d + 1 {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("expected {} fields, found {}", d + 1, fields.len()),
                    });
                }
                let mut nums = Vec::with_capacity(d + 1);
                for f in &fields {
                    let v: f64 = f.parse().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("`{f}` is not a number"),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Parse {
                            line: lineno,
                            message: "non-finite value".into(),
                        });
                    }
                    nums.push(v);
                }
                times.push((lineno, nums[0]));
                values.extend_from_slice(&nums[1..]);
            }
        }
    }
    let dim = dim.ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    if times.len() < 2 {
        return Err(Error::Parse {
            line: times.first().map(|t| t.0).unwrap_or(1),
            message: "a path needs at least two rows".into(),
        });
    }
    let n = times.len() - 1;
    let horizon = times[n].1;
    if !(horizon > 0.0) {
        return Err(Error::Parse {
            line: times[n].0,
            message: "final time must be positive".into(),
        });
    }
    let dt = horizon / n as f64;
    for (j, (lineno, t)) in times.iter().enumerate() {
        if (t - j as f64 * dt).abs() > 1e-9 * horizon {
            return Err(Error::Parse {
                line: *lineno,
                message: format!("time {t} is off the uniform grid (expected {})", j as f64 * dt),
            });
        }
    }
    SampledPath::new(horizon, dim, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let p = super::super::fbm_generate(0.7, 10, 0.3, 2, 1).unwrap();
        let mut buf = Vec::new();
        write_path_csv(&p, &mut buf).unwrap();
        let q = read_path_csv(buf.as_slice()).unwrap();
        assert_eq!(p.values(), q.values());
        assert_eq!(p.n_cells(), q.n_cells());
        assert!((p.horizon() - q.horizon()).abs() < 1e-15);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x1,x2\n"));
    }

    #[test]
    fn reports_line_of_malformed_row() {
        let text = "t,x1\n0,0\n0.5,abc\n1,1\n";
        match read_path_csv(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let ragged = "t,x1\n0,0\n0.5,1,2\n";
        assert!(matches!(read_path_csv(ragged.as_bytes()), Err(Error::Parse { line: 3, .. })));
        let skewed = "t,x1\n0,0\n0.7,1\n1,1\n";
        assert!(matches!(read_path_csv(skewed.as_bytes()), Err(Error::Parse { line: 3, .. })));
    }
}
