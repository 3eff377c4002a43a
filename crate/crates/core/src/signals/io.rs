//! Two on-disk forms of a uniformly sampled signal.
//!
//! Text: one `t value` pair per line, separated by whitespace or a comma;
//! blank lines and lines starting with `#` are ignored.
//!
//! Binary, little-endian: the 8-byte magic `GSRPSIG1`, a `u64` sample count,
//! an `f64` step, then the samples as `f64`.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::GridSpec;
use crate::numerics::Signal;
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"GSRPSIG1";
const HEADER: usize = 8 + 8 + 8;

#[derive(Debug, Clone, PartialEq)]
pub struct StoredSignal {
    /// Time of the first sample; the binary form does not record it.
    pub start: Option<f64>,
    pub step: f64,
    pub values: Signal,
}

impl StoredSignal {
    /// Checks that the samples fit `grid` and returns them.
    pub fn on_grid(self, grid: &GridSpec) -> Result<Signal> {
        let fail = |m: String| Err(Error::SignalFormat(m));
        if self.values.len() != grid.len() {
            return fail(format!("{} samples, grid has {}", self.values.len(), grid.len()));
        }
        if (self.step - grid.step()).abs() > 1e-9 * grid.step() {
            return fail(format!(
                "step {} differs from grid step {}",
                self.step,
                grid.step()
            ));
        }
        if let Some(t0) = self.start {
            if (t0 - grid.t_min).abs() > 1e-6 * grid.step() {
                return fail(format!("starts at {t0}, grid starts at {}", grid.t_min));
            }
        }
        Ok(self.values)
    }
}

pub fn write_signal_text(path: &Path, grid: &GridSpec, x: &Signal) -> Result<()> {
    if x.len() != grid.len() {
        return Err(Error::GridMismatch {
            expected: grid.len(),
            got: x.len(),
        });
    }
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# t value")?;
    for (i, v) in x.iter().enumerate() {
        writeln!(out, "{:e} {:e}", grid.time(i), v)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_signal_text(path: &Path) -> Result<StoredSignal> {
    let text = fs::read_to_string(path)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parse = |f: &str| {
            f.parse::<f64>()
                .map_err(|e| Error::SignalFormat(format!("line {}: `{f}`: {e}", n + 1)))
        };
        match fields.as_slice() {
            [t, v] => {
                times.push(parse(t)?);
                values.push(parse(v)?);
            }
            _ => {
                return Err(Error::SignalFormat(format!(
                    "line {}: expected two columns, found {}",
                    n + 1,
                    fields.len()
                )))
            }
        }
    }
    if times.len() < 2 {
        return Err(Error::SignalFormat("need at least two samples".into()));
    }
    let step = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if step.is_nan() || step <= 0.0 {
        return Err(Error::SignalFormat("times must increase".into()));
    }
    for (i, t) in times.iter().enumerate() {
        if (t - (times[0] + i as f64 * step)).abs() > 1e-6 * step {
            return Err(Error::SignalFormat(format!(
                "sample {i} at {t} is off the uniform grid"
            )));
        }
    }
    Ok(StoredSignal {
        start: Some(times[0]),
        step,
        values: Signal::from_vec(values),
    })
}

pub fn write_signal_binary(path: &Path, step: f64, x: &Signal) -> Result<()> {
    let mut bytes = Vec::with_capacity(HEADER + 8 * x.len());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(x.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&step.to_le_bytes());
    for v in x.iter() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_signal_binary(path: &Path) -> Result<StoredSignal> {
    let bytes = fs::read(path)?;
    if bytes.len() < HEADER || &bytes[..8] != MAGIC {
        return Err(Error::SignalFormat("missing GSRPSIG1 header".into()));
    }
    let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().expect("8-byte slice") };
    let len = u64::from_le_bytes(word(8)) as usize;
    let step = f64::from_le_bytes(word(16));
    if bytes.len() - HEADER != 8 * len {
        return Err(Error::SignalFormat(format!(
            "header promises {len} samples, file holds {} bytes of data",
            bytes.len() - HEADER
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::SignalFormat(format!("step {step} must be positive")));
    }
    let values = Signal::from_iterator(len, (0..len).map(|i| f64::from_le_bytes(word(HEADER + 8 * i))));
    Ok(StoredSignal {
        start: None,
        step,
        values,
    })
}

/// Reads either form, telling them apart by the magic bytes.
pub fn read_signal(path: &Path) -> Result<StoredSignal> {
    let mut head = [0u8; 8];
    let is_binary = {
        use std::io::Read;
        let mut f = fs::File::open(path)?;
        f.read(&mut head)? == 8 && &head == MAGIC
    };
    if is_binary {
        read_signal_binary(path)
    } else {
        read_signal_text(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(-1.0, 1.0, 8, 1.0).unwrap()
    }

    fn ramp(g: &GridSpec) -> Signal {
        Signal::from_fn(g.len(), |i, _| (i as f64 * 0.37).sin() / 3.0)
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        let g = grid();
        let x = ramp(&g);
        write_signal_binary(&p, g.step(), &x).unwrap();
        let back = read_signal(&p).unwrap();
        assert_eq!(back.values, x);
        assert_eq!(back.step, g.step());
        assert_eq!(back.on_grid(&g).unwrap(), x);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        let g = grid();
        let x = ramp(&g);
        write_signal_text(&p, &g, &x).unwrap();
        let back = read_signal(&p).unwrap();
        assert_eq!(back.values, x);
        assert_eq!(back.on_grid(&g).unwrap(), x);
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        let g = grid();
        write_signal_binary(&p, g.step(), &ramp(&g)).unwrap();
        let mut bytes = fs::read(&p).unwrap();
        bytes.truncate(bytes.len() - 3);
        fs::write(&p, bytes).unwrap();
        assert!(matches!(read_signal_binary(&p), Err(Error::SignalFormat(_))));
    }

    #[test]
    fn malformed_text_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        fs::write(&p, "0 1\n0.5 2\n1.7 3\n").unwrap();
        assert!(read_signal_text(&p).is_err());
        fs::write(&p, "0 1 2\n").unwrap();
        assert!(read_signal_text(&p).is_err());
        fs::write(&p, "# comment\n0, 1\n0.5, x\n").unwrap();
        assert!(read_signal_text(&p).is_err());
    }

    #[test]
    fn wrong_grid_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        let g = grid();
        write_signal_binary(&p, g.step() * 2.0, &ramp(&g)).unwrap();
        assert!(read_signal(&p).unwrap().on_grid(&g).is_err());
    }
}
