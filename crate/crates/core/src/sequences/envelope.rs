use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Top/bottom counts and visibility against a swept parameter.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Envelope {
    pub sweep: Vec<f64>,
    /// Bright fraction with final phase 0.
    pub top: Vec<f64>,
    /// Bright fraction with final phase π (or the reference trace).
    pub bottom: Vec<f64>,
    pub visibility: Vec<f64>,
    pub shots: usize,
}

impl Envelope {
    pub fn new(sweep: Vec<f64>, top: Vec<f64>, bottom: Vec<f64>, shots: usize) -> Self {
        let visibility = visibility(&top, &bottom);
        Self {
            sweep,
            top,
            bottom,
            visibility,
            shots,
        }
    }

    pub fn len(&self) -> usize {
        self.sweep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sweep.is_empty()
    }

    pub const CSV_HEADER: &'static str = "sweep,top,bottom,visibility,shots";

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.sweep[i], self.top[i], self.bottom[i], self.visibility[i], self.shots
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }

    /// Parses the format written by [`Envelope::write_csv`]; the visibility
    /// column is taken as written.
    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        match lines.next() {
            Some(h) if h == Self::CSV_HEADER => {}
            _ => return Err(Error::Config("missing envelope csv header".into())),
        }
        let mut env = Envelope::default();
        for (n, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                return Err(Error::Config(format!("envelope csv line {}: expected 5 columns", n + 2)));
            }
            let num = |i: usize| -> Result<f64> {
                cols[i]
                    .parse()
                    .map_err(|_| Error::Config(format!("envelope csv line {}: bad number `{}`", n + 2, cols[i])))
            };
            env.sweep.push(num(0)?);
            env.top.push(num(1)?);
            env.bottom.push(num(2)?);
            env.visibility.push(num(3)?);
            env.shots = cols[4]
                .parse()
                .map_err(|_| Error::Config(format!("envelope csv line {}: bad shot count", n + 2)))?;
        }
        Ok(env)
    }
}

/// C = (c↓ − c↑) / max(c↓ − c↑); zero everywhere when the difference never
/// turns positive.
pub fn visibility(c_down: &[f64], c_up: &[f64]) -> Vec<f64> {
    let diff: Vec<f64> = c_down.iter().zip(c_up).map(|(d, u)| d - u).collect();
    let max = diff.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return vec![0.0; diff.len()];
    }
    diff.iter().map(|d| d / max).collect()
}
