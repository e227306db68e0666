use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Iterates of one solver run and their distances to a reference point.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub iterates: Vec<Vec<f64>>,
    /// `||z_t - z*||` when a reference was given, else `||z_t||`.
    pub norms: Vec<f64>,
}

impl Trajectory {
    pub fn new(iterates: Vec<Vec<f64>>, reference: Option<&[f64]>) -> Self {
        let norms = iterates
            .iter()
            .map(|z| match reference {
                Some(r) => distance(z, r),
                None => z.iter().map(|x| x * x).sum::<f64>().sqrt(),
            })
            .collect();
        Self { iterates, norms }
    }

    /// Recomputes norms relative to a known equilibrium `z*`.
    pub fn with_reference(self, reference: &[f64]) -> Self {
        Self::new(self.iterates, Some(reference))
    }

    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn last(&self) -> &[f64] {
        self.iterates.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_norm(&self) -> f64 {
        self.norms.last().copied().unwrap_or(f64::NAN)
    }

    /// CSV with header `step,norm,comp_0..comp_{d-1}`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let dim = self.iterates.first().map_or(0, Vec::len);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["step".to_string(), "norm".to_string()];
        header.extend((0..dim).map(|i| format!("comp_{i}")));
        w.write_record(&header)?;
        for (t, (z, n)) in self.iterates.iter().zip(&self.norms).enumerate() {
            let mut row = vec![t.to_string(), n.to_string()];
            row.extend(z.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut iterates = Vec::new();
        let mut norms = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Format { path: "<trajectory>".into(), reason: e.to_string() })
            };
            norms.push(parse(&rec[1])?);
            iterates.push(rec.iter().skip(2).map(parse).collect::<Result<Vec<_>>>()?);
        }
        Ok(Self { iterates, norms })
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
