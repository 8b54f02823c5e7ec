//! Trajectory CSV files.
//!
//! Header for `n` agents in `k` dimensions with `m` targets:
//! `t`, then `x_a` (or `x_a_d` when `k > 1`), `u_a`, `mubar_a`, and with
//! marginals recorded `p_a_s` for `s = 1..m-1` (the last probability is
//! implied). Agents, coordinates and targets are 1-based. Floats use the
//! shortest decimal form that parses back to the same bits.

use std::io::{Read, Write};

use crate::controller::{Trajectory, TrajectoryRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvLayout {
    pub n_agents: usize,
    pub dim: usize,
    pub n_targets: usize,
    pub marginals: bool,
}

impl CsvLayout {
    fn vector_columns(&self, prefix: &str, out: &mut Vec<String>) {
        for a in 1..=self.n_agents {
            if self.dim == 1 {
                out.push(format!("{prefix}_{a}"));
            } else {
                out.extend((1..=self.dim).map(|d| format!("{prefix}_{a}_{d}")));
            }
        }
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        self.vector_columns("x", &mut h);
        self.vector_columns("u", &mut h);
        self.vector_columns("mubar", &mut h);
        if self.marginals {
            for a in 1..=self.n_agents {
                h.extend((1..self.n_targets).map(|s| format!("p_{a}_{s}")));
            }
        }
        h
    }

    fn width(&self) -> usize {
        1 + 3 * self.n_agents * self.dim
            + if self.marginals {
                self.n_agents * (self.n_targets - 1)
            } else {
                0
            }
    }
}

/// Shortest round-trip rendering of a float.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_trajectory<W: Write>(out: W, trajectory: &Trajectory, layout: &CsvLayout) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(layout.header())?;
    let mut row = Vec::with_capacity(layout.width());
    for r in &trajectory.records {
        row.clear();
        row.push(format_float(r.t));
        for block in [&r.positions, &r.controls, &r.expected_targets] {
            row.extend(block.iter().flatten().map(|&v| format_float(v)));
        }
        if layout.marginals {
            for p in &r.marginals {
                row.extend(p[..layout.n_targets - 1].iter().map(|&v| format_float(v)));
            }
        }
        if row.len() != layout.width() {
            return Err(Error::DimensionMismatch {
                expected: layout.width(),
                got: row.len(),
            });
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn split(values: &[f64], n: usize, k: usize) -> Vec<Vec<f64>> {
    values.chunks(k).take(n).map(<[f64]>::to_vec).collect()
}

/// Reads records written by [`write_trajectory`]. Marginal rows are rebuilt
/// with the implied last probability; without marginal columns they are empty.
pub fn read_trajectory<R: Read>(input: R, layout: &CsvLayout) -> Result<Vec<TrajectoryRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != layout.header() {
        return Err(Error::Parse {
            context: "trajectory csv".into(),
            message: format!("unexpected header {header:?}"),
        });
    }
    let (n, k, m) = (layout.n_agents, layout.dim, layout.n_targets);
    let block = n * k;
    let mut records = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let values = row
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    context: format!("trajectory csv row {}", line + 2),
                    message: format!("{s:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let marginals = if layout.marginals {
            values[1 + 3 * block..]
                .chunks(m - 1)
                .map(|p| {
                    let mut row = p.to_vec();
                    row.push(1.0 - p.iter().sum::<f64>());
                    row
                })
                .collect()
        } else {
            Vec::new()
        };
        records.push(TrajectoryRecord {
            t: values[0],
            positions: split(&values[1..], n, k),
            controls: split(&values[1 + block..], n, k),
            expected_targets: split(&values[1 + 2 * block..], n, k),
            marginals,
        });
    }
    Ok(records)
}
