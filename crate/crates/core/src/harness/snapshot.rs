//! Trajectory snapshots: a one-line JSON header followed by a raw
//! little-endian f64 payload, one (time, channels×n values) block per sample.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{LatticeField, LatticeGrid};
use crate::solvers::{SolverMeta, SplitState, Trajectory};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub schema_version: u32,
    pub kind: String,
    pub meta: SolverMeta,
    pub seed: Option<u64>,
    pub samples: usize,
    pub channels: Vec<String>,
}

pub fn write_split_trajectory(path: &Path, traj: &Trajectory, seed: Option<u64>) -> Result<()> {
    let header = SnapshotHeader {
        schema_version: crate::harness::report::SCHEMA_VERSION,
        kind: "split".into(),
        meta: traj.meta.clone(),
        seed,
        samples: traj.times.len(),
        channels: vec!["u_plus".into(), "u_minus".into()],
    };
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer(&mut f, &header)?;
    f.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(8 * (1 + 2 * traj.meta.n) * traj.times.len());
    for (t, s) in traj.times.iter().zip(&traj.states) {
        buf.extend_from_slice(&t.to_le_bytes());
        for v in s.u_plus.values.iter().chain(&s.u_minus.values) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    f.write_all(&buf)?;
    Ok(())
}

pub fn read_split_trajectory(path: &Path) -> Result<(SnapshotHeader, Trajectory)> {
    let mut f = std::fs::File::open(path)?;
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes)?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::InvalidConfig("snapshot has no header line".into()))?;
    let header: SnapshotHeader = serde_json::from_slice(&bytes[..newline])?;
    if header.kind != "split" {
        return Err(Error::InvalidConfig(format!("snapshot kind {} is not split", header.kind)));
    }
    let n = header.meta.n;
    let grid = LatticeGrid::new(header.meta.h, n)?;
    let payload = &bytes[newline + 1..];
    let block = 8 * (1 + 2 * n);
    if payload.len() != block * header.samples {
        return Err(Error::InvalidConfig(format!(
            "snapshot payload has {} bytes, expected {}",
            payload.len(),
            block * header.samples
        )));
    }
    let mut times = Vec::with_capacity(header.samples);
    let mut states = Vec::with_capacity(header.samples);
    for s in 0..header.samples {
        let base = s * block;
        let rd = |k: usize| -> f64 {
            let o = base + 8 * k;
            f64::from_le_bytes(payload[o..o + 8].try_into().unwrap())
        };
        let t = rd(0);
        let up: Vec<f64> = (0..n).map(|i| rd(1 + i)).collect();
        let um: Vec<f64> = (0..n).map(|i| rd(1 + n + i)).collect();
        times.push(t);
        states.push(SplitState {
            u_plus: LatticeField::new(grid.clone(), up)?,
            u_minus: LatticeField::new(grid.clone(), um)?,
            time: t,
        });
    }
    Ok((
        header.clone(),
        Trajectory { times, states, meta: header.meta },
    ))
}
