//! Binary sidecar holding calibrated prior variances and the task model.
//!
//! Layout (all multi-byte fields little-endian):
//!
//! | offset | size    | field                                         |
//! |--------|---------|-----------------------------------------------|
//! | 0      | 4       | magic `DATM`                                  |
//! | 4      | 1       | version, currently 1                          |
//! | 5      | 1       | flags, bit 0 set when a task model follows    |
//! | 6      | 2       | reserved, zero                                |
//! | 8      | 4       | `n`, coefficient count (u32)                  |
//! | 12     | 4       | `K`, class count (u32), zero without a task   |
//! | 16     | 8n      | prior variances (f64)                         |
//! | ...    | 8n      | task weights (f64), only with a task          |
//! | ...    | 8Kn     | centroids, class-major (f64), only with a task|

use std::io::{Read, Write};

use super::{SemanticCodec, TaskModel};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"DATM";
pub const VERSION: u8 = 1;
const FLAG_TASK: u8 = 1;

pub fn write_sidecar<W: Write>(mut w: W, codec: &SemanticCodec) -> Result<()> {
    let n = codec.n();
    let task = codec.task();
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION, if task.is_some() { FLAG_TASK } else { 0 }, 0, 0])?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&(task.map_or(0, TaskModel::classes) as u32).to_le_bytes())?;
    write_f64s(&mut w, codec.prior_vars())?;
    if let Some(t) = task {
        write_f64s(&mut w, &t.weights)?;
        for c in &t.centroids {
            write_f64s(&mut w, c)?;
        }
    }
    Ok(())
}

pub fn read_sidecar<R: Read>(mut r: R) -> Result<SemanticCodec> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head).map_err(truncated)?;
    if &head[0..4] != MAGIC {
        return Err(Error::Format("bad sidecar magic".into()));
    }
    if head[4] != VERSION {
        return Err(Error::Format(format!(
            "unsupported sidecar version {}",
            head[4]
        )));
    }
    let flags = head[5];
    if flags & !FLAG_TASK != 0 || head[6] != 0 || head[7] != 0 {
        return Err(Error::Format("unknown sidecar flags".into()));
    }
    let n = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let classes = u32::from_le_bytes(head[12..16].try_into().unwrap()) as usize;
    let has_task = flags & FLAG_TASK != 0;
    if has_task != (classes > 0) {
        return Err(Error::Format("class count disagrees with task flag".into()));
    }
    let prior_vars = read_f64s(&mut r, n)?;
    let task = if has_task {
        let weights = read_f64s(&mut r, n)?;
        let centroids = (0..classes)
            .map(|_| read_f64s(&mut r, n))
            .collect::<Result<Vec<_>>>()?;
        Some(TaskModel { centroids, weights })
    } else {
        None
    };
    SemanticCodec::new(prior_vars, task).map_err(|e| Error::Format(e.to_string()))
}

fn write_f64s<W: Write>(w: &mut W, xs: &[f64]) -> Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut buf = [0u8; 8];
    (0..count)
        .map(|_| {
            r.read_exact(&mut buf).map_err(truncated)?;
            Ok(f64::from_le_bytes(buf))
        })
        .collect()
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("sidecar truncated".into())
    } else {
        Error::Io(e)
    }
}
