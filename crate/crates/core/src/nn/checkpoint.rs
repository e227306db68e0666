use std::fs;
use std::path::Path;

use super::mlp::{Head, Mlp};
use super::params::ParamVector;
use crate::error::{Error, Result};
use crate::Scalar;

pub const CHECKPOINT_MAGIC: &[u8; 7] = b"VIMARL1";

/// Header: magic, `u32` layer count, `u32` widths, `u8` scalar width; then
/// parameters in [`ParamVector`] order. All integers and floats little-endian.
pub fn encode<T: Scalar>(net: &Mlp<T>) -> Vec<u8> {
    let params = net.params();
    let mut out = Vec::with_capacity(16 + 4 * net.dims().len() + params.len() * T::WIDTH as usize);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&(net.dims().len() as u32).to_le_bytes());
    for &d in net.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.push(T::WIDTH);
    for &p in params.iter() {
        p.write_le(&mut out);
    }
    out
}

pub fn decode<T: Scalar>(bytes: &[u8], head: Head, path: &Path) -> Result<Mlp<T>> {
    let bad = |reason: &str| Error::Format { path: path.to_path_buf(), reason: reason.to_string() };
    let mut rest = bytes.strip_prefix(CHECKPOINT_MAGIC.as_slice()).ok_or_else(|| bad("bad magic"))?;
    let mut take = |n: usize| -> Result<&[u8]> {
        if rest.len() < n {
            return Err(bad("truncated"));
        }
        let (head, tail) = rest.split_at(n);
        rest = tail;
        Ok(head)
    };
    let read_u32 = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize;
    let n_dims = read_u32(take(4)?);
    if n_dims > 64 {
        return Err(bad("implausible layer count"));
    }
    let mut dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        dims.push(read_u32(take(4)?));
    }
    let width = take(1)?[0];
    if width != T::WIDTH {
        return Err(bad(&format!("scalar width {width}, expected {}", T::WIDTH)));
    }
    let mut net = Mlp::zeros(&dims, head).map_err(|e| bad(&e.to_string()))?;
    let w = width as usize;
    let body = take(net.param_count() * w)?;
    if !rest.is_empty() {
        return Err(bad("trailing bytes"));
    }
    let params: Vec<T> = body.chunks_exact(w).map(T::read_le).collect();
    net.set_params(&ParamVector(params))?;
    Ok(net)
}

pub fn write_checkpoint<T: Scalar>(path: &Path, net: &Mlp<T>) -> Result<()> {
    fs::write(path, encode(net))?;
    Ok(())
}

/// The head is not stored; callers know what each network is for.
pub fn read_checkpoint<T: Scalar>(path: &Path, head: Head) -> Result<Mlp<T>> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingArtifact(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    decode(&bytes, head, path)
}
