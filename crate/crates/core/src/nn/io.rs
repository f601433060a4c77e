//! Versioned binary model files.
//!
//! Layout (all integers and floats little-endian):
//!
//! | field            | type                                  |
//! |------------------|---------------------------------------|
//! | magic            | 8 bytes `AEMUMLP\0`                   |
//! | version          | u32 (currently 1)                     |
//! | layer count      | u32 (`n`, number of dims)             |
//! | dims             | `n` × u64                             |
//! | output act.      | u8 (0 linear, 1 ReLU)                 |
//! | input stats      | `dims[0]` × (min f64, max f64)        |
//! | output stats     | `dims[n−1]` × (min f64, max f64)      |
//! | per layer `l`    | weights `dims[l+1]×dims[l]` row-major f64, then bias `dims[l+1]` f64 |

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{Activation, MinMaxStats, Mlp};
use crate::{Error, Result};

pub const MODEL_MAGIC: [u8; 8] = *b"AEMUMLP\0";
pub const MODEL_VERSION: u32 = 1;

const MAX_DIM: u64 = 1 << 24;

pub fn write_model<W: Write>(model: &Mlp, mut w: W) -> std::io::Result<()> {
    w.write_all(&MODEL_MAGIC)?;
    w.write_all(&MODEL_VERSION.to_le_bytes())?;
    w.write_all(&(model.layer_dims.len() as u32).to_le_bytes())?;
    for &d in &model.layer_dims {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    let act = match model.output_activation {
        Activation::Linear => 0u8,
        Activation::Relu => 1u8,
    };
    w.write_all(&[act])?;
    for stats in [&model.norm_in, &model.norm_out] {
        for (lo, hi) in stats.min.iter().zip(&stats.max) {
            w.write_all(&lo.to_le_bytes())?;
            w.write_all(&hi.to_le_bytes())?;
        }
    }
    for (wm, b) in model.weights.iter().zip(&model.biases) {
        for x in wm.iter() {
            w.write_all(&x.to_le_bytes())?;
        }
        for x in b.iter() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

struct Reader<'a, R> {
    inner: R,
    path: &'a Path,
}

impl<R: Read> Reader<'_, R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| self.fail(format!("truncated file: {e}")))?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn fail(&self, msg: impl Into<String>) -> Error {
        Error::Format {
            path: self.path.to_path_buf(),
            msg: msg.into(),
        }
    }
}

pub fn read_model<R: Read>(inner: R, path: &Path) -> Result<Mlp> {
    let mut r = Reader { inner, path };
    if r.bytes::<8>()? != MODEL_MAGIC {
        return Err(r.fail("not a model file (bad magic)"));
    }
    let version = r.u32()?;
    if version != MODEL_VERSION {
        return Err(r.fail(format!("unsupported model version {version}")));
    }
    let n = r.u32()? as usize;
    if !(2..=64).contains(&n) {
        return Err(r.fail(format!("implausible layer count {n}")));
    }
    let mut dims = Vec::with_capacity(n);
    for _ in 0..n {
        let d = r.u64()?;
        if d == 0 || d > MAX_DIM {
            return Err(r.fail(format!("implausible layer width {d}")));
        }
        dims.push(d as usize);
    }
    let output_activation = match r.bytes::<1>()?[0] {
        0 => Activation::Linear,
        1 => Activation::Relu,
        other => return Err(r.fail(format!("unknown activation code {other}"))),
    };
    let read_stats = |count: usize, r: &mut Reader<'_, R>| -> Result<MinMaxStats> {
        let mut s = MinMaxStats {
            min: Vec::with_capacity(count),
            max: Vec::with_capacity(count),
        };
        for _ in 0..count {
            s.min.push(r.f64()?);
            s.max.push(r.f64()?);
        }
        Ok(s)
    };
    let norm_in = read_stats(dims[0], &mut r)?;
    let norm_out = read_stats(dims[n - 1], &mut r)?;
    let mut weights = Vec::with_capacity(n - 1);
    let mut biases = Vec::with_capacity(n - 1);
    for l in 0..n - 1 {
        let (rows, cols) = (dims[l + 1], dims[l]);
        let mut w = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            w.push(r.f64()?);
        }
        weights.push(Array2::from_shape_vec((rows, cols), w).map_err(|e| r.fail(e.to_string()))?);
        let mut b = Vec::with_capacity(rows);
        for _ in 0..rows {
            b.push(r.f64()?);
        }
        biases.push(Array1::from(b));
    }
    let mut probe = [0u8; 1];
    if r.inner.read(&mut probe).map_err(|e| r.fail(e.to_string()))? != 0 {
        return Err(r.fail("trailing bytes after model payload"));
    }
    let model = Mlp {
        layer_dims: dims,
        weights,
        biases,
        output_activation,
        norm_in,
        norm_out,
    };
    model.validate().map_err(|e| r.fail(e.to_string()))?;
    Ok(model)
}

impl Mlp {
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        write_model(self, &mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        read_model(std::io::BufReader::new(file), path)
    }
}
