//! The `TEN1` binary format and the CSV emitters.
//!
//! A `TEN1` file is a fixed little-endian header followed by the payload in
//! mode-1-fastest order, with no padding:
//!
//! ```text
//! "TEN1" | elem_code: u32 | order: u32 | dims: order x u64 | payload
//! ```
//!
//! Element code 1 stores `f64` values, code 2 stores a 0/1 byte per entry
//! (a sampling mask).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::completion::{SamplingMask, SolveTrace};
use crate::compression::CompressionReport;
use crate::error::{Error, Result};
use crate::rpca::RpcaTrace;
use crate::tensor::DenseTensor;
use crate::tsvd::MultiRank;

pub const MAGIC: &[u8; 4] = b"TEN1";
pub const CODE_REAL: u32 = 1;
pub const CODE_MASK: u32 = 2;

/// Contents of a `TEN1` file.
#[derive(Clone, Debug, PartialEq)]
pub enum TensorData {
    Real(DenseTensor),
    Mask(SamplingMask),
}

impl TensorData {
    pub fn dims(&self) -> &[usize] {
        match self {
            TensorData::Real(t) => t.dims(),
            TensorData::Mask(m) => m.dims(),
        }
    }
}

fn header(code: u32, dims: &[usize], payload: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * dims.len() + payload);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&code.to_le_bytes());
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    out
}

pub fn encode_tensor(t: &DenseTensor) -> Vec<u8> {
    let mut out = header(CODE_REAL, t.dims(), 8 * t.len());
    for x in t.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn encode_mask(m: &SamplingMask) -> Vec<u8> {
    let mut out = header(CODE_MASK, m.dims(), m.len());
    out.extend(m.observed().iter().map(|&b| b as u8));
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let remaining = self.bytes.len() - self.pos;
        if remaining < n {
            return Err(format_error(
                self.bytes.len(),
                format!("truncated {what}: need {n} bytes, {remaining} left"),
            ));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

fn format_error(offset: usize, reason: impl Into<String>) -> Error {
    Error::Format { offset, reason: reason.into() }
}

/// Parses a complete `TEN1` buffer. Any malformation, including bytes past
/// the payload, is a [`Error::Format`] carrying the offending byte offset.
pub fn decode(bytes: &[u8]) -> Result<TensorData> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(format_error(0, format!("bad magic {magic:?}")));
    }
    let code = r.u32("element code")?;
    let elem_size = match code {
        CODE_REAL => 8,
        CODE_MASK => 1,
        other => return Err(format_error(4, format!("unknown element code {other}"))),
    };
    let order = r.u32("order")? as usize;
    if order < 2 {
        return Err(format_error(8, format!("order {order} is below 2")));
    }
    let dims_len = order.checked_mul(8).filter(|&n| n <= bytes.len() - r.pos);
    if dims_len.is_none() {
        return Err(format_error(bytes.len(), format!("truncated header: {order} extents announced")));
    }
    let mut dims = Vec::with_capacity(order);
    let mut count: usize = 1;
    for m in 0..order {
        let offset = r.pos;
        let d = r.u64("extent")?;
        if d == 0 {
            return Err(format_error(offset, format!("extent of mode {} is zero", m + 1)));
        }
        let d = usize::try_from(d).map_err(|_| format_error(offset, format!("extent {d} too large")))?;
        count = count
            .checked_mul(d)
            .ok_or_else(|| format_error(offset, "element count overflows"))?;
        dims.push(d);
    }
    let payload_len = count
        .checked_mul(elem_size)
        .ok_or_else(|| format_error(r.pos, "payload size overflows"))?;
    let start = r.pos;
    let payload = r.take(payload_len, "payload")?;
    if r.pos != bytes.len() {
        return Err(format_error(r.pos, format!("{} trailing bytes after payload", bytes.len() - r.pos)));
    }
    match code {
        CODE_REAL => {
            let mut data = Vec::with_capacity(count);
            for (n, chunk) in payload.chunks_exact(8).enumerate() {
                let x = f64::from_le_bytes(chunk.try_into().unwrap());
                if !x.is_finite() {
                    return Err(format_error(start + 8 * n, format!("non-finite value {x}")));
                }
                data.push(x);
            }
            Ok(TensorData::Real(DenseTensor::new(dims, data)?))
        }
        _ => {
            let mut observed = Vec::with_capacity(count);
            for (n, &b) in payload.iter().enumerate() {
                match b {
                    0 => observed.push(false),
                    1 => observed.push(true),
                    other => return Err(format_error(start + n, format!("mask byte {other} is not 0 or 1"))),
                }
            }
            Ok(TensorData::Mask(SamplingMask::new(dims, observed)?))
        }
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

pub fn write_tensor(t: &DenseTensor, path: &Path) -> Result<()> {
    write_bytes(path, &encode_tensor(t))
}

pub fn write_mask(m: &SamplingMask, path: &Path) -> Result<()> {
    write_bytes(path, &encode_mask(m))
}

pub fn read_tensor(path: &Path) -> Result<TensorData> {
    decode(&fs::read(path).map_err(|e| io_error(path, e))?)
}

/// Reads a file that must hold real values.
pub fn read_real(path: &Path) -> Result<DenseTensor> {
    match read_tensor(path)? {
        TensorData::Real(t) => Ok(t),
        TensorData::Mask(_) => Err(Error::arg(format!("{} holds a mask, expected real values", path.display()))),
    }
}

/// Reads a file that must hold a mask.
pub fn read_mask(path: &Path) -> Result<SamplingMask> {
    match read_tensor(path)? {
        TensorData::Mask(m) => Ok(m),
        TensorData::Real(_) => Err(Error::arg(format!("{} holds real values, expected a mask", path.display()))),
    }
}

/// `method,k,ratio,rse_db`. The ratio is written as a decimal; an exact
/// reconstruction shows `-inf` in the last column.
pub fn compression_report_csv(reports: &[CompressionReport]) -> String {
    let mut s = String::from("method,k,ratio,rse_db\n");
    for r in reports {
        writeln!(s, "{},{},{},{}", r.method.label(), r.k, r.ratio_f64(), r.rse_db).unwrap();
    }
    s
}

/// `iter,residual,tnn,seconds`.
pub fn completion_trace_csv(trace: &SolveTrace) -> String {
    let mut s = String::from("iter,residual,tnn,seconds\n");
    for r in &trace.records {
        writeln!(s, "{},{},{},{}", r.iter, r.residual, r.objective, r.seconds).unwrap();
    }
    s
}

/// `iter,feasibility,tnn_L,l112_S,seconds`.
pub fn rpca_trace_csv(trace: &RpcaTrace) -> String {
    let mut s = String::from("iter,feasibility,tnn_L,l112_S,seconds\n");
    for r in &trace.records {
        writeln!(s, "{},{},{},{},{}", r.iter, r.feasibility, r.low_rank_norm, r.sparse_norm, r.seconds).unwrap();
    }
    s
}

/// `measure,index,value`: one `multi_rank` row per Fourier slice, then the
/// tubal rank and the TNN.
pub fn ranks_csv(multi: &MultiRank, tubal: usize, tnn: f64) -> String {
    let mut s = String::from("measure,index,value\n");
    for (k, r) in multi.ranks.iter().enumerate() {
        writeln!(s, "multi_rank,{k},{r}").unwrap();
    }
    writeln!(s, "tubal_rank,0,{tubal}").unwrap();
    writeln!(s, "tnn,0,{tnn}").unwrap();
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_bytes(path, text.as_bytes())
}
