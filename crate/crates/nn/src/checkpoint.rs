//! Versioned binary checkpoints.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic   "GFNN"
//! version u16 = 1
//! kind    u16 length + UTF-8 bytes
//! count   u32 number of tensors
//! shapes  per tensor: u8 rank, then rank × u32 dims
//! payload every tensor's values as f64, in order
//! ```

use crate::{NnError, Params};

pub const MAGIC: &[u8; 4] = b"GFNN";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub kind: String,
    pub shapes: Vec<Vec<usize>>,
    pub tensors: Vec<Vec<f64>>,
}

impl Checkpoint {
    pub fn from_params<P: Params>(kind: &str, params: &P) -> Self {
        Self {
            kind: kind.to_string(),
            shapes: params.shapes(),
            tensors: params.param_slices().iter().map(|s| s.to_vec()).collect(),
        }
    }

    /// Copies the stored tensors into `params`, which must have identical
    /// shapes.
    pub fn load_into<P: Params>(&self, params: &mut P) -> Result<(), NnError> {
        if params.shapes() != self.shapes {
            return Err(NnError::Checkpoint(format!(
                "shape mismatch: checkpoint {:?}, model {:?}",
                self.shapes,
                params.shapes()
            )));
        }
        for (dst, src) in params.param_slices_mut().into_iter().zip(&self.tensors) {
            dst.copy_from_slice(src);
        }
        Ok(())
    }
}

pub fn write_checkpoint<P: Params>(kind: &str, params: &P) -> Vec<u8> {
    let shapes = params.shapes();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(kind.len() as u16).to_le_bytes());
    out.extend_from_slice(kind.as_bytes());
    out.extend_from_slice(&(shapes.len() as u32).to_le_bytes());
    for shape in &shapes {
        out.push(shape.len() as u8);
        for &d in shape {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
    }
    for s in params.param_slices() {
        for v in s {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], NnError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| NnError::Checkpoint(format!("truncated {what}")))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self, what: &str) -> Result<u16, NnError> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self, what: &str) -> Result<u32, NnError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<Checkpoint, NnError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(NnError::Checkpoint("not a model checkpoint".into()));
    }
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(NnError::Checkpoint(format!("unsupported version {version}")));
    }
    let kind_len = r.u16("kind")? as usize;
    let kind = std::str::from_utf8(r.take(kind_len, "kind")?)
        .map_err(|_| NnError::Checkpoint("kind is not UTF-8".into()))?
        .to_string();
    let count = r.u32("tensor count")? as usize;
    let mut shapes = Vec::new();
    let mut total: usize = 0;
    for _ in 0..count {
        let rank = r.take(1, "rank")?[0] as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u32("shape")? as usize);
        }
        let len = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| NnError::Checkpoint("tensor too large".into()))?;
        total = total
            .checked_add(len)
            .ok_or_else(|| NnError::Checkpoint("tensor too large".into()))?;
        shapes.push(shape);
    }
    let remaining = bytes.len() - r.pos;
    if total.checked_mul(8) != Some(remaining) {
        return Err(NnError::Checkpoint(format!(
            "payload holds {remaining} bytes, shapes need {} values",
            total
        )));
    }
    let mut tensors = Vec::with_capacity(count);
    for shape in &shapes {
        let len: usize = shape.iter().product();
        let raw = r.take(len * 8, "payload")?;
        tensors.push(
            raw.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect(),
        );
    }
    Ok(Checkpoint { kind, shapes, tensors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Gru, Lstm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Gru::new(3, 4, &mut rng);
        let bytes = write_checkpoint("gru", &g);
        let ck = read_checkpoint(&bytes).unwrap();
        assert_eq!(ck.kind, "gru");
        let mut back = Gru::zeros(3, 4);
        ck.load_into(&mut back).unwrap();
        assert_eq!(back, g);
        assert_eq!(write_checkpoint("gru", &back), bytes);
    }

    #[test]
    fn rejects_bad_input() {
        let g = Gru::zeros(2, 2);
        let bytes = write_checkpoint("gru", &g);
        assert!(read_checkpoint(&bytes[..bytes.len() - 1]).is_err());
        assert!(read_checkpoint(b"NOPE").is_err());
        let mut lstm = Lstm::zeros(2, 2);
        assert!(read_checkpoint(&bytes).unwrap().load_into(&mut lstm).is_err());
        for cut in 0..bytes.len() {
            assert!(read_checkpoint(&bytes[..cut]).is_err());
        }
    }
}
