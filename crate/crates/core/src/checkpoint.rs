//! Versioned little-endian binary container for trained models.
//!
//! Layout: `b"CFNCKPT\0"`, `u32` version, `u8` payload kind, then the payload.
//! Counts are `u64`, reals are `f64` bit patterns, so a load/save round trip is exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::als::MFModel;
use crate::error::{CfnError, Result};
use crate::net::{AutoencoderModel, ModelSpec, Params, Transfer};

const MAGIC: &[u8; 8] = b"CFNCKPT\0";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum PayloadKind {
    Autoencoder = 1,
    Factorization = 2,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoint {
    Autoencoder(AutoencoderModel),
    Factorization(MFModel),
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn block(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        for &x in v {
            self.f64(x);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| CfnError::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| CfnError::Checkpoint("count overflows usize".into()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn block(&mut self) -> Result<Vec<f64>> {
        let n = self.usize()?;
        if n > (self.buf.len() - self.pos) / 8 {
            return Err(CfnError::Checkpoint(format!("block of {n} values exceeds file size")));
        }
        (0..n).map(|_| self.f64()).collect()
    }
    fn transfer(&mut self) -> Result<Transfer> {
        let c = self.u8()?;
        Transfer::from_code(c).ok_or_else(|| CfnError::Checkpoint(format!("unknown transfer code {c}")))
    }
}

pub fn encode(ckpt: &Checkpoint) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(VERSION);
    match ckpt {
        Checkpoint::Autoencoder(m) => {
            w.u8(PayloadKind::Autoencoder as u8);
            let s = m.spec();
            w.u64(s.input_dim as u64);
            w.u64(s.bottleneck as u64);
            w.u64(s.side_dim as u64);
            w.u8(s.hidden_transfer.code());
            w.u8(s.output_transfer.code());
            w.u64(m.init_seed());
            w.u64(m.epochs_completed() as u64);
            for b in m.params().slices() {
                w.block(b);
            }
        }
        Checkpoint::Factorization(m) => {
            w.u8(PayloadKind::Factorization as u8);
            w.u64(m.n_rows as u64);
            w.u64(m.n_cols as u64);
            w.u64(m.rank as u64);
            w.f64(m.lambda);
            w.block(&m.u);
            w.block(&m.v);
        }
    }
    w.0
}

pub fn decode(buf: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(CfnError::Checkpoint("not a checkpoint file (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CfnError::Checkpoint(format!("unsupported version {version}")));
    }
    let kind = r.u8()?;
    let ckpt = match kind {
        k if k == PayloadKind::Autoencoder as u8 => {
            let input_dim = r.usize()?;
            let bottleneck = r.usize()?;
            let side_dim = r.usize()?;
            let hidden = r.transfer()?;
            let output = r.transfer()?;
            let seed = r.u64()?;
            let epochs = r.usize()?;
            let params = Params {
                encoder: r.block()?,
                encoder_bias: r.block()?,
                decoder: r.block()?,
                decoder_bias: r.block()?,
            };
            let spec = ModelSpec::new(input_dim, bottleneck, side_dim).with_transfers(hidden, output);
            Checkpoint::Autoencoder(AutoencoderModel::from_parts(spec, params, seed, epochs)?)
        }
        k if k == PayloadKind::Factorization as u8 => {
            let n_rows = r.usize()?;
            let n_cols = r.usize()?;
            let rank = r.usize()?;
            let lambda = r.f64()?;
            let u = r.block()?;
            let v = r.block()?;
            if u.len() != n_rows * rank || v.len() != n_cols * rank {
                return Err(CfnError::Checkpoint("factor sizes do not match dimensions".into()));
            }
            Checkpoint::Factorization(MFModel {
                u,
                v,
                n_rows,
                n_cols,
                rank,
                lambda,
            })
        }
        other => return Err(CfnError::Checkpoint(format!("unknown payload kind {other}"))),
    };
    if r.pos != buf.len() {
        return Err(CfnError::Checkpoint(format!("{} trailing bytes", buf.len() - r.pos)));
    }
    Ok(ckpt)
}

pub fn save(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| CfnError::io(path, e))?;
    f.write_all(&encode(ckpt)).map_err(|e| CfnError::io(path, e))?;
    f.sync_all().map_err(|e| CfnError::io(path, e))
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let buf = fs::read(path).map_err(|e| CfnError::io(path, e))?;
    decode(&buf)
}

pub fn save_model(path: &Path, model: &AutoencoderModel) -> Result<()> {
    save(path, &Checkpoint::Autoencoder(model.clone()))
}

pub fn load_model(path: &Path) -> Result<AutoencoderModel> {
    match load(path)? {
        Checkpoint::Autoencoder(m) => Ok(m),
        Checkpoint::Factorization(_) => Err(CfnError::Checkpoint(format!(
            "{} holds a factorization, not an autoencoder",
            path.display()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autoencoder_round_trip_is_exact() {
        let spec = ModelSpec::new(9, 4, 2).with_transfers(Transfer::Tanh, Transfer::Tanh);
        let mut m = AutoencoderModel::init(spec, 77).unwrap();
        m.params_mut().decoder_bias[3] = -0.1 / 3.0;
        let bytes = encode(&Checkpoint::Autoencoder(m.clone()));
        assert_eq!(decode(&bytes).unwrap(), Checkpoint::Autoencoder(m.clone()));
        assert_eq!(encode(&decode(&bytes).unwrap()), bytes);

        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.ckpt");
        save_model(&p, &m).unwrap();
        assert_eq!(load_model(&p).unwrap(), m);
    }

    #[test]
    fn factorization_round_trip() {
        let mut m = MFModel::zeros(3, 2, 2, 0.05);
        m.u = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        m.v = vec![1.0, -1.0, 1e-300, f64::MIN_POSITIVE];
        let c = Checkpoint::Factorization(m);
        assert_eq!(decode(&encode(&c)).unwrap(), c);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let m = AutoencoderModel::init(ModelSpec::new(5, 2, 0), 1).unwrap();
        let bytes = encode(&Checkpoint::Autoencoder(m));
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode(b"garbage!garbage!").is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode(&extra).is_err());
        let mut bad_kind = bytes;
        bad_kind[12] = 9;
        assert!(decode(&bad_kind).is_err());
    }
}
