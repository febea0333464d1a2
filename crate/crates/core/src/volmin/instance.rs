use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::RealMatrix;

/// Data matrix `A ≈ XS` to be explained by `K` simplex vertices.
#[derive(Debug, Clone)]
pub struct VolMinInstance {
    pub a: RealMatrix,
    pub k: usize,
    /// Smoothing level of `g_ε`.
    pub eps: f64,
}

/// Ground truth of a synthetic instance.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub x: RealMatrix,
    pub s: RealMatrix,
    pub gamma: f64,
    /// `f64::INFINITY` for noiseless data.
    pub snr_db: f64,
}

pub const DEFAULT_EPS: f64 = 1e-2;
const MAGIC: &[u8; 4] = b"VMIN";
const MAX_DRAWS: usize = 1_000_000;

impl VolMinInstance {
    pub fn new(a: RealMatrix, k: usize, eps: f64) -> Result<Self> {
        let (n, l) = a.shape();
        if k == 0 || n < k || l == 0 {
            return Err(Error::invalid(format!("need N >= K >= 1 and L >= 1, got N={n}, K={k}, L={l}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid("smoothing eps must be positive"));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("data must be finite"));
        }
        Ok(Self { a, k, eps })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn l(&self) -> usize {
        self.a.ncols()
    }

    /// Reads a data matrix from CSV (one row of `A` per line) or from the
    /// binary `VMIN` layout, chosen by content.
    pub fn read_data(path: &Path) -> Result<RealMatrix> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.starts_with(MAGIC) {
            decode_binary(&bytes)
        } else {
            decode_csv(&bytes)
        }
    }

    pub fn write_binary(a: &RealMatrix, path: &Path) -> Result<()> {
        std::fs::File::create(path)?.write_all(&encode_binary(a)?)?;
        Ok(())
    }

    pub fn write_csv(a: &RealMatrix, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
        for row in a.row_iter() {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `"VMIN"`, `u32` N, `u32` L, then `N·L` little-endian `f64` in row-major order.
pub fn encode_binary(a: &RealMatrix) -> Result<Vec<u8>> {
    let (n, l) = a.shape();
    let n32 = u32::try_from(n).map_err(|_| Error::invalid("too many rows for the binary format"))?;
    let l32 = u32::try_from(l).map_err(|_| Error::invalid("too many columns for the binary format"))?;
    let mut out = Vec::with_capacity(12 + 8 * n * l);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&n32.to_le_bytes());
    out.extend_from_slice(&l32.to_le_bytes());
    for row in a.row_iter() {
        for v in row.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_binary(bytes: &[u8]) -> Result<RealMatrix> {
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(Error::invalid("not a VMIN file"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
    let (n, l) = (word(4), word(8));
    let body = &bytes[12..];
    if body.len() != 8 * n * l {
        return Err(Error::invalid(format!("VMIN body has {} bytes, expected {}", body.len(), 8 * n * l)));
    }
    let vals: Vec<f64> = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok(RealMatrix::from_row_slice(n, l, &vals))
}

fn decode_csv(bytes: &[u8]) -> Result<RealMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(bytes);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::invalid(format!("bad number {f:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let l = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || l == 0 || rows.iter().any(|r| r.len() != l) {
        return Err(Error::invalid("CSV data must be a non-empty rectangular matrix"));
    }
    Ok(RealMatrix::from_fn(rows.len(), l, |i, j| rows[i][j]))
}

/// Uniform draw from the probability simplex with every entry at most `gamma`.
fn capped_simplex_column<R: Rng + ?Sized>(k: usize, gamma: f64, rng: &mut R) -> Result<Vec<f64>> {
    for _ in 0..MAX_DRAWS {
        let e: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = e.iter().sum();
        let s: Vec<f64> = e.iter().map(|v| v / total).collect();
        if s.iter().all(|&v| v <= gamma) {
            return Ok(s);
        }
    }
    Err(Error::invalid(format!("gamma = {gamma} rejected {MAX_DRAWS} draws; choose a larger cap")))
}

/// Synthetic data: `X* ~ U[0,1]`, columns of `S*` uniform on the simplex
/// and capped at `gamma`, plus white Gaussian noise at `snr_db`
/// (`E‖Xs‖² / E‖v‖²`, estimated by sample averages). `snr_db = ∞` gives
/// noiseless data.
pub fn gen_data(n: usize, k: usize, l: usize, gamma: f64, snr_db: f64, seed: u64) -> Result<(VolMinInstance, GroundTruth)> {
    if k == 0 || !(gamma > 1.0 / k as f64 && gamma <= 1.0) {
        return Err(Error::invalid(format!("gamma must lie in (1/K, 1], got {gamma}")));
    }
    if snr_db.is_nan() {
        return Err(Error::invalid("SNR must be a number or infinity"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = RealMatrix::from_fn(n, k, |_, _| rng.random::<f64>());
    let mut s = RealMatrix::zeros(k, l);
    for j in 0..l {
        let col = capped_simplex_column(k, gamma, &mut rng)?;
        s.column_mut(j).copy_from_slice(&col);
    }
    let mut a = &x * &s;
    if snr_db.is_finite() {
        let signal = a.norm_squared() / l as f64;
        let noise_var = signal / (n as f64 * 10f64.powf(snr_db / 10.0));
        let sd = noise_var.sqrt();
        a.iter_mut().for_each(|v| *v += sd * Distribution::<f64>::sample(&StandardNormal, &mut rng));
    }
    let inst = VolMinInstance::new(a, k, DEFAULT_EPS)?;
    Ok((inst, GroundTruth { x, s, gamma, snr_db }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_coefficients_respect_simplex_and_cap() {
        let (inst, gt) = gen_data(6, 3, 500, 0.8, f64::INFINITY, 1).unwrap();
        for col in gt.s.column_iter() {
            assert!((col.sum() - 1.0).abs() < 1e-12);
            assert!(col.iter().all(|&v| (0.0..=0.8).contains(&v)));
        }
        assert_eq!(inst.a, &gt.x * &gt.s);
    }

    #[test]
    fn empirical_snr_is_close_to_requested() {
        let (inst, gt) = gen_data(10, 3, 2000, 0.8, 20.0, 2).unwrap();
        let clean = &gt.x * &gt.s;
        let noise = &inst.a - &clean;
        let snr = 10.0 * (clean.norm_squared() / noise.norm_squared()).log10();
        assert!((snr - 20.0).abs() < 0.5, "{snr}");
    }

    #[test]
    fn impossible_cap_is_rejected() {
        assert!(gen_data(4, 3, 10, 0.3, f64::INFINITY, 0).is_err());
        assert!(gen_data(4, 3, 1, 0.3334, f64::INFINITY, 0).is_err());
    }

    #[test]
    fn binary_and_csv_round_trip() {
        let (inst, _) = gen_data(4, 2, 7, 0.9, 30.0, 3).unwrap();
        let dir = std::env::temp_dir().join(format!("vmin-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let bin = dir.join("a.vmin");
        VolMinInstance::write_binary(&inst.a, &bin).unwrap();
        assert_eq!(VolMinInstance::read_data(&bin).unwrap(), inst.a);
        let bytes = std::fs::read(&bin).unwrap();
        assert_eq!(&bytes[..4], b"VMIN");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 4);
        assert_eq!(f64::from_le_bytes(bytes[12..20].try_into().unwrap()), inst.a[(0, 0)]);
        assert_eq!(f64::from_le_bytes(bytes[20..28].try_into().unwrap()), inst.a[(0, 1)]);
        let csv = dir.join("a.csv");
        VolMinInstance::write_csv(&inst.a, &csv).unwrap();
        assert_eq!(VolMinInstance::read_data(&csv).unwrap(), inst.a);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let a = RealMatrix::from_element(2, 2, 1.0);
        let bytes = encode_binary(&a).unwrap();
        assert!(decode_binary(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn rank_larger_than_rows_is_rejected() {
        assert!(VolMinInstance::new(RealMatrix::zeros(2, 5), 3, 1e-2).is_err());
    }
}
