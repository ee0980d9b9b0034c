//! The `BAEW` weight-file format.
//!
//! All integers are little-endian `u32` unless noted.
//!
//! ```text
//! magic        4 bytes  "BAEW"
//! version      u32      1
//! variant      u8       0 = full, 1 = lite
//! config       sample_rate, fft_size, bins, erb_bands, phase_base_bins,
//!              kernel_time, mi_down_channels*, mi_up_channels*,
//!              mi_gru_groups, pr_proj_groups, pr_down_channels*,
//!              pr_down_groups*, pr_up_channels*, pr_gru_groups
//!              (* = u32 length followed by that many u32 values)
//! count        u32      number of tensors
//! tensor       name_len u32, name (UTF-8), dtype u8 (0 = f32),
//!              rank u32, dims (rank x u32), data (numel x f32 LE)
//! ```
//!
//! Tensors are written in the configuration's layer order. A file must hold
//! exactly the tensors the stored configuration requires.
//!
//! [`generate_test_weights`] fills every tensor from a ChaCha8 stream seeded
//! with `seed_from_u64(seed)`, taking one `next_u32` per element in file order
//! and mapping it to `((x >> 8) / 2^24) * 0.2 - 0.1`.

use std::collections::HashSet;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::WeightsError;
use crate::model::{ModelConfig, ModelWeights, Tensor, Variant};

pub const MAGIC: [u8; 4] = *b"BAEW";
pub const VERSION: u32 = 1;
const DTYPE_F32: u8 = 0;

type Result<T> = std::result::Result<T, WeightsError>;

pub fn save(path: impl AsRef<Path>, weights: &ModelWeights, config: &ModelConfig) -> Result<()> {
    let bytes = to_bytes(weights, config)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<(ModelWeights, ModelConfig)> {
    from_bytes(&std::fs::read(path)?)
}

pub fn to_bytes(weights: &ModelWeights, config: &ModelConfig) -> Result<Vec<u8>> {
    config
        .validate()
        .map_err(|e| WeightsError::Malformed(e.to_string()))?;
    weights.validate(config)?;
    let mut out = Vec::with_capacity(16 + 4 * weights.param_count());
    out.extend_from_slice(&MAGIC);
    put_u32(&mut out, VERSION);
    out.push(match config.variant {
        Variant::Full => 0,
        Variant::Lite => 1,
    });
    write_config(&mut out, config);
    let specs = config.tensor_specs();
    put_u32(&mut out, specs.len() as u32);
    for spec in specs {
        let t = weights.get(&spec.name).expect("validated");
        put_u32(&mut out, spec.name.len() as u32);
        out.extend_from_slice(spec.name.as_bytes());
        out.push(DTYPE_F32);
        put_u32(&mut out, t.dims().len() as u32);
        for &d in t.dims() {
            put_u32(&mut out, d as u32);
        }
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> Result<(ModelWeights, ModelConfig)> {
    let mut r = Reader { buf: bytes };
    let magic: [u8; 4] = r.take(4, "magic")?.try_into().unwrap();
    if magic != MAGIC {
        return Err(WeightsError::BadMagic(magic));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(WeightsError::UnsupportedVersion(version));
    }
    let config = read_config(&mut r)?;
    config
        .validate()
        .map_err(|e| WeightsError::Malformed(e.to_string()))?;

    let count = r.u32("tensor count")? as usize;
    let mut weights = ModelWeights::new();
    let mut seen = HashSet::new();
    for _ in 0..count {
        let name_len = r.u32("tensor name length")? as usize;
        let name = std::str::from_utf8(r.take(name_len, "tensor name")?)
            .map_err(|_| WeightsError::Malformed("tensor name is not UTF-8".into()))?
            .to_string();
        let dtype = r.u8("tensor dtype")?;
        if dtype != DTYPE_F32 {
            return Err(WeightsError::Malformed(format!("tensor `{name}` has unknown dtype {dtype}")));
        }
        let rank = r.u32("tensor rank")? as usize;
        if rank > 8 {
            return Err(WeightsError::Malformed(format!("tensor `{name}` has rank {rank}")));
        }
        let dims = (0..rank)
            .map(|_| r.u32("tensor dims").map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let numel = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&n| n <= r.buf.len() / 4)
            .ok_or(WeightsError::Truncated("tensor data"))?;
        let data = r
            .take(numel * 4, "tensor data")?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if !seen.insert(name.clone()) {
            return Err(WeightsError::DuplicateTensor(name));
        }
        weights.insert(name, Tensor::new(dims, data).expect("numel matches"));
    }
    if !r.buf.is_empty() {
        return Err(WeightsError::Malformed(format!("{} trailing bytes", r.buf.len())));
    }
    weights.validate(&config)?;
    Ok((weights, config))
}

/// Deterministic pseudo-random weights in `[-0.1, 0.1)`; see the module docs
/// for the exact generator.
pub fn generate_test_weights(config: &ModelConfig, seed: u64) -> ModelWeights {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = ModelWeights::new();
    for spec in config.tensor_specs() {
        let data = (0..spec.numel())
            .map(|_| ((rng.next_u32() >> 8) as f32 / (1u32 << 24) as f32) * 0.2 - 0.1)
            .collect();
        w.insert(spec.name, Tensor::new(spec.dims, data).expect("numel matches"));
    }
    w
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_list(out: &mut Vec<u8>, v: &[usize]) {
    put_u32(out, v.len() as u32);
    for &x in v {
        put_u32(out, x as u32);
    }
}

fn write_config(out: &mut Vec<u8>, c: &ModelConfig) {
    for v in [c.sample_rate as usize, c.fft_size, c.bins, c.erb_bands, c.phase_base_bins, c.kernel_time] {
        put_u32(out, v as u32);
    }
    put_list(out, &c.mi_down_channels);
    put_list(out, &c.mi_up_channels);
    put_u32(out, c.mi_gru_groups as u32);
    put_u32(out, c.pr_proj_groups as u32);
    put_list(out, &c.pr_down_channels);
    put_list(out, &c.pr_down_groups);
    put_list(out, &c.pr_up_channels);
    put_u32(out, c.pr_gru_groups as u32);
}

fn read_config(r: &mut Reader<'_>) -> Result<ModelConfig> {
    let variant = match r.u8("variant")? {
        0 => Variant::Full,
        1 => Variant::Lite,
        v => return Err(WeightsError::Malformed(format!("unknown variant flag {v}"))),
    };
    let mut c = ModelConfig::full().with_variant(variant);
    c.sample_rate = r.u32("config")?;
    c.fft_size = r.u32("config")? as usize;
    c.bins = r.u32("config")? as usize;
    c.erb_bands = r.u32("config")? as usize;
    c.phase_base_bins = r.u32("config")? as usize;
    c.kernel_time = r.u32("config")? as usize;
    c.mi_down_channels = r.list()?;
    c.mi_up_channels = r.list()?;
    c.mi_gru_groups = r.u32("config")? as usize;
    c.pr_proj_groups = r.u32("config")? as usize;
    c.pr_down_channels = r.list()?;
    c.pr_down_groups = r.list()?;
    c.pr_up_channels = r.list()?;
    c.pr_gru_groups = r.u32("config")? as usize;
    Ok(c)
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(WeightsError::Truncated(what));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self, what: &'static str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn list(&mut self) -> Result<Vec<usize>> {
        let n = self.u32("config list length")? as usize;
        if n > 64 {
            return Err(WeightsError::Malformed(format!("config list of length {n}")));
        }
        (0..n).map(|_| self.u32("config list").map(|v| v as usize)).collect()
    }
}
