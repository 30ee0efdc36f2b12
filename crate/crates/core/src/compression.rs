//! Complexity bits for a trained hypothesis: quantize its parameters, write
//! them in a canonical byte layout, compress, and count the payload.
//!
//! Artifact file layout, all integers little-endian:
//!
//! | bytes | field |
//! |---|---|
//! | 8 | magic `GENLABQ\0` |
//! | 1 | format version (1) |
//! | 1 | quantization bits |
//! | 4 | parameter count (u32) |
//! | 1 + k | codec id: length byte then ASCII |
//! | 4 | payload length (u32) |
//! | * | payload = codec(body) |
//!
//! The body is `min: f64 | step: f64 | count: u32 | bits: u8 | codes`, with
//! codes bit-packed least-significant bit first. The codebook lives in the
//! body, so it is charged to `C(h)`. Everything outside the payload (magic,
//! headers, codec id) together with the loader and the model architecture
//! is treated as known in advance and excluded from the count.

use std::io::{Read, Write};

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::bounds::{countable_hypothesis_bound, prior_bits_from_complexity, BoundReport, RiskSpec};
use crate::error::{domain, Error, Result};
use crate::linalg::min_norm_lstsq;
use crate::rng::stream;

pub const MAGIC: [u8; 8] = *b"GENLABQ\0";
pub const FORMAT_VERSION: u8 = 1;
pub const ALLOWED_BITS: [u8; 4] = [4, 8, 16, 32];
/// Byte classes never counted toward `C(h)`.
pub const EXCLUDED_CLASSES: [&str; 3] = ["codec-id", "loader", "architecture"];

/// Affine dequantization `w = min + code · step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Codebook {
    pub min: f64,
    pub step: f64,
    pub bits: u8,
}

impl Codebook {
    pub fn dequantize(&self, code: u32) -> f64 {
        self.min + f64::from(code) * self.step
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    pub codes: Vec<u32>,
    pub codebook: Codebook,
}

impl Quantized {
    pub fn dequantize(&self) -> Vec<f64> {
        self.codes.iter().map(|&c| self.codebook.dequantize(c)).collect()
    }
}

/// Uniform quantization over `[min, max]` with `2^bits` levels. A constant
/// vector gets step 0 and all codes 0.
pub fn quantize(coefficients: &[f64], bits: u8) -> Result<Quantized> {
    if !ALLOWED_BITS.contains(&bits) {
        return domain(format!("quantization bits must be one of {ALLOWED_BITS:?}, got {bits}"));
    }
    if coefficients.iter().any(|c| !c.is_finite()) {
        return domain("cannot quantize non-finite coefficients");
    }
    if coefficients.is_empty() {
        return Ok(Quantized { codes: Vec::new(), codebook: Codebook { min: 0.0, step: 0.0, bits } });
    }
    let (min, max) =
        coefficients.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    let top = ((1u64 << bits) - 1) as f64;
    let step = if max > min { (max - min) / top } else { 0.0 };
    let codes = coefficients
        .iter()
        .map(|&c| if step == 0.0 { 0 } else { ((c - min) / step).round().clamp(0.0, top) as u32 })
        .collect();
    Ok(Quantized { codes, codebook: Codebook { min, step, bits } })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Codec {
    /// Raw DEFLATE at level 9.
    Deflate,
    Store,
}

impl Codec {
    pub fn id(self) -> &'static str {
        match self {
            Self::Deflate => "deflate",
            Self::Store => "store",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "deflate" => Ok(Self::Deflate),
            "store" => Ok(Self::Store),
            other => Err(Error::UnknownCodec(other.to_string())),
        }
    }

    fn encode(self, body: &[u8]) -> Vec<u8> {
        match self {
            Self::Store => body.to_vec(),
            Self::Deflate => {
                let mut enc = DeflateEncoder::new(Vec::new(), Compression::best());
                enc.write_all(body).expect("writing to a Vec cannot fail");
                enc.finish().expect("writing to a Vec cannot fail")
            }
        }
    }

    fn decode(self, payload: &[u8]) -> Result<Vec<u8>> {
        match self {
            Self::Store => Ok(payload.to_vec()),
            Self::Deflate => {
                let mut out = Vec::new();
                DeflateDecoder::new(payload)
                    .read_to_end(&mut out)
                    .map_err(|e| Error::Format(format!("deflate stream: {e}")))?;
                Ok(out)
            }
        }
    }
}

fn canonical_body(q: &Quantized) -> Vec<u8> {
    let bits = q.codebook.bits as usize;
    let mut out = Vec::with_capacity(21 + (q.codes.len() * bits).div_ceil(8));
    out.extend_from_slice(&q.codebook.min.to_le_bytes());
    out.extend_from_slice(&q.codebook.step.to_le_bytes());
    out.extend_from_slice(&(q.codes.len() as u32).to_le_bytes());
    out.push(q.codebook.bits);
    let mut acc: u64 = 0;
    let mut filled = 0;
    for &c in &q.codes {
        acc |= u64::from(c) << filled;
        filled += bits;
        while filled >= 8 {
            out.push(acc as u8);
            acc >>= 8;
            filled -= 8;
        }
    }
    if filled > 0 {
        out.push(acc as u8);
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.at.checked_add(k).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.at..end];
                self.at = end;
                Ok(s)
            }
            None => Err(Error::Format(format!("truncated while reading {what}"))),
        }
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

fn parse_body(body: &[u8]) -> Result<Quantized> {
    let mut c = Cursor { bytes: body, at: 0 };
    let min = c.f64("codebook min")?;
    let step = c.f64("codebook step")?;
    let count = c.u32("code count")? as usize;
    let bits = c.u8("code width")?;
    if !ALLOWED_BITS.contains(&bits) {
        return Err(Error::Format(format!("code width {bits}")));
    }
    let packed = c.take((count * bits as usize).div_ceil(8), "codes")?;
    if c.at != body.len() {
        return Err(Error::Format("trailing bytes after codes".into()));
    }
    let mask = (1u64 << bits) - 1;
    let mut codes = Vec::with_capacity(count);
    let mut acc: u64 = 0;
    let mut filled = 0;
    let mut bytes = packed.iter();
    for _ in 0..count {
        while filled < bits as usize {
            acc |= u64::from(*bytes.next().expect("length checked")) << filled;
            filled += 8;
        }
        codes.push((acc & mask) as u32);
        acc >>= bits;
        filled -= bits as usize;
    }
    Ok(Quantized { codes, codebook: Codebook { min, step, bits } })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedArtifact {
    pub payload: Vec<u8>,
    /// `8 · payload.len()`.
    pub bits: u64,
    pub quantization_bits: u8,
    pub parameter_count: u32,
    pub codec_id: String,
    /// Size of the canonical body before the codec.
    pub raw_bytes: usize,
    pub excluded_byte_classes: Vec<String>,
}

impl CompressedArtifact {
    pub fn decompress(&self) -> Result<Quantized> {
        let body = Codec::from_id(&self.codec_id)?.decode(&self.payload)?;
        let q = parse_body(&body)?;
        if q.codebook.bits != self.quantization_bits || q.codes.len() != self.parameter_count as usize {
            return Err(Error::Format("header disagrees with payload".into()));
        }
        Ok(q)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(19 + self.codec_id.len() + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(FORMAT_VERSION);
        out.push(self.quantization_bits);
        out.extend_from_slice(&self.parameter_count.to_le_bytes());
        out.push(self.codec_id.len() as u8);
        out.extend_from_slice(self.codec_id.as_bytes());
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut c = Cursor { bytes, at: 0 };
        if c.take(8, "magic")? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = c.u8("version")?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let quantization_bits = c.u8("quantization bits")?;
        let parameter_count = c.u32("parameter count")?;
        let id_len = c.u8("codec id length")? as usize;
        let codec_id = std::str::from_utf8(c.take(id_len, "codec id")?)
            .map_err(|_| Error::Format("codec id is not ASCII".into()))?
            .to_string();
        Codec::from_id(&codec_id)?;
        let len = c.u32("payload length")? as usize;
        let payload = c.take(len, "payload")?.to_vec();
        if c.at != bytes.len() {
            return Err(Error::Format("trailing bytes after payload".into()));
        }
        let raw_bytes = Codec::from_id(&codec_id)?.decode(&payload)?.len();
        Ok(Self {
            bits: 8 * payload.len() as u64,
            payload,
            quantization_bits,
            parameter_count,
            codec_id,
            raw_bytes,
            excluded_byte_classes: EXCLUDED_CLASSES.iter().map(|s| s.to_string()).collect(),
        })
    }
}

pub fn serialize_and_compress(quantized: &Quantized, codec_id: &str) -> Result<CompressedArtifact> {
    let codec = Codec::from_id(codec_id)?;
    let body = canonical_body(quantized);
    let payload = codec.encode(&body);
    Ok(CompressedArtifact {
        bits: 8 * payload.len() as u64,
        payload,
        quantization_bits: quantized.codebook.bits,
        parameter_count: quantized.codes.len() as u32,
        codec_id: codec.id().to_string(),
        raw_bytes: body.len(),
        excluded_byte_classes: EXCLUDED_CLASSES.iter().map(|s| s.to_string()).collect(),
    })
}

/// A model that can be rebuilt from a flat parameter vector.
pub trait CompressibleHypothesis: Sized {
    type Datum;

    fn parameters(&self) -> Vec<f64>;

    fn with_parameters(&self, parameters: &[f64]) -> Self;

    fn loss(&self, datum: &Self::Datum) -> f64;

    fn empirical_risk(&self, data: &[Self::Datum]) -> f64 {
        data.iter().map(|d| self.loss(d)).sum::<f64>() / data.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub bound: BoundReport,
    pub artifact: CompressedArtifact,
    /// Risk of the original parameters, for comparison only.
    pub full_precision_risk: f64,
    /// Risk of the dequantized parameters; this is what the bound certifies.
    pub quantized_risk: f64,
}

/// Quantize, compress, measure `C(h)` and plug it into the countable
/// hypothesis bound with the empirical risk of the decoded artifact.
pub fn bound_pipeline<H: CompressibleHypothesis>(
    model: &H,
    train: &[H::Datum],
    spec: RiskSpec,
    quantization_bits: u8,
    codec_id: &str,
) -> Result<PipelineReport> {
    if train.is_empty() {
        return domain("bound pipeline needs a nonempty training set");
    }
    let q = quantize(&model.parameters(), quantization_bits)?;
    let artifact = serialize_and_compress(&q, codec_id)?;
    let decoded = artifact.decompress()?.dequantize();
    let quantized_model = model.with_parameters(&decoded);
    let quantized_risk = quantized_model.empirical_risk(train);
    if !(quantized_risk >= spec.range_low() && quantized_risk <= spec.range_high()) {
        return domain(format!(
            "quantized empirical risk {quantized_risk} outside [{}, {}]",
            spec.range_low(),
            spec.range_high()
        ));
    }
    let prior = prior_bits_from_complexity(artifact.bits.max(1))?;
    let mut bound = countable_hypothesis_bound(quantized_risk, spec, prior)?;
    bound.excluded_classes = artifact.excluded_byte_classes.clone();
    Ok(PipelineReport { bound, artifact, full_precision_risk: model.empirical_risk(train), quantized_risk })
}

/// Point in the plane with a binary label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelledPoint {
    pub x: [f64; 2],
    pub label: bool,
}

/// `label = [b + w·x > 0]`, parameters `[b, w1, w2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearThreshold {
    pub bias: f64,
    pub weights: [f64; 2],
}

impl LinearThreshold {
    pub fn predict(&self, x: &[f64; 2]) -> bool {
        self.bias + self.weights[0] * x[0] + self.weights[1] * x[1] > 0.0
    }

    /// Least squares on ±1 targets; for Gaussian class-conditional inputs
    /// this recovers the Bayes direction.
    pub fn fit(data: &[LabelledPoint]) -> Self {
        let a = DMatrix::from_fn(data.len(), 3, |i, j| match j {
            0 => 1.0,
            _ => data[i].x[j - 1],
        });
        let b = DVector::from_iterator(data.len(), data.iter().map(|d| if d.label { 1.0 } else { -1.0 }));
        let w = min_norm_lstsq(&a, &b).weights;
        Self { bias: w[0], weights: [w[1], w[2]] }
    }
}

impl CompressibleHypothesis for LinearThreshold {
    type Datum = LabelledPoint;

    fn parameters(&self) -> Vec<f64> {
        vec![self.bias, self.weights[0], self.weights[1]]
    }

    fn with_parameters(&self, p: &[f64]) -> Self {
        Self { bias: p[0], weights: [p[1], p[2]] }
    }

    fn loss(&self, d: &LabelledPoint) -> f64 {
        f64::from(u8::from(self.predict(&d.x) != d.label))
    }
}

/// Predicts `value ≥ 0.5` for every input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantClassifier {
    pub value: f64,
}

impl CompressibleHypothesis for ConstantClassifier {
    type Datum = LabelledPoint;

    fn parameters(&self) -> Vec<f64> {
        vec![self.value]
    }

    fn with_parameters(&self, p: &[f64]) -> Self {
        Self { value: p[0] }
    }

    fn loss(&self, d: &LabelledPoint) -> f64 {
        f64::from(u8::from((self.value >= 0.5) != d.label))
    }
}

/// Inputs N(0, I₂); clean label `[x₁ − 0.5 x₂ + 0.25 > 0]`, flipped with
/// probability `flip`.
pub fn linear_task(n: usize, flip: f64, seed: u64) -> Vec<LabelledPoint> {
    use rand::Rng;
    let mut rng = stream(seed, "compression/linear-task", 0);
    (0..n)
        .map(|_| {
            let x = [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)];
            let clean = x[0] - 0.5 * x[1] + 0.25 > 0.0;
            LabelledPoint { x, label: clean ^ rng.gen_bool(flip) }
        })
        .collect()
}

/// Labels are fair coin flips independent of the inputs.
pub fn balanced_task(n: usize, seed: u64) -> Vec<LabelledPoint> {
    use rand::Rng;
    let mut rng = stream(seed, "compression/balanced-task", 0);
    (0..n)
        .map(|_| LabelledPoint {
            x: [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)],
            label: rng.gen_bool(0.5),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_vector_quantizes_exactly() {
        for bits in ALLOWED_BITS {
            let q = quantize(&[0.0, 0.0, 0.0], bits).unwrap();
            assert_eq!(q.codes, vec![0, 0, 0]);
            assert_eq!(q.dequantize(), vec![0.0; 3]);
        }
    }

    #[test]
    fn two_level_error_bound() {
        let q = quantize(&[0.0, 1.0], 8).unwrap();
        for (a, b) in q.dequantize().iter().zip([0.0, 1.0]) {
            assert!((a - b).abs() <= 1.0 / (2.0 * 255.0));
        }
    }

    #[test]
    fn rejects_unsupported_bits() {
        assert!(quantize(&[1.0], 12).is_err());
    }

    #[test]
    fn zeros_compress() {
        let q = quantize(&vec![0.0; 512], 8).unwrap();
        let d = serialize_and_compress(&q, "deflate").unwrap();
        let s = serialize_and_compress(&q, "store").unwrap();
        assert!(d.bits < s.bits);
        assert_eq!(s.bits, 8 * s.raw_bytes as u64);
    }

    #[test]
    fn unknown_codec() {
        let q = quantize(&[1.0], 8).unwrap();
        assert_eq!(serialize_and_compress(&q, "zstd").unwrap_err(), Error::UnknownCodec("zstd".into()));
    }

    #[test]
    fn packing_round_trip_odd_count() {
        let q = quantize(&[0.1, -0.4, 0.9], 4).unwrap();
        let a = serialize_and_compress(&q, "store").unwrap();
        assert_eq!(a.decompress().unwrap(), q);
    }

    #[test]
    fn file_round_trip() {
        let q = quantize(&[3.0, -1.0, 0.25, 7.5], 16).unwrap();
        let a = serialize_and_compress(&q, "deflate").unwrap();
        let bytes = a.to_bytes();
        assert_eq!(&bytes[..8], b"GENLABQ\0");
        assert_eq!(CompressedArtifact::from_bytes(&bytes).unwrap(), a);
        assert!(CompressedArtifact::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn pipeline_reports_exclusions() {
        let data = balanced_task(1000, 1);
        let spec = RiskSpec::zero_one(1000, 0.05).unwrap();
        let r = bound_pipeline(&ConstantClassifier { value: 1.0 }, &data, spec, 8, "deflate").unwrap();
        assert_eq!(r.bound.excluded_classes, EXCLUDED_CLASSES.to_vec());
        assert_eq!(r.quantized_risk, r.full_precision_risk);
    }
}
