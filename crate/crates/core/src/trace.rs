//! Activation traces and the correlation / dissimilarity matrices built from
//! them.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::netlab::NetworkSpec;

pub const TRACE_MAGIC: &[u8; 4] = b"ATRC";
pub const TRACE_FORMAT_VERSION: u32 = 1;

/// Variance (pearson) or second moment (cosine) below which a neuron is
/// treated as constant and dropped.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Per-neuron activations over a sample set, stored row-major
/// (`values[sample * m + neuron]`).
#[derive(Clone, Debug, PartialEq)]
pub struct ActivationTrace {
    n: usize,
    m: usize,
    values: Vec<f64>,
    layer_of: Vec<usize>,
    neuron_ids: Vec<usize>,
}

impl ActivationTrace {
    pub fn new(
        n: usize,
        m: usize,
        values: Vec<f64>,
        layer_of: Vec<usize>,
        neuron_ids: Vec<usize>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooSmall {
                what: "samples in a trace",
                needed: 2,
                got: n,
            });
        }
        if values.len() != n * m || layer_of.len() != m || neuron_ids.len() != m {
            return Err(Error::InvalidData(format!(
                "trace {n}x{m} given {} values, {} layers, {} ids",
                values.len(),
                layer_of.len(),
                neuron_ids.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite activation".into()));
        }
        if layer_of.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidData("layer indices must be non-decreasing".into()));
        }
        Ok(Self {
            n,
            m,
            values,
            layer_of,
            neuron_ids,
        })
    }

    pub fn samples(&self) -> usize {
        self.n
    }

    pub fn neurons(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, sample: usize) -> &[f64] {
        &self.values[sample * self.m..(sample + 1) * self.m]
    }

    pub fn layer_of(&self) -> &[usize] {
        &self.layer_of
    }

    pub fn neuron_ids(&self) -> &[usize] {
        &self.neuron_ids
    }

    fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|k| self.values[k * self.m + j]).collect()
    }
}

/// Feeds every input through `net` and records the hidden activations.
pub fn record_activations(net: &NetworkSpec, inputs: &[Vec<f64>]) -> Result<ActivationTrace> {
    let m = net.hidden_count();
    let mut values = Vec::with_capacity(inputs.len() * m);
    for x in inputs {
        net.eval_into(x, &mut values)?;
    }
    ActivationTrace::new(
        inputs.len(),
        m,
        values,
        net.hidden_layer_of(),
        (0..m).collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// Centered, population-normalized correlation.
    Pearson,
    /// Uncentered: `<v_i, v_j> / (|v_i| |v_j|)` from `1/n`-scaled moments.
    Cosine,
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Pearson => "pearson",
            Kernel::Cosine => "cosine",
        })
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pearson" => Ok(Kernel::Pearson),
            "cosine" => Ok(Kernel::Cosine),
            other => Err(Error::InvalidConfig(format!("unknown kernel `{other}`"))),
        }
    }
}

/// Symmetric `m x m` correlation matrix over the neurons that survived
/// degenerate-neuron removal.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    m: usize,
    rho: Vec<f64>,
    kernel: Kernel,
    kept_neurons: Vec<usize>,
    layer_of: Vec<usize>,
}

impl CorrelationMatrix {
    /// Validates symmetry, unit diagonal and the `[-1, 1]` range (entries are
    /// clamped within `1e-12` of the bounds).
    pub fn new(
        m: usize,
        mut rho: Vec<f64>,
        kernel: Kernel,
        kept_neurons: Vec<usize>,
        layer_of: Vec<usize>,
    ) -> Result<Self> {
        if rho.len() != m * m || kept_neurons.len() != m || layer_of.len() != m {
            return Err(Error::InvalidData("correlation matrix shape mismatch".into()));
        }
        for i in 0..m {
            for j in 0..m {
                let v = rho[i * m + j];
                if !v.is_finite() || v.abs() > 1.0 + 1e-12 || (v - rho[j * m + i]).abs() > 1e-12 {
                    return Err(Error::InvalidData(format!(
                        "entry ({i},{j}) = {v} breaks correlation invariants"
                    )));
                }
            }
            rho[i * m + i] = 1.0;
        }
        for v in rho.iter_mut() {
            *v = v.clamp(-1.0, 1.0);
        }
        Ok(Self {
            m,
            rho,
            kernel,
            kept_neurons,
            layer_of,
        })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rho[i * self.m + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.rho
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn kept_neurons(&self) -> &[usize] {
        &self.kept_neurons
    }

    pub fn layer_of(&self) -> &[usize] {
        &self.layer_of
    }

    /// Conjugates by the permutation `perm` (new index `k` is old `perm[k]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let m = self.m;
        let mut rho = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                rho[i * m + j] = self.get(perm[i], perm[j]);
            }
        }
        Self {
            m,
            rho,
            kernel: self.kernel,
            kept_neurons: perm.iter().map(|&p| self.kept_neurons[p]).collect(),
            layer_of: perm.iter().map(|&p| self.layer_of[p]).collect(),
        }
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Correlation of every neuron pair under `kernel`, dropping neurons whose
/// variance (pearson) or second moment (cosine) is below [`DEGENERATE_TOL`].
pub fn correlation_matrix(trace: &ActivationTrace, kernel: Kernel) -> Result<CorrelationMatrix> {
    let n = trace.n as f64;
    let mut columns = Vec::new();
    let mut kept = Vec::new();
    for j in 0..trace.m {
        let mut col = trace.column(j);
        if kernel == Kernel::Pearson {
            let mean = compensated_sum(col.iter().copied()) / n;
            for v in col.iter_mut() {
                *v -= mean;
            }
        }
        let second = compensated_sum(col.iter().map(|v| v * v)) / n;
        if second >= DEGENERATE_TOL {
            columns.push((col, second.sqrt()));
            kept.push(j);
        }
    }
    let m = kept.len();
    if m < 2 {
        return Err(Error::TooFewNeurons { kept: m });
    }
    let upper: Vec<(usize, usize, f64)> = (0..m)
        .into_par_iter()
        .flat_map_iter(|i| {
            let columns = &columns;
            (i + 1..m).map(move |j| {
                let (a, na) = &columns[i];
                let (b, nb) = &columns[j];
                let cross = compensated_sum(a.iter().zip(b).map(|(x, y)| x * y)) / n;
                (i, j, (cross / (na * nb)).clamp(-1.0, 1.0))
            })
        })
        .collect();
    let mut rho = vec![0.0; m * m];
    for i in 0..m {
        rho[i * m + i] = 1.0;
    }
    for (i, j, v) in upper {
        rho[i * m + j] = v;
        rho[j * m + i] = v;
    }
    let layer_of = kept.iter().map(|&j| trace.layer_of[j]).collect();
    let kept_neurons = kept.iter().map(|&j| trace.neuron_ids[j]).collect();
    CorrelationMatrix::new(m, rho, kernel, kept_neurons, layer_of)
}

/// Symmetric `m x m` matrix of `1 - ρ` with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DissimilarityMatrix {
    m: usize,
    w: Vec<f64>,
    layer_of: Vec<usize>,
}

impl DissimilarityMatrix {
    pub fn new(m: usize, mut w: Vec<f64>, layer_of: Vec<usize>) -> Result<Self> {
        if w.len() != m * m || layer_of.len() != m {
            return Err(Error::InvalidData("dissimilarity matrix shape mismatch".into()));
        }
        for i in 0..m {
            w[i * m + i] = 0.0;
            for j in 0..m {
                let v = w[i * m + j];
                if !(0.0..=2.0).contains(&v) || v != w[j * m + i] {
                    return Err(Error::InvalidData(format!(
                        "entry ({i},{j}) = {v} must be symmetric and within [0, 2]"
                    )));
                }
            }
        }
        Ok(Self { m, w, layer_of })
    }

    /// Builds a matrix from the strict upper triangle, row by row; all
    /// neurons are placed in layer 0.
    pub fn from_upper(m: usize, upper: &[f64]) -> Result<Self> {
        if upper.len() != m * (m.saturating_sub(1)) / 2 {
            return Err(Error::InvalidData("upper triangle has wrong length".into()));
        }
        let mut w = vec![0.0; m * m];
        let mut it = upper.iter();
        for i in 0..m {
            for j in i + 1..m {
                let v = *it.next().unwrap();
                w[i * m + j] = v;
                w[j * m + i] = v;
            }
        }
        Self::new(m, w, vec![0; m])
    }

    pub fn size(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.m + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn layer_of(&self) -> &[usize] {
        &self.layer_of
    }

    pub fn with_layers(mut self, layer_of: Vec<usize>) -> Result<Self> {
        if layer_of.len() != self.m {
            return Err(Error::InvalidData("layer vector length mismatch".into()));
        }
        self.layer_of = layer_of;
        Ok(self)
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let m = self.m;
        let mut w = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                w[i * m + j] = self.get(perm[i], perm[j]);
            }
        }
        Self {
            m,
            w,
            layer_of: perm.iter().map(|&p| self.layer_of[p]).collect(),
        }
    }

    /// `max |w_ij - w'_ij|`.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        if self.m != other.m {
            return Err(Error::DimensionMismatch {
                layer: 0,
                expected: self.m,
                found: other.m,
            });
        }
        Ok(self
            .w
            .iter()
            .zip(&other.w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// `w_ij = 1 - ρ_ij`, diagonal forced to zero.
pub fn dissimilarity(corr: &CorrelationMatrix) -> DissimilarityMatrix {
    let m = corr.m;
    let mut w: Vec<f64> = corr.rho.iter().map(|r| (1.0 - r).clamp(0.0, 2.0)).collect();
    for i in 0..m {
        w[i * m + i] = 0.0;
    }
    DissimilarityMatrix {
        m,
        w,
        layer_of: corr.layer_of.clone(),
    }
}

fn block_moments(p_p: [[f64; 4]; 4], q_q: [[f64; 4]; 4], p_q: [[f64; 4]; 4]) -> [[f64; 8]; 8] {
    let mut s = [[0.0; 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            s[i][j] = p_p[i][j];
            s[4 + i][4 + j] = q_q[i][j];
            s[i][4 + j] = p_q[i][j];
            s[4 + j][i] = p_q[i][j];
        }
    }
    s
}

fn moments_to_correlation(second: &[[f64; 8]; 8], mean: &[f64; 8], kernel: Kernel) -> CorrelationMatrix {
    let centered = |i: usize, j: usize| match kernel {
        Kernel::Cosine => second[i][j],
        Kernel::Pearson => second[i][j] - mean[i] * mean[j],
    };
    let mut rho = vec![0.0; 64];
    for i in 0..8 {
        for j in 0..8 {
            rho[i * 8 + j] = centered(i, j) / (centered(i, i) * centered(j, j)).sqrt();
        }
    }
    CorrelationMatrix::new(8, rho, kernel, (0..8).collect(), vec![0, 0, 0, 0, 1, 1, 1, 1])
        .expect("closed-form moments give a valid correlation matrix")
}

/// Exact correlation matrices of the two theorem networks `(f1, f2)` under
/// the four-cluster mixture `D2`, assembled from the closed-form first and
/// second moments of their hidden activations `a = [p; q]`.
pub fn analytic_theorem_matrices(kernel: Kernel) -> (CorrelationMatrix, CorrelationMatrix) {
    const H: f64 = 0.5;
    const Q: f64 = 0.25;
    let half_pattern = [[H, 0.0, H, 0.0], [0.0, H, 0.0, H], [H, 0.0, H, 0.0], [0.0, H, 0.0, H]];
    let s1 = block_moments(half_pattern, half_pattern, half_pattern);
    let mean1 = [H; 8];

    let p2_p2 = [[H, 0.0, Q, Q], [0.0, H, Q, Q], [Q, Q, H, 0.0], [Q, Q, 0.0, H]];
    let q2_q2 = [[Q, 0.0, 0.0, 0.0], [0.0, Q, 0.0, 0.0], [0.0, 0.0, Q, 0.0], [0.0, 0.0, 0.0, Q]];
    let p2_q2 = [[Q, Q, 0.0, 0.0], [0.0, 0.0, Q, Q], [Q, 0.0, Q, 0.0], [0.0, Q, 0.0, Q]];
    let s2 = block_moments(p2_p2, q2_q2, p2_q2);
    let mean2 = [H, H, H, H, Q, Q, Q, Q];

    (
        moments_to_correlation(&s1, &mean1, kernel),
        moments_to_correlation(&s2, &mean2, kernel),
    )
}

// ---------------------------------------------------------------------------
// file formats

/// Writes the binary trace: magic, version, n, m, layer indices, values.
pub fn write_trace<W: Write>(trace: &ActivationTrace, mut out: W) -> Result<()> {
    out.write_all(TRACE_MAGIC)?;
    out.write_u32::<LittleEndian>(TRACE_FORMAT_VERSION)?;
    out.write_u64::<LittleEndian>(trace.n as u64)?;
    out.write_u64::<LittleEndian>(trace.m as u64)?;
    for &l in &trace.layer_of {
        out.write_u32::<LittleEndian>(l as u32)?;
    }
    for &v in &trace.values {
        out.write_f64::<LittleEndian>(v)?;
    }
    Ok(())
}

pub fn read_trace<R: Read>(mut input: R) -> Result<ActivationTrace> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != TRACE_MAGIC {
        return Err(Error::Format("not an ATRC trace file".into()));
    }
    let version = input.read_u32::<LittleEndian>()?;
    if version != TRACE_FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported trace version {version}")));
    }
    let n = input.read_u64::<LittleEndian>()? as usize;
    let m = input.read_u64::<LittleEndian>()? as usize;
    let layer_of = (0..m)
        .map(|_| input.read_u32::<LittleEndian>().map(|l| l as usize))
        .collect::<std::io::Result<Vec<_>>>()?;
    let count = n
        .checked_mul(m)
        .ok_or_else(|| Error::Format("trace dimensions overflow".into()))?;
    let mut values = vec![0.0; count];
    input.read_f64_into::<LittleEndian>(&mut values)?;
    ActivationTrace::new(n, m, values, layer_of, (0..m).collect())
}

/// CSV export: header of neuron ids, one row of layer indices, then samples.
pub fn write_trace_csv<W: Write>(trace: &ActivationTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trace.neuron_ids.iter().map(usize::to_string))?;
    w.write_record(trace.layer_of.iter().map(usize::to_string))?;
    for k in 0..trace.n {
        w.write_record(trace.row(k).iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: FromStr>(field: &str, line: usize) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("bad value `{field}`")))
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<ActivationTrace> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = r.records();
    let ids: Vec<usize> = match records.next() {
        Some(rec) => rec?.iter().map(|f| parse_field(f, 1)).collect::<Result<_>>()?,
        None => return Err(Error::parse(1, "empty trace CSV")),
    };
    let layer_of: Vec<usize> = match records.next() {
        Some(rec) => rec?.iter().map(|f| parse_field(f, 2)).collect::<Result<_>>()?,
        None => return Err(Error::parse(2, "missing layer row")),
    };
    let m = ids.len();
    let mut values = Vec::new();
    let mut n = 0;
    for (k, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != m {
            return Err(Error::parse(k + 3, format!("expected {m} columns")));
        }
        for f in rec.iter() {
            values.push(parse_field(f, k + 3)?);
        }
        n += 1;
    }
    ActivationTrace::new(n, m, values, layer_of, ids)
}

/// Correlation CSV: first cell is the kernel name followed by the kept
/// neuron ids; the second row is `layer` followed by layer indices; then one
/// row per neuron (`id` then the matrix row).
pub fn write_correlation_csv<W: Write>(corr: &CorrelationMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![corr.kernel.to_string()];
    header.extend(corr.kept_neurons.iter().map(usize::to_string));
    w.write_record(&header)?;
    let mut layers = vec!["layer".to_string()];
    layers.extend(corr.layer_of.iter().map(usize::to_string));
    w.write_record(&layers)?;
    for i in 0..corr.m {
        let mut row = vec![corr.kept_neurons[i].to_string()];
        row.extend((0..corr.m).map(|j| corr.get(i, j).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_correlation_csv<R: Read>(input: R) -> Result<CorrelationMatrix> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let rows: Vec<csv::StringRecord> = r.records().collect::<std::result::Result<_, _>>()?;
    if rows.len() < 2 {
        return Err(Error::parse(1, "correlation CSV needs a header and a layer row"));
    }
    let kernel: Kernel = rows[0]
        .get(0)
        .unwrap_or("")
        .parse()
        .map_err(|e: Error| Error::parse(1, e.to_string()))?;
    let ids: Vec<usize> = rows[0].iter().skip(1).map(|f| parse_field(f, 1)).collect::<Result<_>>()?;
    if rows[1].get(0) != Some("layer") {
        return Err(Error::parse(2, "second row must start with `layer`"));
    }
    let layer_of: Vec<usize> = rows[1].iter().skip(1).map(|f| parse_field(f, 2)).collect::<Result<_>>()?;
    let m = ids.len();
    if layer_of.len() != m || rows.len() != m + 2 {
        return Err(Error::Format(format!("expected a {m}x{m} matrix")));
    }
    let mut rho = Vec::with_capacity(m * m);
    for (i, rec) in rows[2..].iter().enumerate() {
        if rec.len() != m + 1 {
            return Err(Error::parse(i + 3, format!("expected {} fields", m + 1)));
        }
        for f in rec.iter().skip(1) {
            rho.push(parse_field(f, i + 3)?);
        }
    }
    CorrelationMatrix::new(m, rho, kernel, ids, layer_of)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlab::{Activation, Layer, OutputRule};

    fn trace_from_columns(cols: &[Vec<f64>]) -> ActivationTrace {
        let n = cols[0].len();
        let m = cols.len();
        let mut values = Vec::with_capacity(n * m);
        for k in 0..n {
            for c in cols {
                values.push(c[k]);
            }
        }
        ActivationTrace::new(n, m, values, vec![0; m], (0..m).collect()).unwrap()
    }

    #[test]
    fn identical_columns_correlate_perfectly() {
        let v = vec![0.0, 1.0, 3.0, 2.0];
        let t = trace_from_columns(&[v.clone(), v]);
        for k in [Kernel::Pearson, Kernel::Cosine] {
            assert!((correlation_matrix(&t, k).unwrap().get(0, 1) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn complementary_binary_columns_anticorrelate() {
        let v = vec![0.0, 1.0, 1.0, 0.0, 1.0];
        let c: Vec<f64> = v.iter().map(|x| 1.0 - x).collect();
        let m = correlation_matrix(&trace_from_columns(&[v, c]), Kernel::Pearson).unwrap();
        assert!((m.get(0, 1) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_neurons_are_dropped() {
        let t = trace_from_columns(&[
            vec![1.0, 2.0, 3.0],
            vec![5.0, 5.0, 5.0],
            vec![0.0, 1.0, 0.0],
        ]);
        let m = correlation_matrix(&t, Kernel::Pearson).unwrap();
        assert_eq!(m.kept_neurons(), &[0, 2]);
        // cosine keeps the constant-but-nonzero column
        let c = correlation_matrix(&t, Kernel::Cosine).unwrap();
        assert_eq!(c.kept_neurons(), &[0, 1, 2]);
    }

    #[test]
    fn too_few_surviving_neurons_is_an_error() {
        let t = trace_from_columns(&[vec![1.0, 2.0, 3.0], vec![0.0, 0.0, 0.0]]);
        assert!(matches!(
            correlation_matrix(&t, Kernel::Cosine),
            Err(Error::TooFewNeurons { kept: 1 })
        ));
    }

    #[test]
    fn trace_needs_two_samples() {
        assert!(ActivationTrace::new(1, 2, vec![0.0, 1.0], vec![0, 0], vec![0, 1]).is_err());
    }

    #[test]
    fn dissimilarity_examples() {
        let rho = vec![1.0, -1.0, 0.5, -1.0, 1.0, 0.0, 0.5, 0.0, 1.0];
        let c = CorrelationMatrix::new(3, rho, Kernel::Pearson, vec![0, 1, 2], vec![0; 3]).unwrap();
        let w = dissimilarity(&c);
        assert_eq!(w.get(0, 0), 0.0);
        assert_eq!(w.get(0, 1), 2.0);
        assert_eq!(w.get(0, 2), 0.5);
    }

    #[test]
    fn identity_net_trace_equals_inputs() {
        let layer = Layer::from_rows(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.0, 0.0],
            Activation::Identity,
        )
        .unwrap();
        let net = NetworkSpec::new(vec![layer], OutputRule::Identity).unwrap();
        let xs = vec![vec![0.5, 1.0], vec![-2.0, 3.0], vec![4.0, 4.0]];
        let t = record_activations(&net, &xs).unwrap();
        for (k, x) in xs.iter().enumerate() {
            assert_eq!(t.row(k), x.as_slice());
        }
    }

    #[test]
    fn analytic_matrices_match_moment_blocks() {
        let (m1, m2) = analytic_theorem_matrices(Kernel::Cosine);
        assert_eq!(m1.get(0, 2), 1.0);
        assert_eq!(m1.get(0, 1), 0.0);
        assert!((m2.get(0, 2) - 0.5).abs() < 1e-15);
        for i in 0..8 {
            assert_eq!(m1.get(i, i), 1.0);
            assert_eq!(m2.get(i, i), 1.0);
        }
        // p-neuron vs a quadrant neuron inside its half plane: (1/4)/sqrt(1/2 * 1/4)
        assert!((m2.get(0, 4) - 0.5f64.sqrt()).abs() < 1e-15);
        // disjoint quadrant indicators
        assert_eq!(m2.get(4, 5), 0.0);

        let (p1, p2) = analytic_theorem_matrices(Kernel::Pearson);
        assert!((p1.get(0, 1) + 1.0).abs() < 1e-15);
        assert!(p2.get(0, 2).abs() < 1e-15);
        assert!((p2.get(4, 5) + 1.0 / 3.0).abs() < 1e-15);
        assert!((p2.get(0, 4) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn binary_trace_round_trips() {
        let t = trace_from_columns(&[vec![1.5, -2.0, 0.1], vec![0.0, 1e-300, 7.0]]);
        let mut buf = Vec::new();
        write_trace(&t, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"ATRC");
        assert_eq!(buf.len(), 4 + 4 + 8 + 8 + 2 * 4 + 6 * 8);
        assert_eq!(read_trace(buf.as_slice()).unwrap(), t);
        assert!(read_trace(&b"XXXX"[..]).is_err());
    }

    #[test]
    fn csv_trace_and_correlation_round_trip() {
        let t = trace_from_columns(&[vec![1.0, 2.0, 4.0], vec![0.0, 1.0, 0.5], vec![3.0, 1.0, 2.0]]);
        let mut buf = Vec::new();
        write_trace_csv(&t, &mut buf).unwrap();
        assert_eq!(read_trace_csv(buf.as_slice()).unwrap(), t);

        let c = correlation_matrix(&t, Kernel::Pearson).unwrap();
        let mut buf = Vec::new();
        write_correlation_csv(&c, &mut buf).unwrap();
        assert!(buf.starts_with(b"pearson,0,1,2\nlayer,0,0,0\n"));
        assert_eq!(read_correlation_csv(buf.as_slice()).unwrap(), c);
    }
}
