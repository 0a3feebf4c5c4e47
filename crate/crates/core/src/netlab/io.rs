//! Network text files and dataset CSVs.
//!
//! Network file layout:
//!
//! ```text
//! NET v1 layers=<L> input=<d>
//! LAYER <rows> <cols> activation=<indicator|relu|identity>
//! <rows lines of cols space-separated weights>
//! <one line of rows biases>
//! ...
//! OUTPUT <argmax|identity>
//! ```

use std::io::{BufRead, Read, Write};

use super::{Activation, Layer, NetworkSpec, OutputRule, Sample};
use crate::error::{Error, Result};

pub const NETWORK_FORMAT_VERSION: u32 = 1;

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_network<W: Write>(net: &NetworkSpec, mut out: W) -> Result<()> {
    writeln!(
        out,
        "NET v{NETWORK_FORMAT_VERSION} layers={} input={}",
        net.layers().len(),
        net.input_dim()
    )?;
    for layer in net.layers() {
        writeln!(
            out,
            "LAYER {} {} activation={}",
            layer.rows(),
            layer.cols(),
            layer.activation()
        )?;
        for row in layer.weights().chunks_exact(layer.cols()) {
            writeln!(out, "{}", join(row))?;
        }
        writeln!(out, "{}", join(layer.bias()))?;
    }
    writeln!(out, "OUTPUT {}", net.output_rule())?;
    Ok(())
}

fn parse_key<'a>(token: &'a str, key: &str, line: usize) -> Result<&'a str> {
    token
        .strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| Error::parse(line, format!("expected `{key}=...`, found `{token}`")))
}

fn parse_usize(token: &str, line: usize) -> Result<usize> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("expected integer, found `{token}`")))
}

fn parse_floats(text: &str, expected: usize, line: usize) -> Result<Vec<f64>> {
    let values = text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::parse(line, format!("expected number, found `{t}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(Error::parse(
            line,
            format!("expected {expected} values, found {}", values.len()),
        ));
    }
    Ok(values)
}

pub fn read_network<R: BufRead>(input: R) -> Result<NetworkSpec> {
    let lines: Vec<String> = input.lines().collect::<std::io::Result<_>>()?;
    let mut it = lines
        .iter()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, header) = it.next().ok_or_else(|| Error::parse(1, "empty network file"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 4 || tokens[0] != "NET" {
        return Err(Error::parse(ln, "expected `NET v1 layers=<L> input=<d>`"));
    }
    if tokens[1] != format!("v{NETWORK_FORMAT_VERSION}") {
        return Err(Error::parse(ln, format!("unsupported version `{}`", tokens[1])));
    }
    let n_layers = parse_usize(parse_key(tokens[2], "layers", ln)?, ln)?;
    let input = parse_usize(parse_key(tokens[3], "input", ln)?, ln)?;

    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let (ln, text) = it.next().ok_or_else(|| Error::parse(ln, "missing LAYER"))?;
        let t: Vec<&str> = text.split_whitespace().collect();
        if t.len() != 4 || t[0] != "LAYER" {
            return Err(Error::parse(ln, "expected `LAYER rows cols activation=<a>`"));
        }
        let rows = parse_usize(t[1], ln)?;
        let cols = parse_usize(t[2], ln)?;
        let activation: Activation = parse_key(t[3], "activation", ln)?
            .parse()
            .map_err(|e: Error| Error::parse(ln, e.to_string()))?;
        let mut weights = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (ln, row) = it.next().ok_or_else(|| Error::parse(ln, "missing weight row"))?;
            weights.extend(parse_floats(row, cols, ln)?);
        }
        let (ln, bias) = it.next().ok_or_else(|| Error::parse(ln, "missing bias line"))?;
        let bias = parse_floats(bias, rows, ln)?;
        layers.push(
            Layer::new(rows, cols, weights, bias, activation)
                .map_err(|e| Error::parse(ln, e.to_string()))?,
        );
    }
    let (ln, out) = it.next().ok_or_else(|| Error::parse(ln, "missing OUTPUT line"))?;
    let rule: OutputRule = out
        .strip_prefix("OUTPUT")
        .map(str::trim)
        .ok_or_else(|| Error::parse(ln, "expected `OUTPUT <rule>`"))?
        .parse()
        .map_err(|e: Error| Error::parse(ln, e.to_string()))?;
    if let Some((ln, _)) = it.next() {
        return Err(Error::parse(ln, "trailing content after OUTPUT"));
    }
    let net = NetworkSpec::new(layers, rule)?;
    if net.input_dim() != input {
        return Err(Error::DimensionMismatch {
            layer: 0,
            expected: input,
            found: net.input_dim(),
        });
    }
    Ok(net)
}

/// Writes `x_1..x_d,y` rows.
pub fn write_dataset<W: Write>(data: &[Sample], out: W) -> Result<()> {
    let dim = data.first().map_or(0, |(x, _)| x.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=dim).map(|k| format!("x_{k}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for (x, y) in data {
        let mut rec: Vec<String> = x.iter().map(f64::to_string).collect();
        rec.push(y.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dataset CSV. A trailing `y` column is optional; unlabelled rows get
/// label 0.
pub fn read_dataset<R: Read>(input: R) -> Result<Vec<Sample>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let labelled = header.iter().next_back() == Some("y");
    let dim = header.len() - usize::from(labelled);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let mut x = Vec::with_capacity(dim);
        for field in rec.iter().take(dim) {
            x.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(line, format!("bad number `{field}`")))?,
            );
        }
        let y = if labelled {
            let f = rec.get(dim).unwrap_or("").trim();
            f.parse::<usize>()
                .map_err(|_| Error::parse(line, format!("bad label `{f}`")))?
        } else {
            0
        };
        out.push((x, y));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlab::build_theorem_networks;

    #[test]
    fn network_file_round_trips() {
        let (f1, f2) = build_theorem_networks(3);
        for net in [f1, f2] {
            let mut buf = Vec::new();
            write_network(&net, &mut buf).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            assert!(text.starts_with("NET v1 layers=3 input=3\nLAYER 4 3 activation=indicator\n"));
            assert!(text.ends_with("OUTPUT argmax\n"));
            assert_eq!(read_network(buf.as_slice()).unwrap(), net);
        }
    }

    #[test]
    fn malformed_network_reports_line() {
        let text = "NET v1 layers=1 input=2\nLAYER 1 2 activation=relu\n1 oops\n0\nOUTPUT identity\n";
        match read_network(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dataset_round_trips_at_full_precision() {
        let data = vec![(vec![0.1 + 0.2, -1e-17], 1), (vec![std::f64::consts::PI, 2.0], 0)];
        let mut buf = Vec::new();
        write_dataset(&data, &mut buf).unwrap();
        assert!(buf.starts_with(b"x_1,x_2,y\n"));
        assert_eq!(read_dataset(buf.as_slice()).unwrap(), data);
    }
}
