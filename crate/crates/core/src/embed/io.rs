//! Plain-text vector persistence: header `V k`, then one `token f_1 .. f_k`
//! row per vocabulary entry (input vectors only), nine significant digits.
//! Interoperable with the widespread text word-vector format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{EmbeddingModel, Hyperparams, Vocabulary};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn save_embeddings<S: Scalar>(model: &EmbeddingModel<S>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    let v = model.vocab().len();
    let k = model.dim();
    writeln!(writer, "{v} {k}").map_err(|e| Error::io(path, e))?;
    for i in 0..v {
        write!(writer, "{}", model.vocab().entry(i).token).map_err(|e| Error::io(path, e))?;
        for value in model.input_row(i) {
            write!(writer, " {value:.8e}").map_err(|e| Error::io(path, e))?;
        }
        writeln!(writer).map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn load_embeddings<S: Scalar>(path: impl AsRef<Path>) -> Result<EmbeddingModel<S>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty embedding file"))?;
    let header = header.map_err(|e| Error::io(path, e))?;
    let mut parts = header.split_whitespace();
    let v: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(1, "header must be '<vocab_size> <dim>'"))?;
    let k: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(1, "header must be '<vocab_size> <dim>'"))?;
    if k == 0 {
        return Err(Error::parse(1, "dimension must be >= 1"));
    }

    let mut tokens = Vec::with_capacity(v);
    let mut input: Vec<S> = Vec::with_capacity(v * k);
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        if tokens.len() == v {
            return Err(Error::parse(
                line_no,
                format!("expected {v} vector rows, found more"),
            ));
        }
        let mut parts = line.split_whitespace();
        let token = parts
            .next()
            .ok_or_else(|| Error::parse(line_no, "missing token"))?;
        let mut row = 0usize;
        for part in parts {
            let value: f64 = part.parse().map_err(|_| {
                Error::parse(line_no, format!("invalid vector component '{part}'"))
            })?;
            input.push(S::from_f64_cfg(value));
            row += 1;
        }
        if row != k {
            return Err(Error::parse(
                line_no,
                format!("expected {k} components, found {row}"),
            ));
        }
        tokens.push(token.to_string());
    }
    if tokens.len() != v {
        return Err(Error::parse(
            tokens.len() + 2,
            format!("expected {v} vector rows, found {} (end of file)", tokens.len()),
        ));
    }
    let vocab = Vocabulary::from_tokens(tokens)?;
    let hyperparams = Hyperparams {
        dim: k,
        ..Hyperparams::default()
    };
    Ok(EmbeddingModel::from_parts(vocab, k, input, hyperparams))
}
