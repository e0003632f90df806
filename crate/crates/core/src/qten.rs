//! The `QTEN 1` text format.
//!
//! ```text
//! QTEN 1
//! dims: 2 2 2
//! field: complex
//! <re> <im>
//! ...
//! ```
//!
//! Entries follow in row-major order. Real tensors carry one token per entry,
//! complex tensors two. Every value is written with 17 significant digits,
//! which round-trips `f64` bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{parse_err, Result};
use crate::tensor::DenseTensor;

pub fn to_string(tensor: &DenseTensor) -> String {
    let real = tensor.is_real();
    let mut out = String::with_capacity(48 * tensor.len() + 64);
    out.push_str("QTEN 1\ndims:");
    for d in tensor.dims() {
        write!(out, " {d}").unwrap();
    }
    out.push_str(if real { "\nfield: real\n" } else { "\nfield: complex\n" });
    for z in tensor.data() {
        if real {
            writeln!(out, "{:.16e}", z.re).unwrap();
        } else {
            writeln!(out, "{:.16e} {:.16e}", z.re, z.im).unwrap();
        }
    }
    out
}

pub fn from_str(text: &str) -> Result<DenseTensor> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (n, magic) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    if magic.trim() != "QTEN 1" {
        return Err(parse_err(n, format!("expected `QTEN 1`, found `{}`", magic.trim())));
    }

    let (n, dims_line) = lines.next().ok_or_else(|| parse_err(2, "missing dims line"))?;
    let dims_text = dims_line
        .trim()
        .strip_prefix("dims:")
        .ok_or_else(|| parse_err(n, "expected `dims:`"))?;
    let dims = dims_text
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| parse_err(n, format!("bad dimension `{t}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if dims.is_empty() || dims.contains(&0) {
        return Err(parse_err(n, "dims must be a nonempty list of positive integers"));
    }

    let (n, field_line) = lines.next().ok_or_else(|| parse_err(3, "missing field line"))?;
    let complex = match field_line.trim().strip_prefix("field:").map(str::trim) {
        Some("real") => false,
        Some("complex") => true,
        _ => return Err(parse_err(n, "expected `field: real` or `field: complex`")),
    };

    let len = dims
        .iter()
        .try_fold(1usize, |a, &d| a.checked_mul(d))
        .ok_or_else(|| parse_err(2, "tensor size overflows"))?;
    let per_entry = if complex { 2 } else { 1 };
    let mut values = Vec::with_capacity(len * per_entry);
    let mut last_line = 3;
    for (n, line) in lines {
        last_line = n;
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|e| parse_err(n, format!("bad number `{tok}`: {e}")))?;
            if !v.is_finite() {
                return Err(parse_err(n, format!("non-finite value `{tok}`")));
            }
            values.push(v);
        }
    }
    if values.len() != len * per_entry {
        return Err(parse_err(
            last_line,
            format!("expected {} values, found {}", len * per_entry, values.len()),
        ));
    }
    let data = if complex {
        values.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
    } else {
        values.into_iter().map(|v| Complex64::new(v, 0.0)).collect()
    };
    DenseTensor::new(dims, data)
}

pub fn read(path: &Path) -> Result<DenseTensor> {
    from_str(&fs::read_to_string(path)?)
}

pub fn write(path: &Path, tensor: &DenseTensor) -> Result<()> {
    fs::write(path, to_string(tensor))?;
    Ok(())
}
