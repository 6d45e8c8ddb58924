//! Minimal NPY v1.0 reader and writer for C-ordered `|u1` and `<f4` arrays.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dtype {
    U8,
    F32,
}

impl Dtype {
    pub fn descr(self) -> &'static str {
        match self {
            Dtype::U8 => "|u1",
            Dtype::F32 => "<f4",
        }
    }

    pub fn size(self) -> usize {
        match self {
            Dtype::U8 => 1,
            Dtype::F32 => 4,
        }
    }

    fn from_descr(s: &str) -> Option<Self> {
        match s {
            "|u1" | "<u1" | "u1" => Some(Dtype::U8),
            "<f4" => Some(Dtype::F32),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NpyArray {
    pub dtype: Dtype,
    pub shape: Vec<usize>,
    /// Raw little-endian payload.
    pub data: Vec<u8>,
}

impl NpyArray {
    pub fn element_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn as_f32(&self) -> Option<Vec<f32>> {
        (self.dtype == Dtype::F32).then(|| {
            self.data
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect()
        })
    }
}

fn header(dtype: Dtype, shape: &[usize]) -> Vec<u8> {
    let dims = match shape {
        [d] => format!("({d},)"),
        _ => format!("({})", shape.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")),
    };
    let dict = format!("{{'descr': '{}', 'fortran_order': False, 'shape': {dims}, }}", dtype.descr());
    // magic(6) + version(2) + length(2) + dict + padding + '\n'
    let unpadded = MAGIC.len() + 4 + dict.len() + 1;
    let total = unpadded.div_ceil(ALIGN) * ALIGN;
    let mut text = dict.into_bytes();
    text.resize(text.len() + total - unpadded, b' ');
    text.push(b'\n');

    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(text.len() as u16).to_le_bytes());
    out.extend_from_slice(&text);
    out
}

pub fn write_u8<W: Write>(mut out: W, shape: &[usize], data: &[u8]) -> std::io::Result<()> {
    assert_eq!(shape.iter().product::<usize>(), data.len(), "shape does not match payload");
    out.write_all(&header(Dtype::U8, shape))?;
    out.write_all(data)
}

pub fn write_f32<W: Write>(mut out: W, shape: &[usize], data: &[f32]) -> std::io::Result<()> {
    assert_eq!(shape.iter().product::<usize>(), data.len(), "shape does not match payload");
    out.write_all(&header(Dtype::F32, shape))?;
    let bytes: Vec<u8> = data.iter().flat_map(|v| v.to_le_bytes()).collect();
    out.write_all(&bytes)
}

/// Reads a whole array. `file` names the source in integrity errors.
pub fn read<R: Read>(mut input: R, file: &str) -> Result<NpyArray> {
    let bad = |msg: String| Error::integrity(file, msg);
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(|e| bad(e.to_string()))?;
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(bad("missing NPY magic".into()));
    }
    if bytes[6..8] != [1, 0] {
        return Err(bad(format!("unsupported NPY version {}.{}", bytes[6], bytes[7])));
    }
    let hlen = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let start = 10 + hlen;
    if bytes.len() < start {
        return Err(bad("truncated header".into()));
    }
    let text = std::str::from_utf8(&bytes[10..start]).map_err(|_| bad("header is not text".into()))?;
    let (dtype, fortran, shape) = parse_header(text).ok_or_else(|| bad(format!("malformed header {text:?}")))?;
    if fortran {
        return Err(bad("Fortran-ordered arrays are not supported".into()));
    }
    let expected = shape.iter().product::<usize>() * dtype.size();
    let data = bytes.split_off(start);
    if data.len() != expected {
        return Err(bad(format!(
            "payload is {} bytes, shape {shape:?} needs {expected}",
            data.len()
        )));
    }
    Ok(NpyArray { dtype, shape, data })
}

fn quoted_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    let rest = &text[text.find(&format!("'{key}'"))? + key.len() + 2..];
    let rest = rest.trim_start().strip_prefix(':')?.trim_start();
    Some(rest)
}

fn parse_header(text: &str) -> Option<(Dtype, bool, Vec<usize>)> {
    let descr = quoted_value(text, "descr")?.strip_prefix('\'')?;
    let dtype = Dtype::from_descr(&descr[..descr.find('\'')?])?;
    let fortran = quoted_value(text, "fortran_order")?.starts_with("True");
    let shape_text = quoted_value(text, "shape")?.strip_prefix('(')?;
    let shape_text = &shape_text[..shape_text.find(')')?];
    let shape = shape_text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().ok())
        .collect::<Option<Vec<usize>>>()?;
    Some((dtype, fortran, shape))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_aligned_and_starts_with_magic() {
        for shape in [vec![7], vec![30_000, 16, 16, 3], vec![0, 4, 4, 3]] {
            let h = header(Dtype::U8, &shape);
            assert_eq!(h.len() % 64, 0);
            assert_eq!(&h[..8], b"\x93NUMPY\x01\x00");
            assert_eq!(*h.last().unwrap(), b'\n');
        }
        let h = header(Dtype::U8, &[5]);
        assert!(std::str::from_utf8(&h[10..]).unwrap().contains("'shape': (5,)"));
    }

    #[test]
    fn payload_size_for_full_image_set() {
        let shape = [30_000, 16, 16, 3];
        let h = header(Dtype::U8, &shape);
        let data = vec![0u8; 23_040_000];
        let mut buf = Vec::new();
        write_u8(&mut buf, &shape, &data).unwrap();
        assert_eq!(buf.len() - h.len(), 23_040_000);
    }

    #[test]
    fn round_trip_u8_and_f32() {
        let mut buf = Vec::new();
        write_u8(&mut buf, &[2, 3], &[1, 2, 3, 4, 5, 255]).unwrap();
        let a = read(buf.as_slice(), "t").unwrap();
        assert_eq!((a.dtype, a.shape.clone(), a.data.clone()), (Dtype::U8, vec![2, 3], vec![1, 2, 3, 4, 5, 255]));

        let mut buf = Vec::new();
        write_f32(&mut buf, &[3], &[0.0, 0.5, 1.0]).unwrap();
        let a = read(buf.as_slice(), "t").unwrap();
        assert_eq!(a.as_f32().unwrap(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn truncation_is_reported() {
        let mut buf = Vec::new();
        write_u8(&mut buf, &[4], &[1, 2, 3, 4]).unwrap();
        buf.pop();
        let err = read(buf.as_slice(), "labels.npy").unwrap_err();
        assert!(matches!(err, Error::Integrity { file, .. } if file == "labels.npy"));
        assert!(read(&b"not an npy file"[..], "x").is_err());
    }
}
