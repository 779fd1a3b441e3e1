//! Intensity frame file formats.

use super::SimulatorError;

fn bad(msg: impl Into<String>) -> SimulatorError {
    SimulatorError::BadFrame(msg.into())
}

/// Decodes a binary (`P5`) or ASCII (`P2`) PGM into `(width, height, values)`.
///
/// Grey levels `v` map to `(v + 1) / (maxval + 1)` so black stays strictly
/// positive.
pub fn parse_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>), SimulatorError> {
    let mut pos = 0;
    let mut header = Vec::with_capacity(4);
    while header.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated PGM header"));
        }
        header.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ASCII PGM header"))?);
    }
    let magic = header[0];
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad PGM header field {s:?}")));
    let (width, height, maxval) = (num(header[1])?, num(header[2])?, num(header[3])?);
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(bad(format!("unsupported PGM header {width}x{height} max {maxval}")));
    }
    let n = width * height;
    let scale = 1.0 / (maxval as f64 + 1.0);
    let raw: Vec<usize> = match magic {
        "P5" => {
            // Exactly one whitespace byte separates the header from the raster.
            let body = bytes.get(pos + 1..).unwrap_or(&[]);
            let bpp = if maxval < 256 { 1 } else { 2 };
            if body.len() != n * bpp {
                return Err(bad(format!("PGM raster has {} bytes, expected {}", body.len(), n * bpp)));
            }
            if bpp == 1 {
                body.iter().map(|&b| b as usize).collect()
            } else {
                body.chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as usize)
                    .collect()
            }
        }
        "P2" => {
            let body = std::str::from_utf8(&bytes[pos..]).map_err(|_| bad("non-ASCII P2 raster"))?;
            let vals = body
                .split_ascii_whitespace()
                .map(num)
                .collect::<Result<Vec<_>, _>>()?;
            if vals.len() != n {
                return Err(bad(format!("PGM raster has {} values, expected {n}", vals.len())));
            }
            vals
        }
        other => return Err(bad(format!("unsupported magic {other:?}"))),
    };
    if let Some(v) = raw.iter().find(|&&v| v > maxval) {
        return Err(bad(format!("grey level {v} above maxval {maxval}")));
    }
    Ok((width, height, raw.into_iter().map(|v| (v as f64 + 1.0) * scale).collect()))
}

/// Decodes a flat float frame: little-endian `u32` width, `u32` height, then
/// `width * height` `f32` linear intensities, row-major.
pub fn parse_flat_f32(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>), SimulatorError> {
    if bytes.len() < 8 {
        return Err(bad("flat frame shorter than its header"));
    }
    let width = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let expected = 8 + width * height * 4;
    if bytes.len() != expected {
        return Err(bad(format!("flat frame has {} bytes, expected {expected}", bytes.len())));
    }
    let values = bytes[8..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok((width, height, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_pgm() {
        let mut bytes = b"P5\n# comment\n3 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 127, 255, 1, 2, 3]);
        let (w, h, v) = parse_pgm(&bytes).unwrap();
        assert_eq!((w, h), (3, 2));
        assert_eq!(v[0], 1.0 / 256.0);
        assert_eq!(v[2], 1.0);
        assert!(v.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn sixteen_bit_and_ascii_pgm() {
        let mut bytes = b"P5 1 1 1023\n".to_vec();
        bytes.extend_from_slice(&1023u16.to_be_bytes());
        assert_eq!(parse_pgm(&bytes).unwrap().2, vec![1.0]);
        let (w, h, v) = parse_pgm(b"P2\n2 1\n3\n0 3\n").unwrap();
        assert_eq!((w, h), (2, 1));
        assert_eq!(v, vec![0.25, 1.0]);
    }

    #[test]
    fn bad_pgms() {
        assert!(parse_pgm(b"P6 1 1 255\n\x00\x00\x00").is_err());
        assert!(parse_pgm(b"P5 2 2 255\n\x00").is_err());
        assert!(parse_pgm(b"P2 1 1 3\n9\n").is_err());
        assert!(parse_pgm(b"P5 2").is_err());
    }

    #[test]
    fn flat_round_trip() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&0.5f32.to_le_bytes());
        bytes.extend_from_slice(&2.0f32.to_le_bytes());
        assert_eq!(parse_flat_f32(&bytes).unwrap(), (2, 1, vec![0.5, 2.0]));
        assert!(parse_flat_f32(&bytes[..10]).is_err());
    }
}
