//! 16-bit binary PGM (P5) with the grey-level window in a comment.

/// Encodes `values` (row-major, `width` × `height`) linearly mapped from
/// [min, max] to [0, 65535]. A constant image maps to 0.
pub fn encode(width: usize, height: usize, values: &[f64]) -> Vec<u8> {
    assert_eq!(values.len(), width * height, "pixel count");
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let (lo, hi) = if values.is_empty() {
        (0.0, 0.0)
    } else {
        (lo, hi)
    };
    let mut out =
        format!("P5\n# window {lo:.17e} {hi:.17e}\n{width} {height}\n65535\n").into_bytes();
    let span = hi - lo;
    for &v in values {
        let level = if span > 0.0 {
            ((v - lo) / span * 65535.0).round() as u16
        } else {
            0
        };
        out.extend_from_slice(&level.to_be_bytes());
    }
    out
}

/// A decoded image.
#[derive(Debug, Clone, PartialEq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    /// Values mapped to levels 0 and 65535.
    pub window: (f64, f64),
    pub levels: Vec<u16>,
}

/// Inverse of [`encode`].
pub fn decode(bytes: &[u8]) -> Option<Pgm> {
    let mut fields = Vec::new();
    let mut window = None;
    let mut pos = 0;
    while fields.len() < 4 {
        let end = pos + bytes[pos..].iter().position(|&b| b == b'\n')?;
        let line = std::str::from_utf8(&bytes[pos..end]).ok()?;
        if let Some(rest) = line.strip_prefix("# window ") {
            let mut it = rest.split_whitespace().map(str::parse::<f64>);
            window = Some((it.next()?.ok()?, it.next()?.ok()?));
        } else {
            fields.extend(line.split_whitespace().map(str::to_owned));
        }
        pos = end + 1;
    }
    if fields[0] != "P5" || fields[3] != "65535" {
        return None;
    }
    let width: usize = fields[1].parse().ok()?;
    let height: usize = fields[2].parse().ok()?;
    let px = &bytes[pos..];
    if px.len() != 2 * width * height {
        return None;
    }
    Some(Pgm {
        width,
        height,
        window: window?,
        levels: px
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect(),
    })
}
