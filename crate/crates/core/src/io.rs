//! Binary and text formats.
//!
//! PATC (detector data): magic `PATC`, u16 version, u8 kind, u32 n_polar,
//! n_az, n_t, f64 polar_min, t_max, r_det, then f64 values; all little
//! endian. Only hemisphere grids are representable.
//!
//! PATV (volume): magic `PATV`, u16 version, u32 n, f64 half-width, then f64
//! values in x-major order.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::grid::{DataKind, DetectorData, SphereGrid, SphereTimeGrid, VolumeGrid, VolumeSpec};
use crate::{Error, Result};

pub const FORMAT_VERSION: u16 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Format(format!(
                "truncated input: need {} bytes at offset {}, have {}",
                n,
                self.pos,
                self.buf.len()
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn values(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n * 8)?;
        let out = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if self.pos != self.buf.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(out)
    }

    fn magic(&mut self, m: &[u8; 4]) -> Result<()> {
        let got = self.take(4)?;
        if got != m {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {}",
                String::from_utf8_lossy(got),
                String::from_utf8_lossy(m)
            )));
        }
        let v = self.u16()?;
        if v != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported format version {v}")));
        }
        Ok(())
    }
}

fn count(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("{what} = {v} does not fit in u32")))
}

pub fn encode_detector(data: &DetectorData) -> Result<Vec<u8>> {
    let g = data.grid;
    if !g.sphere.is_hemisphere() {
        return Err(Error::Unsupported(
            "PATC stores hemisphere grids only".into(),
        ));
    }
    let mut out = Vec::with_capacity(47 + data.values.len() * 8);
    out.extend_from_slice(b"PATC");
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(data.kind as u8);
    for n in [g.sphere.n_polar, g.sphere.n_az, g.n_t] {
        out.extend_from_slice(&count(n, "grid size")?.to_le_bytes());
    }
    for x in [g.sphere.polar_min, g.t_max, g.r_det] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for v in &data.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_detector(buf: &[u8]) -> Result<DetectorData> {
    let mut r = Reader { buf, pos: 0 };
    r.magic(b"PATC")?;
    let kind = DataKind::from_u8(r.u8()?)?;
    let n_polar = r.u32()? as usize;
    let n_az = r.u32()? as usize;
    let n_t = r.u32()? as usize;
    let polar_min = r.f64()?;
    let t_max = r.f64()?;
    let r_det = r.f64()?;
    let sphere = SphereGrid::hemisphere(n_polar, n_az, polar_min)
        .map_err(|e| Error::Format(format!("invalid grid header: {e}")))?;
    let grid = SphereTimeGrid::new(sphere, n_t, t_max, r_det)
        .map_err(|e| Error::Format(format!("invalid grid header: {e}")))?;
    let values = r.values(grid.len())?;
    Ok(DetectorData { grid, kind, values })
}

pub fn encode_volume(vol: &VolumeGrid) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(18 + vol.values.len() * 8);
    out.extend_from_slice(b"PATV");
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&count(vol.spec.n, "volume size")?.to_le_bytes());
    out.extend_from_slice(&vol.spec.half_width.to_le_bytes());
    for v in &vol.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_volume(buf: &[u8]) -> Result<VolumeGrid> {
    let mut r = Reader { buf, pos: 0 };
    r.magic(b"PATV")?;
    let n = r.u32()? as usize;
    let h = r.f64()?;
    let spec =
        VolumeSpec::new(n, h).map_err(|e| Error::Format(format!("invalid volume header: {e}")))?;
    let values = r.values(spec.len())?;
    Ok(VolumeGrid { spec, values })
}

pub fn write_detector<W: Write>(w: &mut W, data: &DetectorData) -> Result<()> {
    w.write_all(&encode_detector(data)?)?;
    Ok(())
}

pub fn read_detector<R: Read>(r: &mut R) -> Result<DetectorData> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    decode_detector(&buf)
}

pub fn write_volume<W: Write>(w: &mut W, vol: &VolumeGrid) -> Result<()> {
    w.write_all(&encode_volume(vol)?)?;
    Ok(())
}

pub fn read_volume<R: Read>(r: &mut R) -> Result<VolumeGrid> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    decode_volume(&buf)
}

/// CSV with header `theta_polar,theta_az,t,value`, 17 significant digits.
pub fn detector_to_csv(data: &DetectorData) -> String {
    let g = data.grid;
    let mut out = String::from("theta_polar,theta_az,t,value\n");
    for i in 0..g.sphere.n_polar {
        for j in 0..g.sphere.n_az {
            for k in 0..g.n_t {
                let _ = writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    g.sphere.polar(i),
                    g.sphere.azimuth(j),
                    g.time(k),
                    data.get(i, j, k)
                );
            }
        }
    }
    out
}

/// Parse the CSV written by [`detector_to_csv`] back into rows.
pub fn parse_csv_rows(text: &str, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines();
    lines
        .next()
        .ok_or_else(|| Error::Format("empty CSV".into()))?;
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let row: Vec<f64> = l
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("bad CSV number in {l:?}: {e}")))?;
            if row.len() != columns {
                return Err(Error::Format(format!(
                    "expected {columns} columns, got {} in {l:?}",
                    row.len()
                )));
            }
            Ok(row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DetectorData {
        let g =
            SphereTimeGrid::new(SphereGrid::hemisphere(3, 4, 0.2).unwrap(), 5, 2.0, 1.0).unwrap();
        let mut d = DetectorData::zeros(g, DataKind::P);
        d.values
            .iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v = (i as f64 * 0.37).sin() / 3.0);
        d
    }

    #[test]
    fn detector_round_trip() {
        let d = sample();
        let bytes = encode_detector(&d).unwrap();
        assert_eq!(&bytes[..4], b"PATC");
        assert_eq!(bytes.len(), 4 + 2 + 1 + 12 + 24 + 8 * d.values.len());
        let back = decode_detector(&bytes).unwrap();
        assert_eq!(back, d);
        assert_eq!(encode_detector(&back).unwrap(), bytes);
    }

    #[test]
    fn volume_round_trip() {
        let spec = VolumeSpec::new(3, 1.5).unwrap();
        let v = VolumeGrid {
            spec,
            values: (0..27).map(|i| i as f64 / 7.0).collect(),
        };
        let b = encode_volume(&v).unwrap();
        assert_eq!(decode_volume(&b).unwrap(), v);
    }

    #[test]
    fn corrupt_inputs() {
        let mut b = encode_detector(&sample()).unwrap();
        assert!(decode_detector(&b[..b.len() - 1]).is_err());
        b[0] = b'X';
        assert!(matches!(decode_detector(&b), Err(Error::Format(_))));
        let mut b = encode_detector(&sample()).unwrap();
        b[6] = 9;
        assert!(decode_detector(&b).is_err());
        let mut b = encode_detector(&sample()).unwrap();
        b.push(0);
        assert!(decode_detector(&b).is_err());
    }

    #[test]
    fn full_grid_not_encodable() {
        let g = SphereTimeGrid::new(SphereGrid::full(5, 4, 0.2).unwrap(), 5, 2.0, 1.0).unwrap();
        assert!(encode_detector(&DetectorData::zeros(g, DataKind::P)).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let d = sample();
        let rows = parse_csv_rows(&detector_to_csv(&d), 4).unwrap();
        assert_eq!(rows.len(), d.values.len());
        for (r, v) in rows.iter().zip(&d.values) {
            assert_eq!(r[3], *v);
        }
    }
}
