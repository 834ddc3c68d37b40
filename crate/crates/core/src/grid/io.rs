//! Flat binary and CSV encodings of [`SampledFunction`].
//!
//! Binary layout, all little-endian:
//!
//! | offset | type | field |
//! |--------|------|-------|
//! | 0  | u64 | dimension `d` |
//! | 8  | u64 | period `L` |
//! | 16 | u64 | points per unit `n` |
//! | 24 | f64 pairs | `(re, im)` for each sample, row-major, last axis fastest |
//!
//! The file is exactly `24 + 16 (L n)^d` bytes.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{GridError, Result, SampledFunction, TorusGrid};

pub fn write_binary<W: Write>(f: &SampledFunction, mut w: W) -> Result<()> {
    let g = f.grid();
    for v in [g.dim(), g.period(), g.points_per_unit()] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for z in f.values() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<SampledFunction> {
    let mut word = [0u8; 8];
    let mut header = [0usize; 3];
    for h in &mut header {
        r.read_exact(&mut word)?;
        *h = usize::try_from(u64::from_le_bytes(word))
            .map_err(|_| GridError::Format("header field overflows usize".into()))?;
    }
    let grid = TorusGrid::new(header[0], header[1], header[2])?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        r.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        r.read_exact(&mut word)?;
        let im = f64::from_le_bytes(word);
        values.push(Complex64::new(re, im));
    }
    if r.read(&mut word)? != 0 {
        return Err(GridError::Format("trailing bytes after sample data".into()));
    }
    SampledFunction::new(grid, values)
}

/// CSV with header `x1,..,xd,re,im`; coordinates are the sample points in `[0, L)^d`.
pub fn write_csv<W: Write>(f: &SampledFunction, mut w: W) -> Result<()> {
    let g = f.grid();
    let cols: Vec<String> = (1..=g.dim()).map(|a| format!("x{a}")).collect();
    writeln!(w, "{},re,im", cols.join(","))?;
    for (k, z) in f.values().iter().enumerate() {
        let x: Vec<String> = g.point(k).iter().map(|v| v.to_string()).collect();
        writeln!(w, "{},{},{}", x.join(","), z.re, z.im)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn binary_round_trip(vals in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 16)) {
            let g = TorusGrid::new(2, 2, 2).unwrap();
            let f = SampledFunction::new(g, vals.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap();
            let mut buf = Vec::new();
            write_binary(&f, &mut buf).unwrap();
            prop_assert_eq!(buf.len(), 24 + 16 * 16);
            let back = read_binary(buf.as_slice()).unwrap();
            prop_assert_eq!(back.values(), f.values());
        }
    }

    #[test]
    fn header_layout() {
        let g = TorusGrid::new(1, 2, 1).unwrap();
        let f = SampledFunction::new(g, vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.0)])
            .unwrap();
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        assert_eq!(&buf[0..8], &1u64.to_le_bytes());
        assert_eq!(&buf[8..16], &2u64.to_le_bytes());
        assert_eq!(&buf[16..24], &1u64.to_le_bytes());
        assert_eq!(&buf[24..32], &1.0f64.to_le_bytes());
        assert_eq!(&buf[32..40], &(-2.0f64).to_le_bytes());
        buf.push(0);
        assert!(matches!(
            read_binary(buf.as_slice()),
            Err(GridError::Format(_))
        ));
    }

    #[test]
    fn csv_rows() {
        let g = TorusGrid::new(1, 2, 1).unwrap();
        let f = SampledFunction::new(g, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)])
            .unwrap();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x1,re,im\n0,1,0\n1,0,1\n");
    }
}
