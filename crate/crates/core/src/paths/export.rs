//! Path serialization.
//!
//! CSV: header `t,value`, one row per grid point, floats in shortest round-trip form.
//!
//! Binary (all integers and floats little-endian):
//!
//! | offset     | size  | content                         |
//! |------------|-------|---------------------------------|
//! | 0          | 8     | magic `b"ZSPATH01"`             |
//! | 8          | 8     | grid length `n` as `u64`        |
//! | 16         | 8n    | grid times, `f64`               |
//! | 16 + 8n    | 8n    | path values, `f64`              |

use std::io::{self, Read, Write};

use crate::paths::{SamplePath, TimeGrid};

pub const BINARY_MAGIC: &[u8; 8] = b"ZSPATH01";

pub fn write_csv<W: Write>(path: &SamplePath, mut out: W) -> io::Result<()> {
    writeln!(out, "t,value")?;
    for (t, v) in path.times().iter().zip(path.values()) {
        writeln!(out, "{t},{v}")?;
    }
    Ok(())
}

pub fn write_binary<W: Write>(path: &SamplePath, mut out: W) -> io::Result<()> {
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(path.len() as u64).to_le_bytes())?;
    for t in path.times() {
        out.write_all(&t.to_le_bytes())?;
    }
    for v in path.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> io::Result<SamplePath> {
    let invalid = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(invalid("bad magic".into()));
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    let mut read_f64s = |count: usize| -> io::Result<Vec<f64>> {
        (0..count)
            .map(|_| {
                input.read_exact(&mut word)?;
                Ok(f64::from_le_bytes(word))
            })
            .collect()
    };
    let times = read_f64s(n)?;
    let values = read_f64s(n)?;
    let grid = TimeGrid::new(times).map_err(|e| invalid(e.to_string()))?;
    SamplePath::new(grid, values, None).map_err(|e| invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::sample_brownian;
    use crate::rng::SeedRecord;
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        let g = TimeGrid::new(vec![0.0, 0.5]).unwrap();
        let p = SamplePath::new(g, vec![0.0, -0.25], None).unwrap();
        let mut buf = Vec::new();
        write_csv(&p, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,value\n0,0\n0.5,-0.25\n");
    }

    #[test]
    fn binary_header() {
        let p = sample_brownian(&TimeGrid::uniform(3, 1.0).unwrap(), SeedRecord::new(1, 1));
        let mut buf = Vec::new();
        write_binary(&p, &mut buf).unwrap();
        assert_eq!(&buf[..8], BINARY_MAGIC);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 4);
        assert_eq!(buf.len(), 16 + 2 * 8 * 4);
        assert!(read_binary(&b"NOTAPATH\0\0\0\0\0\0\0\0"[..]).is_err());
    }

    proptest! {
        #[test]
        fn binary_round_trip_is_bit_exact(n in 1usize..200, seed in any::<u64>(), horizon in 0.01f64..50.0) {
            let p = sample_brownian(&TimeGrid::uniform(n, horizon).unwrap(), SeedRecord::new(seed, 0));
            let mut buf = Vec::new();
            write_binary(&p, &mut buf).unwrap();
            let back = read_binary(&buf[..]).unwrap();
            prop_assert_eq!(back.times(), p.times());
            prop_assert_eq!(back.values(), p.values());
        }
    }
}
