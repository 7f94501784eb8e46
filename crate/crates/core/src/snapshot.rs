//! Binary field snapshots and their text manifests.
//!
//! One record: magic `YMH1`, family (u8: 0 su, 1 so), n (u32), N (u32),
//! L (f64), dealias (u8), representation (u8: 0 physical, 1 spectral),
//! component count (u32), a 64-byte config hash, then every component's
//! N³ complex values as (re, im) pairs in row-major order. All numbers
//! little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::algebra::{Family, LieAlgebra};
use crate::error::{Result, YmhError};
use crate::grid::{AlgebraField, Dealias, Grid, GridSpec, Repr, ScalarField, C64};

const MAGIC: &[u8; 4] = b"YMH1";
const HASH_LEN: usize = 64;

fn hash_bytes(hash: &str) -> [u8; HASH_LEN] {
    let mut out = [b' '; HASH_LEN];
    for (o, b) in out.iter_mut().zip(hash.bytes()) {
        *o = b;
    }
    out
}

pub fn write_field(mut w: impl Write, field: &AlgebraField, config_hash: &str) -> Result<()> {
    let kind = field.algebra().kind();
    let spec = field.grid().spec();
    w.write_all(MAGIC)?;
    w.write_all(&[match kind.family {
        Family::SU => 0,
        Family::SO => 1,
    }])?;
    w.write_all(&(kind.n as u32).to_le_bytes())?;
    w.write_all(&(spec.n as u32).to_le_bytes())?;
    w.write_all(&spec.l.to_le_bytes())?;
    w.write_all(&[match spec.dealias {
        Dealias::None => 0,
        Dealias::TwoThirds => 1,
    }])?;
    w.write_all(&[match field.repr() {
        Repr::Physical => 0,
        Repr::Spectral => 1,
    }])?;
    w.write_all(&(field.comps().len() as u32).to_le_bytes())?;
    w.write_all(&hash_bytes(config_hash))?;
    for c in field.comps() {
        for v in c.data() {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn take<const K: usize>(r: &mut impl Read) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    r.read_exact(&mut b).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => YmhError::Format("truncated snapshot".into()),
        _ => e.into(),
    })?;
    Ok(b)
}

/// Reads one record onto `grid` when given (it must match), else a new grid.
/// Returns the field and the config hash stored with it.
pub fn read_field(
    mut r: impl Read,
    algebra: &Arc<LieAlgebra>,
    grid: Option<&Arc<Grid>>,
) -> Result<(AlgebraField, String)> {
    if &take::<4>(&mut r)? != MAGIC {
        return Err(YmhError::Format("bad magic, expected YMH1".into()));
    }
    let family = match take::<1>(&mut r)?[0] {
        0 => Family::SU,
        1 => Family::SO,
        t => return Err(YmhError::Format(format!("unknown algebra family tag {t}"))),
    };
    let n_alg = u32::from_le_bytes(take(&mut r)?) as usize;
    let kind = algebra.kind();
    if kind.family != family || kind.n != n_alg {
        return Err(YmhError::Format(format!("snapshot algebra does not match {kind}")));
    }
    let n = u32::from_le_bytes(take(&mut r)?) as usize;
    let l = f64::from_le_bytes(take(&mut r)?);
    let dealias = match take::<1>(&mut r)?[0] {
        0 => Dealias::None,
        1 => Dealias::TwoThirds,
        t => return Err(YmhError::Format(format!("unknown dealias tag {t}"))),
    };
    let repr = match take::<1>(&mut r)?[0] {
        0 => Repr::Physical,
        1 => Repr::Spectral,
        t => return Err(YmhError::Format(format!("unknown representation tag {t}"))),
    };
    let dim = u32::from_le_bytes(take(&mut r)?) as usize;
    if dim != algebra.dim() {
        return Err(YmhError::Format(format!("{dim} components, algebra has {}", algebra.dim())));
    }
    let hash = String::from_utf8_lossy(&take::<HASH_LEN>(&mut r)?).trim_end().to_string();
    let spec = GridSpec::new(n, l, dealias)?;
    let grid = match grid {
        Some(g) if g.spec() == spec => g.clone(),
        Some(_) => return Err(YmhError::GridMismatch),
        None => Grid::new(spec),
    };
    let mut comps = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut data = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let re = f64::from_le_bytes(take(&mut r)?);
            let im = f64::from_le_bytes(take(&mut r)?);
            data.push(C64::new(re, im));
        }
        comps.push(ScalarField::new(&grid, repr, data));
    }
    Ok((AlgebraField::from_components(algebra, comps)?, hash))
}

/// Writes `<stem>.ymh` (records in order) and `<stem>.manifest`.
pub fn write_snapshot(
    stem: &Path,
    names: &[&str],
    fields: &[&AlgebraField],
    time: f64,
    config_hash: &str,
) -> Result<()> {
    if names.len() != fields.len() || fields.is_empty() {
        return Err(YmhError::Format("manifest names do not match the fields".into()));
    }
    let mut w = BufWriter::new(File::create(stem.with_extension("ymh"))?);
    for f in fields {
        write_field(&mut w, f, config_hash)?;
    }
    w.flush()?;
    let spec = fields[0].grid().spec();
    let mut m = File::create(stem.with_extension("manifest"))?;
    writeln!(m, "# config_hash={config_hash}")?;
    writeln!(m, "algebra={}", fields[0].algebra().kind())?;
    writeln!(m, "N={}", spec.n)?;
    writeln!(m, "L={:.17e}", spec.l)?;
    writeln!(m, "time={time:.17e}")?;
    writeln!(m, "components={}", names.join(","))?;
    Ok(())
}

/// Reads every record of `<stem>.ymh` onto one grid.
pub fn read_snapshot(stem: &Path, algebra: &Arc<LieAlgebra>, count: usize) -> Result<(Vec<AlgebraField>, String)> {
    let mut r = BufReader::new(File::open(stem.with_extension("ymh"))?);
    let (first, hash) = read_field(&mut r, algebra, None)?;
    let grid = first.grid().clone();
    let mut out = vec![first];
    for _ in 1..count {
        let (f, h) = read_field(&mut r, algebra, Some(&grid))?;
        if h != hash {
            return Err(YmhError::Format("records carry different config hashes".into()));
        }
        out.push(f);
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(YmhError::Format("trailing bytes after the last record".into()));
    }
    Ok((out, hash))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::algebra::AlgebraKind;
    use crate::nullform::random_algebra_field;
    use crate::system::{GaugeState, MANIFEST};

    fn setup() -> (Arc<LieAlgebra>, Arc<Grid>) {
        (Arc::new(LieAlgebra::new(AlgebraKind::su(2))), Grid::new(GridSpec::cube(4)))
    }

    #[test]
    fn field_round_trip_is_bitwise() {
        let (alg, g) = setup();
        let f = random_algebra_field(&alg, &g, 1, 0.7, &mut ChaCha8Rng::seed_from_u64(1));
        for field in [f.to_physical(), f.to_spectral()] {
            let mut buf = Vec::new();
            write_field(&mut buf, &field, "abc123").unwrap();
            assert_eq!(buf.len(), 4 + 1 + 4 + 4 + 8 + 1 + 1 + 4 + HASH_LEN + 3 * 64 * 16);
            let (back, hash) = read_field(buf.as_slice(), &alg, None).unwrap();
            assert_eq!(hash, "abc123");
            assert_eq!(back.repr(), field.repr());
            for (a, b) in back.comps().iter().zip(field.comps()) {
                assert_eq!(a.data(), b.data());
            }
        }
    }

    #[test]
    fn corrupt_records_are_rejected() {
        let (alg, g) = setup();
        let f = AlgebraField::zeros(&alg, &g, Repr::Physical);
        let mut buf = Vec::new();
        write_field(&mut buf, &f, "h").unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_field(bad.as_slice(), &alg, None), Err(YmhError::Format(_))));
        assert!(matches!(read_field(&buf[..buf.len() - 3], &alg, None), Err(YmhError::Format(_))));
        let so3 = Arc::new(LieAlgebra::new(AlgebraKind::so(3)));
        assert!(matches!(read_field(buf.as_slice(), &so3, None), Err(YmhError::Format(_))));
        let other = Grid::new(GridSpec::cube(8));
        assert!(matches!(read_field(buf.as_slice(), &alg, Some(&other)), Err(YmhError::GridMismatch)));
    }

    #[test]
    fn state_snapshot_round_trip() {
        let (alg, g) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let fields: Vec<AlgebraField> = (0..22).map(|_| random_algebra_field(&alg, &g, 1, 1.0, &mut rng)).collect();
        let state = GaugeState::from_fields(fields).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("state_0000");
        write_snapshot(&stem, &MANIFEST, &state.fields(), 0.25, "deadbeef").unwrap();
        let manifest = std::fs::read_to_string(stem.with_extension("manifest")).unwrap();
        assert!(manifest.starts_with("# config_hash=deadbeef\nalgebra=su(2)\nN=4\n"));
        assert!(manifest.contains("components=A0,A1,A2,A3,dtA0"));
        let (back, hash) = read_snapshot(&stem, &alg, 22).unwrap();
        assert_eq!(hash, "deadbeef");
        let back = GaugeState::from_fields(back).unwrap();
        assert_eq!(back.distance(&state).unwrap(), 0.0);
        assert!(read_snapshot(&stem, &alg, 21).is_err());
    }
}
