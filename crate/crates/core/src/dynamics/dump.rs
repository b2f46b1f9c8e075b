//! Compact binary dump of a trajectory with a full event log.
//!
//! Layout (little endian): magic, version, `n`, `T`, seed, tilt hash, packed
//! initial occupations, event count, then one record per event: a kind byte
//! followed by the LEB128 delta of the event time's bit pattern and, for
//! exchanges, the LEB128 pair index. Event times are nonnegative, so their bit
//! patterns are monotone and the encoding is lossless.

use std::io::{Read, Write};

use crate::dynamics::trajectory::{Event, EventKind, Snapshot, Trajectory};
use crate::error::{Error, Result};
use crate::model::Configuration;

const MAGIC: &[u8; 8] = b"SSRWDUMP";
const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub seed: u64,
    pub tilt_hash: u64,
    pub trajectory: Trajectory,
}

fn put_varint<W: Write>(w: &mut W, mut v: u64) -> Result<()> {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            w.write_all(&[byte])?;
            return Ok(());
        }
        w.write_all(&[byte | 0x80])?;
    }
}

fn get_varint<R: Read>(r: &mut R) -> Result<u64> {
    let mut v = 0u64;
    for shift in (0..70).step_by(7) {
        let b = get_u8(r)?;
        if shift == 63 && b > 1 {
            return Err(Error::Dump("varint overflow".into()));
        }
        v |= ((b & 0x7f) as u64) << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
    }
    Err(Error::Dump("varint overflow".into()))
}

fn get_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

fn get_array<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn write_dump<W: Write>(w: &mut W, traj: &Trajectory, seed: u64, tilt_hash: u64) -> Result<()> {
    let events = traj.events().ok_or(Error::MissingEventLog)?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(traj.n() as u64).to_le_bytes())?;
    w.write_all(&traj.t_max().to_le_bytes())?;
    w.write_all(&seed.to_le_bytes())?;
    w.write_all(&tilt_hash.to_le_bytes())?;
    let mut packed = vec![0u8; traj.n().div_ceil(8)];
    for (i, &b) in traj.initial().as_slice().iter().enumerate() {
        packed[i / 8] |= b << (i % 8);
    }
    w.write_all(&packed)?;
    w.write_all(&(events.len() as u64).to_le_bytes())?;
    let mut prev = 0u64;
    for e in events {
        let bits = e.t.to_bits();
        if e.t < 0.0 || bits < prev {
            return Err(Error::Dump(format!("event times not monotone at t = {}", e.t)));
        }
        match e.kind {
            EventKind::Exchange(p) => {
                w.write_all(&[0])?;
                put_varint(w, bits - prev)?;
                put_varint(w, p as u64)?;
            }
            EventKind::Walk(z) => {
                w.write_all(&[if z > 0 { 1 } else { 2 }])?;
                put_varint(w, bits - prev)?;
            }
        }
        prev = bits;
    }
    Ok(())
}

pub fn read_dump<R: Read>(r: &mut R) -> Result<Dump> {
    if &get_array::<_, 8>(r)? != MAGIC {
        return Err(Error::Dump("bad magic".into()));
    }
    let version = u16::from_le_bytes(get_array(r)?);
    if version != VERSION {
        return Err(Error::Dump(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(get_array(r)?) as usize;
    let lattice = crate::model::TorusLattice::new(n)?;
    let t_max = f64::from_le_bytes(get_array(r)?);
    let seed = u64::from_le_bytes(get_array(r)?);
    let tilt_hash = u64::from_le_bytes(get_array(r)?);
    let mut packed = vec![0u8; n.div_ceil(8)];
    r.read_exact(&mut packed)?;
    let occ: Vec<u8> = (0..n).map(|i| (packed[i / 8] >> (i % 8)) & 1).collect();
    let initial = Configuration::new(occ)?;
    let count = u64::from_le_bytes(get_array(r)?);

    let mut occ = initial.as_slice().to_vec();
    let mut events = Vec::with_capacity(count.min(1 << 24) as usize);
    let mut walk_events = Vec::new();
    let (mut n_plus, mut n_minus, mut exchanges) = (0u64, 0u64, 0u64);
    let mut bits = 0u64;
    for _ in 0..count {
        let kind = get_u8(r)?;
        bits = bits
            .checked_add(get_varint(r)?)
            .ok_or_else(|| Error::Dump("time overflow".into()))?;
        let t = f64::from_bits(bits);
        let kind = match kind {
            0 => {
                let p = get_varint(r)? as usize;
                if p >= lattice.pair_count() {
                    return Err(Error::Dump(format!("pair index {p} out of range")));
                }
                let (a, b) = lattice.pair(p);
                occ.swap(a, b);
                exchanges += 1;
                EventKind::Exchange(p as u32)
            }
            1 | 2 => {
                let z: i8 = if kind == 1 { 1 } else { -1 };
                if z > 0 {
                    n_plus += 1;
                } else {
                    n_minus += 1;
                }
                walk_events.push((t, z));
                EventKind::Walk(z)
            }
            k => return Err(Error::Dump(format!("unknown event kind {k}"))),
        };
        events.push(Event { t, kind });
    }
    let final_config = Configuration::new(occ)?;
    let lifted = n_plus as i64 - n_minus as i64;
    let snapshots = vec![
        Snapshot { t: 0.0, config: initial.clone(), lifted: 0, n_plus: 0, n_minus: 0 },
        Snapshot { t: t_max, config: final_config.clone(), lifted, n_plus, n_minus },
    ];
    Ok(Dump {
        seed,
        tilt_hash,
        trajectory: Trajectory {
            n,
            t_max,
            initial,
            final_config,
            n_plus,
            n_minus,
            walk_events,
            events: Some(events),
            snapshots,
            exchange_count: exchanges,
            rejected: 0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn varint_roundtrip() {
        for v in [0u64, 1, 127, 128, 300, u64::MAX / 3, u64::MAX] {
            let mut buf = Vec::new();
            put_varint(&mut buf, v).unwrap();
            assert_eq!(get_varint(&mut buf.as_slice()).unwrap(), v);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(read_dump(&mut &b"NOTADUMP........"[..]), Err(Error::Dump(_))));
    }
}
