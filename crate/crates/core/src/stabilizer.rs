//! Exhaustive search for the stabiliser of `U` in the flag group.
//!
//! `P_∞` is the only point of `U` with the subline property, so every
//! collineation stabilising `U` fixes `P_∞` and its tangent `ℓ_∞`. Such a
//! collineation has an upper triangular matrix
//! `(1, x12, x13 | 0, x22, x23 | 0, 0, x33)`, possibly with a Frobenius twist.
//! The scan covers exactly that set.
//!
//! Shards are indexed by `(frob, x22, x33)` and scanned in parallel. A shard
//! first maps `(1,0,0)` to `(1, x12, x13)`; a non-member rejects all `q^2`
//! choices of `x23` at once. The remaining candidates run through the frozen
//! probes of [`crate::collineation::PROBE_PARAMS`] and then a full check.
//!
//! # Checkpoint format
//!
//! A header `b"BTSC"`, `u32` version, `u32` e, `u8` semilinear flag, followed
//! by one record per finished shard. A record is a `u32` byte length and then
//! the payload: `u32` shard id, `u64` candidates scanned, `[u64; 9]` rejection
//! counts, `u32` survivor count, and per survivor `u32` frob and the five
//! entries `x12 x13 x22 x23 x33` as `u32`. Integers are little-endian. A
//! truncated trailing record is discarded on resume.

use std::collections::{BTreeSet, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::PathBuf;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::collineation::{g_psi_group, probe_points, Collineation, GroupElementUV};
use crate::error::{Error, Result};
use crate::field::{Felt, FieldCtx};
use crate::unital::UnitalSet;

pub const DEFAULT_BUDGET: u128 = 10_000_000_000;
const MAGIC: &[u8; 4] = b"BTSC";
const VERSION: u32 = 1;
/// Probe slots: the block probe, seven further probes, the full check.
pub const REJECTION_SLOTS: usize = 9;

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub budget: u128,
    pub checkpoint: Option<PathBuf>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { budget: DEFAULT_BUDGET, checkpoint: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilizerReport {
    pub e: u32,
    pub semilinear: bool,
    pub shards: u64,
    pub resumed_shards: u64,
    pub candidate_space: u128,
    pub candidates_scanned: u128,
    pub count: usize,
    pub elements: Vec<Collineation>,
    /// Rejections per probe slot; the last slot is the full check.
    pub rejections: Vec<u64>,
    pub all_of_form_m_uv: bool,
    /// Only computed for the semilinear scan.
    pub equals_g_psi: Option<bool>,
    pub orbit_size: u128,
    pub description: String,
    pub reduction: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct ShardResult {
    id: u32,
    scanned: u64,
    rejections: [u64; REJECTION_SLOTS],
    survivors: Vec<(u32, [u32; 5])>,
}

impl ShardResult {
    fn encode(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(88 + 24 * self.survivors.len());
        buf.extend_from_slice(&self.id.to_le_bytes());
        buf.extend_from_slice(&self.scanned.to_le_bytes());
        for r in self.rejections {
            buf.extend_from_slice(&r.to_le_bytes());
        }
        buf.extend_from_slice(&(self.survivors.len() as u32).to_le_bytes());
        for (frob, x) in &self.survivors {
            buf.extend_from_slice(&frob.to_le_bytes());
            for v in x {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let mut out = (buf.len() as u32).to_le_bytes().to_vec();
        out.extend(buf);
        out
    }

    fn decode(payload: &[u8]) -> Option<Self> {
        let mut words = Reader(payload);
        let id = words.u32()?;
        let scanned = words.u64()?;
        let mut rejections = [0; REJECTION_SLOTS];
        for r in &mut rejections {
            *r = words.u64()?;
        }
        let n = words.u32()?;
        let mut survivors = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let frob = words.u32()?;
            let mut x = [0; 5];
            for v in &mut x {
                *v = words.u32()?;
            }
            survivors.push((frob, x));
        }
        words.0.is_empty().then_some(ShardResult { id, scanned, rejections, survivors })
    }
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Option<[u8; N]> {
        let (head, rest) = self.0.split_first_chunk::<N>()?;
        self.0 = rest;
        Some(*head)
    }
    fn u32(&mut self) -> Option<u32> {
        self.take().map(u32::from_le_bytes)
    }
    fn u64(&mut self) -> Option<u64> {
        self.take().map(u64::from_le_bytes)
    }
}

fn header(e: u32, semilinear: bool) -> Vec<u8> {
    let mut h = MAGIC.to_vec();
    h.extend_from_slice(&VERSION.to_le_bytes());
    h.extend_from_slice(&e.to_le_bytes());
    h.push(semilinear as u8);
    h
}

/// Reads finished shards. Returns an empty map for a missing file.
fn load_checkpoint(path: &PathBuf, e: u32, semilinear: bool) -> Result<HashMap<u32, ShardResult>> {
    let mut bytes = Vec::new();
    match File::open(path) {
        Ok(mut f) => {
            f.read_to_end(&mut bytes)?;
        }
        Err(err) if err.kind() == std::io::ErrorKind::NotFound => return Ok(HashMap::new()),
        Err(err) => return Err(err.into()),
    }
    if bytes.is_empty() {
        return Ok(HashMap::new());
    }
    let head = header(e, semilinear);
    if !bytes.starts_with(&head) {
        return Err(Error::InvalidArgument(format!(
            "checkpoint {} belongs to a different scan",
            path.display()
        )));
    }
    let mut rest = &bytes[head.len()..];
    let mut done = HashMap::new();
    while let Some((len, tail)) = rest.split_first_chunk::<4>() {
        let len = u32::from_le_bytes(*len) as usize;
        let Some(payload) = tail.get(..len) else { break };
        let Some(record) = ShardResult::decode(payload) else { break };
        done.insert(record.id, record);
        rest = &tail[len..];
    }
    Ok(done)
}

struct Shard {
    frob: u32,
    x22: Felt,
    x33: Felt,
}

/// Affine points of `U` after the Frobenius twist, probes first.
fn twisted_points(ctx: &FieldCtx, u: &UnitalSet, frob: u32) -> Vec<(Felt, Felt)> {
    let probes = probe_points(ctx);
    let rest = u.points().iter().filter(|p| p.is_affine() && !probes.contains(p));
    probes
        .iter()
        .chain(rest)
        .map(|p| {
            let [_, y, z] = p.coords();
            (ctx.frobenius(y, frob), ctx.frobenius(z, frob))
        })
        .collect()
}

fn scan_shard(
    ctx: &FieldCtx,
    u: &UnitalSet,
    twisted: &[(Felt, Felt)],
    id: u32,
    shard: &Shard,
) -> ShardResult {
    let n = ctx.big_order() as usize;
    let member = |y: Felt, z: Felt| u.contains_index(y.bits() as usize * n + z.bits() as usize);
    let probes = probe_points(ctx).len();
    // Row contributions of x22 and x33 are fixed across the shard.
    let fixed: Vec<(Felt, Felt, Felt)> = twisted
        .iter()
        .map(|&(y, z)| (y, ctx.mul(y, shard.x22), ctx.mul(z, shard.x33)))
        .collect();
    let mut rejections = [0u64; REJECTION_SLOTS];
    let mut survivors = Vec::new();
    for x12 in ctx.elements() {
        for x13 in ctx.elements() {
            if !member(x12, x13) {
                rejections[0] += n as u64;
                continue;
            }
            'x23: for x23 in ctx.elements() {
                for (i, &(y, a, b)) in fixed.iter().enumerate().skip(1) {
                    if !member(x12 + a, x13 + ctx.mul(y, x23) + b) {
                        rejections[i.min(probes)] += 1;
                        continue 'x23;
                    }
                }
                survivors.push((
                    shard.frob,
                    [x12, x13, shard.x22, x23, shard.x33].map(|x| x.bits()),
                ));
            }
        }
    }
    ShardResult { id, scanned: (n as u64).pow(3), rejections, survivors }
}

fn survivor_collineation(ctx: &FieldCtx, (frob, x): &(u32, [u32; 5])) -> Collineation {
    let [x12, x13, x22, x23, x33] = x.map(Felt::new);
    let (o, z) = (Felt::ONE, Felt::ZERO);
    Collineation::new(ctx, [[o, x12, x13], [z, x22, x23], [z, z, x33]], *frob)
        .expect("x22 x33 nonzero")
}

/// Exhaustive scan of the flag group for elements stabilising `U`.
pub fn exhaustive_flag_stabilizer(
    ctx: &FieldCtx,
    u: &UnitalSet,
    semilinear: bool,
    opts: &ScanOptions,
) -> Result<StabilizerReport> {
    let n = ctx.big_order() as u128;
    let frobs = if semilinear { ctx.degree() } else { 1 };
    let shard_count = frobs as u128 * (n - 1) * (n - 1);
    let candidate_space = shard_count * n * n * n;
    if candidate_space > opts.budget {
        return Err(Error::BudgetExceeded { candidates: candidate_space, budget: opts.budget });
    }

    let nonzero: Vec<Felt> = ctx.elements().skip(1).collect();
    let shard_of = |id: u32| {
        let m = nonzero.len() as u32;
        Shard {
            frob: id / (m * m),
            x22: nonzero[((id / m) % m) as usize],
            x33: nonzero[(id % m) as usize],
        }
    };

    let mut done = match &opts.checkpoint {
        Some(path) => load_checkpoint(path, ctx.e(), semilinear)?,
        None => HashMap::new(),
    };
    let resumed_shards = done.len() as u64;
    let writer = match &opts.checkpoint {
        Some(path) => {
            let fresh = done.is_empty();
            let mut file = if fresh {
                File::create(path)?
            } else {
                OpenOptions::new().write(true).open(path)?
            };
            if fresh {
                file.write_all(&header(ctx.e(), semilinear))?;
            } else {
                // Rewrite the intact records so a torn tail is dropped.
                file.set_len(0)?;
                file.write_all(&header(ctx.e(), semilinear))?;
                let mut ids: Vec<_> = done.keys().copied().collect();
                ids.sort_unstable();
                for id in ids {
                    file.write_all(&done[&id].encode())?;
                }
            }
            file.flush()?;
            Some(Mutex::new(BufWriter::new(file)))
        }
        None => None,
    };

    let twisted: Vec<Vec<(Felt, Felt)>> = (0..frobs).map(|k| twisted_points(ctx, u, k)).collect();
    let pending: Vec<u32> = (0..shard_count as u32).filter(|id| !done.contains_key(id)).collect();
    let fresh: Vec<ShardResult> = pending
        .par_iter()
        .map(|&id| -> Result<ShardResult> {
            let shard = shard_of(id);
            let result = scan_shard(ctx, u, &twisted[shard.frob as usize], id, &shard);
            if let Some(w) = &writer {
                let mut w = w.lock().expect("checkpoint writer");
                w.write_all(&result.encode())?;
                w.flush()?;
            }
            Ok(result)
        })
        .collect::<Result<_>>()?;
    for r in fresh {
        done.insert(r.id, r);
    }

    let mut candidates_scanned = 0u128;
    let mut rejections = vec![0u64; REJECTION_SLOTS];
    let mut elements = BTreeSet::new();
    for r in done.values() {
        candidates_scanned += r.scanned as u128;
        for (acc, x) in rejections.iter_mut().zip(r.rejections) {
            *acc += x;
        }
        elements.extend(r.survivors.iter().map(|s| survivor_collineation(ctx, s)));
    }
    // Records read back from a checkpoint are rechecked through the action.
    let elements: Vec<Collineation> = elements
        .into_iter()
        .filter(|c| crate::collineation::stabilizes(ctx, c, u, 0))
        .collect();

    let all_of_form_m_uv =
        elements.iter().all(|c| GroupElementUV::from_collineation(ctx, c).is_some());
    let equals_g_psi = semilinear.then(|| {
        let expected = g_psi_group(ctx);
        expected.len() == elements.len() && elements.iter().all(|c| expected.contains(c))
    });
    let count = elements.len();
    let description = match (semilinear, all_of_form_m_uv, equals_g_psi) {
        (false, true, _) if count as u128 == n => "G = { M_{u,v} : u, v in F_q }".to_string(),
        (true, _, Some(true)) => "G . <psi>".to_string(),
        _ => format!("{count} elements, not matching the expected group"),
    };
    Ok(StabilizerReport {
        e: ctx.e(),
        semilinear,
        shards: shard_count as u64,
        resumed_shards,
        candidate_space,
        candidates_scanned,
        count,
        elements,
        rejections,
        all_of_form_m_uv,
        equals_g_psi,
        orbit_size: if count > 0 { candidate_space / count as u128 } else { 0 },
        description,
        reduction: "P_inf is the unique point of U with the subline property, so every \
                    stabiliser of U fixes P_inf and its tangent l_inf and lies in the flag group scanned",
    })
}
