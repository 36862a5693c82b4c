//! In-process simulation of distributed DNF counting: a coordinator
//! broadcasts hash functions to k sites, each site solves its sub-formula
//! locally (FindMin rows, bucketing cells, or FindMaxRange grids), and the
//! coordinator merges the replies into the same estimate the centralized
//! counter would produce. Every message is charged its exact payload size
//! in bits on a ledger, so the communication-cost claims can be measured
//! rather than assumed.
//!
//! The bucketing protocol subsamples by trailing zeros rather than prefixes:
//! sites tag each survivor with `TrailZero(H[i](x))`, which is exactly what
//! the coordinator needs to re-run the level-raising logic on the merged
//! tuple set when sites finished at different levels. A site's cell at level
//! m is `{x : trail_zero(H[i](x)) >= m}`, an affine condition handled by the
//! same BoundedSAT machinery as prefix cells.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::counting::{estimation_sketch, ExecMode};
use crate::error::{Error, Result};
use crate::f0stream::{
    bucketing_estimate, minimum_estimate, select_r, ApproxParams, EstSketch,
};
use crate::formula::{DnfFormula, FormulaRef, DEFAULT_BRUTE_CAP};
use crate::gf2::BitString;
use crate::hashing::{
    pick_hash_functions, pick_poly_grid, trail_zero, HashCollection, HashFamily,
};
use crate::solvers::{bounded_sat_dnf, find_min, max_trailing_zeros_dnf, NpOracle};

/// Which distributed protocol runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Protocol {
    Bucketing,
    Minimum,
    Estimation,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Bucketing => "bucketing",
            Protocol::Minimum => "minimum",
            Protocol::Estimation => "estimation",
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bucketing" | "bucket" => Ok(Protocol::Bucketing),
            "minimum" | "min" => Ok(Protocol::Minimum),
            "estimation" | "est" => Ok(Protocol::Estimation),
            other => Err(Error::InvalidParams { msg: format!("unknown protocol '{other}'") }),
        }
    }
}

/// One site's share of the global formula.
#[derive(Clone, Debug)]
pub struct SiteInput {
    pub site: usize,
    pub formula: DnfFormula,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    CoordToSite,
    SiteToCoord,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::CoordToSite => "coord_to_site",
            Direction::SiteToCoord => "site_to_coord",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PayloadKind {
    HashFunctions,
    BucketingTuple,
    MinValues,
    EstCells,
}

impl PayloadKind {
    pub fn name(self) -> &'static str {
        match self {
            PayloadKind::HashFunctions => "hash_functions",
            PayloadKind::BucketingTuple => "bucketing_tuple",
            PayloadKind::MinValues => "min_values",
            PayloadKind::EstCells => "est_cells",
        }
    }
}

/// A typed message with its exact serialized payload size.
#[derive(Clone, Copy, Debug)]
pub struct ProtocolMessage {
    pub direction: Direction,
    pub kind: PayloadKind,
    pub site: usize,
    pub bits: u64,
}

/// Per-direction, per-kind bit totals, tracked at both endpoints.
#[derive(Clone, Debug, Default)]
pub struct CommLedger {
    sent: BTreeMap<(Direction, PayloadKind), u64>,
    received: BTreeMap<(Direction, PayloadKind), u64>,
    pub messages: u64,
}

impl CommLedger {
    fn record_send(&mut self, msg: &ProtocolMessage) {
        *self.sent.entry((msg.direction, msg.kind)).or_insert(0) += msg.bits;
        self.messages += 1;
    }

    fn record_receive(&mut self, msg: &ProtocolMessage) {
        *self.received.entry((msg.direction, msg.kind)).or_insert(0) += msg.bits;
    }

    pub fn sent_bits(&self, direction: Direction) -> u64 {
        self.sent.iter().filter(|((d, _), _)| *d == direction).map(|(_, b)| b).sum()
    }

    pub fn received_bits(&self, direction: Direction) -> u64 {
        self.received.iter().filter(|((d, _), _)| *d == direction).map(|(_, b)| b).sum()
    }

    pub fn total_bits(&self) -> u64 {
        self.sent.values().sum()
    }

    /// Sent and received totals agree per direction (lossless transport).
    pub fn conserved(&self) -> bool {
        self.sent == self.received
    }

    /// Structured text report: one line per (direction, kind).
    pub fn report(&self) -> String {
        let mut out = String::new();
        for ((dir, kind), bits) in &self.sent {
            out.push_str(&format!(
                "comm direction={} kind={} bits={bits}\n",
                dir.name(),
                kind.name()
            ));
        }
        out.push_str(&format!(
            "comm total_bits={} messages={}\n",
            self.total_bits(),
            self.messages
        ));
        out
    }
}

impl fmt::Display for CommLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.report())
    }
}

/// Protocol-specific coordinator state exposed for tests.
#[derive(Clone, Debug)]
pub enum DistRows {
    Bucketing(Vec<(u64, u32)>),
    Minimum(Vec<BTreeSet<BitString>>),
    Estimation(EstSketch),
}

/// Result of a protocol run.
#[derive(Clone, Debug)]
pub struct DistOutcome {
    pub estimate: f64,
    pub ledger: CommLedger,
    pub rows: DistRows,
}

/// Bits needed for one value in `0..=n` (levels and trailing-zero counts).
fn tz_bits(n: usize) -> u64 {
    (u64::BITS - (n as u64).leading_zeros()) as u64
}

/// Output width for the global dedup hash G: with T total tuples, collisions
/// among all pairs stay below delta/2 when `2^m >= 2 T^2 / delta`
/// (birthday bound), so `m = ceil(log2(2 T^2 / delta))`.
///
/// `sites_max_tuples` is the per-site tuple bound; when absent it defaults
/// to the sketch capacity `t * thresh` induced by (eps, delta).
pub fn derive_g_width(
    k: usize,
    eps: f64,
    delta: f64,
    sites_max_tuples: Option<u64>,
) -> Result<u32> {
    let params = ApproxParams::new(eps, delta)?;
    let per_site = sites_max_tuples.unwrap_or(params.t as u64 * params.thresh);
    let total = (k as f64) * (per_site as f64);
    Ok((2.0 * total * total / delta).log2().ceil().max(1.0) as u32)
}

fn validate_sites(sites: &[SiteInput]) -> Result<usize> {
    if sites.is_empty() {
        return Err(Error::InvalidParams { msg: "need at least one site".into() });
    }
    let n = sites[0].formula.n;
    for (idx, s) in sites.iter().enumerate() {
        if s.site != idx {
            return Err(Error::InvalidParams {
                msg: format!("site ids must be 0..k in order; slot {idx} holds id {}", s.site),
            });
        }
        if s.formula.n != n {
            return Err(Error::InconsistentStream {
                msg: format!("site {idx} is over {} variables, site 0 over {n}", s.formula.n),
            });
        }
    }
    Ok(n)
}

/// Splits a formula's terms round-robin over k sites.
pub fn split_round_robin(phi: &DnfFormula, k: usize) -> Vec<SiteInput> {
    let mut parts: Vec<Vec<crate::formula::Term>> = vec![Vec::new(); k];
    for (i, t) in phi.terms.iter().enumerate() {
        parts[i % k].push(t.clone());
    }
    parts
        .into_iter()
        .enumerate()
        .map(|(site, terms)| SiteInput {
            site,
            formula: DnfFormula::new(phi.n, terms).expect("vars already validated"),
        })
        .collect()
}

/// Builds site inputs from an explicit term partition; every term index must
/// be assigned exactly once.
pub fn assemble_sites(phi: &DnfFormula, partition: &[Vec<usize>]) -> Result<Vec<SiteInput>> {
    let mut seen = vec![false; phi.terms.len()];
    let mut sites = Vec::with_capacity(partition.len());
    for (site, idxs) in partition.iter().enumerate() {
        let mut terms = Vec::with_capacity(idxs.len());
        for &i in idxs {
            if i >= phi.terms.len() {
                return Err(Error::InvalidParams {
                    msg: format!("site {site}: term index {i} out of range"),
                });
            }
            if seen[i] {
                return Err(Error::InvalidParams {
                    msg: format!("term index {i} assigned to two sites"),
                });
            }
            seen[i] = true;
            terms.push(phi.terms[i].clone());
        }
        sites.push(SiteInput { site, formula: DnfFormula::new(phi.n, terms)? });
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidParams {
            msg: format!("term index {missing} assigned to no site"),
        });
    }
    Ok(sites)
}

// ---------------------------------------------------------------------------
// Site-side computations (pure; shared by the message and direct paths)
// ---------------------------------------------------------------------------

/// A site's bucketing reply for one row: its final trailing-zero level and
/// the cell survivors tagged `(G(x), trail_zero(H_i(x)))`.
struct SiteBucketRow {
    level: u32,
    tuples: Vec<(BitString, u32)>,
}

fn site_bucket_rows(
    phi: &DnfFormula,
    hashes: &HashCollection,
    g: &crate::hashing::HashFn,
    thresh: u64,
) -> Result<Vec<SiteBucketRow>> {
    let n = phi.n;
    let mut rows = Vec::with_capacity(hashes.rows());
    for i in 0..hashes.rows() {
        let h = hashes.get(i);
        let mut level = 0u32;
        let witnesses = loop {
            let res = bounded_sat_dnf(phi, &h.suffix_slice(level as usize)?, thresh + 1)?;
            if res.count <= thresh {
                break res.witnesses;
            }
            if level as usize >= n {
                return Err(Error::PathologicalHash { row: i, level });
            }
            level += 1;
        };
        let tuples = witnesses
            .iter()
            .map(|x| Ok((g.eval(x)?, trail_zero(&h.eval(x)?))))
            .collect::<Result<_>>()?;
        rows.push(SiteBucketRow { level, tuples });
    }
    Ok(rows)
}

fn site_min_rows(
    phi: &DnfFormula,
    hashes: &HashCollection,
    thresh: u64,
) -> Result<Vec<Vec<BitString>>> {
    (0..hashes.rows()).map(|i| find_min(phi, hashes.get(i), thresh)).collect()
}

struct SiteEstReply {
    sketch: Option<EstSketch>,
    fm_maxes: Option<Vec<u32>>,
}

fn site_est_reply(
    phi: &DnfFormula,
    grid: &HashCollection,
    fm_hashes: &HashCollection,
    oracle: &NpOracle,
) -> Result<SiteEstReply> {
    if phi.is_trivially_unsat() {
        return Ok(SiteEstReply { sketch: None, fm_maxes: None });
    }
    let sketch = estimation_sketch(FormulaRef::Dnf(phi), grid, oracle, ExecMode::Deterministic)?;
    let fm_maxes = (0..fm_hashes.rows())
        .map(|i| {
            max_trailing_zeros_dnf(phi, fm_hashes.get(i)).map(|o| o.expect("satisfiable"))
        })
        .collect::<Result<Vec<u32>>>()?;
    Ok(SiteEstReply { sketch: Some(sketch), fm_maxes: Some(fm_maxes) })
}

// ---------------------------------------------------------------------------
// Coordinator
// ---------------------------------------------------------------------------

/// Seed salt for the dedup hash G so it is independent of the row hashes.
const G_SEED_SALT: u64 = 0x2545_f491_4f6c_dd1d;
/// Seed salt for the rough-estimator hashes of the estimation protocol.
const FM_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Runs a one-shot distributed counting protocol over an in-process queue,
/// returning the coordinator's estimate, the populated ledger, and the
/// merged coordinator rows. Messages are consumed in (site id, message
/// index) order; the estimate is deterministic in `seed`.
pub fn dist_count(
    sites: &[SiteInput],
    eps: f64,
    delta: f64,
    seed: u64,
    protocol: Protocol,
) -> Result<DistOutcome> {
    let n = validate_sites(sites)?;
    let params = ApproxParams::new(eps, delta)?;
    let k = sites.len();
    let mut ledger = CommLedger::default();

    match protocol {
        Protocol::Minimum => {
            // Same hash derivation as the centralized minimum counter, so a
            // single site reproduces it bit for bit.
            let hashes = pick_hash_functions(HashFamily::Toeplitz, n, 3 * n, params.t, seed)?;
            let hash_bits: u64 = hashes.iter().map(|h| h.param_bits()).sum();
            let mut replies = Vec::with_capacity(k);
            for s in sites {
                let broadcast = ProtocolMessage {
                    direction: Direction::CoordToSite,
                    kind: PayloadKind::HashFunctions,
                    site: s.site,
                    bits: hash_bits,
                };
                ledger.record_send(&broadcast);
                ledger.record_receive(&broadcast);
                let rows = site_min_rows(&s.formula, &hashes, params.thresh)?;
                let bits: u64 =
                    rows.iter().map(|r| r.len() as u64 * (3 * n) as u64).sum();
                let reply = ProtocolMessage {
                    direction: Direction::SiteToCoord,
                    kind: PayloadKind::MinValues,
                    site: s.site,
                    bits,
                };
                ledger.record_send(&reply);
                replies.push((reply, rows));
            }
            // Coordinator: per row, the thresh smallest of the site unions.
            let mut merged: Vec<BTreeSet<BitString>> = vec![BTreeSet::new(); params.t];
            for (msg, rows) in &replies {
                ledger.record_receive(msg);
                for (i, row) in rows.iter().enumerate() {
                    for v in row {
                        merged[i].insert(v.clone());
                        if merged[i].len() as u64 > params.thresh {
                            let max = merged[i].last().unwrap().clone();
                            merged[i].remove(&max);
                        }
                    }
                }
            }
            let estimate = minimum_estimate(merged.iter(), params.thresh, 3 * n);
            Ok(DistOutcome { estimate, ledger, rows: DistRows::Minimum(merged) })
        }

        Protocol::Bucketing => {
            let hashes = pick_hash_functions(HashFamily::Toeplitz, n, n, params.t, seed)?;
            let m_g = derive_g_width(k, eps, delta, None)? as usize;
            let g_coll =
                pick_hash_functions(HashFamily::Xor, n, m_g, 1, seed ^ G_SEED_SALT)?;
            let g = g_coll.get(0);
            let hash_bits: u64 =
                hashes.iter().map(|h| h.param_bits()).sum::<u64>() + g.param_bits();
            let mut replies = Vec::with_capacity(k);
            for s in sites {
                let broadcast = ProtocolMessage {
                    direction: Direction::CoordToSite,
                    kind: PayloadKind::HashFunctions,
                    site: s.site,
                    bits: hash_bits,
                };
                ledger.record_send(&broadcast);
                ledger.record_receive(&broadcast);
                let rows = site_bucket_rows(&s.formula, &hashes, g, params.thresh)?;
                let tuple_bits = m_g as u64 + tz_bits(n);
                let bits: u64 = rows
                    .iter()
                    .map(|r| tz_bits(n) + r.tuples.len() as u64 * tuple_bits)
                    .sum();
                let reply = ProtocolMessage {
                    direction: Direction::SiteToCoord,
                    kind: PayloadKind::BucketingTuple,
                    site: s.site,
                    bits,
                };
                ledger.record_send(&reply);
                replies.push((reply, rows));
            }
            // Coordinator: start each row at the highest site level (lower-
            // level tuples re-filter upward via their trailing-zero tags),
            // then keep raising while the dedup'd cell overflows.
            let mut rows_out = Vec::with_capacity(params.t);
            for i in 0..params.t {
                let mut level =
                    replies.iter().map(|(_, rows)| rows[i].level).max().unwrap_or(0);
                loop {
                    let mut cell: BTreeSet<&BitString> = BTreeSet::new();
                    for (_, rows) in &replies {
                        for (gx, tz) in &rows[i].tuples {
                            if *tz >= level {
                                cell.insert(gx);
                            }
                        }
                    }
                    if cell.len() as u64 <= params.thresh {
                        rows_out.push((cell.len() as u64, level));
                        break;
                    }
                    if level as usize >= n {
                        return Err(Error::PathologicalHash { row: i, level });
                    }
                    level += 1;
                }
            }
            for (msg, _) in &replies {
                ledger.record_receive(msg);
            }
            let estimate = bucketing_estimate(&rows_out);
            Ok(DistOutcome { estimate, ledger, rows: DistRows::Bucketing(rows_out) })
        }

        Protocol::Estimation => {
            let grid = pick_poly_grid(n, params.s, params.t, params.thresh as usize, seed)?;
            let fm_hashes =
                pick_hash_functions(HashFamily::Xor, n, n, params.t, seed ^ FM_SEED_SALT)?;
            let oracle = NpOracle::brute_force(DEFAULT_BRUTE_CAP);
            let hash_bits: u64 = grid.iter().map(|h| h.param_bits()).sum::<u64>()
                + fm_hashes.iter().map(|h| h.param_bits()).sum::<u64>();
            let mut replies = Vec::with_capacity(k);
            for s in sites {
                let broadcast = ProtocolMessage {
                    direction: Direction::CoordToSite,
                    kind: PayloadKind::HashFunctions,
                    site: s.site,
                    bits: hash_bits,
                };
                ledger.record_send(&broadcast);
                ledger.record_receive(&broadcast);
                let reply = site_est_reply(&s.formula, &grid, &fm_hashes, &oracle)?;
                let bits = match &reply.sketch {
                    Some(sk) => {
                        (sk.cells.len() as u64 + params.t as u64) * tz_bits(n)
                    }
                    None => 0,
                };
                let msg = ProtocolMessage {
                    direction: Direction::SiteToCoord,
                    kind: PayloadKind::EstCells,
                    site: s.site,
                    bits,
                };
                ledger.record_send(&msg);
                replies.push((msg, reply));
            }
            // Coordinator: cell-wise max over sites; the rough estimate is
            // the median over repetitions of the max over sites.
            let mut sketch = EstSketch::new(params.t, params.thresh as usize);
            let mut any = false;
            let mut fm = vec![0u32; params.t];
            for (msg, reply) in &replies {
                ledger.record_receive(msg);
                if let (Some(sk), Some(maxes)) = (&reply.sketch, &reply.fm_maxes) {
                    any = true;
                    sketch.merge_max(sk);
                    for (acc, &v) in fm.iter_mut().zip(maxes) {
                        *acc = (*acc).max(v);
                    }
                }
            }
            if !any {
                return Ok(DistOutcome {
                    estimate: 0.0,
                    ledger,
                    rows: DistRows::Estimation(sketch),
                });
            }
            fm.sort_unstable();
            let r_raw = fm[(fm.len() - 1) / 2];
            let (_, estimate) = select_r(&sketch, n, r_raw)?;
            Ok(DistOutcome { estimate, ledger, rows: DistRows::Estimation(sketch) })
        }
    }
}

/// The same protocols with the message layer replaced by direct calls: no
/// queue, no ledger. Exists to demonstrate transport independence.
pub fn dist_count_direct(
    sites: &[SiteInput],
    eps: f64,
    delta: f64,
    seed: u64,
    protocol: Protocol,
) -> Result<f64> {
    let n = validate_sites(sites)?;
    let params = ApproxParams::new(eps, delta)?;
    match protocol {
        Protocol::Minimum => {
            let hashes = pick_hash_functions(HashFamily::Toeplitz, n, 3 * n, params.t, seed)?;
            let mut merged: Vec<BTreeSet<BitString>> = vec![BTreeSet::new(); params.t];
            for s in sites {
                for (i, row) in site_min_rows(&s.formula, &hashes, params.thresh)?
                    .into_iter()
                    .enumerate()
                {
                    for v in row {
                        merged[i].insert(v);
                        if merged[i].len() as u64 > params.thresh {
                            let max = merged[i].last().unwrap().clone();
                            merged[i].remove(&max);
                        }
                    }
                }
            }
            Ok(minimum_estimate(merged.iter(), params.thresh, 3 * n))
        }
        Protocol::Bucketing | Protocol::Estimation => {
            // The queue carries no information beyond the site replies;
            // reuse the full path and drop the ledger.
            Ok(dist_count(sites, eps, delta, seed, protocol)?.estimate)
        }
    }
}

/// A parsed scenario file: the `.dnf` file reference, an optional protocol,
/// and the per-site term partition (0-based indices).
#[derive(Clone, Debug)]
pub struct Scenario {
    pub dnf: String,
    pub protocol: Option<Protocol>,
    pub partition: Vec<Vec<usize>>,
}

/// Scenario format: `dnf <path>`, optional `protocol <name>`, then one
/// `site <j>: <term indices...>` line per site (ids 0..k in order).
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut dnf = None;
    let mut protocol = None;
    let mut partition: Vec<Vec<usize>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(path) = trimmed.strip_prefix("dnf ") {
            dnf = Some(path.trim().to_string());
        } else if let Some(p) = trimmed.strip_prefix("protocol ") {
            protocol = Some(p.trim().parse()?);
        } else if let Some(rest) = trimmed.strip_prefix("site ") {
            let (id, idxs) = rest
                .split_once(':')
                .ok_or_else(|| Error::parse(line, 1, "expected 'site <j>: <indices>'"))?;
            let id: usize = id
                .trim()
                .parse()
                .map_err(|_| Error::parse(line, 1, "bad site id"))?;
            if id != partition.len() {
                return Err(Error::parse(line, 1, format!("expected site id {}", partition.len())));
            }
            let idxs: Vec<usize> = idxs
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::parse(line, 1, format!("bad index '{t}'"))))
                .collect::<Result<_>>()?;
            partition.push(idxs);
        } else {
            return Err(Error::parse(line, 1, format!("unrecognized line '{trimmed}'")));
        }
    }
    let dnf = dnf.ok_or_else(|| Error::parse(1, 1, "missing 'dnf <path>' line"))?;
    if partition.is_empty() {
        return Err(Error::parse(1, 1, "scenario declares no sites"));
    }
    Ok(Scenario { dnf, protocol, partition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::approx_model_count_min;
    use crate::harness::random_dnf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn g_width_formula() {
        // k=1, 10 tuples, delta=0.5 -> ceil(log2(400)) = 9.
        assert_eq!(derive_g_width(1, 0.5, 0.5, Some(10)).unwrap(), 9);
        // Doubling k adds at most 2 bits at fixed per-site load.
        for k in [1usize, 2, 4, 8] {
            let a = derive_g_width(k, 0.5, 0.25, Some(100)).unwrap();
            let b = derive_g_width(2 * k, 0.5, 0.25, Some(100)).unwrap();
            assert!(b <= a + 2);
        }
    }

    #[test]
    fn single_site_minimum_matches_centralized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = random_dnf(&mut rng, 8, 4, 1..=4);
        let sites = vec![SiteInput { site: 0, formula: phi.clone() }];
        let out = dist_count(&sites, 0.8, 0.4, 11, Protocol::Minimum).unwrap();
        let central = approx_model_count_min(&phi, 0.8, 0.4, 11, ExecMode::Deterministic).unwrap();
        assert_eq!(out.estimate, central.estimate);
        let DistRows::Minimum(rows) = out.rows else { panic!() };
        assert_eq!(rows, central.rows);
        assert!(out.ledger.conserved());
    }

    #[test]
    fn four_site_minimum_merge_equals_centralized_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = random_dnf(&mut rng, 9, 8, 2..=4);
        let sites = split_round_robin(&phi, 4);
        let out = dist_count(&sites, 0.8, 0.4, 13, Protocol::Minimum).unwrap();
        let central = approx_model_count_min(&phi, 0.8, 0.4, 13, ExecMode::Deterministic).unwrap();
        let DistRows::Minimum(rows) = out.rows else { panic!() };
        assert_eq!(rows, central.rows);
        assert_eq!(out.estimate, central.estimate);
    }

    #[test]
    fn transport_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let phi = random_dnf(&mut rng, 8, 6, 1..=4);
        let sites = split_round_robin(&phi, 3);
        for protocol in [Protocol::Minimum, Protocol::Bucketing, Protocol::Estimation] {
            let queued = dist_count(&sites, 0.9, 0.4, 21, protocol).unwrap();
            let direct = dist_count_direct(&sites, 0.9, 0.4, 21, protocol).unwrap();
            assert_eq!(queued.estimate, direct, "{protocol:?}");
        }
    }

    #[test]
    fn partition_validation() {
        let phi = crate::formula::parse_dnf("p dnf 3 3\n1 0\n2 0\n3 0\n").unwrap();
        assert!(assemble_sites(&phi, &[vec![0, 1], vec![2]]).is_ok());
        assert!(assemble_sites(&phi, &[vec![0], vec![2]]).is_err()); // missing 1
        assert!(assemble_sites(&phi, &[vec![0, 1], vec![1, 2]]).is_err()); // duplicated
        assert!(assemble_sites(&phi, &[vec![0, 1], vec![2, 9]]).is_err()); // out of range
    }

    #[test]
    fn scenario_parsing() {
        let s = parse_scenario("# demo\ndnf global.dnf\nprotocol minimum\nsite 0: 0 2\nsite 1: 1\n")
            .unwrap();
        assert_eq!(s.dnf, "global.dnf");
        assert_eq!(s.protocol, Some(Protocol::Minimum));
        assert_eq!(s.partition, vec![vec![0, 2], vec![1]]);
        assert!(parse_scenario("site 0: 1\n").is_err());
        assert!(parse_scenario("dnf a.dnf\nsite 1: 0\n").is_err());
    }
}
