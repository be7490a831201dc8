//! Limiting degree pmfs: the joint recursion over the degree lattice and the
//! one-dimensional marginal with its Gamma-ratio closed form.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::model::DegreeVector;
use crate::params::ModelParams;
use crate::stats::ln_gamma;

/// Sparse pmf over degree vectors with `i_0 <= cap`.
#[derive(Clone, Debug, PartialEq)]
pub struct PmfTable {
    params: ModelParams,
    cap: u32,
    entries: BTreeMap<DegreeVector, f64>,
}

impl PmfTable {
    pub fn from_entries(params: ModelParams, cap: u32, entries: BTreeMap<DegreeVector, f64>) -> Self {
        Self { params, cap, entries }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn get(&self, v: &DegreeVector) -> f64 {
        self.entries.get(v).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> &BTreeMap<DegreeVector, f64> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Entries with `i_0 <= max_i0`.
    pub fn truncated(&self, max_i0: u32) -> BTreeMap<DegreeVector, f64> {
        self.entries
            .iter()
            .filter(|(v, _)| v.get(0) <= max_i0)
            .map(|(v, &p)| (v.clone(), p))
            .collect()
    }

    /// Write `i_0,...,i_k,probability` rows with a header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (0..=self.params.k()).map(|m| format!("i_{m}")).collect();
        header.push("probability".into());
        out.write_record(&header)?;
        for (v, p) in &self.entries {
            let mut row: Vec<String> = v.as_slice().iter().map(u32::to_string).collect();
            row.push(format!("{p:e}"));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Read a table written by [`PmfTable::write_csv`]; the cap is the largest `i_0` seen.
    pub fn read_csv<R: Read>(params: ModelParams, r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let width = params.k() + 2;
        let mut entries = BTreeMap::new();
        let mut cap = 0;
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != width {
                return Err(Error::InvalidArgument(format!("expected {width} columns, found {}", rec.len())));
            }
            let parse = |s: &str| s.parse::<u32>().map_err(|e| Error::InvalidArgument(e.to_string()));
            let v: Vec<u32> = rec.iter().take(width - 1).map(parse).collect::<Result<_>>()?;
            let p: f64 = rec[width - 1].parse().map_err(|e: std::num::ParseFloatError| Error::InvalidArgument(e.to_string()))?;
            let v = DegreeVector::from(v);
            if !v.is_admissible(params.k()) {
                return Err(Error::InvalidArgument(format!("inadmissible degree vector {:?}", v.as_slice())));
            }
            cap = cap.max(v.get(0));
            entries.insert(v, p);
        }
        Ok(Self { params, cap, entries })
    }
}

/// Visit every `(i_0, ..., i_k)` with `i_0` fixed and `i_0 > i_1 > ... > i_k >= 1`,
/// in lexicographic order.
pub fn for_each_vector<F: FnMut(&[u32])>(k: usize, i0: u32, mut f: F) {
    fn rec<F: FnMut(&[u32])>(k: usize, buf: &mut SmallVec<[u32; 6]>, f: &mut F) {
        let m = buf.len();
        if m == k + 1 {
            f(buf);
            return;
        }
        let lo = (k - m + 1) as u32;
        let hi = buf[m - 1] - 1;
        for i in lo..=hi {
            buf.push(i);
            rec(k, buf, f);
            buf.pop();
        }
    }
    if i0 < (k + 1) as u32 {
        return;
    }
    let mut buf: SmallVec<[u32; 6]> = SmallVec::new();
    buf.push(i0);
    rec(k, &mut buf, &mut f);
}

fn check_cap(params: &ModelParams, cap: u32) -> Result<()> {
    let min = params.k() as u32 + 1;
    if cap < min {
        return Err(Error::CapTooSmall { cap, min });
    }
    Ok(())
}

/// Solve the joint recursion for every vector with `i_0 <= cap`.
///
/// Every entry on the right-hand side has first coordinate `i_0 - 1`, except
/// the diagonal term, which is moved to the left. Filling layers of
/// increasing `i_0` therefore never reads an unsolved entry.
pub fn solve_joint_pmf(params: &ModelParams, cap: u32) -> Result<PmfTable> {
    check_cap(params, cap)?;
    let k = params.k();
    let tau = params.tau();
    let delta = params.delta();
    let b = params.b_all();
    let mut solved: FxHashMap<SmallVec<[u32; 6]>, f64> = FxHashMap::default();
    let mut look = SmallVec::<[u32; 6]>::new();

    for i0 in (k as u32 + 1)..=cap {
        let mut layer: Vec<(SmallVec<[u32; 6]>, f64)> = Vec::new();
        for_each_vector(k, i0, |v| {
            let base = i0 == k as u32 + 1;
            let mut rhs = if base { 1.0 } else { 0.0 };
            if !base {
                // all coordinates decrease
                look.clear();
                look.extend(v.iter().map(|&x| x - 1));
                if let Some(&p) = solved.get(&look) {
                    rhs += (v[k] as f64 - 1.0 + delta) / tau * p;
                }
                // coordinates 0..=m decrease
                for m in 0..k {
                    look.clear();
                    look.extend(v.iter().enumerate().map(|(j, &x)| if j <= m { x - 1 } else { x }));
                    if let Some(&p) = solved.get(&look) {
                        let c = (v[m] as f64 - 1.0 - (k - m) as f64) * b[m]
                            - (v[m + 1] as f64 - (k - m - 1) as f64) * b[m + 1];
                        rhs += c / tau * p;
                    }
                }
            }
            let diag = ((i0 as f64 - k as f64) * b[0] + delta) / tau;
            layer.push((SmallVec::from_slice(v), rhs / (1.0 + diag)));
        });
        solved.extend(layer);
    }
    let entries = solved.into_iter().map(|(v, p)| (DegreeVector(v), p)).collect();
    Ok(PmfTable { params: params.clone(), cap, entries })
}

/// Sum out every coordinate except `axis`.
pub fn marginalize(table: &PmfTable, axis: usize) -> BTreeMap<u32, f64> {
    let mut out = BTreeMap::new();
    for (v, &p) in table.entries() {
        *out.entry(v.get(axis)).or_insert(0.0) += p;
    }
    out
}

/// The marginal pmf of the first coordinate on `k+1..=cap`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalTable {
    params: ModelParams,
    cap: u32,
    p0: Vec<f64>,
}

impl MarginalTable {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// `p~_i`, zero outside `k+1..=cap`.
    pub fn get(&self, i: u32) -> f64 {
        let lo = self.params.k() as u32 + 1;
        if i < lo || i > self.cap {
            return 0.0;
        }
        self.p0[(i - lo) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        let lo = self.params.k() as u32 + 1;
        self.p0.iter().enumerate().map(move |(j, &p)| (lo + j as u32, p))
    }

    pub fn total_mass(&self) -> f64 {
        self.p0.iter().sum()
    }

    pub fn alpha(&self, i: u32) -> f64 {
        alpha_i(&self.params, i)
    }

    pub fn beta(&self, i: u32) -> f64 {
        beta_i(&self.params, i)
    }
}

fn alpha_i(params: &ModelParams, i: u32) -> f64 {
    i as f64 - params.k() as f64 - 1.0 + params.delta() / params.b(0)
}

fn beta_i(params: &ModelParams, i: u32) -> f64 {
    let k = params.k() as f64;
    i as f64 - k + (k + 2.0) * (1.0 + params.delta()) / params.b(0)
}

fn marginal_base(params: &ModelParams) -> f64 {
    let k = params.k() as f64;
    params.tau() / (params.b(0) + (k + 2.0) * (1.0 + params.delta()))
}

/// Solve the one-dimensional marginal recursion up to `cap`.
pub fn solve_marginal_pmf(params: &ModelParams, cap: u32) -> Result<MarginalTable> {
    check_cap(params, cap)?;
    let k = params.k() as f64;
    let b0 = params.b(0);
    let delta = params.delta();
    let lo = params.k() as u32 + 1;
    let mut p0 = Vec::with_capacity((cap - lo + 1) as usize);
    p0.push(marginal_base(params));
    for i in lo + 1..=cap {
        let i = i as f64;
        let prev = *p0.last().expect("base pushed");
        p0.push(((i - k - 1.0) * b0 + delta) / ((i - k) * b0 + (k + 2.0) * (1.0 + delta)) * prev);
    }
    Ok(MarginalTable { params: params.clone(), cap, p0 })
}

/// Gamma-ratio closed form of `p~_i`, evaluated through log-gamma. Zero for `i <= k`.
pub fn marginal_closed_form(params: &ModelParams, i: u32) -> f64 {
    let k = params.k() as u32;
    if i < k + 1 {
        return 0.0;
    }
    let ln = marginal_base(params).ln() + ln_gamma(beta_i(params, k + 2)) - ln_gamma(alpha_i(params, k + 2))
        + ln_gamma(alpha_i(params, i + 1))
        - ln_gamma(beta_i(params, i + 1));
    ln.exp()
}

/// Mass of the first-coordinate marginal above `cap`.
pub fn marginal_tail(params: &ModelParams, cap: u32) -> f64 {
    let lo = params.k() as u32 + 1;
    if cap < lo {
        return 1.0;
    }
    let table = solve_marginal_pmf(params, cap).expect("cap checked");
    (1.0 - table.total_mass()).max(0.0)
}

/// Smallest cap whose joint table carries at least `mass`.
///
/// The joint table with cap `I` holds exactly the marginal mass on
/// `k+1..=I`, so the cap is read off the cumulative marginal, whose tail
/// decays like `I^{-tau/b_0}`.
pub fn cap_for_mass(params: &ModelParams, mass: f64) -> Result<u32> {
    if !(0.0..1.0).contains(&mass) {
        return Err(Error::InvalidArgument(format!("target mass {mass} must lie in [0, 1)")));
    }
    const LIMIT: u32 = 100_000_000;
    let k = params.k() as f64;
    let b0 = params.b(0);
    let delta = params.delta();
    let mut i = params.k() as u32 + 1;
    let mut p = marginal_base(params);
    let mut cum = p;
    while cum < mass {
        i += 1;
        if i > LIMIT {
            return Err(Error::InvalidArgument(format!("mass {mass} needs a cap above {LIMIT}")));
        }
        let fi = i as f64;
        p *= ((fi - k - 1.0) * b0 + delta) / ((fi - k) * b0 + (k + 2.0) * (1.0 + delta));
        cum += p;
    }
    Ok(i)
}
