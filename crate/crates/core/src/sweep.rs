//! Seeded Monte Carlo sweep over the two-arm source.
//!
//! Each sample draws every tunable parameter uniformly from its range, builds
//! the source state and records its concurrence next to the two bounds
//! `(1 + P)/2` and `P`. Sample `i` uses ChaCha20 stream `i` under the sweep
//! seed, so results do not depend on how samples are spread over workers.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scheme::{build_density_matrix, SchemeParams};

/// Slack allowed before a record counts as a bound violation.
pub const BOUND_TOL: f64 = 1e-9;

/// Records computed per parallel batch before they are written out.
const CHUNK: u64 = 1 << 14;

pub const CSV_HEADER: [&str; 16] = [
    "sample_id",
    "pump_p",
    "t",
    "theta1",
    "theta2",
    "alpha1",
    "alpha2",
    "mu",
    "gamma0",
    "concurrence",
    "bound_general",
    "bound_2d",
    "lambda1",
    "lambda2",
    "lambda3",
    "lambda4",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    General,
    TwoD,
}

impl std::str::FromStr for SweepMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(SweepMode::General),
            "two_d" => Ok(SweepMode::TwoD),
            other => Err(Error::BadConfig(format!("unknown mode {other:?}"))),
        }
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.lo + (self.hi - self.lo) * u
    }

    fn check(&self, name: &str, within: Option<Interval>) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi {
            return Err(Error::BadConfig(format!(
                "{name}: invalid interval {self:?}"
            )));
        }
        if let Some(w) = within {
            if self.lo < w.lo || self.hi > w.hi {
                return Err(Error::BadConfig(format!(
                    "{name}: {self:?} outside [{}, {}]",
                    w.lo, w.hi
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub pump_p: Interval,
    pub t: Interval,
    pub theta1: Interval,
    pub theta2: Interval,
    pub alpha1: Interval,
    pub alpha2: Interval,
    pub mu: Interval,
    pub gamma0: Interval,
}

impl Default for ParamRanges {
    /// One full period of every angle; the unit interval for `P`, `t`, `μ`.
    fn default() -> Self {
        let unit = Interval::new(0.0, 1.0);
        Self {
            pump_p: unit,
            t: unit,
            theta1: Interval::new(0.0, PI),
            theta2: Interval::new(0.0, PI),
            alpha1: Interval::new(0.0, 2.0 * PI),
            alpha2: Interval::new(0.0, 2.0 * PI),
            mu: unit,
            gamma0: Interval::new(0.0, 2.0 * PI),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub mode: SweepMode,
    pub param_ranges: ParamRanges,
    pub workers: usize,
}

impl SweepConfig {
    pub fn new(n_samples: u64, seed: u64, mode: SweepMode) -> Self {
        Self {
            n_samples,
            seed,
            mode,
            param_ranges: ParamRanges::default(),
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::BadConfig("n_samples must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::BadConfig("workers must be at least 1".into()));
        }
        let unit = Some(Interval::new(0.0, 1.0));
        let r = &self.param_ranges;
        r.pump_p.check("pump_p", unit)?;
        r.t.check("t", unit)?;
        r.mu.check("mu", unit)?;
        for (name, i) in [
            ("theta1", r.theta1),
            ("theta2", r.theta2),
            ("alpha1", r.alpha1),
            ("alpha2", r.alpha2),
            ("gamma0", r.gamma0),
        ] {
            i.check(name, None)?;
        }
        Ok(())
    }

    /// Parameters of sample `id`. Draw order is fixed; in two-D mode `t` is
    /// still drawn (and discarded) so both modes consume the same stream.
    pub fn sample_params(&self, id: u64) -> SchemeParams {
        let mut g = rng::stream(self.seed, id);
        let r = &self.param_ranges;
        let pump_p = r.pump_p.sample(&mut g);
        let t = r.t.sample(&mut g);
        let theta1 = r.theta1.sample(&mut g);
        let theta2 = r.theta2.sample(&mut g);
        let alpha1 = r.alpha1.sample(&mut g);
        let alpha2 = r.alpha2.sample(&mut g);
        let mu = r.mu.sample(&mut g);
        let gamma0 = r.gamma0.sample(&mut g);
        SchemeParams {
            t: match self.mode {
                SweepMode::General => t,
                SweepMode::TwoD => 1.0,
            },
            theta1,
            theta2,
            alpha1,
            alpha2,
            mu,
            gamma0,
            pump_p,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub sample_id: u64,
    pub params: SchemeParams,
    pub concurrence: f64,
    pub bound_general: f64,
    pub bound_2d: f64,
    pub spectrum: [f64; 4],
}

impl SweepRecord {
    /// Single-arm settings (`t` = 0 or 1) always produce block states, to
    /// which the tighter bound `C <= P` applies.
    pub fn two_d_bound_applies(&self) -> bool {
        self.params.t == 1.0 || self.params.t == 0.0
    }

    /// Distance below the tightest applicable bound (negative when violated).
    pub fn slack(&self) -> f64 {
        let general = self.bound_general - self.concurrence;
        if self.two_d_bound_applies() {
            general.min(self.bound_2d - self.concurrence)
        } else {
            general
        }
    }

    fn to_csv_row(&self) -> [String; 16] {
        let f = |x: f64| format!("{x:.16e}");
        let p = &self.params;
        [
            self.sample_id.to_string(),
            f(p.pump_p),
            f(p.t),
            f(p.theta1),
            f(p.theta2),
            f(p.alpha1),
            f(p.alpha2),
            f(p.mu),
            f(p.gamma0),
            f(self.concurrence),
            f(self.bound_general),
            f(self.bound_2d),
            f(self.spectrum[0]),
            f(self.spectrum[1]),
            f(self.spectrum[2]),
            f(self.spectrum[3]),
        ]
    }
}

#[derive(Deserialize)]
struct CsvRow {
    sample_id: u64,
    pump_p: f64,
    t: f64,
    theta1: f64,
    theta2: f64,
    alpha1: f64,
    alpha2: f64,
    mu: f64,
    gamma0: f64,
    concurrence: f64,
    bound_general: f64,
    bound_2d: f64,
    lambda1: f64,
    lambda2: f64,
    lambda3: f64,
    lambda4: f64,
}

impl From<CsvRow> for SweepRecord {
    fn from(r: CsvRow) -> Self {
        SweepRecord {
            sample_id: r.sample_id,
            params: SchemeParams {
                t: r.t,
                theta1: r.theta1,
                theta2: r.theta2,
                alpha1: r.alpha1,
                alpha2: r.alpha2,
                mu: r.mu,
                gamma0: r.gamma0,
                pump_p: r.pump_p,
            },
            concurrence: r.concurrence,
            bound_general: r.bound_general,
            bound_2d: r.bound_2d,
            spectrum: [r.lambda1, r.lambda2, r.lambda3, r.lambda4],
        }
    }
}

/// Builds and measures one sample.
pub fn evaluate(sample_id: u64, params: SchemeParams) -> Result<SweepRecord> {
    let state = build_density_matrix(&params)?;
    let concurrence = state.concurrence()?.value;
    let s = state.spectrum()?;
    let v = s.values();
    Ok(SweepRecord {
        sample_id,
        params,
        concurrence,
        bound_general: (1.0 + params.pump_p) / 2.0,
        bound_2d: params.pump_p,
        spectrum: [v[0], v[1], v[2], v[3]],
    })
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::BadConfig(format!("cannot start {workers} workers: {e}")))
}

fn compute_range(cfg: &SweepConfig, ids: std::ops::Range<u64>) -> Result<Vec<SweepRecord>> {
    ids.into_par_iter()
        .map(|id| evaluate(id, cfg.sample_params(id)))
        .collect()
}

/// Runs the whole sweep in memory.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    thread_pool(cfg.workers)?.install(|| compute_range(cfg, 0..cfg.n_samples))
}

/// Runs the sweep and streams CSV rows in sample order, holding at most one
/// batch in memory. Returns the bound report for the written records.
pub fn run_sweep_to_csv<W: Write>(cfg: &SweepConfig, out: W) -> Result<BoundReport> {
    cfg.validate()?;
    let pool = thread_pool(cfg.workers)?;
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    let mut report = BoundReport::default();
    let mut start = 0;
    while start < cfg.n_samples {
        let end = (start + CHUNK).min(cfg.n_samples);
        let batch = pool.install(|| compute_range(cfg, start..end))?;
        for rec in &batch {
            writer.write_record(rec.to_csv_row())?;
            report.add(rec);
        }
        start = end;
    }
    writer.flush()?;
    Ok(report)
}

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for r in records {
        writer.write_record(r.to_csv_row())?;
    }
    writer.flush()?;
    Ok(())
}

/// Parses sweep CSV, requiring the exact header.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut out = Vec::new();
    for_each_csv_record(input, |r| out.push(r))?;
    Ok(out)
}

fn for_each_csv_record<R: Read>(input: R, mut f: impl FnMut(SweepRecord)) -> Result<()> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Format(format!(
            "unexpected CSV header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    for row in reader.deserialize::<CsvRow>() {
        f(row?.into());
    }
    Ok(())
}

/// Bound audit that streams over a CSV file without loading it.
pub fn verify_csv<R: Read>(input: R) -> Result<BoundReport> {
    let mut report = BoundReport::default();
    for_each_csv_record(input, |r| report.add(&r))?;
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecileStats {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    /// `None` when the decile is empty.
    pub max_concurrence: Option<f64>,
}

impl DecileStats {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// `(1 + P_mid)/2 - max C`; how far the scatter stays below the general
    /// bound at the decile centre.
    pub fn general_gap(&self) -> Option<f64> {
        self.max_concurrence
            .map(|c| (1.0 + self.midpoint()) / 2.0 - c)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub records: u64,
    /// Records above `(1 + P)/2 + BOUND_TOL`.
    pub general_violations: u64,
    /// Single-arm records above `P + BOUND_TOL`.
    pub two_d_violations: u64,
    pub two_d_records: u64,
    /// Smallest [`SweepRecord::slack`] seen; `+inf` for an empty report.
    pub worst_slack: f64,
    pub worst_sample: Option<u64>,
    pub max_concurrence_general: Option<f64>,
    pub max_concurrence_two_d: Option<f64>,
    pub deciles: [DecileStats; 10],
}

impl Default for BoundReport {
    fn default() -> Self {
        Self {
            records: 0,
            general_violations: 0,
            two_d_violations: 0,
            two_d_records: 0,
            worst_slack: f64::INFINITY,
            worst_sample: None,
            max_concurrence_general: None,
            max_concurrence_two_d: None,
            deciles: std::array::from_fn(|k| DecileStats {
                lo: k as f64 / 10.0,
                hi: (k + 1) as f64 / 10.0,
                count: 0,
                max_concurrence: None,
            }),
        }
    }
}

fn max_opt(a: Option<f64>, b: f64) -> Option<f64> {
    Some(a.map_or(b, |a| a.max(b)))
}

impl BoundReport {
    pub fn violations(&self) -> u64 {
        self.general_violations + self.two_d_violations
    }

    pub fn add(&mut self, r: &SweepRecord) {
        self.records += 1;
        let c = r.concurrence;
        if c > (1.0 + r.params.pump_p) / 2.0 + BOUND_TOL {
            self.general_violations += 1;
        }
        if r.two_d_bound_applies() {
            self.two_d_records += 1;
            if c > r.params.pump_p + BOUND_TOL {
                self.two_d_violations += 1;
            }
            self.max_concurrence_two_d = max_opt(self.max_concurrence_two_d, c);
        } else {
            self.max_concurrence_general = max_opt(self.max_concurrence_general, c);
        }
        let slack = r.slack();
        if slack < self.worst_slack {
            self.worst_slack = slack;
            self.worst_sample = Some(r.sample_id);
        }
        let k = ((r.params.pump_p * 10.0).floor().max(0.0) as usize).min(9);
        let d = &mut self.deciles[k];
        d.count += 1;
        d.max_concurrence = max_opt(d.max_concurrence, c);
    }
}

impl std::fmt::Display for BoundReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "records: {}", self.records)?;
        writeln!(f, "two_d_records: {}", self.two_d_records)?;
        writeln!(f, "violations_general: {}", self.general_violations)?;
        writeln!(f, "violations_two_d: {}", self.two_d_violations)?;
        writeln!(f, "worst_slack: {:.16e}", self.worst_slack)?;
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.16e}"));
        writeln!(
            f,
            "max_concurrence_general: {}",
            opt(self.max_concurrence_general)
        )?;
        writeln!(
            f,
            "max_concurrence_two_d: {}",
            opt(self.max_concurrence_two_d)
        )?;
        writeln!(
            f,
            "decile,count,max_concurrence,bound_general_mid,bound_2d_mid"
        )?;
        for d in &self.deciles {
            writeln!(
                f,
                "[{:.1},{:.1}),{},{},{:.16e},{:.16e}",
                d.lo,
                d.hi,
                d.count,
                opt(d.max_concurrence),
                (1.0 + d.midpoint()) / 2.0,
                d.midpoint()
            )?;
        }
        Ok(())
    }
}

pub fn verify_bounds(records: &[SweepRecord]) -> BoundReport {
    let mut report = BoundReport::default();
    for r in records {
        report.add(r);
    }
    report
}

/// The known saturating setting `t = 1/2, θ1 = -π/4, θ2 = 0, α1 = π/2,
/// α2 = π, μ = 1, γ0 = 0`, with its concurrence evaluated.
pub fn saturating_config(pump_p: f64) -> Result<(SchemeParams, f64)> {
    if !(0.0..=1.0).contains(&pump_p) {
        return Err(Error::BadParameter(format!(
            "pump_p = {pump_p} outside [0, 1]"
        )));
    }
    let params = SchemeParams {
        t: 0.5,
        theta1: -PI / 4.0,
        theta2: 0.0,
        alpha1: PI / 2.0,
        alpha2: PI,
        mu: 1.0,
        gamma0: 0.0,
        pump_p,
    };
    let c = build_density_matrix(&params)?.concurrence()?.value;
    Ok((params, c))
}
