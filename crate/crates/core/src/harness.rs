//! Reproducible experiments wiring the other modules together.
//!
//! Every experiment produces an [`ExperimentRecord`]: a canonical JSON
//! object whose hash is a pure function of `(kind, params, seed, results)`.
//! Randomness flows through per-trial substreams, so records are identical
//! whether trials run on one worker or many, and an append-only JSONL store
//! keeps runs inspectable and mergeable by concatenation.

use crate::arith::{sample_coefficients, SeededStream};
use crate::counting::{count_solutions, smallest_solution, CountMode, DEFAULT_TABLE_CAP};
use crate::forms::{hat_s, DiagonalForm};
use crate::local::{
    local_report, LocalOptions, Obstruction, OverallVerdict, PrimeSelection,
    RIGOROUS_CUTOFF_LIMIT,
};
use crate::singular::series_truncated;
use crate::{Error, Result};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

/// Normal quantile for the 95% Wilson confidence interval.
const WILSON_Z: f64 = 1.96;

/// Cap on exhaustively enumerated coefficient vectors in
/// [`variance_experiment`].
const VARIANCE_BUDGET: u64 = 1_000_000;

// ---------------------------------------------------------------------------
// Canonical serialization and hashing
// ---------------------------------------------------------------------------

/// Canonical form of a JSON value: object keys sorted lexicographically,
/// no insignificant whitespace, numbers in serde's shortest round-trip
/// rendering. Two structurally equal values always canonicalize to the
/// same byte string.
pub fn canonical_json(value: &serde_json::Value) -> String {
    let mut out = String::new();
    write_canonical(value, &mut out);
    out
}

fn write_canonical(value: &serde_json::Value, out: &mut String) {
    match value {
        serde_json::Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::Value::String((*key).clone()).to_string());
                out.push(':');
                write_canonical(&map[*key], out);
            }
            out.push('}');
        }
        serde_json::Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

// ---------------------------------------------------------------------------
// Experiment records
// ---------------------------------------------------------------------------

/// One experiment run: what was asked, what came out, and a content hash.
///
/// The hash covers `(kind, params, seed, results)` in canonical form and
/// deliberately excludes `provenance` (tool version and timestamp), so
/// re-running with identical inputs reproduces the hash bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub kind: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub results: serde_json::Value,
    pub provenance: serde_json::Value,
    pub canonical_hash: String,
}

impl ExperimentRecord {
    /// Assemble a record, stamping provenance and the canonical hash.
    pub fn new(
        kind: &str,
        params: serde_json::Value,
        seed: u64,
        results: serde_json::Value,
    ) -> Self {
        let canonical_hash = Self::hash_of(kind, &params, seed, &results);
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let provenance = serde_json::json!({
            "tool": "dioph",
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp": timestamp,
        });
        ExperimentRecord {
            kind: kind.to_string(),
            params,
            seed,
            results,
            provenance,
            canonical_hash,
        }
    }

    /// The content hash: SHA-256 of the canonical serialization of
    /// everything except provenance.
    pub fn hash_of(
        kind: &str,
        params: &serde_json::Value,
        seed: u64,
        results: &serde_json::Value,
    ) -> String {
        let hashed = serde_json::json!({
            "kind": kind,
            "params": params,
            "seed": seed,
            "results": results,
        });
        sha256_hex(canonical_json(&hashed).as_bytes())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "params": self.params,
            "seed": self.seed,
            "results": self.results,
            "provenance": self.provenance,
            "canonical_hash": self.canonical_hash,
        })
    }

    /// Rebuild a record from its JSON form, verifying the stored hash
    /// against a recomputation.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::domain("record is not a JSON object"))?;
        let kind = obj
            .get("kind")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::domain("record lacks a string `kind`"))?
            .to_string();
        let seed = obj
            .get("seed")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::domain("record lacks an integer `seed`"))?;
        let params = obj
            .get("params")
            .cloned()
            .ok_or_else(|| Error::domain("record lacks `params`"))?;
        let results = obj
            .get("results")
            .cloned()
            .ok_or_else(|| Error::domain("record lacks `results`"))?;
        let provenance = obj.get("provenance").cloned().unwrap_or(serde_json::Value::Null);
        let stored_hash = obj
            .get("canonical_hash")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::domain("record lacks `canonical_hash`"))?
            .to_string();
        let recomputed = Self::hash_of(&kind, &params, seed, &results);
        if recomputed != stored_hash {
            return Err(Error::numerical(format!(
                "record hash mismatch: stored {stored_hash}, recomputed {recomputed}"
            )));
        }
        Ok(ExperimentRecord {
            kind,
            params,
            seed,
            results,
            provenance,
            canonical_hash: stored_hash,
        })
    }
}

// ---------------------------------------------------------------------------
// Wilson confidence intervals
// ---------------------------------------------------------------------------

/// A binomial fraction with its 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonInterval {
    pub successes: u64,
    pub samples: u64,
    pub fraction: f64,
    pub low: f64,
    pub high: f64,
}

/// Wilson score interval at z = 1.96. Always contains the point estimate.
pub fn wilson_interval(successes: u64, samples: u64) -> Result<WilsonInterval> {
    if samples == 0 {
        return Err(Error::domain("confidence interval needs at least one sample"));
    }
    if successes > samples {
        return Err(Error::domain("successes exceed samples"));
    }
    let n = samples as f64;
    let p = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(WilsonInterval {
        successes,
        samples,
        fraction: p,
        low: (center - half).max(0.0),
        high: (center + half).min(1.0),
    })
}

impl WilsonInterval {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "successes": self.successes,
            "samples": self.samples,
            "fraction": self.fraction,
            "low": self.low,
            "high": self.high,
        })
    }
}

// ---------------------------------------------------------------------------
// Worker control and the trial runner
// ---------------------------------------------------------------------------

/// Run `f` on a dedicated thread pool with exactly `workers` threads.
///
/// Experiments reduce per-trial outcomes in trial order after collecting
/// them, so the result is identical for any worker count; this helper
/// exists to make that claim testable.
pub fn run_with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Err(Error::domain("worker count must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::resource(format!("thread pool construction failed: {e}")))?;
    Ok(pool.install(f))
}

/// Run `n` independent trials in parallel and return their outcomes in
/// trial order. Each trial must draw randomness only from its own
/// substream, keeping the outcome vector a pure function of the seed.
fn run_trials<T: Send>(n: u64, trial: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n)
        .into_par_iter()
        .map(trial)
        .collect::<Vec<Result<T>>>()
        .into_iter()
        .collect()
}

/// Largest sup-norm shell the meet-in-the-middle search can afford under
/// `cap` table entries: the biggest `m` with `(2m+1)^{ceil(s/2)} <= cap`.
fn max_searchable_shell(s: u32, cap: u64) -> u64 {
    let half = s.div_ceil(2);
    let mut m = 0u64;
    loop {
        let next = m + 1;
        match (2 * next + 1).checked_pow(half) {
            Some(cost) if cost <= cap => m = next,
            _ => return m,
        }
    }
}

/// Survey-wide local-reporting mode: rigorous when the small-prime cutoff
/// is enumerable, otherwise heuristic with a mandatory caveat string.
fn survey_local_options(k: u32, s: u32) -> (LocalOptions, Option<String>) {
    // cutoff = ceil(k^{(s+k+2)/2}); probe in f64, the boundary is far from
    // any interesting (k, s) pair.
    let exponent = f64::from(s + k + 2) / 2.0;
    let cutoff = f64::from(k).powf(exponent);
    let rigorous = cutoff.is_finite() && cutoff <= RIGOROUS_CUTOFF_LIMIT as f64;
    let mut opts = LocalOptions::default();
    if rigorous {
        (opts, None)
    } else {
        opts.mode = PrimeSelection::Heuristic;
        let caveat = format!(
            "local verdicts are heuristic: the rigorous prime cutoff \
             k^(({s}+{k}+2)/2) exceeds {RIGOROUS_CUTOFF_LIMIT}"
        );
        (opts, Some(caveat))
    }
}

fn sample_form(k: u32, s: u32, a_bound: i64, stream: &SeededStream) -> Result<DiagonalForm> {
    let coeffs = sample_coefficients(s, a_bound, stream)?;
    DiagonalForm::new(k, coeffs)
}

// ---------------------------------------------------------------------------
// Survey: local solubility density
// ---------------------------------------------------------------------------

/// Sample `n` coefficient vectors from the box of height `A` and report
/// the locally soluble fraction, with per-place failure attribution.
pub fn survey_local_density(
    k: u32,
    s: u32,
    a_bound: i64,
    n: u64,
    seed: u64,
) -> Result<ExperimentRecord> {
    if n == 0 {
        return Err(Error::domain("survey needs at least one sample"));
    }
    let (opts, caveat) = survey_local_options(k, s);
    let stream = SeededStream::new(seed, 0);

    enum Outcome {
        Soluble,
        RealFailure,
        PrimeFailure(u64),
        Undetermined,
    }
    let outcomes = run_trials(n, |trial| {
        let form = sample_form(k, s, a_bound, &stream.substream(trial))?;
        let report = local_report(&form, &opts)?;
        Ok(match report.overall {
            OverallVerdict::LocallySoluble => Outcome::Soluble,
            OverallVerdict::LocallyInsoluble(Obstruction::RealPlace) => Outcome::RealFailure,
            OverallVerdict::LocallyInsoluble(Obstruction::Prime(p)) => Outcome::PrimeFailure(p),
            OverallVerdict::Undetermined => Outcome::Undetermined,
        })
    })?;

    let mut soluble = 0u64;
    let mut real_failures = 0u64;
    let mut undetermined = 0u64;
    let mut prime_failures: BTreeMap<u64, u64> = BTreeMap::new();
    for outcome in &outcomes {
        match outcome {
            Outcome::Soluble => soluble += 1,
            Outcome::RealFailure => real_failures += 1,
            Outcome::PrimeFailure(p) => *prime_failures.entry(*p).or_insert(0) += 1,
            Outcome::Undetermined => undetermined += 1,
        }
    }
    let determined = n - undetermined;
    let interval = if determined > 0 {
        Some(wilson_interval(soluble, determined)?)
    } else {
        None
    };
    let results = serde_json::json!({
        "soluble": soluble,
        "determined": determined,
        "undetermined": undetermined,
        "undetermined_flag": undetermined > 0,
        "fraction": interval.map(|i| i.fraction),
        "wilson": interval.map(|i| i.to_json()),
        "real_failures": real_failures,
        "prime_failures": prime_failures
            .iter()
            .map(|(p, c)| (p.to_string(), serde_json::json!(c)))
            .collect::<serde_json::Map<String, serde_json::Value>>(),
        "caveat": caveat,
    });
    let params = serde_json::json!({
        "k": k, "s": s, "A": a_bound, "n": n, "mode": opts.mode.as_str(),
    });
    Ok(ExperimentRecord::new("local_density", params, seed, results))
}

// ---------------------------------------------------------------------------
// Survey: small solutions within a height-scaled radius
// ---------------------------------------------------------------------------

/// For each scale `C`, the fraction of sampled forms admitting a nonzero
/// solution with sup-norm at most `C * |a|^{1/(s-k)}`.
///
/// Searches that would exceed the meet-in-the-middle budget before
/// reaching the target radius are recorded as censored observations and
/// excluded from the fractions.
pub fn survey_small_solutions(
    k: u32,
    s: u32,
    a_bound: i64,
    c_list: &[f64],
    n: u64,
    seed: u64,
) -> Result<ExperimentRecord> {
    if s <= k {
        return Err(Error::domain("the radius exponent 1/(s-k) needs s > k"));
    }
    if n == 0 {
        return Err(Error::domain("survey needs at least one sample"));
    }
    if c_list.is_empty() || c_list.iter().any(|&c| !c.is_finite() || c <= 0.0) {
        return Err(Error::domain("scale list must be nonempty with positive entries"));
    }
    let stream = SeededStream::new(seed, 0);
    let shell_limit = max_searchable_shell(s, DEFAULT_TABLE_CAP);
    let exponent = 1.0 / f64::from(s - k);

    struct Trial {
        bounds: Vec<u64>,
        smallest_norm: Option<u64>,
        searched: u64,
    }
    let c_owned: Vec<f64> = c_list.to_vec();
    let trials = run_trials(n, |trial| {
        let form = sample_form(k, s, a_bound, &stream.substream(trial))?;
        let height = form.height() as f64;
        let bounds: Vec<u64> = c_owned
            .iter()
            .map(|&c| (c * height.powf(exponent)).floor().max(0.0) as u64)
            .collect();
        let target = bounds.iter().copied().max().unwrap_or(0);
        let searched = target.min(shell_limit);
        let smallest_norm = if searched >= 1 {
            smallest_solution(&form, searched)?
                .found
                .map(|(_, norm)| norm)
        } else {
            None
        };
        Ok(Trial {
            bounds,
            smallest_norm,
            searched,
        })
    })?;

    let mut per_c = Vec::with_capacity(c_owned.len());
    for (ci, &c) in c_owned.iter().enumerate() {
        let mut found = 0u64;
        let mut censored = 0u64;
        for t in &trials {
            let bound = t.bounds[ci];
            match t.smallest_norm {
                Some(norm) if norm <= bound => found += 1,
                // No solution up to `searched`: conclusive only when the
                // whole target radius was covered.
                _ if bound <= t.searched => {}
                _ => censored += 1,
            }
        }
        let determined = n - censored;
        let interval = if determined > 0 {
            Some(wilson_interval(found, determined)?)
        } else {
            None
        };
        per_c.push(serde_json::json!({
            "c": c,
            "found": found,
            "censored": censored,
            "determined": determined,
            "fraction": interval.map(|i| i.fraction),
            "wilson": interval.map(|i| i.to_json()),
        }));
    }
    let results = serde_json::json!({
        "per_c": per_c,
        "shell_limit": shell_limit,
    });
    let params = serde_json::json!({
        "k": k, "s": s, "A": a_bound, "C": c_owned, "n": n,
    });
    Ok(ExperimentRecord::new("small_solutions", params, seed, results))
}

// ---------------------------------------------------------------------------
// Survey: Hasse-principle spot checks
// ---------------------------------------------------------------------------

/// Among locally soluble sampled forms, the fraction with a nonzero
/// solution of sup-norm at most `B`, plus the full list of unresolved
/// vectors (locally soluble, search exhausted, nothing found).
pub fn survey_hasse(
    k: u32,
    s: u32,
    a_bound: i64,
    b_bound: u64,
    n: u64,
    seed: u64,
) -> Result<ExperimentRecord> {
    if n == 0 {
        return Err(Error::domain("survey needs at least one sample"));
    }
    if b_bound == 0 {
        return Err(Error::domain("search radius B must be at least 1"));
    }
    let (opts, caveat) = survey_local_options(k, s);
    let stream = SeededStream::new(seed, 0);
    let shell_limit = max_searchable_shell(s, DEFAULT_TABLE_CAP);
    let searched = b_bound.min(shell_limit);

    enum Outcome {
        Found,
        /// Locally soluble, search complete to B, no solution.
        Unresolved(Vec<i64>),
        /// Locally soluble, search stopped at the budget before B.
        Censored,
        Insoluble,
        Undetermined,
    }
    let outcomes = run_trials(n, |trial| {
        let form = sample_form(k, s, a_bound, &stream.substream(trial))?;
        let report = local_report(&form, &opts)?;
        match report.overall {
            OverallVerdict::LocallyInsoluble(_) => return Ok(Outcome::Insoluble),
            OverallVerdict::Undetermined => return Ok(Outcome::Undetermined),
            OverallVerdict::LocallySoluble => {}
        }
        let outcome = smallest_solution(&form, searched)?;
        Ok(match outcome.found {
            Some(_) => Outcome::Found,
            None if searched >= b_bound => Outcome::Unresolved(form.coeffs().to_vec()),
            None => Outcome::Censored,
        })
    })?;

    let mut found = 0u64;
    let mut censored = 0u64;
    let mut insoluble = 0u64;
    let mut undetermined = 0u64;
    let mut unresolved: Vec<Vec<i64>> = Vec::new();
    for outcome in outcomes {
        match outcome {
            Outcome::Found => found += 1,
            Outcome::Unresolved(coeffs) => unresolved.push(coeffs),
            Outcome::Censored => censored += 1,
            Outcome::Insoluble => insoluble += 1,
            Outcome::Undetermined => undetermined += 1,
        }
    }
    let locally_soluble = found + censored + unresolved.len() as u64;
    let determined = locally_soluble - censored;
    let interval = if determined > 0 {
        Some(wilson_interval(found, determined)?)
    } else {
        None
    };
    let results = serde_json::json!({
        "locally_soluble": locally_soluble,
        "locally_insoluble": insoluble,
        "undetermined": undetermined,
        "found": found,
        "censored": censored,
        "determined": determined,
        "found_fraction": interval.map(|i| i.fraction),
        "wilson": interval.map(|i| i.to_json()),
        "unresolved": unresolved,
        "caveat": caveat,
    });
    let params = serde_json::json!({
        "k": k, "s": s, "A": a_bound, "B": b_bound, "n": n, "mode": opts.mode.as_str(),
    });
    Ok(ExperimentRecord::new("hasse", params, seed, results))
}

// ---------------------------------------------------------------------------
// Variance experiment: the exact second moment at desk scale
// ---------------------------------------------------------------------------

/// Exhaustively enumerate every coefficient vector with nonzero entries in
/// `[-A, A]^s`, compare the exact nonzero-coordinate solution count in the
/// box `B` against the density prediction (truncated congruence-density
/// series times the oscillatory-integral value times `B^{s-k}`), and
/// report the summed squared deviation.
///
/// No randomness: output is bit-identical across runs and worker counts.
pub fn variance_experiment(
    k: u32,
    s: u32,
    a_bound: i64,
    b_bound: u64,
    series_q: u64,
) -> Result<ExperimentRecord> {
    if a_bound < 1 || b_bound < 1 {
        return Err(Error::domain("boxes need A >= 1 and B >= 1"));
    }
    if s < 3 {
        return Err(Error::domain("the experiment needs s >= 3"));
    }
    let vectors = (2 * a_bound as u64)
        .checked_pow(s)
        .filter(|&v| v <= VARIANCE_BUDGET)
        .ok_or_else(|| {
            Error::resource(format!(
                "enumerating (2A)^s = (2*{a_bound})^{s} coefficient vectors \
                 exceeds the budget of {VARIANCE_BUDGET}"
            ))
        })?;
    let (opts, caveat) = survey_local_options(k, s);

    // Group the box by the symmetry class of the coefficient vector: the
    // count, the series, and the integral are invariant under coordinate
    // permutations always, and under sign flips exactly when k is odd.
    let mut classes: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
    let mut coeffs = vec![0i64; s as usize];
    enumerate_box_vectors(a_bound, 0, &mut coeffs, &mut |c| {
        let mut key: Vec<i64> = if k % 2 == 1 {
            c.iter().map(|v| v.abs()).collect()
        } else {
            c.to_vec()
        };
        key.sort_unstable();
        *classes.entry(key).or_insert(0) += 1;
    });

    struct ClassRow {
        key: Vec<i64>,
        multiplicity: u64,
        rho: u64,
        series: f64,
        integral: f64,
        prediction: f64,
        verdict: &'static str,
    }
    let class_list: Vec<(Vec<i64>, u64)> = classes.into_iter().collect();
    let scale = (b_bound as f64).powi(s as i32 - k as i32);
    let rows: Vec<ClassRow> = class_list
        .into_par_iter()
        .map(|(key, multiplicity)| -> Result<ClassRow> {
            let form = DiagonalForm::new(k, key.clone())?;
            let rho = count_solutions(&form, b_bound, CountMode::AllCoordsNonzero)?;
            let report = local_report(&form, &opts)?;
            let rigorous_insoluble = opts.mode == PrimeSelection::Rigorous
                && matches!(report.overall, OverallVerdict::LocallyInsoluble(_));
            if rigorous_insoluble && rho > 0 {
                return Err(Error::numerical(format!(
                    "form {form} is locally insoluble yet has {rho} integral \
                     solutions: count or verdict is wrong"
                )));
            }
            let series = series_truncated(&form, series_q)?.partial_sum;
            let integral =
                crate::archimedean::singular_integral_quadrature_default(&form)?.value;
            let (prediction, verdict) = if rigorous_insoluble {
                (0.0, "locally_insoluble")
            } else {
                let verdict = match report.overall {
                    OverallVerdict::LocallySoluble => "locally_soluble",
                    OverallVerdict::LocallyInsoluble(_) => "locally_insoluble",
                    OverallVerdict::Undetermined => "undetermined",
                };
                (series * integral * scale, verdict)
            };
            Ok(ClassRow {
                key,
                multiplicity,
                rho,
                series,
                integral,
                prediction,
                verdict,
            })
        })
        .collect::<Result<_>>()?;

    let mut variance_sum = 0.0f64;
    let mut rho_sq_sum: u128 = 0;
    for row in &rows {
        let dev = row.rho as f64 - row.prediction;
        variance_sum += row.multiplicity as f64 * dev * dev;
        rho_sq_sum += u128::from(row.multiplicity) * u128::from(row.rho) * u128::from(row.rho);
    }
    // Reference scale A^{s-2} B^{2s-2k} for eyeballing the sum.
    let reference =
        (a_bound as f64).powi(s as i32 - 2) * (b_bound as f64).powi(2 * (s as i32 - k as i32));
    let hypothesis_holds = hypothesis_window_holds(k, s, a_bound as u64, b_bound)?;

    let results = serde_json::json!({
        "vectors": vectors,
        "class_count": rows.len(),
        "variance_sum": variance_sum,
        "reference_scale": reference,
        "normalized_ratio": variance_sum / reference,
        "sum_rho_squared": rho_sq_sum.to_string(),
        "hypothesis_window_holds": hypothesis_holds,
        "constants_note": "the averaged bound's decay exponent and implied constant \
                           are existence results; this record reports the exact sum \
                           for inspection and estimates neither",
        "caveat": caveat,
        "classes": rows.iter().map(|r| serde_json::json!({
            "coeffs": r.key,
            "multiplicity": r.multiplicity,
            "rho": r.rho,
            "series": r.series,
            "integral": r.integral,
            "prediction": r.prediction,
            "verdict": r.verdict,
        })).collect::<Vec<_>>(),
    });
    let params = serde_json::json!({
        "k": k, "s": s, "A": a_bound, "B": b_bound, "series_q": series_q,
        "mode": opts.mode.as_str(),
    });
    Ok(ExperimentRecord::new("variance", params, 0, results))
}

/// The averaging window `1 <= B^{2k} <= A <= B^{hat_s - k}` under which
/// the variance bound is stated.
fn hypothesis_window_holds(k: u32, s: u32, a_bound: u64, b_bound: u64) -> Result<bool> {
    let hs = hat_s(s)?;
    let b = u128::from(b_bound);
    let a = u128::from(a_bound);
    let lower = match b.checked_pow(2 * k) {
        Some(v) => v,
        None => return Ok(false), // B^{2k} astronomically exceeds any A
    };
    let upper = match b.checked_pow(hs - k) {
        Some(v) => v,
        None => u128::MAX, // effectively unbounded above
    };
    Ok(lower >= 1 && lower <= a && a <= upper)
}

fn enumerate_box_vectors(
    a_bound: i64,
    level: usize,
    coeffs: &mut Vec<i64>,
    visit: &mut impl FnMut(&[i64]),
) {
    if level == coeffs.len() {
        visit(coeffs);
        return;
    }
    for v in (1..=a_bound).chain(-a_bound..=-1) {
        coeffs[level] = v;
        enumerate_box_vectors(a_bound, level + 1, coeffs, visit);
    }
}

// ---------------------------------------------------------------------------
// Exponent fitting
// ---------------------------------------------------------------------------

/// Least-squares slope of `log(count)` against `log(scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Per-point residuals `log(count) - (intercept + slope*log(scale))`.
    pub residuals: Vec<f64>,
    pub max_abs_residual: f64,
}

impl ExponentFit {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "slope": self.slope,
            "intercept": self.intercept,
            "residuals": self.residuals,
            "max_abs_residual": self.max_abs_residual,
        })
    }
}

/// Fit a power law through `(scale, count)` points.
pub fn exponent_fit(points: &[(f64, u64)]) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(Error::domain("exponent fit needs at least 3 points"));
    }
    for &(scale, count) in points {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::domain("scales must be positive and finite"));
        }
        if count == 0 {
            return Err(Error::domain("counts must be positive to take logarithms"));
        }
    }
    let xs: Vec<f64> = points.iter().map(|&(scale, _)| scale.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, count)| (count as f64).ln()).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("all scales coincide; the slope is undefined"));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    let max_abs_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(ExponentFit {
        slope,
        intercept,
        residuals,
        max_abs_residual,
    })
}

// ---------------------------------------------------------------------------
// The run store
// ---------------------------------------------------------------------------

/// Append one record to a JSONL store (one canonical line per record).
pub fn run_store_append(record: &ExperimentRecord, path: &Path) -> Result<()> {
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::resource(format!("cannot open {}: {e}", path.display())))?;
    let line = canonical_json(&record.to_json());
    file.write_all(line.as_bytes())
        .and_then(|_| file.write_all(b"\n"))
        .map_err(|e| Error::resource(format!("cannot write {}: {e}", path.display())))
}

/// A read store: records in file order plus non-fatal warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct StoreContents {
    pub records: Vec<ExperimentRecord>,
    pub warnings: Vec<String>,
}

/// Read a JSONL store, verifying each record's hash.
///
/// A malformed or hash-inconsistent line is an error naming its line
/// number — except a final line missing its newline (an interrupted
/// append), which is skipped with a warning when it does not parse.
pub fn run_store_read(path: &Path) -> Result<StoreContents> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::resource(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = std::io::BufReader::new(file);
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut line_number = 0usize;
    let mut buf = String::new();
    loop {
        buf.clear();
        let read = reader
            .read_line(&mut buf)
            .map_err(|e| Error::resource(format!("read error in {}: {e}", path.display())))?;
        if read == 0 {
            break;
        }
        line_number += 1;
        let complete = buf.ends_with('\n');
        let line = buf.trim_end_matches(['\n', '\r']);
        if line.is_empty() {
            continue;
        }
        let parsed: std::result::Result<serde_json::Value, _> = serde_json::from_str(line);
        match parsed {
            Ok(value) => records.push(
                ExperimentRecord::from_json(&value)
                    .map_err(|e| e.with_context(format!("record at line {line_number}")))?,
            ),
            Err(e) if !complete => {
                warnings.push(format!(
                    "ignoring partial trailing line {line_number}: {e}"
                ));
            }
            Err(e) => {
                return Err(Error::domain(format!(
                    "malformed record at line {line_number}: {e}"
                )));
            }
        }
    }
    Ok(StoreContents { records, warnings })
}
