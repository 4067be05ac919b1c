//! Catalog runs and report serialization.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraContext, AlgebraElement};
use crate::group::{
    build_group, parse_group_spec, FiniteGroup, GroupSpec, GroupTable, DEFAULT_GROUP_CAP,
};
use crate::theorem::{
    centralizer_power_property, condition_iii, record_case1, record_case2, verify_engel_expansion,
    verify_equivalence, witness_case3, Budgets, EquivalenceVerdict, UnitStatus, WitnessCase,
    WitnessRecord,
};
use crate::units::{DEFAULT_ABSTRACT_CAP, DEFAULT_ENUMERATION_CAP};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const WORKERS_ENV: &str = "VSTAR_WORKERS";

const ENGEL_EXPANSION_INSTANCES: usize = 8;
const ENGEL_EXPANSION_DEPTH: usize = 16;
const ALGEBRA_LAW_INSTANCES: usize = 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => Err(format!("unknown format `{other}` (json, csv, text)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Text => "text",
        })
    }
}

pub fn default_catalog() -> Vec<GroupSpec> {
    [
        "catalog:C,2",
        "catalog:C,3",
        "catalog:C,4",
        "catalog:C,6",
        "prod:catalog:C,2|catalog:C,2",
        "prod:catalog:C,3|catalog:C,3",
        "catalog:S3",
        "catalog:D,4",
        "catalog:Q8",
        "catalog:D,6",
        "catalog:A4",
        "prod:catalog:S3|catalog:C,3",
        "prod:catalog:C,4|catalog:C,2",
    ]
    .iter()
    .map(|s| parse_group_spec(s).expect("catalog spec"))
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub primes: Vec<u64>,
    pub specs: Vec<GroupSpec>,
    pub enumeration_cap: u64,
    pub abstract_cap: usize,
    pub engel_budget: u64,
    pub seed: u64,
    pub format: OutputFormat,
    /// `None` disables the per-entry wall-clock budget.
    pub time_budget_secs: Option<u64>,
    /// Worker threads; 0 means rayon's default.
    pub workers: usize,
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = Budgets::default();
        Self {
            primes: vec![2, 3],
            specs: default_catalog(),
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            abstract_cap: DEFAULT_ABSTRACT_CAP,
            engel_budget: b.engel_budget,
            seed: 0,
            format: OutputFormat::Json,
            time_budget_secs: b.time_budget.map(|d| d.as_secs()),
            workers: 0,
            timings: false,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| ConfigError::InvalidValue {
            key: key.into(),
            reason: e.to_string(),
        })
}

fn parse_primes(key: &str, value: &str) -> Result<Vec<u64>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

impl RunConfig {
    /// Reads `key = value` lines. `#` starts a comment; `spec` may repeat and
    /// replaces the default catalog on first use.
    pub fn from_kv(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut specs = None::<Vec<GroupSpec>>;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                reason: "expected `key = value`".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "primes" => cfg.primes = parse_primes(key, value)?,
                "spec" => specs
                    .get_or_insert_with(Vec::new)
                    .push(parse_value(key, value)?),
                "enumeration_cap" => cfg.enumeration_cap = parse_value(key, value)?,
                "abstract_cap" => cfg.abstract_cap = parse_value(key, value)?,
                "engel_budget" => cfg.engel_budget = parse_value(key, value)?,
                "seed" => cfg.seed = parse_value(key, value)?,
                "format" => cfg.format = parse_value(key, value)?,
                "time_budget_secs" => {
                    cfg.time_budget_secs = match value {
                        "none" | "0" => None,
                        v => Some(parse_value(key, v)?),
                    }
                }
                "workers" => cfg.workers = parse_value(key, value)?,
                "timings" => cfg.timings = parse_value(key, value)?,
                other => return Err(ConfigError::UnknownKey(other.into())),
            }
        }
        if let Some(specs) = specs {
            cfg.specs = specs;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::InvalidValue {
                    key: key.into(),
                    reason: "must be positive".into(),
                })
            }
        };
        positive("enumeration_cap", self.enumeration_cap > 0)?;
        positive("abstract_cap", self.abstract_cap > 0)
    }

    /// Worker count from `VSTAR_WORKERS`, if set and valid.
    pub fn workers_from_env() -> Option<usize> {
        std::env::var(WORKERS_ENV).ok()?.trim().parse().ok()
    }

    pub fn budgets(&self, seed: u64) -> Budgets {
        Budgets {
            enumeration_cap: self.enumeration_cap,
            abstract_cap: self.abstract_cap,
            engel_budget: self.engel_budget,
            seed,
            time_budget: self.time_budget_secs.map(Duration::from_secs),
        }
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            primes: self.primes.clone(),
            specs: self.specs.iter().map(ToString::to_string).collect(),
            enumeration_cap: self.enumeration_cap,
            abstract_cap: self.abstract_cap,
            engel_budget: self.engel_budget,
            seed: self.seed,
            time_budget_secs: self.time_budget_secs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigEcho {
    pub primes: Vec<u64>,
    pub specs: Vec<String>,
    pub enumeration_cap: u64,
    pub abstract_cap: usize,
    pub engel_budget: u64,
    pub seed: u64,
    pub time_budget_secs: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessFailure {
    pub case: WitnessCase,
    pub group: String,
    pub p: u32,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteCount {
    pub suite: &'static str,
    pub group: String,
    pub p: u32,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntryTiming {
    pub group: String,
    pub p: u32,
    pub millis: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub tool_version: &'static str,
    pub config: ConfigEcho,
    pub verdicts: Vec<EquivalenceVerdict>,
    pub witnesses: Vec<WitnessRecord>,
    pub witness_failures: Vec<WitnessFailure>,
    pub property_suites: Vec<SuiteCount>,
    /// Totals per suite name.
    pub suite_totals: BTreeMap<&'static str, (usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<EntryTiming>>,
}

impl VerificationReport {
    pub fn all_consistent(&self) -> bool {
        self.verdicts.iter().all(|v| v.consistent)
    }

    pub fn witnesses_passed(&self) -> bool {
        self.witness_failures.is_empty()
            && self.witnesses.iter().all(WitnessRecord::passed)
            && self.property_suites.iter().all(|s| s.failed == 0)
    }

    /// Drives the process exit code.
    pub fn passed(&self) -> bool {
        self.all_consistent() && self.witnesses_passed()
    }
}

/// Everything produced for one `(spec, p)` pair.
#[derive(Debug, Clone, Default)]
pub struct EntryOutput {
    pub verdict: Option<EquivalenceVerdict>,
    pub witnesses: Vec<WitnessRecord>,
    pub failures: Vec<WitnessFailure>,
    pub suites: Vec<SuiteCount>,
    pub millis: u128,
}

fn entry_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs every `(spec, p)` pair, fanning entries out over `config.workers`
/// threads, and assembles the report in config order.
pub fn run_catalog(config: &RunConfig) -> VerificationReport {
    let jobs: Vec<(usize, &GroupSpec, u64)> = config
        .specs
        .iter()
        .flat_map(|s| config.primes.iter().map(move |&p| (s, p)))
        .enumerate()
        .map(|(i, (s, p))| (i, s, p))
        .collect();
    let run = || -> Vec<EntryOutput> {
        jobs.par_iter()
            .map(|&(i, spec, p)| run_entry(spec, p, config, entry_seed(config.seed, i)))
            .collect()
    };
    let outputs = match rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
    {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    assemble(config, outputs)
}

fn assemble(config: &RunConfig, outputs: Vec<EntryOutput>) -> VerificationReport {
    let mut report = VerificationReport {
        tool_version: TOOL_VERSION,
        config: config.echo(),
        verdicts: Vec::new(),
        witnesses: Vec::new(),
        witness_failures: Vec::new(),
        property_suites: Vec::new(),
        suite_totals: BTreeMap::new(),
        timings: config.timings.then(Vec::new),
    };
    for out in outputs {
        if let (Some(t), Some(v)) = (report.timings.as_mut(), out.verdict.as_ref()) {
            t.push(EntryTiming {
                group: v.group.clone(),
                p: v.p,
                millis: out.millis,
            });
        }
        report.verdicts.extend(out.verdict);
        report.witnesses.extend(out.witnesses);
        report.witness_failures.extend(out.failures);
        for s in &out.suites {
            let total = report.suite_totals.entry(s.suite).or_default();
            total.0 += s.passed;
            total.1 += s.failed;
        }
        report.property_suites.extend(out.suites);
    }
    report
}

fn unbuilt_verdict(name: String, p: u64, reason: String) -> EquivalenceVerdict {
    EquivalenceVerdict {
        group: name,
        group_order: 0,
        p: p as u32,
        modular: false,
        predicate_iii: false,
        v_status: UnitStatus::Skipped {
            reason: reason.clone(),
        },
        vstar_status: UnitStatus::Skipped { reason },
        consistent: true,
    }
}

/// One catalog entry: the equivalence verdict plus every applicable witness
/// construction and property suite.
pub fn run_entry(spec: &GroupSpec, p: u64, config: &RunConfig, seed: u64) -> EntryOutput {
    let start = Instant::now();
    let name = spec.to_string();
    let mut out = EntryOutput::default();
    let group = match build_group(spec, DEFAULT_GROUP_CAP) {
        Ok(g) => Arc::new(g),
        Err(e) => {
            out.verdict = Some(unbuilt_verdict(name, p, e.to_string()));
            return out;
        }
    };
    out.verdict = Some(verify_equivalence(
        group.clone(),
        &name,
        p,
        &config.budgets(seed),
    ));
    if let Ok(ctx) = AlgebraContext::new(group.clone(), p) {
        let (w, f) = all_witnesses(&ctx, &name, None);
        out.witnesses = w;
        out.failures = f;
        out.suites.push(algebra_law_suite(&ctx, &name, seed));
        if let Some(s) = engel_expansion_suite(&ctx, &name, seed) {
            out.suites.push(s);
        }
    }
    if let Some(s) = centralizer_power_suite(&group, &name, p) {
        out.suites.push(s);
    }
    out.millis = start.elapsed().as_millis();
    out
}

fn failure(
    case: WitnessCase,
    ctx: &AlgebraContext,
    name: &str,
    e: impl ToString,
) -> WitnessFailure {
    WitnessFailure {
        case,
        group: name.to_string(),
        p: ctx.p(),
        error: e.to_string(),
    }
}

/// Every valid input for the three witness constructions (or only `case`).
pub fn all_witnesses(
    ctx: &AlgebraContext,
    name: &str,
    case: Option<WitnessCase>,
) -> (Vec<WitnessRecord>, Vec<WitnessFailure>) {
    let g = ctx.group();
    let p = ctx.p() as u64;
    let central = g.central_order_p_elements(p).unwrap_or_default();
    let wants = |c: WitnessCase| case.is_none_or(|x| x == c);
    let (mut records, mut failures) = (Vec::new(), Vec::new());
    let mut push = |r: Result<WitnessRecord, _>, c: WitnessCase| match r {
        Ok(r) => records.push(r),
        Err(e) => failures.push(failure(c, ctx, name, e)),
    };
    for &c in &central {
        if wants(WitnessCase::Case1) {
            for x in g.elements() {
                push(record_case1(ctx, name, x, c), WitnessCase::Case1);
            }
        }
        if p == 2 && wants(WitnessCase::Case2) {
            for x in g.elements() {
                let sq = g.mul(x, x);
                if sq == g.identity() || sq == c {
                    push(record_case2(ctx, name, x, c), WitnessCase::Case2);
                }
            }
        }
        if p > 2 && wants(WitnessCase::Case3) {
            let involutions: Vec<usize> =
                g.elements().filter(|&x| g.element_order(x) == 2).collect();
            for &a in &involutions {
                for &b in &involutions {
                    if g.commutator(a, b) != g.identity() && g.element_order(g.mul(a, b)) > 2 {
                        push(witness_case3(ctx, name, a, b, c), WitnessCase::Case3);
                    }
                }
            }
        }
    }
    (records, failures)
}

fn random_element(ctx: &AlgebraContext, rng: &mut ChaCha8Rng) -> AlgebraElement {
    let p = ctx.p();
    let coeffs = (0..ctx.dim()).map(|_| rng.gen_range(0..p) as u8).collect();
    ctx.element(coeffs).expect("residues in range")
}

/// Seeded instances of the ring, involution and augmentation laws, plus
/// centrality and square-zero of `ĉ` when a central `c` of order `p` exists.
pub fn algebra_law_suite(ctx: &AlgebraContext, name: &str, seed: u64) -> SuiteCount {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = ctx.p();
    let hats: Vec<AlgebraElement> = ctx
        .group()
        .central_order_p_elements(p as u64)
        .unwrap_or_default()
        .into_iter()
        .filter_map(|c| ctx.hat(c).ok())
        .collect();
    let mut count = SuiteCount {
        suite: "algebra_laws",
        group: name.to_string(),
        p,
        passed: 0,
        failed: 0,
    };
    for _ in 0..ALGEBRA_LAW_INSTANCES {
        let (a, b, c) = (
            random_element(ctx, &mut rng),
            random_element(ctx, &mut rng),
            random_element(ctx, &mut rng),
        );
        let ab = &a * &b;
        let mut ok = &ab * &c == &a * &(&b * &c)
            && &a * &(&b + &c) == &ab + &(&a * &c)
            && &(&a + &b) * &c == &(&a * &c) + &(&b * &c)
            && ab.involution() == &b.involution() * &a.involution()
            && a.involution().involution() == a
            && ab.augmentation() == a.augmentation() * b.augmentation() % p;
        for hat in &hats {
            ok &= &a * hat == hat * &a && (hat * hat).is_zero();
        }
        if ok {
            count.passed += 1;
        } else {
            count.failed += 1;
        }
    }
    count
}

/// Seeded `(g, h, c)` triples checked with [`verify_engel_expansion`] up to
/// depth 16. `None` without a central element of order `p`.
pub fn engel_expansion_suite(ctx: &AlgebraContext, name: &str, seed: u64) -> Option<SuiteCount> {
    let g = ctx.group();
    let central = g.central_order_p_elements(ctx.p() as u64).ok()?;
    if central.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(17));
    let mut count = SuiteCount {
        suite: "engel_expansion",
        group: name.to_string(),
        p: ctx.p(),
        passed: 0,
        failed: 0,
    };
    for _ in 0..ENGEL_EXPANSION_INSTANCES {
        let x = rng.gen_range(0..g.order());
        let h = rng.gen_range(0..g.order());
        let c = central[rng.gen_range(0..central.len())];
        match verify_engel_expansion(ctx, x, h, c, ENGEL_EXPANSION_DEPTH) {
            Ok(true) => count.passed += 1,
            _ => count.failed += 1,
        }
    }
    Some(count)
}

fn centralizer_power_suite(g: &FiniteGroup, name: &str, p: u64) -> Option<SuiteCount> {
    if !condition_iii(g, p).ok()? {
        return None;
    }
    let passed = centralizer_power_property(g, p)
        .map(|r| r.passed())
        .unwrap_or(false);
    Some(SuiteCount {
        suite: "centralizer_power",
        group: name.to_string(),
        p: p as u32,
        passed: passed as usize,
        failed: (!passed) as usize,
    })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    group: &'a str,
    group_order: usize,
    p: u32,
    modular: bool,
    predicate_iii: bool,
    v_status: &'static str,
    v_order: Option<usize>,
    v_class: Option<usize>,
    vstar_status: &'static str,
    vstar_order: Option<usize>,
    vstar_class: Option<usize>,
    consistent: bool,
}

fn status_name(s: &UnitStatus) -> &'static str {
    match s {
        UnitStatus::NilpotentWithClass { .. } => "nilpotent",
        UnitStatus::NonNilpotentWitness { .. } => "not_nilpotent",
        UnitStatus::Skipped { .. } => "skipped",
    }
}

fn status_class(s: &UnitStatus) -> Option<usize> {
    match s {
        UnitStatus::NilpotentWithClass { class, .. } => Some(*class),
        _ => None,
    }
}

fn status_text(s: &UnitStatus) -> String {
    match s {
        UnitStatus::NilpotentWithClass { order, class, .. } => {
            format!("nilpotent (order {order}, class {class})")
        }
        UnitStatus::NonNilpotentWitness { order, x, y, .. } => {
            format!("not nilpotent (order {order}; Engel witness x = {x}, y = {y})")
        }
        UnitStatus::Skipped { reason } => format!("skipped ({reason})"),
    }
}

pub fn emit_report(report: &VerificationReport, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report).expect("report serializes");
            out.push(b'\n');
            out
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if report.verdicts.is_empty() {
                w.write_record([
                    "group",
                    "group_order",
                    "p",
                    "modular",
                    "predicate_iii",
                    "v_status",
                    "v_order",
                    "v_class",
                    "vstar_status",
                    "vstar_order",
                    "vstar_class",
                    "consistent",
                ])
                .expect("in-memory write");
            }
            for v in &report.verdicts {
                w.serialize(CsvRow {
                    group: &v.group,
                    group_order: v.group_order,
                    p: v.p,
                    modular: v.modular,
                    predicate_iii: v.predicate_iii,
                    v_status: status_name(&v.v_status),
                    v_order: v.v_status.order(),
                    v_class: status_class(&v.v_status),
                    vstar_status: status_name(&v.vstar_status),
                    vstar_order: v.vstar_status.order(),
                    vstar_class: status_class(&v.vstar_status),
                    consistent: v.consistent,
                })
                .expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
        OutputFormat::Text => text_report(report).into_bytes(),
    }
}

fn text_report(report: &VerificationReport) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "vstar {} | seed {} | {} entries",
        report.tool_version,
        report.config.seed,
        report.verdicts.len()
    );
    for v in &report.verdicts {
        let _ = writeln!(
            s,
            "\n{} (|G| = {}) over GF({}){}\n  predicate: {}\n  V:   {}\n  V_*: {}\n  consistent: {}",
            v.group,
            v.group_order,
            v.p,
            if v.modular { "" } else { " [non-modular]" },
            v.predicate_iii,
            status_text(&v.v_status),
            status_text(&v.vstar_status),
            v.consistent
        );
    }
    let passed = report.witnesses.iter().filter(|w| w.passed()).count();
    let _ = writeln!(
        s,
        "\nwitnesses: {passed}/{} passed, {} construction errors",
        report.witnesses.len(),
        report.witness_failures.len()
    );
    for f in &report.witness_failures {
        let _ = writeln!(s, "  {:?} {} p={}: {}", f.case, f.group, f.p, f.error);
    }
    for (suite, (ok, bad)) in &report.suite_totals {
        let _ = writeln!(s, "{suite}: {ok} passed, {bad} failed");
    }
    if let Some(t) = &report.timings {
        for e in t {
            let _ = writeln!(s, "time {} p={}: {} ms", e.group, e.p, e.millis);
        }
    }
    let _ = writeln!(
        s,
        "\noverall: {}",
        if report.passed() { "PASS" } else { "FAIL" }
    );
    s
}
