use std::cell::OnceCell;
use std::collections::BTreeSet;
use std::time::Instant;

use serde_json::{json, Value};
use wce_core::fock::{self, FockElement, GeneratorSet, Strategy};
use wce_core::numfield::CycScalar;
use wce_core::rootdata::{Family, RootDatum};
use wce_core::tausolver::{self as ts, LogSeries, PotentialForm, SolveMode, TauSeries};
use wce_core::twist::{monomial_degree, OperatorEngine, TwistedOperator, VarMonomial};

use crate::cache::{sha256_hex, Cache};
use crate::render;
use crate::{Common, Failure, Format};

/// A validated configuration: every combination that cannot run is
/// rejected here, before any computation starts.
pub struct Ctx {
    pub datum: RootDatum,
    pub strategy: Strategy,
    pub cache: Cache,
    pub format: Format,
    generators: OnceCell<GeneratorSet>,
    engine: OnceCell<OperatorEngine>,
}

impl Ctx {
    pub fn new(c: &Common) -> Result<Self, Failure> {
        let datum = RootDatum::build_with_conductor(c.kind, c.conductor).map_err(|e| Failure::Usage(e.to_string()))?;
        let strategy = c.strategy.unwrap_or_else(|| fock::default_strategy(&datum));
        let kind = datum.kind;
        match strategy {
            Strategy::Builtin if !matches!((kind.family, kind.rank), (Family::A, 1) | (Family::D, 4)) => {
                return Err(Failure::Usage(format!(
                    "no builtin generators for {kind}; use --strategy kernel_solve"
                )));
            }
            Strategy::ModeConstruction if !(kind.family == Family::D && kind.rank == 4) => {
                return Err(Failure::Usage(format!("mode_construction is available for D4 only, not {kind}")));
            }
            _ => {}
        }
        Ok(Ctx {
            datum,
            strategy,
            cache: Cache::new(c.cache_dir.clone()),
            format: c.format,
            generators: OnceCell::new(),
            engine: OnceCell::new(),
        })
    }

    fn key(&self, what: &str) -> String {
        format!("{what}-{}-n{}-{}", self.datum.kind, self.datum.conductor, self.strategy.name())
    }

    pub fn generators(&self) -> Result<&GeneratorSet, Failure> {
        if let Some(g) = self.generators.get() {
            return Ok(g);
        }
        let key = self.key("generators");
        let rank = self.datum.rank();
        let strategy = self.strategy;
        let cached = self.cache.load_with(&key, |text| {
            let g = GeneratorSet::from_json(text).map_err(|e| e.to_string())?;
            if g.generators.len() != rank || g.strategy != strategy {
                return Err("generator set does not match the configuration".to_string());
            }
            Ok(g)
        });
        let g = match cached {
            Some(g) => g,
            None => {
                let start = Instant::now();
                let g = fock::resolve_generators(&self.datum, self.strategy)?;
                eprintln!("generators: built in {:.2?}", start.elapsed());
                self.cache.store(&key, "generators", &g.to_json(&self.datum));
                g
            }
        };
        Ok(self.generators.get_or_init(|| g))
    }

    /// The strategy name, with any per-generator substitution appended,
    /// e.g. `builtin+w4:kernel_solve`.
    pub fn provenance_label(&self, set: &GeneratorSet) -> String {
        let mut label = self.strategy.name().to_string();
        for (i, s) in &set.replaced {
            label.push_str(&format!("+w{}:{}", i + 1, s.name()));
        }
        label
    }

    pub fn engine(&self) -> Result<&OperatorEngine, Failure> {
        if let Some(e) = self.engine.get() {
            return Ok(e);
        }
        let g = self.generators()?;
        for (i, s) in &g.replaced {
            eprintln!(
                "note: {} w_{} fails the screening check; using the {} generator",
                self.strategy.name(),
                i + 1,
                s.name()
            );
        }
        Ok(self.engine.get_or_init(|| OperatorEngine::new(&self.datum, &g.generators)))
    }

    /// τ for the given mode, truncation and targets, through the cache.
    pub fn tau(&self, truncation: i64, mode: SolveMode, targets: &[VarMonomial]) -> Result<TauSeries, Failure> {
        let listing: Vec<String> = targets.iter().map(|m| ts::format_monomial(m)).collect();
        let digest = sha256_hex(listing.join(";").as_bytes());
        let mode_name = match mode {
            SolveMode::Frontier => "frontier",
            SolveMode::GoalDirected => "goal",
        };
        let key = format!("{}-{mode_name}-t{truncation}-g{}", self.key("tau"), &digest[..16]);
        if let Some(t) = self.cache.load_with(&key, TauSeries::from_json) {
            return Ok(t);
        }
        let engine = self.engine()?;
        let start = Instant::now();
        let t = ts::solve_tau(engine, truncation, mode, targets)?;
        eprintln!("tau: {} coefficients in {:.2?}", t.coeffs.len(), start.elapsed());
        self.cache.store(&key, "tau", &t.to_json(&self.datum));
        Ok(t)
    }

    pub fn degree(&self, numerator: i64) -> String {
        degree_text(self.datum.h, numerator)
    }
}

/// A degree numerator over `h` as a reduced fraction.
pub fn degree_text(h: u32, numerator: i64) -> String {
    let h = h as i64;
    let g = gcd(numerator.abs(), h);
    if numerator % h == 0 {
        format!("{}", numerator / h)
    } else {
        format!("{}/{}", numerator / g, h / g)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.max(1) } else { gcd(b, a % b) }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("output serializes"));
}

fn parse_json(text: &str) -> Value {
    serde_json::from_str(text).expect("library JSON is valid")
}

fn residual_sizes(v: &fock::Verification) -> Vec<usize> {
    v.residuals.iter().map(FockElement::len).collect()
}

pub fn generators(ctx: &Ctx, verify: bool) -> Result<bool, Failure> {
    let d = &ctx.datum;
    let set = ctx.generators()?;
    let mut ok = true;

    let mut rows = Vec::new();
    for (i, w) in set.generators.iter().enumerate() {
        let v = fock::verify_in_w(d, w)?;
        ok &= v.passed();
        rows.push((i, w, set.provenance(i), v));
    }

    // The requested construction as given, before any substitution.
    let mut discrepancies = Vec::new();
    if verify && !set.replaced.is_empty() {
        let raw = fock::w_generators(d, ctx.strategy)?;
        for &(i, _) in &set.replaced {
            let v = fock::verify_in_w(d, &raw[i])?;
            if !v.passed() {
                ok = false;
                discrepancies.push((i, v));
            }
        }
    }

    match ctx.format {
        Format::Json => {
            let verification: Vec<Value> = rows
                .iter()
                .map(|(i, w, src, v)| {
                    json!({
                        "index": i + 1,
                        "degree": w.homogeneous_degree(),
                        "source": src.name(),
                        "passed": v.passed(),
                        "residual_terms": residual_sizes(v),
                    })
                })
                .collect();
            let disc: Vec<Value> = discrepancies
                .iter()
                .map(|(i, v)| {
                    json!({
                        "index": i + 1,
                        "strategy": ctx.strategy.name(),
                        "residual_terms": residual_sizes(v),
                        "residuals": v.residuals,
                    })
                })
                .collect();
            print_json(&json!({
                "generator_set": parse_json(&set.to_json(d)),
                "verification": verification,
                "discrepancies": disc,
            }));
        }
        Format::Table => {
            println!("generators  type {}  strategy {}  conductor {}", d.kind, ctx.strategy.name(), d.conductor);
            for (i, w, src, v) in &rows {
                let sizes = residual_sizes(v);
                println!(
                    "w_{}  degree {}  source {}  terms {}  screening residual terms {:?}  {}",
                    i + 1,
                    w.homogeneous_degree().map_or("-".into(), |x| x.to_string()),
                    src.name(),
                    w.len(),
                    sizes,
                    if v.passed() { "in W" } else { "NOT in W" }
                );
                println!("  {w}");
            }
            for (i, s) in &set.replaced {
                println!("replaced: {} w_{} failed the screening check; {} generator used", ctx.strategy.name(), i + 1, s.name());
            }
            for (i, v) in &discrepancies {
                println!(
                    "discrepancy: {} w_{} has screening residual terms {:?}",
                    ctx.strategy.name(),
                    i + 1,
                    residual_sizes(v)
                );
                for (root, r) in v.residuals.iter().enumerate() {
                    if !r.is_zero() {
                        println!("  screening {}: {r}", root + 1);
                    }
                }
            }
            let degrees: Vec<String> = set
                .generators
                .iter()
                .map(|w| w.homogeneous_degree().map_or("-".into(), |x| x.to_string()))
                .collect();
            println!(
                "verdict: {}  (degrees {})",
                if ok { "all generators verified" } else { "verification failed" },
                degrees.join(",")
            );
        }
    }
    Ok(ok)
}

/// Every nonempty sub-multiset of `m`, so log coefficients of `m` are computable.
fn divisors(m: &[(u16, u16)]) -> Vec<VarMonomial> {
    let mut runs: Vec<((u16, u16), usize)> = Vec::new();
    for &v in m {
        match runs.last_mut() {
            Some((w, k)) if *w == v => *k += 1,
            _ => runs.push((v, 1)),
        }
    }
    let mut out = vec![Vec::new()];
    for (v, k) in runs {
        out = out
            .into_iter()
            .flat_map(|base: VarMonomial| {
                (0..=k).map(move |j| {
                    let mut b = base.clone();
                    b.extend(std::iter::repeat_n(v, j));
                    b
                })
            })
            .collect();
    }
    out.retain(|x| !x.is_empty());
    out
}

pub fn tau(
    ctx: &Ctx,
    max_degree_num: Option<i64>,
    goal_texts: &[String],
    mode: Option<SolveMode>,
    want_log: bool,
) -> Result<bool, Failure> {
    let d = &ctx.datum;
    let goals: Vec<VarMonomial> = goal_texts
        .iter()
        .map(|g| ts::parse_monomial(g, d.rank()).map_err(|e| Failure::Usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    let goal_max = goals.iter().map(|g| monomial_degree(d, g)).max();
    let truncation = match (max_degree_num, goal_max) {
        (Some(t), Some(g)) => t.max(g),
        (Some(t), None) => t,
        (None, Some(g)) => g,
        (None, None) => return Err(Failure::Usage("tau needs --max-degree-num or at least one --goal".into())),
    };
    if truncation < 0 {
        return Err(Failure::Usage("--max-degree-num must be nonnegative".into()));
    }
    let mode = mode.unwrap_or(if goals.is_empty() { SolveMode::Frontier } else { SolveMode::GoalDirected });
    let targets: Vec<VarMonomial> = match mode {
        SolveMode::Frontier => Vec::new(),
        SolveMode::GoalDirected => {
            let set: BTreeSet<VarMonomial> = goals.iter().flat_map(|g| divisors(g)).collect();
            set.into_iter().collect()
        }
    };
    let series = ctx.tau(truncation, mode, &targets)?;
    let log = if want_log || !goals.is_empty() { Some(ts::log_series(d, &series)?) } else { None };

    let goal_rows: Vec<(VarMonomial, CycScalar, Option<(CycScalar, u32)>)> = goals
        .iter()
        .map(|g| {
            let t = series.get(g).cloned().unwrap_or_default();
            let l = log.as_ref().and_then(|l| l.coeffs.get(g).cloned());
            (g.clone(), t, l)
        })
        .collect();

    let mode_name = match mode {
        SolveMode::Frontier => "frontier",
        SolveMode::GoalDirected => "goal_directed",
    };
    match ctx.format {
        Format::Json => {
            let goals_json: Vec<Value> = goal_rows
                .iter()
                .map(|(g, t, l)| {
                    json!({
                        "monomial": ts::format_monomial(g),
                        "degree_numerator": monomial_degree(d, g),
                        "tau": t,
                        "tau_display": t.to_string(),
                        "log": l.as_ref().map(|(c, _)| c.clone()).unwrap_or_default(),
                        "log_display": l.as_ref().map_or("0".to_string(), |(c, _)| c.to_string()),
                        "genus": l.as_ref().map(|(_, g)| *g),
                    })
                })
                .collect();
            print_json(&json!({
                "mode": mode_name,
                "goals": goals_json,
                "tau": parse_json(&series.to_json(d)),
                "log": log.as_ref().map(|l| parse_json(&l.to_json(d))),
            }));
        }
        Format::Table => {
            println!(
                "tau  type {}  strategy {}  mode {}  truncation {}  computed {}",
                d.kind,
                ctx.strategy.name(),
                mode_name,
                ctx.degree(truncation),
                series.coeffs.len()
            );
            for (g, t, l) in &goal_rows {
                println!("goal {}  degree {}", ts::format_monomial(g), ctx.degree(monomial_degree(d, g)));
                println!("  tau  {}", render::scalar(t));
                match l {
                    Some((c, genus)) => println!("  log  {}  genus {genus}", render::scalar(c)),
                    None => println!("  log  0"),
                }
            }
            if goals.is_empty() {
                println!("tau coefficients (nonzero)");
                print_series(ctx, series.nonzero().map(|(m, c)| (m, c, None)));
            }
            if let Some(l) = log.as_ref().filter(|_| want_log) {
                println!("log coefficients");
                print_log(ctx, l);
            }
        }
    }
    Ok(true)
}

fn print_series<'a>(ctx: &Ctx, rows: impl Iterator<Item = (&'a VarMonomial, &'a CycScalar, Option<u32>)>) {
    let d = &ctx.datum;
    let mut rows: Vec<_> = rows.collect();
    rows.sort_by(|a, b| (monomial_degree(d, a.0), a.0).cmp(&(monomial_degree(d, b.0), b.0)));
    for (m, c, genus) in rows {
        let g = genus.map_or(String::new(), |g| format!("  genus {g}"));
        println!("  {:>6}  {:<24}  {}{g}", ctx.degree(monomial_degree(d, m)), ts::format_monomial(m), render::scalar(c));
    }
}

fn print_log(ctx: &Ctx, log: &LogSeries) {
    print_series(ctx, log.coeffs.iter().map(|(m, (c, g))| (m, c, Some(*g))));
}

pub fn potential(
    ctx: &Ctx,
    form: PotentialForm,
    no_reference: bool,
    max_degree_num: Option<i64>,
) -> Result<bool, Failure> {
    let d = &ctx.datum;
    let is_d4 = d.kind.family == Family::D && d.kind.rank == 4;
    if form != PotentialForm::Native && !is_d4 {
        return Err(Failure::Usage(format!("the {} form is defined for D4 only", form.name())));
    }
    if !is_d4 && !no_reference {
        return Err(Failure::Usage(format!("no stored reference potential for {}; pass --no-reference", d.kind)));
    }
    let h = d.h as i64;
    let bound = max_degree_num.unwrap_or(h * h - 1);
    let targets: Vec<VarMonomial> = ts::monomials_by_degree(d, bound)
        .into_iter()
        .flatten()
        .filter(|m| !m.is_empty() && m.iter().all(|v| v.1 == 0))
        .collect();
    let series = ctx.tau(bound, SolveMode::GoalDirected, &targets)?;
    let f = ts::frobenius_potential(d, &ts::log_series(d, &series)?);
    let g = ts::transform_potential(d, &f, form)?;
    let wdvv = match ts::wdvv_check(&g) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("wdvv: {e}");
            false
        }
    };
    let qh = ts::quasi_homogeneous(d, &f);
    let reference = if no_reference { None } else { Some(ts::d4_reference(d, form)?) };
    let names = form.variable_names(d.rank());
    let differences: Vec<(Vec<u32>, CycScalar, CycScalar)> = reference
        .as_ref()
        .map(|r| {
            let keys: BTreeSet<Vec<u32>> = g.terms().chain(r.terms()).map(|(e, _)| e.clone()).collect();
            keys.into_iter()
                .filter_map(|e| {
                    let (got, want) = (g.coeff(&e), r.coeff(&e));
                    (got != want).then_some((e, got, want))
                })
                .collect()
        })
        .unwrap_or_default();
    let matched = reference.as_ref().map(|_| differences.is_empty());
    let ok = wdvv && qh && matched != Some(false);

    match ctx.format {
        Format::Json => {
            let terms: Vec<Value> = g
                .terms()
                .map(|(e, c)| {
                    json!({
                        "exponents": e,
                        "monomial": render::poly_monomial(e, &names),
                        "coefficient": c,
                        "display": c.to_string(),
                        "approx": render::approx(c),
                    })
                })
                .collect();
            let diffs: Vec<Value> = differences
                .iter()
                .map(|(e, got, want)| json!({
                        "monomial": render::poly_monomial(e, &names),
                        "computed": got,
                        "reference": want,
                        "computed_display": got.to_string(),
                        "reference_display": want.to_string(),
                    }))
                .collect();
            print_json(&json!({
                "type": d.kind.to_string(),
                "form": form.name(),
                "degree_bound_numerator": bound,
                "targets": targets.len(),
                "variables": names,
                "terms": terms,
                "wdvv": wdvv,
                "quasi_homogeneous": qh,
                "reference": matched.map(|m| json!({"matched": m, "differences": diffs})),
            }));
        }
        Format::Table => {
            println!(
                "potential  type {}  form {}  strategy {}  small-phase monomials up to degree {}: {}",
                d.kind,
                form.name(),
                ctx.strategy.name(),
                ctx.degree(bound),
                targets.len()
            );
            println!("F = ({} terms)", g.len());
            for line in render::poly_table(&g, &names) {
                println!("{line}");
            }
            println!("WDVV: {wdvv}");
            println!("quasi-homogeneous: {qh}");
            match matched {
                None => println!("reference: skipped"),
                Some(true) => println!("reference: exact match ({} terms)", g.len()),
                Some(false) => {
                    println!("reference: MISMATCH in {} monomials", differences.len());
                    for (e, got, want) in &differences {
                        println!(
                            "  {}  computed {}  reference {}",
                            render::poly_monomial(e, &names),
                            render::scalar(got),
                            render::scalar(want)
                        );
                    }
                }
            }
        }
    }
    Ok(ok)
}

pub fn operators(ctx: &Ctx, i: usize, m: u32, window: Option<i64>) -> Result<bool, Failure> {
    let d = &ctx.datum;
    if i == 0 || i > d.rank() {
        return Err(Failure::Usage(format!("--i must lie in 1..={}", d.rank())));
    }
    let idx = i - 1;
    let window = window.unwrap_or(d.h as i64 * (d.exponents[idx] as i64 + 1));
    let key = format!("{}-i{i}-m{m}-w{window}", ctx.key("operator"));
    let label = ctx.provenance_label(ctx.generators()?);
    let op = match ctx.cache.load_with(&key, TwistedOperator::from_json) {
        Some(op) => op,
        None => {
            let engine = ctx.engine()?;
            let start = Instant::now();
            let op = engine.operator(idx, m, window)?;
            eprintln!("operator: {} terms in {:.2?}", op.terms.len(), start.elapsed());
            ctx.cache.store(&key, "operator", &op.to_json(d, &label));
            op
        }
    };
    match ctx.format {
        Format::Json => println!("{}", op.to_json(d, &label)),
        Format::Table => print!("{}", op.to_text(d, &label)),
    }
    Ok(true)
}
