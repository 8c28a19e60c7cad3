//! End-to-end computation: algebra choice, cached Brandt data, newform
//! selection, the two basis forms, and their serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::Serialize;

use crate::brandt::{candidates, ideal_classes, BrandtMatrix, BrandtModule, BrandtRecord, EigenformData};
use crate::config::{JobConfig, OutputFormat, Selector};
use crate::error::{Error, Result};
use crate::lattice::eichler_order;
use crate::lift::{assemble_h, local_k, KKind, LiftProfile};
use crate::linalg::Rat;
use crate::numth::{is_prime, prime_divisors};
use crate::quat::QuaternionAlgebra;
use crate::theta::{class_thetas, kohnen_form_for, leading_sign, QExpansion};

/// Odd-size subsets of `primes`, by size and then lexicographically.
pub fn odd_subsets(primes: &[u64]) -> Vec<Vec<u64>> {
    let k = primes.len();
    let mut out: Vec<Vec<u64>> = (0u32..1 << k)
        .filter(|m| m.count_ones() % 2 == 1)
        .map(|m| (0..k).filter(|i| m >> i & 1 == 1).map(|i| primes[i]).collect())
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Largest `n` for which `B(n)` is needed.
pub fn brandt_bound(level: u64, prec: u64, extra: u64) -> u64 {
    let max_bad = prime_divisors(level).into_iter().max().unwrap_or(0);
    let hecke = (3..).find(|&p| is_prime(p) && level % p != 0).unwrap_or(3);
    [29, max_bad, prec.isqrt() + 1, hecke, extra].into_iter().max().unwrap_or(29)
}

/// Smallest prime not dividing `4N`.
pub fn first_good_prime(level: u64) -> u64 {
    (3..).find(|&p| is_prime(p) && level % p != 0).unwrap_or(3)
}

fn cache_path(dir: &Path, alg: &QuaternionAlgebra, level: u64) -> PathBuf {
    dir.join(format!("brandt-a{}-b{}-N{}.json", alg.a, alg.b, level))
}

/// Brandt data for `(alg, level)` up to `bound`, read from or written to the cache.
pub fn load_module(alg: &QuaternionAlgebra, level: u64, bound: u64, cache_dir: Option<&Path>) -> Result<BrandtModule> {
    if let Some(dir) = cache_dir {
        let path = cache_path(dir, alg, level);
        if path.exists() {
            let text = fs::read_to_string(&path)?;
            let rec: BrandtRecord =
                serde_json::from_str(&text).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
            if rec.bound >= bound {
                return Ok(BrandtModule::from_record(&rec, alg, level)?.truncated(bound)?);
            }
        }
    }
    let order = eichler_order(alg, level)?;
    let classes = ideal_classes(alg, &order, level)?;
    let module = BrandtModule::new(classes, bound)?;
    if let Some(dir) = cache_dir {
        fs::create_dir_all(dir)?;
        let path = cache_path(dir, alg, level);
        let text = serde_json::to_string(&module.to_record(alg)?).map_err(|e| Error::Cache(e.to_string()))?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
    }
    Ok(module)
}

/// A resolved newform together with its Brandt module.
#[derive(Debug, Clone)]
pub struct Selection {
    pub algebra: QuaternionAlgebra,
    pub module: BrandtModule,
    pub eigenform: EigenformData,
}

/// Resolves the selector against the rational newform candidates of every
/// admissible algebra.
pub fn select(config: &JobConfig, prec: u64) -> Result<Selection> {
    config.validate()?;
    let level = config.level;
    let (selector, from_file) = config.effective_selector()?;
    let bad = prime_divisors(level);
    let mut subsets = odd_subsets(&bad);
    let mut extra = 0;
    if let Selector::Prefix(m) = &selector {
        extra = m.keys().copied().max().unwrap_or(0);
        if bad.iter().all(|p| m.contains_key(p)) {
            let sign: i64 = bad.iter().map(|p| -m[p].signum()).product();
            if sign == 1 {
                return Err(Error::EvenRootNumber);
            }
        }
        subsets.retain(|s| bad.iter().all(|p| m.get(p).is_none_or(|&b| (b == 1) == s.contains(p))));
    }
    let bound = brandt_bound(level, prec, extra);
    let mut irrational = false;
    let mut found: Vec<Selection> = Vec::new();
    for s in subsets {
        let alg = QuaternionAlgebra::ramified_at(&s)?;
        let module = load_module(&alg, level, bound, config.cache_dir.as_deref())?;
        let scan = candidates(&module, &s)?;
        irrational |= scan.irrational;
        for e in scan.candidates {
            let keep = match &selector {
                Selector::Index(_) => true,
                Selector::Prefix(m) => m.iter().all(|(p, b)| e.eigenvalues.get(p) == Some(b)),
            };
            if keep {
                found.push(Selection { algebra: alg.clone(), module: module.clone(), eigenform: e });
            }
        }
        if let Selector::Index(i) = selector {
            if found.len() > i {
                return Ok(found.swap_remove(i));
            }
        }
    }
    match selector {
        Selector::Index(_) if irrational => Err(Error::IrrationalEigenspace),
        Selector::Index(_) => Err(Error::NotFound),
        Selector::Prefix(_) => match found.len() {
            1 => Ok(found.pop().expect("one element")),
            0 if irrational => Err(Error::IrrationalEigenspace),
            0 if from_file => Err(Error::NewformConflict),
            0 => Err(Error::NotFound),
            n => Err(Error::AmbiguousSelector(n)),
        },
    }
}

/// `g`, `h` and the data that produced them.
#[derive(Debug, Clone)]
pub struct Basis {
    pub level: u64,
    pub algebra: QuaternionAlgebra,
    pub unit_counts: Vec<u64>,
    pub eigenform: EigenformData,
    pub g: QExpansion,
    pub h: QExpansion,
}

/// Builds `g` from class thetas known to `4 * prec`, fixes its sign so the
/// first nonzero coefficient is positive, and assembles `h`.
pub fn finish_basis(
    level: u64,
    eigenform: &EigenformData,
    thetas: &[QExpansion],
    prec: u64,
) -> Result<(EigenformData, QExpansion, QExpansion)> {
    let mut e = eigenform.clone();
    let mut g = kohnen_form_for(&e, thetas)?;
    if g.is_zero() {
        return Err(Error::ZeroForm);
    }
    if leading_sign(&g) < 0 {
        e = e.negated();
        g = g.scale(&Rat::from_integer(BigInt::from(-1)));
    }
    let profile = LiftProfile::from_eigenform(level, &e)?;
    let h = assemble_h(&g, &profile, prec)?;
    Ok((e, g, h))
}

pub fn compute_basis(config: &JobConfig) -> Result<Basis> {
    let prec = config.precision;
    let sel = select(config, prec)?;
    let thetas = class_thetas(&sel.module.classes, 4 * prec)?;
    let (eigenform, g, h) = finish_basis(config.level, &sel.eigenform, &thetas, prec)?;
    Ok(Basis {
        level: config.level,
        algebra: sel.algebra,
        unit_counts: sel.module.classes.unit_counts.clone(),
        eigenform,
        g: g.truncate(prec),
        h,
    })
}

#[derive(Serialize)]
struct Meta<'a> {
    level: u64,
    ramified: &'a [u64],
    algebra: &'a QuaternionAlgebra,
    class_number: usize,
    unit_counts: &'a [u64],
    vector: Vec<String>,
    eigenvalues: &'a BTreeMap<u64, i64>,
    atkin_lehner: &'a BTreeMap<u64, i32>,
}

fn meta<'a>(level: u64, alg: &'a QuaternionAlgebra, units: &'a [u64], e: &'a EigenformData) -> Meta<'a> {
    Meta {
        level,
        ramified: &alg.ramified,
        algebra: alg,
        class_number: units.len(),
        unit_counts: units,
        vector: e.vector.iter().map(|x| x.to_string()).collect(),
        eigenvalues: &e.eigenvalues,
        atkin_lehner: &e.al_signs,
    }
}

fn meta_text(out: &mut String, m: &Meta<'_>) {
    let join = |v: Vec<String>| v.join(" ");
    let _ = writeln!(out, "# level {}", m.level);
    let _ = writeln!(out, "# ramified {}", join(m.ramified.iter().map(u64::to_string).collect()));
    let _ = writeln!(out, "# algebra a={} b={}", m.algebra.a, m.algebra.b);
    let _ = writeln!(out, "# class_number {}", m.class_number);
    let _ = writeln!(out, "# unit_counts {}", join(m.unit_counts.iter().map(u64::to_string).collect()));
    let _ = writeln!(out, "# vector {}", join(m.vector.clone()));
    let _ = writeln!(out, "# eigenvalues {}", join(m.eigenvalues.iter().map(|(p, b)| format!("{p}:{b}")).collect()));
    let _ = writeln!(out, "# atkin_lehner {}", join(m.atkin_lehner.iter().map(|(p, w)| format!("{p}:{w}")).collect()));
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn render_basis(b: &Basis, format: OutputFormat) -> Result<String> {
    let m = meta(b.level, &b.algebra, &b.unit_counts, &b.eigenform);
    match format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                #[serde(flatten)]
                meta: Meta<'a>,
                g: &'a QExpansion,
                h: &'a QExpansion,
            }
            to_json(&Doc { meta: m, g: &b.g, h: &b.h })
        }
        OutputFormat::Text => {
            let mut out = String::new();
            meta_text(&mut out, &m);
            let _ = writeln!(out, "[g]");
            out.push_str(&b.g.to_text());
            let _ = writeln!(out, "[h]");
            out.push_str(&b.h.to_text());
            Ok(out)
        }
    }
}

pub fn cmd_basis(config: &JobConfig) -> Result<String> {
    render_basis(&compute_basis(config)?, config.format)
}

pub fn cmd_brandt(config: &JobConfig) -> Result<String> {
    let sel = select(config, config.precision)?;
    let module = &sel.module;
    let matrices: Vec<BrandtMatrix> = (1..=module.bound).map(|n| module.matrix(n)).collect::<std::result::Result<_, _>>()?;
    let m = meta(config.level, &sel.algebra, &module.classes.unit_counts, &sel.eigenform);
    match config.format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                #[serde(flatten)]
                meta: Meta<'a>,
                bound: u64,
                matrices: &'a [BrandtMatrix],
            }
            to_json(&Doc { meta: m, bound: module.bound, matrices: &matrices })
        }
        OutputFormat::Text => {
            let mut out = String::new();
            meta_text(&mut out, &m);
            for b in &matrices {
                let _ = writeln!(out, "[B({})]", b.n);
                for row in &b.entries {
                    let cells: Vec<String> = row.iter().map(i64::to_string).collect();
                    let _ = writeln!(out, "{}", cells.join(" "));
                }
            }
            Ok(out)
        }
    }
}

pub fn cmd_theta(config: &JobConfig) -> Result<String> {
    let sel = select(config, config.precision)?;
    let thetas = class_thetas(&sel.module.classes, config.precision)?;
    let m = meta(config.level, &sel.algebra, &sel.module.classes.unit_counts, &sel.eigenform);
    match config.format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                #[serde(flatten)]
                meta: Meta<'a>,
                thetas: &'a [QExpansion],
            }
            to_json(&Doc { meta: m, thetas: &thetas })
        }
        OutputFormat::Text => {
            let mut out = String::new();
            meta_text(&mut out, &m);
            for (i, t) in thetas.iter().enumerate() {
                let _ = writeln!(out, "[theta {}]", i + 1);
                out.push_str(&t.to_text());
            }
            Ok(out)
        }
    }
}

/// One row of the local factor table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KRow {
    pub n: u64,
    pub k1: [f64; 2],
    pub k2: [f64; 2],
}

fn parts(z: Complex64) -> [f64; 2] {
    // Avoid printing -0.
    let clean = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
    [clean(z.re), clean(z.im)]
}

pub fn local_factor_table(config: &JobConfig, from: u64, to: u64) -> Result<(Selection, Vec<KRow>)> {
    if from == 0 || from > to {
        return Err(Error::InvalidConfig(format!("bad range {from}..{to}")));
    }
    let sel = select(config, config.precision.max(to))?;
    let mut e = sel.eigenform.clone();
    // K does not depend on the sign of the vector; match the basis output anyway.
    let thetas = class_thetas(&sel.module.classes, 4 * to)?;
    if let Ok(g) = kohnen_form_for(&e, &thetas) {
        if leading_sign(&g) < 0 {
            e = e.negated();
        }
    }
    let profile = LiftProfile::from_eigenform(config.level, &e)?;
    let rows = (from..=to)
        .map(|n| {
            Ok(KRow { n, k1: parts(local_k(&profile, KKind::K1, n)?), k2: parts(local_k(&profile, KKind::K2, n)?) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((Selection { eigenform: e, ..sel }, rows))
}

pub fn cmd_localfactors(config: &JobConfig, from: u64, to: u64) -> Result<String> {
    let (sel, rows) = local_factor_table(config, from, to)?;
    let m = meta(config.level, &sel.algebra, &sel.module.classes.unit_counts, &sel.eigenform);
    match config.format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                #[serde(flatten)]
                meta: Meta<'a>,
                rows: &'a [KRow],
            }
            to_json(&Doc { meta: m, rows: &rows })
        }
        OutputFormat::Text => {
            let mut out = String::new();
            meta_text(&mut out, &m);
            let _ = writeln!(out, "# n re(K1) im(K1) re(K2) im(K2)");
            for r in &rows {
                let _ = writeln!(out, "{} {:.12} {:.12} {:.12} {:.12}", r.n, r.k1[0], r.k1[1], r.k2[0], r.k2[1]);
            }
            Ok(out)
        }
    }
}
