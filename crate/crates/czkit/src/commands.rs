//! The five subcommands. Each returns its JSON report and whether the
//! checked property held.

use std::path::Path;

use czk_core::admissible::{AdmissibleTriple, FBound};
use czk_core::bumps::cutoff_on;
use czk_core::dyadic::{DyadicInterval, Interval, LagomWindow};
use czk_core::exec::Executor;
use czk_core::kernels::{fit_admissible, parse_kernel_spec, builtin_kernel, verify_compact_czk, CzKernel};
use czk_core::operators::{
    assemble, assembly_key, dual_pair, necessity_bound_check, pair_functions, prop47_bound_check, t1_decay_slope, t1_limit, t1_table,
    tail_norm, weak_compactness_scan, weak_compactness_scan_by, BoundParameters, CoefficientMatrix,
};
use czk_core::paraproduct::{paraproduct_compactness, Paraproduct};
use czk_core::spaces::{bmo_wavelet_norm, cmo_modulus, default_atom_family, make_atom, t1_coefficients, t1_in_cmo_test, CmoTestSpec, SUP_RESTRICTION};
use czk_core::wavelets::{CoefficientMap, WaveletBasis};
use serde::Serialize;

use crate::cache::{Lookup, MatrixCache};
use crate::config::RunConfig;
use crate::error::{config, Result};
use crate::exec::Pool;
use crate::report::{points, to_json, Num, WindowOut};

/// Largest T_b(1) reproduction error accepted on interior intervals.
pub const REPRODUCTION_TOLERANCE: f64 = 1e-6;
/// Largest |⟨T_b ψ_I, 1⟩| accepted on interior intervals.
pub const ANNIHILATION_TOLERANCE: f64 = 1e-8;
/// Largest kernel-route versus coefficient-route discrepancy.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-6;
/// Disjoint wavelet pairs in the consistency check.
pub const CONSISTENCY_WAVELET_PAIRS: usize = 60;
/// Violations listed in a kernel report; the count is always complete.
pub const LISTED_VIOLATIONS: usize = 256;

/// Everything a command needs besides its config.
pub struct Context {
    pub cfg: RunConfig,
    pub pool: Pool,
    pub cache: Option<MatrixCache>,
}

/// A finished command.
pub struct Outcome {
    pub json: String,
    pub passed: bool,
    pub cache: Lookup,
}

impl Context {
    fn basis(&self) -> Result<WaveletBasis> {
        Ok(WaveletBasis::new(self.cfg.basis_params())?)
    }

    /// b coefficients from a builtin name or a coefficient-map file.
    fn paraproduct(&self, b: &str, b_file: Option<&str>, basis: &WaveletBasis, window: &LagomWindow) -> Result<Paraproduct> {
        match b_file {
            Some(path) => {
                let c = crate::report::read_coefficients(Path::new(path))?;
                Ok(Paraproduct::new(format!("file:{path}"), c, basis.clone(), *window)?)
            }
            None => Ok(Paraproduct::builtin_on(b, basis.clone(), *window, &self.pool)?),
        }
    }

    /// The configured kernel, with overrides and its triple attached.
    fn kernel(&self, basis: &WaveletBasis, window: &LagomWindow) -> Result<(CzKernel, Option<Paraproduct>)> {
        let (name, params) = parse_kernel_spec(&self.cfg.kernel.spec);
        let (mut k, para) = if name == "paraproduct" {
            let pc = &self.cfg.paraproduct;
            let p = if params.is_empty() { self.paraproduct(&pc.b, pc.b_file.as_deref(), basis, window)? } else { self.paraproduct(&params, None, basis, window)? };
            (p.kernel()?, Some(p))
        } else {
            (builtin_kernel(&name, &params)?, None)
        };
        if let Some(c) = self.cfg.kernel.constant {
            k = k.with_constant(c);
        }
        if let Some(d) = self.cfg.kernel.delta {
            k = k.with_delta(d)?;
        }
        let triple = if self.cfg.kernel.triple == "fitted" {
            fit_admissible(&k, &self.cfg.sample_spec(), &self.pool)?
        } else {
            AdmissibleTriple::builtin(&self.cfg.kernel.triple)?
        };
        Ok((k.with_triple(triple), para))
    }

    /// Kernel matrices go through the cache; paraproduct matrices come
    /// straight from the coefficient formula, which is cheaper than a lookup.
    fn matrix(&self, k: &CzKernel, para: Option<&Paraproduct>, basis: &WaveletBasis, window: &LagomWindow) -> Result<(CoefficientMatrix, Lookup)> {
        if let Some(p) = para {
            return Ok((p.coefficient_matrix(&self.pool)?, Lookup::Disabled));
        }
        let build = || Ok(assemble(k, basis, window, &self.cfg.quadrature_spec(), &self.pool)?);
        match &self.cache {
            Some(c) => c.get_or_build(&assembly_key(k, basis, window, &self.cfg.quadrature_spec()), &k.id(), build),
            None => Ok((build()?, Lookup::Disabled)),
        }
    }
}

#[derive(Serialize)]
struct ViolationOut {
    t: Num,
    x: Num,
    tp: Num,
    xp: Num,
    ratio: Num,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct Envelopes {
    L: Vec<crate::report::Point>,
    S: Vec<crate::report::Point>,
    D: Vec<crate::report::Point>,
}

#[derive(Serialize)]
struct KernelReport {
    kernel: String,
    delta: Num,
    declared_constant: Num,
    fitted_constant: Num,
    violation_count: usize,
    violations: Vec<ViolationOut>,
    envelopes: Envelopes,
}

pub fn kernel_verify(ctx: &Context) -> Result<Outcome> {
    let basis = ctx.basis()?;
    let window = ctx.cfg.window()?;
    let (k, _) = ctx.kernel(&basis, &window)?;
    let d = verify_compact_czk(&k, &ctx.cfg.sample_spec(), &ctx.pool)?;
    let [l, s, dd] = &d.envelopes;
    let report = KernelReport {
        kernel: d.kernel.clone(),
        delta: Num(d.delta),
        declared_constant: Num(d.declared_constant),
        fitted_constant: Num(d.fitted_constant),
        violation_count: d.violations.len(),
        violations: d
            .violations
            .iter()
            .take(LISTED_VIOLATIONS)
            .map(|v| ViolationOut { t: Num(v.tuple.t), x: Num(v.tuple.x), tp: Num(v.tuple.tp), xp: Num(v.tuple.xp), ratio: Num(v.ratio) })
            .collect(),
        envelopes: Envelopes { L: points(l), S: points(s), D: points(dd) },
    };
    Ok(Outcome { json: to_json(&report)?, passed: d.violations.is_empty(), cache: Lookup::Disabled })
}

#[derive(Serialize)]
struct MValue {
    m: u32,
    value: Num,
}

#[derive(Serialize)]
struct WeakOut {
    epsilon: Num,
    m: u32,
    constant: Num,
    family: &'static str,
}

#[derive(Serialize)]
struct IntervalOut {
    j: i32,
    k: i64,
}

impl From<DyadicInterval> for IntervalOut {
    fn from(i: DyadicInterval) -> Self {
        IntervalOut { j: i.j, k: i.k }
    }
}

#[derive(Serialize)]
struct CompactnessReport {
    kernel: String,
    window: WindowOut,
    tail_norms: Vec<MValue>,
    tail_norms_nonincreasing: bool,
    weak_fit: WeakOut,
    prop47_constant: Num,
    prop47_worst_pair: Option<[IntervalOut; 2]>,
    necessity_constant: Num,
    necessity_holds: bool,
    flagged_entries: usize,
}

/// Tolerance on "nonincreasing" for computed norms.
fn nonincreasing(vals: &[f64]) -> bool {
    vals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15)
}

pub fn compactness(ctx: &Context) -> Result<Outcome> {
    let basis = ctx.basis()?;
    let window = ctx.cfg.window()?;
    let cc = &ctx.cfg.compactness;
    let (k, para) = ctx.kernel(&basis, &window)?;
    let (a, lookup) = ctx.matrix(&k, para.as_ref(), &basis, &window)?;
    let tails: Vec<f64> = cc.ms.iter().map(|&m| tail_norm(&a, m)).collect::<czk_core::Result<_>>()?;
    let weak_triple = AdmissibleTriple::builtin(&cc.weak_triple)?;
    let kernel_triple = k.triple.clone().expect("kernel() attaches a triple");
    let fb = FBound::new(kernel_triple, weak_triple, window.m);
    let weak = match &para {
        Some(p) => weak_compactness_scan_by(&|f, g| Ok(p.pair(f, g)?.value), &basis, &window, &fb, cc.epsilon, &ctx.pool)?,
        None => weak_compactness_scan(&k, &basis, &window, &fb, cc.epsilon, &ctx.cfg.quadrature_spec(), &ctx.pool)?,
    };
    let params = BoundParameters::new(cc.theta, k.delta, cc.n, window.m).map_err(|e| config(e.to_string()))?;
    let bound = prop47_bound_check(&a, &params, &fb, cc.epsilon)?;
    let nec = necessity_bound_check(&a, cc.p, window.m, cc.n)?;
    let report = CompactnessReport {
        kernel: a.kernel.clone(),
        window: WindowOut::from(&window),
        tail_norms: cc.ms.iter().zip(&tails).map(|(&m, &v)| MValue { m, value: Num(v) }).collect(),
        tail_norms_nonincreasing: nonincreasing(&tails),
        weak_fit: WeakOut { epsilon: Num(weak.epsilon), m: weak.m, constant: Num(weak.constant), family: weak.family },
        prop47_constant: Num(bound.constant),
        prop47_worst_pair: bound.worst.map(|(i, j)| [i.into(), j.into()]),
        necessity_constant: Num(nec.constant),
        necessity_holds: nec.holds,
        flagged_entries: a.flagged.len(),
    };
    let passed = report.tail_norms_nonincreasing && nec.holds;
    Ok(Outcome { json: to_json(&report)?, passed, cache: lookup })
}

/// Results of the T_b(1), T_b*(1) and consistency identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityChecks {
    pub reproduction_error: f64,
    pub annihilation_error: f64,
    pub wavelet_pairs: usize,
    pub wavelet_pair_error: f64,
    pub bump_pairs: usize,
    pub bump_pair_error: f64,
}

impl IdentityChecks {
    pub fn pass(&self) -> bool {
        self.reproduction_error <= REPRODUCTION_TOLERANCE
            && self.annihilation_error <= ANNIHILATION_TOLERANCE
            && self.wavelet_pairs + self.bump_pairs >= 50
            && self.wavelet_pair_error.max(self.bump_pair_error) <= CONSISTENCY_TOLERANCE
    }
}

/// Wavelet pairs at the three finest scales whose supports are separated
/// by at least the kernel floor, evenly thinned to `count`.
pub fn disjoint_wavelet_pairs(p: &Paraproduct, count: usize) -> Result<Vec<(DyadicInterval, DyadicInterval)>> {
    let w = &p.window;
    let ivs: Vec<DyadicInterval> = w.intervals()?.into_iter().filter(|i| i.j >= w.j_max - 2).collect();
    let floor = p.kernel_floor();
    let mut all = Vec::new();
    for i in &ivs {
        for j in &ivs {
            let (a0, a1) = p.basis.support(i);
            let (b0, b1) = p.basis.support(j);
            if a1 + floor <= b0 || b1 + floor <= a0 {
                all.push((*i, *j));
            }
        }
    }
    if all.len() <= count {
        return Ok(all);
    }
    Ok((0..count).map(|n| all[n * all.len() / count]).collect())
}

/// Disjoint plateau pairs at several scales, on both sides of the origin.
pub fn disjoint_bump_pairs() -> Vec<(Interval, Interval)> {
    let mut out = Vec::new();
    for s in [0.25, 0.5, 1.0, 2.0] {
        for a in -3..=3 {
            for gap in [1.0, 3.0] {
                let ca = a as f64 * s;
                // plateau bumps reach 2s from their center
                let cb = ca + 4.0 * s + gap * s;
                out.push((Interval { center: ca, length: s }, Interval { center: cb, length: s }));
            }
        }
    }
    out
}

pub fn paraproduct_identities(p: &Paraproduct, exec: &dyn Executor) -> Result<IdentityChecks> {
    let w = &p.window;
    let one = p.window_one()?;
    let interior: Vec<DyadicInterval> = w.intervals()?.into_iter().filter(|i| w.j_min < i.j && i.j < w.j_max).collect();
    let reproduction = exec.map(interior.len(), &|n| {
        let i = interior[n];
        p.pair(&one, &p.basis.psi(&i)).map_or(f64::NAN, |v| (v.value - p.b.get(&i)).abs())
    });
    let annihilation = exec.map(interior.len(), &|n| p.pair(&p.basis.psi(&interior[n]), &one).map_or(f64::NAN, |v| v.value.abs()));
    let k = p.kernel()?;
    let q = czk_core::operators::QuadratureSpec::default();
    let wpairs = disjoint_wavelet_pairs(p, CONSISTENCY_WAVELET_PAIRS)?;
    let werr = exec.map(wpairs.len(), &|n| {
        let (i, j) = wpairs[n];
        let kv = dual_pair(&k, &p.basis, &i, &j, &q);
        let cv = p.pair(&p.basis.psi(&i), &p.basis.psi(&j));
        match (kv, cv) {
            (Ok(a), Ok(b)) => (a - b.value).abs(),
            _ => f64::NAN,
        }
    });
    let bpairs = disjoint_bump_pairs();
    let berr = exec.map(bpairs.len(), &|n| {
        let (f, g) = (cutoff_on(&bpairs[n].0), cutoff_on(&bpairs[n].1));
        match (pair_functions(&k, &f, &g, &q), p.pair(&f, &g)) {
            (Ok(a), Ok(b)) => (a - b.value).abs(),
            _ => f64::NAN,
        }
    });
    let max = |v: &[f64]| -> Result<f64> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(czk_core::Error::Quadrature("paraproduct identity evaluation failed".into()).into());
        }
        Ok(v.iter().fold(0.0, |m: f64, x| m.max(*x)))
    };
    Ok(IdentityChecks {
        reproduction_error: max(&reproduction)?,
        annihilation_error: max(&annihilation)?,
        wavelet_pairs: wpairs.len(),
        wavelet_pair_error: max(&werr)?,
        bump_pairs: bpairs.len(),
        bump_pair_error: max(&berr)?,
    })
}

#[derive(Serialize)]
struct ParaproductReport {
    b: String,
    window: WindowOut,
    reproduction_error: Num,
    annihilation_error: Num,
    consistency_wavelet_pairs: usize,
    consistency_wavelet_error: Num,
    consistency_bump_pairs: usize,
    consistency_bump_error: Num,
    tail_norms: Vec<MValue>,
    b_tail_bmo: Vec<MValue>,
    fitted_constant: Num,
    tail_bound_holds: bool,
}

pub fn paraproduct(ctx: &Context) -> Result<Outcome> {
    let basis = ctx.basis()?;
    let window = ctx.cfg.window()?;
    let pc = &ctx.cfg.paraproduct;
    let p = ctx.paraproduct(&pc.b, pc.b_file.as_deref(), &basis, &window)?;
    let ids = paraproduct_identities(&p, &ctx.pool)?;
    let comp = paraproduct_compactness(&p, &pc.ms, &ctx.pool)?;
    let row = |vals: &[(u32, f64)]| vals.iter().map(|&(m, v)| MValue { m, value: Num(v) }).collect::<Vec<_>>();
    let report = ParaproductReport {
        b: p.b_name.clone(),
        window: WindowOut::from(&window),
        reproduction_error: Num(ids.reproduction_error),
        annihilation_error: Num(ids.annihilation_error),
        consistency_wavelet_pairs: ids.wavelet_pairs,
        consistency_wavelet_error: Num(ids.wavelet_pair_error),
        consistency_bump_pairs: ids.bump_pairs,
        consistency_bump_error: Num(ids.bump_pair_error),
        tail_norms: row(&comp.tail_norms),
        b_tail_bmo: row(&comp.b_tails),
        fitted_constant: Num(comp.constant),
        tail_bound_holds: comp.holds,
    };
    Ok(Outcome { json: to_json(&report)?, passed: ids.pass() && comp.holds, cache: Lookup::Disabled })
}

#[derive(Serialize)]
struct T1Row {
    k: i32,
    value: Num,
    error_bound: Num,
    /// |value(k+1) − value(k)|; absent on the last row.
    step: Option<Num>,
}

#[derive(Serialize)]
struct T1Report {
    kernel: String,
    interval: [Num; 2],
    plateau_center: Num,
    atom_seed: u64,
    table: Vec<T1Row>,
    limit: Num,
    decay_slope: Option<Num>,
    steps_within_bound: bool,
}

pub fn t1(ctx: &Context) -> Result<Outcome> {
    let basis = ctx.basis()?;
    let window = ctx.cfg.window()?;
    let tc = &ctx.cfg.t1;
    let (k, _) = ctx.kernel(&basis, &window)?;
    let i = Interval::from_endpoints(tc.interval_left, tc.interval_left + tc.interval_length)?;
    let atom = make_atom(&i, tc.seed, tc.p)?;
    let table = t1_table(&k, &atom.profile, &i, tc.a, tc.k_min..=tc.k_max, k.constant, &ctx.cfg.quadrature_spec())?;
    let limit = t1_limit(&table, k.delta)?;
    let slope = t1_decay_slope(&table).ok();
    let mut within = true;
    let rows: Vec<T1Row> = table
        .iter()
        .enumerate()
        .map(|(n, r)| {
            let step = table.get(n + 1).map(|next| (next.value - r.value).abs());
            if let Some(s) = step {
                within &= s <= r.error_bound;
            }
            T1Row { k: r.k, value: Num(r.value), error_bound: Num(r.error_bound), step: step.map(Num) }
        })
        .collect();
    let report = T1Report {
        kernel: k.id(),
        interval: [Num(i.left()), Num(i.right())],
        plateau_center: Num(tc.a),
        atom_seed: tc.seed,
        table: rows,
        limit: Num(limit),
        decay_slope: slope.map(Num),
        steps_within_bound: within,
    };
    Ok(Outcome { json: to_json(&report)?, passed: within, cache: Lookup::Disabled })
}

#[derive(Serialize)]
struct T1CmoRow {
    m: u32,
    sup: Num,
}

#[derive(Serialize)]
struct CmoReport {
    b: String,
    window: WindowOut,
    restriction: &'static str,
    bmo_norm: Num,
    modulus: Vec<MValue>,
    nonincreasing: bool,
    /// sup over the atom family of |⟨P_M^⊥ T(1), f⟩| for the configured kernel.
    #[serde(skip_serializing_if = "Option::is_none")]
    t1_in_cmo: Option<Vec<T1CmoRow>>,
}

pub fn cmo(ctx: &Context) -> Result<Outcome> {
    let basis = ctx.basis()?;
    let window = ctx.cfg.window()?;
    let cc = &ctx.cfg.cmo;
    let p = ctx.paraproduct(&cc.b, cc.b_file.as_deref(), &basis, &window)?;
    let c: &CoefficientMap = &p.b;
    let bmo = bmo_wavelet_norm(c, &window);
    let mods: Vec<f64> = cc.ms.iter().map(|&m| cmo_modulus(c, m, &window)).collect::<czk_core::Result<_>>()?;
    let mut passed = nonincreasing(&mods) && mods.iter().all(|&v| v <= bmo * (1.0 + 1e-12));
    let t1_rows = if cc.t1 {
        let (k, _) = ctx.kernel(&basis, &window)?;
        let spec = CmoTestSpec::default();
        let coeffs = t1_coefficients(&k, &basis, &window, &spec, &ctx.pool)?;
        let atoms = default_atom_family(&window, 2.0)?;
        let rows = t1_in_cmo_test(&coeffs, &basis, &atoms, &cc.ms, spec.level, &ctx.pool)?;
        passed &= rows.iter().all(|r| r.nonincreasing);
        Some(rows.iter().map(|r| T1CmoRow { m: r.m, sup: Num(r.sup) }).collect())
    } else {
        None
    };
    let report = CmoReport {
        b: p.b_name.clone(),
        window: WindowOut::from(&window),
        restriction: SUP_RESTRICTION,
        bmo_norm: Num(bmo),
        modulus: cc.ms.iter().zip(&mods).map(|(&m, &v)| MValue { m, value: Num(v) }).collect(),
        nonincreasing: nonincreasing(&mods),
        t1_in_cmo: t1_rows,
    };
    Ok(Outcome { json: to_json(&report)?, passed, cache: Lookup::Disabled })
}
