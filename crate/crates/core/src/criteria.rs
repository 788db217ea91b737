//! Separability tests and the combined decision pipeline.
//!
//! Necessary tests (PPT, the Ky Fan upper bound) can only certify
//! entanglement; constructive tests (the Ky Fan sufficient bound, the
//! two-qubit rule, Werner and isotropic recognition) can only certify
//! separability, and always do so with an explicit decomposition.
//! [`analyze`] runs them all and combines the evidence.

use std::fmt;

use nalgebra::DVector;

use crate::bipartite::{
    self, compose_state, decompose_matrix, decompose_state, local_ranks, normal_form, partial_transpose,
    support_projection, BipartiteDecomposed, SupportProjection,
};
use crate::bloch::{bloch_of_matrix, from_bloch, BlochVector};
use crate::decompose::{self, Construction, FactorizationFrame};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::horn::{self, HornReport};
use crate::linalg::{self, ComplexMatrix, RealMatrix};
use crate::states;

/// Every numerical threshold used by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    /// Smallest eigenvalue still counted as non-negative.
    pub positivity: f64,
    pub rank: f64,
    /// Marginal norm at which filtering stops.
    pub normal_form: f64,
    pub max_iter: usize,
    /// Marginal norm below which a state is accepted as already normal.
    pub normal_form_precondition: f64,
    /// Relative slack on norm bounds.
    pub slack: f64,
    /// Largest entry-wise residual accepted in the decomposition equations.
    pub residual: f64,
    pub probability_sum: f64,
    /// Positivity tolerance for the local states of a decomposition.
    pub physicality: f64,
    pub seed: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: linalg::HERMITIAN_TOL,
            positivity: 1e-9,
            rank: bipartite::RANK_TOL,
            normal_form: bipartite::NORMAL_FORM_TOL,
            max_iter: bipartite::NORMAL_FORM_MAX_ITER,
            normal_form_precondition: 1e-8,
            slack: 1e-9,
            residual: 1e-8,
            probability_sum: 1e-10,
            physicality: 1e-8,
            seed: 0,
        }
    }
}

impl Tolerances {
    /// Sets the tolerance used for the entangled/separable decisions
    /// (bound slack and PPT positivity).
    pub fn with_decision_tol(mut self, tol: f64) -> Self {
        self.slack = tol;
        self.positivity = tol;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionEntry {
    pub p: f64,
    pub r: BlochVector,
    pub s: BlochVector,
}

/// `rho = sum_i p_i rho(r_i) (x) rho(s_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableDecomposition {
    dim_a: usize,
    dim_b: usize,
    entries: Vec<DecompositionEntry>,
}

impl SeparableDecomposition {
    pub fn new(dim_a: usize, dim_b: usize, entries: Vec<DecompositionEntry>) -> Self {
        SeparableDecomposition { dim_a, dim_b, entries }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn entries(&self) -> &[DecompositionEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.p).collect()
    }

    /// `M_rp` and `M_sp`: columns `sqrt(p_i) r_i` and `sqrt(p_i) s_i`.
    pub fn factor_matrices(&self) -> (RealMatrix, RealMatrix) {
        let la = self.dim_a * self.dim_a - 1;
        let lb = self.dim_b * self.dim_b - 1;
        let mut a = RealMatrix::zeros(la, self.len());
        let mut b = RealMatrix::zeros(lb, self.len());
        for (j, e) in self.entries.iter().enumerate() {
            let w = e.p.max(0.0).sqrt();
            a.set_column(j, &(e.r.components() * w));
            b.set_column(j, &(e.s.components() * w));
        }
        (a, b)
    }

    /// `(sum p r, sum p s, sum p r s^T)`.
    pub fn moments(&self) -> (DVector<f64>, DVector<f64>, RealMatrix) {
        let la = self.dim_a * self.dim_a - 1;
        let lb = self.dim_b * self.dim_b - 1;
        let mut a = DVector::zeros(la);
        let mut b = DVector::zeros(lb);
        let mut t = RealMatrix::zeros(la, lb);
        for e in &self.entries {
            a.axpy(e.p, e.r.components(), 1.0);
            b.axpy(e.p, e.s.components(), 1.0);
            t.ger(e.p, e.r.components(), e.s.components(), 1.0);
        }
        (a, b, t)
    }

    /// The state the decomposition describes.
    pub fn to_state(&self) -> BipartiteDecomposed {
        let (a, b, t) = self.moments();
        BipartiteDecomposed {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            a: BlochVector::new(self.dim_a, a).expect("length"),
            b: BlochVector::new(self.dim_b, b).expect("length"),
            corr: t,
        }
    }

    /// Maps each local state through `rho -> V rho V^dagger` (isometries
    /// from the support back to the full spaces).
    pub fn lift(&self, va: &ComplexMatrix, vb: &ComplexMatrix) -> SeparableDecomposition {
        let map = |r: &BlochVector, v: &ComplexMatrix| {
            let rho = from_bloch(r).into_matrix();
            bloch_of_matrix(&linalg::hermitian_part(&(v * rho * v.adjoint())))
        };
        let entries =
            self.entries.iter().map(|e| DecompositionEntry { p: e.p, r: map(&e.r, va), s: map(&e.s, vb) }).collect();
        SeparableDecomposition::new(va.nrows(), vb.nrows(), entries)
    }

    /// Undoes a local filtering `(F_A (x) F_B) rho (F_A (x) F_B)^dagger / t`:
    /// each product term is mapped through the inverse filters and the
    /// weights are renormalized.
    pub fn unfilter(&self, filter_a: &ComplexMatrix, filter_b: &ComplexMatrix) -> Result<SeparableDecomposition> {
        let inv_a = filter_a.clone().try_inverse().ok_or(Error::NotPsd(0.0))?;
        let inv_b = filter_b.clone().try_inverse().ok_or(Error::NotPsd(0.0))?;
        let map = |r: &BlochVector, inv: &ComplexMatrix| {
            let rho = inv * from_bloch(r).into_matrix() * inv.adjoint();
            let rho = linalg::hermitian_part(&rho);
            let w = rho.trace().re;
            (bloch_of_matrix(&rho.unscale(w)), w)
        };
        let mut entries = Vec::with_capacity(self.len());
        for e in &self.entries {
            let (r, wa) = map(&e.r, &inv_a);
            let (s, wb) = map(&e.s, &inv_b);
            entries.push(DecompositionEntry { p: e.p * wa * wb, r, s });
        }
        let total: f64 = entries.iter().map(|e| e.p).sum();
        for e in &mut entries {
            e.p /= total;
        }
        Ok(SeparableDecomposition::new(self.dim_a, self.dim_b, entries))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyReport {
    pub valid: bool,
    /// Largest entry-wise residual of `sum p r = a`, `sum p s = b`,
    /// `sum p r s^T = T`.
    pub max_residual: f64,
    pub probability_defect: f64,
    /// Smallest eigenvalue over all local states.
    pub min_local_eigenvalue: f64,
}

pub fn verify_decomposition(dec: &SeparableDecomposition, d: &BipartiteDecomposed) -> VerifyReport {
    verify_decomposition_with(dec, d, &Tolerances::default())
}

pub fn verify_decomposition_with(
    dec: &SeparableDecomposition,
    d: &BipartiteDecomposed,
    tol: &Tolerances,
) -> VerifyReport {
    let invalid = VerifyReport {
        valid: false,
        max_residual: f64::INFINITY,
        probability_defect: f64::INFINITY,
        min_local_eigenvalue: f64::NEG_INFINITY,
    };
    if dec.dims() != d.dims() || dec.is_empty() {
        return invalid;
    }
    let total: f64 = dec.entries.iter().map(|e| e.p).sum();
    let probability_defect = (total - 1.0).abs();
    let positive = dec.entries.iter().all(|e| e.p > 0.0 && e.p.is_finite());
    let (a, b, t) = dec.moments();
    let max_residual = (&a - d.a.components())
        .amax()
        .max((&b - d.b.components()).amax())
        .max(linalg::max_abs(&(&t - &d.corr)));
    let mut min_local = f64::INFINITY;
    for e in &dec.entries {
        for v in [&e.r, &e.s] {
            let m = from_bloch(v).min_eigenvalue().unwrap_or(f64::NEG_INFINITY);
            min_local = min_local.min(m);
        }
    }
    let valid = positive
        && probability_defect <= tol.probability_sum
        && max_residual <= tol.residual
        && min_local >= -tol.physicality;
    VerifyReport { valid, max_residual, probability_defect, min_local_eigenvalue: min_local }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Criterion {
    TrivialFactor,
    Ppt,
    NecessaryKyFan,
    TwoQubit,
    SufficientKyFan,
    Werner,
    Isotropic,
    NormalFormLimit,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::TrivialFactor => "trivial-factor",
            Criterion::Ppt => "ppt",
            Criterion::NecessaryKyFan => "kyfan-necessary",
            Criterion::TwoQubit => "two-qubit",
            Criterion::SufficientKyFan => "kyfan-sufficient",
            Criterion::Werner => "werner",
            Criterion::Isotropic => "isotropic",
            Criterion::NormalFormLimit => "normal-form-limit",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a single test concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// A necessary condition for separability failed.
    Violated,
    /// A necessary condition held.
    Satisfied,
    /// A constructive test produced a verified decomposition.
    Constructed,
    /// A constructive test did not apply.
    NotApplicable,
}

/// One line of evidence. `margin = value - bound`; positive margins mean
/// the bound is exceeded.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionRecord {
    pub criterion: Criterion,
    pub outcome: Outcome,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
    pub note: String,
}

impl CriterionRecord {
    fn new(criterion: Criterion, outcome: Outcome, value: f64, bound: f64, note: impl Into<String>) -> Self {
        CriterionRecord { criterion, outcome, value, bound, margin: value - bound, note: note.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Separable,
    Entangled,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Separable => "separable",
            Status::Entangled => "entangled",
            Status::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone)]
pub enum Evidence {
    Decomposition(SeparableDecomposition),
    Violation { criterion: Criterion, margin: f64 },
    Undecided { horn: Option<HornReport> },
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub status: Status,
    pub evidence: Evidence,
    pub records: Vec<CriterionRecord>,
    pub normal_form_iterations: Option<usize>,
    pub normal_form_converged: Option<bool>,
}

impl Verdict {
    pub fn decomposition(&self) -> Option<&SeparableDecomposition> {
        match &self.evidence {
            Evidence::Decomposition(d) => Some(d),
            _ => None,
        }
    }

    pub fn record(&self, c: Criterion) -> Option<&CriterionRecord> {
        self.records.iter().find(|r| r.criterion == c)
    }

    fn from_records(records: Vec<CriterionRecord>, decompositions: Vec<(Criterion, SeparableDecomposition)>) -> Self {
        let mut records = records;
        records.sort_by_key(|r| r.criterion);
        let violation = records
            .iter()
            .filter(|r| r.outcome == Outcome::Violated)
            .min_by_key(|r| r.criterion)
            .map(|r| (r.criterion, r.margin));
        let mut decompositions = decompositions;
        decompositions.sort_by_key(|(c, _)| *c);
        let (status, evidence) = if let Some((criterion, margin)) = violation {
            (Status::Entangled, Evidence::Violation { criterion, margin })
        } else if let Some((_, d)) = decompositions.into_iter().next() {
            (Status::Separable, Evidence::Decomposition(d))
        } else {
            (Status::Inconclusive, Evidence::Undecided { horn: None })
        };
        Verdict { status, evidence, records, normal_form_iterations: None, normal_form_converged: None }
    }
}

/// Sum of singular values.
pub fn kyfan_norm(corr: &RealMatrix) -> f64 {
    linalg::singular_values(corr).map(|s| s.iter().sum()).unwrap_or(f64::NAN)
}

/// `sqrt((2(N-1)/N) (2(M-1)/M))`, the largest Ky Fan norm of a separable state.
pub fn necessary_bound(n: usize, m: usize) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    (2.0 * (nf - 1.0) / nf * 2.0 * (mf - 1.0) / mf).sqrt()
}

/// `2 / sqrt(N M (N-1)(M-1))`.
pub fn sufficient_bound(n: usize, m: usize) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    2.0 / (nf * mf * (nf - 1.0) * (mf - 1.0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KyFanCheck {
    pub passed: bool,
    pub norm: f64,
    pub bound: f64,
    /// `norm - bound`.
    pub margin: f64,
}

fn require_normal(d: &BipartiteDecomposed, tol: &Tolerances) -> Result<()> {
    let m = d.marginal_norm();
    if m >= tol.normal_form_precondition {
        return Err(Error::NotNormalForm(m));
    }
    Ok(())
}

fn kyfan_upper(d: &BipartiteDecomposed, tol: &Tolerances) -> KyFanCheck {
    let norm = kyfan_norm(&d.corr);
    let bound = necessary_bound(d.dim_a, d.dim_b);
    KyFanCheck { passed: norm <= bound * (1.0 + tol.slack) + tol.slack, norm, bound, margin: norm - bound }
}

/// Ky Fan upper bound for states in normal form; a failure certifies
/// entanglement.
pub fn necessary_kyfan(d: &BipartiteDecomposed) -> Result<KyFanCheck> {
    necessary_kyfan_with(d, &Tolerances::default())
}

pub fn necessary_kyfan_with(d: &BipartiteDecomposed, tol: &Tolerances) -> Result<KyFanCheck> {
    require_normal(d, tol)?;
    Ok(kyfan_upper(d, tol))
}

fn construct_sufficient(d: &BipartiteDecomposed, tol: &Tolerances) -> Result<(CriterionRecord, Option<SeparableDecomposition>)> {
    let (n, m) = d.dims();
    let frame = FactorizationFrame::new(&d.corr)?;
    let norm = frame.kyfan();
    let bound = sufficient_bound(n, m);
    if norm > bound * (1.0 + tol.slack) + tol.slack {
        return Ok((CriterionRecord::new(Criterion::SufficientKyFan, Outcome::NotApplicable, norm, bound, ""), None));
    }
    let dec = decompose::corollary2_construct(&frame, n, m)?;
    let report = verify_decomposition_with(&dec, d, tol);
    if !report.valid {
        let note = format!("construction failed verification (residual {:.3e})", report.max_residual);
        return Ok((CriterionRecord::new(Criterion::SufficientKyFan, Outcome::NotApplicable, norm, bound, note), None));
    }
    let note = format!("{} components", dec.len());
    Ok((CriterionRecord::new(Criterion::SufficientKyFan, Outcome::Constructed, norm, bound, note), Some(dec)))
}

/// Ky Fan sufficient bound; when it holds the verdict carries an explicit
/// decomposition.
pub fn sufficient_kyfan(d: &BipartiteDecomposed) -> Result<Verdict> {
    sufficient_kyfan_with(d, &Tolerances::default())
}

pub fn sufficient_kyfan_with(d: &BipartiteDecomposed, tol: &Tolerances) -> Result<Verdict> {
    require_normal(d, tol)?;
    let (record, dec) = construct_sufficient(d, tol)?;
    let decs = dec.map(|x| vec![(Criterion::SufficientKyFan, x)]).unwrap_or_default();
    Ok(Verdict::from_records(vec![record], decs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PptCheck {
    pub passed: bool,
    pub min_eigenvalue: f64,
}

pub fn ppt_check(d: &BipartiteDecomposed) -> Result<PptCheck> {
    ppt_check_with(d, &Tolerances::default())
}

pub fn ppt_check_with(d: &BipartiteDecomposed, tol: &Tolerances) -> Result<PptCheck> {
    let min_eigenvalue = compose_state(&partial_transpose(d)).min_eigenvalue()?;
    Ok(PptCheck { passed: min_eigenvalue >= -tol.positivity, min_eigenvalue })
}

fn ppt_record(d: &BipartiteDecomposed, tol: &Tolerances) -> Result<CriterionRecord> {
    let c = ppt_check_with(d, tol)?;
    let outcome = if c.passed { Outcome::Satisfied } else { Outcome::Violated };
    Ok(CriterionRecord::new(Criterion::Ppt, outcome, -c.min_eigenvalue, 0.0, format!("min eigenvalue {:.6e}", c.min_eigenvalue)))
}

/// Normal form of a full-rank state, or the state itself if it is already
/// normal.
fn filtered(d: &BipartiteDecomposed, tol: &Tolerances) -> Result<bipartite::NormalFormResult> {
    if d.marginal_norm() < tol.normal_form {
        let (n, m) = d.dims();
        return Ok(bipartite::NormalFormResult {
            state: d.clone(),
            filter_a: ComplexMatrix::identity(n, n),
            filter_b: ComplexMatrix::identity(m, m),
            converged: true,
            iterations: 0,
        });
    }
    normal_form(d, tol.max_iter, tol.normal_form)
}

/// Exact rule for two qubits: separable iff the normal-form Ky Fan norm is
/// at most one.
pub fn two_qubit_decide(d: &BipartiteDecomposed) -> Result<Verdict> {
    two_qubit_decide_with(d, &Tolerances::default())
}

pub fn two_qubit_decide_with(d: &BipartiteDecomposed, tol: &Tolerances) -> Result<Verdict> {
    if d.dims() != (2, 2) {
        let found = if d.dim_a != 2 { d.dim_a } else { d.dim_b };
        return Err(Error::DimensionMismatch { expected: 2, found });
    }
    let (rn, rm) = local_ranks(d)?;
    if rn != 2 || rm != 2 {
        return analyze_decomposed(d, tol);
    }
    let nf = filtered(d, tol)?;
    let mut verdict = if nf.converged {
        let (record, dec) = two_qubit_normal(&nf.state, tol)?;
        let decs = match dec {
            Some(x) => vec![(Criterion::TwoQubit, x.unfilter(&nf.filter_a, &nf.filter_b)?)],
            None => Vec::new(),
        };
        Verdict::from_records(vec![record], decs)
    } else {
        let check = kyfan_upper(&nf.state, tol);
        let outcome = if check.passed { Outcome::Satisfied } else { Outcome::Violated };
        let record = CriterionRecord::new(Criterion::NormalFormLimit, outcome, check.norm, check.bound, "filtering did not converge");
        Verdict::from_records(vec![record], Vec::new())
    };
    finalize(&mut verdict, d, tol);
    verdict.normal_form_iterations = Some(nf.iterations);
    verdict.normal_form_converged = Some(nf.converged);
    Ok(verdict)
}

fn two_qubit_normal(state: &BipartiteDecomposed, tol: &Tolerances) -> Result<(CriterionRecord, Option<SeparableDecomposition>)> {
    let frame = FactorizationFrame::new(&state.corr)?;
    let norm = frame.kyfan();
    if norm <= 1.0 + tol.slack {
        let dec = decompose::corollary2_construct(&frame, 2, 2)?;
        let record = CriterionRecord::new(Criterion::TwoQubit, Outcome::Constructed, norm, 1.0, format!("{} components", dec.len()));
        Ok((record, Some(dec)))
    } else {
        Ok((CriterionRecord::new(Criterion::TwoQubit, Outcome::Violated, norm, 1.0, "normal-form Ky Fan norm above 1"), None))
    }
}

/// Re-verifies a separable verdict against the original state; a failed
/// check downgrades it to inconclusive.
fn finalize(verdict: &mut Verdict, original: &BipartiteDecomposed, tol: &Tolerances) {
    if let Evidence::Decomposition(dec) = &verdict.evidence {
        let report = verify_decomposition_with(dec, original, tol);
        if !report.valid {
            verdict.status = Status::Inconclusive;
            verdict.evidence = Evidence::Undecided { horn: None };
            for r in verdict.records.iter_mut().filter(|r| r.outcome == Outcome::Constructed) {
                r.outcome = Outcome::NotApplicable;
                r.note = format!("decomposition failed verification (residual {:.3e})", report.max_residual);
            }
        }
    }
}

const SPECIAL_TOL: f64 = 1e-10;

fn werner_parameter(d: &BipartiteDecomposed) -> Option<f64> {
    let (n, m) = d.dims();
    if n != m || d.marginal_norm() > SPECIAL_TOL {
        return None;
    }
    let len = n * n - 1;
    let c = d.corr.trace() / len as f64;
    if linalg::max_abs(&(&d.corr - RealMatrix::identity(len, len) * c)) > SPECIAL_TOL {
        return None;
    }
    let nf = n as f64;
    Some((c * nf * (nf * nf - 1.0) / 2.0 + 1.0) / nf)
}

fn isotropic_parameter(d: &BipartiteDecomposed) -> Option<f64> {
    let (n, m) = d.dims();
    if n != m || d.marginal_norm() > SPECIAL_TOL {
        return None;
    }
    let flipped = partial_transpose(d);
    let phi = werner_parameter(&flipped)?;
    Some(states::werner_to_isotropic(n, phi))
}

fn special_states(d: &BipartiteDecomposed, tol: &Tolerances) -> Result<(Vec<CriterionRecord>, Vec<(Criterion, SeparableDecomposition)>)> {
    let mut records = Vec::new();
    let mut decs = Vec::new();
    let n = d.dim_a;
    let attempts: [(Criterion, Option<f64>); 2] = [(Criterion::Werner, werner_parameter(d)), (Criterion::Isotropic, isotropic_parameter(d))];
    for (criterion, param) in attempts {
        let Some(x) = param else { continue };
        let built = match criterion {
            Criterion::Werner => decompose::werner_decompose(n, x, tol.seed),
            _ => decompose::isotropic_decompose(n, x, tol.seed),
        };
        let label = if criterion == Criterion::Werner { "phi" } else { "p" };
        match built {
            Ok(Construction::Separable(dec)) => {
                let report = verify_decomposition_with(&dec, d, tol);
                let outcome = if report.valid { Outcome::Constructed } else { Outcome::NotApplicable };
                let note = format!("{label} = {x:.12}, {} components, residual {:.3e}", dec.len(), report.max_residual);
                records.push(CriterionRecord::new(criterion, outcome, x, x, note));
                if report.valid {
                    decs.push((criterion, dec));
                }
            }
            Ok(Construction::Entangled) | Ok(Construction::NotDecomposedHere) => {
                records.push(CriterionRecord::new(criterion, Outcome::NotApplicable, x, x, format!("{label} = {x:.12}, no construction")));
            }
            Err(e) => {
                records.push(CriterionRecord::new(criterion, Outcome::NotApplicable, x, x, format!("{label} = {x:.12}, {e}")));
            }
        }
    }
    Ok((records, decs))
}

/// Largest frame size for which the Horn diagnostic is computed.
pub const HORN_DIAGNOSTIC_MAX_L: usize = 9;

/// Horn check of the normal-form singular values against the uniform
/// weights `alpha_i = R_A / sqrt(L)`, `beta_i = R_B / sqrt(L)`.
pub fn horn_diagnostic(d: &BipartiteDecomposed) -> Result<Option<HornReport>> {
    let frame = FactorizationFrame::new(&d.corr)?;
    let l = frame.l;
    if !(2..=HORN_DIAGNOSTIC_MAX_L).contains(&l) {
        return Ok(None);
    }
    let (n, m) = d.dims();
    let ra = (2.0 * (n as f64 - 1.0) / n as f64).sqrt();
    let rb = (2.0 * (m as f64 - 1.0) / m as f64).sqrt();
    let alpha = vec![ra / (l as f64).sqrt(); l];
    let beta = vec![rb / (l as f64).sqrt(); l];
    Ok(Some(horn::check_product_inequalities(&frame.tau, &alpha, &beta)?))
}

/// Decides separability of `rho` on `C^N (x) C^M`.
pub fn analyze(rho: &DensityMatrix, n: usize, m: usize) -> Result<Verdict> {
    analyze_with(rho, n, m, &Tolerances::default())
}

pub fn analyze_with(rho: &DensityMatrix, n: usize, m: usize, tol: &Tolerances) -> Result<Verdict> {
    let d = decompose_state(rho, n, m)?;
    analyze_decomposed(&d, tol)
}

/// [`analyze`] on a state that is already in Bloch form.
pub fn analyze_decomposed(d: &BipartiteDecomposed, tol: &Tolerances) -> Result<Verdict> {
    let (rn, rm) = local_ranks(d)?;
    if (rn, rm) != d.dims() {
        let mut verdict = analyze_projected(&support_projection(d)?, tol)?;
        finalize(&mut verdict, d, tol);
        return Ok(verdict);
    }
    analyze_full_rank(d, tol)
}

fn analyze_projected(proj: &SupportProjection, tol: &Tolerances) -> Result<Verdict> {
    let inner = if proj.is_trivial() {
        let s = &proj.state;
        let entry = DecompositionEntry { p: 1.0, r: s.a.clone(), s: s.b.clone() };
        let dec = SeparableDecomposition::new(s.dim_a, s.dim_b, vec![entry]);
        let note = format!("support is {}x{}", s.dim_a, s.dim_b);
        let record = CriterionRecord::new(Criterion::TrivialFactor, Outcome::Constructed, 0.0, 0.0, note);
        Verdict::from_records(vec![record], vec![(Criterion::TrivialFactor, dec)])
    } else {
        analyze_full_rank(&proj.state, tol)?
    };
    let mut verdict = inner;
    if let Evidence::Decomposition(dec) = &verdict.evidence {
        verdict.evidence = Evidence::Decomposition(dec.lift(&proj.isometry_a, &proj.isometry_b));
    }
    Ok(verdict)
}

fn analyze_full_rank(d: &BipartiteDecomposed, tol: &Tolerances) -> Result<Verdict> {
    let (n, m) = d.dims();
    let mut records = vec![ppt_record(d, tol)?];
    let mut decs: Vec<(Criterion, SeparableDecomposition)> = Vec::new();
    let nf = filtered(d, tol)?;
    let state = &nf.state;
    if nf.converged {
        let check = kyfan_upper(state, tol);
        let outcome = if check.passed { Outcome::Satisfied } else { Outcome::Violated };
        records.push(CriterionRecord::new(Criterion::NecessaryKyFan, outcome, check.norm, check.bound, ""));
        if (n, m) == (2, 2) {
            let (record, dec) = two_qubit_normal(state, tol)?;
            records.push(record);
            if let Some(x) = dec {
                decs.push((Criterion::TwoQubit, x));
            }
        } else {
            let (record, dec) = construct_sufficient(state, tol)?;
            records.push(record);
            if let Some(x) = dec {
                decs.push((Criterion::SufficientKyFan, x));
            }
            let (special, found) = special_states(state, tol)?;
            records.extend(special);
            decs.extend(found);
        }
    } else {
        let check = kyfan_upper(state, tol);
        let outcome = if check.passed { Outcome::Satisfied } else { Outcome::Violated };
        let note = format!("filtering stopped after {} iterations", nf.iterations);
        records.push(CriterionRecord::new(Criterion::NormalFormLimit, outcome, check.norm, check.bound, note));
    }
    let mut unfiltered = Vec::with_capacity(decs.len());
    for (c, dec) in decs {
        unfiltered.push((c, dec.unfilter(&nf.filter_a, &nf.filter_b)?));
    }
    let mut verdict = Verdict::from_records(records, unfiltered);
    finalize(&mut verdict, d, tol);
    if verdict.status == Status::Inconclusive {
        verdict.evidence = Evidence::Undecided { horn: horn_diagnostic(state)? };
    }
    verdict.normal_form_iterations = Some(nf.iterations);
    verdict.normal_form_converged = Some(nf.converged);
    Ok(verdict)
}

/// Re-expresses `rho` (an `NM x NM` matrix) in Bloch form without
/// re-validating it.
pub fn bloch_form(rho: &ComplexMatrix, n: usize, m: usize) -> BipartiteDecomposed {
    decompose_matrix(rho, n, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{self, IsotropicParams, Sign, WernerParams};
    use num_complex::Complex64;

    #[test]
    fn kyfan_examples() {
        assert!((kyfan_norm(&states::bell().corr) - 3.0).abs() < 1e-12);
        assert_eq!(kyfan_norm(&RealMatrix::zeros(3, 3)), 0.0);
        let w = states::werner(&WernerParams { n: 2, phi: 1.0 }).unwrap();
        assert!((kyfan_norm(&w.corr) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn necessary_examples() {
        let c = necessary_kyfan(&states::bell()).unwrap();
        assert!(!c.passed && (c.margin - 2.0).abs() < 1e-12);
        let mixed = BipartiteDecomposed::normal(2, 2, RealMatrix::zeros(3, 3)).unwrap();
        assert!(necessary_kyfan(&mixed).unwrap().passed);
        let w = states::werner(&WernerParams { n: 3, phi: 1.0 }).unwrap();
        let c = necessary_kyfan(&w).unwrap();
        assert!(c.passed && (c.norm - 4.0 / 3.0).abs() < 1e-12 && (c.bound - 4.0 / 3.0).abs() < 1e-12);
        let pz = states::p_zero(0.5, Sign::Plus).unwrap();
        assert!(matches!(necessary_kyfan(&pz), Err(Error::NotNormalForm(_))));
    }

    #[test]
    fn sufficient_examples() {
        let t = RealMatrix::from_diagonal(&DVector::from_vec(vec![0.5, -0.3, 0.1]));
        let d = BipartiteDecomposed::normal(2, 2, t).unwrap();
        let v = sufficient_kyfan(&d).unwrap();
        assert_eq!(v.status, Status::Separable);
        assert!(verify_decomposition(v.decomposition().unwrap(), &d).valid);
        let w = states::werner(&WernerParams { n: 2, phi: 1.0 }).unwrap();
        assert_eq!(sufficient_kyfan(&w).unwrap().status, Status::Separable);
        assert_eq!(sufficient_kyfan(&states::bell()).unwrap().status, Status::Inconclusive);
    }

    #[test]
    fn ppt_examples() {
        let c = ppt_check(&states::bell()).unwrap();
        assert!(!c.passed && (c.min_eigenvalue + 0.5).abs() < 1e-12);
        let ra = states::random_density(2, 2, 3);
        let rb = states::random_density(3, 3, 4);
        let prod = DensityMatrix::new(ra.matrix().kronecker(rb.matrix())).unwrap();
        assert!(ppt_check(&decompose_state(&prod, 2, 3).unwrap()).unwrap().passed);
        let iso = states::isotropic(&IsotropicParams { n: 3, p: 0.3 }).unwrap();
        assert!(!ppt_check(&iso).unwrap().passed);
    }

    #[test]
    fn two_qubit_examples() {
        assert_eq!(two_qubit_decide(&states::bell()).unwrap().status, Status::Entangled);
        let w = states::werner(&WernerParams { n: 2, phi: 0.5 }).unwrap();
        assert_eq!(two_qubit_decide(&w).unwrap().status, Status::Separable);
        let w3 = states::werner(&WernerParams { n: 3, phi: 0.5 }).unwrap();
        assert!(matches!(two_qubit_decide(&w3), Err(Error::DimensionMismatch { .. })));
        let d = states::random_bipartite(2, 2, 21);
        let v = two_qubit_decide(&d).unwrap();
        let ppt = ppt_check(&d).unwrap().passed;
        assert_eq!(v.status == Status::Separable, ppt);
    }

    #[test]
    fn verify_examples() {
        let w = states::werner(&WernerParams { n: 2, phi: 1.0 }).unwrap();
        let dec = decompose::werner_decompose(2, 1.0, 0).unwrap().decomposition().cloned().unwrap();
        assert!(verify_decomposition(&dec, &w).valid);
        let mut long = dec.clone();
        long.entries[0].r = long.entries[0].r.scaled(1.2);
        assert!(!verify_decomposition(&long, &w).valid);
        let mut heavy = dec.clone();
        heavy.entries[0].p += 0.1;
        assert!(!verify_decomposition(&heavy, &w).valid);
    }

    #[test]
    fn analyze_examples() {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let v = analyze(&DensityMatrix::pure(&[one, z, z, z]).unwrap(), 2, 2).unwrap();
        assert_eq!(v.status, Status::Separable);
        assert_eq!(v.decomposition().unwrap().len(), 1);

        let bell = compose_state(&states::bell());
        let v = analyze(&bell, 2, 2).unwrap();
        assert_eq!(v.status, Status::Entangled);
        assert_eq!(v.record(Criterion::Ppt).unwrap().outcome, Outcome::Violated);
        assert_eq!(v.record(Criterion::NecessaryKyFan).unwrap().outcome, Outcome::Violated);

        let w = compose_state(&states::werner(&WernerParams { n: 3, phi: 1.0 }).unwrap());
        let v = analyze(&w, 3, 3).unwrap();
        assert_eq!(v.status, Status::Separable);
        assert_eq!(v.decomposition().unwrap().len(), 9);
    }

    #[test]
    fn analyze_pulls_back_through_filters() {
        for seed in 0..5 {
            let d = states::random_bipartite(2, 3, seed);
            // mix with identity so the sufficient bound applies
            let rho = compose_state(&d).into_matrix().scale(0.05) + ComplexMatrix::identity(6, 6).scale(0.95 / 6.0);
            let rho = DensityMatrix::new(rho).unwrap();
            let v = analyze(&rho, 2, 3).unwrap();
            assert_eq!(v.status, Status::Separable, "seed {seed}");
            let target = decompose_state(&rho, 2, 3).unwrap();
            assert!(verify_decomposition(v.decomposition().unwrap(), &target).valid);
        }
    }

    #[test]
    fn analyze_p_zero_is_entangled_via_ppt() {
        let pz = compose_state(&states::p_zero(0.5, Sign::Plus).unwrap());
        let v = analyze(&pz, 2, 2).unwrap();
        assert_eq!(v.status, Status::Entangled);
        assert_eq!(v.normal_form_converged, Some(false));
    }

    #[test]
    fn analyze_rank_deficient_embedding() {
        let w = compose_state(&states::werner(&WernerParams { n: 2, phi: 0.8 }).unwrap());
        let mut big = ComplexMatrix::zeros(9, 9);
        for i in 0..4 {
            for j in 0..4 {
                big[((i / 2) * 3 + i % 2, (j / 2) * 3 + j % 2)] = w.matrix()[(i, j)];
            }
        }
        let rho = DensityMatrix::new(big).unwrap();
        let v = analyze(&rho, 3, 3).unwrap();
        assert_eq!(v.status, Status::Separable);
        assert!(verify_decomposition(v.decomposition().unwrap(), &decompose_state(&rho, 3, 3).unwrap()).valid);
    }

    #[test]
    fn order_of_evidence_is_irrelevant() {
        let rec = |c, o| CriterionRecord::new(c, o, 1.0, 0.0, "");
        let a = vec![rec(Criterion::Ppt, Outcome::Violated), rec(Criterion::NecessaryKyFan, Outcome::Satisfied)];
        let mut b = a.clone();
        b.reverse();
        let va = Verdict::from_records(a, Vec::new());
        let vb = Verdict::from_records(b, Vec::new());
        assert_eq!(va.status, vb.status);
        assert_eq!(va.records, vb.records);
    }
}
