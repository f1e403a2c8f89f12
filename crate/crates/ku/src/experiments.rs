//! Drivers for the synthetic convergence experiments.

use ku_core::arnoldi::Repetition;
use std::fmt::Write as _;

use ku_core::bounds::{markov_bound_hermitian, quasi_optimal_eta_estimate, DEFAULT_ETA_SAMPLES};
use ku_core::dense::{hermitian_eigen, spectral_norm};
use ku_core::oracle::{dense_update, markov_update_quadrature, ORACLE_LIMIT};
use ku_core::poles::{
    leja_order, markov_single_pole, quasi_optimal_poles, zolotarev_inv_sqrt_poles,
    zolotarev_sign_poles,
};
use ku_core::signsylv::{SylvesterReport, SylvesterSolution};
use ku_core::{
    run_update_observed, sign_update, DenseMatrix, FunctionSpec, LowRankTerm, PolePlan, Result,
    SignUpdateInput, SpectralWindow, Structure, SylvesterProblem, UpdateConfig,
};

use crate::plans::PlanContext;
use crate::synth::{markov_instance, sign_instance};

/// Parameters shared by every experiment.
#[derive(Clone, Debug)]
pub struct Settings {
    pub n: usize,
    pub seed: u64,
    pub m_max: usize,
    pub tol: f64,
    pub d: usize,
    pub eta_samples: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            n: 200,
            seed: 1,
            m_max: 200,
            tol: 0.0,
            d: 2,
            eta_samples: DEFAULT_ETA_SAMPLES,
        }
    }
}

/// One CSV line.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub m: usize,
    pub error_true: Option<f64>,
    pub error_estimate: f64,
    pub bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub converged: bool,
    pub iterations: usize,
    pub final_error: f64,
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "converged={} iterations={} final_error={:.15e}",
            self.converged, self.iterations, self.final_error
        )
    }
}

#[derive(Clone, Debug)]
pub struct Run {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl Run {
    fn assemble(
        true_errors: Vec<f64>,
        estimates: &[f64],
        bounds: Option<&[f64]>,
        converged: bool,
    ) -> Self {
        let rows: Vec<Row> = estimates
            .iter()
            .enumerate()
            .map(|(i, &e)| Row {
                m: i + 1,
                error_true: true_errors.get(i).copied(),
                error_estimate: e,
                bound: bounds.and_then(|b| b.get(i + 1).copied()),
            })
            .collect();
        let final_error = rows
            .last()
            .map_or(0.0, |r| r.error_true.unwrap_or(r.error_estimate));
        Self {
            summary: Summary {
                converged,
                iterations: rows.len(),
                final_error,
            },
            rows,
        }
    }

    /// First iteration whose true error is at or below `level`.
    pub fn crossing(&self, level: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.error_true.is_some_and(|e| e <= level))
            .map(|r| r.m)
    }

    pub fn true_errors(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.error_true).collect()
    }

    /// `m,error_true,error_estimate,bound`, one line per iteration; missing
    /// values are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,error_true,error_estimate,bound\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.m,
                sci(r.error_true),
                sci(Some(r.error_estimate)),
                sci(r.bound)
            );
        }
        out
    }
}

/// Scientific notation with 16 significant digits.
pub fn sci(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.15e}"))
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(h: &DenseMatrix) -> Result<f64> {
    let (vals, _) = hermitian_eigen(&h.hermitian_part(), false)?;
    Ok(vals.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

fn rank_one(b: &DenseMatrix) -> (LowRankTerm, DenseMatrix) {
    let term = LowRankTerm::hermitian(b.clone(), DenseMatrix::identity(1));
    let d = term.dense();
    (term, d)
}

fn cyclic(plan: PolePlan) -> PolePlan {
    plan.with_repetition(Repetition::Cyclic)
}

/// Reference value of `f(A + B J B^*) - f(A)`: resolvent quadrature where
/// available, two dense matrix functions otherwise.
pub fn reference_update(
    a: &DenseMatrix,
    b: &DenseMatrix,
    j: &DenseMatrix,
    f: &FunctionSpec,
) -> Result<DenseMatrix> {
    match markov_update_quadrature(a, b, j, f) {
        Err(ku_core::Error::NotMarkov) => {
            dense_update(a, &b.matmul(j).mul_adjoint(b), f, Structure::Hermitian)
        }
        other => other,
    }
}

/// Hermitian Markov run with true errors scaled by `1 / scale`.
fn markov_run(
    a: &DenseMatrix,
    b: &DenseMatrix,
    f: &FunctionSpec,
    plan: &PolePlan,
    s: &Settings,
    relative: bool,
) -> Result<(Run, f64)> {
    let (term, d) = rank_one(b);
    let exact = reference_update(a, b, &DenseMatrix::identity(1), f)?;
    let scale = if relative {
        hermitian_norm(&exact)?
    } else {
        1.0
    };
    let window = SpectralWindow::from_hermitian(a, &(a + &d))?;
    let bounds = markov_bound_hermitian(&window, plan, f, s.m_max, s.eta_samples)?;
    let config = UpdateConfig::new(s.m_max, s.tol * scale).with_lag(s.d);
    let n = a.rows();
    let (_, report) = run_update_observed(a, &term, f, plan, &config, &mut |st| {
        hermitian_norm(&(&st.approximation(n) - &exact))
            .ok()
            .map(|e| e / scale)
    })?;
    let estimates: Vec<f64> = report.estimates.iter().map(|e| e / scale).collect();
    let bound_values: Vec<f64> = bounds.values.iter().map(|v| v / scale).collect();
    let run = Run::assemble(
        report.true_errors.unwrap_or_default(),
        &estimates,
        Some(&bound_values),
        report.converged,
    );
    Ok((run, scale))
}

/// Least-squares slope of `ln e` against `m`, returned as `exp(slope)`.
pub fn fit_rate(points: &[(usize, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(m, e) in points {
        let dx = m as f64 - mx;
        sxy += dx * (e.ln() - my);
        sxx += dx * dx;
    }
    (sxx > 0.0).then(|| (sxy / sxx).exp())
}

#[derive(Clone, Debug)]
pub struct Fig1 {
    pub run: Run,
    pub predicted_rate: f64,
    pub fitted_rate: Option<f64>,
    /// Start of the superlinear phase, see [`superlinear_departure`].
    pub departure: Option<usize>,
    pub norm_fa: f64,
}

/// Rate fits only use iterations up to this one.
pub const FIT_M_LIMIT: usize = 120;
/// Half width of the window used for local convergence rates.
pub const LOCAL_RATE_HALF_WIDTH: usize = 10;
/// Errors below this multiple of `||f(A)||` count as rounding floor.
pub const FLOOR_RELATIVE: f64 = 1e-10;

/// Inverse square root, rank-one Hermitian update, one repeated pole.
pub fn fig1(s: &Settings) -> Result<Fig1> {
    let (a, b) = markov_instance(s.n, s.seed);
    let f = FunctionSpec::inv_sqrt();
    let support = f.markov_support().expect("inverse square root is Markov");
    let (_, d) = rank_one(&b);
    let window = SpectralWindow::from_hermitian(&a, &(&a + &d))?;
    let (pole, predicted_rate) = markov_single_pole(&window, support)?;
    let plan = PolePlan::cyclic(vec![pole]);
    let (run, _) = markov_run(&a, &b, &f, &plan, s, false)?;
    let norm_fa = (0..a.rows()).fold(0.0f64, |m, i| m.max(f.eval(a[(i, i)]).norm()));

    let (lo, hi) = (1e-8 * norm_fa, 1e-2 * norm_fa);
    let fit_points: Vec<(usize, f64)> = run
        .rows
        .iter()
        .filter_map(|r| r.error_true.map(|e| (r.m, e)))
        .filter(|&(m, e)| m <= FIT_M_LIMIT && e >= lo && e <= hi)
        .collect();
    let fitted_rate = fit_rate(&fit_points);
    let departure =
        superlinear_departure(&run.true_errors(), predicted_rate, FLOOR_RELATIVE * norm_fa);
    Ok(Fig1 {
        run,
        predicted_rate,
        fitted_rate,
        departure,
        norm_fa,
    })
}

/// First iteration `m` from which the local rate
/// `(e[m + w] / e[m - w])^(1 / 2w)` stays at or below `rate^2`, i.e. the
/// error decays at least twice as fast (on a log scale) as the linear model
/// predicts, up to where the errors reach `floor`. `errors[0]` belongs to
/// iteration 1.
pub fn superlinear_departure(errors: &[f64], rate: f64, floor: f64) -> Option<usize> {
    let w = LOCAL_RATE_HALF_WIDTH;
    let last = errors
        .iter()
        .position(|&e| !(e > floor))
        .unwrap_or(errors.len());
    if last < 2 * w + 1 {
        return None;
    }
    let threshold = 2.0 * rate.ln();
    let fast: Vec<bool> = (w..last - w)
        .map(|i| (errors[i + w].ln() - errors[i - w].ln()) / (2 * w) as f64 <= threshold)
        .collect();
    let tail = fast.iter().rev().take_while(|&&f| f).count();
    (tail > 0).then(|| w + fast.len() - tail + 1)
}

#[derive(Clone, Debug)]
pub struct Fig2 {
    pub run: Run,
    /// Predicted decay per full cycle of poles.
    pub predicted_cycle_factor: f64,
    pub poles_per_cycle: usize,
    pub window: SpectralWindow,
    pub support: (f64, f64),
}

/// Measured against predicted decay per cycle after `cycles` full cycles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleCheck {
    pub cycles: usize,
    pub measured: f64,
    pub predicted: f64,
}

impl CycleCheck {
    /// `max(measured / predicted, predicted / measured)`
    pub fn discrepancy(&self) -> f64 {
        (self.measured / self.predicted).max(self.predicted / self.measured)
    }
}

impl Fig2 {
    /// Compares `e(k p)^(1/k)` with the `k`-cycle estimate, `k` being the
    /// number of full cycles needed to reach `level`.
    pub fn cycle_check(&self, level: f64) -> Option<CycleCheck> {
        let p = self.poles_per_cycle;
        let cycles = self.run.crossing(level)?.div_ceil(p);
        let err = self
            .run
            .rows
            .iter()
            .find(|r| r.m == cycles * p)?
            .error_true?;
        let k = cycles as f64;
        let predicted =
            quasi_optimal_eta_estimate(&self.window, self.support, p, cycles).powf(1.0 / k);
        Some(CycleCheck {
            cycles,
            measured: err.powf(1.0 / k),
            predicted,
        })
    }
}

pub const FIG2_POLES: usize = 10;

/// Inverse square root with 10 quasi-optimal poles in Leja order, repeated
/// cyclically; errors relative to `||f(A + D) - f(A)||`.
pub fn fig2(s: &Settings) -> Result<Fig2> {
    let (a, b) = markov_instance(s.n, s.seed);
    let f = FunctionSpec::inv_sqrt();
    let support = f.markov_support().expect("inverse square root is Markov");
    let (_, d) = rank_one(&b);
    let window = SpectralWindow::from_hermitian(&a, &(&a + &d))?;
    let base = quasi_optimal_poles(&window, support, FIG2_POLES)?;
    let plan = cyclic(leja_order(base.poles())?);
    let (run, _) = markov_run(&a, &b, &f, &plan, s, true)?;
    let predicted_cycle_factor = quasi_optimal_eta_estimate(&window, support, FIG2_POLES, 1);
    Ok(Fig2 {
        run,
        predicted_cycle_factor,
        poles_per_cycle: FIG2_POLES,
        window,
        support,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignAlgorithm {
    /// Rational Krylov update of `sign` on `A`.
    Direct,
    /// Inverse square root update on `A^2`.
    Squared,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fig3Variant {
    pub algorithm: SignAlgorithm,
    pub degree: usize,
}

impl Fig3Variant {
    pub const ALL: [Fig3Variant; 4] = [
        Fig3Variant {
            algorithm: SignAlgorithm::Direct,
            degree: 2,
        },
        Fig3Variant {
            algorithm: SignAlgorithm::Direct,
            degree: 10,
        },
        Fig3Variant {
            algorithm: SignAlgorithm::Squared,
            degree: 2,
        },
        Fig3Variant {
            algorithm: SignAlgorithm::Squared,
            degree: 10,
        },
    ];

    /// File-name suffix, e.g. `alg3_deg10`.
    pub fn label(&self) -> String {
        let alg = match self.algorithm {
            SignAlgorithm::Direct => "alg3",
            SignAlgorithm::Squared => "alg4",
        };
        format!("{alg}_deg{}", self.degree)
    }
}

/// Smallest and largest eigenvalue modulus of a Hermitian matrix.
pub fn sign_gap(a: &DenseMatrix) -> Result<(f64, f64)> {
    let vals = hermitian_eigen(a, false)?.0;
    let lo = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let hi = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((lo, hi))
}

/// Pole plan of a sign variant: a degree-`k` Zolotarev approximation has
/// `k` distinct poles, `k/2` conjugate pairs for the sign function on `A`
/// and `k` real ones for the inverse square root on `A^2`.
pub fn sign_plan(variant: Fig3Variant, gap: (f64, f64)) -> Result<PolePlan> {
    let base = match variant.algorithm {
        SignAlgorithm::Direct => zolotarev_sign_poles(gap, variant.degree.div_ceil(2))?,
        SignAlgorithm::Squared => zolotarev_inv_sqrt_poles(gap, variant.degree)?,
    };
    Ok(cyclic(leja_order(base.poles())?))
}

/// `sign(A + b b^*) - sign(A)` with one of the two algorithms, Zolotarev
/// poles fitted to the spectral gap of `A`.
pub fn fig3(s: &Settings, variant: Fig3Variant) -> Result<Run> {
    let (a, b) = sign_instance(s.n, s.seed);
    let plan = sign_plan(variant, sign_gap(&a)?)?;
    sign_run(&a, &b, s, variant.algorithm, &plan)
}

/// `sign(A + b b^*) - sign(A)` with an explicit pole plan. Rows are labelled
/// by the dimension of the search space, which grows by two per step of the
/// squared variant.
pub fn sign_run(
    a: &DenseMatrix,
    b: &DenseMatrix,
    s: &Settings,
    algorithm: SignAlgorithm,
    plan: &PolePlan,
) -> Result<Run> {
    let (term, d) = rank_one(b);
    let f = FunctionSpec::sign();
    let exact = dense_update(a, &d, &f, Structure::Hermitian)?;
    let config = UpdateConfig::new(s.m_max, s.tol).with_lag(s.d);
    let n = a.rows();
    let mut dims = Vec::new();
    let report = match algorithm {
        SignAlgorithm::Direct => {
            run_update_observed(a, &term, &f, plan, &config, &mut |st| {
                dims.push(st.left().map_or(0, |k| k.dim()));
                hermitian_norm(&(&st.approximation(n) - &exact)).ok()
            })?
            .1
        }
        SignAlgorithm::Squared => {
            let input =
                SignUpdateInput::new(a.clone(), b.clone(), DenseMatrix::identity(1), plan.clone())?;
            sign_update(&input, &config, &mut |st| {
                dims.push(st.basis().map_or(0, |k| k.dim()));
                hermitian_norm(&(&st.approximation() - &exact)).ok()
            })?
            .1
        }
    };
    let mut run = Run::assemble(
        report.true_errors.unwrap_or_default(),
        &report.estimates,
        None,
        report.converged,
    );
    for (row, dim) in run.rows.iter_mut().zip(dims) {
        if dim > 0 {
            row.m = dim;
        }
    }
    Ok(run)
}

/// User-supplied update `f(A + D) - f(A)`.
#[derive(Clone, Debug)]
pub struct CustomProblem {
    pub a: DenseMatrix,
    pub term: LowRankTerm,
    pub function: FunctionSpec,
}

const HERMITIAN_DEFECT: f64 = 1e-13;

impl CustomProblem {
    /// With `c` the update is `B C^*`; otherwise `B J B^*`, `J = I` by default.
    pub fn new(
        a: DenseMatrix,
        b: DenseMatrix,
        c: Option<DenseMatrix>,
        j: Option<DenseMatrix>,
        function: FunctionSpec,
    ) -> Result<Self> {
        if !a.is_square() {
            return Err(ku_core::Error::Dimension {
                context: "custom A",
                expected: a.rows(),
                found: a.cols(),
            });
        }
        let term = match (c, j) {
            (Some(_), Some(_)) => {
                return Err(ku_core::Error::InvalidArgument(
                    "give either C or J, not both".into(),
                ))
            }
            (Some(c), None) => LowRankTerm::general(b, c),
            (None, j) => {
                let j = j.unwrap_or_else(|| DenseMatrix::identity(b.cols()));
                if !j.is_square() || j.hermitian_defect() > HERMITIAN_DEFECT {
                    return Err(ku_core::Error::InvalidArgument(
                        "J must be square and Hermitian".into(),
                    ));
                }
                LowRankTerm::hermitian(b, j)
            }
        };
        Ok(Self { a, term, function })
    }

    /// Both `A` and the update are Hermitian.
    pub fn is_hermitian(&self) -> bool {
        self.term.is_hermitian() && self.a.hermitian_defect() <= HERMITIAN_DEFECT
    }

    /// Spectral data for pole strategies, available in the Hermitian case.
    pub fn plan_context(&self) -> PlanContext {
        let mut ctx = PlanContext {
            function: Some(self.function.clone()),
            ..PlanContext::default()
        };
        if self.is_hermitian() {
            let a = self.a.hermitian_part();
            ctx.window =
                SpectralWindow::from_hermitian(&a, &(&a + &self.term.dense()).hermitian_part())
                    .ok();
            ctx.gap = sign_gap(&a).ok();
        }
        ctx
    }

    fn reference(&self) -> Result<DenseMatrix> {
        match &self.term {
            LowRankTerm::Hermitian { b, j } if self.is_hermitian() => {
                reference_update(&self.a, b, j, &self.function)
            }
            _ => dense_update(
                &self.a,
                &self.term.dense(),
                &self.function,
                Structure::General,
            ),
        }
    }
}

/// Runs a custom problem. True errors need `n <= ORACLE_LIMIT`; the bound
/// column is filled for Hermitian Markov problems with a conjugate-closed
/// plan.
pub fn custom(problem: &CustomProblem, plan: &PolePlan, s: &Settings) -> Result<Run> {
    let n = problem.a.rows();
    let hermitian = problem.is_hermitian();
    let exact = if n <= ORACLE_LIMIT {
        Some(problem.reference()?)
    } else {
        None
    };
    let bounds = match (hermitian, problem.function.markov_support()) {
        (true, Some(_)) if plan.is_conjugate_closed() => problem
            .plan_context()
            .window
            .and_then(|w| {
                markov_bound_hermitian(&w, plan, &problem.function, s.m_max, s.eta_samples).ok()
            })
            .map(|r| r.values),
        _ => None,
    };
    let config = UpdateConfig::new(s.m_max, s.tol).with_lag(s.d);
    let (_, report) = run_update_observed(
        &problem.a,
        &problem.term,
        &problem.function,
        plan,
        &config,
        &mut |st| {
            let exact = exact.as_ref()?;
            let diff = &st.approximation(n) - exact;
            if hermitian {
                hermitian_norm(&diff).ok()
            } else {
                Some(spectral_norm(&diff))
            }
        },
    )?;
    Ok(Run::assemble(
        report.true_errors.unwrap_or_default(),
        &report.estimates,
        bounds.as_deref(),
        report.converged,
    ))
}

/// `A1 Z - Z A2 + B1 C2^* = 0` by Galerkin projection.
pub fn sylvester(
    problem: &SylvesterProblem,
    plan: &PolePlan,
    s: &Settings,
) -> Result<(SylvesterSolution, SylvesterReport)> {
    ku_core::sylvester_solve_krylov(problem, plan, s.m_max, s.tol)
}

/// `m,residual,estimate,galerkin`
pub fn sylvester_csv(report: &SylvesterReport) -> String {
    let mut out = String::from("m,residual,estimate,galerkin\n");
    for (i, ((r, e), g)) in report
        .residuals
        .iter()
        .zip(&report.estimates)
        .zip(&report.galerkin)
        .enumerate()
    {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            sci(Some(*r)),
            sci(Some(*e)),
            sci(Some(*g))
        );
    }
    out
}

pub fn sylvester_summary(report: &SylvesterReport) -> Summary {
    Summary {
        converged: report.converged,
        iterations: report.iterations,
        final_error: report.residuals.last().copied().unwrap_or(0.0),
    }
}
