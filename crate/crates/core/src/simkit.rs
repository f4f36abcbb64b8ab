//! Monte-Carlo trials: uniform integer errors in a disk, reconstruction by
//! the single-stage or multi-stage method, and per-tau statistics.
//!
//! Every trial draws from its own Xoshiro256++ stream, seeded through
//! SplitMix64 from `(seed, tau index, trial index)`, so results do not depend
//! on the number of worker threads.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, FSpec, Reconstructor};
use crate::error::{Error, Result};
use crate::lattice::{FpdUnionRegion, ModReducer};
use crate::linalg::{hnf, IntMatrix, IntVector, RatVector};
use crate::multistage::{build_plan, final_region, multistage_reconstruct, GroupingPlan};
use crate::numeric::{fmt_rational, rational_to_f64};
use crate::robust::{build_instance, robust_reconstruct, RobustInstance, RobustOutput};

/// Uniform sampler over `{e in Z^2 : |e|^2 <= tau^2}`.
#[derive(Clone, Debug)]
pub struct ErrorBallSampler {
    tau_sq: BigRational,
    points: Vec<IntVector>,
}

impl ErrorBallSampler {
    /// Only two-dimensional disks are supported.
    pub fn new(tau: &BigRational, dim: usize) -> Result<Self> {
        if dim != 2 {
            return Err(Error::DimensionUnsupported(dim));
        }
        if tau.is_negative() {
            return Err(Error::InvalidArgument("tau must be nonnegative".into()));
        }
        let tau_sq = tau * tau;
        let r = tau.floor().to_integer().to_i64().expect("tau fits in i64");
        let mut points = Vec::new();
        for x in -r..=r {
            for y in -r..=r {
                let n = BigRational::from_integer(BigInt::from(x * x + y * y));
                if n <= tau_sq {
                    points.push(IntVector::from_i64(&[x, y]));
                }
            }
        }
        Ok(ErrorBallSampler { tau_sq, points })
    }

    pub fn tau_sq(&self) -> &BigRational {
        &self.tau_sq
    }

    pub fn points(&self) -> &[IntVector] {
        &self.points
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> IntVector {
        self.points[rng.random_range(0..self.points.len())].clone()
    }
}

/// The generator for trial `trial` of grid point `tau_index`.
pub fn trial_rng(seed: u64, tau_index: u64, trial: u64) -> Xoshiro256PlusPlus {
    let mut mix = SplitMix64::seed_from_u64(seed);
    let a = mix.next_u64() ^ tau_index;
    let mut mix = SplitMix64::seed_from_u64(a);
    let b = mix.next_u64() ^ trial;
    Xoshiro256PlusPlus::seed_from_u64(b)
}

/// Uniform sampler over `N(m)` using the HNF diagonal box as a residue
/// system.
#[derive(Clone, Debug)]
pub struct FpdSampler {
    reducer: ModReducer,
    box_sides: Vec<BigInt>,
}

impl FpdSampler {
    pub fn new(m: &IntMatrix) -> Result<Self> {
        Ok(FpdSampler {
            reducer: ModReducer::new(m)?,
            box_sides: hnf(m)?.h.diagonal(),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> IntVector {
        let x: Vec<BigInt> = self
            .box_sides
            .iter()
            .map(|s| uniform_below(s, rng))
            .collect();
        self.reducer.remainder(&IntVector::new(x))
    }
}

fn uniform_below<R: Rng + ?Sized>(n: &BigInt, rng: &mut R) -> BigInt {
    match n.to_u64() {
        Some(k) => BigInt::from(rng.random_range(0..k)),
        None => {
            // rejection over enough random bits
            let bits = n.bits();
            loop {
                let words = bits.div_ceil(32) as usize;
                let mut v = BigInt::zero();
                for _ in 0..words {
                    v = (v << 32) + BigInt::from(rng.next_u32());
                }
                let v = v >> (words as u64 * 32 - bits);
                if &v < n {
                    return v;
                }
            }
        }
    }
}

/// Uniform sampler over a union of shifted FPDs.
#[derive(Clone, Debug)]
pub struct RegionSampler {
    region: FpdUnionRegion,
    shifts: FpdSampler,
    base: FpdSampler,
}

impl RegionSampler {
    pub fn new(region: &FpdUnionRegion) -> Result<Self> {
        Ok(RegionSampler {
            shifts: FpdSampler::new(region.quotient())?,
            base: FpdSampler::new(region.anchor())?,
            region: region.clone(),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> IntVector {
        let k = self.shifts.sample(rng);
        let r = self.base.sample(rng);
        self.region.compose(&k, &r)
    }
}

/// A prepared reconstructor and its guaranteed region.
#[derive(Clone, Debug)]
pub enum Reconstruction {
    Single(RobustInstance),
    Multistage(GroupingPlan),
}

impl Reconstruction {
    pub fn from_config(cfg: &ExperimentConfig, kind: Reconstructor) -> Result<Self> {
        Ok(match kind {
            Reconstructor::Single => Reconstruction::Single(build_instance(&cfg.moduli)?),
            Reconstructor::Multistage => {
                Reconstruction::Multistage(build_plan(&cfg.moduli, &cfg.grouping)?)
            }
        })
    }

    pub fn kind(&self) -> Reconstructor {
        match self {
            Reconstruction::Single(_) => Reconstructor::Single,
            Reconstruction::Multistage(_) => Reconstructor::Multistage,
        }
    }

    pub fn moduli(&self) -> &[IntMatrix] {
        match self {
            Reconstruction::Single(i) => i.moduli(),
            Reconstruction::Multistage(p) => p.moduli(),
        }
    }

    pub fn region(&self) -> Result<FpdUnionRegion> {
        match self {
            Reconstruction::Single(i) => Ok(i.region().clone()),
            Reconstruction::Multistage(p) => final_region(p),
        }
    }

    /// The exact squared bound below which success is guaranteed.
    pub fn bound_sq(&self) -> Option<BigRational> {
        match self {
            Reconstruction::Single(i) => Some(i.tau_bound_sq().clone()),
            Reconstruction::Multistage(p) => p.overall_bound_sq().finite().cloned(),
        }
    }

    pub fn reconstruct(&self, noisy: &[IntVector]) -> Result<RobustOutput> {
        match self {
            Reconstruction::Single(i) => robust_reconstruct(i, noisy),
            Reconstruction::Multistage(p) => multistage_reconstruct(p, noisy),
        }
    }

    /// Folds of the last stage that a correct reconstruction recovers.
    pub fn true_final_folds(&self, f: &IntVector) -> Result<Vec<IntVector>> {
        match self {
            Reconstruction::Single(i) => i.true_folds(f),
            Reconstruction::Multistage(p) => match p.final_instance() {
                Some(i) => i.true_folds(f),
                None => Ok(Vec::new()),
            },
        }
    }
}

/// One Monte-Carlo trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub f_true: IntVector,
    pub errors: Vec<IntVector>,
    /// `None` when the remainders were inconsistent past the guarantee.
    pub estimate: Option<RatVector>,
    pub error_norm: Option<f64>,
    /// `|estimate - f| <= tau`, compared exactly.
    pub exact_success: bool,
    /// Every last-stage fold was recovered.
    pub folds_exact: bool,
}

/// Statistics for one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct TauSummary {
    pub tau: BigRational,
    /// Mean of `|estimate - f|` over trials that produced an estimate.
    pub mean_error: Option<f64>,
    pub success_rate: f64,
    pub fold_success_rate: f64,
    pub trials: usize,
    pub records: Vec<TrialRecord>,
}

/// Results of a full sweep for one reconstructor.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub reconstructor: Reconstructor,
    pub seed: u64,
    pub f_fixed: Option<IntVector>,
    pub rows: Vec<TauSummary>,
}

pub const CSV_HEADER: &str = "tau,mean_error,success_rate,trials,reconstructor,seed";
pub const RAW_CSV_HEADER: &str = "tau,trial,err_norm,success";

fn fmt_f64(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), |v| format!("{v:.6}"))
}

impl SweepSummary {
    pub fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{:.6},{},{},{}",
                    fmt_rational(&r.tau),
                    fmt_f64(r.mean_error),
                    r.success_rate,
                    r.trials,
                    self.reconstructor,
                    self.seed
                )
            })
            .collect()
    }

    pub fn raw_csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .flat_map(|r| {
                r.records.iter().map(move |t| {
                    format!(
                        "{},{},{},{}",
                        fmt_rational(&r.tau),
                        t.trial_index,
                        fmt_f64(t.error_norm),
                        t.exact_success
                    )
                })
            })
            .collect()
    }
}

/// Runs one trial with errors drawn from `sampler`.
pub fn run_trial(
    rec: &Reconstruction,
    sampler: &ErrorBallSampler,
    f: &IntVector,
    trial_index: usize,
    rng: &mut Xoshiro256PlusPlus,
) -> Result<TrialRecord> {
    let moduli = rec.moduli();
    let errors: Vec<IntVector> = (0..moduli.len()).map(|_| sampler.sample(rng)).collect();
    let noisy = moduli
        .iter()
        .zip(&errors)
        .map(|(m, e)| Ok(&ModReducer::new(m)?.remainder(f) + e))
        .collect::<Result<Vec<_>>>()?;
    let (estimate, folds_exact) = match rec.reconstruct(&noisy) {
        Ok(out) => {
            let ok = out.folds == rec.true_final_folds(f)?;
            (Some(out.estimate), ok)
        }
        Err(Error::Inconsistent) => (None, false),
        Err(e) => return Err(e),
    };
    let dist_sq = estimate.as_ref().map(|e| (e - &f.to_rational()).norm_sq());
    Ok(TrialRecord {
        trial_index,
        f_true: f.clone(),
        errors,
        error_norm: dist_sq.as_ref().map(|d| rational_to_f64(d).sqrt()),
        exact_success: dist_sq.is_some_and(|d| d <= *sampler.tau_sq()),
        folds_exact,
        estimate,
    })
}

/// The true vector shared by all trials, or `None` when it is redrawn per trial.
pub fn choose_f(spec: &FSpec, region: &FpdUnionRegion) -> Result<Option<IntVector>> {
    match spec {
        FSpec::Explicit(f) => {
            if !region.contains(f) {
                return Err(Error::ConfigInvalid(format!(
                    "f = {f} lies outside the robustly determinable region"
                )));
            }
            Ok(Some(f.clone()))
        }
        FSpec::Centroid => Ok(Some(region.point_nearest_centroid())),
        FSpec::Random => Ok(None),
    }
}

/// Sweeps the tau grid of `cfg` for one reconstructor. `jobs = None` uses
/// the global rayon pool.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    kind: Reconstructor,
    jobs: Option<usize>,
    keep_records: bool,
) -> Result<SweepSummary> {
    let rec = Reconstruction::from_config(cfg, kind)?;
    run_sweep_with(&rec, cfg, jobs, keep_records)
}

pub fn run_sweep_with(
    rec: &Reconstruction,
    cfg: &ExperimentConfig,
    jobs: Option<usize>,
    keep_records: bool,
) -> Result<SweepSummary> {
    if cfg.tau_grid.is_empty() {
        return Err(Error::ConfigInvalid("empty tau grid".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::ConfigInvalid("trials must be positive".into()));
    }
    let region = rec.region()?;
    let fixed = choose_f(&cfg.f_spec, &region)?;
    let region_sampler = RegionSampler::new(&region)?;
    let dim = region.anchor().dim();

    let body = || -> Result<Vec<TauSummary>> {
        cfg.tau_grid
            .iter()
            .enumerate()
            .map(|(ti, tau)| {
                let sampler = ErrorBallSampler::new(tau, dim)?;
                let records = (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = trial_rng(cfg.seed, ti as u64, t as u64);
                        let f = match &fixed {
                            Some(f) => f.clone(),
                            None => region_sampler.sample(&mut rng),
                        };
                        run_trial(rec, &sampler, &f, t, &mut rng)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(summarize(tau.clone(), records, keep_records))
            })
            .collect()
    };
    let rows = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(body)?,
        None => body()?,
    };
    Ok(SweepSummary {
        reconstructor: rec.kind(),
        seed: cfg.seed,
        f_fixed: fixed,
        rows,
    })
}

fn summarize(tau: BigRational, records: Vec<TrialRecord>, keep: bool) -> TauSummary {
    let n = records.len();
    let norms: Vec<f64> = records.iter().filter_map(|r| r.error_norm).collect();
    let mean_error = (!norms.is_empty()).then(|| norms.iter().sum::<f64>() / norms.len() as f64);
    let ok = records.iter().filter(|r| r.exact_success).count();
    let folds = records.iter().filter(|r| r.folds_exact).count();
    TauSummary {
        tau,
        mean_error,
        success_rate: ok as f64 / n as f64,
        fold_success_rate: folds as f64 / n as f64,
        trials: n,
        records: if keep { records } else { Vec::new() },
    }
}
