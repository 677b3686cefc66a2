//! Run configuration: flat `key = value` lines, `#` comments, lists as
//! comma-separated values. Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::PathBuf;

use acidfront::inverse::{MinimizeOptions, DEFAULT_BOUNDS};
use acidfront::{InitialProfile, ModelParams, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub params: ModelParams,
    pub profile: InitialProfile,
    pub bounds: [f64; 2],
    pub delta1_init: f64,
    pub minimize: MinimizeOptions,
    /// Directory written by `simulate`, read by `estimate`.
    pub data: Option<PathBuf>,
    /// Noise added to the data before estimation.
    pub sigma: f64,
    pub true_delta1: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub n_runs: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: PathBuf,
    /// Worker counts for the reaction-phase timing report of `simulate`.
    pub timing_workers: Vec<usize>,
    /// Replay the data run's refinement schedule in every evaluation.
    pub freeze_mesh: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            solver: SolverConfig::default(),
            params: ModelParams::default(),
            profile: InitialProfile::default(),
            bounds: DEFAULT_BOUNDS,
            delta1_init: 10.0,
            minimize: MinimizeOptions::default(),
            data: None,
            sigma: 0.0,
            true_delta1: vec![4.0, 12.5, 16.0],
            sigmas: vec![0.0],
            n_runs: 5,
            seed: 0,
            workers: None,
            out: PathBuf::from("runs"),
            timing_workers: Vec::new(),
            freeze_mesh: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("`{key}`: cannot parse `{v}`"))
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| num(key, x.trim())).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            cfg.set(key.trim(), value.trim()).map_err(err)?;
        }
        cfg.validate().map_err(|message| ConfigError { line: 0, message })?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        let s = &mut self.solver;
        match key {
            "tau" => s.tau = num(key, v)?,
            "t_final" => s.t_final = num(key, v)?,
            "eps_tol" => s.eps_tol = num(key, v)?,
            "theta" => s.theta = num(key, v)?,
            "reaction_abs_tol" => s.reaction_tol.abs = num(key, v)?,
            "reaction_rel_tol" => s.reaction_tol.rel = num(key, v)?,
            "max_refines_per_step" => s.max_refines_per_step = num(key, v)?,
            "cg_tol" => s.cg_tol = num(key, v)?,
            "coarse_n" => s.coarse_n = num(key, v)?,
            "max_nodes" => s.max_nodes = num(key, v)?,
            "delta1" => self.params.delta1 = num(key, v)?,
            "rho2" => self.params.rho2 = num(key, v)?,
            "D2" => self.params.d2 = num(key, v)?,
            "delta3" => self.params.delta3 = num(key, v)?,
            "profile" => self.profile = v.parse().map_err(|e: acidfront::Error| e.to_string())?,
            "bounds" => match list::<f64>(key, v)?.as_slice() {
                &[lo, hi] => self.bounds = [lo, hi],
                _ => return Err("`bounds` takes two values".into()),
            },
            "delta1_init" => self.delta1_init = num(key, v)?,
            "max_evaluations" => self.minimize.max_evaluations = num(key, v)?,
            "gtol_rel" => self.minimize.gtol_rel = num(key, v)?,
            "step_tol" => self.minimize.step_tol = num(key, v)?,
            "data" => self.data = (!v.is_empty()).then(|| PathBuf::from(v)),
            "sigma" => self.sigma = num(key, v)?,
            "true_delta1" => self.true_delta1 = list(key, v)?,
            "sigmas" => self.sigmas = list(key, v)?,
            "n_runs" => self.n_runs = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "workers" => self.workers = if v.is_empty() { None } else { Some(num(key, v)?) },
            "out" => self.out = PathBuf::from(v),
            "timing_workers" => self.timing_workers = list(key, v)?,
            "freeze_mesh" => self.freeze_mesh = num(key, v)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        self.solver.validate().map_err(|e| e.to_string())?;
        self.params.validate().map_err(|e| e.to_string())?;
        let [lo, hi] = self.bounds;
        if !(lo >= 0.0 && lo < hi) {
            return Err(format!("bounds [{lo}, {hi}] must satisfy 0 <= lo < hi"));
        }
        if !(lo..=hi).contains(&self.delta1_init) {
            return Err(format!("delta1_init = {} outside [{lo}, {hi}]", self.delta1_init));
        }
        if !(self.sigma >= 0.0) || self.sigmas.iter().any(|s| !(*s >= 0.0)) {
            return Err("noise levels must be non-negative".into());
        }
        if self.n_runs == 0 {
            return Err("n_runs must be at least 1".into());
        }
        if self.workers == Some(0) || self.timing_workers.contains(&0) {
            return Err("worker counts must be positive".into());
        }
        Ok(())
    }

    /// Text form accepted by [`RunConfig::parse`], with numbers printed in
    /// shortest round-trip form.
    pub fn serialize(&self) -> String {
        let s = &self.solver;
        let p = &self.params;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("tau", s.tau.to_string());
        kv("t_final", s.t_final.to_string());
        kv("eps_tol", s.eps_tol.to_string());
        kv("theta", s.theta.to_string());
        kv("reaction_abs_tol", s.reaction_tol.abs.to_string());
        kv("reaction_rel_tol", s.reaction_tol.rel.to_string());
        kv("max_refines_per_step", s.max_refines_per_step.to_string());
        kv("cg_tol", s.cg_tol.to_string());
        kv("coarse_n", s.coarse_n.to_string());
        kv("max_nodes", s.max_nodes.to_string());
        kv("delta1", p.delta1.to_string());
        kv("rho2", p.rho2.to_string());
        kv("D2", p.d2.to_string());
        kv("delta3", p.delta3.to_string());
        kv("profile", self.profile.to_string());
        kv("bounds", join(&self.bounds));
        kv("delta1_init", self.delta1_init.to_string());
        kv("max_evaluations", self.minimize.max_evaluations.to_string());
        kv("gtol_rel", self.minimize.gtol_rel.to_string());
        kv("step_tol", self.minimize.step_tol.to_string());
        kv(
            "data",
            self.data.as_ref().map(|d| d.display().to_string()).unwrap_or_default(),
        );
        kv("sigma", self.sigma.to_string());
        kv("true_delta1", join(&self.true_delta1));
        kv("sigmas", join(&self.sigmas));
        kv("n_runs", self.n_runs.to_string());
        kv("seed", self.seed.to_string());
        kv("workers", self.workers.map(|w| w.to_string()).unwrap_or_default());
        kv("out", self.out.display().to_string());
        kv("timing_workers", join(&self.timing_workers));
        kv("freeze_mesh", self.freeze_mesh.to_string());
        out
    }
}
