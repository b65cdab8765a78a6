//! Command-line driver shared by the `levmem` binary and the tests.

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use log::info;

use crate::config::{load_config, Conventions, Format};
use crate::error::{Error, Result};
use crate::output::{write_tables, Metadata};
use crate::recipes::{run_recipe, Recipe};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConventionSet {
    Paper,
    Standard,
}

impl std::str::FromStr for ConventionSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "standard" => Ok(Self::Standard),
            _ => Err(Error::Usage(format!("unknown convention `{s}`, expected paper or standard"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub recipe: String,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub convention: Option<ConventionSet>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub written: Vec<PathBuf>,
    pub failures: usize,
    pub report: String,
}

impl Summary {
    /// 0 when every point succeeded, 2 when some sweep points failed.
    pub fn exit_code(&self) -> i32 {
        if self.failures == 0 {
            0
        } else {
            2
        }
    }
}

pub fn execute(opts: &Options) -> Result<Summary> {
    let recipe: Recipe = opts.recipe.parse()?;
    let mut cfg = load_config(&opts.config)?;
    if let Some(dir) = &opts.out {
        cfg.output.directory = dir.clone();
    }
    if let Some(f) = opts.format {
        cfg.output.format = f;
    }
    match opts.convention {
        Some(ConventionSet::Paper) => cfg.conventions = Conventions::paper(),
        Some(ConventionSet::Standard) => cfg.conventions = Conventions::default(),
        None => {}
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.jobs {
        if n == 0 {
            return Err(Error::Usage("--jobs must be >= 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Internal(e.to_string()))?;
    info!("running {} with {} workers", recipe.name(), pool.current_num_threads());

    let out = pool.install(|| run_recipe(recipe, &cfg))?;
    let meta = Metadata {
        recipe: recipe.name().to_owned(),
        config_digest: cfg.digest(),
        conventions: cfg.conventions.describe(),
        timestamp: cfg.output.timestamp.then(|| {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            format!("{secs} s since unix epoch")
        }),
    };
    let written = write_tables(&cfg.output.directory, &out.tables, &meta, cfg.output.format)?;
    Ok(Summary { written, failures: out.failures, report: out.report })
}
