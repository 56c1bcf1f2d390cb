//! Flat `key = value` run configuration with named presets.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use pseudoe_core::training::{OptimizerKind, TrainConfig};
use pseudoe_core::{GeometryConfig, InitConfig, Signature, TfdParams, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Full,
    Fixed,
}

/// Everything a run needs, as one flat document.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub variant: Variant,
    pub n_t: usize,
    pub n_x: usize,
    pub circumference: Option<f64>,
    pub swap_transforms: bool,
    pub tfd: TfdParams,
    pub sigma_init: f64,
    pub train: TrainConfig,
    pub data: Option<PathBuf>,
    pub negatives: Option<PathBuf>,
    pub protocol: Protocol,
    pub out: Option<PathBuf>,
}

pub const PRESETS: [&str; 9] = [
    "wn18rr-mt",
    "wn18rr-dt",
    "wn18rr-both",
    "fb15k-mt",
    "fb15k-dt",
    "fb15k-both",
    "hetionet-mt",
    "hetionet-dt",
    "hetionet-both",
];

/// Keys accepted in config files and `--set`, in the order they are written.
pub const KEYS: [&str; 27] = [
    "variant",
    "n_t",
    "n_x",
    "circumference",
    "swap_transforms",
    "tau1",
    "tau2",
    "u",
    "alpha",
    "alpha_prime",
    "beta",
    "sigma_init",
    "optimizer",
    "learning_rate",
    "batch_size",
    "m_negatives",
    "max_epochs",
    "eval_every",
    "patience",
    "augment_reverse",
    "train_tfd",
    "seed",
    "data",
    "negatives",
    "protocol",
    "out",
    "k_scale",
];

impl Default for RunConfig {
    fn default() -> Self {
        Self::preset("wn18rr-both").expect("built-in preset")
    }
}

impl RunConfig {
    /// One of [`PRESETS`].
    pub fn preset(name: &str) -> Result<Self> {
        let (dataset, variant) = name
            .split_once('-')
            .ok_or_else(|| anyhow!("unknown preset `{name}`; expected one of {}", PRESETS.join(", ")))?;
        let col = match variant {
            "mt" => 0,
            "dt" => 1,
            "both" => 2,
            _ => bail!("unknown preset `{name}`; expected one of {}", PRESETS.join(", ")),
        };
        let (tfd, sigma, batch, m, augment) = match dataset {
            "wn18rr" => ((0.3673, 0.75182, 0.040226, 0.29015, 0.21697), 0.001, 128, 50, true),
            "fb15k" => ((0.136206, 0.971685, 0.09592, 0.129815, 0.086457), 0.001, 128, 50, true),
            "hetionet" => ((0.10124, 1.0, 0.03, 0.11071, 0.06277), 0.02255, 100, 20, false),
            _ => bail!("unknown preset `{name}`; expected one of {}", PRESETS.join(", ")),
        };
        // per variant column: n_x, n_t, beta, circumference, learning rate, optimizer
        type Col = (usize, usize, f64, Option<f64>, f64, OptimizerKind);
        let cols: [Col; 3] = match dataset {
            "wn18rr" => [
                (500, 41, 0.18, None, 0.08, OptimizerKind::Sm3),
                (500, 1, 0.18, None, 0.08, OptimizerKind::Sm3),
                (500, 2, 0.18, None, 0.08, OptimizerKind::Adam),
            ],
            "fb15k" => [
                (200, 41, 0.0, None, 0.1, OptimizerKind::Sm3),
                (500, 1, 0.15, Some(8.0), 0.0001, OptimizerKind::Adam),
                (500, 3, 0.15, None, 0.0001, OptimizerKind::Adam),
            ],
            _ => [
                (200, 2, 0.0, None, 0.0002, OptimizerKind::Adam),
                (200, 1, 0.0, Some(8.0), 0.0002, OptimizerKind::Adam),
                (200, 2, 0.0, Some(6.0), 0.0002, OptimizerKind::Adam),
            ],
        };
        let (n_x, n_t, beta, circumference, lr, optimizer) = cols[col];
        let (alpha, alpha_prime, u, tau1, tau2) = tfd;
        Ok(Self {
            variant: [Variant::MultiTime, Variant::DistMultTransE, Variant::Both][col],
            n_t,
            n_x,
            circumference,
            swap_transforms: false,
            tfd: TfdParams {
                tau1,
                tau2,
                u,
                alpha,
                alpha_prime,
                k_scale: 1.0,
                beta,
            },
            sigma_init: sigma,
            train: TrainConfig {
                m_negatives: m,
                batch_size: batch,
                learning_rate: lr,
                optimizer,
                augment_reverse: augment,
                ..TrainConfig::default()
            },
            data: None,
            negatives: None,
            protocol: if dataset == "hetionet" {
                Protocol::Fixed
            } else {
                Protocol::Full
            },
            out: None,
        })
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and `#`
    /// comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            self.set(k.trim(), v.trim())
                .with_context(|| format!("line {}", i + 1))?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("override `{kv}` is not `key=value`"))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| anyhow!("`{key}`: cannot parse `{v}`"))
        }
        fn flag(key: &str, v: &str) -> Result<bool> {
            match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => bail!("`{key}`: expected true or false, got `{v}`"),
            }
        }
        fn path(v: &str) -> Option<PathBuf> {
            (!v.is_empty() && v != "none").then(|| PathBuf::from(v))
        }
        let t = &mut self.train;
        match key {
            "variant" => self.variant = parse_variant(value)?,
            "n_t" => self.n_t = num(key, value)?,
            "n_x" => self.n_x = num(key, value)?,
            "circumference" => self.circumference = if value == "none" { None } else { Some(num(key, value)?) },
            "swap_transforms" => self.swap_transforms = flag(key, value)?,
            "tau1" => self.tfd.tau1 = num(key, value)?,
            "tau2" => self.tfd.tau2 = num(key, value)?,
            "u" => self.tfd.u = num(key, value)?,
            "alpha" => self.tfd.alpha = num(key, value)?,
            "alpha_prime" => self.tfd.alpha_prime = num(key, value)?,
            "beta" => self.tfd.beta = num(key, value)?,
            "k_scale" => self.tfd.k_scale = num(key, value)?,
            "sigma_init" => self.sigma_init = num(key, value)?,
            "optimizer" => t.optimizer = parse_optimizer(value)?,
            "learning_rate" => t.learning_rate = num(key, value)?,
            "batch_size" => t.batch_size = num(key, value)?,
            "m_negatives" => t.m_negatives = num(key, value)?,
            "max_epochs" => t.max_epochs = num(key, value)?,
            "eval_every" => t.eval_every = num(key, value)?,
            "patience" => t.patience = num(key, value)?,
            "augment_reverse" => t.augment_reverse = flag(key, value)?,
            "train_tfd" => t.train_tfd = flag(key, value)?,
            "seed" => t.seed = num(key, value)?,
            "data" => self.data = path(value),
            "negatives" => self.negatives = path(value),
            "protocol" => self.protocol = parse_protocol(value)?,
            "out" => self.out = path(value),
            _ => bail!("unknown config key `{key}`"),
        }
        Ok(())
    }

    /// Every key, one per line, in a form [`RunConfig::apply_text`] reads back.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.get(key));
        }
        s
    }

    fn get(&self, key: &str) -> String {
        let t = &self.train;
        let path = |p: &Option<PathBuf>| p.as_ref().map_or("none".to_string(), |p| p.display().to_string());
        match key {
            "variant" => variant_name(self.variant).into(),
            "n_t" => self.n_t.to_string(),
            "n_x" => self.n_x.to_string(),
            "circumference" => self.circumference.map_or("none".into(), |c| c.to_string()),
            "swap_transforms" => self.swap_transforms.to_string(),
            "tau1" => self.tfd.tau1.to_string(),
            "tau2" => self.tfd.tau2.to_string(),
            "u" => self.tfd.u.to_string(),
            "alpha" => self.tfd.alpha.to_string(),
            "alpha_prime" => self.tfd.alpha_prime.to_string(),
            "beta" => self.tfd.beta.to_string(),
            "k_scale" => self.tfd.k_scale.to_string(),
            "sigma_init" => self.sigma_init.to_string(),
            "optimizer" => optimizer_name(t.optimizer).into(),
            "learning_rate" => t.learning_rate.to_string(),
            "batch_size" => t.batch_size.to_string(),
            "m_negatives" => t.m_negatives.to_string(),
            "max_epochs" => t.max_epochs.to_string(),
            "eval_every" => t.eval_every.to_string(),
            "patience" => t.patience.to_string(),
            "augment_reverse" => t.augment_reverse.to_string(),
            "train_tfd" => t.train_tfd.to_string(),
            "seed" => t.seed.to_string(),
            "data" => path(&self.data),
            "negatives" => path(&self.negatives),
            "protocol" => match self.protocol {
                Protocol::Full => "full".into(),
                Protocol::Fixed => "fixed".into(),
            },
            "out" => path(&self.out),
            _ => unreachable!("key list and accessor out of sync: {key}"),
        }
    }

    pub fn geometry(&self) -> Result<GeometryConfig> {
        Ok(GeometryConfig::new(
            Signature::new(self.n_t, self.n_x)?,
            self.circumference,
        )?)
    }

    pub fn init(&self) -> InitConfig {
        InitConfig {
            sigma_init: self.sigma_init,
            seed: self.train.seed,
        }
    }

    /// Checks everything that can be checked without data.
    pub fn validate(&self) -> Result<()> {
        self.geometry()?;
        self.tfd.validate()?;
        self.train.validate()?;
        if self.variant == Variant::DistMultTransE && self.n_t != 1 {
            bail!("variant dt needs n_t = 1, got {}", self.n_t);
        }
        if !(self.sigma_init > 0.0 && self.sigma_init.is_finite()) {
            bail!("sigma_init must be positive");
        }
        Ok(())
    }
}

pub fn parse_variant(s: &str) -> Result<Variant> {
    match s {
        "mt" => Ok(Variant::MultiTime),
        "dt" => Ok(Variant::DistMultTransE),
        "both" => Ok(Variant::Both),
        _ => bail!("unknown variant `{s}`; expected mt, dt or both"),
    }
}

pub fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::MultiTime => "mt",
        Variant::DistMultTransE => "dt",
        Variant::Both => "both",
    }
}

pub fn parse_optimizer(s: &str) -> Result<OptimizerKind> {
    match s {
        "sgd" => Ok(OptimizerKind::Sgd),
        "adam" => Ok(OptimizerKind::Adam),
        "sm3" => Ok(OptimizerKind::Sm3),
        _ => bail!("unknown optimizer `{s}`; expected sgd, adam or sm3"),
    }
}

pub fn optimizer_name(k: OptimizerKind) -> &'static str {
    match k {
        OptimizerKind::Sgd => "sgd",
        OptimizerKind::Adam => "adam",
        OptimizerKind::Sm3 => "sm3",
    }
}

pub fn parse_protocol(s: &str) -> Result<Protocol> {
    match s {
        "full" => Ok(Protocol::Full),
        "fixed" => Ok(Protocol::Fixed),
        _ => bail!("unknown protocol `{s}`; expected full or fixed"),
    }
}
