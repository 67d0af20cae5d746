use crate::error::{Error, Result};

/// The OT kernel evaluated on each pair of batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// `W_p`, the p-th root of the optimal cost.
    Wasserstein,
    /// `W_p^p`, the optimal cost itself.
    WassersteinPow,
    /// Entropic loss `W^eps`.
    Entropic,
    /// Sinkhorn divergence `S^eps`.
    Sinkhorn,
    /// Gromov-Wasserstein with intra-costs `|.|^p` and loss `|.|^p`.
    GromovWasserstein,
}

impl Kernel {
    pub fn uses_eps(self) -> bool {
        matches!(self, Kernel::Entropic | Kernel::Sinkhorn)
    }

    /// Whether a single batch plan exists to lift.
    pub fn has_plan(self) -> bool {
        !matches!(self, Kernel::Sinkhorn)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Wasserstein => "wp",
            Kernel::WassersteinPow => "wpp",
            Kernel::Entropic => "entropic",
            Kernel::Sinkhorn => "sinkhorn",
            Kernel::GromovWasserstein => "gw",
        }
    }
}

/// Reweighting function mapping `(a, I)` to batch weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reweight {
    /// Every batch element gets `1/m`.
    Uniform,
    /// `a_I` renormalized to unit mass.
    Normalized,
}

impl Reweight {
    pub fn name(self) -> &'static str {
        match self {
            Reweight::Uniform => "uniform",
            Reweight::Normalized => "normalized",
        }
    }
}

/// Sampling law over index m-tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Law {
    /// `P(I) = prod a_i`.
    WithReplacement,
    /// Repeat-free tuples with `P(I) = (n-m)!/(n-1)! * mean(a_I)`.
    WithoutReplacement,
}

impl Law {
    pub fn name(self) -> &'static str {
        match self {
            Law::WithReplacement => "with",
            Law::WithoutReplacement => "without",
        }
    }
}

/// Parameters of a minibatch loss.
#[derive(Debug, Clone, PartialEq)]
pub struct MinibatchSpec {
    pub m: usize,
    pub kernel: Kernel,
    pub p: f64,
    pub eps: f64,
    pub reweight: Reweight,
    pub law: Law,
    pub k: usize,
    pub seed: u64,
}

impl MinibatchSpec {
    pub fn new(m: usize, kernel: Kernel) -> Self {
        Self {
            m,
            kernel,
            p: 2.0,
            eps: 1.0,
            reweight: Reweight::Uniform,
            law: Law::WithoutReplacement,
            k: 1,
            seed: 42,
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_reweight(mut self, r: Reweight) -> Self {
        self.reweight = r;
        self
    }

    pub fn with_law(mut self, law: Law) -> Self {
        self.law = law;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Checks the spec against the sizes of the two measures.
    pub fn validate(&self, n_a: usize, n_b: usize) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParameter("batch size m must be >= 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("number of batches k must be >= 1".into()));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidParameter(format!("exponent p must be >= 1, got {}", self.p)));
        }
        if self.kernel.uses_eps() && !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be > 0, got {}", self.eps)));
        }
        if self.law == Law::WithoutReplacement && self.m > n_a.min(n_b) {
            return Err(Error::InvalidParameter(format!(
                "m = {} exceeds the support size {} under sampling without replacement",
                self.m,
                n_a.min(n_b)
            )));
        }
        Ok(())
    }
}
