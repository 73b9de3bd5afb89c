//! Photon-number distributions of the input light mode.
//!
//! Only phase-insensitive states (diagonal in the Fock basis) are
//! represented; coherent states enter through their Poisson photon
//! statistics since click statistics are phase-blind. Distributions are
//! truncated adaptively so that the neglected tail mass stays below
//! [`Real::tail_target`] (1e-12 for f64), with a hard ceiling at
//! `MAX_PHOTON_NUMBER`.

use crate::error::{Error, Result};
use crate::real::Real;

/// Hard ceiling on the truncated photon number.
pub const MAX_PHOTON_NUMBER: usize = 4096;

/// Truncated photon-number distribution `p_n` of a single mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonNumberDistribution<F> {
    probs: Vec<F>,
    tail_bound: F,
    label: String,
}

impl<F: Real> PhotonNumberDistribution<F> {
    fn new(probs: Vec<F>, tail_bound: F, label: String) -> Self {
        debug_assert!(!probs.is_empty());
        Self {
            probs,
            tail_bound,
            label,
        }
    }

    /// Coherent state |α⟩ with `mean_photons` = |α|²: Poisson statistics.
    pub fn coherent(mean_photons: F) -> Result<Self> {
        if !(mean_photons >= F::zero()) || !mean_photons.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coherent: mean photon number must be finite and >= 0, got {mean_photons}"
            )));
        }
        let target = F::tail_target();
        let mut probs = Vec::new();
        let mut term = (-mean_photons).exp();
        for n in 0..=MAX_PHOTON_NUMBER {
            probs.push(term);
            let next = term * mean_photons / F::from_usize_(n + 1);
            // Past the mode the term ratio q = μ/(n+2) keeps shrinking, so
            // the tail after index n is bounded by next/(1 - q).
            let q = mean_photons / F::from_usize_(n + 2);
            if q < F::one() {
                let tail = next / (F::one() - q);
                if tail < target {
                    return Ok(Self::new(
                        probs,
                        tail,
                        format!("coherent(mu={mean_photons})"),
                    ));
                }
            }
            term = next;
        }
        Err(Error::Truncation {
            tail: term.to_f64().unwrap_or(f64::NAN),
            terms: MAX_PHOTON_NUMBER + 1,
        })
    }

    /// Thermal state with mean photon number `nbar`:
    /// p_k = n̄^k / (n̄+1)^{k+1}.
    pub fn thermal(nbar: F) -> Result<Self> {
        if !(nbar >= F::zero()) || !nbar.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "thermal: mean photon number must be finite and >= 0, got {nbar}"
            )));
        }
        let target = F::tail_target();
        let ratio = nbar / (nbar + F::one());
        let mut probs = Vec::new();
        let mut term = (nbar + F::one()).recip();
        let mut tail = F::one();
        for _ in 0..=MAX_PHOTON_NUMBER {
            probs.push(term);
            tail = tail * ratio; // tail after index k is ratio^{k+1}
            if tail < target {
                return Ok(Self::new(probs, tail, format!("thermal(nbar={nbar})")));
            }
            term = term * ratio;
        }
        Err(Error::Truncation {
            tail: tail.to_f64().unwrap_or(f64::NAN),
            terms: MAX_PHOTON_NUMBER + 1,
        })
    }

    /// Number state |n⟩.
    pub fn fock(n: usize) -> Result<Self> {
        if n > MAX_PHOTON_NUMBER {
            return Err(Error::InvalidParameter(format!(
                "fock: n = {n} exceeds the truncation ceiling {MAX_PHOTON_NUMBER}"
            )));
        }
        let mut probs = vec![F::zero(); n + 1];
        probs[n] = F::one();
        Ok(Self::new(probs, F::zero(), format!("fock({n})")))
    }

    /// m-photon-added thermal state: apply m creation operators to the
    /// thermal diagonal and renormalize. p_k = 0 exactly for k < m.
    pub fn photon_added_thermal(m: usize, nbar: F) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "photon_added_thermal: m must be >= 1".into(),
            ));
        }
        if !(nbar >= F::zero()) || !nbar.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "photon_added_thermal: nbar must be finite and >= 0, got {nbar}"
            )));
        }
        let target = F::tail_target();
        let ratio = nbar / (nbar + F::one());
        // Unnormalized weights w_{j+m} = r^j * (j+1)(j+2)...(j+m); the thermal
        // prefactor 1/(n̄+1)^{...} is constant and cancels on renormalization.
        let mut weights = Vec::new();
        let mut term = F::one();
        for i in 1..=m {
            term = term * F::from_usize_(i); // j = 0 rising factor: m!
        }
        let mut total = F::zero();
        let mut j = 0usize;
        let tail_bound = loop {
            if j + m > MAX_PHOTON_NUMBER {
                return Err(Error::Truncation {
                    tail: f64::NAN,
                    terms: j,
                });
            }
            weights.push(term);
            total += term;
            // Ratio of the next term to this one; decreasing in j with limit r.
            let step = ratio * F::from_usize_(j + m + 1) / F::from_usize_(j + 1);
            if step < F::one() {
                // Geometric bound on the neglected tail, relative to the total.
                let rel_tail = term * step / (F::one() - step) / total;
                if rel_tail < target {
                    break rel_tail;
                }
            }
            term = term * step;
            j += 1;
        };
        let mut probs = vec![F::zero(); m];
        probs.extend(weights.iter().map(|&w| w / total));
        Ok(Self::new(
            probs,
            tail_bound,
            format!("photon_added_thermal(m={m},nbar={nbar})"),
        ))
    }

    /// Cluster of independent emitters: M-fold convolution of the
    /// per-emitter (p0, p1, p2) distribution.
    pub fn emitter_cluster(spec: &EmitterSpec<F>) -> Result<Self> {
        spec.validate()?;
        if 2 * spec.emitters > MAX_PHOTON_NUMBER {
            return Err(Error::InvalidParameter(format!(
                "emitter_cluster: 2M = {} exceeds the truncation ceiling {MAX_PHOTON_NUMBER}",
                2 * spec.emitters
            )));
        }
        let kernel = [spec.p0, spec.p1, spec.p2];
        let mut probs = vec![F::one()];
        for _ in 0..spec.emitters {
            let mut next = vec![F::zero(); probs.len() + 2];
            for (n, &p) in probs.iter().enumerate() {
                if p == F::zero() {
                    continue;
                }
                for (d, &q) in kernel.iter().enumerate() {
                    next[n + d] += p * q;
                }
            }
            probs = next;
        }
        while probs.len() > 1 && *probs.last().unwrap() == F::zero() {
            probs.pop();
        }
        Ok(Self::new(
            probs,
            F::zero(),
            format!("emitter_cluster(M={})", spec.emitters),
        ))
    }

    /// Finite classical mixture Σ c_i · dist_i with non-negative weights
    /// summing to 1. Mixtures of coherent and thermal components stay
    /// classical, which makes this the test family for the classicality
    /// inequalities.
    pub fn mixture(components: &[(F, Self)]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("mixture: no components".into()));
        }
        let mut wsum = F::zero();
        for (w, _) in components {
            if !(*w >= F::zero()) {
                return Err(Error::InvalidParameter(
                    "mixture: weights must be >= 0".into(),
                ));
            }
            wsum += *w;
        }
        if (wsum - F::one()).abs() > F::from_f64(1e-9).unwrap() {
            return Err(Error::InvalidParameter(format!(
                "mixture: weights sum to {wsum}, expected 1"
            )));
        }
        let len = components.iter().map(|(_, d)| d.probs.len()).max().unwrap();
        let mut probs = vec![F::zero(); len];
        let mut tail = F::zero();
        for (w, d) in components {
            for (n, &p) in d.probs.iter().enumerate() {
                probs[n] += *w * p;
            }
            tail += *w * d.tail_bound;
        }
        Ok(Self::new(probs, tail, "mixture".into()))
    }

    /// Truncated probabilities, indexed by photon number.
    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    pub fn prob(&self, n: usize) -> F {
        self.probs.get(n).copied().unwrap_or_else(F::zero)
    }

    /// Upper bound on the neglected tail mass.
    pub fn tail_bound(&self) -> F {
        self.tail_bound
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Largest photon number with nonzero truncated probability.
    pub fn max_photon_number(&self) -> usize {
        self.probs.len() - 1
    }

    /// Probability generating function G(x) = Σ_n p_n x^n (Horner).
    pub fn pgf(&self, x: F) -> F {
        self.probs
            .iter()
            .rev()
            .fold(F::zero(), |acc, &p| acc * x + p)
    }

    pub fn mean(&self) -> F {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, &p)| F::from_usize_(n) * p)
            .sum()
    }

    /// k-th factorial moment Σ_n p_n · n(n−1)···(n−k+1).
    pub fn factorial_moment(&self, k: usize) -> F {
        assert!(k >= 1, "factorial moment order must be >= 1");
        self.probs
            .iter()
            .enumerate()
            .map(|(n, &p)| {
                let mut f = F::one();
                for i in 0..k {
                    if i >= n {
                        return F::zero();
                    }
                    f = f * F::from_usize_(n - i);
                }
                f * p
            })
            .sum()
    }
}

/// Cluster of M identical emitters with per-pulse emission probabilities
/// (p0, p1, p2) for zero, one and two photons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterSpec<F> {
    pub emitters: usize,
    pub p0: F,
    pub p1: F,
    pub p2: F,
}

impl<F: Real> EmitterSpec<F> {
    pub fn new(emitters: usize, p0: F, p1: F, p2: F) -> Result<Self> {
        let spec = Self {
            emitters,
            p0,
            p1,
            p2,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.emitters == 0 {
            return Err(Error::InvalidParameter(
                "emitter spec: M must be >= 1".into(),
            ));
        }
        for (name, p) in [("p0", self.p0), ("p1", self.p1), ("p2", self.p2)] {
            if !(p >= F::zero() && p <= F::one()) {
                return Err(Error::InvalidParameter(format!(
                    "emitter spec: {name} = {p} outside [0, 1]"
                )));
            }
        }
        let sum = self.p0 + self.p1 + self.p2;
        let tol = F::from_f64(1e-12).unwrap().max(F::epsilon() * F::from_f64(16.0).unwrap());
        if (sum - F::one()).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "emitter spec: p0 + p1 + p2 = {sum}, expected 1"
            )));
        }
        Ok(())
    }
}
