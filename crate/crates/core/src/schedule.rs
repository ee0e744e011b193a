//! Stopping probabilities r_k and survival products R_k.

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-10;

/// Bernoulli stopping probabilities r₀..r_T with R_k = Π_{j<k}(1 − r_j).
///
/// The implied mixture coefficients are c_k = r_k·R_k.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilitySchedule {
    stop: Vec<f64>,
    survival: Vec<f64>,
}

impl ProbabilitySchedule {
    /// r_k = c_k / (1 − Σ_{j<k} c_j), with r_T pinned to 1.
    pub fn from_coefficients(c: &[f64]) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::InvalidSchedule("coefficient vector is empty".into()));
        }
        if let Some((k, &bad)) = c.iter().enumerate().find(|(_, &x)| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidSchedule(format!("coefficient c_{k} = {bad} is not positive")));
        }
        let total: f64 = c.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidSchedule(format!("coefficients sum to {total}, expected 1")));
        }
        let c: Vec<f64> = c.iter().map(|x| x / total).collect();
        // remaining mass Σ_{j≥k} c_j, summed from the tail so it never
        // cancels catastrophically near the end
        let mut tail = vec![0.0; c.len() + 1];
        for k in (0..c.len()).rev() {
            tail[k] = tail[k + 1] + c[k];
        }
        let last = c.len() - 1;
        let stop: Vec<f64> =
            (0..c.len()).map(|k| if k == last { 1.0 } else { (c[k] / tail[k]).min(1.0 - f64::EPSILON) }).collect();
        Ok(Self::from_stop_unchecked(stop))
    }

    /// Schedule from explicit stopping probabilities; the last one must be 1.
    pub fn from_stop_probabilities(r: &[f64]) -> Result<Self> {
        let Some(&last) = r.last() else {
            return Err(Error::InvalidSchedule("stopping probabilities are empty".into()));
        };
        if last != 1.0 {
            return Err(Error::InvalidSchedule(format!("r_T must be exactly 1, got {last}")));
        }
        if let Some((k, &bad)) = r[..r.len() - 1].iter().enumerate().find(|(_, &x)| !(0.0..1.0).contains(&x)) {
            return Err(Error::InvalidSchedule(format!("r_{k} = {bad} is outside [0, 1)")));
        }
        Ok(Self::from_stop_unchecked(r.to_vec()))
    }

    /// r_k = 1/(T+1−k), giving every c_k = 1/(T+1).
    pub fn uniform(horizon: usize) -> Self {
        let len = horizon + 1;
        let stop = (0..len).map(|k| 1.0 / (len - k) as f64).collect();
        let survival = (0..len).map(|k| (len - k) as f64 / len as f64).collect();
        Self { stop, survival }
    }

    fn from_stop_unchecked(stop: Vec<f64>) -> Self {
        let mut survival = Vec::with_capacity(stop.len());
        let mut running = 1.0;
        for r in &stop {
            survival.push(running);
            running *= 1.0 - r;
        }
        Self { stop, survival }
    }

    pub fn horizon(&self) -> usize {
        self.stop.len() - 1
    }

    pub fn stop_probabilities(&self) -> &[f64] {
        &self.stop
    }

    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    /// c_k = r_k·R_k.
    pub fn recover_coefficients(&self) -> Vec<f64> {
        self.stop.iter().zip(&self.survival).map(|(r, big_r)| r * big_r).collect()
    }

    pub fn is_uniform(&self) -> bool {
        let len = self.stop.len() as f64;
        self.recover_coefficients().iter().all(|c| (c * len - 1.0).abs() < 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn coefficient_examples() {
        let s = ProbabilitySchedule::from_coefficients(&[1.0]).unwrap();
        assert_eq!(s.stop_probabilities(), &[1.0]);
        let s = ProbabilitySchedule::from_coefficients(&[0.25; 4]).unwrap();
        assert!(close(s.stop_probabilities(), &[0.25, 1.0 / 3.0, 0.5, 1.0], 1e-15));
        let s = ProbabilitySchedule::from_coefficients(&[0.5, 0.25, 0.25]).unwrap();
        assert!(close(s.stop_probabilities(), &[0.5, 0.5, 1.0], 1e-15));
        assert_eq!(*s.stop_probabilities().last().unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(ProbabilitySchedule::from_coefficients(&[]).is_err());
        assert!(ProbabilitySchedule::from_coefficients(&[0.5, 0.0, 0.5]).is_err());
        assert!(ProbabilitySchedule::from_coefficients(&[0.5, 0.6]).is_err());
        assert!(ProbabilitySchedule::from_coefficients(&[0.5, 0.5 + 5e-11]).is_ok());
    }

    #[test]
    fn uniform_examples() {
        assert_eq!(ProbabilitySchedule::uniform(0).stop_probabilities(), &[1.0]);
        let s = ProbabilitySchedule::uniform(3);
        assert!(close(s.stop_probabilities(), &[0.25, 1.0 / 3.0, 0.5, 1.0], 1e-15));
        assert!(close(s.survival(), &[1.0, 0.75, 0.5, 0.25], 1e-15));
        assert!(close(&s.recover_coefficients(), &[0.25; 4], 1e-15));
        assert!(s.is_uniform());
        for t in [1, 7, 100] {
            let c = ProbabilitySchedule::uniform(t).recover_coefficients();
            assert!(c.iter().all(|x| (x - 1.0 / (t + 1) as f64).abs() < 1e-15));
        }
    }

    #[test]
    fn explicit_stop_probabilities() {
        let s = ProbabilitySchedule::from_stop_probabilities(&[0.5, 0.5, 1.0]).unwrap();
        assert!(close(&s.recover_coefficients(), &[0.5, 0.25, 0.25], 1e-15));
        assert!(ProbabilitySchedule::from_stop_probabilities(&[0.5, 0.9]).is_err());
        assert!(ProbabilitySchedule::from_stop_probabilities(&[1.0, 1.0]).is_err());
        assert!(ProbabilitySchedule::from_stop_probabilities(&[]).is_err());
        assert_eq!(ProbabilitySchedule::from_stop_probabilities(&[1.0]).unwrap().horizon(), 0);
    }
}
