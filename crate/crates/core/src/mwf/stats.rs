use num_complex::Complex64;

use crate::activity::Activity;
use crate::room::SourceLabel;

/// 2×2 Hermitian matrix stored as its two real diagonal entries and the
/// upper off-diagonal `a12`; `a21 = conj(a12)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Hermitian2 {
    pub a11: f64,
    pub a22: f64,
    pub a12: Complex64,
}

impl Hermitian2 {
    pub fn identity() -> Self {
        Self {
            a11: 1.0,
            a22: 1.0,
            a12: Complex64::new(0.0, 0.0),
        }
    }

    /// `x x^H`.
    pub fn outer(x0: Complex64, x1: Complex64) -> Self {
        Self {
            a11: x0.norm_sqr(),
            a22: x1.norm_sqr(),
            a12: x0 * x1.conj(),
        }
    }

    /// Entry `(i, j)`, zero-based.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match (i, j) {
            (0, 0) => Complex64::new(self.a11, 0.0),
            (1, 1) => Complex64::new(self.a22, 0.0),
            (0, 1) => self.a12,
            (1, 0) => self.a12.conj(),
            _ => panic!("index ({i}, {j}) out of range for a 2x2 matrix"),
        }
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12.norm_sqr()
    }

    /// Nearest positive semidefinite matrix in Frobenius norm: negative
    /// eigenvalues clamped to zero.
    pub fn psd_projection(&self) -> Self {
        let half = 0.5 * self.trace();
        let spread = (0.25 * (self.a11 - self.a22).powi(2) + self.a12.norm_sqr()).sqrt();
        let (hi, lo) = (half + spread, half - spread);
        if lo >= 0.0 {
            *self
        } else if hi <= 0.0 {
            Self::default()
        } else {
            // hi times the projector onto the leading eigenvector.
            let k = hi / (hi - lo);
            Self {
                a11: k * (self.a11 - lo),
                a22: k * (self.a22 - lo),
                a12: self.a12 * k,
            }
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            a11: self.a11 * c,
            a22: self.a22 * c,
            a12: self.a12 * c,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            a11: self.a11 + o.a11,
            a22: self.a22 + o.a22,
            a12: self.a12 + o.a12,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scaled(-1.0))
    }

    pub fn mul_vec(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a12.conj() * v[0] + self.a22 * v[1],
        ]
    }

    /// `self = λ·self + (1-λ)·x x^H`.
    pub fn ema_update(&mut self, x0: Complex64, x1: Complex64, lambda: f64) {
        let o = Self::outer(x0, x1);
        let g = 1.0 - lambda;
        self.a11 = lambda * self.a11 + g * o.a11;
        self.a22 = lambda * self.a22 + g * o.a22;
        self.a12 = lambda * self.a12 + g * o.a12;
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a22.is_finite() && self.a12.re.is_finite() && self.a12.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatClass {
    Noise,
    Driver,
    Passenger,
}

impl StatClass {
    /// Class updated by a frame with this label; `None` freezes.
    pub fn for_label(label: Activity) -> Option<Self> {
        match label {
            Activity::Silence => Some(StatClass::Noise),
            Activity::DriverOnly => Some(StatClass::Driver),
            Activity::PassengerOnly => Some(StatClass::Passenger),
            Activity::Both => None,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Tracked statistics per bin for the three classes.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationState {
    pub phi_noise: Vec<Hermitian2>,
    pub phi_a: Vec<Hermitian2>,
    pub phi_b: Vec<Hermitian2>,
    counts: [usize; 3],
}

impl CorrelationState {
    pub fn new(num_bins: usize) -> Self {
        Self {
            phi_noise: vec![Hermitian2::default(); num_bins],
            phi_a: vec![Hermitian2::default(); num_bins],
            phi_b: vec![Hermitian2::default(); num_bins],
            counts: [0; 3],
        }
    }

    pub fn num_bins(&self) -> usize {
        self.phi_noise.len()
    }

    pub fn count(&self, class: StatClass) -> usize {
        self.counts[class.index()]
    }

    pub fn class(&self, class: StatClass) -> &[Hermitian2] {
        match class {
            StatClass::Noise => &self.phi_noise,
            StatClass::Driver => &self.phi_a,
            StatClass::Passenger => &self.phi_b,
        }
    }

    /// Folds one two-channel frame into the class chosen by `label`.
    /// Returns whether anything changed.
    pub fn update(&mut self, frame: &[Vec<Complex64>], label: Activity, lambda: f64) -> bool {
        let Some(class) = StatClass::for_label(label) else {
            return false;
        };
        let target = match class {
            StatClass::Noise => &mut self.phi_noise,
            StatClass::Driver => &mut self.phi_a,
            StatClass::Passenger => &mut self.phi_b,
        };
        for (k, phi) in target.iter_mut().enumerate() {
            phi.ema_update(frame[0][k], frame[1][k], lambda);
        }
        self.counts[class.index()] += 1;
        true
    }

    pub fn all_classes_reach(&self, frames: usize) -> bool {
        self.counts.iter().all(|c| *c >= frames)
    }
}

/// Speech correlation `R = Φ_A + Φ_B − Φ_noise` (diagonal floored at zero)
/// and the cross-correlation with the target's own-microphone component.
pub fn assemble_system(state: &CorrelationState, bin: usize, target: SourceLabel) -> (Hermitian2, [Complex64; 2]) {
    let n = &state.phi_noise[bin];
    let mut r = state.phi_a[bin].add(&state.phi_b[bin]).sub(n);
    r.a11 = r.a11.max(0.0);
    r.a22 = r.a22.max(0.0);
    // The diagonal floor alone can leave R indefinite, and then the
    // regularized determinant can pass arbitrarily close to zero.
    let r = r.psd_projection();
    let p = match target {
        SourceLabel::Driver => {
            let d = state.phi_a[bin].sub(n);
            [d.get(0, 0), d.get(1, 0)]
        }
        SourceLabel::Passenger => {
            let d = state.phi_b[bin].sub(n);
            [d.get(0, 1), d.get(1, 1)]
        }
    };
    (r, p)
}
