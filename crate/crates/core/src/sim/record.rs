//! Detector record `y = cosθ X + sinθ Y − √(4Γ) sinθ z̄`.
//!
//! Heterodyne detection uses θ(t) = δt evaluated at the middle of each
//! sample interval; homodyne detection holds θ fixed.

use crate::error::{Error, Result};
use crate::qcheck::FrameDetection;

use super::{Frame, SimConfig, TimeTrace};

const RESYNC: u64 = 4096;

/// Phase reference for the detector, advanced one sample at a time.
#[derive(Debug, Clone)]
pub struct Carrier {
    rate: f64,
    dt: f64,
    start: u64,
    index: u64,
    cos: f64,
    sin: f64,
    rot: (f64, f64),
}

impl Carrier {
    /// Carrier positioned at sample `start` of the stream.
    pub fn new(detection: FrameDetection, dt: f64, start: u64) -> Self {
        let rate = match detection {
            FrameDetection::Heterodyne { delta } => delta,
            FrameDetection::Homodyne { .. } => 0.0,
        };
        let offset = match detection {
            FrameDetection::Heterodyne { .. } => 0.0,
            FrameDetection::Homodyne { theta } => theta,
        };
        let (s, c) = (rate * dt).sin_cos();
        let mut out = Self {
            rate,
            dt,
            start,
            index: 0,
            cos: 0.0,
            sin: 0.0,
            rot: (c, s),
        };
        out.sync(offset);
        out
    }

    fn phase(&self) -> f64 {
        self.rate * ((self.start + self.index) as f64 + 0.5) * self.dt
    }

    fn sync(&mut self, offset: f64) {
        let (s, c) = if self.rate == 0.0 {
            offset.sin_cos()
        } else {
            self.phase().sin_cos()
        };
        self.sin = s;
        self.cos = c;
    }

    /// `(cos θ, sin θ)` for the current sample, then advance.
    #[inline]
    pub fn next_phase(&mut self) -> (f64, f64) {
        let out = (self.cos, self.sin);
        self.index += 1;
        if self.rate != 0.0 {
            if self.index % RESYNC == 0 {
                self.sync(0.0);
            } else {
                let (c, s) = self.rot;
                let next_cos = self.cos * c - self.sin * s;
                self.sin = self.sin * c + self.cos * s;
                self.cos = next_cos;
            }
        }
        out
    }
}

/// Assemble the detector record from interval-mean positions and the vacuum
/// quadrature samples that also drove the mirror.
pub fn detector_record(z_mean: &[f64], x: &[f64], y: &[f64], config: &SimConfig) -> Result<TimeTrace> {
    for (what, got) in [("x", x.len()), ("y", y.len())] {
        if got != z_mean.len() {
            return Err(Error::LengthMismatch {
                what,
                got,
                expected: z_mean.len(),
            });
        }
    }
    if z_mean.len() < 2 {
        return Err(Error::LengthMismatch {
            what: "z",
            got: z_mean.len(),
            expected: 2,
        });
    }
    let gain = config.backaction_gain();
    let mut carrier = Carrier::new(config.params.detection, config.dt, 0);
    let samples = z_mean
        .iter()
        .zip(x.iter().zip(y))
        .map(|(&z, (&xi, &yi))| {
            let (c, s) = carrier.next_phase();
            c * xi + s * yi - gain * s * z
        })
        .collect();
    Ok(TimeTrace {
        dt: config.dt,
        samples,
        seed: config.seed,
        stream: 0,
        frame: Frame::RotatingDimensionless,
    })
}
