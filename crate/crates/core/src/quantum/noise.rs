use super::QuantumError;

/// Gate and readout error rates for the device-noise backend.
///
/// `p1` and `p2` are depolarizing probabilities applied after every one-
/// and two-qubit gate; `p_readout` is a symmetric bit-flip on the measured
/// ancilla. The defaults are order-of-magnitude stand-ins for a small
/// superconducting device, not a calibration of any particular machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub p1: f64,
    pub p2: f64,
    pub p_readout: f64,
}

impl NoiseParams {
    pub const NONE: NoiseParams = NoiseParams {
        p1: 0.0,
        p2: 0.0,
        p_readout: 0.0,
    };

    pub fn new(p1: f64, p2: f64, p_readout: f64) -> Result<Self, QuantumError> {
        let params = Self { p1, p2, p_readout };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), QuantumError> {
        for (name, value) in [("p1", self.p1), ("p2", self.p2), ("p_readout", self.p_readout)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(QuantumError::BadProbability { name, value });
            }
        }
        Ok(())
    }

    /// Depolarizing probability for a gate touching `arity` qubits.
    pub fn for_arity(&self, arity: usize) -> f64 {
        if arity >= 2 {
            self.p2
        } else {
            self.p1
        }
    }
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            p1: 0.001,
            p2: 0.01,
            p_readout: 0.02,
        }
    }
}
