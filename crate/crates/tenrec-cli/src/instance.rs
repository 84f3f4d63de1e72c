//! Generated problem instances and their on-disk layout: the original,
//! observed, and mask tensors in the TNR1 container plus a JSON sidecar
//! recording how they were drawn.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tenrec_core::io::{read_tensor_file, write_tensor_file};
use tenrec_core::synth::{generate_tucker, observe, ObservationSpec, TuckerSpec};
use tenrec_core::{DenseTensor, ObservationMask, Result, TenrecError};

/// One synthetic problem: the ground truth, the observation, and the mask.
#[derive(Debug, Clone)]
pub struct Instance {
    pub x_org: DenseTensor,
    pub y: DenseTensor,
    pub mask: ObservationMask,
    pub tucker: TuckerSpec,
    pub observation: ObservationSpec,
}

/// Sidecar contents; everything needed to regenerate the instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceSidecar {
    pub tucker: TuckerSpec,
    pub observation: ObservationSpec,
}

impl Instance {
    pub fn generate(tucker: &TuckerSpec, observation: &ObservationSpec) -> Result<Self> {
        let x_org = generate_tucker(tucker)?;
        let (y, mask) = observe(&x_org, observation)?;
        Ok(Self {
            x_org,
            y,
            mask,
            tucker: tucker.clone(),
            observation: observation.clone(),
        })
    }

    /// Writes `<base>.xorg.tnr`, `<base>.y.tnr`, `<base>.mask.tnr`, and
    /// `<base>.json`.
    pub fn write(&self, base: &Path) -> Result<()> {
        write_tensor_file(with_suffix(base, "xorg.tnr"), &self.x_org)?;
        write_tensor_file(with_suffix(base, "y.tnr"), &self.y)?;
        write_tensor_file(with_suffix(base, "mask.tnr"), &self.mask.to_indicator_tensor())?;
        let sidecar = InstanceSidecar {
            tucker: self.tucker.clone(),
            observation: self.observation.clone(),
        };
        let json = serde_json::to_string_pretty(&sidecar)
            .map_err(|e| TenrecError::BadContainer(e.to_string()))?;
        std::fs::write(with_suffix(base, "json"), json + "\n")?;
        Ok(())
    }

    pub fn read(base: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(with_suffix(base, "json"))?;
        let sidecar: InstanceSidecar = serde_json::from_str(&text)
            .map_err(|e| TenrecError::BadContainer(format!("bad sidecar: {e}")))?;
        let x_org = read_tensor_file(with_suffix(base, "xorg.tnr"))?;
        let y = read_tensor_file(with_suffix(base, "y.tnr"))?;
        let mask =
            ObservationMask::from_indicator_tensor(&read_tensor_file(with_suffix(base, "mask.tnr"))?)?;
        Ok(Self {
            x_org,
            y,
            mask,
            tucker: sidecar.tucker,
            observation: sidecar.observation,
        })
    }
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(suffix);
    base.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_read_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("inst");
        let tucker = TuckerSpec { shape: vec![6, 5, 4], ranks: vec![2, 2, 2], seed: 9 };
        let obs = ObservationSpec { missing_rate: 0.4, sigma_n: 0.5, seed: 10 };
        let inst = Instance::generate(&tucker, &obs).unwrap();
        inst.write(&base).unwrap();
        let back = Instance::read(&base).unwrap();
        assert_eq!(back.x_org, inst.x_org);
        assert_eq!(back.y, inst.y);
        assert_eq!(back.mask, inst.mask);
        assert_eq!(back.tucker, tucker);
        assert_eq!(back.observation, obs);
    }

    #[test]
    fn generation_is_deterministic() {
        let tucker = TuckerSpec { shape: vec![5, 5, 5], ranks: vec![2, 2, 2], seed: 1 };
        let obs = ObservationSpec { missing_rate: 0.5, sigma_n: 1.0, seed: 2 };
        let a = Instance::generate(&tucker, &obs).unwrap();
        let b = Instance::generate(&tucker, &obs).unwrap();
        assert_eq!(a.y, b.y);
        assert_eq!(a.mask, b.mask);
    }
}
