use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DenseTensor, Shape};
use crate::error::{Error, Result};
use crate::numerics::C64;

/// On-disk tensor: dimension lists plus `[re, im]` pairs in storage order.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorJson {
    pub row_dims: Vec<usize>,
    pub col_dims: Vec<usize>,
    pub data: Vec<[f64; 2]>,
}

impl From<&DenseTensor> for TensorJson {
    fn from(t: &DenseTensor) -> Self {
        Self {
            row_dims: t.row_dims().to_vec(),
            col_dims: t.col_dims().to_vec(),
            data: t.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<TensorJson> for DenseTensor {
    type Error = Error;

    fn try_from(j: TensorJson) -> Result<Self> {
        let shape = Shape::new(j.row_dims, j.col_dims).map_err(|e| Error::Format(e.to_string()))?;
        let data = j.data.into_iter().map(|[re, im]| C64::new(re, im)).collect();
        DenseTensor::new(shape, data).map_err(|e| Error::Format(e.to_string()))
    }
}

pub fn tensor_to_json(t: &DenseTensor) -> String {
    crate::fmt::to_json(&TensorJson::from(t))
}

pub fn tensor_from_json(text: &str) -> Result<DenseTensor> {
    let j: TensorJson = serde_json::from_str(text)?;
    j.try_into()
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<DenseTensor> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    tensor_from_json(&text)
}

pub fn write_tensor(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, tensor_to_json(t) + "\n").map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_bits() {
        let shape = Shape::new(vec![2, 3], vec![2, 3]).unwrap();
        let data = (0..36).map(|k| C64::new((k as f64).sin() / 3.0, -(k as f64 + 0.1).ln_1p() * 1e-200)).collect();
        let t = DenseTensor::new(shape, data).unwrap();
        let back = tensor_from_json(&tensor_to_json(&t)).unwrap();
        for (a, b) in t.data().iter().zip(back.data()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        assert_eq!(t.shape(), back.shape());
    }

    #[test]
    fn rejects_bad_lengths() {
        let text = r#"{"row_dims":[2],"col_dims":[2],"data":[[1,0]]}"#;
        assert!(matches!(tensor_from_json(text), Err(Error::Format(_))));
        assert!(matches!(tensor_from_json("{"), Err(Error::Format(_))));
    }
}
