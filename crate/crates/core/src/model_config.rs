//! Reference configuration of the external mask predictors. Kept as data so
//! experiment reports can record it; nothing here drives a network.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskPredictorConfig {
    pub name: String,
    /// Including background.
    pub num_classes: usize,
    pub backbone: String,
    pub input_width: usize,
    pub input_height: usize,
    pub rpn_anchor_scales: Vec<usize>,
    pub anchors_per_image: usize,
    pub mask_shape: (usize, usize),
    pub train_rois_per_image: usize,
    pub learning_rate: f64,
    pub learning_momentum: f64,
    pub weight_decay: f64,
    pub epochs: Option<usize>,
}

impl MaskPredictorConfig {
    /// Lesion boundary model.
    pub fn boundary() -> Self {
        Self {
            name: "boundary".into(),
            num_classes: 2,
            backbone: "resnet50".into(),
            input_width: 768,
            input_height: 768,
            rpn_anchor_scales: vec![32, 64, 128, 256, 512],
            anchors_per_image: 64,
            mask_shape: (56, 56),
            train_rois_per_image: 128,
            learning_rate: 0.001,
            learning_momentum: 0.9,
            weight_decay: 0.0001,
            epochs: Some(40),
        }
    }

    /// Attribute model: boundary settings with five attribute classes.
    pub fn attributes() -> Self {
        Self {
            name: "attributes".into(),
            num_classes: 6,
            epochs: Some(80),
            ..Self::boundary()
        }
    }

    /// Disease class-mask model: seven classes at 600x450 input.
    pub fn diagnosis() -> Self {
        Self {
            name: "diagnosis".into(),
            num_classes: 8,
            input_width: 600,
            input_height: 450,
            epochs: None,
            ..Self::boundary()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidParameter(format!("{}: {m}", self.name)));
        if self.num_classes < 2 {
            return fail("num_classes must include background and at least one class");
        }
        if self.input_width == 0 || self.input_height == 0 {
            return fail("input dimensions must be positive");
        }
        if self.rpn_anchor_scales.is_empty() || self.rpn_anchor_scales.windows(2).any(|w| w[0] >= w[1]) {
            return fail("anchor scales must be non-empty and strictly increasing");
        }
        if self.mask_shape.0 == 0 || self.mask_shape.1 == 0 {
            return fail("mask shape must be positive");
        }
        if !self.learning_rate.is_finite()
            || self.learning_rate <= 0.0
            || !(0.0..1.0).contains(&self.learning_momentum)
            || self.weight_decay < 0.0
        {
            return fail("optimizer settings out of range");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_configs_validate() {
        for c in [
            MaskPredictorConfig::boundary(),
            MaskPredictorConfig::attributes(),
            MaskPredictorConfig::diagnosis(),
        ] {
            c.validate().unwrap();
        }
        assert_eq!(MaskPredictorConfig::attributes().input_width, 768);
    }

    #[test]
    fn rejects_unsorted_anchors() {
        let mut c = MaskPredictorConfig::boundary();
        c.rpn_anchor_scales = vec![64, 32];
        assert!(c.validate().is_err());
    }
}
