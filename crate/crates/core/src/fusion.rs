//! Late fusion of member posteriors and the final decision rule.

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::models::PosteriorPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modality {
    Text,
    Image,
}

/// Ordered fusion members with their weights and input modality.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionSpec {
    member_ids: Vec<String>,
    modalities: Vec<Modality>,
    weights: Vec<f64>,
}

impl FusionSpec {
    pub fn new(members: Vec<(String, Modality, f64)>) -> Result<FusionSpec> {
        if members.is_empty() {
            return Err(Error::invalid("fusion needs at least one member"));
        }
        check_weights(members.iter().map(|m| m.2))?;
        let mut spec = FusionSpec {
            member_ids: Vec::new(),
            modalities: Vec::new(),
            weights: Vec::new(),
        };
        for (id, modality, weight) in members {
            spec.member_ids.push(id);
            spec.modalities.push(modality);
            spec.weights.push(weight);
        }
        Ok(spec)
    }

    /// Every member weighted 1.
    pub fn equal(members: &[(&str, Modality)]) -> Result<FusionSpec> {
        FusionSpec::new(members.iter().map(|&(id, m)| (id.to_owned(), m, 1.0)).collect())
    }

    pub fn member_ids(&self) -> &[String] {
        &self.member_ids
    }

    pub fn modalities(&self) -> &[Modality] {
        &self.modalities
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.member_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_ids.is_empty()
    }
}

fn check_weights(weights: impl IntoIterator<Item = f64>) -> Result<()> {
    for w in weights {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::invalid(format!("fusion weights must be positive, got {w}")));
        }
    }
    Ok(())
}

/// Weighted arithmetic mean of the members, renormalized. The positive
/// probability is kept inside the members' range so rounding cannot push it
/// out.
pub fn fuse(posteriors: &[PosteriorPair], weights: &[f64]) -> Result<PosteriorPair> {
    if posteriors.is_empty() {
        return Err(Error::invalid("cannot fuse an empty list of posteriors"));
    }
    if posteriors.len() != weights.len() {
        return Err(Error::invalid(format!(
            "{} posteriors but {} weights",
            posteriors.len(),
            weights.len()
        )));
    }
    check_weights(weights.iter().copied())?;
    let total: f64 = weights.iter().sum();
    let mut neg = 0.0;
    let mut pos = 0.0;
    for (p, w) in posteriors.iter().zip(weights) {
        neg += w * p.p_neg;
        pos += w * p.p_pos;
    }
    let fused = PosteriorPair::from_masses(neg / total, pos / total)?;
    let (lo, hi) = posteriors
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.p_pos), hi.max(p.p_pos))
        });
    Ok(PosteriorPair::from_positive(fused.p_pos.clamp(lo, hi)))
}

/// Argmax over the pair; an exact tie goes to `Relevant`.
pub fn decide(p: PosteriorPair) -> Label {
    if p.p_pos >= p.p_neg {
        Label::Relevant
    } else {
        Label::NotRelevant
    }
}

/// Fuses whichever members are available for one record. Text members take
/// `text_posteriors` in spec order; the image member takes `image_posterior`.
/// Members whose input is absent are dropped and the remaining weights
/// renormalize implicitly.
pub fn fuse_multimodal(
    text_posteriors: &[Option<PosteriorPair>],
    image_posterior: Option<PosteriorPair>,
    spec: &FusionSpec,
) -> Result<PosteriorPair> {
    let text_members = spec.modalities.iter().filter(|&&m| m == Modality::Text).count();
    if text_members != text_posteriors.len() {
        return Err(Error::invalid(format!(
            "spec has {text_members} text members but {} text posteriors were given",
            text_posteriors.len()
        )));
    }
    let mut text = text_posteriors.iter();
    let mut available = Vec::with_capacity(spec.len());
    let mut weights = Vec::with_capacity(spec.len());
    for (modality, &w) in spec.modalities.iter().zip(&spec.weights) {
        let p = match modality {
            Modality::Text => *text.next().expect("counted above"),
            Modality::Image => image_posterior,
        };
        if let Some(p) = p {
            available.push(p);
            weights.push(w);
        }
    }
    if available.is_empty() {
        return Err(Error::MissingInput("no fusion member has input for this record".into()));
    }
    fuse(&available, &weights)
}
