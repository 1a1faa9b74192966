use crate::spectral::{Norm, NormKind, SpectralField};

/// Ratios behind the Poincaré and one-dimensional embedding inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport {
    /// `‖f‖₂² / (L² ‖∇_h f‖₂²)`, at most 1 for zero-horizontal-mean `f`;
    /// `None` when `f` has a horizontal mean (the inequality does not apply).
    pub ratio_poincare: Option<f64>,
    /// `sup_z ∫|f|² dx dy / (‖f‖₂² + ‖∂_z^{2/3} f‖₂²)`
    pub ratio_embed_two_thirds: f64,
    /// `sup_z ∫|f|² dx dy / (‖f‖₂² + ‖∂_z f‖₂²)`
    pub ratio_embed_one: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn lemma_diagnostics(f: &SpectralField) -> LemmaReport {
    let norm = |kind| f.norm_sq(kind).expect("orders are valid");
    let l2 = norm(NormKind::L2);
    let l = f.grid().length();
    let ratio_poincare = f.ensure_zero_horizontal_mean().is_ok()
        .then(|| ratio(l2, l * l * norm(NormKind::GradHL2)));
    let sup = norm(NormKind::SupZHL2);
    LemmaReport {
        ratio_poincare,
        ratio_embed_two_thirds: ratio(sup, l2 + norm(NormKind::DzS(2.0 / 3.0))),
        ratio_embed_one: ratio(sup, l2 + norm(NormKind::DzS(1.0))),
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::Grid;

    #[test]
    fn poincare_is_sharp_on_the_first_mode() {
        let grid = Grid::cube(8, 1.0).unwrap();
        let f = SpectralField::from_fn(&grid, |x, _, _| x.cos());
        assert!((lemma_diagnostics(&f).ratio_poincare.unwrap() - 1.0).abs() < 1e-14);
        let g = SpectralField::from_fn(&grid, |x, _, _| (2.0 * x).cos());
        assert!((lemma_diagnostics(&g).ratio_poincare.unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn poincare_scales_with_length() {
        let grid = Grid::cube(8, 2.0).unwrap();
        let f = SpectralField::from_fn(&grid, |_, y, z| (y / 2.0 + z).sin());
        assert!((lemma_diagnostics(&f).ratio_poincare.unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn embedding_ratio_for_cos_x_cos_z() {
        // sup_z ∫ cos²x cos²z dx dy = 2π², ‖f‖² = ‖∂_z f‖² = 2π³
        let grid = Grid::cube(8, 1.0).unwrap();
        let f = SpectralField::from_fn(&grid, |x, _, z| x.cos() * z.cos());
        let r = lemma_diagnostics(&f);
        let expected = 1.0 / (2.0 * PI);
        assert!((r.ratio_embed_one - expected).abs() < 1e-14);
        assert!((r.ratio_embed_two_thirds - expected).abs() < 1e-14);
    }

    #[test]
    fn mean_content_skips_poincare() {
        let grid = Grid::cube(8, 1.0).unwrap();
        let f = SpectralField::from_fn(&grid, |_, _, z| z.cos());
        assert_eq!(lemma_diagnostics(&f).ratio_poincare, None);
        let zero = lemma_diagnostics(&SpectralField::zeros(&grid));
        assert_eq!(zero.ratio_poincare, Some(0.0));
        assert_eq!(zero.ratio_embed_one, 0.0);
    }
}
