//! Template-based mode derivation and fusion.
//!
//! Every candidate (67 intra modes and the listed block vectors) is costed on
//! the block's Γ-template. Baseline TIMD fuses the best angular modes under a
//! 2× rule; E-TIMD ranks all candidates together, admits the runner-up under
//! a 1.5× rule and completes the set with the cheapest remaining non-angular
//! candidate.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::block_grid::{BlockRef, ReconBuffer};
use crate::bvlist::BvList;
use crate::cost::{Cost, Metric, ShapeMismatch};
use crate::intra::{build_reference_samples, predict, IntraMode};
use crate::plane::PixelBlock;
use crate::tmp::{bv_predict, template_at_bv, BlockVector, GammaTemplate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Angular(u8),
    Planar,
    Dc,
    /// A block vector and its position in the candidate list.
    Bv { bv: BlockVector, slot: u16 },
}

impl ModeKind {
    pub fn intra(mode: IntraMode) -> ModeKind {
        match mode {
            IntraMode::PLANAR => ModeKind::Planar,
            IntraMode::DC => ModeKind::Dc,
            m => ModeKind::Angular(m.index()),
        }
    }

    pub fn intra_mode(self) -> Option<IntraMode> {
        match self {
            ModeKind::Angular(m) => IntraMode::angular(m),
            ModeKind::Planar => Some(IntraMode::PLANAR),
            ModeKind::Dc => Some(IntraMode::DC),
            ModeKind::Bv { .. } => None,
        }
    }

    pub fn bv(self) -> Option<BlockVector> {
        match self {
            ModeKind::Bv { bv, .. } => Some(bv),
            _ => None,
        }
    }

    pub fn is_angular(self) -> bool {
        matches!(self, ModeKind::Angular(_))
    }

    /// Tie-break position among equal costs: angular modes by index, then
    /// Planar, DC, and block vectors in list order.
    pub fn tie_rank(self) -> u32 {
        match self {
            ModeKind::Angular(m) => m as u32,
            ModeKind::Planar => 67,
            ModeKind::Dc => 68,
            ModeKind::Bv { slot, .. } => 69 + slot as u32,
        }
    }
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeKind::Angular(m) => write!(f, "A{m}"),
            ModeKind::Planar => f.write_str("PLANAR"),
            ModeKind::Dc => f.write_str("DC"),
            ModeKind::Bv { bv, .. } => write!(f, "BV{bv}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeCandidate {
    pub kind: ModeKind,
    pub cost: Cost,
}

impl ModeCandidate {
    pub fn new(kind: ModeKind, cost: u64) -> Self {
        ModeCandidate { kind, cost: Cost(cost) }
    }

    fn key(&self) -> (Cost, u32) {
        (self.cost, self.kind.tie_rank())
    }
}

/// Total order used for every ranking: cost, then [`ModeKind::tie_rank`].
pub fn rank_order(a: &ModeCandidate, b: &ModeCandidate) -> Ordering {
    a.key().cmp(&b.key())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionSet {
    modes: Vec<ModeCandidate>,
    weights: Vec<f64>,
}

impl FusionSet {
    /// Sorts the modes, computes weights, and drops modes whose weight comes
    /// out as zero (possible when the others all cost nothing).
    pub fn new(mut modes: Vec<ModeCandidate>) -> FusionSet {
        assert!((1..=3).contains(&modes.len()), "fusion takes 1 to 3 modes");
        modes.sort_by(rank_order);
        loop {
            let weights = compute_weights(&modes.iter().map(|m| m.cost).collect::<Vec<_>>());
            if let Some(i) = weights.iter().position(|&w| w == 0.0) {
                modes.remove(i);
                continue;
            }
            return FusionSet { modes, weights };
        }
    }

    pub fn single(mode: ModeCandidate) -> FusionSet {
        FusionSet { modes: vec![mode], weights: vec![1.0] }
    }

    pub fn modes(&self) -> &[ModeCandidate] {
        &self.modes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn primary(&self) -> ModeCandidate {
        self.modes[0]
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn bvs(&self) -> impl Iterator<Item = BlockVector> + '_ {
        self.modes.iter().filter_map(|m| m.kind.bv())
    }

    pub fn has_bv(&self) -> bool {
        self.bvs().next().is_some()
    }
}

/// Weights inversely related to template loss:
/// `w_s = (sum of the other losses) / ((n - 1) * sum of all losses)`.
pub fn compute_weights(losses: &[Cost]) -> Vec<f64> {
    let n = losses.len();
    if n <= 1 {
        return vec![1.0; n];
    }
    let total: f64 = losses.iter().map(|c| c.0 as f64).sum();
    if total == 0.0 {
        return vec![1.0 / n as f64; n];
    }
    losses.iter().map(|l| (total - l.0 as f64) / ((n - 1) as f64 * total)).collect()
}

/// Per-sample weighted sum, rounded half up and clipped to `max_value`.
pub fn fuse(predictions: &[PixelBlock], weights: &[f64], max_value: u16) -> Result<PixelBlock, ShapeMismatch> {
    let first = &predictions[0];
    let (w, h) = (first.width(), first.height());
    if let Some(p) = predictions.iter().find(|p| (p.width(), p.height()) != (w, h)) {
        return Err(ShapeMismatch((w, h), (p.width(), p.height())));
    }
    if predictions.len() == 1 {
        return Ok(first.clone());
    }
    Ok(PixelBlock::from_fn(w, h, |x, y| {
        let v: f64 = predictions.iter().zip(weights).map(|(p, &wt)| p.get(x, y) as f64 * wt).sum();
        (v + 0.5).floor().clamp(0.0, max_value as f64) as u16
    }))
}

/// Template cost of every intra mode (Planar, DC, 2..=66 in that order)
/// followed by every listed block vector.
///
/// Intra modes predict the virtual block spanning the template and the
/// block from that block's own references; only the template strips are
/// costed.
pub fn evaluate_candidates(
    buf: &ReconBuffer,
    block: &BlockRef,
    template: &GammaTemplate,
    bv_list: &BvList,
    metric: Metric,
) -> Vec<ModeCandidate> {
    let shape = &template.shape;
    let mut out = Vec::with_capacity(IntraMode::COUNT as usize + bv_list.len());
    if shape.is_empty() {
        return out;
    }
    let ext = shape.extended_rect(block);
    let refs = build_reference_samples(buf, ext);
    for idx in 0..IntraMode::COUNT {
        let mode = IntraMode::new(idx).expect("in range");
        let pred = predict(&refs, mode, ext.w, ext.h).expect("references sized for rect");
        let crop = |r: Option<crate::plane::Rect>| {
            r.map(|r| pred.crop((r.x - ext.x) as usize, (r.y - ext.y) as usize, r.w, r.h))
        };
        let predicted = GammaTemplate { shape: *shape, above: crop(shape.above), left: crop(shape.left) };
        out.push(ModeCandidate { kind: ModeKind::intra(mode), cost: predicted.cost(template, metric) });
    }
    for (slot, bv) in bv_list.vectors().enumerate() {
        let Ok(displaced) = template_at_bv(buf, block, shape, bv) else { continue };
        out.push(ModeCandidate {
            kind: ModeKind::Bv { bv, slot: slot as u16 },
            cost: displaced.cost(template, metric),
        });
    }
    out
}

fn sorted(candidates: &[ModeCandidate]) -> Vec<ModeCandidate> {
    let mut v = candidates.to_vec();
    v.sort_by(rank_order);
    v
}

/// `a < ratio * b` for `ratio = num/den`, exactly in integers.
fn below_ratio(a: Cost, b: Cost, num: u128, den: u128) -> bool {
    den * (a.0 as u128) < num * (b.0 as u128)
}

/// E-TIMD selection over the joint candidate pool.
pub fn select_modes_etimd(candidates: &[ModeCandidate]) -> Option<FusionSet> {
    let ranked = sorted(candidates);
    let (&first, rest) = ranked.split_first()?;
    let Some(&second) = rest.first().filter(|s| below_ratio(s.cost, first.cost, 3, 2)) else {
        return Some(FusionSet::single(first));
    };
    let third = rest[1..].iter().find(|c| !c.kind.is_angular()).copied();
    Some(FusionSet::new([first, second].into_iter().chain(third).collect()))
}

/// Baseline TIMD: best two angular modes under the 2× rule, plus the better
/// of Planar and DC when it also beats twice the best angular cost.
pub fn select_modes_timd(candidates: &[ModeCandidate]) -> Option<FusionSet> {
    let ranked = sorted(candidates);
    let mut angular = ranked.iter().filter(|c| c.kind.is_angular());
    let non_angular = ranked.iter().find(|c| matches!(c.kind, ModeKind::Planar | ModeKind::Dc)).copied();
    let Some(&first) = angular.next() else {
        return non_angular.map(FusionSet::single);
    };
    let mut modes = vec![first];
    modes.extend(angular.next().filter(|s| below_ratio(s.cost, first.cost, 2, 1)));
    modes.extend(non_angular.filter(|e| below_ratio(e.cost, first.cost, 2, 1)));
    Some(FusionSet::new(modes))
}

/// Block-sized prediction of one candidate.
pub fn predict_candidate(buf: &ReconBuffer, block: &BlockRef, kind: ModeKind) -> PixelBlock {
    match kind {
        ModeKind::Bv { bv, .. } => bv_predict(buf, block, bv).expect("listed vectors are valid"),
        other => {
            let refs = build_reference_samples(buf, block.rect());
            let mode = other.intra_mode().expect("intra kind");
            predict(&refs, mode, block.w, block.h).expect("references sized for block")
        }
    }
}

/// Per-mode predictions of a fusion set, in set order.
pub fn fusion_predictions(buf: &ReconBuffer, block: &BlockRef, fusion: &FusionSet) -> Vec<PixelBlock> {
    fusion.modes().iter().map(|m| predict_candidate(buf, block, m.kind)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tmp::extract_template;
    use proptest::prelude::*;

    fn a(m: u8, c: u64) -> ModeCandidate {
        ModeCandidate::new(ModeKind::Angular(m), c)
    }
    fn bv(slot: u16, c: u64) -> ModeCandidate {
        ModeCandidate::new(ModeKind::Bv { bv: BlockVector::new(-8 * (slot as i32 + 1), 0), slot }, c)
    }
    fn planar(c: u64) -> ModeCandidate {
        ModeCandidate::new(ModeKind::Planar, c)
    }
    fn dc(c: u64) -> ModeCandidate {
        ModeCandidate::new(ModeKind::Dc, c)
    }
    fn kinds(f: &FusionSet) -> Vec<ModeKind> {
        f.modes().iter().map(|m| m.kind).collect()
    }

    #[test]
    fn weights_examples() {
        let w = compute_weights(&[Cost(100), Cost(150)]);
        assert!((w[0] - 0.6).abs() < 1e-12 && (w[1] - 0.4).abs() < 1e-12);
        let w = compute_weights(&[Cost(7); 3]);
        assert!(w.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-12));
        assert_eq!(compute_weights(&[Cost(0), Cost(0)]), vec![0.5, 0.5]);
        assert_eq!(compute_weights(&[Cost(42)]), vec![1.0]);
    }

    #[test]
    fn fuse_examples() {
        let p = PixelBlock::from_fn(4, 4, |x, y| (x * 7 + y) as u16);
        assert_eq!(fuse(&[p.clone(), p.clone()], &[0.3, 0.7], 1023).unwrap(), p);
        let out = fuse(&[PixelBlock::filled(4, 4, 0), PixelBlock::filled(4, 4, 100)], &[0.6, 0.4], 1023).unwrap();
        assert_eq!(out, PixelBlock::filled(4, 4, 40));
        // 0.5 rounds up
        let out = fuse(&[PixelBlock::filled(1, 1, 0), PixelBlock::filled(1, 1, 1)], &[0.5, 0.5], 255).unwrap();
        assert_eq!(out.get(0, 0), 1);
        assert!(fuse(&[PixelBlock::filled(4, 4, 0), PixelBlock::filled(4, 8, 0)], &[0.5, 0.5], 255).is_err());
    }

    #[test]
    fn etimd_selection_examples() {
        let f = select_modes_etimd(&[a(18, 100), a(19, 160), dc(400)]).unwrap();
        assert_eq!(kinds(&f), vec![ModeKind::Angular(18)]);
        assert_eq!(f.weights(), &[1.0]);

        let f = select_modes_etimd(&[a(18, 100), bv(0, 120), planar(300), dc(500)]).unwrap();
        assert_eq!(kinds(&f), vec![ModeKind::Angular(18), bv(0, 0).kind, ModeKind::Planar]);

        // boundary: exactly 1.5x is excluded, one below is admitted
        assert_eq!(select_modes_etimd(&[a(18, 100), a(19, 150)]).unwrap().len(), 1);
        assert_eq!(select_modes_etimd(&[a(18, 100), a(19, 149)]).unwrap().len(), 2);
        assert!(select_modes_etimd(&[]).is_none());
    }

    #[test]
    fn etimd_tie_break_prefers_angular_then_planar_dc_bv() {
        let f = select_modes_etimd(&[bv(0, 10), dc(10), planar(10), a(40, 10), a(20, 10)]).unwrap();
        assert_eq!(kinds(&f), vec![ModeKind::Angular(20), ModeKind::Angular(40), ModeKind::Planar]);
        let f = select_modes_etimd(&[bv(1, 10), bv(0, 10), dc(50)]).unwrap();
        assert_eq!(f.primary().kind, bv(0, 0).kind);
    }

    #[test]
    fn timd_selection_examples() {
        assert_eq!(select_modes_timd(&[a(18, 100), a(19, 199), dc(900)]).unwrap().len(), 2);
        assert_eq!(select_modes_timd(&[a(18, 100), a(19, 200), dc(900)]).unwrap().len(), 1);
        let f = select_modes_timd(&[a(18, 100), a(19, 300), planar(150), dc(180)]).unwrap();
        assert_eq!(kinds(&f), vec![ModeKind::Angular(18), ModeKind::Planar]);
        let f = select_modes_timd(&[a(18, 100), a(19, 120), planar(150), dc(500)]).unwrap();
        assert_eq!(kinds(&f), vec![ModeKind::Angular(18), ModeKind::Angular(19), ModeKind::Planar]);
        // block vectors are ignored by the baseline
        let f = select_modes_timd(&[a(18, 100), bv(0, 1)]).unwrap();
        assert_eq!(kinds(&f), vec![ModeKind::Angular(18)]);
    }

    #[test]
    fn zero_cost_partner_absorbs_fusion() {
        // planar costs 0 and joins; the angular mode would get weight 0
        let f = select_modes_timd(&[a(18, 100), planar(0), dc(500)]).unwrap();
        assert_eq!(kinds(&f), vec![ModeKind::Planar]);
        assert_eq!(f.weights(), &[1.0]);
    }

    #[test]
    fn constant_frame_costs_zero() {
        let mut buf = ReconBuffer::new(32, 32, 8, 8).unwrap();
        for b in buf.blocks().to_vec().into_iter().take(9) {
            buf.commit_block(&b, &PixelBlock::filled(8, 8, 77)).unwrap();
        }
        let block = buf.blocks()[9];
        let t = extract_template(&buf, &block, 4);
        let c = evaluate_candidates(&buf, &block, &t, &BvList::empty(), Metric::Satd);
        assert_eq!(c.len(), 67);
        assert!(c.iter().all(|c| c.cost == Cost::ZERO));
    }

    #[test]
    fn stripes_favour_horizontal() {
        let row = |y: usize| if (y / 2) % 2 == 0 { 20 } else { 200 };
        let mut buf = ReconBuffer::new(32, 32, 8, 8).unwrap();
        for b in buf.blocks().to_vec().into_iter().take(9) {
            buf.commit_block(&b, &PixelBlock::from_fn(8, 8, |_, y| row(b.y0 + y))).unwrap();
        }
        let block = buf.blocks()[9];
        let t = extract_template(&buf, &block, 4);
        let c = evaluate_candidates(&buf, &block, &t, &BvList::empty(), Metric::Satd);
        let cost = |m: u8| c.iter().find(|c| c.kind == ModeKind::Angular(m)).unwrap().cost;
        assert!(cost(18) < cost(50));
    }

    proptest! {
        #[test]
        fn weights_sum_to_one(l in prop::collection::vec(0u64..100_000, 1..=3)) {
            let w = compute_weights(&l.iter().map(|&c| Cost(c)).collect::<Vec<_>>());
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn selection_is_scale_invariant(
            costs in prop::collection::vec(1u64..10_000, 3..40),
            k in 2u64..50,
        ) {
            let cands: Vec<_> = costs.iter().enumerate().map(|(i, &c)| match i {
                0 => planar(c),
                1 => dc(c),
                i if i < 30 => a(i as u8, c),
                i => bv((i - 30) as u16, c),
            }).collect();
            let scaled: Vec<_> = cands.iter().map(|c| ModeCandidate { cost: Cost(c.cost.0 * k), ..*c }).collect();
            let f = select_modes_etimd(&cands).unwrap();
            let g = select_modes_etimd(&scaled).unwrap();
            prop_assert_eq!(kinds(&f), kinds(&g));
            let f = select_modes_timd(&cands).unwrap();
            let g = select_modes_timd(&scaled).unwrap();
            prop_assert_eq!(kinds(&f), kinds(&g));
        }

        #[test]
        fn fused_output_within_inputs(
            a in prop::collection::vec(0u16..1024, 16),
            b in prop::collection::vec(0u16..1024, 16),
            w in 0.01f64..0.99,
        ) {
            let pa = PixelBlock::new(4, 4, a);
            let pb = PixelBlock::new(4, 4, b);
            let out = fuse(&[pa.clone(), pb.clone()], &[w, 1.0 - w], 1023).unwrap();
            for i in 0..16 {
                let (lo, hi) = (pa.data()[i].min(pb.data()[i]), pa.data()[i].max(pb.data()[i]));
                prop_assert!(out.data()[i] >= lo && out.data()[i] <= hi);
            }
        }
    }
}
