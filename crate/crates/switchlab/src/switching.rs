//! Decoder-switching orchestrator and the soft-output statistics machinery:
//! gap spectra, conditional error rates, thresholded error rate, the
//! epsilon-rule threshold selection, and switching rates.

use crate::code::{Basis, CodeModel, DetectionEvents};
use crate::strong::{strong_decode, BpParams, TannerGraph};
use crate::weak::{cluster_gap, mwpm_decode_with_gap, uf_decode, GapResult};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SwitchingError {
    #[error("policy requires g_th >= 0 and epsilon > 0")]
    BadPolicy,
    #[error("even the largest observed soft output fails the epsilon rule at this sample size")]
    ThresholdUnreachable,
    #[error("shot {0} falls below the threshold but carries no strong evaluation")]
    MissingStrongEvaluation(usize),
    #[error("the strong error-rate target must be positive")]
    BadStrongTarget,
}

/// Which weak decoder produces the soft output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WeakKind {
    /// Exact MWPM with the complementary gap.
    MwpmComplementary,
    /// Union-find with the cluster gap.
    UfCluster,
}

impl std::fmt::Display for WeakKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeakKind::MwpmComplementary => write!(f, "mwpm"),
            WeakKind::UfCluster => write!(f, "uf"),
        }
    }
}

/// Switching policy: decoder pair, threshold, launch mode, and the target
/// accuracy parameter used by threshold selection.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SwitchPolicy {
    pub soft_output: WeakKind,
    /// Threshold in dB; `f64::INFINITY` is the always-switch sentinel.
    pub g_th_db: f64,
    /// Launch the strong decoder concurrently with the weak one. A cancelled
    /// strong run is discarded without side effects, so observable outputs
    /// are identical to lazy launch; the flag models the resource tradeoff.
    pub parallel_launch: bool,
    pub epsilon: f64,
}

impl SwitchPolicy {
    pub fn new(soft_output: WeakKind, g_th_db: f64, epsilon: f64) -> Result<Self, SwitchingError> {
        if g_th_db < 0.0 || g_th_db.is_nan() || epsilon <= 0.0 {
            return Err(SwitchingError::BadPolicy);
        }
        Ok(SwitchPolicy { soft_output, g_th_db, parallel_launch: false, epsilon })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderUsed {
    Weak,
    Strong,
}

/// How eagerly the orchestrator evaluates the strong decoder beyond the
/// switching protocol itself (spectrum estimation needs strong predictions
/// on shots the protocol would not switch).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrongEvalMode {
    /// Only when the protocol switches.
    Lazy,
    /// On every shot.
    Forced,
    /// On shots with soft output below the given level (dB).
    ForcedBelow(f64),
}

/// Outcome of one switched decode, with ground-truth correctness flags
/// (simulation mode always has ground truth).
#[derive(Debug, Clone)]
pub struct SwitchOutcome {
    pub used: DecoderUsed,
    pub gap_db: f64,
    pub weak_flip: bool,
    /// Present iff the strong decoder was invoked (not cancelled).
    pub strong_flip: Option<bool>,
    pub final_flip: bool,
    pub true_flip: bool,
    pub weak_correct: bool,
    pub strong_correct: Option<bool>,
    pub final_correct: bool,
}

/// Hybrid weak/strong decoder for one code model and basis.
pub struct HybridDecoder<'a> {
    pub model: &'a CodeModel,
    pub tanner: &'a TannerGraph,
    pub bp: BpParams,
    pub policy: SwitchPolicy,
    pub basis: Basis,
}

impl<'a> HybridDecoder<'a> {
    pub fn new(
        model: &'a CodeModel,
        tanner: &'a TannerGraph,
        bp: BpParams,
        policy: SwitchPolicy,
    ) -> Self {
        HybridDecoder { model, tanner, bp, policy, basis: model.spec.basis }
    }

    /// Weak decode with soft output per the policy's decoder pair.
    pub fn weak_decode(&self, events: &DetectionEvents) -> (bool, GapResult) {
        let graph = self.model.graph(self.basis);
        match self.policy.soft_output {
            WeakKind::MwpmComplementary => {
                let (matching, gap) = mwpm_decode_with_gap(graph, events);
                (matching.flips_observable, gap)
            }
            WeakKind::UfCluster => {
                let (matching, clusters) = uf_decode(graph, events);
                (matching.flips_observable, cluster_gap(graph, &clusters))
            }
        }
    }

    /// The strong decoder's observable prediction for the policy basis.
    pub fn strong_flip(&self, events: &DetectionEvents) -> bool {
        let (result, _) =
            strong_decode(&self.model.graph_x, &self.model.graph_z, self.tanner, &self.bp, events);
        result.flips(self.basis)
    }

    /// Run the switching protocol: the weak decoder's prediction stands when
    /// its soft output reaches the threshold, otherwise the strong decoder's
    /// result is awaited and adopted. The eval mode may evaluate the strong
    /// decoder even above threshold (spectrum estimation); extra evaluations
    /// never change the final prediction.
    pub fn decode_with_switching(
        &self,
        events: &DetectionEvents,
        eval: StrongEvalMode,
    ) -> SwitchOutcome {
        let (weak_flip, gap) = self.weak_decode(events);
        let switch = gap.gap_db < self.policy.g_th_db;
        let evaluate = switch
            || match eval {
                StrongEvalMode::Lazy => false,
                StrongEvalMode::Forced => true,
                StrongEvalMode::ForcedBelow(level) => gap.gap_db < level,
            };
        let strong_flip = if evaluate {
            Some(self.strong_flip(events))
        } else {
            // In parallel launch the concurrent strong run is cancelled here;
            // its result is discarded without side effects either way.
            None
        };
        let final_flip = if switch { strong_flip.unwrap() } else { weak_flip };
        let truth = events.observable_flip(self.basis);
        SwitchOutcome {
            used: if switch { DecoderUsed::Strong } else { DecoderUsed::Weak },
            gap_db: gap.gap_db,
            weak_flip,
            strong_flip,
            final_flip,
            true_flip: truth,
            weak_correct: weak_flip == truth,
            strong_correct: strong_flip.map(|f| f == truth),
            final_correct: final_flip == truth,
        }
    }
}

/// Per-shot record consumed by the spectrum estimators.
#[derive(Debug, Clone, Copy)]
pub struct RecordedShot {
    pub gap_db: f64,
    pub weak_error: bool,
    /// Present iff the strong decoder was evaluated on this shot.
    pub strong_error: Option<bool>,
}

impl From<&SwitchOutcome> for RecordedShot {
    fn from(o: &SwitchOutcome) -> Self {
        RecordedShot {
            gap_db: o.gap_db,
            weak_error: !o.weak_correct,
            strong_error: o.strong_correct.map(|c| !c),
        }
    }
}

/// Binned soft-output statistics: p(g), weak and strong conditional error
/// counts. Bin `i` covers `[i * width, (i + 1) * width)` dB.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSpectrum {
    pub bin_width_db: f64,
    pub bins: Vec<BinCounts>,
    pub total_shots: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BinCounts {
    pub shots: u64,
    pub weak_errors: u64,
    pub strong_evaluated: u64,
    pub strong_errors: u64,
}

/// Accumulate a spectrum from recorded shots (1 dB bins by default).
pub fn estimate_spectrum(shots: &[RecordedShot], bin_width_db: f64) -> GapSpectrum {
    assert!(bin_width_db > 0.0);
    let mut spectrum =
        GapSpectrum { bin_width_db, bins: Vec::new(), total_shots: 0 };
    for shot in shots {
        spectrum.record(shot);
    }
    spectrum
}

impl GapSpectrum {
    pub fn new(bin_width_db: f64) -> GapSpectrum {
        GapSpectrum { bin_width_db, bins: Vec::new(), total_shots: 0 }
    }

    pub fn record(&mut self, shot: &RecordedShot) {
        assert!(shot.gap_db >= 0.0 && shot.gap_db.is_finite());
        let idx = (shot.gap_db / self.bin_width_db).floor() as usize;
        if idx >= self.bins.len() {
            self.bins.resize(idx + 1, BinCounts::default());
        }
        let bin = &mut self.bins[idx];
        bin.shots += 1;
        bin.weak_errors += shot.weak_error as u64;
        if let Some(se) = shot.strong_error {
            bin.strong_evaluated += 1;
            bin.strong_errors += se as u64;
        }
        self.total_shots += 1;
    }

    /// Commutative merge for parallel shot accumulation.
    pub fn merge(&mut self, other: &GapSpectrum) {
        assert_eq!(self.bin_width_db, other.bin_width_db);
        if other.bins.len() > self.bins.len() {
            self.bins.resize(other.bins.len(), BinCounts::default());
        }
        for (a, b) in self.bins.iter_mut().zip(other.bins.iter()) {
            a.shots += b.shots;
            a.weak_errors += b.weak_errors;
            a.strong_evaluated += b.strong_evaluated;
            a.strong_errors += b.strong_errors;
        }
        self.total_shots += other.total_shots;
    }

    /// Empirical p(g) mass of a bin (fraction of all shots).
    pub fn density(&self, bin: usize) -> f64 {
        self.bins[bin].shots as f64 / self.total_shots as f64
    }

    /// Conditional weak error rate of a bin; `None` flags an empty bin.
    pub fn p_weak_error(&self, bin: usize) -> Option<f64> {
        let b = &self.bins[bin];
        (b.shots > 0).then(|| b.weak_errors as f64 / b.shots as f64)
    }

    /// Conditional strong error rate of a bin where strong was evaluated.
    pub fn p_strong_error(&self, bin: usize) -> Option<f64> {
        let b = &self.bins[bin];
        (b.strong_evaluated > 0).then(|| b.strong_errors as f64 / b.strong_evaluated as f64)
    }

    /// Overall weak logical error rate.
    pub fn weak_error_rate(&self) -> f64 {
        let errs: u64 = self.bins.iter().map(|b| b.weak_errors).sum();
        errs as f64 / self.total_shots.max(1) as f64
    }

    /// Largest nonempty bin index.
    pub fn max_bin(&self) -> Option<usize> {
        self.bins.iter().rposition(|b| b.shots > 0)
    }
}

/// Thresholded logical error rate: weak-error mass of shots at or above the
/// threshold, normalized by all shots (matching the integral against p(g)).
///
/// A bin counts as above threshold when its lower edge is; thresholds on the
/// bin grid are exact.
pub fn thresholded_error_rate(spectrum: &GapSpectrum, g_th_db: f64) -> f64 {
    if spectrum.total_shots == 0 {
        return 0.0;
    }
    let errs: u64 = spectrum
        .bins
        .iter()
        .enumerate()
        .filter(|(i, _)| *i as f64 * spectrum.bin_width_db >= g_th_db)
        .map(|(_, b)| b.weak_errors)
        .sum();
    errs as f64 / spectrum.total_shots as f64
}

/// Switching rate: fraction of shots whose soft output falls below the
/// threshold (per decoding window, i.e. per shot).
pub fn switching_rate(spectrum: &GapSpectrum, g_th_db: f64) -> f64 {
    if spectrum.total_shots == 0 {
        return 0.0;
    }
    let below: u64 = spectrum
        .bins
        .iter()
        .enumerate()
        .filter(|(i, _)| (*i as f64) * spectrum.bin_width_db < g_th_db)
        .map(|(_, b)| b.shots)
        .sum();
    below as f64 / spectrum.total_shots as f64
}

/// Smallest grid threshold satisfying the epsilon rule
/// `P_L,th(g_th) <= epsilon * P_L_strong`.
///
/// Scans the bin grid up to the largest observed soft output; failing even
/// there means the weak tail is too errorful at this sample size.
pub fn select_threshold(
    spectrum: &GapSpectrum,
    p_l_strong: f64,
    epsilon: f64,
) -> Result<f64, SwitchingError> {
    if p_l_strong <= 0.0 || !p_l_strong.is_finite() {
        return Err(SwitchingError::BadStrongTarget);
    }
    if epsilon <= 0.0 {
        return Err(SwitchingError::BadPolicy);
    }
    let target = epsilon * p_l_strong;
    let max_bin = match spectrum.max_bin() {
        Some(b) => b,
        None => return Ok(0.0),
    };
    for k in 0..=max_bin {
        let g = k as f64 * spectrum.bin_width_db;
        if thresholded_error_rate(spectrum, g) <= target {
            return Ok(g);
        }
    }
    Err(SwitchingError::ThresholdUnreachable)
}

/// Empirical logical error rate under switching: strong errors below the
/// threshold plus weak errors at or above it, over all shots.
pub fn switched_error_rate(shots: &[RecordedShot], g_th_db: f64) -> Result<f64, SwitchingError> {
    let mut errors = 0u64;
    for (i, shot) in shots.iter().enumerate() {
        let err = if shot.gap_db < g_th_db {
            shot.strong_error.ok_or(SwitchingError::MissingStrongEvaluation(i))?
        } else {
            shot.weak_error
        };
        errors += err as u64;
    }
    Ok(errors as f64 / shots.len().max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{CodeModel, NoiseParams, SurfaceCodeSpec};
    use rand::Rng;

    fn decoder_setup(p: f64) -> (CodeModel, TannerGraph) {
        let model = CodeModel::new(
            SurfaceCodeSpec::memory(3, Basis::Z).unwrap(),
            NoiseParams::new(p).unwrap(),
        )
        .unwrap();
        let tanner = TannerGraph::from_check_matrix(&model.checks);
        (model, tanner)
    }

    #[test]
    fn switch_decision_law_is_strict() {
        let (model, tanner) = decoder_setup(0.06);
        for g_th in [0.0, 5.0, 12.0, f64::INFINITY] {
            let policy = SwitchPolicy {
                soft_output: WeakKind::MwpmComplementary,
                g_th_db: g_th,
                parallel_launch: false,
                epsilon: 0.1,
            };
            let decoder = HybridDecoder::new(&model, &tanner, BpParams::default(), policy);
            for seed in 0..40 {
                let (_, ev) = model.sample_shot(seed);
                let out = decoder.decode_with_switching(&ev, StrongEvalMode::Lazy);
                assert_eq!(out.used == DecoderUsed::Strong, out.gap_db < g_th);
                match out.used {
                    DecoderUsed::Weak => {
                        assert_eq!(out.final_flip, out.weak_flip);
                        assert!(out.strong_flip.is_none());
                    }
                    DecoderUsed::Strong => {
                        assert_eq!(Some(out.final_flip), out.strong_flip);
                    }
                }
                if g_th == 0.0 {
                    assert_eq!(out.used, DecoderUsed::Weak, "empty switch interval");
                }
                if g_th.is_infinite() {
                    assert_eq!(out.used, DecoderUsed::Strong, "always-switch sentinel");
                }
            }
        }
    }

    #[test]
    fn tie_at_threshold_keeps_the_weak_result() {
        // Empty syndrome at uniform p gives an exactly known gap; a threshold
        // equal to it must not switch (strict inequality).
        let (mut model, tanner) = decoder_setup(0.1);
        model.graph_x = model.graph_x.with_uniform_probability(0.1);
        model.graph_z = model.graph_z.with_uniform_probability(0.1);
        let ev = model.checks.apply(&vec![false; model.checks.mechanisms.len()]);
        let g_empty = crate::weak::DB_PER_NAT * 3.0 * 9.0f64.ln();
        let policy = SwitchPolicy {
            soft_output: WeakKind::MwpmComplementary,
            g_th_db: g_empty,
            parallel_launch: false,
            epsilon: 0.1,
        };
        let decoder = HybridDecoder::new(&model, &tanner, BpParams::default(), policy);
        let out = decoder.decode_with_switching(&ev, StrongEvalMode::Lazy);
        assert!((out.gap_db - g_empty).abs() < 1e-9);
        assert_eq!(out.used, DecoderUsed::Weak);
    }

    #[test]
    fn forced_strong_never_changes_the_outcome() {
        let (model, tanner) = decoder_setup(0.06);
        let policy = SwitchPolicy::new(WeakKind::UfCluster, 8.0, 0.1).unwrap();
        let decoder = HybridDecoder::new(&model, &tanner, BpParams::default(), policy);
        for seed in 0..30 {
            let (_, ev) = model.sample_shot(seed);
            let lazy = decoder.decode_with_switching(&ev, StrongEvalMode::Lazy);
            let forced = decoder.decode_with_switching(&ev, StrongEvalMode::Forced);
            assert_eq!(lazy.final_flip, forced.final_flip);
            assert_eq!(lazy.used, forced.used);
            assert!(forced.strong_flip.is_some());
        }
    }

    #[test]
    fn spectrum_bins_and_empty_flags() {
        let shots =
            vec![RecordedShot { gap_db: 3.2, weak_error: false, strong_error: None }];
        let s = estimate_spectrum(&shots, 1.0);
        assert_eq!(s.bins.len(), 4);
        assert_eq!(s.bins[3].shots, 1, "g = 3.2 dB lands in [3, 4)");
        assert_eq!(s.p_weak_error(3), Some(0.0));
        assert_eq!(s.p_weak_error(0), None, "empty bins are flagged, not zero");
        assert_eq!(s.p_strong_error(3), None);
    }

    #[test]
    fn all_error_free_shots_give_zero_rates() {
        let shots: Vec<RecordedShot> = (0..100)
            .map(|i| RecordedShot {
                gap_db: (i % 17) as f64 * 0.9,
                weak_error: false,
                strong_error: Some(false),
            })
            .collect();
        let s = estimate_spectrum(&shots, 1.0);
        for bin in 0..s.bins.len() {
            if s.bins[bin].shots > 0 {
                assert_eq!(s.p_weak_error(bin), Some(0.0));
            }
        }
        assert_eq!(s.weak_error_rate(), 0.0);
    }

    #[test]
    fn generator_recovery_round_trip() {
        // Synthetic stream with known per-bin Bernoulli error rates; the
        // estimator must recover them within 3-sigma binomial bounds.
        let mut rng = crate::rng::stream_rng(11, 0);
        let rates = [0.5, 0.25, 0.1, 0.02];
        let per_bin = 4000u64;
        let mut shots = Vec::new();
        for (bin, &rate) in rates.iter().enumerate() {
            for _ in 0..per_bin {
                shots.push(RecordedShot {
                    gap_db: bin as f64 + 0.5,
                    weak_error: rng.gen::<f64>() < rate,
                    strong_error: None,
                });
            }
        }
        let s = estimate_spectrum(&shots, 1.0);
        for (bin, &rate) in rates.iter().enumerate() {
            let est = s.p_weak_error(bin).unwrap();
            let sigma = (rate * (1.0 - rate) / per_bin as f64).sqrt();
            assert!(
                (est - rate).abs() <= 3.0 * sigma,
                "bin {bin}: {est} vs {rate} +- {sigma}"
            );
        }
    }

    fn two_bin_spectrum() -> GapSpectrum {
        // Bin [0,1): 900 shots, 0 errors; bin [8,9): 100 shots, 10 errors.
        let mut shots = Vec::new();
        for _ in 0..900 {
            shots.push(RecordedShot { gap_db: 0.4, weak_error: false, strong_error: Some(false) });
        }
        for i in 0..100 {
            shots.push(RecordedShot {
                gap_db: 8.5,
                weak_error: i < 10,
                strong_error: Some(false),
            });
        }
        estimate_spectrum(&shots, 1.0)
    }

    #[test]
    fn thresholded_rate_hand_sums() {
        let s = two_bin_spectrum();
        assert_eq!(thresholded_error_rate(&s, 0.0), 10.0 / 1000.0, "full integral");
        assert_eq!(thresholded_error_rate(&s, 4.0), 10.0 / 1000.0, "between bins");
        assert_eq!(thresholded_error_rate(&s, 100.0), 0.0, "empty tail");
    }

    #[test]
    fn switching_rate_hand_sums() {
        let s = two_bin_spectrum();
        assert_eq!(switching_rate(&s, 0.0), 0.0);
        assert_eq!(switching_rate(&s, 4.0), 0.9);
        assert_eq!(switching_rate(&s, 100.0), 1.0);
    }

    #[test]
    fn select_threshold_scans_the_grid() {
        let s = two_bin_spectrum();
        // Generous target: satisfied immediately at zero (never-switch).
        assert_eq!(select_threshold(&s, 1.0, 0.1).unwrap(), 0.0);
        // All errors sit in the top observed bin, so a tighter target can
        // never be met within the observed range: the weak tail is too
        // errorful at this sample size.
        assert_eq!(
            select_threshold(&s, 0.02, 0.1),
            Err(SwitchingError::ThresholdUnreachable)
        );
        assert_eq!(select_threshold(&s, -1.0, 0.1), Err(SwitchingError::BadStrongTarget));

        // With errors spread below clean tail bins the scan lands just past
        // the last errorful bin.
        let mut shots = Vec::new();
        for bin in 0..20 {
            for i in 0..100 {
                shots.push(RecordedShot {
                    gap_db: bin as f64 + 0.5,
                    weak_error: bin < 17 && i < 5,
                    strong_error: None,
                });
            }
        }
        let spread = estimate_spectrum(&shots, 1.0);
        assert_eq!(select_threshold(&spread, 0.01, 0.1).unwrap(), 17.0);
    }

    #[test]
    fn select_threshold_monotone_in_epsilon() {
        // Synthetic monotone spectrum: errors thin out as g grows.
        let mut shots = Vec::new();
        let mut rng = crate::rng::stream_rng(3, 1);
        for bin in 0..30 {
            let rate = 0.5 / (1.0 + bin as f64);
            for _ in 0..500 {
                shots.push(RecordedShot {
                    gap_db: bin as f64 + 0.5,
                    weak_error: rng.gen::<f64>() < rate,
                    strong_error: None,
                });
            }
        }
        let s = estimate_spectrum(&shots, 1.0);
        let loose = select_threshold(&s, 0.05, 0.2).unwrap();
        let tight = select_threshold(&s, 0.05, 0.1).unwrap();
        assert!(tight >= loose, "halving epsilon cannot lower the threshold");
        // Linear-scan oracle agreement.
        let target = 0.1 * 0.05;
        let mut expected = None;
        for k in 0..=s.max_bin().unwrap() {
            if thresholded_error_rate(&s, k as f64) <= target {
                expected = Some(k as f64);
                break;
            }
        }
        assert_eq!(Some(tight), expected);
    }

    #[test]
    fn switched_rate_identities() {
        let s = two_bin_spectrum();
        let shots: Vec<RecordedShot> = {
            let mut v = Vec::new();
            for _ in 0..900 {
                v.push(RecordedShot { gap_db: 0.4, weak_error: false, strong_error: Some(false) });
            }
            for i in 0..100 {
                v.push(RecordedShot { gap_db: 8.5, weak_error: i < 10, strong_error: Some(false) });
            }
            v
        };
        // g_th = 0: equals the weak error rate.
        assert_eq!(switched_error_rate(&shots, 0.0).unwrap(), s.weak_error_rate());
        // Perfect strong stub: switched rate equals the thresholded rate.
        for g_th in [0.0, 2.0, 5.0, 9.0, 20.0] {
            assert_eq!(
                switched_error_rate(&shots, g_th).unwrap(),
                thresholded_error_rate(&s, g_th),
                "g_th = {g_th}"
            );
        }
        // Hand sum with an imperfect strong decoder.
        let mixed = vec![
            RecordedShot { gap_db: 0.5, weak_error: false, strong_error: Some(true) },
            RecordedShot { gap_db: 0.5, weak_error: true, strong_error: Some(false) },
            RecordedShot { gap_db: 7.5, weak_error: true, strong_error: None },
            RecordedShot { gap_db: 7.5, weak_error: false, strong_error: None },
        ];
        assert_eq!(switched_error_rate(&mixed, 5.0).unwrap(), 2.0 / 4.0);
        // Missing strong evaluation below threshold is an error.
        let broken =
            vec![RecordedShot { gap_db: 0.5, weak_error: false, strong_error: None }];
        assert_eq!(
            switched_error_rate(&broken, 5.0),
            Err(SwitchingError::MissingStrongEvaluation(0))
        );
    }

    #[test]
    fn partition_identity_and_monotonicity_hold_exactly() {
        // Property test over random shot sets: for any g_th, the weak error
        // rate partitions exactly into below-threshold weak errors plus the
        // thresholded rate, and both monotonicities hold over counts.
        for trial in 0..50 {
            let mut rng = crate::rng::stream_rng(77, trial);
            let n = 1 + (rng.gen::<u64>() % 400) as usize;
            let shots: Vec<RecordedShot> = (0..n)
                .map(|_| RecordedShot {
                    gap_db: rng.gen::<f64>() * 40.0,
                    weak_error: rng.gen::<f64>() < 0.3,
                    strong_error: Some(rng.gen::<f64>() < 0.1),
                })
                .collect();
            let s = estimate_spectrum(&shots, 1.0);
            let weak_pl = s.weak_error_rate();
            let mut prev_switch = -1.0;
            let mut prev_thresh = f64::INFINITY;
            for k in 0..50 {
                let g_th = k as f64 * 0.9; // off-grid thresholds included
                let below_errors: u64 = s
                    .bins
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (*i as f64) * s.bin_width_db < g_th)
                    .map(|(_, b)| b.weak_errors)
                    .sum();
                let tail_errors =
                    (thresholded_error_rate(&s, g_th) * s.total_shots as f64).round() as u64;
                let all_errors = (weak_pl * s.total_shots as f64).round() as u64;
                assert_eq!(below_errors + tail_errors, all_errors, "exact count partition");
                let sw = switching_rate(&s, g_th);
                let th = thresholded_error_rate(&s, g_th);
                assert!(sw >= prev_switch);
                assert!(th <= prev_thresh);
                prev_switch = sw;
                prev_thresh = th;
            }
        }
    }

    #[test]
    fn spectrum_merge_is_commutative() {
        let shots: Vec<RecordedShot> = (0..40)
            .map(|i| RecordedShot {
                gap_db: (i % 7) as f64,
                weak_error: i % 3 == 0,
                strong_error: (i % 2 == 0).then_some(i % 6 == 0),
            })
            .collect();
        let (a, b) = shots.split_at(17);
        let mut ab = estimate_spectrum(a, 1.0);
        ab.merge(&estimate_spectrum(b, 1.0));
        let mut ba = estimate_spectrum(b, 1.0);
        ba.merge(&estimate_spectrum(a, 1.0));
        assert_eq!(ab, ba);
        assert_eq!(ab, estimate_spectrum(&shots, 1.0));
    }
}
