//! Monte Carlo campaigns spread over the rayon pool.

use rayon::prelude::*;

use sensing_tradeoff_core::montecarlo::{
    batch_ranges, summarize, tally_frames, CampaignSummary, CampaignTally, FrameModel, SimConfig,
};
use sensing_tradeoff_core::{Error, Result};

/// Same result as the serial core campaign, bit for bit: batches are fixed
/// frame ranges, each tallied in order, and merged in batch order.
pub fn run_campaign_parallel(model: &FrameModel, sim: &SimConfig) -> Result<CampaignSummary> {
    if sim.n_frames == 0 {
        return Err(Error::Domain {
            name: "n_frames",
            value: 0.0,
            expected: "n_frames >= 1",
        });
    }
    let batches: Vec<CampaignTally> = batch_ranges(sim.n_frames)
        .into_par_iter()
        .map(|r| tally_frames(model, sim, r))
        .collect();
    Ok(summarize(&batches))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sensing_tradeoff_core::montecarlo::{run_campaign, Fidelity};
    use sensing_tradeoff_core::traffic::{FrameGeometry, TrafficParams};

    #[test]
    fn parallel_equals_serial() {
        let model = FrameModel {
            params: TrafficParams::new(0.02, 0.02, 2, 0.316).unwrap(),
            geometry: FrameGeometry::new(1e-4, 40, 300).unwrap(),
            threshold: 45.0,
            gamma_s: 10.0,
        };
        for fidelity in [Fidelity::StatisticLevel, Fidelity::SampleLevel] {
            let sim = SimConfig::new(3_001, 9, fidelity).unwrap();
            let a = run_campaign(&model, &sim).unwrap();
            let b = run_campaign_parallel(&model, &sim).unwrap();
            assert_eq!(format!("{a:?}"), format!("{b:?}"));
        }
    }
}
