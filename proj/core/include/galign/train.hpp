#pragma once

#include "galign/config.hpp"
#include "galign/losses.hpp"
#include "galign/metrics.hpp"
#include "galign/synth.hpp"

namespace galign {

struct StepLog {
  int step = 0;
  LossReport losses;
};

struct TrainResult {
  NamedParams params;
  std::vector<StepLog> steps;
};

/// Two-domain training loop. One optimizer step consumes batch_size
/// (source block, target block) pairs; an epoch is one shuffled pass over the
/// source blocks with target blocks cycled. Target labels are stripped before
/// any training path sees them. stage pseudo_label requires init_params from
/// a prior adapt run; it first labels every target block with the frozen
/// model, then trains with source plus masked target cross-entropy.
/// Deterministic for a fixed config.
TrainResult train(const RunConfig& cfg, const std::vector<LabeledCloud>& source,
                  const std::vector<LabeledCloud>& target,
                  const NamedParams* init_params = nullptr);

/// Per-step CSV: step,seg,loc,con,total,matched,skipped
void write_loss_csv(const std::string& path, const std::vector<StepLog>& steps);

}  // namespace galign
