#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "ipc/model.hpp"
#include "ipc/graph.hpp"
#include "ipc/optim.hpp"

namespace ipc {

struct StepRecord {
  std::uint64_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

/// Teacher-forced training: each step averages the summed level losses over
/// the batch and applies one Adam update.
class Trainer {
 public:
  Trainer(Model<float>& model, const TrainConfig& config);

  /// Mean total loss of the batch before the update. Throws NumericError,
  /// naming the step and the proposals, on a non-finite loss or gradient.
  double train_step(std::span<const EncodedProposal* const> batch);

  /// Shuffles with the training seed and runs one pass in batches.
  std::vector<StepRecord> train_epoch(std::span<const EncodedProposal> data);

  /// Runs `epochs` passes. `on_epoch` sees the 1-based epoch and its records.
  std::vector<StepRecord> fit(std::span<const EncodedProposal> data, std::size_t epochs,
                              const std::function<void(std::size_t, std::span<const StepRecord>)>&
                                  on_epoch = {});

  std::uint64_t steps() const { return optimizer_.steps(); }
  const std::vector<StepRecord>& history() const { return history_; }

 private:
  Model<float>* model_;
  TrainConfig config_;
  Adam<float> optimizer_;
  WarmupSchedule schedule_;
  Rng shuffle_rng_;
  std::vector<StepRecord> history_;
};

/// "step,loss,lr" rows.
void write_loss_csv(std::ostream& out, std::span<const StepRecord> records);

}  // namespace ipc
