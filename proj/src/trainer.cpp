#include "ipc/trainer.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

namespace ipc {

Trainer::Trainer(Model<float>& model, const TrainConfig& config)
    : model_(&model),
      config_(config),
      optimizer_(model.params(), AdamOptions{config.lr, 0.9, 0.999, 1e-8, config.weight_decay}),
      schedule_(config.lr, config.warmup),
      shuffle_rng_(config.seed + 1) {}

double Trainer::train_step(std::span<const EncodedProposal* const> batch) {
  if (batch.empty()) {
    throw ContractError("empty training batch");
  }
  const std::size_t before = model_->predicted_history_uses();
  model_->params().zero_grad();
  const auto ctx = model_->context(true);
  std::vector<Tensor<float>> losses;
  losses.reserve(batch.size());
  for (const auto* p : batch) {
    losses.push_back(model_->teacher_forced_loss(*p, ctx));
  }
  auto total = scale(add_all<float>(losses), 1.0f / static_cast<float>(batch.size()));
  const double loss = total.item();
  auto describe = [&] {
    std::string ids;
    for (std::size_t i = 0; i < batch.size() && i < 8; ++i) {
      ids += (i ? ", " : "") + batch[i]->id;
    }
    return "step " + std::to_string(optimizer_.steps() + 1) + " (batch " + ids +
           (batch.size() > 8 ? ", ..." : "") + ")";
  };
  if (!std::isfinite(loss)) {
    throw NumericError("non-finite loss at " + describe());
  }
  total.backward();
  model_->mask_pad_gradient();
  const double lr = schedule_.at(optimizer_.steps() + 1);
  try {
    optimizer_.step(lr);
  } catch (const NumericError& e) {
    throw NumericError(std::string(e.what()) + " at " + describe());
  }
  if (model_->predicted_history_uses() != before) {
    throw ContractError("training consumed model predictions");
  }
  history_.push_back({optimizer_.steps(), loss, lr});
  return loss;
}

std::vector<StepRecord> Trainer::train_epoch(std::span<const EncodedProposal> data) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle_rng_.shuffle(order.begin(), order.end());
  std::vector<StepRecord> records;
  std::vector<const EncodedProposal*> batch;
  for (std::size_t start = 0; start < order.size(); start += config_.batch) {
    batch.clear();
    for (std::size_t i = start; i < std::min(order.size(), start + config_.batch); ++i) {
      batch.push_back(&data[order[i]]);
    }
    train_step(batch);
    records.push_back(history_.back());
  }
  return records;
}

std::vector<StepRecord> Trainer::fit(
    std::span<const EncodedProposal> data, std::size_t epochs,
    const std::function<void(std::size_t, std::span<const StepRecord>)>& on_epoch) {
  std::vector<StepRecord> all;
  for (std::size_t e = 1; e <= epochs; ++e) {
    auto records = train_epoch(data);
    if (on_epoch) {
      on_epoch(e, records);
    }
    all.insert(all.end(), records.begin(), records.end());
  }
  return all;
}

void write_loss_csv(std::ostream& out, std::span<const StepRecord> records) {
  out << "step,loss,lr\n";
  for (const auto& r : records) {
    out << r.step << ',' << format_exact(r.loss) << ',' << format_exact(r.lr) << '\n';
  }
}

}  // namespace ipc
