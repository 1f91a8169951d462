#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "ipc/corpus.hpp"

namespace ipc {

EmbeddingTable pretrain_embeddings(const std::vector<Proposal>& proposals, const Vocab& vocab,
                                   std::size_t width, Rng& rng, std::size_t max_tokens) {
  EmbeddingTable table = random_embeddings(vocab, width, 1.0, rng);

  std::vector<std::size_t> freq(vocab.size(), 0);
  for (const auto& p : proposals) {
    for (const auto& d : p.documents) {
      for (const auto& t : d.tokens) {
        ++freq[vocab.index(t)];
      }
    }
  }
  freq[Vocab::kPad] = 0;
  freq[Vocab::kUnk] = 0;
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    if (freq[r] > 0) {
      rows.push_back(r);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return freq[a] > freq[b]; });
  if (rows.size() > max_tokens) {
    rows.resize(max_tokens);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n <= static_cast<Eigen::Index>(width)) {
    return table;
  }
  std::unordered_map<std::size_t, Eigen::Index> slot;
  for (Eigen::Index i = 0; i < n; ++i) {
    slot.emplace(rows[static_cast<std::size_t>(i)], i);
  }

  // Co-occurrence within a proposal, weighted by the product of counts.
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  for (const auto& p : proposals) {
    std::unordered_map<Eigen::Index, double> bag;
    for (const auto& d : p.documents) {
      for (const auto& t : d.tokens) {
        if (auto it = slot.find(vocab.index(t)); it != slot.end()) {
          bag[it->second] += 1.0;
        }
      }
    }
    for (const auto& [i, ci] : bag) {
      for (const auto& [j, cj] : bag) {
        if (i != j) {
          counts(i, j) += ci * cj;
        }
      }
    }
  }
  const Eigen::VectorXd marginal = counts.rowwise().sum();
  const double total = marginal.sum();
  if (total <= 0.0) {
    return table;
  }
  Eigen::MatrixXd ppmi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (counts(i, j) > 0.0) {
        ppmi(i, j) = std::max(0.0, std::log(counts(i, j) * total / (marginal(i) * marginal(j))));
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(ppmi);
  const Eigen::VectorXd& values = solver.eigenvalues();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(values(a)) > std::abs(values(b)); });
  Eigen::MatrixXd vectors(n, static_cast<Eigen::Index>(width));
  for (std::size_t c = 0; c < width; ++c) {
    const Eigen::Index e = order[c];
    Eigen::VectorXd v = solver.eigenvectors().col(e) * std::sqrt(std::abs(values(e)));
    // Fix the sign so the largest-magnitude entry is positive.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    vectors.col(static_cast<Eigen::Index>(c)) = v(arg) < 0.0 ? Eigen::VectorXd(-v) : v;
  }
  const double mean_norm = vectors.rowwise().norm().mean();
  if (mean_norm > 0.0) {
    vectors *= std::sqrt(static_cast<double>(width)) / mean_norm;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t r = rows[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < width; ++c) {
      table.values[r * width + c] = static_cast<float>(vectors(i, static_cast<Eigen::Index>(c)));
    }
  }
  table.covered = rows.size();
  return table;
}

}  // namespace ipc
