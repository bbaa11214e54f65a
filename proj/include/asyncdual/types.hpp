#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace asyncdual {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using AgentId = int;
/// Global event counter k: bumped whenever one or more agents complete an update.
using Counter = std::int64_t;
/// Simulated time unit of the discrete-event engine.
using Tick = std::int64_t;

/// Per-agent blocks of a stacked vector. The tag keeps primal and dual points apart.
template <class Tag>
struct BlockVector {
  std::vector<Vector> blocks;

  BlockVector() = default;
  explicit BlockVector(std::vector<Vector> b) : blocks(std::move(b)) {}

  std::size_t size() const { return blocks.size(); }
  Vector& operator[](std::size_t i) { return blocks[i]; }
  const Vector& operator[](std::size_t i) const { return blocks[i]; }

  Eigen::Index total_dim() const {
    Eigen::Index n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
  }

  Vector stacked() const {
    Vector out(total_dim());
    Eigen::Index at = 0;
    for (const auto& b : blocks) {
      out.segment(at, b.size()) = b;
      at += b.size();
    }
    return out;
  }

  static BlockVector split(const Vector& v, const std::vector<int>& dims) {
    BlockVector out;
    out.blocks.reserve(dims.size());
    Eigen::Index at = 0;
    for (int d : dims) {
      out.blocks.emplace_back(v.segment(at, d));
      at += d;
    }
    return out;
  }
};

using PrimalPoint = BlockVector<struct PrimalTag>;
using DualPoint = BlockVector<struct DualTag>;

}  // namespace asyncdual
