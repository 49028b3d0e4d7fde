// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slp/constellation.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace slp {

// K x N complex gains, row k is h_k.
struct ComplexChannel {
  Eigen::MatrixXcd rows;

  std::size_t users() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t antennas() const { return static_cast<std::size_t>(rows.cols()); }
};

// Real 2 x 2N lifting of one channel row, acting on u~ = [Re u; Im u] and
// producing [Re(h u); Im(h u)].
struct RealChannel {
  Eigen::Matrix<double, 2, Eigen::Dynamic> H;

  std::size_t antennas() const { return static_cast<std::size_t>(H.cols() / 2); }
  Vec2 apply(const Eigen::VectorXd& u_tilde) const;
};

RealChannel realify(const Eigen::RowVectorXcd& h);
std::vector<RealChannel> realify(const ComplexChannel& channel);

Eigen::VectorXd stack_real(const Eigen::VectorXcd& u);
Eigen::VectorXcd unstack_real(const Eigen::VectorXd& u_tilde);

// i.i.d. CN(0, 1) entries: real and imaginary parts each N(0, 1/2).
ComplexChannel sample_channel(std::size_t users, std::size_t antennas, std::uint64_t seed);
ComplexChannel sample_channel(std::size_t users, std::size_t antennas, std::mt19937_64& rng);

// ||H u~||^2. Throws DomainError on a dimension mismatch.
double received_power(const RealChannel& channel, const Eigen::VectorXd& u_tilde);

// 10 log10(power / sigma^2); -inf for zero power.
double sinr_db(double power, double sigma);

class NoiseModel {
 public:
  explicit NoiseModel(double sigma);
  double sigma() const { return sigma_; }

 private:
  double sigma_;
};

// Per-user constellation indices (0-based).
class SymbolAssignment {
 public:
  SymbolAssignment() = default;
  explicit SymbolAssignment(std::vector<std::size_t> indices) : indices_(std::move(indices)) {}

  std::size_t users() const { return indices_.size(); }
  std::size_t operator[](std::size_t k) const { return indices_.at(k); }
  const std::vector<std::size_t>& indices() const { return indices_; }

  // Users whose symbol lies on bd(conv); recomputed on each call.
  std::vector<std::size_t> boundary_users(const Constellation& c) const;

 private:
  std::vector<std::size_t> indices_;
};

SymbolAssignment sample_symbols(std::size_t users, std::size_t order, std::mt19937_64& rng);

}  // namespace slp
