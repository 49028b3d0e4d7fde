// SPDX-License-Identifier: Apache-2.0
#include "slp/signal_model.hpp"

#include "slp/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace slp {

Vec2 RealChannel::apply(const Eigen::VectorXd& u_tilde) const {
  if (u_tilde.size() != H.cols())
    throw DomainError("transmit vector has " + std::to_string(u_tilde.size()) + " real entries, channel expects " +
                      std::to_string(H.cols()));
  return H * u_tilde;
}

RealChannel realify(const Eigen::RowVectorXcd& h) {
  if (!h.allFinite()) throw DomainError("channel entries must be finite");
  const Eigen::Index n = h.size();
  RealChannel out;
  out.H.resize(2, 2 * n);
  out.H.block(0, 0, 1, n) = h.real();
  out.H.block(0, n, 1, n) = -h.imag();
  out.H.block(1, 0, 1, n) = h.imag();
  out.H.block(1, n, 1, n) = h.real();
  return out;
}

std::vector<RealChannel> realify(const ComplexChannel& channel) {
  std::vector<RealChannel> out;
  out.reserve(channel.users());
  for (Eigen::Index k = 0; k < channel.rows.rows(); ++k) out.push_back(realify(channel.rows.row(k)));
  return out;
}

Eigen::VectorXd stack_real(const Eigen::VectorXcd& u) {
  Eigen::VectorXd out(2 * u.size());
  out << u.real(), u.imag();
  return out;
}

Eigen::VectorXcd unstack_real(const Eigen::VectorXd& u_tilde) {
  if (u_tilde.size() % 2 != 0) throw DomainError("stacked vector must have even length");
  const Eigen::Index n = u_tilde.size() / 2;
  Eigen::VectorXcd out(n);
  for (Eigen::Index k = 0; k < n; ++k) out(k) = {u_tilde(k), u_tilde(n + k)};
  return out;
}

ComplexChannel sample_channel(std::size_t users, std::size_t antennas, std::mt19937_64& rng) {
  if (users == 0 || antennas == 0) throw DomainError("channel needs at least one user and one antenna");
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  ComplexChannel out;
  out.rows.resize(static_cast<Eigen::Index>(users), static_cast<Eigen::Index>(antennas));
  for (Eigen::Index k = 0; k < out.rows.rows(); ++k)
    for (Eigen::Index n = 0; n < out.rows.cols(); ++n) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      out.rows(k, n) = {re, im};
    }
  return out;
}

ComplexChannel sample_channel(std::size_t users, std::size_t antennas, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_channel(users, antennas, rng);
}

double received_power(const RealChannel& channel, const Eigen::VectorXd& u_tilde) {
  return channel.apply(u_tilde).squaredNorm();
}

double sinr_db(double power, double sigma) {
  if (power <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(power / (sigma * sigma));
}

NoiseModel::NoiseModel(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("noise standard deviation must be positive");
}

std::vector<std::size_t> SymbolAssignment::boundary_users(const Constellation& c) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < indices_.size(); ++k)
    if (c.is_boundary(indices_[k])) out.push_back(k);
  return out;
}

SymbolAssignment sample_symbols(std::size_t users, std::size_t order, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, order - 1);
  std::vector<std::size_t> idx(users);
  for (auto& v : idx) v = pick(rng);
  return SymbolAssignment(std::move(idx));
}

}  // namespace slp
