#include "dwave/delayline.hpp"

#include <cmath>

#include "dwave/errors.hpp"

namespace dwave {

DelayLine build_delayline(int m_rho, double tau) {
  if (m_rho < 2) throw InputError("delay line needs m_rho >= 2");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InputError("tau must be positive");

  DelayLine dl;
  dl.m_rho = m_rho;
  dl.tau = tau;
  dl.rho_nodes = Vec::LinSpaced(m_rho + 1, 0.0, 1.0);
  dl.quadrature = Vec::Constant(m_rho + 1, 1.0 / m_rho);
  dl.quadrature[0] = 0.0;

  const double c = dl.rate();
  std::vector<Triplet> trip;
  trip.reserve(2 * static_cast<std::size_t>(m_rho));
  for (int j = 1; j <= m_rho; ++j) {
    trip.emplace_back(j - 1, j, -c);
    trip.emplace_back(j - 1, j - 1, c);
  }
  dl.transport.resize(m_rho, m_rho + 1);
  dl.transport.setFromTriplets(trip.begin(), trip.end());
  return dl;
}

RingBuffer::RingBuffer(double tau, double dt, Index width,
                       const std::function<Vec(double)>& history)
    : width_(width) {
  if (!(tau > 0.0) || !(dt > 0.0)) throw InputError("ring buffer needs tau > 0 and dt > 0");
  const double ratio = tau / dt;
  const double slots = std::round(ratio);
  if (slots < 1.0 || std::abs(ratio - slots) > 1e-9 * ratio) {
    throw InputError("ring buffer: dt must divide tau exactly");
  }
  capacity_ = static_cast<Index>(slots);
  slots_.resize(static_cast<std::size_t>(capacity_ * width_));
  for (Index k = 0; k < capacity_; ++k) {
    const Vec h = history(-tau + static_cast<double>(k) * dt);
    if (h.size() != width_) throw InputError("ring buffer: history trace has wrong width");
    std::copy(h.data(), h.data() + width_, slots_.begin() + k * width_);
  }
}

Vec RingBuffer::ring_step(std::span<const double> z_now) {
  if (static_cast<Index>(z_now.size()) != width_) throw InputError("ring buffer: trace width mismatch");
  const auto base = slots_.begin() + head_ * width_;
  Vec out = Eigen::Map<const Vec>(&*base, width_);
  std::copy(z_now.begin(), z_now.end(), base);
  head_ = (head_ + 1) % capacity_;
  return out;
}

Vec RingBuffer::peek_next(std::span<const double> z_now) const {
  if (capacity_ == 1) return Eigen::Map<const Vec>(z_now.data(), width_);
  const Index next = (head_ + 1) % capacity_;
  return Eigen::Map<const Vec>(slots_.data() + next * width_, width_);
}

}  // namespace dwave
