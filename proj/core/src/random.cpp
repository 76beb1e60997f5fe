#include "lrmr/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "lrmr/errors.hpp"

namespace lrmr {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<std::uint64_t> Rng::sample_without_replacement(std::uint64_t population,
                                                           std::uint64_t count) {
  if (count > population) {
    throw InvalidArgument("sample size exceeds population");
  }
  // Sparse partial Fisher-Yates: only displaced slots are stored.
  std::unordered_map<std::uint64_t, std::uint64_t> displaced;
  std::vector<std::uint64_t> picked;
  picked.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t j = i + below(population - i);
    const auto at = [&](std::uint64_t slot) {
      auto it = displaced.find(slot);
      return it == displaced.end() ? slot : it->second;
    };
    const std::uint64_t vj = at(j);
    const std::uint64_t vi = at(i);
    displaced[j] = vi;
    picked.push_back(vj);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace lrmr
