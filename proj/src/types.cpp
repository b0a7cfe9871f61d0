#include "patternmark/types.hpp"

#include <numeric>

#include "patternmark/errors.hpp"

namespace patternmark {

void GenerationOrder::validate() const {
  if (visits.size() < length) {
    throw ConfigError("generation order: fewer visits than positions");
  }
  std::vector<bool> seen(length, false);
  for (std::size_t p : visits) {
    if (p >= length) {
      throw ConfigError("generation order: visit out of range");
    }
    seen[p] = true;
  }
  for (std::size_t p = 0; p < length; ++p) {
    if (!seen[p]) {
      throw ConfigError("generation order: position never visited");
    }
  }
}

GenerationOrder identity_order(std::size_t n) {
  GenerationOrder order;
  order.length = n;
  order.visits.resize(n);
  std::iota(order.visits.begin(), order.visits.end(), std::size_t{0});
  return order;
}

}  // namespace patternmark
