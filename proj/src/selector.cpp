#include "adaptgen/selector.hpp"

#include "adaptgen/rng.hpp"

namespace adaptgen {

std::vector<std::string> sample_negatives(const std::vector<std::string>& candidates,
                                          const std::string& reference, int k,
                                          std::uint64_t seed) {
  if (candidates.empty()) throw std::runtime_error("sample_negatives: empty candidate list");
  if (k < 1) throw std::runtime_error("sample_negatives: k must be >= 1");

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i] != reference) eligible.push_back(i);
  }
  if (eligible.empty()) {
    throw std::runtime_error("sample_negatives: every candidate equals the reference");
  }

  DeterministicRng rng(seed);
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(k));
  if (eligible.size() >= static_cast<std::size_t>(k)) {
    rng.shuffle(eligible);
    for (int i = 0; i < k; ++i) out.push_back(candidates[eligible[static_cast<std::size_t>(i)]]);
  } else {
    for (int i = 0; i < k; ++i) out.push_back(candidates[eligible[rng.below(eligible.size())]]);
  }
  return out;
}

}  // namespace adaptgen
