#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace truecase {

// A beam entry over binary labels. State is whatever the step function needs
// to carry (recurrent state for the decoders, nothing for table-driven tests).
template <typename State>
struct Hypothesis {
  std::vector<int> labels;
  double log_prob = 0.0;
  State state;
};

// Standard beam search over {0, 1} labels without length normalization.
//
// step(const Hypothesis<State>&) -> std::pair<std::array<double, 2>, State>
// returns the log-probabilities of labels 0 and 1 at the next position plus
// the successor state (shared by both children). Candidates are ranked by
// accumulated log-probability with a stable sort over generation order, so
// ties resolve to the older parent, then to label 0.
template <typename State, typename StepFn>
std::vector<Hypothesis<State>> beam_search(State initial, size_t steps, size_t beam,
                                           StepFn&& step) {
  if (beam == 0) throw std::invalid_argument("beam must be >= 1");
  std::vector<Hypothesis<State>> current;
  current.push_back(Hypothesis<State>{{}, 0.0, std::move(initial)});
  for (size_t t = 0; t < steps; ++t) {
    std::vector<Hypothesis<State>> next;
    next.reserve(current.size() * 2);
    for (auto& hyp : current) {
      auto [log_probs, successor] = step(static_cast<const Hypothesis<State>&>(hyp));
      for (int label = 0; label < 2; ++label) {
        Hypothesis<State> child;
        child.labels = hyp.labels;
        child.labels.push_back(label);
        child.log_prob = hyp.log_prob + log_probs[label];
        if (label == 0) {
          child.state = successor;
        } else {
          child.state = std::move(successor);
        }
        next.push_back(std::move(child));
      }
    }
    std::stable_sort(next.begin(), next.end(), [](const auto& a, const auto& b) {
      return a.log_prob > b.log_prob;
    });
    if (next.size() > beam) next.resize(beam);
    current = std::move(next);
  }
  return current;
}

struct NoState {};

}  // namespace truecase
