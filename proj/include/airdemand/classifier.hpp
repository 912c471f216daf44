#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>

#include "airdemand/matrix.hpp"

namespace airdemand {

constexpr int kNumClasses = 3;  // low, moderate, high

using Proba = std::array<double, kNumClasses>;

// Argmax with ties broken toward the lowest class index.
inline int argmax_class(const Proba& p) {
  int best = 0;
  for (int c = 1; c < kNumClasses; ++c)
    if (p[c] > p[best]) best = c;
  return best;
}

// Uniform view over the four fitted learners, used by evaluation and
// importance. Rows must have the width the model was fitted on.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual Proba predict_proba(const double* row) const = 0;
  virtual std::size_t n_features() const = 0;
  virtual std::string kind() const = 0;  // "lr", "ann", "rf", "gb"
  virtual std::string serialize() const = 0;

  int predict(const double* row) const { return argmax_class(predict_proba(row)); }
};

// Dispatches on the serialized "kind" field.
std::unique_ptr<Classifier> classifier_from_json(const std::string& text);
std::unique_ptr<Classifier> load_classifier(const std::string& path);
void save_classifier(const Classifier& model, const std::string& path);

}  // namespace airdemand
