#include "airdemand/decision_tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "airdemand/csv.hpp"
#include "airdemand/errors.hpp"

namespace airdemand {

double entropy_bits(const std::array<double, kNumClasses>& class_weights) {
  double total = 0;
  for (const double w : class_weights) {
    if (w < 0) throw ArgumentError("entropy: negative class weight");
    total += w;
  }
  if (total <= 0) throw ArgumentError("entropy: all class weights zero");
  double h = 0;
  for (const double w : class_weights) {
    if (w <= 0) continue;
    const double p = w / total;
    h -= p * std::log2(p);
  }
  return h;
}

namespace {

struct Entry {
  double value;
  double weight;
  double target;  // regression only
  int cls;        // classification only
};

struct ClassTotals {
  std::array<double, kNumClasses> w{};
  double sum() const { return w[0] + w[1] + w[2]; }
};

struct SseTotals {
  double w = 0, s1 = 0, s2 = 0;  // weight, sum wy, sum wy^2

  double sse() const {
    if (w <= 0) return 0;
    const double v = s2 - s1 * s1 / w;
    return v > 0 ? v : 0;
  }
};

// Tie rule shared by every caller: higher gain, then lower feature index,
// then lower threshold, independent of candidate order.
void consider(std::optional<SplitChoice>& best, std::size_t feature,
              double threshold, double gain) {
  if (!std::isfinite(gain)) return;
  if (best && !(gain > best->gain ||
                (gain == best->gain &&
                 (feature < best->feature ||
                  (feature == best->feature && threshold < best->threshold)))))
    return;
  best = SplitChoice{feature, threshold, gain};
}

bool column_is_binary(const FeatureMatrix& m,
                      const std::vector<std::size_t>& rows, std::size_t f) {
  for (const std::size_t r : rows) {
    const double v = m.at(r, f);
    if (v != 0.0 && v != 1.0) return false;
  }
  return true;
}

std::optional<SplitChoice> search_splits(
    const FeatureMatrix& m, const std::vector<std::size_t>& rows,
    const std::vector<double>* weights, const std::vector<double>* targets,
    const std::vector<std::size_t>& features, double min_gain, double min_leaf,
    const std::vector<std::uint8_t>* binary_hint,
    std::vector<Entry>& scratch) {
  if (rows.size() < 2 || features.empty()) return std::nullopt;
  const auto weight_of = [&](std::size_t r) {
    return weights ? (*weights)[r] : 1.0;
  };

  ClassTotals parent_cls;
  SseTotals parent_sse;
  if (targets) {
    for (const std::size_t r : rows) {
      const double w = weight_of(r);
      const double y = (*targets)[r];
      parent_sse.w += w;
      parent_sse.s1 += w * y;
      parent_sse.s2 += w * y * y;
    }
  } else {
    for (const std::size_t r : rows) parent_cls.w[m.labels[r]] += weight_of(r);
  }
  const double total_w = targets ? parent_sse.w : parent_cls.sum();
  const double parent_score =
      targets ? parent_sse.sse() : entropy_bits(parent_cls.w);

  std::optional<SplitChoice> best;

  for (const std::size_t f : features) {
    const bool try_binary = binary_hint ? (*binary_hint)[f] != 0 : true;
    bool handled = false;
    if (try_binary) {
      // Single pass; bail out to the sorted path on a non-binary value.
      ClassTotals c0, c1;
      SseTotals s0, s1;
      bool binary = true;
      for (const std::size_t r : rows) {
        const double v = m.at(r, f);
        if (v == 0.0) {
          if (targets) {
            const double w = weight_of(r), y = (*targets)[r];
            s0.w += w;
            s0.s1 += w * y;
            s0.s2 += w * y * y;
          } else {
            c0.w[m.labels[r]] += weight_of(r);
          }
        } else if (v == 1.0) {
          if (targets) {
            const double w = weight_of(r), y = (*targets)[r];
            s1.w += w;
            s1.s1 += w * y;
            s1.s2 += w * y * y;
          } else {
            c1.w[m.labels[r]] += weight_of(r);
          }
        } else {
          binary = false;
          break;
        }
      }
      if (binary) {
        handled = true;
        const double wl = targets ? s0.w : c0.sum();
        const double wr = targets ? s1.w : c1.sum();
        if (wl >= min_leaf && wr >= min_leaf && wl > 0 && wr > 0) {
          double gain;
          if (targets) {
            gain = parent_score - s0.sse() - s1.sse();
          } else {
            gain = parent_score - (wl * entropy_bits(c0.w) +
                                   wr * entropy_bits(c1.w)) /
                                      total_w;
          }
          consider(best, f, split_midpoint(0.0, 1.0), gain);
        }
      }
    }
    if (handled) continue;

    scratch.clear();
    for (const std::size_t r : rows)
      scratch.push_back(Entry{m.at(r, f), weight_of(r),
                              targets ? (*targets)[r] : 0.0,
                              targets ? 0 : m.labels[r]});
    std::sort(scratch.begin(), scratch.end(),
              [](const Entry& a, const Entry& b) { return a.value < b.value; });

    ClassTotals left_cls;
    SseTotals left_sse;
    for (std::size_t i = 0; i < scratch.size(); ++i) {
      const Entry& e = scratch[i];
      if (i > 0 && e.value != scratch[i - 1].value) {
        const double thr = split_midpoint(scratch[i - 1].value, e.value);
        if (targets) {
          SseTotals right{parent_sse.w - left_sse.w,
                          parent_sse.s1 - left_sse.s1,
                          parent_sse.s2 - left_sse.s2};
          if (left_sse.w >= min_leaf && right.w >= min_leaf)
            consider(best, f, thr,
                     parent_score - left_sse.sse() - right.sse());
        } else {
          ClassTotals right;
          // Clamp the complement at zero: with continuous weights the
          // subtraction can leave a negative residue of a few ulps.
          for (int c = 0; c < kNumClasses; ++c)
            right.w[c] = std::max(0.0, parent_cls.w[c] - left_cls.w[c]);
          const double wl = left_cls.sum(), wr = right.sum();
          if (wl >= min_leaf && wr >= min_leaf && wl > 0 && wr > 0)
            consider(best, f, thr,
                     parent_score - (wl * entropy_bits(left_cls.w) +
                                     wr * entropy_bits(right.w)) /
                                        total_w);
        }
      }
      if (targets) {
        left_sse.w += e.weight;
        left_sse.s1 += e.weight * e.target;
        left_sse.s2 += e.weight * e.target * e.target;
      } else {
        left_cls.w[e.cls] += e.weight;
      }
    }
  }

  if (!best || best->gain < min_gain) return std::nullopt;
  return best;
}

}  // namespace

std::optional<SplitChoice> best_split(const FeatureMatrix& m,
                                      const std::vector<std::size_t>& rows,
                                      const std::vector<double>* row_weights,
                                      const std::vector<std::size_t>& features,
                                      double min_gain, double min_leaf) {
  std::vector<Entry> scratch;
  return search_splits(m, rows, row_weights, nullptr, features, min_gain,
                       min_leaf, nullptr, scratch);
}

std::optional<SplitChoice> best_split_regression(
    const FeatureMatrix& m, const std::vector<std::size_t>& rows,
    const std::vector<double>& targets, const std::vector<double>* row_weights,
    const std::vector<std::size_t>& features, double min_gain,
    double min_leaf) {
  std::vector<Entry> scratch;
  return search_splits(m, rows, row_weights, &targets, features, min_gain,
                       min_leaf, nullptr, scratch);
}

namespace {

struct Builder {
  const FeatureMatrix& m;
  const std::vector<double>* weights = nullptr;
  const std::vector<double>* targets = nullptr;
  TreeHyper hyper;
  int mtry = 0;
  Rng* rng = nullptr;
  const std::function<double(const std::vector<std::size_t>&)>* leaf_value =
      nullptr;

  std::vector<std::uint8_t> binary;
  std::vector<std::size_t> all_features;
  std::vector<std::size_t> pool;
  std::vector<Entry> scratch;
  std::vector<TreeNode> nodes;

  explicit Builder(const FeatureMatrix& matrix) : m(matrix) {
    binary.resize(m.cols);
    all_features.resize(m.cols);
    for (std::size_t f = 0; f < m.cols; ++f) {
      all_features[f] = f;
      std::uint8_t b = 1;
      for (std::size_t r = 0; r < m.rows && b; ++r) {
        const double v = m.at(r, f);
        if (v != 0.0 && v != 1.0) b = 0;
      }
      binary[f] = b;
    }
    pool = all_features;
  }

  double weight_of(std::size_t r) const {
    return weights ? (*weights)[r] : 1.0;
  }

  int make_leaf(const std::vector<std::size_t>& rows) {
    TreeNode leaf;
    if (targets) {
      if (leaf_value && *leaf_value) {
        leaf.value = (*leaf_value)(rows);
      } else {
        double w = 0, s = 0;
        for (const std::size_t r : rows) {
          w += weight_of(r);
          s += weight_of(r) * (*targets)[r];
        }
        leaf.value = w > 0 ? s / w : 0;
      }
    } else {
      std::array<double, kNumClasses> cw{};
      for (const std::size_t r : rows) cw[m.labels[r]] += weight_of(r);
      const double total = cw[0] + cw[1] + cw[2];
      for (int c = 0; c < kNumClasses; ++c)
        leaf.dist[c] = total > 0 ? cw[c] / total : 1.0 / kNumClasses;
    }
    nodes.push_back(leaf);
    return static_cast<int>(nodes.size()) - 1;
  }

  int build(std::vector<std::size_t> rows, int depth) {
    if (depth >= hyper.max_depth || rows.size() < 2) return make_leaf(rows);

    const std::vector<std::size_t>* features = &all_features;
    std::vector<std::size_t> sampled;
    if (mtry > 0 && mtry < static_cast<int>(m.cols) && rng) {
      const std::size_t n = pool.size();
      for (int i = 0; i < mtry; ++i)
        std::swap(pool[i], pool[i + rng->uniform_index(n - i)]);
      sampled.assign(pool.begin(), pool.begin() + mtry);
      features = &sampled;
    }

    const auto split =
        search_splits(m, rows, weights, targets, *features, hyper.min_gain,
                      hyper.min_leaf, &binary, scratch);
    if (!split) return make_leaf(rows);

    std::vector<std::size_t> left, right;
    for (const std::size_t r : rows)
      (m.at(r, split->feature) < split->threshold ? left : right).push_back(r);
    if (left.empty() || right.empty()) return make_leaf(rows);
    rows.clear();
    rows.shrink_to_fit();

    const int idx = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[idx].feature = static_cast<int>(split->feature);
    nodes[idx].threshold = split->threshold;
    const int l = build(std::move(left), depth + 1);
    const int r = build(std::move(right), depth + 1);
    nodes[idx].left = l;
    nodes[idx].right = r;
    return idx;
  }
};

std::vector<std::size_t> identity_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

}  // namespace

DecisionTree tree_fit_rows(const FeatureMatrix& m,
                           const std::vector<std::size_t>& rows,
                           const std::vector<double>* row_weights,
                           const TreeHyper& hyper, int mtry, Rng* rng) {
  if (m.rows == 0 || m.cols == 0) throw ArgumentError("tree: empty matrix");
  if (rows.empty()) throw ArgumentError("tree: no rows");
  Builder b(m);
  b.weights = row_weights;
  b.hyper = hyper;
  b.mtry = mtry;
  b.rng = rng;
  b.build(rows, 0);
  DecisionTree tree;
  tree.nodes = std::move(b.nodes);
  tree.n_features = m.cols;
  return tree;
}

DecisionTree tree_fit(const FeatureMatrix& m, const TreeHyper& hyper,
                      const std::vector<double>* row_weights) {
  return tree_fit_rows(m, identity_rows(m.rows), row_weights, hyper);
}

DecisionTree regression_tree_fit(
    const FeatureMatrix& m, const std::vector<std::size_t>& rows,
    const std::vector<double>& targets, const TreeHyper& hyper,
    const std::function<double(const std::vector<std::size_t>&)>& leaf_value) {
  if (m.rows == 0 || m.cols == 0) throw ArgumentError("tree: empty matrix");
  if (rows.empty()) throw ArgumentError("tree: no rows");
  if (targets.size() != m.rows)
    throw ArgumentError("tree: targets length mismatch");
  Builder b(m);
  b.targets = &targets;
  b.hyper = hyper;
  b.leaf_value = &leaf_value;
  b.build(rows, 0);
  DecisionTree tree;
  tree.nodes = std::move(b.nodes);
  tree.n_features = m.cols;
  return tree;
}

const TreeNode& tree_leaf_for(const DecisionTree& tree, const double* row) {
  if (tree.nodes.empty()) throw ArgumentError("tree: empty model");
  int i = 0;
  while (tree.nodes[i].feature >= 0) {
    const TreeNode& n = tree.nodes[i];
    i = row[n.feature] < n.threshold ? n.left : n.right;
  }
  return tree.nodes[i];
}

Proba tree_predict_proba(const DecisionTree& tree, const double* row) {
  return tree_leaf_for(tree, row).dist;
}

int tree_predict(const DecisionTree& tree, const double* row) {
  return argmax_class(tree_leaf_for(tree, row).dist);
}

double tree_predict_value(const DecisionTree& tree, const double* row) {
  return tree_leaf_for(tree, row).value;
}

namespace {

int depth_of(const DecisionTree& t, int idx) {
  const TreeNode& n = t.nodes[idx];
  if (n.feature < 0) return 0;
  return 1 + std::max(depth_of(t, n.left), depth_of(t, n.right));
}

}  // namespace

int tree_depth(const DecisionTree& tree) {
  if (tree.nodes.empty()) return 0;
  return depth_of(tree, 0);
}

void serialize_tree(const DecisionTree& tree, std::string& out) {
  out += "tree ";
  out += std::to_string(tree.nodes.size());
  out += '\n';
  for (const TreeNode& n : tree.nodes) {
    if (n.feature >= 0) {
      out += "i ";
      out += std::to_string(n.feature);
      out += ' ';
      out += format_double(n.threshold);
      out += ' ';
      out += std::to_string(n.left);
      out += ' ';
      out += std::to_string(n.right);
    } else {
      out += "l ";
      out += format_double(n.dist[0]);
      out += ' ';
      out += format_double(n.dist[1]);
      out += ' ';
      out += format_double(n.dist[2]);
      out += ' ';
      out += format_double(n.value);
    }
    out += '\n';
  }
}

namespace {

struct Cursor {
  const char* p;
  const char* end;

  void skip_ws() {
    while (p < end && (*p == ' ' || *p == '\n' || *p == '\r' || *p == '\t'))
      ++p;
  }
  std::string_view token() {
    skip_ws();
    const char* s = p;
    while (p < end && *p != ' ' && *p != '\n' && *p != '\r' && *p != '\t')
      ++p;
    if (s == p) throw FormatError("tree: unexpected end of input");
    return std::string_view(s, static_cast<std::size_t>(p - s));
  }
  double number() {
    const auto t = token();
    double v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
      throw FormatError("tree: bad number");
    return v;
  }
  long integer() {
    const auto t = token();
    long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
      throw FormatError("tree: bad integer");
    return v;
  }
};

}  // namespace

DecisionTree parse_tree(const std::string& text, std::size_t& pos,
                        std::size_t n_features) {
  Cursor cur{text.data() + pos, text.data() + text.size()};
  if (cur.token() != "tree") throw FormatError("tree: missing header");
  const long count = cur.integer();
  if (count < 1) throw FormatError("tree: bad node count");
  DecisionTree tree;
  tree.n_features = n_features;
  tree.nodes.resize(count);
  for (long i = 0; i < count; ++i) {
    TreeNode& n = tree.nodes[i];
    const auto tag = cur.token();
    if (tag == "i") {
      n.feature = static_cast<int>(cur.integer());
      n.threshold = cur.number();
      n.left = static_cast<int>(cur.integer());
      n.right = static_cast<int>(cur.integer());
      if (n.feature < 0 || n.feature >= static_cast<int>(n_features) ||
          n.left <= i || n.right <= i || n.left >= count || n.right >= count)
        throw FormatError("tree: malformed internal node");
    } else if (tag == "l") {
      n.feature = -1;
      for (int c = 0; c < kNumClasses; ++c) n.dist[c] = cur.number();
      n.value = cur.number();
    } else {
      throw FormatError("tree: unknown node tag");
    }
  }
  pos = static_cast<std::size_t>(cur.p - text.data());
  return tree;
}

std::string tree_to_text(const DecisionTree& tree) {
  std::string out;
  serialize_tree(tree, out);
  return out;
}

DecisionTree tree_from_text(const std::string& text, std::size_t n_features) {
  std::size_t pos = 0;
  return parse_tree(text, pos, n_features);
}

}  // namespace airdemand
