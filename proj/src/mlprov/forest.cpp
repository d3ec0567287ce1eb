#include "cloop/mlprov/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace cloop::mlprov {

using nlohmann::json;

int DecisionTree::predict(std::span<const double> features) const {
  int idx = 0;
  while (true) {
    const TreeNode& n = nodes[static_cast<size_t>(idx)];
    if (n.is_leaf()) return n.classLabel;
    idx = features[static_cast<size_t>(n.featureIndex)] <= n.threshold ? n.left : n.right;
  }
}

void DecisionTree::validate(size_t featureCount) const {
  if (nodes.empty()) throw std::invalid_argument("tree has no nodes");
  std::vector<char> seen(nodes.size(), 0);
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int idx = stack.back();
    stack.pop_back();
    if (idx < 0 || static_cast<size_t>(idx) >= nodes.size()) {
      throw std::invalid_argument("child index out of bounds");
    }
    if (seen[static_cast<size_t>(idx)]) throw std::invalid_argument("tree is not acyclic");
    seen[static_cast<size_t>(idx)] = 1;
    const TreeNode& n = nodes[static_cast<size_t>(idx)];
    if (n.is_leaf()) {
      if (n.classLabel < 0) throw std::invalid_argument("leaf without class label");
      continue;
    }
    if (static_cast<size_t>(n.featureIndex) >= featureCount) {
      throw std::invalid_argument("split feature index out of bounds");
    }
    stack.push_back(n.left);
    stack.push_back(n.right);
  }
}

std::pair<int, double> ForestModel::predict_row(std::span<const double> features) const {
  size_t anomalous = 0;
  for (const DecisionTree& t : trees) {
    if (t.predict(features) == 1) ++anomalous;
  }
  const double share = trees.empty() ? 0.0 : static_cast<double>(anomalous) / trees.size();
  // strict majority; ties stay benign
  const int label = 2 * anomalous > trees.size() ? 1 : 0;
  return {label, share};
}

void ForestModel::validate() const {
  if (numClasses != 2) throw std::invalid_argument("only binary forests supported");
  if (trees.empty()) throw std::invalid_argument("forest has no trees");
  if (descriptor.featureSchema.empty()) throw std::invalid_argument("empty feature schema");
  for (const DecisionTree& t : trees) t.validate(descriptor.featureSchema.size());
}

namespace {

json descriptor_to_json(const ModelDescriptor& d) {
  return json{{"name", d.name},
              {"version", d.version},
              {"eventId", d.eventId},
              {"featureSchema", d.featureSchema},
              {"createdAt", util::format_rfc3339(d.createdAt)},
              {"metrics", d.metrics}};
}

ModelDescriptor descriptor_from_json(const json& j) {
  ModelDescriptor d;
  d.name = j.at("name").get<std::string>();
  d.version = j.at("version").get<int>();
  d.eventId = j.at("eventId").get<std::string>();
  d.featureSchema = j.at("featureSchema").get<std::vector<std::string>>();
  d.createdAt = util::parse_rfc3339(j.at("createdAt").get<std::string>());
  if (j.contains("metrics")) d.metrics = j.at("metrics").get<std::map<std::string, double>>();
  return d;
}

}  // namespace

std::string forest_to_json(const ForestModel& m) {
  json trees = json::array();
  for (const DecisionTree& t : m.trees) {
    json nodes = json::array();
    for (const TreeNode& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back(json{{"c", n.classLabel}});
      } else {
        nodes.push_back(json{{"f", n.featureIndex}, {"t", n.threshold}, {"l", n.left}, {"r", n.right}});
      }
    }
    trees.push_back(json{{"nodes", nodes}});
  }
  return json{{"descriptor", descriptor_to_json(m.descriptor)},
              {"numClasses", m.numClasses},
              {"trees", trees}}
      .dump();
}

ForestModel forest_from_json(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("model is not valid JSON");
  ForestModel m;
  try {
    m.descriptor = descriptor_from_json(j.at("descriptor"));
    m.numClasses = j.at("numClasses").get<int>();
    for (const json& tj : j.at("trees")) {
      DecisionTree t;
      for (const json& nj : tj.at("nodes")) {
        TreeNode n;
        if (nj.contains("c")) {
          n.classLabel = nj.at("c").get<int>();
        } else {
          n.featureIndex = nj.at("f").get<int>();
          n.threshold = nj.at("t").get<double>();
          n.left = nj.at("l").get<int>();
          n.right = nj.at("r").get<int>();
        }
        t.nodes.push_back(n);
      }
      m.trees.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad model document: ") + e.what());
  }
  m.validate();
  return m;
}

namespace {

// splitmix64; keeps per-tree streams independent of the draw count of others
uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}
  uint64_t next() {
    state_ = mix64(state_ + 0x632be59bd9b4e019ULL);
    return state_;
  }
  // modulo draw is platform-stable, which matters more here than exact uniformity
  size_t below(size_t n) { return static_cast<size_t>(next() % n); }

 private:
  uint64_t state_;
};

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

double gini(size_t ones, size_t total) {
  if (total == 0) return 0.0;
  const double p1 = static_cast<double>(ones) / static_cast<double>(total);
  const double p0 = 1.0 - p1;
  return 1.0 - p0 * p0 - p1 * p1;
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, int maxDepth, Rng& rng)
      : data_(data), maxDepth_(maxDepth), rng_(rng),
        featureCount_(data.rows.empty() ? 0 : data.rows[0].size()),
        mtry_(std::max<size_t>(1, static_cast<size_t>(
                                      std::ceil(std::sqrt(static_cast<double>(featureCount_)))))) {}

  DecisionTree build(std::vector<size_t> sampleIdx) {
    DecisionTree tree;
    grow(tree, std::move(sampleIdx), 0);
    return tree;
  }

 private:
  int majority(const std::vector<size_t>& idx) const {
    size_t ones = 0;
    for (size_t i : idx) ones += static_cast<size_t>(data_.labels[i]);
    return 2 * ones > idx.size() ? 1 : 0;
  }

  std::optional<SplitChoice> best_split(const std::vector<size_t>& idx) {
    // random feature subset, partial Fisher-Yates for determinism
    std::vector<int> feats(featureCount_);
    std::iota(feats.begin(), feats.end(), 0);
    for (size_t i = 0; i < mtry_ && i + 1 < feats.size(); ++i) {
      const size_t j = i + rng_.below(feats.size() - i);
      std::swap(feats[i], feats[j]);
    }
    feats.resize(std::min(mtry_, feats.size()));
    std::sort(feats.begin(), feats.end());  // draw order must not affect tie-breaks

    std::optional<SplitChoice> best;
    std::vector<std::pair<double, int>> vals;
    vals.reserve(idx.size());
    for (int f : feats) {
      vals.clear();
      for (size_t i : idx) vals.emplace_back(data_.rows[i][static_cast<size_t>(f)], data_.labels[i]);
      std::sort(vals.begin(), vals.end());
      size_t onesLeft = 0;
      size_t onesTotal = 0;
      for (auto& [v, l] : vals) onesTotal += static_cast<size_t>(l);
      for (size_t i = 1; i < vals.size(); ++i) {
        onesLeft += static_cast<size_t>(vals[i - 1].second);
        if (vals[i].first == vals[i - 1].first) continue;
        const size_t nL = i;
        const size_t nR = vals.size() - i;
        const double imp = (static_cast<double>(nL) * gini(onesLeft, nL) +
                            static_cast<double>(nR) * gini(onesTotal - onesLeft, nR)) /
                           static_cast<double>(vals.size());
        if (!best || imp < best->impurity - 1e-15) {
          best = SplitChoice{f, (vals[i - 1].first + vals[i].first) / 2.0, imp};
        }
      }
    }
    return best;
  }

  int grow(DecisionTree& tree, std::vector<size_t> idx, int depth) {
    const int nodeIdx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    size_t ones = 0;
    for (size_t i : idx) ones += static_cast<size_t>(data_.labels[i]);
    const bool pure = ones == 0 || ones == idx.size();

    std::optional<SplitChoice> split;
    if (!pure && depth < maxDepth_ && idx.size() >= 2) split = best_split(idx);

    if (!split) {
      tree.nodes[static_cast<size_t>(nodeIdx)].classLabel = majority(idx);
      return nodeIdx;
    }

    std::vector<size_t> leftIdx, rightIdx;
    for (size_t i : idx) {
      if (data_.rows[i][static_cast<size_t>(split->feature)] <= split->threshold) {
        leftIdx.push_back(i);
      } else {
        rightIdx.push_back(i);
      }
    }
    idx.clear();
    idx.shrink_to_fit();

    const int left = grow(tree, std::move(leftIdx), depth + 1);
    const int right = grow(tree, std::move(rightIdx), depth + 1);
    TreeNode& n = tree.nodes[static_cast<size_t>(nodeIdx)];
    n.featureIndex = split->feature;
    n.threshold = split->threshold;
    n.left = left;
    n.right = right;
    return nodeIdx;
  }

  const Dataset& data_;
  int maxDepth_;
  Rng& rng_;
  size_t featureCount_;
  size_t mtry_;
};

}  // namespace

ForestModel train_forest(const Dataset& data, const TrainParams& params,
                         ModelDescriptor descriptor, TrainReport* report) {
  if (data.rows.empty() || data.rows.size() != data.labels.size()) {
    throw std::invalid_argument("dataset rows/labels mismatch or empty");
  }
  const size_t width = data.rows[0].size();
  for (const auto& r : data.rows) {
    if (r.size() != width) throw std::invalid_argument("ragged dataset");
  }
  if (width == 0) throw std::invalid_argument("dataset has no features");
  if (params.numTrees < 1 || params.maxDepth < 1) {
    throw std::invalid_argument("numTrees and maxDepth must be >= 1");
  }
  if (descriptor.featureSchema.size() != width) {
    throw std::invalid_argument("feature schema width does not match dataset");
  }

  ForestModel model;
  model.descriptor = std::move(descriptor);

  bool sawZero = false, sawOne = false;
  for (int l : data.labels) {
    if (l == 0) sawZero = true;
    else if (l == 1) sawOne = true;
    else throw std::invalid_argument("labels must be 0 or 1");
  }

  if (!sawZero || !sawOne) {
    // degenerate single-class input: constant predictor
    DecisionTree t;
    TreeNode leaf;
    leaf.classLabel = sawOne ? 1 : 0;
    t.nodes.push_back(leaf);
    model.trees.push_back(std::move(t));
    model.descriptor.metrics["trainAccuracy"] = 1.0;
    if (report) {
      report->degenerate = true;
      report->trainAccuracy = 1.0;
    }
    model.validate();
    return model;
  }

  const size_t n = data.rows.size();
  for (int t = 0; t < params.numTrees; ++t) {
    Rng rng(mix64(params.seed) ^ mix64(static_cast<uint64_t>(t) + 1));
    std::vector<size_t> boot(n);
    for (size_t i = 0; i < n; ++i) boot[i] = rng.below(n);
    TreeBuilder builder(data, params.maxDepth, rng);
    model.trees.push_back(builder.build(std::move(boot)));
  }

  size_t correct = 0;
  for (size_t i = 0; i < n; ++i) {
    if (model.predict_row(data.rows[i]).first == data.labels[i]) ++correct;
  }
  const double acc = static_cast<double>(correct) / static_cast<double>(n);
  model.descriptor.metrics["trainAccuracy"] = acc;
  if (report) {
    report->degenerate = false;
    report->trainAccuracy = acc;
  }
  model.validate();
  return model;
}

}  // namespace cloop::mlprov
