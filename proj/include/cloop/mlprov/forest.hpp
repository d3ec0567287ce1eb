#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cloop/util/time.hpp"

namespace cloop::mlprov {

/// Flat decision tree. Internal nodes route on feature <= threshold (left)
/// vs > threshold (right); leaves carry the class label.
struct TreeNode {
  int featureIndex = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int classLabel = -1;

  bool is_leaf() const { return featureIndex < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root

  int predict(std::span<const double> features) const;

  /// Checks child indices are in bounds, the structure is acyclic, every
  /// path ends at a leaf and split indices fit the feature count.
  void validate(size_t featureCount) const;  // throws std::invalid_argument
};

struct ModelDescriptor {
  std::string name;
  int version = 0;
  std::string eventId;  // analytics event this model serves
  std::vector<std::string> featureSchema;
  util::SysTime createdAt{};
  std::map<std::string, double> metrics;

  bool operator==(const ModelDescriptor&) const = default;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  int numClasses = 2;
  ModelDescriptor descriptor;

  /// Majority vote across trees; voteShare is the fraction voting class 1.
  /// Ties resolve to class 0.
  std::pair<int, double> predict_row(std::span<const double> features) const;

  void validate() const;  // throws std::invalid_argument
};

std::string forest_to_json(const ForestModel& m);
ForestModel forest_from_json(std::string_view text);  // throws std::invalid_argument

struct TrainParams {
  int numTrees = 100;
  int maxDepth = 10;
  uint64_t seed = 0;
};

struct Dataset {
  std::vector<std::vector<double>> rows;  // uniform width
  std::vector<int> labels;                // 0 or 1
};

struct TrainReport {
  bool degenerate = false;  // single-class input, constant predictor returned
  double trainAccuracy = 0.0;
};

/// Bagged CART: seeded bootstrap per tree, random feature subset of size
/// ceil(sqrt(F)) per split, Gini impurity with midpoint thresholds between
/// sorted distinct values. Deterministic for a fixed seed (byte-identical
/// serialization).
ForestModel train_forest(const Dataset& data, const TrainParams& params,
                         ModelDescriptor descriptor, TrainReport* report = nullptr);

}  // namespace cloop::mlprov
