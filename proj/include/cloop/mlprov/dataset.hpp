#pragma once

#include <array>
#include <string>

#include "cloop/mlprov/forest.hpp"

namespace cloop::mlprov {

/// The fixed five-feature schema shared by the trainer, the registry
/// descriptors and the analytics engine. Order matters: descriptors embed it
/// so training and serving agree.
inline constexpr std::array<const char*, 5> kGraphFeatureSchema = {
    "inDegree", "outDegree", "wInDegree", "wOutDegree", "wBetweenness"};

std::vector<std::string> graph_feature_schema();

/// Reads a labeled feature CSV (header
/// inDegree,outDegree,wInDegree,wOutDegree,wBetweenness,label).
/// Throws std::runtime_error on unreadable files or malformed rows.
Dataset read_features_csv(const std::string& path);

void write_features_csv(const std::string& path, const Dataset& data);

/// Deterministic split for holdout evaluation; fraction in (0,1) goes to test.
void split_dataset(const Dataset& all, double testFraction, uint64_t seed, Dataset* train,
                   Dataset* test);

double evaluate_accuracy(const ForestModel& model, const Dataset& data);

}  // namespace cloop::mlprov
