#include "cloop/mlprov/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cloop::mlprov {

std::vector<std::string> graph_feature_schema() {
  return {kGraphFeatureSchema.begin(), kGraphFeatureSchema.end()};
}

Dataset read_features_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Dataset data;
  std::string line;
  bool first = true;
  size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      // header row required
      if (line.find("label") == std::string::npos) {
        throw std::runtime_error(path + ": missing header row");
      }
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> fields;
    while (std::getline(ss, cell, ',')) {
      try {
        fields.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error(path + ": bad number at line " + std::to_string(lineNo));
      }
    }
    if (fields.size() != kGraphFeatureSchema.size() + 1) {
      throw std::runtime_error(path + ": expected " +
                               std::to_string(kGraphFeatureSchema.size() + 1) +
                               " columns at line " + std::to_string(lineNo));
    }
    const int label = static_cast<int>(fields.back());
    if (label != 0 && label != 1) {
      throw std::runtime_error(path + ": label must be 0 or 1 at line " + std::to_string(lineNo));
    }
    fields.pop_back();
    data.rows.push_back(std::move(fields));
    data.labels.push_back(label);
  }
  return data;
}

void write_features_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "inDegree,outDegree,wInDegree,wOutDegree,wBetweenness,label\n";
  char buf[64];
  for (size_t i = 0; i < data.rows.size(); ++i) {
    for (double v : data.rows[i]) {
      std::snprintf(buf, sizeof(buf), "%.9g", v);
      out << buf << ',';
    }
    out << data.labels[i] << '\n';
  }
}

void split_dataset(const Dataset& all, double testFraction, uint64_t seed, Dataset* train,
                   Dataset* test) {
  if (testFraction <= 0 || testFraction >= 1) throw std::invalid_argument("bad test fraction");
  std::vector<size_t> order(all.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const size_t testCount = std::max<size_t>(1, static_cast<size_t>(order.size() * testFraction));
  for (size_t k = 0; k < order.size(); ++k) {
    Dataset* dst = k < testCount ? test : train;
    dst->rows.push_back(all.rows[order[k]]);
    dst->labels.push_back(all.labels[order[k]]);
  }
}

double evaluate_accuracy(const ForestModel& model, const Dataset& data) {
  if (data.rows.empty()) return 0.0;
  size_t correct = 0;
  for (size_t i = 0; i < data.rows.size(); ++i) {
    if (model.predict_row(data.rows[i]).first == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.rows.size());
}

}  // namespace cloop::mlprov
