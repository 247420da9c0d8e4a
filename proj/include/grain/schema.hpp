#pragma once

// Discrete feature schema shared by all nodes of a graph. Every feature is
// categorical; one feature is designated as the node-degree feature. The
// one-hot encoding concatenates the per-feature indicator blocks in schema
// order.

#include <grain/common.hpp>

#include <memory>
#include <numeric>
#include <string>
#include <vector>

namespace grain {

enum class Task { graph_classification, node_classification };

inline const char* task_name(Task t) {
  return t == Task::graph_classification ? "graph_classification"
                                         : "node_classification";
}

// Per-node feature assignment: one category index per schema feature.
using NodeFeatures = std::vector<int>;

struct FeatureSchema {
  struct Feature {
    std::string name;
    int cardinality = 0;
  };

  std::vector<Feature> features;
  int degree_feature_index = -1;
  int num_classes = 2;
  Task task = Task::graph_classification;

  int num_features() const { return static_cast<int>(features.size()); }

  int one_hot_width() const {
    int w = 0;
    for (const auto& f : features) w += f.cardinality;
    return w;
  }

  // Column offset of feature k's indicator block.
  int offset(int k) const {
    int w = 0;
    for (int i = 0; i < k; ++i) w += features[i].cardinality;
    return w;
  }

  int max_declared_degree() const {
    return features[degree_feature_index].cardinality - 1;
  }

  void validate() const {
    if (features.empty())
      throw Error(ErrorCode::invalid_argument, "schema has no features");
    for (const auto& f : features) {
      if (f.cardinality <= 0)
        throw Error(ErrorCode::invalid_argument,
                    "feature '" + f.name + "' has non-positive cardinality");
    }
    if (degree_feature_index < 0 || degree_feature_index >= num_features())
      throw Error(ErrorCode::invalid_argument, "degree_feature_index out of range");
    if (num_classes <= 0)
      throw Error(ErrorCode::invalid_argument, "num_classes must be positive");
  }

  void validate_features(const NodeFeatures& values) const {
    if (static_cast<int>(values.size()) != num_features())
      throw Error(ErrorCode::invalid_graph, "node feature count does not match schema");
    for (int k = 0; k < num_features(); ++k) {
      if (values[k] < 0 || values[k] >= features[k].cardinality)
        throw Error(ErrorCode::invalid_graph,
                    "feature '" + features[k].name + "' index " +
                        std::to_string(values[k]) + " outside cardinality " +
                        std::to_string(features[k].cardinality));
    }
  }

  // Dense one-hot row for a node.
  Vector one_hot(const NodeFeatures& values) const {
    validate_features(values);
    Vector row = Vector::Zero(one_hot_width());
    int off = 0;
    for (int k = 0; k < num_features(); ++k) {
      row[off + values[k]] = 1.0;
      off += features[k].cardinality;
    }
    return row;
  }

  bool operator==(const FeatureSchema& o) const {
    if (features.size() != o.features.size()) return false;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (features[i].name != o.features[i].name ||
          features[i].cardinality != o.features[i].cardinality)
        return false;
    }
    return degree_feature_index == o.degree_feature_index &&
           num_classes == o.num_classes && task == o.task;
  }
};

using SchemaPtr = std::shared_ptr<const FeatureSchema>;

inline SchemaPtr make_schema(FeatureSchema s) {
  s.validate();
  return std::make_shared<const FeatureSchema>(std::move(s));
}

}  // namespace grain
