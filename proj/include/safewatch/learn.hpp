#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "safewatch/corpus.hpp"
#include "safewatch/features.hpp"

namespace safewatch {

/// Labeled rows plus the set of columns learners may look at.
///
/// Rows are stored row-major with `dim` columns. Models index columns in the
/// full `dim` space, so predictions always take complete rows.
struct Dataset {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<Safety> labels;
  /// Sorted, distinct column indices (the feature mask).
  std::vector<std::size_t> features;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }

  void add_row(std::span<const double> row, Safety label);
  /// Throws Error{Parameter} on an empty or out-of-range mask or ragged rows.
  void validate() const;

  /// Same rows, different mask.
  Dataset with_features(std::vector<std::size_t> mask) const;
  /// Rows at `indices` (repeats allowed), same mask.
  Dataset subset(std::span<const std::size_t> indices) const;
};

/// Dataset over the 34-feature schema restricted to `view`. Unlabeled rows
/// are skipped.
Dataset make_dataset(std::span<const FeatureRow> rows, FeatureView view = FeatureView::All);

/// Stratified split after a seeded shuffle. Each class contributes
/// round(train_fraction * n_class) rows to train. Both halves keep the
/// original row order.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed);

struct TreeParams {
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_leaf = 1;

  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

struct TreeNode {
  // Internal nodes: feature >= 0, rows with x[feature] <= threshold go left.
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  // Leaves.
  double p_unsafe = 0.0;
  Safety label = Safety::Safe;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary tree of axis-aligned threshold splits. nodes[0] is the root.
class TreeModel {
 public:
  TreeModel() = default;
  TreeModel(std::size_t dim, std::vector<TreeNode> nodes) : dim_(dim), nodes_(std::move(nodes)) {}

  Safety predict(std::span<const double> row) const;
  double predict_proba(std::span<const double> row) const;

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  friend bool operator==(const TreeModel&, const TreeModel&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<TreeNode> nodes_;
};

/// Greedy Gini-minimizing tree. Thresholds are midpoints between consecutive
/// distinct values; ties go to the lowest feature index, then the lowest
/// threshold. A node becomes a leaf when pure, at max_depth, or when no split
/// leaves min_leaf rows on both sides. Leaf ties predict Unsafe.
TreeModel train_tree(const Dataset& train, const TreeParams& params = {});

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t features_per_split = 6;
  std::size_t max_depth = 0;
  std::size_t min_leaf = 1;
  bool bootstrap = true;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(std::vector<TreeModel> trees, std::vector<std::uint64_t> seeds, ForestParams params)
      : trees_(std::move(trees)), seeds_(std::move(seeds)), params_(params) {}

  /// Majority vote; an even split of votes predicts Unsafe.
  Safety predict(std::span<const double> row) const;
  /// Fraction of trees voting Unsafe.
  double predict_proba(std::span<const double> row) const;

  std::size_t dim() const noexcept { return trees_.empty() ? 0 : trees_.front().dim(); }
  const std::vector<TreeModel>& trees() const noexcept { return trees_; }
  const std::vector<std::uint64_t>& seeds() const noexcept { return seeds_; }
  const ForestParams& params() const noexcept { return params_; }

  friend bool operator==(const ForestModel&, const ForestModel&) = default;

 private:
  std::vector<TreeModel> trees_;
  std::vector<std::uint64_t> seeds_;
  ForestParams params_;
};

/// Trees grown on seeded bootstrap samples, drawing `features_per_split`
/// candidate columns per node. Per-tree seeds derive from `seed`.
ForestModel train_forest(const Dataset& train, const ForestParams& params, std::uint64_t seed);

class KnnModel {
 public:
  KnnModel() = default;

  Safety predict(std::span<const double> row) const;

  std::size_t k() const noexcept { return k_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<std::size_t>& features() const noexcept { return features_; }

  friend bool operator==(const KnnModel&, const KnnModel&) = default;
  friend KnnModel train_knn(const Dataset& train, std::size_t k);
  friend class ModelCodec;

 private:
  std::size_t k_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::size_t> features_;
  std::vector<double> min_;
  std::vector<double> max_;
  std::vector<double> scaled_;  // size() x features_.size()
  std::vector<Safety> labels_;
};

/// Stores min/max-scaled training rows; predicts the majority among the k
/// nearest by Euclidean distance (distance ties: lower training index first).
/// k must be odd and within [1, |train|].
KnnModel train_knn(const Dataset& train, std::size_t k);

using Model = std::variant<TreeModel, ForestModel, KnnModel>;

enum class ClassifierKind { RandomForest, KNearestNeighbor, DecisionTree };

const char* display_name(ClassifierKind kind) noexcept;
const char* to_string(ClassifierKind kind) noexcept;
std::optional<ClassifierKind> parse_classifier(std::string_view text) noexcept;

Safety predict(const Model& model, std::span<const double> row);
std::size_t model_dim(const Model& model);

struct EvalReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
};

/// Confusion counts with Unsafe as the positive class. Zero denominators
/// give 0.
EvalReport evaluate_predictions(std::span<const Safety> predicted, std::span<const Safety> actual);
EvalReport evaluate(const Model& model, const Dataset& test);

struct LearnParams {
  ForestParams forest;
  TreeParams tree;
  std::size_t knn_k = 5;
  double train_fraction = 0.8;
};

struct GridRow {
  ClassifierKind classifier;
  FeatureView view;
  EvalReport report;
};

const char* view_label(FeatureView view) noexcept;

Model train_model(ClassifierKind kind, const Dataset& train, const LearnParams& params, std::uint64_t seed);

/// Three classifiers over the four feature views, all on one shared split of
/// `data` (which should carry the full schema mask). Rows come out grouped by
/// classifier: Random Forest, K-Nearest Neighbor, Decision Tree.
std::vector<GridRow> compare_feature_views(const Dataset& data, std::uint64_t seed, const LearnParams& params = {},
                                           std::span<const FeatureView> views = {});

/// Tab-separated, one row per grid entry, metrics as percentages.
void write_eval_grid(std::ostream& out, std::span<const GridRow> rows);

inline constexpr int kModelFormatVersion = 1;

void save_model(std::ostream& out, const Model& model);
Model load_model(std::istream& in, std::string_view source_name = "<stream>");

}  // namespace safewatch
