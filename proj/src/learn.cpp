#include "safewatch/learn.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "safewatch/error.hpp"
#include "safewatch/rng.hpp"

namespace safewatch {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void parameter_error(const std::string& msg) { throw Error(ErrorKind::Parameter, "learn", msg); }

// ---------------------------------------------------------------------------
// Tree growth

struct Counts {
  std::int64_t safe = 0;
  std::int64_t unsafe = 0;
  std::int64_t n() const { return safe + unsafe; }
};

// Split quality: maximize (A/nl + B/nr) with A, B the per-side sums of squared
// class counts, which is minimizing weighted Gini. Kept as an exact fraction.
struct SplitScore {
  __int128 num = 0;
  __int128 den = 1;

  static SplitScore of(const Counts& l, const Counts& r) {
    const __int128 a = static_cast<__int128>(l.safe) * l.safe + static_cast<__int128>(l.unsafe) * l.unsafe;
    const __int128 b = static_cast<__int128>(r.safe) * r.safe + static_cast<__int128>(r.unsafe) * r.unsafe;
    return {a * r.n() + b * l.n(), static_cast<__int128>(l.n()) * r.n()};
  }
  bool better_than(const SplitScore& o) const { return num * o.den > o.num * den; }
};

struct Candidate {
  bool valid = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  SplitScore score;
};

class TreeGrower {
 public:
  TreeGrower(const Dataset& data, const TreeParams& params, std::size_t features_per_split, Rng* rng)
      : data_(data), params_(params), per_split_(features_per_split), rng_(rng) {}

  TreeModel grow(std::vector<std::size_t> rows) {
    nodes_.clear();
    build(rows, 0);
    return TreeModel(data_.dim, std::move(nodes_));
  }

 private:
  double value(std::size_t row, std::size_t feature) const { return data_.values[row * data_.dim + feature]; }

  Counts count(const std::vector<std::size_t>& rows) const {
    Counts c;
    for (auto r : rows) (data_.labels[r] == Safety::Unsafe ? c.unsafe : c.safe)++;
    return c;
  }

  void evaluate_feature(const std::vector<std::size_t>& rows, std::size_t feature, const Counts& total,
                        Candidate& best) {
    order_.assign(rows.begin(), rows.end());
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      const double va = value(a, feature);
      const double vb = value(b, feature);
      return va < vb || (va == vb && a < b);
    });
    const auto min_leaf = static_cast<std::int64_t>(params_.min_leaf);
    Counts left;
    for (std::size_t i = 0; i + 1 < order_.size(); ++i) {
      (data_.labels[order_[i]] == Safety::Unsafe ? left.unsafe : left.safe)++;
      const double lo = value(order_[i], feature);
      const double hi = value(order_[i + 1], feature);
      if (!(lo < hi)) continue;
      const Counts right{total.safe - left.safe, total.unsafe - left.unsafe};
      if (left.n() < min_leaf || right.n() < min_leaf) continue;
      const SplitScore score = SplitScore::of(left, right);
      if (!best.valid || score.better_than(best.score)) {
        double thr = lo + (hi - lo) / 2.0;
        if (!(thr < hi)) thr = lo;
        best = {true, feature, thr, score};
      }
    }
  }

  Candidate find_split(const std::vector<std::size_t>& rows, const Counts& total) {
    Candidate best;
    const auto& mask = data_.features;
    if (per_split_ == 0 || per_split_ >= mask.size() || !rng_) {
      for (auto f : mask) evaluate_feature(rows, f, total, best);
      return best;
    }
    // Partial shuffle picks the candidates; they are scanned in ascending
    // index order so the tie rule matches the full search.
    perm_.assign(mask.begin(), mask.end());
    for (std::size_t i = 0; i < perm_.size(); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_->below(perm_.size() - i));
      std::swap(perm_[i], perm_[j]);
    }
    std::vector<std::size_t> chosen(perm_.begin(), perm_.begin() + static_cast<std::ptrdiff_t>(per_split_));
    std::sort(chosen.begin(), chosen.end());
    for (auto f : chosen) evaluate_feature(rows, f, total, best);
    // No usable candidate: keep drawing until one splits.
    for (std::size_t i = per_split_; !best.valid && i < perm_.size(); ++i) evaluate_feature(rows, perm_[i], total, best);
    return best;
  }

  std::int32_t build(const std::vector<std::size_t>& rows, std::size_t depth) {
    const auto index = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    const Counts total = count(rows);

    auto make_leaf = [&] {
      TreeNode& leaf = nodes_[static_cast<std::size_t>(index)];
      leaf.p_unsafe = static_cast<double>(total.unsafe) / static_cast<double>(total.n());
      leaf.label = total.unsafe >= total.safe ? Safety::Unsafe : Safety::Safe;
      return index;
    };

    const bool pure = total.safe == 0 || total.unsafe == 0;
    const bool depth_hit = params_.max_depth > 0 && depth >= params_.max_depth;
    if (pure || depth_hit || rows.size() < 2 * params_.min_leaf) return make_leaf();

    const Candidate split = find_split(rows, total);
    if (!split.valid) return make_leaf();

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (auto r : rows) (value(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);

    const std::int32_t l = build(left_rows, depth + 1);
    const std::int32_t r = build(right_rows, depth + 1);
    TreeNode& node = nodes_[static_cast<std::size_t>(index)];
    node.feature = static_cast<std::int32_t>(split.feature);
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    node.p_unsafe = static_cast<double>(total.unsafe) / static_cast<double>(total.n());
    return index;
  }

  const Dataset& data_;
  TreeParams params_;
  std::size_t per_split_;
  Rng* rng_;
  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> perm_;
};

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> rows(d.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

void check_row(std::span<const double> row, std::size_t dim) {
  if (row.size() != dim) {
    throw Error(ErrorKind::Schema, "learn",
                "row has " + std::to_string(row.size()) + " columns, model expects " + std::to_string(dim));
  }
}

// ---------------------------------------------------------------------------
// Serialization helpers

json tree_to_json(const TreeModel& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes()) {
    if (n.is_leaf()) {
      nodes.push_back(json{{"p_unsafe", n.p_unsafe}, {"label", to_string(n.label)}});
    } else {
      nodes.push_back(json{{"feature", n.feature},
                           {"threshold", n.threshold},
                           {"left", n.left},
                           {"right", n.right},
                           {"p_unsafe", n.p_unsafe}});
    }
  }
  return json{{"dim", t.dim()}, {"nodes", nodes}};
}

TreeModel tree_from_json(const json& j) {
  const auto dim = j.at("dim").get<std::size_t>();
  std::vector<TreeNode> nodes;
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.p_unsafe = n.at("p_unsafe").get<double>();
    if (n.contains("feature")) {
      node.feature = n.at("feature").get<std::int32_t>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<std::int32_t>();
      node.right = n.at("right").get<std::int32_t>();
    } else {
      auto label = parse_safety(n.at("label").get<std::string>());
      if (!label) throw std::runtime_error("bad leaf label");
      node.label = *label;
    }
    nodes.push_back(node);
  }
  const auto count = static_cast<std::int32_t>(nodes.size());
  for (const auto& n : nodes) {
    if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count ||
                         static_cast<std::size_t>(n.feature) >= dim))
      throw std::runtime_error("tree node references out of range");
  }
  if (nodes.empty()) throw std::runtime_error("tree has no nodes");
  return TreeModel(dim, std::move(nodes));
}

}  // namespace

// Friend of KnnModel for (de)serialization.
class ModelCodec {
 public:
  static json knn_to_json(const KnnModel& m) {
    json labels = json::array();
    for (auto l : m.labels_) labels.push_back(l == Safety::Unsafe ? 1 : 0);
    return json{{"k", m.k_},      {"dim", m.dim_},       {"features", m.features_}, {"min", m.min_},
                {"max", m.max_},  {"scaled", m.scaled_}, {"labels", labels}};
  }
  static KnnModel knn_from_json(const json& j) {
    KnnModel m;
    m.k_ = j.at("k").get<std::size_t>();
    m.dim_ = j.at("dim").get<std::size_t>();
    m.features_ = j.at("features").get<std::vector<std::size_t>>();
    m.min_ = j.at("min").get<std::vector<double>>();
    m.max_ = j.at("max").get<std::vector<double>>();
    m.scaled_ = j.at("scaled").get<std::vector<double>>();
    for (const auto& l : j.at("labels")) m.labels_.push_back(l.get<int>() ? Safety::Unsafe : Safety::Safe);
    const std::size_t f = m.features_.size();
    if (f == 0 || m.min_.size() != f || m.max_.size() != f || m.scaled_.size() != f * m.labels_.size() ||
        m.k_ == 0 || m.k_ > m.labels_.size())
      throw std::runtime_error("inconsistent knn model");
    for (auto idx : m.features_) {
      if (idx >= m.dim_) throw std::runtime_error("knn feature out of range");
    }
    return m;
  }
};

// ---------------------------------------------------------------------------
// Dataset

void Dataset::add_row(std::span<const double> row, Safety label) {
  if (dim == 0 && labels.empty()) dim = row.size();
  if (row.size() != dim) parameter_error("ragged dataset rows");
  values.insert(values.end(), row.begin(), row.end());
  labels.push_back(label);
}

void Dataset::validate() const {
  if (values.size() != labels.size() * dim) parameter_error("dataset values do not match dim x rows");
  if (features.empty()) parameter_error("feature mask is empty");
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i] >= dim) parameter_error("feature mask index out of range");
    if (i > 0 && features[i] <= features[i - 1]) parameter_error("feature mask must be sorted and distinct");
  }
}

Dataset Dataset::with_features(std::vector<std::size_t> mask) const {
  Dataset d = *this;
  std::sort(mask.begin(), mask.end());
  mask.erase(std::unique(mask.begin(), mask.end()), mask.end());
  d.features = std::move(mask);
  return d;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset d;
  d.dim = dim;
  d.features = features;
  d.values.reserve(indices.size() * dim);
  d.labels.reserve(indices.size());
  for (auto i : indices) {
    const auto r = row(i);
    d.values.insert(d.values.end(), r.begin(), r.end());
    d.labels.push_back(labels[i]);
  }
  return d;
}

Dataset make_dataset(std::span<const FeatureRow> rows, FeatureView view) {
  Dataset d;
  d.dim = kFeatureCount;
  d.features = view_indices(view);
  for (const auto& r : rows) {
    if (r.label) d.add_row(r.features.values, *r.label);
  }
  return d;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) parameter_error("train_fraction must lie in (0, 1)");
  if (data.empty()) parameter_error("cannot split an empty dataset");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data.labels[i] == Safety::Unsafe].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].empty()) {
      throw Error(ErrorKind::Stratification, "learn",
                  std::string("no rows labeled ") + to_string(static_cast<Safety>(c)) + "; cannot stratify");
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (auto& rows : by_class) {
    rng.shuffle(std::span<std::size_t>(rows));
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
    train_idx.insert(train_idx.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {data.subset(train_idx), data.subset(test_idx)};
}

// ---------------------------------------------------------------------------
// Trees and forests

Safety TreeModel::predict(std::span<const double> row) const {
  check_row(row, dim_);
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].label;
}

double TreeModel::predict_proba(std::span<const double> row) const {
  check_row(row, dim_);
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].p_unsafe;
}

std::size_t TreeModel::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t best = 0;
  while (!stack.empty()) {
    auto [i, dpt] = stack.back();
    stack.pop_back();
    best = std::max(best, dpt);
    if (!nodes_[i].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), dpt + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), dpt + 1);
    }
  }
  return best;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

TreeModel train_tree(const Dataset& train, const TreeParams& params) {
  train.validate();
  if (train.empty()) parameter_error("cannot train a tree on an empty dataset");
  if (params.min_leaf == 0) parameter_error("min_leaf must be at least 1");
  TreeGrower grower(train, params, 0, nullptr);
  return grower.grow(all_rows(train));
}

Safety ForestModel::predict(std::span<const double> row) const {
  std::size_t unsafe = 0;
  for (const auto& t : trees_) unsafe += t.predict(row) == Safety::Unsafe;
  return 2 * unsafe >= trees_.size() ? Safety::Unsafe : Safety::Safe;
}

double ForestModel::predict_proba(std::span<const double> row) const {
  std::size_t unsafe = 0;
  for (const auto& t : trees_) unsafe += t.predict(row) == Safety::Unsafe;
  return static_cast<double>(unsafe) / static_cast<double>(trees_.size());
}

ForestModel train_forest(const Dataset& train, const ForestParams& params, std::uint64_t seed) {
  train.validate();
  if (train.empty()) parameter_error("cannot train a forest on an empty dataset");
  if (params.n_trees == 0) parameter_error("n_trees must be at least 1");
  if (params.features_per_split == 0 || params.features_per_split > train.features.size()) {
    parameter_error("features_per_split must lie in [1, " + std::to_string(train.features.size()) + "], got " +
                    std::to_string(params.features_per_split));
  }
  if (params.min_leaf == 0) parameter_error("min_leaf must be at least 1");

  std::vector<TreeModel> trees;
  std::vector<std::uint64_t> seeds;
  trees.reserve(params.n_trees);
  const TreeParams tp{params.max_depth, params.min_leaf};
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(seed, t);
    Rng rng(tree_seed);
    std::vector<std::size_t> rows;
    if (params.bootstrap) {
      rows.resize(train.size());
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(train.size()));
    } else {
      rows = all_rows(train);
    }
    TreeGrower grower(train, tp, params.features_per_split, &rng);
    trees.push_back(grower.grow(std::move(rows)));
    seeds.push_back(tree_seed);
  }
  return ForestModel(std::move(trees), std::move(seeds), params);
}

// ---------------------------------------------------------------------------
// kNN

KnnModel train_knn(const Dataset& train, std::size_t k) {
  train.validate();
  if (k == 0 || k > train.size()) parameter_error("k must lie in [1, " + std::to_string(train.size()) + "]");
  if (k % 2 == 0) parameter_error("k must be odd, got " + std::to_string(k));

  KnnModel m;
  m.k_ = k;
  m.dim_ = train.dim;
  m.features_ = train.features;
  const std::size_t f = m.features_.size();
  m.min_.assign(f, 0.0);
  m.max_.assign(f, 0.0);
  for (std::size_t j = 0; j < f; ++j) {
    double lo = train.row(0)[m.features_[j]];
    double hi = lo;
    for (std::size_t i = 1; i < train.size(); ++i) {
      const double v = train.row(i)[m.features_[j]];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    m.min_[j] = lo;
    m.max_[j] = hi;
  }
  m.scaled_.reserve(train.size() * f);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto r = train.row(i);
    for (std::size_t j = 0; j < f; ++j) {
      const double span = m.max_[j] - m.min_[j];
      m.scaled_.push_back(span > 0.0 ? (r[m.features_[j]] - m.min_[j]) / span : 0.0);
    }
  }
  m.labels_ = train.labels;
  return m;
}

Safety KnnModel::predict(std::span<const double> row) const {
  check_row(row, dim_);
  const std::size_t f = features_.size();
  std::vector<double> q(f);
  for (std::size_t j = 0; j < f; ++j) {
    const double span = max_[j] - min_[j];
    q[j] = span > 0.0 ? (row[features_[j]] - min_[j]) / span : 0.0;
  }
  std::vector<std::pair<double, std::size_t>> dist(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      const double diff = scaled_[i * f + j] - q[j];
      s += diff * diff;
    }
    dist[i] = {s, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
  std::size_t unsafe = 0;
  for (std::size_t i = 0; i < k_; ++i) unsafe += labels_[dist[i].second] == Safety::Unsafe;
  return 2 * unsafe > k_ ? Safety::Unsafe : Safety::Safe;
}

// ---------------------------------------------------------------------------
// Models, evaluation, grid

const char* display_name(ClassifierKind kind) noexcept {
  switch (kind) {
    case ClassifierKind::RandomForest:
      return "Random Forest";
    case ClassifierKind::KNearestNeighbor:
      return "K-Nearest Neighbor";
    case ClassifierKind::DecisionTree:
      return "Decision Tree";
  }
  return "";
}

const char* to_string(ClassifierKind kind) noexcept {
  switch (kind) {
    case ClassifierKind::RandomForest:
      return "forest";
    case ClassifierKind::KNearestNeighbor:
      return "knn";
    case ClassifierKind::DecisionTree:
      return "tree";
  }
  return "";
}

std::optional<ClassifierKind> parse_classifier(std::string_view text) noexcept {
  if (text == "forest") return ClassifierKind::RandomForest;
  if (text == "knn") return ClassifierKind::KNearestNeighbor;
  if (text == "tree") return ClassifierKind::DecisionTree;
  return std::nullopt;
}

Safety predict(const Model& model, std::span<const double> row) {
  return std::visit([&](const auto& m) { return m.predict(row); }, model);
}

std::size_t model_dim(const Model& model) {
  return std::visit([](const auto& m) { return m.dim(); }, model);
}

EvalReport evaluate_predictions(std::span<const Safety> predicted, std::span<const Safety> actual) {
  if (predicted.size() != actual.size()) parameter_error("prediction and label counts differ");
  EvalReport r;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] == Safety::Unsafe;
    const bool a = actual[i] == Safety::Unsafe;
    if (p && a) {
      ++r.tp;
    } else if (p) {
      ++r.fp;
    } else if (a) {
      ++r.fn;
    } else {
      ++r.tn;
    }
  }
  auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  r.precision = ratio(r.tp, r.tp + r.fp);
  r.recall = ratio(r.tp, r.tp + r.fn);
  r.accuracy = ratio(r.tp + r.tn, r.total());
  return r;
}

EvalReport evaluate(const Model& model, const Dataset& test) {
  if (test.empty()) parameter_error("cannot evaluate on an empty test set");
  std::vector<Safety> predicted(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) predicted[i] = predict(model, test.row(i));
  return evaluate_predictions(predicted, test.labels);
}

const char* view_label(FeatureView view) noexcept {
  switch (view) {
    case FeatureView::Video:
      return "Video-Level";
    case FeatureView::User:
      return "User-Level";
    case FeatureView::Comment:
      return "Comment-Level";
    case FeatureView::All:
      return "All Features";
  }
  return "";
}

Model train_model(ClassifierKind kind, const Dataset& train, const LearnParams& params, std::uint64_t seed) {
  switch (kind) {
    case ClassifierKind::RandomForest: {
      ForestParams fp = params.forest;
      fp.features_per_split = std::min(fp.features_per_split, train.features.size());
      return train_forest(train, fp, seed);
    }
    case ClassifierKind::KNearestNeighbor:
      return train_knn(train, params.knn_k);
    case ClassifierKind::DecisionTree:
      return train_tree(train, params.tree);
  }
  parameter_error("unknown classifier");
}

std::vector<GridRow> compare_feature_views(const Dataset& data, std::uint64_t seed, const LearnParams& params,
                                           std::span<const FeatureView> views) {
  static constexpr FeatureView kAllViews[] = {FeatureView::Video, FeatureView::User, FeatureView::Comment,
                                              FeatureView::All};
  if (views.empty()) views = kAllViews;
  static constexpr ClassifierKind kKinds[] = {ClassifierKind::RandomForest, ClassifierKind::KNearestNeighbor,
                                              ClassifierKind::DecisionTree};
  const auto [train, test] = split(data, params.train_fraction, derive_seed(seed, 0));
  std::vector<GridRow> rows;
  for (auto kind : kKinds) {
    for (auto view : views) {
      const Dataset tr = train.with_features(view_indices(view));
      const Dataset te = test.with_features(view_indices(view));
      const Model model = train_model(kind, tr, params, derive_seed(seed, 1));
      rows.push_back({kind, view, evaluate(model, te)});
    }
  }
  return rows;
}

void write_eval_grid(std::ostream& out, std::span<const GridRow> rows) {
  out << "Classifier Name\tFeature List\tPrecision\tRecall\tAccuracy\tTP\tFP\tFN\tTN\n";
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::fixed << std::setprecision(1);
  for (const auto& r : rows) {
    out << display_name(r.classifier) << '\t' << view_label(r.view) << '\t' << 100.0 * r.report.precision << '\t'
        << 100.0 * r.report.recall << '\t' << 100.0 * r.report.accuracy << '\t' << r.report.tp << '\t' << r.report.fp
        << '\t' << r.report.fn << '\t' << r.report.tn << '\n';
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

void save_model(std::ostream& out, const Model& model) {
  json j{{"format", "safewatch-model"}, {"format_version", kModelFormatVersion}};
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TreeModel>) {
          j["kind"] = "tree";
          j["tree"] = tree_to_json(m);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          j["kind"] = "forest";
          const auto& p = m.params();
          j["params"] = json{{"n_trees", p.n_trees},
                             {"features_per_split", p.features_per_split},
                             {"max_depth", p.max_depth},
                             {"min_leaf", p.min_leaf},
                             {"bootstrap", p.bootstrap}};
          j["seeds"] = m.seeds();
          json trees = json::array();
          for (const auto& t : m.trees()) trees.push_back(tree_to_json(t));
          j["trees"] = trees;
        } else {
          j["kind"] = "knn";
          j["knn"] = ModelCodec::knn_to_json(m);
        }
      },
      model);
  out << j.dump() << '\n';
}

Model load_model(std::istream& in, std::string_view source_name) {
  auto fail = [&](const std::string& msg) {
    return Error(ErrorKind::Parse, "learn", std::string(source_name) + ": " + msg);
  };
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw fail(std::string("invalid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != "safewatch-model") throw fail("not a safewatch model file");
    if (j.value("format_version", 0) != kModelFormatVersion) throw fail("unsupported format_version");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "tree") return tree_from_json(j.at("tree"));
    if (kind == "knn") return ModelCodec::knn_from_json(j.at("knn"));
    if (kind == "forest") {
      ForestParams p;
      const auto& jp = j.at("params");
      p.n_trees = jp.at("n_trees").get<std::size_t>();
      p.features_per_split = jp.at("features_per_split").get<std::size_t>();
      p.max_depth = jp.at("max_depth").get<std::size_t>();
      p.min_leaf = jp.at("min_leaf").get<std::size_t>();
      p.bootstrap = jp.at("bootstrap").get<bool>();
      std::vector<TreeModel> trees;
      for (const auto& t : j.at("trees")) trees.push_back(tree_from_json(t));
      auto seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
      if (trees.empty() || seeds.size() != trees.size()) throw fail("forest trees/seeds mismatch");
      for (const auto& t : trees) {
        if (t.dim() != trees.front().dim()) throw fail("forest trees disagree on dimension");
      }
      return ForestModel(std::move(trees), std::move(seeds), p);
    }
    throw fail("unknown model kind '" + kind + "'");
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw fail(e.what());
  }
}

}  // namespace safewatch
